//! SVG phase-portrait rendering: axes, dashed nullclines, the three solid
//! pieces of the attracting boundary, and labeled fixed-point markers.
//! Rendering is a pure function of its inputs, so identical runs produce
//! byte-identical files.

use crate::attractor::AttractorDecomposition;
use crate::cone::Point;
use crate::fixed_points::{Classification, FixedPointKind, FixedPointRecord, NullclinePolyline};
use crate::map::KolmogorovMap;
use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 720.0;
const MARGIN: f64 = 70.0;

const COLOR_SIGMA_H: &str = "#0072b2";
const COLOR_SIGMA_V: &str = "#009e73";
const COLOR_SIGMA_0: &str = "#d55e00";
const COLOR_NULLCLINE: &str = "#999999";

/// World-to-pixel mapping with 5% headroom above the state box.
struct Frame {
    rx: f64,
    ry: f64,
}

impl Frame {
    fn new(r: &Point) -> Self {
        Frame {
            rx: r[0] * 1.05,
            ry: r[1] * 1.05,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + v / self.rx * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - v / self.ry * (HEIGHT - 2.0 * MARGIN)
    }
}

fn push_polyline(out: &mut String, frame: &Frame, pts: &[Point], stroke: &str, dashed: bool) {
    if pts.len() < 2 {
        return;
    }
    out.push_str("  <polyline fill=\"none\" stroke=\"");
    out.push_str(stroke);
    out.push_str("\" stroke-width=\"2\"");
    if dashed {
        out.push_str(" stroke-dasharray=\"6 4\"");
    }
    out.push_str(" points=\"");
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", frame.x(p[0]), frame.y(p[1]));
    }
    out.push_str("\" />\n");
}

fn marker_fill(class: Classification) -> &'static str {
    match class {
        Classification::Attractor => "#000000",
        Classification::Saddle => "#ffffff",
        Classification::Repeller => "#bbbbbb",
        Classification::Nonhyperbolic => "#e69f00",
    }
}

fn record_label(r: &FixedPointRecord, interior_index: usize) -> String {
    match r.kind {
        FixedPointKind::Origin => "0".to_string(),
        FixedPointKind::Axial1 => "q1".to_string(),
        FixedPointKind::Axial2 => "q2".to_string(),
        FixedPointKind::Interior => format!("p{interior_index}"),
    }
}

/// Renders the full phase portrait for a planar map.
pub fn render_svg(
    map: &KolmogorovMap,
    records: &[FixedPointRecord],
    dec: &AttractorDecomposition,
    nullclines: &[NullclinePolyline],
) -> String {
    let frame = Frame::new(map.r());
    let mut out = String::with_capacity(64 * 1024);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\">"
    );
    out.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\" />\n");

    // Axes along the coordinate planes with the state-box extent labeled.
    let x0 = frame.x(0.0);
    let y0 = frame.y(0.0);
    let x1 = frame.x(frame.rx);
    let y1 = frame.y(frame.ry);
    let _ = writeln!(
        out,
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" \
         stroke=\"#000000\" stroke-width=\"1\" />"
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" \
         stroke=\"#000000\" stroke-width=\"1\" />"
    );
    let r = map.r();
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\">x1 = {}</text>",
        frame.x(r[0]),
        y0 + 24.0,
        r[0]
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"end\">x2 = {}</text>",
        x0 - 10.0,
        frame.y(r[1]) + 4.0,
        r[1]
    );

    // Parameter line (deterministic: parameters are stored sorted by name).
    let params: Vec<String> = map
        .params()
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect();
    let _ = writeln!(
        out,
        "  <text x=\"{MARGIN:.2}\" y=\"30\" font-family=\"monospace\" font-size=\"14\">{}</text>",
        params.join(", ")
    );
    let _ = writeln!(
        out,
        "  <text x=\"{MARGIN:.2}\" y=\"50\" font-family=\"monospace\" font-size=\"13\">\
         <tspan fill=\"{COLOR_SIGMA_H}\">first-axis manifold</tspan>  \
         <tspan fill=\"{COLOR_SIGMA_V}\">second-axis manifold</tspan>  \
         <tspan fill=\"{COLOR_SIGMA_0}\">connecting curve</tspan>  \
         <tspan fill=\"{COLOR_NULLCLINE}\">nullclines (dashed)</tspan></text>"
    );

    for nc in nullclines {
        push_polyline(&mut out, &frame, &nc.samples, COLOR_NULLCLINE, true);
    }
    push_polyline(&mut out, &frame, &dec.sigma_h.points, COLOR_SIGMA_H, false);
    push_polyline(&mut out, &frame, &dec.sigma_v.points, COLOR_SIGMA_V, false);
    if dec.sigma_0.points.len() >= 2 {
        push_polyline(&mut out, &frame, &dec.sigma_0.points, COLOR_SIGMA_0, false);
    } else if let Some(p) = dec.sigma_0.points.first() {
        let _ = writeln!(
            out,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{COLOR_SIGMA_0}\" />",
            frame.x(p[0]),
            frame.y(p[1])
        );
    }

    let mut interior_index = 0usize;
    for rec in records {
        let label = record_label(rec, interior_index);
        if rec.kind == FixedPointKind::Interior {
            interior_index += 1;
        }
        let cx = frame.x(rec.location[0]);
        let cy = frame.y(rec.location[1]);
        let _ = writeln!(
            out,
            "  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"5\" fill=\"{}\" \
             stroke=\"#000000\" stroke-width=\"1.5\" />",
            marker_fill(rec.classification)
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" \
             font-size=\"14\">{label}</text>",
            cx + 9.0,
            cy - 9.0
        );
    }

    out.push_str("</svg>\n");
    out
}
