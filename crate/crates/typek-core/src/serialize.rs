//! Deterministic artifact serialization.
//!
//! Every float in a report is written with 17 significant digits, which is
//! exactly enough to round-trip an `f64` bit for bit, so repeated runs with
//! identical inputs produce byte-identical artifacts. Files are written to a
//! temporary sibling and renamed into place so readers never observe a
//! half-written artifact.

use crate::fixed_points::FixedPointRecord;
use crate::orbit::OrbitTrace;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io::{self, Write};
use std::path::Path;

/// Pretty-printing JSON formatter that renders every float in scientific
/// notation with 17 significant digits.
pub struct SciFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl SciFormatter<'_> {
    pub fn new() -> Self {
        SciFormatter {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Default for SciFormatter<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.8e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serializes a value to pretty JSON with full-precision floats and a
/// trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut out = Vec::with_capacity(4096);
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter::new());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

/// Full-precision float rendering for CSV cells.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the fixed-point catalog as CSV (planar records).
pub fn fixed_points_csv(records: &[FixedPointRecord]) -> String {
    let mut s = String::from(
        "index,x1,x2,kind,classification,residual,\
         eig1_re,eig1_im,eig2_re,eig2_im,low_precision\n",
    );
    for (i, r) in records.iter().enumerate() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            i,
            csv_float(r.location[0]),
            csv_float(r.location[1]),
            r.kind,
            r.classification,
            csv_float(r.residual),
            csv_float(r.eigenvalues[0].re),
            csv_float(r.eigenvalues[0].im),
            csv_float(r.eigenvalues[1].re),
            csv_float(r.eigenvalues[1].im),
            r.low_precision,
        ));
    }
    s
}

/// Renders an orbit trace as CSV: one row per visited point, with the step
/// relation tag toward the next point (empty on the final row).
pub fn orbit_csv(trace: &OrbitTrace) -> String {
    let dim = trace.points.first().map_or(0, |p| p.dim());
    let mut s = String::from("step");
    for i in 1..=dim {
        s.push_str(&format!(",x{i}"));
    }
    s.push_str(",tag\n");
    for (i, p) in trace.points.iter().enumerate() {
        s.push_str(&i.to_string());
        for c in p.as_slice() {
            s.push(',');
            s.push_str(&csv_float(*c));
        }
        s.push(',');
        if i < trace.tags.len() {
            s.push_str(&trace.tags[i].to_string());
        }
        s.push('\n');
    }
    s
}

/// Writes a file atomically: the contents land in a `.tmp` sibling first and
/// are renamed over the destination.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_render_with_seventeen_significant_digits() {
        let s = to_json_string(&vec![0.5f64]).unwrap();
        assert_eq!(s, "[\n  5.0000000000000000e-1\n]\n");
        let s = to_json_string(&vec![1.0f64]).unwrap();
        assert_eq!(s, "[\n  1.0000000000000000e0\n]\n");
    }

    #[test]
    fn json_floats_round_trip_bit_for_bit() {
        let values = vec![
            0.1f64,
            1.0 / 3.0,
            1e-300,
            9.007199254740993e15,
            -2.2250738585072014e-308,
            0.31767219617198067,
        ];
        let s = to_json_string(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        #[derive(Serialize)]
        struct Sample {
            name: &'static str,
            values: Vec<f64>,
        }
        let v = Sample {
            name: "probe",
            values: vec![0.1, 0.2, 0.30000000000000004],
        };
        assert_eq!(to_json_string(&v).unwrap(), to_json_string(&v).unwrap());
    }

    #[test]
    fn non_finite_floats_become_null() {
        let s = to_json_string(&vec![f64::NAN]).unwrap();
        assert_eq!(s, "[\n  null\n]\n");
    }

    #[test]
    fn atomic_write_replaces_and_cleans_up() {
        let dir = std::env::temp_dir().join("typek-serialize-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("artifact.json");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert!(!path.with_file_name("artifact.json.tmp").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
