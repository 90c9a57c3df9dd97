//! Result documents and per-trial CSV.
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that every value round-trips exactly. Output contains no timestamps or
//! host information; the same inputs always produce the same bytes.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::analysis::TrialRecord;
use crate::error::Result;

pub const SCHEMA: &str = "nhqc-rescale/result";
pub const SCHEMA_VERSION: u32 = 1;

/// `{:.16e}`; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

struct FixedPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema: &'static str,
    schema_version: u32,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a C>,
    result: &'a R,
}

/// Pretty JSON with fixed float precision and a trailing newline.
pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Wraps `result` in the versioned document envelope.
pub fn result_document<C: Serialize, R: Serialize>(command: &str, config: Option<&C>, result: &R) -> Result<Vec<u8>> {
    to_json_bytes(&Envelope { schema: SCHEMA, schema_version: SCHEMA_VERSION, command, config, result })
}

/// Writes to `path`, or to stdout if `path` is `None`.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

pub const TRIAL_CSV_HEADER: [&str; 13] = [
    "trial",
    "gate_index",
    "a1",
    "a2",
    "b1",
    "b2",
    "subset",
    "weight",
    "detection",
    "retained_mass",
    "e_conventional",
    "e_rescaled",
    "all_leaked",
];

pub fn write_trials_csv<W: Write>(writer: W, records: &[TrialRecord]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(TRIAL_CSV_HEADER)?;
    for r in records {
        let [a1, a2, b1, b2] = r.label.exponents();
        csv.write_record([
            r.trial.to_string(),
            r.gate_index.to_string(),
            a1.to_string(),
            a2.to_string(),
            b1.to_string(),
            b2.to_string(),
            r.subset.name().to_string(),
            format_f64(r.weight),
            format_f64(r.detection),
            format_f64(r.retained_mass),
            format_f64(r.e_conventional),
            r.e_rescaled.map(format_f64).unwrap_or_default(),
            r.e_rescaled.is_none().to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_trials_csv_path(path: &Path, records: &[TrialRecord]) -> Result<()> {
    write_trials_csv(std::fs::File::create(path)?, records)
}
