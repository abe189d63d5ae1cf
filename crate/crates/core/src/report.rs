//! Serialization shared by the command-line tools: byte-stable JSON, the
//! series CSV format and small CSV helpers.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::types::{Provenance, WindSeries};

/// Column header of the value section of a series file.
pub const SERIES_VALUE_COLUMN: &str = "wind_speed_mps";

/// Formats a float with 17 significant digits, trailing zeros trimmed.
pub fn format_sig17(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == 0.0 {
        return "0.0".to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return format!("{s}.0");
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

/// Pretty JSON with every float at 17 significant digits.
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(value)).map_err(|e| Error::io(path, e))
}

pub fn format_time(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Writes a series: three `# key: value` metadata lines (start_time,
/// step_seconds, provenance), a header row, then one speed per line.
pub fn write_series<W: Write>(mut w: W, series: &WindSeries) -> io::Result<()> {
    writeln!(w, "# start_time: {}", format_time(series.start_time()))?;
    writeln!(w, "# step_seconds: {}", series.step_seconds())?;
    writeln!(w, "# provenance: {}", series.provenance())?;
    writeln!(w, "{SERIES_VALUE_COLUMN}")?;
    for v in series.values() {
        writeln!(w, "{v}")?;
    }
    w.flush()
}

pub fn save_series(path: impl AsRef<Path>, series: &WindSeries) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_series(BufWriter::new(file), series).map_err(|e| Error::io(path, e))
}

/// True when the text starts with the series metadata header.
pub fn looks_like_series(first_line: &str) -> bool {
    first_line.trim_start().starts_with("# start_time")
}

/// Reads the format produced by [`write_series`]. The source step of a loaded
/// series is its own step.
pub fn read_series<R: Read>(reader: R) -> Result<WindSeries> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let mut meta = |key: &str| -> Result<String> {
        let (i, line) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing '{key}' header line"),
        })?;
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        line.strip_prefix('#')
            .and_then(|rest| rest.trim().strip_prefix(key))
            .and_then(|rest| rest.trim_start().strip_prefix(':'))
            .map(|v| v.trim().to_string())
            .ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected '# {key}: ...'"),
            })
    };
    let start_text = meta("start_time")?;
    let start = DateTime::parse_from_rfc3339(&start_text)
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad start_time '{start_text}': {e}"),
        })?
        .with_timezone(&Utc);
    let step_text = meta("step_seconds")?;
    let step: u64 = step_text.parse().map_err(|_| Error::Parse {
        line: 2,
        message: format!("bad step_seconds '{step_text}'"),
    })?;
    let provenance: Provenance = meta("provenance")?.parse()?;

    let mut values = Vec::new();
    let mut saw_header = false;
    for (i, line) in lines {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            if field == SERIES_VALUE_COLUMN {
                continue;
            }
        }
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("bad wind speed '{field}'"),
        })?;
        values.push(v);
    }
    WindSeries::new(start, step, values, provenance, step)
}

pub fn load_series(path: impl AsRef<Path>) -> Result<WindSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_series(file)
}

/// Writes a headed CSV of pre-formatted rows.
pub fn write_csv<I>(path: impl AsRef<Path>, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let io_err = |e: csv::Error| Error::io(path, e.into());
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
