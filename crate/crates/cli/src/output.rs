//! Report serialization: a line-oriented JSON stream or a CSV table, both
//! carrying the same fields in three clearly separated sections: a
//! timestamped header, the deterministic data section, and per-unit
//! timings. Identical configs reproduce the data section byte for byte.

use std::io::{self, Write};

use serde::Serialize;

use distgraph::report::{CheckRecord, Timing, SCHEMA_VERSION};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn from_config(cfg: &RunConfig) -> Result<Self, String> {
        match cfg.format.as_deref() {
            None | Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

#[derive(Serialize)]
struct HeaderLine<'a> {
    section: &'static str,
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    generated_unix: u64,
    command: &'a str,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct DataLine<'a> {
    section: &'static str,
    #[serde(flatten)]
    record: &'a CheckRecord,
}

#[derive(Serialize)]
struct TimingLine<'a> {
    section: &'static str,
    #[serde(flatten)]
    timing: &'a Timing,
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_report(
    w: &mut dyn Write,
    command: &str,
    config: &RunConfig,
    records: &[CheckRecord],
    timings: &[Timing],
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Json => write_json(w, command, config, records, timings),
        Format::Csv => write_csv(w, command, config, records, timings),
    }
}

fn write_json(
    w: &mut dyn Write,
    command: &str,
    config: &RunConfig,
    records: &[CheckRecord],
    timings: &[Timing],
) -> io::Result<()> {
    let header = HeaderLine {
        section: "header",
        schema_version: SCHEMA_VERSION,
        tool: "distgraph",
        version: env!("CARGO_PKG_VERSION"),
        generated_unix: now_unix(),
        command,
        config,
    };
    writeln!(w, "{}", serde_json::to_string(&header)?)?;
    for record in records {
        let line = DataLine {
            section: "data",
            record,
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    for timing in timings {
        let line = TimingLine {
            section: "timing",
            timing,
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

const CSV_COLUMNS: &str =
    "key,family,q,d,ensemble,set_size,t,k,n,count,value,main_term,remainder,bound,hypothesis_met,vacuous,holds,detail";

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn write_csv(
    w: &mut dyn Write,
    command: &str,
    config: &RunConfig,
    records: &[CheckRecord],
    timings: &[Timing],
) -> io::Result<()> {
    writeln!(
        w,
        "# distgraph report schema_version={SCHEMA_VERSION} version={} generated_unix={}",
        env!("CARGO_PKG_VERSION"),
        now_unix()
    )?;
    writeln!(
        w,
        "# command={command} config={}",
        serde_json::to_string(config)?
    )?;
    writeln!(w, "{CSV_COLUMNS}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_quote(&r.key),
            csv_quote(&r.family),
            r.q,
            r.d,
            csv_quote(&r.ensemble),
            opt(&r.set_size),
            csv_quote(r.t.as_deref().unwrap_or("")),
            opt(&r.k),
            opt(&r.n),
            opt(&r.count),
            opt(&r.value),
            opt(&r.main_term),
            opt(&r.remainder),
            opt(&r.bound),
            opt(&r.hypothesis_met),
            r.vacuous,
            r.holds,
            csv_quote(r.detail.as_deref().unwrap_or("")),
        )?;
    }
    for t in timings {
        writeln!(w, "# timing,{},{}", csv_quote(&t.key), t.micros)?;
    }
    Ok(())
}

/// The data section alone, used by determinism checks: JSON lines with
/// `"section":"data"`, or CSV rows that are neither comments nor the column
/// header.
#[cfg(test)]
pub fn extract_data_section(report: &str, format: Format) -> Vec<&str> {
    report
        .lines()
        .filter(|line| match format {
            Format::Json => line.starts_with("{\"section\":\"data\""),
            Format::Csv => !line.starts_with('#') && *line != CSV_COLUMNS && !line.is_empty(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> CheckRecord {
        let mut r = CheckRecord::new("k/a", "fam", 3, 2);
        // counts near 2^64 must serialize losslessly
        r.count = Some(36_893_488_147_419_103_232u128);
        r.value = Some(0.123_456_789_012_345_68);
        r.detail = Some("has \"quotes\", commas".into());
        r
    }

    #[test]
    fn json_lines_carry_sections_and_big_integers() {
        let mut buf = Vec::new();
        write_json(
            &mut buf,
            "test",
            &RunConfig::default(),
            &[sample_record()],
            &[Timing {
                key: "k".into(),
                micros: 5,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("{\"section\":\"header\""));
        assert!(lines[1].starts_with("{\"section\":\"data\""));
        assert!(lines[1].contains("36893488147419103232"));
        assert!(lines[2].starts_with("{\"section\":\"timing\""));

        let data = extract_data_section(&text, Format::Json);
        assert_eq!(data.len(), 1);
    }

    #[test]
    fn csv_quotes_and_sections() {
        let mut buf = Vec::new();
        write_csv(
            &mut buf,
            "test",
            &RunConfig::default(),
            &[sample_record()],
            &[Timing {
                key: "k".into(),
                micros: 5,
            }],
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"has \"\"quotes\"\", commas\""));
        let data = extract_data_section(&text, Format::Csv);
        assert_eq!(data.len(), 1);
        assert!(data[0].starts_with("\"k/a\""));
    }
}
