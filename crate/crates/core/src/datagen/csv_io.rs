//! CSV bridge for externally featurized flows.
//!
//! Header: `attack_tag,label` followed by `PACKETS * FEATURES` numeric columns
//! in row-major order, named `p{row}.{feature}`.

use std::path::Path;

use super::sample::{padding_violation, FlowSample, FEATURE_NAMES, FLOW_WIDTH, PACKETS};
use crate::{Error, Result};

pub fn csv_column_names(schema: &[&str]) -> Vec<String> {
    let mut cols = vec!["attack_tag".to_string(), "label".to_string()];
    for row in 0..PACKETS {
        for f in schema {
            cols.push(format!("p{row}.{f}"));
        }
    }
    cols
}

/// Parse a CSV of flattened flow samples. `schema` lists the per-packet
/// attribute names in column order.
pub fn ingest_csv(path: impl AsRef<Path>, schema: &[&str]) -> Result<Vec<FlowSample>> {
    let path = path.as_ref();
    let expected = schema.len() * PACKETS;
    if expected != FLOW_WIDTH {
        return Err(Error::Csv(format!(
            "schema has {} attributes; {} per packet are required",
            schema.len(),
            FLOW_WIDTH / PACKETS
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let header = reader
        .headers()
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?
        .clone();
    if header.len() != expected + 2 {
        return Err(Error::Csv(format!(
            "header has {} numeric columns, expected {expected}",
            header.len().saturating_sub(2)
        )));
    }
    let names = csv_column_names(schema);
    for (i, (got, want)) in header.iter().zip(&names).enumerate() {
        if got.trim() != want {
            return Err(Error::Csv(format!("column {}: expected {want:?}, found {got:?}", i + 1)));
        }
    }

    let mut out = Vec::new();
    let mut rejected = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
        if record.len() != expected + 2 {
            return Err(Error::Csv(format!(
                "line {line}: {} numeric columns, expected {expected}",
                record.len().saturating_sub(2)
            )));
        }
        let tag = record[0].trim();
        let label = match record[1].trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => return Err(Error::Csv(format!("line {line}: invalid label {other:?}"))),
        };
        let features = record
            .iter()
            .skip(2)
            .enumerate()
            .map(|(j, cell)| {
                cell.trim().parse::<f32>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    Error::Csv(format!("line {line}, column {}: {cell:?} is not a number", j + 3))
                })
            })
            .collect::<Result<Vec<f32>>>()?;
        if padding_violation(&features).is_some() {
            rejected.push(line);
            continue;
        }
        out.push(FlowSample::new_unchecked(features, label, tag.into()));
    }
    if !rejected.is_empty() {
        let lines: Vec<String> = rejected.iter().map(|l| l.to_string()).collect();
        return Err(Error::Csv(format!(
            "non-contiguous zero padding on line(s) {}",
            lines.join(", ")
        )));
    }
    Ok(out)
}

/// Write samples in the layout accepted by [`ingest_csv`] with the default
/// attribute names.
pub fn write_csv(samples: &[FlowSample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(csv_column_names(&FEATURE_NAMES)).map_err(csv_err)?;
    for s in samples {
        let mut rec = vec![s.attack_tag().to_string(), s.label().to_string()];
        rec.extend(s.features().iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    fn row(tag: &str, label: &str, rows: usize, gap: bool) -> String {
        let mut v = vec![0.0f32; FLOW_WIDTH];
        for r in 0..rows {
            v[r * 11 + 1] = 60.0;
        }
        if gap {
            v[8 * 11 + 1] = 60.0;
        }
        let mut cells = vec![tag.to_string(), label.to_string()];
        cells.extend(v.iter().map(|x| x.to_string()));
        cells.join(",")
    }

    #[test]
    fn two_rows() {
        let f = write(&[
            csv_column_names(&FEATURE_NAMES).join(","),
            row("Syn", "1", 2, false),
            row("benign", "0", 5, false),
        ]);
        let s = ingest_csv(f.path(), &FEATURE_NAMES).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].flow_length(), 5);
    }

    #[test]
    fn wrong_column_count() {
        let mut header = csv_column_names(&FEATURE_NAMES);
        header.pop();
        let f = write(&[header.join(",")]);
        let err = ingest_csv(f.path(), &FEATURE_NAMES).unwrap_err().to_string();
        assert!(err.contains("109") && err.contains("110"), "{err}");
    }

    #[test]
    fn padding_gap_lists_line() {
        let f = write(&[
            csv_column_names(&FEATURE_NAMES).join(","),
            row("Syn", "1", 2, false),
            row("Syn", "1", 2, true),
        ]);
        let err = ingest_csv(f.path(), &FEATURE_NAMES).unwrap_err().to_string();
        assert!(err.contains("line(s) 3"), "{err}");
    }

    #[test]
    fn bad_cells() {
        let mut bad = row("Syn", "1", 2, false);
        bad = bad.replacen(",60,", ",abc,", 1);
        let f = write(&[csv_column_names(&FEATURE_NAMES).join(","), bad]);
        assert!(ingest_csv(f.path(), &FEATURE_NAMES).is_err());
        let f = write(&[csv_column_names(&FEATURE_NAMES).join(","), row("Syn", "2", 2, false)]);
        assert!(ingest_csv(f.path(), &FEATURE_NAMES).unwrap_err().to_string().contains("label"));
    }

    #[test]
    fn write_then_ingest() {
        let f = write(&[csv_column_names(&FEATURE_NAMES).join(","), row("Syn", "1", 3, false)]);
        let s = ingest_csv(f.path(), &FEATURE_NAMES).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&s, out.path()).unwrap();
        assert_eq!(ingest_csv(out.path(), &FEATURE_NAMES).unwrap(), s);
    }
}
