use super::{FeatureHistogram, JsdMatrix};
use crate::{Error, Result};

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

/// Attack tags as row labels, features as columns.
pub fn jsd_matrix_csv(m: &JsdMatrix) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    let mut header = vec!["attack".to_string()];
    header.extend(m.features.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (tag, row) in m.attacks.iter().zip(&m.values) {
        let mut rec = vec![tag.clone()];
        rec.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

pub fn parse_jsd_matrix_csv(text: &str) -> Result<JsdMatrix> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    let features: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut attacks = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        attacks.push(rec[0].to_string());
        values.push(
            rec.iter()
                .skip(1)
                .map(|c| c.parse::<f64>().map_err(csv_err))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(JsdMatrix { attacks, features, values })
}

/// `bin_left,bin_right,density` rows.
pub fn histogram_csv(h: &FeatureHistogram) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(["bin_left", "bin_right", "density"]).map_err(csv_err)?;
    for (edges, d) in h.bin_edges.windows(2).zip(&h.densities) {
        w.write_record([format!("{}", edges[0]), format!("{}", edges[1]), format!("{d}")])
            .map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_csv_round_trip() {
        let m = JsdMatrix {
            attacks: vec!["Syn".into(), "WebDDoS".into()],
            features: vec!["Packet Length".into(), "Time".into()],
            values: vec![vec![1.0, 0.25], vec![1.0, 0.125]],
        };
        let text = jsd_matrix_csv(&m).unwrap();
        assert!(text.starts_with("attack,Packet Length,Time\n"));
        assert_eq!(parse_jsd_matrix_csv(&text).unwrap(), m);
    }
}
