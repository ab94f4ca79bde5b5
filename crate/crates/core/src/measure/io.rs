//! CSV and JSON encodings of discrete measures.
//!
//! CSV: header `x0,...,x{d-1},weight`, one atom per row.
//! JSON: `{"dim": d, "points": [[...], ...], "weights": [...]}`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureFormat {
    Csv,
    Json,
}

impl MeasureFormat {
    /// `.json` files are JSON, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => MeasureFormat::Json,
            _ => MeasureFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct MeasureJson<T> {
    dim: usize,
    points: Vec<Vec<T>>,
    weights: Vec<T>,
}

pub fn read_measure<T: Scalar, R: Read>(reader: R, format: MeasureFormat) -> Result<DiscreteMeasure<T>> {
    match format {
        MeasureFormat::Json => {
            let raw: MeasureJson<T> = serde_json::from_reader(reader)?;
            DiscreteMeasure::new(raw.dim, raw.points, raw.weights)
        }
        MeasureFormat::Csv => read_csv(reader),
    }
}

fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<DiscreteMeasure<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = headers.len();
    if cols < 2 {
        return Err(Error::Parse("expected columns x0,...,x{d-1},weight".into()));
    }
    let d = cols - 1;
    for (k, h) in headers.iter().take(d).enumerate() {
        if h != format!("x{k}") {
            return Err(Error::Parse(format!("column {k} should be `x{k}`, found `{h}`")));
        }
    }
    if &headers[d] != "weight" {
        return Err(Error::Parse(format!("last column should be `weight`, found `{}`", &headers[d])));
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| -> Result<T> {
            s.parse::<f64>()
                .map(T::c)
                .map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", row + 1)))
        };
        for k in 0..d {
            coords.push(parse(&rec[k])?);
        }
        weights.push(parse(&rec[d])?);
    }
    DiscreteMeasure::from_flat(d, coords, weights)
}

pub fn write_measure_csv<T: Scalar, W: Write>(m: &DiscreteMeasure<T>, mut w: W) -> Result<()> {
    let header: Vec<String> = (0..m.dim()).map(|k| format!("x{k}")).chain(["weight".into()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (i, p) in m.points().enumerate() {
        let row: Vec<String> = p
            .iter()
            .chain(std::iter::once(&m.weight(i)))
            .map(|v| format!("{:?}", v.f64()))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_measure_json<T: Scalar, W: Write>(m: &DiscreteMeasure<T>, w: W) -> Result<()> {
    let raw = MeasureJson {
        dim: m.dim(),
        points: m.points().map(<[T]>::to_vec).collect(),
        weights: m.weights().to_vec(),
    };
    serde_json::to_writer(w, &raw)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let m = DiscreteMeasure::<f64>::new(
            2,
            vec![vec![0.1, -2.5], vec![3.0, 1e-7]],
            vec![0.25, 0.75],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_measure_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,weight\n"));
        let back: DiscreteMeasure<f64> = read_measure(buf.as_slice(), MeasureFormat::Csv).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_layout() {
        let src = r#"{"dim": 1, "points": [[-0.5], [0.5]], "weights": [1, 1]}"#;
        let m: DiscreteMeasure<f64> = read_measure(src.as_bytes(), MeasureFormat::Json).unwrap();
        assert_eq!(m.len(), 2);
        let mut out = Vec::new();
        write_measure_json(&m, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            r#"{"dim":1,"points":[[-0.5],[0.5]],"weights":[1.0,1.0]}"#
        );
    }

    #[test]
    fn bad_csv_headers() {
        let src = "a,b,weight\n0,0,1\n";
        assert!(read_measure::<f64, _>(src.as_bytes(), MeasureFormat::Csv).is_err());
        let src = "x0,x1,w\n0,0,1\n";
        assert!(read_measure::<f64, _>(src.as_bytes(), MeasureFormat::Csv).is_err());
        let src = "x0,weight\n0,-1\n";
        assert!(read_measure::<f64, _>(src.as_bytes(), MeasureFormat::Csv).is_err());
    }
}
