//! Column-oriented series written as CSV with round-trip precision.

use std::path::Path;

use crate::error::{Error, Result};
use crate::system::io::{fmt_real, parse_real};

/// An integer index column followed by named value columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub index_name: String,
    pub index: Vec<u64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl Series {
    pub fn new(index_name: impl Into<String>, index: Vec<u64>) -> Self {
        Series { index_name: index_name.into(), index, columns: Vec::new() }
    }

    pub fn with(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push((name.into(), values));
        self
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn header(&self) -> Vec<&str> {
        std::iter::once(self.index_name.as_str()).chain(self.columns.iter().map(|(n, _)| n.as_str())).collect()
    }
}

pub fn emit_csv(series: &Series, path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::invalid("refusing to write an empty series"));
    }
    if let Some((name, _)) = series.columns.iter().find(|(_, v)| v.len() != series.len()) {
        return Err(Error::invalid(format!("column {name} has the wrong length")));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(series.header())?;
    for (row, t) in series.index.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(series.columns.iter().map(|(_, v)| fmt_real(v[row])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Series> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let Some((index_name, names)) = header.split_first() else {
        return Err(Error::Parse("missing header".into()));
    };
    let mut s = Series::new(index_name.clone(), Vec::new());
    s.columns = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for rec in r.records() {
        let rec = rec?;
        let t = rec.get(0).unwrap_or("");
        s.index.push(t.parse().map_err(|_| Error::Parse(format!("bad index {t:?}")))?);
        for (k, col) in s.columns.iter_mut().enumerate() {
            col.1.push(parse_real(rec.get(k + 1).unwrap_or(""))?);
        }
    }
    Ok(s)
}

/// Bound breakdowns in the `term,value` schema.
pub fn emit_terms(terms: &[(String, f64)], path: &Path) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::invalid("refusing to write an empty breakdown"));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["term", "value"])?;
    for (k, v) in terms {
        w.write_record([k.as_str(), &fmt_real(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_terms(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        out.push((rec.get(0).unwrap_or("").to_string(), parse_real(rec.get(1).unwrap_or(""))?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("j.csv");
        let s = Series::new("t", vec![1, 2, 3])
            .with("J_meta", vec![0.1, 1.0 / 3.0, 2e-300])
            .with("J_single", vec![f64::MAX, -0.0, 7.125])
            .with("J_fixed", vec![std::f64::consts::PI, 1e22, 5e-324]);
        emit_csv(&s, &p).unwrap();
        let back = read_csv(&p).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.header(), ["t", "J_meta", "J_single", "J_fixed"]);
    }

    #[test]
    fn empty_series_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_csv(&Series::new("t", vec![]), &dir.path().join("e.csv")).is_err());
    }

    #[test]
    fn unwritable_path_is_io() {
        let s = Series::new("t", vec![1]).with("v", vec![1.0]);
        let e = emit_csv(&s, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
