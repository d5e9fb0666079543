//! Reports and their JSON / CSV encodings.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use weylstrip_core::CMat;

use crate::config::{Complex, Format, ScenarioConfig};

/// One result row: a spectral point (absent for corner-jet records) at one
/// coordinate value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub z: Option<Complex>,
    pub coord: f64,
    pub phi: Option<Vec<Vec<Complex>>>,
    pub uncertainty: Option<f64>,
    pub residual: Option<f64>,
    pub flags: BTreeMap<String, bool>,
    pub values: BTreeMap<String, f64>,
}

impl Record {
    pub fn new(z: Option<Complex>, coord: f64) -> Self {
        Self { z, coord, phi: None, uncertainty: None, residual: None, flags: BTreeMap::new(), values: BTreeMap::new() }
    }

    pub fn with_phi(mut self, phi: &CMat) -> Self {
        self.phi = Some(encode_matrix(phi));
        self
    }

    pub fn flag(mut self, name: &str, value: bool) -> Self {
        self.flags.insert(name.to_string(), value);
        self
    }

    pub fn value(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }
}

pub fn encode_matrix(m: &CMat) -> Vec<Vec<Complex>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub max_uncertainty: Option<f64>,
    pub max_residual: Option<f64>,
    /// Name of every flag that is false in some record.
    pub failed_flags: Vec<String>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub mode: String,
    pub config: ScenarioConfig,
    /// Shape of `phi` in every record, for the CSV layout.
    pub phi_shape: [usize; 2],
    pub records: Vec<Record>,
    pub summary: Summary,
    /// Seconds since the Unix epoch; excluded from determinism comparisons.
    pub timestamp: u64,
}

fn max_opt(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.flatten().fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

impl Report {
    pub fn new(mode: &str, config: ScenarioConfig, phi_shape: [usize; 2], records: Vec<Record>, values: BTreeMap<String, f64>) -> Self {
        let mut failed: Vec<String> = records
            .iter()
            .flat_map(|r| r.flags.iter().filter(|(_, v)| !**v).map(|(k, _)| k.clone()))
            .collect();
        failed.sort();
        failed.dedup();
        let summary = Summary {
            records: records.len(),
            max_uncertainty: max_opt(records.iter().map(|r| r.uncertainty)),
            max_residual: max_opt(records.iter().map(|r| r.residual)),
            failed_flags: failed,
            values,
        };
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self { mode: mode.to_string(), config, phi_shape, records, summary, timestamp }
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Json => self.write_json(out),
            Format::Csv => self.write_csv(out),
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["z_re".to_string(), "z_im".to_string(), "coord".to_string()];
        for r in 0..self.phi_shape[0] {
            for c in 0..self.phi_shape[1] {
                h.push(format!("phi_{r}_{c}_re"));
                h.push(format!("phi_{r}_{c}_im"));
            }
        }
        h.extend(["uncertainty", "residual", "flags"].map(String::from));
        h
    }

    /// Header row, then one row per record. Numbers carry 17 significant
    /// digits; absent values are empty; flags are `name=0|1` joined by `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.csv_header().join(","))?;
        let num = |v: f64| format!("{v:.16e}");
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        for rec in &self.records {
            let mut row = Vec::new();
            match rec.z {
                Some(z) => row.extend([num(z[0]), num(z[1])]),
                None => row.extend([String::new(), String::new()]),
            }
            row.push(num(rec.coord));
            for r in 0..self.phi_shape[0] {
                for c in 0..self.phi_shape[1] {
                    match &rec.phi {
                        Some(p) => row.extend([num(p[r][c][0]), num(p[r][c][1])]),
                        None => row.extend([String::new(), String::new()]),
                    }
                }
            }
            row.push(opt(rec.uncertainty));
            row.push(opt(rec.residual));
            let flags: Vec<String> = rec.flags.iter().map(|(k, v)| format!("{k}={}", u8::from(*v))).collect();
            row.push(flags.join(";"));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    fn config() -> ScenarioConfig {
        ScenarioConfig::from_json(r#"{"sig": {"m1": 1, "m2": 1}, "potential": {"kind": "zero"}}"#, Path::new(".")).unwrap()
    }

    #[test]
    fn empty_report_csv_is_header_only() {
        let rep = Report::new("weyl", config(), [1, 1], Vec::new(), BTreeMap::new());
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "z_re,z_im,coord,phi_0_0_re,phi_0_0_im,uncertainty,residual,flags\n");
    }

    #[test]
    fn csv_numbers_round_trip() {
        let phi = CMat::from_element(1, 1, weylstrip_core::C64::new(0.1, -1.0 / 3.0));
        let rec = Record::new(Some([0.2, std::f64::consts::PI]), 20.0).with_phi(&phi).flag("converged", true);
        let rep = Report::new("weyl", config(), [1, 1], vec![rec.clone()], BTreeMap::new());
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(row[4].parse::<f64>().unwrap(), -1.0 / 3.0);
        assert_eq!(row[7], "converged=1");
        assert_eq!(rep.summary.failed_flags, Vec::<String>::new());
    }
}
