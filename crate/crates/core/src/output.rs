//! Deterministic CSV artifacts and the run manifest.
//!
//! Every real is written with 17 significant digits so a rerun with the
//! same config produces byte-identical files.

use crate::params::SpinError;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// One table: header plus float rows, rendered row-major.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> Result<String, SpinError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        if row.len() != header.len() {
            return Err(SpinError::InvalidParams(format!(
                "csv row width {} does not match header width {}",
                row.len(),
                header.len()
            )));
        }
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write_real(&mut out, *x);
        }
        out.push('\n');
    }
    Ok(out)
}

/// 17 significant digits, round-trip exact; integral values still carry
/// the exponent so columns stay uniform.
pub fn write_real(out: &mut String, x: f64) {
    if x.is_nan() {
        out.push_str("nan");
    } else {
        let _ = write!(out, "{x:.16e}");
    }
}

pub fn config_hash(config_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    let d = h.finalize();
    let mut s = String::with_capacity(64);
    for b in d {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Collects per-artifact entries and writes `manifest.csv` next to
/// them. Failed runs leave their partial artifacts marked FAILED.
pub struct Manifest {
    dir: PathBuf,
    config_hash: String,
    entries: Vec<(String, &'static str)>,
}

impl Manifest {
    pub fn new(dir: &Path, config_text: &str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            config_hash: config_hash(config_text),
            entries: Vec::new(),
        }
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<(), SpinError> {
        let body = csv_string(header, rows)?;
        fs::write(self.dir.join(name), body)?;
        self.entries.push((name.to_string(), "OK"));
        Ok(())
    }

    pub fn mark_failed(&mut self, name: &str) {
        self.entries.push((name.to_string(), "FAILED"));
    }

    pub fn finish(&self) -> Result<(), SpinError> {
        let mut out = String::from("file,config_sha256,status\n");
        for (name, status) in &self.entries {
            let _ = writeln!(out, "{name},{},{status}", self.config_hash);
        }
        fs::write(self.dir.join("manifest.csv"), out)?;
        Ok(())
    }
}
