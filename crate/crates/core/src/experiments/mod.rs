//! Seeded experiments that emit CSV tables.
//!
//! Every experiment is a pure function of its configuration and seed.
//! Independent cells run on the rayon pool, each with a random source
//! derived from `(master seed, cell index)`, and results are assembled in
//! cell order so the output does not depend on scheduling.

mod bench;
mod field;
mod fourier;
mod gradients;
mod lipschitz;
mod toy;

pub use bench::{bench_projections, bench_table, BenchRow, BENCH_BATCHES};
pub use field::{distance_field_export, lattice, FieldExport, FIELD_TARGET};
pub use fourier::{
    fourier_data, fourier_experiment, fourier_table, FourierConfig, FourierData, FourierRep, FourierRow, FourierTarget,
    AUG_THRESHOLD,
};
pub use gradients::{
    identity_loss, gradient_paths, gradient_ratio_density, paths_table, IdentityLoss, Orthogonalizer, PathConfig, PathInit, PathRun,
    RatioRow, RatioSummary,
};
pub use lipschitz::{lipschitz_scan, LipschitzRow, LipschitzScan};
pub use toy::{decode, toy_data, toy_rotation_estimation, toy_table, ToyConfig, ToyData, ToyHead, ToyLoss, ToyRep, ToyRow};

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::repr::io::fmt_f64;

/// A CSV table with a mandatory header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses CSV text written by [`Table::to_csv`].
    pub fn parse(text: &str) -> Option<Table> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines.next()?.split(',').map(|s| s.trim().to_string()).collect();
        let rows = lines
            .map(|l| l.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        if rows.iter().any(|r| r.len() != header.len()) {
            return None;
        }
        Some(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn num(v: f64) -> String {
    fmt_f64(v)
}

/// Sidecar describing how an output was produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Meta {
    pub entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new(experiment: &str) -> Self {
        let mut m = Meta::default();
        m.set("experiment", experiment);
        m.set("version", version());
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

pub fn version() -> String {
    format!("rotkit {}", env!("CARGO_PKG_VERSION"))
}

/// Writes `<stem>.csv` and `<stem>.meta` into `dir`.
pub fn write_outputs(dir: &Path, stem: &str, table: &Table, meta: &Meta) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}.csv")), table.to_csv())?;
    std::fs::write(dir.join(format!("{stem}.meta")), meta.to_text())?;
    Ok(())
}

/// Seed for cell `index` of a run seeded with `master` (SplitMix64 finalizer).
pub fn cell_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Median of finite values; `NaN` when there are none.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.1)]);
        let parsed = Table::parse(&t.to_csv()).unwrap();
        assert_eq!(parsed, t);
        assert_eq!(parsed.column("b"), Some(1));
        assert_eq!(Table::parse("a,b\n1\n"), None);
    }

    #[test]
    fn cell_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| cell_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(cell_seed(7, 0), cell_seed(8, 0));
        assert_eq!(cell_seed(7, 3), cell_seed(7, 3));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[f64::NAN]).is_nan());
    }

    #[test]
    fn meta_text() {
        let mut m = Meta::new("x");
        m.set("seed", 3);
        m.set("seed", 4);
        assert_eq!(m.get("seed"), Some("4"));
        assert!(m.to_text().contains("version = rotkit "));
    }
}
