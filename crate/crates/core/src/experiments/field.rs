//! Planar distance fields around a fixed target.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{field_csv, gradient_field, FieldPoint, Metric};

/// Target used for exported fields.
pub const FIELD_TARGET: [f64; 2] = [1.0, 0.0];

/// `n × n` lattice over `[−half, half]²`, row-major in `y₂` then `y₁`.
pub fn lattice(n: usize, half: f64) -> Vec<[f64; 2]> {
    let step = if n > 1 { 2.0 * half / (n - 1) as f64 } else { 0.0 };
    let at = |i: usize| if n > 1 { -half + step * i as f64 } else { 0.0 };
    (0..n).flat_map(|j| (0..n).map(move |i| [at(i), at(j)])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldExport {
    pub metric: Metric,
    pub points: Vec<FieldPoint>,
}

impl FieldExport {
    pub fn csv(&self) -> String {
        field_csv(&self.points)
    }

    pub fn file_name(&self) -> String {
        format!("field_{}.csv", self.metric.tag())
    }
}

/// Negative gradient fields of each metric around `(1, 0)` on an `n × n`
/// lattice over `[−2, 2]²`. Writes `field_<metric>.csv` files when `dir`
/// is given.
pub fn distance_field_export(metrics: &[Metric], n: usize, dir: Option<&Path>) -> Result<Vec<FieldExport>> {
    if n == 0 {
        return Err(Error::Config(vec!["field lattice needs at least one point per side".into()]));
    }
    let grid = lattice(n, 2.0);
    let out = metrics
        .iter()
        .map(|&metric| {
            Ok(FieldExport {
                metric,
                points: gradient_field(metric, FIELD_TARGET, &grid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        for f in &out {
            std::fs::write(dir.join(f.file_name()), f.csv())?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_corners() {
        let g = lattice(5, 2.0);
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], [-2.0, -2.0]);
        assert_eq!(g[24], [2.0, 2.0]);
        assert_eq!(g[12], [0.0, 0.0]);
        assert_eq!(lattice(1, 2.0), vec![[0.0, 0.0]]);
    }

    #[test]
    fn export_writes_one_file_per_metric() {
        let dir = tempfile::tempdir().unwrap();
        let f = distance_field_export(&[Metric::L2, Metric::CosineDist], 9, Some(dir.path())).unwrap();
        assert_eq!(f.len(), 2);
        let text = std::fs::read_to_string(dir.path().join("field_cosine.csv")).unwrap();
        assert_eq!(text.lines().count(), 82);
        // the origin has no cosine gradient
        assert!(!f[1].points[40].defined);
        assert!(distance_field_export(&[Metric::Geodesic], 3, None).is_err());
    }
}
