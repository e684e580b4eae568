//! Gradients of the distance to the identity through GSO and SVD⁺.
//!
//! Both experiments share [`identity_loss`]: `L(r) = ‖vec(I) − vec(f(r))‖`,
//! where `f` is either projection applied to the raw vector `r`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{cell_seed, median, num, Table};
use crate::error::{Error, Result};
use crate::learn::gd_momentum_step;
use crate::projections::{gso, gso_vjp, svd_plus_checked, svd_plus_vjp, ProjectionFlags};
use crate::repr::SixD;
use crate::so3::{unvec, Mat3, RotationMatrix, Vec3};

/// Gradient norm above which a path is considered to have blown up.
const BLOWUP_GRAD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orthogonalizer {
    Gso,
    SvdPlus,
}

impl Orthogonalizer {
    pub fn tag(self) -> &'static str {
        match self {
            Orthogonalizer::Gso => "gso",
            Orthogonalizer::SvdPlus => "svd_plus",
        }
    }

    /// Length of the raw vector: 6 for GSO, 9 for SVD⁺.
    pub fn dim(self) -> usize {
        match self {
            Orthogonalizer::Gso => 6,
            Orthogonalizer::SvdPlus => 9,
        }
    }

    pub fn vector_names(self) -> &'static [&'static str] {
        match self {
            Orthogonalizer::Gso => &["nu1", "nu2"],
            Orthogonalizer::SvdPlus => &["m1", "m2", "m3"],
        }
    }

    /// Raw vector whose projection is `r`.
    pub fn raw(self, r: &RotationMatrix) -> Vec<f64> {
        let m = r.matrix().as_slice();
        m[..self.dim()].to_vec()
    }
}

impl fmt::Display for Orthogonalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for Orthogonalizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gso" | "sixd" => Ok(Orthogonalizer::Gso),
            "svd_plus" | "svd" | "nined" => Ok(Orthogonalizer::SvdPlus),
            _ => Err(Error::Config(vec![format!("unknown projection `{s}` (gso or svd_plus)")])),
        }
    }
}

/// Loss value and its gradient with respect to the raw vector.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityLoss {
    pub loss: f64,
    pub grad: Vec<f64>,
    pub flags: ProjectionFlags,
}

impl IdentityLoss {
    /// Gradient norm of the `i`-th 3-vector of the raw input.
    pub fn column_norm(&self, i: usize) -> f64 {
        Vec3::from_column_slice(&self.grad[3 * i..3 * i + 3]).norm()
    }
}

/// `‖vec(I) − vec(f(r))‖` and its gradient in `r`. At the minimum the
/// gradient is taken as zero.
pub fn identity_loss(proj: Orthogonalizer, r: &[f64]) -> Result<IdentityLoss> {
    if r.len() != proj.dim() {
        return Err(Error::Shape {
            expected: format!("{} values", proj.dim()),
            got: r.len().to_string(),
        });
    }
    let (rot, mut flags) = match proj {
        Orthogonalizer::Gso => (gso(&sixd(r))?, ProjectionFlags::default()),
        Orthogonalizer::SvdPlus => svd_plus_checked(&unvec(r))?,
    };
    let diff = rot.matrix() - Mat3::identity();
    let loss = diff.norm();
    if loss == 0.0 {
        return Ok(IdentityLoss {
            loss,
            grad: vec![0.0; r.len()],
            flags,
        });
    }
    let cot = diff / loss;
    let grad = match proj {
        Orthogonalizer::Gso => {
            let g = gso_vjp(&sixd(r), &cot)?;
            let mut v = g.nu1.as_slice().to_vec();
            v.extend_from_slice(g.nu2.as_slice());
            v
        }
        Orthogonalizer::SvdPlus => {
            let (g, f) = svd_plus_vjp(&unvec(r), &cot)?;
            flags.regularized = f.regularized;
            g.as_slice().to_vec()
        }
    };
    Ok(IdentityLoss { loss, grad, flags })
}

fn sixd(r: &[f64]) -> SixD {
    SixD::new(Vec3::from_column_slice(&r[..3]), Vec3::from_column_slice(&r[3..6]))
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathInit {
    /// Every coordinate uniform in `[−b, b]`.
    Uniform(f64),
    /// Uniform ν₁ in `[−b, b]³` and `ν₂ = 2ν₁`; GSO only.
    Parallel(f64),
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub projection: Orthogonalizer,
    pub runs: usize,
    pub iters: usize,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
    pub init: PathInit,
}

impl PathConfig {
    pub fn new(projection: Orthogonalizer, runs: usize, seed: u64) -> Self {
        PathConfig {
            projection,
            runs,
            iters: 150,
            lr: 0.05,
            momentum: 0.9,
            seed,
            init: PathInit::Uniform(2.0),
        }
    }
}

/// One optimization path. `loss[k]` and `raw[k]` belong to iteration `k`;
/// a failed iteration ends the path with a `NaN` loss.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRun {
    pub run: usize,
    pub raw: Vec<Vec<f64>>,
    pub loss: Vec<f64>,
    pub unstable: bool,
    pub reason: Option<String>,
}

impl PathRun {
    pub fn min_loss(&self) -> f64 {
        self.loss.iter().copied().filter(|l| l.is_finite()).fold(f64::INFINITY, f64::min)
    }

    pub fn reached(&self, threshold: f64) -> bool {
        self.min_loss() < threshold
    }
}

fn init_vector(init: &PathInit, dim: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match init {
        PathInit::Uniform(b) => Ok((0..dim).map(|_| rng.random_range(-b..=*b)).collect()),
        PathInit::Parallel(b) => {
            if dim != 6 {
                return Err(Error::Unsupported {
                    op: "gradient_paths",
                    what: "parallel initialization with svd_plus".into(),
                });
            }
            let nu1: Vec<f64> = (0..3).map(|_| rng.random_range(-b..=*b)).collect();
            Ok(nu1.iter().chain(nu1.iter()).enumerate().map(|(i, v)| if i < 3 { *v } else { 2.0 * v }).collect())
        }
        PathInit::Fixed(v) => {
            if v.len() != dim {
                return Err(Error::Shape {
                    expected: format!("{dim} initial values"),
                    got: v.len().to_string(),
                });
            }
            Ok(v.clone())
        }
    }
}

fn run_path(cfg: &PathConfig, run: usize) -> Result<PathRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.seed, run as u64));
    let mut r = init_vector(&cfg.init, cfg.projection.dim(), &mut rng)?;
    let mut velocity = vec![0.0; r.len()];
    let mut out = PathRun {
        run,
        raw: Vec::new(),
        loss: Vec::new(),
        unstable: false,
        reason: None,
    };
    for _ in 0..=cfg.iters {
        out.raw.push(r.clone());
        let step = identity_loss(cfg.projection, &r);
        let fail = match &step {
            Err(e) => Some(e.to_string()),
            Ok(s) if !s.loss.is_finite() => Some("non-finite loss".into()),
            Ok(s) => {
                let g = s.grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !g.is_finite() || g > BLOWUP_GRAD {
                    Some(format!("gradient norm {g:e}"))
                } else {
                    None
                }
            }
        };
        if let Some(reason) = fail {
            out.loss.push(f64::NAN);
            out.unstable = true;
            out.reason = Some(reason);
            break;
        }
        let s = step?;
        out.loss.push(s.loss);
        gd_momentum_step(&mut r, &s.grad, &mut velocity, cfg.lr, cfg.momentum);
    }
    Ok(out)
}

/// Gradient descent with momentum on [`identity_loss`] from `cfg.runs`
/// independent initializations.
pub fn gradient_paths(cfg: &PathConfig) -> Result<Vec<PathRun>> {
    if !(cfg.lr > 0.0) || !(0.0..1.0).contains(&cfg.momentum) {
        return Err(Error::Config(vec![format!(
            "gradient_paths needs lr > 0 and momentum in [0, 1), got {} and {}",
            cfg.lr, cfg.momentum
        )]));
    }
    (0..cfg.runs).into_par_iter().map(|i| run_path(cfg, i)).collect()
}

/// `run,iter,vector,comp_x,comp_y,comp_z,loss`, one row per raw 3-vector.
pub fn paths_table(proj: Orthogonalizer, runs: &[PathRun]) -> Table {
    let mut t = Table::new(&["run", "iter", "vector", "comp_x", "comp_y", "comp_z", "loss"]);
    for p in runs {
        for (k, (raw, loss)) in p.raw.iter().zip(&p.loss).enumerate() {
            for (c, name) in proj.vector_names().iter().enumerate() {
                let v = &raw[3 * c..3 * c + 3];
                t.push(vec![
                    p.run.to_string(),
                    k.to_string(),
                    name.to_string(),
                    num(v[0]),
                    num(v[1]),
                    num(v[2]),
                    num(*loss),
                ]);
            }
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub projection: Orthogonalizer,
    pub pair: &'static str,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSummary {
    pub n: usize,
    pub rows: Vec<RatioRow>,
    /// Samples skipped per projection: gso, svd_plus.
    pub skipped: [usize; 2],
}

impl RatioSummary {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["projection", "ratio_pair", "ratio"]);
        for r in &self.rows {
            t.push(vec![r.projection.tag().into(), r.pair.into(), num(r.ratio)]);
        }
        t
    }

    /// Median of `|ln ratio|` over all pairs of one projection.
    pub fn median_abs_log(&self, proj: Orthogonalizer) -> f64 {
        let v: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.projection == proj)
            .map(|r| r.ratio.ln().abs())
            .collect();
        median(&v)
    }
}

const PAIRS_GSO: [(&str, usize, usize); 1] = [("nu1/nu2", 0, 1)];
const PAIRS_SVD: [(&str, usize, usize); 3] = [("m1/m2", 0, 1), ("m1/m3", 0, 2), ("m2/m3", 1, 2)];

fn ratios(proj: Orthogonalizer, r: &[f64]) -> Option<Vec<RatioRow>> {
    let s = identity_loss(proj, r).ok()?;
    let pairs: &[(&'static str, usize, usize)] = match proj {
        Orthogonalizer::Gso => &PAIRS_GSO,
        Orthogonalizer::SvdPlus => &PAIRS_SVD,
    };
    let mut rows = Vec::with_capacity(pairs.len());
    for &(pair, a, b) in pairs {
        let ratio = s.column_norm(a) / s.column_norm(b);
        if !(ratio.is_finite() && ratio > 0.0) {
            return None;
        }
        rows.push(RatioRow {
            projection: proj,
            pair,
            ratio,
        });
    }
    Some(rows)
}

/// Column gradient-norm ratios of [`identity_loss`] at `n` points drawn
/// uniformly from `[−b, b]⁹`. GSO sees the first six coordinates of each
/// draw. Points where a ratio is undefined are skipped and counted.
pub fn gradient_ratio_density(n: usize, b: f64, seed: u64) -> Result<RatioSummary> {
    if !(b > 0.0) {
        return Err(Error::Config(vec![format!("box half-width must be positive, got {b}")]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Vec<f64>> = (0..n).map(|_| (0..9).map(|_| rng.random_range(-b..=b)).collect()).collect();
    let mut out = RatioSummary {
        n,
        rows: Vec::new(),
        skipped: [0, 0],
    };
    for (slot, proj) in [Orthogonalizer::Gso, Orthogonalizer::SvdPlus].into_iter().enumerate() {
        let per: Vec<Option<Vec<RatioRow>>> = draws.par_iter().map(|r| ratios(proj, &r[..proj.dim()])).collect();
        for rows in per {
            match rows {
                Some(rows) => out.rows.extend(rows),
                None => out.skipped[slot] += 1,
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projections::finite_diff_grad;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for proj in [Orthogonalizer::Gso, Orthogonalizer::SvdPlus] {
            for _ in 0..50 {
                let r: Vec<f64> = (0..proj.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let s = identity_loss(proj, &r).unwrap();
                let fd = finite_diff_grad(|x| identity_loss(proj, x).unwrap().loss, &r, 1e-6);
                for (a, b) in s.grad.iter().zip(&fd) {
                    assert!((a - b).abs() < 1e-5 * (1.0 + b.abs()), "{proj}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn identity_start_is_stationary() {
        for proj in [Orthogonalizer::Gso, Orthogonalizer::SvdPlus] {
            let mut cfg = PathConfig::new(proj, 1, 0);
            cfg.init = PathInit::Fixed(proj.raw(&RotationMatrix::identity()));
            let runs = gradient_paths(&cfg).unwrap();
            assert_eq!(runs[0].loss.len(), 151);
            assert!(runs[0].loss.iter().all(|l| *l == 0.0));
            assert!(!runs[0].unstable);
        }
    }

    #[test]
    fn parallel_gso_start_is_flagged() {
        let mut cfg = PathConfig::new(Orthogonalizer::Gso, 5, 1);
        cfg.init = PathInit::Parallel(2.0);
        let runs = gradient_paths(&cfg).unwrap();
        assert!(runs.iter().all(|r| r.unstable && r.loss.last().unwrap().is_nan()));
        let t = paths_table(Orthogonalizer::Gso, &runs);
        assert_eq!(t.rows.len(), 10);
    }

    #[test]
    fn paths_are_deterministic() {
        let cfg = PathConfig::new(Orthogonalizer::SvdPlus, 4, 9);
        assert_eq!(gradient_paths(&cfg).unwrap(), gradient_paths(&cfg).unwrap());
    }

    #[test]
    fn ratio_bookkeeping() {
        let s = gradient_ratio_density(300, 2.0, 7).unwrap();
        let gso_rows = s.rows.iter().filter(|r| r.projection == Orthogonalizer::Gso).count();
        let svd_rows = s.rows.len() - gso_rows;
        assert_eq!(gso_rows, 300 - s.skipped[0]);
        assert_eq!(svd_rows, 3 * (300 - s.skipped[1]));
        assert!(ratios(Orthogonalizer::SvdPlus, &Orthogonalizer::SvdPlus.raw(&RotationMatrix::identity())).is_none());
    }
}
