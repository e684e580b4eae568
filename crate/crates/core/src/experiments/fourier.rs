//! Regressing a random Fourier series on SO(3) from different input
//! representations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{cell_seed, num, Table};
use crate::error::{Error, Result};
use crate::learn::{evaluate, train, Dataset, LossSpec, Matrix, Mlp, QuatFlip, TrainConfig};
use crate::repr::{RepKind, Representation};
use crate::so3::{sample_uniform, vec, RotationMatrix};

/// Width of the hidden layer of the phase network `t`.
const PHASE_HIDDEN: usize = 64;

/// `h*(R) = Σₖ Aₖ cos(kπ t(R)/L) + Bₖ sin(kπ t(R)/L)`, `k = 1..n_b`, with
/// `t` a fixed random ReLU network on `vec(R)` and `Aₖ, Bₖ ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTarget {
    pub n_b: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub period: f64,
    pub t: Mlp,
}

impl FourierTarget {
    pub fn new(n_b: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = (0..n_b).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b = (0..n_b).map(|_| StandardNormal.sample(&mut rng)).collect();
        let t = Mlp::new(&[9, PHASE_HIDDEN, 1], "phase", cell_seed(seed, u64::MAX))?;
        Ok(FourierTarget {
            n_b,
            a,
            b,
            period: 2.0,
            t,
        })
    }

    /// Phase `t(R)` for each rotation.
    pub fn phase(&self, rs: &[RotationMatrix]) -> Result<Vec<f64>> {
        let x = Matrix::from_fn(rs.len(), 9, |i, j| vec(rs[i].matrix())[j]);
        Ok(self.t.predict(&x)?.as_slice().to_vec())
    }

    pub fn eval_phase(&self, t: f64) -> f64 {
        (1..=self.n_b)
            .map(|k| {
                let w = k as f64 * PI * t / self.period;
                self.a[k - 1] * w.cos() + self.b[k - 1] * w.sin()
            })
            .sum()
    }

    pub fn eval(&self, rs: &[RotationMatrix]) -> Result<Vec<f64>> {
        Ok(self.phase(rs)?.into_iter().map(|t| self.eval_phase(t)).collect())
    }
}

/// Input encodings compared by the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FourierRep {
    Euler,
    Exp,
    Quat,
    /// Canonical quaternions with random sign flips near `w = 0` during
    /// training.
    QuatAug,
    SixD,
    NineD,
}

/// Threshold on `w` below which training quaternions may be flipped.
pub const AUG_THRESHOLD: f64 = 0.1;

impl FourierRep {
    pub const ALL: [FourierRep; 6] = [
        FourierRep::Euler,
        FourierRep::Exp,
        FourierRep::Quat,
        FourierRep::QuatAug,
        FourierRep::SixD,
        FourierRep::NineD,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            FourierRep::QuatAug => "quat_aug",
            other => other.kind().tag(),
        }
    }

    pub fn kind(self) -> RepKind {
        match self {
            FourierRep::Euler => RepKind::Euler,
            FourierRep::Exp => RepKind::Exp,
            FourierRep::Quat | FourierRep::QuatAug => RepKind::Quat,
            FourierRep::SixD => RepKind::SixD,
            FourierRep::NineD => RepKind::NineD,
        }
    }
}

impl fmt::Display for FourierRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for FourierRep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FourierRep::ALL
            .into_iter()
            .find(|r| r.tag() == s || (s == "quat+" && *r == FourierRep::QuatAug))
            .ok_or_else(|| {
                let known: Vec<&str> = FourierRep::ALL.iter().map(|r| r.tag()).collect();
                Error::Config(vec![format!("unknown fourier rep `{s}` (one of {})", known.join(", "))])
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierConfig {
    pub n_b: Vec<usize>,
    pub reps: Vec<FourierRep>,
    pub seeds: Vec<u64>,
    /// Train, validation and test sizes.
    pub sizes: (usize, usize, usize),
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            n_b: vec![1, 2, 3, 4, 5],
            reps: FourierRep::ALL.to_vec(),
            seeds: (0..10).collect(),
            sizes: (800, 200, 1000),
            hidden: vec![256, 256],
            epochs: 400,
            lr: 1e-3,
            batch_size: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierRow {
    pub rep: FourierRep,
    pub n_b: usize,
    pub seed: u64,
    pub rmse_train: f64,
    pub rmse_val: f64,
    pub rmse_test: f64,
}

pub fn fourier_table(rows: &[FourierRow]) -> Table {
    let mut t = Table::new(&["rep", "n_b", "seed", "rmse_train", "rmse_val", "rmse_test"]);
    for r in rows {
        t.push(vec![
            r.rep.tag().into(),
            r.n_b.to_string(),
            r.seed.to_string(),
            num(r.rmse_train),
            num(r.rmse_val),
            num(r.rmse_test),
        ]);
    }
    t
}

/// Rotations and targets of one `(n_b, seed)` cell, split train/val/test.
pub struct FourierData {
    pub rotations: [Vec<RotationMatrix>; 3],
    pub targets: [Vec<f64>; 3],
}

pub fn fourier_data(n_b: usize, seed: u64, sizes: (usize, usize, usize)) -> Result<FourierData> {
    let cell = cell_seed(seed, n_b as u64);
    let target = FourierTarget::new(n_b, cell)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cell, 1));
    let mut draw = |n: usize| (0..n).map(|_| sample_uniform(&mut rng)).collect::<Vec<_>>();
    let rotations = [draw(sizes.0), draw(sizes.1), draw(sizes.2)];
    let targets = [
        target.eval(&rotations[0])?,
        target.eval(&rotations[1])?,
        target.eval(&rotations[2])?,
    ];
    Ok(FourierData { rotations, targets })
}

fn encode(kind: RepKind, rs: &[RotationMatrix], ys: &[f64]) -> Result<Dataset> {
    let d = kind.dim();
    let mut x = Matrix::zeros(rs.len(), d);
    for (i, r) in rs.iter().enumerate() {
        let v = Representation::from_rotation(kind, r)?.to_vector();
        for (j, val) in v.into_iter().enumerate() {
            x[(i, j)] = val;
        }
    }
    Dataset::new(x, Matrix::from_column_slice(ys.len(), 1, ys))
}

fn run_cell(cfg: &FourierConfig, data: &FourierData, rep: FourierRep, n_b: usize, seed: u64) -> Result<FourierRow> {
    let kind = rep.kind();
    let split = |i: usize| encode(kind, &data.rotations[i], &data.targets[i]);
    let (tr, va, te) = (split(0)?, split(1)?, split(2)?);
    let mut widths = vec![kind.dim()];
    widths.extend(&cfg.hidden);
    widths.push(1);
    let model_seed = cell_seed(cell_seed(seed, n_b as u64), 2 + rep as u64);
    let mut model = Mlp::new(&widths, rep.tag(), model_seed)?;
    let mut tc = TrainConfig::adam(cfg.lr, cfg.batch_size, cfg.epochs, cfg.epochs, model_seed);
    if rep == FourierRep::QuatAug {
        tc.augment = Some(QuatFlip {
            col: 0,
            eps: AUG_THRESHOLD,
            p: 0.5,
        });
    }
    let spec = LossSpec::mse();
    train(&mut model, &tr, &va, &spec, &tc)?;
    let rmse = |d: &Dataset| evaluate(&model, d, &spec).map(f64::sqrt);
    Ok(FourierRow {
        rep,
        n_b,
        seed,
        rmse_train: rmse(&tr)?,
        rmse_val: rmse(&va)?,
        rmse_test: rmse(&te)?,
    })
}

/// Trains one network per `(n_b, seed, rep)` cell and reports RMSE on
/// every split, scored at the best-validation epoch. All representations
/// of a `(n_b, seed)` cell see the same rotations and targets.
pub fn fourier_experiment(cfg: &FourierConfig) -> Result<Vec<FourierRow>> {
    let mut errs = Vec::new();
    if cfg.reps.is_empty() || cfg.seeds.is_empty() || cfg.n_b.is_empty() {
        errs.push("fourier needs at least one rep, seed and n_b".to_string());
    }
    if cfg.sizes.0 == 0 || cfg.sizes.1 == 0 || cfg.sizes.2 == 0 {
        errs.push(format!("split sizes must be positive, got {:?}", cfg.sizes));
    }
    if let Err(Error::Config(e)) = TrainConfig::adam(cfg.lr, cfg.batch_size, cfg.epochs.max(1), 0, 0).validate() {
        errs.extend(e);
    }
    if cfg.epochs == 0 {
        errs.push("epochs must be positive".into());
    }
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let data_cells: Vec<(usize, u64)> =
        cfg.n_b.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect();
    let data: Vec<FourierData> = data_cells
        .par_iter()
        .map(|&(n, s)| fourier_data(n, s, cfg.sizes))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, FourierRep)> =
        (0..data_cells.len()).flat_map(|i| cfg.reps.iter().map(move |&r| (i, r))).collect();
    cells
        .par_iter()
        .map(|&(i, rep)| {
            let (n_b, seed) = data_cells[i];
            run_cell(cfg, &data[i], rep, n_b, seed)
        })
        .collect()
}
