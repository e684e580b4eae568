//! Rotation estimation from corresponding point sets.
//!
//! Each sample is a fixed random cloud `P` of 3D points together with
//! `R·P + noise` for a Haar-random `R`; both are flattened and fed to an
//! MLP that regresses `R` through one of several heads. The point-set
//! network of the original setup is replaced by an MLP on the ordered
//! point pairs.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use super::{cell_seed, median, num, Table};
use crate::error::{Error, Result};
use crate::learn::{train, Dataset, LossSpec, Matrix, Mlp, Picking, Projection, TargetSpace, TrainConfig};
use crate::metrics::{chordal, geodesic, Metric};
use crate::projections::{gso, svd_plus};
use crate::repr::{euler_to_matrix, matrix_to_quat, matrix_to_quat_raw, EulerXYZ, RepKind, Representation, SixD};
use crate::so3::{exp_so3, quat_unit_to_matrix, sample_uniform, unvec, vec, RotationMatrix, Vec3};

/// What the head regresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToyRep {
    Euler,
    Exp,
    /// Canonical quaternions (`w ≥ 0`).
    Quat,
    /// Quaternions as Shepperd's method returns them, with no half-space map.
    QuatRaw,
    /// Canonical quaternions multiplied by a random sign per sample.
    QuatRf,
    SixD,
    NineD,
}

impl ToyRep {
    pub const ALL: [ToyRep; 7] = [
        ToyRep::Euler,
        ToyRep::Exp,
        ToyRep::Quat,
        ToyRep::QuatRaw,
        ToyRep::QuatRf,
        ToyRep::SixD,
        ToyRep::NineD,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ToyRep::QuatRaw => "quat_raw",
            ToyRep::QuatRf => "quat_rf",
            other => other.kind().tag(),
        }
    }

    pub fn kind(self) -> RepKind {
        match self {
            ToyRep::Euler => RepKind::Euler,
            ToyRep::Exp => RepKind::Exp,
            ToyRep::Quat | ToyRep::QuatRaw | ToyRep::QuatRf => RepKind::Quat,
            ToyRep::SixD => RepKind::SixD,
            ToyRep::NineD => RepKind::NineD,
        }
    }

    fn target<R: Rng + ?Sized>(self, r: &RotationMatrix, rng: &mut R) -> Result<Vec<f64>> {
        // one draw per sample keeps the data stream independent of the head
        let flip = rng.random::<f64>() < 0.5;
        Ok(match self {
            ToyRep::QuatRaw => matrix_to_quat_raw(r).as_array().to_vec(),
            ToyRep::QuatRf => {
                let q = matrix_to_quat(r).as_array();
                let s = if flip { -1.0 } else { 1.0 };
                q.iter().map(|v| s * v).collect()
            }
            _ => Representation::from_rotation(self.kind(), r)?.to_vector(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToyLoss {
    Mse,
    Mae,
    /// Squared L2 picked over `±q`.
    MsePick,
    /// Cosine distance picked over `±q`.
    CosPick,
    ChordalSq,
    Geodesic,
}

impl ToyLoss {
    pub const ALL: [ToyLoss; 6] = [
        ToyLoss::Mse,
        ToyLoss::Mae,
        ToyLoss::MsePick,
        ToyLoss::CosPick,
        ToyLoss::ChordalSq,
        ToyLoss::Geodesic,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ToyLoss::Mse => "mse",
            ToyLoss::Mae => "mae",
            ToyLoss::MsePick => "mse_pick",
            ToyLoss::CosPick => "cos_pick",
            ToyLoss::ChordalSq => "chordal_sq",
            ToyLoss::Geodesic => "geodesic",
        }
    }
}

/// A representation paired with a training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToyHead {
    pub rep: ToyRep,
    pub loss: ToyLoss,
}

impl ToyHead {
    pub fn new(rep: ToyRep, loss: ToyLoss) -> Self {
        ToyHead { rep, loss }
    }

    /// Heads compared by default.
    pub fn default_grid() -> Vec<ToyHead> {
        use ToyLoss::*;
        use ToyRep::*;
        vec![
            ToyHead::new(Euler, Mse),
            ToyHead::new(Exp, Mse),
            ToyHead::new(Quat, Mse),
            ToyHead::new(QuatRaw, Mse),
            ToyHead::new(QuatRf, Mse),
            ToyHead::new(QuatRf, MsePick),
            ToyHead::new(SixD, ChordalSq),
            ToyHead::new(NineD, ChordalSq),
        ]
    }

    pub fn spec(self) -> LossSpec {
        let projection = match self.rep.kind() {
            RepKind::SixD => Projection::Gso,
            RepKind::NineD => Projection::SvdPlus,
            RepKind::Quat => Projection::QuatNormalize,
            _ => Projection::None,
        };
        match self.loss {
            ToyLoss::Mse => LossSpec::plain(Metric::SquaredL2),
            ToyLoss::Mae => LossSpec::plain(Metric::L1),
            ToyLoss::MsePick => LossSpec::picked(Metric::SquaredL2, Picking::QuatPickI),
            ToyLoss::CosPick => LossSpec::picked(Metric::CosineDist, Picking::QuatPickII),
            ToyLoss::ChordalSq => LossSpec::on_rotation(Metric::ChordalSq, projection),
            ToyLoss::Geodesic => LossSpec::on_rotation(Metric::Geodesic, projection),
        }
    }

    pub fn validate(self) -> Result<()> {
        let k = self.rep.kind();
        self.spec().validate(Some(k), k.dim()).map_err(|e| match e {
            Error::Config(v) => Error::Config(v.into_iter().map(|m| format!("head {self}: {m}")).collect()),
            other => other,
        })
    }
}

impl fmt::Display for ToyHead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.rep.tag(), self.loss.tag())
    }
}

impl FromStr for ToyHead {
    type Err = Error;
    /// `rep:loss`, e.g. `nined:chordal_sq`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(vec![format!("bad head `{s}`, expected rep:loss")]);
        let (r, l) = s.split_once(':').ok_or_else(bad)?;
        let rep = ToyRep::ALL.into_iter().find(|x| x.tag() == r).ok_or_else(bad)?;
        let loss = ToyLoss::ALL.into_iter().find(|x| x.tag() == l).ok_or_else(bad)?;
        Ok(ToyHead { rep, loss })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub heads: Vec<ToyHead>,
    pub seeds: Vec<u64>,
    pub n_points: usize,
    pub noise: f64,
    pub sizes: (usize, usize, usize),
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub patience: usize,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            heads: ToyHead::default_grid(),
            seeds: (0..10).collect(),
            n_points: 32,
            noise: 0.01,
            sizes: (2000, 500, 500),
            hidden: vec![128, 128],
            epochs: 100,
            patience: 10,
            lr: 1e-3,
            batch_size: 64,
        }
    }
}

impl ToyConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for h in &self.heads {
            if let Err(Error::Config(e)) = h.validate() {
                errs.extend(e);
            }
        }
        if self.heads.is_empty() || self.seeds.is_empty() {
            errs.push("toy estimation needs at least one head and one seed".into());
        }
        if self.n_points == 0 {
            errs.push("the point cloud needs at least one point".into());
        }
        if !(self.noise >= 0.0) {
            errs.push(format!("noise must be nonnegative, got {}", self.noise));
        }
        if self.sizes.0 == 0 || self.sizes.1 == 0 || self.sizes.2 == 0 {
            errs.push(format!("split sizes must be positive, got {:?}", self.sizes));
        }
        if let Err(Error::Config(e)) =
            TrainConfig::adam(self.lr, self.batch_size, self.epochs.max(1), self.patience.min(self.epochs), 0).validate()
        {
            errs.extend(e);
        }
        if self.epochs == 0 {
            errs.push("epochs must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyRow {
    pub head: ToyHead,
    pub seed: u64,
    pub geodesic_med: f64,
    pub chordal_med: f64,
}

pub fn toy_table(rows: &[ToyRow]) -> Table {
    let mut t = Table::new(&["rep", "loss", "seed", "geodesic_med", "chordal_med"]);
    for r in rows {
        t.push(vec![
            r.head.rep.tag().into(),
            r.head.loss.tag().into(),
            r.seed.to_string(),
            num(r.geodesic_med),
            num(r.chordal_med),
        ]);
    }
    t
}

/// Point clouds and rotations of one seed.
pub struct ToyData {
    /// Inputs `[vec(P), vec(R·P + noise)]`, one row per sample.
    pub x: Matrix,
    pub rotations: Vec<RotationMatrix>,
}

pub fn toy_data(cfg: &ToyConfig, seed: u64) -> Result<ToyData> {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, 0));
    let n = cfg.sizes.0 + cfg.sizes.1 + cfg.sizes.2;
    let p: Vec<Vec3> = (0..cfg.n_points)
        .map(|_| Vec3::from_fn(|_, _| StandardNormal.sample(&mut rng)))
        .collect();
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| Error::Config(vec![e.to_string()]))?;
    let d = 3 * cfg.n_points;
    let mut x = Matrix::zeros(n, 2 * d);
    let mut rotations = Vec::with_capacity(n);
    for i in 0..n {
        let r = sample_uniform(&mut rng);
        for (j, pt) in p.iter().enumerate() {
            let moved = r.transform(pt);
            for c in 0..3 {
                x[(i, 3 * j + c)] = pt[c];
                x[(i, d + 3 * j + c)] = moved[c] + noise.sample(&mut rng);
            }
        }
        rotations.push(r);
    }
    Ok(ToyData { x, rotations })
}

/// Rotation read off a raw head output; degenerate outputs give `None`.
pub fn decode(rep: ToyRep, out: &[f64]) -> Option<RotationMatrix> {
    match rep.kind() {
        RepKind::Euler => Some(euler_to_matrix(&EulerXYZ::new(out[0], out[1], out[2]))),
        RepKind::Exp => Some(exp_so3(&Vec3::new(out[0], out[1], out[2]))),
        RepKind::Quat => {
            let n = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(n > 1e-12) {
                return None;
            }
            let q = nalgebra::Quaternion::new(out[0] / n, out[1] / n, out[2] / n, out[3] / n);
            Some(RotationMatrix::new_unchecked(quat_unit_to_matrix(&q)))
        }
        RepKind::SixD => gso(&SixD::new(Vec3::from_column_slice(&out[..3]), Vec3::from_column_slice(&out[3..6]))).ok(),
        RepKind::NineD => svd_plus(&unvec(out)).ok(),
        _ => None,
    }
}

fn run_cell(cfg: &ToyConfig, data: &ToyData, head: ToyHead, seed: u64) -> Result<ToyRow> {
    let kind = head.rep.kind();
    let spec = head.spec();
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, 1));
    let width = match spec.target {
        TargetSpace::Rotation => 9,
        TargetSpace::Representation => kind.dim(),
    };
    let mut y = Matrix::zeros(data.rotations.len(), width);
    for (i, r) in data.rotations.iter().enumerate() {
        let t = match spec.target {
            TargetSpace::Rotation => {
                rng.random::<f64>();
                vec(r.matrix()).as_slice().to_vec()
            }
            TargetSpace::Representation => head.rep.target(r, &mut rng)?,
        };
        for (j, v) in t.into_iter().enumerate() {
            y[(i, j)] = v;
        }
    }
    let all = Dataset::new(data.x.clone(), y)?;
    let (a, b) = (cfg.sizes.0, cfg.sizes.0 + cfg.sizes.1);
    let idx = |lo: usize, hi: usize| (lo..hi).collect::<Vec<_>>();
    let (tr, va) = (all.select(&idx(0, a)), all.select(&idx(a, b)));
    let test_x = data.x.rows(b, cfg.sizes.2).into_owned();

    let mut widths = vec![data.x.ncols()];
    widths.extend(&cfg.hidden);
    widths.push(kind.dim());
    let model_seed = cell_seed(seed, 2 + ToyLoss::ALL.len() as u64 * head.rep as u64 + head.loss as u64);
    let mut model = Mlp::new(&widths, &head.to_string(), model_seed)?;
    let tc = TrainConfig::adam(cfg.lr, cfg.batch_size, cfg.epochs, cfg.patience.min(cfg.epochs), model_seed);
    train(&mut model, &tr, &va, &spec, &tc)?;

    let pred = model.predict(&test_x)?;
    let (mut geo, mut cho) = (Vec::new(), Vec::new());
    for (i, truth) in data.rotations[b..].iter().enumerate() {
        let out: Vec<f64> = pred.row(i).iter().copied().collect();
        match decode(head.rep, &out) {
            Some(r) => {
                geo.push(geodesic(&r, truth));
                cho.push(chordal(&r, truth));
            }
            None => {
                geo.push(PI);
                cho.push(2.0 * 2f64.sqrt());
            }
        }
    }
    Ok(ToyRow {
        head,
        seed,
        geodesic_med: median(&geo),
        chordal_med: median(&cho),
    })
}

/// Trains every head on every seed and reports median test errors.
/// Undecodable test outputs count as maximal errors.
pub fn toy_rotation_estimation(cfg: &ToyConfig) -> Result<Vec<ToyRow>> {
    cfg.validate()?;
    let data: Vec<ToyData> = cfg.seeds.par_iter().map(|&s| toy_data(cfg, s)).collect::<Result<_>>()?;
    let cells: Vec<(usize, ToyHead)> =
        (0..cfg.seeds.len()).flat_map(|i| cfg.heads.iter().map(move |&h| (i, h))).collect();
    cells
        .par_iter()
        .map(|&(i, h)| run_cell(cfg, &data[i], h, cfg.seeds[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heads_parse_and_validate() {
        for h in ToyHead::default_grid() {
            h.validate().unwrap();
            assert_eq!(h.to_string().parse::<ToyHead>().unwrap(), h);
        }
        assert!(ToyHead::new(ToyRep::Euler, ToyLoss::MsePick).validate().is_err());
        assert!("nined".parse::<ToyHead>().is_err());
    }

    #[test]
    fn decode_inverts_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let r = sample_uniform(&mut rng);
            for rep in ToyRep::ALL {
                let t = rep.target(&r, &mut rng).unwrap();
                assert!(chordal(&decode(rep, &t).unwrap(), &r) < 1e-9, "{rep:?}");
            }
        }
        assert!(decode(ToyRep::Quat, &[0.0; 4]).is_none());
    }

    #[test]
    fn inputs_carry_the_rotation() {
        let cfg = ToyConfig {
            sizes: (3, 1, 1),
            noise: 0.0,
            ..ToyConfig::default()
        };
        let d = toy_data(&cfg, 0).unwrap();
        let n = 3 * cfg.n_points;
        for (i, r) in d.rotations.iter().enumerate() {
            let p = Vec3::new(d.x[(i, 0)], d.x[(i, 1)], d.x[(i, 2)]);
            let q = Vec3::new(d.x[(i, n)], d.x[(i, n + 1)], d.x[(i, n + 2)]);
            assert!((r.transform(&p) - q).norm() < 1e-12);
        }
    }

    #[test]
    fn tiny_run_is_deterministic() {
        let cfg = ToyConfig {
            heads: vec![ToyHead::new(ToyRep::NineD, ToyLoss::ChordalSq)],
            seeds: vec![0],
            n_points: 4,
            sizes: (64, 16, 16),
            hidden: vec![16],
            epochs: 3,
            patience: 3,
            ..ToyConfig::default()
        };
        let a = toy_table(&toy_rotation_estimation(&cfg).unwrap());
        assert_eq!(a, toy_table(&toy_rotation_estimation(&cfg).unwrap()));
        assert_eq!(a.rows.len(), 1);
    }
}
