//! Losses: network output → optional projection → metric against a target.

use std::fmt;

use super::tape::{Matrix, RowMap, Tape, Var};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::repr::RepKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Projection {
    None,
    Gso,
    SvdPlus,
    QuatNormalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Picking {
    Plain,
    /// Minimum of the base metric over `±target` (L2, squared L2 or L1).
    QuatPickI,
    /// Minimum of the cosine distance over `±target`, i.e. `1 − |q̂·t|`.
    QuatPickII,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetSpace {
    /// Targets are representation vectors.
    Representation,
    /// Targets are rotation matrices, flattened column-major.
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LossSpec {
    pub metric: Metric,
    pub projection: Projection,
    pub picking: Picking,
    pub target: TargetSpace,
}

impl LossSpec {
    /// Mean squared error on raw outputs.
    pub fn mse() -> Self {
        LossSpec::plain(Metric::SquaredL2)
    }

    pub fn plain(metric: Metric) -> Self {
        LossSpec {
            metric,
            projection: Projection::None,
            picking: Picking::Plain,
            target: TargetSpace::Representation,
        }
    }

    /// Metric on SO(3) after projecting the output.
    pub fn on_rotation(metric: Metric, projection: Projection) -> Self {
        LossSpec {
            metric,
            projection,
            picking: Picking::Plain,
            target: TargetSpace::Rotation,
        }
    }

    pub fn picked(metric: Metric, picking: Picking) -> Self {
        LossSpec {
            metric,
            projection: Projection::None,
            picking,
            target: TargetSpace::Representation,
        }
    }

    /// Checks the spec against a head producing `out_dim` values of
    /// representation `head` (`None` for plain regression).
    pub fn validate(&self, head: Option<RepKind>, out_dim: usize) -> Result<()> {
        let mut errs = Vec::new();
        let need_head = |k: RepKind, errs: &mut Vec<String>, why: &str| {
            if head != Some(k) {
                errs.push(format!("{why} requires a {k} head"));
            }
        };
        match self.projection {
            Projection::None => {}
            Projection::Gso => need_head(RepKind::SixD, &mut errs, "gso"),
            Projection::SvdPlus => need_head(RepKind::NineD, &mut errs, "svd_plus"),
            Projection::QuatNormalize => need_head(RepKind::Quat, &mut errs, "quaternion normalization"),
        }
        match self.target {
            TargetSpace::Rotation => {
                if !self.metric.on_rotations() {
                    errs.push(format!("metric {} does not compare rotations", self.metric));
                }
                if self.projection == Projection::None {
                    need_head(RepKind::NineD, &mut errs, "an unprojected rotation-space loss");
                }
                if self.picking != Picking::Plain {
                    errs.push("distance picking applies to representation targets only".into());
                }
            }
            TargetSpace::Representation => {
                if self.metric.on_rotations() {
                    errs.push(format!("metric {} needs rotation targets", self.metric));
                }
                if matches!(self.projection, Projection::Gso | Projection::SvdPlus) {
                    errs.push("gso and svd_plus produce rotations; use rotation targets".into());
                }
                if let Some(n) = self.metric.arity() {
                    if n != out_dim {
                        errs.push(format!("metric {} expects {n} outputs, head has {out_dim}", self.metric));
                    }
                }
            }
        }
        match self.picking {
            Picking::Plain => {}
            Picking::QuatPickI => {
                need_head(RepKind::Quat, &mut errs, "quat_pick_1");
                if !matches!(self.metric, Metric::L2 | Metric::SquaredL2 | Metric::L1) {
                    errs.push("quat_pick_1 picks over l2, l2sq or l1".into());
                }
            }
            Picking::QuatPickII => {
                need_head(RepKind::Quat, &mut errs, "quat_pick_2");
                if self.metric != Metric::CosineDist {
                    errs.push("quat_pick_2 picks over the cosine distance".into());
                }
            }
        }
        if let Some(k) = head {
            if k.dim() != out_dim {
                errs.push(format!("{k} head needs {} outputs, got {out_dim}", k.dim()));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn row_map(&self) -> Option<RowMap> {
        match (self.projection, self.target) {
            (Projection::None, _) => None,
            (Projection::Gso, _) => Some(RowMap::Gso),
            (Projection::SvdPlus, _) => Some(RowMap::SvdPlus),
            (Projection::QuatNormalize, TargetSpace::Rotation) => Some(RowMap::QuatMatrix),
            (Projection::QuatNormalize, TargetSpace::Representation) => Some(RowMap::QuatNormalize),
        }
    }

    /// Records the loss of `pred` against the rows of `targets`.
    pub fn apply(&self, tape: &mut Tape, pred: Var, targets: &Matrix) -> Result<Var> {
        let out = match self.row_map() {
            Some(map) => tape.map_rows(pred, map)?,
            None => pred,
        };
        tape.row_loss(out, targets, self.metric, self.picking != Picking::Plain)
    }

    /// Loss value of fixed predictions.
    pub fn eval(&self, pred: &Matrix, targets: &Matrix) -> Result<f64> {
        let mut tape = Tape::new();
        let p = tape.leaf(pred.clone());
        let l = self.apply(&mut tape, p, targets)?;
        Ok(tape.value(l)[(0, 0)])
    }
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let proj = match self.projection {
            Projection::None => "",
            Projection::Gso => "gso+",
            Projection::SvdPlus => "svd+",
            Projection::QuatNormalize => "norm+",
        };
        let pick = match self.picking {
            Picking::Plain => "",
            Picking::QuatPickI => "+pick1",
            Picking::QuatPickII => "+pick2",
        };
        write!(f, "{proj}{}{pick}", self.metric)
    }
}
