//! Minibatch training with early stopping on the validation loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::LossSpec;
use super::mlp::{Layer, Mlp};
use super::optim::{AdamParams, Optimizer, OptimizerKind};
use super::tape::{Matrix, Tape};
use crate::error::{Error, Result};
use crate::repr::{batch_augment_quaternions, UnitQuaternion};

/// Rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Matrix,
}

impl Dataset {
    pub fn new(x: Matrix, y: Matrix) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Shape {
                expected: format!("{} target rows", x.nrows()),
                got: y.nrows().to_string(),
            });
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: self.y.select_rows(idx),
        }
    }
}

/// Per-batch random sign flips of quaternion inputs near the `w = 0`
/// boundary, applied to input columns `col..col + 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuatFlip {
    pub col: usize,
    pub eps: f64,
    pub p: f64,
}

impl QuatFlip {
    fn apply(&self, x: &mut Matrix, rng: &mut ChaCha8Rng) {
        let qs: Vec<UnitQuaternion> = (0..x.nrows())
            .map(|i| {
                let c = self.col;
                UnitQuaternion::new(x[(i, c)], x[(i, c + 1)], x[(i, c + 2)], x[(i, c + 3)])
            })
            .collect();
        for (i, q) in batch_augment_quaternions(&qs, rng, self.eps, self.p).iter().enumerate() {
            for (j, v) in q.as_array().iter().enumerate() {
                x[(i, self.col + j)] = *v;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub momentum: f64,
    pub betas: (f64, f64),
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub augment: Option<QuatFlip>,
}

impl TrainConfig {
    pub fn adam(lr: f64, batch_size: usize, max_epochs: usize, patience: usize, seed: u64) -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Adam,
            lr,
            momentum: 0.0,
            betas: (0.9, 0.999),
            batch_size,
            max_epochs,
            patience,
            seed,
            augment: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.lr > 0.0) {
            errs.push(format!("learning rate must be positive, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            errs.push(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        let (b1, b2) = self.betas;
        if !(0.0..1.0).contains(&b1) || !(0.0..1.0).contains(&b2) {
            errs.push(format!("betas must lie in [0, 1), got ({b1}, {b2})"));
        }
        if self.batch_size == 0 {
            errs.push("batch size must be positive".into());
        }
        if self.max_epochs == 0 {
            errs.push("max epochs must be positive".into());
        }
        if self.patience > self.max_epochs {
            errs.push(format!("patience {} exceeds max epochs {}", self.patience, self.max_epochs));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn optimizer(&self) -> Optimizer {
        match self.optimizer {
            OptimizerKind::SgdMomentum => Optimizer::sgd(self.lr, self.momentum),
            OptimizerKind::Adam => Optimizer::adam(AdamParams {
                beta1: self.betas.0,
                beta2: self.betas.1,
                ..AdamParams::new(self.lr)
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    /// 0-based epoch of the restored checkpoint.
    pub best_epoch: usize,
}

impl History {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    pub fn best_val(&self) -> f64 {
        self.val_loss[self.best_epoch]
    }
}

/// One gradient step on a batch; returns the batch loss.
pub fn train_step(model: &mut Mlp, opt: &mut Optimizer, batch: &Dataset, spec: &LossSpec) -> Result<f64> {
    let mut tape = Tape::new();
    let x = tape.leaf(batch.x.clone());
    let fwd = model.forward(&mut tape, x)?;
    let loss = spec.apply(&mut tape, fwd.output, &batch.y)?;
    let value = tape.value(loss)[(0, 0)];
    if !value.is_finite() {
        return Ok(value);
    }
    let grads = tape.backward(loss)?;
    let mut gs = Vec::with_capacity(2 * fwd.params.len());
    for (w, b) in &fwd.params {
        gs.push(grads.get_or_zeros(*w, tape.value(*w).shape()));
        gs.push(grads.get_or_zeros(*b, tape.value(*b).shape()));
    }
    let mut ps: Vec<&mut Matrix> = model
        .layers_mut()
        .iter_mut()
        .flat_map(|Layer { w, b }| [w, b])
        .collect();
    opt.step(&mut ps, &gs);
    Ok(value)
}

/// Loss of the model on a whole dataset.
pub fn evaluate(model: &Mlp, data: &Dataset, spec: &LossSpec) -> Result<f64> {
    spec.eval(&model.predict(&data.x)?, &data.y)
}

/// Trains `model` in place and leaves it at the best-validation epoch.
///
/// Training stops once `patience` consecutive epochs fail to improve the
/// validation loss, or after `max_epochs`.
pub fn train(model: &mut Mlp, train: &Dataset, val: &Dataset, spec: &LossSpec, cfg: &TrainConfig) -> Result<History> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::Shape {
            expected: "nonempty train and validation sets".into(),
            got: format!("{} train, {} validation rows", train.len(), val.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut opt = cfg.optimizer();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = History {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        best_epoch: 0,
    };
    let mut best: Option<(f64, Vec<Layer>)> = None;
    let mut stale = 0;
    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let mut batch = train.select(chunk);
            if let Some(aug) = &cfg.augment {
                aug.apply(&mut batch.x, &mut rng);
            }
            let l = train_step(model, &mut opt, &batch, spec)?;
            if !l.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            total += l * chunk.len() as f64;
        }
        let v = evaluate(model, val, spec)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        history.train_loss.push(total / train.len() as f64);
        history.val_loss.push(v);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, model.layers().to_vec()));
            history.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale > cfg.patience {
                break;
            }
        }
    }
    if let Some((_, layers)) = best {
        model.layers_mut().clone_from_slice(&layers);
    }
    Ok(history)
}
