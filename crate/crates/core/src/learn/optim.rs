//! Gradient descent with momentum and Adam.

use std::fmt;
use std::str::FromStr;

use super::tape::Matrix;
use crate::error::{Error, Result};

/// `v ← μv + g`, `p ← p − lr·v`.
pub fn gd_momentum_step(params: &mut [f64], grads: &[f64], velocity: &mut [f64], lr: f64, momentum: f64) {
    for ((p, g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        *v = momentum * *v + g;
        *p -= lr * *v;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamParams {
    pub fn new(lr: f64) -> Self {
        AdamParams {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update; `t` counts steps from 1.
pub fn adam_step(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], t: u64, hp: &AdamParams) {
    let c1 = 1.0 - hp.beta1.powi(t as i32);
    let c2 = 1.0 - hp.beta2.powi(t as i32);
    let (s1, s2) = (hp.lr / c1, 1.0 / c2);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
        *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
        *p -= s1 * *m / ((*v * s2).sqrt() + hp.eps);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    SgdMomentum,
    Adam,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::SgdMomentum => "sgd_momentum",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd_momentum" | "sgd" => Ok(OptimizerKind::SgdMomentum),
            "adam" => Ok(OptimizerKind::Adam),
            _ => Err(Error::Config(vec![format!("unknown optimizer `{s}`")])),
        }
    }
}

/// Optimizer with per-parameter state for a fixed list of parameter blocks.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    momentum: f64,
    adam: AdamParams,
    t: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn sgd(lr: f64, momentum: f64) -> Self {
        Optimizer {
            kind: OptimizerKind::SgdMomentum,
            lr,
            momentum,
            adam: AdamParams::new(lr),
            t: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn adam(hp: AdamParams) -> Self {
        Optimizer {
            kind: OptimizerKind::Adam,
            lr: hp.lr,
            momentum: 0.0,
            adam: hp,
            t: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step(&mut self, params: &mut [&mut Matrix], grads: &[Matrix]) {
        if self.first.is_empty() {
            self.first = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.second = params.iter().map(|p| vec![0.0; p.len()]).collect();
        }
        self.t += 1;
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            match self.kind {
                OptimizerKind::SgdMomentum => {
                    gd_momentum_step(p.as_mut_slice(), g.as_slice(), &mut self.first[i], self.lr, self.momentum)
                }
                OptimizerKind::Adam => adam_step(
                    p.as_mut_slice(),
                    g.as_slice(),
                    &mut self.first[i],
                    &mut self.second[i],
                    self.t,
                    &self.adam,
                ),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![1.0, -2.0];
        let mut v = vec![0.0; 2];
        gd_momentum_step(&mut p, &[0.0, 0.0], &mut v, 0.1, 0.9);
        assert_eq!(p, vec![1.0, -2.0]);
        let (mut m, mut s) = (vec![0.0; 2], vec![0.0; 2]);
        adam_step(&mut p, &[0.0, 0.0], &mut m, &mut s, 1, &AdamParams::new(0.1));
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn zero_momentum_is_plain_descent() {
        let mut p = vec![1.0];
        let mut v = vec![5.0];
        gd_momentum_step(&mut p, &[2.0], &mut v, 0.1, 0.0);
        assert!((p[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn quadratic_bowl_converges() {
        // f(p) = ½ Σ aᵢ (pᵢ − cᵢ)²
        let a = [1.0, 4.0, 0.5];
        let c = [0.3, -1.0, 2.0];
        let grad = |p: &[f64]| -> Vec<f64> { (0..3).map(|i| a[i] * (p[i] - c[i])).collect() };

        let mut p = vec![0.0; 3];
        let mut v = vec![0.0; 3];
        for _ in 0..500 {
            let g = grad(&p);
            gd_momentum_step(&mut p, &g, &mut v, 0.1, 0.5);
        }
        assert!((0..3).all(|i| (p[i] - c[i]).abs() < 1e-6));

        let mut p = vec![0.0; 3];
        let (mut m, mut s) = (vec![0.0; 3], vec![0.0; 3]);
        for t in 1..=500 {
            let g = grad(&p);
            let lr = 0.5 * 0.99f64.powi(t as i32);
            adam_step(&mut p, &g, &mut m, &mut s, t, &AdamParams::new(lr));
        }
        assert!((0..3).all(|i| (p[i] - c[i]).abs() < 1e-6), "{p:?}");
    }
}
