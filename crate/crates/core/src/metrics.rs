//! Distances between rotations and between their representations.
//!
//! Typed functions cover the plain evaluations. [`Metric`] evaluates the
//! same quantities on flat slices together with the gradient with respect
//! to the first operand, which is what losses and [`gradient_field`] need.
//! Matrix operands are flattened column-major, as by [`crate::so3::vec`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::repr::{EulerXYZ, UnitQuaternion};
use crate::so3::{vec, RotationMatrix};

/// Margin kept from ±1 by the clamped arccos used in differentiable
/// evaluations.
pub const ARCCOS_EPS: f64 = 1e-7;
const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    L2,
    SquaredL2,
    L1,
    CosineDist,
    AngularDist,
    QuatPickI,
    QuatPickII,
    EulerPick,
    Chordal,
    ChordalSq,
    Geodesic,
}

impl Metric {
    pub const ALL: [Metric; 11] = [
        Metric::L2,
        Metric::SquaredL2,
        Metric::L1,
        Metric::CosineDist,
        Metric::AngularDist,
        Metric::QuatPickI,
        Metric::QuatPickII,
        Metric::EulerPick,
        Metric::Chordal,
        Metric::ChordalSq,
        Metric::Geodesic,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Metric::L2 => "l2",
            Metric::SquaredL2 => "l2sq",
            Metric::L1 => "l1",
            Metric::CosineDist => "cosine",
            Metric::AngularDist => "angular",
            Metric::QuatPickI => "quat_pick_1",
            Metric::QuatPickII => "quat_pick_2",
            Metric::EulerPick => "euler_pick",
            Metric::Chordal => "chordal",
            Metric::ChordalSq => "chordal_sq",
            Metric::Geodesic => "geodesic",
        }
    }

    /// Required operand length, if fixed.
    pub fn arity(self) -> Option<usize> {
        match self {
            Metric::QuatPickI | Metric::QuatPickII => Some(4),
            Metric::EulerPick => Some(3),
            Metric::Chordal | Metric::ChordalSq | Metric::Geodesic => Some(9),
            _ => None,
        }
    }

    /// Metrics whose operands are rotation matrices.
    pub fn on_rotations(self) -> bool {
        matches!(self, Metric::Chordal | Metric::ChordalSq | Metric::Geodesic)
    }

    fn check(self, a: &[f64], b: &[f64]) -> Result<()> {
        if a.len() != b.len() {
            return Err(Error::Shape {
                expected: a.len().to_string(),
                got: b.len().to_string(),
            });
        }
        if let Some(n) = self.arity() {
            if a.len() != n {
                return Err(Error::Shape {
                    expected: n.to_string(),
                    got: a.len().to_string(),
                });
            }
        }
        if self == Metric::EulerPick {
            for e in [a, b] {
                check_euler_beta(e[1])?;
            }
        }
        Ok(())
    }

    /// Plain evaluation; the geodesic clamps its arccos argument to `[−1, 1]`.
    pub fn eval(self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check(a, b)?;
        Ok(match self {
            Metric::L2 | Metric::Chordal => l2(a, b),
            Metric::SquaredL2 | Metric::ChordalSq => l2_sq(a, b),
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::CosineDist => 1.0 - cosine(a, b)?,
            Metric::AngularDist => cosine(a, b)?.clamp(-1.0, 1.0).acos(),
            Metric::QuatPickI => {
                let neg: Vec<f64> = b.iter().map(|v| -v).collect();
                l2(a, b).min(l2(a, &neg))
            }
            Metric::QuatPickII => 1.0 - dot(a, b).abs(),
            Metric::EulerPick => euler_pick_raw(a, b),
            Metric::Geodesic => (0.5 * (dot(a, b) - 1.0)).clamp(-1.0, 1.0).acos(),
        })
    }

    /// Value and gradient with respect to `a`, using the clamped arccos.
    ///
    /// Where the gradient does not exist (coincident operands for the
    /// norm-based metrics, zero-length operands for cosine and angular) the
    /// returned gradient is zero; [`gradient_field`] reports these points.
    pub fn value_grad(self, a: &[f64], b: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(a, b)?;
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Ok(match self {
            Metric::L2 | Metric::Chordal => norm_grad(&diff),
            Metric::SquaredL2 | Metric::ChordalSq => {
                (l2_sq(a, b), diff.iter().map(|d| 2.0 * d).collect())
            }
            Metric::L1 => (
                diff.iter().map(|d| d.abs()).sum(),
                diff.iter().map(|d| sign0(*d)).collect(),
            ),
            Metric::CosineDist => {
                let (c, dc) = cosine_grad(a, b)?;
                (1.0 - c, dc.iter().map(|v| -v).collect())
            }
            Metric::AngularDist => {
                let (c, dc) = cosine_grad(a, b)?;
                let (theta, dtheta) = acos_clamped(c);
                (theta, dc.iter().map(|v| v * dtheta).collect())
            }
            Metric::QuatPickI => {
                let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if norm(&diff) <= norm(&sum) {
                    norm_grad(&diff)
                } else {
                    norm_grad(&sum)
                }
            }
            Metric::QuatPickII => {
                let d = dot(a, b);
                let s = sign0(d);
                (1.0 - d.abs(), b.iter().map(|v| -s * v).collect())
            }
            Metric::EulerPick => {
                let comps: Vec<(f64, f64)> = (0..3).map(|i| wrapped_diff(a[i], b[i])).collect();
                let total = comps.iter().map(|(d, _)| d * d).sum::<f64>().sqrt();
                let grad = if total > 0.0 {
                    comps.iter().map(|(d, s)| d * s / total).collect()
                } else {
                    vec![0.0; 3]
                };
                (total, grad)
            }
            Metric::Geodesic => {
                let (theta, dtheta) = acos_clamped(0.5 * (dot(a, b) - 1.0));
                (theta, b.iter().map(|v| 0.5 * dtheta * v).collect())
            }
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let m = match s.as_str() {
            "l2" | "euclidean" => Metric::L2,
            "l2sq" | "mse" => Metric::SquaredL2,
            "l1" | "mae" => Metric::L1,
            "cosine" => Metric::CosineDist,
            "angular" => Metric::AngularDist,
            "quat_pick_1" | "quat_pick_i" => Metric::QuatPickI,
            "quat_pick_2" | "quat_pick_ii" => Metric::QuatPickII,
            "euler_pick" => Metric::EulerPick,
            "chordal" => Metric::Chordal,
            "chordal_sq" => Metric::ChordalSq,
            "geodesic" => Metric::Geodesic,
            _ => {
                return Err(Error::Config(vec![format!(
                    "unknown metric `{s}` (expected one of {})",
                    Metric::ALL.map(|m| m.tag()).join(", ")
                )]))
            }
        };
        Ok(m)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn norm_grad(diff: &[f64]) -> (f64, Vec<f64>) {
    let n = norm(diff);
    if n > 0.0 {
        (n, diff.iter().map(|d| d / n).collect())
    } else {
        (0.0, vec![0.0; diff.len()])
    }
}

/// Euclidean distance. Chordal distance and the 9D representation distance
/// both go through here.
pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    l2_sq(a, b).sqrt()
}

pub fn l2_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let (na, nb) = (norm(a), norm(b));
    if !(na > MIN_NORM && nb > MIN_NORM) {
        return Err(Error::ZeroLength);
    }
    Ok(dot(a, b) / (na * nb))
}

fn cosine_grad(a: &[f64], b: &[f64]) -> Result<(f64, Vec<f64>)> {
    let c = cosine(a, b)?;
    let (na, nb) = (norm(a), norm(b));
    let g = a
        .iter()
        .zip(b)
        .map(|(x, y)| y / (na * nb) - c * x / (na * na))
        .collect();
    Ok((c, g))
}

/// `arccos` on `[−1+ε, 1−ε]` with its derivative; zero slope outside.
fn acos_clamped(c: f64) -> (f64, f64) {
    let lo = -1.0 + ARCCOS_EPS;
    let hi = 1.0 - ARCCOS_EPS;
    if c <= lo {
        (lo.acos(), 0.0)
    } else if c >= hi {
        (hi.acos(), 0.0)
    } else {
        (c.acos(), -1.0 / (1.0 - c * c).sqrt())
    }
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    Metric::CosineDist.eval(a, b)
}

pub fn angular_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    Metric::AngularDist.eval(a, b)
}

/// `min(‖q₁ − q₂‖, ‖q₁ + q₂‖)`.
pub fn quat_pick_i(q1: &UnitQuaternion, q2: &UnitQuaternion) -> f64 {
    let (a, b) = (q1.as_array(), q2.as_array());
    let d = l2(&a, &b);
    let s = a.iter().zip(&b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
    d.min(s)
}

/// `1 − |q₁ · q₂|`.
pub fn quat_pick_ii(q1: &UnitQuaternion, q2: &UnitQuaternion) -> f64 {
    1.0 - q1.dot(q2).abs()
}

fn check_euler_beta(beta: f64) -> Result<()> {
    if (-PI / 2.0..=PI / 2.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::NonCanonical(format!(
            "euler beta {beta} outside [-pi/2, pi/2]"
        )))
    }
}

/// Angular difference `min(|a−b|, 2π−|a−b|)` and its slope in `a`.
fn wrapped_diff(a: f64, b: f64) -> (f64, f64) {
    let raw = a - b;
    let d = raw.abs().rem_euclid(2.0 * PI);
    if d <= PI {
        (d, sign0(raw))
    } else {
        (2.0 * PI - d, -sign0(raw))
    }
}

fn euler_pick_raw(a: &[f64], b: &[f64]) -> f64 {
    (0..3).map(|i| wrapped_diff(a[i], b[i]).0.powi(2)).sum::<f64>().sqrt()
}

/// Euclidean distance of the wrapped per-angle differences.
pub fn euler_pick(e1: &EulerXYZ, e2: &EulerXYZ) -> Result<f64> {
    check_euler_beta(e1.beta)?;
    check_euler_beta(e2.beta)?;
    let a = [e1.alpha, e1.beta, e1.gamma];
    let b = [e2.alpha, e2.beta, e2.gamma];
    Ok(euler_pick_raw(&a, &b))
}

/// `‖R₁ − R₂‖_F`.
pub fn chordal(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    l2(vec(r1.matrix()).as_slice(), vec(r2.matrix()).as_slice())
}

pub fn chordal_sq(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    l2_sq(vec(r1.matrix()).as_slice(), vec(r2.matrix()).as_slice())
}

/// Mean squared chordal distance between paired rotation sets.
pub fn mse(a: &[RotationMatrix], b: &[RotationMatrix]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            expected: a.len().to_string(),
            got: b.len().to_string(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| chordal_sq(x, y)).sum::<f64>() / a.len() as f64)
}

fn geodesic_cos(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    0.5 * ((r1.matrix() * r2.matrix().transpose()).trace() - 1.0)
}

/// Rotation angle of `R₁R₂ᵀ`, in `[0, π]`.
pub fn geodesic(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    geodesic_cos(r1, r2).clamp(-1.0, 1.0).acos()
}

/// The geodesic with the arccos argument kept `ARCCOS_EPS` inside ±1, as
/// used by the geodesic loss.
pub fn geodesic_clamped(r1: &RotationMatrix, r2: &RotationMatrix) -> f64 {
    acos_clamped(geodesic_cos(r1, r2)).0
}

/// One sample of a planar gradient field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub y: [f64; 2],
    /// `−∇_y d(y, z)`; zero where `defined` is false.
    pub neg_grad: [f64; 2],
    pub defined: bool,
}

/// Negative gradients of `d(·, z)` over a set of planar points.
pub fn gradient_field(metric: Metric, target: [f64; 2], grid: &[[f64; 2]]) -> Result<Vec<FieldPoint>> {
    if !matches!(
        metric,
        Metric::L2 | Metric::SquaredL2 | Metric::L1 | Metric::CosineDist | Metric::AngularDist
    ) {
        return Err(Error::Unsupported {
            op: "gradient_field",
            what: format!("metric {metric} on planar operands"),
        });
    }
    grid.iter()
        .map(|y| {
            let undefined = match metric {
                Metric::CosineDist | Metric::AngularDist => norm(y) <= MIN_NORM,
                Metric::L2 => y == &target,
                Metric::L1 => y[0] == target[0] || y[1] == target[1],
                _ => false,
            };
            if undefined {
                return Ok(FieldPoint {
                    y: *y,
                    neg_grad: [0.0, 0.0],
                    defined: false,
                });
            }
            let (_, g) = metric.value_grad(y, &target)?;
            Ok(FieldPoint {
                y: *y,
                neg_grad: [-g[0], -g[1]],
                defined: true,
            })
        })
        .collect()
}

pub fn field_csv(points: &[FieldPoint]) -> String {
    let mut out = String::from("y1,y2,gx,gy,defined\n");
    for p in points {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            p.y[0],
            p.y[1],
            p.neg_grad[0],
            p.neg_grad[1],
            u8::from(p.defined)
        ));
    }
    out
}
