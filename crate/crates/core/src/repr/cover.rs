//! Double cover, half-space canonicalization and quaternion augmentation.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;

use super::{AxisAngle, ExpCoord, Representation, UnitQuaternion};
use crate::error::{Error, Result};
use crate::so3::{Mat3, RotationMatrix, Vec3};

/// Angles within this distance of π count as lying on the separating
/// boundary, where the axis sign decides.
const BOUNDARY_BAND: f64 = 1e-13;

/// The second preimage of the same rotation.
///
/// * quaternion `q ↦ −q`
/// * exponential coordinates `ω ↦ (‖ω‖ − 2π)·ω/‖ω‖`, defined for `0 < ‖ω‖`
/// * axis-angle `(ω̃, α) ↦ (−ω̃, −α)`
pub fn double_cover_partner(rep: &Representation) -> Result<Representation> {
    match rep {
        Representation::Quat(q) => Ok(Representation::Quat(q.neg())),
        Representation::Exp(e) => {
            let n = e.omega.norm();
            if n == 0.0 {
                return Err(Error::Unsupported {
                    op: "double_cover_partner",
                    what: "the zero rotation vector".into(),
                });
            }
            Ok(Representation::Exp(ExpCoord::new(e.omega * ((n - 2.0 * PI) / n))))
        }
        Representation::AxisAngle(a) => Ok(Representation::AxisAngle(AxisAngle::new(-a.axis, -a.angle))),
        other => Err(Error::Unsupported {
            op: "double_cover_partner",
            what: format!("representation `{}`", other.kind()),
        }),
    }
}

fn first_nonzero_positive(v: &Vec3) -> bool {
    v.iter().find(|c| **c != 0.0).is_none_or(|c| *c > 0.0)
}

/// Restricts a doubly covering representation to one half of its space.
///
/// Quaternions get `w ≥ 0` (ties broken by the first nonzero vector
/// component). Exponential coordinates are reduced to `‖ω‖ ≤ π` and
/// axis-angles to `α ∈ [0, π]`; at exactly π the axis sign is fixed the
/// same way as the quaternion tie.
pub fn halfspace_map(rep: &Representation) -> Result<Representation> {
    match rep {
        Representation::Quat(q) => Ok(Representation::Quat(q.canonical())),
        Representation::Exp(e) => Ok(Representation::Exp(canonical_exp(e))),
        Representation::AxisAngle(a) => Ok(Representation::AxisAngle(canonical_aa(a))),
        other => Err(Error::Unsupported {
            op: "halfspace_map",
            what: format!("representation `{}`", other.kind()),
        }),
    }
}

fn canonical_exp(e: &ExpCoord) -> ExpCoord {
    let n = e.omega.norm();
    if n < PI - BOUNDARY_BAND {
        return *e;
    }
    let mut omega = e.omega;
    let reduced = n.rem_euclid(2.0 * PI);
    if reduced != n {
        omega *= reduced / n;
    }
    let r = reduced;
    if r > PI + BOUNDARY_BAND {
        omega *= (r - 2.0 * PI) / r;
    }
    if (omega.norm() - PI).abs() <= BOUNDARY_BAND && !first_nonzero_positive(&omega) {
        omega = -omega;
    }
    ExpCoord::new(omega)
}

fn canonical_aa(a: &AxisAngle) -> AxisAngle {
    let mut angle = a.angle;
    let mut axis = a.axis;
    if !(0.0..=PI + BOUNDARY_BAND).contains(&angle) {
        angle = (angle + PI).rem_euclid(2.0 * PI) - PI;
    }
    if angle < 0.0 {
        angle = -angle;
        axis = -axis;
    }
    if (angle - PI).abs() <= BOUNDARY_BAND && !first_nonzero_positive(&axis) {
        axis = -axis;
    }
    AxisAngle::new(axis, angle)
}

/// `‖I − R‖_F ≤ √2`, the regime where a quaternion half-space map has no
/// discontinuity.
pub fn is_small_rotation(r: &RotationMatrix) -> bool {
    (Mat3::identity() - r.matrix()).norm() <= SQRT_2 + 1e-12
}

/// Appends `−q` (with a copy of its feature) for every canonical quaternion
/// whose scalar part is below `epsilon`.
pub fn augment_quaternion_dataset<T: Clone>(
    quats: &[UnitQuaternion],
    features: &[T],
    epsilon: f64,
) -> Result<(Vec<UnitQuaternion>, Vec<T>)> {
    if quats.len() != features.len() {
        return Err(Error::Shape {
            expected: format!("{} features", quats.len()),
            got: features.len().to_string(),
        });
    }
    if let Some(i) = quats.iter().position(|q| !q.is_canonical()) {
        return Err(Error::NonCanonical(format!("quaternion at index {i}")));
    }
    let mut out_q = quats.to_vec();
    let mut out_f = features.to_vec();
    for (q, f) in quats.iter().zip(features) {
        if q.w < epsilon {
            out_q.push(q.neg());
            out_f.push(f.clone());
        }
    }
    Ok((out_q, out_f))
}

/// Flips each quaternion with `w < epsilon` with probability `flip_prob`.
///
/// One uniform draw is consumed per element regardless of its value, so the
/// random stream does not depend on the data.
pub fn batch_augment_quaternions<R: Rng + ?Sized>(
    batch: &[UnitQuaternion],
    rng: &mut R,
    epsilon: f64,
    flip_prob: f64,
) -> Vec<UnitQuaternion> {
    batch
        .iter()
        .map(|q| {
            let u: f64 = rng.random();
            if u < flip_prob && q.w < epsilon {
                q.neg()
            } else {
                *q
            }
        })
        .collect()
}
