//! Rotation-matrix algebra on SO(3).
//!
//! [`RotationMatrix`] is the canonical element every representation maps to
//! and from. Construction through [`RotationMatrix::new`] validates the
//! column constraints `‖mᵢ‖ = 1`, `m₃ = m₁ × m₂` and `det = 1`.

use nalgebra::{Matrix3, Quaternion, SVector, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
/// Column-major flattening of a 3×3 matrix.
pub type Vec9 = SVector<f64, 9>;

/// Default tolerance for rotation validity checks.
pub const VALID_TOL: f64 = 1e-9;

/// Below this angle `exp_so3` switches to its Taylor branch.
const EXP_TAYLOR_ANGLE: f64 = 1e-8;

/// Above `π − LOG_NEAR_PI` the axis is read from the symmetric part.
const LOG_NEAR_PI: f64 = 1e-3;

/// A proper rotation matrix (orthonormal columns, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Mat3);

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Mat3::identity())
    }

    /// Validates `m` at [`VALID_TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        Self::with_tolerance(m, VALID_TOL)
    }

    pub fn with_tolerance(m: Mat3, tol: f64) -> Result<Self> {
        if is_valid(&m, tol) {
            Ok(RotationMatrix(m))
        } else {
            Err(Error::InvalidRotation { tol })
        }
    }

    /// Wraps `m` without checking. Callers guarantee the invariants.
    pub(crate) fn new_unchecked(m: Mat3) -> Self {
        RotationMatrix(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn into_inner(self) -> Mat3 {
        self.0
    }

    pub fn column(&self, i: usize) -> Vec3 {
        self.0.column(i).into_owned()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Rotation by `angle` about the x axis.
    pub fn about_x(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    pub fn about_y(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c))
    }

    pub fn about_z(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RotationMatrix(Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        compose(self, other)
    }

    pub fn inverse(&self) -> RotationMatrix {
        inverse(self)
    }

    pub fn transform(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

pub fn compose(r1: &RotationMatrix, r2: &RotationMatrix) -> RotationMatrix {
    RotationMatrix(r1.0 * r2.0)
}

pub fn inverse(r: &RotationMatrix) -> RotationMatrix {
    RotationMatrix(r.0.transpose())
}

/// Cross-product matrix: `hat(v) * w == v × w`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. Rejects matrices whose asymmetry `‖S + Sᵀ‖_max`
/// exceeds `1e-6`.
pub fn vee(s: &Mat3) -> Result<Vec3> {
    let asymmetry = (s + s.transpose()).amax();
    if asymmetry > 1e-6 {
        return Err(Error::NotSkew { asymmetry });
    }
    Ok(vee_unchecked(s))
}

/// Axial vector of the skew part of `s`.
pub(crate) fn vee_unchecked(s: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (s[(2, 1)] - s[(1, 2)]),
        0.5 * (s[(0, 2)] - s[(2, 0)]),
        0.5 * (s[(1, 0)] - s[(0, 1)]),
    )
}

/// Rodrigues' formula `I + sin α [ω̃]× + (1 − cos α) [ω̃]ײ` with `α = ‖ω‖`.
pub fn exp_so3(omega: &Vec3) -> RotationMatrix {
    let theta = omega.norm();
    let k = hat(omega);
    let (a, b) = if theta < EXP_TAYLOR_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        let half = 0.5 * theta;
        let sh = half.sin();
        (theta.sin() / theta, 2.0 * sh * sh / (theta * theta))
    };
    RotationMatrix(Mat3::identity() + k * a + k * k * b)
}

/// Principal matrix logarithm as a rotation vector with `‖ω‖ ≤ π`.
///
/// At exactly `α = π` the sign of the axis is fixed so that its
/// largest-magnitude component is positive.
pub fn log_so3(r: &RotationMatrix) -> Vec3 {
    let m = &r.0;
    let axial = vee_unchecked(m);
    let sin_a = axial.norm();
    let cos_a = 0.5 * (m.trace() - 1.0);
    let angle = sin_a.atan2(cos_a);

    if angle < 1e-8 {
        // ω ≈ axial·(1 + α²/6)
        return axial * (1.0 + angle * angle / 6.0);
    }
    if angle < PI - LOG_NEAR_PI {
        return axial * (angle / sin_a);
    }

    // (R + Rᵀ)/2 − cos α I = (1 − cos α) ω̃ω̃ᵀ
    let sym = (m + m.transpose()) * 0.5 - Mat3::identity() * cos_a;
    let scale = 1.0 - cos_a;
    let k = (0..3)
        .max_by(|&i, &j| sym[(i, i)].total_cmp(&sym[(j, j)]))
        .unwrap_or(0);
    let mut axis: Vec3 = sym.column(k).into_owned() / (sym[(k, k)] * scale).sqrt();
    axis /= axis.norm();
    let flip = if sin_a < 1e-12 {
        largest_component(&axis) < 0.0
    } else {
        axis.dot(&axial) < 0.0
    };
    if flip {
        axis = -axis;
    }
    axis * angle
}

fn largest_component(v: &Vec3) -> f64 {
    let k = v.iamax();
    v[k]
}

/// Haar-uniform rotation from a normalized 4D standard-normal draw.
pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> RotationMatrix {
    loop {
        let w: f64 = rng.sample(StandardNormal);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n > 1e-12 {
            let q = Quaternion::new(w / n, x / n, y / n, z / n);
            return RotationMatrix(quat_unit_to_matrix(&q));
        }
    }
}

/// Rotation matrix of a unit quaternion stored as nalgebra `(w, i, j, k)`.
pub(crate) fn quat_unit_to_matrix(q: &Quaternion<f64>) -> Mat3 {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    Mat3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// True iff the columns have unit norm, `m₃ = m₁ × m₂` and `det(m) = 1`,
/// each within `tol`.
pub fn is_valid(m: &Mat3, tol: f64) -> bool {
    if !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let c1 = m.column(0);
    let c2 = m.column(1);
    let c3 = m.column(2);
    let norms_ok = [c1.norm(), c2.norm(), c3.norm()]
        .iter()
        .all(|n| (n - 1.0).abs() <= tol);
    let cross_ok = (c1.cross(&c2) - c3).amax() <= tol;
    let det_ok = (m.determinant() - 1.0).abs() <= tol;
    norms_ok && cross_ok && det_ok
}

/// Column-major flattening; `‖vec(M)‖ = ‖M‖_F`.
pub fn vec(m: &Mat3) -> Vec9 {
    Vec9::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &[f64]) -> Mat3 {
    Mat3::from_column_slice(&v[..9])
}
