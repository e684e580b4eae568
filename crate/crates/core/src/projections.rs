//! Orthogonal Procrustes projections onto SO(3).
//!
//! [`svd_plus`] returns the rotation closest to an arbitrary 3×3 matrix in
//! Frobenius norm. [`gso`] is Gram-Schmidt completion of two columns, the
//! limit of a column-weighted Procrustes problem whose weights degenerate
//! to `(1, ε, 0)`; [`weighted_procrustes`] solves that problem exactly for
//! finite weights.
//!
//! Both projections carry hand-written vector-Jacobian products.

use nalgebra::Matrix3x2;

use crate::error::{Error, Result};
use crate::repr::SixD;
use crate::so3::{Mat3, RotationMatrix, Vec3};

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_TOL: f64 = 1e-14;
/// Singular values below `RANK_TOL·σ₁` are treated as zero when completing U.
const RANK_TOL: f64 = 1e-13;
const NEAR_SINGULAR_DET: f64 = 1e-6;
/// Floor on `|σ'ᵢ + σ'ⱼ|` in the SVD⁺ derivative.
const VJP_DENOM_FLOOR: f64 = 1e-8;
const GSO_MIN_NORM: f64 = 1e-12;
const GSO_MIN_SINE: f64 = 1e-7;

/// `M = U diag(σ) Vᵀ` with `σ₁ ≥ σ₂ ≥ σ₃ ≥ 0`. `U` and `V` are orthogonal
/// but either may be a reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdFactors {
    pub u: Mat3,
    pub sigma: Vec3,
    pub v: Mat3,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> Mat3 {
        self.u * Mat3::from_diagonal(&self.sigma) * self.v.transpose()
    }
}

/// One-sided (Hestenes) Jacobi SVD: plane rotations are applied to the
/// columns of `M` until `MᵀM` is diagonal, accumulating them in `V`.
pub fn svd3(m: &Mat3) -> Result<SvdFactors> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("svd3 input has non-finite entries".into()));
    }
    let mut b = *m;
    let mut v = Mat3::identity();
    // columns this small relative to M are rounding noise
    let noise = (f64::EPSILON * m.norm()).powi(2);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let alpha = b.column(p).norm_squared();
            let beta = b.column(q).norm_squared();
            let gamma = b.column(p).dot(&b.column(q));
            if gamma == 0.0 || alpha.min(beta) <= noise || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            rotate_columns(&mut b, p, q, c, s);
            rotate_columns(&mut v, p, q, c, s);
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order = [0usize, 1, 2];
    let norms = [b.column(0).norm(), b.column(1).norm(), b.column(2).norm()];
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma = Vec3::new(norms[order[0]], norms[order[1]], norms[order[2]]);
    let mut v_sorted = Mat3::zeros();
    let mut u = Mat3::zeros();
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(src));
        if sigma[dst] > RANK_TOL * sigma[0] && sigma[dst] > 0.0 {
            u.set_column(dst, &(b.column(src) / sigma[dst]));
        }
    }
    complete_basis(&mut u, &sigma);
    Ok(SvdFactors {
        u,
        sigma,
        v: v_sorted,
    })
}

fn rotate_columns(m: &mut Mat3, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..3 {
        let a = m[(r, p)];
        let b = m[(r, q)];
        m[(r, p)] = c * a - s * b;
        m[(r, q)] = s * a + c * b;
    }
}

/// Fills in left singular vectors for (numerically) zero singular values.
fn complete_basis(u: &mut Mat3, sigma: &Vec3) {
    let valid = |i: usize| sigma[i] > RANK_TOL * sigma[0] && sigma[i] > 0.0;
    if !valid(0) {
        *u = Mat3::identity();
        return;
    }
    if !valid(1) {
        let u1: Vec3 = u.column(0).into_owned();
        let k = u1.iamin();
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        let u2 = (e - u1 * u1.dot(&e)).normalize();
        u.set_column(1, &u2);
    }
    if !valid(2) {
        let u3 = u.column(0).cross(&u.column(1));
        u.set_column(2, &u3);
    }
}

/// Diagnostic flags raised by the projections.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionFlags {
    /// `|det M|` below `1e-6`: the minimizer is close to non-unique.
    pub near_singular: bool,
    /// A derivative denominator hit the regularization floor.
    pub regularized: bool,
}

/// `U diag(1, 1, det(UVᵀ)) Vᵀ`.
pub fn svd_plus(m: &Mat3) -> Result<RotationMatrix> {
    svd_plus_checked(m).map(|(r, _)| r)
}

pub fn svd_plus_checked(m: &Mat3) -> Result<(RotationMatrix, ProjectionFlags)> {
    let f = svd3(m)?;
    let r = rotation_from_factors(&f);
    let flags = ProjectionFlags {
        near_singular: m.determinant().abs() < NEAR_SINGULAR_DET,
        regularized: false,
    };
    Ok((r, flags))
}

fn reflection_sign(f: &SvdFactors) -> f64 {
    (f.u * f.v.transpose()).determinant().signum()
}

fn rotation_from_factors(f: &SvdFactors) -> RotationMatrix {
    let d = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, reflection_sign(f)));
    RotationMatrix::new_unchecked(f.u * d * f.v.transpose())
}

/// Gradient of `L(svd_plus(M))` with respect to `M`, given `∂L/∂R`.
///
/// Writing `M = R H` with `H = V Σ' Vᵀ`, `Σ' = diag(σ₁, σ₂, dσ₃)`, the
/// rotation differential `dR = RΩ` solves `ΩH + HΩ = Rᵀ dM − dMᵀ R`.
/// In the V basis that is a divide by `σ'ᵢ + σ'ⱼ`, which is floored at
/// `1e-8` in magnitude.
pub fn svd_plus_vjp(m: &Mat3, cotangent: &Mat3) -> Result<(Mat3, ProjectionFlags)> {
    let f = svd3(m)?;
    let d = reflection_sign(&f);
    let dvec = Vec3::new(1.0, 1.0, d);
    let sp = Vec3::new(f.sigma[0], f.sigma[1], d * f.sigma[2]);
    let dm = Mat3::from_diagonal(&dvec);
    let a = dm * f.u.transpose() * cotangent * f.v;
    let mut regularized = false;
    let mut b = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let mut s = sp[i] + sp[j];
            if s.abs() < VJP_DENOM_FLOOR {
                regularized = true;
                s = if s < 0.0 { -VJP_DENOM_FLOOR } else { VJP_DENOM_FLOOR };
            }
            b[(i, j)] = 0.5 * (a[(i, j)] - a[(j, i)]) / s;
        }
    }
    let grad = f.u * dm * b * f.v.transpose() * 2.0;
    let flags = ProjectionFlags {
        near_singular: m.determinant().abs() < NEAR_SINGULAR_DET,
        regularized,
    };
    Ok((grad, flags))
}

fn check_sixd(s: &SixD) -> Result<(f64, f64)> {
    let n1 = s.nu1.norm();
    if !(n1 >= GSO_MIN_NORM) {
        return Err(Error::Singular(format!("‖ν₁‖ = {n1:e}")));
    }
    let n2 = s.nu2.norm();
    let sine = if n2 > 0.0 { s.nu1.cross(&s.nu2).norm() / (n1 * n2) } else { 0.0 };
    if !(sine >= GSO_MIN_SINE) {
        return Err(Error::Singular(format!("ν₁, ν₂ nearly parallel (sin = {sine:e})")));
    }
    Ok((n1, n2))
}

/// Gram-Schmidt completion: normalize ν₁, remove its component from ν₂,
/// normalize, and take the cross product for the third column.
pub fn gso(s: &SixD) -> Result<RotationMatrix> {
    let (n1, _) = check_sixd(s)?;
    let b1 = s.nu1 / n1;
    let u2 = s.nu2 - b1 * b1.dot(&s.nu2);
    let b2 = u2 / u2.norm();
    let b3 = b1.cross(&b2);
    Ok(RotationMatrix::new_unchecked(Mat3::from_columns(&[b1, b2, b3])))
}

/// Gradient of `L(gso(ν₁, ν₂))` with respect to `(ν₁, ν₂)`.
pub fn gso_vjp(s: &SixD, cotangent: &Mat3) -> Result<SixD> {
    let (n1, _) = check_sixd(s)?;
    let b1 = s.nu1 / n1;
    let proj = b1.dot(&s.nu2);
    let u2 = s.nu2 - b1 * proj;
    let n2 = u2.norm();
    let b2 = u2 / n2;

    let g1: Vec3 = cotangent.column(0).into_owned();
    let g2: Vec3 = cotangent.column(1).into_owned();
    let g3: Vec3 = cotangent.column(2).into_owned();

    // b3 = b1 × b2
    let mut gb1 = g1 + b2.cross(&g3);
    let gb2 = g2 + g3.cross(&b1);
    // b2 = u2 / ‖u2‖
    let gu2 = (gb2 - b2 * b2.dot(&gb2)) / n2;
    // u2 = ν₂ − (b1·ν₂) b1
    let gnu2 = gu2 - b1 * b1.dot(&gu2);
    gb1 -= gu2 * proj + s.nu2 * b1.dot(&gu2);
    // b1 = ν₁ / ‖ν₁‖
    let gnu1 = (gb1 - b1 * b1.dot(&gb1)) / n1;
    Ok(SixD::new(gnu1, gnu2))
}

/// Result of [`weighted_procrustes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSolution {
    pub rotation: RotationMatrix,
    /// The weighted cross matrix is rank deficient and the minimizer is not
    /// unique; `rotation` is one of the minimizers.
    pub non_unique: bool,
}

/// `argmin_R ‖R diag(w) − [m₁, m₂, 0]‖_F` over SO(3).
///
/// Expanding the norm leaves `tr(Rᵀ [w₁m₁, w₂m₂, 0])` to maximize, so the
/// minimizer is the SVD⁺ projection of the weighted cross matrix.
pub fn weighted_procrustes(m: &Matrix3x2<f64>, weights: [f64; 3]) -> Result<WeightedSolution> {
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Unsupported {
            op: "weighted_procrustes",
            what: "negative weights".into(),
        });
    }
    let cross = Mat3::from_columns(&[
        m.column(0) * weights[0],
        m.column(1) * weights[1],
        Vec3::zeros(),
    ]);
    let f = svd3(&cross)?;
    let d = reflection_sign(&f);
    let scale = f.sigma[0].max(f64::MIN_POSITIVE);
    let non_unique = f.sigma[1] + d * f.sigma[2] <= RANK_TOL * scale;
    Ok(WeightedSolution {
        rotation: rotation_from_factors(&f),
        non_unique,
    })
}

/// Central differences `(L(x + hEᵢ) − L(x − hEᵢ)) / 2h` per coordinate.
pub fn finite_diff_grad<F>(loss: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = loss(&probe);
            probe[i] = x[i] - h;
            let down = loss(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
