//! Rotation representations and their `f: 𝓡 → SO(3)` / `g: SO(3) → 𝓡` maps.
//!
//! Every SO(3) representation implements [`RotationRepr`]; the left-inverse
//! law `f(g(R)) = R` holds for all of them. [`Representation`] is the tagged
//! union used where the variant is only known at runtime (CSV files, the CLI,
//! experiment configuration).
//!
//! Vector layouts (`to_vector` / `from_slice`) match the CSV field orders
//! listed by [`RepKind::fields`].

mod cover;
pub mod io;

pub use cover::{
    augment_quaternion_dataset, batch_augment_quaternions, double_cover_partner, halfspace_map,
    is_small_rotation,
};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::projections;
use crate::so3::{exp_so3, log_so3, Mat3, RotationMatrix, Vec3};

/// Tolerance on `|‖q‖ − 1|` and `|‖ω̃‖ − 1|` before input is rejected.
const UNIT_REJECT_TOL: f64 = 1e-6;

/// `cos β` below this is treated as gimbal lock.
const GIMBAL_COS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RepKind {
    Euler,
    Exp,
    AxisAngle,
    Quat,
    Mrp,
    SixD,
    NineD,
    Angle2D,
    SinCos2D,
}

impl RepKind {
    /// The SO(3) representations (everything except the planar ones).
    pub const SO3: [RepKind; 7] = [
        RepKind::Euler,
        RepKind::Exp,
        RepKind::AxisAngle,
        RepKind::Quat,
        RepKind::Mrp,
        RepKind::SixD,
        RepKind::NineD,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RepKind::Euler => "euler",
            RepKind::Exp => "exp",
            RepKind::AxisAngle => "axisangle",
            RepKind::Quat => "quat",
            RepKind::Mrp => "mrp",
            RepKind::SixD => "sixd",
            RepKind::NineD => "nined",
            RepKind::Angle2D => "angle2d",
            RepKind::SinCos2D => "sincos2d",
        }
    }

    pub fn dim(self) -> usize {
        self.fields().len()
    }

    pub fn fields(self) -> &'static [&'static str] {
        match self {
            RepKind::Euler => &["alpha", "beta", "gamma"],
            RepKind::Exp => &["wx", "wy", "wz"],
            RepKind::AxisAngle => &["ax", "ay", "az", "angle"],
            RepKind::Quat => &["w", "x", "y", "z"],
            RepKind::Mrp => &["px", "py", "pz"],
            RepKind::SixD => &["nu1x", "nu1y", "nu1z", "nu2x", "nu2y", "nu2z"],
            RepKind::NineD => &["m11", "m21", "m31", "m12", "m22", "m32", "m13", "m23", "m33"],
            RepKind::Angle2D => &["alpha"],
            RepKind::SinCos2D => &["c", "s"],
        }
    }

    /// Euclidean diameter of the canonical domain of `g`.
    ///
    /// Returns `None` for the unbounded 6D and 9D spaces.
    pub fn width(self) -> Option<f64> {
        match self {
            // [−π,π) × [−π/2,π/2] × [−π,π)
            RepKind::Euler => Some(3.0 * PI),
            RepKind::Exp => Some(2.0 * PI),
            // S² × [0, π]
            RepKind::AxisAngle => Some((4.0 + PI * PI).sqrt()),
            // closed upper hemisphere of S³
            RepKind::Quat => Some(2.0),
            RepKind::Mrp => Some(2.0),
            RepKind::Angle2D => Some(2.0 * PI),
            RepKind::SinCos2D => Some(2.0),
            RepKind::SixD | RepKind::NineD => None,
        }
    }
}

impl fmt::Display for RepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for RepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().as_str() {
            "euler" => RepKind::Euler,
            "exp" => RepKind::Exp,
            "axisangle" | "aa" => RepKind::AxisAngle,
            "quat" => RepKind::Quat,
            "mrp" => RepKind::Mrp,
            "sixd" | "6d" => RepKind::SixD,
            "nined" | "9d" => RepKind::NineD,
            "angle2d" => RepKind::Angle2D,
            "sincos2d" => RepKind::SinCos2D,
            other => {
                return Err(Error::Unsupported {
                    op: "parse representation",
                    what: format!("tag `{other}`"),
                })
            }
        };
        Ok(kind)
    }
}

/// A representation of SO(3) with a left-inverse pair of maps.
pub trait RotationRepr: Sized {
    const KIND: RepKind;

    /// The map `f: 𝓡 → SO(3)`.
    fn to_rotation(&self) -> Result<RotationMatrix>;

    /// The map `g: SO(3) → 𝓡`, returning the canonical element.
    fn from_rotation(r: &RotationMatrix) -> Self;

    fn to_vector(&self) -> Vec<f64>;

    fn from_slice(v: &[f64]) -> Result<Self>;
}

fn check_len(v: &[f64], kind: RepKind) -> Result<()> {
    if v.len() != kind.dim() {
        return Err(Error::Shape {
            expected: format!("{} values for {}", kind.dim(), kind),
            got: v.len().to_string(),
        });
    }
    Ok(())
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w >= PI {
        -PI
    } else {
        w
    }
}

// ---------------------------------------------------------------------------
// Euler angles

/// Intrinsic x-y-z Euler angles, `R = R_z(γ) R_y(β) R_x(α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerXYZ {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerXYZ {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerXYZ { alpha, beta, gamma }
    }

    /// `α, γ ∈ [−π, π)` and `β ∈ [−π/2, π/2]`.
    pub fn is_canonical(&self) -> bool {
        (-PI..PI).contains(&self.alpha)
            && (-PI..PI).contains(&self.gamma)
            && (-PI / 2.0..=PI / 2.0).contains(&self.beta)
    }
}

pub fn euler_to_matrix(e: &EulerXYZ) -> RotationMatrix {
    let rx = RotationMatrix::about_x(e.alpha);
    let ry = RotationMatrix::about_y(e.beta);
    let rz = RotationMatrix::about_z(e.gamma);
    rz.compose(&ry).compose(&rx)
}

/// Canonical Euler angles of `r`. At gimbal lock `γ` is set to zero and the
/// remaining freedom is folded into `α`.
pub fn matrix_to_euler(r: &RotationMatrix) -> EulerXYZ {
    let m = r.matrix();
    let cb = m[(0, 0)].hypot(m[(1, 0)]);
    let beta = (-m[(2, 0)]).atan2(cb);
    if cb < GIMBAL_COS {
        // R = Ry(±π/2)·Rx(α): m01 = ±sin α, m11 = cos α
        let alpha = if m[(2, 0)] < 0.0 {
            m[(0, 1)].atan2(m[(1, 1)])
        } else {
            (-m[(0, 1)]).atan2(m[(1, 1)])
        };
        return EulerXYZ::new(wrap_angle(alpha), beta, 0.0);
    }
    let alpha = m[(2, 1)].atan2(m[(2, 2)]);
    let gamma = m[(1, 0)].atan2(m[(0, 0)]);
    EulerXYZ::new(wrap_angle(alpha), beta, wrap_angle(gamma))
}

impl RotationRepr for EulerXYZ {
    const KIND: RepKind = RepKind::Euler;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        Ok(euler_to_matrix(self))
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        matrix_to_euler(r)
    }

    fn to_vector(&self) -> Vec<f64> {
        vec![self.alpha, self.beta, self.gamma]
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(EulerXYZ::new(v[0], v[1], v[2]))
    }
}

// ---------------------------------------------------------------------------
// Exponential coordinates

/// Rotation vector: axis scaled by angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpCoord {
    pub omega: Vec3,
}

impl ExpCoord {
    pub fn new(omega: Vec3) -> Self {
        ExpCoord { omega }
    }
}

impl RotationRepr for ExpCoord {
    const KIND: RepKind = RepKind::Exp;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        Ok(exp_so3(&self.omega))
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        ExpCoord::new(log_so3(r))
    }

    fn to_vector(&self) -> Vec<f64> {
        self.omega.as_slice().to_vec()
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(ExpCoord::new(Vec3::new(v[0], v[1], v[2])))
    }
}

// ---------------------------------------------------------------------------
// Axis-angle

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: Vec3,
    pub angle: f64,
}

impl AxisAngle {
    pub fn new(axis: Vec3, angle: f64) -> Self {
        AxisAngle { axis, angle }
    }
}

pub fn aa_to_matrix(aa: &AxisAngle) -> Result<RotationMatrix> {
    let n = aa.axis.norm();
    if (n - 1.0).abs() > UNIT_REJECT_TOL {
        return Err(Error::NotUnit {
            deviation: (n - 1.0).abs(),
        });
    }
    Ok(exp_so3(&(aa.axis * (aa.angle / n))))
}

pub fn matrix_to_aa(r: &RotationMatrix) -> AxisAngle {
    exp_to_aa(&ExpCoord::from_rotation(r))
}

/// `α = ‖ω‖`, `ω̃ = ω/α`; the zero rotation gets axis `(1, 0, 0)`.
pub fn exp_to_aa(e: &ExpCoord) -> AxisAngle {
    let angle = e.omega.norm();
    if angle == 0.0 {
        return AxisAngle::new(Vec3::x(), 0.0);
    }
    AxisAngle::new(e.omega / angle, angle)
}

pub fn aa_to_exp(aa: &AxisAngle) -> ExpCoord {
    ExpCoord::new(aa.axis * aa.angle)
}

impl RotationRepr for AxisAngle {
    const KIND: RepKind = RepKind::AxisAngle;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        aa_to_matrix(self)
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        matrix_to_aa(r)
    }

    fn to_vector(&self) -> Vec<f64> {
        vec![self.axis.x, self.axis.y, self.axis.z, self.angle]
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(AxisAngle::new(Vec3::new(v[0], v[1], v[2]), v[3]))
    }
}

// ---------------------------------------------------------------------------
// Unit quaternions

/// Unit quaternion, scalar first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        UnitQuaternion { w, x, y, z }
    }

    /// Scales `(w, x, y, z)` to unit length.
    pub fn normalized(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n > 1e-12) {
            return Err(Error::ZeroLength);
        }
        Ok(UnitQuaternion::new(w / n, x / n, y / n, z / n))
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn neg(&self) -> Self {
        UnitQuaternion::new(-self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(&self, o: &UnitQuaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// `w > 0`, or `w = 0` with the first nonzero of `(x, y, z)` positive.
    pub fn is_canonical(&self) -> bool {
        if self.w != 0.0 {
            return self.w > 0.0;
        }
        [self.x, self.y, self.z]
            .into_iter()
            .find(|v| *v != 0.0)
            .is_none_or(|v| v > 0.0)
    }

    pub fn canonical(&self) -> Self {
        if self.is_canonical() {
            *self
        } else {
            self.neg()
        }
    }
}

pub fn quat_to_matrix(q: &UnitQuaternion) -> Result<RotationMatrix> {
    let n = q.norm();
    if (n - 1.0).abs() > UNIT_REJECT_TOL {
        return Err(Error::NotUnit {
            deviation: (n - 1.0).abs(),
        });
    }
    let q = nalgebra::Quaternion::new(q.w / n, q.x / n, q.y / n, q.z / n);
    Ok(RotationMatrix::new_unchecked(crate::so3::quat_unit_to_matrix(&q)))
}

/// Shepperd's method without canonicalization: the sign is whatever makes
/// the pivot component (largest of `w², x², y², z²`) positive.
pub fn matrix_to_quat_raw(r: &RotationMatrix) -> UnitQuaternion {
    let m = r.matrix();
    let tr = m.trace();
    let d = [tr, m[(0, 0)], m[(1, 1)], m[(2, 2)]];
    let k = (0..4).max_by(|&i, &j| d[i].total_cmp(&d[j])).unwrap_or(0);
    let (w, x, y, z) = match k {
        0 => {
            let s = 2.0 * (1.0 + tr).sqrt();
            (
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        }
        1 => {
            let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            (
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            )
        }
        2 => {
            let s = 2.0 * (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).sqrt();
            (
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            )
        }
        _ => {
            let s = 2.0 * (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).sqrt();
            (
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            )
        }
    };
    let n = (w * w + x * x + y * y + z * z).sqrt();
    UnitQuaternion::new(w / n, x / n, y / n, z / n)
}

/// Canonical (`w ≥ 0`) quaternion of `r`.
pub fn matrix_to_quat(r: &RotationMatrix) -> UnitQuaternion {
    matrix_to_quat_raw(r).canonical()
}

impl RotationRepr for UnitQuaternion {
    const KIND: RepKind = RepKind::Quat;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        quat_to_matrix(self)
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        matrix_to_quat(r)
    }

    fn to_vector(&self) -> Vec<f64> {
        self.as_array().to_vec()
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(UnitQuaternion::new(v[0], v[1], v[2], v[3]))
    }
}

// ---------------------------------------------------------------------------
// Modified Rodrigues parameters

/// `p = tan(α/4)·ω̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mrp {
    pub p: Vec3,
}

impl Mrp {
    pub fn new(p: Vec3) -> Self {
        Mrp { p }
    }
}

pub fn aa_to_mrp(aa: &AxisAngle) -> Mrp {
    Mrp::new(aa.axis * (aa.angle / 4.0).tan())
}

pub fn mrp_to_aa(m: &Mrp) -> AxisAngle {
    let n = m.p.norm();
    if n == 0.0 {
        return AxisAngle::new(Vec3::x(), 0.0);
    }
    AxisAngle::new(m.p / n, 4.0 * n.atan())
}

impl RotationRepr for Mrp {
    const KIND: RepKind = RepKind::Mrp;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        // stereographic inverse: q = ((1 − ‖p‖²), 2p) / (1 + ‖p‖²)
        let n2 = self.p.norm_squared();
        let d = 1.0 + n2;
        let q = UnitQuaternion::new((1.0 - n2) / d, 2.0 * self.p.x / d, 2.0 * self.p.y / d, 2.0 * self.p.z / d);
        quat_to_matrix(&q)
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        let q = matrix_to_quat(r);
        Mrp::new(Vec3::new(q.x, q.y, q.z) / (1.0 + q.w))
    }

    fn to_vector(&self) -> Vec<f64> {
        self.p.as_slice().to_vec()
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(Mrp::new(Vec3::new(v[0], v[1], v[2])))
    }
}

// ---------------------------------------------------------------------------
// 6D and 9D

/// Two unconstrained 3-vectors completed to a frame by Gram-Schmidt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixD {
    pub nu1: Vec3,
    pub nu2: Vec3,
}

impl SixD {
    pub fn new(nu1: Vec3, nu2: Vec3) -> Self {
        SixD { nu1, nu2 }
    }
}

pub fn sixd_to_matrix(s: &SixD) -> Result<RotationMatrix> {
    projections::gso(s)
}

/// First two columns of `r`.
pub fn matrix_to_sixd(r: &RotationMatrix) -> SixD {
    SixD::new(r.column(0), r.column(1))
}

impl RotationRepr for SixD {
    const KIND: RepKind = RepKind::SixD;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        sixd_to_matrix(self)
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        matrix_to_sixd(r)
    }

    fn to_vector(&self) -> Vec<f64> {
        let mut v = self.nu1.as_slice().to_vec();
        v.extend_from_slice(self.nu2.as_slice());
        v
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(SixD::new(Vec3::from_column_slice(&v[..3]), Vec3::from_column_slice(&v[3..])))
    }
}

/// An unconstrained 3×3 matrix projected onto SO(3) with SVD⁺.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NineD {
    pub m: Mat3,
}

impl NineD {
    pub fn new(m: Mat3) -> Self {
        NineD { m }
    }
}

pub fn nined_to_matrix(n: &NineD) -> Result<RotationMatrix> {
    projections::svd_plus(&n.m)
}

pub fn matrix_to_nined(r: &RotationMatrix) -> NineD {
    NineD::new(*r.matrix())
}

impl RotationRepr for NineD {
    const KIND: RepKind = RepKind::NineD;

    fn to_rotation(&self) -> Result<RotationMatrix> {
        nined_to_matrix(self)
    }

    fn from_rotation(r: &RotationMatrix) -> Self {
        matrix_to_nined(r)
    }

    fn to_vector(&self) -> Vec<f64> {
        self.m.as_slice().to_vec()
    }

    fn from_slice(v: &[f64]) -> Result<Self> {
        check_len(v, Self::KIND)?;
        Ok(NineD::new(Mat3::from_column_slice(v)))
    }
}

// ---------------------------------------------------------------------------
// SO(2)

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle2D {
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinCos2D {
    pub c: f64,
    pub s: f64,
}

impl SinCos2D {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        let dev = (c * c + s * s - 1.0).abs();
        if dev > 1e-9 {
            return Err(Error::NotUnit { deviation: dev });
        }
        Ok(SinCos2D { c, s })
    }
}

pub fn angle_to_sincos(a: &Angle2D) -> SinCos2D {
    let (s, c) = a.alpha.sin_cos();
    SinCos2D { c, s }
}

/// Principal value in `[−π, π)`.
pub fn sincos_to_angle(s: &SinCos2D) -> Angle2D {
    Angle2D {
        alpha: wrap_angle(s.s.atan2(s.c)),
    }
}

/// Planar rotation angle of a rotation about z; rejects anything else.
fn planar_angle(r: &RotationMatrix) -> Result<f64> {
    let m = r.matrix();
    if (m[(2, 2)] - 1.0).abs() > 1e-9 {
        return Err(Error::Unsupported {
            op: "g for SO(2)",
            what: "a rotation that is not about the z axis".into(),
        });
    }
    Ok(wrap_angle(m[(1, 0)].atan2(m[(0, 0)])))
}

// ---------------------------------------------------------------------------
// Tagged union

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation {
    Euler(EulerXYZ),
    Exp(ExpCoord),
    AxisAngle(AxisAngle),
    Quat(UnitQuaternion),
    Mrp(Mrp),
    SixD(SixD),
    NineD(NineD),
    Angle2D(Angle2D),
    SinCos2D(SinCos2D),
}

impl Representation {
    pub fn kind(&self) -> RepKind {
        match self {
            Representation::Euler(_) => RepKind::Euler,
            Representation::Exp(_) => RepKind::Exp,
            Representation::AxisAngle(_) => RepKind::AxisAngle,
            Representation::Quat(_) => RepKind::Quat,
            Representation::Mrp(_) => RepKind::Mrp,
            Representation::SixD(_) => RepKind::SixD,
            Representation::NineD(_) => RepKind::NineD,
            Representation::Angle2D(_) => RepKind::Angle2D,
            Representation::SinCos2D(_) => RepKind::SinCos2D,
        }
    }

    /// `f`. Planar representations embed as rotations about z.
    pub fn to_rotation(&self) -> Result<RotationMatrix> {
        match self {
            Representation::Euler(r) => r.to_rotation(),
            Representation::Exp(r) => r.to_rotation(),
            Representation::AxisAngle(r) => r.to_rotation(),
            Representation::Quat(r) => r.to_rotation(),
            Representation::Mrp(r) => r.to_rotation(),
            Representation::SixD(r) => r.to_rotation(),
            Representation::NineD(r) => r.to_rotation(),
            Representation::Angle2D(a) => Ok(RotationMatrix::about_z(a.alpha)),
            Representation::SinCos2D(s) => Ok(RotationMatrix::about_z(s.s.atan2(s.c))),
        }
    }

    /// `g` for the given variant.
    pub fn from_rotation(kind: RepKind, r: &RotationMatrix) -> Result<Representation> {
        Ok(match kind {
            RepKind::Euler => Representation::Euler(EulerXYZ::from_rotation(r)),
            RepKind::Exp => Representation::Exp(ExpCoord::from_rotation(r)),
            RepKind::AxisAngle => Representation::AxisAngle(AxisAngle::from_rotation(r)),
            RepKind::Quat => Representation::Quat(UnitQuaternion::from_rotation(r)),
            RepKind::Mrp => Representation::Mrp(Mrp::from_rotation(r)),
            RepKind::SixD => Representation::SixD(SixD::from_rotation(r)),
            RepKind::NineD => Representation::NineD(NineD::from_rotation(r)),
            RepKind::Angle2D => Representation::Angle2D(Angle2D {
                alpha: planar_angle(r)?,
            }),
            RepKind::SinCos2D => {
                Representation::SinCos2D(angle_to_sincos(&Angle2D {
                    alpha: planar_angle(r)?,
                }))
            }
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        match self {
            Representation::Euler(r) => r.to_vector(),
            Representation::Exp(r) => r.to_vector(),
            Representation::AxisAngle(r) => r.to_vector(),
            Representation::Quat(r) => r.to_vector(),
            Representation::Mrp(r) => r.to_vector(),
            Representation::SixD(r) => r.to_vector(),
            Representation::NineD(r) => r.to_vector(),
            Representation::Angle2D(a) => vec![a.alpha],
            Representation::SinCos2D(s) => vec![s.c, s.s],
        }
    }

    pub fn from_slice(kind: RepKind, v: &[f64]) -> Result<Representation> {
        Ok(match kind {
            RepKind::Euler => Representation::Euler(EulerXYZ::from_slice(v)?),
            RepKind::Exp => Representation::Exp(ExpCoord::from_slice(v)?),
            RepKind::AxisAngle => Representation::AxisAngle(AxisAngle::from_slice(v)?),
            RepKind::Quat => Representation::Quat(UnitQuaternion::from_slice(v)?),
            RepKind::Mrp => Representation::Mrp(Mrp::from_slice(v)?),
            RepKind::SixD => Representation::SixD(SixD::from_slice(v)?),
            RepKind::NineD => Representation::NineD(NineD::from_slice(v)?),
            RepKind::Angle2D => {
                check_len(v, kind)?;
                Representation::Angle2D(Angle2D { alpha: v[0] })
            }
            RepKind::SinCos2D => {
                check_len(v, kind)?;
                Representation::SinCos2D(SinCos2D::new(v[0], v[1])?)
            }
        })
    }
}
