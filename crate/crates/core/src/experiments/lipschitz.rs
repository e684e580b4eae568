//! How far apart `g(R₁)` and `g(R₂)` land for nearby rotations.

use std::f64::consts::PI;

use rand::Rng;

use super::{num, Table};
use crate::error::{Error, Result};
use crate::metrics::{chordal, l2};
use crate::repr::{euler_to_matrix, EulerXYZ, RepKind, Representation};
use crate::so3::{exp_so3, sample_uniform, RotationMatrix, Vec3};

const LOCAL_RADIUS: f64 = 0.05;
const BOUNDARY_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzRow {
    pub d_so3: f64,
    pub d_repr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzScan {
    pub kind: RepKind,
    pub rows: Vec<LipschitzRow>,
    /// Pair counts per sampling stratum: uniform, local, boundary.
    pub strata: [usize; 3],
}

impl LipschitzScan {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["rep", "d_so3", "d_repr"]);
        for r in &self.rows {
            t.push(vec![self.kind.tag().into(), num(r.d_so3), num(r.d_repr)]);
        }
        t
    }

    /// Largest `d_repr / d_so3` over pairs with `d_so3 > 0`.
    pub fn max_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.d_so3 > 0.0)
            .map(|r| r.d_repr / r.d_so3)
            .fold(0.0, f64::max)
    }
}

fn small_step<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> RotationMatrix {
    loop {
        let d = Vec3::new(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
        );
        if d.norm() <= radius {
            return exp_so3(&d);
        }
    }
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A pair straddling the discontinuity of `g` for `kind`.
fn boundary_pair<R: Rng + ?Sized>(kind: RepKind, rng: &mut R) -> (RotationMatrix, RotationMatrix) {
    match kind {
        RepKind::Euler => {
            // α and γ on opposite sides of the ±π seam
            let beta = rng.random_range(-1.2..1.2);
            let mut side = |s: f64| {
                let a = s * (PI - rng.random_range(0.0..BOUNDARY_BAND));
                let g = s * (PI - rng.random_range(0.0..BOUNDARY_BAND));
                let b = beta + rng.random_range(-BOUNDARY_BAND..BOUNDARY_BAND);
                euler_to_matrix(&EulerXYZ::new(a, b, g))
            };
            (side(1.0), side(-1.0))
        }
        _ => {
            // rotation angles just below π, where the half-space flips
            let axis = unit_vector(rng);
            let r1 = exp_so3(&(axis * (PI - rng.random_range(0.0..BOUNDARY_BAND))));
            let r2 = r1.compose(&small_step(rng, BOUNDARY_BAND));
            (r1, r2)
        }
    }
}

/// Chordal distance against representation distance over random pairs.
///
/// Half of the pairs are independent Haar draws, a quarter are local
/// (`R₂ = R₁·exp(δ)`, `‖δ‖ ≤ 0.05`) and a quarter sit on the discontinuity
/// set of `g`.
pub fn lipschitz_scan<R: Rng + ?Sized>(kind: RepKind, n_pairs: usize, rng: &mut R) -> Result<LipschitzScan> {
    if matches!(kind, RepKind::Angle2D | RepKind::SinCos2D) {
        return Err(Error::Unsupported {
            op: "lipschitz_scan",
            what: format!("{kind} is a planar representation"),
        });
    }
    let n_local = n_pairs / 4;
    let n_boundary = n_pairs / 4;
    let n_uniform = n_pairs - n_local - n_boundary;
    let mut rows = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let (r1, r2) = if i < n_uniform {
            (sample_uniform(rng), sample_uniform(rng))
        } else if i < n_uniform + n_local {
            let r1 = sample_uniform(rng);
            let r2 = r1.compose(&small_step(rng, LOCAL_RADIUS));
            (r1, r2)
        } else {
            boundary_pair(kind, rng)
        };
        let g1 = Representation::from_rotation(kind, &r1)?.to_vector();
        let g2 = Representation::from_rotation(kind, &r2)?.to_vector();
        rows.push(LipschitzRow {
            d_so3: chordal(&r1, &r2),
            d_repr: l2(&g1, &g2),
        });
    }
    Ok(LipschitzScan {
        kind,
        rows,
        strata: [n_uniform, n_local, n_boundary],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nined_is_exactly_on_the_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let scan = lipschitz_scan(RepKind::NineD, 400, &mut rng).unwrap();
        assert!(scan.rows.iter().all(|r| r.d_repr == r.d_so3));
        assert_eq!(scan.strata, [200, 100, 100]);
    }

    #[test]
    fn sixd_never_exceeds_chordal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scan = lipschitz_scan(RepKind::SixD, 400, &mut rng).unwrap();
        assert!(scan.rows.iter().all(|r| r.d_repr <= r.d_so3 + 1e-12));
    }

    #[test]
    fn quaternion_jumps_at_the_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scan = lipschitz_scan(RepKind::Quat, 400, &mut rng).unwrap();
        assert!(scan.rows.iter().any(|r| r.d_so3 < 0.1 && r.d_repr > 1.9));
        assert_eq!(scan.table().rows.len(), 400);
        assert!(lipschitz_scan(RepKind::Angle2D, 4, &mut rng).is_err());
    }
}
