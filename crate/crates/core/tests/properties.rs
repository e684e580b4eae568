use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use rotkit::learn::{LossSpec, Matrix, Picking, Projection};
use rotkit::metrics::{chordal, chordal_sq, Metric};
use rotkit::projections::{gso, svd_plus};
use rotkit::repr::{
    aa_to_matrix, angle_to_sincos, halfspace_map, matrix_to_sixd, quat_to_matrix, sincos_to_angle, Angle2D,
    AxisAngle, ExpCoord, RepKind, Representation, SinCos2D, SixD, UnitQuaternion,
};
use rotkit::so3::{exp_so3, is_valid, log_so3, vec, Mat3, RotationMatrix, VALID_TOL};

fn quat() -> impl Strategy<Value = UnitQuaternion> {
    prop::array::uniform4(-1.0..1.0f64)
        .prop_filter("away from zero", |c| c.iter().map(|v| v * v).sum::<f64>() > 0.01)
        .prop_map(|c| UnitQuaternion::normalized(c[0], c[1], c[2], c[3]).unwrap())
}

fn rotation() -> impl Strategy<Value = RotationMatrix> {
    quat().prop_map(|q| quat_to_matrix(&q).unwrap())
}

fn vec3(scale: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-scale..scale).prop_map(|a| Vector3::new(a[0], a[1], a[2]))
}

fn unit3() -> impl Strategy<Value = Vector3<f64>> {
    vec3(1.0).prop_filter("away from zero", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

fn mat3() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-2.0..2.0f64).prop_map(|a| Mat3::from_column_slice(&a))
}

fn frob(a: &Mat3, b: &Mat3) -> f64 {
    (a - b).norm()
}

proptest! {
    #[test]
    fn group_operations_stay_on_so3(a in rotation(), b in rotation()) {
        prop_assert!(is_valid(a.compose(&b).matrix(), VALID_TOL));
        prop_assert!(is_valid(a.inverse().matrix(), VALID_TOL));
    }

    #[test]
    fn exp_log_round_trip(axis in unit3(), angle in 1e-6..PI - 0.01) {
        let v = axis * angle;
        prop_assert!((log_so3(&exp_so3(&v)) - v).norm() < 1e-8);
    }

    #[test]
    fn exp_double_cover(axis in unit3(), angle in 1e-6..2.0 * PI - 1e-6) {
        let v = axis * angle;
        let partner = v * ((angle - 2.0 * PI) / angle);
        prop_assert!(frob(exp_so3(&v).matrix(), exp_so3(&partner).matrix()) < 1e-9);
    }

    #[test]
    fn left_inverse_for_every_representation(r in rotation()) {
        for kind in RepKind::SO3 {
            let back = Representation::from_rotation(kind, &r).unwrap().to_rotation().unwrap();
            prop_assert!(chordal(&back, &r) < 1e-8, "{kind}");
        }
    }

    #[test]
    fn halfspace_map_is_idempotent(q in quat(), v in vec3(3.0 * PI), axis in unit3(), angle in -3.0 * PI..3.0 * PI) {
        for rep in [
            Representation::Quat(q),
            Representation::Exp(ExpCoord::new(v)),
            Representation::AxisAngle(AxisAngle::new(axis, angle)),
        ] {
            let once = halfspace_map(&rep).unwrap();
            prop_assert_eq!(halfspace_map(&once).unwrap(), once);
            let (a, b) = (rep.to_rotation().unwrap(), once.to_rotation().unwrap());
            prop_assert!(chordal(&a, &b) < 1e-9);
        }
    }

    #[test]
    fn sincos_angle_keeps_the_double_cover(axis in unit3(), alpha in -PI..PI) {
        let sc = angle_to_sincos(&Angle2D { alpha });
        let flipped = SinCos2D::new(sc.c, -sc.s).unwrap();
        let a = aa_to_matrix(&AxisAngle::new(axis, sincos_to_angle(&sc).alpha)).unwrap();
        let b = aa_to_matrix(&AxisAngle::new(-axis, sincos_to_angle(&flipped).alpha)).unwrap();
        prop_assert!(frob(a.matrix(), b.matrix()) < 1e-9);
    }

    #[test]
    fn chordal_sq_is_quadratic_along_segments(a in rotation(), b in rotation(), target in rotation()) {
        let tv = vec(target.matrix());
        let at = |t: f64| {
            let m = vec(a.matrix()) * (1.0 - t) + vec(b.matrix()) * t;
            Metric::ChordalSq.eval(m.as_slice(), tv.as_slice()).unwrap()
        };
        let (f0, fh, f1) = (at(0.0), at(0.5), at(1.0));
        let c2 = 2.0 * f1 - 4.0 * fh + 2.0 * f0;
        let c1 = f1 - f0 - c2;
        for t in [0.1, 0.3, 0.8, 1.7] {
            let fit = f0 + c1 * t + c2 * t * t;
            prop_assert!((at(t) - fit).abs() < 1e-9 * (1.0 + fit.abs()));
        }
        prop_assert!((f0 - chordal_sq(&a, &target)).abs() < 1e-12);
    }

    #[test]
    fn spring_energy_form(m in mat3(), r in rotation()) {
        let springs: f64 = (0..3).map(|i| (r.column(i) - m.column(i)).norm_squared()).sum();
        prop_assert!(((r.matrix() - m).norm_squared() - springs).abs() < 1e-12);
    }

    #[test]
    fn projections_are_idempotent(m in mat3()) {
        prop_assume!(m.determinant().abs() > 1e-3);
        let r = svd_plus(&m).unwrap();
        prop_assert!(frob(svd_plus(r.matrix()).unwrap().matrix(), r.matrix()) < 1e-9);
        let s = SixD::new(m.column(0).into(), m.column(1).into());
        prop_assume!(s.nu1.cross(&s.nu2).norm() > 1e-3);
        let g = gso(&s).unwrap();
        prop_assert!(frob(gso(&matrix_to_sixd(&g)).unwrap().matrix(), g.matrix()) < 1e-9);
    }

    #[test]
    fn svd_plus_is_left_equivariant(m in mat3(), q in rotation()) {
        prop_assume!(m.determinant().abs() > 1e-2);
        let lhs = svd_plus(&(q.matrix() * m)).unwrap();
        let rhs = q.compose(&svd_plus(&m).unwrap());
        prop_assert!(frob(lhs.matrix(), rhs.matrix()) < 1e-8);
    }

    #[test]
    fn gso_keeps_the_first_direction(a in vec3(2.0), b in vec3(2.0)) {
        prop_assume!(a.norm() > 1e-3 && a.cross(&b).norm() > 1e-3);
        let g = gso(&SixD::new(a, b)).unwrap();
        prop_assert!((g.column(0) - a / a.norm()).norm() < 1e-15);
    }

    #[test]
    fn rotation_losses_ignore_prediction_sign(q in prop::array::uniform4(-1.0..1.0f64), t in rotation(), u in quat()) {
        prop_assume!(q.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let neg: Vec<f64> = q.iter().map(|v| -v).collect();
        let target = Matrix::from_row_slice(1, 9, vec(t.matrix()).as_slice());
        let quat_target = Matrix::from_row_slice(1, 4, &u.as_array());
        let specs = [
            (LossSpec::on_rotation(Metric::Geodesic, Projection::QuatNormalize), &target),
            (LossSpec::on_rotation(Metric::Chordal, Projection::QuatNormalize), &target),
            (LossSpec::picked(Metric::L2, Picking::QuatPickI), &quat_target),
            (LossSpec::picked(Metric::CosineDist, Picking::QuatPickII), &quat_target),
        ];
        for (spec, tgt) in specs {
            let a = spec.eval(&Matrix::from_row_slice(1, 4, &q), tgt).unwrap();
            let b = spec.eval(&Matrix::from_row_slice(1, 4, &neg), tgt).unwrap();
            prop_assert!((a - b).abs() < 1e-12, "{spec}");
        }
    }

    #[test]
    fn svd_plus_loss_is_scale_invariant(m in mat3(), t in rotation(), c in 0.01..100.0f64) {
        prop_assume!(m.determinant().abs() > 1e-2);
        let target = Matrix::from_row_slice(1, 9, vec(t.matrix()).as_slice());
        let spec = LossSpec::on_rotation(Metric::ChordalSq, Projection::SvdPlus);
        let a = spec.eval(&Matrix::from_row_slice(1, 9, m.as_slice()), &target).unwrap();
        let b = spec.eval(&Matrix::from_row_slice(1, 9, (m * c).as_slice()), &target).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }
}
