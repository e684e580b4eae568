//! Distances between rotations and between their representations.

use rotkit::metrics::{chordal, geodesic, quat_pick_i, quat_pick_ii, Metric};
use rotkit::repr::{matrix_to_quat, RepKind, Representation};
use rotkit::so3::{exp_so3, RotationMatrix, Vec3};

fn main() -> rotkit::Result<()> {
    let a = RotationMatrix::identity();
    let b = RotationMatrix::about_z(std::f64::consts::PI);
    println!("chordal(I, Rz(pi))  = {:.12} (2*sqrt 2 = {:.12})", chordal(&a, &b), 2.0 * 2f64.sqrt());
    println!("geodesic(I, Rz(pi)) = {:.12}", geodesic(&a, &b));

    // two rotations 0.02 rad apart on either side of the quaternion half-space boundary
    let axis = Vec3::new(1.0, 2.0, 2.0).normalize();
    let r1 = exp_so3(&(axis * (std::f64::consts::PI - 0.01)));
    let r2 = exp_so3(&(axis * -(std::f64::consts::PI - 0.01)));
    let (q1, q2) = (matrix_to_quat(&r1), matrix_to_quat(&r2));
    println!("\ngeodesic(R1, R2) = {:.4}", geodesic(&r1, &r2));
    println!("plain l2 on canonical quats = {:.4}", Metric::L2.eval(&q1.as_array(), &q2.as_array())?);
    println!("quat_pick_1 = {:.4}, quat_pick_2 = {:.2e}", quat_pick_i(&q1, &q2), quat_pick_ii(&q1, &q2));

    println!("\nall metrics on the two quaternions:");
    for m in Metric::ALL.into_iter().filter(|m| !m.on_rotations() && m.arity().is_none_or(|n| n == 4)) {
        println!("{:>12} {:.6}", m.tag(), m.eval(&q1.as_array(), &q2.as_array())?);
    }
    let e1 = Representation::from_rotation(RepKind::Euler, &r1)?.to_vector();
    let e2 = Representation::from_rotation(RepKind::Euler, &r2)?.to_vector();
    println!("{:>12} {:.6}", "euler_pick", Metric::EulerPick.eval(&e1, &e2)?);
    Ok(())
}
