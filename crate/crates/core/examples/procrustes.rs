//! Projecting noisy matrices onto SO(3) with SVD+ and Gram-Schmidt.

use nalgebra::Matrix3x2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotkit::metrics::chordal;
use rotkit::projections::{gso, svd3, svd_plus, svd_plus_vjp, weighted_procrustes};
use rotkit::repr::SixD;
use rotkit::so3::{sample_uniform, Mat3};

fn main() -> rotkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = sample_uniform(&mut rng);
    let noisy = r.matrix() + Mat3::from_fn(|_, _| rng.random_range(-0.2..0.2));

    let f = svd3(&noisy)?;
    println!("singular values {:.4?}", f.sigma.as_slice());
    let p = svd_plus(&noisy)?;
    let s = gso(&SixD::new(noisy.column(0).into(), noisy.column(1).into()))?;
    println!("chordal error: svd+ {:.4}, gso {:.4}", chordal(&p, &r), chordal(&s, &r));

    // SVD+ is the closest rotation; GSO is the (1, eps, 0)-weighted limit
    let m = Matrix3x2::from_columns(&[noisy.column(0), noisy.column(1)]);
    for eps in [1.0, 1e-2, 1e-4, 1e-6] {
        let w = weighted_procrustes(&m, [1.0, eps, 0.0])?;
        println!("weights (1, {eps:.0e}, 0): distance to gso {:.2e}", chordal(&w.rotation, &s));
    }

    // gradient of ||svd+(M) - I||^2 / 2 with respect to M
    let cot = p.matrix() - Mat3::identity();
    let (g, flags) = svd_plus_vjp(&noisy, &cot)?;
    println!("\nd loss / dM =\n{g:.4}flags {flags:?}");
    Ok(())
}
