//! Training a network that outputs rotations, using the tape directly.
//!
//! The network maps exponential coordinates to a 9-D output projected with
//! SVD+, trained on the geodesic distance to the true rotation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotkit::learn::{train, Dataset, LossSpec, Matrix, Mlp, Projection, Tape, TrainConfig};
use rotkit::metrics::Metric;
use rotkit::repr::{RepKind, Representation};
use rotkit::so3::{sample_uniform, vec};

fn main() -> rotkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let make = |n: usize, rng: &mut ChaCha8Rng| -> rotkit::Result<Dataset> {
        let mut x = Matrix::zeros(n, 3);
        let mut y = Matrix::zeros(n, 9);
        for i in 0..n {
            let r = sample_uniform(rng);
            let e = Representation::from_rotation(RepKind::Exp, &r)?.to_vector();
            x.row_mut(i).copy_from_slice(&e);
            y.row_mut(i).copy_from_slice(vec(r.matrix()).as_slice());
        }
        Dataset::new(x, y)
    };
    let (tr, va) = (make(1000, &mut rng)?, make(200, &mut rng)?);

    let spec = LossSpec::on_rotation(Metric::Geodesic, Projection::SvdPlus);
    spec.validate(Some(RepKind::NineD), 9)?;
    let mut model = Mlp::new(&[3, 64, 64, 9], "nined", 1)?;
    let hist = train(&mut model, &tr, &va, &spec, &TrainConfig::adam(1e-3, 32, 40, 5, 2))?;
    for (e, v) in hist.val_loss.iter().enumerate().step_by(5) {
        println!("epoch {e:>3}: validation geodesic {v:.4} rad");
    }
    println!("best epoch {} with {:.4} rad", hist.best_epoch, hist.best_val());

    // one manual forward/backward pass on the tape
    let mut tape = Tape::new();
    let x = tape.leaf(va.x.rows(0, 4).into_owned());
    let fwd = model.forward(&mut tape, x)?;
    let loss = spec.apply(&mut tape, fwd.output, &va.y.rows(0, 4).into_owned())?;
    let grads = tape.backward(loss)?;
    let (w0, _) = fwd.params[0];
    println!("\nbatch loss {:.4}, |dL/dW0| = {:.4}", tape.value(loss)[(0, 0)], grads.get(w0).map_or(0.0, |g| g.norm()));
    Ok(())
}
