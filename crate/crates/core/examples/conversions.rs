//! Every representation of one random rotation, and the round trip back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotkit::metrics::chordal;
use rotkit::repr::{double_cover_partner, RepKind, Representation};
use rotkit::so3::sample_uniform;

fn main() -> rotkit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r = sample_uniform(&mut rng);
    println!("R =\n{}", r.matrix());

    for kind in RepKind::SO3 {
        let g = Representation::from_rotation(kind, &r)?;
        let back = g.to_rotation()?;
        let v: Vec<String> = g.to_vector().iter().map(|x| format!("{x:+.4}")).collect();
        println!("{:>10}  [{}]  round trip {:.1e}", kind.tag(), v.join(", "), chordal(&back, &r));
    }

    // q and −q describe the same rotation
    let q = Representation::from_rotation(RepKind::Quat, &r)?;
    let partner = double_cover_partner(&q)?;
    println!("\nquat partner {:?}", partner.to_vector());
    println!("same rotation: {:.1e}", chordal(&partner.to_rotation()?, &r));
    Ok(())
}
