//! How far representations jump for nearby rotations.
//!
//! `cargo run --example lipschitz_scan -- 10000`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotkit::experiments::lipschitz_scan;
use rotkit::repr::RepKind;

fn main() -> rotkit::Result<()> {
    let pairs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!("{:>10} {:>10} {:>16} {:>10}", "rep", "width", "max jump (d<0.1)", "max ratio");
    for kind in RepKind::SO3 {
        let scan = lipschitz_scan(kind, pairs, &mut rng)?;
        let jump = scan.rows.iter().filter(|r| r.d_so3 < 0.1).map(|r| r.d_repr).fold(0.0, f64::max);
        let width = kind.width().map_or("-".to_string(), |w| format!("{w:.3}"));
        println!("{:>10} {width:>10} {jump:>16.3} {:>10.2}", kind.tag(), scan.max_ratio());
    }
    Ok(())
}
