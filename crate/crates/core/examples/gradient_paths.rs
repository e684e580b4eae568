//! Gradient descent towards the identity through GSO and SVD+.

use rotkit::experiments::{gradient_paths, median, Orthogonalizer, PathConfig, PathInit};

fn main() -> rotkit::Result<()> {
    for proj in [Orthogonalizer::Gso, Orthogonalizer::SvdPlus] {
        let runs = gradient_paths(&PathConfig::new(proj, 50, 0))?;
        let reached = runs.iter().filter(|r| r.reached(1e-2)).count();
        let last: Vec<f64> = runs.iter().map(|r| *r.loss.last().unwrap()).collect();
        println!("{proj:>8}: {reached}/50 runs reach loss < 1e-2, median final loss {:.2e}", median(&last));
    }

    let mut cfg = PathConfig::new(Orthogonalizer::Gso, 3, 1);
    cfg.init = PathInit::Parallel(2.0);
    for run in gradient_paths(&cfg)? {
        println!("gso from parallel columns: unstable={} ({})", run.unstable, run.reason.unwrap_or_default());
    }
    Ok(())
}
