//! Balance of the gradients reaching each column of the raw output.

use rotkit::experiments::{gradient_ratio_density, Orthogonalizer};

fn main() -> rotkit::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20_000);
    let s = gradient_ratio_density(n, 2.0, 0)?;
    for (i, proj) in [Orthogonalizer::Gso, Orthogonalizer::SvdPlus].into_iter().enumerate() {
        println!(
            "{proj:>8}: median |ln ratio| = {:.4}  ({} skipped)",
            s.median_abs_log(proj),
            s.skipped[i]
        );
    }
    Ok(())
}
