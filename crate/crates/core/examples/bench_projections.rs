//! Forward-pass cost of GSO against SVD+.

use rotkit::experiments::{bench_projections, Orthogonalizer, BENCH_BATCHES};

fn main() -> rotkit::Result<()> {
    let rows = bench_projections(&BENCH_BATCHES, 50, 5, 0)?;
    println!("{:>6} {:>12} {:>12} {:>7}", "batch", "gso ms", "svd+ ms", "ratio");
    for &b in &BENCH_BATCHES {
        let t = |op| rows.iter().find(|r| r.op == op && r.batch == b).map(|r| r.median_ms).unwrap_or(f64::NAN);
        let (g, s) = (t(Orthogonalizer::Gso), t(Orthogonalizer::SvdPlus));
        println!("{b:>6} {g:>12.4} {s:>12.4} {:>7.1}", s / g);
    }
    Ok(())
}
