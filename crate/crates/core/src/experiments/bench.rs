//! Forward-pass timings of the two projections.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gradients::Orthogonalizer;
use super::{median, num, Table};
use crate::error::{Error, Result};
use crate::projections::{gso, svd_plus};
use crate::repr::SixD;
use crate::so3::{unvec, Vec3};

pub const BENCH_BATCHES: [usize; 4] = [1, 32, 256, 1024];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub op: Orthogonalizer,
    pub batch: usize,
    pub median_ms: f64,
}

pub fn bench_table(rows: &[BenchRow]) -> Table {
    let mut t = Table::new(&["op", "batch", "median_ms"]);
    for r in rows {
        t.push(vec![r.op.tag().into(), r.batch.to_string(), num(r.median_ms)]);
    }
    t
}

fn forward(op: Orthogonalizer, inputs: &[Vec<f64>]) -> Result<()> {
    for r in inputs {
        match op {
            Orthogonalizer::Gso => {
                black_box(gso(&SixD::new(Vec3::from_column_slice(&r[..3]), Vec3::from_column_slice(&r[3..6])))?);
            }
            Orthogonalizer::SvdPlus => {
                black_box(svd_plus(&unvec(r))?);
            }
        }
    }
    Ok(())
}

/// Median wall time of one forward pass over a batch, per projection and
/// batch size. Warmup passes are not timed. Timings are host-dependent and
/// are the only non-deterministic output of the crate.
pub fn bench_projections(batches: &[usize], repetitions: usize, warmup: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if repetitions == 0 {
        return Err(Error::Config(vec!["bench needs at least one repetition".into()]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for op in [Orthogonalizer::Gso, Orthogonalizer::SvdPlus] {
        for &batch in batches {
            let inputs: Vec<Vec<f64>> =
                (0..batch).map(|_| (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            for _ in 0..warmup {
                forward(op, &inputs)?;
            }
            let times: Vec<f64> = (0..repetitions)
                .map(|_| {
                    let t0 = Instant::now();
                    forward(op, &inputs).map(|_| t0.elapsed().as_secs_f64() * 1e3)
                })
                .collect::<Result<_>>()?;
            rows.push(BenchRow {
                op,
                batch,
                median_ms: median(&times),
            });
        }
    }
    Ok(rows)
}
