//! Rotation regression from point correspondences with several output heads.
//!
//! Shortened by default; pass `full` for 10 seeds at the default sizes.

use rotkit::experiments::{median, toy_rotation_estimation, ToyConfig};

fn main() -> rotkit::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let cfg = if full {
        ToyConfig::default()
    } else {
        ToyConfig {
            seeds: vec![0, 1],
            sizes: (1000, 250, 250),
            epochs: 30,
            ..ToyConfig::default()
        }
    };
    let rows = toy_rotation_estimation(&cfg)?;
    println!("{:>22} {:>14} {:>14}", "head", "geodesic (rad)", "chordal");
    for h in &cfg.heads {
        let pick = |f: fn(&rotkit::experiments::ToyRow) -> f64| {
            median(&rows.iter().filter(|r| r.head == *h).map(f).collect::<Vec<_>>())
        };
        println!("{:>22} {:>14.4} {:>14.4}", h.to_string(), pick(|r| r.geodesic_med), pick(|r| r.chordal_med));
    }
    Ok(())
}
