//! Fitting a random Fourier series on SO(3) from different input encodings.
//!
//! The defaults are a shortened run; pass `full` for the complete
//! 400-epoch, 10-seed comparison (about half an hour on one core).

use rotkit::experiments::{fourier_experiment, median, FourierConfig, FourierRep};

fn main() -> rotkit::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let cfg = if full {
        FourierConfig {
            n_b: vec![1, 2, 3],
            reps: vec![FourierRep::Euler, FourierRep::Quat, FourierRep::QuatAug, FourierRep::SixD, FourierRep::NineD],
            ..FourierConfig::default()
        }
    } else {
        FourierConfig {
            n_b: vec![2],
            seeds: vec![0, 1, 2],
            hidden: vec![64, 64],
            epochs: 60,
            ..FourierConfig::default()
        }
    };
    let rows = fourier_experiment(&cfg)?;
    println!("{:>9} {:>12}", "rep", "median test RMSE");
    for rep in &cfg.reps {
        let v: Vec<f64> = rows.iter().filter(|r| r.rep == *rep).map(|r| r.rmse_test).collect();
        println!("{:>9} {:>12.4}", rep.tag(), median(&v));
    }
    Ok(())
}
