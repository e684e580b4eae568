//! Negative-gradient fields of planar distances around (1, 0), as SVG.
//!
//! `cargo run --example distance_field -- out_dir`

use std::path::PathBuf;

use rotkit::experiments::{distance_field_export, Table};
use rotkit::metrics::Metric;
use rotkit::plot::{render, PlotKind};

fn main() -> rotkit::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let metrics = [Metric::L2, Metric::SquaredL2, Metric::L1, Metric::CosineDist, Metric::AngularDist];
    for f in distance_field_export(&metrics, 15, Some(&dir))? {
        let table = Table::parse(&f.csv()).expect("field CSV is well formed");
        let svg = dir.join(format!("field_{}.svg", f.metric.tag()));
        std::fs::write(&svg, render(PlotKind::VecField, &table)?)?;
        let undefined = f.points.iter().filter(|p| !p.defined).count();
        println!("{:>8}: {} ({undefined} undefined points)", f.metric.tag(), svg.display());
    }
    Ok(())
}
