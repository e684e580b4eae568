//! The `rotkit` command line.
//!
//! ```text
//! rotkit convert  --in rots.csv --from quat --to euler [--out out.csv]
//! rotkit distance --in pairs.csv --metric geodesic [--out d.csv]
//! rotkit run <experiment> [--config file] [--out dir] [--key value ...]
//! rotkit plot     --in lipschitz.csv --kind scatter [--out fig.svg]
//! rotkit bench    [--batches 1,32] [--reps 100] [--warmup 10]
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.
//!
//! Config files hold `key = value` lines with `#` comments. A key applies
//! to every experiment, `exp.key` only to `exp`; command-line flags win
//! over both. List values are comma separated, and `a..b` expands to the
//! integers `a` through `b − 1`.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::experiments::{self as ex, Meta, Orthogonalizer, Table};
use crate::metrics::Metric;
use crate::plot::{render, PlotKind};
use crate::repr::{io, RepKind, Representation};
use crate::so3::vec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Environment variable overriding the default output directory.
pub const OUT_ENV: &str = "ROTKIT_OUT";

pub const EXPERIMENTS: [&str; 7] = ["lipschitz", "gradpaths", "gradratio", "fourier", "toyest", "field", "bench"];

#[derive(Debug, Parser)]
#[command(name = "rotkit", version, about = "Rotation representations, metrics and projections")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a representation CSV to another representation.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distances between the two operands of each row of a paired CSV.
    Distance {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and write `<experiment>.csv` and `.meta`.
    Run {
        experiment: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Experiment parameters as `--key value` pairs.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// Render an experiment CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the projections; shorthand for `run bench`.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Unsupported { .. } => EXIT_CONFIG,
        Error::Numerical(_) | Error::NonFiniteLoss { .. } | Error::Singular(_) => EXIT_NUMERICAL,
        Error::InvalidRotation { .. }
        | Error::NotSkew { .. }
        | Error::NotUnit { .. }
        | Error::NonCanonical(_)
        | Error::ZeroLength
        | Error::Shape { .. }
        | Error::Parse { .. }
        | Error::Io(_) => EXIT_DATA,
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn main_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Convert { input, from, to, out: dst } => {
            let from: RepKind = from.parse()?;
            let to: RepKind = to.parse()?;
            let text = cmd_convert(&std::fs::read_to_string(&input)?, from, to)?;
            emit(&text, dst.as_deref(), out)
        }
        Command::Distance { input, metric, out: dst } => {
            let metric: Metric = metric.parse()?;
            let text = cmd_distance(&std::fs::read_to_string(&input)?, metric)?;
            emit(&text, dst.as_deref(), out)
        }
        Command::Run { experiment, config, params } => {
            let dir = cmd_run(&experiment, config.as_deref(), &params)?;
            let _ = writeln!(out, "wrote {experiment} outputs to {}", dir.display());
            Ok(())
        }
        Command::Plot { input, kind, out: dst } => {
            let kind: PlotKind = kind.parse()?;
            let svg = cmd_plot(&std::fs::read_to_string(&input)?, kind)?;
            emit(&svg, dst.as_deref(), out)
        }
        Command::Bench { config, params } => {
            let dir = cmd_run("bench", config.as_deref(), &params)?;
            let _ = writeln!(out, "wrote bench outputs to {}", dir.display());
            Ok(())
        }
    }
}

fn emit(text: &str, dst: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match dst {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn row_error(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line,
            msg: other.to_string(),
        },
    }
}

/// `g_to(f_from(row))` for every row of a representation CSV.
pub fn cmd_convert(text: &str, from: RepKind, to: RepKind) -> Result<String> {
    let table = if text.trim().is_empty() {
        io::RepTable { kind: from, rows: Vec::new() }
    } else {
        io::parse(text, 1)?
    };
    if table.kind != from {
        return Err(Error::Parse {
            line: 1,
            msg: format!("file holds {} but --from says {from}", table.kind),
        });
    }
    let rows = table
        .rows
        .iter()
        .map(|(line, v)| {
            Representation::from_slice(from, v)
                .and_then(|r| r.to_rotation())
                .and_then(|r| Representation::from_rotation(to, &r))
                .map(|r| r.to_vector())
                .map_err(|e| row_error(*line, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(io::write_rows(to, &rows))
}

/// One distance per row of a paired representation CSV. Rotation metrics
/// compare the rotations the operands stand for; the others compare the
/// raw vectors.
pub fn cmd_distance(text: &str, metric: Metric) -> Result<String> {
    let table = io::parse(text, 2)?;
    let d = table.kind.dim();
    let mut csv = String::from("distance\n");
    for (line, v) in &table.rows {
        let (a, b) = v.split_at(d);
        let value = if metric.on_rotations() {
            let rot = |x: &[f64]| {
                Representation::from_slice(table.kind, x)
                    .and_then(|r| r.to_rotation())
                    .map(|r| vec(r.matrix()).as_slice().to_vec())
            };
            let (ra, rb) = (rot(a).map_err(|e| row_error(*line, e))?, rot(b).map_err(|e| row_error(*line, e))?);
            metric.eval(&ra, &rb)
        } else {
            metric.eval(a, b)
        }
        .map_err(|e| row_error(*line, e))?;
        csv.push_str(&io::fmt_f64(value));
        csv.push('\n');
    }
    Ok(csv)
}

pub fn cmd_plot(text: &str, kind: PlotKind) -> Result<String> {
    let table = if text.trim().is_empty() {
        Table::new(&[])
    } else {
        Table::parse(text).ok_or_else(|| Error::Parse {
            line: 0,
            msg: "rows do not match the header width".into(),
        })?
    };
    if table.header.is_empty() {
        let mut t = Table::new(&[]);
        t.header = fallback_header(kind);
        return render(kind, &t);
    }
    render(kind, &table)
}

fn fallback_header(kind: PlotKind) -> Vec<String> {
    let h: &[&str] = match kind {
        PlotKind::Scatter => &["rep", "d_so3", "d_repr"],
        PlotKind::Density => &["projection", "ratio_pair", "ratio"],
        PlotKind::VecField => &["y1", "y2", "gx", "gy", "defined"],
        PlotKind::Paths => &["run", "iter", "vector", "comp_x", "comp_y", "comp_z", "loss"],
    };
    h.iter().map(|s| s.to_string()).collect()
}

// ---------------------------------------------------------------------------
// configuration

/// Resolved `key = value` parameters of one experiment.
///
/// Getters record problems instead of failing so that every error can be
/// listed at once by [`Params::finish`].
pub struct Params {
    exp: String,
    values: BTreeMap<String, (String, &'static str)>,
    used: Vec<String>,
    errors: Vec<String>,
    resolved: Vec<(String, String)>,
}

impl Params {
    /// Merges a config file and `--key value` flags for experiment `exp`.
    pub fn new(exp: &str, file: Option<&str>, flags: &[String]) -> Self {
        let mut p = Params {
            exp: exp.to_string(),
            values: BTreeMap::new(),
            used: Vec::new(),
            errors: Vec::new(),
            resolved: Vec::new(),
        };
        if let Some(text) = file {
            let mut scoped = Vec::new();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let Some((k, v)) = line.split_once('=') else {
                    p.errors.push(format!("config line {}: expected `key = value`", i + 1));
                    continue;
                };
                let key = k.trim().replace('-', "_");
                let value = v.trim().to_string();
                match key.split_once('.') {
                    Some((e, k)) if e == exp => scoped.push((k.to_string(), value)),
                    Some((e, _)) if EXPERIMENTS.contains(&e) => {}
                    Some(_) => p.errors.push(format!("config line {}: unknown section in `{key}`", i + 1)),
                    None => {
                        p.values.insert(key, (value, "file"));
                    }
                }
            }
            for (k, v) in scoped {
                p.values.insert(k, (v, "file"));
            }
        }
        let mut i = 0;
        while i < flags.len() {
            let f = &flags[i];
            let Some(name) = f.strip_prefix("--") else {
                p.errors.push(format!("unexpected argument `{f}`; parameters are `--key value`"));
                i += 1;
                continue;
            };
            let (key, value) = match name.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => match flags.get(i + 1) {
                    Some(v) if !v.starts_with("--") => {
                        i += 1;
                        (name.to_string(), v.clone())
                    }
                    _ => (name.to_string(), "true".to_string()),
                },
            };
            p.values.insert(key.replace('-', "_"), (value, "flag"));
            i += 1;
        }
        p
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.used.push(key.to_string());
        self.values.get(key).map(|(v, _)| v.clone())
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((key.to_string(), value));
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, default: T) -> T
    where
        T::Err: Display,
    {
        let v = match self.take(key) {
            None => default,
            Some(s) => match s.parse::<T>() {
                Ok(v) => v,
                Err(e) => {
                    self.errors.push(format!("{key} = `{s}`: {e}"));
                    default
                }
            },
        };
        self.record(key, v.to_string());
        v
    }

    pub fn list<T: FromStr + Display + Clone>(&mut self, key: &str, default: &[T]) -> Vec<T>
    where
        T::Err: Display,
    {
        let out = match self.take(key) {
            None => default.to_vec(),
            Some(s) => match parse_list::<T>(&s) {
                Ok(v) => v,
                Err(e) => {
                    self.errors.push(format!("{key} = `{s}`: {e}"));
                    default.to_vec()
                }
            },
        };
        let text: Vec<String> = out.iter().map(|v| v.to_string()).collect();
        self.record(key, text.join(","));
        out
    }

    /// Raw string value, without recording it in the resolved config.
    pub fn raw(&mut self, key: &str) -> Option<String> {
        self.take(key)
    }

    /// Fails with every collected problem, including unknown keys.
    pub fn finish(&mut self) -> Result<()> {
        for k in self.values.keys() {
            if !self.used.contains(k) {
                let src = self.values[k].1;
                self.errors.push(format!("unknown {} key `{k}` for experiment {}", src, self.exp));
            }
        }
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(std::mem::take(&mut self.errors)))
        }
    }

    pub fn resolved(&self) -> &[(String, String)] {
        &self.resolved
    }
}

/// `1,2,3`, `0..4` or a mix such as `1,5..7`.
pub fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: Display,
{
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|e| format!("range start `{a}`: {e}"))?;
            let b: i64 = b.trim().parse().map_err(|e| format!("range end `{b}`: {e}"))?;
            if b < a {
                return Err(format!("empty range {part}"));
            }
            for i in a..b {
                out.push(i.to_string().parse::<T>().map_err(|e| format!("`{i}`: {e}"))?);
            }
        } else {
            out.push(part.parse::<T>().map_err(|e| format!("`{part}`: {e}"))?);
        }
    }
    Ok(out)
}

/// Output directory: `--out`/`out =`, then `$ROTKIT_OUT`, then `./out`.
fn output_dir(p: &mut Params) -> PathBuf {
    match p.raw("out") {
        Some(o) => PathBuf::from(o),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
    }
}

/// Runs experiment `exp` and returns the directory written to.
pub fn cmd_run(exp: &str, config: Option<&Path>, flags: &[String]) -> Result<PathBuf> {
    if !EXPERIMENTS.contains(&exp) {
        return Err(Error::Config(vec![format!(
            "unknown experiment `{exp}` (one of {})",
            EXPERIMENTS.join(", ")
        )]));
    }
    let file = match config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            Error::Config(vec![format!("cannot read config {}: {e}", path.display())])
        })?),
        None => None,
    };
    let mut p = Params::new(exp, file.as_deref(), flags);
    let dir = output_dir(&mut p);
    let svg = p.get("svg", false);
    let job = plan(exp, &mut p)?;
    p.finish()?;
    let mut meta = Meta::new(exp);
    for (k, v) in p.resolved() {
        meta.set(k, v);
    }
    let (table, plot) = job.execute(&mut meta, &dir)?;
    ex::write_outputs(&dir, exp, &table, &meta)?;
    if svg {
        if let Some(kind) = plot {
            std::fs::write(dir.join(format!("{exp}.svg")), render(kind, &table)?)?;
        }
    }
    Ok(dir)
}

enum Job {
    Lipschitz { reps: Vec<RepKind>, pairs: usize, seed: u64 },
    GradPaths(Vec<ex::PathConfig>),
    GradRatio { n: usize, half: f64, seed: u64 },
    Fourier(ex::FourierConfig),
    Toy(ex::ToyConfig),
    Field { metrics: Vec<Metric>, n: usize },
    Bench { batches: Vec<usize>, reps: usize, warmup: usize, seed: u64 },
}

fn plan(exp: &str, p: &mut Params) -> Result<Job> {
    let seed: u64 = p.get("seed", 0);
    Ok(match exp {
        "lipschitz" => {
            let reps = p.list("rep", &[RepKind::Quat]);
            Job::Lipschitz {
                reps,
                pairs: p.get("pairs", 10_000),
                seed,
            }
        }
        "gradpaths" => {
            let projections = p.list("projection", &[Orthogonalizer::Gso, Orthogonalizer::SvdPlus]);
            let runs = p.get("runs", 50);
            let iters = p.get("iters", 150);
            let lr = p.get("lr", 0.05);
            let momentum = p.get("momentum", 0.9);
            let half = p.get("box", 2.0);
            let init: String = p.get("init", "uniform".to_string());
            let init = match init.as_str() {
                "uniform" => ex::PathInit::Uniform(half),
                "parallel" => ex::PathInit::Parallel(half),
                other => {
                    p.errors.push(format!("init = `{other}`: expected uniform or parallel"));
                    ex::PathInit::Uniform(half)
                }
            };
            Job::GradPaths(
                projections
                    .into_iter()
                    .map(|projection| ex::PathConfig {
                        projection,
                        runs,
                        iters,
                        lr,
                        momentum,
                        seed,
                        init: init.clone(),
                    })
                    .collect(),
            )
        }
        "gradratio" => Job::GradRatio {
            n: p.get("n", 20_000),
            half: p.get("box", 2.0),
            seed,
        },
        "fourier" => {
            let d = ex::FourierConfig::default();
            let n_b = p.list("nb", &d.n_b);
            let reps = p.list("reps", &d.reps);
            let seeds = p.list("seeds", &d.seeds);
            let sizes = (p.get("train", d.sizes.0), p.get("val", d.sizes.1), p.get("test", d.sizes.2));
            Job::Fourier(ex::FourierConfig {
                n_b,
                reps,
                seeds,
                sizes,
                hidden: p.list("hidden", &d.hidden),
                epochs: p.get("epochs", d.epochs),
                lr: p.get("lr", d.lr),
                batch_size: p.get("batch", d.batch_size),
            })
        }
        "toyest" => {
            let d = ex::ToyConfig::default();
            let heads = p.list("heads", &d.heads);
            let seeds = p.list("seeds", &d.seeds);
            let sizes = (p.get("train", d.sizes.0), p.get("val", d.sizes.1), p.get("test", d.sizes.2));
            Job::Toy(ex::ToyConfig {
                heads,
                seeds,
                n_points: p.get("points", d.n_points),
                noise: p.get("noise", d.noise),
                sizes,
                hidden: p.list("hidden", &d.hidden),
                epochs: p.get("epochs", d.epochs),
                patience: p.get("patience", d.patience),
                lr: p.get("lr", d.lr),
                batch_size: p.get("batch", d.batch_size),
            })
        }
        "field" => Job::Field {
            metrics: p.list(
                "metrics",
                &[Metric::L2, Metric::SquaredL2, Metric::L1, Metric::CosineDist, Metric::AngularDist],
            ),
            n: p.get("n", 21),
        },
        "bench" => Job::Bench {
            batches: p.list("batches", &ex::BENCH_BATCHES),
            reps: p.get("reps", 100),
            warmup: p.get("warmup", 10),
            seed,
        },
        _ => unreachable!("experiment names are checked by cmd_run"),
    })
}

impl Job {
    fn execute(self, meta: &mut Meta, dir: &Path) -> Result<(Table, Option<PlotKind>)> {
        Ok(match self {
            Job::Lipschitz { reps, pairs, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut table = Table::new(&["rep", "d_so3", "d_repr"]);
                for kind in reps {
                    let scan = ex::lipschitz_scan(kind, pairs, &mut rng)?;
                    meta.set(&format!("max_ratio.{kind}"), io::fmt_f64(scan.max_ratio()));
                    meta.set(
                        &format!("strata.{kind}"),
                        format!("uniform={} local={} boundary={}", scan.strata[0], scan.strata[1], scan.strata[2]),
                    );
                    table.rows.extend(scan.table().rows);
                }
                (table, Some(PlotKind::Scatter))
            }
            Job::GradPaths(cfgs) => {
                let mut table = Table::new(&["run", "iter", "vector", "comp_x", "comp_y", "comp_z", "loss"]);
                meta.set("note", "per-run iteration rows for each projection, gso first");
                for cfg in cfgs {
                    let runs = ex::gradient_paths(&cfg)?;
                    let tag = cfg.projection.tag();
                    meta.set(&format!("reached_1e-2.{tag}"), runs.iter().filter(|r| r.reached(1e-2)).count());
                    meta.set(&format!("unstable.{tag}"), runs.iter().filter(|r| r.unstable).count());
                    let mut t = ex::paths_table(cfg.projection, &runs);
                    // disambiguate runs of the two projections
                    for row in &mut t.rows {
                        row[0] = format!("{tag}-{}", row[0]);
                    }
                    table.rows.extend(t.rows);
                }
                (table, Some(PlotKind::Paths))
            }
            Job::GradRatio { n, half, seed } => {
                let s = ex::gradient_ratio_density(n, half, seed)?;
                meta.set("skipped.gso", s.skipped[0]);
                meta.set("skipped.svd_plus", s.skipped[1]);
                meta.set("median_abs_log.gso", io::fmt_f64(s.median_abs_log(Orthogonalizer::Gso)));
                meta.set("median_abs_log.svd_plus", io::fmt_f64(s.median_abs_log(Orthogonalizer::SvdPlus)));
                (s.table(), Some(PlotKind::Density))
            }
            Job::Fourier(cfg) => (ex::fourier_table(&ex::fourier_experiment(&cfg)?), None),
            Job::Toy(cfg) => {
                meta.set("model", "MLP on flattened ordered point pairs (substitute for a point-set network)");
                (ex::toy_table(&ex::toy_rotation_estimation(&cfg)?), None)
            }
            Job::Field { metrics, n } => {
                let fields = ex::distance_field_export(&metrics, n, Some(dir))?;
                let mut table = Table::new(&["metric", "file", "points", "undefined"]);
                for f in &fields {
                    let undefined = f.points.iter().filter(|p| !p.defined).count();
                    table.push(vec![
                        f.metric.tag().into(),
                        f.file_name(),
                        f.points.len().to_string(),
                        undefined.to_string(),
                    ]);
                }
                meta.set("target", "1,0");
                (table, None)
            }
            Job::Bench { batches, reps, warmup, seed } => {
                let rows = ex::bench_projections(&batches, reps, warmup, seed)?;
                meta.set("note", "timings are host-dependent");
                (ex::bench_table(&rows), None)
            }
        })
    }
}
