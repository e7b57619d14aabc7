use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use qkmm_core::noise::{NoiseParams, NoiseSource};
use rayon::prelude::*;

use crate::config::{parse_file, ExperimentConfig, MatrixSource, Method, OutputFormat, TaskKind, DENSITY_QUBIT_CAP};
use crate::error::{BenchError, Result};
use crate::gatecount::{gate_row, GateRow};
use crate::output::{write_records, write_summary};
use crate::plots::emit_plots;
use crate::runner::{run_point, FileInputs, Point, Row};

#[derive(Debug, Parser)]
#[command(name = "qkmm", version, about = "Quantum-kernel matrix multiplication benchmarks")]
struct Cli {
    /// Only report errors and warnings.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (TOML or JSON); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated dimensions, each a power of two.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise parameters (TOML or JSON).
    #[arg(long)]
    noise_config: Option<PathBuf>,
    /// Enabled noise sources: comma-separated T1,T2,GATE or `none`.
    #[arg(long)]
    sources: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Use exact probabilities instead of sampled shots.
    #[arg(long)]
    exact: bool,
    /// Elementwise accuracy bound.
    #[arg(long)]
    bound: Option<f64>,
    /// Rescale file inputs instead of rejecting unnormalized rows.
    #[arg(long)]
    auto_normalize: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one task over a dimension sweep.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        task: Option<TaskKind>,
        #[arg(long)]
        input_a: Option<PathBuf>,
        #[arg(long)]
        input_b: Option<PathBuf>,
        /// Bank sizes K for mmm.
        #[arg(long, value_delimiter = ',')]
        parallel: Option<Vec<usize>>,
        /// Read |A·B_k| instead of |A·B_kᵀ| for mmm.
        #[arg(long)]
        as_product: bool,
    },
    /// Time QKMM against Swap-Test and Hadamard-Test stacks.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        task: Option<TaskKind>,
        #[arg(long, value_enum, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
    },
    /// Fidelity and error under each noise-source subset.
    NoiseSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        task: Option<TaskKind>,
    },
    /// M-MM time and gates per product as the bank grows.
    MmmSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        parallel: Option<Vec<usize>>,
    },
    /// Closed-form and counted gate totals.
    Gatecount {
        #[command(flatten)]
        common: Common,
    },
    /// Write plot specs and a plotting script for a results directory.
    Plots {
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

fn parse_sources(text: &str) -> Result<Vec<NoiseSource>> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("none") || text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|s| NoiseSource::from_str(s.trim()).map_err(|e| BenchError::Usage(e.to_string())))
        .collect()
}

struct Defaults {
    task: Option<TaskKind>,
    dims: Option<Vec<usize>>,
    parallel: Option<Vec<usize>>,
}

fn resolve(common: Common, defaults: Defaults) -> Result<(ExperimentConfig, Option<Vec<NoiseSource>>)> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let mut c = ExperimentConfig::default();
            if let Some(t) = defaults.task {
                c.task = t;
            }
            if let Some(d) = defaults.dims {
                c.dims = d;
            }
            if let Some(p) = defaults.parallel {
                c.parallel_counts = p;
            }
            c
        }
    };
    if let Some(d) = common.dims {
        cfg.dims = d;
    }
    if let Some(s) = common.shots {
        cfg.shots = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = common.out {
        cfg.output_dir = o;
    }
    if let Some(f) = common.format {
        cfg.format = f;
    }
    if let Some(b) = common.bound {
        cfg.bound = b;
    }
    cfg.exact |= common.exact;
    cfg.auto_normalize |= common.auto_normalize;
    if let Some(path) = &common.noise_config {
        cfg.noise = Some(parse_file::<NoiseParams>(path)?);
    }
    let sources = common.sources.as_deref().map(parse_sources).transpose()?;
    Ok((cfg, sources))
}

#[derive(Clone, Copy)]
struct Console {
    quiet: bool,
}

impl Console {
    fn say(self, line: impl std::fmt::Display) {
        if !self.quiet {
            println!("{line}");
        }
    }

    fn wrote(self, path: &std::path::Path) {
        self.say(format_args!("wrote {}", path.display()));
    }
}

fn finish(con: Console, cfg: &ExperimentConfig, command: &str, stem: &str, rows: &[Row]) -> Result<()> {
    for row in rows {
        con.say(format_args!(
            "{:<8} {:<9} {:<11} N={:<5} K={:<3} trial={:<3} fidelity={:.6} mean_error={:.3e} pass_rate={:.3}",
            row.task, row.method, row.sources, row.dim, row.parallel, row.trial, row.fidelity, row.mean_error, row.pass_rate
        ));
    }
    con.wrote(&write_records(&cfg.output_dir, stem, "results", rows, cfg.format)?);
    con.wrote(&write_summary(&cfg.output_dir, stem, command, cfg, rows)?);
    Ok(())
}

fn method_for(task: TaskKind) -> Method {
    match task {
        TaskKind::Swap => Method::Swap,
        TaskKind::Hadamard => Method::Hadamard,
        _ => Method::Qkmm,
    }
}

/// Dimensions to sweep: the file's own size for file inputs, else `cfg.dims`.
fn sweep_dims(cfg: &ExperimentConfig, files: Option<&FileInputs>) -> Vec<usize> {
    files.map_or_else(|| cfg.dims.clone(), |f| vec![f.dim()])
}

fn cmd_run(con: Console, mut cfg: ExperimentConfig, sources: Option<Vec<NoiseSource>>) -> Result<()> {
    if let Some(s) = sources {
        cfg.noise = Some(cfg.noise.take().unwrap_or_default().with_sources(s));
    }
    cfg.validate()?;
    if cfg.task == TaskKind::Gatecount {
        return cmd_gatecount(con, cfg);
    }
    let files = FileInputs::load(&cfg)?;
    let banks = if cfg.task == TaskKind::Mmm { cfg.parallel_counts.clone() } else { vec![1] };
    let mut rows = Vec::new();
    for dim in sweep_dims(&cfg, files.as_ref()) {
        for &parallel in &banks {
            let point = Point {
                command: "run",
                task: cfg.task,
                method: method_for(cfg.task),
                dim,
                parallel,
            };
            rows.extend(run_point(&cfg, point, files.as_ref())?);
        }
    }
    finish(con, &cfg, "run", &format!("run_{}", cfg.task.name()), &rows)
}

fn cmd_compare(con: Console, cfg: ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    if !matches!(cfg.task, TaskKind::V2v | TaskKind::V2m | TaskKind::M2m) {
        return Err(BenchError::Usage("compare covers v2v, v2m and m2m".into()));
    }
    if cfg.noise.is_some() {
        return Err(BenchError::Usage("compare runs noiseless; drop the noise settings".into()));
    }
    let files = FileInputs::load(&cfg)?;
    let mut rows = Vec::new();
    for dim in sweep_dims(&cfg, files.as_ref()) {
        for &method in &cfg.methods {
            let point = Point {
                command: "compare",
                task: cfg.task,
                method,
                dim,
                parallel: 1,
            };
            rows.extend(run_point(&cfg, point, files.as_ref())?);
        }
    }
    finish(con, &cfg, "compare", &format!("compare_{}", cfg.task.name()), &rows)
}

/// `none`, each single source, then all of them together.
pub fn source_subsets(sources: &[NoiseSource]) -> Vec<Vec<NoiseSource>> {
    let mut out = vec![Vec::new()];
    for &s in sources {
        if !out.contains(&vec![s]) {
            out.push(vec![s]);
        }
    }
    let mut all: Vec<NoiseSource> = sources.to_vec();
    all.sort();
    all.dedup();
    if all.len() > 1 {
        out.push(all);
    }
    out
}

fn cmd_noise_sweep(con: Console, cfg: ExperimentConfig, sources: Option<Vec<NoiseSource>>) -> Result<()> {
    cfg.validate()?;
    if !matches!(cfg.task, TaskKind::V2v | TaskKind::V2m | TaskKind::M2m | TaskKind::Swap | TaskKind::Hadamard) {
        return Err(BenchError::Usage(format!("noise-sweep does not cover {}", cfg.task.name())));
    }
    let base = cfg.noise.clone().unwrap_or_default();
    let wanted = sources.unwrap_or_else(|| base.enabled_sources.iter().copied().collect());
    let files = FileInputs::load(&cfg)?;
    let mut rows = Vec::new();
    for subset in source_subsets(&wanted) {
        let mut point_cfg = cfg.clone();
        point_cfg.noise = Some(base.clone().with_sources(subset));
        for dim in sweep_dims(&cfg, files.as_ref()) {
            let point = Point {
                command: "noise-sweep",
                task: cfg.task,
                method: method_for(cfg.task),
                dim,
                parallel: 1,
            };
            rows.extend(run_point(&point_cfg, point, files.as_ref()).map_err(|e| match e {
                BenchError::Usage(m) => BenchError::Usage(format!("{m} (N={dim}; cap {DENSITY_QUBIT_CAP} qubits)")),
                other => other,
            })?);
        }
    }
    finish(con, &cfg, "noise-sweep", &format!("noise_sweep_{}", cfg.task.name()), &rows)
}

fn cmd_mmm_sweep(con: Console, mut cfg: ExperimentConfig) -> Result<()> {
    cfg.task = TaskKind::Mmm;
    cfg.matrix_source = MatrixSource::Random;
    cfg.validate()?;
    let mut rows = Vec::new();
    for &dim in &cfg.dims {
        for &parallel in &cfg.parallel_counts {
            let point = Point {
                command: "mmm-sweep",
                task: TaskKind::Mmm,
                method: Method::Qkmm,
                dim,
                parallel,
            };
            rows.extend(run_point(&cfg, point, None)?);
        }
    }
    finish(con, &cfg, "mmm-sweep", "mmm_sweep", &rows)
}

fn cmd_gatecount(con: Console, cfg: ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    let rows: Vec<GateRow> = cfg.dims.par_iter().map(|&d| gate_row(d, cfg.seed)).collect::<Result<_>>()?;
    con.say(format_args!(
        "{:>6} {:>16} {:>16} {:>16} {:>16} {:>8} {:>18}",
        "N", "S_printed", "S_recomposed", "model", "measured", "S/N²n", "hadamard_stack"
    ));
    for r in &rows {
        con.say(format_args!(
            "{:>6} {:>16} {:>16} {:>16} {:>16} {:>8.2} {:>18}",
            r.dim, r.s_printed, r.s_recomposed, r.model_total, r.measured_total, r.model_per_n2_log_n, r.hadamard_stack_model
        ));
    }
    con.wrote(&write_records(&cfg.output_dir, "gatecount", "gatecount", &rows, cfg.format)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    let con = Console { quiet: cli.quiet };
    match cli.command {
        Command::Run {
            common,
            task,
            input_a,
            input_b,
            parallel,
            as_product,
        } => {
            let defaults = Defaults {
                task: None,
                dims: None,
                parallel: None,
            };
            let (mut cfg, sources) = resolve(common, defaults)?;
            if let Some(t) = task {
                cfg.task = t;
            }
            if let Some(p) = parallel {
                cfg.parallel_counts = p;
            }
            cfg.as_product |= as_product;
            if input_a.is_some() || input_b.is_some() {
                cfg.matrix_source = MatrixSource::File;
                cfg.input_a = input_a.or(cfg.input_a);
                cfg.input_b = input_b.or(cfg.input_b);
            }
            cmd_run(con, cfg, sources)
        }
        Command::Compare { common, task, methods } => {
            let (mut cfg, sources) = resolve(
                common,
                Defaults {
                    task: None,
                    dims: Some(vec![2, 4, 8]),
                    parallel: None,
                },
            )?;
            if sources.is_some() {
                return Err(BenchError::Usage("compare runs noiseless; drop --sources".into()));
            }
            if let Some(t) = task {
                cfg.task = t;
            }
            if let Some(m) = methods {
                cfg.methods = m;
            }
            cmd_compare(con, cfg)
        }
        Command::NoiseSweep { common, task } => {
            let (mut cfg, sources) = resolve(
                common,
                Defaults {
                    task: Some(TaskKind::V2v),
                    dims: Some(vec![2, 4, 8]),
                    parallel: None,
                },
            )?;
            if let Some(t) = task {
                cfg.task = t;
            }
            cmd_noise_sweep(con, cfg, sources)
        }
        Command::MmmSweep { common, parallel } => {
            let (mut cfg, _) = resolve(
                common,
                Defaults {
                    task: Some(TaskKind::Mmm),
                    dims: Some(vec![4, 8, 16]),
                    parallel: Some(vec![2, 4, 8, 16, 32]),
                },
            )?;
            if let Some(p) = parallel {
                cfg.parallel_counts = p;
            }
            cmd_mmm_sweep(con, cfg)
        }
        Command::Gatecount { common } => {
            let (mut cfg, _) = resolve(
                common,
                Defaults {
                    task: Some(TaskKind::Gatecount),
                    dims: Some(gatecount_dims()),
                    parallel: None,
                },
            )?;
            cfg.task = TaskKind::Gatecount;
            cmd_gatecount(con, cfg)
        }
        Command::Plots { out } => {
            let written = emit_plots(&out)?;
            if written.is_empty() {
                eprintln!("warning: no result CSVs in {}, nothing to plot", out.display());
            }
            for p in &written {
                con.wrote(p);
            }
            Ok(())
        }
    }
}

fn gatecount_dims() -> Vec<usize> {
    (1..=10).map(|n| 1usize << n).collect()
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_cover_singles_and_all() {
        let s = source_subsets(&NoiseSource::ALL);
        assert_eq!(s.len(), 5);
        assert!(s[0].is_empty());
        assert_eq!(s[4].len(), 3);
        assert_eq!(source_subsets(&[NoiseSource::T1]).len(), 2);
        assert_eq!(source_subsets(&[]).len(), 1);
    }

    #[test]
    fn sources_parse() {
        assert!(parse_sources("none").unwrap().is_empty());
        assert_eq!(parse_sources("t1, GATE").unwrap(), vec![NoiseSource::T1, NoiseSource::Gate]);
        assert_eq!(parse_sources("T3").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn bad_flag_exits_two() {
        assert_eq!(run_cli(["qkmm", "run", "--bogus"]), 2);
        assert_eq!(run_cli(["qkmm", "run", "--dims", "3", "--exact"]), 2);
    }
}
