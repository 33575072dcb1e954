//! Command-line front end: synthetic data generation, experiment runs,
//! sweeps and gradient checking, driven by a TOML config file.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use hyperite::config::RunConfig;
use hyperite::eval::{self, ResultsTable, SweepAxis};
use hyperite::gradcheck::{self, Corruption};
use hyperite::{data, Error, Result};

/// Environment variable overriding the output directory (the `--out` flag
/// still wins over it).
const OUT_ENV_VAR: &str = "HYPERITE_OUT";

#[derive(Parser)]
#[command(
    name = "hyperite",
    version,
    about = "Treatment-effect estimation with hypernetwork weight sharing"
)]
struct Cli {
    /// TOML config file; omitted means built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (wins over HYPERITE_OUT and the config file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for seeds/sweep cells; 1 keeps logs bitwise stable.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Added to every seed in the config, for disjoint replications.
    #[arg(long, global = true, default_value_t = 0)]
    seed_offset: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    GenData {
        /// Output file; defaults to <out-dir>/data.csv.
        path: Option<PathBuf>,
        /// Include the true outcome surfaces mu0, mu1 as columns.
        #[arg(long)]
        with_mu: bool,
    },
    /// Train the configured learners across seeds and write result tables.
    Run,
    /// Run the configured sweep study and write per-cell plus combined results.
    Sweep,
    /// Finite-difference checks of every backward pass.
    Gradcheck {
        /// Corrupt the analytic gradients (negative control; must exit 1).
        #[arg(long, hide = true)]
        corrupt_adjoint: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => {
            let cfg = RunConfig::default();
            cfg.validate()?;
            Ok(cfg)
        }
    }
}

/// Flag > environment variable > config file.
fn resolve_out_dir(flag: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.clone();
    }
    if let Ok(p) = std::env::var(OUT_ENV_VAR) {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    cfg.output.directory.clone()
}

fn dispatch(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build_global()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;

    let cfg = load_config(&cli.config)?;
    let out_dir = resolve_out_dir(&cli.out, &cfg);

    match cli.command {
        Command::GenData { path, with_mu } => cmd_gen_data(&cfg, &out_dir, path, with_mu, cli.seed_offset),
        Command::Run => cmd_run(&cfg, &out_dir, cli.seed_offset, false),
        Command::Sweep => cmd_run(&cfg, &out_dir, cli.seed_offset, true),
        Command::Gradcheck { corrupt_adjoint } => cmd_gradcheck(&cfg, cli.seed_offset, corrupt_adjoint),
    }
}

fn cmd_gen_data(
    cfg: &RunConfig,
    out_dir: &Path,
    path: Option<PathBuf>,
    with_mu: bool,
    seed_offset: u64,
) -> Result<()> {
    // the DGP config is validated before any file I/O
    let dgp = cfg.dgp()?;
    let seed = cfg.experiment.seeds.first().copied().unwrap_or(0) + seed_offset;
    let dataset = data::generate_synthetic(&dgp, seed)?;
    let path = match path {
        Some(p) => p,
        None => {
            std::fs::create_dir_all(out_dir)?;
            out_dir.join("data.csv")
        }
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    data::write_csv(&dataset, &path, with_mu)?;
    let treated = dataset.n_treated() as f64 / dataset.n() as f64;
    println!("wrote {} rows (d = {}, treated fraction {:.4}) to {}", dataset.n(), dataset.d(), treated, path.display());
    Ok(())
}

fn cmd_run(cfg: &RunConfig, out_dir: &Path, seed_offset: u64, require_sweep: bool) -> Result<()> {
    let mut exp = cfg.experiment_config()?;
    if require_sweep && exp.sweep == SweepAxis::None {
        return Err(Error::config(
            "the sweep command needs experiment.sweep set to dataset_size, embedding_size or strategy",
        ));
    }
    exp.seeds = exp.seeds.iter().map(|s| s + seed_offset).collect();

    let table = eval::run_experiment(&exp)?;
    std::fs::create_dir_all(out_dir)?;
    eval::write_results_csv(&table, &out_dir.join("results.csv"))?;
    eval::write_raw_jsonl(&table, &out_dir.join("raw.jsonl"))?;
    eval::write_traces_jsonl(&table, &out_dir.join("traces.jsonl"))?;
    if exp.sweep != SweepAxis::None {
        eval::write_sweep_csv(&table, &out_dir.join("sweep.csv"))?;
    }
    print_table(&table);
    println!("results written to {}", out_dir.display());
    Ok(())
}

fn print_table(table: &ResultsTable) {
    let sweep_values: Vec<Option<String>> = {
        let mut seen = Vec::new();
        for r in &table.rows {
            if !seen.contains(&r.sweep_value) {
                seen.push(r.sweep_value.clone());
            }
        }
        seen
    };
    for value in sweep_values {
        if let Some(v) = &value {
            println!("\nsweep value = {v}");
        }
        println!("{:<22} {:>22} {:>22}", "learner", "PEHE-in mean (SE)", "PEHE-out mean (SE)");
        for r in table.rows.iter().filter(|r| r.sweep_value == value) {
            let fin = format!("{:.4} ({:.4})", r.pehe_in_mean, r.pehe_in_se);
            let fout = format!("{:.4} ({:.4})", r.pehe_out_mean, r.pehe_out_se);
            let flag = if r.low_sample { "  [single run]" } else { "" };
            println!("{:<22} {:>22} {:>22}{}", r.learner, fin, fout, flag);
        }
    }
}

fn cmd_gradcheck(cfg: &RunConfig, seed_offset: u64, corrupt: bool) -> Result<()> {
    let corruption = if corrupt { Corruption::ScaledAdjoint } else { Corruption::None };
    let seed = cfg.experiment.seeds.first().copied().unwrap_or(0) + seed_offset;
    let report = gradcheck::run_report(seed, corruption)?;
    println!("{:<24} {:>14} {:>8} {:>10} {:>8}", "suite", "worst rel err", "checks", "tolerance", "status");
    for row in &report.rows {
        println!(
            "{:<24} {:>14.3e} {:>8} {:>10.0e} {:>8}",
            row.name,
            row.worst_rel_err,
            row.checked,
            row.tolerance,
            if row.passed() { "ok" } else { "FAIL" }
        );
    }
    let nn_worst = report.rows[0].worst_rel_err;
    let hyper_worst =
        report.rows[1..].iter().map(|r| r.worst_rel_err).fold(0.0f64, f64::max);
    println!("worst relative error: nn {nn_worst:.3e}, hypernet {hyper_worst:.3e}");
    if !report.passed() {
        return Err(Error::data("gradient check exceeded tolerance"));
    }
    Ok(())
}
