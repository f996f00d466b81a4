use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swipt_noma::channel::{sample_instance, trial_rng};
use swipt_noma::error::Error;
use swipt_noma::harness::presets::{preset, run_traces, traces_to_csv, Figure, PresetKind};
use swipt_noma::harness::{self, ExperimentConfig, SweepOutput};
use swipt_noma::miso::{self, MisoOptions};
use swipt_noma::siso;
use swipt_noma::system::{MisoInstance, SisoInstance};

/// `println!` that exits quietly when stdout is a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {
        emit(&format!("{}\n", format_args!($($arg)*)))
    };
}

fn emit(s: &str) {
    use std::io::Write as _;
    if let Err(e) = std::io::stdout().lock().write_all(s.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("failed writing to stdout: {e}");
    }
}

const EXIT_SOLVER: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "swipt-noma",
    version,
    about = "Cooperative SWIPT-NOMA beamforming and power-splitting solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-antenna problem by golden-section search.
    SolveSiso(SolveArgs),
    /// Multi-antenna problem by SCA or exhaustive search.
    SolveMiso(MisoArgs),
    /// Monte-Carlo sweep described by a config file.
    Sweep(SweepArgs),
    /// Preset sweep for one figure (fig3 to fig9).
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
#[group(id = "instance", required = true, multiple = true)]
struct InstanceArgs {
    /// Normalized gain of user 1 (with --h2 and --g).
    #[arg(long, group = "instance", requires_all = ["h2", "g"])]
    h1: Option<f64>,
    #[arg(long, requires_all = ["h1", "g"])]
    h2: Option<f64>,
    /// Relay link gain.
    #[arg(long, requires_all = ["h1", "h2"])]
    g: Option<f64>,
    /// Draw the instance from the channel model instead.
    #[arg(long, group = "instance")]
    seed: Option<u64>,
    /// Config file supplying system parameters for --seed.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// SINR target of user 1; defaults to the config value.
    #[arg(long)]
    gamma: Option<f64>,
    /// Bracket length at which the search stops.
    #[arg(long, default_value_t = siso::DEFAULT_GSS_EPS)]
    tol: f64,
    /// Also report the brute-force optimum on a grid of this many points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Exit with status 1 when infeasible.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Method {
    Sca,
    Exhaustive,
}

#[derive(Args)]
struct MisoArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "sca")]
    method: Method,
    /// Conic solver tolerance.
    #[arg(long, default_value_t = miso::MISO_CONIC_TOL)]
    tol: f64,
    /// Lattice points per axis for exhaustive search.
    #[arg(long, default_value_t = miso::DEFAULT_GRID)]
    grid: usize,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Conic solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Exhaustive-search lattice size.
    #[arg(long)]
    grid: Option<usize>,
    /// Exit with status 1 if any trial hit a solver error.
    #[arg(long)]
    strict: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(t) = self.tol {
            cfg.solver.tol = t;
        }
        if let Some(g) = self.grid {
            cfg.solver.grid = g;
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Records CSV; the summary goes next to it with a `-summary` suffix.
    /// Defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ReproduceArgs {
    figure: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

enum Failure {
    Usage(String),
    Solver(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::BetaOutOfRange(_) => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => Ok(ExperimentConfig::from_path(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn instance(args: &InstanceArgs, single_antenna: bool) -> Result<(MisoInstance, ExperimentConfig), Failure> {
    let cfg = load_config(args.config.as_deref())?;
    if let (Some(h1), Some(h2), Some(g)) = (args.h1, args.h2, args.g) {
        let s = SisoInstance::new(h1, h2, g)?;
        return Ok((MisoInstance::from_siso(&s), cfg));
    }
    let seed = args
        .seed
        .ok_or_else(|| Failure::Usage("give --h1/--h2/--g or --seed".into()))?;
    let mut params = cfg.params.clone();
    if single_antenna {
        params.antenna_count_nt = 1;
    }
    let inst = sample_instance(&mut trial_rng(seed, 0), &params, &cfg.geometry)?;
    Ok((inst, cfg))
}

fn solve_siso(a: &SolveArgs) -> CliResult {
    let (inst, cfg) = instance(&a.instance, true)?;
    let s = inst.to_siso()?;
    let gamma = a.gamma.unwrap_or(cfg.params.sinr_target_gamma1);
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let sol = siso::gss_solve(&s, gamma, a.tol);
    out!("instance   h1={} h2={} g={}", s.h1, s.h2, s.g);
    out!("gamma1     {gamma}");
    out!("status     {:?}", sol.status);
    if sol.status.has_solution() {
        out!("beta       {}", sol.beta);
        out!("alpha      {}", sol.alpha);
        out!("objective  {}", sol.objective);
        out!("iterations {}", sol.iterations);
    }
    if let Some(n) = a.grid {
        if n < 2 {
            return Err(Failure::Usage("--grid needs at least 2 points".into()));
        }
        match siso::brute_force_siso(&s, gamma, n) {
            Some(b) => out!(
                "brute force beta={} alpha={} objective={}",
                b.beta,
                b.alpha,
                b.objective
            ),
            None => out!("brute force: no feasible lattice point"),
        }
    }
    if a.strict && !sol.status.has_solution() {
        return Err(Failure::Solver("infeasible".into()));
    }
    Ok(())
}

fn solve_miso(a: &MisoArgs) -> CliResult {
    let (inst, cfg) = instance(&a.instance, false)?;
    let gamma = a.gamma.unwrap_or(cfg.params.sinr_target_gamma1);
    let opts = MisoOptions {
        conic: swipt_noma::conic::SolverSettings::with_tol(a.tol),
        ..MisoOptions::default()
    };
    let (sol, residual) = match a.method {
        Method::Sca => {
            let (sol, trace) =
                miso::sca_solve_traced(&inst, gamma, cfg.solver.sca_eps, cfg.solver.sca_max_iter, &opts)?;
            (sol, trace.last().map(|r| r.kkt_residual))
        }
        Method::Exhaustive => {
            if a.grid < 2 {
                return Err(Failure::Usage("--grid needs at least 2 points".into()));
            }
            let (sol, info) = miso::exhaustive_search_detailed(&inst, gamma, a.grid, a.grid, &opts)?;
            (sol, info.map(|(_, i)| i.worst_kkt_residual))
        }
    };
    out!("antennas   {}", inst.antennas());
    out!("gamma1     {gamma}");
    out!("status     {:?}", sol.status);
    if sol.status.has_solution() {
        out!("beta       {}", sol.beta);
        out!("x          {}", sol.x);
        out!("objective  {}", sol.objective);
        out!("iterations {}", sol.iterations);
        out!("eig ratio  {}", sol.eig_ratio_lambda);
        if let Some(r) = residual {
            out!("kkt resid  {r:e}");
        }
        out!("w1         {}", fmt_vec(sol.w1.as_slice()));
        out!("w2         {}", fmt_vec(sol.w2.as_slice()));
        if !sol.extraction_ok {
            out!("warning: no rank-one candidate met every constraint");
        }
    }
    if a.strict && !sol.status.has_solution() {
        return Err(Failure::Solver("infeasible".into()));
    }
    Ok(())
}

fn fmt_vec(v: &[num_complex::Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im)).collect();
    format!("[{}]", parts.join(", "))
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}-summary.csv"))
}

fn print_summary(out: &SweepOutput) {
    eprintln!(
        "{:<16} {:>12} {:>8} {:>16}",
        "strategy", "value", "p_feas", "mean_rsum_bps"
    );
    for r in &out.summary {
        eprintln!(
            "{:<16} {:>12} {:>8.3} {:>16.6e}",
            r.strategy.name(),
            harness::format_float(r.sweep_value),
            r.feasibility,
            r.mean_rsum
        );
    }
}

fn finish_sweep(out: &SweepOutput, strict: bool) -> CliResult {
    let failures = out.failures();
    if failures > 0 {
        eprintln!("{failures} trial(s) hit solver errors");
        if strict {
            return Err(Failure::Solver(format!("{failures} solver failure(s)")));
        }
    }
    Ok(())
}

fn sweep(a: &SweepArgs) -> CliResult {
    let mut cfg = ExperimentConfig::from_path(&a.config)?;
    a.overrides.apply(&mut cfg);
    cfg.validate()?;
    let out = harness::run_sweep(&cfg)?;
    match a.out.clone().or(cfg.output.clone()) {
        Some(path) => {
            harness::write_records(&path, &out.records)?;
            harness::write_summary(&summary_path(&path), &out.summary)?;
            eprintln!("wrote {}", path.display());
        }
        None => emit(&harness::records_to_csv(&out.records)?),
    }
    print_summary(&out);
    finish_sweep(&out, a.overrides.strict)
}

fn reproduce(a: &ReproduceArgs) -> CliResult {
    let fig: Figure = a.figure.parse()?;
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    let seed = a.overrides.seed.unwrap_or(1);
    for part in preset(fig, a.overrides.trials, seed) {
        let path = a.out.join(format!("{}.csv", part.name));
        match part.kind {
            PresetKind::Sweep(mut cfg) => {
                a.overrides.apply(&mut cfg);
                cfg.validate()?;
                let out = harness::run_sweep(&cfg)?;
                harness::write_records(&path, &out.records)?;
                harness::write_summary(&summary_path(&path), &out.summary)?;
                eprintln!("wrote {}", path.display());
                print_summary(&out);
                finish_sweep(&out, a.overrides.strict)?;
            }
            PresetKind::Traces(mut tc) => {
                a.overrides.apply(&mut tc.base);
                let traces = run_traces(&tc)?;
                std::fs::write(&path, traces_to_csv(&traces)?).map_err(Error::from)?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SolveSiso(a) => solve_siso(a),
        Command::SolveMiso(a) => solve_miso(a),
        Command::Sweep(a) => sweep(a),
        Command::Reproduce(a) => reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
