//! Monte-Carlo sweeps over transmit power, user-1 target rate or antenna
//! count, with every strategy evaluated on the same channel draw.

mod output;
pub mod presets;

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BaselineDetail, BaselineResult};
use crate::channel::{sample_instance, trial_rng, trial_seed, GeometryConfig};
use crate::error::{Error, Result};
use crate::miso::{self, MisoOptions};
use crate::siso;
use crate::system::{MisoInstance, RateConvention, SystemParams};

pub use output::{
    format_float, records_to_csv, summary_to_csv, write_records, write_summary, RECORD_COLUMNS, SUMMARY_COLUMNS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Cooperative SWIPT-NOMA solved by SCA.
    CoopSca,
    /// Cooperative SWIPT-NOMA solved by the (β, x) lattice search.
    CoopExhaustive,
    /// Cooperative SWIPT-NOMA, single antenna, golden-section search.
    CoopGss,
    NoncoopMiso,
    NoncoopSiso,
    OmaDynamic,
    OmaFixed,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::CoopSca,
        Strategy::CoopExhaustive,
        Strategy::CoopGss,
        Strategy::NoncoopMiso,
        Strategy::NoncoopSiso,
        Strategy::OmaDynamic,
        Strategy::OmaFixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::CoopSca => "coop-sca",
            Strategy::CoopExhaustive => "coop-exhaustive",
            Strategy::CoopGss => "coop-gss",
            Strategy::NoncoopMiso => "noncoop-miso",
            Strategy::NoncoopSiso => "noncoop-siso",
            Strategy::OmaDynamic => "oma-dynamic",
            Strategy::OmaFixed => "oma-fixed",
        }
    }

    pub fn single_antenna_only(self) -> bool {
        matches!(self, Strategy::CoopGss | Strategy::NoncoopSiso)
    }

    pub fn cooperative(self) -> bool {
        matches!(self, Strategy::CoopSca | Strategy::CoopExhaustive | Strategy::CoopGss)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    TransmitPowerDbm,
    /// User-1 target rate in bits/s/Hz.
    TargetRate,
    Antennas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// How infeasible trials enter the rate averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Infeasible trials count as zero rate.
    #[default]
    ZeroIfInfeasible,
    /// Average over feasible trials only.
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Conic solver tolerance for the MISO relaxations.
    pub tol: f64,
    pub sca_eps: f64,
    pub sca_max_iter: usize,
    pub gss_eps: f64,
    /// Points per axis of the exhaustive lattice.
    pub grid: usize,
    pub randomizations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: miso::MISO_CONIC_TOL,
            sca_eps: miso::DEFAULT_SCA_EPS,
            sca_max_iter: miso::DEFAULT_SCA_MAX_ITER,
            gss_eps: siso::DEFAULT_GSS_EPS,
            grid: miso::DEFAULT_GRID,
            randomizations: miso::DEFAULT_RANDOMIZATIONS,
        }
    }
}

pub const DEFAULT_TRIALS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub strategies: Vec<Strategy>,
    pub sweep: Sweep,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub params: SystemParams,
    pub geometry: GeometryConfig,
    pub rate_convention: RateConvention,
    pub averaging: Averaging,
    /// Fill the wall-time column. Off by default so reruns are byte-identical.
    pub record_wall_time: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            strategies: vec![
                Strategy::CoopSca,
                Strategy::NoncoopMiso,
                Strategy::OmaDynamic,
                Strategy::OmaFixed,
            ],
            sweep: Sweep {
                variable: SweepVariable::TransmitPowerDbm,
                values: vec![20.0, 25.0, 30.0, 35.0, 40.0],
            },
            trials: DEFAULT_TRIALS,
            seed: 1,
            solver: SolverConfig::default(),
            params: SystemParams::default(),
            geometry: GeometryConfig::default(),
            rate_convention: RateConvention::default(),
            averaging: Averaging::default(),
            record_wall_time: false,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.strategies.is_empty() {
            return bad("no strategies selected".into());
        }
        if self.sweep.values.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if self.solver.grid < 2 || self.solver.sca_max_iter == 0 {
            return bad("solver grid needs ≥ 2 points and SCA ≥ 1 iteration".into());
        }
        if !(self.solver.tol > 0.0 && self.solver.sca_eps > 0.0 && self.solver.gss_eps > 0.0) {
            return bad("solver tolerances must be positive".into());
        }
        for &v in &self.sweep.values {
            let ok = match self.sweep.variable {
                SweepVariable::TransmitPowerDbm => v.is_finite(),
                SweepVariable::TargetRate => v >= 0.0 && v.is_finite(),
                SweepVariable::Antennas => v >= 1.0 && v.fract() == 0.0 && v <= miso_max_antennas() as f64,
            };
            if !ok {
                return bad(format!("sweep value {v} is invalid for {:?}", self.sweep.variable));
            }
        }
        for (i, &v) in self.sweep.values.iter().enumerate() {
            let p = self.point_params(v);
            p.validate()?;
            if p.antenna_count_nt != 1 {
                if let Some(s) = self.strategies.iter().find(|s| s.single_antenna_only()) {
                    return bad(format!(
                        "{} needs a single antenna (point {i} has {})",
                        s.name(),
                        p.antenna_count_nt
                    ));
                }
            }
        }
        self.geometry.validate()
    }

    /// System parameters at one sweep value.
    pub fn point_params(&self, value: f64) -> SystemParams {
        let mut p = self.params.clone();
        match self.sweep.variable {
            SweepVariable::TransmitPowerDbm => p.transmit_power_dbm = value,
            SweepVariable::Antennas => p.antenna_count_nt = value as usize,
            SweepVariable::TargetRate => {}
        }
        p
    }

    /// User-1 requirement at one sweep value.
    pub fn targets(&self, value: f64) -> Targets {
        let conv = self.rate_convention;
        let rate = match self.sweep.variable {
            SweepVariable::TargetRate => value,
            _ => conv.coop_rate(self.params.sinr_target_gamma1),
        };
        Targets {
            rate,
            coop_gamma: conv.coop_gamma(rate),
            single_slot_gamma: conv.single_slot_gamma(rate),
        }
    }

    fn miso_options(&self, seed: u64) -> MisoOptions {
        MisoOptions {
            conic: crate::conic::SolverSettings::with_tol(self.solver.tol),
            randomizations: self.solver.randomizations,
            extraction_seed: seed,
            ..MisoOptions::default()
        }
    }
}

fn miso_max_antennas() -> usize {
    crate::conic::MAX_PSD_SIDE / 2
}

/// User-1 requirement seen by each family of strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    /// bits/s/Hz.
    pub rate: f64,
    pub coop_gamma: f64,
    pub single_slot_gamma: f64,
}

/// One (strategy, sweep point, trial) outcome. Rates in bits/s; zero when
/// infeasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub strategy: Strategy,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub r1: f64,
    pub r2: f64,
    pub rsum: f64,
    pub feasible: bool,
    pub iterations: usize,
    /// `λ1 / λ2` of the returned covariance; NaN where not applicable.
    pub eig_ratio: f64,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub point: usize,
    /// Solver error text; such trials are recorded as infeasible.
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub point: usize,
    pub sweep_value: f64,
    pub trials: usize,
    pub feasible: usize,
    pub feasibility: f64,
    pub mean_r1: f64,
    pub mean_r2: f64,
    pub mean_rsum: f64,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn row(&self, strategy: Strategy, point: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.point == point && r.strategy == strategy)
    }
}

struct Outcome {
    r1: f64,
    r2: f64,
    feasible: bool,
    iterations: usize,
    eig_ratio: f64,
}

impl Outcome {
    fn infeasible(iterations: usize) -> Self {
        Self {
            r1: 0.0,
            r2: 0.0,
            feasible: false,
            iterations,
            eig_ratio: f64::NAN,
        }
    }

    fn from_baseline(b: BaselineResult) -> Self {
        let eig_ratio = match b.detail {
            BaselineDetail::Beamformers { eig_ratio, .. } => eig_ratio,
            _ => f64::NAN,
        };
        Self {
            r1: b.r1,
            r2: b.r2,
            feasible: b.feasible,
            iterations: 1,
            eig_ratio,
        }
    }
}

fn evaluate(
    cfg: &ExperimentConfig,
    strategy: Strategy,
    inst: &MisoInstance,
    params: &SystemParams,
    targets: Targets,
    seed: u64,
) -> Result<Outcome> {
    let bw = params.bandwidth_hz;
    let coop_rate = |snr: f64| cfg.rate_convention.coop_prelog() * bw * (1.0 + snr).log2();
    let gamma = targets.coop_gamma;
    let opts = cfg.miso_options(seed);
    let coop = |feasible: bool, snr2: f64, iterations: usize, eig_ratio: f64| {
        if feasible {
            Outcome {
                r1: coop_rate(gamma),
                r2: coop_rate(snr2),
                feasible,
                iterations,
                eig_ratio,
            }
        } else {
            Outcome::infeasible(iterations)
        }
    };
    Ok(match strategy {
        Strategy::CoopSca => {
            let (sol, _) = miso::sca_solve_traced(inst, gamma, cfg.solver.sca_eps, cfg.solver.sca_max_iter, &opts)?;
            coop(
                sol.status.has_solution(),
                sol.objective,
                sol.iterations,
                sol.eig_ratio_lambda,
            )
        }
        Strategy::CoopExhaustive => {
            let g = cfg.solver.grid;
            let (sol, _) = miso::exhaustive_search_detailed(inst, gamma, g, g, &opts)?;
            coop(
                sol.status.has_solution(),
                sol.objective,
                sol.iterations,
                sol.eig_ratio_lambda,
            )
        }
        Strategy::CoopGss => {
            let sol = siso::gss_solve(&inst.to_siso()?, gamma, cfg.solver.gss_eps);
            coop(sol.status.has_solution(), sol.objective, sol.iterations, f64::NAN)
        }
        Strategy::NoncoopMiso => Outcome::from_baseline(baselines::noncoop_noma_miso(
            inst,
            targets.single_slot_gamma,
            bw,
            &opts,
        )?),
        Strategy::NoncoopSiso => Outcome::from_baseline(baselines::noncoop_noma_siso(
            &inst.to_siso()?,
            targets.single_slot_gamma,
            bw,
        )?),
        Strategy::OmaDynamic => Outcome::from_baseline(baselines::oma_dynamic_miso(inst, targets.rate, bw)?),
        Strategy::OmaFixed => Outcome::from_baseline(baselines::oma_fixed_miso(inst, targets.rate, bw)?),
    })
}

fn run_trial(cfg: &ExperimentConfig, point: usize, trial: usize) -> Vec<SweepRecord> {
    let value = cfg.sweep.values[point];
    let params = cfg.point_params(value);
    let targets = cfg.targets(value);
    // The draw depends on the trial only, so every sweep point sees the same
    // geometry and fading.
    let seed = trial_seed(cfg.seed, trial as u64);
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let inst = sample_instance(&mut rng, &params, &cfg.geometry);
    cfg.strategies
        .iter()
        .map(|&strategy| {
            let start = Instant::now();
            let outcome = inst
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|inst| evaluate(cfg, strategy, inst, &params, targets, seed).map_err(|e| e.to_string()));
            let wall = if cfg.record_wall_time {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            let (o, error) = match outcome {
                Ok(o) => (o, None),
                Err(e) => {
                    log::warn!("{} at {value}, trial {trial}: {e}", strategy.name());
                    (Outcome::infeasible(0), Some(e))
                }
            };
            SweepRecord {
                strategy,
                sweep_value: value,
                trial,
                seed,
                r1: o.r1,
                r2: o.r2,
                rsum: o.r1 + o.r2,
                feasible: o.feasible,
                iterations: o.iterations,
                eig_ratio: o.eig_ratio,
                wall_time_s: wall,
                point,
                error,
            }
        })
        .collect()
}

/// Runs every (point, trial) pair. Records come back sorted by point, trial
/// and strategy order, independent of scheduling.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep.values.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let mut records: Vec<SweepRecord> = jobs.par_iter().flat_map_iter(|&(p, t)| run_trial(cfg, p, t)).collect();
    let order = |s: Strategy| cfg.strategies.iter().position(|&k| k == s).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (r.point, r.trial, order(r.strategy)));
    let summary = summarize(&records, cfg);
    Ok(SweepOutput { records, summary })
}

/// Per-(point, strategy) means and feasibility probability.
pub fn summarize(records: &[SweepRecord], cfg: &ExperimentConfig) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (point, &value) in cfg.sweep.values.iter().enumerate() {
        for &strategy in &cfg.strategies {
            let rs: Vec<&SweepRecord> = records
                .iter()
                .filter(|r| r.point == point && r.strategy == strategy)
                .collect();
            let feasible = rs.iter().filter(|r| r.feasible).count();
            let denom = match cfg.averaging {
                Averaging::ZeroIfInfeasible => rs.len(),
                Averaging::Conditional => feasible,
            };
            let mean = |f: fn(&SweepRecord) -> f64| {
                if denom == 0 {
                    0.0
                } else {
                    rs.iter().filter(|r| r.feasible).map(|r| f(r)).sum::<f64>() / denom as f64
                }
            };
            rows.push(SummaryRow {
                strategy,
                point,
                sweep_value: value,
                trials: rs.len(),
                feasible,
                feasibility: if rs.is_empty() {
                    0.0
                } else {
                    feasible as f64 / rs.len() as f64
                },
                mean_r1: mean(|r| r.r1),
                mean_r2: mean(|r| r.r2),
                mean_rsum: mean(|r| r.rsum),
                failures: rs.iter().filter(|r| r.error.is_some()).count(),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            strategies: vec![Strategy::OmaDynamic, Strategy::OmaFixed],
            sweep: Sweep {
                variable: SweepVariable::TransmitPowerDbm,
                values: vec![10.0, 20.0],
            },
            trials: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = small();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = small();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.sweep.values.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.strategies.push(Strategy::CoopGss);
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml_str("trials = 1\nbogus = 2\n").is_err());
        assert!("coop-magic".parse::<Strategy>().is_err());
    }

    #[test]
    fn targets_follow_rate_convention() {
        let mut cfg = small();
        cfg.sweep.variable = SweepVariable::TargetRate;
        cfg.sweep.values = vec![1.0];
        let t = cfg.targets(1.0);
        assert_eq!((t.coop_gamma, t.single_slot_gamma), (1.0, 1.0));
        cfg.rate_convention = RateConvention::TwoSlot;
        let t = cfg.targets(1.0);
        assert_eq!((t.coop_gamma, t.single_slot_gamma), (3.0, 1.0));
    }

    #[test]
    fn one_record_per_strategy_point_trial() {
        let cfg = small();
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.records.len(), 2 * 2 * 3);
        assert_eq!(out.summary.len(), 4);
        // Same trial, different points: identical geometry, higher power.
        let at = |p: usize| out.records.iter().find(|r| r.point == p && r.trial == 0).unwrap().r2;
        assert!(at(1) > at(0));
        assert!(out.row(Strategy::OmaFixed, 1).unwrap().mean_r2 > 0.0);
    }
}
