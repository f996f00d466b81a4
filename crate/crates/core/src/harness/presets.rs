//! Preset experiments for each figure of the evaluation.
//!
//! The grids are chosen for this channel model: with the room geometry and
//! path loss of the setup, normalized SNRs sit around 1e6 to 1e9 at
//! 30 dBm, so the feasibility transition at `γ1 = 1` happens between
//! roughly −60 and −20 dBm and the user-1 rate limit lies near 15 to
//! 25 bits/s/Hz.

use std::fmt;
use std::str::FromStr;

use super::{ExperimentConfig, Strategy, Sweep, SweepVariable, DEFAULT_TRIALS};
use crate::channel::{sample_instance, trial_rng};
use crate::error::{Error, Result};
use crate::miso;
use crate::siso::{self, GssOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 7] = [
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9,
    ];
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = Figure::ALL.iter().position(|x| x == self).unwrap() + 3;
        write!(f, "fig{n}")
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure `{s}` (expected fig3 to fig9)")))
    }
}

/// Convergence traces of SCA and GSS on one single-antenna instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig {
    pub base: ExperimentConfig,
    /// Largest number of draws tried when looking for a feasible instance.
    pub max_draws: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresetKind {
    Sweep(ExperimentConfig),
    Traces(TraceConfig),
}

/// One output file of a figure preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetPart {
    pub name: String,
    pub kind: PresetKind,
}

pub const FIG3_POWERS: [f64; 11] = [-40.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 35.0, 40.0, 45.0];
pub const FIG5_POWERS: [f64; 10] = [-60.0, -55.0, -50.0, -45.0, -40.0, -35.0, -30.0, -25.0, -20.0, -15.0];
pub const FIG6_RATES: [f64; 13] = [1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0];
pub const FIG9_ANTENNAS: [f64; 5] = [2.0, 3.0, 4.0, 5.0, 6.0];

fn sweep(variable: SweepVariable, values: &[f64]) -> Sweep {
    Sweep {
        variable,
        values: values.to_vec(),
    }
}

fn base(trials: usize, seed: u64, antennas: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        trials,
        seed,
        ..ExperimentConfig::default()
    };
    cfg.params.sinr_target_gamma1 = 1.0;
    cfg.params.antenna_count_nt = antennas;
    cfg
}

fn part(name: impl Into<String>, cfg: ExperimentConfig) -> PresetPart {
    PresetPart {
        name: name.into(),
        kind: PresetKind::Sweep(cfg),
    }
}

/// Configurations behind one figure. `trials` defaults to 200 when `None`.
pub fn preset(fig: Figure, trials: Option<usize>, seed: u64) -> Vec<PresetPart> {
    use Strategy::*;
    let trials = trials.unwrap_or(DEFAULT_TRIALS);
    let name = fig.to_string();
    match fig {
        Figure::Fig3 => {
            let mut cfg = base(trials, seed, 2);
            cfg.strategies = vec![CoopSca, CoopExhaustive, NoncoopMiso, OmaDynamic, OmaFixed];
            cfg.sweep = sweep(SweepVariable::TransmitPowerDbm, &FIG3_POWERS);
            vec![part(name, cfg)]
        }
        Figure::Fig4 => {
            let mut cfg = base(trials, seed, 1);
            cfg.strategies = vec![CoopGss, CoopSca, NoncoopSiso, OmaDynamic, OmaFixed];
            cfg.sweep = sweep(SweepVariable::TransmitPowerDbm, &FIG3_POWERS);
            vec![part(name, cfg)]
        }
        Figure::Fig5 => {
            let mut m = base(trials, seed, 2);
            m.strategies = vec![CoopSca, CoopExhaustive];
            m.sweep = sweep(SweepVariable::TransmitPowerDbm, &FIG5_POWERS);
            let mut s = base(trials, seed, 1);
            s.strategies = vec![CoopGss, CoopSca, CoopExhaustive];
            s.sweep = m.sweep.clone();
            vec![part(format!("{name}-miso"), m), part(format!("{name}-siso"), s)]
        }
        Figure::Fig6 => [35.0, 40.0]
            .into_iter()
            .map(|ps| {
                let mut cfg = base(trials, seed, 2);
                cfg.params.transmit_power_dbm = ps;
                cfg.strategies = vec![CoopSca, NoncoopMiso];
                cfg.sweep = sweep(SweepVariable::TargetRate, &FIG6_RATES);
                part(format!("{name}-{ps}dbm"), cfg)
            })
            .collect(),
        Figure::Fig7 => {
            let mut cfg = base(1, seed, 1);
            cfg.params.transmit_power_dbm = 30.0;
            cfg.strategies = vec![CoopSca, CoopGss];
            cfg.sweep = sweep(SweepVariable::TransmitPowerDbm, &[30.0]);
            vec![PresetPart {
                name,
                kind: PresetKind::Traces(TraceConfig {
                    base: cfg,
                    max_draws: 1000,
                }),
            }]
        }
        Figure::Fig8 => {
            let mut cfg = base(trials, seed, 2);
            cfg.params.transmit_power_dbm = 25.0;
            cfg.strategies = vec![CoopSca, NoncoopMiso, OmaDynamic, OmaFixed];
            let rates: Vec<f64> = (0..=24).map(f64::from).collect();
            cfg.sweep = sweep(SweepVariable::TargetRate, &rates);
            vec![part(name, cfg)]
        }
        Figure::Fig9 => {
            let mut cfg = base(trials, seed, 2);
            cfg.params.transmit_power_dbm = 30.0;
            cfg.strategies = vec![CoopSca];
            cfg.sweep = sweep(SweepVariable::Antennas, &FIG9_ANTENNAS);
            vec![part(name, cfg)]
        }
    }
}

/// One iteration of either algorithm. `objective` is the SNR of user 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub algorithm: Strategy,
    pub iteration: usize,
    pub objective: f64,
    pub rsum_bps: f64,
}

pub const TRACE_COLUMNS: [&str; 4] = ["algorithm", "iteration", "objective", "rsum_bps"];

/// Runs both algorithms on the first feasible draw and returns their
/// per-iteration traces.
pub fn run_traces(tc: &TraceConfig) -> Result<Vec<TraceRecord>> {
    let cfg = &tc.base;
    cfg.validate()?;
    let params = cfg.point_params(cfg.sweep.values[0]);
    let targets = cfg.targets(cfg.sweep.values[0]);
    let gamma = targets.coop_gamma;
    let prelog = cfg.rate_convention.coop_prelog() * params.bandwidth_hz;
    let rsum = |snr2: f64| prelog * ((1.0 + gamma).log2() + (1.0 + snr2).log2());
    for draw in 0..tc.max_draws {
        let inst = sample_instance(&mut trial_rng(cfg.seed, draw), &params, &cfg.geometry)?;
        let s = inst.to_siso()?;
        if !siso::feasible_beta_interval(&s, gamma).feasible {
            continue;
        }
        let opts = GssOptions {
            eps: cfg.solver.gss_eps,
            ..GssOptions::default()
        };
        let (_, gss) = siso::gss_solve_traced(&s, gamma, &opts);
        let (_, sca) = miso::sca_solve_traced(
            &inst,
            gamma,
            cfg.solver.sca_eps,
            cfg.solver.sca_max_iter,
            &cfg.miso_options(draw),
        )?;
        let mut out: Vec<TraceRecord> = sca
            .iter()
            .map(|r| TraceRecord {
                algorithm: Strategy::CoopSca,
                iteration: r.iteration,
                objective: r.objective,
                rsum_bps: rsum(r.objective),
            })
            .collect();
        out.extend(gss.iter().map(|g| TraceRecord {
            algorithm: Strategy::CoopGss,
            iteration: g.iteration,
            objective: g.objective,
            rsum_bps: rsum(g.objective),
        }));
        return Ok(out);
    }
    Err(Error::Config(format!("no feasible instance in {} draws", tc.max_draws)))
}

pub fn traces_to_csv(records: &[TraceRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        w.write_record([
            r.algorithm.name().to_string(),
            r.iteration.to_string(),
            super::format_float(r.objective),
            super::format_float(r.rsum_bps),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
}
