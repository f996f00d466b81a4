//! Comparison strategies: noncooperative NOMA (MISO and SISO) and TDMA with
//! dynamic or fixed time allocation.
//!
//! Rates are in bits/s and every strategy here uses a full pre-log. User 1 is
//! credited with its target rate whenever the strategy is feasible; surplus
//! SINR on user 1 is not counted.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::miso::{solve_direct_only, MisoOptions};
use crate::system::{MisoInstance, SisoInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    NoncoopNomaMiso,
    NoncoopNomaSiso,
    OmaDynamic,
    OmaFixed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaselineDetail {
    Beamformers {
        w1: DVector<Complex64>,
        w2: DVector<Complex64>,
        /// `λ1 / λ2` of the relaxed `W2` (or `W1` when `W2 = 0`).
        eig_ratio: f64,
    },
    /// Fraction of the transmit power given to user 1.
    PowerSplit {
        alpha: f64,
    },
    /// Fraction of the frame given to user 1.
    TimeSplit {
        tau1: f64,
    },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub strategy: BaselineKind,
    pub r1: f64,
    pub r2: f64,
    pub rsum: f64,
    pub feasible: bool,
    pub detail: BaselineDetail,
}

impl BaselineResult {
    fn infeasible(strategy: BaselineKind) -> Self {
        Self {
            strategy,
            r1: 0.0,
            r2: 0.0,
            rsum: 0.0,
            feasible: false,
            detail: BaselineDetail::None,
        }
    }

    fn feasible(strategy: BaselineKind, r1: f64, r2: f64, detail: BaselineDetail) -> Self {
        Self {
            strategy,
            r1,
            r2,
            rsum: r1 + r2,
            feasible: true,
            detail,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "SINR target must be nonnegative, got {gamma}"
        )));
    }
    Ok(())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target rate must be nonnegative, got {rate}"
        )));
    }
    Ok(())
}

/// Single-slot NOMA without the relay stage: maximize `|h2ᴴw2|²` subject to
/// user 1's SINR and SIC at user 2, both at `gamma_nc`. Solved as the SDR with
/// `β = 0`, followed by eigenvector extraction.
pub fn noncoop_noma_miso(
    inst: &MisoInstance,
    gamma_nc: f64,
    bandwidth_hz: f64,
    opts: &MisoOptions,
) -> Result<BaselineResult> {
    check_gamma(gamma_nc)?;
    let sol = solve_direct_only(inst, gamma_nc, opts)?;
    if !sol.status.has_solution() {
        return Ok(BaselineResult::infeasible(BaselineKind::NoncoopNomaMiso));
    }
    Ok(BaselineResult::feasible(
        BaselineKind::NoncoopNomaMiso,
        bandwidth_hz * (1.0 + gamma_nc).log2(),
        bandwidth_hz * (1.0 + sol.objective).log2(),
        BaselineDetail::Beamformers {
            w1: sol.w1,
            w2: sol.w2,
            eig_ratio: sol.eig_ratio_lambda,
        },
    ))
}

/// Smallest power share of user 1 meeting `gamma_nc` at both receivers, or
/// `None` when it exceeds 1.
pub fn noncoop_alpha(inst: &SisoInstance, gamma_nc: f64) -> Option<f64> {
    let need = |h: f64| gamma_nc * (h + 1.0) / ((gamma_nc + 1.0) * h);
    let alpha = need(inst.h1).max(need(inst.h2));
    (alpha <= 1.0).then_some(alpha)
}

pub fn noncoop_noma_siso(inst: &SisoInstance, gamma_nc: f64, bandwidth_hz: f64) -> Result<BaselineResult> {
    check_gamma(gamma_nc)?;
    let Some(alpha) = noncoop_alpha(inst, gamma_nc) else {
        return Ok(BaselineResult::infeasible(BaselineKind::NoncoopNomaSiso));
    };
    Ok(BaselineResult::feasible(
        BaselineKind::NoncoopNomaSiso,
        bandwidth_hz * (1.0 + gamma_nc).log2(),
        bandwidth_hz * (1.0 + (1.0 - alpha) * inst.h2).log2(),
        BaselineDetail::PowerSplit { alpha },
    ))
}

/// TDMA with user 1 given just enough of the frame for `rate_target`
/// (bits/s/Hz). `g1`, `g2` are the single-user SNRs (`‖h_i‖²` with
/// matched-filter beamforming).
pub fn oma_dynamic(g1: f64, g2: f64, rate_target: f64, bandwidth_hz: f64) -> Result<BaselineResult> {
    check_rate(rate_target)?;
    let c1 = (1.0 + g1).log2();
    let tau1 = if rate_target == 0.0 { 0.0 } else { rate_target / c1 };
    if !(tau1 <= 1.0) {
        return Ok(BaselineResult::infeasible(BaselineKind::OmaDynamic));
    }
    Ok(BaselineResult::feasible(
        BaselineKind::OmaDynamic,
        bandwidth_hz * rate_target,
        bandwidth_hz * (1.0 - tau1) * (1.0 + g2).log2(),
        BaselineDetail::TimeSplit { tau1 },
    ))
}

/// TDMA with the frame split evenly.
pub fn oma_fixed(g1: f64, g2: f64, rate_target: f64, bandwidth_hz: f64) -> Result<BaselineResult> {
    check_rate(rate_target)?;
    if 0.5 * (1.0 + g1).log2() < rate_target {
        return Ok(BaselineResult::infeasible(BaselineKind::OmaFixed));
    }
    Ok(BaselineResult::feasible(
        BaselineKind::OmaFixed,
        bandwidth_hz * rate_target,
        bandwidth_hz * 0.5 * (1.0 + g2).log2(),
        BaselineDetail::TimeSplit { tau1: 0.5 },
    ))
}

pub fn oma_dynamic_miso(inst: &MisoInstance, rate_target: f64, bandwidth_hz: f64) -> Result<BaselineResult> {
    let (g1, g2) = inst.matched_filter_gains();
    oma_dynamic(g1, g2, rate_target, bandwidth_hz)
}

pub fn oma_fixed_miso(inst: &MisoInstance, rate_target: f64, bandwidth_hz: f64) -> Result<BaselineResult> {
    let (g1, g2) = inst.matched_filter_gains();
    oma_fixed(g1, g2, rate_target, bandwidth_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oma_dynamic_hand_values() {
        let r = oma_dynamic(3.0, 15.0, 1.0, 1.0).unwrap();
        assert_eq!(r.detail, BaselineDetail::TimeSplit { tau1: 0.5 });
        assert!((r.r2 - 2.0).abs() < 1e-15);
        let r = oma_dynamic(3.0, 15.0, 0.0, 1.0).unwrap();
        assert!((r.r2 - 4.0).abs() < 1e-15);
        let r = oma_dynamic(3.0, 15.0, 2.0, 1.0).unwrap();
        assert!(r.feasible && r.r2.abs() < 1e-15);
        assert!(!oma_dynamic(3.0, 15.0, 2.0 + 1e-9, 1.0).unwrap().feasible);
    }

    #[test]
    fn oma_fixed_boundary() {
        assert!(oma_fixed(3.0, 15.0, 1.0, 1.0).unwrap().feasible);
        assert!(!oma_fixed(3.0, 15.0, 1.0 + 1e-12, 1.0).unwrap().feasible);
        let r = oma_fixed(0.0, 15.0, 0.0, 1.0).unwrap();
        assert!(r.feasible && (r.r2 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn noncoop_siso_saturates_at_gamma_equal_h1() {
        let s = SisoInstance::new(4.0, 9.0, 1.0).unwrap();
        assert_eq!(noncoop_alpha(&s, 4.0), Some(1.0));
        let r = noncoop_noma_siso(&s, 4.0, 1.0).unwrap();
        assert!(r.r2.abs() < 1e-15);
        assert!(noncoop_alpha(&s, 1e-12).unwrap() < 1e-11);
    }

    #[test]
    fn noncoop_siso_binding_user_meets_target_exactly() {
        let s = SisoInstance::new(3.0, 20.0, 1.0).unwrap();
        let g = 1.5;
        let a = noncoop_alpha(&s, g).unwrap();
        let sinr = |h: f64| a * h / ((1.0 - a) * h + 1.0);
        assert!((sinr(3.0).min(sinr(20.0)) - g).abs() < 1e-12);
        assert!(sinr(3.0).min(sinr(20.0)) >= g - 1e-12);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(oma_fixed(1.0, 1.0, -1.0, 1.0).is_err());
        let s = SisoInstance::new(1.0, 1.0, 1.0).unwrap();
        assert!(noncoop_noma_siso(&s, f64::NAN, 1.0).is_err());
    }
}
