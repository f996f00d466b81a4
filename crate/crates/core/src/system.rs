//! Domain types for the two-user cooperative SWIPT-NOMA downlink and the
//! SINR / rate bookkeeping shared by every solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a power in dBm to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub transmit_power_dbm: f64,
    pub noise_power_dbm_user1: f64,
    pub noise_power_dbm_user2: f64,
    /// Linear SINR target of user 1.
    pub sinr_target_gamma1: f64,
    pub antenna_count_nt: usize,
    pub rician_k: f64,
    pub pathloss_exp_user1: f64,
    pub pathloss_exp_user2: f64,
    /// Exponent of the user 2 -> user 1 relay link.
    pub pathloss_exp_relay: f64,
    pub bandwidth_hz: f64,
    pub stage_fraction_tau: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            transmit_power_dbm: 30.0,
            noise_power_dbm_user1: -90.0,
            noise_power_dbm_user2: -90.0,
            sinr_target_gamma1: 1.0,
            antenna_count_nt: 2,
            rician_k: 3.0,
            pathloss_exp_user1: 4.0,
            pathloss_exp_user2: 2.0,
            pathloss_exp_relay: 2.0,
            bandwidth_hz: 1e6,
            stage_fraction_tau: 0.5,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.sinr_target_gamma1 > 0.0) || !self.sinr_target_gamma1.is_finite() {
            return bad("sinr_target_gamma1 must be positive");
        }
        if self.antenna_count_nt == 0 {
            return bad("antenna_count_nt must be at least 1");
        }
        if !(self.stage_fraction_tau > 0.0 && self.stage_fraction_tau < 1.0) {
            return bad("stage_fraction_tau must lie in (0, 1)");
        }
        if !(self.rician_k >= 0.0) {
            return bad("rician_k must be nonnegative");
        }
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth_hz must be positive");
        }
        for (name, v) in [
            ("transmit_power_dbm", self.transmit_power_dbm),
            ("noise_power_dbm_user1", self.noise_power_dbm_user1),
            ("noise_power_dbm_user2", self.noise_power_dbm_user2),
            ("pathloss_exp_user1", self.pathloss_exp_user1),
            ("pathloss_exp_user2", self.pathloss_exp_user2),
            ("pathloss_exp_relay", self.pathloss_exp_relay),
        ] {
            if !v.is_finite() {
                return bad(&format!("{name} must be finite"));
            }
        }
        Ok(())
    }

    /// `P_s / σ²` for user `i` (1 or 2), linear.
    pub fn snr_scale(&self, user: usize) -> f64 {
        let noise = if user == 1 {
            self.noise_power_dbm_user1
        } else {
            self.noise_power_dbm_user2
        };
        dbm_to_mw(self.transmit_power_dbm) / dbm_to_mw(noise)
    }
}

/// Normalized scalar gains of one single-antenna realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoInstance {
    pub h1: f64,
    pub h2: f64,
    pub g: f64,
}

impl SisoInstance {
    pub fn new(h1: f64, h2: f64, g: f64) -> Result<Self> {
        for (name, v) in [("h1", h1), ("h2", h2), ("g", g)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { h1, h2, g })
    }
}

/// Normalized channel vectors of one multi-antenna realization.
#[derive(Debug, Clone, PartialEq)]
pub struct MisoInstance {
    pub h1: DVector<Complex64>,
    pub h2: DVector<Complex64>,
    pub g: f64,
}

impl MisoInstance {
    pub fn new(h1: DVector<Complex64>, h2: DVector<Complex64>, g: f64) -> Result<Self> {
        if h1.len() != h2.len() || h1.is_empty() {
            return Err(Error::Dimension(format!(
                "channel vectors have lengths {} and {}",
                h1.len(),
                h2.len()
            )));
        }
        if h1
            .iter()
            .chain(h2.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite channel entry".into()));
        }
        if !(h1.norm() > 0.0 && h2.norm() > 0.0) {
            return Err(Error::InvalidParameter("channel vectors must be nonzero".into()));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "relay gain must be nonnegative, got {g}"
            )));
        }
        Ok(Self { h1, h2, g })
    }

    /// Wraps scalar gains as a one-antenna instance with real channels.
    pub fn from_siso(s: &SisoInstance) -> Self {
        Self {
            h1: DVector::from_element(1, Complex64::new(s.h1.sqrt(), 0.0)),
            h2: DVector::from_element(1, Complex64::new(s.h2.sqrt(), 0.0)),
            g: s.g,
        }
    }

    /// Collapses a one-antenna instance to scalar power gains.
    pub fn to_siso(&self) -> Result<SisoInstance> {
        if self.antennas() != 1 {
            return Err(Error::Dimension(format!(
                "expected a single-antenna instance, got {} antennas",
                self.antennas()
            )));
        }
        SisoInstance::new(self.h1[0].norm_sqr(), self.h2[0].norm_sqr(), self.g)
    }

    pub fn antennas(&self) -> usize {
        self.h1.len()
    }

    /// `H1 = h1 h1ᴴ`.
    pub fn h1_outer(&self) -> DMatrix<Complex64> {
        &self.h1 * self.h1.adjoint()
    }

    pub fn h2_outer(&self) -> DMatrix<Complex64> {
        &self.h2 * self.h2.adjoint()
    }

    /// Gains seen by matched-filter single-user beamforming.
    pub fn matched_filter_gains(&self) -> (f64, f64) {
        (self.h1.norm_squared(), self.h2.norm_squared())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    /// SCA converged to a stationary point.
    Stationary,
    Infeasible,
    MaxIter,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        !matches!(self, SolveStatus::Infeasible)
    }
}

#[derive(Debug, Clone)]
pub struct MisoSolution {
    pub w1: DVector<Complex64>,
    pub w2: DVector<Complex64>,
    pub w1_mat: DMatrix<Complex64>,
    pub w2_mat: DMatrix<Complex64>,
    pub beta: f64,
    /// SNR of user 2, `(1-β) Tr(H2 W2)`.
    pub objective: f64,
    pub iterations: usize,
    pub eig_ratio_lambda: f64,
    pub status: SolveStatus,
    /// Auxiliary split of the user-1 SINR between the direct and relay links.
    pub x: f64,
    /// False when beamformer extraction produced no P1-feasible candidate.
    pub extraction_ok: bool,
}

impl MisoSolution {
    pub fn infeasible(nt: usize) -> Self {
        Self {
            w1: DVector::zeros(nt),
            w2: DVector::zeros(nt),
            w1_mat: DMatrix::zeros(nt, nt),
            w2_mat: DMatrix::zeros(nt, nt),
            beta: 0.0,
            objective: 0.0,
            iterations: 0,
            eig_ratio_lambda: f64::NAN,
            status: SolveStatus::Infeasible,
            x: 0.0,
            extraction_ok: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoSolution {
    pub alpha: f64,
    pub beta: f64,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

fn check_beta(beta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(Error::BetaOutOfRange(beta))
    }
}

fn check_len(inst: &MisoInstance, w: &DVector<Complex64>) -> Result<()> {
    if w.len() != inst.antennas() {
        return Err(Error::Dimension(format!(
            "beamformer has length {}, expected {}",
            w.len(),
            inst.antennas()
        )));
    }
    Ok(())
}

/// `|hᴴ w|²`.
pub fn gain(h: &DVector<Complex64>, w: &DVector<Complex64>) -> f64 {
    h.dotc(w).norm_sqr()
}

/// Direct-link SINR of `x1` at user 1 during the first stage.
pub fn sinr_stage1_user1(inst: &MisoInstance, w1: &DVector<Complex64>, w2: &DVector<Complex64>) -> Result<f64> {
    check_len(inst, w1)?;
    check_len(inst, w2)?;
    Ok(gain(&inst.h1, w1) / (gain(&inst.h1, w2) + 1.0))
}

/// MRC combination of the direct SINR and the relayed SNR at user 1.
pub fn equivalent_sinr_user1(
    inst: &MisoInstance,
    w1: &DVector<Complex64>,
    w2: &DVector<Complex64>,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    let direct = sinr_stage1_user1(inst, w1, w2)?;
    Ok(direct + inst.g * harvested_transmit_power(inst, w1, w2, beta)?)
}

/// Relay transmit power of user 2 in normalized units (unit conversion efficiency).
pub fn harvested_transmit_power(
    inst: &MisoInstance,
    w1: &DVector<Complex64>,
    w2: &DVector<Complex64>,
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    check_len(inst, w1)?;
    check_len(inst, w2)?;
    Ok(beta * (gain(&inst.h2, w1) + gain(&inst.h2, w2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub r1: f64,
    pub r2: f64,
    pub rsum: f64,
}

/// Rates of the two-stage protocol in bits/s; each stage carries the pre-log
/// `stage_fraction_tau`.
pub fn rates_from_sinr(gamma1: f64, snr2: f64, params: &SystemParams) -> Rates {
    let k = params.stage_fraction_tau * params.bandwidth_hz;
    let r1 = k * (1.0 + gamma1.max(0.0)).log2();
    let r2 = k * (1.0 + snr2.max(0.0)).log2();
    Rates { r1, r2, rsum: r1 + r2 }
}

/// How a user-1 target rate maps to SINR targets and how rates are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// Every NOMA strategy is credited with a full pre-log and shares the
    /// target `γ = 2^R − 1`.
    #[default]
    PerSlot,
    /// The cooperative scheme pays a 1/2 pre-log for its two stages
    /// (`γ1 = 2^(2R) − 1`), single-slot NOMA does not.
    TwoSlot,
}

impl RateConvention {
    /// Pre-log of the cooperative scheme.
    pub fn coop_prelog(self) -> f64 {
        match self {
            RateConvention::PerSlot => 1.0,
            RateConvention::TwoSlot => 0.5,
        }
    }

    /// SINR target of the cooperative scheme for a user-1 rate in bits/s/Hz.
    pub fn coop_gamma(self, rate: f64) -> f64 {
        (rate / self.coop_prelog()).exp2() - 1.0
    }

    /// SINR target of single-slot NOMA.
    pub fn single_slot_gamma(self, rate: f64) -> f64 {
        rate.exp2() - 1.0
    }

    /// Inverse of [`coop_gamma`](Self::coop_gamma).
    pub fn coop_rate(self, gamma: f64) -> f64 {
        self.coop_prelog() * (1.0 + gamma).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// SIC at user 2: `SINR − γ1`.
    pub sic_user2: f64,
    /// QoS at user 1: equivalent SINR − γ1.
    pub qos_user1: f64,
    /// `1 − (‖w1‖² + ‖w2‖²)`.
    pub power: f64,
    /// `min(β, 1 − β)`.
    pub split: f64,
}

impl FeasibilityReport {
    pub fn worst(&self) -> f64 {
        self.sic_user2.min(self.qos_user1).min(self.power).min(self.split)
    }
}

/// Evaluates every constraint of the original beamforming problem.
pub fn check_p1_feasibility(
    inst: &MisoInstance,
    w1: &DVector<Complex64>,
    w2: &DVector<Complex64>,
    beta: f64,
    gamma1: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    check_beta(beta)?;
    check_len(inst, w1)?;
    check_len(inst, w2)?;
    let a1 = (1.0 - beta) * gain(&inst.h2, w1);
    let a2 = (1.0 - beta) * gain(&inst.h2, w2);
    let sic_user2 = a1 / (a2 + 1.0) - gamma1;
    let qos_user1 = equivalent_sinr_user1(inst, w1, w2, beta)? - gamma1;
    let power = 1.0 - (w1.norm_squared() + w2.norm_squared());
    let split = beta.min(1.0 - beta);
    let mut report = FeasibilityReport {
        feasible: false,
        sic_user2,
        qos_user1,
        power,
        split,
    };
    report.feasible = report.worst() >= -tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn inst(h1: &[Complex64], h2: &[Complex64], g: f64) -> MisoInstance {
        MisoInstance {
            h1: DVector::from_column_slice(h1),
            h2: DVector::from_column_slice(h2),
            g,
        }
    }

    #[test]
    fn matched_filter_sinr() {
        let i = inst(&[c(2.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)], 1.0);
        let w1 = &i.h1 / Complex64::from(i.h1.norm());
        let w2 = DVector::zeros(2);
        assert!((sinr_stage1_user1(&i, &w1, &w2).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(sinr_stage1_user1(&i, &DVector::zeros(2), &w2).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_beam_gives_zero() {
        let i = inst(&[c(1.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)], 1.0);
        let w1 = DVector::from_column_slice(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let w2 = DVector::from_column_slice(&[c(0.7, 0.0), c(0.0, 0.0)]);
        assert_eq!(sinr_stage1_user1(&i, &w1, &w2).unwrap(), 0.0);
    }

    #[test]
    fn relay_contribution_hand_value() {
        let i = inst(&[c(0.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)], 2.0);
        let w1 = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let w2 = DVector::zeros(2);
        assert!((equivalent_sinr_user1(&i, &w1, &w2, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harvested_power_hand_value() {
        let i = inst(&[c(1.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)], 1.0);
        let w1 = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let w2 = DVector::from_column_slice(&[c(0.0, 2f64.sqrt()), c(0.0, 0.0)]);
        let p = harvested_transmit_power(&i, &w1, &w2, 0.4).unwrap();
        assert!((p - 1.2).abs() < 1e-12);
        assert_eq!(harvested_transmit_power(&i, &w1, &w2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rate_examples() {
        let p = SystemParams {
            bandwidth_hz: 1.0,
            ..SystemParams::default()
        };
        let r = rates_from_sinr(1.0, 0.0, &p);
        assert_eq!((r.r1, r.r2, r.rsum), (0.5, 0.0, 0.5));
        assert!((rates_from_sinr(3.0, 3.0, &p).rsum - 2.0).abs() < 1e-12);
        let p = SystemParams {
            bandwidth_hz: 1e6,
            ..SystemParams::default()
        };
        assert!((rates_from_sinr(1.0, 15.0, &p).rsum - 2.5e6).abs() < 1e-6);
    }

    #[test]
    fn feasibility_rejects_bad_beta_and_zero_beams() {
        let i = inst(&[c(1.0, 0.0)], &[c(2.0, 0.0)], 1.0);
        let z = DVector::zeros(1);
        let rep = check_p1_feasibility(&i, &z, &z, 0.5, 1.0, 1e-6).unwrap();
        assert!(!rep.feasible);
        assert!(rep.sic_user2 < 0.0);
        assert!(matches!(
            check_p1_feasibility(&i, &z, &z, 1.5, 1.0, 1e-6),
            Err(Error::BetaOutOfRange(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let i = inst(&[c(1.0, 0.0)], &[c(2.0, 0.0)], 1.0);
        let w = DVector::zeros(2);
        assert!(matches!(sinr_stage1_user1(&i, &w, &w), Err(Error::Dimension(_))));
    }

    #[test]
    fn conventions_round_trip() {
        for conv in [RateConvention::PerSlot, RateConvention::TwoSlot] {
            let g = conv.coop_gamma(1.3);
            assert!((conv.coop_rate(g) - 1.3).abs() < 1e-12);
        }
        assert_eq!(RateConvention::TwoSlot.coop_gamma(0.5), 1.0);
        assert_eq!(RateConvention::PerSlot.coop_gamma(1.0), 1.0);
    }

    #[test]
    fn instance_validation() {
        assert!(SisoInstance::new(1.0, 0.0, 1.0).is_err());
        assert!(SisoInstance::new(1.0, 2.0, 3.0).is_ok());
        let z = DVector::from_element(2, c(0.0, 0.0));
        let h = DVector::from_element(2, c(1.0, 0.0));
        assert!(MisoInstance::new(z, h.clone(), 1.0).is_err());
        assert!(MisoInstance::new(h.clone(), h, -1.0).is_err());
    }
}
