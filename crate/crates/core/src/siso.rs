//! Single-antenna design: closed-form power allocation for a fixed splitting
//! ratio and golden-section search over the ratio.

use crate::error::{Error, Result};
use crate::system::{SisoInstance, SisoSolution, SolveStatus};

/// Contraction ratio of the golden-section search.
pub const GOLDEN_RATIO: f64 = 0.618;
pub const DEFAULT_GSS_EPS: f64 = 1e-4;

/// Relative slack allowed when re-checking the closed-form allocation.
const CLOSED_FORM_TOL: f64 = 1e-9;
/// Rounding of `(1 − β) h2` in units of `h2`. Closer than this to `β_max`
/// the SIC row is tight to working precision.
const SIC_ROUNDING: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaInterval {
    pub beta_min: f64,
    pub beta_max: f64,
    pub feasible: bool,
}

impl BetaInterval {
    pub fn len(&self) -> f64 {
        self.beta_max - self.beta_min
    }
}

pub fn feasible_beta_interval(inst: &SisoInstance, gamma1: f64) -> BetaInterval {
    let beta_min = (gamma1 - inst.h1).max(0.0) / (inst.h2 * inst.g);
    let beta_max = 1.0 - gamma1 / inst.h2;
    BetaInterval {
        beta_min,
        beta_max,
        feasible: beta_min <= beta_max && beta_max >= 0.0,
    }
}

/// `A(β)`: smallest α meeting the SIC constraint at user 2.
pub fn coefficient_a(beta: f64, inst: &SisoInstance, gamma1: f64) -> f64 {
    let e = (1.0 - beta) * inst.h2;
    gamma1 * (e + 1.0) / ((1.0 + gamma1) * e)
}

/// `B(β)`: smallest α meeting the user-1 QoS constraint, valid for
/// `β < γ1 / (h2 g)`.
pub fn coefficient_b(beta: f64, inst: &SisoInstance, gamma1: f64) -> f64 {
    let q = beta * inst.h2 * inst.g;
    (gamma1 - q) * (inst.h1 + 1.0) / ((gamma1 + 1.0 - q) * inst.h1)
}

/// SINR of `x1` decoded at user 2.
pub fn sic_sinr(alpha: f64, beta: f64, inst: &SisoInstance) -> f64 {
    let e = (1.0 - beta) * inst.h2;
    alpha * e / ((1.0 - alpha) * e + 1.0)
}

/// Equivalent SINR at user 1 after combining the relayed copy.
pub fn qos_sinr(alpha: f64, beta: f64, inst: &SisoInstance) -> f64 {
    alpha * inst.h1 / ((1.0 - alpha) * inst.h1 + 1.0) + beta * inst.h2 * inst.g
}

pub fn objective(alpha: f64, beta: f64, inst: &SisoInstance) -> f64 {
    (1.0 - alpha) * (1.0 - beta) * inst.h2
}

fn constraints_hold(alpha: f64, beta: f64, inst: &SisoInstance, gamma1: f64, tol: f64) -> bool {
    let margin = tol * gamma1.max(1.0);
    sic_sinr(alpha, beta, inst) >= gamma1 - margin && qos_sinr(alpha, beta, inst) >= gamma1 - margin
}

/// Optimal power fraction of `x1` for a fixed `beta`, or `None` when no α in
/// `[0, 1]` is feasible.
pub fn optimal_alpha(beta: f64, inst: &SisoInstance, gamma1: f64) -> Result<Option<f64>> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if ((1.0 - beta) * inst.h2 - gamma1).abs() <= SIC_ROUNDING * inst.h2 {
        let margin = CLOSED_FORM_TOL * gamma1.max(1.0);
        return Ok((qos_sinr(1.0, beta, inst) >= gamma1 - margin).then_some(1.0));
    }
    let a = coefficient_a(beta, inst, gamma1);
    let alpha = if beta * inst.h2 * inst.g >= gamma1 {
        a.min(1.0)
    } else {
        a.max(coefficient_b(beta, inst, gamma1)).min(1.0)
    };
    let alpha = alpha.max(0.0);
    Ok(constraints_hold(alpha, beta, inst, gamma1, CLOSED_FORM_TOL).then_some(alpha))
}

/// Inner optimal value `h(β)`; `-∞` outside the feasible set.
pub fn evaluate_h(beta: f64, inst: &SisoInstance, gamma1: f64) -> f64 {
    match optimal_alpha(beta, inst, gamma1) {
        Ok(Some(alpha)) => objective(alpha, beta, inst),
        _ => f64::NEG_INFINITY,
    }
}

/// Bracket searched by the golden-section method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchInterval {
    /// The feasible interval `[β_min, β_max]`.
    #[default]
    Feasible,
    /// `[0, 1]`, relying on the `-∞` sentinel outside feasibility.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GssOptions {
    pub eps: f64,
    pub ratio: f64,
    pub interval: SearchInterval,
}

impl Default for GssOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_GSS_EPS,
            ratio: GOLDEN_RATIO,
            interval: SearchInterval::Feasible,
        }
    }
}

/// One bracket update of the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GssStep {
    pub iteration: usize,
    pub b_min: f64,
    pub b_max: f64,
    /// `h` at the midpoint of the bracket after this step.
    pub objective: f64,
}

pub fn gss_solve(inst: &SisoInstance, gamma1: f64, eps: f64) -> SisoSolution {
    gss_solve_traced(
        inst,
        gamma1,
        &GssOptions {
            eps,
            ..GssOptions::default()
        },
    )
    .0
}

pub fn gss_solve_traced(inst: &SisoInstance, gamma1: f64, opts: &GssOptions) -> (SisoSolution, Vec<GssStep>) {
    let interval = feasible_beta_interval(inst, gamma1);
    let infeasible = SisoSolution {
        alpha: 1.0,
        beta: 0.0,
        objective: 0.0,
        status: SolveStatus::Infeasible,
        iterations: 0,
    };
    if !interval.feasible {
        return (infeasible, Vec::new());
    }
    let (mut lo, mut hi) = match opts.interval {
        SearchInterval::Feasible => (interval.beta_min, interval.beta_max),
        SearchInterval::Unit => (0.0, 1.0),
    };
    let h = |b: f64| evaluate_h(b.min(1.0 - f64::EPSILON), inst, gamma1);
    let a = opts.ratio;
    let mut trace = Vec::new();
    let mut iterations = 0;
    // Best point evaluated so far. Near a kink of `h` the last midpoint can
    // sit on a steep flank while an earlier probe is closer to the top.
    let mut best = (0.5 * (lo + hi), h(0.5 * (lo + hi)));
    let mut keep = |b: f64, v: f64| {
        if v > best.1 {
            best = (b, v);
        }
    };
    while hi - lo > opts.eps {
        let b1 = lo + (1.0 - a) * (hi - lo);
        let b2 = lo + a * (hi - lo);
        let (v1, v2) = (h(b1), h(b2));
        keep(b1, v1);
        keep(b2, v2);
        if v1 >= v2 {
            hi = b2;
        } else {
            lo = b1;
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let v = h(mid);
        keep(mid, v);
        trace.push(GssStep {
            iteration: iterations,
            b_min: lo,
            b_max: hi,
            objective: v,
        });
    }
    let beta = best
        .0
        .clamp(interval.beta_min, interval.beta_max.max(interval.beta_min));
    match optimal_alpha(beta.min(1.0 - f64::EPSILON), inst, gamma1) {
        Ok(Some(alpha)) => (
            SisoSolution {
                alpha,
                beta,
                objective: objective(alpha, beta, inst),
                status: SolveStatus::Optimal,
                iterations,
            },
            trace,
        ),
        _ => (
            SisoSolution {
                iterations,
                ..infeasible
            },
            trace,
        ),
    }
}

/// Upper bound on the number of bracket updates for a given start length.
pub fn gss_iteration_bound(len0: f64, eps: f64) -> usize {
    if len0 <= eps {
        0
    } else {
        ((eps / len0).ln() / GOLDEN_RATIO.ln()).ceil() as usize
    }
}

/// Exhaustive maximization of the objective over a `grid_n × grid_n` lattice
/// on `[0, 1]²`. Returns `None` when no lattice point is feasible.
pub fn brute_force_siso(inst: &SisoInstance, gamma1: f64, grid_n: usize) -> Option<SisoSolution> {
    assert!(grid_n >= 2, "grid needs at least two points");
    let step = 1.0 / (grid_n - 1) as f64;
    let mut best: Option<SisoSolution> = None;
    for j in 0..grid_n {
        let beta = j as f64 * step;
        for i in 0..grid_n {
            let alpha = i as f64 * step;
            if sic_sinr(alpha, beta, inst) < gamma1 || qos_sinr(alpha, beta, inst) < gamma1 {
                continue;
            }
            let v = objective(alpha, beta, inst);
            if best.is_none_or(|b| v > b.objective) {
                best = Some(SisoSolution {
                    alpha,
                    beta,
                    objective: v,
                    status: SolveStatus::Optimal,
                    iterations: 0,
                });
            }
        }
    }
    best
}

/// `f(β) = Bβ − B − β`, the surrogate whose monotonicity mirrors `h` while
/// the QoS constraint is active.
pub fn f_surrogate(beta: f64, inst: &SisoInstance, gamma1: f64) -> f64 {
    let b = coefficient_b(beta, inst, gamma1);
    b * beta - b - beta
}

/// Closed-form derivative of [`f_surrogate`].
pub fn f_prime(beta: f64, inst: &SisoInstance, gamma1: f64) -> Result<f64> {
    let (h1, q) = (inst.h1, inst.h2 * inst.g);
    let den = (gamma1 - beta * q + 1.0).powi(2) * h1 * h1;
    if den == 0.0 {
        return Err(Error::InvalidParameter("derivative denominator vanishes".into()));
    }
    let num = (q * q * beta * beta - 2.0 * q * (gamma1 + 1.0) * beta + q + gamma1 * gamma1 + gamma1) * h1 * (h1 + 1.0);
    Ok(num / den - 1.0)
}

/// Numerator minus denominator of the first term of [`f_prime`].
pub fn delta_sign(beta: f64, inst: &SisoInstance, gamma1: f64) -> f64 {
    let (h1, q) = (inst.h1, inst.h2 * inst.g);
    h1 * (q * beta - (gamma1 + 1.0)).powi(2) + h1 * (q - (gamma1 + 1.0)) * (h1 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canned() -> SisoInstance {
        SisoInstance::new(1.0, 10.0, 2.0).unwrap()
    }

    #[test]
    fn interval_hand_values() {
        let i = feasible_beta_interval(&canned(), 1.0);
        assert_eq!(i.beta_min, 0.0);
        assert!((i.beta_max - 0.9).abs() < 1e-15);
        assert!(i.feasible);
        let tight = SisoInstance::new(0.5, 1.0, 3.0).unwrap();
        let i = feasible_beta_interval(&tight, 1.0);
        assert_eq!(i.beta_max, 0.0);
        assert!(!i.feasible);
    }

    #[test]
    fn closed_form_hand_value() {
        let a = optimal_alpha(0.5, &canned(), 1.0).unwrap().unwrap();
        assert!((a - 0.6).abs() < 1e-15);
        assert!((evaluate_h(0.5, &canned(), 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn beta_one_rejected() {
        assert!(optimal_alpha(1.0, &canned(), 1.0).is_err());
        assert_eq!(evaluate_h(1.0, &canned(), 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn alpha_vanishes_with_target() {
        let a = optimal_alpha(0.3, &canned(), 1e-9).unwrap().unwrap();
        assert!(a < 1e-8);
    }

    #[test]
    fn endpoint_is_zero() {
        let i = feasible_beta_interval(&canned(), 1.0);
        assert!(evaluate_h(i.beta_max, &canned(), 1.0).abs() < 1e-9);
    }

    #[test]
    fn short_interval_returns_midpoint() {
        // β_max = 1 − γ/h2 with h2 barely above γ gives a tiny interval.
        let inst = SisoInstance::new(5.0, 1.00001, 1.0).unwrap();
        let sol = gss_solve(&inst, 1.0, 1e-4);
        assert_eq!(sol.iterations, 0);
        let i = feasible_beta_interval(&inst, 1.0);
        assert!((sol.beta - 0.5 * (i.beta_min + i.beta_max)).abs() < 1e-15);
    }

    #[test]
    fn gss_matches_brute_force_on_canned() {
        let sol = gss_solve(&canned(), 1.0, 1e-4);
        let bf = brute_force_siso(&canned(), 1.0, 2001).unwrap();
        assert!(sol.objective >= bf.objective * (1.0 - 1e-3));
        assert!((sol.objective - bf.objective).abs() / sol.objective < 1e-3);
    }

    #[test]
    fn infeasible_has_no_grid_point() {
        let inst = SisoInstance::new(2.0, 0.5, 1.0).unwrap();
        assert!(brute_force_siso(&inst, 1.0, 101).is_none());
        assert_eq!(gss_solve(&inst, 1.0, 1e-4).status, SolveStatus::Infeasible);
    }

    #[test]
    fn delta_vanishes_at_double_root() {
        // h2 g = γ + 1 and β = 1 kill both terms.
        let inst = SisoInstance::new(1.3, 4.0, 0.5).unwrap();
        assert!(delta_sign(1.0, &inst, 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_prime_at_zero_relay_gain() {
        let inst = SisoInstance::new(1.5, 4.0, 1e-300).unwrap();
        let expect = (1.0 + 1.0) * (1.5 + 1.0) / (4.0 * 1.5) - 1.0;
        assert!((f_prime(0.3, &inst, 1.0).unwrap() - expect).abs() < 1e-12);
    }
}
