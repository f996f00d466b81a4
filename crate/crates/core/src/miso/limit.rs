//! Largest SINR target user 1 can be given at all.
//!
//! Moving `W2` into `W1` never breaks feasibility, so the question reduces to
//! a single covariance `W`. With `a = Tr(H1 W)` and `b = Tr(H2 W)` the
//! cooperative scheme can serve `γ` iff some `β` gives `(1 − β) b ≥ γ` and
//! `a + β g b ≥ γ`, i.e. iff `min(b, (a + g b) / (1 + g)) ≥ γ`. Without the
//! relay the condition is `min(a, b) ≥ γ`. Both max-min problems are SDPs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{solve_conic, trace_product, HermitianVar, SdrMatrices};
use crate::conic::{AffineExpr, ConicProblem, SolverSettings};
use crate::error::Result;
use crate::system::MisoInstance;

/// Relative margin above the computed limit before a target is declared
/// infeasible.
pub(crate) const LIMIT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GammaLimit {
    pub gamma: f64,
    /// Maximizing covariance, `Tr W ≤ 1`.
    pub w: DMatrix<Complex64>,
    pub cooperative: bool,
}

/// `None` if the SDP could not be solved.
pub fn max_feasible_gamma(
    inst: &MisoInstance,
    cooperative: bool,
    settings: &SolverSettings,
) -> Result<Option<GammaLimit>> {
    let sdr = SdrMatrices::new(inst);
    let n = inst.antennas();
    // Rows in units of the weak user's gain.
    let unit = sdr.s1.min(sdr.s2);
    let h1 = sdr.h1.map(|z| z / unit);
    let h2 = sdr.h2.map(|z| z / unit);
    let mut p = ConicProblem::new();
    let t = p.add_var("t");
    let w = HermitianVar::new(&mut p, "W", n);
    p.maximize(AffineExpr::var(t));
    p.add_nonneg("user 2", w.trace_with(&h2, 1.0).plus(-1.0, t));
    let g = inst.g;
    let user1 = if cooperative {
        w.trace_with(&h1, 1.0 / (1.0 + g))
            .plus_expr(1.0, &w.trace_with(&h2, g / (1.0 + g)))
    } else {
        w.trace_with(&h1, 1.0)
    };
    p.add_nonneg("user 1", user1.plus(-1.0, t));
    p.add_nonneg("power", AffineExpr::constant(1.0).plus_expr(-1.0, &w.trace()));
    w.add_psd(&mut p, "W psd");
    let sol = solve_conic(&p, settings)?;
    if !sol.is_usable() {
        log::debug!("max-min gain SDP ended with {:?}", sol.status);
        return Ok(None);
    }
    let wm = w.value(&sol.primal);
    let a = trace_product(&sdr.h1, &wm);
    let b = trace_product(&sdr.h2, &wm);
    let gamma = if cooperative {
        b.min((a + g * b) / (1.0 + g))
    } else {
        a.min(b)
    };
    Ok(Some(GammaLimit {
        gamma: gamma.max(0.0),
        w: wm,
        cooperative,
    }))
}

/// A point `(β, x, W1, W2 = 0)` feasible for the cooperative problem at
/// `gamma1 ≤ limit.gamma`.
pub(crate) fn limit_point(inst: &MisoInstance, limit: &GammaLimit, gamma1: f64) -> (f64, f64, DMatrix<Complex64>) {
    let a = trace_product(&inst.h1_outer(), &limit.w);
    let b = trace_product(&inst.h2_outer(), &limit.w);
    let beta = if a >= gamma1 {
        0.0
    } else {
        ((gamma1 - a) / (inst.g * b)).clamp(0.0, 1.0)
    };
    (beta, a.min(gamma1), limit.w.clone())
}
