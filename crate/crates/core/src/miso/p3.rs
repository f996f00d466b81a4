use nalgebra::DMatrix;
use num_complex::Complex64;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    check_gamma, extract_beamformers, solve_conic, trace_product, w2_scale, HermitianVar, MisoOptions, SdrMatrices,
};
use crate::conic::{AffineExpr, ConicProblem, ConicStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::system::{MisoInstance, MisoSolution, SolveStatus};

/// The linear SDP obtained by fixing the splitting ratio `beta` and the
/// direct-link SINR share `x` of user 1.
#[derive(Debug, Clone)]
pub struct P3 {
    pub problem: ConicProblem,
    pub w1: HermitianVar,
    pub w2: HermitianVar,
    /// Multiplier from the conic objective to the SNR of user 2.
    pub objective_scale: f64,
}

/// Solution of one fixed-(β, x) subproblem.
#[derive(Debug, Clone)]
pub struct P3Point {
    pub beta: f64,
    pub x: f64,
    pub status: ConicStatus,
    /// SNR of user 2; 0 unless `status` is optimal.
    pub objective: f64,
    pub w1: DMatrix<Complex64>,
    pub w2: DMatrix<Complex64>,
    pub kkt_residual: f64,
}

/// Builds the SDP in `(W1, W2)`. Rows are written in normalized units
/// (`Ĥ_i = H_i / ‖h_i‖²`) except the relay row, which is in SINR units, and
/// `W2` is stored scaled by `1 / (1 + γ1)`.
pub fn build_p3(inst: &MisoInstance, gamma1: f64, beta: f64, x: f64) -> Result<P3> {
    check_gamma(gamma1)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!("x must be nonnegative, got {x}")));
    }
    let sdr = SdrMatrices::new(inst);
    let (h1, h2) = (sdr.h1_hat(), sdr.h2_hat());
    let n = inst.antennas();
    let mut p = ConicProblem::new();
    let w1 = HermitianVar::new(&mut p, "W1", n);
    let c2 = w2_scale(gamma1);
    let w2 = HermitianVar::with_scale(&mut p, "W2", n, c2);
    let keep = 1.0 - beta;

    p.maximize(w2.trace_with(&h2, keep / c2));
    p.add_nonneg(
        "sic at user 2",
        w1.trace_with(&h2, keep)
            .plus_expr(1.0, &w2.trace_with(&h2, -gamma1 * keep))
            .plus_const(-gamma1 / sdr.s2),
    );
    p.add_nonneg(
        "direct sinr share",
        w1.trace_with(&h1, 1.0)
            .plus_expr(1.0, &w2.trace_with(&h1, -x))
            .plus_const(-x / sdr.s1),
    );
    let relay = beta * inst.g * sdr.s2;
    p.add_nonneg(
        "relay sinr share",
        w1.trace_with(&h2, relay)
            .plus_expr(1.0, &w2.trace_with(&h2, relay))
            .plus_const(x - gamma1),
    );
    p.add_nonneg(
        "power",
        AffineExpr::constant(1.0)
            .plus_expr(-1.0, &w1.trace())
            .plus_expr(-1.0, &w2.trace()),
    );
    w1.add_psd(&mut p, "W1 psd");
    w2.add_psd(&mut p, "W2 psd");
    Ok(P3 {
        problem: p,
        w1,
        w2,
        objective_scale: sdr.s2 * c2,
    })
}

/// Quick necessary conditions; `false` proves the subproblem infeasible.
pub(crate) fn p3_may_be_feasible(inst: &MisoInstance, gamma1: f64, beta: f64, x: f64) -> bool {
    let s2 = inst.h2.norm_squared();
    // The SIC row needs (1-β)·s2 > γ1 and the relay row βg·s2 ≥ γ1 − x.
    (1.0 - beta) * s2 > gamma1 && beta * inst.g * s2 >= gamma1 - x
}

pub fn solve_p3(inst: &MisoInstance, gamma1: f64, beta: f64, x: f64, settings: &SolverSettings) -> Result<P3Point> {
    let p3 = build_p3(inst, gamma1, beta, x)?;
    let n = inst.antennas();
    let sol = solve_conic(&p3.problem, settings)?;
    let mut point = P3Point {
        beta,
        x,
        status: sol.status,
        objective: 0.0,
        w1: DMatrix::zeros(n, n),
        w2: DMatrix::zeros(n, n),
        kkt_residual: sol.residuals.max(),
    };
    if sol.is_optimal() {
        point.w1 = p3.w1.value(&sol.primal);
        point.w2 = p3.w2.value(&sol.primal);
        point.objective = (1.0 - beta) * trace_product(&inst.h2_outer(), &point.w2);
    }
    Ok(point)
}

/// Packs a solved subproblem into a [`MisoSolution`], extracting rank-one
/// beamformers.
pub(crate) fn point_solution(
    inst: &MisoInstance,
    gamma1: f64,
    pt: &P3Point,
    opts: &MisoOptions,
    iterations: usize,
    status: SolveStatus,
) -> MisoSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.extraction_seed);
    let ex = extract_beamformers(
        inst,
        &pt.w1,
        &pt.w2,
        pt.beta,
        gamma1,
        &mut rng,
        opts.randomizations,
        opts.feasibility_tol,
    );
    MisoSolution {
        w1: ex.w1,
        w2: ex.w2,
        w1_mat: pt.w1.clone(),
        w2_mat: pt.w2.clone(),
        beta: pt.beta,
        objective: pt.objective,
        iterations,
        eig_ratio_lambda: ex.eig_ratio,
        status,
        x: pt.x,
        extraction_ok: ex.feasible,
    }
}

/// The `β = 0` corner: no energy harvesting, so user 1 relies on the direct
/// link alone (`x = γ1`).
pub fn solve_direct_only(inst: &MisoInstance, gamma1: f64, opts: &MisoOptions) -> Result<MisoSolution> {
    check_gamma(gamma1)?;
    if !p3_may_be_feasible(inst, gamma1, 0.0, gamma1) {
        return Ok(MisoSolution::infeasible(inst.antennas()));
    }
    let pt = solve_p3(inst, gamma1, 0.0, gamma1, &opts.conic)?;
    if pt.status != ConicStatus::Optimal {
        return Ok(MisoSolution::infeasible(inst.antennas()));
    }
    Ok(point_solution(inst, gamma1, &pt, opts, 1, SolveStatus::Optimal))
}
