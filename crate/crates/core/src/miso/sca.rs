use nalgebra::DMatrix;
use num_complex::Complex64;

use super::limit::{limit_point, max_feasible_gamma, LIMIT_SLACK};
use super::p3::{p3_may_be_feasible, point_solution, solve_direct_only, solve_p3, P3Point};
use super::{check_gamma, solve_conic, trace_product, w2_scale, HermitianVar, MisoOptions, SdrMatrices};
use crate::conic::{AffineExpr, ConeSpec, ConicProblem, ConicStatus, Var};
use crate::error::{Error, Result};
use crate::system::{MisoInstance, MisoSolution, SolveStatus};

/// Upper end of the splitting ratio inside the convex program.
const BETA_CAP: f64 = 1.0 - 1e-9;
const X_FLOOR: f64 = 1e-12;
const AGM_MIN: f64 = 1e-6;
const AGM_MAX: f64 = 1e6;
const V_FLOOR: f64 = 1e-6;

/// Points at which the nonconvex terms are linearized, in the scaled units
/// of the convex program: `v̂² = (1 − β)Tr(Ĥ2 W2) / c2`,
/// `t̂² = β Tr(Ĥ2 (W1 + W2))` and `â = sqrt(Tr(Ĥ1 W2) / (c2 x̂))`, where
/// `c2 = 1 / (1 + γ1)` and `x̂ = x / γ1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    pub v_hat: f64,
    pub t: f64,
    pub a_hat: f64,
}

impl Linearization {
    /// Point where every surrogate is tight at `(β, x, W1, W2)`.
    pub fn at(
        inst: &MisoInstance,
        gamma1: f64,
        beta: f64,
        x: f64,
        w1: &DMatrix<Complex64>,
        w2: &DMatrix<Complex64>,
    ) -> Self {
        tight_point(&SdrMatrices::new(inst), inst.g, gamma1, beta, x, w1, w2)
    }
}

/// Unit of the `x` variable.
fn x_scale(gamma1: f64) -> f64 {
    if gamma1 > 0.0 {
        gamma1
    } else {
        1.0
    }
}

#[derive(Debug, Clone)]
pub struct P5Vars {
    pub u: Var,
    pub v: Var,
    pub t: Var,
    pub x: Var,
    pub beta: Var,
    pub w1: HermitianVar,
    pub w2: HermitianVar,
}

/// One accepted SCA iterate.
#[derive(Debug, Clone)]
pub struct ScaState {
    pub beta: f64,
    pub x: f64,
    pub u_hat: f64,
    pub w1: DMatrix<Complex64>,
    pub w2: DMatrix<Complex64>,
    pub lin: Linearization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaTraceRecord {
    pub iteration: usize,
    /// Surrogate objective in the program's scaled units.
    pub u_hat: f64,
    /// SNR of user 2 at this iterate.
    pub objective: f64,
    /// Relative change of `u_hat` from the previous iterate.
    pub delta: f64,
    pub kkt_residual: f64,
}

/// `a = sqrt(y / x)`, the point where the arithmetic-geometric bound
/// `2xy ≤ (a x)² + (y / a)²` is tight, clamped away from 0 and ∞.
pub fn agm_update(y: f64, x: f64) -> f64 {
    let r = (y.max(0.0) / x.max(X_FLOOR)).sqrt();
    if r.is_finite() {
        r.clamp(AGM_MIN, AGM_MAX)
    } else {
        AGM_MAX
    }
}

/// The convex inner approximation around `lin`.
pub fn build_p5(inst: &MisoInstance, gamma1: f64, lin: &Linearization) -> Result<(ConicProblem, P5Vars)> {
    check_gamma(gamma1)?;
    if !(lin.v_hat.is_finite() && lin.t.is_finite() && lin.a_hat > 0.0 && lin.a_hat.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad linearization point {lin:?}")));
    }
    let sdr = SdrMatrices::new(inst);
    let (h1, h2) = (sdr.h1_hat(), sdr.h2_hat());
    let n = inst.antennas();
    let c2 = w2_scale(gamma1);
    let xs = x_scale(gamma1);
    let mut p = ConicProblem::new();
    let u = p.add_var("u");
    let v = p.add_var("v");
    let t = p.add_var("t");
    let x = p.add_var("x");
    let beta = p.add_var("beta");
    let w1 = HermitianVar::new(&mut p, "W1", n);
    let w2 = HermitianVar::with_scale(&mut p, "W2", n, c2);
    let keep = AffineExpr::constant(1.0).plus(-1.0, beta);

    p.maximize(AffineExpr::var(u));
    p.add_nonneg(
        "objective linearization",
        AffineExpr::var(v)
            .scaled(2.0 * lin.v_hat)
            .plus_const(-lin.v_hat * lin.v_hat)
            .plus(-1.0, u),
    );
    p.add_cone(
        "objective bound",
        ConeSpec::RotatedSecondOrder(3),
        vec![keep.clone(), w2.trace_with(&h2, 1.0 / c2), AffineExpr::var(v)],
    );
    // t is carried in units of 1/√(g·s2), so g·s2·t² becomes t̂².
    let relay_snr = inst.g * sdr.s2;
    p.add_nonneg(
        "relay linearization",
        AffineExpr::var(t)
            .scaled(2.0 * lin.t / xs)
            .plus_const(-(lin.t * lin.t + gamma1) / xs)
            .plus(1.0, x),
    );
    p.add_cone(
        "relay bound",
        ConeSpec::RotatedSecondOrder(3),
        vec![
            AffineExpr::var(beta).scaled(relay_snr),
            w1.trace_with(&h2, 1.0).plus_expr(1.0, &w2.trace_with(&h2, 1.0)),
            AffineExpr::var(t),
        ],
    );
    p.add_cone(
        "sic at user 2",
        ConeSpec::RotatedSecondOrder(3),
        vec![
            keep,
            w1.trace_with(&h2, 1.0).plus_expr(1.0, &w2.trace_with(&h2, -gamma1)),
            AffineExpr::constant((gamma1 / sdr.s2).sqrt()),
        ],
    );
    // x·Tr(Ĥ1 W2) = xs·c2·x̂·ŷ with ŷ = Tr(Ĥ1 W2) / c2.
    let k = xs * c2;
    p.add_cone(
        "direct sinr share",
        ConeSpec::RotatedSecondOrder(4),
        vec![
            w1.trace_with(&h1, 2.0 / k).plus(-2.0 * xs / (k * sdr.s1), x),
            AffineExpr::constant(1.0),
            AffineExpr::var(x).scaled(lin.a_hat),
            w2.trace_with(&h1, 1.0 / (c2 * lin.a_hat)),
        ],
    );
    p.add_nonneg(
        "power",
        AffineExpr::constant(1.0)
            .plus_expr(-1.0, &w1.trace())
            .plus_expr(-1.0, &w2.trace()),
    );
    p.add_nonneg("beta lower", AffineExpr::var(beta));
    p.add_nonneg("beta upper", AffineExpr::constant(BETA_CAP).plus(-1.0, beta));
    p.add_nonneg("x lower", AffineExpr::var(x));
    p.add_nonneg("x upper", AffineExpr::constant(gamma1 / xs).plus(-1.0, x));
    w1.add_psd(&mut p, "W1 psd");
    w2.add_psd(&mut p, "W2 psd");
    Ok((
        p,
        P5Vars {
            u,
            v,
            t,
            x,
            beta,
            w1,
            w2,
        },
    ))
}

/// Tight linearization point for a feasible `(β, x, W1, W2)`.
fn tight_point(
    sdr: &SdrMatrices,
    g: f64,
    gamma1: f64,
    beta: f64,
    x: f64,
    w1: &DMatrix<Complex64>,
    w2: &DMatrix<Complex64>,
) -> Linearization {
    let (h1, h2) = (sdr.h1_hat(), sdr.h2_hat());
    let c2 = w2_scale(gamma1);
    let t22 = trace_product(&h2, w2).max(0.0);
    let t21 = trace_product(&h2, w1).max(0.0);
    Linearization {
        v_hat: ((1.0 - beta) * t22 / c2).sqrt().max(V_FLOOR),
        t: (beta * (t21 + t22) * g * sdr.s2).sqrt(),
        a_hat: agm_update(trace_product(&h1, w2) / c2, x / x_scale(gamma1)),
    }
}

const SEED_BETAS: [f64; 11] = [0.5, 0.25, 0.1, 0.75, 0.9, 0.05, 0.01, 1e-3, 1e-4, 1e-5, 0.99];
const SEED_X_FRACTIONS: [f64; 4] = [0.5, 0.0, 0.9, 1.0];

/// Finds a feasible starting point by solving the fixed-(β, x) SDP on a
/// short list of candidates.
fn seed(inst: &MisoInstance, gamma1: f64, opts: &MisoOptions) -> Result<Option<ScaState>> {
    let sdr = SdrMatrices::new(inst);
    for &beta in &SEED_BETAS {
        for &f in &SEED_X_FRACTIONS {
            let x = f * gamma1;
            if !p3_may_be_feasible(inst, gamma1, beta, x) {
                continue;
            }
            let pt = solve_p3(inst, gamma1, beta, x, &opts.conic)?;
            if matches!(pt.status, ConicStatus::Optimal | ConicStatus::AlmostOptimal) {
                let lin = tight_point(&sdr, inst.g, gamma1, beta, x, &pt.w1, &pt.w2);
                return Ok(Some(ScaState {
                    beta,
                    x,
                    u_hat: lin.v_hat * lin.v_hat,
                    w1: pt.w1,
                    w2: pt.w2,
                    lin,
                }));
            }
        }
    }
    Ok(None)
}

pub fn sca_solve(inst: &MisoInstance, gamma1: f64, eps: f64, max_iter: usize) -> Result<MisoSolution> {
    Ok(sca_solve_traced(inst, gamma1, eps, max_iter, &MisoOptions::default())?.0)
}

/// Successive convex approximation. Stops when the surrogate objective moves
/// by less than `eps` relative to its value, or after `max_iter` convex
/// solves.
pub fn sca_solve_traced(
    inst: &MisoInstance,
    gamma1: f64,
    eps: f64,
    max_iter: usize,
    opts: &MisoOptions,
) -> Result<(MisoSolution, Vec<ScaTraceRecord>)> {
    check_gamma(gamma1)?;
    if !(eps > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter("SCA needs eps > 0 and max_iter ≥ 1".into()));
    }
    let sdr = SdrMatrices::new(inst);
    let c2 = w2_scale(gamma1);
    let xs = x_scale(gamma1);
    let limit = max_feasible_gamma(inst, true, &opts.conic)?;
    if limit.as_ref().is_some_and(|l| gamma1 > l.gamma * (1.0 + LIMIT_SLACK)) {
        return Ok((MisoSolution::infeasible(inst.antennas()), Vec::new()));
    }
    let start = match seed(inst, gamma1, opts)? {
        Some(st) => Some(st),
        // Near the feasibility limit the seed grid can miss the feasible
        // sliver; the max-min covariance is feasible by construction.
        None => limit.as_ref().map(|l| {
            let (beta, x, w1) = limit_point(inst, l, gamma1);
            let w2 = DMatrix::zeros(inst.antennas(), inst.antennas());
            let lin = tight_point(&sdr, inst.g, gamma1, beta, x, &w1, &w2);
            ScaState {
                beta,
                x,
                u_hat: lin.v_hat * lin.v_hat,
                w1,
                w2,
                lin,
            }
        }),
    };
    // Without a feasible seed, start from v = t = a = 1 in SNR units.
    let mut lin = start.as_ref().map(|st| st.lin).unwrap_or(Linearization {
        v_hat: 1.0 / (sdr.s2 * c2).sqrt(),
        t: 1.0,
        a_hat: (xs / (sdr.s1 * c2)).sqrt(),
    });

    let mut trace = Vec::new();
    let mut state: Option<ScaState> = None;
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    for n in 1..=max_iter {
        let (p, vars) = build_p5(inst, gamma1, &lin)?;
        let sol = solve_conic(&p, &opts.conic)?;
        if !sol.is_usable() {
            log::debug!("SCA step {n} stopped: {:?}", sol.status);
            break;
        }
        let beta = sol.value(vars.beta).clamp(0.0, 1.0);
        let x = xs * sol.value(vars.x).max(0.0);
        let w1 = vars.w1.value(&sol.primal);
        let w2 = vars.w2.value(&sol.primal);
        let u_hat = sol.value(vars.u);
        let delta = (u_hat - prev).abs() / u_hat.abs().max(f64::MIN_POSITIVE);
        trace.push(ScaTraceRecord {
            iteration: n,
            u_hat,
            objective: (1.0 - beta) * trace_product(&sdr.h2, &w2),
            delta,
            kkt_residual: sol.residuals.max(),
        });
        lin = tight_point(&sdr, inst.g, gamma1, beta, x, &w1, &w2);
        state = Some(ScaState {
            beta,
            x,
            u_hat,
            w1,
            w2,
            lin,
        });
        if delta < eps {
            converged = true;
            break;
        }
        prev = u_hat;
    }

    // A seed is feasible for the original problem even if no convex step
    // succeeded from it.
    let status = if converged {
        SolveStatus::Stationary
    } else {
        SolveStatus::MaxIter
    };
    // The iterates approach β = 0 only geometrically, so that corner is
    // checked directly.
    let corner = solve_direct_only(inst, gamma1, opts)?;
    // A seed is feasible for the original problem even if no convex step
    // succeeded from it.
    let best = match state.or(start) {
        Some(st) => {
            let objective = (1.0 - st.beta) * trace_product(&sdr.h2, &st.w2);
            if corner.status.has_solution() && corner.objective > objective {
                None
            } else {
                let pt = P3Point {
                    beta: st.beta,
                    x: st.x,
                    status: ConicStatus::Optimal,
                    objective,
                    w1: st.w1,
                    w2: st.w2,
                    kkt_residual: 0.0,
                };
                Some(point_solution(inst, gamma1, &pt, opts, trace.len(), status))
            }
        }
        None => None,
    };
    let sol = match best {
        Some(sol) => sol,
        None if corner.status.has_solution() => MisoSolution {
            iterations: trace.len(),
            status,
            ..corner
        },
        None => {
            let mut sol = MisoSolution::infeasible(inst.antennas());
            sol.iterations = trace.len();
            sol
        }
    };
    Ok((sol, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siso;
    use crate::system::SisoInstance;

    #[test]
    fn agm_point_makes_bound_tight() {
        let (x, y) = (0.3, 2.7);
        let a = agm_update(y, x);
        assert!(((a * x).powi(2) + (y / a).powi(2) - 2.0 * x * y).abs() < 1e-12);
        assert_eq!(agm_update(1.0, 0.0), AGM_MAX);
        assert_eq!(agm_update(0.0, 1.0), AGM_MIN);
    }

    #[test]
    fn siso_sca_matches_golden_section() {
        let s = SisoInstance::new(1.0, 10.0, 2.0).unwrap();
        let inst = MisoInstance::from_siso(&s);
        let (sol, trace) = sca_solve_traced(&inst, 1.0, 1e-6, 100, &MisoOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Stationary);
        assert!(sol.extraction_ok);
        let gss = siso::gss_solve(&s, 1.0, 1e-6);
        assert!(
            (sol.objective - gss.objective).abs() / gss.objective < 1e-3,
            "{} vs {}",
            sol.objective,
            gss.objective
        );
        for w in trace.windows(2) {
            assert!(w[1].u_hat >= w[0].u_hat - 1e-6);
        }
    }

    #[test]
    fn infeasible_instance_reports_infeasible() {
        // h2 below the target leaves no room for SIC at any β.
        let inst = MisoInstance::from_siso(&SisoInstance::new(1.0, 0.5, 2.0).unwrap());
        let sol = sca_solve(&inst, 1.0, 1e-4, 20).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }
}
