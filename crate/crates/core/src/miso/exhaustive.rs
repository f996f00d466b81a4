use super::limit::{max_feasible_gamma, LIMIT_SLACK};
use super::p3::{p3_may_be_feasible, point_solution, solve_p3, P3Point};
use super::{check_gamma, MisoOptions};
use crate::conic::ConicStatus;
use crate::error::{Error, Result};
use crate::system::{MisoInstance, MisoSolution, SolveStatus};

/// Where the best lattice point was found and how much work it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeInfo {
    pub grid_beta: usize,
    pub grid_x: usize,
    pub best_beta_index: usize,
    pub best_x_index: usize,
    /// Subproblems handed to the conic solver. The rest were ruled out by
    /// necessary conditions or by an upper bound below the incumbent.
    pub solves: usize,
    pub feasible_points: usize,
    pub worst_kkt_residual: f64,
}

/// Largest SNR of user 2 allowed by the SIC and power rows alone:
/// `((1 − β)‖h2‖² − γ1) / (1 + γ1)`.
fn snr_upper_bound(s2: f64, gamma1: f64, beta: f64) -> f64 {
    ((1.0 - beta) * s2 - gamma1) / (1.0 + gamma1)
}

/// Lattice value `k / (n − 1)` scaled to `[0, hi]`, with exact endpoints.
fn lattice(k: usize, n: usize, hi: f64) -> f64 {
    if k + 1 == n {
        hi
    } else {
        hi * k as f64 / (n - 1) as f64
    }
}

pub fn exhaustive_search(inst: &MisoInstance, gamma1: f64, grid_beta: usize, grid_x: usize) -> Result<MisoSolution> {
    Ok(exhaustive_search_detailed(inst, gamma1, grid_beta, grid_x, &MisoOptions::default())?.0)
}

/// Maximizes the fixed-(β, x) SDP over `β ∈ [0, 1]`, `x ∈ [0, γ1]`, both
/// lattices including their endpoints so that `n → 2n − 1` refines. Rows
/// whose objective bound cannot beat the incumbent are skipped; the result
/// equals that of a full scan.
pub fn exhaustive_search_detailed(
    inst: &MisoInstance,
    gamma1: f64,
    grid_beta: usize,
    grid_x: usize,
    opts: &MisoOptions,
) -> Result<(MisoSolution, Option<(P3Point, LatticeInfo)>)> {
    check_gamma(gamma1)?;
    if grid_beta < 2 || grid_x < 2 {
        return Err(Error::InvalidParameter(
            "exhaustive grids need at least two points".into(),
        ));
    }
    if max_feasible_gamma(inst, true, &opts.conic)?.is_some_and(|l| gamma1 > l.gamma * (1.0 + LIMIT_SLACK)) {
        return Ok((MisoSolution::infeasible(inst.antennas()), None));
    }
    let mut best: Option<(P3Point, usize, usize)> = None;
    let mut solves = 0;
    let mut feasible_points = 0;
    let mut worst = 0.0f64;
    let s2 = inst.h2.norm_squared();
    for jb in 0..grid_beta {
        let beta = lattice(jb, grid_beta, 1.0);
        // The bound falls with β, so no later row can improve either.
        if best
            .as_ref()
            .is_some_and(|b| snr_upper_bound(s2, gamma1, beta) <= b.0.objective)
        {
            break;
        }
        for jx in 0..grid_x {
            let x = lattice(jx, grid_x, gamma1);
            if !p3_may_be_feasible(inst, gamma1, beta, x) {
                continue;
            }
            solves += 1;
            let pt = solve_p3(inst, gamma1, beta, x, &opts.conic)?;
            if pt.status != ConicStatus::Optimal {
                continue;
            }
            feasible_points += 1;
            worst = worst.max(pt.kkt_residual);
            if best.as_ref().is_none_or(|b| pt.objective > b.0.objective) {
                best = Some((pt, jb, jx));
            }
        }
    }
    let Some((pt, jb, jx)) = best else {
        return Ok((MisoSolution::infeasible(inst.antennas()), None));
    };
    let sol = point_solution(inst, gamma1, &pt, opts, solves, SolveStatus::Optimal);
    let info = LatticeInfo {
        grid_beta,
        grid_x,
        best_beta_index: jb,
        best_x_index: jx,
        solves,
        feasible_points,
        worst_kkt_residual: worst,
    };
    Ok((sol, Some((pt, info))))
}
