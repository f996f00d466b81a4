//! Multi-antenna design via semidefinite relaxation: the fixed-(β, x) linear
//! SDP, the two-dimensional exhaustive search over it, the SCA loop over the
//! convex inner approximation, and beamformer extraction.

mod exhaustive;
mod extract;
mod limit;
mod p3;
mod sca;

pub use exhaustive::{exhaustive_search, exhaustive_search_detailed, LatticeInfo};
pub use extract::{eig_ratio, extract_beamformers, hermitian_eigen, Extraction};
pub use limit::{max_feasible_gamma, GammaLimit};
pub use p3::{build_p3, solve_direct_only, solve_p3, P3Point, P3};
pub use sca::{agm_update, build_p5, sca_solve, sca_solve_traced, Linearization, P5Vars, ScaState, ScaTraceRecord};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::conic::{solve, AffineExpr, ConicProblem, ConicSolution, ConicStatus, SolverSettings, Var, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::system::MisoInstance;

pub const DEFAULT_GRID: usize = 101;
pub const DEFAULT_RANDOMIZATIONS: usize = 100;
pub const DEFAULT_SCA_EPS: f64 = 1e-4;
pub const DEFAULT_SCA_MAX_ITER: usize = 100;
/// Second-to-first eigenvalue ratio below which a matrix counts as rank one.
pub const RANK_ONE_RATIO: f64 = 1e-6;
/// Conic tolerance for the relaxations. Tighter than the solver default so
/// the central-path residue in the second eigenvalue stays small.
pub const MISO_CONIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisoOptions {
    pub conic: SolverSettings,
    pub randomizations: usize,
    /// Seed of the Gaussian-randomization stream.
    pub extraction_seed: u64,
    /// Slack allowed when checking extracted beamformers.
    pub feasibility_tol: f64,
}

impl Default for MisoOptions {
    fn default() -> Self {
        Self {
            conic: SolverSettings::with_tol(MISO_CONIC_TOL),
            randomizations: DEFAULT_RANDOMIZATIONS,
            extraction_seed: 0,
            feasibility_tol: 1e-6,
        }
    }
}

/// `H_i = h_i h_iᴴ` together with the per-user scale `s_i = ‖h_i‖²` used to
/// keep the conic programs well conditioned.
#[derive(Debug, Clone)]
pub struct SdrMatrices {
    pub h1: DMatrix<Complex64>,
    pub h2: DMatrix<Complex64>,
    pub s1: f64,
    pub s2: f64,
}

impl SdrMatrices {
    pub fn new(inst: &MisoInstance) -> Self {
        Self {
            h1: inst.h1_outer(),
            h2: inst.h2_outer(),
            s1: inst.h1.norm_squared(),
            s2: inst.h2.norm_squared(),
        }
    }

    /// `H1 / s1`.
    pub fn h1_hat(&self) -> DMatrix<Complex64> {
        self.h1.map(|z| z / self.s1)
    }

    pub fn h2_hat(&self) -> DMatrix<Complex64> {
        self.h2.map(|z| z / self.s2)
    }
}

/// `Tr(A B)` for Hermitian `A`, `B`.
pub fn trace_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a * b).trace().re
}

/// Hermitian matrix variable `W = scale · W̃`, with `W̃` stored as `n²`
/// reals: the diagonal and the real and imaginary parts of the strict lower
/// triangle. The scale keeps `W̃` of order one.
#[derive(Debug, Clone)]
pub struct HermitianVar {
    n: usize,
    scale: f64,
    diag: Vec<Var>,
    /// `(i, j, re, im)` for `i > j`.
    off: Vec<(usize, usize, Var, Var)>,
}

impl HermitianVar {
    pub fn new(problem: &mut ConicProblem, name: &str, n: usize) -> Self {
        Self::with_scale(problem, name, n, 1.0)
    }

    pub fn with_scale(problem: &mut ConicProblem, name: &str, n: usize, scale: f64) -> Self {
        let diag = (0..n).map(|i| problem.add_var(format!("{name}[{i},{i}]"))).collect();
        let mut off = Vec::new();
        for j in 0..n {
            for i in j + 1..n {
                let re = problem.add_var(format!("re {name}[{i},{j}]"));
                let im = problem.add_var(format!("im {name}[{i},{j}]"));
                off.push((i, j, re, im));
            }
        }
        Self { n, scale, diag, off }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `Tr(H W)` as an affine expression, scaled by `k`.
    pub fn trace_with(&self, h: &DMatrix<Complex64>, k: f64) -> AffineExpr {
        let k = k * self.scale;
        let mut e = AffineExpr::zero();
        for (i, &d) in self.diag.iter().enumerate() {
            e = e.plus(k * h[(i, i)].re, d);
        }
        for &(i, j, re, im) in &self.off {
            let z = h[(i, j)];
            e = e.plus(2.0 * k * z.re, re).plus(2.0 * k * z.im, im);
        }
        e
    }

    pub fn trace(&self) -> AffineExpr {
        self.diag.iter().fold(AffineExpr::zero(), |e, &d| e.plus(self.scale, d))
    }

    /// Adds `W̃ ⪰ 0` through the real embedding `[[Re W, −Im W], [Im W, Re W]]`.
    pub fn add_psd(&self, problem: &mut ConicProblem, label: &str) {
        let n = self.n;
        let re = |i: usize, j: usize| -> AffineExpr {
            if i == j {
                AffineExpr::var(self.diag[i])
            } else {
                let (a, b) = if i > j { (i, j) } else { (j, i) };
                AffineExpr::var(self.lookup(a, b).0)
            }
        };
        let im = |i: usize, j: usize| -> AffineExpr {
            if i == j {
                AffineExpr::zero()
            } else if i > j {
                AffineExpr::var(self.lookup(i, j).1)
            } else {
                AffineExpr::var(self.lookup(j, i).1).scaled(-1.0)
            }
        };
        problem.add_psd(label, 2 * n, |r, c| match (r < n, c < n) {
            (true, true) => re(r, c),
            (false, false) => re(r - n, c - n),
            (false, true) => im(r - n, c),
            (true, false) => unreachable!("only the lower triangle is requested"),
        });
    }

    fn lookup(&self, i: usize, j: usize) -> (Var, Var) {
        let &(_, _, re, im) = self
            .off
            .iter()
            .find(|&&(a, b, _, _)| a == i && b == j)
            .expect("strict lower-triangle index");
        (re, im)
    }

    pub fn value(&self, x: &[f64]) -> DMatrix<Complex64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for (i, &d) in self.diag.iter().enumerate() {
            w[(i, i)] = Complex64::new(self.scale * x[d.0], 0.0);
        }
        for &(i, j, re, im) in &self.off {
            let z = Complex64::new(self.scale * x[re.0], self.scale * x[im.0]);
            w[(i, j)] = z;
            w[(j, i)] = z.conj();
        }
        w
    }
}

/// Expected size of the user-2 covariance: the SIC constraint leaves it at
/// most a `1 / (1 + γ1)` share of the power.
fn w2_scale(gamma1: f64) -> f64 {
    1.0 / (1.0 + gamma1)
}

/// Solves at the requested tolerance and, if that stalls, once more at the
/// solver default.
fn solve_conic(problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
    let sol = solve(problem, settings)?;
    let stalled = matches!(sol.status, ConicStatus::NumericalTrouble | ConicStatus::AlmostOptimal);
    if stalled && settings.tol < DEFAULT_TOL {
        log::debug!("retrying at tolerance {DEFAULT_TOL}");
        return solve(
            problem,
            &SolverSettings {
                tol: DEFAULT_TOL,
                ..*settings
            },
        );
    }
    Ok(sol)
}

fn check_gamma(gamma1: f64) -> Result<()> {
    if !(gamma1 >= 0.0 && gamma1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "SINR target must be nonnegative, got {gamma1}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::realify_hermitian_block;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_expression_matches_matrix_trace() {
        let mut p = ConicProblem::new();
        let w = HermitianVar::new(&mut p, "W", 3);
        let x: Vec<f64> = (0..p.var_count()).map(|k| 0.1 * k as f64 - 0.3).collect();
        let wm = w.value(&x);
        let h = DVector::from_column_slice(&[c(1.0, 0.5), c(-0.2, 0.3), c(0.7, -1.1)]);
        let hm = &h * h.adjoint();
        let expr = w.trace_with(&hm, 1.0);
        assert!((expr.eval(&x) - trace_product(&hm, &wm)).abs() < 1e-12);
        assert!((w.trace().eval(&x) - wm.trace().re).abs() < 1e-12);

        let mut p = ConicProblem::new();
        let w = HermitianVar::with_scale(&mut p, "W", 3, 0.25);
        let wm = w.value(&x);
        assert!((w.trace_with(&hm, 2.0).eval(&x) - 2.0 * trace_product(&hm, &wm)).abs() < 1e-12);
        assert!((w.trace().eval(&x) - wm.trace().re).abs() < 1e-12);
    }

    #[test]
    fn psd_rows_are_the_real_embedding() {
        let mut p = ConicProblem::new();
        let w = HermitianVar::new(&mut p, "W", 2);
        w.add_psd(&mut p, "W psd");
        let x: Vec<f64> = (0..p.var_count()).map(|k| 1.0 + k as f64).collect();
        let emb = realify_hermitian_block(&w.value(&x)).unwrap();
        let rows = &p.constraints()[0].rows;
        let mut k = 0;
        for j in 0..4 {
            for i in j..4 {
                assert!((rows[k].eval(&x) - emb[(i, j)]).abs() < 1e-12);
                k += 1;
            }
        }
    }

    #[test]
    fn max_eigenvalue_of_hermitian_via_realification() {
        // max Tr(H W) s.t. Tr W = 1, W ⪰ 0 equals λ_max(H) = ‖h‖².
        let h = DVector::from_column_slice(&[c(1.0, 1.0), c(0.0, -2.0)]);
        let hm = &h * h.adjoint();
        let mut p = ConicProblem::new();
        let w = HermitianVar::new(&mut p, "W", 2);
        p.maximize(w.trace_with(&hm, 1.0));
        p.add_equality("trace", w.trace().plus_const(-1.0));
        w.add_psd(&mut p, "W psd");
        let sol = solve(&p, &SolverSettings::with_tol(1e-10)).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - 6.0).abs() < 1e-7, "{}", sol.objective);
    }
}
