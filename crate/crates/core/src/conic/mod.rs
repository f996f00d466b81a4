//! Small dense conic programs and a primal-dual interior-point solver for them.
//!
//! A [`ConicProblem`] maximizes a linear objective over variables constrained by
//! affine equalities and by affine expressions lying in products of the
//! nonnegative orthant, second-order cones, rotated second-order cones and real
//! symmetric PSD cones. Complex Hermitian matrix variables are handled by the
//! builders through [`realify_hermitian_block`].
//!
//! The solver ([`solve`]) runs a homogeneous self-dual embedding with
//! Nesterov-Todd scaling and Mehrotra predictor-corrector steps, so primal or
//! dual infeasibility is reported with a certificate rather than as a stall.

mod cones;
mod ipm;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use cones::{svec_index, svec_len};
pub use ipm::solve;

use crate::error::{Error, Result};

/// Default relative tolerance on residuals and duality gap.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 200;
/// Largest supported side of a PSD block.
pub const MAX_PSD_SIDE: usize = 16;

/// Handle to a scalar decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub usize);

/// Cone kinds a constraint block can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSpec {
    /// `dim` entries, each `>= 0`.
    NonNeg(usize),
    /// `[t, x...]` with `‖x‖ <= t`, total length `dim`.
    SecondOrder(usize),
    /// `[a, b, w...]` with `‖w‖² <= a·b`, `a, b >= 0`, total length `dim`.
    RotatedSecondOrder(usize),
    /// Real symmetric matrix of side `n`, rows given as the lower triangle in
    /// column-major order (unscaled entries).
    Psd(usize),
}

impl ConeSpec {
    /// Number of affine rows the cone consumes.
    pub fn rows(&self) -> usize {
        match *self {
            ConeSpec::NonNeg(d) | ConeSpec::SecondOrder(d) | ConeSpec::RotatedSecondOrder(d) => d,
            ConeSpec::Psd(n) => svec_len(n),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ConeSpec::NonNeg(d) | ConeSpec::SecondOrder(d) => d >= 1,
            ConeSpec::RotatedSecondOrder(d) => d >= 2,
            ConeSpec::Psd(n) => (1..=MAX_PSD_SIDE).contains(&n),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidProblem(format!("unsupported cone {self:?}")))
        }
    }
}

/// Affine function `Σ coef·x[var] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(Var, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        Self {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    /// Adds `coef·v`.
    pub fn plus(mut self, coef: f64, v: Var) -> Self {
        if coef != 0.0 {
            self.terms.push((v, coef));
        }
        self
    }

    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// Adds `coef·other`.
    pub fn plus_expr(mut self, coef: f64, other: &AffineExpr) -> Self {
        for &(v, c) in &other.terms {
            self = self.plus(coef * c, v);
        }
        self.constant += coef * other.constant;
        self
    }

    pub fn scaled(mut self, k: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v.0]).sum::<f64>()
    }
}

/// One cone-membership constraint: `rows(x) ∈ cone`.
#[derive(Debug, Clone)]
pub struct ConeConstraint {
    pub label: String,
    pub cone: ConeSpec,
    pub rows: Vec<AffineExpr>,
}

/// A conic program in maximization form.
#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    names: Vec<String>,
    objective: AffineExpr,
    equalities: Vec<(String, AffineExpr)>,
    constraints: Vec<ConeConstraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> Var {
        self.names.push(name.into());
        Var(self.names.len() - 1)
    }

    pub fn var_count(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    /// Sets the expression to be maximized.
    pub fn maximize(&mut self, objective: AffineExpr) {
        self.objective = objective;
    }

    pub fn objective(&self) -> &AffineExpr {
        &self.objective
    }

    /// Adds `expr == 0`.
    pub fn add_equality(&mut self, label: impl Into<String>, expr: AffineExpr) {
        self.equalities.push((label.into(), expr));
    }

    pub fn equalities(&self) -> &[(String, AffineExpr)] {
        &self.equalities
    }

    /// Adds `expr >= 0`.
    pub fn add_nonneg(&mut self, label: impl Into<String>, expr: AffineExpr) {
        self.add_cone(label, ConeSpec::NonNeg(1), vec![expr]);
    }

    /// Adds `lhs >= rhs`.
    pub fn add_geq(&mut self, label: impl Into<String>, lhs: AffineExpr, rhs: AffineExpr) {
        self.add_nonneg(label, lhs.plus_expr(-1.0, &rhs));
    }

    pub fn add_cone(&mut self, label: impl Into<String>, cone: ConeSpec, rows: Vec<AffineExpr>) {
        self.constraints.push(ConeConstraint {
            label: label.into(),
            cone,
            rows,
        });
    }

    /// Adds a symmetric-matrix constraint `M(x) ⪰ 0`; `entry(i, j)` is called
    /// for the lower triangle `i >= j`.
    pub fn add_psd(
        &mut self,
        label: impl Into<String>,
        side: usize,
        mut entry: impl FnMut(usize, usize) -> AffineExpr,
    ) {
        let mut rows = Vec::with_capacity(svec_len(side));
        for j in 0..side {
            for i in j..side {
                rows.push(entry(i, j));
            }
        }
        self.add_cone(label, ConeSpec::Psd(side), rows);
    }

    pub fn constraints(&self) -> &[ConeConstraint] {
        &self.constraints
    }

    /// Checks that every variable reference and cone size is consistent.
    pub fn validate(&self) -> Result<()> {
        let n = self.var_count();
        let check = |e: &AffineExpr| -> Result<()> {
            for &(v, c) in &e.terms {
                if v.0 >= n {
                    return Err(Error::InvalidProblem(format!("unknown variable index {}", v.0)));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidProblem("non-finite coefficient".into()));
                }
            }
            if !e.constant.is_finite() {
                return Err(Error::InvalidProblem("non-finite constant".into()));
            }
            Ok(())
        };
        check(&self.objective)?;
        for (_, e) in &self.equalities {
            check(e)?;
        }
        if self.constraints.is_empty() {
            return Err(Error::InvalidProblem("no cone constraints".into()));
        }
        for c in &self.constraints {
            c.cone.validate()?;
            if c.rows.len() != c.cone.rows() {
                return Err(Error::InvalidProblem(format!(
                    "constraint '{}' has {} rows, cone {:?} needs {}",
                    c.label,
                    c.rows.len(),
                    c.cone,
                    c.cone.rows()
                )));
            }
            for r in &c.rows {
                check(r)?;
            }
        }
        Ok(())
    }

    /// Human-readable listing of variables, objective and constraint rows.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

fn fmt_expr(p: &ConicProblem, e: &AffineExpr) -> String {
    let mut s = String::new();
    for &(v, c) in &e.terms {
        s.push_str(&format!("{c:+.6e}*{} ", p.var_name(v)));
    }
    s.push_str(&format!("{:+.6e}", e.constant));
    s
}

impl fmt::Display for ConicProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variables {}", self.names.len())?;
        for (i, n) in self.names.iter().enumerate() {
            writeln!(f, "  x{i} {n}")?;
        }
        writeln!(f, "maximize {}", fmt_expr(self, &self.objective))?;
        for (label, e) in &self.equalities {
            writeln!(f, "eq {label}: {} == 0", fmt_expr(self, e))?;
        }
        for c in &self.constraints {
            writeln!(f, "cone {} {:?}", c.label, c.cone)?;
            for r in &c.rows {
                writeln!(f, "  {}", fmt_expr(self, r))?;
            }
        }
        Ok(())
    }
}

/// Termination status of a conic solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicStatus {
    Optimal,
    /// Primal infeasible (dual certificate found).
    Infeasible,
    /// Dual infeasible, i.e. the objective is unbounded above.
    Unbounded,
    /// Stalled with residuals within `REDUCED_ACCURACY_FACTOR × tol`.
    AlmostOptimal,
    NumericalTrouble,
}

/// Loosening applied to `tol` before a stalled solve is reported as
/// [`ConicStatus::AlmostOptimal`].
pub const REDUCED_ACCURACY_FACTOR: f64 = 100.0;

/// Relative KKT residuals of a returned point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

/// Solver output. Dual multipliers are expressed in the coordinates of the
/// original constraint rows (for PSD blocks: the lower-triangle entries of the
/// dual matrix).
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: ConicStatus,
    pub primal: Vec<f64>,
    pub eq_duals: Vec<f64>,
    pub cone_duals: Vec<Vec<f64>>,
    pub objective: f64,
    pub dual_objective: f64,
    pub residuals: KktResiduals,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == ConicStatus::Optimal
    }

    /// Optimal, or optimal to reduced accuracy.
    pub fn is_usable(&self) -> bool {
        matches!(self.status, ConicStatus::Optimal | ConicStatus::AlmostOptimal)
    }

    pub fn value(&self, v: Var) -> f64 {
        self.primal[v.0]
    }
}

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SolverSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian
/// matrix. `H ⪰ 0` iff the embedding is PSD, and
/// `Tr(H X) = ½ Tr(realify(H) realify(X))` for Hermitian `H, X`.
pub fn realify_hermitian_block(h: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Dimension(format!("{}x{} matrix is not square", n, h.ncols())));
    }
    let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..n {
            if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-9 * scale {
                return Err(Error::NotHermitian);
            }
        }
    }
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    Ok(out)
}

/// Adds `[[a, v], [v, b]] ⪰ 0` as the equivalent rotated second-order cone
/// `v² <= a·b, a >= 0, b >= 0`.
pub fn schur_2x2_as_rotated_soc(
    problem: &mut ConicProblem,
    label: impl Into<String>,
    a: AffineExpr,
    b: AffineExpr,
    v: AffineExpr,
) {
    problem.add_cone(label, ConeSpec::RotatedSecondOrder(3), vec![a, b, v]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realify_identity() {
        let h = DMatrix::<Complex64>::identity(2, 2);
        let r = realify_hermitian_block(&h).unwrap();
        assert_eq!(r, DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn realify_doubles_eigenvalues() {
        // Hermitian with eigenvalues {3, 1}: 2I + [[0, i],[ -i, 0]]
        let i = Complex64::new(0.0, 1.0);
        let h = DMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 0.0), i, -i, Complex64::new(2.0, 0.0)]);
        let mut ev: Vec<f64> = realify_hermitian_block(&h)
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [1.0, 1.0, 3.0, 3.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn realify_rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(realify_hermitian_block(&h), Err(Error::NotHermitian)));
    }

    #[test]
    fn validate_catches_row_mismatch() {
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        p.add_cone("bad", ConeSpec::SecondOrder(3), vec![AffineExpr::var(x)]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn dump_lists_everything() {
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        p.maximize(AffineExpr::var(x));
        p.add_nonneg("cap", AffineExpr::constant(1.0).plus(-1.0, x));
        let text = p.dump();
        assert!(text.contains("x0 x"));
        assert!(text.contains("cone cap NonNeg(1)"));
        assert!(text.starts_with("variables 1"));
    }
}
