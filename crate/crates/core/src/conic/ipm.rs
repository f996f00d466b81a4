//! Homogeneous self-dual interior-point method.
//!
//! Internally the problem is put in the standard form
//!
//! ```text
//! minimize  cᵀx   s.t.  A x = b,  G x + s = h,  s ∈ K
//! ```
//!
//! where `K` is a product of nonnegative, second-order and PSD (`svec`) cones.
//! Rotated second-order cones are mapped to second-order cones by the linear
//! transform `(a, b, w) ↦ (a + b, a - b, 2w)`.

use nalgebra::{DMatrix, DVector};

use super::cones::{self, Block, BlockKind, SQRT2};
use super::{ConeSpec, ConicProblem, ConicSolution, ConicStatus, KktResiduals, SolverSettings};
use crate::error::Result;

const STEP_FRACTION: f64 = 0.99;
const STATIC_REG: f64 = 1e-11;
const REFINE_STEPS: usize = 3;

struct StandardForm {
    n: usize,
    p: usize,
    m: usize,
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    blocks: Vec<Block>,
    objective_constant: f64,
}

impl StandardForm {
    fn build(problem: &ConicProblem) -> Self {
        let n = problem.var_count();
        let p = problem.equalities().len();
        let m: usize = problem.constraints().iter().map(|c| c.cone.rows()).sum();

        let mut c = DVector::zeros(n);
        for &(v, k) in &problem.objective().terms {
            c[v.0] -= k;
        }
        let mut a = DMatrix::zeros(p, n);
        let mut b = DVector::zeros(p);
        for (i, (_, e)) in problem.equalities().iter().enumerate() {
            for &(v, k) in &e.terms {
                a[(i, v.0)] += k;
            }
            b[i] = -e.constant;
        }

        let mut g = DMatrix::zeros(m, n);
        let mut h = DVector::zeros(m);
        let mut blocks = Vec::with_capacity(problem.constraints().len());
        let mut offset = 0;
        // Writes `scale * row` (as s = h - G x) into internal row `r`.
        let put = |g: &mut DMatrix<f64>, h: &mut DVector<f64>, r: usize, e: &super::AffineExpr, scale: f64| {
            for &(v, k) in &e.terms {
                g[(r, v.0)] -= scale * k;
            }
            h[r] += scale * e.constant;
        };
        for con in problem.constraints() {
            let dim = con.cone.rows();
            let kind = match con.cone {
                ConeSpec::NonNeg(_) => {
                    for (k, e) in con.rows.iter().enumerate() {
                        put(&mut g, &mut h, offset + k, e, 1.0);
                    }
                    BlockKind::NonNeg
                }
                ConeSpec::SecondOrder(_) => {
                    for (k, e) in con.rows.iter().enumerate() {
                        put(&mut g, &mut h, offset + k, e, 1.0);
                    }
                    BlockKind::Soc
                }
                ConeSpec::RotatedSecondOrder(_) => {
                    let (ra, rb) = (&con.rows[0], &con.rows[1]);
                    put(&mut g, &mut h, offset, ra, 1.0);
                    put(&mut g, &mut h, offset, rb, 1.0);
                    put(&mut g, &mut h, offset + 1, ra, 1.0);
                    put(&mut g, &mut h, offset + 1, rb, -1.0);
                    for (k, e) in con.rows.iter().enumerate().skip(2) {
                        put(&mut g, &mut h, offset + k, e, 2.0);
                    }
                    BlockKind::Soc
                }
                ConeSpec::Psd(side) => {
                    let mut k = 0;
                    for j in 0..side {
                        for i in j..side {
                            let scale = if i == j { 1.0 } else { SQRT2 };
                            put(&mut g, &mut h, offset + k, &con.rows[k], scale);
                            k += 1;
                        }
                    }
                    BlockKind::Psd(side)
                }
            };
            blocks.push(Block { kind, offset, dim });
            offset += dim;
        }
        Self {
            n,
            p,
            m,
            c,
            a,
            b,
            g,
            h,
            blocks,
            objective_constant: problem.objective().constant,
        }
    }

    /// Maps internal cone multipliers back to per-row multipliers of the
    /// original constraints.
    fn cone_duals(&self, problem: &ConicProblem, z: &DVector<f64>) -> Vec<Vec<f64>> {
        problem
            .constraints()
            .iter()
            .zip(&self.blocks)
            .map(|(con, blk)| {
                let zb = &z.as_slice()[blk.offset..blk.offset + blk.dim];
                match con.cone {
                    ConeSpec::NonNeg(_) | ConeSpec::SecondOrder(_) => zb.to_vec(),
                    ConeSpec::RotatedSecondOrder(_) => {
                        let mut out = vec![zb[0] + zb[1], zb[0] - zb[1]];
                        out.extend(zb[2..].iter().map(|x| 2.0 * x));
                        out
                    }
                    ConeSpec::Psd(side) => {
                        let mut out = Vec::with_capacity(blk.dim);
                        let mut k = 0;
                        for j in 0..side {
                            for i in j..side {
                                out.push(if i == j { zb[k] } else { SQRT2 * zb[k] });
                                k += 1;
                            }
                        }
                        out
                    }
                }
            })
            .collect()
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

struct Kkt {
    base: DMatrix<f64>,
    n: usize,
    p: usize,
    m: usize,
}

impl Kkt {
    fn new(sf: &StandardForm) -> Self {
        let (n, p, m) = (sf.n, sf.p, sf.m);
        let dim = n + p + m;
        let mut base = DMatrix::zeros(dim, dim);
        base.view_mut((n, 0), (p, n)).copy_from(&sf.a);
        base.view_mut((0, n), (n, p)).copy_from(&sf.a.transpose());
        base.view_mut((n + p, 0), (m, n)).copy_from(&sf.g);
        base.view_mut((0, n + p), (n, m)).copy_from(&sf.g.transpose());
        Self { base, n, p, m }
    }

    /// Factors the system `[[0, Aᵀ, Gᵀ], [A, 0, 0], [G, 0, -WᵀW]]` in its
    /// scaled form `[[0, Aᵀ, G̃ᵀ], [A, 0, 0], [G̃, 0, -I]]` with `G̃ = W⁻ᵀG`
    /// and unknown `W z`. The scaled form stays well conditioned as the
    /// iterates approach the boundary.
    fn factor(&self, w_inv: &DMatrix<f64>) -> Option<KktFactor> {
        let (n, p, m) = (self.n, self.p, self.m);
        let w_inv_t = w_inv.transpose();
        let gt = &w_inv_t * self.base.view((n + p, 0), (m, n));
        let mut exact = self.base.clone();
        exact.view_mut((n + p, 0), (m, n)).copy_from(&gt);
        exact.view_mut((0, n + p), (n, m)).copy_from(&gt.transpose());
        for i in 0..m {
            exact[(n + p + i, n + p + i)] = -1.0;
        }
        let mut reg = exact.clone();
        for i in 0..n {
            reg[(i, i)] += STATIC_REG;
        }
        for i in n..n + p + m {
            reg[(i, i)] -= STATIC_REG;
        }
        let lu = reg.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(KktFactor {
            exact,
            lu,
            w_inv: w_inv.clone(),
            w_inv_t,
            offset: n + p,
        })
    }
}

struct KktFactor {
    exact: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    w_inv: DMatrix<f64>,
    w_inv_t: DMatrix<f64>,
    offset: usize,
}

impl KktFactor {
    /// Solves the unscaled system for right-hand side `(r_x, r_y, r_z)`.
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        self.solve_scaled(rhs).map(|(x, _)| x)
    }

    /// Like [`Self::solve`], also returning `W z` as computed by the
    /// factorization.
    fn solve_scaled(&self, rhs: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let (o, m) = (self.offset, self.w_inv.nrows());
        let mut scaled = rhs.clone();
        let rz = &self.w_inv_t * rhs.rows(o, m);
        scaled.rows_mut(o, m).copy_from(&rz);
        let mut x = self.lu.solve(&scaled)?;
        for _ in 0..REFINE_STEPS {
            let r = &scaled - &self.exact * &x;
            let dx = self.lu.solve(&r)?;
            x += dx;
        }
        let wz = x.rows(o, m).into_owned();
        let z = &self.w_inv * &wz;
        x.rows_mut(o, m).copy_from(&z);
        if x.iter().all(|v| v.is_finite()) {
            Some((x, wz))
        } else {
            None
        }
    }
}

struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
    /// `W^{-T} Δs`, used by the Mehrotra correction.
    ws: DVector<f64>,
    /// `W Δz`.
    wz: DVector<f64>,
}

struct Residuals {
    rx: DVector<f64>,
    ry: DVector<f64>,
    rz: DVector<f64>,
    rtau: f64,
}

fn block_diag(
    scalings: &[cones::BlockScaling],
    blocks: &[Block],
    m: usize,
) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let mut w = DMatrix::zeros(m, m);
    let mut w_inv = DMatrix::zeros(m, m);
    let mut lambda = DVector::zeros(m);
    for (sc, b) in scalings.iter().zip(blocks) {
        w.view_mut((b.offset, b.offset), (b.dim, b.dim)).copy_from(&sc.w);
        w_inv
            .view_mut((b.offset, b.offset), (b.dim, b.dim))
            .copy_from(&sc.w_inv);
        lambda.rows_mut(b.offset, b.dim).copy_from(&sc.lambda);
    }
    (w, w_inv, lambda)
}

/// Solves a conic program. Returns `Err` only for malformed input; solver
/// outcomes (including infeasibility) are reported through
/// [`ConicSolution::status`].
pub fn solve(problem: &ConicProblem, settings: &SolverSettings) -> Result<ConicSolution> {
    problem.validate()?;
    let sf = StandardForm::build(problem);
    let (n, p, m) = (sf.n, sf.p, sf.m);
    let blocks = &sf.blocks;
    let nu: usize = blocks.iter().map(|b| b.degree()).sum();
    let tol = settings.tol;

    let kkt = Kkt::new(&sf);
    let stack = |x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>| {
        let mut v = DVector::zeros(n + p + m);
        v.rows_mut(0, n).copy_from(x);
        v.rows_mut(n, p).copy_from(y);
        v.rows_mut(n + p, m).copy_from(z);
        v
    };
    let split = |v: &DVector<f64>| {
        (
            v.rows(0, n).into_owned(),
            v.rows(n, p).into_owned(),
            v.rows(n + p, m).into_owned(),
        )
    };

    let mut e = vec![0.0; m];
    cones::identity(blocks, &mut e);
    let e = DVector::from_vec(e);

    // Initial point from two least-squares problems with identity scaling.
    let mut it = {
        let f = kkt
            .factor(&DMatrix::identity(m, m))
            .ok_or_else(|| crate::error::Error::InvalidProblem("singular KKT system".into()))?;
        let sol = f
            .solve(&stack(&DVector::zeros(n), &sf.b, &sf.h))
            .ok_or_else(|| crate::error::Error::InvalidProblem("singular KKT system".into()))?;
        let (x, _, zhat) = split(&sol);
        let mut s = -zhat;
        let sol = f
            .solve(&stack(&(-&sf.c), &DVector::zeros(p), &DVector::zeros(m)))
            .ok_or_else(|| crate::error::Error::InvalidProblem("singular KKT system".into()))?;
        let (_, y, mut z) = split(&sol);
        for v in [&mut s, &mut z] {
            let shift = -cones::min_eigenvalue(blocks, v.as_slice());
            if shift >= -1e-8 * inf_norm(v).max(1.0) {
                *v += &e * (1.0 + shift);
            }
        }
        Iterate {
            x,
            y,
            z,
            s,
            tau: 1.0,
            kappa: 1.0,
        }
    };

    let bnorm = inf_norm(&sf.b);
    let hnorm = inf_norm(&sf.h);
    let cnorm = inf_norm(&sf.c);

    let mut status = ConicStatus::NumericalTrouble;
    let mut iterations = 0;
    let mut residuals_out = KktResiduals::default();

    for iter in 0..=settings.max_iter {
        iterations = iter;
        let res = Residuals {
            rx: sf.a.tr_mul(&it.y) + sf.g.tr_mul(&it.z) + &sf.c * it.tau,
            ry: &sf.b * it.tau - &sf.a * &it.x,
            rz: &sf.h * it.tau - &sf.g * &it.x - &it.s,
            rtau: it.kappa + sf.c.dot(&it.x) + sf.b.dot(&it.y) + sf.h.dot(&it.z),
        };

        // Convergence on the de-homogenized point.
        let tau = it.tau;
        let xs = &it.x / tau;
        let ys = &it.y / tau;
        let zs = &it.z / tau;
        let ss = &it.s / tau;
        // Each residual is scaled by the largest of its terms.
        let ax = &sf.a * &xs;
        let gx = &sf.g * &xs;
        let aty = sf.a.tr_mul(&ys);
        let gtz = sf.g.tr_mul(&zs);
        let pres_eq = inf_norm(&(&ax - &sf.b)) / 1f64.max(bnorm).max(inf_norm(&ax));
        let pres_cone = inf_norm(&(&gx + &ss - &sf.h)) / 1f64.max(hnorm).max(inf_norm(&gx)).max(inf_norm(&ss));
        let pres = pres_eq.max(pres_cone);
        let dres = inf_norm(&(&aty + &gtz + &sf.c)) / 1f64.max(cnorm).max(inf_norm(&aty)).max(inf_norm(&gtz));
        let pobj = sf.c.dot(&xs);
        let dobj = -sf.b.dot(&ys) - sf.h.dot(&zs);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs().min(dobj.abs()));
        residuals_out = KktResiduals {
            primal: pres,
            dual: dres,
            gap,
        };
        if pres <= tol && dres <= tol && gap <= tol {
            status = ConicStatus::Optimal;
            break;
        }

        let cert_d = -sf.b.dot(&it.y) - sf.h.dot(&it.z);
        if cert_d > 0.0 {
            let r = inf_norm(&(sf.a.tr_mul(&it.y) + sf.g.tr_mul(&it.z))) / (1.0 + cnorm);
            if r / cert_d <= tol {
                status = ConicStatus::Infeasible;
                break;
            }
        }
        let cert_p = -sf.c.dot(&it.x);
        if cert_p > 0.0 {
            let r1 = inf_norm(&(&sf.a * &it.x)) / (1.0 + bnorm);
            let r2 = inf_norm(&(&sf.g * &it.x + &it.s)) / (1.0 + hnorm);
            if r1.max(r2) / cert_p <= tol {
                status = ConicStatus::Unbounded;
                break;
            }
        }
        if iter == settings.max_iter {
            break;
        }

        let mu = (it.s.dot(&it.z) + it.tau * it.kappa) / (nu as f64 + 1.0);
        let scalings = match cones::nt_scaling(blocks, it.s.as_slice(), it.z.as_slice()) {
            Some(s) => s,
            None => break,
        };
        let (w, w_inv, lambda) = block_diag(&scalings, blocks, m);
        let wt = w.transpose();
        let fact = match kkt.factor(&w_inv) {
            Some(f) => f,
            None => break,
        };
        let (sol1, wz1) = match fact.solve_scaled(&stack(&(-&sf.c), &sf.b, &sf.h)) {
            Some(s) => s,
            None => break,
        };
        let (x1, y1, z1) = split(&sol1);
        let q1 = sf.c.dot(&x1) + sf.b.dot(&y1) + sf.h.dot(&z1);

        let newton = |eta: f64, ds_rhs: &DVector<f64>, dk_rhs: f64| -> Option<Direction> {
            let mut dst = vec![0.0; m];
            cones::jordan_divide(blocks, lambda.as_slice(), ds_rhs.as_slice(), &mut dst);
            let dst = DVector::from_vec(dst);
            let rhs = stack(&(&res.rx * -eta), &(&res.ry * eta), &(&res.rz * eta - &wt * &dst));
            let (sol2, wz2) = fact.solve_scaled(&rhs)?;
            let (x2, y2, z2) = split(&sol2);
            let q2 = sf.c.dot(&x2) + sf.b.dot(&y2) + sf.h.dot(&z2);
            let denom = q1 - it.kappa / it.tau;
            let dtau = (-eta * res.rtau - dk_rhs / it.tau - q2) / denom;
            let dx = x2 + &x1 * dtau;
            let dy = y2 + &y1 * dtau;
            let dz = z2 + &z1 * dtau;
            let wz = wz2 + &wz1 * dtau;
            let ws = &dst - &wz;
            // From the linearized primal equation, which keeps the primal
            // residual consistent even when W is badly conditioned.
            let ds = &res.rz * eta + &sf.h * dtau - &sf.g * &dx;
            let dkappa = (dk_rhs - it.kappa * dtau) / it.tau;
            if !dtau.is_finite() || !dkappa.is_finite() {
                return None;
            }
            Some(Direction {
                x: dx,
                y: dy,
                z: dz,
                s: ds,
                tau: dtau,
                kappa: dkappa,
                ws,
                wz,
            })
        };
        let step_to_boundary = |d: &Direction| -> f64 {
            // Measured in the scaled space, where both iterates equal `lambda`
            // and the boundary distance is well conditioned.
            let mut a = cones::max_step(blocks, lambda.as_slice(), d.ws.as_slice()).min(cones::max_step(
                blocks,
                lambda.as_slice(),
                d.wz.as_slice(),
            ));
            if d.tau < 0.0 {
                a = a.min(-it.tau / d.tau);
            }
            if d.kappa < 0.0 {
                a = a.min(-it.kappa / d.kappa);
            }
            a
        };

        let mut lam_sq = vec![0.0; m];
        cones::jordan_product(blocks, lambda.as_slice(), lambda.as_slice(), &mut lam_sq);
        let lam_sq = DVector::from_vec(lam_sq);

        let aff = match newton(1.0, &(-&lam_sq), -it.tau * it.kappa) {
            Some(d) => d,
            None => break,
        };
        let alpha_aff = step_to_boundary(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        let mut corr = vec![0.0; m];
        cones::jordan_product(blocks, aff.ws.as_slice(), aff.wz.as_slice(), &mut corr);
        let ds_rhs = -&lam_sq - DVector::from_vec(corr) + &e * (sigma * mu);
        let dk_rhs = -it.tau * it.kappa - aff.tau * aff.kappa + sigma * mu;
        let dir = match newton(1.0 - sigma, &ds_rhs, dk_rhs) {
            Some(d) => d,
            None => break,
        };
        let alpha = (STEP_FRACTION * step_to_boundary(&dir)).min(1.0);
        if !(alpha > 1e-12) {
            break;
        }
        it.x += &dir.x * alpha;
        it.y += &dir.y * alpha;
        it.z += &dir.z * alpha;
        it.s += &dir.s * alpha;
        it.tau += dir.tau * alpha;
        it.kappa += dir.kappa * alpha;
    }

    if status == ConicStatus::NumericalTrouble && residuals_out.max() <= super::REDUCED_ACCURACY_FACTOR * tol {
        status = ConicStatus::AlmostOptimal;
    }

    let finish = |x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>| {
        // Equality multipliers are reported for the Lagrangian
        // obj(x) + Σ z·row(x) + Σ y·eq(x), hence the sign flip.
        let eq_duals: Vec<f64> = y.iter().map(|v| -v).collect();
        let cone_duals = sf.cone_duals(problem, z);
        (x.as_slice().to_vec(), eq_duals, cone_duals)
    };

    let (primal, eq_duals, cone_duals, objective, dual_objective) = match status {
        ConicStatus::Infeasible => {
            let scale = -sf.b.dot(&it.y) - sf.h.dot(&it.z);
            let (x, y, z) = finish(&(&it.x * 0.0), &(&it.y / scale), &(&it.z / scale));
            (x, y, z, f64::NEG_INFINITY, f64::NEG_INFINITY)
        }
        ConicStatus::Unbounded => {
            let scale = -sf.c.dot(&it.x);
            let (x, y, z) = finish(&(&it.x / scale), &(&it.y * 0.0), &(&it.z * 0.0));
            (x, y, z, f64::INFINITY, f64::INFINITY)
        }
        _ => {
            let tau = it.tau;
            let xs = &it.x / tau;
            let ys = &it.y / tau;
            let zs = &it.z / tau;
            let pobj = -sf.c.dot(&xs) + sf.objective_constant;
            let dobj = sf.b.dot(&ys) + sf.h.dot(&zs) + sf.objective_constant;
            let (x, y, z) = finish(&xs, &ys, &zs);
            (x, y, z, pobj, dobj)
        }
    };

    Ok(ConicSolution {
        status,
        primal,
        eq_duals,
        cone_duals,
        objective,
        dual_objective,
        residuals: residuals_out,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn lp_1d() -> ConicProblem {
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        p.maximize(AffineExpr::var(x));
        p.add_nonneg("x<=1", AffineExpr::constant(1.0).plus(-1.0, x));
        p.add_nonneg("x>=0", AffineExpr::var(x));
        p
    }

    #[test]
    fn one_dimensional_lp() {
        let sol = solve(&lp_1d(), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, ConicStatus::Optimal);
        assert!((sol.primal[0] - 1.0).abs() < 1e-7, "{:?}", sol);
        assert!((sol.objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn detects_infeasible_lp() {
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        p.maximize(AffineExpr::var(x));
        p.add_nonneg("x>=2", AffineExpr::var(x).plus_const(-2.0));
        p.add_nonneg("x<=1", AffineExpr::constant(1.0).plus(-1.0, x));
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, ConicStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded_lp() {
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        p.maximize(AffineExpr::var(x));
        p.add_nonneg("x>=0", AffineExpr::var(x));
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, ConicStatus::Unbounded);
    }

    #[test]
    fn equality_constrained_lp() {
        // max x + 2y s.t. x + y = 1, x, y >= 0 -> y = 1
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.maximize(AffineExpr::var(x).plus(2.0, y));
        p.add_equality("sum", AffineExpr::var(x).plus(1.0, y).plus_const(-1.0));
        p.add_cone("pos", ConeSpec::NonNeg(2), vec![AffineExpr::var(x), AffineExpr::var(y)]);
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, ConicStatus::Optimal);
        assert!((sol.primal[1] - 1.0).abs() < 1e-7);
        assert!((sol.objective - 2.0).abs() < 1e-7);
        // Lagrangian stationarity: obj + Σ z·row + y·eq = 0
        let z = &sol.cone_duals[0];
        let ye = sol.eq_duals[0];
        assert!((1.0 + z[0] + ye).abs() < 1e-6);
        assert!((2.0 + z[1] + ye).abs() < 1e-6);
    }

    #[test]
    fn second_order_cone() {
        // max x + y s.t. ‖(x, y)‖ <= 1 -> x = y = 1/√2
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.maximize(AffineExpr::var(x).plus(1.0, y));
        p.add_cone(
            "ball",
            ConeSpec::SecondOrder(3),
            vec![AffineExpr::constant(1.0), AffineExpr::var(x), AffineExpr::var(y)],
        );
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, ConicStatus::Optimal);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sol.primal[0] - r).abs() < 1e-6);
        assert!((sol.objective - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn max_eigenvalue_sdp() {
        // max Tr(diag(2, 1) X) s.t. Tr X = 1, X PSD -> 2 at X = diag(1, 0)
        let mut p = ConicProblem::new();
        let x11 = p.add_var("x11");
        let x21 = p.add_var("x21");
        let x22 = p.add_var("x22");
        p.maximize(AffineExpr::var(x11).scaled(2.0).plus(1.0, x22));
        p.add_equality("trace", AffineExpr::var(x11).plus(1.0, x22).plus_const(-1.0));
        let vars = [[x11, x21], [x21, x22]];
        p.add_psd("X", 2, |i, j| AffineExpr::var(vars[i][j]));
        let sol = solve(&p, &SolverSettings::with_tol(1e-10)).unwrap();
        assert_eq!(sol.status, ConicStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-8, "{}", sol.objective);
        assert!((sol.primal[0] - 1.0).abs() < 1e-8);
        assert!(sol.primal[1].abs() < 1e-6);
    }

    #[test]
    fn rotated_cone_geometric_mean() {
        let mut p = ConicProblem::new();
        let v = p.add_var("v");
        p.maximize(AffineExpr::var(v));
        schur_2x2_as_rotated_soc(
            &mut p,
            "gm",
            AffineExpr::constant(4.0),
            AffineExpr::constant(9.0),
            AffineExpr::var(v),
        );
        let sol = solve(&p, &SolverSettings::with_tol(1e-10)).unwrap();
        assert_eq!(sol.status, ConicStatus::Optimal);
        assert!((sol.primal[0] - 6.0).abs() < 1e-8, "{}", sol.primal[0]);
    }

    #[test]
    fn weak_duality_on_small_sdp() {
        // max x12 s.t. [[1, x12], [x12, 1]] PSD -> 1
        let mut p = ConicProblem::new();
        let x = p.add_var("x");
        p.maximize(AffineExpr::var(x));
        p.add_psd("M", 2, |i, j| {
            if i == j {
                AffineExpr::constant(1.0)
            } else {
                AffineExpr::var(x)
            }
        });
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective <= sol.dual_objective + 1e-7);
        assert!((sol.objective - 1.0).abs() < 1e-6);
    }
}
