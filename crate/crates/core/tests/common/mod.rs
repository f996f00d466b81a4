#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swipt_noma::channel::{sample_instance, trial_rng, GeometryConfig};
use swipt_noma::conic::{ConeSpec, ConicProblem, ConicSolution};
use swipt_noma::siso;
use swipt_noma::system::{MisoInstance, SisoInstance, SystemParams};

/// KKT residuals recomputed from the problem data alone, with the same
/// normalization the solver reports.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kkt {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Kkt {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

fn lower_to_sym(v: &[f64], n: usize, off_diag_scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            let x = if i == j { v[k] } else { v[k] * off_diag_scale };
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

fn min_eig(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().min()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Distance-like violation of `v ∈ K`.
fn cone_violation(cone: ConeSpec, v: &[f64], dual: bool) -> f64 {
    match cone {
        ConeSpec::NonNeg(_) => v.iter().fold(0.0, |m, &x| m.max(-x)),
        ConeSpec::SecondOrder(_) => (norm(&v[1..]) - v[0]).max(0.0),
        ConeSpec::RotatedSecondOrder(_) => {
            // Primal: ‖w‖² ≤ ab. Dual: ‖w‖² ≤ 4ab.
            let (a, b, w) = (v[0], v[1], norm(&v[2..]));
            let k = if dual { 1.0 } else { 0.5 };
            ((k * k * (a - b).powi(2) + w * w).sqrt() - k * (a + b)).max(0.0)
        }
        ConeSpec::Psd(n) => {
            let m = lower_to_sym(v, n, if dual { 0.5 } else { 1.0 });
            (-min_eig(m)).max(0.0)
        }
    }
}

/// Recomputes primal, dual and gap residuals of `sol` for `p`, using the
/// Lagrangian `obj(x) + Σ z·row(x) + Σ y·eq(x)`.
pub fn recompute_kkt(p: &ConicProblem, sol: &ConicSolution) -> Kkt {
    let x = &sol.primal;
    let n = p.var_count();
    let mut b_norm = 0.0f64;
    let mut primal = 0.0f64;
    let mut grad = vec![0.0; n];
    for (v, c) in p.objective().terms.iter() {
        grad[v.0] += c;
    }
    let c_norm = grad.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut dual_obj = p.objective().constant;
    let mut dual_cone = 0.0f64;
    for ((_, e), &y) in p.equalities().iter().zip(&sol.eq_duals) {
        b_norm = b_norm.max(e.constant.abs());
        primal = primal.max(e.eval(x).abs());
        for (v, c) in &e.terms {
            grad[v.0] += y * c;
        }
        dual_obj += y * e.constant;
    }
    for (con, z) in p.constraints().iter().zip(&sol.cone_duals) {
        let vals: Vec<f64> = con.rows.iter().map(|r| r.eval(x)).collect();
        for r in &con.rows {
            b_norm = b_norm.max(r.constant.abs());
        }
        primal = primal.max(cone_violation(con.cone, &vals, false));
        dual_cone = dual_cone.max(cone_violation(con.cone, z, true));
        for (r, &zi) in con.rows.iter().zip(z) {
            for (v, c) in &r.terms {
                grad[v.0] += zi * c;
            }
            dual_obj += zi * r.constant;
        }
    }
    let stationarity = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let p_obj = p.objective().eval(x);
    Kkt {
        primal: primal / (1.0 + b_norm),
        dual: stationarity.max(dual_cone) / (1.0 + c_norm),
        gap: (p_obj - dual_obj).abs() / (1.0 + p_obj.abs().min(dual_obj.abs())),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Feasible single-antenna instances: half with synthetic gains spread over
/// several decades, half drawn from the channel model at random powers.
pub fn siso_instances(seed: u64, count: usize) -> Vec<(SisoInstance, f64)> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        k += 1;
        let (inst, gamma) = if k.is_multiple_of(2) {
            let s = SisoInstance::new(
                log_uniform(&mut r, 0.1, 1e3),
                log_uniform(&mut r, 0.1, 1e3),
                log_uniform(&mut r, 1e-3, 10.0),
            )
            .unwrap();
            (s, log_uniform(&mut r, 0.1, 10.0))
        } else {
            let params = SystemParams {
                antenna_count_nt: 1,
                transmit_power_dbm: r.random_range(-40.0..40.0),
                ..SystemParams::default()
            };
            let inst = sample_instance(&mut trial_rng(seed, k), &params, &GeometryConfig::default()).unwrap();
            (inst.to_siso().unwrap(), log_uniform(&mut r, 0.5, 10.0))
        };
        if siso::feasible_beta_interval(&inst, gamma).feasible
            && siso::gss_solve(&inst, gamma, 1e-4).status.has_solution()
        {
            out.push((inst, gamma));
        }
    }
    out
}

pub fn complex_gaussian(r: &mut impl Rng, n: usize, scale: f64) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| {
        let (a, b): (f64, f64) = (r.random::<f64>() - 0.5, r.random::<f64>() - 0.5);
        Complex64::new(a, b) * scale
    })
}

/// Multi-antenna instances from the channel model at random powers in
/// `[lo, hi]` dBm.
pub fn model_instances(seed: u64, count: usize, nt: usize, lo: f64, hi: f64) -> Vec<MisoInstance> {
    let mut r = rng(seed ^ 0x5eed);
    (0..count as u64)
        .map(|k| {
            let params = SystemParams {
                antenna_count_nt: nt,
                transmit_power_dbm: r.random_range(lo..hi),
                ..SystemParams::default()
            };
            sample_instance(&mut trial_rng(seed, k), &params, &GeometryConfig::default()).unwrap()
        })
        .collect()
}

/// Instances with gains of order one, where the optimal splitting ratio is
/// usually interior.
pub fn synthetic_instances(seed: u64, count: usize, nt: usize) -> Vec<MisoInstance> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let (s1, s2) = (log_uniform(&mut r, 0.5, 3.0), log_uniform(&mut r, 2.0, 10.0));
            let h1 = complex_gaussian(&mut r, nt, s1);
            let h2 = complex_gaussian(&mut r, nt, s2);
            MisoInstance::new(h1, h2, log_uniform(&mut r, 0.2, 3.0)).unwrap()
        })
        .collect()
}

pub fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((v.len() - 1) as f64 * q).round() as usize;
    v[k]
}
