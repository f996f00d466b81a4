use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::RANK_ONE_RATIO;
use crate::channel::sample_cn;
use crate::system::{check_p1_feasibility, gain, MisoInstance};

/// Matrices whose largest eigenvalue is below this are treated as zero.
pub const ZERO_MATRIX: f64 = 1e-9;

/// Eigenvalues in decreasing order with matching unit eigenvectors as columns.
pub fn hermitian_eigen(w: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let sym = (w + w.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..w.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(w.nrows(), w.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `λ1 / λ2` of one matrix; infinite when `λ2` is at the rounding floor.
fn single_ratio(vals: &[f64]) -> f64 {
    if vals.len() < 2 {
        return f64::INFINITY;
    }
    let (l1, l2) = (vals[0], vals[1]);
    if l2 <= f64::EPSILON * l1 {
        f64::INFINITY
    } else {
        l1 / l2
    }
}

/// Smallest `λ1/λ2` over the matrices that are not numerically zero.
pub fn eig_ratio(w1: &DMatrix<Complex64>, w2: &DMatrix<Complex64>) -> f64 {
    [w1, w2]
        .iter()
        .map(|w| hermitian_eigen(w).0)
        .filter(|v| v[0] > ZERO_MATRIX)
        .map(|v| single_ratio(&v))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub w1: DVector<Complex64>,
    pub w2: DVector<Complex64>,
    pub eig_ratio: f64,
    /// Both matrices passed the rank-one test and eigenvectors were used directly.
    pub rank_one: bool,
    /// The returned beamformers meet every constraint within tolerance.
    pub feasible: bool,
    /// `(1 − β)|h2ᴴ w2|²` of the returned beamformers.
    pub objective: f64,
}

fn principal(w: &DMatrix<Complex64>) -> (f64, DVector<Complex64>) {
    let (vals, vecs) = hermitian_eigen(w);
    (vals[0].max(0.0), vecs.column(0).into_owned())
}

fn unit(v: &DVector<Complex64>) -> DVector<Complex64> {
    let n = v.norm();
    if n > 0.0 {
        v / Complex64::from(n)
    } else {
        v.clone()
    }
}

/// Smallest user-1 power meeting both SINR constraints for fixed directions
/// and user-2 power, or `None` if no power works.
fn min_p1(
    inst: &MisoInstance,
    u1: &DVector<Complex64>,
    u2: &DVector<Complex64>,
    p2: f64,
    beta: f64,
    gamma1: f64,
) -> Option<f64> {
    let a11 = gain(&inst.h1, u1);
    let a12 = gain(&inst.h1, u2);
    let a21 = gain(&inst.h2, u1);
    let a22 = gain(&inst.h2, u2);
    let keep = 1.0 - beta;
    if keep <= 0.0 || a21 <= 0.0 {
        return None;
    }
    let sic = gamma1 * (a22 * p2 + 1.0 / keep) / a21;
    let relay = beta * inst.g;
    let denom = a11 + relay * a21 * (a12 * p2 + 1.0);
    let qos = if denom > 0.0 {
        ((gamma1 - relay * a22 * p2) * (a12 * p2 + 1.0) / denom).max(0.0)
    } else if gamma1 - relay * a22 * p2 <= 0.0 {
        0.0
    } else {
        return None;
    };
    // A hair of headroom so the exact check does not trip on rounding.
    Some(sic.max(qos) * (1.0 + 1e-12))
}

/// Best power split along fixed directions, starting from a user-2 power
/// `p2_hint`. Returns `(p1, p2)` when some split is feasible.
fn polish(
    inst: &MisoInstance,
    u1: &DVector<Complex64>,
    u2: &DVector<Complex64>,
    p2_hint: f64,
    beta: f64,
    gamma1: f64,
) -> Option<(f64, f64)> {
    let fits = |p2: f64| min_p1(inst, u1, u2, p2, beta, gamma1).filter(|p1| p1 + p2 <= 1.0);
    let hint = p2_hint.clamp(0.0, 1.0);
    if let Some(p1) = fits(hint) {
        return Some((p1, hint));
    }
    let mut lo = 0.0;
    let mut best = (fits(0.0)?, 0.0);
    let mut hi = hint;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match fits(mid) {
            Some(p1) => {
                best = (p1, mid);
                lo = mid;
            }
            None => hi = mid,
        }
    }
    Some(best)
}

/// Recovers beamformers from relaxed solutions. Rank-one matrices give their
/// principal eigenvectors; otherwise Gaussian randomization draws
/// `n_randomizations` candidates. Every candidate's powers are re-fitted to
/// the constraints along its directions before the feasibility check.
#[allow(clippy::too_many_arguments)]
pub fn extract_beamformers(
    inst: &MisoInstance,
    w1: &DMatrix<Complex64>,
    w2: &DMatrix<Complex64>,
    beta: f64,
    gamma1: f64,
    rng: &mut impl Rng,
    n_randomizations: usize,
    tol: f64,
) -> Extraction {
    let n = inst.antennas();
    let (v1, vecs1) = hermitian_eigen(w1);
    let (v2, vecs2) = hermitian_eigen(w2);
    let w2_zero = v2[0] <= ZERO_MATRIX;
    let rank_one_1 = single_ratio(&v1).recip() <= RANK_ONE_RATIO;
    let rank_one_2 = w2_zero || single_ratio(&v2).recip() <= RANK_ONE_RATIO;
    let rank_one = rank_one_1 && rank_one_2;

    let (l1, e1) = principal(w1);
    let (l2, e2) = if w2_zero {
        (0.0, DVector::zeros(n))
    } else {
        principal(w2)
    };

    let keep = 1.0 - beta;
    let mut best: Option<(f64, DVector<Complex64>, DVector<Complex64>)> = None;
    let mut consider = |u1: DVector<Complex64>, u2: DVector<Complex64>, p2_hint: f64| {
        if let Some((p1, p2)) = polish(inst, &u1, &u2, p2_hint, beta, gamma1) {
            let c1 = &u1 * Complex64::from(p1.sqrt());
            let c2 = &u2 * Complex64::from(p2.sqrt());
            let ok = check_p1_feasibility(inst, &c1, &c2, beta, gamma1, tol)
                .map(|r| r.feasible)
                .unwrap_or(false);
            if ok {
                let obj = keep * gain(&inst.h2, &c2);
                if best.as_ref().is_none_or(|b| obj > b.0) {
                    best = Some((obj, c1, c2));
                }
            }
        }
    };

    consider(e1.clone(), e2.clone(), l2);
    if !rank_one {
        // Draws ξ_i = U_i Σ_i^{1/2} r with r ~ CN(0, I).
        let root = |vals: &[f64], vecs: &DMatrix<Complex64>| {
            let mut m = vecs.clone();
            for (j, &l) in vals.iter().enumerate() {
                m.column_mut(j).scale_mut(l.max(0.0).sqrt());
            }
            m
        };
        let r1 = root(&v1, &vecs1);
        let r2 = root(&v2, &vecs2);
        for _ in 0..n_randomizations {
            let z1 = DVector::from_fn(n, |_, _| sample_cn(rng));
            let z2 = DVector::from_fn(n, |_, _| sample_cn(rng));
            let xi1 = &r1 * z1;
            let xi2 = if w2_zero { DVector::zeros(n) } else { &r2 * z2 };
            let total = xi1.norm_squared() + xi2.norm_squared();
            let p2 = if total > 1.0 {
                xi2.norm_squared() / total
            } else {
                xi2.norm_squared()
            };
            consider(unit(&xi1), unit(&xi2), p2);
        }
    }

    let ratio = eig_ratio(w1, w2);
    match best {
        Some((objective, w1v, w2v)) => Extraction {
            w1: w1v,
            w2: w2v,
            eig_ratio: ratio,
            rank_one,
            feasible: true,
            objective,
        },
        None => {
            let w1v = &e1 * Complex64::from(l1.sqrt());
            let w2v = &e2 * Complex64::from(l2.sqrt());
            let objective = keep * gain(&inst.h2, &w2v);
            Extraction {
                w1: w1v,
                w2: w2v,
                eig_ratio: ratio,
                rank_one,
                feasible: false,
                objective,
            }
        }
    }
}
