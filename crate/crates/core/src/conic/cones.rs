//! Cone algebra for the symmetric cones handled by the interior-point method:
//! the nonnegative orthant, the second-order (Lorentz) cone and the cone of
//! real symmetric PSD matrices stored in scaled lower-triangular `svec` form.

use nalgebra::{DMatrix, DVector};

/// Internal cone block in the standard-form problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockKind {
    NonNeg,
    Soc,
    /// Real symmetric PSD matrices of the given side.
    Psd(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    pub kind: BlockKind,
    pub offset: usize,
    pub dim: usize,
}

impl Block {
    /// Barrier degree contributed by this block.
    pub fn degree(&self) -> usize {
        match self.kind {
            BlockKind::NonNeg => self.dim,
            BlockKind::Soc => 1,
            BlockKind::Psd(side) => side,
        }
    }
}

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Length of `svec` for a symmetric matrix of the given side.
pub fn svec_len(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Index of entry `(i, j)`, `i >= j`, in column-major lower-triangular order.
pub fn svec_index(side: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < side);
    j * side - j * (j + 1) / 2 + i
}

pub(crate) fn smat(v: &[f64], side: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        for i in j..side {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] / SQRT2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

pub(crate) fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let side = m.nrows();
    let mut k = 0;
    for j in 0..side {
        for i in j..side {
            out[k] = if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)]) * SQRT2
            };
            k += 1;
        }
    }
}

/// Writes the cone identity `e` of each block into `out`.
pub(crate) fn identity(blocks: &[Block], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for b in blocks {
        let o = b.offset;
        match b.kind {
            BlockKind::NonNeg => out[o..o + b.dim].iter_mut().for_each(|x| *x = 1.0),
            BlockKind::Soc => out[o] = 1.0,
            BlockKind::Psd(side) => {
                for i in 0..side {
                    out[o + svec_index(side, i, i)] = 1.0;
                }
            }
        }
    }
}

/// Smallest "eigenvalue" of `x` in the Jordan-algebra sense, per block; the
/// minimum over all blocks is returned. Positive iff `x` is in the interior.
pub(crate) fn min_eigenvalue(blocks: &[Block], x: &[f64]) -> f64 {
    let mut out = f64::INFINITY;
    for b in blocks {
        let v = &x[b.offset..b.offset + b.dim];
        let e = match b.kind {
            BlockKind::NonNeg => v.iter().cloned().fold(f64::INFINITY, f64::min),
            BlockKind::Soc => v[0] - norm(&v[1..]),
            BlockKind::Psd(side) => smat(v, side).symmetric_eigenvalues().min(),
        };
        out = out.min(e);
    }
    out
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jordan product `u ∘ v`.
pub(crate) fn jordan_product(blocks: &[Block], u: &[f64], v: &[f64], out: &mut [f64]) {
    for b in blocks {
        let r = b.offset..b.offset + b.dim;
        let (u, v) = (&u[r.clone()], &v[r.clone()]);
        let o = &mut out[r];
        match b.kind {
            BlockKind::NonNeg => {
                for i in 0..b.dim {
                    o[i] = u[i] * v[i];
                }
            }
            BlockKind::Soc => {
                o[0] = dot(u, v);
                for i in 1..b.dim {
                    o[i] = u[0] * v[i] + v[0] * u[i];
                }
            }
            BlockKind::Psd(side) => {
                let um = smat(u, side);
                let vm = smat(v, side);
                let p = &um * &vm;
                let sym = (&p + p.transpose()) * 0.5;
                svec_into(&sym, o);
            }
        }
    }
}

/// Solves `lambda ∘ x = w` for `x`. For PSD blocks `lambda` must be diagonal,
/// which holds for the Nesterov-Todd scaled point.
pub(crate) fn jordan_divide(blocks: &[Block], lambda: &[f64], w: &[f64], out: &mut [f64]) {
    for b in blocks {
        let r = b.offset..b.offset + b.dim;
        let (l, w) = (&lambda[r.clone()], &w[r.clone()]);
        let o = &mut out[r];
        match b.kind {
            BlockKind::NonNeg => {
                for i in 0..b.dim {
                    o[i] = w[i] / l[i];
                }
            }
            BlockKind::Soc => {
                let det = l[0] * l[0] - dot(&l[1..], &l[1..]);
                let x0 = (l[0] * w[0] - dot(&l[1..], &w[1..])) / det;
                o[0] = x0;
                for i in 1..b.dim {
                    o[i] = (w[i] - x0 * l[i]) / l[0];
                }
            }
            BlockKind::Psd(side) => {
                let mut k = 0;
                for j in 0..side {
                    let lj = l[svec_index(side, j, j)];
                    for i in j..side {
                        let li = l[svec_index(side, i, i)];
                        o[k] = 2.0 * w[k] / (li + lj);
                        k += 1;
                    }
                }
            }
        }
    }
}

/// Largest `alpha >= 0` (possibly infinite) with `x + alpha d` in the cone,
/// assuming `x` is in the interior.
pub(crate) fn max_step(blocks: &[Block], x: &[f64], d: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for b in blocks {
        let r = b.offset..b.offset + b.dim;
        let (x, d) = (&x[r.clone()], &d[r]);
        let a = match b.kind {
            BlockKind::NonNeg => x
                .iter()
                .zip(d)
                .filter(|(_, di)| **di < 0.0)
                .map(|(xi, di)| -xi / di)
                .fold(f64::INFINITY, f64::min),
            BlockKind::Soc => soc_max_step(x, d),
            BlockKind::Psd(side) => psd_max_step(&smat(x, side), &smat(d, side)),
        };
        alpha = alpha.min(a);
    }
    alpha
}

fn soc_max_step(x: &[f64], d: &[f64]) -> f64 {
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = x[0] * d[0] - dot(&x[1..], &d[1..]);
    let xn = dot(&x[1..], &x[1..]).sqrt();
    let c = ((x[0] - xn) * (x[0] + xn)).max(0.0);
    if d[0] >= 0.0 && a >= 0.0 {
        return f64::INFINITY;
    }
    if a.abs() < 1e-300 {
        return if b < 0.0 { -c / (2.0 * b) } else { f64::INFINITY };
    }
    let disc = (b * b - a * c).max(0.0).sqrt();
    // Both branches reduce to the first positive root of a·t² + 2b·t + c.
    let root = if a < 0.0 {
        (-b - disc) / a
    } else {
        // a > 0 and d0 < 0: two positive roots, take the smaller one.
        c / (-b + disc)
    };
    if root.is_finite() && root >= 0.0 {
        root
    } else {
        0.0
    }
}

fn psd_max_step(x: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let chol = match x.clone().cholesky() {
        Some(c) => c,
        None => return 0.0,
    };
    let l = chol.l();
    // M = L^{-1} D L^{-T}
    let y = l.solve_lower_triangular(d).expect("cholesky factor is nonsingular");
    let m = l
        .solve_lower_triangular(&y.transpose())
        .expect("cholesky factor is nonsingular");
    let m = (&m + m.transpose()) * 0.5;
    let lmin = m.symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// Nesterov-Todd scaling of one block, stored densely.
pub(crate) struct BlockScaling {
    /// `W` with `W z = W^{-T} s = lambda`.
    pub w: DMatrix<f64>,
    pub w_inv: DMatrix<f64>,
    pub lambda: DVector<f64>,
}

/// Computes the Nesterov-Todd scaling point for every block. Returns `None`
/// when `s` or `z` has numerically left the interior.
pub(crate) fn nt_scaling(blocks: &[Block], s: &[f64], z: &[f64]) -> Option<Vec<BlockScaling>> {
    blocks
        .iter()
        .map(|b| {
            let r = b.offset..b.offset + b.dim;
            let (s, z) = (&s[r.clone()], &z[r]);
            match b.kind {
                BlockKind::NonNeg => nonneg_scaling(s, z),
                BlockKind::Soc => soc_scaling(s, z),
                BlockKind::Psd(side) => psd_scaling(side, s, z),
            }
        })
        .collect()
}

fn nonneg_scaling(s: &[f64], z: &[f64]) -> Option<BlockScaling> {
    let n = s.len();
    let mut w = DMatrix::zeros(n, n);
    let mut lambda = DVector::zeros(n);
    for i in 0..n {
        if !(s[i] > 0.0 && z[i] > 0.0) {
            return None;
        }
        w[(i, i)] = (s[i] / z[i]).sqrt();
        lambda[i] = (s[i] * z[i]).sqrt();
    }
    let w_inv = w.map(|x| if x != 0.0 { 1.0 / x } else { 0.0 });
    Some(BlockScaling { w, w_inv, lambda })
}

fn soc_scaling(s: &[f64], z: &[f64]) -> Option<BlockScaling> {
    let n = s.len();
    let sn2 = s[0] * s[0] - dot(&s[1..], &s[1..]);
    let zn2 = z[0] * z[0] - dot(&z[1..], &z[1..]);
    if !(sn2 > 0.0 && zn2 > 0.0 && s[0] > 0.0 && z[0] > 0.0) {
        return None;
    }
    let (sn, zn) = (sn2.sqrt(), zn2.sqrt());
    let sb: Vec<f64> = s.iter().map(|x| x / sn).collect();
    let zb: Vec<f64> = z.iter().map(|x| x / zn).collect();
    let gamma = ((1.0 + dot(&sb, &zb)) / 2.0).sqrt();
    let mut wb = DVector::zeros(n);
    wb[0] = (sb[0] + zb[0]) / (2.0 * gamma);
    for i in 1..n {
        wb[i] = (sb[i] - zb[i]) / (2.0 * gamma);
    }
    let eta = (sn / zn).sqrt();
    // W = eta [[w0, w1ᵀ], [w1, I + w1 w1ᵀ / (1 + w0)]], so W² = eta² (2 w wᵀ - J).
    let mut w = DMatrix::zeros(n, n);
    w[(0, 0)] = wb[0];
    for i in 1..n {
        w[(0, i)] = wb[i];
        w[(i, 0)] = wb[i];
        for j in 1..n {
            w[(i, j)] = wb[i] * wb[j] / (1.0 + wb[0]);
        }
        w[(i, i)] += 1.0;
    }
    // The inverse is J W J / eta².
    let mut w_inv = w.clone();
    for i in 1..n {
        w_inv[(0, i)] = -w_inv[(0, i)];
        w_inv[(i, 0)] = -w_inv[(i, 0)];
    }
    w_inv /= eta;
    w *= eta;
    let zv = DVector::from_column_slice(z);
    let lambda = &w * zv;
    Some(BlockScaling { w, w_inv, lambda })
}

fn psd_scaling(side: usize, s: &[f64], z: &[f64]) -> Option<BlockScaling> {
    let sm = smat(s, side);
    let zm = smat(z, side);
    let l1 = sm.cholesky()?.l();
    let l2 = zm.cholesky()?.l();
    let svd = (l2.transpose() * &l1).svd(true, true);
    let vt = svd.v_t?;
    let u = svd.u?;
    let sig = svd.singular_values;
    if sig.iter().any(|x| !(*x > 0.0)) {
        return None;
    }
    // R = L1 V diag(sig)^{-1/2}; then R^T Z R = R^{-1} S R^{-T} = diag(sig).
    let mut r = &l1 * vt.transpose();
    for j in 0..side {
        let f = 1.0 / sig[j].sqrt();
        r.column_mut(j).scale_mut(f);
    }
    // R⁻¹ = diag(sig)^{-1/2} Uᵀ L2ᵀ.
    let mut r_inv = u.transpose() * l2.transpose();
    for i in 0..side {
        let f = 1.0 / sig[i].sqrt();
        r_inv.row_mut(i).scale_mut(f);
    }
    let w = congruence_map(&r, side);
    let w_inv = congruence_map(&r_inv, side);
    let mut lambda = DVector::zeros(svec_len(side));
    for i in 0..side {
        lambda[svec_index(side, i, i)] = sig[i];
    }
    Some(BlockScaling { w, w_inv, lambda })
}

/// Matrix of `svec(X) ↦ svec(Rᵀ X R)`.
fn congruence_map(r: &DMatrix<f64>, side: usize) -> DMatrix<f64> {
    let dim = svec_len(side);
    let mut w = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    let mut col = vec![0.0; dim];
    for k in 0..dim {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[k] = 1.0;
        let em = smat(&e, side);
        let img = r.transpose() * em * r;
        svec_into(&img, &mut col);
        for i in 0..dim {
            w[(i, k)] = col[i];
        }
    }
    w
}
