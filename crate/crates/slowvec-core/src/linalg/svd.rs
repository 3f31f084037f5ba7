//! Singular value decomposition by one-sided Jacobi rotations, plus the
//! spectral-norm and nullspace helpers built on top of it.
//!
//! One-sided Jacobi works on the columns of the input until they are
//! pairwise orthogonal, which computes even tiny singular values with high
//! relative accuracy — exactly what residual certificates need.  The sweep
//! order is fixed, so the factorization is deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::math;

/// Result of [`svd`]: `A = U · diag(s) · Vᴴ` with `s` sorted descending.
///
/// For an `m × n` input with `m ≥ n`, `u` is `m × n` with orthonormal
/// columns and `v` is `n × n` unitary.  Inputs with `m < n` are factored
/// through their adjoint, so the same shapes hold with roles swapped.
pub struct Svd {
    /// Left singular vectors (orthonormal columns).
    pub u: CMat,
    /// Singular values, descending.
    pub s: Vec<f64>,
    /// Right singular vectors (unitary).
    pub v: CMat,
}

const MAX_SWEEPS: usize = 64;
/// Relative off-diagonal threshold below which a column pair counts as
/// orthogonal.
const ORTHO_TOL: f64 = 1e-15;
/// Columns whose squared norm falls below the largest squared column norm
/// times this factor are numerically zero.  Without the floor, a singular
/// input leaves a denormal column behind whose relative correlations are
/// arithmetic noise, and the sweep keeps rotating against it forever.
const DEAD_COLUMN_REL: f64 = 1e-30;

/// One-sided Jacobi SVD.
pub fn svd(a: &CMat) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd { u: t.v, s: t.s, v: t.u });
    }
    let m = a.rows();
    let n = a.cols();
    if n == 0 {
        return Ok(Svd { u: CMat::zeros(m, 0), s: Vec::new(), v: CMat::zeros(0, 0) });
    }

    // Work on columns; accumulate the right rotations in V.
    let mut work = a.clone();
    let mut v = CMat::identity(n);

    let mut converged = false;
    let mut last_off = 0.0;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        let mut max_rel = 0.0_f64;
        // Dead-column floor for this sweep.
        let mut top = 0.0f64;
        for j in 0..n {
            let mut nj = 0.0;
            for i in 0..m {
                nj += work.at(i, j).norm_sqr();
            }
            top = top.max(nj);
        }
        let floor = top * DEAD_COLUMN_REL;
        for p in 0..n {
            for q in (p + 1)..n {
                // Gram entries of the column pair.
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = ZERO;
                for i in 0..m {
                    let cp = work.at(i, p);
                    let cq = work.at(i, q);
                    app += cp.norm_sqr();
                    aqq += cq.norm_sqr();
                    apq += cp.conj() * cq;
                }
                if app <= floor || aqq <= floor {
                    continue;
                }
                let rel = apq.norm() / math::sqrt(app * aqq);
                max_rel = max_rel.max(rel);
                if rel <= ORTHO_TOL {
                    continue;
                }
                rotated = true;

                // Keep the heavier column in front; the sorted order steers
                // the sweep away from rotation cycles.
                if app < aqq {
                    for i in 0..m {
                        let tmp = work.at(i, p);
                        *work.at_mut(i, p) = work.at(i, q);
                        *work.at_mut(i, q) = tmp;
                    }
                    for i in 0..n {
                        let tmp = v.at(i, p);
                        *v.at_mut(i, p) = v.at(i, q);
                        *v.at_mut(i, q) = tmp;
                    }
                    core::mem::swap(&mut app, &mut aqq);
                    apq = apq.conj();
                }

                // Unitary 2x2 that diagonalizes [[app, apq], [conj(apq), aqq]].
                let abs_apq = apq.norm();
                let phase = apq / abs_apq;
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = {
                    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                    sign / (math::abs(tau) + math::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                let s_fwd = phase * s; // multiplies column p in the q-update
                let s_bwd = phase.conj() * s; // multiplies column q in the p-update

                for i in 0..m {
                    let cp = work.at(i, p);
                    let cq = work.at(i, q);
                    *work.at_mut(i, p) = cp * c - cq * s_bwd;
                    *work.at_mut(i, q) = cp * s_fwd + cq * c;
                }
                for i in 0..n {
                    let vp = v.at(i, p);
                    let vq = v.at(i, q);
                    *v.at_mut(i, p) = vp * c - vq * s_bwd;
                    *v.at_mut(i, q) = vp * s_fwd + vq * c;
                }
            }
        }
        last_off = max_rel;
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailed { routine: "jacobi svd", residual: last_off });
    }

    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| linalg::norm2(&work.col(j))).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    let mut s = Vec::with_capacity(n);
    let mut u = CMat::zeros(m, n);
    let mut v_sorted = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        s.push(norms[src]);
        v_sorted.set_col(dst, &v.col(src));
        if norms[src] > 0.0 {
            let col = work.col(src);
            let scaled: Vec<C64> = col.iter().map(|z| z / norms[src]).collect();
            u.set_col(dst, &scaled);
        }
    }

    // Complete U where singular values vanished (e.g. nilpotent input):
    // greedily orthogonalize coordinate vectors against the existing columns.
    let rank_floor = s.iter().filter(|&&x| x > 0.0).count();
    if rank_floor < n {
        complete_orthonormal(&mut u, rank_floor);
    }

    Ok(Svd { u, s, v: v_sorted })
}

/// Fill columns `from..` of `u` with an orthonormal completion of the first
/// `from` columns, chosen deterministically from coordinate directions.
fn complete_orthonormal(u: &mut CMat, from: usize) {
    let m = u.rows();
    let n = u.cols();
    for k in from..n {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for cand in 0..m {
            let mut r = vec![ZERO; m];
            r[cand] = ONE;
            for j in 0..k {
                let col = u.col(j);
                let overlap = linalg::dot(&col, &r);
                linalg::axpy(-overlap, &col, &mut r);
            }
            let rn = linalg::norm2(&r);
            if best.as_ref().map_or(true, |(bn, _)| rn > *bn) {
                best = Some((rn, r));
            }
        }
        let (rn, mut r) = best.expect("at least one candidate direction");
        assert!(rn > 1e-8, "orthonormal completion degenerate");
        linalg::normalize(&mut r);
        u.set_col(k, &r);
    }
}

/// Spectral norm (largest singular value) by power iteration on `AᴴA`.
///
/// Deterministic: starts from a fixed harmonic-weight vector, and falls back
/// to the heaviest column when that start is unluckily deficient.  Returns
/// the estimate and the right singular vector that achieves it, so orbit
/// scans can warm-start from the previous step.
pub fn spectral_norm_warm(a: &CMat, warm: Option<&[C64]>) -> (f64, Vec<C64>) {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return (0.0, Vec::new());
    }

    let run = |start: Vec<C64>| -> (f64, Vec<C64>) {
        let mut v = start;
        if linalg::normalize(&mut v) == 0.0 {
            return (0.0, v);
        }
        let mut est = 0.0;
        let mut stable = 0;
        for _ in 0..600 {
            let av = a.matvec(&v);
            let new_est = linalg::norm2(&av);
            if new_est == 0.0 {
                return (0.0, v);
            }
            let mut next = a.adjoint_matvec(&av);
            if linalg::normalize(&mut next) == 0.0 {
                return (new_est, v);
            }
            v = next;
            if math::abs(new_est - est) <= 1e-14 * new_est.max(1.0) {
                stable += 1;
                if stable >= 2 {
                    est = new_est;
                    break;
                }
            } else {
                stable = 0;
            }
            est = new_est;
        }
        (est, v)
    };

    let start: Vec<C64> = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => (0..n)
            .map(|j| C64::new(1.0 / (j + 1) as f64, 0.0))
            .collect(),
    };
    let (mut est, mut vec_best) = run(start);

    // Guard against a start vector orthogonal to the top singular space: the
    // heaviest column is always a valid lower bound.
    let mut heavy = 0;
    let mut heavy_norm = 0.0;
    for j in 0..n {
        let cn = linalg::norm2(&a.col(j));
        if cn > heavy_norm {
            heavy_norm = cn;
            heavy = j;
        }
    }
    if heavy_norm > est * (1.0 + 1e-12) {
        let mut e = vec![ZERO; n];
        e[heavy] = ONE;
        let (est2, v2) = run(e);
        if est2 > est {
            est = est2;
            vec_best = v2;
        }
    }
    (est, vec_best)
}

/// Spectral norm of `a`.
pub fn spectral_norm(a: &CMat) -> f64 {
    spectral_norm_warm(a, None).0
}

/// Smallest singular value and its right singular vector.
pub fn smallest_singular(a: &CMat) -> Result<(f64, Vec<C64>)> {
    let f = svd(a)?;
    let last = f.s.len() - 1;
    Ok((f.s[last], f.v.col(last)))
}

/// Orthonormal basis of the numerical nullspace `{x : ‖Ax‖ ≤ tol}`:
/// right singular vectors whose singular values are at most `tol`.
pub fn nullspace_basis(a: &CMat, tol: f64) -> Result<CMat> {
    let f = svd(a)?;
    let n = a.cols();
    let keep: Vec<usize> = (0..f.s.len()).filter(|&i| f.s[i] <= tol).collect();
    let mut basis = CMat::zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_col(dst, &f.v.col(src));
    }
    Ok(basis)
}

/// Orthonormal basis of the numerical column space of `a`: left singular
/// vectors with `σ > rel_tol · σ_max`.
pub fn range_basis(a: &CMat, rel_tol: f64) -> Result<CMat> {
    let f = svd(a)?;
    let smax = f.s.first().copied().unwrap_or(0.0);
    let rank = f.s.iter().filter(|&&x| x > rel_tol * smax && x > 0.0).count();
    Ok(f.u.columns(0, rank))
}
