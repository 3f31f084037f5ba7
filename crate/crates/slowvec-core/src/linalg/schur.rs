//! Unitary triangularization (complex Schur form) and the spectral tools
//! built on it: eigenvalue reordering, triangular Sylvester solves, and
//! invariant-subspace projectors.
//!
//! The pipeline is the classical one — Householder reduction to Hessenberg
//! form followed by an implicit single-shift QR iteration with Wilkinson
//! shifts — implemented directly on dense storage.  Reordering uses unitary
//! adjacent swaps, so a cluster of eigenvalues can be moved to the leading
//! block without leaving the similarity class.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};
use crate::math;

/// Schur factorization `A = Q T Qᴴ` with `Q` unitary and `T` upper triangular.
#[derive(Clone)]
pub struct Schur {
    /// Unitary factor; its leading columns span invariant subspaces of the
    /// leading diagonal blocks of `T`.
    pub q: CMat,
    /// Upper-triangular factor carrying the eigenvalues on its diagonal.
    pub t: CMat,
}

const EPS: f64 = f64::EPSILON;
/// QR iterations allowed per eigenvalue before giving up.
const MAX_ITERS_PER_EIGENVALUE: usize = 80;

/// Plane rotation `U` with `U·(a, b)ᵀ = (ρ, 0)ᵀ`, stored unnormalized.
#[derive(Clone, Copy)]
struct Rot {
    a: C64,
    b: C64,
    inv: f64,
}

impl Rot {
    fn zeroing(a: C64, b: C64) -> Option<Rot> {
        let rho = math::hypot(a.norm(), b.norm());
        if rho == 0.0 {
            return None;
        }
        Some(Rot { a, b, inv: 1.0 / rho })
    }

    /// Rows `i`, `j` of `m` over columns `c0..c1`: left-multiply by `U`.
    fn apply_left(&self, m: &mut CMat, i: usize, j: usize, c0: usize, c1: usize) {
        for c in c0..c1 {
            let x = m.at(i, c);
            let y = m.at(j, c);
            *m.at_mut(i, c) = (self.a.conj() * x + self.b.conj() * y) * self.inv;
            *m.at_mut(j, c) = (-self.b * x + self.a * y) * self.inv;
        }
    }

    /// Columns `i`, `j` of `m` over rows `r0..r1`: right-multiply by `Uᴴ`.
    fn apply_right(&self, m: &mut CMat, i: usize, j: usize, r0: usize, r1: usize) {
        for r in r0..r1 {
            let x = m.at(r, i);
            let y = m.at(r, j);
            *m.at_mut(r, i) = (self.a * x + self.b * y) * self.inv;
            *m.at_mut(r, j) = (-self.b.conj() * x + self.a.conj() * y) * self.inv;
        }
    }
}

/// Householder reduction to upper Hessenberg form: `A = Q H Qᴴ`.
pub fn hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "hessenberg needs a square matrix");
    let mut h = a.clone();
    let mut q = CMat::identity(n);
    if n < 3 {
        return (h, q);
    }

    for k in 0..n - 2 {
        let mut v: Vec<C64> = (k + 1..n).map(|i| h.at(i, k)).collect();
        let xnorm = {
            let mut s = 0.0;
            for z in &v {
                s += z.norm_sqr();
            }
            math::sqrt(s)
        };
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // H <- P H with P = I - beta v vᴴ acting on rows k+1..n.
        for j in k..n {
            let mut w = ZERO;
            for i in 0..v.len() {
                w += v[i].conj() * h.at(k + 1 + i, j);
            }
            w *= beta;
            for i in 0..v.len() {
                *h.at_mut(k + 1 + i, j) -= w * v[i];
            }
        }
        // H <- H P on columns k+1..n.
        for r in 0..n {
            let mut w = ZERO;
            for i in 0..v.len() {
                w += h.at(r, k + 1 + i) * v[i];
            }
            w *= beta;
            for i in 0..v.len() {
                *h.at_mut(r, k + 1 + i) -= w * v[i].conj();
            }
        }
        // Q <- Q P.
        for r in 0..n {
            let mut w = ZERO;
            for i in 0..v.len() {
                w += q.at(r, k + 1 + i) * v[i];
            }
            w *= beta;
            for i in 0..v.len() {
                *q.at_mut(r, k + 1 + i) -= w * v[i].conj();
            }
        }
        // Entries below the subdiagonal are now zero by construction.
        for i in k + 2..n {
            *h.at_mut(i, k) = ZERO;
        }
    }
    (h, q)
}

/// Eigenvalues of the trailing 2×2 block, for the Wilkinson shift.
fn wilkinson_shift(t: &CMat, hi: usize) -> C64 {
    let x = t.at(hi - 1, hi - 1);
    let y = t.at(hi - 1, hi);
    let z = t.at(hi, hi - 1);
    let w = t.at(hi, hi);
    let tr = x + w;
    let det = x * w - y * z;
    let disc = (tr * tr - det.scale(4.0)).sqrt();
    let l1 = (tr + disc).scale(0.5);
    let l2 = (tr - disc).scale(0.5);
    if (l1 - w).norm() <= (l2 - w).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur factorization via implicit single-shift QR.
pub fn schur(a: &CMat) -> Result<Schur> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "schur needs a square matrix");
    if n == 0 {
        return Ok(Schur { q: CMat::identity(0), t: CMat::identity(0) });
    }
    let (mut t, mut q) = hessenberg(a);
    let scale = t.fro_norm().max(f64::MIN_POSITIVE);

    let mut hi = n - 1;
    let mut iters_here = 0usize;
    while hi > 0 {
        // Deflate negligible subdiagonals.
        for i in 0..hi {
            let thresh = EPS * (t.at(i, i).norm() + t.at(i + 1, i + 1).norm());
            let thresh = if thresh > 0.0 { thresh } else { EPS * scale };
            if t.at(i + 1, i).norm() <= thresh {
                *t.at_mut(i + 1, i) = ZERO;
            }
        }
        if t.at(hi, hi - 1) == ZERO {
            hi -= 1;
            iters_here = 0;
            continue;
        }
        let mut lo = hi;
        while lo > 0 && t.at(lo, lo - 1) != ZERO {
            lo -= 1;
        }

        iters_here += 1;
        if iters_here > MAX_ITERS_PER_EIGENVALUE {
            return Err(Error::ConvergenceFailed {
                routine: "shifted qr iteration",
                residual: t.at(hi, hi - 1).norm(),
            });
        }
        let mu = if iters_here % 16 == 0 {
            // Exceptional shift to break rare symmetric stalls.
            t.at(hi, hi) + C64::new(0.75 * t.at(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(&t, hi)
        };

        // Implicit shifted QR sweep on the active block [lo, hi].
        let first = match Rot::zeroing(t.at(lo, lo) - mu, t.at(lo + 1, lo)) {
            Some(r) => r,
            // Unreachable while t[lo+1, lo] != 0; retry with a fresh shift.
            None => continue,
        };
        first.apply_left(&mut t, lo, lo + 1, lo, n);
        first.apply_right(&mut t, lo, lo + 1, 0, (lo + 3).min(hi + 1));
        first.apply_right(&mut q, lo, lo + 1, 0, n);

        for k in lo..hi.saturating_sub(1) {
            let rot = match Rot::zeroing(t.at(k + 1, k), t.at(k + 2, k)) {
                Some(r) => r,
                None => break,
            };
            rot.apply_left(&mut t, k + 1, k + 2, k, n);
            rot.apply_right(&mut t, k + 1, k + 2, 0, (k + 4).min(hi + 1));
            rot.apply_right(&mut q, k + 1, k + 2, 0, n);
            *t.at_mut(k + 2, k) = ZERO;
        }
    }

    // The iteration leaves exact zeros below the diagonal; enforce it.
    for i in 0..n {
        for j in 0..i {
            *t.at_mut(i, j) = ZERO;
        }
    }
    Ok(Schur { q, t })
}

/// Swap the eigenvalues at diagonal positions `k` and `k+1` of a Schur pair
/// by a unitary similarity.
fn swap_adjacent(t: &mut CMat, q: &mut CMat, k: usize) {
    let n = t.rows();
    let l1 = t.at(k, k);
    let l2 = t.at(k + 1, k + 1);
    let coupling = t.at(k, k + 1);

    // Eigenvector of [[l1, c], [0, l2]] for l2 is (c, l2 - l1).
    let v0 = coupling;
    let v1 = l2 - l1;
    let rho = math::hypot(v0.norm(), v1.norm());
    if rho < 1e-300 {
        // Identical eigenvalues with no coupling: swapping is trivial.
        *t.at_mut(k, k) = l2;
        *t.at_mut(k + 1, k + 1) = l1;
        return;
    }
    let inv = 1.0 / rho;

    // G has first column v/rho; apply T <- Gᴴ T G, Q <- Q G.
    // Columns k, k+1 (rows 0..k+2 are the only nonzero ones).
    for r in 0..(k + 2).min(n) {
        let x = t.at(r, k);
        let y = t.at(r, k + 1);
        *t.at_mut(r, k) = (x * v0 + y * v1) * inv;
        *t.at_mut(r, k + 1) = (-x * v1.conj() + y * v0.conj()) * inv;
    }
    // Rows k, k+1 over columns k..n.
    for c in k..n {
        let x = t.at(k, c);
        let y = t.at(k + 1, c);
        *t.at_mut(k, c) = (v0.conj() * x + v1.conj() * y) * inv;
        *t.at_mut(k + 1, c) = (-v1 * x + v0 * y) * inv;
    }
    for r in 0..n {
        let x = q.at(r, k);
        let y = q.at(r, k + 1);
        *q.at_mut(r, k) = (x * v0 + y * v1) * inv;
        *q.at_mut(r, k + 1) = (-x * v1.conj() + y * v0.conj()) * inv;
    }
    *t.at_mut(k + 1, k) = ZERO;
}

/// Reorder a Schur pair so the selected eigenvalues occupy the leading
/// diagonal positions, preserving relative order inside each class.
/// Returns how many eigenvalues were selected.
pub fn reorder_leading(sch: &mut Schur, select: &[bool]) -> usize {
    let n = sch.t.rows();
    assert_eq!(select.len(), n);
    let mut sel = select.to_vec();
    let mut next = 0usize;
    for j in 0..n {
        if sel[j] {
            let mut k = j;
            while k > next {
                swap_adjacent(&mut sch.t, &mut sch.q, k - 1);
                sel.swap(k - 1, k);
                k -= 1;
            }
            next += 1;
        }
    }
    next
}

/// Solve the upper-triangular system `U x = b` by back-substitution.
pub fn upper_triangular_solve(u: &CMat, b: &[C64]) -> Result<Vec<C64>> {
    let n = u.rows();
    assert_eq!(n, u.cols());
    assert_eq!(n, b.len());
    let scale = u.max_abs().max(1.0);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= u.at(i, j) * x[j];
        }
        let piv = u.at(i, i);
        if piv.norm() <= 1e-14 * scale {
            return Err(Error::ConvergenceFailed {
                routine: "triangular solve (near-singular pivot)",
                residual: piv.norm(),
            });
        }
        x[i] = acc / piv;
    }
    Ok(x)
}

/// Solve `U₁₁ X − X U₂₂ = C` for upper-triangular `U₁₁` (k×k) and `U₂₂`
/// (q×q), column by column.  Requires the spectra of the two blocks to be
/// separated; the near-singular pivot check reports violations.
pub fn sylvester_triangular(u11: &CMat, u22: &CMat, c: &CMat) -> Result<CMat> {
    let k = u11.rows();
    let q = u22.rows();
    assert_eq!((c.rows(), c.cols()), (k, q), "right-hand side has wrong shape");
    let mut x = CMat::zeros(k, q);
    for j in 0..q {
        // rhs = C[:, j] + sum_{i<j} U22[i, j] X[:, i]
        let mut rhs = c.col(j);
        for i in 0..j {
            let w = u22.at(i, j);
            if w != ZERO {
                for r in 0..k {
                    rhs[r] += w * x.at(r, i);
                }
            }
        }
        // (U11 - U22[j,j] I) x_j = rhs
        let mut shifted = u11.clone();
        let d = u22.at(j, j);
        for r in 0..k {
            *shifted.at_mut(r, r) -= d;
        }
        let xj = upper_triangular_solve(&shifted, &rhs)?;
        x.set_col(j, &xj);
    }
    Ok(x)
}

/// Spectral projector onto the invariant subspace of the leading `k`
/// eigenvalues of a (reordered) Schur pair, along the complementary one.
///
/// In Schur coordinates the projector is `[[I, X], [0, 0]]` where
/// `U₁₁ X − X U₂₂ = U₁₂`; conjugating back by `Q` gives the projector for
/// the original operator.  It is idempotent and commutes with the operator
/// up to roundoff.
pub fn leading_invariant_projector(sch: &Schur, k: usize) -> Result<CMat> {
    let n = sch.t.rows();
    assert!(k <= n);
    if k == 0 {
        return Ok(CMat::zeros(n, n));
    }
    if k == n {
        return Ok(CMat::identity(n));
    }
    let u11 = sch.t.submatrix(0, k, 0, k);
    let u22 = sch.t.submatrix(k, n, k, n);
    let u12 = sch.t.submatrix(0, k, k, n);
    let x = sylvester_triangular(&u11, &u22, &u12)?;
    let mut pc = CMat::zeros(n, n);
    for i in 0..k {
        *pc.at_mut(i, i) = ONE;
        for j in 0..(n - k) {
            *pc.at_mut(i, k + j) = x.at(i, j);
        }
    }
    Ok(sch.q.mul(&pc).mul(&sch.q.adjoint()))
}
