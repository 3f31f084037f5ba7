//! Householder QR factorization and orthonormal-basis utilities.
//!
//! The phase of each reflector is fixed so that the triangular factor has a
//! real nonnegative diagonal.  That makes the factorization unique for
//! full-rank input, which in turn makes every seeded random unitary in the
//! crate a deterministic function of its seed.

use alloc::vec::Vec;

use crate::linalg::{self, CMat, C64, ONE, ZERO};
use crate::math;
use crate::rng::SeedStream;

/// Full QR factorization `A = Q R` with `Q` square unitary (`m × m`) and `R`
/// upper triangular (`m × n`), diagonal of `R` real and nonnegative.
pub fn full_qr(a: &CMat) -> (CMat, CMat) {
    let m = a.rows();
    let n = a.cols();
    let mut r = a.clone();
    let mut q = CMat::identity(m);

    for k in 0..m.min(n) {
        // Householder vector for column k below the diagonal.
        let mut v: Vec<C64> = (k..m).map(|i| r.at(i, k)).collect();
        let xnorm = linalg::norm2(&v);
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

        // R <- H R on the trailing block.
        for j in k..n {
            let mut w = ZERO;
            for i in 0..v.len() {
                w += v[i].conj() * r.at(k + i, j);
            }
            w *= beta;
            for i in 0..v.len() {
                *r.at_mut(k + i, j) -= w * v[i];
            }
        }
        // Q <- Q H (H is Hermitian).
        for i in 0..m {
            let mut w = ZERO;
            for l in 0..v.len() {
                w += q.at(i, k + l) * v[l];
            }
            w *= beta;
            for l in 0..v.len() {
                *q.at_mut(i, k + l) -= w * v[l].conj();
            }
        }
    }

    // Zero the strictly-lower part of R exactly and fix diagonal phases.
    for j in 0..n {
        for i in (j + 1)..m {
            *r.at_mut(i, j) = ZERO;
        }
    }
    for k in 0..m.min(n) {
        let d = r.at(k, k);
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            let conj_phase = phase.conj();
            for j in k..n {
                *r.at_mut(k, j) *= conj_phase;
            }
            for i in 0..m {
                *q.at_mut(i, k) *= phase;
            }
        }
    }
    (q, r)
}

/// Thin QR: `Q` is `m × min(m, n)` with orthonormal columns, `R` is
/// `min(m, n) × n` upper triangular with real nonnegative diagonal.
pub fn thin_qr(a: &CMat) -> (CMat, CMat) {
    let k = a.rows().min(a.cols());
    let (q, r) = full_qr(a);
    (q.columns(0, k), r.submatrix(0, k, 0, a.cols()))
}

/// Orthonormal basis for the orthogonal complement of the span of the
/// orthonormal columns of `b` (an `n × k` matrix with `k ≤ n`).
pub fn orthonormal_complement(b: &CMat) -> CMat {
    let n = b.rows();
    let k = b.cols();
    assert!(k <= n, "basis cannot have more columns than rows");
    if k == n {
        return CMat::zeros(n, 0);
    }
    let (q, _) = full_qr(b);
    q.columns(k, n)
}

/// Haar-like random unitary: QR of a matrix with iid complex normal entries,
/// phases fixed by the positive-diagonal convention.
pub fn random_unitary(n: usize, stream: &mut SeedStream) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| stream.complex_normal());
    let (q, _) = full_qr(&g);
    q
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases of equal rank.
///
/// The cosines of the principal angles are the singular values of `AᴴB`; the
/// largest angle is `acos` of the smallest of them.
pub fn max_principal_angle(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.rows(), b.rows(), "bases must live in the same space");
    assert_eq!(a.cols(), b.cols(), "bases must have equal rank");
    if a.cols() == 0 {
        return 0.0;
    }
    let overlap = a.adjoint().mul(b);
    let sing = super::svd::svd(&overlap).expect("SVD of a small overlap matrix");
    let smin = sing.s.last().copied().unwrap_or(0.0).clamp(-1.0, 1.0);
    libm::acos(smin)
}

/// Deviation of `q` from having orthonormal columns, `‖QᴴQ − I‖_F`.
pub fn orthonormality_defect(q: &CMat) -> f64 {
    let gram = q.adjoint().mul(q);
    gram.sub(&CMat::identity(q.cols())).fro_norm()
}

/// Euclidean distance from `x` to the column span of an orthonormal basis.
pub fn distance_to_span(basis: &CMat, x: &[C64]) -> f64 {
    let coeff = basis.adjoint_matvec(x);
    let proj = basis.matvec(&coeff);
    let mut diff = 0.0;
    for i in 0..x.len() {
        diff += (x[i] - proj[i]).norm_sqr();
    }
    math::sqrt(diff.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::assert_near;
    use num_complex::Complex;

    #[test]
    fn qr_reconstructs_and_q_is_unitary() {
        let mut stream = SeedStream::new(5);
        let a = CMat::from_fn(6, 4, |_, _| stream.complex_normal());
        let (q, r) = full_qr(&a);
        assert!(orthonormality_defect(&q) < 1e-13, "Q unitary");
        let recon = q.mul(&r);
        assert!(recon.sub(&a).max_abs() < 1e-13, "A = QR");
        for k in 0..4 {
            let d = r.at(k, k);
            assert!(d.im.abs() < 1e-14 && d.re >= 0.0, "diagonal real nonnegative");
        }
    }

    #[test]
    fn thin_qr_shapes() {
        let mut stream = SeedStream::new(9);
        let a = CMat::from_fn(5, 3, |_, _| stream.complex_normal());
        let (q, r) = thin_qr(&a);
        assert_eq!((q.rows(), q.cols()), (5, 3));
        assert_eq!((r.rows(), r.cols()), (3, 3));
        assert!(q.mul(&r).sub(&a).max_abs() < 1e-13);
    }

    #[test]
    fn complement_is_orthogonal_and_completes_the_space() {
        let mut stream = SeedStream::new(13);
        let a = CMat::from_fn(6, 2, |_, _| stream.complex_normal());
        let (q, _) = thin_qr(&a);
        let comp = orthonormal_complement(&q);
        assert_eq!((comp.rows(), comp.cols()), (6, 4));
        assert!(orthonormality_defect(&comp) < 1e-13);
        let cross = q.adjoint().mul(&comp);
        assert!(cross.max_abs() < 1e-13, "complement orthogonal to basis");
    }

    #[test]
    fn random_unitary_is_deterministic_in_the_seed() {
        let u1 = random_unitary(5, &mut SeedStream::new(77));
        let u2 = random_unitary(5, &mut SeedStream::new(77));
        assert_eq!(u1, u2, "same seed must give the identical matrix");
        assert!(orthonormality_defect(&u1) < 1e-13);
    }

    #[test]
    fn principal_angle_detects_rotation() {
        // span{e1} versus span{cos t · e1 + sin t · e2} has angle exactly t.
        let t = 0.3_f64;
        let e1 = CMat::from_fn(3, 1, |i, _| {
            if i == 0 { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
        });
        let rot = CMat::from_fn(3, 1, |i, _| match i {
            0 => Complex::new(t.cos(), 0.0),
            1 => Complex::new(t.sin(), 0.0),
            _ => Complex::new(0.0, 0.0),
        });
        assert_near(max_principal_angle(&e1, &rot), t, 1e-12, "principal angle");
        assert_near(max_principal_angle(&e1, &e1), 0.0, 1e-7, "self angle");
    }

    #[test]
    fn distance_to_span_is_the_orthogonal_residual() {
        let e1 = CMat::from_fn(3, 1, |i, _| {
            if i == 0 { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) }
        });
        let x = [Complex::new(2.0, 0.0), Complex::new(0.0, 3.0), Complex::new(0.0, 0.0)];
        assert_near(distance_to_span(&e1, &x), 3.0, 1e-14, "residual norm");
    }
}
