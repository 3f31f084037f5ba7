//! Operators on `C^n` and the seeded families used throughout the test
//! batteries.
//!
//! An [`Operator`] is a dense square matrix together with an optional
//! certified power bound `sup_n ‖Tⁿ‖ ≤ C`.  Constructors that know such a
//! bound by construction (shift families, operators assembled from a known
//! spectral split) record it, which lets downstream analyses skip the
//! empirical growth probe.  For arbitrary matrices,
//! [`estimate_power_bound`] samples norms of repeated squares and flags
//! sustained geometric growth.

use alloc::vec::Vec;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, qr, svd, CMat, C64, ONE};
use crate::math;
use crate::rng::SeedStream;

/// Growth ratio between successive norm doublings that triggers the
/// suspect-unbounded verdict (up to a finite-horizon correction).
pub const GROWTH_TOL: f64 = 2.0;

/// A bounded linear operator on `C^n`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: CMat,
    power_bound: Option<f64>,
}

impl Operator {
    /// Wrap a square matrix, optionally with a certified bound on
    /// `sup_n ‖Tⁿ‖`.
    ///
    /// # Errors
    ///
    /// Rejects empty or non-square matrices, non-finite entries, and
    /// non-positive or non-finite claimed bounds.
    pub fn new(mat: CMat, power_bound: Option<f64>) -> Result<Operator> {
        if mat.rows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if mat.rows() != mat.cols() {
            return Err(Error::DimensionMismatch { expected: mat.rows(), got: mat.cols() });
        }
        if !mat.is_finite() {
            return Err(Error::NonFiniteEntry);
        }
        if let Some(c) = power_bound {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "power_bound",
                    value: c,
                    requirement: "finite and positive",
                });
            }
        }
        Ok(Operator { mat, power_bound })
    }

    /// Dimension of the underlying space.
    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Apply to a vector: `T x`.
    #[inline]
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.mat.matvec(x)
    }

    /// The matrix of the operator.
    #[inline]
    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Certified power bound, if one is known.
    #[inline]
    pub fn power_bound(&self) -> Option<f64> {
        self.power_bound
    }
}

/// Finite orbit `x, Tx, …, T^{n_max} x` summarized by its Euclidean norms,
/// with the vectors themselves retained on request.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// The starting vector.
    pub start: Vec<C64>,
    /// `‖Tⁿ x‖` for `n = 0, …, n_max`.
    pub norms: Vec<f64>,
    /// `Tⁿ x` for the same range, when requested.
    pub vectors: Option<Vec<Vec<C64>>>,
}

/// Compute the orbit of `x` under `op` for `n_max` steps.
///
/// # Errors
///
/// Rejects a vector of the wrong dimension or with non-finite entries.
pub fn orbit(op: &Operator, x: &[C64], n_max: usize, keep_vectors: bool) -> Result<Trajectory> {
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: x.len() });
    }
    if !linalg::vec_is_finite(x) {
        return Err(Error::NonFiniteEntry);
    }
    let mut norms = Vec::with_capacity(n_max + 1);
    let mut vectors = if keep_vectors { Some(Vec::with_capacity(n_max + 1)) } else { None };
    let mut cur = x.to_vec();
    norms.push(linalg::norm2(&cur));
    if let Some(vs) = vectors.as_mut() {
        vs.push(cur.clone());
    }
    for _ in 0..n_max {
        cur = op.apply(&cur);
        norms.push(linalg::norm2(&cur));
        if let Some(vs) = vectors.as_mut() {
            vs.push(cur.clone());
        }
    }
    Ok(Trajectory { start: x.to_vec(), norms, vectors })
}

/// Cyclic coordinate shift `e_i ↦ e_{i+1 (mod dim)}`: a unitary permutation,
/// power bound 1.
pub fn make_cyclic_shift(dim: usize) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        *m.at_mut((i + 1) % dim, i) = ONE;
    }
    Operator::new(m, Some(1.0))
}

/// Direction of a truncated coordinate shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `e_i ↦ e_{i+1}`, last coordinate falls off: nilpotent of index `dim`.
    Right,
    /// `e_i ↦ e_{i-1}`, first coordinate falls off: nilpotent of index `dim`.
    Left,
}

/// Truncated shift on `C^dim` in the given direction: a norm-1 nilpotent
/// operator, power bound 1.
pub fn make_truncated_shift(dim: usize, direction: ShiftDirection) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut m = CMat::zeros(dim, dim);
    match direction {
        ShiftDirection::Right => {
            for i in 0..dim.saturating_sub(1) {
                *m.at_mut(i + 1, i) = ONE;
            }
        }
        ShiftDirection::Left => {
            for i in 1..dim {
                *m.at_mut(i - 1, i) = ONE;
            }
        }
    }
    Operator::new(m, Some(1.0))
}

/// The coordinate swap on `C²`: the simplest operator with spectrum
/// `{1, -1}`, power bound 1.
pub fn make_swap() -> Operator {
    let mut m = CMat::zeros(2, 2);
    *m.at_mut(0, 1) = ONE;
    *m.at_mut(1, 0) = ONE;
    Operator::new(m, Some(1.0)).expect("fixed 2x2 matrix is valid")
}

/// An operator with a known decaying/persistent split, plus the ground
/// truth that went into it.
#[derive(Clone, Debug)]
pub struct SplitOperator {
    /// The assembled operator, with `power_bound = conditioning` certified
    /// by construction.
    pub operator: Operator,
    /// Orthonormal basis (columns) of the subspace on which orbits decay to
    /// zero.
    pub stable_basis: CMat,
    /// Orthonormal basis (columns) of the complementary invariant subspace
    /// carrying the unit-modulus spectrum.
    pub peripheral_basis: CMat,
    /// The unit-modulus eigenvalues, in construction order.
    pub peripheral: Vec<C64>,
}

/// Build `T = S D S⁻¹` where `D` is block-diagonal with the given
/// unit-modulus eigenvalues up front and a strictly contractive block (norm
/// at most `(1 + contraction_radius)/2 < 1`) behind them, and `S` is a
/// seeded similarity with condition number exactly `conditioning`.
///
/// Because `‖Dⁿ‖ ≤ 1` for all `n`, the assembled operator satisfies
/// `sup_n ‖Tⁿ‖ ≤ conditioning`, which is recorded as its certified power
/// bound.  The interior eigenvalue moduli are drawn from
/// `[contraction_radius/2, contraction_radius]`, so the spectral gap to the
/// unit circle is at least `1 - contraction_radius`.
///
/// # Errors
///
/// Rejects total dimension zero, eigenvalues off the unit circle (modulus
/// error above `1e-12`), `contraction_radius` outside `[0, 1)`, and
/// `conditioning < 1`.
pub fn make_split_operator(
    peripheral: &[C64],
    interior_dim: usize,
    contraction_radius: f64,
    conditioning: f64,
    seed: u64,
) -> Result<SplitOperator> {
    let p = peripheral.len();
    let n = p + interior_dim;
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    for &l in peripheral {
        let m = l.norm();
        if math::abs(m - 1.0) > 1e-12 {
            return Err(Error::OffCircleEigenvalue { lambda: l, modulus: m });
        }
    }
    if !(0.0..1.0).contains(&contraction_radius) {
        return Err(Error::InvalidParameter {
            name: "contraction_radius",
            value: contraction_radius,
            requirement: "0 <= contraction_radius < 1",
        });
    }
    if !(conditioning.is_finite() && conditioning >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "conditioning",
            value: conditioning,
            requirement: "finite and at least 1",
        });
    }

    let mut stream = SeedStream::salted(seed, 0x5b17);

    // Block-diagonal model: unit-modulus diagonal up front, contractive
    // upper-triangular block behind.
    let mut d = CMat::zeros(n, n);
    for (i, &l) in peripheral.iter().enumerate() {
        *d.at_mut(i, i) = l;
    }
    for i in 0..interior_dim {
        let modulus = contraction_radius * (0.5 + 0.5 * stream.uniform());
        let entry = stream.unit_phase() * modulus;
        *d.at_mut(p + i, p + i) = entry;
    }
    if interior_dim > 1 {
        // Strictly-upper coupling, scaled so the whole block stays a
        // contraction: ‖B‖ ≤ radius + (1 - radius)/2 < 1.
        let mut coupling = CMat::zeros(interior_dim, interior_dim);
        for i in 0..interior_dim {
            for j in (i + 1)..interior_dim {
                *coupling.at_mut(i, j) = stream.complex_normal();
            }
        }
        let cn = svd::spectral_norm(&coupling);
        if cn > 0.0 {
            let scale = 0.5 * (1.0 - contraction_radius) / cn;
            for i in 0..interior_dim {
                for j in (i + 1)..interior_dim {
                    *d.at_mut(p + i, p + j) = coupling.at(i, j) * Complex::new(scale, 0.0);
                }
            }
        }
    }

    // Similarity S = U Σ Vᴴ with singular values log-spaced across exactly
    // [1, conditioning].
    let u = qr::random_unitary(n, &mut stream);
    let v = qr::random_unitary(n, &mut stream);
    let sigmas: Vec<f64> = (0..n)
        .map(|j| {
            if n == 1 {
                1.0
            } else {
                math::powf(conditioning, j as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let s = u.mul(&CMat::from_diag(
        &sigmas.iter().map(|&x| Complex::new(x, 0.0)).collect::<Vec<_>>(),
    ))
    .mul(&v.adjoint());
    let s_inv = v
        .mul(&CMat::from_diag(
            &sigmas.iter().map(|&x| Complex::new(1.0 / x, 0.0)).collect::<Vec<_>>(),
        ))
        .mul(&u.adjoint());

    let t = s.mul(&d).mul(&s_inv);
    let operator = Operator::new(t, Some(conditioning))?;

    let peripheral_basis = if p > 0 {
        let (q, _) = qr::thin_qr(&s.columns(0, p));
        q
    } else {
        CMat::zeros(n, 0)
    };
    let stable_basis = if interior_dim > 0 {
        let (q, _) = qr::thin_qr(&s.columns(p, n));
        q
    } else {
        CMat::zeros(n, 0)
    };

    Ok(SplitOperator {
        operator,
        stable_basis,
        peripheral_basis,
        peripheral: peripheral.to_vec(),
    })
}

/// Row-stochastic (or doubly stochastic) matrix with seeded positive
/// entries.  Row-stochastic matrices satisfy `‖Tⁿ‖_∞ = 1`, hence
/// `‖Tⁿ‖₂ ≤ √dim`, which is recorded as the power bound.
///
/// With `doubly = true` the entries are balanced by alternating row/column
/// scaling until both sums match 1 to `1e-13`, ending on a row pass so
/// row sums are exact to rounding.
pub fn make_stochastic(dim: usize, seed: u64, doubly: bool) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut stream = SeedStream::salted(seed, 0x570c);
    let mut m = CMat::from_fn(dim, dim, |_, _| {
        // (0, 1] keeps every entry strictly positive.
        Complex::new(1.0 - stream.uniform(), 0.0)
    });

    let row_sums = |m: &CMat| -> Vec<f64> {
        (0..dim).map(|i| m.row(i).iter().map(|z| z.re).sum()).collect()
    };
    let col_sums = |m: &CMat| -> Vec<f64> {
        (0..dim)
            .map(|j| (0..dim).map(|i| m.at(i, j).re).sum())
            .collect()
    };
    let normalize_rows = |m: &mut CMat| {
        for i in 0..dim {
            let s: f64 = m.row(i).iter().map(|z| z.re).sum();
            for j in 0..dim {
                let val = m.at(i, j).re / s;
                *m.at_mut(i, j) = Complex::new(val, 0.0);
            }
        }
    };

    if doubly {
        let mut ok = false;
        for _ in 0..10_000 {
            normalize_rows(&mut m);
            // Column pass.
            let cs = col_sums(&m);
            for j in 0..dim {
                for i in 0..dim {
                    let val = m.at(i, j).re / cs[j];
                    *m.at_mut(i, j) = Complex::new(val, 0.0);
                }
            }
            let worst_row = row_sums(&m)
                .iter()
                .map(|s| math::abs(s - 1.0))
                .fold(0.0, f64::max);
            let worst_col = col_sums(&m)
                .iter()
                .map(|s| math::abs(s - 1.0))
                .fold(0.0, f64::max);
            if worst_row.max(worst_col) < 1e-13 {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::ConvergenceFailed {
                routine: "doubly-stochastic balancing",
                residual: row_sums(&m).iter().map(|s| math::abs(s - 1.0)).fold(0.0, f64::max),
            });
        }
        normalize_rows(&mut m);
    } else {
        normalize_rows(&mut m);
    }

    Operator::new(m, Some(math::sqrt(dim as f64)))
}

/// Verdict of the power-bound probe.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundVerdict {
    /// Sampled norms show no sustained geometric growth.
    Bounded,
    /// Norms kept (nearly) doubling between doubling steps: the operator
    /// looks unbounded in power.
    SuspectUnbounded {
        /// The step at which growth was still sustained.
        step: usize,
        /// The final norm ratio `‖T^{2h}‖ / ‖T^h‖`.
        ratio: f64,
    },
}

/// Result of [`estimate_power_bound`].
#[derive(Clone, Debug)]
pub struct PowerBoundEstimate {
    /// Largest sampled norm `max ‖Tⁿ‖` over the probe points.
    pub c_hat: f64,
    /// The sampled `(n, ‖Tⁿ‖)` pairs at `n = 1, 2, 4, …`.
    pub samples: Vec<(usize, f64)>,
    /// Growth verdict.
    pub verdict: BoundVerdict,
}

/// Probe `‖Tⁿ‖` at doubling step counts `1, 2, 4, …` up to `horizon`
/// (rounded down to a power of two) and report the largest value seen.
///
/// The suspect-unbounded flag fires when the final doubling ratio reaches
/// `GROWTH_TOL` scaled by a finite-horizon correction `1 - 4/h`: linear
/// norm growth (a defective unit-modulus eigenvalue) approaches ratio 2
/// from below, and the correction keeps it detectable at moderate
/// horizons without tripping on bounded transients.
pub fn estimate_power_bound(op: &Operator, horizon: usize) -> Result<PowerBoundEstimate> {
    if horizon < 2 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon as f64,
            requirement: "at least 2",
        });
    }
    let mut samples = Vec::new();
    let mut power = op.matrix().clone();
    let mut n = 1usize;
    let mut warm: Option<Vec<C64>> = None;
    loop {
        let (norm, v) = svd::spectral_norm_warm(&power, warm.as_deref());
        warm = Some(v);
        samples.push((n, norm));
        if !norm.is_finite() {
            return Err(Error::NonFiniteEntry);
        }
        if n * 2 > horizon {
            break;
        }
        power = power.mul(&power);
        n *= 2;
    }
    let c_hat = samples.iter().map(|&(_, v)| v).fold(0.0, f64::max);

    let verdict = if samples.len() >= 2 {
        let (n_last, v_last) = samples[samples.len() - 1];
        let (_, v_prev) = samples[samples.len() - 2];
        let ratio = if v_prev > 0.0 { v_last / v_prev } else { 0.0 };
        let correction = (1.0 - 4.0 / n_last as f64).max(0.5);
        if ratio >= GROWTH_TOL * correction {
            BoundVerdict::SuspectUnbounded { step: n_last, ratio }
        } else {
            BoundVerdict::Bounded
        }
    } else {
        BoundVerdict::Bounded
    };

    Ok(PowerBoundEstimate { c_hat, samples, verdict })
}
