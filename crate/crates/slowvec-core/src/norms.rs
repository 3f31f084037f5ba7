//! Orbit-derived norms and the stable/persistent splitting of the space.
//!
//! For a power-bounded operator `T` three gauges matter:
//!
//! * the **original** Euclidean norm `‖x‖`;
//! * the **sup renorm** `‖x‖_s = sup_n ‖Tⁿ x‖`, under which `T` becomes a
//!   contraction;
//! * the **limit seminorm** `‖x‖_p = lim_n sup_{k ≥ n} ‖T^k x‖`, which
//!   vanishes exactly on the stable subspace `X₀ = {x : Tⁿx → 0}` and makes
//!   the induced operator on `X / X₀` an isometry.
//!
//! Both derived gauges are evaluated over finite horizons: the sup renorm
//! over a window `[0, H]` and the limit seminorm over a window shifted far
//! down the orbit, `[h_p, h_p + H]`, with `h_p` doubled until successive
//! evaluations agree (a Cauchy criterion).  A [`NormContext`] owns those
//! horizons; [`StableSplit`] carries the computed `X₀`, a complement, and
//! the induced quotient matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, schur, CMat, C64};
use crate::math;
use crate::operators::{self, BoundVerdict, Operator};
use crate::rng::SeedStream;

/// Successive halved/full-horizon evaluations of the limit seminorm must
/// agree to this tolerance before the horizon stops doubling.
pub const CAUCHY_TOL: f64 = 1e-9;
/// Hard cap for the adaptively doubled limit horizon.
pub const HORIZON_P_CAP: usize = 1 << 15;
/// Unit probes used to assess the Cauchy gap when building a context.
const CAUCHY_PROBES: usize = 4;
/// Default width of the ambiguity check in [`compute_stable_split`].
pub const DEFAULT_PERIPHERAL_TOL: f64 = 1e-6;
/// Maximum accepted deviation in [`quotient_p_isometry_check`].
pub const QUOTIENT_ISOMETRY_TOL: f64 = 1e-6;

/// Which gauge to evaluate an orbit in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    /// Plain Euclidean norm.
    Original,
    /// Sup renorm: largest Euclidean norm over the orbit window `[0, H]`.
    Sup,
    /// Limit seminorm: largest Euclidean norm over `[h_p, h_p + H]`, which
    /// approximates `lim sup_n ‖Tⁿx‖` from above.
    QuotientP,
}

/// An operator together with validated horizons for the derived norms.
#[derive(Clone, Debug)]
pub struct NormContext {
    op: Operator,
    horizon_sup: usize,
    horizon_p: usize,
    cauchy_gap: f64,
    c_hat: f64,
}

/// Build a [`NormContext`], refusing operators that look unbounded in power.
///
/// A recorded power bound on the operator is trusted as-is; otherwise
/// [`operators::estimate_power_bound`] runs first and a suspect verdict is
/// escalated to an error, since orbit-limit quantities are meaningless for
/// unbounded powers.  The limit horizon starts at `horizon_p` and doubles
/// until the sup-window evaluation stops moving ([`CAUCHY_TOL`]) or
/// [`HORIZON_P_CAP`] is reached; the final gap is retained as a diagnostic.
pub fn build_norm_context(
    op: &Operator,
    horizon_sup: usize,
    horizon_p: usize,
) -> Result<NormContext> {
    if horizon_sup == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon_sup",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    if horizon_p == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon_p",
            value: 0.0,
            requirement: "at least 1",
        });
    }

    let c_hat = match op.power_bound() {
        Some(c) => c,
        None => {
            let est = operators::estimate_power_bound(op, 512)?;
            match est.verdict {
                BoundVerdict::Bounded => est.c_hat,
                BoundVerdict::SuspectUnbounded { step, .. } => {
                    return Err(Error::SuspectUnbounded { step, norm: est.c_hat });
                }
            }
        }
    };

    // Double the limit horizon until the seminorm evaluation is Cauchy on a
    // fixed set of seeded probes.
    let mut hp = horizon_p;
    let mut gap;
    let mut stream = SeedStream::salted(0xcau64 << 32 | op.dim() as u64, 0x9a2f);
    let probes: Vec<Vec<C64>> =
        (0..CAUCHY_PROBES).map(|_| stream.unit_vector(op.dim())).collect();
    loop {
        gap = 0.0f64;
        for x in &probes {
            let tr = operators::orbit(op, x, hp + horizon_sup, false)?;
            let window_max = |start: usize| -> f64 {
                tr.norms[start..=start + horizon_sup]
                    .iter()
                    .fold(0.0f64, |a, &b| a.max(b))
            };
            gap = gap.max(window_max(hp / 2) - window_max(hp));
        }
        if gap < CAUCHY_TOL || hp >= HORIZON_P_CAP {
            break;
        }
        hp = (hp * 2).min(HORIZON_P_CAP);
    }

    Ok(NormContext { op: op.clone(), horizon_sup, horizon_p: hp, cauchy_gap: gap, c_hat })
}

impl NormContext {
    /// The operator the context wraps.
    pub fn operator(&self) -> &Operator {
        &self.op
    }

    /// Window width used by the sup renorm.
    pub fn horizon_sup(&self) -> usize {
        self.horizon_sup
    }

    /// Offset after which the orbit is treated as settled (possibly grown by
    /// adaptive doubling).
    pub fn horizon_p(&self) -> usize {
        self.horizon_p
    }

    /// Residual Cauchy gap of the limit seminorm at the final horizon.
    pub fn cauchy_gap(&self) -> f64 {
        self.cauchy_gap
    }

    /// Power bound in force (recorded or estimated).
    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }

    /// Window `(offset, width)` in orbit steps realizing a norm kind.
    fn window(&self, kind: NormKind) -> (usize, usize) {
        match kind {
            NormKind::Original => (0, 0),
            NormKind::Sup => (0, self.horizon_sup),
            NormKind::QuotientP => (self.horizon_p, self.horizon_sup),
        }
    }

    /// Evaluate one gauge of `x`.
    pub fn norm(&self, kind: NormKind, x: &[C64]) -> Result<f64> {
        let (offset, width) = self.window(kind);
        if offset + width == 0 {
            if x.len() != self.op.dim() {
                return Err(Error::DimensionMismatch { expected: self.op.dim(), got: x.len() });
            }
            if !linalg::vec_is_finite(x) {
                return Err(Error::NonFiniteEntry);
            }
            return Ok(linalg::norm2(x));
        }
        let tr = operators::orbit(&self.op, x, offset + width, false)?;
        Ok(tr.norms[offset..].iter().fold(0.0f64, |a, &b| a.max(b)))
    }

    /// Evaluate `n ↦ ‖Tⁿ x‖` in the given gauge for `n = 0, …, n_max` with a
    /// single orbit pass.
    ///
    /// Each value is a window maximum over the shared Euclidean orbit-norm
    /// array, computed with a monotone deque so the whole profile costs
    /// `O(n_max + offset + width)` matrix applications total.
    pub fn orbit_profile(&self, x: &[C64], kind: NormKind, n_max: usize) -> Result<Vec<f64>> {
        let (offset, width) = self.window(kind);
        let tr = operators::orbit(&self.op, x, n_max + offset + width, false)?;
        let maxima = sliding_window_max(&tr.norms, width + 1);
        Ok(maxima[offset..offset + n_max + 1].to_vec())
    }
}

/// Sliding-window minima, by negating [`sliding_window_max`].
pub(crate) fn sliding_window_min(values: &[f64], window: usize) -> Vec<f64> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    sliding_window_max(&negated, window).into_iter().map(|v| -v).collect()
}

/// Sliding-window maxima: `out[j] = max(values[j .. j + window])` for every
/// admissible `j`, via the classic monotone-deque scan.
pub(crate) fn sliding_window_max(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1 && window <= values.len());
    let out_len = values.len() - window + 1;
    let mut out = Vec::with_capacity(out_len);
    // Deque of candidate indices with decreasing values.
    let mut deque: Vec<usize> = Vec::new();
    let mut head = 0usize;
    for (i, &v) in values.iter().enumerate() {
        while deque.len() > head && values[*deque.last().unwrap()] <= v {
            deque.pop();
        }
        deque.push(i);
        if i + 1 >= window {
            let j = i + 1 - window;
            while deque[head] < j {
                head += 1;
            }
            out.push(values[deque[head]]);
        }
    }
    debug_assert_eq!(out.len(), out_len);
    out
}

/// The split of the space into the stable subspace `X₀` (orbits decay) and
/// a complement carrying the persistent, unit-modulus spectral part.
#[derive(Clone, Debug)]
pub struct StableSplit {
    /// Orthonormal basis of `X₀` (columns); empty when nothing decays.
    pub x0_basis: CMat,
    /// Orthonormal basis of the orthogonal complement of `X₀`, which
    /// represents the quotient `X / X₀`.
    pub complement_basis: CMat,
    /// Dimension of the quotient, `codim X₀`.
    pub codim: usize,
    /// Matrix of the induced operator on the quotient, upper triangular in
    /// the complement basis.
    pub quotient: CMat,
    /// Unit-modulus eigenvalues (diagonal of `quotient`).
    pub peripheral_eigvals: Vec<C64>,
}

impl StableSplit {
    /// Coordinates of the class `[x]` in the complement basis.
    pub fn project_quotient(&self, x: &[C64]) -> Vec<C64> {
        self.complement_basis.adjoint_matvec(x)
    }

    /// Representative vector of quotient coordinates `v`.
    pub fn lift(&self, v: &[C64]) -> Vec<C64> {
        self.complement_basis.matvec(v)
    }

    /// The induced quotient operator, inheriting the parent's power bound.
    pub fn quotient_operator(&self, power_bound: Option<f64>) -> Result<Operator> {
        Operator::new(self.quotient.clone(), power_bound)
    }
}

/// Cluster unit-modulus eigenvalues closer than this and treat them as one.
const CLUSTER_TOL: f64 = 1e-8;
/// Allowed nilpotent coupling on a persistent eigenvalue cluster.
const SEMISIMPLE_TOL: f64 = 1e-8;

/// Verify that the persistent block is semisimple: each cluster of equal
/// eigenvalues must act as a scalar on its invariant subspace.  A defective
/// unit-modulus eigenvalue makes `‖Tⁿ‖` grow linearly, contradicting power
/// boundedness.
fn check_peripheral_semisimple(u22: &CMat) -> Result<()> {
    let p = u22.rows();
    if p <= 1 {
        return Ok(());
    }
    let eig = u22.diag();
    let scale = 1.0 + u22.fro_norm();

    // Greedy clustering of the diagonal by proximity.
    let mut assigned = vec![usize::MAX; p];
    let mut n_clusters = 0usize;
    for i in 0..p {
        if assigned[i] != usize::MAX {
            continue;
        }
        assigned[i] = n_clusters;
        for j in (i + 1)..p {
            if assigned[j] == usize::MAX && (eig[j] - eig[i]).norm() <= CLUSTER_TOL {
                assigned[j] = n_clusters;
            }
        }
        n_clusters += 1;
    }

    for c in 0..n_clusters {
        let members: Vec<usize> = (0..p).filter(|&i| assigned[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let select: Vec<bool> = (0..p).map(|i| assigned[i] == c).collect();
        let mut mini = schur::Schur { q: CMat::identity(p), t: u22.clone() };
        let k = schur::reorder_leading(&mut mini, &select);
        let proj = schur::leading_invariant_projector(&mini, k)?;
        let mean: C64 = members.iter().map(|&i| eig[i]).fold(C64::new(0.0, 0.0), |a, b| a + b)
            / C64::new(members.len() as f64, 0.0);
        // (U22 - mean I) P measures the nilpotent action on the cluster.
        let mut shifted = u22.clone();
        for i in 0..p {
            *shifted.at_mut(i, i) -= mean;
        }
        let coupling = crate::linalg::svd::spectral_norm(&shifted.mul(&proj));
        if coupling > SEMISIMPLE_TOL * scale {
            return Err(Error::PeripheralNotSemisimple { coupling });
        }
    }
    Ok(())
}

/// Split the space into the stable subspace and its complement by Schur
/// reordering.
///
/// Eigenvalue moduli are classified against the unit circle: at most
/// `1 - 1.5·tol` is decaying, at least `1 - 0.5·tol` (and at most
/// `1 + tol`) is persistent.  Moduli inside the half-band between those
/// cuts make the classification unreliable and raise
/// [`Error::AmbiguousModulus`]; moduli above `1 + tol` raise
/// [`Error::SpectralRadiusAboveOne`].  The persistent block must pass the
/// semisimplicity check.
pub fn compute_stable_split(op: &Operator, peripheral_tol: f64) -> Result<StableSplit> {
    if !(peripheral_tol > 0.0 && peripheral_tol < 0.25) {
        return Err(Error::InvalidParameter {
            name: "peripheral_tol",
            value: peripheral_tol,
            requirement: "0 < peripheral_tol < 0.25",
        });
    }
    let n = op.dim();
    let mut sch = schur::schur(op.matrix())?;

    let mut select_interior = Vec::with_capacity(n);
    for l in sch.t.diag() {
        let m = l.norm();
        if m > 1.0 + peripheral_tol {
            return Err(Error::SpectralRadiusAboveOne { modulus: m });
        }
        if m >= 1.0 - 0.5 * peripheral_tol {
            select_interior.push(false);
        } else if m <= 1.0 - 1.5 * peripheral_tol {
            select_interior.push(true);
        } else {
            return Err(Error::AmbiguousModulus { modulus: m, band: peripheral_tol });
        }
    }

    let n_interior = schur::reorder_leading(&mut sch, &select_interior);
    let codim = n - n_interior;

    let x0_basis = sch.q.columns(0, n_interior);
    let complement_basis = sch.q.columns(n_interior, n);
    let quotient = sch.t.submatrix(n_interior, n, n_interior, n);
    check_peripheral_semisimple(&quotient)?;
    let peripheral_eigvals = quotient.diag();

    Ok(StableSplit { x0_basis, complement_basis, codim, quotient, peripheral_eigvals })
}

/// Outcome of [`quotient_p_isometry_check`].
#[derive(Clone, Debug)]
pub struct QuotientIsometryReport {
    /// Number of random unit samples tested.
    pub sample_count: usize,
    /// Largest observed `| ‖Tx‖_p − ‖x‖_p |`: the induced map should be an
    /// isometry for the limit seminorm.
    pub max_isometry_dev: f64,
    /// Largest observed `| ‖x + z‖_p − ‖x‖_p |` over stable perturbations
    /// `z ∈ X₀`: the seminorm should not see the class representative.
    pub max_welldefinedness_dev: f64,
    /// Tolerance both deviations are held to.
    pub tolerance: f64,
    /// Whether every sample stayed within tolerance.
    pub pass: bool,
}

/// Check, on seeded random samples, that the limit seminorm descends to the
/// quotient (insensitive to stable perturbations) and that the induced
/// operator acts isometrically on it.
pub fn quotient_p_isometry_check(
    ctx: &NormContext,
    split: &StableSplit,
    sample_count: usize,
    seed: u64,
) -> Result<QuotientIsometryReport> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_count",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    let n = ctx.operator().dim();
    let mut stream = SeedStream::salted(seed, 0x150e);
    let mut max_iso = 0.0f64;
    let mut max_well = 0.0f64;

    for _ in 0..sample_count {
        let x = stream.unit_vector(n);
        let px = ctx.norm(NormKind::QuotientP, &x)?;
        let tx = ctx.operator().apply(&x);
        let ptx = ctx.norm(NormKind::QuotientP, &tx)?;
        max_iso = max_iso.max(math::abs(ptx - px));

        if split.x0_basis.cols() > 0 {
            let coeffs = stream.complex_normal_vec(split.x0_basis.cols());
            let mut z = split.x0_basis.matvec(&coeffs);
            let zn = linalg::norm2(&z);
            if zn > 0.0 {
                // Perturb by a stable vector comparable in size to x.
                let s = C64::new(1.0 / zn, 0.0);
                for v in z.iter_mut() {
                    *v *= s;
                }
            }
            let shifted: Vec<C64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            let pshift = ctx.norm(NormKind::QuotientP, &shifted)?;
            max_well = max_well.max(math::abs(pshift - px));
        }
    }

    let tolerance = QUOTIENT_ISOMETRY_TOL;
    Ok(QuotientIsometryReport {
        sample_count,
        max_isometry_dev: max_iso,
        max_welldefinedness_dev: max_well,
        tolerance,
        pass: max_iso <= tolerance && max_well <= tolerance,
    })
}
