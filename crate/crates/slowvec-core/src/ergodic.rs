//! Cesàro averaging, mean-ergodic projections, covering-net dimension
//! bounds, and the flattening search that ties the pieces together.
//!
//! For a power-bounded operator and a unit-modulus `λ`, the Cesàro means
//! `S_{m,λ} = (1/(m+1)) Σ_{i=0}^{m} Tⁱ/λⁱ` converge to the projection onto
//! the λ-eigenspace along the complementary invariant subspace.
//! [`cesaro_mean`] evaluates one mean by a running sum; [`ergodic_projection`]
//! accelerates the limit by doubling `m`, polishes the accepted mean into an
//! idempotent by repeated squaring, and then cross-validates the result
//! against an independent Schur-based construction of the same projection —
//! disagreement is reported as an error carrying both candidates.
//!
//! Two further checks connect averaging to attraction.  A hull that attracts
//! all orbits within `α < 1` bounds every peripheral eigenspace: a
//! `(1−α)`-net of the hull spans a subspace `Y` with
//! `dim ker(T − λI) ≤ dim Y` ([`kkm_dimension_bound`]).  And averaging
//! flattens the complement of the eigenspace: [`flattening_check`] searches
//! for the smallest `m` such that `‖Tⁿ(S_m − P)‖` stays under a bound on a
//! tail window of `n`, together with a witness direction annihilated by `P`.
//! [`asymptotic_report`] orchestrates the full pipeline over all peripheral
//! eigenvalue clusters and records cross-checks between the stages.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::attractor::{check_star_condition, AttractionReport, Compactum};
use crate::error::{Error, ProjectionMismatch, Result};
use crate::linalg::{self, norm2, schur, svd, C64, CMat};
use crate::math;
use crate::norms::{build_norm_context, compute_stable_split, DEFAULT_PERIPHERAL_TOL};
use crate::operators::Operator;
use crate::rng::SeedStream;
use crate::slow::{self, SlowCertificate};

/// Agreement threshold between the Cesàro and Schur constructions of the
/// same projection, in spectral norm.
pub const PROJ_TOL: f64 = 1e-8;
/// Default ceiling for the flattening tail norm.
pub const DEFAULT_FLATTEN_BOUND: f64 = 1.0 / 3.0;
/// Cardinality cap for covering nets.
pub const NET_CAP: usize = 4096;
/// Diagonal entries at most this far from `λ` join its spectral cluster.
const CLUSTER_TOL: f64 = 1e-6;
/// Tolerated deviation of `|λ|` from 1 on input; `λ` is then snapped onto
/// the circle.
const CIRCLE_TOL: f64 = 1e-6;
/// Maximum idempotent-refinement squarings of the accepted Cesàro mean.
const REFINE_CAP: usize = 8;
/// Doubling tolerance and term cap used for the internal projection inside
/// the flattening search.  The tolerance is deliberately loose: stopping
/// early keeps the accumulated eigenvalue-roundoff drift small, and the
/// idempotent refinement removes the leftover non-eigenspace components.
const FLATTEN_PROJ_TOL: f64 = 1e-3;
const FLATTEN_PROJ_CAP: usize = 1 << 28;
/// A witness orbit re-enters the net's span when its distance drops below
/// `1 − WITNESS_DROP`.
const WITNESS_DROP: f64 = 1e-9;

/// Validate that `lambda` sits on the unit circle (within [`CIRCLE_TOL`])
/// and return it renormalized to exact unit modulus.
fn snap_to_circle(lambda: C64) -> Result<C64> {
    let modulus = lambda.norm();
    if math::abs(modulus - 1.0) > CIRCLE_TOL {
        return Err(Error::OffCircleEigenvalue { lambda, modulus });
    }
    Ok(lambda / modulus)
}

/// One Cesàro mean `S_{m,λ}` of `T/λ`.
#[derive(Clone, Debug)]
pub struct CesaroMean {
    /// Number of averaged powers minus one.
    pub m: usize,
    /// Unit-modulus reference eigenvalue (snapped onto the circle).
    pub lambda: C64,
    /// The averaging operator `(1/(m+1)) Σ_{i=0}^{m} Tⁱ/λⁱ`.
    pub matrix: CMat,
}

impl CesaroMean {
    /// Apply the mean to a vector.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        self.matrix.matvec(x)
    }
}

/// Cesàro mean of `T/λ` with `m+1` terms, evaluated by a running sum with
/// one matrix multiply per increment.
pub fn cesaro_mean(op: &Operator, lambda: C64, m: usize) -> Result<CesaroMean> {
    let lambda = snap_to_circle(lambda)?;
    let n = op.dim();
    let b = op.matrix().scale(C64::new(1.0, 0.0) / lambda);
    let mut acc = CMat::identity(n);
    let mut power = CMat::identity(n);
    for _ in 0..m {
        power = b.mul(&power);
        acc = acc.add(&power);
    }
    let matrix = acc.scale(C64::new(1.0 / (m as f64 + 1.0), 0.0));
    Ok(CesaroMean { m, lambda, matrix })
}

/// The mean-ergodic projection at a unit-modulus `λ`, with its convergence
/// record.
#[derive(Clone, Debug)]
pub struct ErgodicProjection {
    /// The reference eigenvalue (snapped onto the circle).
    pub lambda: C64,
    /// Projection onto `ker(T − λI)` along the complementary invariant
    /// subspace; zero when `λ` is not an eigenvalue.
    pub p: CMat,
    /// Subscript of the Cesàro mean accepted by the doubling loop (before
    /// idempotent refinement).
    pub m_used: usize,
    /// Doubling record: `(m, ‖S_m − S‖)` where `S` is the mean with twice
    /// as many terms.
    pub convergence_history: Vec<(usize, f64)>,
}

/// Mean-ergodic projection by Cesàro doubling, idempotent refinement, and
/// spectral cross-validation.
///
/// The doubling loop advances `Σ_{i<m} Bⁱ` (with `B = T/λ`) by
/// `Σ_{2m} = Σ_m + Bᵐ Σ_m`, two matrix multiplies per doubling, until the
/// means of `m` and `2m` terms differ by less than `tol` or the term count
/// passes `m_cap`.  The accepted mean is then squared a few times: squaring
/// preserves the eigenspace component while annihilating the `O(tol)`
/// residue of every other spectral component, so a loose `tol` still yields
/// a projection accurate to roundoff.  Finally the result must agree with
/// the Schur invariant-subspace projector for the `λ`-cluster within
/// [`PROJ_TOL`]; the cluster groups eigenvalues within 1e−6 of `λ`, so
/// close-but-distinct peripheral eigenvalues surface as an honest mismatch
/// instead of a silently wrong answer.
pub fn ergodic_projection(
    op: &Operator,
    lambda: C64,
    tol: f64,
    m_cap: usize,
) -> Result<ErgodicProjection> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            requirement: "strictly between 0 and 1",
        });
    }
    if m_cap < 1 {
        return Err(Error::InvalidParameter {
            name: "m_cap",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    let lambda = snap_to_circle(lambda)?;
    let n = op.dim();
    let b = op.matrix().scale(C64::new(1.0, 0.0) / lambda);

    // Doubling loop over partial sums Σ_{i<terms} Bⁱ.
    let mut sigma = CMat::identity(n);
    let mut bpow = b.clone();
    let mut terms = 1usize;
    let mut mean_prev = sigma.clone();
    let mut history = Vec::new();
    let mut accepted: Option<(usize, CMat)> = None;
    let mut last_gap = f64::INFINITY;
    while terms <= m_cap {
        let sigma_next = sigma.add(&bpow.mul(&sigma));
        let terms_next = terms * 2;
        let mean_next = sigma_next.scale(C64::new(1.0 / terms_next as f64, 0.0));
        last_gap = svd::spectral_norm(&mean_prev.sub(&mean_next));
        history.push((terms - 1, last_gap));
        if last_gap < tol {
            accepted = Some((terms_next - 1, mean_next));
            break;
        }
        sigma = sigma_next;
        bpow = bpow.mul(&bpow);
        terms = terms_next;
        mean_prev = mean_next;
    }
    let (m_used, mean) = match accepted {
        Some(pair) => pair,
        None => {
            return Err(Error::ConvergenceFailed {
                routine: "ergodic projection (Cesàro doubling)",
                residual: last_gap,
            })
        }
    };

    // Idempotent refinement: non-eigenspace spectral components of the mean
    // have magnitude O(tol); squaring drives them to roundoff in a few
    // rounds while fixing the eigenspace.
    let mut p_cesaro = mean;
    let mut prev_delta = f64::INFINITY;
    for _ in 0..REFINE_CAP {
        let squared = p_cesaro.mul(&p_cesaro);
        let delta = svd::spectral_norm(&squared.sub(&p_cesaro));
        if delta >= prev_delta {
            break;
        }
        p_cesaro = squared;
        prev_delta = delta;
        if delta < 1e-12 {
            break;
        }
    }

    // Independent construction: Schur form, cluster at λ, invariant
    // projector.
    let mut sch = schur::schur(op.matrix())?;
    let select: Vec<bool> =
        sch.t.diag().iter().map(|d| (d - lambda).norm() <= CLUSTER_TOL).collect();
    let kept = schur::reorder_leading(&mut sch, &select);
    let p_spectral = schur::leading_invariant_projector(&sch, kept)?;

    let deviation = svd::spectral_norm(&p_cesaro.sub(&p_spectral));
    if deviation > PROJ_TOL {
        return Err(Error::ProjectionMismatch(Box::new(ProjectionMismatch {
            cesaro: p_cesaro,
            spectral: p_spectral,
            deviation,
        })));
    }
    Ok(ErgodicProjection { lambda, p: p_cesaro, m_used, convergence_history: history })
}

/// Witness orbit for the covering-net mechanism: a unit vector starting at
/// distance 1 from the net's span.
#[derive(Clone, Debug)]
pub struct KkmWitness {
    /// The starting vector, orthogonal to the span.
    pub z: Vec<C64>,
    /// First step whose orbit point re-enters the span's unit neighborhood,
    /// if the scan found one.
    pub step: Option<usize>,
    /// Smallest span distance seen over the scan.
    pub distance: f64,
}

/// Dimension bound extracted from a covering net of the hull.
#[derive(Clone, Debug)]
pub struct KkmReport {
    /// The eigenvalue under test (snapped onto the circle).
    pub lambda: C64,
    /// Attraction threshold the net mesh is tied to.
    pub alpha: f64,
    /// Number of net points kept.
    pub net_size: usize,
    /// Dimension of the net's span `Y`.
    pub dim_y: usize,
    /// `dim ker(T − λI)` by SVD nullity.
    pub kernel_dim: usize,
    /// Whether the bound `kernel_dim ≤ dim_y` holds.
    pub holds: bool,
    /// Orbit re-entry check; `None` when the span is everything.
    pub witness: Option<KkmWitness>,
}

/// Draw one point of the hull: coefficient magnitudes on the simplex
/// (normalized exponentials), uniform phases, and a radial factor filling
/// the interior.
fn hull_sample(stream: &mut SeedStream, k: &Compactum) -> Vec<C64> {
    let g = k.count();
    let mut mags = Vec::with_capacity(g);
    let mut total = 0.0f64;
    for _ in 0..g {
        let e = -math::ln(1.0 - stream.uniform());
        mags.push(e);
        total += e;
    }
    let radial = math::powf(stream.uniform(), 1.0 / (2.0 * g as f64));
    let mut point = vec![C64::new(0.0, 0.0); k.dim()];
    if total <= 0.0 {
        return point;
    }
    for (j, gen) in k.generators().iter().enumerate() {
        let c = stream.unit_phase() * (radial * mags[j] / total);
        linalg::axpy(c, gen, &mut point);
    }
    point
}

/// Orthonormal basis of the span of a point set, by modified Gram–Schmidt
/// with re-orthogonalization; directions below `rel_tol` times the largest
/// point norm are treated as dependent.
fn span_basis(points: &[Vec<C64>], dim: usize, rel_tol: f64) -> CMat {
    let scale = points.iter().fold(0.0f64, |a, p| a.max(norm2(p))).max(1e-300);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for p in points {
        if basis.len() == dim {
            break;
        }
        let mut v = p.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = linalg::dot(q, &v);
                linalg::axpy(-c, q, &mut v);
            }
        }
        if norm2(&v) > rel_tol * scale {
            linalg::normalize(&mut v);
            basis.push(v);
        }
    }
    let mut q = CMat::zeros(dim, basis.len());
    for (j, col) in basis.iter().enumerate() {
        q.set_col(j, col);
    }
    q
}

/// Distance from `y` to the column span of `q` (orthonormal columns).
fn span_distance(q: &CMat, y: &[C64]) -> f64 {
    let mut off = y.to_vec();
    if q.cols() > 0 {
        let coords = q.adjoint_matvec(y);
        for (j, c) in coords.iter().enumerate() {
            let col = q.col(j);
            linalg::axpy(-*c, &col, &mut off);
        }
    }
    norm2(&off)
}

/// Bound the `λ`-eigenspace dimension by the span of a `(1−α)`-net of the
/// hull.
///
/// The net is built by greedy farthest-point selection over a dense seeded
/// sample of the hull, then certified by fresh covering checks; uncovered
/// fresh points are folded into the net until a check passes or the net
/// exceeds [`NET_CAP`] (the hull is too large for the requested mesh).  The
/// report compares `dim ker(T − λI)` (SVD nullity at `1e−8·‖T‖`) against
/// `dim span(net)` and scans one orthogonal witness orbit for re-entry into
/// the span.
pub fn kkm_dimension_bound(
    op: &Operator,
    k: &Compactum,
    alpha: f64,
    lambda: C64,
    horizon: usize,
) -> Result<KkmReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "strictly between 0 and 1",
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    if k.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: k.dim() });
    }
    let lambda = snap_to_circle(lambda)?;
    let n = op.dim();
    let g = k.count();
    // Deterministic internal stream: the net is part of the construction,
    // not an experiment parameter.
    let mut stream = SeedStream::salted(0x6b3d, ((n as u64) << 32) | g as u64);

    let mesh = 1.0 - alpha;
    let sample_count = 256 * g + 64 * g * g;
    let mut samples: Vec<Vec<C64>> = Vec::with_capacity(sample_count + g + 1);
    samples.push(vec![C64::new(0.0, 0.0); n]);
    for gen in k.generators() {
        samples.push(gen.clone());
    }
    for _ in 0..sample_count {
        samples.push(hull_sample(&mut stream, k));
    }

    // Greedy farthest-point selection down to a slightly finer mesh, so the
    // fresh covering checks at the nominal mesh have slack.
    let target = mesh * 0.98;
    let mut net: Vec<Vec<C64>> = vec![samples[0].clone()];
    let mut dist: Vec<f64> =
        samples.iter().map(|s| norm2(&linalg::vec_sub(s, &samples[0]))).collect();
    loop {
        let (mut far_idx, mut far_d) = (0usize, 0.0f64);
        for (i, &d) in dist.iter().enumerate() {
            if d > far_d {
                far_d = d;
                far_idx = i;
            }
        }
        if far_d <= target {
            break;
        }
        if net.len() >= NET_CAP {
            return Err(Error::NetTooLarge { cardinality: net.len() + 1, cap: NET_CAP });
        }
        let new_point = samples[far_idx].clone();
        for (i, s) in samples.iter().enumerate() {
            let d = norm2(&linalg::vec_sub(s, &new_point));
            if d < dist[i] {
                dist[i] = d;
            }
        }
        net.push(new_point);
    }

    // Certify the mesh on fresh draws; fold uncovered points in and retry.
    let check_count = 100 * g;
    loop {
        let mut violators: Vec<Vec<C64>> = Vec::new();
        for _ in 0..check_count {
            let fresh = hull_sample(&mut stream, k);
            let nearest =
                net.iter().map(|p| norm2(&linalg::vec_sub(&fresh, p))).fold(f64::INFINITY, f64::min);
            if nearest > mesh {
                violators.push(fresh);
            }
        }
        if violators.is_empty() {
            break;
        }
        if net.len() + violators.len() > NET_CAP {
            return Err(Error::NetTooLarge {
                cardinality: net.len() + violators.len(),
                cap: NET_CAP,
            });
        }
        net.extend(violators);
    }

    let q = span_basis(&net, n, 1e-9);
    let dim_y = q.cols();

    let mut shifted = op.matrix().clone();
    for i in 0..n {
        *shifted.at_mut(i, i) -= lambda;
    }
    let null_tol = 1e-8 * svd::spectral_norm(op.matrix());
    let kernel_dim = svd::nullspace_basis(&shifted, null_tol)?.cols();
    let holds = kernel_dim <= dim_y;

    let witness = if dim_y < n {
        let mut z = None;
        for _ in 0..32 {
            let v = stream.complex_normal_vec(n);
            let mut w = v.clone();
            let coords = q.adjoint_matvec(&v);
            for (j, c) in coords.iter().enumerate() {
                let col = q.col(j);
                linalg::axpy(-*c, &col, &mut w);
            }
            if linalg::normalize(&mut w) > 1e-6 {
                z = Some(w);
                break;
            }
        }
        z.map(|z| {
            let mut y = z.clone();
            let mut best = f64::INFINITY;
            let mut step = None;
            for s in 1..=horizon {
                y = op.apply(&y);
                let d = span_distance(&q, &y);
                if d < best {
                    best = d;
                }
                if d < 1.0 - WITNESS_DROP {
                    step = Some(s);
                    break;
                }
            }
            KkmWitness { z, step, distance: best }
        })
    } else {
        None
    };

    Ok(KkmReport { lambda, alpha, net_size: net.len(), dim_y, kernel_dim, holds, witness })
}

/// Direction achieving the flattening tail maximum, annihilated by the
/// projection.
#[derive(Clone, Debug)]
pub struct FlatteningWitness {
    /// Unit direction with `Px = 0`.
    pub x: Vec<C64>,
    /// Tail step at which the maximum is attained.
    pub n: usize,
    /// `‖Tⁿ(S_m − P)x‖` recomputed on the witness.
    pub norm: f64,
}

/// Outcome of the flattening search.
#[derive(Clone, Debug)]
pub struct FlatteningReport {
    /// The eigenvalue under test (snapped onto the circle).
    pub lambda: C64,
    /// Attraction threshold this check is evidence about.
    pub alpha: f64,
    /// Ceiling the tail norm had to meet.
    pub bound: f64,
    /// Orbit horizon; the tail window is `[horizon/2, horizon]`.
    pub horizon: usize,
    /// Smallest accepted averaging length, if any.
    pub m: Option<usize>,
    /// Tail value at the accepted `m`, or the exact value at `m_cap` when
    /// the search failed.
    pub value: f64,
    /// Maximizing direction (absent only when the flattened operator is
    /// numerically zero and the projection is the identity).
    pub witness: Option<FlatteningWitness>,
    /// `(m, tail value)` per candidate; failed candidates record the first
    /// tail norm found above the bound, a lower bound on their true value.
    pub history: Vec<(usize, f64)>,
}

impl FlatteningReport {
    /// Whether some `m` within the cap flattened the tail window.
    pub fn passes(&self) -> bool {
        self.m.is_some()
    }
}

/// Exact tail evaluation for one `m`: maximum of `‖Tⁿ E‖` over the window,
/// with the maximizing step.  `thalf` must be `T^{n0}`.
fn tail_value(
    op: &Operator,
    thalf: &CMat,
    e: &CMat,
    n0: usize,
    horizon: usize,
) -> (f64, usize) {
    let mut w = thalf.mul(e);
    let (mut best, mut warm) = svd::spectral_norm_warm(&w, None);
    let mut best_n = n0;
    for n in n0 + 1..=horizon {
        w = op.matrix().mul(&w);
        let (val, next_warm) = svd::spectral_norm_warm(&w, Some(&warm));
        warm = next_warm;
        if val > best {
            best = val;
            best_n = n;
        }
    }
    (best, best_n)
}

/// Search for the smallest averaging length that flattens the orbit tail.
///
/// For each `m ≤ m_cap` the quantity under test is
/// `max ‖Tⁿ S_m − λⁿ P‖` over `n` in `[horizon/2, horizon]`, which equals
/// `max ‖Tⁿ (S_m − P)‖` because `T P = λ P`.  Candidates are screened
/// cheaply: the tail scan aborts as soon as one step exceeds the bound,
/// which keeps the search linear in `m_cap`; the final candidate `m_cap` is
/// always evaluated exactly so a failure reports an honest best value.  The
/// accepted report carries a unit witness `x` with `P x = 0` achieving the
/// maximum.
pub fn flattening_check(
    op: &Operator,
    lambda: C64,
    alpha: f64,
    bound: f64,
    horizon: usize,
    m_cap: usize,
) -> Result<FlatteningReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "strictly between 0 and 1",
        });
    }
    if !(bound > 0.0 && bound < 1.0) {
        return Err(Error::InvalidParameter {
            name: "bound",
            value: bound,
            requirement: "strictly between 0 and 1",
        });
    }
    if horizon < 2 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon as f64,
            requirement: "at least 2",
        });
    }
    let proj = ergodic_projection(op, lambda, FLATTEN_PROJ_TOL, FLATTEN_PROJ_CAP)?;
    let lambda = proj.lambda;
    let p = proj.p;
    let n = op.dim();
    let n0 = horizon / 2;
    let thalf = op.matrix().matpow(n0);
    let b = op.matrix().scale(C64::new(1.0, 0.0) / lambda);

    let mut acc = CMat::identity(n);
    let mut bpow = CMat::identity(n);
    let mut history = Vec::new();
    let mut outcome: Option<(usize, f64, usize, CMat)> = None;
    for m in 0..=m_cap {
        if m > 0 {
            bpow = b.mul(&bpow);
            acc = acc.add(&bpow);
        }
        let e = acc.scale(C64::new(1.0 / (m as f64 + 1.0), 0.0)).sub(&p);
        if m < m_cap {
            // Screened scan: abort on the first tail step over the bound.
            let mut w = thalf.mul(&e);
            let (mut val, mut warm) = svd::spectral_norm_warm(&w, None);
            let mut max_val = val;
            let mut max_n = n0;
            let mut over = val > bound;
            if !over {
                for step in n0 + 1..=horizon {
                    w = op.matrix().mul(&w);
                    let (v, next_warm) = svd::spectral_norm_warm(&w, Some(&warm));
                    warm = next_warm;
                    val = v;
                    if val > max_val {
                        max_val = val;
                        max_n = step;
                    }
                    if val > bound {
                        over = true;
                        break;
                    }
                }
            }
            history.push((m, max_val));
            if !over {
                outcome = Some((m, max_val, max_n, e));
                break;
            }
        } else {
            // Last candidate: evaluate exactly for an honest failure value.
            let (val, at) = tail_value(op, &thalf, &e, n0, horizon);
            history.push((m, val));
            if val <= bound {
                outcome = Some((m, val, at, e));
            } else {
                let witness = flattening_witness(op, &thalf, &e, &p, n0, at);
                return Ok(FlatteningReport {
                    lambda,
                    alpha,
                    bound,
                    horizon,
                    m: None,
                    value: val,
                    witness,
                    history,
                });
            }
        }
    }
    let (m, value, at, e) = outcome.expect("loop either accepts or returns");
    let witness = flattening_witness(op, &thalf, &e, &p, n0, at);
    Ok(FlatteningReport {
        lambda,
        alpha,
        bound,
        horizon,
        m: Some(m),
        value,
        witness,
        history,
    })
}

/// Unit direction with `Px = 0` achieving `‖T^{at}E‖`, by taking the top
/// right singular vector of the tail matrix and removing its (numerically
/// zero) projection component.
fn flattening_witness(
    op: &Operator,
    thalf: &CMat,
    e: &CMat,
    p: &CMat,
    n0: usize,
    at: usize,
) -> Option<FlatteningWitness> {
    let mut w = thalf.mul(e);
    for _ in n0..at {
        w = op.matrix().mul(&w);
    }
    let (_, top) = svd::spectral_norm_warm(&w, None);
    if top.is_empty() {
        return None;
    }
    let mut x = linalg::vec_sub(&top, &p.matvec(&top));
    if linalg::normalize(&mut x) < 1e-12 {
        return None;
    }
    let norm = norm2(&w.matvec(&x));
    Some(FlatteningWitness { x, n: at, norm })
}

/// Knobs for [`asymptotic_report`].
#[derive(Clone, Debug)]
pub struct AsymptoticConfig {
    /// Slow-vector quality target for synthesis and subspaces.
    pub epsilon: f64,
    /// Orbit horizon shared by the attraction scan, the flattening tail,
    /// and witness scans.
    pub horizon: usize,
    /// Sampled orbits in the attraction check.
    pub sample_count: usize,
    /// Sphere samples per candidate forward step in slow subspaces.
    pub sphere_samples: usize,
    /// Flattening ceiling.
    pub flatten_bound: f64,
    /// Flattening search cap.
    pub m_cap: usize,
    /// Modulus band classifying eigenvalues as decaying or persistent.
    pub peripheral_tol: f64,
    /// Seed for every sampled stage.
    pub seed: u64,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig {
            epsilon: 0.01,
            horizon: 64,
            sample_count: 16,
            sphere_samples: 32,
            flatten_bound: DEFAULT_FLATTEN_BOUND,
            m_cap: 512,
            peripheral_tol: DEFAULT_PERIPHERAL_TOL,
            seed: 0,
        }
    }
}

/// Everything learned about one peripheral eigenvalue cluster.
#[derive(Clone, Debug)]
pub struct PeripheralFinding {
    /// Cluster representative on the unit circle.
    pub lambda: C64,
    /// Number of eigenvalues merged into the cluster.
    pub multiplicity: usize,
    /// `dim ker(T − λI)` by SVD nullity.
    pub kernel_dim: usize,
    /// Covering-net dimension bound, when that stage ran.
    pub kkm: Option<KkmReport>,
    /// Flattening search outcome, when that stage ran.
    pub flattening: Option<FlatteningReport>,
    /// Certified slow-subspace dimension, when that stage ran.
    pub slow_dim: Option<usize>,
}

/// One recorded cross-check between stages.
#[derive(Clone, Debug)]
pub struct Verdict {
    /// Stable identifier of the check.
    pub name: &'static str,
    /// Whether it held.
    pub holds: bool,
    /// Human-readable account of what was compared.
    pub detail: String,
}

/// Combined report over all stages of the asymptotic analysis.
#[derive(Clone, Debug)]
pub struct AsymptoticSummary {
    /// Ambient dimension.
    pub dim: usize,
    /// Attraction threshold.
    pub alpha: f64,
    /// Orbit-attraction evidence, when that stage ran.
    pub star: Option<AttractionReport>,
    /// Codimension of the decaying subspace, when the split succeeded.
    pub codim: Option<usize>,
    /// Per-cluster findings.
    pub peripheral: Vec<PeripheralFinding>,
    /// A synthesized slow certificate, when one exists.
    pub slow_certificate: Option<SlowCertificate>,
    /// `Some(true)` when synthesis proved there are no slow vectors,
    /// `Some(false)` when it produced a certificate, `None` on other errors.
    pub no_slow_vectors: Option<bool>,
    /// Largest certified slow-subspace dimension across clusters.
    pub max_slow_dim: Option<usize>,
    /// Cross-stage consistency checks.
    pub verdicts: Vec<Verdict>,
    /// Stage failures as `(stage, message)`; failed stages leave their
    /// fields `None` and downstream checks skip them.
    pub stage_errors: Vec<(&'static str, String)>,
}

impl AsymptoticSummary {
    /// Whether every recorded cross-check held.
    pub fn consistent(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

/// Run the full pipeline: attraction scan, stable split, slow-vector
/// synthesis, and per-cluster kernel/net/flattening/subspace analysis, with
/// cross-stage consistency verdicts.
///
/// Stage failures are collected into `stage_errors` rather than aborting:
/// an inconclusive attraction scan, for example, still leaves the spectral
/// stages meaningful.  Only invalid parameters abort early.
pub fn asymptotic_report(
    op: &Operator,
    k: &Compactum,
    alpha: f64,
    config: &AsymptoticConfig,
) -> Result<AsymptoticSummary> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "strictly between 0 and 1",
        });
    }
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: config.epsilon,
            requirement: "strictly between 0 and 1",
        });
    }
    if config.horizon < 2 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: config.horizon as f64,
            requirement: "at least 2",
        });
    }
    if k.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: k.dim() });
    }

    let mut stage_errors: Vec<(&'static str, String)> = Vec::new();

    let star = match check_star_condition(op, k, alpha, config.sample_count, config.horizon, config.seed)
    {
        Ok(r) => Some(r),
        Err(e) => {
            stage_errors.push(("star", format!("{e}")));
            None
        }
    };

    let split = match compute_stable_split(op, config.peripheral_tol) {
        Ok(s) => Some(s),
        Err(e) => {
            stage_errors.push(("split", format!("{e}")));
            None
        }
    };
    let codim = split.as_ref().map(|s| s.codim);

    let ctx = match build_norm_context(op, config.horizon, config.horizon) {
        Ok(c) => Some(c),
        Err(e) => {
            stage_errors.push(("norms", format!("{e}")));
            None
        }
    };

    let mut slow_certificate = None;
    let mut no_slow_vectors = None;
    if let (Some(ctx), Some(split)) = (&ctx, &split) {
        match slow::synthesize_slow(ctx, split, config.epsilon) {
            Ok(cert) => {
                slow_certificate = Some(cert);
                no_slow_vectors = Some(false);
            }
            Err(Error::NoSlowVectors) => no_slow_vectors = Some(true),
            Err(e) => stage_errors.push(("synthesize", format!("{e}"))),
        }
    }

    let mut peripheral = Vec::new();
    if let Some(split) = &split {
        let norm_t = svd::spectral_norm(op.matrix());
        for cluster in slow::peripheral_clusters(&split.peripheral_eigvals) {
            let lambda = cluster.rep;
            let mut shifted = op.matrix().clone();
            for i in 0..op.dim() {
                *shifted.at_mut(i, i) -= lambda;
            }
            let kernel_dim = match svd::nullspace_basis(&shifted, 1e-8 * norm_t) {
                Ok(b) => b.cols(),
                Err(e) => {
                    stage_errors.push(("kernel", format!("lambda {lambda}: {e}")));
                    continue;
                }
            };
            let kkm = match kkm_dimension_bound(op, k, alpha, lambda, config.horizon) {
                Ok(r) => Some(r),
                Err(e) => {
                    stage_errors.push(("kkm", format!("lambda {lambda}: {e}")));
                    None
                }
            };
            let flattening = match flattening_check(
                op,
                lambda,
                alpha,
                config.flatten_bound,
                config.horizon,
                config.m_cap,
            ) {
                Ok(r) => Some(r),
                Err(e) => {
                    stage_errors.push(("flattening", format!("lambda {lambda}: {e}")));
                    None
                }
            };
            let slow_dim = match ctx.as_ref().map(|ctx| {
                slow::slow_subspace(
                    ctx,
                    split,
                    lambda,
                    config.epsilon,
                    cluster.count,
                    config.sphere_samples,
                    config.seed,
                )
            }) {
                Some(Ok(sub)) => Some(sub.dim),
                Some(Err(e)) => {
                    stage_errors.push(("slow-subspace", format!("lambda {lambda}: {e}")));
                    None
                }
                None => None,
            };
            peripheral.push(PeripheralFinding {
                lambda,
                multiplicity: cluster.count,
                kernel_dim,
                kkm,
                flattening,
                slow_dim,
            });
        }
    }
    let max_slow_dim = peripheral.iter().filter_map(|p| p.slow_dim).max();

    let mut verdicts = Vec::new();
    if let (Some(codim), Some(no_slow)) = (codim, no_slow_vectors) {
        verdicts.push(Verdict {
            name: "codim-slow-dichotomy",
            holds: (codim == 0) == no_slow,
            detail: format!("codim {codim} vs slow vectors {}", if no_slow { "absent" } else { "present" }),
        });
    }
    {
        let mut holds = true;
        let mut parts: Vec<String> = Vec::new();
        for f in &peripheral {
            if let (Some(flat), Some(slow_dim)) = (&f.flattening, f.slow_dim) {
                if flat.passes() {
                    let ok = slow_dim <= f.kernel_dim;
                    holds &= ok;
                    parts.push(format!(
                        "lambda {}: slow {slow_dim} vs kernel {}",
                        f.lambda, f.kernel_dim
                    ));
                }
            }
        }
        if !parts.is_empty() {
            verdicts.push(Verdict {
                name: "slow-dim-within-kernel",
                holds,
                detail: parts.join("; "),
            });
        }
    }
    {
        let checked: Vec<&KkmReport> = peripheral.iter().filter_map(|f| f.kkm.as_ref()).collect();
        if !checked.is_empty() {
            verdicts.push(Verdict {
                name: "kkm-kernel-bound",
                holds: checked.iter().all(|r| r.holds),
                detail: checked
                    .iter()
                    .map(|r| format!("lambda {}: kernel {} vs span {}", r.lambda, r.kernel_dim, r.dim_y))
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
    }
    if let Some(star) = &star {
        let flattened: Vec<&FlatteningReport> =
            peripheral.iter().filter_map(|f| f.flattening.as_ref()).collect();
        if star.passes() && !flattened.is_empty() {
            verdicts.push(Verdict {
                name: "attraction-implies-flattening",
                holds: flattened.iter().all(|f| f.passes()),
                detail: format!(
                    "attraction holds; {} of {} clusters flattened",
                    flattened.iter().filter(|f| f.passes()).count(),
                    flattened.len()
                ),
            });
        }
    }

    Ok(AsymptoticSummary {
        dim: op.dim(),
        alpha,
        star,
        codim,
        peripheral,
        slow_certificate,
        no_slow_vectors,
        max_slow_dim,
        verdicts,
        stage_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{assert_near, qr};
    use crate::operators::{
        make_cyclic_shift, make_split_operator, make_truncated_shift, ShiftDirection,
    };

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn e(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![re(0.0); n];
        v[i] = re(1.0);
        v
    }

    fn diag_op(entries: &[C64]) -> Operator {
        let n = entries.len();
        let mat = CMat::from_fn(n, n, |i, j| if i == j { entries[i] } else { re(0.0) });
        let bound = entries.iter().fold(1.0f64, |a, x| a.max(x.norm()));
        Operator::new(mat, Some(bound)).expect("diagonal operator")
    }

    fn swap_op() -> Operator {
        let mat = CMat::from_fn(2, 2, |i, j| if i != j { re(1.0) } else { re(0.0) });
        Operator::new(mat, Some(1.0)).expect("swap operator")
    }

    fn mat_near(a: &CMat, b: &CMat, tol: f64, what: &str) {
        let d = svd::spectral_norm(&a.sub(b));
        assert!(d <= tol, "{what}: matrices differ by {d} (tol {tol})");
    }

    #[test]
    fn cesaro_mean_of_zero_terms_is_identity() {
        let op = swap_op();
        let mean = cesaro_mean(&op, re(1.0), 0).expect("mean");
        mat_near(&mean.matrix, &CMat::identity(2), 0.0, "S_0");
    }

    #[test]
    fn cesaro_mean_swap_example() {
        let op = swap_op();
        let mean = cesaro_mean(&op, re(1.0), 1).expect("mean");
        let oracle = CMat::from_fn(2, 2, |_, _| re(0.5));
        mat_near(&mean.matrix, &oracle, 1e-15, "S_1 of the swap");
    }

    #[test]
    fn cesaro_mean_rotation_aligned_with_lambda_is_identity() {
        let i = C64::new(0.0, 1.0);
        let op = diag_op(&[i, i]);
        let mean = cesaro_mean(&op, i, 3).expect("mean");
        mat_near(&mean.matrix, &CMat::identity(2), 1e-14, "T/lambda = I");
    }

    #[test]
    fn cesaro_mean_matches_naive_power_sum() {
        let split = make_split_operator(&[re(1.0), C64::new(0.0, 1.0)], 3, 0.5, 3.0, 41)
            .expect("operator");
        let op = &split.operator;
        let lambda = re(1.0);
        let m = 7usize;
        let mean = cesaro_mean(op, lambda, m).expect("mean");
        let mut naive = CMat::zeros(op.dim(), op.dim());
        for i in 0..=m {
            let pow = op.matrix().matpow(i);
            naive = naive.add(&pow.scale(re(1.0) / lambda.powu(i as u32)));
        }
        naive = naive.scale(re(1.0 / (m as f64 + 1.0)));
        mat_near(&mean.matrix, &naive, 1e-10, "running sum vs naive sum");
    }

    #[test]
    fn cesaro_mean_commutes_with_the_operator() {
        let split = make_split_operator(&[re(1.0)], 4, 0.6, 4.0, 23).expect("operator");
        let op = &split.operator;
        for m in [1usize, 5, 12] {
            let s = cesaro_mean(op, re(1.0), m).expect("mean").matrix;
            let left = s.mul(op.matrix());
            let right = op.matrix().mul(&s);
            mat_near(&left, &right, 1e-10, "S_m commutes with T");
        }
    }

    #[test]
    fn cesaro_mean_fixes_exact_eigenvectors() {
        let op = make_cyclic_shift(4).expect("cyclic shift");
        let i = C64::new(0.0, 1.0);
        // Fourier eigenvector for eigenvalue i.
        let minus_i = C64::new(0.0, -1.0);
        let x = vec![re(0.5), minus_i * 0.5, re(-0.5), i * 0.5];
        for m in [2usize, 5, 9] {
            let mean = cesaro_mean(&op, i, m).expect("mean");
            let y = mean.matvec(&x);
            let drift = norm2(&linalg::vec_sub(&y, &x));
            assert!(drift <= 1e-12, "eigenvector moved by {drift} at m = {m}");
        }
    }

    #[test]
    fn cesaro_mean_rejects_interior_lambda() {
        let op = swap_op();
        match cesaro_mean(&op, re(0.9), 3) {
            Err(Error::OffCircleEigenvalue { .. }) => {}
            other => panic!("expected off-circle rejection, got {other:?}"),
        }
    }

    #[test]
    fn projection_swap_is_the_rank_one_average() {
        let op = swap_op();
        let proj = ergodic_projection(&op, re(1.0), 1e-3, 1 << 20).expect("projection");
        let oracle = CMat::from_fn(2, 2, |_, _| re(0.5));
        mat_near(&proj.p, &oracle, 1e-10, "projection onto the fixed line");
        assert!(proj.m_used <= 7, "S_1 is already exact, used m = {}", proj.m_used);
        assert!(!proj.convergence_history.is_empty());
    }

    #[test]
    fn projection_of_identity_is_identity() {
        let op = diag_op(&[re(1.0), re(1.0)]);
        let proj = ergodic_projection(&op, re(1.0), 1e-3, 1 << 20).expect("projection");
        mat_near(&proj.p, &CMat::identity(2), 1e-12, "identity projection");
    }

    #[test]
    fn projection_kills_the_contracting_block() {
        let op = diag_op(&[re(0.5), re(1.0)]);
        let proj = ergodic_projection(&op, re(1.0), 1e-3, 1 << 20).expect("projection");
        let oracle = CMat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { re(1.0) } else { re(0.0) });
        mat_near(&proj.p, &oracle, 1e-10, "geometric series removes the 0.5 block");
    }

    #[test]
    fn projection_at_minus_one_finds_the_alternating_line() {
        let op = swap_op();
        let proj = ergodic_projection(&op, re(-1.0), 1e-3, 1 << 20).expect("projection");
        let oracle = CMat::from_fn(2, 2, |i, j| if i == j { re(0.5) } else { re(-0.5) });
        mat_near(&proj.p, &oracle, 1e-10, "projection onto the alternating line");
    }

    #[test]
    fn projection_at_a_non_eigenvalue_is_zero() {
        let op = swap_op();
        let proj = ergodic_projection(&op, C64::new(0.0, 1.0), 1e-3, 1 << 22).expect("projection");
        assert!(
            svd::spectral_norm(&proj.p) <= 1e-9,
            "no eigenvalue at i, got norm {}",
            svd::spectral_norm(&proj.p)
        );
    }

    #[test]
    fn projection_laws_hold_on_mixed_operators() {
        let i = C64::new(0.0, 1.0);
        let cases: Vec<(Operator, C64)> = vec![
            (swap_op(), re(1.0)),
            (make_cyclic_shift(4).expect("cyclic"), i),
            (
                make_split_operator(&[re(1.0), i], 2, 0.5, 3.0, 5).expect("split").operator,
                re(1.0),
            ),
        ];
        for (op, lambda) in &cases {
            let proj = ergodic_projection(op, *lambda, 1e-3, 1 << 24).expect("projection");
            let p = &proj.p;
            mat_near(&p.mul(p), p, 1e-8, "idempotency");
            mat_near(&op.matrix().mul(p), &p.scale(*lambda), 1e-8, "T P = lambda P");
            mat_near(&p.mul(op.matrix()), &p.scale(*lambda), 1e-8, "P T = lambda P");
        }
    }

    #[test]
    fn projection_range_is_the_eigenspace() {
        let op = swap_op();
        let proj = ergodic_projection(&op, re(1.0), 1e-3, 1 << 20).expect("projection");
        let range = svd::range_basis(&proj.p, 1e-8).expect("range");
        let mut shifted = op.matrix().clone();
        for i in 0..2 {
            *shifted.at_mut(i, i) -= re(1.0);
        }
        let kernel = svd::nullspace_basis(&shifted, 1e-10).expect("kernel");
        assert_eq!(range.cols(), kernel.cols());
        let angle = qr::max_principal_angle(&range, &kernel);
        assert!(angle <= 1e-8, "range vs kernel angle {angle}");
    }

    #[test]
    fn cesaro_rate_is_inverse_in_m_for_the_scalar_fixture() {
        let op = diag_op(&[re(0.9), re(1.0)]);
        let p = CMat::from_fn(2, 2, |i, j| if i == 1 && j == 1 { re(1.0) } else { re(0.0) });
        for m in [4usize, 16, 64] {
            let s = cesaro_mean(&op, re(1.0), m).expect("mean").matrix;
            let gap = svd::spectral_norm(&s.sub(&p));
            let closed = (1.0 - 0.9f64.powi(m as i32 + 1)) / (0.1 * (m as f64 + 1.0));
            assert_near(gap, closed, 1e-10, "scalar geometric mean");
            assert!(
                (m as f64 + 1.0) * gap <= 10.0 + 1e-9,
                "rate constant exceeded at m = {m}: {}",
                (m as f64 + 1.0) * gap
            );
        }
    }

    #[test]
    fn projection_rejects_a_defective_unit_eigenvalue() {
        // A Jordan block at 1 is not power-bounded; a (false) recorded bound
        // gets it past construction, and the Cesàro means then diverge.
        let mat = CMat::from_fn(2, 2, |i, j| if j >= i { re(1.0) } else { re(0.0) });
        let op = Operator::new(mat, Some(64.0)).expect("claimed bound is trusted");
        match ergodic_projection(&op, re(1.0), 1e-3, 1 << 10) {
            Err(Error::ConvergenceFailed { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn kkm_ball_hull_spans_everything() {
        let op = diag_op(&[re(1.0), re(1.0)]);
        let root2 = re(2f64.sqrt());
        let k = Compactum::new(vec![
            linalg::vec_scale(&e(2, 0), root2),
            linalg::vec_scale(&e(2, 1), root2),
        ])
        .expect("compactum");
        let report = kkm_dimension_bound(&op, &k, 0.5, re(1.0), 8).expect("report");
        assert_eq!(report.dim_y, 2, "net of the ball spans the space");
        assert_eq!(report.kernel_dim, 2, "identity fixes everything");
        assert!(report.holds);
        assert!(report.witness.is_none(), "no direction is orthogonal to everything");
    }

    #[test]
    fn kkm_segment_bounds_a_simple_eigenvalue() {
        let op = diag_op(&[re(0.5), re(1.0)]);
        let k = Compactum::new(vec![e(2, 1)]).expect("compactum");
        let report = kkm_dimension_bound(&op, &k, 0.5, re(1.0), 8).expect("report");
        assert_eq!(report.dim_y, 1, "segment spans one dimension");
        assert_eq!(report.kernel_dim, 1);
        assert!(report.holds);
        let witness = report.witness.expect("a direction orthogonal to the segment exists");
        assert_eq!(witness.step, Some(1), "the orthogonal orbit contracts immediately");
        assert!(witness.distance <= 0.5 + 1e-9);
    }

    #[test]
    fn kkm_non_eigenvalue_bound_is_trivial() {
        let op = diag_op(&[re(0.5), re(1.0)]);
        let k = Compactum::new(vec![e(2, 1)]).expect("compactum");
        let report = kkm_dimension_bound(&op, &k, 0.5, C64::new(0.0, 1.0), 8).expect("report");
        assert_eq!(report.kernel_dim, 0);
        assert!(report.holds);
    }

    #[test]
    fn kkm_rejects_a_mesh_finer_than_the_sampling_budget() {
        let op = diag_op(&[re(1.0), re(1.0)]);
        let root2 = re(2f64.sqrt());
        let k = Compactum::new(vec![
            linalg::vec_scale(&e(2, 0), root2),
            linalg::vec_scale(&e(2, 1), root2),
        ])
        .expect("compactum");
        match kkm_dimension_bound(&op, &k, 0.999, re(1.0), 4) {
            Err(Error::NetTooLarge { cardinality, cap }) => {
                assert!(cardinality > cap, "reported growth {cardinality} over cap {cap}");
            }
            other => panic!("expected a net cardinality error, got {other:?}"),
        }
    }

    #[test]
    fn flattening_swap_needs_one_averaging_step() {
        let op = swap_op();
        let report =
            flattening_check(&op, re(1.0), 0.5, DEFAULT_FLATTEN_BOUND, 8, 16).expect("report");
        assert_eq!(report.m, Some(1), "S_1 equals the projection");
        assert!(report.value <= 1e-12, "flattened value {}", report.value);
        assert!(report.history.len() == 2, "m = 0 fails, m = 1 passes");
        assert!(report.history[0].1 > report.bound);
    }

    #[test]
    fn flattening_identity_needs_no_averaging() {
        let op = diag_op(&[re(1.0), re(1.0)]);
        let report =
            flattening_check(&op, re(1.0), 0.5, DEFAULT_FLATTEN_BOUND, 8, 16).expect("report");
        assert_eq!(report.m, Some(0));
        assert!(report.value <= 1e-12);
    }

    #[test]
    fn flattening_matches_the_scalar_closed_form() {
        // diag(0.9, 1): the tail value at averaging length m is
        // 0.9^{h/2} · (1 − 0.9^{m+1}) / (0.1 (m+1)), decreasing in m, so the
        // smallest passing m is computable by hand.
        let op = diag_op(&[re(0.9), re(1.0)]);
        let horizon = 8usize;
        let report = flattening_check(&op, re(1.0), 0.5, DEFAULT_FLATTEN_BOUND, horizon, 64)
            .expect("report");
        let closed = |m: usize| {
            0.9f64.powi(horizon as i32 / 2) * (1.0 - 0.9f64.powi(m as i32 + 1))
                / (0.1 * (m as f64 + 1.0))
        };
        let mut smallest = None;
        for m in 0..=64 {
            if closed(m) <= DEFAULT_FLATTEN_BOUND {
                smallest = Some(m);
                break;
            }
        }
        assert_eq!(report.m, smallest, "smallest flattening length");
        let m = report.m.expect("passes");
        assert_eq!(m, 16, "hand-computed fixture value");
        assert_near(report.value, closed(m), 1e-9, "closed-form tail value");
        let witness = report.witness.expect("witness direction");
        assert_eq!(witness.n, horizon / 2, "decaying block peaks at the window start");
        assert_near(witness.norm, report.value, 1e-9, "witness attains the value");
        // The witness must carry no component of the fixed line e2.
        assert!(witness.x[1].norm() <= 1e-8, "witness leaks into the eigenspace");
    }

    #[test]
    fn flattening_failure_reports_the_best_value() {
        let op = make_cyclic_shift(4).expect("cyclic shift");
        let report = flattening_check(&op, re(1.0), 0.5, DEFAULT_FLATTEN_BOUND, 8, 1)
            .expect("report");
        assert_eq!(report.m, None, "two candidates cannot flatten a 4-cycle");
        // At m = 1 the mean (I + T)/2 leaves the alternating eigenvalues at
        // magnitude |1 + i|/2 = √2/2, and powers of a unitary preserve it.
        assert_near(report.value, 0.5f64.sqrt(), 1e-8, "exact value at the cap");
        assert_eq!(report.history.len(), 2);
        let witness = report.witness.expect("maximizing direction");
        assert!(witness.norm >= DEFAULT_FLATTEN_BOUND, "witness certifies the failure");
    }

    #[test]
    fn asymptotic_report_contraction_fixture() {
        let op = diag_op(&[re(0.5), re(1.0)]);
        let k = Compactum::new(vec![e(2, 1)]).expect("compactum");
        let config = AsymptoticConfig {
            horizon: 32,
            sample_count: 8,
            sphere_samples: 8,
            m_cap: 64,
            seed: 5,
            ..AsymptoticConfig::default()
        };
        let summary = asymptotic_report(&op, &k, 0.5, &config).expect("summary");
        assert!(summary.stage_errors.is_empty(), "stages failed: {:?}", summary.stage_errors);
        assert_eq!(summary.codim, Some(1));
        assert!(summary.star.as_ref().expect("star ran").passes());
        assert_eq!(summary.no_slow_vectors, Some(false));
        assert_eq!(summary.peripheral.len(), 1);
        let finding = &summary.peripheral[0];
        assert!((finding.lambda - re(1.0)).norm() <= 1e-9);
        assert_eq!(finding.kernel_dim, 1);
        assert!(finding.kkm.as_ref().expect("kkm ran").holds);
        assert!(finding.flattening.as_ref().expect("flattening ran").passes());
        assert_eq!(finding.slow_dim, Some(1));
        assert_eq!(summary.max_slow_dim, Some(1));
        assert!(summary.consistent(), "verdicts: {:?}", summary.verdicts);
    }

    #[test]
    fn asymptotic_report_nilpotent_has_no_persistent_part() {
        let op = make_truncated_shift(8, ShiftDirection::Left).expect("shift");
        let k = Compactum::new(vec![linalg::vec_scale(&e(8, 0), re(0.01))]).expect("compactum");
        let config = AsymptoticConfig {
            horizon: 32,
            sample_count: 6,
            sphere_samples: 8,
            m_cap: 32,
            seed: 7,
            ..AsymptoticConfig::default()
        };
        let summary = asymptotic_report(&op, &k, 0.5, &config).expect("summary");
        assert_eq!(summary.codim, Some(0));
        assert_eq!(summary.no_slow_vectors, Some(true));
        assert!(summary.peripheral.is_empty());
        assert_eq!(summary.max_slow_dim, None);
        assert!(summary.star.as_ref().expect("star ran").passes(), "orbits die into the hull");
        assert!(summary.consistent(), "verdicts: {:?}", summary.verdicts);
    }

    #[test]
    fn asymptotic_report_rotation_with_a_small_hull() {
        let op = make_cyclic_shift(4).expect("cyclic shift");
        let k = Compactum::new(vec![linalg::vec_scale(&e(4, 0), re(0.01))]).expect("compactum");
        let config = AsymptoticConfig {
            horizon: 32,
            sample_count: 6,
            sphere_samples: 8,
            m_cap: 64,
            seed: 11,
            ..AsymptoticConfig::default()
        };
        let summary = asymptotic_report(&op, &k, 0.5, &config).expect("summary");
        // The tiny hull cannot attract unit orbits within the horizon: the
        // scan fails honestly, and the spectral stages still run.
        let star = summary.star.as_ref().expect("star ran");
        assert!(!star.passes(), "a radius-0.01 hull cannot attract unit orbits");
        assert_eq!(summary.codim, Some(4));
        assert_eq!(summary.peripheral.len(), 4, "four simple unit eigenvalues");
        for finding in &summary.peripheral {
            assert_eq!(finding.multiplicity, 1);
            assert_eq!(finding.kernel_dim, 1);
            // A hull this small carries a net of one point (the origin), so
            // the dimension bound degenerates to zero and cannot cover the
            // kernel: the report must say the bound fails rather than
            // manufacture a cover.
            let kkm = finding.kkm.as_ref().expect("kkm ran");
            assert!(!kkm.holds, "a radius-0.01 hull cannot cover the kernel");
            assert_eq!(kkm.dim_y, 0, "the greedy net collapses to the origin");
            let witness = kkm.witness.as_ref().expect("witness scanned");
            assert!(witness.step.is_none(), "shift orbits never approach a trivial span");
            assert!(finding.flattening.as_ref().expect("flattening ran").passes());
            assert_eq!(finding.slow_dim, Some(1));
        }
        assert_eq!(summary.no_slow_vectors, Some(false));
        // The dimension-bound verdict records the failure; the spectral
        // verdicts are unaffected.
        assert!(!summary.consistent(), "verdicts: {:?}", summary.verdicts);
        for verdict in &summary.verdicts {
            let expect = verdict.name != "kkm-kernel-bound";
            assert_eq!(
                verdict.holds, expect,
                "verdict {} expected {}, detail: {}",
                verdict.name, expect, verdict.detail
            );
        }
    }

    #[test]
    fn asymptotic_report_rejects_bad_alpha() {
        let op = swap_op();
        let k = Compactum::new(vec![e(2, 0)]).expect("compactum");
        match asymptotic_report(&op, &k, 1.5, &AsymptoticConfig::default()) {
            Err(Error::InvalidParameter { name: "alpha", .. }) => {}
            other => panic!("expected alpha rejection, got {other:?}"),
        }
    }
}
