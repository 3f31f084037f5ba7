//! Attracting compacta: balanced convex hulls, distances to them, and the
//! orbit-attraction condition they induce.
//!
//! A compactum is represented exactly as the balanced convex hull of finitely
//! many generators, `{Σ cᵢ gᵢ : Σ |cᵢ| ≤ 1}`, so the distance from a point to
//! the (scaled) hull is a small convex program over complex coefficients.
//! [`hull_distance`] solves it with accelerated projected-gradient iterations
//! on the coefficients, certified by the conditional-gradient dual gap: the
//! gap compares the current point against the best phase-aligned
//! single-generator atom, so it bounds the squared-distance error regardless
//! of how the iterates were produced.
//!
//! The attraction condition asks every unit orbit to dip within `α < 1` of
//! the hull infinitely often; [`check_star_condition`] scans finite orbit
//! prefixes, so a pass is sound evidence while a fail is only
//! horizon-limited.  [`greedy_decompose`] turns attraction into structure: it
//! peels a unit vector into hull points with geometrically shrinking budgets,
//! leaving a residual below `αᵏ` after `k` steps.  [`build_attractor_hull`]
//! assembles the enlarged hull swept out by the operator, and
//! [`verify_attraction`] confirms that orbits actually land near it.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2, C64, CMat};
use crate::math;
use crate::operators::Operator;
use crate::rng::SeedStream;

/// Dual-gap threshold certifying a hull projection (units of squared
/// distance).
pub const GAP_TOL: f64 = 1e-9;
/// Projection-solver iteration cap; hitting it flags a degenerate
/// generator set.
pub const MAX_HULL_ITERS: usize = 10_000;
/// Absolute slack accepted on greedy step targets, covering solver tolerance.
const STEP_SLACK: f64 = 1e-9;
/// Generators closer than this (coordinate-wise) collapse to one when
/// assembling swept hulls.
const DEDUP_TOL: f64 = 1e-12;

/// A balanced convex hull described by its generators: the represented set
/// is `{Σ cᵢ gᵢ : Σ |cᵢ| ≤ 1}`.
///
/// Balance (closure under multiplication by unit scalars) is automatic
/// because the coefficients are complex.
#[derive(Clone, Debug)]
pub struct Compactum {
    generators: Vec<Vec<C64>>,
}

impl Compactum {
    /// Validate and wrap a generator list: nonempty, one common nonzero
    /// dimension, all entries finite.
    pub fn new(generators: Vec<Vec<C64>>) -> Result<Compactum> {
        let first = match generators.first() {
            None => {
                return Err(Error::InvalidParameter {
                    name: "generators",
                    value: 0.0,
                    requirement: "at least one generator",
                })
            }
            Some(g) => g.len(),
        };
        if first == 0 {
            return Err(Error::EmptyDimension);
        }
        for g in &generators {
            if g.len() != first {
                return Err(Error::DimensionMismatch { expected: first, got: g.len() });
            }
            if !linalg::vec_is_finite(g) {
                return Err(Error::NonFiniteEntry);
            }
        }
        Ok(Compactum { generators })
    }

    /// The generator list.
    pub fn generators(&self) -> &[Vec<C64>] {
        &self.generators
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    /// Number of generators.
    pub fn count(&self) -> usize {
        self.generators.len()
    }

    /// Largest generator norm: the hull's radius bound.
    pub fn max_generator_norm(&self) -> f64 {
        self.generators.iter().fold(0.0f64, |a, g| a.max(norm2(g)))
    }

    /// Generators as the columns of a matrix.
    fn matrix(&self) -> CMat {
        let mut m = CMat::zeros(self.dim(), self.count());
        for (j, g) in self.generators.iter().enumerate() {
            m.set_col(j, g);
        }
        m
    }
}

/// A solved hull projection: the distance, the attaining coefficients, and
/// the solver's certificate.
#[derive(Clone, Debug)]
pub struct HullProjection {
    /// `min ‖x − Σ cᵢ gᵢ‖` over `Σ|cᵢ| ≤ scale`.
    pub distance: f64,
    /// Coefficients attaining the distance (within the dual gap).
    pub coeffs: Vec<C64>,
    /// Solver iterations spent.
    pub iterations: usize,
    /// Final dual gap, in squared-distance units.
    pub dual_gap: f64,
}

/// Distance from `x` to the hull of `k` scaled by `scale`.
///
/// The convex program `min ‖x − Gc‖²` over `Σ|cᵢ| ≤ scale` is solved by
/// projected-gradient iterations with momentum: a gradient step of length
/// `1/‖G‖²` on the coefficients, a projection back onto the complex ℓ¹
/// ball (soft-thresholding the magnitudes at the simplex-projection
/// threshold), and momentum that resets whenever the objective rises.
/// Every iterate is scored by the dual gap against the best phase-aligned
/// single-generator atom, which bounds the squared-distance error of a
/// feasible point from above; iterations stop once the gap certifies the
/// squared distance within [`GAP_TOL`], and exceeding [`MAX_HULL_ITERS`] is
/// an error carrying the last gap.
pub fn hull_distance(x: &[C64], k: &Compactum, scale: f64) -> Result<HullProjection> {
    if x.len() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: x.len() });
    }
    if !linalg::vec_is_finite(x) {
        return Err(Error::NonFiniteEntry);
    }
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "scale",
            value: scale,
            requirement: "finite and nonnegative",
        });
    }
    let g = k.count();
    if scale == 0.0 {
        return Ok(HullProjection {
            distance: norm2(x),
            coeffs: vec![C64::new(0.0, 0.0); g],
            iterations: 0,
            dual_gap: 0.0,
        });
    }

    let gens = k.generators();
    let hull_point = |c: &[C64]| -> Vec<C64> {
        let mut p = vec![C64::new(0.0, 0.0); x.len()];
        for (j, gen) in gens.iter().enumerate() {
            if c[j].norm() > 0.0 {
                linalg::axpy(c[j], gen, &mut p);
            }
        }
        p
    };
    let alignments = |r: &[C64]| -> Vec<C64> { gens.iter().map(|gen| dot(gen, r)).collect() };

    // Stepsize from the generator matrix norm (the gradient of the squared
    // residual is 2·GᴴG-Lipschitz in the coefficients).
    let gnorm = crate::linalg::svd::spectral_norm(&k.matrix());
    if gnorm == 0.0 {
        // Every generator vanishes: the hull is {0} at any scale.
        return Ok(HullProjection {
            distance: norm2(x),
            coeffs: vec![C64::new(0.0, 0.0); g],
            iterations: 0,
            dual_gap: 0.0,
        });
    }
    let step = 1.0 / (gnorm * gnorm);

    let mut coeffs = vec![C64::new(0.0, 0.0); g];
    let mut prev = coeffs.clone();
    // Momentum carrier (may leave the feasible set; iterates never do).
    let mut carrier = coeffs.clone();
    let mut momentum = 1.0f64;
    let mut f_prev = {
        let n = norm2(x);
        n * n
    };
    let mut gap = f64::INFINITY;
    let mut iterations = 0usize;

    for iter in 1..=MAX_HULL_ITERS {
        iterations = iter;
        // Gradient step at the carrier, projected onto the budget.
        let residual_y = linalg::vec_sub(x, &hull_point(&carrier));
        let pull = alignments(&residual_y);
        let mut next = carrier.clone();
        for (nj, uj) in next.iter_mut().zip(&pull) {
            *nj += uj * step;
        }
        project_l1_ball(&mut next, scale);

        // Certificate at the feasible iterate.
        let residual = linalg::vec_sub(x, &hull_point(&next));
        let u = alignments(&residual);
        let f_val = {
            let n = norm2(&residual);
            n * n
        };
        let u_max = u.iter().fold(0.0f64, |a, uj| a.max(uj.norm()));
        let lin_c: f64 = u.iter().zip(&next).map(|(uj, cj)| (uj.conj() * cj).re).sum();
        gap = 2.0 * (scale * u_max - lin_c);
        if gap <= GAP_TOL {
            coeffs = next;
            break;
        }

        // Momentum update, reset on an objective increase.
        if f_val > f_prev {
            momentum = 1.0;
            carrier = next.clone();
        } else {
            let m_next = 0.5 * (1.0 + math::sqrt(1.0 + 4.0 * momentum * momentum));
            let beta = (momentum - 1.0) / m_next;
            carrier = next.clone();
            for (cj, (nj, pj)) in carrier.iter_mut().zip(next.iter().zip(&prev)) {
                *cj += (nj - pj) * beta;
            }
            momentum = m_next;
        }
        prev = core::mem::replace(&mut coeffs, next);
        f_prev = f_val;
    }

    if gap > GAP_TOL {
        return Err(Error::ConvergenceFailed { routine: "hull distance", residual: gap });
    }
    // Fresh recompute of the attained distance from the coefficients.
    let distance = norm2(&linalg::vec_sub(x, &hull_point(&coeffs)));
    Ok(HullProjection { distance, coeffs, iterations, dual_gap: gap })
}

/// Project coefficients onto `{c : Σ|cᵢ| ≤ radius}`: magnitudes undergo the
/// simplex projection (soft-threshold at the level that makes them sum to
/// `radius`), phases are preserved.
fn project_l1_ball(c: &mut [C64], radius: f64) {
    let mags: Vec<f64> = c.iter().map(|z| z.norm()).collect();
    let total: f64 = mags.iter().sum();
    if total <= radius {
        return;
    }
    let mut sorted = mags.clone();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0f64;
    let mut threshold = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        cum += v;
        let candidate = (cum - radius) / (i as f64 + 1.0);
        if v > candidate {
            threshold = candidate;
        } else {
            break;
        }
    }
    for (z, &m) in c.iter_mut().zip(&mags) {
        if m <= threshold {
            *z = C64::new(0.0, 0.0);
        } else {
            *z *= (m - threshold) / m;
        }
    }
}

/// Cheap lower bounds on the distance from `y` to the scaled hull, used to
/// skip full solves that provably cannot matter.
struct DistanceScreen {
    /// Orthonormal basis of the generators' span (possibly zero columns).
    span: CMat,
    /// Largest generator norm.
    radius: f64,
}

impl DistanceScreen {
    fn new(k: &Compactum) -> Result<DistanceScreen> {
        let span = crate::linalg::svd::range_basis(&k.matrix(), 1e-12)?;
        Ok(DistanceScreen { span, radius: k.max_generator_norm() })
    }

    /// A value never exceeding the true hull distance at this scale.
    fn lower_bound(&self, y: &[C64], scale: f64) -> f64 {
        let reach = norm2(y) - scale * self.radius;
        if self.span.cols() == 0 {
            return norm2(y).max(reach);
        }
        let coords = self.span.adjoint_matvec(y);
        let mut off = y.to_vec();
        for (j, c) in coords.iter().enumerate() {
            let col = self.span.col(j);
            linalg::axpy(-*c, &col, &mut off);
        }
        norm2(&off).max(reach)
    }
}

/// One scanned orbit in an attraction report.
#[derive(Clone, Debug)]
pub struct AttractionSample {
    /// The unit starting vector.
    pub x: Vec<C64>,
    /// Orbit step attaining the smallest hull distance.
    pub best_n: usize,
    /// That smallest distance over the scanned horizon.
    pub best_distance: f64,
}

/// Evidence about the orbit-attraction condition for `(T, K, α)`.
///
/// A pass (every sampled orbit dips under `α`) is sound: the scanned minimum
/// upper-bounds the limit infimum.  A fail is only horizon-limited — the
/// orbit might dip later — and must never be read as a refutation.
#[derive(Clone, Debug)]
pub struct AttractionReport {
    /// The attraction threshold.
    pub alpha: f64,
    /// Orbit steps scanned per sample.
    pub horizon: usize,
    /// Per-sample outcomes.
    pub samples: Vec<AttractionSample>,
    /// Fraction of samples whose best distance beat `alpha`.
    pub pass_fraction: f64,
}

impl AttractionReport {
    /// Whether every sampled orbit passed.
    pub fn passes(&self) -> bool {
        self.pass_fraction >= 1.0
    }

    /// Samples that did not dip under `alpha` within the horizon
    /// (inconclusive, not refuting).
    pub fn horizon_limited(&self) -> usize {
        self.samples.iter().filter(|s| s.best_distance >= self.alpha).count()
    }
}

/// Scan seeded unit orbits for their closest approach to the hull.
///
/// For each sample the reported `best_distance` is the exact minimum of the
/// hull distance over `n = 0, …, horizon`; solves that provably cannot lower
/// the running minimum are skipped via lower bounds, which leaves the
/// minimum intact.
pub fn check_star_condition(
    op: &Operator,
    k: &Compactum,
    alpha: f64,
    sample_count: usize,
    horizon: usize,
    seed: u64,
) -> Result<AttractionReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "strictly between 0 and 1",
        });
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_count",
            value: 0.0,
            requirement: "at least 1",
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
    let screen = DistanceScreen::new(k)?;
    let mut stream = SeedStream::salted(seed, 0x57a2);
    let mut samples = Vec::with_capacity(sample_count);
    let mut passed = 0usize;
    for _ in 0..sample_count {
        let x = stream.unit_vector(op.dim());
        let mut y = x.clone();
        let mut best = f64::INFINITY;
        let mut best_n = 0usize;
        for n in 0..=horizon {
            if screen.lower_bound(&y, 1.0) < best {
                let proj = hull_distance(&y, k, 1.0)?;
                if proj.distance < best {
                    best = proj.distance;
                    best_n = n;
                }
            }
            if n < horizon {
                y = op.apply(&y);
            }
        }
        if best < alpha {
            passed += 1;
        }
        samples.push(AttractionSample { x, best_n, best_distance: best });
    }
    let pass_fraction = passed as f64 / sample_count as f64;
    Ok(AttractionReport { alpha, horizon, samples, pass_fraction })
}

/// One peeled layer of a greedy decomposition.
#[derive(Clone, Debug)]
pub struct GreedyStep {
    /// Mass of the hull point: the nearest point is `t·a` with `a` in the
    /// hull; `|t| ≤ α^{i−1}` at step `i`.
    pub t: C64,
    /// Unit-budget hull point (zero when the step needed no mass).
    pub a: Vec<C64>,
    /// Orbit steps applied before peeling.
    pub n: usize,
}

/// A resolved greedy decomposition: after `k` steps the residual norm is at
/// most `αᵏ`, and replaying the steps reconstructs the orbit point.
#[derive(Clone, Debug)]
pub struct GreedyDecomposition {
    /// The peeled layers, in order.
    pub steps: Vec<GreedyStep>,
    /// Suffix sums `m_j = n_j + … + n_k` of the step counts.
    pub m_values: Vec<usize>,
    /// Residual norms after each step; the `i`-th is at most `αⁱ`.
    pub residual_norms: Vec<f64>,
    /// The contraction ratio.
    pub alpha: f64,
}

/// Peel a unit vector into hull points with geometrically shrinking budgets.
///
/// Step `i` pushes the current residual forward until its distance to the
/// hull at scale `α^{i−1}` drops to `αⁱ`, subtracts the nearest hull point,
/// and keeps the difference as the next residual.  The first qualifying
/// orbit step is taken, which keeps decompositions deterministic.  A step
/// that never qualifies within the horizon aborts with the best distance it
/// saw — evidence that attraction fails at this `α`.
pub fn greedy_decompose(
    op: &Operator,
    k: &Compactum,
    alpha: f64,
    x: &[C64],
    steps: usize,
    horizon: usize,
) -> Result<GreedyDecomposition> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "strictly between 0 and 1",
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: x.len() });
    }
    if k.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: k.dim() });
    }
    let nx = norm2(x);
    if math::abs(nx - 1.0) > 1e-9 {
        return Err(Error::NotNormalized { norm: nx });
    }

    let screen = DistanceScreen::new(k)?;
    let gmat = k.matrix();
    let mut residual = x.to_vec();
    let mut layers: Vec<GreedyStep> = Vec::with_capacity(steps);
    let mut residual_norms = Vec::with_capacity(steps);
    for i in 1..=steps {
        let scale = math::powi(alpha, (i - 1) as u32);
        let target = math::powi(alpha, i as u32) + STEP_SLACK;
        let mut y = residual.clone();
        let mut best_solved = f64::INFINITY;
        let mut best_bound = f64::INFINITY;
        let mut resolved = false;
        for n in 1..=horizon {
            y = op.apply(&y);
            let bound = screen.lower_bound(&y, scale);
            if bound > target {
                best_bound = best_bound.min(bound);
                continue;
            }
            let proj = hull_distance(&y, k, scale)?;
            best_solved = best_solved.min(proj.distance);
            if proj.distance <= target {
                let nearest = gmat.matvec(&proj.coeffs);
                let mass: f64 = proj.coeffs.iter().map(|c| c.norm()).sum();
                let a = if mass > 1e-300 {
                    linalg::vec_scale(&nearest, C64::new(1.0 / mass, 0.0))
                } else {
                    vec![C64::new(0.0, 0.0); op.dim()]
                };
                residual = linalg::vec_sub(&y, &nearest);
                residual_norms.push(norm2(&residual));
                layers.push(GreedyStep { t: C64::new(mass, 0.0), a, n });
                resolved = true;
                break;
            }
        }
        if !resolved {
            let best_distance =
                if best_solved.is_finite() { best_solved } else { best_bound };
            return Err(Error::StepUnattainable { step: i, scanned: horizon, best_distance });
        }
    }
    let mut m_values = vec![0usize; layers.len()];
    let mut suffix = 0usize;
    for j in (0..layers.len()).rev() {
        suffix += layers[j].n;
        m_values[j] = suffix;
    }
    Ok(GreedyDecomposition { steps: layers, m_values, residual_norms, alpha })
}

/// The hull swept out by the operator: generators `{h·Tⁱg}` for `i` up to
/// `depth`, with `h = 1/(1−α)`, deduplicated coordinate-wise.
pub fn build_attractor_hull(
    op: &Operator,
    k: &Compactum,
    alpha: f64,
    depth: usize,
) -> Result<Compactum> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            requirement: "strictly between 0 and 1",
        });
    }
    if k.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: k.dim() });
    }
    let h = 1.0 / (1.0 - alpha);
    let mut swept: Vec<Vec<C64>> = Vec::new();
    let mut current: Vec<Vec<C64>> = k.generators().to_vec();
    for depth_step in 0..=depth {
        for g in &current {
            let candidate = linalg::vec_scale(g, C64::new(h, 0.0));
            let duplicate = swept.iter().any(|existing| {
                existing
                    .iter()
                    .zip(&candidate)
                    .all(|(a, b)| (a - b).norm() <= DEDUP_TOL)
            });
            if !duplicate {
                swept.push(candidate);
            }
        }
        if depth_step < depth {
            for g in current.iter_mut() {
                *g = op.apply(g);
            }
        }
    }
    Compactum::new(swept)
}

/// One sampled orbit in an attraction verification.
#[derive(Clone, Debug)]
pub struct AttractionOutcome {
    /// The unit starting vector.
    pub x: Vec<C64>,
    /// Whether some scanned step got within the requested distance.
    pub attained: bool,
    /// The achieving step, when attained.
    pub n: Option<usize>,
    /// The achieving distance; on failure, the closest measured distance
    /// (or a certified lower bound when every step was screened out).
    pub distance: f64,
}

/// Outcome of [`verify_attraction`] over all samples.
#[derive(Clone, Debug)]
pub struct AttractionVerification {
    /// Distance every orbit had to reach.
    pub epsilon: f64,
    /// Orbit steps scanned per sample.
    pub horizon: usize,
    /// Per-sample outcomes.
    pub samples: Vec<AttractionOutcome>,
}

impl AttractionVerification {
    /// Whether every sampled orbit got close enough.
    pub fn all_attained(&self) -> bool {
        self.samples.iter().all(|s| s.attained)
    }
}

/// Check that seeded unit orbits approach the hull within `epsilon`.
///
/// Each sample scans `n = 0, …, horizon` and stops at the first step whose
/// hull distance (at unit scale) falls under `epsilon`.  Failures are
/// horizon-limited, never refutations.
pub fn verify_attraction(
    op: &Operator,
    k_hat: &Compactum,
    epsilon: f64,
    sample_count: usize,
    horizon: usize,
    seed: u64,
) -> Result<AttractionVerification> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            requirement: "strictly positive",
        });
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter {
            name: "sample_count",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    if k_hat.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), got: k_hat.dim() });
    }
    let screen = DistanceScreen::new(k_hat)?;
    let mut stream = SeedStream::salted(seed, 0xa77a);
    let mut samples = Vec::with_capacity(sample_count);
    for _ in 0..sample_count {
        let x = stream.unit_vector(op.dim());
        let outcome = attraction_scan(op, k_hat, &screen, &x, epsilon, horizon)?;
        samples.push(outcome);
    }
    Ok(AttractionVerification { epsilon, horizon, samples })
}

/// Scan one orbit for its first approach within `epsilon` of the hull.
fn attraction_scan(
    op: &Operator,
    k_hat: &Compactum,
    screen: &DistanceScreen,
    x: &[C64],
    epsilon: f64,
    horizon: usize,
) -> Result<AttractionOutcome> {
    let mut y = x.to_vec();
    let mut best_solved = f64::INFINITY;
    let mut best_bound = f64::INFINITY;
    for n in 0..=horizon {
        let bound = screen.lower_bound(&y, 1.0);
        if bound < epsilon {
            let proj = hull_distance(&y, k_hat, 1.0)?;
            if proj.distance < epsilon {
                return Ok(AttractionOutcome {
                    x: x.to_vec(),
                    attained: true,
                    n: Some(n),
                    distance: proj.distance,
                });
            }
            best_solved = best_solved.min(proj.distance);
        } else {
            best_bound = best_bound.min(bound);
        }
        if n < horizon {
            y = op.apply(&y);
        }
    }
    let distance = if best_solved.is_finite() { best_solved } else { best_bound };
    Ok(AttractionOutcome { x: x.to_vec(), attained: false, n: None, distance })
}
