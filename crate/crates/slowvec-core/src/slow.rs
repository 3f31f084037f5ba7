//! Slow vectors: almost-eigenvectors whose orbits refuse to lose mass.
//!
//! A unit vector `x` is ε-slow for a unit-modulus `λ` when `‖Tx − λx‖ < ε`
//! and `‖Tⁿx‖ > 1 − ε` for every `n` up to the certification horizon, all in
//! a declared gauge.  [`certify_slow`] checks the two inequalities and either
//! issues a [`SlowCertificate`] or reports exactly where they break.
//!
//! [`synthesize_slow`] manufactures such a vector whenever the stable
//! subspace has positive codimension: it takes an almost-eigenvector of the
//! quotient operator (where the limit gauge is preserved), lifts it back to
//! the full space, and pushes it forward by powers of the operator until the
//! decaying component has died off enough for the sup-gauge certificate to
//! close.  When the stable subspace is everything, no such vector exists and
//! the synthesis says so.  [`slow_subspace`] runs the same forward transport
//! for an entire eigenvalue cluster at a common step count, certifying a
//! seeded sample of the span's unit sphere.  [`cesaro_fixed_check`] verifies
//! that averaging the orbit of a certified vector barely moves it — the
//! bridge between slow vectors and fixed points of the averaged operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, schur, svd, C64, CMat};
use crate::math;
use crate::norms::{sliding_window_max, sliding_window_min, NormContext, NormKind, StableSplit};
use crate::operators;

/// Allowed deviation of `|λ|` from 1 when hunting almost-eigenvectors.
const CIRCLE_TOL_STRICT: f64 = 1e-12;
/// Allowed deviation of `|λ|` from 1 when certifying; synthesized eigenvalues
/// carry the looser peripheral classification tolerance.
const CIRCLE_TOL: f64 = 1e-6;
/// Normalization gate on certification inputs.
const UNIT_TOL: f64 = 1e-9;
/// Quotient eigenvalues closer than this to a requested `λ` count towards
/// its multiplicity.
const ANGLE_TOL: f64 = 1e-6;
/// Relative safety margin between the fast screening pass and the fresh
/// certification recompute, so accepted candidates survive roundoff.
const SCREEN_MARGIN: f64 = 1e-9;
/// Forward-step budget for synthesis, as a multiple of the settled limit
/// horizon: decay certified by the horizon machinery is decayed enough here.
const K_CAP_FACTOR: usize = 4;
/// How many screened candidate steps get the full recompute before the scan
/// gives up; screens are conservative, so one is almost always enough.
const CANDIDATE_CAP: usize = 16;

/// A norm-one almost-eigenvector together with its re-scored residual.
#[derive(Clone, Debug)]
pub struct EpsEigenvector {
    /// The targeted unit-modulus eigenvalue.
    pub lambda: C64,
    /// The candidate vector, unit in `norm_kind`.
    pub x: Vec<C64>,
    /// `‖Tx − λx‖` in `norm_kind` for the normalized `x`.
    pub residual: f64,
    /// Gauge in which `x` is normalized and `residual` measured.
    pub norm_kind: NormKind,
}

/// Best almost-eigenvector for `lambda`: the right singular vector of
/// `T − λI` at the smallest singular value, found in the Euclidean gauge,
/// then renormalized and re-scored in `kind`.
///
/// The residual can be large when `λ` is far from the spectrum; that is an
/// answer, not an error.  The only failure modes are an off-circle `λ` and a
/// candidate invisible to the requested gauge (a limit-gauge evaluation of a
/// vector that decays to zero cannot be normalized).
pub fn eps_eigenvector(ctx: &NormContext, lambda: C64, kind: NormKind) -> Result<EpsEigenvector> {
    let modulus = lambda.norm();
    if math::abs(modulus - 1.0) > CIRCLE_TOL_STRICT {
        return Err(Error::OffCircleEigenvalue { lambda, modulus });
    }
    let op = ctx.operator();
    let mut shifted = op.matrix().clone();
    for i in 0..op.dim() {
        *shifted.at_mut(i, i) -= lambda;
    }
    let (_, euclid_unit) = svd::smallest_singular(&shifted)?;
    let scale = ctx.norm(kind, &euclid_unit)?;
    if scale < 1e-12 {
        return Err(Error::NotNormalized { norm: scale });
    }
    let x = linalg::vec_scale(&euclid_unit, C64::new(1.0 / scale, 0.0));
    let residual = residual_norm(ctx, &x, lambda, kind)?;
    Ok(EpsEigenvector { lambda, x, residual, norm_kind: kind })
}

/// `‖Tx − λx‖` in the requested gauge.
fn residual_norm(ctx: &NormContext, x: &[C64], lambda: C64, kind: NormKind) -> Result<f64> {
    let tx = ctx.operator().apply(x);
    let r: Vec<C64> = tx.iter().zip(x).map(|(&t, &v)| t - lambda * v).collect();
    ctx.norm(kind, &r)
}

/// Proof that a vector is ε-slow: both defining inequalities, measured.
#[derive(Clone, Debug)]
pub struct SlowCertificate {
    /// The unit-modulus eigenvalue the vector almost satisfies.
    pub lambda: C64,
    /// The certified vector, unit in `norm_kind`.
    pub x: Vec<C64>,
    /// The slowness budget; both measured quantities beat it.
    pub epsilon: f64,
    /// Number of orbit steps checked.
    pub horizon: usize,
    /// `min` over `0 ≤ n ≤ horizon` of `‖Tⁿx‖` in `norm_kind`; exceeds
    /// `1 − epsilon`.
    pub min_orbit_norm: f64,
    /// `‖Tx − λx‖` in `norm_kind`; stays below `epsilon`.
    pub eigen_residual: f64,
    /// Gauge of every measurement above.
    pub norm_kind: NormKind,
    /// Forward applications of the operator performed before the certified
    /// vector was reached; zero for direct certifications.
    pub forward_steps: usize,
}

/// Why certification failed: the residual alone, or the first orbit step
/// whose norm dropped to `1 − ε` or below.
#[derive(Clone, Debug)]
pub struct SlowRefusal {
    /// `‖Tx − λx‖` in the requested gauge.
    pub eigen_residual: f64,
    /// First failing orbit step, when the residual itself was fine.
    pub failing_n: Option<usize>,
    /// Orbit norm at that step.
    pub orbit_norm_at_failure: Option<f64>,
}

/// Outcome of [`certify_slow`]; a refusal is an answer, not an error.
#[derive(Clone, Debug)]
pub enum Certification {
    /// Both inequalities held over the whole horizon.
    Certified(SlowCertificate),
    /// One of them broke; the refusal says which and where.
    Refused(SlowRefusal),
}

impl Certification {
    /// The certificate, when one was issued.
    pub fn certificate(&self) -> Option<&SlowCertificate> {
        match self {
            Certification::Certified(cert) => Some(cert),
            Certification::Refused(_) => None,
        }
    }

    /// Whether certification succeeded.
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }
}

/// Check the ε-slow inequalities for `x` over `horizon` steps in `kind`.
///
/// `x` must be unit in `kind` (within `1e-9`) and `λ` on the unit circle.
/// Certifies iff `‖Tx − λx‖ < ε` and `‖Tⁿx‖ > 1 − ε` for all
/// `0 ≤ n ≤ horizon`; otherwise reports the residual or the first failing
/// step.
pub fn certify_slow(
    ctx: &NormContext,
    x: &[C64],
    lambda: C64,
    epsilon: f64,
    horizon: usize,
    kind: NormKind,
) -> Result<Certification> {
    let modulus = lambda.norm();
    if math::abs(modulus - 1.0) > CIRCLE_TOL {
        return Err(Error::OffCircleEigenvalue { lambda, modulus });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
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
    let scale = ctx.norm(kind, x)?;
    if math::abs(scale - 1.0) > UNIT_TOL {
        return Err(Error::NotNormalized { norm: scale });
    }
    let eigen_residual = residual_norm(ctx, x, lambda, kind)?;
    if !(eigen_residual < epsilon) {
        return Ok(Certification::Refused(SlowRefusal {
            eigen_residual,
            failing_n: None,
            orbit_norm_at_failure: None,
        }));
    }
    let profile = ctx.orbit_profile(x, kind, horizon)?;
    let mut min_orbit_norm = f64::INFINITY;
    for (n, &value) in profile.iter().enumerate() {
        if value <= 1.0 - epsilon {
            return Ok(Certification::Refused(SlowRefusal {
                eigen_residual,
                failing_n: Some(n),
                orbit_norm_at_failure: Some(value),
            }));
        }
        min_orbit_norm = min_orbit_norm.min(value);
    }
    Ok(Certification::Certified(SlowCertificate {
        lambda,
        x: x.to_vec(),
        epsilon,
        horizon,
        min_orbit_norm,
        eigen_residual,
        norm_kind: kind,
        forward_steps: 0,
    }))
}

/// Sup-gauge profiles of a candidate and its eigen-residual along the whole
/// forward scan, from just two orbits and three monotone-deque passes, so
/// every candidate step is tested in constant time.
struct SupScreen {
    /// Sup-gauge norm of `Tʲx` for `j = 0, …, k_cap + horizon`.
    sup: Vec<f64>,
    /// Sup-gauge norm of `Tᵏr`, `r = Tx − λx`, for `k = 0, …, k_cap`.
    resid: Vec<f64>,
    /// `min` of `sup[k ..= k + horizon]` for `k = 0, …, k_cap`: the lowest
    /// the orbit of `Tᵏx` gets over the certification horizon.
    floor: Vec<f64>,
}

impl SupScreen {
    fn build(ctx: &NormContext, x: &[C64], lambda: C64, k_cap: usize) -> Result<SupScreen> {
        let op = ctx.operator();
        let h = ctx.horizon_sup();
        let master_x = operators::orbit(op, x, k_cap + 2 * h, false)?.norms;
        let tx = op.apply(x);
        let r: Vec<C64> = tx.iter().zip(x).map(|(&t, &v)| t - lambda * v).collect();
        let master_r = operators::orbit(op, &r, k_cap + h, false)?.norms;
        let sup = sliding_window_max(&master_x, h + 1);
        let floor = sliding_window_min(&sup, h + 1);
        let resid = sliding_window_max(&master_r, h + 1);
        Ok(SupScreen { sup, resid, floor })
    }

    /// Residual relative to the candidate's own sup norm, i.e. the residual
    /// the normalized vector would score.
    fn relative_residual(&self, k: usize) -> Option<f64> {
        let s = self.sup[k];
        if s > 0.0 {
            Some(self.resid[k] / s)
        } else {
            None
        }
    }

    /// Conservative candidate test: certification of the normalized `Tᵏx`
    /// will succeed at `ε`, with a margin covering recompute roundoff.
    fn passes(&self, k: usize, epsilon: f64) -> bool {
        let s = self.sup[k];
        s > 0.0
            && self.resid[k] <= epsilon * s * (1.0 - SCREEN_MARGIN)
            && self.floor[k] >= (1.0 - epsilon) * s * (1.0 + SCREEN_MARGIN)
    }
}

/// Apply the operator `k` times and normalize the result in `kind`.
fn forward_vector(ctx: &NormContext, x: &[C64], k: usize, kind: NormKind) -> Result<Vec<C64>> {
    let op = ctx.operator();
    let mut y = x.to_vec();
    for _ in 0..k {
        y = op.apply(&y);
    }
    let scale = ctx.norm(kind, &y)?;
    if scale < 1e-300 {
        return Err(Error::ConvergenceFailed { routine: "forward normalization", residual: scale });
    }
    Ok(linalg::vec_scale(&y, C64::new(1.0 / scale, 0.0)))
}

/// Argument of `z` folded into `[0, 2π)`, with values a hair below the wrap
/// snapped to zero so cluster ordering is stable at the branch cut.
fn principal_arg(z: C64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let mut a = math::atan2(z.im, z.re);
    if a < 0.0 {
        a += two_pi;
    }
    if two_pi - a < 1e-9 {
        a = 0.0;
    }
    a
}

/// A group of unit-modulus eigenvalues treated as one, with its multiplicity.
#[derive(Clone, Copy, Debug)]
pub struct PeripheralCluster {
    /// Cluster mean, pushed back onto the unit circle.
    pub rep: C64,
    /// Number of eigenvalues in the cluster.
    pub count: usize,
}

/// Group unit-modulus eigenvalues into clusters of diameter about
/// [`ANGLE_TOL`], returned in order of increasing argument in `[0, 2π)`.
pub fn peripheral_clusters(eigvals: &[C64]) -> Vec<PeripheralCluster> {
    if eigvals.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..eigvals.len()).collect();
    order.sort_by(|&a, &b| {
        principal_arg(eigvals[a]).partial_cmp(&principal_arg(eigvals[b])).expect("finite args")
    });
    // Chain neighbours along the circle into clusters, then stitch the ends
    // together if the list wraps across arg = 0.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(members)
                if (eigvals[i] - eigvals[*members.last().expect("nonempty cluster")]).norm()
                    <= ANGLE_TOL =>
            {
                members.push(i);
            }
            _ => clusters.push(vec![i]),
        }
    }
    if clusters.len() >= 2 {
        let head = clusters[0][0];
        let tail = *clusters.last().expect("nonempty").last().expect("nonempty cluster");
        if (eigvals[head] - eigvals[tail]).norm() <= ANGLE_TOL {
            let last = clusters.pop().expect("nonempty");
            clusters[0].extend(last);
        }
    }
    clusters
        .iter()
        .filter_map(|members| {
            let mut mean = C64::new(0.0, 0.0);
            for &i in members {
                mean += eigvals[i];
            }
            let mean = mean / members.len() as f64;
            let m = mean.norm();
            // A cluster whose members cancel out cannot sit on the circle;
            // unreachable at diameter 1e-6 but kept as a guard.
            if m < 1e-9 {
                return None;
            }
            Some(PeripheralCluster { rep: mean / m, count: members.len() })
        })
        .collect()
}

/// The eigenvalue synthesized certificates aim at: the unit-modulus cluster
/// of largest multiplicity, ties broken by smallest argument in `[0, 2π)`,
/// represented by its mean pushed back onto the circle.
pub fn dominant_peripheral_eigenvalue(eigvals: &[C64]) -> Option<C64> {
    let clusters = peripheral_clusters(eigvals);
    // The list is sorted by argument, so on equal counts the first (smallest
    // argument) wins.
    let mut best: Option<PeripheralCluster> = None;
    for cluster in clusters {
        let better = match &best {
            None => true,
            Some(b) => cluster.count > b.count,
        };
        if better {
            best = Some(cluster);
        }
    }
    best.map(|c| c.rep)
}

/// Manufacture an ε-slow vector, or prove there is none.
///
/// Requires `split.codim ≥ 1`; when the stable subspace is the whole space
/// every orbit decays and the synthesis refuses with
/// [`Error::NoSlowVectors`].  Otherwise: pick the dominant peripheral
/// eigenvalue `λ` of the quotient, take the quotient's best
/// almost-eigenvector at `λ` (its residual must fit an `ε/2` budget in the
/// limit gauge, which it does up to roundoff because `λ` is an exact
/// eigenvalue of the quotient), lift it through the complement basis,
/// normalize in the limit gauge, and scan forward steps `k = 0, 1, 2, …`
/// until the sup-gauge certificate for the normalized `Tᵏx₀` closes at `ε`.
/// The certificate records `k` in `forward_steps`.
pub fn synthesize_slow(
    ctx: &NormContext,
    split: &StableSplit,
    epsilon: f64,
) -> Result<SlowCertificate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            requirement: "strictly between 0 and 1",
        });
    }
    if split.x0_basis.rows() != ctx.operator().dim() {
        return Err(Error::DimensionMismatch {
            expected: ctx.operator().dim(),
            got: split.x0_basis.rows(),
        });
    }
    if split.codim == 0 {
        return Err(Error::NoSlowVectors);
    }
    let lambda = dominant_peripheral_eigenvalue(&split.peripheral_eigvals)
        .ok_or(Error::NoSlowVectors)?;

    // Quotient almost-eigenvector, lifted and normalized in the limit gauge.
    let mut shifted = split.quotient.clone();
    for i in 0..split.codim {
        *shifted.at_mut(i, i) -= lambda;
    }
    let (_, w) = svd::smallest_singular(&shifted)?;
    let lifted = split.lift(&w);
    let p_scale = ctx.norm(NormKind::QuotientP, &lifted)?;
    if p_scale < 1e-12 {
        return Err(Error::ConvergenceFailed {
            routine: "quotient lift normalization",
            residual: p_scale,
        });
    }
    let x0 = linalg::vec_scale(&lifted, C64::new(1.0 / p_scale, 0.0));
    let p_resid = residual_norm(ctx, &x0, lambda, NormKind::QuotientP)?;
    if !(p_resid < 0.5 * epsilon) {
        return Err(Error::ConvergenceFailed {
            routine: "quotient almost-eigenvector",
            residual: p_resid,
        });
    }

    // Forward scan: the limit-gauge mass of x₀ persists while the decaying
    // component dies off, so the sup-gauge conditions open up at some k.
    let k_cap = K_CAP_FACTOR * ctx.horizon_p();
    let screen = SupScreen::build(ctx, &x0, lambda, k_cap)?;
    let mut best_residual = f64::INFINITY;
    let mut tried = 0usize;
    for k in 0..=k_cap {
        if let Some(rel) = screen.relative_residual(k) {
            best_residual = best_residual.min(rel);
        }
        if !screen.passes(k, epsilon) {
            continue;
        }
        tried += 1;
        let xk = forward_vector(ctx, &x0, k, NormKind::Sup)?;
        if let Certification::Certified(mut cert) =
            certify_slow(ctx, &xk, lambda, epsilon, ctx.horizon_sup(), NormKind::Sup)?
        {
            cert.forward_steps = k;
            return Ok(cert);
        }
        if tried >= CANDIDATE_CAP {
            break;
        }
    }
    Err(Error::HorizonExhausted { scanned: k_cap, best_residual })
}

/// A subspace whose unit sphere is ε-slow, as far as sampling can tell.
///
/// Finite spaces cannot hold the infinite-dimensional version of "many slow
/// vectors"; this is the finite surrogate — an `l`-dimensional eigenvalue
/// cluster pushed forward by a common power, certified on a seeded sample of
/// its unit sphere rather than the whole sphere.  Reports should label it as
/// such.
#[derive(Clone, Debug)]
pub struct SlowSubspace {
    /// The eigenvalue whose cluster the subspace came from.
    pub lambda: C64,
    /// Orthonormal columns spanning the pushed-forward subspace.
    pub basis: CMat,
    /// Subspace dimension (`l`).
    pub dim: usize,
    /// Budget every sampled vector certified at.
    pub epsilon: f64,
    /// The common forward step applied to the whole subspace.
    pub forward_steps: usize,
    /// Number of sphere samples certified.
    pub sphere_samples: usize,
    /// Weakest sampled certificate: largest residual or lowest orbit floor,
    /// relative to the budget.
    pub worst_certificate: SlowCertificate,
}

/// How close a certificate came to its budget; bigger is weaker.
fn certificate_strain(cert: &SlowCertificate) -> f64 {
    let residual = cert.eigen_residual / cert.epsilon;
    let floor = (1.0 - cert.min_orbit_norm) / cert.epsilon;
    residual.max(floor)
}

/// Build an `l`-dimensional ε-slow subspace for the cluster at `lambda`.
///
/// Needs the quotient to carry at least `l` eigenvalues within `1e-6` of
/// `lambda`.  The cluster's invariant subspace is lifted through the
/// complement basis, `sphere_samples` unit vectors of its span are drawn from
/// a seeded stream, and the forward scan looks for one common step `k₀` at
/// which every sample certifies in the sup gauge.  The returned basis spans
/// `Tᵏ⁰` of the lifted cluster subspace.
pub fn slow_subspace(
    ctx: &NormContext,
    split: &StableSplit,
    lambda: C64,
    epsilon: f64,
    l: usize,
    sphere_samples: usize,
    seed: u64,
) -> Result<SlowSubspace> {
    let modulus = lambda.norm();
    if math::abs(modulus - 1.0) > CIRCLE_TOL {
        return Err(Error::OffCircleEigenvalue { lambda, modulus });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            requirement: "strictly between 0 and 1",
        });
    }
    if l == 0 {
        return Err(Error::InvalidParameter {
            name: "l",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    if sphere_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "sphere_samples",
            value: 0.0,
            requirement: "at least 1",
        });
    }
    let available = split
        .peripheral_eigvals
        .iter()
        .filter(|z| (**z - lambda).norm() <= ANGLE_TOL)
        .count();
    if l > available {
        return Err(Error::InsufficientMultiplicity { requested: l, available });
    }

    // Invariant basis of the λ-cluster inside the quotient, lifted to the
    // full space.  The quotient is already triangular, so this mini Schur
    // pass only reorders.
    let mut mini = schur::schur(&split.quotient)?;
    let select: Vec<bool> =
        (0..split.codim).map(|i| (mini.t.at(i, i) - lambda).norm() <= ANGLE_TOL).collect();
    let moved = schur::reorder_leading(&mut mini, &select);
    if moved < l {
        return Err(Error::InsufficientMultiplicity { requested: l, available: moved });
    }
    let span = split.complement_basis.mul(&mini.q.columns(0, l));

    // Fixed coefficient tuples on the unit sphere of the span.
    let mut stream = crate::rng::SeedStream::salted(seed, 0x510e);
    let coeffs: Vec<Vec<C64>> = (0..sphere_samples).map(|_| stream.unit_vector(l)).collect();

    // Screen every sample across the whole forward scan, then look for the
    // first step where all of them pass at once.
    let k_cap = K_CAP_FACTOR * ctx.horizon_p();
    let mut pass_count = vec![0u32; k_cap + 1];
    let mut worst_rel = vec![0.0f64; k_cap + 1];
    for c in &coeffs {
        let y = span.matvec(c);
        let screen = SupScreen::build(ctx, &y, lambda, k_cap)?;
        for k in 0..=k_cap {
            match screen.relative_residual(k) {
                Some(rel) => worst_rel[k] = worst_rel[k].max(rel),
                None => worst_rel[k] = f64::INFINITY,
            }
            if screen.passes(k, epsilon) {
                pass_count[k] += 1;
            }
        }
    }

    let total = sphere_samples as u32;
    let mut tried = 0usize;
    for k in 0..=k_cap {
        if pass_count[k] != total {
            continue;
        }
        tried += 1;
        let mut worst: Option<SlowCertificate> = None;
        let mut all_certified = true;
        for c in &coeffs {
            let y = span.matvec(c);
            let z = forward_vector(ctx, &y, k, NormKind::Sup)?;
            match certify_slow(ctx, &z, lambda, epsilon, ctx.horizon_sup(), NormKind::Sup)? {
                Certification::Certified(mut cert) => {
                    cert.forward_steps = k;
                    let weaker = worst
                        .as_ref()
                        .map_or(true, |w| certificate_strain(&cert) > certificate_strain(w));
                    if weaker {
                        worst = Some(cert);
                    }
                }
                Certification::Refused(_) => {
                    all_certified = false;
                    break;
                }
            }
        }
        if !all_certified {
            if tried >= CANDIDATE_CAP {
                break;
            }
            continue;
        }
        // Push the basis itself forward and orthonormalize the result.
        let mut pushed = CMat::zeros(span.rows(), l);
        for j in 0..l {
            let mut col = span.col(j);
            for _ in 0..k {
                col = ctx.operator().apply(&col);
            }
            pushed.set_col(j, &col);
        }
        let (basis, _) = linalg::qr::thin_qr(&pushed);
        return Ok(SlowSubspace {
            lambda,
            basis,
            dim: l,
            epsilon,
            forward_steps: k,
            sphere_samples,
            worst_certificate: worst.expect("at least one sample certified"),
        });
    }
    let best_residual = worst_rel.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Err(Error::HorizonExhausted { scanned: k_cap, best_residual })
}

/// Measured stability of a certified vector under orbit averaging.
#[derive(Clone, Debug)]
pub struct CesaroFixedReport {
    /// Eigenvalue the average was taken against.
    pub lambda: C64,
    /// Drift budget.
    pub delta: f64,
    /// Averaging length: the mean runs over steps `0, …, m`.
    pub m: usize,
    /// Measured `‖S x − x‖` in the certificate's gauge; wants `< delta`.
    pub drift: f64,
    /// `min` over the horizon of the averaged vector's orbit norms; wants
    /// `> 1 − delta`.
    pub min_orbit_norm: f64,
    /// Orbit steps checked for the floor.
    pub horizon: usize,
    /// Gauge of both measurements (inherited from the certificate).
    pub norm_kind: NormKind,
    /// Whether both inequalities held.
    pub pass: bool,
}

/// Check that averaging barely moves a slow vector.
///
/// `S` is the order-`m` average of `T/λ`.  For a vector certified at
/// `ε ≤ δ/(m+2)` the triangle inequality keeps `‖Sx − x‖` under `δ/2` and
/// the averaged vector's orbit above `1 − δ`; this verifies both for the
/// certificate's vector and reports the measured values.  A certificate too
/// loose for the requested `(δ, m)` budget is a parameter error — the bound
/// would be vacuous, not false.
pub fn cesaro_fixed_check(
    ctx: &NormContext,
    cert: &SlowCertificate,
    delta: f64,
    m: usize,
    horizon: usize,
) -> Result<CesaroFixedReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
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
    let budget = delta / (m as f64 + 2.0);
    if cert.epsilon > budget {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: cert.epsilon,
            requirement: "certificate epsilon must be at most delta / (m + 2)",
        });
    }
    let mean = crate::ergodic::cesaro_mean(ctx.operator(), cert.lambda, m)?;
    let averaged = mean.matvec(&cert.x);
    let diff = linalg::vec_sub(&averaged, &cert.x);
    let drift = ctx.norm(cert.norm_kind, &diff)?;
    let profile = ctx.orbit_profile(&averaged, cert.norm_kind, horizon)?;
    let min_orbit_norm = profile.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let pass = drift < delta && min_orbit_norm > 1.0 - delta;
    Ok(CesaroFixedReport {
        lambda: cert.lambda,
        delta,
        m,
        drift,
        min_orbit_norm,
        horizon,
        norm_kind: cert.norm_kind,
        pass,
    })
}
