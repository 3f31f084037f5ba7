//! JSON shapes for operators, vectors, hulls, and analysis reports.
//!
//! Complex numbers are always `{"re": …, "im": …}` objects (scalars) or
//! parallel `re`/`im` arrays (vectors and matrices) — never strings.  Input
//! shapes validate on conversion; report shapes only serialize.

use serde::{Deserialize, Serialize};
use slowvec_core::attractor::{AttractionReport, Compactum, GreedyDecomposition};
use slowvec_core::ergodic::{
    AsymptoticSummary, ErgodicProjection, FlatteningReport, KkmReport,
};
use slowvec_core::linalg::CMat;
use slowvec_core::norms::{NormKind, StableSplit};
use slowvec_core::operators::Operator;
use slowvec_core::slow::{CesaroFixedReport, SlowCertificate, SlowRefusal, SlowSubspace};
use slowvec_core::C64;

/// One complex scalar.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        C64::new(z.re, z.im)
    }
}

/// One complex vector as parallel real and imaginary arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_slice(v: &[C64]) -> Self {
        VectorJson {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vec(&self) -> anyhow::Result<Vec<C64>> {
        if self.re.len() != self.im.len() {
            anyhow::bail!(
                "vector has {} real parts but {} imaginary parts",
                self.re.len(),
                self.im.len()
            );
        }
        Ok(self.re.iter().zip(&self.im).map(|(&re, &im)| C64::new(re, im)).collect())
    }
}

/// Operator interchange shape: row-major entry arrays plus the optional
/// certified power bound.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dim: usize,
    /// Row-major real parts, `dim * dim` entries.
    pub re: Vec<f64>,
    /// Row-major imaginary parts, `dim * dim` entries.
    pub im: Vec<f64>,
    pub power_bound: Option<f64>,
}

impl OperatorJson {
    pub fn from_operator(op: &Operator) -> Self {
        let data = op.matrix().data();
        OperatorJson {
            dim: op.dim(),
            re: data.iter().map(|z| z.re).collect(),
            im: data.iter().map(|z| z.im).collect(),
            power_bound: op.power_bound(),
        }
    }

    pub fn to_operator(&self) -> anyhow::Result<Operator> {
        let want = self.dim * self.dim;
        if self.re.len() != want || self.im.len() != want {
            anyhow::bail!(
                "operator of dim {} needs {} entries, got {} real / {} imaginary",
                self.dim,
                want,
                self.re.len(),
                self.im.len()
            );
        }
        let data: Vec<C64> =
            self.re.iter().zip(&self.im).map(|(&re, &im)| C64::new(re, im)).collect();
        let mat = CMat::from_data(self.dim, self.dim, data);
        Operator::new(mat, self.power_bound).map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// Hull interchange shape: the generator list.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CompactumJson {
    pub generators: Vec<VectorJson>,
}

impl CompactumJson {
    pub fn from_compactum(k: &Compactum) -> Self {
        CompactumJson {
            generators: k.generators().iter().map(|g| VectorJson::from_slice(g)).collect(),
        }
    }

    pub fn to_compactum(&self) -> anyhow::Result<Compactum> {
        let gens = self
            .generators
            .iter()
            .map(|g| g.to_vec())
            .collect::<anyhow::Result<Vec<_>>>()?;
        Compactum::new(gens).map_err(|e| anyhow::anyhow!("{e}"))
    }
}

/// Stable label for a gauge.
pub fn norm_kind_label(kind: NormKind) -> &'static str {
    match kind {
        NormKind::Original => "original",
        NormKind::Sup => "sup",
        NormKind::QuotientP => "quotient-p",
    }
}

/// Parse a gauge label.
pub fn parse_norm_kind(label: &str) -> anyhow::Result<NormKind> {
    match label {
        "original" => Ok(NormKind::Original),
        "sup" => Ok(NormKind::Sup),
        "quotient-p" => Ok(NormKind::QuotientP),
        other => anyhow::bail!(
            "unknown norm kind {other:?}; expected original, sup, or quotient-p"
        ),
    }
}

/// Orthonormal basis as a list of column vectors.
pub fn basis_columns(m: &CMat) -> Vec<VectorJson> {
    (0..m.cols()).map(|j| VectorJson::from_slice(&m.col(j))).collect()
}

/// Stable-split report shape.
#[derive(Clone, Debug, Serialize)]
pub struct SplitJson {
    pub codim: usize,
    pub peripheral_eigvals: Vec<ComplexJson>,
    pub x0_basis: Vec<VectorJson>,
    pub complement_basis: Vec<VectorJson>,
}

impl SplitJson {
    pub fn from_split(split: &StableSplit) -> Self {
        SplitJson {
            codim: split.codim,
            peripheral_eigvals: split
                .peripheral_eigvals
                .iter()
                .map(|&z| ComplexJson::from(z))
                .collect(),
            x0_basis: basis_columns(&split.x0_basis),
            complement_basis: basis_columns(&split.complement_basis),
        }
    }
}

/// Slow-certificate report shape: every measured quantity.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateJson {
    pub lambda: ComplexJson,
    pub x: VectorJson,
    pub epsilon: f64,
    pub horizon: usize,
    pub min_orbit_norm: f64,
    pub eigen_residual: f64,
    pub norm_kind: &'static str,
    pub forward_steps: usize,
}

impl CertificateJson {
    pub fn from_certificate(cert: &SlowCertificate) -> Self {
        CertificateJson {
            lambda: cert.lambda.into(),
            x: VectorJson::from_slice(&cert.x),
            epsilon: cert.epsilon,
            horizon: cert.horizon,
            min_orbit_norm: cert.min_orbit_norm,
            eigen_residual: cert.eigen_residual,
            norm_kind: norm_kind_label(cert.norm_kind),
            forward_steps: cert.forward_steps,
        }
    }
}

/// Refusal report shape: the failing index and value.
#[derive(Clone, Debug, Serialize)]
pub struct RefusalJson {
    pub eigen_residual: f64,
    pub failing_n: Option<usize>,
    pub orbit_norm_at_failure: Option<f64>,
}

impl RefusalJson {
    pub fn from_refusal(r: &SlowRefusal) -> Self {
        RefusalJson {
            eigen_residual: r.eigen_residual,
            failing_n: r.failing_n,
            orbit_norm_at_failure: r.orbit_norm_at_failure,
        }
    }
}

/// Slow-subspace report shape.  The sphere claim is checked on samples, so
/// the report carries an explicit verification label instead of implying an
/// exhaustive proof.
#[derive(Clone, Debug, Serialize)]
pub struct SlowSubspaceJson {
    pub lambda: ComplexJson,
    pub dim: usize,
    pub epsilon: f64,
    pub forward_steps: usize,
    pub sphere_samples: usize,
    pub verification: &'static str,
    pub basis: Vec<VectorJson>,
    pub worst_certificate: CertificateJson,
}

impl SlowSubspaceJson {
    pub fn from_subspace(sub: &SlowSubspace) -> Self {
        SlowSubspaceJson {
            lambda: sub.lambda.into(),
            dim: sub.dim,
            epsilon: sub.epsilon,
            forward_steps: sub.forward_steps,
            sphere_samples: sub.sphere_samples,
            verification: "sampled-sphere-surrogate",
            basis: basis_columns(&sub.basis),
            worst_certificate: CertificateJson::from_certificate(&sub.worst_certificate),
        }
    }
}

/// Averaged-vector check report shape.
#[derive(Clone, Debug, Serialize)]
pub struct CesaroFixedJson {
    pub lambda: ComplexJson,
    pub delta: f64,
    pub m: usize,
    pub drift: f64,
    pub min_orbit_norm: f64,
    pub horizon: usize,
    pub norm_kind: &'static str,
    pub pass: bool,
}

impl CesaroFixedJson {
    pub fn from_report(r: &CesaroFixedReport) -> Self {
        CesaroFixedJson {
            lambda: r.lambda.into(),
            delta: r.delta,
            m: r.m,
            drift: r.drift,
            min_orbit_norm: r.min_orbit_norm,
            horizon: r.horizon,
            norm_kind: norm_kind_label(r.norm_kind),
            pass: r.pass,
        }
    }
}

/// One attraction sample row.
#[derive(Clone, Debug, Serialize)]
pub struct AttractionSampleJson {
    pub index: usize,
    pub best_n: usize,
    pub best_distance: f64,
    pub x: VectorJson,
}

/// Attraction report shape.
#[derive(Clone, Debug, Serialize)]
pub struct AttractionJson {
    pub alpha: f64,
    pub horizon: usize,
    pub pass_fraction: f64,
    pub passes: bool,
    pub horizon_limited: usize,
    pub samples: Vec<AttractionSampleJson>,
}

impl AttractionJson {
    pub fn from_report(r: &AttractionReport) -> Self {
        AttractionJson {
            alpha: r.alpha,
            horizon: r.horizon,
            pass_fraction: r.pass_fraction,
            passes: r.passes(),
            horizon_limited: r.horizon_limited(),
            samples: r
                .samples
                .iter()
                .enumerate()
                .map(|(index, s)| AttractionSampleJson {
                    index,
                    best_n: s.best_n,
                    best_distance: s.best_distance,
                    x: VectorJson::from_slice(&s.x),
                })
                .collect(),
        }
    }
}

/// One greedy layer.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyStepJson {
    pub t: ComplexJson,
    pub n: usize,
    pub a: VectorJson,
}

/// Greedy decomposition report shape.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyJson {
    pub alpha: f64,
    pub m_values: Vec<usize>,
    pub residual_norms: Vec<f64>,
    pub steps: Vec<GreedyStepJson>,
}

impl GreedyJson {
    pub fn from_decomposition(d: &GreedyDecomposition) -> Self {
        GreedyJson {
            alpha: d.alpha,
            m_values: d.m_values.clone(),
            residual_norms: d.residual_norms.clone(),
            steps: d
                .steps
                .iter()
                .map(|s| GreedyStepJson {
                    t: s.t.into(),
                    n: s.n,
                    a: VectorJson::from_slice(&s.a),
                })
                .collect(),
        }
    }
}

/// Mean-ergodic projection report shape.
#[derive(Clone, Debug, Serialize)]
pub struct ErgodicProjectionJson {
    pub lambda: ComplexJson,
    pub m_used: usize,
    pub convergence_history: Vec<(usize, f64)>,
    pub p: Vec<VectorJson>,
}

impl ErgodicProjectionJson {
    pub fn from_projection(proj: &ErgodicProjection) -> Self {
        ErgodicProjectionJson {
            lambda: proj.lambda.into(),
            m_used: proj.m_used,
            convergence_history: proj.convergence_history.clone(),
            p: basis_columns(&proj.p),
        }
    }
}

/// Covering-net dimension-bound report shape.
#[derive(Clone, Debug, Serialize)]
pub struct KkmJson {
    pub lambda: ComplexJson,
    pub alpha: f64,
    pub net_size: usize,
    pub dim_y: usize,
    pub kernel_dim: usize,
    pub holds: bool,
    pub witness_step: Option<usize>,
    pub witness_distance: Option<f64>,
}

impl KkmJson {
    pub fn from_report(r: &KkmReport) -> Self {
        KkmJson {
            lambda: r.lambda.into(),
            alpha: r.alpha,
            net_size: r.net_size,
            dim_y: r.dim_y,
            kernel_dim: r.kernel_dim,
            holds: r.holds,
            witness_step: r.witness.as_ref().and_then(|w| w.step),
            witness_distance: r.witness.as_ref().map(|w| w.distance),
        }
    }
}

/// Flattening report shape.
#[derive(Clone, Debug, Serialize)]
pub struct FlatteningJson {
    pub lambda: ComplexJson,
    pub alpha: f64,
    pub bound: f64,
    pub horizon: usize,
    pub m: Option<usize>,
    pub value: f64,
    pub passes: bool,
    pub history: Vec<(usize, f64)>,
}

impl FlatteningJson {
    pub fn from_report(r: &FlatteningReport) -> Self {
        FlatteningJson {
            lambda: r.lambda.into(),
            alpha: r.alpha,
            bound: r.bound,
            horizon: r.horizon,
            m: r.m,
            value: r.value,
            passes: r.passes(),
            history: r.history.clone(),
        }
    }
}

/// One cross-stage verdict.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictJson {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

/// Per-eigenvalue findings inside the full summary.
#[derive(Clone, Debug, Serialize)]
pub struct PeripheralFindingJson {
    pub lambda: ComplexJson,
    pub multiplicity: usize,
    pub kernel_dim: usize,
    pub kkm: Option<KkmJson>,
    pub flattening: Option<FlatteningJson>,
    pub slow_dim: Option<usize>,
}

/// Full pipeline summary shape: stage results plus consistency verdicts.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryJson {
    pub dim: usize,
    pub alpha: f64,
    pub codim: Option<usize>,
    pub no_slow_vectors: Option<bool>,
    pub max_slow_dim: Option<usize>,
    pub consistent: bool,
    pub star: Option<AttractionJson>,
    pub slow_certificate: Option<CertificateJson>,
    pub peripheral: Vec<PeripheralFindingJson>,
    pub verdicts: Vec<VerdictJson>,
    pub stage_errors: Vec<StageErrorJson>,
}

/// One failed stage with its message.
#[derive(Clone, Debug, Serialize)]
pub struct StageErrorJson {
    pub stage: &'static str,
    pub message: String,
}

impl SummaryJson {
    pub fn from_summary(s: &AsymptoticSummary) -> Self {
        SummaryJson {
            dim: s.dim,
            alpha: s.alpha,
            codim: s.codim,
            no_slow_vectors: s.no_slow_vectors,
            max_slow_dim: s.max_slow_dim,
            consistent: s.consistent(),
            star: s.star.as_ref().map(AttractionJson::from_report),
            slow_certificate: s.slow_certificate.as_ref().map(CertificateJson::from_certificate),
            peripheral: s
                .peripheral
                .iter()
                .map(|f| PeripheralFindingJson {
                    lambda: f.lambda.into(),
                    multiplicity: f.multiplicity,
                    kernel_dim: f.kernel_dim,
                    kkm: f.kkm.as_ref().map(KkmJson::from_report),
                    flattening: f.flattening.as_ref().map(FlatteningJson::from_report),
                    slow_dim: f.slow_dim,
                })
                .collect(),
            verdicts: s
                .verdicts
                .iter()
                .map(|v| VerdictJson { name: v.name, holds: v.holds, detail: v.detail.clone() })
                .collect(),
            stage_errors: s
                .stage_errors
                .iter()
                .map(|(stage, message)| StageErrorJson { stage, message: message.clone() })
                .collect(),
        }
    }
}
