//! Scenario files: a versioned JSON description of one experiment — which
//! operator to build, which hull to measure against, which analyses to run,
//! and with what parameters.
//!
//! Parsing rejects unknown keys outright, and [`Scenario::validate`] checks
//! every referenced parameter before any computation starts, so a bad file
//! fails fast with a field-level message instead of half-running.

use serde::Deserialize;
use slowvec_core::attractor::Compactum;
use slowvec_core::ergodic::DEFAULT_FLATTEN_BOUND;
use slowvec_core::norms::DEFAULT_PERIPHERAL_TOL;
use slowvec_core::operators::{
    make_cyclic_shift, make_split_operator, make_stochastic, make_swap, make_truncated_shift,
    Operator, ShiftDirection,
};

use crate::json::{ComplexJson, CompactumJson, OperatorJson};

/// Current scenario schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Analyses a scenario may request, in their fixed execution order.
pub const ANALYSES: &[&str] = &["split", "norms", "slow", "attractor", "ergodic", "asymptotic_report"];

/// A parsed scenario file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Schema version; must equal [`SCHEMA_VERSION`].
    pub schema: u32,
    /// Optional display name echoed into reports.
    #[serde(default)]
    pub name: Option<String>,
    /// The operator under analysis.
    pub operator: OperatorSpec,
    /// The hull, for analyses that need one.
    #[serde(default)]
    pub compactum: Option<CompactumJson>,
    /// Numeric knobs; missing fields take defaults.
    #[serde(default)]
    pub parameters: Parameters,
    /// Which analyses to run (order in the file is irrelevant; execution
    /// order is fixed).
    pub analyses: Vec<String>,
}

/// How to obtain the operator.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "kebab-case")]
pub enum OperatorSpec {
    /// Cyclic coordinate shift of the given dimension.
    CyclicShift { dim: usize },
    /// Truncated (nilpotent) shift.
    TruncatedShift { dim: usize, direction: Direction },
    /// The coordinate swap on two coordinates.
    Swap {},
    /// Seeded row-stochastic matrix.
    Stochastic {
        dim: usize,
        seed: u64,
        #[serde(default)]
        doubly: bool,
    },
    /// Seeded operator with a known decaying/persistent split.
    Split {
        peripheral: Vec<ComplexJson>,
        interior_dim: usize,
        contraction_radius: f64,
        conditioning: f64,
        seed: u64,
    },
    /// Inline matrix.
    Inline { operator: OperatorJson },
}

/// Shift direction label.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Left,
    Right,
}

impl From<Direction> for ShiftDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Left => ShiftDirection::Left,
            Direction::Right => ShiftDirection::Right,
        }
    }
}

/// Numeric knobs shared by the analyses.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Parameters {
    /// Attraction threshold.
    pub alpha: f64,
    /// Slow-vector budget.
    pub epsilon: f64,
    /// Orbit horizon for scans and norms.
    pub horizon: usize,
    /// Averaging-length cap for flattening and projections.
    pub m_cap: usize,
    /// Sampled orbits in attraction checks.
    pub sample_count: usize,
    /// Sphere samples for slow subspaces.
    pub sphere_samples: usize,
    /// Flattening ceiling.
    pub flatten_bound: f64,
    /// Modulus band separating decaying from persistent eigenvalues.
    pub peripheral_tol: f64,
    /// Seed for every sampled stage.
    pub seed: u64,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            alpha: 0.5,
            epsilon: 0.01,
            horizon: 64,
            m_cap: 512,
            sample_count: 16,
            sphere_samples: 32,
            flatten_bound: DEFAULT_FLATTEN_BOUND,
            peripheral_tol: DEFAULT_PERIPHERAL_TOL,
            seed: 0,
        }
    }
}

impl Scenario {
    /// Parse a scenario from JSON text.
    pub fn from_json(text: &str) -> anyhow::Result<Scenario> {
        let scenario: Scenario = serde_json::from_str(text)?;
        Ok(scenario)
    }

    /// Validate every referenced parameter without running anything.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema != SCHEMA_VERSION {
            anyhow::bail!(
                "unsupported schema version {}; this build reads version {}",
                self.schema,
                SCHEMA_VERSION
            );
        }
        if self.analyses.is_empty() {
            anyhow::bail!("scenario requests no analyses");
        }
        for name in &self.analyses {
            if !ANALYSES.contains(&name.as_str()) {
                anyhow::bail!(
                    "unknown analysis {name:?}; known analyses: {}",
                    ANALYSES.join(", ")
                );
            }
        }
        let p = &self.parameters;
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            anyhow::bail!("invalid alpha {}: must lie strictly between 0 and 1", p.alpha);
        }
        if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
            anyhow::bail!("invalid epsilon {}: must lie strictly between 0 and 1", p.epsilon);
        }
        if p.horizon < 2 {
            anyhow::bail!("invalid horizon {}: must be at least 2", p.horizon);
        }
        if p.m_cap == 0 {
            anyhow::bail!("invalid m_cap 0: must be at least 1");
        }
        if p.sample_count == 0 {
            anyhow::bail!("invalid sample_count 0: must be at least 1");
        }
        if p.sphere_samples == 0 {
            anyhow::bail!("invalid sphere_samples 0: must be at least 1");
        }
        if !(p.flatten_bound > 0.0 && p.flatten_bound < 1.0) {
            anyhow::bail!(
                "invalid flatten_bound {}: must lie strictly between 0 and 1",
                p.flatten_bound
            );
        }
        if !(p.peripheral_tol > 0.0 && p.peripheral_tol < 1.0) {
            anyhow::bail!(
                "invalid peripheral_tol {}: must lie strictly between 0 and 1",
                p.peripheral_tol
            );
        }
        match &self.operator {
            OperatorSpec::CyclicShift { dim } | OperatorSpec::TruncatedShift { dim, .. } => {
                if *dim == 0 {
                    anyhow::bail!("invalid dim 0: must be at least 1");
                }
            }
            OperatorSpec::Swap {} => {}
            OperatorSpec::Stochastic { dim, .. } => {
                if *dim == 0 {
                    anyhow::bail!("invalid dim 0: must be at least 1");
                }
            }
            OperatorSpec::Split {
                peripheral,
                interior_dim,
                contraction_radius,
                conditioning,
                ..
            } => {
                if peripheral.is_empty() && *interior_dim == 0 {
                    anyhow::bail!("split family needs a positive total dimension");
                }
                if !(0.0..1.0).contains(contraction_radius) {
                    anyhow::bail!(
                        "invalid contraction_radius {contraction_radius}: must lie in [0, 1)"
                    );
                }
                if !(conditioning.is_finite() && *conditioning >= 1.0) {
                    anyhow::bail!("invalid conditioning {conditioning}: must be at least 1");
                }
            }
            OperatorSpec::Inline { operator } => {
                if operator.dim == 0 {
                    anyhow::bail!("invalid dim 0: must be at least 1");
                }
                let want = operator.dim * operator.dim;
                if operator.re.len() != want || operator.im.len() != want {
                    anyhow::bail!(
                        "inline operator of dim {} needs {} entries, got {} real / {} imaginary",
                        operator.dim,
                        want,
                        operator.re.len(),
                        operator.im.len()
                    );
                }
            }
        }
        let needs_compactum =
            self.analyses.iter().any(|a| a == "attractor" || a == "asymptotic_report");
        if needs_compactum && self.compactum.is_none() {
            anyhow::bail!("attractor and asymptotic_report analyses need a compactum");
        }
        if let Some(k) = &self.compactum {
            if k.generators.is_empty() {
                anyhow::bail!("compactum needs at least one generator");
            }
            for (i, g) in k.generators.iter().enumerate() {
                if g.re.len() != g.im.len() {
                    anyhow::bail!(
                        "compactum generator {i} has {} real parts but {} imaginary parts",
                        g.re.len(),
                        g.im.len()
                    );
                }
            }
        }
        Ok(())
    }

    /// Build the operator this scenario describes.
    pub fn build_operator(&self) -> anyhow::Result<Operator> {
        let op = match &self.operator {
            OperatorSpec::CyclicShift { dim } => {
                make_cyclic_shift(*dim).map_err(|e| anyhow::anyhow!("{e}"))?
            }
            OperatorSpec::TruncatedShift { dim, direction } => {
                make_truncated_shift(*dim, (*direction).into())
                    .map_err(|e| anyhow::anyhow!("{e}"))?
            }
            OperatorSpec::Swap {} => make_swap(),
            OperatorSpec::Stochastic { dim, seed, doubly } => {
                make_stochastic(*dim, *seed, *doubly).map_err(|e| anyhow::anyhow!("{e}"))?
            }
            OperatorSpec::Split {
                peripheral,
                interior_dim,
                contraction_radius,
                conditioning,
                seed,
            } => {
                let eigvals: Vec<_> = peripheral.iter().map(|&z| z.into()).collect();
                make_split_operator(&eigvals, *interior_dim, *contraction_radius, *conditioning, *seed)
                    .map_err(|e| anyhow::anyhow!("{e}"))?
                    .operator
            }
            OperatorSpec::Inline { operator } => operator.to_operator()?,
        };
        Ok(op)
    }

    /// Build the hull, if the scenario declares one.
    pub fn build_compactum(&self) -> anyhow::Result<Option<Compactum>> {
        match &self.compactum {
            None => Ok(None),
            Some(k) => Ok(Some(k.to_compactum()?)),
        }
    }

    /// Whether the given analysis was requested.
    pub fn wants(&self, analysis: &str) -> bool {
        self.analyses.iter().any(|a| a == analysis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(alpha: f64) -> String {
        format!(
            r#"{{
                "schema": 1,
                "operator": {{"family": "cyclic-shift", "dim": 4}},
                "compactum": {{"generators": [{{"re": [2.0, 0.0, 0.0, 0.0], "im": [0.0, 0.0, 0.0, 0.0]}}]}},
                "parameters": {{"alpha": {alpha}}},
                "analyses": ["asymptotic_report"]
            }}"#
        )
    }

    #[test]
    fn valid_scenario_parses_and_validates() {
        let sc = Scenario::from_json(&minimal(0.5)).expect("parse");
        sc.validate().expect("validate");
        let op = sc.build_operator().expect("operator");
        assert_eq!(op.dim(), 4);
        let k = sc.build_compactum().expect("compactum").expect("present");
        assert_eq!(k.dim(), 4);
    }

    #[test]
    fn out_of_range_alpha_is_rejected_before_compute() {
        let sc = Scenario::from_json(&minimal(1.5)).expect("parse");
        let err = sc.validate().expect_err("must reject");
        assert!(err.to_string().contains("alpha"), "message: {err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{
            "schema": 1,
            "operator": {"family": "swap"},
            "analyses": ["split"],
            "surprise": true
        }"#;
        assert!(Scenario::from_json(text).is_err());
    }

    #[test]
    fn unknown_analysis_is_rejected() {
        let text = r#"{
            "schema": 1,
            "operator": {"family": "swap"},
            "analyses": ["spectralize"]
        }"#;
        let sc = Scenario::from_json(text).expect("parse");
        assert!(sc.validate().is_err());
    }

    #[test]
    fn missing_compactum_is_caught_when_needed() {
        let text = r#"{
            "schema": 1,
            "operator": {"family": "swap"},
            "analyses": ["attractor"]
        }"#;
        let sc = Scenario::from_json(text).expect("parse");
        let err = sc.validate().expect_err("must reject");
        assert!(err.to_string().contains("compactum"), "message: {err}");
    }

    #[test]
    fn split_family_builds_with_ground_truth_dimensions() {
        let text = r#"{
            "schema": 1,
            "operator": {
                "family": "split",
                "peripheral": [{"re": 1.0, "im": 0.0}],
                "interior_dim": 2,
                "contraction_radius": 0.5,
                "conditioning": 2.0,
                "seed": 7
            },
            "analyses": ["split", "norms", "slow"]
        }"#;
        let sc = Scenario::from_json(text).expect("parse");
        sc.validate().expect("validate");
        let op = sc.build_operator().expect("operator");
        assert_eq!(op.dim(), 3);
        assert_eq!(op.power_bound(), Some(2.0));
    }
}
