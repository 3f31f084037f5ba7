//! Staged execution of a validated scenario.
//!
//! Analyses always run in dependency order — split, norms, slow, attractor,
//! ergodic, full summary — no matter how the scenario lists them; stages that
//! were not requested but are needed by one that was are computed silently.
//! Results land in a single JSON report plus CSV detail files, and every
//! asserted check folds into a three-way exit status: pass, fail, or
//! inconclusive (a scan or cap ran out before the question was settled).

use std::fs;
use std::path::PathBuf;

use serde_json::{json, Value};
use slowvec_core::attractor::{check_star_condition, greedy_decompose, Compactum};
use slowvec_core::ergodic::{asymptotic_report, ergodic_projection, AsymptoticConfig};
use slowvec_core::norms::{
    build_norm_context, compute_stable_split, quotient_p_isometry_check, NormContext,
    StableSplit, CAUCHY_TOL,
};
use slowvec_core::operators::Operator;
use slowvec_core::slow::{
    cesaro_fixed_check, peripheral_clusters, slow_subspace, synthesize_slow,
};
use slowvec_core::Error as CoreError;

use crate::json::{
    AttractionJson, CertificateJson, CesaroFixedJson, ComplexJson, ErgodicProjectionJson,
    GreedyJson, SlowSubspaceJson, SplitJson, SummaryJson,
};
use crate::scenario::{OperatorSpec, Scenario};

/// Greedy layers peeled off the first attracted sample.
const GREEDY_STEPS: usize = 4;
/// Drift budget for the averaged-vector check on a synthesized certificate.
const CESARO_FIXED_DELTA: f64 = 0.5;
/// Doubling cap for standalone mean-ergodic projections.  The doubling
/// tolerance is loose because the raw averaging rate is only `1/m`; the
/// projection is polished internally well past it.
const ERGODIC_M_CAP: usize = 1 << 20;
const ERGODIC_TOL: f64 = 1e-3;

/// Command-line overrides applied on top of the scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    /// Replaces the scenario horizon.
    pub horizon: Option<usize>,
    /// Directory receiving the report and CSV files (default: current).
    pub out_dir: Option<PathBuf>,
}

/// Three-way outcome of a run, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    /// Every asserted check passed.
    Pass,
    /// Some scan or cap was exhausted before settling a check.
    Inconclusive,
    /// A check failed outright or a stage errored.
    Fail,
}

impl ExitStatus {
    /// Process exit code: 0 pass, 2 inconclusive, 1 fail.
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Inconclusive => 2,
            ExitStatus::Fail => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitStatus::Pass => "pass",
            ExitStatus::Inconclusive => "inconclusive",
            ExitStatus::Fail => "fail",
        }
    }

    fn absorb(&mut self, other: ExitStatus) {
        *self = (*self).max(other);
    }
}

/// Budget-limited failures are inconclusive: a longer scan might settle
/// them.  Everything else is a hard failure.
fn classify_error(e: &CoreError) -> ExitStatus {
    match e {
        CoreError::HorizonExhausted { .. }
        | CoreError::StepUnattainable { .. }
        | CoreError::ConvergenceFailed { .. }
        | CoreError::NetTooLarge { .. } => ExitStatus::Inconclusive,
        _ => ExitStatus::Fail,
    }
}

/// The same classification for stage errors that arrive pre-rendered from
/// the summary pipeline; the substrings are fixed by the error display
/// implementations in the core crate.
fn classify_message(message: &str) -> ExitStatus {
    let budget_limited = message.contains("no certified candidate within")
        || message.contains("no orbit point within reach")
        || message.contains("failed to converge")
        || message.contains("exceeding the cap");
    if budget_limited {
        ExitStatus::Inconclusive
    } else {
        ExitStatus::Fail
    }
}

/// One recorded triage event: which stage, how severe, and why.
#[derive(Clone, Debug)]
struct Note {
    stage: &'static str,
    severity: ExitStatus,
    message: String,
}

/// A finished run: the report document, its triage, and the files written.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: Value,
    pub status: ExitStatus,
    pub written: Vec<PathBuf>,
}

fn family_label(spec: &OperatorSpec) -> &'static str {
    match spec {
        OperatorSpec::CyclicShift { .. } => "cyclic-shift",
        OperatorSpec::TruncatedShift { .. } => "truncated-shift",
        OperatorSpec::Swap {} => "swap",
        OperatorSpec::Stochastic { .. } => "stochastic",
        OperatorSpec::Split { .. } => "split",
        OperatorSpec::Inline { .. } => "inline",
    }
}

/// Run one scenario end to end and write its artifacts.
///
/// Hard setup problems (validation, operator construction, IO) surface as
/// errors; everything downstream is folded into the returned status so the
/// report always exists for inspection.
pub fn run_scenario(scenario: &Scenario, overrides: &Overrides) -> anyhow::Result<RunOutcome> {
    scenario.validate()?;

    let op = scenario.build_operator()?;
    let compactum = scenario.build_compactum()?;
    if let Some(k) = &compactum {
        if k.dim() != op.dim() {
            anyhow::bail!(
                "compactum generators live in dimension {} but the operator has dimension {}",
                k.dim(),
                op.dim()
            );
        }
    }

    let mut params = scenario.parameters.clone();
    if let Some(h) = overrides.horizon {
        if h < 2 {
            anyhow::bail!("invalid horizon {h}: must be at least 2");
        }
        params.horizon = h;
    }

    let mut status = ExitStatus::Pass;
    let mut notes: Vec<Note> = Vec::new();
    let mut stages = serde_json::Map::new();

    // Dependencies: norms, slow, and ergodic all need the stable split; the
    // slow stage needs the norm context on top of it.
    let needs_split = ["split", "norms", "slow", "ergodic"].iter().any(|a| scenario.wants(a));
    let needs_ctx = ["norms", "slow"].iter().any(|a| scenario.wants(a));

    let split: Option<StableSplit> = if needs_split {
        match compute_stable_split(&op, params.peripheral_tol) {
            Ok(s) => Some(s),
            Err(e) => {
                notes.push(Note {
                    stage: "split",
                    severity: classify_error(&e),
                    message: format!("{e}"),
                });
                None
            }
        }
    } else {
        None
    };

    let ctx: Option<NormContext> = if needs_ctx {
        match build_norm_context(&op, params.horizon, params.horizon) {
            Ok(c) => Some(c),
            Err(e) => {
                notes.push(Note {
                    stage: "norms",
                    severity: classify_error(&e),
                    message: format!("{e}"),
                });
                None
            }
        }
    } else {
        None
    };

    if scenario.wants("split") {
        let value = match &split {
            Some(s) => serde_json::to_value(SplitJson::from_split(s))?,
            None => Value::Null,
        };
        stages.insert("split".into(), value);
    }

    if scenario.wants("norms") {
        stages.insert("norms".into(), run_norms_stage(&ctx, &split, &params, &mut notes)?);
    }

    if scenario.wants("slow") {
        stages.insert("slow".into(), run_slow_stage(&ctx, &split, &params, &mut notes)?);
    }

    let mut star_for_csv = None;
    if scenario.wants("attractor") {
        let k = compactum.as_ref().expect("validation requires a compactum here");
        let (value, star) = run_attractor_stage(&op, k, &params, &mut notes)?;
        stages.insert("attractor".into(), value);
        star_for_csv = star;
    }

    if scenario.wants("ergodic") {
        stages.insert("ergodic".into(), run_ergodic_stage(&op, &split, &mut notes)?);
    }

    let mut summary_for_csv = None;
    if scenario.wants("asymptotic_report") {
        let k = compactum.as_ref().expect("validation requires a compactum here");
        let config = AsymptoticConfig {
            epsilon: params.epsilon,
            horizon: params.horizon,
            sample_count: params.sample_count,
            sphere_samples: params.sphere_samples,
            flatten_bound: params.flatten_bound,
            m_cap: params.m_cap,
            peripheral_tol: params.peripheral_tol,
            seed: params.seed,
        };
        match asymptotic_report(&op, k, params.alpha, &config) {
            Ok(summary) => {
                triage_summary(&summary, &mut notes);
                stages.insert(
                    "asymptotic_report".into(),
                    serde_json::to_value(SummaryJson::from_summary(&summary))?,
                );
                summary_for_csv = Some(summary);
            }
            Err(e) => {
                notes.push(Note {
                    stage: "asymptotic_report",
                    severity: classify_error(&e),
                    message: format!("{e}"),
                });
                stages.insert("asymptotic_report".into(), Value::Null);
            }
        }
    }

    for note in &notes {
        status.absorb(note.severity);
    }

    let report = json!({
        "header": {
            "schema": crate::scenario::SCHEMA_VERSION,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": Value::Null,
            "name": scenario.name,
            "seed": params.seed,
        },
        "operator": {
            "family": family_label(&scenario.operator),
            "dim": op.dim(),
            "power_bound": op.power_bound(),
        },
        "parameters": {
            "alpha": params.alpha,
            "epsilon": params.epsilon,
            "horizon": params.horizon,
            "m_cap": params.m_cap,
            "sample_count": params.sample_count,
            "sphere_samples": params.sphere_samples,
            "flatten_bound": params.flatten_bound,
            "peripheral_tol": params.peripheral_tol,
        },
        "stages": Value::Object(stages),
        "notes": notes.iter().map(|n| json!({
            "stage": n.stage,
            "severity": n.severity.label(),
            "message": n.message,
        })).collect::<Vec<_>>(),
        "status": status.label(),
    });

    let out_dir = overrides.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)?;
    let mut written = Vec::new();

    let report_path = out_dir.join("report.json");
    fs::write(&report_path, format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    written.push(report_path);

    // CSV details: per-sample attraction rows, projection convergence
    // histories, and flattening histories, whichever the run produced.
    let star_rows = star_for_csv
        .as_ref()
        .or(summary_for_csv.as_ref().and_then(|s| s.star.as_ref()));
    if let Some(star) = star_rows {
        let path = out_dir.join("attraction_samples.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["sample", "best_n", "best_distance"])?;
        for (i, s) in star.samples.iter().enumerate() {
            w.write_record([i.to_string(), s.best_n.to_string(), s.best_distance.to_string()])?;
        }
        w.flush()?;
        written.push(path);
    }
    if let Some(Value::Object(ergodic)) = stages_lookup(&report, "ergodic") {
        if let Some(Value::Array(projections)) = ergodic.get("projections") {
            let path = out_dir.join("ergodic_history.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["lambda_re", "lambda_im", "m", "gap"])?;
            for proj in projections {
                let lam = &proj["lambda"];
                for entry in proj["convergence_history"].as_array().into_iter().flatten() {
                    w.write_record([
                        lam["re"].to_string(),
                        lam["im"].to_string(),
                        entry[0].to_string(),
                        entry[1].to_string(),
                    ])?;
                }
            }
            w.flush()?;
            written.push(path);
        }
    }
    if let Some(summary) = &summary_for_csv {
        let path = out_dir.join("flattening_history.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["lambda_re", "lambda_im", "m", "tail_value"])?;
        for finding in &summary.peripheral {
            if let Some(flat) = &finding.flattening {
                for &(m, value) in &flat.history {
                    w.write_record([
                        finding.lambda.re.to_string(),
                        finding.lambda.im.to_string(),
                        m.to_string(),
                        value.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        written.push(path);
    }

    Ok(RunOutcome { report, status, written })
}

fn stages_lookup<'a>(report: &'a Value, stage: &str) -> Option<&'a Value> {
    report.get("stages").and_then(|s| s.get(stage))
}

fn run_norms_stage(
    ctx: &Option<NormContext>,
    split: &Option<StableSplit>,
    params: &crate::scenario::Parameters,
    notes: &mut Vec<Note>,
) -> anyhow::Result<Value> {
    let Some(ctx) = ctx else {
        return Ok(Value::Null);
    };
    let cauchy_converged = ctx.cauchy_gap() <= CAUCHY_TOL;
    if !cauchy_converged {
        notes.push(Note {
            stage: "norms",
            severity: ExitStatus::Inconclusive,
            message: format!(
                "limit-gauge doubling hit its cap at horizon {} with Cauchy gap {}",
                ctx.horizon_p(),
                ctx.cauchy_gap()
            ),
        });
    }
    let isometry = match split {
        Some(split) => {
            match quotient_p_isometry_check(ctx, split, params.sample_count, params.seed) {
                Ok(report) => {
                    if !report.pass {
                        notes.push(Note {
                            stage: "norms",
                            severity: ExitStatus::Fail,
                            message: format!(
                                "limit gauge failed its quotient checks: isometry deviation {}, \
                                 well-definedness deviation {} (tolerance {})",
                                report.max_isometry_dev,
                                report.max_welldefinedness_dev,
                                report.tolerance
                            ),
                        });
                    }
                    json!({
                        "sample_count": report.sample_count,
                        "max_isometry_dev": report.max_isometry_dev,
                        "max_welldefinedness_dev": report.max_welldefinedness_dev,
                        "tolerance": report.tolerance,
                        "pass": report.pass,
                    })
                }
                Err(e) => {
                    notes.push(Note {
                        stage: "norms",
                        severity: classify_error(&e),
                        message: format!("{e}"),
                    });
                    Value::Null
                }
            }
        }
        None => Value::Null,
    };
    Ok(json!({
        "c_hat": ctx.c_hat(),
        "horizon_sup": ctx.horizon_sup(),
        "horizon_p": ctx.horizon_p(),
        "cauchy_gap": ctx.cauchy_gap(),
        "cauchy_converged": cauchy_converged,
        "isometry": isometry,
    }))
}

fn run_slow_stage(
    ctx: &Option<NormContext>,
    split: &Option<StableSplit>,
    params: &crate::scenario::Parameters,
    notes: &mut Vec<Note>,
) -> anyhow::Result<Value> {
    let (Some(ctx), Some(split)) = (ctx, split) else {
        return Ok(Value::Null);
    };

    let mut certificate = None;
    let mut no_slow_vectors = None;
    let mut cesaro_fixed = Value::Null;
    match synthesize_slow(ctx, split, params.epsilon) {
        Ok(cert) => {
            no_slow_vectors = Some(false);
            // Averaged-vector check: pick the largest averaging length the
            // certificate budget supports under the drift target.
            let m = ((CESARO_FIXED_DELTA / cert.epsilon).floor() as usize).saturating_sub(2);
            if m >= 1 && cert.epsilon <= CESARO_FIXED_DELTA / (m as f64 + 2.0) {
                match cesaro_fixed_check(ctx, &cert, CESARO_FIXED_DELTA, m, params.horizon) {
                    Ok(report) => {
                        if !report.pass {
                            notes.push(Note {
                                stage: "slow",
                                severity: ExitStatus::Fail,
                                message: format!(
                                    "averaging drifted by {} over budget {} at m = {}",
                                    report.drift, report.delta, report.m
                                ),
                            });
                        }
                        cesaro_fixed = serde_json::to_value(CesaroFixedJson::from_report(&report))?;
                    }
                    Err(e) => notes.push(Note {
                        stage: "slow",
                        severity: classify_error(&e),
                        message: format!("{e}"),
                    }),
                }
            }
            certificate = Some(cert);
        }
        Err(CoreError::NoSlowVectors) => no_slow_vectors = Some(true),
        Err(e) => notes.push(Note {
            stage: "slow",
            severity: classify_error(&e),
            message: format!("{e}"),
        }),
    }

    let mut subspaces = Vec::new();
    for cluster in peripheral_clusters(&split.peripheral_eigvals) {
        match slow_subspace(
            ctx,
            split,
            cluster.rep,
            params.epsilon,
            cluster.count,
            params.sphere_samples,
            params.seed,
        ) {
            Ok(sub) => subspaces.push(serde_json::to_value(SlowSubspaceJson::from_subspace(&sub))?),
            Err(e) => {
                notes.push(Note {
                    stage: "slow",
                    severity: classify_error(&e),
                    message: format!("subspace at {}: {e}", cluster.rep),
                });
                subspaces.push(json!({
                    "lambda": ComplexJson::from(cluster.rep),
                    "error": format!("{e}"),
                }));
            }
        }
    }

    Ok(json!({
        "no_slow_vectors": no_slow_vectors,
        "certificate": certificate
            .as_ref()
            .map(CertificateJson::from_certificate)
            .map(serde_json::to_value)
            .transpose()?,
        "cesaro_fixed": cesaro_fixed,
        "subspaces": subspaces,
    }))
}

fn run_attractor_stage(
    op: &Operator,
    k: &Compactum,
    params: &crate::scenario::Parameters,
    notes: &mut Vec<Note>,
) -> anyhow::Result<(Value, Option<slowvec_core::attractor::AttractionReport>)> {
    let star = match check_star_condition(
        op,
        k,
        params.alpha,
        params.sample_count,
        params.horizon,
        params.seed,
    ) {
        Ok(report) => report,
        Err(e) => {
            notes.push(Note {
                stage: "attractor",
                severity: classify_error(&e),
                message: format!("{e}"),
            });
            return Ok((Value::Null, None));
        }
    };
    if !star.passes() {
        notes.push(Note {
            stage: "attractor",
            severity: ExitStatus::Inconclusive,
            message: format!(
                "{} of {} sampled orbits stayed above distance {} for the whole horizon",
                star.horizon_limited(),
                star.samples.len(),
                star.alpha
            ),
        });
    }

    // Peel a few greedy layers off the first attracted sample to exhibit
    // the geometric decomposition concretely.
    let mut greedy = Value::Null;
    if star.passes() {
        let x = &star.samples[0].x;
        match greedy_decompose(op, k, params.alpha, x, GREEDY_STEPS, params.horizon) {
            Ok(d) => greedy = serde_json::to_value(GreedyJson::from_decomposition(&d))?,
            Err(e) => notes.push(Note {
                stage: "attractor",
                severity: classify_error(&e),
                message: format!("greedy decomposition: {e}"),
            }),
        }
    }

    let value = json!({
        "star": serde_json::to_value(AttractionJson::from_report(&star))?,
        "greedy": greedy,
    });
    Ok((value, Some(star)))
}

fn run_ergodic_stage(
    op: &Operator,
    split: &Option<StableSplit>,
    notes: &mut Vec<Note>,
) -> anyhow::Result<Value> {
    let Some(split) = split else {
        return Ok(Value::Null);
    };
    let mut projections = Vec::new();
    for cluster in peripheral_clusters(&split.peripheral_eigvals) {
        match ergodic_projection(op, cluster.rep, ERGODIC_TOL, ERGODIC_M_CAP) {
            Ok(proj) => {
                projections.push(serde_json::to_value(ErgodicProjectionJson::from_projection(&proj))?)
            }
            Err(e) => {
                notes.push(Note {
                    stage: "ergodic",
                    severity: classify_error(&e),
                    message: format!("projection at {}: {e}", cluster.rep),
                });
            }
        }
    }
    Ok(json!({ "projections": projections }))
}

/// Fold the summary's verdicts and stage errors into triage notes.
///
/// The dichotomy and kernel-bound-on-slow verdicts are unconditional laws:
/// their failure is a hard failure.  The hull-dependent verdicts (covering
/// bound, attraction-implies-flattening) and a failed attraction scan are
/// statements about the supplied hull whose negative outcomes are
/// budget-limited observations, so they triage as inconclusive.
fn triage_summary(summary: &slowvec_core::ergodic::AsymptoticSummary, notes: &mut Vec<Note>) {
    for (stage, message) in &summary.stage_errors {
        notes.push(Note {
            stage: "asymptotic_report",
            severity: classify_message(message),
            message: format!("{stage}: {message}"),
        });
    }
    if let Some(star) = &summary.star {
        if !star.passes() {
            notes.push(Note {
                stage: "asymptotic_report",
                severity: ExitStatus::Inconclusive,
                message: format!(
                    "attraction scan: {} of {} sampled orbits never reached distance {}",
                    star.horizon_limited(),
                    star.samples.len(),
                    star.alpha
                ),
            });
        }
    }
    for finding in &summary.peripheral {
        if let Some(flat) = &finding.flattening {
            if !flat.passes() {
                notes.push(Note {
                    stage: "asymptotic_report",
                    severity: ExitStatus::Inconclusive,
                    message: format!(
                        "no averaging length up to the cap flattened the tail at {} \
                         (best value {})",
                        finding.lambda, flat.value
                    ),
                });
            }
        }
    }
    for verdict in &summary.verdicts {
        if verdict.holds {
            continue;
        }
        let severity = match verdict.name {
            "kkm-kernel-bound" | "attraction-implies-flattening" => ExitStatus::Inconclusive,
            _ => ExitStatus::Fail,
        };
        notes.push(Note {
            stage: "asymptotic_report",
            severity,
            message: format!("verdict {} failed: {}", verdict.name, verdict.detail),
        });
    }
}
