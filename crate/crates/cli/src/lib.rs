//! Batch runner: reads an experiment file, runs one checker, writes
//! `report.json` and `trace.csv`, and maps the verdict to an exit status.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use orlicz_dyn::dynamics::{
    build_witness, check_chaotic, check_disjoint_chaotic, check_disjoint_mixing, check_disjoint_transitive,
    check_same_weight, verify_witness, Verdict,
};
use orlicz_dyn::{ConditionReport, Scenario};

use config::{ExperimentConfig, Format, ModeName};
use output::{exit_code, trace_csv, ReportJson, WitnessJson};

/// Environment variable capping the worker pool; `0` or unset means one worker per core.
pub const THREADS_ENV: &str = "ORLICZ_DYN_THREADS";

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub override_diagnostics: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub exit_code: u8,
    pub summary: String,
    pub warnings: Vec<String>,
    pub written: Vec<PathBuf>,
}

/// Sizes the global rayon pool from [`THREADS_ENV`]. Only the first call has an effect.
pub fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("{THREADS_ENV}={raw:?} is not a worker count"))?;
    if n > 0 {
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

struct Evaluation {
    verdict: Verdict,
    report: ConditionReport,
    witness: Option<WitnessJson>,
}

fn evaluate(cfg: &ExperimentConfig, s: &Scenario) -> Result<Evaluation> {
    let plain = |report: ConditionReport| Evaluation { verdict: report.verdict.clone(), report, witness: None };
    Ok(match cfg.mode {
        ModeName::DisjointTransitive => plain(check_disjoint_transitive(s)?),
        ModeName::SameWeight => plain(check_same_weight(s)?),
        ModeName::DisjointMixing => plain(check_disjoint_mixing(s)?),
        ModeName::Chaotic => plain(check_chaotic(s, cfg.operator.unwrap_or(1) - 1)?),
        ModeName::DisjointChaotic => plain(check_disjoint_chaotic(s)?),
        ModeName::Witness => witness(cfg, s)?,
    })
}

/// Builds `v` at the configured `n` (or the transitivity checker's `n*`) and
/// verifies it when every residual is below ε.
fn witness(cfg: &ExperimentConfig, s: &Scenario) -> Result<Evaluation> {
    let report = check_disjoint_transitive(s)?;
    let spec = cfg.witness.clone().unwrap_or_default();
    let n = match (spec.n, &report.verdict) {
        (_, Verdict::Refused(_)) => return Ok(Evaluation { verdict: report.verdict.clone(), report, witness: None }),
        (Some(n), _) => n,
        (None, Verdict::Verified { n }) => *n,
        (None, _) => return Ok(Evaluation { verdict: Verdict::NotVerifiedWithinBound, report, witness: None }),
    };
    let m = s.model;
    let e = match &spec.e {
        Some(e) => config::set(&m, e).context("field `witness.E`")?,
        None => s.k.clone(),
    };
    let mut rng = config::rng(cfg.seed);
    let f = match &spec.f {
        Some(f) => config::vector(&m, f).context("field `witness.f`")?,
        None => config::random_vector(&m, &s.k, &mut rng),
    };
    let targets = match &spec.targets {
        Some(ts) => ts
            .iter()
            .enumerate()
            .map(|(i, t)| config::vector(&m, t).with_context(|| format!("field `witness.targets[{i}]`")))
            .collect::<Result<Vec<_>>>()?,
        None => (0..s.num_operators()).map(|_| config::random_vector(&m, &s.k, &mut rng)).collect(),
    };
    let v = build_witness(s, &f, &targets, n, &e)?;
    let residuals = verify_witness(s, &v, &f, &targets, n)?;
    let verdict = if residuals.max() < s.epsilon {
        Verdict::Verified { n }
    } else {
        Verdict::NotVerifiedWithinBound
    };
    Ok(Evaluation { verdict, report, witness: Some(WitnessJson::new(n, &residuals)) })
}

fn warnings(s: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    if !s.phi.is_convex() {
        out.push("Φ is not convex; the Luxemburg functional is then not a norm".to_string());
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// `check` when `trace_only` is false, `trace` otherwise.
pub fn run(opts: &RunOptions, trace_only: bool) -> Result<RunOutcome> {
    let cfg = ExperimentConfig::load(&opts.config)?;
    let scenario = cfg.build(opts.override_diagnostics)?;
    let eval = evaluate(&cfg, &scenario)?;

    let mut warnings = warnings(&scenario);
    warnings.extend(eval.report.notes.iter().filter(|n| n.contains("Δ₂")).cloned());

    let dir = opts.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let formats = if trace_only {
        vec![Format::Csv]
    } else {
        opts.formats.clone().or_else(|| cfg.formats.clone()).unwrap_or_else(|| vec![Format::Json, Format::Csv])
    };

    let mode = match cfg.mode {
        ModeName::Witness => "witness",
        _ => eval.report.mode.as_str(),
    };
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        let mut json = ReportJson::new(mode, &eval.verdict, &eval.report, &scenario);
        json.witness = eval.witness;
        for w in &warnings {
            if !json.notes.contains(w) {
                json.notes.push(w.clone());
            }
        }
        let path = dir.join("report.json");
        write(&path, &(serde_json::to_string_pretty(&json)? + "\n"))?;
        written.push(path);
    }
    if formats.contains(&Format::Csv) {
        let path = dir.join("trace.csv");
        write(&path, &trace_csv(&eval.report))?;
        written.push(path);
    }

    Ok(RunOutcome {
        exit_code: exit_code(&eval.verdict),
        summary: format!("{mode}: {}", eval.verdict),
        verdict: eval.verdict,
        warnings,
        written,
    })
}
