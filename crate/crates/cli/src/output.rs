//! `report.json` and `trace.csv`.

use orlicz_dyn::dynamics::{Verdict, WitnessResiduals};
use orlicz_dyn::{Aperiodicity, ConditionReport};
use serde::Serialize;

/// Significant digits written for every CSV value.
pub const CSV_DIGITS: usize = 15;

/// C-style `%.{digits}g`: shortest of fixed and scientific notation for the
/// given number of significant digits, trailing zeros removed.
pub fn format_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Header `n, <quantities…>, e_k_deficit, accepted` and one row per `n`.
pub fn trace_csv(report: &ConditionReport) -> String {
    let mut out = String::from("n");
    for c in &report.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push_str(",e_k_deficit,accepted\n");
    for row in &report.rows {
        out.push_str(&row.n.to_string());
        for &v in &row.values {
            out.push(',');
            out.push_str(&format_g(v, CSV_DIGITS));
        }
        out.push(',');
        out.push_str(&format_g(row.e_k_deficit, CSV_DIGITS));
        out.push_str(if row.accepted { ",1\n" } else { ",0\n" });
    }
    out
}

#[derive(Debug, Serialize)]
pub struct VerdictJson {
    pub verdict: &'static str,
    pub n_star: Option<usize>,
    pub reason: Option<String>,
}

impl From<&Verdict> for VerdictJson {
    fn from(v: &Verdict) -> Self {
        Self {
            verdict: v.as_str(),
            n_star: v.n(),
            reason: match v {
                Verdict::Refused(r) => Some(r.to_string()),
                _ => None,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SubVerdictJson {
    pub operator: usize,
    #[serde(flatten)]
    pub verdict: VerdictJson,
}

#[derive(Debug, Serialize)]
pub struct AperiodicityJson {
    pub status: &'static str,
    pub bound: Option<u64>,
    pub order: Option<u64>,
}

impl From<&Aperiodicity> for AperiodicityJson {
    fn from(a: &Aperiodicity) -> Self {
        match *a {
            Aperiodicity::Bound(m) => Self { status: "bound", bound: Some(m), order: None },
            Aperiodicity::NotAperiodicWithinBound => {
                Self { status: "not_aperiodic_within_bound", bound: None, order: None }
            }
            Aperiodicity::Periodic { order } => Self { status: "periodic", bound: None, order: Some(order) },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub n: usize,
    pub rho0: f64,
    pub rho: Vec<f64>,
    pub max_residual: f64,
}

impl WitnessJson {
    pub fn new(n: usize, r: &WitnessResiduals<f64>) -> Self {
        Self { n, rho0: r.rho0, rho: r.rho.clone(), max_residual: r.max() }
    }
}

#[derive(Debug, Serialize)]
pub struct TraceRowJson {
    pub n: usize,
    pub values: Vec<f64>,
    pub e_k_deficit: f64,
    pub accepted: bool,
    pub lower_bound: bool,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub mode: String,
    #[serde(flatten)]
    pub verdict: VerdictJson,
    pub epsilon: f64,
    pub n_max: usize,
    pub operators: usize,
    pub powers: Vec<usize>,
    pub aperiodicity: Option<AperiodicityJson>,
    pub general_verdict: Option<VerdictJson>,
    pub sub_verdicts: Vec<SubVerdictJson>,
    pub witness: Option<WitnessJson>,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub trace: Vec<TraceRowJson>,
}

impl ReportJson {
    pub fn new(mode: &str, verdict: &Verdict, report: &ConditionReport, scenario: &orlicz_dyn::Scenario) -> Self {
        Self {
            mode: mode.to_string(),
            verdict: verdict.into(),
            epsilon: scenario.epsilon,
            n_max: scenario.n_max,
            operators: scenario.num_operators(),
            powers: scenario.powers.clone(),
            aperiodicity: report.aperiodicity.as_ref().map(Into::into),
            general_verdict: report.general_verdict.as_ref().map(Into::into),
            sub_verdicts: report
                .sub_verdicts
                .iter()
                .map(|(op, v)| SubVerdictJson { operator: *op, verdict: v.into() })
                .collect(),
            witness: None,
            notes: report.notes.clone(),
            columns: report.columns.clone(),
            trace: report
                .rows
                .iter()
                .map(|r| TraceRowJson {
                    n: r.n,
                    values: r.values.clone(),
                    e_k_deficit: r.e_k_deficit,
                    accepted: r.accepted,
                    lower_bound: r.lower_bound,
                })
                .collect(),
        }
    }
}

/// Exit status for a verdict: 0 verified, 2 not verified, 3 refused.
pub fn exit_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Verified { .. } => 0,
        Verdict::NotVerifiedWithinBound => 2,
        Verdict::Refused(_) => 3,
    }
}
