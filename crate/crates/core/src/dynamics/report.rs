use std::fmt;

use crate::group::Aperiodicity;

/// Which characterization a report answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    DisjointTransitive,
    SameWeight,
    DisjointMixing,
    /// Single operator, 0-based index into the scenario's weights.
    Chaotic { operator: usize },
    DisjointChaotic,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::DisjointTransitive => "disjoint_transitive",
            Mode::SameWeight => "same_weight",
            Mode::DisjointMixing => "disjoint_mixing",
            Mode::Chaotic { .. } => "chaotic",
            Mode::DisjointChaotic => "disjoint_chaotic",
        }
    }
}

/// Why a checker declined to search.
#[derive(Debug, Clone, PartialEq)]
pub enum Refusal {
    /// `a^order = e`.
    Periodic { order: u64 },
    /// `K ∩ K a^{±n}` is still nonempty at the probe bound.
    NotAperiodicWithinBound { probe: u64 },
    /// `sup w_l ≤ 1` over the explored region; `operator` is 1-based.
    WeightNotExpanding { operator: usize, sup: f64 },
    /// The reduced same-weight checker was given distinct weights.
    WeightsDiffer,
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refusal::Periodic { order } => write!(
                f,
                "a is not aperiodic: a^{order} = e, so the weighted translations are not transitive"
            ),
            Refusal::NotAperiodicWithinBound { probe } => write!(
                f,
                "a is not aperiodic on K within the probe bound: K ∩ K a^±n is nonempty at n = {probe}"
            ),
            Refusal::WeightNotExpanding { operator, sup } => write!(
                f,
                "‖w_{operator}‖_∞ ≤ 1 over the explored region (sup = {sup}): the operator has norm ≤ 1 and is never transitive"
            ),
            Refusal::WeightsDiffer => write!(f, "same-weight checker requires identical weights"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The conditions hold at `n` (for mixing: at every `n` from here to `n_max`).
    Verified { n: usize },
    /// No accepted `n` up to `n_max`. This is not a disproof.
    NotVerifiedWithinBound,
    Refused(Refusal),
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Verified { .. } => "verified",
            Verdict::NotVerifiedWithinBound => "not_verified_within_bound",
            Verdict::Refused(_) => "refused",
        }
    }

    pub fn n(&self) -> Option<usize> {
        match self {
            Verdict::Verified { n } => Some(*n),
            _ => None,
        }
    }

    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Verified { n } => write!(f, "verified at n = {n}"),
            Verdict::NotVerifiedWithinBound => write!(f, "not verified within bound"),
            Verdict::Refused(r) => write!(f, "refused: {r}"),
        }
    }
}

/// One `n` of a condition sweep: every sup quantity over the reported `E_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<S> {
    pub n: usize,
    pub values: Vec<S>,
    /// `λ(K \ E_n)`.
    pub e_k_deficit: S,
    /// Every quantity is below ε on `E_n`, and the deficit is within the cap.
    pub accepted: bool,
    /// A chaos sum in this row lacks a certified tail and is only a partial sum.
    pub lower_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<S> {
    pub mode: Mode,
    pub verdict: Verdict,
    pub columns: Vec<String>,
    pub rows: Vec<TraceRow<S>>,
    pub aperiodicity: Option<Aperiodicity>,
    /// Per-operator chaos verdicts (1-based operator index) for the disjoint chaos mode.
    pub sub_verdicts: Vec<(usize, Verdict)>,
    /// The general checker's verdict, recorded by the same-weight checker.
    pub general_verdict: Option<Verdict>,
    pub notes: Vec<String>,
}

impl<S: Copy> ConditionReport<S> {
    pub fn n_star(&self) -> Option<usize> {
        self.verdict.n()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// The trace of one quantity, indexed like `rows`.
    pub fn column(&self, name: &str) -> Option<Vec<S>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    pub fn row(&self, n: usize) -> Option<&TraceRow<S>> {
        self.rows.iter().find(|r| r.n == n)
    }
}
