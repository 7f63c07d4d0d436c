use rayon::prelude::*;

use crate::group::{Aperiodicity, GroupElement};
use crate::scalar::Scalar;
use crate::translation::{OrbitProfile, WeightedTranslation, DIRECT_PRODUCT_MAX};

use super::report::{ConditionReport, Mode, Refusal, TraceRow, Verdict};
use super::scenario::Scenario;
use super::DynamicsError;

/// Largest last-two-terms ratio for which a chaos tail is estimated geometrically.
pub const TAIL_RATIO_MAX: f64 = 0.99;

/// Truncated chaos series `Σ_{t=1}^{terms} (φ_{t·step}(x) + φ̃_{t·step}(x))`
/// at one point, plus a geometric tail from the ratio of the last two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosSum<S> {
    pub partial: S,
    pub tail: S,
    /// `false` when the ratio is at least [`TAIL_RATIO_MAX`]; `partial` is then a lower bound.
    pub certified: bool,
}

impl<S: Scalar> ChaosSum<S> {
    pub fn value(&self) -> S {
        self.partial + self.tail
    }

    /// Needs a profile of length at least `step * terms`.
    pub fn from_profile(profile: &OrbitProfile<S>, step: usize, terms: usize) -> Self {
        let term = |t: usize| profile.phi(t * step) + profile.phi_tilde(t * step);
        let partial = (1..=terms).fold(S::zero(), |acc, t| acc + term(t));
        if terms < 2 {
            return Self { partial, tail: S::zero(), certified: false };
        }
        let (prev, last) = (term(terms - 1), term(terms));
        if last == S::zero() {
            return Self { partial, tail: S::zero(), certified: true };
        }
        let rho = last / prev;
        if prev > S::zero() && rho < S::lit(TAIL_RATIO_MAX) {
            Self { partial, tail: last * rho / (S::one() - rho), certified: true }
        } else {
            Self { partial, tail: S::zero(), certified: false }
        }
    }
}

/// The chaos series of `op` at `x` with step `step`.
pub fn chaos_sum<S: Scalar>(
    op: &WeightedTranslation<S>,
    x: &GroupElement,
    step: usize,
    terms: usize,
) -> ChaosSum<S> {
    ChaosSum::from_profile(&op.orbit_profile(x, step * terms), step, terms)
}

/// One traced quantity. Operator indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    /// `φ_{l, r_l n}`.
    Phi(usize),
    /// `φ̃_{l, r_l n}`.
    PhiTilde(usize),
    /// `φ̃_{s,(r_l−r_s)n} · φ̃_{l,r_l n} / φ̃_{s,r_l n}`.
    CrossTilde(usize, usize),
    /// `φ_{l,(r_l−r_s)n} · φ̃_{s,r_s n} / φ̃_{l,r_s n}`.
    CrossPhi(usize, usize),
    /// `φ̃_{(r_l−r_s)n}` of the shared weight.
    SameTilde(usize, usize),
    /// `φ_{(r_l−r_s)n}` of the shared weight.
    SamePhi(usize, usize),
    /// Chaos series of operator `l` with step `r_l n`.
    Chaos(usize),
}

impl Column {
    fn name(self) -> String {
        match self {
            Column::Phi(l) => format!("phi_{}", l + 1),
            Column::PhiTilde(l) => format!("phi_tilde_{}", l + 1),
            Column::CrossTilde(s, l) => format!("cross_tilde_{}_{}", s + 1, l + 1),
            Column::CrossPhi(s, l) => format!("cross_phi_{}_{}", s + 1, l + 1),
            Column::SameTilde(s, l) => format!("same_tilde_{}_{}", s + 1, l + 1),
            Column::SamePhi(s, l) => format!("same_phi_{}_{}", s + 1, l + 1),
            Column::Chaos(l) => format!("chaos_{}", l + 1),
        }
    }
}

fn pairs(l: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..l).flat_map(move |s| (s + 1..l).map(move |t| (s, t)))
}

fn transitive_columns(l: usize) -> Vec<Column> {
    let mut cols: Vec<Column> = (0..l).map(Column::Phi).collect();
    cols.extend((0..l).map(Column::PhiTilde));
    for (s, t) in pairs(l) {
        cols.push(Column::CrossTilde(s, t));
        cols.push(Column::CrossPhi(s, t));
    }
    cols
}

/// `a · b / c` directly when every factor is a short product, otherwise from logarithms.
fn ratio<S: Scalar>(direct: bool, a: (S, S), b: (S, S), c: (S, S)) -> S {
    if direct {
        let v = a.0 * b.0 / c.0;
        if v.is_finite() && c.0 > S::zero() {
            return v;
        }
    }
    (a.1 + b.1 - c.1).exp()
}

/// `(φ̃_m, ln φ̃_m)`; the direct value is only formed for short products.
fn tilde<S: Scalar>(p: &OrbitProfile<S>, m: usize) -> (S, S) {
    let direct = if m <= DIRECT_PRODUCT_MAX { p.phi_tilde(m) } else { S::nan() };
    (direct, p.ln_phi_tilde(m))
}

/// `(φ_m, ln φ_m)`, as for [`tilde`].
fn forward<S: Scalar>(p: &OrbitProfile<S>, m: usize) -> (S, S) {
    let direct = if m <= DIRECT_PRODUCT_MAX { p.phi(m) } else { S::nan() };
    (direct, p.ln_phi(m))
}

struct Sweep<'a, S> {
    scenario: &'a Scenario<S>,
    ops: &'a [WeightedTranslation<S>],
    columns: Vec<Column>,
    /// Orbit length sampled per operator; zero for unused operators.
    lens: Vec<usize>,
}

/// Per-`n` aggregates over `K`, flattened `n`-major.
struct Agg<S> {
    sup_all: Vec<S>,
    sup_pass: Vec<S>,
    fail: Vec<usize>,
    uncertified: Vec<bool>,
    w_sup: Vec<S>,
}

impl<S: Scalar> Agg<S> {
    fn empty(n_max: usize, q: usize, ops: usize) -> Self {
        Self {
            sup_all: vec![S::zero(); n_max * q],
            sup_pass: vec![S::zero(); n_max * q],
            fail: vec![0; n_max],
            uncertified: vec![false; n_max],
            w_sup: vec![S::zero(); ops],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        let max_into = |a: &mut Vec<S>, b: &[S]| a.iter_mut().zip(b).for_each(|(x, &y)| *x = x.max(y));
        max_into(&mut self.sup_all, &other.sup_all);
        max_into(&mut self.sup_pass, &other.sup_pass);
        max_into(&mut self.w_sup, &other.w_sup);
        self.fail.iter_mut().zip(&other.fail).for_each(|(x, y)| *x += y);
        self.uncertified.iter_mut().zip(&other.uncertified).for_each(|(x, y)| *x |= y);
        self
    }
}

impl<'a, S: Scalar> Sweep<'a, S> {
    fn value(&self, col: Column, prof: &[Option<OrbitProfile<S>>], n: usize) -> (S, bool) {
        let r = &self.scenario.powers;
        let p = |l: usize| prof[l].as_ref().expect("profile for active operator");
        match col {
            Column::Phi(l) => (p(l).phi(r[l] * n), true),
            Column::PhiTilde(l) => (p(l).phi_tilde(r[l] * n), true),
            Column::CrossTilde(s, l) => {
                let (short, long) = ((r[l] - r[s]) * n, r[l] * n);
                let direct = long <= DIRECT_PRODUCT_MAX;
                (ratio(direct, tilde(p(s), short), tilde(p(l), long), tilde(p(s), long)), true)
            }
            Column::CrossPhi(s, l) => {
                let (gap, low) = ((r[l] - r[s]) * n, r[s] * n);
                let direct = gap.max(low) <= DIRECT_PRODUCT_MAX;
                (ratio(direct, forward(p(l), gap), tilde(p(s), low), tilde(p(l), low)), true)
            }
            Column::SameTilde(s, l) => (p(s).phi_tilde((r[l] - r[s]) * n), true),
            Column::SamePhi(s, l) => (p(s).phi((r[l] - r[s]) * n), true),
            Column::Chaos(l) => {
                let c = ChaosSum::from_profile(p(l), r[l] * n, self.scenario.chaos_terms);
                (c.value(), c.certified)
            }
        }
    }

    fn point(&self, x: &GroupElement) -> Agg<S> {
        let (n_max, q) = (self.scenario.n_max, self.columns.len());
        let mut agg = Agg::empty(n_max, q, self.ops.len());
        let prof: Vec<Option<OrbitProfile<S>>> = self
            .ops
            .iter()
            .zip(&self.lens)
            .map(|(op, &len)| (len > 0).then(|| op.orbit_profile(x, len)))
            .collect();
        for (l, p) in prof.iter().enumerate() {
            if let Some(p) = p {
                agg.w_sup[l] = p.max_weight();
            }
        }
        let eps = self.scenario.epsilon;
        for n in 1..=n_max {
            let row = (n - 1) * q;
            let mut pass = true;
            for (i, &col) in self.columns.iter().enumerate() {
                let (v, certified) = self.value(col, &prof, n);
                agg.sup_all[row + i] = v;
                pass &= certified && v < eps;
                agg.uncertified[n - 1] |= !certified;
            }
            if pass {
                agg.sup_pass[row..row + q].copy_from_slice(&agg.sup_all[row..row + q]);
            } else {
                agg.fail[n - 1] = 1;
            }
        }
        agg
    }

    fn run(&self) -> (Vec<TraceRow<S>>, Vec<S>) {
        let s = self.scenario;
        let (n_max, q) = (s.n_max, self.columns.len());
        let points: Vec<&GroupElement> = s.k.iter().collect();
        let agg = points
            .par_iter()
            .map(|x| self.point(x))
            .reduce(|| Agg::empty(n_max, q, self.ops.len()), Agg::merge);

        let mass = s.model.cell_mass::<S>();
        let rows = (1..=n_max)
            .map(|n| {
                let (fail, at) = (agg.fail[n - 1], (n - 1) * q);
                let deficit = S::from_usize(fail).unwrap() * mass;
                let all = || agg.sup_all[at..at + q].to_vec();
                if fail == 0 {
                    TraceRow { n, values: all(), e_k_deficit: S::zero(), accepted: true, lower_bound: false }
                } else if deficit <= s.deficit_cap && fail < points.len() {
                    TraceRow {
                        n,
                        values: agg.sup_pass[at..at + q].to_vec(),
                        e_k_deficit: deficit,
                        accepted: true,
                        lower_bound: false,
                    }
                } else {
                    TraceRow {
                        n,
                        values: all(),
                        e_k_deficit: S::zero(),
                        accepted: false,
                        lower_bound: agg.uncertified[n - 1],
                    }
                }
            })
            .collect();
        (rows, agg.w_sup)
    }
}

/// Shared driver: pre-checks, sweep, first accepted `n`.
fn evaluate<S: Scalar>(
    s: &Scenario<S>,
    mode: Mode,
    ops: &[WeightedTranslation<S>],
    columns: Vec<Column>,
    lens: Vec<usize>,
    probe: usize,
) -> Result<ConditionReport<S>, DynamicsError> {
    let mut report = ConditionReport {
        mode,
        verdict: Verdict::NotVerifiedWithinBound,
        columns: columns.iter().map(|c| c.name()).collect(),
        rows: Vec::new(),
        aperiodicity: None,
        sub_verdicts: Vec::new(),
        general_verdict: None,
        notes: Vec::new(),
    };
    if let Ok(d) = s.phi.delta2_check(S::lit(1.0e-3), S::lit(1.0e3), 200) {
        if !d.regular {
            report.notes.push(format!(
                "Φ fails the sampled Δ₂ diagnostic on [{}, {}] (M ≈ {}): the Orlicz space may lack separability",
                d.t_lo, d.t_hi, d.m_delta
            ));
        }
    }

    let aperiodicity = s.model.aperiodicity_bound(&s.a, &s.k, probe.max(1) as u64)?;
    report.aperiodicity = Some(aperiodicity);
    let refusal = match aperiodicity {
        Aperiodicity::Periodic { order } => Some(Refusal::Periodic { order }),
        Aperiodicity::NotAperiodicWithinBound => Some(Refusal::NotAperiodicWithinBound { probe: probe as u64 }),
        Aperiodicity::Bound(_) => None,
    };

    // the trace is produced even when a diagnostic refuses the verdict
    let sweep = Sweep { scenario: s, ops, columns, lens };
    let (rows, w_sup) = sweep.run();
    report.rows = rows;
    let contraction = sweep
        .lens
        .iter()
        .zip(&w_sup)
        .enumerate()
        .find(|(_, (&len, &w))| len > 0 && w <= S::one())
        .map(|(l, (_, &w))| Refusal::WeightNotExpanding { operator: l + 1, sup: w.to_f64_lossy() });
    for r in refusal.into_iter().chain(contraction) {
        if !s.override_diagnostics {
            report.verdict = Verdict::Refused(r);
            return Ok(report);
        }
        report.notes.push(format!("diagnostic overridden: {r}"));
    }

    report.verdict = report
        .rows
        .iter()
        .find(|r| r.accepted)
        .map_or(Verdict::NotVerifiedWithinBound, |r| Verdict::Verified { n: r.n });
    Ok(report)
}

fn prepare<S: Scalar>(s: &Scenario<S>, min_ops: usize) -> Result<Vec<WeightedTranslation<S>>, DynamicsError> {
    s.validate()?;
    if s.num_operators() < min_ops {
        return Err(DynamicsError::TooFewOperators { needed: min_ops, got: s.num_operators() });
    }
    s.operators()
}

/// Searches `n ≤ n_max` for which every `φ_{l,r_l n}`, `φ̃_{l,r_l n}` and
/// every cross term is below ε on `E_n`.
pub fn check_disjoint_transitive<S: Scalar>(s: &Scenario<S>) -> Result<ConditionReport<S>, DynamicsError> {
    let ops = prepare(s, 2)?;
    let reach = s.max_power() * s.n_max;
    let lens = vec![reach; ops.len()];
    evaluate(s, Mode::DisjointTransitive, &ops, transitive_columns(ops.len()), lens, reach)
}

/// The reduced test for `w_1 = … = w_L`: only `φ_{(r_l−r_s)n}` and
/// `φ̃_{(r_l−r_s)n}` appear as cross terms. Also records the general verdict.
pub fn check_same_weight<S: Scalar>(s: &Scenario<S>) -> Result<ConditionReport<S>, DynamicsError> {
    let ops = prepare(s, 2)?;
    if s.weights.iter().any(|w| w != &s.weights[0]) {
        return Ok(ConditionReport {
            mode: Mode::SameWeight,
            verdict: Verdict::Refused(Refusal::WeightsDiffer),
            columns: Vec::new(),
            rows: Vec::new(),
            aperiodicity: None,
            sub_verdicts: Vec::new(),
            general_verdict: None,
            notes: Vec::new(),
        });
    }
    let l = ops.len();
    let mut columns: Vec<Column> = (0..l).map(Column::Phi).collect();
    columns.extend((0..l).map(Column::PhiTilde));
    for (s_, t) in pairs(l) {
        columns.push(Column::SameTilde(s_, t));
        columns.push(Column::SamePhi(s_, t));
    }
    let reach = s.max_power() * s.n_max;
    let mut report = evaluate(s, Mode::SameWeight, &ops, columns, vec![reach; l], reach)?;
    let general = check_disjoint_transitive(s)?.verdict;
    if general != report.verdict {
        report.notes.push(format!("general checker disagrees: {general}"));
    }
    report.general_verdict = Some(general);
    Ok(report)
}

/// Verified at `n_tail` when the transitivity conditions hold for every
/// `n ∈ [n_tail, n_max]` and that window is at least the scenario's mixing window.
pub fn check_disjoint_mixing<S: Scalar>(s: &Scenario<S>) -> Result<ConditionReport<S>, DynamicsError> {
    let ops = prepare(s, 2)?;
    let reach = s.max_power() * s.n_max;
    let lens = vec![reach; ops.len()];
    let mut report = evaluate(s, Mode::DisjointMixing, &ops, transitive_columns(ops.len()), lens, reach)?;
    if report.verdict.is_verified() {
        let tail = report.rows.iter().rev().take_while(|r| r.accepted).count();
        report.verdict = if tail >= s.mixing_window() {
            Verdict::Verified { n: s.n_max + 1 - tail }
        } else {
            Verdict::NotVerifiedWithinBound
        };
    }
    Ok(report)
}

/// Chaos of the single operator `T_{a,w_l}^{r_l}` (0-based `operator`): the
/// series `Σ_t (φ_{t r_l n} + φ̃_{t r_l n})` must be below ε on `E_n`.
pub fn check_chaotic<S: Scalar>(s: &Scenario<S>, operator: usize) -> Result<ConditionReport<S>, DynamicsError> {
    let ops = prepare(s, 1)?;
    if operator >= ops.len() {
        return Err(DynamicsError::InvalidScenario(format!(
            "operator index {operator} out of range for {} weights",
            ops.len()
        )));
    }
    let reach = s.powers[operator] * s.n_max;
    let mut lens = vec![0; ops.len()];
    lens[operator] = reach * s.chaos_terms;
    let columns = vec![Column::Phi(operator), Column::PhiTilde(operator), Column::Chaos(operator)];
    evaluate(s, Mode::Chaotic { operator }, &ops, columns, lens, reach)
}

/// Every operator's chaos series and every transitivity cross term must be
/// below ε at a common `n`. Per-operator chaos verdicts go in `sub_verdicts`.
pub fn check_disjoint_chaotic<S: Scalar>(s: &Scenario<S>) -> Result<ConditionReport<S>, DynamicsError> {
    let ops = prepare(s, 2)?;
    let l = ops.len();
    let reach = s.max_power() * s.n_max;
    let lens = s.powers.iter().map(|&r| (r * s.n_max * s.chaos_terms).max(reach)).collect();
    let mut columns = transitive_columns(l);
    columns.extend((0..l).map(Column::Chaos));
    let mut report = evaluate(s, Mode::DisjointChaotic, &ops, columns, lens, reach)?;
    for op in 0..l {
        report.sub_verdicts.push((op + 1, check_chaotic(s, op)?.verdict));
    }
    Ok(report)
}
