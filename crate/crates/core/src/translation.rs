//! Weighted translations `T_{a,w} f = w · (f * δ_a)`, their right inverses
//! `S_{a,w} h = (h / w) * δ_{a⁻¹}`, and the weight products along the orbit
//! of `a`:
//!
//! ```text
//! φ_n(x)  = ∏_{j=1}^{n}   w(x a^j)
//! φ̃_n(x) = ( ∏_{j=0}^{n-1} w(x a^{-j}) )^{-1}
//! ```
//!
//! Products of at most [`DIRECT_PRODUCT_MAX`] factors are multiplied out
//! directly. Longer ones are accumulated as sums of logarithms so that
//! `2^{-n}`-type products neither underflow nor overflow midway.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::group::{CompactSet, GroupElement, GroupError, GroupModel};
use crate::orlicz::{OrliczError, OrliczVector};
use crate::scalar::Scalar;

/// Longest product evaluated without switching to log-space.
pub const DIRECT_PRODUCT_MAX: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranslationError {
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("supremum over an empty set")]
    EmptySet,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
}

/// A positive weight `w : G → (0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight<S> {
    Constant(S),
    /// `w(x) = base^{-clamp(x_coord, lo, hi)}` on the real coordinate `coord`.
    ClampExp { base: S, coord: usize, lo: S, hi: S },
    /// Explicit values on finitely many points, `default` elsewhere.
    Table { values: BTreeMap<GroupElement, S>, default: S },
}

impl<S: Scalar> Weight<S> {
    pub fn constant(c: S) -> Result<Self, TranslationError> {
        if !(c.is_finite() && c > S::zero()) {
            return Err(TranslationError::InvalidWeight(format!("constant {c} must be > 0")));
        }
        Ok(Self::Constant(c))
    }

    pub fn clamp_exp(base: S, coord: usize, lo: S, hi: S) -> Result<Self, TranslationError> {
        if !(base.is_finite() && base > S::zero() && base != S::one()) {
            return Err(TranslationError::InvalidWeight(format!(
                "base {base} must be positive and different from 1"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(TranslationError::InvalidWeight(format!(
                "clamp interval [{lo}, {hi}] is not a finite interval"
            )));
        }
        Ok(Self::ClampExp { base, coord, lo, hi })
    }

    pub fn table(
        values: impl IntoIterator<Item = (GroupElement, S)>,
        default: S,
    ) -> Result<Self, TranslationError> {
        let values: BTreeMap<_, _> = values.into_iter().collect();
        if values.values().chain([&default]).any(|v| !(v.is_finite() && *v > S::zero())) {
            return Err(TranslationError::InvalidWeight("table values must be finite and > 0".into()));
        }
        Ok(Self::Table { values, default })
    }

    /// The weight from the Heisenberg example: `1/2` for `z ≥ 1`, `2^{-z}` for
    /// `-1 < z < 1`, `2` for `z ≤ -1`, acting on coordinate `coord`.
    pub fn step(coord: usize) -> Self {
        Self::ClampExp { base: S::lit(2.0), coord, lo: -S::one(), hi: S::one() }
    }

    pub fn eval(&self, model: &GroupModel, x: &GroupElement) -> S {
        match self {
            Self::Constant(c) => *c,
            Self::ClampExp { base, coord, lo, hi } => {
                let t = model.real_coord::<S>(x, *coord).max(*lo).min(*hi);
                base.powf(-t)
            }
            Self::Table { values, default } => values.get(x).copied().unwrap_or(*default),
        }
    }

    /// Largest weight value over the given points.
    pub fn sup_over<'a>(
        &self,
        model: &GroupModel,
        points: impl IntoIterator<Item = &'a GroupElement>,
    ) -> S {
        points.into_iter().fold(S::zero(), |m, x| m.max(self.eval(model, x)))
    }

    fn validate_for(&self, model: &GroupModel) -> Result<(), TranslationError> {
        match self {
            Self::ClampExp { coord, .. } if *coord >= model.dim() => Err(TranslationError::InvalidWeight(
                format!("coordinate index {coord} out of range for dimension {}", model.dim()),
            )),
            Self::Table { values, .. } => {
                for x in values.keys() {
                    model.check(x)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Weight values along the orbit of one point, with cached log prefix sums.
#[derive(Debug, Clone)]
pub struct OrbitProfile<S> {
    /// `w(x a^j)` for `j = 1..=len`.
    forward: Vec<S>,
    /// `w(x a^{-j})` for `j = 0..len`.
    backward: Vec<S>,
    forward_ln: Vec<S>,
    backward_ln: Vec<S>,
}

impl<S: Scalar> OrbitProfile<S> {
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `φ_m(x)`.
    pub fn phi(&self, m: usize) -> S {
        if m <= DIRECT_PRODUCT_MAX {
            self.forward[..m].iter().fold(S::one(), |p, &w| p * w)
        } else {
            self.forward_ln[m].exp()
        }
    }

    /// `φ̃_m(x)`.
    pub fn phi_tilde(&self, m: usize) -> S {
        if m <= DIRECT_PRODUCT_MAX {
            S::one() / self.backward[..m].iter().fold(S::one(), |p, &w| p * w)
        } else {
            (-self.backward_ln[m]).exp()
        }
    }

    /// Largest weight value anywhere on the sampled stretch of the orbit.
    pub fn max_weight(&self) -> S {
        self.forward.iter().chain(&self.backward).fold(S::zero(), |m, &w| m.max(w))
    }

    /// `ln φ_m(x)`, always from the log prefix sums.
    pub fn ln_phi(&self, m: usize) -> S {
        self.forward_ln[m]
    }

    /// `ln φ̃_m(x)`.
    pub fn ln_phi_tilde(&self, m: usize) -> S {
        -self.backward_ln[m]
    }
}

/// Prefix sums of `ln w`, Neumaier-compensated: `out[m] = Σ_{j<m} ln values[j]`.
fn prefix_ln<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let (mut sum, mut comp) = (S::zero(), S::zero());
    out.push(sum);
    for w in values {
        let term = w.ln();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp = comp + ((sum - t) + term);
        } else {
            comp = comp + ((term - t) + sum);
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

/// The operator pair `T_{a,w}`, `S_{a,w}` on a fixed group model.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTranslation<S> {
    model: GroupModel,
    a: GroupElement,
    a_inv: GroupElement,
    w: Weight<S>,
}

impl<S: Scalar> WeightedTranslation<S> {
    pub fn new(model: GroupModel, a: GroupElement, w: Weight<S>) -> Result<Self, TranslationError> {
        model.check(&a)?;
        w.validate_for(&model)?;
        let a_inv = model.inv(&a);
        Ok(Self { model, a, a_inv, w })
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn a(&self) -> &GroupElement {
        &self.a
    }

    pub fn weight(&self) -> &Weight<S> {
        &self.w
    }

    pub fn w(&self, x: &GroupElement) -> S {
        self.w.eval(&self.model, x)
    }

    fn check_vector(&self, f: &OrliczVector<S>) -> Result<(), TranslationError> {
        if f.model() == &self.model {
            Ok(())
        } else {
            Err(OrliczError::ModelMismatch.into())
        }
    }

    /// `T^n f`, where `(T f)(x) = w(x) f(x a⁻¹)`.
    pub fn apply_t(&self, f: &OrliczVector<S>, n: usize) -> Result<OrliczVector<S>, TranslationError> {
        self.check_vector(f)?;
        let mut out = f.clone();
        for _ in 0..n {
            out = out.transport(|y, v| {
                let target = self.model.op(y, &self.a);
                let scale = self.w(&target);
                (target, v * scale)
            });
        }
        Ok(out)
    }

    /// `S^n h`, where `(S h)(x) = h(x a) / w(x a)`.
    pub fn apply_s(&self, h: &OrliczVector<S>, n: usize) -> Result<OrliczVector<S>, TranslationError> {
        self.check_vector(h)?;
        let mut out = h.clone();
        for _ in 0..n {
            out = out.transport(|y, v| (self.model.op(y, &self.a_inv), v / self.w(y)));
        }
        Ok(out)
    }

    /// Weight values along the orbit of `x`, long enough for `φ_m`, `φ̃_m` with `m ≤ len`.
    pub fn orbit_profile(&self, x: &GroupElement, len: usize) -> OrbitProfile<S> {
        let mut forward = Vec::with_capacity(len);
        let mut y = x.clone();
        for _ in 0..len {
            y = self.model.op(&y, &self.a);
            forward.push(self.w(&y));
        }
        let mut backward = Vec::with_capacity(len);
        let mut y = x.clone();
        for _ in 0..len {
            backward.push(self.w(&y));
            y = self.model.op(&y, &self.a_inv);
        }
        let forward_ln = prefix_ln(&forward);
        let backward_ln = prefix_ln(&backward);
        OrbitProfile { forward, backward, forward_ln, backward_ln }
    }

    /// `φ_n(x) = ∏_{j=1}^{n} w(x a^j)`.
    pub fn phi_seq(&self, n: usize, x: &GroupElement) -> S {
        self.orbit_profile(x, n).phi(n)
    }

    /// `φ̃_n(x) = 1 / ∏_{j=0}^{n-1} w(x a^{-j})`.
    pub fn phi_tilde_seq(&self, n: usize, x: &GroupElement) -> S {
        self.orbit_profile(x, n).phi_tilde(n)
    }
}

/// Exact maximum of `|values|` over a finite set.
pub fn sup_on_set<S: Scalar>(
    values: impl Fn(&GroupElement) -> S,
    e: &CompactSet,
) -> Result<S, TranslationError> {
    if e.is_empty() {
        return Err(TranslationError::EmptySet);
    }
    Ok(e.iter().fold(S::zero(), |m, x| m.max(values(x).abs())))
}
