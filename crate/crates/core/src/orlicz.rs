//! Finitely supported functions on a group: the modular, the Luxemburg norm,
//! and right translation by a point mass.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::group::{CompactSet, GroupElement, GroupError, GroupModel};
use crate::scalar::{search_rtol, Scalar};
use crate::young::YoungFunction;

const MAX_NORM_STEPS: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrliczError {
    #[error("vectors live on different group models")]
    ModelMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A finitely supported real function on a group.
///
/// The support map never stores a zero value, so `support_len` is the size of
/// the actual support and the empty map is the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczVector<S> {
    model: GroupModel,
    entries: BTreeMap<GroupElement, S>,
}

impl<S: Scalar> OrliczVector<S> {
    pub fn zero(model: GroupModel) -> Self {
        Self { model, entries: BTreeMap::new() }
    }

    /// Builds a vector from `(point, value)` pairs; repeated points are summed.
    pub fn from_entries(
        model: GroupModel,
        entries: impl IntoIterator<Item = (GroupElement, S)>,
    ) -> Result<Self, OrliczError> {
        let mut out = Self::zero(model);
        for (x, v) in entries {
            model.check(&x)?;
            out.add_at(x, v);
        }
        Ok(out)
    }

    /// `v · χ_{x}`.
    pub fn point(model: GroupModel, x: GroupElement, v: S) -> Result<Self, OrliczError> {
        Self::from_entries(model, [(x, v)])
    }

    /// The characteristic function `χ_K`.
    pub fn indicator(model: GroupModel, k: &CompactSet) -> Self {
        Self { model, entries: k.iter().map(|x| (x.clone(), S::one())).collect() }
    }

    fn add_at(&mut self, x: GroupElement, v: S) {
        match self.entries.entry(x) {
            Entry::Occupied(mut e) => {
                let sum = *e.get() + v;
                if sum == S::zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
            Entry::Vacant(e) => {
                if v != S::zero() {
                    e.insert(v);
                }
            }
        }
    }

    fn from_map(model: GroupModel, entries: BTreeMap<GroupElement, S>) -> Self {
        Self { model, entries: entries.into_iter().filter(|(_, v)| *v != S::zero()).collect() }
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn get(&self, x: &GroupElement) -> S {
        self.entries.get(x).copied().unwrap_or_else(S::zero)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, S)> + '_ {
        self.entries.iter().map(|(x, v)| (x, *v))
    }

    pub fn support(&self) -> CompactSet {
        self.entries.keys().cloned().collect()
    }

    /// `max |f|`, zero for the zero vector.
    pub fn sup_abs(&self) -> S {
        self.entries.values().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: S) -> Self {
        Self::from_map(self.model, self.entries.iter().map(|(x, v)| (x.clone(), *v * c)).collect())
    }

    fn same_model(&self, other: &Self) -> Result<(), OrliczError> {
        if self.model == other.model {
            Ok(())
        } else {
            Err(OrliczError::ModelMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, OrliczError> {
        self.same_model(other)?;
        let mut entries = self.entries.clone();
        for (x, v) in &other.entries {
            let slot = entries.entry(x.clone()).or_insert_with(S::zero);
            *slot = *slot + *v;
        }
        Ok(Self::from_map(self.model, entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OrliczError> {
        self.add(&other.scale(-S::one()))
    }

    /// `f · χ_E`.
    pub fn restrict(&self, e: &CompactSet) -> Self {
        Self {
            model: self.model,
            entries: self
                .entries
                .iter()
                .filter(|(x, _)| e.contains(x))
                .map(|(x, v)| (x.clone(), *v))
                .collect(),
        }
    }

    /// Pointwise product with a function of the group element.
    pub fn pointwise(&self, g: impl Fn(&GroupElement) -> S) -> Self {
        Self::from_map(
            self.model,
            self.entries.iter().map(|(x, v)| (x.clone(), *v * g(x))).collect(),
        )
    }

    /// `∫ Φ(|f| / k) dλ`, an exact finite sum over the support.
    pub fn modular(&self, k: S, phi: &YoungFunction<S>) -> S {
        let mass = self.model.cell_mass::<S>();
        self.entries
            .values()
            .fold(S::zero(), |acc, v| acc + phi.value(v.abs() / k))
            * mass
    }

    /// Luxemburg norm `inf { k > 0 : modular(f, k) ≤ 1 }` by bracketing bisection.
    pub fn luxemburg_norm(&self, phi: &YoungFunction<S>) -> S {
        if self.entries.is_empty() {
            return S::zero();
        }
        let top = self.sup_abs();
        let mass = self.model.cell_mass::<S>();
        let two = S::lit(2.0);
        let one = S::one();

        // A single atom of height max|f| already needs k ≥ max|f| / Φ⁻¹(1/mass).
        let mut lo = match phi.inverse(one / mass) {
            Ok(t) if t > S::zero() && t.is_finite() => top / t,
            _ => top,
        };
        let mut steps = 0;
        while self.modular(lo, phi) <= one && steps < MAX_NORM_STEPS {
            lo = lo / two;
            steps += 1;
        }
        let mut hi = lo * two;
        while self.modular(hi, phi) > one && steps < MAX_NORM_STEPS {
            lo = hi;
            hi = hi * two;
            steps += 1;
        }
        let rtol = search_rtol::<S>();
        while hi - lo > rtol * hi && steps < MAX_NORM_STEPS {
            let mid = lo + (hi - lo) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.modular(mid, phi) <= one {
                hi = mid;
            } else {
                lo = mid;
            }
            steps += 1;
        }
        hi
    }

    /// `f * δ_a`, i.e. `x ↦ f(x a⁻¹)`: the support is translated right by `a`.
    pub fn convolve_point_mass(&self, a: &GroupElement) -> Result<Self, OrliczError> {
        self.model.check(a)?;
        Ok(Self {
            model: self.model,
            entries: self.entries.iter().map(|(x, v)| (self.model.op(x, a), *v)).collect(),
        })
    }

    /// Rebuilds the vector by moving each support point and rescaling its value.
    /// `step` must be injective on the support.
    pub(crate) fn transport(
        &self,
        step: impl Fn(&GroupElement, S) -> (GroupElement, S),
    ) -> Self {
        Self::from_map(self.model, self.entries.iter().map(|(x, v)| step(x, *v)).collect())
    }
}
