use crate::group::{CompactSet, GroupElement, GroupModel};
use crate::scalar::Scalar;
use crate::translation::{Weight, WeightedTranslation};
use crate::young::YoungFunction;

use super::DynamicsError;

/// Fewest series terms the chaos checkers accept.
pub const MIN_CHAOS_TERMS: usize = 8;

/// Everything a checker needs: the group, `Φ`, the translating element, one
/// weight and one power per operator, the compact set and the search limits.
#[derive(Debug, Clone)]
pub struct Scenario<S> {
    pub model: GroupModel,
    pub phi: YoungFunction<S>,
    pub a: GroupElement,
    pub weights: Vec<Weight<S>>,
    /// Strictly increasing powers `r_1 < … < r_L`, `r_1 ≥ 1`.
    pub powers: Vec<usize>,
    pub k: CompactSet,
    pub epsilon: S,
    pub n_max: usize,
    /// Largest measure `λ(K \ E_n)` a checker may drop from `K`. Zero means `E_n = K`.
    pub deficit_cap: S,
    /// Number of series terms summed by the chaos checkers before the tail estimate.
    pub chaos_terms: usize,
    /// Shortest tail `[n_tail, n_max]` accepted as evidence of mixing;
    /// `None` means a quarter of `n_max`.
    pub mixing_window: Option<usize>,
    /// Run the search even when the contraction or periodicity pre-checks fail.
    pub override_diagnostics: bool,
}

impl<S: Scalar> Scenario<S> {
    pub fn new(
        model: GroupModel,
        phi: YoungFunction<S>,
        a: GroupElement,
        weights: Vec<Weight<S>>,
        powers: Vec<usize>,
        k: CompactSet,
    ) -> Self {
        Self {
            model,
            phi,
            a,
            weights,
            powers,
            k,
            epsilon: S::lit(1.0e-3),
            n_max: 64,
            deficit_cap: S::zero(),
            chaos_terms: 16,
            mixing_window: None,
            override_diagnostics: false,
        }
    }

    pub fn with_epsilon(mut self, epsilon: S) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_deficit_cap(mut self, cap: S) -> Self {
        self.deficit_cap = cap;
        self
    }

    pub fn with_chaos_terms(mut self, terms: usize) -> Self {
        self.chaos_terms = terms;
        self
    }

    pub fn with_mixing_window(mut self, window: usize) -> Self {
        self.mixing_window = Some(window);
        self
    }

    pub fn with_override(mut self, on: bool) -> Self {
        self.override_diagnostics = on;
        self
    }

    pub fn num_operators(&self) -> usize {
        self.weights.len()
    }

    pub fn max_power(&self) -> usize {
        self.powers.iter().copied().max().unwrap_or(1)
    }

    pub fn mixing_window(&self) -> usize {
        self.mixing_window.unwrap_or(self.n_max.div_ceil(4)).max(1)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidScenario(msg));
        if self.weights.is_empty() {
            return bad("at least one weight is required".into());
        }
        if self.weights.len() != self.powers.len() {
            return bad(format!(
                "{} weights but {} powers",
                self.weights.len(),
                self.powers.len()
            ));
        }
        if self.powers[0] < 1 {
            return bad("powers must start at r_1 ≥ 1".into());
        }
        if self.powers.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("powers {:?} are not strictly increasing", self.powers));
        }
        if self.k.is_empty() {
            return bad("compact set K is empty".into());
        }
        self.model.check(&self.a)?;
        for x in self.k.iter() {
            self.model.check(x)?;
        }
        if !(self.epsilon.is_finite() && self.epsilon > S::zero()) {
            return bad(format!("epsilon {} must be positive", self.epsilon));
        }
        if self.n_max == 0 {
            return bad("n_max must be ≥ 1".into());
        }
        if !(self.deficit_cap >= S::zero()) {
            return bad("deficit cap must be ≥ 0".into());
        }
        if self.chaos_terms < MIN_CHAOS_TERMS {
            return bad(format!("chaos_terms must be ≥ {MIN_CHAOS_TERMS}"));
        }
        Ok(())
    }

    /// One weighted translation `T_{a,w_l}` per weight.
    pub fn operators(&self) -> Result<Vec<WeightedTranslation<S>>, DynamicsError> {
        self.weights
            .iter()
            .map(|w| WeightedTranslation::new(self.model, self.a.clone(), w.clone()).map_err(Into::into))
            .collect()
    }
}
