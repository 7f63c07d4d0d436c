use crate::group::CompactSet;
use crate::orlicz::OrliczVector;
use crate::scalar::{search_rtol, Scalar};
use crate::translation::WeightedTranslation;
use crate::young::YoungFunction;

use super::checks::chaos_sum;
use super::scenario::MIN_CHAOS_TERMS;
use super::DynamicsError;

/// A truncated periodic point `p` of `T^n` and the bound on `N(T^n p − p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPoint<S> {
    pub p: OrliczVector<S>,
    /// `(sup_E φ_{(t+1)n} + sup_E φ̃_{tn}) · N(f χ_E)`, rounded up.
    pub tail_bound: S,
    /// `sup_E` of the chaos series at `n`.
    pub chaos_sum: S,
}

/// `p = Σ_{m=0}^{t} S^{mn}(f χ_E) + Σ_{m=1}^{t} T^{mn}(f χ_E)` with `t = t_max`.
///
/// Exactly `T^n p − p = T^{(t+1)n}(f χ_E) − S^{tn}(f χ_E)`. Requires
/// `E ∩ E a^{kn} = ∅` for `1 ≤ k ≤ 2t` and a certified chaos series below
/// `epsilon` on `E`.
pub fn build_periodic_point<S: Scalar>(
    op: &WeightedTranslation<S>,
    phi: &YoungFunction<S>,
    f: &OrliczVector<S>,
    e: &CompactSet,
    n: usize,
    t_max: usize,
    epsilon: S,
) -> Result<PeriodicPoint<S>, DynamicsError> {
    if n == 0 {
        return Err(DynamicsError::InvalidScenario("period n must be ≥ 1".into()));
    }
    let model = op.model();
    let step = model.power(op.a(), n as i64);
    let mut shifted = e.clone();
    for k in 1..=2 * t_max {
        shifted = shifted.translate_right(model, &step);
        if shifted.intersects(e) {
            return Err(DynamicsError::DisjointnessViolated { k });
        }
    }

    let terms = t_max.max(MIN_CHAOS_TERMS);
    let mut chaos = S::zero();
    let (mut head, mut tilde_tail) = (S::zero(), S::zero());
    for x in e.iter() {
        let c = chaos_sum(op, x, n, terms);
        if !c.certified {
            return Err(DynamicsError::NotChaoticAtN { n, sum: c.partial.to_f64_lossy() });
        }
        chaos = chaos.max(c.value());
        let prof = op.orbit_profile(x, (t_max + 1) * n);
        head = head.max(prof.phi((t_max + 1) * n));
        tilde_tail = tilde_tail.max(prof.phi_tilde(t_max * n));
    }
    if !(chaos < epsilon) {
        return Err(DynamicsError::NotChaoticAtN { n, sum: chaos.to_f64_lossy() });
    }

    let g = f.restrict(e);
    let mut p = g.clone();
    let (mut back, mut fwd) = (g.clone(), g.clone());
    for _ in 0..t_max {
        back = op.apply_s(&back, n)?;
        fwd = op.apply_t(&fwd, n)?;
        p = p.add(&back)?.add(&fwd)?;
    }
    // Slack covers the bisection tolerance of the two norm evaluations.
    let slack = S::one() + S::lit(64.0) * search_rtol::<S>();
    let tail_bound = (head + tilde_tail) * g.luxemburg_norm(phi) * slack;
    Ok(PeriodicPoint { p, tail_bound, chaos_sum: chaos })
}
