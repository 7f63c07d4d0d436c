use crate::group::CompactSet;
use crate::orlicz::OrliczVector;
use crate::scalar::Scalar;

use super::scenario::Scenario;
use super::DynamicsError;

/// `ρ_0 = N(v − f)` and `ρ_l = N(T_l^{r_l n} v − g_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessResiduals<S> {
    pub rho0: S,
    pub rho: Vec<S>,
}

impl<S: Scalar> WitnessResiduals<S> {
    pub fn max(&self) -> S {
        self.rho.iter().fold(self.rho0, |m, &r| m.max(r))
    }
}

fn check_targets<S: Scalar>(s: &Scenario<S>, targets: &[OrliczVector<S>]) -> Result<(), DynamicsError> {
    if !targets.is_empty() && targets.len() != s.num_operators() {
        return Err(DynamicsError::TargetCount { expected: s.num_operators(), got: targets.len() });
    }
    Ok(())
}

fn inside_k<S: Scalar>(s: &Scenario<S>, what: &str, set: &CompactSet) -> Result<(), DynamicsError> {
    if set.is_subset(&s.k) {
        Ok(())
    } else {
        Err(DynamicsError::SupportEscapesK { what: what.to_string() })
    }
}

/// `v = f χ_E + Σ_l S_l^{r_l n}(g_l χ_E)`. The supports of `f`, every `g_l`
/// and `E` must lie in `K`.
pub fn build_witness<S: Scalar>(
    s: &Scenario<S>,
    f: &OrliczVector<S>,
    targets: &[OrliczVector<S>],
    n: usize,
    e: &CompactSet,
) -> Result<OrliczVector<S>, DynamicsError> {
    s.validate()?;
    check_targets(s, targets)?;
    inside_k(s, "E", e)?;
    inside_k(s, "supp f", &f.support())?;
    for (l, g) in targets.iter().enumerate() {
        inside_k(s, &format!("supp g_{}", l + 1), &g.support())?;
    }
    let ops = s.operators()?;
    let mut v = f.restrict(e);
    for ((op, g), &r) in ops.iter().zip(targets).zip(&s.powers) {
        v = v.add(&op.apply_s(&g.restrict(e), r * n)?)?;
    }
    Ok(v)
}

pub fn verify_witness<S: Scalar>(
    s: &Scenario<S>,
    v: &OrliczVector<S>,
    f: &OrliczVector<S>,
    targets: &[OrliczVector<S>],
    n: usize,
) -> Result<WitnessResiduals<S>, DynamicsError> {
    check_targets(s, targets)?;
    let ops = s.operators()?;
    let rho0 = v.sub(f)?.luxemburg_norm(&s.phi);
    let rho = ops
        .iter()
        .zip(targets)
        .zip(&s.powers)
        .map(|((op, g), &r)| Ok(op.apply_t(v, r * n)?.sub(g)?.luxemburg_norm(&s.phi)))
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(WitnessResiduals { rho0, rho })
}
