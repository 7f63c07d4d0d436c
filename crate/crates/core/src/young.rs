//! Young functions, their generalized inverses, numerically computed
//! complementary functions, and a sampled Δ₂ diagnostic.
//!
//! Three families are supported:
//!
//! * `Power(p)`: `Φ(t) = |t|^p / p` with `p ≥ 1`, the Lebesgue case;
//! * `PowerLog(α)`: `Φ(t) = |t|^α (1 + |log|t||)` with `α > 1`, convex only
//!   for `α ≥ (3 + √5)/2`: below that `Φ'' < 0` just left of `t = 1`;
//! * `Custom`: a piecewise-linear interpolant of a sampled convex function on
//!   `[0, t_max]`.
//!
//! The complementary function `Ψ(y) = sup { x|y| − Φ(x) : x ≥ 0 }` is never
//! taken in closed form. It is maximized numerically so that custom functions
//! work the same way as the built-in families.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::scalar::{search_rtol, Scalar};

/// Largest abscissa the conjugate search will explore before reporting divergence.
pub const CONJUGATE_CAP: f64 = 1.0e6;

/// A custom table must reach `Φ(t_max) ≥ 1 / DIVERGENCE_TOLERANCE`.
pub const DIVERGENCE_TOLERANCE: f64 = 1.0e-6;

/// Least `α` for which `PowerLog(α)` is convex, the larger root of `α² − 3α + 1`.
pub const POWER_LOG_CONVEX_ALPHA: f64 = 2.618_033_988_749_895;

const CONVEXITY_SLACK: f64 = 1.0e-9;
const MAX_BISECTIONS: usize = 2400;
const MAX_GOLDEN: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum YoungError {
    #[error("invalid Young function parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid custom samples: {0}")]
    InvalidSamples(String),
    #[error("argument {t} lies outside the sampled grid [0, {t_max}]")]
    OutOfGrid { t: f64, t_max: f64 },
    #[error("level {s} exceeds the largest sampled value {max}")]
    Unbounded { s: f64, max: f64 },
    #[error("conjugate at y = {y} is still increasing at the bracket cap x = {cap}")]
    ConjugateDiverges { y: f64, cap: f64 },
    #[error("empty or degenerate sampling range")]
    EmptyRange,
    #[error("non-finite argument {0}")]
    NonFinite(f64),
}

/// Sampled convex function: strictly increasing abscissae starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSamples<S> {
    t: Vec<S>,
    phi: Vec<S>,
}

impl<S: Scalar> CustomSamples<S> {
    pub fn new(pairs: &[(S, S)]) -> Result<Self, YoungError> {
        if pairs.len() < 2 {
            return Err(YoungError::InvalidSamples("need at least two samples".into()));
        }
        let (t, phi): (Vec<S>, Vec<S>) = pairs.iter().copied().unzip();
        if t.iter().chain(phi.iter()).any(|v| !v.is_finite()) {
            return Err(YoungError::InvalidSamples("non-finite sample".into()));
        }
        if t[0] != S::zero() || phi[0] != S::zero() {
            return Err(YoungError::InvalidSamples("grid must start at (0, 0)".into()));
        }
        for i in 1..t.len() {
            if t[i] <= t[i - 1] {
                return Err(YoungError::InvalidSamples(format!(
                    "abscissae not strictly increasing at index {i}"
                )));
            }
            if phi[i] <= S::zero() {
                return Err(YoungError::InvalidSamples(format!(
                    "value at t = {} is not positive",
                    t[i]
                )));
            }
            if phi[i] < phi[i - 1] {
                return Err(YoungError::InvalidSamples(format!(
                    "values decrease at index {i}"
                )));
            }
        }
        // Slopes of a convex interpolant are nondecreasing.
        let slack = S::lit(CONVEXITY_SLACK);
        for i in 1..t.len() - 1 {
            let left = (phi[i] - phi[i - 1]) / (t[i] - t[i - 1]);
            let right = (phi[i + 1] - phi[i]) / (t[i + 1] - t[i]);
            let h = t[i + 1] - t[i - 1];
            if right < left - slack * (S::one() + phi[i + 1]) / h {
                return Err(YoungError::InvalidSamples(format!(
                    "not convex around t = {}",
                    t[i]
                )));
            }
        }
        let last = *phi.last().unwrap();
        if last < S::lit(1.0 / DIVERGENCE_TOLERANCE) {
            return Err(YoungError::InvalidSamples(format!(
                "Φ(t_max) = {last} is below 1/{DIVERGENCE_TOLERANCE}; extend the grid"
            )));
        }
        Ok(Self { t, phi })
    }

    pub fn t_max(&self) -> S {
        *self.t.last().unwrap()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (S, S)> + '_ {
        self.t.iter().copied().zip(self.phi.iter().copied())
    }

    /// Piecewise-linear interpolation; `None` beyond `t_max`.
    fn interpolate(&self, t: S) -> Option<S> {
        if t > self.t_max() {
            return None;
        }
        let i = self.t.partition_point(|&x| x <= t);
        if i >= self.t.len() {
            return Some(*self.phi.last().unwrap());
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let (p0, p1) = (self.phi[i - 1], self.phi[i]);
        Some(p0 + (p1 - p0) * (t - t0) / (t1 - t0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum YoungFamily<S> {
    Power { p: S },
    PowerLog { alpha: S },
    Custom(CustomSamples<S>),
}

/// Tabulated complementary function on an evenly spaced grid `[0, y_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateGrid<S> {
    pub y: Vec<S>,
    pub psi: Vec<S>,
}

impl<S: Scalar> ConjugateGrid<S> {
    pub fn y_max(&self) -> S {
        self.y.last().copied().unwrap_or_else(S::zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delta2Report<S> {
    /// `sup Φ(2t)/Φ(t)` over the sampled points.
    pub m_delta: S,
    /// False when the ratio keeps growing across the top decade of the range.
    pub regular: bool,
    pub t_lo: S,
    pub t_hi: S,
    pub samples: usize,
}

/// An even convex Young function `Φ`.
#[derive(Debug, Clone)]
pub struct YoungFunction<S> {
    family: YoungFamily<S>,
    conjugate_cache: OnceLock<Arc<ConjugateGrid<S>>>,
}

impl<S: PartialEq> PartialEq for YoungFunction<S> {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl<S: Scalar> YoungFunction<S> {
    pub fn power(p: S) -> Result<Self, YoungError> {
        if !(p.is_finite() && p >= S::one()) {
            return Err(YoungError::InvalidParameter(format!("power p = {p} must be ≥ 1")));
        }
        Ok(Self::from_family(YoungFamily::Power { p }))
    }

    pub fn power_log(alpha: S) -> Result<Self, YoungError> {
        if !(alpha.is_finite() && alpha > S::one()) {
            return Err(YoungError::InvalidParameter(format!(
                "power-log α = {alpha} must be > 1"
            )));
        }
        Ok(Self::from_family(YoungFamily::PowerLog { alpha }))
    }

    pub fn custom(pairs: &[(S, S)]) -> Result<Self, YoungError> {
        Ok(Self::from_family(YoungFamily::Custom(CustomSamples::new(pairs)?)))
    }

    fn from_family(family: YoungFamily<S>) -> Self {
        Self { family, conjugate_cache: OnceLock::new() }
    }

    pub fn family(&self) -> &YoungFamily<S> {
        &self.family
    }

    /// Upper end of the domain on which `Φ` is known (`+∞` for closed forms).
    pub fn t_max(&self) -> S {
        match &self.family {
            YoungFamily::Custom(c) => c.t_max(),
            _ => S::infinity(),
        }
    }

    /// Whether `Φ` is convex, so that the Luxemburg functional is a norm.
    pub fn is_convex(&self) -> bool {
        match &self.family {
            YoungFamily::PowerLog { alpha } => *alpha >= S::lit(POWER_LOG_CONVEX_ALPHA),
            _ => true,
        }
    }

    /// `Φ(t)`.
    pub fn eval(&self, t: S) -> Result<S, YoungError> {
        if !t.is_finite() {
            return Err(YoungError::NonFinite(t.to_f64_lossy()));
        }
        let a = t.abs();
        match &self.family {
            YoungFamily::Custom(c) => c.interpolate(a).ok_or(YoungError::OutOfGrid {
                t: t.to_f64_lossy(),
                t_max: c.t_max().to_f64_lossy(),
            }),
            _ => Ok(self.value(a)),
        }
    }

    /// `Φ(|t|)` with `+∞` beyond a custom grid. Used where "too large" is an
    /// acceptable answer, e.g. inside the Luxemburg norm search.
    pub(crate) fn value(&self, t: S) -> S {
        let a = t.abs();
        match &self.family {
            YoungFamily::Power { p } => a.powf(*p) / *p,
            YoungFamily::PowerLog { alpha } => {
                if a == S::zero() {
                    S::zero()
                } else {
                    a.powf(*alpha) * (S::one() + a.ln().abs())
                }
            }
            YoungFamily::Custom(c) => c.interpolate(a).unwrap_or_else(S::infinity),
        }
    }

    /// Generalized inverse `sup { t ≥ 0 : Φ(t) ≤ s }`, by bracketing bisection.
    pub fn inverse(&self, s: S) -> Result<S, YoungError> {
        if s.is_nan() || s < S::zero() {
            return Err(YoungError::InvalidParameter(format!("inverse level {s} must be ≥ 0")));
        }
        if s == S::zero() {
            return Ok(S::zero());
        }
        let mut lo = S::zero();
        let mut hi = match &self.family {
            YoungFamily::Custom(c) => {
                let top = *c.phi.last().unwrap();
                if s > top {
                    return Err(YoungError::Unbounded {
                        s: s.to_f64_lossy(),
                        max: top.to_f64_lossy(),
                    });
                }
                if s == top {
                    // every point past the last strict increase is in the sublevel set
                    return Ok(c.t_max());
                }
                c.t_max()
            }
            _ => {
                if s.is_infinite() {
                    return Err(YoungError::Unbounded { s: f64::INFINITY, max: f64::INFINITY });
                }
                let mut hi = S::one();
                while self.value(hi) <= s {
                    lo = hi;
                    hi = hi + hi;
                    if !hi.is_finite() {
                        return Err(YoungError::Unbounded {
                            s: s.to_f64_lossy(),
                            max: f64::INFINITY,
                        });
                    }
                }
                hi
            }
        };
        let rtol = search_rtol::<S>();
        let two = S::lit(2.0);
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= rtol * hi {
                break;
            }
            let mid = lo + (hi - lo) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Complementary function `Ψ(y)`, maximized by golden-section search on an
    /// expanding bracket capped at [`CONJUGATE_CAP`].
    pub fn conjugate(&self, y: S) -> Result<S, YoungError> {
        if !y.is_finite() {
            return Err(YoungError::NonFinite(y.to_f64_lossy()));
        }
        let slope = y.abs();
        if slope == S::zero() {
            return Ok(S::zero());
        }
        let objective = |x: S| x * slope - self.value(x);
        let cap = S::lit(CONJUGATE_CAP).min(self.t_max());
        let two = S::lit(2.0);

        let mut left = S::zero();
        let mut mid = S::one().min(cap);
        let right = loop {
            if mid >= cap {
                let probe = cap * (S::one() - S::lit(1.0e-7));
                if objective(cap) > objective(probe) {
                    return Err(YoungError::ConjugateDiverges {
                        y: y.to_f64_lossy(),
                        cap: cap.to_f64_lossy(),
                    });
                }
                break cap;
            }
            let next = (mid * two).min(cap);
            if objective(next) > objective(mid) {
                left = mid;
                mid = next;
            } else {
                break next;
            }
        };

        let best = golden_max(objective, left, right);
        Ok(best.max(S::zero()))
    }

    /// `Ψ` tabulated on `samples` evenly spaced points of `[0, y_max]`.
    ///
    /// The first grid requested is cached; other grids are recomputed on each call.
    pub fn conjugate_grid(
        &self,
        y_max: S,
        samples: usize,
    ) -> Result<Arc<ConjugateGrid<S>>, YoungError> {
        if samples < 2 || !(y_max > S::zero()) {
            return Err(YoungError::EmptyRange);
        }
        if let Some(cached) = self.conjugate_cache.get() {
            if cached.y.len() == samples && cached.y_max() == y_max {
                return Ok(Arc::clone(cached));
            }
        }
        let step = y_max / S::from_usize(samples - 1).unwrap();
        let y: Vec<S> = (0..samples)
            .map(|i| if i + 1 == samples { y_max } else { step * S::from_usize(i).unwrap() })
            .collect();
        let psi = y.iter().map(|&v| self.conjugate(v)).collect::<Result<Vec<_>, _>>()?;
        let grid = Arc::new(ConjugateGrid { y, psi });
        // a concurrent caller may have won the race; both values are identical
        let _ = self.conjugate_cache.set(Arc::clone(&grid));
        Ok(grid)
    }

    /// Sampled Δ₂ diagnostic over geometrically spaced points of `[t_lo, t_hi]`.
    ///
    /// For custom functions the range is clipped so that `2t ≤ t_max`.
    pub fn delta2_check(
        &self,
        t_lo: S,
        t_hi: S,
        samples: usize,
    ) -> Result<Delta2Report<S>, YoungError> {
        let t_hi = t_hi.min(self.t_max() / S::lit(2.0));
        if samples < 2 || !(t_lo > S::zero()) || !(t_hi > t_lo) || !t_hi.is_finite() {
            return Err(YoungError::EmptyRange);
        }
        let log_lo = t_lo.ln();
        let log_step = (t_hi.ln() - log_lo) / S::from_usize(samples - 1).unwrap();
        let points: Vec<S> = (0..samples)
            .map(|i| {
                if i + 1 == samples {
                    t_hi
                } else {
                    (log_lo + log_step * S::from_usize(i).unwrap()).exp()
                }
            })
            .collect();
        let ratios: Vec<S> = points
            .iter()
            .map(|&t| self.value(t + t) / self.value(t))
            .collect();
        let m_delta = ratios.iter().copied().fold(S::zero(), |m, r| if r > m || r.is_nan() { r } else { m });

        let top_start = points.partition_point(|&t| t < t_hi / S::lit(10.0)).min(samples - 2);
        let top = &ratios[top_start..];
        let finite = ratios.iter().all(|r| r.is_finite());
        let noise = S::lit(1.0e-12);
        let nondecreasing = top.windows(2).all(|w| w[1] >= w[0] * (S::one() - noise));
        let growth = *top.last().unwrap() / top[0];
        let growing = nondecreasing && growth > S::one() + S::lit(1.0e-6);

        Ok(Delta2Report {
            m_delta,
            regular: finite && !growing,
            t_lo,
            t_hi,
            samples,
        })
    }
}

/// Maximum of a concave function on `[a, b]` by golden-section search.
fn golden_max<S: Scalar>(f: impl Fn(S) -> S, mut a: S, mut b: S) -> S {
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) / S::lit(2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = f(a).max(f(b));
    let rtol = search_rtol::<S>();
    for _ in 0..MAX_GOLDEN {
        if b - a <= rtol * (S::one() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    best = best.max(fc).max(fd);
    best
}
