//! The JSON experiment file and its conversion into a checked [`Scenario`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use orlicz_dyn::{CompactSet, GroupElement, GroupKind, GroupModel, OrliczVector, Scenario, Weight, YoungFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    DisjointTransitive,
    SameWeight,
    DisjointMixing,
    Chaotic,
    DisjointChaotic,
    Witness,
}

impl ModeName {
    pub fn min_operators(self) -> usize {
        match self {
            ModeName::Chaotic => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}; expected json or csv")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    IntLine,
    IntLattice { dim: usize },
    HeisenbergInt,
    LatticeLine { h: f64 },
    HeisenbergLattice { h: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum YoungSpec {
    Power { p: f64 },
    Powerlog { alpha: f64 },
    Custom { samples: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointValue {
    pub at: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { c: f64 },
    ClampExp { base: f64, coord: usize, lo: f64, hi: f64 },
    Table { default: f64, entries: Vec<PointValue> },
}

/// `{"box": {"lo": [...], "hi": [...]}}` or `{"points": [[...], ...]}`, in real coordinates.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Points(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSpec {
    Indicator(SetSpec),
    Entries(Vec<PointValue>),
}

fn default_chaos_terms() -> usize {
    16
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub group: GroupSpec,
    pub young: YoungSpec,
    pub a: Vec<f64>,
    pub weights: Vec<WeightSpec>,
    pub powers: Vec<usize>,
    #[serde(rename = "K")]
    pub k: SetSpec,
    pub epsilon: f64,
    pub n_max: usize,
    #[serde(default)]
    pub deficit_cap: f64,
    #[serde(default = "default_chaos_terms")]
    pub chaos_terms: usize,
    #[serde(default)]
    pub mixing_window: Option<usize>,
    #[serde(default)]
    pub override_diagnostics: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    /// Defaults to the transitivity checker's `n*`.
    pub n: Option<usize>,
    pub f: Option<VectorSpec>,
    pub targets: Option<Vec<VectorSpec>>,
    #[serde(rename = "E")]
    pub e: Option<SetSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: ModeName,
    pub scenario: ScenarioSpec,
    /// 1-based operator for the single-operator chaos mode.
    #[serde(default)]
    pub operator: Option<usize>,
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
    /// Seeds the random `f`, `g_l` of the witness mode when they are not given.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub formats: Option<Vec<Format>>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("field `{path}`: {}", e.into_inner())
        })
    }
}

fn model(spec: &GroupSpec) -> Result<GroupModel> {
    let kind = match *spec {
        GroupSpec::IntLine => GroupKind::IntLine,
        GroupSpec::IntLattice { dim } => GroupKind::IntLattice { dim },
        GroupSpec::HeisenbergInt => GroupKind::HeisenbergInt,
        GroupSpec::LatticeLine { h } => GroupKind::LatticeLine { h },
        GroupSpec::HeisenbergLattice { h } => GroupKind::HeisenbergLattice { h },
    };
    Ok(GroupModel::new(kind)?)
}

fn young(spec: &YoungSpec) -> Result<YoungFunction> {
    Ok(match spec {
        YoungSpec::Power { p } => YoungFunction::power(*p)?,
        YoungSpec::Powerlog { alpha } => YoungFunction::power_log(*alpha)?,
        YoungSpec::Custom { samples } => YoungFunction::custom(samples)?,
    })
}

fn weight(m: &GroupModel, spec: &WeightSpec) -> Result<Weight> {
    Ok(match spec {
        WeightSpec::Constant { c } => Weight::constant(*c)?,
        WeightSpec::ClampExp { base, coord, lo, hi } => Weight::clamp_exp(*base, *coord, *lo, *hi)?,
        WeightSpec::Table { default, entries } => {
            let values = entries
                .iter()
                .enumerate()
                .map(|(i, e)| Ok((m.element_from_real(&e.at).with_context(|| format!("entries[{i}].at"))?, e.value)))
                .collect::<Result<Vec<_>>>()?;
            Weight::table(values, *default)?
        }
    })
}

pub fn set(m: &GroupModel, spec: &SetSpec) -> Result<CompactSet> {
    Ok(match spec {
        SetSpec::Box { lo, hi } => CompactSet::box_real(m, lo, hi)?,
        SetSpec::Points(points) => {
            let elems = points
                .iter()
                .enumerate()
                .map(|(i, p)| m.element_from_real(p).with_context(|| format!("points[{i}]")))
                .collect::<Result<Vec<GroupElement>>>()?;
            CompactSet::from_points(m, elems)?
        }
    })
}

pub fn vector(m: &GroupModel, spec: &VectorSpec) -> Result<OrliczVector> {
    Ok(match spec {
        VectorSpec::Indicator(s) => OrliczVector::indicator(*m, &set(m, s)?),
        VectorSpec::Entries(entries) => {
            let values = entries
                .iter()
                .enumerate()
                .map(|(i, e)| Ok((m.element_from_real(&e.at).with_context(|| format!("[{i}].at"))?, e.value)))
                .collect::<Result<Vec<_>>>()?;
            OrliczVector::from_entries(*m, values)?
        }
    })
}

/// Uniform values in `[-1, 1]` on every point of `k`.
pub fn random_vector(m: &GroupModel, k: &CompactSet, rng: &mut ChaCha8Rng) -> OrliczVector {
    OrliczVector::from_entries(*m, k.iter().map(|x| (x.clone(), rng.gen_range(-1.0..=1.0))))
        .expect("points of K belong to the model")
}

pub fn rng(seed: Option<u64>) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.unwrap_or(0))
}

impl ExperimentConfig {
    pub fn build(&self, override_diagnostics: bool) -> Result<Scenario> {
        let s = &self.scenario;
        let m = model(&s.group).context("field `scenario.group`")?;
        let phi = young(&s.young).context("field `scenario.young`")?;
        let a = m.element_from_real(&s.a).context("field `scenario.a`")?;
        let weights = s
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| weight(&m, w).with_context(|| format!("field `scenario.weights[{i}]`")))
            .collect::<Result<Vec<_>>>()?;
        let k = set(&m, &s.k).context("field `scenario.K`")?;

        let needed = self.mode.min_operators();
        if weights.len() < needed {
            bail!(
                "field `scenario.weights`: mode {:?} needs at least {needed} operators, got {}",
                self.mode,
                weights.len()
            );
        }
        if let Some(op) = self.operator {
            if op == 0 || op > weights.len() {
                bail!("field `operator`: {op} is not in 1..={}", weights.len());
            }
        }

        let mut scenario = Scenario::new(m, phi, a, weights, s.powers.clone(), k)
            .with_epsilon(s.epsilon)
            .with_n_max(s.n_max)
            .with_deficit_cap(s.deficit_cap)
            .with_chaos_terms(s.chaos_terms)
            .with_override(s.override_diagnostics || override_diagnostics);
        scenario.mixing_window = s.mixing_window;
        scenario.validate().context("field `scenario`")?;
        Ok(scenario)
    }
}
