//! Experiment config schema and loading.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tca_core::catalog::builtin;
use tca_core::io::{element_from_lit, ElementLit, SpecResolver};
use tca_core::system::indexed_rng;
use tca_core::{AdmissibleNorm, CrossedElement, GroupCtx, TwistedSystem};

/// Experiment kinds, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Verify,
    Laws,
    Spectrum,
    Wiener,
    Grs,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Verify => "verify",
            Kind::Laws => "laws",
            Kind::Spectrum => "spectrum",
            Kind::Wiener => "wiener",
            Kind::Grs => "grs",
        }
    }
}

/// Random element generation.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomElement {
    pub support: usize,
    pub radius: i64,
}

/// Top-level config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must match the subcommand when present.
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    /// Built-in system name; excludes `group`, `model`, `action`, `cocycle`.
    pub system: Option<String>,
    pub group: Option<String>,
    pub model: Option<String>,
    pub action: Option<String>,
    pub cocycle: Option<String>,
    pub norm: Option<String>,
    pub weight: Option<String>,
    pub element: Option<ElementLit>,
    pub random: Option<RandomElement>,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    pub trials: usize,
    pub radius: i64,
    pub tolerance: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            trials: 10_000,
            radius: 16,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LawsParams {
    pub samples: usize,
    pub support: usize,
    pub radius: i64,
    pub exhaustive_order: usize,
    pub exhaustive_support: usize,
    pub tolerance: f64,
}

impl Default for LawsParams {
    fn default() -> Self {
        LawsParams {
            samples: 200,
            support: 3,
            radius: 2,
            exhaustive_order: 6,
            exhaustive_support: 3,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    pub levels: usize,
    pub slack: f64,
    /// Regular-representation eigenvalues; defaults to true on finite groups.
    pub regular: Option<bool>,
    /// Lower bound for the regular-representation eigenvalues.
    pub eigen_tolerance: f64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            levels: tca_core::spectral::DEFAULT_LEVELS,
            slack: tca_core::spectral::SYMMETRY_SLACK,
            regular: None,
            eigen_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WienerParams {
    pub radius: u64,
    pub margin: f64,
    /// Recompute at twice the radius.
    pub stability: bool,
    /// Maximal stability delta allowed within `stability_radius`.
    pub stability_tolerance: Option<f64>,
    /// Defaults to a quarter of the radius.
    pub stability_radius: Option<u64>,
}

impl Default for WienerParams {
    fn default() -> Self {
        WienerParams {
            radius: 24,
            margin: tca_core::spectral::DEFAULT_MARGIN,
            stability: false,
            stability_tolerance: None,
            stability_radius: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrsConfigParams {
    pub n_max: usize,
    pub threshold: f64,
    pub tail: usize,
}

impl Default for GrsConfigParams {
    fn default() -> Self {
        let d = tca_core::spectral::GrsParams::default();
        GrsConfigParams {
            n_max: d.n_max,
            threshold: d.threshold,
            tail: d.tail,
        }
    }
}

/// A parsed config together with its location.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub resolver: SpecResolver,
    pub seed: Option<u64>,
}

fn parse_path<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("at `{path}`: {}", e.into_inner())
    })
}

/// Read and validate a config; `seed` overrides the config seed.
pub fn load(path: &Path, kind: Kind, seed: Option<u64>) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let config: ExperimentConfig = parse_path(&text).with_context(|| format!("invalid config {}", path.display()))?;
    if let Some(k) = config.kind {
        if k != kind {
            bail!("config kind `{}` does not match subcommand `{}`", k.name(), kind.name());
        }
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let resolver = SpecResolver::new(base);
    for spec in [&config.action, &config.cocycle, &config.weight].into_iter().flatten() {
        resolver.check_file(spec)?;
    }
    if config.system.is_some()
        && (config.group.is_some() || config.model.is_some() || config.action.is_some() || config.cocycle.is_some())
    {
        bail!("`system` excludes `group`, `model`, `action` and `cocycle`");
    }
    if config.element.is_some() && config.random.is_some() {
        bail!("`element` and `random` are mutually exclusive");
    }
    let seed = seed.or(config.seed);
    let randomized = matches!(kind, Kind::Verify | Kind::Laws) || config.random.is_some();
    if randomized && seed.is_none() {
        bail!("a seed is required for randomized runs (config `seed` or --seed)");
    }
    Ok(Loaded { config, resolver, seed })
}

impl Loaded {
    /// Kind-specific parameters with defaults.
    pub fn params<T: DeserializeOwned + Default>(&self) -> Result<T> {
        match &self.config.params {
            serde_json::Value::Null => Ok(T::default()),
            v => {
                let text = v.to_string();
                parse_path(&text).context("invalid `params`")
            }
        }
    }

    pub fn group(&self) -> Result<GroupCtx> {
        if let Some(name) = &self.config.system {
            return Ok(builtin(name)?.ctx().clone());
        }
        let g = self.config.group.as_deref().ok_or_else(|| anyhow!("config needs `system` or `group`"))?;
        Ok(self.resolver.group(g)?)
    }

    pub fn system(&self) -> Result<Arc<TwistedSystem>> {
        if let Some(name) = &self.config.system {
            return Ok(builtin(name)?);
        }
        let c = &self.config;
        let group = c.group.as_deref().ok_or_else(|| anyhow!("config needs `system` or `group`"))?;
        let sys = self.resolver.system(
            group,
            c.model.as_deref().unwrap_or("scalar"),
            c.action.as_deref().unwrap_or("trivial"),
            c.cocycle.as_deref().unwrap_or("trivial"),
        )?;
        Ok(Arc::new(sys))
    }

    pub fn norm(&self, ctx: &GroupCtx) -> Result<AdmissibleNorm> {
        Ok(self.resolver.norm(ctx, self.config.norm.as_deref().unwrap_or("l1"))?)
    }

    /// The element literal, or a seeded random element.
    pub fn element(&self, sys: &Arc<TwistedSystem>) -> Result<CrossedElement> {
        if let Some(lit) = &self.config.element {
            return Ok(element_from_lit(sys, lit)?);
        }
        if let Some(r) = &self.config.random {
            let mut rng = indexed_rng(self.seed.expect("checked at load"), 0);
            return Ok(CrossedElement::random(sys.clone(), &mut rng, r.support, r.radius));
        }
        bail!("config needs `element` or `random`")
    }
}
