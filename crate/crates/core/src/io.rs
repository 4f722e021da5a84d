//! JSON literals for coefficients, crossed elements and kernels, and the
//! spec-string resolver for configs (file references are relative to a base
//! directory).

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficient::{Coefficient, CoefficientModel};
use crate::crossed::CrossedElement;
use crate::error::{Error, Result};
use crate::group::{GroupCtx, GroupElement};
use crate::kernel::{Diagonal, KernelElement, Tail};
use crate::system::{Action, Cocycle, PointAction, TwistedSystem};
use crate::weight::{AdmissibleNorm, Weight};

/// A complex number: a bare real or `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexLit {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Complex64> for ComplexLit {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            ComplexLit::Real(c.re)
        } else {
            ComplexLit::Pair([c.re, c.im])
        }
    }
}

impl From<&ComplexLit> for Complex64 {
    fn from(c: &ComplexLit) -> Self {
        match c {
            ComplexLit::Real(r) => Complex64::new(*r, 0.0),
            ComplexLit::Pair([re, im]) => Complex64::new(*re, *im),
        }
    }
}

/// A value at a group element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointValue<T> {
    pub at: Vec<i64>,
    pub value: T,
}

/// A coefficient: a complex number (scalar, or a constant in other models),
/// `{"spectrum": [..]}`, or `{"background": c, "correction": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientLit {
    Complex(ComplexLit),
    Spectrum {
        spectrum: Vec<ComplexLit>,
    },
    Standard {
        background: ComplexLit,
        #[serde(default)]
        correction: Vec<PointValue<ComplexLit>>,
    },
}

/// A crossed-product element: a list of `{"at": [..], "value": coefficient}`.
pub type ElementLit = Vec<PointValue<CoefficientLit>>;

/// Tail rule of a kernel diagonal.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailLit {
    #[default]
    Zero,
    Covariant(CoefficientLit),
    Constant(CoefficientLit),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalLit {
    pub offset: Vec<i64>,
    #[serde(default)]
    pub window: ElementLit,
    #[serde(default)]
    pub tail: TailLit,
}

/// A kernel in diagonal form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelLit {
    pub diagonals: Vec<DiagonalLit>,
}

fn element(ctx: &GroupCtx, coords: &[i64]) -> Result<GroupElement> {
    Ok(ctx.element(coords)?)
}

pub fn coefficient_from_lit(sys: &TwistedSystem, lit: &CoefficientLit) -> Result<Coefficient> {
    let c = match lit {
        CoefficientLit::Complex(c) => Coefficient::Scalar(c.into()),
        CoefficientLit::Spectrum { spectrum } => Coefficient::Spectrum(spectrum.iter().map(Into::into).collect()),
        CoefficientLit::Standard { background, correction } => {
            let mut map = BTreeMap::new();
            for pv in correction {
                let x = element(sys.ctx(), &pv.at)?;
                if map.insert(x.clone(), (&pv.value).into()).is_some() {
                    return Err(Error::Invalid(format!("correction lists {x} twice")));
                }
            }
            Coefficient::standard(background.into(), map)
        }
    };
    c.conform(sys.model())
}

pub fn coefficient_to_lit(c: &Coefficient) -> CoefficientLit {
    match c {
        Coefficient::Scalar(v) => CoefficientLit::Complex((*v).into()),
        Coefficient::Spectrum(v) => CoefficientLit::Spectrum {
            spectrum: v.iter().map(|z| (*z).into()).collect(),
        },
        Coefficient::Standard { background, correction } => CoefficientLit::Standard {
            background: (*background).into(),
            correction: correction
                .iter()
                .map(|(x, v)| PointValue {
                    at: x.coords().to_vec(),
                    value: (*v).into(),
                })
                .collect(),
        },
    }
}

fn entries_from_lit(sys: &TwistedSystem, lit: &ElementLit) -> Result<Vec<(GroupElement, Coefficient)>> {
    let mut seen = std::collections::BTreeSet::new();
    lit.iter()
        .map(|pv| {
            let x = element(sys.ctx(), &pv.at)?;
            if !seen.insert(x.clone()) {
                return Err(Error::Invalid(format!("element lists {x} twice")));
            }
            Ok((x, coefficient_from_lit(sys, &pv.value)?))
        })
        .collect()
}

fn entries_to_lit<'a>(entries: impl IntoIterator<Item = (&'a GroupElement, &'a Coefficient)>) -> ElementLit {
    entries
        .into_iter()
        .map(|(x, c)| PointValue {
            at: x.coords().to_vec(),
            value: coefficient_to_lit(c),
        })
        .collect()
}

pub fn element_from_lit(sys: &Arc<TwistedSystem>, lit: &ElementLit) -> Result<CrossedElement> {
    CrossedElement::from_entries(sys.clone(), entries_from_lit(sys, lit)?)
}

pub fn element_to_lit(f: &CrossedElement) -> ElementLit {
    entries_to_lit(f.entries())
}

pub fn kernel_from_lit(sys: &Arc<TwistedSystem>, lit: &KernelLit) -> Result<KernelElement> {
    let diagonals = lit
        .diagonals
        .iter()
        .map(|d| {
            let a = element(sys.ctx(), &d.offset)?;
            let window = entries_from_lit(sys, &d.window)?.into_iter().collect();
            let tail = match &d.tail {
                TailLit::Zero => Tail::Zero,
                TailLit::Covariant(c) => Tail::Covariant(coefficient_from_lit(sys, c)?),
                TailLit::Constant(c) => Tail::Constant(coefficient_from_lit(sys, c)?),
            };
            Ok((a, Diagonal { window, tail }))
        })
        .collect::<Result<Vec<_>>>()?;
    KernelElement::from_diagonals(sys.clone(), diagonals)
}

pub fn kernel_to_lit(k: &KernelElement) -> KernelLit {
    KernelLit {
        diagonals: k
            .diagonals()
            .iter()
            .map(|(a, d)| DiagonalLit {
                offset: a.coords().to_vec(),
                window: entries_to_lit(&d.window),
                tail: match &d.tail {
                    Tail::Zero => TailLit::Zero,
                    Tail::Covariant(c) => TailLit::Covariant(coefficient_to_lit(c)),
                    Tail::Constant(c) => TailLit::Constant(coefficient_to_lit(c)),
                },
            })
            .collect(),
    }
}

/// Cocycle table file: pairs not listed take the value 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleTableFile {
    pub entries: Vec<CocycleEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub value: CoefficientLit,
}

/// Coboundary file: `ω'(x,y) = ω(x,y) b(x) α_x[b(y)] b(xy)*`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoboundaryFile {
    /// Spec string of the base cocycle.
    pub base: String,
    pub b: ElementLit,
}

/// Point action file: permutations of `0..size` for generators.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointActionFile {
    pub size: usize,
    pub generators: Vec<GeneratorPerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorPerm {
    pub element: Vec<i64>,
    pub perm: Vec<usize>,
}

/// Weight table file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightTableFile {
    pub values: Vec<PointValue<f64>>,
}

/// Resolves spec strings, reading referenced files relative to `base`.
#[derive(Clone, Debug)]
pub struct SpecResolver {
    base: PathBuf,
}

impl SpecResolver {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        SpecResolver { base: base.into() }
    }

    pub fn path(&self, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn read_json<T: serde::de::DeserializeOwned>(&self, what: &'static str, spec: &str, file: &str) -> Result<T> {
        let path = self.path(file);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::spec(what, spec, format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::spec(what, spec, format!("{}: {e}", path.display())))
    }

    /// Whether a spec string points at a file that exists (or needs none).
    pub fn check_file(&self, spec: &str) -> Result<()> {
        if let Some((_, file)) = spec.split_once(':').filter(|(k, _)| matches!(*k, "table" | "coboundary" | "point")) {
            let path = self.path(file);
            if !path.is_file() {
                return Err(Error::spec("file", spec, format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn group(&self, spec: &str) -> Result<GroupCtx> {
        Ok(GroupCtx::from_str(spec)?)
    }

    pub fn model(&self, spec: &str) -> Result<CoefficientModel> {
        spec.parse()
    }

    /// `one`, `poly:s=<s>`, `exp:c=<c>` or `table:<file>`.
    pub fn weight(&self, ctx: &GroupCtx, spec: &str) -> Result<Weight> {
        if let Some(file) = spec.strip_prefix("table:") {
            let t: WeightTableFile = self.read_json("weight", spec, file)?;
            let mut values = BTreeMap::new();
            for pv in t.values {
                values.insert(element(ctx, &pv.at)?, pv.value);
            }
            return Weight::table(ctx, values);
        }
        spec.parse()
    }

    /// `l1`, `l1w:<weight>` or `linfw:<weight>@<R>`.
    pub fn norm(&self, ctx: &GroupCtx, spec: &str) -> Result<AdmissibleNorm> {
        AdmissibleNorm::parse_with(ctx, spec, |w| self.weight(ctx, w))
    }

    /// `trivial`, `translation`, `regular` or `point:<file>`.
    pub fn action(&self, ctx: &GroupCtx, spec: &str) -> Result<Action> {
        match spec {
            "trivial" => Ok(Action::Trivial),
            "translation" => Ok(Action::Translation),
            "regular" => Ok(Action::Point(Arc::new(PointAction::regular(ctx)?))),
            _ => {
                let file = spec
                    .strip_prefix("point:")
                    .ok_or_else(|| Error::spec("action", spec, "expected trivial, translation, regular or point:<file>"))?;
                let f: PointActionFile = self.read_json("action", spec, file)?;
                let gens = f
                    .generators
                    .iter()
                    .map(|g| Ok((element(ctx, &g.element)?, g.perm.clone())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Action::Point(Arc::new(PointAction::from_generators(ctx, f.size, &gens)?)))
            }
        }
    }

    /// `trivial`, `theta:<matrix>`, `bicharacter`, `table:<file>` or
    /// `coboundary:<file>`. Coefficients are read in `model`; the action is
    /// needed to evaluate coboundaries.
    pub fn cocycle(&self, ctx: &GroupCtx, model: CoefficientModel, action: &Action, spec: &str) -> Result<Cocycle> {
        // a system with trivial cocycle, used only to read coefficient literals
        let reader = TwistedSystem::new(ctx.clone(), model, action.clone(), Cocycle::Trivial)?;
        if spec == "bicharacter" {
            return Cocycle::bicharacter(ctx);
        }
        if let Some(file) = spec.strip_prefix("table:") {
            let t: CocycleTableFile = self.read_json("cocycle", spec, file)?;
            let mut table = HashMap::new();
            for e in &t.entries {
                let key = (element(ctx, &e.x)?, element(ctx, &e.y)?);
                let v = coefficient_from_lit(&reader, &e.value)?;
                if table.insert(key, v).is_some() {
                    return Err(Error::spec("cocycle", spec, format!("pair ({:?}, {:?}) listed twice", e.x, e.y)));
                }
            }
            return Ok(Cocycle::Table(Arc::new(table)));
        }
        if let Some(file) = spec.strip_prefix("coboundary:") {
            let c: CoboundaryFile = self.read_json("cocycle", spec, file)?;
            if c.base.starts_with("coboundary:") {
                return Err(Error::spec("cocycle", spec, "nested coboundaries are not supported"));
            }
            let base = self.cocycle(ctx, model, action, &c.base)?;
            let b = entries_from_lit(&reader, &c.b)?.into_iter().collect();
            return Ok(Cocycle::Coboundary {
                base: Box::new(base),
                b: Arc::new(b),
            });
        }
        Cocycle::parse(spec)
    }

    /// Assemble a system from its four spec strings.
    pub fn system(&self, group: &str, model: &str, action: &str, cocycle: &str) -> Result<TwistedSystem> {
        let ctx = self.group(group)?;
        let model = self.model(model)?;
        let action = self.action(&ctx, action)?;
        let cocycle = self.cocycle(&ctx, model, &action, cocycle)?;
        TwistedSystem::new(ctx, model, action, cocycle)
    }
}
