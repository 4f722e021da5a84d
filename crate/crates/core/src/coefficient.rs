//! Commutative unital coefficient algebras.
//!
//! Three models are supported, all realised as algebras of functions on a
//! spectrum Σ:
//!
//! * `Scalar`: A = ℂ, Σ is a single point.
//! * `Spectrum`: A = C(Σ) for a finite set Σ = {0, ..., s-1}.
//! * `Standard`: constants plus finitely supported functions on G, a
//!   translation-invariant unital *-subalgebra of ℓ^∞(G); Σ = G.
//!
//! A `Scalar` value is accepted wherever another model is expected and acts
//! as the corresponding constant function.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupElement;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which coefficient algebra a twisted system uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientModel {
    Scalar,
    Spectrum(usize),
    Standard,
}

impl fmt::Display for CoefficientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientModel::Scalar => write!(f, "scalar"),
            CoefficientModel::Spectrum(n) => write!(f, "spectrum:{n}"),
            CoefficientModel::Standard => write!(f, "standard"),
        }
    }
}

impl std::str::FromStr for CoefficientModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(CoefficientModel::Scalar),
            "standard" => Ok(CoefficientModel::Standard),
            _ => {
                let n = s
                    .strip_prefix("spectrum:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| {
                        Error::spec("coefficient", s, "expected scalar, spectrum:N or standard")
                    })?;
                Ok(CoefficientModel::Spectrum(n))
            }
        }
    }
}

/// A point of the spectrum Σ at which a coefficient can be evaluated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SigmaPoint {
    Unit,
    Index(usize),
    Group(GroupElement),
}

impl fmt::Display for SigmaPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaPoint::Unit => write!(f, "*"),
            SigmaPoint::Index(i) => write!(f, "#{i}"),
            SigmaPoint::Group(g) => write!(f, "{g}"),
        }
    }
}

/// An element of the coefficient algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Scalar(Complex64),
    Spectrum(Vec<Complex64>),
    /// `background + correction`, the correction being finitely supported.
    Standard {
        background: Complex64,
        correction: BTreeMap<GroupElement, Complex64>,
    },
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::zero()
    }
}

impl From<Complex64> for Coefficient {
    fn from(value: Complex64) -> Self {
        Coefficient::Scalar(value)
    }
}

impl From<f64> for Coefficient {
    fn from(value: f64) -> Self {
        Coefficient::Scalar(Complex64::new(value, 0.0))
    }
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Scalar(ZERO)
    }

    pub fn one() -> Self {
        Coefficient::Scalar(ONE)
    }

    pub fn scalar(re: f64, im: f64) -> Self {
        Coefficient::Scalar(Complex64::new(re, im))
    }

    pub fn standard(background: Complex64, correction: BTreeMap<GroupElement, Complex64>) -> Self {
        let mut c = Coefficient::Standard {
            background,
            correction,
        };
        c.prune_exact_zeros();
        c
    }

    /// The model this value natively belongs to; `Scalar` values fit any model.
    pub fn fits(&self, model: CoefficientModel) -> bool {
        match (self, model) {
            (Coefficient::Scalar(_), _) => true,
            (Coefficient::Spectrum(v), CoefficientModel::Spectrum(n)) => v.len() == n,
            (Coefficient::Standard { .. }, CoefficientModel::Standard) => true,
            _ => false,
        }
    }

    /// Value at a spectrum point.
    pub fn eval(&self, sigma: &SigmaPoint) -> Complex64 {
        match (self, sigma) {
            (Coefficient::Scalar(c), _) => *c,
            (Coefficient::Spectrum(v), SigmaPoint::Index(i)) => v[*i],
            (
                Coefficient::Standard {
                    background,
                    correction,
                },
                SigmaPoint::Group(g),
            ) => background + correction.get(g).copied().unwrap_or(ZERO),
            _ => panic!("cannot evaluate {self:?} at {sigma}"),
        }
    }

    /// Exact sup-norm: modulus, max over Σ, or
    /// `max(|background|, max |background + correction|)` for the standard model.
    ///
    /// For the standard model this assumes G is infinite or that the
    /// correction does not cover all of G; see [`Coefficient::sup_norm_on`].
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm_on(None)
    }

    /// Sup-norm, given the group order for the standard model. When the
    /// correction covers a finite group entirely the background value is never
    /// attained and is excluded.
    pub fn sup_norm_on(&self, group_order: Option<usize>) -> f64 {
        match self {
            Coefficient::Scalar(c) => c.norm(),
            Coefficient::Spectrum(v) => v.iter().map(|c| c.norm()).fold(0.0, f64::max),
            Coefficient::Standard {
                background,
                correction,
            } => {
                let covered = group_order.is_some_and(|n| correction.len() >= n);
                let base = if covered { 0.0 } else { background.norm() };
                correction
                    .values()
                    .map(|c| (background + c).norm())
                    .fold(base, f64::max)
            }
        }
    }

    /// Largest deviation of `|value|` from 1, over the whole spectrum.
    pub fn unitary_defect(&self) -> f64 {
        match self {
            Coefficient::Scalar(c) => (c.norm() - 1.0).abs(),
            Coefficient::Spectrum(v) => v.iter().map(|c| (c.norm() - 1.0).abs()).fold(0.0, f64::max),
            Coefficient::Standard {
                background,
                correction,
            } => correction
                .values()
                .map(|c| ((background + c).norm() - 1.0).abs())
                .fold((background.norm() - 1.0).abs(), f64::max),
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect() <= tol
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Scalar(c) => *c == ZERO,
            Coefficient::Spectrum(v) => v.iter().all(|c| *c == ZERO),
            Coefficient::Standard {
                background,
                correction,
            } => *background == ZERO && correction.values().all(|c| *c == ZERO),
        }
    }

    /// True when the value is a constant function (no σ-dependence).
    pub fn constant_value(&self) -> Option<Complex64> {
        match self {
            Coefficient::Scalar(c) => Some(*c),
            Coefficient::Spectrum(v) => {
                let first = *v.first()?;
                v.iter().all(|c| *c == first).then_some(first)
            }
            Coefficient::Standard {
                background,
                correction,
            } => correction.values().all(|c| *c == ZERO).then_some(*background),
        }
    }

    /// Promote to the given model (scalars become constants); errors if the
    /// value belongs to a different model.
    pub fn conform(&self, model: CoefficientModel) -> Result<Coefficient> {
        match (self, model) {
            (Coefficient::Scalar(c), CoefficientModel::Spectrum(n)) => {
                Ok(Coefficient::Spectrum(vec![*c; n]))
            }
            (Coefficient::Scalar(c), CoefficientModel::Standard) => Ok(Coefficient::Standard {
                background: *c,
                correction: BTreeMap::new(),
            }),
            _ if self.fits(model) => Ok(self.clone()),
            _ => Err(Error::ModelMismatch(format!(
                "value of model {} used in model {model}",
                self.model_name()
            ))),
        }
    }

    fn model_name(&self) -> String {
        match self {
            Coefficient::Scalar(_) => "scalar".into(),
            Coefficient::Spectrum(v) => format!("spectrum:{}", v.len()),
            Coefficient::Standard { .. } => "standard".into(),
        }
    }

    fn prune_exact_zeros(&mut self) {
        if let Coefficient::Standard { correction, .. } = self {
            correction.retain(|_, c| *c != ZERO);
        }
    }

    fn zip_with(
        &self,
        other: &Coefficient,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Coefficient> {
        use Coefficient::*;
        Ok(match (self, other) {
            (Scalar(a), Scalar(b)) => Scalar(op(*a, *b)),
            (Spectrum(a), Spectrum(b)) => {
                if a.len() != b.len() {
                    return Err(Error::ModelMismatch(format!(
                        "spectrum sizes {} and {}",
                        a.len(),
                        b.len()
                    )));
                }
                Spectrum(a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect())
            }
            (Spectrum(a), Scalar(b)) => Spectrum(a.iter().map(|x| op(*x, *b)).collect()),
            (Scalar(a), Spectrum(b)) => Spectrum(b.iter().map(|y| op(*a, *y)).collect()),
            (
                Standard {
                    background: ba,
                    correction: ca,
                },
                Standard {
                    background: bb,
                    correction: cb,
                },
            ) => {
                let background = op(*ba, *bb);
                let mut correction = BTreeMap::new();
                for key in ca.keys().chain(cb.keys()) {
                    if correction.contains_key(key) {
                        continue;
                    }
                    let va = ba + ca.get(key).copied().unwrap_or(ZERO);
                    let vb = bb + cb.get(key).copied().unwrap_or(ZERO);
                    correction.insert(key.clone(), op(va, vb) - background);
                }
                Coefficient::standard(background, correction)
            }
            (
                Standard {
                    background,
                    correction,
                },
                Scalar(b),
            ) => {
                let bg = op(*background, *b);
                let corr = correction
                    .iter()
                    .map(|(k, c)| (k.clone(), op(background + c, *b) - bg))
                    .collect();
                Coefficient::standard(bg, corr)
            }
            (
                Scalar(a),
                Standard {
                    background,
                    correction,
                },
            ) => {
                let bg = op(*a, *background);
                let corr = correction
                    .iter()
                    .map(|(k, c)| (k.clone(), op(*a, background + c) - bg))
                    .collect();
                Coefficient::standard(bg, corr)
            }
            _ => {
                return Err(Error::ModelMismatch(format!(
                    "cannot combine {} with {}",
                    self.model_name(),
                    other.model_name()
                )))
            }
        })
    }

    fn map(&self, op: impl Fn(Complex64) -> Complex64) -> Coefficient {
        match self {
            Coefficient::Scalar(c) => Coefficient::Scalar(op(*c)),
            Coefficient::Spectrum(v) => Coefficient::Spectrum(v.iter().map(|c| op(*c)).collect()),
            Coefficient::Standard {
                background,
                correction,
            } => {
                let bg = op(*background);
                let corr = correction
                    .iter()
                    .map(|(k, c)| (k.clone(), op(background + c) - bg))
                    .collect();
                Coefficient::standard(bg, corr)
            }
        }
    }

    pub fn try_mul(&self, other: &Coefficient) -> Result<Coefficient> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn try_add(&self, other: &Coefficient) -> Result<Coefficient> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Coefficient) -> Result<Coefficient> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Product. Panics when the operands belong to incompatible models.
    pub fn mul(&self, other: &Coefficient) -> Coefficient {
        self.try_mul(other).expect("coefficient model mismatch")
    }

    pub fn add(&self, other: &Coefficient) -> Coefficient {
        self.try_add(other).expect("coefficient model mismatch")
    }

    pub fn sub(&self, other: &Coefficient) -> Coefficient {
        self.try_sub(other).expect("coefficient model mismatch")
    }

    pub fn scale(&self, s: Complex64) -> Coefficient {
        self.map(|c| c * s)
    }

    /// Pointwise complex conjugate, the involution of A.
    pub fn conj(&self) -> Coefficient {
        self.map(|c| c.conj())
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &Coefficient) -> f64 {
        self.sub(other).sup_norm()
    }

    pub fn distance_on(&self, other: &Coefficient, group_order: Option<usize>) -> f64 {
        self.sub(other).sup_norm_on(group_order)
    }
}
