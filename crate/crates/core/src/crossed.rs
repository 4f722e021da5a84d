//! The twisted convolution algebra ℓ¹_{α,ω}(G; A) on finitely supported elements.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::coefficient::{Coefficient, CoefficientModel, SigmaPoint, ZERO};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::system::TwistedSystem;
use crate::weight::AdmissibleNorm;

/// Entries whose sup-norm falls below this are dropped after each operation,
/// so exact cancellations do not inflate supports.
pub const PRUNE_THRESHOLD: f64 = 1e-300;

/// Default support budget for [`CrossedElement::power`].
pub const SUPPORT_BUDGET: usize = 200_000;

/// Products with more than this many coefficient pairs are refused by
/// [`CrossedElement::power`].
pub const PAIR_BUDGET: usize = 400_000_000;

/// A finitely supported map G → A bound to a twisted system.
#[derive(Clone, Debug)]
pub struct CrossedElement {
    system: Arc<TwistedSystem>,
    entries: BTreeMap<GroupElement, Coefficient>,
}

impl PartialEq for CrossedElement {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.system, &other.system) || self.system == other.system)
            && self.entries == other.entries
    }
}

/// Norms of `f^(2^j)` for `j = 0..=levels`.
#[derive(Clone, Debug)]
pub struct PowerSeries {
    pub element: CrossedElement,
    pub norms: Vec<f64>,
}

impl CrossedElement {
    pub fn zero(system: Arc<TwistedSystem>) -> Self {
        CrossedElement {
            system,
            entries: BTreeMap::new(),
        }
    }

    /// `δ_e ⊗ 1`
    pub fn unit(system: Arc<TwistedSystem>) -> Self {
        let e = system.ctx().identity();
        let mut f = Self::zero(system);
        f.entries.insert(e, Coefficient::one());
        f
    }

    /// `δ_x ⊗ c`, validated against the system.
    pub fn delta(system: Arc<TwistedSystem>, x: GroupElement, c: Coefficient) -> Result<Self> {
        Self::from_entries(system, [(x, c)])
    }

    /// Build from `(x, f(x))` pairs; repeated elements are summed.
    pub fn from_entries(
        system: Arc<TwistedSystem>,
        entries: impl IntoIterator<Item = (GroupElement, Coefficient)>,
    ) -> Result<Self> {
        let mut f = Self::zero(system);
        for (x, c) in entries {
            f.system.ctx().validate(&x)?;
            if !c.fits(f.system.model()) {
                return Err(Error::ModelMismatch(format!(
                    "coefficient at {x} does not belong to model {}",
                    f.system.model()
                )));
            }
            match f.entries.get_mut(&x) {
                Some(v) => *v = v.add(&c),
                None => {
                    f.entries.insert(x, c);
                }
            }
        }
        f.prune();
        Ok(f)
    }

    /// Random element with up to `support` entries in the radius-`radius`
    /// box (uniform on finite factors) and random coefficients.
    pub fn random<R: Rng + ?Sized>(
        system: Arc<TwistedSystem>,
        rng: &mut R,
        support: usize,
        radius: i64,
    ) -> Self {
        let mut entries = BTreeMap::new();
        for _ in 0..support {
            let x = system.ctx().sample(rng, radius);
            let c = system.random_coefficient(rng, false);
            entries.insert(x, c);
        }
        let mut f = CrossedElement { system, entries };
        f.prune();
        f
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        &self.system
    }

    pub fn entries(&self) -> &BTreeMap<GroupElement, Coefficient> {
        &self.entries
    }

    pub fn get(&self, x: &GroupElement) -> Coefficient {
        self.entries.get(x).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The pruning threshold applied after every operation.
    pub fn prune_threshold(&self) -> f64 {
        PRUNE_THRESHOLD
    }

    /// Largest word length in the support (0 for the zero element).
    pub fn reach(&self) -> u64 {
        let ctx = self.system.ctx();
        self.entries.keys().map(|x| ctx.word_length(x)).max().unwrap_or(0)
    }

    fn prune(&mut self) {
        let sys = self.system.clone();
        self.entries.retain(|_, c| sys.coef_norm(c) >= PRUNE_THRESHOLD);
    }

    fn same_system(&self, other: &CrossedElement) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || self.system == other.system {
            Ok(())
        } else {
            Err(Error::SystemMismatch)
        }
    }

    /// `(f⋄g)(x) = Σ_y f(y) α_y[g(y⁻¹x)] ω(y, y⁻¹x)`
    ///
    /// Contributions are computed in parallel per `y` and summed sequentially
    /// in element order, so the result does not depend on the thread count.
    pub fn product(&self, other: &CrossedElement) -> Result<CrossedElement> {
        self.same_system(other)?;
        let sys = &self.system;
        let ctx = sys.ctx();
        let left: Vec<_> = self.entries.iter().collect();
        let contributions: Vec<Vec<(GroupElement, Coefficient)>> = left
            .par_iter()
            .map(|(y, fy)| {
                other
                    .entries
                    .iter()
                    .map(|(w, gw)| {
                        let v = fy.mul(&sys.act(y, gw)).mul(&sys.omega(y, w));
                        (ctx.mul(y, w), v)
                    })
                    .collect()
            })
            .collect();
        let mut entries: BTreeMap<GroupElement, Coefficient> = BTreeMap::new();
        for (x, v) in contributions.into_iter().flatten() {
            match entries.get_mut(&x) {
                Some(acc) => *acc = acc.add(&v),
                None => {
                    entries.insert(x, v);
                }
            }
        }
        let mut out = CrossedElement {
            system: self.system.clone(),
            entries,
        };
        out.prune();
        Ok(out)
    }

    /// `f^⋄(x) = ω(x, x⁻¹)* α_x[f(x⁻¹)]*`
    pub fn involution(&self) -> CrossedElement {
        let sys = &self.system;
        let ctx = sys.ctx();
        let entries = self
            .entries
            .iter()
            .map(|(y, fy)| {
                // x = y⁻¹
                let x = ctx.inv(y);
                let v = sys.omega(&x, y).conj().mul(&sys.act(&x, fy).conj());
                (x, v)
            })
            .collect();
        CrossedElement {
            system: self.system.clone(),
            entries,
        }
    }

    /// The admissible norm of `x ↦ ‖f(x)‖_A`.
    pub fn norm(&self, norm: &AdmissibleNorm) -> f64 {
        let sys = &self.system;
        norm.apply(
            sys.ctx(),
            self.entries.iter().map(|(x, c)| (x, sys.coef_norm(c))),
        )
    }

    fn zip(&self, other: &CrossedElement, sign: f64) -> Result<CrossedElement> {
        self.same_system(other)?;
        let mut entries = self.entries.clone();
        for (x, c) in &other.entries {
            let c = c.scale(Complex64::new(sign, 0.0));
            match entries.get_mut(x) {
                Some(v) => *v = v.add(&c),
                None => {
                    entries.insert(x.clone(), c);
                }
            }
        }
        let mut out = CrossedElement {
            system: self.system.clone(),
            entries,
        };
        out.prune();
        Ok(out)
    }

    pub fn add(&self, other: &CrossedElement) -> Result<CrossedElement> {
        self.zip(other, 1.0)
    }

    pub fn sub(&self, other: &CrossedElement) -> Result<CrossedElement> {
        self.zip(other, -1.0)
    }

    pub fn scale(&self, s: Complex64) -> CrossedElement {
        let mut out = CrossedElement {
            system: self.system.clone(),
            entries: self.entries.iter().map(|(x, c)| (x.clone(), c.scale(s))).collect(),
        };
        out.prune();
        out
    }

    /// ℓ¹ distance `Σ_x ‖f(x) − g(x)‖_A`.
    pub fn l1_distance(&self, other: &CrossedElement) -> Result<f64> {
        Ok(self.sub(other)?.norm(&AdmissibleNorm::L1))
    }

    /// `f^(2^j)` by repeated squaring for `j = 0..=levels`, recording norms.
    /// Fails with [`Error::BudgetExceeded`] (carrying the norms computed so
    /// far) if a support exceeds `support_budget` or a squaring would need more
    /// than [`PAIR_BUDGET`] coefficient products.
    pub fn power(
        &self,
        levels: usize,
        norm: &AdmissibleNorm,
        support_budget: usize,
    ) -> Result<PowerSeries> {
        let mut current = self.clone();
        let mut norms = vec![current.norm(norm)];
        for level in 0..levels {
            let n = current.len();
            if n > support_budget || n.saturating_mul(n) > PAIR_BUDGET {
                return Err(Error::BudgetExceeded {
                    completed_level: level,
                    support: n,
                    norms,
                });
            }
            current = current.product(&current)?;
            norms.push(current.norm(norm));
        }
        if current.len() > support_budget {
            return Err(Error::BudgetExceeded {
                completed_level: levels,
                support: current.len(),
                norms,
            });
        }
        Ok(PowerSeries {
            element: current,
            norms,
        })
    }
}

/// The commutative-coefficient picture: `f(x; σ)` as a table over
/// `support × Σ-points`, with product and involution written directly in terms
/// of values,
///
/// `(f⋄g)(x;σ) = Σ_y f(y;σ) g(y⁻¹x; y⁻¹·σ) ω(y, y⁻¹x; σ)`,
/// `f^⋄(x;σ) = conj ω(x, x⁻¹; σ) · conj f(x⁻¹; x⁻¹·σ)`.
#[derive(Clone, Debug)]
pub struct AbelianTable {
    system: Arc<TwistedSystem>,
    points: Vec<SigmaPoint>,
    values: BTreeMap<GroupElement, Vec<Complex64>>,
}

impl AbelianTable {
    /// Tabulate `f` at the given Σ-points. Requires a spectrum or standard model.
    pub fn from_element(f: &CrossedElement, points: Vec<SigmaPoint>) -> Result<Self> {
        if f.system.model() == CoefficientModel::Scalar {
            return Err(Error::ModelMismatch(
                "the function-table picture needs spectrum or standard coefficients".into(),
            ));
        }
        let values = f
            .entries
            .iter()
            .map(|(x, c)| (x.clone(), points.iter().map(|s| c.eval(s)).collect()))
            .collect();
        Ok(AbelianTable {
            system: f.system.clone(),
            points,
            values,
        })
    }

    pub fn points(&self) -> &[SigmaPoint] {
        &self.points
    }

    pub fn value(&self, x: &GroupElement, i: usize) -> Complex64 {
        self.values.get(x).map_or(ZERO, |v| v[i])
    }

    /// Three-variable product evaluated directly from the element `g` (needed
    /// because `y⁻¹·σ` may leave the tabulated points).
    pub fn product(f: &CrossedElement, g: &CrossedElement, points: &[SigmaPoint]) -> Result<Self> {
        f.same_system(g)?;
        let sys = &f.system;
        let ctx = sys.ctx();
        let mut values: BTreeMap<GroupElement, Vec<Complex64>> = BTreeMap::new();
        for (y, fy) in &f.entries {
            let yi = ctx.inv(y);
            for (w, gw) in &g.entries {
                let x = ctx.mul(y, w);
                let om = sys.omega(y, w);
                let row = values.entry(x).or_insert_with(|| vec![ZERO; points.len()]);
                for (i, s) in points.iter().enumerate() {
                    row[i] += fy.eval(s) * gw.eval(&sys.sigma_act(&yi, s)) * om.eval(s);
                }
            }
        }
        Ok(AbelianTable {
            system: f.system.clone(),
            points: points.to_vec(),
            values,
        })
    }

    /// Three-variable involution of `f`.
    pub fn involution(f: &CrossedElement, points: &[SigmaPoint]) -> Self {
        let sys = &f.system;
        let ctx = sys.ctx();
        let values = f
            .entries
            .iter()
            .map(|(y, fy)| {
                let x = ctx.inv(y);
                let om = sys.omega(&x, y);
                let row = points
                    .iter()
                    .map(|s| om.eval(s).conj() * fy.eval(&sys.sigma_act(y, s)).conj())
                    .collect();
                (x, row)
            })
            .collect();
        AbelianTable {
            system: f.system.clone(),
            points: points.to_vec(),
            values,
        }
    }

    /// Largest pointwise difference against another table on the same points.
    pub fn max_difference(&self, other: &AbelianTable) -> f64 {
        let mut m = 0.0f64;
        for x in self.values.keys().chain(other.values.keys()) {
            for i in 0..self.points.len() {
                m = m.max((self.value(x, i) - other.value(x, i)).norm());
            }
        }
        m
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        &self.system
    }
}
