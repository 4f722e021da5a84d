//! Twisted kernel calculus: A-valued convolution-dominated kernels on G×G,
//! the map Γ from the crossed product onto covariant kernels, the evaluation
//! map Υ, and the scalar kernel algebra of the standard case.
//!
//! A kernel is stored by diagonals: for each `a` in a finite set, the map
//! `z ↦ K(z, a⁻¹z)`, given by explicit values on a finite window and a tail
//! rule elsewhere.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::coefficient::{Coefficient, CoefficientModel, SigmaPoint, ZERO};
use crate::crossed::CrossedElement;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::system::{Action, TwistedSystem};
use crate::weight::AdmissibleNorm;

/// Values of a diagonal outside its window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Tail {
    Zero,
    /// `K(z, a⁻¹z) = α_{z⁻¹}[c]`, the covariant pattern.
    Covariant(Coefficient),
    /// `K(z, a⁻¹z) = c` for a coefficient that is not α-invariant.
    Constant(Coefficient),
}

/// One diagonal `z ↦ K(z, a⁻¹z)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagonal {
    pub window: BTreeMap<GroupElement, Coefficient>,
    pub tail: Tail,
}

impl Diagonal {
    pub fn covariant(c: Coefficient) -> Self {
        Diagonal {
            window: BTreeMap::new(),
            tail: Tail::Covariant(c),
        }
    }
}

/// A band-limited kernel G×G → A.
#[derive(Clone, Debug)]
pub struct KernelElement {
    system: Arc<TwistedSystem>,
    diagonals: BTreeMap<GroupElement, Diagonal>,
}

/// Result of a covariance check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub covariant: bool,
    pub residual: f64,
    pub witness: Option<String>,
}

/// Tolerance used to call a kernel covariant.
pub const COVARIANCE_TOL: f64 = 1e-12;

fn is_invariant(sys: &TwistedSystem, c: &Coefficient) -> bool {
    matches!(sys.action(), Action::Trivial) || c.constant_value().is_some()
}

fn normalize_tail(sys: &TwistedSystem, t: Tail) -> Tail {
    match t {
        Tail::Constant(c) if is_invariant(sys, &c) => Tail::Covariant(c),
        t => t,
    }
}

impl KernelElement {
    pub fn zero(system: Arc<TwistedSystem>) -> Self {
        KernelElement {
            system,
            diagonals: BTreeMap::new(),
        }
    }

    /// Build from diagonals, validating elements and coefficient models.
    pub fn from_diagonals(
        system: Arc<TwistedSystem>,
        diagonals: impl IntoIterator<Item = (GroupElement, Diagonal)>,
    ) -> Result<Self> {
        let model = system.model();
        let ctx = system.ctx();
        let check = |c: &Coefficient, at: &str| -> Result<()> {
            if c.fits(model) {
                Ok(())
            } else {
                Err(Error::ModelMismatch(format!("kernel value {at} is not in model {model}")))
            }
        };
        let mut out = BTreeMap::new();
        for (a, mut d) in diagonals {
            ctx.validate(&a)?;
            for (z, c) in &d.window {
                ctx.validate(z)?;
                check(c, &format!("at diagonal {a}, position {z}"))?;
            }
            match &d.tail {
                Tail::Zero => {}
                Tail::Covariant(c) | Tail::Constant(c) => check(c, &format!("tail of diagonal {a}"))?,
            }
            d.tail = normalize_tail(&system, d.tail);
            if out.insert(a.clone(), d).is_some() {
                return Err(Error::Invalid(format!("diagonal {a} listed twice")));
            }
        }
        Ok(KernelElement {
            system,
            diagonals: out,
        })
    }

    /// A random kernel with `count` diagonals within `radius` and covariant
    /// tails. With `perturb`, each diagonal also gets one window entry that
    /// breaks covariance (on infinite groups) or a fully random window.
    pub fn random<R: Rng + ?Sized>(
        system: Arc<TwistedSystem>,
        rng: &mut R,
        count: usize,
        radius: i64,
        perturb: bool,
    ) -> Self {
        let mut diagonals = BTreeMap::new();
        for _ in 0..count {
            let a = system.ctx().sample(rng, radius);
            let mut d = Diagonal::covariant(system.random_coefficient(rng, false));
            if perturb {
                let z = system.ctx().sample(rng, radius);
                d.window.insert(z, system.random_coefficient(rng, false));
            }
            diagonals.insert(a, d);
        }
        KernelElement { system, diagonals }
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        &self.system
    }

    pub fn diagonals(&self) -> &BTreeMap<GroupElement, Diagonal> {
        &self.diagonals
    }

    /// Overwrite a single value `K(z, a⁻¹z)`.
    pub fn set_entry(&mut self, a: &GroupElement, z: GroupElement, c: Coefficient) {
        self.diagonals
            .entry(a.clone())
            .or_insert(Diagonal {
                window: BTreeMap::new(),
                tail: Tail::Zero,
            })
            .window
            .insert(z, c);
    }

    /// Largest word length of a diagonal offset.
    pub fn reach(&self) -> u64 {
        let ctx = self.system.ctx();
        self.diagonals.keys().map(|a| ctx.word_length(a)).max().unwrap_or(0)
    }

    fn same_system(&self, other: &KernelElement) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || self.system == other.system {
            Ok(())
        } else {
            Err(Error::SystemMismatch)
        }
    }

    fn window_covers_group(&self, d: &Diagonal) -> bool {
        self.system.ctx().order().is_some_and(|n| d.window.len() >= n)
    }

    fn tail_value(&self, tail: &Tail, z: &GroupElement) -> Coefficient {
        match tail {
            Tail::Zero => Coefficient::zero(),
            Tail::Covariant(c) => self.system.act(&self.system.ctx().inv(z), c),
            Tail::Constant(c) => c.clone(),
        }
    }

    fn diag_value(&self, d: &Diagonal, z: &GroupElement) -> Coefficient {
        match d.window.get(z) {
            Some(c) => c.clone(),
            None => self.tail_value(&d.tail, z),
        }
    }

    /// `K(z, a⁻¹z)`
    pub fn diagonal_value(&self, a: &GroupElement, z: &GroupElement) -> Coefficient {
        self.diagonals
            .get(a)
            .map_or_else(Coefficient::zero, |d| self.diag_value(d, z))
    }

    /// `K(x, y)`
    pub fn entry(&self, x: &GroupElement, y: &GroupElement) -> Coefficient {
        let a = self.system.ctx().mul_inv(x, y);
        self.diagonal_value(&a, x)
    }

    /// The tail of one composition term `(a, b)` as a function of `x`:
    /// `tK(x) · tL(a⁻¹x) · α_{x⁻¹}[ω(a,b)]`.
    fn term_tail(&self, tk: &Tail, tl: &Tail, a: &GroupElement, b: &GroupElement) -> Result<Tail> {
        let sys = &self.system;
        let om = sys.omega(a, b);
        let om_invariant = is_invariant(sys, &om);
        Ok(match (tk, tl) {
            (Tail::Zero, _) | (_, Tail::Zero) => Tail::Zero,
            (Tail::Covariant(c1), Tail::Covariant(c2)) => {
                Tail::Covariant(c1.mul(&sys.act(a, c2)).mul(&om))
            }
            (Tail::Constant(d1), Tail::Constant(d2)) if om_invariant => {
                normalize_tail(sys, Tail::Constant(d1.mul(d2).mul(&om)))
            }
            _ => {
                return Err(Error::UnsupportedTail(format!(
                    "composition of diagonals {a} and {b} mixes covariant and constant tails"
                )))
            }
        })
    }

    fn add_tails(&self, s: Tail, t: Tail) -> Result<Tail> {
        Ok(match (s, t) {
            (Tail::Zero, t) | (t, Tail::Zero) => t,
            (Tail::Covariant(a), Tail::Covariant(b)) => Tail::Covariant(a.add(&b)),
            (Tail::Constant(a), Tail::Constant(b)) => {
                normalize_tail(&self.system, Tail::Constant(a.add(&b)))
            }
            _ => {
                return Err(Error::UnsupportedTail(
                    "sum of a covariant and a constant tail".into(),
                ))
            }
        })
    }

    /// `(K•L)(x,y) = Σ_z K(x,z) L(z,y) α_{x⁻¹}[ω(xz⁻¹, zy⁻¹)]`
    ///
    /// On infinite groups a covariant tail cannot be combined with a constant
    /// one and the result is [`Error::UnsupportedTail`]; on finite groups the
    /// affected diagonals are stored explicitly instead.
    pub fn compose(&self, other: &KernelElement) -> Result<KernelElement> {
        self.same_system(other)?;
        let sys = &self.system;
        let ctx = sys.ctx();
        type Term<'a> = (&'a GroupElement, &'a Diagonal, &'a GroupElement, &'a Diagonal, GroupElement, Coefficient);
        let mut terms: BTreeMap<GroupElement, Vec<Term>> = BTreeMap::new();
        for (a, dk) in &self.diagonals {
            for (b, dl) in &other.diagonals {
                let term = (a, dk, b, dl, ctx.inv(a), sys.omega(a, b));
                terms.entry(ctx.mul(a, b)).or_default().push(term);
            }
        }
        let mut out = BTreeMap::new();
        for (c, list) in terms {
            let term_value = |x: &GroupElement| -> Coefficient {
                let xi = ctx.inv(x);
                let mut acc = Coefficient::zero();
                for (_, dk, _, dl, ai, om) in &list {
                    let k = self.diag_value(dk, x);
                    let l = other.diag_value(dl, &ctx.mul(ai, x));
                    acc = acc.add(&k.mul(&l).mul(&sys.act(&xi, om)));
                }
                acc
            };
            let tail = list.iter().try_fold(Tail::Zero, |acc, (a, dk, b, dl, _, _)| {
                let t = self.term_tail(&dk.tail, &dl.tail, a, b)?;
                self.add_tails(acc, t)
            });
            let (points, tail): (Vec<GroupElement>, Tail) = match tail {
                Ok(tail) => {
                    let mut w = BTreeSet::new();
                    for (a, dk, _, dl, _, _) in &list {
                        w.extend(dk.window.keys().cloned());
                        w.extend(dl.window.keys().map(|z| ctx.mul(a, z)));
                    }
                    (w.into_iter().collect(), tail)
                }
                Err(e) => match ctx.elements() {
                    Some(all) => (all.to_vec(), Tail::Zero),
                    None => return Err(e),
                },
            };
            let window: BTreeMap<_, _> = points.into_iter().map(|x| {
                let v = term_value(&x);
                (x, v)
            }).collect();
            let d = Diagonal { window, tail };
            if !is_zero_diagonal(&d) {
                out.insert(c, d);
            }
        }
        Ok(KernelElement {
            system: self.system.clone(),
            diagonals: out,
        })
    }

    /// `K^•(x,y) = α_{x⁻¹}[ω(xy⁻¹, yx⁻¹)*] K(y,x)*`
    pub fn involve(&self) -> Result<KernelElement> {
        let sys = &self.system;
        let ctx = sys.ctx();
        let mut out = BTreeMap::new();
        for (a, d) in &self.diagonals {
            // output diagonal c = a⁻¹, and K^•_c(x) = α_{x⁻¹}[ω(c,a)*] K_a(a x)*
            let c = ctx.inv(a);
            let om = sys.omega(&c, a).conj();
            let value = |x: &GroupElement| -> Coefficient {
                sys.act(&ctx.inv(x), &om)
                    .mul(&self.diag_value(d, &ctx.mul(a, x)).conj())
            };
            let tail = match &d.tail {
                Tail::Zero => Ok(Tail::Zero),
                Tail::Covariant(k) => Ok(Tail::Covariant(om.mul(&sys.act(&c, k).conj()))),
                Tail::Constant(k) if is_invariant(sys, &om) => {
                    Ok(normalize_tail(sys, Tail::Constant(k.conj().mul(&om))))
                }
                Tail::Constant(_) => Err(Error::UnsupportedTail(format!(
                    "involution of constant tail on diagonal {a} with a σ-dependent cocycle"
                ))),
            };
            let (points, tail) = match tail {
                Ok(t) => (d.window.keys().map(|z| ctx.mul(&c, z)).collect::<Vec<_>>(), t),
                Err(e) => match ctx.elements() {
                    Some(all) => (all.to_vec(), Tail::Zero),
                    None => return Err(e),
                },
            };
            let window = points.into_iter().map(|x| {
                let v = value(&x);
                (x, v)
            }).collect();
            out.insert(c, Diagonal { window, tail });
        }
        Ok(KernelElement {
            system: self.system.clone(),
            diagonals: out,
        })
    }

    fn zip(&self, other: &KernelElement, sign: f64) -> Result<KernelElement> {
        self.same_system(other)?;
        let ctx = self.system.ctx();
        let s = Complex64::new(sign, 0.0);
        let keys: BTreeSet<&GroupElement> =
            self.diagonals.keys().chain(other.diagonals.keys()).collect();
        let empty = Diagonal {
            window: BTreeMap::new(),
            tail: Tail::Zero,
        };
        let mut out = BTreeMap::new();
        for a in keys {
            let d1 = self.diagonals.get(a).unwrap_or(&empty);
            let d2 = other.diagonals.get(a).unwrap_or(&empty);
            let neg = |t: &Tail| match t {
                Tail::Zero => Tail::Zero,
                Tail::Covariant(c) => Tail::Covariant(c.scale(s)),
                Tail::Constant(c) => Tail::Constant(c.scale(s)),
            };
            let tail = self.add_tails(d1.tail.clone(), neg(&d2.tail));
            let (points, tail) = match tail {
                Ok(t) => {
                    let w: BTreeSet<_> = d1.window.keys().chain(d2.window.keys()).cloned().collect();
                    (w.into_iter().collect::<Vec<_>>(), t)
                }
                Err(e) => match ctx.elements() {
                    Some(all) => (all.to_vec(), Tail::Zero),
                    None => return Err(e),
                },
            };
            let window = points
                .into_iter()
                .map(|z| {
                    let v = self.diag_value(d1, &z).add(&other.diag_value(d2, &z).scale(s));
                    (z, v)
                })
                .collect();
            out.insert(a.clone(), Diagonal { window, tail });
        }
        Ok(KernelElement {
            system: self.system.clone(),
            diagonals: out,
        })
    }

    pub fn add(&self, other: &KernelElement) -> Result<KernelElement> {
        self.zip(other, 1.0)
    }

    pub fn sub(&self, other: &KernelElement) -> Result<KernelElement> {
        self.zip(other, -1.0)
    }

    /// `κ(a) = sup_z ‖K(z, a⁻¹z)‖_A`, exact for window-plus-tail diagonals.
    pub fn kappa(&self) -> BTreeMap<GroupElement, f64> {
        let sys = &self.system;
        self.diagonals
            .iter()
            .map(|(a, d)| {
                let w = d.window.values().map(|c| sys.coef_norm(c)).fold(0.0, f64::max);
                let t = if self.window_covers_group(d) {
                    0.0
                } else {
                    match &d.tail {
                        Tail::Zero => 0.0,
                        // α is isometric, so every translate has the same norm
                        Tail::Covariant(c) | Tail::Constant(c) => sys.coef_norm(c),
                    }
                };
                (a.clone(), w.max(t))
            })
            .collect()
    }

    /// The admissible norm of κ.
    pub fn norm(&self, norm: &AdmissibleNorm) -> f64 {
        let kappa = self.kappa();
        norm.apply(self.system.ctx(), kappa.iter().map(|(a, v)| (a, *v)))
    }

    /// `(Γf)(x,y) = α_{x⁻¹}[f(xy⁻¹)]`
    pub fn gamma(f: &CrossedElement) -> KernelElement {
        KernelElement {
            system: f.system().clone(),
            diagonals: f
                .entries()
                .iter()
                .map(|(a, c)| (a.clone(), Diagonal::covariant(c.clone())))
                .collect(),
        }
    }

    /// `(Γ⁻¹K)(x) = α_x[K(x,e)]`; fails unless K is covariant.
    pub fn gamma_inverse(&self) -> Result<CrossedElement> {
        let rep = self.covariance_exact();
        if !rep.covariant {
            return Err(Error::NotCovariant {
                residual: rep.residual,
                witness: rep.witness.unwrap_or_default(),
            });
        }
        let sys = &self.system;
        CrossedElement::from_entries(
            self.system.clone(),
            self.diagonals
                .iter()
                .map(|(a, d)| (a.clone(), sys.act(a, &self.diag_value(d, a)))),
        )
    }

    /// Exact covariance test: each diagonal must equal `z ↦ α_{z⁻¹}[K(e, a⁻¹)]`
    /// on its window and follow the same pattern in its tail.
    pub fn covariance_exact(&self) -> CovarianceReport {
        let sys = &self.system;
        let ctx = sys.ctx();
        let e = ctx.identity();
        let mut residual = 0.0f64;
        let mut witness = None;
        let mut offer = |r: f64, w: String| {
            if r > residual || (r.is_nan() && !residual.is_nan()) {
                residual = r;
                witness = Some(w);
            }
        };
        for (a, d) in &self.diagonals {
            let c = self.diag_value(d, &e);
            for (z, v) in &d.window {
                let want = sys.act(&ctx.inv(z), &c);
                offer(sys.coef_distance(v, &want), format!("diagonal {a}, position {z}"));
            }
            if self.window_covers_group(d) {
                continue;
            }
            let tail_res = match &d.tail {
                Tail::Zero => sys.coef_norm(&c),
                Tail::Covariant(t) => sys.coef_distance(t, &c),
                Tail::Constant(t) => {
                    // compare at points beyond the window and the corrections
                    let far = far_points(self, d, t, &c);
                    far.iter()
                        .map(|z| sys.coef_distance(t, &sys.act(&ctx.inv(z), &c)))
                        .fold(0.0, f64::max)
                }
            };
            offer(tail_res, format!("tail of diagonal {a}"));
        }
        CovarianceReport {
            covariant: residual < COVARIANCE_TOL,
            residual,
            witness,
        }
    }

    /// Sampled covariance residual `max ‖K(xz,yz) − α_{z⁻¹}[K(x,y)]‖` over the
    /// given triples.
    pub fn is_covariant(&self, samples: &[(GroupElement, GroupElement, GroupElement)]) -> CovarianceReport {
        let sys = &self.system;
        let ctx = sys.ctx();
        let mut residual = 0.0f64;
        let mut witness = None;
        for (x, y, z) in samples {
            let lhs = self.entry(&ctx.mul(x, z), &ctx.mul(y, z));
            let rhs = sys.act(&ctx.inv(z), &self.entry(x, y));
            let r = sys.coef_distance(&lhs, &rhs);
            if r > residual || (r.is_nan() && !residual.is_nan()) {
                residual = r;
                witness = Some(format!("x={x}, y={y}, z={z}"));
            }
        }
        CovarianceReport {
            covariant: residual < COVARIANCE_TOL,
            residual,
            witness,
        }
    }

    /// Sample triples `(x, y, z)` on the kernel's band: `x` runs over window
    /// positions and random points, `y = a⁻¹x` for a stored diagonal `a`.
    pub fn covariance_samples<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
        radius: i64,
    ) -> Vec<(GroupElement, GroupElement, GroupElement)> {
        let ctx = self.system.ctx();
        let mut out = Vec::new();
        let diags: Vec<_> = self.diagonals.iter().collect();
        if diags.is_empty() {
            return out;
        }
        for (a, d) in &diags {
            let ai = ctx.inv(a);
            for w in d.window.keys() {
                // a shift by e would compare the entry with itself
                let mut z = ctx.sample(rng, radius);
                for _ in 0..16 {
                    if !ctx.is_identity(&z) {
                        break;
                    }
                    z = ctx.sample(rng, radius);
                }
                out.push((w.clone(), ctx.mul(&ai, w), z.clone()));
                // also land on the window position from elsewhere
                let x = ctx.mul(w, &ctx.inv(&z));
                out.push((x.clone(), ctx.mul(&ai, &x), z));
            }
        }
        for _ in 0..count {
            let (a, _) = diags[rng.gen_range(0..diags.len())];
            let x = ctx.sample(rng, radius);
            let z = ctx.sample(rng, radius);
            out.push((x.clone(), ctx.mul(&ctx.inv(a), &x), z));
        }
        out
    }

    /// `(ΥK)(x,y) = K(x,y; e)`; standard model only.
    pub fn upsilon(&self) -> Result<ScalarKernel> {
        let sys = &self.system;
        require_standard(sys)?;
        let ctx = sys.ctx();
        let e = SigmaPoint::Group(ctx.identity());
        let mut out = BTreeMap::new();
        for (a, d) in &self.diagonals {
            let mut window: BTreeMap<GroupElement, Complex64> =
                d.window.iter().map(|(z, c)| (z.clone(), c.eval(&e))).collect();
            let tail = if self.window_covers_group(d) {
                ZERO
            } else {
                match &d.tail {
                    Tail::Zero => ZERO,
                    Tail::Covariant(c) => {
                        // α_{z⁻¹}[c] at e is c(z)
                        if let Coefficient::Standard { correction, .. } = c {
                            for z in correction.keys() {
                                window
                                    .entry(z.clone())
                                    .or_insert_with(|| c.eval(&SigmaPoint::Group(z.clone())));
                            }
                        }
                        background(c)
                    }
                    Tail::Constant(c) => c.eval(&e),
                }
            };
            out.insert(a.clone(), ScalarDiagonal { window, tail });
        }
        Ok(ScalarKernel {
            system: self.system.clone(),
            diagonals: out,
        })
    }

    /// Rebuild the unique covariant kernel with the given Υ-image, using
    /// `K(x,y; w) = (ΥK)(xw, yw)`.
    pub fn upsilon_inverse(s: &ScalarKernel) -> Result<KernelElement> {
        let sys = &s.system;
        require_standard(sys)?;
        let diagonals = s
            .diagonals
            .iter()
            .map(|(a, d)| {
                let bg = if s.window_covers_group(d) { ZERO } else { d.tail };
                let correction = d.window.iter().map(|(w, v)| (w.clone(), v - bg)).collect();
                (a.clone(), Diagonal::covariant(Coefficient::standard(bg, correction)))
            })
            .collect();
        Ok(KernelElement {
            system: s.system.clone(),
            diagonals,
        })
    }
}

fn background(c: &Coefficient) -> Complex64 {
    match c {
        Coefficient::Scalar(v) => *v,
        Coefficient::Standard { background, .. } => *background,
        Coefficient::Spectrum(_) => unreachable!("standard model checked"),
    }
}

fn require_standard(sys: &TwistedSystem) -> Result<()> {
    if sys.model() == CoefficientModel::Standard && matches!(sys.action(), Action::Translation) {
        Ok(())
    } else {
        Err(Error::ModelMismatch(
            "scalar kernels need the standard model with the translation action".into(),
        ))
    }
}

fn is_zero_diagonal(d: &Diagonal) -> bool {
    d.tail == Tail::Zero && d.window.values().all(Coefficient::is_zero)
}

/// Points far from the window and from all standard-model corrections in play.
fn far_points(k: &KernelElement, d: &Diagonal, t: &Coefficient, c: &Coefficient) -> Vec<GroupElement> {
    let ctx = k.system.ctx();
    let support_len = |c: &Coefficient| match c {
        Coefficient::Standard { correction, .. } => {
            correction.keys().map(|z| ctx.word_length(z)).max().unwrap_or(0)
        }
        _ => 0,
    };
    let r = d.window.keys().map(|z| ctx.word_length(z)).max().unwrap_or(0)
        + support_len(t)
        + support_len(c)
        + 1;
    let shells = ctx.ball(r + 1);
    let far: Vec<_> = shells
        .into_iter()
        .filter(|z| ctx.word_length(z) == r + 1 && !d.window.contains_key(z))
        .take(4)
        .collect();
    far
}

/// One diagonal of a scalar kernel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarDiagonal {
    pub window: BTreeMap<GroupElement, Complex64>,
    pub tail: Complex64,
}

/// A band-limited kernel G×G → ℂ over a standard-case system, composed with
/// the cocycle evaluated at the row index.
#[derive(Clone, Debug)]
pub struct ScalarKernel {
    system: Arc<TwistedSystem>,
    diagonals: BTreeMap<GroupElement, ScalarDiagonal>,
}

impl ScalarKernel {
    pub fn from_diagonals(
        system: Arc<TwistedSystem>,
        diagonals: BTreeMap<GroupElement, ScalarDiagonal>,
    ) -> Result<Self> {
        require_standard(&system)?;
        for (a, d) in &diagonals {
            system.ctx().validate(a)?;
            for z in d.window.keys() {
                system.ctx().validate(z)?;
            }
        }
        Ok(ScalarKernel { system, diagonals })
    }

    pub fn system(&self) -> &Arc<TwistedSystem> {
        &self.system
    }

    pub fn diagonals(&self) -> &BTreeMap<GroupElement, ScalarDiagonal> {
        &self.diagonals
    }

    pub fn reach(&self) -> u64 {
        let ctx = self.system.ctx();
        self.diagonals.keys().map(|a| ctx.word_length(a)).max().unwrap_or(0)
    }

    fn window_covers_group(&self, d: &ScalarDiagonal) -> bool {
        self.system.ctx().order().is_some_and(|n| d.window.len() >= n)
    }

    fn diag_value(d: &ScalarDiagonal, z: &GroupElement) -> Complex64 {
        d.window.get(z).copied().unwrap_or(d.tail)
    }

    /// `K(x, y)`
    pub fn entry(&self, x: &GroupElement, y: &GroupElement) -> Complex64 {
        let a = self.system.ctx().mul_inv(x, y);
        self.diagonals
            .get(&a)
            .map_or(ZERO, |d| Self::diag_value(d, x))
    }

    fn omega_support(c: &Coefficient) -> Vec<GroupElement> {
        match c {
            Coefficient::Standard { correction, .. } => correction.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    fn same_system(&self, other: &ScalarKernel) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || self.system == other.system {
            Ok(())
        } else {
            Err(Error::SystemMismatch)
        }
    }

    /// `(K•L)(x,y) = Σ_z K(x,z) L(z,y) ω(xz⁻¹, zy⁻¹; x)`
    pub fn compose(&self, other: &ScalarKernel) -> Result<ScalarKernel> {
        self.same_system(other)?;
        let sys = &self.system;
        let ctx = sys.ctx();
        let mut terms: BTreeMap<GroupElement, Vec<(&GroupElement, &ScalarDiagonal, Coefficient, &ScalarDiagonal)>> =
            BTreeMap::new();
        for (a, dk) in &self.diagonals {
            for (b, dl) in &other.diagonals {
                terms
                    .entry(ctx.mul(a, b))
                    .or_default()
                    .push((a, dk, sys.omega(a, b), dl));
            }
        }
        let mut out = BTreeMap::new();
        for (c, list) in terms {
            let mut points = BTreeSet::new();
            let mut tail = ZERO;
            for (a, dk, om, dl) in &list {
                points.extend(dk.window.keys().cloned());
                points.extend(dl.window.keys().map(|z| ctx.mul(a, z)));
                points.extend(Self::omega_support(om));
                tail += dk.tail * dl.tail * background(om);
            }
            let window = points
                .into_iter()
                .map(|x| {
                    let ai_x = |a: &GroupElement| ctx.mul(&ctx.inv(a), &x);
                    let s = SigmaPoint::Group(x.clone());
                    let v = list.iter().fold(ZERO, |acc, (a, dk, om, dl)| {
                        acc + Self::diag_value(dk, &x) * Self::diag_value(dl, &ai_x(a)) * om.eval(&s)
                    });
                    (x, v)
                })
                .collect();
            out.insert(c, ScalarDiagonal { window, tail });
        }
        Ok(ScalarKernel {
            system: self.system.clone(),
            diagonals: out,
        })
    }

    /// `K^•(x,y) = conj ω(xy⁻¹, yx⁻¹; x) · conj K(y,x)`
    pub fn involve(&self) -> ScalarKernel {
        let sys = &self.system;
        let ctx = sys.ctx();
        let mut out = BTreeMap::new();
        for (a, d) in &self.diagonals {
            let c = ctx.inv(a);
            let om = sys.omega(&c, a);
            let mut points: BTreeSet<GroupElement> = d.window.keys().map(|z| ctx.mul(&c, z)).collect();
            points.extend(Self::omega_support(&om));
            let window = points
                .into_iter()
                .map(|x| {
                    let v = om.eval(&SigmaPoint::Group(x.clone())).conj()
                        * Self::diag_value(d, &ctx.mul(a, &x)).conj();
                    (x, v)
                })
                .collect();
            let tail = background(&om).conj() * d.tail.conj();
            out.insert(c, ScalarDiagonal { window, tail });
        }
        ScalarKernel {
            system: self.system.clone(),
            diagonals: out,
        }
    }

    /// `κ(a) = sup_z |K(z, a⁻¹z)|`
    pub fn kappa(&self) -> BTreeMap<GroupElement, f64> {
        self.diagonals
            .iter()
            .map(|(a, d)| {
                let w = d.window.values().map(|v| v.norm()).fold(0.0, f64::max);
                let t = if self.window_covers_group(d) { 0.0 } else { d.tail.norm() };
                (a.clone(), w.max(t))
            })
            .collect()
    }

    pub fn norm(&self, norm: &AdmissibleNorm) -> f64 {
        let kappa = self.kappa();
        norm.apply(self.system.ctx(), kappa.iter().map(|(a, v)| (a, *v)))
    }

    /// Sup of `|K(x,y) − L(x,y)|` over all entries (exact: compares windows and tails).
    pub fn max_difference(&self, other: &ScalarKernel) -> f64 {
        let keys: BTreeSet<&GroupElement> = self.diagonals.keys().chain(other.diagonals.keys()).collect();
        let zero = ScalarDiagonal {
            window: BTreeMap::new(),
            tail: ZERO,
        };
        let mut m = 0.0f64;
        for a in keys {
            let d1 = self.diagonals.get(a).unwrap_or(&zero);
            let d2 = other.diagonals.get(a).unwrap_or(&zero);
            for z in d1.window.keys().chain(d2.window.keys()) {
                m = m.max((Self::diag_value(d1, z) - Self::diag_value(d2, z)).norm());
            }
            let covers = self.window_covers_group(d1) || self.window_covers_group(d2);
            if !covers {
                m = m.max((d1.tail - d2.tail).norm());
            }
        }
        m
    }
}
