//! Twisted systems `(A, α, ω)` with commutative coefficients and
//! center-valued cocycles.
//!
//! Conventions: `[α_x φ](σ) = φ(x⁻¹·σ)`, so for the translation action
//! `[α_x φ](y) = φ(x⁻¹y)` and in particular `[α_{x⁻¹} φ](σ) = φ(x·σ)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient::{Coefficient, CoefficientModel, SigmaPoint, ONE};
use crate::error::{Error, Result};
use crate::group::{GroupCtx, GroupElement};

/// `exp(2πi t)`, exact at multiples of 1/4.
pub fn unit_phase(t: f64) -> Complex64 {
    let r = t - t.floor();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if r == 0.25 {
        Complex64::new(0.0, 1.0)
    } else if r == 0.5 {
        Complex64::new(-1.0, 0.0)
    } else if r == 0.75 {
        Complex64::new(0.0, -1.0)
    } else {
        let a = std::f64::consts::TAU * r;
        Complex64::new(a.cos(), a.sin())
    }
}

/// An action of G on a finite set Σ = {0, ..., size-1}.
#[derive(Clone, Debug, PartialEq)]
pub struct PointAction {
    size: usize,
    kind: PointKind,
}

#[derive(Clone, Debug, PartialEq)]
enum PointKind {
    /// `x·σ` for every element of a finite group.
    Table(HashMap<GroupElement, Vec<usize>>),
    /// Commuting permutations for the basis vectors of `Z^n`, with their orders.
    Lattice { gens: Vec<Vec<usize>>, orders: Vec<i64> },
}

fn is_permutation(p: &[usize], size: usize) -> bool {
    let mut seen = vec![false; size];
    p.len() == size
        && p.iter().all(|&i| {
            i < size && !std::mem::replace(&mut seen[i], true)
        })
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

impl PointAction {
    /// Left multiplication of a finite group on itself, Σ indexed in element order.
    pub fn regular(ctx: &GroupCtx) -> Result<Self> {
        let elements = ctx
            .elements()
            .ok_or_else(|| Error::Invalid("point:regular needs a finite group".into()))?;
        let index: HashMap<&GroupElement, usize> =
            elements.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let table = elements
            .iter()
            .map(|x| {
                let perm = elements.iter().map(|s| index[&ctx.mul(x, s)]).collect();
                (x.clone(), perm)
            })
            .collect();
        Ok(PointAction {
            size: elements.len(),
            kind: PointKind::Table(table),
        })
    }

    /// An action given by permutations of a generating set. For `Z^n` the
    /// generators must be the basis vectors (the permutations must commute);
    /// for a finite group the assignment is extended to a homomorphism, which
    /// is checked exhaustively.
    pub fn from_generators(
        ctx: &GroupCtx,
        size: usize,
        generators: &[(GroupElement, Vec<usize>)],
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::Invalid("point action needs a nonempty set".into()));
        }
        for (g, p) in generators {
            ctx.validate(g)?;
            if !is_permutation(p, size) {
                return Err(Error::Invalid(format!("image of {g} is not a permutation of 0..{size}")));
            }
        }
        if let Some(n) = ctx.lattice_rank() {
            let mut gens = vec![(0..size).collect::<Vec<_>>(); n];
            for (g, p) in generators {
                let i = (0..n)
                    .find(|&i| {
                        g.coords().iter().enumerate().all(|(j, &c)| c == i64::from(i == j))
                    })
                    .ok_or_else(|| {
                        Error::Invalid(format!("lattice generators must be basis vectors, got {g}"))
                    })?;
                gens[i] = p.clone();
            }
            for a in 0..n {
                for b in 0..n {
                    if compose(&gens[a], &gens[b]) != compose(&gens[b], &gens[a]) {
                        return Err(Error::Invalid("lattice permutations must commute".into()));
                    }
                }
            }
            let orders = gens
                .iter()
                .map(|p| {
                    let id: Vec<usize> = (0..size).collect();
                    let mut q = p.clone();
                    let mut k = 1;
                    while q != id {
                        q = compose(p, &q);
                        k += 1;
                    }
                    k
                })
                .collect();
            return Ok(PointAction {
                size,
                kind: PointKind::Lattice { gens, orders },
            });
        }
        let elements = ctx
            .elements()
            .ok_or_else(|| Error::Invalid("point actions need a lattice or a finite group".into()))?;
        let mut table: HashMap<GroupElement, Vec<usize>> = HashMap::new();
        table.insert(ctx.identity(), (0..size).collect());
        let mut frontier = vec![ctx.identity()];
        while let Some(x) = frontier.pop() {
            for (g, p) in generators {
                let xg = ctx.mul(&x, g);
                let img = compose(&table[&x], p);
                match table.get(&xg) {
                    Some(existing) if *existing != img => {
                        return Err(Error::Invalid(format!(
                            "generator permutations do not define an action (conflict at {xg})"
                        )))
                    }
                    Some(_) => {}
                    None => {
                        table.insert(xg.clone(), img);
                        frontier.push(xg);
                    }
                }
            }
        }
        if table.len() != elements.len() {
            return Err(Error::Invalid("point action generators do not generate the group".into()));
        }
        for x in elements {
            for y in elements {
                if table[&ctx.mul(x, y)] != compose(&table[x], &table[y]) {
                    return Err(Error::Invalid(format!(
                        "generator permutations do not define an action (x={x}, y={y})"
                    )));
                }
            }
        }
        Ok(PointAction {
            size,
            kind: PointKind::Table(table),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `x·σ`
    pub fn apply(&self, x: &GroupElement, sigma: usize) -> usize {
        match &self.kind {
            PointKind::Table(t) => t[x][sigma],
            PointKind::Lattice { gens, orders } => {
                let mut s = sigma;
                for ((c, p), ord) in x.coords().iter().zip(gens).zip(orders) {
                    for _ in 0..c.rem_euclid(*ord) {
                        s = p[s];
                    }
                }
                s
            }
        }
    }
}

/// The action α.
#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    Trivial,
    Point(Arc<PointAction>),
    /// `[α_x φ](y) = φ(x⁻¹y)` on the standard model.
    Translation,
}

/// A normalized, unitary, center-valued 2-cocycle.
#[derive(Clone, Debug, PartialEq)]
pub enum Cocycle {
    Trivial,
    /// `ω(x,y) = exp(2πi xᵀΘy)` on `Z^n`, Θ real skew-symmetric.
    Theta(Arc<Vec<Vec<f64>>>),
    /// Explicit values; pairs not listed take the value 1.
    Table(Arc<HashMap<(GroupElement, GroupElement), Coefficient>>),
    /// `ω'(x,y) = ω(x,y) b(x) α_x[b(y)] b(xy)*` for a unitary `b` with
    /// `b(e) = 1`; `b` is 1 off its listed support.
    Coboundary {
        base: Box<Cocycle>,
        b: Arc<BTreeMap<GroupElement, Coefficient>>,
    },
}

impl Cocycle {
    pub fn theta(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        let spec = || format!("{matrix:?}");
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::spec("cocycle", &spec(), "Θ must be a nonempty square matrix"));
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() || *v != -matrix[j][i] {
                    return Err(Error::spec("cocycle", &spec(), "Θ must be skew-symmetric"));
                }
            }
        }
        Ok(Cocycle::Theta(Arc::new(matrix)))
    }

    /// Parse `trivial` or `theta:[[..],..]`. Table cocycles are loaded from files
    /// by the io layer.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "trivial" {
            return Ok(Cocycle::Trivial);
        }
        if let Some(json) = spec.strip_prefix("theta:") {
            let m: Vec<Vec<f64>> = serde_json::from_str(json)
                .map_err(|e| Error::spec("cocycle", spec, e.to_string()))?;
            return Cocycle::theta(m);
        }
        Err(Error::spec("cocycle", spec, "expected trivial, theta:<matrix> or table:<file>"))
    }

    /// The bicharacter cocycle `ζ^{a·b'}` on `Cm x Cn` (ζ a primitive
    /// gcd(m,n)-th root of unity) or on `Heisp`, pulled back along
    /// `(a,b,c) ↦ (a,b)` with ζ a primitive p-th root.
    pub fn bicharacter(ctx: &GroupCtx) -> Result<Self> {
        use crate::group::FactorKind::*;
        let kinds = ctx.kinds();
        // both groups use coordinates 0 and 1 for the character pairing
        let modulus = match kinds.as_slice() {
            [Cyclic(m), Cyclic(n)] => gcd(*m, *n),
            [Heisenberg(p)] => *p,
            _ => {
                return Err(Error::Invalid(format!(
                    "no bicharacter cocycle for {}",
                    ctx.spec()
                )))
            }
        };
        let elements = ctx.elements().expect("finite");
        let mut table = HashMap::new();
        for x in elements {
            for y in elements {
                let e = x.coords()[0] * y.coords()[1];
                let v = unit_phase((e.rem_euclid(modulus as i64)) as f64 / modulus as f64);
                if v != ONE {
                    table.insert((x.clone(), y.clone()), Coefficient::Scalar(v));
                }
            }
        }
        Ok(Cocycle::Table(Arc::new(table)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Cocycle::Trivial => "trivial",
            Cocycle::Theta(_) => "theta",
            Cocycle::Table(_) => "table",
            Cocycle::Coboundary { .. } => "coboundary",
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A twisted C*-dynamical system `(A, α, ω)` over a discrete group.
#[derive(Clone, Debug)]
pub struct TwistedSystem {
    ctx: GroupCtx,
    model: CoefficientModel,
    action: Action,
    cocycle: Cocycle,
    name: Option<String>,
}

impl PartialEq for TwistedSystem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx
            && self.model == other.model
            && self.action == other.action
            && self.cocycle == other.cocycle
    }
}

impl fmt::Display for TwistedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            return write!(f, "{n}");
        }
        let action = match &self.action {
            Action::Trivial => "trivial",
            Action::Point(_) => "point",
            Action::Translation => "translation",
        };
        write!(f, "{} [{}; {}; {}]", self.ctx, self.model, action, self.cocycle.name())
    }
}

/// One row of an axiom verification report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomResidual {
    pub axiom: String,
    pub residual: f64,
    pub witness: Option<String>,
}

impl AxiomResidual {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual < tol
    }
}

/// Sampling controls for [`TwistedSystem::verify_axioms`].
#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Triples are enumerated exhaustively when `|G|³` is at most this.
    pub triple_cap: usize,
    /// Quadruples for the four-variable identity are enumerated when `|G|⁴` is
    /// at most this.
    pub quad_cap: usize,
    /// Box radius for sampling lattice coordinates.
    pub radius: i64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 10_000,
            seed: 0,
            triple_cap: 1_000_000,
            quad_cap: 6_000_000,
            radius: 16,
        }
    }
}

/// Per-index RNG so parallel sampling is independent of the schedule.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Default)]
struct Max {
    value: f64,
    witness: Option<String>,
}

impl Max {
    fn offer(&mut self, value: f64, witness: impl FnOnce() -> String) {
        // NaN residuals must surface as failures
        if value > self.value || (value.is_nan() && !self.value.is_nan()) {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    fn merge(mut self, other: Max) -> Max {
        if other.value > self.value || (other.value.is_nan() && !self.value.is_nan()) {
            self = other;
        }
        self
    }
}

impl TwistedSystem {
    pub fn new(
        ctx: GroupCtx,
        model: CoefficientModel,
        action: Action,
        cocycle: Cocycle,
    ) -> Result<Self> {
        match (&action, model) {
            (Action::Trivial, _) => {}
            (Action::Translation, CoefficientModel::Standard) => {}
            (Action::Translation, m) => {
                return Err(Error::ModelMismatch(format!(
                    "translation action needs the standard model, got {m}"
                )))
            }
            (Action::Point(p), CoefficientModel::Spectrum(n)) if p.size() == n => {
                let ok = match &p.kind {
                    PointKind::Table(t) => ctx.elements().is_some_and(|e| e.len() == t.len()),
                    PointKind::Lattice { gens, .. } => ctx.lattice_rank() == Some(gens.len()),
                };
                if !ok {
                    return Err(Error::Invalid(format!(
                        "point action does not match group {}",
                        ctx.spec()
                    )));
                }
            }
            (Action::Point(p), m) => {
                return Err(Error::ModelMismatch(format!(
                    "point action on {} points needs model spectrum:{}, got {m}",
                    p.size(),
                    p.size()
                )))
            }
        }
        check_cocycle(&ctx, model, &cocycle)?;
        Ok(TwistedSystem {
            ctx,
            model,
            action,
            cocycle,
            name: None,
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn ctx(&self) -> &GroupCtx {
        &self.ctx
    }

    pub fn model(&self) -> CoefficientModel {
        self.model
    }

    pub fn action(&self) -> &Action {
        &self.action
    }

    pub fn cocycle(&self) -> &Cocycle {
        &self.cocycle
    }

    /// Replace the cocycle by an explicit table with the same values, which is
    /// useful to corrupt single entries in tests. Finite groups only.
    pub fn materialize_cocycle(&self) -> Result<Cocycle> {
        let elements = self
            .ctx
            .elements()
            .ok_or_else(|| Error::Invalid("materializing a cocycle needs a finite group".into()))?;
        let mut table = HashMap::new();
        // normalized cocycles are exactly 1 on pairs containing the identity
        let proper = elements.iter().filter(|x| !self.ctx.is_identity(x));
        for x in proper.clone() {
            for y in proper.clone() {
                let w = self.omega(x, y);
                if w.constant_value() != Some(ONE) {
                    table.insert((x.clone(), y.clone()), w);
                }
            }
        }
        Ok(Cocycle::Table(Arc::new(table)))
    }

    /// Same system with a different cocycle (validated).
    pub fn with_cocycle(&self, cocycle: Cocycle) -> Result<Self> {
        check_cocycle(&self.ctx, self.model, &cocycle)?;
        Ok(TwistedSystem {
            cocycle,
            name: None,
            ..self.clone()
        })
    }

    /// Sup-norm of a coefficient (exact, also for the standard model on finite groups).
    pub fn coef_norm(&self, c: &Coefficient) -> f64 {
        c.sup_norm_on(self.ctx.order())
    }

    pub fn coef_distance(&self, a: &Coefficient, b: &Coefficient) -> f64 {
        a.distance_on(b, self.ctx.order())
    }

    /// `ω(x, y)`
    pub fn omega(&self, x: &GroupElement, y: &GroupElement) -> Coefficient {
        self.omega_of(&self.cocycle, x, y)
    }

    fn omega_of(&self, cocycle: &Cocycle, x: &GroupElement, y: &GroupElement) -> Coefficient {
        match cocycle {
            Cocycle::Trivial => Coefficient::one(),
            Cocycle::Theta(m) => Coefficient::Scalar(unit_phase(bilinear(m, x, y))),
            Cocycle::Table(t) => t
                .get(&(x.clone(), y.clone()))
                .cloned()
                .unwrap_or_else(Coefficient::one),
            Cocycle::Coboundary { base, b } => {
                let one = Coefficient::one();
                let bx = b.get(x).unwrap_or(&one);
                let by = b.get(y).unwrap_or(&one);
                let bxy = b.get(&self.ctx.mul(x, y)).unwrap_or(&one);
                self.omega_of(base, x, y)
                    .mul(bx)
                    .mul(&self.act(x, by))
                    .mul(&bxy.conj())
            }
        }
    }

    /// `α_x(φ)`
    pub fn act(&self, x: &GroupElement, phi: &Coefficient) -> Coefficient {
        match (&self.action, phi) {
            (Action::Trivial, _) | (_, Coefficient::Scalar(_)) => phi.clone(),
            (Action::Point(p), Coefficient::Spectrum(v)) => {
                let xi = self.ctx.inv(x);
                Coefficient::Spectrum((0..v.len()).map(|s| v[p.apply(&xi, s)]).collect())
            }
            (
                Action::Translation,
                Coefficient::Standard {
                    background,
                    correction,
                },
            ) => Coefficient::Standard {
                background: *background,
                correction: correction
                    .iter()
                    .map(|(a, c)| (self.ctx.mul(x, a), *c))
                    .collect(),
            },
            _ => panic!("coefficient {phi:?} does not belong to the system's model"),
        }
    }

    /// `α_x(φ)` with a model check.
    pub fn try_act(&self, x: &GroupElement, phi: &Coefficient) -> Result<Coefficient> {
        if !phi.fits(self.model) {
            return Err(Error::ModelMismatch(format!(
                "coefficient does not belong to model {}",
                self.model
            )));
        }
        self.ctx.validate(x)?;
        Ok(self.act(x, phi))
    }

    /// The induced action on Σ: `x·σ`.
    pub fn sigma_act(&self, x: &GroupElement, sigma: &SigmaPoint) -> SigmaPoint {
        match (&self.action, sigma) {
            (Action::Point(p), SigmaPoint::Index(i)) => SigmaPoint::Index(p.apply(x, *i)),
            (Action::Translation, SigmaPoint::Group(y)) => SigmaPoint::Group(self.ctx.mul(x, y)),
            _ => sigma.clone(),
        }
    }

    /// A distinguished base point of Σ: the single point, index 0, or e.
    pub fn base_point(&self) -> SigmaPoint {
        match self.model {
            CoefficientModel::Scalar => SigmaPoint::Unit,
            CoefficientModel::Spectrum(_) => SigmaPoint::Index(0),
            CoefficientModel::Standard => SigmaPoint::Group(self.ctx.identity()),
        }
    }

    /// All points of Σ when Σ is finite.
    pub fn sigma_points(&self) -> Option<Vec<SigmaPoint>> {
        match self.model {
            CoefficientModel::Scalar => Some(vec![SigmaPoint::Unit]),
            CoefficientModel::Spectrum(n) => Some((0..n).map(SigmaPoint::Index).collect()),
            CoefficientModel::Standard => self
                .ctx
                .elements()
                .map(|e| e.iter().cloned().map(SigmaPoint::Group).collect()),
        }
    }

    /// A random coefficient with entries uniform in the unit square (or unit
    /// circle when `unitary`). Standard-model values get up to three
    /// corrections near the identity.
    pub fn random_coefficient<R: Rng + ?Sized>(&self, rng: &mut R, unitary: bool) -> Coefficient {
        let draw = |rng: &mut R| {
            if unitary {
                unit_phase(rng.gen::<f64>())
            } else {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        };
        match self.model {
            CoefficientModel::Scalar => Coefficient::Scalar(draw(rng)),
            CoefficientModel::Spectrum(n) => Coefficient::Spectrum((0..n).map(|_| draw(rng)).collect()),
            CoefficientModel::Standard => {
                let background = draw(rng);
                let k = rng.gen_range(0..=3);
                let mut correction = BTreeMap::new();
                for _ in 0..k {
                    let at = self.ctx.sample(rng, 2);
                    let v = draw(rng);
                    correction.insert(at, v - background);
                }
                Coefficient::standard(background, correction)
            }
        }
    }

    /// Residual of
    /// `α_{s⁻¹}[ω(m,n)] α_{s⁻¹}[ω(mn,r)] = α_{s⁻¹m}[ω(n,r)] α_{s⁻¹}[ω(m,nr)]`.
    pub fn cocycle_identity_form(
        &self,
        m: &GroupElement,
        n: &GroupElement,
        r: &GroupElement,
        s: &GroupElement,
    ) -> f64 {
        let g = &self.ctx;
        let si = g.inv(s);
        let mn = g.mul(m, n);
        let nr = g.mul(n, r);
        let lhs = self
            .act(&si, &self.omega(m, n))
            .mul(&self.act(&si, &self.omega(&mn, r)));
        let rhs = self
            .act(&g.mul(&si, m), &self.omega(n, r))
            .mul(&self.act(&si, &self.omega(m, &nr)));
        self.coef_distance(&lhs, &rhs)
    }

    fn triples(&self, opts: &VerifyOptions) -> Vec<[GroupElement; 3]> {
        match self.ctx.elements() {
            Some(all) if all.len().pow(3) <= opts.triple_cap => {
                let mut out = Vec::with_capacity(all.len().pow(3));
                for x in all {
                    for y in all {
                        for z in all {
                            out.push([x.clone(), y.clone(), z.clone()]);
                        }
                    }
                }
                out
            }
            _ => (0..opts.trials)
                .map(|i| {
                    let mut rng = indexed_rng(opts.seed, i as u64);
                    [
                        self.ctx.sample(&mut rng, opts.radius),
                        self.ctx.sample(&mut rng, opts.radius),
                        self.ctx.sample(&mut rng, opts.radius),
                    ]
                })
                .collect(),
        }
    }

    /// Exhaustive four-variable check with `α_t[ω(a,b)]` tabulated once for
    /// all `t, a, b`; each quadruple is then two products and a distance.
    fn quadruple_max_tabulated(&self, all: &[GroupElement]) -> Max {
        let g = &self.ctx;
        let n = all.len();
        let index: HashMap<&GroupElement, usize> = all.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let idx = |x: &GroupElement| index[x];
        let mul: Vec<usize> = (0..n * n).map(|k| idx(&g.mul(&all[k / n], &all[k % n]))).collect();
        let inv: Vec<usize> = all.iter().map(|x| idx(&g.inv(x))).collect();
        let omega: Vec<Coefficient> = (0..n * n).map(|k| self.omega(&all[k / n], &all[k % n])).collect();
        // acted[t][a*n+b] = α_t[ω(a,b)]
        let acted: Vec<Vec<Coefficient>> = all
            .par_iter()
            .map(|t| omega.iter().map(|w| self.act(t, w)).collect())
            .collect();
        (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (mi, ni) = (k / n, k % n);
                let mn = mul[mi * n + ni];
                let mut best = Max::default();
                for ri in 0..n {
                    let nr = mul[ni * n + ri];
                    for si in 0..n {
                        let t = inv[si];
                        let tm = mul[t * n + mi];
                        let lhs = acted[t][mi * n + ni].mul(&acted[t][mn * n + ri]);
                        let rhs = acted[tm][ni * n + ri].mul(&acted[t][mi * n + nr]);
                        best.offer(self.coef_distance(&lhs, &rhs), || {
                            format!("m={}, n={}, r={}, s={}", all[mi], all[ni], all[ri], all[si])
                        });
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Max::default(), Max::merge)
    }

    fn quadruple_max(&self, opts: &VerifyOptions) -> Max {
        if let Some(all) = self.ctx.elements().filter(|all| all.len().pow(4) <= opts.quad_cap) {
            return self.quadruple_max_tabulated(all);
        }
        (0..opts.trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = indexed_rng(opts.seed ^ 0x5151, i as u64);
                let [m, n, r, s]: [GroupElement; 4] = std::array::from_fn(|_| self.ctx.sample(&mut rng, opts.radius));
                let mut best = Max::default();
                best.offer(self.cocycle_identity_form(&m, &n, &r, &s), || {
                    format!("m={m}, n={n}, r={r}, s={s}")
                });
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Max::default(), Max::merge)
    }

    /// Maximum residuals of the twisted-system axioms: the action is a
    /// homomorphism into *-automorphisms, and ω is a normalized unitary
    /// 2-cocycle. Exhaustive on small finite groups, seeded sampling otherwise.
    pub fn verify_axioms(&self, opts: &VerifyOptions) -> Vec<AxiomResidual> {
        const NAMES: [&str; 6] = [
            "action_identity",
            "action_composition",
            "action_automorphism",
            "cocycle_identity",
            "normalization",
            "unitarity",
        ];
        let triples = self.triples(opts);
        let g = &self.ctx;
        let e = g.identity();
        let partial: Vec<[Max; 6]> = triples
            .par_iter()
            .enumerate()
            .map(|(i, [x, y, z])| {
                let mut rng = indexed_rng(opts.seed ^ 0xA5A5, i as u64);
                let phi = self.random_coefficient(&mut rng, false);
                let psi = self.random_coefficient(&mut rng, false);
                let w = || format!("x={x}, y={y}, z={z}");
                let mut m: [Max; 6] = Default::default();

                m[0].offer(self.coef_distance(&self.act(&e, &phi), &phi), w);

                let xy = g.mul(x, y);
                let lhs = self.act(x, &self.act(y, &phi));
                m[1].offer(self.coef_distance(&lhs, &self.act(&xy, &phi)), w);

                let ax = |c: &Coefficient| self.act(x, c);
                let d_mul = self.coef_distance(&ax(&phi.mul(&psi)), &ax(&phi).mul(&ax(&psi)));
                let d_conj = self.coef_distance(&ax(&phi.conj()), &ax(&phi).conj());
                let d_norm = (self.coef_norm(&ax(&phi)) - self.coef_norm(&phi)).abs();
                m[2].offer(d_mul.max(d_conj).max(d_norm), w);

                let lhs = self.omega(x, y).mul(&self.omega(&xy, z));
                let rhs = self.act(x, &self.omega(y, z)).mul(&self.omega(x, &g.mul(y, z)));
                m[3].offer(self.coef_distance(&lhs, &rhs), w);

                let one = Coefficient::one();
                let n = [
                    self.coef_distance(&self.omega(x, &e), &one),
                    self.coef_distance(&self.omega(&e, x), &one),
                ];
                m[4].offer(n[0].max(n[1]), || format!("x={x}"));

                let u = self.omega(x, y).unitary_defect();
                m[5].offer(u, || format!("x={x}, y={y}"));
                m
            })
            .collect();
        let mut total: [Max; 6] = Default::default();
        for row in partial {
            for (t, r) in total.iter_mut().zip(row) {
                *t = std::mem::take(t).merge(r);
            }
        }
        let mut out: Vec<AxiomResidual> = NAMES
            .iter()
            .zip(total)
            .map(|(name, m)| AxiomResidual {
                axiom: name.to_string(),
                residual: m.value,
                witness: m.witness,
            })
            .collect();
        let q = self.quadruple_max(opts);
        out.push(AxiomResidual {
            axiom: "cocycle_identity_form".into(),
            residual: q.value,
            witness: q.witness,
        });
        out
    }
}

fn bilinear(m: &[Vec<f64>], x: &GroupElement, y: &GroupElement) -> f64 {
    let (x, y) = (x.coords(), y.coords());
    let mut t = 0.0;
    for (i, row) in m.iter().enumerate() {
        if x[i] == 0 {
            continue;
        }
        let mut s = 0.0;
        for (j, v) in row.iter().enumerate() {
            s += v * y[j] as f64;
        }
        t += x[i] as f64 * s;
    }
    t
}

fn check_cocycle(ctx: &GroupCtx, model: CoefficientModel, cocycle: &Cocycle) -> Result<()> {
    let e = ctx.identity();
    match cocycle {
        Cocycle::Trivial => Ok(()),
        Cocycle::Theta(m) => match ctx.lattice_rank() {
            Some(n) if n == m.len() => Ok(()),
            _ => Err(Error::Invalid(format!(
                "a {}x{} Θ matrix needs the group Z^{}, got {}",
                m.len(),
                m.len(),
                m.len(),
                ctx.spec()
            ))),
        },
        Cocycle::Table(t) => {
            for ((x, y), v) in t.iter() {
                ctx.validate(x)?;
                ctx.validate(y)?;
                if !v.fits(model) {
                    return Err(Error::ModelMismatch(format!(
                        "cocycle value at ({x}, {y}) is not in model {model}"
                    )));
                }
                if (*x == e || *y == e) && v.constant_value() != Some(ONE) {
                    return Err(Error::Invalid(format!(
                        "cocycle is not normalized at ({x}, {y})"
                    )));
                }
            }
            Ok(())
        }
        Cocycle::Coboundary { base, b } => {
            check_cocycle(ctx, model, base)?;
            for (x, v) in b.iter() {
                ctx.validate(x)?;
                if !v.fits(model) {
                    return Err(Error::ModelMismatch(format!(
                        "coboundary value at {x} is not in model {model}"
                    )));
                }
                if !v.is_unitary(1e-12) {
                    return Err(Error::Invalid(format!("coboundary value at {x} is not unitary")));
                }
                if *x == e && v.constant_value() != Some(ONE) {
                    return Err(Error::Invalid("coboundary must satisfy b(e) = 1".into()));
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g<const N: usize>(x: [i64; N]) -> GroupElement {
        GroupElement::from(x)
    }

    fn torus() -> TwistedSystem {
        TwistedSystem::new(
            GroupCtx::lattice(2),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::theta(vec![vec![0.0, 0.25], vec![-0.25, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn unit_phase_is_exact_on_quarters() {
        assert_eq!(unit_phase(0.25), Complex64::new(0.0, 1.0));
        assert_eq!(unit_phase(-0.25), Complex64::new(0.0, -1.0));
        assert_eq!(unit_phase(3.5), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_phase(-2.0), Complex64::new(1.0, 0.0));
        let v = unit_phase(1.0 / 3.0);
        assert!((v - Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn theta_cocycle_values() {
        let s = torus();
        assert_eq!(s.omega(&g([1, 0]), &g([0, 1])), Coefficient::scalar(0.0, 1.0));
        assert_eq!(s.omega(&g([0, 1]), &g([1, 0])), Coefficient::scalar(0.0, -1.0));
        for x in GroupCtx::lattice(2).ball(3) {
            assert_eq!(s.omega(&x, &x), Coefficient::one());
        }
        let zero = TwistedSystem::new(
            GroupCtx::lattice(2),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::theta(vec![vec![0.0; 2]; 2]).unwrap(),
        )
        .unwrap();
        assert_eq!(zero.omega(&g([3, 1]), &g([-2, 5])), Coefficient::one());
    }

    #[test]
    fn theta_commutator_phase() {
        let theta = vec![vec![0.0, 0.3], vec![-0.3, 0.0]];
        let s = TwistedSystem::new(
            GroupCtx::lattice(2),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::theta(theta).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x = s.ctx().sample(&mut rng, 5);
            let y = s.ctx().sample(&mut rng, 5);
            let a = s.omega(&x, &y).eval(&SigmaPoint::Unit);
            let b = s.omega(&y, &x).eval(&SigmaPoint::Unit);
            let t = 0.3 * (x.coords()[0] * y.coords()[1] - x.coords()[1] * y.coords()[0]) as f64;
            let want = Complex64::from_polar(1.0, 2.0 * std::f64::consts::TAU * t);
            assert!((a * b.conj() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn non_skew_theta_is_rejected() {
        assert!(Cocycle::theta(vec![vec![0.0, 0.25], vec![0.25, 0.0]]).is_err());
        assert!(Cocycle::theta(vec![vec![0.1]]).is_err());
        assert!(Cocycle::parse("theta:[[0,0.25],[-0.25,0]]").is_ok());
        let bad_dim = TwistedSystem::new(
            GroupCtx::lattice(3),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::parse("theta:[[0,0.25],[-0.25,0]]").unwrap(),
        );
        assert!(bad_dim.is_err());
    }

    #[test]
    fn torus_axioms_hold() {
        let rep = torus().verify_axioms(&VerifyOptions {
            trials: 2000,
            seed: 3,
            ..Default::default()
        });
        for r in &rep {
            assert!(r.residual < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn trivial_system_residuals_are_zero() {
        let s = TwistedSystem::new(
            GroupCtx::cyclic(5),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::Trivial,
        )
        .unwrap();
        for r in s.verify_axioms(&VerifyOptions::default()) {
            assert_eq!(r.residual, 0.0, "{}", r.axiom);
        }
    }

    #[test]
    fn corrupted_table_is_caught() {
        let ctx: GroupCtx = "C2xC4".parse().unwrap();
        let sys = TwistedSystem::new(
            ctx.clone(),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::bicharacter(&ctx).unwrap(),
        )
        .unwrap();
        let Cocycle::Table(t) = sys.materialize_cocycle().unwrap() else {
            unreachable!()
        };
        let mut t = (*t).clone();
        let key = (g([1, 1]), g([0, 2]));
        let v = t.get(&key).cloned().unwrap_or_else(Coefficient::one);
        t.insert(key, v.scale(Complex64::new(-1.0, 0.0)));
        let bad = sys.with_cocycle(Cocycle::Table(Arc::new(t))).unwrap();
        let rep = bad.verify_axioms(&VerifyOptions::default());
        let r = rep.iter().find(|r| r.axiom == "cocycle_identity").unwrap();
        assert!((r.residual - 2.0).abs() < 1e-12, "{r:?}");
        assert!(r.witness.is_some());
    }

    #[test]
    fn translation_act() {
        let z = GroupCtx::lattice(1);
        let s = TwistedSystem::new(z, CoefficientModel::Standard, Action::Translation, Cocycle::Trivial)
            .unwrap();
        let phi = Coefficient::standard(ONE, [(g([2]), Complex64::new(3.0, 0.0))].into());
        let moved = s.act(&g([5]), &phi);
        assert_eq!(
            moved,
            Coefficient::standard(ONE, [(g([7]), Complex64::new(3.0, 0.0))].into())
        );
        assert_eq!(s.act(&g([-5]), &moved), phi);
    }

    #[test]
    fn point_action_permutes_values() {
        let c4 = GroupCtx::cyclic(4);
        let swap = PointAction::from_generators(&c4, 2, &[(g([1]), vec![1, 0])]).unwrap();
        let s = TwistedSystem::new(
            c4,
            CoefficientModel::Spectrum(2),
            Action::Point(Arc::new(swap)),
            Cocycle::Trivial,
        )
        .unwrap();
        let v = Coefficient::Spectrum(vec![ONE, Complex64::new(0.0, 2.0)]);
        assert_eq!(
            s.act(&g([1]), &v),
            Coefficient::Spectrum(vec![Complex64::new(0.0, 2.0), ONE])
        );
        assert_eq!(s.act(&g([2]), &v), v);
    }

    #[test]
    fn inconsistent_point_action_is_rejected() {
        let c4 = GroupCtx::cyclic(4);
        // a 3-cycle has order 3, which does not divide 4
        assert!(PointAction::from_generators(&c4, 3, &[(g([1]), vec![1, 2, 0])]).is_err());
        let z2 = GroupCtx::lattice(2);
        assert!(PointAction::from_generators(
            &z2,
            3,
            &[(g([1, 0]), vec![1, 0, 2]), (g([0, 1]), vec![0, 2, 1])]
        )
        .is_err());
    }

    #[test]
    fn model_mismatches_are_rejected() {
        assert!(TwistedSystem::new(
            GroupCtx::lattice(1),
            CoefficientModel::Scalar,
            Action::Translation,
            Cocycle::Trivial
        )
        .is_err());
        let mut t = HashMap::new();
        t.insert((g([1]), g([0])), Coefficient::scalar(-1.0, 0.0));
        assert!(TwistedSystem::new(
            GroupCtx::cyclic(3),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::Table(Arc::new(t))
        )
        .is_err());
    }

    #[test]
    fn bicharacters_are_cocycles() {
        for spec in ["C2xC4", "Heis3", "C3xC6"] {
            let ctx: GroupCtx = spec.parse().unwrap();
            let s = TwistedSystem::new(
                ctx.clone(),
                CoefficientModel::Scalar,
                Action::Trivial,
                Cocycle::bicharacter(&ctx).unwrap(),
            )
            .unwrap();
            for r in s.verify_axioms(&VerifyOptions {
                quad_cap: 10_000,
                trials: 500,
                ..Default::default()
            }) {
                assert!(r.residual < 1e-12, "{spec}: {r:?}");
            }
        }
        assert!(Cocycle::bicharacter(&GroupCtx::cyclic(4)).is_err());
    }

    #[test]
    fn tabulated_identity_form_matches_direct_evaluation() {
        let s = crate::catalog::builtin("c4-sigma2").unwrap();
        let mut corrupted = match s.materialize_cocycle().unwrap() {
            Cocycle::Table(t) => (*t).clone(),
            _ => unreachable!(),
        };
        let (a, b) = (GroupElement::from([1]), GroupElement::from([3]));
        corrupted.insert((a, b), Coefficient::Spectrum(vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]));
        let bad = TwistedSystem::new(s.ctx().clone(), s.model(), s.action().clone(), Cocycle::Table(Arc::new(corrupted)));
        let mut seen = Vec::new();
        for sys in [(*s).clone(), bad.unwrap()] {
            let all = sys.ctx().elements().unwrap().to_vec();
            let mut direct = 0.0f64;
            for m in &all {
                for n in &all {
                    for r in &all {
                        for t in &all {
                            direct = direct.max(sys.cocycle_identity_form(m, n, r, t));
                        }
                    }
                }
            }
            let tab = sys.quadruple_max_tabulated(&all);
            assert_eq!(tab.value, direct);
            seen.push(direct);
        }
        assert!(seen[0] < 1e-12 && seen[1] > 0.5, "{seen:?}");
    }
}
