//! ℓ¹(G) convolution, weights, admissible norms and GRS-type weight checks.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficient::ZERO;
use crate::error::{Error, Result};
use crate::group::{GroupCtx, GroupElement};

type WeightFn = dyn Fn(&GroupCtx, &GroupElement) -> f64 + Send + Sync;

/// A weight ν on G, normally a function of word length.
#[derive(Clone)]
pub enum Weight {
    One,
    /// `(1 + ℓ(x))^s`
    Polynomial { s: f64 },
    /// `exp(c ℓ(x))`
    Exponential { c: f64 },
    /// Explicit values on a finite group.
    Table(Arc<BTreeMap<GroupElement, f64>>),
    /// Arbitrary function; used to probe the axiom checker with invalid weights.
    Custom { name: String, f: Arc<WeightFn> },
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({self})")
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::One => write!(f, "one"),
            Weight::Polynomial { s } => write!(f, "poly:s={s}"),
            Weight::Exponential { c } => write!(f, "exp:c={c}"),
            Weight::Table(t) => write!(f, "table[{}]", t.len()),
            Weight::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for Weight {
    type Err = Error;

    /// Parses `one`, `poly:s=<s>` and `exp:c=<c>`. Table weights need a group
    /// and a file and are built with [`Weight::table`].
    fn from_str(spec: &str) -> Result<Self> {
        let param = |prefix: &str| -> Result<Option<f64>> {
            let Some(rest) = spec.strip_prefix(prefix) else {
                return Ok(None);
            };
            let v: f64 = rest
                .parse()
                .map_err(|_| Error::spec("weight", spec, "parameter is not a number"))?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::spec("weight", spec, "parameter must be finite and >= 0"));
            }
            Ok(Some(v))
        };
        if spec == "one" {
            return Ok(Weight::One);
        }
        if let Some(s) = param("poly:s=")? {
            return Ok(Weight::Polynomial { s });
        }
        if let Some(c) = param("exp:c=")? {
            return Ok(Weight::Exponential { c });
        }
        Err(Error::spec(
            "weight",
            spec,
            "expected one, poly:s=<s>, exp:c=<c> or table:<file>",
        ))
    }
}

impl Weight {
    /// A table weight; the table must cover every element of a finite group.
    pub fn table(ctx: &GroupCtx, values: BTreeMap<GroupElement, f64>) -> Result<Self> {
        let elements = ctx
            .elements()
            .ok_or_else(|| Error::Invalid("table weights need a finite group".into()))?;
        for x in elements {
            match values.get(x) {
                Some(v) if v.is_finite() => {}
                Some(_) => return Err(Error::Invalid(format!("weight at {x} is not finite"))),
                None => return Err(Error::Invalid(format!("weight table has no value at {x}"))),
            }
        }
        if values.len() != elements.len() {
            return Err(Error::Invalid("weight table has entries outside the group".into()));
        }
        Ok(Weight::Table(Arc::new(values)))
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&GroupCtx, &GroupElement) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Weight::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, ctx: &GroupCtx, x: &GroupElement) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Polynomial { s } => (1.0 + ctx.word_length(x) as f64).powf(*s),
            Weight::Exponential { c } => (c * ctx.word_length(x) as f64).exp(),
            Weight::Table(t) => t[x],
            Weight::Custom { f, .. } => f(ctx, x),
        }
    }
}

/// One row of an axiom report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub max_violation: f64,
    pub witness: Option<String>,
}

fn track(best: &mut (f64, Option<String>), value: f64, witness: impl FnOnce() -> String) {
    if value > best.0 {
        *best = (value, Some(witness()));
    }
}

const ROUNDING: f64 = 1e-12;

/// Checks `ν ≥ 1`, `ν(x⁻¹) = ν(x)` and `ν(xy) ≤ ν(x)ν(y)` over the sample
/// pairs. Violations are reported as nonnegative amounts (0 when satisfied);
/// submultiplicativity excesses below a relative 1e-12 count as rounding.
pub fn check_weight_axioms(
    ctx: &GroupCtx,
    nu: &Weight,
    samples: &[(GroupElement, GroupElement)],
) -> Vec<AxiomReport> {
    let mut lower = (0.0, None);
    let mut symmetry = (0.0, None);
    let mut submult = (0.0, None);
    for (x, y) in samples {
        let xy = ctx.mul(x, y);
        let (nx, ny, nxy) = (nu.eval(ctx, x), nu.eval(ctx, y), nu.eval(ctx, &xy));
        for (z, nz) in [(x, nx), (y, ny), (&xy, nxy)] {
            track(&mut lower, 1.0 - nz, || format!("x={z}"));
        }
        for z in [x, y] {
            let d = (nu.eval(ctx, z) - nu.eval(ctx, &ctx.inv(z))).abs();
            track(&mut symmetry, d, || format!("x={z}"));
        }
        // rounding in exp/powf is not a violation
        let excess = nxy - nx * ny;
        if excess > ROUNDING * nx * ny {
            track(&mut submult, excess, || format!("x={x}, y={y}"));
        }
    }
    [
        ("lower_bound", lower),
        ("symmetry", symmetry),
        ("submultiplicativity", submult),
    ]
    .into_iter()
    .map(|(axiom, (v, w))| AxiomReport {
        axiom: axiom.to_string(),
        max_violation: v,
        witness: w,
    })
    .collect()
}

/// `a_n = (max over Vⁿ of ν)^(1/n)` for `n = 1..=n_max`.
pub fn check_ugrs(ctx: &GroupCtx, nu: &Weight, n_max: usize) -> Result<Vec<f64>> {
    let shells = ctx.power_shells(n_max)?;
    let mut running = nu.eval(ctx, &ctx.identity());
    let mut out = Vec::with_capacity(n_max);
    for (n, shell) in shells.iter().enumerate().skip(1) {
        for x in shell {
            running = running.max(nu.eval(ctx, x));
        }
        out.push(running.powf(1.0 / n as f64));
    }
    Ok(out)
}

/// `sup/inf` of ν over the shell `Vⁿ \ Vⁿ⁻¹` for `n = 1..=n_max`; an empty
/// shell gives 1.
pub fn check_shell_ratio(ctx: &GroupCtx, nu: &Weight, n_max: usize) -> Result<Vec<f64>> {
    let shells = ctx.power_shells(n_max)?;
    Ok(shells
        .iter()
        .skip(1)
        .map(|shell| {
            if shell.is_empty() {
                return 1.0;
            }
            let (lo, hi) = shell.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
                let v = nu.eval(ctx, x);
                (lo.min(v), hi.max(v))
            });
            hi / lo
        })
        .collect())
}

/// The three admissible norms on functions G → ℂ (or on coefficient norms).
#[derive(Clone, Debug)]
pub enum AdmissibleNorm {
    L1,
    L1Weighted(Weight),
    /// `C · max ϑ|k|`, where `C = max ϑ·(ϑ⁻¹ ⋆ ϑ⁻¹)` is estimated on `ball(radius)`.
    /// The factor `C` makes the norm submultiplicative for supports inside
    /// that ball.
    LInfWeighted {
        weight: Weight,
        constant: f64,
        radius: u64,
    },
}

impl fmt::Display for AdmissibleNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibleNorm::L1 => write!(f, "l1"),
            AdmissibleNorm::L1Weighted(w) => write!(f, "l1w:{w}"),
            AdmissibleNorm::LInfWeighted { weight, radius, .. } => write!(f, "linfw:{weight}@{radius}"),
        }
    }
}

impl AdmissibleNorm {
    /// Build an ℓ^{∞,ϑ} norm, estimating the subconvolutivity constant on
    /// `ball(radius)`.
    pub fn linf_weighted(ctx: &GroupCtx, weight: Weight, radius: u64) -> Self {
        let constant = subconvolutivity_constant(ctx, &weight, radius);
        AdmissibleNorm::LInfWeighted {
            weight,
            constant,
            radius,
        }
    }

    /// Parse `l1`, `l1w:<weight>` or `linfw:<weight>@<R>` with the built-in
    /// weight grammar (no table weights).
    pub fn parse(ctx: &GroupCtx, spec: &str) -> Result<Self> {
        Self::parse_with(ctx, spec, |w| w.parse())
    }

    /// As [`AdmissibleNorm::parse`] with a caller-supplied weight parser.
    pub fn parse_with(
        ctx: &GroupCtx,
        spec: &str,
        weight: impl Fn(&str) -> Result<Weight>,
    ) -> Result<Self> {
        if spec == "l1" {
            return Ok(AdmissibleNorm::L1);
        }
        if let Some(w) = spec.strip_prefix("l1w:") {
            return Ok(AdmissibleNorm::L1Weighted(weight(w)?));
        }
        if let Some(rest) = spec.strip_prefix("linfw:") {
            let (w, r) = rest
                .rsplit_once('@')
                .ok_or_else(|| Error::spec("norm", spec, "expected linfw:<weight>@<radius>"))?;
            let r: u64 = r
                .parse()
                .map_err(|_| Error::spec("norm", spec, "radius is not a nonnegative integer"))?;
            return Ok(Self::linf_weighted(ctx, weight(w)?, r));
        }
        Err(Error::spec("norm", spec, "expected l1, l1w:<weight> or linfw:<weight>@<R>"))
    }

    /// Apply the norm to the nonnegative function given by `(x, |k(x)|)` pairs.
    pub fn apply<'a>(
        &self,
        ctx: &GroupCtx,
        values: impl IntoIterator<Item = (&'a GroupElement, f64)>,
    ) -> f64 {
        let values = values.into_iter();
        match self {
            AdmissibleNorm::L1 => values.map(|(_, v)| v).sum(),
            AdmissibleNorm::L1Weighted(w) => values.map(|(x, v)| w.eval(ctx, x) * v).sum(),
            AdmissibleNorm::LInfWeighted {
                weight, constant, ..
            } => constant * values.map(|(x, v)| weight.eval(ctx, x) * v).fold(0.0, f64::max),
        }
    }
}

/// `max over x ∈ ball(2R)` of `ϑ(x) · Σ_{y ∈ B, y⁻¹x ∈ B} ϑ(y)⁻¹ ϑ(y⁻¹x)⁻¹`
/// with `B = ball(R)`.
pub fn subconvolutivity_constant(ctx: &GroupCtx, weight: &Weight, radius: u64) -> f64 {
    let ball = ctx.ball(radius);
    let members: HashSet<&GroupElement> = ball.iter().collect();
    let inv_w: Vec<f64> = ball.iter().map(|y| 1.0 / weight.eval(ctx, y)).collect();
    ctx.ball(2 * radius)
        .iter()
        .map(|x| {
            let s: f64 = ball
                .iter()
                .zip(&inv_w)
                .filter_map(|(y, wy)| {
                    let z = ctx.inv_mul(y, x);
                    members.contains(&z).then(|| wy / weight.eval(ctx, &z))
                })
                .sum();
            weight.eval(ctx, x) * s
        })
        .fold(0.0, f64::max)
}

/// A finitely supported function G → ℂ.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarFunction {
    entries: BTreeMap<GroupElement, Complex64>,
    prune: f64,
}

impl ScalarFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Entries with modulus below `threshold` are dropped after operations.
    /// The default 0 keeps every entry that was set.
    pub fn with_prune(mut self, threshold: f64) -> Self {
        self.prune = threshold;
        self.apply_prune();
        self
    }

    pub fn delta(x: GroupElement, c: Complex64) -> Self {
        let mut f = Self::new();
        f.entries.insert(x, c);
        f
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (GroupElement, Complex64)>) -> Self {
        let mut f = Self::new();
        for (x, c) in entries {
            *f.entries.entry(x).or_insert(ZERO) += c;
        }
        f
    }

    fn apply_prune(&mut self) {
        if self.prune > 0.0 {
            let p = self.prune;
            self.entries.retain(|_, c| c.norm() >= p);
        }
    }

    pub fn get(&self, x: &GroupElement) -> Complex64 {
        self.entries.get(x).copied().unwrap_or(ZERO)
    }

    pub fn entries(&self) -> &BTreeMap<GroupElement, Complex64> {
        &self.entries
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(k⋆l)(x) = Σ_y k(y) l(y⁻¹x)`
    pub fn convolve(&self, ctx: &GroupCtx, other: &ScalarFunction) -> ScalarFunction {
        let mut out = BTreeMap::new();
        for (y, ky) in &self.entries {
            for (w, lw) in &other.entries {
                *out.entry(ctx.mul(y, w)).or_insert(ZERO) += ky * lw;
            }
        }
        let mut f = ScalarFunction {
            entries: out,
            prune: self.prune.max(other.prune),
        };
        f.apply_prune();
        f
    }

    /// `k^⋆(x) = conj k(x⁻¹)`
    pub fn involve(&self, ctx: &GroupCtx) -> ScalarFunction {
        ScalarFunction {
            entries: self
                .entries
                .iter()
                .map(|(x, c)| (ctx.inv(x), c.conj()))
                .collect(),
            prune: self.prune,
        }
    }

    pub fn norm(&self, ctx: &GroupCtx, norm: &AdmissibleNorm) -> f64 {
        norm.apply(ctx, self.entries.iter().map(|(x, c)| (x, c.norm())))
    }

    pub fn sub(&self, other: &ScalarFunction) -> ScalarFunction {
        let mut out = self.entries.clone();
        for (x, c) in &other.entries {
            *out.entry(x.clone()).or_insert(ZERO) -= c;
        }
        ScalarFunction {
            entries: out,
            prune: self.prune,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g<const N: usize>(x: [i64; N]) -> GroupElement {
        GroupElement::from(x)
    }

    #[test]
    fn convolution_examples() {
        let c4 = GroupCtx::cyclic(4);
        let k = ScalarFunction::from_entries([(g([0]), c(1.0, 0.0)), (g([1]), c(1.0, 0.0))]);
        let l = ScalarFunction::delta(g([1]), c(1.0, 0.0));
        let kl = k.convolve(&c4, &l);
        assert_eq!(kl.get(&g([1])), c(1.0, 0.0));
        assert_eq!(kl.get(&g([2])), c(1.0, 0.0));
        assert_eq!(kl.len(), 2);

        let d3 = GroupCtx::dihedral(3);
        let a = g([1, 0]);
        let b = g([0, 1]);
        let p = ScalarFunction::delta(a.clone(), c(1.0, 0.0))
            .convolve(&d3, &ScalarFunction::delta(b.clone(), c(1.0, 0.0)));
        assert_eq!(p, ScalarFunction::delta(d3.mul(&a, &b), c(1.0, 0.0)));
        let e = ScalarFunction::delta(d3.identity(), c(1.0, 0.0));
        assert_eq!(p.convolve(&d3, &e), p);
    }

    #[test]
    fn involution_of_point_mass() {
        let z2 = GroupCtx::lattice(2);
        let k = ScalarFunction::delta(g([2, -1]), c(0.0, 1.0));
        assert_eq!(k.involve(&z2), ScalarFunction::delta(g([-2, 1]), c(0.0, -1.0)));
    }

    #[test]
    fn norm_examples() {
        let z = GroupCtx::lattice(1);
        let k = ScalarFunction::delta(g([4]), c(3.0, 4.0));
        assert_eq!(k.norm(&z, &AdmissibleNorm::L1), 5.0);
        let d2 = ScalarFunction::delta(g([2]), c(1.0, 0.0));
        let nu = Weight::Polynomial { s: 2.0 };
        assert_eq!(d2.norm(&z, &AdmissibleNorm::L1Weighted(nu)), 9.0);
    }

    #[test]
    fn weight_axioms_valid_and_invalid() {
        let z2 = GroupCtx::lattice(2);
        let ball = z2.ball(4);
        let samples: Vec<_> = ball
            .iter()
            .flat_map(|x| ball.iter().map(move |y| (x.clone(), y.clone())))
            .collect();
        for nu in [Weight::One, Weight::Polynomial { s: 2.0 }, Weight::Exponential { c: 0.5 }] {
            for r in check_weight_axioms(&z2, &nu, &samples) {
                assert_eq!(r.max_violation, 0.0, "{nu} {}", r.axiom);
            }
        }
        let bad = Weight::custom("inverse", |ctx, x| 1.0 / (1.0 + ctx.word_length(x) as f64));
        let rep = check_weight_axioms(&z2, &bad, &samples);
        let lower = rep.iter().find(|r| r.axiom == "lower_bound").unwrap();
        assert!(lower.max_violation > 0.0);
        assert!(lower.witness.is_some());
    }

    #[test]
    fn ugrs_sequences() {
        let z2 = GroupCtx::lattice(2);
        let a = check_ugrs(&z2, &Weight::Polynomial { s: 2.0 }, 10).unwrap();
        for (i, v) in a.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((v - (1.0 + n).powf(2.0 / n)).abs() < 1e-12);
        }
        assert!(a.windows(2).all(|w| w[1] < w[0]));
        assert!(check_ugrs(&z2, &Weight::One, 5).unwrap().iter().all(|&v| v == 1.0));
        let e = check_ugrs(&z2, &Weight::Exponential { c: 1.0 }, 8).unwrap();
        assert!(e.iter().all(|v| (v - std::f64::consts::E).abs() < 1e-12));
    }

    #[test]
    fn shell_ratios() {
        let z = GroupCtx::lattice(1);
        for nu in [Weight::Polynomial { s: 3.0 }, Weight::Exponential { c: 1.0 }] {
            assert!(check_shell_ratio(&z, &nu, 6).unwrap().iter().all(|&r| r == 1.0));
        }
        // C6 with V = {0, 1, 2}: shells {1,2}, {3,4}, {5}, {} and the table
        // values [1,2,3,4,3,2] give 3/2, 4/3, 1, 1.
        let c6 = GroupCtx::cyclic(6).with_generators(vec![g([1]), g([2])]).unwrap();
        let table: BTreeMap<_, _> = [1.0, 2.0, 3.0, 4.0, 3.0, 2.0]
            .iter()
            .enumerate()
            .map(|(i, v)| (g([i as i64]), *v))
            .collect();
        let nu = Weight::table(&c6, table).unwrap();
        assert_eq!(check_shell_ratio(&c6, &nu, 4).unwrap(), vec![1.5, 4.0 / 3.0, 1.0, 1.0]);
    }

    #[test]
    fn subconvolutive_constant_is_at_least_one() {
        let z = GroupCtx::lattice(1);
        let n = AdmissibleNorm::linf_weighted(&z, Weight::Polynomial { s: 2.0 }, 6);
        let AdmissibleNorm::LInfWeighted { constant, radius, .. } = n else {
            unreachable!()
        };
        assert!(constant >= 1.0);
        assert_eq!(radius, 6);
    }

    #[test]
    fn parse_weights_and_norms() {
        assert!(matches!("poly:s=2".parse::<Weight>().unwrap(), Weight::Polynomial { s } if s == 2.0));
        assert!(matches!("exp:c=0.5".parse::<Weight>().unwrap(), Weight::Exponential { c } if c == 0.5));
        assert!("poly:s=-1".parse::<Weight>().is_err());
        assert!("cubic".parse::<Weight>().is_err());
        let z = GroupCtx::lattice(1);
        assert!(matches!(AdmissibleNorm::parse(&z, "l1").unwrap(), AdmissibleNorm::L1));
        assert!(matches!(
            AdmissibleNorm::parse(&z, "linfw:poly:s=2@4").unwrap(),
            AdmissibleNorm::LInfWeighted { radius: 4, .. }
        ));
        assert!(AdmissibleNorm::parse(&z, "l2").is_err());
    }

    fn arb_function(radius: i64, max_len: usize) -> impl Strategy<Value = ScalarFunction> {
        prop::collection::vec(
            ((-radius..=radius), (-radius..=radius), -2.0..2.0f64, -2.0..2.0f64),
            0..max_len,
        )
        .prop_map(|v| {
            ScalarFunction::from_entries(
                v.into_iter()
                    .map(|(a, b, re, im)| (GroupElement::from([a, b]), Complex64::new(re, im))),
            )
        })
    }

    fn norms(ctx: &GroupCtx) -> Vec<AdmissibleNorm> {
        vec![
            AdmissibleNorm::L1,
            AdmissibleNorm::L1Weighted(Weight::Polynomial { s: 2.0 }),
            AdmissibleNorm::L1Weighted(Weight::Exponential { c: 0.3 }),
            AdmissibleNorm::linf_weighted(ctx, Weight::Polynomial { s: 3.0 }, 4),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn norms_are_submultiplicative_and_symmetric(
            k in arb_function(2, 6),
            l in arb_function(2, 6),
        ) {
            let z2 = GroupCtx::lattice(2);
            let kl = k.convolve(&z2, &l);
            for n in norms(&z2) {
                let lhs = kl.norm(&z2, &n);
                let rhs = k.norm(&z2, &n) * l.norm(&z2, &n);
                prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300, "{n}: {lhs} > {rhs}");
                let ks = k.involve(&z2).norm(&z2, &n);
                prop_assert!((ks - k.norm(&z2, &n)).abs() <= 1e-12 * ks.max(1.0));
            }
        }

        #[test]
        fn norms_are_solid(k in arb_function(3, 8), shrink in 0.0..1.0f64) {
            let z2 = GroupCtx::lattice(2);
            let smaller = ScalarFunction::from_entries(
                k.entries().iter().map(|(x, c)| (x.clone(), c * shrink)),
            );
            for n in norms(&z2) {
                prop_assert!(smaller.norm(&z2, &n) <= k.norm(&z2, &n));
            }
        }

        #[test]
        fn unit_weight_matches_l1(k in arb_function(3, 8)) {
            let z2 = GroupCtx::lattice(2);
            prop_assert_eq!(
                k.norm(&z2, &AdmissibleNorm::L1Weighted(Weight::One)),
                k.norm(&z2, &AdmissibleNorm::L1)
            );
        }

        #[test]
        fn involution_laws(k in arb_function(2, 5), l in arb_function(2, 5)) {
            let z2 = GroupCtx::lattice(2);
            prop_assert_eq!(k.involve(&z2).involve(&z2), k.clone());
            let lhs = k.convolve(&z2, &l).involve(&z2);
            let rhs = l.involve(&z2).convolve(&z2, &k.involve(&z2));
            prop_assert!(lhs.sub(&rhs).norm(&z2, &AdmissibleNorm::L1) < 1e-12);
        }
    }
}
