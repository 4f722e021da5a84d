//! Banach *-algebra laws for the crossed product and the kernel algebra, and
//! the morphism properties of Γ, checked on seeded random data and, for small
//! finite groups, exhaustively over small supports.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::crossed::CrossedElement;
use crate::error::Result;
use crate::group::GroupElement;
use crate::kernel::{Diagonal, KernelElement};
use crate::system::{indexed_rng, TwistedSystem};
use crate::weight::AdmissibleNorm;

/// Tolerance for relative law residuals.
pub const LAW_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LawOptions {
    /// Random triples per law.
    pub samples: usize,
    pub seed: u64,
    /// Support size of random elements and diagonal count of random kernels.
    pub support: usize,
    /// Box radius for random lattice elements.
    pub radius: i64,
    /// Finite groups up to this order are also checked exhaustively.
    pub exhaustive_order: usize,
    /// Largest support enumerated in the exhaustive pass.
    pub exhaustive_support: usize,
}

impl Default for LawOptions {
    fn default() -> Self {
        LawOptions {
            samples: 200,
            seed: 0,
            support: 3,
            radius: 2,
            exhaustive_order: 6,
            exhaustive_support: 3,
        }
    }
}

/// Largest relative residual of one law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawResidual {
    pub law: String,
    pub residual: f64,
    pub witness: Option<String>,
    pub checks: usize,
}

impl LawResidual {
    pub fn passes(&self) -> bool {
        self.residual < LAW_TOL
    }
}

const LAWS: [&str; 12] = [
    "crossed_associativity",
    "crossed_unit",
    "crossed_involutivity",
    "crossed_anti_multiplicativity",
    "kernel_associativity",
    "kernel_unit",
    "kernel_involutivity",
    "kernel_anti_multiplicativity",
    "gamma_multiplicativity",
    "gamma_involution",
    "gamma_isometry",
    "gamma_inverse",
];

/// Running maximum; the witness is the index of the triple, labelled at the end.
#[derive(Clone, Debug, Default)]
struct Acc {
    value: f64,
    witness: Option<usize>,
    checks: usize,
}

impl Acc {
    fn offer(&mut self, v: f64, at: usize) {
        self.checks += 1;
        if v > self.value || (v.is_nan() && !self.value.is_nan()) {
            self.value = v;
            self.witness = Some(at);
        }
    }

    fn merge(mut self, o: Acc) -> Acc {
        let checks = self.checks + o.checks;
        if o.value > self.value || (o.value.is_nan() && !self.value.is_nan()) {
            self = o;
        }
        self.checks = checks;
        self
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn cdist(a: &CrossedElement, b: &CrossedElement) -> f64 {
    a.l1_distance(b).unwrap_or(f64::NAN)
}

fn kdist(a: &KernelElement, b: &KernelElement) -> f64 {
    a.sub(b).map_or(f64::NAN, |d| d.norm(&AdmissibleNorm::L1))
}

/// A kernel with diagonals at `support`: covariant tails plus one perturbed
/// window entry per diagonal, so it is generally not covariant.
fn perturbed_kernel<R: Rng + ?Sized>(sys: &Arc<TwistedSystem>, rng: &mut R, support: &[GroupElement], radius: i64) -> Result<KernelElement> {
    let diagonals = support.iter().map(|a| {
        let mut d = Diagonal::covariant(sys.random_coefficient(rng, false));
        d.window.insert(sys.ctx().sample(rng, radius), sys.random_coefficient(rng, false));
        (a.clone(), d)
    });
    KernelElement::from_diagonals(sys.clone(), diagonals.collect::<Vec<_>>())
}

fn random_support<R: Rng + ?Sized>(sys: &TwistedSystem, rng: &mut R, n: usize, radius: i64) -> Vec<GroupElement> {
    let mut s: Vec<GroupElement> = (0..n).map(|_| sys.ctx().sample(rng, radius)).collect();
    s.sort();
    s.dedup();
    s
}

fn element_on<R: Rng + ?Sized>(sys: &Arc<TwistedSystem>, rng: &mut R, support: &[GroupElement]) -> Result<CrossedElement> {
    CrossedElement::from_entries(
        sys.clone(),
        support.iter().map(|x| (x.clone(), sys.random_coefficient(rng, false))).collect::<Vec<_>>(),
    )
}

/// Evaluate all laws on one triple of supports.
fn check_triple(
    sys: &Arc<TwistedSystem>,
    rng: &mut impl Rng,
    supports: [&[GroupElement]; 3],
    radius: i64,
    label: usize,
    acc: &mut [Acc; 12],
) -> Result<()> {
    let l1 = AdmissibleNorm::L1;
    let f = element_on(sys, rng, supports[0])?;
    let g = element_on(sys, rng, supports[1])?;
    let h = element_on(sys, rng, supports[2])?;
    let (nf, ng, nh) = (f.norm(&l1), g.norm(&l1), h.norm(&l1));
    let unit = CrossedElement::unit(sys.clone());

    let fg = f.product(&g)?;
    let lhs = fg.product(&h)?;
    let rhs = f.product(&g.product(&h)?)?;
    acc[0].offer(rel(cdist(&lhs, &rhs), nf * ng * nh), label);
    let u = cdist(&unit.product(&f)?, &f).max(cdist(&f.product(&unit)?, &f));
    acc[1].offer(rel(u, nf), label);
    acc[2].offer(rel(cdist(&f.involution().involution(), &f), nf), label);
    let anti = cdist(&fg.involution(), &g.involution().product(&f.involution())?);
    acc[3].offer(rel(anti, nf * ng), label);

    let k = perturbed_kernel(sys, rng, supports[0], radius)?;
    let l = perturbed_kernel(sys, rng, supports[1], radius)?;
    let m = perturbed_kernel(sys, rng, supports[2], radius)?;
    let (nk, nl, nm) = (k.norm(&l1), l.norm(&l1), m.norm(&l1));
    let kl = k.compose(&l)?;
    let lhs = kl.compose(&m)?;
    let rhs = k.compose(&l.compose(&m)?)?;
    acc[4].offer(rel(kdist(&lhs, &rhs), nk * nl * nm), label);
    let ku = KernelElement::gamma(&unit);
    let u = kdist(&ku.compose(&k)?, &k).max(kdist(&k.compose(&ku)?, &k));
    acc[5].offer(rel(u, nk), label);
    acc[6].offer(rel(kdist(&k.involve()?.involve()?, &k), nk), label);
    let anti = kdist(&kl.involve()?, &l.involve()?.compose(&k.involve()?)?);
    acc[7].offer(rel(anti, nk * nl), label);

    let (gf, gg) = (KernelElement::gamma(&f), KernelElement::gamma(&g));
    acc[8].offer(rel(kdist(&KernelElement::gamma(&fg), &gf.compose(&gg)?), nf * ng), label);
    acc[9].offer(rel(kdist(&KernelElement::gamma(&f.involution()), &gf.involve()?), nf), label);
    // isometry and inversion are exact
    acc[10].offer((gf.norm(&l1) - nf).abs(), label);
    acc[11].offer(gf.gamma_inverse().map_or(f64::INFINITY, |b| cdist(&b, &f)), label);
    Ok(())
}

/// All subsets of `elements` with size between 1 and `max`.
fn subsets(elements: &[GroupElement], max: usize) -> Vec<Vec<GroupElement>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(els: &[GroupElement], start: usize, max: usize, cur: &mut Vec<GroupElement>, out: &mut Vec<Vec<GroupElement>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for i in start..els.len() {
            cur.push(els[i].clone());
            rec(els, i + 1, max, cur, out);
            cur.pop();
        }
    }
    rec(elements, 0, max, &mut cur, &mut out);
    out
}

/// Check every law; results are in a fixed order and independent of the
/// thread count.
pub fn check_laws(sys: &Arc<TwistedSystem>, opts: &LawOptions) -> Result<Vec<LawResidual>> {
    let sampled: Vec<[Acc; 12]> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(opts.seed, i as u64);
            let s: Vec<Vec<GroupElement>> = (0..3)
                .map(|_| random_support(sys, &mut rng, opts.support, opts.radius))
                .collect();
            let mut acc: [Acc; 12] = Default::default();
            check_triple(sys, &mut rng, [&s[0], &s[1], &s[2]], opts.radius, i, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let absorb = |rows: Vec<[Acc; 12]>| {
        let mut total: [Acc; 12] = Default::default();
        for row in rows {
            for (t, r) in total.iter_mut().zip(row) {
                *t = std::mem::take(t).merge(r);
            }
        }
        total
    };
    let label = |a: Acc, name: &dyn Fn(usize) -> String| (a.value, a.witness.map(name), a.checks);
    let mut total: Vec<(f64, Option<String>, usize)> = absorb(sampled)
        .into_iter()
        .map(|a| label(a, &|i| format!("sample {i} (seed {})", opts.seed)))
        .collect();
    if let Some(elements) = sys.ctx().elements().filter(|e| e.len() <= opts.exhaustive_order) {
        let subs = subsets(elements, opts.exhaustive_support);
        let n = subs.len();
        let rows: Vec<[Acc; 12]> = (0..n * n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
                let mut rng = indexed_rng(opts.seed ^ 0x5EED, idx as u64);
                let mut acc: [Acc; 12] = Default::default();
                check_triple(sys, &mut rng, [&subs[i], &subs[j], &subs[k]], 1, idx, &mut acc)?;
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let fmt = |s: &[GroupElement]| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let name = |idx: usize| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            format!("supports {{{}}}, {{{}}}, {{{}}}", fmt(&subs[i]), fmt(&subs[j]), fmt(&subs[k]))
        };
        for (t, a) in total.iter_mut().zip(absorb(rows)) {
            let checks = t.2 + a.checks;
            if a.value > t.0 || (a.value.is_nan() && !t.0.is_nan()) {
                *t = label(a, &name);
            }
            t.2 = checks;
        }
    }
    Ok(LAWS
        .iter()
        .zip(total)
        .map(|(name, (residual, witness, checks))| LawResidual {
            law: name.to_string(),
            residual,
            witness,
            checks,
        })
        .collect())
}
