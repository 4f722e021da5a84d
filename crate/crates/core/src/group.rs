//! Exact discrete groups: lattices, cyclic, dihedral and Heisenberg groups mod p,
//! and finite direct products of those.
//!
//! Elements are integer coordinate vectors. The meaning of the coordinates is
//! fixed by the [`GroupCtx`] the element belongs to:
//!
//! | factor      | coordinates | product                                        |
//! |-------------|-------------|------------------------------------------------|
//! | `Z^n`       | `n` ints    | componentwise addition (checked)               |
//! | `Cm`        | `[k]`       | `k + k' mod m`                                 |
//! | `Dm`        | `[k, s]`    | `r^k s^s`, with `s r = r^-1 s`                 |
//! | `Heisp`     | `[a, b, c]` | `(a+a', b+b', c+c'+a*b') mod p`                |
//!
//! A direct product concatenates the coordinates of its factors.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::GroupError;

pub type Coords = SmallVec<[i64; 4]>;

/// An exact group element. Ordering is lexicographic on the coordinates, which
/// is the deterministic ordering used for every enumeration in the crate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(Coords);

impl GroupElement {
    pub fn new(coords: Coords) -> Self {
        GroupElement(coords)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&[i64]> for GroupElement {
    fn from(value: &[i64]) -> Self {
        GroupElement(Coords::from_slice(value))
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(value: Vec<i64>) -> Self {
        GroupElement(Coords::from_vec(value))
    }
}

impl<const N: usize> From<[i64; N]> for GroupElement {
    fn from(value: [i64; N]) -> Self {
        GroupElement(Coords::from_slice(&value))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The building blocks of a [`GroupCtx`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorKind {
    Lattice(usize),
    Cyclic(u64),
    Dihedral(u64),
    Heisenberg(u64),
}

impl FactorKind {
    fn dim(self) -> usize {
        match self {
            FactorKind::Lattice(n) => n,
            FactorKind::Cyclic(_) => 1,
            FactorKind::Dihedral(_) => 2,
            FactorKind::Heisenberg(_) => 3,
        }
    }

    fn is_finite(self) -> bool {
        !matches!(self, FactorKind::Lattice(_))
    }

    fn spec(self) -> String {
        match self {
            FactorKind::Lattice(1) => "Z".to_string(),
            FactorKind::Lattice(n) => format!("Z^{n}"),
            FactorKind::Cyclic(m) => format!("C{m}"),
            FactorKind::Dihedral(m) => format!("D{m}"),
            FactorKind::Heisenberg(p) => format!("Heis{p}"),
        }
    }

    fn identity(self) -> Coords {
        smallvec::smallvec![0; self.dim()]
    }

    fn validate(self, x: &[i64]) -> bool {
        match self {
            FactorKind::Lattice(_) => true,
            FactorKind::Cyclic(m) => (0..m as i64).contains(&x[0]),
            FactorKind::Dihedral(m) => (0..m as i64).contains(&x[0]) && (0..2).contains(&x[1]),
            FactorKind::Heisenberg(p) => x.iter().all(|c| (0..p as i64).contains(c)),
        }
    }

    fn mul_into(self, x: &[i64], y: &[i64], out: &mut Coords) -> Result<(), GroupError> {
        match self {
            FactorKind::Lattice(_) => {
                for (a, b) in x.iter().zip(y) {
                    out.push(a.checked_add(*b).ok_or(GroupError::Overflow)?);
                }
            }
            FactorKind::Cyclic(m) => out.push((x[0] + y[0]).rem_euclid(m as i64)),
            FactorKind::Dihedral(m) => {
                let k = if x[1] == 0 { x[0] + y[0] } else { x[0] - y[0] };
                out.push(k.rem_euclid(m as i64));
                out.push(x[1] ^ y[1]);
            }
            FactorKind::Heisenberg(p) => {
                let p = p as i64;
                out.push((x[0] + y[0]).rem_euclid(p));
                out.push((x[1] + y[1]).rem_euclid(p));
                out.push((x[2] + y[2] + x[0] * y[1]).rem_euclid(p));
            }
        }
        Ok(())
    }

    fn inv_into(self, x: &[i64], out: &mut Coords) -> Result<(), GroupError> {
        match self {
            FactorKind::Lattice(_) => {
                for a in x {
                    out.push(a.checked_neg().ok_or(GroupError::Overflow)?);
                }
            }
            FactorKind::Cyclic(m) => out.push((-x[0]).rem_euclid(m as i64)),
            FactorKind::Dihedral(m) => {
                if x[1] == 0 {
                    out.push((-x[0]).rem_euclid(m as i64));
                    out.push(0);
                } else {
                    out.push(x[0]);
                    out.push(1);
                }
            }
            FactorKind::Heisenberg(p) => {
                let p = p as i64;
                out.push((-x[0]).rem_euclid(p));
                out.push((-x[1]).rem_euclid(p));
                out.push((x[0] * x[1] - x[2]).rem_euclid(p));
            }
        }
        Ok(())
    }

    /// Symmetric default generators (identity excluded).
    fn generators(self) -> Vec<Coords> {
        let mut gens: Vec<Coords> = match self {
            FactorKind::Lattice(n) => {
                let mut g = Vec::with_capacity(2 * n);
                for i in 0..n {
                    for s in [1, -1] {
                        let mut c: Coords = smallvec::smallvec![0; n];
                        c[i] = s;
                        g.push(c);
                    }
                }
                g
            }
            FactorKind::Cyclic(m) => {
                let m = m as i64;
                vec![smallvec::smallvec![1 % m], smallvec::smallvec![(m - 1) % m]]
            }
            FactorKind::Dihedral(m) => {
                let m = m as i64;
                vec![
                    smallvec::smallvec![1 % m, 0],
                    smallvec::smallvec![(m - 1) % m, 0],
                    smallvec::smallvec![0, 1],
                ]
            }
            FactorKind::Heisenberg(p) => {
                let p = p as i64;
                vec![
                    smallvec::smallvec![1 % p, 0, 0],
                    smallvec::smallvec![(p - 1) % p, 0, 0],
                    smallvec::smallvec![0, 1 % p, 0],
                    smallvec::smallvec![0, (p - 1) % p, 0],
                ]
            }
        };
        let id = self.identity();
        gens.retain(|g| *g != id);
        gens.sort();
        gens.dedup();
        gens
    }

    fn elements(self) -> Vec<Coords> {
        let mut out = Vec::new();
        match self {
            FactorKind::Lattice(_) => unreachable!("lattice factors are infinite"),
            FactorKind::Cyclic(m) => {
                for k in 0..m as i64 {
                    out.push(smallvec::smallvec![k]);
                }
            }
            FactorKind::Dihedral(m) => {
                for k in 0..m as i64 {
                    for s in 0..2 {
                        out.push(smallvec::smallvec![k, s]);
                    }
                }
            }
            FactorKind::Heisenberg(p) => {
                let p = p as i64;
                for a in 0..p {
                    for b in 0..p {
                        for c in 0..p {
                            out.push(smallvec::smallvec![a, b, c]);
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
struct Factor {
    kind: FactorKind,
    offset: usize,
    /// Cayley word lengths for finite factors.
    lengths: Option<Arc<HashMap<Coords, u64>>>,
}

impl Factor {
    fn new(kind: FactorKind, offset: usize) -> Self {
        let lengths = kind.is_finite().then(|| {
            let gens = kind.generators();
            let mut dist: HashMap<Coords, u64> = HashMap::new();
            let id = kind.identity();
            dist.insert(id.clone(), 0);
            let mut queue = VecDeque::from([id]);
            while let Some(x) = queue.pop_front() {
                let d = dist[&x];
                for g in &gens {
                    let mut out = Coords::new();
                    kind.mul_into(&x, g, &mut out).expect("finite factor");
                    dist.entry(out.clone()).or_insert_with(|| {
                        queue.push_back(out);
                        d + 1
                    });
                }
            }
            Arc::new(dist)
        });
        Factor {
            kind,
            offset,
            lengths,
        }
    }

    fn slice<'a>(&self, x: &'a [i64]) -> &'a [i64] {
        &x[self.offset..self.offset + self.kind.dim()]
    }

    fn length(&self, x: &[i64]) -> u64 {
        match &self.lengths {
            None => x.iter().map(|c| c.unsigned_abs()).sum(),
            Some(table) => table[x],
        }
    }

    /// Elements of this factor with word length at most `radius`, with lengths.
    fn ball(&self, radius: u64) -> Vec<(Coords, u64)> {
        match self.kind {
            FactorKind::Lattice(n) => {
                let mut out = Vec::new();
                let mut cur = Coords::new();
                lattice_ball(n, radius as i64, &mut cur, &mut out);
                out.into_iter()
                    .map(|c| {
                        let l = c.iter().map(|v| v.unsigned_abs()).sum();
                        (c, l)
                    })
                    .collect()
            }
            _ => {
                let table = self.lengths.as_ref().expect("finite factor");
                self.kind
                    .elements()
                    .into_iter()
                    .filter_map(|c| {
                        let l = table[&c];
                        (l <= radius).then_some((c, l))
                    })
                    .collect()
            }
        }
    }
}

fn lattice_ball(n: usize, budget: i64, cur: &mut Coords, out: &mut Vec<Coords>) {
    if cur.len() == n {
        out.push(cur.clone());
        return;
    }
    for v in -budget..=budget {
        cur.push(v);
        lattice_ball(n, budget - v.abs(), cur, out);
        cur.pop();
    }
}

/// A discrete group together with a finite generating set `V` containing the unit.
#[derive(Clone, Debug)]
pub struct GroupCtx {
    factors: Vec<Factor>,
    dim: usize,
    generators: Vec<GroupElement>,
    elements: Option<Arc<Vec<GroupElement>>>,
}

impl PartialEq for GroupCtx {
    fn eq(&self, other: &Self) -> bool {
        self.kinds() == other.kinds() && self.generators == other.generators
    }
}

impl GroupCtx {
    pub fn from_factors(kinds: &[FactorKind]) -> Result<Self, GroupError> {
        if kinds.is_empty() {
            return Err(GroupError::InvalidSpec("empty product".into()));
        }
        let mut factors = Vec::with_capacity(kinds.len());
        let mut offset = 0;
        for &kind in kinds {
            match kind {
                FactorKind::Lattice(0) => return Err(GroupError::InvalidSpec("Z^0".into())),
                FactorKind::Cyclic(0) | FactorKind::Dihedral(0) => {
                    return Err(GroupError::InvalidSpec(format!("{} has order 0", kind.spec())))
                }
                FactorKind::Heisenberg(p) if p < 2 => {
                    return Err(GroupError::InvalidSpec(format!("Heis{p}: modulus must be >= 2")))
                }
                _ => {}
            }
            factors.push(Factor::new(kind, offset));
            offset += kind.dim();
        }
        let mut ctx = GroupCtx {
            factors,
            dim: offset,
            generators: Vec::new(),
            elements: None,
        };
        if ctx.factors.iter().all(|f| f.kind.is_finite()) {
            let mut all = Vec::new();
            ctx.product_enumerate(0, &mut Coords::new(), &mut all);
            all.sort();
            ctx.elements = Some(Arc::new(all));
        }
        ctx.generators = ctx.default_generators();
        Ok(ctx)
    }

    pub fn lattice(n: usize) -> Self {
        Self::from_factors(&[FactorKind::Lattice(n)]).expect("n >= 1")
    }

    pub fn cyclic(m: u64) -> Self {
        Self::from_factors(&[FactorKind::Cyclic(m)]).expect("m >= 1")
    }

    pub fn dihedral(m: u64) -> Self {
        Self::from_factors(&[FactorKind::Dihedral(m)]).expect("m >= 1")
    }

    pub fn heisenberg(p: u64) -> Self {
        Self::from_factors(&[FactorKind::Heisenberg(p)]).expect("p >= 2")
    }

    pub fn kinds(&self) -> Vec<FactorKind> {
        self.factors.iter().map(|f| f.kind).collect()
    }

    /// Canonical spec string, e.g. `Z^2` or `C2xC4`.
    pub fn spec(&self) -> String {
        self.factors
            .iter()
            .map(|f| f.kind.spec())
            .collect::<Vec<_>>()
            .join("x")
    }

    /// Number of integer coordinates per element.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Some(n)` when the whole group is a single lattice `Z^n`.
    pub fn lattice_rank(&self) -> Option<usize> {
        match self.factors.as_slice() {
            [Factor {
                kind: FactorKind::Lattice(n),
                ..
            }] => Some(*n),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.elements.is_some()
    }

    pub fn order(&self) -> Option<usize> {
        self.elements.as_ref().map(|e| e.len())
    }

    /// All elements in deterministic order, for finite groups.
    pub fn elements(&self) -> Option<&[GroupElement]> {
        self.elements.as_deref().map(|v| v.as_slice())
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Replace the generating set `V`. The unit is added if missing. For finite
    /// groups the set must generate the whole group.
    pub fn with_generators(mut self, gens: Vec<GroupElement>) -> Result<Self, GroupError> {
        let mut gens = gens;
        for g in &gens {
            self.validate(g)?;
        }
        gens.push(self.identity());
        gens.sort();
        gens.dedup();
        if let Some(all) = &self.elements {
            let mut reached: HashSet<GroupElement> = HashSet::from([self.identity()]);
            let mut frontier = vec![self.identity()];
            while let Some(x) = frontier.pop() {
                for g in &gens {
                    let y = self.mul(&x, g);
                    if reached.insert(y.clone()) {
                        frontier.push(y);
                    }
                }
            }
            if reached.len() != all.len() {
                return Err(GroupError::NotGenerating {
                    reached: reached.len(),
                    order: all.len(),
                });
            }
        }
        self.generators = gens;
        Ok(self)
    }

    fn default_generators(&self) -> Vec<GroupElement> {
        let id = self.identity();
        let mut gens = vec![id.clone()];
        for f in &self.factors {
            for g in f.kind.generators() {
                let mut c = id.0.clone();
                c[f.offset..f.offset + g.len()].copy_from_slice(&g);
                gens.push(GroupElement(c));
            }
        }
        gens.sort();
        gens.dedup();
        gens
    }

    fn product_enumerate(&self, i: usize, cur: &mut Coords, out: &mut Vec<GroupElement>) {
        if i == self.factors.len() {
            out.push(GroupElement(cur.clone()));
            return;
        }
        for e in self.factors[i].kind.elements() {
            let n = cur.len();
            cur.extend_from_slice(&e);
            self.product_enumerate(i + 1, cur, out);
            cur.truncate(n);
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(smallvec::smallvec![0; self.dim])
    }

    pub fn is_identity(&self, x: &GroupElement) -> bool {
        x.0.iter().all(|&c| c == 0)
    }

    pub fn validate(&self, x: &GroupElement) -> Result<(), GroupError> {
        if x.len() != self.dim {
            return Err(GroupError::InvalidElement {
                element: x.to_string(),
                group: self.spec(),
            });
        }
        for f in &self.factors {
            if !f.kind.validate(f.slice(&x.0)) {
                return Err(GroupError::InvalidElement {
                    element: x.to_string(),
                    group: self.spec(),
                });
            }
        }
        Ok(())
    }

    /// Checked product: validates both operands and reports lattice overflow.
    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(x)?;
        self.validate(y)?;
        self.try_mul(x, y)
    }

    /// Checked inverse.
    pub fn inverse(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(x)?;
        self.try_inv(x)
    }

    fn try_mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        let mut out = Coords::new();
        for f in &self.factors {
            f.kind.mul_into(f.slice(&x.0), f.slice(&y.0), &mut out)?;
        }
        Ok(GroupElement(out))
    }

    fn try_inv(&self, x: &GroupElement) -> Result<GroupElement, GroupError> {
        let mut out = Coords::new();
        for f in &self.factors {
            f.kind.inv_into(f.slice(&x.0), &mut out)?;
        }
        Ok(GroupElement(out))
    }

    /// Product of two elements already known to be valid.
    ///
    /// Panics on lattice coordinate overflow; use [`GroupCtx::multiply`] for a
    /// checked product.
    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.try_mul(x, y).expect("lattice coordinate overflow")
    }

    /// Inverse of an element already known to be valid. Panics on overflow.
    pub fn inv(&self, x: &GroupElement) -> GroupElement {
        self.try_inv(x).expect("lattice coordinate overflow")
    }

    /// `x y^{-1}`
    pub fn mul_inv(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.mul(x, &self.inv(y))
    }

    /// `x^{-1} y`
    pub fn inv_mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.mul(&self.inv(x), y)
    }

    /// Word length with respect to the default symmetric generators; the
    /// ℓ¹-norm on lattice factors.
    pub fn word_length(&self, x: &GroupElement) -> u64 {
        self.factors.iter().map(|f| f.length(f.slice(&x.0))).sum()
    }

    /// All elements of word length at most `radius`, sorted.
    pub fn ball(&self, radius: u64) -> Vec<GroupElement> {
        let per_factor: Vec<Vec<(Coords, u64)>> =
            self.factors.iter().map(|f| f.ball(radius)).collect();
        let mut out = Vec::new();
        fn rec(
            parts: &[Vec<(Coords, u64)>],
            i: usize,
            budget: u64,
            cur: &mut Coords,
            out: &mut Vec<GroupElement>,
        ) {
            if i == parts.len() {
                out.push(GroupElement(cur.clone()));
                return;
            }
            for (c, l) in &parts[i] {
                if *l <= budget {
                    let n = cur.len();
                    cur.extend_from_slice(c);
                    rec(parts, i + 1, budget - l, cur, out);
                    cur.truncate(n);
                }
            }
        }
        rec(&per_factor, 0, radius, &mut Coords::new(), &mut out);
        out.sort();
        out
    }

    /// A random element: uniform over finite factors and uniform in the box
    /// `[-radius, radius]^n` on lattice factors.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, radius: i64) -> GroupElement {
        let mut out = Coords::new();
        for f in &self.factors {
            match f.kind {
                FactorKind::Lattice(n) => {
                    for _ in 0..n {
                        out.push(rng.gen_range(-radius..=radius));
                    }
                }
                FactorKind::Cyclic(m) => out.push(rng.gen_range(0..m as i64)),
                FactorKind::Dihedral(m) => {
                    out.push(rng.gen_range(0..m as i64));
                    out.push(rng.gen_range(0..2));
                }
                FactorKind::Heisenberg(p) => {
                    for _ in 0..3 {
                        out.push(rng.gen_range(0..p as i64));
                    }
                }
            }
        }
        GroupElement(out)
    }

    /// Successive shells `V^n \ V^(n-1)` for `n = 0, 1, ..., n_max`, where
    /// `V^0 = {e}`. Each shell is sorted.
    pub fn power_shells(&self, n_max: usize) -> Result<Vec<Vec<GroupElement>>, GroupError> {
        let id = self.identity();
        if self.generators.is_empty() || !self.generators.contains(&id) {
            return Err(GroupError::InvalidGenerators);
        }
        let mut seen: HashSet<GroupElement> = HashSet::from([id.clone()]);
        let mut shells = vec![vec![id]];
        for _ in 0..n_max {
            let prev = shells.last().expect("nonempty");
            let mut next = Vec::new();
            for x in prev {
                for g in &self.generators {
                    let y = self.mul(x, g);
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            next.sort();
            shells.push(next);
        }
        Ok(shells)
    }

    /// Parse an element from its coordinates and validate it.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement, GroupError> {
        let x = GroupElement::from(coords);
        self.validate(&x)?;
        Ok(x)
    }
}

impl fmt::Display for GroupCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

impl FromStr for GroupCtx {
    type Err = GroupError;

    /// Parse `factor ("x" factor)*` with factors `Z`, `Z^n`, `Cm`, `Dm`, `Heisp`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::InvalidSpec(s.to_string());
        let parse_num = |t: &str| -> Result<u64, GroupError> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<u64>().map_err(|_| bad())
        };
        let mut kinds = Vec::new();
        for part in s.trim().split('x') {
            let part = part.trim();
            let kind = if let Some(rest) = part.strip_prefix("Heis") {
                FactorKind::Heisenberg(parse_num(rest)?)
            } else if let Some(rest) = part.strip_prefix('Z') {
                if rest.is_empty() {
                    FactorKind::Lattice(1)
                } else {
                    let n = rest.strip_prefix('^').ok_or_else(bad)?;
                    FactorKind::Lattice(parse_num(n)? as usize)
                }
            } else if let Some(rest) = part.strip_prefix('C') {
                FactorKind::Cyclic(parse_num(rest)?)
            } else if let Some(rest) = part.strip_prefix('D') {
                FactorKind::Dihedral(parse_num(rest)?)
            } else {
                return Err(bad());
            };
            kinds.push(kind);
        }
        GroupCtx::from_factors(&kinds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g<const N: usize>(c: [i64; N]) -> GroupElement {
        GroupElement::from(c)
    }

    #[test]
    fn lattice_product_and_inverse() {
        let z2 = GroupCtx::lattice(2);
        assert_eq!(z2.multiply(&g([1, 0]), &g([0, 1])).unwrap(), g([1, 1]));
        assert_eq!(z2.inverse(&g([3, -1])).unwrap(), g([-3, 1]));
    }

    #[test]
    fn cyclic_product_and_inverse() {
        let c4 = GroupCtx::cyclic(4);
        assert_eq!(c4.multiply(&g([3]), &g([2])).unwrap(), g([1]));
        assert_eq!(c4.inverse(&g([1])).unwrap(), g([3]));
    }

    #[test]
    fn invalid_elements_are_rejected() {
        let c4 = GroupCtx::cyclic(4);
        assert!(matches!(
            c4.multiply(&g([4]), &g([0])),
            Err(GroupError::InvalidElement { .. })
        ));
        assert!(c4.inverse(&g([1, 0])).is_err());
    }

    #[test]
    fn lattice_overflow_is_checked() {
        let z = GroupCtx::lattice(1);
        assert_eq!(
            z.multiply(&g([i64::MAX]), &g([1])),
            Err(GroupError::Overflow)
        );
        assert_eq!(z.inverse(&g([i64::MIN])), Err(GroupError::Overflow));
    }

    /// Brute-force Cayley table of D3 built from words in r and s with the
    /// relations r^3 = s^2 = e and s r s = r^-1, reduced to the normal form r^k s^t.
    #[test]
    fn dihedral3_matches_presentation() {
        let d3 = GroupCtx::dihedral(3);
        // normal form r^k s^t; multiply (k1,t1)(k2,t2) by pushing s through r^k2
        let oracle = |a: (i64, i64), b: (i64, i64)| -> (i64, i64) {
            let mut k = a.0;
            let mut t = a.1;
            // apply r^k2 one generator at a time: s r = r^-1 s
            for _ in 0..b.0 {
                k += if t == 1 { -1 } else { 1 };
            }
            t = (t + b.1) % 2;
            (k.rem_euclid(3), t)
        };
        for k1 in 0..3 {
            for t1 in 0..2 {
                for k2 in 0..3 {
                    for t2 in 0..2 {
                        let (k, t) = oracle((k1, t1), (k2, t2));
                        assert_eq!(d3.mul(&g([k1, t1]), &g([k2, t2])), g([k, t]));
                    }
                }
            }
        }
        let r = g([1, 0]);
        let s = g([0, 1]);
        let rs = d3.mul(&r, &s);
        assert_eq!(d3.mul(&rs, &rs), d3.identity());
        assert_eq!(d3.mul(&d3.mul(&s, &r), &s), d3.inv(&r));
    }

    #[test]
    fn heisenberg_inverse_exhaustive() {
        let h = GroupCtx::heisenberg(3);
        let all = h.elements().unwrap();
        assert_eq!(all.len(), 27);
        for x in all {
            let xi = h.inverse(x).unwrap();
            assert_eq!(h.mul(x, &xi), h.identity());
            assert_eq!(h.mul(&xi, x), h.identity());
        }
    }

    #[test]
    fn finite_group_axioms_exhaustive() {
        for spec in ["C6", "D3", "Heis3", "C2xC4", "D4"] {
            let ctx: GroupCtx = spec.parse().unwrap();
            let all = ctx.elements().unwrap();
            let e = ctx.identity();
            for x in all {
                assert_eq!(ctx.mul(x, &e), *x);
                assert_eq!(ctx.mul(&e, x), *x);
                for y in all {
                    let xy = ctx.mul(x, y);
                    assert!(ctx.validate(&xy).is_ok());
                    for z in all {
                        assert_eq!(ctx.mul(&xy, z), ctx.mul(x, &ctx.mul(y, z)), "{spec}");
                    }
                }
            }
        }
    }

    #[test]
    fn balls() {
        let z = GroupCtx::lattice(1);
        assert_eq!(z.ball(2), vec![g([-2]), g([-1]), g([0]), g([1]), g([2])]);
        assert_eq!(GroupCtx::lattice(2).ball(1).len(), 5);
        assert_eq!(GroupCtx::lattice(2).ball(24).len(), 2 * 24 * 24 + 2 * 24 + 1);
        let d3 = GroupCtx::dihedral(3);
        assert_eq!(d3.ball(10), d3.elements().unwrap().to_vec());
        for r in 0..4 {
            let b = d3.ball(r);
            let b1 = d3.ball(r + 1);
            assert!(b.iter().all(|x| b1.contains(x)));
        }
    }

    #[test]
    fn word_length_properties_on_finite_groups() {
        for spec in ["C6", "D3", "Heis3", "C2xC4"] {
            let ctx: GroupCtx = spec.parse().unwrap();
            let all = ctx.elements().unwrap();
            assert_eq!(ctx.word_length(&ctx.identity()), 0);
            for x in all {
                assert_eq!(ctx.word_length(x), ctx.word_length(&ctx.inv(x)));
                for y in all {
                    assert!(ctx.word_length(&ctx.mul(x, y)) <= ctx.word_length(x) + ctx.word_length(y));
                }
            }
        }
    }

    #[test]
    fn parse_specs() {
        for (s, canon) in [
            ("Z^2", "Z^2"),
            ("Z", "Z"),
            ("Z^1", "Z"),
            ("C4", "C4"),
            ("D3", "D3"),
            ("Heis3", "Heis3"),
            ("C2xC4", "C2xC4"),
            ("Z^2xC3", "Z^2xC3"),
        ] {
            assert_eq!(s.parse::<GroupCtx>().unwrap().spec(), canon);
        }
        for s in ["", "Q", "Z^", "C", "Cx", "Heis1", "Z^0", "C4y", "Z^-1"] {
            assert!(s.parse::<GroupCtx>().is_err(), "{s}");
        }
        let c2c4: GroupCtx = "C2xC4".parse().unwrap();
        assert_eq!(c2c4.order(), Some(8));
        assert_eq!(c2c4.dim(), 2);
    }

    #[test]
    fn custom_generators_must_generate_finite_groups() {
        let c6 = GroupCtx::cyclic(6);
        assert!(c6.clone().with_generators(vec![g([1]), g([2])]).is_ok());
        assert!(matches!(
            c6.with_generators(vec![g([2])]),
            Err(GroupError::NotGenerating { reached: 3, order: 6 })
        ));
    }

    #[test]
    fn power_shells_lattice() {
        let z2 = GroupCtx::lattice(2);
        let shells = z2.power_shells(4).unwrap();
        for (n, shell) in shells.iter().enumerate() {
            assert_eq!(shell.len(), if n == 0 { 1 } else { 4 * n });
            assert!(shell.iter().all(|x| z2.word_length(x) == n as u64));
        }
    }

    #[test]
    fn lattice_sample_axioms() {
        let z3 = GroupCtx::lattice(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = z3.sample(&mut rng, 50);
            let y = z3.sample(&mut rng, 50);
            let z = z3.sample(&mut rng, 50);
            assert_eq!(z3.mul(&z3.mul(&x, &y), &z), z3.mul(&x, &z3.mul(&y, &z)));
            assert_eq!(z3.mul(&x, &z3.inv(&x)), z3.identity());
            assert!(z3.word_length(&z3.mul(&x, &y)) <= z3.word_length(&x) + z3.word_length(&y));
        }
    }
}
