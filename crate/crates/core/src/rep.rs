//! Finite Hilbert-space models: induced covariant representations, integrated
//! forms, twisted matrix operators, the regular representation, intertwiners
//! and the operator-valued embedding θ.
//!
//! Every supported coefficient representation is a direct sum of point
//! evaluations `φ ↦ φ(σ₀)`, so operators are stored block-diagonally with one
//! matrix on `ℓ²(W)` per point `σ₀`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient::{Coefficient, CoefficientModel, SigmaPoint, ONE, ZERO};
use crate::crossed::CrossedElement;
use crate::error::{Error, Result};
use crate::group::{GroupCtx, GroupElement};
use crate::kernel::{KernelElement, ScalarKernel};
use crate::linalg::{self, CMatrix};
use crate::system::TwistedSystem;

/// A finite index set of group elements in a fixed order.
#[derive(Clone, Debug)]
pub struct Window {
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, usize>,
    full: bool,
}

impl Window {
    /// The ball of the given radius, sorted.
    pub fn ball(ctx: &GroupCtx, radius: u64) -> Self {
        let elements = ctx.ball(radius);
        let full = ctx.order().is_some_and(|n| n == elements.len());
        Self::build(elements, full)
    }

    /// The whole group; finite groups only.
    pub fn full(ctx: &GroupCtx) -> Result<Self> {
        let elements = ctx
            .elements()
            .ok_or_else(|| Error::Invalid("a full window needs a finite group".into()))?
            .to_vec();
        Ok(Self::build(elements, true))
    }

    fn build(elements: Vec<GroupElement>, full: bool) -> Self {
        let index = elements.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        Window {
            elements,
            index,
            full,
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Whether the window is the whole (finite) group.
    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn position(&self, x: &GroupElement) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Positions of `x` with `b·x ∈ W` and `x·b ∈ W` for all `b` in the ball
    /// of radius `r`.
    pub fn interior(&self, ctx: &GroupCtx, r: u64) -> Vec<usize> {
        if self.full {
            return (0..self.len()).collect();
        }
        let ball = ctx.ball(r);
        (0..self.len())
            .filter(|&i| {
                let x = &self.elements[i];
                ball.iter()
                    .all(|b| self.index.contains_key(&ctx.mul(b, x)) && self.index.contains_key(&ctx.mul(x, b)))
            })
            .collect()
    }

    /// Labels of the index elements, in order.
    pub fn labels(&self) -> Vec<String> {
        self.elements.iter().map(ToString::to_string).collect()
    }
}

/// The supported coefficient representations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CoefficientRep {
    /// Evaluation `φ ↦ φ(σ₀)` on `ℂ`.
    Point(SigmaPoint),
    /// Multiplication on `ℓ²(Σ)` for finite Σ.
    Multiplication,
    /// Multiplication on `ℓ²(G)` in the standard case, or on `ℓ²(Σ)` for finite Σ.
    Regular,
}

/// Operator on `ℓ²(W) ⊗ ℂ^P` that is block diagonal over the points `P`.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    pub window: Arc<Window>,
    pub points: Vec<SigmaPoint>,
    pub blocks: Vec<CMatrix>,
}

/// A single matrix on `ℓ²(W)`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub window: Arc<Window>,
    pub matrix: CMatrix,
}

impl DenseOperator {
    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            window: self.window.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn mul(&self, other: &DenseOperator) -> DenseOperator {
        DenseOperator {
            window: self.window.clone(),
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Largest entry difference over the given rows and columns.
    pub fn max_difference_on(&self, other: &DenseOperator, rows: &[usize], cols: &[usize]) -> f64 {
        linalg::max_difference_on(&self.matrix, &other.matrix, rows, cols)
    }
}

impl BlockOperator {
    pub fn adjoint(&self) -> BlockOperator {
        self.map(|m| m.adjoint())
    }

    fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> BlockOperator {
        BlockOperator {
            window: self.window.clone(),
            points: self.points.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip(&self, other: &BlockOperator, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> BlockOperator {
        assert_eq!(self.points, other.points, "block operators over different points");
        BlockOperator {
            window: self.window.clone(),
            points: self.points.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn mul(&self, other: &BlockOperator) -> BlockOperator {
        self.zip(other, |a, b| a * b)
    }

    pub fn add(&self, other: &BlockOperator) -> BlockOperator {
        self.zip(other, |a, b| a + b)
    }

    pub fn scale(&self, s: Complex64) -> BlockOperator {
        self.map(|m| m * s)
    }

    /// Block for a single point.
    pub fn block(&self, point: &SigmaPoint) -> Option<&CMatrix> {
        self.points.iter().position(|p| p == point).map(|i| &self.blocks[i])
    }

    /// Largest entry difference over the given rows and columns of every block.
    pub fn max_difference_on(&self, other: &BlockOperator, rows: &[usize], cols: &[usize]) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_difference_on(a, b, rows, cols))
            .fold(0.0, f64::max)
    }

    pub fn max_difference(&self, other: &BlockOperator) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| linalg::max_difference(a, b))
            .fold(0.0, f64::max)
    }

    pub fn operator_norm(&self) -> f64 {
        self.blocks.iter().map(linalg::operator_norm).fold(0.0, f64::max)
    }

    /// The block-diagonal matrix, point-major.
    pub fn to_dense(&self) -> CMatrix {
        let n = self.window.len();
        let mut out = CMatrix::zeros(n * self.blocks.len(), n * self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            out.view_mut((k * n, k * n), (n, n)).copy_from(b);
        }
        out
    }
}

/// The points `σ₀` whose evaluations make up the representation.
pub fn rep_points(sys: &TwistedSystem, rep: &CoefficientRep, window: &Window) -> Result<Vec<SigmaPoint>> {
    let unsupported = |why: &str| Error::UnsupportedRepresentation(why.to_string());
    match rep {
        CoefficientRep::Point(p) => {
            let ok = match (sys.model(), p) {
                (CoefficientModel::Scalar, SigmaPoint::Unit) => true,
                (CoefficientModel::Spectrum(n), SigmaPoint::Index(i)) => *i < n,
                (CoefficientModel::Standard, SigmaPoint::Group(g)) => sys.ctx().validate(g).is_ok(),
                _ => false,
            };
            if ok {
                Ok(vec![p.clone()])
            } else {
                Err(unsupported(&format!("point {p} is not in the spectrum of model {}", sys.model())))
            }
        }
        CoefficientRep::Multiplication => match sys.model() {
            CoefficientModel::Standard => Err(unsupported("multiplication needs a finite spectrum model")),
            _ => Ok(sys.sigma_points().expect("finite spectrum")),
        },
        CoefficientRep::Regular => match sys.model() {
            CoefficientModel::Standard => Ok(window.elements().iter().cloned().map(SigmaPoint::Group).collect()),
            _ => Ok(sys.sigma_points().expect("finite spectrum")),
        },
    }
}

fn omega_at(sys: &TwistedSystem, x: &GroupElement, y: &GroupElement, s: &SigmaPoint) -> Complex64 {
    sys.omega(x, y).eval(s)
}

/// Assemble an `n×n` matrix row by row in parallel.
fn assemble(n: usize, row: impl Fn(usize) -> Vec<(usize, Complex64)> + Sync + Send) -> CMatrix {
    let rows: Vec<Vec<(usize, Complex64)>> = (0..n).into_par_iter().map(row).collect();
    let mut m = CMatrix::zeros(n, n);
    for (i, entries) in rows.into_iter().enumerate() {
        for (j, v) in entries {
            m[(i, j)] = v;
        }
    }
    m
}

/// `[r(φ)v](x) = φ(x·σ₀) v(x)`
pub fn point_r(sys: &TwistedSystem, s0: &SigmaPoint, phi: &Coefficient, w: &Window) -> CMatrix {
    let n = w.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, x) in w.elements().iter().enumerate() {
        m[(i, i)] = phi.eval(&sys.sigma_act(x, s0));
    }
    m
}

/// `[L(y)v](x) = ω(x⁻¹, y; σ₀) v(y⁻¹x)`, zero where `y⁻¹x ∉ W`.
pub fn point_shift(sys: &TwistedSystem, s0: &SigmaPoint, y: &GroupElement, w: &Window) -> CMatrix {
    let ctx = sys.ctx();
    assemble(w.len(), |i| {
        let x = &w.elements()[i];
        match w.position(&ctx.inv_mul(y, x)) {
            Some(j) => vec![(j, omega_at(sys, &ctx.inv(x), y, s0))],
            None => Vec::new(),
        }
    })
}

/// `[ind(f)v](x) = Σ_y f(xy⁻¹; x·σ₀) ω(x⁻¹, xy⁻¹; σ₀) v(y)`
pub fn point_integrated(sys: &TwistedSystem, s0: &SigmaPoint, f: &CrossedElement, w: &Window) -> CMatrix {
    let ctx = sys.ctx();
    assemble(w.len(), |i| {
        let x = &w.elements()[i];
        let xi = ctx.inv(x);
        let xs = sys.sigma_act(x, s0);
        f.entries()
            .iter()
            .filter_map(|(a, c)| {
                // y = a⁻¹x
                let j = w.position(&ctx.inv_mul(a, x))?;
                Some((j, c.eval(&xs) * omega_at(sys, &xi, a, s0)))
            })
            .collect()
    })
}

/// `[Int(K)v](x) = Σ_y K(x,y; σ₀) ω(x⁻¹, xy⁻¹; σ₀) v(y)`
pub fn point_int_kernel(sys: &TwistedSystem, s0: &SigmaPoint, k: &KernelElement, w: &Window) -> CMatrix {
    let ctx = sys.ctx();
    assemble(w.len(), |i| {
        let x = &w.elements()[i];
        let xi = ctx.inv(x);
        k.diagonals()
            .keys()
            .filter_map(|a| {
                let y = ctx.inv_mul(a, x);
                let j = w.position(&y)?;
                Some((j, k.diagonal_value(a, x).eval(s0) * omega_at(sys, &xi, a, s0)))
            })
            .collect()
    })
}

fn per_point(points: Vec<SigmaPoint>, w: &Arc<Window>, f: impl Fn(&SigmaPoint) -> CMatrix + Sync + Send) -> BlockOperator {
    let blocks = points.par_iter().map(f).collect();
    BlockOperator {
        window: w.clone(),
        points,
        blocks,
    }
}

/// The induced pair `(r, L)` of a coefficient representation on a window.
pub struct InducedPair<'a> {
    sys: &'a TwistedSystem,
    window: Arc<Window>,
    points: Vec<SigmaPoint>,
}

/// Induced covariant pair for `rep` on `window`.
pub fn induced_pair<'a>(sys: &'a TwistedSystem, rep: &CoefficientRep, window: Arc<Window>) -> Result<InducedPair<'a>> {
    let points = rep_points(sys, rep, &window)?;
    Ok(InducedPair { sys, window, points })
}

impl InducedPair<'_> {
    /// `[r(φ)v](x) = π[α_{x⁻¹}φ] v(x)`
    pub fn r(&self, phi: &Coefficient) -> BlockOperator {
        per_point(self.points.clone(), &self.window, |s| point_r(self.sys, s, phi, &self.window))
    }

    /// `[L(y)v](x) = π[ω(x⁻¹, y)] v(y⁻¹x)`
    pub fn shift(&self, y: &GroupElement) -> BlockOperator {
        per_point(self.points.clone(), &self.window, |s| point_shift(self.sys, s, y, &self.window))
    }

    pub fn points(&self) -> &[SigmaPoint] {
        &self.points
    }
}

/// The integrated form `Σ_x r[f(x)] L(x)` of the induced representation.
pub fn integrated(sys: &TwistedSystem, rep: &CoefficientRep, f: &CrossedElement, window: &Arc<Window>) -> Result<BlockOperator> {
    same_system(sys, f.system())?;
    let points = rep_points(sys, rep, window)?;
    Ok(per_point(points, window, |s| point_integrated(sys, s, f, window)))
}

/// The twisted matrix operator `[Int(K)v](x) = Σ_y π[K(x,y)] π[ω(x⁻¹,xy⁻¹)] v(y)`.
pub fn int_kernel(sys: &TwistedSystem, rep: &CoefficientRep, k: &KernelElement, window: &Arc<Window>) -> Result<BlockOperator> {
    same_system(sys, k.system())?;
    let points = rep_points(sys, rep, window)?;
    Ok(per_point(points, window, |s| point_int_kernel(sys, s, k, window)))
}

/// `[Int_λ(K)v](x) = Σ_y K(x,y) ω(x⁻¹, xy⁻¹; e) v(y)`
pub fn int_scalar(k: &ScalarKernel, window: &Arc<Window>) -> DenseOperator {
    let sys = k.system();
    let ctx = sys.ctx();
    let e = SigmaPoint::Group(ctx.identity());
    let matrix = assemble(window.len(), |i| {
        let x = &window.elements()[i];
        let xi = ctx.inv(x);
        k.diagonals()
            .keys()
            .filter_map(|a| {
                let y = ctx.inv_mul(a, x);
                let j = window.position(&y)?;
                Some((j, k.entry(x, &y) * omega_at(sys, &xi, a, &e)))
            })
            .collect()
    });
    DenseOperator {
        window: window.clone(),
        matrix,
    }
}

/// The regular representation: one point representation per `σ₀` (all of W in
/// the standard case, all of Σ for finite Σ).
pub fn regular_rep(sys: &TwistedSystem, f: &CrossedElement, window: &Arc<Window>) -> Result<BlockOperator> {
    integrated(sys, &CoefficientRep::Regular, f, window)
}

/// `(Rv)(x) = ω(z⁻¹, x⁻¹; σ₀) v(xz)`, intertwining the point representations
/// at `σ₀` and `z·σ₀`.
pub fn intertwiner(sys: &TwistedSystem, z: &GroupElement, s0: &SigmaPoint, window: &Arc<Window>) -> DenseOperator {
    let ctx = sys.ctx();
    let zi = ctx.inv(z);
    let matrix = assemble(window.len(), |i| {
        let x = &window.elements()[i];
        match window.position(&ctx.mul(x, z)) {
            Some(j) => vec![(j, omega_at(sys, &zi, &ctx.inv(x), s0))],
            None => Vec::new(),
        }
    });
    DenseOperator {
        window: window.clone(),
        matrix,
    }
}

/// Residual of `R·A = B·R` on the given rows and columns.
pub fn intertwining_residual(r: &CMatrix, a: &CMatrix, b: &CMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    linalg::max_difference_on(&(r * a), &(b * r), rows, cols)
}

/// `(θf)(x) = r[f(x)] L(x)` on the full window of a finite group.
pub fn theta_embedding(sys: &TwistedSystem, rep: &CoefficientRep, f: &CrossedElement) -> Result<BTreeMap<GroupElement, BlockOperator>> {
    same_system(sys, f.system())?;
    let window = Arc::new(Window::full(sys.ctx())?);
    let pair = induced_pair(sys, rep, window)?;
    Ok(f.entries()
        .iter()
        .map(|(x, c)| (x.clone(), pair.r(c).mul(&pair.shift(x))))
        .collect())
}

/// `(S⋆T)(x) = Σ_y S(y) T(y⁻¹x)` for finitely supported operator-valued functions.
pub fn operator_convolve(
    ctx: &GroupCtx,
    s: &BTreeMap<GroupElement, BlockOperator>,
    t: &BTreeMap<GroupElement, BlockOperator>,
) -> BTreeMap<GroupElement, BlockOperator> {
    let mut out: BTreeMap<GroupElement, BlockOperator> = BTreeMap::new();
    for (y, sy) in s {
        for (b, tb) in t {
            let x = ctx.mul(y, b);
            let term = sy.mul(tb);
            let next = match out.remove(&x) {
                Some(acc) => acc.add(&term),
                None => term,
            };
            out.insert(x, next);
        }
    }
    out
}

/// `S^⋆(x) = S(x⁻¹)*`
pub fn operator_involve(ctx: &GroupCtx, s: &BTreeMap<GroupElement, BlockOperator>) -> BTreeMap<GroupElement, BlockOperator> {
    s.iter().map(|(x, op)| (ctx.inv(x), op.adjoint())).collect()
}

/// Largest entry difference between two operator-valued functions.
pub fn operator_function_distance(
    s: &BTreeMap<GroupElement, BlockOperator>,
    t: &BTreeMap<GroupElement, BlockOperator>,
) -> f64 {
    let mut m = 0.0f64;
    for (x, op) in s {
        m = m.max(match t.get(x) {
            Some(o) => op.max_difference(o),
            None => op.blocks.iter().flat_map(|b| b.iter()).map(|z| z.norm()).fold(0.0, f64::max),
        });
    }
    for (x, op) in t {
        if !s.contains_key(x) {
            m = m.max(op.blocks.iter().flat_map(|b| b.iter()).map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    m
}

/// Identity on `ℓ²(W)`.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

fn same_system(sys: &TwistedSystem, other: &Arc<TwistedSystem>) -> Result<()> {
    if std::ptr::eq(sys, Arc::as_ptr(other)) || sys == other.as_ref() {
        Ok(())
    } else {
        Err(Error::SystemMismatch)
    }
}
