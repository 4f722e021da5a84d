//! Numerical probes: Gelfand-formula spectral radius estimates, the symmetry
//! probe for positive elements, off-diagonal decay of inverses, and the
//! weight growth verdict.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::crossed::{CrossedElement, SUPPORT_BUDGET};
use crate::error::{Error, Result};
use crate::group::GroupCtx;
use crate::linalg;
use crate::rep::{self, CoefficientRep, Window};
use crate::weight::{check_shell_ratio, check_ugrs, AdmissibleNorm, Weight};

/// Slack allowed by the symmetry probe at the default depth.
pub const SYMMETRY_SLACK: f64 = 0.15;

/// Default number of squaring levels.
pub const DEFAULT_LEVELS: usize = 6;

/// Tolerance for the monotonicity of the power-norm sequence.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Minimal singular value below which a decay profile is not trusted.
pub const DEFAULT_MARGIN: f64 = 1e-8;

/// Power-norm sequence `ρ_j = ‖h^(2^j)‖^(1/2^j)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusEstimate {
    /// `‖h^(2^j)‖` for each completed level `j`.
    pub norms: Vec<f64>,
    pub rhos: Vec<f64>,
    /// False when the support budget stopped the squaring early.
    pub complete: bool,
    /// Whether `ρ_j` is non-increasing up to [`MONOTONE_TOL`].
    pub monotone: bool,
}

impl RadiusEstimate {
    fn from_norms(norms: Vec<f64>, complete: bool) -> Self {
        let rhos: Vec<f64> = norms
            .iter()
            .enumerate()
            .map(|(j, n)| n.powf(1.0 / f64::powi(2.0, j as i32)))
            .collect();
        let monotone = rhos
            .windows(2)
            .all(|w| w[1] <= w[0] + MONOTONE_TOL * w[0].max(1.0));
        RadiusEstimate {
            norms,
            rhos,
            complete,
            monotone,
        }
    }

    /// The last (best) estimate.
    pub fn last(&self) -> f64 {
        self.rhos.last().copied().unwrap_or(0.0)
    }
}

/// One CSV row of a spectral report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralRow {
    pub level: usize,
    pub norm: f64,
    pub rho: f64,
    pub shifted_rho: Option<f64>,
}

/// Result of the symmetry probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    /// Estimates for `h = f^⋄ ⋄ f`.
    pub positive: RadiusEstimate,
    /// Estimates for `λδ_e − h`.
    pub shifted: RadiusEstimate,
    pub lambda: f64,
    pub shifted_estimate: f64,
    pub slack: f64,
    /// `λ(1+slack) − shifted_estimate`; positive on PASS.
    pub margin: f64,
    pub pass: bool,
}

impl SpectralReport {
    pub fn rows(&self) -> Vec<SpectralRow> {
        self.positive
            .norms
            .iter()
            .enumerate()
            .map(|(j, n)| SpectralRow {
                level: j,
                norm: *n,
                rho: self.positive.rhos[j],
                shifted_rho: self.shifted.rhos.get(j).copied(),
            })
            .collect()
    }
}

/// Gelfand-formula estimate by repeated squaring. A budget overrun yields a
/// partial estimate flagged incomplete.
pub fn spectral_radius_estimate(f: &CrossedElement, norm: &AdmissibleNorm, levels: usize) -> Result<RadiusEstimate> {
    if f.is_empty() {
        return Ok(RadiusEstimate::from_norms(vec![0.0; levels + 1], true));
    }
    match f.power(levels, norm, SUPPORT_BUDGET) {
        Ok(p) => Ok(RadiusEstimate::from_norms(p.norms, true)),
        Err(Error::BudgetExceeded { norms, .. }) => Ok(RadiusEstimate::from_norms(norms, false)),
        Err(e) => Err(e),
    }
}

/// `h = f^⋄ ⋄ f`, `λ = ρ(h)`, then `ρ(λδ_e − h)`; PASS when the latter is at
/// most `λ(1+slack)`.
pub fn symmetry_probe(f: &CrossedElement, norm: &AdmissibleNorm, levels: usize, slack: f64) -> Result<SpectralReport> {
    if f.is_empty() {
        return Err(Error::EmptyElement);
    }
    let h = f.involution().product(f)?;
    let positive = spectral_radius_estimate(&h, norm, levels)?;
    let lambda = positive.last();
    let shifted_element = CrossedElement::unit(f.system().clone())
        .scale(Complex64::new(lambda, 0.0))
        .sub(&h)?;
    let shifted = spectral_radius_estimate(&shifted_element, norm, levels)?;
    let shifted_estimate = shifted.last();
    let bound = lambda * (1.0 + slack);
    Ok(SpectralReport {
        pass: shifted_estimate <= bound && positive.monotone && shifted.monotone,
        margin: bound - shifted_estimate,
        positive,
        shifted,
        lambda,
        shifted_estimate,
        slack,
    })
}

/// Exact spectrum of `h = f^⋄ ⋄ f` in the regular representation of a
/// finite group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularSpectrum {
    pub dimension: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Largest deviation of the matrix from its adjoint.
    pub hermitian_defect: f64,
}

pub fn regular_spectrum(h: &CrossedElement) -> Result<RegularSpectrum> {
    let sys = h.system();
    let window = Arc::new(Window::full(sys.ctx())?);
    let m = rep::regular_rep(sys, h, &window)?.to_dense();
    let ev = linalg::hermitian_eigenvalues(&m);
    Ok(RegularSpectrum {
        dimension: m.nrows(),
        min_eigenvalue: ev.first().copied().unwrap_or(0.0),
        max_eigenvalue: ev.last().copied().unwrap_or(0.0),
        hermitian_defect: linalg::max_difference(&m, &m.adjoint()),
    })
}

/// One bucket of a decay profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub distance: u64,
    pub max_abs: f64,
    /// `Σ |row(y)|` over all `y` with word length at least `distance`.
    pub tail_sum: f64,
    /// Largest change of an entry at this distance when the radius doubles.
    pub stability_delta: Option<f64>,
}

/// Center row of the inverse of an integrated form, bucketed by word length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    pub radius: u64,
    pub dimension: usize,
    pub min_singular_value: f64,
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `ln max_abs` against distance (descriptive).
    pub log_slope: Option<f64>,
    /// The center row itself, in window order.
    pub center_row: Vec<(crate::group::GroupElement, Complex64)>,
}

/// Options for [`wiener_decay`].
#[derive(Clone, Debug)]
pub struct WienerOptions {
    pub radius: u64,
    pub margin: f64,
    /// Recompute at radius `2R` and report per-distance deltas.
    pub stability: bool,
}

fn center_row(f: &CrossedElement, radius: u64, margin: f64) -> Result<(Arc<Window>, f64, Vec<Complex64>)> {
    let sys = f.system();
    let window = Arc::new(Window::ball(sys.ctx(), radius));
    let point = CoefficientRep::Point(sys.base_point());
    let op = rep::integrated(sys, &point, f, &window)?;
    let m = &op.blocks[0];
    let smin = linalg::min_singular_value(m)?;
    // a NaN singular value counts as singular
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(smin > margin) {
        return Err(Error::Singular {
            min_singular_value: smin,
        });
    }
    let c = window
        .position(&sys.ctx().identity())
        .expect("balls contain the identity");
    let row = linalg::inverse_row(m, c)?;
    Ok((window, smin, row))
}

/// Invert the integrated form of `f` on the ball of radius R and profile the
/// center row by word distance.
pub fn wiener_decay(f: &CrossedElement, opts: &WienerOptions) -> Result<DecayProfile> {
    if f.is_empty() {
        return Err(Error::EmptyElement);
    }
    let ctx = f.system().ctx().clone();
    let (window, smin, row) = center_row(f, opts.radius, opts.margin)?;
    let big = if opts.stability && !window.is_full() {
        Some(center_row(f, 2 * opts.radius, opts.margin)?)
    } else {
        None
    };
    let dist: Vec<u64> = window.elements().iter().map(|y| ctx.word_length(y)).collect();
    let dmax = dist.iter().copied().max().unwrap_or(0);
    let mut max_abs = vec![0.0f64; dmax as usize + 1];
    let mut sums = vec![0.0f64; dmax as usize + 1];
    let mut deltas = vec![0.0f64; dmax as usize + 1];
    for (i, y) in window.elements().iter().enumerate() {
        let d = dist[i] as usize;
        max_abs[d] = max_abs[d].max(row[i].norm());
        sums[d] += row[i].norm();
        if let Some((bw, _, brow)) = &big {
            let j = bw.position(y).expect("larger ball contains the smaller");
            deltas[d] = deltas[d].max((row[i] - brow[j]).norm());
        }
    }
    let mut tail = 0.0;
    let mut rows: Vec<DecayRow> = (0..=dmax as usize)
        .rev()
        .map(|d| {
            tail += sums[d];
            DecayRow {
                distance: d as u64,
                max_abs: max_abs[d],
                tail_sum: tail,
                stability_delta: big.as_ref().map(|_| deltas[d]),
            }
        })
        .collect();
    rows.reverse();
    Ok(DecayProfile {
        radius: opts.radius,
        dimension: window.len(),
        min_singular_value: smin,
        log_slope: log_slope(&rows),
        center_row: window.elements().iter().cloned().zip(row).collect(),
        rows,
    })
}

fn log_slope(rows: &[DecayRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.max_abs > 0.0)
        .map(|r| (r.distance as f64, r.max_abs.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Parameters of the weight growth verdict.
#[derive(Clone, Debug, Serialize)]
pub struct GrsParams {
    pub n_max: usize,
    /// Upper bound for `a_{n_max}` in the first condition.
    pub threshold: f64,
    /// Number of trailing terms checked for monotonicity.
    pub tail: usize,
}

impl Default for GrsParams {
    fn default() -> Self {
        GrsParams {
            n_max: 32,
            threshold: 1.05,
            tail: 5,
        }
    }
}

/// Finite evidence for the two weight growth conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrsReport {
    /// `a_n = (max_{x ∈ Vⁿ} ν(x))^(1/n)` for `n = 1..=n_max`.
    pub ugrs: Vec<f64>,
    /// `sup/inf` of ν on the shell `Vⁿ \ Vⁿ⁻¹` for `n = 1..=n_max`.
    pub shell_ratio: Vec<f64>,
    pub final_a: f64,
    /// `a_{n_max}` below the threshold and non-increasing over the tail.
    pub condition1: bool,
    /// Shell ratios non-increasing over the tail.
    pub condition2: bool,
    pub pass: bool,
}

fn non_increasing_tail(seq: &[f64], tail: usize) -> bool {
    let start = seq.len().saturating_sub(tail);
    seq[start..]
        .windows(2)
        .all(|w| w[1] <= w[0] + MONOTONE_TOL * w[0].abs().max(1.0))
}

/// Combine the uniform growth sequence and the shell ratios into a verdict.
pub fn grs_verdict(ctx: &GroupCtx, nu: &Weight, params: &GrsParams) -> Result<GrsReport> {
    let ugrs = check_ugrs(ctx, nu, params.n_max)?;
    let shell_ratio = check_shell_ratio(ctx, nu, params.n_max)?;
    let final_a = ugrs.last().copied().unwrap_or(1.0);
    let condition1 = final_a < params.threshold && non_increasing_tail(&ugrs, params.tail);
    let condition2 = shell_ratio.iter().all(|r| r.is_finite()) && non_increasing_tail(&shell_ratio, params.tail);
    Ok(GrsReport {
        pass: condition1 && condition2,
        ugrs,
        shell_ratio,
        final_a,
        condition1,
        condition2,
    })
}
