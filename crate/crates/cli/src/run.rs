//! Experiment runners: each returns a report with a verdict and CSV rows.

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};
use tca_core::laws::{check_laws, LawOptions};
use tca_core::spectral::{self, GrsParams, WienerOptions};
use tca_core::{Error, VerifyOptions};

use crate::config::{GrsConfigParams, Kind, LawsParams, Loaded, SpectrumParams, VerifyParams, WienerParams};

/// One violated identity.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub identity: String,
    pub residual: f64,
    pub witness: String,
}

/// Everything written for one run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub kind: &'static str,
    pub verdict: &'static str,
    pub subject: String,
    pub seed: Option<u64>,
    pub failures: Vec<Failure>,
    pub result: Value,
    #[serde(skip)]
    pub csv_header: Vec<&'static str>,
    #[serde(skip)]
    pub csv_rows: Vec<Vec<String>>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Shortest round-trip form, matching the JSON report.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn report(
    kind: Kind,
    subject: String,
    seed: Option<u64>,
    failures: Vec<Failure>,
    result: Value,
    csv_header: Vec<&'static str>,
    csv_rows: Vec<Vec<String>>,
) -> Report {
    Report {
        kind: kind.name(),
        verdict: if failures.is_empty() { "PASS" } else { "FAIL" },
        subject,
        seed,
        failures,
        result,
        csv_header,
        csv_rows,
    }
}

pub fn run(kind: Kind, cfg: &Loaded) -> Result<Report> {
    match kind {
        Kind::Verify => verify(cfg),
        Kind::Laws => laws(cfg),
        Kind::Spectrum => spectrum(cfg),
        Kind::Wiener => wiener(cfg),
        Kind::Grs => grs(cfg),
    }
}

fn verify(cfg: &Loaded) -> Result<Report> {
    let p: VerifyParams = cfg.params()?;
    let sys = cfg.system()?;
    let opts = VerifyOptions {
        trials: p.trials,
        seed: cfg.seed.unwrap_or(0),
        radius: p.radius,
        ..VerifyOptions::default()
    };
    let rows = sys.verify_axioms(&opts);
    let failures = rows
        .iter()
        .filter(|r| !r.passes(p.tolerance))
        .map(|r| Failure {
            identity: r.axiom.clone(),
            residual: r.residual,
            witness: r.witness.clone().unwrap_or_default(),
        })
        .collect();
    let csv = rows
        .iter()
        .map(|r| vec![r.axiom.clone(), num(r.residual), r.witness.clone().unwrap_or_default()])
        .collect();
    let result = json!({ "tolerance": p.tolerance, "axioms": rows });
    Ok(report(Kind::Verify, sys.to_string(), cfg.seed, failures, result, vec!["axiom", "residual", "witness"], csv))
}

// NaN residuals must count as failures
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn laws(cfg: &Loaded) -> Result<Report> {
    let p: LawsParams = cfg.params()?;
    let sys = cfg.system()?;
    let opts = LawOptions {
        samples: p.samples,
        seed: cfg.seed.unwrap_or(0),
        support: p.support,
        radius: p.radius,
        exhaustive_order: p.exhaustive_order,
        exhaustive_support: p.exhaustive_support,
    };
    let rows = check_laws(&sys, &opts)?;
    let failures = rows
        .iter()
        .filter(|r| !(r.residual < p.tolerance))
        .map(|r| Failure {
            identity: r.law.clone(),
            residual: r.residual,
            witness: r.witness.clone().unwrap_or_default(),
        })
        .collect();
    let csv = rows
        .iter()
        .map(|r| {
            vec![
                r.law.clone(),
                num(r.residual),
                r.checks.to_string(),
                r.witness.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let result = json!({ "tolerance": p.tolerance, "laws": rows });
    Ok(report(Kind::Laws, sys.to_string(), cfg.seed, failures, result, vec!["law", "residual", "checks", "witness"], csv))
}

fn spectrum(cfg: &Loaded) -> Result<Report> {
    let p: SpectrumParams = cfg.params()?;
    let sys = cfg.system()?;
    let norm = cfg.norm(sys.ctx())?;
    let f = cfg.element(&sys)?;
    let probe = spectral::symmetry_probe(&f, &norm, p.levels, p.slack)?;
    let mut failures = Vec::new();
    if !probe.positive.monotone || !probe.shifted.monotone {
        let seq = if probe.positive.monotone { &probe.shifted.rhos } else { &probe.positive.rhos };
        let j = seq.windows(2).position(|w| w[1] > w[0] + spectral::MONOTONE_TOL * w[0].max(1.0)).unwrap_or(0);
        failures.push(Failure {
            identity: "power_norm_monotonicity".into(),
            residual: seq.get(j + 1).copied().unwrap_or(0.0) - seq.get(j).copied().unwrap_or(0.0),
            witness: format!("level {} to {}", j, j + 1),
        });
    }
    let bound = probe.lambda * (1.0 + probe.slack);
    if probe.shifted_estimate > bound {
        failures.push(Failure {
            identity: "symmetry_bound".into(),
            residual: probe.shifted_estimate - bound,
            witness: format!(
                "level {}: rho(lambda e - h) = {} > lambda (1 + slack) = {}",
                probe.shifted.rhos.len().saturating_sub(1),
                probe.shifted_estimate,
                bound
            ),
        });
    }
    let regular = p.regular.unwrap_or(sys.ctx().is_finite());
    let regular_report = if regular {
        let h = f.involution().product(&f)?;
        let r = spectral::regular_spectrum(&h)?;
        if r.min_eigenvalue < -p.eigen_tolerance {
            failures.push(Failure {
                identity: "regular_positivity".into(),
                residual: -r.min_eigenvalue,
                witness: format!("min eigenvalue {} of the {}-dimensional h-matrix", r.min_eigenvalue, r.dimension),
            });
        }
        Some(r)
    } else {
        None
    };
    let csv = probe
        .rows()
        .iter()
        .map(|r| vec![r.level.to_string(), num(r.norm), num(r.rho), opt(r.shifted_rho)])
        .collect();
    let result = json!({
        "norm": norm.to_string(),
        "levels": p.levels,
        "probe": probe,
        "regular": regular_report,
        "eigen_tolerance": p.eigen_tolerance,
    });
    Ok(report(Kind::Spectrum, sys.to_string(), cfg.seed, failures, result, vec!["level", "norm", "rho", "shifted_rho"], csv))
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn wiener(cfg: &Loaded) -> Result<Report> {
    let p: WienerParams = cfg.params()?;
    let sys = cfg.system()?;
    let f = cfg.element(&sys)?;
    let opts = WienerOptions {
        radius: p.radius,
        margin: p.margin,
        stability: p.stability || p.stability_tolerance.is_some(),
    };
    let header = vec!["distance", "max_abs", "tail_sum", "stability_delta"];
    let profile = match spectral::wiener_decay(&f, &opts) {
        Ok(profile) => profile,
        Err(Error::Singular { min_singular_value }) => {
            let failures = vec![Failure {
                identity: "invertibility".into(),
                residual: min_singular_value,
                witness: format!("min singular value {min_singular_value:e} at or below margin {:e}", p.margin),
            }];
            let result = json!({ "radius": p.radius, "margin": p.margin, "min_singular_value": min_singular_value });
            return Ok(report(Kind::Wiener, sys.to_string(), cfg.seed, failures, result, header, Vec::new()));
        }
        Err(e) => return Err(e.into()),
    };
    let mut failures = Vec::new();
    if let Some(tol) = p.stability_tolerance {
        let within = p.stability_radius.unwrap_or(p.radius / 4);
        let worst = profile
            .rows
            .iter()
            .filter(|r| r.distance <= within)
            .filter_map(|r| r.stability_delta.map(|d| (r.distance, d)))
            .fold(None, |acc: Option<(u64, f64)>, (d, v)| match acc {
                Some((_, best)) if best >= v => acc,
                _ => Some((d, v)),
            });
        if let Some((d, v)) = worst.filter(|(_, v)| !(*v < tol)) {
            failures.push(Failure {
                identity: "inverse_stability".into(),
                residual: v,
                witness: format!("distance {d}: center row moves by {v:e} from radius {} to {}", p.radius, 2 * p.radius),
            });
        }
    }
    let csv = profile
        .rows
        .iter()
        .map(|r| vec![r.distance.to_string(), num(r.max_abs), num(r.tail_sum), opt(r.stability_delta)])
        .collect();
    let center: Vec<Value> = profile
        .center_row
        .iter()
        .map(|(x, c)| json!({ "at": x.coords(), "value": [c.re, c.im] }))
        .collect();
    let result = json!({
        "radius": profile.radius,
        "dimension": profile.dimension,
        "min_singular_value": profile.min_singular_value,
        "log_slope": profile.log_slope,
        "rows": profile.rows,
        "center_row": center,
    });
    Ok(report(Kind::Wiener, sys.to_string(), cfg.seed, failures, result, header, csv))
}

fn first_increase(seq: &[f64], tail: usize) -> Option<usize> {
    let start = seq.len().saturating_sub(tail);
    (start + 1..seq.len()).find(|&i| seq[i] > seq[i - 1] + spectral::MONOTONE_TOL * seq[i - 1].abs().max(1.0))
}

fn grs(cfg: &Loaded) -> Result<Report> {
    let p: GrsConfigParams = cfg.params()?;
    let ctx = cfg.group()?;
    let spec = cfg.config.weight.as_deref().unwrap_or("one");
    let nu = cfg.resolver.weight(&ctx, spec)?;
    let params = GrsParams {
        n_max: p.n_max,
        threshold: p.threshold,
        tail: p.tail,
    };
    let r = spectral::grs_verdict(&ctx, &nu, &params)?;
    let mut failures = Vec::new();
    if !r.condition1 {
        let witness = match first_increase(&r.ugrs, p.tail) {
            Some(i) if r.final_a < p.threshold => format!("a_{} = {} exceeds a_{} = {}", i + 1, r.ugrs[i], i, r.ugrs[i - 1]),
            _ => format!("a_{} = {} is not below {}", p.n_max, r.final_a, p.threshold),
        };
        failures.push(Failure {
            identity: "uniform_growth_condition".into(),
            residual: r.final_a - 1.0,
            witness,
        });
    }
    if !r.condition2 {
        let witness = match r.shell_ratio.iter().position(|s| !s.is_finite()) {
            Some(i) => format!("shell ratio at n = {} is not finite", i + 1),
            None => {
                let i = first_increase(&r.shell_ratio, p.tail).unwrap_or(0);
                format!("shell ratio increases at n = {}: {}", i + 1, r.shell_ratio[i])
            }
        };
        failures.push(Failure {
            identity: "shell_ratio_condition".into(),
            residual: r.shell_ratio.last().copied().unwrap_or(f64::NAN),
            witness,
        });
    }
    let csv = r
        .ugrs
        .iter()
        .zip(&r.shell_ratio)
        .enumerate()
        .map(|(i, (a, s))| vec![(i + 1).to_string(), num(*a), num(*s)])
        .collect();
    let result = json!({ "weight": spec, "params": params, "report": r });
    Ok(report(Kind::Grs, ctx.to_string(), cfg.seed, failures, result, vec!["n", "ugrs", "shell_ratio"], csv))
}
