//! Built-in twisted systems and the catalog of spec grammars.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficient::{Coefficient, CoefficientModel};
use crate::error::{Error, Result};
use crate::group::{GroupCtx, GroupElement};
use crate::system::{unit_phase, Action, Cocycle, PointAction, TwistedSystem};

/// Quarter-turn Θ of the standard noncommutative torus.
pub fn torus_theta() -> Vec<Vec<f64>> {
    vec![vec![0.0, 0.25], vec![-0.25, 0.0]]
}

fn g(c: &[i64]) -> GroupElement {
    GroupElement::from(c)
}

fn spectrum(phases: &[f64]) -> Coefficient {
    Coefficient::Spectrum(phases.iter().map(|t| unit_phase(*t)).collect())
}

/// A unitary standard-model function: background phase `bg`, and phase
/// `v` at each listed point.
fn standard_phase(bg: f64, points: &[(&[i64], f64)]) -> Coefficient {
    let b = unit_phase(bg);
    let correction: BTreeMap<GroupElement, Complex64> =
        points.iter().map(|(x, t)| (g(x), unit_phase(*t) - b)).collect();
    Coefficient::standard(b, correction)
}

fn coboundary(base: Cocycle, b: Vec<(GroupElement, Coefficient)>) -> Cocycle {
    Cocycle::Coboundary {
        base: Box::new(base),
        b: Arc::new(b.into_iter().collect()),
    }
}

/// Names and one-line descriptions of the built-in systems.
pub const SYSTEMS: &[(&str, &str)] = &[
    ("torus", "Z^2, scalar, trivial action, theta cocycle [[0,0.25],[-0.25,0]]"),
    ("torus3", "Z^3, scalar, trivial action, theta cocycle with quarter entries"),
    ("trivial-z", "Z, scalar, trivial action, trivial cocycle"),
    ("c6-coboundary", "C6, scalar, trivial action, coboundary of a phase function"),
    ("d3-coboundary", "D3, scalar, trivial action, coboundary of a phase function"),
    ("heis3-bicharacter", "Heis3, scalar, trivial action, bicharacter cocycle"),
    ("c2xc4-bicharacter", "C2xC4, scalar, trivial action, bicharacter cocycle"),
    ("c4-sigma2", "C4 on a 2-point spectrum (generator swaps), sigma-dependent coboundary cocycle"),
    ("z2-sigma3", "Z^2 on a 3-point spectrum ((1,0) cycles), theta times a sigma-dependent coboundary"),
    ("z2-standard", "Z^2, standard model, translation action, theta times a standard coboundary"),
    ("c4-standard", "C4, standard model, translation action, standard coboundary"),
];

/// Build a built-in system by name.
pub fn builtin(name: &str) -> Result<Arc<TwistedSystem>> {
    let theta = || Cocycle::theta(torus_theta());
    let sys = match name {
        "torus" => TwistedSystem::new(GroupCtx::lattice(2), CoefficientModel::Scalar, Action::Trivial, theta()?)?,
        "torus3" => TwistedSystem::new(
            GroupCtx::lattice(3),
            CoefficientModel::Scalar,
            Action::Trivial,
            Cocycle::theta(vec![
                vec![0.0, 0.25, 0.5],
                vec![-0.25, 0.0, 0.75],
                vec![-0.5, -0.75, 0.0],
            ])?,
        )?,
        "trivial-z" => TwistedSystem::new(GroupCtx::lattice(1), CoefficientModel::Scalar, Action::Trivial, Cocycle::Trivial)?,
        "c6-coboundary" => {
            let ctx = GroupCtx::cyclic(6);
            let b = (1..6)
                .map(|k| (g(&[k]), Coefficient::Scalar(unit_phase((k * k) as f64 / 12.0))))
                .collect();
            TwistedSystem::new(ctx, CoefficientModel::Scalar, Action::Trivial, coboundary(Cocycle::Trivial, b))?
        }
        "d3-coboundary" => {
            let ctx = GroupCtx::dihedral(3);
            let b = ctx
                .elements()
                .expect("finite")
                .iter()
                .filter(|x| !ctx.is_identity(x))
                .enumerate()
                .map(|(i, x)| (x.clone(), Coefficient::Scalar(unit_phase((i + 1) as f64 / 7.0))))
                .collect();
            TwistedSystem::new(ctx, CoefficientModel::Scalar, Action::Trivial, coboundary(Cocycle::Trivial, b))?
        }
        "heis3-bicharacter" => {
            let ctx = GroupCtx::heisenberg(3);
            let c = Cocycle::bicharacter(&ctx)?;
            TwistedSystem::new(ctx, CoefficientModel::Scalar, Action::Trivial, c)?
        }
        "c2xc4-bicharacter" => {
            let ctx: GroupCtx = "C2xC4".parse()?;
            let c = Cocycle::bicharacter(&ctx)?;
            TwistedSystem::new(ctx, CoefficientModel::Scalar, Action::Trivial, c)?
        }
        "c4-sigma2" => {
            let ctx = GroupCtx::cyclic(4);
            let action = PointAction::from_generators(&ctx, 2, &[(g(&[1]), vec![1, 0])])?;
            let b = vec![
                (g(&[1]), spectrum(&[0.25, 0.0])),
                (g(&[2]), spectrum(&[0.125, 0.5])),
                (g(&[3]), spectrum(&[0.0, 0.75])),
            ];
            TwistedSystem::new(
                ctx,
                CoefficientModel::Spectrum(2),
                Action::Point(Arc::new(action)),
                coboundary(Cocycle::Trivial, b),
            )?
        }
        "z2-sigma3" => {
            let ctx = GroupCtx::lattice(2);
            let action = PointAction::from_generators(
                &ctx,
                3,
                &[(g(&[1, 0]), vec![1, 2, 0]), (g(&[0, 1]), vec![0, 1, 2])],
            )?;
            let b = vec![
                (g(&[1, 0]), spectrum(&[0.25, 0.5, 0.0])),
                (g(&[0, 1]), spectrum(&[0.0, 0.125, 0.75])),
                (g(&[1, 1]), spectrum(&[0.5, 0.0, 0.25])),
            ];
            TwistedSystem::new(
                ctx,
                CoefficientModel::Spectrum(3),
                Action::Point(Arc::new(action)),
                coboundary(theta()?, b),
            )?
        }
        "z2-standard" => {
            let ctx = GroupCtx::lattice(2);
            let b = vec![
                (g(&[1, 0]), standard_phase(0.125, &[(&[0, 0], 0.375), (&[1, 1], 0.5)])),
                (g(&[0, 1]), standard_phase(0.25, &[(&[-1, 0], 0.5)])),
            ];
            TwistedSystem::new(ctx, CoefficientModel::Standard, Action::Translation, coboundary(theta()?, b))?
        }
        "c4-standard" => {
            let ctx = GroupCtx::cyclic(4);
            let b = vec![
                (g(&[1]), standard_phase(0.25, &[(&[0], 0.5), (&[2], 0.125)])),
                (g(&[2]), standard_phase(0.0, &[(&[1], 0.75)])),
            ];
            TwistedSystem::new(ctx, CoefficientModel::Standard, Action::Translation, coboundary(Cocycle::Trivial, b))?
        }
        _ => return Err(Error::spec("system", name, "unknown built-in system")),
    };
    Ok(Arc::new(sys.named(name)))
}

/// All built-in systems in catalog order.
pub fn all_builtins() -> Vec<Arc<TwistedSystem>> {
    SYSTEMS
        .iter()
        .map(|(n, _)| builtin(n).expect("built-in systems are valid"))
        .collect()
}

/// One grammar entry of the catalog.
#[derive(Clone, Debug, Serialize)]
pub struct GrammarEntry {
    pub form: &'static str,
    pub meaning: &'static str,
}

fn entry(form: &'static str, meaning: &'static str) -> GrammarEntry {
    GrammarEntry { form, meaning }
}

/// Everything a config can name.
#[derive(Clone, Debug, Serialize)]
pub struct Catalog {
    pub groups: Vec<GrammarEntry>,
    pub models: Vec<GrammarEntry>,
    pub actions: Vec<GrammarEntry>,
    pub cocycles: Vec<GrammarEntry>,
    pub weights: Vec<GrammarEntry>,
    pub norms: Vec<GrammarEntry>,
    pub systems: Vec<GrammarEntry>,
}

pub fn catalog() -> Catalog {
    Catalog {
        groups: vec![
            entry("Z", "the integers"),
            entry("Z^n", "the lattice Z^n; supports theta cocycles"),
            entry("Cm", "cyclic group of order m"),
            entry("Dm", "dihedral group of order 2m, elements (k, s) = r^k s^s"),
            entry("Heisp", "Heisenberg group mod p, elements (a, b, c)"),
            entry("G1xG2x...", "direct product of the factors above"),
        ],
        models: vec![
            entry("scalar", "A = C"),
            entry("spectrum:N", "A = C^N, functions on N points"),
            entry("standard", "constants plus finitely supported functions on G"),
        ],
        actions: vec![
            entry("trivial", "alpha_x = id"),
            entry("translation", "[alpha_x phi](y) = phi(x^-1 y), standard model"),
            entry("regular", "G permuting itself, model spectrum:|G|"),
            entry("point:<file>", "generator permutations of N points, model spectrum:N"),
        ],
        cocycles: vec![
            entry("trivial", "omega = 1"),
            entry("theta:<matrix>", "exp(2 pi i x^T Theta y) on Z^n, Theta skew-symmetric"),
            entry("bicharacter", "zeta^(x0 y1) on Cm x Cn or Heisp"),
            entry("table:<file>", "explicit values, 1 where unlisted"),
            entry("coboundary:<file>", "base cocycle times the coboundary of a unitary b"),
        ],
        weights: vec![
            entry("one", "nu = 1"),
            entry("poly:s=<s>", "(1 + |x|)^s"),
            entry("exp:c=<c>", "exp(c |x|)"),
            entry("table:<file>", "explicit values on a finite group"),
        ],
        norms: vec![
            entry("l1", "sum |f(x)|"),
            entry("l1w:<weight>", "sum nu(x) |f(x)|"),
            entry("linfw:<weight>@<R>", "C max nu(x) |f(x)|, C estimated on ball(R)"),
        ],
        systems: SYSTEMS.iter().map(|(n, d)| entry(n, d)).collect(),
    }
}
