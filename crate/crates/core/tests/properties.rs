//! Randomized invariants of groups, weights, twisted systems, the crossed
//! product and the kernel algebra. Each case draws a seed and builds its data
//! from a ChaCha stream so failures shrink to a reproducible seed.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tca_core::catalog::{all_builtins, builtin};
use tca_core::weight::check_weight_axioms;
use tca_core::{
    AdmissibleNorm, Coefficient, CoefficientModel, CrossedElement, GroupCtx, GroupElement, KernelElement,
    TwistedSystem, Weight,
};

const GROUPS: &[&str] = &["Z", "Z^2", "Z^3", "C1", "C7", "D4", "D5", "Heis3", "Heis5", "ZxC3", "C2xD3", "Z^2xHeis3"];
const TOL: f64 = 1e-12;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn group(i: usize) -> GroupCtx {
    GROUPS[i % GROUPS.len()].parse().unwrap()
}

fn system(i: usize) -> Arc<TwistedSystem> {
    let all = all_builtins();
    all[i % all.len()].clone()
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn kdist(a: &KernelElement, b: &KernelElement) -> f64 {
    a.sub(b).unwrap().norm(&AdmissibleNorm::L1)
}

fn norms(ctx: &GroupCtx) -> Vec<AdmissibleNorm> {
    vec![
        AdmissibleNorm::L1,
        AdmissibleNorm::L1Weighted(Weight::Polynomial { s: 2.0 }),
        AdmissibleNorm::L1Weighted(Weight::Exponential { c: 0.5 }),
        AdmissibleNorm::linf_weighted(ctx, Weight::Polynomial { s: 3.0 }, 4),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn group_laws(gi in 0usize..64, seed in any::<u64>()) {
        let ctx = group(gi);
        let mut r = rng(seed);
        let (x, y, z) = (ctx.sample(&mut r, 5), ctx.sample(&mut r, 5), ctx.sample(&mut r, 5));
        let e = ctx.identity();
        prop_assert_eq!(ctx.mul(&ctx.mul(&x, &y), &z), ctx.mul(&x, &ctx.mul(&y, &z)));
        prop_assert_eq!(ctx.mul(&x, &e), x.clone());
        prop_assert_eq!(ctx.mul(&e, &x), x.clone());
        prop_assert!(ctx.is_identity(&ctx.mul(&x, &ctx.inv(&x))));
        prop_assert_eq!(ctx.inv(&ctx.inv(&x)), x.clone());
        prop_assert_eq!(ctx.mul_inv(&x, &y), ctx.mul(&x, &ctx.inv(&y)));
        prop_assert_eq!(ctx.inv_mul(&x, &y), ctx.mul(&ctx.inv(&x), &y));
        prop_assert!(ctx.validate(&ctx.mul(&x, &y)).is_ok());
    }

    #[test]
    fn word_length_is_a_length_function(gi in 0usize..64, seed in any::<u64>()) {
        let ctx = group(gi);
        let mut r = rng(seed);
        let (x, y) = (ctx.sample(&mut r, 4), ctx.sample(&mut r, 4));
        prop_assert_eq!(ctx.word_length(&ctx.identity()), 0);
        prop_assert_eq!(ctx.word_length(&x), ctx.word_length(&ctx.inv(&x)));
        prop_assert!(ctx.word_length(&ctx.mul(&x, &y)) <= ctx.word_length(&x) + ctx.word_length(&y));
        let l = ctx.word_length(&x);
        prop_assert!(ctx.ball(l).contains(&x));
        if l > 0 {
            prop_assert!(!ctx.ball(l - 1).contains(&x));
        }
    }

    #[test]
    fn polynomial_and_exponential_weights_are_admissible(
        gi in 0usize..64, seed in any::<u64>(), s in 0.0f64..4.0, c in 0.0f64..2.0,
    ) {
        let ctx = group(gi);
        let mut r = rng(seed);
        let pairs: Vec<(GroupElement, GroupElement)> =
            (0..16).map(|_| (ctx.sample(&mut r, 6), ctx.sample(&mut r, 6))).collect();
        for nu in [Weight::One, Weight::Polynomial { s }, Weight::Exponential { c }] {
            for rep in check_weight_axioms(&ctx, &nu, &pairs) {
                prop_assert!(rep.max_violation <= 0.0, "{} {}: {:?}", nu, rep.axiom, rep.witness);
            }
        }
    }

    #[test]
    fn twisted_system_axioms_hold_on_builtins(si in 0usize..64, seed in any::<u64>()) {
        let sys = system(si);
        let ctx = sys.ctx();
        let mut r = rng(seed);
        let (x, y, z) = (ctx.sample(&mut r, 3), ctx.sample(&mut r, 3), ctx.sample(&mut r, 3));
        let (phi, psi) = (sys.random_coefficient(&mut r, false), sys.random_coefficient(&mut r, false));
        // α is an action by *-automorphisms
        let lhs = sys.act(&ctx.mul(&x, &y), &phi);
        prop_assert!(lhs.distance(&sys.act(&x, &sys.act(&y, &phi))) < TOL);
        prop_assert!(sys.act(&x, &phi.mul(&psi)).distance(&sys.act(&x, &phi).mul(&sys.act(&x, &psi))) < TOL);
        prop_assert!(sys.act(&x, &phi.conj()).distance(&sys.act(&x, &phi).conj()) < TOL);
        prop_assert!((sys.coef_norm(&sys.act(&x, &phi)) - sys.coef_norm(&phi)).abs() < TOL * sys.coef_norm(&phi).max(1.0));
        // ω is unitary, normalized and satisfies the twisted cocycle identity
        let w = sys.omega(&x, &y);
        prop_assert!(w.unitary_defect() < TOL);
        prop_assert!(sys.omega(&ctx.identity(), &x).distance(&Coefficient::one()) < TOL);
        prop_assert!(sys.omega(&x, &ctx.identity()).distance(&Coefficient::one()) < TOL);
        let lhs = sys.act(&x, &sys.omega(&y, &z)).mul(&sys.omega(&x, &ctx.mul(&y, &z)));
        let rhs = sys.omega(&x, &y).mul(&sys.omega(&ctx.mul(&x, &y), &z));
        prop_assert!(lhs.distance(&rhs) < TOL, "{}: cocycle at {x}, {y}, {z}", sys);
    }

    #[test]
    fn crossed_product_is_a_banach_star_algebra(si in 0usize..64, seed in any::<u64>()) {
        let sys = system(si);
        let mut r = rng(seed);
        let f = CrossedElement::random(sys.clone(), &mut r, 3, 2);
        let g = CrossedElement::random(sys.clone(), &mut r, 3, 2);
        let h = CrossedElement::random(sys.clone(), &mut r, 2, 2);
        let fg = f.product(&g).unwrap();
        let lhs = fg.product(&h).unwrap();
        let rhs = f.product(&g.product(&h).unwrap()).unwrap();
        prop_assert!(rel(lhs.l1_distance(&rhs).unwrap(), lhs.norm(&AdmissibleNorm::L1)) < TOL);
        let one = CrossedElement::unit(sys.clone());
        prop_assert!(f.product(&one).unwrap().l1_distance(&f).unwrap() < TOL);
        prop_assert!(one.product(&f).unwrap().l1_distance(&f).unwrap() < TOL);
        prop_assert!(f.involution().involution().l1_distance(&f).unwrap() < TOL);
        let anti = g.involution().product(&f.involution()).unwrap();
        prop_assert!(rel(fg.involution().l1_distance(&anti).unwrap(), fg.norm(&AdmissibleNorm::L1)) < TOL);
        // linearity of the product in the first slot
        let s = Complex64::new(0.5, -1.5);
        let lin = f.scale(s).add(&h).unwrap().product(&g).unwrap();
        let sep = fg.scale(s).add(&h.product(&g).unwrap()).unwrap();
        prop_assert!(rel(lin.l1_distance(&sep).unwrap(), lin.norm(&AdmissibleNorm::L1)) < TOL);
        for norm in norms(sys.ctx()) {
            let (nf, ng, nfg) = (f.norm(&norm), g.norm(&norm), fg.norm(&norm));
            prop_assert!(nfg <= nf * ng * (1.0 + 1e-12) + 1e-15, "{}: {} > {} * {}", norm, nfg, nf, ng);
            prop_assert!((f.involution().norm(&norm) - nf).abs() <= 1e-12 * nf.max(1.0), "{}: involution isometry", norm);
        }
    }

    #[test]
    fn kernel_algebra_laws(si in 0usize..64, seed in any::<u64>()) {
        let sys = system(si);
        let mut r = rng(seed);
        let k = KernelElement::random(sys.clone(), &mut r, 2, 2, true);
        let l = KernelElement::random(sys.clone(), &mut r, 2, 2, true);
        let m = KernelElement::random(sys.clone(), &mut r, 2, 2, false);
        let kl = k.compose(&l).unwrap();
        let lhs = kl.compose(&m).unwrap();
        let rhs = k.compose(&l.compose(&m).unwrap()).unwrap();
        prop_assert!(rel(kdist(&lhs, &rhs), lhs.norm(&AdmissibleNorm::L1)) < TOL);
        prop_assert!(kdist(&k.involve().unwrap().involve().unwrap(), &k) < TOL);
        let anti = l.involve().unwrap().compose(&k.involve().unwrap()).unwrap();
        prop_assert!(rel(kdist(&kl.involve().unwrap(), &anti), kl.norm(&AdmissibleNorm::L1)) < TOL);
        let nkl = kl.norm(&AdmissibleNorm::L1);
        prop_assert!(nkl <= k.norm(&AdmissibleNorm::L1) * l.norm(&AdmissibleNorm::L1) * (1.0 + 1e-12) + 1e-15);
        // entries agree with the diagonal storage
        let ctx = sys.ctx();
        let (x, y) = (ctx.sample(&mut r, 3), ctx.sample(&mut r, 3));
        let a = ctx.mul_inv(&x, &y);
        prop_assert!(k.entry(&x, &y).distance(&k.diagonal_value(&a, &x)) < TOL);
    }

    #[test]
    fn gamma_is_an_isometric_star_morphism(si in 0usize..64, seed in any::<u64>()) {
        let sys = system(si);
        let mut r = rng(seed);
        let f = CrossedElement::random(sys.clone(), &mut r, 3, 2);
        let g = CrossedElement::random(sys.clone(), &mut r, 3, 2);
        let gf = KernelElement::gamma(&f);
        prop_assert!(gf.covariance_exact().covariant);
        prop_assert!(gf.gamma_inverse().unwrap().l1_distance(&f).unwrap() == 0.0);
        for norm in norms(sys.ctx()) {
            prop_assert!((gf.norm(&norm) - f.norm(&norm)).abs() <= 1e-14 * f.norm(&norm).max(1.0));
        }
        let prod = KernelElement::gamma(&f.product(&g).unwrap());
        let comp = gf.compose(&KernelElement::gamma(&g)).unwrap();
        prop_assert!(rel(kdist(&prod, &comp), prod.norm(&AdmissibleNorm::L1)) < TOL);
        let inv = KernelElement::gamma(&f.involution());
        prop_assert!(kdist(&inv, &gf.involve().unwrap()) < TOL);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn upsilon_is_a_bijection_onto_scalar_kernels(which in 0usize..2, seed in any::<u64>()) {
        let sys = builtin(["z2-standard", "c4-standard"][which]).unwrap();
        prop_assert_eq!(sys.model(), CoefficientModel::Standard);
        let mut r = rng(seed);
        let f = CrossedElement::random(sys.clone(), &mut r, 3, 2);
        let g = CrossedElement::random(sys.clone(), &mut r, 2, 2);
        let (k, l) = (KernelElement::gamma(&f), KernelElement::gamma(&g));
        let (uk, ul) = (k.upsilon().unwrap(), l.upsilon().unwrap());
        prop_assert!(kdist(&KernelElement::upsilon_inverse(&uk).unwrap(), &k) < TOL);
        // Υ is multiplicative and *-preserving on covariant kernels
        let ukl = k.compose(&l).unwrap().upsilon().unwrap();
        prop_assert!(rel(ukl.max_difference(&uk.compose(&ul).unwrap()), ukl.norm(&AdmissibleNorm::L1)) < TOL);
        prop_assert!(k.involve().unwrap().upsilon().unwrap().max_difference(&uk.involve()) < TOL);
        // and isometric for every admissible norm
        for norm in norms(sys.ctx()) {
            prop_assert!((uk.norm(&norm) - k.norm(&norm)).abs() <= 1e-12 * k.norm(&norm).max(1.0), "{}", norm);
        }
    }
}
