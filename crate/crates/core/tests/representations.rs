use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tca_core::catalog::builtin;
use tca_core::linalg::{self, CMatrix};
use tca_core::rep::{
    self, induced_pair, int_kernel, int_scalar, integrated, intertwiner, intertwining_residual, operator_convolve,
    operator_function_distance, operator_involve, regular_rep, theta_embedding, CoefficientRep, Window,
};
use tca_core::{AdmissibleNorm, Coefficient, CrossedElement, GroupElement, KernelElement, SigmaPoint, TwistedSystem};

const FINITE: &[&str] = &["c6-coboundary", "d3-coboundary", "heis3-bicharacter", "c2xc4-bicharacter", "c4-sigma2", "c4-standard"];
const TOL: f64 = 1e-12;

fn reps(sys: &TwistedSystem) -> Vec<CoefficientRep> {
    let mut out = vec![CoefficientRep::Point(sys.base_point()), CoefficientRep::Regular];
    if sys.sigma_points().is_some() && !matches!(sys.model(), tca_core::CoefficientModel::Standard) {
        out.push(CoefficientRep::Multiplication);
    }
    out
}

#[test]
fn finite_groups_full_window_star_representation() {
    for name in FINITE {
        let sys = builtin(name).unwrap();
        let w = Arc::new(Window::full(sys.ctx()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rep in reps(&sys) {
            for _ in 0..5 {
                let f = CrossedElement::random(sys.clone(), &mut rng, 3, 1);
                let g = CrossedElement::random(sys.clone(), &mut rng, 3, 1);
                let a = integrated(&sys, &rep, &f, &w).unwrap();
                let b = integrated(&sys, &rep, &g, &w).unwrap();
                let ab = integrated(&sys, &rep, &f.product(&g).unwrap(), &w).unwrap();
                assert!(ab.max_difference(&a.mul(&b)) < TOL, "{name} {rep:?}: product");
                let fs = integrated(&sys, &rep, &f.involution(), &w).unwrap();
                assert!(fs.max_difference(&a.adjoint()) < TOL, "{name} {rep:?}: adjoint");
                assert!(a.operator_norm() <= f.norm(&AdmissibleNorm::L1) + 1e-9);

                let k = KernelElement::random(sys.clone(), &mut rng, 3, 1, true);
                let l = KernelElement::random(sys.clone(), &mut rng, 3, 1, true);
                let ik = int_kernel(&sys, &rep, &k, &w).unwrap();
                let il = int_kernel(&sys, &rep, &l, &w).unwrap();
                let ikl = int_kernel(&sys, &rep, &k.compose(&l).unwrap(), &w).unwrap();
                assert!(ikl.max_difference(&ik.mul(&il)) < TOL, "{name} {rep:?}: kernel product");
                let iks = int_kernel(&sys, &rep, &k.involve().unwrap(), &w).unwrap();
                assert!(iks.max_difference(&ik.adjoint()) < TOL, "{name} {rep:?}: kernel adjoint");
                assert!(ik.operator_norm() <= k.norm(&AdmissibleNorm::L1) + 1e-9, "{name}: contractivity");

                let gamma = int_kernel(&sys, &rep, &KernelElement::gamma(&f), &w).unwrap();
                assert!(gamma.max_difference(&a) < 1e-14, "{name}: Int of Gamma");
            }
        }
    }
}

#[test]
fn covariance_relations_on_finite_groups() {
    for name in FINITE {
        let sys = builtin(name).unwrap();
        let w = Arc::new(Window::full(sys.ctx()).unwrap());
        let pair = induced_pair(&sys, &CoefficientRep::Regular, w.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let elements = sys.ctx().elements().unwrap().to_vec();
        for x in &elements {
            let phi = sys.random_coefficient(&mut rng, false);
            let u = pair.shift(x);
            let lhs = u.mul(&pair.r(&phi)).mul(&u.adjoint());
            let rhs = pair.r(&sys.act(x, &phi));
            assert!(lhs.max_difference(&rhs) < TOL, "{name}: covariance at {x}");
            // unitarity of the twisted shifts
            let id = u.mul(&u.adjoint());
            for b in &id.blocks {
                assert!(linalg::max_difference(b, &rep::identity(w.len())) < TOL);
            }
            for y in &elements {
                let lhs = pair.shift(x).mul(&pair.shift(y));
                let rhs = pair.r(&sys.omega(x, y)).mul(&pair.shift(&sys.ctx().mul(x, y)));
                assert!(lhs.max_difference(&rhs) < TOL, "{name}: twisted shift relation");
            }
        }
    }
}

#[test]
fn lattice_windows_hold_on_interior() {
    for name in ["torus", "z2-sigma3", "z2-standard"] {
        let sys = builtin(name).unwrap();
        let w = Arc::new(Window::ball(sys.ctx(), 12));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rep = CoefficientRep::Point(sys.base_point());
        let f = CrossedElement::random(sys.clone(), &mut rng, 4, 2);
        let g = CrossedElement::random(sys.clone(), &mut rng, 4, 2);
        let reach = f.reach() + g.reach();
        let interior = w.interior(sys.ctx(), reach);
        assert!(!interior.is_empty());
        let a = integrated(&sys, &rep, &f, &w).unwrap();
        let b = integrated(&sys, &rep, &g, &w).unwrap();
        let ab = integrated(&sys, &rep, &f.product(&g).unwrap(), &w).unwrap();
        assert!(ab.max_difference_on(&a.mul(&b), &interior, &interior) < TOL, "{name}: product on interior");
        let fs = integrated(&sys, &rep, &f.involution(), &w).unwrap();
        assert!(fs.max_difference(&a.adjoint()) < TOL, "{name}: adjoint");
        let gamma = int_kernel(&sys, &rep, &KernelElement::gamma(&f), &w).unwrap();
        assert!(gamma.max_difference(&a) < 1e-14, "{name}: Int of Gamma");

        let k = KernelElement::random(sys.clone(), &mut rng, 3, 2, true);
        let l = KernelElement::random(sys.clone(), &mut rng, 3, 2, true);
        let interior = w.interior(sys.ctx(), k.reach() + l.reach());
        let ik = int_kernel(&sys, &rep, &k, &w).unwrap();
        let il = int_kernel(&sys, &rep, &l, &w).unwrap();
        let ikl = int_kernel(&sys, &rep, &k.compose(&l).unwrap(), &w).unwrap();
        assert!(ikl.max_difference_on(&ik.mul(&il), &interior, &interior) < TOL, "{name}: kernel product on interior");
        let iks = int_kernel(&sys, &rep, &k.involve().unwrap(), &w).unwrap();
        assert!(iks.max_difference(&ik.adjoint()) < TOL, "{name}: kernel adjoint");
    }
}

#[test]
fn torus_point_mass_phase_is_i() {
    let sys = builtin("torus").unwrap();
    let w = Arc::new(Window::ball(sys.ctx(), 3));
    let a = GroupElement::from([1, 0]);
    let b = GroupElement::from([0, 1]);
    let f = CrossedElement::delta(sys.clone(), a.clone(), Coefficient::one()).unwrap();
    let m = integrated(&sys, &CoefficientRep::Point(SigmaPoint::Unit), &f, &w).unwrap();
    let mut v = CMatrix::zeros(w.len(), 1);
    v[(w.position(&b).unwrap(), 0)] = Complex64::new(1.0, 0.0);
    let out = &m.blocks[0] * v;
    let ab = w.position(&GroupElement::from([1, 1])).unwrap();
    // exp(-2πi bᵀΘa) with bᵀΘa = -1/4
    assert!((out[(ab, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);
}

#[test]
fn regular_blocks_are_point_representations_and_equivalent() {
    for name in ["c4-standard", "c4-sigma2", "z2-standard"] {
        let sys = builtin(name).unwrap();
        let finite = sys.ctx().is_finite();
        let w = Arc::new(if finite { Window::full(sys.ctx()).unwrap() } else { Window::ball(sys.ctx(), 6) });
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = CrossedElement::random(sys.clone(), &mut rng, 3, 1);
        let reg = regular_rep(&sys, &f, &w).unwrap();
        let base = integrated(&sys, &CoefficientRep::Point(sys.base_point()), &f, &w).unwrap();
        assert_eq!(reg.block(&sys.base_point()).unwrap(), &base.blocks[0]);
        let s0 = sys.base_point();
        for z in sys.ctx().ball(2) {
            let r = intertwiner(&sys, &z, &s0, &w);
            let s1 = sys.sigma_act(&z, &s0);
            let a0 = &integrated(&sys, &CoefficientRep::Point(s0.clone()), &f, &w).unwrap().blocks[0];
            let a1 = &integrated(&sys, &CoefficientRep::Point(s1), &f, &w).unwrap().blocks[0];
            let rows = w.interior(sys.ctx(), f.reach() + sys.ctx().word_length(&z));
            let res = intertwining_residual(&r.matrix, a0, a1, &rows, &rows);
            assert!(res < TOL, "{name}: intertwining at z={z}: {res}");
            if finite {
                let rr = &r.matrix * r.matrix.adjoint();
                assert!(linalg::max_difference(&rr, &rep::identity(w.len())) < TOL);
            }
        }
    }
}

#[test]
fn int_scalar_of_upsilon_gamma_is_integrated_at_identity() {
    for name in ["z2-standard", "c4-standard"] {
        let sys = builtin(name).unwrap();
        let w = Arc::new(Window::ball(sys.ctx(), 5));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = CrossedElement::random(sys.clone(), &mut rng, 4, 2);
        let u = KernelElement::gamma(&f).upsilon().unwrap();
        let lam = int_scalar(&u, &w);
        let ind = integrated(&sys, &CoefficientRep::Point(sys.base_point()), &f, &w).unwrap();
        assert!(linalg::max_difference(&lam.matrix, &ind.blocks[0]) < 1e-14, "{name}");

        let g = CrossedElement::random(sys.clone(), &mut rng, 4, 2);
        let v = KernelElement::gamma(&g).upsilon().unwrap();
        let rows = w.interior(sys.ctx(), f.reach() + g.reach());
        let prod = int_scalar(&u.compose(&v).unwrap(), &w);
        let lv = int_scalar(&v, &w);
        assert!(prod.max_difference_on(&lam.mul(&lv), &rows, &rows) < TOL, "{name}: scalar kernel product");
        let adj = int_scalar(&u.involve(), &w);
        assert!(linalg::max_difference(&adj.matrix, &lam.matrix.adjoint()) < TOL, "{name}: scalar adjoint");
    }
}

#[test]
fn theta_embedding_is_an_isometric_star_morphism() {
    for name in ["c4-sigma2", "d3-coboundary", "c6-coboundary"] {
        let sys = builtin(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rep = if matches!(sys.model(), tca_core::CoefficientModel::Spectrum(_)) {
            CoefficientRep::Multiplication
        } else {
            CoefficientRep::Point(SigmaPoint::Unit)
        };
        let f = CrossedElement::random(sys.clone(), &mut rng, 3, 1);
        let g = CrossedElement::random(sys.clone(), &mut rng, 3, 1);
        let tf = theta_embedding(&sys, &rep, &f).unwrap();
        let tg = theta_embedding(&sys, &rep, &g).unwrap();
        let tfg = theta_embedding(&sys, &rep, &f.product(&g).unwrap()).unwrap();
        assert!(operator_function_distance(&tfg, &operator_convolve(sys.ctx(), &tf, &tg)) < TOL, "{name}");
        let tfs = theta_embedding(&sys, &rep, &f.involution()).unwrap();
        assert!(operator_function_distance(&tfs, &operator_involve(sys.ctx(), &tf)) < TOL, "{name}");
        for (x, op) in &tf {
            assert!((op.operator_norm() - sys.coef_norm(&f.get(x))).abs() < 1e-12, "{name}: norm at {x}");
        }
        let unit = theta_embedding(&sys, &rep, &CrossedElement::unit(sys.clone())).unwrap();
        let e = sys.ctx().identity();
        for b in &unit[&e].blocks {
            assert!(linalg::max_difference(b, &rep::identity(b.nrows())) < TOL);
        }
    }
}

#[test]
fn positive_elements_have_nonnegative_spectrum() {
    for name in FINITE {
        let sys = builtin(name).unwrap();
        let w = Arc::new(Window::full(sys.ctx()).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = CrossedElement::random(sys.clone(), &mut rng, 4, 1);
        let h = f.involution().product(&f).unwrap();
        let m = regular_rep(&sys, &h, &w).unwrap().to_dense();
        let trace: f64 = (0..m.nrows()).map(|i| m[(i, i)].re.abs()).sum();
        assert!(linalg::hermitian_min_eigenvalue(&m) >= -1e-9 * trace.max(1.0), "{name}");
    }
}

#[test]
fn non_covariant_kernels_break_intertwining() {
    let sys = builtin("c4-standard").unwrap();
    let w = Arc::new(Window::full(sys.ctx()).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = CrossedElement::random(sys.clone(), &mut rng, 2, 1);
    let mut k = KernelElement::gamma(&f);
    let a = f.entries().keys().next().unwrap().clone();
    k.set_entry(&a, GroupElement::from([1]), Coefficient::from(3.0).conform(sys.model()).unwrap());
    let s0 = sys.base_point();
    let z = GroupElement::from([1]);
    let r = intertwiner(&sys, &z, &s0, &w);
    let a0 = &int_kernel(&sys, &CoefficientRep::Point(s0.clone()), &k, &w).unwrap().blocks[0];
    let a1 = &int_kernel(&sys, &CoefficientRep::Point(sys.sigma_act(&z, &s0)), &k, &w).unwrap().blocks[0];
    let all: Vec<usize> = (0..w.len()).collect();
    assert!(intertwining_residual(&r.matrix, a0, a1, &all, &all) > 1e-3);
}
