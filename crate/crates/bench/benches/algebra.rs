use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tca_core::catalog::builtin;
use tca_core::spectral::{self, WienerOptions};
use tca_core::{AdmissibleNorm, Coefficient, CrossedElement, KernelElement};

fn crossed_product(c: &mut Criterion) {
    let mut group = c.benchmark_group("crossed_product");
    for name in ["torus", "z2-sigma3", "z2-standard", "heis3-bicharacter"] {
        let sys = builtin(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for support in [8usize, 32] {
            let f = CrossedElement::random(sys.clone(), &mut rng, support, 4);
            let g = CrossedElement::random(sys.clone(), &mut rng, support, 4);
            group.bench_with_input(BenchmarkId::new(name, support), &(f, g), |b, (f, g)| {
                b.iter(|| black_box(f.product(g).unwrap()))
            });
        }
    }
    group.finish();
}

fn kernel_compose(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_compose");
    for name in ["torus", "z2-sigma3", "c4-standard"] {
        let sys = builtin(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for count in [4usize, 12] {
            let k = KernelElement::random(sys.clone(), &mut rng, count, 3, true);
            let l = KernelElement::random(sys.clone(), &mut rng, count, 3, true);
            group.bench_with_input(BenchmarkId::new(name, count), &(k, l), |b, (k, l)| {
                b.iter(|| black_box(k.compose(l).unwrap()))
            });
        }
    }
    group.finish();
}

fn spectral_power(c: &mut Criterion) {
    let sys = builtin("torus").unwrap();
    let ctx = sys.ctx();
    let f = CrossedElement::from_entries(
        sys.clone(),
        [
            (ctx.element(&[1, 0]).unwrap(), Coefficient::one()),
            (ctx.element(&[0, 1]).unwrap(), Coefficient::one()),
        ],
    )
    .unwrap();
    c.bench_function("symmetry_probe/torus/levels6", |b| {
        b.iter(|| black_box(spectral::symmetry_probe(&f, &AdmissibleNorm::L1, 6, 0.15).unwrap()))
    });
}

fn wiener_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("wiener_center_row");
    group.sample_size(10);
    let sys = builtin("torus").unwrap();
    let ctx = sys.ctx();
    let f = CrossedElement::from_entries(
        sys.clone(),
        [
            (ctx.identity(), Coefficient::scalar(4.0, 0.0)),
            (ctx.element(&[1, 0]).unwrap(), Coefficient::one()),
            (ctx.element(&[0, 1]).unwrap(), Coefficient::one()),
        ],
    )
    .unwrap();
    for radius in [8u64, 16, 24] {
        let opts = WienerOptions { radius, margin: 1e-8, stability: false };
        group.bench_with_input(BenchmarkId::from_parameter(radius), &opts, |b, opts| {
            b.iter(|| black_box(spectral::wiener_decay(&f, opts).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, crossed_product, kernel_compose, spectral_power, wiener_solve);
criterion_main!(benches);
