use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use mphi_bench::seeded_operator;
use mphi_core::algebra::{default_signature, AlgebraElement};
use mphi_core::constructions::sum18_rows;
use mphi_core::linalg::{C64, Tolerances};
use mphi_core::module::{dixmier_angle, span_submodule, ModuleVector};
use mphi_core::spectra::{radii_exact, riesz_analyze, ShiftPolynomial};
use mphi_core::symbolic::catalog;

fn bench_classify_catalog(c: &mut Criterion) {
    let sig = default_signature();
    let tol = Tolerances::default();
    let members: Vec<_> = ["ex1", "ex2", "L", "S", "ex8", "ex15"]
        .iter()
        .map(|n| catalog(n, &sig).unwrap())
        .collect();
    c.bench_function("classify_catalog_members", |b| {
        b.iter(|| {
            for m in &members {
                std::hint::black_box(m.classify(&tol));
            }
        })
    });
}

fn bench_windowed_index(c: &mut Criterion) {
    let sig = default_signature();
    let tol = Tolerances::default();
    let l = catalog("L", &sig).unwrap();
    c.bench_function("windowed_index_n32", |b| {
        b.iter(|| {
            let w = l.windowed_truncate(32).unwrap();
            std::hint::black_box(w.index(&tol).unwrap());
        })
    });
}

fn bench_decomposition(c: &mut Criterion) {
    let sig = default_signature();
    let tol = Tolerances::default();
    c.bench_function("mphi_decomposition_4x4", |b| {
        b.iter_batched(
            || seeded_operator(&sig, 4, 4, 7),
            |f| std::hint::black_box(f.mphi_decomposition(&tol).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

fn bench_dixmier(c: &mut Criterion) {
    let sig = default_signature();
    let f = seeded_operator(&sig, 3, 3, 11);
    let g = seeded_operator(&sig, 3, 3, 13);
    let tol = Tolerances::default();
    let m = f.image(&tol).unwrap();
    let n = g.kernel(&tol).unwrap();
    c.bench_function("dixmier_angle_3", |b| {
        b.iter(|| std::hint::black_box(dixmier_angle(&m, &n)))
    });
    c.bench_function("sum18_family_rows", |b| {
        b.iter(|| std::hint::black_box(sum18_rows(&[4, 8, 16], &tol).unwrap()))
    });
}

fn bench_radii(c: &mut Criterion) {
    let sig = default_signature();
    let p = ShiftPolynomial::shift(&sig);
    c.bench_function("radii_exact_shift", |b| {
        b.iter(|| std::hint::black_box(radii_exact(&p)))
    });
}

fn bench_riesz(c: &mut Criterion) {
    let sig = default_signature();
    let tol = Tolerances::default();
    let two = AlgebraElement::identity(&sig).scale(C64::new(2.0, 0.0));
    let f = mphi_core::dense::DenseOperator::diagonal(
        &sig,
        &[two.clone(), two, AlgebraElement::zero(&sig)],
    );
    let alpha = AlgebraElement::zero(&sig);
    c.bench_function("riesz_analyze_3", |b| {
        b.iter(|| std::hint::black_box(riesz_analyze(&f, &alpha, 1.0, &tol).unwrap()))
    });
}

fn bench_span(c: &mut Criterion) {
    let sig = default_signature();
    let gens: Vec<ModuleVector> = (0..3)
        .map(|k| {
            let op = seeded_operator(&sig, 1, 4, 17 + k);
            let e = ModuleVector::standard_basis(&sig, 1, 0);
            op.apply(&e).unwrap()
        })
        .collect();
    c.bench_function("span_submodule_l4", |b| {
        b.iter(|| std::hint::black_box(span_submodule(&sig, 4, &gens).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_classify_catalog,
    bench_windowed_index,
    bench_decomposition,
    bench_dixmier,
    bench_radii,
    bench_riesz,
    bench_span
);
criterion_main!(benches);
