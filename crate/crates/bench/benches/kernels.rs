use criterion::{criterion_group, criterion_main, Criterion};
use oliver_core::action::OffenderOptions;
use oliver_core::characteristic::{compute_je, compute_xk};
use oliver_core::corpus::{unitriangular, wreath_cp_cp};
use oliver_core::group::DEFAULT_CAP;
use oliver_core::linalg::{matrix_exp, matrix_log};
use oliver_bench::module;

fn closure(c: &mut Criterion) {
    c.bench_function("close UT(4,5)", |b| b.iter(|| unitriangular(4, 5, DEFAULT_CAP).unwrap()));
    c.bench_function("close C5 wr C5", |b| b.iter(|| wreath_cp_cp(5, DEFAULT_CAP).unwrap()));
}

fn oliver(c: &mut Criterion) {
    let w = wreath_cp_cp(3, DEFAULT_CAP).unwrap();
    let s = w.group.whole();
    c.bench_function("X_3 of C3 wr C3", |b| b.iter(|| compute_xk(&s, 3).unwrap()));
    c.bench_function("J_e of C3 wr C3", |b| b.iter(|| compute_je(&s, DEFAULT_CAP).unwrap()));
    let ut = unitriangular(4, 5, DEFAULT_CAP).unwrap().whole();
    c.bench_function("X_5 of UT(4,5)", |b| b.iter(|| compute_xk(&ut, 5).unwrap()));
}

fn offenders(c: &mut Criterion) {
    let mut g = c.benchmark_group("offenders");
    g.sample_size(10);
    for name in ["ut3-5-natural", "jordan5-5", "ut4-5-natural"] {
        let ctx = module(name);
        g.bench_function(name, |b| b.iter(|| ctx.find_offenders(&OffenderOptions::default()).unwrap()));
    }
    g.finish();
}

fn lazard(c: &mut Criterion) {
    let g = unitriangular(4, 5, DEFAULT_CAP).unwrap();
    c.bench_function("log/exp over UT(4,5)", |b| {
        b.iter(|| {
            for x in g.elements() {
                matrix_exp(&matrix_log(x).unwrap()).unwrap();
            }
        })
    });
}

criterion_group!(benches, closure, oliver, offenders, lazard);
criterion_main!(benches);
