use arcsep::netdesign::{root_cut_loop, RootLoopSettings};
use arcsep::{separate, LiftOrder, SeparatorOptions};
use arcsep_bench::{examples, network, relaxation_cases};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn worked_examples(c: &mut Criterion) {
    let mut group = c.benchmark_group("examples");
    let opts = SeparatorOptions::default();
    for (k, (inst, point)) in examples().iter().enumerate() {
        group.bench_with_input(BenchmarkId::from_parameter(k + 1), &(inst, point), |b, (inst, point)| {
            b.iter(|| separate(inst, point, &opts).unwrap())
        });
    }
    group.finish();
}

fn closed_forms_vs_rowgen(c: &mut Criterion) {
    let cases = relaxation_cases(7, 40, 6, 2);
    let mut group = c.benchmark_group("closed_forms");
    for on in [true, false] {
        let opts = SeparatorOptions { use_closed_forms: on, ..Default::default() };
        let name = if on { "enabled" } else { "rowgen_only" };
        group.bench_function(name, |b| {
            b.iter(|| {
                for (inst, point) in &cases {
                    black_box(separate(inst, point, &opts).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn by_size(c: &mut Criterion) {
    let mut group = c.benchmark_group("commodities");
    group.sample_size(20);
    let opts = SeparatorOptions::default();
    for q in [4, 8, 16, 32] {
        let cases = relaxation_cases(11, 10, q, 3);
        group.bench_with_input(BenchmarkId::from_parameter(q), &cases, |b, cases| {
            b.iter(|| {
                for (inst, point) in cases {
                    black_box(separate(inst, point, &opts).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn lift_orders(c: &mut Criterion) {
    let cases = relaxation_cases(13, 20, 10, 3);
    let mut group = c.benchmark_group("lift_order");
    for (name, order) in [("lift1", LiftOrder::Lift1), ("lift2", LiftOrder::Lift2), ("lift3", LiftOrder::Lift3), ("lift4", LiftOrder::Lift4)] {
        let opts = SeparatorOptions { lift_order: order, ..Default::default() };
        group.bench_function(name, |b| {
            b.iter(|| {
                for (inst, point) in &cases {
                    black_box(separate(inst, point, &opts).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn root_loop(c: &mut Criterion) {
    let mut group = c.benchmark_group("root_loop");
    group.sample_size(10);
    let settings = RootLoopSettings::default();
    for profile in ["3_1_1", "1_3_3"] {
        let net = network(profile, 42);
        group.bench_with_input(BenchmarkId::from_parameter(profile), &net, |b, net| {
            b.iter(|| root_cut_loop(net, &settings).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, worked_examples, closed_forms_vs_rowgen, by_size, lift_orders, root_loop);
criterion_main!(benches);
