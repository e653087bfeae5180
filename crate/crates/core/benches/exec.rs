use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kochenlab_core::brauer::{norm_one_elements, QuaternionAlgebra};
use kochenlab_core::dioph::eval_over_fq;
use kochenlab_core::exec::Exec;
use kochenlab_core::verify::{kochen_table, random_family};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn valuation_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("kochen_table");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| kochen_table(&[3, 5, 7], &[(1, 1), (2, 1)], black_box(500), 1, exec).unwrap())
        });
    }
    g.finish();
}

fn finite_field_points(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = random_family(&mut rng, 2);
    let mut g = c.benchmark_group("eval_over_fq");
    for q in [13u64, 25] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, q), &q, |b, &q| {
                b.iter(|| eval_over_fq(&d, q, u64::MAX, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn quaternion_shell(c: &mut Criterion) {
    let alg = QuaternionAlgebra::from_ints(-1, -1).unwrap();
    let mut g = c.benchmark_group("norm_one_elements");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| norm_one_elements(&alg, black_box(3), exec)));
    }
    g.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5));
    targets = valuation_table, finite_field_points, quaternion_shell
);
criterion_main!(benches);
