use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hbgbc_bench::{ed_scenario, q_inv_inputs, sato_sweep, ED_BUDGETS};
use hbgbc_core::early::user1_log_m;
use hbgbc_core::shell::fill_composite_shell;
use hbgbc_core::{ed_best_allocation, q_inv, sato_het, AllocationSearch, EffectiveGains, Order, Probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bench_q_inv(c: &mut Criterion) {
    let ps = q_inv_inputs();
    c.bench_function("q_inv/64 probabilities", |b| {
        b.iter(|| ps.iter().map(|&p| q_inv(black_box(p))).sum::<f64>())
    });
}

fn bench_sato_sweep(c: &mut Criterion) {
    let sweep = sato_sweep();
    c.bench_function("sato_het/n1 sweep", |b| {
        b.iter(|| {
            sweep
                .iter()
                .map(|s| sato_het(black_box(s), Order::WithHalfLogN).unwrap().sum_bits_max)
                .sum::<f64>()
        })
    });
}

fn bench_allocation(c: &mut Criterion) {
    let s = ed_scenario(2048);
    let search = AllocationSearch::default();
    let gains = EffectiveGains::for_scenario(&s, &search.ed).unwrap();
    let log_m1 = user1_log_m(&s, &gains, Probability::new(ED_BUDGETS.eps1).unwrap()).unwrap();
    c.bench_function("ed_best_allocation/256 grid", |b| {
        b.iter(|| ed_best_allocation(black_box(&s), ED_BUDGETS, log_m1, &search).unwrap())
    });
}

fn bench_shell(c: &mut Criterion) {
    let mut group = c.benchmark_group("composite shell");
    for n1 in [128usize, 1024] {
        group.bench_function(format!("n1={n1}"), |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            b.iter_batched_ref(
                || vec![0.0; n1],
                |buf| fill_composite_shell(buf, n1 * 9 / 10, 8.0, &mut rng),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_q_inv, bench_sato_sweep, bench_allocation, bench_shell);
criterion_main!(benches);
