use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ridematch_core::harness::draws_to_full_coverage;
use ridematch_core::{
    driver_encrypt, generate_grid_network, key_manager_issue, recover_driver_vectors,
    recover_rider_vector, rider_encrypt, sp_match_all, BlockParams, DifferenceLedger, DriverId,
    EmbeddingTable, RecoveryMode, RideContext, RneVector, ServiceProvider,
};

fn coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage_trial");
    for l in 1..=4 {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        group.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, &l| {
            b.iter(|| draws_to_full_coverage(l, &mut rng))
        });
    }
    group.finish();
}

struct Setup {
    ctx: RideContext,
    rider: RneVector,
    drivers: Vec<RneVector>,
    keys: ridematch_core::SystemKeys,
}

fn setup(l: u32, drivers: usize) -> Setup {
    let net = generate_grid_network(10, 10, 1..=10, 3).unwrap();
    let params = BlockParams::covering(l, net.diameter()).unwrap();
    let table = EmbeddingTable::build(&net, params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let drivers = (0..drivers)
        .map(|_| {
            RneVector::new(
                (0..net.dimension())
                    .map(|_| rng.gen_range(0..=params.max_value()))
                    .collect(),
            )
        })
        .collect();
    Setup {
        ctx: RideContext::new(1, 1, params, net.dimension()),
        rider: table.get(0).unwrap().clone(),
        drivers,
        keys: key_manager_issue(4),
    }
}

fn protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("protocol");
    for l in [1, 2, 4] {
        let s = setup(l, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        group.bench_with_input(BenchmarkId::new("rider_encrypt", l), &l, |b, _| {
            b.iter(|| rider_encrypt(&s.rider, &s.keys, &s.ctx, &mut rng).unwrap())
        });
        let request = rider_encrypt(&s.rider, &s.keys, &s.ctx, &mut rng).unwrap();
        let response = driver_encrypt(DriverId(0), &s.drivers[0], &s.keys, &s.ctx, &mut rng).unwrap();
        group.bench_with_input(BenchmarkId::new("sp_match_all", l), &l, |b, _| {
            b.iter(|| sp_match_all(black_box(&request), black_box(&response)).unwrap())
        });
    }
    group.finish();
}

fn recovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("recovery");
    for (l, drivers) in [(2, 34), (4, 217)] {
        let s = setup(l, drivers);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let request = rider_encrypt(&s.rider, &s.keys, &s.ctx, &mut rng).unwrap();
        let responses: Vec<_> = s
            .drivers
            .iter()
            .enumerate()
            .map(|(k, v)| driver_encrypt(DriverId(k as u32), v, &s.keys, &s.ctx, &mut rng).unwrap())
            .collect();
        let mut sp = ServiceProvider::new();
        let transcript = sp.handle_request(&request, &responses).unwrap().clone();
        let mut ledger = DifferenceLedger::new(s.ctx.params, s.ctx.dim);
        ledger.ingest_transcript(&transcript).unwrap();
        group.bench_with_input(BenchmarkId::new("rider_and_drivers", l), &l, |b, _| {
            b.iter(|| {
                let rider = recover_rider_vector(&ledger, RecoveryMode::Interval).unwrap();
                rider.vector.map(|v| recover_driver_vectors(&ledger, &v).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, coverage, protocol, recovery);
criterion_main!(benches);
