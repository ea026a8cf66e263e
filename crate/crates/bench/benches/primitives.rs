use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use uss_core::hashing::{GaloisField, HashKey};
use uss_core::keystore::{KeyNetwork, NetworkConfig};
use uss_core::protocol::{distribute, verify};
use uss_core::secparams::{solve_k, ParamInputs, SLevelSpec, TailMode};
use uss_core::simlab::random_message;
use uss_core::BitString;

fn gf_mul(c: &mut Criterion) {
    let mut group = c.benchmark_group("gf_mul");
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for degree in [8u32, 64, 128, 256] {
        let field = GaloisField::new(degree);
        let x = HashKey::random(&mut rng, degree, 1).multiplier;
        let y = HashKey::random(&mut rng, degree, 1).multiplier;
        group.bench_with_input(BenchmarkId::from_parameter(degree), &degree, |b, _| {
            b.iter(|| field.mul(black_box(&x), black_box(&y)))
        });
    }
    group.finish();
}

fn sign_and_verify(c: &mut Criterion) {
    let params = ParamInputs {
        k: Some(906),
        ..ParamInputs::default()
    }
    .resolve()
    .unwrap();
    let mut net = KeyNetwork::new(&NetworkConfig::uniform(8, 1.0, 3)).unwrap();
    let (signer, recipients) = distribute(&mut net, &params).unwrap();
    let msg: BitString = random_message(3, params.msg_len_bits);
    let sig = signer.sign(&msg).unwrap();

    c.bench_function("sign n=7 k=906", |b| b.iter(|| signer.sign(black_box(&msg)).unwrap()));
    c.bench_function("verify n=7 k=906", |b| {
        b.iter(|| verify(&recipients[0], black_box(&sig), 1, &params).unwrap())
    });
    c.bench_function("distribute n=7 k=906", |b| {
        b.iter(|| {
            let mut net = KeyNetwork::new(&NetworkConfig::uniform(8, 1.0, 4)).unwrap();
            distribute(&mut net, &params).unwrap()
        })
    });
}

fn solver(c: &mut Criterion) {
    c.bench_function("solve_k 1e-10", |b| {
        b.iter(|| solve_k(black_box(1e-10), 7, 1, SLevelSpec::EXPERIMENT, TailMode::Squared).unwrap())
    });
}

criterion_group!(benches, gf_mul, sign_and_verify, solver);
criterion_main!(benches);
