use std::sync::Arc;

use convlab_core::crypto::{ecdh_shared, scalar_mul, CurveParams, EcKeyPair, Scalar};
use convlab_core::protocol::{Protocol, Testbed};
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn curve(c: &mut Criterion) {
    let p256 = CurveParams::p256();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = Scalar::random(&p256, &mut rng);
    let peer = EcKeyPair::generate(&p256, &mut rng);
    c.bench_function("p256 scalar_mul(G)", |b| b.iter(|| scalar_mul(black_box(&k), p256.generator(), &p256)));
    c.bench_function("p256 ecdh_shared", |b| b.iter(|| ecdh_shared(black_box(&k), &peer.public, &p256)));
}

fn exchanges(c: &mut Criterion) {
    let p256 = Arc::new(CurveParams::p256());
    for p in Protocol::ALL {
        let bed = Testbed::new(p, p256.clone(), 3);
        c.bench_function(&format!("{} honest exchange", p.name()), |b| {
            b.iter_batched(|| bed.exchange(5), |mut x| x.run().agreed(), BatchSize::SmallInput)
        });
    }
}

criterion_group!(benches, curve, exchanges);
criterion_main!(benches);
