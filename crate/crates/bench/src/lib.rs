//! Shared fixtures for the separation benchmarks.

use arcsep::netdesign::{self, GeneratorSettings, NetworkInstance};
use arcsep::{ArcSetInstance, FracPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The three four-commodity worked examples, in order.
pub fn examples() -> Vec<(ArcSetInstance, FracPoint)> {
    let inst = |b| ArcSetInstance::new(vec![11, 15, 24, 50], vec![b], 0).expect("example data is valid");
    vec![
        (inst(100), FracPoint::new(vec![0.3, 0.5, 0.9, 0.1], vec![0.38])),
        (inst(90), FracPoint::new(vec![0.4, 0.5, 0.4, 0.4], vec![0.47])),
        (inst(60), FracPoint::new(vec![0.9, 0.5, 0.7, 0.1], vec![0.7])),
    ]
}

/// Random arc sets with `commodities` demands and `facilities` module sizes, each paired
/// with a relaxation point that carries just enough capacity on one facility.
pub fn relaxation_cases(seed: u64, count: usize, commodities: usize, facilities: usize) -> Vec<(ArcSetInstance, FracPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a: Vec<i64> = (0..commodities).map(|_| rng.gen_range(10..=190)).collect();
        let mut b: Vec<i64> = (0..facilities).map(|_| rng.gen_range(50..=400)).collect();
        b.sort_unstable();
        b.dedup();
        let Ok(inst) = ArcSetInstance::new(a, b, 0) else { continue };
        let x: Vec<f64> = (0..commodities).map(|_| rng.gen_range(0..=10) as f64 / 10.0).collect();
        let load: f64 = inst.demands().iter().zip(&x).map(|(&d, &v)| d as f64 * v).sum();
        let mut y = vec![0.0; inst.num_facilities()];
        let t = rng.gen_range(0..y.len());
        y[t] = load / inst.capacities()[t] as f64;
        out.push((inst, FracPoint::new(x, y)));
    }
    out
}

/// A generated network with the default size.
pub fn network(profile: &str, seed: u64) -> NetworkInstance {
    let p = netdesign::profile(profile).expect("known profile");
    netdesign::generate(seed, &p, &GeneratorSettings::default()).expect("generation succeeds")
}
