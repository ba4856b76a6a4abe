#![allow(dead_code)]

use arcsep::arcset::{ArcSetInstance, FracPoint};
use arcsep::oracle::PointCatalogue;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid instance with up to `max_q` commodities and `max_t` facilities.
pub fn instance(rng: &mut ChaCha8Rng, max_q: usize, max_t: usize, max_value: i64) -> ArcSetInstance {
    loop {
        let nq = rng.gen_range(1..=max_q);
        let nt = rng.gen_range(1..=max_t);
        let a: Vec<i64> = (0..nq).map(|_| rng.gen_range(1..=max_value)).collect();
        let mut b: Vec<i64> = (0..nt).map(|_| rng.gen_range(1..=max_value)).collect();
        b.sort_unstable();
        let total: i64 = a.iter().sum();
        let c = rng.gen_range(-total / 2..total);
        if let Ok(inst) = ArcSetInstance::new(a, b, c) {
            return inst;
        }
    }
}

/// A point inside the hull: a random convex combination of catalogue points plus a little extra `y`.
pub fn inner_point(rng: &mut ChaCha8Rng, inst: &ArcSetInstance, cat: &PointCatalogue) -> FracPoint {
    let k = rng.gen_range(1..=3);
    let picks: Vec<_> = cat.points.choose_multiple(rng, k).collect();
    let mut w: Vec<f64> = (0..picks.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let mut x = vec![0.0; inst.num_commodities()];
    let mut y = vec![0.0; inst.num_facilities()];
    for ((px, py), wi) in picks.iter().zip(&w) {
        for (q, &v) in px.iter().enumerate() {
            x[q] += wi * v as f64;
        }
        for (t, &v) in py.iter().enumerate() {
            y[t] += wi * v as f64;
        }
    }
    if rng.gen_bool(0.3) {
        let t = rng.gen_range(0..y.len());
        y[t] += rng.gen_range(0.0..0.5);
    }
    FracPoint::new(x, y)
}

/// A point of the LP relaxation, often outside the hull.
pub fn relaxation_point(rng: &mut ChaCha8Rng, inst: &ArcSetInstance) -> FracPoint {
    let nq = inst.num_commodities();
    let x: Vec<f64> = (0..nq)
        .map(|_| match rng.gen_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            _ => (rng.gen_range(1..20) as f64) / 20.0,
        })
        .collect();
    let load: f64 = inst.demands().iter().zip(&x).map(|(&a, &v)| a as f64 * v).sum();
    let need = (load - inst.existing() as f64).max(0.0);
    let nt = inst.num_facilities();
    let mut y = vec![0.0; nt];
    let t = rng.gen_range(0..nt);
    y[t] = need / inst.capacities()[t] as f64;
    if rng.gen_bool(0.3) {
        let s = rng.gen_range(0..nt);
        y[s] += rng.gen_range(0.0..0.4);
    }
    // round to a coarse grid, staying inside the relaxation
    let y = y.iter().map(|v| (v * 1000.0).ceil() / 1000.0).collect();
    FracPoint::new(x, y)
}
