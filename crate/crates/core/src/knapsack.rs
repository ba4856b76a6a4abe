//! Exact optimization of `alpha.x - beta.y - gamma` over one arc set.
//!
//! The integer facility variables are unbounded, but with `beta >= 0` only minimal covers
//! matter, so the problem splits into a 0-1 subset-sum table over demand totals and a
//! cover-cost table `g(d) = min { beta.y : b.y >= d, y integer }`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;

use crate::arcset::{ArcSetInstance, IntCut};

/// Numeric type usable as a DP value.
pub trait Value:
    Copy + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_int(v: i64) -> Self;
    /// Slack under which two values count as equal when breaking ties.
    fn tie_tol() -> Self;
    fn to_f64(self) -> f64;
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn tie_tol() -> Self {
        1e-9
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Value for i64 {
    fn zero() -> Self {
        0
    }
    fn from_int(v: i64) -> Self {
        v
    }
    fn tie_tol() -> Self {
        0
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Value for Ratio<i128> {
    fn zero() -> Self {
        Ratio::from_integer(0)
    }
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn tie_tol() -> Self {
        Ratio::from_integer(0)
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackAnswer<V> {
    pub value: V,
    pub x: Vec<u8>,
    pub y: Vec<i64>,
}

/// `g(d)` for `d = 0..=max` with the facility chosen first at each level.
#[derive(Debug, Clone)]
pub struct CoverTable<V> {
    cost: Vec<V>,
    choice: Vec<usize>,
    beta: Vec<V>,
    caps: Vec<i64>,
}

impl<V: Value> CoverTable<V> {
    pub fn new(beta: &[V], caps: &[i64]) -> Self {
        assert_eq!(beta.len(), caps.len());
        assert!(!caps.is_empty(), "cover needs at least one facility");
        Self { cost: vec![V::zero()], choice: vec![usize::MAX], beta: beta.to_vec(), caps: caps.to_vec() }
    }

    fn extend_to(&mut self, max: usize) {
        while self.cost.len() <= max {
            let d = self.cost.len() as i64;
            let mut best: Option<(V, usize)> = None;
            for (t, (&b, &bt)) in self.caps.iter().zip(&self.beta).enumerate() {
                let rest = (d - b).max(0) as usize;
                let v = bt + self.cost[rest];
                if best.map_or(true, |(bv, _)| v < bv) {
                    best = Some((v, t));
                }
            }
            let (v, t) = best.expect("nonempty facility set");
            self.cost.push(v);
            self.choice.push(t);
        }
    }

    pub fn cost(&mut self, demand: i64) -> V {
        if demand <= 0 {
            return V::zero();
        }
        self.extend_to(demand as usize);
        self.cost[demand as usize]
    }

    pub fn witness(&mut self, demand: i64) -> Vec<i64> {
        let mut y = vec![0; self.caps.len()];
        if demand <= 0 {
            return y;
        }
        self.extend_to(demand as usize);
        let mut d = demand;
        while d > 0 {
            let t = self.choice[d as usize];
            y[t] += 1;
            d -= self.caps[t];
        }
        y
    }
}

/// Minimum `beta.y` with `caps.y >= demand`, and a witness `y`. Requires `beta >= 0`.
pub fn cover_cost<V: Value>(beta: &[V], caps: &[i64], demand: i64) -> (V, Vec<i64>) {
    let mut table = CoverTable::new(beta, caps);
    (table.cost(demand), table.witness(demand))
}

/// Best `alpha.x` for every achievable demand total `s = a.x`.
#[derive(Debug, Clone)]
pub struct SubsetTable<V> {
    best: Vec<Option<V>>,
    take: Vec<Vec<bool>>,
    demands: Vec<i64>,
}

impl<V: Value> SubsetTable<V> {
    pub fn new(alpha: &[V], demands: &[i64]) -> Self {
        assert_eq!(alpha.len(), demands.len());
        let total: i64 = demands.iter().sum();
        let size = total as usize + 1;
        let mut best: Vec<Option<V>> = vec![None; size];
        best[0] = Some(V::zero());
        let mut take = Vec::with_capacity(demands.len());
        let mut reach = 0usize;
        for (&a, &w) in demands.iter().zip(alpha) {
            let a = a as usize;
            let mut row = vec![false; size];
            reach += a;
            for s in (a..=reach).rev() {
                if let Some(prev) = best[s - a] {
                    let cand = prev + w;
                    if best[s].map_or(true, |cur| cand > cur) {
                        best[s] = Some(cand);
                        row[s] = true;
                    }
                }
            }
            take.push(row);
        }
        Self { best, take, demands: demands.to_vec() }
    }

    pub fn total(&self) -> i64 {
        self.best.len() as i64 - 1
    }

    pub fn best(&self, s: i64) -> Option<V> {
        self.best.get(s as usize).copied().flatten()
    }

    /// The `x` attaining `best(s)`.
    pub fn argmax(&self, s: i64) -> Vec<u8> {
        let mut x = vec![0u8; self.demands.len()];
        let mut s = s as usize;
        for k in (0..self.demands.len()).rev() {
            if self.take[k][s] {
                x[k] = 1;
                s -= self.demands[k] as usize;
            }
        }
        debug_assert_eq!(s, 0);
        x
    }
}

/// The integer set `{ a.x <= b.y + c }` seen through slices, so reduced sets need no copy.
#[derive(Debug, Clone, Copy)]
pub struct KnapsackSet<'a> {
    pub demands: &'a [i64],
    pub caps: &'a [i64],
    pub existing: i64,
}

impl<'a> KnapsackSet<'a> {
    pub fn new(demands: &'a [i64], caps: &'a [i64], existing: i64) -> Self {
        Self { demands, caps, existing }
    }

    pub fn of(inst: &'a ArcSetInstance) -> Self {
        Self::new(inst.demands(), inst.capacities(), inst.existing())
    }

    pub fn load(&self, x: &[u8]) -> i64 {
        x.iter().zip(self.demands).map(|(&v, &a)| v as i64 * a).sum()
    }

    pub fn supply(&self, y: &[i64]) -> i64 {
        y.iter().zip(self.caps).map(|(&v, &b)| v * b).sum::<i64>() + self.existing
    }

    pub fn contains(&self, x: &[u8], y: &[i64]) -> bool {
        x.iter().all(|&v| v <= 1) && y.iter().all(|&v| v >= 0) && self.load(x) <= self.supply(y)
    }

    /// Exact maximum of `alpha.x - beta.y - gamma`. Among near-optimal demand totals
    /// the smallest one wins, so the returned point routes as little as possible.
    pub fn maximize<V: Value>(&self, alpha: &[V], beta: &[V], gamma: V) -> KnapsackAnswer<V> {
        let table = SubsetTable::new(alpha, self.demands);
        let mut cover = CoverTable::new(beta, self.caps);
        let mut values: Vec<(i64, V)> = Vec::new();
        let mut best: Option<V> = None;
        for s in 0..=table.total() {
            if let Some(w) = table.best(s) {
                let v = w - cover.cost(s - self.existing);
                values.push((s, v));
                if best.map_or(true, |b| v > b) {
                    best = Some(v);
                }
            }
        }
        let best = best.expect("s = 0 is always achievable");
        let (s, _) = *values
            .iter()
            .find(|(_, v)| *v >= best - V::tie_tol())
            .expect("maximum is attained");
        KnapsackAnswer { value: best - gamma, x: table.argmax(s), y: cover.witness(s - self.existing) }
    }

    /// `W(C) = max_x alpha.x - g(a.x - C)`.
    pub fn w<V: Value>(&self, alpha: &[V], beta: &[V], capacity: i64) -> V {
        WEvaluator::new(alpha, beta, *self).eval(capacity)
    }

    /// Greedily adds commodities, largest demand first, while the point stays feasible.
    pub fn strengthen(&self, x: &[u8], y: &[i64]) -> Vec<u8> {
        let mut x = x.to_vec();
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by_key(|&q| (std::cmp::Reverse(self.demands[q]), q));
        let supply = self.supply(y);
        let mut load = self.load(&x);
        for q in order {
            if x[q] == 0 && load + self.demands[q] <= supply {
                x[q] = 1;
                load += self.demands[q];
            }
        }
        x
    }
}

/// Repeated `W(C)` evaluations sharing one subset table and one growing cover table.
#[derive(Debug, Clone)]
pub struct WEvaluator<V> {
    table: SubsetTable<V>,
    cover: CoverTable<V>,
}

impl<V: Value> WEvaluator<V> {
    pub fn new(alpha: &[V], beta: &[V], set: KnapsackSet<'_>) -> Self {
        Self { table: SubsetTable::new(alpha, set.demands), cover: CoverTable::new(beta, set.caps) }
    }

    pub fn eval(&mut self, capacity: i64) -> V {
        let mut best: Option<V> = None;
        for s in 0..=self.table.total() {
            if let Some(w) = self.table.best(s) {
                let v = w - self.cover.cost(s - capacity);
                if best.map_or(true, |b| v > b) {
                    best = Some(v);
                }
            }
        }
        best.expect("s = 0 is always achievable")
    }
}

/// Exact maximum of an integer cut's left minus right side over the full set.
///
/// `None` means the maximum is unbounded, which happens exactly when some `beta_t < 0`.
pub fn exact_maximum(inst: &ArcSetInstance, cut: &IntCut) -> Option<KnapsackAnswer<i64>> {
    if cut.beta.iter().any(|&b| b < 0) {
        return None;
    }
    Some(KnapsackSet::of(inst).maximize(&cut.alpha, &cut.beta, cut.gamma))
}

/// Whether an integer cut is valid for the full set, decided exactly.
pub fn is_valid(inst: &ArcSetInstance, cut: &IntCut) -> bool {
    exact_maximum(inst, cut).is_some_and(|ans| ans.value <= 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: [i64; 4] = [11, 15, 24, 50];

    #[test]
    fn cover_cost_examples() {
        assert_eq!(cover_cost(&[1.0], &[60], -5), (0.0, vec![0]));
        assert_eq!(cover_cost(&[1.0], &[60], 61), (2.0, vec![2]));
        let (v, y) = cover_cost(&[1.0, 1.0], &[50, 130], 100);
        assert_eq!(v, 1.0);
        assert_eq!(y, vec![0, 1]);
    }

    #[test]
    fn maximize_examples() {
        let set = KnapsackSet::new(&A, &[60], 0);
        let ans = set.maximize(&[1i64, 0, 1, 0], &[1], 0);
        assert_eq!(ans.value, 1);
        assert!(set.contains(&ans.x, &ans.y));
        assert_eq!((ans.x.clone(), ans.y.clone()), (vec![1, 0, 1, 0], vec![1]));
        let ans = set.maximize(&[0i64; 4], &[1], 0);
        assert_eq!((ans.value, ans.x, ans.y), (0, vec![0; 4], vec![0]));
        let ans = set.maximize(&[1i64, 1, 1, 1], &[1], 0);
        assert_eq!(ans.value, 2);
        let ans = set.maximize(&[1.0, 1.0, 1.0, 1.0], &[1.0], 0.0);
        assert!((ans.value - 2.0).abs() < 1e-12);
        // the tie between totals 50 and 100 resolves to the smaller total
        assert_eq!((ans.x, ans.y), (vec![1, 1, 1, 0], vec![1]));
    }

    #[test]
    fn w_examples() {
        let set = KnapsackSet::new(&A[..3], &[60], 0);
        assert_eq!(set.w(&[0i64, 0, 1], &[1], -50), -1);
        let set = KnapsackSet::new(&A, &[60], 0);
        assert_eq!(set.w(&[1i64, 0, 1, 0], &[1], 0), 1);
        assert_eq!(set.w(&[2i64, 1, 3, 1], &[1], 100), 7);
    }

    #[test]
    fn strengthen_examples() {
        let set = KnapsackSet::new(&A, &[60], 0);
        assert_eq!(set.strengthen(&[1, 0, 1, 0], &[1]), vec![1, 1, 1, 0]);
        assert_eq!(set.strengthen(&[1, 1, 1, 1], &[2]), vec![1, 1, 1, 1]);
        assert_eq!(set.strengthen(&[0, 0, 0, 0], &[2]), vec![1, 1, 1, 1]);
    }

    #[test]
    fn rational_values() {
        let r = |n, d| Ratio::new(n, d);
        let set = KnapsackSet::new(&A, &[90], 0);
        let third = r(1, 3);
        let ans = set.maximize(&[third; 4], &[r(1, 1)], r(0, 1));
        assert_eq!(ans.value, r(0, 1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn brute(inst: &ArcSetInstance, alpha: &[i64], beta: &[i64]) -> i64 {
            let nq = inst.num_commodities();
            let ub: Vec<i64> = (0..inst.num_facilities()).map(|t| inst.rho(&vec![1; nq], t) + 1).collect();
            let mut best = i64::MIN;
            for mask in 0u32..(1 << nq) {
                let x: Vec<u8> = (0..nq).map(|q| ((mask >> q) & 1) as u8).collect();
                let mut y = vec![0i64; ub.len()];
                loop {
                    if inst.contains(&x, &y) {
                        let v = x.iter().zip(alpha).map(|(&a, &b)| a as i64 * b).sum::<i64>()
                            - y.iter().zip(beta).map(|(a, b)| a * b).sum::<i64>();
                        best = best.max(v);
                    }
                    let mut t = 0;
                    loop {
                        if t == y.len() {
                            break;
                        }
                        y[t] += 1;
                        if y[t] <= ub[t] {
                            break;
                        }
                        y[t] = 0;
                        t += 1;
                    }
                    if t == y.len() {
                        break;
                    }
                }
            }
            best
        }

        fn instance() -> impl Strategy<Value = (ArcSetInstance, Vec<i64>, Vec<i64>)> {
            (1usize..=7, 1usize..=3).prop_flat_map(|(nq, nt)| {
                (
                    prop::collection::vec(1i64..80, nq),
                    prop::collection::vec(5i64..90, nt),
                    -60i64..40,
                    prop::collection::vec(0i64..6, nq),
                    prop::collection::vec(1i64..5, nt),
                )
                    .prop_filter_map("redundant row", |(a, mut b, c, alpha, beta)| {
                        b.sort();
                        ArcSetInstance::new(a, b, c).ok().map(|i| (i, alpha, beta))
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]
            #[test]
            fn maximize_matches_enumeration((inst, alpha, beta) in instance()) {
                let ans = KnapsackSet::of(&inst).maximize(&alpha, &beta, 0);
                prop_assert_eq!(ans.value, brute(&inst, &alpha, &beta));
                prop_assert!(inst.contains(&ans.x, &ans.y));
                let v = ans.x.iter().zip(&alpha).map(|(&a, &b)| a as i64 * b).sum::<i64>()
                    - ans.y.iter().zip(&beta).map(|(a, b)| a * b).sum::<i64>();
                prop_assert_eq!(v, ans.value);
            }

            #[test]
            fn w_is_nondecreasing((inst, alpha, beta) in instance(), c in -100i64..100) {
                let set = KnapsackSet::of(&inst);
                prop_assert!(set.w(&alpha, &beta, c) <= set.w(&alpha, &beta, c + 1));
            }

            #[test]
            fn strengthen_keeps_feasibility_and_value((inst, alpha, beta) in instance()) {
                let set = KnapsackSet::of(&inst);
                let ans = set.maximize(&alpha, &beta, 0);
                let x = set.strengthen(&ans.x, &ans.y);
                prop_assert!(set.contains(&x, &ans.y));
                for (a, b) in x.iter().zip(&ans.x) {
                    prop_assert!(a >= b);
                }
            }
        }
    }
}
