//! Domain types for a single arc's unsplittable flow set
//!
//! ```text
//! X = { (x, y) in {0,1}^Q x Z_+^T : a.x <= b.y + c }
//! ```
//!
//! together with the small derived quantities the separation routines share.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feasibility slack used when testing points against bounds and rows.
pub const FEAS_TOL: f64 = 1e-9;
/// A cut is only reported when the point violates it by more than this.
pub const VIOLATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArcSetError {
    #[error("demand of commodity {index} is {value}; demands must be positive")]
    NonPositiveDemand { index: usize, value: i64 },
    #[error("capacity of facility {index} is {value}; capacities must be positive")]
    NonPositiveCapacity { index: usize, value: i64 },
    #[error("capacities must be sorted nondecreasing (facility {index} breaks the order)")]
    UnsortedCapacities { index: usize },
    #[error("at least one facility is required")]
    NoFacilities,
    #[error("capacity row is redundant: total demand {total} does not exceed existing capacity {existing}")]
    RedundantCapacity { total: i64, existing: i64 },
    #[error("point has {got} {what} entries, instance expects {expected}")]
    DimensionMismatch { what: &'static str, got: usize, expected: usize },
}

/// Demands `a`, module capacities `b` (sorted nondecreasing) and existing capacity `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ArcSetInstance {
    demands: Vec<i64>,
    capacities: Vec<i64>,
    existing: i64,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    demands: Vec<i64>,
    capacities: Vec<i64>,
    existing: i64,
}

impl TryFrom<RawInstance> for ArcSetInstance {
    type Error = ArcSetError;
    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        ArcSetInstance::new(raw.demands, raw.capacities, raw.existing)
    }
}

impl From<ArcSetInstance> for RawInstance {
    fn from(inst: ArcSetInstance) -> Self {
        RawInstance {
            demands: inst.demands,
            capacities: inst.capacities,
            existing: inst.existing,
        }
    }
}

impl ArcSetInstance {
    pub fn new(demands: Vec<i64>, capacities: Vec<i64>, existing: i64) -> Result<Self, ArcSetError> {
        if capacities.is_empty() {
            return Err(ArcSetError::NoFacilities);
        }
        if let Some((index, &value)) = demands.iter().enumerate().find(|(_, &a)| a <= 0) {
            return Err(ArcSetError::NonPositiveDemand { index, value });
        }
        if let Some((index, &value)) = capacities.iter().enumerate().find(|(_, &b)| b <= 0) {
            return Err(ArcSetError::NonPositiveCapacity { index, value });
        }
        if let Some(index) = (1..capacities.len()).find(|&t| capacities[t] < capacities[t - 1]) {
            return Err(ArcSetError::UnsortedCapacities { index });
        }
        let total: i64 = demands.iter().sum();
        if total - existing <= 0 {
            return Err(ArcSetError::RedundantCapacity { total, existing });
        }
        Ok(Self { demands, capacities, existing })
    }

    /// Builds an instance from capacities in arbitrary order.
    ///
    /// Returns the instance and `order`, where sorted facility `k` is input facility `order[k]`.
    pub fn from_unsorted(
        demands: Vec<i64>,
        capacities: &[i64],
        existing: i64,
    ) -> Result<(Self, Vec<usize>), ArcSetError> {
        let mut order: Vec<usize> = (0..capacities.len()).collect();
        order.sort_by_key(|&t| (capacities[t], t));
        let sorted = order.iter().map(|&t| capacities[t]).collect();
        Ok((Self::new(demands, sorted, existing)?, order))
    }

    pub fn demands(&self) -> &[i64] {
        &self.demands
    }

    pub fn capacities(&self) -> &[i64] {
        &self.capacities
    }

    pub fn existing(&self) -> i64 {
        self.existing
    }

    pub fn num_commodities(&self) -> usize {
        self.demands.len()
    }

    pub fn num_facilities(&self) -> usize {
        self.capacities.len()
    }

    pub fn total_demand(&self) -> i64 {
        self.demands.iter().sum()
    }

    /// Minimum number of modules of facility `t` needed to carry `x`.
    pub fn rho(&self, x: &[u8], t: usize) -> i64 {
        let load: i64 = x.iter().zip(&self.demands).map(|(&xi, &a)| xi as i64 * a).sum();
        ceil_div(load - self.existing, self.capacities[t]).max(0)
    }

    /// Modules of the smallest facility needed when nothing is routed.
    pub fn r_value(&self) -> i64 {
        ceil_div(-self.existing, self.capacities[0]).max(0)
    }

    /// Exact membership of an integer point in X.
    pub fn contains(&self, x: &[u8], y: &[i64]) -> bool {
        x.len() == self.demands.len()
            && y.len() == self.capacities.len()
            && x.iter().all(|&v| v <= 1)
            && y.iter().all(|&v| v >= 0)
            && self.load(x) <= self.supply(y)
    }

    pub fn load(&self, x: &[u8]) -> i64 {
        x.iter().zip(&self.demands).map(|(&xi, &a)| xi as i64 * a).sum()
    }

    pub fn supply(&self, y: &[i64]) -> i64 {
        y.iter().zip(&self.capacities).map(|(&yt, &b)| yt * b).sum::<i64>() + self.existing
    }
}

/// Candidate point `(x̄, ȳ)`. Bounds are not enforced here; [`screen_trivial`] reports them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl FracPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn check_dims(&self, inst: &ArcSetInstance) -> Result<(), ArcSetError> {
        if self.x.len() != inst.num_commodities() {
            return Err(ArcSetError::DimensionMismatch {
                what: "x",
                got: self.x.len(),
                expected: inst.num_commodities(),
            });
        }
        if self.y.len() != inst.num_facilities() {
            return Err(ArcSetError::DimensionMismatch {
                what: "y",
                got: self.y.len(),
                expected: inst.num_facilities(),
            });
        }
        Ok(())
    }

    /// Index of the largest `x̄_q`, smallest index on ties. `None` when there are no commodities.
    pub fn d_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (q, &v) in self.x.iter().enumerate() {
            match best {
                Some(b) if self.x[b] >= v => {}
                _ => best = Some(q),
            }
        }
        best
    }

    /// Commodities with `x̄_q` strictly above the total of `ȳ_t` over the non-smallest facilities.
    pub fn q_tilde(&self) -> Vec<usize> {
        let others: f64 = self.y.iter().skip(1).sum();
        self.x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > others + FEAS_TOL)
            .map(|(q, _)| q)
            .collect()
    }
}

/// A linear inequality `alpha.x <= beta.y + gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutInequality {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: f64,
    #[serde(default)]
    pub integralized: bool,
}

/// Integer form of a cut, used wherever validity must be decided exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntCut {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub gamma: i64,
}

impl IntCut {
    pub fn to_cut(&self) -> CutInequality {
        CutInequality {
            alpha: self.alpha.iter().map(|&v| v as f64).collect(),
            beta: self.beta.iter().map(|&v| v as f64).collect(),
            gamma: self.gamma as f64,
            integralized: true,
        }
    }
}

impl CutInequality {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, gamma: f64) -> Self {
        Self { alpha, beta, gamma, integralized: false }
    }

    /// `alpha.x̄ - beta.ȳ - gamma`; positive means the point violates the cut.
    pub fn violation(&self, point: &FracPoint) -> f64 {
        let lhs: f64 = self.alpha.iter().zip(&point.x).map(|(a, x)| a * x).sum();
        let rhs: f64 = self.beta.iter().zip(&point.y).map(|(b, y)| b * y).sum();
        lhs - rhs - self.gamma
    }

    /// Exact integer coefficients, if every entry is integral.
    pub fn to_int(&self) -> Option<IntCut> {
        fn conv(v: f64) -> Option<i64> {
            (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
        }
        Some(IntCut {
            alpha: self.alpha.iter().map(|&v| conv(v)).collect::<Option<_>>()?,
            beta: self.beta.iter().map(|&v| conv(v)).collect::<Option<_>>()?,
            gamma: conv(self.gamma)?,
        })
    }

    /// Integer multiple of this cut, recovering denominators up to `max_den`.
    ///
    /// Unlike the coefficient-scaling stage this also scales `gamma`, so it is the right tool
    /// for exact checks of cuts whose right-hand side was derived in closed form.
    pub fn integer_multiple(&self, max_den: i64) -> Option<IntCut> {
        use crate::refine::rational_approx;
        let all: Vec<f64> = self
            .alpha
            .iter()
            .chain(&self.beta)
            .chain(std::iter::once(&self.gamma))
            .copied()
            .collect();
        let mut fracs = Vec::with_capacity(all.len());
        let mut lcm: i64 = 1;
        for v in all {
            let (p, q) = rational_approx(v, 1e-9, max_den, i64::MAX / 4)?;
            lcm = num_integer::lcm(lcm, q);
            if lcm > max_den {
                return None;
            }
            fracs.push((p, q));
        }
        let scaled: Vec<i64> = fracs.iter().map(|&(p, q)| p * (lcm / q)).collect();
        let nq = self.alpha.len();
        let nt = self.beta.len();
        Some(IntCut {
            alpha: scaled[..nq].to_vec(),
            beta: scaled[nq..nq + nt].to_vec(),
            gamma: scaled[nq + nt],
        })
    }

    /// Human-readable rendering such as `x1 + x4 <= y` or `0 <= y1 + y2 - 1`.
    pub fn render(&self) -> String {
        let single_facility = self.beta.len() == 1;
        let lhs = render_terms(self.alpha.iter().enumerate().map(|(q, &v)| (v, format!("x{}", q + 1))));
        let mut rhs = render_terms(self.beta.iter().enumerate().map(|(t, &v)| {
            let name = if single_facility { "y".to_string() } else { format!("y{}", t + 1) };
            (v, name)
        }));
        if self.gamma != 0.0 {
            let g = fmt_num(self.gamma.abs());
            if rhs == "0" {
                rhs = fmt_num(self.gamma);
            } else if self.gamma > 0.0 {
                rhs = format!("{rhs} + {g}");
            } else {
                rhs = format!("{rhs} - {g}");
            }
        }
        format!("{lhs} <= {rhs}")
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.9}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn render_terms(terms: impl Iterator<Item = (f64, String)>) -> String {
    let mut out = String::new();
    for (coef, name) in terms {
        if coef == 0.0 {
            continue;
        }
        let mag = coef.abs();
        let body = if mag == 1.0 { name } else { format!("{} {}", fmt_num(mag), name) };
        if out.is_empty() {
            if coef < 0.0 {
                out.push('-');
            }
            out.push_str(&body);
        } else {
            out.push_str(if coef < 0.0 { " - " } else { " + " });
            out.push_str(&body);
        }
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Member,
    Violated,
}

/// Which routine produced a reported cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    TrivialBound,
    /// `y_t >= ceil(-c̄/b_t)` on a reduced set with a single free facility and no free commodity.
    ReducedBound,
    ClosedFormP5,
    ClosedFormP6,
    ClosedFormP7,
    ClosedFormP8,
    RowGeneration,
}

/// Result of trivial screening: the violated bound as a cut.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivialViolation {
    pub cut: CutInequality,
    pub violation: f64,
}

/// Checks `0 <= x <= 1`, `y >= 0` and the capacity row itself.
pub fn screen_trivial(inst: &ArcSetInstance, point: &FracPoint) -> Option<TrivialViolation> {
    let nq = inst.num_commodities();
    let nt = inst.num_facilities();
    let unit = |n: usize, i: usize, v: f64| {
        let mut e = vec![0.0; n];
        e[i] = v;
        e
    };
    for (q, &v) in point.x.iter().enumerate() {
        if v < -FEAS_TOL {
            // -x_q <= 0
            let cut = CutInequality::new(unit(nq, q, -1.0), vec![0.0; nt], 0.0);
            return Some(TrivialViolation { violation: -v, cut: integral(cut) });
        }
        if v > 1.0 + FEAS_TOL {
            let cut = CutInequality::new(unit(nq, q, 1.0), vec![0.0; nt], 1.0);
            return Some(TrivialViolation { violation: v - 1.0, cut: integral(cut) });
        }
    }
    for (t, &v) in point.y.iter().enumerate() {
        if v < -FEAS_TOL {
            // 0 <= y_t
            let cut = CutInequality::new(vec![0.0; nq], unit(nt, t, 1.0), 0.0);
            return Some(TrivialViolation { violation: -v, cut: integral(cut) });
        }
    }
    let cap = CutInequality::new(
        inst.demands().iter().map(|&a| a as f64).collect(),
        inst.capacities().iter().map(|&b| b as f64).collect(),
        inst.existing() as f64,
    );
    let violation = cap.violation(point);
    if violation > FEAS_TOL {
        return Some(TrivialViolation { violation, cut: integral(cap) });
    }
    None
}

fn integral(mut cut: CutInequality) -> CutInequality {
    cut.integralized = true;
    cut
}

/// `ceil(n / d)` for `d > 0`.
pub fn ceil_div(n: i64, d: i64) -> i64 {
    debug_assert!(d > 0);
    let q = n.div_euclid(d);
    if n.rem_euclid(d) == 0 {
        q
    } else {
        q + 1
    }
}

/// `floor(n / d)` for `d > 0`.
pub fn floor_div(n: i64, d: i64) -> i64 {
    n.div_euclid(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(b: i64) -> ArcSetInstance {
        ArcSetInstance::new(vec![11, 15, 24, 50], vec![b], 0).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(ex(100).rho(&[1, 1, 1, 1], 0), 1);
        assert_eq!(ex(100).rho(&[0, 0, 0, 0], 0), 0);
        assert_eq!(ex(60).rho(&[1, 1, 1, 1], 0), 2);
    }

    #[test]
    fn r_value_examples() {
        assert_eq!(ArcSetInstance::new(vec![5], vec![10], 0).unwrap().r_value(), 0);
        assert_eq!(ArcSetInstance::new(vec![5], vec![10], -25).unwrap().r_value(), 3);
        assert_eq!(ArcSetInstance::new(vec![50], vec![10], 5).unwrap().r_value(), 0);
    }

    #[test]
    fn d_index_ties_to_smallest() {
        assert_eq!(FracPoint::new(vec![0.3, 0.5, 0.9, 0.1], vec![0.38]).d_index(), Some(2));
        assert_eq!(FracPoint::new(vec![0.4, 0.5, 0.4, 0.4], vec![0.47]).d_index(), Some(1));
        assert_eq!(FracPoint::new(vec![0.7, 0.7], vec![1.0]).d_index(), Some(0));
        assert_eq!(FracPoint::new(vec![], vec![1.0]).d_index(), None);
    }

    #[test]
    fn q_tilde_examples() {
        assert_eq!(FracPoint::new(vec![0.5, 0.1], vec![0.4, 0.2]).q_tilde(), vec![0]);
        assert_eq!(FracPoint::new(vec![0.3, 0.0], vec![0.4, 0.0]).q_tilde(), vec![0]);
        assert_eq!(FracPoint::new(vec![0.9, 0.8, 0.7], vec![0.1, 0.05, 0.05]).q_tilde(), vec![0, 1, 2]);
    }

    #[test]
    fn screen_examples() {
        let inst = ex(100);
        let out = screen_trivial(&inst, &FracPoint::new(vec![1.2, 0.0, 0.0, 0.0], vec![1.0])).unwrap();
        assert_eq!(out.cut.render(), "x1 <= 1");
        assert!((out.violation - 0.2).abs() < 1e-12);
        assert!(screen_trivial(&inst, &FracPoint::new(vec![0.3, 0.5, 0.9, 0.1], vec![0.38])).is_none());
        let out = screen_trivial(&inst, &FracPoint::new(vec![0.0; 4], vec![-0.1])).unwrap();
        assert_eq!(out.cut.render(), "0 <= y");
        let out = screen_trivial(&inst, &FracPoint::new(vec![1.0; 4], vec![0.5])).unwrap();
        assert_eq!(out.cut.render(), "11 x1 + 15 x2 + 24 x3 + 50 x4 <= 100 y");
        assert!((out.violation - 50.0).abs() < 1e-9);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            ArcSetInstance::new(vec![0, 3], vec![5], 0),
            Err(ArcSetError::NonPositiveDemand { index: 0, .. })
        ));
        assert!(matches!(ArcSetInstance::new(vec![3], vec![], 0), Err(ArcSetError::NoFacilities)));
        assert!(matches!(
            ArcSetInstance::new(vec![3], vec![5, 4], 0),
            Err(ArcSetError::UnsortedCapacities { index: 1 })
        ));
        assert!(matches!(
            ArcSetInstance::new(vec![3, 4], vec![5], 7),
            Err(ArcSetError::RedundantCapacity { .. })
        ));
        // no commodities is fine as long as the row binds
        assert!(ArcSetInstance::new(vec![], vec![5], -3).is_ok());
    }

    #[test]
    fn from_unsorted_reports_order() {
        let (inst, order) = ArcSetInstance::from_unsorted(vec![10], &[130, 50, 20], 0).unwrap();
        assert_eq!(inst.capacities(), &[20, 50, 130]);
        assert_eq!(order, vec![2, 1, 0]);
    }

    #[test]
    fn render_forms() {
        let c = CutInequality::new(vec![0.0, 0.0], vec![1.0, 1.0], -1.0);
        assert_eq!(c.render(), "0 <= y1 + y2 - 1");
        let c = CutInequality::new(vec![1.0, 0.0, 0.0, 1.0], vec![1.0], 0.0);
        assert_eq!(c.render(), "x1 + x4 <= y");
        let c = CutInequality::new(vec![1.0, 1.0], vec![3.0], 2.0);
        assert_eq!(c.render(), "x1 + x2 <= 3 y + 2");
    }

    #[test]
    fn integer_multiple_recovers_thirds() {
        let third = 1.0 / 3.0;
        let c = CutInequality::new(vec![third; 4], vec![1.0], 0.0);
        let ic = c.integer_multiple(1000).unwrap();
        assert_eq!(ic.alpha, vec![1, 1, 1, 1]);
        assert_eq!(ic.beta, vec![3]);
        assert_eq!(ic.gamma, 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rho_is_a_minimal_cover(
                demands in prop::collection::vec(1i64..60, 1..6),
                cap in 1i64..80,
                existing in -100i64..40,
                mask in 0u32..64,
            ) {
                let Ok(inst) = ArcSetInstance::new(demands.clone(), vec![cap], existing) else {
                    return Ok(());
                };
                let x: Vec<u8> = (0..demands.len()).map(|q| ((mask >> q) & 1) as u8).collect();
                let k = inst.rho(&x, 0);
                prop_assert!(inst.contains(&x, &[k]));
                if k >= 1 && inst.load(&x) - existing > 0 {
                    prop_assert!(!inst.contains(&x, &[k - 1]));
                }
            }

            #[test]
            fn r_value_is_least_cover_of_existing(cap in 1i64..80, existing in -500i64..200) {
                let inst = ArcSetInstance::new(vec![1000], vec![cap], existing).unwrap();
                let r = inst.r_value();
                prop_assert!(cap * r + existing >= 0);
                prop_assert!(r == 0 || cap * (r - 1) + existing < 0);
            }
        }
    }
}
