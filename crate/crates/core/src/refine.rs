//! Turning a reduced-space cut into an integral cut valid for the whole set:
//! rational scaling, exact right-hand-side recompute, and sequential lifting.

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arcset::{ceil_div, ArcSetInstance, CutInequality, IntCut};
use crate::knapsack::{KnapsackSet, WEvaluator};

type Q = Ratio<i128>;

/// Bound on any coefficient of a finished cut.
pub const COEFFICIENT_LIMIT: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPolicy {
    pub eps: f64,
    pub lambda_max: i64,
    pub mu_max: i64,
}

impl Default for ScalingPolicy {
    fn default() -> Self {
        Self { eps: 1e-9, lambda_max: 1_000_000, mu_max: 1_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScaleRejection {
    /// No fraction within `eps` respects the numerator and denominator limits.
    NoRationalForm { value: f64 },
    DenominatorTooLarge { lcm: i64 },
    CoefficientTooLarge { value: i64 },
}

impl std::fmt::Display for ScaleRejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NoRationalForm { value } => write!(f, "coefficient {value} has no small rational form"),
            Self::DenominatorTooLarge { lcm } => write!(f, "common denominator {lcm} is too large"),
            Self::CoefficientTooLarge { value } => write!(f, "scaled coefficient {value} is too large"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleOutcome {
    /// Integral `alpha` and `beta`; `gamma` is only multiplied and awaits [`recompute_gamma`].
    Scaled { cut: CutInequality, multiplier: i64 },
    Rejected(ScaleRejection),
}

/// Continued-fraction reconstruction: the first convergent `p/q` within `eps` of `v`.
pub fn rational_approx(v: f64, eps: f64, max_den: i64, max_num: i64) -> Option<(i64, i64)> {
    if !v.is_finite() {
        return None;
    }
    let sign = if v < 0.0 { -1 } else { 1 };
    let target = v.abs();
    let (mut h1, mut h2): (i128, i128) = (1, 0);
    let (mut k1, mut k2): (i128, i128) = (0, 1);
    let mut r = target;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e18 {
            return None;
        }
        let ai = a as i128;
        let h = ai * h1 + h2;
        let k = ai * k1 + k2;
        if k > max_den as i128 {
            return None;
        }
        if ((h as f64) / (k as f64) - target).abs() <= eps {
            if h > max_num as i128 {
                return None;
            }
            return Some((sign * h as i64, k as i64));
        }
        let frac = r - a;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
    }
    None
}

/// Replaces `alpha`, `beta` by the smallest integral multiple the policy allows.
pub fn scale(cut: &CutInequality, policy: &ScalingPolicy) -> ScaleOutcome {
    let mut fracs = Vec::with_capacity(cut.alpha.len() + cut.beta.len());
    let mut lcm: i64 = 1;
    for &v in cut.alpha.iter().chain(&cut.beta) {
        match rational_approx(v, policy.eps, policy.mu_max, policy.lambda_max) {
            Some((p, q)) => {
                lcm = lcm.lcm(&q);
                if lcm > policy.mu_max {
                    return ScaleOutcome::Rejected(ScaleRejection::DenominatorTooLarge { lcm });
                }
                fracs.push((p, q));
            }
            None => return ScaleOutcome::Rejected(ScaleRejection::NoRationalForm { value: v }),
        }
    }
    let mut scaled = Vec::with_capacity(fracs.len());
    for (p, q) in fracs {
        let v = p * (lcm / q);
        if v.abs() > policy.mu_max {
            return ScaleOutcome::Rejected(ScaleRejection::CoefficientTooLarge { value: v });
        }
        scaled.push(v as f64);
    }
    let nq = cut.alpha.len();
    let out = CutInequality {
        alpha: scaled[..nq].to_vec(),
        beta: scaled[nq..].to_vec(),
        gamma: cut.gamma * lcm as f64,
        integralized: true,
    };
    ScaleOutcome::Scaled { cut: out, multiplier: lcm }
}

/// Sets `gamma` to the exact maximum of `alpha.x - beta.y` over the set.
///
/// Panics if `alpha` or `beta` are not integral; [`scale`] guarantees they are.
pub fn recompute_gamma(cut: &CutInequality, set: KnapsackSet<'_>) -> CutInequality {
    let alpha: Vec<i64> = cut.alpha.iter().map(|&v| exact_int(v)).collect();
    let beta: Vec<i64> = cut.beta.iter().map(|&v| exact_int(v)).collect();
    let gamma = set.w(&alpha, &beta, set.existing);
    CutInequality { gamma: gamma as f64, integralized: true, ..cut.clone() }
}

fn exact_int(v: f64) -> i64 {
    assert!(v.fract() == 0.0, "coefficient {v} is not integral");
    v as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LiftOrder {
    #[serde(rename = "lift1")]
    Lift1,
    #[serde(rename = "lift2")]
    Lift2,
    #[serde(rename = "lift3")]
    Lift3,
    #[default]
    #[serde(rename = "lift4")]
    Lift4,
}

impl std::str::FromStr for LiftOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lift1" => Ok(Self::Lift1),
            "lift2" => Ok(Self::Lift2),
            "lift3" => Ok(Self::Lift3),
            "lift4" => Ok(Self::Lift4),
            other => Err(format!("unknown lifting order `{other}`")),
        }
    }
}

/// Reduced costs of the arc's variables in the surrounding LP, used by the cost-based orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedCosts {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LiftVar {
    X(usize),
    Y(usize),
}

/// Variables fixed during preprocessing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixing {
    pub x_zero: Vec<usize>,
    pub x_one: Vec<usize>,
    pub y_zero: Vec<usize>,
}

impl Fixing {
    pub fn is_empty(&self) -> bool {
        self.x_zero.is_empty() && self.x_one.is_empty() && self.y_zero.is_empty()
    }

    pub fn len(&self) -> usize {
        self.x_zero.len() + self.x_one.len() + self.y_zero.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftStep {
    pub var: LiftVar,
    pub fixed_at: i64,
    /// Coefficient before the final integral rescaling, as `numerator/denominator`.
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lifted {
    pub cut: IntCut,
    pub steps: Vec<LiftStep>,
    pub multiplier: i128,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LiftError {
    #[error("lifted coefficient {0} exceeds the coefficient limit")]
    CoefficientTooLarge(i128),
    #[error("lifting needs at least one unfixed facility")]
    NoFreeFacility,
}

/// The sequence in which fixed variables are lifted.
pub fn lift_sequence(
    inst: &ArcSetInstance,
    fixing: &Fixing,
    order: LiftOrder,
    costs: Option<&ReducedCosts>,
) -> Vec<LiftVar> {
    let coef = |v: &LiftVar| match *v {
        LiftVar::X(q) => inst.demands()[q] as f64,
        LiftVar::Y(t) => inst.capacities()[t] as f64,
    };
    let mut xs: Vec<usize> = fixing.x_zero.iter().chain(&fixing.x_one).copied().collect();
    xs.sort_unstable();
    let mut ys = fixing.y_zero.clone();
    ys.sort_unstable();
    let all: Vec<LiftVar> = xs.iter().map(|&q| LiftVar::X(q)).chain(ys.iter().map(|&t| LiftVar::Y(t))).collect();
    let by_desc = |mut v: Vec<LiftVar>, key: &dyn Fn(&LiftVar) -> f64| {
        v.sort_by(|a, b| key(b).total_cmp(&key(a)));
        v
    };
    let order = match (order, costs) {
        (LiftOrder::Lift3 | LiftOrder::Lift4, None) => LiftOrder::Lift2,
        (o, _) => o,
    };
    match order {
        LiftOrder::Lift1 => {
            let ones: Vec<LiftVar> = all
                .iter()
                .copied()
                .filter(|v| matches!(v, LiftVar::X(q) if fixing.x_one.contains(q)))
                .collect();
            let zeros: Vec<LiftVar> = all.iter().copied().filter(|v| !ones.contains(v)).collect();
            let mut out = by_desc(ones, &coef);
            out.extend(by_desc(zeros, &coef));
            out
        }
        LiftOrder::Lift2 => by_desc(all, &coef),
        LiftOrder::Lift3 | LiftOrder::Lift4 => {
            let rc = costs.expect("checked above");
            let cost = |v: &LiftVar| match *v {
                LiftVar::X(q) => rc.x[q],
                LiftVar::Y(t) => rc.y[t],
            };
            let mut out = all;
            if order == LiftOrder::Lift3 {
                out.sort_by(|a, b| cost(b).total_cmp(&cost(a)));
            } else {
                out.sort_by(|a, b| cost(a).total_cmp(&cost(b)));
            }
            out
        }
    }
}

/// Lifts an integral cut valid with the fixed variables at their values into one valid for `inst`.
///
/// `cut` is full length; entries of fixed variables are ignored.
pub fn lift(
    inst: &ArcSetInstance,
    cut: &IntCut,
    fixing: &Fixing,
    order: LiftOrder,
    costs: Option<&ReducedCosts>,
) -> Result<Lifted, LiftError> {
    let nq = inst.num_commodities();
    let nt = inst.num_facilities();
    let mut free_x = vec![true; nq];
    let mut free_y = vec![true; nt];
    for &q in fixing.x_zero.iter().chain(&fixing.x_one) {
        free_x[q] = false;
    }
    for &t in &fixing.y_zero {
        free_y[t] = false;
    }
    if !free_y.iter().any(|&f| f) {
        return Err(LiftError::NoFreeFacility);
    }
    let mut alpha: Vec<Q> = (0..nq).map(|q| if free_x[q] { Q::from_integer(cut.alpha[q] as i128) } else { Q::from_integer(0) }).collect();
    let mut beta: Vec<Q> = (0..nt).map(|t| if free_y[t] { Q::from_integer(cut.beta[t] as i128) } else { Q::from_integer(0) }).collect();
    let mut gamma = Q::from_integer(cut.gamma as i128);
    let mut cbar = inst.existing() - fixing.x_one.iter().map(|&q| inst.demands()[q]).sum::<i64>();
    let mut steps = Vec::new();

    for var in lift_sequence(inst, fixing, order, costs) {
        let xs: Vec<usize> = (0..nq).filter(|&q| free_x[q]).collect();
        let ts: Vec<usize> = (0..nt).filter(|&t| free_y[t]).collect();
        let a: Vec<i64> = xs.iter().map(|&q| inst.demands()[q]).collect();
        let b: Vec<i64> = ts.iter().map(|&t| inst.capacities()[t]).collect();
        let al: Vec<Q> = xs.iter().map(|&q| alpha[q]).collect();
        let be: Vec<Q> = ts.iter().map(|&t| beta[t]).collect();
        let set = KnapsackSet::new(&a, &b, cbar);
        let mut w = WEvaluator::new(&al, &be, set);
        let (coefficient, fixed_at) = match var {
            LiftVar::X(k) => {
                let ak = inst.demands()[k];
                if fixing.x_one.contains(&k) {
                    let coef = w.eval(cbar + ak) - gamma;
                    gamma += coef;
                    cbar += ak;
                    alpha[k] = coef;
                    free_x[k] = true;
                    (coef, 1)
                } else {
                    let coef = gamma - w.eval(cbar - ak);
                    alpha[k] = coef;
                    free_x[k] = true;
                    (coef, 0)
                }
            }
            LiftVar::Y(k) => {
                let bk = inst.capacities()[k];
                let total: i64 = a.iter().sum();
                let lbar = ceil_div(total - cbar, bk).max(1);
                let mut best: Option<Q> = None;
                for l in 1..=lbar {
                    let v = (w.eval(cbar + l * bk) - gamma) / Q::from_integer(l as i128);
                    if best.map_or(true, |b| v > b) {
                        best = Some(v);
                    }
                }
                let coef = best.expect("lbar >= 1");
                beta[k] = coef;
                free_y[k] = true;
                (coef, 0)
            }
        };
        steps.push(LiftStep { var, fixed_at, coefficient: coefficient.to_string() });
    }

    let mut den: i128 = gamma.denom().to_owned();
    for v in alpha.iter().chain(&beta) {
        den = den.lcm(v.denom());
    }
    let to_int = |v: Q| -> Result<i64, LiftError> {
        let n = *(v * Q::from_integer(den)).numer();
        if n.abs() > COEFFICIENT_LIMIT as i128 {
            return Err(LiftError::CoefficientTooLarge(n));
        }
        Ok(n as i64)
    };
    let alpha = alpha.into_iter().map(to_int).collect::<Result<Vec<_>, _>>()?;
    let beta = beta.into_iter().map(to_int).collect::<Result<Vec<_>, _>>()?;
    let gamma = *(gamma * Q::from_integer(den)).numer();
    if gamma.abs() > i64::MAX as i128 / 4 {
        return Err(LiftError::CoefficientTooLarge(gamma));
    }
    Ok(Lifted { cut: IntCut { alpha, beta, gamma: gamma as i64 }, steps, multiplier: den })
}
