//! Delayed constraint generation for the separation LP over one (reduced) arc set.
//!
//! The LP maximizes `x̄.alpha - ȳ.beta - gamma` over inequalities that hold at a growing
//! list `U` of integer points; a knapsack solve either certifies the current inequality
//! or returns a point of the set it cuts off, which joins `U`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arcset::{ceil_div, floor_div, ArcSetInstance, CutInequality, FracPoint};
use crate::knapsack::KnapsackSet;
use crate::lp::{LpError, LpModel, LpRow, LpSolver, LpStatus, ObjSense, RowSense};

/// `v(U)` at or below this certifies membership.
pub const MEMBER_TOL: f64 = 1e-9;
/// Knapsack values at or below this certify validity.
pub const VALID_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RowGenError {
    #[error("LP solver failed: {0}")]
    Lp(#[from] LpError),
    #[error("partial separation LP is {0:?}; bounds should rule this out")]
    BadStatus(LpStatus),
    #[error("knapsack returned a point already in U at iteration {iteration}; tolerances disagree")]
    DuplicatePoint { iteration: usize },
    #[error("row generation did not finish within {0} iterations")]
    IterationLimit(usize),
    #[error("initial point is not in the set")]
    InfeasibleSeed,
}

/// An integer point of the set, `x` binary and `y` nonnegative.
pub type SetPoint = (Vec<u8>, Vec<i64>);

#[derive(Debug, Clone, PartialEq)]
pub struct RowGenOptions {
    /// Apply the greedy strengthening to every knapsack point before adding it.
    pub strengthen: bool,
    /// Points placed in `U` before the first LP solve.
    pub initial_points: Vec<SetPoint>,
    pub max_iterations: usize,
}

impl Default for RowGenOptions {
    fn default() -> Self {
        Self { strengthen: true, initial_points: Vec::new(), max_iterations: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Partial LP optimum `v(U)`.
    pub v: f64,
    /// Knapsack optimum for the current inequality; absent when the LP already certified membership.
    pub z: Option<f64>,
    pub u_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowGenRun {
    /// A valid inequality violated by the point, or `None` for membership.
    pub cut: Option<CutInequality>,
    pub objective: f64,
    /// Number of partial LP solves.
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub points: Vec<SetPoint>,
    /// Reduced costs of the final partial LP, in variable order alpha, beta, gamma.
    pub lp_reduced_costs: Vec<f64>,
}

/// Builds the partial separation LP with no generator rows.
///
/// With `bounded` the variables get the box that keeps every partial LP bounded; without it
/// only `beta >= 0` and the normalization remain.
pub fn partial_lp(inst: &ArcSetInstance, point: &FracPoint, normalized: usize, bounded: bool) -> LpModel {
    let a = inst.demands();
    let b = inst.capacities();
    let bn = b[normalized];
    let mut lp = LpModel::new(ObjSense::Maximize);
    for (q, &aq) in a.iter().enumerate() {
        let (lo, hi) = if bounded { (0.0, ceil_div(aq, bn) as f64) } else { (f64::NEG_INFINITY, f64::INFINITY) };
        lp.add_var(lo, hi, point.x[q]).expect("finite data");
    }
    for (t, &bt) in b.iter().enumerate() {
        let (lo, hi) = if t == normalized {
            (1.0, 1.0)
        } else if bounded {
            (1.0, ceil_div(bt, bn).max(1) as f64)
        } else {
            (0.0, f64::INFINITY)
        };
        lp.add_var(lo, hi, -point.y[t]).expect("finite data");
    }
    let glo = if bounded { floor_div(inst.existing(), bn).min(0) as f64 } else { f64::NEG_INFINITY };
    lp.add_var(glo, f64::INFINITY, -1.0).expect("finite data");
    lp
}

fn generator_row(x: &[u8], y: &[i64]) -> LpRow {
    let mut coeffs: Vec<(usize, f64)> = Vec::new();
    let nq = x.len();
    for (q, &v) in x.iter().enumerate() {
        if v != 0 {
            coeffs.push((q, v as f64));
        }
    }
    for (t, &v) in y.iter().enumerate() {
        if v != 0 {
            coeffs.push((nq + t, -(v as f64)));
        }
    }
    coeffs.push((nq + y.len(), -1.0));
    LpRow::new(coeffs, RowSense::Le, 0.0)
}

/// Runs the loop on `inst` at `point`, normalizing `beta` on facility `normalized`.
pub fn run(
    inst: &ArcSetInstance,
    point: &FracPoint,
    normalized: usize,
    opts: &RowGenOptions,
) -> Result<RowGenRun, RowGenError> {
    let nq = inst.num_commodities();
    let nt = inst.num_facilities();
    let set = KnapsackSet::of(inst);
    let mut solver = LpSolver::new(partial_lp(inst, point, normalized, true))?;
    let mut seen: HashSet<SetPoint> = HashSet::new();
    let mut points: Vec<SetPoint> = Vec::new();
    for (x, y) in &opts.initial_points {
        if !set.contains(x, y) || x.len() != nq || y.len() != nt {
            return Err(RowGenError::InfeasibleSeed);
        }
        if seen.insert((x.clone(), y.clone())) {
            solver.add_row(generator_row(x, y))?;
            points.push((x.clone(), y.clone()));
        }
    }
    let mut trace = Vec::new();
    for iteration in 1..=opts.max_iterations {
        let sol = solver.optimize()?;
        if sol.status != LpStatus::Optimal {
            return Err(RowGenError::BadStatus(sol.status));
        }
        let v = sol.objective;
        if v <= MEMBER_TOL {
            trace.push(TraceRecord { iteration, v, z: None, u_size: points.len() });
            return Ok(RowGenRun {
                cut: None,
                objective: v,
                iterations: iteration,
                trace,
                points,
                lp_reduced_costs: sol.reduced_costs,
            });
        }
        let alpha: Vec<f64> = sol.values[..nq].iter().map(|&v| v.max(0.0)).collect();
        let beta: Vec<f64> = sol.values[nq..nq + nt].iter().map(|&v| v.max(0.0)).collect();
        let gamma = sol.values[nq + nt];
        let ans = set.maximize(&alpha, &beta, gamma);
        trace.push(TraceRecord { iteration, v, z: Some(ans.value), u_size: points.len() });
        if ans.value <= VALID_TOL {
            return Ok(RowGenRun {
                cut: Some(CutInequality::new(alpha, beta, gamma)),
                objective: v,
                iterations: iteration,
                trace,
                points,
                lp_reduced_costs: sol.reduced_costs,
            });
        }
        let x = if opts.strengthen { set.strengthen(&ans.x, &ans.y) } else { ans.x };
        let key = (x, ans.y);
        if !seen.insert(key.clone()) {
            return Err(RowGenError::DuplicatePoint { iteration });
        }
        solver.add_row(generator_row(&key.0, &key.1))?;
        points.push(key);
    }
    Err(RowGenError::IterationLimit(opts.max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve;

    fn third() -> (ArcSetInstance, FracPoint) {
        (
            ArcSetInstance::new(vec![11, 15, 24, 50], vec![60], 0).unwrap(),
            FracPoint::new(vec![0.9, 0.5, 0.7, 0.1], vec![0.7]),
        )
    }

    #[test]
    fn third_example_seeded() {
        let (inst, p) = third();
        let opts = RowGenOptions { initial_points: vec![(vec![1, 1, 1, 1], vec![2])], ..Default::default() };
        let run = run(&inst, &p, 0, &opts).unwrap();
        assert_eq!(run.iterations, 2);
        assert!((run.trace[0].v - 0.9).abs() < 1e-9);
        assert_eq!(run.trace[0].z, Some(1.0));
        assert_eq!(run.points[1], (vec![1, 1, 1, 0], vec![1]));
        let cut = run.cut.unwrap();
        assert_eq!(cut.render(), "x1 + x4 <= y");
        assert!((cut.violation(&p) - 0.3).abs() < 1e-9);
    }

    #[test]
    fn third_example_unseeded() {
        let (inst, p) = third();
        let run = run(&inst, &p, 0, &RowGenOptions::default()).unwrap();
        assert_eq!(run.iterations, 2);
        assert_eq!(run.cut.unwrap().render(), "x1 + x4 <= y");
    }

    #[test]
    fn strengthening_saves_iterations() {
        let (inst, p) = third();
        let seed = vec![(vec![1, 1, 1, 1], vec![2])];
        let with = run(&inst, &p, 0, &RowGenOptions { initial_points: seed.clone(), ..Default::default() }).unwrap();
        let without =
            run(&inst, &p, 0, &RowGenOptions { initial_points: seed, strengthen: false, ..Default::default() }).unwrap();
        assert!(with.iterations < without.iterations, "{} vs {}", with.iterations, without.iterations);
        assert!((without.objective - with.objective).abs() < 1e-9);
    }

    #[test]
    fn vertex_is_member() {
        let (inst, _) = third();
        let p = FracPoint::new(vec![0.0; 4], vec![0.0]);
        // normalization on a facility with zero value still certifies a vertex
        let run = run(&inst, &p, 0, &RowGenOptions::default()).unwrap();
        assert!(run.cut.is_none());
        let p = FracPoint::new(vec![1.0, 1.0, 1.0, 0.0], vec![1.0]);
        assert!(super::run(&inst, &p, 0, &RowGenOptions::default()).unwrap().cut.is_none());
    }

    #[test]
    fn unbounded_without_box() {
        let inst = ArcSetInstance::new(vec![3], vec![5], 0).unwrap();
        let p = FracPoint::new(vec![0.5], vec![0.3]);
        let lp = partial_lp(&inst, &p, 0, false);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
        let lp = partial_lp(&inst, &p, 0, true);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Optimal);
    }
}
