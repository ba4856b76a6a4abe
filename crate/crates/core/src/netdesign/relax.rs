use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{upper_bound, NetworkError, NetworkInstance};
use crate::arcset::{ArcSetError, ArcSetInstance, FracPoint, IntCut, Provenance, Verdict, VIOLATION_TOL};
use crate::knapsack::is_valid;
use crate::lp::{LpModel, LpRow, LpSolution, LpSolver, LpStatus, ObjSense, RowSense};
use crate::refine::{LiftOrder, ReducedCosts};
use crate::separator::{separate, SeparatorOptions};

/// Column layout of the relaxation: routing variables by commodity then arc, then modules by arc then facility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarIndex {
    pub commodities: usize,
    pub arcs: usize,
    pub facilities: usize,
}

impl VarIndex {
    pub fn of(inst: &NetworkInstance) -> Self {
        Self { commodities: inst.commodities.len(), arcs: inst.num_arcs(), facilities: inst.facilities.len() }
    }

    pub fn x(&self, q: usize, e: usize) -> usize {
        q * self.arcs + e
    }

    pub fn y(&self, e: usize, t: usize) -> usize {
        self.commodities * self.arcs + e * self.facilities + t
    }

    pub fn len(&self) -> usize {
        self.arcs * (self.commodities + self.facilities)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flow balance (sink rows omitted as redundant), capacity rows, `0 <= x <= 1`, `y >= 0`.
pub fn lp_relaxation(inst: &NetworkInstance) -> LpModel {
    let idx = VarIndex::of(inst);
    let mut lp = LpModel::new(ObjSense::Minimize);
    for q in 0..idx.commodities {
        let a = inst.commodities[q].demand as f64;
        for e in 0..idx.arcs {
            lp.add_var(0.0, 1.0, inst.routing_cost(q, e) * a).expect("finite costs");
        }
    }
    for e in 0..idx.arcs {
        for t in 0..idx.facilities {
            lp.add_var(0.0, f64::INFINITY, inst.install_cost(e, t)).expect("finite costs");
        }
    }
    for (q, k) in inst.commodities.iter().enumerate() {
        for v in (0..inst.nodes).filter(|&v| v != k.sink) {
            let mut coeffs = Vec::new();
            for (e, arc) in inst.arcs.iter().enumerate() {
                if arc.tail == v {
                    coeffs.push((idx.x(q, e), 1.0));
                } else if arc.head == v {
                    coeffs.push((idx.x(q, e), -1.0));
                }
            }
            let rhs = if v == k.source { 1.0 } else { 0.0 };
            lp.add_row(LpRow::new(coeffs, RowSense::Eq, rhs)).expect("indices in range");
        }
    }
    for (e, arc) in inst.arcs.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> =
            inst.commodities.iter().enumerate().map(|(q, k)| (idx.x(q, e), k.demand as f64)).collect();
        coeffs.extend(inst.facilities.iter().enumerate().map(|(t, f)| (idx.y(e, t), -(f.capacity as f64))));
        lp.add_row(LpRow::new(coeffs, RowSense::Le, arc.existing as f64)).expect("indices in range");
    }
    lp
}

/// The arc's set with facilities sorted by capacity, and the sorting permutation; `None` when
/// the existing capacity already carries every commodity.
pub fn arc_set(inst: &NetworkInstance, arc: usize) -> Result<Option<(ArcSetInstance, Vec<usize>)>, NetworkError> {
    match ArcSetInstance::from_unsorted(inst.demands(), &inst.capacities(), inst.arcs[arc].existing) {
        Ok(pair) => Ok(Some(pair)),
        Err(ArcSetError::RedundantCapacity { .. }) => Ok(None),
        Err(e) => Err(NetworkError::Separation { arc, message: e.to_string() }),
    }
}

/// A cut on one arc, with `beta` in the network's facility order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArcCut {
    pub arc: usize,
    pub cut: IntCut,
    pub provenance: Provenance,
}

impl ArcCut {
    /// Exact validity for the arc's set.
    pub fn is_valid(&self, inst: &NetworkInstance) -> bool {
        match arc_set(inst, self.arc) {
            Ok(Some((set, order))) => {
                let sorted = IntCut {
                    alpha: self.cut.alpha.clone(),
                    beta: order.iter().map(|&t| self.cut.beta[t]).collect(),
                    gamma: self.cut.gamma,
                };
                is_valid(&set, &sorted)
            }
            _ => false,
        }
    }

    fn row(&self, idx: &VarIndex) -> LpRow {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (q, &a) in self.cut.alpha.iter().enumerate() {
            if a != 0 {
                coeffs.push((idx.x(q, self.arc), a as f64));
            }
        }
        for (t, &b) in self.cut.beta.iter().enumerate() {
            if b != 0 {
                coeffs.push((idx.y(self.arc, t), -(b as f64)));
            }
        }
        LpRow::new(coeffs, RowSense::Le, self.cut.gamma as f64)
    }
}

/// Outcome of separating one arc's part of an LP solution.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcOutcome {
    Cut(ArcCut),
    Member,
    Dropped,
    Redundant,
}

/// Separates the arc's coordinates of `values`, passing reduced costs through when given.
pub fn separate_arc(
    inst: &NetworkInstance,
    arc: usize,
    values: &[f64],
    reduced_costs: Option<&[f64]>,
    opts: &SeparatorOptions,
) -> Result<ArcOutcome, NetworkError> {
    let idx = VarIndex::of(inst);
    let Some((set, order)) = arc_set(inst, arc)? else {
        return Ok(ArcOutcome::Redundant);
    };
    let x: Vec<f64> = (0..idx.commodities).map(|q| values[idx.x(q, arc)].clamp(0.0, 1.0)).collect();
    let y: Vec<f64> = order.iter().map(|&t| values[idx.y(arc, t)].max(0.0)).collect();
    let mut opts = opts.clone();
    opts.reduced_costs = reduced_costs.map(|rc| ReducedCosts {
        x: (0..idx.commodities).map(|q| rc[idx.x(q, arc)]).collect(),
        y: order.iter().map(|&t| rc[idx.y(arc, t)]).collect(),
    });
    let rep = separate(&set, &FracPoint::new(x, y), &opts)
        .map_err(|e| NetworkError::Separation { arc, message: e.to_string() })?;
    if rep.verdict == Verdict::Member {
        return Ok(if rep.dropped.is_some() { ArcOutcome::Dropped } else { ArcOutcome::Member });
    }
    let cut = rep.cut.as_ref().and_then(|c| c.to_int()).ok_or_else(|| NetworkError::Separation {
        arc,
        message: "reported cut is not integral".into(),
    })?;
    let mut beta = vec![0; idx.facilities];
    for (k, &t) in order.iter().enumerate() {
        beta[t] = cut.beta[k];
    }
    let provenance = rep.provenance.expect("violated reports carry a provenance");
    Ok(ArcOutcome::Cut(ArcCut { arc, cut: IntCut { alpha: cut.alpha, beta, gamma: cut.gamma }, provenance }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootLoopSettings {
    pub max_rounds: usize,
    /// Stop once a round improves the bound by less than this fraction.
    pub min_improvement: f64,
    pub lift_order: LiftOrder,
    /// Pass LP reduced costs to the separator for the cost-based lifting orders.
    pub use_reduced_costs: bool,
    /// Rerouting sweeps for the upper bound; no bound when `None`.
    pub upper_bound_passes: Option<usize>,
    pub min_violation: f64,
}

impl Default for RootLoopSettings {
    fn default() -> Self {
        Self {
            max_rounds: 50,
            min_improvement: 1e-4,
            lift_order: LiftOrder::Lift4,
            use_reduced_costs: true,
            upper_bound_passes: Some(5),
            min_violation: VIOLATION_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    NoCuts,
    SmallImprovement,
    RoundLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootLoopReport {
    pub z_lp: f64,
    pub z_root: f64,
    /// Rounds that added cuts and re-solved.
    pub rounds: usize,
    pub stop: StopReason,
    pub cuts_added: BTreeMap<Provenance, usize>,
    pub cuts_dropped: usize,
    /// LP objective after the initial solve and after each round.
    pub trace: Vec<f64>,
    pub z_ub: Option<f64>,
    /// Absent when there is no bound or no gap.
    pub gap_closed: Option<f64>,
    pub cuts: Vec<ArcCut>,
}

/// Percentage of the gap between relaxation and upper bound closed by the cuts.
pub fn gap_closed(z_lp: f64, z_root: f64, z_ub: f64) -> Option<f64> {
    let gap = z_ub - z_lp;
    (gap >= 1e-9).then(|| 100.0 * (z_root - z_lp) / gap)
}

fn optimal(sol: LpSolution, round: usize) -> Result<LpSolution, NetworkError> {
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(NetworkError::Infeasible),
        LpStatus::Unbounded => Err(NetworkError::Lp { round, message: "relaxation is unbounded".into() }),
    }
}

pub fn root_cut_loop(inst: &NetworkInstance, settings: &RootLoopSettings) -> Result<RootLoopReport, NetworkError> {
    let idx = VarIndex::of(inst);
    let lp_err = |round: usize| move |e: crate::lp::LpError| NetworkError::Lp { round, message: e.to_string() };
    let mut solver = LpSolver::new(lp_relaxation(inst)).map_err(lp_err(0))?;
    let mut sol = optimal(solver.optimize().map_err(lp_err(0))?, 0)?;
    let z_lp = sol.objective;
    let mut trace = vec![z_lp];
    let mut cuts = Vec::new();
    let mut seen: HashSet<ArcCut> = HashSet::new();
    let mut cuts_added = BTreeMap::new();
    let mut cuts_dropped = 0;
    let mut rounds = 0;
    let mut stop = StopReason::RoundLimit;
    let opts = SeparatorOptions { lift_order: settings.lift_order, min_violation: settings.min_violation, ..Default::default() };
    for round in 1..=settings.max_rounds {
        let rc = settings.use_reduced_costs.then_some(sol.reduced_costs.as_slice());
        let mut fresh = Vec::new();
        for arc in 0..idx.arcs {
            match separate_arc(inst, arc, &sol.values, rc, &opts)? {
                ArcOutcome::Cut(cut) => {
                    if seen.insert(cut.clone()) {
                        fresh.push(cut);
                    }
                }
                ArcOutcome::Dropped => cuts_dropped += 1,
                ArcOutcome::Member | ArcOutcome::Redundant => {}
            }
        }
        if fresh.is_empty() {
            stop = StopReason::NoCuts;
            break;
        }
        solver.add_rows(fresh.iter().map(|c| c.row(&idx))).map_err(lp_err(round))?;
        for c in &fresh {
            *cuts_added.entry(c.provenance).or_insert(0) += 1;
        }
        cuts.extend(fresh);
        let before = sol.objective;
        sol = optimal(solver.optimize().map_err(lp_err(round))?, round)?;
        trace.push(sol.objective);
        rounds = round;
        if sol.objective - before < settings.min_improvement * before.abs().max(1e-9) {
            stop = StopReason::SmallImprovement;
            break;
        }
    }
    let z_root = sol.objective;
    let z_ub = match settings.upper_bound_passes {
        Some(p) => Some(upper_bound(inst, p)?.value),
        None => None,
    };
    Ok(RootLoopReport {
        z_lp,
        z_root,
        rounds,
        stop,
        cuts_added,
        cuts_dropped,
        trace,
        z_ub,
        gap_closed: z_ub.and_then(|u| gap_closed(z_lp, z_root, u)),
        cuts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netdesign::{generate, profile, Arc, Commodity, Facility, GeneratorSettings, RoutingCosts};

    fn one_arc(demands: &[i64], capacity: i64, cost: f64) -> NetworkInstance {
        NetworkInstance::new(
            2,
            vec![Arc { tail: 0, head: 1, existing: 0, install_costs: None }],
            vec![Facility { capacity, cost }],
            demands
                .iter()
                .map(|&demand| Commodity { source: 0, sink: 1, demand, routing_costs: RoutingCosts::Uniform(0.0) })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_arc_relaxation() {
        let inst = one_arc(&[10], 130, 10000.0);
        let sol = crate::lp::solve(&lp_relaxation(&inst)).unwrap();
        assert!((sol.objective - 10000.0 * 10.0 / 130.0).abs() < 1e-7);
        let rep = root_cut_loop(&inst, &RootLoopSettings::default()).unwrap();
        assert_eq!(rep.rounds, 1);
        assert!((rep.z_root - 10000.0).abs() < 1e-6);
        assert_eq!(rep.z_ub, Some(10000.0));
        assert!((rep.gap_closed.unwrap() - 100.0).abs() < 1e-6);
    }

    #[test]
    fn integral_relaxation() {
        let inst = one_arc(&[130], 130, 10000.0);
        let rep = root_cut_loop(&inst, &RootLoopSettings::default()).unwrap();
        assert_eq!(rep.rounds, 0);
        assert_eq!(rep.stop, StopReason::NoCuts);
        assert_eq!(rep.gap_closed, None);
    }

    #[test]
    fn embedded_first_example() {
        let inst = one_arc(&[11, 15, 24, 50], 100, 1.0);
        let values = [0.3, 0.5, 0.9, 0.1, 0.38];
        match separate_arc(&inst, 0, &values, None, &SeparatorOptions::default()).unwrap() {
            ArcOutcome::Cut(c) => {
                assert_eq!(c.cut.to_cut().render(), "x3 <= y");
                assert_eq!(c.provenance, Provenance::ClosedFormP5);
                assert!(c.is_valid(&inst));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unreachable_sink() {
        let mut inst = one_arc(&[10], 130, 1.0);
        inst.commodities[0].source = 1;
        inst.commodities[0].sink = 0;
        assert_eq!(root_cut_loop(&inst, &RootLoopSettings::default()), Err(NetworkError::Infeasible));
    }

    #[test]
    fn generated_instance_closes_gap() {
        let inst = generate(42, &profile("3_1_1").unwrap(), &GeneratorSettings::default()).unwrap();
        let rep = root_cut_loop(&inst, &RootLoopSettings::default()).unwrap();
        assert!(rep.rounds >= 1);
        assert!(rep.z_root > rep.z_lp);
        assert!(rep.z_root <= rep.z_ub.unwrap() + 1e-6);
        assert!(rep.cuts.iter().all(|c| c.is_valid(&inst)));
        assert!(rep.trace.windows(2).all(|w| w[1] >= w[0] - 1e-7 * w[0].abs().max(1.0)));
    }

    #[test]
    fn gap_formula() {
        assert_eq!(gap_closed(100.0, 150.0, 200.0), Some(50.0));
        assert_eq!(gap_closed(100.0, 200.0, 200.0), Some(100.0));
        assert_eq!(gap_closed(100.0, 100.0, 200.0), Some(0.0));
        assert_eq!(gap_closed(100.0, 100.0, 100.0), None);
    }
}
