use std::collections::HashMap;

use petgraph::graph::NodeIndex;
use serde::{Deserialize, Serialize};

use super::{NetworkError, NetworkInstance};
use crate::knapsack::cover_cost;

/// A feasible integral design: one path per commodity and modules per arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Routing {
    /// Arc indices along each commodity's path.
    pub paths: Vec<Vec<usize>>,
    /// Modules of each facility installed on each arc.
    pub modules: Vec<Vec<i64>>,
    pub value: f64,
}

struct Costing<'a> {
    inst: &'a NetworkInstance,
    caps: Vec<i64>,
    cache: HashMap<(usize, i64), f64>,
}

impl Costing<'_> {
    fn install(&mut self, arc: usize, load: i64) -> f64 {
        let deficit = load - self.inst.arcs[arc].existing;
        if deficit <= 0 {
            return 0.0;
        }
        if let Some(&v) = self.cache.get(&(arc, deficit)) {
            return v;
        }
        let beta: Vec<f64> = (0..self.caps.len()).map(|t| self.inst.install_cost(arc, t)).collect();
        let v = cover_cost(&beta, &self.caps, deficit).0;
        self.cache.insert((arc, deficit), v);
        v
    }
}

/// Cheapest path for commodity `q` when arc `e` costs `arc_cost(e)`.
fn cheapest_path(inst: &NetworkInstance, q: usize, mut arc_cost: impl FnMut(usize) -> f64) -> Option<Vec<usize>> {
    let g = inst.graph();
    let k = &inst.commodities[q];
    let costs: Vec<f64> = (0..inst.num_arcs()).map(&mut arc_cost).collect();
    let (_, nodes) =
        petgraph::algo::astar(&g, NodeIndex::new(k.source), |n| n.index() == k.sink, |e| costs[*e.weight()], |_| 0.0)?;
    let arc_of: HashMap<(usize, usize), usize> =
        inst.arcs.iter().enumerate().map(|(e, a)| ((a.tail, a.head), e)).collect();
    Some(nodes.windows(2).map(|w| arc_of[&(w[0].index(), w[1].index())]).collect())
}

/// Routes every commodity on its routing-cost shortest path, covers each arc with the
/// cheapest modules, then reroutes commodities one at a time against the others' loads
/// for `passes` sweeps. Every intermediate design is feasible, so the value bounds the optimum.
pub fn upper_bound(inst: &NetworkInstance, passes: usize) -> Result<Routing, NetworkError> {
    let nq = inst.commodities.len();
    let ne = inst.num_arcs();
    let demands = inst.demands();
    let mut costing = Costing { inst, caps: inst.capacities(), cache: HashMap::new() };
    let mut paths = Vec::with_capacity(nq);
    for q in 0..nq {
        paths.push(cheapest_path(inst, q, |e| inst.routing_cost(q, e)).ok_or(NetworkError::Disconnected(q))?);
    }
    let mut load = vec![0i64; ne];
    for (q, path) in paths.iter().enumerate() {
        for &e in path {
            load[e] += demands[q];
        }
    }
    for _ in 0..passes {
        let mut changed = false;
        for q in 0..nq {
            for &e in &paths[q] {
                load[e] -= demands[q];
            }
            let marginal = |c: &mut Costing, e: usize| {
                inst.routing_cost(q, e) * demands[q] as f64 + c.install(e, load[e] + demands[q]) - c.install(e, load[e])
            };
            let old: f64 = paths[q].iter().map(|&e| marginal(&mut costing, e)).sum();
            let best = cheapest_path(inst, q, |e| marginal(&mut costing, e)).expect("path existed before");
            let new: f64 = best.iter().map(|&e| marginal(&mut costing, e)).sum();
            if new < old - 1e-9 {
                paths[q] = best;
                changed = true;
            }
            for &e in &paths[q] {
                load[e] += demands[q];
            }
        }
        if !changed {
            break;
        }
    }
    let mut value = 0.0;
    for (q, path) in paths.iter().enumerate() {
        value += path.iter().map(|&e| inst.routing_cost(q, e) * demands[q] as f64).sum::<f64>();
    }
    let mut modules = Vec::with_capacity(ne);
    for (e, &l) in load.iter().enumerate() {
        let deficit = l - inst.arcs[e].existing;
        let beta: Vec<f64> = (0..costing.caps.len()).map(|t| inst.install_cost(e, t)).collect();
        let (cost, y) = cover_cost(&beta, &costing.caps, deficit);
        value += cost;
        modules.push(y);
    }
    Ok(Routing { paths, modules, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netdesign::{Arc, Commodity, Facility, RoutingCosts};

    fn single(cost: f64) -> NetworkInstance {
        NetworkInstance::new(
            2,
            vec![Arc { tail: 0, head: 1, existing: 0, install_costs: None }],
            vec![Facility { capacity: 130, cost }],
            vec![Commodity { source: 0, sink: 1, demand: 10, routing_costs: RoutingCosts::Uniform(0.0) }],
        )
        .unwrap()
    }

    #[test]
    fn one_module() {
        let r = upper_bound(&single(10000.0), 2).unwrap();
        assert_eq!(r.value, 10000.0);
        assert_eq!(r.modules, vec![vec![1]]);
    }

    #[test]
    fn free_modules() {
        let mut inst = single(0.0);
        inst.commodities[0].routing_costs = RoutingCosts::Uniform(3.0);
        assert_eq!(upper_bound(&inst, 2).unwrap().value, 30.0);
    }

    #[test]
    fn rerouting_shares_modules() {
        // the direct arc is shortest for the first commodity, but sharing the second one's module is cheaper
        let arcs = vec![
            Arc { tail: 0, head: 3, existing: 0, install_costs: None },
            Arc { tail: 1, head: 3, existing: 0, install_costs: None },
            Arc { tail: 0, head: 1, existing: 100, install_costs: None },
        ];
        let w = RoutingCosts::Uniform(1.0);
        let inst = NetworkInstance::new(
            4,
            arcs,
            vec![Facility { capacity: 100, cost: 1000.0 }],
            vec![
                Commodity { source: 0, sink: 3, demand: 40, routing_costs: w.clone() },
                Commodity { source: 1, sink: 3, demand: 40, routing_costs: w },
            ],
        )
        .unwrap();
        assert_eq!(upper_bound(&inst, 0).unwrap().value, 2080.0);
        let improved = upper_bound(&inst, 3).unwrap();
        assert_eq!(improved.value, 1120.0);
        assert_eq!(improved.paths[0], vec![2, 1]);
    }
}
