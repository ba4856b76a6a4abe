use std::collections::HashSet;

use petgraph::graph::NodeIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Arc, Commodity, Facility, NetworkError, NetworkInstance, RoutingCosts};

/// A module catalogue: capacities with their costs, largest first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Profile {
    pub name: &'static str,
    pub capacities: &'static [i64],
    pub costs: &'static [f64],
}

const fn p(name: &'static str, capacities: &'static [i64], costs: &'static [f64]) -> Profile {
    Profile { name, capacities, costs }
}

/// The 27 module catalogues of the generated test set.
pub const PROFILES: [Profile; 27] = [
    p("1_1_1", &[130], &[10000.0]),
    p("2_1_1", &[130, 50], &[10000.0, 5000.0]),
    p("3_1_1", &[130, 50, 20], &[10000.0, 5000.0, 2500.0]),
    p("1_1_2", &[130], &[18000.0]),
    p("2_1_2", &[130, 50], &[18000.0, 9000.0]),
    p("3_1_2", &[130, 50, 20], &[18000.0, 9000.0, 5000.0]),
    p("1_1_3", &[130], &[25000.0]),
    p("2_1_3", &[130, 50], &[25000.0, 13000.0]),
    p("3_1_3", &[130, 50, 20], &[25000.0, 13000.0, 9000.0]),
    p("1_2_1", &[170], &[10000.0]),
    p("2_2_1", &[170, 70], &[10000.0, 5000.0]),
    p("3_2_1", &[170, 70, 30], &[10000.0, 5000.0, 2500.0]),
    p("1_2_2", &[170], &[18000.0]),
    p("2_2_2", &[170, 70], &[18000.0, 9000.0]),
    p("3_2_2", &[170, 70, 30], &[18000.0, 9000.0, 5000.0]),
    p("1_2_3", &[170], &[25000.0]),
    p("2_2_3", &[170, 70], &[25000.0, 13000.0]),
    p("3_2_3", &[170, 70, 30], &[25000.0, 13000.0, 9000.0]),
    p("1_3_1", &[200], &[10000.0]),
    p("2_3_1", &[200, 80], &[10000.0, 5000.0]),
    p("3_3_1", &[200, 80, 30], &[10000.0, 5000.0, 2500.0]),
    p("1_3_2", &[200], &[18000.0]),
    p("2_3_2", &[200, 80], &[18000.0, 9000.0]),
    p("3_3_2", &[200, 80, 30], &[18000.0, 9000.0, 5000.0]),
    // listed with capacity 170 in the source table, unlike its 200-unit neighbours
    p("1_3_3", &[170], &[25000.0]),
    p("2_3_3", &[200, 80], &[25000.0, 13000.0]),
    p("3_3_3", &[200, 80, 30], &[25000.0, 13000.0, 9000.0]),
];

pub fn profile(name: &str) -> Result<Profile, NetworkError> {
    PROFILES.iter().find(|p| p.name == name).copied().ok_or_else(|| NetworkError::UnknownProfile(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSettings {
    pub nodes: usize,
    pub commodities: usize,
    /// Target arc count as a multiple of the node count.
    pub arc_factor: usize,
    pub min_demand: i64,
    pub max_demand: i64,
    pub max_routing_cost: i64,
    pub retries: usize,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        Self { nodes: 12, commodities: 5, arc_factor: 3, min_demand: 10, max_demand: 190, max_routing_cost: 10, retries: 100 }
    }
}

/// Random arborescence plus extra arcs, then commodities with reachable sinks.
pub fn generate(seed: u64, profile: &Profile, settings: &GeneratorSettings) -> Result<NetworkInstance, NetworkError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = settings.nodes;
    let facilities: Vec<Facility> =
        profile.capacities.iter().zip(profile.costs).map(|(&capacity, &cost)| Facility { capacity, cost }).collect();
    if n < 2 {
        return Err(NetworkError::GenerationFailed(0));
    }
    for _ in 0..settings.retries {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut seen = HashSet::new();
        for k in 1..n {
            let parent = order[rng.gen_range(0..k)];
            pairs.push((parent, order[k]));
            seen.insert((parent, order[k]));
        }
        let target = (settings.arc_factor * n).min(n * (n - 1));
        while pairs.len() < target {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && seen.insert((u, v)) {
                pairs.push((u, v));
            }
        }
        let arcs: Vec<Arc> = pairs.iter().map(|&(tail, head)| Arc { tail, head, existing: 0, install_costs: None }).collect();
        let probe = NetworkInstance::new(n, arcs.clone(), facilities.clone(), Vec::new())?;
        let g = probe.graph();
        // routing costs are drawn per arc and shared across commodities
        let w: Vec<f64> = (0..arcs.len()).map(|_| rng.gen_range(1..=settings.max_routing_cost) as f64).collect();
        let mut commodities = Vec::new();
        let mut attempts = 0;
        while commodities.len() < settings.commodities && attempts < settings.retries * settings.commodities {
            attempts += 1;
            let source = rng.gen_range(0..n);
            let sink = rng.gen_range(0..n);
            if source == sink || !petgraph::algo::has_path_connecting(&g, NodeIndex::new(source), NodeIndex::new(sink), None) {
                continue;
            }
            let demand = rng.gen_range(settings.min_demand..=settings.max_demand);
            commodities.push(Commodity { source, sink, demand, routing_costs: RoutingCosts::PerArc(w.clone()) });
        }
        if commodities.len() < settings.commodities {
            continue;
        }
        return NetworkInstance::new(n, arcs, facilities, commodities);
    }
    Err(NetworkError::GenerationFailed(settings.retries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        let p = profile("2_1_1").unwrap();
        assert_eq!(p.capacities, &[130, 50]);
        assert_eq!(p.costs, &[10000.0, 5000.0]);
        assert_eq!(profile("1_3_1").unwrap().capacities, &[200]);
        assert_eq!(profile("3_1_1").unwrap().costs, &[10000.0, 5000.0, 2500.0]);
        assert!(profile("4_1_1").is_err());
        let names: HashSet<_> = PROFILES.iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 27);
    }

    #[test]
    fn deterministic() {
        let p = profile("3_1_1").unwrap();
        let s = GeneratorSettings::default();
        let a = serde_json::to_string(&generate(42, &p, &s).unwrap()).unwrap();
        let b = serde_json::to_string(&generate(42, &p, &s).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, serde_json::to_string(&generate(43, &p, &s).unwrap()).unwrap());
    }

    #[test]
    fn generated_shape() {
        let inst = generate(1, &profile("2_2_1").unwrap(), &GeneratorSettings::default()).unwrap();
        assert_eq!(inst.nodes, 12);
        assert_eq!(inst.num_arcs(), 36);
        assert_eq!(inst.commodities.len(), 5);
        assert!(inst.commodities.iter().all(|k| (10..=190).contains(&k.demand)));
        inst.check_connected().unwrap();
    }
}
