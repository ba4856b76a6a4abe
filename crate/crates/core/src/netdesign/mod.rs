//! Unsplittable capacitated network design: instances, a seeded generator, the LP
//! relaxation, a root cutting-plane loop with the arc-set separator, and an upper bound.

mod bound;
mod generate;
mod relax;

use petgraph::graph::NodeIndex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bound::{upper_bound, Routing};
pub use generate::{generate, profile, GeneratorSettings, Profile, PROFILES};
pub use relax::{
    arc_set, gap_closed, lp_relaxation, root_cut_loop, separate_arc, ArcCut, ArcOutcome, RootLoopReport, RootLoopSettings, StopReason, VarIndex,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("arc {arc} references node {node}, but there are {nodes} nodes")]
    BadNode { arc: usize, node: usize, nodes: usize },
    #[error("arc {arc} repeats the pair ({tail}, {head})")]
    DuplicateArc { arc: usize, tail: usize, head: usize },
    #[error("arc {0} is a self loop")]
    SelfLoop(usize),
    #[error("commodity {0} has a nonpositive demand")]
    NonPositiveDemand(usize),
    #[error("commodity {commodity} has endpoint {node} outside the graph")]
    BadEndpoint { commodity: usize, node: usize },
    #[error("commodity {0} has the same source and sink")]
    SameEndpoints(usize),
    #[error("facility {0} has a nonpositive capacity")]
    NonPositiveCapacity(usize),
    #[error("there are no facilities")]
    NoFacilities,
    #[error("arc {arc} lists {got} install costs for {expected} facilities")]
    InstallCosts { arc: usize, got: usize, expected: usize },
    #[error("commodity {commodity} lists {got} routing costs for {expected} arcs")]
    RoutingCosts { commodity: usize, got: usize, expected: usize },
    #[error("commodity {0} cannot reach its sink")]
    Disconnected(usize),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("no connected graph found after {0} attempts")]
    GenerationFailed(usize),
    #[error("LP relaxation is infeasible")]
    Infeasible,
    #[error("LP failure in round {round}: {message}")]
    Lp { round: usize, message: String },
    #[error("separation failed on arc {arc}: {message}")]
    Separation { arc: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub capacity: i64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    #[serde(default)]
    pub existing: i64,
    /// Cost per module of each facility; the facility's base cost when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub install_costs: Option<Vec<f64>>,
}

/// Per-unit routing cost of a commodity, one value for every arc or one per arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RoutingCosts {
    Uniform(f64),
    PerArc(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub source: usize,
    pub sink: usize,
    pub demand: i64,
    pub routing_costs: RoutingCosts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct NetworkInstance {
    pub nodes: usize,
    pub arcs: Vec<Arc>,
    pub facilities: Vec<Facility>,
    pub commodities: Vec<Commodity>,
}

#[derive(Deserialize)]
struct RawNetwork {
    nodes: usize,
    arcs: Vec<Arc>,
    facilities: Vec<Facility>,
    commodities: Vec<Commodity>,
}

impl TryFrom<RawNetwork> for NetworkInstance {
    type Error = NetworkError;

    fn try_from(raw: RawNetwork) -> Result<Self, NetworkError> {
        NetworkInstance::new(raw.nodes, raw.arcs, raw.facilities, raw.commodities)
    }
}

impl NetworkInstance {
    pub fn new(
        nodes: usize,
        arcs: Vec<Arc>,
        facilities: Vec<Facility>,
        commodities: Vec<Commodity>,
    ) -> Result<Self, NetworkError> {
        if facilities.is_empty() {
            return Err(NetworkError::NoFacilities);
        }
        if let Some(t) = facilities.iter().position(|f| f.capacity <= 0) {
            return Err(NetworkError::NonPositiveCapacity(t));
        }
        let mut seen = std::collections::HashSet::new();
        for (e, arc) in arcs.iter().enumerate() {
            for node in [arc.tail, arc.head] {
                if node >= nodes {
                    return Err(NetworkError::BadNode { arc: e, node, nodes });
                }
            }
            if arc.tail == arc.head {
                return Err(NetworkError::SelfLoop(e));
            }
            if !seen.insert((arc.tail, arc.head)) {
                return Err(NetworkError::DuplicateArc { arc: e, tail: arc.tail, head: arc.head });
            }
            if let Some(costs) = &arc.install_costs {
                if costs.len() != facilities.len() {
                    return Err(NetworkError::InstallCosts { arc: e, got: costs.len(), expected: facilities.len() });
                }
            }
        }
        for (q, k) in commodities.iter().enumerate() {
            if k.demand <= 0 {
                return Err(NetworkError::NonPositiveDemand(q));
            }
            for node in [k.source, k.sink] {
                if node >= nodes {
                    return Err(NetworkError::BadEndpoint { commodity: q, node });
                }
            }
            if k.source == k.sink {
                return Err(NetworkError::SameEndpoints(q));
            }
            if let RoutingCosts::PerArc(w) = &k.routing_costs {
                if w.len() != arcs.len() {
                    return Err(NetworkError::RoutingCosts { commodity: q, got: w.len(), expected: arcs.len() });
                }
            }
        }
        Ok(Self { nodes, arcs, facilities, commodities })
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn capacities(&self) -> Vec<i64> {
        self.facilities.iter().map(|f| f.capacity).collect()
    }

    pub fn demands(&self) -> Vec<i64> {
        self.commodities.iter().map(|k| k.demand).collect()
    }

    pub fn install_cost(&self, arc: usize, facility: usize) -> f64 {
        match &self.arcs[arc].install_costs {
            Some(c) => c[facility],
            None => self.facilities[facility].cost,
        }
    }

    pub fn routing_cost(&self, commodity: usize, arc: usize) -> f64 {
        match &self.commodities[commodity].routing_costs {
            RoutingCosts::Uniform(w) => *w,
            RoutingCosts::PerArc(w) => w[arc],
        }
    }

    pub(crate) fn graph(&self) -> petgraph::graph::DiGraph<(), usize> {
        let mut g = petgraph::graph::DiGraph::new();
        let ids: Vec<_> = (0..self.nodes).map(|_| g.add_node(())).collect();
        for (e, arc) in self.arcs.iter().enumerate() {
            g.add_edge(ids[arc.tail], ids[arc.head], e);
        }
        g
    }

    /// Fails on the first commodity whose sink is unreachable.
    pub fn check_connected(&self) -> Result<(), NetworkError> {
        let g = self.graph();
        for (q, k) in self.commodities.iter().enumerate() {
            let reach = petgraph::algo::has_path_connecting(&g, NodeIndex::new(k.source), NodeIndex::new(k.sink), None);
            if !reach {
                return Err(NetworkError::Disconnected(q));
            }
        }
        Ok(())
    }
}
