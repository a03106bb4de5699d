//! Network topology, traffic demands, and the transmission-reach model.

use std::collections::BinaryHeap;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a node within a [`Topology`].
pub type NodeId = usize;
/// Dense index of a unidirectional link within a [`Topology`].
pub type LinkId = usize;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("link entry {index} ({from} -> {to}): unknown node {node}")]
    DanglingEndpoint {
        index: usize,
        from: String,
        to: String,
        node: String,
    },
    #[error("link entry {index} ({from} -> {to}): length must be positive, got {length}")]
    NonPositiveLength {
        index: usize,
        from: String,
        to: String,
        length: f64,
    },
    #[error("link entry {index}: self-loop at node {node}")]
    SelfLoop { index: usize, node: String },
    #[error("link entry {index}: duplicate directed link {from} -> {to}")]
    DuplicateLink {
        index: usize,
        from: String,
        to: String,
    },
    #[error("duplicate node name {0}")]
    DuplicateNode(String),
    #[error("demand generation needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("demand count must be at least 1")]
    EmptyDemandSet,
    #[error("invalid rate range [{0}, {1}]")]
    InvalidRateRange(f64, f64),
    #[error("no path from node {from} to node {to}")]
    Unreachable { from: String, to: String },
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("demand file line {line}: {message}")]
    DemandFile { line: usize, message: String },
    #[error("unknown builtin topology {0:?} (available: nsf24, sym24)")]
    UnknownBuiltin(String),
}

/// A unidirectional fiber link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub source: NodeId,
    pub target: NodeId,
    pub length_km: f64,
}

/// Directed graph of nodes and length-weighted links.
///
/// Link ids are dense (`0..link_count()`) so they can index variable arrays
/// directly. Bidirectional entries in topology files expand to two
/// unidirectional links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    nodes: Vec<String>,
    links: Vec<Link>,
}

/// On-disk schema for one link entry.
#[derive(Debug, Serialize, Deserialize)]
struct LinkEntry {
    from: String,
    to: String,
    length_km: f64,
    #[serde(default = "default_true")]
    bidirectional: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
struct TopologyFile {
    nodes: Vec<String>,
    links: Vec<LinkEntry>,
}

impl Topology {
    /// Builds a topology from node names and `(from, to, length, bidirectional)`
    /// entries, expanding bidirectional entries into link pairs.
    pub fn from_entries(
        nodes: Vec<String>,
        entries: &[(String, String, f64, bool)],
    ) -> Result<Self, NetworkError> {
        for (i, name) in nodes.iter().enumerate() {
            if nodes[..i].contains(name) {
                return Err(NetworkError::DuplicateNode(name.clone()));
            }
        }
        let index_of = |name: &str| nodes.iter().position(|n| n == name);
        let mut links: Vec<Link> = Vec::new();
        let mut seen: Vec<(NodeId, NodeId)> = Vec::new();
        for (i, (from, to, length, bidir)) in entries.iter().enumerate() {
            let s = index_of(from).ok_or_else(|| NetworkError::DanglingEndpoint {
                index: i,
                from: from.clone(),
                to: to.clone(),
                node: from.clone(),
            })?;
            let t = index_of(to).ok_or_else(|| NetworkError::DanglingEndpoint {
                index: i,
                from: from.clone(),
                to: to.clone(),
                node: to.clone(),
            })?;
            if s == t {
                return Err(NetworkError::SelfLoop {
                    index: i,
                    node: from.clone(),
                });
            }
            if !(*length > 0.0) {
                return Err(NetworkError::NonPositiveLength {
                    index: i,
                    from: from.clone(),
                    to: to.clone(),
                    length: *length,
                });
            }
            let mut push = |s: NodeId, t: NodeId| -> Result<(), NetworkError> {
                if seen.contains(&(s, t)) {
                    return Err(NetworkError::DuplicateLink {
                        index: i,
                        from: nodes[s].clone(),
                        to: nodes[t].clone(),
                    });
                }
                seen.push((s, t));
                links.push(Link {
                    id: links.len(),
                    source: s,
                    target: t,
                    length_km: *length,
                });
                Ok(())
            };
            push(s, t)?;
            if *bidir {
                push(t, s)?;
            }
        }
        Ok(Topology { nodes, links })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Links entering `node`, in link-id order.
    pub fn incoming(&self, node: NodeId) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(move |l| l.target == node)
    }

    /// Links leaving `node`, in link-id order.
    pub fn outgoing(&self, node: NodeId) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(move |l| l.source == node)
    }

    /// Serializes to the documented topology JSON schema. Every link is
    /// written as a unidirectional entry so a reload reproduces the exact
    /// same structure, including link ids.
    pub fn to_json(&self) -> String {
        let file = TopologyFile {
            nodes: self.nodes.clone(),
            links: self
                .links
                .iter()
                .map(|l| LinkEntry {
                    from: self.nodes[l.source].clone(),
                    to: self.nodes[l.target].clone(),
                    length_km: l.length_km,
                    bidirectional: false,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("topology serialization cannot fail")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, NetworkError> {
        let file: TopologyFile =
            serde_json::from_str(text).map_err(|source| NetworkError::Parse {
                path: origin.to_string(),
                source,
            })?;
        let entries: Vec<(String, String, f64, bool)> = file
            .links
            .into_iter()
            .map(|e| (e.from, e.to, e.length_km, e.bidirectional))
            .collect();
        Topology::from_entries(file.nodes, &entries)
    }
}

/// Loads and validates a topology file (JSON schema documented in the README).
pub fn load_topology(path: impl AsRef<Path>) -> Result<Topology, NetworkError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| NetworkError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Topology::from_json(&text, &path.display().to_string())
}

/// Returns one of the bundled benchmark topologies: `nsf24` or `sym24`.
pub fn builtin_topology(name: &str) -> Result<Topology, NetworkError> {
    let text = match name {
        "nsf24" => include_str!("../data/nsf24.json"),
        "sym24" => include_str!("../data/sym24.json"),
        other => return Err(NetworkError::UnknownBuiltin(other.to_string())),
    };
    Topology::from_json(text, name)
}

/// A unidirectional traffic request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub id: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub rate_gbps: f64,
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "d{} ({} -> {}, {:.3} Gbps)",
            self.id, self.source, self.target, self.rate_gbps
        )
    }
}

/// Draws `count` demands between distinct uniformly random node pairs with
/// rates uniform in `rate_range`. Deterministic for a given seed.
pub fn generate_demands(
    seed: u64,
    count: usize,
    node_count: usize,
    rate_range: (f64, f64),
) -> Result<Vec<Demand>, NetworkError> {
    if node_count < 2 {
        return Err(NetworkError::TooFewNodes(node_count));
    }
    if count == 0 {
        return Err(NetworkError::EmptyDemandSet);
    }
    let (lo, hi) = rate_range;
    if !(lo > 0.0) || hi < lo {
        return Err(NetworkError::InvalidRateRange(lo, hi));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut demands = Vec::with_capacity(count);
    for id in 0..count {
        let source = rng.random_range(0..node_count);
        let mut target = rng.random_range(0..node_count - 1);
        if target >= source {
            target += 1;
        }
        let rate_gbps = rng.random_range(lo..=hi);
        demands.push(Demand {
            id,
            source,
            target,
            rate_gbps,
        });
    }
    Ok(demands)
}

/// Writes demands in the documented CSV schema (`id,src,dst,gbps`).
pub fn demands_to_csv(topology: &Topology, demands: &[Demand]) -> String {
    let mut out = String::from("id,src,dst,gbps\n");
    for d in demands {
        out.push_str(&format!(
            "{},{},{},{}\n",
            d.id,
            topology.node_name(d.source),
            topology.node_name(d.target),
            d.rate_gbps
        ));
    }
    out
}

/// Parses the demand CSV schema, resolving node names against `topology`.
pub fn demands_from_csv(topology: &Topology, text: &str) -> Result<Vec<Demand>, NetworkError> {
    let mut demands = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "id,src,dst,gbps" {
                return Err(NetworkError::DemandFile {
                    line: 1,
                    message: format!("expected header 'id,src,dst,gbps', got {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| NetworkError::DemandFile {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad demand id {:?}", fields[0])))?;
        let source = topology
            .node_id(fields[1])
            .ok_or_else(|| err(format!("unknown node {:?}", fields[1])))?;
        let target = topology
            .node_id(fields[2])
            .ok_or_else(|| err(format!("unknown node {:?}", fields[2])))?;
        let rate_gbps: f64 = fields[3]
            .parse()
            .map_err(|_| err(format!("bad rate {:?}", fields[3])))?;
        if source == target {
            return Err(err("demand source equals destination".into()));
        }
        if !(rate_gbps > 0.0) {
            return Err(err(format!("rate must be positive, got {rate_gbps}")));
        }
        demands.push(Demand {
            id,
            source,
            target,
            rate_gbps,
        });
    }
    Ok(demands)
}

/// Linear-regression transmission-reach model: `R(b, 1/eta) = alpha/b +
/// beta*(1/eta) + gamma` in km, with `b` in Gbps and `eta` in bit/symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ReachModel {
    fn default() -> Self {
        ReachModel {
            alpha: 18600.0,
            beta: 8360.0,
            gamma: -250.0,
        }
    }
}

impl ReachModel {
    /// Maximum transparent distance for bit rate `b_gbps` at inverse spectral
    /// efficiency `inv_eta` (symbol/bit). May be negative for extreme inputs;
    /// feasibility checks clamp at zero.
    pub fn reach(&self, b_gbps: f64, inv_eta: f64) -> f64 {
        self.alpha / b_gbps + self.beta * inv_eta + self.gamma
    }
}

/// Minimum-total-length directed path distance via Dijkstra.
///
/// Used for demand ordering and big-M bounds only; returns an error when the
/// destination is unreachable.
pub fn shortest_path_length(
    topology: &Topology,
    source: NodeId,
    target: NodeId,
) -> Result<f64, NetworkError> {
    if source >= topology.node_count() {
        return Err(NetworkError::UnknownNode(source));
    }
    if target >= topology.node_count() {
        return Err(NetworkError::UnknownNode(target));
    }
    let mut dist = vec![f64::INFINITY; topology.node_count()];
    dist[source] = 0.0;
    // Max-heap over negated distance; ties broken on node id for determinism.
    let mut heap: BinaryHeap<(std::cmp::Reverse<ordered::F64>, usize)> = BinaryHeap::new();
    heap.push((std::cmp::Reverse(ordered::F64(0.0)), source));
    while let Some((std::cmp::Reverse(ordered::F64(d)), node)) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        if node == target {
            return Ok(d);
        }
        for link in topology.outgoing(node) {
            let nd = d + link.length_km;
            if nd < dist[link.target] {
                dist[link.target] = nd;
                heap.push((std::cmp::Reverse(ordered::F64(nd)), link.target));
            }
        }
    }
    Err(NetworkError::Unreachable {
        from: topology.node_name(source).to_string(),
        to: topology.node_name(target).to_string(),
    })
}

mod ordered {
    /// Total-ordered f64 wrapper for heap keys (no NaNs reach it).
    #[derive(PartialEq, Clone, Copy, Debug)]
    pub struct F64(pub f64);
    impl Eq for F64 {}
    impl PartialOrd for F64 {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for F64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3() -> Topology {
        Topology::from_entries(
            vec!["A".into(), "B".into(), "C".into()],
            &[
                ("A".into(), "B".into(), 1000.0, false),
                ("B".into(), "C".into(), 1000.0, false),
            ],
        )
        .unwrap()
    }

    #[test]
    fn nsf24_expands_to_86_links() {
        let t = builtin_topology("nsf24").unwrap();
        assert_eq!(t.node_count(), 24);
        assert_eq!(t.link_count(), 86);
        assert!(t.links().iter().all(|l| l.length_km > 0.0));
    }

    #[test]
    fn sym24_expands_to_110_links_all_1330() {
        let t = builtin_topology("sym24").unwrap();
        assert_eq!(t.node_count(), 24);
        assert_eq!(t.link_count(), 110);
        assert!(t.links().iter().all(|l| l.length_km == 1330.0));
    }

    #[test]
    fn builtin_topologies_are_connected() {
        for name in ["nsf24", "sym24"] {
            let t = builtin_topology(name).unwrap();
            for n in 1..t.node_count() {
                shortest_path_length(&t, 0, n).unwrap();
                shortest_path_length(&t, n, 0).unwrap();
            }
        }
    }

    #[test]
    fn single_directed_link() {
        let t = Topology::from_entries(
            vec!["A".into(), "B".into()],
            &[("A".into(), "B".into(), 100.0, false)],
        )
        .unwrap();
        assert_eq!(t.link_count(), 1);
        assert_eq!(t.link(0).length_km, 100.0);
    }

    #[test]
    fn load_rejects_dangling_endpoint() {
        let err = Topology::from_json(
            r#"{"nodes": ["A"], "links": [{"from": "A", "to": "B", "length_km": 1.0}]}"#,
            "inline",
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::DanglingEndpoint { index: 0, .. }));
    }

    #[test]
    fn load_rejects_non_positive_length() {
        let err = Topology::from_json(
            r#"{"nodes": ["A", "B"], "links": [{"from": "A", "to": "B", "length_km": 0.0}]}"#,
            "inline",
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::NonPositiveLength { .. }));
    }

    #[test]
    fn load_rejects_self_loop_and_duplicates() {
        let err = Topology::from_json(
            r#"{"nodes": ["A", "B"], "links": [{"from": "A", "to": "A", "length_km": 1.0}]}"#,
            "inline",
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::SelfLoop { .. }));

        let err = Topology::from_json(
            r#"{"nodes": ["A", "B"], "links": [
                {"from": "A", "to": "B", "length_km": 1.0},
                {"from": "B", "to": "A", "length_km": 2.0}]}"#,
            "inline",
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::DuplicateLink { .. }));
    }

    #[test]
    fn parse_error_carries_location() {
        let err = Topology::from_json("{not json", "broken.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("broken.json"), "{msg}");
    }

    #[test]
    fn topology_round_trips_through_json() {
        let t = builtin_topology("nsf24").unwrap();
        let again = Topology::from_json(&t.to_json(), "round-trip").unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn reach_matches_hand_evaluation() {
        let m = ReachModel::default();
        assert!((m.reach(100.0, 0.5) - 4116.0).abs() < 1e-9);
        assert!((m.reach(40.0, 0.25) - 2305.0).abs() < 1e-9);
        assert!(m.reach(100.0, 0.5) > m.reach(100.0, 0.1));
    }

    #[test]
    fn reach_slope_in_inv_eta_is_beta() {
        let m = ReachModel::default();
        let h = 1e-4;
        let slope = (m.reach(40.0, 0.3 + h) - m.reach(40.0, 0.3)) / h;
        assert!((slope - m.beta).abs() / m.beta < 1e-9);
    }

    #[test]
    fn demand_generation_is_deterministic() {
        let a = generate_demands(7, 5, 10, (1.0, 100.0)).unwrap();
        let b = generate_demands(7, 5, 10, (1.0, 100.0)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|d| d.source != d.target));
    }

    #[test]
    fn demand_rates_stay_in_range() {
        let demands = generate_demands(11, 1000, 24, (1.0, 100.0)).unwrap();
        assert!(demands
            .iter()
            .all(|d| d.rate_gbps >= 1.0 && d.rate_gbps <= 100.0));
    }

    #[test]
    fn demand_generation_rejects_bad_inputs() {
        assert!(matches!(
            generate_demands(7, 0, 10, (1.0, 100.0)),
            Err(NetworkError::EmptyDemandSet)
        ));
        assert!(matches!(
            generate_demands(7, 1, 1, (1.0, 100.0)),
            Err(NetworkError::TooFewNodes(1))
        ));
    }

    #[test]
    fn demand_csv_round_trips() {
        let t = builtin_topology("nsf24").unwrap();
        let demands = generate_demands(3, 8, t.node_count(), (1.0, 100.0)).unwrap();
        let text = demands_to_csv(&t, &demands);
        let again = demands_from_csv(&t, &text).unwrap();
        assert_eq!(demands, again);
    }

    #[test]
    fn shortest_path_on_line() {
        let t = line3();
        assert_eq!(shortest_path_length(&t, 0, 2).unwrap(), 2000.0);
        assert_eq!(shortest_path_length(&t, 0, 0).unwrap(), 0.0);
        assert!(matches!(
            shortest_path_length(&t, 2, 0),
            Err(NetworkError::Unreachable { .. })
        ));
    }
}
