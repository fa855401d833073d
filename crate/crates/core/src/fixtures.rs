//! Reference networks shipped with the repository, embedded at compile time.

use crate::network::{EdgeDecl, NetworkSpec, NodeDecl, TopologyFile};

pub const FIG1_JSON: &str = include_str!("../../../fixtures/fig1.json");
pub const FIG3_JSON: &str = include_str!("../../../fixtures/fig3.json");
pub const FIG3_SKELETON_JSON: &str = include_str!("../../../fixtures/fig3_skeleton.json");
pub const SHUTTLE_JSON: &str = include_str!("../../../fixtures/shuttle.json");

/// Single source feeding a relay over two parallel edges, with a feedback
/// edge from the sink back to the source. Kernels come from the file's seed.
pub fn fig1() -> NetworkSpec {
    NetworkSpec::from_json(FIG1_JSON).expect("fig1 fixture")
}

/// Two sources (rates 2 and 1), a three-relay cycle and one sink.
pub fn fig3() -> NetworkSpec {
    NetworkSpec::from_json(FIG3_JSON).expect("fig3 fixture")
}

pub fn fig3_skeleton() -> NetworkSpec {
    NetworkSpec::from_json(FIG3_SKELETON_JSON).expect("fig3 skeleton fixture")
}

/// Two terminals exchanging one stream each through a shared relay chain.
pub fn shuttle() -> NetworkSpec {
    NetworkSpec::from_json(SHUTTLE_JSON).expect("shuttle fixture")
}

/// A small random cyclic network over GF(2^8) with random kernels.
///
/// Every source feeds a relay and every sink hears from one; the remaining
/// edges connect random distinct nodes, so cycles and feedback from sinks
/// are common. `max_edges` is raised to the minimum needed if smaller.
pub fn random_network(seed: u64, max_edges: usize) -> NetworkSpec {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n_sources = rng.gen_range(1..=2);
    let n_relays = rng.gen_range(1..=3);
    let n_sinks = rng.gen_range(1..=2);
    let mut nodes = Vec::new();
    for i in 1..=n_sources {
        nodes.push(NodeDecl { name: format!("s{i}"), source_rate: Some(rng.gen_range(1..=2)), sink: false });
    }
    for i in 1..=n_relays {
        nodes.push(NodeDecl { name: format!("r{i}"), source_rate: None, sink: false });
    }
    for i in 1..=n_sinks {
        nodes.push(NodeDecl { name: format!("d{i}"), source_rate: None, sink: true });
    }
    let relays: Vec<String> = (1..=n_relays).map(|i| format!("r{i}")).collect();
    let mut pairs = Vec::new();
    for i in 1..=n_sources {
        pairs.push((format!("s{i}"), relays.choose(&mut rng).unwrap().clone()));
    }
    for i in 1..=n_sinks {
        pairs.push((relays.choose(&mut rng).unwrap().clone(), format!("d{i}")));
    }
    let names: Vec<String> = nodes.iter().map(|n| n.name.clone()).collect();
    let total = max_edges.max(pairs.len());
    let target = rng.gen_range(pairs.len()..=total);
    while pairs.len() < target {
        let tail = names.choose(&mut rng).unwrap();
        let head = names.choose(&mut rng).unwrap();
        if tail != head && !head.starts_with('s') {
            pairs.push((tail.clone(), head.clone()));
        }
    }
    let edges = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (tail, head))| EdgeDecl { id: format!("e{}", i + 1), tail, head })
        .collect();
    let topo = TopologyFile {
        field: crate::field::FieldSpec::default().to_string(),
        nodes,
        edges,
        kernels: Default::default(),
        n: None,
        seed: Some(seed),
    };
    NetworkSpec::from_topology(&topo).expect("generated topology is valid")
}
