//! Network topology, the state-space model it induces, and a cycle-accurate
//! simulator.
//!
//! Every edge carries one symbol per time step with a unit delay. The symbol
//! leaving edge `i` at time `n + 1` is a fixed linear combination of the
//! symbols that entered the tail of `i` at time `n` plus the symbols the tail
//! generated at time `n`. Stacking the edge symbols into `x[n]` gives
//!
//! ```text
//! x[n+1] = A x[n] + B u[n]
//! y_d[n] = C_d x[n] + D_d u[n]
//! ```
//!
//! The state is ordered as the edges are declared. A sink observes its
//! incoming edges in declaration order followed by its own generated inputs.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldSpec, GaloisField, Gf};
use crate::linalg::FieldMatrix;
use crate::poly::SymbolSequence;

fn default_field() -> String {
    FieldSpec::default().to_string()
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// On-disk topology document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    #[serde(default = "default_field")]
    pub field: String,
    pub nodes: Vec<NodeDecl>,
    #[serde(default)]
    pub edges: Vec<EdgeDecl>,
    #[serde(default)]
    pub kernels: IndexMap<String, IndexMap<String, u32>>,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDecl {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_rate: Option<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub sink: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDecl {
    pub id: String,
    pub tail: String,
    pub head: String,
}

impl TopologyFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("topology: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("topology serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    /// `Some` for source nodes (a zero rate is allowed).
    pub source_rate: Option<usize>,
    pub sink: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

/// What a local kernel coefficient multiplies: a symbol received on an
/// incoming edge, or the `k`-th (0-based) symbol generated by the tail node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KernelInput {
    Edge(usize),
    Generated(usize),
}

/// A source input addressed as `u:<node>:<k>` with 1-based `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputKey {
    pub node: String,
    pub index: usize,
}

impl FromStr for InputKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad input key `{s}`, expected u:<node>:<k>"));
        let rest = s.strip_prefix("u:").ok_or_else(bad)?;
        let (node, k) = rest.rsplit_once(':').ok_or_else(bad)?;
        let index: usize = k.parse().map_err(|_| bad())?;
        if index == 0 || node.is_empty() {
            return Err(bad());
        }
        Ok(InputKey { node: node.to_string(), index })
    }
}

impl fmt::Display for InputKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u:{}:{}", self.node, self.index)
    }
}

/// A validated network with its local encoding kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    field: Arc<GaloisField>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Per edge, the coefficients of its local kernel. Missing entries are zero.
    kernels: Vec<BTreeMap<KernelInput, Gf>>,
    bound: usize,
    seed: Option<u64>,
}

impl NetworkSpec {
    /// Validate a topology document. When it carries a seed, every
    /// admissible kernel coefficient it leaves out is drawn at random.
    pub fn from_topology(topo: &TopologyFile) -> Result<Self> {
        let spec: FieldSpec = topo.field.parse()?;
        let field = Arc::new(GaloisField::new(spec)?);
        let mut names = HashMap::new();
        let mut nodes = Vec::with_capacity(topo.nodes.len());
        for (i, n) in topo.nodes.iter().enumerate() {
            if names.insert(n.name.clone(), i).is_some() {
                return Err(Error::Topology(format!("duplicate node `{}`", n.name)));
            }
            nodes.push(Node { name: n.name.clone(), source_rate: n.source_rate, sink: n.sink });
        }
        let lookup = |name: &str| {
            names.get(name).copied().ok_or_else(|| Error::Topology(format!("unknown node `{name}`")))
        };
        let mut edge_ids = HashMap::new();
        let mut edges = Vec::with_capacity(topo.edges.len());
        for (i, e) in topo.edges.iter().enumerate() {
            if edge_ids.insert(e.id.clone(), i).is_some() {
                return Err(Error::Topology(format!("duplicate edge `{}`", e.id)));
            }
            edges.push(Edge { id: e.id.clone(), tail: lookup(&e.tail)?, head: lookup(&e.head)? });
        }
        let bound = topo.n.unwrap_or(edges.len());
        if bound < edges.len() {
            return Err(Error::Topology(format!(
                "N = {bound} is smaller than the number of edges ({})",
                edges.len()
            )));
        }

        let mut kernels = vec![BTreeMap::new(); edges.len()];
        for (edge_id, coeffs) in &topo.kernels {
            let i = *edge_ids
                .get(edge_id)
                .ok_or_else(|| Error::Topology(format!("kernel for unknown edge `{edge_id}`")))?;
            let tail = edges[i].tail;
            for (key, &value) in coeffs {
                let input = if key.starts_with("u:") {
                    let k: InputKey = key.parse()?;
                    let node = lookup(&k.node)?;
                    let rate = nodes[node].source_rate.unwrap_or(0);
                    if node != tail || k.index > rate {
                        return Err(Error::Topology(format!(
                            "edge `{edge_id}` cannot use input `{key}`: not generated at its tail `{}`",
                            nodes[tail].name
                        )));
                    }
                    KernelInput::Generated(k.index - 1)
                } else {
                    let e = *edge_ids
                        .get(key)
                        .ok_or_else(|| Error::Topology(format!("kernel references unknown edge `{key}`")))?;
                    if edges[e].head != tail {
                        return Err(Error::Topology(format!(
                            "edge `{edge_id}` cannot use `{key}`: it does not enter `{}`",
                            nodes[tail].name
                        )));
                    }
                    KernelInput::Edge(e)
                };
                kernels[i].insert(input, field.elem(value)?);
            }
        }
        let spec = NetworkSpec { field, nodes, edges, kernels, bound, seed: topo.seed };
        match topo.seed {
            Some(seed) => Ok(spec.random_kernels(seed)),
            None => Ok(spec),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        NetworkSpec::from_topology(&TopologyFile::from_json(text)?)
    }

    /// Complete topology document with every admissible kernel written out.
    pub fn to_topology(&self) -> TopologyFile {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeDecl { name: n.name.clone(), source_rate: n.source_rate, sink: n.sink })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeDecl {
                id: e.id.clone(),
                tail: self.nodes[e.tail].name.clone(),
                head: self.nodes[e.head].name.clone(),
            })
            .collect();
        let mut kernels = IndexMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            let mut coeffs = IndexMap::new();
            for input in self.admissible_inputs(i) {
                let v = self.kernels[i].get(&input).copied().unwrap_or(Gf::ZERO);
                let key = match input {
                    KernelInput::Edge(j) => self.edges[j].id.clone(),
                    KernelInput::Generated(k) => {
                        InputKey { node: self.nodes[e.tail].name.clone(), index: k + 1 }.to_string()
                    }
                };
                coeffs.insert(key, v.value());
            }
            if !coeffs.is_empty() {
                kernels.insert(e.id.clone(), coeffs);
            }
        }
        TopologyFile {
            field: self.field.spec().to_string(),
            nodes,
            edges,
            kernels,
            n: Some(self.bound),
            seed: self.seed,
        }
    }

    /// Inputs the local kernel of edge `i` may combine: the edges entering its
    /// tail (declaration order), then the tail's own generated symbols.
    pub fn admissible_inputs(&self, i: usize) -> Vec<KernelInput> {
        let tail = self.edges[i].tail;
        let mut out: Vec<KernelInput> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.head == tail)
            .map(|(j, _)| KernelInput::Edge(j))
            .collect();
        let rate = self.nodes[tail].source_rate.unwrap_or(0);
        out.extend((0..rate).map(KernelInput::Generated));
        out
    }

    /// Fill every admissible kernel coefficient not already present with an
    /// independent uniform draw, deterministically from `seed`.
    pub fn random_kernels(&self, seed: u64) -> NetworkSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for i in 0..self.edges.len() {
            for input in self.admissible_inputs(i) {
                let v = self.field.random(&mut rng);
                out.kernels[i].entry(input).or_insert(v);
            }
        }
        out.seed = Some(seed);
        out
    }

    /// Same topology with every kernel removed.
    pub fn without_kernels(&self) -> NetworkSpec {
        NetworkSpec { kernels: vec![BTreeMap::new(); self.edges.len()], seed: None, ..self.clone() }
    }

    /// Change the declared rate of a source. Kernel coefficients for inputs
    /// beyond the new rate are dropped.
    pub fn with_source_rate(&self, node: &str, rate: usize) -> Result<NetworkSpec> {
        let idx = self.node_index(node)?;
        if self.nodes[idx].source_rate.is_none() {
            return Err(Error::Topology(format!("`{node}` is not a source")));
        }
        let mut out = self.clone();
        out.nodes[idx].source_rate = Some(rate);
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail == idx {
                out.kernels[i].retain(|k, _| !matches!(k, KernelInput::Generated(j) if *j >= rate));
            }
        }
        Ok(out)
    }

    pub fn with_bound(&self, bound: usize) -> Result<NetworkSpec> {
        if bound < self.edges.len() {
            return Err(Error::Topology(format!(
                "N = {bound} is smaller than the number of edges ({})",
                self.edges.len()
            )));
        }
        Ok(NetworkSpec { bound, ..self.clone() })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<GaloisField> {
        Arc::clone(&self.field)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kernel(&self, edge: usize, input: KernelInput) -> Gf {
        self.kernels[edge].get(&input).copied().unwrap_or(Gf::ZERO)
    }

    /// Declared upper bound `N` on the number of edges.
    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn node_index(&self, name: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| Error::Topology(format!("unknown node `{name}`")))
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| Error::Topology(format!("unknown edge `{id}`")))
    }

    /// Source nodes in declaration order with their rates.
    pub fn sources(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.source_rate.map(|r| (i, r)))
            .collect()
    }

    pub fn source_names(&self) -> Vec<String> {
        self.sources().iter().map(|&(i, _)| self.nodes[i].name.clone()).collect()
    }

    pub fn source_rates(&self) -> Vec<usize> {
        self.sources().iter().map(|&(_, r)| r).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].sink).collect()
    }

    pub fn sink_names(&self) -> Vec<String> {
        self.sinks().iter().map(|&i| self.nodes[i].name.clone()).collect()
    }

    /// Total input dimension `m`.
    pub fn input_dim(&self) -> usize {
        self.source_rates().iter().sum()
    }

    /// Global column of input `k` (0-based) of `node`.
    pub fn input_column(&self, node: usize, k: usize) -> Option<usize> {
        let mut col = 0;
        for (i, r) in self.sources() {
            if i == node {
                return (k < r).then_some(col + k);
            }
            col += r;
        }
        None
    }

    pub fn input_column_of(&self, key: &InputKey) -> Result<usize> {
        let node = self.node_index(&key.node)?;
        self.input_column(node, key.index - 1)
            .ok_or_else(|| Error::Topology(format!("no input `{key}`")))
    }

    pub fn input_keys(&self) -> Vec<InputKey> {
        self.sources()
            .into_iter()
            .flat_map(|(i, r)| (1..=r).map(move |k| (i, k)))
            .map(|(i, k)| InputKey { node: self.nodes[i].name.clone(), index: k })
            .collect()
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace::build(self)
    }
}

/// What a row of `y_d` observes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputSlot {
    Edge(usize),
    Input(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinkModel {
    pub name: String,
    pub c: FieldMatrix,
    pub d: FieldMatrix,
    pub layout: Vec<OutputSlot>,
}

impl SinkModel {
    /// `l_d`.
    pub fn output_dim(&self) -> usize {
        self.layout.len()
    }
}

/// `(A, B, {C_d, D_d})` for a network.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    field: Arc<GaloisField>,
    pub a: FieldMatrix,
    pub b: FieldMatrix,
    pub sinks: Vec<SinkModel>,
}

impl StateSpace {
    pub fn build(spec: &NetworkSpec) -> StateSpace {
        let e = spec.edges.len();
        let m = spec.input_dim();
        let mut a = FieldMatrix::zeros(e, e);
        let mut b = FieldMatrix::zeros(e, m);
        for (i, edge) in spec.edges.iter().enumerate() {
            for (&input, &v) in &spec.kernels[i] {
                match input {
                    KernelInput::Edge(j) => a.set(i, j, v),
                    KernelInput::Generated(k) => {
                        let col = spec.input_column(edge.tail, k).expect("validated kernel");
                        b.set(i, col, v);
                    }
                }
            }
        }
        let sinks = spec
            .sinks()
            .into_iter()
            .map(|d| {
                let mut layout: Vec<OutputSlot> = spec
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, edge)| edge.head == d)
                    .map(|(j, _)| OutputSlot::Edge(j))
                    .collect();
                let rate = spec.nodes[d].source_rate.unwrap_or(0);
                layout.extend((0..rate).map(|k| OutputSlot::Input(spec.input_column(d, k).unwrap())));
                let mut c = FieldMatrix::zeros(layout.len(), e);
                let mut dm = FieldMatrix::zeros(layout.len(), m);
                for (r, slot) in layout.iter().enumerate() {
                    match *slot {
                        OutputSlot::Edge(j) => c.set(r, j, Gf::ONE),
                        OutputSlot::Input(col) => dm.set(r, col, Gf::ONE),
                    }
                }
                SinkModel { name: spec.nodes[d].name.clone(), c, d: dm, layout }
            })
            .collect();
        StateSpace { field: spec.field_arc(), a, b, sinks }
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn sink_index(&self, name: &str) -> Result<usize> {
        self.sinks
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::Topology(format!("unknown sink `{name}`")))
    }

    pub fn zero_state(&self) -> SimState {
        SimState::zero(self.state_dim())
    }

    pub fn state(&self, x0: Vec<Gf>) -> Result<SimState> {
        if x0.len() != self.state_dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial state has {} entries, network has {} edges",
                x0.len(),
                self.state_dim()
            )));
        }
        Ok(SimState { x: x0, n: 0 })
    }

    /// Emit `y_d[n]` for every sink, then advance to `n + 1`.
    pub fn step(&self, state: &mut SimState, u: &[Gf]) -> Result<Vec<Vec<Gf>>> {
        let f = &*self.field;
        if u.len() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} entries, expected {}",
                u.len(),
                self.input_dim()
            )));
        }
        if state.x.len() != self.state_dim() {
            return Err(Error::DimensionMismatch("state dimension".into()));
        }
        let outputs = self
            .sinks
            .iter()
            .map(|s| {
                s.layout
                    .iter()
                    .map(|slot| match *slot {
                        OutputSlot::Edge(j) => state.x[j],
                        OutputSlot::Input(col) => u[col],
                    })
                    .collect()
            })
            .collect();
        let ax = self.a.mul_vec(&state.x, f)?;
        let bu = self.b.mul_vec(u, f)?;
        state.x = ax.iter().zip(&bu).map(|(p, q)| f.add(*p, *q)).collect();
        state.n += 1;
        Ok(outputs)
    }

    /// Run from `state` over the inputs `u[0], u[1], ...`, returning each
    /// sink's outputs as a sequence starting at the state's current time.
    pub fn run(&self, state: &mut SimState, inputs: &[Vec<Gf>]) -> Result<Vec<SymbolSequence>> {
        let mut outs: Vec<SymbolSequence> = self
            .sinks
            .iter()
            .map(|s| SymbolSequence::new(state.n, s.output_dim()))
            .collect();
        for u in inputs {
            for (seq, y) in outs.iter_mut().zip(self.step(state, u)?) {
                seq.push(y)?;
            }
        }
        Ok(outs)
    }

    /// `C_d A^(n-1) B` for `n >= 1`, `D_d` for `n = 0`.
    pub fn markov_parameter(&self, sink: usize, n: usize) -> Result<FieldMatrix> {
        let s = &self.sinks[sink];
        if n == 0 {
            return Ok(s.d.clone());
        }
        let f = &*self.field;
        s.c.mul(&self.a.pow(n - 1, f)?, f)?.mul(&self.b, f)
    }
}

/// Simulator state: edge symbols `x[n]` and the current time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimState {
    pub x: Vec<Gf>,
    pub n: i64,
}

impl SimState {
    pub fn zero(dim: usize) -> Self {
        SimState { x: vec![Gf::ZERO; dim], n: 0 }
    }

    /// Clear every edge and restart the clock.
    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = Gf::ZERO);
        self.n = 0;
    }
}

/// Check a set of names for duplicates. Used by file loaders.
pub(crate) fn ensure_unique<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::Parse(format!("duplicate name `{n}`")));
        }
    }
    Ok(())
}
