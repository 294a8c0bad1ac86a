//! And-inverter and majority-inverter graphs.
//!
//! Both graph kinds share one representation: a topologically ordered list
//! of nodes whose fanins are polarized edges to lower ids. Node 0 is always
//! the constant-0 node, so the constant 1 is the inverted edge to node 0.

mod aiger;
mod mig_text;
mod normalize;

pub use aiger::{parse_aiger, write_aiger};
pub use mig_text::{parse_mig, write_mig};
pub use normalize::{is_canonical, is_normalized, normalize_mig};

use crate::truth::TruthTable;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Not;
use thiserror::Error;

/// Default bound on the number of inputs accepted by [`LogicNetwork::truth_tables`].
pub const DEFAULT_TT_LIMIT: usize = 16;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("network has {pis} inputs, above the exhaustive limit of {limit}; use random checking instead")]
    TooManyInputs { pis: usize, limit: usize },
    #[error("expected a {expected:?} network, found {found:?}")]
    WrongKind { expected: NetworkKind, found: NetworkKind },
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> NetlistError {
    NetlistError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const CONST0: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A possibly inverted reference to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub target: NodeId,
    pub inverted: bool,
}

impl Edge {
    pub fn new(target: NodeId, inverted: bool) -> Self {
        Edge { target, inverted }
    }

    pub fn regular(target: NodeId) -> Self {
        Edge::new(target, false)
    }

    pub fn is_const(self) -> bool {
        self.target == NodeId::CONST0
    }

    pub fn xor(self, invert: bool) -> Self {
        Edge::new(self.target, self.inverted ^ invert)
    }
}

impl Not for Edge {
    type Output = Edge;

    fn not(self) -> Edge {
        Edge::new(self.target, !self.inverted)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverted {
            write!(f, "!{}", self.target)
        } else {
            write!(f, "{}", self.target)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Pi,
    Const0,
    And,
    Maj,
}

impl NodeKind {
    pub fn arity(self) -> usize {
        match self {
            NodeKind::Pi | NodeKind::Const0 => 0,
            NodeKind::And => 2,
            NodeKind::Maj => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    pub fanins: Vec<Edge>,
    pub name: Option<String>,
}

impl Node {
    pub fn is_gate(&self) -> bool {
        matches!(self.kind, NodeKind::And | NodeKind::Maj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetworkKind {
    Aig,
    Mig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    pub edge: Edge,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicNetwork {
    kind: NetworkKind,
    nodes: Vec<Node>,
    pis: Vec<NodeId>,
    outputs: Vec<Output>,
}

pub fn maj(a: bool, b: bool, c: bool) -> bool {
    (a && b) || (a && c) || (b && c)
}

impl LogicNetwork {
    pub fn new(kind: NetworkKind) -> Self {
        LogicNetwork {
            kind,
            nodes: vec![Node {
                kind: NodeKind::Const0,
                fanins: Vec::new(),
                name: None,
            }],
            pis: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn pis(&self) -> &[NodeId] {
        &self.pis
    }

    pub fn num_pis(&self) -> usize {
        self.pis.len()
    }

    pub fn outputs(&self) -> &[Output] {
        &self.outputs
    }

    pub fn pi_names(&self) -> Vec<String> {
        self.pis
            .iter()
            .enumerate()
            .map(|(i, &id)| self.nodes[id.0].name.clone().unwrap_or_else(|| format!("i{i}")))
            .collect()
    }

    /// Position of a primary input among the network's inputs.
    pub fn pi_index(&self, id: NodeId) -> Option<usize> {
        self.pis.iter().position(|&p| p == id)
    }

    /// Number of AND or MAJ nodes.
    pub fn num_gates(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_gate()).count()
    }

    pub fn gate_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_gate())
            .map(|(i, _)| NodeId(i))
    }

    pub fn constant(&self, value: bool) -> Edge {
        Edge::new(NodeId::CONST0, value)
    }

    pub fn add_pi(&mut self, name: impl Into<String>) -> Edge {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            kind: NodeKind::Pi,
            fanins: Vec::new(),
            name: Some(name.into()),
        });
        self.pis.push(id);
        Edge::regular(id)
    }

    fn push_gate(&mut self, kind: NodeKind, fanins: Vec<Edge>) -> Edge {
        let id = NodeId(self.nodes.len());
        for e in &fanins {
            assert!(e.target.0 < id.0, "fanin {} does not precede node {}", e, id);
        }
        self.nodes.push(Node {
            kind,
            fanins,
            name: None,
        });
        Edge::regular(id)
    }

    /// Appends an AND node. Panics on a MIG.
    pub fn add_and(&mut self, a: Edge, b: Edge) -> Edge {
        assert_eq!(self.kind, NetworkKind::Aig, "AND nodes are only allowed in an AIG");
        self.push_gate(NodeKind::And, vec![a, b])
    }

    /// Appends a MAJ node. Panics on an AIG.
    pub fn add_maj(&mut self, a: Edge, b: Edge, c: Edge) -> Edge {
        assert_eq!(self.kind, NetworkKind::Mig, "MAJ nodes are only allowed in a MIG");
        self.push_gate(NodeKind::Maj, vec![a, b, c])
    }

    pub fn add_output(&mut self, edge: Edge, name: impl Into<String>) {
        assert!(edge.target.0 < self.nodes.len(), "output references unknown node {}", edge.target);
        self.outputs.push(Output {
            edge,
            name: name.into(),
        });
    }

    pub fn set_node_name(&mut self, id: NodeId, name: impl Into<String>) {
        self.nodes[id.0].name = Some(name.into());
    }

    /// Level of every node: 0 for inputs and the constant, one more than the
    /// deepest fanin otherwise.
    pub fn levels(&self) -> Vec<usize> {
        let mut lv = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if n.is_gate() {
                lv[i] = 1 + n.fanins.iter().map(|e| lv[e.target.0]).max().unwrap_or(0);
            }
        }
        lv
    }

    pub fn level(&self, id: NodeId) -> usize {
        self.levels()[id.0]
    }

    /// Largest level among the output nodes.
    pub fn depth(&self) -> usize {
        let lv = self.levels();
        self.outputs.iter().map(|o| lv[o.edge.target.0]).max().unwrap_or(0)
    }

    /// Fanout count of every node, counting each output reference once.
    pub fn fanouts(&self) -> Vec<usize> {
        let mut fo = vec![0usize; self.nodes.len()];
        for n in &self.nodes {
            for e in &n.fanins {
                fo[e.target.0] += 1;
            }
        }
        for o in &self.outputs {
            fo[o.edge.target.0] += 1;
        }
        fo
    }

    /// Evaluates all outputs for one input assignment (one bit per PI).
    pub fn evaluate(&self, assignment: &[bool]) -> Vec<bool> {
        assert_eq!(assignment.len(), self.pis.len(), "assignment width mismatch");
        let mut val = vec![false; self.nodes.len()];
        let mut next_pi = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            let get = |e: &Edge, val: &[bool]| val[e.target.0] ^ e.inverted;
            val[i] = match n.kind {
                NodeKind::Const0 => false,
                NodeKind::Pi => {
                    let v = assignment[next_pi];
                    next_pi += 1;
                    v
                }
                NodeKind::And => get(&n.fanins[0], &val) && get(&n.fanins[1], &val),
                NodeKind::Maj => maj(
                    get(&n.fanins[0], &val),
                    get(&n.fanins[1], &val),
                    get(&n.fanins[2], &val),
                ),
            };
        }
        self.outputs
            .iter()
            .map(|o| val[o.edge.target.0] ^ o.edge.inverted)
            .collect()
    }

    /// Evaluates 64 assignments at once; lane `k` of `inputs[j]` is PI `j`
    /// of assignment `k`.
    pub fn simulate(&self, inputs: &[u64]) -> Vec<u64> {
        let val = self.simulate_nodes(inputs);
        self.outputs
            .iter()
            .map(|o| lane(&val, o.edge))
            .collect()
    }

    pub(crate) fn simulate_nodes(&self, inputs: &[u64]) -> Vec<u64> {
        assert_eq!(inputs.len(), self.pis.len(), "input width mismatch");
        let mut val = vec![0u64; self.nodes.len()];
        let mut next_pi = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            val[i] = match n.kind {
                NodeKind::Const0 => 0,
                NodeKind::Pi => {
                    let v = inputs[next_pi];
                    next_pi += 1;
                    v
                }
                NodeKind::And => lane(&val, n.fanins[0]) & lane(&val, n.fanins[1]),
                NodeKind::Maj => {
                    let (a, b, c) = (
                        lane(&val, n.fanins[0]),
                        lane(&val, n.fanins[1]),
                        lane(&val, n.fanins[2]),
                    );
                    (a & b) | (a & c) | (b & c)
                }
            };
        }
        val
    }

    /// Truth table of every output. Refuses networks with more than `limit`
    /// inputs.
    pub fn truth_tables_bounded(&self, limit: usize) -> Result<Vec<TruthTable>, NetlistError> {
        let n = self.pis.len();
        if n > limit {
            return Err(NetlistError::TooManyInputs { pis: n, limit });
        }
        let words = if n <= 6 { 1 } else { 1 << (n - 6) };
        let mut out: Vec<Vec<u64>> = vec![Vec::with_capacity(words); self.outputs.len()];
        for w in 0..words {
            let inputs: Vec<u64> = (0..n)
                .map(|j| {
                    if j < 6 {
                        TruthTable::var(6, j).words()[0]
                    } else if (w >> (j - 6)) & 1 == 1 {
                        u64::MAX
                    } else {
                        0
                    }
                })
                .collect();
            for (k, v) in self.simulate(&inputs).into_iter().enumerate() {
                out[k].push(v);
            }
        }
        Ok(out.into_iter().map(|ws| TruthTable::from_words(n, ws)).collect())
    }

    pub fn truth_tables(&self) -> Result<Vec<TruthTable>, NetlistError> {
        self.truth_tables_bounded(DEFAULT_TT_LIMIT)
    }

    /// Structural equality ignoring node and output names.
    pub fn structurally_eq(&self, other: &LogicNetwork) -> bool {
        self.kind == other.kind
            && self.pis == other.pis
            && self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| a.kind == b.kind && a.fanins == b.fanins)
            && self.outputs.len() == other.outputs.len()
            && self
                .outputs
                .iter()
                .zip(&other.outputs)
                .all(|(a, b)| a.edge == b.edge)
    }

    /// Drops gates that no output depends on and renumbers densely. Inputs
    /// are always kept.
    pub fn sweep(&self) -> LogicNetwork {
        let mut live = vec![false; self.nodes.len()];
        live[0] = true;
        for &p in &self.pis {
            live[p.0] = true;
        }
        for o in &self.outputs {
            live[o.edge.target.0] = true;
        }
        for i in (0..self.nodes.len()).rev() {
            if live[i] {
                for e in &self.nodes[i].fanins {
                    live[e.target.0] = true;
                }
            }
        }
        let mut net = LogicNetwork::new(self.kind);
        let mut map = vec![Edge::regular(NodeId::CONST0); self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if !live[i] {
                continue;
            }
            let fan: Vec<Edge> = n.fanins.iter().map(|e| map[e.target.0].xor(e.inverted)).collect();
            map[i] = match n.kind {
                NodeKind::Const0 => Edge::regular(NodeId::CONST0),
                NodeKind::Pi => net.add_pi(n.name.clone().unwrap_or_default()),
                NodeKind::And => net.add_and(fan[0], fan[1]),
                NodeKind::Maj => net.add_maj(fan[0], fan[1], fan[2]),
            };
            if n.is_gate() {
                if let Some(name) = &n.name {
                    net.set_node_name(map[i].target, name.clone());
                }
            }
        }
        for o in &self.outputs {
            net.add_output(map[o.edge.target.0].xor(o.edge.inverted), o.name.clone());
        }
        net
    }
}

fn lane(val: &[u64], e: Edge) -> u64 {
    if e.inverted {
        !val[e.target.0]
    } else {
        val[e.target.0]
    }
}

/// Rewrites every `AND(a, b)` as `MAJ(a, b, 0)`.
pub fn aig_to_mig(aig: &LogicNetwork) -> Result<LogicNetwork, NetlistError> {
    if aig.kind != NetworkKind::Aig {
        return Err(NetlistError::WrongKind {
            expected: NetworkKind::Aig,
            found: aig.kind,
        });
    }
    let mut mig = aig.clone();
    mig.kind = NetworkKind::Mig;
    for n in &mut mig.nodes {
        if n.kind == NodeKind::And {
            n.kind = NodeKind::Maj;
            n.fanins.push(Edge::regular(NodeId::CONST0));
        }
    }
    Ok(mig)
}
