//! k-input LUT covering of AIGs, level census and the device lower bound.

use crate::netlist::{Edge, LogicNetwork, NetlistError, NetworkKind, NodeId, NodeKind};
use crate::truth::TruthTable;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

pub const MIN_K: usize = 2;
pub const MAX_K: usize = 16;
/// Wordlines reserved for computation in the area layout.
pub const COMPUTE_ROWS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LutError {
    #[error("k = {0} is outside {MIN_K}..={MAX_K}")]
    BadK(usize),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("invalid LUT graph: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LutInput {
    /// Primary input by position.
    Pi(usize),
    /// Another LUT by id.
    Lut(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lut {
    pub id: usize,
    /// `inputs[j]` is variable `j` of `function`.
    pub inputs: Vec<LutInput>,
    pub function: TruthTable,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LutGraph {
    pub k: usize,
    pub pi_names: Vec<String>,
    /// Topologically ordered; `luts[i].id == i`.
    pub luts: Vec<Lut>,
    /// LUT computing each network output.
    pub outputs: Vec<usize>,
    pub output_names: Vec<String>,
}

impl LutGraph {
    pub fn new(k: usize, pi_names: Vec<String>) -> Self {
        LutGraph { k, pi_names, luts: Vec::new(), outputs: Vec::new(), output_names: Vec::new() }
    }

    /// Appends a LUT; inputs must refer to earlier LUTs.
    pub fn add_lut(&mut self, inputs: Vec<LutInput>, function: TruthTable) -> usize {
        assert_eq!(function.num_vars(), inputs.len(), "function arity differs from input count");
        let id = self.luts.len();
        let level = 1 + inputs
            .iter()
            .map(|i| match *i {
                LutInput::Pi(p) => {
                    assert!(p < self.pi_names.len(), "unknown input {p}");
                    0
                }
                LutInput::Lut(l) => {
                    assert!(l < id, "LUT {l} does not precede {id}");
                    self.luts[l].level
                }
            })
            .max()
            .unwrap_or(0);
        self.luts.push(Lut { id, inputs, function, level });
        id
    }

    pub fn add_output(&mut self, lut: usize, name: impl Into<String>) {
        assert!(lut < self.luts.len());
        self.outputs.push(lut);
        self.output_names.push(name.into());
    }

    pub fn len(&self) -> usize {
        self.luts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.luts.is_empty()
    }

    pub fn num_pis(&self) -> usize {
        self.pi_names.len()
    }

    /// Largest LUT level, `#L`.
    pub fn depth(&self) -> usize {
        self.luts.iter().map(|l| l.level).max().unwrap_or(0)
    }

    /// Consumers of every LUT, ascending and without repeats.
    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.luts.len()];
        for l in &self.luts {
            for i in &l.inputs {
                if let LutInput::Lut(p) = *i {
                    if succ[p].last() != Some(&l.id) {
                        succ[p].push(l.id);
                    }
                }
            }
        }
        succ
    }

    pub fn validate(&self) -> Result<(), LutError> {
        let bad = |m: String| Err(LutError::Invalid(m));
        for (i, l) in self.luts.iter().enumerate() {
            if l.id != i {
                return bad(format!("LUT at position {i} has id {}", l.id));
            }
            if l.inputs.len() > self.k {
                return bad(format!("LUT {i} has {} inputs, k = {}", l.inputs.len(), self.k));
            }
            if l.function.num_vars() != l.inputs.len() {
                return bad(format!("LUT {i} function arity mismatch"));
            }
            let mut level = 0;
            for inp in &l.inputs {
                match *inp {
                    LutInput::Pi(p) if p >= self.num_pis() => return bad(format!("LUT {i} reads missing input {p}")),
                    LutInput::Lut(p) if p >= i => return bad(format!("LUT {i} reads later LUT {p}")),
                    LutInput::Lut(p) => level = level.max(self.luts[p].level),
                    LutInput::Pi(_) => {}
                }
            }
            if l.level != level + 1 {
                return bad(format!("LUT {i} has level {}, expected {}", l.level, level + 1));
            }
        }
        if self.outputs.iter().any(|&o| o >= self.luts.len()) || self.outputs.len() != self.output_names.len() {
            return bad("bad output list".into());
        }
        Ok(())
    }

    /// Values of every LUT for 64 assignments at once.
    pub fn simulate_luts(&self, inputs: &[u64]) -> Vec<u64> {
        assert_eq!(inputs.len(), self.num_pis(), "input width mismatch");
        let mut val = vec![0u64; self.luts.len()];
        for l in &self.luts {
            let ops: Vec<u64> = l
                .inputs
                .iter()
                .map(|i| match *i {
                    LutInput::Pi(p) => inputs[p],
                    LutInput::Lut(p) => val[p],
                })
                .collect();
            let mut out = 0u64;
            for lane in 0..64 {
                let row = ops.iter().enumerate().fold(0usize, |r, (j, v)| r | ((((v >> lane) & 1) as usize) << j));
                if l.function.get(row) {
                    out |= 1 << lane;
                }
            }
            val[l.id] = out;
        }
        val
    }

    pub fn simulate(&self, inputs: &[u64]) -> Vec<u64> {
        let val = self.simulate_luts(inputs);
        self.outputs.iter().map(|&o| val[o]).collect()
    }

    pub fn evaluate(&self, assignment: &[bool]) -> Vec<bool> {
        let lanes: Vec<u64> = assignment.iter().map(|&b| b as u64).collect();
        self.simulate(&lanes).into_iter().map(|v| v & 1 == 1).collect()
    }
}

impl Lut {
    /// Ids of the LUTs feeding this one.
    pub fn inputs_luts(&self) -> Vec<usize> {
        self.inputs
            .iter()
            .filter_map(|i| match *i {
                LutInput::Lut(l) => Some(l),
                LutInput::Pi(_) => None,
            })
            .collect()
    }
}

pub fn lut_truth_table(lut: &Lut) -> &TruthTable {
    &lut.function
}

/// Function of the cone rooted at `root` over `leaves` (variable `j` is
/// `leaves[j]`). Every path from the root must stop at a leaf or constant.
fn cone_function(net: &LogicNetwork, root: NodeId, leaves: &[NodeId]) -> TruthTable {
    fn go(net: &LogicNetwork, n: NodeId, memo: &mut HashMap<NodeId, TruthTable>, nv: usize) -> TruthTable {
        if let Some(t) = memo.get(&n) {
            return t.clone();
        }
        let node = net.node(n);
        let t = match node.kind {
            NodeKind::Const0 => TruthTable::zero(nv),
            NodeKind::And => {
                let f = |e: Edge, memo: &mut HashMap<NodeId, TruthTable>| {
                    let t = go(net, e.target, memo, nv);
                    if e.inverted {
                        t.not()
                    } else {
                        t
                    }
                };
                let a = f(node.fanins[0], memo);
                let b = f(node.fanins[1], memo);
                a.and(&b)
            }
            _ => unreachable!("cone escapes its leaves at {n}"),
        };
        memo.insert(n, t.clone());
        t
    }
    let nv = leaves.len();
    let mut memo: HashMap<NodeId, TruthTable> = leaves.iter().enumerate().map(|(j, &l)| (l, TruthTable::var(nv, j))).collect();
    go(net, root, &mut memo, nv)
}

/// Greedy bottom-up cone growth: each AND starts from its fanins and absorbs
/// the cones of single-fanout fanins while at most `k` leaves remain,
/// taking the absorption with the fewest resulting leaves first.
pub fn cover_klut(aig: &LogicNetwork, k: usize) -> Result<LutGraph, LutError> {
    if !(MIN_K..=MAX_K).contains(&k) {
        return Err(LutError::BadK(k));
    }
    if aig.kind() != NetworkKind::Aig {
        return Err(NetlistError::WrongKind { expected: NetworkKind::Aig, found: aig.kind() }.into());
    }
    let fanouts = aig.fanouts();
    let mut cuts: Vec<Vec<NodeId>> = vec![Vec::new(); aig.len()];
    for g in aig.gate_ids() {
        let mut leaves: BTreeSet<NodeId> = aig.node(g).fanins.iter().filter(|e| !e.is_const()).map(|e| e.target).collect();
        loop {
            let best = leaves
                .iter()
                .filter(|&&f| aig.node(f).is_gate() && fanouts[f.0] == 1)
                .filter_map(|&f| {
                    let mut next = leaves.clone();
                    next.remove(&f);
                    next.extend(cuts[f.0].iter().copied());
                    (next.len() <= k).then_some((next.len(), f, next))
                })
                .min_by_key(|(n, f, _)| (*n, *f));
            match best {
                Some((_, _, next)) => leaves = next,
                None => break,
            }
        }
        cuts[g.0] = leaves.into_iter().collect();
    }

    // select LUT roots from the outputs down
    let mut selected = vec![false; aig.len()];
    let mut stack: Vec<NodeId> = aig.outputs().iter().map(|o| o.edge.target).filter(|&t| aig.node(t).is_gate()).collect();
    while let Some(n) = stack.pop() {
        if std::mem::replace(&mut selected[n.0], true) {
            continue;
        }
        stack.extend(cuts[n.0].iter().copied().filter(|&l| aig.node(l).is_gate() && !selected[l.0]));
    }

    let mut g = LutGraph::new(k, aig.pi_names());
    let mut lut_of: Vec<Option<usize>> = vec![None; aig.len()];
    for n in (0..aig.len()).map(NodeId).filter(|n| selected[n.0]) {
        let inputs = cuts[n.0]
            .iter()
            .map(|&l| match aig.pi_index(l) {
                Some(p) => LutInput::Pi(p),
                None => LutInput::Lut(lut_of[l.0].expect("leaf LUT precedes its consumer")),
            })
            .collect();
        lut_of[n.0] = Some(g.add_lut(inputs, cone_function(aig, n, &cuts[n.0])));
    }

    // outputs that are inverted, inputs or constants need a LUT of their own
    let mut extra: HashMap<(LutInput, bool), usize> = HashMap::new();
    let mut consts: HashMap<bool, usize> = HashMap::new();
    let mut folded: HashMap<NodeId, usize> = HashMap::new();
    for o in aig.outputs() {
        let t = o.edge.target;
        let inv = o.edge.inverted;
        let id = match aig.node(t).kind {
            NodeKind::Const0 => *consts.entry(inv).or_insert_with(|| {
                let f = if inv { TruthTable::one(0) } else { TruthTable::zero(0) };
                g.add_lut(Vec::new(), f)
            }),
            NodeKind::Pi => {
                let input = LutInput::Pi(aig.pi_index(t).unwrap());
                *extra.entry((input, inv)).or_insert_with(|| g.add_lut(vec![input], buffer(inv)))
            }
            _ if !inv => lut_of[t.0].unwrap(),
            _ if fanouts[t.0] == 1 => {
                let id = lut_of[t.0].unwrap();
                if folded.insert(t, id).is_none() {
                    let f = g.luts[id].function.not();
                    g.luts[id].function = f;
                }
                id
            }
            _ => {
                let input = LutInput::Lut(lut_of[t.0].unwrap());
                *extra.entry((input, true)).or_insert_with(|| g.add_lut(vec![input], buffer(true)))
            }
        };
        g.add_output(id, o.name.clone());
    }
    Ok(g)
}

fn buffer(invert: bool) -> TruthTable {
    let t = TruthTable::var(1, 0);
    if invert {
        t.not()
    } else {
        t
    }
}

/// LUTs below level `l` with a consumer above level `l`.
pub fn transient_nodes(g: &LutGraph, l: usize) -> BTreeSet<usize> {
    let succ = g.successors();
    g.luts
        .iter()
        .filter(|n| n.level < l && succ[n.id].iter().any(|&s| g.luts[s].level > l))
        .map(|n| n.id)
        .collect()
}

/// `N_l` for `l = 0..=depth`: LUTs at level `l`, plus transients in level
/// `l`, plus outputs finished below `l` (they stay stored until the end).
pub fn level_census(g: &LutGraph) -> Vec<usize> {
    let depth = g.depth();
    let outputs: BTreeSet<usize> = g.outputs.iter().copied().collect();
    (0..=depth)
        .map(|l| {
            let mut set = transient_nodes(g, l);
            set.extend(g.luts.iter().filter(|n| n.level == l).map(|n| n.id));
            set.extend(outputs.iter().copied().filter(|&o| g.luts[o].level < l));
            set.len()
        })
        .collect()
}

/// Storage devices needed to schedule the graph level by level.
pub fn min_dev(g: &LutGraph) -> usize {
    let n = level_census(g);
    n.windows(2).map(|w| w[0] + w[1]).max().unwrap_or(0)
}

/// Storage capacity of an `S_D x w_D` area layout.
pub fn storage_capacity(s_d: usize, w_d: usize) -> usize {
    s_d.saturating_sub(COMPUTE_ROWS) * w_d
}

pub fn feasible(g: &LutGraph, s_d: usize, w_d: usize) -> bool {
    s_d > COMPUTE_ROWS && min_dev(g) <= storage_capacity(s_d, w_d)
}
