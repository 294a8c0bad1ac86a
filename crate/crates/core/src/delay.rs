//! Delay-oriented mapping of MIGs.
//!
//! Every gate `M(h, w, !b)` is computed in place on the device holding `h`
//! with one Apply whose wordline and bitline values come from a single word.
//! Operands are grouped into blocks that must share a word, blocks are
//! packed into words first-fit, and gates of one level whose hosts share a
//! word and whose operands share a word and wordline bit run in one Apply.

use crate::isa::{CrossbarConfig, Emitter, IsaError, PirBit, Program, ResultLocation, WordlineSelect};
use crate::netlist::{aig_to_mig, Edge, LogicNetwork, NetlistError, NetworkKind, NodeId, NodeKind};
use crate::report::{MappingReport, PLIM_CYCLES_PER_NODE};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DelayError {
    #[error("word length {0} is below 2")]
    WordLength(usize),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Isa(#[from] IsaError),
}

/// Roles of the three fanins of a gate. The device holding `host` is
/// overwritten; `bl` is applied inverted, so its block element stores `!bl`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRoles {
    pub host: Edge,
    pub wl: Edge,
    pub bl: Edge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleAssignment {
    /// Indexed by node id; `None` for inputs and the constant.
    pub roles: Vec<Option<NodeRoles>>,
}

impl RoleAssignment {
    pub fn get(&self, n: NodeId) -> Option<&NodeRoles> {
        self.roles.get(n.0).and_then(Option::as_ref)
    }
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn require_mig(net: &LogicNetwork) -> Result<(), DelayError> {
    if net.kind() != NetworkKind::Mig {
        return Err(NetlistError::WrongKind { expected: NetworkKind::Mig, found: net.kind() }.into());
    }
    Ok(())
}

/// Picks host, wordline and bitline inputs for every gate. Candidates are
/// ranked by: inverted (or constant) bitline, non-inverted wordline and
/// host, wordline reused from an earlier gate of the same level, wordline
/// feeding several gates of the level, a single-fanout gate as host, a gate
/// as host, then the lowest host and wordline ids.
pub fn assign_roles(mig: &LogicNetwork) -> Result<RoleAssignment, DelayError> {
    require_mig(mig)?;
    let lv = mig.levels();
    let fo = mig.fanouts();
    let mut per_level: HashMap<(usize, usize), usize> = HashMap::new();
    for g in mig.gate_ids() {
        let targets: BTreeSet<usize> = mig.node(g).fanins.iter().map(|e| e.target.0).collect();
        for t in targets {
            *per_level.entry((t, lv[g.0])).or_default() += 1;
        }
    }
    let is_gate = |e: Edge| mig.node(e.target).is_gate();
    let mut chosen_wl: HashMap<usize, Vec<Edge>> = HashMap::new();
    let mut roles = vec![None; mig.len()];
    for g in mig.gate_ids() {
        let f = &mig.node(g).fanins;
        let level = lv[g.0];
        let earlier = chosen_wl.entry(level).or_default();
        let best = PERMS
            .iter()
            .map(|&[h, w, b]| NodeRoles { host: f[h], wl: f[w], bl: f[b] })
            .max_by_key(|r| {
                (
                    r.bl.is_const() || r.bl.inverted,
                    r.wl.is_const() || !r.wl.inverted,
                    r.host.is_const() || !r.host.inverted,
                    earlier.contains(&r.wl),
                    !r.wl.is_const() && per_level.get(&(r.wl.target.0, level)).copied().unwrap_or(0) >= 2,
                    is_gate(r.host) && fo[r.host.target.0] == 1,
                    is_gate(r.host),
                    std::cmp::Reverse(r.host.target),
                    std::cmp::Reverse(r.wl.target),
                )
            })
            .unwrap();
        earlier.push(best.wl);
        roles[g.0] = Some(best);
    }
    Ok(RoleAssignment { roles })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Host,
    Input,
}

/// One device of a block. `value` is what the device holds at the current
/// point of the block formation; `hosting` is the last gate computed on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub value: Edge,
    pub tag: Tag,
    pub hosting: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: usize,
    pub elements: Vec<usize>,
}

/// Snapshot of a block list: `(value, tag)` per element.
pub type BlockListView = Vec<Vec<(Edge, Tag)>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockFormation {
    pub w_d: usize,
    pub elements: Vec<Element>,
    /// Element merged into another one, by id.
    pub alias: Vec<Option<usize>>,
    pub blocks: Vec<Block>,
    /// Element on which each gate is computed.
    pub primary: Vec<Option<usize>>,
    /// Wordline and bitline elements of each gate.
    pub operands: Vec<Option<(usize, usize)>>,
    /// Element holding each output.
    pub outputs: Vec<usize>,
    /// Labelled snapshots after each step.
    pub history: Vec<(String, BlockListView)>,
}

impl BlockFormation {
    pub fn resolve(&self, mut e: usize) -> usize {
        while let Some(t) = self.alias[e] {
            e = t;
        }
        e
    }

    pub fn snapshot(&self) -> BlockListView {
        self.blocks
            .iter()
            .map(|b| b.elements.iter().map(|&e| (self.elements[e].value, self.elements[e].tag)).collect())
            .collect()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.elements.len()).collect()
    }

    pub fn occupied_bits(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    /// Elements that remain in some block.
    pub fn live_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().flat_map(|b| b.elements.iter().copied())
    }

    fn new_element(&mut self, value: Edge, tag: Tag) -> usize {
        self.elements.push(Element { value, tag, hosting: None });
        self.alias.push(None);
        self.elements.len() - 1
    }

    fn push_block(&mut self, elements: Vec<usize>, next_id: &mut usize) -> usize {
        self.blocks.push(Block { id: *next_id, elements });
        *next_id += 1;
        *next_id - 1
    }

    /// Pairs `(j element, i element)` of equal input elements.
    fn shared_inputs(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut used = BTreeSet::new();
        let mut out = Vec::new();
        for &ej in &self.blocks[j].elements {
            let a = &self.elements[ej];
            if a.tag != Tag::Input {
                continue;
            }
            if let Some(&ei) = self.blocks[i].elements.iter().find(|&&ei| {
                let b = &self.elements[ei];
                b.tag == Tag::Input && b.value == a.value && !used.contains(&ei)
            }) {
                used.insert(ei);
                out.push((ej, ei));
            }
        }
        out
    }

    fn hosted_at(&self, block: usize, level: usize, lv: &[usize]) -> Vec<NodeId> {
        self.blocks[block]
            .elements
            .iter()
            .filter_map(|&e| self.elements[e].hosting)
            .filter(|n| lv[n.0] == level)
            .collect()
    }

    fn merge(&mut self, level: usize, lv: &[usize], roles: &RoleAssignment, touched: &mut BTreeSet<usize>) {
        let mut i = self.blocks.len();
        while i > 0 {
            i -= 1;
            let mut j = self.blocks.len();
            while j > i + 1 {
                j -= 1;
                let (bi, bj) = (self.blocks[i].id, self.blocks[j].id);
                if !touched.contains(&bi) && !touched.contains(&bj) {
                    continue;
                }
                let shared = self.shared_inputs(i, j);
                if self.blocks[i].elements.len() + self.blocks[j].elements.len() - shared.len() > self.w_d {
                    continue;
                }
                let hi = self.hosted_at(i, level, lv);
                let hj = self.hosted_at(j, level, lv);
                let hosts_share_wl = hi.iter().any(|a| hj.iter().any(|b| roles.get(*a).unwrap().wl == roles.get(*b).unwrap().wl));
                if shared.is_empty() && !hosts_share_wl {
                    continue;
                }
                let moved = self.blocks.remove(j);
                for e in moved.elements {
                    match shared.iter().find(|p| p.0 == e) {
                        Some(&(_, keep)) => self.alias[e] = Some(keep),
                        None => self.blocks[i].elements.push(e),
                    }
                }
                if touched.contains(&bj) {
                    touched.insert(bi);
                }
            }
        }
    }
}

/// Builds the block list from the outputs down to level 1. A gate is
/// computed on the first block element holding it in positive form; other
/// elements holding it are filled with copies once its level is done. A
/// gate referenced only in negated form gets a block of its own.
pub fn form_blocks(mig: &LogicNetwork, roles: &RoleAssignment, w_d: usize) -> Result<BlockFormation, DelayError> {
    require_mig(mig)?;
    if w_d < 2 {
        return Err(DelayError::WordLength(w_d));
    }
    let lv = mig.levels();
    let mut f = BlockFormation {
        w_d,
        elements: Vec::new(),
        alias: Vec::new(),
        blocks: Vec::new(),
        primary: vec![None; mig.len()],
        operands: vec![None; mig.len()],
        outputs: Vec::new(),
        history: Vec::new(),
    };
    let mut next_id = 0;
    for o in mig.outputs() {
        let e = f.new_element(o.edge, Tag::Host);
        f.outputs.push(e);
        f.push_block(vec![e], &mut next_id);
    }
    f.history.push(("output".into(), f.snapshot()));
    let max_level = lv.iter().copied().max().unwrap_or(0);
    for l in (1..=max_level).rev() {
        let mut touched = BTreeSet::new();
        let at_level: Vec<NodeId> = mig.gate_ids().filter(|g| lv[g.0] == l).collect();
        for &n in &at_level {
            let refs: Vec<bool> = f.live_elements().filter(|&e| f.elements[e].value.target == n).map(|e| f.elements[e].value.inverted).collect();
            if !refs.is_empty() && refs.iter().all(|&inv| inv) {
                let e = f.new_element(Edge::regular(n), Tag::Host);
                touched.insert(f.push_block(vec![e], &mut next_id));
            }
        }
        let nb = f.blocks.len();
        for bi in 0..nb {
            for k in 0..f.blocks[bi].elements.len() {
                let e = f.blocks[bi].elements[k];
                let v = f.elements[e].value;
                if v.inverted || !mig.node(v.target).is_gate() || lv[v.target.0] != l || f.primary[v.target.0].is_some() {
                    continue;
                }
                let n = v.target;
                let r = *roles.get(n).expect("gate has roles");
                f.primary[n.0] = Some(e);
                f.elements[e] = Element { value: r.host, tag: Tag::Host, hosting: Some(n) };
                let w = f.new_element(r.wl, Tag::Input);
                let b = f.new_element(!r.bl, Tag::Input);
                f.operands[n.0] = Some((w, b));
                touched.insert(f.blocks[bi].id);
                touched.insert(f.push_block(vec![w, b], &mut next_id));
            }
        }
        f.history.push((format!("level {l}"), f.snapshot()));
        f.merge(l, &lv, roles, &mut touched);
        f.history.push((format!("level {l} merged"), f.snapshot()));
    }
    Ok(f)
}

/// Assignment of blocks to bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    pub w_d: usize,
    /// Bin of every block, in block order.
    pub bin_of: Vec<usize>,
    /// Blocks of every bin.
    pub bins: Vec<Vec<usize>>,
    pub occupancy: Vec<usize>,
}

impl Packing {
    pub fn words(&self) -> usize {
        self.bins.len()
    }

    /// Bins are laid out from the highest packed word down, so the first
    /// bin lands right below the scratch word.
    pub fn word_of_bin(&self, bin: usize) -> usize {
        self.bins.len() - 1 - bin
    }

    pub fn word_of_block(&self, block: usize) -> usize {
        self.word_of_bin(self.bin_of[block])
    }
}

/// First-fit bin packing in the given order.
pub fn pack_blocks(sizes: &[usize], w_d: usize) -> Packing {
    let mut p = Packing { w_d, bin_of: Vec::with_capacity(sizes.len()), bins: Vec::new(), occupancy: Vec::new() };
    for (i, &s) in sizes.iter().enumerate() {
        assert!(s <= w_d, "block of {s} elements exceeds the word length {w_d}");
        let bin = match p.occupancy.iter().position(|&o| o + s <= w_d) {
            Some(b) => b,
            None => {
                p.bins.push(Vec::new());
                p.occupancy.push(0);
                p.bins.len() - 1
            }
        };
        p.bins[bin].push(i);
        p.occupancy[bin] += s;
        p.bin_of.push(bin);
    }
    p
}

/// `(word, bit)` of every element still in a block.
pub fn element_locations(f: &BlockFormation, p: &Packing) -> Vec<Option<(usize, usize)>> {
    let mut loc = vec![None; f.elements.len()];
    let mut fill = vec![0usize; p.words()];
    for bin in 0..p.words() {
        let word = p.word_of_bin(bin);
        for &bi in &p.bins[bin] {
            for &e in &f.blocks[bi].elements {
                loc[e] = Some((word, fill[word]));
                fill[word] += 1;
            }
        }
    }
    for e in 0..f.elements.len() {
        if loc[e].is_none() && f.alias[e].is_some() {
            loc[e] = loc[f.resolve(e)];
        }
    }
    loc
}

struct Dmr(Option<usize>);

impl Dmr {
    fn read(&mut self, em: &mut Emitter, w: usize) {
        if self.0 != Some(w) {
            em.read(w);
            self.0 = Some(w);
        }
    }

    fn wrote(&mut self, w: usize) {
        if self.0 == Some(w) {
            self.0 = None;
        }
    }
}

/// Loads primary inputs and constants into their elements. Negated inputs
/// and constant ones are written through the bitlines in one Apply per
/// word; positive inputs go through the scratch word and are inverted back.
pub fn gen_pi_load(em: &mut Emitter, mig: &LogicNetwork, f: &BlockFormation, loc: &[Option<(usize, usize)>], scratch: usize) {
    let w_d = f.w_d;
    let mut direct: BTreeMap<usize, Vec<(usize, PirBit)>> = BTreeMap::new();
    let mut staged: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for e in f.live_elements() {
        let v = f.elements[e].value;
        let (word, bit) = loc[e].expect("placed element");
        match mig.node(v.target).kind {
            NodeKind::Const0 if v.inverted => direct.entry(word).or_default().push((bit, PirBit::Zero)),
            NodeKind::Pi => {
                let p = mig.pi_index(v.target).expect("input");
                if v.inverted {
                    direct.entry(word).or_default().push((bit, PirBit::Input(p)));
                } else {
                    staged.entry(word).or_default().push((bit, p));
                }
            }
            _ => {}
        }
    }
    for (word, items) in direct {
        let mut pir = vec![PirBit::Zero; w_d];
        let mut pairs = vec![None; w_d];
        for (bit, p) in items {
            pir[bit] = p;
            pairs[bit] = Some(bit);
        }
        em.apply_pir(word, WordlineSelect::One, pairs, pir);
    }
    for (word, items) in staged {
        let mut pir = vec![PirBit::Zero; w_d];
        let mut pairs = vec![None; w_d];
        for &(bit, p) in &items {
            pir[bit] = PirBit::Input(p);
            pairs[bit] = Some(bit);
        }
        em.apply_pir(scratch, WordlineSelect::One, pairs.clone(), pir);
        em.read(scratch);
        em.apply_dmr(word, WordlineSelect::One, pairs);
        let bits: Vec<usize> = items.iter().map(|x| x.0).collect();
        em.reset(scratch, &bits);
    }
}

/// Emits the input load, then every level: one Read and one Apply per
/// group of gates sharing operand word, wordline bit and host word,
/// followed by the copies of the level's gates.
pub fn gen_program_delay(
    mig: &LogicNetwork,
    roles: &RoleAssignment,
    f: &BlockFormation,
    p: &Packing,
) -> Result<(Program, MappingReport), DelayError> {
    require_mig(mig)?;
    let w_d = f.w_d;
    let scratch = p.words();
    let cfg = CrossbarConfig::new(p.words() + 1, w_d)?;
    let loc = element_locations(f, p);
    let mut em = Emitter::new(cfg);
    gen_pi_load(&mut em, mig, f, &loc, scratch);
    let lv = mig.levels();
    let max_level = lv.iter().copied().max().unwrap_or(0);
    let mut copies: BTreeMap<usize, Vec<(usize, NodeId, bool)>> = BTreeMap::new();
    for e in f.live_elements() {
        let v = f.elements[e].value;
        if mig.node(v.target).is_gate() {
            copies.entry(lv[v.target.0]).or_default().push((e, v.target, v.inverted));
        }
    }
    let mut dmr = Dmr(None);
    for l in 1..=max_level {
        let mut groups: BTreeMap<(usize, usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for n in mig.gate_ids().filter(|g| lv[g.0] == l) {
            let Some(site) = f.primary[n.0] else { continue };
            let (hw, hb) = loc[site].expect("placed host");
            let (w, b) = f.operands[n.0].expect("gate operands");
            let (iw, wb) = loc[f.resolve(w)].expect("placed wordline input");
            let (iw2, bb) = loc[f.resolve(b)].expect("placed bitline input");
            debug_assert_eq!(iw, iw2, "operands of {n} in different words");
            debug_assert!(roles.get(n).is_some());
            groups.entry((iw, wb, hw)).or_default().push((hb, bb));
        }
        for ((iw, wb, hw), members) in groups {
            dmr.read(&mut em, iw);
            let mut pairs = vec![None; w_d];
            for (hb, bb) in members {
                pairs[hb] = Some(bb);
            }
            em.apply_dmr(hw, WordlineSelect::FromSource(wb), pairs);
            dmr.wrote(hw);
        }
        let mut neg: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        let mut pos: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for &(e, n, inverted) in copies.get(&l).map(Vec::as_slice).unwrap_or(&[]) {
            let (sw, sb) = loc[f.primary[n.0].expect("computed gate")].unwrap();
            let (tw, tb) = loc[e].unwrap();
            let m = if inverted { &mut neg } else { &mut pos };
            m.entry((sw, tw)).or_default().push((tb, sb));
        }
        for ((sw, tw), items) in neg {
            dmr.read(&mut em, sw);
            let mut pairs = vec![None; w_d];
            for (tb, sb) in items {
                pairs[tb] = Some(sb);
            }
            em.apply_dmr(tw, WordlineSelect::One, pairs);
            dmr.wrote(tw);
        }
        for ((sw, tw), items) in pos {
            dmr.read(&mut em, sw);
            let mut pairs = vec![None; w_d];
            let mut back = vec![None; w_d];
            for &(tb, sb) in &items {
                pairs[tb] = Some(sb);
                back[tb] = Some(tb);
            }
            em.apply_dmr(scratch, WordlineSelect::One, pairs);
            dmr.wrote(scratch);
            dmr.read(&mut em, scratch);
            em.apply_dmr(tw, WordlineSelect::One, back);
            dmr.wrote(tw);
            let bits: Vec<usize> = items.iter().map(|x| x.0).collect();
            em.reset(scratch, &bits);
            dmr.wrote(scratch);
        }
    }
    let results = mig
        .outputs()
        .iter()
        .zip(&f.outputs)
        .map(|(o, &e)| {
            let (word, bit) = loc[f.resolve(e)].expect("placed output");
            ResultLocation { name: o.name.clone(), word, bit }
        })
        .collect();
    let program = em.finish(mig.pi_names(), results)?;
    let report = report_delay_stats(&program, mig, f, p);
    Ok((program, report))
}

/// Table-style statistics of a delay-flow program.
pub fn report_delay_stats(program: &Program, mig: &LogicNetwork, f: &BlockFormation, p: &Packing) -> MappingReport {
    let mut r = MappingReport::from_program("delay", program);
    let n = mig.num_gates();
    let d_p = PLIM_CYCLES_PER_NODE * n;
    r.levels = Some(mig.depth());
    r.blocks = Some(f.blocks.len());
    r.w_util = Some(if p.words() == 0 { 0.0 } else { 100.0 * f.occupied_bits() as f64 / (p.words() * f.w_d) as f64 });
    r.n_maj = Some(n);
    r.d_p = Some(d_p);
    r.speedup = Some(d_p as f64 / r.cycles as f64);
    r
}

/// Whole delay flow. AIGs are converted to MIGs first.
pub fn map_delay(net: &LogicNetwork, w_d: usize) -> Result<(Program, MappingReport), DelayError> {
    let mig = match net.kind() {
        NetworkKind::Aig => aig_to_mig(net)?,
        NetworkKind::Mig => net.clone(),
    };
    let roles = assign_roles(&mig)?;
    let f = form_blocks(&mig, &roles, w_d)?;
    let p = pack_blocks(&f.block_sizes(), w_d);
    gen_program_delay(&mig, &roles, &f, &p)
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Host => "h",
            Tag::Input => "i",
        })
    }
}
