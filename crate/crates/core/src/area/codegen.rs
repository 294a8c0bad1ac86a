//! Instruction generation on the three compute wordlines.
//!
//! Cubes are built on `e2`, one per bitline. A literal `l` is applied to a
//! cube device through its bitline as `!l`: the first literal of a cube is
//! loaded onto a zero device with wordline 1, later ones are ANDed with
//! wordline 0. Negated inputs therefore stream straight from the PIR or a
//! storage readout, while positive literals are first written inverted into
//! `e0`. `e1` is scratch for XOR rounds.

use super::CrossbarLayout;
use crate::esop::{extract_esop, Cube, EsopCover, Literal};
use crate::isa::{Emitter, PirBit, WordlineSelect};
use crate::truth::TruthTable;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Where a cover variable comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    /// Program input by index, streamed through the PIR.
    Pi(usize),
    /// Value stored in the crossbar.
    Stored { wordline: usize, bit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Src {
    Pir,
    Row(usize),
    E0,
}

/// Tracks which compute devices may be nonzero and what the DMR holds.
#[derive(Debug, Clone)]
pub struct ComputeArea {
    e: [usize; 3],
    w_d: usize,
    dirty: [Vec<bool>; 3],
    dmr: Option<usize>,
}

impl ComputeArea {
    /// Assumes the compute wordlines start at zero.
    pub fn new(layout: &CrossbarLayout) -> Self {
        ComputeArea {
            e: [layout.e(0), layout.e(1), layout.e(2)],
            w_d: layout.w_d,
            dirty: [vec![false; layout.w_d], vec![false; layout.w_d], vec![false; layout.w_d]],
            dmr: None,
        }
    }

    pub fn e2(&self) -> usize {
        self.e[2]
    }

    fn read(&mut self, em: &mut Emitter, w: usize) {
        if self.dmr != Some(w) {
            em.read(w);
            self.dmr = Some(w);
        }
    }

    fn written(&mut self, w: usize) {
        if self.dmr == Some(w) {
            self.dmr = None;
        }
    }

    fn apply_dmr(&mut self, em: &mut Emitter, w: usize, ws: WordlineSelect, pairs: Vec<Option<usize>>) {
        em.apply_dmr(w, ws, pairs);
        self.written(w);
    }

    fn apply_pir(&mut self, em: &mut Emitter, w: usize, ws: WordlineSelect, pairs: Vec<Option<usize>>, pir: Vec<PirBit>) {
        em.apply_pir(w, ws, pairs, pir);
        self.written(w);
    }

    /// Resets devices of a storage or compute wordline.
    pub fn reset(&mut self, em: &mut Emitter, w: usize, bits: &[usize]) {
        if !bits.is_empty() {
            em.reset(w, bits);
            self.written(w);
        }
    }

    /// Writes constant 1 into zero devices.
    pub fn set(&mut self, em: &mut Emitter, w: usize, bits: &[usize]) {
        if !bits.is_empty() {
            em.set(w, bits);
            self.written(w);
        }
    }

    fn clean(&mut self, em: &mut Emitter, r: usize, bits: &[usize]) {
        let dirty: Vec<usize> = bits.iter().copied().filter(|&b| self.dirty[r][b]).collect();
        self.reset(em, self.e[r], &dirty);
        for b in dirty {
            self.dirty[r][b] = false;
        }
    }

    fn mark(&mut self, r: usize, bits: impl IntoIterator<Item = usize>) {
        for b in bits {
            self.dirty[r][b] = true;
        }
    }

    /// Computes each cube of `batch` on its `e2` bit.
    pub fn cubes(&mut self, em: &mut Emitter, batch: &[(Cube, usize)], ops: &[Operand]) {
        let w_d = self.w_d;
        let e2 = self.e[2];
        let bits: Vec<usize> = batch.iter().map(|x| x.1).collect();
        self.clean(em, 2, &bits);
        let ones: Vec<usize> = batch.iter().filter(|(c, _)| c.is_empty()).map(|x| x.1).collect();
        self.set(em, e2, &ones);
        self.mark(2, bits.iter().copied());

        let mut pending: Vec<VecDeque<Literal>> = batch.iter().map(|(c, _)| c.literals().into()).collect();
        let mut loaded = vec![false; batch.len()];
        let mut staged: HashMap<usize, usize> = HashMap::new();
        loop {
            let mut groups: BTreeMap<(Src, bool), Vec<usize>> = BTreeMap::new();
            let mut any = false;
            for (ci, q) in pending.iter().enumerate() {
                let Some(lit) = q.front() else { continue };
                any = true;
                let src = match (lit.inverted, ops[lit.var]) {
                    (true, Operand::Pi(_)) => Src::Pir,
                    (true, Operand::Stored { wordline, .. }) => Src::Row(wordline),
                    (false, _) if staged.contains_key(&lit.var) => Src::E0,
                    _ => continue,
                };
                groups.entry((src, loaded[ci])).or_default().push(ci);
            }
            if !any {
                break;
            }
            if groups.is_empty() {
                self.restage(em, &pending, ops, &mut staged);
                continue;
            }
            let held = |s: Src| match s {
                Src::Pir => false,
                Src::Row(r) => self.dmr == Some(r),
                Src::E0 => self.dmr == Some(self.e[0]),
            };
            let ((src, is_loaded), members) = groups
                .into_iter()
                .max_by_key(|((s, l), m)| (m.len(), held(*s), !*l, std::cmp::Reverse(*s)))
                .unwrap();
            let ws = if is_loaded { WordlineSelect::Zero } else { WordlineSelect::One };
            let mut pairs = vec![None; w_d];
            match src {
                Src::Pir => {
                    let mut pir = vec![PirBit::Zero; w_d];
                    for &ci in &members {
                        let lit = pending[ci][0];
                        let Operand::Pi(p) = ops[lit.var] else { unreachable!() };
                        pir[batch[ci].1] = PirBit::Input(p);
                        pairs[batch[ci].1] = Some(batch[ci].1);
                    }
                    self.apply_pir(em, e2, ws, pairs, pir);
                }
                Src::Row(r) => {
                    self.read(em, r);
                    for &ci in &members {
                        let Operand::Stored { bit, .. } = ops[pending[ci][0].var] else { unreachable!() };
                        pairs[batch[ci].1] = Some(bit);
                    }
                    self.apply_dmr(em, e2, ws, pairs);
                }
                Src::E0 => {
                    self.read(em, self.e[0]);
                    for &ci in &members {
                        pairs[batch[ci].1] = Some(staged[&pending[ci][0].var]);
                    }
                    self.apply_dmr(em, e2, ws, pairs);
                }
            }
            for &ci in &members {
                pending[ci].pop_front();
                loaded[ci] = true;
            }
        }
    }

    /// Writes complements of pending positive literals into `e0`, most
    /// frequent first, giving priority to literals that block every cube.
    fn restage(&mut self, em: &mut Emitter, pending: &[VecDeque<Literal>], ops: &[Operand], staged: &mut HashMap<usize, usize>) {
        let w_d = self.w_d;
        let mut occ: BTreeMap<usize, usize> = BTreeMap::new();
        for q in pending {
            for l in q.iter().filter(|l| !l.inverted) {
                *occ.entry(l.var).or_default() += 1;
            }
        }
        let fronts: BTreeSet<usize> = pending.iter().filter_map(|q| q.front()).filter(|l| !l.inverted).map(|l| l.var).collect();
        staged.retain(|v, _| occ.contains_key(v));
        if staged.len() >= w_d {
            staged.clear();
        }
        let used: BTreeSet<usize> = staged.values().copied().collect();
        let free: Vec<usize> = (0..w_d).filter(|b| !used.contains(b)).collect();
        let mut cand: Vec<usize> = occ.keys().copied().filter(|v| !staged.contains_key(v)).collect();
        cand.sort_by_key(|v| (!fronts.contains(v), std::cmp::Reverse(occ[v]), *v));
        let chosen: Vec<(usize, usize)> = cand.into_iter().zip(free).collect();
        let bits: Vec<usize> = chosen.iter().map(|x| x.1).collect();
        self.clean(em, 0, &bits);
        let e0 = self.e[0];
        let mut pir = vec![PirBit::Zero; w_d];
        let mut pairs = vec![None; w_d];
        let mut by_row: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for &(v, b) in &chosen {
            match ops[v] {
                Operand::Pi(p) => {
                    pir[b] = PirBit::Input(p);
                    pairs[b] = Some(b);
                }
                Operand::Stored { wordline, bit } => by_row.entry(wordline).or_default().push((b, bit)),
            }
            staged.insert(v, b);
        }
        if pairs.iter().any(Option::is_some) {
            self.apply_pir(em, e0, WordlineSelect::One, pairs, pir);
        }
        // rows already in the DMR go first
        let mut rows: Vec<usize> = by_row.keys().copied().collect();
        rows.sort_by_key(|&r| (self.dmr != Some(r), r));
        for r in rows {
            self.read(em, r);
            let mut pairs = vec![None; w_d];
            for &(b, bit) in &by_row[&r] {
                pairs[b] = Some(bit);
            }
            self.apply_dmr(em, e0, WordlineSelect::One, pairs);
        }
        self.mark(0, bits);
    }

    /// XORs the `e2` values at `positions` pairwise in a balanced tree and
    /// returns the bit holding the result (the first position).
    pub fn xor_reduce(&mut self, em: &mut Emitter, positions: &[usize]) -> usize {
        let w_d = self.w_d;
        let (e1, e2) = (self.e[1], self.e[2]);
        let mut list = positions.to_vec();
        while list.len() > 1 {
            let pairs: Vec<(usize, usize)> = list.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0], c[1])).collect();
            let firsts: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            // a <- p.!q, b <- !p.q
            self.read(em, e2);
            let mut step = vec![None; w_d];
            for &(a, b) in &pairs {
                step[a] = Some(b);
                step[b] = Some(a);
            }
            self.apply_dmr(em, e2, WordlineSelect::Zero, step);
            // e1[a] <- !(!p.q)
            self.read(em, e2);
            self.clean(em, 1, &firsts);
            let mut step = vec![None; w_d];
            for &(a, b) in &pairs {
                step[a] = Some(b);
            }
            self.apply_dmr(em, e1, WordlineSelect::One, step);
            self.mark(1, firsts.iter().copied());
            // a <- p.!q + !p.q
            self.read(em, e1);
            let mut step = vec![None; w_d];
            for &a in &firsts {
                step[a] = Some(a);
            }
            self.apply_dmr(em, e2, WordlineSelect::One, step);
            let mut next = firsts;
            if list.len() % 2 == 1 {
                next.push(*list.last().unwrap());
            }
            list = next;
        }
        list[0]
    }

    /// Computes the cover on `e2` bit 0.
    pub fn esop(&mut self, em: &mut Emitter, cover: &EsopCover, ops: &[Operand]) {
        if cover.cubes.is_empty() {
            self.clean(em, 2, &[0]);
            return;
        }
        let mut first = true;
        for batch in batches(&cover.cubes, self.w_d) {
            let start = if first { 0 } else { 1 };
            let placed: Vec<(Cube, usize)> = batch.into_iter().zip(start..).collect();
            self.cubes(em, &placed, ops);
            let mut positions: Vec<usize> = placed.iter().map(|x| x.1).collect();
            if !first {
                positions.insert(0, 0);
            }
            let r = self.xor_reduce(em, &positions);
            debug_assert_eq!(r, 0);
            first = false;
        }
    }

    /// Computes `f` and writes it into the zero device `(w, bit)`.
    pub fn lut(&mut self, em: &mut Emitter, f: &TruthTable, ops: &[Operand], w: usize, bit: usize) {
        if f.is_zero() {
            return;
        }
        if f.is_one() {
            self.set(em, w, &[bit]);
            return;
        }
        let cover = complement_cover(f);
        self.esop(em, &cover, ops);
        // M(0, 1, !(!f)) = f
        self.read(em, self.e[2]);
        let mut pairs = vec![None; self.w_d];
        pairs[bit] = Some(0);
        self.apply_dmr(em, w, WordlineSelect::One, pairs);
    }
}

/// Smallest available cover of `!f`.
pub fn complement_cover(f: &TruthTable) -> EsopCover {
    let direct = extract_esop(&f.not()).expect("LUT arity within ESOP limit");
    let toggled = extract_esop(f).expect("LUT arity within ESOP limit").complement();
    if (toggled.cubes.len(), toggled.num_literals()) < (direct.cubes.len(), direct.num_literals()) {
        toggled
    } else {
        direct
    }
}

/// Groups cubes into batches (`w_d` cubes first, then `w_d - 1` next to the
/// running result), seeding each batch with the most frequent literal and
/// growing it with the cubes sharing the most literals.
fn batches(cubes: &[Cube], w_d: usize) -> Vec<Vec<Cube>> {
    let mut rest: Vec<Cube> = cubes.to_vec();
    let mut out = Vec::new();
    let mut cap = w_d;
    while !rest.is_empty() {
        let mut occ: BTreeMap<Literal, usize> = BTreeMap::new();
        for c in &rest {
            for l in c.literals() {
                *occ.entry(l).or_default() += 1;
            }
        }
        let seed = occ
            .iter()
            .max_by_key(|(l, n)| (**n, std::cmp::Reverse(**l)))
            .and_then(|(l, _)| rest.iter().position(|c| c.literals().contains(l)))
            .unwrap_or(0);
        let mut batch = vec![rest.remove(seed)];
        while batch.len() < cap && !rest.is_empty() {
            let have: BTreeSet<Literal> = batch.iter().flat_map(|c| c.literals()).collect();
            let (i, _) = rest
                .iter()
                .enumerate()
                .max_by_key(|(i, c)| (c.literals().iter().filter(|l| have.contains(l)).count(), std::cmp::Reverse(*i)))
                .unwrap();
            batch.push(rest.remove(i));
        }
        out.push(batch);
        cap = w_d - 1;
    }
    out
}

/// Cube batch on a clean compute area; cube `i` lands on `e2` bit `i`.
pub fn gen_cube_program(em: &mut Emitter, cover: &EsopCover, ops: &[Operand], layout: &CrossbarLayout) -> Vec<usize> {
    assert!(cover.cubes.len() <= layout.w_d, "batch wider than the crossbar");
    let mut ca = ComputeArea::new(layout);
    let placed: Vec<(Cube, usize)> = cover.cubes.iter().copied().zip(0..).collect();
    ca.cubes(em, &placed, ops);
    placed.iter().map(|x| x.1).collect()
}

/// XOR tree over `e2` bits on a clean `e1`; returns the result bit.
pub fn gen_xor_reduction(em: &mut Emitter, positions: &[usize], layout: &CrossbarLayout) -> usize {
    let mut ca = ComputeArea::new(layout);
    ca.xor_reduce(em, positions)
}

/// Whole cover on a clean compute area; the value ends on `e2` bit 0.
pub fn gen_esop_program(em: &mut Emitter, cover: &EsopCover, ops: &[Operand], layout: &CrossbarLayout) -> (usize, usize) {
    let mut ca = ComputeArea::new(layout);
    ca.esop(em, cover, ops);
    (ca.e2(), 0)
}
