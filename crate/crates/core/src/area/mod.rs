//! Area-constrained mapping: LUT cover, storage scheduling and per-LUT ESOP
//! evaluation on three compute wordlines.

mod codegen;
mod minimal;
mod schedule;

pub use codegen::{complement_cover, gen_cube_program, gen_esop_program, gen_xor_reduction, ComputeArea, Operand};
pub use minimal::map_minimal;
pub use schedule::{schedule_luts, timeline_violations, DeviceStatus, Placement, ScheduleEvent};

use crate::isa::{CrossbarConfig, Emitter, IsaError, Program, ResultLocation};
use crate::lut::{cover_klut, min_dev, LutError, LutGraph, LutInput};
use crate::netlist::{LogicNetwork, NetlistError};
use crate::report::MappingReport;
use thiserror::Error;

/// Wordlines reserved for computation.
pub const COMPUTE_ROWS: usize = 3;

#[derive(Debug, Error)]
pub enum AreaError {
    #[error("cannot be mapped with the current crossbar: Min_Dev = {min_dev} exceeds capacity {capacity} of {s_d}x{w_d}")]
    Infeasible { min_dev: usize, capacity: usize, s_d: usize, w_d: usize },
    #[error("unsupported input: {0}")]
    Input(String),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Lut(#[from] LutError),
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Crossbar rows split into compute wordlines `e0, e1, e2` (wordlines 0, 1,
/// 2) and storage wordlines `s_i = S_D - 1 - i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossbarLayout {
    pub s_d: usize,
    pub w_d: usize,
}

impl CrossbarLayout {
    pub fn new(s_d: usize, w_d: usize) -> Result<Self, AreaError> {
        if s_d < COMPUTE_ROWS {
            return Err(AreaError::Layout(format!("{s_d} wordlines leave no room for the {COMPUTE_ROWS} compute rows")));
        }
        if w_d < 2 {
            return Err(AreaError::Layout(format!("at least two bitlines are needed, got {w_d}")));
        }
        Ok(CrossbarLayout { s_d, w_d })
    }

    /// Number of storage wordlines `t`.
    pub fn storage_rows(&self) -> usize {
        self.s_d - COMPUTE_ROWS
    }

    pub fn storage_wordline(&self, i: usize) -> usize {
        self.s_d - 1 - i
    }

    /// Compute wordline `e_i`.
    pub fn e(&self, i: usize) -> usize {
        assert!(i < COMPUTE_ROWS);
        i
    }

    pub fn capacity(&self) -> usize {
        self.storage_rows() * self.w_d
    }
}

/// Covers the AIG with `k`-input LUTs and maps the result.
pub fn map_area(aig: &LogicNetwork, k: usize, s_d: usize, w_d: usize) -> Result<(Program, MappingReport), AreaError> {
    let g = cover_klut(aig, k)?;
    map_lut_graph(&g, s_d, w_d)
}

/// Result of mapping a LUT graph, with the schedule behind it.
#[derive(Debug, Clone)]
pub struct AreaMapping {
    pub program: Program,
    pub report: MappingReport,
    pub placement: Placement,
    /// Instruction count at the moment each LUT's value was in place.
    pub lut_done: Vec<usize>,
}

/// Schedules a LUT graph and emits one ESOP evaluation plus writeback per
/// LUT, interleaved with the scheduler's resets.
pub fn map_lut_graph(g: &LutGraph, s_d: usize, w_d: usize) -> Result<(Program, MappingReport), AreaError> {
    map_lut_graph_detailed(g, s_d, w_d).map(|m| (m.program, m.report))
}

pub fn map_lut_graph_detailed(g: &LutGraph, s_d: usize, w_d: usize) -> Result<AreaMapping, AreaError> {
    g.validate()?;
    let layout = CrossbarLayout::new(s_d, w_d)?;
    let md = min_dev(g);
    if !crate::lut::feasible(g, s_d, w_d) {
        return Err(AreaError::Infeasible { min_dev: md, capacity: layout.capacity(), s_d, w_d });
    }
    let placement = schedule_luts(g, &layout)?;
    let mut em = Emitter::new(CrossbarConfig::new(s_d, w_d)?);
    let mut ca = ComputeArea::new(&layout);
    let mut lut_done = vec![0; g.len()];
    for ev in &placement.events {
        match ev {
            ScheduleEvent::Reset { wordline, bits, .. } => ca.reset(&mut em, *wordline, bits),
            ScheduleEvent::Allocate { lut, wordline, bit, .. } => {
                let l = &g.luts[*lut];
                let ops: Vec<Operand> = l
                    .inputs
                    .iter()
                    .map(|i| match *i {
                        LutInput::Pi(p) => Operand::Pi(p),
                        LutInput::Lut(n) => {
                            let (w, b) = placement.device[n];
                            Operand::Stored { wordline: w, bit: b }
                        }
                    })
                    .collect();
                ca.lut(&mut em, &l.function, &ops, *wordline, *bit);
                lut_done[*lut] = em.len();
            }
        }
    }
    let results = g
        .outputs
        .iter()
        .zip(&g.output_names)
        .map(|(&o, name)| {
            let (word, bit) = placement.device[o];
            ResultLocation { name: name.clone(), word, bit }
        })
        .collect();
    let program = em.finish(g.pi_names.clone(), results)?;
    let mut report = MappingReport::from_program("area", &program);
    report.k = Some(g.k);
    report.n_lut = Some(g.len());
    report.levels = Some(g.depth());
    report.min_dev = Some(md);
    Ok(AreaMapping { program, report, placement, lut_done })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esop::{Cube, EsopCover, Literal};
    use crate::generators;
    use crate::isa::{PirBit, WordlineSelect};
    use crate::lut::tests::seven_lut_graph;
    use crate::netlist::{normalize_mig, Edge};
    use crate::simulator::{read_outputs, run, run_traced};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Lane `j` of input `i` is bit `i` of assignment `j`.
    fn lanes(n: usize) -> Vec<u64> {
        assert!(n <= 6);
        (0..n).map(|i| (0..64).filter(|j| (j >> i) & 1 == 1).fold(0u64, |w, j| w | (1 << j))).collect()
    }

    fn mask(n: usize) -> u64 {
        if n >= 6 {
            u64::MAX
        } else {
            (1u64 << (1 << n)) - 1
        }
    }

    fn assert_equivalent(net: &LogicNetwork, program: &Program) {
        let n = net.num_pis();
        for a in 0..1usize << n {
            let bits: Vec<bool> = (0..n).map(|i| (a >> i) & 1 == 1).collect();
            let st = run(program, &bits).unwrap();
            assert_eq!(read_outputs(&st, program), net.evaluate(&bits), "assignment {a:#b}");
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn lit(var: usize, inverted: bool) -> Literal {
        Literal { var, inverted }
    }

    #[test]
    fn layout_rows() {
        let l = CrossbarLayout::new(6, 4).unwrap();
        assert_eq!(l.storage_rows(), 3);
        assert_eq!((l.storage_wordline(0), l.storage_wordline(2)), (5, 3));
        assert_eq!(l.capacity(), 12);
        assert!(CrossbarLayout::new(2, 4).is_err());
        assert!(CrossbarLayout::new(4, 1).is_err());
    }

    #[test]
    fn seven_lut_schedule_rows() {
        let g = seven_lut_graph();
        let p = schedule_luts(&g, &CrossbarLayout::new(6, 4).unwrap()).unwrap();
        let rows: Vec<usize> = p.device.iter().map(|d| d.0).collect();
        assert_eq!(rows, vec![5, 5, 5, 4, 4, 4, 5]);
        assert!(timeline_violations(&g, &p).is_empty());
        assert_eq!(p.device[6], (5, 3));
    }

    #[test]
    fn single_lut_first_row_bit_zero() {
        let mut g = LutGraph::new(2, names(2));
        let n = g.add_lut(vec![LutInput::Pi(0), LutInput::Pi(1)], TruthTable::var(2, 0).and(&TruthTable::var(2, 1)));
        g.add_output(n, "f");
        for (s, w) in [(4, 2), (8, 8), (16, 3)] {
            let p = schedule_luts(&g, &CrossbarLayout::new(s, w).unwrap()).unwrap();
            assert_eq!(p.device[0], (s - 1, 0));
        }
    }

    #[test]
    fn schedule_rejects_overfull() {
        let g = seven_lut_graph();
        let err = map_lut_graph(&g, 4, 4).unwrap_err();
        assert!(matches!(err, AreaError::Infeasible { min_dev: 5, capacity: 4, .. }), "{err}");
    }

    use crate::truth::TruthTable;

    #[test]
    fn fig13_cube_panels() {
        // !a.b.c on bit 0, a.!b.c on bit 1
        let cover = EsopCover::new(
            3,
            vec![
                Cube::from_literals(&[lit(0, true), lit(1, false), lit(2, false)]),
                Cube::from_literals(&[lit(0, false), lit(1, true), lit(2, false)]),
            ],
        );
        let layout = CrossbarLayout::new(3, 2).unwrap();
        let mut em = Emitter::new(CrossbarConfig::new(3, 2).unwrap());
        let ops: Vec<Operand> = (0..3).map(Operand::Pi).collect();
        let bits = gen_cube_program(&mut em, &cover, &ops, &layout);
        assert_eq!(bits, vec![0, 1]);
        let p = em.finish(names(3), vec![]).unwrap();
        let (_, trace) = run_traced(&p, &lanes(3)).unwrap();
        let m = mask(3);
        let v = lanes(3);
        let (a, b, c) = (v[0] & m, v[1] & m, v[2] & m);
        let panels = [[0, 0], [!a & m, a & m], [!a & b, a & !b & m], [!a & b & c, a & !b & c]];
        let states: Vec<[u64; 2]> = std::iter::once([0, 0])
            .chain(trace.records.iter().filter(|r| r.instruction.word() == 2 && !r.instruction.is_read()).map(|r| [r.post[0] & m, r.post[1] & m]))
            .collect();
        let mut it = states.iter();
        for panel in panels {
            assert!(it.any(|s| *s == panel), "panel {panel:?} missing from {states:?}");
        }
    }

    #[test]
    fn positive_cube_and_constant_cube() {
        let layout = CrossbarLayout::new(3, 2).unwrap();
        let ab = EsopCover::new(2, vec![Cube::from_literals(&[lit(0, false), lit(1, false)])]);
        let mut em = Emitter::new(CrossbarConfig::new(3, 2).unwrap());
        gen_cube_program(&mut em, &ab, &[Operand::Pi(0), Operand::Pi(1)], &layout);
        let p = em.finish(names(2), vec![ResultLocation { name: "f".into(), word: 2, bit: 0 }]).unwrap();
        let v = lanes(2);
        let st = run(&p, &v).unwrap();
        assert_eq!(read_outputs(&st, &p)[0] & mask(2), v[0] & v[1] & mask(2));
        let applies_on_e2 = p.instructions.iter().filter(|i| !i.is_read() && i.word() == 2).count();
        assert_eq!(applies_on_e2, 2);

        let one = EsopCover::new(2, vec![Cube::ONE]);
        let mut em = Emitter::new(CrossbarConfig::new(3, 2).unwrap());
        gen_cube_program(&mut em, &one, &[Operand::Pi(0), Operand::Pi(1)], &layout);
        let p = em.finish(names(2), vec![]).unwrap();
        assert_eq!(p.len(), 1);
        let crate::isa::Instruction::Apply(a) = &p.instructions[0] else { panic!() };
        assert_eq!(a.ws, WordlineSelect::One);
        assert_eq!(p.pir_schedule[&0], vec![PirBit::Zero, PirBit::Zero]);
    }

    /// Loads input `i` into `e2` bit `pos[i]`, then reduces.
    fn xor_program(w_d: usize, pos: &[usize]) -> (Program, usize) {
        let layout = CrossbarLayout::new(3, w_d).unwrap();
        let mut em = Emitter::new(CrossbarConfig::new(3, w_d).unwrap());
        for (i, &b) in pos.iter().enumerate() {
            let mut pir = vec![PirBit::Zero; w_d];
            pir[0] = PirBit::Input(i);
            let mut pairs = vec![None; w_d];
            pairs[b] = Some(if w_d > 1 { 1 } else { 0 });
            em.apply_pir(2, WordlineSelect::FromSource(0), pairs, pir);
        }
        let before = em.len();
        let r = gen_xor_reduction(&mut em, pos, &layout);
        let added = em.len() - before;
        let p = em.finish(names(pos.len()), vec![ResultLocation { name: "x".into(), word: 2, bit: r }]).unwrap();
        (p, added)
    }

    #[test]
    fn xor_single_value_emits_nothing() {
        let (_, added) = xor_program(2, &[1]);
        assert_eq!(added, 0);
    }

    #[test]
    fn xor_four_values_two_rounds() {
        let (p, added) = xor_program(4, &[0, 1, 2, 3]);
        // 6 instructions per round shared by its pairs, plus one scratch reset
        assert_eq!(added, 13);
        let v = lanes(4);
        let st = run(&p, &v).unwrap();
        assert_eq!(read_outputs(&st, &p)[0] & mask(4), (v[0] ^ v[1] ^ v[2] ^ v[3]) & mask(4));
    }

    proptest! {
        #[test]
        fn xor_reduction_random_placements(m in 2usize..=8, extra in 0usize..4, seed in any::<u64>()) {
            let w_d = m + extra;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut bits: Vec<usize> = (0..w_d).collect();
            for i in (1..bits.len()).rev() {
                bits.swap(i, rng.gen_range(0..=i));
            }
            bits.truncate(m);
            let (p, _) = xor_program(w_d, &bits);
            let vals: Vec<u64> = (0..m).map(|_| rng.gen()).collect();
            let st = run(&p, &vals).unwrap();
            prop_assert_eq!(read_outputs(&st, &p)[0], vals.iter().fold(0, |x, y| x ^ y));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn schedule_never_evicts_live_values(seed in any::<u64>(), k in 2usize..=6, s_d in 4usize..=10, w_d in 2usize..=8) {
            let net = generators::random_aig(6, 40, 4, seed);
            let g = crate::lut::cover_klut(&net, k).unwrap();
            let layout = CrossbarLayout::new(s_d, w_d).unwrap();
            match schedule_luts(&g, &layout) {
                Ok(p) => {
                    prop_assert_eq!(timeline_violations(&g, &p), Vec::<String>::new());
                    prop_assert!(p.device.iter().all(|&(w, b)| w >= COMPUTE_ROWS && w < s_d && b < w_d));
                }
                Err(AreaError::Infeasible { .. }) => prop_assert!(crate::lut::min_dev(&g) > 0),
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }

    fn random_cover(rng: &mut ChaCha8Rng, vars: usize, cubes: usize) -> EsopCover {
        let cs = (0..cubes)
            .map(|_| {
                let lits: Vec<Literal> = (0..vars).filter_map(|v| match rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(lit(v, false)),
                    _ => Some(lit(v, true)),
                }).collect();
                Cube::from_literals(&lits)
            })
            .collect();
        EsopCover::new(vars, cs)
    }

    fn check_esop_program(cover: &EsopCover, s_d: usize, w_d: usize, ops: &[Operand], stored: &[(usize, usize, usize)]) {
        // stored: (input index, wordline, bit) copies placed before the computation
        let layout = CrossbarLayout::new(s_d, w_d).unwrap();
        let mut em = Emitter::new(CrossbarConfig::new(s_d, w_d).unwrap());
        for &(i, w, b) in stored {
            let mut pir = vec![PirBit::Zero; w_d];
            pir[0] = PirBit::Input(i);
            let mut pairs = vec![None; w_d];
            pairs[b] = Some(1);
            em.apply_pir(w, WordlineSelect::FromSource(0), pairs, pir);
        }
        let (w, b) = gen_esop_program(&mut em, cover, ops, &layout);
        let n = cover.arity;
        let p = em.finish(names(n), vec![ResultLocation { name: "f".into(), word: w, bit: b }]).unwrap();
        let st = run(&p, &lanes(n)).unwrap();
        let got = read_outputs(&st, &p)[0] & mask(n);
        let want = (0..1usize << n).filter(|&a| cover.cubes.iter().filter(|c| c.eval(a)).count() % 2 == 1).fold(0u64, |w, a| w | 1 << a);
        assert_eq!(got, want, "cover {cover}");
    }

    #[test]
    fn esop_random_covers_on_3x2() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let vars = rng.gen_range(1..=6);
            let cubes = rng.gen_range(0..=8);
            let cover = random_cover(&mut rng, vars, cubes);
            let ops: Vec<Operand> = (0..vars).map(Operand::Pi).collect();
            check_esop_program(&cover, 3, 2, &ops, &[]);
        }
    }

    #[test]
    fn esop_with_stored_operands() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let vars = rng.gen_range(1..=6);
            let w_d = rng.gen_range(2..=5);
            let s_d = 3 + rng.gen_range(1..=3);
            let cubes = rng.gen_range(0..=10);
            let cover = random_cover(&mut rng, vars, cubes);
            let mut ops = Vec::new();
            let mut stored = Vec::new();
            let mut next = vec![0usize; s_d];
            for v in 0..vars {
                let w = rng.gen_range(3..s_d);
                if rng.gen_bool(0.5) && next[w] < w_d {
                    stored.push((v, w, next[w]));
                    ops.push(Operand::Stored { wordline: w, bit: next[w] });
                    next[w] += 1;
                } else {
                    ops.push(Operand::Pi(v));
                }
            }
            check_esop_program(&cover, s_d, w_d, &ops, &stored);
        }
    }

    #[test]
    fn two_bit_xor_network() {
        let net = generators::vector_xor(2);
        for (k, s) in [(4, 4), (2, 8)] {
            let (p, r) = map_area(&net, k, s, 2).unwrap();
            assert_equivalent(&net, &p);
            assert_eq!(r.cycles, p.len() + 2);
        }
    }

    #[test]
    fn full_adder_k4_8x8() {
        let net = generators::full_adder();
        let (p, r) = map_area(&net, 4, 8, 8).unwrap();
        assert_equivalent(&net, &p);
        assert_eq!(r.k, Some(4));
        assert_eq!(r.i_total, p.len());
    }

    #[test]
    fn corpus_equivalence() {
        for (name, net) in generators::small_corpus() {
            for k in [2, 4, 6] {
                for (s, w) in [(8, 8), (16, 16)] {
                    match map_area(&net, k, s, w) {
                        Ok((p, _)) => assert_equivalent(&net, &p),
                        Err(AreaError::Infeasible { .. }) => {}
                        Err(e) => panic!("{name} k={k}: {e}"),
                    }
                }
            }
        }
    }

    #[test]
    fn seven_lut_graph_maps() {
        let g = seven_lut_graph();
        let (p, r) = map_lut_graph(&g, 6, 4).unwrap();
        assert_eq!(r.min_dev, Some(5));
        assert_eq!(r.levels, Some(4));
        for a in 0..64usize {
            let bits: Vec<bool> = (0..6).map(|i| (a >> i) & 1 == 1).collect();
            let st = run(&p, &bits).unwrap();
            assert_eq!(read_outputs(&st, &p), g.evaluate(&bits));
        }
    }

    fn random_mig(rng: &mut ChaCha8Rng, pis: usize, levels: usize) -> LogicNetwork {
        let mut net = LogicNetwork::new(crate::netlist::NetworkKind::Mig);
        let inputs: Vec<Edge> = (0..pis).map(|i| net.add_pi(format!("x{i}"))).collect();
        fn build(net: &mut LogicNetwork, rng: &mut ChaCha8Rng, inputs: &[Edge], depth: usize) -> Edge {
            if depth == 0 || rng.gen_bool(0.2) {
                return match rng.gen_range(0..10) {
                    0 => Edge::new(crate::netlist::NodeId::CONST0, rng.gen()),
                    _ => {
                        let e = inputs[rng.gen_range(0..inputs.len())];
                        if rng.gen() { !e } else { e }
                    }
                };
            }
            let a = build(net, rng, inputs, depth - 1);
            let b = build(net, rng, inputs, depth - 1);
            let c = build(net, rng, inputs, depth - 1);
            let g = net.add_maj(a, b, c);
            if rng.gen() { !g } else { g }
        }
        let root = build(&mut net, rng, &inputs, levels);
        net.add_output(root, "f");
        net
    }

    #[test]
    fn minimal_random_migs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let levels = rng.gen_range(1..=6);
            let pis = rng.gen_range(1..=8);
            let net = normalize_mig(&random_mig(&mut rng, pis, levels)).unwrap();
            let (p, r) = map_minimal(&net).unwrap();
            let k = r.k.unwrap();
            assert!(r.devices_used <= 2 * (k + 1), "{} devices for k = {k}", r.devices_used);
            assert_eq!(p.config.s_d, k + 1);
            assert_equivalent(&net, &p);
        }
    }

    #[test]
    fn minimal_two_level() {
        let mut net = LogicNetwork::new(crate::netlist::NetworkKind::Mig);
        let a = net.add_pi("a");
        let b = net.add_pi("b");
        let c = net.add_pi("c");
        let g = net.add_maj(a, b, !c);
        net.add_output(g, "f");
        let (p, r) = map_minimal(&net).unwrap();
        assert!(r.devices_used <= 4);
        assert_eq!(p.len(), 2);
        assert_equivalent(&net, &p);
    }

    #[test]
    fn minimal_wire_output() {
        let mut net = LogicNetwork::new(crate::netlist::NetworkKind::Mig);
        let a = net.add_pi("a");
        net.add_output(a, "f");
        let (p, r) = map_minimal(&net).unwrap();
        assert_eq!(r.k, Some(1));
        assert_eq!(r.n_maj, Some(0));
        assert_equivalent(&net, &p);
    }

    #[test]
    fn minimal_rejects_unnormalized() {
        let mut net = LogicNetwork::new(crate::netlist::NetworkKind::Mig);
        let a = net.add_pi("a");
        let b = net.add_pi("b");
        let c = net.add_pi("c");
        let g = net.add_maj(a, b, c);
        let h = net.add_maj(g, !g, c);
        net.add_output(h, "f");
        assert!(matches!(map_minimal(&net), Err(AreaError::Input(_))));
    }
}
