//! Independent checks: program versus network equivalence, optimal bin
//! packing, and value lifetimes replayed on simulator traces.
//!
//! Random vectors come from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.3). Vector `j` takes `ceil(n / 64)` consecutive `next_u64` draws; input
//! `i` is bit `i % 64` of draw `i / 64`.

use crate::area::AreaMapping;
use crate::isa::Program;
use crate::lut::LutGraph;
use crate::netlist::LogicNetwork;
use crate::simulator::{read_outputs, run, SimError, Trace};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest input count accepted by the exhaustive check.
pub const EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{pis} inputs exceed the exhaustive limit of {limit}")]
    TooManyInputs { pis: usize, limit: usize },
    #[error("program inputs {program:?} do not match network inputs {network:?}")]
    Inputs { program: Vec<String>, network: Vec<String> },
    #[error("program has {program} results but the network has {network} outputs")]
    Outputs { program: usize, network: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Random { vectors: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Position of the vector in the enumeration or random stream.
    pub index: u64,
    pub assignment: Vec<bool>,
    pub expected: Vec<bool>,
    pub got: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceResult {
    pub mode: Mode,
    pub vectors: u64,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

impl EquivalenceResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// For every program input, the index of the network input with that name.
fn input_map(net: &LogicNetwork, program: &Program) -> Result<Vec<usize>, VerifyError> {
    let names = net.pi_names();
    let err = || VerifyError::Inputs { program: program.inputs.clone(), network: names.clone() };
    if program.inputs.len() != names.len() {
        return Err(err());
    }
    program.inputs.iter().map(|p| names.iter().position(|n| n == p).ok_or_else(err)).collect()
}

/// Lane index with the expected and produced outputs.
type LaneMismatch = (usize, Vec<bool>, Vec<bool>);

/// Checks 64 vectors at once. Returns the first failing lane.
fn check_lanes(net: &LogicNetwork, program: &Program, map: &[usize], lanes: &[u64], valid: u64) -> Result<Option<LaneMismatch>, SimError> {
    let expected = net.simulate(lanes);
    let staged: Vec<u64> = map.iter().map(|&i| lanes[i]).collect();
    let st = run(program, &staged)?;
    let got = read_outputs(&st, program);
    let diff = expected.iter().zip(&got).fold(0u64, |d, (e, g)| d | (e ^ g)) & valid;
    if diff == 0 {
        return Ok(None);
    }
    let lane = diff.trailing_zeros() as usize;
    let bit = |w: &u64| (w >> lane) & 1 == 1;
    Ok(Some((lane, expected.iter().map(bit).collect(), got.iter().map(bit).collect())))
}

fn check_shapes(net: &LogicNetwork, program: &Program) -> Result<Vec<usize>, VerifyError> {
    if program.result_locations.len() != net.outputs().len() {
        return Err(VerifyError::Outputs { program: program.result_locations.len(), network: net.outputs().len() });
    }
    input_map(net, program)
}

/// Every assignment, 64 per simulator run, spread over worker threads.
pub fn check_exhaustive(net: &LogicNetwork, program: &Program) -> Result<EquivalenceResult, VerifyError> {
    let n = net.num_pis();
    if n > EXHAUSTIVE_LIMIT {
        return Err(VerifyError::TooManyInputs { pis: n, limit: EXHAUSTIVE_LIMIT });
    }
    let map = check_shapes(net, program)?;
    let total = 1u64 << n;
    let chunks = total.div_ceil(64);
    let valid = if n >= 6 { u64::MAX } else { (1u64 << total) - 1 };
    let found = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lanes: Vec<u64> = (0..n)
                .map(|i| {
                    if i < 6 {
                        (0..64u64).filter(|j| (j >> i) & 1 == 1).fold(0, |w, j| w | 1 << j)
                    } else if (c >> (i - 6)) & 1 == 1 {
                        u64::MAX
                    } else {
                        0
                    }
                })
                .collect();
            check_lanes(net, program, &map, &lanes, valid).map(|r| r.map(|(lane, e, g)| (c * 64 + lane as u64, e, g)))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    let counterexample = match found {
        None => None,
        Some(Err(e)) => return Err(e.into()),
        Some(Ok(None)) => unreachable!(),
        Some(Ok(Some((index, expected, got)))) => {
            Some(Counterexample { index, assignment: (0..n).map(|i| (index >> i) & 1 == 1).collect(), expected, got })
        }
    };
    Ok(EquivalenceResult { mode: Mode::Exhaustive, vectors: total, passed: counterexample.is_none(), counterexample })
}

/// The first `count` vectors of the seeded stream.
pub fn random_vectors(n: usize, count: u64, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = n.div_ceil(64);
    (0..count)
        .map(|_| {
            let draws: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
            (0..n).map(|i| (draws[i / 64] >> (i % 64)) & 1 == 1).collect()
        })
        .collect()
}

/// `count` seeded random vectors.
pub fn check_random(net: &LogicNetwork, program: &Program, count: u64, seed: u64) -> Result<EquivalenceResult, VerifyError> {
    let map = check_shapes(net, program)?;
    let n = net.num_pis();
    let vectors = random_vectors(n, count, seed);
    let found = vectors
        .par_chunks(64)
        .enumerate()
        .map(|(c, chunk)| {
            let lanes: Vec<u64> = (0..n).map(|i| chunk.iter().enumerate().fold(0u64, |w, (j, v)| w | (v[i] as u64) << j)).collect();
            let valid = if chunk.len() == 64 { u64::MAX } else { (1u64 << chunk.len()) - 1 };
            check_lanes(net, program, &map, &lanes, valid).map(|r| r.map(|(lane, e, g)| ((c * 64 + lane) as u64, e, g)))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    let counterexample = match found {
        None => None,
        Some(Err(e)) => return Err(e.into()),
        Some(Ok(None)) => unreachable!(),
        Some(Ok(Some((index, expected, got)))) => {
            Some(Counterexample { index, assignment: vectors[index as usize].clone(), expected, got })
        }
    };
    Ok(EquivalenceResult { mode: Mode::Random, vectors: count, passed: counterexample.is_none(), counterexample })
}

pub fn check_equivalence(net: &LogicNetwork, program: &Program, mode: CheckMode) -> Result<EquivalenceResult, VerifyError> {
    match mode {
        CheckMode::Exhaustive => check_exhaustive(net, program),
        CheckMode::Random { vectors, seed } => check_random(net, program, vectors, seed),
    }
}

/// Minimum number of bins of capacity `w_d` holding all sizes.
pub fn optimal_packing(sizes: &[usize], w_d: usize) -> usize {
    assert!(sizes.iter().all(|&s| s <= w_d), "item larger than a bin");
    let mut items: Vec<usize> = sizes.iter().copied().filter(|&s| s > 0).collect();
    items.sort_unstable_by(|a, b| b.cmp(a));
    let lower = items.iter().sum::<usize>().div_ceil(w_d);
    let mut best = items.len();
    fn go(i: usize, items: &[usize], bins: &mut Vec<usize>, w_d: usize, lower: usize, best: &mut usize) {
        if bins.len() >= *best || *best == lower {
            return;
        }
        if i == items.len() {
            *best = bins.len();
            return;
        }
        let mut tried = Vec::new();
        for b in 0..bins.len() {
            // bins with equal load are interchangeable
            if bins[b] + items[i] <= w_d && !tried.contains(&bins[b]) {
                tried.push(bins[b]);
                bins[b] += items[i];
                go(i + 1, items, bins, w_d, lower, best);
                bins[b] -= items[i];
            }
        }
        bins.push(items[i]);
        go(i + 1, items, bins, w_d, lower, best);
        bins.pop();
    }
    go(0, &items, &mut Vec::new(), w_d, lower, &mut best);
    best
}

/// A stored value that must stay untouched from the instruction count
/// `produced_at` until `needed_until`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSpan {
    pub label: String,
    pub word: usize,
    pub bit: usize,
    pub produced_at: usize,
    pub needed_until: usize,
}

/// Lifetimes of the LUT values of an area mapping: each value is needed
/// until its last consumer is in place, outputs until the end.
pub fn lut_spans(g: &LutGraph, m: &AreaMapping) -> Vec<ValueSpan> {
    let succ = g.successors();
    (0..g.len())
        .map(|n| {
            let (word, bit) = m.placement.device[n];
            let mut until = succ[n].iter().map(|&s| m.lut_done[s]).max().unwrap_or(m.lut_done[n]);
            if g.outputs.contains(&n) {
                until = m.program.len();
            }
            ValueSpan { label: format!("LUT {n}"), word, bit, produced_at: m.lut_done[n], needed_until: until }
        })
        .collect()
}

/// Reports every instruction that changes a device inside its span.
pub fn replay_safety<L: Copy + PartialEq>(trace: &Trace<L>, spans: &[ValueSpan]) -> Vec<String> {
    let mut out = Vec::new();
    for s in spans {
        for r in trace.records.iter().filter(|r| r.index >= s.produced_at && r.index < s.needed_until) {
            if !r.instruction.is_read() && r.instruction.word() == s.word && r.pre[s.bit] != r.post[s.bit] {
                out.push(format!("{} at ({}, {}) changed by instruction {} while still needed", s.label, s.word, s.bit, r.index));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::area::map_lut_graph_detailed;
    use crate::generators;
    use crate::isa::{CrossbarConfig, Emitter, Instruction, PirBit, ResultLocation, WordlineSelect};
    use crate::lut::cover_klut;
    use crate::netlist::NetworkKind;
    use crate::simulator::run_traced;
    use crate::simulator::tests::xor_program;
    use proptest::prelude::*;

    fn wire() -> (LogicNetwork, Program) {
        let mut net = LogicNetwork::new(NetworkKind::Aig);
        let a = net.add_pi("a");
        net.add_output(a, "f");
        let mut em = Emitter::new(CrossbarConfig::new(1, 2).unwrap());
        em.apply_pir(0, WordlineSelect::FromSource(0), vec![Some(1), None], vec![PirBit::Input(0), PirBit::Zero]);
        let p = em.finish(vec!["a".into()], vec![ResultLocation { name: "f".into(), word: 0, bit: 0 }]).unwrap();
        (net, p)
    }

    #[test]
    fn identity_wire() {
        let (net, p) = wire();
        let r = check_exhaustive(&net, &p).unwrap();
        assert!(r.passed);
        assert_eq!(r.vectors, 2);
    }

    #[test]
    fn two_bit_xor_listing_matches_network() {
        let net = generators::vector_xor(2);
        let mut p = xor_program();
        p.inputs = net.pi_names();
        let r = check_exhaustive(&net, &p).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.vectors, 16);
    }

    #[test]
    fn flipped_polarity_is_caught() {
        let net = generators::vector_xor(2);
        let mut p = xor_program();
        p.inputs = net.pi_names();
        let Instruction::Apply(a) = &mut p.instructions[7] else { panic!() };
        a.ws = WordlineSelect::Zero;
        let r = check_exhaustive(&net, &p).unwrap();
        assert!(!r.passed);
        let c = r.counterexample.unwrap();
        assert_ne!(c.expected, c.got);
        assert_eq!(c.assignment, (0..4).map(|i| (c.index >> i) & 1 == 1).collect::<Vec<_>>());
        let again = check_random(&net, &p, 500, 3).unwrap();
        assert!(!again.passed);
    }

    #[test]
    fn lowest_counterexample_wins() {
        // constant-0 program against a function that is 1 only on the last assignment
        let net = generators::parity(7);
        let mut em = Emitter::new(CrossbarConfig::new(1, 2).unwrap());
        em.read(0);
        let names = net.pi_names();
        let p = em.finish(names, vec![ResultLocation { name: "p".into(), word: 0, bit: 0 }]).unwrap();
        let r = check_exhaustive(&net, &p).unwrap();
        assert_eq!(r.counterexample.unwrap().index, 1);
    }

    #[test]
    fn random_mode_is_reproducible() {
        assert_eq!(random_vectors(70, 5, 9), random_vectors(70, 5, 9));
        assert_ne!(random_vectors(70, 5, 9), random_vectors(70, 5, 10));
        let net = generators::ripple_adder(4);
        let (p, _) = crate::area::map_area(&net, 4, 16, 8).unwrap();
        let a = check_random(&net, &p, 1000, 42).unwrap();
        assert!(a.passed);
        assert_eq!(a, check_random(&net, &p, 1000, 42).unwrap());
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let (net, mut p) = wire();
        p.inputs = vec!["b".into()];
        assert!(matches!(check_exhaustive(&net, &p), Err(VerifyError::Inputs { .. })));
        let big = generators::parity(17);
        assert!(matches!(check_exhaustive(&big, &p), Err(VerifyError::TooManyInputs { .. })));
    }

    #[test]
    fn packing_examples() {
        assert_eq!(optimal_packing(&[3, 2, 3], 3), 3);
        assert_eq!(optimal_packing(&[1, 1], 2), 1);
        assert_eq!(optimal_packing(&[], 4), 0);
        assert_eq!(optimal_packing(&[2, 2, 2, 3, 3], 6), 2);
    }

    /// Minimum over all set partitions, enumerated as restricted growth strings.
    fn partition_optimum(sizes: &[usize], w_d: usize) -> usize {
        let n = sizes.len();
        if n == 0 {
            return 0;
        }
        let mut best = n;
        let mut rgs = vec![0usize; n];
        loop {
            let k = rgs.iter().max().unwrap() + 1;
            let mut load = vec![0; k];
            for (i, &b) in rgs.iter().enumerate() {
                load[b] += sizes[i];
            }
            if load.iter().all(|&l| l <= w_d) {
                best = best.min(k);
            }
            // next restricted growth string
            let mut i = n - 1;
            loop {
                if i == 0 {
                    return best;
                }
                let m = rgs[..i].iter().max().unwrap() + 1;
                if rgs[i] < m {
                    rgs[i] += 1;
                    for r in rgs.iter_mut().skip(i + 1) {
                        *r = 0;
                    }
                    break;
                }
                i -= 1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn packing_matches_partition_enumeration(w_d in 2usize..=8, raw in prop::collection::vec(1usize..=8, 0..=9)) {
            let sizes: Vec<usize> = raw.iter().map(|&s| s.min(w_d)).collect();
            prop_assert_eq!(optimal_packing(&sizes, w_d), partition_optimum(&sizes, w_d));
        }
    }

    #[test]
    fn area_traces_are_safe() {
        let mut stretched = 0;
        for (name, net) in generators::small_corpus() {
            let g = cover_klut(&net, 3).unwrap();
            let Ok(m) = map_lut_graph_detailed(&g, 6, 4) else { continue };
            let inputs: Vec<u64> = (0..net.num_pis()).map(|i| 0x9e37_79b9_7f4a_7c15u64.rotate_left(7 * i as u32) ^ i as u64).collect();
            let (_, trace) = run_traced(&m.program, &inputs).unwrap();
            let spans = lut_spans(&g, &m);
            assert_eq!(replay_safety(&trace, &spans), Vec::<String>::new(), "{name}");
            // stretching a span over the next reuse of its device exposes the overwrite
            let reused = m.placement.events.iter().find_map(|e| match e {
                crate::area::ScheduleEvent::Reset { luts, .. } => luts.first().copied(),
                _ => None,
            });
            if let Some(n) = reused {
                let mut bad = spans.clone();
                bad[n].needed_until = m.program.len();
                assert!(!replay_safety(&trace, &bad).is_empty(), "{name}");
                stretched += 1;
            }
        }
        assert!(stretched > 0);
    }
}
