//! Fanout-free MIG evaluation on a two-bitline crossbar.
//!
//! A gate `M(H, W, !B)` is evaluated in place: `H` is written into the
//! target device, `W` and `B` into the two devices of a scratch row `X`,
//! and one Apply with wordline `X[1]` and bitline `X[0]` finishes the gate.
//! Scratch rows are reset after use, so a level-`d` gate needs `d` rows.

use super::AreaError;
use crate::isa::{CrossbarConfig, Emitter, PirBit, ResultLocation, WordlineSelect};
use crate::isa::Program;
use crate::netlist::{is_normalized, Edge, LogicNetwork, NetlistError, NetworkKind, NodeKind};
use crate::report::MappingReport;

/// A gate operand that the PIR can drive directly.
fn pir_bit(net: &LogicNetwork, e: Edge) -> Option<PirBit> {
    let n = net.node(e.target);
    match n.kind {
        NodeKind::Const0 => Some(if e.inverted { PirBit::One } else { PirBit::Zero }),
        NodeKind::Pi if !e.inverted => Some(PirBit::Input(net.pi_index(e.target).expect("input"))),
        _ => None,
    }
}

struct Mapper<'a> {
    net: &'a LogicNetwork,
    em: Emitter,
}

impl Mapper<'_> {
    /// Writes the value of `e` into the zero device `(row, bit)`, using rows
    /// from `next` upward as scratch and leaving them zero.
    fn compute(&mut self, e: Edge, row: usize, bit: usize, next: usize) {
        if let Some(p) = pir_bit(self.net, e) {
            match p {
                PirBit::Zero => {}
                PirBit::One => self.em.set(row, &[bit]),
                PirBit::Input(_) => {
                    // M(0, x, !0) = x
                    let mut pairs = vec![None, None];
                    pairs[bit] = Some(1);
                    self.em.apply_pir(row, WordlineSelect::FromSource(0), pairs, vec![p, PirBit::Zero]);
                }
            }
            return;
        }
        assert!(!e.inverted, "normalized gates are referenced without inversion");
        let fanins = self.net.node(e.target).fanins.clone();
        // B is the inverted fanin, or a constant standing for one.
        let b_pos = fanins
            .iter()
            .position(|f| f.inverted && !f.is_const())
            .or_else(|| fanins.iter().position(|f| f.is_const()))
            .expect("canonical gate");
        let mut rest: Vec<Edge> = (0..3).filter(|&i| i != b_pos).map(|i| fanins[i]).collect();
        // the deeper operand goes to the target, saving a scratch row
        let lv = |f: &Edge| (pir_bit(self.net, *f).is_none(), f.target.0);
        if lv(&rest[1]) > lv(&rest[0]) {
            rest.swap(0, 1);
        }
        let (h, w) = (rest[0], rest[1]);
        let b = !fanins[b_pos];
        self.compute(h, row, bit, next);
        let mut pairs = vec![None, None];
        pairs[bit] = Some(0);
        match (pir_bit(self.net, w), pir_bit(self.net, b)) {
            (Some(pw), Some(pb)) => {
                let ws = match pw {
                    PirBit::Zero => WordlineSelect::Zero,
                    PirBit::One => WordlineSelect::One,
                    PirBit::Input(_) => WordlineSelect::FromSource(1),
                };
                self.em.apply_pir(row, ws, pairs, vec![pb, pw]);
            }
            (pw, _) => {
                let x = next;
                let ws = match pw {
                    Some(PirBit::Zero) => WordlineSelect::Zero,
                    Some(PirBit::One) => WordlineSelect::One,
                    _ => {
                        self.compute(w, x, 1, next + 1);
                        WordlineSelect::FromSource(1)
                    }
                };
                self.compute(b, x, 0, next + 1);
                self.em.read(x);
                self.em.apply_dmr(row, ws, pairs);
                self.em.reset(x, &[0, 1]);
            }
        }
    }
}

/// Maps a normalized single-output MIG onto a `(k + 1) x 2` crossbar, where
/// `k` is the output level counting primary inputs as level 1.
pub fn map_minimal(mig: &LogicNetwork) -> Result<(Program, MappingReport), AreaError> {
    if mig.kind() != NetworkKind::Mig {
        return Err(NetlistError::WrongKind { expected: NetworkKind::Mig, found: mig.kind() }.into());
    }
    if mig.outputs().len() != 1 {
        return Err(AreaError::Input(format!("minimal mapping needs one output, got {}", mig.outputs().len())));
    }
    if !is_normalized(mig) {
        return Err(AreaError::Input("MIG is not normalized".into()));
    }
    let out = &mig.outputs()[0];
    let k = mig.depth() + 1;
    let mut m = Mapper { net: mig, em: Emitter::new(CrossbarConfig::new(k + 1, 2)?) };
    let root = Edge::new(out.edge.target, false);
    let (word, bit) = if out.edge.inverted && pir_bit(mig, out.edge).is_none() {
        // row 0 bit 1 is never used by the cone
        m.compute(root, 0, 0, 1);
        m.em.read(0);
        m.em.apply_dmr(0, WordlineSelect::One, vec![None, Some(0)]);
        (0, 1)
    } else {
        m.compute(out.edge, 0, 0, 1);
        (0, 0)
    };
    let program = m.em.finish(
        mig.pi_names(),
        vec![ResultLocation { name: out.name.clone(), word, bit }],
    )?;
    let mut report = MappingReport::from_program("minimal", &program);
    report.k = Some(k);
    report.levels = Some(k);
    report.n_maj = Some(mig.num_gates());
    Ok((program, report))
}
