//! Cycle-level functional model of the crossbar machine.
//!
//! Every state bit is a [`Lane`]: `bool` runs one input vector, `u64` runs
//! 64 vectors side by side.

use crate::isa::{Apply, Instruction, PirBit, Program, Source, WordlineSelect};
use serde::{Deserialize, Serialize};
use std::fmt::{self, Debug, Write};
use thiserror::Error;

/// Pipeline fill of the three-stage fetch/decode/execute pipeline.
pub const PIPELINE_FILL: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("instruction {index}: {msg}")]
    Fault { index: usize, msg: String },
    #[error("program has {expected} inputs, {got} values supplied")]
    InputCount { expected: usize, got: usize },
}

pub trait Lane: Copy + PartialEq + Debug + Send + Sync + 'static {
    const ZERO: Self;
    const ONES: Self;
    fn maj(a: Self, b: Self, c: Self) -> Self;
    fn not(self) -> Self;
}

impl Lane for bool {
    const ZERO: Self = false;
    const ONES: Self = true;
    fn maj(a: Self, b: Self, c: Self) -> Self {
        (a && b) || (a && c) || (b && c)
    }
    fn not(self) -> Self {
        !self
    }
}

impl Lane for u64 {
    const ZERO: Self = 0;
    const ONES: Self = !0;
    fn maj(a: Self, b: Self, c: Self) -> Self {
        (a & b) | (a & c) | (b & c)
    }
    fn not(self) -> Self {
        !self
    }
}

/// New state of a device: majority of state, wordline and inverted bitline.
pub fn device_step<L: Lane>(z: L, wl: L, bl: L) -> L {
    L::maj(z, wl, bl.not())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineState<L> {
    /// `dcm[i][j]` is the device at wordline `i`, bitline `j`.
    pub dcm: Vec<Vec<L>>,
    pub dmr: Vec<L>,
    pub pir: Vec<L>,
    pub pc: usize,
    pub cycles: usize,
}

impl<L: Lane> MachineState<L> {
    pub fn new(s_d: usize, w_d: usize) -> Self {
        MachineState {
            dcm: vec![vec![L::ZERO; w_d]; s_d],
            dmr: vec![L::ZERO; w_d],
            pir: vec![L::ZERO; w_d],
            pc: 0,
            cycles: 0,
        }
    }
}

fn fault(index: usize, msg: impl Into<String>) -> SimError {
    SimError::Fault { index, msg: msg.into() }
}

pub fn exec_read<L: Lane>(state: &mut MachineState<L>, w: usize) -> Result<(), SimError> {
    let row = state.dcm.get(w).ok_or_else(|| fault(state.pc, format!("read of word {w} out of range")))?;
    state.dmr.clone_from(row);
    Ok(())
}

pub fn exec_apply<L: Lane>(state: &mut MachineState<L>, a: &Apply, pir: Option<&[L]>) -> Result<(), SimError> {
    let pc = state.pc;
    let w_d = state.dmr.len();
    if a.w >= state.dcm.len() {
        return Err(fault(pc, format!("apply to word {} out of range", a.w)));
    }
    if a.pairs.len() != w_d {
        return Err(fault(pc, format!("{} bitline pairs for w_D = {w_d}", a.pairs.len())));
    }
    if a.s == Source::Pir {
        let v = pir.ok_or_else(|| fault(pc, "no PIR vector staged"))?;
        if v.len() != w_d {
            return Err(fault(pc, "PIR vector width mismatch"));
        }
        state.pir.copy_from_slice(v);
    }
    let src = match a.s {
        Source::Pir => &state.pir,
        Source::Dmr => &state.dmr,
    };
    let bit = |i: usize| src.get(i).copied().ok_or_else(|| fault(pc, format!("source bit {i} out of range")));
    let wl = match a.ws {
        WordlineSelect::Zero => L::ZERO,
        WordlineSelect::One => L::ONES,
        WordlineSelect::FromSource(b) => bit(b)?,
    };
    let mut bls = vec![None; w_d];
    for (j, p) in a.pairs.iter().enumerate() {
        if let Some(v) = p {
            bls[j] = Some(bit(*v)?);
        }
    }
    let row = &mut state.dcm[a.w];
    for (j, bl) in bls.into_iter().enumerate() {
        if let Some(bl) = bl {
            row[j] = device_step(row[j], wl, bl);
        }
    }
    Ok(())
}

/// PIR contents for instruction `t` under the given input values.
pub fn stage_pir<L: Lane>(program: &Program, t: usize, inputs: &[L]) -> Option<Vec<L>> {
    program.pir_schedule.get(&t).map(|v| {
        v.iter()
            .map(|b| match *b {
                PirBit::Zero => L::ZERO,
                PirBit::One => L::ONES,
                PirBit::Input(i) => inputs[i],
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord<L> {
    pub index: usize,
    pub instruction: Instruction,
    /// Word addressed by the instruction, before and after.
    pub pre: Vec<L>,
    pub post: Vec<L>,
    pub dmr: Vec<L>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace<L> {
    pub records: Vec<TraceRecord<L>>,
}

fn bits_str(v: &[bool]) -> String {
    // highest bitline first, like the crossbar drawings
    v.iter().rev().map(|&b| if b { '1' } else { '0' }).collect()
}

impl Trace<bool> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let _ = writeln!(
                s,
                "{:>5}  {:<40} w{}: {} -> {}  dmr {}",
                r.index,
                r.instruction.to_string(),
                r.instruction.word(),
                bits_str(&r.pre),
                bits_str(&r.post),
                bits_str(&r.dmr)
            );
        }
        s
    }
}

impl<L: Serialize> Trace<L> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

fn check_inputs<L>(program: &Program, inputs: &[L]) -> Result<(), SimError> {
    if inputs.len() != program.inputs.len() {
        return Err(SimError::InputCount { expected: program.inputs.len(), got: inputs.len() });
    }
    Ok(())
}

fn step<L: Lane>(state: &mut MachineState<L>, program: &Program, inputs: &[L]) -> Result<(), SimError> {
    let t = state.pc;
    match &program.instructions[t] {
        Instruction::Read { w } => exec_read(state, *w)?,
        Instruction::Apply(a) => {
            let pir = if a.s == Source::Pir { stage_pir(program, t, inputs) } else { None };
            exec_apply(state, a, pir.as_deref())?;
        }
    }
    state.pc += 1;
    state.cycles += 1;
    Ok(())
}

/// Runs a program from the all-zero state.
pub fn run<L: Lane>(program: &Program, inputs: &[L]) -> Result<MachineState<L>, SimError> {
    check_inputs(program, inputs)?;
    let cfg = &program.config;
    let mut state = MachineState::new(cfg.s_d, cfg.w_d);
    while state.pc < program.instructions.len() {
        step(&mut state, program, inputs)?;
    }
    state.cycles += PIPELINE_FILL;
    Ok(state)
}

/// Like [`run`], also recording one trace entry per instruction.
pub fn run_traced<L: Lane>(program: &Program, inputs: &[L]) -> Result<(MachineState<L>, Trace<L>), SimError> {
    check_inputs(program, inputs)?;
    let cfg = &program.config;
    let mut state = MachineState::new(cfg.s_d, cfg.w_d);
    let mut records = Vec::with_capacity(program.len());
    while state.pc < program.instructions.len() {
        let t = state.pc;
        let instr = &program.instructions[t];
        let w = instr.word();
        let pre = state.dcm.get(w).cloned().unwrap_or_default();
        step(&mut state, program, inputs)?;
        records.push(TraceRecord {
            index: t,
            instruction: instr.clone(),
            pre,
            post: state.dcm[w].clone(),
            dmr: state.dmr.clone(),
        });
    }
    state.cycles += PIPELINE_FILL;
    Ok((state, Trace { records }))
}

/// Values at the program's declared result locations.
pub fn read_outputs<L: Lane>(state: &MachineState<L>, program: &Program) -> Vec<L> {
    program.result_locations.iter().map(|r| state.dcm[r.word][r.bit]).collect()
}

/// Crossbar drawing of the DCM after every Apply, top word first.
pub fn grid_dump(program: &Program, inputs: &[bool]) -> Result<String, SimError> {
    check_inputs(program, inputs)?;
    let cfg = &program.config;
    let mut state = MachineState::new(cfg.s_d, cfg.w_d);
    let mut out = String::new();
    let border = format!("+{}\n", "--+".repeat(cfg.w_d));
    while state.pc < program.instructions.len() {
        let t = state.pc;
        step(&mut state, program, inputs)?;
        let instr = &program.instructions[t];
        if instr.is_read() {
            continue;
        }
        let _ = writeln!(out, "after I{} ({instr})", t + 1);
        out.push_str(&border);
        for w in (0..cfg.s_d).rev() {
            out.push('|');
            for j in (0..cfg.w_d).rev() {
                out.push_str(if state.dcm[w][j] { " 1|" } else { " 0|" });
            }
            let _ = writeln!(out, "  w{w}{}", if w == instr.word() { " *" } else { "" });
            out.push_str(&border);
        }
        out.push('\n');
    }
    Ok(out)
}

impl<L: Lane> fmt::Display for MachineState<L>
where
    L: Into<u64>,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (w, row) in self.dcm.iter().enumerate() {
            write!(f, "w{w}:")?;
            for &b in row.iter().rev() {
                write!(f, " {}", b.into())?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
