//! Programs, PIR staging and the binary container.

use super::{encode, decode, instruction_lengths, Apply, CrossbarConfig, Instruction, IsaError, Source, WordlineSelect};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One bit of a staged PIR vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PirBit {
    Zero,
    One,
    /// Value of the program input with this index.
    Input(usize),
}

impl PirBit {
    fn code(self) -> u32 {
        match self {
            PirBit::Zero => 0,
            PirBit::One => 1,
            PirBit::Input(i) => 2 + i as u32,
        }
    }

    fn from_code(c: u32) -> Self {
        match c {
            0 => PirBit::Zero,
            1 => PirBit::One,
            n => PirBit::Input((n - 2) as usize),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultLocation {
    pub name: String,
    pub word: usize,
    pub bit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub config: CrossbarConfig,
    pub instructions: Vec<Instruction>,
    /// PIR contents for every Apply that reads the PIR, keyed by
    /// instruction index.
    pub pir_schedule: BTreeMap<usize, Vec<PirBit>>,
    /// Names of the program inputs, in the order `PirBit::Input` refers to.
    pub inputs: Vec<String>,
    pub result_locations: Vec<ResultLocation>,
}

impl Program {
    pub fn validate(&self) -> Result<(), IsaError> {
        let cfg = &self.config;
        cfg.validate()?;
        let err = |m: String| Err(IsaError::Program(m));
        if self.instructions.len() > cfg.s_i {
            return err(format!("{} instructions exceed S_I = {}", self.instructions.len(), cfg.s_i));
        }
        for (t, i) in self.instructions.iter().enumerate() {
            i.validate(cfg).map_err(|e| IsaError::Program(format!("instruction {t}: {e}")))?;
            if i.uses_pir() && !self.pir_schedule.contains_key(&t) {
                return err(format!("instruction {t} reads the PIR but has no staged vector"));
            }
        }
        for (&t, v) in &self.pir_schedule {
            if t >= self.instructions.len() {
                return err(format!("PIR vector staged for missing instruction {t}"));
            }
            if v.len() != cfg.w_d {
                return err(format!("PIR vector at {t} has {} bits, w_D = {}", v.len(), cfg.w_d));
            }
            if let Some(PirBit::Input(i)) = v.iter().find(|b| matches!(b, PirBit::Input(i) if *i >= self.inputs.len())) {
                return err(format!("PIR vector at {t} references input {i} of {}", self.inputs.len()));
            }
        }
        for r in &self.result_locations {
            if r.word >= cfg.s_d || r.bit >= cfg.w_d {
                return err(format!("result '{}' at ({}, {}) is outside the crossbar", r.name, r.word, r.bit));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn num_reads(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_read()).count()
    }

    pub fn num_applies(&self) -> usize {
        self.len() - self.num_reads()
    }

    /// Cycle count of a full run through the three-stage pipeline.
    pub fn cycles(&self) -> usize {
        self.len() + 2
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, IsaError> {
        let p: Program = serde_json::from_str(text).map_err(|e| IsaError::Container(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, IsaError> {
        self.validate()?;
        let cfg = &self.config;
        let mut out = b"RVMP".to_vec();
        for v in [cfg.s_d, cfg.w_d, cfg.s_i, cfg.w_i, self.instructions.len()] {
            put_u32(&mut out, v)?;
        }
        for i in &self.instructions {
            out.extend(encode(i, cfg)?);
        }
        put_u32(&mut out, self.pir_schedule.len())?;
        for (&t, v) in &self.pir_schedule {
            put_u32(&mut out, t)?;
            for b in v {
                out.extend(b.code().to_le_bytes());
            }
        }
        put_u32(&mut out, self.inputs.len())?;
        for name in &self.inputs {
            put_str(&mut out, name)?;
        }
        put_u32(&mut out, self.result_locations.len())?;
        for r in &self.result_locations {
            put_str(&mut out, &r.name)?;
            put_u32(&mut out, r.word)?;
            put_u32(&mut out, r.bit)?;
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, IsaError> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(4)? != b"RVMP" {
            return Err(IsaError::Container("bad magic".into()));
        }
        let (s_d, w_d, s_i, w_i) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let config = CrossbarConfig::with_im(s_d, w_d, s_i, w_i)?;
        let n = r.u32()?;
        let width = w_i.div_ceil(8);
        let mut instructions = Vec::with_capacity(n.min(bytes.len()));
        for _ in 0..n {
            instructions.push(decode(r.take(width)?, &config)?);
        }
        let mut pir_schedule = BTreeMap::new();
        for _ in 0..r.u32()? {
            let t = r.u32()?;
            let v = (0..w_d).map(|_| r.u32().map(|c| PirBit::from_code(c as u32))).collect::<Result<Vec<_>, _>>()?;
            pir_schedule.insert(t, v);
        }
        let inputs = (0..r.u32()?).map(|_| r.string()).collect::<Result<Vec<_>, _>>()?;
        let mut result_locations = Vec::new();
        for _ in 0..r.u32()? {
            let name = r.string()?;
            result_locations.push(ResultLocation { name, word: r.u32()?, bit: r.u32()? });
        }
        if r.pos != bytes.len() {
            return Err(IsaError::Container(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let p = Program { config, instructions, pir_schedule, inputs, result_locations };
        p.validate()?;
        Ok(p)
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<(), IsaError> {
    let v = u32::try_from(v).map_err(|_| IsaError::Container(format!("{v} does not fit in 32 bits")))?;
    out.extend(v.to_le_bytes());
    Ok(())
}

fn put_str(out: &mut Vec<u8>, s: &str) -> Result<(), IsaError> {
    put_u32(out, s.len())?;
    out.extend(s.as_bytes());
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IsaError> {
        if self.bytes.len() - self.pos < n {
            return Err(IsaError::Container("unexpected end of data".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, IsaError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn string(&mut self) -> Result<String, IsaError> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| IsaError::Container("name is not UTF-8".into()))
    }
}

/// Accumulates instructions and staged PIR vectors for a mapper.
#[derive(Debug, Clone)]
pub struct Emitter {
    config: CrossbarConfig,
    instructions: Vec<Instruction>,
    pir: BTreeMap<usize, Vec<PirBit>>,
}

impl Emitter {
    pub fn new(config: CrossbarConfig) -> Self {
        Emitter { config, instructions: Vec::new(), pir: BTreeMap::new() }
    }

    pub fn config(&self) -> &CrossbarConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn read(&mut self, w: usize) {
        debug_assert!(w < self.config.s_d);
        self.instructions.push(Instruction::Read { w });
    }

    pub fn apply_dmr(&mut self, w: usize, ws: WordlineSelect, pairs: Vec<Option<usize>>) {
        debug_assert_eq!(pairs.len(), self.config.w_d);
        self.instructions.push(Instruction::Apply(Apply { w, s: Source::Dmr, ws, pairs }));
    }

    pub fn apply_pir(&mut self, w: usize, ws: WordlineSelect, pairs: Vec<Option<usize>>, pir: Vec<PirBit>) {
        debug_assert_eq!(pairs.len(), self.config.w_d);
        debug_assert_eq!(pir.len(), self.config.w_d);
        self.pir.insert(self.instructions.len(), pir);
        self.instructions.push(Instruction::Apply(Apply { w, s: Source::Pir, ws, pairs }));
    }

    fn mask_pairs(&self, bits: &[usize]) -> Vec<Option<usize>> {
        let mut pairs = vec![None; self.config.w_d];
        for &b in bits {
            pairs[b] = Some(0);
        }
        pairs
    }

    /// Drives the listed devices of word `w` to 0 (wordline 0, bitline 1).
    pub fn reset(&mut self, w: usize, bits: &[usize]) {
        if bits.is_empty() {
            return;
        }
        let pairs = self.mask_pairs(bits);
        let pir = vec![PirBit::One; self.config.w_d];
        self.apply_pir(w, WordlineSelect::Zero, pairs, pir);
    }

    /// Drives the listed devices of word `w` to 1 (wordline 1, bitline 0).
    pub fn set(&mut self, w: usize, bits: &[usize]) {
        if bits.is_empty() {
            return;
        }
        let pairs = self.mask_pairs(bits);
        let pir = vec![PirBit::Zero; self.config.w_d];
        self.apply_pir(w, WordlineSelect::One, pairs, pir);
    }

    pub fn finish(self, inputs: Vec<String>, result_locations: Vec<ResultLocation>) -> Result<Program, IsaError> {
        let mut config = self.config;
        config.s_i = config.s_i.max(self.instructions.len());
        let p = Program {
            config,
            instructions: self.instructions,
            pir_schedule: self.pir,
            inputs,
            result_locations,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Widest instruction for a config, for callers sizing instruction memory.
pub fn max_instruction_bits(cfg: &CrossbarConfig) -> usize {
    let (r, a) = instruction_lengths(cfg);
    r.max(a)
}
