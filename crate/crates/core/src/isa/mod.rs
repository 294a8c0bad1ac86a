//! Read/Apply instructions, their bit encodings and the machine geometry.

mod asm;
mod codec;
mod program;

pub use asm::{format_instruction, parse_asm, write_asm};
pub use codec::{decode, encode};
pub use program::{max_instruction_bits, Emitter, PirBit, Program, ResultLocation};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid instruction: {0}")]
    Instruction(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("assembly line {line}: {msg}")]
    Asm { line: usize, msg: String },
    #[error("malformed program container: {0}")]
    Container(String),
    #[error("invalid program: {0}")]
    Program(String),
}

/// Bits needed to address `n` distinct items.
pub fn index_bits(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Crossbar and instruction-memory geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CrossbarConfig {
    /// Words in the data crossbar memory.
    pub s_d: usize,
    /// Bits per word, also the width of the PIR and DMR.
    pub w_d: usize,
    /// Words in the instruction memory.
    pub s_i: usize,
    /// Bits per instruction-memory word.
    pub w_i: usize,
}

/// Default instruction-memory depth when none is given.
pub const DEFAULT_S_I: usize = 1 << 20;

impl CrossbarConfig {
    /// Geometry with the narrowest legal instruction word.
    pub fn new(s_d: usize, w_d: usize) -> Result<Self, IsaError> {
        let (r, a) = raw_lengths(s_d, w_d);
        Self::with_im(s_d, w_d, DEFAULT_S_I, r.max(a))
    }

    pub fn with_im(s_d: usize, w_d: usize, s_i: usize, w_i: usize) -> Result<Self, IsaError> {
        let cfg = CrossbarConfig { s_d, w_d, s_i, w_i };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IsaError> {
        if self.s_d < 1 {
            return Err(IsaError::Config("S_D must be at least 1".into()));
        }
        if self.w_d < 2 {
            return Err(IsaError::Config(format!("w_D must be at least 2, got {}", self.w_d)));
        }
        if self.w_d > u32::MAX as usize || self.s_d > u32::MAX as usize {
            return Err(IsaError::Config("geometry exceeds 32-bit fields".into()));
        }
        let (r, a) = instruction_lengths(self);
        if self.w_i < r.max(a) {
            return Err(IsaError::Config(format!(
                "w_I = {} is below the longest instruction ({} bits)",
                self.w_i,
                r.max(a)
            )));
        }
        Ok(())
    }

    pub fn addr_bits(&self) -> usize {
        index_bits(self.s_d)
    }

    pub fn bit_bits(&self) -> usize {
        index_bits(self.w_d)
    }

    pub fn devices(&self) -> usize {
        self.s_d * self.w_d
    }
}

fn raw_lengths(s_d: usize, w_d: usize) -> (usize, usize) {
    let a = index_bits(s_d);
    let b = index_bits(w_d);
    (1 + a, 3 + a + (1 + w_d) * (1 + b))
}

/// `(IL_Read, IL_Apply)` in bits.
pub fn instruction_lengths(cfg: &CrossbarConfig) -> (usize, usize) {
    raw_lengths(cfg.s_d, cfg.w_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Pir,
    Dmr,
}

/// Wordline input of an Apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WordlineSelect {
    Zero,
    One,
    /// Bit `wb` of the selected source.
    FromSource(usize),
}

impl WordlineSelect {
    pub fn code(self) -> u8 {
        match self {
            WordlineSelect::Zero => 0b00,
            WordlineSelect::One => 0b01,
            WordlineSelect::FromSource(_) => 0b11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Apply {
    pub w: usize,
    pub s: Source,
    pub ws: WordlineSelect,
    /// One entry per bitline; `None` leaves the device untouched, `Some(i)`
    /// drives it with bit `i` of the source.
    pub pairs: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    Read { w: usize },
    Apply(Apply),
}

impl Instruction {
    pub fn word(&self) -> usize {
        match self {
            Instruction::Read { w } => *w,
            Instruction::Apply(a) => a.w,
        }
    }

    pub fn is_read(&self) -> bool {
        matches!(self, Instruction::Read { .. })
    }

    pub fn uses_pir(&self) -> bool {
        matches!(self, Instruction::Apply(a) if a.s == Source::Pir)
    }

    pub fn validate(&self, cfg: &CrossbarConfig) -> Result<(), IsaError> {
        let bad = |m: String| Err(IsaError::Instruction(m));
        if self.word() >= cfg.s_d {
            return bad(format!("word {} out of range for S_D = {}", self.word(), cfg.s_d));
        }
        if let Instruction::Apply(a) = self {
            if a.pairs.len() != cfg.w_d {
                return bad(format!("{} bitline pairs given, w_D = {}", a.pairs.len(), cfg.w_d));
            }
            if let WordlineSelect::FromSource(b) = a.ws {
                if b >= cfg.w_d {
                    return bad(format!("wordline bit {b} out of range"));
                }
            }
            if let Some(v) = a.pairs.iter().flatten().find(|&&v| v >= cfg.w_d) {
                return bad(format!("bitline source bit {v} out of range"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_instruction(self))
    }
}
