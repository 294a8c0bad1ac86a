//! Packed truth tables.
//!
//! Bit `i` of a table holds the function value for the assignment in which
//! variable `j` takes bit `j` of `i`.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruthTable {
    num_vars: usize,
    words: Vec<u64>,
}

/// Bit-parallel projection patterns for the first six variables.
const VAR_MASKS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

fn word_count(num_vars: usize) -> usize {
    if num_vars <= 6 {
        1
    } else {
        1 << (num_vars - 6)
    }
}

fn tail_mask(num_vars: usize) -> u64 {
    if num_vars >= 6 {
        u64::MAX
    } else {
        (1u64 << (1 << num_vars)) - 1
    }
}

impl TruthTable {
    pub fn zero(num_vars: usize) -> Self {
        TruthTable {
            num_vars,
            words: vec![0; word_count(num_vars)],
        }
    }

    pub fn one(num_vars: usize) -> Self {
        let mut t = Self::zero(num_vars);
        for w in &mut t.words {
            *w = u64::MAX;
        }
        t.normalize();
        t
    }

    /// Projection onto variable `var`.
    pub fn var(num_vars: usize, var: usize) -> Self {
        assert!(var < num_vars, "variable {var} out of range for {num_vars} inputs");
        let mut t = Self::zero(num_vars);
        for (i, w) in t.words.iter_mut().enumerate() {
            *w = if var < 6 {
                VAR_MASKS[var]
            } else if (i >> (var - 6)) & 1 == 1 {
                u64::MAX
            } else {
                0
            };
        }
        t.normalize();
        t
    }

    pub fn from_fn(num_vars: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut t = Self::zero(num_vars);
        for i in 0..t.len() {
            if f(i) {
                t.set(i, true);
            }
        }
        t
    }

    /// Builds a table from a bit slice of length `2^num_vars`.
    pub fn from_bits(bits: &[bool]) -> Option<Self> {
        let n = bits.len();
        if n == 0 || !n.is_power_of_two() {
            return None;
        }
        let num_vars = n.trailing_zeros() as usize;
        Some(Self::from_fn(num_vars, |i| bits[i]))
    }

    pub fn from_words(num_vars: usize, words: Vec<u64>) -> Self {
        assert_eq!(words.len(), word_count(num_vars));
        let mut t = TruthTable { num_vars, words };
        t.normalize();
        t
    }

    fn normalize(&mut self) {
        let m = tail_mask(self.num_vars);
        if let Some(w) = self.words.last_mut() {
            *w &= m;
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Number of rows, `2^num_vars`.
    pub fn len(&self) -> usize {
        1 << self.num_vars
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, row: usize) -> bool {
        (self.words[row >> 6] >> (row & 63)) & 1 == 1
    }

    pub fn set(&mut self, row: usize, value: bool) {
        let bit = 1u64 << (row & 63);
        if value {
            self.words[row >> 6] |= bit;
        } else {
            self.words[row >> 6] &= !bit;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_one(&self) -> bool {
        *self == Self::one(self.num_vars)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn not(&self) -> Self {
        let mut t = TruthTable {
            num_vars: self.num_vars,
            words: self.words.iter().map(|w| !w).collect(),
        };
        t.normalize();
        t
    }

    pub fn xor(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a ^ b)
    }

    pub fn and(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.num_vars, other.num_vars, "truth table arity mismatch");
        TruthTable {
            num_vars: self.num_vars,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Splits on the highest variable: returns the cofactors for
    /// `x_{n-1} = 0` and `x_{n-1} = 1`, each over `n - 1` variables.
    pub fn split_top(&self) -> (Self, Self) {
        assert!(self.num_vars > 0, "cannot split a constant table");
        let n = self.num_vars - 1;
        if self.num_vars > 6 {
            let half = self.words.len() / 2;
            (
                TruthTable::from_words(n, self.words[..half].to_vec()),
                TruthTable::from_words(n, self.words[half..].to_vec()),
            )
        } else {
            let shift = 1u32 << n;
            let w = self.words[0];
            (
                TruthTable::from_words(n, vec![w]),
                TruthTable::from_words(n, vec![w >> shift]),
            )
        }
    }

    /// Hex string, most significant row first.
    pub fn to_hex(&self) -> String {
        let digits = (self.len().max(4)) / 4;
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let row = d * 4 + b;
                if row < self.len() && self.get(row) {
                    nibble |= 1 << b;
                }
            }
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(num_vars: usize, hex: &str) -> Option<Self> {
        let mut t = Self::zero(num_vars);
        let digits: Vec<u32> = hex
            .chars()
            .map(|c| c.to_digit(16))
            .collect::<Option<Vec<_>>>()?;
        let n = digits.len();
        for (k, d) in digits.into_iter().enumerate() {
            let pos = n - 1 - k;
            for b in 0..4 {
                let row = pos * 4 + b;
                if (d >> b) & 1 == 1 {
                    if row >= t.len() {
                        return None;
                    }
                    t.set(row, true);
                }
            }
        }
        Some(t)
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}, 0x{})", self.num_vars, self.to_hex())
    }
}
