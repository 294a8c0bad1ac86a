//! Exclusive-sum-of-products covers.

use crate::truth::TruthTable;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

pub const MAX_ESOP_VARS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EsopError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} variables exceed the limit of {MAX_ESOP_VARS}")]
    TooWide(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub inverted: bool,
}

/// Product of literals, stored as two variable masks. The empty cube is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Cube {
    pub pos: u32,
    pub neg: u32,
}

impl Cube {
    pub const ONE: Cube = Cube { pos: 0, neg: 0 };

    /// Panics if a variable appears in both polarities.
    pub fn from_literals(lits: &[Literal]) -> Cube {
        let mut c = Cube::ONE;
        for l in lits {
            c = c.with(*l);
        }
        c
    }

    pub fn with(self, l: Literal) -> Cube {
        let bit = 1u32 << l.var;
        assert!((self.pos | self.neg) & bit == 0, "variable {} already in cube", l.var);
        if l.inverted {
            Cube { neg: self.neg | bit, ..self }
        } else {
            Cube { pos: self.pos | bit, ..self }
        }
    }

    /// Literals in ascending variable order.
    pub fn literals(&self) -> Vec<Literal> {
        (0..32)
            .filter(|&v| (self.pos | self.neg) >> v & 1 == 1)
            .map(|var| Literal { var, inverted: self.neg >> var & 1 == 1 })
            .collect()
    }

    pub fn len(&self) -> usize {
        (self.pos | self.neg).count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.pos | self.neg == 0
    }

    pub fn eval(&self, assignment: usize) -> bool {
        let a = assignment as u32;
        a & self.pos == self.pos && a & self.neg == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EsopCover {
    pub arity: usize,
    pub cubes: Vec<Cube>,
}

impl EsopCover {
    pub fn new(arity: usize, cubes: Vec<Cube>) -> Self {
        EsopCover { arity, cubes }
    }

    pub fn num_literals(&self) -> usize {
        self.cubes.iter().map(Cube::len).sum()
    }

    /// Cover of the complement: toggles the constant-1 cube.
    pub fn complement(&self) -> EsopCover {
        let mut cubes = self.cubes.clone();
        match cubes.iter().position(Cube::is_empty) {
            Some(i) => {
                cubes.remove(i);
            }
            None => cubes.push(Cube::ONE),
        }
        EsopCover { arity: self.arity, cubes }
    }

    pub fn truth_table(&self) -> TruthTable {
        TruthTable::from_fn(self.arity, |row| eval_esop(self, row))
    }

    pub fn to_pla(&self) -> String {
        let mut s = format!(".i {}\n.o 1\n.type esop\n.p {}\n", self.arity, self.cubes.len());
        for c in &self.cubes {
            for v in 0..self.arity {
                s.push(if c.pos >> v & 1 == 1 {
                    '1'
                } else if c.neg >> v & 1 == 1 {
                    '0'
                } else {
                    '-'
                });
            }
            s.push_str(" 1\n");
        }
        s.push_str(".e\n");
        s
    }

    pub fn from_pla(text: &str) -> Result<EsopCover, EsopError> {
        let mut arity = None;
        let mut cubes = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let err = |m: &str| EsopError::Parse { line, msg: m.to_string() };
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            match toks[0] {
                ".i" => {
                    let n: usize = toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| err("bad .i"))?;
                    if n > MAX_ESOP_VARS {
                        return Err(EsopError::TooWide(n));
                    }
                    arity = Some(n);
                }
                ".o" => {
                    if toks.get(1) != Some(&"1") {
                        return Err(err("only single-output covers are supported"));
                    }
                }
                ".type" => {
                    if toks.get(1) != Some(&"esop") {
                        return Err(err("expected .type esop"));
                    }
                }
                ".p" | ".ilb" | ".ob" => {}
                ".e" | ".end" => break,
                _ => {
                    let n = arity.ok_or_else(|| err("cube before .i"))?;
                    if toks.len() != 2 || toks[0].len() != n {
                        return Err(err("cube row must have one input column per variable and one output"));
                    }
                    match toks[1] {
                        "1" => {}
                        "0" | "-" => continue,
                        _ => return Err(err("bad output column")),
                    }
                    let mut c = Cube::ONE;
                    for (v, ch) in toks[0].chars().enumerate() {
                        match ch {
                            '1' => c.pos |= 1 << v,
                            '0' => c.neg |= 1 << v,
                            '-' => {}
                            _ => return Err(err("input columns take 0, 1 or -")),
                        }
                    }
                    cubes.push(c);
                }
            }
        }
        let arity = arity.ok_or(EsopError::Parse { line: 0, msg: "missing .i".into() })?;
        Ok(EsopCover { arity, cubes })
    }
}

impl fmt::Display for EsopCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cubes.is_empty() {
            return f.write_str("0");
        }
        for (i, c) in self.cubes.iter().enumerate() {
            if i > 0 {
                f.write_str(" ^ ")?;
            }
            if c.is_empty() {
                f.write_str("1")?;
            }
            for l in c.literals() {
                write!(f, "{}x{}", if l.inverted { "!" } else { "" }, l.var)?;
            }
        }
        Ok(())
    }
}

pub fn eval_esop(cover: &EsopCover, assignment: usize) -> bool {
    cover.cubes.iter().filter(|c| c.eval(assignment)).count() % 2 == 1
}

pub fn verify_esop(cover: &EsopCover, tt: &TruthTable) -> bool {
    cover.arity == tt.num_vars() && (0..tt.len()).all(|r| eval_esop(cover, r) == tt.get(r))
}

#[derive(Clone, Copy)]
enum Expansion {
    PosDavio,
    NegDavio,
    Shannon,
}

struct Extractor {
    memo: HashMap<TruthTable, Vec<Cube>>,
}

impl Extractor {
    fn cubes(&mut self, f: &TruthTable) -> Vec<Cube> {
        if f.is_zero() {
            return Vec::new();
        }
        if f.is_one() {
            return vec![Cube::ONE];
        }
        if let Some(c) = self.memo.get(f) {
            return c.clone();
        }
        let x = f.num_vars() - 1;
        let (f0, f1) = f.split_top();
        let f2 = f0.xor(&f1);
        let c0 = self.cubes(&f0);
        let c1 = self.cubes(&f1);
        let c2 = self.cubes(&f2);
        let options = [
            (c0.len() + c2.len(), Expansion::PosDavio),
            (c1.len() + c2.len(), Expansion::NegDavio),
            (c0.len() + c1.len(), Expansion::Shannon),
        ];
        // min_by_key keeps the first minimum, so ties favour positive Davio
        let (_, how) = *options.iter().min_by_key(|(n, _)| *n).unwrap();
        let lit = |inverted| Literal { var: x, inverted };
        let out: Vec<Cube> = match how {
            Expansion::PosDavio => c0.into_iter().chain(c2.into_iter().map(|c| c.with(lit(false)))).collect(),
            Expansion::NegDavio => c1.into_iter().chain(c2.into_iter().map(|c| c.with(lit(true)))).collect(),
            Expansion::Shannon => c0
                .into_iter()
                .map(|c| c.with(lit(true)))
                .chain(c1.into_iter().map(|c| c.with(lit(false))))
                .collect(),
        };
        self.memo.insert(f.clone(), out.clone());
        out
    }
}

/// Pseudo-Kronecker expansion on the highest variable, choosing per
/// subfunction the expansion with the fewest cubes.
pub fn extract_esop(tt: &TruthTable) -> Result<EsopCover, EsopError> {
    let n = tt.num_vars();
    if n > MAX_ESOP_VARS {
        return Err(EsopError::TooWide(n));
    }
    // subfunctions of different arity are different tables, so one memo suffices
    let mut ex = Extractor { memo: HashMap::new() };
    Ok(EsopCover { arity: n, cubes: ex.cubes(tt) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lit(var: usize, inverted: bool) -> Literal {
        Literal { var, inverted }
    }

    #[test]
    fn constants() {
        assert!(extract_esop(&TruthTable::zero(3)).unwrap().cubes.is_empty());
        assert_eq!(extract_esop(&TruthTable::one(3)).unwrap().cubes, vec![Cube::ONE]);
        assert_eq!(extract_esop(&TruthTable::one(0)).unwrap().cubes, vec![Cube::ONE]);
    }

    #[test]
    fn two_cube_example() {
        // !a b c ^ a !b c over (a, b, c) = vars (0, 1, 2)
        let given = EsopCover::new(
            3,
            vec![
                Cube::from_literals(&[lit(0, true), lit(1, false), lit(2, false)]),
                Cube::from_literals(&[lit(0, false), lit(1, true), lit(2, false)]),
            ],
        );
        assert!(given.cubes.iter().all(|c| c.len() == 3));
        let tt = given.truth_table();
        let got = extract_esop(&tt).unwrap();
        assert!(verify_esop(&got, &tt));
        assert_eq!(got.cubes.len(), 2);
    }

    #[test]
    fn parity_is_single_literals() {
        for n in 1..=8 {
            let tt = TruthTable::from_fn(n, |r| r.count_ones() % 2 == 1);
            let c = extract_esop(&tt).unwrap();
            assert_eq!(c.cubes.len(), n);
            assert!(c.cubes.iter().all(|c| c.len() == 1 && c.neg == 0));
        }
    }

    #[test]
    fn random_tables_verify() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.gen_range(0..=8);
            let tt = TruthTable::from_fn(n, |_| rng.gen());
            assert!(verify_esop(&extract_esop(&tt).unwrap(), &tt));
        }
    }

    #[test]
    fn complement_toggles_constant() {
        let tt = TruthTable::from_fn(3, |r| r == 5 || r == 2);
        let c = extract_esop(&tt).unwrap();
        assert!(verify_esop(&c.complement(), &tt.not()));
        assert!(verify_esop(&c.complement().complement(), &tt));
    }

    #[test]
    fn pla_round_trip() {
        let c = EsopCover::new(3, vec![Cube::from_literals(&[lit(0, false), lit(2, true)]), Cube::ONE]);
        let text = c.to_pla();
        assert_eq!(text, ".i 3\n.o 1\n.type esop\n.p 2\n1-0 1\n--- 1\n.e\n");
        assert_eq!(EsopCover::from_pla(&text).unwrap(), c);
        assert!(matches!(EsopCover::from_pla(".i 2\n.type fd\n"), Err(EsopError::Parse { line: 2, .. })));
        assert!(matches!(EsopCover::from_pla(".i 2\n1x 1\n"), Err(EsopError::Parse { line: 2, .. })));
        assert_eq!(c.to_string(), "x0!x2 ^ 1");
    }

    #[test]
    #[should_panic]
    fn contradictory_cube_rejected() {
        Cube::from_literals(&[lit(1, false), lit(1, true)]);
    }

    fn arb_cover() -> impl Strategy<Value = EsopCover> {
        (1usize..=6).prop_flat_map(|n| {
            let cube = proptest::collection::vec(0u8..3, n).prop_map(|cols| {
                let mut c = Cube::ONE;
                for (v, k) in cols.into_iter().enumerate() {
                    match k {
                        1 => c.pos |= 1 << v,
                        2 => c.neg |= 1 << v,
                        _ => {}
                    }
                }
                c
            });
            proptest::collection::vec(cube, 0..=8).prop_map(move |cubes| EsopCover::new(n, cubes))
        })
    }

    proptest! {
        #[test]
        fn self_xor_is_zero(c in arb_cover()) {
            let mut doubled = c.clone();
            doubled.cubes.extend(c.cubes.iter().copied());
            prop_assert!(doubled.truth_table().is_zero());
        }

        #[test]
        fn extract_reproduces_cover(c in arb_cover()) {
            let tt = c.truth_table();
            let e = extract_esop(&tt).unwrap();
            prop_assert!(verify_esop(&e, &tt));
        }
    }
}
