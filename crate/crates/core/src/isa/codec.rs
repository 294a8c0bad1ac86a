//! Bit-exact instruction words.
//!
//! Fields are concatenated most-significant first in the order
//! `opcode | w | s | ws | wb | (v val)*`, then zero-padded on the right to
//! `w_I` bits. Words are stored as bytes, first bit in the top of byte 0.

use super::{Apply, CrossbarConfig, Instruction, IsaError, Source, WordlineSelect};

struct BitWriter {
    bytes: Vec<u8>,
    pos: usize,
}

impl BitWriter {
    fn new(width: usize) -> Self {
        BitWriter {
            bytes: vec![0; width.div_ceil(8)],
            pos: 0,
        }
    }

    fn put(&mut self, value: usize, width: usize) {
        for k in (0..width).rev() {
            if (value >> k) & 1 == 1 {
                self.bytes[self.pos / 8] |= 0x80 >> (self.pos % 8);
            }
            self.pos += 1;
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn bit(&self, i: usize) -> bool {
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    fn take(&mut self, width: usize) -> usize {
        let mut v = 0;
        for _ in 0..width {
            v = (v << 1) | self.bit(self.pos) as usize;
            self.pos += 1;
        }
        v
    }
}

pub fn encode(instr: &Instruction, cfg: &CrossbarConfig) -> Result<Vec<u8>, IsaError> {
    instr.validate(cfg)?;
    let ab = cfg.addr_bits();
    let bb = cfg.bit_bits();
    let mut w = BitWriter::new(cfg.w_i);
    match instr {
        Instruction::Read { w: addr } => {
            w.put(0, 1);
            w.put(*addr, ab);
        }
        Instruction::Apply(a) => {
            w.put(1, 1);
            w.put(a.w, ab);
            w.put((a.s == Source::Dmr) as usize, 1);
            w.put(a.ws.code() as usize, 2);
            let wb = match a.ws {
                WordlineSelect::FromSource(b) => b,
                _ => 0,
            };
            w.put(wb, bb);
            for p in &a.pairs {
                match p {
                    Some(v) => {
                        w.put(1, 1);
                        w.put(*v, bb);
                    }
                    None => w.put(0, 1 + bb),
                }
            }
        }
    }
    Ok(w.bytes)
}

pub fn decode(bytes: &[u8], cfg: &CrossbarConfig) -> Result<Instruction, IsaError> {
    let err = |m: String| Err(IsaError::Decode(m));
    if bytes.len() != cfg.w_i.div_ceil(8) {
        return err(format!("expected {} bytes, got {}", cfg.w_i.div_ceil(8), bytes.len()));
    }
    let ab = cfg.addr_bits();
    let bb = cfg.bit_bits();
    let mut r = BitReader { bytes, pos: 0 };
    let instr = if r.take(1) == 0 {
        Instruction::Read { w: r.take(ab) }
    } else {
        let w = r.take(ab);
        let s = if r.take(1) == 1 { Source::Dmr } else { Source::Pir };
        let code = r.take(2);
        let wb = r.take(bb);
        let ws = match code {
            0b00 => WordlineSelect::Zero,
            0b01 => WordlineSelect::One,
            0b11 => WordlineSelect::FromSource(wb),
            _ => return err("wordline select code 10 is invalid".into()),
        };
        if code != 0b11 && wb != 0 {
            return err("wb must be zero unless ws = 11".into());
        }
        let mut pairs = Vec::with_capacity(cfg.w_d);
        for j in 0..cfg.w_d {
            let v = r.take(1) == 1;
            let val = r.take(bb);
            if v {
                pairs.push(Some(val));
            } else if val != 0 {
                return err(format!("NOP pair on bitline {j} carries nonzero val"));
            } else {
                pairs.push(None);
            }
        }
        Instruction::Apply(Apply { w, s, ws, pairs })
    };
    if (r.pos..bytes.len() * 8).any(|i| r.bit(i)) {
        return err("nonzero padding bits".into());
    }
    instr
        .validate(cfg)
        .map_err(|e| IsaError::Decode(e.to_string()))?;
    Ok(instr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(bytes: &[u8], n: usize) -> String {
        (0..n)
            .map(|i| if bytes[i / 8] & (0x80 >> (i % 8)) != 0 { '1' } else { '0' })
            .collect()
    }

    #[test]
    fn read_is_all_zero() {
        let cfg = CrossbarConfig::new(64, 64).unwrap();
        let word = encode(&Instruction::Read { w: 0 }, &cfg).unwrap();
        assert_eq!(word.len(), 58);
        assert!(word.iter().all(|&b| b == 0));
        let word = encode(&Instruction::Read { w: 5 }, &cfg).unwrap();
        assert_eq!(bits(&word, 7), "0000101");
    }

    #[test]
    fn xor_listing_first_apply() {
        // Apply 0 0 01 1 0 1 1 on a 3x2 crossbar
        let cfg = CrossbarConfig::new(3, 2).unwrap();
        let i = Instruction::Apply(Apply {
            w: 0,
            s: Source::Pir,
            ws: WordlineSelect::One,
            pairs: vec![Some(0), Some(1)],
        });
        let word = encode(&i, &cfg).unwrap();
        // opcode, w(2), s, ws(2), wb(1), v val, v val
        assert_eq!(bits(&word, cfg.w_i), "1" .to_owned() + "00" + "0" + "01" + "0" + "10" + "11");
        assert_eq!(decode(&word, &cfg).unwrap(), i);
    }

    #[test]
    fn rejects_bad_words() {
        let cfg = CrossbarConfig::new(4, 2).unwrap();
        // opcode 1, w 00, s 1, ws 10
        let mut w = BitWriter::new(cfg.w_i);
        w.put(1, 1);
        w.put(0, 2);
        w.put(1, 1);
        w.put(0b10, 2);
        assert!(matches!(decode(&w.bytes, &cfg), Err(IsaError::Decode(_))));
        // Read with a stray padding bit
        let mut w = BitWriter::new(cfg.w_i);
        w.put(0, 3);
        w.put(1, 1);
        assert!(decode(&w.bytes, &cfg).is_err());
        // NOP pair with nonzero val
        let mut w = BitWriter::new(cfg.w_i);
        w.put(1, 1);
        w.put(0, 2);
        w.put(1, 1);
        w.put(0b01, 2);
        w.put(0, 1);
        w.put(0b01, 2);
        assert!(decode(&w.bytes, &cfg).is_err());
        // word 3 out of range on a 3-word crossbar
        let cfg3 = CrossbarConfig::new(3, 2).unwrap();
        let mut w = BitWriter::new(cfg3.w_i);
        w.put(0, 1);
        w.put(3, 2);
        assert!(decode(&w.bytes, &cfg3).is_err());
        assert!(decode(&[0], &cfg3).is_err());
    }

    fn arb_instruction(cfg: CrossbarConfig) -> impl Strategy<Value = Instruction> {
        let read = (0..cfg.s_d).prop_map(|w| Instruction::Read { w });
        let ws = prop_oneof![
            Just(WordlineSelect::Zero),
            Just(WordlineSelect::One),
            (0..cfg.w_d).prop_map(WordlineSelect::FromSource),
        ];
        let apply = (
            0..cfg.s_d,
            any::<bool>(),
            ws,
            proptest::collection::vec(proptest::option::of(0..cfg.w_d), cfg.w_d),
        )
            .prop_map(|(w, pir, ws, pairs)| {
                Instruction::Apply(Apply {
                    w,
                    s: if pir { Source::Pir } else { Source::Dmr },
                    ws,
                    pairs,
                })
            });
        prop_oneof![read, apply]
    }

    fn arb_case() -> impl Strategy<Value = (CrossbarConfig, Instruction)> {
        (1usize..70, 2usize..20, 0usize..9)
            .prop_map(|(s, w, extra)| {
                let c = CrossbarConfig::new(s, w).unwrap();
                CrossbarConfig::with_im(s, w, 16, c.w_i + extra).unwrap()
            })
            .prop_flat_map(|c| (Just(c), arb_instruction(c)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn round_trip((cfg, i) in arb_case()) {
            let word = encode(&i, &cfg).unwrap();
            prop_assert_eq!(word.len(), cfg.w_i.div_ceil(8));
            prop_assert_eq!(decode(&word, &cfg).unwrap(), i);
        }
    }
}
