//! Textual assembly.
//!
//! ```text
//! Read 0
//! Apply 2 1 01 1 0 1 1
//! Apply 2 11 0  1 1  0 0  1 2
//! ```
//!
//! An Apply lists `w`, the optional one-character source flag `s`
//! (0 = PIR, 1 = DMR, default DMR), the two-character wordline code `ws`,
//! `wb` only when `ws` is `11`, then one `v val` pair per bitline.

use super::{Apply, CrossbarConfig, Instruction, IsaError, Source, WordlineSelect};

pub fn format_instruction(instr: &Instruction) -> String {
    match instr {
        Instruction::Read { w } => format!("Read {w}"),
        Instruction::Apply(a) => {
            let s = match a.s {
                Source::Pir => 0,
                Source::Dmr => 1,
            };
            let mut out = format!("Apply {} {} {:02b}", a.w, s, a.ws.code());
            if let WordlineSelect::FromSource(b) = a.ws {
                out.push_str(&format!(" {b}"));
            }
            for p in &a.pairs {
                match p {
                    Some(v) => out.push_str(&format!(" 1 {v}")),
                    None => out.push_str(" 0 0"),
                }
            }
            out
        }
    }
}

pub fn write_asm(instrs: &[Instruction]) -> String {
    let mut s = String::new();
    for i in instrs {
        s.push_str(&format_instruction(i));
        s.push('\n');
    }
    s
}

fn num(tok: &str, line: usize, what: &str) -> Result<usize, IsaError> {
    tok.parse().map_err(|_| IsaError::Asm {
        line,
        msg: format!("invalid {what} '{tok}'"),
    })
}

fn parse_line(toks: &[&str], line: usize, cfg: &CrossbarConfig) -> Result<Instruction, IsaError> {
    let err = |m: String| IsaError::Asm { line, msg: m };
    let instr = match toks[0] {
        "Read" => {
            if toks.len() != 2 {
                return Err(err("Read takes one operand".into()));
            }
            Instruction::Read {
                w: num(toks[1], line, "word address")?,
            }
        }
        "Apply" => {
            let mut k = 1;
            let next = |k: &mut usize| -> Result<&str, IsaError> {
                let t = toks.get(*k).ok_or_else(|| err("truncated Apply".into()))?;
                *k += 1;
                Ok(t)
            };
            let w = num(next(&mut k)?, line, "word address")?;
            let mut tok = next(&mut k)?;
            let s = match tok {
                "0" => Some(Source::Pir),
                "1" => Some(Source::Dmr),
                _ => None,
            };
            if s.is_some() {
                tok = next(&mut k)?;
            }
            let ws = match tok {
                "00" => WordlineSelect::Zero,
                "01" => WordlineSelect::One,
                "11" => WordlineSelect::FromSource(num(next(&mut k)?, line, "wb")?),
                "10" => return Err(err("wordline select 10 is invalid".into())),
                other => return Err(err(format!("expected wordline select, found '{other}'"))),
            };
            let rest = &toks[k..];
            if rest.len() != 2 * cfg.w_d {
                return Err(err(format!("expected {} bitline pairs, found {} tokens", cfg.w_d, rest.len())));
            }
            let mut pairs = Vec::with_capacity(cfg.w_d);
            for p in rest.chunks(2) {
                let val = num(p[1], line, "val")?;
                match p[0] {
                    "1" => pairs.push(Some(val)),
                    "0" if val == 0 => pairs.push(None),
                    "0" => return Err(err("NOP pair must have val 0".into())),
                    other => return Err(err(format!("invalid v flag '{other}'"))),
                }
            }
            Instruction::Apply(Apply {
                w,
                s: s.unwrap_or(Source::Dmr),
                ws,
                pairs,
            })
        }
        other => return Err(err(format!("unknown mnemonic '{other}'"))),
    };
    instr.validate(cfg).map_err(|e| err(e.to_string()))?;
    Ok(instr)
}

/// Parses assembly, skipping blank lines and `#` comments.
pub fn parse_asm(text: &str, cfg: &CrossbarConfig) -> Result<Vec<Instruction>, IsaError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        out.push(parse_line(&toks, k + 1, cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const XOR_LISTING: &str = "Apply 0 0 01 1 0 1 1
Read 0
Apply 2 1 01 1 0 1 1
Apply 1 1 01 1 0 1 1
Apply 2 0 00 1 0 1 1
Apply 1 0 01 1 0 1 1
Read 1
Apply 2 1 01 1 0 1 1
";

    #[test]
    fn xor_listing_round_trip() {
        let cfg = CrossbarConfig::new(3, 2).unwrap();
        let prog = parse_asm(XOR_LISTING, &cfg).unwrap();
        assert_eq!(prog.len(), 8);
        assert_eq!(
            prog[0],
            Instruction::Apply(Apply {
                w: 0,
                s: Source::Pir,
                ws: WordlineSelect::One,
                pairs: vec![Some(0), Some(1)]
            })
        );
        assert!(prog[4].uses_pir());
        assert_eq!(write_asm(&prog), XOR_LISTING);
    }

    #[test]
    fn source_omitted_and_wb() {
        let cfg = CrossbarConfig::new(3, 3).unwrap();
        let i = &parse_asm("Apply 2 11 0  1 1  0 0  1 2", &cfg).unwrap()[0];
        assert_eq!(
            *i,
            Instruction::Apply(Apply {
                w: 2,
                s: Source::Dmr,
                ws: WordlineSelect::FromSource(0),
                pairs: vec![Some(1), None, Some(2)]
            })
        );
        assert_eq!(format_instruction(i), "Apply 2 1 11 0 1 1 0 0 1 2");
    }

    #[test]
    fn errors_carry_line() {
        let cfg = CrossbarConfig::new(3, 2).unwrap();
        for bad in ["Apply 0 0 10 1 0 1 1", "Apply 0 0 01 1 0", "Apply 3 0 01 1 0 1 1", "Jump 2", "Read", "Apply 0 0 01 0 1 1 1"] {
            let text = format!("# header\n\n{bad}\n");
            match parse_asm(&text, &cfg) {
                Err(IsaError::Asm { line, .. }) => assert_eq!(line, 3, "{bad}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }
}
