//! File loading and saving for netlists, programs and input vectors.

use anyhow::{bail, Context, Result};
use revamp::isa::Program;
use revamp::lut::{LutGraph, LutInput};
use revamp::netlist::{parse_aiger, parse_mig, LogicNetwork};
use serde::Serialize;
use std::fs;
use std::path::Path;

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

/// Reads an ASCII AIGER (`.aag`) or MIG text (`.mig`) netlist. Other
/// extensions are recognized by the `aag` header.
pub fn load_netlist(path: &Path) -> Result<LogicNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let net = match extension(path).as_str() {
        "aag" => parse_aiger(&text),
        "mig" => parse_mig(&text),
        _ if text.trim_start().starts_with("aag") => parse_aiger(&text),
        _ => parse_mig(&text),
    };
    net.with_context(|| format!("parsing {}", path.display()))
}

/// Reads a program container (`.rvmp`) or its JSON form (`.json`).
pub fn load_program(path: &Path) -> Result<Program> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let program = if extension(path) == "json" || bytes.first() == Some(&b'{') {
        Program::from_json(std::str::from_utf8(&bytes).context("program JSON is not UTF-8")?)
    } else {
        Program::from_bytes(&bytes)
    };
    program.with_context(|| format!("decoding {}", path.display()))
}

pub fn save_program(path: &Path, program: &Program) -> Result<()> {
    let data = if extension(path) == "json" { program.to_json().into_bytes() } else { program.to_bytes()? };
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// One vector per non-empty line; character `i` is input `i`. `#` starts a
/// comment, whitespace and `_` are ignored.
pub fn parse_vectors(text: &str, inputs: usize) -> Result<Vec<Vec<bool>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let bits: Vec<char> = line.chars().filter(|c| !c.is_whitespace() && *c != '_').collect();
        if bits.is_empty() {
            continue;
        }
        let v = bits
            .iter()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => bail!("line {}: unexpected character '{c}'", n + 1),
            })
            .collect::<Result<Vec<bool>>>()?;
        if v.len() != inputs {
            bail!("line {}: {} values, program has {} inputs", n + 1, v.len(), inputs);
        }
        out.push(v);
    }
    Ok(out)
}

pub fn bits_string(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Serialize)]
struct LutJson {
    id: usize,
    level: usize,
    inputs: Vec<String>,
    function: String,
}

#[derive(Serialize)]
struct LutGraphJson<'a> {
    k: usize,
    inputs: &'a [String],
    luts: Vec<LutJson>,
    outputs: Vec<(String, usize)>,
    depth: usize,
    min_dev: usize,
}

/// LUT graph as JSON with truth tables in hex. Inputs are written as the PI
/// name or `lut<id>`.
pub fn lut_graph_json(g: &LutGraph) -> String {
    let luts = g
        .luts
        .iter()
        .map(|l| LutJson {
            id: l.id,
            level: l.level,
            inputs: l
                .inputs
                .iter()
                .map(|i| match *i {
                    LutInput::Pi(p) => g.pi_names[p].clone(),
                    LutInput::Lut(n) => format!("lut{n}"),
                })
                .collect(),
            function: l.function.to_hex(),
        })
        .collect();
    let doc = LutGraphJson {
        k: g.k,
        inputs: &g.pi_names,
        luts,
        outputs: g.output_names.iter().cloned().zip(g.outputs.iter().copied()).collect(),
        depth: g.depth(),
        min_dev: revamp::lut::min_dev(g),
    };
    serde_json::to_string_pretty(&doc).expect("LUT graph serializes")
}
