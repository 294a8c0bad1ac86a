//! Line-oriented MIG text format.
//!
//! ```text
//! # comment
//! pi 1 a
//! pi 2 b
//! pi 3 c
//! node 4 = MAJ(1,2,!3)
//! po !4 f
//! ```
//!
//! Id 0 is the constant 0 and is never declared. Inputs come first, nodes
//! may only reference ids defined on earlier lines, and `po` lines close the
//! file.

use super::{parse_err, Edge, LogicNetwork, NetlistError, NetworkKind, NodeId, NodeKind};
use std::collections::HashMap;
use std::fmt::Write;

#[derive(PartialEq, PartialOrd)]
enum Section {
    Inputs,
    Nodes,
    Outputs,
}

fn parse_lit(tok: &str, line: usize, ids: &HashMap<usize, NodeId>) -> Result<Edge, NetlistError> {
    let tok = tok.trim();
    let (inv, digits) = match tok.strip_prefix('!') {
        Some(rest) => (true, rest.trim()),
        None => (false, tok),
    };
    let id: usize = digits
        .parse()
        .map_err(|_| parse_err(line, format!("invalid literal '{tok}'")))?;
    let target = if id == 0 {
        NodeId::CONST0
    } else {
        *ids
            .get(&id)
            .ok_or_else(|| parse_err(line, format!("reference to undefined id {id}")))?
    };
    Ok(Edge::new(target, inv))
}

pub fn parse_mig(text: &str) -> Result<LogicNetwork, NetlistError> {
    let mut net = LogicNetwork::new(NetworkKind::Mig);
    let mut ids: HashMap<usize, NodeId> = HashMap::new();
    let mut section = Section::Inputs;
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword {
            "pi" => {
                if section > Section::Inputs {
                    return Err(parse_err(ln, "'pi' after nodes or outputs"));
                }
                let mut parts = rest.split_whitespace();
                let id = parse_id(parts.next(), ln)?;
                let name = parts.next().map(str::to_string).unwrap_or_else(|| format!("i{}", net.num_pis()));
                if parts.next().is_some() {
                    return Err(parse_err(ln, "trailing tokens after input name"));
                }
                define(&mut ids, id, net.add_pi(name).target, ln)?;
            }
            "node" => {
                if section > Section::Nodes {
                    return Err(parse_err(ln, "'node' after outputs"));
                }
                section = Section::Nodes;
                let (lhs, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| parse_err(ln, "expected 'node <id> = MAJ(...)'"))?;
                let id = parse_id(Some(lhs.trim()), ln)?;
                let rhs = rhs.trim();
                let args = rhs
                    .strip_prefix("MAJ(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| parse_err(ln, "expected MAJ(<lit>,<lit>,<lit>)"))?;
                let lits: Vec<&str> = args.split(',').collect();
                if lits.len() != 3 {
                    return Err(parse_err(ln, format!("MAJ takes 3 fanins, found {}", lits.len())));
                }
                let fanins = lits
                    .iter()
                    .map(|t| parse_lit(t, ln, &ids))
                    .collect::<Result<Vec<_>, _>>()?;
                let e = net.add_maj(fanins[0], fanins[1], fanins[2]);
                define(&mut ids, id, e.target, ln)?;
            }
            "po" => {
                section = Section::Outputs;
                let mut parts = rest.split_whitespace();
                let tok = parts.next().ok_or_else(|| parse_err(ln, "'po' needs a literal"))?;
                let e = parse_lit(tok, ln, &ids)?;
                let name = parts
                    .next()
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("o{}", net.outputs().len()));
                net.add_output(e, name);
            }
            other => return Err(parse_err(ln, format!("unknown keyword '{other}'"))),
        }
    }
    Ok(net)
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<usize, NetlistError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing id"))?;
    let id: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid id '{tok}'")))?;
    if id == 0 {
        return Err(parse_err(line, "id 0 is reserved for the constant"));
    }
    Ok(id)
}

fn define(ids: &mut HashMap<usize, NodeId>, id: usize, node: NodeId, line: usize) -> Result<(), NetlistError> {
    if ids.insert(id, node).is_some() {
        return Err(parse_err(line, format!("id {id} defined twice")));
    }
    Ok(())
}

/// Writes a MIG using its dense node ids.
pub fn write_mig(net: &LogicNetwork) -> Result<String, NetlistError> {
    if net.kind() != NetworkKind::Mig {
        return Err(NetlistError::WrongKind {
            expected: NetworkKind::Mig,
            found: net.kind(),
        });
    }
    let mut s = String::new();
    let names = net.pi_names();
    for (k, &p) in net.pis().iter().enumerate() {
        let _ = writeln!(s, "pi {} {}", p.0, names[k]);
    }
    for (i, n) in net.nodes().iter().enumerate() {
        if n.kind == NodeKind::Maj {
            let f = &n.fanins;
            let _ = writeln!(s, "node {i} = MAJ({},{},{})", f[0], f[1], f[2]);
        }
    }
    for o in net.outputs() {
        let _ = writeln!(s, "po {} {}", o.edge, o.name);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_only() {
        let net = parse_mig("# nothing but a constant\npo !0 one\n").unwrap();
        assert_eq!(net.num_pis(), 0);
        assert!(net.truth_tables().unwrap()[0].is_one());
    }

    #[test]
    fn sparse_ids_are_renumbered() {
        let net = parse_mig("pi 10 a\npi 20 b\npi 30 c\nnode 99 = MAJ(10, !20, 30)\npo 99\n").unwrap();
        assert_eq!(net.num_gates(), 1);
        let text = write_mig(&net).unwrap();
        assert_eq!(text, "pi 1 a\npi 2 b\npi 3 c\nnode 4 = MAJ(1,!2,3)\npo 4 o0\n");
    }

    #[test]
    fn errors() {
        let fwd = parse_mig("pi 1 a\nnode 2 = MAJ(1,3,0)\n").unwrap_err();
        assert_eq!(fwd, parse_err(2, "reference to undefined id 3"));
        assert!(matches!(parse_mig("pi 1 a\nnode 2 = MAJ(1,1)\n"), Err(NetlistError::Parse { line: 2, .. })));
        assert!(matches!(parse_mig("pi 1 a\npi 1 b\n"), Err(NetlistError::Parse { line: 2, .. })));
        assert!(matches!(parse_mig("node 2 = MAJ(0,0,0)\npi 1 a\n"), Err(NetlistError::Parse { line: 2, .. })));
        assert!(matches!(parse_mig("gate 1\n"), Err(NetlistError::Parse { line: 1, .. })));
    }
}
