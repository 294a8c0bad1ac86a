//! ASCII AIGER (`aag`) reader and writer, combinational subset.

use super::{parse_err, Edge, LogicNetwork, NetlistError, NetworkKind, NodeId, NodeKind};
use std::collections::HashMap;
use std::fmt::Write;

struct Header {
    max_var: usize,
    inputs: usize,
    latches: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str) -> Result<Header, NetlistError> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("aag") {
        return Err(parse_err(1, "expected an 'aag' header"));
    }
    let nums: Vec<usize> = parts
        .map(|p| p.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(1, "header fields must be non-negative integers"))?;
    if nums.len() != 5 {
        return Err(parse_err(1, format!("header needs 5 counts, found {}", nums.len())));
    }
    let h = Header {
        max_var: nums[0],
        inputs: nums[1],
        latches: nums[2],
        outputs: nums[3],
        ands: nums[4],
    };
    if h.inputs + h.latches + h.ands > h.max_var {
        return Err(parse_err(1, "M is smaller than I + L + A"));
    }
    Ok(h)
}

fn literal(tok: &str, line: usize, max_var: usize) -> Result<usize, NetlistError> {
    let lit: usize = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid literal '{tok}'")))?;
    if lit / 2 > max_var {
        return Err(parse_err(line, format!("literal {lit} exceeds maximum variable {max_var}")));
    }
    Ok(lit)
}

/// Parses an ASCII AIGER document into an AIG. Latches are rejected.
pub fn parse_aiger(text: &str) -> Result<LogicNetwork, NetlistError> {
    let lines: Vec<&str> = text.lines().collect();
    let header_line = lines.first().ok_or_else(|| parse_err(1, "empty document"))?;
    let h = parse_header(header_line)?;
    if h.latches > 0 {
        return Err(parse_err(1, "latches are not supported (combinational networks only)"));
    }
    let body_len = h.inputs + h.outputs + h.ands;
    if lines.len() < 1 + body_len {
        return Err(parse_err(lines.len(), "document ends before all declared entries"));
    }

    let mut defined: HashMap<usize, usize> = HashMap::new(); // var -> line
    let mut input_vars = Vec::with_capacity(h.inputs);
    for k in 0..h.inputs {
        let ln = 2 + k;
        let toks: Vec<&str> = lines[ln - 1].split_whitespace().collect();
        if toks.len() != 1 {
            return Err(parse_err(ln, "input line must hold one literal"));
        }
        let lit = literal(toks[0], ln, h.max_var)?;
        if lit < 2 || lit % 2 == 1 {
            return Err(parse_err(ln, "input literal must be even and non-constant"));
        }
        if defined.insert(lit / 2, ln).is_some() {
            return Err(parse_err(ln, format!("variable {} defined twice", lit / 2)));
        }
        input_vars.push(lit / 2);
    }
    let mut output_lits = Vec::with_capacity(h.outputs);
    for k in 0..h.outputs {
        let ln = 2 + h.inputs + k;
        let toks: Vec<&str> = lines[ln - 1].split_whitespace().collect();
        if toks.len() != 1 {
            return Err(parse_err(ln, "output line must hold one literal"));
        }
        output_lits.push((literal(toks[0], ln, h.max_var)?, ln));
    }
    let mut ands: HashMap<usize, (usize, usize, usize)> = HashMap::new(); // var -> (rhs0, rhs1, line)
    let mut and_order = Vec::with_capacity(h.ands);
    for k in 0..h.ands {
        let ln = 2 + h.inputs + h.outputs + k;
        let toks: Vec<&str> = lines[ln - 1].split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(ln, "AND line must hold three literals"));
        }
        let lhs = literal(toks[0], ln, h.max_var)?;
        let r0 = literal(toks[1], ln, h.max_var)?;
        let r1 = literal(toks[2], ln, h.max_var)?;
        if lhs < 2 || lhs % 2 == 1 {
            return Err(parse_err(ln, "AND output literal must be even and non-constant"));
        }
        if defined.insert(lhs / 2, ln).is_some() {
            return Err(parse_err(ln, format!("variable {} defined twice", lhs / 2)));
        }
        ands.insert(lhs / 2, (r0, r1, ln));
        and_order.push(lhs / 2);
    }
    for (&var, &(r0, r1, ln)) in &ands {
        for r in [r0, r1] {
            if r / 2 != 0 && !defined.contains_key(&(r / 2)) {
                return Err(parse_err(ln, format!("literal {r} of variable {var} is dangling")));
            }
        }
    }
    for &(lit, ln) in &output_lits {
        if lit / 2 != 0 && !defined.contains_key(&(lit / 2)) {
            return Err(parse_err(ln, format!("output literal {lit} is dangling")));
        }
    }

    // symbol table
    let mut in_names: HashMap<usize, String> = HashMap::new();
    let mut out_names: HashMap<usize, String> = HashMap::new();
    for (k, line) in lines.iter().enumerate().skip(1 + body_len) {
        let ln = k + 1;
        if *line == "c" || line.starts_with("c ") {
            break;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (tag, rest) = line.split_once(' ').ok_or_else(|| parse_err(ln, "malformed symbol"))?;
        let (kind, idx) = tag.split_at(1);
        let idx: usize = idx.parse().map_err(|_| parse_err(ln, "malformed symbol index"))?;
        match kind {
            "i" if idx < h.inputs => {
                in_names.insert(idx, rest.to_string());
            }
            "o" if idx < h.outputs => {
                out_names.insert(idx, rest.to_string());
            }
            "l" => return Err(parse_err(ln, "latch symbol in a combinational file")),
            _ => return Err(parse_err(ln, format!("symbol '{tag}' out of range"))),
        }
    }

    let mut net = LogicNetwork::new(NetworkKind::Aig);
    let mut map: HashMap<usize, NodeId> = HashMap::new();
    for (k, &var) in input_vars.iter().enumerate() {
        let name = in_names.remove(&k).unwrap_or_else(|| format!("i{k}"));
        map.insert(var, net.add_pi(name).target);
    }
    // ASCII AIGER does not require ordered ANDs; emit in dependency order.
    let mut state: HashMap<usize, u8> = HashMap::new(); // 1 = visiting, 2 = done
    for &root in &and_order {
        let mut stack = vec![(root, false)];
        while let Some((var, expanded)) = stack.pop() {
            if map.contains_key(&var) || var == 0 {
                continue;
            }
            let (r0, r1, ln) = ands[&var];
            if expanded {
                let e = |lit: usize, map: &HashMap<usize, NodeId>| {
                    let target = if lit / 2 == 0 { NodeId::CONST0 } else { map[&(lit / 2)] };
                    Edge::new(target, lit % 2 == 1)
                };
                let a = e(r0, &map);
                let b = e(r1, &map);
                map.insert(var, net.add_and(a, b).target);
                state.insert(var, 2);
                continue;
            }
            if state.get(&var) == Some(&1) {
                return Err(parse_err(ln, format!("combinational cycle through variable {var}")));
            }
            state.insert(var, 1);
            stack.push((var, true));
            for r in [r1, r0] {
                let v = r / 2;
                if v != 0 && !map.contains_key(&v) {
                    if state.get(&v) == Some(&1) {
                        return Err(parse_err(ln, format!("combinational cycle through variable {v}")));
                    }
                    stack.push((v, false));
                }
            }
        }
    }
    for (k, &(lit, _)) in output_lits.iter().enumerate() {
        let target = if lit / 2 == 0 { NodeId::CONST0 } else { map[&(lit / 2)] };
        let name = out_names.remove(&k).unwrap_or_else(|| format!("o{k}"));
        net.add_output(Edge::new(target, lit % 2 == 1), name);
    }
    Ok(net)
}

/// Writes an AIG as ASCII AIGER with a symbol table. Inputs take variables
/// `1..=I` and AND nodes follow in node order.
pub fn write_aiger(net: &LogicNetwork) -> Result<String, NetlistError> {
    if net.kind() != NetworkKind::Aig {
        return Err(NetlistError::WrongKind {
            expected: NetworkKind::Aig,
            found: net.kind(),
        });
    }
    let mut var = vec![0usize; net.len()];
    let mut next = 1;
    for &p in net.pis() {
        var[p.0] = next;
        next += 1;
    }
    let mut and_ids = Vec::new();
    for (i, n) in net.nodes().iter().enumerate() {
        if n.kind == NodeKind::And {
            var[i] = next;
            next += 1;
            and_ids.push(i);
        }
    }
    let lit = |e: Edge| 2 * var[e.target.0] + e.inverted as usize;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "aag {} {} 0 {} {}",
        next - 1,
        net.num_pis(),
        net.outputs().len(),
        and_ids.len()
    );
    for &p in net.pis() {
        let _ = writeln!(s, "{}", 2 * var[p.0]);
    }
    for o in net.outputs() {
        let _ = writeln!(s, "{}", lit(o.edge));
    }
    for &i in &and_ids {
        let f = &net.nodes()[i].fanins;
        let _ = writeln!(s, "{} {} {}", 2 * var[i], lit(f[0]), lit(f[1]));
    }
    for (k, name) in net.pi_names().iter().enumerate() {
        let _ = writeln!(s, "i{k} {name}");
    }
    for (k, o) in net.outputs().iter().enumerate() {
        let _ = writeln!(s, "o{k} {}", o.name);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_buffer() {
        let net = parse_aiger("aag 1 1 0 1 0\n2\n2\n").unwrap();
        assert_eq!(net.num_pis(), 1);
        assert_eq!(net.outputs()[0].edge, Edge::regular(net.pis()[0]));
        assert_eq!(net.num_gates(), 0);
    }

    #[test]
    fn and_gate() {
        let net = parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n").unwrap();
        let tt = &net.truth_tables().unwrap()[0];
        assert_eq!((0..4).map(|i| tt.get(i)).collect::<Vec<_>>(), vec![false, false, false, true]);
    }

    #[test]
    fn unordered_ands_and_constants() {
        // 8 = AND(6, 1) is declared before 6 = AND(2, 4); output !8
        let net = parse_aiger("aag 4 2 0 1 2\n2\n4\n9\n8 6 1\n6 2 4\n").unwrap();
        let tt = &net.truth_tables().unwrap()[0];
        assert_eq!((0..4).map(|i| tt.get(i)).collect::<Vec<_>>(), vec![true, true, true, false]);
    }

    #[test]
    fn symbols_are_read() {
        let net = parse_aiger("aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 x\ni1 y\no0 f\nc\nanything\n").unwrap();
        assert_eq!(net.pi_names(), vec!["x", "y"]);
        assert_eq!(net.outputs()[0].name, "f");
    }

    #[test]
    fn errors_name_lines() {
        assert_eq!(parse_aiger("aig 1 1 0 1 0\n2\n2\n").unwrap_err(), parse_err(1, "expected an 'aag' header"));
        assert!(matches!(
            parse_aiger("aag 2 1 1 0 0\n2\n4 2\n"),
            Err(NetlistError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_aiger("aag 3 1 0 1 1\n2\n6\n6 2 4\n"),
            Err(NetlistError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_aiger("aag 3 1 0 1 1\n2\n"),
            Err(NetlistError::Parse { .. })
        ));
        assert!(matches!(
            parse_aiger("aag 3 2 0 1 2\n2\n4\n6\n6 8 2\n8 6 4\n"),
            Err(NetlistError::Parse { .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let src = "aag 5 3 0 2 2\n2\n4\n6\n10\n9\n8 2 5\n10 8 7\ni0 a\ni1 b\ni2 c\no0 f\no1 g\n";
        let net = parse_aiger(src).unwrap();
        let text = write_aiger(&net).unwrap();
        assert_eq!(text, src);
    }
}
