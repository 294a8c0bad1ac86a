//! Rewriting a MIG into the fanout-free, single-inversion form used by the
//! minimal-device mapping.
//!
//! Constants count as polarity-neutral: the crossbar can drive either value
//! on any terminal, so `MAJ(a, b, 0)` and `MAJ(a, b, !0)` are accepted as is.

use super::{Edge, LogicNetwork, NetlistError, NetworkKind, NodeId, NodeKind};

fn inverted_count(fanins: &[Edge]) -> usize {
    fanins.iter().filter(|e| !e.is_const() && e.inverted).count()
}

/// True when the node has one inverted non-constant fanin, or no inverted
/// non-constant fanin together with at least one constant fanin.
pub fn is_canonical(net: &LogicNetwork, id: NodeId) -> bool {
    let n = net.node(id);
    if n.kind != NodeKind::Maj {
        return true;
    }
    match inverted_count(&n.fanins) {
        1 => true,
        0 => n.fanins.iter().any(|e| e.is_const()),
        _ => false,
    }
}

/// True when every gate is canonical and drives exactly one consumer.
pub fn is_normalized(net: &LogicNetwork) -> bool {
    let fo = net.fanouts();
    net.gate_ids().all(|g| fo[g.0] == 1 && is_canonical(net, g))
}

struct Builder<'a> {
    src: &'a LogicNetwork,
    dst: LogicNetwork,
    pi_map: Vec<Option<NodeId>>,
}

impl Builder<'_> {
    /// Emits a fresh copy of the cone rooted at `id`. Returns the new node
    /// and whether it computes the complement of the original.
    fn realize(&mut self, id: NodeId) -> (NodeId, bool) {
        let node = self.src.node(id);
        match node.kind {
            NodeKind::Const0 => (NodeId::CONST0, false),
            NodeKind::Pi => (self.pi_map[id.0].expect("input registered"), false),
            NodeKind::And => unreachable!("AND node in a MIG"),
            NodeKind::Maj => {
                let mut fanins: Vec<Edge> = node
                    .fanins
                    .iter()
                    .map(|e| {
                        let (t, c) = self.realize(e.target);
                        Edge::new(t, e.inverted ^ c)
                    })
                    .collect();
                let mut complemented = false;
                if inverted_count(&fanins) >= 2 {
                    // M(!x, !y, !z) = !M(x, y, z)
                    for e in fanins.iter_mut() {
                        *e = !*e;
                    }
                    complemented = true;
                }
                if inverted_count(&fanins) == 0 && !fanins.iter().any(|e| e.is_const()) {
                    let pos = (0..3).min_by_key(|&i| fanins[i].target).unwrap();
                    let x = fanins[pos];
                    let zero = self.dst.constant(false);
                    let copy = self.dst.add_maj(zero, !zero, !x);
                    fanins[pos] = !copy;
                }
                let out = self.dst.add_maj(fanins[0], fanins[1], fanins[2]);
                if let Some(name) = &node.name {
                    self.dst.set_node_name(out.target, name.clone());
                }
                (out.target, complemented)
            }
        }
    }
}

/// Replicates shared cones per consumer and fixes fanin polarities so that
/// every gate satisfies [`is_canonical`]. Output functions are unchanged;
/// output edges may become inverted.
pub fn normalize_mig(net: &LogicNetwork) -> Result<LogicNetwork, NetlistError> {
    if net.kind() != NetworkKind::Mig {
        return Err(NetlistError::WrongKind {
            expected: NetworkKind::Mig,
            found: net.kind(),
        });
    }
    let mut b = Builder {
        src: net,
        dst: LogicNetwork::new(NetworkKind::Mig),
        pi_map: vec![None; net.len()],
    };
    let names = net.pi_names();
    for (k, &p) in net.pis().iter().enumerate() {
        b.pi_map[p.0] = Some(b.dst.add_pi(names[k].clone()).target);
    }
    for o in net.outputs() {
        let (t, c) = b.realize(o.edge.target);
        b.dst.add_output(Edge::new(t, o.edge.inverted ^ c), o.name.clone());
    }
    Ok(b.dst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_mig;

    fn same_function(a: &LogicNetwork, b: &LogicNetwork) {
        assert_eq!(a.truth_tables().unwrap(), b.truth_tables().unwrap());
    }

    #[test]
    fn canonical_tree_unchanged() {
        let net = parse_mig(
            "pi 1 a\npi 2 b\npi 3 c\npi 4 d\nnode 5 = MAJ(1,2,!3)\nnode 6 = MAJ(5,!4,1)\npo 6 f\n",
        )
        .unwrap();
        let out = normalize_mig(&net).unwrap();
        assert!(out.structurally_eq(&net));
        assert!(is_normalized(&out));
    }

    #[test]
    fn three_inverted_fanins() {
        let net = parse_mig("pi 1 a\npi 2 b\npi 3 c\nnode 4 = MAJ(!1,!2,!3)\npo 4 f\n").unwrap();
        assert!(!is_canonical(&net, NodeId(4)));
        let out = normalize_mig(&net).unwrap();
        same_function(&net, &out);
        assert!(is_normalized(&out));
        // one inverted copy of the lowest fanin, and the output absorbs the complement
        assert_eq!(out.num_gates(), 2);
        assert!(out.outputs()[0].edge.inverted);
    }

    #[test]
    fn two_inverted_fanins_flip() {
        let net = parse_mig("pi 1 a\npi 2 b\npi 3 c\nnode 4 = MAJ(!1,!2,3)\npo 4 f\n").unwrap();
        let out = normalize_mig(&net).unwrap();
        same_function(&net, &out);
        assert_eq!(out.num_gates(), 1);
        assert_eq!(out.node(NodeId(4)).fanins, vec![Edge::regular(NodeId(1)), Edge::regular(NodeId(2)), !Edge::regular(NodeId(3))]);
        assert!(out.outputs()[0].edge.inverted);
    }

    #[test]
    fn diamond_replicates_shared_node() {
        let net = parse_mig(
            "pi 1 a\npi 2 b\npi 3 c\nnode 4 = MAJ(1,2,!3)\nnode 5 = MAJ(4,1,!2)\nnode 6 = MAJ(4,3,!1)\nnode 7 = MAJ(5,!6,2)\npo 7 f\n",
        )
        .unwrap();
        let out = normalize_mig(&net).unwrap();
        same_function(&net, &out);
        assert!(is_normalized(&out));
        assert_eq!(out.num_gates(), net.num_gates() + 1);
        let copies: Vec<_> = out.gate_ids().filter(|&g| out.node(g).fanins == net.node(NodeId(4)).fanins).collect();
        assert_eq!(copies.len(), 2);
    }

    #[test]
    fn and_style_nodes_are_canonical() {
        let net = parse_mig("pi 1 a\npi 2 b\nnode 3 = MAJ(1,2,0)\nnode 4 = MAJ(3,!0,1)\npo 4\n").unwrap();
        let out = normalize_mig(&net).unwrap();
        assert!(out.structurally_eq(&net));
    }

    #[test]
    fn input_and_constant_outputs() {
        let net = parse_mig("pi 1 a\npo !1 na\npo !0 one\n").unwrap();
        let out = normalize_mig(&net).unwrap();
        assert!(out.structurally_eq(&net));
    }

    #[test]
    fn rejects_aig() {
        let aig = LogicNetwork::new(NetworkKind::Aig);
        assert!(matches!(normalize_mig(&aig), Err(NetlistError::WrongKind { .. })));
    }
}
