//! Parametric benchmark circuits as AIGs.

use crate::netlist::{Edge, LogicNetwork, NetworkKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn xor(n: &mut LogicNetwork, a: Edge, b: Edge) -> Edge {
    let both = n.add_and(a, b);
    let neither = n.add_and(!a, !b);
    n.add_and(!both, !neither)
}

fn or(n: &mut LogicNetwork, a: Edge, b: Edge) -> Edge {
    !n.add_and(!a, !b)
}

/// Sum and carry of a full adder.
fn full_add(n: &mut LogicNetwork, a: Edge, b: Edge, c: Edge) -> (Edge, Edge) {
    let p = xor(n, a, b);
    let s = xor(n, p, c);
    let g = n.add_and(a, b);
    let t = n.add_and(p, c);
    (s, or(n, g, t))
}

pub fn full_adder() -> LogicNetwork {
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let a = n.add_pi("a");
    let b = n.add_pi("b");
    let c = n.add_pi("cin");
    let (s, co) = full_add(&mut n, a, b, c);
    n.add_output(s, "s");
    n.add_output(co, "cout");
    n
}

/// `bits`-wide ripple-carry adder with carry-in; inputs a0.., b0.., cin.
pub fn ripple_adder(bits: usize) -> LogicNetwork {
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let a: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("a{i}"))).collect();
    let b: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("b{i}"))).collect();
    let mut c = n.add_pi("cin");
    for i in 0..bits {
        let (s, co) = full_add(&mut n, a[i], b[i], c);
        n.add_output(s, format!("s{i}"));
        c = co;
    }
    n.add_output(c, "cout");
    n
}

/// `bits` x `bits` unsigned array multiplier.
pub fn array_multiplier(bits: usize) -> LogicNetwork {
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let a: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("a{i}"))).collect();
    let b: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("b{i}"))).collect();
    let zero = n.constant(false);
    let mut acc: Vec<Edge> = vec![zero; 2 * bits];
    for (j, &bj) in b.iter().enumerate() {
        let mut carry = zero;
        for (i, &ai) in a.iter().enumerate() {
            let pp = n.add_and(ai, bj);
            let (s, c) = if j == 0 { (pp, zero) } else { full_add(&mut n, acc[i + j], pp, carry) };
            acc[i + j] = s;
            carry = c;
        }
        acc[bits + j] = carry;
    }
    for (k, e) in acc.into_iter().enumerate() {
        n.add_output(e, format!("p{k}"));
    }
    n
}

/// Unsigned comparator with outputs `lt`, `eq`, `gt`.
pub fn comparator(bits: usize) -> LogicNetwork {
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let a: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("a{i}"))).collect();
    let b: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("b{i}"))).collect();
    let mut eq = n.constant(true);
    let mut gt = n.constant(false);
    for i in (0..bits).rev() {
        let g = n.add_and(a[i], !b[i]);
        let e = !xor(&mut n, a[i], b[i]);
        let here = n.add_and(eq, g);
        gt = or(&mut n, gt, here);
        eq = n.add_and(eq, e);
    }
    let lt = n.add_and(!gt, !eq);
    n.add_output(lt, "lt");
    n.add_output(eq, "eq");
    n.add_output(gt, "gt");
    n
}

pub fn parity(bits: usize) -> LogicNetwork {
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let mut x: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("x{i}"))).collect();
    while x.len() > 1 {
        let mut next = Vec::new();
        for pair in x.chunks(2) {
            next.push(if pair.len() == 2 { xor(&mut n, pair[0], pair[1]) } else { pair[0] });
        }
        x = next;
    }
    if let Some(&p) = x.first() {
        n.add_output(p, "p");
    }
    n
}

/// Bitwise XOR of two `bits`-wide vectors.
pub fn vector_xor(bits: usize) -> LogicNetwork {
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let p: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("p{i}"))).collect();
    let q: Vec<Edge> = (0..bits).map(|i| n.add_pi(format!("q{i}"))).collect();
    for i in 0..bits {
        let x = xor(&mut n, p[i], q[i]);
        n.add_output(x, format!("x{i}"));
    }
    n
}

/// Random AIG: each gate picks two distinct earlier signals with random
/// polarity; outputs come from the last gates. Dead logic is swept.
pub fn random_aig(pis: usize, gates: usize, outputs: usize, seed: u64) -> LogicNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = LogicNetwork::new(NetworkKind::Aig);
    let mut sig: Vec<Edge> = (0..pis).map(|i| n.add_pi(format!("i{i}"))).collect();
    for _ in 0..gates {
        let len = sig.len();
        // bias towards recent signals to get some depth
        let lo = len.saturating_sub(8.max(len / 2));
        let x = rng.gen_range(lo..len);
        let mut y = rng.gen_range(0..len);
        if y == x {
            y = (y + 1) % len;
        }
        let (a, b) = (sig[x].xor(rng.gen()), sig[y].xor(rng.gen()));
        if a.target == b.target {
            continue;
        }
        let g = n.add_and(a, b);
        sig.push(g);
    }
    let outputs = outputs.min(sig.len());
    for k in 0..outputs {
        let e = sig[sig.len() - 1 - k].xor(rng.gen());
        n.add_output(e, format!("o{k}"));
    }
    n.sweep()
}

/// Named corpus of small circuits (each at most 12 inputs).
pub fn small_corpus() -> Vec<(String, LogicNetwork)> {
    let mut v = vec![
        ("full_adder".to_string(), full_adder()),
        ("xor2x2".into(), vector_xor(2)),
        ("adder2".into(), ripple_adder(2)),
        ("adder4".into(), ripple_adder(4)),
        ("mult2".into(), array_multiplier(2)),
        ("mult3".into(), array_multiplier(3)),
        ("cmp3".into(), comparator(3)),
        ("cmp5".into(), comparator(5)),
        ("parity8".into(), parity(8)),
    ];
    for s in 0..3u64 {
        v.push((format!("rand{s}"), random_aig(8 + s as usize, 40, 3, 100 + s)));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(v: usize, w: usize) -> Vec<bool> {
        (0..w).map(|j| (v >> j) & 1 == 1).collect()
    }

    fn num(b: &[bool]) -> usize {
        b.iter().enumerate().map(|(i, &x)| (x as usize) << i).sum()
    }

    #[test]
    fn adder_adds() {
        let n = ripple_adder(3);
        for v in 0..128 {
            let x = bits(v, 7);
            let (a, b, c) = (num(&x[0..3]), num(&x[3..6]), x[6] as usize);
            assert_eq!(num(&n.evaluate(&x)), a + b + c);
        }
    }

    #[test]
    fn multiplier_multiplies() {
        let n = array_multiplier(3);
        for v in 0..64 {
            let x = bits(v, 6);
            assert_eq!(num(&n.evaluate(&x)), num(&x[0..3]) * num(&x[3..6]));
        }
    }

    #[test]
    fn comparator_compares() {
        let n = comparator(3);
        for v in 0..64 {
            let x = bits(v, 6);
            let (a, b) = (num(&x[0..3]), num(&x[3..6]));
            assert_eq!(n.evaluate(&x), vec![a < b, a == b, a > b]);
        }
    }

    #[test]
    fn parity_and_xor() {
        let n = parity(5);
        for v in 0..32 {
            assert_eq!(n.evaluate(&bits(v, 5))[0], v.count_ones() % 2 == 1);
        }
        let n = vector_xor(2);
        for v in 0..16 {
            let x = bits(v, 4);
            assert_eq!(n.evaluate(&x), vec![x[0] ^ x[2], x[1] ^ x[3]]);
        }
    }

    #[test]
    fn random_is_reproducible() {
        let a = random_aig(6, 20, 2, 7);
        assert!(a.structurally_eq(&random_aig(6, 20, 2, 7)));
        assert!(a.num_gates() > 0);
        assert!(small_corpus().iter().all(|(_, n)| n.num_pis() <= 12));
    }
}
