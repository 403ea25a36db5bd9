//! The `pc v1` line-oriented text format for circuits.
//!
//! ```text
//! pc v1
//! vars <n>
//! L <id> <var> <1|0>         # literal leaf; 1 = positive, 0 = negated
//! P <id> <child> <child> …   # product node
//! S <id> <w>:<child> …       # weighted sum node
//! R <id>                     # root declaration; must be the last record
//! ```
//!
//! Blank lines and lines whose first non-space character is `#` are skipped.
//! Node ids must be dense and ascending — the k-th node record declares id
//! `k` — and children must be declared before they are referenced. Weights
//! use Rust's shortest round-trip float formatting, so parsing a rendered
//! circuit reproduces bit-identical weights. Nodes a file declares but never
//! connects to the root are discarded on load.

use super::{Circuit, CircuitBuilder, Node, NodeId};
use crate::{Error, Result};
use std::fmt::Write as _;

pub(super) fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pc v1");
    let _ = writeln!(out, "vars {}", c.n_vars());
    for (id, node) in c.nodes.iter().enumerate() {
        match node {
            Node::Leaf { var, positive } => {
                let _ = writeln!(out, "L {id} {var} {}", u8::from(*positive));
            }
            Node::Product { children } => {
                let _ = write!(out, "P {id}");
                for ch in children {
                    let _ = write!(out, " {ch}");
                }
                out.push('\n');
            }
            Node::Sum { terms } => {
                let _ = write!(out, "S {id}");
                for (w, ch) in terms {
                    let _ = write!(out, " {w}:{ch}");
                }
                out.push('\n');
            }
        }
    }
    let _ = writeln!(out, "R {}", c.root());
    out
}

fn perr(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

fn parse_usize(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let t = token.ok_or_else(|| perr(line, format!("missing {what}")))?;
    t.parse::<usize>().map_err(|e| perr(line, format!("bad {what} `{t}`: {e}")))
}

fn parse_child(token: &str, id: NodeId, line: usize) -> Result<NodeId> {
    let child: NodeId =
        token.parse().map_err(|e| perr(line, format!("bad child id `{token}`: {e}")))?;
    if child >= id {
        return Err(perr(
            line,
            format!("node {id} references child {child}, which is not declared before it"),
        ));
    }
    Ok(child)
}

pub(super) fn parse(input: &str) -> Result<Circuit> {
    let mut records = input
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.trim()))
        .filter(|&(_, l)| !l.is_empty() && !l.starts_with('#'));
    let after_end = input.lines().count() + 1;

    let (line, header) =
        records.next().ok_or_else(|| perr(1, "empty input, expected `pc v1`"))?;
    if header != "pc v1" {
        return Err(perr(line, format!("expected header `pc v1`, found `{header}`")));
    }
    let (line, vars) =
        records.next().ok_or_else(|| perr(after_end, "missing `vars <n>` line"))?;
    let n_vars = vars
        .strip_prefix("vars ")
        .map(str::trim)
        .ok_or_else(|| perr(line, format!("expected `vars <n>`, found `{vars}`")))?
        .parse::<usize>()
        .map_err(|e| perr(line, format!("bad variable count in `{vars}`: {e}")))?;

    let mut builder = CircuitBuilder::new(n_vars);
    let mut count: usize = 0;
    let mut root: Option<NodeId> = None;
    for (line, record) in records {
        if root.is_some() {
            return Err(perr(line, "content after the root declaration"));
        }
        let mut tokens = record.split_whitespace();
        let kind = tokens.next().expect("filtered records are non-empty");
        if kind == "R" {
            let id = parse_usize(tokens.next(), line, "root id")?;
            if id >= count {
                return Err(perr(line, format!("root {id} does not exist ({count} nodes declared)")));
            }
            if tokens.next().is_some() {
                return Err(perr(line, "unexpected tokens after the root id"));
            }
            root = Some(id);
            continue;
        }
        let id = parse_usize(tokens.next(), line, "node id")?;
        if id != count {
            return Err(perr(
                line,
                format!("node ids must be dense and ascending: expected {count}, found {id}"),
            ));
        }
        match kind {
            "L" => {
                let var = parse_usize(tokens.next(), line, "leaf variable")?;
                if var >= n_vars {
                    return Err(perr(
                        line,
                        format!("leaf variable {var} out of range, the circuit has {n_vars} variables"),
                    ));
                }
                let positive = match tokens.next() {
                    Some("1") => true,
                    Some("0") => false,
                    Some(other) => {
                        return Err(perr(line, format!("leaf polarity must be 1 or 0, found `{other}`")))
                    }
                    None => return Err(perr(line, "missing leaf polarity")),
                };
                if tokens.next().is_some() {
                    return Err(perr(line, "unexpected tokens after the leaf record"));
                }
                builder.leaf(var, positive);
            }
            "P" => {
                let mut children = Vec::new();
                for token in tokens {
                    children.push(parse_child(token, id, line)?);
                }
                if children.is_empty() {
                    return Err(perr(line, "product nodes need at least one child"));
                }
                builder.product(children);
            }
            "S" => {
                let mut terms = Vec::new();
                for token in tokens {
                    let (w_str, c_str) = token.split_once(':').ok_or_else(|| {
                        perr(line, format!("sum terms are written `<weight>:<child>`, found `{token}`"))
                    })?;
                    let w: f64 = w_str
                        .parse()
                        .map_err(|e| perr(line, format!("bad weight `{w_str}`: {e}")))?;
                    if !w.is_finite() {
                        return Err(perr(line, format!("weight `{w_str}` must be finite")));
                    }
                    terms.push((w, parse_child(c_str, id, line)?));
                }
                if terms.is_empty() {
                    return Err(perr(line, "sum nodes need at least one term"));
                }
                builder.sum(terms);
            }
            other => {
                return Err(perr(
                    line,
                    format!("unknown record type `{other}` (expected L, P, S, or R)"),
                ))
            }
        }
        count += 1;
    }
    let root = root.ok_or_else(|| perr(after_end, "missing root declaration (`R <id>`)"))?;
    Ok(builder.build(root))
}

#[cfg(test)]
mod tests {
    use super::super::CircuitBuilder;
    use super::*;
    use crate::linalg::Subset;
    use proptest::prelude::*;

    #[test]
    fn renders_the_documented_grammar() {
        let mut b = CircuitBuilder::new(2);
        let x0 = b.leaf(0, true);
        let n1 = b.leaf(1, false);
        let p = b.product(vec![x0, n1]);
        let s = b.sum(vec![(0.5, p), (2.0, x0)]);
        let c = b.build(s);
        assert_eq!(c.serialize(), "pc v1\nvars 2\nL 0 0 1\nL 1 1 0\nP 2 0 1\nS 3 0.5:2 2:0\nR 3\n");
    }

    #[derive(Clone, Debug)]
    enum Op {
        Leaf { var: u8, positive: bool },
        Product { picks: Vec<u8> },
        Sum { terms: Vec<(f64, u8)> },
    }

    fn weight_strategy() -> impl Strategy<Value = f64> {
        prop_oneof![
            Just(0.0),
            Just(-0.0),
            Just(1.0),
            -1.0e6..1.0e6f64,
            (-60i32..60).prop_map(|e| (e as f64).exp2()),
        ]
    }

    fn op_strategy() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0u8..4, any::<bool>()).prop_map(|(var, positive)| Op::Leaf { var, positive }),
            prop::collection::vec(any::<u8>(), 1..4).prop_map(|picks| Op::Product { picks }),
            prop::collection::vec((weight_strategy(), any::<u8>()), 1..4)
                .prop_map(|terms| Op::Sum { terms }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn random_circuits_round_trip(ops in prop::collection::vec(op_strategy(), 1..40)) {
            let mut b = CircuitBuilder::new(4);
            b.leaf(0, true);
            for op in ops {
                match op {
                    Op::Leaf { var, positive } => {
                        b.leaf(var as usize, positive);
                    }
                    Op::Product { picks } => {
                        let len = b.len();
                        let children: Vec<usize> = picks.iter().map(|&p| p as usize % len).collect();
                        b.product(children);
                    }
                    Op::Sum { terms } => {
                        let len = b.len();
                        let terms: Vec<(f64, usize)> =
                            terms.iter().map(|&(w, p)| (w, p as usize % len)).collect();
                        b.sum(terms);
                    }
                }
            }
            let root = b.len() - 1;
            let c = b.build(root);
            let text = serialize(&c);
            let back = parse(&text).unwrap();
            prop_assert_eq!(&text, &back.serialize());
            for mask in 0u64..16 {
                let x = Subset::from_mask(4, mask);
                prop_assert_eq!(
                    c.evaluate(&x).unwrap().to_bits(),
                    back.evaluate(&x).unwrap().to_bits()
                );
            }
        }
    }
}
