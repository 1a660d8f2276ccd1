use super::formula::{Formula, Node, NodeKind};
use crate::error::{Error, Result};

/// `exists^k (conjunction of literals)`, literals in context `ctx + k`.
struct Block {
    k: usize,
    lits: Vec<Node>,
}

fn blocks(node: &Node, ctx: usize) -> Result<Vec<Block>> {
    Ok(match node.kind() {
        NodeKind::Atom(..) | NodeKind::Eq(..) => vec![Block {
            k: 0,
            lits: vec![node.clone()],
        }],
        NodeKind::True => vec![Block { k: 0, lits: Vec::new() }],
        NodeKind::False => Vec::new(),
        NodeKind::Or(ps) => {
            let mut out = Vec::new();
            for p in ps {
                out.extend(blocks(p, ctx)?);
            }
            out
        }
        NodeKind::And(ps) => {
            let mut acc = vec![Block { k: 0, lits: Vec::new() }];
            for p in ps {
                let right = blocks(p, ctx)?;
                let mut next = Vec::with_capacity(acc.len() * right.len());
                for b1 in &acc {
                    for b2 in &right {
                        let k = b1.k + b2.k;
                        let left_map: Vec<usize> = (0..ctx + b1.k).collect();
                        let right_map: Vec<usize> =
                            (0..ctx + b2.k).map(|i| if i < ctx { i } else { i + b1.k }).collect();
                        let lits = b1
                            .lits
                            .iter()
                            .map(|l| l.rename(&left_map, ctx + k))
                            .chain(b2.lits.iter().map(|l| l.rename(&right_map, ctx + k)))
                            .collect();
                        next.push(Block { k, lits });
                    }
                }
                acc = next;
            }
            acc
        }
        NodeKind::Exists(p) => blocks(p, ctx + 1)?
            .into_iter()
            .map(|b| Block {
                k: b.k + 1,
                lits: b.lits,
            })
            .collect(),
        NodeKind::Not(_) | NodeKind::Forall(_) => return Err(Error::NotCoherent(format!("{node:?}"))),
    })
}

/// Rewrites a coherent formula as a disjunction of blocks
/// `exists ȳ (l₁ ∧ … ∧ lₘ)` with atomic or equality literals.
pub fn coherent_normal_form(f: &Formula) -> Result<Formula> {
    if !f.is_coherent() {
        return Err(Error::NotCoherent(f.to_string()));
    }
    let disjuncts: Vec<Node> = blocks(f.node(), f.ctx())?
        .into_iter()
        .map(|b| {
            let core = match b.lits.len() {
                0 => Node::truth(),
                1 => b.lits.into_iter().next().unwrap(),
                _ => Node::and(b.lits),
            };
            Node::exists_n(b.k, core)
        })
        .collect();
    let node = if disjuncts.is_empty() {
        Node::falsity()
    } else {
        Node::new(NodeKind::Or(disjuncts))
    };
    Ok(Formula::trusted(f.ctx(), node))
}

/// Whether `f` has the shape produced by [`coherent_normal_form`].
pub fn is_normal_form(f: &Formula) -> bool {
    let literal = |n: &Node| matches!(n.kind(), NodeKind::Atom(..) | NodeKind::Eq(..));
    let block = |mut n: &Node| {
        while let NodeKind::Exists(b) = n.kind() {
            n = b;
        }
        match n.kind() {
            NodeKind::True => true,
            NodeKind::And(ls) => ls.iter().all(literal),
            _ => literal(n),
        }
    };
    match f.kind() {
        NodeKind::False => true,
        NodeKind::Or(bs) => bs.iter().all(block),
        _ => false,
    }
}
