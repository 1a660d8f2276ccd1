use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// The shape of a formula node.
///
/// Variables are positional. A node in a context of size `n` may mention the
/// indices `0..n`; the body of `Exists`/`Forall` lives in context `n + 1` and
/// the bound variable is index `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Atom(String, Vec<usize>),
    Eq(usize, usize),
    True,
    False,
    And(Vec<Node>),
    Or(Vec<Node>),
    Not(Node),
    Exists(Node),
    Forall(Node),
}

/// Shared handle to a formula node. Cloning is cheap, so large synthesized
/// formulas can share subtrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node(Arc<NodeKind>);

impl Node {
    pub fn new(kind: NodeKind) -> Node {
        Node(Arc::new(kind))
    }

    pub fn kind(&self) -> &NodeKind {
        &self.0
    }

    /// Address of the shared allocation, usable as a cache key while the node
    /// is kept alive.
    pub fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn atom(name: impl Into<String>, args: Vec<usize>) -> Node {
        Node::new(NodeKind::Atom(name.into(), args))
    }
    pub fn eq(i: usize, j: usize) -> Node {
        Node::new(NodeKind::Eq(i, j))
    }
    pub fn truth() -> Node {
        Node::new(NodeKind::True)
    }
    pub fn falsity() -> Node {
        Node::new(NodeKind::False)
    }
    /// Conjunction; the empty conjunction is `True`.
    pub fn and(parts: Vec<Node>) -> Node {
        if parts.is_empty() {
            Node::truth()
        } else {
            Node::new(NodeKind::And(parts))
        }
    }
    /// Disjunction; the empty disjunction is `False`.
    pub fn or(parts: Vec<Node>) -> Node {
        if parts.is_empty() {
            Node::falsity()
        } else {
            Node::new(NodeKind::Or(parts))
        }
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(sub: Node) -> Node {
        Node::new(NodeKind::Not(sub))
    }
    pub fn exists(body: Node) -> Node {
        Node::new(NodeKind::Exists(body))
    }
    pub fn forall(body: Node) -> Node {
        Node::new(NodeKind::Forall(body))
    }

    /// Conjunction that drops `True` parts, collapses on `False` and unwraps
    /// singletons.
    pub fn conj(parts: impl IntoIterator<Item = Node>) -> Node {
        let mut kept = Vec::new();
        for p in parts {
            match p.kind() {
                NodeKind::True => {}
                NodeKind::False => return Node::falsity(),
                _ => kept.push(p),
            }
        }
        if kept.len() == 1 {
            kept.pop().unwrap()
        } else {
            Node::and(kept)
        }
    }

    /// Disjunction that drops `False` parts, collapses on `True` and unwraps
    /// singletons.
    pub fn disj(parts: impl IntoIterator<Item = Node>) -> Node {
        let mut kept = Vec::new();
        for p in parts {
            match p.kind() {
                NodeKind::False => {}
                NodeKind::True => return Node::truth(),
                _ => kept.push(p),
            }
        }
        if kept.len() == 1 {
            kept.pop().unwrap()
        } else {
            Node::or(kept)
        }
    }

    /// `exists^k body`.
    pub fn exists_n(k: usize, body: Node) -> Node {
        (0..k).fold(body, |b, _| Node::exists(b))
    }

    /// `forall^k body`.
    pub fn forall_n(k: usize, body: Node) -> Node {
        (0..k).fold(body, |b, _| Node::forall(b))
    }

    fn check(&self, ctx: usize) -> Result<()> {
        let bound = |i: usize| {
            if i < ctx {
                Ok(())
            } else {
                Err(Error::IndexOutOfRange { index: i, ctx })
            }
        };
        match self.kind() {
            NodeKind::Atom(_, args) => args.iter().try_for_each(|&i| bound(i)),
            NodeKind::Eq(i, j) => bound(*i).and_then(|_| bound(*j)),
            NodeKind::True | NodeKind::False => Ok(()),
            NodeKind::And(ps) | NodeKind::Or(ps) => ps.iter().try_for_each(|p| p.check(ctx)),
            NodeKind::Not(p) => p.check(ctx),
            NodeKind::Exists(p) | NodeKind::Forall(p) => p.check(ctx + 1),
        }
    }

    /// Rename free variables: index `i` of the current level goes to `map[i]`,
    /// which lives in a context of size `new_ctx`.
    pub(crate) fn rename(&self, map: &[usize], new_ctx: usize) -> Node {
        match self.kind() {
            NodeKind::Atom(r, args) => Node::atom(r.clone(), args.iter().map(|&i| map[i]).collect()),
            NodeKind::Eq(i, j) => Node::eq(map[*i], map[*j]),
            NodeKind::True | NodeKind::False => self.clone(),
            NodeKind::And(ps) => Node::new(NodeKind::And(ps.iter().map(|p| p.rename(map, new_ctx)).collect())),
            NodeKind::Or(ps) => Node::new(NodeKind::Or(ps.iter().map(|p| p.rename(map, new_ctx)).collect())),
            NodeKind::Not(p) => Node::not(p.rename(map, new_ctx)),
            NodeKind::Exists(p) | NodeKind::Forall(p) => {
                let mut inner = map.to_vec();
                inner.push(new_ctx);
                let body = p.rename(&inner, new_ctx + 1);
                if matches!(self.kind(), NodeKind::Exists(_)) {
                    Node::exists(body)
                } else {
                    Node::forall(body)
                }
            }
        }
    }

    pub fn is_coherent(&self) -> bool {
        match self.kind() {
            NodeKind::Atom(..) | NodeKind::Eq(..) | NodeKind::True | NodeKind::False => true,
            NodeKind::And(ps) | NodeKind::Or(ps) => ps.iter().all(Node::is_coherent),
            NodeKind::Exists(p) => p.is_coherent(),
            NodeKind::Not(_) | NodeKind::Forall(_) => false,
        }
    }

    fn collect_relations(&self, out: &mut BTreeMap<String, usize>) -> Result<()> {
        match self.kind() {
            NodeKind::Atom(r, args) => match out.get(r) {
                Some(&a) if a != args.len() => Err(Error::LanguageMismatch(format!(
                    "relation {r} used with arities {a} and {}",
                    args.len()
                ))),
                _ => {
                    out.insert(r.clone(), args.len());
                    Ok(())
                }
            },
            NodeKind::Eq(..) | NodeKind::True | NodeKind::False => Ok(()),
            NodeKind::And(ps) | NodeKind::Or(ps) => ps.iter().try_for_each(|p| p.collect_relations(out)),
            NodeKind::Not(p) | NodeKind::Exists(p) | NodeKind::Forall(p) => p.collect_relations(out),
        }
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        1 + match self.kind() {
            NodeKind::And(ps) | NodeKind::Or(ps) => ps.iter().map(Node::size).sum(),
            NodeKind::Not(p) | NodeKind::Exists(p) | NodeKind::Forall(p) => p.size(),
            _ => 0,
        }
    }

    pub fn depth(&self) -> usize {
        match self.kind() {
            NodeKind::And(ps) | NodeKind::Or(ps) => 1 + ps.iter().map(Node::depth).max().unwrap_or(0),
            NodeKind::Not(p) | NodeKind::Exists(p) | NodeKind::Forall(p) => 1 + p.depth(),
            _ => 0,
        }
    }
}

/// A formula in context: a node together with the number of free variable
/// positions it may use.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Formula {
    ctx: usize,
    node: Node,
}

impl Formula {
    /// Checks that every index is below `ctx`.
    pub fn new(ctx: usize, node: Node) -> Result<Formula> {
        node.check(ctx)?;
        Ok(Formula { ctx, node })
    }

    /// Builds a formula whose indices are known to be in range.
    pub(crate) fn trusted(ctx: usize, node: Node) -> Formula {
        debug_assert!(node.check(ctx).is_ok(), "index out of range in context {ctx}");
        Formula { ctx, node }
    }

    pub fn ctx(&self) -> usize {
        self.ctx
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn kind(&self) -> &NodeKind {
        self.node.kind()
    }

    pub fn atom(ctx: usize, name: impl Into<String>, args: Vec<usize>) -> Result<Formula> {
        Formula::new(ctx, Node::atom(name, args))
    }

    pub fn eq(ctx: usize, i: usize, j: usize) -> Result<Formula> {
        Formula::new(ctx, Node::eq(i, j))
    }

    pub fn truth(ctx: usize) -> Formula {
        Formula::trusted(ctx, Node::truth())
    }

    pub fn falsity(ctx: usize) -> Formula {
        Formula::trusted(ctx, Node::falsity())
    }

    fn parts(ctx: usize, parts: impl IntoIterator<Item = Formula>) -> Vec<Node> {
        parts
            .into_iter()
            .map(|p| {
                assert_eq!(p.ctx, ctx, "context mismatch in connective");
                p.node
            })
            .collect()
    }

    pub fn and(ctx: usize, parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::trusted(ctx, Node::and(Formula::parts(ctx, parts)))
    }

    pub fn or(ctx: usize, parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::trusted(ctx, Node::or(Formula::parts(ctx, parts)))
    }

    /// Simplifying conjunction, see [`Node::conj`].
    pub fn conj(ctx: usize, parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::trusted(ctx, Node::conj(Formula::parts(ctx, parts)))
    }

    /// Simplifying disjunction, see [`Node::disj`].
    pub fn disj(ctx: usize, parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::trusted(ctx, Node::disj(Formula::parts(ctx, parts)))
    }

    pub fn negate(&self) -> Formula {
        Formula::trusted(self.ctx, Node::not(self.node.clone()))
    }

    /// Binds the last variable existentially.
    pub fn exists(&self) -> Formula {
        assert!(self.ctx > 0, "exists over an empty context");
        Formula::trusted(self.ctx - 1, Node::exists(self.node.clone()))
    }

    /// Binds the last variable universally.
    pub fn forall(&self) -> Formula {
        assert!(self.ctx > 0, "forall over an empty context");
        Formula::trusted(self.ctx - 1, Node::forall(self.node.clone()))
    }

    /// Binds the last `k` variables existentially.
    pub fn exists_n(&self, k: usize) -> Formula {
        assert!(self.ctx >= k, "exists over too small a context");
        Formula::trusted(self.ctx - k, Node::exists_n(k, self.node.clone()))
    }

    /// Immediate subformulas with their contexts.
    pub fn children(&self) -> Vec<Formula> {
        match self.kind() {
            NodeKind::And(ps) | NodeKind::Or(ps) => ps.iter().map(|p| Formula::trusted(self.ctx, p.clone())).collect(),
            NodeKind::Not(p) => vec![Formula::trusted(self.ctx, p.clone())],
            NodeKind::Exists(p) | NodeKind::Forall(p) => {
                vec![Formula::trusted(self.ctx + 1, p.clone())]
            }
            _ => Vec::new(),
        }
    }

    /// Reindexes free variables: variable `i` becomes `map[i]` in a context of
    /// size `new_ctx`.
    pub fn substitute(&self, map: &[usize], new_ctx: usize) -> Result<Formula> {
        if map.len() != self.ctx {
            return Err(Error::ContextMismatch {
                expected: self.ctx,
                found: map.len(),
            });
        }
        if let Some(&bad) = map.iter().find(|&&i| i >= new_ctx) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                ctx: new_ctx,
            });
        }
        Ok(Formula::trusted(new_ctx, self.node.rename(map, new_ctx)))
    }

    /// Same formula read in a larger context.
    pub fn weaken(&self, new_ctx: usize) -> Formula {
        assert!(new_ctx >= self.ctx);
        if new_ctx == self.ctx {
            return self.clone();
        }
        let map: Vec<usize> = (0..self.ctx).collect();
        Formula::trusted(new_ctx, self.node.rename(&map, new_ctx))
    }

    /// Shifts every free variable up by `offset` inside a context of size
    /// `new_ctx`.
    pub fn shift(&self, offset: usize, new_ctx: usize) -> Formula {
        assert!(self.ctx + offset <= new_ctx);
        let map: Vec<usize> = (0..self.ctx).map(|i| i + offset).collect();
        Formula::trusted(new_ctx, self.node.rename(&map, new_ctx))
    }

    pub fn is_coherent(&self) -> bool {
        self.node.is_coherent()
    }

    /// Relation names used, with their arities.
    pub fn relations(&self) -> Result<BTreeMap<String, usize>> {
        let mut out = BTreeMap::new();
        self.node.collect_relations(&mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_examples() {
        let e = Formula::atom(2, "E", vec![0, 1]).unwrap();
        assert_eq!(
            e.substitute(&[1, 0], 2).unwrap(),
            Formula::atom(2, "E", vec![1, 0]).unwrap()
        );
        assert_eq!(
            e.substitute(&[0, 0], 1).unwrap(),
            Formula::atom(1, "E", vec![0, 0]).unwrap()
        );
        let eq = Formula::eq(2, 0, 1).unwrap();
        assert_eq!(eq.substitute(&[2, 2], 3).unwrap(), Formula::eq(3, 2, 2).unwrap());
        assert!(e.substitute(&[0, 3], 3).is_err());
    }

    #[test]
    fn substitution_under_binder() {
        // exists z. E(x,z) in context (x,y); swap x and y.
        let f = Formula::new(2, Node::exists(Node::atom("E", vec![0, 2]))).unwrap();
        let g = f.substitute(&[1, 0], 2).unwrap();
        assert_eq!(g.node(), &Node::exists(Node::atom("E", vec![1, 2])));
        // Into a larger context the bound variable moves to the top.
        let h = f.substitute(&[0, 1], 4).unwrap();
        assert_eq!(h.node(), &Node::exists(Node::atom("E", vec![0, 4])));
    }

    #[test]
    fn coherence() {
        let ex = Formula::new(1, Node::exists(Node::atom("E", vec![0, 1]))).unwrap();
        assert!(ex.is_coherent());
        let neg = Formula::atom(2, "E", vec![0, 1]).unwrap().negate();
        assert!(!neg.is_coherent());
        let or = Formula::new(2, Node::or(vec![Node::atom("E", vec![0, 1]), Node::eq(0, 1)])).unwrap();
        assert!(or.is_coherent());
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Formula::atom(1, "E", vec![0, 1]).is_err());
        assert!(Formula::new(1, Node::exists(Node::atom("E", vec![0, 1]))).is_ok());
    }

    #[test]
    fn empty_connectives() {
        assert_eq!(Node::or(vec![]), Node::falsity());
        assert_eq!(Node::and(vec![]), Node::truth());
        assert_eq!(Node::conj(vec![Node::truth(), Node::eq(0, 1)]), Node::eq(0, 1));
        assert_eq!(Node::disj(vec![Node::falsity()]), Node::falsity());
    }
}
