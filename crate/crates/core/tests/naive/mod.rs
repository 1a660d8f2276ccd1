//! Brute-force reference implementations used as test oracles. Written
//! directly against the AST and the relation tables, sharing no code with the
//! library's evaluator, enumerator or groupoid builder.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ilwb::semantics::{FiniteModel, TupleSet};
use ilwb::syntax::{Axiom, Formula, Node, NodeKind, Theory};

pub fn holds(node: &Node, env: &mut Vec<usize>, m: &FiniteModel) -> bool {
    match node.kind() {
        NodeKind::Atom(r, args) => {
            let t: Vec<usize> = args.iter().map(|&i| env[i]).collect();
            m.relation(r).expect("relation in model").contains(&t)
        }
        NodeKind::Eq(i, j) => env[*i] == env[*j],
        NodeKind::True => true,
        NodeKind::False => false,
        NodeKind::And(ps) => ps.iter().all(|p| holds(p, env, m)),
        NodeKind::Or(ps) => ps.iter().any(|p| holds(p, env, m)),
        NodeKind::Not(p) => !holds(p, env, m),
        NodeKind::Exists(p) => (0..m.size()).any(|a| {
            env.push(a);
            let r = holds(p, env, m);
            env.pop();
            r
        }),
        NodeKind::Forall(p) => (0..m.size()).all(|a| {
            env.push(a);
            let r = holds(p, env, m);
            env.pop();
            r
        }),
    }
}

pub fn tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for t in &out {
            for a in 0..n {
                let mut t2 = t.clone();
                t2.push(a);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

/// The set of tuples satisfying `f`, by direct recursion over assignments.
pub fn eval(f: &Formula, m: &FiniteModel) -> BTreeSet<Vec<usize>> {
    tuples(f.ctx(), m.size())
        .into_iter()
        .filter(|t| {
            let mut env = t.clone();
            holds(f.node(), &mut env, m)
        })
        .collect()
}

pub fn as_set(t: &TupleSet) -> BTreeSet<Vec<usize>> {
    t.iter().collect()
}

pub fn is_model(m: &FiniteModel, t: &Theory) -> bool {
    t.axioms().iter().all(|ax| match ax {
        Axiom::Coherent(c) => tuples(c.ctx(), m.size()).into_iter().all(|tu| {
            let mut e1 = tu.clone();
            let mut e2 = tu;
            !holds(c.lhs().node(), &mut e1, m) || holds(c.rhs().node(), &mut e2, m)
        }),
        Axiom::Sentence(s) => holds(s.node(), &mut Vec::new(), m),
    })
}

/// Every structure on `0..n` for `n ≤ cap`, filtered by [`is_model`].
pub fn models(t: &Theory, cap: usize) -> Vec<FiniteModel> {
    let rels: Vec<(String, usize)> = t
        .language()
        .relations()
        .iter()
        .map(|r| (r.name.clone(), r.arity))
        .collect();
    let mut out = Vec::new();
    for n in 0..=cap {
        let slots: Vec<(usize, Vec<usize>)> = rels
            .iter()
            .enumerate()
            .flat_map(|(ri, (_, a))| tuples(*a, n).into_iter().map(move |tu| (ri, tu)))
            .collect();
        assert!(slots.len() < 30, "too many tuples for the brute-force enumerator");
        for mask in 0u64..(1u64 << slots.len()) {
            let mut tables: BTreeMap<String, TupleSet> = rels
                .iter()
                .map(|(name, a)| (name.clone(), TupleSet::empty(*a, n)))
                .collect();
            for (bit, (ri, tu)) in slots.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    tables.get_mut(&rels[*ri].0).unwrap().insert(tu);
                }
            }
            let m = FiniteModel::new(n, tables).unwrap();
            if is_model(&m, t) {
                out.push(m);
            }
        }
    }
    out
}

pub fn model_key(m: &FiniteModel) -> String {
    m.to_json().to_string()
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Whether `p` (sending `i` to `p[i]`) carries `m` onto `n`.
pub fn is_iso(m: &FiniteModel, n: &FiniteModel, p: &[usize]) -> bool {
    m.size() == n.size()
        && m.relations().iter().all(|(name, table)| {
            let other = n.relation(name).unwrap();
            tuples(table.arity(), m.size()).iter().all(|t| {
                let image: Vec<usize> = t.iter().map(|&x| p[x]).collect();
                table.contains(t) == other.contains(&image)
            })
        })
}

pub fn isos(m: &FiniteModel, n: &FiniteModel) -> Vec<Vec<usize>> {
    if m.size() != n.size() {
        return vec![];
    }
    permutations(m.size()).into_iter().filter(|p| is_iso(m, n, p)).collect()
}
