use std::collections::HashMap;
use std::rc::Rc;

use super::model::{FiniteModel, TupleSet};
use crate::error::{Error, Result};
use crate::syntax::{Formula, Node, NodeKind};

/// Truth table over a sorted set of variables. Entry order is big-endian in
/// the variable order, so a table over `0..n` is a lexicographic bitmap.
#[derive(Clone, Debug)]
pub(crate) struct Table {
    vars: Vec<usize>,
    bits: Vec<bool>,
}

fn for_each_assignment(len: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if len > 0 && k == 0 {
        return;
    }
    let mut digits = vec![0usize; len];
    loop {
        f(&digits);
        let mut p = len;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            digits[p] += 1;
            if digits[p] < k {
                break;
            }
            digits[p] = 0;
        }
    }
}

impl Table {
    fn constant(b: bool) -> Table {
        Table {
            vars: Vec::new(),
            bits: vec![b],
        }
    }

    fn atom(args: &[usize], rel: &TupleSet, k: usize) -> Table {
        let mut vars = args.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let pos: Vec<usize> = args.iter().map(|a| vars.binary_search(a).unwrap()).collect();
        let mut bits = Vec::with_capacity(k.pow(vars.len() as u32));
        let mut tuple = vec![0; args.len()];
        for_each_assignment(vars.len(), k, |d| {
            for (slot, &p) in tuple.iter_mut().zip(&pos) {
                *slot = d[p];
            }
            bits.push(rel.bits()[rel.index_of(&tuple)]);
        });
        Table { vars, bits }
    }

    fn eq(i: usize, j: usize, k: usize) -> Table {
        if i == j {
            return Table::constant(true);
        }
        let mut bits = Vec::with_capacity(k * k);
        for_each_assignment(2, k, |d| bits.push(d[0] == d[1]));
        Table {
            vars: vec![i.min(j), i.max(j)],
            bits,
        }
    }

    /// Reads the table over a superset of its variables.
    fn lift(&self, vars: &[usize], k: usize) -> Table {
        if vars == self.vars.as_slice() {
            return self.clone();
        }
        let pos: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("lift to a superset"))
            .collect();
        let mut bits = Vec::with_capacity(k.pow(vars.len() as u32));
        for_each_assignment(vars.len(), k, |d| {
            let idx = pos.iter().fold(0, |acc, &p| acc * k + d[p]);
            bits.push(self.bits[idx]);
        });
        Table {
            vars: vars.to_vec(),
            bits,
        }
    }

    fn combine(&self, other: &Table, k: usize, op: impl Fn(bool, bool) -> bool) -> Table {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let a = self.lift(&vars, k);
        let b = other.lift(&vars, k);
        Table {
            vars,
            bits: a.bits.iter().zip(&b.bits).map(|(&x, &y)| op(x, y)).collect(),
        }
    }

    fn negate(&self) -> Table {
        Table {
            vars: self.vars.clone(),
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Quantifies out variable `v`: `exists` when `any`, `forall` otherwise.
    fn project(&self, v: usize, k: usize, any: bool) -> Table {
        let Ok(p) = self.vars.binary_search(&v) else {
            if k == 0 {
                return Table {
                    vars: self.vars.clone(),
                    bits: vec![!any; self.bits.len()],
                };
            }
            return self.clone();
        };
        let mut vars = self.vars.clone();
        vars.remove(p);
        let stride = k.pow((self.vars.len() - 1 - p) as u32);
        let mut bits = vec![!any; k.pow(vars.len() as u32)];
        for (idx, &b) in self.bits.iter().enumerate() {
            let lo = idx % stride;
            let hi = idx / (stride * k);
            let o = hi * stride + lo;
            if any {
                bits[o] |= b;
            } else {
                bits[o] &= b;
            }
        }
        Table { vars, bits }
    }

    fn is_false(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn into_tuple_set(self, ctx: usize, k: usize) -> TupleSet {
        let all: Vec<usize> = (0..ctx).collect();
        TupleSet::from_bits(ctx, k, self.lift(&all, k).bits)
    }
}

fn relation<'m>(m: &'m FiniteModel, name: &str, arity: usize) -> Result<&'m TupleSet> {
    match m.relation(name) {
        Some(t) if t.arity() == arity => Ok(t),
        Some(t) => Err(Error::LanguageMismatch(format!(
            "{name} has arity {} in the model, used with {arity}",
            t.arity()
        ))),
        None => Err(Error::LanguageMismatch(format!("unknown relation {name}"))),
    }
}

type Cache = HashMap<(usize, usize), (Node, Rc<Table>)>;

/// Formula evaluator on one model, with an optional cache keyed by shared
/// subtree identity.
pub struct Evaluator<'m> {
    model: &'m FiniteModel,
    cache: Option<Cache>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m FiniteModel) -> Evaluator<'m> {
        Evaluator { model, cache: None }
    }

    /// Caches every subtree result. Worth it when many formulas share
    /// subtrees through [`Node`] handles.
    pub fn with_cache(model: &'m FiniteModel) -> Evaluator<'m> {
        Evaluator {
            model,
            cache: Some(HashMap::new()),
        }
    }

    pub fn model(&self) -> &FiniteModel {
        self.model
    }

    pub fn eval(&mut self, f: &Formula) -> Result<TupleSet> {
        let t = self.node(f.node(), f.ctx())?;
        Ok((*t).clone().into_tuple_set(f.ctx(), self.model.size()))
    }

    fn node(&mut self, node: &Node, n: usize) -> Result<Rc<Table>> {
        if let Some(cache) = &self.cache {
            if let Some((_, t)) = cache.get(&(node.addr(), n)) {
                return Ok(t.clone());
            }
        }
        let k = self.model.size();
        let t = match node.kind() {
            NodeKind::Atom(r, args) => Table::atom(args, relation(self.model, r, args.len())?, k),
            NodeKind::Eq(i, j) => Table::eq(*i, *j, k),
            NodeKind::True => Table::constant(true),
            NodeKind::False => Table::constant(false),
            NodeKind::And(ps) => {
                let mut acc = Table::constant(true);
                for p in ps {
                    let t = self.node(p, n)?;
                    acc = acc.combine(&t, k, |a, b| a && b);
                }
                acc
            }
            NodeKind::Or(ps) => {
                let mut acc = Table::constant(false);
                for p in ps {
                    let t = self.node(p, n)?;
                    acc = acc.combine(&t, k, |a, b| a || b);
                }
                acc
            }
            NodeKind::Not(p) => self.node(p, n)?.negate(),
            NodeKind::Exists(p) => self.node(p, n + 1)?.project(n, k, true),
            NodeKind::Forall(p) => self.node(p, n + 1)?.project(n, k, false),
        };
        let t = Rc::new(t);
        if let Some(cache) = &mut self.cache {
            cache.insert((node.addr(), n), (node.clone(), t.clone()));
        }
        Ok(t)
    }
}

/// `φ^M`, the set of tuples satisfying `f` in `m`.
pub fn eval_formula(f: &Formula, m: &FiniteModel) -> Result<TupleSet> {
    Evaluator::new(m).eval(f)
}

/// Three-valued evaluation on a partial model given by the tables known to
/// be true (`lo`) and the tables not known to be false (`hi`). Returns the
/// tuples certainly satisfying `f` and those possibly satisfying it.
pub(crate) fn eval_interval(f: &Formula, lo: &FiniteModel, hi: &FiniteModel) -> Result<(TupleSet, TupleSet)> {
    let k = lo.size();
    let (a, b) = interval(f.node(), f.ctx(), lo, hi)?;
    Ok((a.into_tuple_set(f.ctx(), k), b.into_tuple_set(f.ctx(), k)))
}

fn interval(node: &Node, n: usize, lo: &FiniteModel, hi: &FiniteModel) -> Result<(Table, Table)> {
    let k = lo.size();
    Ok(match node.kind() {
        NodeKind::Atom(r, args) => (
            Table::atom(args, relation(lo, r, args.len())?, k),
            Table::atom(args, relation(hi, r, args.len())?, k),
        ),
        NodeKind::Eq(i, j) => {
            let t = Table::eq(*i, *j, k);
            (t.clone(), t)
        }
        NodeKind::True => (Table::constant(true), Table::constant(true)),
        NodeKind::False => (Table::constant(false), Table::constant(false)),
        NodeKind::And(ps) | NodeKind::Or(ps) => {
            let is_and = matches!(node.kind(), NodeKind::And(_));
            let op = move |a: bool, b: bool| if is_and { a && b } else { a || b };
            let mut acc = (Table::constant(is_and), Table::constant(is_and));
            for p in ps {
                let (a, b) = interval(p, n, lo, hi)?;
                acc = (acc.0.combine(&a, k, op), acc.1.combine(&b, k, op));
                if is_and && acc.1.is_false() {
                    break;
                }
            }
            acc
        }
        NodeKind::Not(p) => {
            let (a, b) = interval(p, n, lo, hi)?;
            (b.negate(), a.negate())
        }
        NodeKind::Exists(p) | NodeKind::Forall(p) => {
            let any = matches!(node.kind(), NodeKind::Exists(_));
            let (a, b) = interval(p, n + 1, lo, hi)?;
            (a.project(n, k, any), b.project(n, k, any))
        }
    })
}
