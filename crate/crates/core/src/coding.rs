//! Canonical codings of finite sets and maps, and interpretation of
//! imaginary sorts and definable functions in a single model.
//!
//! Conventions: the set of size `k` is `{0, …, k-1}`; products pair
//! lexicographically (`(i, j) ↦ i·k₂ + j`); quotients, images and unions
//! number their elements by least representative.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groupoid::Isomorphism;
use crate::pretopos::{DefinableFunction, ImaginarySort};
use crate::semantics::{Evaluator, FiniteModel};

/// `{0, …, size-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodedSet {
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodedMap {
    source_size: usize,
    target_size: usize,
    values: Vec<usize>,
}

impl CodedMap {
    pub fn new(source_size: usize, target_size: usize, values: Vec<usize>) -> Result<CodedMap> {
        if values.len() != source_size {
            return Err(Error::Coding(format!(
                "{} values for a source of size {source_size}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= target_size) {
            return Err(Error::Coding(format!("value {v} outside target of size {target_size}")));
        }
        Ok(CodedMap {
            source_size,
            target_size,
            values,
        })
    }

    pub fn identity(n: usize) -> CodedMap {
        CodedMap {
            source_size: n,
            target_size: n,
            values: (0..n).collect(),
        }
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &CodedMap) -> Result<CodedMap> {
        if self.target_size != other.source_size {
            return Err(Error::Coding("maps are not composable".into()));
        }
        Ok(CodedMap {
            source_size: self.source_size,
            target_size: other.target_size,
            values: self.values.iter().map(|&v| other.values[v]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target_size];
        self.values.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target_size];
        for &v in &self.values {
            seen[v] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijective(&self) -> bool {
        self.source_size == self.target_size && self.is_injective()
    }

    pub fn inverse(&self) -> Result<CodedMap> {
        if !self.is_bijective() {
            return Err(Error::Coding("map is not a bijection".into()));
        }
        let mut values = vec![0; self.source_size];
        for (i, &v) in self.values.iter().enumerate() {
            values[v] = i;
        }
        Ok(CodedMap {
            source_size: self.source_size,
            target_size: self.source_size,
            values,
        })
    }
}

/// Disjoint-set forest with path compression; the root of a class is
/// always its least element.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut y = x;
        while self.parent[y] != root {
            let next = self.parent[y];
            self.parent[y] = root;
            y = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Class index of every element, classes numbered by least member.
    pub fn classes(&mut self) -> (usize, Vec<usize>) {
        let n = self.parent.len();
        let mut number = vec![usize::MAX; n];
        let mut count = 0;
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let r = self.find(x);
            if number[r] == usize::MAX {
                number[r] = count;
                count += 1;
            }
            out.push(number[r]);
        }
        (count, out)
    }
}

fn check_map(m: &CodedMap, source: usize, target: usize, what: &str) -> Result<()> {
    if m.source_size != source || m.target_size != target {
        return Err(Error::Coding(format!("{what} has the wrong type")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Product {
    pub size: usize,
    pub p: CodedMap,
    pub q: CodedMap,
}

/// (a) `k₁ × k₂` under lexicographic pairing.
pub fn product(k1: usize, k2: usize) -> Product {
    let size = k1 * k2;
    Product {
        size,
        p: CodedMap::new(size, k1, (0..size).map(|i| i / k2).collect()).unwrap(),
        q: CodedMap::new(size, k2, (0..size).map(|i| i % k2).collect()).unwrap(),
    }
}

pub fn pair(i: usize, j: usize, k2: usize) -> usize {
    i * k2 + j
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subset {
    pub size: usize,
    /// Order-preserving inclusion.
    pub inclusion: CodedMap,
}

fn subset_of(n: usize, keep: impl Fn(usize) -> bool) -> Subset {
    let values: Vec<usize> = (0..n).filter(|&x| keep(x)).collect();
    Subset {
        size: values.len(),
        inclusion: CodedMap {
            source_size: values.len(),
            target_size: n,
            values,
        },
    }
}

/// (b) `{x : f(x) = g(x)}`.
pub fn equalizer(f: &CodedMap, g: &CodedMap) -> Result<Subset> {
    check_map(g, f.source_size, f.target_size, "second map")?;
    Ok(subset_of(f.source_size, |x| f.values[x] == g.values[x]))
}

/// (c) `{(a, b) : f(a) = g(b)}` in lexicographic order, with its projections.
pub fn pullback(f: &CodedMap, g: &CodedMap) -> Result<Product> {
    if f.target_size != g.target_size {
        return Err(Error::Coding("maps have different targets".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..f.source_size)
        .flat_map(|a| (0..g.source_size).map(move |b| (a, b)))
        .filter(|&(a, b)| f.values[a] == g.values[b])
        .collect();
    let size = pairs.len();
    Ok(Product {
        size,
        p: CodedMap::new(size, f.source_size, pairs.iter().map(|p| p.0).collect())?,
        q: CodedMap::new(size, g.source_size, pairs.iter().map(|p| p.1).collect())?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coproduct {
    pub size: usize,
    pub injections: Vec<CodedMap>,
}

/// (d) `k₀ ⊔ k₁ ⊔ …`, laid out consecutively.
pub fn disjoint_union(sizes: &[usize]) -> Coproduct {
    let size = sizes.iter().sum();
    let mut offset = 0;
    let injections = sizes
        .iter()
        .map(|&k| {
            let m = CodedMap::new(k, size, (offset..offset + k).collect()).unwrap();
            offset += k;
            m
        })
        .collect();
    Coproduct { size, injections }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quotient {
    pub size: usize,
    pub r: CodedMap,
}

/// (e) `k` modulo the equivalence relation generated by `pairs`.
pub fn quotient(k: usize, pairs: &[(usize, usize)]) -> Result<Quotient> {
    let mut uf = UnionFind::new(k);
    for &(a, b) in pairs {
        if a >= k || b >= k {
            return Err(Error::Coding(format!("pair ({a},{b}) outside a set of size {k}")));
        }
        uf.union(a, b);
    }
    let (size, values) = uf.classes();
    Ok(Quotient {
        size,
        r: CodedMap {
            source_size: k,
            target_size: size,
            values,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Image {
    pub size: usize,
    pub g: CodedMap,
    pub h: CodedMap,
}

/// (f) `f = h ∘ g` with `g` surjective, `h` injective; image elements are
/// numbered by least preimage.
pub fn image(f: &CodedMap) -> Image {
    let mut number: HashMap<usize, usize> = HashMap::new();
    let mut h = Vec::new();
    let g: Vec<usize> = f
        .values
        .iter()
        .map(|&v| {
            *number.entry(v).or_insert_with(|| {
                h.push(v);
                h.len() - 1
            })
        })
        .collect();
    let size = h.len();
    Image {
        size,
        g: CodedMap {
            source_size: f.source_size,
            target_size: size,
            values: g,
        },
        h: CodedMap {
            source_size: size,
            target_size: f.target_size,
            values: h,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Union {
    pub size: usize,
    pub inclusion: CodedMap,
    /// Factorization of each input through the union.
    pub factors: Vec<CodedMap>,
}

/// (g) The union of the images of injections into a common target, as an
/// order-preserving subset.
pub fn union_of_injections(maps: &[CodedMap]) -> Result<Union> {
    let n = maps
        .first()
        .map(|m| m.target_size)
        .ok_or_else(|| Error::Coding("union of no maps".into()))?;
    let mut hit = vec![false; n];
    for m in maps {
        if m.target_size != n {
            return Err(Error::Coding("injections have different targets".into()));
        }
        if !m.is_injective() {
            return Err(Error::Coding("union input is not injective".into()));
        }
        for &v in &m.values {
            hit[v] = true;
        }
    }
    let sub = subset_of(n, |x| hit[x]);
    let mut position = vec![0; n];
    for (i, &v) in sub.inclusion.values.iter().enumerate() {
        position[v] = i;
    }
    let factors = maps
        .iter()
        .map(|m| CodedMap {
            source_size: m.source_size,
            target_size: sub.size,
            values: m.values.iter().map(|&v| position[v]).collect(),
        })
        .collect();
    Ok(Union {
        size: sub.size,
        inclusion: sub.inclusion,
        factors,
    })
}

/// (h) The complement of the image of an injection.
pub fn complement(f: &CodedMap) -> Result<Subset> {
    if !f.is_injective() {
        return Err(Error::Coding("complement input is not injective".into()));
    }
    let mut hit = vec![false; f.target_size];
    for &v in &f.values {
        hit[v] = true;
    }
    Ok(subset_of(f.target_size, |x| !hit[x]))
}

/// One coding operation, as accepted from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum CodeRequest {
    Product { left: usize, right: usize },
    Equalizer { f: CodedMap, g: CodedMap },
    Pullback { f: CodedMap, g: CodedMap },
    DisjointUnion { sizes: Vec<usize> },
    Quotient { size: usize, pairs: Vec<(usize, usize)> },
    Image { f: CodedMap },
    Union { maps: Vec<CodedMap> },
    Complement { f: CodedMap },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeResponse {
    Product(Product),
    Subset(Subset),
    Coproduct(Coproduct),
    Quotient(Quotient),
    Image(Image),
    Union(Union),
}

pub fn code_operation(req: &CodeRequest) -> Result<CodeResponse> {
    Ok(match req {
        CodeRequest::Product { left, right } => CodeResponse::Product(product(*left, *right)),
        CodeRequest::Equalizer { f, g } => CodeResponse::Subset(equalizer(f, g)?),
        CodeRequest::Pullback { f, g } => CodeResponse::Product(pullback(f, g)?),
        CodeRequest::DisjointUnion { sizes } => CodeResponse::Coproduct(disjoint_union(sizes)),
        CodeRequest::Quotient { size, pairs } => CodeResponse::Quotient(quotient(*size, pairs)?),
        CodeRequest::Image { f } => CodeResponse::Image(image(f)),
        CodeRequest::Union { maps } => CodeResponse::Union(union_of_injections(maps)?),
        CodeRequest::Complement { f } => CodeResponse::Subset(complement(f)?),
    })
}

/// `A^M`: the ε-classes of `⨆ αᵢ^M`, numbered by least `(piece, tuple)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpretedSort {
    model: FiniteModel,
    carrier: CodedSet,
    /// Every element of `⨆ αᵢ^M` in lexicographic order.
    elements: Vec<(usize, Vec<usize>)>,
    index: HashMap<(usize, Vec<usize>), usize>,
    class: Vec<usize>,
    /// Least element of each class, as an index into `elements`.
    representatives: Vec<usize>,
}

impl InterpretedSort {
    pub fn model(&self) -> &FiniteModel {
        &self.model
    }

    pub fn carrier(&self) -> CodedSet {
        self.carrier
    }

    pub fn size(&self) -> usize {
        self.carrier.size
    }

    pub fn elements(&self) -> &[(usize, Vec<usize>)] {
        &self.elements
    }

    pub fn class_of(&self, piece: usize, tuple: &[usize]) -> Option<usize> {
        self.index.get(&(piece, tuple.to_vec())).map(|&e| self.class[e])
    }

    pub fn representative(&self, class: usize) -> (usize, &[usize]) {
        let (i, t) = &self.elements[self.representatives[class]];
        (*i, t)
    }

    /// All members of a class, in lexicographic order.
    pub fn members(&self, class: usize) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        self.elements
            .iter()
            .zip(&self.class)
            .filter(move |(_, &c)| c == class)
            .map(|((i, t), _)| (*i, t.as_slice()))
    }

    pub fn to_json(&self) -> Value {
        let classes: serde_json::Map<String, Value> = self
            .elements
            .iter()
            .zip(&self.class)
            .map(|((i, t), &c)| {
                let tuple: Vec<String> = t.iter().map(usize::to_string).collect();
                (format!("{i}:{}", tuple.join(",")), json!(c))
            })
            .collect();
        json!({"carrier": self.carrier.size, "classes": classes})
    }
}

pub fn interpret_sort_in_model(a: &ImaginarySort, m: &FiniteModel) -> Result<InterpretedSort> {
    let mut ev = Evaluator::new(m);
    let ar = a.arities();
    let mut elements = Vec::new();
    for (i, alpha) in a.pieces().iter().enumerate() {
        elements.extend(ev.eval(alpha)?.iter().map(|t| (i, t)));
    }
    let index: HashMap<(usize, Vec<usize>), usize> =
        elements.iter().cloned().enumerate().map(|(k, e)| (e, k)).collect();
    let mut uf = UnionFind::new(elements.len());
    let mut pairs = 0usize;
    for i in 0..ar.len() {
        for j in 0..ar.len() {
            for u in ev.eval(a.relation(i, j))?.iter() {
                let (x, y) = u.split_at(ar[i]);
                let (Some(&p), Some(&q)) = (index.get(&(i, x.to_vec())), index.get(&(j, y.to_vec()))) else {
                    return Err(Error::InvalidSort(format!(
                        "relation ({i},{j}) relates {u:?} outside the pieces"
                    )));
                };
                uf.union(p, q);
                pairs += 1;
            }
        }
    }
    let (size, class) = uf.classes();
    let mut counts = vec![0usize; size];
    let mut representatives = vec![usize::MAX; size];
    for (e, &c) in class.iter().enumerate() {
        counts[c] += 1;
        if representatives[c] == usize::MAX {
            representatives[c] = e;
        }
    }
    // ε is contained in its closure, so equal counts mean ε is the closure.
    if counts.iter().map(|c| c * c).sum::<usize>() != pairs {
        return Err(Error::InvalidSort(
            "relation matrix is not an equivalence relation in this model".into(),
        ));
    }
    Ok(InterpretedSort {
        model: m.clone(),
        carrier: CodedSet { size },
        elements,
        index,
        class,
        representatives,
    })
}

/// `f^M` between already interpreted source and target.
pub fn interpret_function_between(
    f: &DefinableFunction,
    source: &InterpretedSort,
    target: &InterpretedSort,
) -> Result<CodedMap> {
    let m = &source.model;
    let mut ev = Evaluator::new(m);
    let na = f.source().arities();
    let mut values = vec![usize::MAX; source.size()];
    for (i, row) in f.graph().iter().enumerate() {
        for (k, phi) in row.iter().enumerate() {
            for u in ev.eval(phi)?.iter() {
                let (x, y) = u.split_at(na[i]);
                let (Some(c), Some(d)) = (source.class_of(i, x), target.class_of(k, y)) else {
                    return Err(Error::InvalidFunction(format!(
                        "graph ({i},{k}) leaves the sorts at {u:?}"
                    )));
                };
                if values[c] != usize::MAX && values[c] != d {
                    return Err(Error::InvalidFunction(format!("graph is not single-valued at {x:?}")));
                }
                values[c] = d;
            }
        }
    }
    if let Some(c) = values.iter().position(|&v| v == usize::MAX) {
        let (i, x) = source.representative(c);
        return Err(Error::InvalidFunction(format!(
            "graph is not total at piece {i}, {x:?}"
        )));
    }
    CodedMap::new(source.size(), target.size(), values)
}

pub fn interpret_function_in_model(f: &DefinableFunction, m: &FiniteModel) -> Result<CodedMap> {
    let s = interpret_sort_in_model(f.source(), m)?;
    let t = interpret_sort_in_model(f.target(), m)?;
    interpret_function_between(f, &s, &t)
}

/// `A^g : A^M → A^N` for an isomorphism given by `perm`, computed on least
/// representatives.
pub fn transport_between(source: &InterpretedSort, target: &InterpretedSort, perm: &[usize]) -> Result<CodedMap> {
    if source.model.permute(perm) != target.model {
        return Err(Error::InvalidIsomorphism(
            "permutation does not carry source to target".into(),
        ));
    }
    let values = (0..source.size())
        .map(|c| {
            let (i, x) = source.representative(c);
            let y: Vec<usize> = x.iter().map(|&e| perm[e]).collect();
            target
                .class_of(i, &y)
                .ok_or_else(|| Error::InvalidSort("image of a representative is outside the sort".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let map = CodedMap::new(source.size(), target.size(), values)?;
    if !map.is_bijective() {
        return Err(Error::InvalidSort("transport is not a bijection".into()));
    }
    Ok(map)
}

pub fn transport_along_iso(a: &ImaginarySort, g: &Isomorphism) -> Result<CodedMap> {
    let s = interpret_sort_in_model(a, g.source())?;
    let t = interpret_sort_in_model(a, g.target())?;
    transport_between(&s, &t, g.permutation())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretopos::{home_sort, identity_function, product_sort, DefinableFunction, ImaginarySort};
    use crate::semantics::TupleSet;
    use crate::syntax::{default_names, parse_formula, parse_theory, Formula, Theory};

    fn theory() -> Theory {
        parse_theory(
            "language { E/2; } theory { axiom forall x. E(x,x) => false; axiom forall x y. E(x,y) => E(y,x); }",
        )
        .unwrap()
    }

    fn p(s: &str, n: usize) -> Formula {
        parse_formula(s, theory().language(), &default_names(n)).unwrap()
    }

    fn graph(size: usize, edges: &[(usize, usize)]) -> FiniteModel {
        let mut t = TupleSet::empty(2, size);
        for &(a, b) in edges {
            t.insert(&[a, b]);
            t.insert(&[b, a]);
        }
        FiniteModel::empty(theory().language(), size).with_relation("E", t)
    }

    fn edge_sort() -> ImaginarySort {
        ImaginarySort::new(
            vec![p("E(x,y)", 2)],
            vec![vec![p("and(E(x,y), or(and(x = z, y = u), and(x = u, y = z)))", 4)]],
        )
        .unwrap()
    }

    #[test]
    fn coding_examples() {
        let q = quotient(3, &[(0, 1)]).unwrap();
        assert_eq!((q.size, q.r.values()), (2, &[0, 0, 1][..]));
        let pr = product(2, 3);
        assert_eq!(pr.size, 6);
        assert_eq!(pr.p.values(), &[0, 0, 0, 1, 1, 1]);
        assert_eq!(pr.q.values(), &[0, 1, 2, 0, 1, 2]);
        let f = CodedMap::new(3, 2, vec![1, 1, 0]).unwrap();
        let im = image(&f);
        assert_eq!(
            (im.size, im.g.values(), im.h.values()),
            (2, &[0, 0, 1][..], &[1, 0][..])
        );
        assert_eq!(im.g.then(&im.h).unwrap(), f);
    }

    #[test]
    fn remaining_operations() {
        let f = CodedMap::new(3, 2, vec![0, 1, 0]).unwrap();
        let g = CodedMap::new(3, 2, vec![0, 0, 0]).unwrap();
        assert_eq!(equalizer(&f, &g).unwrap().inclusion.values(), &[0, 2]);
        let pb = pullback(&f, &CodedMap::new(2, 2, vec![1, 0]).unwrap()).unwrap();
        assert_eq!(pb.p.values(), &[0, 1, 2]);
        assert_eq!(pb.q.values(), &[1, 0, 1]);
        let du = disjoint_union(&[2, 0, 1]);
        assert_eq!(du.size, 3);
        assert_eq!(du.injections[2].values(), &[2]);
        let a = CodedMap::new(1, 4, vec![3]).unwrap();
        let b = CodedMap::new(2, 4, vec![1, 3]).unwrap();
        let u = union_of_injections(&[a.clone(), b]).unwrap();
        assert_eq!(u.inclusion.values(), &[1, 3]);
        assert_eq!(u.factors[0].values(), &[1]);
        assert_eq!(complement(&a).unwrap().inclusion.values(), &[0, 1, 2]);
        assert!(complement(&g).is_err());
        let req: CodeRequest = serde_json::from_str(r#"{"op":"quotient","size":3,"pairs":[[0,1]]}"#).unwrap();
        assert_eq!(
            code_operation(&req).unwrap(),
            CodeResponse::Quotient(quotient(3, &[(0, 1)]).unwrap())
        );
    }

    #[test]
    fn interpreted_sort_examples() {
        let p2 = graph(3, &[(0, 1), (1, 2)]);
        let e = interpret_sort_in_model(&edge_sort(), &p2).unwrap();
        assert_eq!(e.size(), 2);
        assert_eq!(e.class_of(0, &[1, 0]), Some(0));
        assert_eq!(e.class_of(0, &[2, 1]), Some(1));
        let x = interpret_sort_in_model(&home_sort(), &p2).unwrap();
        assert_eq!(x.size(), 3);
        assert_eq!(x.class_of(0, &[2]), Some(2));
        assert_eq!(interpret_sort_in_model(&edge_sort(), &graph(0, &[])).unwrap().size(), 0);
        assert_eq!(e.to_json()["classes"]["0:1,2"], 1);
        let bad = ImaginarySort::new(vec![Formula::truth(1)], vec![vec![p("E(x,y)", 2)]]).unwrap();
        assert!(interpret_sort_in_model(&bad, &p2).is_err());
    }

    #[test]
    fn interpreted_functions() {
        let p2 = graph(3, &[(0, 1), (1, 2)]);
        let e = edge_sort();
        let id = interpret_function_in_model(&identity_function(&e), &p2).unwrap();
        assert_eq!(id, CodedMap::identity(2));
        let swap = DefinableFunction::new(e.clone(), e.clone(), vec![vec![p("and(E(x,y), x = u, y = z)", 4)]]).unwrap();
        assert_eq!(interpret_function_in_model(&swap, &p2).unwrap(), CodedMap::identity(2));
        let (prod, p1, _) = product_sort(&e, &home_sort());
        let pm = interpret_sort_in_model(&prod, &p2).unwrap();
        assert_eq!(pm.size(), 6);
        assert_eq!(
            interpret_function_in_model(&p1, &p2).unwrap().values(),
            &[0, 0, 0, 1, 1, 1]
        );
    }

    #[test]
    fn transport_examples() {
        let p2 = graph(3, &[(0, 1), (1, 2)]);
        let flip = Isomorphism::new(p2.clone(), p2.clone(), vec![2, 1, 0]).unwrap();
        assert_eq!(transport_along_iso(&edge_sort(), &flip).unwrap().values(), &[1, 0]);
        let k2 = graph(2, &[(0, 1)]);
        let swap = Isomorphism::new(k2.clone(), k2.clone(), vec![1, 0]).unwrap();
        assert_eq!(transport_along_iso(&home_sort(), &swap).unwrap().values(), &[1, 0]);
        let id = Isomorphism::new(p2.clone(), p2.clone(), vec![0, 1, 2]).unwrap();
        assert_eq!(transport_along_iso(&edge_sort(), &id).unwrap(), CodedMap::identity(2));
    }
}
