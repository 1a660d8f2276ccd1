//! The groupoid of models up to a size cap, its action on interpreted
//! sorts, morphism sets `⟦ā↦b̄⟧` and Vaught transforms over finite fibers.
//!
//! A morphism `g : M → N` has source `∂₁ g = M` and target `∂₀ g = N`.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coding::{interpret_sort_in_model, transport_between, CodedMap, InterpretedSort, UnionFind};
use crate::error::{Error, Result};
use crate::pretopos::ImaginarySort;
use crate::semantics::{enumerate_models, Evaluator, FiniteModel};
use crate::syntax::{Formula, Theory};

/// Steps `perm` to the next permutation in lexicographic order.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `g : M ≅ N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Isomorphism {
    source: FiniteModel,
    target: FiniteModel,
    permutation: Vec<usize>,
}

impl Isomorphism {
    pub fn new(source: FiniteModel, target: FiniteModel, permutation: Vec<usize>) -> Result<Isomorphism> {
        let n = source.size();
        let mut seen = vec![false; n];
        if permutation.len() != n
            || permutation
                .iter()
                .any(|&e| e >= n || std::mem::replace(&mut seen[e], true))
        {
            return Err(Error::InvalidIsomorphism("not a permutation of the universe".into()));
        }
        if source.permute(&permutation) != target {
            return Err(Error::InvalidIsomorphism(
                "relations are not carried onto the target".into(),
            ));
        }
        Ok(Isomorphism {
            source,
            target,
            permutation,
        })
    }

    pub fn identity(m: &FiniteModel) -> Isomorphism {
        Isomorphism {
            source: m.clone(),
            target: m.clone(),
            permutation: (0..m.size()).collect(),
        }
    }

    pub fn source(&self) -> &FiniteModel {
        &self.source
    }

    pub fn target(&self) -> &FiniteModel {
        &self.target
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn apply(&self, e: usize) -> usize {
        self.permutation[e]
    }

    /// `self ∘ g`.
    pub fn after(&self, g: &Isomorphism) -> Result<Isomorphism> {
        if g.target != self.source {
            return Err(Error::InvalidIsomorphism("isomorphisms are not composable".into()));
        }
        Ok(Isomorphism {
            source: g.source.clone(),
            target: self.target.clone(),
            permutation: g.permutation.iter().map(|&e| self.permutation[e]).collect(),
        })
    }

    pub fn inverse(&self) -> Isomorphism {
        Isomorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            permutation: invert(&self.permutation),
        }
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// All isomorphisms `M ≅ N`, permutations in lexicographic order.
pub fn enumerate_isomorphisms(m: &FiniteModel, n: &FiniteModel) -> Vec<Isomorphism> {
    if m.size() != n.size() {
        return Vec::new();
    }
    let mut perm: Vec<usize> = (0..m.size()).collect();
    let mut out = Vec::new();
    loop {
        if &m.permute(&perm) == n {
            out.push(Isomorphism {
                source: m.clone(),
                target: n.clone(),
                permutation: perm.clone(),
            });
        }
        if !next_permutation(&mut perm) {
            return out;
        }
    }
}

/// A morphism of a slice, by model index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub source: usize,
    pub target: usize,
    pub permutation: Vec<usize>,
}

/// Morphism indices of a slice.
pub type MorphismSet = BTreeSet<usize>;
/// Global point indices of a fibered sort.
pub type PointSet = BTreeSet<usize>;

/// The full subgroupoid on a finite list of models.
#[derive(Clone, Debug)]
pub struct GroupoidSlice {
    models: Vec<FiniteModel>,
    morphisms: Vec<Morphism>,
    lookup: HashMap<(usize, Vec<usize>), usize>,
    unit: Vec<usize>,
    inverse: Vec<usize>,
    outgoing: Vec<Vec<usize>>,
}

impl GroupoidSlice {
    /// Builds all isomorphisms between `models`. The work is bounded by
    /// `Σ |M|!`, which must not exceed `budget`.
    pub fn from_models(models: Vec<FiniteModel>, budget: u64) -> Result<GroupoidSlice> {
        let needed: u128 = models.iter().map(|m| factorial(m.size())).sum();
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let index: HashMap<&FiniteModel, usize> = models.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let per_source: Vec<Vec<Morphism>> = models
            .par_iter()
            .enumerate()
            .map(|(s, m)| {
                let mut perm: Vec<usize> = (0..m.size()).collect();
                let mut out = Vec::new();
                loop {
                    if let Some(&t) = index.get(&m.permute(&perm)) {
                        out.push(Morphism {
                            source: s,
                            target: t,
                            permutation: perm.clone(),
                        });
                    }
                    if !next_permutation(&mut perm) {
                        return out;
                    }
                }
            })
            .collect();
        let morphisms: Vec<Morphism> = per_source.into_iter().flatten().collect();
        let lookup: HashMap<(usize, Vec<usize>), usize> = morphisms
            .iter()
            .enumerate()
            .map(|(k, g)| ((g.source, g.permutation.clone()), k))
            .collect();
        let mut outgoing = vec![Vec::new(); models.len()];
        for (k, g) in morphisms.iter().enumerate() {
            outgoing[g.source].push(k);
        }
        let unit = models
            .iter()
            .enumerate()
            .map(|(i, m)| lookup[&(i, (0..m.size()).collect::<Vec<_>>())])
            .collect();
        let inverse = morphisms
            .iter()
            .map(|g| lookup[&(g.target, invert(&g.permutation))])
            .collect();
        Ok(GroupoidSlice {
            models,
            morphisms,
            lookup,
            unit,
            inverse,
            outgoing,
        })
    }

    pub fn models(&self) -> &[FiniteModel] {
        &self.models
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn morphism(&self, k: usize) -> &Morphism {
        &self.morphisms[k]
    }

    pub fn find(&self, source: usize, permutation: &[usize]) -> Option<usize> {
        self.lookup.get(&(source, permutation.to_vec())).copied()
    }

    /// `ι`.
    pub fn unit(&self, model: usize) -> usize {
        self.unit[model]
    }

    /// `ν`.
    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    /// `μ(h, g) = h·g`, defined when `∂₁ h = ∂₀ g`.
    pub fn compose(&self, h: usize, g: usize) -> Option<usize> {
        let (hm, gm) = (&self.morphisms[h], &self.morphisms[g]);
        if hm.source != gm.target {
            return None;
        }
        let perm: Vec<usize> = gm.permutation.iter().map(|&e| hm.permutation[e]).collect();
        self.find(gm.source, &perm)
    }

    /// Morphisms with source `model`.
    pub fn outgoing(&self, model: usize) -> &[usize] {
        &self.outgoing[model]
    }

    pub fn all_morphisms(&self) -> MorphismSet {
        (0..self.morphisms.len()).collect()
    }

    pub fn isomorphism(&self, g: usize) -> Isomorphism {
        let m = &self.morphisms[g];
        Isomorphism {
            source: self.models[m.source].clone(),
            target: self.models[m.target].clone(),
            permutation: m.permutation.clone(),
        }
    }

    /// Automorphism count of each model.
    pub fn automorphism_counts(&self) -> Vec<usize> {
        (0..self.models.len())
            .map(|i| {
                self.outgoing[i]
                    .iter()
                    .filter(|&&g| self.morphisms[g].target == i)
                    .count()
            })
            .collect()
    }

    /// Connected components, each listed in increasing model order.
    pub fn model_orbits(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.models.len());
        for g in &self.morphisms {
            uf.union(g.source, g.target);
        }
        let (count, class) = uf.classes();
        let mut out = vec![Vec::new(); count];
        for (i, c) in class.into_iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Checks the groupoid axioms exhaustively; returns the first failure.
    pub fn verify_axioms(&self) -> std::result::Result<(), String> {
        for (i, &u) in self.unit.iter().enumerate() {
            let g = &self.morphisms[u];
            if g.source != i || g.target != i {
                return Err(format!("unit of model {i} has the wrong ends"));
            }
        }
        for (k, g) in self.morphisms.iter().enumerate() {
            if self.compose(k, self.unit[g.source]) != Some(k) || self.compose(self.unit[g.target], k) != Some(k) {
                return Err(format!("unit law fails at morphism {k}"));
            }
            let inv = self.inverse[k];
            if self.compose(inv, k) != Some(self.unit[g.source]) || self.compose(k, inv) != Some(self.unit[g.target]) {
                return Err(format!("inverse law fails at morphism {k}"));
            }
        }
        let mut incoming = vec![Vec::new(); self.models.len()];
        for (k, g) in self.morphisms.iter().enumerate() {
            incoming[g.target].push(k);
        }
        for (g, gm) in self.morphisms.iter().enumerate() {
            for &h in &self.outgoing[gm.target] {
                let Some(hg) = self.compose(h, g) else {
                    return Err(format!("composite of {h} and {g} is missing"));
                };
                let (hm, c) = (&self.morphisms[h], &self.morphisms[hg]);
                if c.source != gm.source || c.target != hm.target {
                    return Err(format!("composite of {h} and {g} has the wrong ends"));
                }
                for &k in &self.outgoing[hm.target] {
                    let left = self.compose(k, hg);
                    let right = self.compose(k, h).and_then(|kh| self.compose(kh, g));
                    if left.is_none() || left != right {
                        return Err(format!("associativity fails at ({k}, {h}, {g})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "objects": self.models.iter().map(FiniteModel::to_json).collect::<Vec<_>>(),
            "morphisms": self.morphisms.iter().map(|g| json!({
                "source": g.source,
                "target": g.target,
                "permutation": g.permutation,
            })).collect::<Vec<_>>(),
        })
    }
}

/// The slice of all models of `theory` of size at most `cap`.
pub fn build_groupoid_slice(theory: &Theory, cap: usize, budget: u64) -> Result<GroupoidSlice> {
    GroupoidSlice::from_models(enumerate_models(theory, cap)?, budget)
}

/// `⟦A⟧` over a slice: one interpreted sort per model and one transport
/// bijection per morphism. Points are numbered fiber by fiber.
#[derive(Clone, Debug)]
pub struct FiberedSort {
    sort: ImaginarySort,
    fibers: Vec<InterpretedSort>,
    offsets: Vec<usize>,
    action: Vec<CodedMap>,
}

pub fn build_fibered_sort(a: &ImaginarySort, slice: &GroupoidSlice) -> Result<FiberedSort> {
    let fibers: Vec<InterpretedSort> = slice
        .models
        .par_iter()
        .map(|m| interpret_sort_in_model(a, m))
        .collect::<Result<_>>()?;
    let action: Vec<CodedMap> = slice
        .morphisms
        .par_iter()
        .map(|g| transport_between(&fibers[g.source], &fibers[g.target], &g.permutation))
        .collect::<Result<_>>()?;
    let mut offsets = Vec::with_capacity(fibers.len() + 1);
    let mut total = 0;
    for f in &fibers {
        offsets.push(total);
        total += f.size();
    }
    offsets.push(total);
    Ok(FiberedSort {
        sort: a.clone(),
        fibers,
        offsets,
        action,
    })
}

impl FiberedSort {
    pub fn sort(&self) -> &ImaginarySort {
        &self.sort
    }

    pub fn fibers(&self) -> &[InterpretedSort] {
        &self.fibers
    }

    pub fn fiber(&self, model: usize) -> &InterpretedSort {
        &self.fibers[model]
    }

    pub fn action(&self, g: usize) -> &CodedMap {
        &self.action[g]
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, model: usize, element: usize) -> usize {
        self.offsets[model] + element
    }

    /// `π`, together with the element within the fiber.
    pub fn locate(&self, point: usize) -> (usize, usize) {
        let model = self.offsets.partition_point(|&o| o <= point) - 1;
        (model, point - self.offsets[model])
    }

    pub fn fiber_points(&self, model: usize) -> std::ops::Range<usize> {
        self.offsets[model]..self.offsets[model + 1]
    }

    pub fn all_points(&self) -> PointSet {
        (0..self.len()).collect()
    }

    /// `g·x`, for `x` in the fiber over `∂₁ g`.
    pub fn act(&self, slice: &GroupoidSlice, g: usize, point: usize) -> usize {
        let m = &slice.morphisms[g];
        let (model, e) = self.locate(point);
        debug_assert_eq!(model, m.source);
        self.point(m.target, self.action[g].apply(e))
    }

    /// Orbits of the action, numbered by least point.
    pub fn orbits(&self, slice: &GroupoidSlice) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.len());
        for (g, m) in slice.morphisms.iter().enumerate() {
            for e in 0..self.fibers[m.source].size() {
                uf.union(self.point(m.source, e), self.point(m.target, self.action[g].apply(e)));
            }
        }
        let (count, class) = uf.classes();
        let mut out = vec![Vec::new(); count];
        for (p, c) in class.into_iter().enumerate() {
            out[c].push(p);
        }
        out
    }

    /// For a power of the home sort, the tuple a point stands for.
    pub fn tuple(&self, point: usize) -> (usize, &[usize]) {
        let (model, e) = self.locate(point);
        (model, self.fibers[model].representative(e).1)
    }

    /// Whether `w⁻¹·u = u` for `w` the whole slice; returns a morphism and
    /// point moving `u` otherwise.
    pub fn invariance_witness(&self, slice: &GroupoidSlice, u: &PointSet) -> Option<(usize, usize)> {
        for &p in u {
            let (model, _) = self.locate(p);
            for &g in slice.outgoing(model) {
                if !u.contains(&self.act(slice, g, p)) {
                    return Some((g, p));
                }
            }
        }
        None
    }

    pub fn action_json(&self) -> Value {
        json!({
            "fibers": self.fibers.iter().map(InterpretedSort::size).collect::<Vec<_>>(),
            "actions": self.action.iter().map(|m| m.values().to_vec()).collect::<Vec<_>>(),
        })
    }
}

/// Whether `f_B(g·x) = g·f_A(x)` for every morphism `g`, where `maps[m]` is
/// the interpreted function on the fiber over model `m`.
pub fn is_equivariant(slice: &GroupoidSlice, a: &FiberedSort, b: &FiberedSort, maps: &[CodedMap]) -> bool {
    slice.morphisms.iter().enumerate().all(|(g, m)| {
        (0..a.fibers[m.source].size())
            .all(|e| maps[m.target].apply(a.action[g].apply(e)) == b.action[g].apply(maps[m.source].apply(e)))
    })
}

/// `ā ≡ b̄`: same length and `aᵢ = aⱼ ⟺ bᵢ = bⱼ`.
pub fn same_equality_type(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

/// `⟦ā↦b̄⟧`: morphisms whose source contains `ā` and which send `ā` to `b̄`.
pub fn morphism_set(a: &[usize], b: &[usize], slice: &GroupoidSlice) -> Result<MorphismSet> {
    if !same_equality_type(a, b) {
        return Err(Error::EqualityTypeMismatch(a.to_vec(), b.to_vec()));
    }
    Ok(slice
        .morphisms
        .iter()
        .enumerate()
        .filter(|(_, g)| {
            let n = g.permutation.len();
            a.iter().zip(b).all(|(&x, &y)| x < n && y < n && g.permutation[x] == y)
        })
        .map(|(k, _)| k)
        .collect())
}

/// `⟦φ(c̄)⟧`: models containing `c̄` where `φ(c̄)` holds.
pub fn models_satisfying(phi: &Formula, c: &[usize], slice: &GroupoidSlice) -> Result<BTreeSet<usize>> {
    if phi.ctx() != c.len() {
        return Err(Error::ContextMismatch {
            expected: phi.ctx(),
            found: c.len(),
        });
    }
    let mut out = BTreeSet::new();
    for (i, m) in slice.models.iter().enumerate() {
        if c.iter().all(|&e| e < m.size()) && Evaluator::new(m).eval(phi)?.contains(c) {
            out.insert(i);
        }
    }
    Ok(out)
}

/// `W ∩ ∂₁⁻¹(S)`.
pub fn restrict_source(w: &MorphismSet, models: &BTreeSet<usize>, slice: &GroupoidSlice) -> MorphismSet {
    w.iter()
        .copied()
        .filter(|&g| models.contains(&slice.morphisms[g].source))
        .collect()
}

/// `W ∩ ∂₀⁻¹(S)`.
pub fn restrict_target(w: &MorphismSet, models: &BTreeSet<usize>, slice: &GroupoidSlice) -> MorphismSet {
    w.iter()
        .copied()
        .filter(|&g| models.contains(&slice.morphisms[g].target))
        .collect()
}

/// `U·V = {g·h : g ∈ U, h ∈ V, ∂₁ g = ∂₀ h}`.
pub fn compose_sets(u: &MorphismSet, v: &MorphismSet, slice: &GroupoidSlice) -> MorphismSet {
    let mut out = MorphismSet::new();
    for &h in v {
        for &g in slice.outgoing(slice.morphisms[h].target) {
            if u.contains(&g) {
                out.insert(slice.compose(g, h).expect("composable morphisms"));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VaughtKind {
    /// `B^{△U}`: some `g` in the fiber of `U` sends `x` into `B`.
    Exists,
    /// `B^{*U}`: every `g` in the fiber of `U` sends `x` into `B`.
    All,
    /// `B^{⊛U}`: the fiber of `U` is nonempty and every `g` sends `x` into `B`.
    AllNonempty,
}

/// Vaught transform over finite fibers, where the category quantifiers are
/// plain quantifiers.
pub fn vaught_transform(
    fs: &FiberedSort,
    slice: &GroupoidSlice,
    b: &PointSet,
    u: &MorphismSet,
    kind: VaughtKind,
) -> PointSet {
    (0..fs.len())
        .filter(|&x| {
            let (model, _) = fs.locate(x);
            let mut any = false;
            let mut all = true;
            for &g in slice.outgoing(model) {
                if u.contains(&g) {
                    if b.contains(&fs.act(slice, g, x)) {
                        any = true;
                    } else {
                        all = false;
                    }
                }
            }
            match kind {
                VaughtKind::Exists => any,
                VaughtKind::All => all,
                VaughtKind::AllNonempty => all && slice.outgoing(model).iter().any(|g| u.contains(g)),
            }
        })
        .collect()
}

/// `W⁻¹·U = {x : ∃ g ∈ W, ∂₁ g = π x, g·x ∈ U}`.
pub fn translate_set(fs: &FiberedSort, slice: &GroupoidSlice, u: &PointSet, w: &MorphismSet) -> PointSet {
    vaught_transform(fs, slice, u, w, VaughtKind::Exists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretopos::{home_power, home_sort, ImaginarySort};
    use crate::semantics::TupleSet;
    use crate::syntax::{default_names, parse_formula, parse_theory};

    fn graphs() -> Theory {
        parse_theory(
            "language { E/2; } theory { axiom forall x. E(x,x) => false; axiom forall x y. E(x,y) => E(y,x); }",
        )
        .unwrap()
    }

    fn graph(size: usize, edges: &[(usize, usize)]) -> FiniteModel {
        let mut t = TupleSet::empty(2, size);
        for &(a, b) in edges {
            t.insert(&[a, b]);
            t.insert(&[b, a]);
        }
        FiniteModel::empty(graphs().language(), size).with_relation("E", t)
    }

    #[test]
    fn permutations_in_order() {
        let mut p = vec![0, 1, 2];
        let mut all = vec![p.clone()];
        while next_permutation(&mut p) {
            all.push(p.clone());
        }
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], vec![0, 2, 1]);
        assert_eq!(all[5], vec![2, 1, 0]);
    }

    #[test]
    fn automorphism_examples() {
        let k2 = graph(2, &[(0, 1)]);
        assert_eq!(enumerate_isomorphisms(&k2, &k2).len(), 2);
        let p2 = graph(3, &[(0, 1), (1, 2)]);
        let aut = enumerate_isomorphisms(&p2, &p2);
        assert_eq!(aut.len(), 2);
        assert_eq!(aut[1].permutation(), &[2, 1, 0]);
        assert!(enumerate_isomorphisms(&p2, &graph(3, &[(0, 1)])).is_empty());
        let g = &aut[1];
        assert_eq!(g.after(g).unwrap(), Isomorphism::identity(&p2));
        assert!(Isomorphism::new(p2.clone(), p2.clone(), vec![1, 0, 2]).is_err());
    }

    #[test]
    fn slice_counts_and_axioms() {
        let s = build_groupoid_slice(&graphs(), 2, 1000).unwrap();
        assert_eq!((s.models().len(), s.morphisms().len()), (4, 6));
        s.verify_axioms().unwrap();
        let s3 = build_groupoid_slice(&graphs(), 3, 1000).unwrap();
        s3.verify_axioms().unwrap();
        assert_eq!(s3.model_orbits().len(), 8);
        let empty = build_groupoid_slice(&Theory::empty(graphs().language().clone()), 0, 10).unwrap();
        assert_eq!((empty.models().len(), empty.morphisms().len()), (1, 1));
        assert!(matches!(
            build_groupoid_slice(&graphs(), 3, 5),
            Err(Error::BudgetExceeded { needed: 54, budget: 5 })
        ));
    }

    #[test]
    fn fibered_home_sort() {
        let s = build_groupoid_slice(&graphs(), 2, 1000).unwrap();
        let x = build_fibered_sort(&home_sort(), &s).unwrap();
        assert_eq!(x.len(), 5);
        assert_eq!(x.orbits(&s).len(), 3);
        let k2 = s.models().iter().position(|m| m == &graph(2, &[(0, 1)])).unwrap();
        let swap = s.find(k2, &[1, 0]).unwrap();
        assert_eq!(x.act(&s, swap, x.point(k2, 0)), x.point(k2, 1));
        let edges = ImaginarySort::new(
            vec![parse_formula("E(x,y)", graphs().language(), &default_names(2)).unwrap()],
            vec![vec![parse_formula(
                "and(E(x,y), or(and(x = z, y = u), and(x = u, y = z)))",
                graphs().language(),
                &default_names(4),
            )
            .unwrap()]],
        )
        .unwrap();
        let e = build_fibered_sort(&edges, &s).unwrap();
        assert_eq!(e.fiber(k2).size(), 1);
        assert_eq!(e.act(&s, swap, e.point(k2, 0)), e.point(k2, 0));
    }

    #[test]
    fn morphism_sets() {
        let s = build_groupoid_slice(&graphs(), 2, 1000).unwrap();
        assert_eq!(morphism_set(&[], &[], &s).unwrap(), s.all_morphisms());
        let k2 = s.models().iter().position(|m| m == &graph(2, &[(0, 1)])).unwrap();
        let w: MorphismSet = morphism_set(&[0], &[1], &s).unwrap();
        let on_k2 = restrict_source(&w, &[k2].into(), &s);
        assert_eq!(on_k2, [s.find(k2, &[1, 0]).unwrap()].into());
        assert!(matches!(
            morphism_set(&[0, 1], &[0, 0], &s),
            Err(Error::EqualityTypeMismatch(..))
        ));
    }

    #[test]
    fn vaught_examples() {
        let s = build_groupoid_slice(&graphs(), 2, 1000).unwrap();
        let x = build_fibered_sort(&home_sort(), &s).unwrap();
        let k2 = s.models().iter().position(|m| m == &graph(2, &[(0, 1)])).unwrap();
        let b: PointSet = [x.point(k2, 0)].into();
        let all = s.all_morphisms();
        let tri = vaught_transform(&x, &s, &b, &all, VaughtKind::Exists);
        assert_eq!(tri, x.fiber_points(k2).collect());
        let star = vaught_transform(&x, &s, &b, &all, VaughtKind::All);
        assert!(x.fiber_points(k2).all(|p| !star.contains(&p)));
        assert_eq!(translate_set(&x, &s, &b, &MorphismSet::new()), PointSet::new());
        let ids: MorphismSet = (0..s.models().len()).map(|m| s.unit(m)).collect();
        assert_eq!(translate_set(&x, &s, &b, &ids), b);
    }

    #[test]
    fn rigid_orders() {
        let t = parse_theory(
            "language { L/2; } theory { axiom forall x. L(x,x) => false; axiom forall x y z. and(L(x,y), L(y,z)) => L(x,z); axiom forall x y. true => or(L(x,y), x = y, L(y,x)); }",
        )
        .unwrap();
        let s = build_groupoid_slice(&t, 3, 1000).unwrap();
        assert!(s.automorphism_counts().iter().all(|&a| a == 1));
        let orbit3: Vec<_> = s
            .model_orbits()
            .into_iter()
            .filter(|o| s.models()[o[0]].size() == 3)
            .collect();
        assert_eq!(orbit3.len(), 1);
        assert_eq!(orbit3[0].len(), 6);
        let x2 = build_fibered_sort(&home_power(2), &s).unwrap();
        assert_eq!(x2.len(), 1 + 4 * 2 + 9 * 6);
    }
}
