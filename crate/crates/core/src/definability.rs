//! Defining formulas for translates and invariant sets of `⟦Xⁿ⟧`.
//!
//! All constructions need a decidable theory: `x ≠ y` always expands to the
//! language's witness formula.

use std::collections::{BTreeSet, HashMap};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groupoid::{
    morphism_set, same_equality_type, vaught_transform, FiberedSort, GroupoidSlice, PointSet, VaughtKind,
};
use crate::pretopos::{formula_from_json, formula_to_json};
use crate::semantics::{Evaluator, FiniteModel};
use crate::syntax::{Formula, Language};

/// `|X| ≥ n`, a sentence.
pub fn size_at_least(n: usize, lang: &Language) -> Result<Formula> {
    let mut parts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            parts.push(lang.neq(i, j, n)?);
        }
    }
    Ok(Formula::conj(n, parts).exists_n(n))
}

/// `ā ∈ Xⁿ`, a sentence.
pub fn tuple_in_model(a: &[usize], lang: &Language) -> Result<Formula> {
    size_at_least(a.iter().map(|&e| e + 1).max().unwrap_or(0), lang)
}

/// `x̄ ≡ ā`, in `|ā|` variables.
pub fn equality_type(a: &[usize], lang: &Language) -> Result<Formula> {
    let n = a.len();
    let mut parts = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            parts.push(if a[i] == a[j] {
                Formula::eq(n, i, j)?
            } else {
                lang.neq(i, j, n)?
            });
        }
    }
    Ok(Formula::conj(n, parts))
}

/// `S_X·x̄ ∋ ā`, in `|ā|` variables.
pub fn orbit_contains(a: &[usize], lang: &Language) -> Result<Formula> {
    let n = a.len();
    Ok(Formula::conj(
        n,
        [tuple_in_model(a, lang)?.weaken(n), equality_type(a, lang)?],
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Abbreviation {
    SizeAtLeast(usize),
    TupleInModel(Vec<usize>),
    EqualityType(Vec<usize>),
    OrbitContains(Vec<usize>),
}

pub fn abbreviation_formula(kind: &Abbreviation, lang: &Language) -> Result<Formula> {
    match kind {
        Abbreviation::SizeAtLeast(n) => size_at_least(*n, lang),
        Abbreviation::TupleInModel(a) => tuple_in_model(a, lang),
        Abbreviation::EqualityType(a) => equality_type(a, lang),
        Abbreviation::OrbitContains(a) => orbit_contains(a, lang),
    }
}

/// `⟦Xⁿ⟧_d̄ ∩ π⁻¹⟦ψ(f̄)⟧`: the points `(M, d̄)` with `d̄, f̄` in `M` and
/// `ψ^M(f̄)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicOpen {
    pub d: Vec<usize>,
    pub psi: Formula,
    pub f: Vec<usize>,
}

impl BasicOpen {
    pub fn new(d: Vec<usize>, psi: Formula, f: Vec<usize>) -> Result<BasicOpen> {
        if psi.ctx() != f.len() {
            return Err(Error::ContextMismatch {
                expected: psi.ctx(),
                found: f.len(),
            });
        }
        Ok(BasicOpen { d, psi, f })
    }

    pub fn arity(&self) -> usize {
        self.d.len()
    }

    pub fn points(&self, fs: &FiberedSort, slice: &GroupoidSlice) -> Result<PointSet> {
        let mut out = PointSet::new();
        for (i, m) in slice.models().iter().enumerate() {
            let n = m.size();
            if self.d.iter().chain(&self.f).all(|&e| e < n) && Evaluator::new(m).eval(&self.psi)?.contains(&self.f) {
                let e = fs
                    .fiber(i)
                    .class_of(0, &self.d)
                    .ok_or_else(|| Error::InvalidSort("fibered sort is not a power of the home sort".into()))?;
                out.insert(fs.point(i, e));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({"kind": "open", "d": self.d, "psi": formula_to_json(&self.psi), "f": self.f})
    }
}

/// Borel subsets of `⟦Xⁿ⟧` built from basic opens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BorelDescriptor {
    Open(BasicOpen),
    Union(Vec<BorelDescriptor>),
    Complement(Box<BorelDescriptor>),
}

impl BorelDescriptor {
    pub fn complement(inner: BorelDescriptor) -> BorelDescriptor {
        BorelDescriptor::Complement(Box::new(inner))
    }

    /// The common `n` of all leaves, or `None` for a leafless descriptor.
    pub fn arity(&self) -> Result<Option<usize>> {
        match self {
            BorelDescriptor::Open(u) => Ok(Some(u.arity())),
            BorelDescriptor::Complement(c) => c.arity(),
            BorelDescriptor::Union(parts) => {
                let mut n = None;
                for p in parts {
                    match (n, p.arity()?) {
                        (Some(a), Some(b)) if a != b => {
                            return Err(Error::Invalid("descriptor leaves have different arities".into()))
                        }
                        (None, b) => n = b,
                        _ => {}
                    }
                }
                Ok(n)
            }
        }
    }

    pub fn points(&self, fs: &FiberedSort, slice: &GroupoidSlice) -> Result<PointSet> {
        Ok(match self {
            BorelDescriptor::Open(u) => u.points(fs, slice)?,
            BorelDescriptor::Union(parts) => {
                let mut out = PointSet::new();
                for p in parts {
                    out.extend(p.points(fs, slice)?);
                }
                out
            }
            BorelDescriptor::Complement(c) => {
                let inner = c.points(fs, slice)?;
                (0..fs.len()).filter(|p| !inner.contains(p)).collect()
            }
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            BorelDescriptor::Open(u) => u.to_json(),
            BorelDescriptor::Union(parts) => {
                json!({"kind": "union", "parts": parts.iter().map(BorelDescriptor::to_json).collect::<Vec<_>>()})
            }
            BorelDescriptor::Complement(c) => json!({"kind": "complement", "inner": c.to_json()}),
        }
    }

    pub fn from_json(v: &Value, lang: &Language) -> Result<BorelDescriptor> {
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or("");
        let tuple = |key: &str| -> Result<Vec<usize>> {
            serde_json::from_value(v.get(key).cloned().unwrap_or(Value::Null))
                .map_err(|_| Error::Invalid(format!("`{key}` must be an array of naturals")))
        };
        match kind {
            "open" => {
                let psi = formula_from_json(
                    v.get("psi").ok_or_else(|| Error::Invalid("open needs `psi`".into()))?,
                    lang,
                )?;
                Ok(BorelDescriptor::Open(BasicOpen::new(tuple("d")?, psi, tuple("f")?)?))
            }
            "union" => Ok(BorelDescriptor::Union(
                v.get("parts")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Invalid("union needs `parts`".into()))?
                    .iter()
                    .map(|p| BorelDescriptor::from_json(p, lang))
                    .collect::<Result<_>>()?,
            )),
            "complement" => Ok(BorelDescriptor::complement(BorelDescriptor::from_json(
                v.get("inner")
                    .ok_or_else(|| Error::Invalid("complement needs `inner`".into()))?,
                lang,
            )?)),
            other => Err(Error::Invalid(format!("unknown descriptor kind `{other}`"))),
        }
    }
}

/// The singleton `{(M, c̄)}` as a descriptor: the positive diagram of `M`
/// on `0..|M|` minus every way of having a false fact or a larger universe.
pub fn point_descriptor(m: &FiniteModel, c: &[usize], lang: &Language) -> Result<BorelDescriptor> {
    m.check_language(lang)?;
    let k = m.size();
    let f: Vec<usize> = (0..k).collect();
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for sym in lang.relations() {
        let table = m.relation(&sym.name).expect("language checked");
        for idx in 0..table.bits().len() {
            let t = table.tuple_at(idx);
            let atom = Formula::atom(k, sym.name.clone(), t)?;
            if table.bits()[idx] {
                positive.push(atom);
            } else {
                negative.push(BorelDescriptor::Open(BasicOpen::new(c.to_vec(), atom, f.clone())?));
            }
        }
    }
    negative.push(BorelDescriptor::Open(BasicOpen::new(
        c.to_vec(),
        Formula::truth(k + 1),
        (0..=k).collect(),
    )?));
    let p = BorelDescriptor::Open(BasicOpen::new(c.to_vec(), Formula::conj(k, positive), f)?);
    let mut parts = vec![BorelDescriptor::complement(p)];
    parts.extend(negative);
    Ok(BorelDescriptor::complement(BorelDescriptor::Union(parts)))
}

/// Builds defining formulas, sharing every subformula it has already built.
pub struct Synthesizer<'a> {
    lang: &'a Language,
    cap: usize,
    memo: HashMap<(BorelDescriptor, Vec<usize>), Formula>,
    orbit: HashMap<Vec<usize>, Formula>,
}

impl<'a> Synthesizer<'a> {
    /// `cap` bounds the entries of the tuples used in complements; the
    /// results are exact on slices whose models have at most `cap` elements.
    pub fn new(lang: &'a Language, cap: usize) -> Synthesizer<'a> {
        Synthesizer {
            lang,
            cap,
            memo: HashMap::new(),
            orbit: HashMap::new(),
        }
    }

    fn orbit_contains(&mut self, a: &[usize]) -> Result<Formula> {
        if let Some(f) = self.orbit.get(a) {
            return Ok(f.clone());
        }
        let f = orbit_contains(a, self.lang)?;
        self.orbit.insert(a.to_vec(), f.clone());
        Ok(f)
    }

    /// `φ(x̄, ȳ)` with `⟦ā↦b̄⟧⁻¹·U = ⟦φ(ā, −)⟧` for every `ā ≡ b̄`:
    /// `∃z̄ ((S_X·(x̄, ȳ, z̄) ∋ (b̄, d̄, f̄)) ∧ ψ(z̄))`.
    pub fn open_translate(&mut self, u: &BasicOpen, b: &[usize]) -> Result<Formula> {
        let key = (BorelDescriptor::Open(u.clone()), b.to_vec());
        if let Some(f) = self.memo.get(&key) {
            return Ok(f.clone());
        }
        let (k, n, l) = (b.len(), u.d.len(), u.f.len());
        let ctx = k + n + l;
        let all: Vec<usize> = b.iter().chain(&u.d).chain(&u.f).copied().collect();
        let shifted: Vec<usize> = (k + n..ctx).collect();
        let body = Formula::conj(ctx, [self.orbit_contains(&all)?, u.psi.substitute(&shifted, ctx)?]);
        let out = body.exists_n(l);
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    /// Extensions of `b̄` by distinct new entries below the cap, shortest first.
    fn extensions(&self, b: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![b.to_vec()];
        let mut frontier = vec![b.to_vec()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for d in &frontier {
                for e in 0..self.cap {
                    if !d.contains(&e) {
                        let mut d2 = d.clone();
                        d2.push(e);
                        next.push(d2);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// `φ(x̄, ȳ)` with `B^{△⟦ā↦b̄⟧} = ⟦φ(ā, −)⟧` for every `ā ≡ b̄`, exact on
    /// slices of models of size at most the cap. `n` is the arity of the
    /// points.
    pub fn borel_translate(&mut self, b_desc: &BorelDescriptor, b: &[usize], n: usize) -> Result<Formula> {
        if let Some(a) = b_desc.arity()? {
            if a != n {
                return Err(Error::Invalid(format!("descriptor has arity {a}, expected {n}")));
            }
        }
        let key = (b_desc.clone(), b.to_vec());
        if let Some(f) = self.memo.get(&key) {
            return Ok(f.clone());
        }
        let k = b.len();
        let out = match b_desc {
            BorelDescriptor::Open(u) => self.open_translate(u, b)?,
            BorelDescriptor::Union(parts) => {
                let fs = parts
                    .iter()
                    .map(|p| self.borel_translate(p, b, n))
                    .collect::<Result<Vec<_>>>()?;
                Formula::disj(k + n, fs)
            }
            BorelDescriptor::Complement(c) => {
                let mut parts = Vec::new();
                for d in self.extensions(b) {
                    let m = d.len();
                    let ctx = k + n + (m - k);
                    // x₀..x_{k-1} stay, y₀..y_{n-1} stay, x_k..x_{m-1} are new.
                    let x_map: Vec<usize> = (0..m).map(|i| if i < k { i } else { n + i }).collect();
                    let psi_map: Vec<usize> = x_map.iter().copied().chain(k..k + n).collect();
                    let psi = self.borel_translate(c, &d, n)?;
                    let body = Formula::conj(
                        ctx,
                        [
                            self.orbit_contains(&d)?.substitute(&x_map, ctx)?,
                            psi.substitute(&psi_map, ctx)?.negate(),
                        ],
                    );
                    parts.push(body.exists_n(m - k));
                }
                Formula::disj(k + n, parts)
            }
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

fn check_invariant(u: &PointSet, fs: &FiberedSort, slice: &GroupoidSlice) -> Result<()> {
    if let Some((g, p)) = fs.invariance_witness(slice, u) {
        let m = slice.morphism(g);
        let (model, tuple) = fs.tuple(p);
        return Err(Error::NotInvariant(format!(
            "the isomorphism {:?} from model {} to model {} moves point {tuple:?} of model {model} out of the set",
            m.permutation, m.source, m.target
        )));
    }
    Ok(())
}

/// A coherent `φ` with `⟦φ⟧ = ⋃ U`, for `⋃ U` invariant on the slice.
pub fn synthesize_invariant_open(
    opens: &[BasicOpen],
    n: usize,
    fs: &FiberedSort,
    slice: &GroupoidSlice,
    lang: &Language,
) -> Result<Formula> {
    let mut u = PointSet::new();
    for o in opens {
        if o.arity() != n {
            return Err(Error::Invalid("basic open of the wrong arity".into()));
        }
        u.extend(o.points(fs, slice)?);
    }
    check_invariant(&u, fs, slice)?;
    let mut s = Synthesizer::new(lang, 0);
    let parts = opens
        .iter()
        .map(|o| s.open_translate(o, &[]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula::disj(n, parts))
}

/// A formula `φ` with `⟦φ⟧ = B` on the slice, for `B` invariant there.
pub fn synthesize_invariant_borel(
    synth: &mut Synthesizer<'_>,
    b: &BorelDescriptor,
    n: usize,
    fs: &FiberedSort,
    slice: &GroupoidSlice,
) -> Result<Formula> {
    check_invariant(&b.points(fs, slice)?, fs, slice)?;
    synth.borel_translate(b, &[], n)
}

/// `⟦φ(ā, −)⟧` on a fibered power `⟦Xⁿ⟧`, one cached evaluator per model so
/// that shared subformulas are evaluated once.
pub fn evaluate_translates(
    formulas: &[Formula],
    a: &[usize],
    fs: &FiberedSort,
    slice: &GroupoidSlice,
) -> Result<Vec<PointSet>> {
    let mut out = vec![PointSet::new(); formulas.len()];
    for (i, m) in slice.models().iter().enumerate() {
        if a.iter().any(|&e| e >= m.size()) {
            continue;
        }
        let mut ev = Evaluator::with_cache(m);
        let fiber = fs.fiber(i);
        for (f, set) in formulas.iter().zip(out.iter_mut()) {
            if f.ctx() < a.len() {
                return Err(Error::ContextMismatch {
                    expected: a.len(),
                    found: f.ctx(),
                });
            }
            let table = ev.eval(f)?;
            for e in 0..fiber.size() {
                let (_, tuple) = fiber.representative(e);
                let full: Vec<usize> = a.iter().chain(tuple).copied().collect();
                if table.contains(&full) {
                    set.insert(fs.point(i, e));
                }
            }
        }
    }
    Ok(out)
}

/// Compares `⟦φ(ā, −)⟧` with `B^{△⟦ā↦b̄⟧}` for every `ā ≡ b̄` with entries
/// below the cap; returns the first `ā` where they differ.
pub fn check_borel_translate(
    phi: &Formula,
    b_desc: &BorelDescriptor,
    b: &[usize],
    cap: usize,
    fs: &FiberedSort,
    slice: &GroupoidSlice,
) -> Result<Option<Vec<usize>>> {
    let target = b_desc.points(fs, slice)?;
    for a in tuples_below(b.len(), cap) {
        if !same_equality_type(&a, b) {
            continue;
        }
        let w = morphism_set(&a, b, slice)?;
        let expected = vaught_transform(fs, slice, &target, &w, VaughtKind::Exists);
        let got = evaluate_translates(std::slice::from_ref(phi), &a, fs, slice)?.remove(0);
        if got != expected {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// All `k`-tuples with entries below `cap`, in lexicographic order.
pub fn tuples_below(k: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..cap).map(move |e| {
                    let mut t2 = t.clone();
                    t2.push(e);
                    t2
                })
            })
            .collect();
    }
    out
}

/// The union of the chosen orbits.
pub fn orbit_union_sets(orbits: &[Vec<usize>], choice: &BTreeSet<usize>) -> PointSet {
    choice.iter().flat_map(|&o| orbits[o].iter().copied()).collect()
}
