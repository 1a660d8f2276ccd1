//! Interpretations `F : (L, T) → (L′, T′)`: a sort `F(X)` over `L′` and a
//! relation `F(R)` on `F(X)ⁿ` for each `n`-ary `R ∈ L`.
//!
//! Pieces of `Aⁿ` are indexed by tuples of pieces of `A` in lexicographic
//! order, with variables laid out block by block.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::coding::{interpret_sort_in_model, transport_between, CodedMap, InterpretedSort};
use crate::error::{Error, Result};
use crate::groupoid::{enumerate_isomorphisms, Isomorphism};
use crate::pretopos::{
    formula_from_json, formula_to_json, product_sort, sort_from_formula, validate_relation_on, validate_sort_on,
    Calculus, DefinableRelation, ImaginarySort,
};
use crate::semantics::{enumerate_models, is_model, Evaluator, FiniteModel, TupleSet};
use crate::syntax::{atomic_formulas, Axiom, Formula, Node, NodeKind, Theory};

/// `Aⁿ`; `A⁰` is the one-point sort.
pub fn sort_power(a: &ImaginarySort, n: usize) -> ImaginarySort {
    match n {
        0 => sort_from_formula(&Formula::truth(0)),
        1 => a.clone(),
        _ => product_sort(&sort_power(a, n - 1), a).0,
    }
}

/// Index of a piece tuple among the pieces of `Aⁿ`.
pub fn power_index(pieces: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &p| acc * pieces + p)
}

/// The piece tuple at an index of `Aⁿ`.
pub fn power_tuple(pieces: usize, n: usize, mut index: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % pieces;
        index /= pieces;
    }
    out
}

fn offsets(arities: &[usize], tuple: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(tuple.len() + 1);
    let mut acc = 0;
    for &p in tuple {
        out.push(acc);
        acc += arities[p];
    }
    out.push(acc);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    source: Theory,
    target: Theory,
    home: ImaginarySort,
    relations: BTreeMap<String, DefinableRelation>,
}

impl Interpretation {
    /// `relations[R]` lists one formula per piece of `F(X)ⁿ`.
    pub fn new(
        source: Theory,
        target: Theory,
        home: ImaginarySort,
        relations: BTreeMap<String, Vec<Formula>>,
    ) -> Result<Interpretation> {
        home.check_language(target.language())?;
        let mut rels = BTreeMap::new();
        for sym in source.language().relations() {
            let pieces = relations
                .get(&sym.name)
                .ok_or_else(|| Error::InvalidInterpretation(format!("no image for relation {}", sym.name)))?;
            for f in pieces {
                target.language().check_formula(f)?;
            }
            let rel = DefinableRelation::new(sort_power(&home, sym.arity), pieces.clone())
                .map_err(|e| Error::InvalidInterpretation(format!("image of {}: {e}", sym.name)))?;
            rels.insert(sym.name.clone(), rel);
        }
        if let Some(extra) = relations.keys().find(|k| source.language().arity(k).is_none()) {
            return Err(Error::InvalidInterpretation(format!(
                "{extra} is not a relation of the source"
            )));
        }
        Ok(Interpretation {
            source,
            target,
            home,
            relations: rels,
        })
    }

    /// `F(X) = X`, `F(R) = R`.
    pub fn identity(theory: &Theory) -> Interpretation {
        let home = sort_from_formula(&Formula::truth(1));
        let relations = theory
            .language()
            .relations()
            .iter()
            .map(|s| {
                let atom = Formula::atom(s.arity, s.name.clone(), (0..s.arity).collect()).unwrap();
                (
                    s.name.clone(),
                    DefinableRelation::new(sort_power(&home, s.arity), vec![atom]).unwrap(),
                )
            })
            .collect();
        Interpretation {
            source: theory.clone(),
            target: theory.clone(),
            home,
            relations,
        }
    }

    pub fn source(&self) -> &Theory {
        &self.source
    }

    pub fn target(&self) -> &Theory {
        &self.target
    }

    pub fn home(&self) -> &ImaginarySort {
        &self.home
    }

    pub fn relation(&self, name: &str) -> Option<&DefinableRelation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, DefinableRelation> {
        &self.relations
    }

    pub fn to_json(&self) -> Value {
        json!({
            "home": self.home.to_json(),
            "relations": self.relations.iter().map(|(k, r)| {
                (k.clone(), Value::Array(r.pieces().iter().map(formula_to_json).collect()))
            }).collect::<serde_json::Map<String, Value>>(),
        })
    }

    pub fn from_json(v: &Value, source: Theory, target: Theory) -> Result<Interpretation> {
        let home = ImaginarySort::from_json(
            v.get("home")
                .ok_or_else(|| Error::Invalid("interpretation needs `home`".into()))?,
            target.language(),
        )?;
        let mut relations = BTreeMap::new();
        let rels = v
            .get("relations")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Invalid("interpretation needs `relations`".into()))?;
        for (name, pieces) in rels {
            let pieces = pieces
                .as_array()
                .ok_or_else(|| Error::Invalid(format!("image of {name} must be an array")))?
                .iter()
                .map(|f| formula_from_json(f, target.language()))
                .collect::<Result<Vec<_>>>()?;
            relations.insert(name.clone(), pieces);
        }
        Interpretation::new(source, target, home, relations)
    }

    fn gamma(&self, tuple: &[usize]) -> Formula {
        let ar = self.home.arities();
        let off = offsets(&ar, tuple);
        let ctx = off[tuple.len()];
        Formula::conj(
            ctx,
            tuple
                .iter()
                .enumerate()
                .map(|(t, &p)| self.home.pieces()[p].shift(off[t], ctx))
                .collect::<Vec<_>>(),
        )
    }

    fn translate_node(&self, node: &Node, tuple: &[usize], calculus: Calculus) -> Result<Formula> {
        let ar = self.home.arities();
        let np = ar.len();
        let off = offsets(&ar, tuple);
        let ctx = off[tuple.len()];
        let boolean = || {
            if calculus == Calculus::Boolean {
                Ok(())
            } else {
                Err(Error::BooleanModeRequired(
                    "translating a formula that is not coherent".into(),
                ))
            }
        };
        Ok(match node.kind() {
            NodeKind::True => self.gamma(tuple),
            NodeKind::False => Formula::falsity(ctx),
            NodeKind::Atom(name, args) => {
                let rel = self
                    .relations
                    .get(name)
                    .ok_or_else(|| Error::LanguageMismatch(format!("unknown relation {name}")))?;
                let sub: Vec<usize> = args.iter().map(|&j| tuple[j]).collect();
                let rho = &rel.pieces()[power_index(np, &sub)];
                let map: Vec<usize> = args
                    .iter()
                    .flat_map(|&j| (0..ar[tuple[j]]).map(|u| off[j] + u).collect::<Vec<_>>())
                    .collect();
                Formula::conj(ctx, [self.gamma(tuple), rho.substitute(&map, ctx)?])
            }
            NodeKind::Eq(j, k) => {
                let eps = self.home.relation(tuple[*j], tuple[*k]);
                let map: Vec<usize> = (0..ar[tuple[*j]])
                    .map(|u| off[*j] + u)
                    .chain((0..ar[tuple[*k]]).map(|u| off[*k] + u))
                    .collect();
                Formula::conj(ctx, [self.gamma(tuple), eps.substitute(&map, ctx)?])
            }
            NodeKind::And(parts) => Formula::conj(
                ctx,
                parts
                    .iter()
                    .map(|p| self.translate_node(p, tuple, calculus))
                    .collect::<Result<Vec<_>>>()?,
            ),
            NodeKind::Or(parts) => Formula::disj(
                ctx,
                parts
                    .iter()
                    .map(|p| self.translate_node(p, tuple, calculus))
                    .collect::<Result<Vec<_>>>()?,
            ),
            NodeKind::Exists(body) => {
                let mut ext = tuple.to_vec();
                ext.push(0);
                let mut parts = Vec::with_capacity(np);
                for k in 0..np {
                    *ext.last_mut().unwrap() = k;
                    parts.push(self.translate_node(body, &ext, calculus)?.exists_n(ar[k]));
                }
                Formula::disj(ctx, parts)
            }
            NodeKind::Not(sub) => {
                boolean()?;
                Formula::conj(
                    ctx,
                    [self.gamma(tuple), self.translate_node(sub, tuple, calculus)?.negate()],
                )
            }
            NodeKind::Forall(body) => {
                boolean()?;
                let rewritten = Node::not(Node::exists(Node::not(body.clone())));
                self.translate_node(&rewritten, tuple, calculus)?
            }
        })
    }
}

/// `F(φ)` as a relation on `F(X)ⁿ`, by induction on `φ`.
pub fn translate_formula_along(f: &Interpretation, phi: &Formula, calculus: Calculus) -> Result<DefinableRelation> {
    f.source.language().check_formula(phi)?;
    let n = phi.ctx();
    let np = f.home.len();
    let count = np.pow(n as u32);
    let pieces = (0..count)
        .map(|i| f.translate_node(phi.node(), &power_tuple(np, n, i), calculus))
        .collect::<Result<Vec<_>>>()?;
    DefinableRelation::new(sort_power(&f.home, n), pieces)
}

/// First failed check of an interpretation, with its witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpretationViolation {
    pub check: String,
    /// Index into the target models of the cap.
    pub model: usize,
    pub tuple: Vec<usize>,
}

/// Checks `F(X)` and every `F(R)`, then that every axiom of the source
/// translates to a valid inclusion in every target model up to `cap`.
pub fn validate_interpretation(f: &Interpretation, cap: usize) -> Result<Option<InterpretationViolation>> {
    let models = enumerate_models(&f.target, cap)?;
    validate_interpretation_on(f, &models)
}

pub fn validate_interpretation_on(
    f: &Interpretation,
    models: &[FiniteModel],
) -> Result<Option<InterpretationViolation>> {
    if let Some(v) = validate_sort_on(&f.home, models)? {
        return Ok(Some(InterpretationViolation {
            check: format!("image of the home sort: {}", v.clause),
            model: v.model,
            tuple: v.tuple,
        }));
    }
    for (name, rel) in &f.relations {
        if let Some(v) = validate_relation_on(rel, models)? {
            return Ok(Some(InterpretationViolation {
                check: format!("image of {name}: {}", v.clause),
                model: v.model,
                tuple: v.tuple,
            }));
        }
    }
    for (label, ax) in f.source.axioms().iter().enumerate().map(|(i, a)| (i, a.clone())) {
        let (lhs, rhs) = match &ax {
            Axiom::Coherent(c) => (c.lhs().clone(), c.rhs().clone()),
            Axiom::Sentence(s) => (Formula::truth(0), s.clone()),
        };
        let l = translate_formula_along(f, &lhs, Calculus::Boolean)?;
        let r = translate_formula_along(f, &rhs, Calculus::Boolean)?;
        for (mi, m) in models.iter().enumerate() {
            let mut ev = Evaluator::with_cache(m);
            for (a, b) in l.pieces().iter().zip(r.pieces()) {
                if let Some(t) = ev.eval(a)?.first_outside(&ev.eval(b)?) {
                    return Ok(Some(InterpretationViolation {
                        check: format!("axiom {label}: {}", crate::semantics::axiom_label(&ax)),
                        model: mi,
                        tuple: t,
                    }));
                }
            }
        }
    }
    Ok(None)
}

fn relation_table(
    rel: &DefinableRelation,
    arity: usize,
    carrier: &InterpretedSort,
    ar: &[usize],
    ev: &mut Evaluator<'_>,
) -> Result<TupleSet> {
    let np = ar.len();
    let mut table = TupleSet::empty(arity, carrier.size());
    for (idx, phi) in rel.pieces().iter().enumerate() {
        let tuple = power_tuple(np, arity, idx);
        let off = offsets(ar, &tuple);
        for u in ev.eval(phi)?.iter() {
            let classes = tuple
                .iter()
                .enumerate()
                .map(|(t, &p)| {
                    carrier
                        .class_of(p, &u[off[t]..off[t + 1]])
                        .ok_or_else(|| Error::InvalidInterpretation("relation image leaves the home sort".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            table.insert(&classes);
        }
    }
    Ok(table)
}

/// `F*(M′)` on the carrier of `F(X)^{M′}`, together with that carrier.
pub fn apply_with_carrier(f: &Interpretation, m: &FiniteModel) -> Result<(FiniteModel, InterpretedSort)> {
    if !is_model(m, &f.target)? {
        return Err(Error::NotAModel("the model does not satisfy the target theory".into()));
    }
    let carrier = interpret_sort_in_model(&f.home, m)?;
    let ar = f.home.arities();
    let mut ev = Evaluator::with_cache(m);
    let mut out = FiniteModel::empty(f.source.language(), carrier.size());
    for sym in f.source.language().relations() {
        let table = relation_table(&f.relations[&sym.name], sym.arity, &carrier, &ar, &mut ev)?;
        out = out.with_relation(sym.name.clone(), table);
    }
    Ok((out, carrier))
}

pub fn apply_to_model(f: &Interpretation, m: &FiniteModel) -> Result<FiniteModel> {
    Ok(apply_with_carrier(f, m)?.0)
}

/// `F*(g)`, given by transporting `F(X)` along `g`.
pub fn apply_to_iso(f: &Interpretation, g: &Isomorphism) -> Result<Isomorphism> {
    let (n1, c1) = apply_with_carrier(f, g.source())?;
    let (n2, c2) = apply_with_carrier(f, g.target())?;
    let perm = transport_between(&c1, &c2, g.permutation())?;
    Isomorphism::new(n1, n2, perm.values().to_vec())
}

/// `G ∘ F` for `F : (L, T) → (L′, T′)` and `G : (L′, T′) → (L″, T″)`.
/// Pieces of `(G∘F)(X)` are pairs `(i, ī)` with `i` a piece of `F(X)` and
/// `ī` a piece of `G(X)^{nᵢ}`, ordered lexicographically.
pub fn compose_interpretations(g: &Interpretation, f: &Interpretation) -> Result<Interpretation> {
    if g.source != f.target {
        return Err(Error::InvalidInterpretation("middle theories differ".into()));
    }
    let a = &f.home;
    let na = a.arities();
    let alpha: Vec<DefinableRelation> = a
        .pieces()
        .iter()
        .map(|p| translate_formula_along(g, p, Calculus::Boolean))
        .collect::<Result<_>>()?;
    let index: Vec<(usize, usize)> = alpha
        .iter()
        .enumerate()
        .flat_map(|(i, r)| (0..r.pieces().len()).map(move |k| (i, k)))
        .collect();
    let pieces: Vec<Formula> = index.iter().map(|&(i, k)| alpha[i].pieces()[k].clone()).collect();
    let gp = g.home.len();
    let mut eps_cache: BTreeMap<(usize, usize), DefinableRelation> = BTreeMap::new();
    let mut relations = Vec::with_capacity(index.len());
    for &(i, k) in &index {
        let mut row = Vec::with_capacity(index.len());
        for &(j, l) in &index {
            if let std::collections::btree_map::Entry::Vacant(e) = eps_cache.entry((i, j)) {
                e.insert(translate_formula_along(g, a.relation(i, j), Calculus::Boolean)?);
            }
            let ki = power_tuple(gp, na[i], k);
            let lj = power_tuple(gp, na[j], l);
            let joined: Vec<usize> = ki.into_iter().chain(lj).collect();
            row.push(eps_cache[&(i, j)].pieces()[power_index(gp, &joined)].clone());
        }
        relations.push(row);
    }
    let home = ImaginarySort::new(pieces, relations)?;
    let hp = index.len();
    let mut rels = BTreeMap::new();
    for sym in f.source.language().relations() {
        let rho = &f.relations[&sym.name];
        let translated: Vec<DefinableRelation> = rho
            .pieces()
            .iter()
            .map(|p| translate_formula_along(g, p, Calculus::Boolean))
            .collect::<Result<_>>()?;
        let count = hp.pow(sym.arity as u32);
        let mut out = Vec::with_capacity(count);
        for idx in 0..count {
            let tuple = power_tuple(hp, sym.arity, idx);
            let outer: Vec<usize> = tuple.iter().map(|&t| index[t].0).collect();
            let inner: Vec<usize> = tuple
                .iter()
                .flat_map(|&t| {
                    let (i, k) = index[t];
                    power_tuple(gp, na[i], k)
                })
                .collect();
            out.push(translated[power_index(a.len(), &outer)].pieces()[power_index(gp, &inner)].clone());
        }
        rels.insert(sym.name.clone(), out);
    }
    Interpretation::new(f.source.clone(), g.target.clone(), home, rels)
}

/// `ζ : F*(G*(M″)) ≅ (G∘F)*(M″)`, sending the class of `(i, c₁…cₙ)` to the
/// class of `((i, p₁…pₙ), ȳ₁…ȳₙ)` where `(pₜ, ȳₜ)` represents `cₜ`.
pub fn zeta_component(
    g: &Interpretation,
    f: &Interpretation,
    gf: &Interpretation,
    m: &FiniteModel,
) -> Result<Isomorphism> {
    let (k, kc) = apply_with_carrier(g, m)?;
    let (n1, c1) = apply_with_carrier(f, &k)?;
    let (n2, c2) = apply_with_carrier(gf, m)?;
    let gp = g.home.len();
    let na = f.home.arities();
    let mut offset = Vec::with_capacity(na.len());
    let mut acc = 0;
    for &n in &na {
        offset.push(acc);
        acc += gp.pow(n as u32);
    }
    let values = (0..c1.size())
        .map(|c| {
            let (i, xs) = c1.representative(c);
            let mut ps = Vec::with_capacity(xs.len());
            let mut ys = Vec::new();
            for &x in xs {
                let (p, y) = kc.representative(x);
                ps.push(p);
                ys.extend_from_slice(y);
            }
            c2.class_of(offset[i] + power_index(gp, &ps), &ys)
                .ok_or_else(|| Error::InvalidInterpretation("comparison map leaves the composite sort".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let map = CodedMap::new(c1.size(), c2.size(), values)?;
    Isomorphism::new(n1, n2, map.values().to_vec())
}

/// The ζ-component at every target model, checked natural along every
/// isomorphism between them.
pub fn zeta_components(
    g: &Interpretation,
    f: &Interpretation,
    gf: &Interpretation,
    models: &[FiniteModel],
) -> Result<Vec<Isomorphism>> {
    let zs = models
        .iter()
        .map(|m| zeta_component(g, f, gf, m))
        .collect::<Result<Vec<_>>>()?;
    for (a, ma) in models.iter().enumerate() {
        for (b, mb) in models.iter().enumerate() {
            for h in enumerate_isomorphisms(ma, mb) {
                let left = apply_to_iso(gf, &h)?.after(&zs[a])?;
                let right = zs[b].after(&apply_to_iso(f, &apply_to_iso(g, &h)?)?)?;
                if left != right {
                    return Err(Error::InvalidInterpretation(format!(
                        "comparison maps are not natural along {:?} from model {a} to model {b}",
                        h.permutation()
                    )));
                }
            }
        }
    }
    Ok(zs)
}

/// `A` as a quotient of a subsort of `⨆ₙ Xⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceEmbedding {
    /// Strictly increasing padded arities.
    pub arities: Vec<usize>,
    /// `D/E`, pieces `Dᵢ` over `X^{nᵢ′}`.
    pub sort: ImaginarySort,
}

/// Pads piece `i` from `nᵢ` to `nᵢ′ = max(nᵢ, nᵢ₋₁′ + 1)` variables by
/// repeating its last coordinate.
pub fn sequence_sort_embedding(a: &ImaginarySort) -> Result<SequenceEmbedding> {
    let ar = a.arities();
    let mut padded: Vec<usize> = Vec::with_capacity(ar.len());
    for (i, &n) in ar.iter().enumerate() {
        let target = match padded.last() {
            Some(&prev) => n.max(prev + 1),
            None => n,
        };
        if target > n && n == 0 {
            return Err(Error::InvalidSort(format!(
                "piece {i} has no variables and cannot be padded diagonally"
            )));
        }
        padded.push(target);
    }
    let pad = |i: usize| -> Formula {
        let (n, m) = (ar[i], padded[i]);
        Formula::conj(
            m,
            std::iter::once(a.pieces()[i].weaken(m))
                .chain((n..m).map(|t| Formula::eq(m, t, n - 1).unwrap()))
                .collect::<Vec<_>>(),
        )
    };
    let pieces: Vec<Formula> = (0..ar.len()).map(pad).collect();
    let relations = (0..ar.len())
        .map(|i| {
            (0..ar.len())
                .map(|j| {
                    let ctx = padded[i] + padded[j];
                    let map: Vec<usize> = (0..ar[i]).chain((0..ar[j]).map(|t| padded[i] + t)).collect();
                    Ok(Formula::conj(
                        ctx,
                        [
                            a.relation(i, j).substitute(&map, ctx)?,
                            pieces[i].weaken(ctx),
                            pieces[j].shift(padded[i], ctx),
                        ],
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceEmbedding {
        arities: padded,
        sort: ImaginarySort::new(pieces, relations)?,
    })
}

/// The bijection `A^M ≅ (D/E)^M`, checked bijective.
pub fn sequence_bijection(a: &ImaginarySort, emb: &SequenceEmbedding, m: &FiniteModel) -> Result<CodedMap> {
    let src = interpret_sort_in_model(a, m)?;
    let dst = interpret_sort_in_model(&emb.sort, m)?;
    let values = (0..src.size())
        .map(|c| {
            let (i, x) = src.representative(c);
            let mut y = x.to_vec();
            while y.len() < emb.arities[i] {
                y.push(*x.last().expect("padding needs a coordinate"));
            }
            dst.class_of(i, &y)
                .ok_or_else(|| Error::InvalidSort("padded tuple is outside the subsort".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let map = CodedMap::new(src.size(), dst.size(), values)?;
    if !map.is_bijective() {
        return Err(Error::InvalidSort("padding is not a bijection".into()));
    }
    Ok(map)
}

/// Builds an interpretation from a subsort `D` of `⨆ₙ Xⁿ` (one formula per
/// piece), an equivalence `E` on it, and relation images on `(D/E)ⁿ`.
pub fn from_hmm_data(
    source: &Theory,
    target: &Theory,
    domain: Vec<Formula>,
    equivalence: Vec<Vec<Formula>>,
    relation_images: BTreeMap<String, Vec<Formula>>,
    cap: usize,
) -> Result<Interpretation> {
    let home = ImaginarySort::new(domain, equivalence)?;
    let models = enumerate_models(target, cap)?;
    if let Some(v) = validate_sort_on(&home, &models)? {
        return Err(Error::InvalidInterpretation(format!("equivalence on the domain: {v}")));
    }
    let f = Interpretation::new(source.clone(), target.clone(), home, relation_images)?;
    for (name, rel) in &f.relations {
        if let Some(v) = validate_relation_on(rel, &models)? {
            return Err(Error::InvalidInterpretation(format!("image of {name}: {v}")));
        }
    }
    if let Some(v) = validate_interpretation_on(&f, &models)? {
        return Err(Error::InvalidInterpretation(format!(
            "{} fails in model {} at {:?}",
            v.check, v.model, v.tuple
        )));
    }
    Ok(f)
}

/// Outcome of the bounded search for an interpretation realizing a functor
/// given on objects.
#[derive(Clone, Debug)]
pub enum FalsifierOutcome {
    Found(Box<Interpretation>),
    Exhausted { candidates: usize },
}

/// Searches interpretations with `F(X) = Xᵏ` for `k ≤ max_power` and each
/// `F(R)` a literal, `⊤` or `⊥` over `L′`, for one with `F*(M′) ≅ table(M′)`
/// for every listed pair `(M′, table(M′))`.
pub fn search_interpretation(
    source: &Theory,
    target: &Theory,
    table: &[(FiniteModel, FiniteModel)],
    max_power: usize,
) -> Result<FalsifierOutcome> {
    let mut tried = 0usize;
    for k in 1..=max_power {
        let home = sort_from_formula(&Formula::truth(k));
        let choices: Vec<Vec<Formula>> = source
            .language()
            .relations()
            .iter()
            .map(|s| {
                let ctx = k * s.arity;
                let mut c = vec![Formula::truth(ctx), Formula::falsity(ctx)];
                for a in atomic_formulas(target.language(), ctx) {
                    if matches!(a.kind(), NodeKind::True) {
                        continue;
                    }
                    c.push(a.negate());
                    c.push(a);
                }
                c
            })
            .collect();
        let mut pick = vec![0usize; choices.len()];
        loop {
            tried += 1;
            let rels: BTreeMap<String, Vec<Formula>> = source
                .language()
                .relations()
                .iter()
                .zip(&pick)
                .zip(&choices)
                .map(|((s, &p), c)| (s.name.clone(), vec![c[p].clone()]))
                .collect();
            let f = Interpretation::new(source.clone(), target.clone(), home.clone(), rels)?;
            let mut ok = true;
            for (m, want) in table {
                let got = apply_to_model(&f, m)?;
                if enumerate_isomorphisms(&got, want).is_empty() {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(FalsifierOutcome::Found(Box::new(f)));
            }
            let mut t = 0;
            loop {
                if t == pick.len() {
                    break;
                }
                pick[t] += 1;
                if pick[t] < choices[t].len() {
                    break;
                }
                pick[t] = 0;
                t += 1;
            }
            if t == pick.len() {
                break;
            }
        }
    }
    Ok(FalsifierOutcome::Exhausted { candidates: tried })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretopos::home_sort;
    use crate::semantics::satisfies_theory;
    use crate::syntax::{default_names, parse_formula, parse_theory};

    const GRAPH: &str =
        "language { E/2; } theory { axiom forall x. E(x,x) => false; axiom forall x y. E(x,y) => E(y,x); }";
    const ORDER: &str = "language { L/2; } decidable via or(L(x,y), L(y,x)); theory { axiom forall x. L(x,x) => false; axiom forall x y z. and(L(x,y), L(y,z)) => L(x,z); axiom forall x y. true => or(L(x,y), x = y, L(y,x)); }";

    fn complete_graph(image: &str) -> Interpretation {
        let g = parse_theory(GRAPH).unwrap();
        let o = parse_theory(ORDER).unwrap();
        let e = parse_formula(image, o.language(), &default_names(2)).unwrap();
        Interpretation::new(g, o, home_sort(), [("E".to_string(), vec![e])].into()).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(
            validate_interpretation(&complete_graph("or(L(x,y), L(y,x))"), 4).unwrap(),
            None
        );
        let bad = validate_interpretation(&complete_graph("L(x,y)"), 4).unwrap().unwrap();
        assert!(bad.check.starts_with("axiom 1"), "{}", bad.check);
        let id = Interpretation::identity(&parse_theory(GRAPH).unwrap());
        assert_eq!(validate_interpretation(&id, 3).unwrap(), None);
    }

    #[test]
    fn translation_and_application() {
        let f = complete_graph("or(L(x,y), L(y,x))");
        let o = f.target().clone();
        let three = enumerate_models(&o, 3)
            .unwrap()
            .into_iter()
            .rev()
            .find(|m| m.size() == 3)
            .unwrap();
        let e = parse_formula("E(x,y)", f.source().language(), &default_names(2)).unwrap();
        let r = translate_formula_along(&f, &e, Calculus::Coherent).unwrap();
        let table = Evaluator::new(&three).eval(&r.pieces()[0]).unwrap();
        assert_eq!(table.len(), 6);
        assert!(!table.contains(&[1, 1]));
        let k3 = apply_to_model(&f, &three).unwrap();
        assert_eq!(k3.relation("E").unwrap().len(), 6);
        assert!(satisfies_theory(&k3, f.source()).unwrap().all_hold());
        let empty = enumerate_models(&o, 0).unwrap().remove(0);
        assert_eq!(apply_to_model(&f, &empty).unwrap().size(), 0);
        let neg = parse_formula("not E(x,y)", f.source().language(), &default_names(2)).unwrap();
        assert!(translate_formula_along(&f, &neg, Calculus::Coherent).is_err());
    }

    #[test]
    fn iso_functoriality() {
        let g = parse_theory(GRAPH).unwrap();
        let id = Interpretation::identity(&g);
        let models = enumerate_models(&g, 3).unwrap();
        for m in &models {
            for h in enumerate_isomorphisms(m, m) {
                let t = apply_to_iso(&id, &h).unwrap();
                assert_eq!(t.permutation(), h.permutation());
            }
        }
    }

    fn line_graph() -> Interpretation {
        let g = parse_theory(GRAPH).unwrap();
        let p = |s: &str, n| parse_formula(s, g.language(), &default_names(n)).unwrap();
        let edges = ImaginarySort::new(
            vec![p("E(x,y)", 2)],
            vec![vec![p("and(E(x,y), or(and(x = z, y = u), and(x = u, y = z)))", 4)]],
        )
        .unwrap();
        let adj = p(
            "and(E(x,y), E(z,u), or(x = z, x = u, y = z, y = u), not or(and(x = z, y = u), and(x = u, y = z)))",
            4,
        );
        Interpretation::new(g.clone(), g, edges, [("E".to_string(), vec![adj])].into()).unwrap()
    }

    #[test]
    fn composition_and_zeta() {
        let lg = line_graph();
        assert_eq!(validate_interpretation(&lg, 3).unwrap(), None);
        let kg = complete_graph("or(L(x,y), L(y,x))");
        let gf = compose_interpretations(&kg, &lg).unwrap();
        let orders = enumerate_models(kg.target(), 3).unwrap();
        let zs = zeta_components(&kg, &lg, &gf, &orders).unwrap();
        assert_eq!(zs.len(), orders.len());
        let last = zs.last().unwrap();
        assert_eq!(last.source().size(), 3);
        let id = Interpretation::identity(kg.target());
        let fid = compose_interpretations(&id, &kg).unwrap();
        for z in zeta_components(&id, &kg, &fid, &orders).unwrap() {
            assert!(z.permutation().iter().enumerate().all(|(i, &p)| i == p));
        }
    }

    #[test]
    fn sequence_embedding() {
        let g = parse_theory(GRAPH).unwrap();
        let p = |s: &str, n| parse_formula(s, g.language(), &default_names(n)).unwrap();
        let x = sequence_sort_embedding(&home_sort()).unwrap();
        assert_eq!(x.arities, vec![1]);
        let two = ImaginarySort::new(
            vec![p("E(x,y)", 2), p("not E(x,y)", 2)],
            vec![
                vec![p("and(E(x,y), x = z, y = u)", 4), Formula::falsity(4)],
                vec![Formula::falsity(4), p("and(not E(x,y), x = z, y = u)", 4)],
            ],
        )
        .unwrap();
        let emb = sequence_sort_embedding(&two).unwrap();
        assert_eq!(emb.arities, vec![2, 3]);
        for m in enumerate_models(&g, 3).unwrap() {
            sequence_bijection(&two, &emb, &m).unwrap();
        }
        let none = ImaginarySort::new(vec![], vec![]).unwrap();
        assert!(sequence_sort_embedding(&none).unwrap().arities.is_empty());
    }

    #[test]
    fn hmm_and_search() {
        let g = parse_theory(GRAPH).unwrap();
        let o = parse_theory(ORDER).unwrap();
        let po = |s: &str, n| parse_formula(s, o.language(), &default_names(n)).unwrap();
        let f = from_hmm_data(
            &g,
            &o,
            vec![Formula::truth(1)],
            vec![vec![po("x = y", 2)]],
            [("E".to_string(), vec![po("or(L(x,y), L(y,x))", 2)])].into(),
            3,
        )
        .unwrap();
        let direct = complete_graph("or(L(x,y), L(y,x))");
        for m in enumerate_models(&o, 4).unwrap() {
            assert_eq!(apply_to_model(&f, &m).unwrap(), apply_to_model(&direct, &m).unwrap());
        }
        assert!(from_hmm_data(
            &g,
            &o,
            vec![Formula::truth(1)],
            vec![vec![po("x = y", 2)]],
            [("E".to_string(), vec![po("L(x,y)", 2)])].into(),
            3,
        )
        .is_err());
        let table: Vec<_> = enumerate_models(&o, 3)
            .unwrap()
            .iter()
            .map(|m| (m.clone(), apply_to_model(&direct, m).unwrap()))
            .collect();
        assert!(matches!(
            search_interpretation(&g, &o, &table, 1).unwrap(),
            FalsifierOutcome::Found(_)
        ));
        let impossible: Vec<_> = table
            .iter()
            .map(|(m, k)| (m.clone(), FiniteModel::empty(g.language(), k.size() + 1)))
            .collect();
        assert!(matches!(
            search_interpretation(&g, &o, &impossible, 1).unwrap(),
            FalsifierOutcome::Exhausted { .. }
        ));
    }
}
