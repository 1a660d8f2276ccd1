//! Imaginary sorts, definable relations and definable functions, with the
//! pretopos operations on them. Validity is checked semantically on every
//! model up to a cap.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::semantics::{enumerate_models, equivalent_on, Evaluator, FiniteModel, TupleSet};
use crate::syntax::{default_names, parse_formula, print_formula, Formula, Language, Node, Theory};

/// Which connectives the calculus admits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Calculus {
    /// Only coherent formulas; complements are unavailable.
    Coherent,
    /// Arbitrary formulas.
    Boolean,
}

/// `(⨆ᵢ αᵢ) / (⨆ᵢⱼ εᵢⱼ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ImaginarySort {
    pieces: Vec<Formula>,
    relations: Vec<Vec<Formula>>,
}

impl ImaginarySort {
    pub fn new(pieces: Vec<Formula>, relations: Vec<Vec<Formula>>) -> Result<ImaginarySort> {
        if relations.len() != pieces.len() {
            return Err(Error::InvalidSort(
                "relation matrix has the wrong number of rows".into(),
            ));
        }
        for (i, row) in relations.iter().enumerate() {
            if row.len() != pieces.len() {
                return Err(Error::InvalidSort(format!("row {i} has the wrong length")));
            }
            for (j, e) in row.iter().enumerate() {
                let want = pieces[i].ctx() + pieces[j].ctx();
                if e.ctx() != want {
                    return Err(Error::InvalidSort(format!(
                        "relation ({i},{j}) has context {} instead of {want}",
                        e.ctx()
                    )));
                }
            }
        }
        Ok(ImaginarySort { pieces, relations })
    }

    pub fn pieces(&self) -> &[Formula] {
        &self.pieces
    }

    pub fn relations(&self) -> &[Vec<Formula>] {
        &self.relations
    }

    pub fn relation(&self, i: usize, j: usize) -> &Formula {
        &self.relations[i][j]
    }

    pub fn arities(&self) -> Vec<usize> {
        self.pieces.iter().map(Formula::ctx).collect()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn is_coherent(&self) -> bool {
        self.pieces.iter().all(Formula::is_coherent) && self.relations.iter().flatten().all(Formula::is_coherent)
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.pieces.iter().chain(self.relations.iter().flatten())
    }

    pub fn check_language(&self, lang: &Language) -> Result<()> {
        self.formulas().try_for_each(|f| lang.check_formula(f))
    }
}

/// A single formula quotiented by equality: `ε(x̄, ȳ) = α(x̄) ∧ x̄ = ȳ`.
pub fn sort_from_formula(alpha: &Formula) -> ImaginarySort {
    let n = alpha.ctx();
    let eps = Formula::conj(
        2 * n,
        std::iter::once(alpha.weaken(2 * n)).chain((0..n).map(|t| Formula::trusted(2 * n, Node::eq(t, n + t)))),
    );
    ImaginarySort {
        pieces: vec![alpha.clone()],
        relations: vec![vec![eps]],
    }
}

/// The home sort `X`, given by `⊤` in one variable.
pub fn home_sort() -> ImaginarySort {
    sort_from_formula(&Formula::truth(1))
}

/// `Xⁿ`, given by `⊤` in `n` variables.
pub fn home_power(n: usize) -> ImaginarySort {
    sort_from_formula(&Formula::truth(n))
}

/// The sort with no pieces.
pub fn empty_sort() -> ImaginarySort {
    ImaginarySort {
        pieces: Vec::new(),
        relations: Vec::new(),
    }
}

/// A family `(βᵢ)` of formulas on the pieces of a sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DefinableRelation {
    sort: ImaginarySort,
    pieces: Vec<Formula>,
}

impl DefinableRelation {
    pub fn new(sort: ImaginarySort, pieces: Vec<Formula>) -> Result<DefinableRelation> {
        if pieces.len() != sort.len() {
            return Err(Error::InvalidSort("one formula per piece required".into()));
        }
        for (b, a) in pieces.iter().zip(sort.pieces()) {
            if b.ctx() != a.ctx() {
                return Err(Error::ContextMismatch {
                    expected: a.ctx(),
                    found: b.ctx(),
                });
            }
        }
        Ok(DefinableRelation { sort, pieces })
    }

    /// The whole sort.
    pub fn full(sort: &ImaginarySort) -> DefinableRelation {
        DefinableRelation {
            sort: sort.clone(),
            pieces: sort.pieces().to_vec(),
        }
    }

    pub fn sort(&self) -> &ImaginarySort {
        &self.sort
    }

    pub fn pieces(&self) -> &[Formula] {
        &self.pieces
    }

    /// The subsort `(⨆ βᵢ) / (βᵢ(x̄) ∧ βⱼ(x̄′) ∧ εᵢⱼ)`.
    pub fn as_sort(&self) -> ImaginarySort {
        let ar = self.sort.arities();
        let relations = (0..ar.len())
            .map(|i| {
                (0..ar.len())
                    .map(|j| {
                        let ctx = ar[i] + ar[j];
                        Formula::conj(
                            ctx,
                            [
                                self.pieces[i].weaken(ctx),
                                self.pieces[j].shift(ar[i], ctx),
                                self.sort.relation(i, j).clone(),
                            ],
                        )
                    })
                    .collect()
            })
            .collect();
        ImaginarySort {
            pieces: self.pieces.clone(),
            relations,
        }
    }

    fn same_sort(&self, other: &DefinableRelation) -> Result<()> {
        if self.sort != other.sort {
            return Err(Error::SortMismatch("relations live on different sorts".into()));
        }
        Ok(())
    }

    pub fn meet(&self, other: &DefinableRelation) -> Result<DefinableRelation> {
        self.same_sort(other)?;
        Ok(DefinableRelation {
            sort: self.sort.clone(),
            pieces: self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(a, b)| Formula::conj(a.ctx(), [a.clone(), b.clone()]))
                .collect(),
        })
    }

    pub fn join(&self, other: &DefinableRelation) -> Result<DefinableRelation> {
        self.same_sort(other)?;
        Ok(DefinableRelation {
            sort: self.sort.clone(),
            pieces: self
                .pieces
                .iter()
                .zip(&other.pieces)
                .map(|(a, b)| Formula::disj(a.ctx(), [a.clone(), b.clone()]))
                .collect(),
        })
    }

    /// `αᵢ ∧ ¬βᵢ`; only in the Boolean calculus.
    pub fn complement(&self, calculus: Calculus) -> Result<DefinableRelation> {
        if calculus != Calculus::Boolean {
            return Err(Error::BooleanModeRequired("complement of a relation".into()));
        }
        Ok(DefinableRelation {
            sort: self.sort.clone(),
            pieces: self
                .pieces
                .iter()
                .zip(self.sort.pieces())
                .map(|(b, a)| Formula::conj(a.ctx(), [a.clone(), b.negate()]))
                .collect(),
        })
    }
}

/// Subobject-lattice operations on formulas over `Xⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubobjectOp {
    Meet,
    Join,
    Complement,
    /// Image under the projection forgetting the last variable.
    ExistsImage,
}

pub fn subobject_op(op: SubobjectOp, operands: &[Formula], calculus: Calculus) -> Result<Formula> {
    let ctx = operands
        .first()
        .map(Formula::ctx)
        .ok_or_else(|| Error::Invalid("no operands".into()))?;
    if let Some(f) = operands.iter().find(|f| f.ctx() != ctx) {
        return Err(Error::ContextMismatch {
            expected: ctx,
            found: f.ctx(),
        });
    }
    let one = || {
        if operands.len() == 1 {
            Ok(&operands[0])
        } else {
            Err(Error::Invalid("exactly one operand expected".into()))
        }
    };
    Ok(match op {
        SubobjectOp::Meet => Formula::and(ctx, operands.iter().cloned()),
        SubobjectOp::Join => Formula::or(ctx, operands.iter().cloned()),
        SubobjectOp::Complement => {
            if calculus != Calculus::Boolean {
                return Err(Error::BooleanModeRequired("complement".into()));
            }
            one()?.negate()
        }
        SubobjectOp::ExistsImage => {
            let f = one()?;
            if ctx == 0 {
                return Err(Error::Invalid("nothing to project".into()));
            }
            f.exists()
        }
    })
}

/// `[(φᵢₖ)] : A → B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DefinableFunction {
    source: ImaginarySort,
    target: ImaginarySort,
    graph: Vec<Vec<Formula>>,
}

impl DefinableFunction {
    pub fn new(source: ImaginarySort, target: ImaginarySort, graph: Vec<Vec<Formula>>) -> Result<DefinableFunction> {
        if graph.len() != source.len() || graph.iter().any(|r| r.len() != target.len()) {
            return Err(Error::InvalidFunction("graph matrix has the wrong shape".into()));
        }
        for (i, row) in graph.iter().enumerate() {
            for (k, f) in row.iter().enumerate() {
                let want = source.pieces()[i].ctx() + target.pieces()[k].ctx();
                if f.ctx() != want {
                    return Err(Error::InvalidFunction(format!(
                        "graph ({i},{k}) has context {} instead of {want}",
                        f.ctx()
                    )));
                }
            }
        }
        Ok(DefinableFunction { source, target, graph })
    }

    pub fn source(&self) -> &ImaginarySort {
        &self.source
    }

    pub fn target(&self) -> &ImaginarySort {
        &self.target
    }

    pub fn graph(&self) -> &[Vec<Formula>] {
        &self.graph
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.graph.iter().flatten()
    }
}

/// `1_A = [(εᵢⱼ)]`.
pub fn identity_function(a: &ImaginarySort) -> DefinableFunction {
    DefinableFunction {
        source: a.clone(),
        target: a.clone(),
        graph: a.relations().to_vec(),
    }
}

/// `g ∘ f`, with `θᵢₘ(x̄, z̄) = ⋁ₖ ∃ȳ (φᵢₖ(x̄, ȳ) ∧ ψₖₘ(ȳ, z̄))`.
pub fn compose_functions(g: &DefinableFunction, f: &DefinableFunction) -> Result<DefinableFunction> {
    if f.target != g.source {
        return Err(Error::SortMismatch("target of f differs from source of g".into()));
    }
    let na = f.source.arities();
    let nb = f.target.arities();
    let nc = g.target.arities();
    let graph = (0..na.len())
        .map(|i| {
            (0..nc.len())
                .map(|m| {
                    let outer = na[i] + nc[m];
                    let parts = (0..nb.len()).map(|k| {
                        let inner = outer + nb[k];
                        let phi_map: Vec<usize> = (0..na[i]).chain((0..nb[k]).map(|s| outer + s)).collect();
                        let psi_map: Vec<usize> = (0..nb[k])
                            .map(|s| outer + s)
                            .chain((0..nc[m]).map(|t| na[i] + t))
                            .collect();
                        let body = Formula::conj(
                            inner,
                            [
                                f.graph[i][k].substitute(&phi_map, inner).unwrap(),
                                g.graph[k][m].substitute(&psi_map, inner).unwrap(),
                            ],
                        );
                        body.exists_n(nb[k])
                    });
                    Formula::disj(outer, parts.collect::<Vec<_>>())
                })
                .collect()
        })
        .collect();
    Ok(DefinableFunction {
        source: f.source.clone(),
        target: g.target.clone(),
        graph,
    })
}

/// `A × B` with its two projections. Piece `(i, k)` sits at index
/// `i·|B| + k` and its variables are those of `αᵢ` followed by those of `βₖ`.
pub fn product_sort(a: &ImaginarySort, b: &ImaginarySort) -> (ImaginarySort, DefinableFunction, DefinableFunction) {
    let na = a.arities();
    let nb = b.arities();
    let idx: Vec<(usize, usize)> = (0..na.len()).flat_map(|i| (0..nb.len()).map(move |k| (i, k))).collect();
    let gamma = |i: usize, k: usize| {
        let ctx = na[i] + nb[k];
        Formula::conj(ctx, [a.pieces()[i].weaken(ctx), b.pieces()[k].shift(na[i], ctx)])
    };
    let pieces: Vec<Formula> = idx.iter().map(|&(i, k)| gamma(i, k)).collect();
    let relations = idx
        .iter()
        .map(|&(i, k)| {
            idx.iter()
                .map(|&(j, l)| {
                    let ctx = na[i] + nb[k] + na[j] + nb[l];
                    // variables: x̄ (αᵢ), ȳ (βₖ), z̄ (αⱼ), w̄ (βₗ)
                    let eps_map: Vec<usize> = (0..na[i]).chain((0..na[j]).map(|t| na[i] + nb[k] + t)).collect();
                    let eta_map: Vec<usize> = (0..nb[k])
                        .map(|t| na[i] + t)
                        .chain((0..nb[l]).map(|t| na[i] + nb[k] + na[j] + t))
                        .collect();
                    Formula::conj(
                        ctx,
                        [
                            a.relation(i, j).substitute(&eps_map, ctx).unwrap(),
                            b.relation(k, l).substitute(&eta_map, ctx).unwrap(),
                        ],
                    )
                })
                .collect()
        })
        .collect();
    let prod = ImaginarySort {
        pieces: pieces.clone(),
        relations,
    };
    let p1 = idx
        .iter()
        .map(|&(i, k)| {
            (0..na.len())
                .map(|j| {
                    let ctx = na[i] + nb[k] + na[j];
                    let eps_map: Vec<usize> = (0..na[i]).chain((0..na[j]).map(|t| na[i] + nb[k] + t)).collect();
                    Formula::conj(
                        ctx,
                        [
                            gamma(i, k).weaken(ctx),
                            a.relation(i, j).substitute(&eps_map, ctx).unwrap(),
                        ],
                    )
                })
                .collect()
        })
        .collect();
    let p2 = idx
        .iter()
        .map(|&(i, k)| {
            (0..nb.len())
                .map(|l| {
                    let ctx = na[i] + nb[k] + nb[l];
                    let eta_map: Vec<usize> = (0..nb[k])
                        .map(|t| na[i] + t)
                        .chain((0..nb[l]).map(|t| na[i] + nb[k] + t))
                        .collect();
                    Formula::conj(
                        ctx,
                        [
                            gamma(i, k).weaken(ctx),
                            b.relation(k, l).substitute(&eta_map, ctx).unwrap(),
                        ],
                    )
                })
                .collect()
        })
        .collect();
    let pi1 = DefinableFunction {
        source: prod.clone(),
        target: a.clone(),
        graph: p1,
    };
    let pi2 = DefinableFunction {
        source: prod.clone(),
        target: b.clone(),
        graph: p2,
    };
    (prod, pi1, pi2)
}

/// The subsort of `A` on which `f` and `g` agree:
/// `α′ᵢ = ⋁ₖ ∃ȳ (φᵢₖ(x̄, ȳ) ∧ ψᵢₖ(x̄, ȳ))`.
pub fn equalizer_sort(f: &DefinableFunction, g: &DefinableFunction) -> Result<DefinableRelation> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::SortMismatch(
            "equalizer of functions with different types".into(),
        ));
    }
    let na = f.source.arities();
    let nb = f.target.arities();
    let pieces = (0..na.len())
        .map(|i| {
            Formula::disj(
                na[i],
                (0..nb.len())
                    .map(|k| {
                        Formula::conj(na[i] + nb[k], [f.graph[i][k].clone(), g.graph[i][k].clone()]).exists_n(nb[k])
                    })
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    DefinableRelation::new(f.source.clone(), pieces)
}

/// Which (Eqv) or (Fun) clause failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    Typing,
    Reflexivity,
    Symmetry,
    Transitivity,
    Invariance,
    SourceInvariance,
    TargetInvariance,
    SingleValued,
    Total,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Typing => "typing",
            Clause::Reflexivity => "reflexivity",
            Clause::Symmetry => "symmetry",
            Clause::Transitivity => "transitivity",
            Clause::Invariance => "invariance",
            Clause::SourceInvariance => "source invariance",
            Clause::TargetInvariance => "target invariance",
            Clause::SingleValued => "single-valuedness",
            Clause::Total => "totality",
        })
    }
}

/// First violated clause with its witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: Clause,
    /// Index into the model list that was checked.
    pub model: usize,
    /// Piece indices involved, in clause order.
    pub pieces: Vec<usize>,
    /// Concatenated tuple witnessing the failure.
    pub tuple: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails in model {} at pieces {:?} on tuple {:?}",
            self.clause, self.model, self.pieces, self.tuple
        )
    }
}

struct SortTables {
    alpha: Vec<TupleSet>,
    eps: Vec<Vec<TupleSet>>,
}

fn sort_tables(a: &ImaginarySort, m: &FiniteModel) -> Result<SortTables> {
    let mut ev = Evaluator::new(m);
    let alpha = a.pieces().iter().map(|f| ev.eval(f)).collect::<Result<Vec<_>>>()?;
    let eps = a
        .relations()
        .iter()
        .map(|row| row.iter().map(|f| ev.eval(f)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(SortTables { alpha, eps })
}

fn cat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

fn by_prefix(t: &TupleSet, n: usize) -> HashMap<Vec<usize>, Vec<Vec<usize>>> {
    let mut out: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
    for u in t.iter() {
        out.entry(u[..n].to_vec()).or_default().push(u[n..].to_vec());
    }
    out
}

/// Checks the (Eqv) conditions on each of `models`, clause by clause.
pub fn validate_sort_on(a: &ImaginarySort, models: &[FiniteModel]) -> Result<Option<Violation>> {
    let tables: Vec<SortTables> = models.par_iter().map(|m| sort_tables(a, m)).collect::<Result<_>>()?;
    let n = a.arities();
    let p = n.len();
    let v = |clause, model, pieces, tuple| {
        Some(Violation {
            clause,
            model,
            pieces,
            tuple,
        })
    };
    for (mi, t) in tables.iter().enumerate() {
        for i in 0..p {
            for j in 0..p {
                for u in t.eps[i][j].iter() {
                    if !t.alpha[i].contains(&u[..n[i]]) || !t.alpha[j].contains(&u[n[i]..]) {
                        return Ok(v(Clause::Typing, mi, vec![i, j], u));
                    }
                }
            }
        }
    }
    for (mi, t) in tables.iter().enumerate() {
        for i in 0..p {
            for x in t.alpha[i].iter() {
                if !t.eps[i][i].contains(&cat(&x, &x)) {
                    return Ok(v(Clause::Reflexivity, mi, vec![i], x));
                }
            }
        }
    }
    for (mi, t) in tables.iter().enumerate() {
        for i in 0..p {
            for j in 0..p {
                for u in t.eps[i][j].iter() {
                    if !t.eps[j][i].contains(&cat(&u[n[i]..], &u[..n[i]])) {
                        return Ok(v(Clause::Symmetry, mi, vec![i, j], u));
                    }
                }
            }
        }
    }
    for (mi, t) in tables.iter().enumerate() {
        for j in 0..p {
            for k in 0..p {
                let next = by_prefix(&t.eps[j][k], n[j]);
                for i in 0..p {
                    for u in t.eps[i][j].iter() {
                        let (x, y) = u.split_at(n[i]);
                        for z in next.get(y).into_iter().flatten() {
                            if !t.eps[i][k].contains(&cat(x, z)) {
                                return Ok(v(Clause::Transitivity, mi, vec![i, j, k], cat(&u, z)));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

pub fn validate_sort(a: &ImaginarySort, theory: &Theory, cap: usize) -> Result<Option<Violation>> {
    a.check_language(theory.language())?;
    validate_sort_on(a, &enumerate_models(theory, cap)?)
}

/// Checks `βᵢ ⇒ αᵢ` and `βᵢ(x̄) ∧ εᵢⱼ(x̄, ȳ) ⇒ βⱼ(ȳ)`.
pub fn validate_relation_on(r: &DefinableRelation, models: &[FiniteModel]) -> Result<Option<Violation>> {
    let n = r.sort.arities();
    let tables: Vec<(SortTables, Vec<TupleSet>)> = models
        .par_iter()
        .map(|m| {
            let mut ev = Evaluator::new(m);
            let beta = r.pieces.iter().map(|f| ev.eval(f)).collect::<Result<Vec<_>>>()?;
            Ok((sort_tables(&r.sort, m)?, beta))
        })
        .collect::<Result<_>>()?;
    for (mi, (t, beta)) in tables.iter().enumerate() {
        for i in 0..n.len() {
            if let Some(x) = beta[i].first_outside(&t.alpha[i]) {
                return Ok(Some(Violation {
                    clause: Clause::Typing,
                    model: mi,
                    pieces: vec![i],
                    tuple: x,
                }));
            }
        }
    }
    for (mi, (t, beta)) in tables.iter().enumerate() {
        for i in 0..n.len() {
            for j in 0..n.len() {
                for u in t.eps[i][j].iter() {
                    if beta[i].contains(&u[..n[i]]) && !beta[j].contains(&u[n[i]..]) {
                        return Ok(Some(Violation {
                            clause: Clause::Invariance,
                            model: mi,
                            pieces: vec![i, j],
                            tuple: u,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

struct FunctionTables {
    source: SortTables,
    target: SortTables,
    phi: Vec<Vec<TupleSet>>,
}

fn function_clause(f: &DefinableFunction, clause: Clause, t: &FunctionTables) -> Option<(Vec<usize>, Vec<usize>)> {
    let na = f.source.arities();
    let nb = f.target.arities();
    let (s, tg, phi) = (&t.source, &t.target, &t.phi);
    match clause {
        Clause::Typing => {
            for i in 0..na.len() {
                for k in 0..nb.len() {
                    for u in phi[i][k].iter() {
                        if !s.alpha[i].contains(&u[..na[i]]) || !tg.alpha[k].contains(&u[na[i]..]) {
                            return Some((vec![i, k], u));
                        }
                    }
                }
            }
        }
        Clause::SourceInvariance => {
            for i in 0..na.len() {
                for j in 0..na.len() {
                    let moves = by_prefix(&s.eps[i][j], na[i]);
                    for k in 0..nb.len() {
                        for u in phi[i][k].iter() {
                            let (x, y) = u.split_at(na[i]);
                            for x2 in moves.get(x).into_iter().flatten() {
                                if !phi[j][k].contains(&cat(x2, y)) {
                                    return Some((vec![i, j, k], cat(&u, x2)));
                                }
                            }
                        }
                    }
                }
            }
        }
        Clause::TargetInvariance => {
            for k in 0..nb.len() {
                for l in 0..nb.len() {
                    let moves = by_prefix(&tg.eps[k][l], nb[k]);
                    for i in 0..na.len() {
                        for u in phi[i][k].iter() {
                            let (x, y) = u.split_at(na[i]);
                            for y2 in moves.get(y).into_iter().flatten() {
                                if !phi[i][l].contains(&cat(x, y2)) {
                                    return Some((vec![i, k, l], cat(&u, y2)));
                                }
                            }
                        }
                    }
                }
            }
        }
        Clause::SingleValued => {
            for i in 0..na.len() {
                let images: Vec<_> = (0..nb.len()).map(|k| by_prefix(&phi[i][k], na[i])).collect();
                for k in 0..nb.len() {
                    for l in 0..nb.len() {
                        let mut xs: Vec<_> = images[k].keys().collect();
                        xs.sort();
                        for x in xs {
                            for y2 in images[l].get(x).into_iter().flatten() {
                                for y in &images[k][x] {
                                    if !tg.eps[k][l].contains(&cat(y, y2)) {
                                        return Some((vec![i, k, l], cat(&cat(x, y), y2)));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Clause::Total => {
            for i in 0..na.len() {
                let mut covered = TupleSet::empty(na[i], s.alpha[i].size());
                for k in 0..nb.len() {
                    for u in phi[i][k].iter() {
                        covered.insert(&u[..na[i]]);
                    }
                }
                if let Some(x) = s.alpha[i].first_outside(&covered) {
                    return Some((vec![i], x));
                }
            }
        }
        _ => {}
    }
    None
}

/// Checks the five (Fun) conditions on each of `models`, clause by clause.
/// The source and target sorts are assumed valid.
pub fn validate_function_on(f: &DefinableFunction, models: &[FiniteModel]) -> Result<Option<Violation>> {
    let tables: Vec<FunctionTables> = models
        .par_iter()
        .map(|m| {
            let mut ev = Evaluator::new(m);
            let phi = f
                .graph
                .iter()
                .map(|row| row.iter().map(|g| ev.eval(g)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(FunctionTables {
                source: sort_tables(&f.source, m)?,
                target: sort_tables(&f.target, m)?,
                phi,
            })
        })
        .collect::<Result<_>>()?;
    for clause in [
        Clause::Typing,
        Clause::SourceInvariance,
        Clause::TargetInvariance,
        Clause::SingleValued,
        Clause::Total,
    ] {
        for (mi, t) in tables.iter().enumerate() {
            if let Some((pieces, tuple)) = function_clause(f, clause, t) {
                return Ok(Some(Violation {
                    clause,
                    model: mi,
                    pieces,
                    tuple,
                }));
            }
        }
    }
    Ok(None)
}

pub fn validate_function(f: &DefinableFunction, theory: &Theory, cap: usize) -> Result<Option<Violation>> {
    f.formulas().try_for_each(|g| theory.language().check_formula(g))?;
    validate_function_on(f, &enumerate_models(theory, cap)?)
}

/// Same shape and pointwise equivalent formulas on each of `models`. This is
/// a cap-relative check, never used implicitly.
pub fn equivalent_sorts(a: &ImaginarySort, b: &ImaginarySort, models: &[FiniteModel]) -> Result<bool> {
    if a.arities() != b.arities() {
        return Ok(false);
    }
    for (f, g) in a.formulas().zip(b.formulas()) {
        if !equivalent_on(f, g, models)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn formula_to_json(f: &Formula) -> Value {
    json!({"context": f.ctx(), "formula": print_formula(f, &default_names(f.ctx()))})
}

pub fn formula_from_json(v: &Value, lang: &Language) -> Result<Formula> {
    let ctx = v
        .get("context")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Invalid("formula entry needs a numeric `context`".into()))? as usize;
    let text = v
        .get("formula")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Invalid("formula entry needs a `formula` string".into()))?;
    parse_formula(text, lang, &default_names(ctx))
}

fn matrix_to_json(m: &[Vec<Formula>]) -> Value {
    Value::Array(
        m.iter()
            .map(|r| Value::Array(r.iter().map(formula_to_json).collect()))
            .collect(),
    )
}

fn matrix_from_json(v: &Value, lang: &Language) -> Result<Vec<Vec<Formula>>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Invalid("matrix must be an array".into()))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Invalid("matrix row must be an array".into()))?
                .iter()
                .map(|f| formula_from_json(f, lang))
                .collect()
        })
        .collect()
}

impl ImaginarySort {
    pub fn to_json(&self) -> Value {
        json!({
            "pieces": self.pieces.iter().map(formula_to_json).collect::<Vec<_>>(),
            "relations": matrix_to_json(&self.relations),
        })
    }

    pub fn from_json(v: &Value, lang: &Language) -> Result<ImaginarySort> {
        let pieces = v
            .get("pieces")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Invalid("sort needs `pieces`".into()))?
            .iter()
            .map(|f| formula_from_json(f, lang))
            .collect::<Result<Vec<_>>>()?;
        let relations = matrix_from_json(
            v.get("relations")
                .ok_or_else(|| Error::Invalid("sort needs `relations`".into()))?,
            lang,
        )?;
        ImaginarySort::new(pieces, relations)
    }
}

impl DefinableRelation {
    pub fn to_json(&self) -> Value {
        json!({
            "sort": self.sort.to_json(),
            "pieces": self.pieces.iter().map(formula_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, lang: &Language) -> Result<DefinableRelation> {
        let sort = ImaginarySort::from_json(
            v.get("sort")
                .ok_or_else(|| Error::Invalid("relation needs `sort`".into()))?,
            lang,
        )?;
        let pieces = v
            .get("pieces")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Invalid("relation needs `pieces`".into()))?
            .iter()
            .map(|f| formula_from_json(f, lang))
            .collect::<Result<Vec<_>>>()?;
        DefinableRelation::new(sort, pieces)
    }
}

impl DefinableFunction {
    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "graph": matrix_to_json(&self.graph),
        })
    }

    pub fn from_json(v: &Value, lang: &Language) -> Result<DefinableFunction> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("function needs `{k}`")));
        DefinableFunction::new(
            ImaginarySort::from_json(get("source")?, lang)?,
            ImaginarySort::from_json(get("target")?, lang)?,
            matrix_from_json(get("graph")?, lang)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval_formula;
    use crate::syntax::parse_theory;

    const GRAPH: &str = "language { E/2; }
theory {
  axiom forall x. E(x,x) => false;
  axiom forall x y. E(x,y) => E(y,x);
}";

    fn theory() -> Theory {
        parse_theory(GRAPH).unwrap()
    }

    fn p(s: &str, n: usize) -> Formula {
        parse_formula(s, theory().language(), &default_names(n)).unwrap()
    }

    /// Unordered edges: pairs (x,y) with E(x,y), identified with (y,x).
    pub(crate) fn edge_sort() -> ImaginarySort {
        ImaginarySort::new(
            vec![p("E(x,y)", 2)],
            vec![vec![p("and(E(x,y), or(and(x = z, y = u), and(x = u, y = z)))", 4)]],
        )
        .unwrap()
    }

    #[test]
    fn edge_sort_valid() {
        assert_eq!(validate_sort(&edge_sort(), &theory(), 3).unwrap(), None);
    }

    #[test]
    fn broken_edge_sort_reports_typing() {
        let bad = ImaginarySort::new(vec![p("E(x,y)", 2)], vec![vec![p("and(E(x,y), x = z)", 4)]]).unwrap();
        let v = validate_sort(&bad, &theory(), 3).unwrap().unwrap();
        assert_eq!(v.clause, Clause::Typing);
        let models = enumerate_models(&theory(), 3).unwrap();
        let m = &models[v.model];
        let e = m.relation("E").unwrap();
        assert!(e.contains(&v.tuple[..2]) && !e.contains(&v.tuple[2..]));
    }

    #[test]
    fn sort_from_formula_shapes() {
        let x = home_sort();
        assert_eq!(x.relation(0, 0), &p("x = y", 2));
        assert_eq!(validate_sort(&x, &theory(), 3).unwrap(), None);
        let e = sort_from_formula(&p("E(x,y)", 2));
        assert_eq!(e.relation(0, 0), &p("and(E(x,y), x = z, y = u)", 4));
        assert_eq!(validate_sort(&e, &theory(), 3).unwrap(), None);
        let none = sort_from_formula(&Formula::falsity(1));
        assert_eq!(none.relation(0, 0), &Formula::falsity(2));
    }

    #[test]
    fn reflexivity_and_symmetry_failures() {
        let refl = ImaginarySort::new(vec![Formula::truth(1)], vec![vec![p("E(x,y)", 2)]]).unwrap();
        assert_eq!(
            validate_sort(&refl, &theory(), 2).unwrap().unwrap().clause,
            Clause::Reflexivity
        );
        let free = Theory::empty(theory().language().clone());
        let sym = ImaginarySort::new(vec![Formula::truth(1)], vec![vec![p("or(x = y, E(x,y))", 2)]]).unwrap();
        assert_eq!(validate_sort(&sym, &free, 2).unwrap().unwrap().clause, Clause::Symmetry);
        let trans = ImaginarySort::new(vec![Formula::truth(1)], vec![vec![p("or(x = y, E(x,y))", 2)]]).unwrap();
        assert_eq!(
            validate_sort(&trans, &theory(), 3).unwrap().unwrap().clause,
            Clause::Transitivity
        );
    }

    #[test]
    fn projection_equalizer_is_diagonal() {
        let x = home_sort();
        let (xx, p1, p2) = product_sort(&x, &x);
        assert_eq!(xx, home_power(2));
        let eq = equalizer_sort(&p1, &p2).unwrap();
        let models = enumerate_models(&theory(), 3).unwrap();
        assert!(equivalent_on(&eq.pieces()[0], &p("x = y", 2), &models).unwrap());
        assert_eq!(validate_function_on(&p1, &models).unwrap(), None);
        assert_eq!(validate_relation_on(&eq, &models).unwrap(), None);
    }

    #[test]
    fn identity_and_composition_validate() {
        let e = edge_sort();
        let models = enumerate_models(&theory(), 3).unwrap();
        let id = identity_function(&e);
        assert_eq!(validate_function_on(&id, &models).unwrap(), None);
        let bad = DefinableFunction::new(e.clone(), e.clone(), vec![vec![p("and(E(x,y), x = u, y = z)", 4)]]).unwrap();
        assert_eq!(
            validate_function_on(&bad, &models).unwrap().unwrap().clause,
            Clause::SourceInvariance
        );
        let d = sort_from_formula(&p("E(x,y)", 2));
        let swap = DefinableFunction::new(d.clone(), d.clone(), vec![vec![p("and(E(x,y), x = u, y = z)", 4)]]).unwrap();
        assert_eq!(validate_function_on(&swap, &models).unwrap(), None);
        let ss = compose_functions(&swap, &swap).unwrap();
        assert_eq!(validate_function_on(&ss, &models).unwrap(), None);
        assert!(equivalent_sorts(ss.source(), &d, &models).unwrap());
        for (a, b) in ss.formulas().zip(identity_function(&d).formulas()) {
            assert!(equivalent_on(a, b, &models).unwrap());
        }
        assert!(compose_functions(&swap, &identity_function(&home_sort())).is_err());
    }

    #[test]
    fn function_clause_failures() {
        let x = home_sort();
        let models = enumerate_models(&theory(), 3).unwrap();
        let partial = DefinableFunction::new(x.clone(), x.clone(), vec![vec![p("E(x,y)", 2)]]).unwrap();
        assert_eq!(
            validate_function_on(&partial, &models).unwrap().unwrap().clause,
            Clause::SingleValued
        );
        let none = DefinableFunction::new(x.clone(), x.clone(), vec![vec![Formula::falsity(2)]]).unwrap();
        assert_eq!(
            validate_function_on(&none, &models).unwrap().unwrap().clause,
            Clause::Total
        );
    }

    #[test]
    fn subobject_operations() {
        let models = enumerate_models(&theory(), 3).unwrap();
        let meet = subobject_op(SubobjectOp::Meet, &[p("E(x,y)", 2), p("x = y", 2)], Calculus::Coherent).unwrap();
        assert!(equivalent_on(&meet, &Formula::falsity(2), &models).unwrap());
        let img = subobject_op(SubobjectOp::ExistsImage, &[p("E(x,y)", 2)], Calculus::Coherent).unwrap();
        assert_eq!(img, p("exists y. E(x,y)", 1));
        assert!(subobject_op(SubobjectOp::Complement, &[Formula::truth(2)], Calculus::Coherent).is_err());
        let c = subobject_op(SubobjectOp::Complement, &[Formula::truth(2)], Calculus::Boolean).unwrap();
        assert!(equivalent_on(&c, &Formula::falsity(2), &models).unwrap());
        let r = DefinableRelation::full(&edge_sort());
        let rc = r.complement(Calculus::Boolean).unwrap();
        for m in &models {
            assert!(eval_formula(&rc.pieces()[0], m).unwrap().is_empty());
        }
    }

    #[test]
    fn json_round_trip() {
        let e = edge_sort();
        let lang = theory().language().clone();
        assert_eq!(ImaginarySort::from_json(&e.to_json(), &lang).unwrap(), e);
        let id = identity_function(&e);
        assert_eq!(DefinableFunction::from_json(&id.to_json(), &lang).unwrap(), id);
    }
}
