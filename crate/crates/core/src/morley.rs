//! Morleyization: a fresh relation `R_φ` for every fragment formula `φ`,
//! with coherent axioms forcing `R_φ` to agree with `φ`.

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::semantics::{eval_formula, is_model, FiniteModel};
use crate::syntax::{
    default_names, print_formula, CoherentAxiom, Formula, Fragment, Language, Node, NodeKind, RelationSymbol, Theory,
};

/// The Morleyized theory together with the formula-to-symbol index.
#[derive(Clone, Debug)]
pub struct MorleyResult {
    source: Theory,
    target: Theory,
    index: BTreeMap<Formula, String>,
    /// Fragment formulas in the order their symbols were added.
    order: Vec<Formula>,
}

fn hash_name(f: &Formula, digits: usize) -> String {
    let text = format!("{}|{}", f.ctx(), f);
    let h = Sha256::digest(text.as_bytes());
    let hex: String = h.iter().map(|b| format!("{b:02x}")).collect();
    format!("R_{}", &hex[..digits])
}

impl MorleyResult {
    pub fn source(&self) -> &Theory {
        &self.source
    }

    pub fn target(&self) -> &Theory {
        &self.target
    }

    pub fn target_language(&self) -> &Language {
        self.target.language()
    }

    pub fn index(&self) -> &BTreeMap<Formula, String> {
        &self.index
    }

    pub fn name_of(&self, f: &Formula) -> Result<&str> {
        self.index
            .get(f)
            .map(String::as_str)
            .ok_or_else(|| Error::NotInFragment(f.to_string()))
    }

    /// `R_φ(x₀, …, xₙ₋₁)`.
    pub fn atom_for(&self, f: &Formula) -> Result<Formula> {
        let name = self.name_of(f)?;
        Ok(Formula::trusted(f.ctx(), Node::atom(name, (0..f.ctx()).collect())))
    }

    /// Symbol name to printed source formula and its context.
    pub fn sidecar_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .order
            .iter()
            .map(|f| {
                let names = default_names(f.ctx());
                (
                    self.index[f].clone(),
                    serde_json::json!({
                        "context": names,
                        "formula": print_formula(f, &names),
                    }),
                )
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

struct Emitter<'a> {
    result_index: &'a BTreeMap<Formula, String>,
    axioms: Vec<CoherentAxiom>,
}

impl Emitter<'_> {
    fn r(&self, f: &Formula) -> Result<Node> {
        let name = self
            .result_index
            .get(f)
            .ok_or_else(|| Error::NotInFragment(f.to_string()))?;
        Ok(Node::atom(name.clone(), (0..f.ctx()).collect()))
    }

    fn imp(&mut self, ctx: usize, lhs: Node, rhs: Node) -> Result<()> {
        self.axioms.push(CoherentAxiom::new(
            Formula::trusted(ctx, lhs),
            Formula::trusted(ctx, rhs),
        )?);
        Ok(())
    }

    fn iff(&mut self, ctx: usize, a: Node, b: Node) -> Result<()> {
        self.imp(ctx, a.clone(), b.clone())?;
        self.imp(ctx, b, a)
    }

    fn emit(&mut self, f: &Formula) -> Result<()> {
        let n = f.ctx();
        let rf = self.r(f)?;
        let sub = |p: &Node| Formula::trusted(n, p.clone());
        match f.kind() {
            NodeKind::Atom(..) | NodeKind::Eq(..) | NodeKind::True => {
                self.iff(n, rf, f.node().clone())?;
            }
            NodeKind::False => self.iff(n, rf, Node::or(Vec::new()))?,
            NodeKind::Or(ps) => {
                let rs = ps.iter().map(|p| self.r(&sub(p))).collect::<Result<Vec<_>>>()?;
                self.iff(n, rf, Node::or(rs))?;
            }
            NodeKind::Exists(p) => {
                let body = self.r(&Formula::trusted(n + 1, p.clone()))?;
                self.iff(n, rf, Node::exists(body))?;
            }
            NodeKind::Not(p) => {
                let rp = self.r(&sub(p))?;
                self.imp(n, Node::and(vec![rp.clone(), rf.clone()]), Node::or(Vec::new()))?;
                self.imp(n, Node::truth(), Node::or(vec![rp, rf]))?;
            }
            NodeKind::And(ps) => {
                let mut alts = vec![rf.clone()];
                for p in ps {
                    let rp = self.r(&sub(p))?;
                    self.imp(n, rf.clone(), rp)?;
                    alts.push(self.r(&Formula::trusted(n, Node::not(p.clone())))?);
                }
                self.imp(n, Node::truth(), Node::or(alts))?;
            }
            NodeKind::Forall(p) => {
                let dual = Formula::trusted(n, Node::not(Node::exists(Node::not(p.clone()))));
                let rd = self.r(&dual)?;
                self.iff(n, rf, rd)?;
            }
        }
        Ok(())
    }
}

/// Morleyizes `theory` over `fragment`. Every axiom side and sentence of the
/// theory must belong to the fragment.
pub fn morleyize(theory: &Theory, fragment: &Fragment) -> Result<MorleyResult> {
    let lang = theory.language();
    for f in theory.axiom_formulas() {
        if !fragment.contains(&f) {
            return Err(Error::NotInFragment(f.to_string()));
        }
        lang.check_formula(&f)?;
    }
    for f in fragment.iter() {
        lang.check_formula(f)?;
    }

    // Children before parents, so a search can decide subformulas first.
    let mut order: Vec<Formula> = fragment.iter().cloned().collect();
    order.sort_by(|a, b| (a.node().depth(), a).partial_cmp(&(b.node().depth(), b)).unwrap());

    let mut taken: BTreeSet<String> = lang.relations().iter().map(|r| r.name.clone()).collect();
    let mut index = BTreeMap::new();
    let mut relations = lang.relations().to_vec();
    for f in &order {
        let mut digits = 8;
        let mut name = hash_name(f, digits);
        while taken.contains(&name) {
            digits += 4;
            name = hash_name(f, digits);
        }
        taken.insert(name.clone());
        relations.push(RelationSymbol::new(name.clone(), f.ctx()));
        index.insert(f.clone(), name);
    }

    let mut em = Emitter {
        result_index: &index,
        axioms: Vec::new(),
    };
    for f in &order {
        em.emit(f)?;
    }
    for ax in theory.coherent_axioms() {
        let (l, r) = (em.r(ax.lhs())?, em.r(ax.rhs())?);
        em.imp(ax.ctx(), l, r)?;
    }
    for s in theory.sentences() {
        let rs = em.r(s)?;
        em.imp(0, Node::truth(), rs)?;
    }
    let axioms = em.axioms;

    let mut target_lang = Language::new(relations)?;
    let neq = Formula::trusted(2, Node::not(Node::eq(0, 1)));
    if let Some(name) = index.get(&neq) {
        target_lang = target_lang.with_witness(Formula::trusted(2, Node::atom(name.clone(), vec![0, 1])))?;
    }
    let target = Theory::new(target_lang, axioms, Vec::new())?;
    Ok(MorleyResult {
        source: theory.clone(),
        target,
        index,
        order,
    })
}

/// The unique expansion of a model of the source theory to a model of the
/// Morleyized theory: `R_φ` is interpreted as `φ`.
pub fn expand_model(m: &FiniteModel, result: &MorleyResult) -> Result<FiniteModel> {
    if !is_model(m, &result.source)? {
        return Err(Error::NotAModel("model does not satisfy the source theory".into()));
    }
    let mut out = m.clone();
    for f in &result.order {
        out = out.with_relation(result.index[f].clone(), eval_formula(f, m)?);
    }
    Ok(out)
}

/// Forgets the added symbols.
pub fn reduct_model(m: &FiniteModel, lang: &Language) -> Result<FiniteModel> {
    m.restrict(lang)
}

/// `⋁ᵢ R_{φᵢ}` in context `ctx`.
pub fn translate_fragment_disjunction(formulas: &[Formula], ctx: usize, result: &MorleyResult) -> Result<Formula> {
    let mut parts = Vec::new();
    for f in formulas {
        if f.ctx() != ctx {
            return Err(Error::ContextMismatch {
                expected: ctx,
                found: f.ctx(),
            });
        }
        parts.push(result.atom_for(f)?);
    }
    Ok(Formula::disj(ctx, parts))
}
