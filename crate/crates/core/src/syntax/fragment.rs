use std::collections::BTreeSet;

use super::formula::{Formula, Node, NodeKind};
use super::theory::Language;

/// A finite fragment: closed under subformulas, containing every atomic
/// formula of the language in each context up to the largest one present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    formulas: BTreeSet<Formula>,
}

/// Formulas added on demand so that the Morleyization axioms for `f` can be
/// written: negations of conjuncts, and `not exists not` for universals.
fn demanded(f: &Formula) -> Vec<Formula> {
    match f.kind() {
        NodeKind::And(ps) => ps
            .iter()
            .map(|p| Formula::trusted(f.ctx(), Node::not(p.clone())))
            .collect(),
        NodeKind::Forall(p) => vec![Formula::trusted(f.ctx(), Node::not(Node::exists(Node::not(p.clone()))))],
        _ => Vec::new(),
    }
}

fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Atomic formulas (relations, equalities, `true`) in context `n`.
pub fn atomic_formulas(lang: &Language, n: usize) -> Vec<Formula> {
    let mut out = vec![Formula::truth(n)];
    for i in 0..n {
        for j in 0..n {
            out.push(Formula::trusted(n, Node::eq(i, j)));
        }
    }
    for r in lang.relations() {
        for t in tuples(n, r.arity) {
            out.push(Formula::trusted(n, Node::atom(r.name.clone(), t)));
        }
    }
    out
}

impl Fragment {
    pub fn close(seed: impl IntoIterator<Item = Formula>, lang: &Language) -> Fragment {
        let mut formulas = BTreeSet::new();
        let mut work: Vec<Formula> = seed.into_iter().collect();
        while let Some(f) = work.pop() {
            if formulas.contains(&f) {
                continue;
            }
            work.extend(f.children());
            work.extend(demanded(&f));
            formulas.insert(f);
        }
        let max_ctx = formulas.iter().map(Formula::ctx).max().unwrap_or(0);
        for n in 0..=max_ctx {
            formulas.extend(atomic_formulas(lang, n));
        }
        Fragment { formulas }
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.formulas.iter()
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn max_ctx(&self) -> usize {
        self.formulas.iter().map(Formula::ctx).max().unwrap_or(0)
    }

    pub fn formulas(&self) -> &BTreeSet<Formula> {
        &self.formulas
    }
}

/// Closes `seed` under subformulas and adds all atomics up to the largest
/// context present.
pub fn fragment_close(seed: impl IntoIterator<Item = Formula>, lang: &Language) -> Fragment {
    Fragment::close(seed, lang)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse_formula;
    use crate::syntax::print::default_names;
    use crate::syntax::theory::RelationSymbol;

    fn lang() -> Language {
        Language::new(vec![RelationSymbol::new("E", 2)]).unwrap()
    }

    fn p(s: &str, n: usize) -> Formula {
        parse_formula(s, &lang(), &default_names(n)).unwrap()
    }

    #[test]
    fn closure_of_exists() {
        let fr = fragment_close([p("exists y. E(x,y)", 1)], &lang());
        for (s, n) in [
            ("exists y. E(x,y)", 1),
            ("E(x,y)", 2),
            ("E(x,x)", 1),
            ("x = y", 2),
            ("x = x", 1),
            ("true", 1),
            ("true", 2),
            ("true", 0),
        ] {
            assert!(fr.contains(&p(s, n)), "{s}");
        }
        // 1 seed + ⊤₀ + (⊤₁, x=x, E(x,x)) + (⊤₂, 4 equalities, 4 atoms)
        assert_eq!(fr.len(), 1 + 1 + 3 + 9);
    }

    #[test]
    fn empty_seed() {
        let fr = fragment_close([], &lang());
        assert_eq!(fr.iter().cloned().collect::<Vec<_>>(), vec![Formula::truth(0)]);
    }

    #[test]
    fn negation_contains_body() {
        let fr = fragment_close([p("not E(x,y)", 2)], &lang());
        assert!(fr.contains(&p("E(x,y)", 2)));
    }

    #[test]
    fn on_demand_members() {
        let fr = fragment_close([p("forall y. E(x,y)", 1), p("and(E(x,y), x = y)", 2)], &lang());
        assert!(fr.contains(&p("not exists y. not E(x,y)", 1)));
        assert!(fr.contains(&p("not E(x,y)", 2)));
        assert!(fr.contains(&p("not x = y", 2)));
    }
}
