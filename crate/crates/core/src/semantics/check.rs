use rayon::prelude::*;

use super::eval::{eval_formula, eval_interval, Evaluator};
use super::model::{FiniteModel, TupleSet};
use crate::error::Result;
use crate::syntax::{default_names, print_formula, Axiom, CoherentAxiom, Formula, Language, Theory};

/// Outcome of checking one axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// Lexicographically least violating tuple, if any.
    pub counterexample: Option<Vec<usize>>,
}

pub fn satisfies_coherent(m: &FiniteModel, ax: &CoherentAxiom) -> Result<Verdict> {
    let mut ev = Evaluator::new(m);
    let l = ev.eval(ax.lhs())?;
    let r = ev.eval(ax.rhs())?;
    let cx = l.first_outside(&r);
    Ok(Verdict {
        holds: cx.is_none(),
        counterexample: cx,
    })
}

pub fn satisfies_sentence(m: &FiniteModel, s: &Formula) -> Result<Verdict> {
    let holds = !eval_formula(s, m)?.is_empty();
    Ok(Verdict {
        holds,
        counterexample: if holds { None } else { Some(Vec::new()) },
    })
}

pub fn satisfies_axiom(m: &FiniteModel, ax: &Axiom) -> Result<Verdict> {
    match ax {
        Axiom::Coherent(c) => satisfies_coherent(m, c),
        Axiom::Sentence(s) => satisfies_sentence(m, s),
    }
}

/// Per-axiom verdicts, labelled by the printed axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryReport {
    pub verdicts: Vec<(String, Verdict)>,
}

impl TheoryReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| v.holds)
    }

    pub fn first_failure(&self) -> Option<&(String, Verdict)> {
        self.verdicts.iter().find(|(_, v)| !v.holds)
    }
}

pub fn axiom_label(ax: &Axiom) -> String {
    match ax {
        Axiom::Coherent(c) => {
            let names = default_names(c.ctx());
            format!(
                "{} => {}",
                print_formula(c.lhs(), &names),
                print_formula(c.rhs(), &names)
            )
        }
        Axiom::Sentence(s) => s.to_string(),
    }
}

pub fn satisfies_theory(m: &FiniteModel, t: &Theory) -> Result<TheoryReport> {
    m.check_language(t.language())?;
    let mut verdicts = Vec::new();
    for ax in t.axioms() {
        verdicts.push((axiom_label(&ax), satisfies_axiom(m, &ax)?));
    }
    Ok(TheoryReport { verdicts })
}

pub fn is_model(m: &FiniteModel, t: &Theory) -> Result<bool> {
    m.check_language(t.language())?;
    for ax in t.axioms() {
        if !satisfies_axiom(m, &ax)?.holds {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Backtracking search over the relation bits of one universe size.
struct Search<'a> {
    lang: &'a Language,
    axioms: Vec<Axiom>,
    /// For each relation, the axioms mentioning it.
    watch: Vec<Vec<usize>>,
    /// Position of each bit: (relation index, tuple index).
    slots: Vec<(usize, usize)>,
    lo: FiniteModel,
    hi: FiniteModel,
    out: Vec<FiniteModel>,
}

impl Search<'_> {
    fn violated(&self, ax: &Axiom) -> Result<bool> {
        Ok(match ax {
            Axiom::Coherent(c) => {
                // Coherent sides are monotone: evaluate the lower bound of the
                // antecedent and the upper bound of the consequent.
                let l = eval_formula(c.lhs(), &self.lo)?;
                let r = eval_formula(c.rhs(), &self.hi)?;
                !l.is_subset(&r)
            }
            Axiom::Sentence(s) => eval_interval(s, &self.lo, &self.hi)?.1.is_empty(),
        })
    }

    fn run(&mut self, pos: usize) -> Result<()> {
        if pos == self.slots.len() {
            self.out.push(self.lo.clone());
            return Ok(());
        }
        let (r, t) = self.slots[pos];
        let name = self.lang.relations()[r].name.clone();
        for value in [false, true] {
            self.lo.relation_mut(&name).set(t, value);
            self.hi.relation_mut(&name).set(t, value);
            let mut ok = true;
            for &a in &self.watch[r] {
                if self.violated(&self.axioms[a])? {
                    ok = false;
                    break;
                }
            }
            if ok {
                self.run(pos + 1)?;
            }
        }
        self.lo.relation_mut(&name).set(t, false);
        self.hi.relation_mut(&name).set(t, true);
        Ok(())
    }
}

fn models_of_size(t: &Theory, size: usize) -> Result<Vec<FiniteModel>> {
    let lang = t.language();
    let axioms = t.axioms();
    let mut watch = vec![Vec::new(); lang.relations().len()];
    for (a, ax) in axioms.iter().enumerate() {
        let used = match ax {
            Axiom::Coherent(c) => {
                let mut u = c.lhs().relations()?;
                u.extend(c.rhs().relations()?);
                u
            }
            Axiom::Sentence(s) => s.relations()?,
        };
        for name in used.keys() {
            if let Some(r) = lang.position(name) {
                watch[r].push(a);
            }
        }
    }
    let mut slots = Vec::new();
    let mut hi = FiniteModel::empty(lang, size);
    for (r, sym) in lang.relations().iter().enumerate() {
        let full = TupleSet::full(sym.arity, size);
        for t in 0..full.bits().len() {
            slots.push((r, t));
        }
        hi = hi.with_relation(sym.name.clone(), full);
    }
    let mut s = Search {
        lang,
        axioms,
        watch,
        slots,
        lo: FiniteModel::empty(lang, size),
        hi,
        out: Vec::new(),
    };
    for ax in &s.axioms {
        if s.violated(ax)? {
            return Ok(Vec::new());
        }
    }
    s.run(0)?;
    Ok(s.out)
}

/// All models of `t` with at most `cap` elements: by size, then in
/// lexicographic order of the concatenated relation bitmaps.
pub fn enumerate_models(t: &Theory, cap: usize) -> Result<Vec<FiniteModel>> {
    let per_size: Vec<Result<Vec<FiniteModel>>> = (0..=cap).into_par_iter().map(|k| models_of_size(t, k)).collect();
    let mut out = Vec::new();
    for r in per_size {
        out.extend(r?);
    }
    Ok(out)
}

/// Whether `f` and `g` define the same set in every model of `t` of size at
/// most `cap`. Only as strong as the cap.
pub fn semantically_equivalent(f: &Formula, g: &Formula, t: &Theory, cap: usize) -> Result<bool> {
    let models = enumerate_models(t, cap)?;
    equivalent_on(f, g, &models)
}

/// Whether `f` and `g` define the same set in each of `models`.
pub fn equivalent_on(f: &Formula, g: &Formula, models: &[FiniteModel]) -> Result<bool> {
    if f.ctx() != g.ctx() {
        return Ok(false);
    }
    for m in models {
        let mut ev = Evaluator::new(m);
        if ev.eval(f)? != ev.eval(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_theory};

    const GRAPH: &str = "language { E/2; }
theory {
  axiom forall x. E(x,x) => false;
  axiom forall x y. E(x,y) => E(y,x);
}";

    const ORDER: &str = "language { L/2; }
decidable via or(L(x,y), L(y,x));
theory {
  axiom forall x. L(x,x) => false;
  axiom forall x y z. and(L(x,y), L(y,z)) => L(x,z);
  axiom forall x y. true => or(L(x,y), x = y, L(y,x));
}";

    fn model(t: &Theory, size: usize, e: &[[usize; 2]]) -> FiniteModel {
        let tuples: Vec<&[usize]> = e.iter().map(|p| &p[..]).collect();
        FiniteModel::empty(t.language(), size).with_relation("E", TupleSet::from_tuples(2, size, tuples).unwrap())
    }

    #[test]
    fn satisfaction_examples() {
        let t = parse_theory(GRAPH).unwrap();
        let p2 = model(&t, 3, &[[0, 1], [1, 0], [1, 2], [2, 1]]);
        assert!(satisfies_theory(&p2, &t).unwrap().all_hold());
        let sym = &t.coherent_axioms()[1];
        assert!(satisfies_coherent(&p2, sym).unwrap().holds);
        let one = model(&t, 2, &[[0, 1]]);
        let v = satisfies_coherent(&one, sym).unwrap();
        assert_eq!(v.counterexample, Some(vec![0, 1]));
        let looped = model(&t, 2, &[[0, 1], [1, 0], [0, 0]]);
        let rep = satisfies_theory(&looped, &t).unwrap();
        assert!(!rep.verdicts[0].1.holds && rep.verdicts[1].1.holds);
        let empty = model(&t, 0, &[]);
        assert!(satisfies_theory(&empty, &t).unwrap().all_hold());
    }

    #[test]
    fn enumeration_counts() {
        let g = parse_theory(GRAPH).unwrap();
        assert_eq!(enumerate_models(&g, 2).unwrap().len(), 4);
        assert_eq!(enumerate_models(&g, 3).unwrap().len(), 12);
        let o = parse_theory(ORDER).unwrap();
        assert_eq!(enumerate_models(&o, 3).unwrap().len(), 10);
    }

    #[test]
    fn enumeration_is_ordered_and_valid() {
        let g = parse_theory(GRAPH).unwrap();
        let ms = enumerate_models(&g, 3).unwrap();
        for w in ms.windows(2) {
            assert!(
                (
                    w[0].size(),
                    w[0].relation("E")
                        .unwrap()
                        .bits()
                        .iter()
                        .map(|&b| b as u8)
                        .collect::<Vec<_>>()
                ) < (
                    w[1].size(),
                    w[1].relation("E")
                        .unwrap()
                        .bits()
                        .iter()
                        .map(|&b| b as u8)
                        .collect::<Vec<_>>()
                )
            );
        }
        for m in &ms {
            assert!(satisfies_theory(m, &g).unwrap().all_hold());
        }
    }

    #[test]
    fn equivalence_examples() {
        let o = parse_theory(ORDER).unwrap();
        let names = default_names(1);
        let w = parse_formula("x != x", o.language(), &names).unwrap();
        assert!(semantically_equivalent(&w, &Formula::falsity(1), &o, 4).unwrap());
        let g = parse_theory(GRAPH).unwrap();
        let names = default_names(2);
        let a = parse_formula("E(x,y)", g.language(), &names).unwrap();
        let b = parse_formula("E(y,x)", g.language(), &names).unwrap();
        assert!(semantically_equivalent(&a, &b, &g, 4).unwrap());
        let free = Theory::empty(g.language().clone());
        assert!(!semantically_equivalent(&a, &b, &free, 2).unwrap());
    }

    #[test]
    fn sentences_prune() {
        let t = parse_theory("language { P/1; } theory { sentence exists x. P(x); sentence forall x. not P(x) ; }")
            .unwrap();
        assert!(enumerate_models(&t, 3).unwrap().is_empty());
        let t = parse_theory("language { P/1; } theory { sentence exists x. P(x); }").unwrap();
        // 0 + 1 + 3 + 7
        assert_eq!(enumerate_models(&t, 3).unwrap().len(), 11);
    }
}
