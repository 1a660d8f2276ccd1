use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> RelationSymbol {
        RelationSymbol {
            name: name.into(),
            arity,
        }
    }
}

/// A relational language, optionally with a coherent formula in two
/// variables that expresses `x != y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Language {
    relations: Vec<RelationSymbol>,
    witness: Option<Formula>,
}

impl Language {
    pub fn new(relations: Vec<RelationSymbol>) -> Result<Language> {
        let mut seen = BTreeMap::new();
        for r in &relations {
            if seen.insert(r.name.clone(), r.arity).is_some() {
                return Err(Error::LanguageMismatch(format!("duplicate relation {}", r.name)));
            }
        }
        Ok(Language {
            relations,
            witness: None,
        })
    }

    /// Attaches a decidability witness. It must be coherent, in context 2,
    /// and use only relations of this language.
    pub fn with_witness(mut self, witness: Formula) -> Result<Language> {
        if witness.ctx() != 2 {
            return Err(Error::ContextMismatch {
                expected: 2,
                found: witness.ctx(),
            });
        }
        if !witness.is_coherent() {
            return Err(Error::NotCoherent("decidability witness must be coherent".into()));
        }
        self.check_formula(&witness)?;
        self.witness = Some(witness);
        Ok(self)
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn witness(&self) -> Option<&Formula> {
        self.witness.as_ref()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|r| r.name == name).map(|r| r.arity)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    /// Checks that every relation used by `f` is declared with the right
    /// arity.
    pub fn check_formula(&self, f: &Formula) -> Result<()> {
        for (name, arity) in f.relations()? {
            match self.arity(&name) {
                None => return Err(Error::LanguageMismatch(format!("unknown relation {name}"))),
                Some(a) if a != arity => {
                    return Err(Error::LanguageMismatch(format!(
                        "arity mismatch for {name}: expected {a}, got {arity}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// The witness instantiated at `(i, j)` inside a context of size `ctx`.
    pub fn neq(&self, i: usize, j: usize, ctx: usize) -> Result<Formula> {
        let w = self.witness.as_ref().ok_or(Error::MissingWitness)?;
        w.substitute(&[i, j], ctx)
    }
}

/// `forall x̄ (lhs => rhs)` with both sides coherent in the same context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoherentAxiom {
    lhs: Formula,
    rhs: Formula,
}

impl CoherentAxiom {
    pub fn new(lhs: Formula, rhs: Formula) -> Result<CoherentAxiom> {
        if lhs.ctx() != rhs.ctx() {
            return Err(Error::ContextMismatch {
                expected: lhs.ctx(),
                found: rhs.ctx(),
            });
        }
        if !lhs.is_coherent() || !rhs.is_coherent() {
            return Err(Error::NotCoherent("axiom side".into()));
        }
        Ok(CoherentAxiom { lhs, rhs })
    }

    pub fn ctx(&self) -> usize {
        self.lhs.ctx()
    }
    pub fn lhs(&self) -> &Formula {
        &self.lhs
    }
    pub fn rhs(&self) -> &Formula {
        &self.rhs
    }
}

/// Either kind of theory axiom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Coherent(CoherentAxiom),
    Sentence(Formula),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Theory {
    language: Language,
    coherent_axioms: Vec<CoherentAxiom>,
    sentences: Vec<Formula>,
}

impl Theory {
    pub fn new(language: Language, coherent_axioms: Vec<CoherentAxiom>, sentences: Vec<Formula>) -> Result<Theory> {
        for ax in &coherent_axioms {
            language.check_formula(ax.lhs())?;
            language.check_formula(ax.rhs())?;
        }
        for s in &sentences {
            if s.ctx() != 0 {
                return Err(Error::ContextMismatch {
                    expected: 0,
                    found: s.ctx(),
                });
            }
            language.check_formula(s)?;
        }
        Ok(Theory {
            language,
            coherent_axioms,
            sentences,
        })
    }

    /// The theory with no axioms.
    pub fn empty(language: Language) -> Theory {
        Theory {
            language,
            coherent_axioms: Vec::new(),
            sentences: Vec::new(),
        }
    }

    pub fn language(&self) -> &Language {
        &self.language
    }
    pub fn coherent_axioms(&self) -> &[CoherentAxiom] {
        &self.coherent_axioms
    }
    pub fn sentences(&self) -> &[Formula] {
        &self.sentences
    }

    pub fn axioms(&self) -> Vec<Axiom> {
        self.coherent_axioms
            .iter()
            .cloned()
            .map(Axiom::Coherent)
            .chain(self.sentences.iter().cloned().map(Axiom::Sentence))
            .collect()
    }

    /// Every formula occurring as an axiom side or sentence.
    pub fn axiom_formulas(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        for ax in &self.coherent_axioms {
            out.push(ax.lhs().clone());
            out.push(ax.rhs().clone());
        }
        out.extend(self.sentences.iter().cloned());
        out
    }

    pub fn is_coherent(&self) -> bool {
        self.sentences.iter().all(Formula::is_coherent)
    }
}
