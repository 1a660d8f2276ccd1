//! Finite models, exact formula evaluation, satisfaction and enumeration of
//! all models up to a cap.

mod check;
mod eval;
mod model;

pub use check::{
    axiom_label, enumerate_models, equivalent_on, is_model, satisfies_axiom, satisfies_coherent, satisfies_sentence,
    satisfies_theory, semantically_equivalent, TheoryReport, Verdict,
};
pub use eval::{eval_formula, Evaluator};
pub use model::{FiniteModel, TupleSet};
