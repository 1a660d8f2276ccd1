//! Languages, formulas in context, theories and their text syntax.

mod formula;
mod fragment;
mod normal;
mod parse;
mod print;
mod theory;

pub use formula::{Formula, Node, NodeKind};
pub use fragment::{atomic_formulas, fragment_close, Fragment};
pub use normal::{coherent_normal_form, is_normal_form};
pub use parse::{free_variable_names, parse_formula, parse_theory};
pub use print::{default_name, default_names, print_formula, print_theory};
pub use theory::{Axiom, CoherentAxiom, Language, RelationSymbol, Theory};
