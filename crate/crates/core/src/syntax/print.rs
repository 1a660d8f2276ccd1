use std::fmt;

use super::formula::{Formula, Node, NodeKind};
use super::theory::{Language, Theory};

const BASE_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

/// Default name of the variable at position `i`.
pub fn default_name(i: usize) -> String {
    BASE_NAMES
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("x{i}"))
}

pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(default_name).collect()
}

fn fresh_name(level: usize, scope: &[String]) -> String {
    let base = default_name(level);
    if !scope.contains(&base) {
        return base;
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|c| !scope.contains(c))
        .unwrap()
}

/// Prints `f` using `names` for its free variables.
pub fn print_formula(f: &Formula, names: &[String]) -> String {
    assert_eq!(names.len(), f.ctx(), "one name per context position");
    let mut scope = names.to_vec();
    let mut out = String::new();
    write_node(f.node(), &mut scope, &mut out);
    out
}

fn write_node(node: &Node, scope: &mut Vec<String>, out: &mut String) {
    match node.kind() {
        NodeKind::Atom(r, args) => {
            out.push_str(r);
            out.push('(');
            for (k, &a) in args.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&scope[a]);
            }
            out.push(')');
        }
        NodeKind::Eq(i, j) => {
            out.push_str(&scope[*i]);
            out.push_str(" = ");
            out.push_str(&scope[*j]);
        }
        NodeKind::True => out.push_str("true"),
        NodeKind::False => out.push_str("false"),
        NodeKind::And(ps) | NodeKind::Or(ps) => {
            out.push_str(if matches!(node.kind(), NodeKind::And(_)) {
                "and("
            } else {
                "or("
            });
            for (k, p) in ps.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_node(p, scope, out);
            }
            out.push(')');
        }
        NodeKind::Not(p) => {
            out.push_str("not ");
            write_node(p, scope, out);
        }
        NodeKind::Exists(_) | NodeKind::Forall(_) => {
            let is_exists = matches!(node.kind(), NodeKind::Exists(_));
            out.push_str(if is_exists { "exists" } else { "forall" });
            let mut body = node;
            let mut bound = 0;
            while let (NodeKind::Exists(inner), true) | (NodeKind::Forall(inner), false) = (body.kind(), is_exists) {
                let name = fresh_name(scope.len(), scope);
                out.push(' ');
                out.push_str(&name);
                scope.push(name);
                bound += 1;
                body = inner;
            }
            out.push_str(". ");
            write_node(body, scope, out);
            scope.truncate(scope.len() - bound);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self, &default_names(self.ctx())))
    }
}

/// Prints a theory in the theory-file grammar.
pub fn print_theory(theory: &Theory) -> String {
    let mut out = String::new();
    out.push_str(&print_language(theory.language()));
    out.push_str("theory {\n");
    for ax in theory.coherent_axioms() {
        let names = default_names(ax.ctx());
        out.push_str("  axiom ");
        if ax.ctx() > 0 {
            out.push_str("forall ");
            out.push_str(&names.join(" "));
            out.push_str(". ");
        }
        out.push_str(&print_formula(ax.lhs(), &names));
        out.push_str(" => ");
        out.push_str(&print_formula(ax.rhs(), &names));
        out.push_str(";\n");
    }
    for s in theory.sentences() {
        out.push_str("  sentence ");
        out.push_str(&print_formula(s, &[]));
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

fn print_language(lang: &Language) -> String {
    let mut out = String::from("language {\n");
    for r in lang.relations() {
        out.push_str(&format!("  {}/{};\n", r.name, r.arity));
    }
    out.push_str("}\n");
    if let Some(w) = lang.witness() {
        out.push_str("decidable via ");
        out.push_str(&print_formula(w, &default_names(2)));
        out.push_str(";\n");
    }
    out
}
