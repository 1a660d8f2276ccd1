use super::formula::{Formula, Node};
use super::theory::{CoherentAxiom, Language, RelationSymbol, Theory};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    Slash,
    Eq,
    Neq,
    Implies,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: [&str; 13] = [
    "true",
    "false",
    "and",
    "or",
    "not",
    "exists",
    "forall",
    "bigor",
    "language",
    "theory",
    "axiom",
    "sentence",
    "decidable",
];

fn err(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Ident(chars[start..i].iter().collect()), l0, c0));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| err(l0, c0, format!("number too large: {s}")))?;
            out.push((Tok::Num(n), l0, c0));
            continue;
        }
        let two = |d: char| chars.get(i + 1) == Some(&d);
        let (tok, n) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ',' => (Tok::Comma, 1),
            ';' => (Tok::Semi, 1),
            '.' => (Tok::Dot, 1),
            '/' => (Tok::Slash, 1),
            '=' if two('>') => (Tok::Implies, 2),
            '=' => (Tok::Eq, 1),
            '!' if two('=') => (Tok::Neq, 2),
            _ => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        };
        adv(n, &mut i, &mut col);
        out.push((tok, l0, c0));
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    lang: &'a Language,
}

impl<'a> Parser<'a> {
    fn new(text: &str, lang: &'a Language) -> Result<Parser<'a>> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            lang,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = &self.toks[self.pos];
        (*l, *c)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        err(l, c, message)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!(
                "syntax error: expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_keyword(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!(
                "syntax error: expected `{kw}`, found {}",
                self.peek().describe()
            )))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => Err(self.error(format!("syntax error: expected identifier, found {}", t.describe()))),
        }
    }

    fn binder_name(&mut self) -> Result<String> {
        let (l, c) = self.here();
        let s = self.ident()?;
        if KEYWORDS.contains(&s.as_str()) {
            return Err(err(l, c, format!("keyword `{s}` cannot name a variable")));
        }
        Ok(s)
    }

    fn variable(&mut self, scope: &[String]) -> Result<usize> {
        let (l, c) = self.here();
        let s = self.ident()?;
        scope
            .iter()
            .rposition(|v| *v == s)
            .ok_or_else(|| err(l, c, format!("unbound variable {s}")))
    }

    fn formula(&mut self, scope: &mut Vec<String>) -> Result<Node> {
        let (l, c) = self.here();
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let f = self.formula(scope)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" => {
                    self.next();
                    Ok(Node::truth())
                }
                "false" => {
                    self.next();
                    Ok(Node::falsity())
                }
                "and" | "or" => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    let parts = self.list(scope, Tok::Comma, Tok::RParen)?;
                    Ok(if s == "and" { Node::and(parts) } else { Node::or(parts) })
                }
                "bigor" => {
                    self.next();
                    self.expect(Tok::LBrack)?;
                    Ok(Node::or(self.list(scope, Tok::Semi, Tok::RBrack)?))
                }
                "not" => {
                    self.next();
                    Ok(Node::not(self.formula(scope)?))
                }
                "exists" | "forall" => {
                    self.next();
                    let mut names = vec![self.binder_name()?];
                    while *self.peek() != Tok::Dot {
                        names.push(self.binder_name()?);
                    }
                    self.expect(Tok::Dot)?;
                    let k = names.len();
                    scope.extend(names);
                    let body = self.formula(scope);
                    scope.truncate(scope.len() - k);
                    let body = body?;
                    Ok(if s == "exists" {
                        Node::exists_n(k, body)
                    } else {
                        Node::forall_n(k, body)
                    })
                }
                _ if *self.peek2() == Tok::LParen => self.atom(scope),
                _ => {
                    let i = self.variable(scope)?;
                    match self.next() {
                        Tok::Eq => Ok(Node::eq(i, self.variable(scope)?)),
                        Tok::Neq => {
                            let j = self.variable(scope)?;
                            let w = self
                                .lang
                                .neq(i, j, scope.len())
                                .map_err(|_| err(l, c, "`!=` used but the language has no decidability witness"))?;
                            Ok(w.node().clone())
                        }
                        t => Err(err(
                            l,
                            c,
                            format!(
                                "syntax error: expected `=` or `!=` after variable, found {}",
                                t.describe()
                            ),
                        )),
                    }
                }
            },
            t => Err(self.error(format!("syntax error: expected formula, found {}", t.describe()))),
        }
    }

    fn list(&mut self, scope: &mut Vec<String>, sep: Tok, close: Tok) -> Result<Vec<Node>> {
        let mut parts = Vec::new();
        if *self.peek() == close {
            self.next();
            return Ok(parts);
        }
        loop {
            parts.push(self.formula(scope)?);
            if *self.peek() == sep {
                self.next();
            } else {
                self.expect(close)?;
                return Ok(parts);
            }
        }
    }

    fn atom(&mut self, scope: &[String]) -> Result<Node> {
        let (l, c) = self.here();
        let name = self.ident()?;
        let arity = self
            .lang
            .arity(&name)
            .ok_or_else(|| err(l, c, format!("unknown relation {name}")))?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.variable(scope)?);
                if *self.peek() == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        if args.len() != arity {
            return Err(err(
                l,
                c,
                format!("arity mismatch for {name}: expected {arity}, got {}", args.len()),
            ));
        }
        Ok(Node::atom(name, args))
    }
}

/// Parses a formula whose free variables are `names` (positions in order).
pub fn parse_formula(text: &str, lang: &Language, names: &[String]) -> Result<Formula> {
    let mut p = Parser::new(text, lang)?;
    let mut scope = names.to_vec();
    let node = p.formula(&mut scope)?;
    p.expect(Tok::Eof)?;
    Formula::new(names.len(), node)
}

/// Free variable names of a formula text, in order of first occurrence.
/// Names bound by a quantifier at the point of use are skipped.
pub fn free_variable_names(text: &str, lang: &Language) -> Result<Vec<String>> {
    // Parse against a growing scope: every time an unbound variable is hit,
    // add it and retry.
    let mut names: Vec<String> = Vec::new();
    loop {
        match parse_formula(text, lang, &names) {
            Ok(_) => return Ok(names),
            Err(Error::Parse { message, .. }) if message.starts_with("unbound variable ") => {
                names.push(message["unbound variable ".len()..].to_string());
            }
            Err(e) => return Err(e),
        }
    }
}

/// Parses a theory file.
pub fn parse_theory(text: &str) -> Result<Theory> {
    let empty = Language::new(Vec::new())?;
    let mut p = Parser::new(text, &empty)?;
    p.expect_keyword("language")?;
    p.expect(Tok::LBrace)?;
    let mut relations = Vec::new();
    while *p.peek() != Tok::RBrace {
        let (l, c) = p.here();
        let name = p.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(err(l, c, format!("keyword `{name}` cannot name a relation")));
        }
        p.expect(Tok::Slash)?;
        let arity = match p.next() {
            Tok::Num(n) => n,
            t => {
                return Err(err(
                    l,
                    c,
                    format!("syntax error: expected arity, found {}", t.describe()),
                ))
            }
        };
        p.expect(Tok::Semi)?;
        if relations.iter().any(|r: &RelationSymbol| r.name == name) {
            return Err(err(l, c, format!("duplicate relation {name}")));
        }
        relations.push(RelationSymbol::new(name, arity));
    }
    p.expect(Tok::RBrace)?;
    let mut lang = Language::new(relations)?;

    let toks = std::mem::take(&mut p.toks);
    let pos = p.pos;
    let mut p = Parser { toks, pos, lang: &lang };
    if p.is_keyword("decidable") {
        let (l, c) = p.here();
        p.next();
        p.expect_keyword("via")?;
        let mut scope = vec!["x".to_string(), "y".to_string()];
        let node = p.formula(&mut scope)?;
        p.expect(Tok::Semi)?;
        let w = Formula::new(2, node)?;
        let toks = std::mem::take(&mut p.toks);
        let pos = p.pos;
        lang = lang
            .clone()
            .with_witness(w)
            .map_err(|e| err(l, c, format!("bad decidability witness: {e}")))?;
        p = Parser { toks, pos, lang: &lang };
    }

    let mut axioms = Vec::new();
    let mut sentences = Vec::new();
    if p.is_keyword("theory") {
        p.next();
        p.expect(Tok::LBrace)?;
        while *p.peek() != Tok::RBrace {
            let (l, c) = p.here();
            if p.is_keyword("axiom") {
                p.next();
                let mut scope = Vec::new();
                if p.is_keyword("forall") {
                    p.next();
                    while *p.peek() != Tok::Dot {
                        scope.push(p.binder_name()?);
                    }
                    p.expect(Tok::Dot)?;
                }
                let lhs = p.formula(&mut scope)?;
                p.expect(Tok::Implies)?;
                let rhs = p.formula(&mut scope)?;
                p.expect(Tok::Semi)?;
                let n = scope.len();
                let ax = CoherentAxiom::new(Formula::new(n, lhs)?, Formula::new(n, rhs)?)
                    .map_err(|e| err(l, c, e.to_string()))?;
                axioms.push(ax);
            } else if p.is_keyword("sentence") {
                p.next();
                let node = p.formula(&mut Vec::new())?;
                p.expect(Tok::Semi)?;
                sentences.push(Formula::new(0, node)?);
            } else {
                return Err(p.error(format!(
                    "syntax error: expected `axiom` or `sentence`, found {}",
                    p.peek().describe()
                )));
            }
        }
        p.expect(Tok::RBrace)?;
    }
    p.expect(Tok::Eof)?;
    drop(p);
    Theory::new(lang, axioms, sentences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::print::{default_names, print_theory};

    const GRAPH: &str = "language { E/2; }
theory {
  axiom forall x. E(x,x) => false;
  axiom forall x y. E(x,y) => E(y,x);
}";

    #[test]
    fn graph_theory() {
        let t = parse_theory(GRAPH).unwrap();
        assert_eq!(t.language().relations(), &[RelationSymbol::new("E", 2)]);
        assert_eq!(t.coherent_axioms().len(), 2);
        assert_eq!(parse_theory(&print_theory(&t)).unwrap(), t);
    }

    #[test]
    fn trivial_axiom() {
        let t = parse_theory("language { P/1; } theory { axiom forall x. P(x) => P(x); }").unwrap();
        assert_eq!(t.coherent_axioms().len(), 1);
        assert_eq!(t.coherent_axioms()[0].lhs(), t.coherent_axioms()[0].rhs());
    }

    #[test]
    fn unknown_relation() {
        let e = parse_theory("language { E/2; } theory { axiom forall x. Q(x) => false; }").unwrap_err();
        assert!(e.to_string().contains("unknown relation Q"), "{e}");
    }

    #[test]
    fn arity_and_binding_errors() {
        let e = parse_theory("language { E/2; } theory { axiom forall x. E(x) => false; }").unwrap_err();
        assert!(e.to_string().contains("arity mismatch"), "{e}");
        let e = parse_theory("language { E/2; } theory { axiom forall x. E(x,z) => false; }").unwrap_err();
        assert!(e.to_string().contains("unbound variable z"), "{e}");
        let e = parse_theory("language { E/2; }\ntheory { axiom forall x. E(x,x) => false }").unwrap_err();
        assert!(e.to_string().starts_with("2:"), "{e}");
    }

    #[test]
    fn neq_expands_witness() {
        let t = parse_theory(
            "language { L/2; } decidable via or(L(x,y), L(y,x));
             theory { axiom forall x y. x != y => or(L(x,y), L(y,x)); }",
        )
        .unwrap();
        let ax = &t.coherent_axioms()[0];
        assert_eq!(ax.lhs(), ax.rhs());
        let e = parse_theory("language { E/2; } theory { axiom forall x y. x != y => false; }").unwrap_err();
        assert!(e.to_string().contains("decidability witness"), "{e}");
    }

    #[test]
    fn formula_forms() {
        let lang = Language::new(vec![RelationSymbol::new("E", 2)]).unwrap();
        let names = default_names(2);
        let f = parse_formula("bigor [E(x,y); x = y]", &lang, &names).unwrap();
        assert_eq!(f, parse_formula("or(E(x,y), x = y)", &lang, &names).unwrap());
        let g = parse_formula("exists z w. and(E(x,z), E(z,w))", &lang, &names[..1]).unwrap();
        assert_eq!(g.ctx(), 1);
        assert_eq!(
            free_variable_names("exists y. E(x,y)", &lang).unwrap(),
            vec!["x".to_string()]
        );
    }
}
