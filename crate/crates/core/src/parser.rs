//! Text front end for `.tgd` programs and the canonical text serializer.
//!
//! ```text
//! % comment
//! t(c1,c2). u(c1,c2).                       % facts
//! s11: t(X,Y) -> t(Y,Z), u(Y,Z).            % rule, Z is existential
//! s12: t(X,Y), u(Y,Z) -> exists W: v(X,W).  % explicit existential prefix
//! ?- t(X,X).                                % boolean conjunctive query
//! ```
//!
//! Identifiers starting with a lowercase letter or a digit are constants
//! (or relation names); those starting with an uppercase letter or `_`
//! are variables, scoped to their rule or query.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Atom, Query, Rule, Sym, Term};

/// A database, a rule set and a list of queries.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub facts: BTreeSet<Atom>,
    pub rules: Vec<Rule>,
    pub queries: Vec<Query>,
}

impl Program {
    /// Relation arities across facts, rules and queries.
    pub fn schema(&self) -> BTreeMap<Sym, usize> {
        let mut out = BTreeMap::new();
        let atoms = self
            .facts
            .iter()
            .chain(self.rules.iter().flat_map(|r| r.body.iter().chain(&r.head)))
            .chain(self.queries.iter().flat_map(|q| &q.body));
        for a in atoms {
            out.entry(a.rel.clone()).or_insert(a.arity());
        }
        out
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id.as_str() == id)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    QueryMark,
    Colon,
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let ch = chars[i];
        let (l, c) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: l, col: c });
        match ch {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            _ if ch.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '.' => push(&mut out, Tok::Dot),
            ':' => push(&mut out, Tok::Colon),
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(&mut out, Tok::Arrow);
                i += 2;
                col += 2;
                continue;
            }
            '?' if chars.get(i + 1) == Some(&'-') => {
                push(&mut out, Tok::QueryMark);
                i += 2;
                col += 2;
                continue;
            }
            _ if ch.is_alphanumeric() || ch == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                if ch.is_uppercase() || ch == '_' {
                    push(&mut out, Tok::Upper(word));
                } else {
                    push(&mut out, Tok::Lower(word));
                }
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{ch}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    arities: BTreeMap<Sym, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.bump() {
            Tok::Upper(name) => Ok(Term::Var(Sym::new(&name))),
            Tok::Lower(name) => Ok(Term::Const(Sym::new(&name))),
            other => {
                self.pos -= 1;
                self.error(format!("expected a term, found {}", describe(&other)))
            }
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let (line, col) = self.here();
        let rel = match self.bump() {
            Tok::Lower(name) => name,
            other => {
                self.pos -= 1;
                return self.error(format!("expected a relation name, found {}", describe(&other)));
            }
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                args.push(self.term()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        let atom = Atom::new(&rel, args);
        match self.arities.get(&atom.rel) {
            Some(&expected) if expected != atom.arity() => Err(Error::Arity {
                line,
                col,
                rel,
                expected,
                found: atom.arity(),
            }),
            Some(_) => Ok(atom),
            None => {
                self.arities.insert(atom.rel.clone(), atom.arity());
                Ok(atom)
            }
        }
    }

    fn conjunction(&mut self) -> Result<Vec<(Atom, usize, usize)>> {
        let mut out = Vec::new();
        let (l, c) = self.here();
        out.push((self.atom()?, l, c));
        while *self.peek() == Tok::Comma {
            self.bump();
            let (l, c) = self.here();
            out.push((self.atom()?, l, c));
        }
        Ok(out)
    }

    fn existential_prefix(&mut self) -> Result<Option<(Vec<Sym>, usize, usize)>> {
        if !(matches!(self.peek(), Tok::Lower(w) if w == "exists") && matches!(self.peek_at(1), Tok::Upper(_))) {
            return Ok(None);
        }
        let (line, col) = self.here();
        self.bump();
        let mut vars = Vec::new();
        loop {
            match self.bump() {
                Tok::Upper(name) => vars.push(Sym::new(&name)),
                other => {
                    self.pos -= 1;
                    return self.error(format!("expected a variable, found {}", describe(&other)));
                }
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Colon, "`:` after existential variables")?;
        Ok(Some((vars, line, col)))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Lower(w) | Tok::Upper(w) => format!("`{w}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::QueryMark => "`?-`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a `.tgd` program.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        arities: BTreeMap::new(),
    };
    let mut program = Program::default();
    let mut ids: HashSet<String> = HashSet::new();
    let mut pending_labels: Vec<(usize, String)> = Vec::new();

    while *p.peek() != Tok::Eof {
        if *p.peek() == Tok::QueryMark {
            p.bump();
            let body = p.conjunction()?;
            p.expect(Tok::Dot, "`.` after query")?;
            program
                .queries
                .push(Query::new(body.into_iter().map(|(a, _, _)| a).collect())?);
            continue;
        }

        let label = match (p.peek().clone(), p.peek_at(1)) {
            (Tok::Lower(w) | Tok::Upper(w), Tok::Colon) => {
                p.bump();
                p.bump();
                Some(w)
            }
            _ => None,
        };
        let body = p.conjunction()?;
        match p.peek() {
            Tok::Dot if label.is_none() => {
                p.bump();
                for (atom, line, col) in body {
                    if !atom.is_ground() {
                        return Err(Error::NonGroundFact {
                            line,
                            col,
                            fact: atom.to_string(),
                        });
                    }
                    program.facts.insert(atom);
                }
            }
            Tok::Arrow => {
                p.bump();
                let declared = p.existential_prefix()?;
                let head = p.conjunction()?;
                p.expect(Tok::Dot, "`.` after rule")?;
                let index = program.rules.len();
                let id = match label {
                    Some(l) => l,
                    None => format!("r{}", index + 1),
                };
                let rule = Rule::new(
                    &id,
                    body.into_iter().map(|(a, _, _)| a).collect(),
                    head.into_iter().map(|(a, _, _)| a).collect(),
                )?;
                if let Some((vars, line, col)) = declared {
                    let declared: BTreeSet<Sym> = vars.into_iter().collect();
                    let implicit: BTreeSet<Sym> = rule.existentials.iter().cloned().collect();
                    if declared != implicit {
                        return Err(Error::Syntax {
                            line,
                            col,
                            msg: format!(
                                "declared existential variables {{{}}} differ from the head-only variables {{{}}}",
                                join_syms(&declared),
                                join_syms(&implicit)
                            ),
                        });
                    }
                }
                pending_labels.push((index, id));
                program.rules.push(rule);
            }
            _ => return p.error(format!("expected `.` or `->`, found {}", describe(p.peek()))),
        }
    }

    for (_, id) in pending_labels {
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateRuleId(id));
        }
    }
    Ok(program)
}

fn join_syms(s: &BTreeSet<Sym>) -> String {
    s.iter().map(Sym::as_str).collect::<Vec<_>>().join(",")
}

/// Canonical program text: sorted facts, then rules in input order, then
/// queries. Existential variables are left implicit.
pub fn serialize_program(p: &Program) -> String {
    let mut out = String::new();
    for f in &p.facts {
        let _ = writeln!(out, "{f}.");
    }
    for r in &p.rules {
        let _ = writeln!(out, "{r}");
    }
    for q in &p.queries {
        let _ = writeln!(out, "{q}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_with_head_only_variable() {
        let p = parse_program("t(X,Y) -> t(Y,Z), u(Y,Z).").unwrap();
        assert_eq!(p.rules.len(), 1);
        assert_eq!(p.rules[0].existentials, vec![Sym::new("Z")]);
        assert_eq!(p.rules[0].id.as_str(), "r1");
    }

    #[test]
    fn facts_form_the_database() {
        let p = parse_program("t(c1,c2). u(c1,c2).").unwrap();
        let expected: BTreeSet<Atom> = [
            Atom::new("t", vec![Term::constant("c1"), Term::constant("c2")]),
            Atom::new("u", vec![Term::constant("c1"), Term::constant("c2")]),
        ]
        .into();
        assert_eq!(p.facts, expected);
    }

    #[test]
    fn full_rule_has_no_existentials() {
        let p = parse_program("t(X,Y) -> t(X,Y).").unwrap();
        assert!(p.rules[0].existentials.is_empty());
    }

    #[test]
    fn labels_queries_and_comments() {
        let p = parse_program("% header\ns11: t(X,Y) -> t(Y,Z). % trailing\n?- t(X,X).\n").unwrap();
        assert_eq!(p.rules[0].id.as_str(), "s11");
        assert_eq!(p.queries.len(), 1);
    }

    #[test]
    fn explicit_existentials_must_agree() {
        assert!(parse_program("t(X,Y) -> exists Z: t(Y,Z).").is_ok());
        let err = parse_program("t(X,Y) -> exists W: t(Y,Z).").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, col: 11, .. }), "{err}");
    }

    #[test]
    fn arity_is_checked_across_the_file() {
        let err = parse_program("t(a,b).\nt(X) -> u(X).").unwrap_err();
        assert_eq!(
            err,
            Error::Arity {
                line: 2,
                col: 1,
                rel: "t".into(),
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn facts_must_be_ground() {
        let err = parse_program("t(a,X).").unwrap_err();
        assert!(matches!(err, Error::NonGroundFact { line: 1, col: 1, .. }));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_program("t(a,b)\nu(c).").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, col: 1, .. }), "{err}");
        let err = parse_program("t(a,b) $").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, col: 8, .. }), "{err}");
    }

    #[test]
    fn duplicate_rule_ids_are_rejected() {
        let err = parse_program("a: p(X) -> q(X).\na: q(X) -> p(X).").unwrap_err();
        assert_eq!(err, Error::DuplicateRuleId("a".into()));
    }

    #[test]
    fn zero_ary_relations_are_accepted() {
        let p = parse_program("go. go -> done.").unwrap();
        assert_eq!(p.facts.len(), 1);
        assert_eq!(p.rules[0].head[0].arity(), 0);
    }

    #[test]
    fn serialization_is_canonical() {
        let p = parse_program("u(c1,c2). t(c1,c2).\nt(X,Y) -> t(Y,Z).\n?- t(X,X).").unwrap();
        assert_eq!(
            serialize_program(&p),
            "t(c1,c2).\nu(c1,c2).\nr1: t(X,Y) -> t(Y,Z).\n?- t(X,X).\n"
        );
        assert_eq!(parse_program(&serialize_program(&p)).unwrap(), p);
        assert_eq!(serialize_program(&Program::default()), "");
    }
}
