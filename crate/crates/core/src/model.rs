//! Terms, atoms, substitutions, rules and queries.
//!
//! Everything here is immutable once built. Symbols are interned so that
//! repeated names share one allocation; equality stays structural.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// An interned name (relation, constant, variable or rule id).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(Arc<str>);

fn interner() -> &'static Mutex<HashSet<Arc<str>>> {
    static TABLE: OnceLock<Mutex<HashSet<Arc<str>>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashSet::new()))
}

impl Sym {
    pub fn new(name: &str) -> Sym {
        let mut table = interner().lock().unwrap_or_else(|e| e.into_inner());
        if let Some(existing) = table.get(name) {
            return Sym(existing.clone());
        }
        let fresh: Arc<str> = Arc::from(name);
        table.insert(fresh.clone());
        Sym(fresh)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym::new(s)
    }
}

/// A term: a variable, a constant, or a labeled null `_:n<i>`.
///
/// Whether a variable is universally or existentially quantified is a
/// property of the rule it occurs in (see [`Rule::existentials`]).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Sym),
    Const(Sym),
    Null(u32),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Sym::new(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Sym::new(name))
    }

    pub fn as_var(&self) -> Option<&Sym> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn as_null(&self) -> Option<u32> {
        match self {
            Term::Null(i) => Some(*i),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => write!(f, "{v}"),
            Term::Null(i) => write!(f, "_:n{i}"),
        }
    }
}

/// `rel(t1, ..., tn)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub rel: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(rel: &str, args: Vec<Term>) -> Atom {
        Atom {
            rel: Sym::new(rel),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Sym> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn var_set(&self) -> BTreeSet<Sym> {
        self.vars().cloned().collect()
    }

    pub fn has_var(&self, v: &Sym) -> bool {
        self.vars().any(|w| w == v)
    }

    pub fn nulls(&self) -> impl Iterator<Item = u32> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Null(i) => Some(*i),
            _ => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn has_nulls(&self) -> bool {
        self.args.iter().any(Term::is_null)
    }

    /// Argument indices (0-based) holding variable `v`.
    pub fn positions_of(&self, v: &Sym) -> Vec<usize> {
        self.args
            .iter()
            .enumerate()
            .filter(|(_, t)| t.as_var() == Some(v))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn shares_term_with(&self, other: &Atom) -> bool {
        self.args.iter().any(|t| other.args.contains(t))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rel)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

pub fn vars_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Sym> {
    atoms.into_iter().flat_map(|a| a.vars().cloned()).collect()
}

pub fn display_atoms(atoms: &[Atom]) -> String {
    atoms.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Removes duplicate atoms, keeping first occurrences in order.
pub fn dedup_atoms(atoms: impl IntoIterator<Item = Atom>) -> Vec<Atom> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in atoms {
        if seen.insert(a.clone()) {
            out.push(a);
        }
    }
    out
}

/// A finite map from variables to terms; identity outside its domain.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Substitution {
    map: BTreeMap<Sym, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Sym, Term)>>(pairs: I) -> Substitution {
        Substitution {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, var: Sym, term: Term) -> Option<Term> {
        self.map.insert(var, term)
    }

    pub fn get(&self, var: &Sym) -> Option<&Term> {
        self.map.get(var)
    }

    pub fn contains(&self, var: &Sym) -> bool {
        self.map.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sym, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> BTreeSet<Sym> {
        self.map.keys().cloned().collect()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            rel: a.rel.clone(),
            args: a.args.iter().map(|t| self.apply_term(t)).collect(),
        }
    }

    /// `θ2 ∘ θ1` where `self` is θ2: first θ1, then θ2.
    pub fn compose(&self, first: &Substitution) -> Substitution {
        let mut map: BTreeMap<Sym, Term> = first.map.iter().map(|(v, t)| (v.clone(), self.apply_term(t))).collect();
        for (v, t) in &self.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution { map }
    }

    /// Restriction to the variables in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Sym>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(v, _)| keep.contains(*v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }

    /// True when every binding maps a variable to a variable.
    pub fn is_var_to_var(&self) -> bool {
        self.map.values().all(Term::is_var)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}->{t}")?;
        }
        f.write_str("}")
    }
}

/// Applies θ to every atom; the result is a set (duplicates collapse).
pub fn apply_substitution(atoms: &[Atom], theta: &Substitution) -> Vec<Atom> {
    dedup_atoms(atoms.iter().map(|a| theta.apply_atom(a)))
}

/// A tuple of atoms is connected when it is a single atom or every
/// consecutive pair shares a term.
pub fn is_connected(atoms: &[Atom]) -> Result<bool> {
    if atoms.is_empty() {
        return Err(Error::EmptyTuple);
    }
    Ok(atoms.windows(2).all(|w| w[0].shares_term_with(&w[1])))
}

/// A tuple-generating dependency `body -> exists Z. head`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rule {
    pub id: Sym,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    /// Head variables absent from the body, in order of first appearance.
    pub existentials: Vec<Sym>,
}

impl Rule {
    pub fn new(id: &str, body: Vec<Atom>, head: Vec<Atom>) -> Result<Rule> {
        let invalid = |msg: &str| Error::InvalidRule {
            rule: id.to_string(),
            msg: msg.to_string(),
        };
        if body.is_empty() {
            return Err(invalid("empty body"));
        }
        if head.is_empty() {
            return Err(invalid("empty head"));
        }
        if body.iter().chain(&head).any(Atom::has_nulls) {
            return Err(invalid("labeled nulls are not allowed in rules"));
        }
        let body = dedup_atoms(body);
        let head = dedup_atoms(head);
        let body_vars = vars_of(&body);
        let mut existentials = Vec::new();
        for v in head.iter().flat_map(Atom::vars) {
            if !body_vars.contains(v) && !existentials.contains(v) {
                existentials.push(v.clone());
            }
        }
        Ok(Rule {
            id: Sym::new(id),
            body,
            head,
            existentials,
        })
    }

    /// Variables of the body (universally quantified).
    pub fn universal_vars(&self) -> BTreeSet<Sym> {
        vars_of(&self.body)
    }

    /// Body variables that also occur in the head.
    pub fn frontier(&self) -> BTreeSet<Sym> {
        let head = vars_of(&self.head);
        vars_of(&self.body).into_iter().filter(|v| head.contains(v)).collect()
    }

    pub fn is_existential(&self, v: &Sym) -> bool {
        self.existentials.contains(v)
    }

    pub fn max_arity(&self) -> usize {
        self.body.iter().chain(&self.head).map(Atom::arity).max().unwrap_or(0)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} -> {}.",
            self.id,
            display_atoms(&self.body),
            display_atoms(&self.head)
        )
    }
}

/// A boolean conjunctive query `?- body.`
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Query {
    pub body: Vec<Atom>,
}

impl Query {
    pub fn new(body: Vec<Atom>) -> Result<Query> {
        if body.is_empty() {
            return Err(Error::InvalidQuery("empty body".into()));
        }
        if body.iter().any(Atom::has_nulls) {
            return Err(Error::InvalidQuery("labeled nulls are not allowed".into()));
        }
        Ok(Query {
            body: dedup_atoms(body),
        })
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?- {}.", display_atoms(&self.body))
    }
}
