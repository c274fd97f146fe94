//! A level-tracked oblivious chase, boolean query answering on its finite
//! prefixes, and the interchangeable-nulls test.
//!
//! Level 0 is the database. An atom produced by a trigger whose body image
//! has maximal level `L-1` gets level `L`. The chase proceeds one level at
//! a time; inside a level, triggers fire in a fixed order (rule index,
//! then the insertion order of the body image atoms) so null names are
//! reproducible.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::model::{vars_of, Atom, Query, Rule, Substitution, Sym, Term};
use crate::tg::{is_triangularly_guarded, Budgets, Outcome};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Database,
    Rule { rule: Sym, trigger: Substitution },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaseAtom {
    pub atom: Atom,
    pub level: usize,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct ChaseOptions {
    /// Safety cap on the number of atoms in an instance.
    pub max_atoms: usize,
    /// Cap on candidate maps explored by [`interchangeable`].
    pub max_maps: usize,
    /// Deepest level auto mode may reach while looking for a bound.
    pub auto_max_depth: usize,
}

impl Default for ChaseOptions {
    fn default() -> Self {
        ChaseOptions {
            max_atoms: 50_000,
            max_maps: 1_000_000,
            auto_max_depth: 12,
        }
    }
}

impl ChaseOptions {
    /// Defaults, with the atom cap taken from `TG_MAX_ATOMS` when set.
    pub fn from_env() -> ChaseOptions {
        let mut o = ChaseOptions::default();
        if let Some(n) = std::env::var("TG_MAX_ATOMS").ok().and_then(|s| s.trim().parse().ok()) {
            o.max_atoms = n;
        }
        o
    }
}

/// A finite chase prefix. Atoms are kept in insertion order.
#[derive(Clone, Debug, Default)]
pub struct ChaseInstance {
    pub atoms: Vec<ChaseAtom>,
    /// Index of the next fresh null.
    pub next_null: u32,
    /// Highest level built so far.
    pub depth: usize,
    /// The last level built added nothing, so the chase has terminated.
    pub fixpoint: bool,
    index: HashMap<Atom, usize>,
    by_rel: HashMap<Sym, Vec<usize>>,
    fired: HashSet<(Sym, Substitution)>,
    null_level: BTreeMap<u32, usize>,
}

impl ChaseInstance {
    pub fn from_database<'a>(facts: impl IntoIterator<Item = &'a Atom>) -> ChaseInstance {
        let mut sorted: Vec<&Atom> = facts.into_iter().collect();
        sorted.sort();
        let mut i = ChaseInstance {
            next_null: 1,
            ..ChaseInstance::default()
        };
        for a in sorted {
            i.insert(a.clone(), 0, Provenance::Database);
        }
        i
    }

    fn insert(&mut self, atom: Atom, level: usize, provenance: Provenance) -> bool {
        if let Some(&k) = self.index.get(&atom) {
            if level < self.atoms[k].level {
                self.atoms[k].level = level;
            }
            return false;
        }
        for n in atom.nulls() {
            self.null_level.entry(n).or_insert(level);
        }
        let k = self.atoms.len();
        self.index.insert(atom.clone(), k);
        self.by_rel.entry(atom.rel.clone()).or_default().push(k);
        self.atoms.push(ChaseAtom {
            atom,
            level,
            provenance,
        });
        true
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.index.contains_key(a)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn level_of(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).map(|&k| self.atoms[k].level)
    }

    /// Level at which each null first appears.
    pub fn null_levels(&self) -> &BTreeMap<u32, usize> {
        &self.null_level
    }

    /// Plain atom set of every atom with level at most `k`.
    pub fn atoms_up_to(&self, k: usize) -> Vec<Atom> {
        self.atoms
            .iter()
            .filter(|c| c.level <= k)
            .map(|c| c.atom.clone())
            .collect()
    }

    pub fn atom_set(&self) -> BTreeSet<Atom> {
        self.atoms.iter().map(|c| c.atom.clone()).collect()
    }

    /// Graphviz rendering: binary atoms become labeled edges, other atoms
    /// become boxes connected to their terms.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph chase {\n");
        let mut terms: BTreeSet<String> = BTreeSet::new();
        for c in &self.atoms {
            for t in &c.atom.args {
                terms.insert(t.to_string());
            }
        }
        for t in &terms {
            out.push_str(&format!("  \"{t}\";\n"));
        }
        for (k, c) in self.atoms.iter().enumerate() {
            let a = &c.atom;
            if a.arity() == 2 {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{}@{}\"];\n",
                    a.args[0], a.args[1], a.rel, c.level
                ));
            } else {
                out.push_str(&format!("  \"atom{k}\" [shape=box, label=\"{a}@{}\"];\n", c.level));
                for (i, t) in a.args.iter().enumerate() {
                    out.push_str(&format!("  \"atom{k}\" -> \"{t}\" [label=\"{}\"];\n", i + 1));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

// ---------------------------------------------------------------------
// Homomorphisms

/// Backtracking search for maps of `pattern`'s variables into the
/// instance. `allowed(k, idx)` filters which instance atom `idx` may host
/// pattern atom `k`. `visit` returns false to stop the search.
fn search(
    inst: &ChaseInstance,
    pattern: &[Atom],
    allowed: &dyn Fn(usize, usize) -> bool,
    visit: &mut dyn FnMut(&Substitution, &[usize]) -> bool,
) {
    fn rec(
        k: usize,
        inst: &ChaseInstance,
        pattern: &[Atom],
        allowed: &dyn Fn(usize, usize) -> bool,
        theta: &mut Substitution,
        image: &mut Vec<usize>,
        visit: &mut dyn FnMut(&Substitution, &[usize]) -> bool,
    ) -> bool {
        if k == pattern.len() {
            return visit(theta, image);
        }
        let p = &pattern[k];
        let Some(cands) = inst.by_rel.get(&p.rel) else {
            return true;
        };
        for &idx in cands {
            if !allowed(k, idx) {
                continue;
            }
            let target = &inst.atoms[idx].atom;
            if target.arity() != p.arity() {
                continue;
            }
            let mut ext = theta.clone();
            if crate::unify::match_atom(p, target, &mut ext) {
                image.push(idx);
                let keep_going = rec(k + 1, inst, pattern, allowed, &mut ext, image, visit);
                image.pop();
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }
    let mut theta = Substitution::new();
    let mut image = Vec::new();
    rec(0, inst, pattern, allowed, &mut theta, &mut image, visit);
}

/// A homomorphism from `pattern` into the atoms of level at most
/// `max_level`, if any.
pub fn find_homomorphism(pattern: &[Atom], inst: &ChaseInstance, max_level: usize) -> Option<Substitution> {
    let mut found = None;
    search(
        inst,
        pattern,
        &|_, idx| inst.atoms[idx].level <= max_level,
        &mut |theta, _| {
            found = Some(theta.clone());
            false
        },
    );
    found
}

// ---------------------------------------------------------------------
// Chase steps

fn apply_trigger(inst: &mut ChaseInstance, rule: &Rule, eta: &Substitution, level: usize) {
    let key = (rule.id.clone(), eta.restrict(&rule.universal_vars()));
    if !inst.fired.insert(key) {
        return;
    }
    let mut ext = eta.clone();
    for z in &rule.existentials {
        ext.insert(z.clone(), Term::Null(inst.next_null));
        inst.next_null += 1;
    }
    let provenance = Provenance::Rule {
        rule: rule.id.clone(),
        trigger: eta.restrict(&rule.universal_vars()),
    };
    for h in &rule.head {
        inst.insert(ext.apply_atom(h), level, provenance.clone());
    }
}

/// Fires `rule` with the body assignment `eta`. Firing the same trigger
/// twice leaves the instance unchanged.
pub fn chase_step(inst: &ChaseInstance, rule: &Rule, eta: &Substitution) -> Result<ChaseInstance> {
    let invalid = |msg: String| Error::InvalidTrigger {
        rule: rule.id.to_string(),
        msg,
    };
    let mut max_level = 0;
    for b in &rule.body {
        let img = eta.apply_atom(b);
        if !img.is_ground() {
            return Err(invalid(format!("{img} is not ground")));
        }
        match inst.level_of(&img) {
            Some(l) => max_level = max_level.max(l),
            None => return Err(invalid(format!("{img} is not in the instance"))),
        }
    }
    let mut next = inst.clone();
    apply_trigger(&mut next, rule, eta, max_level + 1);
    Ok(next)
}

/// Builds the next level. Returns the number of atoms added.
fn advance(inst: &mut ChaseInstance, rules: &[Rule], max_atoms: usize) -> Result<usize> {
    let prev = inst.depth;
    let level = prev + 1;
    let mut triggers: Vec<(usize, Vec<usize>, Substitution)> = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        // Semi-naive: pin the first body atom mapped to a level `prev` atom.
        for pin in 0..rule.body.len() {
            let allowed = |k: usize, idx: usize| {
                let l = inst.atoms[idx].level;
                match k.cmp(&pin) {
                    std::cmp::Ordering::Less => l < prev,
                    std::cmp::Ordering::Equal => l == prev,
                    std::cmp::Ordering::Greater => l <= prev,
                }
            };
            search(inst, &rule.body, &allowed, &mut |theta, image| {
                triggers.push((ri, image.to_vec(), theta.clone()));
                true
            });
        }
    }
    triggers.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let before = inst.len();
    for (ri, _, eta) in triggers {
        apply_trigger(inst, &rules[ri], &eta, level);
        if inst.len() > max_atoms {
            return Err(Error::ResourceLimit {
                what: format!("chase instance at level {level}"),
                limit: max_atoms,
            });
        }
    }
    inst.depth = level;
    let added = inst.len() - before;
    if added == 0 {
        inst.fixpoint = true;
    }
    Ok(added)
}

/// Extends `inst` until it holds every atom of level at most `k`.
pub fn extend_to_level(inst: &mut ChaseInstance, rules: &[Rule], k: usize, opts: &ChaseOptions) -> Result<()> {
    while inst.depth < k && !inst.fixpoint {
        advance(inst, rules, opts.max_atoms)?;
    }
    if inst.fixpoint {
        inst.depth = inst.depth.max(k);
    }
    Ok(())
}

/// Every atom of the chase with level at most `k`.
pub fn chase_to_level(facts: &BTreeSet<Atom>, rules: &[Rule], k: usize, opts: &ChaseOptions) -> Result<ChaseInstance> {
    let mut inst = ChaseInstance::from_database(facts);
    extend_to_level(&mut inst, rules, k, opts)?;
    Ok(inst)
}

// ---------------------------------------------------------------------
// Interchangeable nulls

struct MapBudget {
    used: usize,
    max: usize,
}

impl MapBudget {
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.max {
            return Err(Error::ResourceLimit {
                what: "candidate maps in the interchangeability test".into(),
                limit: self.max,
            });
        }
        Ok(())
    }
}

/// Null-to-null maps: is there θ' on the nulls of `image` with
/// `imageθ' ⊆ inst`? Nulls act as variables restricted to nulls;
/// constants are fixed.
fn null_map_exists(image: &[Atom], inst: &ChaseInstance, budget: &mut MapBudget) -> Result<bool> {
    fn rec(
        k: usize,
        image: &[Atom],
        inst: &ChaseInstance,
        map: &mut BTreeMap<u32, u32>,
        budget: &mut MapBudget,
    ) -> Result<bool> {
        if k == image.len() {
            return Ok(true);
        }
        let a = &image[k];
        let Some(cands) = inst.by_rel.get(&a.rel) else {
            return Ok(false);
        };
        for &idx in cands {
            budget.tick()?;
            let t = &inst.atoms[idx].atom;
            if t.arity() != a.arity() {
                continue;
            }
            let mut added = Vec::new();
            let mut ok = true;
            for (s, u) in a.args.iter().zip(&t.args) {
                match (s, u) {
                    (Term::Null(n), Term::Null(m)) => match map.get(n) {
                        Some(x) if x != m => ok = false,
                        Some(_) => {}
                        None => {
                            map.insert(*n, *m);
                            added.push(*n);
                        }
                    },
                    (Term::Null(_), _) => ok = false,
                    _ => ok &= s == u,
                }
                if !ok {
                    break;
                }
            }
            if ok && rec(k + 1, image, inst, map, budget)? {
                return Ok(true);
            }
            for n in added {
                map.remove(&n);
            }
        }
        Ok(false)
    }
    let mut map = BTreeMap::new();
    rec(0, image, inst, &mut map, budget)
}

/// Whether nulls `ni` and `nj` are `shape`-interchangeable with respect to
/// the finite prefix `inst`: every connected injective embedding of
/// `shape` that mentions both nulls can be re-embedded after merging them.
pub fn interchangeable(ni: u32, nj: u32, shape: &[Atom], inst: &ChaseInstance, opts: &ChaseOptions) -> Result<bool> {
    if ni == nj {
        return Ok(true);
    }
    let mut budget = MapBudget {
        used: 0,
        max: opts.max_maps,
    };
    let mut result = Ok(true);
    let mut embeddings: Vec<Vec<Atom>> = Vec::new();
    search(inst, shape, &|_, _| true, &mut |theta, _| {
        if budget.tick().is_err() {
            result = Err(Error::ResourceLimit {
                what: "candidate maps in the interchangeability test".into(),
                limit: opts.max_maps,
            });
            return false;
        }
        let values: Vec<&Term> = theta.iter().map(|(_, t)| t).collect();
        let distinct: BTreeSet<&Term> = values.iter().copied().collect();
        if distinct.len() != values.len() {
            return true;
        }
        let image: Vec<Atom> = shape.iter().map(|a| theta.apply_atom(a)).collect();
        let nulls: BTreeSet<u32> = image.iter().flat_map(|a| a.nulls()).collect();
        if !nulls.contains(&ni) || !nulls.contains(&nj) {
            return true;
        }
        if !crate::model::is_connected(&image).unwrap_or(false) {
            return true;
        }
        embeddings.push(image);
        true
    });
    result?;
    for image in embeddings {
        let merged: Vec<Atom> = image
            .iter()
            .map(|a| Atom {
                rel: a.rel.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| {
                        if *t == Term::Null(nj) {
                            Term::Null(ni)
                        } else {
                            t.clone()
                        }
                    })
                    .collect(),
            })
            .collect();
        if !null_map_exists(&merged, inst, &mut budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest `N ≤ max_n` such that every null first seen at levels
/// `N+1 ..= N+window` is interchangeable, for every shape, with some null
/// first seen at a level at most `N`. The instance must reach level
/// `max_n + window`.
pub fn bounded_nulls_level(
    inst: &ChaseInstance,
    shapes: &[Vec<Atom>],
    max_n: usize,
    window: usize,
    opts: &ChaseOptions,
) -> Result<Option<usize>> {
    let levels = inst.null_levels();
    'outer: for n in 0..=max_n {
        let early: Vec<u32> = levels.iter().filter(|(_, &l)| l <= n).map(|(&k, _)| k).collect();
        let late: Vec<u32> = levels
            .iter()
            .filter(|(_, &l)| l > n && l <= n + window)
            .map(|(&k, _)| k)
            .collect();
        for &nj in &late {
            let mut found = false;
            for &ni in &early {
                let mut all = true;
                for s in shapes {
                    if !interchangeable(ni, nj, s, inst, opts)? {
                        all = false;
                        break;
                    }
                }
                if all {
                    found = true;
                    break;
                }
            }
            if !found {
                continue 'outer;
            }
        }
        return Ok(Some(n));
    }
    Ok(None)
}

// ---------------------------------------------------------------------
// Query answering

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes { hom: Substitution, level: usize },
    No { certified: bool, reason: String },
    Unknown(String),
}

/// Shapes used by auto mode: the query body and each rule body, with
/// constants replaced by fresh variables.
fn shapes(rules: &[Rule], q: &Query) -> Vec<Vec<Atom>> {
    let mut out = Vec::new();
    for body in std::iter::once(&q.body).chain(rules.iter().map(|r| &r.body)) {
        let mut k = 0;
        let atoms: Vec<Atom> = body
            .iter()
            .map(|a| Atom {
                rel: a.rel.clone(),
                args: a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(_) => t.clone(),
                        _ => {
                            k += 1;
                            Term::var(&format!("_C{k}"))
                        }
                    })
                    .collect(),
            })
            .collect();
        if !out.contains(&atoms) {
            out.push(atoms);
        }
    }
    out
}

/// Answers `D ∪ Σ ⊨ Q` on chase prefixes.
///
/// `Yes` carries a homomorphism into the prefix at the first level where
/// one exists. `No` is certified when the chase terminates, or (auto mode,
/// TG rule sets only) when the bounded-nulls test passes; otherwise it only
/// states that nothing was found up to `depth_limit`.
pub fn answer_bcq(
    facts: &BTreeSet<Atom>,
    rules: &[Rule],
    q: &Query,
    depth_limit: usize,
    auto: bool,
    opts: &ChaseOptions,
) -> Answer {
    let mut inst = ChaseInstance::from_database(facts);
    let check = |inst: &ChaseInstance, level: usize| find_homomorphism(&q.body, inst, level);
    if let Some(hom) = check(&inst, 0) {
        return Answer::Yes { hom, level: 0 };
    }
    let mut level = 0;
    while level < depth_limit && !inst.fixpoint {
        if let Err(e) = extend_to_level(&mut inst, rules, level + 1, opts) {
            return Answer::Unknown(e.to_string());
        }
        level += 1;
        if let Some(hom) = check(&inst, level) {
            return Answer::Yes { hom, level };
        }
    }
    if inst.fixpoint {
        return Answer::No {
            certified: true,
            reason: format!("the chase terminates at level {}", inst.depth),
        };
    }
    if !auto {
        return Answer::No {
            certified: false,
            reason: format!("no match up to level {depth_limit}"),
        };
    }
    let verdict = is_triangularly_guarded(rules, &Budgets::for_rules(rules));
    if verdict.outcome != Outcome::Member {
        return Answer::No {
            certified: false,
            reason: format!("no match up to level {level}; the rules are not known to be TG"),
        };
    }
    const WINDOW: usize = 3;
    let shapes = shapes(rules, q);
    let max_depth = opts.auto_max_depth.max(depth_limit);
    while level < max_depth {
        if let Err(e) = extend_to_level(&mut inst, rules, level + 1, opts) {
            return Answer::Unknown(e.to_string());
        }
        level += 1;
        if let Some(hom) = check(&inst, level) {
            return Answer::Yes { hom, level };
        }
        if inst.fixpoint {
            return Answer::No {
                certified: true,
                reason: format!("the chase terminates at level {}", inst.depth),
            };
        }
        if level >= WINDOW {
            match bounded_nulls_level(&inst, &shapes, level - WINDOW, WINDOW, opts) {
                Ok(Some(n)) => {
                    return Answer::No {
                        certified: true,
                        reason: format!("rules are TG and nulls after level {n} are interchangeable with earlier ones"),
                    }
                }
                Ok(None) => {}
                Err(e) => return Answer::Unknown(e.to_string()),
            }
        }
    }
    Answer::Unknown(format!(
        "no bound on distinguishable nulls found up to level {max_depth}"
    ))
}

/// Variables of a query, for display.
pub fn query_vars(q: &Query) -> BTreeSet<Sym> {
    vars_of(&q.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    const SIGMA2: &str = "t(c1,c2). u(c1,c2).\n\
        s11: t(X,Y) -> t(Y,Z), u(Y,Z).\ns12star: t(X,Y), u(Y,Z) -> t(X,Z), u(X,Y).\n?- t(X,X).";

    fn atom(s: &str) -> Atom {
        parse_program(&format!("?- {s}.")).unwrap().queries[0].body[0].clone()
    }

    fn ground(s: &str) -> Atom {
        let a = atom(s);
        Atom {
            rel: a.rel,
            args: a
                .args
                .into_iter()
                .map(|t| match &t {
                    Term::Const(c) if c.as_str().starts_with('n') && c.as_str()[1..].parse::<u32>().is_ok() => {
                        Term::Null(c.as_str()[1..].parse().unwrap())
                    }
                    _ => t,
                })
                .collect(),
        }
    }

    #[test]
    fn level_zero_is_the_database() {
        let p = parse_program(SIGMA2).unwrap();
        let i = chase_to_level(&p.facts, &p.rules, 0, &ChaseOptions::default()).unwrap();
        assert_eq!(i.atom_set(), p.facts);
    }

    #[test]
    fn first_step_invents_n1() {
        let p = parse_program(SIGMA2).unwrap();
        let i = ChaseInstance::from_database(&p.facts);
        let eta = Substitution::from_pairs([
            (Sym::new("X"), Term::constant("c1")),
            (Sym::new("Y"), Term::constant("c2")),
        ]);
        let j = chase_step(&i, &p.rules[0], &eta).unwrap();
        assert_eq!(j.level_of(&ground("t(c2,n1)")), Some(1));
        assert_eq!(j.level_of(&ground("u(c2,n1)")), Some(1));
        let k = chase_step(&j, &p.rules[0], &eta).unwrap();
        assert_eq!(k.atom_set(), j.atom_set());
        assert_eq!(k.next_null, j.next_null);
    }

    #[test]
    fn invalid_trigger_is_rejected() {
        let p = parse_program(SIGMA2).unwrap();
        let i = ChaseInstance::from_database(&p.facts);
        let eta = Substitution::from_pairs([
            (Sym::new("X"), Term::constant("c2")),
            (Sym::new("Y"), Term::constant("c1")),
        ]);
        assert!(matches!(
            chase_step(&i, &p.rules[0], &eta),
            Err(Error::InvalidTrigger { .. })
        ));
    }

    #[test]
    fn full_rules_add_no_nulls() {
        let p = parse_program("e(a,b). e(b,c).\ne(X,Y) -> p(X,Y).\np(X,Y), e(Y,Z) -> p(X,Z).").unwrap();
        let i = chase_to_level(&p.facts, &p.rules, 10, &ChaseOptions::default()).unwrap();
        assert!(i.fixpoint);
        assert!(i.atoms.iter().all(|c| !c.atom.has_nulls()));
        assert!(i.contains(&atom("p(a,c)")));
    }

    #[test]
    fn sigma2_chain_and_pulled_nulls() {
        let p = parse_program(SIGMA2).unwrap();
        let i = chase_to_level(&p.facts, &p.rules, 4, &ChaseOptions::default()).unwrap();
        for a in ["t(c2,n1)", "t(n1,n2)", "t(n2,n3)"] {
            assert!(i.contains(&ground(a)), "{a} missing");
        }
        assert!(i.contains(&ground("t(n1,n3)")));
    }

    #[test]
    fn queries() {
        let p = parse_program(SIGMA2).unwrap();
        let o = ChaseOptions::default();
        assert!(matches!(
            answer_bcq(&p.facts, &p.rules, &p.queries[0], 5, false, &o),
            Answer::No { certified: false, .. }
        ));
        let q = parse_program("?- t(c2,Y).").unwrap().queries.remove(0);
        assert!(matches!(
            answer_bcq(&p.facts, &p.rules, &q, 5, false, &o),
            Answer::Yes { level: 1, .. }
        ));
        let d = parse_program("t(c1,c2). ?- t(X,Y).").unwrap();
        let Answer::Yes { hom, level: 0 } = answer_bcq(&d.facts, &[], &d.queries[0], 3, false, &o) else {
            panic!()
        };
        assert_eq!(hom.get(&Sym::new("X")), Some(&Term::constant("c1")));
    }

    fn instance(atoms: &[&str]) -> ChaseInstance {
        let mut i = ChaseInstance::from_database(&[]);
        for a in atoms {
            i.insert(ground(a), 1, Provenance::Database);
        }
        i
    }

    #[test]
    fn interchangeable_examples() {
        let shape = vec![atom("t(U,V)")];
        let o = ChaseOptions::default();
        let i = instance(&["t(n1,n2)", "t(n3,n3)"]);
        assert!(interchangeable(1, 2, &shape, &i, &o).unwrap());
        let i = instance(&["t(n1,n2)"]);
        assert!(!interchangeable(1, 2, &shape, &i, &o).unwrap());
        let i = instance(&["t(n1,n3)", "t(n2,n4)"]);
        assert!(interchangeable(1, 2, &shape, &i, &o).unwrap());
    }

    #[test]
    fn map_budget_is_enforced() {
        let shape = vec![atom("t(U,V)")];
        let o = ChaseOptions {
            max_maps: 1,
            ..ChaseOptions::default()
        };
        let i = instance(&["t(n1,n2)", "t(n3,n3)"]);
        assert!(matches!(
            interchangeable(1, 2, &shape, &i, &o),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
