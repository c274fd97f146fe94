//! Recursive triangular-components (RTCs) and the triangularly-guarded
//! membership test.
//!
//! An RTC is a pair `⟨B,H⟩` of the extension with two body atoms `a ≠ b`,
//! a head atom `c`, tracked variables `x ∈ a`, `z ∈ b` (both in `c` and
//! both able to carry cyclic nulls) and an atom `a' = aθ` through which
//! `c` feeds back into `a`. A rule set is TG when every RTC has a body
//! atom holding both `x` and `z`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::affected::Affected;
use crate::extension::{compute_extension_until, isomorphism, mark_vars, ExtensionConfig, ExtensionPair};
use crate::model::{Atom, Rule, Substitution, Sym, Term};
use crate::unify::match_atom;

/// How `c` leads back to `a'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleWitness {
    /// `c = a'`.
    CEqualsAPrime,
    /// `c ∈ B'(η∘θ')` and `a' ∈ H'(η∘θ')` for pair `pair` of the extension.
    ViaPair {
        pair: usize,
        theta_prime: Substitution,
        eta: Substitution,
        b_prime: Atom,
        h_prime: Atom,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rtc {
    /// Index of `⟨B,H⟩` in the extension.
    pub pair: usize,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    pub a: Atom,
    pub b: Atom,
    pub c: Atom,
    pub x: Sym,
    pub z: Sym,
    pub a_prime: Atom,
    /// `aθ = a'`.
    pub theta: Substitution,
    pub witness: CycleWitness,
    /// `d1 … dm` from `a` to `b`.
    pub path: Vec<Atom>,
    /// One link variable per step of the path.
    pub links: Vec<Sym>,
    /// The link variable outside `{x, z}` satisfying the marking clause.
    pub y_prime: Sym,
    /// A body atom containing both `x` and `z`, when there is one.
    pub guard: Option<Atom>,
}

impl Rtc {
    pub fn is_guarded(&self) -> bool {
        self.guard.is_some()
    }
}

impl fmt::Display for Rtc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(<{{{}}}, {{{}}}>, <{}, {}, {}>, <{}, {}>, {})",
            crate::model::display_atoms(&self.body),
            crate::model::display_atoms(&self.head),
            self.a,
            self.b,
            self.c,
            self.x,
            self.z,
            self.a_prime
        )
    }
}

/// Limits for the membership test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub extension: ExtensionConfig,
}

impl Budgets {
    pub fn for_rules(rules: &[Rule]) -> Budgets {
        Budgets {
            extension: ExtensionConfig::for_rules(rules),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Member,
    NonMember(Box<Rtc>),
    Unknown(String),
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    pub pairs: Vec<ExtensionPair>,
    pub rtcs: Vec<Rtc>,
    pub saturated: bool,
    pub rounds: usize,
    pub pruned_by_caps: usize,
}

// ---------------------------------------------------------------------
// Candidate a' atoms

struct APrime {
    atom: Atom,
    theta: Substitution,
    witness: CycleWitness,
    /// Fresh variables of `atom` that may still be identified with x.
    free: Vec<Sym>,
}

/// Case (a): `a' = c` with `θ` mapping variables of `a` to variables.
fn a_prime_equal(a: &Atom, c: &Atom) -> Option<APrime> {
    let mut theta = Substitution::new();
    if !match_atom(a, c, &mut theta) || !theta.is_var_to_var() {
        return None;
    }
    Some(APrime {
        atom: c.clone(),
        theta,
        witness: CycleWitness::CEqualsAPrime,
        free: Vec::new(),
    })
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Node {
    Theta(Sym),
    Eta(Sym),
    Rigid(Term),
}

fn find(parent: &mut BTreeMap<Node, Node>, n: &Node) -> Node {
    let mut cur = n.clone();
    while let Some(p) = parent.get(&cur) {
        if *p == cur {
            break;
        }
        cur = p.clone();
    }
    cur
}

/// Case (b): `a'` drawn from the head of another pair whose body has an
/// atom mapping onto `c`.
fn a_prime_via_pairs(a: &Atom, c: &Atom, pairs: &[ExtensionPair]) -> Vec<APrime> {
    let mut out = Vec::new();
    for (pj, p) in pairs.iter().enumerate() {
        if !p.body.iter().any(|b| b.rel == c.rel) || !p.head.iter().any(|h| h.rel == a.rel) {
            continue;
        }
        let theta_prime =
            Substitution::from_pairs(p.vars().into_iter().map(|v| (v.clone(), Term::var(&format!("{v}'")))));
        let body: Vec<Atom> = p.body.iter().map(|x| theta_prime.apply_atom(x)).collect();
        let head: Vec<Atom> = p.head.iter().map(|x| theta_prime.apply_atom(x)).collect();
        for bp in &body {
            let mut eta = Substitution::new();
            if !match_atom(bp, c, &mut eta) {
                continue;
            }
            for hp in head.iter().filter(|h| h.rel == a.rel && h.arity() == a.arity()) {
                if let Some(ap) = unify_onto(a, hp, &eta) {
                    out.push(APrime {
                        witness: CycleWitness::ViaPair {
                            pair: pj,
                            theta_prime: theta_prime.clone(),
                            eta: ap.1,
                            b_prime: bp.clone(),
                            h_prime: hp.clone(),
                        },
                        atom: ap.0,
                        theta: ap.2,
                        free: ap.3,
                    });
                }
            }
        }
    }
    out
}

/// Finds the most general `a'` with `aθ = a' = h'η`, where `θ` maps the
/// variables of `a` to variables and `η` extends `eta`. Returns
/// `(a', η, θ, fresh variables of a')`.
fn unify_onto(a: &Atom, hp: &Atom, eta: &Substitution) -> Option<(Atom, Substitution, Substitution, Vec<Sym>)> {
    let node_a = |t: &Term| match t {
        Term::Var(v) => Node::Theta(v.clone()),
        other => Node::Rigid(other.clone()),
    };
    let node_h = |t: &Term| match t {
        Term::Var(v) => match eta.get(v) {
            Some(bound) => Node::Rigid(bound.clone()),
            None => Node::Eta(v.clone()),
        },
        other => Node::Rigid(other.clone()),
    };
    let mut parent: BTreeMap<Node, Node> = BTreeMap::new();
    let cols: Vec<(Node, Node)> = a
        .args
        .iter()
        .zip(&hp.args)
        .map(|(s, t)| (node_a(s), node_h(t)))
        .collect();
    for (l, r) in &cols {
        parent.entry(l.clone()).or_insert_with(|| l.clone());
        parent.entry(r.clone()).or_insert_with(|| r.clone());
        let (rl, rr) = (find(&mut parent, l), find(&mut parent, r));
        if rl == rr {
            continue;
        }
        match (&rl, &rr) {
            (Node::Rigid(_), Node::Rigid(_)) => return None,
            // Keep a rigid term as the representative of its class.
            (Node::Rigid(_), _) => {
                parent.insert(rr, rl);
            }
            _ => {
                parent.insert(rl, rr);
            }
        }
    }
    let nodes: Vec<Node> = parent.keys().cloned().collect();
    let mut fresh: BTreeMap<Node, Term> = BTreeMap::new();
    let mut free = Vec::new();
    let mut value = |n: &Node, parent: &mut BTreeMap<Node, Node>| -> Term {
        let root = find(parent, n);
        match root {
            Node::Rigid(t) => t,
            other => fresh
                .entry(other)
                .or_insert_with(|| {
                    let v = Sym::new(&format!("_F{}", free.len() + 1));
                    free.push(v.clone());
                    Term::Var(v)
                })
                .clone(),
        }
    };
    let mut theta = Substitution::new();
    let mut eta_full = eta.clone();
    for n in &nodes {
        let val = value(n, &mut parent);
        match n {
            Node::Theta(v) => {
                if !val.is_var() {
                    return None;
                }
                theta.insert(v.clone(), val);
            }
            Node::Eta(v) => {
                eta_full.insert(v.clone(), val);
            }
            Node::Rigid(_) => {}
        }
    }
    let atom = theta.apply_atom(a);
    Some((atom, eta_full, theta, free))
}

/// Identifies the fresh variable `f` of `ap` with `x` everywhere.
fn bind_free(ap: &APrime, f: &Sym, x: &Sym) -> APrime {
    let s = Substitution::from_pairs([(f.clone(), Term::Var(x.clone()))]);
    let witness = match &ap.witness {
        CycleWitness::CEqualsAPrime => CycleWitness::CEqualsAPrime,
        CycleWitness::ViaPair {
            pair,
            theta_prime,
            eta,
            b_prime,
            h_prime,
        } => CycleWitness::ViaPair {
            pair: *pair,
            theta_prime: theta_prime.clone(),
            eta: Substitution::from_pairs(eta.iter().map(|(v, t)| (v.clone(), s.apply_term(t)))),
            b_prime: b_prime.clone(),
            h_prime: h_prime.clone(),
        },
    };
    APrime {
        atom: s.apply_atom(&ap.atom),
        theta: Substitution::from_pairs(ap.theta.iter().map(|(v, t)| (v.clone(), s.apply_term(t)))),
        witness,
        free: ap.free.iter().filter(|v| *v != f).cloned().collect(),
    }
}

// ---------------------------------------------------------------------
// Condition 5

struct PathWitness {
    path: Vec<usize>,
    links: Vec<Sym>,
    y_prime: Sym,
}

/// The marking clause for one candidate link variable.
fn marking_ok(y: &Sym, a: &Atom, a_prime: &Atom, mvar: &BTreeSet<Sym>) -> bool {
    if !a_prime.has_var(y) {
        return true;
    }
    a_prime.positions_of(y).into_iter().all(|i| match &a.args[i] {
        Term::Var(v) => mvar.contains(v),
        _ => true,
    })
}

#[allow(clippy::too_many_arguments)]
fn find_path(
    links: &[Vec<BTreeSet<Sym>>],
    from: usize,
    to: usize,
    x: &Sym,
    z: &Sym,
    a: &Atom,
    a_prime: &Atom,
    mvar: &BTreeSet<Sym>,
) -> Option<PathWitness> {
    let step_ok = |i: usize, j: usize| -> Option<Sym> {
        links[i][j]
            .iter()
            .find(|y| *y != x && *y != z && marking_ok(y, a, a_prime, mvar))
            .cloned()
    };
    let mut path = vec![from];
    let mut on_path = vec![false; links.len()];
    on_path[from] = true;

    fn dfs(
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        links: &[Vec<BTreeSet<Sym>>],
        to: usize,
        step_ok: &dyn Fn(usize, usize) -> Option<Sym>,
    ) -> Option<PathWitness> {
        let cur = *path.last().unwrap();
        if cur == to {
            let steps: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0], w[1])).collect();
            let y_prime = steps.iter().find_map(|&(i, j)| step_ok(i, j))?;
            return Some(PathWitness {
                path: path.clone(),
                links: steps
                    .iter()
                    .map(|&(i, j)| links[i][j].iter().next().unwrap().clone())
                    .collect(),
                y_prime,
            });
        }
        for next in 0..links.len() {
            if on_path[next] || links[cur][next].is_empty() {
                continue;
            }
            on_path[next] = true;
            path.push(next);
            if let Some(w) = dfs(path, on_path, links, to, step_ok) {
                return Some(w);
            }
            path.pop();
            on_path[next] = false;
        }
        None
    }

    dfs(&mut path, &mut on_path, links, to, &step_ok)
}

// ---------------------------------------------------------------------
// Search

/// Every RTC over `pairs`, one per `(pair, a, b, c, x, z, a')`.
pub fn find_rtcs(rules: &[Rule], pairs: &[ExtensionPair]) -> Vec<Rtc> {
    let aff = Affected::new(rules);
    let mut out = Vec::new();
    let mut seen: BTreeSet<(usize, Atom, Atom, Atom, Sym, Sym, Atom)> = BTreeSet::new();

    for (pi, p) in pairs.iter().enumerate() {
        let hat = aff.var_hat(&p.body);
        if hat.len() < 2 {
            continue;
        }
        let n = p.body.len();
        let links: Vec<Vec<BTreeSet<Sym>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BTreeSet::new()
                        } else {
                            p.body[i]
                                .var_set()
                                .intersection(&p.body[j].var_set())
                                .filter(|v| hat.contains(*v))
                                .cloned()
                                .collect()
                        }
                    })
                    .collect()
            })
            .collect();

        for c in &p.head {
            let cv: Vec<Sym> = c.var_set().intersection(&hat).cloned().collect();
            if cv.len() < 2 {
                continue;
            }
            let mut a_primes: BTreeMap<usize, Vec<APrime>> = BTreeMap::new();
            for x in &cv {
                for z in &cv {
                    if x == z {
                        continue;
                    }
                    for ai in 0..n {
                        let a = &p.body[ai];
                        if !a.has_var(x) {
                            continue;
                        }
                        let bs: Vec<usize> = (0..n).filter(|&bi| bi != ai && p.body[bi].has_var(z)).collect();
                        if bs.is_empty() {
                            continue;
                        }
                        let cands = a_primes.entry(ai).or_insert_with(|| {
                            let mut v: Vec<APrime> = a_prime_equal(a, c).into_iter().collect();
                            v.extend(a_prime_via_pairs(a, c, pairs));
                            v
                        });
                        let mut variants: Vec<APrime> = Vec::new();
                        for ap in cands.iter() {
                            if ap.atom.has_var(x) {
                                variants.push(APrime {
                                    atom: ap.atom.clone(),
                                    theta: ap.theta.clone(),
                                    witness: ap.witness.clone(),
                                    free: ap.free.clone(),
                                });
                            } else {
                                for f in &ap.free {
                                    variants.push(bind_free(ap, f, x));
                                }
                            }
                        }
                        for ap in variants {
                            let Ok(mvar) = mark_vars(a, c, &ap.atom) else {
                                continue;
                            };
                            for &bi in &bs {
                                let key = (
                                    pi,
                                    a.clone(),
                                    p.body[bi].clone(),
                                    c.clone(),
                                    x.clone(),
                                    z.clone(),
                                    ap.atom.clone(),
                                );
                                if seen.contains(&key) {
                                    continue;
                                }
                                let Some(w) = find_path(&links, ai, bi, x, z, a, &ap.atom, &mvar) else {
                                    continue;
                                };
                                seen.insert(key);
                                let guard = p.body.iter().find(|d| d.has_var(x) && d.has_var(z)).cloned();
                                out.push(Rtc {
                                    pair: pi,
                                    body: p.body.clone(),
                                    head: p.head.clone(),
                                    a: a.clone(),
                                    b: p.body[bi].clone(),
                                    c: c.clone(),
                                    x: x.clone(),
                                    z: z.clone(),
                                    a_prime: ap.atom.clone(),
                                    theta: ap.theta.clone(),
                                    witness: ap.witness.clone(),
                                    path: w.path.iter().map(|&k| p.body[k].clone()).collect(),
                                    links: w.links,
                                    y_prime: w.y_prime,
                                    guard,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Ordering used to pick a reproducible witness: syntactic cycles first,
/// then earlier pairs, then the position of the atoms involved.
fn witness_key(r: &Rtc, pairs: &[ExtensionPair]) -> impl Ord {
    let case = match r.witness {
        CycleWitness::CEqualsAPrime => 0,
        CycleWitness::ViaPair { .. } => 1,
    };
    let idx = |atoms: &[Atom], x: &Atom| atoms.iter().position(|y| y == x).unwrap_or(usize::MAX);
    let pos = |v: &Sym| r.c.positions_of(v).first().copied().unwrap_or(usize::MAX);
    (
        case,
        pairs[r.pair].round,
        r.pair,
        idx(&r.head, &r.c),
        pos(&r.x),
        pos(&r.z),
        idx(&r.body, &r.a),
        idx(&r.body, &r.b),
        r.a_prime.to_string(),
    )
}

/// Decides membership in TG within the given budgets.
pub fn is_triangularly_guarded(rules: &[Rule], budgets: &Budgets) -> Verdict {
    // RTCs are searched after every round. An unguarded one whose cycle
    // closes inside its own pair settles the question at once; cycles that
    // go through another pair are only reported once the run has ended,
    // so that a self-contained witness is preferred when one exists.
    let mut found: Vec<Rtc> = Vec::new();
    let ext = compute_extension_until(rules, &budgets.extension, |pairs| {
        found = find_rtcs(rules, pairs);
        found
            .iter()
            .any(|r| !r.is_guarded() && matches!(r.witness, CycleWitness::CEqualsAPrime))
    });
    let rtcs = found;
    let witness = rtcs
        .iter()
        .filter(|r| !r.is_guarded())
        .min_by_key(|r| witness_key(r, &ext.pairs))
        .cloned();
    let outcome = match (witness, ext.saturated) {
        (Some(w), _) => Outcome::NonMember(Box::new(w)),
        (None, true) => Outcome::Member,
        (None, false) => Outcome::Unknown(
            ext.stop_reason
                .clone()
                .unwrap_or_else(|| "extension did not saturate".into()),
        ),
    };
    Verdict {
        outcome,
        pairs: ext.pairs,
        rtcs,
        saturated: ext.saturated,
        rounds: ext.rounds,
        pruned_by_caps: ext.pruned_by_caps,
    }
}

// ---------------------------------------------------------------------
// Independent checks

/// Re-checks every condition of an RTC from scratch. Returns a description
/// of the first failed condition.
pub fn validate_rtc(rules: &[Rule], pairs: &[ExtensionPair], r: &Rtc) -> std::result::Result<(), String> {
    let p = pairs.get(r.pair).ok_or("pair index out of range")?;
    if p.body != r.body || p.head != r.head {
        return Err("pair differs from the extension".into());
    }
    if !r.body.contains(&r.a) || !r.body.contains(&r.b) || r.a == r.b {
        return Err("a and b must be distinct body atoms".into());
    }
    if !r.head.contains(&r.c) {
        return Err("c must be a head atom".into());
    }
    if r.theta.apply_atom(&r.a) != r.a_prime || !r.theta.is_var_to_var() {
        return Err("a theta must equal a' with theta mapping variables to variables".into());
    }
    match &r.witness {
        CycleWitness::CEqualsAPrime => {
            if r.c != r.a_prime {
                return Err("c must equal a'".into());
            }
        }
        CycleWitness::ViaPair {
            pair, theta_prime, eta, ..
        } => {
            let q = pairs.get(*pair).ok_or("second pair index out of range")?;
            let renamed = q.vars().iter().all(|v| {
                theta_prime
                    .get(v)
                    .and_then(Term::as_var)
                    .is_some_and(|w| !p.vars().contains(w))
            });
            if !renamed {
                return Err("theta' must rename the second pair apart".into());
            }
            let map = |atoms: &[Atom]| -> Vec<Atom> {
                atoms
                    .iter()
                    .map(|x| eta.apply_atom(&theta_prime.apply_atom(x)))
                    .collect()
            };
            if eta.iter().any(|(_, t)| t.is_null()) {
                return Err("eta must map into constants and variables".into());
            }
            if !map(&q.body).contains(&r.c) {
                return Err("c is not in B'(eta o theta')".into());
            }
            if !map(&q.head).contains(&r.a_prime) {
                return Err("a' is not in H'(eta o theta')".into());
            }
        }
    }
    let aff = Affected::new(rules);
    let hat = aff.var_hat(&r.body);
    if r.x == r.z
        || !hat.contains(&r.x)
        || !hat.contains(&r.z)
        || !r.a.has_var(&r.x)
        || !r.b.has_var(&r.z)
        || !r.c.has_var(&r.x)
        || !r.c.has_var(&r.z)
        || !r.a_prime.has_var(&r.x)
    {
        return Err("tracked variables violate their placement conditions".into());
    }
    if r.path.first() != Some(&r.a) || r.path.last() != Some(&r.b) {
        return Err("path must run from a to b".into());
    }
    let distinct: BTreeSet<&Atom> = r.path.iter().collect();
    if distinct.len() != r.path.len() || r.links.len() + 1 != r.path.len() {
        return Err("path atoms must be distinct with one link per step".into());
    }
    let mut y_ok = false;
    let mvar = mark_vars(&r.a, &r.c, &r.a_prime).map_err(|e| e.to_string())?;
    for (k, w) in r.path.windows(2).enumerate() {
        let l = aff.link(&r.body, &w[0], &w[1]).map_err(|e| e.to_string())?;
        if !l.contains(&r.links[k]) {
            return Err(format!("{} is not a link variable of step {}", r.links[k], k + 1));
        }
        if l.contains(&r.y_prime) && r.y_prime != r.x && r.y_prime != r.z {
            y_ok |= marking_ok(&r.y_prime, &r.a, &r.a_prime, &mvar);
        }
    }
    if !y_ok {
        return Err("no link variable satisfies the marking clause".into());
    }
    let guarded = r.body.iter().any(|d| d.has_var(&r.x) && d.has_var(&r.z));
    if guarded != r.guard.is_some() {
        return Err("guard status is wrong".into());
    }
    Ok(())
}

/// Encodes an RTC as one atom set so that RTC isomorphism reduces to
/// pair isomorphism.
fn rtc_shape(
    body: &[Atom],
    head: &[Atom],
    abc: [&Atom; 3],
    xz: (&Sym, &Sym),
    a_prime: &Atom,
) -> (Vec<Atom>, Vec<Atom>) {
    let tag = |name: &str, a: &Atom| {
        let mut args = vec![Term::constant(a.rel.as_str())];
        args.extend(a.args.iter().cloned());
        Atom::new(name, args)
    };
    let mut h = head.to_vec();
    h.push(tag("$a", abc[0]));
    h.push(tag("$b", abc[1]));
    h.push(tag("$c", abc[2]));
    h.push(tag("$ap", a_prime));
    h.push(Atom::new("$xz", vec![Term::Var(xz.0.clone()), Term::Var(xz.1.clone())]));
    (body.to_vec(), h)
}

/// True when `r` equals the described RTC up to a variable renaming.
#[allow(clippy::too_many_arguments)]
pub fn rtc_matches(
    r: &Rtc,
    body: &[Atom],
    head: &[Atom],
    a: &Atom,
    b: &Atom,
    c: &Atom,
    x: &Sym,
    z: &Sym,
    a_prime: &Atom,
) -> bool {
    let left = rtc_shape(&r.body, &r.head, [&r.a, &r.b, &r.c], (&r.x, &r.z), &r.a_prime);
    let right = rtc_shape(body, head, [a, b, c], (x, z), a_prime);
    isomorphism((&left.0, &left.1), (&right.0, &right.1)).is_some()
}
