//! The TGD extension: pairs `⟨B, H⟩` closed under composition of a head
//! with a later body through a most general unifier. Also home of the
//! markup procedure used by the RTC search.
//!
//! Composition of `⟨B1,H1⟩` with `⟨B2,H2⟩`:
//!
//! 1. rename the second pair apart (θ),
//! 2. pick nonempty `H1' ⊆ H1`, `B2' ⊆ B2θ` and unify them as sets,
//! 3. variables of `B1` outside `H1'` must stay untouched,
//! 4. existential variables of `H1` must stay distinct from every other
//!    left term, and right variables bound to them must not survive
//!    outside `B2'`,
//! 5. emit `⟨B1σ ∪ (B2θσ ∖ B2'σ), H2θσ⟩`.
//!
//! Point 4 is the usual piece condition: an existential stands for a fresh
//! null, which no atom outside the derivation can mention.
//!
//! The set of pairs is usually infinite up to isomorphism (bodies keep
//! growing), so pairs with more body atoms than
//! [`ExtensionConfig::max_body`] or more variables than
//! [`ExtensionConfig::max_vars`] are dropped and counted. All other limits
//! mark the run as not saturated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{display_atoms, vars_of, Atom, Rule, Substitution, Sym, Term};
use crate::unify::{pairings, unify_pairs};

/// How a pair was obtained from two earlier pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    /// Index of `⟨B1,H1⟩` in the pair list.
    pub left: usize,
    /// Index of `⟨B2,H2⟩` in the pair list.
    pub right: usize,
    /// `(index into H1, index into B2)` for every unified atom pair.
    pub pairing: Vec<(usize, usize)>,
    /// The unifier, over the left variables and the renamed right ones.
    pub unifier: Substitution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionPair {
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    /// First round in which the pair (up to renaming) appeared.
    pub round: usize,
    /// `None` for round-0 pairs, which come straight from a rule.
    pub derivation: Option<Derivation>,
    /// Rule a round-0 pair was taken from.
    pub rule: Option<Sym>,
}

impl ExtensionPair {
    pub fn vars(&self) -> BTreeSet<Sym> {
        vars_of(self.body.iter().chain(&self.head))
    }
}

impl fmt::Display for ExtensionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{{{}}}, {{{}}}>",
            display_atoms(&self.body),
            display_atoms(&self.head)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionConfig {
    pub max_rounds: usize,
    pub max_pairs: usize,
    /// Largest `H1'` / `B2'` subset considered.
    pub max_subset: usize,
    /// Largest body kept in the pair universe.
    pub max_body: usize,
    /// Most distinct variables a kept pair may mention.
    pub max_vars: usize,
}

impl ExtensionConfig {
    pub fn for_rules(rules: &[Rule]) -> ExtensionConfig {
        let max_arity = rules.iter().map(Rule::max_arity).max().unwrap_or(0).max(1);
        let max_body = rules.iter().map(|r| r.body.len()).max().unwrap_or(0);
        let max_vars = rules
            .iter()
            .map(|r| vars_of(r.body.iter().chain(&r.head)).len())
            .max()
            .unwrap_or(0);
        ExtensionConfig {
            max_rounds: (2 * rules.len() * max_arity).max(1),
            max_pairs: 10_000,
            max_subset: 4,
            max_body,
            max_vars,
        }
    }
}

/// Result of [`compute_extension`].
#[derive(Clone, Debug)]
pub struct Extension {
    pub pairs: Vec<ExtensionPair>,
    /// A round produced nothing new and no limit other than the body cap
    /// was involved.
    pub saturated: bool,
    pub rounds: usize,
    /// Candidate pairs discarded by the body or variable cap.
    pub pruned_by_caps: usize,
    /// Why the run is not saturated, if it is not.
    pub stop_reason: Option<String>,
}

// ---------------------------------------------------------------------
// Canonical naming and isomorphism

fn side_atoms<'a>(body: &'a [Atom], head: &'a [Atom]) -> impl Iterator<Item = (u8, &'a Atom)> {
    body.iter().map(|a| (0u8, a)).chain(head.iter().map(|a| (1u8, a)))
}

/// Rename-invariant colour of each variable, by iterated refinement over
/// the positions it occupies and the colours of its neighbours.
fn var_colors(body: &[Atom], head: &[Atom]) -> BTreeMap<Sym, usize> {
    let vars = vars_of(body.iter().chain(head));
    let mut color: BTreeMap<Sym, usize> = vars.iter().map(|v| (v.clone(), 0)).collect();
    let mut classes = 1;
    for _ in 0..4 {
        let mut sig: BTreeMap<Sym, Vec<String>> = BTreeMap::new();
        for (side, a) in side_atoms(body, head) {
            let shape: Vec<String> = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => format!("v{}", color[v]),
                    other => format!("c{other}"),
                })
                .collect();
            for (i, t) in a.args.iter().enumerate() {
                if let Term::Var(v) = t {
                    sig.entry(v.clone())
                        .or_default()
                        .push(format!("{side}|{}|{i}|{}", a.rel, shape.join(",")));
                }
            }
        }
        let keyed: BTreeMap<Sym, (usize, Vec<String>)> = sig
            .into_iter()
            .map(|(v, mut s)| {
                s.sort();
                let c = color[&v];
                (v, (c, s))
            })
            .collect();
        let distinct: BTreeSet<&(usize, Vec<String>)> = keyed.values().collect();
        let rank: BTreeMap<&(usize, Vec<String>), usize> = distinct.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let next: BTreeMap<Sym, usize> = keyed.iter().map(|(v, k)| (v.clone(), rank[k])).collect();
        let n = rank.len();
        color = next;
        if n == classes {
            break;
        }
        classes = n;
    }
    color
}

type AtomKey = (u8, Sym, Vec<(u8, String, usize)>);

fn atom_key(side: u8, a: &Atom, color: &BTreeMap<Sym, usize>) -> AtomKey {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => (1u8, String::new(), color[v]),
            other => (0u8, other.to_string(), 0),
        })
        .collect();
    (side, a.rel.clone(), args)
}

/// Rename-invariant bucket key: pairs that are isomorphic share a key.
fn invariant_key(body: &[Atom], head: &[Atom]) -> Vec<AtomKey> {
    let color = var_colors(body, head);
    let mut keys: Vec<AtomKey> = side_atoms(body, head).map(|(s, a)| atom_key(s, a, &color)).collect();
    keys.sort();
    keys
}

/// Renames variables to `X1, X2, ...` in a rename-invariant order where
/// possible, and sorts both atom sets.
pub fn canonicalize(body: &[Atom], head: &[Atom]) -> (Vec<Atom>, Vec<Atom>) {
    let color = var_colors(body, head);
    let mut order: Vec<(u8, &Atom)> = side_atoms(body, head).collect();
    order.sort_by(|(s1, a1), (s2, a2)| {
        atom_key(*s1, a1, &color)
            .cmp(&atom_key(*s2, a2, &color))
            .then_with(|| a1.cmp(a2))
    });
    let mut names = Substitution::new();
    let mut next = 1;
    for (_, a) in &order {
        for v in a.vars() {
            if !names.contains(v) {
                names.insert(v.clone(), Term::var(&format!("X{next}")));
                next += 1;
            }
        }
    }
    let mut b: Vec<Atom> = crate::model::apply_substitution(body, &names);
    let mut h: Vec<Atom> = crate::model::apply_substitution(head, &names);
    b.sort();
    h.sort();
    (b, h)
}

/// A variable bijection mapping `p` onto `q` atom set by atom set, if one
/// exists.
pub fn isomorphism(p: (&[Atom], &[Atom]), q: (&[Atom], &[Atom])) -> Option<Substitution> {
    if p.0.len() != q.0.len() || p.1.len() != q.1.len() {
        return None;
    }
    let left: Vec<(u8, &Atom)> = side_atoms(p.0, p.1).collect();
    let right: Vec<(u8, &Atom)> = side_atoms(q.0, q.1).collect();
    let mut used = vec![false; right.len()];
    let mut fwd: BTreeMap<Sym, Sym> = BTreeMap::new();
    let mut bwd: BTreeMap<Sym, Sym> = BTreeMap::new();

    fn extend(a: &Atom, b: &Atom, fwd: &mut BTreeMap<Sym, Sym>, bwd: &mut BTreeMap<Sym, Sym>) -> Option<Vec<Sym>> {
        if a.rel != b.rel || a.arity() != b.arity() {
            return None;
        }
        let mut added = Vec::new();
        let undo = |added: &Vec<Sym>, fwd: &mut BTreeMap<Sym, Sym>, bwd: &mut BTreeMap<Sym, Sym>| {
            for v in added {
                if let Some(w) = fwd.remove(v) {
                    bwd.remove(&w);
                }
            }
        };
        for (s, t) in a.args.iter().zip(&b.args) {
            let ok = match (s, t) {
                (Term::Var(x), Term::Var(y)) => match (fwd.get(x), bwd.get(y)) {
                    (Some(fy), _) => fy == y,
                    (None, Some(_)) => false,
                    (None, None) => {
                        fwd.insert(x.clone(), y.clone());
                        bwd.insert(y.clone(), x.clone());
                        added.push(x.clone());
                        true
                    }
                },
                (Term::Var(_), _) | (_, Term::Var(_)) => false,
                _ => s == t,
            };
            if !ok {
                undo(&added, fwd, bwd);
                return None;
            }
        }
        Some(added)
    }

    fn rec(
        i: usize,
        left: &[(u8, &Atom)],
        right: &[(u8, &Atom)],
        used: &mut [bool],
        fwd: &mut BTreeMap<Sym, Sym>,
        bwd: &mut BTreeMap<Sym, Sym>,
    ) -> bool {
        if i == left.len() {
            return true;
        }
        let (side, a) = left[i];
        for j in 0..right.len() {
            if used[j] || right[j].0 != side {
                continue;
            }
            if let Some(added) = extend(a, right[j].1, fwd, bwd) {
                used[j] = true;
                if rec(i + 1, left, right, used, fwd, bwd) {
                    return true;
                }
                used[j] = false;
                for v in added {
                    if let Some(w) = fwd.remove(&v) {
                        bwd.remove(&w);
                    }
                }
            }
        }
        false
    }

    if rec(0, &left, &right, &mut used, &mut fwd, &mut bwd) {
        Some(Substitution::from_pairs(
            fwd.into_iter().map(|(x, y)| (x, Term::Var(y))),
        ))
    } else {
        None
    }
}

/// True when the two pairs are equal up to a bijective variable renaming.
pub fn isomorphic(p: (&[Atom], &[Atom]), q: (&[Atom], &[Atom])) -> bool {
    isomorphism(p, q).is_some()
}

// ---------------------------------------------------------------------
// Composition

fn renaming_apart(p: &ExtensionPair) -> Substitution {
    Substitution::from_pairs(p.vars().into_iter().map(|v| {
        let renamed = Term::var(&format!("{v}'"));
        (v, renamed)
    }))
}

/// Composes `left` with `right` along one pairing of head atoms of `left`
/// with body atoms of `right`. Returns the new (non-canonical) body and
/// head together with the unifier.
fn compose(
    left: &ExtensionPair,
    right: &ExtensionPair,
    pairing: &[(usize, usize)],
) -> Option<(Vec<Atom>, Vec<Atom>, Substitution)> {
    let theta = renaming_apart(right);
    let b2: Vec<Atom> = right.body.iter().map(|a| theta.apply_atom(a)).collect();
    let h2: Vec<Atom> = right.head.iter().map(|a| theta.apply_atom(a)).collect();
    let left_vars = left.vars();
    let pairs: Vec<(&Atom, &Atom)> = pairing.iter().map(|&(i, j)| (&left.head[i], &b2[j])).collect();
    let sigma = unify_pairs(&pairs, &|v| left_vars.contains(v))?;

    // Body variables of the left pair outside H1' must not move.
    let h1_sub: Vec<&Atom> = pairing.iter().map(|&(i, _)| &left.head[i]).collect();
    let h1_vars = vars_of(h1_sub.iter().copied());
    for x in vars_of(&left.body) {
        if !h1_vars.contains(&x) && sigma.contains(&x) {
            return None;
        }
    }

    // Existential variables of the left pair stand for fresh nulls. They
    // cannot be equated with any other left term, and whatever right
    // variable they absorb must be consumed by the unified atoms.
    let left_body_vars = vars_of(&left.body);
    let existentials: BTreeSet<Sym> = vars_of(&left.head)
        .into_iter()
        .filter(|v| !left_body_vars.contains(v))
        .collect();
    let fresh: Vec<Term> = existentials
        .iter()
        .map(|v| sigma.apply_term(&Term::Var(v.clone())))
        .collect();
    for (k, img) in fresh.iter().enumerate() {
        if !img.is_var() || fresh[..k].contains(img) {
            return None;
        }
        let clash = left_vars
            .iter()
            .any(|v| !existentials.contains(v) && sigma.apply_term(&Term::Var(v.clone())) == *img);
        if clash {
            return None;
        }
    }

    let b2_sub: BTreeSet<Atom> = pairing.iter().map(|&(_, j)| sigma.apply_atom(&b2[j])).collect();
    let mut body: Vec<Atom> = left.body.iter().map(|a| sigma.apply_atom(a)).collect();
    for a in &b2 {
        let a = sigma.apply_atom(a);
        if !b2_sub.contains(&a) {
            if a.args.iter().any(|t| fresh.contains(t)) {
                return None;
            }
            body.push(a);
        }
    }
    let body = crate::model::dedup_atoms(body);
    let head = crate::model::dedup_atoms(h2.iter().map(|a| sigma.apply_atom(a)));
    Some((body, head, sigma))
}

fn nonempty_subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << n.min(20)) {
        if (mask.count_ones() as usize) <= max {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

struct Candidate {
    body: Vec<Atom>,
    head: Vec<Atom>,
    derivation: Derivation,
}

/// Every composition of `left` with `right`, plus whether the subset cap
/// hid larger compatible subsets.
fn combine(
    li: usize,
    left: &ExtensionPair,
    ri: usize,
    right: &ExtensionPair,
    max_subset: usize,
) -> (Vec<Candidate>, bool) {
    let h_rels: BTreeSet<&Sym> = left.head.iter().map(|a| &a.rel).collect();
    let b_rels: BTreeSet<&Sym> = right.body.iter().map(|a| &a.rel).collect();
    let h_idx: Vec<usize> = (0..left.head.len())
        .filter(|&i| b_rels.contains(&left.head[i].rel))
        .collect();
    let b_idx: Vec<usize> = (0..right.body.len())
        .filter(|&j| h_rels.contains(&right.body[j].rel))
        .collect();
    let truncated = h_idx.len() > max_subset || b_idx.len() > max_subset;

    let mut out = Vec::new();
    let mut seen: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    for hs in nonempty_subsets(h_idx.len(), max_subset) {
        let hs: Vec<usize> = hs.into_iter().map(|k| h_idx[k]).collect();
        let hs_rels: BTreeSet<&Sym> = hs.iter().map(|&i| &left.head[i].rel).collect();
        for bs in nonempty_subsets(b_idx.len(), max_subset) {
            let bs: Vec<usize> = bs.into_iter().map(|k| b_idx[k]).collect();
            let bs_rels: BTreeSet<&Sym> = bs.iter().map(|&j| &right.body[j].rel).collect();
            if hs_rels != bs_rels {
                continue;
            }
            let h_atoms: Vec<Atom> = hs.iter().map(|&i| left.head[i].clone()).collect();
            let b_atoms: Vec<Atom> = bs.iter().map(|&j| right.body[j].clone()).collect();
            for p in pairings(&h_atoms, &b_atoms) {
                let mut pairing: Vec<(usize, usize)> = p.iter().map(|&(i, j)| (hs[i], bs[j])).collect();
                pairing.sort();
                if !seen.insert(pairing.clone()) {
                    continue;
                }
                if let Some((body, head, unifier)) = compose(left, right, &pairing) {
                    out.push(Candidate {
                        body,
                        head,
                        derivation: Derivation {
                            left: li,
                            right: ri,
                            pairing,
                            unifier,
                        },
                    });
                }
            }
        }
    }
    (out, truncated)
}

// ---------------------------------------------------------------------
// The pair store

#[derive(Default)]
struct Store {
    pairs: Vec<ExtensionPair>,
    buckets: HashMap<Vec<AtomKey>, Vec<usize>>,
}

impl Store {
    /// Inserts a pair unless an isomorphic one is present. Returns whether
    /// it was new.
    fn insert(
        &mut self,
        body: Vec<Atom>,
        head: Vec<Atom>,
        round: usize,
        derivation: Option<Derivation>,
        rule: Option<Sym>,
    ) -> bool {
        let (body, head) = canonicalize(&body, &head);
        let key = invariant_key(&body, &head);
        let bucket = self.buckets.entry(key).or_default();
        for &i in bucket.iter() {
            let p = &self.pairs[i];
            if isomorphic((&p.body, &p.head), (&body, &head)) {
                return false;
            }
        }
        bucket.push(self.pairs.len());
        self.pairs.push(ExtensionPair {
            body,
            head,
            round,
            derivation,
            rule,
        });
        true
    }
}

/// Round-0 pairs: one `⟨bd(σ), hd(σ)⟩` per rule, canonically renamed.
/// Rules that are identical up to renaming give one pair.
pub fn extension_base(rules: &[Rule]) -> Vec<ExtensionPair> {
    let mut store = Store::default();
    for r in rules {
        store.insert(r.body.clone(), r.head.clone(), 0, None, Some(r.id.clone()));
    }
    store.pairs
}

fn store_from(pairs: &[ExtensionPair]) -> Store {
    let mut store = Store::default();
    for p in pairs {
        let key = invariant_key(&p.body, &p.head);
        store.buckets.entry(key).or_default().push(store.pairs.len());
        store.pairs.push(p.clone());
    }
    store
}

struct RoundOutcome {
    added: usize,
    pruned: usize,
    truncated: bool,
    hit_pair_limit: bool,
}

fn run_round(store: &mut Store, frontier: usize, round: usize, cfg: &ExtensionConfig) -> RoundOutcome {
    let n = store.pairs.len();
    let mut out = RoundOutcome {
        added: 0,
        pruned: 0,
        truncated: false,
        hit_pair_limit: false,
    };
    for i in 0..n {
        for j in 0..n {
            if i < frontier && j < frontier {
                continue;
            }
            let (cands, truncated) = combine(i, &store.pairs[i], j, &store.pairs[j], cfg.max_subset);
            out.truncated |= truncated;
            for c in cands {
                if c.body.len() > cfg.max_body || vars_of(c.body.iter().chain(&c.head)).len() > cfg.max_vars {
                    out.pruned += 1;
                    continue;
                }
                if store.insert(c.body, c.head, round, Some(c.derivation), None) {
                    out.added += 1;
                    if store.pairs.len() >= cfg.max_pairs {
                        out.hit_pair_limit = true;
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// One full round over every ordered combination of `pairs`. Returns the
/// old pairs followed by the new isomorphism classes.
pub fn extension_step(pairs: &[ExtensionPair], cfg: &ExtensionConfig) -> Vec<ExtensionPair> {
    let mut store = store_from(pairs);
    let round = pairs.iter().map(|p| p.round).max().map_or(0, |r| r + 1);
    run_round(&mut store, 0, round, cfg);
    store.pairs
}

/// Iterates rounds until nothing new appears or a limit trips.
pub fn compute_extension(rules: &[Rule], cfg: &ExtensionConfig) -> Extension {
    compute_extension_until(rules, cfg, |_| false)
}

/// Like [`compute_extension`], but calls `stop` with the pairs after the
/// base round and after every later round. Returning `true` ends the run
/// early; the result is then reported as not saturated.
pub fn compute_extension_until(
    rules: &[Rule],
    cfg: &ExtensionConfig,
    mut stop: impl FnMut(&[ExtensionPair]) -> bool,
) -> Extension {
    let mut store = store_from(&extension_base(rules));
    let mut frontier = 0;
    let mut pruned = 0;
    let mut rounds = 0;
    let mut stop_reason = None;
    let mut saturated = store.pairs.is_empty();
    let mut early = stop(&store.pairs);
    while !saturated && !early && stop_reason.is_none() {
        if rounds >= cfg.max_rounds {
            stop_reason = Some(format!("round limit {} reached", cfg.max_rounds));
            break;
        }
        let before = store.pairs.len();
        let r = run_round(&mut store, frontier, rounds + 1, cfg);
        rounds += 1;
        pruned += r.pruned;
        if r.hit_pair_limit {
            stop_reason = Some(format!("pair limit {} reached", cfg.max_pairs));
        } else if r.truncated {
            stop_reason = Some(format!(
                "unification subsets larger than {} were skipped",
                cfg.max_subset
            ));
        } else if r.added == 0 {
            saturated = true;
        }
        frontier = before;
        if r.added > 0 {
            early = stop(&store.pairs);
        }
    }
    if early {
        saturated = false;
        stop_reason = Some("stopped early by caller".into());
    }
    Extension {
        pairs: store.pairs,
        saturated,
        rounds,
        pruned_by_caps: pruned,
        stop_reason,
    }
}

/// Re-derives pair `idx` from its recorded parents and unification and
/// reports whether the result equals the stored pair.
pub fn replay(pairs: &[ExtensionPair], idx: usize) -> bool {
    let p = &pairs[idx];
    let Some(d) = &p.derivation else {
        return p.round == 0;
    };
    let Some((body, head, sigma)) = compose(&pairs[d.left], &pairs[d.right], &d.pairing) else {
        return false;
    };
    let (body, head) = canonicalize(&body, &head);
    sigma == d.unifier && body == p.body && head == p.head
}

// ---------------------------------------------------------------------
// Markup

/// Marks of the markup procedure on `(a, c, a')`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Markup {
    /// Marked variables of `a` at the fixpoint (this is `m-var`).
    pub marked_a: BTreeSet<Sym>,
    pub marked_c: BTreeSet<Sym>,
}

/// Runs the markup procedure to its fixpoint.
///
/// Base: a variable of `a` absent from `c` is marked in `a`; a variable of
/// `c` absent from `a'` is marked in `c`. Step: a variable marked in `c`
/// becomes marked in `a`; a variable X of `a'` (also in `c`) becomes
/// marked in `c` once every variable of `a` at the positions of X in `a'`
/// is marked.
pub fn markup(a: &Atom, c: &Atom, a_prime: &Atom) -> Result<Markup> {
    if a.rel != a_prime.rel || a.arity() != a_prime.arity() {
        return Err(Error::RelationMismatch(a.to_string(), a_prime.to_string()));
    }
    let va = a.var_set();
    let vc = c.var_set();
    let vp = a_prime.var_set();
    let mut m = Markup {
        marked_a: va.difference(&vc).cloned().collect(),
        marked_c: vc.difference(&vp).cloned().collect(),
    };
    loop {
        let mut changed = false;
        for x in &m.marked_c.clone() {
            if va.contains(x) && m.marked_a.insert(x.clone()) {
                changed = true;
            }
        }
        for x in &vp {
            if !vc.contains(x) || m.marked_c.contains(x) {
                continue;
            }
            let all_marked = a_prime.positions_of(x).into_iter().all(|i| match &a.args[i] {
                Term::Var(v) => m.marked_a.contains(v),
                _ => true,
            });
            if all_marked {
                m.marked_c.insert(x.clone());
                changed = true;
            }
        }
        if !changed {
            return Ok(m);
        }
    }
}

/// `m-var(a, c, a')`.
pub fn mark_vars(a: &Atom, c: &Atom, a_prime: &Atom) -> Result<BTreeSet<Sym>> {
    markup(a, c, a_prime).map(|m| m.marked_a)
}
