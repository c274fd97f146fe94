//! Null-sets, the existential dependency graph, cyclic nulls, and the
//! var-hat / link variables of a body.
//!
//! A null symbol `n[σ.Z]` stands for every labeled null that rule σ may
//! invent for its existential variable Z. The null-set of an argument
//! position collects the symbols that can reach it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Atom, Rule, Sym, Term};

/// The symbol `n_Z^σ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NullSymbol {
    pub rule: Sym,
    pub var: Sym,
}

impl fmt::Display for NullSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n[{}.{}]", self.rule, self.var)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    Body,
    Head,
}

/// One argument position of one atom occurrence inside a rule. Repeated
/// atoms in a rule are distinct occurrences.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Occurrence {
    pub rule: usize,
    pub side: Side,
    pub atom: usize,
    pub arg: usize,
}

type Nulls = BTreeSet<NullSymbol>;

/// Least fixpoint of the null-set definition over a rule list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NullSetTable {
    pub entries: BTreeMap<Occurrence, Nulls>,
}

fn atom_of<'r>(rules: &'r [Rule], o: &Occurrence) -> &'r Atom {
    let r = &rules[o.rule];
    match o.side {
        Side::Body => &r.body[o.atom],
        Side::Head => &r.head[o.atom],
    }
}

fn occurrences(rules: &[Rule]) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for (ri, r) in rules.iter().enumerate() {
        for (side, atoms) in [(Side::Body, &r.body), (Side::Head, &r.head)] {
            for (ai, a) in atoms.iter().enumerate() {
                for arg in 0..a.arity() {
                    out.push(Occurrence {
                        rule: ri,
                        side,
                        atom: ai,
                        arg,
                    });
                }
            }
        }
    }
    out
}

impl NullSetTable {
    pub fn get(&self, o: &Occurrence) -> Nulls {
        self.entries.get(o).cloned().unwrap_or_default()
    }

    /// Union of the null-sets of every head occurrence of `rel` at `arg`.
    pub fn head_union(&self, rules: &[Rule], rel: &Sym, arg: usize) -> Nulls {
        let mut out = Nulls::new();
        for (o, s) in &self.entries {
            if o.side == Side::Head && o.arg == arg && atom_of(rules, o).rel == *rel {
                out.extend(s.iter().cloned());
            }
        }
        out
    }

    /// `⋂nullset(Y, σ)`: intersection over the body occurrences of `var` in
    /// rule `rule`. Empty when the variable has no body occurrence.
    pub fn body_intersection(&self, rules: &[Rule], rule: usize, var: &Sym) -> Nulls {
        let mut acc: Option<Nulls> = None;
        for (ai, a) in rules[rule].body.iter().enumerate() {
            for arg in a.positions_of(var) {
                let s = self.get(&Occurrence {
                    rule,
                    side: Side::Body,
                    atom: ai,
                    arg,
                });
                acc = Some(match acc {
                    None => s,
                    Some(prev) => prev.intersection(&s).cloned().collect(),
                });
            }
        }
        acc.unwrap_or_default()
    }

    /// One application of the inductive definition to `self`.
    fn step(&self, rules: &[Rule], occs: &[Occurrence]) -> NullSetTable {
        let mut entries = BTreeMap::new();
        for o in occs {
            let term = &atom_of(rules, o).args[o.arg];
            let set = match (o.side, term) {
                (_, Term::Const(_) | Term::Null(_)) => Nulls::new(),
                (Side::Head, Term::Var(v)) if rules[o.rule].is_existential(v) => [NullSymbol {
                    rule: rules[o.rule].id.clone(),
                    var: v.clone(),
                }]
                .into(),
                (Side::Head, Term::Var(v)) => self.body_intersection(rules, o.rule, v),
                (Side::Body, Term::Var(_)) => self.head_union(rules, &atom_of(rules, o).rel, o.arg),
            };
            entries.insert(*o, set);
        }
        NullSetTable { entries }
    }
}

/// Computes the null-set of every argument position of every atom
/// occurrence, iterating from the empty table to the least fixpoint.
pub fn compute_null_sets(rules: &[Rule]) -> NullSetTable {
    let occs = occurrences(rules);
    let mut table = NullSetTable::default();
    loop {
        let next = table.step(rules, &occs);
        if next == table {
            return table;
        }
        table = next;
    }
}

/// True when one more round of the inductive definition is a no-op.
pub fn is_fixpoint(rules: &[Rule], table: &NullSetTable) -> bool {
    table.step(rules, &occurrences(rules)) == *table
}

/// The existential dependency graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepGraph {
    pub nodes: BTreeSet<NullSymbol>,
    pub edges: BTreeSet<(NullSymbol, NullSymbol)>,
}

impl DepGraph {
    fn successors(&self, n: &NullSymbol) -> impl Iterator<Item = &NullSymbol> + '_ {
        let n = n.clone();
        self.edges.iter().filter(move |(from, _)| *from == n).map(|(_, to)| to)
    }

    /// Nodes reachable from `start` through at least one edge.
    pub fn reachable_from(&self, start: &NullSymbol) -> BTreeSet<NullSymbol> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<NullSymbol> = self.successors(start).cloned().collect();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n.clone()) {
                queue.extend(self.successors(&n).cloned());
            }
        }
        seen
    }

    /// Graphviz rendering with deterministic node and edge order.
    pub fn to_dot(&self, highlight: &BTreeSet<NullSymbol>) -> String {
        let mut out = String::from("digraph existential_dependencies {\n");
        for n in &self.nodes {
            let style = if highlight.contains(n) { ", color=red" } else { "" };
            out.push_str(&format!("  \"{n}\" [label=\"{n}\"{style}];\n"));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  \"{a}\" -> \"{b}\";\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the graph: an edge `(n', n[σ.Z])` for every frontier variable Y
/// of σ, every `n'` in `⋂nullset(Y, σ)` and every existential Z of σ.
pub fn build_dep_graph(rules: &[Rule], table: &NullSetTable) -> DepGraph {
    let mut g = DepGraph {
        nodes: table.entries.values().flatten().cloned().collect(),
        edges: BTreeSet::new(),
    };
    for (ri, r) in rules.iter().enumerate() {
        for y in r.frontier() {
            for src in table.body_intersection(rules, ri, &y) {
                for z in &r.existentials {
                    let dst = NullSymbol {
                        rule: r.id.clone(),
                        var: z.clone(),
                    };
                    g.edges.insert((src.clone(), dst));
                }
            }
        }
    }
    g
}

/// Nodes on a cycle (self-loops included) and everything reachable from
/// such a node.
pub fn cyc_null(g: &DepGraph) -> BTreeSet<NullSymbol> {
    let mut out = BTreeSet::new();
    for n in &g.nodes {
        let reach = g.reachable_from(n);
        if reach.contains(n) {
            out.extend(reach);
        }
    }
    out
}

/// Everything the TG analysis needs to know about nulls, computed once per
/// rule list.
#[derive(Clone, Debug)]
pub struct Affected {
    pub rules: Vec<Rule>,
    pub table: NullSetTable,
    pub graph: DepGraph,
    pub cyc: BTreeSet<NullSymbol>,
    head_unions: BTreeMap<(Sym, usize), Nulls>,
}

impl Affected {
    pub fn new(rules: &[Rule]) -> Affected {
        let table = compute_null_sets(rules);
        let graph = build_dep_graph(rules, &table);
        let cyc = cyc_null(&graph);
        let mut head_unions: BTreeMap<(Sym, usize), Nulls> = BTreeMap::new();
        for (o, s) in &table.entries {
            if o.side == Side::Head {
                let rel = atom_of(rules, o).rel.clone();
                head_unions.entry((rel, o.arg)).or_default().extend(s.iter().cloned());
            }
        }
        Affected {
            rules: rules.to_vec(),
            table,
            graph,
            cyc,
            head_unions,
        }
    }

    fn head_union(&self, rel: &Sym, arg: usize) -> Nulls {
        self.head_unions.get(&(rel.clone(), arg)).cloned().unwrap_or_default()
    }

    /// `⋂nullset(X)[B]`: for every position of `x` in an atom of `body`,
    /// take the union of head null-sets at that relation and position,
    /// then intersect across positions.
    pub fn var_nulls(&self, body: &[Atom], x: &Sym) -> Nulls {
        let mut acc: Option<Nulls> = None;
        for b in body {
            for i in b.positions_of(x) {
                let u = self.head_union(&b.rel, i);
                acc = Some(match acc {
                    None => u,
                    Some(prev) => prev.intersection(&u).cloned().collect(),
                });
            }
        }
        acc.unwrap_or_default()
    }

    /// Variables of `body` that can carry a cyclic null.
    pub fn var_hat(&self, body: &[Atom]) -> BTreeSet<Sym> {
        crate::model::vars_of(body)
            .into_iter()
            .filter(|x| !self.var_nulls(body, x).is_disjoint(&self.cyc))
            .collect()
    }

    /// `(var(b1) ∩ var(b2)) ∩ var_hat(B)`.
    pub fn link(&self, body: &[Atom], b1: &Atom, b2: &Atom) -> Result<BTreeSet<Sym>> {
        for b in [b1, b2] {
            if !body.contains(b) {
                return Err(Error::NotInBody(b.to_string()));
            }
        }
        let hat = self.var_hat(body);
        Ok(b1
            .var_set()
            .intersection(&b2.var_set())
            .filter(|v| hat.contains(*v))
            .cloned()
            .collect())
    }

    /// Null-set table as (rule, side, atom, position, symbols) rows.
    pub fn table_rows(&self) -> Vec<(String, Side, String, usize, Vec<String>)> {
        self.table
            .entries
            .iter()
            .map(|(o, s)| {
                (
                    self.rules[o.rule].id.to_string(),
                    o.side,
                    atom_of(&self.rules, o).to_string(),
                    o.arg + 1,
                    s.iter().map(ToString::to_string).collect(),
                )
            })
            .collect()
    }
}

/// Convenience wrapper computing var-hat from scratch.
pub fn var_hat(rules: &[Rule], body: &[Atom]) -> BTreeSet<Sym> {
    Affected::new(rules).var_hat(body)
}

/// Convenience wrapper computing the link variables from scratch.
pub fn link_vars(rules: &[Rule], body: &[Atom], b1: &Atom, b2: &Atom) -> Result<BTreeSet<Sym>> {
    Affected::new(rules).link(body, b1, b2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn rules(src: &str) -> Vec<Rule> {
        parse_program(src).unwrap().rules
    }

    fn ns(rule: &str, var: &str) -> NullSymbol {
        NullSymbol {
            rule: rule.into(),
            var: var.into(),
        }
    }

    fn atom(s: &str) -> Atom {
        parse_program(&format!("?- {s}.")).unwrap().queries[0].body[0].clone()
    }

    fn atoms(s: &str) -> Vec<Atom> {
        parse_program(&format!("?- {s}.")).unwrap().queries[0].body.clone()
    }

    const SIGMA2: &str = "s11: t(X,Y) -> t(Y,Z), u(Y,Z).\ns12star: t(X,Y), u(Y,Z) -> t(X,Z), u(X,Y).";
    const SIGMA3: &str = "s31: t(X,Y) -> t(Y,Z).\ns32: t(X,Y) -> s(X), s(Y).\n\
        s33: t(X1,V), s(V), t(W,Z1) -> u(X1,V,W,Z1).\ns34: u(X2,Y,Y,Z2) -> v(X2,Z2).\n\
        s35: v(X3,Z3) -> t(X3,Z3).";

    #[test]
    fn existential_head_position() {
        let rs = rules("t(X) -> u(X,Z).");
        let t = compute_null_sets(&rs);
        let head = |arg| Occurrence {
            rule: 0,
            side: Side::Head,
            atom: 0,
            arg,
        };
        assert_eq!(t.get(&head(1)), [ns("r1", "Z")].into());
        assert!(t.get(&head(0)).is_empty());
        let g = build_dep_graph(&rs, &t);
        assert!(g.edges.is_empty());
        assert!(cyc_null(&g).is_empty());
    }

    #[test]
    fn sigma2_body_position_receives_nulls() {
        let rs = rules(SIGMA2);
        let t = compute_null_sets(&rs);
        let occ = Occurrence {
            rule: 1,
            side: Side::Body,
            atom: 0,
            arg: 1,
        };
        assert!(t.get(&occ).contains(&ns("s11", "Z")));
        assert!(is_fixpoint(&rs, &t));
    }

    #[test]
    fn sigma2_and_sigma3_self_loops() {
        let rs = rules(SIGMA2);
        let a = Affected::new(&rs);
        assert!(a.graph.edges.contains(&(ns("s11", "Z"), ns("s11", "Z"))));
        assert_eq!(a.cyc, [ns("s11", "Z")].into());

        let rs = rules(SIGMA3);
        let a = Affected::new(&rs);
        assert!(a.graph.edges.contains(&(ns("s31", "Z"), ns("s31", "Z"))));
    }

    #[test]
    fn cyc_null_includes_reachable_nodes() {
        let n = |i: u32| ns("r", &format!("Z{i}"));
        let g = DepGraph {
            nodes: (0..4).map(n).collect(),
            edges: [(n(0), n(0)), (n(0), n(1)), (n(1), n(2))].into(),
        };
        assert_eq!(cyc_null(&g), [n(0), n(1), n(2)].into());
    }

    #[test]
    fn var_hat_examples() {
        let a = Affected::new(&rules(SIGMA2));
        let hat = a.var_hat(&atoms("t(X,Y), u(Y,Z)"));
        for v in ["X", "Y", "Z"] {
            assert!(hat.contains(&Sym::new(v)), "{v} missing from {hat:?}");
        }
        assert!(a.var_hat(&atoms("w(X,Y)")).is_empty());

        let a = Affected::new(&rules(SIGMA3));
        let hat = a.var_hat(&atoms("t(X1,V), s(V), t(V,Z1)"));
        for v in ["X1", "V", "Z1"] {
            assert!(hat.contains(&Sym::new(v)), "{v} missing from {hat:?}");
        }
    }

    #[test]
    fn link_examples() {
        let a = Affected::new(&rules(SIGMA2));
        let body = atoms("t(X,Y), u(Y,Z)");
        assert_eq!(a.link(&body, &body[0], &body[1]).unwrap(), [Sym::new("Y")].into());
        let body2 = atoms("t(X,Y), u(W,Z)");
        assert!(a.link(&body2, &body2[0], &body2[1]).unwrap().is_empty());
        assert!(matches!(
            a.link(&body, &body[0], &atom("t(Q,Q)")),
            Err(Error::NotInBody(_))
        ));

        let a = Affected::new(&rules(SIGMA3));
        let body = atoms("t(X1,V), s(V), t(V,Z1)");
        assert_eq!(a.link(&body, &body[0], &body[2]).unwrap(), [Sym::new("V")].into());
    }
}
