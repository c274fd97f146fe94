//! Reference membership checkers for three well-known decidable classes.
//! They are total, polynomial, and only used for comparison with TG.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{Rule, Sym};

/// An argument position `rel[i]`, zero-based.
pub type Position = (Sym, usize);

/// Dependency graph over argument positions, as used for weak acyclicity
/// (Fagin, Kolaitis, Miller and Popa, "Data exchange: semantics and query
/// answering").
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PositionGraph {
    pub nodes: BTreeSet<Position>,
    pub normal_edges: BTreeSet<(Position, Position)>,
    pub special_edges: BTreeSet<(Position, Position)>,
}

impl PositionGraph {
    /// For each frontier variable at body position `p`: a normal edge to
    /// every head position of the same variable, and a special edge to every
    /// head position holding an existential variable.
    pub fn build(rules: &[Rule]) -> PositionGraph {
        let mut g = PositionGraph::default();
        for r in rules {
            for a in r.body.iter().chain(&r.head) {
                for i in 0..a.arity() {
                    g.nodes.insert((a.rel.clone(), i));
                }
            }
            let exist_positions: Vec<Position> = r
                .head
                .iter()
                .flat_map(|h| {
                    h.args
                        .iter()
                        .enumerate()
                        .filter_map(|(i, t)| t.as_var().filter(|v| r.is_existential(v)).map(|_| (h.rel.clone(), i)))
                })
                .collect();
            for x in r.frontier() {
                let from: Vec<Position> = r
                    .body
                    .iter()
                    .flat_map(|b| b.positions_of(&x).into_iter().map(|i| (b.rel.clone(), i)))
                    .collect();
                let to: Vec<Position> = r
                    .head
                    .iter()
                    .flat_map(|h| h.positions_of(&x).into_iter().map(|i| (h.rel.clone(), i)))
                    .collect();
                for p in &from {
                    for q in &to {
                        g.normal_edges.insert((p.clone(), q.clone()));
                    }
                    for q in &exist_positions {
                        g.special_edges.insert((p.clone(), q.clone()));
                    }
                }
            }
        }
        g
    }

    fn reaches(&self, from: &Position, to: &Position) -> bool {
        let mut adj: BTreeMap<&Position, Vec<&Position>> = BTreeMap::new();
        for (p, q) in self.normal_edges.iter().chain(&self.special_edges) {
            adj.entry(p).or_default().push(q);
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            if p == to {
                return true;
            }
            if seen.insert(p) {
                if let Some(next) = adj.get(p) {
                    queue.extend(next.iter().copied());
                }
            }
        }
        false
    }

    /// True when some cycle goes through a special edge.
    pub fn has_special_cycle(&self) -> bool {
        self.special_edges.iter().any(|(p, q)| self.reaches(q, p))
    }
}

/// Weakly acyclic: no cycle of the position graph uses a special edge.
pub fn is_weakly_acyclic(rules: &[Rule]) -> bool {
    !PositionGraph::build(rules).has_special_cycle()
}

/// Guarded (Calì, Gottlob and Kifer): every rule has a body atom that
/// contains all of its body variables.
pub fn is_guarded(rules: &[Rule]) -> bool {
    rules.iter().all(|r| {
        let all = r.universal_vars();
        r.body.iter().any(|a| a.var_set() == all)
    })
}

/// Variables marked by the sticky marking procedure (Calì, Gottlob and
/// Pieris), as `(rule index, variable)`.
///
/// Base step: a body variable missing from at least one head atom is
/// marked. Propagation: if a marked variable occurs in some body at
/// position π, then every body variable of any rule that occurs in its head
/// at π is marked as well.
pub fn sticky_marking(rules: &[Rule]) -> BTreeSet<(usize, Sym)> {
    let mut marked: BTreeSet<(usize, Sym)> = BTreeSet::new();
    for (ri, r) in rules.iter().enumerate() {
        for v in r.universal_vars() {
            if r.head.iter().any(|h| !h.has_var(&v)) {
                marked.insert((ri, v));
            }
        }
    }
    loop {
        let positions: BTreeSet<Position> = marked
            .iter()
            .flat_map(|(ri, v)| {
                rules[*ri]
                    .body
                    .iter()
                    .flat_map(move |b| b.positions_of(v).into_iter().map(|i| (b.rel.clone(), i)))
            })
            .collect();
        let mut changed = false;
        for (ri, r) in rules.iter().enumerate() {
            for v in r.universal_vars() {
                if marked.contains(&(ri, v.clone())) {
                    continue;
                }
                let hit = r.head.iter().any(|h| {
                    h.positions_of(&v)
                        .into_iter()
                        .any(|i| positions.contains(&(h.rel.clone(), i)))
                });
                if hit {
                    marked.insert((ri, v));
                    changed = true;
                }
            }
        }
        if !changed {
            return marked;
        }
    }
}

/// Sticky: no marked variable occurs more than once in a rule body.
pub fn is_sticky(rules: &[Rule]) -> bool {
    let marked = sticky_marking(rules);
    marked.iter().all(|(ri, v)| {
        let count: usize = rules[*ri].body.iter().map(|b| b.positions_of(v).len()).sum();
        count <= 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn rules(src: &str) -> Vec<Rule> {
        parse_program(src).unwrap().rules
    }

    const SIGMA1: &str = "s11: t(X,Y) -> t(Y,Z), u(Y,Z).\ns12: t(X,Y), u(Y,Z) -> t(Y,Z), u(X,Y).";
    const SIGMA2: &str = "s11: t(X,Y) -> t(Y,Z), u(Y,Z).\ns12star: t(X,Y), u(Y,Z) -> t(X,Z), u(X,Y).";
    const SIGMA3: &str = "s31: t(X,Y) -> t(Y,Z).\ns32: t(X,Y) -> s(X), s(Y).\n\
        s33: t(X1,V), s(V), t(W,Z1) -> u(X1,V,W,Z1).\ns34: u(X2,Y,Y,Z2) -> v(X2,Z2).\n\
        s35: v(X3,Z3) -> t(X3,Z3).";

    #[test]
    fn weak_acyclicity() {
        assert!(is_weakly_acyclic(&rules("t(X) -> u(X).")));
        assert!(!is_weakly_acyclic(&rules(SIGMA2)));
        assert!(!is_weakly_acyclic(&rules(SIGMA1)));
        let g = PositionGraph::build(&rules(SIGMA2));
        let t2 = (Sym::new("t"), 1);
        assert!(g.special_edges.contains(&(t2.clone(), t2)));
    }

    #[test]
    fn guardedness() {
        assert!(is_guarded(&rules("t(X,Y) -> u(Y,Z).")));
        assert!(!is_guarded(&rules(SIGMA2)));
        assert!(!is_guarded(&rules(SIGMA3)));
        assert!(!is_guarded(&rules(SIGMA1)));
    }

    #[test]
    fn stickiness() {
        assert!(is_sticky(&rules("t(X,Y) -> t(Y,X).")));
        assert!(!is_sticky(&rules(SIGMA3)));
        assert!(!is_sticky(&rules(SIGMA1)));
        // A join variable that is kept in every head stays unmarked.
        assert!(is_sticky(&rules("p(X,Y), q(Y,Z) -> r(X,Y,Z).")));
    }
}
