//! Most general unifiers over function-free atoms, plus one-way matching.

use std::collections::BTreeMap;

use crate::model::{Atom, Substitution, Sym, Term};

/// Incremental unifier in triangular form.
#[derive(Default, Clone)]
pub(crate) struct Unifier {
    bindings: BTreeMap<Sym, Term>,
}

impl Unifier {
    pub(crate) fn resolve(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Term::Var(v) = &cur {
            match self.bindings.get(v) {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    /// Unifies `left` with `right`. When two distinct variables meet, the
    /// one for which `keep` is false is bound to the other; if both or
    /// neither are kept, the right-hand variable is bound.
    pub(crate) fn unify_terms(&mut self, left: &Term, right: &Term, keep: &dyn Fn(&Sym) -> bool) -> bool {
        let l = self.resolve(left);
        let r = self.resolve(right);
        if l == r {
            return true;
        }
        match (&l, &r) {
            (Term::Var(lv), Term::Var(rv)) => {
                if keep(rv) && !keep(lv) {
                    self.bindings.insert(lv.clone(), r.clone());
                } else {
                    self.bindings.insert(rv.clone(), l.clone());
                }
                true
            }
            (Term::Var(lv), _) => {
                self.bindings.insert(lv.clone(), r.clone());
                true
            }
            (_, Term::Var(rv)) => {
                self.bindings.insert(rv.clone(), l.clone());
                true
            }
            _ => false,
        }
    }

    pub(crate) fn unify_atoms(&mut self, left: &Atom, right: &Atom, keep: &dyn Fn(&Sym) -> bool) -> bool {
        left.rel == right.rel
            && left.arity() == right.arity()
            && left
                .args
                .iter()
                .zip(&right.args)
                .all(|(l, r)| self.unify_terms(l, r, keep))
    }

    /// Idempotent substitution equivalent to the accumulated bindings.
    pub(crate) fn into_substitution(self) -> Substitution {
        let resolved: Vec<(Sym, Term)> = self
            .bindings
            .keys()
            .map(|v| (v.clone(), self.resolve(&Term::Var(v.clone()))))
            .collect();
        Substitution::from_pairs(resolved)
    }
}

/// Unifies each `(left, right)` pair simultaneously.
pub fn unify_pairs(pairs: &[(&Atom, &Atom)], keep: &dyn Fn(&Sym) -> bool) -> Option<Substitution> {
    let mut u = Unifier::default();
    for (l, r) in pairs {
        if !u.unify_atoms(l, r, keep) {
            return None;
        }
    }
    Some(u.into_substitution())
}

/// All ways of pairing the atoms of `s1` with those of `s2` so that, after
/// unification, both sides denote the same set: every atom of the larger
/// side is assigned one atom of the smaller side with the same relation
/// and arity, and every atom of the smaller side is used. For equal sizes
/// these are the relation-respecting bijections.
///
/// Each pairing is a list of `(index in s1, index in s2)`.
pub fn pairings(s1: &[Atom], s2: &[Atom]) -> Vec<Vec<(usize, usize)>> {
    if s1.is_empty() || s2.is_empty() {
        return Vec::new();
    }
    let swap = s1.len() < s2.len();
    let (big, small) = if swap { (s2, s1) } else { (s1, s2) };
    let compatible = |a: &Atom, b: &Atom| a.rel == b.rel && a.arity() == b.arity();

    let mut out = Vec::new();
    let mut assign = vec![0usize; big.len()];
    let mut used = vec![0usize; small.len()];

    fn rec(
        i: usize,
        big: &[Atom],
        small: &[Atom],
        assign: &mut [usize],
        used: &mut [usize],
        compatible: &dyn Fn(&Atom, &Atom) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        let unused = used.iter().filter(|&&n| n == 0).count();
        if unused > big.len() - i {
            return;
        }
        if i == big.len() {
            out.push(assign.to_vec());
            return;
        }
        for j in 0..small.len() {
            if compatible(&big[i], &small[j]) {
                if big.len() == small.len() && used[j] > 0 {
                    continue;
                }
                assign[i] = j;
                used[j] += 1;
                rec(i + 1, big, small, assign, used, compatible, out);
                used[j] -= 1;
            }
        }
    }

    let mut raw = Vec::new();
    rec(0, big, small, &mut assign, &mut used, &compatible, &mut raw);
    for a in raw {
        let p: Vec<(usize, usize)> = a
            .into_iter()
            .enumerate()
            .map(|(bi, si)| if swap { (si, bi) } else { (bi, si) })
            .collect();
        out.push(p);
    }
    out
}

/// Every most general unifier of the atom sets `s1` and `s2`, one per
/// pairing (see [`pairings`]), duplicates removed. The two sets must have
/// disjoint variables.
pub fn mgu_all(s1: &[Atom], s2: &[Atom]) -> Vec<Substitution> {
    let mut out: Vec<Substitution> = Vec::new();
    for p in pairings(s1, s2) {
        let pairs: Vec<(&Atom, &Atom)> = p.iter().map(|&(i, j)| (&s1[i], &s2[j])).collect();
        if let Some(s) = unify_pairs(&pairs, &|_| false) {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// A most general unifier of `s1` and `s2`, or `None` when they do not
/// unify under any pairing.
pub fn mgu(s1: &[Atom], s2: &[Atom]) -> Option<Substitution> {
    mgu_all(s1, s2).into_iter().next()
}

/// One-way matching: extends `theta` so that `pattern θ = target`, binding
/// only variables of `pattern`. Returns false (leaving `theta` in an
/// unspecified state) when impossible.
pub fn match_atom(pattern: &Atom, target: &Atom, theta: &mut Substitution) -> bool {
    if pattern.rel != target.rel || pattern.arity() != target.arity() {
        return false;
    }
    for (p, t) in pattern.args.iter().zip(&target.args) {
        match p {
            Term::Var(v) => match theta.get(v) {
                Some(bound) if bound != t => return false,
                Some(_) => {}
                None => {
                    theta.insert(v.clone(), t.clone());
                }
            },
            _ if p != t => return false,
            _ => {}
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::apply_substitution;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn c(n: &str) -> Term {
        Term::constant(n)
    }

    #[test]
    fn unifies_repeated_variables() {
        // u(X1,V,W,Z1) with u(X2,Y,Y,Z2)
        let h = Atom::new("u", vec![v("X1"), v("V"), v("W"), v("Z1")]);
        let b = Atom::new("u", vec![v("X2"), v("Y"), v("Y"), v("Z2")]);
        let th = mgu(std::slice::from_ref(&h), std::slice::from_ref(&b)).unwrap();
        assert_eq!(th.apply_term(&v("W")), th.apply_term(&v("V")));
        assert_eq!(th.apply_term(&v("Y")), th.apply_term(&v("V")));
        assert_eq!(th.apply_term(&v("X2")), th.apply_term(&v("X1")));
        assert_eq!(th.apply_term(&v("Z2")), th.apply_term(&v("Z1")));
        assert_ne!(th.apply_term(&v("X1")), th.apply_term(&v("Z1")));
        assert_eq!(th.apply_atom(&h), th.apply_atom(&b));
    }

    #[test]
    fn variable_pairs_give_a_renaming() {
        let th = mgu(
            &[Atom::new("t", vec![v("X"), v("Y")])],
            &[Atom::new("t", vec![v("X'"), v("Y'")])],
        )
        .unwrap();
        assert!(th.is_var_to_var());
        assert_eq!(th.len(), 2);
    }

    #[test]
    fn constant_clash_fails() {
        assert!(mgu(
            &[Atom::new("t", vec![c("c1"), v("X")])],
            &[Atom::new("t", vec![c("c2"), v("Y")])],
        )
        .is_none());
        assert!(mgu(&[Atom::new("t", vec![v("X")])], &[Atom::new("u", vec![v("Y")])],).is_none());
    }

    #[test]
    fn pairings_cover_both_sides() {
        let h = [
            Atom::new("t", vec![v("A"), v("B")]),
            Atom::new("t", vec![v("B"), v("C")]),
        ];
        let b = [Atom::new("t", vec![v("X"), v("Y")])];
        let ps = pairings(&h, &b);
        assert_eq!(ps, vec![vec![(0, 0), (1, 0)]]);
        let ps = pairings(&h, &h);
        assert_eq!(ps.len(), 2);
    }

    #[test]
    fn set_unifier_equalises_sets() {
        let s1 = [Atom::new("t", vec![v("A"), v("B")]), Atom::new("u", vec![v("B")])];
        let s2 = [Atom::new("u", vec![v("Q")]), Atom::new("t", vec![v("P"), v("Q")])];
        for th in mgu_all(&s1, &s2) {
            let mut l = apply_substitution(&s1, &th);
            let mut r = apply_substitution(&s2, &th);
            l.sort();
            r.sort();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn matching_is_one_way() {
        let mut th = Substitution::new();
        assert!(match_atom(
            &Atom::new("t", vec![v("X"), v("X")]),
            &Atom::new("t", vec![c("a"), c("a")]),
            &mut th
        ));
        let mut th = Substitution::new();
        assert!(!match_atom(
            &Atom::new("t", vec![v("X"), v("X")]),
            &Atom::new("t", vec![c("a"), c("b")]),
            &mut th
        ));
    }
}
