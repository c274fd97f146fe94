//! Property tests over randomly generated terms, substitutions and rule
//! sets.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use tg_core::affected::{build_dep_graph, compute_null_sets, is_fixpoint, Side};
use tg_core::corpus::{generate, CorpusShape};
use tg_core::extension::replay;
use tg_core::{
    chase_to_level, compute_extension, cyc_null, find_rtcs, is_guarded, is_sticky, is_triangularly_guarded,
    is_weakly_acyclic, mgu, parse_program, serialize_program, validate_rtc, var_hat, Atom, Budgets, ChaseOptions,
    ExtensionConfig, NullSymbol, Outcome, Program, Rule, Substitution, Sym, Term,
};

const VARS: [&str; 5] = ["X", "Y", "Z", "W", "V"];

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => (0..VARS.len()).prop_map(|i| Term::var(VARS[i])),
        1 => prop_oneof![Just("a"), Just("b")].prop_map(Term::constant),
    ]
}

fn atom() -> impl Strategy<Value = Atom> {
    (prop_oneof![Just("p"), Just("q")], prop::collection::vec(term(), 2)).prop_map(|(rel, args)| Atom::new(rel, args))
}

fn substitution() -> impl Strategy<Value = Substitution> {
    prop::collection::btree_map(0..VARS.len(), term(), 0..4)
        .prop_map(|m| Substitution::from_pairs(m.into_iter().map(|(i, t)| (Sym::new(VARS[i]), t))))
}

/// A small rule set drawn from the seeded corpus generator.
fn rules() -> impl Strategy<Value = Vec<Rule>> {
    any::<u64>().prop_map(|seed| generate(seed, 1, &CorpusShape::default()).remove(0))
}

fn primed(a: &Atom) -> Atom {
    Atom {
        rel: a.rel.clone(),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::var(&format!("{v}1")),
                other => other.clone(),
            })
            .collect(),
    }
}

fn budgets(rules: &[Rule]) -> Budgets {
    let mut b = Budgets::for_rules(rules);
    b.extension.max_pairs = 400;
    b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_applies_right_to_left(t1 in substitution(), t2 in substitution(), a in atom()) {
        prop_assert_eq!(t2.compose(&t1).apply_atom(&a), t2.apply_atom(&t1.apply_atom(&a)));
    }

    #[test]
    fn restriction_keeps_only_requested_vars(t in substitution(), mask in prop::collection::vec(any::<bool>(), VARS.len())) {
        let keep: BTreeSet<Sym> = VARS.iter().zip(&mask).filter(|(_, &k)| k).map(|(v, _)| Sym::new(v)).collect();
        let r = t.restrict(&keep);
        prop_assert!(r.domain().is_subset(&keep));
        for v in &keep {
            prop_assert_eq!(r.get(v), t.get(v));
        }
    }

    #[test]
    fn mgu_unifies_and_is_symmetric(a in atom(), b in atom()) {
        let b = primed(&b);
        let ab = mgu(std::slice::from_ref(&a), std::slice::from_ref(&b));
        let ba = mgu(std::slice::from_ref(&b), std::slice::from_ref(&a));
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let Some(s) = ab {
            prop_assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
        }
        if let Some(s) = ba {
            prop_assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
        }
    }

    #[test]
    fn serialization_round_trips(rules in rules()) {
        let p = Program { rules, ..Program::default() };
        let text = serialize_program(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(&back.rules, &p.rules);
        prop_assert_eq!(serialize_program(&back), text);
    }

    #[test]
    fn null_sets_reach_a_sound_fixpoint(rules in rules()) {
        let table = compute_null_sets(&rules);
        prop_assert!(is_fixpoint(&rules, &table));
        for (o, set) in &table.entries {
            let r = &rules[o.rule];
            let atoms = if o.side == Side::Body { &r.body } else { &r.head };
            if let Term::Var(v) = &atoms[o.atom].args[o.arg] {
                if o.side == Side::Head && r.is_existential(v) {
                    let own = NullSymbol { rule: r.id.clone(), var: v.clone() };
                    prop_assert!(set.contains(&own));
                }
            }
            // Every null symbol names an existential of its rule.
            for n in set {
                let owner = rules.iter().find(|r| r.id == n.rule).unwrap();
                prop_assert!(owner.is_existential(&n.var));
            }
        }
    }

    #[test]
    fn cyc_null_matches_transitive_closure(rules in rules()) {
        let g = build_dep_graph(&rules, &compute_null_sets(&rules));
        let nodes: Vec<&NullSymbol> = g.nodes.iter().collect();
        let idx: BTreeMap<&NullSymbol, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let n = nodes.len();
        let mut reach = vec![vec![false; n]; n];
        for (a, b) in &g.edges {
            reach[idx[a]][idx[b]] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let expected: BTreeSet<NullSymbol> = (0..n)
            .filter(|&j| (0..n).any(|i| reach[i][i] && (i == j || reach[i][j])))
            .map(|j| nodes[j].clone())
            .collect();
        prop_assert_eq!(cyc_null(&g), expected);
    }

    #[test]
    fn var_hat_stays_inside_the_body(rules in rules()) {
        for r in &rules {
            let body_vars: BTreeSet<Sym> = r.body.iter().flat_map(|a| a.vars().cloned()).collect();
            prop_assert!(var_hat(&rules, &r.body).is_subset(&body_vars));
        }
    }

    #[test]
    fn extension_is_deterministic_replayable_and_monotone(rules in rules()) {
        let cfg = ExtensionConfig { max_rounds: 2, max_pairs: 300, ..ExtensionConfig::for_rules(&rules) };
        let e2 = compute_extension(&rules, &cfg);
        prop_assert_eq!(&e2.pairs, &compute_extension(&rules, &cfg).pairs);
        for i in 0..e2.pairs.len() {
            prop_assert!(replay(&e2.pairs, i), "pair {} does not replay", i);
        }
        let e1 = compute_extension(&rules, &ExtensionConfig { max_rounds: 1, ..cfg });
        prop_assert!(e1.pairs.len() <= e2.pairs.len());
        prop_assert_eq!(&e1.pairs[..], &e2.pairs[..e1.pairs.len()]);
    }

    #[test]
    fn found_rtcs_validate(rules in rules()) {
        let cfg = ExtensionConfig { max_rounds: 2, max_pairs: 300, ..ExtensionConfig::for_rules(&rules) };
        let ext = compute_extension(&rules, &cfg);
        for r in find_rtcs(&rules, &ext.pairs) {
            prop_assert_eq!(validate_rtc(&rules, &ext.pairs, &r), Ok(()));
        }
    }

    #[test]
    fn chase_is_deterministic_and_monotone(rules in rules(), k in 0usize..3) {
        let schema = Program { rules: rules.clone(), ..Program::default() }.schema();
        let facts: BTreeSet<Atom> = schema
            .iter()
            .map(|(rel, &ar)| Atom::new(rel.as_str(), (0..ar).map(|i| Term::constant(["a", "b"][i % 2])).collect()))
            .collect();
        let opts = ChaseOptions { max_atoms: 5_000, ..ChaseOptions::default() };
        let (Ok(small), Ok(big)) = (chase_to_level(&facts, &rules, k, &opts), chase_to_level(&facts, &rules, k + 1, &opts)) else {
            return Ok(());
        };
        prop_assert!(small.atom_set().is_subset(&big.atom_set()));
        prop_assert_eq!(small.atom_set(), chase_to_level(&facts, &rules, k, &opts).unwrap().atom_set());
        prop_assert_eq!(small.atoms_up_to(k), big.atoms_up_to(k));
    }

    #[test]
    fn classes_ignore_relation_names(rules in rules()) {
        let rename = |a: &Atom| Atom { rel: Sym::new(&format!("z_{}", a.rel)), args: a.args.clone() };
        let renamed: Vec<Rule> = rules
            .iter()
            .map(|r| Rule::new(r.id.as_str(), r.body.iter().map(rename).collect(), r.head.iter().map(rename).collect()).unwrap())
            .collect();
        prop_assert_eq!(is_weakly_acyclic(&rules), is_weakly_acyclic(&renamed));
        prop_assert_eq!(is_guarded(&rules), is_guarded(&renamed));
        prop_assert_eq!(is_sticky(&rules), is_sticky(&renamed));
        let kind = |o: &Outcome| std::mem::discriminant(o);
        let a = is_triangularly_guarded(&rules, &budgets(&rules));
        let b = is_triangularly_guarded(&renamed, &budgets(&renamed));
        prop_assert_eq!(kind(&a.outcome), kind(&b.outcome));
    }
}
