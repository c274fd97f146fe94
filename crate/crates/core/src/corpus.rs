//! Seeded generator of small random rule sets, used to compare TG with
//! the baseline classes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Atom, Rule, Term};

/// Shape limits for generated programs.
#[derive(Clone, Debug)]
pub struct CorpusShape {
    pub max_rules: usize,
    pub max_arity: usize,
    pub relations: usize,
    pub max_body: usize,
    pub max_head: usize,
}

impl Default for CorpusShape {
    fn default() -> Self {
        CorpusShape {
            max_rules: 4,
            max_arity: 3,
            relations: 3,
            max_body: 2,
            max_head: 2,
        }
    }
}

const BODY_VARS: [&str; 4] = ["X", "Y", "Z", "W"];
const EXIST_VARS: [&str; 2] = ["E", "F"];

fn random_rule(rng: &mut ChaCha8Rng, id: usize, arities: &[(String, usize)], shape: &CorpusShape) -> Rule {
    let body_len = rng.gen_range(1..=shape.max_body);
    let head_len = rng.gen_range(1..=shape.max_head);
    let mut body = Vec::new();
    let mut used: Vec<&str> = Vec::new();
    for _ in 0..body_len {
        let (rel, arity) = arities.choose(rng).unwrap();
        let args = (0..*arity)
            .map(|_| {
                let v = *BODY_VARS.choose(rng).unwrap();
                if !used.contains(&v) {
                    used.push(v);
                }
                Term::var(v)
            })
            .collect();
        body.push(Atom::new(rel, args));
    }
    let mut head = Vec::new();
    for _ in 0..head_len {
        let (rel, arity) = arities.choose(rng).unwrap();
        let args = (0..*arity)
            .map(|_| {
                if used.is_empty() || rng.gen_bool(0.3) {
                    Term::var(EXIST_VARS.choose(rng).unwrap())
                } else {
                    Term::var(used.choose(rng).unwrap())
                }
            })
            .collect();
        head.push(Atom::new(rel, args));
    }
    Rule::new(&format!("r{id}"), body, head).expect("generated rules are well formed")
}

/// `count` rule sets drawn from a ChaCha8 stream seeded with `seed`.
pub fn generate(seed: u64, count: usize, shape: &CorpusShape) -> Vec<Vec<Rule>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let arities: Vec<(String, usize)> = ["p", "q", "r", "s"][..shape.relations.clamp(1, 4)]
                .iter()
                .map(|r| (r.to_string(), rng.gen_range(1..=shape.max_arity)))
                .collect();
            let n = rng.gen_range(1..=shape.max_rules);
            (1..=n).map(|i| random_rule(&mut rng, i, &arities, shape)).collect()
        })
        .collect()
}
