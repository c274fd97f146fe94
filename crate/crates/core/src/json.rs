//! Deterministic JSON for analysis artifacts. Object keys are sorted and
//! every document carries `"format": 1`. Nulls print as `_:n<i>`.

use serde_json::{json, Map, Value};

use crate::affected::{Affected, Side};
use crate::chase::{Answer, ChaseInstance, Provenance};
use crate::extension::ExtensionPair;
use crate::model::{Atom, Query, Substitution};
use crate::parser::Program;
use crate::tg::{CycleWitness, Outcome, Rtc, Verdict};

pub const FORMAT: u64 = 1;

/// Wraps `body` (an object) with the format version and document kind.
pub fn document(kind: &str, body: Value) -> Value {
    let mut m = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    m.insert("format".into(), json!(FORMAT));
    m.insert("kind".into(), json!(kind));
    Value::Object(m)
}

pub fn atoms(a: &[Atom]) -> Value {
    Value::Array(a.iter().map(|x| json!(x.to_string())).collect())
}

pub fn substitution(s: &Substitution) -> Value {
    Value::Object(s.iter().map(|(v, t)| (v.to_string(), json!(t.to_string()))).collect())
}

pub fn program(p: &Program) -> Value {
    json!({
        "facts": p.facts.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "rules": p.rules.iter().map(|r| json!({
            "id": r.id.to_string(),
            "body": atoms(&r.body),
            "head": atoms(&r.head),
            "existentials": r.existentials.iter().map(ToString::to_string).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "queries": p.queries.iter().map(|q| atoms(&q.body)).collect::<Vec<_>>(),
    })
}

pub fn pair(idx: usize, p: &ExtensionPair) -> Value {
    let derivation = match &p.derivation {
        None => Value::Null,
        Some(d) => json!({
            "left": d.left,
            "right": d.right,
            "pairing": d.pairing.iter().map(|(i, j)| json!([i, j])).collect::<Vec<_>>(),
            "unifier": substitution(&d.unifier),
        }),
    };
    json!({
        "index": idx,
        "round": p.round,
        "body": atoms(&p.body),
        "head": atoms(&p.head),
        "rule": p.rule.as_ref().map(ToString::to_string),
        "derivation": derivation,
    })
}

pub fn rtc(r: &Rtc) -> Value {
    let cycle = match &r.witness {
        CycleWitness::CEqualsAPrime => json!({ "case": "c_equals_a_prime" }),
        CycleWitness::ViaPair {
            pair,
            theta_prime,
            eta,
            b_prime,
            h_prime,
        } => json!({
            "case": "via_pair",
            "pair": pair,
            "theta_prime": substitution(theta_prime),
            "eta": substitution(eta),
            "b_prime": b_prime.to_string(),
            "h_prime": h_prime.to_string(),
        }),
    };
    json!({
        "pair": r.pair,
        "B": atoms(&r.body),
        "H": atoms(&r.head),
        "a": r.a.to_string(),
        "b": r.b.to_string(),
        "c": r.c.to_string(),
        "X": r.x.to_string(),
        "Z": r.z.to_string(),
        "a_prime": r.a_prime.to_string(),
        "theta": substitution(&r.theta),
        "cycle": cycle,
        "path": atoms(&r.path),
        "links": r.links.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "y_prime": r.y_prime.to_string(),
        "guarded": r.is_guarded(),
        "guard": r.guard.as_ref().map(ToString::to_string),
    })
}

pub fn outcome(o: &Outcome) -> Value {
    match o {
        Outcome::Member => json!({ "outcome": "member" }),
        Outcome::NonMember(w) => json!({ "outcome": "non_member", "witness": rtc(w) }),
        Outcome::Unknown(reason) => json!({ "outcome": "unknown", "reason": reason }),
    }
}

pub fn verdict(v: &Verdict) -> Value {
    let mut m = match outcome(&v.outcome) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    m.insert("class".into(), json!("tg"));
    m.insert(
        "extension".into(),
        json!({
            "pairs": v.pairs.len(),
            "rounds": v.rounds,
            "saturated": v.saturated,
            "pruned_by_caps": v.pruned_by_caps,
        }),
    );
    m.insert("rtcs".into(), json!(v.rtcs.len()));
    Value::Object(m)
}

pub fn baseline(class: &str, member: bool) -> Value {
    json!({
        "class": class,
        "outcome": if member { "member" } else { "non_member" },
    })
}

fn provenance(p: &Provenance) -> Value {
    match p {
        Provenance::Database => json!("database"),
        Provenance::Rule { rule, trigger } => json!({
            "rule": rule.to_string(),
            "trigger": substitution(trigger),
        }),
    }
}

pub fn chase(i: &ChaseInstance) -> Value {
    json!({
        "depth": i.depth,
        "terminated": i.fixpoint,
        "next_null": i.next_null,
        "atoms": i.atoms.iter().map(|c| json!({
            "atom": c.atom.to_string(),
            "level": c.level,
            "provenance": provenance(&c.provenance),
        })).collect::<Vec<_>>(),
    })
}

pub fn answer(q: &Query, a: &Answer) -> Value {
    let mut v = match a {
        Answer::Yes { hom, level } => json!({
            "answer": "yes",
            "homomorphism": substitution(hom),
            "level": level,
        }),
        Answer::No { certified, reason } => json!({
            "answer": "no",
            "certified": certified,
            "reason": reason,
        }),
        Answer::Unknown(reason) => json!({ "answer": "unknown", "reason": reason }),
    };
    v["query"] = json!(q.to_string());
    v
}

pub fn null_table(a: &Affected) -> Value {
    Value::Array(
        a.table_rows()
            .into_iter()
            .map(|(rule, side, atom, pos, nulls)| {
                json!({
                    "rule": rule,
                    "side": match side { Side::Body => "body", Side::Head => "head" },
                    "atom": atom,
                    "position": pos,
                    "nulls": nulls,
                })
            })
            .collect(),
    )
}

/// Pretty-printed text with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn empty_program_has_empty_arrays() {
        let v = document("program", program(&Program::default()));
        assert_eq!(v["format"], json!(1));
        assert_eq!(v["facts"], json!([]));
        assert_eq!(v["rules"], json!([]));
    }

    #[test]
    fn keys_are_sorted() {
        let p = parse_program("t(c1,c2). t(X,Y) -> t(Y,Z).").unwrap();
        let text = render(&document("program", program(&p)));
        let f = text.find("\"facts\"").unwrap();
        let r = text.find("\"rules\"").unwrap();
        assert!(f < r);
        assert!(text.contains("\"format\": 1"));
    }

    #[test]
    fn nulls_print_with_prefix() {
        let p = parse_program("t(c1,c2).\nt(X,Y) -> t(Y,Z).").unwrap();
        let i = crate::chase::chase_to_level(&p.facts, &p.rules, 1, &Default::default()).unwrap();
        assert!(render(&chase(&i)).contains("t(c2,_:n1)"));
    }
}
