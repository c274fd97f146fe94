//! The `tg` command line: argument model, dispatch and text rendering.
//!
//! Every command writes its whole report to the given writer and returns
//! the process exit code. Failures carry their own code (3 for unreadable
//! or malformed input, 4 when an analysis gives up on a resource limit).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tg_core::corpus::{self, CorpusShape};
use tg_core::json as j;
use tg_core::{
    answer_bcq, chase_to_level, is_guarded, is_sticky, is_triangularly_guarded, is_weakly_acyclic, parse_program,
    Affected, Answer, Budgets, ChaseOptions, CycleWitness, Error, Outcome, Program, Rtc, Rule, Verdict,
};

/// Exit code for I/O and parse problems.
pub const EXIT_INPUT: i32 = 3;
/// Exit code for analyses stopped by a resource limit.
pub const EXIT_LIMIT: i32 = 4;

/// A failed run: exit code plus a one-line diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn from_core(path: &Path, e: Error) -> Failure {
        let code = match e {
            Error::ResourceLimit { .. } => EXIT_LIMIT,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Parsed command line.
#[derive(Parser, Debug, Clone)]
#[command(name = "tg", version, about = "Triangularly-guarded TGD analysis and bounded chase")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Decide membership of the rules in a class.
    /// Exit 0 member, 1 non-member, 2 unknown.
    Check(CheckArgs),
    /// Print the chase up to a level.
    Chase(ChaseArgs),
    /// Answer the program's query on chase prefixes.
    /// Exit 0 yes, 1 no, 2 unknown.
    Ask(AskArgs),
    /// Show the extension, null-sets, var-hat sets and RTCs.
    Explain(ExplainArgs),
    /// Compare TG with the baseline classes on seeded random programs.
    Corpus(CorpusArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Tg,
    Wa,
    Guarded,
    Sticky,
}

impl Class {
    fn name(self) -> &'static str {
        match self {
            Class::Tg => "tg",
            Class::Wa => "wa",
            Class::Guarded => "guarded",
            Class::Sticky => "sticky",
        }
    }
}

/// Overrides for the extension limits. Unset values use the defaults
/// derived from the rule set.
#[derive(Args, Debug, Clone, Default)]
pub struct BudgetArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_rounds: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_pairs: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_subset: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_body: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_vars: Option<u64>,
}

impl BudgetArgs {
    pub fn budgets(&self, rules: &[Rule]) -> Budgets {
        let mut b = Budgets::for_rules(rules);
        let e = &mut b.extension;
        let set = |slot: &mut usize, v: Option<u64>| {
            if let Some(v) = v {
                *slot = v as usize;
            }
        };
        set(&mut e.max_rounds, self.max_rounds);
        set(&mut e.max_pairs, self.max_pairs);
        set(&mut e.max_subset, self.max_subset);
        set(&mut e.max_body, self.max_body);
        set(&mut e.max_vars, self.max_vars);
        b
    }
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "tg")]
    pub class: Class,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub budgets: BudgetArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ChaseArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub depth: usize,
    #[arg(long, conflicts_with = "dot")]
    pub json: bool,
    #[arg(long)]
    pub dot: bool,
}

#[derive(Args, Debug, Clone)]
pub struct AskArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub depth_limit: usize,
    /// Keep chasing past the limit while looking for a bounded-nulls
    /// level (TG rule sets only).
    #[arg(long)]
    pub auto: bool,
    /// Which query of the file to answer, counting from 0.
    #[arg(long, default_value_t = 0)]
    pub query: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ExplainArgs {
    pub file: PathBuf,
    /// Only emit the extension pairs with provenance, as JSON.
    #[arg(long)]
    pub pairs: bool,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub budgets: BudgetArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CorpusArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub budgets: BudgetArgs,
}

/// Runs one command, writing its report to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let (code, text) = match &cfg.command {
        Command::Check(a) => check(a)?,
        Command::Chase(a) => chase(a)?,
        Command::Ask(a) => ask(a)?,
        Command::Explain(a) => explain(a)?,
        Command::Corpus(a) => corpus_report(a),
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    Ok(code)
}

fn load(path: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_program(&text).map_err(|e| Failure::from_core(path, e))
}

fn outcome_code(o: &Outcome) -> i32 {
    match o {
        Outcome::Member => 0,
        Outcome::NonMember(_) => 1,
        Outcome::Unknown(_) => 2,
    }
}

// ---------------------------------------------------------------------
// check

fn check(a: &CheckArgs) -> Result<(i32, String), Failure> {
    let p = load(&a.file)?;
    if a.class == Class::Tg {
        let v = is_triangularly_guarded(&p.rules, &a.budgets.budgets(&p.rules));
        let code = outcome_code(&v.outcome);
        let text = if a.json {
            j::render(&j::document("verdict", j::verdict(&v)))
        } else {
            verdict_text(&v)
        };
        return Ok((code, text));
    }
    let member = match a.class {
        Class::Wa => is_weakly_acyclic(&p.rules),
        Class::Guarded => is_guarded(&p.rules),
        Class::Sticky => is_sticky(&p.rules),
        Class::Tg => unreachable!(),
    };
    let text = if a.json {
        j::render(&j::document("verdict", j::baseline(a.class.name(), member)))
    } else {
        format!(
            "class: {}\noutcome: {}\n",
            a.class.name(),
            if member { "member" } else { "non_member" }
        )
    };
    Ok((if member { 0 } else { 1 }, text))
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "class: tg");
    match &v.outcome {
        Outcome::Member => {
            let _ = writeln!(s, "outcome: member");
        }
        Outcome::NonMember(_) => {
            let _ = writeln!(s, "outcome: non_member");
        }
        Outcome::Unknown(reason) => {
            let _ = writeln!(s, "outcome: unknown ({reason})");
        }
    }
    let _ = writeln!(
        s,
        "extension: {} pairs, {} rounds, saturated: {}, pruned by caps: {}",
        v.pairs.len(),
        v.rounds,
        v.saturated,
        v.pruned_by_caps
    );
    let _ = writeln!(s, "rtcs: {}", v.rtcs.len());
    if let Outcome::NonMember(w) = &v.outcome {
        s.push_str("witness:\n");
        rtc_text(&mut s, w, "  ");
    }
    s
}

fn rtc_text(s: &mut String, r: &Rtc, indent: &str) {
    let _ = writeln!(s, "{indent}rtc: {r}");
    let _ = writeln!(s, "{indent}pair: {}", r.pair);
    let _ = writeln!(s, "{indent}theta: {}", r.theta);
    match &r.witness {
        CycleWitness::CEqualsAPrime => {
            let _ = writeln!(s, "{indent}cycle: c = a'");
        }
        CycleWitness::ViaPair {
            pair,
            theta_prime,
            eta,
            b_prime,
            h_prime,
        } => {
            let _ = writeln!(
                s,
                "{indent}cycle: via pair {pair}, theta' {theta_prime}, eta {eta}, {b_prime} -> {h_prime}"
            );
        }
    }
    let path: Vec<String> = r.path.iter().map(ToString::to_string).collect();
    let links: Vec<String> = r.links.iter().map(ToString::to_string).collect();
    let _ = writeln!(s, "{indent}path: {} (links {})", path.join(" . "), links.join(","));
    let _ = writeln!(s, "{indent}marked link: {}", r.y_prime);
    match &r.guard {
        Some(g) => {
            let _ = writeln!(s, "{indent}guard: {g}");
        }
        None => {
            let _ = writeln!(s, "{indent}guard: none");
        }
    }
}

// ---------------------------------------------------------------------
// chase

fn chase(a: &ChaseArgs) -> Result<(i32, String), Failure> {
    let p = load(&a.file)?;
    let inst = chase_to_level(&p.facts, &p.rules, a.depth, &ChaseOptions::from_env())
        .map_err(|e| Failure::from_core(&a.file, e))?;
    let text = if a.json {
        j::render(&j::document("chase", j::chase(&inst)))
    } else if a.dot {
        inst.to_dot()
    } else {
        let mut s = format!(
            "% depth {}, {} atoms, terminated: {}\n",
            inst.depth,
            inst.len(),
            inst.fixpoint
        );
        for c in &inst.atoms {
            let _ = writeln!(s, "{}. % level {}", c.atom, c.level);
        }
        s
    };
    Ok((0, text))
}

// ---------------------------------------------------------------------
// ask

fn ask(a: &AskArgs) -> Result<(i32, String), Failure> {
    let p = load(&a.file)?;
    let q = p.queries.get(a.query).ok_or_else(|| {
        Failure::input(format!(
            "{}: no query with index {} ({} queries in file)",
            a.file.display(),
            a.query,
            p.queries.len()
        ))
    })?;
    let answer = answer_bcq(&p.facts, &p.rules, q, a.depth_limit, a.auto, &ChaseOptions::from_env());
    let code = match answer {
        Answer::Yes { .. } => 0,
        Answer::No { .. } => 1,
        Answer::Unknown(_) => 2,
    };
    let text = if a.json {
        j::render(&j::document("answer", j::answer(q, &answer)))
    } else {
        match &answer {
            Answer::Yes { hom, level } => format!("{q}\nanswer: yes (level {level}, {hom})\n"),
            Answer::No { certified, reason } => format!(
                "{q}\nanswer: no ({}; {reason})\n",
                if *certified { "certified" } else { "not certified" }
            ),
            Answer::Unknown(reason) => format!("{q}\nanswer: unknown ({reason})\n"),
        }
    };
    Ok((code, text))
}

// ---------------------------------------------------------------------
// explain

fn var_hat_rows(aff: &Affected, rules: &[Rule]) -> Vec<(String, Vec<String>)> {
    rules
        .iter()
        .map(|r| {
            let hat: Vec<String> = aff.var_hat(&r.body).iter().map(ToString::to_string).collect();
            (r.id.to_string(), hat)
        })
        .collect()
}

fn explain(a: &ExplainArgs) -> Result<(i32, String), Failure> {
    let p = load(&a.file)?;
    let v = is_triangularly_guarded(&p.rules, &a.budgets.budgets(&p.rules));
    let code = outcome_code(&v.outcome);
    let pairs_json = Value::Array(v.pairs.iter().enumerate().map(|(i, q)| j::pair(i, q)).collect());
    if a.pairs {
        let doc = j::document("pairs", json!({ "pairs": pairs_json, "saturated": v.saturated }));
        return Ok((code, j::render(&doc)));
    }
    let aff = Affected::new(&p.rules);
    let dot = aff.graph.to_dot(&aff.cyc);
    let cyc: BTreeSet<String> = aff.cyc.iter().map(ToString::to_string).collect();
    let hats = var_hat_rows(&aff, &p.rules);

    if a.json {
        let doc = j::document(
            "explain",
            json!({
                "verdict": j::verdict(&v),
                "pairs": pairs_json,
                "dependency_graph": dot,
                "cyc_null": cyc,
                "null_sets": j::null_table(&aff),
                "var_hat": hats.iter().map(|(id, h)| json!({ "rule": id, "vars": h })).collect::<Vec<_>>(),
                "rtcs": v.rtcs.iter().map(j::rtc).collect::<Vec<_>>(),
            }),
        );
        return Ok((code, j::render(&doc)));
    }

    let mut s = String::new();
    s.push_str("== extension ==\n");
    for (i, q) in v.pairs.iter().enumerate() {
        let from = match &q.derivation {
            None => format!("rule {}", q.rule.as_ref().map(ToString::to_string).unwrap_or_default()),
            Some(d) => format!("{} with {} on {:?}", d.left, d.right, d.pairing),
        };
        let _ = writeln!(s, "[{i}] round {}: {q}  ({from})", q.round);
    }
    s.push_str("== dependency graph ==\n");
    s.push_str(&dot);
    let _ = writeln!(s, "cyc-null: {}", cyc.into_iter().collect::<Vec<_>>().join(", "));
    s.push_str("== null-sets ==\n");
    s.push_str(&j::render(&j::null_table(&aff)));
    s.push_str("== var-hat ==\n");
    for (id, h) in &hats {
        let _ = writeln!(s, "{id}: {{{}}}", h.join(","));
    }
    s.push_str("== rtcs ==\n");
    if v.rtcs.is_empty() {
        s.push_str("none\n");
    }
    for (i, r) in v.rtcs.iter().enumerate() {
        let _ = writeln!(s, "#{i} {}", if r.is_guarded() { "guarded" } else { "UNGUARDED" });
        rtc_text(&mut s, r, "  ");
    }
    s.push_str("== verdict ==\n");
    s.push_str(&verdict_text(&v));
    Ok((code, s))
}

// ---------------------------------------------------------------------
// corpus

fn outcome_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Member => "member",
        Outcome::NonMember(_) => "non_member",
        Outcome::Unknown(_) => "unknown",
    }
}

/// One generated program with its classification.
pub struct CorpusRow {
    pub rules: Vec<Rule>,
    pub wa: bool,
    pub guarded: bool,
    pub sticky: bool,
    pub tg: Outcome,
}

impl CorpusRow {
    /// A baseline class accepts the program while TG rejects it.
    pub fn violates_containment(&self) -> bool {
        (self.wa || self.guarded || self.sticky) && matches!(self.tg, Outcome::NonMember(_))
    }
}

/// Classifies `count` programs drawn with `seed`.
pub fn classify_corpus(seed: u64, count: usize, budgets: &BudgetArgs) -> Vec<CorpusRow> {
    corpus::generate(seed, count, &CorpusShape::default())
        .into_iter()
        .map(|rules| {
            let tg = is_triangularly_guarded(&rules, &budgets.budgets(&rules)).outcome;
            CorpusRow {
                wa: is_weakly_acyclic(&rules),
                guarded: is_guarded(&rules),
                sticky: is_sticky(&rules),
                tg,
                rules,
            }
        })
        .collect()
}

fn corpus_report(a: &CorpusArgs) -> (i32, String) {
    let rows = classify_corpus(a.seed, a.count, &a.budgets);
    let violations = rows.iter().filter(|r| r.violates_containment()).count();
    let count = |f: &dyn Fn(&CorpusRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let summary = json!({
        "programs": rows.len(),
        "wa": count(&|r| r.wa),
        "guarded": count(&|r| r.guarded),
        "sticky": count(&|r| r.sticky),
        "tg_member": count(&|r| matches!(r.tg, Outcome::Member)),
        "tg_non_member": count(&|r| matches!(r.tg, Outcome::NonMember(_))),
        "tg_unknown": count(&|r| matches!(r.tg, Outcome::Unknown(_))),
        "containment_violations": violations,
    });
    let code = if violations == 0 { 0 } else { 1 };
    if a.json {
        let programs: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "rules": r.rules.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "wa": r.wa,
                    "guarded": r.guarded,
                    "sticky": r.sticky,
                    "tg": outcome_name(&r.tg),
                })
            })
            .collect();
        let doc = j::document(
            "corpus",
            json!({ "seed": a.seed, "summary": summary, "programs": programs }),
        );
        return (code, j::render(&doc));
    }
    let mut s = String::new();
    for (i, r) in rows.iter().enumerate() {
        let rules: Vec<String> = r.rules.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            s,
            "{i:>4} wa={} guarded={} sticky={} tg={}  {}",
            r.wa as u8,
            r.guarded as u8,
            r.sticky as u8,
            outcome_name(&r.tg),
            rules.join(" ")
        );
    }
    let _ = writeln!(s, "summary: {summary}");
    (code, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, clap::Error> {
        RunConfig::try_parse_from(std::iter::once("tg").chain(args.iter().copied()))
    }

    fn example(name: &str) -> String {
        format!("{}/examples/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn run_args(args: &[&str]) -> (Result<i32, Failure>, String) {
        let mut out = Vec::new();
        let r = run(&parse(args).unwrap(), &mut out);
        (r, String::from_utf8(out).unwrap())
    }

    #[test]
    fn budgets_must_be_positive() {
        assert!(parse(&["check", "f.tgd", "--max-rounds", "0"]).is_err());
        assert!(parse(&["check", "f.tgd", "--max-pairs", "5"]).is_ok());
    }

    #[test]
    fn chase_formats_are_exclusive() {
        assert!(parse(&["chase", "f.tgd", "--depth", "2", "--json", "--dot"]).is_err());
    }

    #[test]
    fn budget_overrides_replace_only_given_limits() {
        let rules = parse_program("t(X,Y) -> t(Y,Z).").unwrap().rules;
        let defaults = Budgets::for_rules(&rules).extension;
        let b = BudgetArgs {
            max_pairs: Some(7),
            ..BudgetArgs::default()
        }
        .budgets(&rules)
        .extension;
        assert_eq!(b.max_pairs, 7);
        assert_eq!(b.max_rounds, defaults.max_rounds);
        assert_eq!(b.max_vars, defaults.max_vars);
    }

    #[test]
    fn containment_violation_needs_a_baseline_member_rejected_by_tg() {
        let row = |wa, tg| CorpusRow {
            rules: Vec::new(),
            wa,
            guarded: false,
            sticky: false,
            tg,
        };
        assert!(!row(true, Outcome::Member).violates_containment());
        assert!(!row(true, Outcome::Unknown("budget".into())).violates_containment());
        assert!(!row(false, Outcome::Member).violates_containment());
    }

    #[test]
    fn missing_query_is_an_input_failure() {
        let (r, out) = run_args(&["ask", &example("sigma2.tgd"), "--depth-limit", "1"]);
        assert_eq!(r.unwrap_err().code, EXIT_INPUT);
        assert!(out.is_empty());
    }

    #[test]
    fn text_verdict_names_class_and_outcome() {
        let (r, out) = run_args(&["check", &example("sigma1.tgd"), "--class", "wa"]);
        assert_eq!(r, Ok(1));
        assert_eq!(out, "class: wa\noutcome: non_member\n");
    }

    #[test]
    fn chase_text_lists_levels() {
        let (r, out) = run_args(&["chase", &example("sigma2_q.tgd"), "--depth", "1"]);
        assert_eq!(r, Ok(0));
        assert!(out.contains("t(c2,_:n1). % level 1"));
    }
}
