//! Analysis of tuple-generating dependencies: the triangularly-guarded
//! (TG) membership test, a level-tracked chase with boolean conjunctive
//! query answering, and reference checkers for weakly-acyclic, guarded
//! and sticky rule sets.
//!
//! ```
//! use tg_core::{parse_program, is_triangularly_guarded, Budgets, Outcome};
//!
//! let p = parse_program("t(X,Y) -> t(Y,Z), u(Y,Z).\nt(X,Y), u(Y,Z) -> t(X,Z), u(X,Y).").unwrap();
//! let v = is_triangularly_guarded(&p.rules, &Budgets::for_rules(&p.rules));
//! assert!(matches!(v.outcome, Outcome::NonMember(_)));
//! ```

pub mod affected;
pub mod baselines;
pub mod chase;
pub mod corpus;
pub mod error;
pub mod extension;
pub mod json;
pub mod model;
pub mod parser;
pub mod tg;
pub mod unify;

pub use affected::{cyc_null, var_hat, Affected, DepGraph, NullSetTable, NullSymbol, Occurrence, Side};
pub use baselines::{is_guarded, is_sticky, is_weakly_acyclic, PositionGraph};
pub use chase::{
    answer_bcq, chase_step, chase_to_level, find_homomorphism, interchangeable, Answer, ChaseAtom, ChaseInstance,
    ChaseOptions, Provenance,
};
pub use error::{Error, Result};
pub use extension::{
    compute_extension, compute_extension_until, extension_base, extension_step, isomorphic, mark_vars, Derivation,
    Extension, ExtensionConfig, ExtensionPair,
};
pub use model::{apply_substitution, is_connected, Atom, Query, Rule, Substitution, Sym, Term};
pub use parser::{parse_program, serialize_program, Program};
pub use tg::{find_rtcs, is_triangularly_guarded, validate_rtc, Budgets, CycleWitness, Outcome, Rtc, Verdict};
pub use unify::{mgu, mgu_all};
