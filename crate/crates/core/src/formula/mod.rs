//! The two-sorted formula language and its decision procedures.

pub mod ast;
pub mod decide;
pub mod eval;
pub mod multi;
pub mod normal;
pub mod parser;
pub mod qe;

pub use ast::{Atom, Cmp, Formula, LinearTerm, Relations, Sort, ValueRelation, ValueTerm};
pub use decide::{decide, decide_with, find_witness, DecideOptions};
pub use eval::{eval_value_term, evaluate_qf, evaluate_qf_with, Env};
pub use multi::{multi_decide, ValuationSystem};
pub use normal::{dnf, Literal, DEFAULT_MAX_DNF};
pub use parser::parse;
pub use qe::{eliminate_group_quantifier, eliminate_with, normalize_exists, Alternative};
