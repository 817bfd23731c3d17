//! Decision procedures for the integers with a valuation coming from a
//! descending chain of subgroups `Bᵢ = nᵢℤ`.

pub mod ambient;
pub mod arith;
pub mod chain;
pub mod chain_spec;
pub mod congruence;
pub mod error;
pub mod formula;
pub mod oracle;

pub use ambient::{AmbientGroup, FiniteQuotient};
pub use arith::{FactoredInt, PrimeSet};
pub use chain::{ValuationChain, ValueElement};
pub use chain_spec::ChainSpecFile;
pub use error::{Error, Result};
