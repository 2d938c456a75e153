//! Recursion schemes, cost automata, simple tree regular expressions and
//! downward closures of tree languages.

pub mod error;
pub mod cost;
pub mod fta;
pub mod ftt;
pub mod order_reduce;
pub mod parity;
pub mod pipeline;
pub mod schemes;
pub mod stre;
pub mod trees;

pub use error::{Error, Result};
pub use fta::Nfta;
pub use schemes::{LambdaTerm, SafetyReport, Scheme, SimpleType};
pub use trees::{PartialTree, RankedAlphabet, RegularTree, Tree, HOLE};
