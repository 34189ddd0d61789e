pub mod error;
pub mod kernel;

pub use error::{CeerError, Result};
pub use kernel::{Budget, EvalOutcome, Nat, Program, ProgramIndex};
pub mod runs;
pub mod sets;
pub mod ceers;
pub mod jumps;
pub mod reductions;
pub mod verify;
pub mod experiment;
