//! Computably enumerable equivalence relations seen through budgets.

mod basic;
mod bounded;
mod derived;
pub mod fragment;
pub(crate) mod indexing;
mod setwise;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CeerError, Result};
use crate::kernel::{Budget, Machine, Nat, ProgramIndex};

pub use basic::{from_function, from_pairs, h, id, omega, r_infinity, FromPairs};
pub use bounded::{
    bounded_truncate, bounded_truncate_of, e_n, explicit, periodic_blocks, k_pairs, k_triples,
    universal_bounded, BlockPattern, Truncated,
};
pub use derived::{cylinder, join};
pub use fragment::{FragCache, Fragment, FragmentStats, UnionFind};
pub use indexing::{iso_rho, iterative_to_pairs, pairs_to_iterative, IsoRho};
pub use setwise::{from_sets, interval, k_interval, row_ceer, layers_finite, layers_bounded};

/// Caller-asserted properties. Only the bound is fragment-checkable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Promises {
    /// Every class has at most this many elements.
    pub bound: Option<u64>,
    pub finite_classes: bool,
    pub computable_classes: bool,
    /// No class is a singleton.
    pub nontrivial: bool,
}

impl Promises {
    pub fn bounded(k: u64) -> Self {
        Promises { bound: Some(k), finite_classes: true, ..Promises::default() }
    }
}

/// A ceer. `generators(b)` lists the pairs enumerated within `b`; their
/// closure is the stage approximation. `confirms` is sound (a confirmed pair
/// is really equivalent) and monotone in the budget; so is `refutes` for
/// inequivalence.
pub trait Ceer: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn promises(&self) -> Promises {
        Promises::default()
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)>;

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        Arc::new(Fragment::from_pairs(self.generators(b), *b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x == y || self.fragment(b).same(x, y)
    }

    fn refutes(&self, _x: &Nat, _y: &Nat, _b: &Budget) -> bool {
        false
    }

    fn has_refuter(&self) -> bool {
        false
    }

    /// `refutes` answers every inequivalent pair at every budget.
    fn decidable(&self) -> bool {
        false
    }

    /// An index `e` such that this ceer is generated by the pairs coded in `W_e`.
    fn index(&self) -> Option<ProgramIndex> {
        None
    }
}

pub type CeerRef = Arc<dyn Ceer>;

pub fn fragment(r: &dyn Ceer, b: &Budget) -> Arc<Fragment> {
    r.fragment(b)
}

pub type NativeFn = Arc<dyn Fn(&Nat, &Budget) -> Result<Nat> + Send + Sync>;

/// A (possibly partial) function on naturals, given natively or as a program.
/// `Err(BudgetExceeded)` means no value within the budget.
#[derive(Clone)]
pub enum MapFn {
    Native(NativeFn),
    Program(ProgramIndex),
}

impl MapFn {
    pub fn native(f: impl Fn(&Nat, &Budget) -> Result<Nat> + Send + Sync + 'static) -> Self {
        MapFn::Native(Arc::new(f))
    }

    pub fn total(f: impl Fn(&Nat) -> Nat + Send + Sync + 'static) -> Self {
        MapFn::Native(Arc::new(move |x, _| Ok(f(x))))
    }

    pub fn apply(&self, x: &Nat, b: &Budget) -> Result<Nat> {
        match self {
            MapFn::Native(f) => f(x, b),
            MapFn::Program(e) => Machine::new()
                .eval(e, x, b.fuel)
                .into_value()
                .ok_or_else(|| CeerError::budget(format!("φ_{e}({x}) within fuel {}", b.fuel))),
        }
    }

    pub fn program(&self) -> Option<&ProgramIndex> {
        match self {
            MapFn::Program(e) => Some(e),
            MapFn::Native(_) => None,
        }
    }
}

impl fmt::Debug for MapFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapFn::Native(_) => f.write_str("MapFn::Native"),
            MapFn::Program(e) => write!(f, "MapFn::Program({e})"),
        }
    }
}

/// A partial `ψ` claimed to witness `x R y ⟺ x = y ∨ ψ(x)↓ E ψ(y)↓`.
#[derive(Clone, Debug)]
pub struct PcWitness {
    pub psi: MapFn,
    pub target: CeerRef,
}
