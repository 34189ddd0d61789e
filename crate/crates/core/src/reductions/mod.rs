//! Concrete reductions between ceers, ready for the harness.

mod basic;
mod bounded;
mod jump;
mod omega;
mod saturation;

use std::fmt;

use crate::ceers::{CeerRef, MapFn};
use crate::error::{CeerError, Result};
use crate::kernel::asm::Asm;
use crate::kernel::{Budget, Nat, ProgramIndex};

pub use basic::{
    diagonalize_uniform, majorizer_from_reduction, omega_into, omega_to_bounded, omega_to_nonsimple,
    ndim_to_k, reduction_from_majorizer, via_transversal, Diagonal,
};
pub use bounded::{bounded_to_jump, bounded_to_omega_n, halve_bounded, Halving};
pub use jump::{jump_embedding, jump_transfer_backward, jump_transfer_forward, pc_to_jump};
pub use omega::{nth_prime, psi_native, psi_program, to_omega_omega};
pub use saturation::{
    collapse_containment, collapse_gadgets, collapse_pair, lift_saturation, omega_plus_absorb, satjump_collapse,
    singleton_embedding,
};

/// A claimed reduction `source ≤ target` via `map`.
#[derive(Clone)]
pub struct Reduction {
    pub name: String,
    pub map: MapFn,
    pub source: CeerRef,
    pub target: CeerRef,
    /// Claimed one-one.
    pub injective: bool,
}

impl Reduction {
    pub fn new(name: impl Into<String>, map: MapFn, source: CeerRef, target: CeerRef) -> Self {
        Reduction { name: name.into(), map, source, target, injective: false }
    }

    pub fn one_one(mut self) -> Self {
        self.injective = true;
        self
    }

    pub fn apply(&self, x: &Nat, b: &Budget) -> Result<Nat> {
        self.map.apply(x, b)
    }

    pub fn index(&self) -> Option<&ProgramIndex> {
        self.map.program()
    }
}

impl fmt::Debug for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reduction")
            .field("name", &self.name)
            .field("map", &self.map)
            .field("source", &self.source.name())
            .field("target", &self.target.name())
            .field("injective", &self.injective)
            .finish()
    }
}

/// A program answering `table[x]` and diverging off the table.
pub fn table_program(table: &[(Nat, Nat)]) -> ProgramIndex {
    let mut a = Asm::new();
    for (i, (x, v)) in table.iter().enumerate() {
        let skip = format!("skip{i}");
        a.set(1, x.clone()).jeq(0, 1, &format!("hit{i}")).jmp(2, &skip);
        a.label(&format!("hit{i}")).set(0, v.clone()).jmp(2, "halt");
        a.label(&skip);
    }
    a.label("loop").jmp(2, "loop");
    a.index()
}

/// `map` as a program: programs pass through, native maps are tabulated on
/// `[0, universe]` at `b` (undefined points diverge).
pub fn compile_map(map: &MapFn, b: &Budget) -> Result<ProgramIndex> {
    if let Some(e) = map.program() {
        return Ok(e.clone());
    }
    let mut table = Vec::new();
    for x in 0..=b.universe {
        let x = Nat::from(x);
        match map.apply(&x, b) {
            Ok(v) => table.push((x, v)),
            Err(CeerError::BudgetExceeded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(table_program(&table))
}
