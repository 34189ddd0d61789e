use super::{compile_map, Reduction};
use crate::ceers::{CeerRef, MapFn, PcWitness};
use crate::error::Result;
use crate::jumps::halting_jump;
use crate::kernel::asm::Asm;
use crate::kernel::{builtin_indices, Budget, ProgramIndex};

/// `x ↦ smn(C, x)` with `φ_{smn(C,x)}(z) = ψ(x)`.
pub fn pc_program(psi: &ProgramIndex) -> ProgramIndex {
    let c = Asm::new().unpair(1, 2, 0).set(3, psi.0.clone()).eval(0, 3, 1).index();
    Asm::new().set(1, c.0).smn(0, 1, 0).index()
}

/// `x ↦ g(x)` with `φ_{g(x)}(z) = f(φ_x(x))`.
pub fn forward_program(f: &ProgramIndex) -> ProgramIndex {
    let c = Asm::new().unpair(1, 2, 0).eval(3, 1, 1).set(4, f.0.clone()).eval(0, 4, 3).index();
    Asm::new().set(1, c.0).smn(0, 1, 0).index()
}

/// `R ≤ E′` from `R ∈ PC^E`. A native `ψ` is tabulated at `build`.
pub fn pc_to_jump(source: CeerRef, w: &PcWitness, build: &Budget) -> Result<Reduction> {
    let psi = compile_map(&w.psi, build)?;
    let target = halting_jump(w.target.clone(), 1);
    let name = format!("{} ≤ {}", source.name(), target.name());
    Ok(Reduction::new(name, MapFn::Program(pc_program(&psi)), source, target).one_one())
}

/// `E ≤ E′` via `x ↦ s(x)`, `κ(s(x)) = x`.
pub fn jump_embedding(e: CeerRef) -> Reduction {
    let target = halting_jump(e.clone(), 1);
    let name = format!("{} ≤ {}", e.name(), target.name());
    Reduction::new(name, MapFn::Program(builtin_indices().constant_maker.clone()), e, target).one_one()
}

/// `E₁′ ≤ E₂′` from `f: E₁ ≤ E₂`.
pub fn jump_transfer_forward(f: &Reduction, build: &Budget) -> Result<Reduction> {
    let p = compile_map(&f.map, build)?;
    let (source, target) = (halting_jump(f.source.clone(), 1), halting_jump(f.target.clone(), 1));
    let name = format!("{} ≤ {}", source.name(), target.name());
    Ok(Reduction::new(name, MapFn::Program(forward_program(&p)), source, target).one_one())
}

/// `E₁ ≤ E₂` from `f: E₁′ ≤ E₂′` via `g(x) = κ(f(s(x)))`. Totality rests on
/// `f` preserving `K`; a stall shows up as an exceeded budget.
pub fn jump_transfer_backward(f: &Reduction, e1: CeerRef, e2: CeerRef, build: &Budget) -> Result<Reduction> {
    let p = compile_map(&f.map, build)?;
    let mut a = Asm::new();
    a.set(1, builtin_indices().constant_maker.0.clone()).eval(2, 1, 0);
    a.set(3, p.0).eval(4, 3, 2).eval(0, 4, 4);
    let name = format!("{} ≤ {}", e1.name(), e2.name());
    Ok(Reduction::new(name, MapFn::Program(a.index()), e1, e2))
}
