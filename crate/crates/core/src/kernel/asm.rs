//! A small assembler with symbolic jump labels. The label `halt` always
//! resolves to the program length.

use std::collections::HashMap;

use super::program::{Instr, Program, ProgramIndex, Reg};
use super::Nat;

enum Item {
    Ready(Instr),
    Jeq(Reg, Reg, String),
    Jlt(Reg, Reg, String),
}

#[derive(Default)]
pub struct Asm {
    items: Vec<Item>,
    labels: HashMap<String, usize>,
    fresh: usize,
}

impl Asm {
    pub fn new() -> Self {
        Asm::default()
    }

    /// A label name not used before.
    pub fn fresh(&mut self, hint: &str) -> String {
        self.fresh += 1;
        format!("{hint}#{}", self.fresh)
    }

    pub fn label(&mut self, name: &str) -> &mut Self {
        let prev = self.labels.insert(name.to_string(), self.items.len());
        assert!(prev.is_none(), "label {name} defined twice");
        self
    }

    pub fn op(&mut self, ins: Instr) -> &mut Self {
        self.items.push(Item::Ready(ins));
        self
    }

    pub fn zero(&mut self, r: Reg) -> &mut Self {
        self.op(Instr::Zero(r))
    }

    pub fn inc(&mut self, r: Reg) -> &mut Self {
        self.op(Instr::Inc(r))
    }

    pub fn mov(&mut self, src: Reg, dst: Reg) -> &mut Self {
        self.op(Instr::Move { src, dst })
    }

    pub fn set(&mut self, dst: Reg, value: impl Into<Nat>) -> &mut Self {
        self.op(Instr::Set { dst, value: value.into() })
    }

    pub fn add(&mut self, dst: Reg, a: Reg, b: Reg) -> &mut Self {
        self.op(Instr::Add { dst, a, b })
    }

    pub fn monus(&mut self, dst: Reg, a: Reg, b: Reg) -> &mut Self {
        self.op(Instr::Monus { dst, a, b })
    }

    pub fn mul(&mut self, dst: Reg, a: Reg, b: Reg) -> &mut Self {
        self.op(Instr::Mul { dst, a, b })
    }

    pub fn div(&mut self, dst: Reg, a: Reg, b: Reg) -> &mut Self {
        self.op(Instr::Div { dst, a, b })
    }

    pub fn modulo(&mut self, dst: Reg, a: Reg, b: Reg) -> &mut Self {
        self.op(Instr::Mod { dst, a, b })
    }

    pub fn pair(&mut self, dst: Reg, a: Reg, b: Reg) -> &mut Self {
        self.op(Instr::Pair { dst, a, b })
    }

    pub fn unpair(&mut self, left: Reg, right: Reg, src: Reg) -> &mut Self {
        self.op(Instr::Unpair { left, right, src })
    }

    pub fn eval(&mut self, dst: Reg, idx: Reg, arg: Reg) -> &mut Self {
        self.op(Instr::Eval { dst, idx, arg })
    }

    pub fn eval_bounded(&mut self, dst: Reg, idx: Reg, arg: Reg, bound: Reg) -> &mut Self {
        self.op(Instr::EvalBounded { dst, idx, arg, bound })
    }

    pub fn smn(&mut self, dst: Reg, e: Reg, a: Reg) -> &mut Self {
        self.op(Instr::Smn { dst, e, a })
    }

    pub fn pad(&mut self, dst: Reg, e: Reg, n: Reg) -> &mut Self {
        self.op(Instr::Pad { dst, e, n })
    }

    pub fn jeq(&mut self, a: Reg, b: Reg, label: &str) -> &mut Self {
        self.items.push(Item::Jeq(a, b, label.to_string()));
        self
    }

    pub fn jlt(&mut self, a: Reg, b: Reg, label: &str) -> &mut Self {
        self.items.push(Item::Jlt(a, b, label.to_string()));
        self
    }

    /// Unconditional jump (compares register `scratch` with itself).
    pub fn jmp(&mut self, scratch: Reg, label: &str) -> &mut Self {
        self.jeq(scratch, scratch, label)
    }

    pub fn assemble(&self) -> Program {
        let len = self.items.len();
        let resolve = |l: &str| -> usize {
            if l == "halt" {
                return len;
            }
            *self.labels.get(l).unwrap_or_else(|| panic!("undefined label {l}"))
        };
        let instrs = self
            .items
            .iter()
            .map(|it| match it {
                Item::Ready(i) => i.clone(),
                Item::Jeq(a, b, l) => Instr::Jeq { a: *a, b: *b, addr: resolve(l) },
                Item::Jlt(a, b, l) => Instr::Jlt { a: *a, b: *b, addr: resolve(l) },
            })
            .collect();
        Program::new(instrs).expect("assembled program is well formed")
    }

    pub fn index(&self) -> ProgramIndex {
        self.assemble().encode()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eval;

    #[test]
    fn labels_resolve() {
        // r0 := 2 * r0 via a counting loop
        let mut a = Asm::new();
        a.zero(1).zero(2).label("top").jeq(1, 0, "done").inc(1).inc(2).inc(2).jmp(3, "top");
        a.label("done").mov(2, 0);
        let idx = a.index();
        assert_eq!(eval(&idx, &Nat::from(6u32), 1000).into_value(), Some(Nat::from(12u32)));
    }
}
