//! The interpreter. Nested `EVAL` calls run on an explicit frame stack so deep
//! self-application cannot overflow the native stack.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::codec::{pair, unpair};
use super::gadgets::{pad, smn};
use super::program::{Instr, Program, ProgramIndex};
use super::Nat;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EvalOutcome {
    Converged {
        #[serde(with = "super::nat_serde")]
        value: Nat,
        steps: u64,
    },
    OutOfFuel,
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Nat> {
        match self {
            EvalOutcome::Converged { value, .. } => Some(value),
            EvalOutcome::OutOfFuel => None,
        }
    }

    pub fn into_value(self) -> Option<Nat> {
        match self {
            EvalOutcome::Converged { value, .. } => Some(value),
            EvalOutcome::OutOfFuel => None,
        }
    }

    pub fn steps(&self) -> Option<u64> {
        match self {
            EvalOutcome::Converged { steps, .. } => Some(*steps),
            EvalOutcome::OutOfFuel => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, EvalOutcome::Converged { .. })
    }
}

/// Values longer than this many bits cost one extra step per block.
const COST_BLOCK_BITS: u64 = 4096;
const CACHE_LIMIT: usize = 1 << 14;

struct Frame {
    prog: Arc<Program>,
    pc: usize,
    regs: Vec<Nat>,
    deadline: u64,
    /// Register of the caller that receives the result, and whether the call
    /// was a bounded one.
    ret: Option<(usize, bool)>,
}

/// An interpreter with a decode cache. Results never depend on cache state.
#[derive(Default)]
pub struct Machine {
    cache: HashMap<Nat, Arc<Program>>,
}

impl Machine {
    pub fn new() -> Self {
        Machine::default()
    }

    fn load(&mut self, code: &Nat) -> Arc<Program> {
        if let Some(p) = self.cache.get(code) {
            return p.clone();
        }
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        let p = Arc::new(ProgramIndex(code.clone()).decode());
        self.cache.insert(code.clone(), p.clone());
        p
    }

    pub fn eval(&mut self, e: &ProgramIndex, x: &Nat, fuel: u64) -> EvalOutcome {
        let prog = self.load(&e.0);
        self.run(prog, x, fuel)
    }

    pub fn eval_program(&mut self, p: &Program, x: &Nat, fuel: u64) -> EvalOutcome {
        self.run(Arc::new(p.clone()), x, fuel)
    }

    /// `ψ^n(x)` with one fuel pool shared by all applications.
    pub fn iter_eval(&mut self, e: &ProgramIndex, x: &Nat, n: u64, fuel: u64) -> EvalOutcome {
        let mut value = x.clone();
        let mut steps = 0u64;
        for _ in 0..n {
            match self.eval(e, &value, fuel - steps) {
                EvalOutcome::Converged { value: v, steps: s } => {
                    value = v;
                    steps += s;
                }
                EvalOutcome::OutOfFuel => return EvalOutcome::OutOfFuel,
            }
        }
        EvalOutcome::Converged { value, steps }
    }

    fn frame(prog: Arc<Program>, input: Nat, deadline: u64, ret: Option<(usize, bool)>) -> Frame {
        let mut regs = vec![Nat::zero(); prog.register_count()];
        regs[0] = input;
        Frame { prog, pc: 0, regs, deadline, ret }
    }

    fn run(&mut self, prog: Arc<Program>, x: &Nat, fuel: u64) -> EvalOutcome {
        let mut used = 0u64;
        let mut stack = vec![Self::frame(prog, x.clone(), fuel, None)];
        loop {
            let top = stack.last_mut().expect("non-empty stack");
            if top.pc == top.prog.len() {
                let frame = stack.pop().expect("non-empty stack");
                let value = frame.regs.into_iter().next().unwrap_or_default();
                let Some(caller) = stack.last_mut() else {
                    return EvalOutcome::Converged { value, steps: used };
                };
                let (dst, bounded) = frame.ret.expect("nested frame has a return slot");
                caller.regs[dst] = if bounded { value + 1u32 } else { value };
                caller.pc += 1;
                continue;
            }
            if used >= top.deadline {
                let deadline = top.deadline;
                let root = stack
                    .iter()
                    .position(|f| f.deadline == deadline)
                    .expect("top frame matches");
                if root == 0 {
                    return EvalOutcome::OutOfFuel;
                }
                stack.truncate(root + 1);
                let frame = stack.pop().expect("root frame");
                let (dst, _) = frame.ret.expect("nested frame has a return slot");
                let caller = stack.last_mut().expect("caller frame");
                caller.regs[dst] = Nat::zero();
                caller.pc += 1;
                used = deadline;
                continue;
            }
            let ins = &top.prog.instrs()[top.pc];
            let r = &mut top.regs;
            let mut cost = 1u64;
            let mut next = top.pc + 1;
            let ix = |reg: u32| reg as usize;
            match ins {
                Instr::Zero(a) => r[ix(*a)] = Nat::zero(),
                Instr::Inc(a) => r[ix(*a)] += 1u32,
                Instr::Move { src, dst } => r[ix(*dst)] = r[ix(*src)].clone(),
                Instr::Jeq { a, b, addr } => {
                    if r[ix(*a)] == r[ix(*b)] {
                        if a == b && *addr == top.pc {
                            used = top.deadline;
                            continue;
                        }
                        next = *addr;
                    }
                }
                Instr::Jlt { a, b, addr } => {
                    if r[ix(*a)] < r[ix(*b)] {
                        next = *addr;
                    }
                }
                Instr::Set { dst, value } => r[ix(*dst)] = value.clone(),
                Instr::Add { dst, a, b } => r[ix(*dst)] = &r[ix(*a)] + &r[ix(*b)],
                Instr::Monus { dst, a, b } => {
                    let (x, y) = (&r[ix(*a)], &r[ix(*b)]);
                    r[ix(*dst)] = if x > y { x - y } else { Nat::zero() };
                }
                Instr::Mul { dst, a, b } => r[ix(*dst)] = &r[ix(*a)] * &r[ix(*b)],
                Instr::Div { dst, a, b } => {
                    let y = &r[ix(*b)];
                    r[ix(*dst)] = if y.is_zero() { Nat::zero() } else { &r[ix(*a)] / y };
                }
                Instr::Mod { dst, a, b } => {
                    let y = &r[ix(*b)];
                    r[ix(*dst)] = if y.is_zero() { r[ix(*a)].clone() } else { &r[ix(*a)] % y };
                }
                Instr::Pair { dst, a, b } => r[ix(*dst)] = pair(&r[ix(*a)], &r[ix(*b)]),
                Instr::Unpair { left, right, src } => {
                    let (x, y) = unpair(&r[ix(*src)]);
                    r[ix(*left)] = x;
                    r[ix(*right)] = y;
                }
                Instr::Smn { dst, e, a } => {
                    r[ix(*dst)] = smn(&ProgramIndex(r[ix(*e)].clone()), &r[ix(*a)]).0;
                }
                Instr::Pad { dst, e, n } => {
                    let n = r[ix(*n)].to_u64().unwrap_or(u64::MAX >> 8).min(1 << 20);
                    r[ix(*dst)] = pad(&ProgramIndex(r[ix(*e)].clone()), n).0;
                }
                Instr::Eval { dst, idx, arg } | Instr::EvalBounded { dst, idx, arg, .. } => {
                    let code = r[ix(*idx)].clone();
                    let input = r[ix(*arg)].clone();
                    let dst = ix(*dst);
                    let mut deadline = top.deadline;
                    let bounded = if let Instr::EvalBounded { bound, .. } = ins {
                        let b = r[ix(*bound)].to_u64().unwrap_or(u64::MAX);
                        deadline = deadline.min((used + 1).saturating_add(b));
                        true
                    } else {
                        false
                    };
                    used += 1;
                    let prog = self.load(&code);
                    stack.push(Self::frame(prog, input, deadline, Some((dst, bounded))));
                    continue;
                }
            }
            if let Some(v) = written(ins).map(|d| &r[ix(d)]) {
                cost += v.bits() / COST_BLOCK_BITS;
            }
            top.pc = next;
            used = used.saturating_add(cost);
        }
    }
}

fn written(ins: &Instr) -> Option<u32> {
    use Instr::*;
    match ins {
        Add { dst, .. } | Mul { dst, .. } | Pair { dst, .. } | Smn { dst, .. } | Pad { dst, .. } => {
            Some(*dst)
        }
        Unpair { left, .. } => Some(*left),
        _ => None,
    }
}

pub fn eval(e: &ProgramIndex, x: &Nat, fuel: u64) -> EvalOutcome {
    Machine::new().eval(e, x, fuel)
}

pub fn iter_eval(e: &ProgramIndex, x: &Nat, n: u64, fuel: u64) -> EvalOutcome {
    Machine::new().iter_eval(e, x, n, fuel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prog(instrs: Vec<Instr>) -> ProgramIndex {
        Program::new(instrs).unwrap().encode()
    }

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn identity_and_successor() {
        assert_eq!(
            eval(&ProgramIndex::from(0), &n(5), 100),
            EvalOutcome::Converged { value: n(5), steps: 0 }
        );
        let succ = prog(vec![Instr::Inc(0)]);
        assert_eq!(eval(&succ, &n(7), 100).into_value(), Some(n(8)));
        assert_eq!(iter_eval(&succ, &n(3), 4, 1000).into_value(), Some(n(7)));
        assert_eq!(iter_eval(&succ, &n(3), 0, 0).into_value(), Some(n(3)));
    }

    #[test]
    fn self_loop_runs_out_of_fuel() {
        let l = prog(vec![Instr::Jeq { a: 0, b: 0, addr: 0 }]);
        assert_eq!(eval(&l, &n(0), 1_000_000), EvalOutcome::OutOfFuel);
    }

    #[test]
    fn counting_loop_steps() {
        // r1 := 0; loop: if r1 == r0 halt; r1++; jump loop
        let p = prog(vec![
            Instr::Zero(1),
            Instr::Jeq { a: 1, b: 0, addr: 4 },
            Instr::Inc(1),
            Instr::Jeq { a: 2, b: 2, addr: 1 },
            Instr::Move { src: 1, dst: 0 },
        ]);
        // 1 + 3 per iteration + final test + move
        assert_eq!(eval(&p, &n(4), 1000), EvalOutcome::Converged { value: n(4), steps: 15 });
        assert_eq!(eval(&p, &n(4), 14), EvalOutcome::OutOfFuel);
        assert!(eval(&p, &n(4), 15).is_converged());
    }

    #[test]
    fn nested_eval_charges_outer_fuel() {
        let succ = prog(vec![Instr::Inc(0)]);
        let outer = prog(vec![
            Instr::Set { dst: 1, value: succ.0.clone() },
            Instr::Eval { dst: 0, idx: 1, arg: 0 },
        ]);
        assert_eq!(eval(&outer, &n(2), 10), EvalOutcome::Converged { value: n(3), steps: 3 });
        assert_eq!(eval(&outer, &n(2), 2), EvalOutcome::OutOfFuel);
    }

    #[test]
    fn bounded_eval_reports_timeouts() {
        let lp = prog(vec![Instr::Jeq { a: 0, b: 0, addr: 0 }]);
        let succ = prog(vec![Instr::Inc(0)]);
        for (target, expect) in [(lp, 0u64), (succ, 6)] {
            let p = prog(vec![
                Instr::Set { dst: 1, value: target.0.clone() },
                Instr::Set { dst: 2, value: n(10) },
                Instr::EvalBounded { dst: 0, idx: 1, arg: 0, bound: 2 },
            ]);
            assert_eq!(eval(&p, &n(4), 100).into_value(), Some(n(expect)));
            // the bound exceeds the remaining fuel
            if expect == 0 {
                assert_eq!(eval(&p, &n(4), 8), EvalOutcome::OutOfFuel);
            }
        }
    }

    #[test]
    fn deep_self_application_does_not_overflow() {
        let kappa = prog(vec![Instr::Eval { dst: 0, idx: 0, arg: 0 }]);
        assert_eq!(eval(&kappa, &kappa.0, 200_000), EvalOutcome::OutOfFuel);
    }
}
