//! Register-machine programs and their Gödel numbering.
//!
//! A code `c >= 1` is read as the bit string of `c` after its leading one bit.
//! That string must split exactly into instructions, each an Elias-gamma coded
//! opcode followed by its Elias-gamma coded operands (every field stored as
//! `value + 1`). Code `0` is the empty program. Anything else, including code
//! `1`, is non-canonical and decodes to the everywhere-divergent program.

use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Nat;

pub type Reg = u32;

/// Registers above this bound make a code non-canonical.
pub const MAX_REGISTER: Reg = 1 << 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Zero(Reg),
    Inc(Reg),
    Move { src: Reg, dst: Reg },
    /// Jump to `addr` when `r[a] == r[b]`.
    Jeq { a: Reg, b: Reg, addr: usize },
    Set { dst: Reg, value: Nat },
    Add { dst: Reg, a: Reg, b: Reg },
    /// Truncated subtraction.
    Monus { dst: Reg, a: Reg, b: Reg },
    Mul { dst: Reg, a: Reg, b: Reg },
    /// Division by zero yields zero.
    Div { dst: Reg, a: Reg, b: Reg },
    /// Modulus by zero yields the dividend.
    Mod { dst: Reg, a: Reg, b: Reg },
    Pair { dst: Reg, a: Reg, b: Reg },
    Unpair { left: Reg, right: Reg, src: Reg },
    /// `r[dst] := φ_{r[idx]}(r[arg])`, inner steps charged to the caller.
    Eval { dst: Reg, idx: Reg, arg: Reg },
    /// Bounded evaluation: `0` if `φ_{r[idx]}(r[arg])` does not halt within
    /// `r[bound]` steps, otherwise `value + 1`.
    EvalBounded { dst: Reg, idx: Reg, arg: Reg, bound: Reg },
    /// `r[dst] := smn(r[e], r[a])`.
    Smn { dst: Reg, e: Reg, a: Reg },
    /// `r[dst] := pad(r[e], r[n])`.
    Pad { dst: Reg, e: Reg, n: Reg },
    /// Jump to `addr` when `r[a] < r[b]`.
    Jlt { a: Reg, b: Reg, addr: usize },
}

impl Instr {
    fn opcode(&self) -> u64 {
        match self {
            Instr::Zero(_) => 0,
            Instr::Inc(_) => 1,
            Instr::Move { .. } => 2,
            Instr::Jeq { .. } => 3,
            Instr::Set { .. } => 4,
            Instr::Add { .. } => 5,
            Instr::Monus { .. } => 6,
            Instr::Mul { .. } => 7,
            Instr::Div { .. } => 8,
            Instr::Mod { .. } => 9,
            Instr::Pair { .. } => 10,
            Instr::Unpair { .. } => 11,
            Instr::Eval { .. } => 12,
            Instr::EvalBounded { .. } => 13,
            Instr::Smn { .. } => 14,
            Instr::Pad { .. } => 15,
            Instr::Jlt { .. } => 16,
        }
    }

    pub fn jump_target(&self) -> Option<usize> {
        match self {
            Instr::Jeq { addr, .. } | Instr::Jlt { addr, .. } => Some(*addr),
            _ => None,
        }
    }

    fn registers(&self) -> Vec<Reg> {
        use Instr::*;
        match self {
            Zero(r) | Inc(r) => vec![*r],
            Move { src, dst } => vec![*src, *dst],
            Jeq { a, b, .. } | Jlt { a, b, .. } => vec![*a, *b],
            Set { dst, .. } => vec![*dst],
            Add { dst, a, b }
            | Monus { dst, a, b }
            | Mul { dst, a, b }
            | Div { dst, a, b }
            | Mod { dst, a, b }
            | Pair { dst, a, b } => vec![*dst, *a, *b],
            Unpair { left, right, src } => vec![*left, *right, *src],
            Eval { dst, idx, arg } => vec![*dst, *idx, *arg],
            EvalBounded { dst, idx, arg, bound } => vec![*dst, *idx, *arg, *bound],
            Smn { dst, e, a } => vec![*dst, *e, *a],
            Pad { dst, e, n } => vec![*dst, *e, *n],
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Instr::*;
        match self {
            Zero(r) => write!(f, "ZERO r{r}"),
            Inc(r) => write!(f, "INC r{r}"),
            Move { src, dst } => write!(f, "MOVE r{src} r{dst}"),
            Jeq { a, b, addr } => write!(f, "JEQ r{a} r{b} {addr}"),
            Set { dst, value } => write!(f, "SET r{dst} {value}"),
            Add { dst, a, b } => write!(f, "ADD r{dst} r{a} r{b}"),
            Monus { dst, a, b } => write!(f, "MONUS r{dst} r{a} r{b}"),
            Mul { dst, a, b } => write!(f, "MUL r{dst} r{a} r{b}"),
            Div { dst, a, b } => write!(f, "DIV r{dst} r{a} r{b}"),
            Mod { dst, a, b } => write!(f, "MOD r{dst} r{a} r{b}"),
            Pair { dst, a, b } => write!(f, "PAIR r{dst} r{a} r{b}"),
            Unpair { left, right, src } => write!(f, "UNPAIR r{left} r{right} r{src}"),
            Eval { dst, idx, arg } => write!(f, "EVAL r{dst} r{idx} r{arg}"),
            EvalBounded { dst, idx, arg, bound } => {
                write!(f, "EVALB r{dst} r{idx} r{arg} r{bound}")
            }
            Smn { dst, e, a } => write!(f, "SMN r{dst} r{e} r{a}"),
            Pad { dst, e, n } => write!(f, "PAD r{dst} r{e} r{n}"),
            Jlt { a, b, addr } => write!(f, "JLT r{a} r{b} {addr}"),
        }
    }
}

/// A decoded program. Input arrives in register 0; output is read from
/// register 0 when the program counter reaches `len()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Program {
    instrs: Vec<Instr>,
}

impl Program {
    /// Fails when a jump target exceeds the program length or a register
    /// index exceeds [`MAX_REGISTER`].
    pub fn new(instrs: Vec<Instr>) -> Result<Self, String> {
        let len = instrs.len();
        for (pc, ins) in instrs.iter().enumerate() {
            if let Some(t) = ins.jump_target() {
                if t > len {
                    return Err(format!("instruction {pc}: jump target {t} > length {len}"));
                }
            }
            if ins.registers().iter().any(|&r| r > MAX_REGISTER) {
                return Err(format!("instruction {pc}: register out of range"));
            }
        }
        Ok(Program { instrs })
    }

    pub fn empty() -> Self {
        Program::default()
    }

    /// `JEQ r0 r0 0`: loops forever on every input.
    pub fn divergent() -> Self {
        Program { instrs: vec![Instr::Jeq { a: 0, b: 0, addr: 0 }] }
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn register_count(&self) -> usize {
        self.instrs
            .iter()
            .flat_map(|i| i.registers())
            .max()
            .map_or(1, |r| r as usize + 1)
    }

    pub fn encode(&self) -> ProgramIndex {
        if self.instrs.is_empty() {
            return ProgramIndex(Nat::zero());
        }
        let mut bits = BitWriter::default();
        bits.push(true);
        for ins in &self.instrs {
            bits.gamma(&Nat::from(ins.opcode()));
            use Instr::*;
            match ins {
                Zero(r) | Inc(r) => bits.reg(*r),
                Move { src, dst } => {
                    bits.reg(*src);
                    bits.reg(*dst);
                }
                Jeq { a, b, addr } | Jlt { a, b, addr } => {
                    bits.reg(*a);
                    bits.reg(*b);
                    bits.gamma(&Nat::from(*addr));
                }
                Set { dst, value } => {
                    bits.reg(*dst);
                    bits.gamma(value);
                }
                _ => {
                    for r in ins.registers() {
                        bits.reg(r);
                    }
                }
            }
        }
        ProgramIndex(bits.finish())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pc, ins) in self.instrs.iter().enumerate() {
            writeln!(f, "{pc:4}: {ins}")?;
        }
        Ok(())
    }
}

/// A Gödel number. Every natural is a legal index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProgramIndex(#[serde(with = "crate::kernel::nat_serde")] pub Nat);

impl ProgramIndex {
    pub fn new(n: impl Into<Nat>) -> Self {
        ProgramIndex(n.into())
    }

    pub fn code(&self) -> &Nat {
        &self.0
    }

    /// `None` when the code is non-canonical.
    pub fn try_decode(&self) -> Option<Program> {
        if self.0.is_zero() {
            return Some(Program::empty());
        }
        let mut r = BitReader::new(&self.0);
        if r.remaining() == 0 {
            return None;
        }
        let mut instrs = Vec::new();
        while r.remaining() > 0 {
            instrs.push(read_instr(&mut r)?);
        }
        Program::new(instrs).ok()
    }

    /// Non-canonical codes decode to [`Program::divergent`].
    pub fn decode(&self) -> Program {
        self.try_decode().unwrap_or_else(Program::divergent)
    }

    pub fn is_canonical(&self) -> bool {
        self.try_decode().is_some()
    }
}

impl fmt::Display for ProgramIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for ProgramIndex {
    fn from(n: u64) -> Self {
        ProgramIndex(Nat::from(n))
    }
}

fn read_instr(r: &mut BitReader<'_>) -> Option<Instr> {
    let op = r.gamma()?.to_u64()?;
    let reg = |r: &mut BitReader<'_>| -> Option<Reg> {
        let v = r.gamma()?.to_u32()?;
        (v <= MAX_REGISTER).then_some(v)
    };
    let addr = |r: &mut BitReader<'_>| -> Option<usize> { r.gamma()?.to_usize() };
    use Instr::*;
    Some(match op {
        0 => Zero(reg(r)?),
        1 => Inc(reg(r)?),
        2 => Move { src: reg(r)?, dst: reg(r)? },
        3 => Jeq { a: reg(r)?, b: reg(r)?, addr: addr(r)? },
        4 => Set { dst: reg(r)?, value: r.gamma()? },
        5 => Add { dst: reg(r)?, a: reg(r)?, b: reg(r)? },
        6 => Monus { dst: reg(r)?, a: reg(r)?, b: reg(r)? },
        7 => Mul { dst: reg(r)?, a: reg(r)?, b: reg(r)? },
        8 => Div { dst: reg(r)?, a: reg(r)?, b: reg(r)? },
        9 => Mod { dst: reg(r)?, a: reg(r)?, b: reg(r)? },
        10 => Pair { dst: reg(r)?, a: reg(r)?, b: reg(r)? },
        11 => Unpair { left: reg(r)?, right: reg(r)?, src: reg(r)? },
        12 => Eval { dst: reg(r)?, idx: reg(r)?, arg: reg(r)? },
        13 => EvalBounded { dst: reg(r)?, idx: reg(r)?, arg: reg(r)?, bound: reg(r)? },
        14 => Smn { dst: reg(r)?, e: reg(r)?, a: reg(r)? },
        15 => Pad { dst: reg(r)?, e: reg(r)?, n: reg(r)? },
        16 => Jlt { a: reg(r)?, b: reg(r)?, addr: addr(r)? },
        _ => return None,
    })
}

#[derive(Default)]
struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    /// Elias gamma of `v + 1`.
    fn gamma(&mut self, v: &Nat) {
        let w = v + 1u32;
        let n = w.bits();
        for _ in 1..n {
            self.bits.push(false);
        }
        for i in (0..n).rev() {
            self.bits.push(w.bit(i));
        }
    }

    fn reg(&mut self, r: Reg) {
        self.gamma(&Nat::from(r));
    }

    fn finish(self) -> Nat {
        let mut bytes = vec![0u8; self.bits.len().div_ceil(8)];
        let n = self.bits.len();
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                let pos = n - 1 - i;
                bytes[pos / 8] |= 1 << (pos % 8);
            }
        }
        Nat::from_bytes_le(&bytes)
    }
}

struct BitReader<'a> {
    n: &'a Nat,
    /// Index of the next bit to read, counting down; the leading one bit is skipped.
    pos: u64,
}

impl<'a> BitReader<'a> {
    fn new(n: &'a Nat) -> Self {
        BitReader { n, pos: n.bits().saturating_sub(1) }
    }

    fn remaining(&self) -> u64 {
        self.pos
    }

    fn next(&mut self) -> Option<bool> {
        if self.pos == 0 {
            return None;
        }
        self.pos -= 1;
        Some(self.n.bit(self.pos))
    }

    /// Reads an Elias-gamma field and returns the stored value minus one.
    fn gamma(&mut self) -> Option<Nat> {
        let mut zeros = 0u64;
        loop {
            match self.next()? {
                false => zeros += 1,
                true => break,
            }
        }
        if zeros > self.pos {
            return None;
        }
        if zeros < 64 {
            let mut w = 1u64;
            for _ in 0..zeros {
                w = (w << 1) | self.next()? as u64;
            }
            return Some(Nat::from(w - 1));
        }
        // wide field: cut the bits out in one piece
        self.pos -= zeros;
        let body = (self.n >> self.pos) & ((Nat::from(1u32) << zeros) - 1u32);
        Some(body + (Nat::from(1u32) << zeros) - 1u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_program_is_code_zero() {
        assert_eq!(Program::empty().encode(), ProgramIndex::from(0));
        assert_eq!(ProgramIndex::from(0).decode(), Program::empty());
    }

    #[test]
    fn single_inc_round_trips() {
        let p = Program::new(vec![Instr::Inc(0)]).unwrap();
        let c = p.encode();
        // sentinel 1, gamma(2) = 010, gamma(1) = 1
        assert_eq!(c, ProgramIndex::from(0b1_010_1));
        assert_eq!(c.decode(), p);
    }

    #[test]
    fn malformed_jump_target_is_divergent() {
        // JEQ r0 r0 5 in a one-instruction program: sentinel, gamma(4)=00100,
        // gamma(1)=1, gamma(1)=1, gamma(6)=00110
        let bits = "1" .to_string() + "00100" + "1" + "1" + "00110";
        let c = ProgramIndex(Nat::parse_bytes(bits.as_bytes(), 2).unwrap());
        assert!(!c.is_canonical());
        assert_eq!(c.decode(), Program::divergent());
        assert!(!ProgramIndex::from(1).is_canonical());
    }

    #[test]
    fn big_constants_round_trip() {
        let v = Nat::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
        let p = Program::new(vec![
            Instr::Set { dst: 3, value: v },
            Instr::Jeq { a: 3, b: 0, addr: 2 },
            Instr::EvalBounded { dst: 0, idx: 1, arg: 2, bound: 3 },
        ])
        .unwrap();
        assert_eq!(p.encode().decode(), p);
    }
}
