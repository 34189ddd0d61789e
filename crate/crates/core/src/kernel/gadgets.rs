//! Fixed programs and index transformers: built-in functions, s-m-n, padding,
//! the Kleene fixed point, and the κ gadgets.

use std::sync::OnceLock;

use num_traits::Zero;

use super::asm::Asm;
use super::program::{Instr, Program, ProgramIndex};
use super::Nat;
use crate::error::{CeerError, Result};

/// Extra steps taken by `smn(e, a)` on top of the run of `e`.
pub const SMN_OVERHEAD: u64 = 4;

/// Indices of the built-in programs.
#[derive(Clone, Debug)]
pub struct Builtins {
    pub identity: ProgramIndex,
    pub successor: ProgramIndex,
    pub self_loop: ProgramIndex,
    /// `x ↦ φ_x(x)`.
    pub kappa: ProgramIndex,
    /// `⟨a, b⟩ ↦ a`.
    pub left_proj: ProgramIndex,
    /// `⟨a, b⟩ ↦ b`.
    pub right_proj: ProgramIndex,
    /// `⟨x, y⟩ ↦ φ_{φ_x(x)}(y)`.
    pub diag_universal: ProgramIndex,
    /// `⟨⟨f, g⟩, x⟩ ↦ φ_f(φ_g(x))`.
    pub compose_universal: ProgramIndex,
    /// `⟨f, g⟩ ↦` an index of `φ_f ∘ φ_g`.
    pub compose: ProgramIndex,
    /// `x ↦` an index of the constant function `x`.
    pub constant_maker: ProgramIndex,
}

impl Builtins {
    pub fn named(&self) -> Vec<(&'static str, ProgramIndex)> {
        vec![
            ("identity", self.identity.clone()),
            ("successor", self.successor.clone()),
            ("self_loop", self.self_loop.clone()),
            ("kappa", self.kappa.clone()),
            ("left_proj", self.left_proj.clone()),
            ("right_proj", self.right_proj.clone()),
            ("diag_universal", self.diag_universal.clone()),
            ("compose_universal", self.compose_universal.clone()),
            ("compose", self.compose.clone()),
            ("constant_maker", self.constant_maker.clone()),
            ("constant_0", constant(&Nat::zero())),
        ]
    }
}

fn code(instrs: Vec<Instr>) -> ProgramIndex {
    Program::new(instrs).expect("gadget is well formed").encode()
}

pub fn builtin_indices() -> &'static Builtins {
    static B: OnceLock<Builtins> = OnceLock::new();
    B.get_or_init(|| {
        let left_proj = Asm::new().unpair(0, 1, 0).index();
        let compose_universal = Asm::new()
            .unpair(1, 2, 0)
            .unpair(3, 4, 1)
            .eval(2, 4, 2)
            .eval(0, 3, 2)
            .index();
        Builtins {
            identity: ProgramIndex::from(0),
            successor: Asm::new().inc(0).index(),
            self_loop: Program::divergent().encode(),
            kappa: Asm::new().eval(0, 0, 0).index(),
            right_proj: Asm::new().unpair(1, 0, 0).index(),
            diag_universal: Asm::new().unpair(1, 2, 0).eval(1, 1, 1).eval(0, 1, 2).index(),
            compose: Asm::new().set(1, compose_universal.0.clone()).smn(0, 1, 0).index(),
            constant_maker: Asm::new().set(1, left_proj.0.clone()).smn(0, 1, 0).index(),
            left_proj,
            compose_universal,
        }
    })
}

pub fn constant(c: &Nat) -> ProgramIndex {
    code(vec![Instr::Set { dst: 0, value: c.clone() }])
}

/// Index of `φ_f ∘ φ_g`.
pub fn compose(f: &ProgramIndex, g: &ProgramIndex) -> ProgramIndex {
    smn(&builtin_indices().compose_universal, &super::pair(&f.0, &g.0))
}

/// `φ_{smn(e,a)}(x) = φ_e(⟨a, x⟩)`.
pub fn smn(e: &ProgramIndex, a: &Nat) -> ProgramIndex {
    code(vec![
        Instr::Set { dst: 1, value: a.clone() },
        Instr::Pair { dst: 0, a: 1, b: 0 },
        Instr::Set { dst: 1, value: e.0.clone() },
        Instr::Eval { dst: 0, idx: 1, arg: 0 },
    ])
}

/// Same function as `e`, strictly increasing in `n`, `pad(e, 0) = e`.
pub fn pad(e: &ProgramIndex, n: u64) -> ProgramIndex {
    if n == 0 {
        return e.clone();
    }
    let filler = |count: u64| (0..count).map(|_| Instr::Zero(0));
    let mut instrs: Vec<Instr> = match e.try_decode() {
        Some(p) => {
            let end = p.len() + n as usize;
            let mut v = p.instrs().to_vec();
            v.push(Instr::Jeq { a: 0, b: 0, addr: end });
            v
        }
        None => {
            let mut v = Program::divergent().instrs().to_vec();
            v.extend(filler(e.0.bits()));
            v
        }
    };
    instrs.extend(filler(n - 1));
    code(instrs)
}

/// Returns `e` with `φ_e = φ_{φ_t(e)}`. Only `t(smn(U, d))` is ever evaluated,
/// for one fixed `d`, and only when `e` itself is run.
pub fn fixpoint(t: &ProgramIndex) -> ProgramIndex {
    let u = &builtin_indices().diag_universal;
    let d = Asm::new()
        .set(1, u.0.clone())
        .smn(0, 1, 0)
        .set(1, t.0.clone())
        .eval(0, 1, 0)
        .index();
    smn(u, &d.0)
}

/// Transformer `e ↦ pad(e, n)`.
pub fn pad_by(n: u64) -> ProgramIndex {
    Asm::new().set(1, n).pad(0, 0, 1).index()
}

/// Transformer `e ↦` an index of the constant function `e`; its fixed point
/// prints its own index.
pub fn quine_maker() -> ProgramIndex {
    builtin_indices().constant_maker.clone()
}

/// Least `k` such that `s = pad(constant(x), k)` avoids `excluded`; then
/// `κ(s) = x`. Distinct `x` give distinct `s`.
pub fn inverse_kappa_avoiding(
    x: &Nat,
    excluded: &dyn Fn(&ProgramIndex) -> bool,
    max_tries: u64,
) -> Result<ProgramIndex> {
    let base = constant(x);
    (0..max_tries)
        .map(|k| pad(&base, k))
        .find(|s| !excluded(s))
        .ok_or_else(|| CeerError::budget(format!("no fresh κ-preimage of {x} in {max_tries} tries")))
}

/// Program behind [`shift_kappa`]: `⟨x, y⟩ ↦ κ(x) + n`.
fn shift_core(n: u64) -> ProgramIndex {
    Asm::new().unpair(0, 1, 0).eval(0, 0, 0).set(1, n).add(0, 0, 1).index()
}

/// Index of a total one-one `h` with `κ(h(x)) ≃ κ(x) + n`.
pub fn shift_kappa(n: u64) -> ProgramIndex {
    Asm::new().set(1, shift_core(n).0).smn(0, 1, 0).index()
}

/// `h(x)` for the `h` of [`shift_kappa`], computed natively.
pub fn shift_kappa_at(n: u64, x: &Nat) -> ProgramIndex {
    smn(&shift_core(n), x)
}

/// A total one-one `v` with `κ(v(x)) ≃ v(ψ(x))`.
#[derive(Clone, Debug)]
pub struct Conjugate {
    pub psi: ProgramIndex,
    pub index: ProgramIndex,
    s: ProgramIndex,
    e0: ProgramIndex,
    y0: ProgramIndex,
}

impl Conjugate {
    pub fn at(&self, x: &Nat) -> ProgramIndex {
        let inner = super::pair(&self.y0.0, x);
        smn(&self.s, &super::pair(&self.e0.0, &inner))
    }
}

pub fn conjugate_v(psi: &ProgramIndex) -> Conjugate {
    // φ_{smn(S, ⟨e, ⟨y, x⟩⟩)}(z) = φ_e(φ_y(x))
    let s = Asm::new()
        .unpair(1, 2, 0)
        .unpair(3, 4, 1)
        .unpair(5, 6, 4)
        .eval(7, 5, 6)
        .eval(0, 3, 7)
        .index();
    // e0(w) = smn(S, ⟨e0, w⟩)
    let t1 = Asm::new().set(1, s.0.clone()).smn(0, 1, 0).index();
    let t = Asm::new().set(1, t1.0).smn(0, 1, 0).index();
    let e0 = fixpoint(&t);
    // y0(x) = ⟨y0, ψ(x)⟩
    let rr = Asm::new()
        .unpair(1, 2, 0)
        .set(3, psi.0.clone())
        .eval(2, 3, 2)
        .pair(0, 1, 2)
        .index();
    let rt = Asm::new().set(1, rr.0).smn(0, 1, 0).index();
    let y0 = fixpoint(&rt);
    let index = Asm::new()
        .set(1, y0.0.clone())
        .pair(0, 1, 0)
        .set(1, e0.0.clone())
        .pair(0, 1, 0)
        .set(1, s.0.clone())
        .smn(0, 1, 0)
        .index();
    Conjugate { psi: psi.clone(), index, s, e0, y0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{eval, pair_u64};

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn builtins_compute_their_functions() {
        let b = builtin_indices();
        assert_eq!(eval(&b.successor, &n(7), 100).into_value(), Some(n(8)));
        assert_eq!(eval(&constant(&n(9)), &n(123), 100).into_value(), Some(n(9)));
        assert_eq!(eval(&b.left_proj, &pair_u64(3, 4), 100).into_value(), Some(n(3)));
        assert_eq!(eval(&b.right_proj, &pair_u64(3, 4), 100).into_value(), Some(n(4)));
        let s = constant(&n(7));
        assert_eq!(eval(&b.kappa, &s.0, 100).into_value(), Some(n(7)));
        let sq = compose(&b.successor, &b.successor);
        assert_eq!(eval(&sq, &n(1), 100).into_value(), Some(n(3)));
    }

    #[test]
    fn smn_projections() {
        let b = builtin_indices();
        for x in 0..=20 {
            let l = eval(&smn(&b.left_proj, &n(3)), &n(x), 100);
            assert_eq!(l, crate::kernel::EvalOutcome::Converged { value: n(3), steps: 5 });
            assert_eq!(eval(&smn(&b.right_proj, &n(3)), &n(x), 100).into_value(), Some(n(x)));
        }
        assert_ne!(smn(&b.left_proj, &n(1)), smn(&b.left_proj, &n(2)));
    }

    #[test]
    fn padding_preserves_function_and_grows() {
        let succ = &builtin_indices().successor;
        for x in 0..=20 {
            assert_eq!(eval(&pad(succ, 5), &n(x), 100).into_value(), Some(n(x + 1)));
        }
        assert_eq!(pad(succ, 0), *succ);
        assert!(succ < &pad(succ, 1));
        assert!(pad(succ, 1) < pad(succ, 2) && pad(succ, 2) < pad(succ, 3));
        let junk = ProgramIndex::from(1);
        assert!(junk < pad(&junk, 1) && pad(&junk, 1) < pad(&junk, 2));
        assert!(eval(&pad(&junk, 2), &n(0), 1000).value().is_none());
    }

    #[test]
    fn quine_prints_itself() {
        let e = fixpoint(&quine_maker());
        assert_eq!(eval(&e, &n(0), 10_000).into_value(), Some(e.0.clone()));
    }

    #[test]
    fn padded_fixpoint_agrees() {
        let e = fixpoint(&pad_by(1));
        let te = pad(&e, 1);
        for x in 0..=5 {
            let a = eval(&e, &n(x), 10_000);
            let b = eval(&te, &n(x), 10_000);
            assert!(a.value().is_none() && b.value().is_none());
        }
    }

    #[test]
    fn inverse_kappa_skips_excluded() {
        let kappa = &builtin_indices().kappa;
        let s7 = inverse_kappa_avoiding(&n(7), &|_| false, 10).unwrap();
        let s8 = inverse_kappa_avoiding(&n(8), &|_| false, 10).unwrap();
        assert_ne!(s7, s8);
        assert_eq!(eval(kappa, &s7.0, 100).into_value(), Some(n(7)));
        let s = inverse_kappa_avoiding(&n(7), &|c| *c == s7, 10).unwrap();
        assert_ne!(s, s7);
        assert_eq!(eval(kappa, &s.0, 100).into_value(), Some(n(7)));
        assert!(inverse_kappa_avoiding(&n(7), &|_| true, 5).is_err());
    }

    #[test]
    fn shift_kappa_adds() {
        let kappa = &builtin_indices().kappa;
        let s5 = constant(&n(5));
        let h = shift_kappa(2);
        let hx = eval(&h, &s5.0, 100).into_value().unwrap();
        assert_eq!(hx, shift_kappa_at(2, &s5.0).0);
        assert_eq!(eval(kappa, &hx, 1000).into_value(), Some(n(7)));
        let lp = &builtin_indices().self_loop;
        assert!(eval(kappa, &shift_kappa_at(2, &lp.0).0, 5000).value().is_none());
    }

    #[test]
    fn conjugate_follows_successor() {
        let c = conjugate_v(&builtin_indices().successor);
        let kappa = &builtin_indices().kappa;
        for x in 0..=10 {
            let vx = c.at(&n(x));
            assert_eq!(eval(&c.index, &n(x), 1000).into_value(), Some(vx.0.clone()));
            let k = eval(kappa, &vx.0, 100_000).into_value();
            assert_eq!(k, Some(c.at(&n(x + 1)).0));
        }
        assert_ne!(c.at(&n(3)), c.at(&n(4)));
    }
}
