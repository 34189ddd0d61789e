use num_traits::{One, ToPrimitive, Zero};

use super::Reduction;
use crate::ceers::indexing::root;
use crate::ceers::{Ceer, CeerRef, MapFn};
use crate::error::{CeerError, Result};
use crate::jumps::omega_omega;
use crate::kernel::asm::Asm;
use crate::kernel::{conjugate_v, Budget, Nat, ProgramIndex, Reg};

/// `p_i`, the `(i+1)`-th prime.
pub fn nth_prime(i: u64) -> u64 {
    let mut count = 0;
    let mut q = 1u64;
    loop {
        q += 1;
        if (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0) {
            if count == i {
                return q;
            }
            count += 1;
        }
    }
}

/// `n = p_i^s` with `s ≥ 1`, as `(i, s)`.
fn prime_power(n: &Nat) -> Option<(u64, u64)> {
    if *n < Nat::from(2u32) {
        return None;
    }
    let p = (2u64..).find(|d| (n % *d).is_zero()).expect("n >= 2 has a factor");
    let mut m = n.clone();
    let mut s = 0;
    while (&m % p).is_zero() {
        m /= p;
        s += 1;
    }
    if !m.is_one() {
        return None;
    }
    let i = (0..).find(|&i| nth_prime(i) == p).expect("p is prime");
    Some((i, s))
}

/// `ψ(p_i^s) = p_j^{s+1}` for the least `j ≤ i` with `j R_s i`; `ψ(n) = 0`
/// off the prime powers. `R_s` is the fragment at budget `(s, s, i)`.
pub fn psi_native(r: &dyn Ceer, n: &Nat) -> Nat {
    let Some((i, s)) = prime_power(n) else { return Nat::zero() };
    let f = r.fragment(&Budget::new(s, s, i));
    let j = (0..=i).find(|&j| f.same(&Nat::from(j), &Nat::from(i))).expect("i R_s i");
    Nat::from(nth_prime(j)).pow(s as u32 + 1)
}

/// Sets `flag` to 1 if `q >= 2` is prime, else 0. Scratch r8, r9; r26 = 0.
fn is_prime(a: &mut Asm, q: Reg, flag: Reg) {
    let (top, yes, no, done) = (a.fresh("pt"), a.fresh("py"), a.fresh("pn"), a.fresh("pd"));
    a.set(8, 2u32);
    a.label(&top).jeq(8, q, &yes).modulo(9, q, 8).jeq(9, 26, &no).inc(8).jmp(26, &top);
    a.label(&yes).set(flag, 1u32).jmp(26, &done);
    a.label(&no).zero(flag);
    a.label(&done);
}

/// `ψ` for `R = R_e`, as a program.
pub fn psi_program(e: &ProgramIndex) -> ProgramIndex {
    let mut a = Asm::new();
    a.zero(26).set(31, 1u32).set(29, 2u32).set(10, e.0.clone());
    a.jlt(0, 29, "none");
    // smallest factor p in r1
    a.set(1, 2u32);
    a.label("factor").modulo(2, 0, 1).jeq(2, 26, "strip").inc(1).jmp(26, "factor");
    // exponent s in r3, cofactor in r4
    a.label("strip").zero(3).mov(0, 4);
    a.label("div").modulo(2, 4, 1).jeq(2, 26, "divide").jmp(26, "cofactor");
    a.label("divide").div(4, 4, 1).inc(3).jmp(26, "div");
    a.label("cofactor").jeq(4, 31, "index").jmp(26, "none");
    // i in r5: primes below p
    a.label("index").zero(5).set(6, 2u32);
    a.label("count").jeq(6, 1, "forest");
    is_prime(&mut a, 6, 7);
    a.add(5, 5, 7).inc(6).jmp(26, "count");
    // forest of R_s in r11
    a.label("forest").zero(11).zero(12);
    a.label("edge").jlt(3, 12, "built");
    a.eval_bounded(13, 10, 12, 3).jeq(13, 26, "nextedge");
    a.unpair(14, 15, 12).jeq(14, 15, "nextedge");
    root(&mut a, 11, 14, 16);
    root(&mut a, 11, 15, 17);
    a.jeq(16, 17, "nextedge").pair(18, 16, 17).pair(11, 18, 11).inc(11);
    a.label("nextedge").inc(12).jmp(26, "edge");
    // least j with root(j) = root(i), in r12
    a.label("built");
    root(&mut a, 11, 5, 19);
    a.zero(12);
    a.label("least");
    root(&mut a, 11, 12, 16);
    a.jeq(16, 19, "prime").inc(12).jmp(26, "least");
    // p_j in r6
    a.label("prime").set(6, 1u32).zero(14);
    a.label("scan").inc(6);
    is_prime(&mut a, 6, 7);
    a.jeq(7, 26, "scan").jeq(14, 12, "power").inc(14).jmp(26, "scan");
    a.label("power").set(0, 1u32).zero(13).inc(3);
    a.label("mul").jeq(13, 3, "halt").mul(0, 0, 6).inc(13).jmp(26, "mul");
    a.label("none").zero(0);
    a.index()
}

/// `R ≤ ω^{(ω)}` via `f(i) = v(p_i)`, `v` conjugating `κ` to `ψ`. Needs an
/// index of `R`.
pub fn to_omega_omega(r: CeerRef) -> Result<Reduction> {
    let e = r.index().ok_or_else(|| CeerError::Unsupported(format!("{} has no index", r.name())))?;
    let v = conjugate_v(&psi_program(&e));
    let map = MapFn::native(move |i, _| {
        let i = i.to_u64().ok_or_else(|| CeerError::budget("argument too large"))?;
        Ok(v.at(&Nat::from(nth_prime(i))).0)
    });
    let target = omega_omega();
    Ok(Reduction::new(format!("{} ≤ {}", r.name(), target.name()), map, r, target).one_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceers::{from_pairs, omega};
    use crate::kernel::{eval, pair_u64};

    fn lister(codes: &[Nat]) -> ProgramIndex {
        let mut a = Asm::new();
        for c in codes {
            a.set(1, c.clone()).jeq(0, 1, "halt");
        }
        a.label("loop").jmp(0, "loop");
        a.index()
    }

    #[test]
    fn primes() {
        let p: Vec<u64> = (0..8).map(nth_prime).collect();
        assert_eq!(p, vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(prime_power(&Nat::from(12u32)), None);
        assert_eq!(prime_power(&Nat::from(125u32)), Some((2, 3)));
    }

    #[test]
    fn psi_off_powers_is_zero() {
        let e = lister(&[pair_u64(0, 1)]);
        let p = psi_program(&e);
        assert_eq!(eval(&p, &Nat::from(12u32), 10_000).into_value(), Some(Nat::zero()));
        assert_eq!(psi_native(omega().as_ref(), &Nat::from(12u32)), Nat::zero());
    }

    #[test]
    fn psi_program_matches_native() {
        let e = lister(&[pair_u64(0, 1), pair_u64(2, 1), pair_u64(3, 0)]);
        let r = from_pairs(e.clone());
        let p = psi_program(&e);
        for i in 0..4u64 {
            for s in 1..12u32 {
                let n = Nat::from(nth_prime(i)).pow(s);
                let got = eval(&p, &n, 200_000).into_value().expect("ψ halts");
                assert_eq!(got, psi_native(r.as_ref(), &n), "p_{i}^{s}");
            }
        }
    }
}
