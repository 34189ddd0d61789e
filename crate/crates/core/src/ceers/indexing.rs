//! Converting between c.e. indices (`R_e`) and iterative indices (`η_e`).

use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::asm::Asm;
use crate::kernel::{pad, smn, Nat, ProgramIndex, Reg};

/// `⟨e, z⟩` halts iff `φ_e(x) = y` where `z = ⟨x, y⟩`: `W` is the graph of `φ_e`.
fn graph_program() -> ProgramIndex {
    let mut a = Asm::new();
    a.unpair(1, 2, 0).unpair(3, 4, 2).eval(5, 1, 3).jeq(5, 4, "halt");
    a.label("loop").jmp(0, "loop");
    a.index()
}

/// Walks the forest list `m` (cells `1 + ⟨⟨child, parent⟩, rest⟩`) looking for
/// the cell whose child is `v`. Sets `found` to 0/1 and `parent`. When
/// `either` is set, a cell also matches when `v` is its parent.
/// Scratch r20..r25; r26 must hold 0.
pub(crate) fn walk(a: &mut Asm, m: Reg, v: Reg, found: Reg, parent: Reg, either: bool) {
    let (cur, cell, rest, c, p, one) = (20, 21, 22, 23, 24, 25);
    let top = a.fresh("walk");
    let hit = a.fresh("hit");
    let miss = a.fresh("miss");
    let done = a.fresh("done");
    a.mov(m, cur).set(one, 1u32);
    a.label(&top).jeq(cur, 26, &miss);
    a.monus(cell, cur, one).unpair(cell, rest, cell).unpair(c, p, cell);
    a.jeq(c, v, &hit);
    if either {
        a.jeq(p, v, &hit);
    }
    a.mov(rest, cur).jmp(26, &top);
    a.label(&hit).set(found, 1u32).mov(p, parent).jmp(26, &done);
    a.label(&miss).set(found, 0u32);
    a.label(&done);
}

/// Follows parent links from `v` to its root. Scratch r20..r28; r26 must hold 0.
pub(crate) fn root(a: &mut Asm, m: Reg, v: Reg, out: Reg) {
    let (found, parent) = (27, 28);
    let top = a.fresh("root");
    let done = a.fresh("rootdone");
    a.mov(v, out);
    a.label(&top);
    walk(a, m, out, found, parent, false);
    a.jeq(found, 26, &done).mov(parent, out).jmp(26, &top);
    a.label(&done);
}

/// Input `⟨e, x⟩`. Replays `W_e` in stage order (`z` appears at stage
/// `max(z, steps)`), keeping a forest in which every merge links one element
/// below another; halts with the parent assigned to `x`.
fn root_linking_program() -> ProgramIndex {
    let (e, x, m, s, z, t6, t7, pa, pb, child, parent, one, sm1) = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13);
    let (ka, kb, ra, rb) = (14, 15, 16, 17);
    let mut a = Asm::new();
    // r26 stays zero throughout
    a.unpair(e, x, 0).zero(m).zero(s).set(one, 1u32).zero(26);
    a.label("stage").zero(z);
    a.label("zloop").jlt(s, z, "nextstage");
    a.eval_bounded(t6, e, z, s).jeq(t6, 26, "nextz");
    a.jeq(z, s, "fresh");
    a.monus(sm1, s, one).eval_bounded(t7, e, z, sm1).jeq(t7, 26, "fresh").jmp(26, "nextz");
    a.label("fresh").unpair(pa, pb, z).jeq(pa, pb, "nextz");
    walk(&mut a, m, pa, ka, t6, true);
    walk(&mut a, m, pb, kb, t6, true);
    a.jeq(ka, 26, "aunknown");
    a.jeq(kb, 26, "bunknown");
    root(&mut a, m, pa, ra);
    root(&mut a, m, pb, rb);
    a.jeq(ra, rb, "nextz").mov(ra, child).mov(rb, parent).jmp(26, "link");
    a.label("aunknown").mov(pa, child).mov(pb, parent).jmp(26, "link");
    a.label("bunknown").mov(pb, child).mov(pa, parent);
    a.label("link").pair(t6, child, parent).pair(m, t6, m).inc(m);
    a.jeq(child, x, "out");
    a.label("nextz").inc(z).jmp(26, "zloop");
    a.label("nextstage").inc(s).jmp(26, "stage");
    a.label("out").mov(parent, 0).jmp(26, "halt");
    a.index()
}

/// `f(n, e)`: an iterative index with `η_{f(n,e)} = R_e`, one-one in `(n, e)`.
pub fn pairs_to_iterative(n: u64, e: &ProgramIndex) -> ProgramIndex {
    pad(&smn(&root_linking_program(), &e.0), n)
}

/// `g(n, e)`: a c.e. index with `R_{g(n,e)} = η_e`, one-one in `(n, e)`.
pub fn iterative_to_pairs(n: u64, e: &ProgramIndex) -> ProgramIndex {
    pad(&smn(&graph_program(), &e.0), n)
}

/// A finite piece of the back-and-forth isomorphism `ρ` with `η_e = R_{ρ(e)}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IsoRho {
    forward: BTreeMap<Nat, Nat>,
    backward: BTreeMap<Nat, Nat>,
}

impl IsoRho {
    pub fn rho(&self, n: &Nat) -> Option<&Nat> {
        self.forward.get(n)
    }

    pub fn rho_inv(&self, n: &Nat) -> Option<&Nat> {
        self.backward.get(n)
    }

    fn assign(&mut self, from: Nat, to: Nat) {
        self.forward.insert(from.clone(), to.clone());
        self.backward.insert(to, from);
    }
}

/// Runs the back-and-forth construction for `n = 0..=bound`: `ρ(n)` is the
/// first `g(k, n)` not yet used as a value, `ρ⁻¹(n)` the first `f(k, n)` not
/// yet used as an argument.
pub fn iso_rho(bound: u64) -> IsoRho {
    let mut iso = IsoRho::default();
    for n in 0..=bound {
        let nn = Nat::from(n);
        if !iso.forward.contains_key(&nn) {
            let used: BTreeSet<&Nat> = iso.backward.keys().collect();
            let v = (0..)
                .map(|k| iterative_to_pairs(k, &ProgramIndex(nn.clone())).0)
                .find(|v| !used.contains(v))
                .expect("padding is injective");
            iso.assign(nn.clone(), v);
        }
        if !iso.backward.contains_key(&nn) {
            let used: BTreeSet<&Nat> = iso.forward.keys().collect();
            let v = (0..)
                .map(|k| pairs_to_iterative(k, &ProgramIndex(nn.clone())).0)
                .find(|v| !used.contains(v))
                .expect("padding is injective");
            iso.assign(v, nn);
        }
    }
    iso
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceers::{from_function, from_pairs};
    use crate::kernel::{builtin_indices, pair_u64, Budget};

    fn lister(codes: &[Nat]) -> ProgramIndex {
        let mut a = Asm::new();
        for c in codes {
            a.set(1, c.clone()).jeq(0, 1, "halt");
        }
        a.label("loop").jmp(0, "loop");
        a.index()
    }

    #[test]
    fn root_linking_realizes_pairs() {
        let e = lister(&[pair_u64(0, 1), pair_u64(2, 3), pair_u64(1, 2)]);
        let f = pairs_to_iterative(0, &e);
        let eta = from_function(f);
        let r = from_pairs(e.clone());
        let small = Budget::new(40, 40, 6);
        let big = Budget::new(5000, 5000, 6);
        let want = r.fragment(&small).partition();
        assert_eq!(want, vec![vec![0, 1, 2, 3], vec![4], vec![5], vec![6]]);
        assert_eq!(eta.fragment(&big).partition(), want);
        assert_ne!(pairs_to_iterative(1, &e), pairs_to_iterative(2, &e));
    }

    #[test]
    fn graph_of_successor_is_one_class() {
        let g = iterative_to_pairs(0, &builtin_indices().successor);
        let r = from_pairs(g);
        assert_eq!(r.fragment(&Budget::new(200, 200, 8)).partition().len(), 1);
    }

    #[test]
    fn rho_is_a_partial_bijection() {
        let iso = iso_rho(5);
        for n in 0..=5u64 {
            let nn = Nat::from(n);
            let r = iso.rho(&nn).unwrap();
            assert_eq!(iso.rho_inv(r), Some(&nn));
        }
        assert_eq!(iso.rho(&Nat::from(0u32)), Some(&iterative_to_pairs(0, &ProgramIndex::from(0)).0));
    }
}
