//! ω, id(n), H, R_∞ and the relations generated by a c.e. pair set or by the
//! graph of a partial function.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use super::{Ceer, CeerRef, FragCache, Fragment, Promises};
use crate::error::{CeerError, Result};
use crate::kernel::asm::Asm;
use crate::kernel::{builtin_indices, pair, unpair, Budget, Nat, ProgramIndex};
use crate::runs::Runs;

#[derive(Debug)]
struct Omega;

impl Ceer for Omega {
    fn name(&self) -> String {
        "omega".into()
    }

    fn promises(&self) -> Promises {
        Promises { computable_classes: true, ..Promises::bounded(1) }
    }

    fn generators(&self, _b: &Budget) -> Vec<(Nat, Nat)> {
        Vec::new()
    }

    fn confirms(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        x == y
    }

    fn refutes(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        x != y
    }

    fn has_refuter(&self) -> bool {
        true
    }

    fn decidable(&self) -> bool {
        true
    }

    fn index(&self) -> Option<ProgramIndex> {
        Some(builtin_indices().self_loop.clone())
    }
}

/// The identity relation ω.
pub fn omega() -> CeerRef {
    Arc::new(Omega)
}

#[derive(Debug)]
struct Id {
    n: u64,
    modulus: Nat,
}

impl Ceer for Id {
    fn name(&self) -> String {
        format!("id({})", self.n)
    }

    fn promises(&self) -> Promises {
        Promises { computable_classes: true, ..Promises::default() }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        (self.n..=b.horizon()).map(|x| (Nat::from(x), Nat::from(x % self.n))).collect()
    }

    fn confirms(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        x % &self.modulus == y % &self.modulus
    }

    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        !self.confirms(x, y, b)
    }

    fn has_refuter(&self) -> bool {
        true
    }

    fn decidable(&self) -> bool {
        true
    }

    fn index(&self) -> Option<ProgramIndex> {
        let mut a = Asm::new();
        a.unpair(1, 2, 0).set(3, self.n).modulo(1, 1, 3).modulo(2, 2, 3).jeq(1, 2, "halt");
        a.label("loop").jmp(0, "loop");
        Some(a.index())
    }
}

/// Congruence modulo `n`.
pub fn id(n: u64) -> Result<CeerRef> {
    if n == 0 {
        return Err(CeerError::InvalidParameter("id(n) needs n > 0".into()));
    }
    Ok(Arc::new(Id { n, modulus: Nat::from(n) }))
}

#[derive(Debug)]
struct Halting {
    kappa: Runs,
    frags: FragCache,
}

impl Ceer for Halting {
    fn name(&self) -> String {
        "H".into()
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut last: HashMap<Nat, Nat> = HashMap::new();
        let mut out = Vec::new();
        for (x, v, _) in self.kappa.halting_below(b.horizon()) {
            if let Some(prev) = last.insert(v, x.clone()) {
                out.push((prev, x));
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x == y
            || matches!(
                (self.kappa.run(x, b.fuel), self.kappa.run(y, b.fuel)),
                (Some((u, _)), Some((v, _))) if u == v
            )
    }

    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        matches!(
            (self.kappa.run(x, b.fuel), self.kappa.run(y, b.fuel)),
            (Some((u, _)), Some((v, _))) if u != v
        )
    }

    fn has_refuter(&self) -> bool {
        true
    }

    fn index(&self) -> Option<ProgramIndex> {
        let mut a = Asm::new();
        a.unpair(1, 2, 0).eval(1, 1, 1).eval(2, 2, 2).jeq(1, 2, "halt");
        a.label("loop").jmp(0, "loop");
        Some(a.index())
    }
}

/// Halting equivalence: `x H y ⟺ x = y ∨ φ_x(x)↓ = φ_y(y)↓`.
pub fn h() -> CeerRef {
    Arc::new(Halting { kappa: Runs::new(builtin_indices().kappa.clone()), frags: FragCache::default() })
}

/// `R_e`: the equivalence relation generated by the pairs `unpair(z)`, `z ∈ W_e`.
#[derive(Debug)]
pub struct FromPairs {
    runs: Runs,
    frags: FragCache,
}

impl FromPairs {
    pub fn new(e: ProgramIndex) -> Self {
        FromPairs { runs: Runs::new(e), frags: FragCache::default() }
    }

    /// Non-reflexive pairs of `W_e` within horizon `h`, in enumeration order.
    pub fn raw_pairs(&self, h: u64) -> Vec<(Nat, Nat)> {
        self.runs
            .halting_below(h)
            .into_iter()
            .map(|(z, _, _)| unpair(&z))
            .filter(|(x, y)| x != y)
            .collect()
    }
}

impl Ceer for FromPairs {
    fn name(&self) -> String {
        format!("R({})", self.runs.index())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        self.raw_pairs(b.horizon())
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn index(&self) -> Option<ProgramIndex> {
        Some(self.runs.index().clone())
    }
}

pub fn from_pairs(e: ProgramIndex) -> CeerRef {
    Arc::new(FromPairs::new(e))
}

#[derive(Debug)]
struct FromFunction {
    runs: Runs,
    frags: FragCache,
}

impl Ceer for FromFunction {
    fn name(&self) -> String {
        format!("eta({})", self.runs.index())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        self.runs
            .halting_below(b.horizon())
            .into_iter()
            .filter(|(x, v, _)| x != v)
            .map(|(x, v, _)| (x, v))
            .collect()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }
}

/// `η_f`: the relation generated by the graph of `φ_f`.
pub fn from_function(f: ProgramIndex) -> CeerRef {
    Arc::new(FromFunction { runs: Runs::new(f), frags: FragCache::default() })
}

#[derive(Debug, Default)]
struct RInfinity {
    slices: Mutex<BTreeMap<Nat, Arc<FromPairs>>>,
    frags: FragCache,
}

impl RInfinity {
    fn slice(&self, z: &Nat) -> Arc<FromPairs> {
        let mut m = self.slices.lock().expect("slices");
        m.entry(z.clone())
            .or_insert_with(|| Arc::new(FromPairs::new(ProgramIndex(z.clone()))))
            .clone()
    }
}

impl Ceer for RInfinity {
    fn name(&self) -> String {
        "R_inf".into()
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let h = b.horizon();
        let mut out = Vec::new();
        for z in 0..=h {
            let zn = Nat::from(z);
            for (x, y) in self.slice(&zn).raw_pairs(h) {
                out.push((pair(&x, &zn), pair(&y, &zn)));
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        let ((x, z), (y, w)) = (unpair(u), unpair(v));
        u == v || (z == w && self.slice(&z).confirms(&x, &y, b))
    }

    fn refutes(&self, u: &Nat, v: &Nat, _b: &Budget) -> bool {
        unpair(u).1 != unpair(v).1
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `⟨x,z⟩ R_∞ ⟨y,z⟩ ⟺ x R_z y`.
pub fn r_infinity() -> CeerRef {
    Arc::new(RInfinity::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gadgets::constant;
    use crate::kernel::pair_u64;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn id_two_parity() {
        let r = id(2).unwrap();
        let b = Budget::default();
        assert!(r.confirms(&n(3), &n(5), &b));
        assert!(r.refutes(&n(3), &n(4), &b));
        assert!(id(0).is_err());
    }

    #[test]
    fn halting_equivalence_on_gadgets() {
        let r = h();
        let b = Budget::new(50, 50, 10);
        let s1 = constant(&n(5));
        let s2 = crate::kernel::pad(&s1, 1);
        let s3 = constant(&n(6));
        assert!(r.confirms(&s1.0, &s2.0, &b));
        assert!(r.refutes(&s1.0, &s3.0, &b));
    }

    #[test]
    fn from_pairs_merges_listed_pairs() {
        // halts exactly on the codes of (0,1) and (1,2)
        let mut a = Asm::new();
        a.set(1, pair_u64(0, 1)).jeq(0, 1, "halt").set(1, pair_u64(1, 2)).jeq(0, 1, "halt");
        a.label("loop").jmp(0, "loop");
        let r = from_pairs(a.index());
        let f = r.fragment(&Budget::new(100, 100, 5));
        assert_eq!(f.partition(), vec![vec![0, 1, 2], vec![3], vec![4], vec![5]]);
        let empty = from_pairs(builtin_indices().self_loop.clone());
        assert_eq!(empty.fragment(&Budget::new(50, 50, 3)).partition().len(), 4);
    }

    #[test]
    fn from_function_successor_is_one_class() {
        let r = from_function(builtin_indices().successor.clone());
        let f = r.fragment(&Budget::new(30, 30, 20));
        assert_eq!(f.partition().len(), 1);
        let c = from_function(constant(&n(0)));
        assert_eq!(c.fragment(&Budget::new(30, 30, 20)).partition().len(), 1);
        let i = from_function(builtin_indices().identity.clone());
        assert_eq!(i.fragment(&Budget::new(30, 30, 20)).partition().len(), 21);
    }

    #[test]
    fn r_infinity_slices_agree() {
        let r = r_infinity();
        let b = Budget::new(40, 40, 10);
        assert!(r.refutes(&pair_u64(1, 3), &pair_u64(1, 4), &b));
        let direct = FromPairs::new(ProgramIndex::from(7));
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(
                    r.confirms(&pair_u64(x, 7), &pair_u64(y, 7), &b),
                    direct.confirms(&n(x), &n(y), &b)
                );
            }
        }
    }
}
