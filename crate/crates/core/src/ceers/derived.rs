//! Cylinder and join.

use std::sync::Arc;

use num_traits::Zero;

use super::{Ceer, CeerRef, FragCache, Fragment, Promises};
use crate::kernel::{left, pair, right, Budget, Nat};

#[derive(Debug)]
struct Cylinder {
    base: CeerRef,
    frags: FragCache,
}

impl Ceer for Cylinder {
    fn name(&self) -> String {
        format!("cyl({})", self.base.name())
    }

    fn promises(&self) -> Promises {
        Promises { computable_classes: self.base.promises().computable_classes, ..Promises::default() }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let zero = Nat::zero();
        let mut out: Vec<(Nat, Nat)> = self
            .base
            .generators(b)
            .into_iter()
            .map(|(x, y)| (pair(&x, &zero), pair(&y, &zero)))
            .collect();
        for z in 0..=b.horizon() {
            let z = Nat::from(z);
            if !right(&z).is_zero() {
                out.push((pair(&left(&z), &zero), z));
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        u == v || self.base.confirms(&left(u), &left(v), b)
    }

    fn refutes(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        self.base.refutes(&left(u), &left(v), b)
    }

    fn has_refuter(&self) -> bool {
        self.base.has_refuter()
    }
}

/// `⟨x,u⟩ S ⟨y,v⟩ ⟺ x R y`.
pub fn cylinder(base: CeerRef) -> CeerRef {
    Arc::new(Cylinder { base, frags: FragCache::default() })
}

#[derive(Debug)]
struct Join {
    a: CeerRef,
    b: CeerRef,
    frags: FragCache,
}

impl Ceer for Join {
    fn name(&self) -> String {
        format!("join({},{})", self.a.name(), self.b.name())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut out = self.a.generators(b);
        out.extend(self.b.generators(b));
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        self.a.confirms(x, y, b) || self.b.confirms(x, y, b) || self.fragment(b).same(x, y)
    }
}

/// The least equivalence relation containing both.
pub fn join(a: CeerRef, b: CeerRef) -> CeerRef {
    Arc::new(Join { a, b, frags: FragCache::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceers::id;
    use crate::kernel::pair_u64;

    #[test]
    fn join_of_congruences_is_total() {
        let j = join(id(2).unwrap(), id(3).unwrap());
        let f = j.fragment(&Budget::new(20, 20, 10));
        assert_eq!(f.partition().len(), 1);
    }

    #[test]
    fn cylinder_ignores_second_coordinate() {
        let c = cylinder(id(2).unwrap());
        let b = Budget::default();
        assert!(c.confirms(&pair_u64(3, 7), &pair_u64(5, 9), &b));
        assert!(c.refutes(&pair_u64(3, 7), &pair_u64(4, 7), &b));
    }
}
