//! Relations defined from c.e. sets.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::ToPrimitive;

use super::{Ceer, CeerRef, FragCache, Fragment, Promises};
use crate::error::{CeerError, Result};
use crate::kernel::{left, pair, unpair, Budget, Nat};
use crate::runs::Kappa;
use crate::sets::SetRef;

/// Longest interval scanned by point queries on interval relations.
const SCAN_LIMIT: u64 = 100_000;

fn chain(items: impl IntoIterator<Item = Nat>) -> Vec<(Nat, Nat)> {
    let mut out = Vec::new();
    let mut prev: Option<Nat> = None;
    for x in items {
        if let Some(p) = prev.replace(x.clone()) {
            out.push((p, x));
        }
    }
    out
}

/// Every `z` with `min(x,y) <= z <= max(x,y)` satisfies `test`; `None` when the
/// interval is too long to scan.
fn interval_all(x: &Nat, y: &Nat, test: impl Fn(&Nat) -> bool) -> Option<bool> {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let len = (hi - lo).to_u64().filter(|&l| l <= SCAN_LIMIT)?;
    Some((0..=len).all(|d| test(&(lo + d))))
}

#[derive(Debug)]
struct FromSets {
    sets: Vec<SetRef>,
    frags: FragCache,
}

impl Ceer for FromSets {
    fn name(&self) -> String {
        let names: Vec<String> = self.sets.iter().map(|s| s.name()).collect();
        format!("R[{}]", names.join(","))
    }

    fn promises(&self) -> Promises {
        Promises {
            computable_classes: self.sets.iter().all(|s| s.has_decider()),
            ..Promises::default()
        }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        self.sets.iter().flat_map(|s| chain(s.members(b))).collect()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x == y || self.sets.iter().any(|s| s.contains(x, b) && s.contains(y, b))
    }

    fn refutes(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        self.has_refuter()
            && x != y
            && !self.sets.iter().any(|s| s.decide(x) == Some(true) && s.decide(y) == Some(true))
    }

    fn has_refuter(&self) -> bool {
        self.sets.iter().all(|s| s.has_decider())
    }
}

/// `R_{A_1..A_n}`: `x ~ y ⟺ x = y ∨ x, y ∈ A_i` for some `i`. Disjointness is
/// checked on the members confirmed within `check`.
pub fn from_sets(sets: Vec<SetRef>, check: &Budget) -> Result<CeerRef> {
    let mut owner: HashMap<Nat, usize> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for x in s.members(check) {
            if let Some(j) = owner.insert(x.clone(), i) {
                if j != i {
                    return Err(CeerError::InputViolation(format!(
                        "{x} lies in both {} and {}",
                        sets[j].name(),
                        s.name()
                    )));
                }
            }
        }
    }
    Ok(Arc::new(FromSets { sets, frags: FragCache::default() }))
}

#[derive(Debug)]
struct Interval {
    a: SetRef,
    frags: FragCache,
}

impl Ceer for Interval {
    fn name(&self) -> String {
        format!("F[{}]", self.a.name())
    }

    fn promises(&self) -> Promises {
        Promises { computable_classes: self.a.has_decider(), ..Promises::default() }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let members: BTreeSet<Nat> = self.a.members(b).into_iter().collect();
        members
            .iter()
            .filter(|m| members.contains(&(*m + 1u32)))
            .map(|m| (m.clone(), m + 1u32))
            .collect()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x == y || interval_all(x, y, |z| self.a.contains(z, b)) == Some(true)
    }

    fn refutes(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        x != y && interval_all(x, y, |z| self.a.decide(z) != Some(false)) == Some(false)
    }

    fn has_refuter(&self) -> bool {
        self.a.has_decider()
    }
}

/// `F_A`: `x ~ y` iff every point between them lies in `A`.
pub fn interval(a: SetRef) -> CeerRef {
    Arc::new(Interval { a, frags: FragCache::default() })
}

#[derive(Debug)]
struct KInterval {
    w: SetRef,
    kappa: Kappa,
    frags: FragCache,
}

impl Ceer for KInterval {
    fn name(&self) -> String {
        format!("RK[{}]", self.w.name())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let w: BTreeSet<Nat> = self.w.members(b).into_iter().collect();
        let mut k: Vec<Nat> =
            self.kappa.runs().halting_below(b.horizon()).into_iter().map(|(x, _, _)| x).collect();
        k.sort();
        k.windows(2)
            .filter(|p| interval_all(&p[0], &p[1], |z| w.contains(z)) == Some(true))
            .map(|p| (p[0].clone(), p[1].clone()))
            .collect()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x == y
            || (self.kappa.apply(x, b.fuel).is_some()
                && self.kappa.apply(y, b.fuel).is_some()
                && interval_all(x, y, |z| self.w.contains(z, b)) == Some(true))
    }
}

/// `x ~ y ⟺ x = y ∨ ([min, max] ⊆ W ∧ x, y ∈ K)`.
pub fn k_interval(w: SetRef) -> CeerRef {
    Arc::new(KInterval { w, kappa: Kappa::new(), frags: FragCache::default() })
}

#[derive(Debug)]
struct Rows {
    w: SetRef,
    frags: FragCache,
}

impl Ceer for Rows {
    fn name(&self) -> String {
        format!("RW[{}]", self.w.name())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut last: HashMap<Nat, Nat> = HashMap::new();
        let mut out = Vec::new();
        for z in self.w.members(b) {
            if let Some(p) = last.insert(left(&z), z.clone()) {
                out.push((p, z));
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        u == v || (left(u) == left(v) && self.w.contains(u, b) && self.w.contains(v, b))
    }

    fn refutes(&self, u: &Nat, v: &Nat, _b: &Budget) -> bool {
        left(u) != left(v)
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `⟨x,y⟩ ~ ⟨x,z⟩ ⟺ y = z ∨ ⟨x,y⟩, ⟨x,z⟩ ∈ W`.
pub fn row_ceer(w: SetRef) -> CeerRef {
    Arc::new(Rows { w, frags: FragCache::default() })
}

/// `⟨x,i⟩ ~ ⟨x,j⟩ ⟺ i = j ∨ (i, j <= width(x) ∧ x ∈ A)`.
#[derive(Debug)]
struct Layers {
    a: SetRef,
    /// `Some(k)` for a fixed cap, `None` for the cap `x`.
    cap: Option<u64>,
    frags: FragCache,
}

impl Layers {
    fn width(&self, x: &Nat) -> Nat {
        self.cap.map_or_else(|| x.clone(), Nat::from)
    }
}

impl Ceer for Layers {
    fn name(&self) -> String {
        match self.cap {
            Some(k) => format!("T[{},{k}]", self.a.name()),
            None => format!("P[{}]", self.a.name()),
        }
    }

    fn promises(&self) -> Promises {
        match self.cap {
            Some(k) => Promises::bounded(k + 1),
            None => Promises { finite_classes: true, ..Promises::default() },
        }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut out = Vec::new();
        for x in self.a.members(b) {
            let w = self.width(&x).to_u64().unwrap_or(u64::MAX).min(b.horizon());
            for i in 1..=w {
                out.push((pair(&x, &Nat::from(i - 1)), pair(&x, &Nat::from(i))));
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        let ((x, i), (y, j)) = (unpair(u), unpair(v));
        let w = self.width(&x);
        u == v || (x == y && i <= w && j <= w && self.a.contains(&x, b))
    }

    fn refutes(&self, u: &Nat, v: &Nat, _b: &Budget) -> bool {
        let ((x, i), (y, j)) = (unpair(u), unpair(v));
        let w = self.width(&x);
        u != v && (x != y || i > w || j > w || self.a.decide(&x) == Some(false))
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `⟨x,i⟩ ~ ⟨x,j⟩ ⟺ i = j ∨ (i, j <= k ∧ x ∈ A)`: `(k+1)`-bounded.
pub fn layers_bounded(a: SetRef, k: u64) -> CeerRef {
    Arc::new(Layers { a, cap: Some(k), frags: FragCache::default() })
}

/// `⟨x,i⟩ ~ ⟨x,j⟩ ⟺ i = j ∨ (i, j <= x ∧ x ∈ A)`: all classes finite.
pub fn layers_finite(a: SetRef) -> CeerRef {
    Arc::new(Layers { a, cap: None, frags: FragCache::default() })
}
