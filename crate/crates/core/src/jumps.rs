//! Saturation and halting jumps.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::ceers::{Ceer, CeerRef, FragCache, Fragment};
use crate::kernel::{decode_set, pair, unpair, Budget, Nat, ProgramIndex};
use crate::runs::Kappa;

/// `κ(x)` certainly diverges: `x` decodes to the divergent program.
fn dead(x: &Nat) -> bool {
    !ProgramIndex(x.clone()).is_canonical()
}

fn rep(f: &Fragment, x: &Nat) -> Nat {
    if f.union_find().contains(x) {
        f.union_find().class_min(x)
    } else {
        x.clone()
    }
}

/// Chains codes with equal keys into generator pairs.
fn group<K: Ord>(items: impl IntoIterator<Item = (K, Nat)>) -> Vec<(Nat, Nat)> {
    let mut first: BTreeMap<K, Nat> = BTreeMap::new();
    let mut out = Vec::new();
    for (k, x) in items {
        match first.get(&k) {
            Some(y) => out.push((y.clone(), x)),
            None => {
                first.insert(k, x);
            }
        }
    }
    out
}

/// Every element of `a` is related to some element of `b`, and vice versa.
fn covers(a: &[Nat], b: &[Nat], rel: &dyn Fn(&Nat, &Nat) -> bool) -> bool {
    a.iter().all(|u| b.iter().any(|v| rel(u, v))) && b.iter().all(|v| a.iter().any(|u| rel(u, v)))
}

/// Some element on one side is unrelated to everything on the other.
fn separated(a: &[Nat], b: &[Nat], apart: &dyn Fn(&Nat, &Nat) -> bool) -> bool {
    a.iter().any(|u| b.iter().all(|v| apart(u, v))) || b.iter().any(|v| a.iter().all(|u| apart(u, v)))
}

#[derive(Debug)]
struct Saturation {
    inner: CeerRef,
    frags: FragCache,
}

impl Ceer for Saturation {
    fn name(&self) -> String {
        format!("({})+", self.inner.name())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let f = self.inner.fragment(b);
        group((0..=b.horizon()).map(|c| {
            let c = Nat::from(c);
            let mut sig: Vec<Nat> = decode_set(&c).iter().map(|u| rep(&f, u)).collect();
            sig.sort();
            sig.dedup();
            (sig, c)
        }))
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x == y || covers(&decode_set(x), &decode_set(y), &|u, v| self.inner.confirms(u, v, b))
    }

    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        x != y && separated(&decode_set(x), &decode_set(y), &|u, v| self.inner.refutes(u, v, b))
    }

    fn has_refuter(&self) -> bool {
        self.inner.has_refuter()
    }
}

/// `R^{n+}`; `n = 0` gives `R` back.
pub fn saturation_jump(r: CeerRef, n: u32) -> CeerRef {
    (0..n).fold(r, |inner, _| Arc::new(Saturation { inner, frags: FragCache::default() }) as CeerRef)
}

/// `⟨x, i⟩`: payload `x` on layer `i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayeredCode {
    pub payload: Nat,
    pub layer: Nat,
}

impl LayeredCode {
    pub fn new(payload: Nat, layer: u64) -> Self {
        LayeredCode { payload, layer: Nat::from(layer) }
    }

    pub fn decode(code: &Nat) -> Self {
        let (payload, layer) = unpair(code);
        LayeredCode { payload, layer }
    }

    pub fn encode(&self) -> Nat {
        pair(&self.payload, &self.layer)
    }
}

/// `k_x`: the largest layer tag among the elements of the set coded by `x`,
/// 0 for the empty set.
pub fn max_layer(x: &Nat) -> Nat {
    decode_set(x).iter().map(|u| LayeredCode::decode(u).layer).max().unwrap_or_default()
}

/// `x ↦ ⟨x, k_x + 1⟩`.
pub fn absorb(x: &Nat) -> Nat {
    LayeredCode { payload: x.clone(), layer: max_layer(x) + 1u32 }.encode()
}

#[derive(Debug)]
struct OmegaPlus {
    inner: CeerRef,
    frags: FragCache,
}

impl OmegaPlus {
    /// `u E_{i-1} v` confirmed, for elements of a layer-`i` payload.
    fn below(&self, i: &Nat, u: &Nat, v: &Nat, b: &Budget) -> bool {
        if u == v {
            return true;
        }
        let (lu, lv) = (LayeredCode::decode(u), LayeredCode::decode(v));
        lu.layer == lv.layer && lu.layer < *i && self.confirms(u, v, b)
    }

    fn apart_below(&self, i: &Nat, u: &Nat, v: &Nat, b: &Budget) -> bool {
        if u == v {
            return false;
        }
        let (lu, lv) = (LayeredCode::decode(u), LayeredCode::decode(v));
        lu.layer != lv.layer || lu.layer >= *i || self.refutes(u, v, b)
    }
}

impl Ceer for OmegaPlus {
    fn name(&self) -> String {
        format!("({})ω+", self.inner.name())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let h = b.horizon();
        let mut uf = crate::ceers::UnionFind::new();
        let mut out = Vec::new();
        for (x, y) in self.inner.generators(b) {
            let (u, v) = (LayeredCode::new(x, 0).encode(), LayeredCode::new(y, 0).encode());
            uf.union(&u, &v);
            out.push((u, v));
        }
        let mut i = 1u64;
        while pair(&Nat::default(), &Nat::from(i)) <= Nat::from(h) {
            let codes: Vec<Nat> = (0..=h)
                .map(Nat::from)
                .filter(|c| LayeredCode::decode(c).layer == Nat::from(i))
                .collect();
            let level = Nat::from(i);
            let new = group(codes.into_iter().map(|c| {
                let x = LayeredCode::decode(&c).payload;
                let mut sig: Vec<Nat> = decode_set(&x)
                    .iter()
                    .map(|u| {
                        if LayeredCode::decode(u).layer < level && uf.contains(u) {
                            uf.class_min(u)
                        } else {
                            u.clone()
                        }
                    })
                    .collect();
                sig.sort();
                sig.dedup();
                (sig, c)
            }));
            for (u, v) in new {
                uf.union(&u, &v);
                out.push((u, v));
            }
            i += 1;
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        if x == y {
            return true;
        }
        let (lx, ly) = (LayeredCode::decode(x), LayeredCode::decode(y));
        if lx.layer != ly.layer {
            return false;
        }
        if lx.layer == Nat::default() {
            return self.inner.confirms(&lx.payload, &ly.payload, b);
        }
        let i = lx.layer;
        covers(&decode_set(&lx.payload), &decode_set(&ly.payload), &|u, v| self.below(&i, u, v, b))
    }

    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        if x == y {
            return false;
        }
        let (lx, ly) = (LayeredCode::decode(x), LayeredCode::decode(y));
        if lx.layer != ly.layer {
            return true;
        }
        if lx.layer == Nat::default() {
            return self.inner.refutes(&lx.payload, &ly.payload, b);
        }
        let i = lx.layer;
        separated(&decode_set(&lx.payload), &decode_set(&ly.payload), &|u, v| self.apart_below(&i, u, v, b))
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `R^{ω+}` on layered codes `⟨x, i⟩`.
pub fn omega_plus(r: CeerRef) -> CeerRef {
    Arc::new(OmegaPlus { inner: r, frags: FragCache::default() })
}

#[derive(Debug)]
struct HaltingJump {
    inner: CeerRef,
    kappa: Kappa,
    frags: FragCache,
}

impl Ceer for HaltingJump {
    fn name(&self) -> String {
        format!("({})'", self.inner.name())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let listed = self.kappa.runs().halting_below(b.horizon());
        let mut groups: Vec<(Nat, Nat)> = Vec::new();
        let mut out = Vec::new();
        for (x, v, _) in listed {
            match groups.iter().find(|(_, w)| *w == v || self.inner.confirms(w, &v, b)) {
                Some((y, _)) => out.push((y.clone(), x)),
                None => groups.push((x, v)),
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        if x == y {
            return true;
        }
        match (self.kappa.apply(x, b.fuel), self.kappa.apply(y, b.fuel)) {
            (Some(u), Some(v)) => self.inner.confirms(&u, &v, b),
            _ => false,
        }
    }

    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        if x == y {
            return false;
        }
        let (u, v) = (self.kappa.apply(x, b.fuel), self.kappa.apply(y, b.fuel));
        match (u, v) {
            (Some(u), Some(v)) => self.inner.refutes(&u, &v, b),
            (Some(_), None) => dead(y),
            (None, Some(_)) => dead(x),
            (None, None) => dead(x) || dead(y),
        }
    }

    fn has_refuter(&self) -> bool {
        self.inner.has_refuter()
    }
}

/// `E^{(n)}`; `n = 0` gives `E` back.
pub fn halting_jump(e: CeerRef, n: u32) -> CeerRef {
    (0..n).fold(e, |inner, _| {
        Arc::new(HaltingJump { inner, kappa: Kappa::new(), frags: FragCache::default() }) as CeerRef
    })
}

/// `x ~ y ⟺ ∃ i ≤ depth. κ^i(x)↓ = κ^i(y)↓`; without a depth, `i ≤ stage`.
#[derive(Debug)]
struct KappaIterates {
    depth: Option<u64>,
    kappa: Kappa,
    frags: FragCache,
}

impl KappaIterates {
    fn depth(&self, b: &Budget) -> u64 {
        self.depth.unwrap_or(b.stage)
    }

    /// Walks `[x, κ(x), ..]` and `[y, κ(y), ..]` in lockstep until they meet
    /// or one of them ends. Each chain is complete when it reached full depth
    /// or is certainly stuck.
    fn walk(&self, x: &Nat, y: &Nat, b: &Budget) -> Walk {
        let cap = self.depth(b) as usize + 1;
        let (mut u, mut v) = (x.clone(), y.clone());
        let mut len = 1;
        let (mut su, mut sv) = (false, false);
        loop {
            if u == v {
                return Walk { met: true, x: (len, false), y: (len, false) };
            }
            if len >= cap {
                break;
            }
            match self.kappa.apply(&u, b.fuel) {
                Some(n) => u = n,
                None => su = true,
            }
            match self.kappa.apply(&v, b.fuel) {
                Some(n) => v = n,
                None => sv = true,
            }
            if su || sv {
                break;
            }
            len += 1;
        }
        let lx = len + (sv && !su) as usize;
        let ly = len + (su && !sv) as usize;
        let full = |l: usize| self.depth.is_some() && l >= cap;
        let done_x = full(lx) || dead(&u);
        let done_y = full(ly) || dead(&v);
        Walk { met: false, x: (lx, done_x), y: (ly, done_y) }
    }
}

struct Walk {
    met: bool,
    x: (usize, bool),
    y: (usize, bool),
}

impl Ceer for KappaIterates {
    fn name(&self) -> String {
        match self.depth {
            Some(n) => format!("ω^({n})"),
            None => "ω^(ω)".into(),
        }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let d = self.depth(b);
        if d == 0 {
            return Vec::new();
        }
        let mut seen: HashMap<(usize, Nat), Nat> = HashMap::new();
        let mut out = Vec::new();
        for (x, v, _) in self.kappa.runs().halting_below(b.horizon()) {
            let mut c = vec![v.clone()];
            c.extend(self.kappa.iterates(&v, d.saturating_sub(1), b.fuel));
            for (i, w) in c.into_iter().enumerate() {
                match seen.get(&(i, w.clone())) {
                    Some(y) => out.push((y.clone(), x.clone())),
                    None => {
                        seen.insert((i, w), x.clone());
                    }
                }
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        self.walk(x, y, b).met
    }

    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        let w = self.walk(x, y, b);
        if w.met {
            return false;
        }
        // a shorter complete chain caps the usable depth
        let reach = |(len, done): (usize, bool)| if done { len } else { usize::MAX };
        let full = self.depth.map_or(usize::MAX, |n| n as usize + 1);
        let limit = reach(w.x).min(reach(w.y)).min(full);
        limit <= w.x.0.min(w.y.0)
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `ω^(n)` through κ-iterates.
pub fn omega_n_kappa(n: u64) -> CeerRef {
    Arc::new(KappaIterates { depth: Some(n), kappa: Kappa::new(), frags: FragCache::default() })
}

/// `ω^(ω)`.
pub fn omega_omega() -> CeerRef {
    Arc::new(KappaIterates { depth: None, kappa: Kappa::new(), frags: FragCache::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceers::{h, id, omega};
    use crate::kernel::{constant, encode_set_u64 as set, pad};

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn saturation_of_residues() {
        let r = saturation_jump(id(2).unwrap(), 1);
        let b = Budget::new(60, 60, 10);
        assert!(r.confirms(&set(&[0]), &set(&[2, 4]), &b));
        assert!(r.confirms(&set(&[0, 1]), &set(&[3, 4]), &b));
        assert!(r.refutes(&set(&[0]), &set(&[0, 1]), &b));
        assert!(r.refutes(&set(&[]), &set(&[0]), &b));
        assert!(r.fragment(&b).same(&set(&[0]), &set(&[2])));
        assert!(!r.fragment(&b).same(&set(&[0]), &set(&[1])));
    }

    #[test]
    fn empty_set_is_alone() {
        let r = saturation_jump(omega(), 1);
        let f = r.fragment(&Budget::new(100, 100, 30));
        // non-canonical codes of ∅ normalize to ∅
        assert!(f.class_of(&n(0)).iter().all(|c| decode_set(c).is_empty()));
        assert!(!f.same(&n(0), &set(&[0])));
    }

    #[test]
    fn singleton_embedding_agrees() {
        let base = id(3).unwrap();
        let r = saturation_jump(base.clone(), 1);
        let b = Budget::new(80, 80, 8);
        for x in 0..8u64 {
            for y in 0..8u64 {
                assert_eq!(base.confirms(&n(x), &n(y), &b), r.confirms(&set(&[x]), &set(&[y]), &b));
            }
        }
    }

    #[test]
    fn omega_plus_layers() {
        let base = id(2).unwrap();
        let op = omega_plus(base.clone());
        let b = Budget::new(200, 200, 20);
        let l0 = |x| LayeredCode::new(n(x), 0).encode();
        assert!(op.confirms(&l0(1), &l0(3), &b));
        assert!(op.refutes(&l0(1), &l0(2), &b));
        assert!(op.refutes(&l0(1), &LayeredCode::new(n(1), 1).encode(), &b));
        let l1 = |xs: &[u64]| {
            let s = crate::kernel::encode_set(xs.iter().map(|&x| l0(x)));
            LayeredCode::new(s, 1).encode()
        };
        assert!(op.confirms(&l1(&[0]), &l1(&[2, 4]), &b));
        assert!(op.refutes(&l1(&[0]), &l1(&[0, 1]), &b));
        assert_eq!(max_layer(&set(&[])), n(0));
        assert_eq!(LayeredCode::decode(&absorb(&set(&[]))).layer, n(1));
    }

    #[test]
    fn halting_jump_of_omega_is_h() {
        let b = Budget::new(120, 120, 120);
        let a = halting_jump(omega(), 1).fragment(&b).partition();
        let c = h().fragment(&b).partition();
        assert_eq!(a, c);
    }

    #[test]
    fn halting_jump_gadgets() {
        let j = halting_jump(id(2).unwrap(), 1);
        let b = Budget::new(100, 100, 10);
        let (s3, t3, s4) = (constant(&n(3)), pad(&constant(&n(3)), 1), constant(&n(4)));
        assert!(j.confirms(&s3.0, &t3.0, &b));
        assert!(j.refutes(&s3.0, &s4.0, &b));
        assert!(j.confirms(&s3.0, &constant(&n(5)).0, &b));
        let self_loop = builtin_indices_self_loop();
        assert!(!j.confirms(&self_loop, &s3.0, &b));
    }

    fn builtin_indices_self_loop() -> Nat {
        crate::kernel::builtin_indices().self_loop.0.clone()
    }

    #[test]
    fn kappa_iterates() {
        let b = Budget::new(100, 100, 10);
        let w = omega_omega();
        let (s1, s2) = (constant(&n(5)), pad(&constant(&n(5)), 2));
        assert!(w.confirms(&n(7), &n(7), &b));
        assert!(w.confirms(&s1.0, &s2.0, &b));
        assert!(omega_n_kappa(1).confirms(&s1.0, &s2.0, &b));
        assert!(!omega_n_kappa(0).confirms(&s1.0, &s2.0, &b));
        assert!(omega_n_kappa(0).refutes(&s1.0, &s2.0, &b));
        // κ(s1) = 5 is stuck, so no deeper iterate can ever agree
        assert!(w.refutes(&s1.0, &constant(&n(6)).0, &b));
    }

    #[test]
    fn iterated_jump_matches_kappa_form() {
        let b = Budget::new(100, 100, 100);
        for k in 0..3u32 {
            let a = halting_jump(omega(), k).fragment(&b).partition();
            let c = omega_n_kappa(k as u64).fragment(&b).partition();
            assert_eq!(a, c, "depth {k}");
        }
    }
}
