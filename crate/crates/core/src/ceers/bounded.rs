//! Bounded relations: truncations, the universal k-bounded relation, explicit
//! and randomly generated instances, and the E_n and R_1/R_2 families.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::basic::FromPairs;
use super::{Ceer, CeerRef, FragCache, Fragment, Promises, UnionFind};
use crate::error::{CeerError, Result};
use crate::kernel::asm::Asm;
use crate::kernel::{left, pair, right, unpair, Budget, Nat, ProgramIndex};
use crate::runs::Kappa;

/// A ceer whose enumeration replays another's, skipping every pair that would
/// create a class of more than `k` elements.
#[derive(Debug)]
pub struct Truncated {
    source: CeerRef,
    k: u64,
    replays: Mutex<HashMap<Budget, Arc<(Vec<(Nat, Nat)>, UnionFind)>>>,
}

impl Truncated {
    fn replay(&self, b: &Budget) -> Arc<(Vec<(Nat, Nat)>, UnionFind)> {
        if let Some(r) = self.replays.lock().expect("replays").get(b) {
            return r.clone();
        }
        let mut uf = UnionFind::new();
        let mut kept = Vec::new();
        for (x, y) in self.source.generators(b) {
            if uf.merged_size(&x, &y) as u64 <= self.k {
                if uf.union(&x, &y) {
                    kept.push((x, y));
                }
            } else {
                uf.touch(&x);
                uf.touch(&y);
            }
        }
        let r = Arc::new((kept, uf));
        let mut m = self.replays.lock().expect("replays");
        if m.len() > 32 {
            m.clear();
        }
        m.insert(*b, r.clone());
        r
    }
}

impl Ceer for Truncated {
    fn name(&self) -> String {
        format!("B{}({})", self.k, self.source.name())
    }

    fn promises(&self) -> Promises {
        Promises::bounded(self.k)
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        self.replay(b).0.clone()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        Arc::new(Fragment::from_pairs(self.replay(b).0.clone(), *b))
    }

    fn confirms(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        self.replay(b).1.same(x, y)
    }

    /// A full class (exactly `k` elements) can never gain members.
    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        let r = self.replay(b);
        let uf = &r.1;
        !uf.same(x, y) && (uf.class_size(x) as u64 >= self.k || uf.class_size(y) as u64 >= self.k)
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `B^k` of an arbitrary ceer, following its generator order.
pub fn bounded_truncate_of(source: CeerRef, k: u64) -> Result<Arc<Truncated>> {
    if k == 0 {
        return Err(CeerError::InvalidParameter("truncation bound must be positive".into()));
    }
    Ok(Arc::new(Truncated { source, k, replays: Mutex::new(HashMap::new()) }))
}

/// `B^k_e`.
pub fn bounded_truncate(e: ProgramIndex, k: u64) -> Result<CeerRef> {
    Ok(bounded_truncate_of(Arc::new(FromPairs::new(e)), k)?)
}

#[derive(Debug)]
struct UniversalBounded {
    k: u64,
    slices: Mutex<BTreeMap<Nat, Arc<Truncated>>>,
    frags: FragCache,
}

impl UniversalBounded {
    fn slice(&self, z: &Nat) -> Arc<Truncated> {
        let mut m = self.slices.lock().expect("slices");
        m.entry(z.clone())
            .or_insert_with(|| {
                let src: CeerRef = Arc::new(FromPairs::new(ProgramIndex(z.clone())));
                bounded_truncate_of(src, self.k).expect("positive bound")
            })
            .clone()
    }
}

impl Ceer for UniversalBounded {
    fn name(&self) -> String {
        format!("B{}_inf", self.k)
    }

    fn promises(&self) -> Promises {
        Promises::bounded(self.k)
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut out = Vec::new();
        for z in 0..=b.horizon() {
            let zn = Nat::from(z);
            for (x, y) in self.slice(&zn).generators(b) {
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

    fn refutes(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        let ((x, z), (y, w)) = (unpair(u), unpair(v));
        z != w || self.slice(&z).refutes(&x, &y, b)
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `⟨x,z⟩ B^k_∞ ⟨y,z⟩ ⟺ x B^k_z y`.
pub fn universal_bounded(k: u64) -> Result<CeerRef> {
    if k == 0 {
        return Err(CeerError::InvalidParameter("bound must be positive".into()));
    }
    Ok(Arc::new(UniversalBounded { k, slices: Mutex::new(BTreeMap::new()), frags: FragCache::default() }))
}

/// A finite list of pairs, the `t`-th enumerated at stage `t + 1`, with the
/// closed-world refuter: pairs outside the full closure are inequivalent.
#[derive(Debug)]
struct Explicit {
    name: String,
    pairs: Vec<(Nat, Nat)>,
    full: UnionFind,
    promises: Promises,
    frags: FragCache,
}

impl Ceer for Explicit {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn promises(&self) -> Promises {
        self.promises.clone()
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        self.pairs.iter().take(b.horizon() as usize).cloned().collect()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn refutes(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        !self.full.same(x, y)
    }

    fn has_refuter(&self) -> bool {
        true
    }

    fn decidable(&self) -> bool {
        true
    }
}

pub fn explicit(name: &str, pairs: Vec<(u64, u64)>) -> CeerRef {
    let pairs: Vec<(Nat, Nat)> = pairs.into_iter().map(|(x, y)| (Nat::from(x), Nat::from(y))).collect();
    let mut full = UnionFind::new();
    for (x, y) in &pairs {
        full.union(x, y);
    }
    let promises = Promises {
        computable_classes: true,
        ..Promises::bounded(full.max_class_size() as u64)
    };
    Arc::new(Explicit { name: name.into(), pairs, full, promises, frags: FragCache::default() })
}

/// A periodic partition: residues mod `period` are grouped into blocks, and
/// `x ~ y` iff `x`, `y` lie in the same period copy and the same block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPattern {
    pub period: u64,
    pub label: Vec<u64>,
    /// Enumeration order of one copy: pairs of residues.
    pub edges: Vec<(u64, u64)>,
    pub k: u64,
    pub nontrivial: bool,
}

impl BlockPattern {
    /// Random blocks of sizes in `[1, k]` (or `[2, k]` when `nontrivial`),
    /// each linked by a random spanning tree plus occasional redundant edges,
    /// all shuffled.
    pub fn random(seed: u64, k: u64, blocks: usize, nontrivial: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = if nontrivial { 2.min(k) } else { 1 };
        let sizes: Vec<u64> = (0..blocks).map(|_| rng.gen_range(lo..=k)).collect();
        let period: u64 = sizes.iter().sum();
        let mut residues: Vec<u64> = (0..period).collect();
        residues.shuffle(&mut rng);
        let mut label = vec![0; period as usize];
        let mut edges = Vec::new();
        let mut start = 0usize;
        for (bi, &s) in sizes.iter().enumerate() {
            let members = &residues[start..start + s as usize];
            start += s as usize;
            for (i, &m) in members.iter().enumerate() {
                label[m as usize] = bi as u64;
                if i > 0 {
                    let other = members[rng.gen_range(0..i)];
                    edges.push((other, m));
                }
            }
            if s >= 3 && rng.gen_bool(0.3) {
                edges.push((members[0], members[s as usize - 1]));
            }
        }
        edges.shuffle(&mut rng);
        BlockPattern { period, label, edges, k, nontrivial }
    }

    fn same(&self, x: &Nat, y: &Nat) -> bool {
        let p = Nat::from(self.period);
        if x / &p != y / &p {
            return false;
        }
        let (a, b) = ((x % &p).to_usize(), (y % &p).to_usize());
        matches!((a, b), (Some(a), Some(b)) if self.label[a] == self.label[b])
    }

    fn pair_at(&self, t: u64) -> (Nat, Nat) {
        let m = self.edges.len() as u64;
        let (copy, i) = (t / m, t % m);
        let (a, b) = self.edges[i as usize];
        let base = copy * self.period;
        (Nat::from(base + a), Nat::from(base + b))
    }

    /// An index whose `W` is the set of codes of equivalent pairs.
    pub fn index(&self) -> ProgramIndex {
        let mut a = Asm::new();
        a.unpair(1, 2, 0).set(3, self.period).div(4, 1, 3).div(5, 2, 3).jeq(4, 5, "copy");
        a.label("loop").jmp(0, "loop");
        a.label("copy").modulo(1, 1, 3).modulo(2, 2, 3);
        for (src, dst, tag) in [(1u32, 6u32, "l"), (2, 8, "r")] {
            let done = format!("{tag}done");
            for (r, &lab) in self.label.iter().enumerate() {
                let next = format!("{tag}{r}");
                a.set(7, r as u64).jeq(src, 7, &format!("{tag}hit{r}")).jmp(0, &next);
                a.label(&format!("{tag}hit{r}")).set(dst, lab).jmp(0, &done);
                a.label(&next);
            }
            a.label(&done);
        }
        a.jeq(6, 8, "halt").jmp(0, "loop");
        a.index()
    }
}

#[derive(Debug)]
struct Periodic {
    pattern: BlockPattern,
    frags: FragCache,
}

impl Ceer for Periodic {
    fn name(&self) -> String {
        format!("blocks(k={},p={})", self.pattern.k, self.pattern.period)
    }

    fn promises(&self) -> Promises {
        Promises {
            computable_classes: true,
            nontrivial: self.pattern.nontrivial,
            ..Promises::bounded(self.pattern.k)
        }
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        if self.pattern.edges.is_empty() {
            return Vec::new();
        }
        (0..b.horizon()).map(|t| self.pattern.pair_at(t)).collect()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn refutes(&self, x: &Nat, y: &Nat, _b: &Budget) -> bool {
        !self.pattern.same(x, y)
    }

    fn has_refuter(&self) -> bool {
        true
    }

    fn decidable(&self) -> bool {
        true
    }

    fn index(&self) -> Option<ProgramIndex> {
        Some(self.pattern.index())
    }
}

/// A random infinite k-bounded ceer with an exact refuter; one pair is
/// enumerated per stage.
pub fn periodic_blocks(pattern: BlockPattern) -> CeerRef {
    Arc::new(Periodic { pattern, frags: FragCache::default() })
}

/// The family `E_n`: `⟨x,0⟩ E_0 ⟨x,1⟩ ⟺ κ(x)↓`, and `E_{n+1}` adds the shifted
/// copy of `E_n` and the block `[0, 2^{n+2})` once `κ^{n+2}(x)↓`.
#[derive(Debug)]
struct EFamily {
    n: u32,
    kappa: Kappa,
    frags: FragCache,
}

impl EFamily {
    /// `depth` = number of κ-iterates of `x` known to converge.
    fn related(level: u32, i: u64, j: u64, depth: u64) -> bool {
        if i == j {
            return true;
        }
        if level == 0 {
            return i.min(j) == 0 && i.max(j) == 1 && depth >= 1;
        }
        let shift = 1u64 << level;
        Self::related(level - 1, i, j, depth)
            || (i >= shift && j >= shift && Self::related(level - 1, i - shift, j - shift, depth))
            || (i < 2 * shift && j < 2 * shift && depth > level as u64)
    }

    fn block(&self) -> u64 {
        1u64 << (self.n + 1)
    }

    fn decode(&self, u: &Nat) -> (Nat, Option<u64>) {
        let (x, i) = unpair(u);
        (x, i.to_u64())
    }
}

impl Ceer for EFamily {
    fn name(&self) -> String {
        format!("E_{}", self.n)
    }

    fn promises(&self) -> Promises {
        Promises::bounded(self.block())
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut out = Vec::new();
        let depth_needed = self.n as u64 + 1;
        for (x, _, _) in self.kappa.runs().halting_below(b.horizon()) {
            let depth = self.kappa.iterates(&x, depth_needed, b.fuel).len() as u64;
            for i in 1..self.block() {
                for j in 0..i {
                    if Self::related(self.n, i, j, depth) {
                        out.push((pair(&x, &Nat::from(j)), pair(&x, &Nat::from(i))));
                        break;
                    }
                }
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        if u == v {
            return true;
        }
        let ((x, i), (y, j)) = (self.decode(u), self.decode(v));
        let (Some(i), Some(j)) = (i, j) else { return false };
        if x != y || i.max(j) >= self.block() {
            return false;
        }
        let depth = self.kappa.iterates(&x, self.n as u64 + 1, b.fuel).len() as u64;
        Self::related(self.n, i, j, depth)
    }

    fn refutes(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        if u == v {
            return false;
        }
        let ((x, i), (y, j)) = (self.decode(u), self.decode(v));
        if x != y {
            return true;
        }
        let (Some(i), Some(j)) = (i, j) else { return true };
        if i.max(j) >= self.block() {
            return true;
        }
        let need = self.n as u64 + 1;
        let its = self.kappa.iterates(&x, need, b.fuel);
        let last = its.last().unwrap_or(&x);
        let stuck = !ProgramIndex(last.clone()).is_canonical();
        (its.len() as u64 >= need || stuck) && !Self::related(self.n, i, j, its.len() as u64)
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

pub fn e_n(n: u32) -> Result<CeerRef> {
    if n > 16 {
        return Err(CeerError::InvalidParameter(format!("E_n level {n} too large")));
    }
    Ok(Arc::new(EFamily { n, kappa: Kappa::new(), frags: FragCache::default() }))
}

/// `⟨x,0⟩ ~ ⟨x,1⟩ (~ ⟨x,2⟩ …)` for the first `width` layers, iff `x ∈ K`.
#[derive(Debug)]
struct KBlocks {
    width: u64,
    kappa: Kappa,
    frags: FragCache,
}

impl Ceer for KBlocks {
    fn name(&self) -> String {
        format!("R{}", self.width - 1)
    }

    fn promises(&self) -> Promises {
        Promises::bounded(self.width)
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        let mut out = Vec::new();
        for (x, _, _) in self.kappa.runs().halting_below(b.horizon()) {
            for i in 1..self.width {
                out.push((pair(&x, &Nat::from(i - 1)), pair(&x, &Nat::from(i))));
            }
        }
        out
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    fn confirms(&self, u: &Nat, v: &Nat, b: &Budget) -> bool {
        let w = Nat::from(self.width);
        u == v
            || (left(u) == left(v)
                && right(u) < w
                && right(v) < w
                && self.kappa.apply(&left(u), b.fuel).is_some())
    }

    fn refutes(&self, u: &Nat, v: &Nat, _b: &Budget) -> bool {
        let w = Nat::from(self.width);
        u != v && (left(u) != left(v) || right(u) >= w || right(v) >= w)
    }

    fn has_refuter(&self) -> bool {
        true
    }
}

/// `⟨x,0⟩ R_1 ⟨x,1⟩ ⟺ x ∈ K`.
pub fn k_pairs() -> CeerRef {
    Arc::new(KBlocks { width: 2, kappa: Kappa::new(), frags: FragCache::default() })
}

/// `⟨x,0⟩ R_2 ⟨x,1⟩ R_2 ⟨x,2⟩ ⟺ x ∈ K`.
pub fn k_triples() -> CeerRef {
    Arc::new(KBlocks { width: 3, kappa: Kappa::new(), frags: FragCache::default() })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceers::explicit;
    use crate::kernel::gadgets::constant;
    use crate::kernel::pair_u64;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn truncation_skips_oversized_merges() {
        let src = explicit("src", vec![(0, 1), (1, 2), (3, 4)]);
        let t = bounded_truncate_of(src, 2).unwrap();
        let f = t.fragment(&Budget::new(10, 10, 4));
        assert_eq!(f.partition(), vec![vec![0, 1], vec![2], vec![3, 4]]);
        assert!(t.refutes(&n(0), &n(2), &Budget::new(10, 10, 4)));
        let one = bounded_truncate_of(explicit("src", vec![(0, 1)]), 1).unwrap();
        assert!(!one.confirms(&n(0), &n(1), &Budget::new(10, 10, 4)));
    }

    #[test]
    fn e_family_blocks() {
        let e1 = e_n(1).unwrap();
        let b = Budget::new(100, 100, 10);
        // κ(s) = 5 and κ(5) diverges (5 is non-canonical)
        let s = constant(&n(5)).0;
        let c = |i: u64| pair(&s, &n(i));
        assert!(e1.confirms(&c(0), &c(1), &b));
        assert!(e1.confirms(&c(2), &c(3), &b));
        assert!(!e1.confirms(&c(1), &c(2), &b));
        assert!(e1.refutes(&c(1), &c(2), &Budget::new(100, 100, 10)) || !e1.has_refuter());
        // κ(t) = s, κ(s) = 5: two iterates, so the whole block merges
        let t = constant(&s).0;
        let d = |i: u64| pair(&t, &n(i));
        assert!(e1.confirms(&d(0), &d(3), &b));
        assert!(e1.fragment(&b).max_class_size() <= 4);
    }

    #[test]
    fn periodic_blocks_are_bounded_and_consistent() {
        let p = BlockPattern::random(7, 4, 6, true);
        let r = periodic_blocks(p.clone());
        let b = Budget::new(200, 200, 60);
        let f = r.fragment(&b);
        assert!(f.max_class_size() <= 4);
        for x in 0..40u64 {
            for y in 0..40u64 {
                let (xn, yn) = (n(x), n(y));
                assert!(!(r.confirms(&xn, &yn, &b) && r.refutes(&xn, &yn, &b)));
                let halts = crate::kernel::eval(&p.index(), &pair_u64(x, y), 10_000).is_converged();
                assert_eq!(halts, p.same(&xn, &yn));
            }
        }
    }

    #[test]
    fn k_blocks_pairs() {
        let r1 = k_pairs();
        let b = Budget::new(50, 50, 10);
        let s = constant(&n(0)).0;
        assert!(r1.confirms(&pair(&s, &n(0)), &pair(&s, &n(1)), &b));
        let lp = crate::kernel::builtin_indices().self_loop.0.clone();
        assert!(!r1.confirms(&pair(&lp, &n(0)), &pair(&lp, &n(1)), &b));
        assert!(k_triples().confirms(&pair(&s, &n(0)), &pair(&s, &n(2)), &b));
    }
}
