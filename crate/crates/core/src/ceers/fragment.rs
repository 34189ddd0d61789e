//! Union-find snapshots of a ceer's confirmed structure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::kernel::{Budget, Nat};

/// Incremental union-find over arbitrary naturals, with class sizes.
#[derive(Clone, Debug, Default)]
pub struct UnionFind {
    ids: HashMap<Nat, usize>,
    elems: Vec<Nat>,
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new() -> Self {
        UnionFind::default()
    }

    fn id(&mut self, x: &Nat) -> usize {
        if let Some(&i) = self.ids.get(x) {
            return i;
        }
        let i = self.elems.len();
        self.ids.insert(x.clone(), i);
        self.elems.push(x.clone());
        self.parent.push(i);
        self.size.push(1);
        i
    }

    fn root(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn root_mut(&mut self, i: usize) -> usize {
        let r = self.root(i);
        let mut j = i;
        while self.parent[j] != r {
            let next = self.parent[j];
            self.parent[j] = r;
            j = next;
        }
        r
    }

    /// Registers `x` as mentioned.
    pub fn touch(&mut self, x: &Nat) {
        self.id(x);
    }

    /// Returns `true` when two different classes were merged.
    pub fn union(&mut self, x: &Nat, y: &Nat) -> bool {
        let (a, b) = (self.id(x), self.id(y));
        let (ra, rb) = (self.root_mut(a), self.root_mut(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }

    pub fn same(&self, x: &Nat, y: &Nat) -> bool {
        if x == y {
            return true;
        }
        match (self.ids.get(x), self.ids.get(y)) {
            (Some(&a), Some(&b)) => self.root(a) == self.root(b),
            _ => false,
        }
    }

    /// Size of the class of `x`; unmentioned elements are singletons.
    pub fn class_size(&self, x: &Nat) -> usize {
        self.ids.get(x).map_or(1, |&i| self.size[self.root(i)])
    }

    /// Size the class of `x` would have after merging with the class of `y`.
    pub fn merged_size(&self, x: &Nat, y: &Nat) -> usize {
        if self.same(x, y) {
            self.class_size(x)
        } else {
            self.class_size(x) + self.class_size(y)
        }
    }

    /// Least element of the class of `x`.
    pub fn class_min(&self, x: &Nat) -> Nat {
        self.class_of(x).into_iter().next().unwrap_or_else(|| x.clone())
    }

    pub fn class_of(&self, x: &Nat) -> Vec<Nat> {
        let Some(&i) = self.ids.get(x) else {
            return vec![x.clone()];
        };
        let r = self.root(i);
        let mut v: Vec<Nat> = (0..self.elems.len())
            .filter(|&j| self.root(j) == r)
            .map(|j| self.elems[j].clone())
            .collect();
        v.sort();
        v
    }

    pub fn contains(&self, x: &Nat) -> bool {
        self.ids.contains_key(x)
    }

    pub fn elements(&self) -> &[Nat] {
        &self.elems
    }

    /// All classes over mentioned elements, each sorted, ordered by minimum.
    pub fn classes(&self) -> Vec<Vec<Nat>> {
        let mut by_root: BTreeMap<usize, Vec<Nat>> = BTreeMap::new();
        for (j, e) in self.elems.iter().enumerate() {
            by_root.entry(self.root(j)).or_default().push(e.clone());
        }
        let mut out: Vec<Vec<Nat>> = by_root
            .into_values()
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        out.sort();
        out
    }

    pub fn max_class_size(&self) -> usize {
        (0..self.elems.len()).map(|j| self.size[self.root(j)]).max().unwrap_or(1)
    }
}

/// The equivalence closure of every pair confirmed within a budget, queried
/// on the universe `[0, N]`.
#[derive(Clone, Debug)]
pub struct Fragment {
    pub budget: Budget,
    uf: UnionFind,
}

impl Fragment {
    pub fn from_pairs<I>(pairs: I, budget: Budget) -> Self
    where
        I: IntoIterator<Item = (Nat, Nat)>,
    {
        let mut uf = UnionFind::new();
        for (x, y) in pairs {
            uf.union(&x, &y);
        }
        Fragment { budget, uf }
    }

    pub fn same(&self, x: &Nat, y: &Nat) -> bool {
        self.uf.same(x, y)
    }

    pub fn class_of(&self, x: &Nat) -> Vec<Nat> {
        self.uf.class_of(x)
    }

    pub fn class_size(&self, x: &Nat) -> usize {
        self.uf.class_size(x)
    }

    pub fn union_find(&self) -> &UnionFind {
        &self.uf
    }

    /// Largest class among all mentioned elements, universe or not.
    pub fn max_class_size(&self) -> usize {
        self.uf.max_class_size()
    }

    /// The partition of `[0, N]` induced by the closure.
    pub fn partition(&self) -> Vec<Vec<u64>> {
        let n = self.budget.universe;
        let mut blocks: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for x in 0..=n {
            if seen.contains(&x) {
                continue;
            }
            let mut block: Vec<u64> = self
                .uf
                .class_of(&Nat::from(x))
                .iter()
                .filter_map(|e| e.to_u64())
                .filter(|&e| e <= n)
                .collect();
            block.sort_unstable();
            seen.extend(block.iter().copied());
            blocks.insert(x, block);
        }
        blocks.into_values().collect()
    }

    pub fn stats(&self) -> FragmentStats {
        let partition = self.partition();
        let mut class_sizes: Vec<usize> = partition.iter().map(Vec::len).collect();
        class_sizes.sort_unstable();
        let spectrum: BTreeSet<usize> = partition
            .iter()
            .map(|b| self.uf.class_size(&Nat::from(b[0])))
            .collect();
        FragmentStats {
            universe: self.budget.universe,
            classes: partition.len(),
            class_sizes,
            spectrum: spectrum.into_iter().collect(),
            minima: partition.iter().map(|b| b[0]).collect(),
            max_class_size: self.max_class_size(),
        }
    }
}

/// Summary of a fragment. Sizes are lower bounds for the true class sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentStats {
    pub universe: u64,
    pub classes: usize,
    /// Sizes of the blocks of the universe partition, ascending.
    pub class_sizes: Vec<usize>,
    /// Full (mentioned) sizes of the classes meeting the universe.
    pub spectrum: Vec<usize>,
    /// Least element of each block: the fragment's transversal of minima.
    pub minima: Vec<u64>,
    pub max_class_size: usize,
}

impl FragmentStats {
    pub fn within_bound(&self, k: u64) -> bool {
        self.max_class_size as u64 <= k
    }
}

const CACHE_LIMIT: usize = 64;

/// Per-budget memo of fragments.
#[derive(Debug, Default)]
pub struct FragCache {
    map: Mutex<HashMap<Budget, Arc<Fragment>>>,
}

impl FragCache {
    pub fn get(&self, b: &Budget, pairs: impl FnOnce() -> Vec<(Nat, Nat)>) -> Arc<Fragment> {
        if let Some(f) = self.map.lock().expect("fragment cache").get(b) {
            return f.clone();
        }
        let f = Arc::new(Fragment::from_pairs(pairs(), *b));
        let mut map = self.map.lock().expect("fragment cache");
        if map.len() >= CACHE_LIMIT {
            map.clear();
        }
        map.insert(*b, f.clone());
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn closure_goes_through_outside_elements() {
        let f = Fragment::from_pairs(vec![(n(0), n(1000)), (n(1000), n(1))], Budget::new(1, 1, 10));
        assert!(f.same(&n(0), &n(1)));
        assert_eq!(f.partition()[0], vec![0, 1]);
        assert_eq!(f.stats().spectrum, vec![1, 3]);
    }

    #[test]
    fn sizes_track_merges() {
        let mut uf = UnionFind::new();
        assert!(uf.union(&n(1), &n(2)));
        assert!(!uf.union(&n(2), &n(1)));
        assert_eq!(uf.merged_size(&n(1), &n(7)), 3);
        assert_eq!(uf.class_min(&n(2)), n(1));
        assert_eq!(uf.max_class_size(), 2);
    }
}
