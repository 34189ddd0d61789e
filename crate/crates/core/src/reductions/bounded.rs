use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use super::jump::{forward_program, pc_program};
use super::{compile_map, Reduction};
use crate::ceers::{Ceer, CeerRef, FragCache, Fragment, MapFn, PcWitness, Promises, UnionFind};
use crate::error::{CeerError, Result};
use crate::jumps::halting_jump;
use crate::kernel::gadgets::compose;
use crate::kernel::{builtin_indices, Budget, Nat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    /// Activate a class once it has `threshold` elements; merge images of
    /// two active classes by their minima.
    Essential { threshold: u64 },
    /// Map a fresh pair to its smaller element; merge images directly.
    Pc,
}

#[derive(Debug, Default)]
struct Replay {
    psi: HashMap<Nat, Nat>,
    s_pairs: Vec<(Nat, Nat)>,
    violation: Option<String>,
}

#[derive(Debug)]
struct Core {
    source: CeerRef,
    rule: Rule,
    bound: u64,
    cache: Mutex<BTreeMap<(u64, u64, u64), Arc<Replay>>>,
}

fn min_image(psi: &HashMap<Nat, Nat>, class: &[Nat]) -> Nat {
    class.iter().filter_map(|x| psi.get(x)).min().cloned().expect("active class has images")
}

impl Core {
    fn replay(&self, b: &Budget) -> Arc<Replay> {
        let key = (b.stage, b.fuel, b.universe);
        if let Some(r) = self.cache.lock().expect("replay cache").get(&key) {
            return r.clone();
        }
        let r = Arc::new(self.run(b));
        self.cache.lock().expect("replay cache").insert(key, r.clone());
        r
    }

    fn run(&self, b: &Budget) -> Replay {
        let mut out = Replay::default();
        let mut e = UnionFind::new();
        for (i, j) in self.source.generators(b) {
            let redundant = e.same(&i, &j);
            let (ci, cj) = (e.class_of(&i), e.class_of(&j));
            e.union(&i, &j);
            if e.class_size(&i) as u64 > self.bound {
                out.violation = Some(format!("class of {i} exceeds {} elements", self.bound));
                break;
            }
            match self.rule {
                Rule::Pc => {
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    match (out.psi.get(&lo).cloned(), out.psi.get(&hi).cloned()) {
                        (None, None) => {
                            out.psi.insert(hi, lo.clone());
                            out.psi.insert(lo.clone(), lo);
                        }
                        (Some(a), None) => {
                            out.psi.insert(hi, a);
                        }
                        (None, Some(a)) => {
                            out.psi.insert(lo, a);
                        }
                        (Some(a), Some(c)) => {
                            if a != c {
                                out.s_pairs.push((a, c));
                            }
                        }
                    }
                }
                Rule::Essential { threshold } => {
                    if redundant {
                        continue;
                    }
                    let (ai, aj) = (out.psi.contains_key(&i), out.psi.contains_key(&j));
                    match (ai, aj) {
                        (true, true) => {
                            let pair = (min_image(&out.psi, &ci), min_image(&out.psi, &cj));
                            out.s_pairs.push(pair);
                        }
                        (true, false) | (false, true) => {
                            let (act, rest) = if ai { (&ci, &cj) } else { (&cj, &ci) };
                            let m = min_image(&out.psi, act);
                            for x in rest {
                                out.psi.insert(x.clone(), m.clone());
                            }
                        }
                        (false, false) => {
                            let merged = e.class_of(&i);
                            if merged.len() as u64 >= threshold {
                                let m = merged.iter().min().cloned().expect("nonempty");
                                for x in merged {
                                    out.psi.insert(x, m.clone());
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn psi(self: &Arc<Self>) -> MapFn {
        let core = self.clone();
        MapFn::native(move |x, b| {
            let r = core.replay(b);
            match r.psi.get(x) {
                Some(v) => Ok(v.clone()),
                None => match &r.violation {
                    Some(msg) => Err(CeerError::PromiseViolated(msg.clone())),
                    None => Err(CeerError::budget(format!("{x} not yet mapped"))),
                },
            }
        })
    }
}

/// The smaller ceer `S` read off a replay.
#[derive(Debug)]
struct Halved {
    core: Arc<Core>,
    bound: u64,
    frags: FragCache,
}

impl Ceer for Halved {
    fn name(&self) -> String {
        format!("half({})", self.core.source.name())
    }

    fn promises(&self) -> Promises {
        Promises::bounded(self.bound)
    }

    fn generators(&self, b: &Budget) -> Vec<(Nat, Nat)> {
        self.core.replay(b).s_pairs.clone()
    }

    fn fragment(&self, b: &Budget) -> Arc<Fragment> {
        self.frags.get(b, || self.generators(b))
    }

    // S ⊆ R
    fn refutes(&self, x: &Nat, y: &Nat, b: &Budget) -> bool {
        self.core.source.refutes(x, y, b)
    }

    fn has_refuter(&self) -> bool {
        self.core.source.has_refuter()
    }
}

fn declared_bound(r: &CeerRef) -> Result<u64> {
    r.promises()
        .bound
        .ok_or_else(|| CeerError::InvalidParameter(format!("{} carries no size bound", r.name())))
}

fn build(r: CeerRef, rule: Rule, out_bound: u64) -> (CeerRef, MapFn) {
    let bound = declared_bound(&r).unwrap_or(u64::MAX);
    let core = Arc::new(Core { source: r, rule, bound, cache: Mutex::default() });
    let psi = core.psi();
    let s: CeerRef = Arc::new(Halved { core, bound: out_bound, frags: FragCache::default() });
    (s, psi)
}

/// Output of the halving construction.
#[derive(Clone, Debug)]
pub struct Halving {
    /// `S`, `⌊k/threshold⌋`-bounded.
    pub s: CeerRef,
    /// `f: R ≤ S`, defined on elements the pair stream has activated.
    pub f: Reduction,
    /// The same `f` read as `R ∈ PC^S`.
    pub witness: PcWitness,
}

/// For `R` promised `k`-bounded (with nontrivial classes for a total `f`):
/// `S` and `f` built by replaying `R`'s pair stream, acting on a class once it
/// holds `threshold` elements. `threshold = 2` is the plain halving.
pub fn halve_bounded(r: CeerRef, threshold: u64) -> Result<Halving> {
    if threshold < 2 {
        return Err(CeerError::InvalidParameter("threshold must be at least 2".into()));
    }
    let k = declared_bound(&r)?;
    let (s, psi) = build(r.clone(), Rule::Essential { threshold }, k / threshold);
    let f = Reduction::new(format!("{} ≤ {}", r.name(), s.name()), psi.clone(), r, s.clone());
    Ok(Halving { witness: PcWitness { psi, target: s.clone() }, s, f })
}

/// For `R` promised `n`-bounded: `S`, `⌊n/2⌋`-bounded, and `ψ` with
/// `x R y ⟺ x = y ∨ ψ(x)↓ S ψ(y)↓`.
pub fn bounded_to_jump(r: CeerRef) -> Result<(CeerRef, PcWitness)> {
    let n = declared_bound(&r)?;
    let (s, psi) = build(r, Rule::Pc, n / 2);
    Ok((s.clone(), PcWitness { psi, target: s }))
}

/// `R ≤ ω^{(n)}` for `R` promised `(2^{n+1} - 1)`-bounded, as one program:
/// `R ≤ S′` from the PC witness, then `S ≤ ω^{(n-1)}` lifted through the
/// jump. Native `ψ` maps are tabulated at `build`.
pub fn bounded_to_omega_n(r: CeerRef, n: u32, build: &Budget) -> Result<Reduction> {
    let k = declared_bound(&r)?;
    let cap = (1u64 << (n + 1)) - 1;
    if k > cap {
        return Err(CeerError::InvalidParameter(format!("{} is {k}-bounded, above {cap}", r.name())));
    }
    let target = halting_jump(crate::ceers::omega(), n);
    let name = format!("{} ≤ {}", r.name(), target.name());
    if n == 0 {
        let id = builtin_indices().identity.clone();
        return Ok(Reduction::new(name, MapFn::Program(id), r, target));
    }
    let (s, w) = bounded_to_jump(r.clone())?;
    let psi = compile_map(&w.psi, build)?;
    let inner = bounded_to_omega_n(s, n - 1, build)?;
    let h = compile_map(&inner.map, build)?;
    let map = compose(&forward_program(&h), &pc_program(&psi));
    Ok(Reduction::new(name, MapFn::Program(map), r, target))
}
