//! Computably enumerable sets with staged enumeration.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{CeerError, Result};
use crate::kernel::asm::Asm;
use crate::kernel::{builtin_indices, Budget, Nat, ProgramIndex};
use crate::runs::Runs;

/// A c.e. set seen through budgets. `members` lists confirmed members in
/// enumeration order; the listing at a larger budget extends the one at a
/// smaller budget.
pub trait CeSet: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Confirmed membership: a `true` answer is final.
    fn contains(&self, x: &Nat, b: &Budget) -> bool;

    fn members(&self, b: &Budget) -> Vec<Nat>;

    /// Exact membership when the set is decidable.
    fn decide(&self, _x: &Nat) -> Option<bool> {
        None
    }

    fn has_decider(&self) -> bool {
        false
    }

    /// An index `e` with `W_e` equal to this set, when one is at hand.
    fn index(&self) -> Option<ProgramIndex> {
        None
    }
}

pub type SetRef = Arc<dyn CeSet>;

/// `W_e`, optionally restricted to inputs on which `φ_e` returns `value`.
#[derive(Debug)]
pub struct ProgramSet {
    name: String,
    runs: Runs,
    value: Option<Nat>,
}

impl ProgramSet {
    fn accepts(&self, v: &Nat) -> bool {
        self.value.as_ref().is_none_or(|w| w == v)
    }
}

impl CeSet for ProgramSet {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn contains(&self, x: &Nat, b: &Budget) -> bool {
        self.runs.run(x, b.fuel).is_some_and(|(v, _)| self.accepts(&v))
    }

    fn members(&self, b: &Budget) -> Vec<Nat> {
        self.runs
            .halting_below(b.horizon())
            .into_iter()
            .filter(|(_, v, _)| self.accepts(v))
            .map(|(x, _, _)| x)
            .collect()
    }

    fn index(&self) -> Option<ProgramIndex> {
        let e = self.runs.index().clone();
        Some(match &self.value {
            None => e,
            Some(v) => {
                let mut a = Asm::new();
                a.set(1, e.0).eval(0, 1, 0).set(1, v.clone()).jeq(0, 1, "halt");
                a.label("loop").jmp(0, "loop");
                a.index()
            }
        })
    }
}

pub fn w(e: ProgramIndex) -> SetRef {
    Arc::new(ProgramSet { name: format!("W({e})"), runs: Runs::new(e), value: None })
}

/// `K = {x : φ_x(x)↓}`.
pub fn k() -> SetRef {
    Arc::new(ProgramSet {
        name: "K".into(),
        runs: Runs::new(builtin_indices().kappa.clone()),
        value: None,
    })
}

/// `K_i = {x : φ_x(x)↓ = i}`.
pub fn k_i(i: &Nat) -> SetRef {
    Arc::new(ProgramSet {
        name: format!("K({i})"),
        runs: Runs::new(builtin_indices().kappa.clone()),
        value: Some(i.clone()),
    })
}

type Pred = Arc<dyn Fn(&Nat) -> bool + Send + Sync>;

/// A decidable set with a semi-deciding program.
pub struct Decidable {
    name: String,
    pred: Pred,
    program: ProgramIndex,
}

impl fmt::Debug for Decidable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Decidable").field("name", &self.name).finish()
    }
}

impl CeSet for Decidable {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn contains(&self, x: &Nat, _b: &Budget) -> bool {
        (self.pred)(x)
    }

    fn members(&self, b: &Budget) -> Vec<Nat> {
        (0..=b.horizon()).map(Nat::from).filter(|x| (self.pred)(x)).collect()
    }

    fn decide(&self, x: &Nat) -> Option<bool> {
        Some((self.pred)(x))
    }

    fn has_decider(&self) -> bool {
        true
    }

    fn index(&self) -> Option<ProgramIndex> {
        Some(self.program.clone())
    }
}

/// `{x : x ≡ r (mod m)}`; `m` must be positive.
pub fn residue(m: u64, r: u64) -> Result<SetRef> {
    if m == 0 {
        return Err(CeerError::InvalidParameter("modulus must be positive".into()));
    }
    let r = r % m;
    let mut a = Asm::new();
    a.set(1, m).modulo(2, 0, 1).set(3, r).jeq(2, 3, "halt");
    a.label("loop").jmp(0, "loop");
    let (mm, rr) = (Nat::from(m), Nat::from(r));
    Ok(Arc::new(Decidable {
        name: if m == 2 && r == 0 { "evens".into() } else { format!("mod({m},{r})") },
        pred: Arc::new(move |x| x % &mm == rr),
        program: a.index(),
    }))
}

pub fn evens() -> SetRef {
    residue(2, 0).expect("positive modulus")
}

pub fn all() -> SetRef {
    residue(1, 0).expect("positive modulus")
}

pub fn finite(elems: &[u64]) -> SetRef {
    let set: BTreeSet<u64> = elems.iter().copied().collect();
    let mut a = Asm::new();
    for &x in &set {
        a.set(1, x).jeq(0, 1, "halt");
    }
    a.label("loop").jmp(0, "loop");
    let list: Vec<String> = set.iter().map(u64::to_string).collect();
    let name = if set.is_empty() { "empty".into() } else { format!("{{{}}}", list.join(",")) };
    Arc::new(Decidable {
        name,
        pred: Arc::new(move |x| x.to_u64().is_some_and(|v| set.contains(&v))),
        program: a.index(),
    })
}

pub fn empty() -> SetRef {
    finite(&[])
}

/// Post's simple set: for every `e`, the first element of `W_e` above `2e`
/// (in `W_e`'s staged listing) is enrolled.
#[derive(Debug, Default)]
pub struct PostSimple {
    memo: Mutex<HashMap<u64, Arc<Vec<Nat>>>>,
}

impl PostSimple {
    fn listing(&self, h: u64) -> Arc<Vec<Nat>> {
        if let Some(v) = self.memo.lock().expect("post lock").get(&h) {
            return v.clone();
        }
        let mut enrolled: Vec<(u64, u64, Nat)> = Vec::new();
        for e in 0..=h {
            let runs = Runs::new(ProgramIndex::from(e));
            let two_e = Nat::from(2 * e);
            let first = runs.halting_below(h).into_iter().find(|(x, _, _)| *x > two_e);
            if let Some((x, _, t)) = first {
                let stage = t.max(e);
                if stage <= h {
                    enrolled.push((stage, e, x));
                }
            }
        }
        enrolled.sort();
        let mut seen = HashSet::new();
        let list: Vec<Nat> = enrolled
            .into_iter()
            .filter_map(|(_, _, x)| seen.insert(x.clone()).then_some(x))
            .collect();
        let list = Arc::new(list);
        self.memo.lock().expect("post lock").insert(h, list.clone());
        list
    }
}

impl CeSet for PostSimple {
    fn name(&self) -> String {
        "post_simple".into()
    }

    fn contains(&self, x: &Nat, b: &Budget) -> bool {
        self.listing(b.horizon()).contains(x)
    }

    fn members(&self, b: &Budget) -> Vec<Nat> {
        self.listing(b.horizon()).as_ref().clone()
    }
}

pub fn post_simple() -> SetRef {
    Arc::new(PostSimple::default())
}

/// Positions `n` of a one-one listing having a later smaller entry, in order of
/// discovery. A repeated entry is an input violation.
pub fn deficiency_of(listing: &[Nat]) -> Result<Vec<Nat>> {
    let mut seen = HashSet::new();
    for a in listing {
        if !seen.insert(a) {
            return Err(CeerError::InputViolation(format!("base listing repeats {a}")));
        }
    }
    let mut out = Vec::new();
    let mut found = vec![false; listing.len()];
    for m in 0..listing.len() {
        for n in 0..m {
            if !found[n] && listing[m] < listing[n] {
                found[n] = true;
                out.push(Nat::from(n));
            }
        }
    }
    Ok(out)
}

/// Dekker's deficiency set of the listing of `base`.
#[derive(Debug)]
pub struct Deficiency {
    base: SetRef,
}

impl CeSet for Deficiency {
    fn name(&self) -> String {
        format!("deficiency({})", self.base.name())
    }

    fn contains(&self, x: &Nat, b: &Budget) -> bool {
        self.members(b).contains(x)
    }

    fn members(&self, b: &Budget) -> Vec<Nat> {
        deficiency_of(&self.base.members(b)).expect("set listings never repeat")
    }
}

pub fn dekker_deficiency(base: SetRef) -> SetRef {
    Arc::new(Deficiency { base })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Probe {
    Confirmed,
    Violated { n: u64 },
    Unknown,
}

/// Tests `h(n) >= z_n` for `1 <= n <= universe`, where `z_0 < z_1 < ...`
/// lists the complement of `a`. `h` returning `None` means no value within
/// budget. Without a decider only definite failures are reported: the
/// complement estimated from confirmed members contains the true complement,
/// so its `n`-th element is a lower bound for `z_n`.
pub fn majorizer_probe(h: &dyn Fn(u64) -> Option<Nat>, a: &dyn CeSet, b: &Budget) -> Probe {
    let need = b.universe as usize + 1;
    let complement: Vec<Nat> = if a.has_decider() {
        let cap = 1024 + 64 * b.universe;
        (0..cap)
            .map(Nat::from)
            .filter(|x| a.decide(x) == Some(false))
            .take(need)
            .collect()
    } else {
        let confirmed: HashSet<Nat> = a.members(b).into_iter().collect();
        (0u64..)
            .map(Nat::from)
            .filter(|x| !confirmed.contains(x))
            .take(need)
            .collect()
    };
    let mut unsure = !a.has_decider();
    for n in 1..=b.universe {
        let Some(z) = complement.get(n as usize) else {
            unsure = true;
            continue;
        };
        match h(n) {
            Some(v) if v < *z => return Probe::Violated { n },
            Some(_) => {}
            None => unsure = true,
        }
    }
    if unsure {
        Probe::Unknown
    } else {
        Probe::Confirmed
    }
}
