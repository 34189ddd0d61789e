//! Memoized step-bounded runs of a fixed program on small inputs.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::kernel::{EvalOutcome, Machine, Nat, ProgramIndex};

#[derive(Clone, Debug)]
enum Entry {
    Done(Nat, u64),
    Tried(u64),
}

/// Caches `φ_e(x)` so that repeated queries at growing fuel never redo work
/// already known to converge. Answers depend only on `(e, x, fuel)`.
#[derive(Debug)]
pub struct Runs {
    index: ProgramIndex,
    memo: Mutex<HashMap<Nat, Entry>>,
}

impl Runs {
    pub fn new(index: ProgramIndex) -> Self {
        Runs { index, memo: Mutex::new(HashMap::new()) }
    }

    pub fn index(&self) -> &ProgramIndex {
        &self.index
    }

    /// Value and step count when `φ_e(x)` halts within `fuel` steps.
    pub fn run(&self, x: &Nat, fuel: u64) -> Option<(Nat, u64)> {
        if let Some(e) = self.memo.lock().expect("runs lock").get(x) {
            match e {
                Entry::Done(v, s) => return (*s <= fuel).then(|| (v.clone(), *s)),
                Entry::Tried(f) if *f >= fuel => return None,
                Entry::Tried(_) => {}
            }
        }
        let out = Machine::new().eval(&self.index, x, fuel);
        let entry = match &out {
            EvalOutcome::Converged { value, steps } => Entry::Done(value.clone(), *steps),
            EvalOutcome::OutOfFuel => Entry::Tried(fuel),
        };
        self.memo.lock().expect("runs lock").insert(x.clone(), entry);
        match out {
            EvalOutcome::Converged { value, steps } => Some((value, steps)),
            EvalOutcome::OutOfFuel => None,
        }
    }

    /// Inputs `x <= h` halting within `h` steps, listed by `(max(x, steps), x)`.
    /// The listing at `h` is a prefix of the listing at any larger `h`.
    pub fn halting_below(&self, h: u64) -> Vec<(Nat, Nat, u64)> {
        let mut out: Vec<(u64, Nat, Nat)> = (0..=h)
            .filter_map(|x| {
                let xn = Nat::from(x);
                self.run(&xn, h).map(|(v, s)| (x.max(s), xn, v))
            })
            .collect();
        out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        out.into_iter().map(|(t, x, v)| (x, v, t)).collect()
    }
}

/// Iterates of `κ(x) = φ_x(x)`, each application bounded by its own fuel.
#[derive(Debug)]
pub struct Kappa {
    runs: Runs,
}

impl Default for Kappa {
    fn default() -> Self {
        Kappa { runs: Runs::new(crate::kernel::builtin_indices().kappa.clone()) }
    }
}

impl Kappa {
    pub fn new() -> Self {
        Kappa::default()
    }

    pub fn runs(&self) -> &Runs {
        &self.runs
    }

    pub fn apply(&self, x: &Nat, fuel: u64) -> Option<Nat> {
        self.runs.run(x, fuel).map(|(v, _)| v)
    }

    /// `[κ(x), κ²(x), ..]` up to `depth` entries, cut at the first application
    /// that does not halt within `fuel`.
    pub fn iterates(&self, x: &Nat, depth: u64, fuel: u64) -> Vec<Nat> {
        let mut out = Vec::new();
        let mut cur = x.clone();
        for _ in 0..depth {
            match self.apply(&cur, fuel) {
                Some(v) => {
                    out.push(v.clone());
                    cur = v;
                }
                None => break,
            }
        }
        out
    }
}
