//! The finite-fragment harness: three-valued checks of reductions and PC
//! witnesses, an independent closure oracle, promise audits and reports.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ceers::{Ceer, CeerRef, MapFn, PcWitness};
use crate::kernel::{nat_serde, Budget, Nat};
use crate::reductions::Reduction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairOutcome {
    ConfirmedPos,
    ConfirmedNeg,
    Violated,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    /// No violation, and every source-confirmed pair is confirmed downstream.
    Confirmed,
    Violated,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    #[serde(with = "nat_serde")]
    pub x: Nat,
    #[serde(with = "nat_serde")]
    pub y: Nat,
    pub outcome: PairOutcome,
    /// Ladder rung that settled the pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rung: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub confirmed_pos: u64,
    pub confirmed_neg: u64,
    pub violated: u64,
    pub unknown: u64,
    /// Unknown pairs whose source side was confirmed.
    pub pending_pos: u64,
    /// Pairs on which the map had no value within the last rung.
    pub map_errors: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub counts: Counts,
    pub pairs: Vec<PairRecord>,
    /// Unsettled pairs left after each rung.
    pub unknown_by_rung: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairRecord>,
}

impl Verdict {
    pub fn status(&self) -> Status {
        if self.counts.violated > 0 {
            Status::Violated
        } else if self.counts.pending_pos == 0 {
            Status::Confirmed
        } else {
            Status::Unknown
        }
    }

    pub fn violated(&self) -> u64 {
        self.counts.violated
    }
}

/// `(s, s, universe)` for `s ∈ {50, 100, 200, 400}`.
pub fn default_ladder(universe: u64) -> Vec<Budget> {
    [50, 100, 200, 400].iter().map(|&s| Budget::new(s, s, universe)).collect()
}

/// All pairs `x < y <= n`.
pub fn all_pairs(n: u64) -> Vec<(Nat, Nat)> {
    (0..=n).flat_map(|y| (0..y).map(move |x| (Nat::from(x), Nat::from(y)))).collect()
}

/// `count` distinct pairs `x < y <= n` drawn with `seed`.
pub fn random_pairs(seed: u64, count: usize, n: u64) -> Vec<(Nat, Nat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeSet::new();
    let cap = (n * (n + 1) / 2) as usize;
    while out.len() < count.min(cap) {
        let (a, b) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
        if a != b {
            out.insert((a.min(b), a.max(b)));
        }
    }
    out.into_iter().map(|(a, b)| (Nat::from(a), Nat::from(b))).collect()
}

fn judge(s_conf: bool, s_ref: bool, t_conf: bool, t_ref: bool) -> Option<(PairOutcome, &'static str)> {
    match (s_conf, s_ref, t_conf, t_ref) {
        (true, _, true, _) => Some((PairOutcome::ConfirmedPos, "")),
        (true, _, _, true) => Some((PairOutcome::Violated, "source confirms, target refutes")),
        (_, true, true, _) => Some((PairOutcome::Violated, "source refutes, target confirms")),
        (_, true, _, true) => Some((PairOutcome::ConfirmedNeg, "")),
        _ => None,
    }
}

struct Checked {
    rec: PairRecord,
    pending: bool,
    map_error: bool,
}

fn check_one(
    source: &dyn Ceer,
    target: &dyn Ceer,
    map: &MapFn,
    injective: bool,
    (x, y): &(Nat, Nat),
    ladder: &[Budget],
) -> Checked {
    let mut rec = PairRecord { x: x.clone(), y: y.clone(), outcome: PairOutcome::Unknown, rung: None, note: None };
    let mut pending = false;
    let mut map_error = false;
    for (k, b) in ladder.iter().enumerate() {
        let s_conf = source.confirms(x, y, b);
        let s_ref = !s_conf && source.refutes(x, y, b);
        let (fx, fy) = match (map.apply(x, b), map.apply(y, b)) {
            (Ok(u), Ok(v)) => (u, v),
            (Err(e), _) | (_, Err(e)) => {
                map_error = true;
                pending = s_conf;
                rec.note = Some(e.to_string());
                continue;
            }
        };
        map_error = false;
        rec.note = None;
        if injective && x != y && fx == fy {
            rec.outcome = PairOutcome::Violated;
            rec.rung = Some(k);
            rec.note = Some("claimed one-one map collides".into());
            break;
        }
        pending = s_conf;
        if !s_conf && !s_ref {
            continue;
        }
        let t_conf = target.confirms(&fx, &fy, b);
        let t_ref = !t_conf && target.refutes(&fx, &fy, b);
        if let Some((o, why)) = judge(s_conf, s_ref, t_conf, t_ref) {
            rec.outcome = o;
            rec.rung = Some(k);
            if !why.is_empty() {
                rec.note = Some(why.into());
            }
            pending = false;
            break;
        }
    }
    Checked { rec, pending, map_error }
}

fn check_pairs(
    source: &dyn Ceer,
    target: &dyn Ceer,
    map: &MapFn,
    injective: bool,
    pairs: &[(Nat, Nat)],
    ladder: &[Budget],
) -> Verdict {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(pairs.len().max(1));
    let chunk = pairs.len().div_ceil(workers).max(1);
    let checked: Vec<Checked> = std::thread::scope(|sc| {
        let handles: Vec<_> = pairs
            .chunks(chunk)
            .map(|part| {
                sc.spawn(move || {
                    part.iter().map(|p| check_one(source, target, map, injective, p, ladder)).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("pair check panicked")).collect()
    });
    let mut records = Vec::with_capacity(pairs.len());
    let mut counts = Counts::default();
    for Checked { rec, pending, map_error } in checked {
        match rec.outcome {
            PairOutcome::ConfirmedPos => counts.confirmed_pos += 1,
            PairOutcome::ConfirmedNeg => counts.confirmed_neg += 1,
            PairOutcome::Violated => counts.violated += 1,
            PairOutcome::Unknown => {
                counts.unknown += 1;
                counts.pending_pos += pending as u64;
                counts.map_errors += map_error as u64;
            }
        }
        records.push(rec);
    }
    let unknown_by_rung = (0..ladder.len())
        .map(|k| records.iter().filter(|r| r.rung.is_none_or(|j| j > k)).count() as u64)
        .collect();
    let witness = records.iter().find(|r| r.outcome == PairOutcome::Violated).cloned();
    Verdict { counts, pairs: records, unknown_by_rung, witness }
}

/// Checks `x R₁ y ⟺ f(x) R₂ f(y)` pair by pair, escalating along `ladder`.
pub fn check_reduction(f: &Reduction, pairs: &[(Nat, Nat)], ladder: &[Budget]) -> Verdict {
    check_pairs(f.source.as_ref(), f.target.as_ref(), &f.map, f.injective, pairs, ladder)
}

/// Checks `x R y ⟺ x = y ∨ ψ(x)↓ E ψ(y)↓` on pairs with `x ≠ y`.
pub fn check_pc_witness(w: &PcWitness, r: &CeerRef, pairs: &[(Nat, Nat)], ladder: &[Budget]) -> Verdict {
    let pairs: Vec<(Nat, Nat)> = pairs.iter().filter(|(x, y)| x != y).cloned().collect();
    check_pairs(r.as_ref(), w.target.as_ref(), &w.psi, false, &pairs, ladder)
}

/// The partition of `[0, universe]` generated by `pairs`, by naive fixpoint
/// iteration on a relation matrix. Elements above `universe` still carry
/// transitivity.
pub fn fragment_oracle(pairs: &[(u64, u64)], universe: u64) -> Vec<Vec<u64>> {
    let mut dom: BTreeSet<u64> = (0..=universe).collect();
    for &(a, b) in pairs {
        dom.insert(a);
        dom.insert(b);
    }
    let dom: Vec<u64> = dom.into_iter().collect();
    let at: BTreeMap<u64, usize> = dom.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = dom.len();
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in pairs {
        rel[at[&a]][at[&b]] = true;
        rel[at[&b]][at[&a]] = true;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if !rel[i][j] {
                    continue;
                }
                for k in 0..n {
                    if rel[j][k] && !rel[i][k] {
                        rel[i][k] = true;
                        rel[k][i] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    let mut out: Vec<Vec<u64>> = Vec::new();
    let mut taken = vec![false; n];
    for i in 0..n {
        if taken[i] || dom[i] > universe {
            continue;
        }
        let block: Vec<u64> = (0..n).filter(|&j| rel[i][j] && dom[j] <= universe).map(|j| dom[j]).collect();
        for j in 0..n {
            if rel[i][j] {
                taken[j] = true;
            }
        }
        out.push(block);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromiseAudit {
    pub ceer: String,
    pub budget: Budget,
    pub bound: Option<u64>,
    pub max_class_size: usize,
    /// `None` when no bound is declared.
    pub bound_holds: Option<bool>,
    /// Every mentioned element has a partner (evidence only).
    pub nontrivial_evidence: Option<bool>,
    pub finite_classes_declared: bool,
    pub computable_classes_declared: bool,
    pub status: Status,
}

/// Checks a declared size bound exactly on the fragment at `b`; the other
/// promises are reported as evidence.
pub fn audit_promises(r: &dyn Ceer, b: &Budget) -> PromiseAudit {
    let p = r.promises();
    let frag = r.fragment(b);
    let max = frag.max_class_size();
    let bound_holds = p.bound.map(|k| max as u64 <= k);
    let nontrivial_evidence =
        p.nontrivial.then(|| frag.union_find().classes().iter().all(|c| c.len() >= 2));
    let status = match bound_holds {
        Some(false) => Status::Violated,
        Some(true) => Status::Confirmed,
        None => Status::Unknown,
    };
    PromiseAudit {
        ceer: r.name(),
        budget: *b,
        bound: p.bound,
        max_class_size: max,
        bound_holds,
        nontrivial_evidence,
        finite_classes_declared: p.finite_classes,
        computable_classes_declared: p.computable_classes,
        status,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub status: Status,
    #[serde(flatten)]
    pub counts: Counts,
    pub unknown_by_rung: Vec<u64>,
}

/// A deterministic, serializable record of one harness run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub budgets: Vec<Budget>,
    pub provenance: BTreeMap<String, String>,
    pub pairs: Vec<PairRecord>,
    pub verdict: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PairRecord>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn emit_report(
    experiment: &str,
    v: &Verdict,
    budgets: &[Budget],
    provenance: BTreeMap<String, String>,
) -> Report {
    Report {
        experiment: experiment.into(),
        budgets: budgets.to_vec(),
        provenance,
        pairs: v.pairs.clone(),
        verdict: Summary { status: v.status(), counts: v.counts.clone(), unknown_by_rung: v.unknown_by_rung.clone() },
        witness: v.witness.clone(),
    }
}
