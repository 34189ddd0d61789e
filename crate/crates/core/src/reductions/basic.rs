use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::Reduction;
use crate::ceers::{from_pairs, from_sets, interval, omega, CeerRef, MapFn, UnionFind};
use crate::error::{CeerError, Result};
use crate::kernel::asm::Asm;
use crate::kernel::{eval, fixpoint, pair, Budget, Nat, ProgramIndex};
use crate::sets::SetRef;

fn position(list: Arc<Vec<Nat>>, what: &'static str) -> MapFn {
    MapFn::native(move |x, _| {
        x.to_usize()
            .and_then(|i| list.get(i).cloned())
            .ok_or_else(|| CeerError::budget(format!("{what}: no output #{x}")))
    })
}

/// `ω ≤ R` by the μ-recursion `f(x+1) = μy (y > f(x) ∧ ∀z ≤ x ¬ y R f(z))`,
/// tabulated for `count` outputs with candidates up to `b.universe`.
pub fn omega_into(r: CeerRef, count: u64, b: &Budget) -> Result<Reduction> {
    if !r.decidable() {
        return Err(CeerError::Unsupported(format!("{} has no decider", r.name())));
    }
    let mut out: Vec<Nat> = Vec::new();
    let mut y = 0u64;
    while (out.len() as u64) < count {
        let cand = Nat::from(y);
        if out.iter().all(|z| r.refutes(&cand, z, b)) {
            out.push(cand);
        }
        y += 1;
        if y > b.universe && (out.len() as u64) < count {
            return Err(CeerError::budget(format!(
                "{} yields only {} inequivalent elements up to {}",
                r.name(),
                out.len(),
                b.universe
            )));
        }
    }
    Ok(Reduction::new(format!("ω ≤ {}", r.name()), position(Arc::new(out), "omega_into"), omega(), r)
        .one_one())
}

/// `R ≤ ω` through a transversal `T`: `g(x)` is the first listed `y ∈ T`
/// with `x R y` confirmed.
pub fn via_transversal(r: CeerRef, t: SetRef) -> Reduction {
    let src = r.clone();
    let map = MapFn::native(move |x, b| {
        t.members(b)
            .into_iter()
            .find(|y| src.confirms(x, y, b))
            .ok_or_else(|| CeerError::budget(format!("no representative of {x} in {}", t.name())))
    });
    Reduction::new(format!("{} ≤ ω", r.name()), map, r, omega())
}

/// `ω ≤ R_{A_1..A_n}` by listing `W`, an infinite c.e. set missing every `A_i`.
pub fn omega_to_nonsimple(sets: Vec<SetRef>, w: SetRef, check: &Budget) -> Result<Reduction> {
    let target = from_sets(sets, check)?;
    let map = MapFn::native(move |x, b| {
        let i = x.to_usize().unwrap_or(usize::MAX);
        w.members(b).get(i).cloned().ok_or_else(|| CeerError::budget(format!("W lists fewer than {x} elements")))
    });
    Ok(Reduction::new(format!("ω ≤ {}", target.name()), map, omega(), target).one_one())
}

/// From a claimed `f: ω ≤ F_A`: `g(0) = f(0)`, `g(n+1) = f(x)` for the least
/// `x` with `f(x) > g(n)`; the majorizer is `h(n) = g(n+1)`. Searches are
/// capped at `b.universe` arguments per step.
pub fn majorizer_from_reduction(f: &Reduction, b: &Budget) -> impl Fn(u64) -> Option<Nat> {
    let f = f.clone();
    let b = *b;
    move |n| {
        let mut g = f.apply(&Nat::default(), &b).ok()?;
        for _ in 0..=n {
            let mut next = None;
            for x in 0..=b.universe {
                let v = f.apply(&Nat::from(x), &b).ok()?;
                if v > g {
                    next = Some(v);
                    break;
                }
            }
            g = next?;
        }
        Some(g)
    }
}

/// From a majorizer `h` of the complement of `A`: `f(0) = 0`,
/// `f(n+1) = h(f(n))`, a reduction `ω ≤ F_A`.
pub fn reduction_from_majorizer(a: SetRef, h: MapFn) -> Reduction {
    let target = interval(a);
    let map = MapFn::native(move |x, b| {
        let n = x.to_u64().ok_or_else(|| CeerError::budget("argument too large"))?;
        let mut v = Nat::default();
        for _ in 0..n {
            v = h.apply(&v, b)?;
        }
        Ok(v)
    });
    Reduction::new(format!("ω ≤ {}", target.name()), map, omega(), target)
}

/// `R_{A_0..A_{n-1}} ≤_1 R_{K_0..K_{n-1}}` via `f = φ_{e₀}`, where `e₀` is a
/// fixed point of `e ↦ (x ↦ s(e, x))` and `φ_{s(e,x)}(y) = i` when
/// `x ∈ A_i` and `y = φ_e(x)`.
pub fn ndim_to_k(sets: Vec<SetRef>, check: &Budget) -> Result<Reduction> {
    let mut idx = Vec::new();
    for s in &sets {
        idx.push(s.index().ok_or_else(|| CeerError::Unsupported(format!("{} has no index", s.name())))?);
    }
    let mut a = Asm::new();
    a.unpair(1, 2, 0).unpair(3, 4, 1).eval(5, 3, 4).jeq(5, 2, "member");
    a.label("loop").jmp(10, "loop");
    a.label("member").set(6, 1u32);
    a.label("round");
    for (i, e) in idx.iter().enumerate() {
        let next = format!("next{i}");
        a.set(7, e.0.clone()).eval_bounded(8, 7, 4, 6).jeq(8, 9, &next);
        a.set(0, i as u64).jmp(10, "halt");
        a.label(&next);
    }
    a.inc(6).jmp(10, "round");
    let f = a.index();
    let q = Asm::new().set(3, f.0).smn(0, 3, 0).index();
    let t = Asm::new().set(1, q.0).smn(0, 1, 0).index();
    let e0 = fixpoint(&t);
    let ks: Vec<SetRef> = (0..sets.len() as u64).map(|i| crate::sets::k_i(&Nat::from(i))).collect();
    let source = from_sets(sets, check)?;
    let target = from_sets(ks, check)?;
    Ok(Reduction::new(format!("{} ≤ {}", source.name(), target.name()), MapFn::Program(e0), source, target)
        .one_one())
}

/// `ω ≤ R` for `R` promised bounded: lists the minimum of each class outside
/// `f` as soon as `l` of its elements are enumerated.
pub fn omega_to_bounded(r: CeerRef, l: u64, f: &[u64]) -> Result<Reduction> {
    if l == 0 {
        return Err(CeerError::InvalidParameter("l must be positive".into()));
    }
    let fin: Vec<Nat> = f.iter().map(|&x| Nat::from(x)).collect();
    let src = r.clone();
    let map = MapFn::native(move |x, b| {
        let mut listed: Vec<Nat> = Vec::new();
        if l == 1 {
            listed = (0..=b.horizon()).map(Nat::from).filter(|z| !fin.contains(z)).collect();
        } else {
            let mut uf = UnionFind::new();
            for (u, v) in src.generators(b) {
                uf.union(&u, &v);
                if !fin.contains(&u) && uf.class_size(&u) as u64 == l {
                    let m = uf.class_min(&u);
                    if !listed.contains(&m) {
                        listed.push(m);
                    }
                }
            }
        }
        let i = x.to_usize().unwrap_or(usize::MAX);
        listed.get(i).cloned().ok_or_else(|| CeerError::budget(format!("fewer than {} complete classes", i + 1)))
    });
    Ok(Reduction::new(format!("ω ≤ {}", r.name()), map, omega(), r).one_one())
}

/// The fixed point `e₀` defeating a claimed uniform `ρ`, with the pair
/// `(ρ(e₀,0), ρ(e₀,1))` and the stage at which `R_{e₀}` confirms it.
#[derive(Clone, Debug, Serialize)]
pub struct Diagonal {
    pub e0: ProgramIndex,
    #[serde(with = "crate::kernel::nat_serde")]
    pub left: Nat,
    #[serde(with = "crate::kernel::nat_serde")]
    pub right: Nat,
    pub stage: u64,
}

impl Diagonal {
    pub fn ceer(&self) -> CeerRef {
        from_pairs(self.e0.clone())
    }
}

/// Builds `s` with `W_{s(e)} = {⟨ρ(e,0), ρ(e,1)⟩, ⟨ρ(e,1), ρ(e,0)⟩}`, takes a
/// fixed point `e₀` of `s` and runs it.
pub fn diagonalize_uniform(rho: &ProgramIndex, b: &Budget) -> Result<Diagonal> {
    let mut a = Asm::new();
    a.unpair(1, 2, 0).zero(3).pair(4, 1, 3).set(5, rho.0.clone()).eval(6, 5, 4);
    a.inc(3).pair(4, 1, 3).eval(7, 5, 4);
    a.pair(8, 6, 7).jeq(8, 2, "halt").pair(8, 7, 6).jeq(8, 2, "halt");
    a.label("loop").jmp(10, "loop");
    let s = a.index();
    let t = Asm::new().set(1, s.0).smn(0, 1, 0).index();
    let e0 = fixpoint(&t);
    let at = |x: u64| {
        eval(rho, &pair(&e0.0, &Nat::from(x)), b.fuel)
            .into_value()
            .ok_or_else(|| CeerError::budget(format!("ρ(e₀,{x}) within fuel {}", b.fuel)))
    };
    let (left, right) = (at(0)?, at(1)?);
    let z = pair(&left, &right);
    let steps = eval(&e0, &z, b.fuel)
        .steps()
        .ok_or_else(|| CeerError::budget(format!("W_e₀ does not list ⟨ρ(e₀,0), ρ(e₀,1)⟩ within fuel {}", b.fuel)))?;
    let stage = z.to_u64().ok_or_else(|| CeerError::budget("pair code too large"))?.max(steps);
    Ok(Diagonal { e0, left, right, stage })
}
