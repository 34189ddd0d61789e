use num_traits::ToPrimitive;

use super::Reduction;
use crate::ceers::{layers_bounded, CeerRef, MapFn};
use crate::error::{CeerError, Result};
use crate::jumps::{absorb, omega_plus, saturation_jump};
use crate::kernel::asm::Asm;
use crate::kernel::{decode_set, encode_set, eval, pad, pair, unpair, Budget, Nat, ProgramIndex};
use crate::runs::Kappa;

/// `R ≤ R^+` via `x ↦ {x}`.
pub fn singleton_embedding(r: CeerRef) -> Reduction {
    let target = saturation_jump(r.clone(), 1);
    let name = format!("{} ≤ {}", r.name(), target.name());
    Reduction::new(name, MapFn::total(|x| encode_set([x.clone()])), r, target).one_one()
}

fn lift(f: &MapFn, x: &Nat, depth: u32, b: &Budget) -> Result<Nat> {
    if depth == 0 {
        return f.apply(x, b);
    }
    let elems = decode_set(x).iter().map(|u| lift(f, u, depth - 1, b)).collect::<Result<Vec<_>>>()?;
    Ok(encode_set(elems))
}

/// `E₁^{n+} ≤ E₂^{n+}` by applying `f` elementwise at depth `n`.
pub fn lift_saturation(f: &Reduction, n: u32) -> Reduction {
    let map = f.map.clone();
    let (source, target) = (saturation_jump(f.source.clone(), n), saturation_jump(f.target.clone(), n));
    let name = format!("{} ≤ {}", source.name(), target.name());
    Reduction::new(name, MapFn::native(move |x, b| lift(&map, x, n, b)), source, target)
}

/// `(R^{ω+})^+ ≤ R^{ω+}` via `x ↦ ⟨x, k_x + 1⟩`.
pub fn omega_plus_absorb(r: CeerRef) -> Reduction {
    let target = omega_plus(r);
    let source = saturation_jump(target.clone(), 1);
    let name = format!("{} ≤ {}", source.name(), target.name());
    Reduction::new(name, MapFn::total(absorb), source, target).one_one()
}

/// Programs for `g₁, g₂`: `x ↦ smn(D_i, x)` where both `D_i` compute
/// `z ↦ φ_x(x)`, so `κ(g_i(x)) ≃ κ(x)` and the ranges are disjoint.
pub fn collapse_gadgets() -> (ProgramIndex, ProgramIndex) {
    let d1 = Asm::new().unpair(1, 2, 0).eval(0, 1, 1).index();
    let d2 = pad(&d1, 1);
    let maker = |d: ProgramIndex| Asm::new().set(1, d.0).smn(0, 1, 0).index();
    (maker(d1), maker(d2))
}

fn audit_gadgets(g1: &ProgramIndex, g2: &ProgramIndex, b: &Budget) -> Result<(Vec<Nat>, Vec<Nat>)> {
    let kappa = Kappa::new();
    let apply = |g: &ProgramIndex, x: &Nat| {
        eval(g, x, b.fuel)
            .into_value()
            .ok_or_else(|| CeerError::InputViolation(format!("gadget {g} stalls on {x}")))
    };
    let (mut r1, mut r2) = (Vec::new(), Vec::new());
    for x in 0..=b.universe {
        let x = Nat::from(x);
        let (a, c) = (apply(g1, &x)?, apply(g2, &x)?);
        let base = kappa.apply(&x, b.fuel).is_some();
        for y in [&a, &c] {
            if kappa.apply(y, b.fuel).is_some() && !base {
                return Err(CeerError::InputViolation(format!("gadget image {y} of {x} halts, {x} does not")));
            }
        }
        r1.push(a);
        r2.push(c);
    }
    if r1.iter().any(|a| r2.contains(a)) {
        return Err(CeerError::InputViolation("gadget ranges overlap".into()));
    }
    Ok((r1, r2))
}

/// The pair `R₁ = ⟨x,0⟩ ~ ⟨x,1⟩` and `R₂ = ⟨x,0⟩ ~ ⟨x,1⟩ ~ ⟨x,2⟩`, both on `x ∈ K`.
pub fn collapse_pair() -> (CeerRef, CeerRef) {
    (layers_bounded(crate::sets::k(), 1), layers_bounded(crate::sets::k(), 2))
}

/// `R₁ ≤ R₂`: the coding fixes layers 0 and 1 and moves layer `i ≥ 2` to `i + 1`.
pub fn collapse_containment() -> Reduction {
    let (r1, r2) = collapse_pair();
    let map = MapFn::total(|z| {
        let (x, i) = unpair(z);
        if i >= Nat::from(2u32) {
            pair(&x, &(i + 1u32))
        } else {
            z.clone()
        }
    });
    Reduction::new(format!("{} ≤ {}", r1.name(), r2.name()), map, r1, r2).one_one()
}

/// `R₂^+ ≤ R₁^+` for the pair above, from gadgets `g₁, g₂` (audited on
/// `[0, audit.universe]`). Elements `⟨x, i⟩`, `i ≥ 3`, go to `{⟨g₁(x), i⟩}`.
pub fn satjump_collapse(g1: &ProgramIndex, g2: &ProgramIndex, audit: &Budget) -> Result<Reduction> {
    audit_gadgets(g1, g2, audit)?;
    let (r1, r2) = collapse_pair();
    let (source, target) = (saturation_jump(r2, 1), saturation_jump(r1, 1));
    let (g1, g2) = (g1.clone(), g2.clone());
    let map = MapFn::native(move |code, b| {
        let mut out = Vec::new();
        for z in decode_set(code) {
            let (x, i) = unpair(&z);
            let run = |g: &ProgramIndex| {
                eval(g, &x, b.fuel).into_value().ok_or_else(|| CeerError::budget(format!("gadget on {x}")))
            };
            let (a, c) = (run(&g1)?, run(&g2)?);
            let tag = |v: &Nat, t: u32| pair(v, &Nat::from(t));
            match i.to_u64() {
                Some(0) => out.extend([tag(&a, 0), tag(&c, 0)]),
                Some(1) => out.extend([tag(&a, 0), tag(&c, 1)]),
                Some(2) => out.extend([tag(&a, 1), tag(&c, 1)]),
                _ => out.push(pair(&a, &i)),
            }
        }
        Ok(encode_set(out))
    });
    Ok(Reduction::new(format!("{} ≤ {}", source.name(), target.name()), map, source, target))
}
