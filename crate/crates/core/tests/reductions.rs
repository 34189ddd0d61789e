use ceerlab::ceers::{explicit, from_pairs, from_sets, id, omega, MapFn, PcWitness};
use ceerlab::jumps::halting_jump;
use ceerlab::kernel::asm::Asm;
use ceerlab::kernel::{builtin_indices, eval, pair_u64, Budget, Nat, ProgramIndex};
use ceerlab::reductions::*;
use ceerlab::sets::{evens, finite, residue};
use ceerlab::verify::{all_pairs, check_pc_witness, check_reduction, default_ladder, Status};
use ceerlab::CeerError;

fn n(v: u64) -> Nat {
    Nat::from(v)
}

fn lister(codes: &[Nat]) -> ProgramIndex {
    let mut a = Asm::new();
    for c in codes {
        a.set(1, c.clone()).jeq(0, 1, "halt");
    }
    a.label("loop").jmp(0, "loop");
    a.index()
}

fn small() -> Budget {
    Budget::new(100, 100, 20)
}

#[test]
fn omega_into_lists_residues() {
    let f = omega_into(id(5).unwrap(), 5, &small()).unwrap();
    let got: Vec<Nat> = (0..5).map(|x| f.apply(&n(x), &small()).unwrap()).collect();
    assert_eq!(got, (0..5).map(n).collect::<Vec<_>>());
    assert!(matches!(omega_into(id(5).unwrap(), 6, &small()), Err(CeerError::BudgetExceeded(_))));
    let w = omega_into(omega(), 10, &small()).unwrap();
    assert!((0..10).all(|x| w.apply(&n(x), &small()).unwrap() == n(x)));
    let f = omega_into(id(10).unwrap(), 10, &small()).unwrap();
    let v = check_reduction(&f, &all_pairs(9), &default_ladder(20));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.counts.confirmed_neg, 45);
    let h = ceerlab::ceers::h();
    assert!(matches!(omega_into(h, 3, &small()), Err(CeerError::Unsupported(_))));
}

#[test]
fn transversal_reduction() {
    let g = via_transversal(id(3).unwrap(), finite(&[0, 1, 2]));
    assert_eq!(g.apply(&n(7), &small()).unwrap(), n(1));
    let v = check_reduction(&g, &all_pairs(12), &default_ladder(20));
    assert_eq!(v.status(), Status::Confirmed);
    assert_eq!(v.counts.confirmed_neg + v.counts.confirmed_pos, 78);
    let r = from_pairs(lister(&[pair_u64(0, 1)]));
    let g = via_transversal(r, evens());
    assert_eq!(g.apply(&n(1), &small()).unwrap(), n(0));
    assert_eq!(check_reduction(&g, &all_pairs(6), &default_ladder(10)).status(), Status::Confirmed);
}

#[test]
fn pc_to_jump_on_evens() {
    let check = Budget::new(50, 50, 50);
    let r = from_sets(vec![evens()], &check).unwrap();
    let psi = MapFn::native(|x, _| {
        if x % 2u32 == n(0) {
            Ok(n(0))
        } else {
            Err(CeerError::budget("undefined"))
        }
    });
    let w = PcWitness { psi, target: omega() };
    let f = pc_to_jump(r, &w, &check).unwrap();
    let b = small();
    let (a, c) = (f.apply(&n(2), &b).unwrap(), f.apply(&n(4), &b).unwrap());
    assert!(f.target.confirms(&a, &c, &b));
    let images: std::collections::BTreeSet<Nat> = (0..=50).map(|x| f.apply(&n(x), &b).unwrap()).collect();
    assert_eq!(images.len(), 51);
    let v = check_reduction(&f, &all_pairs(12), &default_ladder(12));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.counts.confirmed_pos, 21);
}

#[test]
fn ndim_into_k_sets() {
    let check = Budget::new(60, 60, 30);
    let f = ndim_to_k(vec![residue(3, 0).unwrap(), residue(3, 1).unwrap()], &check).unwrap();
    let b = Budget::new(100, 20_000, 20);
    let kappa = builtin_indices().kappa.clone();
    let y = f.apply(&n(3), &b).unwrap();
    assert_eq!(eval(&kappa, &y, 20_000).into_value(), Some(n(0)));
    let y = f.apply(&n(4), &b).unwrap();
    assert_eq!(eval(&kappa, &y, 20_000).into_value(), Some(n(1)));
    let y = f.apply(&n(2), &b).unwrap();
    assert!(!eval(&kappa, &y, 20_000).is_converged());
    let ladder = [Budget::new(60, 5_000, 12), Budget::new(120, 20_000, 12)];
    let v = check_reduction(&f, &all_pairs(9), &ladder);
    assert_eq!(v.violated(), 0);
    assert_eq!(v.status(), Status::Confirmed);
}

#[test]
fn nonsimple_listing() {
    let check = Budget::new(50, 50, 50);
    let f = omega_to_nonsimple(vec![evens()], residue(2, 1).unwrap(), &check).unwrap();
    let got: Vec<Nat> = (0..4).map(|x| f.apply(&n(x), &small()).unwrap()).collect();
    assert_eq!(got, vec![n(1), n(3), n(5), n(7)]);
    let g = omega_to_nonsimple(vec![residue(3, 0).unwrap(), residue(3, 1).unwrap()], residue(3, 2).unwrap(), &check)
        .unwrap();
    let v = check_reduction(&g, &all_pairs(10), &default_ladder(40));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.counts.confirmed_neg, 55);
}

#[test]
fn majorizer_bridge_both_ways() {
    let h = MapFn::total(|x| x * 2u32 + 3u32);
    let f = reduction_from_majorizer(evens(), h);
    let b = small();
    let got: Vec<Nat> = (0..4).map(|x| f.apply(&n(x), &b).unwrap()).collect();
    assert_eq!(got, vec![n(0), n(3), n(9), n(21)]);
    let v = check_reduction(&f, &all_pairs(5), &default_ladder(30));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.counts.confirmed_neg, 15);
    // majorizer extracted from f, then f rebuilt from it
    let hb = majorizer_from_reduction(&f, &Budget::new(100, 100, 8));
    let table: Vec<Nat> = (0..6).map(|k| hb(k).unwrap()).collect();
    let table2 = table.clone();
    let h2 = MapFn::native(move |x, _| {
        let mut k = 0;
        while k < table2.len() && table2[k] <= *x {
            k += 1;
        }
        table2.get(k).cloned().ok_or_else(|| CeerError::budget("beyond table"))
    });
    let f2 = reduction_from_majorizer(evens(), h2);
    let v = check_reduction(&f2, &all_pairs(4), &default_ladder(30));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.status(), Status::Confirmed);
    let probe = ceerlab::sets::majorizer_probe(&|k| hb(k), evens().as_ref(), &Budget::new(50, 50, 5));
    assert_eq!(probe, ceerlab::sets::Probe::Confirmed);
    // h(n) = n collapses 0 and 1
    let bad = reduction_from_majorizer(evens(), MapFn::total(|x| x.clone()));
    assert!(check_reduction(&bad, &all_pairs(3), &default_ladder(10)).violated() > 0);
}

#[test]
fn bounded_listing_of_minima() {
    let r = explicit("pairs", (0..30).map(|i| (2 * i, 2 * i + 1)).collect());
    let f = omega_to_bounded(r.clone(), 2, &[]).unwrap();
    let b = small();
    let got: Vec<Nat> = (0..3).map(|x| f.apply(&n(x), &b).unwrap()).collect();
    assert_eq!(got, vec![n(0), n(2), n(4)]);
    let v = check_reduction(&f, &all_pairs(10), &default_ladder(60));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.counts.confirmed_neg, 55);
    let stall = omega_to_bounded(r, 3, &[]).unwrap();
    assert!(matches!(stall.apply(&n(0), &b), Err(CeerError::BudgetExceeded(_))));
}

#[test]
fn uniform_reductions_defeated() {
    let b = Budget::new(400, 50_000, 10);
    let double = Asm::new().unpair(1, 0, 0).add(0, 0, 0).index();
    for (rho, want) in [(builtin_indices().right_proj.clone(), (0, 1)), (double, (0, 2))] {
        let d = diagonalize_uniform(&rho, &b).unwrap();
        assert_eq!((d.left.clone(), d.right.clone()), (n(want.0), n(want.1)));
        let r = d.ceer();
        let at = Budget::new(d.stage, d.stage, 10);
        assert!(r.fragment(&at).same(&d.left, &d.right));
        assert!(r.fragment(&Budget::new(d.stage.max(200), d.stage.max(200), 30)).max_class_size() <= 2);
    }
}

fn blocks(seed: u64, k: u64, nontrivial: bool) -> ceerlab::ceers::CeerRef {
    ceerlab::ceers::periodic_blocks(ceerlab::ceers::BlockPattern::random(seed, k, 5, nontrivial))
}

#[test]
fn halving_replays_cases() {
    let r = explicit("two blocks", vec![(0, 1), (2, 3)]);
    let hv = halve_bounded(r, 2).unwrap();
    let b = small();
    let f: Vec<Nat> = (0..4).map(|x| hv.f.apply(&n(x), &b).unwrap()).collect();
    assert_eq!(f, vec![n(0), n(0), n(2), n(2)]);
    assert!(hv.s.generators(&b).is_empty());
    for seed in 0..4 {
        let r = blocks(seed, 4, true);
        let hv = halve_bounded(r, 2).unwrap();
        let b = Budget::new(400, 400, 60);
        assert!(hv.s.fragment(&b).max_class_size() <= 2);
        let v = check_reduction(&hv.f, &all_pairs(25), &default_ladder(60));
        assert_eq!(v.violated(), 0, "seed {seed}");
    }
    for seed in 0..4 {
        let r = blocks(100 + seed, 3, false);
        let hv = halve_bounded(r.clone(), 2).unwrap();
        assert!(hv.s.generators(&Budget::new(400, 400, 60)).is_empty());
        let v = check_pc_witness(&hv.witness, &r, &all_pairs(25), &default_ladder(60));
        assert_eq!(v.violated(), 0);
        assert_eq!(v.status(), Status::Confirmed);
    }
}

#[test]
fn bounded_to_jump_cases() {
    let r = explicit("two blocks", vec![(0, 1), (2, 3)]);
    let (s, w) = bounded_to_jump(r).unwrap();
    let b = small();
    let psi: Vec<Nat> = (0..4).map(|x| w.psi.apply(&n(x), &b).unwrap()).collect();
    assert_eq!(psi, vec![n(0), n(0), n(2), n(2)]);
    assert_eq!(s.generators(&b), vec![]);
    let r = explicit("one block", vec![(0, 1), (2, 3), (0, 2)]);
    let (s, w) = bounded_to_jump(r.clone()).unwrap();
    assert_eq!(s.generators(&b), vec![(n(0), n(2))]);
    let v = check_pc_witness(&w, &r, &all_pairs(6), &default_ladder(10));
    assert_eq!(v.status(), Status::Confirmed);
}

fn mod2() -> Reduction {
    Reduction::new("id2 ≤ id4", MapFn::total(|x| x % 2u32), id(2).unwrap(), id(4).unwrap())
}

#[test]
fn saturation_lifts() {
    let b = small();
    let lifted = lift_saturation(&mod2(), 1);
    let set = ceerlab::kernel::encode_set_u64;
    assert_eq!(lifted.apply(&set(&[0, 1]), &b).unwrap(), set(&[0, 1]));
    assert_eq!(lifted.apply(&set(&[3, 4, 5]), &b).unwrap(), set(&[0, 1]));
    assert_eq!(lifted.apply(&set(&[]), &b).unwrap(), set(&[]));
    let v = check_reduction(&lifted, &all_pairs(20), &default_ladder(20));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.status(), Status::Confirmed);
    let ident = Reduction::new("id", MapFn::total(|x| x.clone()), id(3).unwrap(), id(3).unwrap());
    let l = lift_saturation(&ident, 2);
    assert_eq!(l.apply(&n(77), &b).unwrap(), ceerlab::kernel::encode_set(ceerlab::kernel::decode_set(&n(77))
        .into_iter().map(|u| ceerlab::kernel::encode_set(ceerlab::kernel::decode_set(&u)))));
}

#[test]
fn omega_plus_absorbs_its_jump() {
    use ceerlab::jumps::LayeredCode;
    let f = omega_plus_absorb(id(2).unwrap());
    let b = small();
    let lc = |x: u64, i: u64| LayeredCode::new(n(x), i).encode();
    let x = ceerlab::kernel::encode_set([lc(5, 0)]);
    assert_eq!(f.apply(&x, &b).unwrap(), LayeredCode { payload: x.clone(), layer: n(1) }.encode());
    let x = ceerlab::kernel::encode_set([lc(5, 0), lc(6, 2)]);
    assert_eq!(f.apply(&x, &b).unwrap(), LayeredCode { payload: x.clone(), layer: n(3) }.encode());
    let v = check_reduction(&f, &all_pairs(30), &default_ladder(30));
    assert_eq!(v.violated(), 0);
    assert_eq!(v.status(), Status::Confirmed);
}

#[test]
fn saturation_collapse() {
    let (g1, g2) = collapse_gadgets();
    let audit = Budget::new(50, 2_000, 20);
    let f = satjump_collapse(&g1, &g2, &audit).unwrap();
    let b = Budget::new(100, 2_000, 20);
    let set = |z: Nat| ceerlab::kernel::encode_set([z]);
    // κ(x) converges for x = constant(3)
    let x = ceerlab::kernel::gadgets::constant(&n(3)).0;
    let imgs: Vec<Nat> = (0..3).map(|i| f.apply(&set(ceerlab::kernel::pair(&x, &n(i))), &b).unwrap()).collect();
    for i in 0..3 {
        for j in 0..3 {
            assert!(f.target.confirms(&imgs[i], &imgs[j], &b));
        }
    }
    let y = builtin_indices().self_loop.0.clone();
    let imgs: Vec<Nat> = (0..3).map(|i| f.apply(&set(ceerlab::kernel::pair(&y, &n(i))), &b).unwrap()).collect();
    for i in 0..3 {
        for j in 0..i {
            assert!(!f.target.confirms(&imgs[i], &imgs[j], &b));
        }
    }
    let v = check_reduction(&f, &all_pairs(15), &[b]);
    assert_eq!(v.violated(), 0);
    let c = collapse_containment();
    let v = check_reduction(&c, &all_pairs(30), &[b]);
    assert_eq!(v.violated(), 0);
    assert!(matches!(satjump_collapse(&g1, &g1, &audit), Err(CeerError::InputViolation(_))));
}

#[test]
fn jump_transfer_round_trip() {
    let build = Budget::new(50, 50, 50);
    let fwd = jump_transfer_forward(&mod2(), &build).unwrap();
    let ladder = [Budget::new(100, 1_000, 20), Budget::new(200, 5_000, 20)];
    let v = check_reduction(&fwd, &all_pairs(40), &ladder);
    assert_eq!(v.violated(), 0);
    assert!(v.counts.confirmed_pos > 0);
    let b = small();
    let imgs: std::collections::BTreeSet<Nat> = (0..=50).map(|x| fwd.apply(&n(x), &b).unwrap()).collect();
    assert_eq!(imgs.len(), 51);
    let e = id(2).unwrap();
    let ident = Reduction::new("id", MapFn::Program(builtin_indices().identity.clone()), halting_jump(e.clone(), 1),
        halting_jump(e.clone(), 1));
    let back = jump_transfer_backward(&ident, e.clone(), e, &build).unwrap();
    assert!((0..20).all(|x| back.apply(&n(x), &b).unwrap() == n(x)));
    let v = check_reduction(&back, &all_pairs(20), &default_ladder(20));
    assert_eq!(v.status(), Status::Confirmed);
    assert_eq!(v.violated(), 0);
    let emb = jump_embedding(id(2).unwrap());
    assert_eq!(check_reduction(&emb, &all_pairs(10), &default_ladder(10)).status(), Status::Confirmed);
}

#[test]
fn bounded_into_iterated_jumps() {
    let build = Budget::new(60, 200, 12);
    let ladder = [Budget::new(200, 20_000, 12)];
    for (k, depth) in [(1u64, 0u32), (3, 1), (7, 2)] {
        let r = blocks(k + 11, k, true);
        let f = bounded_to_omega_n(r, depth, &build).unwrap();
        let v = check_reduction(&f, &all_pairs(12), &ladder);
        assert_eq!(v.violated(), 0, "k = {k}");
    }
    assert!(matches!(bounded_to_omega_n(blocks(1, 4, true), 1, &build), Err(CeerError::InvalidParameter(_))));
}

#[test]
fn omega_omega_embedding() {
    let ladder = [Budget::new(60, 100_000, 12)];
    let f = to_omega_omega(omega()).unwrap();
    let imgs: std::collections::BTreeSet<Nat> = (0..10).map(|x| f.apply(&n(x), &ladder[0]).unwrap()).collect();
    assert_eq!(imgs.len(), 10);
    let v = check_reduction(&f, &all_pairs(6), &ladder);
    assert_eq!(v.violated(), 0);
    let g = to_omega_omega(from_pairs(lister(&[pair_u64(0, 1)]))).unwrap();
    let (a, b) = (g.apply(&n(0), &ladder[0]).unwrap(), g.apply(&n(1), &ladder[0]).unwrap());
    assert_ne!(a, b);
    assert!(g.target.confirms(&a, &b, &ladder[0]));
    assert!(to_omega_omega(id(3).unwrap()).is_err() || id(3).unwrap().index().is_some());
}
