use super::*;
use crate::drwalgebra::GenKind;
use crate::drwbasis::Key;
use crate::pseudoval::rat;
use crate::sample;
use crate::util::Q64;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn key(a: &[(u64, u64)], parts: &[usize], p: u64) -> Key {
    Key::new(a.iter().map(|&(x, y)| Q64::new(x, y)).collect(), parts.to_vec(), p).unwrap()
}

fn x(n: usize, i: usize, p: u64) -> PolyFp {
    PolyFp::var(n, p, i)
}

#[test]
fn artin_schreier_is_relatively_perfect() {
    let pres = EtalePresentation::artin_schreier(2);
    let rp = check_relatively_perfect(&pres).unwrap();
    assert!(rp.ok);
    assert_eq!(rp.det, PolyFp::one(1, 2));
    let u0 = rp.u0.unwrap();
    assert_eq!(u0[0][0], PolyFp::one(1, 2));
    assert!(u0[0][1].is_zero());
    assert_eq!(u0[1][0], x(1, 0, 2));
    assert_eq!(u0[1][1], PolyFp::one(1, 2));
}

#[test]
fn trivial_and_nilpotent() {
    let rp = check_relatively_perfect(&EtalePresentation::trivial(3, 2)).unwrap();
    assert_eq!(rp.u0.unwrap(), vec![vec![PolyFp::one(2, 3)]]);
    let nil = EtalePresentation::nilpotent(2);
    assert!(!check_relatively_perfect(&nil).unwrap().ok);
    assert!(matches!(compute_constants(&nil), Err(Error::NotRelativelyPerfect(_))));
}

#[test]
fn presentation_round_trip() {
    let pres = EtalePresentation::artin_schreier(2);
    let text = pres.render();
    let back = EtalePresentation::parse(&text).unwrap();
    assert_eq!(back.render(), text);
    assert!(check_relatively_perfect(&back).unwrap().ok);
}

#[test]
fn teichmuller_of_y_has_basis_coordinates_zero_one() {
    let pres = EtalePresentation::artin_schreier(2);
    let y = ExtWitt::teichmuller(&AlgElem::basis(&pres.table, 2, 1), 3);
    let r = witt_basis_decompose(&y, &pres).unwrap();
    assert!(r[0].is_zero());
    assert_eq!(r[1], WittVec::one(pres.base_ctx(3)));
}

#[test]
fn witt_basis_round_trip_and_v_divisibility() {
    let mut rng = StdRng::seed_from_u64(7);
    for p in [2u64, 3] {
        let pres = EtalePresentation::artin_schreier(p);
        for m in 1..=3 {
            for _ in 0..6 {
                let ctx = pres.base_ctx(m);
                let r: Vec<WittVec> = (0..pres.rank).map(|_| sample::witt_vec(&mut rng, ctx, 2, 2)).collect();
                let w = witt_basis_recompose(&r, &pres);
                let back = witt_basis_decompose(&w, &pres).unwrap();
                assert_eq!(back, r);
                let v = w.v_v().unwrap_or(m);
                let vr = r.iter().map(|x| x.v_v().unwrap_or(m)).min().unwrap();
                assert_eq!(v, vr);
            }
        }
    }
}

#[test]
fn constants() {
    let c = compute_constants(&EtalePresentation::artin_schreier(2)).unwrap();
    assert_eq!(c.b, vec!["1", "2", "2"]);
    assert_eq!((c.c.as_str(), c.d.as_str(), c.e.as_str()), ("0", "1", "1"));
    assert_eq!(c.delta.as_deref(), Some("1/3"));
    let t = compute_constants(&EtalePresentation::trivial(2, 1)).unwrap();
    assert_eq!((t.c.as_str(), t.d.as_str(), t.e.as_str()), ("0", "0", "0"));
    assert_eq!(t.delta, None);
}

#[test]
fn witt_basis_certificates_hold() {
    let pres = EtalePresentation::artin_schreier(2);
    let consts = compute_constants(&pres).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..4 {
        let r: Vec<WittVec> = (0..2).map(|_| sample::witt_vec(&mut rng, pres.base_ctx(2), 2, 2)).collect();
        let w = witt_basis_recompose(&r, &pres);
        for c in witt_basis_certificates(&w, &r, &consts).unwrap() {
            assert!(c.holds(), "{}", c.description);
            assert!(c.verify().unwrap());
        }
    }
}

#[test]
fn poly_examples() {
    let ctx = RingContext::new(2, 1, 2).unwrap();
    let f = FrobLift::canonical(2, 1);
    let dx = DrwElement::teich_monomial(ctx, &[1]).d();
    let r = poly_structure_decompose(&dx, &f).unwrap();
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.entries[&(GenKind::H, key(&[(1, 1)], &[0], 2))], PolyZ::one(1));

    let vx = DrwElement::from_witt(&WittVec::teichmuller(ctx, &x(1, 0, 2)).verschiebung());
    let r = poly_structure_decompose(&vx, &f).unwrap();
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.entries[&(GenKind::G, key(&[(1, 2)], &[], 2))], PolyZ::one(1));
}

#[test]
fn poly_nontrivial_lift_recomposes() {
    let ctx = RingContext::new(2, 1, 3).unwrap();
    let f = FrobLift::parse("lift p=2 X1 -> X1^2 + 2*X1", 1).unwrap();
    let tx = DrwElement::from_witt(&f.t_f(&PolyZ::var(1, 0), ctx).unwrap());
    let r = poly_structure_decompose(&tx, &f).unwrap();
    assert_eq!(r.recompose(&f).unwrap(), tx);
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.entries[&(GenKind::H, Key::constant(1))], PolyZ::var(1, 0));
}

#[test]
fn poly_random_round_trips_and_predicates() {
    let mut rng = StdRng::seed_from_u64(3);
    for p in [2u64, 3] {
        for m in 1..=3usize {
            for t in 0..=2usize {
                let ctx = RingContext::new(p, 2, m).unwrap();
                let f = FrobLift::canonical(p, 2);
                for _ in 0..3 {
                    let x = sample::element(&mut rng, ctx, t, 2 * p, 3);
                    let r = poly_structure_decompose(&x, &f).unwrap();
                    assert_eq!(r.recompose(&f).unwrap(), x);
                    assert_eq!(r.is_zero(), x.is_zero());
                    for l in 0..=m as u32 {
                        assert_eq!(r.divisible_by_p_pow(l), x.is_divisible_by_p_pow(l), "p^{l} | x");
                        assert_eq!(r.fil_criterion(l), x.truncate(l as usize).is_zero(), "Fil^{l}");
                    }
                }
            }
        }
    }
}

#[test]
fn poly_zero() {
    let ctx = RingContext::new(3, 2, 2).unwrap();
    let r = poly_structure_decompose(&DrwElement::zero(ctx, 1), &FrobLift::canonical(3, 2)).unwrap();
    assert!(r.is_zero());
}

#[test]
fn poly_certificates_hold() {
    let ctx = RingContext::new(2, 1, 2).unwrap();
    let f = FrobLift::canonical(2, 1);
    let x = DrwElement::from_witt(&WittVec::teichmuller(ctx, &x(1, 0, 2)).verschiebung());
    let r = poly_structure_decompose_certified(&x, &f, None).unwrap();
    assert!(r.eps.is_some());
    assert!(r.certificates.iter().all(|c| c.verify().unwrap()));
}

#[test]
fn etale_trivial_dx() {
    let pres = EtalePresentation::trivial(2, 1);
    let ctx = RingContext::new(2, 1, 2).unwrap();
    let dx = DrwElement::teich_monomial(ctx, &[1]).d();
    let r = etale_structure_decompose(&dx, &pres, 2, None).unwrap();
    assert_eq!(r.entries.len(), 1);
    assert_eq!(r.entries[&(GenKind::H, key(&[(1, 1), (0, 1)], &[0], 2))], PolyZ::one(2));
    assert!(etale_structure_decompose(&DrwElement::zero(ctx, 1), &pres, 2, None).unwrap().is_zero());
}

#[test]
fn etale_artin_schreier_dy() {
    let pres = EtalePresentation::artin_schreier(2);
    let setup = etale_setup(&pres).unwrap();
    let ctx = RingContext::new(2, 1, 2).unwrap();
    let dy = DrwElement::teich_monomial(ctx, &[1]).d();
    let r = etale_structure_decompose(&dy, &pres, 3, None).unwrap();
    assert_eq!(setup.push(&r).unwrap(), dy);
    assert!(r.certificates.iter().all(|c| c.verify().unwrap()));
}

#[test]
fn etale_weight_bound() {
    let pres = EtalePresentation::artin_schreier(2);
    let ctx = RingContext::new(2, 1, 2).unwrap();
    let y5 = DrwElement::teich_monomial(ctx, &[5]).d();
    assert!(matches!(etale_structure_decompose(&y5, &pres, 0, None), Err(Error::WeightBoundExceeded(0))));
}

#[test]
fn overconv_examples() {
    let pres = EtalePresentation::trivial(2, 1);
    let ctx = RingContext::new(2, 1, 2).unwrap();
    let r = overconv_witt_decompose(&WittVec::teichmuller(ctx, &x(1, 0, 2)), &pres, 2, None).unwrap();
    let h = r.h();
    assert_eq!(h.len(), 1);
    assert_eq!(h[&key(&[(0, 1), (0, 1)], &[], 2)], PolyZ::var(2, 0));

    let v = WittVec::teichmuller(ctx, &x(1, 0, 2)).verschiebung();
    let r = overconv_witt_decompose(&v, &pres, 2, None).unwrap();
    let h = r.h();
    assert_eq!(h.len(), 1);
    assert_eq!(h[&key(&[(1, 2), (0, 1)], &[], 2)], PolyZ::one(2));
    assert!(r.divisibility_pattern_holds(1));
}

#[test]
fn overconv_artin_schreier() {
    let pres = EtalePresentation::artin_schreier(2);
    let setup = etale_setup(&pres).unwrap();
    let ctx = RingContext::new(2, 1, 2).unwrap();
    for w in [WittVec::teichmuller(ctx, &x(1, 0, 2)), WittVec::teichmuller(ctx, &x(1, 0, 2)).verschiebung()] {
        let r = overconv_witt_decompose(&w, &pres, 3, None).unwrap();
        assert_eq!(setup.push(&r.decomposition).unwrap(), DrwElement::from_witt(&w));
        assert!(r.divisibility_pattern_holds(r.depth as u32));
        assert!(r.decomposition.certificates.iter().all(|c| c.verify().unwrap()));
    }
    let _ = rat(1, 4);
}
