use super::*;
use crate::drwbasis::make_e;
use crate::oracle::{embed, extract};
use crate::sample;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn key(a: &[(u64, u64)], parts: &[usize], p: u64) -> Key {
    Key::new(a.iter().map(|&(x, y)| Q64::new(x, y)).collect(), parts.to_vec(), p).unwrap()
}

fn e(eta: i64, a: &[(u64, u64)], parts: &[usize], ctx: RingContext) -> DrwElement {
    DrwElement::from_term(ctx, parts.len(), key(a, parts, ctx.p), BigInt::from(eta))
}

fn x1(ctx: RingContext) -> DrwElement {
    DrwElement::teich_monomial(ctx, &[1])
}

#[test]
fn differential_examples() {
    let ctx = RingContext::new(2, 1, 3).unwrap();
    assert_eq!(e(1, &[(1, 2)], &[], ctx).d(), e(1, &[(1, 2)], &[0], ctx));
    assert_eq!(e(1, &[(2, 1)], &[], ctx).d(), e(2, &[(2, 1)], &[0], ctx));
    assert!(e(1, &[(1, 2)], &[0], ctx).d().is_zero());
}

#[test]
fn verschiebung_examples() {
    let c3 = RingContext::new(3, 1, 2).unwrap();
    assert_eq!(e(1, &[(3, 1)], &[], c3).verschiebung(), e(3, &[(1, 1)], &[], c3.with_len(3)));
    let c2 = RingContext::new(2, 1, 2).unwrap();
    assert_eq!(e(1, &[(1, 1)], &[], c2).verschiebung(), e(1, &[(1, 2)], &[], c2.with_len(3)));
    assert_eq!(e(1, &[(1, 2)], &[0], c2).verschiebung(), e(2, &[(1, 4)], &[0], c2.with_len(3)));
}

#[test]
fn frobenius_examples() {
    let ctx = RingContext::new(2, 1, 3).unwrap();
    let c2 = ctx.with_len(2);
    assert_eq!(x1(ctx).frobenius().unwrap(), DrwElement::teich_monomial(c2, &[2]));
    let fdx = x1(ctx).d().frobenius().unwrap();
    assert_eq!(fdx, e(1, &[(2, 1)], &[0], c2));
    assert_eq!(fdx, x1(c2).mul(&x1(c2).d()).unwrap());
}

#[test]
fn product_examples() {
    let ctx = RingContext::new(2, 1, 3).unwrap();
    let v = e(1, &[(1, 2)], &[], ctx);
    assert_eq!(v.mul(&v).unwrap(), e(4, &[(1, 1)], &[], ctx));
    assert_eq!(v.mul(&DrwElement::one(ctx)).unwrap(), v);
}

#[test]
fn make_e_examples() {
    let ctx = RingContext::new(2, 1, 3).unwrap();
    let k = key(&[(1, 2)], &[], 2);
    assert_eq!(make_e(&BigInt::from(1), &k, ctx).unwrap(), x1(ctx.with_len(2)).verschiebung());
    let k = key(&[(1, 2)], &[0], 2);
    assert_eq!(make_e(&BigInt::from(1), &k, ctx).unwrap(), x1(ctx.with_len(2)).verschiebung().d());
    assert!(make_e(&BigInt::from(4), &k, ctx).is_err());
    assert!(make_e(&BigInt::from(0), &k, ctx).unwrap().is_zero());
}

#[test]
fn witt_round_trip() {
    let ctx = RingContext::new(2, 2, 3).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let w = sample::witt_vec(&mut rng, ctx, 3, 3);
        let x = DrwElement::from_witt(&w);
        assert_eq!(x.to_witt().unwrap(), w);
    }
    let two = WittVec::from_int(ctx.with_len(2), &BigInt::from(2));
    assert_eq!(DrwElement::from_witt(&two), DrwElement::from_int(ctx.with_len(2), &BigInt::from(2)));
}

#[test]
fn fracture_projectors() {
    let ctx = RingContext::new(2, 2, 3).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for t in 0..=2 {
        let x = sample::element(&mut rng, ctx, t, 4, 5);
        let parts = [Fracture::Integral, Fracture::PureFractional, Fracture::DFractional];
        let mut sum = DrwElement::zero(ctx, t);
        for c in parts {
            let px = x.project(c);
            assert_eq!(px.project(c), px);
            sum = sum.add(&px).unwrap();
        }
        assert_eq!(sum, x);
    }
}

fn ctx_for(seed: u64) -> (StdRng, RingContext) {
    let p = [2, 3][(seed % 2) as usize];
    let n = 1 + (seed / 2 % 2) as usize;
    let m = 1 + (seed / 4 % 3) as usize;
    (StdRng::seed_from_u64(seed), RingContext::new(p, n, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn d_squared_and_round_trip(seed in any::<u64>()) {
        let (mut rng, ctx) = ctx_for(seed);
        let t = (seed % 3) as usize;
        let t = t.min(ctx.n);
        let x = sample::element(&mut rng, ctx, t, 5, 3);
        prop_assert!(x.d().d().is_zero());
        prop_assert_eq!(extract(&embed(&x), ctx).unwrap(), x.clone());
        prop_assert_eq!(extract(&embed(&x).d(), ctx).unwrap(), x.d());
    }

    #[test]
    fn leibniz(seed in any::<u64>()) {
        let (mut rng, ctx) = ctx_for(seed);
        let s = (seed / 8 % 2) as usize;
        let x = sample::element(&mut rng, ctx, s.min(ctx.n), 4, 2);
        let y = sample::element(&mut rng, ctx, 0, 4, 2);
        let lhs = x.mul(&y).unwrap().d();
        let sign = if x.degree % 2 == 0 { 1 } else { -1 };
        let rhs = x.d().mul(&y).unwrap().add(&x.mul(&y.d()).unwrap().scale_int(&BigInt::from(sign))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn frobenius_identities(seed in any::<u64>()) {
        let (mut rng, ctx) = ctx_for(seed);
        let up = ctx.with_len(ctx.m + 1);
        let p = BigInt::from(ctx.p);
        let x = sample::element(&mut rng, up, 0, 4, 2);
        // dF = pFd
        prop_assert_eq!(x.frobenius().unwrap().d(), x.d().frobenius().unwrap().scale_int(&p));
        // FdV = d
        let y = sample::element(&mut rng, ctx, 0, 4, 2);
        prop_assert_eq!(y.verschiebung().d().frobenius().unwrap(), y.d());
        // V(x F y) = V(x) y
        let z = sample::element(&mut rng, up, 0, 4, 2);
        let lhs = y.mul(&z.frobenius().unwrap()).unwrap().verschiebung();
        prop_assert_eq!(lhs, y.verschiebung().mul(&z).unwrap());
        // F is multiplicative
        let fxz = x.mul(&z).unwrap().frobenius().unwrap();
        prop_assert_eq!(fxz, x.frobenius().unwrap().mul(&z.frobenius().unwrap()).unwrap());
    }

    #[test]
    fn teichmuller_frobenius(seed in any::<u64>()) {
        let (mut rng, ctx) = ctx_for(seed);
        let up = ctx.with_len(ctx.m + 1);
        let r = sample::poly_mod(&mut rng, ctx.n, ctx.p, 3, 2);
        let tr = DrwElement::teich(up, &r);
        prop_assert_eq!(tr.frobenius().unwrap(), DrwElement::teich(ctx, &r.pow(ctx.p)));
        let lhs = tr.d().frobenius().unwrap();
        let rhs = DrwElement::teich(ctx, &r.pow(ctx.p - 1)).mul(&DrwElement::teich(ctx, &r).d()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn graded_commutative_and_associative(seed in any::<u64>()) {
        let (mut rng, ctx) = ctx_for(seed);
        let x = sample::element(&mut rng, ctx, 1.min(ctx.n), 4, 2);
        let y = sample::element(&mut rng, ctx, (ctx.n - 1).min(1), 4, 2);
        let z = sample::element(&mut rng, ctx, 0, 4, 2);
        let sign = if x.degree * y.degree % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap().scale_int(&BigInt::from(sign)));
        prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
    }

    #[test]
    fn witt_product_matches(seed in any::<u64>()) {
        let (mut rng, ctx) = ctx_for(seed);
        let a = sample::witt_vec(&mut rng, ctx, 2, 2);
        let b = sample::witt_vec(&mut rng, ctx, 2, 2);
        let lhs = DrwElement::from_witt(&a.mul(&b).unwrap());
        prop_assert_eq!(lhs, DrwElement::from_witt(&a).mul(&DrwElement::from_witt(&b)).unwrap());
        let lhs = DrwElement::from_witt(&a.add(&b).unwrap());
        prop_assert_eq!(lhs, DrwElement::from_witt(&a).add(&DrwElement::from_witt(&b)).unwrap());
        let lhs = DrwElement::from_witt(&a.verschiebung());
        prop_assert_eq!(lhs, DrwElement::from_witt(&a).verschiebung());
    }
}
