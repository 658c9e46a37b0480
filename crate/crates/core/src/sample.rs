//! Random samples for the property suites and `wdrw check`.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::drwalgebra::DrwElement;
use crate::drwbasis::{coeff_modulus, support, Key, WeightFn};
use crate::poly::{pow_u64, PolyFp, PolyZ};
use crate::util::Q64;
use crate::wittcore::{RingContext, WittVec};

/// A random polynomial over `Z/q` with at most `terms` terms of degree at most `deg`.
pub fn poly_mod<R: Rng>(rng: &mut R, n: usize, q: u64, deg: u32, terms: usize) -> PolyFp {
    let mut f = PolyFp::zero(n, q);
    for _ in 0..rng.gen_range(0..=terms) {
        let mut e = vec![0u32; n];
        let d = rng.gen_range(0..=deg);
        for _ in 0..d {
            if n > 0 {
                e[rng.gen_range(0..n)] += 1;
            }
        }
        f.add_term(e, rng.gen_range(0..q));
    }
    f
}

pub fn poly_z<R: Rng>(rng: &mut R, n: usize, deg: u32, terms: usize, bound: i64) -> PolyZ {
    let mut f = PolyZ::zero(n);
    for _ in 0..rng.gen_range(0..=terms) {
        let mut e = vec![0u32; n];
        for _ in 0..rng.gen_range(0..=deg) {
            if n > 0 {
                e[rng.gen_range(0..n)] += 1;
            }
        }
        f.add_term(e, BigInt::from(rng.gen_range(-bound..=bound)));
    }
    f
}

pub fn witt_vec<R: Rng>(rng: &mut R, ctx: RingContext, deg: u32, terms: usize) -> WittVec {
    let coords = (0..ctx.m).map(|_| poly_mod(rng, ctx.n, ctx.p, deg, terms)).collect();
    WittVec::from_coords(ctx, coords)
}

/// A random weight function with numerators at most `num` and denominators at most `p^max_u`.
pub fn weight<R: Rng>(rng: &mut R, n: usize, p: u64, num: u64, max_u: u32) -> WeightFn {
    (0..n)
        .map(|_| {
            let x = rng.gen_range(0..=num);
            Q64::new(x, pow_u64(p, rng.gen_range(0..=max_u)))
        })
        .collect()
}

/// A random key of degree `t`, or `None` if the drawn weight has too small a support.
pub fn key<R: Rng>(rng: &mut R, n: usize, p: u64, t: usize, num: u64, max_u: u32) -> Option<Key> {
    let a = weight(rng, n, p, num, max_u);
    let sup = support(&a);
    if sup.len() < t || (sup.is_empty() && t > 0) {
        return None;
    }
    let parts: Vec<usize> = sup.choose_multiple(rng, t).copied().collect();
    Key::new(a, parts, p).ok()
}

/// A random basic Witt differential with a nonzero coefficient at level `ctx.m`.
pub fn basic<R: Rng>(rng: &mut R, ctx: RingContext, t: usize, num: u64) -> DrwElement {
    loop {
        let max_u = ctx.m.saturating_sub(1) as u32;
        let Some(k) = key(rng, ctx.n, ctx.p, t, num, max_u) else { continue };
        let q = pow_u64(ctx.p, coeff_modulus(&k, ctx.m));
        if q <= 1 {
            continue;
        }
        let x = DrwElement::from_term(ctx, t, k, BigInt::from(rng.gen_range(1..q)));
        if !x.is_zero() {
            return x;
        }
    }
}

/// A random element with up to `terms` basic differentials.
pub fn element<R: Rng>(rng: &mut R, ctx: RingContext, t: usize, num: u64, terms: usize) -> DrwElement {
    let mut x = DrwElement::zero(ctx, t);
    for _ in 0..rng.gen_range(1..=terms) {
        x = x.add(&basic(rng, ctx, t, num)).unwrap();
    }
    x
}
