//! Small arithmetic helpers shared by the modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q64 = Ratio<u64>;

pub fn mod_u64(c: &BigInt, q: u64) -> u64 {
    c.mod_floor(&BigInt::from(q)).to_u64().unwrap()
}

pub fn big_pow(p: u64, e: u32) -> BigInt {
    BigInt::from(p).pow(e)
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

pub fn vp_u64(mut x: u64, p: u64) -> Option<i32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// p-adic valuation of a nonzero element of `N[1/p]`.
pub fn vp_q(x: &Q64, p: u64) -> Option<i32> {
    let a = vp_u64(*x.numer(), p)?;
    Some(a - vp_u64(*x.denom(), p).unwrap())
}

pub fn vp_rat(x: &BigRational, p: u64) -> Option<i32> {
    let a = vp_int(x.numer(), p)? as i32;
    Some(a - vp_int(x.denom(), p).unwrap() as i32)
}

/// `x` as an element of `Z_(p)` reduced mod `p^k`; `None` if `x` is not p-integral.
pub fn rat_mod(x: &BigRational, p: u64, k: u32) -> Option<BigInt> {
    if x.is_zero() {
        return Some(BigInt::zero());
    }
    if vp_rat(x, p)? < 0 {
        return None;
    }
    let q = big_pow(p, k);
    let den = x.denom().mod_floor(&q);
    let inv = modinv(&den, &q)?;
    Some((x.numer() * inv).mod_floor(&q))
}

pub fn modinv(a: &BigInt, q: &BigInt) -> Option<BigInt> {
    if q.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(q);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(q))
}

pub fn modinv_u64(a: u64, q: u64) -> Option<u64> {
    modinv(&BigInt::from(a), &BigInt::from(q)).map(|x| x.to_u64().unwrap())
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn q_to_big(x: &Q64) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn big_to_q(x: &BigRational) -> Option<Q64> {
    if x.is_negative() {
        return None;
    }
    Some(Q64::new(x.numer().to_u64()?, x.denom().to_u64()?))
}

/// All subsets of `items` of size `k`, in lexicographic order of positions.
pub fn subsets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn rec<T: Clone>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i].clone());
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Exponent vectors in `N^n` of total degree exactly `d`.
pub fn exps_of_degree(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = vec![];
    for first in (0..=d).rev() {
        for mut rest in exps_of_degree(n - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exponent vectors bounded componentwise by `bound` (inclusive).
pub fn exps_below(bound: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &b in bound {
        let mut next = vec![];
        for e in &out {
            for x in 0..=b {
                let mut e2 = e.clone();
                e2.push(x);
                next.push(e2);
            }
        }
        out = next;
    }
    out
}

/// Sign of the permutation sorting `v` (which must have distinct entries).
pub fn sort_sign<T: Ord + Clone>(v: &[T]) -> (Vec<T>, i32) {
    let mut w = v.to_vec();
    let mut sign = 1;
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (w, sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(vp_q(&Q64::new(3, 4), 2), Some(-2));
        assert_eq!(vp_q(&Q64::new(12, 1), 2), Some(2));
        assert_eq!(vp_int(&BigInt::from(-18), 3), Some(2));
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(rat_mod(&r, 2, 3), Some(BigInt::from(3)));
        assert_eq!(rat_mod(&BigRational::new(1.into(), 2.into()), 2, 3), None);
    }

    #[test]
    fn combinatorics() {
        assert_eq!(subsets(&[1, 2, 3, 4], 2).len(), 6);
        assert_eq!(exps_of_degree(2, 3).len(), 4);
        assert_eq!(sort_sign(&[3, 1, 2]), (vec![1, 2, 3], 1));
        assert_eq!(sort_sign(&[2, 1]), (vec![1, 2], -1));
        assert_eq!(binomial(5, 2), 10);
    }
}
