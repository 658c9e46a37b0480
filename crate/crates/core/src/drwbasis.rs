//! Weight functions, partitions, basic Witt differential keys and the generator families.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::drwalgebra::DrwElement;
use crate::error::{Error, Result};
use crate::util::{subsets, vp_q, Q64};
use crate::wittcore::RingContext;

/// A weight function `a: [1,n] -> N[1/p]`.
pub type WeightFn = Vec<Q64>;

pub fn weight_sum(a: &[Q64]) -> Q64 {
    a.iter().fold(Q64::zero(), |s, x| s + x)
}

pub fn support(a: &[Q64]) -> Vec<usize> {
    (0..a.len()).filter(|&i| !a[i].is_zero()).collect()
}

/// `v_p(a)`, the minimum over the support; `None` for the zero weight.
pub fn vp_weight(a: &[Q64], p: u64) -> Option<i32> {
    a.iter().filter_map(|x| vp_q(x, p)).min()
}

/// `u(a) = max(0, -v_p(a))`.
pub fn u_weight(a: &[Q64], p: u64) -> u32 {
    vp_weight(a, p).map_or(0, |v| (-v).max(0) as u32)
}

pub fn is_integral(a: &[Q64]) -> bool {
    a.iter().all(|x| x.is_integer())
}

fn cmp_in_support(a: &[Q64], p: u64, i: usize, j: usize) -> Ordering {
    let (vi, vj) = (vp_q(&a[i], p).unwrap(), vp_q(&a[j], p).unwrap());
    vi.cmp(&vj).then(i.cmp(&j))
}

/// The total order on `Supp(a)`: by valuation, ties broken by index.
pub fn order_less(a: &[Q64], p: u64, i: usize, j: usize) -> Result<bool> {
    for &k in &[i, j] {
        if k >= a.len() || a[k].is_zero() {
            return Err(Error::IndexOutsideSupport(k));
        }
    }
    Ok(cmp_in_support(a, p, i, j) != Ordering::Greater)
}

/// The support listed increasingly for the order.
pub fn sorted_support(a: &[Q64], p: u64) -> Vec<usize> {
    let mut s = support(a);
    s.sort_by(|&i, &j| cmp_in_support(a, p, i, j));
    s
}

pub fn min_index(a: &[Q64], p: u64) -> Option<usize> {
    sorted_support(a, p).first().copied()
}

/// Index of a basic Witt differential `e(., a, I)`. The derived order is the stream order
/// `(u, |a|, a, I)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub u: u32,
    pub wt: Q64,
    pub a: WeightFn,
    pub parts: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fracture {
    Integral,
    PureFractional,
    DFractional,
}

impl Key {
    pub fn new(a: WeightFn, parts: Vec<usize>, p: u64) -> Result<Key> {
        for &i in &parts {
            if i >= a.len() || a[i].is_zero() {
                return Err(Error::IndexOutsideSupport(i));
            }
        }
        let mut parts = parts;
        parts.sort_by(|&i, &j| cmp_in_support(&a, p, i, j));
        parts.dedup();
        Ok(Key { u: u_weight(&a, p), wt: weight_sum(&a), a, parts })
    }

    pub fn constant(n: usize) -> Key {
        Key { u: 0, wt: Q64::zero(), a: vec![Q64::zero(); n], parts: vec![] }
    }

    pub fn degree(&self) -> usize {
        self.parts.len()
    }

    pub fn vp(&self, p: u64) -> Option<i32> {
        vp_weight(&self.a, p)
    }

    /// Segments `I_0, ..., I_{#I}`.
    pub fn segments(&self, p: u64) -> Vec<Vec<usize>> {
        let sup = sorted_support(&self.a, p);
        let mut segs = vec![vec![]];
        for i in sup {
            if self.parts.contains(&i) {
                segs.push(vec![]);
            }
            segs.last_mut().unwrap().push(i);
        }
        segs
    }

    pub fn i0_nonempty(&self, p: u64) -> bool {
        match min_index(&self.a, p) {
            None => false,
            Some(i) => !self.parts.contains(&i),
        }
    }

    pub fn fracture(&self, p: u64) -> Fracture {
        if self.u == 0 {
            Fracture::Integral
        } else if self.i0_nonempty(p) {
            Fracture::PureFractional
        } else {
            Fracture::DFractional
        }
    }

    pub fn render(&self, eta: &BigInt) -> String {
        let a: Vec<String> = self.a.iter().map(render_q).collect();
        let parts: Vec<String> = self.parts.iter().map(|i| (i + 1).to_string()).collect();
        format!("e({}; {}; {{{}}})", eta, a.join(","), parts.join(","))
    }
}

pub fn render_q(x: &Q64) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&BigInt::from(1)))
    }
}

/// `max(m - u(a), 0)`: the exponent of the coefficient modulus at level `m`.
pub fn coeff_modulus(key: &Key, m: usize) -> u32 {
    (m as i64 - key.u as i64).max(0) as u32
}

/// The single-term element `e(eta, a, I)` at level `ctx.m`.
pub fn make_e(eta: &BigInt, key: &Key, ctx: RingContext) -> Result<DrwElement> {
    let k = coeff_modulus(key, ctx.m);
    let q = crate::util::big_pow(ctx.p, k);
    if eta < &BigInt::zero() || eta >= &q {
        return Err(Error::CoefficientOutOfRange(k));
    }
    Ok(DrwElement::from_term(ctx, key.degree(), key.clone(), eta.clone()))
}

/// `H(t)`: the products of `t` distinct `d[X_i]`.
pub fn enumerate_h(t: usize, n: usize, p: u64) -> Vec<Key> {
    let idx: Vec<usize> = (0..n).collect();
    let mut out: Vec<Key> = subsets(&idx, t)
        .into_iter()
        .map(|set| {
            let mut a = vec![Q64::zero(); n];
            for &i in &set {
                a[i] = Q64::from_integer(1);
            }
            Key::new(a, set, p).unwrap()
        })
        .collect();
    out.sort();
    out
}

/// `G(t, u)` over a perfect base: keys of `e(1, (a + p^u chi_J)/p^u, I u J)` with
/// `|a| <= max_weight`.
pub fn enumerate_g_level(t: usize, n: usize, p: u64, u: u32, max_weight: u64) -> Vec<Key> {
    let pu = p.pow(u);
    let mut out = vec![];
    let bound: Vec<u32> = vec![(pu - 1).min(max_weight) as u32; n];
    for a in crate::util::exps_below(&bound) {
        let wsum: u64 = a.iter().map(|&x| x as u64).sum();
        if wsum == 0 || wsum > max_weight || a.iter().all(|&x| x as u64 % p == 0) {
            continue;
        }
        let aq: WeightFn = a.iter().map(|&x| Q64::from_integer(x as u64)).collect();
        let sup = sorted_support(&aq, p);
        let rest: Vec<usize> = (0..n).filter(|i| a[*i] == 0).collect();
        let candidates: Vec<usize> = sup[1..].to_vec();
        for ni in 0..=t.min(candidates.len()) {
            let nj = t - ni;
            if nj > rest.len() {
                continue;
            }
            for iset in subsets(&candidates, ni) {
                for jset in subsets(&rest, nj) {
                    let mut w = aq.clone();
                    for &j in &jset {
                        w[j] = Q64::from_integer(pu);
                    }
                    let w: WeightFn = w.into_iter().map(|x| x / Q64::from_integer(pu)).collect();
                    let mut parts = iset.clone();
                    parts.extend(jset.iter().copied());
                    out.push(Key::new(w, parts, p).unwrap());
                }
            }
        }
    }
    out.sort();
    out
}

/// `G(t)` restricted to `1 <= u <= max_u` and `|a| <= max_weight`. Empty for `t = -1`.
pub fn enumerate_g(t: i64, n: usize, p: u64, max_u: u32, max_weight: u64) -> Vec<Key> {
    if t < 0 {
        return vec![];
    }
    let mut out: Vec<Key> = (1..=max_u).flat_map(|u| enumerate_g_level(t as usize, n, p, u, max_weight)).collect();
    out.sort();
    out
}

/// Index data `B(u, m)` of a rebar cage, given by exponents of the cage labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RebarCage {
    /// A perfect base: `B(u, 0) = {1}` and `B(u, m) = {}` for `m > 0`.
    Perfect,
    /// `k = F_p[T, 1/T]`: labels are the powers `T^i`.
    Laurent,
}

impl RebarCage {
    pub fn index_set(&self, p: u64, u: u32, m: u32) -> Vec<u64> {
        match self {
            RebarCage::Perfect => {
                if m == 0 {
                    vec![0]
                } else {
                    vec![]
                }
            }
            RebarCage::Laurent => {
                if m == 0 {
                    (0..p.pow(u)).collect()
                } else {
                    (0..p.pow(u + m)).filter(|i| i % p.pow(m) != 0).collect()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[(u64, u64)]) -> WeightFn {
        v.iter().map(|&(a, b)| Q64::new(a, b)).collect()
    }

    #[test]
    fn order_examples() {
        assert!(order_less(&w(&[(1, 1), (2, 1)]), 2, 0, 1).unwrap());
        assert!(order_less(&w(&[(2, 1), (1, 1)]), 2, 1, 0).unwrap());
        assert!(order_less(&w(&[(3, 1), (5, 1)]), 2, 0, 1).unwrap());
        assert_eq!(order_less(&w(&[(0, 1), (5, 1)]), 2, 0, 1), Err(Error::IndexOutsideSupport(0)));
    }

    #[test]
    fn segment_examples() {
        let k = Key::new(w(&[(1, 1), (1, 1)]), vec![1], 2).unwrap();
        assert_eq!(k.segments(2), vec![vec![0], vec![1]]);
        let k = Key::new(w(&[(1, 2)]), vec![0], 2).unwrap();
        assert_eq!(k.segments(2), vec![vec![], vec![0]]);
        let k = Key::new(w(&[(1, 1), (2, 1), (4, 1)]), vec![0], 2).unwrap();
        assert_eq!(k.segments(2), vec![vec![], vec![0, 1, 2]]);
    }

    #[test]
    fn modulus() {
        let k = Key::new(w(&[(1, 4)]), vec![], 2).unwrap();
        assert_eq!(coeff_modulus(&k, 3), 1);
        assert_eq!(coeff_modulus(&Key::new(w(&[(1, 16)]), vec![], 2).unwrap(), 3), 0);
        assert_eq!(coeff_modulus(&Key::constant(1), 3), 3);
    }

    #[test]
    fn generator_families() {
        assert_eq!(enumerate_h(1, 2, 2).len(), 2);
        assert_eq!(enumerate_h(2, 3, 2).len(), 3);
        let g = enumerate_g(0, 1, 2, 1, 1);
        assert_eq!(g, vec![Key::new(w(&[(1, 2)]), vec![], 2).unwrap()]);
        assert!(enumerate_g(-1, 2, 2, 2, 4).is_empty());
        for k in enumerate_g(1, 2, 3, 2, 6) {
            assert_eq!(k.degree(), 1);
            assert!(k.u >= 1);
        }
    }

    #[test]
    fn cages() {
        assert_eq!(RebarCage::Perfect.index_set(2, 3, 0), vec![0]);
        assert!(RebarCage::Perfect.index_set(2, 3, 1).is_empty());
        assert_eq!(RebarCage::Laurent.index_set(2, 1, 0), vec![0, 1]);
        assert_eq!(RebarCage::Laurent.index_set(2, 1, 1), vec![1, 3]);
    }
}
