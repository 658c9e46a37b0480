//! A torsion-free model of the de Rham-Witt complex: differential forms `c X^a dlog X_S` with
//! rational coefficients and exponents in `N[1/p]`. Frobenius acts by `X^a w_S -> X^{pa} w_S`,
//! Verschiebung by `X^a w_S -> p X^{a/p} w_S`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::drwalgebra::DrwElement;
use crate::drwbasis::{support, u_weight, vp_weight, Key, WeightFn};
use crate::error::{Error, Result};
use crate::util::{big_pow, q_to_big, rat_mod, sort_sign, subsets, vp_q, Q64};
use crate::wittcore::RingContext;

pub type ModelKey = (WeightFn, Vec<usize>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelForm {
    pub p: u64,
    pub n: usize,
    pub degree: usize,
    pub terms: BTreeMap<ModelKey, BigRational>,
}

fn rat(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

impl ModelForm {
    pub fn zero(p: u64, n: usize, degree: usize) -> Self {
        ModelForm { p, n, degree, terms: BTreeMap::new() }
    }

    pub fn monomial(p: u64, a: WeightFn, dlog: Vec<usize>, c: BigRational) -> Self {
        let n = a.len();
        let (s, sign) = sort_sign(&dlog);
        let mut f = Self::zero(p, n, s.len());
        if s.windows(2).all(|w| w[0] != w[1]) {
            f.add_term((a, s), if sign > 0 { c } else { -c });
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: ModelKey, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ModelForm { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.p, self.n, self.degree);
        for (k, x) in &self.terms {
            out.add_term(k.clone(), x * c);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.p, self.n, self.degree + o.degree);
        for ((a, s), c1) in &self.terms {
            for ((b, t), c2) in &o.terms {
                if s.iter().any(|i| t.contains(i)) {
                    continue;
                }
                let mut st = s.clone();
                st.extend(t.iter().copied());
                let (st, sign) = sort_sign(&st);
                let ab: WeightFn = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let c = c1 * c2;
                out.add_term((ab, st), if sign > 0 { c } else { -c });
            }
        }
        out
    }

    pub fn d(&self) -> Self {
        let mut out = Self::zero(self.p, self.n, self.degree + 1);
        for ((a, s), c) in &self.terms {
            for i in support(a) {
                if s.contains(&i) {
                    continue;
                }
                let mut st = vec![i];
                st.extend(s.iter().copied());
                let (st, sign) = sort_sign(&st);
                let v = c * q_to_big(&a[i]);
                out.add_term((a.clone(), st), if sign > 0 { v } else { -v });
            }
        }
        out
    }

    pub fn frobenius(&self) -> Self {
        let pq = Q64::from_integer(self.p);
        let mut out = Self::zero(self.p, self.n, self.degree);
        for ((a, s), c) in &self.terms {
            out.add_term((a.iter().map(|x| x * pq).collect(), s.clone()), c.clone());
        }
        out
    }

    pub fn verschiebung(&self) -> Self {
        let pq = Q64::from_integer(self.p);
        let pr = rat(self.p);
        let mut out = Self::zero(self.p, self.n, self.degree);
        for ((a, s), c) in &self.terms {
            out.add_term((a.iter().map(|x| x / pq).collect(), s.clone()), c * &pr);
        }
        out
    }
}

/// Image of the basic differential `e(1, a, I)` in the model.
pub fn embed_key(key: &Key, p: u64) -> ModelForm {
    let n = key.a.len();
    let segs = key.segments(p);
    let lead = if !segs[0].is_empty() { big_pow(p, key.u) } else { BigInt::one() };
    let mut acc: Vec<(Vec<usize>, BigRational)> = vec![(vec![], rat(lead))];
    for seg in &segs[1..] {
        let v = seg.iter().map(|&i| vp_q(&key.a[i], p).unwrap()).min().unwrap();
        let scale = if v >= 0 {
            BigRational::new(BigInt::one(), big_pow(p, v as u32))
        } else {
            rat(big_pow(p, (-v) as u32))
        };
        let mut next = vec![];
        for (s, c) in &acc {
            for &i in seg {
                let mut s2 = s.clone();
                s2.push(i);
                next.push((s2, c * &scale * q_to_big(&key.a[i])));
            }
        }
        acc = next;
    }
    let mut out = ModelForm::zero(p, n, key.degree());
    for (s, c) in acc {
        let (s2, sign) = sort_sign(&s);
        out.add_term((key.a.clone(), s2), if sign > 0 { c } else { -c });
    }
    out
}

pub fn embed(x: &DrwElement) -> ModelForm {
    let mut out = ModelForm::zero(x.ctx.p, x.ctx.n, x.degree);
    for (k, c) in &x.terms {
        out = out.add(&embed_key(k, x.ctx.p).scale(&rat(c.clone())));
    }
    out
}

/// Solve `A x = b` over the rationals for square nonsingular `A`.
pub fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularSystem)?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let t = &a[col][j] * &f;
                    a[r][j] -= t;
                }
                let t = &b[col] * &f;
                b[r] -= t;
            }
        }
    }
    Ok(b)
}

/// Express a model form at level `ctx.m` in the basis of basic differentials.
pub fn extract(f: &ModelForm, ctx: RingContext) -> Result<DrwElement> {
    let p = ctx.p;
    let t = f.degree;
    let mut out = DrwElement::zero(ctx, t);
    let mut by_exp: BTreeMap<&WeightFn, Vec<(&Vec<usize>, &BigRational)>> = BTreeMap::new();
    for ((a, s), c) in &f.terms {
        by_exp.entry(a).or_default().push((s, c));
    }
    for (a, entries) in by_exp {
        let u = u_weight(a, p);
        if u > ctx.m as u32 + 2 {
            return Err(Error::ExponentCapExceeded(ctx.m as u32 + 2));
        }
        if u as usize >= ctx.m {
            continue;
        }
        let sup = support(a);
        for (s, _) in &entries {
            if s.iter().any(|i| !sup.contains(i)) {
                return Err(Error::NonIntegralExtraction(format!("dlog outside support at {:?}", a)));
            }
        }
        if vp_weight(a, p).is_none() && t > 0 {
            return Err(Error::NonIntegralExtraction("constant with dlog".into()));
        }
        let sets = subsets(&sup, t);
        let cols: Vec<Key> = sets.iter().map(|i| Key::new(a.clone(), i.clone(), p).unwrap()).collect();
        let imgs: Vec<ModelForm> = cols.iter().map(|k| embed_key(k, p)).collect();
        let mat: Vec<Vec<BigRational>> = sets
            .iter()
            .map(|row| {
                imgs.iter()
                    .map(|img| img.terms.get(&(a.clone(), row.clone())).cloned().unwrap_or_else(BigRational::zero))
                    .collect()
            })
            .collect();
        let rhs: Vec<BigRational> = sets
            .iter()
            .map(|row| entries.iter().find(|(s, _)| *s == row).map(|(_, c)| (*c).clone()).unwrap_or_else(BigRational::zero))
            .collect();
        let sol = solve_rational(mat, rhs)?;
        let k = ctx.m as u32 - u;
        for (key, eta) in cols.into_iter().zip(sol) {
            if eta.is_zero() {
                continue;
            }
            let r = rat_mod(&eta, p, k).ok_or_else(|| {
                Error::NonIntegralExtraction(format!("coefficient {} on {}", eta, key))
            })?;
            out.add_term(key, r);
        }
    }
    Ok(out)
}

/// True when every coefficient is p-integral.
pub fn is_p_integral(f: &ModelForm) -> bool {
    f.terms.values().all(|c| crate::util::vp_rat(c, f.p).map_or(true, |v| v >= 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(a: &[(u64, u64)], parts: &[usize], p: u64) -> Key {
        Key::new(a.iter().map(|&(x, y)| Q64::new(x, y)).collect(), parts.to_vec(), p).unwrap()
    }

    #[test]
    fn embed_examples() {
        let v = embed_key(&key(&[(1, 2)], &[], 2), 2);
        assert_eq!(v.terms.values().next().unwrap(), &rat(2));
        let dv = embed_key(&key(&[(1, 2)], &[0], 2), 2);
        assert_eq!(dv.terms.iter().next().unwrap(), (&(vec![Q64::new(1, 2)], vec![0]), &rat(1)));
        assert_eq!(v.d(), dv);
    }

    #[test]
    fn model_identities() {
        let f = ModelForm::monomial(2, vec![Q64::new(3, 2), Q64::new(1, 1)], vec![1], rat(5));
        assert_eq!(f.verschiebung().frobenius(), f.scale(&rat(2)));
        assert_eq!(f.frobenius().verschiebung(), f.scale(&rat(2)));
        assert!(f.d().d().is_zero());
        assert_eq!(f.frobenius().d(), f.d().frobenius().scale(&rat(2)));
        let xd = ModelForm::monomial(2, vec![Q64::new(1, 1)], vec![0], rat(1));
        assert_eq!(xd.frobenius().terms.keys().next().unwrap().0, vec![Q64::new(2, 1)]);
    }

    #[test]
    fn extract_examples() {
        let ctx = RingContext::new(2, 1, 3).unwrap();
        let f = ModelForm::monomial(2, vec![Q64::new(1, 1)], vec![], rat(4));
        let x = extract(&f, ctx).unwrap();
        assert_eq!(x.terms.get(&key(&[(1, 1)], &[], 2)), Some(&BigInt::from(4)));
        let h = ModelForm::monomial(2, vec![Q64::new(1, 2)], vec![], rat(1));
        assert!(matches!(extract(&h, ctx), Err(Error::NonIntegralExtraction(_))));
    }
}
