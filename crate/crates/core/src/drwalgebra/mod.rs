//! Elements of `W_m Omega^t` of a polynomial algebra over `F_p`, in the normal form given by the
//! basic Witt differentials, with `d`, `F`, `V` and the product.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::drwbasis::{coeff_modulus, render_q, vp_weight, Fracture, Key};
use crate::error::{Error, Result};
use crate::oracle::{embed, extract};
use crate::poly::pow_u64;
use crate::util::{big_pow, vp_int, Q64};
use crate::wittcore::{unghost_mod_p, PolyFp, RingContext, WittVec};

mod rewrite;
pub use rewrite::*;

/// Finite sum of basic Witt differentials of a fixed degree at level `ctx.m`, with least-residue
/// coefficients modulo `p^{m-u(a)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DrwElement {
    pub ctx: RingContext,
    pub degree: usize,
    pub terms: BTreeMap<Key, BigInt>,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct JsonTerm {
    pub eta: String,
    pub weights: Vec<String>,
    pub parts: Vec<usize>,
    pub coeff: u32,
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct JsonElement {
    pub degree: usize,
    pub level: usize,
    pub terms: Vec<JsonTerm>,
}

impl DrwElement {
    pub fn zero(ctx: RingContext, degree: usize) -> Self {
        DrwElement { ctx, degree, terms: BTreeMap::new() }
    }

    pub fn from_term(ctx: RingContext, degree: usize, key: Key, eta: BigInt) -> Self {
        let mut x = Self::zero(ctx, degree);
        x.add_term(key, eta);
        x
    }

    pub fn one(ctx: RingContext) -> Self {
        Self::from_term(ctx, 0, Key::constant(ctx.n), BigInt::from(1))
    }

    pub fn from_int(ctx: RingContext, c: &BigInt) -> Self {
        Self::from_term(ctx, 0, Key::constant(ctx.n), c.clone())
    }

    pub fn level(&self) -> usize {
        self.ctx.m
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn modulus(&self, key: &Key) -> BigInt {
        big_pow(self.ctx.p, coeff_modulus(key, self.ctx.m))
    }

    pub fn add_term(&mut self, key: Key, c: BigInt) {
        debug_assert_eq!(key.degree(), self.degree);
        let q = self.modulus(&key);
        let slot = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *slot = (&*slot + c).mod_floor(&q);
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn same(&self, o: &Self) -> Result<()> {
        if self.ctx != o.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.degree != o.degree {
            return Err(Error::DegreeMismatch(format!("{} vs {}", self.degree, o.degree)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same(o)?;
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale_int(&BigInt::from(-1))
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(self.ctx, self.degree);
        for (k, x) in &self.terms {
            out.add_term(k.clone(), x * c);
        }
        out
    }

    /// Reduce to level `m <= self.level()`.
    pub fn truncate(&self, m: usize) -> Self {
        assert!(m <= self.ctx.m);
        let mut out = Self::zero(self.ctx.with_len(m), self.degree);
        for (k, c) in &self.terms {
            if (k.u as usize) < m {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }

    /// Reinterpret the least-residue representatives at a higher level.
    pub fn lift_reps(&self, m: usize) -> Self {
        assert!(m >= self.ctx.m);
        let mut out = Self::zero(self.ctx.with_len(m), self.degree);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    /// Exact division by `p`, from level `L` to level `L - 1`. Fails unless every coefficient is
    /// a multiple of `p`.
    pub fn div_p(&self) -> Result<Self> {
        if self.ctx.m == 0 {
            return Err(Error::LengthUnderflow);
        }
        let p = BigInt::from(self.ctx.p);
        let mut out = Self::zero(self.ctx.with_len(self.ctx.m - 1), self.degree);
        for (k, c) in &self.terms {
            let (qt, r) = c.div_rem(&p);
            if !r.is_zero() {
                return Err(Error::NonIntegralResult(format!("{} not divisible by p", k.render(c))));
            }
            out.add_term(k.clone(), qt);
        }
        Ok(out)
    }

    pub fn is_divisible_by_p_pow(&self, l: u32) -> bool {
        self.terms.values().all(|c| vp_int(c, self.ctx.p).map_or(true, |v| v >= l))
    }

    /// `d`, term by term: zero when `I_0` is empty, otherwise `p^{max(v_p(a),0)} e(eta, a, I u {min a})`.
    pub fn d(&self) -> Self {
        let p = self.ctx.p;
        let mut out = Self::zero(self.ctx, self.degree + 1);
        for (k, c) in &self.terms {
            if !k.i0_nonempty(p) {
                continue;
            }
            let mn = crate::drwbasis::min_index(&k.a, p).unwrap();
            let mut parts = k.parts.clone();
            parts.push(mn);
            let nk = Key::new(k.a.clone(), parts, p).unwrap();
            let v = vp_weight(&k.a, p).unwrap();
            let f = if v > 0 { big_pow(p, v as u32) } else { BigInt::from(1) };
            out.add_term(nk, c * f);
        }
        out
    }

    /// `V: W_m -> W_{m+1}`, term by term.
    pub fn verschiebung(&self) -> Self {
        let p = self.ctx.p;
        let pq = Q64::from_integer(p);
        let mut out = Self::zero(self.ctx.with_len(self.ctx.m + 1), self.degree);
        for (k, c) in &self.terms {
            let a: Vec<Q64> = k.a.iter().map(|x| x / pq).collect();
            let nk = Key::new(a, k.parts.clone(), p).unwrap();
            let scale = match vp_weight(&k.a, p) {
                None => true,
                Some(v) if v > 0 => true,
                Some(_) => !k.i0_nonempty(p),
            };
            out.add_term(nk, if scale { c * BigInt::from(p) } else { c.clone() });
        }
        out
    }

    /// `F: W_{m+1} -> W_m`, through the model.
    pub fn frobenius(&self) -> Result<Self> {
        if self.ctx.m == 0 {
            return Err(Error::LengthUnderflow);
        }
        let f = embed(self).frobenius();
        extract(&f, self.ctx.with_len(self.ctx.m - 1))
            .map_err(|e| Error::NonIntegralResult(format!("frobenius: {e}")))
    }

    /// Product at level `min` of the two levels.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.ctx.p != o.ctx.p || self.ctx.n != o.ctx.n {
            return Err(Error::ContextMismatch);
        }
        let m = self.ctx.m.min(o.ctx.m);
        let ctx = self.ctx.with_len(m);
        let (a, b) = (self.truncate(m), o.truncate(m));
        if a.is_zero() || b.is_zero() {
            return Ok(Self::zero(ctx, self.degree + o.degree));
        }
        let f = embed(&a).mul(&embed(&b));
        let mut out = extract(&f, ctx).map_err(|e| Error::NonIntegralResult(format!("product: {e}")))?;
        out.degree = self.degree + o.degree;
        Ok(out)
    }

    /// Degree-0 element attached to a Witt vector.
    pub fn from_witt(w: &WittVec) -> Self {
        let ctx = w.ctx;
        let p = ctx.p;
        let mut out = Self::zero(ctx, 0);
        if ctx.m == 0 {
            return out;
        }
        let g = w.ghosts();
        let top = &g[ctx.m - 1];
        let den = Q64::from_integer(pow_u64(p, ctx.m as u32 - 1));
        for (e, c) in &top.terms {
            let a: Vec<Q64> = e.iter().map(|&x| Q64::from_integer(x as u64) / den).collect();
            let key = Key::new(a, vec![], p).unwrap();
            let pu = pow_u64(p, key.u);
            if key.u as usize >= ctx.m {
                continue;
            }
            debug_assert_eq!(c % pu, 0);
            out.add_term(key, BigInt::from(c / pu));
        }
        out
    }

    /// Inverse of [`DrwElement::from_witt`] in degree 0.
    pub fn to_witt(&self) -> Result<WittVec> {
        if self.degree != 0 {
            return Err(Error::DegreeMismatch("to_witt needs degree 0".into()));
        }
        let ctx = self.ctx;
        let p = ctx.p;
        let q = pow_u64(p, ctx.m as u32);
        let f = embed(self);
        let mut ghosts = vec![];
        for u in 0..ctx.m {
            let pu = Q64::from_integer(pow_u64(p, u as u32));
            let mut g = PolyFp::zero(ctx.n, q);
            for ((a, _), c) in &f.terms {
                let b: Vec<Q64> = a.iter().map(|x| x * pu).collect();
                if !b.iter().all(|x| x.is_integer()) {
                    continue;
                }
                let c = c.to_integer();
                let e: Vec<u32> = b.iter().map(|x| x.to_integer() as u32).collect();
                g.add_term(e, crate::util::mod_u64(&c, q));
            }
            ghosts.push(g);
        }
        let coords = unghost_mod_p(&ghosts, p)?;
        Ok(WittVec::from_coords(ctx, coords))
    }

    pub fn teich(ctx: RingContext, poly: &PolyFp) -> Self {
        Self::from_witt(&WittVec::teichmuller(ctx, poly))
    }

    /// `[X^e]` for an integral exponent.
    pub fn teich_monomial(ctx: RingContext, e: &[u32]) -> Self {
        let a: Vec<Q64> = e.iter().map(|&x| Q64::from_integer(x as u64)).collect();
        Self::from_term(ctx, 0, Key::new(a, vec![], ctx.p).unwrap(), BigInt::from(1))
    }

    pub fn project(&self, class: Fracture) -> Self {
        let mut out = Self::zero(self.ctx, self.degree);
        for (k, c) in &self.terms {
            if k.fracture(self.ctx.p) == class {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }

    pub fn render_lines(&self) -> Vec<String> {
        let p = self.ctx.p;
        self.terms
            .iter()
            .map(|(k, c)| format!("{} : {}", k.render(c), vp_int(c, p).unwrap()))
            .collect()
    }

    pub fn to_json(&self) -> JsonElement {
        let p = self.ctx.p;
        JsonElement {
            degree: self.degree,
            level: self.ctx.m,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| JsonTerm {
                    eta: c.to_string(),
                    weights: k.a.iter().map(render_q).collect(),
                    parts: k.parts.iter().map(|i| i + 1).collect(),
                    coeff: vp_int(c, p).unwrap(),
                })
                .collect(),
        }
    }

    /// Coefficient as a rational number (for the model).
    pub fn coeff_rat(&self, k: &Key) -> BigRational {
        BigRational::from_integer(self.terms.get(k).cloned().unwrap_or_default())
    }

    pub fn max_weight(&self) -> u64 {
        self.terms.keys().map(|k| k.wt.ceil().to_integer()).max().unwrap_or(0).to_u64().unwrap()
    }
}

#[cfg(test)]
mod tests;
