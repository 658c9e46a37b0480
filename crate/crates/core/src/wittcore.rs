//! Truncated Witt vectors over `F_p[X_1..X_n]`, computed through ghost components.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
pub use crate::poly::{default_names, parse_poly, Exp, ModPoly, PolyFp, PolyZ};
use crate::poly::pow_u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingContext {
    pub p: u64,
    pub n: usize,
    pub m: usize,
}

impl RingContext {
    pub fn new(p: u64, n: usize, m: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::PreconditionViolated(format!("{p} is not prime")));
        }
        Ok(RingContext { p, n, m })
    }

    pub fn with_len(self, m: usize) -> Self {
        RingContext { m, ..self }
    }
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Coefficient rings that admit the truncated ghost computation: commutative algebras over `Z/q`
/// with a chosen set-theoretic lift to larger moduli.
pub trait GhostRing: Clone {
    fn modulus(&self) -> u64;
    /// Reduce to a divisor of the modulus, or lift least residues to a multiple of it.
    fn with_modulus(&self, q: u64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: u64) -> Self;
    fn div_exact(&self, d: u64) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self {
        self.scale(0)
    }
    fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc.expect("pow(0) needs a unit; callers never ask for it")
    }
}

impl GhostRing for ModPoly {
    fn modulus(&self) -> u64 {
        self.q
    }
    fn with_modulus(&self, q: u64) -> Self {
        ModPoly::with_modulus(self, q)
    }
    fn add(&self, o: &Self) -> Self {
        ModPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ModPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ModPoly::mul(self, o)
    }
    fn scale(&self, c: u64) -> Self {
        ModPoly::scale(self, c)
    }
    fn div_exact(&self, d: u64) -> Option<Self> {
        ModPoly::div_exact(self, d)
    }
    fn is_zero(&self) -> bool {
        ModPoly::is_zero(self)
    }
}

/// Ghost components `g_0..g_{len-1}` of the Witt vector with coordinates `coords` (each given mod p),
/// computed modulo `p^len` from least-residue lifts.
pub fn ghost_mod<R: GhostRing>(coords: &[R], p: u64, len: usize) -> Vec<R> {
    let q = pow_u64(p, len as u32);
    let mut pw: Vec<R> = Vec::with_capacity(len);
    let mut out = Vec::with_capacity(len);
    for u in 0..len {
        for x in pw.iter_mut() {
            *x = x.pow(p);
        }
        pw.push(coords[u].with_modulus(q));
        let mut g = pw[0].clone();
        let mut pi = 1u64;
        for x in pw.iter().skip(1) {
            pi *= p;
            g = g.add(&x.scale(pi));
        }
        out.push(g);
    }
    out
}

/// Ghost components with `g_u` only modulo `p^{u+1}`, which is all [`unghost_mod_p`] reads.
/// Powers are carried at the smallest modulus that determines them: `y = z mod p^j` implies
/// `y^p = z^p mod p^{j+1}`.
pub fn ghost_trunc<R: GhostRing>(coords: &[R], p: u64) -> Vec<R> {
    let mut pw: Vec<R> = Vec::with_capacity(coords.len());
    let mut out = Vec::with_capacity(coords.len());
    for u in 0..coords.len() {
        for (i, x) in pw.iter_mut().enumerate() {
            *x = x.with_modulus(pow_u64(p, (u - i) as u32 + 1)).pow(p);
        }
        pw.push(coords[u].with_modulus(p));
        let q = pow_u64(p, u as u32 + 1);
        let mut g = pw[0].with_modulus(q);
        let mut pi = 1u64;
        for x in pw.iter().skip(1) {
            pi *= p;
            g = g.add(&x.with_modulus(q).scale(pi));
        }
        out.push(g);
    }
    out
}

/// Inverse of [`ghost_mod`]: recover coordinates mod p from ghost components, using only
/// `g_u mod p^{u+1}`.
pub fn unghost_mod_p<R: GhostRing>(ghosts: &[R], p: u64) -> Result<Vec<R>> {
    let len = ghosts.len();
    if len == 0 {
        return Ok(vec![]);
    }
    let q = pow_u64(p, len as u32);
    let mut coords: Vec<R> = Vec::with_capacity(len);
    let mut pw: Vec<R> = Vec::with_capacity(len);
    for u in 0..len {
        for x in pw.iter_mut() {
            *x = x.pow(p);
        }
        let qu = pow_u64(p, u as u32 + 1);
        let mut acc = ghosts[u].with_modulus(qu);
        let mut pi = 1u64;
        for x in pw.iter() {
            acc = acc.sub(&x.with_modulus(qu).scale(pi));
            pi *= p;
        }
        let x = acc.div_exact(pi).ok_or(Error::NonIntegralGhost(u as u32))?;
        coords.push(x.with_modulus(p));
        pw.push(coords[u].with_modulus(q));
    }
    Ok(coords)
}

/// Exact ghost map over `Z`.
pub fn ghost(lift: &[PolyZ], p: u64) -> Vec<PolyZ> {
    let mut out = Vec::with_capacity(lift.len());
    for u in 0..lift.len() {
        let mut g = PolyZ::zero(lift[0].n);
        for (i, x) in lift.iter().enumerate().take(u + 1) {
            let pi = BigInt::from(p).pow(i as u32);
            g = g.add(&x.pow(p.pow((u - i) as u32)).scale(&pi));
        }
        out.push(g);
    }
    out
}

/// Exact inverse of [`ghost`] over `Z`.
pub fn unghost(g: &[PolyZ], p: u64) -> Result<Vec<PolyZ>> {
    let mut xs: Vec<PolyZ> = Vec::with_capacity(g.len());
    for u in 0..g.len() {
        let mut acc = g[u].clone();
        for (i, x) in xs.iter().enumerate() {
            let pi = BigInt::from(p).pow(i as u32);
            acc = acc.sub(&x.pow(p.pow((u - i) as u32)).scale(&pi));
        }
        let pu = BigInt::from(p).pow(u as u32);
        xs.push(acc.div_exact(&pu).ok_or(Error::NonIntegralGhost(u as u32))?);
    }
    Ok(xs)
}

/// Element of `W_m(F_p[X_1..X_n])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WittVec {
    pub ctx: RingContext,
    pub coords: Vec<PolyFp>,
}

impl WittVec {
    pub fn zero(ctx: RingContext) -> Self {
        WittVec { ctx, coords: vec![PolyFp::zero(ctx.n, ctx.p); ctx.m] }
    }

    pub fn from_coords(ctx: RingContext, coords: Vec<PolyFp>) -> Self {
        assert_eq!(coords.len(), ctx.m);
        WittVec { ctx, coords }
    }

    pub fn teichmuller(ctx: RingContext, poly: &PolyFp) -> Self {
        let mut w = Self::zero(ctx);
        if ctx.m > 0 {
            w.coords[0] = poly.with_modulus(ctx.p);
        }
        w
    }

    pub fn one(ctx: RingContext) -> Self {
        Self::teichmuller(ctx, &PolyFp::one(ctx.n, ctx.p))
    }

    /// The image of an integer under `Z -> W_m(F_p)`.
    pub fn from_int(ctx: RingContext, c: &BigInt) -> Self {
        if ctx.m == 0 {
            return Self::zero(ctx);
        }
        let q = pow_u64(ctx.p, ctx.m as u32);
        let cm = crate::util::mod_u64(c, q);
        let g: Vec<PolyFp> = (0..ctx.m).map(|_| PolyFp::constant(ctx.n, q, cm)).collect();
        let coords = unghost_mod_p(&g, ctx.p).expect("integers are Witt points");
        WittVec { ctx, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.ctx != o.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn ghosts(&self) -> Vec<PolyFp> {
        ghost_mod(&self.coords, self.ctx.p, self.ctx.m)
    }

    fn from_ghosts(ctx: RingContext, g: &[PolyFp]) -> Self {
        let coords = unghost_mod_p(g, ctx.p).expect("ghost image of a Witt point");
        WittVec { ctx, coords }
    }

    fn combine(&self, o: &Self, f: impl Fn(&PolyFp, &PolyFp) -> PolyFp) -> Result<Self> {
        self.check(o)?;
        if self.ctx.m == 0 {
            return Ok(self.clone());
        }
        let (ga, gb) = (ghost_trunc(&self.coords, self.ctx.p), ghost_trunc(&o.coords, o.ctx.p));
        let g: Vec<PolyFp> = ga.iter().zip(&gb).map(|(a, b)| f(a, b)).collect();
        Ok(Self::from_ghosts(self.ctx, &g))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a.sub(b))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        if self.ctx.m == 0 {
            return self.clone();
        }
        let g: Vec<PolyFp> = ghost_trunc(&self.coords, self.ctx.p).iter().map(|a| a.neg()).collect();
        Self::from_ghosts(self.ctx, &g)
    }

    pub fn scale_int(&self, c: &BigInt) -> Self {
        self.mul(&Self::from_int(self.ctx, c)).unwrap()
    }

    /// `F: W_{m+1} -> W_m`, the ghost shift.
    pub fn frobenius(&self) -> Result<Self> {
        if self.ctx.m == 0 {
            return Err(Error::LengthUnderflow);
        }
        let g = ghost_trunc(&self.coords, self.ctx.p);
        Ok(Self::from_ghosts(self.ctx.with_len(self.ctx.m - 1), &g[1..]))
    }

    /// `V: W_m -> W_{m+1}`.
    pub fn verschiebung(&self) -> Self {
        let mut coords = vec![PolyFp::zero(self.ctx.n, self.ctx.p)];
        coords.extend(self.coords.iter().cloned());
        WittVec { ctx: self.ctx.with_len(self.ctx.m + 1), coords }
    }

    pub fn truncate(&self, m: usize) -> Self {
        assert!(m <= self.ctx.m);
        WittVec { ctx: self.ctx.with_len(m), coords: self.coords[..m].to_vec() }
    }

    /// Largest `u` with `x` in `V^u W`; `None` stands for infinity.
    pub fn v_v(&self) -> Option<usize> {
        self.coords.iter().position(|c| !c.is_zero())
    }

    /// Canonical `{0..p-1}` lifts of the coordinates.
    pub fn lifts(&self) -> Vec<PolyZ> {
        self.coords.iter().map(|c| c.to_z()).collect()
    }
}

/// Value in `Z/p^m` of a Witt vector with constant coordinates.
pub fn witt_constant_value(w: &WittVec) -> BigInt {
    match w.ghosts().last() {
        None => BigInt::zero(),
        Some(g) => BigInt::from(g.coeff(&vec![0; w.ctx.n])),
    }
}

/// Over `k = F_p`, `W_{u+1}(k)/p` splits as the constant coordinate plus the reduction of `V W`,
/// which vanishes. Returns `(constant, remainder)` with the remainder reduced mod `p`.
pub fn split_mod_p(w: &WittVec) -> (u64, BigInt) {
    let val = witt_constant_value(w);
    let c = val.clone() % BigInt::from(w.ctx.p);
    let rest = (val - &c) % BigInt::from(w.ctx.p);
    (num_traits::ToPrimitive::to_u64(&c).unwrap(), rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        default_names(n)
    }

    fn pz(s: &str, n: usize) -> PolyZ {
        parse_poly(s, &names(n)).unwrap()
    }

    #[test]
    fn ghost_examples() {
        let g = ghost(&[pz("X1", 1), PolyZ::zero(1)], 2);
        assert_eq!(g, vec![pz("X1", 1), pz("X1^2", 1)]);
        let g = ghost(&[PolyZ::zero(0), PolyZ::one(0)], 2);
        assert_eq!(g[1], PolyZ::constant(0, 2));
        let g = ghost(&[pz("X1", 1), pz("X1", 1)], 2);
        assert_eq!(g[1], pz("X1^2 + 2*X1", 1));
    }

    #[test]
    fn unghost_examples() {
        let u = unghost(&[pz("X1+X2", 2), pz("X1^2+X2^2", 2)], 2).unwrap();
        assert_eq!(u[1], pz("-X1*X2", 2));
        let bad = unghost(&[PolyZ::one(0), PolyZ::zero(0)], 2);
        assert_eq!(bad, Err(Error::NonIntegralGhost(1)));
    }

    #[test]
    fn teichmuller_sum() {
        let ctx = RingContext::new(2, 2, 2).unwrap();
        let x = WittVec::teichmuller(ctx, &pz("X1", 2).reduce(2));
        let y = WittVec::teichmuller(ctx, &pz("X2", 2).reduce(2));
        let s = x.add(&y).unwrap();
        assert_eq!(s.coords, vec![pz("X1+X2", 2).reduce(2), pz("X1*X2", 2).reduce(2)]);
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy, WittVec::teichmuller(ctx, &pz("X1*X2", 2).reduce(2)));
    }

    #[test]
    fn p_times_teichmuller() {
        let ctx = RingContext::new(2, 1, 3).unwrap();
        let x = WittVec::teichmuller(ctx, &pz("X1", 1).reduce(2));
        let px = x.scale_int(&BigInt::from(2));
        assert_eq!(px.v_v(), Some(1));
        assert_eq!(px.coords[1], pz("X1^2", 1).reduce(2));
        assert_eq!(WittVec::zero(ctx).v_v(), None);
    }

    #[test]
    fn frobenius_of_teichmuller() {
        let ctx = RingContext::new(3, 1, 3).unwrap();
        let x = WittVec::teichmuller(ctx, &pz("X1+1", 1).reduce(3));
        let fx = x.frobenius().unwrap();
        assert_eq!(fx, WittVec::teichmuller(ctx.with_len(2), &pz("(X1+1)^3", 1).reduce(3)));
        assert_eq!(WittVec::zero(ctx.with_len(0)).frobenius(), Err(Error::LengthUnderflow));
    }

    #[test]
    fn integers() {
        let ctx = RingContext::new(5, 0, 3).unwrap();
        let a = WittVec::from_int(ctx, &BigInt::from(7));
        let b = WittVec::from_int(ctx, &BigInt::from(-7));
        assert!(a.add(&b).unwrap().is_zero());
        assert_eq!(a.neg(), b);
        assert_eq!(split_mod_p(&a).0, 2);
        assert_eq!(split_mod_p(&a).1, BigInt::zero());
    }
}
