//! Sparse multivariate polynomials: over `Z/q` with machine-word moduli, and over `Z`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Exp = Vec<u32>;

fn add_exp(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_u64(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("modulus overflows u64")
}

/// Polynomial with coefficients in `Z/q`, stored as least residues.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModPoly {
    pub n: usize,
    pub q: u64,
    pub terms: BTreeMap<Exp, u64>,
}

/// Elements of `F_p[X]` are `ModPoly` values with `q = p`.
pub type PolyFp = ModPoly;

impl ModPoly {
    pub fn zero(n: usize, q: u64) -> Self {
        ModPoly { n, q, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, q: u64, c: u64) -> Self {
        Self::monomial(n, q, c, vec![0; n])
    }

    pub fn one(n: usize, q: u64) -> Self {
        Self::constant(n, q, 1)
    }

    pub fn monomial(n: usize, q: u64, c: u64, exp: Exp) -> Self {
        assert_eq!(exp.len(), n);
        let mut terms = BTreeMap::new();
        let c = c % q;
        if c != 0 {
            terms.insert(exp, c);
        }
        ModPoly { n, q, terms }
    }

    pub fn var(n: usize, q: u64, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, q, 1, e)
    }

    pub fn from_terms(n: usize, q: u64, it: impl IntoIterator<Item = (Exp, u64)>) -> Self {
        let mut out = Self::zero(n, q);
        for (e, c) in it {
            out.add_term(e, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exp, c: u64) {
        let c = c % self.q;
        if c == 0 {
            return;
        }
        let q = self.q;
        let slot = self.terms.entry(e.clone()).or_insert(0);
        *slot = (*slot + c) % q;
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.q, o.q);
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let q = self.q;
        ModPoly {
            n: self.n,
            q,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), q - c)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: u64) -> Self {
        let c = c % self.q;
        let q = self.q;
        let terms = self
            .terms
            .iter()
            .filter_map(|(e, x)| {
                let v = mulmod(*x, c, q);
                (v != 0).then(|| (e.clone(), v))
            })
            .collect();
        ModPoly { n: self.n, q, terms }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.q, o.q);
        let q = self.q;
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.n, q);
        }
        let mut acc: HashMap<Exp, u128> = HashMap::with_capacity((self.terms.len() * o.terms.len()).min(1 << 16));
        let qq = q as u128;
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let v = acc.entry(add_exp(e1, e2)).or_insert(0);
                *v = (*v + (*c1 as u128) * (*c2 as u128)) % qq;
            }
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(e, c)| (e, c as u64))
            .collect();
        ModPoly { n: self.n, q, terms }
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.n, self.q);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Reduce into `Z/q2` (q2 must divide q) or lift least residues into `Z/q2` (q must divide q2).
    pub fn with_modulus(&self, q2: u64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(e, c)| {
                let v = c % q2;
                (v != 0).then(|| (e.clone(), v))
            })
            .collect();
        ModPoly { n: self.n, q: q2, terms }
    }

    /// Exact division by `d`, landing in `Z/(q/d)`. Fails unless every coefficient is a multiple of `d`.
    pub fn div_exact(&self, d: u64) -> Option<Self> {
        let q2 = self.q / d;
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if c % d != 0 {
                return None;
            }
            let v = (c / d) % q2;
            if v != 0 {
                terms.insert(e.clone(), v);
            }
        }
        Some(ModPoly { n: self.n, q: q2, terms })
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn coeff(&self, e: &[u32]) -> u64 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    /// Multiply every exponent by `k`.
    pub fn stretch(&self, k: u32) -> Self {
        ModPoly {
            n: self.n,
            q: self.q,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().map(|x| x * k).collect(), *c))
                .collect(),
        }
    }

    /// Substitute `X_i -> images[i]` (all images share the target ring and modulus).
    pub fn substitute(&self, images: &[ModPoly]) -> ModPoly {
        assert_eq!(images.len(), self.n);
        let (n2, q) = (images.first().map(|x| x.n).unwrap_or(0), self.q);
        let mut out = ModPoly::zero(n2, q);
        let mut cache: HashMap<(usize, u32), ModPoly> = HashMap::new();
        for (e, c) in &self.terms {
            let mut t = ModPoly::constant(n2, q, *c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let pw = cache
                        .entry((i, k))
                        .or_insert_with(|| images[i].with_modulus(q).pow(k as u64))
                        .clone();
                    t = t.mul(&pw);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn to_z(&self) -> PolyZ {
        PolyZ {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), BigInt::from(*c))).collect(),
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        render_terms(self.terms.iter().map(|(e, c)| (e, BigInt::from(*c))), names)
    }
}

/// Polynomial with arbitrary-precision integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolyZ {
    pub n: usize,
    pub terms: BTreeMap<Exp, BigInt>,
}

impl PolyZ {
    pub fn zero(n: usize) -> Self {
        PolyZ { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: impl Into<BigInt>) -> Self {
        Self::monomial(n, c, vec![0; n])
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, 1)
    }

    pub fn monomial(n: usize, c: impl Into<BigInt>, exp: Exp) -> Self {
        assert_eq!(exp.len(), n);
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        PolyZ { n, terms }
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(n, 1, e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Exp, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        PolyZ { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        PolyZ { n: self.n, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc: HashMap<Exp, BigInt> = HashMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                *acc.entry(add_exp(e1, e2)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        PolyZ { n: self.n, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.n);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn div_exact(&self, d: &BigInt) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let (qt, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            terms.insert(e.clone(), qt);
        }
        Some(PolyZ { n: self.n, terms })
    }

    /// Least nonnegative residues modulo `q`.
    pub fn reduce(&self, q: u64) -> ModPoly {
        let qb = BigInt::from(q);
        let mut out = ModPoly::zero(self.n, q);
        for (e, c) in &self.terms {
            let r = c.mod_floor(&qb).to_u64().unwrap();
            out.add_term(e.clone(), r);
        }
        out
    }

    pub fn substitute(&self, images: &[PolyZ]) -> PolyZ {
        assert_eq!(images.len(), self.n);
        let n2 = images.first().map(|x| x.n).unwrap_or(0);
        let mut out = PolyZ::zero(n2);
        let mut cache: HashMap<(usize, u32), PolyZ> = HashMap::new();
        for (e, c) in &self.terms {
            let mut t = PolyZ::constant(n2, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    let pw = cache.entry((i, k)).or_insert_with(|| images[i].pow(k as u64)).clone();
                    t = t.mul(&pw);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn render(&self, names: &[String]) -> String {
        render_terms(self.terms.iter().map(|(e, c)| (e, c.clone())), names)
    }
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

fn render_terms<'a>(it: impl Iterator<Item = (&'a Exp, BigInt)>, names: &[String]) -> String {
    let mut items: Vec<(&Exp, BigInt)> = it.collect();
    if items.is_empty() {
        return "0".into();
    }
    // Highest total degree first, then reverse-lex on exponents.
    items.sort_by(|a, b| {
        let da: u32 = a.0.iter().sum();
        let db: u32 = b.0.iter().sum();
        db.cmp(&da).then(b.0.cmp(a.0))
    });
    let mut s = String::new();
    for (k, (e, c)) in items.into_iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if k == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mono: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(i, &x)| if x == 1 { names[i].clone() } else { format!("{}^{}", names[i], x) })
            .collect();
        if mono.is_empty() {
            let _ = write!(s, "{mag}");
        } else if mag.is_one() {
            s.push_str(&mono.join("*"));
        } else {
            let _ = write!(s, "{}*{}", mag, mono.join("*"));
        }
    }
    s
}

/// Parse an integer polynomial such as `X1^2 + 2*X1*X2 - (X2 + 1)^3`.
pub fn parse_poly(src: &str, names: &[String]) -> Result<PolyZ> {
    let mut p = PolyParser { s: src.as_bytes(), i: 0, names, n: names.len() };
    let out = p.sum()?;
    p.ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

struct PolyParser<'a> {
    s: &'a [u8],
    i: usize,
    names: &'a [String],
    n: usize,
}

impl<'a> PolyParser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.i, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<PolyZ> {
        let mut acc = PolyZ::zero(self.n);
        let mut sign = 1;
        if self.peek() == Some(b'-') {
            self.i += 1;
            sign = -1;
        }
        loop {
            let t = self.product()?;
            acc = if sign > 0 { acc.add(&t) } else { acc.sub(&t) };
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    sign = 1;
                }
                Some(b'-') => {
                    self.i += 1;
                    sign = -1;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<PolyZ> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.i += 1;
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<PolyZ> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            self.ws();
            let k = self.number()?;
            let k = k.to_u64().ok_or_else(|| self.err("exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<BigInt> {
        let st = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if st == self.i {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.s[st..self.i]).unwrap().parse().unwrap())
    }

    fn atom(&mut self) -> Result<PolyZ> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.i += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => Ok(PolyZ::constant(self.n, self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let st = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                    self.i += 1;
                }
                let word = std::str::from_utf8(&self.s[st..self.i]).unwrap();
                match self.names.iter().position(|x| x == word) {
                    Some(k) => Ok(PolyZ::var(self.n, k)),
                    None => Err(Error::Syntax { pos: st, msg: format!("unknown variable {word}") }),
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let names = default_names(2);
        let p = parse_poly("X1^2 + 2*X1*X2 - (X2+1)^2", &names).unwrap();
        assert_eq!(p.render(&names), "X1^2 + 2*X1*X2 - X2^2 - 2*X2 - 1");
        assert!(parse_poly("X3", &names).is_err());
    }

    #[test]
    fn modpoly_pow_is_frobenius_mod_p() {
        let names = default_names(2);
        let f = parse_poly("X1 + X2 + 1", &names).unwrap().reduce(3);
        assert_eq!(f.pow(9), f.stretch(9));
    }
}
