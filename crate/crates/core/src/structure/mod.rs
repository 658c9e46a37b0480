//! Finite free extensions of `k[X]`: presentations, relative perfectness, Witt vectors over the
//! extension and their decomposition in a Teichmüller basis, overconvergence constants and
//! certificates. The de Rham-Witt decompositions live in [`decompose`].

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::drwalgebra::DrwElement;
use crate::error::{Error, Result};
use crate::lazard::FrobLift;
use crate::poly::{default_names, parse_poly, pow_u64, Exp, ModPoly, PolyFp, PolyZ};
use crate::pseudoval::{gamma, v_weighted, zeta, ExtendedReal};
use crate::util::modinv_u64;
use crate::wittcore::{ghost_trunc, unghost_mod_p, GhostRing, RingContext, WittVec};

mod decompose;
pub use decompose::*;

#[cfg(test)]
mod tests;

/// Structure constants `s_i s_j = sum_k c[i][j][k] s_k` over `Z[X]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub n: usize,
    pub rank: usize,
    pub c: Vec<Vec<Vec<PolyZ>>>,
}

impl Table {
    fn check(&self) -> Result<()> {
        let (n, r) = (self.n, self.rank);
        for j in 0..r {
            for k in 0..r {
                let want = if j == k { PolyZ::one(n) } else { PolyZ::zero(n) };
                if self.c[0][j][k] != want {
                    return Err(Error::MalformedTable(format!("s1 is not the unit (s1 s{})", j + 1)));
                }
            }
        }
        for i in 0..r {
            for j in 0..r {
                if self.c[i][j] != self.c[j][i] {
                    return Err(Error::MalformedTable(format!("s{} s{} is not commutative", i + 1, j + 1)));
                }
            }
        }
        let prod = |x: &[PolyZ], y: &[PolyZ]| {
            let mut out = vec![PolyZ::zero(n); r];
            for (i, a) in x.iter().enumerate() {
                for (j, b) in y.iter().enumerate() {
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    let ab = a.mul(b);
                    for (k, o) in out.iter_mut().enumerate() {
                        if !self.c[i][j][k].is_zero() {
                            *o = o.add(&ab.mul(&self.c[i][j][k]));
                        }
                    }
                }
            }
            out
        };
        let unit = |i: usize| (0..r).map(|k| if k == i { PolyZ::one(n) } else { PolyZ::zero(n) }).collect::<Vec<_>>();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let left = prod(&self.c[i][j], &unit(k));
                    let right = prod(&unit(i), &self.c[j][k]);
                    if left != right {
                        return Err(Error::MalformedTable(format!(
                            "(s{} s{}) s{} differs from s{} (s{} s{})",
                            i + 1,
                            j + 1,
                            k + 1,
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A presentation `R = k[X] -> k[X] s_1 + ... + k[X] s_r` of an extension by its
/// multiplication table, with optional data: the relative Frobenius matrix, a Frobenius lift on
/// `Z[X, Z_1..Z_r]` (`Z_i` standing for `s_i`), and an isomorphism of the extension with a
/// polynomial ring.
#[derive(Clone, Debug)]
pub struct EtalePresentation {
    pub p: u64,
    pub n: usize,
    pub rank: usize,
    pub localizer: PolyZ,
    pub table: Arc<Table>,
    pub frob: Option<Vec<Vec<PolyFp>>>,
    pub lift: Option<FrobLift>,
    pub model: Option<Model>,
}

/// `R ≅ k[Y_1..Y_k]`: images of the base variables and of the basis elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub names: Vec<String>,
    pub base: Vec<PolyZ>,
    pub basis: Vec<PolyZ>,
}

impl EtalePresentation {
    /// `X_1..X_n, s_1..s_r`, the names used by every line of the file format.
    pub fn names(&self) -> Vec<String> {
        names(self.n, self.rank)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(u64, usize, usize, PolyZ)> = None;
        let mut mul: BTreeMap<(usize, usize), Vec<PolyZ>> = BTreeMap::new();
        let mut frob: BTreeMap<usize, Vec<PolyFp>> = BTreeMap::new();
        let mut lift_lines = String::new();
        let mut model = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::Syntax { pos: ln + 1, msg };
            let word = line.split_whitespace().next().unwrap();
            if word == "etale" {
                let mut kv = BTreeMap::new();
                for tok in line.split_whitespace().skip(1) {
                    let (k, v) = tok.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {tok:?}")))?;
                    kv.insert(k.to_string(), v.to_string());
                }
                let get = |k: &str| kv.get(k).cloned().ok_or_else(|| bad(format!("missing {k}=")));
                let p: u64 = get("p")?.parse().map_err(|_| bad("bad prime".into()))?;
                let n: usize = get("n")?.parse().map_err(|_| bad("bad n".into()))?;
                let r: usize = get("rank")?.parse().map_err(|_| bad("bad rank".into()))?;
                let pp = parse_poly(&get("P")?, &default_names(n)).map_err(|e| bad(e.to_string()))?;
                if r == 0 {
                    return Err(bad("rank must be positive".into()));
                }
                header = Some((p, n, r, pp));
                continue;
            }
            let (p, n, r, _) = header.as_ref().ok_or_else(|| bad("the `etale` header comes first".into()))?;
            let (p, n, r) = (*p, *n, *r);
            let nm = names(n, r);
            let sidx = |s: &str| -> Result<usize> {
                let i = nm[n..].iter().position(|x| x == s).ok_or_else(|| bad(format!("unknown basis label {s:?}")))?;
                Ok(i)
            };
            match word {
                "mul" => {
                    let (lhs, rhs) = line[3..].split_once('=').ok_or_else(|| bad("expected `=`".into()))?;
                    let ls: Vec<&str> = lhs.split_whitespace().collect();
                    if ls.len() != 2 {
                        return Err(bad("expected `mul s_i s_j = ...`".into()));
                    }
                    let (i, j) = (sidx(ls[0])?, sidx(ls[1])?);
                    let f = parse_poly(rhs.trim(), &nm).map_err(|e| bad(e.to_string()))?;
                    let row = split_linear(&f, n, r, 1).ok_or_else(|| bad("a product must be linear in the basis".into()))?;
                    for key in [(i, j), (j, i)] {
                        if let Some(old) = mul.get(&key) {
                            if *old != row {
                                return Err(Error::MalformedTable(format!("conflicting lines for s{} s{}", i + 1, j + 1)));
                            }
                        }
                        mul.insert(key, row.clone());
                    }
                }
                "frob" => {
                    let (lhs, rhs) = line[4..].split_once('=').ok_or_else(|| bad("expected `=`".into()))?;
                    let i = sidx(lhs.trim())?;
                    let f = parse_poly(rhs.trim(), &nm).map_err(|e| bad(e.to_string()))?;
                    let row = split_linear(&f, n, r, p as u32)
                        .ok_or_else(|| bad(format!("expected a combination of s_j^{p}")))?;
                    frob.insert(i, row.iter().map(|c| c.reduce(p)).collect());
                }
                "lift" => {
                    lift_lines.push_str(line);
                    lift_lines.push('\n');
                }
                "model" => {
                    model = Some(parse_model(&line[5..], &nm, n, r).map_err(|e| bad(e.to_string()))?);
                }
                _ => return Err(bad(format!("unknown line kind {word:?}"))),
            }
        }
        let (p, n, r, localizer) = header.ok_or(Error::Syntax { pos: 0, msg: "missing `etale` header".into() })?;
        let mut c = vec![vec![vec![]; r]; r];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = mul
                    .get(&(i, j))
                    .cloned()
                    .ok_or_else(|| Error::MalformedTable(format!("missing product s{} s{}", i + 1, j + 1)))?;
            }
        }
        let frob = if frob.is_empty() {
            None
        } else {
            Some((0..r).map(|i| frob.get(&i).cloned().ok_or_else(|| Error::MalformedTable(format!("missing frob line for s{}", i + 1)))).collect::<Result<Vec<_>>>()?)
        };
        let lift = if lift_lines.is_empty() { None } else { Some(FrobLift::parse_with_names(&lift_lines, &names(n, r))?) };
        Self::new(p, Table { n, rank: r, c }, localizer, frob, lift, model)
    }

    pub fn new(p: u64, table: Table, localizer: PolyZ, frob: Option<Vec<Vec<PolyFp>>>, lift: Option<FrobLift>, model: Option<Model>) -> Result<Self> {
        RingContext::new(p, table.n, 0)?;
        if localizer != PolyZ::one(table.n) {
            return Err(Error::Unsupported("only the localizer P = 1 is implemented".into()));
        }
        table.check()?;
        if let Some(f) = &lift {
            if f.p != p || f.n != table.n + table.rank {
                return Err(Error::PreconditionViolated("lift lines must use the presentation's prime and variables".into()));
            }
        }
        let pres = EtalePresentation { p, n: table.n, rank: table.rank, localizer, table: Arc::new(table), frob, lift, model };
        if let Some(m) = &pres.model {
            pres.check_model(m)?;
        }
        Ok(pres)
    }

    /// The model must be a ring map `R -> k[Y]` mod p; bijectivity is the user's claim.
    fn check_model(&self, m: &Model) -> Result<()> {
        let p = self.p;
        let img = |x: &[PolyFp]| {
            let mut acc = PolyFp::zero(m.names.len(), p);
            for (k, c) in x.iter().enumerate() {
                acc = acc.add(&c.substitute(&m.base.iter().map(|b| b.reduce(p)).collect::<Vec<_>>()).mul(&m.basis[k].reduce(p)));
            }
            acc
        };
        for i in 0..self.rank {
            for j in 0..self.rank {
                let lhs = m.basis[i].mul(&m.basis[j]).reduce(p);
                let row: Vec<PolyFp> = self.table.c[i][j].iter().map(|c| c.reduce(p)).collect();
                if lhs != img(&row) {
                    return Err(Error::MalformedTable(format!("model does not respect s{} s{}", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let nm = self.names();
        let mut s = format!("# wdrw-format 1\netale p={} n={} rank={} P=1\n", self.p, self.n, self.rank);
        let comb = |row: &[PolyZ], pow: u32| {
            let mut f = PolyZ::zero(self.n + self.rank);
            for (k, c) in row.iter().enumerate() {
                let mut e = vec![0; self.n + self.rank];
                e[self.n + k] = pow;
                f = f.add(&lift_base(c, self.rank).mul(&PolyZ::monomial(self.n + self.rank, 1, e)));
            }
            f.render(&nm)
        };
        for i in 0..self.rank {
            for j in i..self.rank {
                s += &format!("mul {} {} = {}\n", nm[self.n + i], nm[self.n + j], comb(&self.table.c[i][j], 1));
            }
        }
        if let Some(u0) = &self.frob {
            for (i, row) in u0.iter().enumerate() {
                let row: Vec<PolyZ> = row.iter().map(|c| c.to_z()).collect();
                s += &format!("frob {} = {}\n", nm[self.n + i], comb(&row, self.p as u32));
            }
        }
        if let Some(f) = &self.lift {
            for (i, img) in f.images.iter().enumerate() {
                s += &format!("lift p={} {} -> {}\n", self.p, nm[i], img.render(&nm));
            }
        }
        if let Some(m) = &self.model {
            let mut parts = vec![];
            for (i, b) in m.base.iter().chain(&m.basis).enumerate() {
                parts.push(format!("{} -> {}", nm[i], b.render(&m.names)));
            }
            s += &format!("model {} : {}\n", m.names.join(","), parts.join(" ; "));
        }
        s
    }

    /// `F_p[X][Y]/(Y^p - Y - X)` with basis `1, Y, ..., Y^{p-1}` and its model `X -> Y^p - Y`.
    pub fn artin_schreier(p: u64) -> Self {
        let r = p as usize;
        let n = 1;
        let mut c = vec![vec![vec![PolyZ::zero(n); r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                let s = i + j;
                if s < r {
                    c[i][j][s] = PolyZ::one(n);
                } else {
                    // Y^s = Y^{s-p} (Y + X)
                    c[i][j][s - r + 1] = c[i][j][s - r + 1].add(&PolyZ::one(n));
                    c[i][j][s - r] = c[i][j][s - r].add(&PolyZ::var(n, 0));
                }
            }
        }
        let y = PolyZ::var(1, 0);
        let model = Model {
            names: vec!["Y1".into()],
            base: vec![y.pow(p).sub(&y)],
            basis: (0..r).map(|i| y.pow(i as u64)).collect(),
        };
        Self::new(p, Table { n, rank: r, c }, PolyZ::one(n), None, None, Some(model)).expect("Artin-Schreier table")
    }

    /// `F_p[X_1..X_n]` over itself.
    pub fn trivial(p: u64, n: usize) -> Self {
        let model = Model { names: default_names(n), base: (0..n).map(|i| PolyZ::var(n, i)).collect(), basis: vec![PolyZ::one(n)] };
        let t = Table { n, rank: 1, c: vec![vec![vec![PolyZ::one(n)]]] };
        Self::new(p, t, PolyZ::one(n), None, None, Some(model)).expect("trivial table")
    }

    /// `F_p[X][Z]/(Z^p)` with basis `1, Z, ..., Z^{p-1}`: finite free but not relatively perfect.
    pub fn nilpotent(p: u64) -> Self {
        let r = p as usize;
        let mut c = vec![vec![vec![PolyZ::zero(1); r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                if i + j < r {
                    c[i][j][i + j] = PolyZ::one(1);
                }
            }
        }
        Self::new(p, Table { n: 1, rank: r, c }, PolyZ::one(1), None, None, None).expect("nilpotent table")
    }

    pub fn base_ctx(&self, m: usize) -> RingContext {
        RingContext { p: self.p, n: self.n, m }
    }

    /// The Frobenius lift on `Z[X, Z_1..Z_r]` used by the decompositions.
    pub fn total_lift(&self) -> FrobLift {
        self.lift.clone().unwrap_or_else(|| FrobLift::canonical(self.p, self.n + self.rank))
    }
}

fn names(n: usize, r: usize) -> Vec<String> {
    let mut v = default_names(n);
    v.extend((1..=r).map(|i| format!("s{i}")));
    v
}

fn lift_base(c: &PolyZ, r: usize) -> PolyZ {
    let mut out = PolyZ::zero(c.n + r);
    for (e, x) in &c.terms {
        let mut e2 = e.clone();
        e2.extend(std::iter::repeat(0).take(r));
        out.add_term(e2, x.clone());
    }
    out
}

/// Split `f` in `Z[X, s]` as `sum_k c_k(X) s_k^pow`; `None` if some term has another shape.
fn split_linear(f: &PolyZ, n: usize, r: usize, pow: u32) -> Option<Vec<PolyZ>> {
    let mut out = vec![PolyZ::zero(n); r];
    for (e, c) in &f.terms {
        let s = &e[n..];
        let hits: Vec<usize> = (0..r).filter(|&k| s[k] != 0).collect();
        if hits.len() != 1 || s[hits[0]] != pow {
            return None;
        }
        out[hits[0]].add_term(e[..n].to_vec(), c.clone());
    }
    Some(out)
}

fn parse_model(src: &str, nm: &[String], n: usize, r: usize) -> Result<Model> {
    let (vars, rest) = src.split_once(':').ok_or(Error::Syntax { pos: 0, msg: "expected `model Y1,.. : ...`".into() })?;
    let names: Vec<String> = vars.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    let mut imgs: Vec<Option<PolyZ>> = vec![None; n + r];
    for item in rest.split(';') {
        let (v, f) = item.split_once("->").ok_or(Error::Syntax { pos: 0, msg: format!("expected `->` in {item:?}") })?;
        let i = nm.iter().position(|x| x == v.trim()).ok_or(Error::Syntax { pos: 0, msg: format!("unknown variable {:?}", v.trim()) })?;
        imgs[i] = Some(parse_poly(f.trim(), &names)?);
    }
    let imgs: Vec<PolyZ> = imgs
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or(Error::Syntax { pos: 0, msg: format!("model misses {}", nm[i]) }))
        .collect::<Result<_>>()?;
    Ok(Model { names, base: imgs[..n].to_vec(), basis: imgs[n..].to_vec() })
}

/// An element `sum c_k s_k` of the extension with coefficients in `(Z/q)[X]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgElem {
    pub table: Arc<Table>,
    pub q: u64,
    pub c: Vec<ModPoly>,
}

impl AlgElem {
    pub fn zero(table: &Arc<Table>, q: u64) -> Self {
        AlgElem { table: table.clone(), q, c: vec![ModPoly::zero(table.n, q); table.rank] }
    }

    pub fn basis(table: &Arc<Table>, q: u64, i: usize) -> Self {
        let mut x = Self::zero(table, q);
        x.c[i] = ModPoly::one(table.n, q);
        x
    }

    /// `f s_1`.
    pub fn scalar(table: &Arc<Table>, f: &ModPoly) -> Self {
        let mut x = Self::zero(table, f.q);
        x.c[0] = f.clone();
        x
    }

    fn map(&self, f: impl Fn(&ModPoly) -> ModPoly) -> Self {
        let c: Vec<ModPoly> = self.c.iter().map(f).collect();
        AlgElem { table: self.table.clone(), q: c.first().map_or(self.q, |x| x.q), c }
    }

    fn zip(&self, o: &Self, f: impl Fn(&ModPoly, &ModPoly) -> ModPoly) -> Self {
        AlgElem { table: self.table.clone(), q: self.q, c: self.c.iter().zip(&o.c).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn render(&self, names: &[String]) -> String {
        let n = self.table.n;
        let parts: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({})*{}", c.render(&names[..n]), names[n + k]))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl GhostRing for AlgElem {
    fn modulus(&self) -> u64 {
        self.q
    }
    fn with_modulus(&self, q: u64) -> Self {
        let mut x = self.map(|c| c.with_modulus(q));
        x.q = q;
        x
    }
    fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }
    fn mul(&self, o: &Self) -> Self {
        let t = &self.table;
        let mut out = Self::zero(t, self.q);
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a.mul(b);
                for k in 0..t.rank {
                    if !t.c[i][j][k].is_zero() {
                        out.c[k] = out.c[k].add(&ab.mul(&t.c[i][j][k].reduce(self.q)));
                    }
                }
            }
        }
        out
    }
    fn scale(&self, c: u64) -> Self {
        self.map(|x| x.scale(c))
    }
    fn div_exact(&self, d: u64) -> Option<Self> {
        let c: Option<Vec<ModPoly>> = self.c.iter().map(|x| x.div_exact(d)).collect();
        let c = c?;
        Some(AlgElem { table: self.table.clone(), q: c.first().map_or(self.q / d, |x| x.q), c })
    }
    fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

/// A truncated Witt vector over the extension, coordinates reduced mod p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtWitt {
    pub p: u64,
    pub coords: Vec<AlgElem>,
}

impl ExtWitt {
    pub fn zero(table: &Arc<Table>, p: u64, m: usize) -> Self {
        ExtWitt { p, coords: vec![AlgElem::zero(table, p); m] }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn teichmuller(x: &AlgElem, m: usize) -> Self {
        let mut w = Self::zero(&x.table, x.q, m);
        if m > 0 {
            w.coords[0] = x.clone();
        }
        w
    }

    /// Image of a Witt vector of the base.
    pub fn from_base(table: &Arc<Table>, w: &WittVec) -> Self {
        ExtWitt { p: w.ctx.p, coords: w.coords.iter().map(|c| AlgElem::scalar(table, c)).collect() }
    }

    fn combine(&self, o: &Self, f: impl Fn(&AlgElem, &AlgElem) -> AlgElem) -> Self {
        let m = self.len();
        if m == 0 {
            return self.clone();
        }
        let (ga, gb) = (ghost_trunc(&self.coords, self.p), ghost_trunc(&o.coords, self.p));
        let g: Vec<AlgElem> = ga.iter().zip(&gb).map(|(a, b)| f(a, b)).collect();
        ExtWitt { p: self.p, coords: unghost_mod_p(&g, self.p).expect("ghost image of a Witt point") }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a.sub(b))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a.mul(b))
    }

    /// `V^u`, keeping the length.
    pub fn shift(&self, u: usize) -> Self {
        let m = self.len();
        let mut coords: Vec<AlgElem> = (0..u.min(m)).map(|_| self.coords[0].scale(0)).collect();
        coords.extend(self.coords.iter().take(m.saturating_sub(u)).cloned());
        ExtWitt { p: self.p, coords }
    }

    /// Largest `u` with the vector in `V^u`; `None` for zero.
    pub fn v_v(&self) -> Option<usize> {
        self.coords.iter().position(|c| !c.is_zero())
    }
}

/// Outcome of the relative perfectness test: the matrix `A` with `s_j^p = sum A_jk s_k` must be
/// invertible over the base, and then `U_0 = A^{-1}` writes `s_i = sum (U_0)_ij s_j^p`.
#[derive(Clone, Debug)]
pub struct RelPerfReport {
    pub ok: bool,
    pub frobenius_matrix: Vec<Vec<PolyFp>>,
    pub det: PolyFp,
    pub u0: Option<Vec<Vec<PolyFp>>>,
    pub witness: String,
}

fn det(a: &[Vec<PolyFp>], n: usize, p: u64) -> PolyFp {
    match a.len() {
        0 => PolyFp::one(n, p),
        1 => a[0][0].clone(),
        r => {
            let mut acc = PolyFp::zero(n, p);
            for j in 0..r {
                if a[0][j].is_zero() {
                    continue;
                }
                let t = a[0][j].mul(&det(&minor(a, 0, j), n, p));
                acc = if j % 2 == 0 { acc.add(&t) } else { acc.sub(&t) };
            }
            acc
        }
    }
}

fn minor(a: &[Vec<PolyFp>], i: usize, j: usize) -> Vec<Vec<PolyFp>> {
    a.iter()
        .enumerate()
        .filter(|(r, _)| *r != i)
        .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// `A^{-1}` when `det A` is a nonzero constant.
fn inverse(a: &[Vec<PolyFp>], n: usize, p: u64) -> Option<Vec<Vec<PolyFp>>> {
    let d = det(a, n, p);
    if d.is_zero() || d.degree() != Some(0) {
        return None;
    }
    let inv = modinv_u64(d.coeff(&vec![0; n]), p)?;
    let r = a.len();
    let mut out = vec![vec![PolyFp::zero(n, p); r]; r];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let c = det(&minor(a, j, i), n, p).scale(inv);
            *cell = if (i + j) % 2 == 0 { c } else { c.neg() };
        }
    }
    Some(out)
}

/// Rows: the coordinates of `s_j^{p^u}` mod p.
fn power_matrix(pres: &EtalePresentation, u: u32) -> Vec<Vec<PolyFp>> {
    (0..pres.rank)
        .map(|j| {
            let mut x = AlgElem::basis(&pres.table, pres.p, j);
            for _ in 0..u {
                x = GhostRing::pow(&x, pres.p);
            }
            x.c
        })
        .collect()
}

pub fn check_relatively_perfect(pres: &EtalePresentation) -> Result<RelPerfReport> {
    let (p, n) = (pres.p, pres.n);
    let a = power_matrix(pres, 1);
    let d = det(&a, n, p);
    let u0 = inverse(&a, n, p);
    let Some(u0) = u0 else {
        let names = pres.names();
        let rows: Vec<String> = (0..pres.rank)
            .map(|j| format!("s{}^{} = {}", j + 1, p, AlgElem { table: pres.table.clone(), q: p, c: a[j].clone() }.render(&names)))
            .collect();
        return Ok(RelPerfReport {
            ok: false,
            frobenius_matrix: a,
            witness: format!("det = {} is not a unit; {}", d.render(&names[..n]), rows.join(", ")),
            det: d,
            u0: None,
        });
    };
    if let Some(given) = &pres.frob {
        if *given != u0 {
            return Err(Error::MalformedTable("frob lines disagree with the multiplication table".into()));
        }
    }
    Ok(RelPerfReport { ok: true, frobenius_matrix: a, det: d, u0: Some(u0), witness: "U0 = A^{-1}".into() })
}

fn require_perfect(pres: &EtalePresentation) -> Result<RelPerfReport> {
    let rp = check_relatively_perfect(pres)?;
    if !rp.ok {
        return Err(Error::NotRelativelyPerfect(rp.witness));
    }
    Ok(rp)
}

/// Unique `r(1..r)` in `W_m(k[X])` with `w = sum r(i) [s_i]`, solved coordinate by coordinate:
/// `w_u = sum rho_i s_i^{p^u}` and `V^u([rho_i]) [s_i] = V^u([rho_i s_i^{p^u}])`.
pub fn witt_basis_decompose(w: &ExtWitt, pres: &EtalePresentation) -> Result<Vec<WittVec>> {
    require_perfect(pres)?;
    let (p, n, m) = (pres.p, pres.n, w.len());
    let ctx = pres.base_ctx(m);
    let mut rem = w.clone();
    let mut out = vec![WittVec::zero(ctx); pres.rank];
    for u in 0..m {
        let c = rem.coords[u].c.clone();
        if c.iter().all(|x| x.is_zero()) {
            continue;
        }
        let inv = inverse(&power_matrix(pres, u as u32), n, p).expect("powers of a unit determinant");
        for i in 0..pres.rank {
            let mut rho = PolyFp::zero(n, p);
            for (k, ck) in c.iter().enumerate() {
                rho = rho.add(&ck.mul(&inv[k][i]));
            }
            if rho.is_zero() {
                continue;
            }
            let mut coords = vec![PolyFp::zero(n, p); m];
            coords[u] = rho;
            let piece = WittVec::from_coords(ctx, coords);
            out[i] = out[i].add(&piece)?;
            let term = ExtWitt::from_base(&pres.table, &piece).mul(&ExtWitt::teichmuller(&AlgElem::basis(&pres.table, p, i), m));
            rem = rem.sub(&term);
        }
        debug_assert!(rem.coords[..=u].iter().all(|x| x.is_zero()));
    }
    if !rem.is_zero() {
        return Err(Error::NonIntegralResult("basis decomposition left a remainder".into()));
    }
    Ok(out)
}

/// `sum r(i) [s_i]`.
pub fn witt_basis_recompose(r: &[WittVec], pres: &EtalePresentation) -> ExtWitt {
    let m = r.first().map_or(0, |x| x.ctx.m);
    let mut acc = ExtWitt::zero(&pres.table, pres.p, m);
    for (i, ri) in r.iter().enumerate() {
        let term = ExtWitt::from_base(&pres.table, ri).mul(&ExtWitt::teichmuller(&AlgElem::basis(&pres.table, pres.p, i), m));
        acc = acc.add(&term);
    }
    acc
}

/// Constants of the overconvergence bounds for a presentation with `s_1 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstantsReport {
    /// Radii on `X_1..X_n, Z_1..Z_r`.
    pub b: Vec<String>,
    pub c: String,
    pub d: String,
    pub e: String,
    /// `None` when no constraint arises.
    pub delta: Option<String>,
    #[serde(skip)]
    pub values: ConstantValues,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ConstantValues {
    pub b: Vec<BigRational>,
    pub c: BigRational,
    pub d: BigRational,
    pub e: BigRational,
    pub delta: Option<BigRational>,
}

/// Radii: 1 on the base, `d` on the basis slots, with `d` one more than the largest degree of a
/// structure constant. `C = -v_b(1) = 0` since `s_1 = 1` lifts to the constant 1;
/// `D = max(0, -min v(U_0) / (p - 1))`; `E = C + D`; `delta` from `1/(2(C+D))` and
/// `1/(C + D + E')` with `E' = -min v_{phi,b}(s_i)`.
pub fn compute_constants(pres: &EtalePresentation) -> Result<ConstantsReport> {
    let rp = require_perfect(pres)?;
    let (p, n, r) = (pres.p, pres.n, pres.rank);
    let maxdeg = pres.table.c.iter().flatten().flatten().filter_map(|c| c.reduce(p).degree()).max().unwrap_or(0);
    let d = BigRational::from_integer(BigInt::from(maxdeg + 1));
    let mut b = vec![BigRational::one(); n];
    b.extend(std::iter::repeat(d).take(r));
    let bx = &b[..n];
    let c = BigRational::zero();
    let du = rp.u0.as_ref().unwrap().iter().flatten().map(|x| v_weighted(x, bx)).min().unwrap_or(ExtendedReal::PosInf);
    let dd = match du {
        ExtendedReal::Fin(x) if x.is_negative() => -x / BigRational::from_integer(BigInt::from(p - 1)),
        _ => BigRational::zero(),
    };
    let e = &c + &dd;
    let mut e_prime = BigRational::zero();
    for i in 0..r {
        let v = v_ext(&AlgElem::basis(&pres.table, p, i), &b)?;
        if let ExtendedReal::Fin(x) = v {
            e_prime = e_prime.max(-x);
        }
    }
    let cd = &c + &dd;
    let mut delta: Option<BigRational> = None;
    let mut tighten = |x: BigRational| delta = Some(delta.take().map_or(x.clone(), |y| y.min(x)));
    if cd.is_positive() {
        tighten(BigRational::one() / (BigRational::from_integer(2.into()) * &cd));
    }
    if (&cd + &e_prime).is_positive() {
        tighten(BigRational::one() / (&cd + &e_prime));
    }
    let values = ConstantValues { b: b.clone(), c: c.clone(), d: dd.clone(), e: e.clone(), delta: delta.clone() };
    Ok(ConstantsReport {
        b: b.iter().map(|x| x.to_string()).collect(),
        c: c.to_string(),
        d: dd.to_string(),
        e: e.to_string(),
        delta: delta.map(|x| x.to_string()),
        values,
    })
}

/// Incremental row echelon form over `F_p` on sparse vectors.
struct Span<C: Ord + Clone> {
    p: u64,
    pivots: BTreeMap<C, BTreeMap<C, u64>>,
}

impl<C: Ord + Clone> Span<C> {
    fn new(p: u64) -> Self {
        Span { p, pivots: BTreeMap::new() }
    }

    fn reduce(&self, mut v: BTreeMap<C, u64>) -> BTreeMap<C, u64> {
        let p = self.p;
        while let Some((c, x)) = v.iter().find(|(c, _)| self.pivots.contains_key(*c)).map(|(c, x)| (c.clone(), *x)) {
            for (k, y) in &self.pivots[&c] {
                let e = v.entry(k.clone()).or_insert(0);
                *e = (*e + p - x * y % p) % p;
                if *e == 0 {
                    v.remove(k);
                }
            }
        }
        v
    }

    fn insert(&mut self, v: BTreeMap<C, u64>) {
        let v = self.reduce(v);
        if let Some((c, &x)) = v.iter().next() {
            let inv = modinv_u64(x, self.p).unwrap();
            let c = c.clone();
            let v: BTreeMap<C, u64> = v.into_iter().map(|(k, y)| (k, y * inv % self.p)).collect();
            self.pivots.insert(c, v);
        }
    }
}

/// Monomials with `sum b_i e_i <= cap`, skipping flagged variables, sorted by weight.
fn monomials_by_weight(b: &[BigRational], skip: &[bool], cap: &BigRational) -> Vec<(BigRational, Exp)> {
    fn go(i: usize, b: &[BigRational], skip: &[bool], cap: &BigRational, w: BigRational, e: &mut Exp, out: &mut Vec<(BigRational, Exp)>) {
        if i == b.len() {
            out.push((w, e.clone()));
            return;
        }
        go(i + 1, b, skip, cap, w.clone(), e, out);
        if skip[i] {
            return;
        }
        let mut w2 = w + &b[i];
        while &w2 <= cap {
            e[i] += 1;
            go(i + 1, b, skip, cap, w2.clone(), e, out);
            w2 += &b[i];
        }
        e[i] = 0;
    }
    let mut out = vec![];
    go(0, b, skip, cap, BigRational::zero(), &mut vec![0; b.len()], &mut out);
    out.sort();
    out
}

/// Smallest `b`-weight of a preimage of `target` among monomials of weight at most `cap`.
fn min_preimage_weight<C: Ord + Clone>(
    target: &BTreeMap<C, u64>,
    p: u64,
    b: &[BigRational],
    skip: &[bool],
    cap: &BigRational,
    image: impl Fn(&[u32]) -> BTreeMap<C, u64>,
) -> Option<BigRational> {
    let mons = monomials_by_weight(b, skip, cap);
    let mut span = Span::new(p);
    let mut i = 0;
    while i < mons.len() {
        let w = mons[i].0.clone();
        while i < mons.len() && mons[i].0 == w {
            span.insert(image(&mons[i].1));
            i += 1;
        }
        if span.reduce(target.clone()).is_empty() {
            return Some(w);
        }
    }
    None
}

fn sparse_alg(x: &AlgElem) -> BTreeMap<(usize, Exp), u64> {
    let mut out = BTreeMap::new();
    for (k, c) in x.c.iter().enumerate() {
        for (e, v) in &c.terms {
            out.insert((k, e.clone()), *v);
        }
    }
    out
}

fn sparse_poly(x: &PolyFp) -> BTreeMap<Exp, u64> {
    x.terms.iter().map(|(e, v)| (e.clone(), *v)).collect()
}

/// `v_{phi,b}(x)` for `phi: k[X, Z_1..Z_r] -> R`, `Z_i -> s_i`: the sup of `v_b` over preimages,
/// exact.
pub fn v_ext(x: &AlgElem, b: &[BigRational]) -> Result<ExtendedReal> {
    let t = &x.table;
    let (n, r, p) = (t.n, t.rank, x.q);
    if x.is_zero() {
        return Ok(ExtendedReal::PosInf);
    }
    // The preimage sum c_k(X) Z_k (with Z_1 dropped, since s_1 = 1) bounds the search.
    let mut cap = BigRational::zero();
    for (k, c) in x.c.iter().enumerate() {
        if let ExtendedReal::Fin(v) = v_weighted(c, &b[..n]) {
            let w = if k == 0 { -v } else { -v + &b[n + k] };
            cap = cap.max(w);
        }
    }
    let mut skip = vec![false; n + r];
    skip[n] = true;
    let table = t.clone();
    let w = min_preimage_weight(&sparse_alg(x), p, b, &skip, &cap, |e| {
        let mut acc = AlgElem::scalar(&table, &ModPoly::monomial(n, p, 1, e[..n].to_vec()));
        for k in 1..r {
            for _ in 0..e[n + k] {
                acc = GhostRing::mul(&acc, &AlgElem::basis(&table, p, k));
            }
        }
        sparse_alg(&acc)
    })
    .ok_or_else(|| Error::NonIntegralResult("no preimage within the trivial bound".into()))?;
    Ok(ExtendedReal::Fin(-w))
}

/// `v_{phi,b}(x)` for a polynomial map `phi` into `k[Y]`, given by `images`, exact. Variables
/// flagged in `skip` must map to 1.
pub fn v_model(x: &PolyFp, images: &[PolyFp], skip: &[bool], b: &[BigRational]) -> Result<ExtendedReal> {
    if x.is_zero() {
        return Ok(ExtendedReal::PosInf);
    }
    let p = x.q;
    let ny = x.n;
    let mut cap = BigRational::one();
    for _ in 0..12 {
        let found = min_preimage_weight(&sparse_poly(x), p, b, skip, &cap, |e| {
            let mut acc = PolyFp::one(ny, p);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    acc = acc.mul(&images[i].pow(k as u64));
                }
            }
            sparse_poly(&acc)
        });
        if let Some(w) = found {
            return Ok(ExtendedReal::Fin(-w));
        }
        cap = cap * BigRational::from_integer(2.into());
    }
    Err(Error::NonIntegralResult(format!("no preimage of weight <= {cap}")))
}

fn gamma_with(coords: &[ExtendedReal], p: u64, eps: &BigRational) -> ExtendedReal {
    coords
        .iter()
        .enumerate()
        .map(|(u, v)| match v {
            ExtendedReal::PosInf => ExtendedReal::PosInf,
            v => v
                .scale(&(eps / BigRational::from_integer(BigInt::from(pow_u64(p, u as u32)))))
                .add_rat(&BigRational::from_integer(BigInt::from(u))),
        })
        .min()
        .unwrap_or(ExtendedReal::PosInf)
}

/// Something a certificate evaluates exactly at a given `eps`.
#[derive(Clone, Debug)]
pub enum Evaluand {
    Zeta(DrwElement),
    Gamma { w: WittVec, b: Vec<BigRational> },
    /// `gamma_{eps, phi, b}` over a polynomial model of the target.
    GammaModel { p: u64, coords: Vec<PolyFp>, images: Vec<PolyFp>, skip: Vec<bool>, b: Vec<BigRational> },
    /// `gamma_{eps, phi, b}` over the extension given by its table.
    GammaExt { w: ExtWitt, b: Vec<BigRational> },
}

impl Evaluand {
    pub fn eval(&self, eps: &BigRational) -> Result<ExtendedReal> {
        Ok(match self {
            Evaluand::Zeta(x) => zeta(x, eps),
            Evaluand::Gamma { w, b } => gamma(w, eps, b),
            Evaluand::GammaModel { p, coords, images, skip, b } => {
                let v: Vec<ExtendedReal> = coords.iter().map(|c| v_model(c, images, skip, b)).collect::<Result<_>>()?;
                gamma_with(&v, *p, eps)
            }
            Evaluand::GammaExt { w, b } => {
                let v: Vec<ExtendedReal> = w.coords.iter().map(|c| v_ext(c, b)).collect::<Result<_>>()?;
                gamma_with(&v, w.p, eps)
            }
        })
    }
}

/// A checked inequality `lhs >= rhs + offset_const + offset_eps * eps` at a fixed `eps`.
#[derive(Clone, Debug)]
pub struct BoundCertificate {
    pub description: String,
    pub eps: BigRational,
    pub lhs: Evaluand,
    pub rhs: Evaluand,
    pub offset_const: BigRational,
    pub offset_eps: BigRational,
    pub lhs_value: ExtendedReal,
    pub rhs_value: ExtendedReal,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSummary {
    pub description: String,
    pub eps: String,
    pub lhs: String,
    pub rhs: String,
}

impl BoundCertificate {
    pub fn new(description: String, eps: BigRational, lhs: Evaluand, rhs: Evaluand, offset_const: BigRational, offset_eps: BigRational) -> Result<Self> {
        let lhs_value = lhs.eval(&eps)?;
        let rhs_value = rhs.eval(&eps)?;
        Ok(BoundCertificate { description, eps, lhs, rhs, offset_const, offset_eps, lhs_value, rhs_value })
    }

    pub fn bound(&self) -> ExtendedReal {
        self.rhs_value.add_rat(&(&self.offset_const + &self.offset_eps * &self.eps))
    }

    pub fn holds(&self) -> bool {
        self.lhs_value >= self.bound()
    }

    /// Re-evaluate both sides from scratch.
    pub fn verify(&self) -> Result<bool> {
        let l = self.lhs.eval(&self.eps)?;
        let r = self.rhs.eval(&self.eps)?;
        Ok(l == self.lhs_value && r == self.rhs_value && self.holds())
    }

    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary { description: self.description.clone(), eps: self.eps.to_string(), lhs: self.lhs_value.to_string(), rhs: self.bound().to_string() }
    }
}

/// Certificates for `gamma(r(i)) >= gamma(w) - eps E`, one per basis element and per `eps` in
/// `{delta, delta/2, delta/4}` (`delta = 1` when unconstrained).
pub fn witt_basis_certificates(w: &ExtWitt, r: &[WittVec], consts: &ConstantsReport) -> Result<Vec<BoundCertificate>> {
    let v = &consts.values;
    let n = w.coords.first().map_or(0, |c| c.table.n);
    let top = v.delta.clone().unwrap_or_else(BigRational::one);
    let mut out = vec![];
    for k in 0..3 {
        let eps = &top / BigRational::from_integer(BigInt::from(1u64 << k));
        for (i, ri) in r.iter().enumerate() {
            out.push(BoundCertificate::new(
                format!("gamma(r({})) >= gamma(w) - eps*E", i + 1),
                eps.clone(),
                Evaluand::Gamma { w: ri.clone(), b: v.b[..n].to_vec() },
                Evaluand::GammaExt { w: w.clone(), b: v.b.clone() },
                BigRational::zero(),
                -v.e.clone(),
            )?);
        }
    }
    Ok(out)
}
