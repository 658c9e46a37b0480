//! The structure decompositions of de Rham-Witt forms: over `k[X]` with a Frobenius lift, by the
//! mod-p splitting iterated `m` times; over a modelled extension, by an exact solve on
//! bounded-weight generators of `k[X, Z]` pushed forward.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_integer::Integer;
use rayon::prelude::*;

use super::*;
use crate::drwalgebra::{slice_matrix, GenKind, SliceGen};
use crate::drwbasis::{enumerate_g, enumerate_h, Key, WeightFn};
use crate::linalg::solve_mod_pk;
use crate::pseudoval::PolyMorphism;
use crate::util::{big_pow, exps_of_degree, mod_u64, vp_int};

/// Coefficients `s(e)` of a decomposition
/// `x = sum_H t_F(s(e) e) + sum_G t_F(s(e)) e + d(sum_G' t_F(s(e)) e)`, each `s(e)` reduced mod
/// `p^{m - u(e)}`.
#[derive(Clone, Debug)]
pub struct DecompositionResult {
    pub p: u64,
    pub n: usize,
    pub m: usize,
    pub degree: usize,
    pub entries: BTreeMap<(GenKind, Key), PolyZ>,
    pub eps: Option<BigRational>,
    pub certificates: Vec<BoundCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JsonEntry {
    pub kind: String,
    pub key: String,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct JsonDecomposition {
    pub degree: usize,
    pub level: usize,
    pub entries: Vec<JsonEntry>,
    pub cert: Option<JsonCert>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JsonCert {
    pub eps: Option<String>,
    pub bounds: Vec<CertificateSummary>,
}

fn kind_name(k: GenKind) -> &'static str {
    match k {
        GenKind::H => "H",
        GenKind::G => "G",
        GenKind::DG => "dG",
    }
}

fn reduce_coeffs(f: &PolyZ, q: &BigInt) -> PolyZ {
    let mut out = PolyZ::zero(f.n);
    for (e, c) in &f.terms {
        out.add_term(e.clone(), c.mod_floor(q));
    }
    out
}

impl DecompositionResult {
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether `p^l` divides every `s(e)`.
    pub fn divisible_by_p_pow(&self, l: u32) -> bool {
        self.entries.values().all(|f| f.terms.values().all(|c| vp_int(c, self.p).map_or(true, |v| v >= l)))
    }

    /// Whether `p^{max(u - u(e), 0)}` divides every `s(e)`.
    pub fn fil_criterion(&self, u: u32) -> bool {
        self.entries.iter().all(|((_, k), f)| {
            let need = u.saturating_sub(k.u);
            f.terms.values().all(|c| vp_int(c, self.p).map_or(true, |v| v >= need))
        })
    }

    pub fn render_lines(&self, names: &[String]) -> Vec<String> {
        self.entries
            .iter()
            .map(|((kind, key), f)| format!("{} {} : {}", kind_name(*kind), key.render(&BigInt::one()), f.render(names)))
            .collect()
    }

    pub fn to_json(&self, names: &[String]) -> JsonDecomposition {
        JsonDecomposition {
            degree: self.degree,
            level: self.m,
            entries: self
                .entries
                .iter()
                .map(|((kind, key), f)| JsonEntry { kind: kind_name(*kind).into(), key: key.render(&BigInt::one()), coeff: f.render(names) })
                .collect(),
            cert: Some(JsonCert { eps: self.eps.as_ref().map(|e| e.to_string()), bounds: self.certificates.iter().map(|c| c.summary()).collect() }),
        }
    }

    fn insert(&mut self, kind: GenKind, key: Key, f: PolyZ) {
        let slot = self.entries.entry((kind, key)).or_insert_with(|| PolyZ::zero(f.n));
        *slot = slot.add(&f);
    }

    fn normalize(&mut self) {
        let (p, m) = (self.p, self.m as u32);
        let entries = std::mem::take(&mut self.entries);
        for ((kind, key), f) in entries {
            let f = reduce_coeffs(&f, &big_pow(p, m.saturating_sub(key.u)));
            if !f.is_zero() {
                self.entries.insert((kind, key), f);
            }
        }
    }

    /// The sum of the generator images, at level `m`, for the lift `f` on the source ring.
    pub fn recompose(&self, f: &FrobLift) -> Result<DrwElement> {
        let ctx = RingContext { p: self.p, n: self.n, m: self.m };
        let mut out = DrwElement::zero(ctx, self.degree);
        for ((kind, key), s) in &self.entries {
            out = out.add(&phi_value(*kind, key, s, f, ctx)?)?;
        }
        Ok(out)
    }

    /// The image of one generator with its coefficient.
    pub fn component(&self, kind: GenKind, key: &Key, f: &FrobLift) -> Result<DrwElement> {
        let ctx = RingContext { p: self.p, n: self.n, m: self.m };
        match self.entries.get(&(kind, key.clone())) {
            Some(s) => phi_value(kind, key, s, f, ctx),
            None => Ok(DrwElement::zero(ctx, self.degree)),
        }
    }
}

/// `t_F(s) prod d t_F(X_i)` for `H`, `t_F(s) e` for `G`, `d(t_F(s) e)` for `dG`.
pub fn phi_value(kind: GenKind, key: &Key, s: &PolyZ, f: &FrobLift, ctx: RingContext) -> Result<DrwElement> {
    let ts = DrwElement::from_witt(&f.t_f(s, ctx)?);
    Ok(match kind {
        GenKind::H => {
            let mut acc = ts;
            for &i in &key.parts {
                acc = acc.mul(&DrwElement::from_witt(&f.t_f(&PolyZ::var(ctx.n, i), ctx)?).d())?;
            }
            acc
        }
        GenKind::G | GenKind::DG => {
            let e = DrwElement::from_term(ctx, key.degree(), key.clone(), BigInt::one());
            let v = ts.mul(&e)?;
            if kind == GenKind::DG {
                v.d()
            } else {
                v
            }
        }
    })
}

type Slice = (Vec<Key>, Vec<SliceGen>, Vec<Vec<u64>>);

/// Decomposition over `k[X]`: at each level, solve the mod-p slice systems in increasing `u`,
/// subtract the exact images (whose error terms only reach larger `u`), then divide by `p`.
pub fn poly_structure_decompose(x: &DrwElement, f: &FrobLift) -> Result<DecompositionResult> {
    let ctx = x.ctx;
    if f.p != ctx.p || f.n != ctx.n {
        return Err(Error::ContextMismatch);
    }
    let (p, n, m, t) = (ctx.p, ctx.n, ctx.m, x.degree);
    let mut res = DecompositionResult { p, n, m, degree: t, entries: BTreeMap::new(), eps: None, certificates: vec![] };
    let mut cache: HashMap<WeightFn, Slice> = HashMap::new();
    let mut rem = x.clone();
    for step in 0..m {
        let level = ctx.with_len(m - step);
        for u in 0..(m - step) as u32 {
            let weights: BTreeSet<WeightFn> =
                rem.terms.iter().filter(|(k, c)| k.u == u && mod_u64(c, p) != 0).map(|(k, _)| k.a.clone()).collect();
            let mut sigma: BTreeMap<(GenKind, Key), PolyZ> = BTreeMap::new();
            for c in weights {
                if !cache.contains_key(&c) {
                    cache.insert(c.clone(), slice_matrix(&c, t, p)?);
                }
                let (keys, gens, mat) = &cache[&c];
                let rhs: Vec<u64> = keys.iter().map(|k| rem.terms.get(k).map_or(0, |v| mod_u64(v, p))).collect();
                let sol = solve_mod_pk(mat, &rhs, p, 1)
                    .ok_or_else(|| Error::NonIntegralResult(format!("slice system over weight {} is not solvable", keys[0])))?;
                for (g, &l) in gens.iter().zip(&sol) {
                    if l != 0 {
                        sigma.entry((g.kind, g.key.clone())).or_insert_with(|| PolyZ::zero(n)).add_term(g.mult.clone(), BigInt::from(l));
                    }
                }
            }
            for ((kind, key), s) in sigma {
                rem = rem.sub(&phi_value(kind, &key, &s, f, level)?)?;
                res.insert(kind, key, s.scale(&big_pow(p, step as u32)));
            }
        }
        rem = rem.div_p()?;
    }
    if !rem.is_zero() {
        return Err(Error::NonIntegralResult("decomposition left a remainder".into()));
    }
    res.normalize();
    Ok(res)
}

/// Largest `eps = start / 2^k` (`k <= 10`) at which every candidate bound holds.
pub fn certify_grid(items: &[(String, Evaluand, Evaluand, BigRational)], start: &BigRational) -> Result<(Option<BigRational>, Vec<BoundCertificate>)> {
    for k in 0..=10u32 {
        let eps = start / BigRational::from_integer(BigInt::from(1u64 << k));
        let mut certs = vec![];
        let mut ok = true;
        for (d, l, r, off) in items {
            let c = BoundCertificate::new(d.clone(), eps.clone(), l.clone(), r.clone(), off.clone(), BigRational::zero())?;
            if !c.holds() {
                ok = false;
                break;
            }
            certs.push(c);
        }
        if ok {
            return Ok((Some(eps), certs));
        }
    }
    Ok((None, vec![]))
}

fn default_eta() -> BigRational {
    BigRational::new(1.into(), 4.into())
}

/// `poly_structure_decompose` plus certificates `zeta(component) >= zeta(x) - eta`.
pub fn poly_structure_decompose_certified(x: &DrwElement, f: &FrobLift, eta: Option<BigRational>) -> Result<DecompositionResult> {
    let mut res = poly_structure_decompose(x, f)?;
    let eta = eta.unwrap_or_else(default_eta);
    let mut items = vec![];
    for (kind, key) in res.entries.keys() {
        let comp = res.component(*kind, key, f)?;
        items.push((format!("zeta({} {}) >= zeta(x) - eta", kind_name(*kind), key.render(&BigInt::one())), Evaluand::Zeta(comp), Evaluand::Zeta(x.clone()), -eta.clone()));
    }
    let (eps, certs) = certify_grid(&items, &default_eta())?;
    res.eps = eps;
    res.certificates = certs;
    Ok(res)
}

/// The data shared by the decompositions over a modelled extension: `phi: k[X, Z] -> k[Y]` with
/// `Z_i -> s_i`, a Frobenius lift on the source, and radii.
#[derive(Clone, Debug)]
pub struct EtaleSetup {
    pub phi: PolyMorphism,
    pub lift: FrobLift,
    /// Source variables sent to 1; generators avoid them.
    pub skip: Vec<bool>,
    pub constants: ConstantsReport,
    pub source_n: usize,
    pub target_n: usize,
    pub p: u64,
}

pub fn etale_setup(pres: &EtalePresentation) -> Result<EtaleSetup> {
    let constants = compute_constants(pres)?;
    let model = pres.model.as_ref().ok_or_else(|| Error::Unsupported("the presentation has no `model` line".into()))?;
    let p = pres.p;
    let images: Vec<PolyFp> = model.base.iter().chain(&model.basis).map(|f| f.reduce(p)).collect();
    let target_n = model.names.len();
    let skip = images.iter().map(|f| *f == PolyFp::one(target_n, p)).collect();
    Ok(EtaleSetup {
        phi: PolyMorphism::new(images, target_n),
        lift: pres.total_lift(),
        skip,
        constants,
        source_n: pres.n + pres.rank,
        target_n,
        p,
    })
}

impl EtaleSetup {
    /// Generators `(kind, key, multiplier)` of degree `t` at level `m` with `|a(e)| + |mult| <= w`,
    /// ordered by `(u, weight, kind, key, mult)`.
    fn generators(&self, t: usize, m: usize, w: u64) -> Vec<(GenKind, Key, Exp)> {
        let (p, n) = (self.p, self.source_n);
        let ok_key = |k: &Key| k.a.iter().enumerate().all(|(i, x)| !self.skip[i] || *x == crate::util::Q64::from_integer(0));
        let max_u = m.saturating_sub(1) as u32;
        let mut keys: Vec<(GenKind, Key)> = enumerate_h(t, n, p).into_iter().map(|k| (GenKind::H, k)).collect();
        keys.extend(enumerate_g(t as i64, n, p, max_u, u64::MAX).into_iter().map(|k| (GenKind::G, k)));
        keys.extend(enumerate_g(t as i64 - 1, n, p, max_u, u64::MAX).into_iter().map(|k| (GenKind::DG, k)));
        let mut out = vec![];
        for (kind, key) in keys {
            if !ok_key(&key) || key.wt > crate::util::Q64::from_integer(w) {
                continue;
            }
            let room = (crate::util::Q64::from_integer(w) - key.wt).to_integer() as u32;
            for d in 0..=room {
                for e in exps_of_degree(n, d) {
                    if e.iter().enumerate().any(|(i, &x)| x > 0 && self.skip[i]) {
                        continue;
                    }
                    out.push((kind, key.clone(), e));
                }
            }
        }
        out.sort_by(|a, b| {
            let wa = a.1.wt + crate::util::Q64::from_integer(a.2.iter().sum::<u32>() as u64);
            let wb = b.1.wt + crate::util::Q64::from_integer(b.2.iter().sum::<u32>() as u64);
            (a.1.u, wa, a.0, &a.1, &a.2).cmp(&(b.1.u, wb, b.0, &b.1, &b.2))
        });
        out
    }

    /// Solve `phi(sum lambda_g g) = x` over `Z/p^m`, with `lambda_g` a multiple of
    /// `p^{scale(g)}`.
    fn solve(&self, x: &DrwElement, gens: &[(GenKind, Key, Exp)], scale: impl Fn(&Key) -> u32, w: u64) -> Result<DecompositionResult> {
        let (p, m, t) = (self.p, x.ctx.m, x.degree);
        let src = RingContext { p, n: self.source_n, m };
        let values: Vec<DrwElement> = gens
            .par_iter()
            .map(|(kind, key, e)| self.phi.apply(&phi_value(*kind, key, &PolyZ::monomial(self.source_n, 1, e.clone()), &self.lift, src)?))
            .collect::<Result<_>>()?;
        let mut rows: BTreeMap<Key, usize> = BTreeMap::new();
        for k in values.iter().flat_map(|v| v.terms.keys()).chain(x.terms.keys()) {
            let l = rows.len();
            rows.entry(k.clone()).or_insert(l);
        }
        let q = pow_u64(p, m as u32);
        let keys: Vec<Key> = {
            let mut v: Vec<(usize, Key)> = rows.iter().map(|(k, &i)| (i, k.clone())).collect();
            v.sort();
            v.into_iter().map(|(_, k)| k).collect()
        };
        let entry = |k: &Key, c: &BigInt, extra: u32| -> u64 {
            let r = mod_u64(c, pow_u64(p, (m as u32).saturating_sub(k.u)));
            let s = pow_u64(p, (k.u + extra).min(m as u32));
            ((r as u128 * s as u128) % q as u128) as u64
        };
        let mut a = vec![vec![0u64; gens.len()]; keys.len()];
        for (j, v) in values.iter().enumerate() {
            let sc = scale(&gens[j].1);
            for (k, c) in &v.terms {
                a[rows[k]][j] = entry(k, c, sc);
            }
        }
        let b: Vec<u64> = keys.iter().map(|k| x.terms.get(k).map_or(0, |c| entry(k, c, 0))).collect();
        let sol = solve_mod_pk(&a, &b, p, m as u32).ok_or(Error::WeightBoundExceeded(w))?;
        let mut res = DecompositionResult { p, n: self.source_n, m, degree: t, entries: BTreeMap::new(), eps: None, certificates: vec![] };
        for ((kind, key, e), &l) in gens.iter().zip(&sol) {
            if l != 0 {
                let c = BigInt::from(l) * big_pow(p, scale(key));
                res.insert(*kind, key.clone(), PolyZ::monomial(self.source_n, c, e.clone()));
            }
        }
        res.normalize();
        if self.push(&res)? != *x {
            return Err(Error::NonIntegralResult("pushed-forward decomposition does not reproduce the input".into()));
        }
        Ok(res)
    }

    /// `W(phi)` of the recomposition.
    pub fn push(&self, res: &DecompositionResult) -> Result<DrwElement> {
        self.phi.apply(&res.recompose(&self.lift)?)
    }
}

/// Decomposition of a form on the extension (given in its model) into generators of
/// `k[X, Z]` pushed forward, with `zeta` certificates on the components.
pub fn etale_structure_decompose(x: &DrwElement, pres: &EtalePresentation, max_weight: u64, eta: Option<BigRational>) -> Result<DecompositionResult> {
    let setup = etale_setup(pres)?;
    if x.ctx.n != setup.target_n || x.ctx.p != pres.p {
        return Err(Error::ContextMismatch);
    }
    let gens = setup.generators(x.degree, x.ctx.m, max_weight);
    let mut res = setup.solve(x, &gens, |_| 0, max_weight)?;
    let eta = eta.unwrap_or_else(default_eta);
    let mut items = vec![];
    for (kind, key) in res.entries.keys() {
        let comp = res.component(*kind, key, &setup.lift)?;
        items.push((format!("zeta({} {}) >= zeta(x) - eta", kind_name(*kind), key.render(&BigInt::one())), Evaluand::Zeta(comp), Evaluand::Zeta(x.clone()), -eta.clone()));
    }
    let (eps, certs) = certify_grid(&items, &default_eta())?;
    res.eps = eps;
    res.certificates = certs;
    Ok(res)
}

/// `w = W(phi)(sum_a t_F(h_a) e(1, a, {}))` for a Witt vector over the extension (in its
/// model), with `p^{max(u - u(a), 0)} | h_a` for `w` in `V^u`.
#[derive(Clone, Debug)]
pub struct OverconvResult {
    pub decomposition: DecompositionResult,
    /// The largest `u` with `w` in `V^u` (the length when `w = 0`).
    pub depth: usize,
}

impl OverconvResult {
    pub fn h(&self) -> BTreeMap<Key, PolyZ> {
        self.decomposition.entries.iter().map(|((_, k), f)| (k.clone(), f.clone())).collect()
    }

    /// `p^{max(l - u(a), 0)} | h_a` for all `a`.
    pub fn divisibility_pattern_holds(&self, l: u32) -> bool {
        self.decomposition.fil_criterion(l)
    }
}

pub fn overconv_witt_decompose(w: &WittVec, pres: &EtalePresentation, max_weight: u64, eta: Option<BigRational>) -> Result<OverconvResult> {
    let setup = etale_setup(pres)?;
    if w.ctx.n != setup.target_n || w.ctx.p != pres.p {
        return Err(Error::ContextMismatch);
    }
    let x = DrwElement::from_witt(w);
    let depth = w.v_v().unwrap_or(w.ctx.m);
    let gens = setup.generators(0, w.ctx.m, max_weight);
    let mut res = setup.solve(&x, &gens, |k| (depth as u32).saturating_sub(k.u), max_weight)?;
    let eta = eta.unwrap_or_else(default_eta);
    let b = setup.constants.values.b.clone();
    let target = Evaluand::GammaModel { p: pres.p, coords: w.coords.clone(), images: setup.phi.images.clone(), skip: setup.skip.clone(), b: b.clone() };
    let mut items = vec![];
    for (kind, key) in res.entries.keys() {
        let comp = res.component(*kind, key, &setup.lift)?.to_witt()?;
        items.push((format!("gamma(t_F(h_a) {}) >= gamma(w) - eta", key.render(&BigInt::one())), Evaluand::Gamma { w: comp, b: b.clone() }, target.clone(), -eta.clone()));
    }
    let start = setup.constants.values.delta.clone().unwrap_or_else(default_eta).min(default_eta());
    let (eps, certs) = certify_grid(&items, &start)?;
    res.eps = eps;
    res.certificates = certs;
    Ok(OverconvResult { decomposition: res, depth })
}
