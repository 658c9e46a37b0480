//! The pseudovaluations `zeta_eps` on `W_m Omega` and `v_b`, `gamma_{eps,phi,b}` on Witt vectors,
//! the inequality catalogue, and polynomial morphisms acting on the de Rham-Witt complex.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::drwalgebra::DrwElement;
use crate::drwbasis::{min_index, Key};
use crate::error::{Error, Result};
use crate::poly::{pow_u64, PolyFp};
use crate::sample;
use crate::util::{q_to_big, vp_int, Q64};
use crate::wittcore::{RingContext, WittVec};

/// A value in `R u {+inf, -inf}` with rational finite part. The derived order is the usual one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtendedReal {
    NegInf,
    Fin(BigRational),
    PosInf,
}

impl ExtendedReal {
    pub fn int(x: i64) -> Self {
        ExtendedReal::Fin(BigRational::from_integer(x.into()))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Fin(_))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtendedReal::Fin(x) => Some(x),
            _ => None,
        }
    }

    /// Sum; `+inf` absorbs `-inf`, matching the convention `v(0) = +inf` on products with zero.
    pub fn add(&self, o: &Self) -> Self {
        use ExtendedReal::*;
        match (self, o) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Fin(a), Fin(b)) => Fin(a + b),
        }
    }

    pub fn add_rat(&self, r: &BigRational) -> Self {
        self.add(&ExtendedReal::Fin(r.clone()))
    }

    /// Multiplication by a positive rational.
    pub fn scale(&self, r: &BigRational) -> Self {
        assert!(r.is_positive());
        match self {
            ExtendedReal::Fin(a) => ExtendedReal::Fin(a * r),
            x => x.clone(),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => write!(f, "-inf"),
            ExtendedReal::PosInf => write!(f, "+inf"),
            ExtendedReal::Fin(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The rate `eps` and the radii `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsParams {
    pub eps: BigRational,
    pub b: Vec<BigRational>,
}

impl EpsParams {
    pub fn new(eps: BigRational, b: Vec<BigRational>) -> Result<Self> {
        if !eps.is_positive() || b.iter().any(|x| !x.is_positive()) {
            return Err(Error::PreconditionViolated("eps and radii must be positive".into()));
        }
        Ok(EpsParams { eps, b })
    }

    pub fn unit(eps: BigRational, n: usize) -> Self {
        EpsParams { eps, b: vec![BigRational::one(); n] }
    }
}

/// `m(b, c) = min c_i / b_i`.
pub fn radii_min(b: &[BigRational], c: &[BigRational]) -> BigRational {
    b.iter().zip(c).map(|(x, y)| y / x).min().expect("nonempty radii")
}

/// `M(b, c) = max c_i / b_i`.
pub fn radii_max(b: &[BigRational], c: &[BigRational]) -> BigRational {
    b.iter().zip(c).map(|(x, y)| y / x).max().expect("nonempty radii")
}

/// Value of `zeta_eps` on the single term `e(eta, a, I)`.
pub fn zeta_term(key: &Key, eta: &BigInt, n: usize, p: u64, eps: &BigRational) -> ExtendedReal {
    let Some(v) = vp_int(eta, p) else { return ExtendedReal::PosInf };
    let mult = key.parts.len() as i64 + key.i0_nonempty(p) as i64;
    let x = BigRational::from_integer(BigInt::from(2 * n as i64 * v as i64 + mult * key.u as i64))
        - eps * q_to_big(&key.wt);
    ExtendedReal::Fin(x)
}

/// `zeta_eps` on the canonical decomposition.
pub fn zeta(x: &DrwElement, eps: &BigRational) -> ExtendedReal {
    x.terms
        .iter()
        .map(|(k, c)| zeta_term(k, c, x.ctx.n, x.ctx.p, eps))
        .min()
        .unwrap_or(ExtendedReal::PosInf)
}

/// `v_b(P) = min -sum b_i j_i` over the monomials of `P`.
pub fn v_weighted(poly: &PolyFp, b: &[BigRational]) -> ExtendedReal {
    poly.terms
        .keys()
        .map(|e| {
            let s: BigRational = e.iter().zip(b).map(|(&j, bi)| bi * BigInt::from(j)).sum();
            ExtendedReal::Fin(-s)
        })
        .min()
        .unwrap_or(ExtendedReal::PosInf)
}

/// A `gamma` value; `exact` is false when it is a lower bound computed from chosen preimages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaValue {
    pub value: ExtendedReal,
    pub exact: bool,
}

fn gamma_coords(coords: &[PolyFp], p: u64, eps: &BigRational, b: &[BigRational]) -> ExtendedReal {
    coords
        .iter()
        .enumerate()
        .map(|(u, w)| {
            let s = eps / BigRational::from_integer(pow_u64(p, u as u32).into());
            match v_weighted(w, b) {
                ExtendedReal::PosInf => ExtendedReal::PosInf,
                v => v.scale(&s).add_rat(&BigRational::from_integer((u as i64).into())),
            }
        })
        .min()
        .unwrap_or(ExtendedReal::PosInf)
}

/// `gamma_{eps, id, b}` on a truncated Witt vector over the polynomial ring; exact.
pub fn gamma(w: &WittVec, eps: &BigRational, b: &[BigRational]) -> ExtendedReal {
    gamma_coords(&w.coords, w.ctx.p, eps, b)
}

/// `gamma_{eps, phi, b}` for a Witt vector over a quotient `phi: k[X] -> R`, given by chosen
/// preimages of its coordinates. Since `v_{phi,b}` is a sup over preimages, the result is a lower
/// bound unless `phi` is the identity.
pub fn gamma_presented(preimages: &[PolyFp], p: u64, eps: &BigRational, b: &[BigRational], identity: bool) -> GammaValue {
    GammaValue { value: gamma_coords(preimages, p, eps, b), exact: identity }
}

#[derive(Clone, Debug, Serialize)]
pub struct OverconvergenceReport {
    pub is_overconvergent_trivially: bool,
    pub slopes: Vec<(String, ExtendedReal)>,
}

/// Finite elements are overconvergent; tabulate `zeta_eps` on the grid.
pub fn overconvergence_report(x: &DrwElement, grid: &[BigRational]) -> OverconvergenceReport {
    OverconvergenceReport {
        is_overconvergent_trivially: true,
        slopes: grid.iter().map(|e| (e.to_string(), zeta(x, e))).collect(),
    }
}

/// A morphism `k[X_1..X_n] -> k[Y_1..Y_r]` given by the images of the variables.
#[derive(Clone, Debug)]
pub struct PolyMorphism {
    pub images: Vec<PolyFp>,
    pub target_n: usize,
}

impl PolyMorphism {
    pub fn new(images: Vec<PolyFp>, target_n: usize) -> Self {
        PolyMorphism { images, target_n }
    }

    /// `M`: the largest degree of an image.
    pub fn max_degree(&self) -> u32 {
        self.images.iter().filter_map(|f| f.degree()).max().unwrap_or(0)
    }

    fn power(&self, a: &[Q64], idx: &[usize], scale: Q64, p: u64) -> PolyFp {
        let mut out = PolyFp::one(self.target_n, p);
        for &i in idx {
            let e = a[i] * scale;
            debug_assert!(e.is_integer());
            out = out.mul(&self.images[i].with_modulus(p).pow(e.to_integer()));
        }
        out
    }

    /// Image of one basic Witt differential at level `ctx.m` of the target.
    fn image_term(&self, key: &Key, eta: &BigInt, ctx: RingContext) -> Result<DrwElement> {
        let p = ctx.p;
        let m = ctx.m as i64;
        if key.u > 0 && !key.i0_nonempty(p) {
            let mn = min_index(&key.a, p).unwrap();
            let parts: Vec<usize> = key.parts.iter().copied().filter(|&i| i != mn).collect();
            let inner = Key::new(key.a.clone(), parts, p)?;
            return Ok(self.image_term(&inner, eta, ctx)?.d());
        }
        let segs = key.segments(p);
        let pq = |k: i64| {
            if k >= 0 {
                Q64::from_integer(pow_u64(p, k as u32))
            } else {
                Q64::new(1, pow_u64(p, (-k) as u32))
            }
        };
        let u = key.u as i64;
        let mut acc = if segs[0].is_empty() {
            DrwElement::from_int(ctx, eta)
        } else if m - u <= 0 {
            return Ok(DrwElement::zero(ctx, key.degree()));
        } else {
            let base = ctx.with_len((m - u) as usize);
            let mut t = DrwElement::teich(base, &self.power(&key.a, &segs[0], pq(u), p)).scale_int(eta);
            for _ in 0..u {
                t = t.verschiebung();
            }
            t
        };
        for seg in &segs[1..] {
            let sub: Vec<Q64> = (0..key.a.len())
                .map(|i| if seg.contains(&i) { key.a[i] } else { Q64::zero() })
                .collect();
            let uj = crate::drwbasis::u_weight(&sub, p) as i64;
            let vj = crate::drwbasis::vp_weight(&sub, p).unwrap() as i64;
            let factor = if uj > 0 {
                if m - uj <= 0 {
                    return Ok(DrwElement::zero(ctx, key.degree()));
                }
                let base = ctx.with_len((m - uj) as usize);
                let mut t = DrwElement::teich(base, &self.power(&key.a, seg, pq(uj), p));
                for _ in 0..uj {
                    t = t.verschiebung();
                }
                t.d()
            } else {
                let base = ctx.with_len((m + vj) as usize);
                let mut t = DrwElement::teich(base, &self.power(&key.a, seg, pq(-vj), p)).d();
                for _ in 0..vj {
                    t = t.frobenius()?;
                }
                t
            };
            acc = acc.mul(&factor)?;
        }
        Ok(acc)
    }

    /// The induced map `W_m Omega_{k[X]} -> W_m Omega_{k[Y]}`.
    pub fn apply(&self, x: &DrwElement) -> Result<DrwElement> {
        if self.images.len() != x.ctx.n {
            return Err(Error::ContextMismatch);
        }
        let ctx = RingContext { n: self.target_n, ..x.ctx };
        let mut out = DrwElement::zero(ctx, x.degree);
        for (k, c) in &x.terms {
            out = out.add(&self.image_term(k, c, ctx)?)?;
        }
        Ok(out)
    }
}

/// The three morphisms of the functoriality check: `X -> Y^3`, `(X1, X2) -> (Y^2, Y + 1)` and
/// `X -> Y1 Y2 + Y1`.
pub fn catalogue_morphisms(p: u64) -> Vec<(&'static str, PolyMorphism)> {
    let y = |n: usize, i: usize| PolyFp::var(n, p, i);
    vec![
        ("cube", PolyMorphism::new(vec![y(1, 0).pow(3)], 1)),
        ("plane", PolyMorphism::new(vec![y(1, 0).pow(2), y(1, 0).add(&PolyFp::one(1, p))], 1)),
        ("product", PolyMorphism::new(vec![y(2, 0).mul(&y(2, 1)).add(&y(2, 0))], 2)),
    ]
}

/// Outcome of running one catalogue inequality on a sample set.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: usize,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sampling parameters for [`check_inequality`].
#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub max_vars: usize,
    pub max_len: usize,
}

impl SampleSpec {
    pub fn new(count: usize, seed: u64) -> Self {
        SampleSpec { count, seed, primes: vec![2, 3], max_vars: 2, max_len: 3 }
    }
}

pub const INEQUALITIES: &[&str] = &[
    "zeta-axioms",
    "gamma-axioms",
    "zeta-p-shift",
    "gamma-p-shift",
    "zeta-d",
    "gamma-verschiebung",
    "sandwich",
    "radii",
    "p-adic-series",
    "functoriality-cube",
    "functoriality-plane",
    "functoriality-product",
];

fn sample_eps<R: Rng>(rng: &mut R) -> BigRational {
    [rat(1, 4), rat(1, 3), rat(1, 2), rat(1, 1), rat(5, 2)][rng.gen_range(0..5)].clone()
}

fn sample_radii<R: Rng>(rng: &mut R, n: usize) -> Vec<BigRational> {
    (0..n).map(|_| rat(rng.gen_range(1..=6), rng.gen_range(1..=3))).collect()
}

fn sample_ctx<R: Rng>(rng: &mut R, spec: &SampleSpec) -> RingContext {
    let p = spec.primes[rng.gen_range(0..spec.primes.len())];
    RingContext::new(p, rng.gen_range(1..=spec.max_vars), rng.gen_range(1..=spec.max_len)).unwrap()
}

fn sample_form<R: Rng>(rng: &mut R, ctx: RingContext, terms: usize) -> DrwElement {
    let t = rng.gen_range(0..=ctx.n.min(2));
    sample::element(rng, ctx, t, 4, terms)
}

fn ge(name: &str, lhs: &ExtendedReal, rhs: &ExtendedReal, witness: impl Fn() -> String, out: &mut Vec<String>) {
    if lhs < rhs {
        out.push(format!("{name}: {lhs} < {rhs} at {}", witness()));
    }
}

fn eq(name: &str, lhs: &ExtendedReal, rhs: &ExtendedReal, witness: impl Fn() -> String, out: &mut Vec<String>) {
    if lhs != rhs {
        out.push(format!("{name}: {lhs} != {rhs} at {}", witness()));
    }
}

fn show(x: &DrwElement) -> String {
    format!("[{}]", x.render_lines().join(" + "))
}

fn show_w(w: &WittVec) -> String {
    let names = crate::poly::default_names(w.ctx.n);
    let c: Vec<String> = w.coords.iter().map(|c| c.render(&names)).collect();
    format!("({})", c.join(", "))
}

fn pad(w: &WittVec) -> WittVec {
    let mut coords = w.coords.clone();
    coords.push(PolyFp::zero(w.ctx.n, w.ctx.p));
    WittVec::from_coords(w.ctx.with_len(w.ctx.m + 1), coords)
}

/// Verify a named inequality of the catalogue exactly on `spec.count` random samples.
pub fn check_inequality(name: &str, spec: &SampleSpec) -> Result<InequalityReport> {
    if !INEQUALITIES.contains(&name) {
        return Err(Error::UnknownInequality(name.to_string()));
    }
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let mut bad = vec![];
    let mut checked = 0;
    for _ in 0..spec.count {
        let ctx = sample_ctx(&mut rng, spec);
        let eps = sample_eps(&mut rng);
        let p = ctx.p;
        let n = ctx.n;
        let two_n = BigRational::from_integer(BigInt::from(2 * n));
        match name {
            "zeta-axioms" => {
                let x = sample_form(&mut rng, ctx, 3);
                let y = sample::element(&mut rng, ctx, x.degree, 4, 3);
                let z = sample::element(&mut rng, ctx, 0, 4, 3);
                let w = || format!("x={} y={} z={} eps={eps}", show(&x), show(&y), show(&z));
                eq(name, &zeta(&DrwElement::zero(ctx, 0), &eps), &ExtendedReal::PosInf, w, &mut bad);
                eq(name, &zeta(&DrwElement::one(ctx), &eps), &ExtendedReal::int(0), w, &mut bad);
                eq(name, &zeta(&x.neg(), &eps), &zeta(&x, &eps), w, &mut bad);
                let (zx, zy, zz) = (zeta(&x, &eps), zeta(&y, &eps), zeta(&z, &eps));
                ge(name, &zeta(&x.add(&y)?, &eps), &zx.clone().min(zy), w, &mut bad);
                ge(name, &zeta(&x.mul(&z)?, &eps), &zx.add(&zz), w, &mut bad);
            }
            "gamma-axioms" => {
                let b = sample_radii(&mut rng, n);
                let x = sample::witt_vec(&mut rng, ctx, 4, 3);
                let y = sample::witt_vec(&mut rng, ctx, 4, 3);
                let w = || format!("x={} y={} eps={eps}", show_w(&x), show_w(&y));
                eq(name, &gamma(&WittVec::zero(ctx), &eps, &b), &ExtendedReal::PosInf, w, &mut bad);
                eq(name, &gamma(&WittVec::one(ctx), &eps, &b), &ExtendedReal::int(0), w, &mut bad);
                eq(name, &gamma(&x.neg(), &eps, &b), &gamma(&x, &eps, &b), w, &mut bad);
                let (gx, gy) = (gamma(&x, &eps, &b), gamma(&y, &eps, &b));
                ge(name, &gamma(&x.add(&y)?, &eps, &b), &gx.clone().min(gy.clone()), w, &mut bad);
                ge(name, &gamma(&x.mul(&y)?, &eps, &b), &gx.add(&gy), w, &mut bad);
            }
            "zeta-p-shift" => {
                let x = sample_form(&mut rng, ctx, 3);
                let px = x.lift_reps(ctx.m + 1).scale_int(&BigInt::from(p));
                let w = || format!("x={} eps={eps}", show(&x));
                eq(name, &zeta(&px, &eps), &zeta(&x, &eps).add_rat(&two_n), w, &mut bad);
            }
            "gamma-p-shift" => {
                let b = sample_radii(&mut rng, n);
                let x = pad(&sample::witt_vec(&mut rng, ctx, 4, 3));
                let px = x.scale_int(&BigInt::from(p));
                let w = || format!("x={} eps={eps}", show_w(&x));
                eq(name, &gamma(&px, &eps, &b), &gamma(&x, &eps, &b).add_rat(&BigRational::one()), w, &mut bad);
            }
            "zeta-d" => {
                let x = sample_form(&mut rng, ctx, 3);
                let w = || format!("x={} eps={eps}", show(&x));
                ge(name, &zeta(&x.d(), &eps), &zeta(&x, &eps), w, &mut bad);
            }
            "gamma-verschiebung" => {
                let b = sample_radii(&mut rng, n);
                let x = sample::witt_vec(&mut rng, ctx, 4, 3);
                let u = rng.gen_range(0..=2u32);
                let mut vx = x.clone();
                for _ in 0..u {
                    vx = vx.verschiebung();
                }
                let e2 = &eps / BigRational::from_integer(pow_u64(p, u).into());
                let rhs = gamma(&x, &e2, &b).add_rat(&BigRational::from_integer(u.into()));
                let w = || format!("x={} u={u} eps={eps}", show_w(&x));
                eq(name, &gamma(&vx, &eps, &b), &rhs, w, &mut bad);
            }
            "sandwich" => {
                let x = sample::witt_vec(&mut rng, ctx, 4, 3);
                let ones = vec![BigRational::one(); n];
                let z = zeta(&DrwElement::from_witt(&x), &eps);
                let upper = gamma(&x, &(&eps / &two_n), &ones).scale(&two_n);
                let w = || format!("x={} eps={eps}", show_w(&x));
                ge(name, &upper, &z, w, &mut bad);
                ge(name, &z, &gamma(&x, &eps, &ones), w, &mut bad);
            }
            "radii" => {
                let b = sample_radii(&mut rng, n);
                let c = sample_radii(&mut rng, n);
                let x = sample::witt_vec(&mut rng, ctx, 4, 3);
                let (lo, hi) = (radii_min(&b, &c), radii_max(&b, &c));
                let mid = gamma(&x, &eps, &c);
                let w = || format!("x={} eps={eps}", show_w(&x));
                ge(name, &gamma(&x, &(&lo * &eps), &b), &mid, w, &mut bad);
                ge(name, &mid, &gamma(&x, &(&hi * &eps), &b), w, &mut bad);
            }
            "p-adic-series" => {
                let terms: Vec<DrwElement> = (0..3)
                    .map(|j| sample::element(&mut rng, ctx, 0, 4, 2).scale_int(&BigInt::from(pow_u64(p, j))))
                    .collect();
                let bound = terms.iter().map(|t| zeta(t, &eps)).min().unwrap();
                let mut sum = DrwElement::zero(ctx, 0);
                for t in &terms {
                    sum = sum.add(t)?;
                }
                let w = || format!("sum={} eps={eps}", show(&sum));
                ge(name, &zeta(&sum, &eps), &bound, w, &mut bad);
            }
            _ => {
                let which = name.trim_start_matches("functoriality-");
                let (_, phi) = catalogue_morphisms(p).into_iter().find(|(k, _)| *k == which).unwrap();
                let src = RingContext::new(p, phi.images.len(), rng.gen_range(1..=spec.max_len.min(2))).unwrap();
                let n2 = BigRational::from_integer(BigInt::from(2 * src.n));
                let t = rng.gen_range(0..=src.n.min(1));
                let x = sample::element(&mut rng, src, t, 3, 2);
                let y = phi.apply(&x)?;
                let big_m = BigRational::from_integer(BigInt::from(phi.max_degree()));
                let rhs = match zeta(&x, &(&eps * &n2 * &big_m)) {
                    ExtendedReal::Fin(r) => ExtendedReal::Fin(r / &n2),
                    v => v,
                };
                let w = || format!("x={} eps={eps}", show(&x));
                ge(name, &zeta(&y, &eps), &rhs, w, &mut bad);
            }
        }
        checked += 1;
    }
    Ok(InequalityReport { name: name.into(), samples: spec.count, checked, violations: bad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drwbasis::Key;

    fn ctx(p: u64, n: usize, m: usize) -> RingContext {
        RingContext::new(p, n, m).unwrap()
    }

    #[test]
    fn zeta_examples() {
        let c = ctx(2, 1, 3);
        let eps = rat(1, 4);
        let x3 = DrwElement::teich_monomial(c, &[3]);
        assert_eq!(zeta(&x3, &eps), ExtendedReal::Fin(rat(-3, 4)));
        let vx = DrwElement::teich_monomial(c.with_len(2), &[1]).verschiebung();
        assert_eq!(zeta(&vx, &eps), ExtendedReal::Fin(rat(7, 8)));
        assert_eq!(zeta(&DrwElement::zero(c, 1), &eps), ExtendedReal::PosInf);
    }

    #[test]
    fn v_weighted_examples() {
        let x2y = PolyFp::monomial(2, 2, 1, vec![2, 1]);
        assert_eq!(v_weighted(&x2y, &[rat(1, 1), rat(1, 1)]), ExtendedReal::int(-3));
        let s = PolyFp::var(2, 2, 0).add(&PolyFp::var(2, 2, 1));
        assert_eq!(v_weighted(&s, &[rat(2, 1), rat(3, 1)]), ExtendedReal::int(-3));
        assert_eq!(v_weighted(&PolyFp::zero(2, 2), &[rat(1, 1), rat(1, 1)]), ExtendedReal::PosInf);
    }

    #[test]
    fn gamma_examples() {
        let c = ctx(2, 1, 2);
        let eps = rat(1, 3);
        let one = [rat(1, 1)];
        let x = WittVec::teichmuller(c, &PolyFp::var(1, 2, 0));
        assert_eq!(gamma(&x, &eps, &one), ExtendedReal::Fin(rat(-1, 3)));
        assert_eq!(gamma(&x.verschiebung(), &eps, &one), ExtendedReal::Fin(rat(5, 6)));
        let g = gamma_presented(&x.coords, 2, &eps, &one, false);
        assert!(!g.exact);
    }

    #[test]
    fn report_examples() {
        let c = ctx(2, 1, 4);
        let grid = [rat(1, 4), rat(1, 2)];
        let r = overconvergence_report(&DrwElement::zero(c, 0), &grid);
        assert!(r.slopes.iter().all(|(_, v)| *v == ExtendedReal::PosInf));
        let mut x = DrwElement::zero(c, 0);
        for j in 0..3u32 {
            let t = DrwElement::teich_monomial(c, &[1 << j]).scale_int(&BigInt::from(1 << j));
            x = x.add(&t).unwrap();
        }
        // terms 2n j - eps 2^j with n = 1: at eps = 1/2 the values are -1/2, 1, 2
        assert_eq!(zeta(&x, &rat(1, 2)), ExtendedReal::Fin(rat(-1, 2)));
        assert_eq!(zeta(&x, &rat(4, 1)), ExtendedReal::int(-12));
    }

    #[test]
    fn identity_morphism_is_identity() {
        let mut rng = StdRng::seed_from_u64(3);
        for p in [2, 3] {
            for n in 1..=2 {
                let c = ctx(p, n, 2);
                let id = PolyMorphism::new((0..n).map(|i| PolyFp::var(n, p, i)).collect(), n);
                for t in 0..=n {
                    let x = sample::element(&mut rng, c, t, 4, 3);
                    assert_eq!(id.apply(&x).unwrap(), x);
                }
            }
        }
    }

    #[test]
    fn morphism_is_a_dga_map() {
        let mut rng = StdRng::seed_from_u64(5);
        let c = ctx(2, 2, 2);
        let (_, phi) = catalogue_morphisms(2).into_iter().nth(1).unwrap();
        for _ in 0..5 {
            let x = sample::element(&mut rng, c, 0, 3, 2);
            let y = sample::element(&mut rng, c, 1, 3, 2);
            assert_eq!(phi.apply(&x.d()).unwrap(), phi.apply(&x).unwrap().d());
            let lhs = phi.apply(&x.mul(&y).unwrap()).unwrap();
            assert_eq!(lhs, phi.apply(&x).unwrap().mul(&phi.apply(&y).unwrap()).unwrap());
        }
    }

    #[test]
    fn unknown_inequality() {
        assert!(matches!(check_inequality("nope", &SampleSpec::new(1, 0)), Err(Error::UnknownInequality(_))));
    }

    #[test]
    fn catalogue_passes() {
        for name in INEQUALITIES {
            let r = check_inequality(name, &SampleSpec::new(12, 17)).unwrap();
            assert!(r.passed(), "{:?}", r.violations);
        }
    }

    #[test]
    fn key_term_value() {
        let k = Key::new(vec![Q64::new(1, 2)], vec![0], 2).unwrap();
        assert_eq!(zeta_term(&k, &BigInt::from(2), 1, 2, &rat(1, 1)), ExtendedReal::Fin(rat(5, 2)));
    }
}
