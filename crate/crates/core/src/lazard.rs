//! Frobenius lifts on `W(k)[X]` (truncated to polynomials over `Z`), the Lazard morphisms `s_F`,
//! `t_F`, the defect `v_F = t_F - t_Frob`, and empirical overconvergence estimates for `v_F`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use crate::drwalgebra::DrwElement;
use crate::error::{Error, Result};
use crate::linalg::rank_mod_p;
use crate::poly::{default_names, parse_poly, PolyZ};
use crate::pseudoval::{gamma, zeta, ExtendedReal};
use crate::sample;
use crate::util::{exps_of_degree, mod_u64, subsets};
use crate::wittcore::{unghost, RingContext, WittVec};

/// Element of `W(k)[X]` at finite precision; exact integer coefficients.
pub type LiftPoly = PolyZ;

/// A lift `X_i -> X_i^p + p delta_i` of the Frobenius; `W(k)` is acted on trivially.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobLift {
    pub p: u64,
    pub n: usize,
    pub images: Vec<PolyZ>,
}

impl FrobLift {
    pub fn new(p: u64, images: Vec<PolyZ>) -> Result<Self> {
        let n = images.len();
        for (i, f) in images.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = p as u32;
            if f.n != n || !f.sub(&PolyZ::monomial(n, 1, e)).reduce(p).is_zero() {
                return Err(Error::PreconditionViolated(format!("image of X{} is not X{}^{p} mod p", i + 1, i + 1)));
            }
        }
        Ok(FrobLift { p, n, images })
    }

    /// The lift with `X_i -> X_i^p`.
    pub fn canonical(p: u64, n: usize) -> Self {
        let images = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = p as u32;
                PolyZ::monomial(n, 1, e)
            })
            .collect();
        FrobLift { p, n, images }
    }

    pub fn is_canonical(&self) -> bool {
        *self == Self::canonical(self.p, self.n)
    }

    /// Parse lines `lift p=<p> X<i> -> <poly>`; `#` starts a comment line. Variables not listed
    /// get the canonical image.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::parse_with_names(text, &default_names(n))
    }

    /// As [`FrobLift::parse`], over variables with the given names.
    pub fn parse_with_names(text: &str, names: &[String]) -> Result<Self> {
        let n = names.len();
        let mut p = None;
        let mut images: Vec<Option<PolyZ>> = vec![None; n];
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Syntax { pos: ln + 1, msg: msg.to_string() };
            let rest = line.strip_prefix("lift").ok_or_else(|| bad("expected `lift`"))?.trim_start();
            let rest = rest.strip_prefix("p=").ok_or_else(|| bad("expected `p=`"))?;
            let (pstr, rest) = rest.split_once(char::is_whitespace).ok_or_else(|| bad("missing variable"))?;
            let q: u64 = pstr.parse().map_err(|_| bad("bad prime"))?;
            if p.is_some_and(|x| x != q) {
                return Err(bad("inconsistent primes"));
            }
            p = Some(q);
            let (var, poly) = rest.split_once("->").ok_or_else(|| bad("expected `->`"))?;
            let idx = names.iter().position(|x| x == var.trim()).ok_or_else(|| bad("unknown variable"))?;
            images[idx] = Some(parse_poly(poly.trim(), names).map_err(|e| bad(&e.to_string()))?);
        }
        let p = p.ok_or(Error::Syntax { pos: 0, msg: "no lift lines".into() })?;
        let canon = Self::canonical(p, n);
        let images = images.into_iter().zip(canon.images).map(|(x, c)| x.unwrap_or(c)).collect();
        Self::new(p, images)
    }

    pub fn render(&self) -> String {
        let names = default_names(self.n);
        let mut s = String::from("# wdrw-format 1\n");
        for (i, f) in self.images.iter().enumerate() {
            s += &format!("lift p={} {} -> {}\n", self.p, names[i], f.render(&names));
        }
        s
    }

    /// The ring endomorphism of `Z[X]` extending the generator images.
    pub fn apply(&self, x: &LiftPoly) -> LiftPoly {
        x.substitute(&self.images)
    }

    /// `s_F(x)`: the Witt vector over `Z[X]` with ghost components `x, F(x), ..., F^{m-1}(x)`.
    pub fn s_f(&self, x: &LiftPoly, m: usize) -> Result<Vec<PolyZ>> {
        let mut g = Vec::with_capacity(m);
        let mut cur = x.clone();
        for u in 0..m {
            if u > 0 {
                cur = self.apply(&cur);
            }
            g.push(cur.clone());
        }
        unghost(&g, self.p)
    }

    /// `t_F(x)` in `W_m(k[X])`.
    pub fn t_f(&self, x: &LiftPoly, ctx: RingContext) -> Result<WittVec> {
        let s = self.s_f(x, ctx.m)?;
        Ok(WittVec::from_coords(ctx, s.iter().map(|c| c.reduce(self.p)).collect()))
    }

    /// `v_F(x) = t_F(x) - t_Frob(x)`.
    pub fn v_f(&self, x: &LiftPoly, ctx: RingContext) -> Result<WittVec> {
        let canon = Self::canonical(self.p, self.n);
        self.t_f(x, ctx)?.sub(&canon.t_f(x, ctx)?)
    }

    /// Image of a formal form under the dga map induced by `t_F`.
    pub fn t_f_forms(&self, w: &LiftForm, ctx: RingContext) -> Result<DrwElement> {
        let mut out = DrwElement::zero(ctx, w.degree);
        for (f, gs) in &w.terms {
            let mut acc = DrwElement::from_witt(&self.t_f(f, ctx)?);
            for g in gs {
                acc = acc.mul(&DrwElement::from_witt(&self.t_f(g, ctx)?).d())?;
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    pub fn v_f_forms(&self, w: &LiftForm, ctx: RingContext) -> Result<DrwElement> {
        let canon = Self::canonical(self.p, self.n);
        self.t_f_forms(w, ctx)?.sub(&canon.t_f_forms(w, ctx)?)
    }
}

/// A finite sum `sum f_k dg_{k,1} ... dg_{k,t}` of forms over `Z[X]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftForm {
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<(PolyZ, Vec<PolyZ>)>,
}

impl LiftForm {
    pub fn function(f: PolyZ) -> Self {
        LiftForm { n: f.n, degree: 0, terms: vec![(f, vec![])] }
    }

    pub fn term(f: PolyZ, gs: Vec<PolyZ>) -> Self {
        LiftForm { n: f.n, degree: gs.len(), terms: vec![(f, gs)] }
    }

    /// `X^j dX_{i_1} ... dX_{i_t}`.
    pub fn monomial(n: usize, j: Vec<u32>, idx: &[usize]) -> Self {
        Self::term(PolyZ::monomial(n, 1, j), idx.iter().map(|&i| PolyZ::var(n, i)).collect())
    }

    pub fn add(mut self, o: LiftForm) -> Self {
        assert_eq!(self.degree, o.degree);
        self.terms.extend(o.terms);
        self
    }
}

/// Reduction mod `p` of `t_F` on the spanning set `X^j dX_I` (`|j| <= max_deg`, `#I = t`) of
/// `Omega^t`: whether it agrees with the identity and whether the images are `F_p`-independent.
#[derive(Clone, Debug, Serialize)]
pub struct InjectivityReport {
    pub spanning: usize,
    pub rank: usize,
    pub identity: bool,
}

impl InjectivityReport {
    pub fn injective(&self) -> bool {
        self.identity && self.rank == self.spanning
    }
}

pub fn mod_p_injectivity(f: &FrobLift, t: usize, max_deg: u32) -> Result<InjectivityReport> {
    let ctx = RingContext::new(f.p, f.n, 1)?;
    let canon = FrobLift::canonical(f.p, f.n);
    let idx: Vec<usize> = (0..f.n).collect();
    let mut images = vec![];
    let mut identity = true;
    for d in 0..=max_deg {
        for j in exps_of_degree(f.n, d) {
            for i in subsets(&idx, t) {
                let w = LiftForm::monomial(f.n, j.clone(), &i);
                let x = f.t_f_forms(&w, ctx)?;
                identity &= x == canon.t_f_forms(&w, ctx)?;
                images.push(x);
            }
        }
    }
    let mut keys: Vec<_> = images.iter().flat_map(|x| x.terms.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let rows: Vec<Vec<u64>> = keys
        .iter()
        .map(|k| images.iter().map(|x| x.terms.get(k).map_or(0, |c| mod_u64(c, f.p))).collect())
        .collect();
    let rank = if rows.is_empty() { 0 } else { rank_mod_p(&rows, f.p) };
    Ok(InjectivityReport { spanning: images.len(), rank, identity })
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    /// Largest grid value such that both bounds hold at it and at every smaller grid value.
    pub delta: Option<String>,
    pub mu: String,
    /// Per grid value: number of failed checks, with the first witness.
    pub grid: Vec<(String, usize, Option<String>)>,
}

/// Evaluate the two lower bounds for `v_F` on the grid:
/// `gamma_eps(v_F(X^a)) >= 1 - mu - eps sum b_i a_i` for `|a| <= max_a`, and
/// `gamma_eps(v_F(x)) >= 1 - mu + gamma_eps(x)`, `zeta_eps(v_F(x)) >= 1 - mu + zeta_eps(x)` for
/// `samples` random `x`, where `x` is identified with `t_Frob(x)` and `zeta` uses `b = (1..1)`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_v_f(
    f: &FrobLift,
    grid: &[BigRational],
    b: &[BigRational],
    mu: &BigRational,
    m: usize,
    max_a: u32,
    samples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let ctx = RingContext::new(f.p, f.n, m)?;
    let canon = FrobLift::canonical(f.p, f.n);
    let mut monos = vec![];
    for d in 0..=max_a {
        for a in exps_of_degree(f.n, d) {
            let x = PolyZ::monomial(f.n, 1, a.clone());
            monos.push((a, f.v_f(&x, ctx)?));
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut xs = vec![];
    for _ in 0..samples {
        let x = sample::poly_z(&mut rng, f.n, 4, 3, 3);
        let tx = canon.t_f(&x, ctx)?;
        let vx = f.v_f(&x, ctx)?;
        xs.push((x, tx, vx));
    }
    let base = BigRational::one() - mu;
    let mut rows = vec![];
    let mut delta = None;
    let mut prefix = true;
    let mut sorted = grid.to_vec();
    sorted.sort();
    for eps in &sorted {
        let mut fails = 0;
        let mut wit = None;
        let mut fail = |msg: String| {
            fails += 1;
            wit.get_or_insert(msg);
        };
        for (a, v) in &monos {
            let s: BigRational = a.iter().zip(b).map(|(&j, bi)| bi * BigInt::from(j)).sum();
            let rhs = ExtendedReal::Fin(&base - eps * s);
            let lhs = gamma(v, eps, b);
            if lhs < rhs {
                fail(format!("monomial {a:?}: {lhs} < {rhs}"));
            }
        }
        let names = default_names(f.n);
        for (x, tx, vx) in xs.iter() {
            let lhs = gamma(vx, eps, b);
            let rhs = gamma(tx, eps, b).add_rat(&base);
            if lhs < rhs {
                fail(format!("gamma at {}: {lhs} < {rhs}", x.render(&names)));
            }
            let lhs = zeta(&DrwElement::from_witt(vx), eps);
            let rhs = zeta(&DrwElement::from_witt(tx), eps).add_rat(&base);
            if lhs < rhs {
                fail(format!("zeta at {}: {lhs} < {rhs}", x.render(&names)));
            }
        }
        prefix &= fails == 0;
        if prefix {
            delta = Some(eps.to_string());
        }
        rows.push((eps.to_string(), fails, wit));
    }
    Ok(EstimateReport { delta, mu: mu.to_string(), grid: rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drwbasis::Key;
    use crate::linalg::solve_mod_pk;
    use crate::poly::{pow_u64, PolyFp};
    use crate::pseudoval::rat;
    use proptest::prelude::*;

    fn x(n: usize, i: usize) -> PolyZ {
        PolyZ::var(n, i)
    }

    fn perturbed() -> FrobLift {
        FrobLift::parse("# wdrw-format 1\nlift p=2 X1 -> X1^2 + 2*X1\n", 1).unwrap()
    }

    fn fp(s: &str) -> PolyFp {
        parse_poly(s, &default_names(1)).unwrap().reduce(2)
    }

    #[test]
    fn worked_value() {
        let ctx = RingContext::new(2, 1, 3).unwrap();
        let f = perturbed();
        let w = f.t_f(&x(1, 0), ctx).unwrap();
        assert_eq!(w.coords, vec![fp("X1"), fp("X1"), fp("X1^3 + X1^2 + X1")]);
        let v = f.v_f(&x(1, 0), ctx).unwrap();
        assert_eq!(v.coords, vec![fp("0"), fp("X1"), fp("X1^3 + X1^2 + X1")]);
    }

    #[test]
    fn apply_examples() {
        let f = perturbed();
        let sq = x(1, 0).pow(2);
        let img = x(1, 0).pow(2).add(&x(1, 0).scale(&BigInt::from(2)));
        assert_eq!(f.apply(&sq), img.pow(2));
        assert_eq!(FrobLift::canonical(3, 1).apply(&sq), x(1, 0).pow(6));
        assert!(FrobLift::new(2, vec![x(1, 0).pow(2).add(&x(1, 0))]).is_err());
        assert!(FrobLift::parse("lift p=2 Y -> Y", 1).is_err());
    }

    #[test]
    fn teichmuller_on_monomials() {
        let ctx = RingContext::new(3, 2, 3).unwrap();
        let canon = FrobLift::canonical(3, 2);
        for a in [vec![1, 0], vec![2, 3], vec![0, 0]] {
            let m = PolyZ::monomial(2, 1, a.clone());
            let want = WittVec::teichmuller(ctx, &PolyFp::monomial(2, 3, 1, a));
            assert_eq!(canon.t_f(&m, ctx).unwrap(), want);
        }
        let c = PolyZ::constant(2, 7);
        assert_eq!(canon.t_f(&c, ctx).unwrap(), WittVec::from_int(ctx, &BigInt::from(7)));
        let dx = LiftForm::monomial(2, vec![0, 0], &[0]);
        let want = DrwElement::teich_monomial(ctx, &[1, 0]).d();
        assert_eq!(canon.t_f_forms(&dx, ctx).unwrap(), want);
    }

    #[test]
    fn injective_mod_p() {
        for (f, t) in [(perturbed(), 0), (perturbed(), 1), (FrobLift::canonical(3, 2), 2)] {
            let r = mod_p_injectivity(&f, t, 6).unwrap();
            assert!(r.injective(), "{r:?}");
        }
    }

    /// The Teichmuller images of `X^j dX_I` span the integral part at bounded weight.
    #[test]
    fn integral_part_is_spanned() {
        let (p, n, m, bound) = (2u64, 2usize, 2usize, 3u32);
        let ctx = RingContext::new(p, n, m).unwrap();
        let canon = FrobLift::canonical(p, n);
        let idx: Vec<usize> = (0..n).collect();
        for t in 0..=n {
            let mut images = vec![];
            for d in 0..=bound {
                for j in exps_of_degree(n, d) {
                    for i in subsets(&idx, t) {
                        let w = LiftForm::monomial(n, j.clone(), &i);
                        let img = canon.t_f_forms(&w, ctx).unwrap();
                        assert!(img.terms.keys().all(|k| k.u == 0));
                        images.push(img);
                    }
                }
            }
            let mut keys: Vec<Key> = images.iter().flat_map(|x| x.terms.keys().cloned()).collect();
            keys.sort();
            keys.dedup();
            let q = pow_u64(p, m as u32);
            let a: Vec<Vec<u64>> = keys
                .iter()
                .map(|k| images.iter().map(|x| x.terms.get(k).map_or(0, |c| mod_u64(c, q))).collect())
                .collect();
            for (r, k) in keys.iter().enumerate() {
                let mut b = vec![0; keys.len()];
                b[r] = 1;
                assert!(solve_mod_pk(&a, &b, p, m as u32).is_some(), "{k}");
            }
        }
    }

    #[test]
    fn estimates_for_perturbed_lift() {
        let f = perturbed();
        let grid: Vec<_> = (1..=6).map(|k| rat(1, 1 << k)).collect();
        let r = estimate_v_f(&f, &grid, &[rat(1, 1)], &rat(1, 2), 3, 8, 10, 1).unwrap();
        assert!(r.delta.is_some(), "{r:?}");
        let c = estimate_v_f(&FrobLift::canonical(2, 1), &grid, &[rat(1, 1)], &rat(1, 2), 3, 8, 10, 1).unwrap();
        assert_eq!(c.delta, Some("1/2".into()));
    }

    fn lift_for(seed: u64) -> (FrobLift, RingContext, StdRng) {
        let mut rng = StdRng::seed_from_u64(seed);
        let p = [2, 3][(seed % 2) as usize];
        let n = 1 + (seed / 2 % 2) as usize;
        let m = 1 + (seed / 4 % 3) as usize;
        let images = (0..n)
            .map(|i| {
                let d = sample::poly_z(&mut rng, n, 2, 2, 2);
                let mut e = vec![0; n];
                e[i] = p as u32;
                PolyZ::monomial(n, 1, e).add(&d.scale(&BigInt::from(p)))
            })
            .collect();
        (FrobLift::new(p, images).unwrap(), RingContext::new(p, n, m).unwrap(), rng)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn t_f_is_a_ring_map(seed in any::<u64>()) {
            let (f, ctx, mut rng) = lift_for(seed);
            let a = sample::poly_z(&mut rng, f.n, 2, 3, 3);
            let b = sample::poly_z(&mut rng, f.n, 2, 3, 3);
            let (ta, tb) = (f.t_f(&a, ctx).unwrap(), f.t_f(&b, ctx).unwrap());
            prop_assert_eq!(f.t_f(&a.mul(&b), ctx).unwrap(), ta.mul(&tb).unwrap());
            prop_assert_eq!(f.t_f(&a.add(&b), ctx).unwrap(), ta.add(&tb).unwrap());
            prop_assert_eq!(ta.coords[0].clone(), a.reduce(f.p));
            let s = f.s_f(&a, ctx.m).unwrap();
            let mut cur = a.clone();
            for (u, g) in crate::wittcore::ghost(&s, f.p).into_iter().enumerate() {
                if u > 0 { cur = f.apply(&cur); }
                prop_assert_eq!(g, cur.clone());
            }
        }

        #[test]
        fn v_f_product_formula(seed in any::<u64>()) {
            let (f, ctx, mut rng) = lift_for(seed);
            let canon = FrobLift::canonical(f.p, f.n);
            let a = sample::poly_z(&mut rng, f.n, 2, 3, 3);
            let b = sample::poly_z(&mut rng, f.n, 2, 3, 3);
            let (va, vb) = (f.v_f(&a, ctx).unwrap(), f.v_f(&b, ctx).unwrap());
            let (ta, tb) = (canon.t_f(&a, ctx).unwrap(), canon.t_f(&b, ctx).unwrap());
            let rhs = va.mul(&vb).unwrap().add(&ta.mul(&vb).unwrap()).unwrap().add(&va.mul(&tb).unwrap()).unwrap();
            prop_assert_eq!(f.v_f(&a.mul(&b), ctx).unwrap(), rhs);
            prop_assert!(va.coords[0].is_zero());
        }

        #[test]
        fn v_f_forms_in_fil_one(seed in any::<u64>()) {
            let (f, ctx, mut rng) = lift_for(seed);
            let ctx = RingContext { m: ctx.m.min(2), ..ctx };
            let a = sample::poly_z(&mut rng, f.n, 2, 2, 2);
            let g = sample::poly_z(&mut rng, f.n, 2, 2, 2);
            let w = LiftForm::term(a.clone(), vec![g.clone()]);
            let v = f.v_f_forms(&w, ctx).unwrap();
            prop_assert!(v.truncate(1).is_zero());
            // t_F commutes with d: t_F(d(ag)) = t_F(a dg) + t_F(g da)
            let lhs = f.t_f_forms(&LiftForm::term(PolyZ::one(f.n), vec![a.mul(&g)]), ctx).unwrap();
            let rhs = f.t_f_forms(&w.clone().add(LiftForm::term(g, vec![a])), ctx).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
