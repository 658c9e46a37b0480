//! Mod-p rewriting of integral basic differentials and the splitting of
//! `Ker(W_{m+1} Omega^t / p -> W_m Omega^t / p)` over a perfect base.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::DrwElement;
use crate::drwbasis::{sorted_support, support, u_weight, Key, WeightFn};
use crate::error::{Error, Result};
use crate::linalg::{rank_mod_p, rank_rational, solve_mod_pk, solve_rational_rect};
use crate::oracle::{embed_key, ModelForm};
use crate::poly::{pow_u64, PolyFp};
use crate::util::{binomial, mod_u64, rat_mod, subsets, Q64};
use crate::wittcore::RingContext;

/// A term `[X^{p^u c}] e(1, a, I)`, indexed by `(c, (a, I))`.
pub type RewriteIndex = (Vec<u32>, Key);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewriting {
    pub u: u32,
    /// Coefficients mod p, zero entries omitted.
    pub terms: BTreeMap<RewriteIndex, u64>,
    /// The unique coefficients in `Z_(p)`.
    pub exact: BTreeMap<RewriteIndex, BigRational>,
    /// Size of the family the target is written in.
    pub basis_size: usize,
}

fn qi(x: u32) -> Q64 {
    Q64::from_integer(x as u64)
}

fn int_weight(b: &[u32]) -> WeightFn {
    b.iter().map(|&x| qi(x)).collect()
}

/// Which of the three obstructions to being reduced hold for `(a, I)` and `u`.
pub fn violated_conditions(key: &Key, u: u32, p: u64) -> [bool; 3] {
    let pu = Q64::from_integer(pow_u64(p, u));
    let segs = key.segments(p);
    let c1 = key.a.iter().any(|x| *x > pu);
    let c2 = segs[0].iter().any(|&i| key.a[i] == pu);
    let c3 = segs[1..].iter().any(|s| s.len() >= 2 && s.iter().any(|&i| key.a[i] == pu));
    [c1, c2, c3]
}

fn is_reduced(key: &Key, u: u32, p: u64) -> bool {
    violated_conditions(key, u, p).iter().all(|x| !x)
}

/// Partitions of `a` of size `t` with `I_0` nonempty.
fn partitions_i0(a: &WeightFn, t: usize, p: u64) -> Vec<Key> {
    let sup = sorted_support(a, p);
    if sup.is_empty() {
        return if t == 0 { vec![Key::new(a.clone(), vec![], p).unwrap()] } else { vec![] };
    }
    subsets(&sup[1..], t).into_iter().map(|i| Key::new(a.clone(), i, p).unwrap()).collect()
}

fn coords(f: &ModelForm, b: &WeightFn, rows: &[Vec<usize>]) -> Vec<BigRational> {
    rows.iter()
        .map(|s| f.terms.get(&(b.clone(), s.clone())).cloned().unwrap_or_else(BigRational::zero))
        .collect()
}

fn image(p: u64, u: u32, c: &[u32], key: &Key) -> ModelForm {
    let pu = pow_u64(p, u);
    let shift: WeightFn = c.iter().map(|&x| Q64::from_integer(x as u64 * pu)).collect();
    let mono = ModelForm::monomial(p, shift, vec![], BigRational::one());
    mono.mul(&embed_key(key, p))
}

fn shift_b(b: &[u32], i: usize, pu: u64) -> Option<Vec<u32>> {
    if (b[i] as u64) < pu {
        return None;
    }
    let mut b2 = b.to_vec();
    b2[i] -= pu as u32;
    Some(b2)
}

fn vp_zero(b: &[u32], p: u64) -> bool {
    b.iter().any(|&x| x as u64 % p != 0)
}

struct Rewriter {
    p: u64,
    u: u32,
    t: usize,
    memo: HashMap<Key, BTreeMap<RewriteIndex, BigRational>>,
}

impl Rewriter {
    /// Follows the induction on `|b|`: one step writes `e(1, b, L)` through reduced partitions of
    /// `b` and terms `[X_i^{p^u}] e(1, b - p^u chi_i, L'')`, the second kind being rewritten
    /// recursively.
    fn rec(&mut self, b: &[u32], key: &Key) -> Result<BTreeMap<RewriteIndex, BigRational>> {
        if let Some(r) = self.memo.get(key) {
            return Ok(r.clone());
        }
        let (p, u, t) = (self.p, self.u, self.t);
        let n = b.len();
        let mut out = BTreeMap::new();
        if is_reduced(key, u, p) {
            out.insert((vec![0; n], key.clone()), BigRational::one());
            self.memo.insert(key.clone(), out.clone());
            return Ok(out);
        }
        let pu = pow_u64(p, u);
        let bw = int_weight(b);
        let mut cols: Vec<(Vec<u32>, Key)> = vec![];
        for k in partitions_i0(&bw, t, p) {
            if is_reduced(&k, u, p) {
                cols.push((vec![0; n], k));
            }
        }
        for i in 0..n {
            let Some(b2) = shift_b(b, i, pu) else { continue };
            if !vp_zero(&b2, p) {
                continue;
            }
            let mut c = vec![0; n];
            c[i] = 1;
            for k in partitions_i0(&int_weight(&b2), t, p) {
                cols.push((c.clone(), k));
            }
        }
        let rows = subsets(&support(&bw), t);
        let mat_cols: Vec<Vec<BigRational>> =
            cols.iter().map(|(c, k)| coords(&image(p, u, c, k), &bw, &rows)).collect();
        let mat: Vec<Vec<BigRational>> =
            (0..rows.len()).map(|r| mat_cols.iter().map(|col| col[r].clone()).collect()).collect();
        let rhs = coords(&embed_key(key, p), &bw, &rows);
        let sol = solve_rational_rect(&mat, &rhs)
            .ok_or_else(|| Error::NonIntegralResult(format!("no rewriting step for {key}")))?;
        for ((c, k), x) in cols.into_iter().zip(sol) {
            if x.is_zero() {
                continue;
            }
            if c.iter().all(|&v| v == 0) {
                *out.entry((c, k)).or_insert_with(BigRational::zero) += x;
                continue;
            }
            let b2: Vec<u32> = b.iter().zip(&c).map(|(&bi, &ci)| bi - ci * pu as u32).collect();
            debug_assert_eq!(int_weight(&b2), k.a);
            for ((c2, k2), y) in self.rec(&b2, &k)? {
                let cc: Vec<u32> = c.iter().zip(&c2).map(|(x, y)| x + y).collect();
                *out.entry((cc, k2)).or_insert_with(BigRational::zero) += &x * y;
            }
        }
        out.retain(|_, v| !v.is_zero());
        self.memo.insert(key.clone(), out.clone());
        Ok(out)
    }
}

/// The reduced family for `b`: `[X^{p^u c}] e(1, a, I)` with `b = a + p^u c`, `v_p(a) = 0`,
/// `I_0` nonempty, `#I = t`, and none of the three obstructions.
pub fn reduced_family(b: &[u32], t: usize, u: u32, p: u64) -> Vec<RewriteIndex> {
    let pu = pow_u64(p, u) as u32;
    let mut choices: Vec<Vec<u32>> = vec![];
    for &bi in b {
        let r = bi % pu;
        choices.push(if bi == 0 {
            vec![0]
        } else if r != 0 {
            vec![r]
        } else {
            vec![0, pu]
        });
    }
    let mut out = vec![];
    let mut stack: Vec<Vec<u32>> = vec![vec![]];
    for ch in &choices {
        stack = stack
            .into_iter()
            .flat_map(|pre| ch.iter().map(move |&x| [pre.clone(), vec![x]].concat()))
            .collect();
    }
    for a in stack {
        if !vp_zero(&a, p as u64) {
            continue;
        }
        let c: Vec<u32> = b.iter().zip(&a).map(|(bi, ai)| (bi - ai) / pu).collect();
        for k in partitions_i0(&int_weight(&a), t, p) {
            if is_reduced(&k, u, p) {
                out.push((c.clone(), k));
            }
        }
    }
    out.sort();
    out
}

/// Rewrite `e(eta, b, L)` as a combination of reduced terms `[X^{p^u c}] e(eta, a, I)`.
/// The identity holds exactly over `Z_(p)`; `terms` holds it mod p.
pub fn rewrite_mod_p(eta: &BigInt, b: &[u32], l: &[usize], u: u32, p: u64) -> Result<Rewriting> {
    if u == 0 {
        return Err(Error::PreconditionViolated("u must be at least 1".into()));
    }
    if !vp_zero(b, p) {
        return Err(Error::PreconditionViolated("v_p(b) must be 0".into()));
    }
    let bw = int_weight(b);
    let key = Key::new(bw.clone(), l.to_vec(), p)?;
    if !key.i0_nonempty(p) {
        return Err(Error::PreconditionViolated("L_0 must be nonempty".into()));
    }
    let t = key.degree();
    let mut rw = Rewriter { p, u, t, memo: HashMap::new() };
    let via_induction = rw.rec(b, &key)?;

    let family = reduced_family(b, t, u, p);
    let rows = subsets(&support(&bw), t);
    let mat_cols: Vec<Vec<BigRational>> = family.iter().map(|(c, k)| coords(&image(p, u, c, k), &bw, &rows)).collect();
    let mat: Vec<Vec<BigRational>> =
        (0..rows.len()).map(|r| mat_cols.iter().map(|col| col[r].clone()).collect()).collect();
    if rank_rational(&mat) != family.len() {
        return Err(Error::NonIntegralResult("reduced family is not free".into()));
    }
    let sol = solve_rational_rect(&mat, &coords(&embed_key(&key, p), &bw, &rows))
        .ok_or_else(|| Error::NonIntegralResult("target outside the reduced span".into()))?;
    let eta_q = BigRational::from_integer(eta.clone());
    let mut exact = BTreeMap::new();
    let mut terms = BTreeMap::new();
    for (idx, x) in family.iter().zip(sol) {
        if x.is_zero() {
            continue;
        }
        if via_induction.get(idx) != Some(&x) {
            return Err(Error::NonIntegralResult(format!("induction disagrees at {}", idx.1)));
        }
        let v = &x * &eta_q;
        let r = rat_mod(&v, p, 1).ok_or_else(|| Error::NonIntegralResult(format!("coefficient {v} not p-integral")))?;
        if !r.is_zero() {
            terms.insert(idx.clone(), mod_u64(&r, p));
        }
        exact.insert(idx.clone(), v);
    }
    if via_induction.len() != exact.len() {
        return Err(Error::NonIntegralResult("induction produced extra terms".into()));
    }
    Ok(Rewriting { u, terms, exact, basis_size: family.len() })
}

impl Rewriting {
    /// `sum_T coeff [X^{p^u c}] e(1, a, I)` at level `ctx.m`, with the mod-p coefficients.
    pub fn expand(&self, ctx: RingContext) -> Result<DrwElement> {
        let pu = pow_u64(ctx.p, self.u) as u32;
        let mut out: Option<DrwElement> = None;
        for ((c, k), &x) in &self.terms {
            let shift: Vec<u32> = c.iter().map(|&v| v * pu).collect();
            let term = DrwElement::teich_monomial(ctx, &shift)
                .mul(&DrwElement::from_term(ctx, k.degree(), k.clone(), BigInt::from(x)))?;
            out = Some(match out {
                None => term,
                Some(o) => o.add(&term)?,
            });
        }
        Ok(out.unwrap_or_else(|| DrwElement::zero(ctx, 0)))
    }
}

/// Generator kinds of the kernel splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenKind {
    /// Products `prod d[X_i]`.
    H,
    /// Pure fractional generators.
    G,
    /// Differentials of pure fractional generators of degree one less.
    DG,
}

/// A generator `[X^mult] e` (or `d([X^mult] e)`) lying over a weight slice.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SliceGen {
    pub kind: GenKind,
    pub key: Key,
    pub mult: Vec<u32>,
}

impl SliceGen {
    /// `[X^mult] e`, or its differential, at level `ctx.m`.
    pub fn teichmuller_value(&self, ctx: RingContext) -> Result<DrwElement> {
        let e = DrwElement::from_term(ctx, self.key.degree(), self.key.clone(), BigInt::one());
        let x = DrwElement::teich_monomial(ctx, &self.mult).mul(&e)?;
        Ok(if self.kind == GenKind::DG { x.d() } else { x })
    }
}

/// The generators over the weight slice `c` in degree `t`: `u(c) = m` uses `G(t, m)` and
/// `d G(t-1, m)`; integral slices use `H(t, 0)`.
pub fn slice_generators(c: &WeightFn, t: usize, p: u64) -> Vec<SliceGen> {
    let n = c.len();
    let m = u_weight(c, p);
    let mut out = vec![];
    if m == 0 {
        let sup = support(c);
        for set in subsets(&sup, t) {
            let mut a = vec![Q64::zero(); n];
            for &i in &set {
                a[i] = Q64::from_integer(1);
            }
            let mult = (0..n).map(|i| (c[i] - a[i]).to_integer() as u32).collect();
            out.push(SliceGen { kind: GenKind::H, key: Key::new(a, set, p).unwrap(), mult });
        }
        return out;
    }
    let pm = Q64::from_integer(pow_u64(p, m));
    let frac: Vec<usize> = (0..n).filter(|&i| !c[i].is_integer()).collect();
    let ints: Vec<usize> = (0..n).filter(|&i| c[i].is_integer() && !c[i].is_zero()).collect();
    let mut base = vec![Q64::zero(); n];
    for &i in &frac {
        let num = (c[i] * pm).to_integer() % pm.to_integer();
        base[i] = Q64::from_integer(num) / pm;
    }
    let order = sorted_support(&base, p);
    let candidates = &order[1..];
    for (kind, deg) in [(GenKind::G, t as i64), (GenKind::DG, t as i64 - 1)] {
        if deg < 0 {
            continue;
        }
        let deg = deg as usize;
        for ni in 0..=deg.min(candidates.len()) {
            let nj = deg - ni;
            if nj > ints.len() {
                continue;
            }
            for iset in subsets(candidates, ni) {
                for jset in subsets(&ints, nj) {
                    let mut a = base.clone();
                    for &j in &jset {
                        a[j] = Q64::from_integer(1);
                    }
                    let mult = (0..n).map(|i| (c[i] - a[i]).to_integer() as u32).collect();
                    let parts = [iset.clone(), jset.clone()].concat();
                    out.push(SliceGen { kind, key: Key::new(a, parts, p).unwrap(), mult });
                }
            }
        }
    }
    out
}

/// The keys of degree `t` over the slice `c`.
pub fn slice_keys(c: &WeightFn, t: usize, p: u64) -> Vec<Key> {
    subsets(&support(c), t).into_iter().map(|l| Key::new(c.clone(), l, p).unwrap()).collect()
}

/// Columns of mod-p coefficients of the generators on the slice keys, at level `u(c) + 1`.
pub fn slice_matrix(c: &WeightFn, t: usize, p: u64) -> Result<(Vec<Key>, Vec<SliceGen>, Vec<Vec<u64>>)> {
    let keys = slice_keys(c, t, p);
    let gens = slice_generators(c, t, p);
    let ctx = RingContext { p, n: c.len(), m: u_weight(c, p) as usize + 1 };
    let mut mat = vec![vec![0u64; gens.len()]; keys.len()];
    for (j, g) in gens.iter().enumerate() {
        let v = g.teichmuller_value(ctx)?;
        for (k, x) in &v.terms {
            let Some(r) = keys.iter().position(|kk| kk == k) else {
                return Err(Error::NonIntegralResult(format!("generator {} leaves its slice", g.key)));
            };
            mat[r][j] = mod_u64(x, p);
        }
    }
    Ok((keys, gens, mat))
}

/// `e(1, c, L) = sum [P_e] e` mod p, with `deg P_e + |a(e)| = |c|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub target: Key,
    pub terms: Vec<(SliceGen, PolyFp)>,
}

impl Certificate {
    pub fn degrees_match(&self) -> bool {
        self.terms.iter().all(|(g, poly)| {
            poly.degree().map_or(true, |d| Q64::from_integer(d as u64) + g.key.wt == self.target.wt)
        })
    }

    /// Re-evaluates the relation at level `u(c) + 1`.
    pub fn verify(&self, p: u64) -> Result<bool> {
        let n = self.target.a.len();
        let ctx = RingContext { p, n, m: self.target.u as usize + 1 };
        let mut sum = DrwElement::zero(ctx, self.target.degree());
        for (g, poly) in &self.terms {
            for (e, &x) in &poly.terms {
                let gen = SliceGen { mult: e.clone(), ..g.clone() };
                sum = sum.add(&gen.teichmuller_value(ctx)?.scale_int(&BigInt::from(x)))?;
            }
        }
        let target = DrwElement::from_term(ctx, self.target.degree(), self.target.clone(), BigInt::one());
        Ok(sum.sub(&target)?.is_divisible_by_p_pow(1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceReport {
    pub c: WeightFn,
    pub kernel_dim: usize,
    pub generators: usize,
    pub rank: usize,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBasis {
    pub h_part: Vec<Key>,
    pub g_part: Vec<Key>,
    pub dg_part: Vec<Key>,
    pub slices: Vec<SliceReport>,
}

/// Weight slices `c` with `u(c) = m`, `|c| <= max_weight` and at least `t` support points.
pub fn slices(n: usize, p: u64, m: u32, t: usize, max_weight: u64) -> Vec<WeightFn> {
    let pm = pow_u64(p, m);
    let bound = (max_weight * pm) as u32;
    let mut out = vec![];
    for num in crate::util::exps_below(&vec![bound; n]) {
        let s: u64 = num.iter().map(|&x| x as u64).sum();
        if s > bound as u64 {
            continue;
        }
        let c: WeightFn = num.iter().map(|&x| Q64::new(x as u64, pm)).collect();
        if u_weight(&c, p) != m || support(&c).len() < t {
            continue;
        }
        out.push(c);
    }
    out.sort_by(|a, b| crate::drwbasis::weight_sum(a).cmp(&crate::drwbasis::weight_sum(b)).then(a.cmp(b)));
    out
}

/// A basis of `Ker(W_{m+1} Omega^t / p -> W_m Omega^t / p)` over `F_p[X]` within the weight bound,
/// checked slice by slice against the dimension of the kernel, with the polynomial relations
/// expressing every kernel key.
pub fn kernel_basis_mod_p(t: usize, m: u32, p: u64, n: usize, max_weight: u64) -> Result<KernelBasis> {
    let mut h = std::collections::BTreeSet::new();
    let mut g = std::collections::BTreeSet::new();
    let mut dg = std::collections::BTreeSet::new();
    let mut reports = vec![];
    for c in slices(n, p, m, t, max_weight) {
        let (keys, gens, mat) = slice_matrix(&c, t, p)?;
        for gen in &gens {
            match gen.kind {
                GenKind::H => h.insert(gen.key.clone()),
                GenKind::G => g.insert(gen.key.clone()),
                GenKind::DG => dg.insert(gen.key.clone()),
            };
        }
        let rank = rank_mod_p(&mat, p);
        let mut certificates = vec![];
        for (r, key) in keys.iter().enumerate() {
            let pure = m == 0 || key.i0_nonempty(p);
            let allowed: Vec<usize> = (0..gens.len()).filter(|&j| !pure || gens[j].kind != GenKind::DG).collect();
            let sub: Vec<Vec<u64>> = mat.iter().map(|row| allowed.iter().map(|&j| row[j]).collect()).collect();
            let rhs: Vec<u64> = (0..keys.len()).map(|i| u64::from(i == r)).collect();
            let Some(x) = solve_mod_pk(&sub, &rhs, p, 1) else {
                return Err(Error::NonIntegralResult(format!("{key} is not in the span of the generators")));
            };
            let mut terms = vec![];
            for (&j, &v) in allowed.iter().zip(&x) {
                if v != 0 {
                    let poly = PolyFp::monomial(n, p, v, gens[j].mult.clone());
                    terms.push((gens[j].clone(), poly));
                }
            }
            certificates.push(Certificate { target: key.clone(), terms });
        }
        let c_supp = support(&c).len() as u64;
        debug_assert_eq!(keys.len() as u64, binomial(c_supp, t as u64));
        reports.push(SliceReport { c, kernel_dim: keys.len(), generators: gens.len(), rank, certificates });
    }
    Ok(KernelBasis {
        h_part: h.into_iter().collect(),
        g_part: g.into_iter().collect(),
        dg_part: dg.into_iter().collect(),
        slices: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewrite_examples() {
        let one = BigInt::one();
        let r = rewrite_mod_p(&one, &[1], &[], 1, 2).unwrap();
        assert_eq!(r.basis_size, 1);
        let (c, k) = r.terms.keys().next().unwrap();
        assert_eq!((c.clone(), k.a.clone(), k.parts.clone()), (vec![0], vec![qi(1)], vec![]));

        let r = rewrite_mod_p(&one, &[3], &[], 1, 2).unwrap();
        let ((c, k), x) = r.terms.iter().next().unwrap();
        assert_eq!((c.clone(), k.a.clone(), *x), (vec![1], vec![qi(1)], 1));

        assert!(matches!(rewrite_mod_p(&one, &[1], &[0], 1, 2), Err(Error::PreconditionViolated(_))));
        assert!(matches!(rewrite_mod_p(&one, &[2], &[], 1, 2), Err(Error::PreconditionViolated(_))));

        let r = rewrite_mod_p(&one, &[3, 1], &[1], 1, 2).unwrap();
        assert_eq!(r.basis_size, 1);
        let ctx = RingContext::new(2, 2, 1).unwrap();
        let target = DrwElement::from_term(ctx, 1, Key::new(int_weight(&[3, 1]), vec![1], 2).unwrap(), one);
        assert_eq!(r.expand(ctx).unwrap(), target);
    }

    #[test]
    fn rewrite_counts() {
        for (b, l, u, p) in [(vec![4u32, 1, 2], vec![2usize], 1u32, 2u64), (vec![3, 3, 1], vec![0, 1], 1, 3), (vec![5, 4], vec![1], 2, 2)] {
            let r = rewrite_mod_p(&BigInt::one(), &b, &l, u, p).unwrap();
            let s = b.iter().filter(|&&x| x > 0).count() as u64;
            assert_eq!(r.basis_size as u64, binomial(s - 1, l.len() as u64));
            let ctx = RingContext::new(p, b.len(), 1).unwrap();
            let target = DrwElement::from_term(ctx, l.len(), Key::new(int_weight(&b), l, p).unwrap(), BigInt::one());
            assert_eq!(r.expand(ctx).unwrap(), target);
        }
    }

    #[test]
    fn kernel_examples() {
        let kb = kernel_basis_mod_p(0, 1, 2, 1, 2).unwrap();
        assert!(kb.h_part.is_empty());
        assert_eq!(kb.g_part, vec![Key::new(vec![Q64::new(1, 2)], vec![], 2).unwrap()]);
        let kb = kernel_basis_mod_p(1, 0, 2, 2, 2).unwrap();
        assert_eq!(kb.h_part.len(), 2);
        for s in &kb.slices {
            assert_eq!(s.rank, s.kernel_dim);
            assert_eq!(s.generators, s.kernel_dim);
        }
    }

    #[test]
    fn kernel_certificates() {
        for (t, m, p) in [(1, 1, 2), (2, 1, 2), (1, 2, 2), (1, 1, 3)] {
            let kb = kernel_basis_mod_p(t, m, p, 2, 3).unwrap();
            for s in &kb.slices {
                assert_eq!((s.rank, s.generators), (s.kernel_dim, s.kernel_dim));
                for cert in &s.certificates {
                    assert!(cert.degrees_match());
                    assert!(cert.verify(p).unwrap());
                }
            }
        }
    }
}
