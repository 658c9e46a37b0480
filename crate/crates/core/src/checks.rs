//! Named invariant suites on random samples, run by `wdrw check` and the acceptance tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::drwalgebra::{kernel_basis_mod_p, rewrite_mod_p, DrwElement};
use crate::drwbasis::{support, Key};
use crate::error::Result;
use crate::lazard::{estimate_v_f, mod_p_injectivity, FrobLift, LiftForm};
use crate::oracle::{embed, extract};
use crate::poly::{default_names, pow_u64, ModPoly, PolyFp, PolyZ};
use crate::pseudoval::{check_inequality, rat, SampleSpec, INEQUALITIES};
use crate::sample;
use crate::structure::{
    check_relatively_perfect, compute_constants, etale_setup, etale_structure_decompose, overconv_witt_decompose,
    poly_structure_decompose, witt_basis_certificates, witt_basis_decompose, witt_basis_recompose, EtalePresentation,
};
use crate::util::{binomial, exps_below, exps_of_degree, subsets, Q64};
use crate::wittcore::{ghost, RingContext, WittVec};

pub const SUITES: &[&str] =
    &["witt", "dga", "oracle", "decompose", "rewrite", "kernel", "pseudoval", "lazard", "relperf", "structure"];

/// Sampling parameters. `primes`, `max_vars` and `max_len` override the per-suite defaults.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    pub primes: Option<Vec<u64>>,
    pub max_vars: Option<usize>,
    pub max_len: Option<usize>,
}

impl SuiteConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        SuiteConfig { samples, seed, primes: None, max_vars: None, max_len: None }
    }

    fn primes(&self, default: &[u64]) -> Vec<u64> {
        self.primes.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ctx(&self, rng: &mut StdRng, primes: &[u64], vars: usize, len: usize) -> RingContext {
        let p = primes[rng.gen_range(0..primes.len())];
        let n = rng.gen_range(1..=self.max_vars.unwrap_or(vars));
        let m = rng.gen_range(1..=self.max_len.unwrap_or(len));
        RingContext::new(p, n, m).expect("suite primes are prime")
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks > 0
    }

    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    /// Records an `Err` from a sample as a failure.
    fn run(&mut self, what: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.checks += 1;
            self.failures.push(format!("{what}: {e}"));
        }
    }

    pub fn summary(&self) -> String {
        let ok = self.checks - self.failures.len().min(self.checks);
        format!("{}: {}/{} passed", self.name, ok, self.checks)
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "witt" => Ok(witt_suite(cfg)),
        "dga" => Ok(dga_suite(cfg)),
        "oracle" => Ok(oracle_suite(cfg)),
        "decompose" => Ok(decompose_suite(cfg)),
        "rewrite" => Ok(rewrite_suite(cfg)),
        "kernel" => Ok(kernel_suite(cfg)),
        "pseudoval" => pseudoval_suite(cfg),
        "lazard" => Ok(lazard_suite(cfg)),
        "relperf" => Ok(relperf_suite(cfg)),
        "structure" => Ok(structure_suite(cfg)),
        _ => Err(crate::Error::UnknownInequality(name.into())),
    }
}

fn show(x: &DrwElement) -> String {
    format!("[{}]", x.render_lines().join(" + "))
}

fn show_w(w: &WittVec) -> String {
    let names = default_names(w.ctx.n);
    format!("({})", w.coords.iter().map(|c| c.render(&names)).collect::<Vec<_>>().join(", "))
}

/// Ghost components over `Z` of the least-residue lifts, reduced modulo `p^{u+1}`.
fn ghost_z(w: &WittVec) -> Vec<ModPoly> {
    let p = w.ctx.p;
    ghost(&w.lifts(), p).iter().enumerate().map(|(u, g)| g.reduce(pow_u64(p, u as u32 + 1))).collect()
}

/// Witt ring laws against the ghost map over `Z`.
pub fn witt_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("witt");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let primes = cfg.primes(&[2, 3, 5]);
    for _ in 0..cfg.samples {
        let ctx = cfg.ctx(&mut rng, &primes, 2, 4);
        // Coordinates of degree <= 4 with at most two terms (one for the third factor): the
        // ghost components of a triple product at p = 5, m = 4 are otherwise dense in degree 1500.
        let a = sample::witt_vec(&mut rng, ctx, 4, 2);
        let b = sample::witt_vec(&mut rng, ctx, 4, 2);
        let c = sample::witt_vec(&mut rng, ctx, 4, 1);
        let wit = || format!("a={} b={} c={}", show_w(&a), show_w(&b), show_w(&c));
        rep.run("witt", |rep| {
            let (ga, gb) = (ghost_z(&a), ghost_z(&b));
            let sum: Vec<ModPoly> = ga.iter().zip(&gb).map(|(x, y)| x.add(y)).collect();
            let prod: Vec<ModPoly> = ga.iter().zip(&gb).map(|(x, y)| x.mul(y)).collect();
            let (s, m) = (a.add(&b)?, a.mul(&b)?);
            rep.check(ghost_z(&s) == sum, || format!("ghost(a+b) at {}", wit()));
            rep.check(ghost_z(&m) == prod, || format!("ghost(ab) at {}", wit()));
            rep.check(s.add(&c)? == a.add(&b.add(&c)?)?, || format!("additive associativity at {}", wit()));
            rep.check(m.mul(&c)? == a.mul(&b.mul(&c)?)?, || format!("multiplicative associativity at {}", wit()));
            rep.check(s.mul(&c)? == a.mul(&c)?.add(&b.mul(&c)?)?, || format!("distributivity at {}", wit()));
            rep.check(s == b.add(&a)? && m == b.mul(&a)?, || format!("commutativity at {}", wit()));
            rep.check(a.sub(&a)?.is_zero() && a.mul(&WittVec::one(ctx))? == a, || format!("units at {}", wit()));
            Ok(())
        });
    }
    rep
}

/// d^2 = 0, Leibniz, F[r] = [r^p], F d[r] = [r^{p-1}] d[r], F d V = d, V(x F y) = V(x) y,
/// d F = p F d, on random basic differentials.
pub fn dga_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("dga");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let primes = cfg.primes(&[2, 3]);
    for _ in 0..cfg.samples {
        let ctx = cfg.ctx(&mut rng, &primes, 2, 3);
        let up = ctx.with_len(ctx.m + 1);
        let p = BigInt::from(ctx.p);
        let s = rng.gen_range(0..=ctx.n.min(2));
        let x = sample::basic(&mut rng, ctx, s, 6);
        let ty = rng.gen_range(0..=(ctx.n - s).min(1));
        let y = sample::basic(&mut rng, ctx, ty, 6);
        let tu = rng.gen_range(0..=ctx.n.min(1));
        let xu = sample::basic(&mut rng, up, tu, 6);
        let yu = sample::basic(&mut rng, up, 0, 6);
        let x0 = sample::basic(&mut rng, ctx, 0, 6);
        let r = sample::poly_mod(&mut rng, ctx.n, ctx.p, 3, 2);
        let wit = || format!("p={} m={} x={} y={} x'={} y'={}", ctx.p, ctx.m, show(&x), show(&y), show(&xu), show(&yu));
        rep.run("dga", |rep| {
            rep.check(x.d().d().is_zero(), || format!("d^2 at {}", wit()));
            let sign = BigInt::from(if x.degree % 2 == 0 { 1 } else { -1 });
            let leib = x.d().mul(&y)?.add(&x.mul(&y.d())?.scale_int(&sign))?;
            rep.check(x.mul(&y)?.d() == leib, || format!("Leibniz at {}", wit()));
            let tr = DrwElement::teich(up, &r);
            rep.check(tr.frobenius()? == DrwElement::teich(ctx, &r.pow(ctx.p)), || format!("F[r] at r={r:?}"));
            let rhs = DrwElement::teich(ctx, &r.pow(ctx.p - 1)).mul(&DrwElement::teich(ctx, &r).d())?;
            rep.check(tr.d().frobenius()? == rhs, || format!("F d[r] at r={r:?}"));
            rep.check(x.verschiebung().d().frobenius()? == x.d(), || format!("FdV at {}", wit()));
            let lhs = x0.mul(&yu.frobenius()?)?.verschiebung();
            rep.check(lhs == x0.verschiebung().mul(&yu)?, || format!("V(x F y) at {}", wit()));
            rep.check(xu.frobenius()?.d() == xu.d().frobenius()?.scale_int(&p), || format!("dF = pFd at {}", wit()));
            Ok(())
        });
    }
    rep
}

/// `extract . embed = id`, `embed . extract = id` on the image, and `embed` respects
/// `+, *, d, F, V`.
pub fn oracle_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("oracle");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let primes = cfg.primes(&[2, 3]);
    for _ in 0..cfg.samples {
        let ctx = cfg.ctx(&mut rng, &primes, 2, 3);
        let up = ctx.with_len(ctx.m + 1);
        let t = rng.gen_range(0..=ctx.n.min(2));
        let x = sample::element(&mut rng, ctx, t, 6, 3);
        let ty = rng.gen_range(0..=(ctx.n - t).min(1));
        let y = sample::element(&mut rng, ctx, ty, 6, 3);
        let z = sample::element(&mut rng, ctx, t, 6, 3);
        let xu = sample::element(&mut rng, up, t, 6, 3);
        let wit = || format!("p={} m={} x={} y={}", ctx.p, ctx.m, show(&x), show(&y));
        rep.run("oracle", |rep| {
            let (ex, ey) = (embed(&x), embed(&y));
            rep.check(extract(&ex, ctx)? == x, || format!("extract(embed x) at {}", wit()));
            rep.check(embed(&extract(&ex, ctx)?) == ex, || format!("embed(extract f) at {}", wit()));
            rep.check(extract(&ex.add(&embed(&z)), ctx)? == x.add(&z)?, || format!("sum at {}", wit()));
            rep.check(extract(&ex.mul(&ey), ctx)? == x.mul(&y)?, || format!("product at {}", wit()));
            rep.check(extract(&ex.d(), ctx)? == x.d(), || format!("d at {}", wit()));
            rep.check(extract(&embed(&xu).frobenius(), ctx)? == xu.frobenius()?, || format!("F at {}", show(&xu)));
            rep.check(extract(&ex.verschiebung(), up)? == x.verschiebung(), || format!("V at {}", wit()));
            Ok(())
        });
    }
    rep
}

/// Decompose then recompose over `k[X]` with the canonical lift, and `x = 0` iff the
/// decomposition is empty; with the divisibility and `Fil` equivalences.
pub fn decompose_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("decompose");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let primes = cfg.primes(&[2, 3]);
    for i in 0..cfg.samples {
        let ctx = cfg.ctx(&mut rng, &primes, 2, 3);
        let t = rng.gen_range(0..=ctx.n.min(2));
        let f = FrobLift::canonical(ctx.p, ctx.n);
        let x = if i % 10 == 0 { DrwElement::zero(ctx, t) } else { sample::element(&mut rng, ctx, t, 6, 3) };
        rep.run("decompose", |rep| {
            let r = poly_structure_decompose(&x, &f)?;
            rep.check(r.recompose(&f)? == x, || format!("recompose at {}", show(&x)));
            rep.check(r.is_zero() == x.is_zero(), || format!("zero iff empty at {}", show(&x)));
            for l in 0..=ctx.m as u32 {
                rep.check(r.divisible_by_p_pow(l) == x.is_divisible_by_p_pow(l), || format!("p^{l} | x at {}", show(&x)));
                rep.check(r.fil_criterion(l) == x.truncate(l as usize).is_zero(), || format!("Fil^{l} at {}", show(&x)));
            }
            Ok(())
        });
    }
    rep
}

/// Every integral `b` with `|b| <= 8`, `v_p(b) = 0`, every `L` with `L_0` nonempty and
/// `u <= 2`: the reduced family has `C(#Supp(b) - 1, #L)` members and the mod-p expansion
/// reproduces `e(1, b, L)`. `samples` is unused; `max_vars` bounds `n` (default 3).
pub fn rewrite_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("rewrite");
    let one = BigInt::one();
    for p in cfg.primes(&[2, 3]) {
        for n in 1..=cfg.max_vars.unwrap_or(3) {
            let ctx = RingContext { p, n, m: 1 };
            for b in exps_below(&vec![8; n]) {
                if b.iter().sum::<u32>() > 8 || b.iter().all(|&x| x as u64 % p == 0) {
                    continue;
                }
                let bw: Vec<Q64> = b.iter().map(|&x| Q64::from_integer(x as u64)).collect();
                let supp = support(&bw);
                for t in 0..=supp.len() {
                    for l in subsets(&supp, t) {
                        let key = Key::new(bw.clone(), l.clone(), p).expect("support subsets are partitions");
                        if !key.i0_nonempty(p) {
                            continue;
                        }
                        for u in 1..=2 {
                            rep.run(&format!("b={b:?} L={l:?} u={u} p={p}"), |rep| {
                                let r = rewrite_mod_p(&one, &b, &l, u, p)?;
                                let want = binomial(supp.len() as u64 - 1, t as u64);
                                rep.check(r.basis_size as u64 == want, || format!("count {} != {want} at b={b:?} L={l:?} u={u} p={p}", r.basis_size));
                                let target = DrwElement::from_term(ctx, t, key.clone(), one.clone());
                                rep.check(r.expand(ctx)? == target, || format!("expansion at b={b:?} L={l:?} u={u} p={p}"));
                                Ok(())
                            });
                        }
                    }
                }
            }
        }
    }
    rep
}

/// For `t <= min(n, 2)`, `m <= 2`, weight at most 6: each slice's generators have rank equal
/// to its kernel dimension, and there is no `H` part for `m >= 1`. `samples` is unused.
pub fn kernel_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("kernel");
    for p in cfg.primes(&[2, 3]) {
        for n in 1..=cfg.max_vars.unwrap_or(2) {
            for m in 0..=cfg.max_len.unwrap_or(2) as u32 {
                for t in 0..=n.min(2) {
                    rep.run(&format!("p={p} n={n} m={m} t={t}"), |rep| {
                        let kb = kernel_basis_mod_p(t, m, p, n, 6)?;
                        for s in &kb.slices {
                            rep.check(s.rank == s.kernel_dim, || format!("rank {} != {} over {:?} (p={p} t={t})", s.rank, s.kernel_dim, s.c));
                            rep.check(s.certificates.iter().all(|c| c.degrees_match()), || format!("certificate degrees over {:?}", s.c));
                        }
                        if m >= 1 {
                            rep.check(kb.h_part.is_empty(), || format!("H part nonempty at p={p} n={n} m={m} t={t}"));
                        }
                        Ok(())
                    });
                }
            }
        }
    }
    rep
}

/// The pseudovaluation inequality catalogue, `samples` each.
pub fn pseudoval_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("pseudoval");
    for (i, name) in INEQUALITIES.iter().enumerate() {
        let mut spec = SampleSpec::new(cfg.samples, cfg.seed.wrapping_add(i as u64));
        if let Some(p) = &cfg.primes {
            spec.primes = p.clone();
        }
        if let Some(n) = cfg.max_vars {
            spec.max_vars = n;
        }
        if let Some(m) = cfg.max_len {
            spec.max_len = m;
        }
        let r = check_inequality(name, &spec)?;
        rep.checks += r.checked.max(1);
        rep.failures.extend(r.violations);
    }
    Ok(rep)
}

fn random_lift(rng: &mut StdRng, p: u64, n: usize) -> FrobLift {
    let images = (0..n)
        .map(|i| {
            let d = sample::poly_z(rng, n, 2, 2, 2);
            let mut e = vec![0; n];
            e[i] = p as u32;
            PolyZ::monomial(n, 1, e).add(&d.scale(&BigInt::from(p)))
        })
        .collect();
    FrobLift::new(p, images).expect("p-divisible perturbation of the canonical lift")
}

/// Lazard morphisms and the defect `v_F`.
pub fn lazard_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("lazard");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let primes = cfg.primes(&[2, 3]);
    for p in &primes {
        for n in 1..=2usize {
            let ctx = RingContext { p: *p, n, m: 3 };
            let canon = FrobLift::canonical(*p, n);
            for d in 0..=4 {
                for a in exps_of_degree(n, d) {
                    rep.run("teichmuller", |rep| {
                        let want = WittVec::teichmuller(ctx, &PolyFp::monomial(n, *p, 1, a.clone()));
                        rep.check(canon.t_f(&PolyZ::monomial(n, 1, a.clone()), ctx)? == want, || format!("t_F(X^{a:?}) at p={p}"));
                        Ok(())
                    });
                }
            }
        }
    }
    let perturbed = FrobLift::new(2, vec![PolyZ::var(1, 0).pow(2).add(&PolyZ::var(1, 0).scale(&BigInt::from(2)))]).expect("lift");
    rep.run("worked value", |rep| {
        let w = perturbed.t_f(&PolyZ::var(1, 0), RingContext { p: 2, n: 1, m: 3 })?;
        let x = PolyFp::var(1, 2, 0);
        let want = vec![x.clone(), x.clone(), x.pow(3).add(&x.pow(2)).add(&x)];
        rep.check(w.coords == want, || format!("t_F(X) = {}", show_w(&w)));
        Ok(())
    });
    for _ in 0..cfg.samples {
        let p = primes[rng.gen_range(0..primes.len())];
        let n = rng.gen_range(1..=cfg.max_vars.unwrap_or(2));
        let m = rng.gen_range(1..=cfg.max_len.unwrap_or(3));
        let ctx = RingContext::new(p, n, m).expect("prime");
        let f = random_lift(&mut rng, p, n);
        let canon = FrobLift::canonical(p, n);
        let a = sample::poly_z(&mut rng, n, 2, 3, 3);
        let b = sample::poly_z(&mut rng, n, 2, 3, 3);
        let g = sample::poly_z(&mut rng, n, 2, 2, 2);
        let names = default_names(n);
        let wit = || format!("F={} a={} b={}", f.render().trim(), a.render(&names), b.render(&names));
        rep.run("v_F", |rep| {
            let (va, vb) = (f.v_f(&a, ctx)?, f.v_f(&b, ctx)?);
            rep.check(va.coords[0].is_zero(), || format!("v_F not in V(W) at {}", wit()));
            let (ta, tb) = (canon.t_f(&a, ctx)?, canon.t_f(&b, ctx)?);
            let rhs = va.mul(&vb)?.add(&ta.mul(&vb)?)?.add(&va.mul(&tb)?)?;
            rep.check(f.v_f(&a.mul(&b), ctx)? == rhs, || format!("product formula at {}", wit()));
            let small = ctx.with_len(m.min(2));
            let v = f.v_f_forms(&LiftForm::term(a.clone(), vec![g.clone()]), small)?;
            rep.check(v.truncate(1).is_zero(), || format!("v_F(a dg) not in Fil^1 at {}", wit()));
            Ok(())
        });
    }
    for (f, t) in [(perturbed.clone(), 0), (perturbed.clone(), 1), (FrobLift::canonical(3, 2), 2), (FrobLift::canonical(2, 2), 1)] {
        rep.run("injectivity", |rep| {
            let r = mod_p_injectivity(&f, t, 6)?;
            rep.check(r.injective(), || format!("not injective mod p: {r:?}"));
            Ok(())
        });
    }
    rep.run("estimates", |rep| {
        let grid: Vec<BigRational> = (1..=6).map(|k| rat(1, 1 << k)).collect();
        let r = estimate_v_f(&perturbed, &grid, &[rat(1, 1)], &rat(1, 2), 3, 8, 10, cfg.seed)?;
        rep.check(r.delta.is_some(), || format!("no delta: {r:?}"));
        if let Some(d) = &r.delta {
            let d: BigRational = d.parse().expect("rational");
            for (eps, fails, wit) in &r.grid {
                let e: BigRational = eps.parse().expect("rational");
                if e <= d {
                    rep.check(*fails == 0, || format!("bound fails at eps={eps}: {wit:?}"));
                }
            }
        }
        Ok(())
    });
    rep
}

/// Artin-Schreier passes with unit determinant, round trips in the Teichmüller basis with
/// the V-depth preserved, certificates hold, and the nilpotent extension is rejected.
pub fn relperf_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = SuiteReport::new("relperf");
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let primes = cfg.primes(&[2, 3]);
    for &p in &primes {
        rep.run("relative perfectness", |rep| {
            let rp = check_relatively_perfect(&EtalePresentation::artin_schreier(p))?;
            rep.check(rp.ok && rp.det == PolyFp::one(1, p), || format!("Artin-Schreier at p={p}: det {:?}", rp.det));
            let nil = check_relatively_perfect(&EtalePresentation::nilpotent(p))?;
            rep.check(!nil.ok, || format!("nilpotent extension accepted at p={p}"));
            Ok(())
        });
    }
    for i in 0..cfg.samples {
        let p = primes[i % primes.len()];
        let pres = EtalePresentation::artin_schreier(p);
        let m = rng.gen_range(1..=cfg.max_len.unwrap_or(3));
        let ctx = pres.base_ctx(m);
        let r: Vec<WittVec> = (0..pres.rank)
            .map(|_| {
                let mut w = sample::witt_vec(&mut rng, ctx, 3, 2);
                let k = rng.gen_range(0..=m);
                for c in w.coords.iter_mut().take(k) {
                    *c = PolyFp::zero(1, p);
                }
                w
            })
            .collect();
        rep.run("round trip", |rep| {
            let w = witt_basis_recompose(&r, &pres);
            let back = witt_basis_decompose(&w, &pres)?;
            let wit = || r.iter().map(show_w).collect::<Vec<_>>().join(" ");
            rep.check(back == r, || format!("round trip at p={p} r={}", wit()));
            let depth = w.v_v().unwrap_or(m);
            for u in 0..=m {
                let lhs = depth >= u;
                let rhs = back.iter().all(|x| x.v_v().unwrap_or(m) >= u);
                rep.check(lhs == rhs, || format!("V^{u} divisibility at p={p} r={}", wit()));
            }
            if p == 2 && m <= 2 {
                let consts = compute_constants(&pres)?;
                for c in witt_basis_certificates(&w, &back, &consts)? {
                    rep.check(c.verify()?, || format!("certificate {} at r={}", c.description, wit()));
                }
            }
            Ok(())
        });
    }
    rep
}

/// Decomposition engines: divisibility and `Fil` over `k[X]`, exact recomposition over
/// Artin-Schreier at `m = 2`, the overconvergent divisibility pattern, certificates.
pub fn structure_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut rep = decompose_suite(cfg);
    rep.name = "structure".into();
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ 0x5eed);
    let pres = EtalePresentation::artin_schreier(2);
    let setup = match etale_setup(&pres) {
        Ok(s) => s,
        Err(e) => {
            rep.run("setup", |_| Err(e));
            return rep;
        }
    };
    let ctx = RingContext { p: 2, n: 1, m: 2 };
    for i in 0..cfg.samples {
        let t = i % 2;
        let x = sample::element(&mut rng, ctx, t, 4, 2);
        rep.run(&format!("etale at {}", show(&x)), |rep| {
            let w = x.max_weight() + 2;
            let r = etale_structure_decompose(&x, &pres, w, None)?;
            rep.check(setup.push(&r)? == x, || format!("etale recomposition at {}", show(&x)));
            rep.check(r.is_zero() == x.is_zero(), || format!("etale zero at {}", show(&x)));
            for c in &r.certificates {
                rep.check(c.verify()?, || format!("certificate {} at {}", c.description, show(&x)));
            }
            Ok(())
        });
        let mut w = sample::witt_vec(&mut rng, ctx, 3, 2);
        if i % 3 == 0 {
            w.coords[0] = PolyFp::zero(1, 2);
        }
        rep.run(&format!("overconv at {}", show_w(&w)), |rep| {
            let x = DrwElement::from_witt(&w);
            let r = overconv_witt_decompose(&w, &pres, x.max_weight() + 2, None)?;
            rep.check(setup.push(&r.decomposition)? == x, || format!("overconv recomposition at {}", show_w(&w)));
            rep.check(r.divisibility_pattern_holds(r.depth as u32), || format!("divisibility pattern at {}", show_w(&w)));
            for c in &r.decomposition.certificates {
                rep.check(c.verify()?, || format!("certificate {} at {}", c.description, show_w(&w)));
            }
            Ok(())
        });
    }
    rep
}
