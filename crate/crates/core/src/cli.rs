//! The `wdrw` command line: the term language, its printer, and the subcommands.
//!
//! Terms are s-expressions over a polynomial ring with variables `X1..Xn` (or the model
//! variables of a presentation):
//!
//! ```text
//! term  := X<i> | <int> | (teich <poly>) | (lift <poly>) | (e <int> ; <w>,...,<w> ; {<i>,...})
//!        | (d term) | (V term) | (F term) | (+ term term ...) | (* term term ...) | (- term term)
//! w     := k | k/q | k/p^u          (q a power of p)
//! ```
//!
//! Input files (`--lift`, `--presentation`) start with the line `# wdrw-format 1`.

use std::fmt::Write as _;
use std::io::Write;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::json;

use crate::checks::{run_suite, SuiteConfig, SUITES};
use crate::drwalgebra::DrwElement;
use crate::drwbasis::{make_e, render_q, Key};
use crate::error::{Error, Result};
use crate::lazard::FrobLift;
use crate::poly::{default_names, parse_poly, PolyFp, PolyZ};
use crate::pseudoval::{gamma, zeta};
use crate::structure::{
    check_relatively_perfect, compute_constants, etale_setup, etale_structure_decompose, overconv_witt_decompose,
    poly_structure_decompose_certified, DecompositionResult, Evaluand, EtalePresentation,
};
use crate::util::Q64;
use crate::wittcore::{RingContext, WittVec};

pub const FORMAT_HEADER: &str = "# wdrw-format 1";

/// Abstract syntax of the term language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Int(BigInt),
    Teich(PolyZ),
    Lift(PolyZ),
    E { eta: BigInt, a: Vec<Q64>, parts: Vec<usize> },
    D(Box<Term>),
    V(Box<Term>),
    F(Box<Term>),
    Add(Vec<Term>),
    Mul(Vec<Term>),
    Sub(Box<Term>, Box<Term>),
}

struct TermParser<'a> {
    s: &'a str,
    i: usize,
    p: u64,
    names: &'a [String],
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

impl<'a> TermParser<'a> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s.as_bytes()[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.as_bytes().get(self.i).copied()
    }

    fn word(&mut self) -> &'a str {
        let start = self.i;
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() || b"();{},".contains(&c) {
                break;
            }
            self.i += 1;
        }
        &self.s[start..self.i]
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.ws();
        if self.peek() != Some(c) {
            return Err(syntax(self.i, format!("expected `{}`", c as char)));
        }
        self.i += 1;
        Ok(())
    }

    /// Raw text up to the `)` closing the current form, with its start offset.
    fn balanced(&mut self) -> Result<(usize, &'a str)> {
        let start = self.i;
        let mut depth = 0i32;
        while let Some(c) = self.peek() {
            match c {
                b'(' => depth += 1,
                b')' if depth == 0 => return Ok((start, &self.s[start..self.i])),
                b')' => depth -= 1,
                _ => {}
            }
            self.i += 1;
        }
        Err(syntax(self.i, "unbalanced parentheses"))
    }

    fn poly(&mut self) -> Result<PolyZ> {
        let (start, text) = self.balanced()?;
        parse_poly(text, self.names).map_err(|e| match e {
            Error::Syntax { pos, msg } => syntax(start + pos, msg),
            e => e,
        })
    }

    fn var(&self, w: &str, pos: usize) -> Result<usize> {
        self.names.iter().position(|n| n == w).ok_or_else(|| syntax(pos, format!("unknown variable `{w}`")))
    }

    fn term(&mut self) -> Result<Term> {
        self.ws();
        let pos = self.i;
        match self.peek() {
            None => Err(syntax(pos, "unexpected end of input")),
            Some(b'(') => {
                self.i += 1;
                self.ws();
                let head = self.word();
                let t = match head {
                    "teich" => Term::Teich(self.poly()?),
                    "lift" => Term::Lift(self.poly()?),
                    "e" => self.e_form()?,
                    "d" | "V" | "F" | "+" | "*" | "-" => {
                        let mut args = vec![];
                        loop {
                            self.ws();
                            if self.peek() == Some(b')') || self.peek().is_none() {
                                break;
                            }
                            args.push(self.term()?);
                        }
                        let arity_ok = match head {
                            "d" | "V" | "F" => args.len() == 1,
                            "-" => args.len() == 2,
                            _ => args.len() >= 2,
                        };
                        if !arity_ok {
                            return Err(syntax(pos, format!("wrong number of arguments to `{head}`: {}", args.len())));
                        }
                        let mut it = args.into_iter();
                        match head {
                            "d" => Term::D(Box::new(it.next().unwrap())),
                            "V" => Term::V(Box::new(it.next().unwrap())),
                            "F" => Term::F(Box::new(it.next().unwrap())),
                            "-" => Term::Sub(Box::new(it.next().unwrap()), Box::new(it.next().unwrap())),
                            "+" => Term::Add(it.collect()),
                            _ => Term::Mul(it.collect()),
                        }
                    }
                    "" => return Err(syntax(self.i, "expected an operator")),
                    h => return Err(syntax(pos + 1, format!("unknown operator `{h}`"))),
                };
                self.expect(b')')?;
                Ok(t)
            }
            Some(_) => {
                let w = self.word();
                if w.is_empty() {
                    return Err(syntax(pos, "expected a term"));
                }
                if let Ok(c) = w.parse::<BigInt>() {
                    return Ok(Term::Int(c));
                }
                Ok(Term::Var(self.var(w, pos)?))
            }
        }
    }

    fn weight(&self, w: &str, pos: usize) -> Result<Q64> {
        let bad = || syntax(pos, format!("bad weight `{w}`"));
        let (num, den) = match w.split_once('/') {
            None => (w, None),
            Some((a, b)) => (a, Some(b)),
        };
        let k: u64 = num.trim().parse().map_err(|_| bad())?;
        let q: u64 = match den.map(str::trim) {
            None => 1,
            Some(d) => match d.split_once('^') {
                Some((b, u)) => {
                    let b: u64 = b.trim().parse().map_err(|_| bad())?;
                    let u: u32 = u.trim().parse().map_err(|_| bad())?;
                    b.checked_pow(u).ok_or_else(bad)?
                }
                None => d.parse().map_err(|_| bad())?,
            },
        };
        let mut r = q;
        while r > 1 && r % self.p == 0 {
            r /= self.p;
        }
        if q == 0 || r != 1 {
            return Err(syntax(pos, format!("weight denominator {q} is not a power of {}", self.p)));
        }
        Ok(Q64::new(k, q))
    }

    /// After `(e`: `eta ; w1,...,wn ; {i,...}`.
    fn e_form(&mut self) -> Result<Term> {
        let (start, text) = self.balanced()?;
        let segs: Vec<&str> = text.split(';').collect();
        if segs.len() != 3 {
            return Err(syntax(start, "expected `e <eta> ; <weights> ; {<indices>}`"));
        }
        let eta: BigInt = segs[0].trim().parse().map_err(|_| syntax(start, format!("bad coefficient `{}`", segs[0].trim())))?;
        let wpos = start + segs[0].len() + 1;
        let a = segs[1].split(',').map(|w| self.weight(w.trim(), wpos)).collect::<Result<Vec<_>>>()?;
        if a.len() != self.names.len() {
            return Err(syntax(wpos, format!("expected {} weights, found {}", self.names.len(), a.len())));
        }
        let ipos = wpos + segs[1].len() + 1;
        let inner = segs[2].trim();
        let inner = inner
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| syntax(ipos, "expected an index set `{...}`"))?;
        let mut parts = vec![];
        for x in inner.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let i: usize = x.parse().map_err(|_| syntax(ipos, format!("bad index `{x}`")))?;
            if i == 0 || i > a.len() {
                return Err(syntax(ipos, format!("index {i} out of range")));
            }
            parts.push(i - 1);
        }
        Ok(Term::E { eta, a, parts })
    }
}

/// Parse a term at prime `p` over the variables `names`.
pub fn parse_term(text: &str, p: u64, names: &[String]) -> Result<Term> {
    let mut ps = TermParser { s: text, i: 0, p, names };
    let t = ps.term()?;
    ps.ws();
    if ps.i != text.len() {
        return Err(syntax(ps.i, "trailing input"));
    }
    Ok(t)
}

impl Term {
    /// The canonical text of the term; `parse_term` inverts it.
    pub fn render(&self, names: &[String]) -> String {
        let list = |op: &str, ts: &[Term]| format!("({op} {})", ts.iter().map(|t| t.render(names)).collect::<Vec<_>>().join(" "));
        match self {
            Term::Var(i) => names[*i].clone(),
            Term::Int(c) => c.to_string(),
            Term::Teich(f) => format!("(teich {})", f.render(names)),
            Term::Lift(f) => format!("(lift {})", f.render(names)),
            Term::E { eta, a, parts } => {
                let w: Vec<String> = a.iter().map(render_q).collect();
                let i: Vec<String> = parts.iter().map(|i| (i + 1).to_string()).collect();
                format!("(e {eta} ; {} ; {{{}}})", w.join(","), i.join(","))
            }
            Term::D(t) => format!("(d {})", t.render(names)),
            Term::V(t) => format!("(V {})", t.render(names)),
            Term::F(t) => format!("(F {})", t.render(names)),
            Term::Add(ts) => list("+", ts),
            Term::Mul(ts) => list("*", ts),
            Term::Sub(a, b) => format!("(- {} {})", a.render(names), b.render(names)),
        }
    }

    /// The element of `W_m Omega` the term denotes; `lift` is used by `(lift f)`.
    pub fn eval(&self, ctx: RingContext, lift: &FrobLift) -> Result<DrwElement> {
        Ok(match self {
            Term::Var(i) => {
                let mut e = vec![0; ctx.n];
                e[*i] = 1;
                DrwElement::teich_monomial(ctx, &e)
            }
            Term::Int(c) => DrwElement::from_int(ctx, c),
            Term::Teich(f) => DrwElement::teich(ctx, &f.reduce(ctx.p)),
            Term::Lift(f) => DrwElement::from_witt(&lift.t_f(f, ctx)?),
            Term::E { eta, a, parts } => {
                let key = Key::new(a.clone(), parts.clone(), ctx.p)?;
                if key.degree() != parts.len() {
                    return Err(Error::PreconditionViolated("repeated index in the index set".into()));
                }
                make_e(eta, &key, ctx)?
            }
            Term::D(t) => t.eval(ctx, lift)?.d(),
            Term::V(t) => {
                if ctx.m == 0 {
                    DrwElement::zero(ctx, t.eval(ctx, lift)?.degree)
                } else {
                    t.eval(ctx.with_len(ctx.m - 1), lift)?.verschiebung()
                }
            }
            Term::F(t) => t.eval(ctx.with_len(ctx.m + 1), lift)?.frobenius()?,
            Term::Add(ts) => {
                let mut acc = ts[0].eval(ctx, lift)?;
                for t in &ts[1..] {
                    let x = t.eval(ctx, lift)?;
                    if x.degree != acc.degree {
                        return Err(Error::DegreeMismatch(format!("cannot add forms of degrees {} and {}", acc.degree, x.degree)));
                    }
                    acc = acc.add(&x)?;
                }
                acc
            }
            Term::Mul(ts) => {
                let mut acc = ts[0].eval(ctx, lift)?;
                for t in &ts[1..] {
                    acc = acc.mul(&t.eval(ctx, lift)?)?;
                }
                acc
            }
            Term::Sub(a, b) => {
                let (x, y) = (a.eval(ctx, lift)?, b.eval(ctx, lift)?);
                if x.degree != y.degree {
                    return Err(Error::DegreeMismatch(format!("cannot subtract forms of degrees {} and {}", x.degree, y.degree)));
                }
                x.sub(&y)?
            }
        })
    }
}

#[derive(Parser, Debug)]
#[command(name = "wdrw", version, about = "Exact computations in Witt vectors and de Rham-Witt complexes over F_p[X]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// The prime p (default 2).
    #[arg(long, global = true)]
    pub prime: Option<u64>,
    /// Number of variables (default: the largest index in the expression).
    #[arg(long, global = true)]
    pub vars: Option<usize>,
    /// Truncation length m of W_m (default 2).
    #[arg(long, global = true)]
    pub len: Option<usize>,
    /// Print JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Rational eps for the pseudovaluations, e.g. `1/4`.
    #[arg(long, global = true)]
    pub eps: Option<String>,
    /// Comma-separated rational radii b_1,...,b_n.
    #[arg(long, global = true)]
    pub radii: Option<String>,
    /// Frobenius lift file.
    #[arg(long, global = true)]
    pub lift: Option<String>,
    /// Finite free extension file.
    #[arg(long, global = true)]
    pub presentation: Option<String>,
    /// Weight bound for the decompositions over an extension.
    #[arg(long = "max-weight", global = true)]
    pub max_weight: Option<u64>,
    /// Samples per check.
    #[arg(long, global = true, default_value_t = 100)]
    pub samples: usize,
    /// Seed for the check suites.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for the library (default 1).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normal form of a term.
    Eval { expr: String },
    /// Structure decomposition of a term, over F_p[X] or over a presentation's model.
    Decompose { expr: String },
    /// zeta_eps of a term.
    Zeta { expr: String },
    /// gamma_{eps,b} of a degree-0 term.
    Gamma { expr: String },
    /// t_F and v_F of an integer polynomial.
    Lazard { poly: String },
    /// Witt coordinates of a degree-0 term; with a presentation, its report and the
    /// decomposition of the term over the model.
    Witt { expr: Option<String> },
    /// Run a named invariant suite.
    Check { suite: String },
}

/// Failure of a subcommand: exit code 2 for input and configuration errors, 1 otherwise.
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::DegreeMismatch(_)
            | Error::MalformedTable(_)
            | Error::ContextMismatch
            | Error::Unsupported(_)
            | Error::UnknownInequality(_)
            | Error::CoefficientOutOfRange(_)
            | Error::IndexOutsideSupport(_)
            | Error::PreconditionViolated(_) => 2,
            _ => 1,
        };
        Failure(code, e.to_string())
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure(2, msg.into())
}

fn rational(s: &str, what: &str) -> std::result::Result<BigRational, Failure> {
    let r: BigRational = s.trim().parse().map_err(|_| config(format!("{what}: `{s}` is not a rational number")))?;
    Ok(r)
}

fn read_versioned(path: &str) -> std::result::Result<String, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{path}: {e}")))?;
    if text.lines().next().map(str::trim) != Some(FORMAT_HEADER) {
        return Err(config(format!("{path}: missing `{FORMAT_HEADER}` header")));
    }
    Ok(text)
}

fn infer_vars(text: &str, prefix: char) -> usize {
    let b = text.as_bytes();
    let mut best = 0;
    for (i, c) in text.char_indices() {
        if c == prefix && (i == 0 || !b[i - 1].is_ascii_alphanumeric()) {
            let digits: String = text[i + 1..].chars().take_while(|c| c.is_ascii_digit()).collect();
            if let Ok(k) = digits.parse::<usize>() {
                best = best.max(k);
            }
        }
    }
    best.max(1)
}

struct Env {
    cli: Cli,
}

impl Env {
    fn prime(&self) -> u64 {
        self.cli.prime.unwrap_or(2)
    }

    fn eps(&self) -> std::result::Result<BigRational, Failure> {
        let e = self.cli.eps.as_deref().ok_or_else(|| config("--eps is required"))?;
        let e = rational(e, "--eps")?;
        if e <= BigRational::zero() {
            return Err(config("--eps must be positive"));
        }
        Ok(e)
    }

    fn radii(&self, n: usize) -> std::result::Result<Vec<BigRational>, Failure> {
        match &self.cli.radii {
            None => Ok(vec![BigRational::one(); n]),
            Some(s) => {
                let b = s.split(',').map(|x| rational(x, "--radii")).collect::<std::result::Result<Vec<_>, _>>()?;
                if b.len() != n {
                    return Err(config(format!("--radii needs {n} entries, found {}", b.len())));
                }
                if b.iter().any(|x| *x <= BigRational::zero()) {
                    return Err(config("--radii must be positive"));
                }
                Ok(b)
            }
        }
    }

    fn presentation(&self) -> std::result::Result<Option<EtalePresentation>, Failure> {
        let Some(path) = &self.cli.presentation else { return Ok(None) };
        let pres = EtalePresentation::parse(&read_versioned(path)?)?;
        if self.cli.prime.is_some_and(|p| p != pres.p) {
            return Err(config(format!("--prime {} disagrees with the presentation's p={}", self.prime(), pres.p)));
        }
        Ok(Some(pres))
    }

    fn names(&self, text: &str) -> Vec<String> {
        default_names(self.cli.vars.unwrap_or_else(|| infer_vars(text, 'X')))
    }

    fn ctx(&self, p: u64, n: usize) -> std::result::Result<RingContext, Failure> {
        Ok(RingContext::new(p, n, self.cli.len.unwrap_or(2))?)
    }

    fn lift(&self, p: u64, names: &[String]) -> std::result::Result<FrobLift, Failure> {
        match &self.cli.lift {
            None => Ok(FrobLift::canonical(p, names.len())),
            Some(path) => {
                let f = FrobLift::parse_with_names(&read_versioned(path)?, names)?;
                if f.p != p {
                    return Err(config(format!("lift is for p={}, not p={p}", f.p)));
                }
                Ok(f)
            }
        }
    }

    /// Parse and evaluate over `F_p[X]`.
    fn element(&self, expr: &str) -> std::result::Result<(DrwElement, Vec<String>), Failure> {
        let p = self.prime();
        let names = self.names(expr);
        let t = parse_term(expr, p, &names)?;
        let ctx = self.ctx(p, names.len())?;
        let lift = self.lift(p, &names)?;
        Ok((t.eval(ctx, &lift)?, names))
    }

    /// Parse and evaluate over the model ring of a presentation.
    fn model_element(&self, pres: &EtalePresentation, expr: &str) -> std::result::Result<DrwElement, Failure> {
        let model = pres.model.as_ref().ok_or_else(|| config("the presentation has no `model` line"))?;
        let t = parse_term(expr, pres.p, &model.names)?;
        let ctx = self.ctx(pres.p, model.names.len())?;
        Ok(t.eval(ctx, &FrobLift::canonical(pres.p, model.names.len()))?)
    }
}

fn element_lines(x: &DrwElement) -> String {
    if x.is_zero() {
        return "0\n".into();
    }
    x.render_lines().iter().map(|l| format!("{l}\n")).collect()
}

fn witt_line(w: &WittVec, names: &[String]) -> String {
    format!("({})", w.coords.iter().map(|c| c.render(names)).collect::<Vec<_>>().join(", "))
}

fn decomposition_text(r: &DecompositionResult, names: &[String]) -> String {
    let mut s = String::new();
    if r.is_zero() {
        s.push_str("0\n");
    }
    for l in r.render_lines(names) {
        let _ = writeln!(s, "{l}");
    }
    match &r.eps {
        Some(e) => {
            let _ = writeln!(s, "certified at eps = {e}");
            for c in &r.certificates {
                let c = c.summary();
                let _ = writeln!(s, "  {} : {} >= {}", c.description, c.lhs, c.rhs);
            }
        }
        None if !r.is_zero() => s.push_str("no certificate found on the eps grid\n"),
        None => {}
    }
    s
}

fn cmd_eval(env: &Env, expr: &str) -> std::result::Result<String, Failure> {
    let (x, _) = env.element(expr)?;
    Ok(if env.cli.json { json_line(&x.to_json()) } else { element_lines(&x) })
}

fn json_line<T: serde::Serialize>(v: &T) -> String {
    format!("{}\n", serde_json::to_string(v).expect("serializable"))
}

fn cmd_decompose(env: &Env, expr: &str) -> std::result::Result<String, Failure> {
    let eta = None;
    if let Some(pres) = env.presentation()? {
        let x = env.model_element(&pres, expr)?;
        let w = env.cli.max_weight.unwrap_or(x.max_weight() + 2);
        let r = etale_structure_decompose(&x, &pres, w, eta)?;
        let names = pres.names();
        return Ok(if env.cli.json { json_line(&decomposition_json(&x, &r, &names)) } else { decomposition_text(&r, &names) });
    }
    let (x, names) = env.element(expr)?;
    let lift = env.lift(env.prime(), &names)?;
    let r = poly_structure_decompose_certified(&x, &lift, eta)?;
    Ok(if env.cli.json { json_line(&decomposition_json(&x, &r, &names)) } else { decomposition_text(&r, &names) })
}

fn decomposition_json(x: &DrwElement, r: &DecompositionResult, names: &[String]) -> serde_json::Value {
    let e = x.to_json();
    let d = r.to_json(names);
    json!({
        "degree": e.degree,
        "level": e.level,
        "terms": e.terms,
        "decomposition": d.entries,
        "cert": d.cert,
    })
}

fn cmd_zeta(env: &Env, expr: &str) -> std::result::Result<String, Failure> {
    let eps = env.eps()?;
    let (x, _) = env.element(expr)?;
    let z = zeta(&x, &eps);
    Ok(if env.cli.json { json_line(&json!({"eps": eps.to_string(), "zeta": z})) } else { format!("ζ = {z}\n") })
}

fn cmd_gamma(env: &Env, expr: &str) -> std::result::Result<String, Failure> {
    let eps = env.eps()?;
    let (g, w) = if let Some(pres) = env.presentation()? {
        let x = env.model_element(&pres, expr)?;
        let setup = etale_setup(&pres)?;
        let b = match &env.cli.radii {
            Some(_) => env.radii(setup.source_n)?,
            None => setup.constants.values.b.clone(),
        };
        let w = x.to_witt()?;
        let ev = Evaluand::GammaModel { p: pres.p, coords: w.coords.clone(), images: setup.phi.images.clone(), skip: setup.skip.clone(), b };
        (ev.eval(&eps)?, w)
    } else {
        let (x, names) = env.element(expr)?;
        let w = x.to_witt()?;
        (gamma(&w, &eps, &env.radii(names.len())?), w)
    };
    let _ = w;
    Ok(if env.cli.json { json_line(&json!({"eps": eps.to_string(), "gamma": g})) } else { format!("γ = {g}\n") })
}

fn cmd_lazard(env: &Env, poly: &str) -> std::result::Result<String, Failure> {
    let p = env.prime();
    let names = env.names(poly);
    let f = parse_poly(poly, &names)?;
    let lift = env.lift(p, &names)?;
    let ctx = env.ctx(p, names.len())?;
    let t = lift.t_f(&f, ctx)?;
    let v = lift.v_f(&f, ctx)?;
    if env.cli.json {
        let show = |w: &WittVec| w.coords.iter().map(|c| c.render(&names)).collect::<Vec<_>>();
        return Ok(json_line(&json!({"lift": lift.render().trim(), "t_F": show(&t), "v_F": show(&v)})));
    }
    Ok(format!("t_F = {}\nv_F = {}\n", witt_line(&t, &names), witt_line(&v, &names)))
}

fn matrix_text(a: &[Vec<PolyFp>], names: &[String]) -> String {
    let rows: Vec<String> = a.iter().map(|r| format!("[{}]", r.iter().map(|x| x.render(names)).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

fn cmd_witt(env: &Env, expr: Option<&str>) -> std::result::Result<String, Failure> {
    if let Some(pres) = env.presentation()? {
        let base = default_names(pres.n);
        let rp = check_relatively_perfect(&pres)?;
        let mut s = String::new();
        let mut js = json!({
            "relatively_perfect": rp.ok,
            "frobenius_matrix": matrix_text(&rp.frobenius_matrix, &base),
            "det": rp.det.render(&base),
            "u0": rp.u0.as_ref().map(|u| matrix_text(u, &base)),
        });
        let _ = writeln!(s, "relatively perfect: {}", if rp.ok { "yes" } else { "no" });
        let _ = writeln!(s, "frobenius matrix: {}", matrix_text(&rp.frobenius_matrix, &base));
        let _ = writeln!(s, "det = {}", rp.det.render(&base));
        if let Some(u) = &rp.u0 {
            let _ = writeln!(s, "U0 = {}", matrix_text(u, &base));
        } else {
            let _ = writeln!(s, "witness: {}", rp.witness);
        }
        if rp.ok {
            let c = compute_constants(&pres)?;
            let _ = writeln!(s, "b = ({})", c.b.join(", "));
            let _ = writeln!(s, "C = {}  D = {}  E = {}", c.c, c.d, c.e);
            let _ = writeln!(s, "delta = {}", c.delta.as_deref().unwrap_or("unconstrained"));
            js["constants"] = serde_json::to_value(&c).expect("serializable");
        }
        if let Some(expr) = expr {
            let x = env.model_element(&pres, expr)?;
            if x.degree != 0 {
                return Err(Failure(2, "expected a degree-0 term".into()));
            }
            let w = x.to_witt()?;
            let mw = env.cli.max_weight.unwrap_or(x.max_weight() + 2);
            let r = overconv_witt_decompose(&w, &pres, mw, None)?;
            let names = pres.names();
            let _ = writeln!(s, "V-depth = {}", r.depth);
            s.push_str(&decomposition_text(&r.decomposition, &names));
            js["overconvergent"] = decomposition_json(&x, &r.decomposition, &names);
        }
        return Ok(if env.cli.json { json_line(&js) } else { s });
    }
    let expr = expr.ok_or_else(|| config("witt needs a term or --presentation"))?;
    let (x, names) = env.element(expr)?;
    if x.degree != 0 {
        return Err(Failure(2, "expected a degree-0 term".into()));
    }
    let w = x.to_witt()?;
    Ok(if env.cli.json {
        json_line(&json!({"coords": w.coords.iter().map(|c| c.render(&names)).collect::<Vec<_>>()}))
    } else {
        format!("{}\n", witt_line(&w, &names))
    })
}

fn cmd_check(env: &Env, suite: &str, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    if !SUITES.contains(&suite) {
        return Err(config(format!("unknown suite `{suite}`; one of {}", SUITES.join(", "))));
    }
    let mut cfg = SuiteConfig::new(env.cli.samples, env.cli.seed);
    if let Some(p) = env.cli.prime {
        cfg.primes = Some(vec![p]);
    }
    if env.cli.vars.is_some() {
        cfg.max_vars = env.cli.vars;
    }
    if env.cli.len.is_some() {
        cfg.max_len = env.cli.len;
    }
    let r = run_suite(suite, &cfg)?;
    if env.cli.json {
        let _ = out.write_all(json_line(&r).as_bytes());
    } else {
        let _ = writeln!(out, "{}", r.summary());
        for f in r.failures.iter().take(20) {
            let _ = writeln!(out, "  FAIL {f}");
        }
    }
    Ok(if r.passed() { 0 } else { 1 })
}

/// Run the command line `argv` (including the program name), writing to `out` and `err`;
/// returns the exit code.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    if cli.prime.is_some_and(|p| !crate::wittcore::is_prime(p)) {
        let _ = writeln!(err, "error: --prime {} is not prime", cli.prime.unwrap());
        return 2;
    }
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            let _ = writeln!(err, "error: cannot start {t} threads");
            return 2;
        }
    } else {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    let env = Env { cli };
    let res = match &env.cli.command {
        Command::Eval { expr } => cmd_eval(&env, expr).map(|s| (0, s)),
        Command::Decompose { expr } => cmd_decompose(&env, expr).map(|s| (0, s)),
        Command::Zeta { expr } => cmd_zeta(&env, expr).map(|s| (0, s)),
        Command::Gamma { expr } => cmd_gamma(&env, expr).map(|s| (0, s)),
        Command::Lazard { poly } => cmd_lazard(&env, poly).map(|s| (0, s)),
        Command::Witt { expr } => cmd_witt(&env, expr.as_deref()).map(|s| (0, s)),
        Command::Check { suite } => cmd_check(&env, suite, out).map(|c| (c, String::new())),
    };
    match res {
        Ok((code, s)) => {
            let _ = out.write_all(s.as_bytes());
            code
        }
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        default_names(n)
    }

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = std::iter::once("wdrw").chain(args.iter().copied()).map(String::from).collect();
        let (mut out, mut err) = (vec![], vec![]);
        let code = run(&argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_examples() {
        let n = names(1);
        assert_eq!(parse_term("(teich X1)", 2, &n).unwrap(), Term::Teich(PolyZ::var(1, 0)));
        let t = parse_term("(e 1 ; 1/2 ; {1})", 2, &n).unwrap();
        assert_eq!(t, Term::E { eta: BigInt::one(), a: vec![Q64::new(1, 2)], parts: vec![0] });
        let ctx = RingContext::new(2, 1, 2).unwrap();
        let x = t.eval(ctx, &FrobLift::canonical(2, 1)).unwrap();
        let key = x.terms.keys().next().unwrap();
        assert_eq!((key.a.clone(), key.parts.clone()), (vec![Q64::new(1, 2)], vec![0]));
        assert!(matches!(parse_term("(+ (d X1))", 2, &n), Err(Error::Syntax { .. })));
        assert!(matches!(parse_term("(d X1 X1)", 2, &n), Err(Error::Syntax { .. })));
        assert!(matches!(parse_term("(e 1 ; 1/3 ; {})", 2, &n), Err(Error::Syntax { .. })));
        assert!(matches!(parse_term("(teich X1", 2, &n), Err(Error::Syntax { .. })));
        assert_eq!(parse_term("(e 1 ; 1/2^1 ; {})", 2, &n).unwrap(), parse_term("(e 1 ; 1/2 ; {})", 2, &n).unwrap());
    }

    #[test]
    fn syntax_positions() {
        let n = names(1);
        match parse_term("(teich X1 + Z)", 2, &n) {
            Err(Error::Syntax { pos, .. }) => assert!(pos >= 12, "{pos}"),
            r => panic!("{r:?}"),
        }
        match parse_term("(foo X1)", 2, &n) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 1),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let n = names(2);
        for s in [
            "(teich X1^2 + X2)",
            "(e 3 ; 1/2,1/4 ; {2,1})",
            "(* (V (teich X1)) (teich X2))",
            "(d (F (lift X1*X2 + 1)))",
            "(- (+ X1 X2 7) 2)",
        ] {
            let t = parse_term(s, 2, &n).unwrap();
            let printed = t.render(&n);
            assert_eq!(parse_term(&printed, 2, &n).unwrap(), t, "{s}");
            assert_eq!(parse_term(&printed, 2, &n).unwrap().render(&n), printed);
        }
    }

    #[test]
    fn degree_mismatch() {
        let n = names(1);
        let t = parse_term("(+ X1 (d X1))", 2, &n).unwrap();
        let ctx = RingContext::new(2, 1, 2).unwrap();
        assert!(matches!(t.eval(ctx, &FrobLift::canonical(2, 1)), Err(Error::DegreeMismatch(_))));
    }

    #[test]
    fn eval_two_teichmuller() {
        let (code, out, _) = run_str(&["eval", "--prime", "2", "--vars", "1", "--len", "2", "(+ (teich X1) (teich X1))"]);
        assert_eq!(code, 0);
        assert_eq!(out, "e(2; 1; {}) : 1\n");
    }

    #[test]
    fn zeta_of_v() {
        let (code, out, _) = run_str(&["zeta", "--eps", "1/4", "(V (teich X1))"]);
        assert_eq!(code, 0);
        assert_eq!(out, "ζ = 7/8\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(&["eval", "(+ (d X1))"]).0, 2);
        assert_eq!(run_str(&["zeta", "(teich X1)"]).0, 2);
        assert_eq!(run_str(&["zeta", "--eps", "0.25", "(teich X1)"]).0, 2);
        assert_eq!(run_str(&["check", "nonsense"]).0, 2);
        assert_eq!(run_str(&["frobnicate"]).0, 2);
        assert_eq!(run_str(&["eval", "--prime", "4", "X1"]).0, 2);
        assert_eq!(run_str(&["check", "dga", "--prime", "3", "--vars", "2", "--len", "3", "--samples", "10"]).0, 0);
    }

    #[test]
    fn json_schema() {
        let (code, out, _) = run_str(&["eval", "--json", "--len", "2", "(d (V (teich X1)))"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        for k in ["degree", "level", "terms"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        let t = &v["terms"][0];
        for k in ["eta", "weights", "parts", "coeff"] {
            assert!(t.get(k).is_some(), "{k}");
        }
        let (code, out, _) = run_str(&["decompose", "--json", "(V (teich X1))"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["cert"]["eps"].is_string());
        assert!(v["cert"]["bounds"].is_array());
    }

    #[test]
    fn decompose_text() {
        let (code, out, _) = run_str(&["decompose", "(d (teich X1))"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("H e(1; 1; {1}) : 1\n"), "{out}");
        assert!(out.contains("certified at eps"));
    }
}
