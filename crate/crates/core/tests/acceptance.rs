//! One test per acceptance criterion. Each prints a single `PASS`/`FAIL` line with the
//! check count and wall time to stderr, then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use wdrw::checks::{run_suite, SuiteConfig, SuiteReport};
use wdrw::lazard::FrobLift;
use wdrw::poly::{default_names, PolyZ};
use wdrw::structure::{check_relatively_perfect, EtalePresentation};
use wdrw::wittcore::RingContext;

const SEED: u64 = 20261016;

fn report(id: u32, title: &str, limit_s: u64, f: impl FnOnce() -> Vec<SuiteReport>) {
    let start = Instant::now();
    let reports = f();
    let elapsed = start.elapsed();
    let checks: usize = reports.iter().map(|r| r.checks).sum();
    let failures: Vec<&String> = reports.iter().flat_map(|r| &r.failures).collect();
    let in_time = elapsed < Duration::from_secs(limit_s);
    let ok = failures.is_empty() && checks > 0 && in_time;
    // Written to the raw handle so the line shows up without --nocapture.
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2} {title}: {} ({} checks, {} failures, {:.1}s of {limit_s}s)",
        if ok { "PASS" } else { "FAIL" },
        checks,
        failures.len(),
        elapsed.as_secs_f64()
    );
    for f in failures.iter().take(10) {
        eprintln!("  {f}");
    }
    assert!(ok, "criterion {id} failed");
}

fn suite(name: &str, samples: usize) -> SuiteReport {
    run_suite(name, &SuiteConfig::new(samples, SEED)).unwrap()
}

fn single(name: &str, ok: bool, what: &str) -> SuiteReport {
    let mut r = SuiteReport::new(name);
    r.check(ok, || what.to_string());
    r
}

#[test]
fn c01_ghost_homomorphism_and_witt_axioms() {
    report(1, "ghost homomorphism and Witt ring axioms", 60, || vec![suite("witt", 200)]);
}

#[test]
fn c02_dga_identities() {
    report(2, "dga identities", 120, || vec![suite("dga", 100)]);
}

#[test]
fn c03_oracle_consistency() {
    report(3, "oracle round trips and homomorphism", 120, || vec![suite("oracle", 200)]);
}

#[test]
fn c04_truncated_decomposition_uniqueness() {
    report(4, "decompose/recompose and zero iff zero", 120, || vec![suite("decompose", 100)]);
}

#[test]
fn c05_mod_p_rewriting() {
    report(5, "mod-p rewriting counts and expansion", 180, || vec![suite("rewrite", 0)]);
}

#[test]
fn c06_kernel_splitting() {
    report(6, "kernel rank and empty H-part", 300, || vec![suite("kernel", 0)]);
}

#[test]
fn c07_pseudovaluations() {
    report(7, "pseudovaluation inequalities", 120, || vec![suite("pseudoval", 100)]);
}

#[test]
fn c08_lazard() {
    report(8, "Lazard morphism and v_F", 120, || {
        let f = FrobLift::parse("lift p=2 X1 -> X1^2 + 2*X1", 1).unwrap();
        let t = f.t_f(&PolyZ::var(1, 0), RingContext::new(2, 1, 3).unwrap()).unwrap();
        let names = default_names(1);
        let coords: Vec<String> = t.coords.iter().map(|c| c.render(&names)).collect();
        let worked = coords == ["X1", "X1", "X1^3 + X1^2 + X1"];
        vec![single("worked value", worked, &format!("t_F(X1) = {coords:?}")), suite("lazard", 50)]
    });
}

#[test]
fn c09_relatively_perfect() {
    report(9, "relatively perfect presentations", 120, || {
        let rp = check_relatively_perfect(&EtalePresentation::artin_schreier(2)).unwrap();
        let det_one = rp.ok && rp.det.render(&default_names(1)) == "1";
        let nil = !check_relatively_perfect(&EtalePresentation::nilpotent(2)).unwrap().ok;
        vec![
            single("Artin-Schreier", det_one, "det(U0) != 1"),
            single("nilpotent", nil, "nilpotent presentation accepted"),
            suite("relperf", 50),
        ]
    });
}

#[test]
fn c10_main_decomposition_engine() {
    report(10, "poly, etale and overconvergent decompositions", 300, || vec![suite("structure", 50)]);
}
