//! Acceptance run: one line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::json;

use qte::auditctl::{attack_gallery, evaluate_gallery, run_all, run_audit, AuditCase, AuditReport, Check};
use qte::constructions::{id_accept, otp_accept, triv_reject};
use qte::schemes::{correctness_gap, encryption_gap, DEFAULT_DIM_CAP};

const SEED: u64 = 20_241;

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion { id, title, checks: Vec::new(), notes: Vec::new() }
    }

    fn report(mut self, r: AuditReport) -> Self {
        if let Some(e) = &r.error {
            self.notes.push(format!("{} stopped: {e}", r.case));
            self.checks.push(Check::identity(format!("{} completed", r.case), 1.0, 0.0, 0.0));
        }
        self.checks.extend(r.checks.into_iter().map(|mut c| {
            c.name = format!("{}: {}", r.case, c.name);
            c
        }));
        self
    }

    fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

fn audit(id: &str, params: &[(&str, serde_json::Value)]) -> AuditReport {
    let mut case = AuditCase::new(id, SEED);
    for (k, v) in params {
        case = case.with_param(k, v.clone());
    }
    run_audit(&case).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn timed(limit: Duration, f: impl FnOnce() -> AuditReport) -> (AuditReport, Check) {
    let start = Instant::now();
    let r = f();
    let t = start.elapsed().as_secs_f64();
    let c = Check::at_most(format!("{} wall time (s)", r.case), t, limit.as_secs_f64(), 0.0);
    (r, c)
}

fn baselines() -> Vec<Check> {
    let cap = DEFAULT_DIM_CAP;
    let otp = otp_accept(2).unwrap();
    let id = id_accept(2).unwrap();
    let mut out = vec![
        Check::identity("OTP_ACCEPT ε", correctness_gap(&otp, cap).unwrap().eps, 0.0, 1e-10),
        Check::identity("OTP_ACCEPT α", encryption_gap(&otp, cap).unwrap().alpha, 0.0, 1e-10),
        Check::identity("ID_ACCEPT α", encryption_gap(&id, cap).unwrap().alpha, 1.0, 1e-10),
    ];
    for q in [2, 3] {
        let s = triv_reject(q).unwrap();
        let g = attack_gallery(&s, 4, SEED, cap).unwrap();
        let sum = evaluate_gallery(&s, &g, 0, 1, cap).unwrap();
        let worst = sum.results.iter().map(|r| r.max_distance).fold(0.0, f64::max);
        out.push(Check::identity(format!("TRIV_REJECT(q={q}) profiles are zero"), worst, 0.0, 0.0));
    }
    out
}

fn determinism() -> (Vec<Check>, Vec<String>) {
    let start = Instant::now();
    let first = run_all(SEED, DEFAULT_DIM_CAP, &BTreeMap::new()).expect("suite");
    let once = start.elapsed().as_secs_f64();
    let second = run_all(SEED, DEFAULT_DIM_CAP, &BTreeMap::new()).expect("suite");
    let strip = |rs: &[AuditReport]| {
        rs.iter().map(|r| serde_json::to_string(&r.without_timing()).unwrap()).collect::<Vec<_>>()
    };
    let (a, b) = (strip(&first), strip(&second));
    let differing: Vec<String> =
        first.iter().zip(a.iter().zip(&b)).filter(|(_, (x, y))| x != y).map(|(r, _)| r.case.clone()).collect();
    let failing: Vec<String> = first.iter().filter(|r| !r.passed()).map(|r| r.case.clone()).collect();
    let bitwise = first.iter().zip(&second).all(|(x, y)| {
        x.checks.iter().zip(&y.checks).all(|(c, d)| c.lhs.to_bits() == d.lhs.to_bits() && c.rhs.to_bits() == d.rhs.to_bits())
            && x.values.values().zip(y.values.values()).all(|(u, v)| u.to_bits() == v.to_bits())
    });
    let mut notes = vec![format!("one suite run took {once:.1}s")];
    if !differing.is_empty() {
        notes.push(format!("reports differ: {}", differing.join(", ")));
    }
    if !failing.is_empty() {
        notes.push(format!("failing cases: {}", failing.join(", ")));
    }
    let checks = vec![
        Check::identity("reports identical modulo wall time", differing.len() as f64, 0.0, 0.0),
        Check::identity("numeric fields identical bit for bit", if bitwise { 0.0 } else { 1.0 }, 0.0, 0.0),
        Check::at_most("full suite wall time (s)", once, 600.0, 0.0),
        Check::identity("all suite cases pass", failing.len() as f64, 0.0, 0.0),
    ];
    (checks, notes)
}

fn main() -> ExitCode {
    let mut all = Vec::new();

    let (t01, t01_time) = timed(Duration::from_secs(5), || audit("T01", &[("trials", json!(200)), ("max_dim", json!(8))]));
    all.push(Criterion::new(1, "Helstrom saturation").report(t01).check(t01_time));
    all.push(Criterion::new(2, "pure-state trace distance").report(audit("T02", &[("trials", json!(200))])));
    all.push(Criterion::new(3, "coherent gentle measurement").report(audit("T05", &[("trials", json!(200))])));
    all.push(Criterion::new(4, "block additivity").report(audit("T04", &[("trials", json!(100))])));
    all.push(Criterion::new(5, "copies bound").report(audit("T03", &[("trials", json!(50))])));
    let mut c6 = Criterion::new(6, "baselines");
    for c in baselines() {
        c6 = c6.check(c);
    }
    all.push(c6);
    all.push(Criterion::new(7, "distinguisher vs ID_ACCEPT").report(audit("T08", &[])));
    all.push(Criterion::new(8, "parallel composition").report(audit("T07", &[("trials", json!(20))])));
    all.push(Criterion::new(9, "Double separation").report(audit("T18", &[("n", json!(3))])));
    all.push(Criterion::new(10, "share-split separation").report(audit("T11", &[])));
    all.push(Criterion::new(11, "malleability").report(audit("T16", &[])));
    all.push(Criterion::new(12, "non-quantum-encryption").report(audit("T17", &[("n", json!(2))])));
    all.push(Criterion::new(13, "star flag identity").report(audit("T19", &[])));
    all.push(
        Criterion::new(14, "revocation to tamper evidence")
            .report(audit("T14", &[("n", json!([2, 3]))]))
            .report(audit("T15", &[])),
    );
    all.push(Criterion::new(15, "revocation translations").report(audit("T13", &[])));
    all.push(
        Criterion::new(16, "probability lemmas")
            .report(audit("T21", &[("trials", json!(1000))]))
            .report(audit("T12", &[("trials", json!(1000))])),
    );
    all.push(Criterion::new(17, "TE implies encryption consistency").report(audit("T09", &[("n", json!([2, 3, 4]))])));
    let (checks, notes) = determinism();
    let mut c18 = Criterion::new(18, "determinism and suite time");
    for c in checks {
        c18 = c18.check(c);
    }
    c18.notes = notes;
    all.push(c18);

    let mut failed = 0;
    for c in &all {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {:>2}: {} ({} checks)", c.id, c.title, c.checks.len());
        for bad in c.checks.iter().filter(|x| !x.pass) {
            println!("        failed {}: lhs={:e} rhs={:e} slack={:e} tol={:e}", bad.name, bad.lhs, bad.rhs, bad.slack, bad.tolerance);
        }
        for n in &c.notes {
            println!("        note: {n}");
        }
        if !c.passed() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", all.len() - failed, all.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
