//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/naive.rs"]
mod naive;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use bhg_core::sumrep::brute_force_rep;
use bhg_core::verify::{
    proof_diagnostics, verify_strong_prefixes, Check, DiagnosticsBudget, DEFAULT_ENUMERATION_LIMIT,
};
use bhg_core::{classic_greedy, strong_greedy, GreedyOptions, Params, SumTableSet};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [(usize, usize); 6] = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)];
const MIAN_CHOWLA_PREFIX: [u64; 10] = [1, 2, 4, 8, 13, 21, 31, 45, 66, 81];

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

fn strong(h: usize, g: usize, n: usize) -> Vec<u64> {
    strong_greedy(Params::new(h, g, n).unwrap(), &GreedyOptions::default(), None)
        .unwrap()
        .terms
}

fn classic(h: usize, g: usize, n: usize) -> Vec<u64> {
    classic_greedy(Params::new(h, g, n).unwrap(), &GreedyOptions::default(), None)
        .unwrap()
        .terms
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

/// `a_n^g <= (2g)^g n^(hg+h-1)` at every n, in arbitrary precision.
fn growth_bound_on_grid() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (h, g) in GRID {
        for (i, &a) in strong(h, g, 30).iter().enumerate() {
            let n = i as u64 + 1;
            let lhs = big(a).pow(g as u32);
            let rhs = big(2 * g as u64).pow(g as u32) * big(n).pow((h * g + h - 1) as u32);
            checked += 1;
            if lhs > rhs {
                failures.push(format!("h={h} g={g} n={n} a_n={a}"));
            }
        }
    }
    let mut o = Outcome::new(
        failures.is_empty(),
        format!("{checked} terms checked, {} over", failures.len()),
    );
    o.notes = failures;
    o
}

fn g1_collapse() -> Outcome {
    let s = strong(2, 1, 50);
    let c = classic(2, 1, 50);
    let oracle = naive::naive_classic(2, 1, 50);
    let pass = s == c && c == oracle && s[..10] == MIAN_CHOWLA_PREFIX;
    Outcome::new(
        pass,
        format!(
            "strong==classic: {}, ==oracle: {}, a_50={}",
            s == c,
            c == oracle,
            s.last().unwrap()
        ),
    )
}

/// `a_n <= 2n^(2h-1)` for the classic greedy with `g = 1`.
fn classic_bound() -> Outcome {
    let mut failures = Vec::new();
    for h in 2..=4usize {
        for (i, &a) in classic(h, 1, 30).iter().enumerate() {
            let n = i as u64 + 1;
            if big(a) > big(2) * big(n).pow(2 * h as u32 - 1) {
                failures.push(format!("h={h} n={n} a_n={a}"));
            }
        }
    }
    let mut o = Outcome::new(
        failures.is_empty(),
        format!("h in 2..=4, 90 terms, {} over", failures.len()),
    );
    o.notes = failures;
    o
}

fn oracle_equivalence() -> Outcome {
    let results: Vec<(String, usize, Vec<String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = GRID
            .iter()
            .map(|&(h, g)| scope.spawn(move || oracle_equivalence_at(h, g)))
            .collect();
        handles.into_iter().map(|t| t.join().unwrap()).collect()
    });
    let sums: usize = results.iter().map(|r| r.1).sum();
    let notes: Vec<String> = results
        .into_iter()
        .flat_map(|r| r.2.into_iter().map(move |n| format!("{}: {n}", r.0)))
        .collect();
    let mut o = Outcome::new(
        notes.is_empty(),
        format!(
            "{sums} sums compared over 180 prefixes, {} mismatches",
            notes.len()
        ),
    );
    o.notes = notes;
    o
}

fn oracle_equivalence_at(h: usize, g: usize) -> (String, usize, Vec<String>) {
    let terms = strong(h, g, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed + (10 * h + g) as u64);
    let mut compared = 0;
    let mut bad = Vec::new();
    for k in 1..=terms.len() {
        let prefix = &terms[..k];
        let tables = SumTableSet::from_elements(h, prefix).unwrap();
        let support: BTreeSet<u64> = tables.table(h).keys().copied().collect();
        let mut probes: Vec<u64> = support.iter().copied().collect();
        let top = h as u64 * prefix.iter().max().unwrap() + h as u64;
        let mut absent = 0;
        while absent < 20 {
            let x = rng.gen_range(0..=top);
            if !support.contains(&x) {
                probes.push(x);
                absent += 1;
            }
        }
        for x in probes {
            let want = brute_force_rep(prefix, h, x, DEFAULT_ENUMERATION_LIMIT).unwrap();
            compared += 1;
            if tables.rep_count(x) != want {
                bad.push(format!(
                    "prefix {k} x={x}: table {} vs enumeration {want}",
                    tables.rep_count(x)
                ));
            }
        }
    }
    let reports = verify_strong_prefixes(&terms, h, g, DEFAULT_ENUMERATION_LIMIT).unwrap();
    for r in reports.iter().filter(|r| !r.is_strong()) {
        bad.push(format!("prefix {} is not a strong B_h[g] set", r.n));
    }
    (format!("h={h} g={g}"), compared, bad)
}

/// The window inequalities of the growth argument on two small runs.
fn proof_inequalities() -> Outcome {
    let checks = [
        (Check::UnionBound, "members+forbidden <= 2g(n+1)^(h+(h-1)/g) - 1"),
        (Check::F1Empty, "|F_1| = 0"),
        (Check::FsBound, "|F_s| <= 2n^(h+(h-1)/g)"),
        (Check::RIncrement, "R_s(A u m) <= R_s(A) + T_s(m)"),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut failing = Vec::new();
    for (h, g, n) in [(2, 2, 10), (3, 2, 8)] {
        let rec = strong_greedy(Params::new(h, g, n).unwrap(), &GreedyOptions::default(), None).unwrap();
        let diag = proof_diagnostics(&rec, DiagnosticsBudget::default()).unwrap();
        for (check, label) in checks {
            let ok = diag.check_holds(check);
            let count = diag.check_instances(check);
            pass &= ok && count > 0;
            notes.push(format!(
                "({h},{g},{n}) {label}: {count} instances, {}",
                if ok { "all hold" } else { "VIOLATED" }
            ));
            if !ok {
                failing.push(format!("({h},{g},{n}) {label}"));
                let first = diag
                    .failures()
                    .into_iter()
                    .find(|f| f.contains(&check.to_string()));
                if let Some(f) = first {
                    notes.push(format!("  first: {f}"));
                }
            }
        }
    }
    let detail = if failing.is_empty() {
        "every recorded instance holds".to_owned()
    } else {
        format!("violated: {}", failing.join("; "))
    };
    Outcome { pass, detail, notes }
}

fn bhg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bhg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fitted_exponent() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let file = dir.path().join("b2.txt");
    let file = file.to_str().unwrap();
    let gen = bhg(&[
        "generate", "--h", "2", "--g", "1", "--n", "50", "--format", "bfile", "-o", file,
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = bhg(&["fit", file, "--h", "2", "--g", "1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    Outcome::new(
        (2.0 - 0.15..3.0).contains(&slope),
        format!("slope {slope:.4}, band [1.85, 3)"),
    )
}

fn round_trip() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let mut notes = Vec::new();
    let mut cases = 0;
    for (h, g) in GRID {
        let (hs, gs) = (h.to_string(), g.to_string());
        for (fmt, ext) in [("json", "json"), ("csv", "csv"), ("bfile", "txt")] {
            let p = |tag: &str| {
                dir.path()
                    .join(format!("{h}-{g}-{tag}.{ext}"))
                    .to_str()
                    .unwrap()
                    .to_owned()
            };
            let (first, second, rewritten) = (p("a"), p("b"), p("c"));
            let base = [
                "generate", "--h", &hs, "--g", &gs, "--n", "30", "--format", fmt, "-o",
            ];
            let runs = [first.as_str(), second.as_str()].map(|out| {
                let mut args = base.to_vec();
                args.push(out);
                bhg(&args).status.code()
            });
            let verify = bhg(&["verify", &first, "--h", &hs, "--g", &gs, "--rewrite", &rewritten]);
            cases += 1;
            let a = std::fs::read(&first).unwrap_or_default();
            let problems = [
                (runs != [Some(0), Some(0)], "generate failed"),
                (
                    a != std::fs::read(&second).unwrap_or_default(),
                    "repeated runs differ",
                ),
                (verify.status.code() != Some(0), "verify failed"),
                (
                    a != std::fs::read(&rewritten).unwrap_or_default(),
                    "rewrite not byte-exact",
                ),
            ];
            for (bad, what) in problems {
                if bad {
                    notes.push(format!("h={h} g={g} {fmt}: {what}"));
                }
            }
        }
    }
    let mut o = Outcome::new(
        notes.is_empty(),
        format!("{cases} grid/format cases, {} problems", notes.len()),
    );
    o.notes = notes;
    o
}

fn main() {
    let criteria: [Criterion; 7] = [
        (
            "1",
            "strong greedy growth bound, exact, grid n=30",
            growth_bound_on_grid,
        ),
        (
            "2",
            "g=1 strong equals classic equals naive oracle, n=50",
            g1_collapse,
        ),
        ("3", "classic bound a_n <= 2n^(2h-1), h=2..4, n=30", classic_bound),
        (
            "4",
            "sum tables agree with enumeration on every grid prefix",
            oracle_equivalence,
        ),
        (
            "5",
            "growth-argument inequalities on (2,2,10) and (3,2,8)",
            proof_inequalities,
        ),
        ("6", "fitted exponent for h=2, g=1, 50 terms", fitted_exponent),
        ("7", "generate/verify round trip and repeatability", round_trip),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::new(false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id}: {name}: {} [{secs:.1}s]",
            outcome.detail
        );
        for note in &outcome.notes {
            println!("    {note}");
        }
        failed += usize::from(!outcome.pass);
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
