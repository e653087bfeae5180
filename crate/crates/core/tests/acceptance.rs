//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed; any failing
//! criterion makes the process exit nonzero.

use std::time::{Duration, Instant};

use kochenlab_core::brauer::QuaternionAlgebra;
use kochenlab_core::exec::Exec;
use kochenlab_core::verify::{self, CheckOutcome};
use kochenlab_core::Result;

const SEED: u64 = 20_240_601;

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Result<Vec<CheckOutcome>>,
}

fn c1() -> Result<Vec<CheckOutcome>> {
    let ps = [2, 3, 5, 7, 11];
    let taus = [(1, 1), (1, 2), (2, 1)];
    Ok(vec![verify::kochen_table(&ps, &taus, 10_000, SEED, Exec::default())?])
}

fn c2() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::exclusion_primes(199, 10_000, SEED, Exec::default())?])
}

fn c3() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::exclusion_counterexample()?])
}

fn c4() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::lower_bound_toy(1000, SEED)?])
}

fn c5() -> Result<Vec<CheckOutcome>> {
    verify::combinators(200, &[2, 3, 4, 5, 7, 9], SEED, Exec::default())
}

fn c6() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::weil_equivalence(100, SEED, Exec::default())?])
}

fn c7() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::radical_identity(50, SEED)?])
}

fn c8() -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        verify::brauer_construct(5, 2, 13)?,
        verify::brauer_reciprocity(1000, SEED)?,
    ])
}

fn c9() -> Result<Vec<CheckOutcome>> {
    let a = QuaternionAlgebra::from_ints(2, 5)?;
    Ok(vec![verify::t_containment(&a, 10, Exec::default())?])
}

fn c10() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::gaussian_decomposition()?, verify::kill_checks()?])
}

fn c11() -> Result<Vec<CheckOutcome>> {
    Ok(vec![verify::ring_family_agreement(200, 30, SEED, Exec::default())?])
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "Kochen valuation table", limit: secs(30), run: c1 },
        Criterion { id: 2, title: "exclusion primes", limit: secs(10), run: c2 },
        Criterion { id: 3, title: "counterexample coherence", limit: None, run: c3 },
        Criterion { id: 4, title: "lower-bound certificate", limit: secs(10), run: c4 },
        Criterion { id: 5, title: "diophantine combinators", limit: secs(120), run: c5 },
        Criterion { id: 6, title: "Weil restriction", limit: secs(120), run: c6 },
        Criterion { id: 7, title: "radical-power identity", limit: None, run: c7 },
        Criterion { id: 8, title: "Brauer reciprocity and construction", limit: secs(30), run: c8 },
        Criterion { id: 9, title: "trace-difference containment", limit: secs(60), run: c9 },
        Criterion { id: 10, title: "number-field decomposition", limit: secs(30), run: c10 },
        Criterion { id: 11, title: "cross-module consistency", limit: None, run: c11 },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let in_time = c.limit.is_none_or(|l| took <= l);
        let (ok, summary) = match &result {
            Ok(checks) => (
                checks.iter().all(|k| k.pass),
                checks
                    .iter()
                    .map(|k| {
                        let mut s = format!("{} {}/{}", k.name, k.cases - k.failures, k.cases);
                        if let Some(d) = &k.detail {
                            s.push_str(&format!(" [{d}]"));
                        }
                        s
                    })
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
            Err(e) => (false, format!("error: {e}")),
        };
        let pass = ok && in_time;
        let limit = c.limit.map(|l| format!(" (limit {}s)", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {:>2} {}: {} in {:.2}s{}: {}",
            c.id,
            c.title,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit,
            summary
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria passed", criteria.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
