//! The twelve acceptance criteria, run one after another inside a single
//! test so that timings are not skewed by parallel test threads.

use crystal_strata::oracles::run_suite;
use std::time::{Duration, Instant};

struct Criterion {
    id: u32,
    suite: &'static str,
    what: &'static str,
    limit_secs: u64,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        suite: "exterior-breaks",
        what: "exterior-power break points, r <= 6, slopes <= 3",
        limit_secs: 10,
    },
    Criterion {
        id: 2,
        suite: "primitive-vectors",
        what: "primitive vectors under isogenies, p in {2,3}, s <= 4",
        limit_secs: 20,
    },
    Criterion { id: 3, suite: "as-counts", what: "Artin-Schreier counts against tuple enumeration", limit_secs: 60 },
    Criterion { id: 4, suite: "prank", what: "three-way p-rank agreement", limit_secs: 60 },
    Criterion { id: 5, suite: "functor", what: "exterior power and iterate commute with slopes", limit_secs: 30 },
    Criterion {
        id: 6,
        suite: "break-locus",
        what: "break-point locus as a difference of closed strata",
        limit_secs: 5,
    },
    Criterion { id: 7, suite: "mazur", what: "Newton polygon above Hodge polygon", limit_secs: 30 },
    Criterion {
        id: 8,
        suite: "semicontinuity",
        what: "semicontinuity and constant end point on families",
        limit_secs: 30,
    },
    Criterion { id: 9, suite: "purity", what: "codimension-one boundaries", limit_secs: 120 },
    Criterion { id: 10, suite: "fiber-strata", what: "fiber-count strata equal p-rank strata", limit_secs: 60 },
    Criterion { id: 11, suite: "witt", what: "Witt backends agree", limit_secs: 10 },
    Criterion { id: 12, suite: "split", what: "slope splitting round trip", limit_secs: 30 },
];

const SEED: u64 = 0;

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    for c in CRITERIA {
        let start = Instant::now();
        let result = run_suite(c.suite, SEED);
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(c.limit_secs);
        let (ok, detail) = match &result {
            Ok(rep) => {
                (rep.pass() && rep.cases > 0 && in_time, format!("{} cases, {} failures", rep.cases, rep.failure_count))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "[{}] criterion {:>2} ({}): {}; {detail}; {:.2}s of {}s",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.suite,
            c.what,
            elapsed.as_secs_f64(),
            c.limit_secs
        );
        if let Ok(rep) = &result {
            for f in &rep.failures {
                println!("        {f}");
            }
        }
        if !ok {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
