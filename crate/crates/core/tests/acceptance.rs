//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.
//!
//! Run with `cargo test -p cubeavg-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use cubeavg::combinatorics::{cyclic_correspondence, recurrence_set, LatticeSubset};
use cubeavg::random::InstanceBounds;
use cubeavg::rational::{int, ratio};
use cubeavg::suite::{run_suite, Property, SuiteConfig, SuiteReport};
use cubeavg::Exec;

const INSTANCES: usize = 100;
const TIME_LIMIT: Duration = Duration::from_secs(60);

struct Line {
    id: usize,
    title: &'static str,
    passed: bool,
    note: String,
    elapsed: Duration,
}

fn suite(seed: u64, properties: &[Property], bounds: InstanceBounds) -> SuiteReport {
    let mut cfg = SuiteConfig::new(seed, INSTANCES);
    cfg.properties = properties.to_vec();
    cfg.bounds = bounds;
    run_suite(&cfg)
}

fn summarize(report: &SuiteReport) -> (bool, String) {
    let parts: Vec<String> = report
        .properties
        .iter()
        .map(|p| format!("{} {}/{}", p.property, p.checked - p.failed, p.checked))
        .collect();
    let mut note = parts.join(", ");
    if let Some(f) = report.failures.first() {
        note.push_str(&format!("; first failure: {} ({}), instance seed {}", f.message, f.detail, f.instance.seed));
    }
    (report.passed, note)
}

fn criterion(id: usize, title: &'static str, run: impl FnOnce() -> (bool, String)) -> Line {
    let start = Instant::now();
    let (passed, note) = run();
    let elapsed = start.elapsed();
    Line {
        id,
        title,
        passed: passed && elapsed < TIME_LIMIT,
        note,
        elapsed,
    }
}

fn worked_z4_example() -> (bool, String) {
    let a = LatticeSubset::new(vec![4], &[vec![0], vec![2]]).unwrap();
    let (system, set) = cyclic_correspondence(&a);
    let rep = recurrence_set(&system, &set, &int(0), Exec::default()).unwrap();
    let ok = rep.good_set == vec![vec![0], vec![2]] && rep.syndetic_gap == Some(2) && rep.threshold == ratio(1, 4);
    (ok, format!("Z_4 good set {:?}, gap {:?}", rep.good_set, rep.syndetic_gap))
}

fn main() {
    let base = InstanceBounds::default();
    let lines = vec![
        criterion(1, "seminorm oracle equivalence (|X| ≤ 6, d ≤ 3)", || {
            summarize(&suite(101, &[Property::SeminormOracle], base.with_points(6)))
        }),
        criterion(2, "multi-period stability and iterated limit", || {
            summarize(&suite(202, &[Property::MultiPeriod, Property::IteratedLimit], base))
        }),
        criterion(3, "lower bound μ(A)^{2^d} and limit = ⫴1_A⫴^{2^d}", || {
            summarize(&suite(303, &[Property::LowerBound], base.weighted(true)))
        }),
        criterion(4, "L² upper bound by min seminorm; d = 1 identity", || {
            summarize(&suite(404, &[Property::UpperBound, Property::BaseCase], base))
        }),
        criterion(5, "rank-r upper bound for every r", || {
            summarize(&suite(404, &[Property::RankBound], base))
        }),
        criterion(6, "magic property and characterization (d ≤ 2, |X| ≤ 4)", || {
            summarize(&suite(606, &[Property::Magic], base.with_points(4).with_dims(1, 2)))
        }),
        criterion(7, "seminorm axioms and monotonicity", || {
            summarize(&suite(707, &[Property::SeminormAxioms], base.weighted(true)))
        }),
        criterion(8, "recurrence sets: nonempty, contain 0, monotone; Z_4 example", || {
            let (ok_suite, note) = summarize(&suite(808, &[Property::Recurrence], base));
            let (ok_z4, z4) = worked_z4_example();
            (ok_suite && ok_z4, format!("{note}; {z4}"))
        }),
        criterion(9, "determinism: identical seed gives byte-identical JSON", || {
            let mut cfg = SuiteConfig::new(909, 20);
            cfg.opts.exec = Exec::Parallel;
            let first = serde_json::to_string_pretty(&run_suite(&cfg)).unwrap();
            let second = serde_json::to_string_pretty(&run_suite(&cfg)).unwrap();
            cfg.opts.exec = Exec::Sequential;
            let sequential = serde_json::to_string_pretty(&run_suite(&cfg)).unwrap();
            (
                first == second && first == sequential,
                format!("{} bytes, parallel and sequential runs compared", first.len()),
            )
        }),
    ];

    for l in &lines {
        println!(
            "criterion {}: {} - {} [{:.2?}] {}",
            l.id,
            if l.passed { "PASS" } else { "FAIL" },
            l.title,
            l.elapsed,
            l.note
        );
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
