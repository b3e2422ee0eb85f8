use std::path::Path;

use cubeavg::averages::{
    cube_average, cube_limit, cube_trace, doubling_boxes, integrated_cube_limit, iterated_limit, period_box,
    upper_bound_check_rank1, upper_bound_check_rankr, CubeBox, Interval,
};
use cubeavg::combinatorics::{cyclic_correspondence, recurrence_set};
use cubeavg::config::{load_cube_spec, load_observable, load_subset, load_system};
use cubeavg::magic::{build_magic, characterization_check, factor_check, magic_defect, spanning_check};
use cubeavg::measure::{box_seminorm, MeasureOptions, Strategy};
use cubeavg::random::{random_observable, rng, InstanceBounds};
use cubeavg::rational::{self, Rational};
use cubeavg::suite::{run_suite, Property, SuiteConfig};
use cubeavg::system::EpsilonIndex;
use cubeavg::{Error, Result};
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::{CheckArg, Outcome};

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(rational::format).collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn validate(path: &Path) -> Result<Outcome> {
    let system = load_system(path)?;
    Ok(Outcome::ok(json!({
        "valid": true,
        "points": system.len(),
        "dim": system.dim(),
        "commuting": system.is_commuting(),
        "orders": system.orders(),
    })))
}

pub fn seminorm(
    system: &Path,
    function: &Path,
    epsilon: Option<&str>,
    strategy: Strategy,
    opts: &MeasureOptions,
) -> Result<Outcome> {
    let system = load_system(system)?;
    let f = load_observable(function, &system)?;
    let d = system.dim();
    let eps = match epsilon {
        None => EpsilonIndex::full(d),
        Some(digits) => {
            if digits.len() != d {
                return Err(Error::BadEpsilon(format!("{digits:?} does not have {d} digits")));
            }
            EpsilonIndex::parse_digits(digits)?
        }
    };
    let value = box_seminorm(&system, &f, eps, strategy, opts)?;
    Ok(Outcome::ok(to_value(&value)?))
}

fn parse_box(text: &str) -> Result<CubeBox> {
    text.split(',')
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("box interval {part:?} is not start:end")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("box bound {s:?}: {e}")))
            };
            Ok(Interval::new(parse(a)?, parse(b)?))
        })
        .collect()
}

fn box_json(bx: &[Interval]) -> Value {
    json!(bx.iter().map(|iv| [iv.start, iv.end]).collect::<Vec<_>>())
}

fn write_trace(path: &Path, rows: &[cubeavg::averages::TraceRow], d: usize) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header: Vec<String> = (1..=d).map(|i| format!("box_len_{i}")).collect();
    header.push("l2_deviation".into());
    w.write_record(&header).map_err(io)?;
    for row in rows {
        let mut rec: Vec<String> = row.box_lengths.iter().map(u64::to_string).collect();
        rec.push(format!("{:e}", row.l2_deviation));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn average(
    spec_path: &Path,
    bx: Option<&str>,
    trace: Option<&Path>,
    trace_steps: u32,
    opts: &MeasureOptions,
) -> Result<Outcome> {
    let loaded = load_cube_spec(spec_path)?;
    let system = &loaded.system;
    let bx = match bx {
        Some(text) => parse_box(text)?,
        None => loaded.bx.clone().unwrap_or_else(|| period_box(system)),
    };
    let result = cube_average(system, &loaded.spec, &bx, opts.exec)?;
    if let Some(path) = trace {
        let traced = cube_trace(system, &loaded.spec, &doubling_boxes(system, trace_steps), opts.exec)?;
        write_trace(path, traced.trace.as_deref().unwrap_or_default(), system.dim())?;
    }
    Ok(Outcome::ok(json!({
        "box": box_json(&bx),
        "box_lengths": result.box_lengths,
        "average": strings(result.average.values()),
        "l2_norm_squared": rational::format(&system.space().norm2_squared(&result.average)),
    })))
}

pub fn limit(spec_path: &Path, check_bounds: bool, set: Option<&Path>, opts: &MeasureOptions) -> Result<Outcome> {
    let loaded = load_cube_spec(spec_path)?;
    let system = &loaded.system;
    let limit = cube_limit(system, &loaded.spec, opts.exec)?;
    let iterated = iterated_limit(system, &loaded.spec)?;
    let iterated_matches = iterated == limit.average;
    let mut violated = !iterated_matches;
    let mut out = json!({
        "period": system.orders(),
        "average": strings(limit.average.values()),
        "l2_norm_squared": rational::format(&system.space().norm2_squared(&limit.average)),
        "iterated_matches": iterated_matches,
    });
    if check_bounds {
        let rank1 = upper_bound_check_rank1(system, &loaded.spec, opts)?;
        violated |= !rank1.holds;
        let ranks = (1..=system.dim())
            .map(|r| upper_bound_check_rankr(system, &loaded.spec, r, opts))
            .collect::<Result<Vec<_>>>()?;
        violated |= ranks.iter().any(|r| !r.holds);
        out["upper_bound"] = to_value(&rank1)?;
        out["rank_bounds"] = to_value(&ranks)?;
    }
    if let Some(path) = set {
        let a = load_observable(path, system)?;
        let integrated = integrated_cube_limit(system, &a, opts.exec)?;
        let d = system.dim();
        let bound = rational::pow(&system.space().integrate(&a), 1 << d);
        let norm = box_seminorm(system, &a, EpsilonIndex::full(d), Strategy::Auto, opts)?;
        let holds = integrated >= bound;
        let equals_seminorm = integrated == norm.power_value;
        violated |= !holds || !equals_seminorm;
        out["lower_bound"] = json!({
            "integrated_limit": rational::format(&integrated),
            "bound": rational::format(&bound),
            "seminorm_power": rational::format(&norm.power_value),
            "holds": holds,
            "equals_seminorm": equals_seminorm,
        });
    }
    Ok(Outcome { value: out, violated })
}

pub fn magic(path: &Path, check: CheckArg, seed: u64, opts: &MeasureOptions) -> Result<Outcome> {
    let system = load_system(path)?;
    let ms = build_magic(&system, opts)?;
    let d = ms.dim();
    let full = EpsilonIndex::full(d);
    let mut r = rng(seed);
    let mut violated = false;
    let mut checks = serde_json::Map::new();
    let wants = |c: CheckArg| check == CheckArg::All || check == c;

    if wants(CheckArg::Factor) {
        let rep = factor_check(&ms);
        violated |= !rep.passed();
        let mut v = to_value(&rep)?;
        v["passed"] = json!(rep.passed());
        checks.insert("factor".into(), v);
    }
    if wants(CheckArg::Defect) {
        let g = random_observable(&mut r, ms.len(), 4);
        let f = ms.project_out(&g, full);
        let (a, b) = magic_defect(&ms, &f, opts)?;
        let span = spanning_check(&ms, full, opts)?;
        let passed = (!a.is_zero() || b.is_zero()) && span.passed();
        violated |= !passed;
        checks.insert(
            "defect".into(),
            json!({
                "projection_norm_squared": rational::format(&a),
                "seminorm_power": rational::format(&b),
                "spanning": to_value(&span)?,
                "passed": passed,
            }),
        );
    }
    if wants(CheckArg::Characterization) {
        let mut rows = Vec::new();
        for e in EpsilonIndex::nonempty(d) {
            let g = random_observable(&mut r, ms.len(), 4);
            let rep = characterization_check(&ms, e, &g, opts)?;
            let span = spanning_check(&ms, e, opts)?;
            let passed = rep.passed && span.passed();
            violated |= !passed;
            rows.push(json!({
                "epsilon": rep.epsilon,
                "projected_power": rational::format(&rep.projected_power),
                "spanning_failures": span.failures,
                "passed": passed,
            }));
        }
        checks.insert("characterization".into(), Value::Array(rows));
    }
    Ok(Outcome {
        value: json!({
            "star_points": ms.len(),
            "dim": d,
            "seed": seed,
            "checks": checks,
        }),
        violated,
    })
}

pub fn recurrence(subset: &Path, c: &str, opts: &MeasureOptions) -> Result<Outcome> {
    let a = load_subset(subset)?;
    let c = rational::parse(c)?;
    let (system, set) = cyclic_correspondence(&a);
    let rep = recurrence_set(&system, &set, &c, opts.exec)?;
    let zero = vec![0u64; system.dim()];
    let violated = (c.is_zero() && !rep.good_set.contains(&zero)) || (c.is_positive() && rep.good_set.is_empty());
    Ok(Outcome {
        value: to_value(&rep)?,
        violated,
    })
}

pub fn suite(
    seed: u64,
    instances: usize,
    bounds: InstanceBounds,
    properties: Vec<Property>,
    opts: &MeasureOptions,
) -> Result<Outcome> {
    let mut cfg = SuiteConfig::new(seed, instances);
    cfg.bounds = bounds;
    cfg.opts = *opts;
    if !properties.is_empty() {
        cfg.properties = properties;
    }
    let report = run_suite(&cfg);
    Ok(Outcome {
        violated: !report.passed,
        value: to_value(&report)?,
    })
}
