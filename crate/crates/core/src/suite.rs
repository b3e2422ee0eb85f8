//! Randomized property suite. Every property is checked on seeded random
//! instances; a violation names the statement it breaks and carries the
//! full instance so it can be replayed from its record.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::averages::{
    cube_average, cube_limit, integrated_cube_limit, iterated_limit, multi_period_box, upper_bound_check_rank1,
    upper_bound_check_rankr, CubeSpec,
};
use crate::combinatorics::{average_recurrence_check, intersection_measures, recurrence_set};
use crate::conditional::{invariant_partition, projection_norm2_squared};
use crate::error::Result;
use crate::magic::{build_magic, characterization_check, factor_check, spanning_check};
use crate::measure::{
    box_seminorm, box_seminorm_ordered, dominates, homogeneity_holds, seminorm_power_direct,
    seminorm_power_recursive, MeasureOptions, Strategy,
};
use crate::parallel::Exec;
use crate::random::{self, random_instance, Instance, InstanceBounds, InstanceRecord};
use crate::rational::{self, Rational};
use crate::system::{EpsilonIndex, Observable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    SeminormOracle,
    MultiPeriod,
    IteratedLimit,
    LowerBound,
    UpperBound,
    BaseCase,
    RankBound,
    Magic,
    SeminormAxioms,
    Recurrence,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::SeminormOracle,
        Property::MultiPeriod,
        Property::IteratedLimit,
        Property::LowerBound,
        Property::UpperBound,
        Property::BaseCase,
        Property::RankBound,
        Property::Magic,
        Property::SeminormAxioms,
        Property::Recurrence,
    ];

    /// The statement a failure of this property contradicts.
    pub fn statement(self) -> &'static str {
        match self {
            Property::SeminormOracle => "box seminorm: direct μ* sum equals the recursive integrator",
            Property::MultiPeriod => "cube averages over whole periods do not depend on period multiples or offsets",
            Property::IteratedLimit => "iterated limit equals the joint cube limit",
            Property::LowerBound => {
                "integrated cube limit of 1_A is ⫴1_A⫴^{2^d} and is at least μ(A)^{2^d}"
            }
            Property::UpperBound => "‖cube limit‖_L² ≤ min_ε ⫴f_ε⫴_{T_1,…,T_d}",
            Property::BaseCase => "⫴f⫴²_{T_1} = ∫ E(f|I(T_1))² dμ",
            Property::RankBound => "rank-r cube limit ‖·‖_L² ≤ min_{|ε|=r} ⫴f_ε⫴_ε",
            Property::Magic => {
                "magic extension: f ⟂ ⋁_{i∈ε} I(T_i*) forces ⫴f⫴*_ε = 0, and X* factors onto X"
            }
            Property::SeminormAxioms => {
                "seminorm axioms: triangle inequality, homogeneity, order invariance, monotonicity"
            }
            Property::Recurrence => {
                "recurrence sets contain 0 at c = 0, are nonempty for c > 0 and grow with c"
            }
        }
    }

    fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    }

    /// Instance shape for this property under the suite bounds.
    fn bounds(self, base: &InstanceBounds) -> InstanceBounds {
        match self {
            Property::Magic => base
                .with_points(base.max_points.min(4))
                .with_dims(base.min_dim.min(2), base.max_dim.min(2)),
            Property::SeminormOracle => base.with_points(base.max_points.min(6)),
            _ => *base,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub bounds: InstanceBounds,
    pub properties: Vec<Property>,
    pub opts: MeasureOptions,
}

impl SuiteConfig {
    pub fn new(seed: u64, instances: usize) -> Self {
        Self {
            seed,
            instances,
            bounds: InstanceBounds::default(),
            properties: Property::ALL.to_vec(),
            opts: MeasureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertySummary {
    pub property: String,
    pub statement: &'static str,
    pub checked: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub property: String,
    pub statement: &'static str,
    pub message: String,
    pub detail: String,
    pub instance_index: usize,
    pub instance: InstanceRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub instances: usize,
    pub passed: bool,
    pub properties: Vec<PropertySummary>,
    pub failures: Vec<Failure>,
}

/// Seed of the `i`-th instance, independent of how many instances run.
pub fn instance_seed(seed: u64, i: usize) -> u64 {
    // splitmix64 of (seed, i)
    let mut z = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `Ok(None)` passes; `Ok(Some(detail))` is a violation.
type Verdict = Result<Option<String>>;

fn fail_unless(ok: bool, detail: impl FnOnce() -> String) -> Option<String> {
    if ok {
        None
    } else {
        Some(detail())
    }
}

fn fmt(r: &Rational) -> String {
    rational::format(r)
}

pub fn check_property(p: Property, inst: &Instance, opts: &MeasureOptions) -> Verdict {
    match p {
        Property::SeminormOracle => seminorm_oracle(inst, opts),
        Property::MultiPeriod => multi_period(inst, opts),
        Property::IteratedLimit => iterated(inst, opts),
        Property::LowerBound => lower_bound(inst, opts),
        Property::UpperBound => upper_bound(inst, opts),
        Property::BaseCase => base_case(inst, opts),
        Property::RankBound => rank_bound(inst, opts),
        Property::Magic => magic(inst, opts),
        Property::SeminormAxioms => axioms(inst, opts),
        Property::Recurrence => recurrence(inst, opts),
    }
}

fn seminorm_oracle(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    for (e, f) in &inst.functions {
        let order = e.members();
        let direct = seminorm_power_direct(&inst.system, f, &order, opts)?;
        let recursive = seminorm_power_recursive(&inst.system, f, &order, opts)?;
        if direct != recursive {
            return Ok(Some(format!(
                "ε = {e}: direct {} ≠ recursive {}",
                fmt(&direct),
                fmt(&recursive)
            )));
        }
    }
    Ok(None)
}

fn spec_of(inst: &Instance) -> CubeSpec {
    CubeSpec::new(inst.functions.clone())
}

fn multi_period(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let s = &inst.system;
    let d = s.dim();
    let spec = spec_of(inst);
    let limit = cube_limit(s, &spec, opts.exec)?;
    let offsets = [0i64, 1, 17];
    let mut cases: Vec<(Vec<u64>, Vec<i64>)> = (1..=3u64).map(|k| (vec![k; d], vec![0; d])).collect();
    cases.push((vec![1; d], vec![1; d]));
    cases.push((vec![1; d], vec![17; d]));
    cases.push((
        (0..d).map(|i| 1 + (i as u64 % 3)).collect(),
        (0..d).map(|i| offsets[(i + 1) % 3]).collect(),
    ));
    for (k, m) in cases {
        let bx = multi_period_box(s, &k, &m);
        let avg = cube_average(s, &spec, &bx, opts.exec)?;
        if avg.average != limit.average {
            return Ok(Some(format!("multiples {k:?}, offsets {m:?}: average differs from one-period average")));
        }
    }
    Ok(None)
}

fn iterated(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let spec = spec_of(inst);
    let joint = cube_limit(&inst.system, &spec, opts.exec)?;
    let it = iterated_limit(&inst.system, &spec)?;
    Ok(fail_unless(it == joint.average, || {
        let diff = it.sub(&joint.average);
        format!("iterated − joint has sup norm {}", fmt(&diff.sup_norm()))
    }))
}

fn lower_bound(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let s = &inst.system;
    let d = s.dim();
    let a = &inst.set;
    let limit = integrated_cube_limit(s, a, opts.exec)?;
    let bound = rational::pow(&s.space().integrate(a), 1 << d);
    if limit < bound {
        return Ok(Some(format!("limit {} < μ(A)^{} = {}", fmt(&limit), 1 << d, fmt(&bound))));
    }
    let norm = box_seminorm(s, a, EpsilonIndex::full(d), Strategy::Auto, opts)?;
    Ok(fail_unless(norm.power_value == limit, || {
        format!("limit {} ≠ ⫴1_A⫴^{} = {}", fmt(&limit), norm.degree, fmt(&norm.power_value))
    }))
}

fn upper_bound(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let rep = upper_bound_check_rank1(&inst.system, &spec_of(inst), opts)?;
    Ok(fail_unless(rep.holds, || {
        format!("‖limit‖ = {} > min seminorm {}", rep.l2_norm_float, rep.min_seminorm_float)
    }))
}

fn base_case(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let s = &inst.system;
    let e1 = EpsilonIndex::from_bits(1);
    let f = &inst.functions[&e1];
    let norm = box_seminorm(s, f, e1, Strategy::Auto, opts)?;
    let proj = projection_norm2_squared(s.space(), f, &invariant_partition(s.space(), s.transformation(1)));
    Ok(fail_unless(norm.power_value == proj, || {
        format!("⫴f⫴² = {} ≠ ∫E(f|I)² = {}", fmt(&norm.power_value), fmt(&proj))
    }))
}

fn rank_bound(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let spec = spec_of(inst);
    for r in 1..=inst.system.dim() {
        let rep = upper_bound_check_rankr(&inst.system, &spec, r, opts)?;
        if !rep.holds {
            return Ok(Some(format!(
                "r = {r}: ‖limit‖ = {} > min seminorm {}",
                rep.l2_norm_float, rep.min_seminorm_float
            )));
        }
    }
    Ok(None)
}

fn magic(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let ms = build_magic(&inst.system, opts)?;
    let factor = factor_check(&ms);
    if !factor.passed() {
        return Ok(Some(format!("∅ coordinate is not a factor map: {factor:?}")));
    }
    let mut rng = random::rng(inst.seed);
    for e in EpsilonIndex::nonempty(ms.dim()) {
        let span = spanning_check(&ms, e, opts)?;
        if !span.passed() {
            return Ok(Some(format!("ε = {e}: projected indicators of star points {:?} keep a nonzero seminorm", span.failures)));
        }
        let g = random::random_observable(&mut rng, ms.len(), 4);
        let rep = characterization_check(&ms, e, &g, opts)?;
        if !rep.passed {
            return Ok(Some(format!(
                "ε = {e}: projected random function has power {}",
                fmt(&rep.projected_power)
            )));
        }
    }
    Ok(None)
}

fn axioms(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let s = &inst.system;
    let d = s.dim();
    let full = EpsilonIndex::full(d);
    let f = &inst.functions[&full];
    let g = &inst.functions[&EpsilonIndex::from_bits(1)];
    let norm = |h: &Observable| box_seminorm(s, h, full, Strategy::Auto, opts);

    let (nf, ng, nfg) = (norm(f)?, norm(g)?, norm(&f.add(g))?);
    if nfg.float_value > nf.float_value + ng.float_value + 1e-9 {
        return Ok(Some(format!(
            "triangle: ⫴f+g⫴ = {} > {} + {}",
            nfg.float_value, nf.float_value, ng.float_value
        )));
    }

    let c = rational::ratio(-3, 2);
    let ncf = norm(&f.scale(&c))?;
    if !homogeneity_holds(&nf.power_value, &ncf.power_value, &c, nf.degree) {
        return Ok(Some(format!(
            "homogeneity: power(cf) = {} ≠ c^{} power(f)",
            fmt(&ncf.power_value),
            nf.degree
        )));
    }

    let reversed: Vec<usize> = full.members().into_iter().rev().collect();
    let nrev = box_seminorm_ordered(s, f, &reversed, Strategy::Auto, opts)?;
    if nrev.power_value != nf.power_value {
        return Ok(Some(format!(
            "order: {} with {reversed:?} ≠ {} with increasing order",
            fmt(&nrev.power_value),
            fmt(&nf.power_value)
        )));
    }

    let a = &inst.set;
    let big = norm(a)?;
    let small = box_seminorm(s, a, EpsilonIndex::from_bits(1), Strategy::Auto, opts)?;
    let mu_a = s.space().integrate(a);
    if !dominates(&big, &small) || small.power_value < rational::pow(&mu_a, 2) {
        return Ok(Some(format!(
            "monotonicity: ⫴1_A⫴^{} = {}, ⫴1_A⫴²_{{T_1}} = {}, μ(A) = {}",
            big.degree,
            fmt(&big.power_value),
            fmt(&small.power_value),
            fmt(&mu_a)
        )));
    }
    Ok(None)
}

fn recurrence(inst: &Instance, opts: &MeasureOptions) -> Verdict {
    let s = &inst.system;
    let a = &inst.set;
    let measures = intersection_measures(s, a, opts.exec)?;
    let avg = average_recurrence_check(s, a, opts.exec)?;
    let mean: Rational = measures.iter().sum::<Rational>() / Rational::from_integer(measures.len().into());
    if !avg.holds || avg.limit != mean {
        return Ok(Some(format!(
            "average recurrence {} vs bound {} vs period mean {}",
            fmt(&avg.limit),
            fmt(&avg.bound),
            fmt(&mean)
        )));
    }
    let cs = [rational::int(0), rational::ratio(1, 100), rational::ratio(1, 10), rational::ratio(1, 2)];
    let mut previous: Option<Vec<Vec<u64>>> = None;
    for c in &cs {
        let rep = recurrence_set(s, a, c, opts.exec)?;
        let zero = vec![0u64; s.dim()];
        if c.is_zero() && !rep.good_set.contains(&zero) {
            return Ok(Some("c = 0: n = 0 is not in the good set".into()));
        }
        if c.is_positive() && rep.good_set.is_empty() {
            return Ok(Some(format!("c = {}: good set is empty", fmt(c))));
        }
        if let Some(prev) = &previous {
            if !prev.iter().all(|n| rep.good_set.contains(n)) {
                return Ok(Some(format!("c = {}: good set lost members of a smaller c", fmt(c))));
            }
        }
        previous = Some(rep.good_set);
    }
    Ok(None)
}

/// Outcome of one property on one instance.
struct Outcome {
    property: Property,
    index: usize,
    violation: Option<(String, String, InstanceRecord)>,
}

pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    // Instances run in parallel; the checks inside each run sequentially.
    let inner = MeasureOptions {
        exec: Exec::Sequential,
        ..config.opts
    };
    let per_instance = config.opts.exec.map_indexed(0..config.instances, |i| {
        let seed = instance_seed(config.seed, i);
        let mut cache: Vec<(InstanceBounds, Instance)> = Vec::new();
        config
            .properties
            .iter()
            .map(|&p| {
                let bounds = p.bounds(&config.bounds);
                let inst = match cache.iter().find(|(b, _)| *b == bounds) {
                    Some((_, inst)) => inst.clone(),
                    None => {
                        let inst = random_instance(seed, &bounds);
                        cache.push((bounds, inst.clone()));
                        inst
                    }
                };
                let violation = match check_property(p, &inst, &inner) {
                    Ok(None) => None,
                    Ok(Some(detail)) => Some((format!("{} violated", p.statement()), detail, inst.record())),
                    Err(e) => Some((format!("{} could not be checked", p.statement()), e.to_string(), inst.record())),
                };
                Outcome {
                    property: p,
                    index: i,
                    violation,
                }
            })
            .collect::<Vec<_>>()
    });

    let mut properties: Vec<PropertySummary> = config
        .properties
        .iter()
        .map(|p| PropertySummary {
            property: p.name(),
            statement: p.statement(),
            checked: 0,
            failed: 0,
        })
        .collect();
    let mut failures = Vec::new();
    for outcome in per_instance.into_iter().flatten() {
        let k = config
            .properties
            .iter()
            .position(|&q| q == outcome.property)
            .expect("outcome of a configured property");
        properties[k].checked += 1;
        if let Some((message, detail, instance)) = outcome.violation {
            properties[k].failed += 1;
            failures.push(Failure {
                property: outcome.property.name(),
                statement: outcome.property.statement(),
                message,
                detail,
                instance_index: outcome.index,
                instance,
            });
        }
    }
    SuiteReport {
        seed: config.seed,
        instances: config.instances,
        passed: failures.is_empty(),
        properties,
        failures,
    }
}
