//! Cube averages
//!
//! ```text
//!   ∏ 1/(N_i − M_i) Σ_{n ∈ box} ∏_{ε} T_ε^n f_ε
//! ```
//!
//! evaluated exactly on a finite box, and their limits. Since `n ↦ T_i^n` is
//! periodic with period `L_i = orbit_order(T_i)`, the limit along any boxes
//! with lengths going to infinity is the average over one period box.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::conditional::{conditional_expectation, invariant_partition};
use crate::error::{Error, Result};
use crate::measure::{box_seminorm, MeasureOptions, SeminormValue, Strategy};
use crate::parallel::Exec;
use crate::rational::{self, Rational, Scaled};
use crate::system::{EpsilonIndex, Observable, System};

/// Half-open interval `[start, end)` of shifts along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub start: i64,
    pub end: i64,
}

impl Interval {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> u64 {
        (self.end - self.start).max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

pub type CubeBox = Vec<Interval>;

/// `∏ [0, L_i)`.
pub fn period_box(system: &System) -> CubeBox {
    system
        .orders()
        .into_iter()
        .map(|l| Interval::new(0, l as i64))
        .collect()
}

/// `∏ [M_i, M_i + k_i L_i)`.
pub fn multi_period_box(system: &System, multiples: &[u64], offsets: &[i64]) -> CubeBox {
    system
        .orders()
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let start = offsets[i];
            Interval::new(start, start + (multiples[i] * l) as i64)
        })
        .collect()
}

/// The functions of a cube average. Vertices missing from `functions` are
/// taken to be the constant 1; the vertex `∅` only contributes when present
/// (the integrated form).
#[derive(Debug, Clone, PartialEq)]
pub struct CubeSpec {
    pub functions: BTreeMap<EpsilonIndex, Observable>,
    /// Restrict to vertices with `0 < |ε| ≤ r` (plus `∅` if supplied).
    pub rank_cap: Option<usize>,
}

impl CubeSpec {
    pub fn new(functions: BTreeMap<EpsilonIndex, Observable>) -> Self {
        Self {
            functions,
            rank_cap: None,
        }
    }

    pub fn with_rank_cap(mut self, r: usize) -> Self {
        self.rank_cap = Some(r);
        self
    }

    /// Every nonempty vertex carries `f`.
    pub fn uniform(d: usize, f: &Observable) -> Self {
        Self::new(EpsilonIndex::nonempty(d).map(|e| (e, f.clone())).collect())
    }

    /// Every vertex, `∅` included, carries `f` (the integrated form).
    pub fn uniform_with_empty(d: usize, f: &Observable) -> Self {
        Self::new(EpsilonIndex::all(d).map(|e| (e, f.clone())).collect())
    }

    fn active<'a>(&'a self, d: usize) -> impl Iterator<Item = (EpsilonIndex, &'a Observable)> + 'a {
        let cap = self.rank_cap.unwrap_or(d);
        self.functions
            .iter()
            .filter(move |(e, _)| e.fits(d) && e.len() <= cap)
            .map(|(e, f)| (*e, f))
    }

    fn validate(&self, system: &System) -> Result<()> {
        for (e, f) in &self.functions {
            if !e.fits(system.dim()) {
                return Err(Error::BadEpsilon(format!(
                    "{e} is not a vertex of the {}-cube",
                    system.dim()
                )));
            }
            if f.len() != system.len() {
                return Err(Error::LengthMismatch {
                    expected: system.len(),
                    got: f.len(),
                });
            }
        }
        if let Some(r) = self.rank_cap {
            if r == 0 || r > system.dim() {
                return Err(Error::BadEpsilon(format!("rank cap {r} outside 1..={}", system.dim())));
            }
        }
        Ok(())
    }

    fn check_bounded(&self, d: usize) -> Result<()> {
        for (e, f) in self.active(d) {
            if f.sup_norm() > Rational::one() {
                return Err(Error::HypothesisViolated(format!(
                    "‖f_{}‖_∞ = {} exceeds 1",
                    e.digits(d),
                    rational::format(&f.sup_norm())
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub box_lengths: Vec<u64>,
    pub l2_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeResult {
    pub average: Observable,
    pub box_lengths: Vec<u64>,
    pub trace: Option<Vec<TraceRow>>,
}

/// Accumulator ring for the box sum: `i128` when the worst case provably
/// fits, `BigInt` otherwise.
trait Acc: Clone + Send + Sync {
    fn zero() -> Self;
    fn from_big(b: &BigInt) -> Self;
    fn mul(&mut self, other: &Self);
    fn add(&mut self, other: &Self);
    fn into_big(self) -> BigInt;
}

impl Acc for i128 {
    fn zero() -> Self {
        0
    }
    fn from_big(b: &BigInt) -> Self {
        b.to_i128().expect("checked by the overflow bound")
    }
    fn mul(&mut self, other: &Self) {
        *self *= *other;
    }
    fn add(&mut self, other: &Self) {
        *self += *other;
    }
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Acc for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn from_big(b: &BigInt) -> Self {
        b.clone()
    }
    fn mul(&mut self, other: &Self) {
        *self *= other;
    }
    fn add(&mut self, other: &Self) {
        *self += other;
    }
    fn into_big(self) -> BigInt {
        self
    }
}

struct BoxSum<'a> {
    system: &'a System,
    bx: &'a [Interval],
    lengths: Vec<u64>,
    volume: usize,
    /// Dense per-vertex numerators (index = ε bits); `None` means constant 1.
    vertices: Vec<Option<Vec<BigInt>>>,
    den: BigInt,
}

impl<'a> BoxSum<'a> {
    fn new(system: &'a System, spec: &CubeSpec, bx: &'a [Interval]) -> Result<Self> {
        spec.validate(system)?;
        if bx.len() != system.dim() {
            return Err(Error::BadEpsilon(format!(
                "box has {} intervals, system has d = {}",
                bx.len(),
                system.dim()
            )));
        }
        for (axis, iv) in bx.iter().enumerate() {
            if iv.is_empty() {
                return Err(Error::EmptyBox {
                    axis: axis + 1,
                    start: iv.start,
                    end: iv.end,
                });
            }
        }
        let lengths: Vec<u64> = bx.iter().map(Interval::len).collect();
        let volume = lengths
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(usize::try_from(l).ok()?))
            .ok_or_else(|| Error::HypothesisViolated("box volume overflows".into()))?;
        let d = system.dim();
        let mut vertices = vec![None; 1 << d];
        let mut den = BigInt::one();
        for (e, f) in spec.active(d) {
            let s = Scaled::new(f.values());
            den *= &s.den;
            vertices[e.bits() as usize] = Some(s.nums);
        }
        Ok(Self {
            system,
            bx,
            lengths,
            volume,
            vertices,
            den,
        })
    }

    /// Whether `volume · ∏ max|num_ε|` fits comfortably in `i128`.
    fn fits_i128(&self) -> bool {
        let mut bound = BigInt::from(self.volume);
        for nums in self.vertices.iter().flatten() {
            let m = nums.iter().map(|v| v.abs()).max().unwrap_or_default();
            bound *= m.max(BigInt::one());
        }
        bound.bits() < 120
    }

    fn shift(&self, k: usize, n: &mut [i64]) {
        let mut k = k;
        for (i, iv) in self.bx.iter().enumerate() {
            let len = self.lengths[i] as usize;
            n[i] = iv.start + (k % len) as i64;
            k /= len;
        }
    }

    fn run<A: Acc>(&self, exec: Exec) -> Vec<BigInt> {
        let npts = self.system.len();
        let d = self.system.dim();
        let nums: Vec<Option<Vec<A>>> = self
            .vertices
            .iter()
            .map(|v| v.as_ref().map(|nums| nums.iter().map(A::from_big).collect()))
            .collect();
        let ts = self.system.transformations();
        let partial = exec.fold_chunks(
            0..self.volume,
            |range| {
                let mut acc = vec![A::zero(); npts];
                let mut n = vec![0i64; d];
                // One composition buffer per vertex.
                let mut y = vec![0usize; 1 << d];
                for k in range {
                    self.shift(k, &mut n);
                    for (x, slot) in acc.iter_mut().enumerate() {
                        y[0] = x;
                        let mut prod: Option<A> = None;
                        if let Some(f) = &nums[0] {
                            prod = Some(f[x].clone());
                        }
                        for e in 1..y.len() {
                            let low = e.trailing_zeros() as usize;
                            y[e] = ts[low].apply_pow(y[e & (e - 1)], n[low]);
                            if let Some(f) = &nums[e] {
                                match &mut prod {
                                    Some(p) => p.mul(&f[y[e]]),
                                    None => prod = Some(f[y[e]].clone()),
                                }
                            }
                        }
                        match prod {
                            Some(p) => slot.add(&p),
                            None => slot.add(&A::from_big(&BigInt::one())),
                        }
                    }
                }
                acc
            },
            |mut a, b| {
                for (s, t) in a.iter_mut().zip(&b) {
                    s.add(t);
                }
                a
            },
        );
        partial
            .expect("box is nonempty")
            .into_iter()
            .map(A::into_big)
            .collect()
    }

    fn average(&self, exec: Exec) -> Observable {
        let sums = if self.fits_i128() {
            self.run::<i128>(exec)
        } else {
            self.run::<BigInt>(exec)
        };
        let scale = BigInt::from(self.volume) * &self.den;
        Observable::from_values(
            sums.into_iter()
                .map(|s| Rational::new(s, scale.clone()))
                .collect(),
        )
    }
}

/// The exact average over a finite box. Commutativity is not required.
pub fn cube_average(system: &System, spec: &CubeSpec, bx: &[Interval], exec: Exec) -> Result<CubeResult> {
    let sum = BoxSum::new(system, spec, bx)?;
    Ok(CubeResult {
        average: sum.average(exec),
        box_lengths: sum.lengths.clone(),
        trace: None,
    })
}

/// The limit along any boxes whose side lengths go to infinity: the average
/// over one period box `∏ [0, L_i)`.
pub fn cube_limit(system: &System, spec: &CubeSpec, exec: Exec) -> Result<CubeResult> {
    system.require_commuting()?;
    cube_average(system, spec, &period_box(system), exec)
}

/// The limit taken one axis at a time: first `N_1 − M_1 → ∞`, then
/// `N_2 − M_2 → ∞`, and so on. The first limit is evaluated as a conditional
/// expectation onto `I(T_1)` rather than as a sum over `n_1`.
pub fn iterated_limit(system: &System, spec: &CubeSpec) -> Result<Observable> {
    system.require_commuting()?;
    spec.validate(system)?;
    let d = system.dim();
    let space = system.space();
    let inv1 = invariant_partition(space, system.transformation(1));
    let active: Vec<(EpsilonIndex, &Observable)> = spec.active(d).collect();
    let rest: Vec<u64> = system.orders()[1..].to_vec();
    let volume: u64 = rest.iter().product();

    let mut total = Observable::constant(system.len(), Rational::zero());
    let mut n = vec![0i64; d];
    for k in 0..volume {
        let mut kk = k;
        for (i, &l) in rest.iter().enumerate() {
            n[i + 1] = (kk % l) as i64;
            kk /= l;
        }
        // ∏_{1∉ε} T_ε^n f_ε  ·  E(∏_{1∈ε} T_{ε∖1}^n f_ε | I(T_1)).
        let mut outside = Observable::ones(system.len());
        let mut inside = Observable::ones(system.len());
        for (e, f) in &active {
            let rest_e = EpsilonIndex::from_bits(e.bits() & !1);
            let moved = Observable::from_values(
                (0..system.len())
                    .map(|x| f.value(system.apply_power(x, &n, rest_e)).clone())
                    .collect(),
            );
            if e.contains(1) {
                inside = inside.mul(&moved);
            } else {
                outside = outside.mul(&moved);
            }
        }
        let projected = conditional_expectation(space, &inside, &inv1);
        total = total.add(&outside.mul(&projected));
    }
    Ok(total.scale(&rational::ratio(1, volume as i64)))
}

/// Exact `∫ |g|² dμ`.
pub fn l2_norm_squared(system: &System, g: &Observable) -> Rational {
    system.space().norm2_squared(g)
}

pub fn l2_distance(system: &System, a: &Observable, b: &Observable) -> f64 {
    rational::to_f64(&l2_norm_squared(system, &a.sub(b))).sqrt()
}

/// Boxes `∏ [0, 2^j L_i + 1)` for `j = 0..steps`: every box overshoots a
/// whole number of periods by exactly one shift per axis.
pub fn doubling_boxes(system: &System, steps: u32) -> Vec<CubeBox> {
    let orders = system.orders();
    (0..steps)
        .map(|j| {
            orders
                .iter()
                .map(|&l| Interval::new(0, ((l << j) + 1) as i64))
                .collect()
        })
        .collect()
}

/// L² deviation of each box average from the limit.
pub fn cube_trace(system: &System, spec: &CubeSpec, boxes: &[CubeBox], exec: Exec) -> Result<CubeResult> {
    let limit = cube_limit(system, spec, exec)?;
    let trace = boxes
        .iter()
        .map(|bx| {
            let avg = cube_average(system, spec, bx, exec)?;
            Ok(TraceRow {
                l2_deviation: l2_distance(system, &avg.average, &limit.average),
                box_lengths: avg.box_lengths,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CubeResult {
        trace: Some(trace),
        ..limit
    })
}

/// `2 (∏_ε ‖f_ε‖_∞) Σ_i L_i / N_i`: every shift outside the whole-period
/// blocks of the box moves the average by at most twice the product bound.
pub fn cesaro_deviation_bound(system: &System, spec: &CubeSpec, lengths: &[u64]) -> f64 {
    let d = system.dim();
    let sup: f64 = spec
        .active(d)
        .map(|(_, f)| rational::to_f64(&f.sup_norm()))
        .product();
    let frac: f64 = system
        .orders()
        .iter()
        .zip(lengths)
        .map(|(&l, &n)| l as f64 / n as f64)
        .sum();
    2.0 * sup * frac
}

/// The limit of `∏ 1/(N_i − M_i) Σ_n μ(⋂_ε T_ε^{-n} A)`.
pub fn integrated_cube_limit(system: &System, a: &Observable, exec: Exec) -> Result<Rational> {
    a.check_indicator()?;
    if a.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: a.len(),
        });
    }
    let spec = CubeSpec::uniform_with_empty(system.dim(), a);
    let limit = cube_limit(system, &spec, exec)?;
    Ok(system.space().integrate(&limit.average))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub epsilon: String,
    pub seminorm: SeminormValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundReport {
    pub rank: usize,
    #[serde(with = "rational::serde_str")]
    pub l2_norm_squared: Rational,
    pub l2_norm_float: f64,
    pub seminorms: Vec<BoundEntry>,
    pub min_seminorm_float: f64,
    /// `‖limit‖_{L²} ≤ min + 1e-9` after taking roots.
    pub holds: bool,
    /// Same comparison done exactly at the level of powers.
    pub holds_exact: bool,
}

pub const BOUND_TOLERANCE: f64 = 1e-9;

fn bound_report(
    system: &System,
    spec: &CubeSpec,
    rank: usize,
    eps_set: Vec<EpsilonIndex>,
    full: bool,
    opts: &MeasureOptions,
) -> Result<UpperBoundReport> {
    let d = system.dim();
    spec.validate(system)?;
    spec.check_bounded(d)?;
    let limit = cube_limit(system, spec, opts.exec)?;
    let norm2 = l2_norm_squared(system, &limit.average);
    let ones = Observable::ones(system.len());
    let mut seminorms = Vec::new();
    for e in eps_set {
        let f = spec.functions.get(&e).unwrap_or(&ones);
        let target = if full { EpsilonIndex::full(d) } else { e };
        let value = box_seminorm(system, f, target, Strategy::Auto, opts)?;
        seminorms.push(BoundEntry {
            epsilon: e.digits(d),
            seminorm: value,
        });
    }
    let min = seminorms
        .iter()
        .map(|b| b.seminorm.float_value)
        .fold(f64::INFINITY, f64::min);
    let norm = rational::to_f64(&norm2).sqrt();
    // ‖g‖ ≤ ⫴f⫴ ⇔ (‖g‖²)^{2^k / 2} ≤ power, both sides nonnegative.
    let holds_exact = seminorms.iter().any(|b| {
        let half = b.seminorm.degree / 2;
        !b.seminorm.power_value.is_negative() && rational::pow(&norm2, half) <= b.seminorm.power_value
    });
    Ok(UpperBoundReport {
        rank,
        l2_norm_float: norm,
        l2_norm_squared: norm2,
        min_seminorm_float: min,
        holds: norm <= min + BOUND_TOLERANCE,
        holds_exact,
        seminorms,
    })
}

/// `‖lim avg‖_{L²} ≤ min_{ε ≠ ∅} ⫴f_ε⫴_{T_1,…,T_d}` for `|f_ε| ≤ 1`.
pub fn upper_bound_check_rank1(system: &System, spec: &CubeSpec, opts: &MeasureOptions) -> Result<UpperBoundReport> {
    let d = system.dim();
    let spec = CubeSpec {
        functions: spec.functions.clone(),
        rank_cap: None,
    };
    bound_report(system, &spec, d, EpsilonIndex::nonempty(d).collect(), true, opts)
}

/// The rank-`r` average (vertices with `0 < |ε| ≤ r`) against
/// `min_{|ε| = r} ⫴f_ε⫴_ε`.
pub fn upper_bound_check_rankr(
    system: &System,
    spec: &CubeSpec,
    r: usize,
    opts: &MeasureOptions,
) -> Result<UpperBoundReport> {
    let d = system.dim();
    if r == 0 || r > d {
        return Err(Error::BadEpsilon(format!("rank {r} outside 1..={d}")));
    }
    let mut functions = spec.functions.clone();
    functions.remove(&EpsilonIndex::EMPTY);
    let spec = CubeSpec {
        functions,
        rank_cap: Some(r),
    };
    let eps_set = EpsilonIndex::nonempty(d).filter(|e| e.len() == r).collect();
    bound_report(system, &spec, r, eps_set, false, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceStep {
    pub box_a: Vec<u64>,
    pub box_b: Vec<u64>,
    pub l2_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub commuting: bool,
    pub steps: Vec<DivergenceStep>,
}

/// Averages along two box sequences and their L² distance at each step. No
/// claim is made either way; non-commuting systems are allowed.
pub fn divergence_demo(
    system: &System,
    spec: &CubeSpec,
    boxes_a: &[CubeBox],
    boxes_b: &[CubeBox],
    exec: Exec,
) -> Result<DivergenceReport> {
    let steps = boxes_a
        .iter()
        .zip(boxes_b)
        .map(|(a, b)| {
            let ra = cube_average(system, spec, a, exec)?;
            let rb = cube_average(system, spec, b, exec)?;
            Ok(DivergenceStep {
                l2_distance: l2_distance(system, &ra.average, &rb.average),
                box_a: ra.box_lengths,
                box_b: rb.box_lengths,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DivergenceReport {
        commuting: system.is_commuting(),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::system::{ProbabilitySpace, Transformation};

    fn system(n: usize, images: Vec<Vec<usize>>) -> System {
        let ts = images
            .into_iter()
            .enumerate()
            .map(|(i, im)| Transformation::new(format!("T{}", i + 1), im).unwrap())
            .collect();
        System::new(ProbabilitySpace::uniform(n), ts, false).unwrap()
    }

    fn iv(a: i64, b: i64) -> Interval {
        Interval::new(a, b)
    }

    /// Literal evaluation of the box sum with rationals.
    fn brute_average(s: &System, spec: &CubeSpec, bx: &[Interval]) -> Observable {
        let d = s.dim();
        let mut shifts: Vec<Vec<i64>> = vec![vec![]];
        for b in bx {
            shifts = shifts
                .into_iter()
                .flat_map(|p| {
                    (b.start..b.end).map(move |k| {
                        let mut q = p.clone();
                        q.push(k);
                        q
                    })
                })
                .collect();
        }
        let vol = shifts.len() as i64;
        let vals = (0..s.len())
            .map(|x| {
                let mut sum = Rational::zero();
                for n in &shifts {
                    let mut p = Rational::one();
                    for (e, f) in spec.active(d) {
                        let t = crate::system::transformation_power_action(s, n, e).unwrap();
                        p *= f.value(t.apply(x));
                    }
                    sum += p;
                }
                sum / int(vol)
            })
            .collect();
        Observable::from_values(vals)
    }

    #[test]
    fn all_ones_average_is_one() {
        let s = system(3, vec![vec![1, 2, 0], vec![0, 1, 2]]);
        let spec = CubeSpec::uniform(2, &Observable::ones(3));
        let r = cube_average(&s, &spec, &[iv(-3, 4), iv(5, 7)], Exec::Sequential).unwrap();
        assert_eq!(r.average, Observable::ones(3));
        assert_eq!(r.box_lengths, vec![7, 2]);
    }

    #[test]
    fn full_period_of_rotation_gives_the_mean() {
        let s = system(3, vec![vec![1, 2, 0]]);
        let f = Observable::from_values(vec![int(1), ratio(1, 2), ratio(-1, 3)]);
        let spec = CubeSpec::uniform(1, &f);
        let r = cube_average(&s, &spec, &[iv(0, 3)], Exec::Sequential).unwrap();
        let inv = invariant_partition(s.space(), s.transformation(1));
        assert_eq!(r.average, conditional_expectation(s.space(), &f, &inv));
        assert_eq!(r.average, Observable::constant(3, ratio(7, 18)));
    }

    #[test]
    fn z2_double_swap_matches_four_term_sum() {
        let s = system(2, vec![vec![1, 0], vec![1, 0]]);
        let f = Observable::from_ints(&[1, -1]);
        let spec = CubeSpec::uniform(2, &f);
        let bx = [iv(0, 2), iv(0, 2)];
        let r = cube_average(&s, &spec, &bx, Exec::Sequential).unwrap();
        // Terms at x = 0 (f∘swap = -f):
        // (0,0): 1·1·1 = 1; (1,0): -1·1·-1 = 1; (0,1): 1·-1·-1 = 1; (1,1): -1·-1·1 = 1.
        assert_eq!(r.average, Observable::from_ints(&[1, -1]));
        assert_eq!(r.average, brute_average(&s, &spec, &bx));
    }

    #[test]
    fn empty_box_rejected() {
        let s = system(2, vec![vec![1, 0]]);
        let spec = CubeSpec::uniform(1, &Observable::ones(2));
        let e = cube_average(&s, &spec, &[iv(3, 3)], Exec::Sequential).unwrap_err();
        assert_eq!(e, Error::EmptyBox { axis: 1, start: 3, end: 3 });
    }

    #[test]
    fn d1_limit_is_conditional_expectation() {
        let s = system(5, vec![vec![1, 0, 3, 4, 2]]);
        let f = Observable::from_ints(&[3, -1, 2, 0, 7]);
        let spec = CubeSpec::uniform(1, &f);
        let lim = cube_limit(&s, &spec, Exec::Sequential).unwrap();
        let inv = invariant_partition(s.space(), s.transformation(1));
        assert_eq!(lim.average, conditional_expectation(s.space(), &f, &inv));
        assert_eq!(iterated_limit(&s, &spec).unwrap(), lim.average);
    }

    #[test]
    fn matches_brute_force_with_offsets_and_gaps() {
        let s = system(4, vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]);
        let mut functions = BTreeMap::new();
        functions.insert(EpsilonIndex::from_bits(1), Observable::from_ints(&[1, 0, -1, 2]));
        functions.insert(EpsilonIndex::from_bits(3), Observable::from_values(vec![ratio(1, 2), int(1), int(0), ratio(-1, 3)]));
        let spec = CubeSpec::new(functions);
        let bx = [iv(-2, 1), iv(1, 6)];
        let fast = cube_average(&s, &spec, &bx, Exec::Parallel).unwrap();
        assert_eq!(fast.average, brute_average(&s, &spec, &bx));
    }

    #[test]
    fn integrated_limit_z4() {
        // μ(A ∩ T^{-n}A) for A = {0,2} under rotation by 1 on Z_4: 1/2, 0, 1/2, 0.
        let s = system(4, vec![vec![1, 2, 3, 0]]);
        let a = Observable::indicator(4, [0, 2]);
        let lim = integrated_cube_limit(&s, &a, Exec::Sequential).unwrap();
        assert_eq!(lim, ratio(1, 4));
        let sn = box_seminorm(&s, &a, EpsilonIndex::full(1), Strategy::Direct, &MeasureOptions::default()).unwrap();
        assert_eq!(lim, sn.power_value);
        assert!(lim >= ratio(1, 4));
        assert_eq!(integrated_cube_limit(&s, &Observable::ones(4), Exec::Sequential).unwrap(), int(1));
        assert_eq!(
            integrated_cube_limit(&s, &Observable::indicator(4, []), Exec::Sequential).unwrap(),
            int(0)
        );
        assert_eq!(
            integrated_cube_limit(&s, &Observable::from_ints(&[2, 0, 0, 0]), Exec::Sequential)
                .unwrap_err()
                .kind(),
            "NotIndicator"
        );
    }

    #[test]
    fn rank1_bound_examples() {
        let s = system(3, vec![vec![1, 2, 0]]);
        let opts = MeasureOptions::default();
        let ones = CubeSpec::uniform(1, &Observable::ones(3));
        let r = upper_bound_check_rank1(&s, &ones, &opts).unwrap();
        assert!(r.holds && r.holds_exact);
        assert_eq!(r.l2_norm_squared, int(1));
        assert!((r.min_seminorm_float - 1.0).abs() < 1e-12);

        let zero_mean = CubeSpec::uniform(1, &Observable::from_ints(&[1, -1, 0]));
        let r = upper_bound_check_rank1(&s, &zero_mean, &opts).unwrap();
        assert_eq!(r.l2_norm_squared, int(0));
        assert_eq!(r.min_seminorm_float, 0.0);
        assert!(r.holds);

        let big = CubeSpec::uniform(1, &Observable::from_ints(&[2, 0, 0]));
        assert_eq!(upper_bound_check_rank1(&s, &big, &opts).unwrap_err().kind(), "HypothesisViolated");
    }

    #[test]
    fn rank_r_with_r_equal_d_agrees_with_rank1() {
        let s = system(4, vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]);
        let spec = CubeSpec::new(
            EpsilonIndex::nonempty(2)
                .map(|e| (e, Observable::from_ints(&[1, -1, (e.bits() as i64) % 2, 0])))
                .collect(),
        );
        let opts = MeasureOptions::default();
        let a = upper_bound_check_rank1(&s, &spec, &opts).unwrap();
        let b = upper_bound_check_rankr(&s, &spec, 2, &opts).unwrap();
        // Same average; the rank-d bound is the ε = [d] entry of the rank-1 minimum.
        assert_eq!(a.l2_norm_squared, b.l2_norm_squared);
        assert_eq!(b.seminorms.len(), 1);
        let full = a.seminorms.iter().find(|e| e.epsilon == "11").unwrap();
        assert_eq!(full.seminorm, b.seminorms[0].seminorm);
        assert!(a.min_seminorm_float <= b.min_seminorm_float);
    }

    #[test]
    fn rank1_d2_factorizes() {
        // r = 1, d = 2: average of T_1^{n_1} f_10 · T_2^{n_2} f_01 factorizes
        // into E(f_10|I(T_1)) · E(f_01|I(T_2)).
        let s = system(4, vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]);
        let f10 = Observable::from_ints(&[1, 0, -1, 1]);
        let f01 = Observable::from_values(vec![ratio(1, 2), int(-1), int(0), int(1)]);
        let mut functions = BTreeMap::new();
        functions.insert(EpsilonIndex::from_bits(1), f10.clone());
        functions.insert(EpsilonIndex::from_bits(2), f01.clone());
        functions.insert(EpsilonIndex::from_bits(3), Observable::from_ints(&[0, 0, 0, 1]));
        let spec = CubeSpec::new(functions);
        let opts = MeasureOptions::default();
        let r = upper_bound_check_rankr(&s, &spec, 1, &opts).unwrap();
        let e1 = conditional_expectation(s.space(), &f10, &invariant_partition(s.space(), s.transformation(1)));
        let e2 = conditional_expectation(s.space(), &f01, &invariant_partition(s.space(), s.transformation(2)));
        assert_eq!(r.l2_norm_squared, l2_norm_squared(&s, &e1.mul(&e2)));
        assert!(r.holds && r.holds_exact);
        assert_eq!(r.seminorms.len(), 2);
    }

    #[test]
    fn doubling_trace_shrinks() {
        let s = system(6, vec![vec![1, 2, 0, 4, 5, 3], vec![3, 4, 5, 0, 1, 2]]);
        let f = Observable::from_ints(&[1, -1, 1, 0, 1, -1]);
        let spec = CubeSpec::uniform(2, &f);
        let boxes = doubling_boxes(&s, 4);
        let r = cube_trace(&s, &spec, &boxes, Exec::Sequential).unwrap();
        let trace = r.trace.unwrap();
        for w in trace.windows(2) {
            assert!(w[1].l2_deviation <= w[0].l2_deviation);
        }
        for row in &trace {
            assert!(row.l2_deviation <= cesaro_deviation_bound(&s, &spec, &row.box_lengths) + 1e-12);
        }
    }

    #[test]
    fn divergence_demo_identity_and_commuting() {
        let s = system(3, vec![vec![0, 1, 2], vec![0, 1, 2]]);
        let spec = CubeSpec::uniform(2, &Observable::from_ints(&[1, 0, -1]));
        let a = vec![vec![iv(0, 2), iv(0, 3)]];
        let b = vec![vec![iv(5, 9), iv(-1, 0)]];
        let r = divergence_demo(&s, &spec, &a, &b, Exec::Sequential).unwrap();
        assert_eq!(r.steps[0].l2_distance, 0.0);

        let s = system(4, vec![vec![1, 2, 3, 0], vec![2, 3, 0, 1]]);
        let spec = CubeSpec::uniform(2, &Observable::from_ints(&[1, 0, -1, 1]));
        let a = vec![multi_period_box(&s, &[1, 1], &[0, 0])];
        let b = vec![multi_period_box(&s, &[3, 2], &[7, -5])];
        let r = divergence_demo(&s, &spec, &a, &b, Exec::Sequential).unwrap();
        assert_eq!(r.steps[0].l2_distance, 0.0);
        assert!(r.commuting);
    }
}
