//! Relative-product measures on `X^{2^k}` and the box seminorms they define.
//!
//! `μ_0 = μ`, and `μ_k = μ_{k-1} ×_{I(T_k^△)} μ_{k-1}` where `T_k^△` acts
//! diagonally on `2^{k-1}` coordinates. Tuples are laid out so that
//! coordinate `c` of a `2^k`-tuple is the cube vertex whose bitmask is `c`:
//! the first half carries `ε_k = 0`, the second half `ε_k = 1`.
//!
//! Seminorms are computed two independent ways: [`Strategy::Direct`] sums
//! `∏ f(x_ε)` over the support of `μ*`, [`Strategy::Recursive`] never builds
//! `μ*` and instead evaluates `Σ_cells (Σ_{a ∈ cell} μ_{k-1}(a) ⊗f(a))² / W(cell)`
//! over the orbit partition of `T_k^△` on the support of `μ_{k-1}`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::conditional::Partition;
use crate::error::{Error, Result};
use crate::parallel::Exec;
use crate::rational::{self, Rational, Scaled};
use crate::system::{EpsilonIndex, Observable, ProbabilitySpace, System, Transformation};

pub const DEFAULT_MAX_ENTRIES: usize = 10_000_000;

/// Reads `CUBEAVG_MAX_ENTRIES`, falling back to [`DEFAULT_MAX_ENTRIES`].
pub fn max_entries_from_env() -> usize {
    std::env::var("CUBEAVG_MAX_ENTRIES")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_ENTRIES)
}

/// A probability measure on `X^{2^k}` with finite support, stored as a flat
/// arena of tuples in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMeasure {
    arity: usize,
    base_points: usize,
    tuples: Vec<u32>,
    weights: Vec<Rational>,
}

impl SparseMeasure {
    /// `μ` itself, seen as a measure on 1-tuples.
    pub fn base(space: &ProbabilitySpace) -> Self {
        Self {
            arity: 0,
            base_points: space.len(),
            tuples: (0..space.len() as u32).collect(),
            weights: space.weights().to_vec(),
        }
    }

    /// `k`, for tuples of length `2^k`.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn width(&self) -> usize {
        1 << self.arity
    }

    pub fn base_points(&self) -> usize {
        self.base_points
    }

    /// Number of support entries.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[u32] {
        let w = self.width();
        &self.tuples[i * w..(i + 1) * w]
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.tuples.chunks_exact(self.width()).zip(&self.weights)
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    /// Mixed-radix key (base `|X|`, first coordinate most significant), or
    /// `None` when it does not fit in 128 bits.
    pub fn key(&self, i: usize) -> Option<u128> {
        let base = self.base_points as u128;
        self.tuple(i)
            .iter()
            .try_fold(0u128, |acc, &c| acc.checked_mul(base)?.checked_add(c as u128))
    }

    /// Support position of each tuple.
    pub fn index(&self) -> HashMap<&[u32], usize> {
        self.tuples
            .chunks_exact(self.width())
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect()
    }

    pub fn weight_of(&self, tuple: &[u32]) -> Option<&Rational> {
        let w = self.width();
        if tuple.len() != w {
            return None;
        }
        // Lexicographic order makes the arena binary-searchable.
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.tuple(mid).cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(&self.weights[mid]),
            }
        }
        None
    }

    /// The support as a probability space (points are support entries).
    pub fn as_space(&self) -> ProbabilitySpace {
        let labels = self
            .tuples
            .chunks_exact(self.width())
            .map(|t| {
                let parts: Vec<String> = t.iter().map(u32::to_string).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        ProbabilitySpace::with_labels(labels, self.weights.clone())
            .expect("support weights are positive and sum to 1")
    }

    /// Marginal on coordinate `c`.
    pub fn marginal(&self, c: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.base_points];
        for (t, w) in self.iter() {
            out[t[c] as usize] += w;
        }
        out
    }

    /// Exchanges the two halves of every tuple.
    pub fn swap_halves(&self) -> SparseMeasure {
        let w = self.width();
        let h = w / 2;
        let mut rows: Vec<(Vec<u32>, Rational)> = self
            .iter()
            .map(|(t, wt)| {
                let mut s = t[h..].to_vec();
                s.extend_from_slice(&t[..h]);
                (s, wt.clone())
            })
            .collect();
        rows.sort();
        Self::from_rows(self.arity, self.base_points, rows)
    }

    /// Reorders coordinates: new coordinate `c` is old coordinate `perm[c]`.
    pub fn permute_coordinates(&self, perm: &[usize]) -> SparseMeasure {
        assert_eq!(perm.len(), self.width());
        let mut rows: Vec<(Vec<u32>, Rational)> = self
            .iter()
            .map(|(t, wt)| (perm.iter().map(|&p| t[p]).collect(), wt.clone()))
            .collect();
        rows.sort();
        Self::from_rows(self.arity, self.base_points, rows)
    }

    /// Builds from `(tuple, weight)` rows that are already sorted and distinct.
    pub fn from_rows(arity: usize, base_points: usize, rows: Vec<(Vec<u32>, Rational)>) -> Self {
        let width = 1 << arity;
        let mut tuples = Vec::with_capacity(rows.len() * width);
        let mut weights = Vec::with_capacity(rows.len());
        for (t, w) in rows {
            assert_eq!(t.len(), width);
            tuples.extend_from_slice(&t);
            weights.push(w);
        }
        Self {
            arity,
            base_points,
            tuples,
            weights,
        }
    }

    /// `∫ ∏_c f(x_c) dm`.
    pub fn integrate_tensor(&self, f: &Observable, exec: Exec) -> Rational {
        let enc = Scaled::new(&self.weights);
        let fv = Scaled::new(f.values());
        let width = self.width();
        let sum = exec
            .fold_chunks(
                0..self.len(),
                |range| {
                    let mut acc = BigInt::zero();
                    for i in range {
                        let mut p = enc.nums[i].clone();
                        for &c in &self.tuples[i * width..(i + 1) * width] {
                            p *= &fv.nums[c as usize];
                        }
                        acc += p;
                    }
                    acc
                },
                |a, b| a + b,
            )
            .unwrap_or_default();
        Rational::new(sum, enc.den * num_traits::pow(fv.den, width))
    }
}


/// `m ×_P m`: weight of `(a, b)` is `m(a) m(b) / W(cell)` when `a` and `b`
/// share a cell of `P`, where `P` partitions the support of `m`.
pub fn relative_product(m: &SparseMeasure, p: &Partition, max_entries: usize) -> Result<SparseMeasure> {
    if p.num_points() != m.len() {
        return Err(Error::MismatchedSpace(m.len(), p.num_points()));
    }
    let entries: usize = p.cells().iter().map(|c| c.len() * c.len()).sum();
    if entries > max_entries {
        return Err(Error::SupportOverflow { cap: max_entries });
    }
    let width = m.width();
    let mut tuples = Vec::with_capacity(entries * 2 * width);
    let mut weights = Vec::with_capacity(entries);
    for a in 0..m.len() {
        let c = p.cell_of(a);
        let cell_mass = p.cell_weight(c);
        if cell_mass.is_zero() {
            return Err(Error::EmptyCellMass(c));
        }
        let wa = m.weight(a) / cell_mass;
        for &b in &p.cells()[c] {
            tuples.extend_from_slice(m.tuple(a));
            tuples.extend_from_slice(m.tuple(b));
            weights.push(&wa * m.weight(b));
        }
    }
    Ok(SparseMeasure {
        arity: m.arity + 1,
        base_points: m.base_points,
        tuples,
        weights,
    })
}

/// `T × ⋯ × T` acting coordinatewise on `copies`-tuples.
#[derive(Debug, Clone)]
pub struct DiagonalTransformation<'a> {
    t: &'a Transformation,
    copies: usize,
}

pub fn diagonal_transformation(t: &Transformation, copies: usize) -> DiagonalTransformation<'_> {
    DiagonalTransformation { t, copies }
}

impl DiagonalTransformation<'_> {
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn apply(&self, tuple: &[u32]) -> Vec<u32> {
        assert_eq!(tuple.len(), self.copies);
        tuple.iter().map(|&x| self.t.apply(x as usize) as u32).collect()
    }

    pub fn apply_pow(&self, tuple: &[u32], n: i64) -> Vec<u32> {
        assert_eq!(tuple.len(), self.copies);
        tuple
            .iter()
            .map(|&x| self.t.apply_pow(x as usize, n) as u32)
            .collect()
    }

    /// The action on the support of `m`, which must be mapped onto itself.
    pub fn restrict(&self, m: &SparseMeasure) -> Result<Transformation> {
        let index = m.index();
        let image = (0..m.len())
            .map(|i| {
                let y = self.apply(m.tuple(i));
                index.get(y.as_slice()).copied().ok_or_else(|| {
                    Error::HypothesisViolated(format!(
                        "diagonal {} moves support tuple {:?} off the support",
                        self.t.name(),
                        m.tuple(i)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Transformation::new(format!("{}^△", self.t.name()), image)
    }

    /// Atoms of `I(T^△)` traced on the support of `m`: support entries lying
    /// on a common diagonal orbit. When the action preserves the support this
    /// is exactly the orbit partition of [`Self::restrict`]; otherwise each
    /// entry is linked to the next support entry along its orbit.
    pub fn orbit_partition(&self, m: &SparseMeasure) -> Partition {
        let index = m.index();
        let mut uf = crate::conditional::UnionFind::new(m.len());
        for i in 0..m.len() {
            let mut y = self.apply(m.tuple(i));
            loop {
                if let Some(&j) = index.get(y.as_slice()) {
                    uf.union(i, j);
                    break;
                }
                y = self.apply(&y);
            }
        }
        let roots: Vec<usize> = (0..m.len()).map(|i| uf.find(i)).collect();
        Partition::from_weighted_keys(m.weights(), roots)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureOptions {
    pub max_entries: usize,
    pub exec: Exec,
    /// Lets seminorm code run on non-commuting systems, for demonstrations only.
    pub allow_non_commuting: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            max_entries: max_entries_from_env(),
            exec: Exec::default(),
            allow_non_commuting: false,
        }
    }
}

fn check_order(system: &System, order: &[usize]) -> Result<()> {
    if order.is_empty() {
        return Err(Error::BadEpsilon("seminorms need |ε| ≥ 1".into()));
    }
    let mut seen = vec![false; system.dim() + 1];
    for &i in order {
        if i == 0 || i > system.dim() {
            return Err(Error::BadEpsilon(format!("T_{i} does not exist (d = {})", system.dim())));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::BadEpsilon(format!("T_{i} listed twice")));
        }
    }
    Ok(())
}

fn check_commuting(system: &System, order: &[usize], opts: &MeasureOptions) -> Result<()> {
    if opts.allow_non_commuting {
        return Ok(());
    }
    system.subsystem(order)?.require_commuting()
}

/// `μ_0, μ_1, …, μ_k` for the transformations `T_i`, `i` in `order`
/// (1-based, applied in the listed order).
pub fn build_levels(system: &System, order: &[usize], max_entries: usize) -> Result<Vec<SparseMeasure>> {
    check_order(system, order)?;
    let mut levels = vec![SparseMeasure::base(system.space())];
    for &i in order {
        let prev = levels.last().expect("nonempty");
        let diag = diagonal_transformation(system.transformation(i), prev.width());
        let cells = diag.orbit_partition(prev);
        let next = relative_product(prev, &cells, max_entries)?;
        levels.push(next);
    }
    Ok(levels)
}

/// `μ*` for `T_i, i ∈ ε`, built in increasing index order.
pub fn build_mu_star(system: &System, eps: EpsilonIndex, opts: &MeasureOptions) -> Result<SparseMeasure> {
    build_mu_star_ordered(system, &eps.members(), opts)
}

/// `μ*` for the transformations listed in `order`.
pub fn build_mu_star_ordered(system: &System, order: &[usize], opts: &MeasureOptions) -> Result<SparseMeasure> {
    check_order(system, order)?;
    check_commuting(system, order, opts)?;
    let mut levels = build_levels(system, order, opts.max_entries)?;
    Ok(levels.pop().expect("at least one level"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Sum over the support of `μ*`.
    Direct,
    /// Square of the conditional expectation over `μ_{k-1}`.
    Recursive,
    /// Recursive, falling back to direct.
    #[default]
    Auto,
}

/// `⫴f⫴^{2^k}` kept exactly; the root is for display only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormValue {
    /// 1-based transformation indices in construction order.
    pub epsilon: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    pub power_value: Rational,
    pub degree: u32,
    #[serde(rename = "value")]
    pub float_value: f64,
}

impl SeminormValue {
    fn new(epsilon: Vec<usize>, power_value: Rational) -> Self {
        let degree = 1u32 << epsilon.len();
        let float_value = rational::root(&power_value, degree);
        Self {
            epsilon,
            power_value,
            degree,
            float_value,
        }
    }
}

/// `Σ_x μ*(x) ∏_c f(x_c)` over the support of `μ*`.
pub fn seminorm_power_direct(system: &System, f: &Observable, order: &[usize], opts: &MeasureOptions) -> Result<Rational> {
    let star = build_mu_star_ordered(system, order, opts)?;
    Ok(star.integrate_tensor(f, opts.exec))
}

/// `∫ E(⊗f | I(T_k^△))² dμ_{k-1}` without building `μ_k`.
pub fn seminorm_power_recursive(
    system: &System,
    f: &Observable,
    order: &[usize],
    opts: &MeasureOptions,
) -> Result<Rational> {
    Ok(RecursivePlan::new(system, order, opts)?.power(f))
}

/// The recursive integrator with `μ_{k-1}` and the cells of `I(T_k^△)`
/// prepared once, for evaluating many observables on one system.
#[derive(Debug, Clone)]
pub struct RecursivePlan {
    inner: SparseMeasure,
    cells: Partition,
    mu: Scaled,
    /// Cell masses over the denominator of `mu`.
    cell_mass: Vec<BigInt>,
    exec: Exec,
}

impl RecursivePlan {
    pub fn new(system: &System, order: &[usize], opts: &MeasureOptions) -> Result<Self> {
        check_order(system, order)?;
        check_commuting(system, order, opts)?;
        let (last, head) = order.split_last().expect("nonempty order");
        let inner = if head.is_empty() {
            SparseMeasure::base(system.space())
        } else {
            build_levels(system, head, opts.max_entries)?
                .pop()
                .expect("at least one level")
        };
        let cells =
            diagonal_transformation(system.transformation(*last), inner.width()).orbit_partition(&inner);
        let mu = Scaled::new(inner.weights());
        let cell_mass = cells
            .cells()
            .iter()
            .map(|c| c.iter().map(|&a| &mu.nums[a]).sum())
            .collect();
        Ok(Self {
            inner,
            cells,
            mu,
            cell_mass,
            exec: opts.exec,
        })
    }

    /// `μ_{k-1}`.
    pub fn inner(&self) -> &SparseMeasure {
        &self.inner
    }

    pub fn cells(&self) -> &Partition {
        &self.cells
    }

    pub fn power(&self, f: &Observable) -> Rational {
        assert_eq!(f.len(), self.inner.base_points(), "observable lives on another space");
        let fv = Scaled::new(f.values());
        let width = self.inner.width();
        let masses: Vec<BigInt> = self.exec.map_indexed(0..self.cells.num_cells(), |c| {
            let mut mass = BigInt::zero();
            for &a in &self.cells.cells()[c] {
                let mut p = self.mu.nums[a].clone();
                for &x in self.inner.tuple(a) {
                    p *= &fv.nums[x as usize];
                }
                mass += p;
            }
            mass
        });
        let mut total = Rational::zero();
        for (mass, w) in masses.into_iter().zip(&self.cell_mass) {
            if !mass.is_zero() {
                total += Rational::new(&mass * &mass, w.clone());
            }
        }
        let scale = &self.mu.den * num_traits::pow(fv.den, 2 * width);
        total / Rational::from_integer(scale)
    }
}

/// The box seminorm `⫴f⫴_ε` with the transformations of `ε` in increasing order.
pub fn box_seminorm(
    system: &System,
    f: &Observable,
    eps: EpsilonIndex,
    strategy: Strategy,
    opts: &MeasureOptions,
) -> Result<SeminormValue> {
    if !eps.fits(system.dim()) {
        return Err(Error::BadEpsilon(format!("{eps} is not a subset of [{}]", system.dim())));
    }
    box_seminorm_ordered(system, f, &eps.members(), strategy, opts)
}

pub fn box_seminorm_ordered(
    system: &System,
    f: &Observable,
    order: &[usize],
    strategy: Strategy,
    opts: &MeasureOptions,
) -> Result<SeminormValue> {
    if f.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: f.len(),
        });
    }
    let power = match strategy {
        Strategy::Direct => seminorm_power_direct(system, f, order, opts)?,
        Strategy::Recursive => seminorm_power_recursive(system, f, order, opts)?,
        Strategy::Auto => match seminorm_power_recursive(system, f, order, opts) {
            Err(Error::SupportOverflow { .. }) => seminorm_power_direct(system, f, order, opts)?,
            other => other?,
        },
    };
    Ok(SeminormValue::new(order.to_vec(), power))
}

/// Whether `⫴f⫴_ε` computed with the transformations in `reordered` agrees
/// exactly with the increasing-order value. `reordered` must list the
/// members of `ε`.
pub fn seminorm_digit_permutation_check(
    system: &System,
    f: &Observable,
    eps: EpsilonIndex,
    reordered: &[usize],
    strategy: Strategy,
    opts: &MeasureOptions,
) -> Result<bool> {
    let mut sorted = reordered.to_vec();
    sorted.sort_unstable();
    if sorted != eps.members() {
        return Err(Error::BadEpsilon(format!(
            "{reordered:?} is not an ordering of {eps}"
        )));
    }
    let base = box_seminorm(system, f, eps, strategy, opts)?;
    let other = box_seminorm_ordered(system, f, reordered, strategy, opts)?;
    Ok(base.power_value == other.power_value)
}

/// Exact comparison `⫴f⫴_big ≥ ⫴f⫴_small` from the stored powers:
/// `p_big ≥ p_small^{2^{k_big - k_small}}` for nonnegative powers.
pub fn dominates(big: &SeminormValue, small: &SeminormValue) -> bool {
    assert!(big.degree >= small.degree);
    if small.power_value.is_negative() || big.power_value.is_negative() {
        return false;
    }
    let ratio = big.degree / small.degree;
    big.power_value >= rational::pow(&small.power_value, ratio)
}

/// `power(cf) = c^{2^k} power(f)` at the level of exact powers.
pub fn homogeneity_holds(power_f: &Rational, power_cf: &Rational, c: &Rational, degree: u32) -> bool {
    *power_cf == rational::pow(c, degree) * power_f
}

#[allow(dead_code)]
fn is_probability(m: &SparseMeasure) -> bool {
    m.total().is_one() && m.weights().iter().all(Signed::is_positive)
}
