//! Finite measure-preserving systems: a probability space on dense point
//! indices, weight-preserving permutations, observables and the cube-vertex
//! index `ε ⊆ [d]`.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbabilitySpace {
    labels: Vec<String>,
    weights: Vec<Rational>,
}

impl ProbabilitySpace {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, weights)
    }

    pub fn with_labels(labels: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadWeights("space has no points".into()));
        }
        if labels.len() != weights.len() {
            return Err(Error::BadWeights(format!(
                "{} labels but {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if let Some((x, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_positive()) {
            return Err(Error::BadWeights(format!(
                "weight of point {x} is {}, must be strictly positive",
                rational::format(w)
            )));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::BadWeights(format!(
                "weights sum to {}, not 1",
                rational::format(&total)
            )));
        }
        Ok(Self { labels, weights })
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform space needs at least one point");
        let w = rational::ratio(1, n as i64);
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            weights: vec![w; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, x: usize) -> &Rational {
        &self.weights[x]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    /// Σ w(x) f(x).
    pub fn integrate(&self, f: &Observable) -> Rational {
        assert_eq!(f.len(), self.len(), "observable lives on another space");
        self.weights
            .iter()
            .zip(f.values())
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Squared L² norm ∫ f² dμ.
    pub fn norm2_squared(&self, f: &Observable) -> Rational {
        assert_eq!(f.len(), self.len(), "observable lives on another space");
        self.weights
            .iter()
            .zip(f.values())
            .map(|(w, v)| w * v * v)
            .sum()
    }
}

/// Cycle decomposition of a permutation, kept alongside the image so that
/// `T^n x` costs one lookup for any integer `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Cycles {
    cycle_of: Vec<u32>,
    position: Vec<u32>,
    cycles: Vec<Vec<usize>>,
}

impl Cycles {
    fn of(image: &[usize]) -> Self {
        let n = image.len();
        let mut cycle_of = vec![u32::MAX; n];
        let mut position = vec![0u32; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if cycle_of[start] != u32::MAX {
                continue;
            }
            let id = cycles.len() as u32;
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                cycle_of[x] = id;
                position[x] = cycle.len() as u32;
                cycle.push(x);
                x = image[x];
                if x == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Self {
            cycle_of,
            position,
            cycles,
        }
    }
}

/// A permutation of `0..n`. Measure preservation is checked when it is
/// attached to a space in [`System::new`].
#[derive(Debug, Clone)]
pub struct Transformation {
    name: String,
    image: Vec<usize>,
    cycles: Cycles,
}

impl PartialEq for Transformation {
    fn eq(&self, other: &Self) -> bool {
        self.image == other.image
    }
}

impl Eq for Transformation {}

impl Transformation {
    pub fn new(name: impl Into<String>, image: Vec<usize>) -> Result<Self> {
        let name = name.into();
        let n = image.len();
        let mut seen = vec![false; n];
        for (x, &y) in image.iter().enumerate() {
            if y >= n {
                return Err(Error::NonBijective {
                    name,
                    detail: format!("image of {x} is {y}, outside 0..{n}"),
                });
            }
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::NonBijective {
                    name,
                    detail: format!("point {y} is hit twice"),
                });
            }
        }
        let cycles = Cycles::of(&image);
        Ok(Self {
            name,
            image,
            cycles,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new("id", (0..n).collect()).expect("identity is a bijection")
    }

    /// The cyclic shift `x ↦ x + 1 mod n`.
    pub fn rotation(n: usize) -> Self {
        Self::new("rot", (0..n).map(|x| (x + 1) % n).collect()).expect("rotation is a bijection")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    /// `T^n x` for any integer `n`, negative powers included.
    #[inline]
    pub fn apply_pow(&self, x: usize, n: i64) -> usize {
        let cycle = &self.cycles.cycles[self.cycles.cycle_of[x] as usize];
        let len = cycle.len() as i64;
        let pos = (self.cycles.position[x] as i64 + n.rem_euclid(len)) % len;
        cycle[pos as usize]
    }

    pub fn pow(&self, n: i64) -> Self {
        let image = (0..self.len()).map(|x| self.apply_pow(x, n)).collect();
        Self::new(format!("{}^{n}", self.name), image).expect("powers of a bijection are bijections")
    }

    pub fn inverse(&self) -> Self {
        self.pow(-1)
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        let image = other.image.iter().map(|&y| self.image[y]).collect();
        Self::new(format!("{}∘{}", self.name, other.name), image)
            .expect("composition of bijections is a bijection")
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(x, &y)| x == y)
    }

    /// Orbits as sorted lists, ordered by smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self
            .cycles
            .cycles
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        out.sort_unstable_by_key(|c| c[0]);
        out
    }

    pub fn cycle_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.cycles.cycles.iter().map(Vec::len)
    }
}

/// Least `L ≥ 1` with `T^L = id`: the lcm of the cycle lengths.
pub fn orbit_order(t: &Transformation) -> u64 {
    t.cycle_lengths().fold(1u64, |acc, len| acc.lcm(&(len as u64)))
}

/// A cube vertex `ε ⊆ [d]` stored as a bitmask: bit `i - 1` is set iff `i ∈ ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpsilonIndex(u32);

impl EpsilonIndex {
    pub const EMPTY: EpsilonIndex = EpsilonIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub fn full(d: usize) -> Self {
        assert!(d < 32);
        Self((1u32 << d) - 1)
    }

    /// From 1-based members, as written in `ε = {1, 3}`.
    pub fn from_members(members: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &i in members {
            if i == 0 || i > 31 {
                return Err(Error::BadEpsilon(format!("member {i} outside 1..=31")));
            }
            bits |= 1 << (i - 1);
        }
        Ok(Self(bits))
    }

    /// Parses the digit string `ε_1 ε_2 ⋯ ε_d`, e.g. `"110"` is `{1, 2}`.
    pub fn parse_digits(digits: &str) -> Result<Self> {
        let mut bits = 0u32;
        if digits.len() > 31 {
            return Err(Error::BadEpsilon(format!("{digits:?} is too long")));
        }
        for (i, c) in digits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::BadEpsilon(format!("{digits:?} is not a 0/1 string"))),
            }
        }
        Ok(Self(bits))
    }

    pub fn digits(self, d: usize) -> String {
        (0..d)
            .map(|i| if self.0 >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// `|ε|`.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// 1-based membership test.
    pub fn contains(self, i: usize) -> bool {
        i >= 1 && i <= 32 && self.0 >> (i - 1) & 1 == 1
    }

    /// 1-based members in increasing order.
    pub fn members(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn fits(self, d: usize) -> bool {
        self.is_subset_of(Self::full(d))
    }

    /// All `2^d` vertices in bitmask order.
    pub fn all(d: usize) -> impl Iterator<Item = EpsilonIndex> {
        (0..1u32 << d).map(EpsilonIndex)
    }

    /// All nonempty vertices in bitmask order.
    pub fn nonempty(d: usize) -> impl Iterator<Item = EpsilonIndex> {
        (1..1u32 << d).map(EpsilonIndex)
    }
}

impl fmt::Display for EpsilonIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().into_iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// A rational-valued function on the points of a space. Boundedness is not
/// part of the type; operations that need `|f| ≤ 1` check it themselves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observable {
    values: Vec<Rational>,
}

impl Observable {
    pub fn new(space: &ProbabilitySpace, values: Vec<Rational>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    /// Unchecked constructor for internally generated values.
    pub fn from_values(values: Vec<Rational>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    pub fn indicator(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut values = vec![Rational::zero(); n];
        for x in members {
            values[x] = Rational::one();
        }
        Self { values }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self {
            values: values.iter().map(|&v| rational::int(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, x: usize) -> &Rational {
        &self.values[x]
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    /// `f ∘ T`, i.e. the Koopman image `x ↦ f(T x)`.
    pub fn compose(&self, t: &Transformation) -> Self {
        Self {
            values: t.image().iter().map(|&y| self.values[y].clone()).collect(),
        }
    }

    pub fn map(&self, mut g: impl FnMut(&Rational) -> Rational) -> Self {
        Self {
            values: self.values.iter().map(&mut g).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, mut g: impl FnMut(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| g(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|v| v * c)
    }

    pub fn sup_norm(&self) -> Rational {
        rational::max_abs(&self.values)
    }

    /// First point whose value is neither 0 nor 1.
    pub fn check_indicator(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| !(v.is_zero() || v.is_one()))
        {
            None => Ok(()),
            Some(x) => Err(Error::NotIndicator {
                point: x,
                value: rational::format(&self.values[x]),
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }
}

/// `(X, μ, T_1, …, T_d)`. `commuting` records whether the transformations
/// actually commute; it is computed, never asserted by the caller.
#[derive(Debug, Clone)]
pub struct System {
    space: ProbabilitySpace,
    transformations: Vec<Transformation>,
    commuting: bool,
}

impl System {
    pub fn new(
        space: ProbabilitySpace,
        transformations: Vec<Transformation>,
        require_commuting: bool,
    ) -> Result<Self> {
        if transformations.is_empty() {
            return Err(Error::NoTransformations);
        }
        for t in &transformations {
            if t.len() != space.len() {
                return Err(Error::NonBijective {
                    name: t.name().to_string(),
                    detail: format!("acts on {} points, space has {}", t.len(), space.len()),
                });
            }
            if let Some(x) = (0..space.len()).find(|&x| space.weight(t.apply(x)) != space.weight(x)) {
                return Err(Error::NotMeasurePreserving {
                    name: t.name().to_string(),
                    point: x,
                    image: t.apply(x),
                });
            }
        }
        let witness = commutation_witness(&transformations);
        if require_commuting {
            if let Some(err) = witness {
                return Err(err);
            }
        }
        Ok(Self {
            space,
            commuting: witness.is_none(),
            transformations,
        })
    }

    pub fn space(&self) -> &ProbabilitySpace {
        &self.space
    }

    pub fn transformations(&self) -> &[Transformation] {
        &self.transformations
    }

    /// 1-based, matching `T_1, …, T_d`.
    pub fn transformation(&self, i: usize) -> &Transformation {
        &self.transformations[i - 1]
    }

    pub fn dim(&self) -> usize {
        self.transformations.len()
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn is_commuting(&self) -> bool {
        self.commuting
    }

    pub fn require_commuting(&self) -> Result<()> {
        match commutation_witness(&self.transformations) {
            None => Ok(()),
            Some(err) => Err(err),
        }
    }

    pub fn orders(&self) -> Vec<u64> {
        self.transformations.iter().map(orbit_order).collect()
    }

    /// The subsystem `(X, μ, T_{i_1}, …, T_{i_k})` in the given (1-based) order.
    pub fn subsystem(&self, order: &[usize]) -> Result<System> {
        if order.is_empty() {
            return Err(Error::BadEpsilon("empty transformation list".into()));
        }
        let mut ts = Vec::with_capacity(order.len());
        for &i in order {
            if i == 0 || i > self.dim() {
                return Err(Error::BadEpsilon(format!("T_{i} does not exist (d = {})", self.dim())));
            }
            ts.push(self.transformations[i - 1].clone());
        }
        let commuting = commutation_witness(&ts).is_none();
        Ok(System {
            space: self.space.clone(),
            transformations: ts,
            commuting,
        })
    }

    /// `T_ε^n x = T_{i_1}^{n_{i_1}} ⋯ T_{i_k}^{n_{i_k}} x`; the highest index is
    /// applied first. The order only matters for non-commuting systems.
    #[inline]
    pub fn apply_power(&self, x: usize, n: &[i64], eps: EpsilonIndex) -> usize {
        let mut y = x;
        for i in (0..self.dim()).rev() {
            if eps.0 >> i & 1 == 1 {
                y = self.transformations[i].apply_pow(y, n[i]);
            }
        }
        y
    }
}

/// First `(i, j, x)` (1-based `i < j`) with `T_i T_j x ≠ T_j T_i x`.
fn commutation_witness(ts: &[Transformation]) -> Option<Error> {
    for i in 0..ts.len() {
        for j in i + 1..ts.len() {
            for x in 0..ts[i].len() {
                let left = ts[i].apply(ts[j].apply(x));
                let right = ts[j].apply(ts[i].apply(x));
                if left != right {
                    return Some(Error::NotCommuting {
                        i: i + 1,
                        j: j + 1,
                        x,
                        left,
                        right,
                    });
                }
            }
        }
    }
    None
}

/// Builds a [`System`] from raw weights and images, enforcing every axiom;
/// commutativity is enforced iff `require_commuting`.
pub fn validate_system(
    labels: Vec<String>,
    weights: Vec<Rational>,
    transformations: Vec<(String, Vec<usize>)>,
    require_commuting: bool,
) -> Result<System> {
    let space = ProbabilitySpace::with_labels(labels, weights)?;
    let ts = transformations
        .into_iter()
        .map(|(name, image)| Transformation::new(name, image))
        .collect::<Result<Vec<_>>>()?;
    System::new(space, ts, require_commuting)
}

/// The permutation `T_ε^n` as a standalone [`Transformation`].
pub fn transformation_power_action(system: &System, n: &[i64], eps: EpsilonIndex) -> Result<Transformation> {
    if n.len() != system.dim() {
        return Err(Error::BadEpsilon(format!(
            "shift vector has length {}, system has d = {}",
            n.len(),
            system.dim()
        )));
    }
    if !eps.fits(system.dim()) {
        return Err(Error::BadEpsilon(format!("{eps} is not a subset of [{}]", system.dim())));
    }
    let image = (0..system.len())
        .map(|x| system.apply_power(x, n, eps))
        .collect();
    Transformation::new(format!("T_{eps}^{n:?}"), image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn uniform_system(n: usize, images: Vec<Vec<usize>>, require: bool) -> Result<System> {
        let ts = images
            .into_iter()
            .enumerate()
            .map(|(i, im)| Transformation::new(format!("T{}", i + 1), im))
            .collect::<Result<Vec<_>>>()?;
        System::new(ProbabilitySpace::uniform(n), ts, require)
    }

    #[test]
    fn identity_on_two_points_is_valid() {
        let s = validate_system(
            vec!["a".into(), "b".into()],
            vec![ratio(1, 2), ratio(1, 2)],
            vec![("T1".into(), vec![0, 1])],
            true,
        )
        .unwrap();
        assert!(s.is_commuting());
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn non_bijective_image_is_rejected() {
        let err = uniform_system(2, vec![vec![1, 1]], false).unwrap_err();
        assert_eq!(err.kind(), "NonBijective");
        let err = uniform_system(2, vec![vec![0, 2]], false).unwrap_err();
        assert_eq!(err.kind(), "NonBijective");
    }

    #[test]
    fn non_commuting_witness_matches_hand_composition() {
        // T1 = (0 1 2), T2 = (0 1). By hand: T1T2(2) = T1(2) = 0 and
        // T2T1(2) = T2(0) = 1, so x = 2 witnesses non-commutation. Every point
        // does here; the reported witness is the first one, x = 0, where
        // T1T2(0) = T1(1) = 2 and T2T1(0) = T2(1) = 0.
        let t1 = Transformation::new("T1", vec![1, 2, 0]).unwrap();
        let t2 = Transformation::new("T2", vec![1, 0, 2]).unwrap();
        assert_eq!(t1.compose(&t2).apply(2), 0);
        assert_eq!(t2.compose(&t1).apply(2), 1);
        let err = uniform_system(3, vec![vec![1, 2, 0], vec![1, 0, 2]], true).unwrap_err();
        assert_eq!(
            err,
            Error::NotCommuting {
                i: 1,
                j: 2,
                x: 0,
                left: 2,
                right: 0
            }
        );
        // The same pair is accepted, flagged, when commutativity is not required.
        let s = uniform_system(3, vec![vec![1, 2, 0], vec![1, 0, 2]], false).unwrap();
        assert!(!s.is_commuting());
    }

    #[test]
    fn bad_weights() {
        let e = ProbabilitySpace::new(vec![ratio(1, 2), ratio(1, 3)]).unwrap_err();
        assert_eq!(e.kind(), "BadWeights");
        let e = ProbabilitySpace::new(vec![ratio(1, 1), ratio(0, 1)]).unwrap_err();
        assert_eq!(e.kind(), "BadWeights");
        let e = ProbabilitySpace::new(vec![ratio(3, 2), ratio(-1, 2)]).unwrap_err();
        assert_eq!(e.kind(), "BadWeights");
    }

    #[test]
    fn weight_mismatch_along_orbit() {
        let space = ProbabilitySpace::new(vec![ratio(1, 4), ratio(3, 4)]).unwrap();
        let t = Transformation::new("swap", vec![1, 0]).unwrap();
        let e = System::new(space, vec![t], false).unwrap_err();
        assert_eq!(
            e,
            Error::NotMeasurePreserving {
                name: "swap".into(),
                point: 0,
                image: 1
            }
        );
    }

    #[test]
    fn power_action_examples() {
        let s = uniform_system(3, vec![vec![1, 2, 0]], true).unwrap();
        let id = transformation_power_action(&s, &[5], EpsilonIndex::EMPTY).unwrap();
        assert!(id.is_identity());
        assert!(transformation_power_action(&s, &[3], EpsilonIndex::full(1))
            .unwrap()
            .is_identity());
        let back = transformation_power_action(&s, &[-1], EpsilonIndex::full(1)).unwrap();
        assert_eq!(back.image(), &[2, 0, 1]);

        let s = uniform_system(2, vec![vec![1, 0], vec![1, 0]], true).unwrap();
        assert!(transformation_power_action(&s, &[1, 1], EpsilonIndex::full(2))
            .unwrap()
            .is_identity());
        assert_eq!(
            transformation_power_action(&s, &[1, 1], EpsilonIndex::from_bits(0b10))
                .unwrap()
                .image(),
            &[1, 0]
        );
    }

    #[test]
    fn orbit_order_examples() {
        assert_eq!(orbit_order(&Transformation::identity(4)), 1);
        assert_eq!(orbit_order(&Transformation::rotation(6)), 6);
        let t = Transformation::new("t", vec![1, 0, 3, 4, 2]).unwrap();
        // Brute force: power until identity.
        let mut p = t.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = t.compose(&p);
            k += 1;
        }
        assert_eq!(k, 6);
        assert_eq!(orbit_order(&t), 6);
    }

    #[test]
    fn epsilon_digits_round_trip() {
        let e = EpsilonIndex::parse_digits("101").unwrap();
        assert_eq!(e.members(), vec![1, 3]);
        assert_eq!(e.digits(3), "101");
        assert_eq!(e.len(), 2);
        assert!(e.contains(3) && !e.contains(2));
        assert_eq!(EpsilonIndex::from_members(&[1, 3]).unwrap(), e);
        assert_eq!(e.to_string(), "{1,3}");
        assert!(EpsilonIndex::parse_digits("12").is_err());
    }

    #[test]
    fn koopman_composition() {
        let f = Observable::from_ints(&[10, 20, 30]);
        let t = Transformation::rotation(3);
        assert_eq!(f.compose(&t), Observable::from_ints(&[20, 30, 10]));
    }
}
