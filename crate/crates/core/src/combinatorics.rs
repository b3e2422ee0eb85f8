//! Finite-window recurrence: window density of lattice subsets, the cyclic
//! correspondence system, recurrence sets along cube patterns and their
//! syndetic gaps.
//!
//! Lattice points of `∏ Z_{N_i}` are stored in mixed radix with the first
//! coordinate varying fastest.

use bitvec::prelude::*;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::averages::integrated_cube_limit;
use crate::error::{Error, Result};
use crate::parallel::Exec;
use crate::rational::{self, Rational, Scaled};
use crate::system::{EpsilonIndex, Observable, ProbabilitySpace, System, Transformation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSubset {
    moduli: Vec<usize>,
    members: BitVec,
}

impl LatticeSubset {
    pub fn empty(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::NoTransformations);
        }
        if let Some(axis) = moduli.iter().position(|&n| n == 0) {
            return Err(Error::EmptyBox {
                axis: axis + 1,
                start: 0,
                end: 0,
            });
        }
        let size = moduli
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Parse("window size overflows".into()))?;
        Ok(Self {
            members: bitvec![0; size],
            moduli,
        })
    }

    /// Builds a subset from lattice points; coordinates must lie in
    /// `0..N_i`.
    pub fn new(moduli: Vec<usize>, points: &[Vec<usize>]) -> Result<Self> {
        let mut s = Self::empty(moduli)?;
        for p in points {
            let k = s.encode(p)?;
            s.members.set(k, true);
        }
        Ok(s)
    }

    pub fn full(moduli: Vec<usize>) -> Result<Self> {
        let mut s = Self::empty(moduli)?;
        s.members.fill(true);
        Ok(s)
    }

    pub fn dims(&self) -> usize {
        self.moduli.len()
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    /// `∏ N_i`.
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn count(&self) -> usize {
        self.members.count_ones()
    }

    pub fn contains_index(&self, k: usize) -> bool {
        self.members[k]
    }

    pub fn contains(&self, p: &[usize]) -> bool {
        self.encode(p).map(|k| self.members[k]).unwrap_or(false)
    }

    pub fn encode(&self, p: &[usize]) -> Result<usize> {
        if p.len() != self.dims() {
            return Err(Error::LengthMismatch {
                expected: self.dims(),
                got: p.len(),
            });
        }
        let mut k = 0;
        for (i, (&x, &n)) in p.iter().zip(&self.moduli).enumerate().rev() {
            if x >= n {
                return Err(Error::Parse(format!("coordinate {} of {p:?} is outside 0..{n}", i + 1)));
            }
            k = k * n + x;
        }
        Ok(k)
    }

    pub fn decode(&self, k: usize) -> Vec<usize> {
        decode(&self.moduli, k)
    }

    /// Member points in index order.
    pub fn points(&self) -> Vec<Vec<usize>> {
        self.members.iter_ones().map(|k| self.decode(k)).collect()
    }
}

fn decode(moduli: &[usize], mut k: usize) -> Vec<usize> {
    moduli
        .iter()
        .map(|&n| {
            let x = k % n;
            k /= n;
            x
        })
        .collect()
}

/// `|A| / ∏ N_i`.
pub fn upper_density_window(a: &LatticeSubset) -> Rational {
    Rational::new(BigInt::from(a.count()), BigInt::from(a.size()))
}

/// `∏ Z_{N_i}` with uniform weights and the coordinate shifts
/// `x ↦ x + e_i`, together with the indicator of `A`.
pub fn cyclic_correspondence(a: &LatticeSubset) -> (System, Observable) {
    let moduli = a.moduli();
    let size = a.size();
    let labels = (0..size)
        .map(|k| {
            let p = a.decode(k);
            let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let space = ProbabilitySpace::with_labels(labels, vec![rational::ratio(1, size as i64); size])
        .expect("uniform weights sum to one");
    let mut stride = 1;
    let mut ts = Vec::with_capacity(moduli.len());
    for (i, &n) in moduli.iter().enumerate() {
        let image = (0..size)
            .map(|k| {
                let x = (k / stride) % n;
                if x + 1 == n {
                    k - x * stride
                } else {
                    k + stride
                }
            })
            .collect();
        ts.push(Transformation::new(format!("T{}", i + 1), image).expect("shifts are bijections"));
        stride *= n;
    }
    let system = System::new(space, ts, true).expect("coordinate shifts commute and preserve counting measure");
    let indicator = Observable::indicator(size, a.members.iter_ones());
    (system, indicator)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    /// `μ(A)^{2^d} − c`.
    #[serde(with = "rational::serde_str")]
    pub threshold: Rational,
    /// `(L_1, …, L_d)`: the scanned period box `∏ Z_{L_i}`.
    pub period: Vec<u64>,
    pub good_set: Vec<Vec<u64>>,
    /// Smallest `R` such that every `R`-cube of the period torus contains a
    /// good shift; `None` when the good set is empty.
    pub syndetic_gap: Option<u64>,
}

fn check_recurrence_input(system: &System, a: &Observable) -> Result<()> {
    a.check_indicator()?;
    if a.len() != system.len() {
        return Err(Error::LengthMismatch {
            expected: system.len(),
            got: a.len(),
        });
    }
    system.require_commuting()
}

/// `μ(⋂_ε T_ε^{-n} A)` for every `n` of the period box, in mixed-radix order
/// (first coordinate fastest).
pub fn intersection_measures(system: &System, a: &Observable, exec: Exec) -> Result<Vec<Rational>> {
    check_recurrence_input(system, a)?;
    let period: Vec<usize> = system.orders().into_iter().map(|l| l as usize).collect();
    let total: usize = period.iter().product();
    let member: Vec<bool> = a.values().iter().map(|v| !v.is_zero()).collect();
    let scaled = Scaled::new(system.space().weights());
    let vertices: Vec<EpsilonIndex> = EpsilonIndex::all(system.dim()).collect();
    let sums = exec.map_indexed(0..total, |k| {
        let n: Vec<i64> = decode(&period, k).into_iter().map(|x| x as i64).collect();
        let mut sum = BigInt::zero();
        for x in 0..system.len() {
            if vertices.iter().all(|&e| member[system.apply_power(x, &n, e)]) {
                sum += &scaled.nums[x];
            }
        }
        sum
    });
    Ok(sums
        .into_iter()
        .map(|s| Rational::new(s, scaled.den.clone()))
        .collect())
}

/// The shifts `n` with `μ(⋂_ε T_ε^{-n} A) ≥ μ(A)^{2^d} − c`, and their
/// syndetic gap on the period torus.
pub fn recurrence_set(system: &System, a: &Observable, c: &Rational, exec: Exec) -> Result<RecurrenceReport> {
    if c.is_negative() {
        return Err(Error::Parse(format!("c = {} must be nonnegative", rational::format(c))));
    }
    let measures = intersection_measures(system, a, exec)?;
    let mu_a = system.space().integrate(a);
    let threshold = rational::pow(&mu_a, 1 << system.dim()) - c;
    let period: Vec<usize> = system.orders().into_iter().map(|l| l as usize).collect();
    let good: Vec<bool> = measures.iter().map(|m| *m >= threshold).collect();
    let good_set = good
        .iter()
        .enumerate()
        .filter(|(_, g)| **g)
        .map(|(k, _)| decode(&period, k).into_iter().map(|x| x as u64).collect())
        .collect();
    Ok(RecurrenceReport {
        threshold,
        period: period.iter().map(|&l| l as u64).collect(),
        good_set,
        syndetic_gap: syndetic_gap(&period, &good),
    })
}

/// Whether every `r`-cube (clamped to the axis length) of the torus
/// `∏ Z_{L_i}` meets `good`: dilate `good` by `r − 1` steps along every axis
/// and test for full coverage.
fn covers(period: &[usize], good: &[bool], r: usize) -> bool {
    let mut cur = good.to_vec();
    let mut stride = 1;
    for &l in period {
        let side = r.min(l);
        let mut next = vec![false; cur.len()];
        for (k, slot) in next.iter_mut().enumerate() {
            let x = (k / stride) % l;
            let base = k - x * stride;
            *slot = (0..side).any(|j| cur[base + ((x + j) % l) * stride]);
        }
        cur = next;
        stride *= l;
    }
    cur.into_iter().all(|b| b)
}

fn syndetic_gap(period: &[usize], good: &[bool]) -> Option<u64> {
    if !good.iter().any(|&g| g) {
        return None;
    }
    // Coverage is monotone in r and holds at r = max L_i.
    let (mut lo, mut hi) = (1, period.iter().copied().max().unwrap_or(1));
    while lo < hi {
        let mid = (lo + hi) / 2;
        if covers(period, good, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageRecurrence {
    #[serde(with = "rational::serde_str")]
    pub limit: Rational,
    /// `μ(A)^{2^d}`.
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub holds: bool,
}

pub fn average_recurrence_check(system: &System, a: &Observable, exec: Exec) -> Result<AverageRecurrence> {
    check_recurrence_input(system, a)?;
    let limit = integrated_cube_limit(system, a, exec)?;
    let bound = rational::pow(&system.space().integrate(a), 1 << system.dim());
    Ok(AverageRecurrence {
        holds: limit >= bound,
        limit,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn z4_example() -> (System, Observable) {
        let a = LatticeSubset::new(vec![4], &[vec![0], vec![2]]).unwrap();
        cyclic_correspondence(&a)
    }

    #[test]
    fn density_examples() {
        assert_eq!(upper_density_window(&LatticeSubset::full(vec![3, 2]).unwrap()), int(1));
        assert_eq!(upper_density_window(&LatticeSubset::empty(vec![5]).unwrap()), int(0));
        let evens: Vec<Vec<usize>> = (0..10).step_by(2).map(|x| vec![x]).collect();
        assert_eq!(upper_density_window(&LatticeSubset::new(vec![10], &evens).unwrap()), ratio(1, 2));
        assert!(LatticeSubset::new(vec![3], &[vec![3]]).is_err());
    }

    #[test]
    fn encoding_round_trips() {
        let s = LatticeSubset::new(vec![2, 3], &[vec![1, 2], vec![0, 1]]).unwrap();
        assert_eq!(s.encode(&[1, 2]).unwrap(), 5);
        assert_eq!(s.points(), vec![vec![0, 1], vec![1, 2]]);
        assert!(s.contains(&[1, 2]) && !s.contains(&[1, 1]));
    }

    #[test]
    fn correspondence_examples() {
        let (s, f) = cyclic_correspondence(&LatticeSubset::new(vec![3], &[vec![0]]).unwrap());
        assert_eq!(s.transformation(1).image(), &[1, 2, 0]);
        assert_eq!(s.space().integrate(&f), ratio(1, 3));

        let row = LatticeSubset::new(vec![2, 3], &[vec![0, 1], vec![1, 1]]).unwrap();
        let (s, f) = cyclic_correspondence(&row);
        assert!(s.is_commuting());
        assert_eq!(s.orders(), vec![2, 3]);
        assert_eq!(s.space().integrate(&f), upper_density_window(&row));
        assert_eq!(s.space().label(5), "(1,2)");
        // Row y = 1: the pattern survives iff n_2 ≡ 0 (mod 3), whatever n_1.
        let m = intersection_measures(&s, &f, Exec::Sequential).unwrap();
        let expected: Vec<Rational> = (0..6)
            .map(|k| if k / 2 == 0 { ratio(1, 3) } else { int(0) })
            .collect();
        assert_eq!(m, expected);
    }

    #[test]
    fn z4_recurrence() {
        let (s, a) = z4_example();
        let m = intersection_measures(&s, &a, Exec::Sequential).unwrap();
        assert_eq!(m, vec![ratio(1, 2), int(0), ratio(1, 2), int(0)]);
        let rep = recurrence_set(&s, &a, &int(0), Exec::Sequential).unwrap();
        assert_eq!(rep.threshold, ratio(1, 4));
        assert_eq!(rep.good_set, vec![vec![0], vec![2]]);
        assert_eq!(rep.syndetic_gap, Some(2));

        let all = recurrence_set(&s, &a, &ratio(1, 4), Exec::Sequential).unwrap();
        assert_eq!(all.good_set.len(), 4);
        assert_eq!(all.syndetic_gap, Some(1));

        let avg = average_recurrence_check(&s, &a, Exec::Sequential).unwrap();
        assert_eq!((avg.limit, avg.bound), (ratio(1, 4), ratio(1, 4)));
    }

    #[test]
    fn trivial_sets() {
        let (s, x) = cyclic_correspondence(&LatticeSubset::full(vec![3, 2]).unwrap());
        let rep = recurrence_set(&s, &x, &int(0), Exec::Sequential).unwrap();
        assert_eq!(rep.good_set.len(), 6);
        let avg = average_recurrence_check(&s, &x, Exec::Sequential).unwrap();
        assert_eq!((avg.limit, avg.bound), (int(1), int(1)));

        let (s, e) = cyclic_correspondence(&LatticeSubset::empty(vec![3, 2]).unwrap());
        let avg = average_recurrence_check(&s, &e, Exec::Sequential).unwrap();
        assert_eq!((avg.limit, avg.bound), (int(0), int(0)));
    }

    #[test]
    fn rejects_non_indicator() {
        let (s, _) = z4_example();
        let f = Observable::from_ints(&[0, 2, 0, 0]);
        assert!(matches!(
            recurrence_set(&s, &f, &int(0), Exec::Sequential),
            Err(Error::NotIndicator { .. })
        ));
    }

    #[test]
    fn gap_on_two_dimensional_torus() {
        // Good set {(0,0)} on Z_3 × Z_2: a 3-cube clamps to the whole torus.
        let good = [true, false, false, false, false, false];
        assert_eq!(syndetic_gap(&[3, 2], &good), Some(3));
        let diag = [true, false, false, false, true, false];
        assert!(!covers(&[3, 2], &diag, 1));
        assert_eq!(syndetic_gap(&[3, 2], &diag), Some(2));
        assert_eq!(syndetic_gap(&[3, 2], &[false; 6]), None);
    }

    #[test]
    fn parallel_matches_sequential() {
        let a = LatticeSubset::new(vec![4, 3], &[vec![0, 0], vec![1, 2], vec![3, 1], vec![2, 2]]).unwrap();
        let (s, f) = cyclic_correspondence(&a);
        assert_eq!(
            recurrence_set(&s, &f, &ratio(1, 50), Exec::Sequential).unwrap(),
            recurrence_set(&s, &f, &ratio(1, 50), Exec::Parallel).unwrap()
        );
    }
}
