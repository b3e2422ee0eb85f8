//! Library results against literal brute-force evaluations written from the
//! definitions, with no shared code beyond the input types.

use std::collections::BTreeMap;

use cubeavg::averages::{cube_average, cube_limit, integrated_cube_limit, CubeSpec, Interval};
use cubeavg::combinatorics::intersection_measures;
use cubeavg::conditional::{conditional_expectation, invariant_partition};
use cubeavg::magic::build_magic;
use cubeavg::measure::{build_mu_star, seminorm_power_direct, seminorm_power_recursive, MeasureOptions};
use cubeavg::random::{random_instance, InstanceBounds};
use cubeavg::rational::Rational;
use cubeavg::system::{EpsilonIndex, Observable, System};
use cubeavg::Exec;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn opts() -> MeasureOptions {
    MeasureOptions {
        exec: Exec::Sequential,
        ..MeasureOptions::default()
    }
}

/// `T_i^n x` by repeated application, reducing `n` modulo the period of `x`.
fn step(system: &System, i: usize, x: usize, n: i64) -> usize {
    let image = system.transformation(i).image();
    let mut period = 1;
    let mut y = image[x];
    while y != x {
        y = image[y];
        period += 1;
    }
    let mut y = x;
    for _ in 0..n.rem_euclid(period) {
        y = image[y];
    }
    y
}

fn shift(system: &System, x: usize, n: &[i64], eps: u32) -> usize {
    let mut y = x;
    for i in (1..=system.dim()).rev() {
        if eps >> (i - 1) & 1 == 1 {
            y = step(system, i, y, n[i - 1]);
        }
    }
    y
}

fn orbit_of(image: &[usize], x: usize) -> Vec<usize> {
    let mut out = vec![x];
    let mut y = image[x];
    while y != x {
        out.push(y);
        y = image[y];
    }
    out.sort_unstable();
    out
}

/// `μ_k = μ_{k-1} ×_{I(T^△)} μ_{k-1}` by testing every pair of support
/// tuples for lying on one diagonal orbit.
fn brute_mu_star(system: &System, order: &[usize]) -> BTreeMap<Vec<usize>, Rational> {
    let mut level: BTreeMap<Vec<usize>, Rational> = (0..system.len())
        .map(|x| (vec![x], system.space().weight(x).clone()))
        .collect();
    for &i in order {
        let diag = |t: &Vec<usize>| -> Vec<usize> { t.iter().map(|&x| step(system, i, x, 1)).collect() };
        let orbit = |t: &Vec<usize>| -> Vec<Vec<usize>> {
            let mut out = vec![t.clone()];
            let mut y = diag(t);
            while &y != t {
                out.push(y.clone());
                y = diag(&y);
            }
            out
        };
        let mut next = BTreeMap::new();
        for (a, wa) in &level {
            let cell = orbit(a);
            let mass: Rational = cell.iter().filter_map(|t| level.get(t)).sum();
            for (b, wb) in &level {
                if cell.contains(b) {
                    let mut t = a.clone();
                    t.extend(b);
                    next.insert(t, wa * wb / &mass);
                }
            }
        }
        level = next;
    }
    level
}

fn brute_seminorm(system: &System, f: &Observable, order: &[usize]) -> Rational {
    brute_mu_star(system, order)
        .iter()
        .map(|(t, w)| t.iter().fold(w.clone(), |acc, &x| acc * f.value(x)))
        .sum()
}

fn brute_average(system: &System, functions: &BTreeMap<EpsilonIndex, Observable>, bx: &[Interval]) -> Vec<Rational> {
    let d = system.dim();
    let mut shifts: Vec<Vec<i64>> = vec![vec![]];
    for iv in bx {
        shifts = shifts
            .into_iter()
            .flat_map(|p| {
                (iv.start..iv.end).map(move |n| {
                    let mut q = p.clone();
                    q.push(n);
                    q
                })
            })
            .collect();
    }
    let volume = Rational::from_integer((shifts.len() as i64).into());
    (0..system.len())
        .map(|x| {
            let sum: Rational = shifts
                .iter()
                .map(|n| {
                    functions
                        .iter()
                        .filter(|(e, _)| e.fits(d))
                        .map(|(e, f)| f.value(shift(system, x, n, e.bits())).clone())
                        .fold(Rational::one(), |a, b| a * b)
                })
                .sum();
            sum / &volume
        })
        .collect()
}

fn brute_conditional(system: &System, f: &Observable, i: usize) -> Vec<Rational> {
    let image = system.transformation(i).image();
    (0..system.len())
        .map(|x| {
            let orbit = orbit_of(image, x);
            let mass: Rational = orbit.iter().map(|&y| system.space().weight(y) * f.value(y)).sum();
            let w: Rational = orbit.iter().map(|&y| system.space().weight(y).clone()).sum();
            mass / w
        })
        .collect()
}

fn brute_intersection(system: &System, a: &Observable, n: &[i64]) -> Rational {
    let d = system.dim();
    (0..system.len())
        .filter(|&x| (0..1u32 << d).all(|e| !a.value(shift(system, x, n, e)).is_zero()))
        .map(|x| system.space().weight(x).clone())
        .sum()
}

fn small(seed: u64, points: usize, max_dim: usize) -> cubeavg::random::Instance {
    let bounds = InstanceBounds::default()
        .with_points(points)
        .with_dims(1, max_dim)
        .weighted(seed % 3 == 0);
    random_instance(seed, &bounds)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mu_star_matches_definition(seed in any::<u64>(), big in any::<bool>()) {
        let inst = if big { small(seed, 4, 3) } else { small(seed, 6, 2) };
        let s = &inst.system;
        let d = s.dim();
        let order: Vec<usize> = (1..=d).collect();
        let lib = build_mu_star(s, EpsilonIndex::full(d), &opts()).unwrap();
        let got: BTreeMap<Vec<usize>, Rational> = lib
            .iter()
            .map(|(t, w)| (t.iter().map(|&x| x as usize).collect(), w.clone()))
            .collect();
        prop_assert_eq!(got, brute_mu_star(s, &order));
    }

    #[test]
    fn seminorms_match_definition(seed in any::<u64>()) {
        let inst = small(seed, 5, 3);
        let s = &inst.system;
        for (e, f) in &inst.functions {
            let order = e.members();
            let expected = brute_seminorm(s, f, &order);
            prop_assert_eq!(&seminorm_power_direct(s, f, &order, &opts()).unwrap(), &expected);
            prop_assert_eq!(&seminorm_power_recursive(s, f, &order, &opts()).unwrap(), &expected);
        }
    }

    #[test]
    fn box_averages_match_literal_sum(
        seed in any::<u64>(),
        starts in proptest::collection::vec(-7i64..7, 3),
        lens in proptest::collection::vec(1i64..6, 3),
    ) {
        let inst = small(seed, 6, 3);
        let s = &inst.system;
        let bx: Vec<Interval> = (0..s.dim()).map(|i| Interval::new(starts[i], starts[i] + lens[i])).collect();
        let spec = CubeSpec::new(inst.functions.clone());
        for exec in [Exec::Sequential, Exec::Parallel] {
            let got = cube_average(s, &spec, &bx, exec).unwrap();
            prop_assert_eq!(got.average.values(), &brute_average(s, &inst.functions, &bx)[..]);
        }
    }

    #[test]
    fn limit_is_period_average(seed in any::<u64>()) {
        let inst = small(seed, 6, 2);
        let s = &inst.system;
        let period: Vec<Interval> = s.orders().iter().map(|&l| Interval::new(0, l as i64)).collect();
        let spec = CubeSpec::new(inst.functions.clone());
        let limit = cube_limit(s, &spec, Exec::Sequential).unwrap();
        prop_assert_eq!(limit.average.values(), &brute_average(s, &inst.functions, &period)[..]);
    }

    #[test]
    fn conditional_expectation_matches_orbit_average(seed in any::<u64>()) {
        let inst = small(seed, 8, 3);
        let s = &inst.system;
        let f = inst.functions.values().next().unwrap();
        for i in 1..=s.dim() {
            let lib = conditional_expectation(s.space(), f, &invariant_partition(s.space(), s.transformation(i)));
            prop_assert_eq!(lib.values(), &brute_conditional(s, f, i)[..]);
        }
    }

    #[test]
    fn intersection_measures_match(seed in any::<u64>()) {
        let inst = small(seed, 8, 3);
        let s = &inst.system;
        let orders = s.orders();
        let lib = intersection_measures(s, &inst.set, Exec::Parallel).unwrap();
        let mut k = 0;
        let mut total = Rational::zero();
        let mut n = vec![0i64; s.dim()];
        loop {
            let m = brute_intersection(s, &inst.set, &n);
            prop_assert_eq!(&lib[k], &m);
            total += m;
            k += 1;
            // mixed-radix increment, first coordinate fastest
            let mut i = 0;
            while i < n.len() {
                n[i] += 1;
                if n[i] < orders[i] as i64 {
                    break;
                }
                n[i] = 0;
                i += 1;
            }
            if i == n.len() {
                break;
            }
        }
        let mean = total / Rational::from_integer((k as i64).into());
        prop_assert_eq!(integrated_cube_limit(s, &inst.set, Exec::Sequential).unwrap(), mean);
    }

    #[test]
    fn star_transformations_match_definition(seed in any::<u64>()) {
        let inst = small(seed, 4, 2);
        let s = &inst.system;
        let ms = build_magic(s, &opts()).unwrap();
        let mu = ms.mu_star();
        for i in 1..=s.dim() {
            let side = ms.star().transformation(i);
            for k in 0..ms.len() {
                let x = mu.tuple(k);
                let expected: Vec<u32> = x
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| if c >> (i - 1) & 1 == 0 { step(s, i, v as usize, 1) as u32 } else { v })
                    .collect();
                prop_assert_eq!(mu.tuple(side.apply(k)), &expected[..]);
                prop_assert_eq!(mu.weight(side.apply(k)), mu.weight(k));
            }
        }
    }
}
