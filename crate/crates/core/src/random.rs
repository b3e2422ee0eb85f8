//! Seeded random commuting systems and observables.
//!
//! Systems are translations on a product grid `Z_{m_1} × ⋯ × Z_{m_k}`, which
//! commute by construction. The relabeled generator conjugates every
//! translation by one random permutation of the points, so the maps are no
//! longer literal rotations. Optionally the weights are randomized while
//! staying constant on the orbits of the generated group, which keeps every
//! map measure preserving.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditional::group_orbit_partition;
use crate::config::SystemConfig;
use crate::rational::{self, Rational};
use crate::system::{EpsilonIndex, Observable, ProbabilitySpace, System, Transformation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceBounds {
    pub max_points: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    /// Largest denominator of random observable values.
    pub max_denominator: i64,
    /// Draw non-uniform weights that are constant on group orbits.
    pub weighted: bool,
}

impl Default for InstanceBounds {
    fn default() -> Self {
        Self {
            max_points: 8,
            min_dim: 1,
            max_dim: 3,
            max_denominator: 4,
            weighted: false,
        }
    }
}

impl InstanceBounds {
    pub fn with_points(mut self, n: usize) -> Self {
        self.max_points = n;
        self
    }

    pub fn with_dims(mut self, min: usize, max: usize) -> Self {
        self.min_dim = min;
        self.max_dim = max;
        self
    }

    pub fn weighted(mut self, on: bool) -> Self {
        self.weighted = on;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Grid,
    Relabeled,
}

/// A random system with one function per nonempty vertex and a random set.
#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub generator: Generator,
    pub moduli: Vec<usize>,
    pub system: System,
    pub functions: BTreeMap<EpsilonIndex, Observable>,
    pub set: Observable,
}

/// Everything needed to replay an instance, in config-file form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRecord {
    pub seed: u64,
    pub generator: Generator,
    pub moduli: Vec<usize>,
    pub system: SystemConfig,
    pub functions: BTreeMap<String, Vec<String>>,
    pub set: Vec<String>,
}

impl Instance {
    pub fn record(&self) -> InstanceRecord {
        let d = self.system.dim();
        let strings = |f: &Observable| f.values().iter().map(rational::format).collect();
        InstanceRecord {
            seed: self.seed,
            generator: self.generator,
            moduli: self.moduli.clone(),
            system: SystemConfig::from_system(&self.system),
            functions: self
                .functions
                .iter()
                .map(|(e, f)| (e.digits(d), strings(f)))
                .collect(),
            set: strings(&self.set),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Grid factors `m_j ≥ 2` with `∏ m_j ≤ max_points`.
fn random_moduli(rng: &mut impl Rng, max_points: usize) -> Vec<usize> {
    let mut moduli = Vec::new();
    let mut total = 1;
    while total * 2 <= max_points && (moduli.is_empty() || rng.random_bool(0.5)) {
        let m = rng.random_range(2..=max_points / total);
        moduli.push(m);
        total *= m;
    }
    if moduli.is_empty() {
        moduli.push(1);
    }
    moduli
}

fn translation(moduli: &[usize], shift: &[usize]) -> Vec<usize> {
    let size: usize = moduli.iter().product();
    (0..size)
        .map(|mut k| {
            let mut out = 0;
            let mut stride = 1;
            for (&m, &s) in moduli.iter().zip(shift) {
                out += ((k % m + s) % m) * stride;
                k /= m;
                stride *= m;
            }
            out
        })
        .collect()
}

pub fn random_observable(rng: &mut impl Rng, n: usize, max_denominator: i64) -> Observable {
    Observable::from_values(
        (0..n)
            .map(|_| {
                let q = rng.random_range(1..=max_denominator.max(1));
                rational::ratio(rng.random_range(-q..=q), q)
            })
            .collect(),
    )
}

pub fn random_signs(rng: &mut impl Rng, n: usize) -> Observable {
    Observable::from_values(
        (0..n)
            .map(|_| rational::int(if rng.random_bool(0.5) { 1 } else { -1 }))
            .collect(),
    )
}

pub fn random_indicator(rng: &mut impl Rng, n: usize) -> Observable {
    Observable::indicator(n, (0..n).filter(|_| rng.random_bool(0.5)))
}

pub fn random_instance(seed: u64, bounds: &InstanceBounds) -> Instance {
    let mut rng = rng(seed);
    let moduli = random_moduli(&mut rng, bounds.max_points.max(1));
    let size: usize = moduli.iter().product();
    let d = rng.random_range(bounds.min_dim.max(1)..=bounds.max_dim.max(bounds.min_dim).max(1));
    let mut images: Vec<Vec<usize>> = (0..d)
        .map(|_| {
            let shift: Vec<usize> = moduli.iter().map(|&m| rng.random_range(0..m)).collect();
            translation(&moduli, &shift)
        })
        .collect();
    let generator = if rng.random_bool(0.5) {
        Generator::Relabeled
    } else {
        Generator::Grid
    };
    if generator == Generator::Relabeled {
        let mut pi: Vec<usize> = (0..size).collect();
        pi.shuffle(&mut rng);
        for image in &mut images {
            let mut conj = vec![0; size];
            for x in 0..size {
                conj[pi[x]] = pi[image[x]];
            }
            *image = conj;
        }
    }
    let ts: Vec<Transformation> = images
        .into_iter()
        .enumerate()
        .map(|(i, im)| Transformation::new(format!("T{}", i + 1), im).expect("translations are bijections"))
        .collect();
    let uniform = ProbabilitySpace::uniform(size);
    let space = if bounds.weighted {
        let refs: Vec<&Transformation> = ts.iter().collect();
        let orbits = group_orbit_partition(&uniform, &refs);
        let per_orbit: Vec<i64> = (0..orbits.num_cells()).map(|_| rng.random_range(1..=3)).collect();
        let total: i64 = (0..size).map(|x| per_orbit[orbits.cell_of(x)]).sum();
        let weights: Vec<Rational> = (0..size)
            .map(|x| rational::ratio(per_orbit[orbits.cell_of(x)], total))
            .collect();
        ProbabilitySpace::with_labels(uniform.labels().to_vec(), weights).expect("weights sum to one")
    } else {
        uniform
    };
    let system = System::new(space, ts, true).expect("translations commute and preserve orbit-constant weights");
    let functions = EpsilonIndex::nonempty(d)
        .map(|e| (e, random_observable(&mut rng, size, bounds.max_denominator)))
        .collect();
    let set = random_indicator(&mut rng, size);
    Instance {
        seed,
        generator,
        moduli,
        system,
        functions,
        set,
    }
}
