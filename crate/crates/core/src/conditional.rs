//! Finite σ-algebras represented by their atoms.
//!
//! A [`Partition`] is the atom partition of a σ-algebra on a finite space.
//! Conditional expectation is the weighted cell average, and the join of
//! σ-algebras is the common refinement of their atoms.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::system::{Observable, ProbabilitySpace, Transformation};

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = x;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cell_of: Vec<usize>,
    cells: Vec<Vec<usize>>,
    cell_weight: Vec<Rational>,
}

impl Partition {
    /// Groups points by an arbitrary key. Cells are numbered in order of
    /// their smallest member and each cell lists its members ascending.
    pub fn from_keys<K: std::hash::Hash + Eq>(
        space: &ProbabilitySpace,
        keys: impl IntoIterator<Item = K>,
    ) -> Self {
        Self::from_weighted_keys(space.weights(), keys)
    }

    /// As [`Partition::from_keys`], for point weights held outside a
    /// [`ProbabilitySpace`] (e.g. the support of a sparse measure).
    pub fn from_weighted_keys<K: std::hash::Hash + Eq>(
        weights: &[Rational],
        keys: impl IntoIterator<Item = K>,
    ) -> Self {
        let mut id_of_key: HashMap<K, usize> = HashMap::new();
        let mut cell_of = Vec::with_capacity(weights.len());
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for (x, k) in keys.into_iter().enumerate() {
            let next = cells.len();
            let id = *id_of_key.entry(k).or_insert(next);
            if id == next {
                cells.push(Vec::new());
            }
            cells[id].push(x);
            cell_of.push(id);
        }
        assert_eq!(cell_of.len(), weights.len(), "one key per point");
        // Scanning x upward already numbers cells by smallest member.
        let cell_weight = cells
            .iter()
            .map(|c| c.iter().map(|&x| &weights[x]).sum())
            .collect();
        Self {
            cell_of,
            cells,
            cell_weight,
        }
    }

    pub fn trivial(space: &ProbabilitySpace) -> Self {
        Self::from_keys(space, std::iter::repeat_n(0u8, space.len()))
    }

    pub fn singletons(space: &ProbabilitySpace) -> Self {
        Self::from_keys(space, 0..space.len())
    }

    pub fn num_points(&self) -> usize {
        self.cell_of.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, x: usize) -> usize {
        self.cell_of[x]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_weight(&self, c: usize) -> &Rational {
        &self.cell_weight[c]
    }

    pub fn cell_weights(&self) -> &[Rational] {
        &self.cell_weight
    }

    /// Whether every cell of `self` sits inside a cell of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.cells
            .iter()
            .all(|c| c.iter().all(|&x| other.cell_of(x) == other.cell_of(c[0])))
    }

    /// Whether `f` is constant on every cell.
    pub fn is_measurable(&self, f: &Observable) -> bool {
        self.cells
            .iter()
            .all(|c| c.iter().all(|&x| f.value(x) == f.value(c[0])))
    }
}

/// Atoms of `I(T)`: the orbits of `T`.
pub fn invariant_partition(space: &ProbabilitySpace, t: &Transformation) -> Partition {
    group_orbit_partition(space, &[t])
}

/// Orbits of the group generated by `ts`. These are the atoms of the sets
/// invariant under every `T` at once (the meet of the `I(T)`), not the join.
pub fn group_orbit_partition(space: &ProbabilitySpace, ts: &[&Transformation]) -> Partition {
    let mut uf = UnionFind::new(space.len());
    for t in ts {
        assert_eq!(space.len(), t.len(), "transformation acts on another space");
        for x in 0..space.len() {
            uf.union(x, t.apply(x));
        }
    }
    let roots: Vec<usize> = (0..space.len()).map(|x| uf.find(x)).collect();
    Partition::from_keys(space, roots)
}

/// Common refinement: atoms are the nonempty intersections of one cell from
/// each input. With no inputs this is the trivial partition.
pub fn join_partitions(space: &ProbabilitySpace, parts: &[&Partition]) -> Result<Partition> {
    for p in parts {
        if p.num_points() != space.len() {
            return Err(Error::MismatchedSpace(space.len(), p.num_points()));
        }
    }
    let keys = (0..space.len()).map(|x| parts.iter().map(|p| p.cell_of(x)).collect::<Vec<_>>());
    Ok(Partition::from_keys(space, keys))
}

fn cell_masses(space: &ProbabilitySpace, f: &Observable, p: &Partition) -> Vec<Rational> {
    p.cells()
        .iter()
        .map(|cell| cell.iter().map(|&x| space.weight(x) * f.value(x)).sum())
        .collect()
}

/// `E(f | P)`: on each cell, the weighted average of `f` over the cell.
pub fn conditional_expectation(space: &ProbabilitySpace, f: &Observable, p: &Partition) -> Observable {
    assert_eq!(f.len(), p.num_points(), "observable lives on another space");
    let means: Vec<Rational> = cell_masses(space, f, p)
        .into_iter()
        .zip(p.cell_weights())
        .map(|(mass, w)| mass / w)
        .collect();
    Observable::from_values((0..f.len()).map(|x| means[p.cell_of(x)].clone()).collect())
}

/// `∫ f dμ`.
pub fn integrate(space: &ProbabilitySpace, f: &Observable) -> Rational {
    space.integrate(f)
}

/// `∫ E(f|P)² dμ`, computed as `Σ_cells (Σ_{x∈cell} w(x) f(x))² / W(cell)`.
pub fn projection_norm2_squared(space: &ProbabilitySpace, f: &Observable, p: &Partition) -> Rational {
    cell_masses(space, f, p)
        .into_iter()
        .zip(p.cell_weights())
        .filter(|(mass, _)| !mass.is_zero())
        .map(|(mass, w)| &mass * &mass / w)
        .sum()
}
