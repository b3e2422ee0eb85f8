//! The magic extension `(X*, μ*, T_1*, …, T_d*)`.
//!
//! `X*` is materialized as the support of `μ*`. The side transformation
//! `T_i*` applies `T_i` to every cube coordinate `ε` with `ε_i = 0` and fixes
//! the coordinates with `ε_i = 1`. The factor map onto `X` is the projection
//! onto the `∅` coordinate, the only coordinate on which every `T_i*` acts
//! as `T_i`.

use num_traits::Zero;
use serde::Serialize;

use crate::averages::{cube_average, cube_limit, CubeResult, CubeSpec, Interval};
use crate::conditional::{conditional_expectation, invariant_partition, join_partitions, projection_norm2_squared, Partition};
use crate::error::{Error, Result};
use crate::measure::{build_mu_star, MeasureOptions, RecursivePlan, SparseMeasure};
use crate::rational::{self, Rational};
use crate::system::{EpsilonIndex, Observable, ProbabilitySpace, System, Transformation};

#[derive(Debug, Clone)]
pub struct MagicSystem {
    base: System,
    mu_star: SparseMeasure,
    star: System,
}

/// Builds the magic extension of a commuting system.
pub fn build_magic(system: &System, opts: &MeasureOptions) -> Result<MagicSystem> {
    system.require_commuting()?;
    let d = system.dim();
    let mu_star = build_mu_star(system, EpsilonIndex::full(d), opts)?;
    let index = mu_star.index();
    let mut sides = Vec::with_capacity(d);
    for i in 1..=d {
        let t = system.transformation(i);
        let bit = 1usize << (i - 1);
        let mut image = Vec::with_capacity(mu_star.len());
        let mut y = vec![0u32; mu_star.width()];
        for k in 0..mu_star.len() {
            let x = mu_star.tuple(k);
            for (c, slot) in y.iter_mut().enumerate() {
                *slot = if c & bit == 0 {
                    t.apply(x[c] as usize) as u32
                } else {
                    x[c]
                };
            }
            let j = index.get(y.as_slice()).copied().ok_or_else(|| {
                Error::HypothesisViolated(format!("T_{i}* moves support tuple {x:?} off the support of μ*"))
            })?;
            image.push(j);
        }
        sides.push(Transformation::new(format!("T{i}*"), image)?);
    }
    let star_space: ProbabilitySpace = mu_star.as_space();
    let star = System::new(star_space, sides, true)?;
    Ok(MagicSystem { base: system.clone(), mu_star, star })
}

impl MagicSystem {
    pub fn base(&self) -> &System {
        &self.base
    }

    pub fn mu_star(&self) -> &SparseMeasure {
        &self.mu_star
    }

    /// `(X*, μ*, T_1*, …, T_d*)` as an ordinary system.
    pub fn star(&self) -> &System {
        &self.star
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Number of points of `X*` (support tuples of `μ*`).
    pub fn len(&self) -> usize {
        self.mu_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu_star.is_empty()
    }

    /// The base point in coordinate `ε` of each star point.
    pub fn coordinate(&self, eps: EpsilonIndex) -> Vec<usize> {
        let c = eps.bits() as usize;
        (0..self.len()).map(|k| self.mu_star.tuple(k)[c] as usize).collect()
    }

    /// `x ↦ f(x_ε)`.
    pub fn lift(&self, f: &Observable, eps: EpsilonIndex) -> Observable {
        Observable::from_values(
            self.coordinate(eps)
                .into_iter()
                .map(|x| f.value(x).clone())
                .collect(),
        )
    }

    /// Atoms of `Z*_ε = ⋁_{i∈ε} I(T_i*)`.
    pub fn z_partition(&self, eps: EpsilonIndex) -> Partition {
        let space = self.star.space();
        let parts: Vec<Partition> = eps
            .members()
            .into_iter()
            .map(|i| invariant_partition(space, self.star.transformation(i)))
            .collect();
        let refs: Vec<&Partition> = parts.iter().collect();
        join_partitions(space, &refs).expect("all partitions live on X*")
    }

    /// `f − E(f | Z*_ε)`.
    pub fn project_out(&self, f: &Observable, eps: EpsilonIndex) -> Observable {
        let p = self.z_partition(eps);
        f.sub(&conditional_expectation(self.star.space(), f, &p))
    }

    /// `⫴·⫴*_ε` on `X*`, always via the recursive integrator.
    pub fn star_plan(&self, eps: EpsilonIndex, opts: &MeasureOptions) -> Result<RecursivePlan> {
        if eps.is_empty() || !eps.fits(self.dim()) {
            return Err(Error::BadEpsilon(format!("{eps} is not a nonempty subset of [{}]", self.dim())));
        }
        RecursivePlan::new(&self.star, &eps.members(), opts)
    }
}

/// `(∫ E(f | ⋁ I(T_i*))² dμ*, ⫴f⫴*^{2^d})`; magic means the first vanishing
/// forces the second to vanish.
pub fn magic_defect(ms: &MagicSystem, f: &Observable, opts: &MeasureOptions) -> Result<(Rational, Rational)> {
    if f.len() != ms.len() {
        return Err(Error::LengthMismatch {
            expected: ms.len(),
            got: f.len(),
        });
    }
    let full = EpsilonIndex::full(ms.dim());
    let a = projection_norm2_squared(ms.star.space(), f, &ms.z_partition(full));
    let b = ms.star_plan(full, opts)?.power(f);
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterizationReport {
    pub epsilon: String,
    #[serde(with = "rational::serde_str")]
    pub projected_power: Rational,
    pub passed: bool,
}

/// Removes the `Z*_ε` component of `f` and checks that what is left has
/// vanishing `⫴·⫴*_ε`.
pub fn characterization_check(
    ms: &MagicSystem,
    eps: EpsilonIndex,
    f: &Observable,
    opts: &MeasureOptions,
) -> Result<CharacterizationReport> {
    let plan = ms.star_plan(eps, opts)?;
    let h = ms.project_out(f, eps);
    let power = plan.power(&h);
    Ok(CharacterizationReport {
        epsilon: eps.digits(ms.dim()),
        passed: power.is_zero(),
        projected_power: power,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningReport {
    pub epsilon: String,
    pub checked: usize,
    /// Star points whose projected indicator kept a nonzero seminorm.
    pub failures: Vec<usize>,
}

impl SpanningReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The characterization over the spanning family of point indicators of
/// `X*`: every `1_{x} − E(1_{x} | Z*_ε)` must have `⫴·⫴*_ε = 0`. With
/// `ε = [d]` this is the magic property itself.
pub fn spanning_check(ms: &MagicSystem, eps: EpsilonIndex, opts: &MeasureOptions) -> Result<SpanningReport> {
    let plan = ms.star_plan(eps, opts)?;
    let p = ms.z_partition(eps);
    let space = ms.star.space();
    let n = ms.len();
    let verdicts = opts.exec.map_indexed(0..n, |x| {
        let g = Observable::indicator(n, [x]);
        let h = g.sub(&conditional_expectation(space, &g, &p));
        plan.power(&h).is_zero()
    });
    Ok(SpanningReport {
        epsilon: eps.digits(ms.dim()),
        checked: n,
        failures: verdicts
            .into_iter()
            .enumerate()
            .filter(|(_, ok)| !ok)
            .map(|(x, _)| x)
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorReport {
    /// Coordinate used for the factor map (digits of `ε`).
    pub coordinate: String,
    pub pushforward_is_mu: bool,
    pub intertwines: bool,
    pub all_marginals_are_mu: bool,
}

impl FactorReport {
    pub fn passed(&self) -> bool {
        self.pushforward_is_mu && self.intertwines
    }
}

/// Checks that the `∅` coordinate is a factor map onto `(X, μ, T_1, …, T_d)`.
pub fn factor_check(ms: &MagicSystem) -> FactorReport {
    let d = ms.dim();
    let mu = ms.base.space().weights();
    let proj = ms.coordinate(EpsilonIndex::EMPTY);
    let pushforward_is_mu = ms.mu_star.marginal(0) == mu;
    let intertwines = (1..=d).all(|i| {
        let side = ms.star.transformation(i);
        let t = ms.base.transformation(i);
        (0..ms.len()).all(|k| proj[side.apply(k)] == t.apply(proj[k]))
    });
    let all_marginals_are_mu = (0..ms.mu_star.width()).all(|c| ms.mu_star.marginal(c) == mu);
    FactorReport {
        coordinate: EpsilonIndex::EMPTY.digits(d),
        pushforward_is_mu,
        intertwines,
        all_marginals_are_mu,
    }
}

/// The cube average of star functions over a box of `X*`.
pub fn star_cube_average(
    ms: &MagicSystem,
    spec: &CubeSpec,
    bx: &[Interval],
    opts: &MeasureOptions,
) -> Result<CubeResult> {
    cube_average(&ms.star, spec, bx, opts.exec)
}

pub fn star_cube_limit(ms: &MagicSystem, spec: &CubeSpec, opts: &MeasureOptions) -> Result<CubeResult> {
    cube_limit(&ms.star, spec, opts.exec)
}

/// For `ε = {d−r+1, …, d}`: builds `Y = supp μ_{d−r}` with `ν = μ_{d−r}` and
/// the diagonal actions `S_i` of `T_{d−r+i}`, takes the `μ*` of
/// `(Y, ν, S_1, …, S_r)` and flattens it back to `X^{2^d}`. Returns whether
/// it coincides with the `μ*` of the original system.
pub fn reduction_matches(system: &System, r: usize, opts: &MeasureOptions) -> Result<bool> {
    system.require_commuting()?;
    let d = system.dim();
    if r == 0 || r > d {
        return Err(Error::BadEpsilon(format!("r = {r} outside 1..={d}")));
    }
    let full = build_mu_star(system, EpsilonIndex::full(d), opts)?;
    let head: Vec<usize> = (1..=d - r).collect();
    let nu = if head.is_empty() {
        SparseMeasure::base(system.space())
    } else {
        crate::measure::build_levels(system, &head, opts.max_entries)?
            .pop()
            .expect("at least one level")
    };
    let sides = (d - r + 1..=d)
        .map(|i| {
            crate::measure::diagonal_transformation(system.transformation(i), nu.width())
                .restrict(&nu)
                .map(|t| t.renamed(format!("S{}", i - (d - r))))
        })
        .collect::<Result<Vec<_>>>()?;
    let y = System::new(nu.as_space(), sides, true)?;
    let y_star = build_mu_star(&y, EpsilonIndex::full(r), opts)?;
    let mut rows: Vec<(Vec<u32>, Rational)> = y_star
        .iter()
        .map(|(t, w)| {
            let flat = t.iter().flat_map(|&yi| nu.tuple(yi as usize).to_vec()).collect();
            (flat, w.clone())
        })
        .collect();
    rows.sort();
    let mine: Vec<(Vec<u32>, Rational)> = full.iter().map(|(t, w)| (t.to_vec(), w.clone())).collect();
    Ok(rows == mine)
}
