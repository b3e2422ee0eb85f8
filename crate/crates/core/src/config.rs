//! File formats: systems, observables, cube specifications and lattice
//! subsets. Files ending in `.toml` are read as TOML, everything else as
//! JSON. Rationals are written as `"p/q"` strings; integers are accepted.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::averages::{CubeBox, CubeSpec, Interval};
use crate::combinatorics::LatticeSubset;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::system::{validate_system, EpsilonIndex, Observable, System};

/// A point label; JSON configs may use bare integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Str(String),
}

impl Label {
    pub fn as_string(&self) -> String {
        match self {
            Label::Int(n) => n.to_string(),
            Label::Str(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformationConfig {
    pub name: String,
    /// Image of each point, by label, in point order.
    pub image: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub points: Vec<Label>,
    #[serde(with = "rational::serde_vec")]
    pub weights: Vec<Rational>,
    pub transformations: Vec<TransformationConfig>,
    #[serde(default = "default_true")]
    pub require_commuting: bool,
}

fn default_true() -> bool {
    true
}

impl SystemConfig {
    pub fn build(&self) -> Result<System> {
        let labels: Vec<String> = self.points.iter().map(Label::as_string).collect();
        let mut position = HashMap::with_capacity(labels.len());
        for (x, l) in labels.iter().enumerate() {
            if position.insert(l.as_str(), x).is_some() {
                return Err(Error::Parse(format!("duplicate point label {l:?}")));
            }
        }
        let ts = self
            .transformations
            .iter()
            .map(|t| {
                let image = t
                    .image
                    .iter()
                    .map(|l| {
                        let l = l.as_string();
                        position
                            .get(l.as_str())
                            .copied()
                            .ok_or_else(|| Error::Parse(format!("{}: unknown point label {l:?}", t.name)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((t.name.clone(), image))
            })
            .collect::<Result<Vec<_>>>()?;
        validate_system(labels, self.weights.clone(), ts, self.require_commuting)
    }

    /// The config that rebuilds `system`.
    pub fn from_system(system: &System) -> Self {
        let labels = system.space().labels();
        Self {
            points: labels.iter().cloned().map(Label::Str).collect(),
            weights: system.space().weights().to_vec(),
            transformations: system
                .transformations()
                .iter()
                .map(|t| TransformationConfig {
                    name: t.name().to_string(),
                    image: t.image().iter().map(|&y| Label::Str(labels[y].clone())).collect(),
                })
                .collect(),
            require_commuting: system.is_commuting(),
        }
    }
}

/// Either a bare list of values or `{ "values": [...] }`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FunctionFile {
    Bare(#[serde(with = "rational::serde_vec")] Vec<Rational>),
    Wrapped {
        #[serde(with = "rational::serde_vec")]
        values: Vec<Rational>,
    },
}

impl FunctionFile {
    pub fn into_values(self) -> Vec<Rational> {
        match self {
            FunctionFile::Bare(v) | FunctionFile::Wrapped { values: v } => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSpecFile {
    /// Path to a system config, relative to this file.
    pub system: String,
    /// Vertex digits (e.g. `"10"`) to function file paths.
    pub functions: BTreeMap<String, String>,
    #[serde(rename = "box", default)]
    pub bx: Option<Vec<[i64; 2]>>,
    #[serde(default)]
    pub rank_cap: Option<usize>,
}

/// A loaded cube specification: the system, its functions and the box.
#[derive(Debug, Clone)]
pub struct LoadedCubeSpec {
    pub system: System,
    pub spec: CubeSpec,
    pub bx: Option<CubeBox>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetFile {
    pub moduli: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl SubsetFile {
    pub fn build(&self) -> Result<LatticeSubset> {
        LatticeSubset::new(self.moduli.clone(), &self.members)
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn is_toml(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"))
}

/// Parses `text` as TOML or JSON depending on `path`'s extension.
pub fn parse_str<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    if is_toml(path) {
        toml::from_str(text).map_err(|e| Error::Parse(format!("{}: {}", path.display(), e.message())))
    } else {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_str(path, &text)
}

pub fn load_system(path: &Path) -> Result<System> {
    read_file::<SystemConfig>(path)?.build()
}

pub fn load_observable(path: &Path, system: &System) -> Result<Observable> {
    let values = read_file::<FunctionFile>(path)?.into_values();
    Observable::new(system.space(), values)
}

pub fn load_subset(path: &Path) -> Result<LatticeSubset> {
    read_file::<SubsetFile>(path)?.build()
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Loads a cube spec file together with the system and functions it names.
pub fn load_cube_spec(path: &Path) -> Result<LoadedCubeSpec> {
    let file: CubeSpecFile = read_file(path)?;
    let system = load_system(&resolve(path, &file.system))?;
    let d = system.dim();
    let mut functions = BTreeMap::new();
    for (digits, fpath) in &file.functions {
        if digits.len() != d {
            return Err(Error::BadEpsilon(format!("vertex {digits:?} does not have {d} digits")));
        }
        let eps = EpsilonIndex::parse_digits(digits)?;
        let f = load_observable(&resolve(path, fpath), &system)?;
        functions.insert(eps, f);
    }
    let mut spec = CubeSpec::new(functions);
    if let Some(r) = file.rank_cap {
        spec = spec.with_rank_cap(r);
    }
    let bx = match file.bx {
        None => None,
        Some(b) => {
            if b.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: b.len(),
                });
            }
            Some(b.into_iter().map(|[s, e]| Interval::new(s, e)).collect())
        }
    };
    Ok(LoadedCubeSpec { system, spec, bx })
}
