//! Exact multiple ergodic averages along cubes on finite measure-preserving
//! systems: cube averages and their limits, relative-product measures, box
//! seminorms, the magic extension and multiple recurrence along lattice shifts.

pub mod averages;
pub mod combinatorics;
pub mod conditional;
pub mod config;
pub mod error;
pub mod magic;
pub mod measure;
pub mod parallel;
pub mod random;
pub mod rational;
pub mod suite;
pub mod system;

pub use error::{Error, Result};
pub use parallel::Exec;
pub use rational::Rational;
