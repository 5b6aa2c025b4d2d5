//! Information erasure with finite and infinite spin reservoirs.
//!
//! A memory spin is erased by repeatedly equilibrating it (together with a
//! growing block of CNOT-coupled ancillas) against a reservoir of spin-½
//! particles, exchanging z angular momentum instead of energy. The direct
//! cost of the CNOT steps is spinlabor, measured in units of ħ.
//!
//! * [`spin`]: polarisation, spin temperature and the initial reservoir.
//! * [`finite`]: exact joint reservoir–memory recurrences for `N` spins.
//! * [`infinite`]: the constant-temperature baseline and its closed form.
//! * [`stats`]: cost distributions, averages, bounds and ancilla reset.
//! * [`divergence`]: JSD matching of finite against infinite statistics.
//! * [`oracle`]: microstate enumeration and trajectory sampling for small `N`.
//! * [`exec`]: sequential or rayon-parallel evaluation of independent cells.

pub mod divergence;
pub mod error;
pub mod exec;
pub mod finite;
pub mod infinite;
pub mod oracle;
pub mod spin;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use finite::{ErasureTrace, FiniteEngine, JointDistribution};
pub use spin::{ReservoirDistribution, ReservoirSpec};
pub use stats::{CostSummary, SpinlaborDistribution};
