//! Simulation and experiment toolkit for lackadaisical quantum walk search on
//! hypercubes with several self-loops per vertex and an oracle that may
//! invert only some of them.
//!
//! * [`hypercube`]: vertex bitstrings, adjacency, marked-set sampling
//! * [`weights`]: self-loop weight schemes `l` and the split `l′ = l/m`
//! * [`walk`]: the structured state-vector kernel and walk runner
//! * [`dense`]: brute-force matrices used to check the kernel
//! * [`experiments`]: seeded `(scheme, k, m)` sweeps and their statistics
//! * [`fitting`]: sqrt and log runtime-model fits
//! * [`io`]: CSV / JSON / TOML formats
//!
//! The `parallel` feature (on by default) runs independent walks on a rayon
//! pool and enables [`par::KernelMode::Parallel`]; results are identical
//! with and without it.

pub mod dense;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod hypercube;
pub mod io;
pub mod par;
pub mod walk;
pub mod weights;

pub use error::{Error, Result};
pub use experiments::{run_batch, BatchPlan, BatchResult, HorizonPolicy};
pub use fitting::{fit_log_model, fit_sqrt_model, FitModel, FitPoint, FitResult};
pub use hypercube::{MarkedSet, VertexId};
pub use par::KernelMode;
pub use walk::{run_walk, OracleMode, StateVector, Walk, WalkConfig, WalkResult};
pub use weights::WeightScheme;
