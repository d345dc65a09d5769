//! Simulation side of the SN-CPA toolkit.
//!
//! * [`limit`]: Brownian-functional draws and quantile tables for the
//!   pivotal limits of the self-normalized statistics.
//! * [`cache`]: critical-value lookup backed by JSON table files.
//! * [`dgp`]: the two synthetic designs (AR(1) predictor, Bernoulli state)
//!   with MA(τ−1) overlapping forecast errors.
//! * [`montecarlo`]: size/power experiments over parameter grids.
//! * [`replicate`]: comparison of experiment output with the published
//!   tables shipped under `fixtures/`.
//!
//! Every randomized routine takes an explicit 64-bit seed and draws from
//! per-replication substreams (see [`rng`]), so results do not depend on
//! the number of worker threads.

pub mod cache;
pub mod dgp;
pub mod error;
pub mod limit;
pub mod montecarlo;
pub mod reference;
pub mod replicate;
pub mod rng;
pub mod table;

pub use cache::{CriticalValue, CriticalValueCache, SimulationPolicy};
pub use dgp::{gen_dgp1, gen_dgp2, test_function, Dgp1Config, Dgp2Config, SimulatedSample, TestFunctionVariant, Truth};
pub use error::{Error, Result};
pub use limit::{quantile_table, quantile_tables, simulate_functional, Functional, FunctionalFamily};
pub use montecarlo::{power_curve, run_grid, DgpKind, ExperimentGrid, McReport, PowerPoint, Statistic};
pub use table::CriticalValueTable;

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build a {threads}-thread pool: {e}")))?;
    Ok(pool.install(f))
}
