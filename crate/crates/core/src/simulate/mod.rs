//! Monte Carlo evaluation and frozen-set construction for general channels.

mod construction;
mod mc;
mod report;

pub use construction::{
    bitflip_scores, select_frozen_bitflip, select_frozen_erasure_exact, CodeSpec, Construction, DEFAULT_SAMPLES,
};
pub use mc::{run_mc, run_mc_with_threads, worker_count, THREADS_ENV};
pub use report::{Estimate, SimReport, Z95};
