//! Segmentation-aware data augmentation with strategy search.
//!
//! The crate is organized around the path a training image takes:
//!
//! * [`raster`] — the image/mask data model, the operation kernels and the
//!   magnitude-to-parameter mapping;
//! * [`strategy`] — the five augmentation samplers that turn RNG state and
//!   a configuration into a per-image [`raster::AugPlan`];
//! * [`data`] — dataset ingestion, crop-or-downsize preprocessing, seeded
//!   epoch streams, and a synthetic dataset generator;
//! * [`eval`] — mIoU, inverse-frequency class weights, the external-trainer
//!   protocol and a fast built-in proxy evaluator;
//! * [`search`] — grid/random/TPE search over strategy spaces with a
//!   resumable JSON-Lines trial ledger and report generation.
//!
//! Everything is deterministic given explicit seeds: samplers and kernels
//! are pure, per-item RNG streams are derived from (seed, epoch, index),
//! and enabling the `parallel` feature never changes any output bytes.

pub mod data;
pub mod error;
pub mod eval;
pub mod raster;
pub mod rng;
pub mod search;
pub mod strategy;

pub use error::{Error, ErrorCategory, Result};

/// Caps the global worker pool used by the `parallel` feature. Call once,
/// before any parallel work; later calls fail. Without the feature this is
/// a no-op. Thread count never changes computed results, only speed.
pub fn set_worker_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}
