//! File formats, manifests, pipeline stages and the batch command line built
//! on `depthwarp-core`.
//!
//! - [`pfm`], [`png_io`], [`cameras`]: frame and camera files. Writers are
//!   deterministic: equal inputs give byte-identical files.
//! - [`manifest`]: JSON manifests listing every frame file of a sequence with
//!   its provenance; stages find inputs only through manifests.
//! - [`stages`]: align, warp, encode, sample-traj, metrics and synth as
//!   file-to-file operations with frame-level parallelism.
//! - [`pipeline`]: all stages chained over a pairs manifest.

pub mod cameras;
pub mod config;
mod error;
pub mod manifest;
pub mod obj;
pub mod pfm;
pub mod pipeline;
pub mod png_io;
pub mod stages;
pub mod telemetry;

pub use cameras::{read_cameras, write_cameras, CameraRecord, CameraTrack};
pub use config::{AlignMode, PipelineConfig, Resolution};
pub use error::{FormatError, ManifestError};
pub use manifest::{load_manifest, save_manifest, validate_manifest, write_json, Manifest, ManifestKind, PairsManifest, Provenance};
pub use pfm::{read_depth_pfm, write_depth_pfm};
pub use pipeline::{run_pipeline, PipelineError, PipelineSummary};
pub use png_io::{read_depth_png16, read_mask_png, read_rgb_png, write_mask_png, write_rgb_png};

/// Worker count: `requested` when nonzero, else the available parallelism.
pub fn resolve_threads(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(resolve_threads(threads)).build()?;
    Ok(pool.install(f))
}
