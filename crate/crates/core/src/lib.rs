//! Algorithms for simulating MRI motion artifacts in k-space at calibrated
//! severities, scoring reconstructions (SSIM, PSNR, SNR, CNR, FID, feature
//! distances), forward reference blocks for attention/multi-scale networks,
//! and the statistical machinery for method comparison.
//!
//! This crate is `no_std` + `alloc`: it holds the pure computations. File
//! formats, stores, and the command-line front end live in the companion
//! `mrmotion` crate.

#![cfg_attr(not(test), no_std)]
// Under `cargo test` the crate builds with std, whose inherent float
// methods shadow the libm-backed `F64Ext` trait used by no_std builds.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod float;
pub mod metrics;
pub mod motion;
pub mod phantom;
pub mod seeded;
pub mod spectral;
pub mod volume;

mod linalg;

pub use volume::{Dims, Modality, SeverityLevel, Spacing, Volume, VolumeError, VolumeMeta};
