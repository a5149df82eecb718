//! Core 3-D volume representation, intensity normalization, and ROI
//! resolution for region-statistics metrics.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::float::F64Ext;

/// Acquisition sequence type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modality {
    T1,
    T2,
}

/// Artifact severity grade of a corrupted volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeverityLevel {
    Mild,
    Moderate,
    Severe,
}

impl SeverityLevel {
    pub const ALL: [SeverityLevel; 3] = [
        SeverityLevel::Mild,
        SeverityLevel::Moderate,
        SeverityLevel::Severe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeverityLevel::Mild => "mild",
            SeverityLevel::Moderate => "moderate",
            SeverityLevel::Severe => "severe",
        }
    }
}

impl fmt::Display for SeverityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-volume bookkeeping carried through every pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VolumeMeta {
    pub patient_id: String,
    pub modality: Modality,
    pub center: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity_label: Option<SeverityLevel>,
    pub is_corrupted: bool,
}

impl VolumeMeta {
    pub fn new(
        patient_id: impl Into<String>,
        modality: Modality,
        center: impl Into<String>,
    ) -> Result<Self, VolumeError> {
        let meta = Self {
            patient_id: patient_id.into(),
            modality,
            center: center.into(),
            severity_label: None,
            is_corrupted: false,
        };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<(), VolumeError> {
        if self.patient_id.is_empty() {
            return Err(VolumeError::EmptyPatientId);
        }
        if self.severity_label.is_some() && !self.is_corrupted {
            return Err(VolumeError::SeverityOnCleanVolume);
        }
        Ok(())
    }
}

/// Volume dimensions `(nz, ny, nx)`: slices, rows, columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub nz: usize,
    pub ny: usize,
    pub nx: usize,
}

impl Dims {
    pub fn new(nz: usize, ny: usize, nx: usize) -> Self {
        Self { nz, ny, nx }
    }

    pub fn voxels(&self) -> usize {
        self.nz * self.ny * self.nx
    }

    pub fn slice_len(&self) -> usize {
        self.ny * self.nx
    }
}

/// Voxel spacing `(dz, dy, dx)` in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub dz: f64,
    pub dy: f64,
    pub dx: f64,
}

impl Spacing {
    pub fn isotropic(s: f64) -> Self {
        Self {
            dz: s,
            dy: s,
            dx: s,
        }
    }
}

/// A 3-D scalar image, stored z-major (slice, then row, then column).
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: Spacing,
    meta: VolumeMeta,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VolumeError {
    /// Dims contain a zero extent or the payload length disagrees.
    DimMismatch { expected: usize, got: usize },
    /// A voxel is NaN or infinite.
    NonFiniteVoxel { index: usize },
    /// Normalization target has no positive voxel.
    AllZeroVolume,
    EmptyPatientId,
    SeverityOnCleanVolume,
    /// ROI resolution produced an empty mask.
    EmptyRegion { which: &'static str },
    /// Explicit ROI mask does not match the volume dims.
    MaskDimMismatch,
}

impl fmt::Display for VolumeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolumeError::DimMismatch { expected, got } => {
                write!(f, "payload length {got} does not match dims ({expected} voxels)")
            }
            VolumeError::NonFiniteVoxel { index } => {
                write!(f, "non-finite voxel at linear index {index}")
            }
            VolumeError::AllZeroVolume => write!(f, "volume has no positive voxel"),
            VolumeError::EmptyPatientId => write!(f, "patient_id must be non-empty"),
            VolumeError::SeverityOnCleanVolume => {
                write!(f, "severity_label set on a volume not marked corrupted")
            }
            VolumeError::EmptyRegion { which } => write!(f, "ROI mask `{which}` is empty"),
            VolumeError::MaskDimMismatch => write!(f, "explicit mask dims do not match volume"),
        }
    }
}

impl core::error::Error for VolumeError {}

impl Volume {
    pub fn new(
        dims: Dims,
        spacing: Spacing,
        meta: VolumeMeta,
        data: Vec<f64>,
    ) -> Result<Self, VolumeError> {
        if dims.nz == 0 || dims.ny == 0 || dims.nx == 0 || data.len() != dims.voxels() {
            return Err(VolumeError::DimMismatch {
                expected: dims.voxels(),
                got: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(VolumeError::NonFiniteVoxel { index });
        }
        meta.validate()?;
        Ok(Self {
            dims,
            spacing,
            meta,
            data,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn meta(&self) -> &VolumeMeta {
        &self.meta
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn slice(&self, z: usize) -> &[f64] {
        let n = self.dims.slice_len();
        &self.data[z * n..(z + 1) * n]
    }

    pub fn voxel(&self, z: usize, y: usize, x: usize) -> f64 {
        self.data[(z * self.dims.ny + y) * self.dims.nx + x]
    }

    pub fn with_meta(mut self, meta: VolumeMeta) -> Result<Self, VolumeError> {
        meta.validate()?;
        self.meta = meta;
        Ok(self)
    }

    /// Rebuild with the same geometry and meta but new voxel data.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self, VolumeError> {
        Volume::new(self.dims, self.spacing, self.meta.clone(), data)
    }
}

/// Divide by the maximum voxel so the output peaks at exactly 1.0.
///
/// Negative voxels are clamped to zero first: magnitude images are
/// non-negative and stray negatives signal bad ingestion.
pub fn normalize_max(v: &Volume) -> Result<Volume, VolumeError> {
    let clamped: Vec<f64> = v.data.iter().map(|&x| if x < 0.0 { 0.0 } else { x }).collect();
    let max = clamped.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Err(VolumeError::AllZeroVolume);
    }
    let data = clamped.iter().map(|&x| x / max).collect();
    v.with_data(data)
}

/// Region-of-interest request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoiSpec {
    /// Derive all masks from the intensity histogram.
    Auto,
    /// Caller-provided foreground mask (z-major booleans, one per voxel).
    ExplicitMask(Vec<bool>),
}

/// Disjoint voxel masks used by the SNR / CNR metrics.
#[derive(Debug, Clone)]
pub struct RoiMasks {
    pub foreground: Vec<bool>,
    pub tissue_a: Vec<bool>,
    pub tissue_b: Vec<bool>,
    pub background: Vec<bool>,
}

/// Width of the border band used for background sampling.
const BORDER_BAND: usize = 5;
const HISTOGRAM_BINS: usize = 256;

/// Split a normalized volume into foreground / tissue / background masks.
///
/// Auto mode thresholds the histogram with Otsu's criterion, takes the
/// outermost 5-voxel border band (minus foreground) as background, and
/// splits foreground intensities into two clusters with a 2-means pass
/// seeded from the intensity extremes. Brighter cluster is `tissue_a`.
pub fn resolve_roi(v: &Volume, spec: &RoiSpec) -> Result<RoiMasks, VolumeError> {
    let foreground = match spec {
        RoiSpec::Auto => {
            let threshold = otsu_threshold(&v.data)?;
            v.data.iter().map(|&x| x > threshold).collect::<Vec<bool>>()
        }
        RoiSpec::ExplicitMask(mask) => {
            if mask.len() != v.dims.voxels() {
                return Err(VolumeError::MaskDimMismatch);
            }
            mask.clone()
        }
    };
    if !foreground.iter().any(|&m| m) {
        return Err(VolumeError::EmptyRegion { which: "foreground" });
    }

    let background = border_band(v.dims)
        .into_iter()
        .zip(foreground.iter())
        .map(|(border, &fg)| border && !fg)
        .collect::<Vec<bool>>();
    if !background.iter().any(|&m| m) {
        return Err(VolumeError::EmptyRegion { which: "background" });
    }

    let (tissue_a, tissue_b) = split_tissues(&v.data, &foreground)?;

    Ok(RoiMasks {
        foreground,
        tissue_a,
        tissue_b,
        background,
    })
}

/// Otsu threshold over a 256-bin histogram of values assumed in [0, 1].
fn otsu_threshold(data: &[f64]) -> Result<f64, VolumeError> {
    let mut hist = [0u64; HISTOGRAM_BINS];
    for &x in data {
        let clamped = x.clamp(0.0, 1.0);
        let bin = ((clamped * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        hist[bin] += 1;
    }
    let total = data.len() as f64;
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum();

    let mut best_t = None;
    let mut best_var = 0.0_f64;
    let mut w0 = 0.0_f64;
    let mut sum0 = 0.0_f64;
    for t in 0..HISTOGRAM_BINS - 1 {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (total_sum - sum0) / w1;
        let between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if between > best_var {
            best_var = between;
            best_t = Some(t);
        }
    }
    match best_t {
        // Threshold at the upper edge of the chosen bin.
        Some(t) => Ok((t as f64 + 1.0) / HISTOGRAM_BINS as f64),
        None => Err(VolumeError::EmptyRegion { which: "foreground" }),
    }
}

fn border_band(dims: Dims) -> Vec<bool> {
    let mut mask = Vec::with_capacity(dims.voxels());
    for z in 0..dims.nz {
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                let near = z < BORDER_BAND
                    || z + BORDER_BAND >= dims.nz
                    || y < BORDER_BAND
                    || y + BORDER_BAND >= dims.ny
                    || x < BORDER_BAND
                    || x + BORDER_BAND >= dims.nx;
                mask.push(near);
            }
        }
    }
    mask
}

/// 2-means over foreground intensities, centroids seeded from the extremes.
fn split_tissues(data: &[f64], foreground: &[bool]) -> Result<(Vec<bool>, Vec<bool>), VolumeError> {
    let fg_values: Vec<f64> = data
        .iter()
        .zip(foreground.iter())
        .filter(|(_, &m)| m)
        .map(|(&x, _)| x)
        .collect();
    let lo = fg_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fg_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(VolumeError::EmptyRegion { which: "tissue_b" });
    }

    let mut c_low = lo;
    let mut c_high = hi;
    for _ in 0..100 {
        let mid = 0.5 * (c_low + c_high);
        let (mut sum_l, mut n_l, mut sum_h, mut n_h) = (0.0, 0u64, 0.0, 0u64);
        for &x in &fg_values {
            if x <= mid {
                sum_l += x;
                n_l += 1;
            } else {
                sum_h += x;
                n_h += 1;
            }
        }
        if n_l == 0 || n_h == 0 {
            break;
        }
        let new_low = sum_l / n_l as f64;
        let new_high = sum_h / n_h as f64;
        if (new_low - c_low).abs() < 1e-12 && (new_high - c_high).abs() < 1e-12 {
            c_low = new_low;
            c_high = new_high;
            break;
        }
        c_low = new_low;
        c_high = new_high;
    }

    let mid = 0.5 * (c_low + c_high);
    let mut tissue_a = Vec::with_capacity(data.len());
    let mut tissue_b = Vec::with_capacity(data.len());
    for (&x, &fg) in data.iter().zip(foreground.iter()) {
        let high = fg && x > mid;
        tissue_a.push(high);
        tissue_b.push(fg && !high);
    }
    if !tissue_a.iter().any(|&m| m) {
        return Err(VolumeError::EmptyRegion { which: "tissue_a" });
    }
    if !tissue_b.iter().any(|&m| m) {
        return Err(VolumeError::EmptyRegion { which: "tissue_b" });
    }
    Ok((tissue_a, tissue_b))
}

/// Mean of masked voxels.
pub(crate) fn masked_mean(data: &[f64], mask: &[bool]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0u64;
    for (&x, &m) in data.iter().zip(mask.iter()) {
        if m {
            sum += x;
            n += 1;
        }
    }
    sum / n as f64
}

/// Sample standard deviation (n − 1 divisor) of masked voxels.
pub(crate) fn masked_std(data: &[f64], mask: &[bool]) -> f64 {
    let mean = masked_mean(data, mask);
    let mut ss = 0.0;
    let mut n = 0u64;
    for (&x, &m) in data.iter().zip(mask.iter()) {
        if m {
            let d = x - mean;
            ss += d * d;
            n += 1;
        }
    }
    if n < 2 {
        return 0.0;
    }
    (ss / (n as f64 - 1.0)).sqrt()
}

#[cfg(test)]
pub(crate) fn test_meta() -> VolumeMeta {
    VolumeMeta::new("p0", Modality::T1, "center-a").unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom;

    fn volume_from(values: &[f64]) -> Volume {
        Volume::new(
            Dims::new(1, 1, values.len()),
            Spacing::isotropic(1.0),
            test_meta(),
            values.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn normalize_divides_by_max() {
        let v = volume_from(&[0.0, 500.0, 2000.0]);
        let n = normalize_max(&v).unwrap();
        assert_eq!(n.data(), &[0.0, 0.25, 1.0]);
    }

    #[test]
    fn normalize_is_idempotent() {
        let v = volume_from(&[0.1, 0.5, 1.0]);
        let n = normalize_max(&v).unwrap();
        assert_eq!(n.data(), v.data());
    }

    #[test]
    fn normalize_rejects_all_zero() {
        let v = volume_from(&[0.0, 0.0]);
        assert_eq!(normalize_max(&v).unwrap_err(), VolumeError::AllZeroVolume);
    }

    #[test]
    fn normalize_clamps_negatives() {
        let v = volume_from(&[-3.0, 1.0, 2.0]);
        let n = normalize_max(&v).unwrap();
        assert_eq!(n.data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn construction_rejects_bad_payload_length() {
        let err = Volume::new(
            Dims::new(2, 3, 4),
            Spacing::isotropic(1.0),
            test_meta(),
            alloc::vec![0.0; 25],
        )
        .unwrap_err();
        assert_eq!(err, VolumeError::DimMismatch { expected: 24, got: 25 });
    }

    #[test]
    fn construction_rejects_non_finite() {
        let err = Volume::new(
            Dims::new(1, 1, 2),
            Spacing::isotropic(1.0),
            test_meta(),
            alloc::vec![0.0, f64::NAN],
        )
        .unwrap_err();
        assert!(matches!(err, VolumeError::NonFiniteVoxel { index: 1 }));
    }

    #[test]
    fn meta_rejects_severity_on_clean() {
        let mut meta = test_meta();
        meta.severity_label = Some(SeverityLevel::Mild);
        assert_eq!(meta.validate(), Err(VolumeError::SeverityOnCleanVolume));
    }

    #[test]
    fn roi_two_blob_phantom_separates_tissues() {
        let v = phantom::two_blob_phantom(12, 48, 48, 0.9, 0.4);
        let masks = resolve_roi(&v, &RoiSpec::Auto).unwrap();
        let mean_a = masked_mean(v.data(), &masks.tissue_a);
        let mean_b = masked_mean(v.data(), &masks.tissue_b);
        assert!((mean_a - 0.9).abs() < 0.05, "tissue_a mean {mean_a}");
        assert!((mean_b - 0.4).abs() < 0.05, "tissue_b mean {mean_b}");
        // Disjointness where required.
        for i in 0..v.data().len() {
            assert!(!(masks.background[i] && masks.foreground[i]));
            assert!(!(masks.tissue_a[i] && masks.tissue_b[i]));
        }
    }

    #[test]
    fn roi_explicit_mask_passes_through() {
        let v = phantom::two_blob_phantom(12, 48, 48, 0.9, 0.4);
        let mask: Vec<bool> = v.data().iter().map(|&x| x > 0.2).collect();
        let masks = resolve_roi(&v, &RoiSpec::ExplicitMask(mask.clone())).unwrap();
        assert_eq!(masks.foreground, mask);
    }

    #[test]
    fn roi_uniform_volume_is_degenerate() {
        let v = Volume::new(
            Dims::new(12, 32, 32),
            Spacing::isotropic(1.0),
            test_meta(),
            alloc::vec![0.5; 12 * 32 * 32],
        )
        .unwrap();
        assert!(matches!(
            resolve_roi(&v, &RoiSpec::Auto),
            Err(VolumeError::EmptyRegion { .. })
        ));
    }

    #[test]
    fn roi_is_deterministic() {
        let v = phantom::two_blob_phantom(10, 40, 40, 0.9, 0.4);
        let a = resolve_roi(&v, &RoiSpec::Auto).unwrap();
        let b = resolve_roi(&v, &RoiSpec::Auto).unwrap();
        assert_eq!(a.foreground, b.foreground);
        assert_eq!(a.tissue_a, b.tissue_a);
        assert_eq!(a.background, b.background);
    }
}
