//! Quantitative quality metrics: PSNR, SSIM, SNR, CNR, and the Fréchet
//! distance between feature-vector populations.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::float::F64Ext;
use crate::linalg::{sym_sqrt, SquareMat};
use crate::volume::{masked_mean, masked_std, resolve_roi, RoiSpec, Volume, VolumeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    DimMismatch,
    /// SSIM needs at least an 11×11 slice.
    SliceTooSmall,
    /// Background has zero spread, so ratio metrics are undefined.
    DegenerateBackground,
    /// Fréchet distance needs ≥ 2 samples per set.
    TooFewSamples,
    Roi(VolumeError),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::DimMismatch => write!(f, "inputs have different dims"),
            MetricError::SliceTooSmall => write!(f, "slice smaller than the 11x11 SSIM window"),
            MetricError::DegenerateBackground => write!(f, "background standard deviation is zero"),
            MetricError::TooFewSamples => write!(f, "need at least two feature vectors per set"),
            MetricError::Roi(e) => write!(f, "ROI resolution failed: {e}"),
        }
    }
}

impl core::error::Error for MetricError {}

impl From<VolumeError> for MetricError {
    fn from(e: VolumeError) -> Self {
        MetricError::Roi(e)
    }
}

/// One volume's metric values for one method. `None` means "not
/// applicable" (no ground truth, no extractor, or degenerate ROI) and
/// serializes as an empty CSV field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub volume_id: String,
    pub method_label: String,
    pub psnr: Option<f64>,
    pub ssim: Option<f64>,
    pub snr: Option<f64>,
    pub cnr: Option<f64>,
    pub fid: Option<f64>,
    pub feature_dist: Option<f64>,
}

/// Peak signal-to-noise ratio in dB over the whole volume;
/// `f64::INFINITY` when the volumes are identical.
pub fn psnr(pred: &Volume, gt: &Volume, data_range: f64) -> Result<f64, MetricError> {
    if pred.dims() != gt.dims() {
        return Err(MetricError::DimMismatch);
    }
    assert!(data_range > 0.0, "data range must be positive");
    let mse: f64 = pred
        .data()
        .iter()
        .zip(gt.data().iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / pred.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (data_range * data_range / mse).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Mean structural similarity over slices: 11×11 Gaussian window
/// (σ = 1.5), K1 = 0.01, K2 = 0.03, data range 1, windows fully inside
/// the slice.
pub fn ssim(pred: &Volume, gt: &Volume) -> Result<f64, MetricError> {
    if pred.dims() != gt.dims() {
        return Err(MetricError::DimMismatch);
    }
    let dims = pred.dims();
    if dims.ny < SSIM_WINDOW || dims.nx < SSIM_WINDOW {
        return Err(MetricError::SliceTooSmall);
    }
    let kernel = gaussian_kernel();
    let mut total = 0.0;
    for z in 0..dims.nz {
        total += ssim_slice(pred.slice(z), gt.slice(z), dims.ny, dims.nx, &kernel);
    }
    Ok(total / dims.nz as f64)
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        sum += *v;
    }
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable valid-mode filtering: horizontal then vertical pass.
fn filter_valid(img: &[f64], ny: usize, nx: usize, kernel: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let out_x = nx - SSIM_WINDOW + 1;
    let out_y = ny - SSIM_WINDOW + 1;
    let mut horiz = Vec::with_capacity(ny * out_x);
    for y in 0..ny {
        let row = &img[y * nx..(y + 1) * nx];
        for x in 0..out_x {
            let mut acc = 0.0;
            for (t, &w) in kernel.iter().enumerate() {
                acc += w * row[x + t];
            }
            horiz.push(acc);
        }
    }
    let mut out = Vec::with_capacity(out_y * out_x);
    for y in 0..out_y {
        for x in 0..out_x {
            let mut acc = 0.0;
            for (t, &w) in kernel.iter().enumerate() {
                acc += w * horiz[(y + t) * out_x + x];
            }
            out.push(acc);
        }
    }
    out
}

fn ssim_slice(a: &[f64], b: &[f64], ny: usize, nx: usize, kernel: &[f64; SSIM_WINDOW]) -> f64 {
    let n = a.len();
    let mut aa = Vec::with_capacity(n);
    let mut bb = Vec::with_capacity(n);
    let mut ab = Vec::with_capacity(n);
    for i in 0..n {
        aa.push(a[i] * a[i]);
        bb.push(b[i] * b[i]);
        ab.push(a[i] * b[i]);
    }
    let mu_a = filter_valid(a, ny, nx, kernel);
    let mu_b = filter_valid(b, ny, nx, kernel);
    let e_aa = filter_valid(&aa, ny, nx, kernel);
    let e_bb = filter_valid(&bb, ny, nx, kernel);
    let e_ab = filter_valid(&ab, ny, nx, kernel);

    const C1: f64 = SSIM_K1 * SSIM_K1; // data range 1
    const C2: f64 = SSIM_K2 * SSIM_K2;
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let va = e_aa[i] - mu_a[i] * mu_a[i];
        let vb = e_bb[i] - mu_b[i] * mu_b[i];
        let cov = e_ab[i] - mu_a[i] * mu_b[i];
        let num = (2.0 * mu_a[i] * mu_b[i] + C1) * (2.0 * cov + C2);
        let den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + C1) * (va + vb + C2);
        total += num / den;
    }
    total / mu_a.len() as f64
}

/// Mean foreground intensity over background standard deviation.
pub fn snr(v: &Volume, roi: &RoiSpec) -> Result<f64, MetricError> {
    let masks = resolve_roi(v, roi)?;
    let sigma = masked_std(v.data(), &masks.background);
    if sigma == 0.0 {
        return Err(MetricError::DegenerateBackground);
    }
    Ok(masked_mean(v.data(), &masks.foreground) / sigma)
}

/// Absolute tissue-mean contrast over background standard deviation.
pub fn cnr(v: &Volume, roi: &RoiSpec) -> Result<f64, MetricError> {
    let masks = resolve_roi(v, roi)?;
    let sigma = masked_std(v.data(), &masks.background);
    if sigma == 0.0 {
        return Err(MetricError::DegenerateBackground);
    }
    let mean_a = masked_mean(v.data(), &masks.tissue_a);
    let mean_b = masked_mean(v.data(), &masks.tissue_b);
    Ok((mean_a - mean_b).abs() / sigma)
}

/// Fréchet distance between Gaussian fits of two feature-vector sets:
/// `‖μa − μb‖² + tr(Σa + Σb − 2 (Σa^{1/2} Σb Σa^{1/2})^{1/2})`.
pub fn fid(features_a: &[Vec<f64>], features_b: &[Vec<f64>]) -> Result<f64, MetricError> {
    if features_a.len() < 2 || features_b.len() < 2 {
        return Err(MetricError::TooFewSamples);
    }
    let d = features_a[0].len();
    if d == 0
        || features_a.iter().any(|v| v.len() != d)
        || features_b.iter().any(|v| v.len() != d)
    {
        return Err(MetricError::DimMismatch);
    }

    let (mu_a, cov_a) = gaussian_fit(features_a, d);
    let (mu_b, cov_b) = gaussian_fit(features_b, d);

    let mean_term: f64 = mu_a
        .iter()
        .zip(mu_b.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();

    let root_a = sym_sqrt(&cov_a);
    let mut inner = root_a.matmul(&cov_b).matmul(&root_a);
    inner.symmetrize();
    let cross = sym_sqrt(&inner);

    let value = mean_term + cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
    Ok(value.max(0.0))
}

fn gaussian_fit(features: &[Vec<f64>], d: usize) -> (Vec<f64>, SquareMat) {
    let n = features.len() as f64;
    let mut mu = alloc::vec![0.0; d];
    for v in features {
        for (m, &x) in mu.iter_mut().zip(v.iter()) {
            *m += x;
        }
    }
    for m in mu.iter_mut() {
        *m /= n;
    }
    let mut cov = SquareMat::zeros(d);
    for v in features {
        for i in 0..d {
            let di = v[i] - mu[i];
            for j in i..d {
                let prod = di * (v[j] - mu[j]);
                cov.data[i * d + j] += prod;
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let val = cov.get(i, j) / (n - 1.0);
            cov.set(i, j, val);
            cov.set(j, i, val);
        }
    }
    (mu, cov)
}
