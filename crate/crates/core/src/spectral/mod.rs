//! Centered, unitary, slice-wise 2-D spectral transforms between the image
//! domain and k-space, and the focal frequency loss computed there.
//!
//! Forward is fixed as image → k-space. The transform pair is unitary
//! (1/√N in both directions), so Parseval holds exactly and severity
//! parameters downstream are scale-free. Reconstruction takes the complex
//! magnitude: corrupted spectra are no longer conjugate-symmetric, which
//! matches clinical magnitude images.

mod fft;

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::float::F64Ext;
use crate::volume::{Dims, Spacing, Volume, VolumeMeta};

pub use fft::Fft;

/// Complex-valued spectral counterpart of a [`Volume`], slice-wise spectra
/// with the DC bin at `(ny/2, nx/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceVolume {
    dims: Dims,
    spacing: Spacing,
    origin_meta: VolumeMeta,
    data: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectralError {
    DimMismatch,
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::DimMismatch => write!(f, "volume dims do not match"),
        }
    }
}

impl core::error::Error for SpectralError {}

impl KSpaceVolume {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn origin_meta(&self) -> &VolumeMeta {
        &self.origin_meta
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn slice(&self, z: usize) -> &[Complex64] {
        let n = self.dims.slice_len();
        &self.data[z * n..(z + 1) * n]
    }

    pub fn slice_mut(&mut self, z: usize) -> &mut [Complex64] {
        let n = self.dims.slice_len();
        &mut self.data[z * n..(z + 1) * n]
    }

    /// Row of the centered spectrum holding the DC bin.
    pub fn dc_row(&self) -> usize {
        self.dims.ny / 2
    }

    pub fn total_energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Per-slice transform plan shared across a volume.
struct SlicePlan {
    ny: usize,
    nx: usize,
    fft_y: Fft,
    fft_x: Fft,
    scale: f64,
}

impl SlicePlan {
    fn new(ny: usize, nx: usize) -> Self {
        Self {
            ny,
            nx,
            fft_y: Fft::new(ny),
            fft_x: Fft::new(nx),
            scale: 1.0 / ((ny * nx) as f64).sqrt(),
        }
    }

    fn forward(&self, slice: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> =
            slice.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, false);
        roll_2d(&buf, self.ny, self.nx, self.ny / 2, self.nx / 2)
    }

    fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let sy = self.ny - self.ny / 2;
        let sx = self.nx - self.nx / 2;
        let mut buf = roll_2d(spectrum, self.ny, self.nx, sy, sx);
        self.transform(&mut buf, true);
        buf
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        // Rows, then columns through a scratch vector.
        for row in buf.chunks_exact_mut(self.nx) {
            if inverse {
                self.fft_x.inverse(row);
            } else {
                self.fft_x.forward(row);
            }
        }
        let mut col = Vec::with_capacity(self.ny);
        for x in 0..self.nx {
            col.clear();
            col.extend((0..self.ny).map(|y| buf[y * self.nx + x]));
            if inverse {
                self.fft_y.inverse(&mut col);
            } else {
                self.fft_y.forward(&mut col);
            }
            for (y, &c) in col.iter().enumerate() {
                buf[y * self.nx + x] = c;
            }
        }
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }
}

/// Circular shift of a row-major `ny × nx` array by `(sy, sx)`.
fn roll_2d(data: &[Complex64], ny: usize, nx: usize, sy: usize, sx: usize) -> Vec<Complex64> {
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); data.len()];
    for y in 0..ny {
        let ty = (y + sy) % ny;
        for x in 0..nx {
            let tx = (x + sx) % nx;
            out[ty * nx + tx] = data[y * nx + x];
        }
    }
    out
}

/// Centered unitary 2-D DFT of every slice.
pub fn forward_transform(v: &Volume) -> KSpaceVolume {
    let dims = v.dims();
    let plan = SlicePlan::new(dims.ny, dims.nx);
    let mut data = Vec::with_capacity(dims.voxels());
    for z in 0..dims.nz {
        data.extend(plan.forward(v.slice(z)));
    }
    KSpaceVolume {
        dims,
        spacing: v.spacing(),
        origin_meta: v.meta().clone(),
        data,
    }
}

/// Inverse of [`forward_transform`]; output voxels are the magnitude of the
/// complex reconstruction.
pub fn inverse_transform(k: &KSpaceVolume) -> Volume {
    let dims = k.dims;
    let plan = SlicePlan::new(dims.ny, dims.nx);
    let mut data = Vec::with_capacity(dims.voxels());
    for z in 0..dims.nz {
        let rec = plan.inverse(k.slice(z));
        data.extend(rec.iter().map(|c| c.re.hypot(c.im)));
    }
    Volume::new(dims, k.spacing, k.origin_meta.clone(), data)
        .expect("inverse transform preserves dims and meta")
}

/// Spectral squared error reweighted toward the worst bins.
///
/// Per slice: `d = |F_pred − F_gt|²`, `w = (d / max d)^(alpha/2)` (zero
/// contribution when the slice spectra agree); the loss is the mean of
/// `w · d` over all bins and slices. `alpha = 0` reduces to the plain mean
/// squared spectral error.
pub fn focal_frequency_loss(pred: &Volume, gt: &Volume, alpha: f64) -> Result<f64, SpectralError> {
    if pred.dims() != gt.dims() {
        return Err(SpectralError::DimMismatch);
    }
    let dims = pred.dims();
    let plan = SlicePlan::new(dims.ny, dims.nx);
    let mut total = 0.0;
    for z in 0..dims.nz {
        let fa = plan.forward(pred.slice(z));
        let fb = plan.forward(gt.slice(z));
        total += focal_slice_sum(&fa, &fb, alpha);
    }
    Ok(total / dims.voxels() as f64)
}

/// Sum of `w · d` over one slice's bins (not yet divided by bin count).
pub(crate) fn focal_slice_sum(fa: &[Complex64], fb: &[Complex64], alpha: f64) -> f64 {
    let d: Vec<f64> = fa
        .iter()
        .zip(fb.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .collect();
    let max_d = d.iter().copied().fold(0.0_f64, f64::max);
    if max_d <= 0.0 {
        return 0.0;
    }
    d.iter().map(|&di| (di / max_d).powf(alpha * 0.5) * di).sum()
}
