//! Synthetic test volumes.
//!
//! Desk-scale stand-ins for clinical data: a nested-ellipse head phantom
//! with enough edge structure for similarity metrics to react to k-space
//! corruption, and a two-blob phantom with known region statistics.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::volume::{Dims, Modality, Spacing, Volume, VolumeMeta};

fn meta(patient: &str) -> VolumeMeta {
    VolumeMeta::new(patient.to_string(), Modality::T1, "phantom").unwrap()
}

/// Nested-ellipse phantom with stripes and a bright nodule.
///
/// Intensity ramps slightly along z so slices are distinguishable. Values
/// lie in [0, 1] with the maximum voxel at exactly 1 on the last slice.
pub fn structured_phantom(nz: usize, ny: usize, nx: usize) -> Volume {
    let mut data = Vec::with_capacity(nz * ny * nx);
    for z in 0..nz {
        let z_scale = if nz == 1 {
            1.0
        } else {
            0.85 + 0.15 * z as f64 / (nz - 1) as f64
        };
        for y in 0..ny {
            for x in 0..nx {
                // Normalized coordinates in [-1, 1].
                let v = 2.0 * y as f64 / (ny - 1) as f64 - 1.0;
                let u = 2.0 * x as f64 / (nx - 1) as f64 - 1.0;
                let mut val = 0.0;
                if ellipse(u, v, 0.0, 0.0, 0.82, 0.88) {
                    val = 0.45;
                    // Stripes give the spectrum off-center energy.
                    if ((x / 4) % 2 == 0) && ellipse(u, v, 0.0, 0.45, 0.55, 0.3) {
                        val = 0.62;
                    }
                    if ellipse(u, v, -0.32, -0.18, 0.26, 0.34) {
                        val = 0.78;
                    }
                    if ellipse(u, v, 0.34, -0.2, 0.22, 0.3) {
                        val = 0.25;
                    }
                    if ellipse(u, v, 0.0, -0.12, 0.07, 0.07) {
                        val = 1.0;
                    }
                }
                data.push(val * z_scale);
            }
        }
    }
    Volume::new(
        Dims::new(nz, ny, nx),
        Spacing::isotropic(1.0),
        meta("phantom-structured"),
        data,
    )
    .unwrap()
}

/// Two ellipsoidal blobs (`bright` left, `dim` right) on a zero background.
pub fn two_blob_phantom(nz: usize, ny: usize, nx: usize, bright: f64, dim: f64) -> Volume {
    let mut data = Vec::with_capacity(nz * ny * nx);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let w = 2.0 * z as f64 / (nz - 1).max(1) as f64 - 1.0;
                let v = 2.0 * y as f64 / (ny - 1) as f64 - 1.0;
                let u = 2.0 * x as f64 / (nx - 1) as f64 - 1.0;
                let mut val = 0.0;
                if w.abs() < 0.6 {
                    if ellipse(u, v, -0.4, 0.0, 0.28, 0.4) {
                        val = bright;
                    } else if ellipse(u, v, 0.4, 0.0, 0.28, 0.4) {
                        val = dim;
                    }
                }
                data.push(val);
            }
        }
    }
    Volume::new(
        Dims::new(nz, ny, nx),
        Spacing::isotropic(1.0),
        meta("phantom-two-blob"),
        data,
    )
    .unwrap()
}

fn ellipse(u: f64, v: f64, cu: f64, cv: f64, ru: f64, rv: f64) -> bool {
    let du = (u - cu) / ru;
    let dv = (v - cv) / rv;
    du * du + dv * dv <= 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_phantom_peaks_at_one() {
        let v = structured_phantom(16, 64, 64);
        let max = v.data().iter().copied().fold(0.0_f64, f64::max);
        assert_eq!(max, 1.0);
        assert!(v.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn blobs_have_expected_values() {
        let v = two_blob_phantom(12, 48, 48, 0.9, 0.4);
        let mut seen = [false; 3];
        for &x in v.data() {
            if x == 0.0 {
                seen[0] = true;
            } else if (x - 0.4).abs() < 1e-12 {
                seen[1] = true;
            } else if (x - 0.9).abs() < 1e-12 {
                seen[2] = true;
            }
        }
        assert_eq!(seen, [true; 3]);
    }
}
