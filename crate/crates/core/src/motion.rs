//! K-space phase-perturbation pipeline that manufactures simulated paired
//! volumes at calibrated severities.
//!
//! Corruption is rigid-motion style: each phase-encode line (row of the
//! centered spectrum) picks up a random constant phase, then a seeded
//! subset of lines is kept and the rest zeroed. The drawn parameters are
//! captured in a [`CorruptionRecord`] so any pair can be replayed
//! bit-exactly.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::float::F64Ext;
use crate::seeded::{derive_stream, SeededRng};
use crate::spectral::{forward_transform, inverse_transform, KSpaceVolume};
use crate::volume::{normalize_max, SeverityLevel, Volume, VolumeError};

/// Phase-noise bound and retained-line ratio range for one severity level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityProfile {
    pub level: SeverityLevel,
    /// Maximum per-line phase error, radians.
    pub phase_bound: f64,
    /// Inclusive range the retained-line fraction is drawn from.
    pub retain_ratio_range: (f64, f64),
}

/// Fixed severity table: mild ±0.1π keeping 60–80% of lines, moderate
/// ±0.3π keeping 40–60%, severe ±0.5π keeping 20–40%.
pub fn severity_params(level: SeverityLevel) -> SeverityProfile {
    let (phase_bound, retain_ratio_range) = match level {
        SeverityLevel::Mild => (0.1 * PI, (0.60, 0.80)),
        SeverityLevel::Moderate => (0.3 * PI, (0.40, 0.60)),
        SeverityLevel::Severe => (0.5 * PI, (0.20, 0.40)),
    };
    SeverityProfile {
        level,
        phase_bound,
        retain_ratio_range,
    }
}

/// Everything needed to replay one simulated corruption.
///
/// `per_line_phase[z][i]` is the phase applied to `retained_lines[i]` on
/// slice `z`; phases of dropped lines are irrelevant to the output and are
/// not recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub seed: u64,
    pub level: SeverityLevel,
    pub retain_ratio: f64,
    pub retained_lines: Vec<usize>,
    pub per_line_phase: Vec<Vec<f64>>,
}

/// Multiply every sample of every phase-encode line by `e^{iθ}` with
/// `θ ~ Uniform(−bound, bound)`, drawn per slice and per line.
///
/// Returns the perturbed spectrum and the drawn phases indexed
/// `[slice][row]`. Magnitudes are preserved bin-wise.
pub fn perturb_phase(
    k: &KSpaceVolume,
    phase_bound: f64,
    seed: u64,
) -> (KSpaceVolume, Vec<Vec<f64>>) {
    assert!(phase_bound >= 0.0, "phase bound must be non-negative");
    let dims = k.dims();
    let mut rng = SeededRng::new(seed);
    let phases: Vec<Vec<f64>> = (0..dims.nz)
        .map(|_| {
            (0..dims.ny)
                .map(|_| rng.uniform_range(-phase_bound, phase_bound))
                .collect()
        })
        .collect();
    let mut out = k.clone();
    apply_line_phases(&mut out, &phases);
    (out, phases)
}

/// Per-sample variant: every k-space sample gets its own phase draw.
/// Exploratory alternative to the per-line model; not used by
/// [`simulate_pair`].
pub fn perturb_phase_per_sample(k: &KSpaceVolume, phase_bound: f64, seed: u64) -> KSpaceVolume {
    assert!(phase_bound >= 0.0);
    let mut rng = SeededRng::new(seed);
    let mut out = k.clone();
    let dims = out.dims();
    for z in 0..dims.nz {
        for v in out.slice_mut(z).iter_mut() {
            let theta = rng.uniform_range(-phase_bound, phase_bound);
            *v *= Complex64::new(theta.cos(), theta.sin());
        }
    }
    out
}

fn apply_line_phases(k: &mut KSpaceVolume, phases: &[Vec<f64>]) {
    let dims = k.dims();
    for z in 0..dims.nz {
        let slice = k.slice_mut(z);
        for (y, &theta) in phases[z].iter().enumerate() {
            if theta == 0.0 {
                continue;
            }
            let phasor = Complex64::new(theta.cos(), theta.sin());
            for v in &mut slice[y * dims.nx..(y + 1) * dims.nx] {
                *v *= phasor;
            }
        }
    }
}

/// Keep `round(retain_ratio · ny)` rows (always including the DC row),
/// chosen uniformly at random, and zero the rest. The same pattern is
/// applied to every slice: one moving patient, one acquisition.
pub fn undersample(
    k: &KSpaceVolume,
    retain_ratio: f64,
    seed: u64,
) -> (KSpaceVolume, Vec<usize>) {
    assert!(
        retain_ratio > 0.0 && retain_ratio <= 1.0,
        "retain ratio must be in (0, 1]"
    );
    let ny = k.dims().ny;
    let count = ((retain_ratio * ny as f64).round() as usize).clamp(1, ny);
    let dc = k.dc_row();
    let mut rng = SeededRng::new(seed);
    let pool: Vec<usize> = (0..ny).filter(|&y| y != dc).collect();
    let mut retained = rng.sample(&pool, count - 1);
    retained.push(dc);
    retained.sort_unstable();
    let out = zero_dropped_lines(k, &retained);
    (out, retained)
}

/// Equispaced alternative: every `ny/count`-th row starting from the DC
/// row. Deterministic; exposed for experimentation only — the random
/// pattern above is what [`simulate_pair`] uses.
pub fn undersample_equispaced(k: &KSpaceVolume, retain_ratio: f64) -> (KSpaceVolume, Vec<usize>) {
    assert!(retain_ratio > 0.0 && retain_ratio <= 1.0);
    let ny = k.dims().ny;
    let count = ((retain_ratio * ny as f64).round() as usize).clamp(1, ny);
    let dc = k.dc_row();
    let mut retained: Vec<usize> = (0..count)
        .map(|i| (dc + i * ny / count) % ny)
        .collect();
    retained.sort_unstable();
    retained.dedup();
    let out = zero_dropped_lines(k, &retained);
    (out, retained)
}

fn zero_dropped_lines(k: &KSpaceVolume, retained: &[usize]) -> KSpaceVolume {
    let dims = k.dims();
    let mut keep = alloc::vec![false; dims.ny];
    for &y in retained {
        keep[y] = true;
    }
    if keep.iter().all(|&m| m) {
        return k.clone();
    }
    let mut out = k.clone();
    for z in 0..dims.nz {
        let slice = out.slice_mut(z);
        for (y, &kept) in keep.iter().enumerate() {
            if !kept {
                for v in &mut slice[y * dims.nx..(y + 1) * dims.nx] {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
    out
}

/// Run the full corruption pipeline on a max-normalized clean volume:
/// forward transform → per-line phase noise → line undersampling →
/// reconstruction → max normalization.
pub fn simulate_pair(
    clean: &Volume,
    level: SeverityLevel,
    seed: u64,
) -> Result<(Volume, CorruptionRecord), VolumeError> {
    simulate_pair_with_profile(clean, &severity_params(level), seed)
}

/// [`simulate_pair`] with an explicit profile, the hook used by tests to
/// force degenerate parameters (zero phase bound, ratio range (1, 1)).
pub fn simulate_pair_with_profile(
    clean: &Volume,
    profile: &SeverityProfile,
    seed: u64,
) -> Result<(Volume, CorruptionRecord), VolumeError> {
    // Sub-streams: 0 → retain ratio, 1 → line phases, 2 → line selection.
    let mut ratio_rng = SeededRng::new(derive_stream(seed, 0));
    let (lo, hi) = profile.retain_ratio_range;
    let retain_ratio = ratio_rng.uniform_range(lo, hi);

    let k = forward_transform(clean);
    let (k, phases) = perturb_phase(&k, profile.phase_bound, derive_stream(seed, 1));
    let (k, retained_lines) = undersample(&k, retain_ratio, derive_stream(seed, 2));

    let per_line_phase: Vec<Vec<f64>> = phases
        .iter()
        .map(|row| retained_lines.iter().map(|&y| row[y]).collect())
        .collect();

    let corrupted = finish_corrupted(&k, profile.level)?;
    let record = CorruptionRecord {
        seed,
        level: profile.level,
        retain_ratio,
        retained_lines,
        per_line_phase,
    };
    Ok((corrupted, record))
}

/// Rebuild the corrupted volume of `record` from its clean source.
/// Bit-identical to the original [`simulate_pair`] output.
pub fn replay(clean: &Volume, record: &CorruptionRecord) -> Result<Volume, VolumeError> {
    let dims = clean.dims();
    let mut phases = alloc::vec![alloc::vec![0.0; dims.ny]; dims.nz];
    for (z, row) in record.per_line_phase.iter().enumerate() {
        for (&y, &theta) in record.retained_lines.iter().zip(row.iter()) {
            phases[z][y] = theta;
        }
    }
    let mut k = forward_transform(clean);
    apply_line_phases(&mut k, &phases);
    let k = zero_dropped_lines(&k, &record.retained_lines);
    finish_corrupted(&k, record.level)
}

fn finish_corrupted(k: &KSpaceVolume, level: SeverityLevel) -> Result<Volume, VolumeError> {
    let reconstructed = inverse_transform(k);
    let normalized = normalize_max(&reconstructed)?;
    let mut meta = normalized.meta().clone();
    meta.is_corrupted = true;
    meta.severity_label = Some(level);
    normalized.with_meta(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ssim;
    use crate::phantom::structured_phantom;
    use crate::volume::{Dims, Spacing};

    fn random_kspace(seed: u64) -> KSpaceVolume {
        let mut rng = SeededRng::new(seed);
        let data = (0..2 * 16 * 16).map(|_| rng.uniform()).collect();
        let v = Volume::new(
            Dims::new(2, 16, 16),
            Spacing::isotropic(1.0),
            crate::volume::test_meta(),
            data,
        )
        .unwrap();
        forward_transform(&v)
    }

    #[test]
    fn severity_table_matches_calibration() {
        let mild = severity_params(SeverityLevel::Mild);
        assert_eq!(mild.phase_bound, 0.1 * PI);
        assert_eq!(mild.retain_ratio_range, (0.60, 0.80));
        let moderate = severity_params(SeverityLevel::Moderate);
        assert_eq!(moderate.phase_bound, 0.3 * PI);
        assert_eq!(moderate.retain_ratio_range, (0.40, 0.60));
        let severe = severity_params(SeverityLevel::Severe);
        assert_eq!(severe.phase_bound, 0.5 * PI);
        assert_eq!(severe.retain_ratio_range, (0.20, 0.40));
    }

    #[test]
    fn zero_phase_bound_is_identity() {
        let k = random_kspace(1);
        let (out, phases) = perturb_phase(&k, 0.0, 99);
        assert_eq!(out.data(), k.data());
        assert!(phases.iter().flatten().all(|&t| t == 0.0));
    }

    #[test]
    fn phase_perturbation_preserves_magnitudes() {
        let k = random_kspace(2);
        let (out, phases) = perturb_phase(&k, 0.4 * PI, 7);
        for (a, b) in k.data().iter().zip(out.data().iter()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        assert!(phases.iter().flatten().all(|&t| t.abs() <= 0.4 * PI));
    }

    #[test]
    fn phase_perturbation_is_seed_deterministic() {
        let k = random_kspace(3);
        let (a, pa) = perturb_phase(&k, 0.2, 5);
        let (b, pb) = perturb_phase(&k, 0.2, 5);
        assert_eq!(a.data(), b.data());
        assert_eq!(pa, pb);
        let (_, pc) = perturb_phase(&k, 0.2, 6);
        assert_ne!(pa, pc);
    }

    #[test]
    fn undersample_full_ratio_is_identity() {
        let k = random_kspace(4);
        let (out, retained) = undersample(&k, 1.0, 11);
        assert_eq!(out.data(), k.data());
        assert_eq!(retained, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn undersample_half_keeps_exact_count_with_dc() {
        let mut rng = SeededRng::new(0);
        let data = (0..64 * 8).map(|_| rng.uniform()).collect();
        let v = Volume::new(
            Dims::new(1, 64, 8),
            Spacing::isotropic(1.0),
            crate::volume::test_meta(),
            data,
        )
        .unwrap();
        let k = forward_transform(&v);
        let (_, retained) = undersample(&k, 0.5, 13);
        assert_eq!(retained.len(), 32);
        assert!(retained.contains(&32));
        assert!(retained.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn undersample_never_increases_energy() {
        let k = random_kspace(5);
        let (out, _) = undersample(&k, 0.3, 17);
        assert!(out.total_energy() <= k.total_energy());
    }

    #[test]
    fn equispaced_mode_keeps_dc_and_count() {
        let k = random_kspace(6);
        let (_, retained) = undersample_equispaced(&k, 0.25);
        assert_eq!(retained.len(), 4);
        assert!(retained.contains(&8));
    }

    #[test]
    fn identity_profile_roundtrips_clean_volume() {
        let clean = normalize_max(&structured_phantom(4, 32, 32)).unwrap();
        let profile = SeverityProfile {
            level: SeverityLevel::Mild,
            phase_bound: 0.0,
            retain_ratio_range: (1.0, 1.0),
        };
        let (corrupted, record) = simulate_pair_with_profile(&clean, &profile, 3).unwrap();
        let max_err = clean
            .data()
            .iter()
            .zip(corrupted.data().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_err < 1e-9, "max err {max_err}");
        assert_eq!(record.retain_ratio, 1.0);
        assert!(corrupted.meta().is_corrupted);
        assert_eq!(corrupted.meta().severity_label, Some(SeverityLevel::Mild));
    }

    #[test]
    fn replay_is_bit_identical() {
        let clean = normalize_max(&structured_phantom(4, 32, 32)).unwrap();
        let (corrupted, record) = simulate_pair(&clean, SeverityLevel::Moderate, 21).unwrap();
        let replayed = replay(&clean, &record).unwrap();
        assert_eq!(corrupted.data(), replayed.data());
        assert_eq!(corrupted.meta(), replayed.meta());
    }

    #[test]
    fn drawn_ratio_stays_in_profile_range() {
        let clean = normalize_max(&structured_phantom(2, 16, 16)).unwrap();
        for level in SeverityLevel::ALL {
            let profile = severity_params(level);
            for seed in 0..20 {
                let (_, record) = simulate_pair(&clean, level, seed).unwrap();
                let (lo, hi) = profile.retain_ratio_range;
                assert!(record.retain_ratio >= lo && record.retain_ratio <= hi);
                assert!(record
                    .per_line_phase
                    .iter()
                    .flatten()
                    .all(|&t| t.abs() <= profile.phase_bound));
            }
        }
    }

    #[test]
    fn severity_ladder_orders_mean_ssim() {
        let clean = normalize_max(&structured_phantom(4, 64, 64)).unwrap();
        let mut means = [0.0_f64; 3];
        for (i, level) in SeverityLevel::ALL.into_iter().enumerate() {
            let mut total = 0.0;
            for seed in 0..8 {
                let (corrupted, _) = simulate_pair(&clean, level, seed).unwrap();
                total += ssim(&corrupted, &clean).unwrap();
            }
            means[i] = total / 8.0;
        }
        assert!(
            means[0] > means[1] && means[1] > means[2],
            "ssim means not ordered: {means:?}"
        );
    }
}
