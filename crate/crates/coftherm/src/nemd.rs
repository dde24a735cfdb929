//! NEMD post-processing: thermal conductivity via Fourier's law from a
//! binned steady-state temperature profile, plus dataset-level anisotropy
//! statistics.
//!
//! κ = (1/S) · (dE/dt) · (dL/dT), where S is the cross-section
//! perpendicular to transport and dT/dL is the mean of the absolute
//! slopes of the two half-profiles between sinks and sources.

use serde::Serialize;

use crate::mlkit::pearson;
use crate::structio::BinProfile;
use crate::{Error, Result};

/// 1 kcal·mol⁻¹·fs⁻¹ in W: (4184 J/kcal ÷ N_A) × 10¹⁵ fs/s.
pub const KCAL_PER_MOL_FS_TO_WATTS: f64 = 4184.0 / 6.02214076e23 * 1e15;

#[derive(Debug, Clone, Serialize)]
pub struct KappaResult {
    /// W·m⁻¹·K⁻¹
    pub kappa: f64,
    /// Signed fit slopes in K/Å.
    pub slope_left: f64,
    pub slope_right: f64,
    pub fit_r2_left: f64,
    pub fit_r2_right: f64,
    /// Heat rate converted to W.
    pub de_dt_watts: f64,
}

/// Heat rate dE/dt = k · n_atoms in kcal·mol⁻¹·fs⁻¹ (k defaults to 1e-7
/// in production NEMD runs). k = 0 is degenerate but allowed; callers
/// should warn.
pub fn heat_rate(n_atoms: usize, k: f64) -> Result<f64> {
    if n_atoms == 0 {
        return Err(Error::InvalidArgument("n_atoms must be positive".into()));
    }
    if k < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "heat-rate constant must be non-negative, got {k}"
        )));
    }
    Ok(k * n_atoms as f64)
}

/// Relative supercell-dimension change below `threshold` (default 0.10)?
pub fn stability_filter(l0: f64, l1: f64, threshold: f64) -> Result<bool> {
    if !(l0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference length must be positive, got {l0}"
        )));
    }
    Ok(((l1 - l0) / l0).abs() < threshold)
}

/// Arithmetic mean and ratio of the two in-plane conductivities.
pub fn average_kappa(kx: f64, ky: f64) -> Result<(f64, f64)> {
    if !(kx > 0.0 && ky > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "conductivities must be positive, got kx={kx}, ky={ky}"
        )));
    }
    Ok(((kx + ky) / 2.0, kx / ky))
}

#[derive(Debug, Clone, Serialize)]
pub struct AnisotropyStats {
    pub n: usize,
    pub mean_ratio: f64,
    /// Squared Pearson correlation between κx and κy across the dataset;
    /// `None` when either column has zero variance.
    pub parity_r2: Option<f64>,
}

pub fn anisotropy_stats(pairs: &[(f64, f64)]) -> Result<AnisotropyStats> {
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 (kx, ky) pairs".into(),
        ));
    }
    let kx: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ky: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let parity_r2 = pearson(&kx, &ky).ok().map(|r| r * r);
    let mean_ratio = pairs.iter().map(|(x, y)| x / y).sum::<f64>() / pairs.len() as f64;
    Ok(AnisotropyStats {
        n: pairs.len(),
        mean_ratio,
        parity_r2,
    })
}

pub fn extract_kappa(p: &BinProfile) -> Result<KappaResult> {
    extract_kappa_trimmed(p, 0)
}

/// `trim` drops that many extra bins from each end of each half-profile
/// (boundary regions next to the thermostatted bins are not always
/// linear).
pub fn extract_kappa_trimmed(p: &BinProfile, trim: usize) -> Result<KappaResult> {
    if !(p.de_dt > 0.0) {
        return Err(Error::KappaExtraction(format!(
            "heat rate must be positive, got {}",
            p.de_dt
        )));
    }
    let source_min = *p.source_bins.iter().min().unwrap();
    let source_max = *p.source_bins.iter().max().unwrap();
    let sink_left = p
        .sink_bins
        .iter()
        .filter(|&&i| i < source_min)
        .max()
        .copied()
        .ok_or_else(|| {
            Error::KappaExtraction("no sink bin on the low side of the sources".into())
        })?;
    let sink_right = p
        .sink_bins
        .iter()
        .filter(|&&i| i > source_max)
        .min()
        .copied()
        .ok_or_else(|| {
            Error::KappaExtraction("no sink bin on the high side of the sources".into())
        })?;

    let region = |lo: usize, hi: usize| -> Vec<usize> {
        (lo..hi)
            .filter(|i| !p.source_bins.contains(i) && !p.sink_bins.contains(i))
            .collect()
    };
    let mut left = region(sink_left + 1, source_min);
    let mut right = region(source_max + 1, sink_right);
    for _ in 0..trim {
        if left.len() >= 2 {
            left.remove(0);
            left.pop();
        }
        if right.len() >= 2 {
            right.remove(0);
            right.pop();
        }
    }
    let (slope_left, r2_left) = fit_half(p, &left, "left")?;
    let (slope_right, r2_right) = fit_half(p, &right, "right")?;

    let mean_abs_slope = (slope_left.abs() + slope_right.abs()) / 2.0;
    if !(mean_abs_slope > 0.0) {
        return Err(Error::KappaExtraction(
            "zero temperature gradient: kappa would be infinite".into(),
        ));
    }

    let de_dt_watts = p.de_dt * KCAL_PER_MOL_FS_TO_WATTS;
    let cross_section_m2 = p.cross_section * 1e-20;
    let grad_k_per_m = mean_abs_slope * 1e10;
    let kappa = de_dt_watts / (cross_section_m2 * grad_k_per_m);

    Ok(KappaResult {
        kappa,
        slope_left,
        slope_right,
        fit_r2_left: r2_left,
        fit_r2_right: r2_right,
        de_dt_watts,
    })
}

/// OLS of T against bin-center position over the given bins.
fn fit_half(p: &BinProfile, bins: &[usize], side: &str) -> Result<(f64, f64)> {
    if bins.len() < 3 {
        return Err(Error::KappaExtraction(format!(
            "{side} half has {} fit points, need at least 3",
            bins.len()
        )));
    }
    let pts: Vec<(f64, f64)> = bins
        .iter()
        .map(|&i| {
            let t = p.temperature[i].ok_or_else(|| {
                Error::KappaExtraction(format!("bin {i} has no recorded temperature"))
            })?;
            Ok((p.bin_center(i), t))
        })
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let syy: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let pred = mean_y + slope * (p.0 - mean_x);
            (p.1 - pred).powi(2)
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((slope, r2))
}
