//! Spectral analysis: velocity autocorrelation, vibrational density of
//! states, the VDOS overlap metric S, and phonon spectral energy density.
//!
//! VACF(t) = Σ_{xyz} Σ_{j∈group} ⟨v(t₀+t)·v(t₀)⟩ / Σ_{xyz} Σ_j ⟨v(t₀)²⟩,
//! averaged over all time origins, so VACF(0) = 1 per group. The VDOS is
//! the one-sided Fourier magnitude of the VACF (no window by default).
//! The overlap metric is the ratio of the areas under the pointwise
//! minimum and maximum of the per-group VDOS curves.

mod psed;

pub use psed::{emit_psed_plotdata, psed, Axis, PsedMap, PsedPlotData};

use std::collections::BTreeMap;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dangling::{BranchLabel, BranchLabeling};
use crate::structio::{Structure, Trajectory};
use crate::{Error, Result};

/// 1/fs → THz.
const INV_FS_TO_THZ: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    None,
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    Main,
    Dangling,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Main => "main",
            Branch::Dangling => "dangling",
        }
    }
}

/// Element × branch group key, e.g. ("C", Main) or ("N", Dangling).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupKey {
    pub element: String,
    pub branch: Branch,
}

impl std::fmt::Display for GroupKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.branch {
            Branch::Main => write!(f, "{}", self.element),
            Branch::Dangling => write!(f, "{}_d", self.element),
        }
    }
}

/// Per-group VDOS curves on one shared frequency grid.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    pub freq_thz: Vec<f64>,
    pub groups: Vec<(GroupKey, Vec<f64>)>,
}

/// Summed raw velocity autocorrelation over a group (all components,
/// all atoms, all time origins), *not* normalized at lag 0.
fn raw_autocorrelation(t: &Trajectory, group: &[usize], max_lag: usize) -> Result<Vec<f64>> {
    if group.is_empty() {
        return Err(Error::Spectral("empty atom group".into()));
    }
    let n = t.n_frames();
    for &j in group {
        if j >= t.n_atoms() {
            return Err(Error::Spectral(format!(
                "atom index {j} out of range [0, {})",
                t.n_atoms()
            )));
        }
    }
    if max_lag == 0 || 2 * max_lag > n {
        return Err(Error::Spectral(format!(
            "max_lag must satisfy 1 ≤ max_lag ≤ n_frames/2 (= {})",
            n / 2
        )));
    }

    // Wiener–Khinchin: pad to kill circular wrap-around
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    let mut acc = vec![0.0f64; max_lag + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); m];
    for &j in group {
        for alpha in 0..3 {
            for slot in buf.iter_mut() {
                *slot = Complex::new(0.0, 0.0);
            }
            for (f, frame) in t.velocities.iter().enumerate() {
                buf[f] = Complex::new(frame[j][alpha], 0.0);
            }
            fft.process(&mut buf);
            for slot in buf.iter_mut() {
                *slot = Complex::new(slot.norm_sqr(), 0.0);
            }
            ifft.process(&mut buf);
            for (lag, a) in acc.iter_mut().enumerate() {
                *a += buf[lag].re / m as f64;
            }
        }
    }
    Ok(acc)
}

/// Normalized VACF: lags 0..=max_lag, VACF(0) = 1 exactly.
/// `max_lag` defaults to half the record.
pub fn vacf(t: &Trajectory, group: &[usize], max_lag: Option<usize>) -> Result<Vec<f64>> {
    let n = t.n_frames();
    let max_lag = max_lag.unwrap_or(n / 2);
    let acc = raw_autocorrelation(t, group, max_lag)?;
    let denom = acc[0] / n as f64; // ⟨v(t₀)²⟩ over all origins
    if !(denom > 0.0) {
        return Err(Error::Spectral(
            "all-zero velocities: VACF normalization divides by zero".into(),
        ));
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(lag, a)| (a / (n - lag) as f64) / denom)
        .collect())
}

/// Per-atom (but not lag-0-normalized) VACF, for atom-count-weighted
/// mixtures of subgroup spectra.
pub fn vacf_unnormalized(
    t: &Trajectory,
    group: &[usize],
    max_lag: Option<usize>,
) -> Result<Vec<f64>> {
    let n = t.n_frames();
    let max_lag = max_lag.unwrap_or(n / 2);
    let acc = raw_autocorrelation(t, group, max_lag)?;
    Ok(acc
        .iter()
        .enumerate()
        .map(|(lag, a)| a / (n - lag) as f64 / group.len() as f64)
        .collect())
}

/// One-sided VDOS slice: frequency grid in THz plus magnitudes.
#[derive(Debug, Clone)]
pub struct VdosSlice {
    pub freq_thz: Vec<f64>,
    pub values: Vec<f64>,
}

/// VDOS = |FFT(VACF)| on the one-sided grid (n/2 + 1 points,
/// Δf = 1/(n·dt)). Expects a normalized VACF (VACF(0) = 1).
pub fn vdos(vacf: &[f64], dt_fs: f64, window: Window) -> Result<VdosSlice> {
    if let Some(first) = vacf.first() {
        if (first - 1.0).abs() > 1e-9 {
            return Err(Error::Spectral(format!(
                "VACF must be normalized: VACF(0) = {first}, expected 1"
            )));
        }
    }
    vdos_raw(vacf, dt_fs, window)
}

/// VDOS of an arbitrary (possibly unnormalized) correlation series.
pub fn vdos_raw(series: &[f64], dt_fs: f64, window: Window) -> Result<VdosSlice> {
    if series.len() < 2 {
        return Err(Error::Spectral("VACF needs at least 2 samples".into()));
    }
    if !(dt_fs > 0.0) {
        return Err(Error::Spectral(format!(
            "sampling interval must be positive, got {dt_fs}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spectral("VACF contains non-finite values".into()));
    }
    let n = series.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = match window {
                Window::None => 1.0,
                // half Hann: 1 at lag 0 tapering to 0 at the last lag
                Window::Hann => {
                    0.5 * (1.0 + (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
                }
            };
            Complex::new(v * w, 0.0)
        })
        .collect();
    fft.process(&mut buf);
    let n_out = n / 2 + 1;
    let df = INV_FS_TO_THZ / (n as f64 * dt_fs);
    Ok(VdosSlice {
        freq_thz: (0..n_out).map(|k| k as f64 * df).collect(),
        values: buf[..n_out].iter().map(|c| c.norm()).collect(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct SpectralOptions {
    /// Defaults to half the record.
    pub max_lag: Option<usize>,
    pub window: Window,
    /// Rescale each group VDOS to unit area before comparing groups.
    pub renorm_area: bool,
}

/// Group VDOS per (element, branch). Hydrogen atoms are skipped: the
/// overlap metric compares heavy-element spectra only. Without a
/// labeling, every atom counts as main-branch.
pub fn spectral_profile(
    t: &Trajectory,
    s: &Structure,
    labeling: Option<&BranchLabeling>,
    opts: &SpectralOptions,
) -> Result<SpectralProfile> {
    if t.n_atoms() != s.n_atoms() {
        return Err(Error::Spectral(format!(
            "trajectory has {} atoms but structure has {}",
            t.n_atoms(),
            s.n_atoms()
        )));
    }
    if let Some(lab) = labeling {
        if lab.labels.len() != s.n_atoms() {
            return Err(Error::Spectral("labeling does not match structure".into()));
        }
    }
    let mut groups: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (i, atom) in s.atoms.iter().enumerate() {
        if atom.symbol == "H" {
            continue;
        }
        let branch = match labeling {
            Some(lab) => match lab.labels[i] {
                BranchLabel::Main => Branch::Main,
                BranchLabel::Dangling | BranchLabel::DanglingH => Branch::Dangling,
            },
            None => Branch::Main,
        };
        groups
            .entry(GroupKey {
                element: atom.symbol.clone(),
                branch,
            })
            .or_default()
            .push(i);
    }
    if groups.is_empty() {
        return Err(Error::Spectral(
            "no non-hydrogen atoms to build VDOS groups from".into(),
        ));
    }

    let mut freq_thz: Option<Vec<f64>> = None;
    let mut out = Vec::with_capacity(groups.len());
    for (key, atoms) in groups {
        let v = vacf(t, &atoms, opts.max_lag)?;
        let mut slice = vdos(&v, t.dt_sample, opts.window)?;
        if opts.renorm_area {
            let area = trapezoid(&slice.freq_thz, &slice.values);
            if area > 0.0 {
                for v in &mut slice.values {
                    *v /= area;
                }
            }
        }
        if freq_thz.is_none() {
            freq_thz = Some(slice.freq_thz);
        }
        out.push((key, slice.values));
    }
    Ok(SpectralProfile {
        freq_thz: freq_thz.unwrap(),
        groups: out,
    })
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (yw[0] + yw[1]) * (xw[1] - xw[0]))
        .sum()
}

/// Overlap metric S ∈ [0, 1]: area under the pointwise minimum of all
/// group VDOS curves over area under the pointwise maximum. Groups absent
/// from the structure simply do not participate.
pub fn overlap_s(profile: &SpectralProfile) -> Result<f64> {
    if profile.groups.len() < 2 {
        return Err(Error::Spectral(format!(
            "overlap metric needs at least 2 groups, got {}",
            profile.groups.len()
        )));
    }
    let n = profile.freq_thz.len();
    for (key, values) in &profile.groups {
        if values.len() != n {
            return Err(Error::Spectral(format!(
                "group {key} is not on the shared frequency grid"
            )));
        }
    }
    let mut min_env = vec![f64::INFINITY; n];
    let mut max_env = vec![f64::NEG_INFINITY; n];
    for (_, values) in &profile.groups {
        for (k, &v) in values.iter().enumerate() {
            min_env[k] = min_env[k].min(v);
            max_env[k] = max_env[k].max(v);
        }
    }
    let num = trapezoid(&profile.freq_thz, &min_env);
    let den = trapezoid(&profile.freq_thz, &max_env);
    if !(den > 0.0) {
        return Err(Error::Spectral(
            "zero max-envelope integral: S is undefined".into(),
        ));
    }
    Ok(num / den)
}
