//! Phonon spectral energy density along one supercell axis:
//!
//! Φ(q, ω) = (1 / 4πτ₀N_T) Σ_α Σ_b m_b |Σ_n ∫ u̇_α(n,b;t) e^{i q·r(n,0) − iωt} dt|²
//!
//! The time integral is an FFT over frames, the q grid is
//! q_κ = 2πκ/(N_T·a) for κ = 0..N_T−1 (reported as the fraction κ/N_T),
//! and r(n,0) = n·a is the equilibrium position of unit cell n.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::structio::{Structure, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(&self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis {other:?}"))),
        }
    }
}

/// Wave-vector- and frequency-resolved spectral energy density.
#[derive(Debug, Clone)]
pub struct PsedMap {
    /// q as a fraction of the supercell reciprocal axis: κ/N_T.
    pub q_frac: Vec<f64>,
    pub freq_thz: Vec<f64>,
    /// `values[q][freq]`, ≥ 0, in amu·Å²·fs (arbitrary consistent units).
    pub values: Vec<Vec<f64>>,
}

/// Assign each supercell atom to (cell index n, basis atom b) by its
/// first-frame position. Errors when an atom sits farther than half a
/// unit cell from every lattice site or two atoms claim one site.
fn assign_cells(
    t: &Trajectory,
    s: &Structure,
    n_cells: usize,
    axis: usize,
) -> Result<Vec<Vec<usize>>> {
    let positions = t
        .positions
        .as_ref()
        .ok_or_else(|| Error::Spectral("pSED needs a trajectory with positions".into()))?;
    let first = &positions[0];
    let b_atoms = s.n_atoms();
    let a = s.cell_lengths[axis];
    let mut super_lengths = s.cell_lengths;
    super_lengths[axis] *= n_cells as f64;

    // slots[n][b] = trajectory atom index
    let mut slots: Vec<Vec<Option<usize>>> = vec![vec![None; b_atoms]; n_cells];
    for (atom, pos) in first.iter().enumerate() {
        let mut best: Option<(f64, usize, i64)> = None;
        for b in 0..b_atoms {
            let site = s.cart(b);
            let mut d2 = 0.0;
            // transverse: minimum image over the supercell box
            for k in 0..3 {
                if k == axis {
                    continue;
                }
                let mut d = (pos[k] - site[k]) % super_lengths[k];
                if d > super_lengths[k] / 2.0 {
                    d -= super_lengths[k];
                }
                if d < -super_lengths[k] / 2.0 {
                    d += super_lengths[k];
                }
                d2 += d * d;
            }
            let delta = pos[axis] - site[axis];
            let n_real = delta / a;
            let n = n_real.round();
            let d_axis = delta - n * a;
            let d2_total = d2 + d_axis * d_axis;
            if best.is_none_or(|(bd, _, _)| d2_total < bd) {
                best = Some((d2_total, b, n as i64));
            }
        }
        let (d2, b, n) = best.unwrap();
        if d2.sqrt() > a / 2.0 {
            return Err(Error::Spectral(format!(
                "atom {atom} is {:.3} Å from every lattice site (> a/2 = {:.3})",
                d2.sqrt(),
                a / 2.0
            )));
        }
        let n = n.rem_euclid(n_cells as i64) as usize;
        if slots[n][b].replace(atom).is_some() {
            return Err(Error::Spectral(format!(
                "two atoms assigned to unit cell {n}, basis site {b}"
            )));
        }
    }
    slots
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(b, slot)| {
                    slot.ok_or_else(|| {
                        Error::Spectral(format!("no atom assigned to basis site {b}"))
                    })
                })
                .collect()
        })
        .collect()
}

/// Compute the pSED map. The trajectory must cover the supercell built by
/// replicating `s` `n_cells` times along `axis`.
pub fn psed(t: &Trajectory, s: &Structure, n_cells: usize, axis: Axis) -> Result<PsedMap> {
    if n_cells < 2 {
        return Err(Error::Spectral(format!(
            "need at least 2 unit cells along the axis, got {n_cells}"
        )));
    }
    t.validate()?;
    if t.n_atoms() != s.n_atoms() * n_cells {
        return Err(Error::Spectral(format!(
            "trajectory has {} atoms, expected {} (= {} basis × {} cells)",
            t.n_atoms(),
            s.n_atoms() * n_cells,
            s.n_atoms(),
            n_cells
        )));
    }
    let ax = axis.index();
    let slots = assign_cells(t, s, n_cells, ax)?;

    let n_frames = t.n_frames();
    let n_freq = n_frames / 2 + 1;
    let dt = t.dt_sample;
    let tau0 = n_frames as f64 * dt;
    let norm = 1.0 / (4.0 * std::f64::consts::PI * tau0 * n_cells as f64);

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n_frames);

    // phase[κ][n] = exp(+i 2π κ n / N_T)
    let phases: Vec<Vec<Complex<f64>>> = (0..n_cells)
        .map(|kappa| {
            (0..n_cells)
                .map(|n| {
                    let arg =
                        2.0 * std::f64::consts::PI * (kappa as f64) * (n as f64) / n_cells as f64;
                    Complex::new(arg.cos(), arg.sin())
                })
                .collect()
        })
        .collect();

    let b_atoms = s.n_atoms();
    let per_basis: Vec<Vec<Vec<f64>>> = (0..b_atoms)
        .into_par_iter()
        .map(|b| {
            let mass = s.atoms[b].mass;
            let mut acc = vec![vec![0.0f64; n_freq]; n_cells];
            for alpha in 0..3 {
                // FFT of each cell's velocity series for this (b, α)
                let spectra: Vec<Vec<Complex<f64>>> = (0..n_cells)
                    .map(|n| {
                        let atom = slots[n][b];
                        let mut buf: Vec<Complex<f64>> = (0..n_frames)
                            .map(|f| Complex::new(t.velocities[f][atom][alpha], 0.0))
                            .collect();
                        fft.process(&mut buf);
                        buf.truncate(n_freq);
                        buf
                    })
                    .collect();
                for (kappa, acc_q) in acc.iter_mut().enumerate() {
                    let phase = &phases[kappa];
                    for k in 0..n_freq {
                        let mut sum = Complex::new(0.0, 0.0);
                        for n in 0..n_cells {
                            sum += spectra[n][k] * phase[n];
                        }
                        // ∫ dt ≈ Δt Σ; |Δt Σ|² = Δt² |Σ|²
                        acc_q[k] += mass * (sum * dt).norm_sqr();
                    }
                }
            }
            acc
        })
        .collect();

    let mut values = vec![vec![0.0f64; n_freq]; n_cells];
    for acc in per_basis {
        for (q, row) in acc.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                values[q][k] += v * norm;
            }
        }
    }

    let df = 1e3 / (n_frames as f64 * dt);
    Ok(PsedMap {
        q_frac: (0..n_cells).map(|k| k as f64 / n_cells as f64).collect(),
        freq_thz: (0..n_freq).map(|k| k as f64 * df).collect(),
        values,
    })
}

/// Log-scale plot data with the color-scale convention used for pSED
/// maps: lower bound = min over both maps, upper bound = 99th percentile
/// (nearest-rank) over both maps, of the positive log₁₀ values.
#[derive(Debug, Clone)]
pub struct PsedPlotData {
    /// log₁₀ of the map (−∞ where the value is zero).
    pub log10: Vec<Vec<f64>>,
    pub log10_pair: Option<Vec<Vec<f64>>>,
    pub lower: f64,
    pub upper: f64,
}

pub fn emit_psed_plotdata(m: &PsedMap, pair: Option<&PsedMap>) -> Result<PsedPlotData> {
    let log_map = |map: &PsedMap| -> Vec<Vec<f64>> {
        map.values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| if v > 0.0 { v.log10() } else { f64::NEG_INFINITY })
                    .collect()
            })
            .collect()
    };
    let log10 = log_map(m);
    let log10_pair = pair.map(log_map);

    let mut pool: Vec<f64> = log10
        .iter()
        .chain(log10_pair.iter().flatten())
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    if pool.is_empty() {
        return Err(Error::Spectral(
            "all-zero pSED map: log scale is undefined".into(),
        ));
    }
    pool.sort_by(f64::total_cmp);
    let lower = pool[0];
    let upper = percentile_nearest_rank(&pool, 99.0);
    Ok(PsedPlotData {
        log10,
        log10_pair,
        lower,
        upper,
    })
}

/// Nearest-rank percentile of an ascending-sorted slice.
pub(crate) fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_cell() -> Structure {
        Structure::new(
            "chain",
            [2.0, 10.0, 10.0],
            [90.0; 3],
            vec![("C".to_string(), [0.0, 0.0, 0.0])],
        )
        .unwrap()
    }

    /// supercell trajectory with given per-atom velocity series
    fn chain_trajectory(
        n_cells: usize,
        n_frames: usize,
        dt: f64,
        vel: impl Fn(usize, usize) -> f64, // (cell, frame) -> vx
    ) -> Trajectory {
        let a = 2.0;
        let positions: Vec<Vec<[f64; 3]>> = (0..n_frames)
            .map(|_| (0..n_cells).map(|n| [n as f64 * a, 0.0, 0.0]).collect())
            .collect();
        let velocities: Vec<Vec<[f64; 3]>> = (0..n_frames)
            .map(|f| (0..n_cells).map(|n| [vel(n, f), 0.0, 0.0]).collect())
            .collect();
        Trajectory {
            dt_sample: dt,
            timesteps: (0..n_frames as u64).collect(),
            velocities,
            positions: Some(positions),
            box_lengths: [a * n_cells as f64, 10.0, 10.0],
        }
    }

    #[test]
    fn all_zero_velocities_give_zero_map() {
        let s = unit_cell();
        let t = chain_trajectory(4, 64, 5.0, |_, _| 0.0);
        let map = psed(&t, &s, 4, Axis::X).unwrap();
        for row in &map.values {
            for &v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn map_dimensions() {
        let s = unit_cell();
        let t = chain_trajectory(4, 64, 5.0, |n, f| (n + f) as f64 * 0.01);
        let map = psed(&t, &s, 4, Axis::X).unwrap();
        assert_eq!(map.q_frac.len(), 4);
        assert_eq!(map.freq_thz.len(), 33);
        assert_eq!(map.values.len(), 4);
        assert_eq!(map.values[0].len(), 33);
        assert!(map.values.iter().flatten().all(|&v| v >= 0.0));
    }

    #[test]
    fn single_cell_is_rejected() {
        let s = unit_cell();
        let t = chain_trajectory(1, 64, 5.0, |_, _| 0.0);
        assert!(matches!(psed(&t, &s, 1, Axis::X), Err(Error::Spectral(_))));
    }

    #[test]
    fn misplaced_atom_is_rejected() {
        let s = unit_cell();
        let mut t = chain_trajectory(4, 8, 5.0, |_, _| 0.1);
        t.positions.as_mut().unwrap()[0][2][0] += 1.3; // > a/2 = 1.0 off-site
        assert!(matches!(psed(&t, &s, 4, Axis::X), Err(Error::Spectral(_))));
    }

    // independent route: at q = 0 the phase factor is 1, so Φ(0,ω) is the
    // mass-weighted power spectrum of the cell-summed velocity, computed
    // here with a direct O(N²) DFT
    #[test]
    fn q0_column_equals_total_velocity_power_spectrum() {
        let s = unit_cell();
        let n_cells = 4;
        let n_frames = 128;
        let dt = 5.0;
        let t = chain_trajectory(n_cells, n_frames, dt, |n, f| {
            (0.3 * (f as f64) + 0.7 * (n as f64)).sin()
        });
        let map = psed(&t, &s, n_cells, Axis::X).unwrap();

        let mass = 12.011;
        let tau0 = n_frames as f64 * dt;
        let norm = 1.0 / (4.0 * std::f64::consts::PI * tau0 * n_cells as f64);
        for k in 0..map.freq_thz.len() {
            let mut re = 0.0;
            let mut im = 0.0;
            for f in 0..n_frames {
                let total: f64 = (0..n_cells)
                    .map(|n| t.velocities[f][n][0])
                    .sum();
                let arg = -2.0 * std::f64::consts::PI * (k as f64) * (f as f64) / n_frames as f64;
                re += total * arg.cos();
                im += total * arg.sin();
            }
            let expect = mass * (re * re + im * im) * dt * dt * norm;
            assert_relative_eq!(map.values[0][k], expect, max_relative = 1e-8, epsilon = 1e-12);
        }
    }

    #[test]
    fn velocity_sign_flip_leaves_map_unchanged() {
        let s = unit_cell();
        let t = chain_trajectory(4, 64, 5.0, |n, f| ((n * 7 + f) as f64 * 0.37).sin());
        let mut flipped = t.clone();
        for frame in &mut flipped.velocities {
            for v in frame {
                for c in v {
                    *c = -*c;
                }
            }
        }
        let a = psed(&t, &s, 4, Axis::X).unwrap();
        let b = psed(&flipped, &s, 4, Axis::X).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (x, y) in ra.iter().zip(rb) {
                assert_relative_eq!(x, y, max_relative = 1e-12, epsilon = 1e-300);
            }
        }
    }

    #[test]
    fn uniform_map_gives_equal_bounds() {
        let map = PsedMap {
            q_frac: vec![0.0],
            freq_thz: vec![0.0, 1.0],
            values: vec![vec![10.0, 10.0]],
        };
        let plot = emit_psed_plotdata(&map, None).unwrap();
        assert_relative_eq!(plot.lower, 1.0);
        assert_relative_eq!(plot.upper, 1.0);
    }

    #[test]
    fn pair_lower_bound_is_the_joint_minimum() {
        let m1 = PsedMap {
            q_frac: vec![0.0],
            freq_thz: vec![0.0, 1.0],
            values: vec![vec![1.0, 100.0]],
        };
        let m2 = PsedMap {
            q_frac: vec![0.0],
            freq_thz: vec![0.0, 1.0],
            values: vec![vec![10.0, 1000.0]],
        };
        let plot = emit_psed_plotdata(&m1, Some(&m2)).unwrap();
        assert_relative_eq!(plot.lower, 0.0); // log10(1)
    }

    #[test]
    fn all_zero_map_is_an_error() {
        let map = PsedMap {
            q_frac: vec![0.0],
            freq_thz: vec![0.0],
            values: vec![vec![0.0]],
        };
        assert!(emit_psed_plotdata(&map, None).is_err());
    }

    // sort-free oracle: count how many values are ≤ the reported bound
    #[test]
    fn percentile_matches_counting_oracle() {
        let mut state = 42u64;
        let mut vals: Vec<f64> = (0..10_000)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect();
        vals.sort_by(f64::total_cmp);
        let p99 = percentile_nearest_rank(&vals, 99.0);
        let count_le = vals.iter().filter(|&&v| v <= p99).count();
        let count_lt = vals.iter().filter(|&&v| v < p99).count();
        // nearest-rank: at least 99% of values ≤ p99, fewer than 99% < p99
        assert!(count_le >= 9900);
        assert!(count_lt < 9900);
    }
}
