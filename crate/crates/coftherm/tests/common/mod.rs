//! Shared fixtures for the integration suites.
//!
//! The harmonic-chain integrator exists only to manufacture trajectories
//! with a known analytic dispersion; it is a test fixture, not a
//! simulation feature of the library.

#![allow(dead_code)]

use coftherm::structio::{Structure, Trajectory};

/// 4-atom orthogonal honeycomb (graphene-like) carbon cell, C–C 1.42 Å.
pub fn honeycomb() -> Structure {
    let a = 1.42;
    let lx = 3.0 * a;
    let ly = 3.0f64.sqrt() * a;
    Structure::new(
        "honeycomb",
        [lx, ly, 10.0],
        [90.0; 3],
        vec![
            ("C".into(), [0.0, 0.0, 0.0]),
            ("C".into(), [a / lx, 0.0, 0.0]),
            ("C".into(), [1.5 * a / lx, 0.5, 0.0]),
            ("C".into(), [2.5 * a / lx, 0.5, 0.0]),
        ],
    )
    .unwrap()
}

/// Honeycomb with an −NO₂ group grafted on atom 1, positioned so the
/// graft sits in the cell interior.
pub fn honeycomb_no2() -> Structure {
    let a = 1.42;
    let lx = 3.0 * a;
    let ly = 3.0f64.sqrt() * a;
    Structure::new(
        "honeycomb_no2",
        [lx, ly, 10.0],
        [90.0; 3],
        vec![
            ("C".into(), [0.0, 0.0, 0.0]),
            ("C".into(), [a / lx, 0.0, 0.0]),
            ("C".into(), [1.5 * a / lx, 0.5, 0.0]),
            ("C".into(), [2.5 * a / lx, 0.5, 0.0]),
            ("N".into(), [a / lx, 0.0, 0.140]),
            ("O".into(), [(a + 1.0607) / lx, 0.0, 0.2012]),
            ("O".into(), [(a - 1.0607) / lx, 0.0, 0.2012]),
        ],
    )
    .unwrap()
}

/// One carbon per cell chained along x, with one dangling hydrogen.
pub fn chain_with_h() -> Structure {
    Structure::new(
        "chainH",
        [1.54, 10.0, 10.0],
        [90.0; 3],
        vec![
            ("C".into(), [0.0, 0.0, 0.0]),
            ("H".into(), [0.0, 0.109, 0.0]),
        ],
    )
    .unwrap()
}

/// One atom turning circles in the xy plane: each velocity component is
/// a cosine at `f0` (1/fs) and the exact VACF is cos(2π f0 τ dt).
pub fn phasor_trajectory(f0: f64, dt: f64, n: usize) -> Trajectory {
    let velocities = (0..n)
        .map(|t| {
            let phase = 2.0 * std::f64::consts::PI * f0 * (t as f64) * dt;
            vec![[phase.cos(), phase.sin(), 0.0]]
        })
        .collect();
    Trajectory {
        dt_sample: dt,
        timesteps: (0..n as u64).collect(),
        velocities,
        positions: None,
        box_lengths: [100.0; 3],
    }
}

pub struct ChainSpec {
    pub n_atoms: usize,
    /// spring constant in amu·fs⁻²
    pub k_spring: f64,
    /// atomic mass in amu
    pub mass: f64,
    /// lattice constant in Å
    pub a: f64,
    /// integration step in fs
    pub dt_integrate: f64,
    /// record every this many integration steps
    pub sample_every: usize,
    pub n_samples: usize,
    pub seed: u64,
}

/// Velocity-Verlet integration of a periodic 1D monoatomic harmonic
/// chain. Initial velocities put equal power into every normal mode
/// (random phases), so each pSED ridge is populated. Longitudinal
/// motion only; y and z stay zero.
pub fn harmonic_chain_trajectory(spec: &ChainSpec) -> Trajectory {
    let n = spec.n_atoms;
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n];

    // equal-amplitude normal modes with pseudo-random phases
    let mut state = spec.seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next_phase = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * std::f64::consts::PI
    };
    for kappa in 1..n {
        let phi = next_phase();
        for (j, vj) in v.iter_mut().enumerate() {
            let arg = 2.0 * std::f64::consts::PI * (kappa as f64) * (j as f64) / n as f64 + phi;
            *vj += 0.01 * arg.cos();
        }
    }

    let dt = spec.dt_integrate;
    let inv_m = 1.0 / spec.mass;
    let force = |u: &[f64], j: usize| -> f64 {
        let left = u[(j + n - 1) % n];
        let right = u[(j + 1) % n];
        spec.k_spring * (left - 2.0 * u[j] + right)
    };

    let mut velocities = Vec::with_capacity(spec.n_samples);
    let mut positions = Vec::with_capacity(spec.n_samples);
    let mut acc: Vec<f64> = (0..n).map(|j| force(&u, j) * inv_m).collect();
    let total_steps = spec.n_samples * spec.sample_every;
    for step in 0..total_steps {
        for j in 0..n {
            v[j] += 0.5 * dt * acc[j];
            u[j] += dt * v[j];
        }
        for j in 0..n {
            acc[j] = force(&u, j) * inv_m;
        }
        for j in 0..n {
            v[j] += 0.5 * dt * acc[j];
        }
        if (step + 1) % spec.sample_every == 0 {
            velocities.push((0..n).map(|j| [v[j], 0.0, 0.0]).collect());
            positions.push(
                (0..n)
                    .map(|j| [j as f64 * spec.a + u[j], 0.0, 0.0])
                    .collect(),
            );
        }
    }

    Trajectory {
        dt_sample: dt * spec.sample_every as f64,
        timesteps: (0..spec.n_samples as u64).collect(),
        velocities,
        positions: Some(positions),
        box_lengths: [spec.a * n as f64, 10.0, 10.0],
    }
}

/// Unit cell matching [`harmonic_chain_trajectory`].
pub fn chain_unit_cell(a: f64, mass_symbol: &str) -> Structure {
    Structure::new(
        "chain1d",
        [a, 10.0, 10.0],
        [90.0; 3],
        vec![(mass_symbol.into(), [0.0, 0.0, 0.0])],
    )
    .unwrap()
}
