//! Analysis toolkit for thermal transport in covalent organic frameworks.
//!
//! The crate covers the non-simulation half of a COF thermal-conductivity
//! study: parsing crystal structures and MD output, classifying dangling
//! branches on the periodic bond graph, extracting thermal conductivity
//! from NEMD temperature profiles, spectral analysis (VACF, VDOS, overlap
//! metric, phonon spectral energy density), attention-tensor aggregation,
//! and random-forest feature-importance analytics.
//!
//! Modules mirror the analysis stages:
//!
//! - [`structio`]: CIF-subset / extended-XYZ structures, LAMMPS-style
//!   dumps, NEMD bin profiles
//! - [`bondgraph`]: periodic covalent bond graph with image shifts
//! - [`dangling`]: main-branch vs. dangling classification and the
//!   dangling mass ratio (DMR)
//! - [`nemd`]: Fourier-law conductivity extraction and anisotropy stats
//! - [`spectral`]: VACF/VDOS, the VDOS overlap metric, and pSED maps
//! - [`attention`]: attention-stack container and rollout aggregation
//! - [`mlkit`]: Pearson correlation, random-forest regression, Gini and
//!   permutation importance, k-fold cross-validation

// `!(x > 0.0)` guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attention;
pub mod bondgraph;
pub mod dangling;
pub mod elements;
mod error;
pub mod mlkit;
pub mod nemd;
pub mod spectral;
pub mod structio;

pub use error::{Error, Result};
