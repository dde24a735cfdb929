//! Structure, trajectory, and bin-profile I/O.
//!
//! Supported text formats:
//! - a strict CIF subset (P1 cells: `_cell_*` parameters plus an
//!   `_atom_site_*` loop with fractional coordinates)
//! - extended XYZ with a diagonal `Lattice="..."` comment line
//! - LAMMPS-style `ITEM:` dump files for velocities/positions
//! - bin-temperature CSV with a JSON sidecar describing the NEMD setup
//!
//! All parsers are pure functions; parsed values are immutable.

mod binprofile;
mod cif;
mod dump;
mod xyz;

pub use binprofile::{parse_bin_profile, write_bin_profile, BinProfile, ProfileMeta};
pub use dump::{parse_trajectory, parse_trajectory_str, write_trajectory, Trajectory};

use std::path::Path;

use crate::elements::atomic_mass;
use crate::{Error, Result};

/// One atom site: element symbol, tabulated mass, fractional coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub symbol: String,
    pub mass: f64,
    pub frac: [f64; 3],
}

/// A P1 crystal structure in an orthogonal periodic cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    pub name: String,
    /// (a, b, c) in Å.
    pub cell_lengths: [f64; 3],
    /// (α, β, γ) in degrees; orthogonal cells only.
    pub cell_angles: [f64; 3],
    pub atoms: Vec<Atom>,
}

/// Wrap a fractional coordinate into [0, 1).
pub fn wrap_frac(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

const ORTHO_ANGLE_TOL: f64 = 1e-6;

impl Structure {
    /// Build a validated structure from raw sites. Fractional coordinates
    /// are wrapped into [0, 1); masses come from the element table.
    pub fn new(
        name: impl Into<String>,
        cell_lengths: [f64; 3],
        cell_angles: [f64; 3],
        sites: Vec<(String, [f64; 3])>,
    ) -> Result<Self> {
        for (axis, &l) in ["a", "b", "c"].iter().zip(&cell_lengths) {
            if !(l > 0.0) {
                return Err(Error::InvalidStructure(format!(
                    "cell length {axis} must be positive, got {l}"
                )));
            }
        }
        for (axis, &ang) in ["alpha", "beta", "gamma"].iter().zip(&cell_angles) {
            if (ang - 90.0).abs() > ORTHO_ANGLE_TOL {
                return Err(Error::InvalidStructure(format!(
                    "non-orthogonal cell: angle {axis} = {ang}° (only 90° cells are supported; \
                     orthogonalize upstream)"
                )));
            }
        }
        let atoms = sites
            .into_iter()
            .map(|(symbol, frac)| {
                let mass = atomic_mass(&symbol)?;
                Ok(Atom {
                    symbol,
                    mass,
                    frac: [wrap_frac(frac[0]), wrap_frac(frac[1]), wrap_frac(frac[2])],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Structure {
            name: name.into(),
            cell_lengths,
            cell_angles,
            atoms,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Cartesian coordinates of atom `i` in Å.
    pub fn cart(&self, i: usize) -> [f64; 3] {
        let f = self.atoms[i].frac;
        [
            f[0] * self.cell_lengths[0],
            f[1] * self.cell_lengths[1],
            f[2] * self.cell_lengths[2],
        ]
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Cell volume in Å³.
    pub fn volume(&self) -> f64 {
        self.cell_lengths[0] * self.cell_lengths[1] * self.cell_lengths[2]
    }

    /// Mass density in g·cm⁻³ (1 amu·Å⁻³ = 1.66053906660 g·cm⁻³).
    pub fn density(&self) -> f64 {
        const AMU_PER_A3_TO_G_PER_CM3: f64 = 1.66053906660;
        self.total_mass() / self.volume() * AMU_PER_A3_TO_G_PER_CM3
    }

    /// Replicate the cell `nx × ny × nz` times. Atom order: replica-major,
    /// cells enumerated x-fastest, original atom order within each replica.
    pub fn supercell(&self, nx: usize, ny: usize, nz: usize) -> Result<Structure> {
        if nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::InvalidArgument(
                "supercell repetitions must be positive".into(),
            ));
        }
        let (fx, fy, fz) = (nx as f64, ny as f64, nz as f64);
        let mut sites = Vec::with_capacity(self.n_atoms() * nx * ny * nz);
        for kz in 0..nz {
            for ky in 0..ny {
                for kx in 0..nx {
                    for atom in &self.atoms {
                        sites.push((
                            atom.symbol.clone(),
                            [
                                (atom.frac[0] + kx as f64) / fx,
                                (atom.frac[1] + ky as f64) / fy,
                                (atom.frac[2] + kz as f64) / fz,
                            ],
                        ));
                    }
                }
            }
        }
        Structure::new(
            format!("{}_{}x{}x{}", self.name, nx, ny, nz),
            [
                self.cell_lengths[0] * fx,
                self.cell_lengths[1] * fy,
                self.cell_lengths[2] * fz,
            ],
            self.cell_angles,
            sites,
        )
    }
}

/// Structure file formats understood by [`parse_structure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureFormat {
    CifSubset,
    XyzExtended,
}

impl StructureFormat {
    /// Guess from the file extension (`.cif` vs `.xyz`/`.extxyz`).
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("cif") => Ok(StructureFormat::CifSubset),
            Some("xyz") | Some("extxyz") => Ok(StructureFormat::XyzExtended),
            other => Err(Error::InvalidArgument(format!(
                "cannot infer structure format from extension {other:?}; pass it explicitly"
            ))),
        }
    }
}

pub fn parse_structure(path: &Path, format: StructureFormat) -> Result<Structure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("structure")
        .to_string();
    parse_structure_str(&text, format, &path.display().to_string(), &name)
}

/// Parse from an in-memory string; `origin` is used in error messages.
pub fn parse_structure_str(
    text: &str,
    format: StructureFormat,
    origin: &str,
    fallback_name: &str,
) -> Result<Structure> {
    match format {
        StructureFormat::CifSubset => cif::parse(text, origin, fallback_name),
        StructureFormat::XyzExtended => xyz::parse(text, origin, fallback_name),
    }
}

pub fn write_structure(s: &Structure, format: StructureFormat) -> String {
    match format {
        StructureFormat::CifSubset => cif::write(s),
        StructureFormat::XyzExtended => xyz::write(s, None),
    }
}

/// Extended-XYZ text with one extra per-atom string column (e.g. branch
/// labels or attention scores).
pub fn write_xyz_with_column(s: &Structure, column_name: &str, values: &[String]) -> String {
    xyz::write(s, Some((column_name, values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wrapping_examples() {
        assert_relative_eq!(wrap_frac(1.25), 0.25);
        assert_relative_eq!(wrap_frac(-0.25), 0.75);
        assert_eq!(wrap_frac(1.0), 0.0);
        assert_eq!(wrap_frac(0.0), 0.0);
        assert!(wrap_frac(-1e-300) < 1.0);
    }

    #[test]
    fn wrapping_is_idempotent() {
        for &x in &[1.25, -0.25, 0.5, 3.75, -2.5, 0.999999, 1e9 + 0.125] {
            let once = wrap_frac(x);
            assert_eq!(wrap_frac(once), once);
        }
    }

    #[test]
    fn rejects_nonpositive_cell() {
        let err = Structure::new("t", [0.0, 10.0, 10.0], [90.0; 3], vec![]);
        assert!(matches!(err, Err(Error::InvalidStructure(_))));
    }

    #[test]
    fn rejects_nonorthogonal_cell() {
        let err = Structure::new("t", [10.0; 3], [90.0, 90.0, 120.0], vec![]);
        assert!(matches!(err, Err(Error::InvalidStructure(_))));
    }

    #[test]
    fn accepts_angle_within_tolerance() {
        let s = Structure::new("t", [10.0; 3], [90.0, 90.0 + 5e-7, 90.0], vec![]).unwrap();
        assert_eq!(s.cell_angles[1], 90.0 + 5e-7);
    }

    #[test]
    fn density_of_single_carbon_cell() {
        let s = Structure::new(
            "c",
            [10.0; 3],
            [90.0; 3],
            vec![("C".into(), [0.0, 0.0, 0.0])],
        )
        .unwrap();
        // 12.011 amu / 1000 Å³ × 1.66053906660
        assert_relative_eq!(s.density(), 12.011 / 1000.0 * 1.66053906660, epsilon = 1e-12);
    }

    #[test]
    fn supercell_scales_mass_and_volume() {
        let s = Structure::new(
            "c",
            [10.0, 11.0, 12.0],
            [90.0; 3],
            vec![
                ("C".into(), [0.1, 0.2, 0.3]),
                ("H".into(), [0.6, 0.7, 0.8]),
            ],
        )
        .unwrap();
        let sc = s.supercell(2, 3, 1).unwrap();
        assert_eq!(sc.n_atoms(), 12);
        assert_relative_eq!(sc.total_mass(), 6.0 * s.total_mass());
        assert_relative_eq!(sc.volume(), 6.0 * s.volume());
        assert_relative_eq!(sc.density(), s.density(), epsilon = 1e-12);
    }
}
