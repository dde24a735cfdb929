//! NEMD bin-temperature profiles: a two-column CSV
//! (`bin_index,temperature_K`) plus a JSON sidecar carrying the setup.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// JSON sidecar schema (`<profile>.json` next to `<profile>.csv`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub n_bins: usize,
    pub source_bins: Vec<usize>,
    pub sink_bins: Vec<usize>,
    /// Heat rate dE/dt in kcal·mol⁻¹·fs⁻¹.
    pub de_dt_kcal_per_mol_fs: f64,
    /// Bin width along the transport axis in Å.
    pub bin_width_angstrom: f64,
    /// Cross-section perpendicular to transport in Å².
    pub cross_section_angstrom2: f64,
}

/// Binned steady-state temperature profile from an NEMD run.
#[derive(Debug, Clone, PartialEq)]
pub struct BinProfile {
    pub n_bins: usize,
    /// Mean temperature per bin in K; source/sink bins may be absent.
    pub temperature: Vec<Option<f64>>,
    pub source_bins: Vec<usize>,
    pub sink_bins: Vec<usize>,
    /// kcal·mol⁻¹·fs⁻¹
    pub de_dt: f64,
    /// Å
    pub bin_width: f64,
    /// Å²
    pub cross_section: f64,
}

impl BinProfile {
    pub fn new(
        meta: &ProfileMeta,
        temperatures: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let n = meta.n_bins;
        if n == 0 {
            return Err(Error::InvalidProfile("n_bins must be positive".into()));
        }
        if meta.source_bins.is_empty() || meta.sink_bins.is_empty() {
            return Err(Error::InvalidProfile(
                "source and sink bin sets must be nonempty".into(),
            ));
        }
        for &i in meta.source_bins.iter().chain(&meta.sink_bins) {
            if i >= n {
                return Err(Error::InvalidProfile(format!(
                    "bin index {i} out of range [0, {n})"
                )));
            }
        }
        if meta.source_bins.iter().any(|i| meta.sink_bins.contains(i)) {
            return Err(Error::InvalidProfile(
                "source and sink bin sets overlap".into(),
            ));
        }
        if !(meta.bin_width_angstrom > 0.0) || !(meta.cross_section_angstrom2 > 0.0) {
            return Err(Error::InvalidProfile(
                "bin width and cross-section must be positive".into(),
            ));
        }
        let mut temperature = vec![None; n];
        for (i, t) in temperatures {
            if i >= n {
                return Err(Error::InvalidProfile(format!(
                    "temperature row for bin {i} out of range [0, {n})"
                )));
            }
            if !(t > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "non-positive temperature {t} K in bin {i}"
                )));
            }
            if temperature[i].replace(t).is_some() {
                return Err(Error::InvalidProfile(format!("duplicate row for bin {i}")));
            }
        }
        for (i, t) in temperature.iter().enumerate() {
            let excluded = meta.source_bins.contains(&i) || meta.sink_bins.contains(&i);
            if t.is_none() && !excluded {
                return Err(Error::InvalidProfile(format!("missing bin {i}")));
            }
        }
        Ok(BinProfile {
            n_bins: n,
            temperature,
            source_bins: meta.source_bins.clone(),
            sink_bins: meta.sink_bins.clone(),
            de_dt: meta.de_dt_kcal_per_mol_fs,
            bin_width: meta.bin_width_angstrom,
            cross_section: meta.cross_section_angstrom2,
        })
    }

    /// Bin-center position in Å: (i + 0.5) × bin width.
    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.bin_width
    }

    pub fn meta(&self) -> ProfileMeta {
        ProfileMeta {
            n_bins: self.n_bins,
            source_bins: self.source_bins.clone(),
            sink_bins: self.sink_bins.clone(),
            de_dt_kcal_per_mol_fs: self.de_dt,
            bin_width_angstrom: self.bin_width,
            cross_section_angstrom2: self.cross_section,
        }
    }
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn parse_bin_profile(csv_path: &Path) -> Result<BinProfile> {
    let meta_path = sidecar_path(csv_path);
    let meta_text =
        std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: ProfileMeta = serde_json::from_str(&meta_text)
        .map_err(|e| Error::InvalidProfile(format!("{}: {e}", meta_path.display())))?;

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(csv_path)
        .map_err(|e| Error::InvalidProfile(format!("{}: {e}", csv_path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidProfile(e.to_string()))?
        .clone();
    let want = ["bin_index", "temperature_K"];
    if headers.len() < 2 || headers.iter().take(2).ne(want) {
        return Err(Error::InvalidProfile(format!(
            "{}: header must be bin_index,temperature_K",
            csv_path.display()
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidProfile(e.to_string()))?;
        let i: usize = record[0]
            .parse()
            .map_err(|_| Error::InvalidProfile(format!("bad bin index {:?}", &record[0])))?;
        let t: f64 = record[1]
            .parse()
            .map_err(|_| Error::InvalidProfile(format!("bad temperature {:?}", &record[1])))?;
        rows.push((i, t));
    }
    BinProfile::new(&meta, rows)
}

/// Write `<path>.csv` and the `<path>.json` sidecar.
pub fn write_bin_profile(p: &BinProfile, csv_path: &Path) -> Result<()> {
    let mut out = String::from("bin_index,temperature_K\n");
    for (i, t) in p.temperature.iter().enumerate() {
        if let Some(t) = t {
            out += &format!("{i},{t}\n");
        }
    }
    std::fs::write(csv_path, out).map_err(|e| Error::io(csv_path, e))?;
    let meta_path = sidecar_path(csv_path);
    let meta = serde_json::to_string_pretty(&p.meta())
        .map_err(|e| Error::InvalidProfile(e.to_string()))?;
    std::fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
    Ok(())
}
