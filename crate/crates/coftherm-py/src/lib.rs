//! Python bindings for the coftherm toolkit.
//!
//! Build with `cargo build -p coftherm-py --release` and import the
//! produced cdylib as `coftherm_py` (see python/smoke_test.py).

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use coftherm::{attention, bondgraph, dangling, mlkit, nemd, spectral, structio};

fn err(e: coftherm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// ----------------------------------------------------------- structures

#[pyclass(name = "Structure")]
struct PyStructure {
    inner: structio::Structure,
}

#[pymethods]
impl PyStructure {
    #[new]
    fn new(
        name: String,
        cell_lengths: (f64, f64, f64),
        sites: Vec<(String, (f64, f64, f64))>,
    ) -> PyResult<Self> {
        let inner = structio::Structure::new(
            name,
            [cell_lengths.0, cell_lengths.1, cell_lengths.2],
            [90.0, 90.0, 90.0],
            sites
                .into_iter()
                .map(|(sym, f)| (sym, [f.0, f.1, f.2]))
                .collect(),
        )
        .map_err(err)?;
        Ok(PyStructure { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    #[getter]
    fn cell_lengths(&self) -> (f64, f64, f64) {
        let l = self.inner.cell_lengths;
        (l[0], l[1], l[2])
    }

    #[getter]
    fn symbols(&self) -> Vec<String> {
        self.inner.atoms.iter().map(|a| a.symbol.clone()).collect()
    }

    #[getter]
    fn masses(&self) -> Vec<f64> {
        self.inner.atoms.iter().map(|a| a.mass).collect()
    }

    #[getter]
    fn frac_coords(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .atoms
            .iter()
            .map(|a| (a.frac[0], a.frac[1], a.frac[2]))
            .collect()
    }

    fn cart_coords(&self) -> Vec<(f64, f64, f64)> {
        (0..self.inner.n_atoms())
            .map(|i| {
                let c = self.inner.cart(i);
                (c[0], c[1], c[2])
            })
            .collect()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn density(&self) -> f64 {
        self.inner.density()
    }

    fn supercell(&self, nx: usize, ny: usize, nz: usize) -> PyResult<PyStructure> {
        Ok(PyStructure {
            inner: self.inner.supercell(nx, ny, nz).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Structure(name={:?}, n_atoms={})",
            self.inner.name,
            self.inner.n_atoms()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (path, format=None))]
fn parse_structure(path: PathBuf, format: Option<&str>) -> PyResult<PyStructure> {
    let fmt = match format {
        Some("cif") => structio::StructureFormat::CifSubset,
        Some("xyz") => structio::StructureFormat::XyzExtended,
        Some(other) => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
        None => structio::StructureFormat::from_path(&path).map_err(err)?,
    };
    Ok(PyStructure {
        inner: structio::parse_structure(&path, fmt).map_err(err)?,
    })
}

#[pyfunction]
fn write_structure_cif(s: &PyStructure) -> String {
    structio::write_structure(&s.inner, structio::StructureFormat::CifSubset)
}

#[pyclass(name = "Trajectory")]
struct PyTrajectory {
    inner: structio::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn n_frames(&self) -> usize {
        self.inner.n_frames()
    }

    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    #[getter]
    fn dt_sample(&self) -> f64 {
        self.inner.dt_sample
    }

    #[getter]
    fn has_positions(&self) -> bool {
        self.inner.positions.is_some()
    }
}

#[pyfunction]
fn parse_trajectory(path: PathBuf, fs_per_step: f64) -> PyResult<PyTrajectory> {
    Ok(PyTrajectory {
        inner: structio::parse_trajectory(&path, fs_per_step).map_err(err)?,
    })
}

/// Build a trajectory from in-memory arrays (velocities in Å/fs).
#[pyfunction]
#[pyo3(signature = (dt_sample, velocities, positions=None, box_lengths=(100.0, 100.0, 100.0)))]
fn trajectory_from_arrays(
    dt_sample: f64,
    velocities: Vec<Vec<(f64, f64, f64)>>,
    positions: Option<Vec<Vec<(f64, f64, f64)>>>,
    box_lengths: (f64, f64, f64),
) -> PyResult<PyTrajectory> {
    let convert = |frames: Vec<Vec<(f64, f64, f64)>>| -> Vec<Vec<[f64; 3]>> {
        frames
            .into_iter()
            .map(|f| f.into_iter().map(|(x, y, z)| [x, y, z]).collect())
            .collect()
    };
    let n = velocities.len();
    let inner = structio::Trajectory {
        dt_sample,
        timesteps: (0..n as u64).collect(),
        velocities: convert(velocities),
        positions: positions.map(convert),
        box_lengths: [box_lengths.0, box_lengths.1, box_lengths.2],
    };
    inner.validate().map_err(err)?;
    Ok(PyTrajectory { inner })
}

// ------------------------------------------------------------- bonding

#[pyclass(name = "BondGraph")]
struct PyBondGraph {
    inner: bondgraph::BondGraph,
}

/// (neighbor, image shift, bond length)
type PyEdge = (usize, (i32, i32, i32), f64);
/// (i, j, image shift, bond length)
type PyUndirectedEdge = (usize, usize, (i32, i32, i32), f64);

#[pymethods]
impl PyBondGraph {
    #[getter]
    fn n_atoms(&self) -> usize {
        self.inner.n_atoms()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.n_edges()
    }

    fn boundary_atoms(&self) -> Vec<usize> {
        self.inner.boundary_atoms()
    }

    fn neighbors(&self, i: usize) -> Vec<PyEdge> {
        self.inner
            .neighbors(i)
            .iter()
            .map(|e| (e.neighbor, (e.shift[0], e.shift[1], e.shift[2]), e.length))
            .collect()
    }

    fn edges(&self) -> Vec<PyUndirectedEdge> {
        self.inner
            .undirected_edges()
            .into_iter()
            .map(|(i, j, s, l)| (i, j, (s[0], s[1], s[2]), l))
            .collect()
    }

    fn edge_csv(&self) -> String {
        self.inner.to_edge_csv()
    }
}

#[pyfunction]
#[pyo3(signature = (structure, scale=1.15))]
fn build_bond_graph(structure: &PyStructure, scale: f64) -> PyResult<PyBondGraph> {
    Ok(PyBondGraph {
        inner: bondgraph::build_bond_graph(&structure.inner, scale).map_err(err)?,
    })
}

#[pyclass(name = "BranchLabeling")]
struct PyBranchLabeling {
    inner: dangling::BranchLabeling,
}

#[pymethods]
impl PyBranchLabeling {
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner
            .labels
            .iter()
            .map(|l| l.as_str().to_string())
            .collect()
    }

    #[getter]
    fn dmr(&self) -> f64 {
        self.inner.dmr
    }

    #[getter]
    fn main_branch_atom_count(&self) -> usize {
        self.inner.main_branch_atom_count
    }

    #[getter]
    fn dangling_mass(&self) -> f64 {
        self.inner.dangling_mass
    }

    #[getter]
    fn total_mass(&self) -> f64 {
        self.inner.total_mass
    }
}

#[pyfunction]
fn classify_branches(graph: &PyBondGraph, structure: &PyStructure) -> PyResult<PyBranchLabeling> {
    Ok(PyBranchLabeling {
        inner: dangling::classify_branches(&graph.inner, &structure.inner).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (graph, max_size=8))]
fn find_rings(graph: &PyBondGraph, max_size: usize) -> PyResult<Vec<Vec<usize>>> {
    dangling::find_rings(&graph.inner, max_size).map_err(err)
}

/// DMR with dangling hydrogens optionally excluded from the numerator.
#[pyfunction]
#[pyo3(signature = (labeling, structure, count_hydrogen=true))]
fn compute_dmr(
    labeling: &PyBranchLabeling,
    structure: &PyStructure,
    count_hydrogen: bool,
) -> PyResult<f64> {
    dangling::compute_dmr_with(&labeling.inner.labels, &structure.inner, count_hydrogen)
        .map_err(err)
}

// ----------------------------------------------------------------- nemd

#[pyclass(name = "BinProfile")]
struct PyBinProfile {
    inner: structio::BinProfile,
}

#[pymethods]
impl PyBinProfile {
    #[getter]
    fn n_bins(&self) -> usize {
        self.inner.n_bins
    }

    #[getter]
    fn de_dt(&self) -> f64 {
        self.inner.de_dt
    }
}

#[pyfunction]
fn parse_bin_profile(path: PathBuf) -> PyResult<PyBinProfile> {
    Ok(PyBinProfile {
        inner: structio::parse_bin_profile(&path).map_err(err)?,
    })
}

#[pyclass(name = "KappaResult")]
struct PyKappaResult {
    inner: nemd::KappaResult,
}

#[pymethods]
impl PyKappaResult {
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn slope_left(&self) -> f64 {
        self.inner.slope_left
    }

    #[getter]
    fn slope_right(&self) -> f64 {
        self.inner.slope_right
    }

    #[getter]
    fn fit_r2_left(&self) -> f64 {
        self.inner.fit_r2_left
    }

    #[getter]
    fn fit_r2_right(&self) -> f64 {
        self.inner.fit_r2_right
    }

    #[getter]
    fn de_dt_watts(&self) -> f64 {
        self.inner.de_dt_watts
    }
}

#[pyfunction]
#[pyo3(signature = (profile, trim=0))]
fn extract_kappa(profile: &PyBinProfile, trim: usize) -> PyResult<PyKappaResult> {
    Ok(PyKappaResult {
        inner: nemd::extract_kappa_trimmed(&profile.inner, trim).map_err(err)?,
    })
}

#[pyfunction]
fn heat_rate(n_atoms: usize, k: f64) -> PyResult<f64> {
    nemd::heat_rate(n_atoms, k).map_err(err)
}

#[pyfunction]
fn average_kappa(kx: f64, ky: f64) -> PyResult<(f64, f64)> {
    nemd::average_kappa(kx, ky).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (l0, l1, threshold=0.10))]
fn stability_filter(l0: f64, l1: f64, threshold: f64) -> PyResult<bool> {
    nemd::stability_filter(l0, l1, threshold).map_err(err)
}

// ------------------------------------------------------------- spectral

#[pyfunction]
#[pyo3(signature = (trajectory, group, max_lag=None))]
fn vacf(trajectory: &PyTrajectory, group: Vec<usize>, max_lag: Option<usize>) -> PyResult<Vec<f64>> {
    spectral::vacf(&trajectory.inner, &group, max_lag).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (vacf, dt_fs, window="none"))]
fn vdos(vacf: Vec<f64>, dt_fs: f64, window: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let w = parse_window(window)?;
    let slice = spectral::vdos(&vacf, dt_fs, w).map_err(err)?;
    Ok((slice.freq_thz, slice.values))
}

fn parse_window(window: &str) -> PyResult<spectral::Window> {
    match window {
        "none" => Ok(spectral::Window::None),
        "hann" => Ok(spectral::Window::Hann),
        other => Err(PyValueError::new_err(format!("unknown window {other:?}"))),
    }
}

#[pyclass(name = "SpectralProfile")]
struct PySpectralProfile {
    inner: spectral::SpectralProfile,
}

#[pymethods]
impl PySpectralProfile {
    #[getter]
    fn freq_thz(&self) -> Vec<f64> {
        self.inner.freq_thz.clone()
    }

    #[getter]
    fn group_names(&self) -> Vec<String> {
        self.inner
            .groups
            .iter()
            .map(|(k, _)| k.to_string())
            .collect()
    }

    fn curve(&self, group: &str) -> PyResult<Vec<f64>> {
        self.inner
            .groups
            .iter()
            .find(|(k, _)| k.to_string() == group)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no group {group:?}")))
    }
}

#[pyfunction]
#[pyo3(signature = (trajectory, structure, labeling=None, max_lag=None, window="none", renorm_area=false))]
fn spectral_profile(
    trajectory: &PyTrajectory,
    structure: &PyStructure,
    labeling: Option<&PyBranchLabeling>,
    max_lag: Option<usize>,
    window: &str,
    renorm_area: bool,
) -> PyResult<PySpectralProfile> {
    let opts = spectral::SpectralOptions {
        max_lag,
        window: parse_window(window)?,
        renorm_area,
    };
    Ok(PySpectralProfile {
        inner: spectral::spectral_profile(
            &trajectory.inner,
            &structure.inner,
            labeling.map(|l| &l.inner),
            &opts,
        )
        .map_err(err)?,
    })
}

#[pyfunction]
fn overlap_s(profile: &PySpectralProfile) -> PyResult<f64> {
    spectral::overlap_s(&profile.inner).map_err(err)
}

#[pyclass(name = "PsedMap")]
struct PyPsedMap {
    inner: spectral::PsedMap,
}

#[pymethods]
impl PyPsedMap {
    #[getter]
    fn q_frac(&self) -> Vec<f64> {
        self.inner.q_frac.clone()
    }

    #[getter]
    fn freq_thz(&self) -> Vec<f64> {
        self.inner.freq_thz.clone()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values.clone()
    }
}

#[pyfunction]
#[pyo3(signature = (trajectory, structure, n_cells, axis="x"))]
fn psed(
    trajectory: &PyTrajectory,
    structure: &PyStructure,
    n_cells: usize,
    axis: &str,
) -> PyResult<PyPsedMap> {
    let axis: spectral::Axis = axis.parse().map_err(err)?;
    Ok(PyPsedMap {
        inner: spectral::psed(&trajectory.inner, &structure.inner, n_cells, axis).map_err(err)?,
    })
}

/// Log-scale color bounds: (lower, upper 99th percentile).
#[pyfunction]
#[pyo3(signature = (map, pair=None))]
fn psed_plot_bounds(map: &PyPsedMap, pair: Option<&PyPsedMap>) -> PyResult<(f64, f64)> {
    let plot =
        spectral::emit_psed_plotdata(&map.inner, pair.map(|p| &p.inner)).map_err(err)?;
    Ok((plot.lower, plot.upper))
}

// ------------------------------------------------------------ attention

#[pyclass(name = "AttentionStack")]
struct PyAttentionStack {
    inner: attention::AttentionStack,
}

#[pymethods]
impl PyAttentionStack {
    #[getter]
    fn n_layers(&self) -> usize {
        self.inner.n_layers
    }

    #[getter]
    fn n_heads(&self) -> usize {
        self.inner.n_heads
    }

    #[getter]
    fn n_tokens(&self) -> usize {
        self.inner.n_tokens
    }

    #[getter]
    fn n_atom_tokens(&self) -> usize {
        self.inner.n_atom_tokens()
    }
}

#[pyfunction]
fn load_attention(path: PathBuf) -> PyResult<PyAttentionStack> {
    Ok(PyAttentionStack {
        inner: attention::load_attention(&path).map_err(err)?,
    })
}

/// Construct a stack in memory. Token map entries: an int atom index,
/// "aggregate", or "patch".
#[pyfunction]
fn attention_stack(
    n_layers: usize,
    n_heads: usize,
    n_tokens: usize,
    token_map: Vec<String>,
    matrices: Vec<Vec<f32>>,
) -> PyResult<PyAttentionStack> {
    let map = token_map
        .iter()
        .map(|t| match t.as_str() {
            "aggregate" => Ok(attention::TokenKind::Aggregate),
            "patch" => Ok(attention::TokenKind::GlobalPatch),
            s => s
                .parse::<usize>()
                .map(attention::TokenKind::Atom)
                .map_err(|_| PyValueError::new_err(format!("bad token entry {s:?}"))),
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(PyAttentionStack {
        inner: attention::AttentionStack::new(n_layers, n_heads, n_tokens, map, matrices)
            .map_err(err)?,
    })
}

#[pyfunction]
fn write_attention(stack: &PyAttentionStack, path: PathBuf) -> PyResult<()> {
    attention::write_attention(&stack.inner, &path).map_err(err)
}

/// Returns (atom_indices, scores); scores sum to 1.
#[pyfunction]
#[pyo3(signature = (stack, residual_weight=0.5, reduction="aggregate-row"))]
fn rollout(
    stack: &PyAttentionStack,
    residual_weight: f64,
    reduction: &str,
) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let red = match reduction {
        "aggregate-row" => attention::Reduction::AggregateRow,
        "column-mass" => attention::Reduction::ColumnMass,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown reduction {other:?}"
            )))
        }
    };
    let out = attention::rollout_with(&stack.inner, residual_weight, red).map_err(err)?;
    Ok((out.atom_indices, out.scores))
}

// ---------------------------------------------------------------- mlkit

#[pyclass(name = "FeatureTable")]
struct PyFeatureTable {
    inner: mlkit::FeatureTable,
}

#[pymethods]
impl PyFeatureTable {
    #[new]
    fn new(
        names: Vec<String>,
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        target: Vec<f64>,
    ) -> PyResult<Self> {
        let inner = mlkit::FeatureTable {
            names,
            feature_names,
            features,
            target,
        };
        inner.validate().map_err(err)?;
        Ok(PyFeatureTable { inner })
    }

    #[staticmethod]
    fn from_csv(path: PathBuf) -> PyResult<PyFeatureTable> {
        Ok(PyFeatureTable {
            inner: mlkit::FeatureTable::from_csv(&path).map_err(err)?,
        })
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    fn drop_feature(&self, name: &str) -> PyResult<PyFeatureTable> {
        Ok(PyFeatureTable {
            inner: self.inner.drop_feature(name).map_err(err)?,
        })
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    mlkit::pearson(&x, &y).map_err(err)
}

#[pyclass(name = "ForestModel")]
struct PyForestModel {
    inner: mlkit::ForestModel,
}

#[pymethods]
impl PyForestModel {
    #[getter]
    fn n_trees(&self) -> usize {
        self.inner.n_trees()
    }

    fn predict_row(&self, x: Vec<f64>) -> f64 {
        self.inner.predict_row(&x)
    }

    fn predict(&self, table: &PyFeatureTable) -> Vec<f64> {
        self.inner.predict(&table.inner)
    }

    fn gini_importance(&self) -> Vec<f64> {
        self.inner.gini_importance()
    }

    fn oob_predictions(&self, table: &PyFeatureTable) -> PyResult<Vec<Option<f64>>> {
        self.inner.oob_predictions_on(&table.inner).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (table, n_trees=100, mtry=None, min_leaf=1, seed=0))]
fn fit_forest(
    table: &PyFeatureTable,
    n_trees: usize,
    mtry: Option<usize>,
    min_leaf: usize,
    seed: u64,
) -> PyResult<PyForestModel> {
    let cfg = mlkit::ForestConfig {
        n_trees,
        mtry,
        min_leaf,
        seed,
    };
    Ok(PyForestModel {
        inner: mlkit::fit_forest(&table.inner, &cfg).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (model, held_out, n_repeats=10, seed=0))]
fn permutation_importance(
    model: &PyForestModel,
    held_out: &PyFeatureTable,
    n_repeats: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    mlkit::permutation_importance(&model.inner, &held_out.inner, n_repeats, seed).map_err(err)
}

/// Returns (mean_r2, std_r2, mean_mae, fold_r2s).
#[pyfunction]
#[pyo3(signature = (table, k=10, n_trees=100, mtry=None, min_leaf=1, seed=0))]
fn kfold_cv(
    table: &PyFeatureTable,
    k: usize,
    n_trees: usize,
    mtry: Option<usize>,
    min_leaf: usize,
    seed: u64,
) -> PyResult<(f64, f64, f64, Vec<f64>)> {
    let cfg = mlkit::ForestConfig {
        n_trees,
        mtry,
        min_leaf,
        seed,
    };
    let cv = mlkit::kfold_cv(&table.inner, k, &cfg).map_err(err)?;
    Ok((cv.mean_r2, cv.std_r2, cv.mean_mae, cv.fold_r2))
}

#[pyfunction]
fn r2_score(y_true: Vec<f64>, y_pred: Vec<f64>) -> PyResult<f64> {
    mlkit::r2_score(&y_true, &y_pred).map_err(err)
}

// ---------------------------------------------------------------- module

#[pymodule]
fn coftherm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyBondGraph>()?;
    m.add_class::<PyBranchLabeling>()?;
    m.add_class::<PyBinProfile>()?;
    m.add_class::<PyKappaResult>()?;
    m.add_class::<PySpectralProfile>()?;
    m.add_class::<PyPsedMap>()?;
    m.add_class::<PyAttentionStack>()?;
    m.add_class::<PyFeatureTable>()?;
    m.add_class::<PyForestModel>()?;

    m.add_function(wrap_pyfunction!(parse_structure, m)?)?;
    m.add_function(wrap_pyfunction!(write_structure_cif, m)?)?;
    m.add_function(wrap_pyfunction!(parse_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_from_arrays, m)?)?;
    m.add_function(wrap_pyfunction!(build_bond_graph, m)?)?;
    m.add_function(wrap_pyfunction!(classify_branches, m)?)?;
    m.add_function(wrap_pyfunction!(find_rings, m)?)?;
    m.add_function(wrap_pyfunction!(compute_dmr, m)?)?;
    m.add_function(wrap_pyfunction!(parse_bin_profile, m)?)?;
    m.add_function(wrap_pyfunction!(extract_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(heat_rate, m)?)?;
    m.add_function(wrap_pyfunction!(average_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(stability_filter, m)?)?;
    m.add_function(wrap_pyfunction!(vacf, m)?)?;
    m.add_function(wrap_pyfunction!(vdos, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_profile, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_s, m)?)?;
    m.add_function(wrap_pyfunction!(psed, m)?)?;
    m.add_function(wrap_pyfunction!(psed_plot_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(load_attention, m)?)?;
    m.add_function(wrap_pyfunction!(attention_stack, m)?)?;
    m.add_function(wrap_pyfunction!(write_attention, m)?)?;
    m.add_function(wrap_pyfunction!(rollout, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(fit_forest, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_importance, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_cv, m)?)?;
    m.add_function(wrap_pyfunction!(r2_score, m)?)?;

    m.add("KCAL_PER_MOL_FS_TO_WATTS", nemd::KCAL_PER_MOL_FS_TO_WATTS)?;
    Ok(())
}
