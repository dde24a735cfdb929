use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use coftherm::attention::{load_attention, rollout_with, Reduction, TokenKind};
use coftherm::bondgraph::{build_bond_graph, BondGraph};
use coftherm::dangling::{classify_branches, compute_dmr_with, BranchLabel, BranchLabeling};
use coftherm::mlkit::{
    fit_forest, kfold_cv, permutation_importance, FeatureTable, ForestConfig, Xoshiro256,
};
use coftherm::nemd::{anisotropy_stats, average_kappa, extract_kappa_trimmed};
use coftherm::spectral::{
    emit_psed_plotdata, overlap_s, psed as compute_psed, spectral_profile, Axis, SpectralOptions,
    Window,
};
use coftherm::structio::{
    parse_bin_profile, parse_structure, parse_trajectory, write_xyz_with_column, Structure,
    StructureFormat, Trajectory,
};

use crate::output::{emit, emit_side, sig6, write_manifest};

fn load_structure(path: &Path, format: Option<&str>) -> Result<Structure> {
    let fmt = match format {
        Some("cif") => StructureFormat::CifSubset,
        Some("xyz") => StructureFormat::XyzExtended,
        Some(other) => bail!("unknown structure format {other:?} (use cif or xyz)"),
        None => StructureFormat::from_path(path)?,
    };
    Ok(parse_structure(path, fmt)?)
}

fn classify(s: &Structure, scale: f64) -> Result<(BondGraph, BranchLabeling)> {
    let graph = build_bond_graph(s, scale)?;
    let labeling = classify_branches(&graph, s)?;
    Ok((graph, labeling))
}

// ---------------------------------------------------------------- dmr

#[derive(Args)]
pub struct DmrArgs {
    /// Structure file (.cif or .xyz).
    pub structure: PathBuf,
    /// Override format detection: cif | xyz.
    #[arg(long)]
    pub format: Option<String>,
    /// Bond cutoff scale factor on covalent-radius sums.
    #[arg(long, default_value_t = 1.15)]
    pub scale: f64,
    /// Drop dangling hydrogens from the DMR numerator.
    #[arg(long)]
    pub exclude_h: bool,
    /// Write the structure as extended XYZ with a branch-label column.
    #[arg(long)]
    pub emit_xyz: Option<PathBuf>,
    /// Write the bond graph as a CSV edge list.
    #[arg(long)]
    pub emit_graph: Option<PathBuf>,
}

pub fn dmr(args: DmrArgs, out_dir: Option<&Path>) -> Result<()> {
    let s = load_structure(&args.structure, args.format.as_deref())?;
    let (graph, labeling) = classify(&s, args.scale)?;
    let dmr = if args.exclude_h {
        compute_dmr_with(&labeling.labels, &s, false)?
    } else {
        labeling.dmr
    };

    if let Some(path) = &args.emit_xyz {
        let labels: Vec<String> = labeling
            .labels
            .iter()
            .map(|l| l.as_str().to_string())
            .collect();
        std::fs::write(path, write_xyz_with_column(&s, "branch", &labels))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.emit_graph {
        let body = if path.extension().and_then(|e| e.to_str()) == Some("dot") {
            graph.to_dot()
        } else {
            graph.to_edge_csv()
        };
        std::fs::write(path, body)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }

    let options = json!({
        "command": "dmr",
        "structure": args.structure,
        "scale": args.scale,
        "exclude_h": args.exclude_h,
    });
    let result = json!({
        "name": s.name,
        "dmr": dmr,
        "main_branch_atom_count": labeling.main_branch_atom_count,
        "counts": {
            "main": labeling.count(BranchLabel::Main),
            "dangling": labeling.count(BranchLabel::Dangling),
            "dangling_h": labeling.count(BranchLabel::DanglingH),
        },
        "dangling_mass_amu": labeling.dangling_mass,
        "total_mass_amu": labeling.total_mass,
        "labels": labeling.labels.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
        "options": options,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "dmr.json", &format!("{result:#}\n"))
}

// -------------------------------------------------------------- kappa

#[derive(Args)]
pub struct KappaArgs {
    /// Bin-profile CSV (JSON sidecar expected next to it).
    pub profile: PathBuf,
    /// Drop this many extra bins per side of each half before fitting.
    #[arg(long, default_value_t = 0)]
    pub trim: usize,
}

pub fn kappa(args: KappaArgs, out_dir: Option<&Path>) -> Result<()> {
    let profile = parse_bin_profile(&args.profile)?;
    let result = extract_kappa_trimmed(&profile, args.trim)?;
    let options = json!({
        "command": "kappa",
        "profile": args.profile,
        "trim": args.trim,
    });
    let payload = json!({
        "kappa_w_per_m_k": result.kappa,
        "slope_left_k_per_angstrom": result.slope_left,
        "slope_right_k_per_angstrom": result.slope_right,
        "fit_r2_left": result.fit_r2_left,
        "fit_r2_right": result.fit_r2_right,
        "de_dt_watts": result.de_dt_watts,
        "options": options,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "kappa.json", &format!("{payload:#}\n"))
}

// -------------------------------------------------------- kappa-batch

#[derive(Debug, Deserialize)]
struct BatchEntry {
    name: String,
    profile_x: PathBuf,
    profile_y: PathBuf,
    #[serde(default)]
    trim: usize,
}

#[derive(Args)]
pub struct KappaBatchArgs {
    /// JSON manifest: [{name, profile_x, profile_y, trim?}, ...]
    pub manifest: PathBuf,
}

pub fn kappa_batch(args: KappaBatchArgs, out_dir: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(&args.manifest)
        .with_context(|| format!("cannot read {}", args.manifest.display()))?;
    let entries: Vec<BatchEntry> = serde_json::from_str(&text)
        .with_context(|| format!("bad batch manifest {}", args.manifest.display()))?;

    let mut csv = String::from("name,kappa_x,kappa_y,kappa_mean,ratio\n");
    let mut pairs = Vec::new();
    for e in &entries {
        let kx = extract_kappa_trimmed(&parse_bin_profile(&e.profile_x)?, e.trim)?.kappa;
        let ky = extract_kappa_trimmed(&parse_bin_profile(&e.profile_y)?, e.trim)?.kappa;
        let (mean, ratio) = average_kappa(kx, ky)?;
        pairs.push((kx, ky));
        csv += &format!(
            "{},{},{},{},{}\n",
            e.name,
            sig6(kx),
            sig6(ky),
            sig6(mean),
            sig6(ratio)
        );
    }

    let options = json!({ "command": "kappa-batch", "manifest": args.manifest });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "kappa_batch.csv", &csv)?;
    if pairs.len() >= 2 {
        let stats = anisotropy_stats(&pairs)?;
        emit_side(
            out_dir,
            "anisotropy.json",
            &format!("{:#}\n", serde_json::to_value(&stats)?),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------- vdos

#[derive(Args)]
pub struct VdosArgs {
    /// Velocity trajectory dump.
    pub trajectory: PathBuf,
    /// Structure file matching the trajectory atoms.
    pub structure: PathBuf,
    /// Dump timestep length in fs (the dump itself does not record it).
    #[arg(long)]
    pub fs_per_step: f64,
    #[arg(long)]
    pub format: Option<String>,
    /// `from-dmr` splits groups into main/dangling via classification.
    #[arg(long)]
    pub labels: Option<String>,
    #[arg(long, default_value_t = 1.15)]
    pub scale: f64,
    /// Window applied to the VACF before the transform: none | hann.
    #[arg(long, default_value = "none")]
    pub window: String,
    /// Rescale every group VDOS to unit area.
    #[arg(long)]
    pub renorm_area: bool,
    /// Correlation length in samples (default: half the record).
    #[arg(long)]
    pub max_lag: Option<usize>,
}

pub fn vdos(args: VdosArgs, out_dir: Option<&Path>) -> Result<()> {
    let s = load_structure(&args.structure, args.format.as_deref())?;
    let traj = parse_trajectory(&args.trajectory, args.fs_per_step)?;
    let labeling = match args.labels.as_deref() {
        Some("from-dmr") => Some(classify(&s, args.scale)?.1),
        Some(other) => bail!("unknown --labels mode {other:?} (use from-dmr)"),
        None => None,
    };
    let window = match args.window.as_str() {
        "none" => Window::None,
        "hann" => Window::Hann,
        other => bail!("unknown window {other:?} (use none or hann)"),
    };
    let opts = SpectralOptions {
        max_lag: args.max_lag,
        window,
        renorm_area: args.renorm_area,
    };
    let profile = spectral_profile(&traj, &s, labeling.as_ref(), &opts)?;

    let mut csv = String::from("freq_thz");
    for (key, _) in &profile.groups {
        csv += &format!(",{key}");
    }
    csv.push('\n');
    for (k, f) in profile.freq_thz.iter().enumerate() {
        csv += &sig6(*f);
        for (_, values) in &profile.groups {
            csv += &format!(",{}", sig6(values[k]));
        }
        csv.push('\n');
    }

    let s_value = match overlap_s(&profile) {
        Ok(v) => json!(v),
        Err(coftherm::Error::Spectral(msg)) if msg.contains("at least 2 groups") => {
            json!(null)
        }
        Err(e) => return Err(e.into()),
    };
    let options = json!({
        "command": "vdos",
        "trajectory": args.trajectory,
        "structure": args.structure,
        "fs_per_step": args.fs_per_step,
        "labels": args.labels,
        "scale": args.scale,
        "window": args.window,
        "renorm_area": args.renorm_area,
        "max_lag": args.max_lag,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "vdos.csv", &csv)?;
    let overlap = format!("{:#}\n", json!({ "S": s_value, "options": options }));
    emit_side(out_dir, "overlap.json", &overlap)?;
    eprintln!("{}", json!({ "S": s_value }));
    Ok(())
}

// ---------------------------------------------------------------- psed

#[derive(Args)]
pub struct PsedArgs {
    /// Trajectory dump with positions and velocities.
    pub trajectory: PathBuf,
    /// Unit-cell structure file.
    pub structure: PathBuf,
    /// Supercell repetitions along the axis.
    #[arg(long)]
    pub cells: usize,
    /// Transport axis: x | y | z.
    #[arg(long, default_value = "x")]
    pub axis: String,
    #[arg(long)]
    pub fs_per_step: f64,
    #[arg(long)]
    pub format: Option<String>,
    /// Second trajectory whose map shares the color-scale bounds.
    #[arg(long)]
    pub pair: Option<PathBuf>,
}

pub fn psed(args: PsedArgs, out_dir: Option<&Path>) -> Result<()> {
    let s = load_structure(&args.structure, args.format.as_deref())?;
    let traj = parse_trajectory(&args.trajectory, args.fs_per_step)?;
    let axis: Axis = args.axis.parse::<Axis>()?;
    let map = compute_psed(&traj, &s, args.cells, axis)?;
    let pair_map = match &args.pair {
        Some(path) => {
            let pt = parse_trajectory(path, args.fs_per_step)?;
            Some(compute_psed(&pt, &s, args.cells, axis)?)
        }
        None => None,
    };
    let plot = emit_psed_plotdata(&map, pair_map.as_ref())?;

    let mut csv = String::from("q_frac");
    for f in &map.freq_thz {
        csv += &format!(",{}", sig6(*f));
    }
    csv.push('\n');
    for (q, row) in plot.log10.iter().enumerate() {
        csv += &sig6(map.q_frac[q]);
        for v in row {
            csv += &format!(",{}", sig6(*v));
        }
        csv.push('\n');
    }

    let options = json!({
        "command": "psed",
        "trajectory": args.trajectory,
        "structure": args.structure,
        "cells": args.cells,
        "axis": args.axis,
        "fs_per_step": args.fs_per_step,
        "pair": args.pair,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "psed_log10.csv", &csv)?;
    let bounds = format!(
        "{:#}\n",
        json!({ "lower": plot.lower, "upper_p99": plot.upper, "options": options })
    );
    emit_side(out_dir, "psed_bounds.json", &bounds)?;
    eprintln!("{}", json!({ "lower": plot.lower, "upper_p99": plot.upper }));
    Ok(())
}

// ---------------------------------------------------------------- attn

#[derive(Args)]
pub struct AttnArgs {
    /// Attention stack (binary ATNS or JSON).
    pub stack: PathBuf,
    /// Structure whose atoms the stack's atom tokens index.
    #[arg(long)]
    pub structure: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
    /// Identity-residual mixing weight in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub residual_w: f64,
    /// Score readout: aggregate-row | column-mass.
    #[arg(long, default_value = "aggregate-row")]
    pub reduction: String,
}

pub fn attn(args: AttnArgs, out_dir: Option<&Path>) -> Result<()> {
    let s = load_structure(&args.structure, args.format.as_deref())?;
    let stack = load_attention(&args.stack)?;
    if stack.n_atom_tokens() != s.n_atoms() {
        bail!(
            "token map has {} atom tokens but the structure has {} atoms",
            stack.n_atom_tokens(),
            s.n_atoms()
        );
    }
    for t in &stack.token_map {
        if let TokenKind::Atom(i) = t {
            if *i >= s.n_atoms() {
                bail!("atom token index {i} out of range for {} atoms", s.n_atoms());
            }
        }
    }
    let reduction = match args.reduction.as_str() {
        "aggregate-row" => Reduction::AggregateRow,
        "column-mass" => Reduction::ColumnMass,
        other => bail!("unknown reduction {other:?}"),
    };
    let out = rollout_with(&stack, args.residual_w, reduction)?;
    let mut per_atom = vec![0.0f64; s.n_atoms()];
    for (atom, score) in out.atom_indices.iter().zip(&out.scores) {
        per_atom[*atom] = *score;
    }
    let column: Vec<String> = per_atom.iter().map(|v| sig6(*v)).collect();
    let xyz = write_xyz_with_column(&s, "attention", &column);

    let options = json!({
        "command": "attn",
        "stack": args.stack,
        "structure": args.structure,
        "residual_w": args.residual_w,
        "reduction": args.reduction,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "attention.xyz", &xyz)
}

// ------------------------------------------------------------ features

#[derive(Args)]
pub struct FeaturesArgs {
    /// Directory of structure files (.cif / .xyz).
    pub dir: PathBuf,
    /// CSV with columns: name, kappa, plus optional numeric descriptor
    /// columns (lpd, void_fraction, gsa, ...) passed through.
    #[arg(long)]
    pub kappa_manifest: PathBuf,
    #[arg(long, default_value_t = 1.15)]
    pub scale: f64,
}

pub fn features(args: FeaturesArgs, out_dir: Option<&Path>) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&args.kappa_manifest)
        .with_context(|| format!("cannot read {}", args.kappa_manifest.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("manifest headers")?
        .iter()
        .map(str::to_string)
        .collect();
    let name_col = headers
        .iter()
        .position(|h| h == "name")
        .context("manifest needs a name column")?;
    let kappa_col = headers
        .iter()
        .position(|h| h == "kappa")
        .context("manifest needs a kappa column")?;
    let extra_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != name_col && i != kappa_col)
        .collect();

    let mut rows: std::collections::BTreeMap<String, (f64, Vec<f64>)> = Default::default();
    for record in reader.records() {
        let record = record.context("manifest row")?;
        let name = record[name_col].to_string();
        let kappa: f64 = record[kappa_col]
            .parse()
            .with_context(|| format!("bad kappa for {name}"))?;
        let extras: Vec<f64> = extra_cols
            .iter()
            .map(|&i| {
                record[i]
                    .parse::<f64>()
                    .with_context(|| format!("bad {} for {name}", headers[i]))
            })
            .collect::<Result<_>>()?;
        rows.insert(name, (kappa, extras));
    }

    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.dir)
        .with_context(|| format!("cannot list {}", args.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("cif") | Some("xyz") | Some("extxyz")
            )
        })
        .collect();
    files.sort();

    let mut csv_out = String::from("name,density");
    for &i in &extra_cols {
        csv_out += &format!(",{}", headers[i]);
    }
    csv_out += ",dmr,kappa\n";
    for path in files {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("structure")
            .to_string();
        let Some((kappa, extras)) = rows.get(&name) else {
            eprintln!("warning: {name}: no kappa manifest row, skipped");
            continue;
        };
        let s = load_structure(&path, None)?;
        let (_, labeling) = classify(&s, args.scale)?;
        csv_out += &format!("{name},{}", sig6(s.density()));
        for v in extras {
            csv_out += &format!(",{}", sig6(*v));
        }
        csv_out += &format!(",{},{}\n", sig6(labeling.dmr), sig6(*kappa));
    }

    let options = json!({
        "command": "features",
        "dir": args.dir,
        "kappa_manifest": args.kappa_manifest,
        "scale": args.scale,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "features.csv", &csv_out)
}

// --------------------------------------------------------------- rf-cv

#[derive(Args)]
pub struct RfCvArgs {
    /// Feature table CSV (columns: name, features..., kappa).
    pub table: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    /// Shuffle repeats for permutation importance.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Drop a feature column before modeling (e.g. --drop dmr).
    #[arg(long)]
    pub drop: Option<String>,
    /// Fraction of rows held out for permutation importance.
    #[arg(long, default_value_t = 0.3)]
    pub holdout: f64,
}

pub fn rf_cv(args: RfCvArgs, out_dir: Option<&Path>) -> Result<()> {
    let mut table = FeatureTable::from_csv(&args.table)?;
    if let Some(drop) = &args.drop {
        table = table.drop_feature(drop)?;
    }
    let config = ForestConfig {
        n_trees: args.trees,
        mtry: args.mtry,
        min_leaf: args.min_leaf,
        seed: args.seed,
    };
    let cv = kfold_cv(&table, args.k, &config)?;

    // deterministic shuffled holdout split for the importance analysis
    if !(0.0 < args.holdout && args.holdout < 1.0) {
        bail!("holdout fraction must be in (0, 1), got {}", args.holdout);
    }
    let n = table.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    Xoshiro256::seed_from(args.seed).shuffle(&mut order);
    let n_hold = ((n as f64 * args.holdout).round() as usize).clamp(10, n.saturating_sub(20));
    let (hold_rows, fit_rows) = order.split_at(n_hold);
    let subset = |rows: &[usize]| FeatureTable {
        names: rows.iter().map(|&r| table.names[r].clone()).collect(),
        feature_names: table.feature_names.clone(),
        features: rows.iter().map(|&r| table.features[r].clone()).collect(),
        target: rows.iter().map(|&r| table.target[r]).collect(),
    };
    let model = fit_forest(&subset(fit_rows), &config)?;
    let gini = model.gini_importance();
    let pfi = permutation_importance(&model, &subset(hold_rows), args.repeats, args.seed)?;

    let to_map = |values: &[f64]| {
        let mut m = serde_json::Map::new();
        for (k, v) in table.feature_names.iter().zip(values) {
            m.insert(k.clone(), json!(v));
        }
        serde_json::Value::Object(m)
    };

    let options = json!({
        "command": "rf-cv",
        "table": args.table,
        "k": args.k,
        "seed": args.seed,
        "trees": args.trees,
        "mtry": args.mtry,
        "min_leaf": args.min_leaf,
        "repeats": args.repeats,
        "drop": args.drop,
        "holdout": args.holdout,
    });
    let payload = json!({
        "cv": { "k": cv.k, "mean_r2": cv.mean_r2, "std_r2": cv.std_r2, "mean_mae": cv.mean_mae },
        "gini_importance": to_map(&gini),
        "permutation_importance": to_map(&pfi),
        "options": options,
    });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "rf_cv.json", &format!("{payload:#}\n"))
}

// ------------------------------------------------------------ pipeline

#[derive(Debug, Deserialize)]
struct PipelineEntry {
    name: String,
    structure: PathBuf,
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    profile_x: Option<PathBuf>,
    #[serde(default)]
    profile_y: Option<PathBuf>,
    #[serde(default)]
    trajectory: Option<PathBuf>,
    #[serde(default)]
    fs_per_step: Option<f64>,
    #[serde(default)]
    scale: Option<f64>,
    #[serde(default)]
    trim: usize,
}

#[derive(Args)]
pub struct PipelineArgs {
    /// JSON manifest: [{name, structure, profile_x?, profile_y?,
    /// trajectory?, fs_per_step?, scale?}, ...]
    pub manifest: PathBuf,
}

#[derive(Default)]
struct PipelineRow {
    density: Option<f64>,
    dmr: Option<f64>,
    kappa_x: Option<f64>,
    kappa_y: Option<f64>,
    kappa_mean: Option<f64>,
    ratio: Option<f64>,
    s_overlap: Option<f64>,
    error: Option<String>,
}

fn pipeline_row(entry: &PipelineEntry) -> PipelineRow {
    let mut row = PipelineRow::default();
    let attempt = || -> Result<PipelineRow> {
        let mut row = PipelineRow::default();
        let scale = entry.scale.unwrap_or(1.15);
        let s = load_structure(&entry.structure, entry.format.as_deref())?;
        row.density = Some(s.density());
        let (_, labeling) = classify(&s, scale)?;
        row.dmr = Some(labeling.dmr);

        if let (Some(px), Some(py)) = (&entry.profile_x, &entry.profile_y) {
            let kx = extract_kappa_trimmed(&parse_bin_profile(px)?, entry.trim)?.kappa;
            let ky = extract_kappa_trimmed(&parse_bin_profile(py)?, entry.trim)?.kappa;
            let (mean, ratio) = average_kappa(kx, ky)?;
            row.kappa_x = Some(kx);
            row.kappa_y = Some(ky);
            row.kappa_mean = Some(mean);
            row.ratio = Some(ratio);
        }
        if let Some(traj_path) = &entry.trajectory {
            let fs = entry.fs_per_step.context("trajectory entries need fs_per_step")?;
            let traj: Trajectory = parse_trajectory(traj_path, fs)?;
            let profile =
                spectral_profile(&traj, &s, Some(&labeling), &SpectralOptions::default())?;
            row.s_overlap = Some(overlap_s(&profile)?);
        }
        Ok(row)
    };
    match attempt() {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            row
        }
    }
}

pub fn pipeline(args: PipelineArgs, out_dir: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(&args.manifest)
        .with_context(|| format!("cannot read {}", args.manifest.display()))?;
    let entries: Vec<PipelineEntry> = serde_json::from_str(&text)
        .with_context(|| format!("bad pipeline manifest {}", args.manifest.display()))?;

    let rows: Vec<PipelineRow> = entries.par_iter().map(pipeline_row).collect();

    let cell = |v: Option<f64>| v.map(sig6).unwrap_or_default();
    let mut csv = String::from("name,density,dmr,kappa_x,kappa_y,kappa_mean,ratio,s_overlap,error\n");
    let mut failures = 0usize;
    for (entry, row) in entries.iter().zip(&rows) {
        if row.error.is_some() {
            failures += 1;
        }
        csv += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            entry.name,
            cell(row.density),
            cell(row.dmr),
            cell(row.kappa_x),
            cell(row.kappa_y),
            cell(row.kappa_mean),
            cell(row.ratio),
            cell(row.s_overlap),
            row.error.clone().unwrap_or_default().replace(',', ";"),
        );
    }

    let options = json!({ "command": "pipeline", "manifest": args.manifest });
    write_manifest(out_dir, &options)?;
    emit(out_dir, "pipeline.csv", &csv)?;
    if failures > 0 {
        eprintln!(
            "{}",
            json!({ "warning": format!("{failures} of {} rows failed; see the error column", entries.len()) })
        );
    }
    Ok(())
}
