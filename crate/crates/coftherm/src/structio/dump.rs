//! LAMMPS-style `ITEM:` dump reader for velocity (and optionally
//! position) time series.

use std::path::Path;

use crate::{Error, Result};

/// Time series of per-atom velocities (Å/fs) and optional positions (Å)
/// at a fixed sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sampling interval in fs.
    pub dt_sample: f64,
    /// Raw dump timesteps, one per frame.
    pub timesteps: Vec<u64>,
    /// `velocities[frame][atom] = [vx, vy, vz]`.
    pub velocities: Vec<Vec<[f64; 3]>>,
    /// Same layout as `velocities` when the dump carries x/y/z columns.
    pub positions: Option<Vec<Vec<[f64; 3]>>>,
    /// Simulation box edge lengths in Å (orthogonal box assumed).
    pub box_lengths: [f64; 3],
}

impl Trajectory {
    pub fn n_frames(&self) -> usize {
        self.velocities.len()
    }

    pub fn n_atoms(&self) -> usize {
        self.velocities.first().map_or(0, |f| f.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames() < 2 {
            return Err(Error::InvalidTrajectory(format!(
                "need at least 2 frames, got {}",
                self.n_frames()
            )));
        }
        if !(self.dt_sample > 0.0) {
            return Err(Error::InvalidTrajectory(format!(
                "dt_sample must be positive, got {}",
                self.dt_sample
            )));
        }
        let n = self.n_atoms();
        if self.velocities.iter().any(|f| f.len() != n) {
            return Err(Error::InvalidTrajectory(
                "inconsistent atom count across frames".into(),
            ));
        }
        if let Some(pos) = &self.positions {
            if pos.len() != self.n_frames() || pos.iter().any(|f| f.len() != n) {
                return Err(Error::InvalidTrajectory(
                    "position frames do not match velocity frames".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Parse a dump file. `fs_per_step` converts dump timesteps to fs; the
/// files themselves do not record it.
pub fn parse_trajectory(path: &Path, fs_per_step: f64) -> Result<Trajectory> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_str(&text, fs_per_step, &path.display().to_string())
}

pub fn parse_trajectory_str(text: &str, fs_per_step: f64, origin: &str) -> Result<Trajectory> {
    if !(fs_per_step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fs_per_step must be positive, got {fs_per_step}"
        )));
    }

    let mut timesteps: Vec<u64> = Vec::new();
    let mut velocities: Vec<Vec<[f64; 3]>> = Vec::new();
    let mut positions: Vec<Vec<[f64; 3]>> = Vec::new();
    let mut frame_counts: Vec<usize> = Vec::new();
    let mut has_positions = false;
    let mut box_lengths = [0.0f64; 3];

    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, raw)) = lines.next() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !line.starts_with("ITEM:") {
            return Err(Error::parse(origin, line_no, "expected an ITEM: header"));
        }
        let item = line[5..].trim();
        if item == "TIMESTEP" {
            let (tidx, traw) = lines
                .next()
                .ok_or_else(|| Error::parse(origin, line_no, "missing timestep value"))?;
            let step: u64 = traw.trim().parse().map_err(|_| {
                Error::parse(origin, tidx + 1, format!("bad timestep {:?}", traw.trim()))
            })?;
            if let Some(&prev) = timesteps.last() {
                if step <= prev {
                    return Err(Error::InvalidTrajectory(format!(
                        "non-monotonic timesteps: {prev} then {step}"
                    )));
                }
            }
            timesteps.push(step);
        } else if item == "NUMBER OF ATOMS" {
            let (nidx, nraw) = lines
                .next()
                .ok_or_else(|| Error::parse(origin, line_no, "missing atom count"))?;
            let count: usize = nraw.trim().parse().map_err(|_| {
                Error::parse(origin, nidx + 1, format!("bad atom count {:?}", nraw.trim()))
            })?;
            if let Some(first) = velocities.first() {
                if first.len() != count {
                    return Err(Error::InvalidTrajectory(format!(
                        "inconsistent atom count: frame 0 has {}, frame {} has {}",
                        first.len(),
                        velocities.len(),
                        count
                    )));
                }
            }
            frame_counts.push(count);
            velocities.push(Vec::with_capacity(count));
            positions.push(Vec::with_capacity(count));
        } else if item.starts_with("BOX BOUNDS") {
            for slot in box_lengths.iter_mut() {
                let (bidx, braw) = lines
                    .next()
                    .ok_or_else(|| Error::parse(origin, line_no, "missing box bounds"))?;
                let fields: Vec<f64> = braw
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(origin, bidx + 1, "bad box bounds"))?;
                if fields.len() < 2 {
                    return Err(Error::parse(origin, bidx + 1, "bad box bounds"));
                }
                *slot = fields[1] - fields[0];
            }
        } else if item.starts_with("ATOMS") {
            let columns: Vec<&str> = item.split_whitespace().skip(1).collect();
            let col = |key: &str| columns.iter().position(|c| *c == key);
            let (ivx, ivy, ivz) = match (col("vx"), col("vy"), col("vz")) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => {
                    return Err(Error::parse(
                        origin,
                        line_no,
                        "ATOMS section must carry vx vy vz columns",
                    ))
                }
            };
            let pos_cols = match (col("x"), col("y"), col("z")) {
                (Some(a), Some(b), Some(c)) => Some((a, b, c)),
                _ => None,
            };
            let id_col = col("id");
            let frame = velocities
                .last_mut()
                .ok_or_else(|| Error::parse(origin, line_no, "ATOMS before NUMBER OF ATOMS"))?;
            let pframe = positions.last_mut().unwrap();
            let expected = *frame_counts.last().unwrap();
            let mut rows: Vec<(u64, [f64; 3], [f64; 3])> = Vec::with_capacity(expected);
            for k in 0..expected {
                let (ridx, rraw) = lines.next().ok_or_else(|| {
                    Error::parse(origin, line_no, "unexpected end of ATOMS section")
                })?;
                let fields: Vec<&str> = rraw.split_whitespace().collect();
                if fields.len() != columns.len() {
                    return Err(Error::parse(
                        origin,
                        ridx + 1,
                        format!(
                            "ATOMS row has {} fields, expected {}",
                            fields.len(),
                            columns.len()
                        ),
                    ));
                }
                let num = |i: usize| -> Result<f64> {
                    fields[i].parse::<f64>().map_err(|_| {
                        Error::parse(origin, ridx + 1, format!("bad number {:?}", fields[i]))
                    })
                };
                let id = match id_col {
                    Some(i) => fields[i].parse::<u64>().map_err(|_| {
                        Error::parse(origin, ridx + 1, format!("bad atom id {:?}", fields[i]))
                    })?,
                    None => k as u64 + 1,
                };
                let v = [num(ivx)?, num(ivy)?, num(ivz)?];
                let p = match pos_cols {
                    Some((a, b, c)) => [num(a)?, num(b)?, num(c)?],
                    None => [0.0; 3],
                };
                rows.push((id, v, p));
            }
            rows.sort_by_key(|r| r.0);
            for (_, v, p) in rows {
                frame.push(v);
                pframe.push(p);
            }
            if pos_cols.is_some() {
                has_positions = true;
            } else if has_positions {
                return Err(Error::InvalidTrajectory(
                    "some frames carry positions and some do not".into(),
                ));
            }
        } else {
            return Err(Error::parse(origin, line_no, format!("unknown item {item:?}")));
        }
    }

    if velocities.len() != timesteps.len() {
        return Err(Error::InvalidTrajectory(
            "frame headers and atom sections do not match".into(),
        ));
    }
    if timesteps.len() < 2 {
        return Err(Error::InvalidTrajectory(format!(
            "need at least 2 frames, got {}",
            timesteps.len()
        )));
    }
    let stride = timesteps[1] - timesteps[0];
    for w in timesteps.windows(2) {
        if w[1] - w[0] != stride {
            return Err(Error::InvalidTrajectory(format!(
                "non-uniform timestep spacing: {} vs {}",
                w[1] - w[0],
                stride
            )));
        }
    }

    let traj = Trajectory {
        dt_sample: stride as f64 * fs_per_step,
        timesteps,
        velocities,
        positions: if has_positions { Some(positions) } else { None },
        box_lengths,
    };
    traj.validate()?;
    Ok(traj)
}

/// Write the LAMMPS-style `ITEM:` text layout, bit-stable under a
/// parse/write round trip.
pub fn write_trajectory(t: &Trajectory) -> String {
    let mut out = String::new();
    for (f, step) in t.timesteps.iter().enumerate() {
        out += "ITEM: TIMESTEP\n";
        out += &format!("{step}\n");
        out += "ITEM: NUMBER OF ATOMS\n";
        out += &format!("{}\n", t.velocities[f].len());
        out += "ITEM: BOX BOUNDS pp pp pp\n";
        for axis in 0..3 {
            out += &format!("0 {}\n", t.box_lengths[axis]);
        }
        match &t.positions {
            Some(pos) => {
                out += "ITEM: ATOMS id x y z vx vy vz\n";
                for (a, (v, p)) in t.velocities[f].iter().zip(&pos[f]).enumerate() {
                    out += &format!(
                        "{} {} {} {} {} {} {}\n",
                        a + 1,
                        p[0],
                        p[1],
                        p[2],
                        v[0],
                        v[1],
                        v[2]
                    );
                }
            }
            None => {
                out += "ITEM: ATOMS id vx vy vz\n";
                for (a, v) in t.velocities[f].iter().enumerate() {
                    out += &format!("{} {} {} {}\n", a + 1, v[0], v[1], v[2]);
                }
            }
        }
    }
    out
}
