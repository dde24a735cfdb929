//! Periodic covalent bond graph.
//!
//! Atoms i and j are bonded when their distance (over any periodic image)
//! is at most `scale × (r_cov(i) + r_cov(j))`. Every edge records the
//! integer image shift of the neighbor, so the graph is the quotient graph
//! of the infinite crystal: bonds to a periodic image carry a nonzero
//! shift, and an atom may bond to its own image (a looped edge with ±s).

use crate::elements::covalent_radius;
use crate::structio::Structure;
use crate::{Error, Result};

/// Directed half-edge: `neighbor` sits in the cell displaced by `shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub neighbor: usize,
    pub shift: [i32; 3],
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct BondGraph {
    adjacency: Vec<Vec<Edge>>,
}

const MIN_ATOM_SEPARATION: f64 = 0.5;

impl BondGraph {
    pub fn n_atoms(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[Edge] {
        &self.adjacency[i]
    }

    /// Undirected edge count (looped edges count once).
    pub fn n_edges(&self) -> usize {
        let half: usize = self.adjacency.iter().map(|a| a.len()).sum();
        half / 2
    }

    /// Atoms incident to at least one edge with a nonzero image shift.
    pub fn boundary_atoms(&self) -> Vec<usize> {
        (0..self.n_atoms())
            .filter(|&i| self.adjacency[i].iter().any(|e| e.shift != [0, 0, 0]))
            .collect()
    }

    /// Connectivity of the quotient graph (periodic images identified).
    pub fn is_connected(&self) -> bool {
        let n = self.n_atoms();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for e in &self.adjacency[i] {
                if !seen[e.neighbor] {
                    seen[e.neighbor] = true;
                    count += 1;
                    stack.push(e.neighbor);
                }
            }
        }
        count == n
    }

    /// CSV edge list (`i,j,shift_x,shift_y,shift_z,length`), each
    /// undirected edge once.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("i,j,shift_x,shift_y,shift_z,length\n");
        for (i, j, s, l) in self.undirected_edges() {
            out += &format!("{i},{j},{},{},{},{l}\n", s[0], s[1], s[2]);
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph bonds {\n");
        for (i, j, s, _) in self.undirected_edges() {
            if s == [0, 0, 0] {
                out += &format!("  {i} -- {j};\n");
            } else {
                out += &format!("  {i} -- {j} [label=\"{},{},{}\"];\n", s[0], s[1], s[2]);
            }
        }
        out.push_str("}\n");
        out
    }

    /// Each undirected edge exactly once: (i, j, shift, length) with the
    /// canonical orientation i ≤ j (loops keep the lexicographically
    /// positive shift).
    pub fn undirected_edges(&self) -> Vec<(usize, usize, [i32; 3], f64)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for i in 0..self.n_atoms() {
            for e in &self.adjacency[i] {
                if e.neighbor > i || (e.neighbor == i && e.shift > [0, 0, 0]) {
                    out.push((i, e.neighbor, e.shift, e.length));
                }
            }
        }
        out
    }
}

/// Free-function form of [`BondGraph::boundary_atoms`].
pub fn boundary_atoms(g: &BondGraph) -> Vec<usize> {
    g.boundary_atoms()
}

struct Candidate {
    i: usize,
    j: usize,
    shift: [i32; 3],
    dist: f64,
}

/// Build the bond graph with per-pair covalent cutoffs.
///
/// `scale` multiplies the covalent-radius sum; accepted range [1.0, 1.5].
pub fn build_bond_graph(s: &Structure, scale: f64) -> Result<BondGraph> {
    if !(1.0..=1.5).contains(&scale) {
        return Err(Error::InvalidArgument(format!(
            "bond cutoff scale must be in [1.0, 1.5], got {scale}"
        )));
    }
    let n = s.n_atoms();
    let radii: Vec<f64> = s
        .atoms
        .iter()
        .map(|a| covalent_radius(&a.symbol))
        .collect::<Result<_>>()?;
    let max_radius = radii.iter().cloned().fold(0.0, f64::max);
    let max_cutoff = scale * 2.0 * max_radius;

    let mut adjacency: Vec<Vec<Edge>> = vec![Vec::new(); n];
    if n == 0 {
        return Ok(BondGraph { adjacency });
    }

    let cart: Vec<[f64; 3]> = (0..n).map(|i| s.cart(i)).collect();
    let lengths = s.cell_lengths;

    let bins: [usize; 3] = std::array::from_fn(|k| (lengths[k] / max_cutoff).floor() as usize);
    let candidates = if bins.iter().all(|&b| b >= 3) {
        cell_list_pairs(&cart, lengths, bins, max_cutoff)
    } else {
        brute_force_pairs(&cart, lengths, max_cutoff)
    };

    for c in candidates {
        if c.dist < MIN_ATOM_SEPARATION {
            return Err(Error::OverlappingAtoms {
                i: c.i,
                j: c.j,
                distance: c.dist,
            });
        }
        if c.dist <= scale * (radii[c.i] + radii[c.j]) {
            adjacency[c.i].push(Edge {
                neighbor: c.j,
                shift: c.shift,
                length: c.dist,
            });
            adjacency[c.j].push(Edge {
                neighbor: c.i,
                shift: [-c.shift[0], -c.shift[1], -c.shift[2]],
                length: c.dist,
            });
        }
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|e| (e.neighbor, e.shift));
    }
    Ok(BondGraph { adjacency })
}

/// All unordered pairs with every image shift bringing them within
/// `cutoff`. Handles cells smaller than the cutoff and self-images.
fn brute_force_pairs(cart: &[[f64; 3]], lengths: [f64; 3], cutoff: f64) -> Vec<Candidate> {
    let smax: [i32; 3] = std::array::from_fn(|k| (cutoff / lengths[k]).ceil() as i32 + 1);
    let mut out = Vec::new();
    for i in 0..cart.len() {
        for j in i..cart.len() {
            for sx in -smax[0]..=smax[0] {
                for sy in -smax[1]..=smax[1] {
                    for sz in -smax[2]..=smax[2] {
                        let shift = [sx, sy, sz];
                        // a looped edge (i,i,s) is the same bond as (i,i,−s)
                        if i == j && shift <= [0, 0, 0] {
                            continue;
                        }
                        let mut d2 = 0.0;
                        for k in 0..3 {
                            let dx = cart[j][k] + shift[k] as f64 * lengths[k] - cart[i][k];
                            d2 += dx * dx;
                        }
                        let dist = d2.sqrt();
                        if dist <= cutoff {
                            out.push(Candidate { i, j, shift, dist });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Linear-scaling neighbor search; valid when every cell edge is at
/// least 3 bins long (then at most one image per pair is within cutoff
/// and the minimum-image convention resolves it).
fn cell_list_pairs(
    cart: &[[f64; 3]],
    lengths: [f64; 3],
    bins: [usize; 3],
    cutoff: f64,
) -> Vec<Candidate> {
    let n = cart.len();
    let bin_of = |p: &[f64; 3]| -> [usize; 3] {
        std::array::from_fn(|k| {
            let f = (p[k] / lengths[k]).rem_euclid(1.0);
            ((f * bins[k] as f64) as usize).min(bins[k] - 1)
        })
    };
    let flat = |b: [usize; 3]| b[0] + bins[0] * (b[1] + bins[1] * b[2]);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); bins[0] * bins[1] * bins[2]];
    for (i, p) in cart.iter().enumerate() {
        cells[flat(bin_of(p))].push(i);
    }

    let mut out = Vec::new();
    for i in 0..n {
        let bi = bin_of(&cart[i]);
        for ox in -1i64..=1 {
            for oy in -1i64..=1 {
                for oz in -1i64..=1 {
                    let nb: [usize; 3] = std::array::from_fn(|k| {
                        let o = [ox, oy, oz][k];
                        ((bi[k] as i64 + o).rem_euclid(bins[k] as i64)) as usize
                    });
                    for &j in &cells[flat(nb)] {
                        if j <= i {
                            continue;
                        }
                        // minimum image: frac delta rounded to nearest cell
                        let mut shift = [0i32; 3];
                        let mut d2 = 0.0;
                        for k in 0..3 {
                            let df = (cart[j][k] - cart[i][k]) / lengths[k];
                            let s = df.round();
                            shift[k] = -(s as i32);
                            let dx = (df - s) * lengths[k];
                            d2 += dx * dx;
                        }
                        let dist = d2.sqrt();
                        if dist <= cutoff {
                            out.push(Candidate { i, j, shift, dist });
                        }
                    }
                }
            }
        }
    }
    // the 27-neighborhood can visit a (i, j) pair through several bin
    // offsets only when bins == 3 exactly; dedupe
    out.sort_by_key(|c| (c.i, c.j, c.shift));
    out.dedup_by(|a, b| a.i == b.i && a.j == b.j && a.shift == b.shift);
    out
}
