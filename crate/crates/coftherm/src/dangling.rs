//! Main-branch / dangling-branch classification and the dangling mass
//! ratio (DMR).
//!
//! The main branch is the union, over all unordered pairs of boundary
//! atoms, of one deterministic unweighted shortest path per pair
//! (ties broken by the lexicographically smallest atom-index sequence),
//! together with the boundary atoms themselves. Paths run through the
//! cell interior: only zero-shift edges are traversable, while the
//! wrapping bonds define which atoms are boundary atoms. Pairs with no
//! in-cell path contribute nothing. Rings containing more than three
//! main-branch atoms are treated as rigid and absorbed into the main
//! branch. Everything else is dangling; dangling hydrogens are kept as
//! a separate label but count toward the dangling mass.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::bondgraph::BondGraph;
use crate::structio::Structure;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchLabel {
    Main,
    Dangling,
    DanglingH,
}

impl BranchLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchLabel::Main => "main",
            BranchLabel::Dangling => "dangling",
            BranchLabel::DanglingH => "dangling_h",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchLabeling {
    pub labels: Vec<BranchLabel>,
    pub dmr: f64,
    pub main_branch_atom_count: usize,
    /// Σ mass over dangling ∪ dangling-H atoms, amu.
    pub dangling_mass: f64,
    pub total_mass: f64,
}

impl BranchLabeling {
    pub fn count(&self, label: BranchLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Default ring-size cap: covers aromatic and heterocyclic rings in COF
/// linker chemistry without enumerating large lattice cycles.
pub const DEFAULT_MAX_RING_SIZE: usize = 8;

pub fn classify_branches(g: &BondGraph, s: &Structure) -> Result<BranchLabeling> {
    if g.n_atoms() != s.n_atoms() {
        return Err(Error::InvalidArgument(format!(
            "graph has {} atoms but structure has {}",
            g.n_atoms(),
            s.n_atoms()
        )));
    }
    let boundary = g.boundary_atoms();
    if boundary.is_empty() {
        return Err(Error::NoBoundaryAtoms);
    }
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }

    let mut main: BTreeSet<usize> = boundary.iter().copied().collect();
    for (a, &p) in boundary.iter().enumerate() {
        for &q in &boundary[a + 1..] {
            if let Some(path) = lex_shortest_path(g, p, q) {
                main.extend(path);
            }
        }
    }

    // rigid-ring absorption, iterated to a fixpoint: pulling one ring in
    // can push a neighboring ring over the >3 threshold
    let rings = find_rings(g, DEFAULT_MAX_RING_SIZE)?;
    let ring_sets: Vec<BTreeSet<usize>> = rings
        .iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    loop {
        let mut changed = false;
        for set in &ring_sets {
            let on_main = set.iter().filter(|a| main.contains(a)).count();
            if on_main > 3 && set.iter().any(|a| !main.contains(a)) {
                main.extend(set.iter().copied());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let labels: Vec<BranchLabel> = (0..s.n_atoms())
        .map(|i| {
            if main.contains(&i) {
                BranchLabel::Main
            } else if s.atoms[i].symbol == "H" {
                BranchLabel::DanglingH
            } else {
                BranchLabel::Dangling
            }
        })
        .collect();

    let dmr = compute_dmr(&labels, s)?;
    let dangling_mass: f64 = labels
        .iter()
        .zip(&s.atoms)
        .filter(|(l, _)| **l != BranchLabel::Main)
        .map(|(_, a)| a.mass)
        .sum();
    Ok(BranchLabeling {
        main_branch_atom_count: main.len(),
        labels,
        dmr,
        dangling_mass,
        total_mass: s.total_mass(),
    })
}

/// DMR = Σ_{i∈D} m_i / (Σ_{i∈D} m_i + Σ_{i∈M} m_i), with dangling
/// hydrogens included in D.
pub fn compute_dmr(labels: &[BranchLabel], s: &Structure) -> Result<f64> {
    compute_dmr_with(labels, s, true)
}

/// `count_hydrogen = false` drops dangling hydrogens from the numerator
/// (the denominator stays the total mass).
pub fn compute_dmr_with(labels: &[BranchLabel], s: &Structure, count_hydrogen: bool) -> Result<f64> {
    if labels.len() != s.n_atoms() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} atoms",
            labels.len(),
            s.n_atoms()
        )));
    }
    let total = s.total_mass();
    if !(total > 0.0) {
        return Err(Error::InvalidStructure(
            "total mass is zero (empty structure)".into(),
        ));
    }
    let dangling: f64 = labels
        .iter()
        .zip(&s.atoms)
        .filter(|(l, _)| match l {
            BranchLabel::Main => false,
            BranchLabel::Dangling => true,
            BranchLabel::DanglingH => count_hydrogen,
        })
        .map(|(_, a)| a.mass)
        .sum();
    Ok(dangling / total)
}

/// Deterministic unweighted shortest path from `p` to `q` over in-cell
/// (zero-shift) edges: among all shortest paths, the lexicographically
/// smallest atom-index sequence. Walks greedily toward `q` choosing the
/// smallest next index whose distance-to-`q` decreases. `None` when `q`
/// is unreachable within the cell.
fn lex_shortest_path(g: &BondGraph, p: usize, q: usize) -> Option<Vec<usize>> {
    let dist_q = in_cell_distances(g, q);
    dist_q[p]?;
    let mut path = vec![p];
    let mut cur = p;
    while cur != q {
        let d = dist_q[cur].unwrap();
        let next = g
            .neighbors(cur)
            .iter()
            .filter(|e| e.shift == [0, 0, 0])
            .map(|e| e.neighbor)
            .filter(|&n| dist_q[n] == Some(d - 1))
            .min()
            .expect("a neighbor closer to the target must exist");
        path.push(next);
        cur = next;
    }
    Some(path)
}

fn in_cell_distances(g: &BondGraph, from: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n_atoms()];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(i) = queue.pop_front() {
        let d = dist[i].unwrap();
        for e in g.neighbors(i) {
            if e.shift == [0, 0, 0] && dist[e.neighbor].is_none() {
                dist[e.neighbor] = Some(d + 1);
                queue.push_back(e.neighbor);
            }
        }
    }
    dist
}

/// Minimal rings up to `max_size` atoms, one smallest cycle per covered
/// edge, deduplicated up to rotation and reflection.
///
/// Cycles are found on the lifted (periodic-image-aware) graph, so a
/// closed ring must have zero net image shift: going around the torus
/// does not count as a ring, while rings crossing the cell boundary do.
pub fn find_rings(g: &BondGraph, max_size: usize) -> Result<Vec<Vec<usize>>> {
    if !(3..=12).contains(&max_size) {
        return Err(Error::InvalidArgument(format!(
            "max ring size must be in [3, 12], got {max_size}"
        )));
    }
    let mut seen: BTreeSet<Vec<(usize, [i32; 3])>> = BTreeSet::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for (u, v, s, _) in g.undirected_edges() {
        if let Some(cycle) = smallest_cycle_through(g, u, v, s, max_size) {
            let key = canonical_cycle(&cycle);
            if seen.insert(key) {
                rings.push(cycle.iter().map(|(a, _)| *a).collect());
            }
        }
    }
    Ok(rings)
}

type Lifted = (usize, [i32; 3]);

/// Shortest lifted path from (v, s) back to (u, 0) avoiding the single
/// lifted copy of the edge (u,0)–(v,s); returns the closed cycle as
/// lifted nodes starting at (u, 0).
fn smallest_cycle_through(
    g: &BondGraph,
    u: usize,
    v: usize,
    s: [i32; 3],
    max_size: usize,
) -> Option<Vec<Lifted>> {
    let start: Lifted = (v, s);
    let target: Lifted = (u, [0, 0, 0]);
    let mut parent: HashMap<Lifted, Lifted> = HashMap::new();
    let mut depth: HashMap<Lifted, usize> = HashMap::new();
    depth.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    let bound = (max_size - 1) as i32;

    while let Some(node) = queue.pop_front() {
        let d = depth[&node];
        if d + 1 > max_size - 1 {
            continue;
        }
        let (a, c) = node;
        for e in g.neighbors(a) {
            let next: Lifted = (
                e.neighbor,
                [c[0] + e.shift[0], c[1] + e.shift[1], c[2] + e.shift[2]],
            );
            // the removed edge copy: stepping from (v,s) straight back
            // to (u,0) along the reverse instance
            if node == start && next == target && e.shift == [-s[0], -s[1], -s[2]] {
                continue;
            }
            if next.1.iter().any(|&x| x.abs() > bound) {
                continue;
            }
            if next == target {
                let mut path = vec![next, node];
                let mut cur = node;
                while cur != start {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse(); // start .. node, target — rotate target first
                path.rotate_right(1);
                return Some(path);
            }
            if let std::collections::hash_map::Entry::Vacant(slot) = depth.entry(next) {
                slot.insert(d + 1);
                parent.insert(next, node);
                queue.push_back(next);
            }
        }
    }
    None
}

/// Canonical form under rotation, reflection, and lattice re-basing.
fn canonical_cycle(cycle: &[Lifted]) -> Vec<Lifted> {
    let len = cycle.len();
    let mut best: Option<Vec<Lifted>> = None;
    for dir in [false, true] {
        let seq: Vec<Lifted> = if dir {
            let mut r = cycle.to_vec();
            r.reverse();
            r
        } else {
            cycle.to_vec()
        };
        for start in 0..len {
            let base = seq[start].1;
            let rotated: Vec<Lifted> = (0..len)
                .map(|i| {
                    let (a, sft) = seq[(start + i) % len];
                    (a, [sft[0] - base[0], sft[1] - base[1], sft[2] - base[2]])
                })
                .collect();
            if best.as_ref().is_none_or(|b| rotated < *b) {
                best = Some(rotated);
            }
        }
    }
    best.unwrap()
}
