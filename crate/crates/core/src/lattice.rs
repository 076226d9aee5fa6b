//! Lattice geometry and the neighbour relation that defines the blockade.
//!
//! Sites are numbered row-major; for a torus site `(x, y)` has index
//! `y * lx + x`. Every lattice is periodic. When an extent equals 2 the two
//! wrap neighbours along that axis are the same site, and the pair is kept
//! as a single adjacency relation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Configurations are stored as one machine word.
pub const MAX_SITES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lattice {
    Ring { sites: usize },
    Torus { lx: usize, ly: usize },
}

impl Lattice {
    pub fn ring(sites: usize) -> Result<Self> {
        let lattice = Lattice::Ring { sites };
        lattice.validate()?;
        Ok(lattice)
    }

    pub fn torus(lx: usize, ly: usize) -> Result<Self> {
        let lattice = Lattice::Torus { lx, ly };
        lattice.validate()?;
        Ok(lattice)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Lattice::Ring { sites } if sites < 2 => Err(Error::InvalidLattice(format!(
                "ring needs at least 2 sites, got {sites}"
            ))),
            Lattice::Torus { lx, ly } if lx < 2 || ly < 2 => Err(Error::InvalidLattice(format!(
                "torus extents must be at least 2, got {lx}x{ly}"
            ))),
            _ if self.num_sites() > MAX_SITES => Err(Error::InvalidLattice(format!(
                "{} sites exceed the {MAX_SITES}-site word encoding",
                self.num_sites()
            ))),
            _ => Ok(()),
        }
    }

    pub fn num_sites(&self) -> usize {
        match *self {
            Lattice::Ring { sites } => sites,
            Lattice::Torus { lx, ly } => lx * ly,
        }
    }

    /// Number of neighbour slots per site (2 for a ring, 4 for a torus),
    /// before collapsing coincident wrap neighbours.
    pub fn coordination(&self) -> usize {
        match self {
            Lattice::Ring { .. } => 2,
            Lattice::Torus { .. } => 4,
        }
    }

    /// Distinct neighbours of `site`, ascending.
    pub fn neighbors_of(&self, site: usize) -> Vec<usize> {
        let mut out = match *self {
            Lattice::Ring { sites } => vec![(site + 1) % sites, (site + sites - 1) % sites],
            Lattice::Torus { lx, ly } => {
                let (x, y) = (site % lx, site / lx);
                vec![
                    y * lx + (x + 1) % lx,
                    y * lx + (x + lx - 1) % lx,
                    ((y + 1) % ly) * lx + x,
                    ((y + ly - 1) % ly) * lx + x,
                ]
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Per-site bitmask of neighbouring sites.
    pub fn neighbor_masks(&self) -> Vec<u64> {
        (0..self.num_sites())
            .map(|site| {
                self.neighbors_of(site)
                    .into_iter()
                    .fold(0u64, |mask, nb| mask | (1u64 << nb))
            })
            .collect()
    }

    /// Undirected nearest-neighbour bonds `(a, b)` with `a < b`, each listed once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds = Vec::new();
        for site in 0..self.num_sites() {
            for nb in self.neighbors_of(site) {
                if site < nb {
                    bonds.push((site, nb));
                }
            }
        }
        bonds
    }

    /// True when no two occupied sites are neighbours.
    pub fn is_allowed(&self, occupation: u64) -> bool {
        self.neighbor_masks()
            .iter()
            .enumerate()
            .all(|(site, &mask)| occupation & (1u64 << site) == 0 || occupation & mask == 0)
    }

    pub fn label(&self) -> String {
        match *self {
            Lattice::Ring { sites } => format!("ring{sites}"),
            Lattice::Torus { lx, ly } => format!("torus{lx}x{ly}"),
        }
    }
}

/// Number of blockade-allowed configurations per excitation number, counted
/// by a row transfer matrix (no configuration is materialized).
///
/// A ring is the 1-row torus case: rows are single sites. For a torus the
/// rows are the allowed patterns of one periodic row of `lx` sites and the
/// count is the trace of the `ly`-th power of the compatibility matrix,
/// tracked as a polynomial in the excitation number.
pub fn transfer_matrix_counts(lattice: &Lattice) -> Vec<u128> {
    let (width, height) = match *lattice {
        Lattice::Ring { sites } => (1, sites),
        Lattice::Torus { lx, ly } => (lx, ly),
    };
    let row_ok = |r: u64| -> bool {
        if width == 1 {
            return true;
        }
        let rot = (r >> 1) | ((r & 1) << (width - 1));
        r & rot == 0
    };
    let rows: Vec<u64> = (0..1u64 << width).filter(|&r| row_ok(r)).collect();
    let max_n = lattice.num_sites() / 2 + 1;
    let mut total = vec![0u128; max_n + 1];

    for (start_idx, &start) in rows.iter().enumerate() {
        // current[row][n] = walks from `start` ending at `row` with n excitations
        let mut current = vec![vec![0u128; max_n + 1]; rows.len()];
        current[start_idx][start.count_ones() as usize] = 1;
        for _ in 1..height {
            let mut next = vec![vec![0u128; max_n + 1]; rows.len()];
            for (i, &r) in rows.iter().enumerate() {
                if current[i].iter().all(|&c| c == 0) {
                    continue;
                }
                for (j, &s) in rows.iter().enumerate() {
                    if r & s != 0 {
                        continue;
                    }
                    let add = s.count_ones() as usize;
                    for n in 0..=max_n - add {
                        next[j][n + add] += current[i][n];
                    }
                }
            }
            current = next;
        }
        for (i, &r) in rows.iter().enumerate() {
            if r & start == 0 || height == 1 {
                for n in 0..=max_n {
                    total[n] += current[i][n];
                }
            }
        }
    }
    while total.len() > 1 && *total.last().unwrap() == 0 {
        total.pop();
    }
    total
}
