//! The blockade-constrained configuration space and its spin-flip graph.

use std::fmt::Write as _;
use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use crate::distribution::ExcitationDistribution;
use crate::error::{Error, Result};
use crate::lattice::{transfer_matrix_counts, Lattice};

/// Enumeration refuses spaces larger than this unless a budget is given.
pub const DEFAULT_STATE_BUDGET: usize = 20_000_000;

/// A spin configuration: bit `k` set means site `k` is excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Configuration(pub u64);

impl Configuration {
    pub fn excitations(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_excited(self, site: usize) -> bool {
        self.0 & (1u64 << site) != 0
    }

    /// Parses a string of `0`/`1` (or `↓`/`↑`) with site 0 first.
    pub fn from_spins(spins: &str) -> Option<Self> {
        let mut bits = 0u64;
        for (site, c) in spins.chars().enumerate() {
            match c {
                '1' | '↑' => bits |= 1u64 << site,
                '0' | '↓' => {}
                _ => return None,
            }
        }
        Some(Configuration(bits))
    }

    pub fn to_spins(self, sites: usize) -> String {
        (0..sites).map(|k| if self.is_excited(k) { '1' } else { '0' }).collect()
    }
}

/// All allowed configurations of a lattice, sorted by `(n, occupation)`,
/// with the single-flip adjacency stored as flat index lists.
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    lattice: Lattice,
    states: Vec<u64>,
    column_offsets: Vec<usize>,
    adj_offsets: Vec<usize>,
    adj: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub lattice: String,
    pub sites: usize,
    pub states: usize,
    pub column_sizes: Vec<usize>,
    pub edges: usize,
    /// Entry `n` counts edges between columns `n` and `n + 1`.
    pub edges_between_columns: Vec<usize>,
}

impl ConfigSpace {
    pub fn enumerate(lattice: Lattice) -> Result<Self> {
        Self::enumerate_with_budget(lattice, DEFAULT_STATE_BUDGET)
    }

    pub fn enumerate_with_budget(lattice: Lattice, budget: usize) -> Result<Self> {
        lattice.validate()?;
        let predicted: u128 = transfer_matrix_counts(&lattice).iter().sum();
        if predicted > budget as u128 {
            return Err(Error::Capacity { predicted, budget });
        }

        let masks = lattice.neighbor_masks();
        // Only neighbours with a lower index matter while sites are decided in order.
        let lower: Vec<u64> = masks
            .iter()
            .enumerate()
            .map(|(site, &m)| m & ((1u64 << site) - 1))
            .collect();
        let sites = lattice.num_sites();
        let mut columns: Vec<Vec<u64>> = vec![Vec::new(); sites / 2 + 1];
        extend_independent_sets(&lower, 0, 0, &mut columns);
        while columns.len() > 1 && columns.last().is_some_and(Vec::is_empty) {
            columns.pop();
        }

        let mut states = Vec::with_capacity(predicted as usize);
        let mut column_offsets = vec![0];
        for mut column in columns {
            column.sort_unstable();
            states.extend_from_slice(&column);
            column_offsets.push(states.len());
        }

        let mut space = ConfigSpace {
            lattice,
            states,
            column_offsets,
            adj_offsets: Vec::new(),
            adj: Vec::new(),
        };
        space.build_adjacency(&masks);
        Ok(space)
    }

    fn build_adjacency(&mut self, masks: &[u64]) {
        let sites = self.lattice.num_sites();
        let mut adj_offsets = Vec::with_capacity(self.states.len() + 1);
        let mut adj = Vec::new();
        adj_offsets.push(0);
        let mut row = Vec::with_capacity(sites);
        for &s in &self.states {
            row.clear();
            for (site, &mask) in masks.iter().enumerate() {
                let bit = 1u64 << site;
                let flipped = if s & bit != 0 {
                    s ^ bit
                } else if s & mask == 0 {
                    s | bit
                } else {
                    continue;
                };
                let j = self
                    .index_of(Configuration(flipped))
                    .expect("flip of an allowed state stays in the enumerated space");
                row.push(j as u32);
            }
            row.sort_unstable();
            adj.extend_from_slice(&row);
            adj_offsets.push(adj.len());
        }
        self.adj_offsets = adj_offsets;
        self.adj = adj;
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest excitation number present.
    pub fn n_max(&self) -> usize {
        self.column_offsets.len() - 2
    }

    pub fn state(&self, index: usize) -> Configuration {
        Configuration(self.states[index])
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = Configuration> + '_ {
        self.states.iter().map(|&s| Configuration(s))
    }

    pub fn column(&self, n: usize) -> Range<usize> {
        if n > self.n_max() {
            return 0..0;
        }
        self.column_offsets[n]..self.column_offsets[n + 1]
    }

    pub fn column_sizes(&self) -> Vec<usize> {
        self.column_offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn column_of(&self, index: usize) -> usize {
        self.states[index].count_ones() as usize
    }

    pub fn index_of(&self, config: Configuration) -> Option<usize> {
        let range = self.column(config.excitations());
        self.states[range.clone()]
            .binary_search(&config.0)
            .ok()
            .map(|i| range.start + i)
    }

    pub fn neighbors(&self, index: usize) -> Result<&[u32]> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange { index, len: self.len() });
        }
        Ok(self.neighbors_unchecked(index))
    }

    #[inline]
    pub(crate) fn neighbors_unchecked(&self, index: usize) -> &[u32] {
        &self.adj[self.adj_offsets[index]..self.adj_offsets[index + 1]]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adj_offsets[index + 1] - self.adj_offsets[index]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }

    /// Number of links from state `index` into column `column_of(index) + 1`.
    pub fn forward_degree(&self, index: usize) -> usize {
        let n = self.column_of(index);
        self.neighbors_unchecked(index)
            .iter()
            .filter(|&&j| self.column_of(j as usize) > n)
            .count()
    }

    /// Number of links from state `index` into the column below it.
    pub fn backward_degree(&self, index: usize) -> usize {
        self.degree(index) - self.forward_degree(index)
    }

    /// Squared amplitude summed per column.
    pub fn column_projection(&self, amplitudes: &[Complex64]) -> Result<ExcitationDistribution> {
        if amplitudes.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: amplitudes.len(),
            });
        }
        let p = (0..=self.n_max())
            .map(|n| amplitudes[self.column(n)].iter().map(|a| a.norm_sqr()).sum())
            .collect();
        Ok(ExcitationDistribution::new(p))
    }

    pub fn summary(&self) -> SpaceSummary {
        let edges_between_columns = (0..self.n_max())
            .map(|n| self.column(n + 1).map(|i| self.backward_degree(i)).sum())
            .collect();
        SpaceSummary {
            lattice: self.lattice.label(),
            sites: self.lattice.num_sites(),
            states: self.len(),
            column_sizes: self.column_sizes(),
            edges: self.num_edges(),
            edges_between_columns,
        }
    }

    /// Plain-text edge list: `#` header lines, then one `i j` line per
    /// undirected edge with `i < j` (state indices in enumeration order).
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# lattice {}", self.lattice.label());
        let _ = writeln!(out, "# states {} edges {}", self.len(), self.num_edges());
        for i in 0..self.len() {
            for &j in self.neighbors_unchecked(i) {
                if (j as usize) > i {
                    let _ = writeln!(out, "{i} {j}");
                }
            }
        }
        out
    }
}

fn extend_independent_sets(lower: &[u64], site: usize, current: u64, columns: &mut [Vec<u64>]) {
    if site == lower.len() {
        columns[current.count_ones() as usize].push(current);
        return;
    }
    extend_independent_sets(lower, site + 1, current, columns);
    if current & lower[site] == 0 {
        extend_independent_sets(lower, site + 1, current | (1u64 << site), columns);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_columns(lattice: &Lattice) -> Vec<usize> {
        let sites = lattice.num_sites();
        let mut counts = vec![0usize; sites / 2 + 1];
        for mask in 0..1u64 << sites {
            if lattice.is_allowed(mask) {
                counts[mask.count_ones() as usize] += 1;
            }
        }
        while counts.len() > 1 && *counts.last().unwrap() == 0 {
            counts.pop();
        }
        counts
    }

    #[test]
    fn ring_four() {
        let space = ConfigSpace::enumerate(Lattice::ring(4).unwrap()).unwrap();
        assert_eq!(space.len(), 7);
        assert_eq!(space.column_sizes(), vec![1, 4, 2]);
        assert_eq!(space.column_sizes(), brute_force_columns(space.lattice()));
    }

    #[test]
    fn ring_eight() {
        let space = ConfigSpace::enumerate(Lattice::ring(8).unwrap()).unwrap();
        assert_eq!(space.len(), 47);
        assert_eq!(space.column_sizes(), vec![1, 8, 20, 16, 2]);
    }

    #[test]
    fn ring_two() {
        let space = ConfigSpace::enumerate(Lattice::ring(2).unwrap()).unwrap();
        let states: Vec<u64> = space.states().map(|c| c.0).collect();
        assert_eq!(states, vec![0b00, 0b01, 0b10]);
        assert_eq!(space.neighbors(1).unwrap(), &[0]);
    }

    #[test]
    fn torus_three_by_three() {
        let lattice = Lattice::torus(3, 3).unwrap();
        let space = ConfigSpace::enumerate(lattice).unwrap();
        // frozen from the brute-force filter over 2^9 masks
        assert_eq!(space.column_sizes(), vec![1, 9, 18, 6]);
        assert_eq!(space.len(), 34);
        assert_eq!(space.column_sizes(), brute_force_columns(&lattice));
    }

    #[test]
    fn ring4_links_by_column() {
        let space = ConfigSpace::enumerate(Lattice::ring(8).unwrap()).unwrap();
        let from = space.index_of(Configuration::from_spins("↓↑↓↑↓↓↓↓").unwrap()).unwrap();
        let linked = space.index_of(Configuration::from_spins("↓↑↓↑↓↓↑↓").unwrap()).unwrap();
        let unlinked = space.index_of(Configuration::from_spins("↓↑↓↓↑↓↑↓").unwrap()).unwrap();
        let nbrs = space.neighbors(from).unwrap();
        assert!(nbrs.contains(&(linked as u32)));
        assert!(!nbrs.contains(&(unlinked as u32)));
    }

    #[test]
    fn empty_and_maximal_degrees() {
        for l in [4usize, 6, 10] {
            let space = ConfigSpace::enumerate(Lattice::ring(l).unwrap()).unwrap();
            assert_eq!(space.degree(0), l);
            let n = l / 2;
            for i in space.column(n) {
                let nbrs = space.neighbors(i).unwrap();
                assert_eq!(nbrs.len(), n);
                assert!(nbrs.iter().all(|&j| space.column_of(j as usize) == n - 1));
            }
        }
    }

    #[test]
    fn neighbors_out_of_range() {
        let space = ConfigSpace::enumerate(Lattice::ring(4).unwrap()).unwrap();
        assert!(matches!(
            space.neighbors(7),
            Err(Error::IndexOutOfRange { index: 7, len: 7 })
        ));
    }

    #[test]
    fn capacity_error_names_prediction() {
        let err = ConfigSpace::enumerate_with_budget(Lattice::ring(20).unwrap(), 1000).unwrap_err();
        match err {
            Error::Capacity { predicted, budget } => {
                assert_eq!(predicted, 15127);
                assert_eq!(budget, 1000);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn projection_examples() {
        let space = ConfigSpace::enumerate(Lattice::ring(8).unwrap()).unwrap();
        let mut psi = vec![Complex64::new(0.0, 0.0); space.len()];
        assert!(space.column_projection(&psi).unwrap().p.iter().all(|&p| p == 0.0));

        psi[space.column(3).start + 2] = Complex64::new(0.0, 1.0);
        assert_eq!(space.column_projection(&psi).unwrap().p, vec![0.0, 0.0, 0.0, 1.0, 0.0]);

        let amp = Complex64::new(1.0 / 47f64.sqrt(), 0.0);
        let uniform = vec![amp; 47];
        let p = space.column_projection(&uniform).unwrap().p;
        for (pn, nu) in p.iter().zip([1.0, 8.0, 20.0, 16.0, 2.0]) {
            assert!((pn - nu / 47.0).abs() < 1e-15);
        }

        assert!(matches!(
            space.column_projection(&uniform[..40]),
            Err(Error::DimensionMismatch { expected: 47, got: 40 })
        ));
    }

    #[test]
    fn adjacency_is_symmetric_and_changes_n_by_one() {
        for lattice in [Lattice::ring(11).unwrap(), Lattice::torus(4, 3).unwrap()] {
            let space = ConfigSpace::enumerate(lattice).unwrap();
            for i in 0..space.len() {
                for &j in space.neighbors(i).unwrap() {
                    let j = j as usize;
                    assert_ne!(i, j);
                    assert!(space.neighbors(j).unwrap().contains(&(i as u32)));
                    assert_eq!(space.column_of(i).abs_diff(space.column_of(j)), 1);
                    assert_eq!((space.state(i).0 ^ space.state(j).0).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn edge_list_and_summary() {
        let space = ConfigSpace::enumerate(Lattice::ring(4).unwrap()).unwrap();
        let summary = space.summary();
        assert_eq!(summary.edges, 8);
        assert_eq!(summary.edges_between_columns, vec![4, 4]);
        let text = space.edge_list();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[0], "0 1");
    }
}
