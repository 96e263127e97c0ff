//! The 2x2 nearest-neighbor contingency table: cell (i, j) counts the
//! (base, NN) pairs whose base point has class i and whose nearest neighbor
//! has class j. Row sums are the fixed class sizes; column sums count how
//! often each class serves as a NN.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nngraph::NnDigraph;
use crate::pattern::{Class, MarkedPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Nnct {
    counts: [[u64; 2]; 2],
    row_sums: [u64; 2],
    col_sums: [u64; 2],
    n: u64,
}

impl Nnct {
    /// Tabulate the (base, NN) class pairs of a pattern. Requires both
    /// classes to be present.
    pub fn from_pattern(pattern: &MarkedPattern, graph: &NnDigraph) -> Result<Nnct> {
        if graph.n() != pattern.n() {
            return Err(Error::LengthMismatch {
                points: pattern.n(),
                labels: graph.n(),
            });
        }
        Self::from_labels(pattern.labels(), graph.nn_index())
    }

    /// Tabulate from labels and precomputed out-edges. Used directly by the
    /// label-randomization engine, where the digraph is frozen.
    pub fn from_labels(labels: &[Class], nn_index: &[usize]) -> Result<Nnct> {
        let mut counts = [[0u64; 2]; 2];
        for (u, &v) in nn_index.iter().enumerate() {
            counts[labels[u].index()][labels[v].index()] += 1;
        }
        let table = Self::from_counts(counts)?;
        if table.row_sums[0] == 0 {
            return Err(Error::EmptyClass(1));
        }
        if table.row_sums[1] == 0 {
            return Err(Error::EmptyClass(2));
        }
        Ok(table)
    }

    /// Build a table from raw cell counts, deriving the marginals. This is
    /// how published tables (counts only, no coordinates) enter the crate.
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Result<Nnct> {
        let row_sums = [counts[0][0] + counts[0][1], counts[1][0] + counts[1][1]];
        let col_sums = [counts[0][0] + counts[1][0], counts[0][1] + counts[1][1]];
        let n = row_sums[0] + row_sums[1];
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        debug_assert_eq!(n, col_sums[0] + col_sums[1]);
        Ok(Nnct {
            counts,
            row_sums,
            col_sums,
            n,
        })
    }

    pub fn counts(&self) -> [[u64; 2]; 2] {
        self.counts
    }

    pub fn count(&self, base: Class, neighbor: Class) -> u64 {
        self.counts[base.index()][neighbor.index()]
    }

    pub fn row_sums(&self) -> [u64; 2] {
        self.row_sums
    }

    pub fn col_sums(&self) -> [u64; 2] {
        self.col_sums
    }

    pub fn row_sum(&self, class: Class) -> u64 {
        self.row_sums[class.index()]
    }

    pub fn col_sum(&self, class: Class) -> u64 {
        self.col_sums[class.index()]
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n1(&self) -> u64 {
        self.row_sums[0]
    }

    pub fn n2(&self) -> u64 {
        self.row_sums[1]
    }

    /// Row-conditional cell shares plus marginal row/column shares, all as
    /// proportions in [0, 1].
    pub fn percentages(&self) -> NnctShares {
        let mut row_conditional = [[0.0; 2]; 2];
        for (i, row) in row_conditional.iter_mut().enumerate() {
            if self.row_sums[i] > 0 {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = self.counts[i][j] as f64 / self.row_sums[i] as f64;
                }
            }
        }
        let n = self.n as f64;
        NnctShares {
            row_conditional,
            row_share: [self.row_sums[0] as f64 / n, self.row_sums[1] as f64 / n],
            col_share: [self.col_sums[0] as f64 / n, self.col_sums[1] as f64 / n],
        }
    }

    /// Aligned text rendering with marginals.
    pub fn render_text(&self, class_names: &[String; 2]) -> String {
        let w = class_names.iter().map(|s| s.len()).max().unwrap_or(1).max(7);
        let mut out = String::new();
        out.push_str(&format!(
            "{:>width$} | {:>width$} {:>width$} | {:>width$}\n",
            "base\\NN",
            class_names[0],
            class_names[1],
            "sum",
            width = w
        ));
        for (i, name) in class_names.iter().enumerate() {
            out.push_str(&format!(
                "{:>width$} | {:>width$} {:>width$} | {:>width$}\n",
                name,
                self.counts[i][0],
                self.counts[i][1],
                self.row_sums[i],
                width = w
            ));
        }
        out.push_str(&format!(
            "{:>width$} | {:>width$} {:>width$} | {:>width$}\n",
            "sum",
            self.col_sums[0],
            self.col_sums[1],
            self.n,
            width = w
        ));
        out
    }
}

/// Proportional view of a NNCT.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NnctShares {
    /// `row_conditional[i][j]` = N_ij / n_i.
    pub row_conditional: [[f64; 2]; 2],
    /// Row sums over n.
    pub row_share: [f64; 2],
    /// Column sums over n.
    pub col_share: [f64; 2],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nngraph::NnDigraph;
    use crate::pattern::{gen_csr, relabel, MarkedPattern, Region};

    #[test]
    fn two_points_cross_classes() {
        let p = MarkedPattern::new(
            vec![(0.1, 0.1), (0.9, 0.9)],
            vec![Class::One, Class::Two],
            Region::unit_square(),
        )
        .unwrap();
        let g = NnDigraph::build(&p).unwrap();
        let t = Nnct::from_pattern(&p, &g).unwrap();
        assert_eq!(t.counts(), [[0, 1], [1, 0]]);
        assert_eq!(t.row_sums(), [1, 1]);
        assert_eq!(t.col_sums(), [1, 1]);
        assert_eq!(t.n(), 2);
    }

    #[test]
    fn missing_class_is_an_error() {
        let p = MarkedPattern::new(
            vec![(0.1, 0.1), (0.9, 0.9)],
            vec![Class::One, Class::One],
            Region::unit_square(),
        )
        .unwrap();
        let g = NnDigraph::build(&p).unwrap();
        assert!(matches!(Nnct::from_pattern(&p, &g), Err(Error::EmptyClass(2))));
    }

    #[test]
    fn marginals_always_consistent() {
        for seed in 0..30 {
            let p = gen_csr(17, 23, Region::unit_square(), seed).unwrap();
            let g = NnDigraph::build(&p).unwrap();
            let t = Nnct::from_pattern(&p, &g).unwrap();
            let c = t.counts();
            assert_eq!(c[0][0] + c[0][1], t.row_sums()[0]);
            assert_eq!(c[1][0] + c[1][1], t.row_sums()[1]);
            assert_eq!(c[0][0] + c[1][0], t.col_sums()[0]);
            assert_eq!(c[0][1] + c[1][1], t.col_sums()[1]);
            assert_eq!(t.n(), 40);
            assert_eq!(t.row_sums(), [17, 23]);
        }
    }

    #[test]
    fn row_sums_fixed_under_relabel_cells_vary() {
        let p = gen_csr(30, 30, Region::unit_square(), 5).unwrap();
        let g = NnDigraph::build(&p).unwrap();
        let base = Nnct::from_pattern(&p, &g).unwrap();
        let mut any_cell_changed = false;
        for seed in 0..10 {
            let q = relabel(&p, seed);
            let t = Nnct::from_labels(q.labels(), g.nn_index()).unwrap();
            assert_eq!(t.row_sums(), base.row_sums());
            assert_eq!(t.n(), base.n());
            if t.counts() != base.counts() {
                any_cell_changed = true;
            }
        }
        assert!(any_cell_changed);
    }

    #[test]
    fn pielou_percentages() {
        let t = Nnct::from_counts([[137, 23], [38, 30]]).unwrap();
        assert_eq!(t.row_sums(), [160, 68]);
        assert_eq!(t.col_sums(), [175, 53]);
        assert_eq!(t.n(), 228);
        let shares = t.percentages();
        // Printed as 86% / 15% in the source table; unrounded 85.6% / 14.4%.
        assert!((shares.row_conditional[0][0] - 0.85625).abs() < 1e-12);
        assert!((shares.row_conditional[0][1] - 0.14375).abs() < 1e-12);
    }

    #[test]
    fn swamp_percentages_row_two() {
        let t = Nnct::from_counts([[149, 33], [43, 48]]).unwrap();
        assert_eq!(t.col_sums(), [192, 81]);
        let shares = t.percentages();
        assert!((shares.row_conditional[1][0] * 100.0 - 47.0).abs() < 0.5);
        assert!((shares.row_conditional[1][1] * 100.0 - 53.0).abs() < 0.5);
    }

    #[test]
    fn uniform_table_is_half_everywhere() {
        let t = Nnct::from_counts([[1, 1], [1, 1]]).unwrap();
        let shares = t.percentages();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(shares.row_conditional[i][j], 0.5);
            }
        }
    }

    #[test]
    fn render_text_contains_marginals() {
        let t = Nnct::from_counts([[137, 23], [38, 30]]).unwrap();
        let names = ["1".to_string(), "2".to_string()];
        let text = t.render_text(&names);
        assert!(text.contains("137"));
        assert!(text.contains("228"));
    }
}
