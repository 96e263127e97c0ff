//! Nearest-neighbor digraph of a point pattern, with the two NN-structure
//! statistics the variance formulas condition on: Q (shared-NN ordered pairs)
//! and R (twice the number of reflexive pairs).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kdtree::KdTree;
use crate::pattern::MarkedPattern;

/// Each point's nearest neighbor (ties to the lowest index) and the derived
/// in-degree, Q, and R statistics. Depends only on locations, never labels.
#[derive(Clone, Debug, PartialEq)]
pub struct NnDigraph {
    nn_index: Vec<usize>,
    nn_distance: Vec<f64>,
    in_degree: Vec<usize>,
    q: usize,
    r: usize,
}

impl NnDigraph {
    /// Build the digraph with one out-edge per point.
    pub fn build(pattern: &MarkedPattern) -> Result<NnDigraph> {
        Self::from_points(pattern.points())
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<NnDigraph> {
        let n = points.len();
        if n < 2 {
            return Err(Error::TooFewPoints { need: 2, got: n });
        }
        let tree = KdTree::build(points);
        let edges: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .map(|i| tree.nearest_excluding(points[i].0, points[i].1, i))
            .collect();

        let mut nn_index = Vec::with_capacity(n);
        let mut nn_distance = Vec::with_capacity(n);
        let mut in_degree = vec![0usize; n];
        for &(j, d) in &edges {
            nn_index.push(j);
            nn_distance.push(d);
            in_degree[j] += 1;
        }
        // Q counts ordered pairs of points sharing a NN: a point serving as NN
        // to d others contributes d(d-1) such pairs.
        let q = in_degree.iter().map(|&d| d * d.saturating_sub(1)).sum();
        // Mutual pairs are disjoint, so R (= twice their number) equals the
        // number of points whose NN points back.
        let r = nn_index
            .iter()
            .enumerate()
            .filter(|&(i, &j)| nn_index[j] == i)
            .count();
        Ok(NnDigraph {
            nn_index,
            nn_distance,
            in_degree,
            q,
            r,
        })
    }

    pub fn n(&self) -> usize {
        self.nn_index.len()
    }

    pub fn nn_index(&self) -> &[usize] {
        &self.nn_index
    }

    pub fn nn_distance(&self) -> &[f64] {
        &self.nn_distance
    }

    pub fn in_degree(&self) -> &[usize] {
        &self.in_degree
    }

    /// Number of ordered pairs of points with a shared NN.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Twice the number of reflexive (mutual NN) pairs.
    pub fn r(&self) -> usize {
        self.r
    }

    /// Counts `[Q2, Q3, Q4, Q5, Q6]` of points serving as NN to exactly
    /// 2..=6 other points. In-degrees above 6 cannot occur for distinct
    /// planar points and are reported as an error.
    pub fn q_decomposition(&self) -> Result<[usize; 5]> {
        let mut qk = [0usize; 5];
        for &d in &self.in_degree {
            if d > 6 {
                return Err(Error::InDegreeOverflow(d));
            }
            if d >= 2 {
                qk[d - 2] += 1;
            }
        }
        Ok(qk)
    }
}
