//! Ripley's univariate and bivariate L-functions with pointwise Monte Carlo
//! envelopes under CSR independence.
//!
//! K is estimated with the isotropic edge correction for rectangles, and the
//! grid is capped at a quarter of the shorter region side where that
//! correction is reliable. L(t) - t is reported: zero under CSR, negative
//! under bivariate segregation, positive under association.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{gen_csr_with, Class, MarkedPattern, Region};
use crate::rng::replicate_rng;

/// Which points enter a univariate estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassSelector {
    All,
    Only(Class),
}

/// Which curve an envelope wraps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeTarget {
    UniAll,
    Uni(Class),
    Bivariate,
}

/// An L(t) - t curve, optionally with pointwise 95% simulation bounds.
#[derive(Clone, Debug, Serialize)]
pub struct LCurve {
    pub t_grid: Vec<f64>,
    pub l_minus_t: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo_95: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi_95: Option<Vec<f64>>,
}

/// Largest distance at which the rectangular edge correction is used.
pub fn grid_limit(region: &Region) -> f64 {
    region.shorter_side() / 4.0
}

/// 64 equally spaced distances from 0 to the quarter-side limit.
pub fn default_t_grid(region: &Region) -> Vec<f64> {
    let limit = grid_limit(region);
    (0..64).map(|i| limit * i as f64 / 63.0).collect()
}

fn validate_grid(t_grid: &[f64], region: &Region) -> Result<()> {
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadGrid);
    }
    let limit = grid_limit(region);
    if *t_grid.last().unwrap() > limit + 1e-12 {
        return Err(Error::GridBound { limit });
    }
    Ok(())
}

/// Fraction of the circle centered at `(x, y)` with radius `d` that lies
/// inside the rectangle. Exact for d up to half the shorter side.
fn isotropic_weight(region: &Region, x: f64, y: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 1.0;
    }
    // Half-angles of the arcs protruding past each side.
    let arc = |dist: f64| {
        if dist < d {
            (dist / d).acos()
        } else {
            0.0
        }
    };
    let left = arc(x - region.x_min());
    let right = arc(region.x_max() - x);
    let bottom = arc(y - region.y_min());
    let top = arc(region.y_max() - y);
    // Adjacent arcs overlap past a covered corner; remove the double count.
    let corner = |a: f64, b: f64| (a + b - std::f64::consts::FRAC_PI_2).max(0.0);
    let exterior = 2.0 * (left + right + bottom + top)
        - corner(left, bottom)
        - corner(left, top)
        - corner(right, bottom)
        - corner(right, top);
    1.0 - exterior / std::f64::consts::TAU
}

/// Accumulate `weight` at the first grid index whose t covers distance `d`.
fn bin_into(deltas: &mut [f64], t_grid: &[f64], d: f64, weight: f64) {
    let idx = t_grid.partition_point(|&t| t < d);
    if idx < deltas.len() {
        deltas[idx] += weight;
    }
}

fn l_from_cumulative(cum: &[f64], t_grid: &[f64], scale: f64) -> Vec<f64> {
    cum.iter()
        .zip(t_grid)
        .map(|(&k, &t)| (scale * k / std::f64::consts::PI).sqrt() - t)
        .collect()
}

/// Univariate L(t) - t for the selected class (or all points), isotropic
/// edge correction, estimator |A| sum 1(d <= t)/w / (m (m-1)).
pub fn l_univariate(pattern: &MarkedPattern, sel: ClassSelector, t_grid: &[f64]) -> Result<LCurve> {
    let region = pattern.region();
    validate_grid(t_grid, &region)?;
    let points: Vec<(f64, f64)> = match sel {
        ClassSelector::All => pattern.points().to_vec(),
        ClassSelector::Only(class) => pattern
            .points()
            .iter()
            .zip(pattern.labels())
            .filter(|(_, &l)| l == class)
            .map(|(&p, _)| p)
            .collect(),
    };
    let m = points.len();
    if m < 2 {
        return Err(Error::TooFewPoints { need: 2, got: m });
    }
    let t_max = *t_grid.last().unwrap();
    let mut deltas = vec![0.0; t_grid.len()];
    for a in 0..m {
        let (ax, ay) = points[a];
        for &(bx, by) in &points[a + 1..] {
            let d = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
            if d <= t_max {
                let w = 1.0 / isotropic_weight(&region, ax, ay, d)
                    + 1.0 / isotropic_weight(&region, bx, by, d);
                bin_into(&mut deltas, t_grid, d, w);
            }
        }
    }
    let mut cum = deltas;
    for i in 1..cum.len() {
        cum[i] += cum[i - 1];
    }
    let scale = region.area() / (m as f64 * (m as f64 - 1.0));
    Ok(LCurve {
        t_grid: t_grid.to_vec(),
        l_minus_t: l_from_cumulative(&cum, t_grid, scale),
        lo_95: None,
        hi_95: None,
    })
}

/// Bivariate L12(t) - t, symmetrized as the average of the two directed
/// cross-K estimates so the result is invariant under label swap.
pub fn l_bivariate(pattern: &MarkedPattern, t_grid: &[f64]) -> Result<LCurve> {
    let region = pattern.region();
    validate_grid(t_grid, &region)?;
    pattern.require_both_classes()?;
    let n1 = pattern.n1() as f64;
    let n2 = pattern.n2() as f64;
    let t_max = *t_grid.last().unwrap();
    let points = pattern.points();
    let labels = pattern.labels();
    let mut deltas_12 = vec![0.0; t_grid.len()];
    let mut deltas_21 = vec![0.0; t_grid.len()];
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if labels[a] == labels[b] {
                continue;
            }
            let (ax, ay) = points[a];
            let (bx, by) = points[b];
            let d = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
            if d > t_max {
                continue;
            }
            let w_a = 1.0 / isotropic_weight(&region, ax, ay, d);
            let w_b = 1.0 / isotropic_weight(&region, bx, by, d);
            // The base point of each directed pair carries the correction.
            let (w_12, w_21) = if labels[a] == Class::One {
                (w_a, w_b)
            } else {
                (w_b, w_a)
            };
            bin_into(&mut deltas_12, t_grid, d, w_12);
            bin_into(&mut deltas_21, t_grid, d, w_21);
        }
    }
    let mut cum = vec![0.0; t_grid.len()];
    for i in 0..cum.len() {
        cum[i] = deltas_12[i] + deltas_21[i];
        if i > 0 {
            cum[i] += cum[i - 1];
        }
    }
    let scale = region.area() / (2.0 * n1 * n2);
    Ok(LCurve {
        t_grid: t_grid.to_vec(),
        l_minus_t: l_from_cumulative(&cum, t_grid, scale),
        lo_95: None,
        hi_95: None,
    })
}

fn estimate_for(pattern: &MarkedPattern, target: EnvelopeTarget, t_grid: &[f64]) -> Result<LCurve> {
    match target {
        EnvelopeTarget::UniAll => l_univariate(pattern, ClassSelector::All, t_grid),
        EnvelopeTarget::Uni(class) => l_univariate(pattern, ClassSelector::Only(class), t_grid),
        EnvelopeTarget::Bivariate => l_bivariate(pattern, t_grid),
    }
}

/// Observed curve plus pointwise 2.5%/97.5% bounds from `n_sim` CSR
/// simulations with matched class sizes and region. At the minimum
/// n_sim = 39 the bounds are the simulation minima and maxima.
pub fn envelope(
    pattern: &MarkedPattern,
    target: EnvelopeTarget,
    n_sim: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<LCurve> {
    if n_sim < 39 {
        return Err(Error::TooFewSims { need: 39, got: n_sim });
    }
    let mut observed = estimate_for(pattern, target, t_grid)?;
    let (n1, n2) = (pattern.n1(), pattern.n2());
    let region = pattern.region();
    let curves: Vec<Vec<f64>> = (0..n_sim as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep);
            let sim = gen_csr_with(n1, n2, region, &mut rng).expect("class sizes checked");
            estimate_for(&sim, target, t_grid)
                .expect("simulated pattern matches observed layout")
                .l_minus_t
        })
        .collect();
    let rank = ((0.025 * (n_sim as f64 + 1.0)).floor() as usize).max(1);
    let mut lo = Vec::with_capacity(t_grid.len());
    let mut hi = Vec::with_capacity(t_grid.len());
    let mut column = vec![0.0; n_sim];
    for g in 0..t_grid.len() {
        for (k, curve) in curves.iter().enumerate() {
            column[k] = curve[g];
        }
        column.sort_by(f64::total_cmp);
        lo.push(column[rank - 1]);
        hi.push(column[n_sim - rank]);
    }
    observed.lo_95 = Some(lo);
    observed.hi_95 = Some(hi);
    Ok(observed)
}
