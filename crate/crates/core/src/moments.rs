//! Closed-form expectations, variances, and covariances of NNCT cell counts
//! under random labeling, conditional on (n1, n2, Q, R).
//!
//! In the two-class case the complement identities N12 = n1 - N11,
//! N22 = n2 - N21, and C2 = n - C1 make every needed column and difference
//! moment derivable from Var[N_ij] and Cov[N11, N21], so the general q-class
//! covariance catalogue is not required.

use crate::error::{Error, Result};

/// Probabilities that a random ordered pair / triplet / quartet of distinct
/// points carries the indicated class labels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairProbs {
    pub p_11: f64,
    pub p_22: f64,
    pub p_12: f64,
    pub p_21: f64,
    pub p_111: f64,
    pub p_222: f64,
    pub p_112: f64,
    pub p_221: f64,
    pub p_1111: f64,
    pub p_2222: f64,
    pub p_1122: f64,
    /// Ordered distinct quartet with labels (1,1,1,2); needed by
    /// Cov[N11, N21] and obtained by the same falling-factorial pattern as
    /// the listed quartet probabilities.
    pub p_1112: f64,
}

fn falling(n: f64, k: u32) -> f64 {
    (0..k).map(|i| n - i as f64).product()
}

/// All pair/triplet/quartet label probabilities for class sizes (n1, n2).
/// Quartet denominators require n >= 4.
pub fn pair_probs(n1: u64, n2: u64) -> Result<PairProbs> {
    let n = n1 + n2;
    if n < 4 {
        return Err(Error::TooFewPoints {
            need: 4,
            got: n as usize,
        });
    }
    let (n, n1, n2) = (n as f64, n1 as f64, n2 as f64);
    let d2 = n * (n - 1.0);
    let d3 = d2 * (n - 2.0);
    let d4 = d3 * (n - 3.0);
    Ok(PairProbs {
        p_11: falling(n1, 2) / d2,
        p_22: falling(n2, 2) / d2,
        p_12: n1 * n2 / d2,
        p_21: n2 * n1 / d2,
        p_111: falling(n1, 3) / d3,
        p_222: falling(n2, 3) / d3,
        p_112: falling(n1, 2) * n2 / d3,
        p_221: falling(n2, 2) * n1 / d3,
        p_1111: falling(n1, 4) / d4,
        p_2222: falling(n2, 4) / d4,
        p_1122: falling(n1, 2) * falling(n2, 2) / d4,
        p_1112: falling(n1, 3) * n2 / d4,
    })
}

/// Expected cell counts under RL / CSR independence: E[N_ii] =
/// n_i (n_i - 1)/(n - 1) and E[N_ij] = n_i n_j/(n - 1). Requires n >= 2.
pub fn expected_counts(n1: u64, n2: u64) -> Result<[[f64; 2]; 2]> {
    let n = n1 + n2;
    if n < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            got: n as usize,
        });
    }
    let (n, n1, n2) = (n as f64, n1 as f64, n2 as f64);
    let d = n - 1.0;
    Ok([
        [n1 * (n1 - 1.0) / d, n1 * n2 / d],
        [n2 * n1 / d, n2 * (n2 - 1.0) / d],
    ])
}

/// Values in (-1e-9, 0] are rounding noise and clamp to zero; anything more
/// negative means (Q, R) are inconsistent with the class sizes.
fn guard_variance(v: f64) -> Result<f64> {
    if v < -1e-9 {
        Err(Error::NegativeVariance(v))
    } else {
        Ok(v.max(0.0))
    }
}

fn var_diag(n: f64, q: f64, r: f64, p2: f64, p3: f64, p4: f64) -> f64 {
    (n + r) * p2 + (2.0 * n - 2.0 * r + q) * p3 + (n * n - 3.0 * n - q + r) * p4
        - (n * p2) * (n * p2)
}

fn var_off(n: f64, q: f64, r: f64, p2: f64, p3: f64, p4: f64) -> f64 {
    n * p2 + q * p3 + (n * n - 3.0 * n - q + r) * p4 - (n * p2) * (n * p2)
}

/// Cell count variances conditional on (Q, R). Q and R are real-valued so
/// the QR-adjusted constants 0.63n / 0.62n can be substituted directly.
pub fn var_counts(n1: u64, n2: u64, q: f64, r: f64) -> Result<[[f64; 2]; 2]> {
    let p = pair_probs(n1, n2)?;
    let n = (n1 + n2) as f64;
    let v11 = guard_variance(var_diag(n, q, r, p.p_11, p.p_111, p.p_1111))?;
    let v12 = guard_variance(var_off(n, q, r, p.p_12, p.p_112, p.p_1122))?;
    let v21 = guard_variance(var_off(n, q, r, p.p_21, p.p_221, p.p_1122))?;
    let v22 = guard_variance(var_diag(n, q, r, p.p_22, p.p_222, p.p_2222))?;
    Ok([[v11, v12], [v21, v22]])
}

/// Covariance of the two counts in column 1:
/// (n - R + Q) p_112 + (n^2 - 3n - Q + R) p_1112 - n^2 p_11 p_12.
pub fn cov_n11_n21(n1: u64, n2: u64, q: f64, r: f64) -> Result<f64> {
    let p = pair_probs(n1, n2)?;
    let n = (n1 + n2) as f64;
    Ok((n - r + q) * p.p_112 + (n * n - 3.0 * n - q + r) * p.p_1112 - n * n * p.p_11 * p.p_12)
}

/// Column-sum variances and the count/column covariances used by the
/// cell-specific difference statistics.
#[derive(Clone, Copy, Debug)]
pub struct ColumnMoments {
    /// Var[C_1] and Var[C_2]; equal in the two-class case since C_2 = n - C_1.
    pub var_col: [f64; 2],
    /// `cov_count_col[i][j]` = Cov[N_ij, C_j].
    pub cov_count_col: [[f64; 2]; 2],
}

pub fn column_moments(n1: u64, n2: u64, q: f64, r: f64) -> Result<ColumnMoments> {
    let v = var_counts(n1, n2, q, r)?;
    let cov = cov_n11_n21(n1, n2, q, r)?;
    let var_c1 = guard_variance(v[0][0] + v[1][0] + 2.0 * cov)?;
    Ok(ColumnMoments {
        var_col: [var_c1, var_c1],
        cov_count_col: [
            [v[0][0] + cov, v[0][0] + cov],
            [v[1][0] + cov, v[1][0] + cov],
        ],
    })
}

/// Variances of the difference statistics T_ij = N_ij - (n_i - 1)C_j/(n-1)
/// (diagonal) and T_ij = N_ij - n_i C_j/(n-1) (off-diagonal).
pub fn var_t(n1: u64, n2: u64, q: f64, r: f64) -> Result<[[f64; 2]; 2]> {
    let v = var_counts(n1, n2, q, r)?;
    let col = column_moments(n1, n2, q, r)?;
    let n = (n1 + n2) as f64;
    let d = n - 1.0;
    let mut out = [[0.0; 2]; 2];
    let sizes = [n1 as f64, n2 as f64];
    for i in 0..2 {
        for j in 0..2 {
            let factor = if i == j { (sizes[i] - 1.0) / d } else { sizes[i] / d };
            let raw = v[i][j] + factor * factor * col.var_col[j]
                - 2.0 * factor * col.cov_count_col[i][j];
            out[i][j] = guard_variance(raw)?;
        }
    }
    Ok(out)
}

/// Mean and variance of T_n = N11/n1 - N21/n2: E[T_n] = -1/(n-1) and
/// Var[T_n] = Var[N11]/n1^2 + Var[N21]/n2^2 - 2 Cov[N11,N21]/(n1 n2).
pub fn tn_moments(n1: u64, n2: u64, q: f64, r: f64) -> Result<(f64, f64)> {
    let v = var_counts(n1, n2, q, r)?;
    let cov = cov_n11_n21(n1, n2, q, r)?;
    let n = (n1 + n2) as f64;
    let (f1, f2) = (n1 as f64, n2 as f64);
    let var = guard_variance(v[0][0] / (f1 * f1) + v[1][0] / (f2 * f2) - 2.0 * cov / (f1 * f2))?;
    Ok((-1.0 / (n - 1.0), var))
}

/// Empirical stand-ins for Q and R under CSR: (0.63 n, 0.62 n).
pub fn qr_adjust(n: u64) -> (f64, f64) {
    (0.63 * n as f64, 0.62 * n as f64)
}

/// Every moment the test statistics need, computed in one pass.
#[derive(Clone, Copy, Debug)]
pub struct MomentSet {
    pub e_counts: [[f64; 2]; 2],
    pub var_counts: [[f64; 2]; 2],
    pub cov_n11_n21: f64,
    pub var_col: [f64; 2],
    pub cov_count_col: [[f64; 2]; 2],
    pub var_t: [[f64; 2]; 2],
    pub e_tn: f64,
    pub var_tn: f64,
}

impl MomentSet {
    pub fn compute(n1: u64, n2: u64, q: f64, r: f64) -> Result<MomentSet> {
        let e_counts = expected_counts(n1, n2)?;
        let var = var_counts(n1, n2, q, r)?;
        let cov = cov_n11_n21(n1, n2, q, r)?;
        let col = column_moments(n1, n2, q, r)?;
        let var_t = var_t(n1, n2, q, r)?;
        let (e_tn, var_tn) = tn_moments(n1, n2, q, r)?;
        Ok(MomentSet {
            e_counts,
            var_counts: var,
            cov_n11_n21: cov,
            var_col: col.var_col,
            cov_count_col: col.cov_count_col,
            var_t,
            e_tn,
            var_tn,
        })
    }
}
