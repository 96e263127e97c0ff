//! Test statistics for two-class NNCTs: Dixon and Ceyhan cell-specific
//! z-scores, Pielou's chi-square and its directional z form, the Monte
//! Carlo-corrected Pielou variants, and the directional tests Z_I / Z_II
//! built on T_n = N11/n1 - N21/n2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{tn_moments, MomentSet};
use crate::pattern::Class;
use crate::table::Nnct;

/// Closed set of statistics this crate computes. The serialized form is the
/// same short code accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatName {
    #[serde(rename = "ZD11")]
    DixonZ11,
    #[serde(rename = "ZD12")]
    DixonZ12,
    #[serde(rename = "ZD21")]
    DixonZ21,
    #[serde(rename = "ZD22")]
    DixonZ22,
    #[serde(rename = "ZC11")]
    CeyhanZ11,
    #[serde(rename = "ZC12")]
    CeyhanZ12,
    #[serde(rename = "ZC21")]
    CeyhanZ21,
    #[serde(rename = "ZC22")]
    CeyhanZ22,
    #[serde(rename = "XP2")]
    PielouChi2,
    #[serde(rename = "ZP")]
    PielouZ,
    #[serde(rename = "Zmc")]
    PielouZmc,
    #[serde(rename = "Zamc")]
    PielouZmcAssoc,
    #[serde(rename = "Zsmc")]
    PielouZmcSeg,
    ZI,
    ZII,
}

impl StatName {
    pub const ALL: [StatName; 15] = [
        StatName::DixonZ11,
        StatName::DixonZ12,
        StatName::DixonZ21,
        StatName::DixonZ22,
        StatName::CeyhanZ11,
        StatName::CeyhanZ12,
        StatName::CeyhanZ21,
        StatName::CeyhanZ22,
        StatName::PielouChi2,
        StatName::PielouZ,
        StatName::PielouZmc,
        StatName::PielouZmcAssoc,
        StatName::PielouZmcSeg,
        StatName::ZI,
        StatName::ZII,
    ];

    /// Every statistic except Pielou's chi-square refers to a standard
    /// normal under the null.
    pub fn is_z_valued(self) -> bool {
        self != StatName::PielouChi2
    }

    pub fn code(self) -> &'static str {
        match self {
            StatName::DixonZ11 => "ZD11",
            StatName::DixonZ12 => "ZD12",
            StatName::DixonZ21 => "ZD21",
            StatName::DixonZ22 => "ZD22",
            StatName::CeyhanZ11 => "ZC11",
            StatName::CeyhanZ12 => "ZC12",
            StatName::CeyhanZ21 => "ZC21",
            StatName::CeyhanZ22 => "ZC22",
            StatName::PielouChi2 => "XP2",
            StatName::PielouZ => "ZP",
            StatName::PielouZmc => "Zmc",
            StatName::PielouZmcAssoc => "Zamc",
            StatName::PielouZmcSeg => "Zsmc",
            StatName::ZI => "ZI",
            StatName::ZII => "ZII",
        }
    }
}

impl fmt::Display for StatName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for StatName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        StatName::ALL
            .into_iter()
            .find(|name| name.code().to_ascii_lowercase() == lower)
            .ok_or_else(|| format!("unknown statistic {s:?}"))
    }
}

/// Location/scale constants for the Monte Carlo-corrected Pielou variants,
/// estimated once from large null simulations and then frozen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrectionConstants {
    pub beta_n: f64,
    pub alpha_a: f64,
    pub beta_a: f64,
    pub alpha_s: f64,
    pub beta_s: f64,
}

impl CorrectionConstants {
    /// The published constants used for inference on data.
    pub const REFERENCE: CorrectionConstants = CorrectionConstants {
        beta_n: 1.277,
        alpha_a: 0.043,
        beta_a: 1.307,
        alpha_s: -0.057,
        beta_s: 1.275,
    };
}

impl Default for CorrectionConstants {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Dixon's cell-specific test: (N_ij - E[N_ij]) / sqrt(Var[N_ij]).
pub fn dixon_z(t: &Nnct, q: f64, r: f64, base: Class, neighbor: Class) -> Result<f64> {
    let m = MomentSet::compute(t.n1(), t.n2(), q, r)?;
    dixon_z_from(t, &m, base, neighbor)
}

fn dixon_z_from(t: &Nnct, m: &MomentSet, base: Class, neighbor: Class) -> Result<f64> {
    let (i, j) = (base.index(), neighbor.index());
    let var = m.var_counts[i][j];
    if var <= 0.0 {
        return Err(Error::DegenerateVariance("Dixon cell statistic"));
    }
    Ok((t.counts()[i][j] as f64 - m.e_counts[i][j]) / var.sqrt())
}

/// Ceyhan's cell-specific test: T_ij / sqrt(Var[T_ij]) with
/// T_ii = N_ii - (n_i - 1) C_i/(n - 1) and T_ij = N_ij - n_i C_j/(n - 1).
pub fn ceyhan_z(t: &Nnct, q: f64, r: f64, base: Class, neighbor: Class) -> Result<f64> {
    let m = MomentSet::compute(t.n1(), t.n2(), q, r)?;
    ceyhan_z_from(t, &m, base, neighbor)
}

fn ceyhan_z_from(t: &Nnct, m: &MomentSet, base: Class, neighbor: Class) -> Result<f64> {
    let (i, j) = (base.index(), neighbor.index());
    let var = m.var_t[i][j];
    if var <= 0.0 {
        return Err(Error::DegenerateVariance("Ceyhan cell statistic"));
    }
    let n = t.n() as f64;
    let ni = t.row_sums()[i] as f64;
    let cj = t.col_sums()[j] as f64;
    let factor = if i == j { ni - 1.0 } else { ni };
    let t_ij = t.counts()[i][j] as f64 - factor * cj / (n - 1.0);
    Ok(t_ij / var.sqrt())
}

/// Pielou's chi-square of independence with expected counts n_i c_j / n.
pub fn pielou_chi2(t: &Nnct) -> Result<f64> {
    for class in Class::BOTH {
        if t.row_sum(class) == 0 {
            return Err(Error::EmptyClass(class.label()));
        }
        if t.col_sum(class) == 0 {
            return Err(Error::EmptyColumn(class.label()));
        }
    }
    let n = t.n() as f64;
    let mut chi2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = t.row_sums()[i] as f64 * t.col_sums()[j] as f64 / n;
            let delta = t.counts()[i][j] as f64 - expected;
            chi2 += delta * delta / expected;
        }
    }
    Ok(chi2)
}

/// Directional form of Pielou's statistic:
/// Z_P = (N11/n1 - N21/n2) sqrt(n1 n2 n / (C1 C2)).
pub fn pielou_z(t: &Nnct) -> Result<f64> {
    for class in Class::BOTH {
        if t.row_sum(class) == 0 {
            return Err(Error::EmptyClass(class.label()));
        }
        if t.col_sum(class) == 0 {
            return Err(Error::EmptyColumn(class.label()));
        }
    }
    let [n1, n2] = t.row_sums().map(|v| v as f64);
    let [c1, c2] = t.col_sums().map(|v| v as f64);
    let n = t.n() as f64;
    let diff = t.counts()[0][0] as f64 / n1 - t.counts()[1][0] as f64 / n2;
    Ok(diff * (n1 * n2 * n / (c1 * c2)).sqrt())
}

/// The three corrected Pielou scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectedPielou {
    /// Scale-corrected score for the two-sided alternative.
    pub z_mc: f64,
    /// Location/scale-corrected score for the association (left-sided) side.
    pub z_a_mc: f64,
    /// Location/scale-corrected score for the segregation (right-sided) side.
    pub z_s_mc: f64,
}

pub fn pielou_z_corrected(t: &Nnct) -> Result<CorrectedPielou> {
    pielou_z_corrected_with(t, &CorrectionConstants::REFERENCE)
}

pub fn pielou_z_corrected_with(t: &Nnct, c: &CorrectionConstants) -> Result<CorrectedPielou> {
    let z = pielou_z(t)?;
    Ok(CorrectedPielou {
        z_mc: z / c.beta_n,
        z_a_mc: (z - c.alpha_a) / c.beta_a,
        z_s_mc: (z - c.alpha_s) / c.beta_s,
    })
}

/// Directional test Z_I: the standardized T_n rescaled by
/// U_n = sqrt(n1 n2 / (C1 C2)).
pub fn z_one(t: &Nnct, q: f64, r: f64) -> Result<f64> {
    for class in Class::BOTH {
        if t.col_sum(class) == 0 {
            return Err(Error::EmptyColumn(class.label()));
        }
    }
    let [n1, n2] = t.row_sums().map(|v| v as f64);
    let [c1, c2] = t.col_sums().map(|v| v as f64);
    let u_n = (n1 * n2 / (c1 * c2)).sqrt();
    Ok(u_n * z_two(t, q, r)?)
}

/// Directional test Z_II: (T_n - E[T_n]) / sqrt(Var[T_n]).
pub fn z_two(t: &Nnct, q: f64, r: f64) -> Result<f64> {
    for class in Class::BOTH {
        if t.row_sum(class) == 0 {
            return Err(Error::EmptyClass(class.label()));
        }
    }
    let (e_tn, var_tn) = tn_moments(t.n1(), t.n2(), q, r)?;
    if var_tn <= 0.0 {
        return Err(Error::DegenerateVariance("T_n"));
    }
    let [n1, n2] = t.row_sums().map(|v| v as f64);
    let t_n = t.counts()[0][0] as f64 / n1 - t.counts()[1][0] as f64 / n2;
    Ok((t_n - e_tn) / var_tn.sqrt())
}

/// One entry point for every statistic, used by the p-value engines and the
/// simulation harness.
pub fn compute_stat(name: StatName, t: &Nnct, q: f64, r: f64) -> Result<f64> {
    match name {
        StatName::DixonZ11 => dixon_z(t, q, r, Class::One, Class::One),
        StatName::DixonZ12 => dixon_z(t, q, r, Class::One, Class::Two),
        StatName::DixonZ21 => dixon_z(t, q, r, Class::Two, Class::One),
        StatName::DixonZ22 => dixon_z(t, q, r, Class::Two, Class::Two),
        StatName::CeyhanZ11 => ceyhan_z(t, q, r, Class::One, Class::One),
        StatName::CeyhanZ12 => ceyhan_z(t, q, r, Class::One, Class::Two),
        StatName::CeyhanZ21 => ceyhan_z(t, q, r, Class::Two, Class::One),
        StatName::CeyhanZ22 => ceyhan_z(t, q, r, Class::Two, Class::Two),
        StatName::PielouChi2 => pielou_chi2(t),
        StatName::PielouZ => pielou_z(t),
        StatName::PielouZmc => Ok(pielou_z_corrected(t)?.z_mc),
        StatName::PielouZmcAssoc => Ok(pielou_z_corrected(t)?.z_a_mc),
        StatName::PielouZmcSeg => Ok(pielou_z_corrected(t)?.z_s_mc),
        StatName::ZI => z_one(t, q, r),
        StatName::ZII => z_two(t, q, r),
    }
}

/// Every statistic on one table; degenerate entries carry their error
/// instead of being dropped.
pub fn run_all(t: &Nnct, q: f64, r: f64) -> Vec<(StatName, Result<f64>)> {
    StatName::ALL
        .into_iter()
        .map(|name| (name, compute_stat(name, t, q, r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pielou_table() -> Nnct {
        Nnct::from_counts([[137, 23], [38, 30]]).unwrap()
    }

    fn swamp_table() -> Nnct {
        Nnct::from_counts([[149, 33], [43, 48]]).unwrap()
    }

    fn neuron_table() -> Nnct {
        Nnct::from_counts([[368, 288], [273, 136]]).unwrap()
    }

    #[test]
    fn dixon_on_reference_tables() {
        let t = pielou_table();
        assert!((dixon_z(&t, 162.0, 134.0, Class::One, Class::One).unwrap() - 4.36).abs() < 0.01);
        assert!((dixon_z(&t, 162.0, 134.0, Class::Two, Class::Two).unwrap() - 2.29).abs() < 0.01);
        let s = swamp_table();
        assert!((dixon_z(&s, 178.0, 156.0, Class::One, Class::One).unwrap() - 4.47).abs() < 0.01);
    }

    #[test]
    fn ceyhan_on_reference_tables() {
        let t = pielou_table();
        assert!((ceyhan_z(&t, 162.0, 134.0, Class::One, Class::One).unwrap() - 3.63).abs() < 0.01);
        assert!((ceyhan_z(&t, 162.0, 134.0, Class::Two, Class::Two).unwrap() - 3.61).abs() < 0.01);
        let nn = neuron_table();
        assert!((ceyhan_z(&nn, 668.0, 668.0, Class::One, Class::One).unwrap() + 2.70).abs() < 0.01);
    }

    #[test]
    fn ceyhan_antisymmetry() {
        let t = swamp_table();
        let z11 = ceyhan_z(&t, 178.0, 156.0, Class::One, Class::One).unwrap();
        let z21 = ceyhan_z(&t, 178.0, 156.0, Class::Two, Class::One).unwrap();
        assert!((z11 + z21).abs() < 1e-9);
    }

    #[test]
    fn pielou_z_on_reference_tables() {
        assert!((pielou_z(&pielou_table()).unwrap() - 4.86).abs() < 0.01);
        assert!((pielou_z(&swamp_table()).unwrap() - 5.90).abs() < 0.01);
        assert!((pielou_z(&neuron_table()).unwrap() + 3.45).abs() < 0.01);
    }

    #[test]
    fn chi2_is_squared_z() {
        for t in [pielou_table(), swamp_table(), neuron_table()] {
            let z = pielou_z(&t).unwrap();
            let chi2 = pielou_chi2(&t).unwrap();
            assert!((chi2 - z * z).abs() < 1e-9);
        }
    }

    #[test]
    fn chi2_zero_at_exact_independence() {
        // N_ij = n_i c_j / n exactly.
        let t = Nnct::from_counts([[9, 3], [6, 2]]).unwrap();
        assert!(pielou_chi2(&t).unwrap().abs() < 1e-12);
    }

    #[test]
    fn corrected_pielou_values() {
        let c = pielou_z_corrected(&pielou_table()).unwrap();
        assert!((c.z_mc - 3.81).abs() < 0.01);
        assert!((c.z_a_mc - 3.69).abs() < 0.01);
        assert!((c.z_s_mc - 3.86).abs() < 0.01);
        let s = pielou_z_corrected(&swamp_table()).unwrap();
        assert!((s.z_mc - 4.62).abs() < 0.01);
        assert!((s.z_a_mc - 4.48).abs() < 0.01);
        assert!((s.z_s_mc - 4.67).abs() < 0.01);
    }

    #[test]
    fn corrected_pielou_fixes_zero_under_scale_only_map() {
        // A table with Z_P = 0 keeps z_mc = 0.
        let t = Nnct::from_counts([[9, 3], [6, 2]]).unwrap();
        assert_eq!(pielou_z(&t).unwrap(), 0.0);
        assert_eq!(pielou_z_corrected(&t).unwrap().z_mc, 0.0);
    }

    #[test]
    fn directional_tests_on_reference_tables() {
        let t = pielou_table();
        assert!((z_one(&t, 162.0, 134.0).unwrap() - 3.92).abs() < 0.01);
        assert!((z_two(&t, 162.0, 134.0).unwrap() - 3.62).abs() < 0.01);
        let s = swamp_table();
        assert!((z_one(&s, 178.0, 156.0).unwrap() - 4.76).abs() < 0.01);
        assert!((z_two(&s, 178.0, 156.0).unwrap() - 4.61).abs() < 0.01);
        let nn = neuron_table();
        assert!((z_one(&nn, 668.0, 668.0).unwrap() + 2.68).abs() < 0.01);
        assert!((z_two(&nn, 668.0, 668.0).unwrap() + 2.70).abs() < 0.01);
    }

    #[test]
    fn run_all_is_total_on_valid_tables() {
        let results = run_all(&swamp_table(), 178.0, 156.0);
        assert_eq!(results.len(), StatName::ALL.len());
        for (name, value) in results {
            assert!(value.is_ok(), "{name} unexpectedly degenerate");
        }
    }

    #[test]
    fn run_all_flags_degenerate_entries() {
        // n = 3 is below the quartet-probability floor: the moment-based
        // statistics must surface errors while the Pielou family still
        // computes, and nothing is dropped from the map.
        let t = Nnct::from_counts([[1, 1], [1, 0]]).unwrap();
        let results = run_all(&t, 2.0, 2.0);
        assert_eq!(results.len(), StatName::ALL.len());
        for (name, value) in results {
            match name {
                StatName::PielouChi2 | StatName::PielouZ | StatName::PielouZmc
                | StatName::PielouZmcAssoc | StatName::PielouZmcSeg => {
                    assert!(value.is_ok(), "{name} should compute at n = 3");
                }
                _ => assert!(value.is_err(), "{name} should be degenerate at n = 3"),
            }
        }
    }

    #[test]
    fn stat_name_round_trips_through_strings() {
        for name in StatName::ALL {
            let parsed: StatName = name.code().parse().unwrap();
            assert_eq!(parsed, name);
            let lower: StatName = name.code().to_ascii_lowercase().parse().unwrap();
            assert_eq!(lower, name);
        }
        assert!("nope".parse::<StatName>().is_err());
    }
}
