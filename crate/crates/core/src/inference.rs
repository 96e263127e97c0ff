//! p-value engines: asymptotic normal / chi-square, Monte Carlo simulation
//! of CSR independence, and label randomization.
//!
//! Both resampling engines use the add-one estimator
//! p = (1 + #{replicates at least as extreme}) / (n_mc + 1), which never
//! returns zero. Under CSR simulation the NN digraph (and with it Q and R)
//! is rebuilt for every replicate; under label randomization the locations
//! are fixed, so it is computed once and reused.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nngraph::NnDigraph;
use crate::pattern::{gen_csr_with, relabel_with, MarkedPattern};
use crate::rng::replicate_rng;
use crate::stats::{compute_stat, StatName};
use crate::table::Nnct;

/// Which tail of the null distribution counts as evidence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alternative {
    TwoSided,
    /// Segregation: diagonal excess, upper tail.
    RightSided,
    /// Association: off-diagonal excess, lower tail.
    LeftSided,
}

impl Alternative {
    pub const ALL: [Alternative; 3] = [
        Alternative::TwoSided,
        Alternative::RightSided,
        Alternative::LeftSided,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Alternative::TwoSided => "two",
            Alternative::RightSided => "seg",
            Alternative::LeftSided => "assoc",
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "two" | "two-sided" | "twosided" => Ok(Alternative::TwoSided),
            "seg" | "segregation" | "right" | "right-sided" => Ok(Alternative::RightSided),
            "assoc" | "association" | "left" | "left-sided" => Ok(Alternative::LeftSided),
            _ => Err(format!("unknown alternative {s:?} (expected two|seg|assoc)")),
        }
    }
}

/// One statistic with its value and whichever p-values were requested.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestReport {
    pub name: StatName,
    pub value: f64,
    pub alternative: Alternative,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_asy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_mc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rand: Option<f64>,
    pub n_replicates: usize,
    pub seed: u64,
}

/// Standard normal upper tail. Computed through the direct erfc branch on
/// the requested side so that sf(z) + sf(-z) rounds to exactly 1.
fn normal_sf(z: f64) -> f64 {
    if z >= 0.0 {
        0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
    }
}

/// Asymptotic p-value. z-valued statistics refer to the standard normal;
/// Pielou's chi-square refers to chi-square with one degree of freedom and
/// only supports the two-sided alternative.
pub fn p_asymptotic(value: f64, name: StatName, alt: Alternative) -> Result<f64> {
    if name == StatName::PielouChi2 {
        return match alt {
            // P(chi2_1 > x) = 2 (1 - Phi(sqrt(x))).
            Alternative::TwoSided => Ok(libm::erfc((value / 2.0).max(0.0).sqrt())),
            _ => Err(Error::OneSidedUndefined("PielouChi2")),
        };
    }
    Ok(match alt {
        Alternative::TwoSided => libm::erfc(value.abs() / std::f64::consts::SQRT_2),
        Alternative::RightSided => normal_sf(value),
        Alternative::LeftSided => normal_sf(-value),
    })
}

fn extremity_ok(name: StatName, alt: Alternative) -> Result<()> {
    if name == StatName::PielouChi2 && alt != Alternative::TwoSided {
        return Err(Error::OneSidedUndefined("PielouChi2"));
    }
    Ok(())
}

fn at_least_as_extreme(name: StatName, alt: Alternative, replicate: f64, observed: f64) -> bool {
    match alt {
        Alternative::TwoSided => {
            if name.is_z_valued() {
                replicate.abs() >= observed.abs()
            } else {
                replicate >= observed
            }
        }
        Alternative::RightSided => replicate >= observed,
        Alternative::LeftSided => replicate <= observed,
    }
}

fn observed_stat(pattern: &MarkedPattern, name: StatName) -> Result<(f64, NnDigraph, Nnct)> {
    pattern.require_both_classes()?;
    let graph = NnDigraph::build(pattern)?;
    let table = Nnct::from_pattern(pattern, &graph)?;
    let value = compute_stat(name, &table, graph.q() as f64, graph.r() as f64)?;
    Ok((value, graph, table))
}

/// Monte Carlo p-value under CSR independence: every replicate regenerates
/// both classes uniformly over the pattern's region with matched sizes and
/// recomputes the statistic with its own fresh Q and R. Degenerate
/// replicates count as extreme.
pub fn p_montecarlo(
    pattern: &MarkedPattern,
    name: StatName,
    alt: Alternative,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::ParamRange {
            name: "n_mc",
            value: 0.0,
            range: "[1, ..)",
        });
    }
    extremity_ok(name, alt)?;
    let (observed, _, _) = observed_stat(pattern, name)?;
    let (n1, n2) = (pattern.n1(), pattern.n2());
    let region = pattern.region();
    let extreme: u64 = (0..n_mc as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep);
            let sim = gen_csr_with(n1, n2, region, &mut rng).expect("class sizes checked");
            let graph = NnDigraph::build(&sim).expect("n >= 2");
            let table = Nnct::from_pattern(&sim, &graph).expect("both classes present");
            match compute_stat(name, &table, graph.q() as f64, graph.r() as f64) {
                Ok(value) => u64::from(at_least_as_extreme(name, alt, value, observed)),
                Err(_) => 1,
            }
        })
        .sum();
    Ok((1 + extreme) as f64 / (n_mc + 1) as f64)
}

/// Randomization p-value under RL: locations (hence the digraph, Q, and R)
/// stay fixed while labels are permuted each replicate.
pub fn p_randomization(
    pattern: &MarkedPattern,
    name: StatName,
    alt: Alternative,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::ParamRange {
            name: "n_mc",
            value: 0.0,
            range: "[1, ..)",
        });
    }
    extremity_ok(name, alt)?;
    let (observed, graph, _) = observed_stat(pattern, name)?;
    let (q, r) = (graph.q() as f64, graph.r() as f64);
    let extreme: u64 = (0..n_mc as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep);
            let shuffled = relabel_with(pattern, &mut rng);
            let table = Nnct::from_labels(shuffled.labels(), graph.nn_index())
                .expect("class sizes preserved by relabeling");
            match compute_stat(name, &table, q, r) {
                Ok(value) => u64::from(at_least_as_extreme(name, alt, value, observed)),
                Err(_) => 1,
            }
        })
        .sum();
    Ok((1 + extreme) as f64 / (n_mc + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{gen_csr, gen_segregation, Class, Region, SegParams};

    #[test]
    fn asymptotic_reference_points() {
        let p = p_asymptotic(0.0, StatName::ZII, Alternative::TwoSided).unwrap();
        assert_eq!(p, 1.0);
        let p = p_asymptotic(1.96, StatName::ZII, Alternative::TwoSided).unwrap();
        assert!((p - 0.05).abs() < 0.001, "{p}");
        let p = p_asymptotic(3.63, StatName::CeyhanZ11, Alternative::TwoSided).unwrap();
        assert!((p - 0.0003).abs() < 0.0001, "{p}");
    }

    #[test]
    fn one_sided_halves_sum_to_one() {
        for z in [-8.0, -3.2, -0.5, 0.0, 0.3, 1.7, 4.0, 9.0] {
            let right = p_asymptotic(z, StatName::ZI, Alternative::RightSided).unwrap();
            let left = p_asymptotic(z, StatName::ZI, Alternative::LeftSided).unwrap();
            assert_eq!(right + left, 1.0, "z = {z}");
        }
    }

    #[test]
    fn chi2_p_matches_squared_normal() {
        // P(chi2_1 > z^2) equals the two-sided normal p of z.
        for z in [0.5, 1.0, 1.96, 3.0] {
            let via_chi2 = p_asymptotic(z * z, StatName::PielouChi2, Alternative::TwoSided).unwrap();
            let via_norm = p_asymptotic(z, StatName::PielouZ, Alternative::TwoSided).unwrap();
            assert!((via_chi2 - via_norm).abs() < 1e-12);
        }
    }

    #[test]
    fn chi2_rejects_one_sided() {
        let err = p_asymptotic(3.0, StatName::PielouChi2, Alternative::RightSided).unwrap_err();
        assert!(matches!(err, Error::OneSidedUndefined(_)));
        assert!(p_montecarlo(
            &gen_csr(10, 10, Region::unit_square(), 1).unwrap(),
            StatName::PielouChi2,
            Alternative::LeftSided,
            9,
            1
        )
        .is_err());
    }

    #[test]
    fn monte_carlo_requires_replicates() {
        let p = gen_csr(10, 10, Region::unit_square(), 2).unwrap();
        assert!(p_montecarlo(&p, StatName::ZII, Alternative::TwoSided, 0, 1).is_err());
    }

    #[test]
    fn add_one_bounds_hold() {
        let p = gen_csr(15, 15, Region::unit_square(), 3).unwrap();
        for n_mc in [1, 7, 49] {
            let pv = p_randomization(&p, StatName::ZII, Alternative::TwoSided, n_mc, 5).unwrap();
            assert!(pv >= 1.0 / (n_mc as f64 + 1.0) && pv <= 1.0);
        }
    }

    #[test]
    fn two_point_pattern_randomization() {
        let p = crate::pattern::MarkedPattern::new(
            vec![(0.2, 0.2), (0.8, 0.8)],
            vec![Class::One, Class::Two],
            Region::unit_square(),
        )
        .unwrap();
        // Both label arrangements give the same table, so every replicate is
        // as extreme as the observed value.
        let pv = p_randomization(&p, StatName::PielouZ, Alternative::TwoSided, 100, 7).unwrap();
        assert!(pv == 1.0 || pv == 0.5, "{pv}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let p = gen_segregation(25, 25, SegParams::new(0.25).unwrap(), 11).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| p_randomization(&p, StatName::ZI, Alternative::RightSided, 199, 13).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| p_randomization(&p, StatName::ZI, Alternative::RightSided, 199, 13).unwrap());
        assert_eq!(single, multi);
        let mc_single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| p_montecarlo(&p, StatName::ZI, Alternative::RightSided, 199, 13).unwrap());
        let mc_multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| p_montecarlo(&p, StatName::ZI, Alternative::RightSided, 199, 13).unwrap());
        assert_eq!(mc_single, mc_multi);
    }

    #[test]
    fn segregated_pattern_rejects_under_all_engines() {
        let p = gen_segregation(40, 40, SegParams::new(1.0 / 3.0).unwrap(), 17).unwrap();
        let (value, graph, table) = observed_stat(&p, StatName::CeyhanZ11).unwrap();
        assert!(value > 2.0, "segregated data should give a large z, got {value}");
        assert!(graph.q() > 0 && table.n() == 80);
        let asy = p_asymptotic(value, StatName::CeyhanZ11, Alternative::RightSided).unwrap();
        let rand = p_randomization(&p, StatName::CeyhanZ11, Alternative::RightSided, 999, 19).unwrap();
        let mc = p_montecarlo(&p, StatName::CeyhanZ11, Alternative::RightSided, 999, 19).unwrap();
        assert!(asy < 0.01, "{asy}");
        assert!(rand < 0.01, "{rand}");
        assert!(mc < 0.01, "{mc}");
    }
}
