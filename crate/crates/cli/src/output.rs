//! Rendering of test reports, rate tables, and envelope curves in the three
//! output formats. All fixed-point numbers print with four decimals so runs
//! with the same seed are byte-identical.

use std::path::{Path, PathBuf};

use serde::Serialize;

use nnct::error::Error;
use nnct::inference::{Alternative, TestReport};
use nnct::sim::RateTable;
use nnct::second_order::LCurve;
use nnct::table::Nnct;

pub struct EngineSet {
    pub asy: bool,
    pub mc: bool,
    pub rand: bool,
}

/// One statistic's outcome: value plus p-values, or the degeneracy message.
#[derive(Serialize)]
pub struct StatOutcome {
    pub name: nnct::stats::StatName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub reports: Vec<TestReport>,
}

impl StatOutcome {
    pub fn computed(name: nnct::stats::StatName, value: f64, reports: Vec<TestReport>) -> Self {
        StatOutcome {
            name,
            value: Some(value),
            error: None,
            reports,
        }
    }

    pub fn degenerate(name: nnct::stats::StatName, error: String) -> Self {
        StatOutcome {
            name,
            value: None,
            error: Some(error),
            reports: Vec::new(),
        }
    }
}

#[derive(Serialize)]
pub struct TestSummary {
    pub class_names: [String; 2],
    pub table: Nnct,
    pub q: u64,
    pub r: u64,
    pub qr_adjusted: bool,
    pub q_used: f64,
    pub r_used: f64,
    #[serde(skip)]
    pub alternatives: Vec<Alternative>,
    #[serde(skip)]
    pub engines: EngineSet,
    pub outcomes: Vec<StatOutcome>,
}

fn fmt_p(p: Option<f64>) -> String {
    match p {
        Some(p) => format!("{p:.4}"),
        None => "---".to_string(),
    }
}

impl TestSummary {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "classes: 1 = {}, 2 = {}\n\n",
            self.class_names[0], self.class_names[1]
        ));
        out.push_str(&self.table.render_text(&self.class_names));
        let shares = self.table.percentages();
        out.push_str("\nrow-conditional percentages:\n");
        for i in 0..2 {
            out.push_str(&format!(
                "  {}: {:.1}% {:.1}%  (share {:.1}%)\n",
                self.class_names[i],
                100.0 * shares.row_conditional[i][0],
                100.0 * shares.row_conditional[i][1],
                100.0 * shares.row_share[i],
            ));
        }
        out.push_str(&format!("\nQ = {}  R = {}  (n = {})\n", self.q, self.r, self.table.n()));
        if self.qr_adjusted {
            out.push_str(&format!(
                "QR-adjusted: statistics use Q = {:.2}, R = {:.2}\n",
                self.q_used, self.r_used
            ));
        }
        out.push('\n');

        let mut header = format!("{:<6} {:>9}", "stat", "value");
        for alt in &self.alternatives {
            if self.engines.asy {
                header.push_str(&format!(" {:>12}", format!("p_asy[{alt}]")));
            }
            if self.engines.mc {
                header.push_str(&format!(" {:>12}", format!("p_mc[{alt}]")));
            }
            if self.engines.rand {
                header.push_str(&format!(" {:>12}", format!("p_rand[{alt}]")));
            }
        }
        out.push_str(&header);
        out.push('\n');
        for outcome in &self.outcomes {
            match outcome.value {
                Some(value) => {
                    let mut line = format!("{:<6} {:>9.4}", outcome.name.code(), value);
                    for report in &outcome.reports {
                        if self.engines.asy {
                            line.push_str(&format!(" {:>12}", fmt_p(report.p_asy)));
                        }
                        if self.engines.mc {
                            line.push_str(&format!(" {:>12}", fmt_p(report.p_mc)));
                        }
                        if self.engines.rand {
                            line.push_str(&format!(" {:>12}", fmt_p(report.p_rand)));
                        }
                    }
                    out.push_str(&line);
                    out.push('\n');
                }
                None => {
                    out.push_str(&format!(
                        "{:<6} {:>9}  [{}]\n",
                        outcome.name.code(),
                        "---",
                        outcome.error.as_deref().unwrap_or("degenerate")
                    ));
                }
            }
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("statistic,value,alternative,p_asy,p_mc,p_rand\n");
        for outcome in &self.outcomes {
            match outcome.value {
                Some(value) => {
                    for report in &outcome.reports {
                        out.push_str(&format!(
                            "{},{:.4},{},{},{},{}\n",
                            outcome.name.code(),
                            value,
                            report.alternative,
                            fmt_p(report.p_asy),
                            fmt_p(report.p_mc),
                            fmt_p(report.p_rand),
                        ));
                    }
                }
                None => {
                    out.push_str(&format!("{},degenerate,,,,\n", outcome.name.code()));
                }
            }
        }
        out
    }

    pub fn render_json(&self) -> Result<String, Error> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum RateFormat {
    Text,
    Csv,
    Json,
}

/// Rate tables print one section (or file) per alternative in CSV/text, and
/// a single JSON document with flags when JSON is requested.
pub fn write_rate_table(
    table: &RateTable,
    alternatives: &[Alternative],
    format: RateFormat,
    out: Option<&PathBuf>,
) -> Result<(), Error> {
    match format {
        RateFormat::Json => {
            let mut json = serde_json::to_string_pretty(table)
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            json.push('\n');
            write_to(out, &json)
        }
        RateFormat::Csv | RateFormat::Text => {
            if let (Some(path), true) = (out, alternatives.len() > 1) {
                for &alt in alternatives {
                    let csv = table.render_csv(alt);
                    std::fs::write(per_alt_path(path, alt), csv)?;
                }
                Ok(())
            } else {
                let mut content = String::new();
                for &alt in alternatives {
                    if alternatives.len() > 1 || format == RateFormat::Text {
                        content.push_str(&format!("# alternative: {alt}\n"));
                    }
                    content.push_str(&table.render_csv(alt));
                }
                write_to(out, &content)
            }
        }
    }
}

fn per_alt_path(base: &Path, alt: Alternative) -> PathBuf {
    match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => base.with_extension(format!("{alt}.{ext}")),
        None => base.with_extension(alt.code()),
    }
}

pub fn envelope_csv(curve: &LCurve) -> String {
    let mut out = String::from("t,l_minus_t,lo95,hi95\n");
    let lo = curve.lo_95.as_deref().unwrap_or(&[]);
    let hi = curve.hi_95.as_deref().unwrap_or(&[]);
    for (i, (&t, &l)) in curve.t_grid.iter().zip(&curve.l_minus_t).enumerate() {
        let lo_s = lo.get(i).map(|v| format!("{v:.6}")).unwrap_or_default();
        let hi_s = hi.get(i).map(|v| format!("{v:.6}")).unwrap_or_default();
        out.push_str(&format!("{t:.6},{l:.6},{lo_s},{hi_s}\n"));
    }
    out
}

fn write_to(out: Option<&PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(Error::from),
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(content.as_bytes())
                .map_err(Error::from)
        }
    }
}
