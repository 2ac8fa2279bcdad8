//! Machine-readable certification report: versioned JSON that echoes the
//! full configuration and embeds every check report, so a consumer can
//! replay the run from the document alone.

use entcert_core::{CertificationVerdict, CheckConfig, CheckReport, Witness};
use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConfigEcho {
    pub trials: usize,
    pub tol: f64,
    pub dims: Vec<Vec<usize>>,
    pub ensemble_size: usize,
    pub rounds: usize,
    pub outcomes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WitnessDoc {
    pub profile_index: usize,
    pub trial_index: usize,
    pub trial_seed: u64,
    pub dims: Vec<usize>,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckReportDoc {
    pub name: String,
    pub trials_run: usize,
    pub violation: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sub_reports: Vec<CheckReportDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportDocument {
    pub version: u32,
    pub tool: String,
    pub tool_version: String,
    pub measure: String,
    pub seed: u64,
    pub config: ConfigEcho,
    pub checks: Vec<CheckReportDoc>,
    pub predicted_monotone: bool,
    pub direct_monotone: bool,
    pub consistent: bool,
    pub verdict: String,
}

impl From<&Witness> for WitnessDoc {
    fn from(w: &Witness) -> Self {
        WitnessDoc {
            profile_index: w.profile_index,
            trial_index: w.trial_index,
            trial_seed: w.trial_seed,
            dims: w.dims.clone(),
            description: w.description.clone(),
        }
    }
}

impl From<&CheckReport> for CheckReportDoc {
    fn from(r: &CheckReport) -> Self {
        CheckReportDoc {
            name: r.name.clone(),
            trials_run: r.trials_run,
            violation: r.violation,
            tol: r.tol,
            passed: r.passed,
            note: r.note.clone(),
            witness: r.witness.as_ref().map(WitnessDoc::from),
            sub_reports: r.sub_reports.iter().map(CheckReportDoc::from).collect(),
        }
    }
}

impl ReportDocument {
    pub fn new(verdict: &CertificationVerdict, cfg: &CheckConfig) -> ReportDocument {
        ReportDocument {
            version: REPORT_VERSION,
            tool: "entcert".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            measure: verdict.measure.clone(),
            seed: cfg.seed,
            config: ConfigEcho {
                trials: cfg.trials,
                tol: cfg.tol,
                dims: cfg.dims.clone(),
                ensemble_size: cfg.ensemble_size,
                rounds: cfg.rounds,
                outcomes: cfg.outcomes,
            },
            checks: verdict.reports.iter().map(CheckReportDoc::from).collect(),
            predicted_monotone: verdict.predicted_monotone,
            direct_monotone: verdict.direct_monotone,
            consistent: verdict.consistent,
            verdict: verdict.verdict_label().to_string(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

/// Compact deterministic text form: one line per check plus the verdict.
pub fn render_summary(verdict: &CertificationVerdict) -> String {
    let mut out = String::new();
    for report in &verdict.reports {
        out.push_str(&format!(
            "{:<22} {} worst={:.6e} tol={:.1e}\n",
            report.name,
            if report.passed { "PASS" } else { "FAIL" },
            report.violation,
            report.tol
        ));
    }
    out.push_str(&format!(
        "verdict {} (direct checks {}, {})\n",
        verdict.verdict_label(),
        if verdict.direct_monotone { "pass" } else { "fail" },
        if verdict.consistent { "consistent" } else { "INCONSISTENT" },
    ));
    out
}
