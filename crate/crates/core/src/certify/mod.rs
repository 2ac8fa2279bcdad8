//! Randomized certification of monotonicity properties for entanglement
//! measures.
//!
//! Seven seeded property checks sample states, ensembles, ancillas, and
//! protocols. Three structural checks (convexity, local unitary invariance,
//! affinity on flagged mixtures) jointly predict monotonicity under local
//! operations and classical communication; the remaining checks probe the
//! operational conditions directly. A convex function passes the structural
//! trio exactly when it passes the operational checks, so any disagreement
//! between the two batteries flags a numerical or implementation fault —
//! never a counterexample.

mod checks;

pub use checks::{
    check_ancilla_invariance, check_convexity, check_elementary_ops, check_flags, check_lui,
    check_strong_monotonicity, check_weak_monotonicity,
};

use crate::error::{CoreError, Result};
use crate::measures::MeasureHandle;
use crate::sample::{rng_from_seed, SeededRng};
use crate::states::DensityOperator;

/// Shared configuration for every property check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    /// Trials per dimension profile.
    pub trials: usize,
    /// Violation threshold separating pass from fail.
    pub tol: f64,
    /// Party-dimension profiles to sweep, e.g. `[2, 2]` or `[2, 2, 2]`.
    pub dims: Vec<Vec<usize>>,
    /// Members per sampled ensemble.
    pub ensemble_size: usize,
    /// Rounds per sampled protocol.
    pub rounds: usize,
    /// Outcomes per sampled instrument.
    pub outcomes: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            trials: 200,
            tol: 1e-8,
            dims: vec![
                vec![2, 2],
                vec![2, 3],
                vec![3, 2],
                vec![3, 3],
                vec![2, 2, 2],
            ],
            ensemble_size: 3,
            rounds: 2,
            outcomes: 2,
            seed: 0,
        }
    }
}

impl CheckConfig {
    /// Profile for exactly evaluated measures.
    pub fn exact_profile() -> Self {
        CheckConfig::default()
    }

    /// Profile for optimization-backed measures: looser tolerance and fewer,
    /// smaller instances so solver runtime stays within budget.
    pub fn solver_profile() -> Self {
        CheckConfig {
            trials: 6,
            tol: 5e-3,
            dims: vec![vec![2, 2]],
            ensemble_size: 2,
            rounds: 1,
            outcomes: 2,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CoreError::structural("trials must be at least 1"));
        }
        if self.tol <= 0.0 {
            return Err(CoreError::structural("tolerance must be positive"));
        }
        if self.dims.is_empty() {
            return Err(CoreError::structural("at least one dimension profile is required"));
        }
        for profile in &self.dims {
            if profile.len() < 2 || profile.len() > 6 {
                return Err(CoreError::structural(
                    "dimension profiles need between 2 and 6 parties",
                ));
            }
            if profile.iter().any(|&d| d < 2) {
                return Err(CoreError::structural("party dimensions must be at least 2"));
            }
        }
        if self.ensemble_size == 0 || self.rounds == 0 || self.outcomes < 2 {
            return Err(CoreError::structural(
                "ensemble size and rounds need at least 1, outcomes at least 2",
            ));
        }
        Ok(())
    }
}

/// Default configuration for a built-in measure name.
pub fn default_config_for(measure: &str) -> CheckConfig {
    if measure == "ree" {
        CheckConfig::solver_profile()
    } else {
        CheckConfig::exact_profile()
    }
}

/// Inputs reproducing the worst observed violation of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub profile_index: usize,
    pub trial_index: usize,
    /// Seed that regenerates the trial's sampled inputs exactly.
    pub trial_seed: u64,
    pub dims: Vec<usize>,
    pub description: String,
}

/// Outcome of one property check, possibly aggregating sub-checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub trials_run: usize,
    /// Worst signed violation; positive means the condition is broken.
    pub violation: f64,
    pub tol: f64,
    pub passed: bool,
    pub note: Option<String>,
    pub witness: Option<Witness>,
    pub sub_reports: Vec<CheckReport>,
}

/// Prediction from the structural checks next to the direct operational
/// checks, with the full report trail.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationVerdict {
    pub measure: String,
    /// Convexity, local unitary invariance, and flagged-mixture affinity all
    /// passed.
    pub predicted_monotone: bool,
    /// The elementary-operation, strong, and weak monotonicity checks all
    /// passed.
    pub direct_monotone: bool,
    /// Prediction and direct checks agree; a mismatch indicates an internal
    /// numerical fault.
    pub consistent: bool,
    pub reports: Vec<CheckReport>,
}

impl CertificationVerdict {
    pub fn report(&self, name: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn verdict_label(&self) -> &'static str {
        if self.predicted_monotone {
            "PREDICTED-MONOTONE"
        } else {
            "NOT-MONOTONE"
        }
    }
}

/// The seven checks in canonical order, paired with their runner functions.
pub const CHECK_SEQUENCE: [(
    &str,
    fn(&MeasureHandle, &CheckConfig) -> Result<CheckReport>,
); 7] = [
    ("convexity", check_convexity),
    ("lui", check_lui),
    ("ancilla-invariance", check_ancilla_invariance),
    ("flags", check_flags),
    ("elementary-ops", check_elementary_ops),
    ("strong-monotonicity", check_strong_monotonicity),
    ("weak-monotonicity", check_weak_monotonicity),
];

/// Combines finished check reports into the prediction-versus-direct verdict.
pub fn verdict_from_reports(measure: &str, reports: Vec<CheckReport>) -> CertificationVerdict {
    let pass = |name: &str| reports.iter().find(|r| r.name == name).is_some_and(|r| r.passed);
    let predicted = pass("convexity") && pass("lui") && pass("flags");
    let direct =
        pass("elementary-ops") && pass("strong-monotonicity") && pass("weak-monotonicity");
    CertificationVerdict {
        measure: measure.to_string(),
        predicted_monotone: predicted,
        direct_monotone: direct,
        consistent: predicted == direct,
        reports,
    }
}

/// Runs all seven checks and combines their verdicts.
pub fn certify_measure(f: &MeasureHandle, cfg: &CheckConfig) -> Result<CertificationVerdict> {
    cfg.validate()?;
    let mut reports = Vec::with_capacity(CHECK_SEQUENCE.len());
    for (_, check) in CHECK_SEQUENCE {
        reports.push(check(f, cfg)?);
    }
    Ok(verdict_from_reports(f.name(), reports))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds check, profile, and trial coordinates into one trial seed.
pub(crate) fn mix_seed(parts: &[u64]) -> u64 {
    let mut state = 0x243F_6A88_85A3_08D3;
    let mut out = 0;
    for &part in parts {
        state ^= part.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        out = splitmix64(&mut state);
    }
    out
}

pub(crate) type Eval<'a> = dyn Fn(&DensityOperator) -> f64 + 'a;

/// Coordinates of one trial within a check.
pub(crate) struct TrialCtx<'a> {
    pub trial_index: usize,
    pub dims: &'a [usize],
}

/// Signed violations plus witness descriptions, one per stream.
pub(crate) type TrialOutcome = Vec<(f64, String)>;

/// Runs `trials x profiles` seeded trials. Each trial reports one signed
/// violation per stream from the same sampled inputs; every stream becomes a
/// leaf report carrying the deterministic worst witness (strictly greater
/// replaces, so ties keep the earliest trial). When a stream fails and the
/// measure has an independent oracle, the worst trial is replayed with the
/// oracle before the failure stands: broad-search solver noise is one-sided,
/// and the oracle disambiguates it from a real violation.
pub(crate) fn run_streams(
    cfg: &CheckConfig,
    handle: &MeasureHandle,
    tag: u64,
    streams: &[&str],
    trial: &dyn Fn(&TrialCtx, &mut SeededRng, &Eval) -> Result<TrialOutcome>,
) -> Result<Vec<CheckReport>> {
    let mut worst: Vec<Option<(f64, Witness)>> = vec![None; streams.len()];
    let mut trials_run = 0;
    for (profile_index, profile) in cfg.dims.iter().enumerate() {
        for trial_index in 0..cfg.trials {
            let trial_seed = mix_seed(&[cfg.seed, tag, profile_index as u64, trial_index as u64]);
            let ctx = TrialCtx {
                trial_index,
                dims: profile,
            };
            let mut rng = rng_from_seed(trial_seed);
            let outcomes = trial(&ctx, &mut rng, &|rho| handle.evaluate(rho))?;
            if outcomes.len() != streams.len() {
                return Err(CoreError::structural(
                    "trial reported a stream count mismatch",
                ));
            }
            trials_run += 1;
            for (k, (violation, description)) in outcomes.into_iter().enumerate() {
                if worst[k].as_ref().map_or(true, |(w, _)| violation > *w) {
                    worst[k] = Some((
                        violation,
                        Witness {
                            profile_index,
                            trial_index,
                            trial_seed,
                            dims: profile.clone(),
                            description,
                        },
                    ));
                }
            }
        }
    }

    let mut reports = Vec::with_capacity(streams.len());
    for (k, name) in streams.iter().enumerate() {
        let (violation, witness) = worst[k].take().expect("at least one trial ran");
        let mut reported = violation;
        let mut passed = violation <= cfg.tol;
        let mut note = None;
        if !passed && handle.has_oracle() {
            let ctx = TrialCtx {
                trial_index: witness.trial_index,
                dims: &witness.dims,
            };
            let mut rng = rng_from_seed(witness.trial_seed);
            let replay = trial(&ctx, &mut rng, &|rho| {
                handle.oracle_evaluate(rho).expect("oracle present")
            })?;
            let oracle_violation = replay[k].0;
            if oracle_violation <= cfg.tol {
                reported = oracle_violation;
                passed = true;
                note = Some(format!(
                    "solver violation {:.6e} replayed at {:.6e} with the independent bound",
                    violation, oracle_violation
                ));
            } else {
                note = Some(format!(
                    "independent bound confirms the violation at {:.6e}",
                    oracle_violation
                ));
            }
        }
        reports.push(CheckReport {
            name: (*name).to_string(),
            trials_run,
            violation: reported,
            tol: cfg.tol,
            passed,
            note,
            witness: Some(witness),
            sub_reports: Vec::new(),
        });
    }
    Ok(reports)
}

/// Unwraps a single-stream run into a leaf report with the check's name.
pub(crate) fn leaf_report(mut reports: Vec<CheckReport>, name: &str) -> CheckReport {
    debug_assert_eq!(reports.len(), 1);
    let mut report = reports.pop().expect("one stream");
    report.name = name.to_string();
    report
}

/// Combines sub-checks: the parent carries the worst reported violation and
/// passes only when every sub-check passes.
pub(crate) fn aggregate(name: &str, subs: Vec<CheckReport>) -> CheckReport {
    let worst = subs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, r)| {
            if r.violation > best.1 {
                (k, r.violation)
            } else {
                best
            }
        });
    CheckReport {
        name: name.to_string(),
        trials_run: subs.iter().map(|r| r.trials_run).max().unwrap_or(0),
        violation: worst.1,
        tol: subs.first().map_or(0.0, |r| r.tol),
        passed: subs.iter().all(|r| r.passed),
        note: None,
        witness: subs[worst.0].witness.clone(),
        sub_reports: subs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_seeds_are_deterministic_and_spread() {
        let a = mix_seed(&[7, 1, 0, 0]);
        assert_eq!(a, mix_seed(&[7, 1, 0, 0]));
        assert_ne!(a, mix_seed(&[7, 1, 0, 1]));
        assert_ne!(a, mix_seed(&[7, 2, 0, 0]));
        assert_ne!(a, mix_seed(&[8, 1, 0, 0]));
    }

    #[test]
    fn config_validation_rejects_degenerate_profiles() {
        let mut cfg = CheckConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.dims = vec![vec![2]];
        assert!(cfg.validate().is_err());
        let mut cfg = CheckConfig::default();
        cfg.dims = vec![vec![2, 1]];
        assert!(cfg.validate().is_err());
        let mut cfg = CheckConfig::default();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = CheckConfig::default();
        cfg.tol = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn aggregate_takes_worst_violation_and_all_pass_semantics() {
        let leaf = |name: &str, violation: f64, passed: bool| CheckReport {
            name: name.to_string(),
            trials_run: 5,
            violation,
            tol: 1e-8,
            passed,
            note: None,
            witness: Some(Witness {
                profile_index: 0,
                trial_index: 0,
                trial_seed: 1,
                dims: vec![2, 2],
                description: name.to_string(),
            }),
            sub_reports: Vec::new(),
        };
        let parent = aggregate(
            "parent",
            vec![leaf("x", 1e-12, true), leaf("y", 0.5, false)],
        );
        assert!(!parent.passed);
        assert_eq!(parent.violation, 0.5);
        assert_eq!(parent.witness.as_ref().unwrap().description, "y");
        let parent = aggregate("parent", vec![leaf("x", 1e-12, true)]);
        assert!(parent.passed);
    }
}
