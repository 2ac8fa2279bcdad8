//! Command-line front end: certify built-in measures, evaluate them on state
//! files, and generate states from named families.
//!
//! Exit codes: 0 = success or expected verdict, 1 = unexpected verdict or
//! internal inconsistency, 2 = usage or parse error. The machine-readable
//! document goes to standard output; the human summary with timings goes to
//! standard error.

mod report;
mod statefile;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entcert_core::measures::{
    builtin_expected_monotone, builtin_measure, ppt_relative_entropy, ree, ReeConfig,
    BUILTIN_MEASURE_NAMES,
};
use entcert_core::sample::{random_density, rng_from_seed, uniform_simplex_weights};
use entcert_core::states::{flag_mix, isotropic, max_entangled, random_separable};
use entcert_core::{
    default_config_for, verdict_from_reports, DensityOperator, Ensemble, FlagBasis, Register,
    CHECK_SEQUENCE,
};

use report::{render_summary, ReportDocument};
use statefile::{parse_state_file, render_state_file};

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Parser)]
#[command(
    name = "entcert",
    version,
    about = "Certify and evaluate entanglement measures on labelled density operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seven-check certification battery for a built-in measure.
    Certify(CertifyArgs),
    /// Evaluate a built-in measure on a state file.
    Eval(EvalArgs),
    /// Generate a state file from a named family on standard output.
    Gen(GenArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// One of: negativity, ree, control-purity, control-reduction-entropy.
    measure: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per dimension profile.
    #[arg(long)]
    trials: Option<usize>,
    /// Violation threshold separating pass from fail.
    #[arg(long)]
    tol: Option<f64>,
    /// Dimension profile as comma-separated party dims; repeat for a sweep.
    #[arg(long = "dims")]
    dims: Vec<String>,
    #[arg(long = "ensemble-size")]
    ensemble_size: Option<usize>,
    /// Rounds per sampled protocol.
    #[arg(long)]
    rounds: Option<usize>,
    /// Outcomes per sampled instrument.
    #[arg(long)]
    outcomes: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Report)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Full machine-readable document.
    Report,
    /// One deterministic line per check.
    Summary,
}

#[derive(Args)]
struct EvalArgs {
    /// One of: negativity, ree, control-purity, control-reduction-entropy.
    measure: String,
    /// Path to a state file.
    state: String,
    /// Display entropy-valued results in bits instead of nats.
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct GenArgs {
    /// One of: max-entangled, isotropic, random, random-separable, flag-mix.
    family: String,
    /// Local dimension for max-entangled and isotropic.
    #[arg(long)]
    d: Option<usize>,
    /// Fidelity with the maximally entangled state, for isotropic.
    #[arg(long)]
    fidelity: Option<f64>,
    /// Comma-separated party dimensions for the random families.
    #[arg(long)]
    dims: Option<String>,
    /// Rank of the generated random state (default: full).
    #[arg(long)]
    rank: Option<usize>,
    /// Product terms for random-separable (default: a PPT-safe count).
    #[arg(long)]
    terms: Option<usize>,
    /// Ensemble members for flag-mix.
    #[arg(long)]
    members: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Clap maps help/version to success and usage errors to 2.
            e.exit();
        }
    };
    let code = match cli.command {
        Command::Certify(args) => cmd_certify(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Gen(args) => cmd_gen(args),
    };
    ExitCode::from(code)
}

fn usage_error(message: &str) -> u8 {
    eprintln!("error: {}", message);
    2
}

fn parse_profile(text: &str) -> Result<Vec<usize>, String> {
    let dims: Result<Vec<usize>, _> = text.split(',').map(|p| p.trim().parse()).collect();
    match dims {
        Ok(d) if !d.is_empty() => Ok(d),
        _ => Err(format!("invalid dimension list '{}'", text)),
    }
}

fn cmd_certify(args: CertifyArgs) -> u8 {
    let Some(handle) = builtin_measure(&args.measure) else {
        return usage_error(&format!(
            "unknown measure '{}'; built-ins are {:?}",
            args.measure, BUILTIN_MEASURE_NAMES
        ));
    };
    let mut cfg = default_config_for(&args.measure);
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    if let Some(k) = args.ensemble_size {
        cfg.ensemble_size = k;
    }
    if let Some(rounds) = args.rounds {
        cfg.rounds = rounds;
    }
    if let Some(outcomes) = args.outcomes {
        cfg.outcomes = outcomes;
    }
    if !args.dims.is_empty() {
        let mut profiles = Vec::new();
        for text in &args.dims {
            match parse_profile(text) {
                Ok(p) => profiles.push(p),
                Err(e) => return usage_error(&e),
            }
        }
        cfg.dims = profiles;
    }
    if let Err(e) = cfg.validate() {
        return usage_error(&e.to_string());
    }

    let mut reports = Vec::with_capacity(CHECK_SEQUENCE.len());
    for (name, check) in CHECK_SEQUENCE {
        let started = Instant::now();
        match check(&handle, &cfg) {
            Ok(report) => {
                eprintln!(
                    "check {:<22} {}  ({:.3} s)",
                    name,
                    if report.passed { "PASS" } else { "FAIL" },
                    started.elapsed().as_secs_f64()
                );
                reports.push(report);
            }
            Err(e) => {
                eprintln!("error: check {} aborted: {}", name, e);
                return 1;
            }
        }
    }
    let verdict = verdict_from_reports(&args.measure, reports);

    match args.format {
        Format::Report => print!("{}", ReportDocument::new(&verdict, &cfg).render()),
        Format::Summary => print!("{}", render_summary(&verdict)),
    }

    let expected = builtin_expected_monotone(&args.measure).expect("built-in measure");
    let as_expected = verdict.predicted_monotone == expected;
    eprintln!(
        "verdict {} for {} (expected {}), direct checks {}",
        verdict.verdict_label(),
        args.measure,
        if expected {
            "PREDICTED-MONOTONE"
        } else {
            "NOT-MONOTONE"
        },
        if verdict.consistent {
            "consistent"
        } else {
            "INCONSISTENT"
        },
    );
    if as_expected && verdict.consistent {
        0
    } else {
        1
    }
}

fn cmd_eval(args: EvalArgs) -> u8 {
    let text = match fs::read_to_string(&args.state) {
        Ok(text) => text,
        Err(e) => return usage_error(&format!("cannot read '{}': {}", args.state, e)),
    };
    let state = match parse_state_file(&text) {
        Ok(state) => state,
        Err(e) => return usage_error(&format!("'{}': {}", args.state, e)),
    };
    let needs_cut = matches!(args.measure.as_str(), "negativity" | "ree");
    if needs_cut && state.registers().len() < 2 {
        return usage_error("this measure needs at least two parties");
    }
    // Entropy-valued outputs honor --bits; dimensionless ones ignore it.
    let scale = |value: f64, entropic: bool| {
        if entropic && args.bits {
            value / LN_2
        } else {
            value
        }
    };
    match args.measure.as_str() {
        "ree" => {
            let cfg = ReeConfig::default();
            let result = match ree(&state, &cfg) {
                Ok(result) => result,
                Err(e) => return usage_error(&e.to_string()),
            };
            let lower = match ppt_relative_entropy(&state, 1e-7) {
                Ok(lower) => lower,
                Err(e) => return usage_error(&e.to_string()),
            };
            let status = if result.converged {
                "converged"
            } else if result.iterations < cfg.max_iterations {
                "stalled"
            } else {
                "iteration-capped"
            };
            println!("{:.12}", scale(result.value, true));
            println!(
                "status: {} after {} iterations (gap {:.3e})",
                status, result.iterations, result.final_gap
            );
            println!("lower-bound: {:.12}", scale(lower.value, true));
        }
        name => {
            let Some(handle) = builtin_measure(name) else {
                return usage_error(&format!(
                    "unknown measure '{}'; built-ins are {:?}",
                    name, BUILTIN_MEASURE_NAMES
                ));
            };
            let entropic = name == "control-reduction-entropy";
            println!("{:.12}", scale(handle.evaluate(&state), entropic));
        }
    }
    0
}

fn gen_party_registers(dims: &[usize]) -> Result<Vec<Register>, String> {
    const LETTERS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
    if dims.len() > LETTERS.len() {
        return Err("at most six parties are supported".to_string());
    }
    if dims.iter().any(|&d| d < 2) {
        return Err("party dimensions must be at least 2".to_string());
    }
    Ok(dims
        .iter()
        .enumerate()
        .map(|(k, &d)| Register::new(LETTERS[k], d))
        .collect())
}

fn cmd_gen(args: GenArgs) -> u8 {
    let state = match build_family(&args) {
        Ok(state) => state,
        Err(message) => return usage_error(&message),
    };
    print!("{}", render_state_file(&state));
    0
}

fn build_family(args: &GenArgs) -> Result<DensityOperator, String> {
    let dims = match &args.dims {
        Some(text) => parse_profile(text)?,
        None => vec![2, 2],
    };
    match args.family.as_str() {
        "max-entangled" => {
            let d = args.d.unwrap_or(2);
            if d < 2 {
                return Err("--d must be at least 2".to_string());
            }
            Ok(max_entangled(d))
        }
        "isotropic" => {
            let d = args.d.unwrap_or(2);
            if d < 2 {
                return Err("--d must be at least 2".to_string());
            }
            let fidelity = args
                .fidelity
                .ok_or_else(|| "isotropic requires --fidelity".to_string())?;
            isotropic(d, fidelity).map_err(|e| e.to_string())
        }
        "random" => {
            let registers = gen_party_registers(&dims)?;
            let dim: usize = dims.iter().product();
            let rank = args.rank.unwrap_or(dim);
            if rank == 0 || rank > dim {
                return Err(format!("--rank must lie in 1..={}", dim));
            }
            let mut rng = rng_from_seed(args.seed);
            let matrix = random_density(dim, rank, &mut rng);
            DensityOperator::new(matrix, registers).map_err(|e| e.to_string())
        }
        "random-separable" => {
            if dims.len() != 2 {
                return Err("random-separable needs exactly two parties".to_string());
            }
            let terms = args
                .terms
                .unwrap_or_else(|| entcert_core::states::default_separable_terms((dims[0], dims[1])));
            if terms == 0 {
                return Err("--terms must be at least 1".to_string());
            }
            let mut rng = rng_from_seed(args.seed);
            Ok(random_separable((dims[0], dims[1]), terms, &mut rng))
        }
        "flag-mix" => {
            let registers = gen_party_registers(&dims)?;
            if registers.len() < 2 {
                return Err("flag-mix needs at least two parties".to_string());
            }
            let members = args.members.unwrap_or(2);
            if members == 0 {
                return Err("--members must be at least 1".to_string());
            }
            let dim: usize = dims.iter().product();
            let mut rng = rng_from_seed(args.seed);
            let weights = uniform_simplex_weights(members, &mut rng);
            let states = (0..members)
                .map(|_| {
                    DensityOperator::new(random_density(dim, dim, &mut rng), registers.clone())
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let ensemble = Ensemble::new(weights, states).map_err(|e| e.to_string())?;
            let flag_site = registers[1].party.clone();
            let basis = FlagBasis::computational(flag_site.primed(), members);
            flag_mix(&ensemble, &flag_site, &basis).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown family '{}'; families are max-entangled, isotropic, random, random-separable, flag-mix",
            other
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_parse_and_reject() {
        assert_eq!(parse_profile("2,3").unwrap(), vec![2, 3]);
        assert_eq!(parse_profile(" 2 , 2 , 2 ").unwrap(), vec![2, 2, 2]);
        assert!(parse_profile("2,x").is_err());
        assert!(parse_profile("").is_err());
    }

    #[test]
    fn families_validate_parameters() {
        let base = GenArgs {
            family: "max-entangled".to_string(),
            d: Some(1),
            fidelity: None,
            dims: None,
            rank: None,
            terms: None,
            members: None,
            seed: 0,
        };
        assert!(build_family(&base).is_err());
        let iso = GenArgs {
            family: "isotropic".to_string(),
            d: Some(2),
            ..base
        };
        assert!(build_family(&iso).is_err(), "fidelity is required");
        let unknown = GenArgs {
            family: "bogus".to_string(),
            ..iso
        };
        assert!(build_family(&unknown).is_err());
    }

    #[test]
    fn generated_families_are_valid_and_deterministic() {
        let args = GenArgs {
            family: "flag-mix".to_string(),
            d: None,
            fidelity: None,
            dims: Some("2,2".to_string()),
            rank: None,
            terms: None,
            members: Some(2),
            seed: 7,
        };
        let one = build_family(&args).unwrap();
        let two = build_family(&args).unwrap();
        assert_eq!(one.matrix(), two.matrix());
        one.validate().unwrap();
        assert_eq!(one.registers().len(), 3);
    }
}
