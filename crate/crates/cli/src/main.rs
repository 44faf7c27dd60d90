//! `centropy`: command-line front end for deriving, projecting, checking and
//! evaluating entropic constraints of causal structures.
//!
//! Exit status is 0 on success, 1 on a domain error (unreadable file, parse
//! error, invalid structure, unknown inequality) and 2 on a usage error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_entropy::cone::{assemble, ConstraintSystem};
use causal_entropy::dist::{scan_boundary, scan_csv, JointDistribution};
use causal_entropy::expr::{parse_inequality, Inequality};
use causal_entropy::model::{parse_structure, CausalStructure, Dag};
use causal_entropy::polyhedron::{extreme_rays, marginal_cone, to_ieq, to_poi, MarginalCone};
use causal_entropy::rational::Rat;
use causal_entropy::scenarios::{builtin, NamedInequality};
use causal_entropy::verify::{is_valid, Verdict};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "centropy", version, about = "Entropic constraints of classical-quantum causal structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a structure file against the structural rules.
    Validate { file: PathBuf },
    /// Project the structure's entropic cone onto its marginal scenario.
    Cone {
        file: PathBuf,
        /// Print only the marginal rows, one per line, without grouping.
        #[arg(long)]
        marginal_only: bool,
        /// Also write the marginal rows in PORTA `.ieq` format.
        #[arg(long, value_name = "PATH")]
        ieq: Option<PathBuf>,
    },
    /// Extreme rays of the marginal cone in PORTA `.poi` format.
    Rays { file: PathBuf },
    /// Decide whether an inequality holds on the structure's cone.
    Check {
        file: PathBuf,
        /// A named inequality such as `IC_tight`, or an expression such as
        /// `I(A:B) <= H(A)`.
        #[arg(long)]
        ineq: String,
        /// Certificate output path; defaults to the input path with `.cert`
        /// appended.
        #[arg(long, value_name = "PATH")]
        cert: Option<PathBuf>,
    },
    /// Evaluate an inequality on a probability table; a positive slack is a
    /// violation.
    Eval {
        #[arg(long, value_name = "JSON")]
        dist: PathBuf,
        #[arg(long)]
        ineq: String,
    },
    /// Bisect the PR weight at which box mixtures violate an information
    /// causality inequality, over a grid of deterministic weights.
    Scan {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        ineq: String,
        /// Grid spacing as an exact rational `p/q`.
        #[arg(long, value_parser = parse_rat)]
        step: Rat,
    },
    /// Show or emit a built-in structure.
    Scenario {
        name: String,
        /// Print the structure in the text format read by the other commands.
        #[arg(long)]
        emit: bool,
    },
}

fn parse_rat(text: &str) -> Result<Rat, String> {
    text.parse().map_err(|_| format!("`{text}` is not an exact rational of the form p/q"))
}

/// A domain error, reported on stderr with exit status 1.
struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn fail<T>(message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(message.into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_structure(path: &Path) -> Result<CausalStructure, Failure> {
    parse_structure(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_dag(path: &Path) -> Result<Dag, Failure> {
    Dag::new(&load_structure(path)?).map_err(|report| Failure(format!("{}: invalid structure\n{report}", path.display())))
}

/// A named inequality, or else an inequality expression. Text without a
/// relation is taken as a name.
fn candidate(text: &str) -> Result<Inequality, Failure> {
    if let Some(named) = NamedInequality::parse(text) {
        return Ok(named.inequality());
    }
    if !text.contains(['<', '>', '=']) {
        return fail(format!("unknown inequality name `{text}`"));
    }
    parse_inequality(text).map_err(|e| Failure(format!("inequality: {e}")))
}

fn print_cone(cone: &MarginalCone, marginal_only: bool) {
    let system = &cone.system;
    let show = |p: usize| system.rows()[p].format(system.index());
    if marginal_only {
        for p in 0..system.len() {
            println!("{}", show(p));
        }
        return;
    }
    println!(
        "# {} marginal rows: {} polymatroid, {} causal in {} orbits",
        system.len(),
        cone.basic.len(),
        cone.causal.len(),
        cone.orbits.len()
    );
    println!("# polymatroid");
    for &p in &cone.basic {
        println!("{}", show(p));
    }
    for (k, orbit) in cone.orbits.iter().enumerate() {
        println!("# causal orbit {} ({} rows)", k + 1, orbit.len());
        for &p in orbit {
            println!("{}", show(p));
        }
    }
}

fn check(file: &Path, ineq: &str, cert: Option<PathBuf>) -> Result<(), Failure> {
    let candidate = candidate(ineq)?;
    let system: ConstraintSystem =
        assemble(&load_dag(file)?, Vec::new()).map_err(|e| Failure(e.to_string()))?;
    let certificate = is_valid(&system, &candidate).map_err(|e| Failure(e.to_string()))?;
    certificate.replay(&system, &candidate).map_err(|e| Failure(e.to_string()))?;
    let path = cert.unwrap_or_else(|| {
        let mut p = file.as_os_str().to_owned();
        p.push(".cert");
        PathBuf::from(p)
    });
    write(&path, &certificate.to_text(&system))?;
    println!("{}", certificate.verdict);
    println!("certificate {}", path.display());
    if certificate.verdict == Verdict::NotImplied {
        println!("violating entropy vector in the certificate");
    }
    Ok(())
}

/// Exact slack when every entropy involved is dyadic, otherwise a float.
fn slack(candidate: &Inequality, dist: &JointDistribution) -> Result<String, Failure> {
    let mut exact = Some(Rat::zero());
    for (names, coef) in candidate.expr.terms() {
        let list: Vec<&str> = names.iter().map(String::as_str).collect();
        match dist.entropy_exact(&list).map_err(|e| Failure(e.to_string()))? {
            Some(h) => exact = exact.map(|acc| acc - coef * &h),
            None => exact = None,
        }
    }
    if let Some(value) = exact {
        let sign = if value.is_negative() { "" } else { "+" };
        return Ok(format!("{sign}{value}"));
    }
    let value = candidate.slack_with(&mut |names| {
        let list: Vec<&str> = names.iter().map(String::as_str).collect();
        dist.entropy(&list).unwrap_or(f64::NAN)
    });
    Ok(format!("{value:+.12}"))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let report = load_structure(&file)?.validate();
            print!("{report}");
            if !report.is_ok() {
                return fail(format!("{}: {} violation(s)", file.display(), report.violations.len()));
            }
        }
        Command::Cone { file, marginal_only, ieq } => {
            let cone = marginal_cone(&load_dag(&file)?);
            print_cone(&cone, marginal_only);
            if let Some(path) = ieq {
                write(&path, &to_ieq(&cone.system))?;
            }
        }
        Command::Rays { file } => {
            let cone = marginal_cone(&load_dag(&file)?);
            print!("{}", to_poi(&extreme_rays(&cone.system)));
        }
        Command::Check { file, ineq, cert } => check(&file, &ineq, cert)?,
        Command::Eval { dist, ineq } => {
            let candidate = candidate(&ineq)?;
            let table = JointDistribution::from_json(&read(&dist)?)
                .map_err(|e| Failure(format!("{}: {e}", dist.display())))?;
            println!("slack {}", slack(&candidate, &table)?);
        }
        Command::Scan { scenario, ineq, step } => {
            if scenario != "ic2" {
                return fail(format!("unknown scan scenario `{scenario}`; only `ic2` is available"));
            }
            let candidate = candidate(&ineq)?;
            let rows = scan_boundary(&candidate, &step).map_err(|e| Failure(e.to_string()))?;
            print!("{}", scan_csv(&ineq, &step, &rows));
        }
        Command::Scenario { name, emit } => {
            let Some(structure) = builtin(&name) else {
                return fail(format!("unknown scenario `{name}`"));
            };
            if emit {
                print!("{}", structure.to_dsl());
            } else {
                let dag = Dag::new(&structure).map_err(|r| Failure(r.to_string()))?;
                println!(
                    "{name}: {} systems, {} marginal contexts, {} entropy coordinates",
                    dag.len(),
                    dag.marginal_contexts().len(),
                    dag.subset_coordinates().len()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(1)
        }
    }
}
