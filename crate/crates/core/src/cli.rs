//! Command-line front end.
//!
//! Exit codes: 0 success or positive verdict, 1 negative verdict,
//! 2 internal inconsistency, 3 size guard or enumeration budget exceeded,
//! 4 unreadable or malformed input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use num_bigint::BigUint;

use crate::catalog::{decomposition_report, identify, validate_count, TheorySignature};
use crate::document::PreorderDocument;
use crate::dot::render_dot;
use crate::oracle::{discrepancies, tally, OracleError, DEFAULT_ENUMERATION_BUDGET};
use crate::poset::{pareto_product, LabeledPreorder};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

pub const DEFAULT_MAX_NODES: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "rk-lattice",
    version,
    about = "Rudin-Keisler lattices and model counts for quite o-minimal Ehrenfeucht theories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the canonical lattice Q_k x L_{s,3} as JSON.
    Build {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: u64,
    },
    /// Evaluate both sides of the decomposition formula.
    Verify {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
    },
    /// Count models by brute-force enumeration and compare with closed forms.
    Oracle {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        max_enumeration: u64,
    },
    /// Match a preorder document against the canonical family.
    Identify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Emit the Hasse diagram of a preorder document as DOT.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide whether N is a possible number of countable models.
    ValidateCount { n: String },
    /// Pareto product of two preorder documents (give --input twice).
    Compose {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Budget(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Budget(_) => EXIT_BUDGET,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Budget(m) | Failure::Internal(m) => m,
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs one command.
/// Reports go to `out`, diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_PARSE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Build { k, s, output, max_nodes } => {
            cmd_build(TheorySignature::new(k, s), output.as_deref(), max_nodes, out)
        }
        Command::Verify { k, s } => cmd_verify(TheorySignature::new(k, s), out),
        Command::Oracle { k, s, max_enumeration } => {
            cmd_oracle(TheorySignature::new(k, s), max_enumeration, out)
        }
        Command::Identify { input } => cmd_identify(&input, out),
        Command::Render { input, output } => cmd_render(&input, output.as_deref(), out),
        Command::ValidateCount { n } => cmd_validate_count(&n, out),
        Command::Compose { input, output } => match input.as_slice() {
            [left, right] => cmd_compose(left, right, output.as_deref(), out),
            _ => Err(Failure::Parse(format!("compose takes exactly two --input files, got {}", input.len()))),
        },
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message());
            failure.code()
        }
    }
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Parse(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            out.write_all(text.as_bytes()).map_err(|e| Failure::Internal(format!("cannot write report: {e}")))
        }
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<(), Failure> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Failure::Internal(format!("cannot write report: {e}")))
}

fn load(path: &Path) -> Result<LabeledPreorder, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?;
    let doc =
        PreorderDocument::from_json(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    doc.to_preorder().map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn cmd_build(sig: TheorySignature, output: Option<&Path>, max_nodes: u64, out: &mut dyn Write) -> Outcome {
    let nodes = sig.node_count();
    if nodes > BigUint::from(max_nodes) {
        return Err(Failure::Budget(format!(
            "signature {sig} has {nodes} nodes, above the guard of {max_nodes}; raise --max-nodes to build it"
        )));
    }
    emit(&PreorderDocument::canonical(sig).to_json(), output, out)?;
    Ok(EXIT_OK)
}

fn cmd_verify(sig: TheorySignature, out: &mut dyn Write) -> Outcome {
    let report = decomposition_report(sig);
    say(out, format!("signature {sig}"))?;
    say(out, report.summary())?;
    say(out, report.expanded())?;
    say(out, "t\tm\tmultiplicity\tper-type\tvalue")?;
    for term in report.nonzero_terms() {
        say(
            out,
            format!("{}\t{}\t{}\t{}\t{}", term.t, term.m, term.multiplicity, term.per_type, term.value()),
        )?;
    }
    if report.balanced {
        say(out, "balanced")?;
        Ok(EXIT_OK)
    } else {
        Err(Failure::Internal(format!("decomposition for {sig} does not balance")))
    }
}

fn cmd_oracle(sig: TheorySignature, budget: u64, out: &mut dyn Write) -> Outcome {
    let (report, primes) = tally(sig, budget).map_err(|e| match e {
        OracleError::BudgetExceeded { .. } => Failure::Budget(format!("{e}; raise --max-enumeration")),
        OracleError::Mismatch(_) => Failure::Internal(e.to_string()),
    })?;
    say(out, format!("signature {sig}"))?;
    say(out, format!("total {}", report.total))?;
    say(out, format!("prime {}", report.prime_count))?;
    say(out, format!("limit {}", report.limit_count))?;
    say(out, "node\tlimit\tclosed-form")?;
    for (node, limits) in &report.per_node {
        say(out, format!("{node}\t{limits}\t{}", node.il()))?;
    }
    let found = discrepancies(&report, &primes);
    if found.is_empty() {
        say(out, "match")?;
        Ok(EXIT_OK)
    } else {
        say(out, "mismatch")?;
        Err(Failure::Internal(OracleError::Mismatch(found).to_string()))
    }
}

fn cmd_identify(input: &Path, out: &mut dyn Write) -> Outcome {
    let p = load(input)?;
    match identify(&p) {
        Some(sig) => {
            say(out, sig.to_string())?;
            Ok(EXIT_OK)
        }
        None => {
            say(out, "not canonical")?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn cmd_render(input: &Path, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let p = load(input)?.quotient_rk();
    let dot = render_dot(&p).map_err(|e| Failure::Internal(e.to_string()))?;
    emit(&dot, output, out)?;
    Ok(EXIT_OK)
}

fn cmd_validate_count(n: &str, out: &mut dyn Write) -> Outcome {
    let value = BigUint::from_str(n.trim())
        .map_err(|_| Failure::Parse(format!("`{n}` is not a positive decimal integer")))?;
    match validate_count(&value) {
        Err(e) => Err(Failure::Parse(e.to_string())),
        Ok(Some(sig)) => {
            say(out, sig.to_string())?;
            Ok(EXIT_OK)
        }
        Ok(None) => {
            say(out, "not a quite o-minimal Ehrenfeucht spectrum value")?;
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn cmd_compose(left: &Path, right: &Path, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let product = pareto_product(&load(left)?, &load(right)?);
    emit(&PreorderDocument::from_preorder(&product, None).to_json(), output, out)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["rk-lattice"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn verify_prints_identity() {
        let (code, out, _) = call(&["verify", "--k", "3", "--s", "0"]);
        assert_eq!(code, 0);
        assert!(out.contains("27 = 8 + 19\n"));
        assert!(out.contains("27 = 8 + 1·3 + 3·3 + 7·1\n"));
    }

    #[test]
    fn build_guard() {
        let (code, _, err) = call(&["build", "--k", "20", "--s", "0"]);
        assert_eq!(code, EXIT_BUDGET);
        assert!(err.contains("--max-nodes"));
    }

    #[test]
    fn oracle_budget() {
        let (code, _, err) = call(&["oracle", "--k", "0", "--s", "3", "--max-enumeration", "100"]);
        assert_eq!(code, EXIT_BUDGET);
        assert!(err.contains("--max-enumeration"));
    }

    #[test]
    fn usage_errors_are_parse_failures() {
        assert_eq!(call(&["verify", "--k", "x", "--s", "0"]).0, EXIT_PARSE);
        assert_eq!(call(&["nonsense"]).0, EXIT_PARSE);
        assert_eq!(call(&["validate-count", "0"]).0, EXIT_PARSE);
        assert_eq!(call(&["validate-count", "-5"]).0, EXIT_PARSE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn validate_count_verdicts() {
        assert_eq!(call(&["validate-count", "216"]), (0, "(0,3)\n".into(), String::new()));
        assert_eq!(call(&["validate-count", "3"]).1, "(1,0)\n");
        let (code, out, _) = call(&["validate-count", "100"]);
        assert_eq!(code, EXIT_NEGATIVE);
        assert_eq!(out, "not a quite o-minimal Ehrenfeucht spectrum value\n");
    }
}
