use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellcomm_core::bases::{check_weyl_properties, PropertyCheck, WeylBasis};
use bellcomm_core::bell::{chsh_value, ChshSettings, UnitVector3};
use bellcomm_core::complementarity::{m_d_best_known, m_d_bound, m_value_qudit, qudit_commutator_norm_direct, CoeffTensor};
use bellcomm_core::optimizer::{maximize_md, OptimizationConfig};
use bellcomm_core::report::build_report;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Accepted deviation of an input vector's norm from 1.
const INPUT_NORM_TOL: f64 = 1e-9;
/// Round-trip tolerance for `mbound --self-check`.
const SELF_CHECK_TOL: f64 = 1e-9;
/// Classical CHSH ceiling.
const CLASSICAL_BOUND: f64 = 2.0;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<bellcomm_core::Error> for CliError {
    fn from(e: bellcomm_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "bellcomm", version, about = "Commutator complementarity of generalized Bell operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Weyl operator properties for one dimension.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=8))]
        d: u64,
        /// Seed for the random samples used by some checks.
        #[arg(long, env = "BELLCOMM_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// CHSH correlations and value on the singlet.
    Chsh(ChshArgs),
    /// Best-known and optimized supremum of the qudit commutator norm.
    Mbound {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=6))]
        d: u64,
        #[arg(long, env = "BELLCOMM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Feed the certificate and the optimizer argmax back through the library.
        #[arg(long)]
        self_check: bool,
    },
    /// Write the per-dimension comparison table as CSV.
    Report {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=6))]
        dmax: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ChshArgs {
    /// Use the standard maximally violating settings.
    #[arg(long, value_parser = ["paper"], conflicts_with_all = ["a1", "a2", "b1", "b2"])]
    preset: Option<String>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "preset")]
    a1: Option<String>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "preset")]
    a2: Option<String>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "preset")]
    b1: Option<String>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "preset")]
    b2: Option<String>,
    /// Rescale any nonzero vector to unit length instead of rejecting it.
    #[arg(long)]
    normalize: bool,
}

fn parse_vector(name: &str, text: &str, normalize: bool) -> Result<UnitVector3, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("--{name} {text:?}: {e}")))?;
    let [x, y, z] = parts[..] else {
        return Err(CliError::Input(format!("--{name} {text:?}: expected 3 comma-separated components")));
    };
    let norm = (x * x + y * y + z * z).sqrt();
    if !normalize && (norm - 1.0).abs() > INPUT_NORM_TOL {
        return Err(CliError::Input(format!("--{name} {text:?} is not a unit vector (norm {norm}); pass --normalize to rescale")));
    }
    UnitVector3::normalized(x, y, z).map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Numerical(e.to_string())),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    d: usize,
    passed: bool,
    properties: Vec<PropertyCheck>,
}

fn cmd_verify(d: usize, seed: u64) -> Result<bool, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let properties = check_weyl_properties(d, &mut rng)?;
    let passed = properties.iter().all(|p| p.passed);
    print_json(&VerifyOutput { d, passed, properties })?;
    Ok(passed)
}

#[derive(Serialize)]
struct ChshOutput {
    settings: ChshSettings,
    /// `[<A1B1>, <A1B2>, <A2B1>, <A2B2>]`.
    correlations: [f64; 4],
    chsh_value: f64,
    violates_classical: bool,
}

fn cmd_chsh(args: &ChshArgs) -> Result<(), CliError> {
    let settings = if args.preset.is_some() {
        ChshSettings::maximal_violation()
    } else {
        let get = |name: &str, v: &Option<String>| {
            let text = v.as_deref().ok_or_else(|| CliError::Input(format!("--{name} is required")))?;
            parse_vector(name, text, args.normalize)
        };
        ChshSettings {
            a1: get("a1", &args.a1)?,
            a2: get("a2", &args.a2)?,
            b1: get("b1", &args.b1)?,
            b2: get("b2", &args.b2)?,
        }
    };
    let value = chsh_value(&settings);
    print_json(&ChshOutput {
        settings,
        correlations: settings.correlations(),
        chsh_value: value,
        violates_classical: value > CLASSICAL_BOUND + 1e-12,
    })
}

#[derive(Serialize)]
struct Certificate {
    /// 1-based `(i, j)` carrying unit weight.
    source: (usize, usize),
    exponent: usize,
    tensor: CoeffTensor,
}

#[derive(Serialize)]
struct OptimizerSummary {
    converged: bool,
    iterations_used: usize,
    restarts: usize,
    seed: u64,
    closed_form_at_argmax: f64,
    direct_at_argmax: f64,
}

#[derive(Serialize)]
struct SelfCheck {
    certificate_closed_form: f64,
    certificate_direct: f64,
    max_deviation: f64,
    passed: bool,
}

#[derive(Serialize)]
struct MboundOutput {
    d: usize,
    paper_bound: f64,
    best_known: f64,
    optimizer_value: f64,
    certificate: Certificate,
    /// `paper_bound - best_known`.
    gap: f64,
    optimizer: OptimizerSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    self_check: Option<SelfCheck>,
}

fn cmd_mbound(d: usize, seed: u64, restarts: usize, self_check: bool) -> Result<(), CliError> {
    let cfg = OptimizationConfig { restarts, seed, ..Default::default() };
    cfg.validate()?;
    let bound = m_d_bound(d)?;
    let best = m_d_best_known(d)?;
    let opt = maximize_md(d, &cfg)?;

    let check = if self_check {
        let basis = WeylBasis::new(d)?;
        let closed = m_value_qudit(&best.certificate)?;
        let direct = qudit_commutator_norm_direct(&best.certificate, &basis, 1)?;
        let max_deviation = [
            (closed - best.value).abs(),
            (direct - best.value).abs(),
            (opt.closed_form - opt.result.value).abs(),
            (opt.direct - opt.result.value).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Some(SelfCheck {
            certificate_closed_form: closed,
            certificate_direct: direct,
            max_deviation,
            passed: max_deviation <= SELF_CHECK_TOL,
        })
    } else {
        None
    };

    let output = MboundOutput {
        d,
        paper_bound: bound,
        best_known: best.value,
        optimizer_value: opt.result.value,
        certificate: Certificate { source: best.source, exponent: best.exponent, tensor: best.certificate },
        gap: bound - best.value,
        optimizer: OptimizerSummary {
            converged: opt.result.converged,
            iterations_used: opt.result.iterations_used,
            restarts,
            seed,
            closed_form_at_argmax: opt.closed_form,
            direct_at_argmax: opt.direct,
        },
        self_check: check,
    };
    print_json(&output)?;

    if !output.optimizer.converged {
        return Err(CliError::Numerical(format!(
            "optimizer did not converge within {} iterations",
            cfg.max_iters
        )));
    }
    if let Some(c) = &output.self_check {
        if !c.passed {
            return Err(CliError::Numerical(format!("self-check deviation {:e} exceeds {SELF_CHECK_TOL:e}", c.max_deviation)));
        }
    }
    Ok(())
}

fn write_report(dmax: usize, out: &Path) -> Result<(), CliError> {
    let rows = build_report(dmax)?;
    let mut writer = csv::Writer::from_path(out).map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    let io = |e: csv::Error| CliError::Input(format!("cannot write {}: {e}", out.display()));
    writer.write_record(["d", "m_best_known", "m_paper_bound_2d", "k_d_bound_4d"]).map_err(io)?;
    for r in &rows {
        writer
            .write_record([
                r.d.to_string(),
                format!("{:.12}", r.m_best_known),
                format!("{:.12}", r.m_paper_bound),
                format!("{:.12}", r.k_d_bound),
            ])
            .map_err(io)?;
    }
    writer.flush().map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    #[derive(Serialize)]
    struct Written<'a> {
        out: &'a Path,
        rows: &'a [bellcomm_core::ReportRow],
    }
    print_json(&Written { out, rows: &rows })
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Verify { d, seed } => {
            let passed = cmd_verify(d as usize, seed)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Chsh(args) => cmd_chsh(&args).map(|_| ExitCode::SUCCESS),
        Command::Mbound { d, seed, restarts, self_check } => {
            cmd_mbound(d as usize, seed, restarts, self_check).map(|_| ExitCode::SUCCESS)
        }
        Command::Report { dmax, out } => write_report(dmax as usize, &out).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
