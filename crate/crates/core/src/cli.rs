//! Command-line driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::correlations::g2_zero;
use crate::correlations::{record, CorrelationKind};
use crate::error::Error;
use crate::hilbert::TruncatedSpace;
use crate::model::{build_liouvillian, j_opt, EffectiveParams};
use crate::steady::{occupations, steady_state, DensityMatrix};
use crate::sweep::{run_sweep, Scenario, SweepResult, SweepSpec};
use crate::weakdrive::{ansatz_g2, manifold_spectrum, residuals, solve_coefficients, MAX_MANIFOLD};

pub const THREADS_ENV: &str = "QUADROMECH_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "quadromech",
    version,
    about = "Photon and phonon statistics of a quadratically coupled optomechanical cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a built-in scenario or a JSON run configuration.
    Run(RunArgs),
    /// Print the optimal coupling for unconventional photon blockade.
    Jopt {
        #[arg(long, default_value_t = 1.0)]
        gamma_c: f64,
        #[arg(long, allow_negative_numbers = true)]
        gamma_m: f64,
    },
    /// Print eigenvalues and eigenvectors of the excitation manifolds.
    Spectrum {
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        /// Single manifold to print; all of 0..=4 when omitted.
        #[arg(long)]
        manifold: Option<usize>,
    },
    /// Run the built-in oracle checks.
    Validate,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Built-in scenario name (fig2a, fig2b, fig2c, fig2ef, fig3, fig4, fig5, fig6).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    scenario: Option<String>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: config out_dir, else .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, repeatable [default: csv]
    #[arg(long = "format", value_enum)]
    formats: Vec<Format>,
    /// Worker threads; QUADROMECH_THREADS takes precedence.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// JSON run configuration. Rates are in units of `γ_c`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub space: Option<TruncatedSpace>,
    #[serde(default)]
    pub converge_tol: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub formats: Option<Vec<Format>>,
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Reserved; no computation path is random.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl RunConfig {
    /// The sweep this configuration describes, validated.
    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let mut spec = match (&self.scenario, &self.sweep) {
            (Some(_), Some(_)) => {
                return Err(CliError::invalid(
                    "CONFIG_INVALID",
                    "give either scenario or sweep, not both",
                ))
            }
            (None, None) => {
                return Err(CliError::invalid(
                    "CONFIG_INVALID",
                    "one of scenario or sweep is required",
                ))
            }
            (Some(sc), None) => {
                SweepSpec::builtin(*sc).map_err(|e| CliError::invalid("CONFIG_INVALID", e.to_string()))?
            }
            (None, Some(s)) => s.clone(),
        };
        if let Some(space) = self.space {
            spec.space = space;
        }
        if self.converge_tol.is_some() {
            spec.converge_tol = self.converge_tol;
        }
        if self.parallelism == Some(0) {
            return Err(CliError::invalid("CONFIG_INVALID", "parallelism must be at least 1"));
        }
        if matches!(&self.formats, Some(f) if f.is_empty()) {
            return Err(CliError::invalid("CONFIG_INVALID", "formats must not be empty"));
        }
        spec.validate()
            .map_err(|e| CliError::invalid("CONFIG_INVALID", e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: EXIT_INVALID,
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: "NUMERICAL_FAILURE",
            message: message.into(),
            exit: EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::numerical(e.to_string())
        } else {
            CliError::invalid("INVALID_INPUT", e.to_string())
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::invalid("CONFIG_NOT_FOUND", format!("{}: no such file", path.display()))
        } else {
            CliError::invalid("CONFIG_UNREADABLE", format!("{}: {e}", path.display()))
        }
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid("CONFIG_PARSE", format!("{}: {e}", path.display())))
}

fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

/// CSV bytes for a sweep: axis and output columns, plus a trailing
/// `error` column when any row failed.
pub fn csv_bytes(result: &SweepResult) -> Result<Vec<u8>, CliError> {
    let io = |e: csv::Error| CliError::invalid("IO_ERROR", e.to_string());
    let with_error = result.failures() > 0;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    let mut header: Vec<&str> = result.spec.columns();
    if with_error {
        header.push("error");
    }
    w.write_record(&header).map_err(io)?;
    for row in &result.rows {
        let mut fields: Vec<String> = row.point.iter().chain(&row.values).map(|x| format_float(*x)).collect();
        if with_error {
            fields.push(row.error.clone().unwrap_or_default());
        }
        w.write_record(&fields).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::invalid("IO_ERROR", e.to_string()))
}

/// Pretty JSON with lexicographically ordered keys.
pub fn json_bytes(result: &SweepResult) -> Result<Vec<u8>, CliError> {
    let value = serde_json::to_value(result).map_err(|e| CliError::invalid("IO_ERROR", e.to_string()))?;
    let mut out = serde_json::to_vec_pretty(&value).map_err(|e| CliError::invalid("IO_ERROR", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::invalid(
                "INVALID_THREADS",
                format!("{THREADS_ENV} must be a positive integer, got '{v}'"),
            )),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_run(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = match (&args.config, &args.scenario) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => {
            let scenario: Scenario = name
                .parse()
                .map_err(|e: Error| CliError::invalid("UNKNOWN_SCENARIO", e.to_string()))?;
            RunConfig {
                scenario: Some(scenario),
                ..Default::default()
            }
        }
        (None, None) => return Err(CliError::invalid("USAGE", "either --scenario or --config is required")),
    };
    let spec = config.sweep_spec()?;
    if args.parallelism == Some(0) {
        return Err(CliError::invalid("USAGE", "--parallelism must be at least 1"));
    }
    let parallelism = threads_from_env()?
        .or(args.parallelism)
        .or(config.parallelism)
        .unwrap_or_else(default_parallelism);
    let out_dir = args.out.or(config.out_dir).unwrap_or_else(|| PathBuf::from("."));
    let formats = if args.formats.is_empty() {
        config.formats.unwrap_or_else(|| vec![Format::Csv])
    } else {
        args.formats
    };

    let result = run_sweep(&spec, parallelism)?;
    let failed = result.failures();
    if failed == result.rows.len() {
        return Err(CliError::numerical(format!(
            "every grid point failed; first cause: {}",
            result.rows.first().and_then(|r| r.error.clone()).unwrap_or_default()
        )));
    }
    if failed > 0 {
        let _ = writeln!(
            err,
            "warning: {failed} of {} grid points failed; see the error column",
            result.rows.len()
        );
    }
    fs::create_dir_all(&out_dir).map_err(|e| CliError::invalid("IO_ERROR", format!("{}: {e}", out_dir.display())))?;
    for f in formats {
        let (bytes, ext) = match f {
            Format::Csv => (csv_bytes(&result)?, "csv"),
            Format::Json => (json_bytes(&result)?, "json"),
        };
        let path = out_dir.join(format!("{}.{ext}", spec.scenario));
        fs::write(&path, bytes).map_err(|e| CliError::invalid("IO_ERROR", format!("{}: {e}", path.display())))?;
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(())
}

/// Rounds values that would print as `-0.0000000000` to zero.
fn tidy(x: f64) -> f64 {
    if x.abs() < 5e-11 {
        0.0
    } else {
        x
    }
}

fn cmd_spectrum(j: f64, manifold: Option<usize>, out: &mut dyn Write) -> Result<(), CliError> {
    let list: Vec<usize> = match manifold {
        Some(n) => vec![n],
        None => (0..=MAX_MANIFOLD).collect(),
    };
    for n in list {
        let r = manifold_spectrum(j, n)?;
        let _ = writeln!(out, "manifold N={n} (energies in units of J = {j})");
        let labels: Vec<String> = r.basis.iter().map(|(a, b)| format!("|{a},{b}>")).collect();
        let _ = writeln!(
            out,
            "{:>14} {}",
            "E/J",
            labels.iter().map(|l| format!("{l:>14}")).collect::<String>()
        );
        for (e, v) in r.eigenvalues.iter().map(|e| tidy(*e)).zip(&r.eigenvectors) {
            let coeffs: String = v.iter().map(|c| format!("{:>14.10}", tidy(*c))).collect();
            let _ = writeln!(out, "{e:>14.10} {coeffs}");
        }
    }
    Ok(())
}

type Check = (&'static str, Box<dyn Fn() -> Result<String, String>>);

fn oracle_checks() -> Vec<Check> {
    fn err(e: Error) -> String {
        e.to_string()
    }
    vec![
        (
            "optimal coupling closed form",
            Box::new(|| {
                let j = j_opt(1.0, 0.1).map_err(err)?;
                if (j - 0.4062).abs() < 5e-4 {
                    Ok(format!("J_opt = {j:.5}"))
                } else {
                    Err(format!("J_opt = {j}"))
                }
            }),
        ),
        (
            "manifold spectra",
            Box::new(|| {
                let expect: [&[f64]; 3] = [
                    &[-2f64.sqrt(), 2f64.sqrt()],
                    &[-6f64.sqrt(), 6f64.sqrt()],
                    &[-4.0, 0.0, 4.0],
                ];
                for (n, e) in (2..=4).zip(expect) {
                    let r = manifold_spectrum(1.0, n).map_err(err)?;
                    let dev = r
                        .eigenvalues
                        .iter()
                        .zip(e)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    if dev > 1e-10 {
                        return Err(format!("manifold {n} deviates by {dev:.2e}"));
                    }
                }
                Ok("N=2,3,4 match".into())
            }),
        ),
        (
            "weak-drive coefficient system",
            Box::new(|| {
                let ep = EffectiveParams::resonant(j_opt(1.0, 0.1).map_err(err)?, 0.005, 0.1, 0.0).map_err(err)?;
                let c = solve_coefficients(&ep).map_err(err)?;
                let worst = residuals(&ep, &c).iter().map(|r| r.norm()).fold(0.0, f64::max);
                if worst > 1e-12 * ep.epsilon {
                    return Err(format!("residual {worst:.2e}"));
                }
                if c.c20.norm() > 1e-10 * c.c11.norm() {
                    return Err(format!("|c20| = {:.2e} at the optimum", c.c20.norm()));
                }
                Ok(format!("max residual {worst:.2e}"))
            }),
        ),
        (
            "thermal fixed point",
            Box::new(|| {
                let ep = EffectiveParams::resonant(0.0, 0.0, 0.1, 0.1).map_err(err)?;
                let rho =
                    steady_state(&build_liouvillian(&ep, TruncatedSpace::default()).map_err(err)?).map_err(err)?;
                let (_, n_b) = occupations(&rho).map_err(err)?;
                let g = g2_zero(&rho, CorrelationKind::Bb).map_err(err)?;
                if (n_b - 0.1).abs() < 1e-6 && (g - 2.0).abs() < 1e-3 {
                    Ok(format!("n_b = {n_b:.8}, g2_bb = {g:.6}"))
                } else {
                    Err(format!("n_b = {n_b}, g2_bb = {g}"))
                }
            }),
        ),
        (
            "coherent state statistics",
            Box::new(|| {
                let space = TruncatedSpace::new(10, 14).map_err(err)?;
                let rho = DensityMatrix::coherent(space, C64::new(0.1, 0.0), C64::new(0.0, 0.2)).map_err(err)?;
                for kind in [CorrelationKind::Aa, CorrelationKind::Bb, CorrelationKind::Ab] {
                    let g = g2_zero(&rho, kind).map_err(err)?;
                    if (g - 1.0).abs() > 1e-10 {
                        return Err(format!("g2_{kind} = {g}"));
                    }
                }
                Ok("g2 = 1 for all pairs".into())
            }),
        ),
        (
            "weak-drive ansatz against master equation",
            Box::new(|| {
                let ep = EffectiveParams::resonant(j_opt(1.0, 0.1).map_err(err)?, 0.005, 0.1, 0.0).map_err(err)?;
                let me = record(&ep, TruncatedSpace::default()).map_err(err)?;
                let an = ansatz_g2(&solve_coefficients(&ep).map_err(err)?);
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
                let (db, dab) = (rel(an.g2_bb_0, me.g2_bb_0), rel(an.g2_ab_0, me.g2_ab_0));
                if db < 0.1 && dab < 0.1 && me.g2_aa_0 < 1e-3 && an.g2_aa_0 < 1e-3 {
                    Ok(format!("bb off by {:.2}%, ab off by {:.2}%", 100.0 * db, 100.0 * dab))
                } else {
                    Err(format!(
                        "bb {db:.3}, ab {dab:.3}, aa {:.2e}/{:.2e}",
                        me.g2_aa_0, an.g2_aa_0
                    ))
                }
            }),
        ),
    ]
}

fn cmd_validate(out: &mut dyn Write) -> Result<(), CliError> {
    let mut failed = 0;
    for (name, check) in oracle_checks() {
        match check() {
            Ok(detail) => {
                let _ = writeln!(out, "PASS {name}: {detail}");
            }
            Err(detail) => {
                failed += 1;
                let _ = writeln!(out, "FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        Err(CliError::numerical(format!("{failed} oracle check(s) failed")))
    } else {
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "error[USAGE]: {e}");
                    EXIT_INVALID
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args, out, err),
        Command::Jopt { gamma_c, gamma_m } => j_opt(gamma_c, gamma_m).map_err(CliError::from).map(|j| {
            let _ = writeln!(out, "{j:.5}");
        }),
        Command::Spectrum { j, manifold } => cmd_spectrum(j, manifold, out),
        Command::Validate => cmd_validate(out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.code, e.message);
            e.exit
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
