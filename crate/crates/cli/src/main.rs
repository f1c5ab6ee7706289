use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gauss_distill::montecarlo::simulate_protocol;
use gauss_distill::output::{
    write_json, write_report_csv, write_robustness_csv, write_sample_csv, write_sweep_csv, write_threshold_csv,
};
use gauss_distill::protocol::{find_x_threshold, run_protocol, ProtocolParams, ProtocolStep, Squeezing};
use gauss_distill::robustness::robustness_scan;
use gauss_distill::sweep::{run_sweep, worker_pool, SweepSpec, SweepStatus, XPolicy};
use gauss_distill::Error;

const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERIC: u8 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "gauss-distill",
    version,
    about = "Entanglement distribution through a separable Gaussian ancilla"
)]
struct Cli {
    /// Output format (default: json for `protocol`, csv otherwise).
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write machine-readable output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the three-step protocol at one parameter point.
    Protocol {
        #[command(flatten)]
        squeezing: SqueezingArgs,
        /// Noise strength x.
        #[arg(long)]
        x: f64,
        /// Also condition on a homodyne measurement of (x_C + p_C)/sqrt(2).
        #[arg(long)]
        measure: bool,
    },
    /// Scan the (vA, vB) plane.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        va_min: f64,
        #[arg(long, default_value_t = 3.0)]
        va_max: f64,
        #[arg(long, default_value_t = 1.0)]
        vb_min: f64,
        #[arg(long, default_value_t = 4.0)]
        vb_max: f64,
        #[arg(long, default_value_t = 81)]
        steps_va: usize,
        #[arg(long, default_value_t = 81)]
        steps_vb: usize,
        /// Use this noise strength at every point.
        #[arg(long, conflicts_with = "margin")]
        x: Option<f64>,
        /// Relative margin above the largest threshold.
        #[arg(long, default_value_t = 1e-3)]
        margin: f64,
    },
    /// Add isotropic noise to the initial state and rerun steps 2 and 3.
    Robustness {
        #[command(flatten)]
        squeezing: SqueezingArgs,
        #[arg(long)]
        x: f64,
        /// Comma-separated noise levels.
        #[arg(long, value_delimiter = ',', default_value = "0,0.005,0.01,0.02")]
        eps: Vec<f64>,
    },
    /// Simulate the LOCC preparation with random displacements.
    Sample {
        #[command(flatten)]
        squeezing: SqueezingArgs,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Fit Σ(x) = x(ux + v) after steps 2 and 3 and report the thresholds.
    Threshold {
        #[command(flatten)]
        squeezing: SqueezingArgs,
    },
}

#[derive(Args, Debug)]
struct SqueezingArgs {
    /// Local squeezing exponent d (with --r).
    #[arg(long, requires = "r", conflicts_with_all = ["va", "vb"])]
    d: Option<f64>,
    /// Two-mode squeezing exponent r (with --d).
    #[arg(long, requires = "d")]
    r: Option<f64>,
    /// Position variance of the first input, e^{2(d-r)} (with --vb).
    #[arg(long, requires = "vb")]
    va: Option<f64>,
    /// Position variance of the second input, e^{2(d+r)} (with --va).
    #[arg(long, requires = "va")]
    vb: Option<f64>,
}

impl SqueezingArgs {
    fn resolve(&self) -> Result<Squeezing, Error> {
        match (self.d, self.r, self.va, self.vb) {
            (Some(d), Some(r), None, None) => Squeezing::new(d, r),
            (None, None, Some(va), Some(vb)) => Squeezing::from_variances(va, vb),
            _ => Err(Error::InvalidParameters(
                "give exactly one of (--d, --r) or (--va, --vb)".into(),
            )),
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::InvalidParameters(_) | Error::InvalidSweep(_) => EXIT_INVALID,
        _ => EXIT_NUMERIC,
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Summary goes to stdout when the machine output goes to a file, else to stderr.
fn summary(cli: &Cli, text: &str) {
    if cli.quiet {
        return;
    }
    if cli.out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn require_positive_x(x: f64) -> Result<(), Error> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("requires x > 0, got x={x}")))
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Protocol { squeezing, x, measure } => {
            require_positive_x(*x)?;
            let params = ProtocolParams::with_squeezing(squeezing.resolve()?, *x)?;
            let report = run_protocol(&params, *measure)?;
            let mut text = format!(
                "d = {:.6}, r = {:.6}, vA = {:.6}, vB = {:.6}, x = {}\n\
                 x_sep = {:.6}, x_th = {}\n\
                 nu (A|B after step 3) = {:.6}{}\n\
                 sigma step 2 (C|AB) = {:.6}, sigma step 3 (C|AB) = {:.6}\n\
                 all protocol claims hold: {}",
                params.squeezing.d,
                params.squeezing.r,
                params.squeezing.v_a(),
                params.squeezing.v_b(),
                params.x,
                params.squeezing.x_sep,
                report.x_th.map_or("none".into(), |t| format!("{t:.6}")),
                report.nu,
                report
                    .nu_m
                    .map_or(String::new(), |m| format!(", after homodyne on C = {m:.6}")),
                report.sigma_step2,
                report.sigma_step3,
                report.all_claims_hold(),
            );
            for v in &report.verdicts {
                text.push_str(&format!(
                    "\n  step {} {:<6} {:?}: statistic {:.6} -> separable {}",
                    v.step, v.verdict.partition, v.verdict.criterion, v.verdict.statistic, v.verdict.separable
                ));
            }
            for flag in &report.flags {
                text.push_str(&format!("\n  warning: {flag}"));
            }
            summary(cli, &text);
            let out = open_output(&cli.out)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&report, out),
                Format::Csv => write_report_csv(&report, out),
            }
        }
        Command::Sweep {
            va_min,
            va_max,
            vb_min,
            vb_max,
            steps_va,
            steps_vb,
            x,
            margin,
        } => {
            let spec = SweepSpec {
                va_range: (*va_min, *va_max),
                vb_range: (*vb_min, *vb_max),
                steps_va: *steps_va,
                steps_vb: *steps_vb,
                x_policy: x.map_or(XPolicy::ThresholdMargin(*margin), XPolicy::Fixed),
            };
            spec.validate()?;
            let pool = worker_pool()?;
            let records = pool.install(|| run_sweep(&spec))?;
            let ok = records.iter().filter(|r| r.status == SweepStatus::Ok).count();
            summary(cli, &format!("{} grid points, {} with status ok", records.len(), ok));
            let out = open_output(&cli.out)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_sweep_csv(&records, out),
                Format::Json => write_json(&records, out),
            }
        }
        Command::Robustness { squeezing, x, eps } => {
            require_positive_x(*x)?;
            let params = ProtocolParams::with_squeezing(squeezing.resolve()?, *x)?;
            let rows = robustness_scan(&params, eps)?;
            let text = rows
                .iter()
                .map(|r| {
                    format!(
                        "eps = {:<8} nu = {:.6}  A|B separable: {}",
                        r.epsilon, r.nu, r.ab_separable
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            summary(cli, &text);
            let out = open_output(&cli.out)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_robustness_csv(&rows, out),
                Format::Json => write_json(&rows, out),
            }
        }
        Command::Sample { squeezing, x, n, seed } => {
            require_positive_x(*x)?;
            if *n < 2 {
                return Err(Error::InvalidParameters(format!("requires n >= 2, got {n}")));
            }
            let params = ProtocolParams::with_squeezing(squeezing.resolve()?, *x)?;
            let pool = worker_pool()?;
            let run = pool.install(|| simulate_protocol(&params, *n, *seed))?;
            let mut text = format!(
                "n = {}, seed = {}\nmax |estimate - gamma1| = {:.3e} ({:.2} x stderr scale {:.3e})\n\
                 estimated nu = {:.6} (A|B separable: {}), estimated sigma step 3 = {:.6}",
                n,
                seed,
                run.deviation_gamma1,
                run.deviation_gamma1 / run.estimate.stderr_scale,
                run.estimate.stderr_scale,
                run.simon.statistic,
                run.simon.separable,
                run.sigma_step3,
            );
            if !run.reliable {
                text.push_str("\nwarning: estimate statistically unreliable");
            }
            summary(cli, &text);
            let out = open_output(&cli.out)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_sample_csv(&run, out),
                Format::Json => write_json(&run, out),
            }
        }
        Command::Threshold { squeezing } => {
            let sq = squeezing.resolve()?;
            let fits = [
                find_x_threshold(&sq, ProtocolStep::Second)?,
                find_x_threshold(&sq, ProtocolStep::Third)?,
            ];
            let text = fits
                .iter()
                .map(|f| {
                    format!(
                        "step {}: u = {:.9}, v = {:.9}, x_th = {}",
                        f.step.index(),
                        f.u,
                        f.v,
                        f.x_th.map_or("none".into(), |t| format!("{t:.9}"))
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            summary(cli, &text);
            let out = open_output(&cli.out)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_threshold_csv(&fits, out),
                Format::Json => write_json(&fits, out),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
