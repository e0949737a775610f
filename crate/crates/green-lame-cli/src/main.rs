//! `green-lame`: evaluate elliptic kernels, enumerate branch points of the
//! Lamé curve, verify the Hessian/bubbling-invariant identity at each of
//! them, and sweep the torus modulus.
//!
//! Exit codes: 0 = everything within tolerance, 1 = at least one defect
//! exceeded its gate (partial results are still emitted with failure
//! markers), 2 = input error.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use green_lame::branch::BranchTemplate;
use green_lame::report::{self, VerifyOptions};
use green_lame::{tol, C};
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "green-lame", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print ℘, ℘', ℘'', ζ, σ and the modular data at one point
    Kernel(KernelArgs),
    /// Enumerate (or solve for) branch points and print their records
    Branch(BranchArgs),
    /// Run the full verification chain at every branch point of one torus
    Verify(VerifyArgs),
    /// Verify across a grid of tau values and emit one row per branch point
    Sweep(SweepArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// output format
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct KernelArgs {
    /// torus modulus as re,im (Im > 0)
    #[arg(long, value_parser = parse_complex)]
    tau: C,
    /// evaluation point as re,im
    #[arg(long, value_parser = parse_complex)]
    z: C,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long, value_parser = parse_complex)]
    tau: C,
    /// number of points of the configuration (census exists for 1 and 2)
    #[arg(long)]
    n: Option<usize>,
    /// symmetric ansatz, e.g. "hp1+hp2", "pair", "hp3+pair" (requires --seed per pair)
    #[arg(long)]
    template: Option<String>,
    /// one complex seed per ± pair of the template, as re,im
    #[arg(long, value_parser = parse_complex, num_args = 0..)]
    seed: Vec<C>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_complex)]
    tau: C,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    tolerances: ToleranceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// grid spec "im:lo:hi:count" (tau = tau_re + i t over the range)
    #[arg(long)]
    grid: String,
    /// fixed real part of tau for the grid
    #[arg(long, default_value_t = 0.0)]
    tau_re: f64,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    tolerances: ToleranceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ToleranceArgs {
    /// gate on kernel identity defects
    #[arg(long, default_value_t = 1e-10)]
    tol_kernel: f64,
    /// gate on constraint-residual defects
    #[arg(long, default_value_t = 1e-9)]
    tol_newton: f64,
    /// evaluation budget for the quadrature route of D
    #[arg(long, default_value_t = tol::QUAD_BUDGET)]
    quad_budget: usize,
    /// base finite-difference step for the Jacobian bridge
    #[arg(long, default_value_t = tol::FD_STEP)]
    fd_step: f64,
    /// skip the quadrature route (D_quad reported as null)
    #[arg(long)]
    skip_quad: bool,
    /// include per-stage wall times (makes output non-reproducible)
    #[arg(long)]
    timings: bool,
}

impl ToleranceArgs {
    fn to_options(&self) -> VerifyOptions {
        VerifyOptions {
            quad_budget: self.quad_budget,
            fd_step: self.fd_step,
            skip_quad: self.skip_quad,
            timings: self.timings,
            tol_kernel: self.tol_kernel,
            tol_newton: self.tol_newton,
        }
    }
}

fn parse_complex(s: &str) -> Result<C, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected re,im but got `{s}`"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part: {e}"))?;
    Ok(C::new(re, im))
}

fn parse_template(s: &str) -> anyhow::Result<BranchTemplate> {
    let mut half_periods = Vec::new();
    let mut pairs = 0;
    for part in s.split('+') {
        match part.trim() {
            "pair" => pairs += 1,
            hp if hp.starts_with("hp") => {
                let k: usize = hp[2..]
                    .parse()
                    .map_err(|_| anyhow!("bad half-period label `{hp}`"))?;
                half_periods.push(k);
            }
            other => bail!("template component `{other}` (want hp1|hp2|hp3|pair)"),
        }
    }
    Ok(BranchTemplate { half_periods, pairs })
}

fn emit(output: &OutputArgs, body: String) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, body).context("writing output file")?,
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn run() -> anyhow::Result<u8> {
    match Cli::parse().command {
        Command::Kernel(args) => {
            let rep = report::kernel_report(args.tau, args.z).map_err(input_error)?;
            let body = match args.output.format.unwrap_or(Format::Text) {
                Format::Json => serde_json::to_string_pretty(&rep)? + "\n",
                _ => kernel_table(&rep),
            };
            emit(&args.output, body)?;
            Ok(0)
        }
        Command::Branch(args) => {
            let records = match (&args.template, args.n) {
                (Some(t), _) => {
                    let template = parse_template(t)?;
                    vec![report::solve_record(args.tau, &template, &args.seed)
                        .map_err(input_error)?]
                }
                (None, Some(n)) => report::branch_records(args.tau, n).map_err(input_error)?,
                (None, None) => bail!("either --n or --template is required"),
            };
            emit(&args.output, serde_json::to_string_pretty(&records)? + "\n")?;
            Ok(0)
        }
        Command::Verify(args) => {
            let opts = args.tolerances.to_options();
            let lat = green_lame::make_lattice(args.tau).map_err(input_error)?;
            let pts =
                green_lame::enumerate_branch_points(args.n, &lat).map_err(input_error)?;
            let mut objects = Vec::new();
            let mut all_ok = true;
            for p in &pts {
                match report::report_for_point(p, &lat, &opts) {
                    Ok(rep) => {
                        all_ok &= rep.within_tolerance();
                        objects.push(serde_json::to_value(&rep)?);
                    }
                    Err(e) => {
                        all_ok = false;
                        objects.push(serde_json::json!({
                            "schema": report::SCHEMA,
                            "tau": [args.tau.re, args.tau.im],
                            "n": args.n,
                            "branch_point": { "label": p.label },
                            "error": e.to_string(),
                        }));
                    }
                }
            }
            emit(&args.output, serde_json::to_string_pretty(&objects)? + "\n")?;
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::Sweep(args) => {
            let taus = parse_grid(&args.grid, args.tau_re)?;
            let opts = args.tolerances.to_options();
            let results: Vec<_> = taus
                .par_iter()
                .map(|&tau| report::sweep_tau(tau, args.n, &opts))
                .collect();
            let mut all_ok = true;
            let mut body = String::new();
            let format = args.output.format.unwrap_or(Format::Csv);
            let mut rows_json = Vec::new();
            if format == Format::Csv {
                body.push_str(report::SWEEP_HEADER);
                body.push('\n');
            }
            for (tau, result) in taus.iter().zip(results) {
                match result {
                    Ok(rows) => {
                        for row in rows {
                            all_ok &= row.defect < 1e-7 || row.singular;
                            match format {
                                Format::Csv => {
                                    body.push_str(&row.to_csv());
                                    body.push('\n');
                                }
                                _ => rows_json.push(serde_json::to_value(&row)?),
                            }
                        }
                    }
                    Err(e) => {
                        all_ok = false;
                        match format {
                            Format::Csv => {
                                body.push_str(&format!(
                                    "{},{},{},FAILED:{e},,,,,,,,,,\n",
                                    tau.re, tau.im, args.n
                                ));
                            }
                            _ => rows_json.push(serde_json::json!({
                                "tau": [tau.re, tau.im],
                                "n": args.n,
                                "error": e.to_string(),
                            })),
                        }
                    }
                }
            }
            if format != Format::Csv {
                body = serde_json::to_string_pretty(&rows_json)? + "\n";
            }
            emit(&args.output, body)?;
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

fn parse_grid(spec: &str, tau_re: f64) -> anyhow::Result<Vec<C>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 || parts[0] != "im" {
        bail!("grid spec must be im:lo:hi:count, got `{spec}`");
    }
    let lo: f64 = parts[1].parse().context("grid lo")?;
    let hi: f64 = parts[2].parse().context("grid hi")?;
    let count: usize = parts[3].parse().context("grid count")?;
    if count < 1 || !(lo > 0.0) || !(hi >= lo) {
        bail!("grid requires 0 < lo <= hi and count >= 1");
    }
    Ok((0..count)
        .map(|i| {
            let t = if count == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            };
            C::new(tau_re, t)
        })
        .collect())
}

/// Library errors raised before any computation starts are usage errors.
fn input_error(e: green_lame::Error) -> anyhow::Error {
    anyhow!("{e}")
}

fn kernel_table(rep: &report::KernelReport) -> String {
    let fmt_c = |v: [f64; 2]| format!("{:+.15e} {:+.15e}i", v[0], v[1]);
    let mut s = String::new();
    s.push_str(&format!(
        "tau = {}   (nome cutoff {}{})\n",
        fmt_c(rep.tau),
        rep.nome_cutoff,
        if rep.slow_nome { ", slow nome |q| > 0.9" } else { "" }
    ));
    s.push_str(&format!("z   = {}\n\n", fmt_c(rep.z)));
    for (name, v) in [
        ("wp      ", rep.wp),
        ("wp'     ", rep.wp_prime),
        ("wp''    ", rep.wp_pp),
        ("zeta    ", rep.zeta),
        ("sigma   ", rep.sigma),
        ("g2      ", rep.g2),
        ("g3      ", rep.g3),
        ("e1      ", rep.e[0]),
        ("e2      ", rep.e[1]),
        ("e3      ", rep.e[2]),
        ("eta1    ", rep.eta1),
        ("eta2    ", rep.eta2),
    ] {
        s.push_str(&format!("{name} {}\n", fmt_c(v)));
    }
    s.push_str("\nidentity residuals:\n");
    for (name, v) in &rep.identity_residuals {
        s.push_str(&format!("  {name:<24} {v:.3e}\n"));
    }
    s
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
