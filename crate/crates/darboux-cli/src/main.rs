//! Command-line front end.
//!
//! Every command reads one scenario file and writes plot-ready tables or a
//! JSON report into the output directory. Exit status 0 means the command
//! succeeded and, for `validate` and `verify`, that every condition passed.

mod output;
mod scenario;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use darboux_core::{
    evolve, psi_tilde, transform_hamiltonians, validate_triple, CoreError, Trajectory,
};
use scenario::{ResolvedScenario, Scenario, TripleSpec};

#[derive(Parser)]
#[command(
    name = "darboux",
    version,
    about = "Dressing-transform toolkit: validate determining data, integrate the \
             state pair, transform coefficient matrices, sample explicit solutions, \
             and verify the governing identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the scenario against every admission condition and report each one.
    Validate(CommonArgs),
    /// Integrate the state pair over the time grid and write trajectory.csv.
    Evolve(TimedArgs),
    /// Write original and transformed coefficient matrices, with the transfer
    /// matrices that connect them, at chosen times.
    Transform(TimedArgs),
    /// Evaluate the explicit solution on a space grid and write psi.csv.
    Sample(SampleArgs),
    /// Run the full verification suite and write report.json.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Tolerance override as NAME=VALUE; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Override the scenario's probe-sampling seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TimedArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated sample times, snapped to the nearest grid point.
    /// Default: five times evenly spaced over the run.
    #[arg(long)]
    t: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated sample times, snapped to the nearest grid point.
    #[arg(long)]
    t: Option<String>,
    /// Space grid as LO:HI:COUNT per axis, comma-separated.
    /// Default: the scenario box at its stated resolution.
    #[arg(long)]
    grid: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Evolve(args) => cmd_evolve(&args),
        Command::Transform(args) => cmd_transform(&args),
        Command::Sample(args) => cmd_sample(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_tol_flags(flags: &[String]) -> Result<Vec<(String, f64)>> {
    flags
        .iter()
        .map(|flag| {
            let (name, value) = flag
                .split_once('=')
                .with_context(|| format!("--tol {flag}: expected NAME=VALUE"))?;
            let value: f64 = value
                .parse()
                .with_context(|| format!("--tol {flag}: value is not a number"))?;
            Ok((name.to_string(), value))
        })
        .collect()
}

fn load_resolved(common: &CommonArgs) -> Result<ResolvedScenario> {
    let scenario = Scenario::load(&common.scenario)?;
    let overrides = parse_tol_flags(&common.tol)?;
    Ok(scenario.resolve(&overrides, common.seed)?)
}

/// Requested times snapped to trajectory indices, deduplicated, ascending.
fn snap_times(trajectory: &Trajectory, t_flag: Option<&str>, t_end: f64) -> Result<Vec<usize>> {
    let requested: Vec<f64> = match t_flag {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("--t: {s:?} is not a number"))
            })
            .collect::<Result<_>>()?,
        None => (0..5).map(|j| t_end * j as f64 / 4.0).collect(),
    };
    let mut indices = BTreeSet::new();
    for t in requested {
        if !t.is_finite() {
            bail!("--t: times must be finite");
        }
        indices.insert(trajectory.nearest_index(t));
    }
    Ok(indices.into_iter().collect())
}

fn cmd_validate(args: &CommonArgs) -> Result<bool> {
    let scenario = Scenario::load(&args.scenario)?;
    let overrides = parse_tol_flags(&args.tol)?;
    let tol = scenario.tolerances(&overrides)?;
    println!("scenario digest: {}", scenario.digest());

    let mut ok = true;
    let line = |passed: bool, condition: &str, detail: &str| {
        println!(
            "{} {condition}: {detail}",
            if passed { "[ok]      " } else { "[violated]" }
        );
    };

    // Closed-form specs must construct before admission can be judged.
    let built;
    let validation = match &scenario.triple {
        TripleSpec::Explicit { a, s0, pi0, c } => validate_triple(a, s0, pi0, c, &tol),
        _ => match scenario.build_triple(&tol) {
            Ok(t) => {
                built = t;
                validate_triple(built.a(), built.s0(), built.pi0(), built.couplings(), &tol)
            }
            Err(e) => {
                line(false, "construction", &e.to_string());
                return Ok(false);
            }
        },
    };
    for d in &validation.diagnostics {
        line(d.passed, d.condition, &d.detail);
        ok &= d.passed;
    }

    // Settings checks only make sense against a constructed triple.
    match scenario.build_triple(&tol) {
        Err(_) => ok = false,
        Ok(triple) => {
            for (name, outcome) in [
                (
                    "family",
                    scenario.family.validate(triple.m(), triple.r(), &tol),
                ),
                ("time_grid", scenario.time.validate()),
                (
                    "box",
                    scenario
                        .box_domain
                        .as_ref()
                        .map_or(Ok(()), |b| b.validate(triple.r())),
                ),
            ] {
                match outcome {
                    Ok(()) => line(true, name, "valid"),
                    Err(e) => {
                        line(false, name, &e.to_string());
                        ok = false;
                    }
                }
            }
            if let Some(h) = &scenario.h_vector {
                let good = h.rows() == triple.n() && h.cols() == 1;
                line(
                    good,
                    "h_vector",
                    &format!("{}x{}, state dimension {}", h.rows(), h.cols(), triple.n()),
                );
                ok &= good;
            }
        }
    }
    Ok(ok)
}

fn push_matrix_rows(out: &mut String, prefix: &str, matrix: &darboux_core::ComplexMatrix) {
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let z = matrix[(i, j)];
            writeln!(out, "{prefix},{i},{j},{},{}", z.re, z.im).unwrap();
        }
    }
}

fn cmd_evolve(args: &TimedArgs) -> Result<bool> {
    let resolved = load_resolved(&args.common)?;
    let trajectory = evolve(
        &resolved.triple,
        &resolved.family,
        &resolved.grid,
        &resolved.tolerances,
    )?;
    let indices = snap_times(&trajectory, args.t.as_deref(), resolved.grid.t_end)?;

    let mut csv = String::from("t,matrix,row,col,re,im\n");
    for &idx in &indices {
        let state = &trajectory.states()[idx];
        push_matrix_rows(&mut csv, &format!("{},pi", state.t), &state.pi);
        push_matrix_rows(&mut csv, &format!("{},s", state.t), &state.s);
    }
    let path = output::write_atomic(&args.common.out, "trajectory.csv", &csv)?;

    let worst = trajectory
        .states()
        .iter()
        .map(|s| s.identity_residual)
        .fold(0.0f64, f64::max);
    println!("wrote {} ({} sample times)", path.display(), indices.len());
    println!("max identity residual over the run: {worst:.3e}");
    Ok(true)
}

fn cmd_transform(args: &TimedArgs) -> Result<bool> {
    let resolved = load_resolved(&args.common)?;
    let trajectory = evolve(
        &resolved.triple,
        &resolved.family,
        &resolved.grid,
        &resolved.tolerances,
    )?;
    let indices = snap_times(&trajectory, args.t.as_deref(), resolved.grid.t_end)?;

    let mut hamiltonians = String::from("t,k,matrix,row,col,re,im\n");
    let mut transfers = String::from("t,k,row,col,re,im\n");
    let mut omitted = 0usize;
    for &idx in &indices {
        let state = &trajectory.states()[idx];
        let transformed = match transform_hamiltonians(
            &resolved.triple,
            &resolved.family,
            state,
            &resolved.tolerances,
        ) {
            Ok(t) => t,
            Err(CoreError::SingularState { .. }) | Err(CoreError::Singular) => {
                omitted += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for k in 0..resolved.triple.r() {
            push_matrix_rows(
                &mut hamiltonians,
                &format!("{},{k},h", state.t),
                &transformed.original[k],
            );
            push_matrix_rows(
                &mut hamiltonians,
                &format!("{},{k},h_tilde", state.t),
                &transformed.transformed[k],
            );
            push_matrix_rows(
                &mut transfers,
                &format!("{},{k}", state.t),
                &transformed.transfers[k].matrix,
            );
        }
    }
    if omitted > 0 {
        writeln!(hamiltonians, "# omitted times (singular S): {omitted}").unwrap();
        writeln!(transfers, "# omitted times (singular S): {omitted}").unwrap();
    }
    let hpath = output::write_atomic(&args.common.out, "hamiltonians.csv", &hamiltonians)?;
    let wpath = output::write_atomic(&args.common.out, "transfers.csv", &transfers)?;
    println!("wrote {} and {}", hpath.display(), wpath.display());
    Ok(true)
}

/// Per-axis sample values from a LO:HI:COUNT spec, or from the box.
fn space_grid(resolved: &ResolvedScenario, flag: Option<&str>) -> Result<Vec<Vec<f64>>> {
    let r = resolved.triple.r();
    let axis_values = |lo: f64, hi: f64, count: usize| -> Result<Vec<f64>> {
        if count == 0 {
            bail!("--grid: axis sample count must be at least 1");
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        if lo >= hi {
            bail!("--grid: need LO < HI for more than one sample, got {lo}:{hi}");
        }
        let step = (hi - lo) / (count - 1) as f64;
        Ok((0..count).map(|i| lo + step * i as f64).collect())
    };
    match flag {
        None => resolved
            .box_domain
            .bounds
            .iter()
            .zip(&resolved.box_domain.grid)
            .map(|(&(lo, hi), &g)| axis_values(lo, hi, g))
            .collect(),
        Some(spec) => {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != r {
                bail!(
                    "--grid: {} axis specs for {} space variables",
                    parts.len(),
                    r
                );
            }
            parts
                .iter()
                .map(|part| {
                    let fields: Vec<&str> = part.split(':').collect();
                    if fields.len() != 3 {
                        bail!("--grid: {part:?} is not LO:HI:COUNT");
                    }
                    let lo: f64 = fields[0]
                        .parse()
                        .with_context(|| format!("--grid: bad LO in {part:?}"))?;
                    let hi: f64 = fields[1]
                        .parse()
                        .with_context(|| format!("--grid: bad HI in {part:?}"))?;
                    let count: usize = fields[2]
                        .parse()
                        .with_context(|| format!("--grid: bad COUNT in {part:?}"))?;
                    if !lo.is_finite() || !hi.is_finite() {
                        bail!("--grid: bounds must be finite in {part:?}");
                    }
                    axis_values(lo, hi, count)
                })
                .collect()
        }
    }
}

fn cmd_sample(args: &SampleArgs) -> Result<bool> {
    let resolved = load_resolved(&args.common)?;
    let trajectory = evolve(
        &resolved.triple,
        &resolved.family,
        &resolved.grid,
        &resolved.tolerances,
    )?;
    let indices = snap_times(&trajectory, args.t.as_deref(), resolved.grid.t_end)?;
    let axes = space_grid(&resolved, args.grid.as_deref())?;
    let r = resolved.triple.r();

    let mut header = String::from("t");
    for k in 1..=r {
        write!(header, ",zeta_{k}").unwrap();
    }
    header.push_str(",row,col,re,im\n");
    let mut csv = header;

    // Time-major, then grid lexicographic, then component order.
    let mut omitted = 0usize;
    let mut point = vec![0.0f64; r];
    for &idx in &indices {
        let state = &trajectory.states()[idx];
        let mut counters = vec![0usize; r];
        'grid: loop {
            for k in 0..r {
                point[k] = axes[k][counters[k]];
            }
            match psi_tilde(&resolved.triple, state, &point, &resolved.tolerances) {
                Ok(sample) => {
                    let mut prefix = format!("{}", state.t);
                    for z in &point {
                        write!(prefix, ",{z}").unwrap();
                    }
                    push_matrix_rows(&mut csv, &prefix, &sample.psi);
                }
                Err(CoreError::SingularState { .. }) | Err(CoreError::Singular) => {
                    omitted += 1;
                }
                Err(e) => return Err(e.into()),
            }
            // Advance the least significant axis (the last one).
            for k in (0..r).rev() {
                counters[k] += 1;
                if counters[k] < axes[k].len() {
                    continue 'grid;
                }
                counters[k] = 0;
            }
            break;
        }
    }
    if omitted > 0 {
        writeln!(csv, "# omitted points (singular S): {omitted}").unwrap();
    }
    let path = output::write_atomic(&args.common.out, "psi.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(true)
}

fn cmd_verify(args: &CommonArgs) -> Result<bool> {
    let resolved = load_resolved(args)?;
    let mut report = darboux_core::run_suite(
        &resolved.triple,
        &resolved.family,
        &resolved.grid,
        &resolved.box_domain,
        resolved.h_vector.as_ref(),
        resolved.seed,
        &resolved.tolerances,
    )?;
    report.scenario_digest = resolved.digest.clone();
    for line in report.summary_lines() {
        println!("{line}");
    }
    let json = serde_json::to_string_pretty(&report).context("serializing report")?;
    let path = output::write_atomic(&args.out, "report.json", &json)?;
    println!("wrote {}", path.display());
    Ok(report.passed())
}
