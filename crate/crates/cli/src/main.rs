//! `nvk`: run the slab solver, the flow checks and the regularization ladder.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nvk_core::config::{RunConfig, CONFIG_SCHEMA};
use nvk_core::data::InitialData;
use nvk_core::diagnostics::{write_csv, Monitor};
use nvk_core::flowcheck::{run_flow_checks, to_csv, FlowCheckOptions, PrescribedField};
use nvk_core::io::{write_profile, write_snapshot};
use nvk_core::kinetic::Simulation;
use nvk_core::ladder::run_ladder;
use nvk_core::Error;

#[derive(Parser)]
#[command(name = "nvk", version, about = "Slab Nordström-Vlasov particle solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 1 gives bitwise reproducible output
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output directory (defaults to `output_dir` from the config)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the coupled system and check every monitor
    Run {
        #[command(flatten)]
        common: Common,
        /// Write a snapshot every K steps (0 = final state only)
        #[arg(long)]
        snapshot_stride: Option<usize>,
    },
    /// Check the 3D characteristic flow against its closed-form identities
    VerifyFlow {
        /// `all`, `none`, or a comma-separated list of catalog names
        #[arg(long, default_value = "all")]
        fields: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, hide = true, default_value_t = 3.0)]
        jacobian_exponent: f64,
    },
    /// Run the mollified system for several regularization indices and compare neighbours
    Ladder {
        #[command(flatten)]
        common: Common,
        /// Regularization indices, e.g. 4,8,16,32
        #[arg(long = "n", value_delimiter = ',', default_value = "4,8,16,32")]
        n: Vec<u32>,
    },
    /// Print every configuration key with its default
    PrintConfigSchema,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    /// Bad input: exit 2.
    Input(String),
    /// A check or the run itself failed: exit 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::InvalidExponents { .. }
            | Error::LadderTooShort(_)
            | Error::KernelWiderThanDomain { .. } => Failure::Input(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Check(format!("i/o: {e}"))
    }
}

fn load(path: &Path) -> Result<(RunConfig, InitialData), Failure> {
    let rc =
        RunConfig::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let data = rc.profile.build()?;
    Ok((rc, data))
}

fn out_dir(common: &Common, rc: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| rc.sim.output_dir.clone());
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_run(common: &Common, stride: Option<usize>) -> Result<bool, Failure> {
    let (mut rc, data) = load(&common.config)?;
    if let Some(k) = stride {
        rc.sim.snapshot_stride = k;
    }
    let threads = common.threads.max(1);
    let mut sim = Simulation::new(&rc.sim, &data, threads)?;
    let dir = out_dir(common, &rc)?;
    let grid = *sim.grid();
    let stride = rc.sim.snapshot_stride;
    let mut monitor = Monitor::new(sim.config(), sim.dt(), data.kinetic_radius, threads);
    println!(
        "run: {} particles, {} steps of dt = {:.6e}, nx = {}",
        sim.state().ensemble.len(),
        sim.steps(),
        sim.dt(),
        grid.nx
    );
    loop {
        let st = sim.state();
        monitor.record(st)?;
        if stride > 0 && st.step % stride == 0 {
            write_snapshot(
                &dir.join(format!("snapshot_{:06}.nvkn", st.step)),
                st,
                &grid,
            )?;
        }
        if sim.is_done() {
            break;
        }
        sim.advance()?;
    }
    let st = sim.state();
    if stride == 0 || st.step % stride != 0 {
        write_snapshot(
            &dir.join(format!("snapshot_{:06}.nvkn", st.step)),
            st,
            &grid,
        )?;
    }
    let mut csv = BufWriter::new(fs::File::create(dir.join("diagnostics.csv"))?);
    write_csv(&mut csv, monitor.casimir_specs(), monitor.rows())?;
    csv.flush()?;
    let mut prof = BufWriter::new(fs::File::create(dir.join("profile_final.csv"))?);
    write_profile(&mut prof, &grid, st)?;
    prof.flush()?;

    let summary = monitor.summary();
    println!("summary:");
    for c in &summary.checks {
        println!(
            "  {} {:<32} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    for w in &summary.warnings {
        println!("  warning: {w}");
    }
    println!("  phi_hom growth constant {:.4e}", summary.phi_hom_growth);
    Ok(summary.passed())
}

fn select_fields(spec: &str) -> Result<Vec<PrescribedField>, Failure> {
    match spec {
        "all" => Ok(PrescribedField::catalog()),
        "none" | "" => Ok(Vec::new()),
        list => list
            .split(',')
            .map(|name| {
                PrescribedField::from_name(name.trim())
                    .ok_or_else(|| Failure::Input(format!("unknown field {name:?}")))
            })
            .collect(),
    }
}

fn cmd_verify_flow(fields: &str, out: &Path, exponent: f64) -> Result<bool, Failure> {
    let opts = FlowCheckOptions {
        fields: select_fields(fields)?,
        jacobian_exponent: exponent,
        ..FlowCheckOptions::default()
    };
    let rows = run_flow_checks(&opts)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("flowcheck.csv"), to_csv(&rows))?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = |check: &str| {
        rows.iter()
            .filter(|r| r.check == check)
            .map(|r| r.rel_err)
            .fold(0.0f64, f64::max)
    };
    for check in ["jacobian", "representation", "liouville"] {
        println!("{check:<15} worst relative error {:.3e}", worst(check));
    }
    println!("{} rows, {failed} failed", rows.len());
    Ok(failed == 0)
}

fn cmd_ladder(common: &Common, n: &[u32]) -> Result<bool, Failure> {
    let (rc, data) = load(&common.config)?;
    if n.len() >= 2 && (n[0] == 0 || n.windows(2).any(|w| w[1] <= w[0])) {
        return Err(Failure::Input(format!(
            "--n must be positive and strictly increasing, got {n:?}"
        )));
    }
    let report = run_ladder(&rc.sim, &data, n, common.threads.max(1))?;
    let dir = out_dir(common, &rc)?;
    fs::write(dir.join("ladder_pairs.csv"), report.pairs_csv())?;
    fs::write(dir.join("ladder_rungs.csv"), report.rungs_csv())?;
    fs::write(
        dir.join("ladder_mu_l2.dat"),
        report.metric_series(|m| m.mu_l2),
    )?;
    fs::write(
        dir.join("ladder_phi_l2.dat"),
        report.metric_series(|m| m.phi_l2),
    )?;
    fs::write(
        dir.join("ladder_exp_phi_l4.dat"),
        report.metric_series(|m| m.exp_phi_l4),
    )?;
    println!("Cauchy differences of consecutive rungs (not weak limits):");
    for line in report.summary_lines() {
        println!("  {line}");
    }
    Ok(report.passed())
}

fn print_schema() {
    let mut out = std::io::stdout().lock();
    for (key, default, doc) in CONFIG_SCHEMA {
        // a closed pipe just ends the listing
        if writeln!(out, "{key:<26} {default:<16} {doc}").is_err() {
            return;
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            common,
            snapshot_stride,
        } => cmd_run(common, *snapshot_stride),
        Command::VerifyFlow {
            fields,
            out,
            jacobian_exponent,
        } => cmd_verify_flow(fields, out, *jacobian_exponent),
        Command::Ladder { common, n } => cmd_ladder(common, n),
        Command::PrintConfigSchema => {
            print_schema();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
