//! Thin command-line front end over the library: run simulations, print the
//! spectral oracle table, compare stored runs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use deconv_les::diag::l2_relative_error;
use deconv_les::output::{read_fields_csv, write_manifest, write_run_outputs};
use deconv_les::scenario::{parse_model, run_model, SimSetup};
use deconv_les::{oracle, DeconvParams, Grid, GridSpec, ModelKind, Scenario, SolverParams};

#[derive(Parser)]
#[command(name = "deconv-les", about = "Wind-driven 2D flow with deconvolution closures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the models of a configured scenario and write their outputs.
    Simulate(SimulateArgs),
    /// Print the filter/deconvolution transfer-coefficient table as CSV.
    Oracle(OracleArgs),
    /// Compare stored runs against the first one (the reference).
    Compare(CompareArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML scenario configuration.
    #[arg(long)]
    config: PathBuf,
    /// Run a single model (dns, leray, deconv:TAU) instead of the
    /// configured list.
    #[arg(long)]
    model: Option<String>,
    /// Shorthand for `--model deconv:TAU`.
    #[arg(long)]
    tau: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Filter length scale.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Deconvolution pseudo-time horizon.
    #[arg(long, default_value_t = 5.0)]
    tau: f64,
    /// Pseudo-time step.
    #[arg(long, default_value_t = 1.0)]
    dtau: f64,
    /// Number of modes reported.
    #[arg(long, default_value_t = 8)]
    modes: usize,
    /// Grid resolution of the one-dimensional oracle.
    #[arg(long, default_value_t = 64)]
    n: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Run directories, each holding a fields.csv; the first is the
    /// reference.
    #[arg(long, num_args = 2.., required = true)]
    runs: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Oracle(a) => oracle_cmd(a),
        Cmd::Compare(a) => compare(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn simulate(a: SimulateArgs) -> deconv_les::Result<()> {
    let mut sc = Scenario::from_config_file(&a.config)?;
    if let Some(tau) = a.tau {
        let p = DeconvParams { tau, dtau: sc.dtau };
        p.validate()?;
        sc.models = vec![ModelKind::Deconv(p)];
    } else if let Some(m) = &a.model {
        sc.models = vec![parse_model(m, sc.dtau)?];
    }
    sc.validate()?;
    let setup = SimSetup::build(&sc)?;
    write_manifest(&a.out.join("manifest.toml"), &sc, false)?;
    for &model in &sc.models.clone() {
        let run = run_model(&sc, &setup, model)?;
        write_run_outputs(&a.out, &sc, &setup.grid, &run)?;
        let (t, e) = *run.energy.last().expect("at least the initial state");
        println!(
            "{}: {} steps to t = {t}, kinetic energy {e:.6e}",
            model.tag(),
            sc.time.n_steps()
        );
    }
    write_manifest(&a.out.join("manifest.toml"), &sc, true)?;
    Ok(())
}

fn oracle_cmd(a: OracleArgs) -> deconv_les::Result<()> {
    let table = oracle::oracle_table(
        a.n,
        a.alpha,
        a.tau,
        a.dtau,
        a.modes,
        &SolverParams::default(),
    )?;
    print!("{table}");
    Ok(())
}

fn compare(a: CompareArgs) -> deconv_les::Result<()> {
    let reference = read_fields_csv(&a.runs[0].join("fields.csv"))?;
    // the relative error is a ratio of norms, so the physical extents drop
    // out; a unit box with the stored resolution carries the weights
    let grid = Grid::build(&GridSpec::rectangle(reference.nx, reference.nz, 1.0, 1.0))?;
    println!("reference: {}", a.runs[0].display());
    for dir in &a.runs[1..] {
        let series = read_fields_csv(&dir.join("fields.csv"))?;
        if series.nx != reference.nx || series.nz != reference.nz {
            return Err(deconv_les::Error::Shape(format!(
                "{}: resolution {}x{} does not match the reference {}x{}",
                dir.display(),
                series.nx,
                series.nz,
                reference.nx,
                reference.nz
            )));
        }
        if series.times != reference.times {
            return Err(deconv_les::Error::Shape(format!(
                "{}: snapshot times do not match the reference",
                dir.display()
            )));
        }
        let err = l2_relative_error(&grid, &series.velocities, &reference.velocities)?;
        println!("{}: {err:.4}% relative L2 deviation", dir.display());
    }
    Ok(())
}
