//! Wind-driven cavity at reduced resolution: run the DNS reference and the
//! three closures, then report each model's space-time L2 deviation from the
//! DNS trajectory. The deviation should shrink as the deconvolution horizon
//! tau grows.
//!
//! Usage: cargo run --example cavity_compare [-- nx nz t_end]

use deconv_les::diag::l2_relative_error;
use deconv_les::scenario::{run_model, SimSetup};
use deconv_les::stepper::TimeParams;
use deconv_les::Scenario;

fn main() -> deconv_les::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nx: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(48);
    let nz: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(24);
    let t_end: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10.0);

    let mut sc = Scenario::cavity();
    sc.nx = nx;
    sc.nz = nz;
    sc.time = TimeParams { dt: 0.2, t_end };
    sc.output_every = 1;
    let setup = SimSetup::build(&sc)?;
    println!(
        "cavity {nx}x{nz}, dt = {}, {} steps, alpha = {}",
        sc.time.dt,
        sc.time.n_steps(),
        sc.filter.alpha
    );

    let mut series = Vec::new();
    for &model in &sc.models {
        let start = std::time::Instant::now();
        let run = run_model(&sc, &setup, model)?;
        let vels: Vec<_> = run
            .snapshots
            .iter()
            .skip(1) // all models share the initial state
            .map(|s| s.state.vel.clone())
            .collect();
        println!(
            "  {:10} final energy {:.6e}  ({:.1?})",
            model.tag(),
            run.energy.last().unwrap().1,
            start.elapsed()
        );
        series.push((model, vels));
    }

    let (_, dns) = &series[0];
    println!("deviation from the DNS trajectory:");
    for (model, vels) in &series[1..] {
        let err = l2_relative_error(&setup.grid, vels, dns)?;
        println!("  {:10} {err:.4}%", model.tag());
    }
    Ok(())
}
