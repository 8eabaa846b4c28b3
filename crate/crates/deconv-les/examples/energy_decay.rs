//! Unforced decay: with the wind switched off, every model dissipates the
//! kinetic energy of a random divergence-free initial state monotonically.

use deconv_les::diag::kinetic_energy;
use deconv_les::field::{Loc, ScalarField};
use deconv_les::scenario::SimSetup;
use deconv_les::solver::project;
use deconv_les::stepper::{step, SimState, StepContext};
use deconv_les::{DeconvParams, ModelKind, Scenario, VelocityField};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() -> deconv_les::Result<()> {
    let mut sc = Scenario::cavity();
    sc.nx = 48;
    sc.nz = 24;
    sc.wind.amplitude = 0.0;
    let setup = SimSetup::build(&sc)?;
    let grid = &setup.grid;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut v = VelocityField::zeros(grid.nx, grid.nz);
    for j in 0..grid.nz {
        for i in 0..=grid.nx {
            if grid.u_is_active(i, j) {
                v.u.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
    for j in 0..=grid.nz {
        for i in 0..grid.nx {
            if grid.w_is_active(i, j) {
                v.w.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
    }
    let (v0, _) = project(grid, &v, &sc.solver)?;

    let models = [
        ModelKind::Dns,
        ModelKind::LerayAlpha,
        ModelKind::Deconv(DeconvParams { tau: 5.0, dtau: 1.0 }),
    ];
    println!("48x24 box, no wind, dt = {}, 60 steps", sc.time.dt);
    println!("{:>6} {:>14} {:>14} {:>14}", "step", "dns", "leray", "deconv5");
    let mut states: Vec<SimState> = models
        .iter()
        .map(|_| SimState {
            t: 0.0,
            vel: v0.clone(),
            p: ScalarField::zeros(Loc::Center, grid.nx, grid.nz),
        })
        .collect();
    let ctx = StepContext {
        grid,
        psi: &setup.psi,
        bc: &setup.bc,
        fluid: sc.fluid,
        filter: sc.filter,
        solver: sc.solver,
        dt: sc.time.dt,
        forcing: None,
    };
    let mut prev: Vec<f64> = states.iter().map(|s| kinetic_energy(grid, &s.vel)).collect();
    for k in 0..60 {
        if k % 10 == 0 {
            println!("{k:>6} {:>14.6e} {:>14.6e} {:>14.6e}", prev[0], prev[1], prev[2]);
        }
        for (m, model) in models.iter().enumerate() {
            let r = step(&ctx, &states[m], *model)?;
            let e = kinetic_energy(grid, &r.state.vel);
            assert!(
                e <= prev[m] * (1.0 + 1e-12),
                "energy increased for {}",
                model.tag()
            );
            prev[m] = e;
            states[m] = r.state;
        }
    }
    println!("{:>6} {:>14.6e} {:>14.6e} {:>14.6e}", 60, prev[0], prev[1], prev[2]);
    println!("energy non-increasing at every step for every model");
    Ok(())
}
