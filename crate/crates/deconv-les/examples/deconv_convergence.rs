//! Convergence of the transport velocity to the raw velocity as the
//! deconvolution horizon tau grows: H_0 is the Leray-alpha filtered field,
//! and ||H_tau(v) - v|| decays towards zero.

use deconv_les::filter::transport_velocity;
use deconv_les::solver::project;
use deconv_les::stepper::{FlowBc, SampledBc};
use deconv_les::{
    build_grid, build_psi, DeconvParams, FilterParams, GridSpec, ModelKind, SolverParams,
    VelocityField, WindStress,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() -> deconv_les::Result<()> {
    let grid = build_grid(&GridSpec::rectangle(48, 24, 1.0, 0.5))?;
    let wind = WindStress::default();
    let psi = build_psi(&wind, &grid)?;
    let bc = SampledBc::build(
        &grid,
        &FlowBc {
            wind: Some(wind),
            ..FlowBc::closed()
        },
    );
    let fp = FilterParams { alpha: 0.1 };
    let sp = SolverParams::default();

    // random divergence-free test field
    let mut rng = ChaCha8Rng::seed_from_u64(11);
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
    let (v, _) = project(&grid, &v, &sp)?;
    let vnorm = grid.weighted_norm2(&v);

    println!("alpha = {}, random divergence-free v, ||v|| = {vnorm:.4}", fp.alpha);
    println!("{:>8} {:>16}", "tau", "||H_tau(v)-v||/||v||");
    for tau in [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0] {
        let model = if tau == 0.0 {
            ModelKind::LerayAlpha
        } else {
            ModelKind::Deconv(DeconvParams { tau, dtau: 1.0 })
        };
        let h = transport_velocity(&grid, &v, model, &psi, &bc.filter, &fp, &sp)?;
        let mut diff = h;
        diff.axpy(-1.0, &v)?;
        println!("{tau:>8} {:>16.6e}", grid.weighted_norm2(&diff) / vnorm);
    }
    Ok(())
}
