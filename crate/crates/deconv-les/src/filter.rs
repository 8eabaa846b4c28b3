//! Helmholtz filtration and the pseudo-time deconvolution evolution that
//! together produce the transport velocity of the LES model.
//!
//! The filter solves `(I - alpha^2 Lap) vhat + grad r = v - psi` with
//! homogeneous mixed boundary conditions, realized here as componentwise
//! Helmholtz solves followed by a projection. Deconvolution advances
//! `-alpha^2 Lap dphi/dtau + phi + grad pi = v - psi` implicitly; one step of
//! size dtau = 1 is exactly one Van Cittert update.

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::grid::Grid;
use crate::solver::{solve_helmholtz, Component, SolverParams, UBc};
use crate::wind::LiftField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterParams {
    /// Filter radius alpha (m).
    pub alpha: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams { alpha: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeconvParams {
    /// Deconvolution parameter tau >= 0.
    pub tau: f64,
    /// Pseudo-time step dtau > 0.
    pub dtau: f64,
}

impl Default for DeconvParams {
    fn default() -> Self {
        DeconvParams { tau: 5.0, dtau: 1.0 }
    }
}

impl DeconvParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau < 0.0 {
            return Err(Error::Param("tau must be >= 0".into()));
        }
        if !(self.dtau > 0.0) {
            return Err(Error::Param("dtau must be > 0".into()));
        }
        Ok(())
    }

    /// Number of pseudo-time steps, `round(tau / dtau)`.
    pub fn n_steps(&self) -> usize {
        (self.tau / self.dtau).round() as usize
    }
}

/// Transport-velocity closure selector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    Dns,
    LerayAlpha,
    Deconv(DeconvParams),
}

impl ModelKind {
    pub fn tag(&self) -> String {
        match self {
            ModelKind::Dns => "dns".into(),
            ModelKind::LerayAlpha => "leray".into(),
            ModelKind::Deconv(d) => format!("deconv{}", d.tau),
        }
    }
}

/// Apply the Helmholtz filter; returns the homogeneous part `vhat` (the full
/// filtered field is `vhat + psi`). `lateral_u` carries the prescribed
/// lateral u values of the flow (zero in the cavity case) with zero surface
/// slope, so the filtered field keeps the same Dirichlet traces as `v`.
pub fn helmholtz_filter(
    grid: &Grid,
    v: &VelocityField,
    psi: &LiftField,
    lateral_u: &UBc,
    fp: &FilterParams,
    sp: &SolverParams,
) -> Result<VelocityField> {
    let b = fp.alpha * fp.alpha;
    let mut rhs_u = v.u.clone();
    rhs_u.axpy(-1.0, &psi.vel.u)?;
    let mut rhs_w = v.w.clone();
    rhs_w.axpy(-1.0, &psi.vel.w)?;
    let xu = solve_helmholtz(grid, 1.0, b, &rhs_u, Component::U, Some(lateral_u), sp)?;
    let xw = solve_helmholtz(grid, 1.0, b, &rhs_w, Component::W, None, sp)?;
    let (out, _r) = crate::solver::project(grid, &VelocityField { u: xu, w: xw }, sp)?;
    Ok(out)
}

/// One implicit pseudo-time step: solve `(dtau I - alpha^2 Lap) delta =
/// dtau (u_hat - phi)` with homogeneous boundary conditions, project, and
/// return `phi + delta`.
pub fn deconv_step(
    grid: &Grid,
    phi: &VelocityField,
    u_hat: &VelocityField,
    fp: &FilterParams,
    dtau: f64,
    sp: &SolverParams,
) -> Result<VelocityField> {
    let b = fp.alpha * fp.alpha;
    let ubc = UBc::homogeneous(grid);
    let mut rhs_u = u_hat.u.clone();
    rhs_u.axpy(-1.0, &phi.u)?;
    rhs_u.scale(dtau);
    let mut rhs_w = u_hat.w.clone();
    rhs_w.axpy(-1.0, &phi.w)?;
    rhs_w.scale(dtau);
    let du = solve_helmholtz(grid, dtau, b, &rhs_u, Component::U, Some(&ubc), sp)?;
    let dw = solve_helmholtz(grid, dtau, b, &rhs_w, Component::W, None, sp)?;
    let (delta, _pi) = crate::solver::project(grid, &VelocityField { u: du, w: dw }, sp)?;
    let mut out = phi.clone();
    out.axpy(1.0, &delta)?;
    Ok(out)
}

/// The transport velocity `H_tau(v)` of the chosen model: `v` itself for
/// DNS, the filtered velocity for Leray-alpha, and the deconvolved field for
/// the deconvolution model. The tau = 0 deconvolution path takes exactly the
/// Leray-alpha route.
pub fn transport_velocity(
    grid: &Grid,
    v: &VelocityField,
    model: ModelKind,
    psi: &LiftField,
    lateral_u: &UBc,
    fp: &FilterParams,
    sp: &SolverParams,
) -> Result<VelocityField> {
    let deconv = match model {
        ModelKind::Dns => return Ok(v.clone()),
        ModelKind::LerayAlpha => DeconvParams { tau: 0.0, dtau: 1.0 },
        ModelKind::Deconv(d) => {
            d.validate()?;
            d
        }
    };
    let mut phi = helmholtz_filter(grid, v, psi, lateral_u, fp, sp)?;
    if deconv.n_steps() > 0 {
        let mut u_hat = v.clone();
        u_hat.axpy(-1.0, &psi.vel)?;
        for _ in 0..deconv.n_steps() {
            phi = deconv_step(grid, &phi, &u_hat, fp, deconv.dtau, sp)?;
        }
    }
    phi.axpy(1.0, &psi.vel)?;
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VelocityField;
    use crate::grid::{Grid, GridSpec};
    use crate::solver::project;
    use crate::wind::{build_psi, LiftField, WindStress};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_grid(nx: usize, nz: usize) -> Grid {
        Grid::build(&GridSpec::rectangle(nx, nz, 1.0, 0.5)).unwrap()
    }

    fn params() -> SolverParams {
        SolverParams {
            rel_tol: 1e-12,
            max_iter: 50000,
        }
    }

    fn random_div_free(grid: &Grid, seed: u64) -> VelocityField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
        let (p, _) = project(grid, &v, &params()).unwrap();
        p
    }

    #[test]
    fn alpha_zero_filter_is_projection_of_residual() {
        let g = unit_grid(8, 8);
        let psi = build_psi(&WindStress::default(), &g).unwrap();
        let v = random_div_free(&g, 2);
        let ubc = UBc::homogeneous(&g);
        let fp = FilterParams { alpha: 0.0 };
        let hat = helmholtz_filter(&g, &v, &psi, &ubc, &fp, &params()).unwrap();
        let mut resid = v.clone();
        resid.axpy(-1.0, &psi.vel).unwrap();
        let (expect, _) = project(&g, &resid, &params()).unwrap();
        let mut diff = hat;
        diff.axpy(-1.0, &expect).unwrap();
        assert!(diff.norm_inf() < 1e-11);
    }

    #[test]
    fn filtering_psi_itself_gives_zero() {
        let g = unit_grid(8, 8);
        let psi = build_psi(&WindStress::default(), &g).unwrap();
        let ubc = UBc::homogeneous(&g);
        let hat = helmholtz_filter(
            &g,
            &psi.vel.clone(),
            &psi,
            &ubc,
            &FilterParams::default(),
            &params(),
        )
        .unwrap();
        assert_eq!(hat.norm_inf(), 0.0);
    }

    #[test]
    fn deconv_fixed_point() {
        let g = unit_grid(8, 8);
        let v = random_div_free(&g, 3);
        let out = deconv_step(&g, &v, &v, &FilterParams::default(), 1.0, &params()).unwrap();
        let mut diff = out;
        diff.axpy(-1.0, &v).unwrap();
        assert!(diff.norm_inf() < 1e-12);
    }

    #[test]
    fn dns_transport_is_identity() {
        let g = unit_grid(8, 8);
        let v = random_div_free(&g, 4);
        let psi = LiftField::zero(&g);
        let ubc = UBc::homogeneous(&g);
        let h = transport_velocity(
            &g,
            &v,
            ModelKind::Dns,
            &psi,
            &ubc,
            &FilterParams::default(),
            &params(),
        )
        .unwrap();
        assert_eq!(h, v);
    }

    #[test]
    fn deconv_zero_matches_leray_bitwise() {
        let g = unit_grid(8, 8);
        let psi = build_psi(&WindStress::default(), &g).unwrap();
        let v = random_div_free(&g, 5);
        let ubc = UBc::homogeneous(&g);
        let fp = FilterParams::default();
        let a = transport_velocity(&g, &v, ModelKind::LerayAlpha, &psi, &ubc, &fp, &params())
            .unwrap();
        let b = transport_velocity(
            &g,
            &v,
            ModelKind::Deconv(DeconvParams { tau: 0.0, dtau: 1.0 }),
            &psi,
            &ubc,
            &fp,
            &params(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transport_is_linear_when_psi_is_zero() {
        let g = unit_grid(8, 8);
        let psi = LiftField::zero(&g);
        let ubc = UBc::homogeneous(&g);
        let fp = FilterParams::default();
        let model = ModelKind::Deconv(DeconvParams { tau: 3.0, dtau: 1.0 });
        let va = random_div_free(&g, 6);
        let vb = random_div_free(&g, 7);
        let mut comb = va.clone();
        comb.scale(2.0);
        comb.axpy(-0.5, &vb).unwrap();
        let hc = transport_velocity(&g, &comb, model, &psi, &ubc, &fp, &params()).unwrap();
        let ha = transport_velocity(&g, &va, model, &psi, &ubc, &fp, &params()).unwrap();
        let hb = transport_velocity(&g, &vb, model, &psi, &ubc, &fp, &params()).unwrap();
        let mut lhs = hc;
        lhs.axpy(-2.0, &ha).unwrap();
        lhs.axpy(0.5, &hb).unwrap();
        assert!(lhs.norm_inf() < 1e-10, "{}", lhs.norm_inf());
    }

    #[test]
    fn distance_to_identity_shrinks_with_more_steps() {
        let g = unit_grid(12, 12);
        let psi = LiftField::zero(&g);
        let ubc = UBc::homogeneous(&g);
        let fp = FilterParams::default();
        let v = random_div_free(&g, 8);
        let mut prev = f64::INFINITY;
        for tau in [0.0, 1.0, 2.0, 5.0, 10.0] {
            let h = transport_velocity(
                &g,
                &v,
                ModelKind::Deconv(DeconvParams { tau, dtau: 1.0 }),
                &psi,
                &ubc,
                &fp,
                &params(),
            )
            .unwrap();
            let mut d = h;
            d.axpy(-1.0, &v).unwrap();
            let dist = d.norm2();
            assert!(dist <= prev + 1e-12, "tau={tau}: {dist} > {prev}");
            prev = dist;
        }
    }

    #[test]
    fn transport_output_is_divergence_free_with_clean_traces() {
        let g = unit_grid(10, 10);
        let psi = build_psi(&WindStress::default(), &g).unwrap();
        let ubc = UBc::homogeneous(&g);
        let fp = FilterParams::default();
        let v = random_div_free(&g, 9);
        let h = transport_velocity(
            &g,
            &v,
            ModelKind::Deconv(DeconvParams { tau: 5.0, dtau: 1.0 }),
            &psi,
            &ubc,
            &fp,
            &params(),
        )
        .unwrap();
        // divergence-free up to the lifting field's truncation-level divergence
        let psi_div = g.divergence(&psi.vel).norm_inf();
        assert!(g.divergence(&h).norm_inf() <= psi_div + 1e-9);
        for i in 0..g.nx {
            assert_eq!(h.w.at(i, 0), 0.0);
            assert_eq!(h.w.at(i, g.nz), 0.0);
        }
        for j in 0..g.nz {
            assert_eq!(h.u.at(0, j), 0.0);
            assert_eq!(h.u.at(g.nx, j), 0.0);
        }
    }

    #[test]
    fn filter_is_self_adjoint_on_divergence_free_fields() {
        let g = unit_grid(8, 8);
        let psi = LiftField::zero(&g);
        let ubc = UBc::homogeneous(&g);
        let fp = FilterParams::default();
        let va = random_div_free(&g, 10);
        let vb = random_div_free(&g, 11);
        let ga = helmholtz_filter(&g, &va, &psi, &ubc, &fp, &params()).unwrap();
        let gb = helmholtz_filter(&g, &vb, &psi, &ubc, &fp, &params()).unwrap();
        let ip = |a: &VelocityField, b: &VelocityField| {
            a.u.data().iter().zip(b.u.data()).map(|(x, y)| x * y).sum::<f64>()
                + a.w.data().iter().zip(b.w.data()).map(|(x, y)| x * y).sum::<f64>()
        };
        let lhs = ip(&ga, &vb);
        let rhs = ip(&va, &gb);
        assert!(
            (lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0),
            "{lhs} vs {rhs}"
        );
    }

    #[test]
    fn rounding_of_noninteger_step_counts() {
        assert_eq!(DeconvParams { tau: 5.0, dtau: 0.5 }.n_steps(), 10);
        assert_eq!(DeconvParams { tau: 5.2, dtau: 1.0 }.n_steps(), 5);
        assert_eq!(DeconvParams { tau: 0.0, dtau: 1.0 }.n_steps(), 0);
        assert!(DeconvParams { tau: -1.0, dtau: 1.0 }.validate().is_err());
        assert!(DeconvParams { tau: 1.0, dtau: 0.0 }.validate().is_err());
    }
}
