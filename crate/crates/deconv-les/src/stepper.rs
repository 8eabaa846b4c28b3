//! Semi-implicit time integration: semi-Lagrangian advection by the model's
//! transport velocity, implicit diffusion carrying the wind-stress Neumann
//! condition, and an incremental pressure projection.

use crate::error::Result;
use crate::field::VelocityField;
use crate::filter::{transport_velocity, FilterParams, ModelKind};
use crate::grid::Grid;
use crate::solver::{project, solve_helmholtz, Component, SolverParams, UBc};
use crate::wind::{LiftField, WindStress};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParams {
    /// Kinematic viscosity (m^2/s).
    pub nu: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        FluidParams { nu: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeParams {
    pub dt: f64,
    pub t_end: f64,
}

impl TimeParams {
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Condition on one lateral (open or closed) boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LateralBc {
    NoSlip,
    /// Parabolic inflow/outflow profile vanishing at z = -h and z = 0,
    /// peaking at `amplitude` mid-depth.
    Poiseuille { amplitude: f64 },
}

impl LateralBc {
    pub fn profile(&self, z: f64, h: f64) -> f64 {
        match self {
            LateralBc::NoSlip => 0.0,
            LateralBc::Poiseuille { amplitude } => 4.0 * amplitude * (z + h) * (-z) / (h * h),
        }
    }
}

/// Scenario-level boundary conditions.
#[derive(Clone, Debug)]
pub struct FlowBc {
    pub wind: Option<WindStress>,
    pub left: LateralBc,
    pub right: LateralBc,
}

impl FlowBc {
    pub fn closed() -> Self {
        FlowBc {
            wind: None,
            left: LateralBc::NoSlip,
            right: LateralBc::NoSlip,
        }
    }
}

/// Boundary data sampled onto the grid: the momentum solve carries the wind
/// slope, the filter solves carry the same Dirichlet traces but zero slope.
#[derive(Clone, Debug)]
pub struct SampledBc {
    pub flow: UBc,
    pub filter: UBc,
}

impl SampledBc {
    pub fn build(grid: &Grid, bc: &FlowBc) -> SampledBc {
        let mut flow = UBc::homogeneous(grid);
        for j in 0..grid.nz {
            let z = grid.z_of_urow(j);
            flow.left[j] = bc.left.profile(z, grid.h);
            flow.right[j] = bc.right.profile(z, grid.h);
        }
        let mut filter = flow.clone();
        if let Some(w) = &bc.wind {
            for i in 0..=grid.nx {
                flow.surface_slope[i] = w.eval(grid.x_of_uface(i), grid.lx);
            }
        }
        filter.surface_slope.iter_mut().for_each(|s| *s = 0.0);
        SampledBc { flow, filter }
    }

    /// Write the prescribed lateral values into a velocity field.
    pub fn apply_dirichlet(&self, grid: &Grid, v: &mut VelocityField) {
        for j in 0..grid.nz {
            v.u.set(0, j, self.flow.left[j]);
            v.u.set(grid.nx, j, self.flow.right[j]);
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub vel: VelocityField,
    pub p: crate::field::ScalarField,
}

impl SimState {
    pub fn resting(grid: &Grid) -> SimState {
        SimState {
            t: 0.0,
            vel: VelocityField::zeros(grid.nx, grid.nz),
            p: crate::field::ScalarField::zeros(crate::field::Loc::Center, grid.nx, grid.nz),
        }
    }
}

/// Everything a time step needs besides the state itself.
pub struct StepContext<'a> {
    pub grid: &'a Grid,
    pub psi: &'a LiftField,
    pub bc: &'a SampledBc,
    pub fluid: FluidParams,
    pub filter: FilterParams,
    pub solver: SolverParams,
    pub dt: f64,
    pub forcing: Option<&'a dyn Fn(f64) -> VelocityField>,
}

pub struct StepResult {
    pub state: SimState,
    /// Transport velocity used for the step (for diagnostics).
    pub wstar: VelocityField,
}

/// Backward foot of the characteristic through `point`, two-stage midpoint.
pub fn trace_characteristic(
    grid: &Grid,
    point: (f64, f64),
    wstar: &VelocityField,
    dt: f64,
) -> (f64, f64) {
    let (x, z) = grid.clamp_to_fluid(point.0, point.1);
    let (u1, w1) = grid.interpolate_velocity(wstar, x, z);
    let mid = grid.clamp_to_fluid(x - 0.5 * dt * u1, z - 0.5 * dt * w1);
    let (u2, w2) = grid.interpolate_velocity(wstar, mid.0, mid.1);
    grid.clamp_to_fluid(x - dt * u2, z - dt * w2)
}

/// Semi-Lagrangian transport of each staggered component: sample the field
/// at the upstream foot. Boundary and solid faces keep their values.
pub fn advect(grid: &Grid, field: &VelocityField, wstar: &VelocityField, dt: f64) -> VelocityField {
    let mut out = field.clone();
    for j in 0..grid.nz {
        for i in 0..=grid.nx {
            if grid.u_is_active(i, j) {
                let p = (grid.x_of_uface(i), grid.z_of_urow(j));
                let foot = trace_characteristic(grid, p, wstar, dt);
                let (u, _) = grid.interpolate_velocity(field, foot.0, foot.1);
                out.u.set(i, j, u);
            }
        }
    }
    for j in 0..=grid.nz {
        for i in 0..grid.nx {
            if grid.w_is_active(i, j) {
                let p = (grid.x_of_center(i), grid.z_of_wface(j));
                let foot = trace_characteristic(grid, p, wstar, dt);
                let (_, w) = grid.interpolate_velocity(field, foot.0, foot.1);
                out.w.set(i, j, w);
            }
        }
    }
    out
}

/// Implicit diffusion with the wind-stress Neumann surface condition and
/// prescribed lateral values, followed by the projection. Returns the end-of-
/// step velocity and pressure.
pub fn diffuse_and_project(
    grid: &Grid,
    v_tilde: &VelocityField,
    dt: f64,
    fluid: FluidParams,
    bc: &SampledBc,
    forcing: Option<&VelocityField>,
    sp: &SolverParams,
) -> Result<(VelocityField, crate::field::ScalarField)> {
    let a = 1.0 / dt;
    let mut rhs_u = v_tilde.u.clone();
    rhs_u.scale(a);
    let mut rhs_w = v_tilde.w.clone();
    rhs_w.scale(a);
    if let Some(f) = forcing {
        rhs_u.axpy(1.0, &f.u)?;
        rhs_w.axpy(1.0, &f.w)?;
    }
    let us = solve_helmholtz(grid, a, fluid.nu, &rhs_u, Component::U, Some(&bc.flow), sp)?;
    let ws = solve_helmholtz(grid, a, fluid.nu, &rhs_w, Component::W, None, sp)?;
    let (vel, mut q) = project(grid, &VelocityField { u: us, w: ws }, sp)?;
    q.scale(a); // pressure of the incremental scheme
    Ok((vel, q))
}

/// Advance one time step: transport velocity from the closure, advect,
/// diffuse, project.
pub fn step(ctx: &StepContext, state: &SimState, model: ModelKind) -> Result<StepResult> {
    let wstar = transport_velocity(
        ctx.grid,
        &state.vel,
        model,
        ctx.psi,
        &ctx.bc.filter,
        &ctx.filter,
        &ctx.solver,
    )?;
    let v_tilde = advect(ctx.grid, &state.vel, &wstar, ctx.dt);
    let t_next = state.t + ctx.dt;
    let f = ctx.forcing.map(|f| f(t_next));
    let (vel, p) = diffuse_and_project(
        ctx.grid,
        &v_tilde,
        ctx.dt,
        ctx.fluid,
        ctx.bc,
        f.as_ref(),
        &ctx.solver,
    )?;
    Ok(StepResult {
        state: SimState { t: t_next, vel, p },
        wstar,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesInitParams {
    /// Pseudo-time step of the relaxation towards the steady Stokes state.
    pub dt: f64,
    /// Stop when the max-norm step-to-step change falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StokesInitParams {
    fn default() -> Self {
        StokesInitParams {
            dt: 10.0,
            tol: 1e-8,
            max_iter: 20000,
        }
    }
}

/// Initial condition: relax the advection-free (Stokes) problem to a steady
/// state under the scenario's boundary conditions and forcing.
pub fn stokes_init(
    grid: &Grid,
    bc: &SampledBc,
    fluid: FluidParams,
    forcing: Option<&VelocityField>,
    sp: &SolverParams,
    init: &StokesInitParams,
) -> Result<SimState> {
    let mut vel = VelocityField::zeros(grid.nx, grid.nz);
    bc.apply_dirichlet(grid, &mut vel);
    let mut p = crate::field::ScalarField::zeros(crate::field::Loc::Center, grid.nx, grid.nz);
    for it in 0..init.max_iter {
        let (next, q) = diffuse_and_project(grid, &vel, init.dt, fluid, bc, forcing, sp)?;
        let mut diff = next.clone();
        diff.axpy(-1.0, &vel)?;
        let change = diff.norm_inf();
        vel = next;
        p = q;
        if change <= init.tol {
            return Ok(SimState { t: 0.0, vel, p });
        }
        if it + 1 == init.max_iter {
            eprintln!(
                "stokes init: stopping at {} iterations with change {change:.3e}",
                init.max_iter
            );
        }
    }
    Ok(SimState { t: 0.0, vel, p })
}
