//! Built-in scenarios, TOML configuration and the run driver.
//!
//! Two built-ins: the wind-driven cavity (closed box, surface stress) and a
//! channel with a Gaussian bathymetry bump and Poiseuille in/outflow. A TOML
//! config selects a base scenario and overrides any subset of its settings;
//! `Scenario::to_config_toml` emits a config that parses back to the same
//! scenario, which is what run manifests are made of.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::filter::{DeconvParams, FilterParams, ModelKind};
use crate::grid::{Grid, GridSpec};
use crate::solver::SolverParams;
use crate::stepper::{
    step, stokes_init, FlowBc, FluidParams, LateralBc, SampledBc, SimState, StepContext,
    StokesInitParams, TimeParams,
};
use crate::wind::{build_psi, LiftField, WindStress};

/// Gaussian stair-step bottom bump, all lengths relative to the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bathymetry {
    /// Peak height as a fraction of the depth h.
    pub height_frac: f64,
    /// Gaussian width as a fraction of the horizontal extent.
    pub sigma_frac: f64,
    /// Peak position as a fraction of the horizontal extent.
    pub center_frac: f64,
    /// Peak of the parabolic in/outflow profile.
    pub inflow_amplitude: f64,
}

impl Default for Bathymetry {
    fn default() -> Self {
        Bathymetry {
            height_frac: 0.4,
            sigma_frac: 0.15,
            center_frac: 0.5,
            inflow_amplitude: 1.0,
        }
    }
}

/// A fully specified experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub nx: usize,
    pub nz: usize,
    pub lx: f64,
    pub h: f64,
    /// Surface stress; amplitude 0 disables the wind.
    pub wind: WindStress,
    pub bathymetry: Option<Bathymetry>,
    pub fluid: FluidParams,
    pub time: TimeParams,
    pub filter: FilterParams,
    /// Pseudo-time step of the deconvolution iteration.
    pub dtau: f64,
    pub models: Vec<ModelKind>,
    pub solver: SolverParams,
    pub init: StokesInitParams,
    /// Keep one snapshot every this many steps.
    pub output_every: usize,
    /// Abscissa of the vertical diagnostic profile.
    pub profile_x: f64,
}

impl Scenario {
    /// Wind-driven cavity: closed box, stress bump on the surface.
    pub fn cavity() -> Scenario {
        Scenario {
            name: "cavity".into(),
            nx: 100,
            nz: 50,
            lx: 1.0,
            h: 0.5,
            wind: WindStress::default(),
            bathymetry: None,
            fluid: FluidParams { nu: 1e-3 },
            time: TimeParams { dt: 0.2, t_end: 90.0 },
            filter: FilterParams { alpha: 0.1 },
            dtau: 1.0,
            models: vec![
                ModelKind::Dns,
                ModelKind::LerayAlpha,
                ModelKind::Deconv(DeconvParams { tau: 5.0, dtau: 1.0 }),
                ModelKind::Deconv(DeconvParams { tau: 20.0, dtau: 1.0 }),
            ],
            solver: SolverParams::default(),
            init: StokesInitParams::default(),
            output_every: 10,
            profile_x: 0.5,
        }
    }

    /// Channel over a Gaussian bump with parabolic in/outflow, no wind.
    pub fn bathymetry() -> Scenario {
        Scenario {
            name: "bathymetry".into(),
            nx: 100,
            nz: 50,
            lx: 1.0,
            h: 0.5,
            wind: WindStress {
                amplitude: 0.0,
                ..WindStress::default()
            },
            bathymetry: Some(Bathymetry::default()),
            fluid: FluidParams { nu: 1e-3 },
            time: TimeParams { dt: 0.02, t_end: 10.0 },
            filter: FilterParams { alpha: 0.1 },
            dtau: 1.0,
            models: vec![
                ModelKind::Dns,
                ModelKind::LerayAlpha,
                ModelKind::Deconv(DeconvParams { tau: 5.0, dtau: 1.0 }),
            ],
            solver: SolverParams::default(),
            init: StokesInitParams::default(),
            output_every: 10,
            profile_x: 0.25,
        }
    }

    pub fn builtin(name: &str) -> Result<Scenario> {
        match name {
            "cavity" => Ok(Scenario::cavity()),
            "bathymetry" => Ok(Scenario::bathymetry()),
            other => Err(Error::Config(format!(
                "unknown scenario {other:?}; expected \"cavity\" or \"bathymetry\""
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time.dt > 0.0) || !(self.time.t_end > 0.0) {
            return Err(Error::Config("dt and t_end must be positive".into()));
        }
        if !(self.filter.alpha >= 0.0) {
            return Err(Error::Config("alpha must be >= 0".into()));
        }
        if !(self.dtau > 0.0) {
            return Err(Error::Config("dtau must be > 0".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        for m in &self.models {
            if let ModelKind::Deconv(p) = m {
                p.validate()?;
            }
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be >= 1".into()));
        }
        if !(self.profile_x > 0.0 && self.profile_x < self.lx) {
            return Err(Error::Config(format!(
                "profile_x = {} must lie inside (0, {})",
                self.profile_x, self.lx
            )));
        }
        self.solver.validate()?;
        if let Some(b) = &self.bathymetry {
            if !(0.0..1.0).contains(&b.height_frac)
                || !(b.sigma_frac > 0.0)
                || !(0.0..=1.0).contains(&b.center_frac)
            {
                return Err(Error::Config("bathymetry fractions out of range".into()));
            }
        }
        Ok(())
    }

    /// Grid specification including the stair-step solid mask, if any.
    pub fn grid_spec(&self) -> GridSpec {
        let mut spec = GridSpec::rectangle(self.nx, self.nz, self.lx, self.h);
        if let Some(b) = &self.bathymetry {
            let dz = self.h / self.nz as f64;
            let dx = self.lx / self.nx as f64;
            let sigma = b.sigma_frac * self.lx;
            let xc = b.center_frac * self.lx;
            let mut solid = vec![false; self.nx * self.nz];
            for i in 0..self.nx {
                let x = (i as f64 + 0.5) * dx;
                let height = b.height_frac * self.h * (-(x - xc).powi(2) / (2.0 * sigma * sigma)).exp();
                let rows = ((height / dz).floor() as usize).min(self.nz - 2);
                for j in 0..rows {
                    solid[j * self.nx + i] = true;
                }
            }
            spec.solid = solid;
        }
        spec
    }

    pub fn flow_bc(&self) -> FlowBc {
        let lateral = match &self.bathymetry {
            Some(b) => LateralBc::Poiseuille {
                amplitude: b.inflow_amplitude,
            },
            None => LateralBc::NoSlip,
        };
        FlowBc {
            wind: (self.wind.amplitude != 0.0).then_some(self.wind),
            left: lateral,
            right: lateral,
        }
    }
}

/// Grid, lifting field and sampled boundary data, built once per scenario.
pub struct SimSetup {
    pub grid: Grid,
    pub psi: LiftField,
    pub bc: SampledBc,
}

impl SimSetup {
    pub fn build(sc: &Scenario) -> Result<SimSetup> {
        sc.validate()?;
        let grid = Grid::build(&sc.grid_spec())?;
        let psi = if sc.wind.amplitude != 0.0 {
            build_psi(&sc.wind, &grid)?
        } else {
            LiftField::zero(&grid)
        };
        let bc = SampledBc::build(&grid, &sc.flow_bc());
        Ok(SimSetup { grid, psi, bc })
    }
}

/// One stored snapshot of a run.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub state: SimState,
}

/// Full outcome of running one model through a scenario.
pub struct RunResult {
    pub model: ModelKind,
    pub snapshots: Vec<Snapshot>,
    /// (t, kinetic energy) per step, including the initial state.
    pub energy: Vec<(f64, f64)>,
    /// (t, momentum residual) per step.
    pub residual: Vec<(f64, f64)>,
}

/// Run `model` through the scenario, calling `observe(step, state, wstar)`
/// after the initial state (step 0, zero transport) and after every step.
pub fn run_with(
    sc: &Scenario,
    setup: &SimSetup,
    model: ModelKind,
    observe: &mut dyn FnMut(usize, &SimState, &VelocityField) -> Result<()>,
) -> Result<SimState> {
    let init_forcing = None;
    let mut state = stokes_init(
        &setup.grid,
        &setup.bc,
        sc.fluid,
        init_forcing,
        &sc.solver,
        &sc.init,
    )?;
    let zero = VelocityField::zeros(setup.grid.nx, setup.grid.nz);
    observe(0, &state, &zero)?;
    let ctx = StepContext {
        grid: &setup.grid,
        psi: &setup.psi,
        bc: &setup.bc,
        fluid: sc.fluid,
        filter: sc.filter,
        solver: sc.solver,
        dt: sc.time.dt,
        forcing: None,
    };
    for k in 1..=sc.time.n_steps() {
        let r = step(&ctx, &state, model)?;
        if !r.state.vel.is_finite() {
            return Err(Error::Param(format!(
                "non-finite velocity at step {k} of model {}",
                model.tag()
            )));
        }
        observe(k, &r.state, &r.wstar)?;
        state = r.state;
    }
    Ok(state)
}

/// Run one model and collect snapshots, energy and residual histories.
pub fn run_model(sc: &Scenario, setup: &SimSetup, model: ModelKind) -> Result<RunResult> {
    let mut snapshots = Vec::new();
    let mut energy = Vec::new();
    let mut residual = Vec::new();
    let n_steps = sc.time.n_steps();
    let mut prev: Option<SimState> = None;
    run_with(sc, setup, model, &mut |k, state, wstar| {
        energy.push((state.t, crate::diag::kinetic_energy(&setup.grid, &state.vel)));
        if let Some(p) = &prev {
            let r = crate::diag::nse_residual(
                &setup.grid,
                &crate::diag::ResidualInput {
                    prev: &p.vel,
                    next: &state.vel,
                    wstar,
                    p: &state.p,
                    dt: sc.time.dt,
                    nu: sc.fluid.nu,
                    bc: &setup.bc.flow,
                    forcing: None,
                },
            )?;
            residual.push((state.t, r));
        }
        if k % sc.output_every == 0 || k == n_steps {
            snapshots.push(Snapshot {
                step: k,
                state: state.clone(),
            });
        }
        prev = Some(state.clone());
        Ok(())
    })?;
    Ok(RunResult {
        model,
        snapshots,
        energy,
        residual,
    })
}

/// Parse a model name: `dns`, `leray`, `deconv` or `deconv:TAU`.
pub fn parse_model(s: &str, dtau: f64) -> Result<ModelKind> {
    match s {
        "dns" => Ok(ModelKind::Dns),
        "leray" => Ok(ModelKind::LerayAlpha),
        "deconv" => Ok(ModelKind::Deconv(DeconvParams { tau: 5.0, dtau })),
        other => {
            if let Some(t) = other.strip_prefix("deconv:") {
                let tau: f64 = t
                    .parse()
                    .map_err(|_| Error::Config(format!("bad tau in model {other:?}")))?;
                let p = DeconvParams { tau, dtau };
                p.validate()?;
                Ok(ModelKind::Deconv(p))
            } else {
                Err(Error::Config(format!(
                    "unknown model {other:?}; expected dns, leray or deconv:TAU"
                )))
            }
        }
    }
}

fn model_config_name(m: &ModelKind) -> String {
    match m {
        ModelKind::Dns => "dns".into(),
        ModelKind::LerayAlpha => "leray".into(),
        ModelKind::Deconv(p) => format!("deconv:{}", p.tau),
    }
}

// --- TOML configuration -------------------------------------------------

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wind: Option<WindSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bathymetry: Option<BathySec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fluid: Option<FluidSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<TimeSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    models: Option<ModelsSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deconv: Option<DeconvSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<SolverSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    init: Option<InitSec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<OutputSec>,
    /// Informational section written into run manifests; ignored on parse.
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<toml::Table>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GridSec {
    nx: Option<usize>,
    nz: Option<usize>,
    lx: Option<f64>,
    h: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct WindSec {
    amplitude: Option<f64>,
    center: Option<f64>,
    half_width: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BathySec {
    enabled: Option<bool>,
    height_frac: Option<f64>,
    sigma_frac: Option<f64>,
    center_frac: Option<f64>,
    inflow_amplitude: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FluidSec {
    nu: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TimeSec {
    dt: Option<f64>,
    t_end: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ModelsSec {
    list: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DeconvSec {
    alpha: Option<f64>,
    dtau: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SolverSec {
    rel_tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct InitSec {
    dt: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct OutputSec {
    every: Option<usize>,
    profile_x: Option<f64>,
}

impl Scenario {
    /// Parse a TOML config: pick the base scenario (default cavity) and
    /// override whatever the file sets.
    pub fn from_config_str(text: &str) -> Result<Scenario> {
        let cfg: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        let base = cfg.scenario.as_deref().unwrap_or("cavity");
        let mut sc = Scenario::builtin(base)?;
        if let Some(n) = cfg.name {
            sc.name = n;
        }
        if let Some(g) = cfg.grid {
            set(&mut sc.nx, g.nx);
            set(&mut sc.nz, g.nz);
            set(&mut sc.lx, g.lx);
            set(&mut sc.h, g.h);
        }
        if let Some(w) = cfg.wind {
            set(&mut sc.wind.amplitude, w.amplitude);
            set(&mut sc.wind.center, w.center);
            set(&mut sc.wind.half_width, w.half_width);
        }
        if let Some(b) = cfg.bathymetry {
            if b.enabled == Some(false) {
                sc.bathymetry = None;
            } else {
                let mut bt = sc.bathymetry.unwrap_or_default();
                set(&mut bt.height_frac, b.height_frac);
                set(&mut bt.sigma_frac, b.sigma_frac);
                set(&mut bt.center_frac, b.center_frac);
                set(&mut bt.inflow_amplitude, b.inflow_amplitude);
                sc.bathymetry = Some(bt);
            }
        }
        if let Some(f) = cfg.fluid {
            set(&mut sc.fluid.nu, f.nu);
        }
        if let Some(t) = cfg.time {
            set(&mut sc.time.dt, t.dt);
            set(&mut sc.time.t_end, t.t_end);
        }
        if let Some(d) = cfg.deconv {
            set(&mut sc.filter.alpha, d.alpha);
            set(&mut sc.dtau, d.dtau);
        }
        if let Some(s) = cfg.solver {
            set(&mut sc.solver.rel_tol, s.rel_tol);
            set(&mut sc.solver.max_iter, s.max_iter);
        }
        if let Some(i) = cfg.init {
            set(&mut sc.init.dt, i.dt);
            set(&mut sc.init.tol, i.tol);
            set(&mut sc.init.max_iter, i.max_iter);
        }
        if let Some(o) = cfg.output {
            set(&mut sc.output_every, o.every);
            set(&mut sc.profile_x, o.profile_x);
        }
        if let Some(m) = cfg.models {
            if let Some(list) = m.list {
                sc.models = list
                    .iter()
                    .map(|s| parse_model(s, sc.dtau))
                    .collect::<Result<Vec<_>>>()?;
            }
        }
        // deconv models always use the configured dtau
        for m in sc.models.iter_mut() {
            if let ModelKind::Deconv(p) = m {
                p.dtau = sc.dtau;
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_config_file(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::from_config_str(&text)
    }

    /// Emit a config that parses back to this exact scenario.
    pub fn to_config_toml(&self) -> String {
        let base = if self.bathymetry.is_some() {
            "bathymetry"
        } else {
            "cavity"
        };
        let cfg = ConfigFile {
            scenario: Some(base.into()),
            name: Some(self.name.clone()),
            grid: Some(GridSec {
                nx: Some(self.nx),
                nz: Some(self.nz),
                lx: Some(self.lx),
                h: Some(self.h),
            }),
            wind: Some(WindSec {
                amplitude: Some(self.wind.amplitude),
                center: Some(self.wind.center),
                half_width: Some(self.wind.half_width),
            }),
            bathymetry: self.bathymetry.map(|b| BathySec {
                enabled: Some(true),
                height_frac: Some(b.height_frac),
                sigma_frac: Some(b.sigma_frac),
                center_frac: Some(b.center_frac),
                inflow_amplitude: Some(b.inflow_amplitude),
            }),
            fluid: Some(FluidSec {
                nu: Some(self.fluid.nu),
            }),
            time: Some(TimeSec {
                dt: Some(self.time.dt),
                t_end: Some(self.time.t_end),
            }),
            models: Some(ModelsSec {
                list: Some(self.models.iter().map(model_config_name).collect()),
            }),
            deconv: Some(DeconvSec {
                alpha: Some(self.filter.alpha),
                dtau: Some(self.dtau),
            }),
            solver: Some(SolverSec {
                rel_tol: Some(self.solver.rel_tol),
                max_iter: Some(self.solver.max_iter),
            }),
            init: Some(InitSec {
                dt: Some(self.init.dt),
                tol: Some(self.init.tol),
                max_iter: Some(self.init.max_iter),
            }),
            output: Some(OutputSec {
                every: Some(self.output_every),
                profile_x: Some(self.profile_x),
            }),
            run: None,
        };
        toml::to_string_pretty(&cfg).expect("config serialization cannot fail")
    }
}

fn set<T>(dst: &mut T, src: Option<T>) {
    if let Some(v) = src {
        *dst = v;
    }
}
