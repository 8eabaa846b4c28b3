//! Diagnostics: vertical profiles, relative space-time errors, kinetic
//! energy and the discrete momentum residual.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VelocityField};
use crate::grid::Grid;
use crate::solver::{laplacian, Component, UBc};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample {
    pub z: f64,
    pub u: f64,
    pub w: f64,
}

/// Sample both velocity components along the vertical line at `x`, one
/// sample per horizontal-velocity row.
pub fn vertical_profile(grid: &Grid, v: &VelocityField, x: f64) -> Vec<ProfileSample> {
    (0..grid.nz)
        .map(|j| {
            let z = grid.z_of_urow(j);
            let (u, w) = grid.interpolate_velocity(v, x, z);
            ProfileSample { z, u, w }
        })
        .collect()
}

/// Relative L2-in-space-and-time deviation of `a` from the reference `b`, in
/// percent: `100 * ||a - b|| / ||b||` with the norm taken over all snapshots.
pub fn l2_relative_error(grid: &Grid, a: &[VelocityField], b: &[VelocityField]) -> Result<f64> {
    if a.len() != b.len() || b.is_empty() {
        return Err(Error::Shape(format!(
            "series lengths {} and {} must match and be nonempty",
            a.len(),
            b.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (va, vb) in a.iter().zip(b) {
        let mut d = va.clone();
        d.axpy(-1.0, vb)?;
        num += grid.weighted_norm2(&d).powi(2);
        den += grid.weighted_norm2(vb).powi(2);
    }
    if den == 0.0 {
        return Err(Error::Param("reference series is identically zero".into()));
    }
    Ok(100.0 * (num / den).sqrt())
}

/// Kinetic energy `1/2 int |v|^2`, with cell-averaged face values.
pub fn kinetic_energy(grid: &Grid, v: &VelocityField) -> f64 {
    let mut acc = 0.0;
    for j in 0..grid.nz {
        for i in 0..grid.nx {
            if grid.cell_is_fluid(i, j) {
                let uc = 0.5 * (v.u.at(i, j) + v.u.at(i + 1, j));
                let wc = 0.5 * (v.w.at(i, j) + v.w.at(i, j + 1));
                acc += uc * uc + wc * wc;
            }
        }
    }
    0.5 * acc * grid.dx * grid.dz
}

/// Inputs of the end-of-step momentum residual.
pub struct ResidualInput<'a> {
    pub prev: &'a VelocityField,
    pub next: &'a VelocityField,
    /// Transport velocity used by the step.
    pub wstar: &'a VelocityField,
    pub p: &'a ScalarField,
    pub dt: f64,
    pub nu: f64,
    /// Boundary data of the horizontal momentum equation.
    pub bc: &'a UBc,
    pub forcing: Option<&'a VelocityField>,
}

/// Weighted L2 norm over active faces of
/// `(v^{n+1} - v^n)/dt + (w* . grad) v^{n+1} - nu Lap v^{n+1} + grad p - f`.
/// Gradients of the advected field use centered differences with one-sided
/// fallbacks at the boundary.
pub fn nse_residual(grid: &Grid, inp: &ResidualInput) -> Result<f64> {
    let lap_u = laplacian(grid, &inp.next.u, Component::U, Some(inp.bc));
    let lap_w = laplacian(grid, &inp.next.w, Component::W, None);
    let gp = grid.gradient(inp.p)?;
    let mut r = VelocityField::zeros(grid.nx, grid.nz);
    let dx = grid.dx;
    let dz = grid.dz;
    for j in 0..grid.nz {
        for i in 0..=grid.nx {
            if !grid.u_is_active(i, j) {
                continue;
            }
            let (x, z) = (grid.x_of_uface(i), grid.z_of_urow(j));
            let (au, aw) = grid.interpolate_velocity(inp.wstar, x, z);
            let dudx = centered(|k| inp.next.u.at(k, j), i, grid.nx, dx);
            let dudz = centered(|k| inp.next.u.at(i, k), j, grid.nz - 1, dz);
            let f = inp.forcing.map_or(0.0, |f| f.u.at(i, j));
            let val = (inp.next.u.at(i, j) - inp.prev.u.at(i, j)) / inp.dt
                + au * dudx
                + aw * dudz
                - inp.nu * lap_u.at(i, j)
                + gp.u.at(i, j)
                - f;
            r.u.set(i, j, val);
        }
    }
    for j in 0..=grid.nz {
        for i in 0..grid.nx {
            if !grid.w_is_active(i, j) {
                continue;
            }
            let (x, z) = (grid.x_of_center(i), grid.z_of_wface(j));
            let (au, aw) = grid.interpolate_velocity(inp.wstar, x, z);
            let dwdx = centered(|k| inp.next.w.at(k, j), i, grid.nx - 1, dx);
            let dwdz = centered(|k| inp.next.w.at(i, k), j, grid.nz, dz);
            let f = inp.forcing.map_or(0.0, |f| f.w.at(i, j));
            let val = (inp.next.w.at(i, j) - inp.prev.w.at(i, j)) / inp.dt
                + au * dwdx
                + aw * dwdz
                - inp.nu * lap_w.at(i, j)
                + gp.w.at(i, j)
                - f;
            r.w.set(i, j, val);
        }
    }
    Ok(grid.weighted_norm2(&r))
}

/// Centered difference of `f` at index `i` on `0..=imax`, one-sided at the
/// endpoints.
fn centered(f: impl Fn(usize) -> f64, i: usize, imax: usize, d: f64) -> f64 {
    if i == 0 {
        (f(1) - f(0)) / d
    } else if i == imax {
        (f(imax) - f(imax - 1)) / d
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * d)
    }
}
