//! Staggered-grid geometry, discrete operators and boundary classification.
//!
//! The domain is the rectangle `[0, Lx] x [-h, 0]` with the rigid lid at
//! `z = 0`. An optional solid mask carves a stair-step bathymetry out of the
//! bottom: in every column the solid cells must form a contiguous block
//! attached to the bottom boundary.

use crate::error::{Error, Result};
use crate::field::{Loc, ScalarField, VelocityField};

pub const MIN_CELLS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub nz: usize,
    /// Horizontal extent (m).
    pub lx: f64,
    /// Depth (m); the domain is `[0,lx] x [-h,0]`.
    pub h: f64,
    /// Per-cell solid flag, row-major `j*nx + i`, empty = all fluid.
    pub solid: Vec<bool>,
}

impl GridSpec {
    pub fn rectangle(nx: usize, nz: usize, lx: f64, h: f64) -> Self {
        GridSpec {
            nx,
            nz,
            lx,
            h,
            solid: Vec::new(),
        }
    }
}

/// Which part of the boundary a boundary face belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryClass {
    /// Rigid lid at z = 0.
    Surface,
    /// Bottom (including stair-step solid tops).
    Bottom,
    /// Lateral walls x = 0 and x = Lx (and stair-step risers).
    Lateral,
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub nx: usize,
    pub nz: usize,
    pub lx: f64,
    pub h: f64,
    pub dx: f64,
    pub dz: f64,
    cell_fluid: Vec<bool>,
    u_active: Vec<bool>,
    w_active: Vec<bool>,
    /// Number of solid cells at the bottom of each column.
    solid_rows: Vec<usize>,
}

pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    Grid::build(spec)
}

impl Grid {
    pub fn build(spec: &GridSpec) -> Result<Grid> {
        if spec.nx < MIN_CELLS || spec.nz < MIN_CELLS {
            return Err(Error::Grid(format!(
                "need at least {MIN_CELLS}x{MIN_CELLS} cells, got {}x{}",
                spec.nx, spec.nz
            )));
        }
        if !(spec.lx > 0.0) || !(spec.h > 0.0) {
            return Err(Error::Grid("extents lx and h must be positive".into()));
        }
        let (nx, nz) = (spec.nx, spec.nz);
        let cell_fluid: Vec<bool> = if spec.solid.is_empty() {
            vec![true; nx * nz]
        } else {
            if spec.solid.len() != nx * nz {
                return Err(Error::Grid(format!(
                    "solid mask has {} entries, expected {}",
                    spec.solid.len(),
                    nx * nz
                )));
            }
            spec.solid.iter().map(|s| !s).collect()
        };

        // Per column the solid block must sit on the bottom and the top row
        // must stay fluid (the lid is always wetted).
        let mut solid_rows = vec![0usize; nx];
        for i in 0..nx {
            let mut k = 0;
            while k < nz && !cell_fluid[k * nx + i] {
                k += 1;
            }
            if k == nz {
                return Err(Error::Grid(format!("column {i} is entirely solid")));
            }
            for j in k..nz {
                if !cell_fluid[j * nx + i] {
                    return Err(Error::Grid(format!(
                        "solid cell ({i},{j}) is detached from the bottom"
                    )));
                }
            }
            solid_rows[i] = k;
        }

        let mut u_active = vec![false; (nx + 1) * nz];
        for j in 0..nz {
            for i in 1..nx {
                u_active[j * (nx + 1) + i] =
                    cell_fluid[j * nx + i - 1] && cell_fluid[j * nx + i];
            }
        }
        let mut w_active = vec![false; nx * (nz + 1)];
        for j in 1..nz {
            for i in 0..nx {
                w_active[j * nx + i] =
                    cell_fluid[(j - 1) * nx + i] && cell_fluid[j * nx + i];
            }
        }

        Ok(Grid {
            nx,
            nz,
            lx: spec.lx,
            h: spec.h,
            dx: spec.lx / nx as f64,
            dz: spec.h / nz as f64,
            cell_fluid,
            u_active,
            w_active,
            solid_rows,
        })
    }

    #[inline]
    pub fn cell_is_fluid(&self, i: usize, j: usize) -> bool {
        self.cell_fluid[j * self.nx + i]
    }

    #[inline]
    pub fn u_is_active(&self, i: usize, j: usize) -> bool {
        self.u_active[j * (self.nx + 1) + i]
    }

    #[inline]
    pub fn w_is_active(&self, i: usize, j: usize) -> bool {
        self.w_active[j * self.nx + i]
    }

    pub fn fluid_cell_count(&self) -> usize {
        self.cell_fluid.iter().filter(|f| **f).count()
    }

    /// Number of solid cells at the bottom of column `i`.
    pub fn solid_rows(&self, i: usize) -> usize {
        self.solid_rows[i]
    }

    // Coordinates of staggered sample points.
    #[inline]
    pub fn x_of_uface(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
    #[inline]
    pub fn z_of_urow(&self, j: usize) -> f64 {
        -self.h + (j as f64 + 0.5) * self.dz
    }
    #[inline]
    pub fn x_of_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }
    #[inline]
    pub fn z_of_wface(&self, j: usize) -> f64 {
        -self.h + j as f64 * self.dz
    }

    /// Classify a z-normal boundary face: the lid (`j = nz`) is `Surface`,
    /// everything that closes the fluid from below is `Bottom`.
    pub fn classify_wface(&self, i: usize, j: usize) -> Option<BoundaryClass> {
        if self.w_is_active(i, j) {
            return None;
        }
        if j == self.nz {
            Some(BoundaryClass::Surface)
        } else if j == self.solid_rows[i] {
            Some(BoundaryClass::Bottom)
        } else {
            None // face buried in solid, not part of Gamma
        }
    }

    /// Classify an x-normal boundary face.
    pub fn classify_uface(&self, i: usize, j: usize) -> Option<BoundaryClass> {
        if self.u_is_active(i, j) {
            return None;
        }
        if i == 0 || i == self.nx {
            if j >= self.solid_rows[if i == 0 { 0 } else { self.nx - 1 }] {
                return Some(BoundaryClass::Lateral);
            }
            return None;
        }
        // stair-step riser between a fluid and a solid cell
        let lf = self.cell_is_fluid(i - 1, j);
        let rf = self.cell_is_fluid(i, j);
        if lf != rf {
            Some(BoundaryClass::Lateral)
        } else {
            None
        }
    }

    /// MAC divergence per cell; zero in solid cells. Boundary and inactive
    /// face values participate, so prescribed inflow shows up here.
    pub fn divergence(&self, v: &VelocityField) -> ScalarField {
        let mut out = ScalarField::zeros(Loc::Center, self.nx, self.nz);
        for j in 0..self.nz {
            for i in 0..self.nx {
                if !self.cell_is_fluid(i, j) {
                    continue;
                }
                let du = (v.u.at(i + 1, j) - v.u.at(i, j)) / self.dx;
                let dw = (v.w.at(i, j + 1) - v.w.at(i, j)) / self.dz;
                out.set(i, j, du + dw);
            }
        }
        out
    }

    /// Centered gradient of a cell-centered scalar onto faces. Only active
    /// (interior fluid) faces receive values; boundary-normal components stay
    /// zero, which realizes the homogeneous-Neumann pressure convention.
    pub fn gradient(&self, p: &ScalarField) -> Result<VelocityField> {
        if p.loc() != Loc::Center {
            return Err(Error::Shape("gradient expects a cell-centered field".into()));
        }
        let mut g = VelocityField::zeros(self.nx, self.nz);
        for j in 0..self.nz {
            for i in 1..self.nx {
                if self.u_is_active(i, j) {
                    g.u.set(i, j, (p.at(i, j) - p.at(i - 1, j)) / self.dx);
                }
            }
        }
        for j in 1..self.nz {
            for i in 0..self.nx {
                if self.w_is_active(i, j) {
                    g.w.set(i, j, (p.at(i, j) - p.at(i, j - 1)) / self.dz);
                }
            }
        }
        Ok(g)
    }

    /// Clamp a point into the fluid region (box clamp, then lift out of the
    /// stair-step solid column if needed).
    pub fn clamp_to_fluid(&self, x: f64, z: f64) -> (f64, f64) {
        let x = x.clamp(0.0, self.lx);
        let mut z = z.clamp(-self.h, 0.0);
        let col = ((x / self.dx) as usize).min(self.nx - 1);
        let floor_z = -self.h + self.solid_rows[col] as f64 * self.dz;
        if z < floor_z {
            z = floor_z;
        }
        (x, z)
    }

    /// Bilinear interpolation of both staggered components at a point.
    /// Points outside the fluid domain are clamped first.
    pub fn interpolate_velocity(&self, v: &VelocityField, x: f64, z: f64) -> (f64, f64) {
        let (x, z) = self.clamp_to_fluid(x, z);
        (self.interp_u(&v.u, x, z), self.interp_w(&v.w, x, z))
    }

    fn interp_u(&self, u: &ScalarField, x: f64, z: f64) -> f64 {
        // u samples live at (i*dx, -h + (j+0.5)*dz)
        let gx = (x / self.dx).clamp(0.0, self.nx as f64);
        let gz = ((z + self.h) / self.dz - 0.5).clamp(0.0, (self.nz - 1) as f64);
        bilinear(u, gx, gz, self.nx, self.nz - 1)
    }

    fn interp_w(&self, w: &ScalarField, x: f64, z: f64) -> f64 {
        // w samples live at ((i+0.5)*dx, -h + j*dz)
        let gx = (x / self.dx - 0.5).clamp(0.0, (self.nx - 1) as f64);
        let gz = ((z + self.h) / self.dz).clamp(0.0, self.nz as f64);
        bilinear(w, gx, gz, self.nx - 1, self.nz)
    }

    /// Discrete L2 norm of a velocity field with cell-area weights.
    pub fn weighted_norm2(&self, v: &VelocityField) -> f64 {
        v.norm2() * (self.dx * self.dz).sqrt()
    }
}

fn bilinear(f: &ScalarField, gx: f64, gz: f64, imax: usize, jmax: usize) -> f64 {
    let i0 = (gx.floor() as usize).min(imax - 1);
    let j0 = (gz.floor() as usize).min(jmax - 1);
    let fx = (gx - i0 as f64).clamp(0.0, 1.0);
    let fz = (gz - j0 as f64).clamp(0.0, 1.0);
    let (i1, j1) = (i0 + 1, j0 + 1);
    f.at(i0, j0) * (1.0 - fx) * (1.0 - fz)
        + f.at(i1, j0) * fx * (1.0 - fz)
        + f.at(i0, j1) * (1.0 - fx) * fz
        + f.at(i1, j1) * fx * fz
}
