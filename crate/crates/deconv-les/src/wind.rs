//! Surface wind stress and the divergence-free lifting field that carries
//! the inhomogeneous boundary conditions.
//!
//! The stress is `V(x) = A a(x) sin(pi x / Lx)` with a smooth compactly
//! supported localization bump `a`. The lifting field is
//! `psi = (rho(z) V(x), -kappa(z) V'(x))` with
//! `rho(z) = 3 z^2 / (4 h) + z + h/4` and `kappa` its antiderivative
//! vanishing at the bottom; it is divergence-free and satisfies the wall and
//! surface-stress conditions by construction.

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindStress {
    /// Stress scale A.
    pub amplitude: f64,
    /// Bump center x_c.
    pub center: f64,
    /// Bump half-width r_w; the support is (x_c - r_w, x_c + r_w).
    pub half_width: f64,
}

impl Default for WindStress {
    fn default() -> Self {
        WindStress {
            amplitude: 1.0,
            center: 0.5,
            half_width: 0.4,
        }
    }
}

impl WindStress {
    /// Smooth bump `exp(1 - 1/(1 - s^2))` for |s| < 1, zero outside.
    fn bump(s: f64) -> f64 {
        if s.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }

    fn bump_deriv(s: f64) -> f64 {
        if s.abs() < 1.0 {
            let d = 1.0 - s * s;
            Self::bump(s) * (-2.0 * s / (d * d))
        } else {
            0.0
        }
    }

    /// V(x) on a domain of horizontal extent `lx`.
    pub fn eval(&self, x: f64, lx: f64) -> f64 {
        let s = (x - self.center) / self.half_width;
        self.amplitude * Self::bump(s) * (std::f64::consts::PI * x / lx).sin()
    }

    /// Analytic V'(x).
    pub fn eval_deriv(&self, x: f64, lx: f64) -> f64 {
        let pi = std::f64::consts::PI;
        let s = (x - self.center) / self.half_width;
        let a = Self::bump(s);
        let da = Self::bump_deriv(s) / self.half_width;
        self.amplitude * (da * (pi * x / lx).sin() + a * (pi / lx) * (pi * x / lx).cos())
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// `rho(z) = 3 z^2 / (4h) + z + h/4`; vanishes at z = -h, slope 1 at z = 0.
pub fn eval_rho(z: f64, h: f64) -> Result<f64> {
    check_depth(z, h)?;
    Ok(3.0 / (4.0 * h) * z * z + z + h / 4.0)
}

/// `kappa(z) = int_{-h}^z rho`; closed form `z^3/(4h) + z^2/2 + h z / 4`.
/// Vanishes at both z = -h and z = 0.
pub fn eval_kappa(z: f64, h: f64) -> Result<f64> {
    check_depth(z, h)?;
    Ok(z * z * z / (4.0 * h) + z * z / 2.0 + h * z / 4.0)
}

fn check_depth(z: f64, h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(Error::Param("depth h must be positive".into()));
    }
    if z < -h - 1e-12 * h || z > 1e-12 * h {
        return Err(Error::Param(format!("z = {z} outside [-{h}, 0]")));
    }
    Ok(())
}

/// The lifting field sampled on the staggered grid.
#[derive(Clone, Debug)]
pub struct LiftField {
    pub vel: VelocityField,
}

impl LiftField {
    pub fn zero(grid: &Grid) -> Self {
        LiftField {
            vel: VelocityField::zeros(grid.nx, grid.nz),
        }
    }
}

/// Sample `psi(V)` on the grid. Faces on or inside the solid mask are forced
/// to zero so the transport velocity keeps exact no-slip traces there.
pub fn build_psi(wind: &WindStress, grid: &Grid) -> Result<LiftField> {
    let (lo, hi) = wind.support();
    if wind.amplitude != 0.0 && (lo <= 0.0 || hi >= grid.lx) {
        return Err(Error::Param(format!(
            "wind support ({lo}, {hi}) must lie strictly inside (0, {})",
            grid.lx
        )));
    }
    if !(wind.half_width > 0.0) {
        return Err(Error::Param("wind half_width must be positive".into()));
    }
    let mut vel = VelocityField::zeros(grid.nx, grid.nz);
    for j in 0..grid.nz {
        let rho = eval_rho(grid.z_of_urow(j), grid.h)?;
        for i in 0..=grid.nx {
            let on_boundary = i == 0 || i == grid.nx;
            if grid.u_is_active(i, j) || on_boundary {
                vel.u.set(i, j, rho * wind.eval(grid.x_of_uface(i), grid.lx));
            }
        }
    }
    for j in 0..=grid.nz {
        let kappa = eval_kappa(grid.z_of_wface(j), grid.h)?;
        for i in 0..grid.nx {
            if grid.w_is_active(i, j) {
                vel.w
                    .set(i, j, -kappa * wind.eval_deriv(grid.x_of_center(i), grid.lx));
            }
        }
    }
    Ok(LiftField { vel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};

    #[test]
    fn rho_closed_form_values() {
        let h = 0.5;
        assert!((eval_rho(0.0, h).unwrap() - 0.125).abs() < 1e-15); // h/4
        assert!(eval_rho(-h, h).unwrap().abs() < 1e-15);
        // derivative 3z/(2h) + 1 equals 1 at the surface
        let fd = (eval_rho(0.0, h).unwrap() - eval_rho(-1e-7, h).unwrap()) / 1e-7;
        assert!((fd - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kappa_roots_and_value() {
        let h = 0.5;
        assert!(eval_kappa(-h, h).unwrap().abs() < 1e-15);
        assert!(eval_kappa(0.0, h).unwrap().abs() < 1e-15);
        assert!((eval_kappa(-0.25, h).unwrap() - (-0.0078125)).abs() < 1e-15);
        // cross-check against quadrature of rho
        let n = 20000;
        let (a, b) = (-h, -0.25);
        let dz = (b - a) / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let z = a + (k as f64 + 0.5) * dz;
            acc += eval_rho(z, h).unwrap() * dz;
        }
        assert!((acc - eval_kappa(-0.25, h).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn depth_range_is_enforced() {
        assert!(eval_rho(0.1, 0.5).is_err());
        assert!(eval_rho(-0.6, 0.5).is_err());
        assert!(eval_kappa(1.0, 0.5).is_err());
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let g = Grid::build(&GridSpec::rectangle(8, 8, 1.0, 0.5)).unwrap();
        let w = WindStress {
            amplitude: 0.0,
            ..WindStress::default()
        };
        let psi = build_psi(&w, &g).unwrap();
        assert_eq!(psi.vel.norm_inf(), 0.0);
    }

    #[test]
    fn support_touching_wall_is_rejected() {
        let g = Grid::build(&GridSpec::rectangle(8, 8, 1.0, 0.5)).unwrap();
        let w = WindStress {
            amplitude: 1.0,
            center: 0.5,
            half_width: 0.5,
        };
        assert!(build_psi(&w, &g).is_err());
    }

    #[test]
    fn trace_conditions_are_exact() {
        let g = Grid::build(&GridSpec::rectangle(16, 16, 1.0, 0.5)).unwrap();
        let psi = build_psi(&WindStress::default(), &g).unwrap();
        for i in 0..g.nx {
            assert_eq!(psi.vel.w.at(i, 0), 0.0);
            assert_eq!(psi.vel.w.at(i, g.nz), 0.0);
        }
        for j in 0..g.nz {
            assert_eq!(psi.vel.u.at(0, j), 0.0);
            assert_eq!(psi.vel.u.at(g.nx, j), 0.0);
        }
        // surface slope: d(psi_h)/dz at z = 0 equals V since rho'(0) = 1;
        // check with a one-sided difference on the top two rows (O(dz))
        let jt = g.nz - 1;
        for i in 1..g.nx {
            let slope = (psi.vel.u.at(i, jt) - psi.vel.u.at(i, jt - 1)) / g.dz;
            let v = WindStress::default().eval(g.x_of_uface(i), g.lx);
            assert!((slope - v).abs() < 0.05 * (1.0 + v.abs()), "i={i}");
        }
    }

    #[test]
    fn discrete_divergence_is_second_order() {
        let wind = WindStress::default();
        let mut norms = Vec::new();
        // the bump's higher derivatives are large near its support edge, so
        // the asymptotic range only starts around n = 128
        for n in [64usize, 128, 256] {
            let g = Grid::build(&GridSpec::rectangle(n, n, 1.0, 0.5)).unwrap();
            let psi = build_psi(&wind, &g).unwrap();
            norms.push(g.divergence(&psi.vel).norm_inf());
        }
        let o1 = (norms[0] / norms[1]).log2();
        let o2 = (norms[1] / norms[2]).log2();
        assert!(o1 >= 1.6 && o2 >= 1.9, "{norms:?} orders {o1} {o2}");
    }

    #[test]
    fn psi_is_linear_in_the_wind() {
        let g = Grid::build(&GridSpec::rectangle(12, 12, 1.0, 0.5)).unwrap();
        let w1 = WindStress::default();
        let w3 = WindStress {
            amplitude: 3.0,
            ..w1
        };
        let p1 = build_psi(&w1, &g).unwrap();
        let p3 = build_psi(&w3, &g).unwrap();
        let mut diff = p3.vel.clone();
        diff.axpy(-3.0, &p1.vel).unwrap();
        assert!(diff.norm_inf() < 1e-14);
    }

    #[test]
    fn wind_at_bump_center_equals_amplitude() {
        let w = WindStress::default();
        assert!((w.eval(0.5, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wind_derivative_matches_finite_differences() {
        let w = WindStress::default();
        for x in [0.2, 0.35, 0.5, 0.62, 0.85] {
            let e = 1e-6;
            let fd = (w.eval(x + e, 1.0) - w.eval(x - e, 1.0)) / (2.0 * e);
            assert!((fd - w.eval_deriv(x, 1.0)).abs() < 1e-6, "x={x}");
        }
    }
}
