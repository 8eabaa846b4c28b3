//! Analytic ground truth for filtering and deconvolution on a 1D Dirichlet
//! eigenbasis, where the stencil diagonalizes exactly.
//!
//! On the sine modes `e_k(i) = sin(k pi i / n)` the 5-point (here 3-point)
//! Dirichlet Laplacian has the exact eigenvalues
//! `lambda_k^h = (2/dx^2)(1 - cos(k pi dx / L))`, so the gridded filter and
//! deconvolution must reproduce the closed-form coefficients to solver
//! precision, with no truncation error in the way.

use crate::error::{Error, Result};
use crate::solver::{cg, SolverParams};

/// 1D Dirichlet interval `[0, len]` split into `n` cells; unknowns at the
/// `n - 1` interior nodes.
#[derive(Clone, Debug)]
pub struct Oracle1d {
    pub n: usize,
    pub len: f64,
    pub dx: f64,
}

impl Oracle1d {
    pub fn new(n: usize, len: f64) -> Result<Self> {
        if n < 4 || !(len > 0.0) {
            return Err(Error::Param("oracle grid needs n >= 4 and len > 0".into()));
        }
        Ok(Oracle1d {
            n,
            len,
            dx: len / n as f64,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.n - 1
    }

    /// Continuum eigenvalue `(k pi / L)^2`.
    pub fn lambda_continuum(&self, k: usize) -> f64 {
        let kl = k as f64 * std::f64::consts::PI / self.len;
        kl * kl
    }

    /// Discrete stencil eigenvalue `(2/dx^2)(1 - cos(k pi dx / L))`.
    pub fn lambda_h(&self, k: usize) -> f64 {
        let t = k as f64 * std::f64::consts::PI / self.n as f64;
        2.0 / (self.dx * self.dx) * (1.0 - t.cos())
    }

    pub fn mode(&self, k: usize) -> Vec<f64> {
        (1..self.n)
            .map(|i| (k as f64 * std::f64::consts::PI * i as f64 / self.n as f64).sin())
            .collect()
    }

    /// Coefficient of mode k by the discrete inner product (modes are
    /// orthogonal with squared norm n/2).
    pub fn coeff(&self, f: &[f64], k: usize) -> f64 {
        let e = self.mode(k);
        let dot: f64 = f.iter().zip(&e).map(|(a, b)| a * b).sum();
        dot * 2.0 / self.n as f64
    }

    fn lap_apply(&self, x: &[f64], y: &mut [f64]) {
        let idx2 = 1.0 / (self.dx * self.dx);
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            y[i] = (l - 2.0 * x[i] + r) * idx2;
        }
    }

    /// Solve `(a I - b Lap) x = rhs` with homogeneous Dirichlet ends,
    /// through the same conjugate-gradient driver as the 2D systems.
    pub fn solve_helmholtz(
        &self,
        a: f64,
        b: f64,
        rhs: &[f64],
        params: &SolverParams,
    ) -> Result<Vec<f64>> {
        if !(a > 0.0) || b < 0.0 {
            return Err(Error::Param("need a > 0, b >= 0".into()));
        }
        if b == 0.0 {
            return Ok(rhs.iter().map(|v| v / a).collect());
        }
        let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; rhs.len()];
        let cap = if params.max_iter > 0 {
            params.max_iter
        } else {
            20 * self.n
        };
        cg(
            |v, out| {
                self.lap_apply(v, out);
                for (o, vi) in out.iter_mut().zip(v) {
                    *o = a * vi - b * *o;
                }
            },
            rhs,
            &mut x,
            params.rel_tol * bnorm,
            cap,
            "oracle helmholtz",
        )?;
        Ok(x)
    }

    /// Gridded Helmholtz filter `(I - alpha^2 Lap)^{-1}`.
    pub fn filter(&self, v: &[f64], alpha: f64, params: &SolverParams) -> Result<Vec<f64>> {
        self.solve_helmholtz(1.0, alpha * alpha, v, params)
    }

    /// Gridded deconvolution: filter then `round(tau/dtau)` implicit
    /// pseudo-time steps of `(dtau I - alpha^2 Lap) delta = dtau (v - phi)`.
    pub fn deconv(
        &self,
        v: &[f64],
        alpha: f64,
        tau: f64,
        dtau: f64,
        params: &SolverParams,
    ) -> Result<Vec<f64>> {
        let mut phi = self.filter(v, alpha, params)?;
        let n_steps = (tau / dtau).round() as usize;
        for _ in 0..n_steps {
            let rhs: Vec<f64> = v.iter().zip(&phi).map(|(u, p)| dtau * (u - p)).collect();
            let delta = self.solve_helmholtz(dtau, alpha * alpha, &rhs, params)?;
            for (p, d) in phi.iter_mut().zip(&delta) {
                *p += d;
            }
        }
        Ok(phi)
    }
}

/// Filter response `1 / (1 + alpha^2 lambda)`.
pub fn exact_filter_coeff(alpha: f64, lambda: f64) -> f64 {
    1.0 / (1.0 + alpha * alpha * lambda)
}

/// Filtered coefficient with a lifting component:
/// `(u + alpha^2 psi) / (1 + alpha^2 lambda)`.
pub fn filtered_coeff(u: f64, psi: f64, alpha: f64, lambda: f64) -> f64 {
    (u + alpha * alpha * psi) / (1.0 + alpha * alpha * lambda)
}

/// Van Cittert closed form after `n_steps` unit updates starting from the
/// filtered value: `1 - (1 - g)^{n_steps + 1}` times the target coefficient.
pub fn van_cittert_coeff(g: f64, n_steps: usize) -> f64 {
    1.0 - (1.0 - g).powi(n_steps as i32 + 1)
}

/// Coefficient after `n_steps` implicit pseudo-time steps of size `dtau`:
/// `u + (ubar - u) r^n` with `r = alpha^2 lambda / (dtau + alpha^2 lambda)`.
pub fn stepped_coeff(u: f64, ubar: f64, alpha: f64, lambda: f64, dtau: f64, n_steps: usize) -> f64 {
    let a2l = alpha * alpha * lambda;
    let r = a2l / (dtau + a2l);
    u + (ubar - u) * r.powi(n_steps as i32)
}

/// The continuous pseudo-time solution:
/// `u + (ubar - u) exp(-tau / (alpha^2 lambda))`.
pub fn exact_deconv_coeff(u: f64, ubar: f64, alpha: f64, lambda: f64, tau: f64) -> f64 {
    u + (ubar - u) * (-tau / (alpha * alpha * lambda)).exp()
}

#[derive(Clone, Debug)]
pub struct ModeDeviation {
    pub k: usize,
    pub got: f64,
    pub expected: f64,
    pub rel_dev: f64,
    /// Energy left in other modes, relative to the input mode.
    pub off_mode: f64,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub per_mode: Vec<ModeDeviation>,
    pub max_rel_dev: f64,
    pub max_off_mode: f64,
}

fn off_mode_energy(o: &Oracle1d, f: &[f64], k: usize) -> f64 {
    let ck = o.coeff(f, k);
    let e = o.mode(k);
    let resid: f64 = f
        .iter()
        .zip(&e)
        .map(|(fi, ei)| (fi - ck * ei) * (fi - ck * ei))
        .sum();
    let total: f64 = f.iter().map(|v| v * v).sum();
    (resid / total.max(f64::MIN_POSITIVE)).sqrt()
}

fn check_modes(o: &Oracle1d, modes: &[usize]) -> Result<()> {
    for &k in modes {
        if k == 0 || 2 * k > o.n {
            return Err(Error::Param(format!(
                "mode {k} exceeds the Nyquist limit {} of an n = {} oracle grid",
                o.n / 2,
                o.n
            )));
        }
    }
    Ok(())
}

/// Run the gridded filter on each requested eigenmode and compare against
/// the exact response at the discrete eigenvalue.
pub fn compare_filter(
    o: &Oracle1d,
    alpha: f64,
    modes: &[usize],
    params: &SolverParams,
) -> Result<OracleReport> {
    check_modes(o, modes)?;
    let mut per_mode = Vec::with_capacity(modes.len());
    for &k in modes {
        let e = o.mode(k);
        let f = o.filter(&e, alpha, params)?;
        let got = o.coeff(&f, k);
        let expected = exact_filter_coeff(alpha, o.lambda_h(k));
        per_mode.push(ModeDeviation {
            k,
            got,
            expected,
            rel_dev: (got - expected).abs() / expected.abs(),
            off_mode: off_mode_energy(o, &f, k),
        });
    }
    Ok(report(per_mode))
}

/// Run the gridded deconvolution on each eigenmode and compare against the
/// scalar recurrence closed form (Van Cittert when dtau = 1).
pub fn compare_deconv(
    o: &Oracle1d,
    alpha: f64,
    tau: f64,
    dtau: f64,
    modes: &[usize],
    params: &SolverParams,
) -> Result<OracleReport> {
    check_modes(o, modes)?;
    let n_steps = (tau / dtau).round() as usize;
    let mut per_mode = Vec::with_capacity(modes.len());
    for &k in modes {
        let e = o.mode(k);
        let f = o.deconv(&e, alpha, tau, dtau, params)?;
        let got = o.coeff(&f, k);
        let lam = o.lambda_h(k);
        let g = exact_filter_coeff(alpha, lam);
        let expected = stepped_coeff(1.0, g, alpha, lam, dtau, n_steps);
        per_mode.push(ModeDeviation {
            k,
            got,
            expected,
            rel_dev: (got - expected).abs() / expected.abs(),
            off_mode: off_mode_energy(o, &f, k),
        });
    }
    Ok(report(per_mode))
}

fn report(per_mode: Vec<ModeDeviation>) -> OracleReport {
    let max_rel_dev = per_mode.iter().fold(0.0f64, |m, d| m.max(d.rel_dev));
    let max_off_mode = per_mode.iter().fold(0.0f64, |m, d| m.max(d.off_mode));
    OracleReport {
        per_mode,
        max_rel_dev,
        max_off_mode,
    }
}

/// CSV table of per-mode responses: exact and gridded filter coefficients,
/// Van Cittert closed form, stepped and continuum deconvolution values.
pub fn oracle_table(
    n: usize,
    alpha: f64,
    tau: f64,
    dtau: f64,
    kmax: usize,
    params: &SolverParams,
) -> Result<String> {
    let o = Oracle1d::new(n, 1.0)?;
    let n_steps = (tau / dtau).round() as usize;
    let mut out = String::from(
        "k,lambda_h,filter_exact,filter_gridded,deconv_closed_form,deconv_gridded,deconv_exponential\n",
    );
    for k in 1..=kmax.min(n / 2) {
        let lam = o.lambda_h(k);
        let g = exact_filter_coeff(alpha, lam);
        let e = o.mode(k);
        let fg = o.coeff(&o.filter(&e, alpha, params)?, k);
        let dg = o.coeff(&o.deconv(&e, alpha, tau, dtau, params)?, k);
        let closed = stepped_coeff(1.0, g, alpha, lam, dtau, n_steps);
        let expo = exact_deconv_coeff(1.0, g, alpha, lam, tau);
        out.push_str(&format!("{k},{lam},{g},{fg},{closed},{dg},{expo}\n"));
    }
    Ok(out)
}
