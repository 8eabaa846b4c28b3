//! Staggered field containers.
//!
//! A MAC layout on an `nx` x `nz` cell grid stores pressure-like scalars at
//! cell centers, the horizontal velocity `u` on vertical (x-normal) faces and
//! the vertical velocity `w` on horizontal (z-normal) faces. Index `(i, j)`
//! runs with `i` along x and `j` along z, `j = 0` at the bottom of the domain.

use crate::error::{Error, Result};

/// Staggering location of a scalar quantity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Loc {
    /// Cell centers, `nx * nz` values (p, r, divergence, ...).
    Center,
    /// x-normal faces, `(nx+1) * nz` values (u).
    XFace,
    /// z-normal faces, `nx * (nz+1)` values (w).
    ZFace,
}

impl Loc {
    pub fn shape(self, nx: usize, nz: usize) -> (usize, usize) {
        match self {
            Loc::Center => (nx, nz),
            Loc::XFace => (nx + 1, nz),
            Loc::ZFace => (nx, nz + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    loc: Loc,
    ni: usize,
    nj: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(loc: Loc, nx: usize, nz: usize) -> Self {
        let (ni, nj) = loc.shape(nx, nz);
        ScalarField {
            loc,
            ni,
            nj,
            data: vec![0.0; ni * nj],
        }
    }

    pub fn from_fn(loc: Loc, nx: usize, nz: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(loc, nx, nz);
        for j in 0..out.nj {
            for i in 0..out.ni {
                let v = f(i, j);
                out.data[j * out.ni + i] = v;
            }
        }
        out
    }

    pub fn loc(&self) -> Loc {
        self.loc
    }

    /// (ni, nj) extents of the staggering location.
    pub fn dims(&self) -> (usize, usize) {
        (self.ni, self.nj)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.ni && j < self.nj);
        j * self.ni + i
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.ni + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.ni + i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &ScalarField) -> Result<()> {
        self.check_same(other)?;
        for (x, y) in self.data.iter_mut().zip(other.data.iter()) {
            *x += a * y;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|x| *x *= a);
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Plain (unweighted) Euclidean norm of the stored values.
    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn check_same(&self, other: &ScalarField) -> Result<()> {
        if self.loc != other.loc || self.ni != other.ni || self.nj != other.nj {
            return Err(Error::Shape(format!(
                "{:?} {}x{} vs {:?} {}x{}",
                self.loc, self.ni, self.nj, other.loc, other.ni, other.nj
            )));
        }
        Ok(())
    }
}

/// Staggered velocity pair (u on x-faces, w on z-faces).
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub u: ScalarField,
    pub w: ScalarField,
}

impl VelocityField {
    pub fn zeros(nx: usize, nz: usize) -> Self {
        VelocityField {
            u: ScalarField::zeros(Loc::XFace, nx, nz),
            w: ScalarField::zeros(Loc::ZFace, nx, nz),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &VelocityField) -> Result<()> {
        self.u.axpy(a, &other.u)?;
        self.w.axpy(a, &other.w)
    }

    pub fn scale(&mut self, a: f64) {
        self.u.scale(a);
        self.w.scale(a);
    }

    pub fn norm_inf(&self) -> f64 {
        self.u.norm_inf().max(self.w.norm_inf())
    }

    pub fn norm2(&self) -> f64 {
        (self.u.norm2().powi(2) + self.w.norm2().powi(2)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.w.is_finite()
    }
}
