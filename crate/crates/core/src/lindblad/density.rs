use nalgebra::{Matrix3, SVector};

use crate::error::{Error, Result};
use crate::C64;

pub type Matrix3c = Matrix3<C64>;
pub type Vec9 = SVector<C64, 9>;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

/// Column-stacked index of element `(row, col)` of a 3×3 matrix.
#[inline]
pub const fn vec_index(row: usize, col: usize) -> usize {
    row + 3 * col
}

/// 3×3 density matrix over {|0⟩, |1⟩, |2⟩}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3(Matrix3c);

impl DensityMatrix3 {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Matrix3c) -> Result<Self> {
        let rho = Self(m);
        rho.check()?;
        Ok(rho)
    }

    pub fn pure(level: usize) -> Self {
        assert!(level < 3, "level index out of range");
        let mut m = Matrix3c::zeros();
        m[(level, level)] = C64::new(1.0, 0.0);
        Self(m)
    }

    pub fn ground() -> Self {
        Self::pure(0)
    }

    pub fn from_vec(v: &Vec9) -> Self {
        Self(Matrix3c::from_column_slice(v.as_slice()))
    }

    pub fn to_vec(&self) -> Vec9 {
        Vec9::from_column_slice(self.0.as_slice())
    }

    pub fn matrix(&self) -> &Matrix3c {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[(level, level)].re
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self) -> Result<()> {
        if self.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("rho", "non-finite entry"));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid("rho", format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::invalid("rho", format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::invalid("rho", format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `(ρ + ρ†)/2`.
    pub(crate) fn hermitian_part(m: &Matrix3c) -> Matrix3c {
        (m + m.adjoint()) * C64::new(0.5, 0.0)
    }

    /// Hermitian part rescaled to unit trace; diagonal sums to exactly the
    /// rounding of 1.
    pub(crate) fn normalized(m: &Matrix3c) -> Self {
        let mut h = Self::hermitian_part(m);
        let tr = h[(0, 0)].re + h[(1, 1)].re + h[(2, 2)].re;
        h /= C64::new(tr, 0.0);
        for k in 0..3 {
            h[(k, k)].im = 0.0;
        }
        // Put the rounding residue on the largest population.
        let resid = 1.0 - (h[(0, 0)].re + h[(1, 1)].re + h[(2, 2)].re);
        let k = (0..3)
            .max_by(|&a, &b| h[(a, a)].re.total_cmp(&h[(b, b)].re))
            .unwrap();
        h[(k, k)].re += resid;
        Self(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_round_trip_uses_column_stacking() {
        let mut m = Matrix3c::zeros();
        m[(2, 0)] = C64::new(0.0, 1.0);
        let rho = DensityMatrix3::from_vec(&Vec9::from_column_slice(m.as_slice()));
        assert_eq!(rho.to_vec()[vec_index(2, 0)], C64::new(0.0, 1.0));
        assert_eq!(DensityMatrix3::from_vec(&rho.to_vec()), rho);
    }

    #[test]
    fn invariants_checked() {
        assert!(DensityMatrix3::ground().check().is_ok());
        let mut m = Matrix3c::zeros();
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix3::new(m).is_err());
        let mut m = *DensityMatrix3::ground().matrix();
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix3::new(m).is_err());
    }
}
