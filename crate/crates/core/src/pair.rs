//! The transform pair `(a, b)`, the first row of an SU(2)-valued function on
//! the circle.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{default_grid_size, GridTransform};
use crate::sequence::CoefficientSequence;

/// Laurent coefficients of `(a, b)` with `|a|^2 + |b|^2 = 1` on the circle.
///
/// `grid_residual` caches `max | |a|^2 + |b|^2 - 1 |` on the grid the pair was
/// validated on.
#[derive(Debug, Clone, PartialEq)]
pub struct NlftPair {
    pub a: CoefficientSequence,
    pub b: CoefficientSequence,
    pub grid_residual: f64,
}

impl NlftPair {
    /// Builds the pair and records its determinant residual on `grid` points
    /// (or the default grid for the combined support when `None`).
    pub fn new(a: CoefficientSequence, b: CoefficientSequence, grid: Option<usize>) -> Result<Self> {
        let n = grid.unwrap_or_else(|| default_grid_size(joint_width(&a, &b)));
        let grid_residual = determinant_residual(&a, &b, n)?;
        Ok(Self { a, b, grid_residual })
    }

    /// The identity element `(1, 0)`.
    pub fn identity() -> Self {
        Self {
            a: CoefficientSequence::constant(Complex64::new(1.0, 0.0)),
            b: CoefficientSequence::empty(),
            grid_residual: 0.0,
        }
    }

    pub fn a_star(&self) -> CoefficientSequence {
        self.a.star_reflect()
    }

    /// `a*(0)`, the constant coefficient of `a` conjugated.
    pub fn a_star_at_zero(&self) -> Complex64 {
        self.a.coeff(0).conj()
    }

    /// `(a*(1/z), b(1/z))`: the image of the index-reversed potential.
    pub fn reflected(&self) -> Self {
        Self {
            a: self.a.conj_coeffs(),
            b: self.b.reverse_index(),
            grid_residual: self.grid_residual,
        }
    }

    /// Smallest grid on which the joint support of `a` and `b` is resolved
    /// without aliasing, for use as a default.
    pub fn default_grid(&self) -> usize {
        default_grid_size(joint_width(&self.a, &self.b))
    }

    /// SU(2) product `self * other` evaluated on an `n`-point grid, returned as
    /// sample vectors of the first row.
    pub fn product_on_grid(&self, other: &Self, n: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let t = GridTransform::new(n)?;
        let (a1, b1) = (t.samples(&self.a)?, t.samples(&self.b)?);
        let (a2, b2) = (t.samples(&other.a)?, t.samples(&other.b)?);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for j in 0..n {
            let (x, y) = (a1.samples()[j], b1.samples()[j]);
            let (u, v) = (a2.samples()[j], b2.samples()[j]);
            a.push(x * u - y * v.conj());
            b.push(x * v + y * u.conj());
        }
        Ok((a, b))
    }
}

pub(crate) fn joint_width(a: &CoefficientSequence, b: &CoefficientSequence) -> usize {
    match (a.support(), b.support()) {
        (Some((l1, h1)), Some((l2, h2))) => (h1.max(h2) - l1.min(l2)) as usize,
        (Some(_), None) => a.width(),
        (None, Some(_)) => b.width(),
        (None, None) => 0,
    }
}

/// `max | |a|^2 + |b|^2 - 1 |` over the `n`-point grid.
pub fn determinant_residual(a: &CoefficientSequence, b: &CoefficientSequence, n: usize) -> Result<f64> {
    let t = GridTransform::new(n)?;
    let sa = t.samples(a)?;
    let sb = t.samples(b)?;
    Ok(sa
        .samples()
        .iter()
        .zip(sb.samples())
        .fold(0.0f64, |m, (x, y)| m.max((x.norm_sqr() + y.norm_sqr() - 1.0).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_zero_residual() {
        let p = NlftPair::identity();
        assert_eq!(determinant_residual(&p.a, &p.b, 16).unwrap(), 0.0);
    }

    #[test]
    fn two_point_pair_residual() {
        let a = CoefficientSequence::from_real(-1, &[-0.2, 0.8]);
        let b = CoefficientSequence::from_real(0, &[0.4, 0.4]);
        let p = NlftPair::new(a, b, None).unwrap();
        assert!(p.grid_residual < 1e-15);
        assert_eq!(p.a_star_at_zero(), Complex64::new(0.8, 0.0));
    }
}
