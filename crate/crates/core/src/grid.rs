//! Samples on the uniform grid of the unit circle and the FFT bridge to
//! coefficient sequences.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{NlftError, Result};
use crate::sequence::CoefficientSequence;

/// Smallest power of two `>= 8 (width + 1)`.
pub fn default_grid_size(width: usize) -> usize {
    (8 * (width + 1)).next_power_of_two()
}

/// Values of a circle function at `e^(2 pi i j / N)`, `j = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        let n = samples.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(NlftError::InvalidGridSize(n));
        }
        if samples.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(NlftError::NonFinite("grid samples"));
        }
        Ok(Self { samples })
    }

    pub(crate) fn from_raw(samples: Vec<Complex64>) -> Self {
        Self { samples }
    }

    pub fn n_points(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_raw(self.samples.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.n_points(), other.n_points(), "grid sizes differ");
        Self::from_raw(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn min_abs(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, c| m.min(c.norm()))
    }

    /// Grid mean; the trapezoidal rule for `(1/2 pi) \int f d theta`.
    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }
}

/// Planned forward/inverse FFTs of one size.
#[derive(Clone)]
pub struct GridTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for GridTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridTransform").field("n", &self.n).finish()
    }
}

impl GridTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(NlftError::InvalidGridSize(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn bin(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Evaluates coefficients `coeffs[j]` at index `lo + j` on the grid.
    /// The coefficient span must be shorter than the grid.
    pub fn evaluate(&self, lo: i64, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() > self.n {
            return Err(NlftError::Aliasing {
                lo,
                hi: lo + coeffs.len() as i64 - 1,
                grid: self.n,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (j, &c) in coeffs.iter().enumerate() {
            buf[self.bin(lo + j as i64)] += c;
        }
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    pub fn samples(&self, s: &CoefficientSequence) -> Result<GridFunction> {
        Ok(GridFunction::from_raw(self.evaluate(s.lo(), s.coeffs())?))
    }

    /// All `N` discrete Fourier coefficients, bin `k` holding index `k mod N`.
    pub fn spectrum(&self, samples: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.n, "grid size mismatch");
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Reads the coefficients with indices in `[lo, hi]` out of a spectrum.
    pub fn read_window(&self, spectrum: &[Complex64], lo: i64, hi: i64) -> Result<Vec<Complex64>> {
        if hi < lo {
            return Ok(Vec::new());
        }
        if (hi - lo) as usize >= self.n {
            return Err(NlftError::Aliasing { lo, hi, grid: self.n });
        }
        Ok((lo..=hi).map(|k| spectrum[self.bin(k)]).collect())
    }

    /// Coefficients on `[lo, hi]` of the function sampled by `samples`.
    pub fn coefficients(&self, samples: &[Complex64], lo: i64, hi: i64) -> Result<CoefficientSequence> {
        let spectrum = self.spectrum(samples);
        Ok(CoefficientSequence::from_raw(lo, self.read_window(&spectrum, lo, hi)?))
    }
}

/// Samples `s` on the `N`-point grid. Requires `N >= 4 (width + 1)`.
pub fn to_grid(s: &CoefficientSequence, n: usize) -> Result<GridFunction> {
    let transform = GridTransform::new(n)?;
    let required = 4 * (s.width() + 1);
    if n < required {
        return Err(NlftError::GridTooSmall {
            grid: n,
            width: s.width(),
            required,
        });
    }
    transform.samples(s)
}

/// Coefficients of `g` restricted to `[lo, hi]` (the projection `P_[lo,hi]`).
pub fn from_grid(g: &GridFunction, lo: i64, hi: i64) -> Result<CoefficientSequence> {
    GridTransform::new(g.n_points())?.coefficients(g.samples(), lo, hi)
}

/// Coefficients of `1/s` on `[lo, hi]`, computed by pointwise inversion on the
/// grid.
#[derive(Debug, Clone)]
pub struct Reciprocal {
    pub coeffs: CoefficientSequence,
    /// `max |s (1/s) - 1|` on the grid, with `1/s` truncated to the window.
    pub residual: f64,
    /// `sum |c_k|` over the grid coefficients outside the window.
    pub tail_mass: f64,
}

pub fn reciprocal_on_grid(
    s: &CoefficientSequence,
    n: usize,
    lo: i64,
    hi: i64,
    delta: f64,
) -> Result<Reciprocal> {
    let transform = GridTransform::new(n)?;
    if s.width() >= n {
        return Err(NlftError::GridTooSmall {
            grid: n,
            width: s.width(),
            required: s.width() + 1,
        });
    }
    let values = transform.samples(s)?;
    let min = values.min_abs();
    if !(min >= delta) {
        return Err(NlftError::VanishingSymbol { min, delta });
    }
    let inv: Vec<Complex64> = values.samples().iter().map(|v| v.inv()).collect();
    let spectrum = transform.spectrum(&inv);
    let coeffs = CoefficientSequence::from_raw(lo, transform.read_window(&spectrum, lo, hi)?);
    let total: f64 = spectrum.iter().map(|c| c.norm()).sum();
    let tail_mass = (total - coeffs.l1_norm()).max(0.0);
    let truncated = transform.samples(&coeffs)?;
    let residual = values
        .samples()
        .iter()
        .zip(truncated.samples())
        .fold(0.0f64, |m, (a, b)| m.max((a * b - 1.0).norm()));
    Ok(Reciprocal {
        coeffs,
        residual,
        tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn to_grid_examples() {
        let g = to_grid(&CoefficientSequence::empty(), 8).unwrap();
        assert!(g.samples().iter().all(|v| v.norm() == 0.0));

        let g = to_grid(&CoefficientSequence::constant(c(1.0, 0.0)), 8).unwrap();
        assert!(g.samples().iter().all(|v| (v - 1.0).norm() < 1e-15));

        let g = to_grid(&CoefficientSequence::monomial(1, c(1.0, 0.0)), 4).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (v, e) in g.samples().iter().zip(expected) {
            assert!((v - e).norm() < 1e-15);
        }
    }

    #[test]
    fn to_grid_rejects_small_or_bad_grid() {
        let s = CoefficientSequence::from_real(0, &[1.0, 2.0, 3.0]);
        assert!(matches!(to_grid(&s, 8), Err(NlftError::GridTooSmall { .. })));
        assert!(matches!(to_grid(&s, 24), Err(NlftError::InvalidGridSize(24))));
        assert!(to_grid(&s, 16).is_ok());
    }

    #[test]
    fn from_grid_projects() {
        let s = CoefficientSequence::from_real(0, &[0.0, 1.0, 1.0]);
        let g = to_grid(&s, 16).unwrap();
        let p = from_grid(&g, 0, 1).unwrap().clamped(1e-14);
        assert_eq!(p.support(), Some((1, 1)));
        assert!((p.coeff(1) - 1.0).norm() < 1e-15);

        let s = CoefficientSequence::from_real(-1, &[1.0, 1.0]);
        let g = to_grid(&s, 8).unwrap();
        let p = from_grid(&g, 0, 0).unwrap();
        assert!((p.coeff(0) - 1.0).norm() < 1e-15);

        assert!(matches!(from_grid(&g, 0, 8), Err(NlftError::Aliasing { .. })));
    }

    #[test]
    fn reciprocal_examples() {
        let r = reciprocal_on_grid(&CoefficientSequence::constant(c(2.0, 0.0)), 8, 0, 0, 1e-6).unwrap();
        assert!((r.coeffs.coeff(0) - 0.5).norm() < 1e-15);

        let s = CoefficientSequence::from_real(0, &[1.0, -0.25]);
        let r = reciprocal_on_grid(&s, 64, 0, 20, 1e-6).unwrap();
        for k in 0..=20 {
            assert!((r.coeffs.coeff(k) - 0.25f64.powi(k as i32)).norm() < 1e-14, "k = {k}");
        }
        assert!(r.tail_mass < 1e-12);

        let s = CoefficientSequence::from_real(0, &[1.0, -1.0]);
        assert!(matches!(
            reciprocal_on_grid(&s, 64, 0, 20, 1e-6),
            Err(NlftError::VanishingSymbol { .. })
        ));
    }

    #[test]
    fn default_grid() {
        assert_eq!(default_grid_size(0), 8);
        assert_eq!(default_grid_size(1), 16);
        assert_eq!(default_grid_size(32), 512);
    }
}
