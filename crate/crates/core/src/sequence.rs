//! Compactly supported coefficient sequences.
//!
//! A [`CoefficientSequence`] stores the Laurent coefficients of a function on
//! the unit circle, or equally a potential `F = (F_n)`. Entry `j` of the
//! coefficient vector is the coefficient of `z^(lo + j)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{NlftError, Result};
use crate::weight::BeurlingWeight;

/// Closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexWindow {
    pub lo: i64,
    pub hi: i64,
}

impl IndexWindow {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(NlftError::InvalidInput(format!(
                "window lower bound {lo} exceeds upper bound {hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Number of indices in the window.
    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for IndexWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for IndexWindow {
    type Err = NlftError;

    /// Parses `m..M` (both ends inclusive).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || NlftError::InvalidInput(format!("expected window `m..M`, got `{s}`"));
        let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
        let lo = lo.trim().parse::<i64>().map_err(|_| bad())?;
        let hi = hi.trim().parse::<i64>().map_err(|_| bad())?;
        IndexWindow::new(lo, hi)
    }
}

/// Finite map `Z -> C` stored densely on `[lo, hi]`.
///
/// The empty sequence is canonical: no coefficients and `lo == 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientSequence {
    lo: i64,
    coeffs: Vec<Complex64>,
}

impl CoefficientSequence {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a sequence whose first coefficient sits at index `lo`.
    pub fn new(lo: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(NlftError::NonFinite("coefficient sequence"));
        }
        Ok(Self::from_raw(lo, coeffs))
    }

    pub(crate) fn from_raw(lo: i64, coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            Self::empty()
        } else {
            Self { lo, coeffs }
        }
    }

    /// Builds a sequence from `(index, value)` entries; repeated indices add up.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let entries: Vec<_> = entries.into_iter().collect();
        let Some(lo) = entries.iter().map(|e| e.0).min() else {
            return Ok(Self::empty());
        };
        let hi = entries.iter().map(|e| e.0).max().unwrap_or(lo);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (n, c) in entries {
            coeffs[(n - lo) as usize] += c;
        }
        Self::new(lo, coeffs)
    }

    /// Real-valued convenience constructor.
    pub fn from_real(lo: i64, values: &[f64]) -> Self {
        Self::from_raw(lo, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::from_raw(k, vec![c])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Inclusive `(lo, hi)` bounds of the stored support, `None` when empty.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_empty() {
            None
        } else {
            Some((self.lo, self.hi_unchecked()))
        }
    }

    pub fn window(&self) -> Option<IndexWindow> {
        self.support().map(|(lo, hi)| IndexWindow { lo, hi })
    }

    fn hi_unchecked(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    /// `hi - lo`, or 0 for the empty sequence.
    pub fn width(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at index `n` (zero outside the support).
    pub fn coeff(&self, n: i64) -> Complex64 {
        let j = n - self.lo;
        if j < 0 || j >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[j as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &c)| (self.lo + j as i64, c))
    }

    /// Number of nonzero entries.
    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|c| c.norm_sqr() > 0.0).count()
    }

    /// Drops exactly-zero leading and trailing entries.
    pub fn trimmed(&self) -> Self {
        let first = self.coeffs.iter().position(|c| c.norm_sqr() > 0.0);
        let Some(first) = first else {
            return Self::empty();
        };
        let last = self
            .coeffs
            .iter()
            .rposition(|c| c.norm_sqr() > 0.0)
            .unwrap_or(first);
        Self::from_raw(self.lo + first as i64, self.coeffs[first..=last].to_vec())
    }

    /// Sets entries with modulus below `tol` to zero, then trims.
    pub fn clamped(&self, tol: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| if c.norm() < tol { Complex64::new(0.0, 0.0) } else { c })
            .collect();
        Self::from_raw(self.lo, coeffs).trimmed()
    }

    /// Projection `P_I` onto the closed window `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let Some((slo, shi)) = self.support() else {
            return Self::empty();
        };
        let lo = lo.max(slo);
        let hi = hi.min(shi);
        if lo > hi {
            return Self::empty();
        }
        let a = (lo - self.lo) as usize;
        let b = (hi - self.lo) as usize;
        Self::from_raw(lo, self.coeffs[a..=b].to_vec())
    }

    /// Dense coefficient vector on `[lo, hi]`, zero-padded.
    pub fn dense(&self, lo: i64, hi: i64) -> Vec<Complex64> {
        (lo..=hi).map(|n| self.coeff(n)).collect()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_raw(self.lo, self.coeffs.iter().map(|&x| x * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self::from_raw(self.lo, self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_empty() {
            return Self::empty();
        }
        Self::from_raw(self.lo + k, self.coeffs.clone())
    }

    /// Holomorphic reflection `f*(z) = conj(f(1/conj z))`: conjugate and
    /// negate indices.
    pub fn star_reflect(&self) -> Self {
        let Some((_, hi)) = self.support() else {
            return Self::empty();
        };
        Self::from_raw(-hi, self.coeffs.iter().rev().map(|c| c.conj()).collect())
    }

    /// Substitution `z -> 1/z`: negate indices without conjugation.
    pub fn reverse_index(&self) -> Self {
        let Some((_, hi)) = self.support() else {
            return Self::empty();
        };
        Self::from_raw(-hi, self.coeffs.iter().rev().copied().collect())
    }

    /// Conjugates every coefficient in place of index.
    pub fn conj_coeffs(&self) -> Self {
        Self::from_raw(self.lo, self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Cauchy product of coefficient lists (pointwise product on the circle).
    pub fn convolve(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.len() + other.len() - 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for (j, &y) in other.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Self::from_raw(self.lo + other.lo, out)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        match (self.support(), other.support()) {
            (None, None) => Self::empty(),
            (Some(_), None) => self.clone(),
            (None, Some(_)) => other.scale_real(sign),
            (Some((a, b)), Some((c, d))) => {
                let lo = a.min(c);
                let hi = b.max(d);
                let coeffs = (lo..=hi)
                    .map(|n| self.coeff(n) + other.coeff(n) * sign)
                    .collect();
                Self::from_raw(lo, coeffs)
            }
        }
    }

    /// Largest coefficientwise difference, over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.combine(other, -1.0)
            .coeffs
            .iter()
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Plain `l^2` norm, equal to the `L^2` norm of the function on the circle
    /// with normalized measure.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `sum |s(n)| w(n)`, the `A_w` norm of the associated function.
    pub fn weighted_l1_norm(&self, w: &BeurlingWeight) -> f64 {
        self.iter().map(|(n, c)| c.norm() * w.eval(n)).sum()
    }

    /// `( sum (1 + n^2)^order |s(n)|^2 )^(1/2)`.
    ///
    /// The square root is taken, so this is a norm and equals
    /// `||J^order s||_2`.
    pub fn sobolev_norm(&self, order: f64) -> f64 {
        self.iter()
            .map(|(n, c)| (1.0 + (n * n) as f64).powf(order) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Bessel potential `J^order`: coefficient `n` scaled by `(1 + n^2)^(order/2)`.
    pub fn fractional_derivative(&self, order: f64) -> Self {
        Self::from_raw(
            self.lo,
            self.iter()
                .map(|(n, c)| c * (1.0 + (n * n) as f64).powf(order / 2.0))
                .collect(),
        )
    }

    /// Derivative in `theta`: coefficient `n` scaled by `i n`.
    pub fn derivative(&self) -> Self {
        Self::from_raw(
            self.lo,
            self.iter()
                .map(|(n, c)| c * Complex64::new(0.0, n as f64))
                .collect(),
        )
    }

    /// Evaluates the Laurent polynomial at a nonzero point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let Some((lo, _)) = self.support() else {
            return Complex64::new(0.0, 0.0);
        };
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        poly * z.powi(lo as i32)
    }
}

impl Add for &CoefficientSequence {
    type Output = CoefficientSequence;
    fn add(self, rhs: Self) -> CoefficientSequence {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &CoefficientSequence {
    type Output = CoefficientSequence;
    fn sub(self, rhs: Self) -> CoefficientSequence {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &CoefficientSequence {
    type Output = CoefficientSequence;
    fn mul(self, rhs: Self) -> CoefficientSequence {
        self.convolve(rhs)
    }
}

impl Neg for &CoefficientSequence {
    type Output = CoefficientSequence;
    fn neg(self) -> CoefficientSequence {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::BeurlingWeight;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn star_reflect_two_point_a() {
        let a = CoefficientSequence::from_real(-1, &[-0.2, 0.8]);
        let s = a.star_reflect();
        assert_eq!(s.support(), Some((0, 1)));
        assert_eq!(s.coeff(0), c(0.8, 0.0));
        assert_eq!(s.coeff(1), c(-0.2, 0.0));
        assert_eq!(s.star_reflect(), a);
    }

    #[test]
    fn star_reflect_conjugates_constant() {
        let s = CoefficientSequence::constant(c(0.3, -0.7));
        assert_eq!(s.star_reflect().coeff(0), c(0.3, 0.7));
    }

    #[test]
    fn convolve_examples() {
        let one_plus_z = CoefficientSequence::from_real(0, &[1.0, 1.0]);
        let one_minus_z = CoefficientSequence::from_real(0, &[1.0, -1.0]);
        let p = one_plus_z.convolve(&one_minus_z).trimmed();
        assert_eq!(p, CoefficientSequence::from_real(0, &[1.0, 0.0, -1.0]));
        assert!(one_plus_z.convolve(&CoefficientSequence::empty()).is_empty());

        let a = CoefficientSequence::from_real(-1, &[-0.2, 0.8]);
        let m = a.convolve(&a.star_reflect());
        let expected = CoefficientSequence::from_real(-1, &[-0.16, 0.68, -0.16]);
        assert!(m.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn norms() {
        let one = BeurlingWeight::one();
        let lin = BeurlingWeight::polynomial(1.0).unwrap();
        assert_eq!(CoefficientSequence::empty().weighted_l1_norm(&one), 0.0);
        let b = CoefficientSequence::from_real(0, &[0.4, 0.4]);
        assert!((b.weighted_l1_norm(&one) - 0.8).abs() < 1e-15);
        let z = CoefficientSequence::monomial(1, c(1.0, 0.0));
        assert!((z.weighted_l1_norm(&lin) - 2.0).abs() < 1e-15);

        assert_eq!(CoefficientSequence::empty().sobolev_norm(2.0), 0.0);
        assert_eq!(CoefficientSequence::constant(c(1.0, 0.0)).sobolev_norm(3.5), 1.0);
        assert!((z.sobolev_norm(1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fractional_derivative_examples() {
        let s = CoefficientSequence::new(-2, vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0)]).unwrap();
        assert_eq!(s.fractional_derivative(0.0), s);
        let z = CoefficientSequence::monomial(1, c(1.0, 0.0));
        assert!((z.fractional_derivative(1.0).coeff(1).re - 2f64.sqrt()).abs() < 1e-15);
        let back = s.fractional_derivative(1.7).fractional_derivative(-1.7);
        assert!(back.max_abs_diff(&s) < 1e-14);
    }

    #[test]
    fn restrict_and_trim() {
        let s = CoefficientSequence::from_real(-2, &[0.0, 1.0, 2.0, 3.0, 0.0]);
        assert_eq!(s.trimmed().support(), Some((-1, 1)));
        assert_eq!(s.restrict(0, 10), CoefficientSequence::from_real(0, &[2.0, 3.0, 0.0]));
        assert!(s.restrict(5, 10).is_empty());
        assert_eq!(CoefficientSequence::from_real(0, &[0.0, 0.0]).trimmed(), CoefficientSequence::empty());
        assert_eq!(s.clamped(1.5).support(), Some((0, 1)));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(CoefficientSequence::new(0, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(CoefficientSequence::new(0, vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn eval_laurent() {
        let s = CoefficientSequence::from_real(-1, &[-0.2, 0.8]);
        let z = c(0.0, 1.0);
        let expected = c(0.8, 0.0) - c(0.2, 0.0) / z;
        assert!((s.eval(z) - expected).norm() < 1e-15);
    }

    #[test]
    fn window_parse() {
        assert_eq!("-3..4".parse::<IndexWindow>().unwrap(), IndexWindow { lo: -3, hi: 4 });
        assert!("4..-3".parse::<IndexWindow>().is_err());
        assert!("4".parse::<IndexWindow>().is_err());
    }
}
