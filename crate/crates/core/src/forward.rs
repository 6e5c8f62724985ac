//! Forward transform of a finitely supported potential.
//!
//! The ordered product of the factors
//! `(1 + |F_k|^2)^(-1/2) [[1, F_k z^k], [-conj(F_k) z^(-k), 1]]`,
//! lower indices to the left, is accumulated one index at a time.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{NlftError, Result};
use crate::pair::NlftPair;
use crate::sequence::CoefficientSequence;

/// Coefficients below this modulus are treated as exact zeros after the
/// recursion.
pub const CLAMP_TOL: f64 = 1e-13;

/// Upper limit on the number of index tuples enumerated by
/// [`multilinear_term`].
pub const MULTILINEAR_LIMIT: u128 = 1_000_000;

/// Partial product `G_k = (a_k, b_k)` after all indices `<= k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionState {
    pub k: i64,
    pub a: CoefficientSequence,
    pub b: CoefficientSequence,
}

impl RecursionState {
    /// `G = (1, 0)` before index `k0`.
    pub fn initial(k0: i64) -> Self {
        Self {
            k: k0 - 1,
            a: CoefficientSequence::constant(Complex64::new(1.0, 0.0)),
            b: CoefficientSequence::empty(),
        }
    }

    /// Right-multiplies by the factor of index `k + 1` with value `f`.
    pub fn step(&mut self, f: Complex64) {
        let k = self.k + 1;
        if f.norm_sqr() > 0.0 {
            let s = 1.0 / (1.0 + f.norm_sqr()).sqrt();
            let a_next = &self.a - &self.b.shift(-k).scale(f.conj());
            let b_next = &self.b + &self.a.shift(k).scale(f);
            self.a = a_next.scale_real(s);
            self.b = b_next.scale_real(s);
        }
        self.k = k;
    }

    pub fn to_pair(&self) -> Result<NlftPair> {
        NlftPair::new(self.a.clamped(CLAMP_TOL), self.b.clamped(CLAMP_TOL), None)
    }
}

/// All partial products `(k, a_k, b_k)` for `k` across the support of `f`.
pub fn nlft_truncations(f: &CoefficientSequence) -> Vec<RecursionState> {
    let Some((lo, _)) = f.support() else {
        return Vec::new();
    };
    let mut state = RecursionState::initial(lo);
    f.iter()
        .map(|(_, v)| {
            state.step(v);
            state.clone()
        })
        .collect()
}

/// SU(2) nonlinear Fourier transform of `f`.
pub fn nlft_forward(f: &CoefficientSequence) -> Result<NlftPair> {
    let Some((lo, _)) = f.support() else {
        return Ok(NlftPair::identity());
    };
    let mut state = RecursionState::initial(lo);
    for (_, v) in f.iter() {
        state.step(v);
    }
    state.to_pair()
}

/// `prod_k (1 + |F_k|^2)^(-1/2)`, which equals `a*(0)`.
pub fn a_star_at_zero(f: &CoefficientSequence) -> f64 {
    f.coeffs()
        .iter()
        .map(|c| (1.0 + c.norm_sqr()).sqrt().recip())
        .product()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// The `n`-linear term `T_n(F, ..., F)`:
/// the sum over `j_1 < ... < j_n` of the product whose odd slots contribute
/// `F_j z^j` and even slots `-conj(F_j) z^(-j)`.
pub fn multilinear_term(n: usize, f: &CoefficientSequence) -> Result<CoefficientSequence> {
    if n == 0 {
        return Err(NlftError::InvalidInput("multilinear arity must be at least 1".into()));
    }
    let points: Vec<(i64, Complex64)> = f.iter().filter(|(_, c)| c.norm_sqr() > 0.0).collect();
    let count = binomial(points.len() as u128, n as u128);
    if count > MULTILINEAR_LIMIT {
        return Err(NlftError::TooLarge {
            count,
            limit: MULTILINEAR_LIMIT,
        });
    }
    let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
    enumerate(&points, n, 0, 0, Complex64::new(1.0, 0.0), 0, &mut acc);
    CoefficientSequence::from_entries(acc)
}

fn enumerate(
    points: &[(i64, Complex64)],
    n: usize,
    slot: usize,
    start: usize,
    value: Complex64,
    exponent: i64,
    acc: &mut BTreeMap<i64, Complex64>,
) {
    if slot == n {
        *acc.entry(exponent).or_default() += value;
        return;
    }
    let remaining = n - slot;
    for i in start..points.len().saturating_sub(remaining - 1) {
        let (j, fj) = points[i];
        // slot is 0-based, so even `slot` is an odd position in the product.
        let (factor, e) = if slot % 2 == 0 { (fj, j) } else { (-fj.conj(), -j) };
        enumerate(points, n, slot + 1, i + 1, value * factor, exponent + e, acc);
    }
}

/// `(sum_{2k <= max} T_2k, sum_{2k+1 <= max} T_{2k+1})` with `T_0 = 1`,
/// before multiplication by the scalar prefactor [`a_star_at_zero`].
pub fn multilinear_partial_sum(
    f: &CoefficientSequence,
    max_arity: usize,
) -> Result<(CoefficientSequence, CoefficientSequence)> {
    let mut even = CoefficientSequence::constant(Complex64::new(1.0, 0.0));
    let mut odd = CoefficientSequence::empty();
    let nonzero = f.nonzero_count();
    for n in 1..=max_arity.min(nonzero) {
        let term = multilinear_term(n, f)?;
        if n % 2 == 0 {
            even = &even + &term;
        } else {
            odd = &odd + &term;
        }
    }
    Ok((even.trimmed(), odd.trimmed()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_point() -> CoefficientSequence {
        CoefficientSequence::from_real(0, &[0.5, 0.5])
    }

    /// Multiplies explicit 2x2 factors at a point of the circle.
    fn matrix_product_at(f: &CoefficientSequence, z: Complex64) -> (Complex64, Complex64) {
        let mut m = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        for (k, fk) in f.iter() {
            let s = 1.0 / (1.0 + fk.norm_sqr()).sqrt();
            let zk = z.powi(k as i32);
            let g = [[c(s, 0.0), fk * zk * s], [-fk.conj() / zk * s, c(s, 0.0)]];
            let mut out = [[c(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = m[i][0] * g[0][j] + m[i][1] * g[1][j];
                }
            }
            m = out;
        }
        (m[0][0], m[0][1])
    }

    #[test]
    fn empty_potential_gives_identity() {
        let p = nlft_forward(&CoefficientSequence::empty()).unwrap();
        assert_eq!(p, NlftPair::identity());
        assert_eq!(a_star_at_zero(&CoefficientSequence::empty()), 1.0);
    }

    #[test]
    fn single_factor() {
        let p = nlft_forward(&CoefficientSequence::from_real(0, &[1.0])).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.a.coeff(0) - r).norm() < 1e-15);
        assert!((p.b.coeff(0) - r).norm() < 1e-15);
        assert!((a_star_at_zero(&CoefficientSequence::from_real(0, &[1.0])) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn two_point_worked_instance() {
        let p = nlft_forward(&two_point()).unwrap();
        assert!(p.a.max_abs_diff(&CoefficientSequence::from_real(-1, &[-0.2, 0.8])) < 1e-15);
        assert!(p.b.max_abs_diff(&CoefficientSequence::from_real(0, &[0.4, 0.4])) < 1e-15);
        assert!((a_star_at_zero(&two_point()) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn recursion_matches_explicit_matrix_product() {
        let f = CoefficientSequence::new(-2, vec![c(0.3, -0.1), c(0.0, 0.0), c(-0.2, 0.25), c(0.1, 0.4)]).unwrap();
        let p = nlft_forward(&f).unwrap();
        for j in 0..7 {
            let z = Complex64::from_polar(1.0, 0.37 + j as f64);
            let (a, b) = matrix_product_at(&f, z);
            assert!((p.a.eval(z) - a).norm() < 1e-14);
            assert!((p.b.eval(z) - b).norm() < 1e-14);
        }
    }

    #[test]
    fn multilinear_examples() {
        let t1 = multilinear_term(1, &two_point()).unwrap();
        assert!(t1.max_abs_diff(&CoefficientSequence::from_real(0, &[0.5, 0.5])) < 1e-15);

        let t3 = multilinear_term(3, &CoefficientSequence::from_real(4, &[0.7])).unwrap();
        assert!(t3.is_empty());

        let t2 = multilinear_term(2, &two_point()).unwrap();
        assert!(t2.max_abs_diff(&CoefficientSequence::from_real(-1, &[-0.25])) < 1e-15);

        assert!(multilinear_term(0, &two_point()).is_err());
    }

    #[test]
    fn multilinear_guard() {
        let f = CoefficientSequence::from_real(0, &vec![0.1; 60]);
        assert!(matches!(multilinear_term(10, &f), Err(NlftError::TooLarge { .. })));
    }

    #[test]
    fn partial_sums() {
        let (e, o) = multilinear_partial_sum(&CoefficientSequence::from_real(0, &[1.0]), 1).unwrap();
        assert_eq!(e, CoefficientSequence::constant(c(1.0, 0.0)));
        assert_eq!(o, CoefficientSequence::constant(c(1.0, 0.0)));

        let (e, o) = multilinear_partial_sum(&two_point(), 2).unwrap();
        assert!(e.max_abs_diff(&CoefficientSequence::from_real(-1, &[-0.25, 1.0])) < 1e-15);
        assert!(o.max_abs_diff(&CoefficientSequence::from_real(0, &[0.5, 0.5])) < 1e-15);
        let p = nlft_forward(&two_point()).unwrap();
        assert!(e.scale_real(0.8).max_abs_diff(&p.a) < 1e-15);

        let (e, o) = multilinear_partial_sum(&CoefficientSequence::empty(), 5).unwrap();
        assert_eq!(e, CoefficientSequence::constant(c(1.0, 0.0)));
        assert!(o.is_empty());
    }

    #[test]
    fn truncations_end_at_full_transform() {
        let f = CoefficientSequence::new(1, vec![c(0.2, 0.1), c(-0.3, 0.0), c(0.05, -0.2)]).unwrap();
        let states = nlft_truncations(&f);
        assert_eq!(states.len(), 3);
        assert_eq!(states[0].k, 1);
        let last = states.last().unwrap().to_pair().unwrap();
        assert_eq!(last, nlft_forward(&f).unwrap());
    }
}
