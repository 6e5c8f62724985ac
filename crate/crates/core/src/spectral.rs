//! Outer completion of a target `b` and the multiplier symbol `b/a*`.
//!
//! Convention: `a*` is outer on the unit disk with `a*(0) > 0`, equivalently
//! `a` is outer on the exterior disk.

use num_complex::Complex64;

use crate::error::{NlftError, Result};
use crate::grid::GridTransform;
use crate::pair::{determinant_residual, NlftPair};
use crate::sequence::{CoefficientSequence, IndexWindow};
use crate::weight::BeurlingWeight;

/// Largest grid used when a computation is refined for accuracy.
pub const MAX_GRID: usize = 1 << 22;

/// Radius of the circle on which outerness is certified.
pub const WINDING_RADIUS: f64 = 0.999;

/// Every grid coefficient of `a*` beyond its degree bound must fall below
/// this before the factorization is accepted.
const EXCESS_TOL: f64 = 1e-15;

/// Residual threshold of the completed pair.
pub const FACTOR_RESIDUAL_TOL: f64 = 1e-10;

/// `[0, 4 width(b)]`.
pub fn default_outer_window(b: &CoefficientSequence) -> IndexWindow {
    IndexWindow {
        lo: 0,
        hi: 4 * b.width() as i64,
    }
}

#[derive(Debug, Clone)]
pub struct OuterFactor {
    pub pair: NlftPair,
    /// Grid size at which the factorization converged.
    pub grid_used: usize,
    /// Mass of the grid coefficients of `a*` outside the window.
    pub tail_mass: f64,
    /// Mass of the grid coefficients of `a*` beyond `width(b)`; zero in exact
    /// arithmetic.
    pub excess_mass: f64,
    pub winding: i64,
}

/// Completes `b` to a pair `(a, b)` with `a*` outer, `a*(0) > 0` and
/// `|a|^2 = 1 - |b|^2` on the circle.
///
/// `log a*` keeps the zero mode of `g = log(1 - |b|^2) / 2` and doubles its
/// positive modes. Starting at `n` points the grid is doubled until the
/// spurious coefficients of `a*` beyond `width(b)` are negligible.
pub fn outer_complement(
    b: &CoefficientSequence,
    n: usize,
    window: Option<IndexWindow>,
    delta: f64,
) -> Result<OuterFactor> {
    let window = window.unwrap_or_else(|| default_outer_window(b));
    if window.lo != 0 {
        return Err(NlftError::InvalidInput(format!(
            "outer factor window must start at 0, got {window}"
        )));
    }
    let degree = b.width() as i64;
    let mut grid = n;
    let (spectrum, transform) = loop {
        let t = GridTransform::new(grid)?;
        if (b.width() + 1) * 2 > grid || (window.len()) > grid / 2 {
            grid *= 2;
            if grid > MAX_GRID {
                return Err(NlftError::Aliasing {
                    lo: window.lo,
                    hi: window.hi,
                    grid,
                });
            }
            continue;
        }
        let spectrum = log_projected_factor(b, &t, delta)?;
        let excess = (0..grid as i64)
            .map(|k| if k > grid as i64 / 2 { k - grid as i64 } else { k })
            .filter(|&k| k < 0 || k > degree)
            .map(|k| spectrum[k.rem_euclid(grid as i64) as usize].norm())
            .fold(0.0f64, f64::max);
        if excess < EXCESS_TOL || grid * 2 > MAX_GRID {
            break (spectrum, t);
        }
        grid *= 2;
    };

    let mut a_star = CoefficientSequence::from_raw(
        window.lo,
        transform.read_window(&spectrum, window.lo, window.hi)?,
    );
    let total: f64 = spectrum.iter().map(|c| c.norm()).sum();
    let tail_mass = (total - a_star.l1_norm()).max(0.0);
    let excess_mass = (0..grid as i64)
        .map(|k| if k > grid as i64 / 2 { k - grid as i64 } else { k })
        .filter(|&k| k < 0 || k > degree)
        .map(|k| spectrum[k.rem_euclid(grid as i64) as usize].norm())
        .sum();
    // a*(0) = exp(mean g) is real and positive.
    let mut coeffs = a_star.coeffs().to_vec();
    coeffs[0] = Complex64::new(coeffs[0].re, 0.0);
    a_star = CoefficientSequence::from_raw(0, coeffs);

    let winding = winding_number(&a_star, WINDING_RADIUS, 4 * n)?;
    if winding != 0 {
        return Err(NlftError::NotOuter {
            winding,
            radius: WINDING_RADIUS,
        });
    }
    let a = a_star.star_reflect();
    let residual_grid = n.max(crate::grid::default_grid_size(window.len() + b.width()));
    let residual = determinant_residual(&a, b, residual_grid)?;
    if residual > FACTOR_RESIDUAL_TOL {
        return Err(NlftError::FactorResidual {
            residual,
            tolerance: FACTOR_RESIDUAL_TOL,
        });
    }
    Ok(OuterFactor {
        pair: NlftPair {
            a,
            b: b.clone(),
            grid_residual: residual,
        },
        grid_used: grid,
        tail_mass,
        excess_mass,
        winding,
    })
}

/// Grid spectrum of `exp(P(g))` where `P` is the Herglotz projection.
fn log_projected_factor(b: &CoefficientSequence, t: &GridTransform, delta: f64) -> Result<Vec<Complex64>> {
    let n = t.n();
    let values = t.samples(b)?;
    let max_abs = values.max_abs();
    if max_abs > 1.0 - delta {
        return Err(NlftError::SzegoMargin { max_abs, delta });
    }
    let g: Vec<Complex64> = values
        .samples()
        .iter()
        .map(|v| Complex64::new(0.5 * (1.0 - v.norm_sqr()).ln(), 0.0))
        .collect();
    let mut h = t.spectrum(&g);
    for (k, c) in h.iter_mut().enumerate() {
        if k == 0 || k == n / 2 {
            continue;
        } else if k < n / 2 {
            *c *= 2.0;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let log_a_star = t.evaluate(0, &h.iter().take(n / 2 + 1).copied().collect::<Vec<_>>())?;
    let a_star: Vec<Complex64> = log_a_star.iter().map(|v| v.exp()).collect();
    Ok(t.spectrum(&a_star))
}

/// Winding number of `p(r e^(i theta))` around 0, using `samples` points.
pub fn winding_number(p: &CoefficientSequence, radius: f64, samples: usize) -> Result<i64> {
    let Some((lo, _)) = p.support() else {
        return Ok(0);
    };
    let samples = samples.max(8 * (p.width() + 1)).next_power_of_two();
    let t = GridTransform::new(samples)?;
    let scaled: Vec<Complex64> = p
        .iter()
        .map(|(k, c)| c * radius.powi(k as i32))
        .collect();
    let values = t.evaluate(lo, &scaled)?;
    if values.iter().any(|v| v.norm() == 0.0) {
        return Err(NlftError::NotOuter { winding: i64::MAX, radius });
    }
    let total: f64 = (0..samples)
        .map(|j| (values[(j + 1) % samples] / values[j]).arg())
        .sum();
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

/// Winding-number certificate that `a*` has no zeros in `|z| <= 0.999`.
pub fn is_outer(pair: &NlftPair, samples: usize) -> Result<bool> {
    Ok(winding_number(&pair.a_star(), WINDING_RADIUS, samples)? == 0)
}

#[derive(Debug, Clone)]
pub struct SymbolRatio {
    pub coeffs: CoefficientSequence,
    /// Mass of grid coefficients outside the window.
    pub tail_mass: f64,
    /// Largest grid coefficient outside the window.
    pub tail_max: f64,
    pub grid_used: usize,
}

/// Coefficients of `b/a*` on `window`, by division on the `n`-point grid.
/// Defaults to the window `[lo(b), lo(b) + n/2 - 1]`.
pub fn symbol_ratio(pair: &NlftPair, n: usize, window: Option<IndexWindow>, delta: f64) -> Result<SymbolRatio> {
    let t = GridTransform::new(n)?;
    let lo_b = pair.b.support().map_or(0, |s| s.0);
    let window = window.unwrap_or(IndexWindow {
        lo: lo_b,
        hi: lo_b + n as i64 / 2 - 1,
    });
    let a = t.samples(&pair.a)?;
    let min = a.min_abs();
    if !(min >= delta) {
        return Err(NlftError::VanishingSymbol { min, delta });
    }
    let b = t.samples(&pair.b)?;
    let ratio: Vec<Complex64> = b
        .samples()
        .iter()
        .zip(a.samples())
        .map(|(y, x)| y / x.conj())
        .collect();
    let spectrum = t.spectrum(&ratio);
    let coeffs = CoefficientSequence::from_raw(window.lo, t.read_window(&spectrum, window.lo, window.hi)?);
    let total: f64 = spectrum.iter().map(|c| c.norm()).sum();
    let inside: std::collections::HashSet<usize> = window
        .indices()
        .map(|k| k.rem_euclid(n as i64) as usize)
        .collect();
    let tail_max = spectrum
        .iter()
        .enumerate()
        .filter(|(j, _)| !inside.contains(j))
        .fold(0.0f64, |m, (_, c)| m.max(c.norm()));
    Ok(SymbolRatio {
        tail_mass: (total - coeffs.l1_norm()).max(0.0),
        tail_max,
        coeffs,
        grid_used: n,
    })
}

/// [`symbol_ratio`] on the default window, doubling the grid from `n` until
/// every coefficient outside the window is below `tol` relative to the
/// largest one inside (or [`MAX_GRID`] is reached).
pub fn resolved_symbol_ratio(pair: &NlftPair, n: usize, delta: f64, tol: f64) -> Result<SymbolRatio> {
    let mut grid = n.max(pair.default_grid());
    loop {
        let r = symbol_ratio(pair, grid, None, delta)?;
        if r.tail_max <= tol * r.coeffs.max_abs().max(1.0) || grid * 2 > MAX_GRID {
            return Ok(r);
        }
        grid *= 2;
    }
}

/// Power-series coefficients of `num / den` on `[lo(num), hi]`, where `den`
/// is analytic in the disk (support in `[0, D]`) with `den(0) != 0`.
///
/// Exact up to rounding; stable when `den` has no zeros in the closed disk.
pub fn ratio_series(num: &CoefficientSequence, den: &CoefficientSequence, hi: i64) -> Result<CoefficientSequence> {
    let Some((lo, _)) = num.support() else {
        return Ok(CoefficientSequence::empty());
    };
    let den = den.trimmed();
    match den.support() {
        Some((0, _)) if den.coeff(0).norm() > 0.0 => {}
        _ => {
            return Err(NlftError::InvalidInput(
                "series denominator must be analytic with nonzero constant term".into(),
            ))
        }
    }
    if hi < lo {
        return Ok(CoefficientSequence::empty());
    }
    let d0 = den.coeff(0);
    let dc = den.coeffs();
    let len = (hi - lo + 1) as usize;
    let mut out: Vec<Complex64> = Vec::with_capacity(len);
    for i in 0..len {
        let mut acc = num.coeff(lo + i as i64);
        for j in 1..dc.len().min(i + 1) {
            acc -= dc[j] * out[i - j];
        }
        out.push(acc / d0);
    }
    CoefficientSequence::new(lo, out)
}

/// Weighted `l^1` norm of the power series `num / den` (same hypotheses as
/// [`ratio_series`]), extending the series until doubling its length changes
/// the sum by less than `tol` relative, or `max_len` terms are reached.
///
/// Returns the norm and the number of terms used.
pub fn ratio_series_weighted_norm(
    num: &CoefficientSequence,
    den: &CoefficientSequence,
    w: &BeurlingWeight,
    tol: f64,
    max_len: usize,
) -> Result<(f64, usize)> {
    let Some((lo, _)) = num.support() else {
        return Ok((0.0, 0));
    };
    let den = den.trimmed();
    if !matches!(den.support(), Some((0, _))) || den.coeff(0).norm() == 0.0 {
        return Err(NlftError::InvalidInput(
            "series denominator must be analytic with nonzero constant term".into(),
        ));
    }
    let d0 = den.coeff(0);
    let dc = den.coeffs();
    let mut out: Vec<Complex64> = Vec::new();
    let mut sum = 0.0;
    let mut target = (num.len() + dc.len()).next_power_of_two().max(64);
    loop {
        let before = sum;
        while out.len() < target {
            let i = out.len();
            let mut acc = num.coeff(lo + i as i64);
            for j in 1..dc.len().min(i + 1) {
                acc -= dc[j] * out[i - j];
            }
            let v = acc / d0;
            sum += v.norm() * w.eval(lo + i as i64);
            out.push(v);
        }
        if !sum.is_finite() {
            return Err(NlftError::NonFinite("series quotient"));
        }
        if sum - before <= tol * sum || target >= max_len {
            return Ok((sum, out.len()));
        }
        target = (target * 2).min(max_len);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::nlft_forward;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_b_gives_constant_a() {
        let b = CoefficientSequence::constant(c(0.3, 0.4));
        let f = outer_complement(&b, 16, None, 1e-6).unwrap();
        let a = f.pair.a.clamped(1e-14);
        assert_eq!(a.support(), Some((0, 0)));
        assert!((a.coeff(0) - 0.75f64.sqrt()).norm() < 1e-14);
    }

    #[test]
    fn monomial_b_gives_constant_a() {
        let r = 0.6;
        let b = CoefficientSequence::monomial(3, c(0.0, r));
        let f = outer_complement(&b, 16, None, 1e-6).unwrap();
        let a = f.pair.a.clamped(1e-14);
        assert!((a.coeff(0) - (1.0f64 - r * r).sqrt()).norm() < 1e-14);
        assert_eq!(a.support(), Some((0, 0)));
    }

    #[test]
    fn two_point_completion() {
        let b = CoefficientSequence::from_real(0, &[0.4, 0.4]);
        let f = outer_complement(&b, 16, None, 1e-6).unwrap();
        let expected = CoefficientSequence::from_real(0, &[0.8, -0.2]);
        assert!(f.pair.a_star().max_abs_diff(&expected) < 1e-13);
        assert!(f.pair.grid_residual < 1e-13);
        assert_eq!(f.winding, 0);
    }

    #[test]
    fn szego_margin_violation() {
        let b = CoefficientSequence::from_real(0, &[0.5, 0.5]);
        assert!(matches!(
            outer_complement(&b, 16, None, 1e-6),
            Err(NlftError::SzegoMargin { .. })
        ));
    }

    #[test]
    fn matches_outer_forward_transforms() {
        let f = CoefficientSequence::new(-3, vec![c(0.2, -0.1), c(0.1, 0.25), c(-0.3, 0.0), c(0.05, 0.2), c(0.0, -0.15)])
            .unwrap();
        let p = nlft_forward(&f).unwrap();
        assert!(is_outer(&p, 256).unwrap());
        let o = outer_complement(&p.b, 64, None, 1e-6).unwrap();
        assert!(o.pair.a.max_abs_diff(&p.a) < 1e-12);
    }

    #[test]
    fn winding_detects_inner_zero() {
        // (z - 0.5) has a zero inside the disk.
        let p = CoefficientSequence::from_real(0, &[-0.5, 1.0]);
        assert_eq!(winding_number(&p, 0.999, 64).unwrap(), 1);
        let q = CoefficientSequence::from_real(0, &[1.0, -0.5]);
        assert_eq!(winding_number(&q, 0.999, 64).unwrap(), 0);
    }

    #[test]
    fn symbol_ratio_examples() {
        let id = NlftPair::identity();
        let r = symbol_ratio(&id, 16, None, 1e-6).unwrap();
        assert_eq!(r.coeffs.max_abs(), 0.0);

        let cst = c(0.6, 0.0);
        let p = NlftPair::new(CoefficientSequence::constant(c(0.8, 0.0)), CoefficientSequence::constant(cst), None).unwrap();
        let r = symbol_ratio(&p, 16, None, 1e-6).unwrap();
        assert!((r.coeffs.coeff(0) - 0.75).norm() < 1e-15);

        let p = nlft_forward(&CoefficientSequence::from_real(0, &[0.5, 0.5])).unwrap();
        let r = symbol_ratio(&p, 128, Some(IndexWindow { lo: 0, hi: 40 }), 1e-6).unwrap();
        assert!((r.coeffs.coeff(0) - 0.5).norm() < 1e-15);
        for k in 1..=40 {
            let expected = 0.625 * 0.25f64.powi(k - 1);
            assert!((r.coeffs.coeff(k as i64) - expected).norm() < 1e-15, "k = {k}");
        }
        assert!(r.tail_mass < 1e-10);
        let r = resolved_symbol_ratio(&p, 16, 1e-6, 1e-16).unwrap();
        assert!((r.coeffs.l1_norm() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn series_division_matches_grid_division() {
        let p = nlft_forward(&CoefficientSequence::from_real(0, &[0.5, 0.5])).unwrap();
        let s = ratio_series(&p.b, &p.a_star(), 30).unwrap();
        let (norm, _) = ratio_series_weighted_norm(&p.b, &p.a_star(), &BeurlingWeight::one(), 1e-16, 1 << 16).unwrap();
        assert!((norm - 4.0 / 3.0).abs() < 1e-14);
        let g = symbol_ratio(&p, 256, Some(IndexWindow { lo: 0, hi: 30 }), 1e-6).unwrap();
        assert!(s.max_abs_diff(&g.coeffs) < 1e-15);
    }
}
