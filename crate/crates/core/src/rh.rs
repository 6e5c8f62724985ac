//! Truncated Riemann-Hilbert systems and layer stripping (the inverse
//! transform).
//!
//! For a truncation index `n` the unknowns are `x1 = A~_n*` on the window
//! `[0, W)` and `x2 = B~_n` on `(n - W, n]`, and the system reads
//!
//! ```text
//! x1 + P_+ ((b*/a) x2)      = 1
//! x2 - P_{<=n} ((b/a*) x1)  = 0
//! ```
//!
//! with `A~_n = a_n*(0) a_n` and `B~_n = a_n*(0) b_n`. Since `b/a*` is
//! supported on `[lo(b), inf)`, the off-diagonal blocks only couple indices
//! `0..=n - lo(b)` of `x1` with `lo(b)..=n` of `x2`. The operator is applied
//! through the exact Toeplitz coefficients of `b/a*` on that range.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{NlftError, Result};
use crate::forward::nlft_forward;
use crate::grid::{default_grid_size, GridTransform};
use crate::krylov::{gmres, GmresOptions};
use crate::pair::NlftPair;
use crate::sequence::{CoefficientSequence, IndexWindow};
use crate::spectral::{is_outer, outer_complement, ratio_series, ratio_series_weighted_norm, MAX_GRID, OuterFactor};
use crate::weight::BeurlingWeight;

/// Largest imaginary part tolerated in `A~_n*(0)`.
pub const A0_IMAG_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `max(4 len(window) + len(b), n - lo(b) + 2)`.
pub fn default_bandwidth(b: &CoefficientSequence, window: IndexWindow, n: i64) -> usize {
    let base = 4 * window.len() + b.len();
    let needed = b.support().map_or(0, |(lo, _)| (n - lo + 2).max(0) as usize);
    base.max(needed).max(1)
}

#[derive(Debug, Clone)]
pub struct RhSystem {
    pair: NlftPair,
    n: i64,
    bandwidth: usize,
    /// Coefficients of `b/a*` on `[lo(b), n]`.
    symbol: CoefficientSequence,
}

impl RhSystem {
    /// Assembles the system at truncation index `n`. The caller is responsible
    /// for `a*` being outer; `a` must be supported on non-positive indices
    /// with `a*(0)` real and positive.
    pub fn new(pair: &NlftPair, n: i64, bandwidth: usize) -> Result<Self> {
        let a_star = pair.a_star().trimmed();
        match a_star.support() {
            Some((lo, _)) if lo >= 0 => {}
            _ => return Err(NlftError::InvalidInput("a must be supported on non-positive indices".into())),
        }
        let a0 = a_star.coeff(0);
        if !(a0.re > 0.0) || a0.im.abs() > A0_IMAG_TOL {
            return Err(NlftError::InvalidInput(format!("a*(0) = {a0} is not positive real")));
        }
        let symbol = ratio_series(&pair.b, &a_star, n)?;
        if let Some((lo, _)) = symbol.support() {
            let needed = (n - lo + 1).max(0) as usize;
            if bandwidth < needed {
                return Err(NlftError::InvalidInput(format!(
                    "bandwidth {bandwidth} cannot hold the coupled range of length {needed}"
                )));
            }
        }
        Ok(Self {
            pair: pair.clone(),
            n,
            bandwidth: bandwidth.max(1),
            symbol,
        })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn pair(&self) -> &NlftPair {
        &self.pair
    }

    /// The `P_+` window `[0, W)`.
    pub fn first_window(&self) -> IndexWindow {
        IndexWindow {
            lo: 0,
            hi: self.bandwidth as i64 - 1,
        }
    }

    /// The `P_{<=n}` window `(n - W, n]`.
    pub fn second_window(&self) -> IndexWindow {
        IndexWindow {
            lo: self.n - self.bandwidth as i64 + 1,
            hi: self.n,
        }
    }

    /// Coefficients of `b/a*` that enter the operator.
    pub fn symbol(&self) -> &CoefficientSequence {
        &self.symbol
    }

    /// Length of the unknown vector, `2W`.
    pub fn dim(&self) -> usize {
        2 * self.bandwidth
    }

    /// `out = M x` on the stacked vector `[x1; x2]`.
    pub fn apply_m_vec(&self, x: &[Complex64], out: &mut [Complex64]) {
        let w = self.bandwidth;
        out.iter_mut().for_each(|c| *c = ZERO);
        let Some((lo_s, _)) = self.symbol.support() else {
            return;
        };
        let base2 = self.n - w as i64 + 1;
        let s = self.symbol.coeffs();
        let (x1, x2) = x.split_at(w);
        let (y1, y2) = out.split_at_mut(w);
        for j in lo_s.max(base2)..=self.n {
            let jt = (j - base2) as usize;
            let imax = ((j - lo_s) as usize).min(w - 1);
            let mut acc2 = ZERO;
            let xj = x2[jt];
            for i in 0..=imax {
                let sk = s[(j - i as i64 - lo_s) as usize];
                y1[i] += sk.conj() * xj;
                acc2 += sk * x1[i];
            }
            y2[jt] = -acc2;
        }
    }

    /// `out = (I + M) x`.
    pub fn apply_vec(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.apply_m_vec(x, out);
        out.iter_mut().zip(x).for_each(|(o, xi)| *o += xi);
    }

    fn stack(&self, x1: &CoefficientSequence, x2: &CoefficientSequence) -> Result<Vec<Complex64>> {
        let (w1, w2) = (self.first_window(), self.second_window());
        for (x, win) in [(x1, w1), (x2, w2)] {
            if let Some((lo, hi)) = x.trimmed().support() {
                if lo < win.lo || hi > win.hi {
                    return Err(NlftError::InvalidInput(format!(
                        "vector supported on {lo}..{hi} lies outside window {win}"
                    )));
                }
            }
        }
        let mut v = x1.dense(w1.lo, w1.hi);
        v.extend(x2.dense(w2.lo, w2.hi));
        Ok(v)
    }

    fn unstack(&self, v: &[Complex64]) -> (CoefficientSequence, CoefficientSequence) {
        let w = self.bandwidth;
        (
            CoefficientSequence::from_raw(0, v[..w].to_vec()).trimmed(),
            CoefficientSequence::from_raw(self.second_window().lo, v[w..].to_vec()).trimmed(),
        )
    }

    /// `M (x1, x2)` for sequences supported in the two windows.
    pub fn apply_m(
        &self,
        x1: &CoefficientSequence,
        x2: &CoefficientSequence,
    ) -> Result<(CoefficientSequence, CoefficientSequence)> {
        let v = self.stack(x1, x2)?;
        let mut out = vec![ZERO; v.len()];
        self.apply_m_vec(&v, &mut out);
        Ok(self.unstack(&out))
    }

    /// `M (x1, x2)` computed by multiplying with `b*/a` and `b/a*` on an
    /// `n`-point grid, as an independent route to [`RhSystem::apply_m`].
    pub fn apply_m_on_grid(
        &self,
        x1: &CoefficientSequence,
        x2: &CoefficientSequence,
        n: usize,
    ) -> Result<(CoefficientSequence, CoefficientSequence)> {
        self.stack(x1, x2)?;
        let t = GridTransform::new(n)?;
        let a = t.samples(&self.pair.a)?;
        let b = t.samples(&self.pair.b)?;
        let s1 = t.samples(x1)?;
        let s2 = t.samples(x2)?;
        let mut p1 = Vec::with_capacity(n);
        let mut p2 = Vec::with_capacity(n);
        for j in 0..n {
            let (aj, bj) = (a.samples()[j], b.samples()[j]);
            p1.push(bj.conj() / aj * s2.samples()[j]);
            p2.push(-bj / aj.conj() * s1.samples()[j]);
        }
        let (w1, w2) = (self.first_window(), self.second_window());
        Ok((
            t.coefficients(&p1, w1.lo, w1.hi)?.trimmed(),
            t.coefficients(&p2, w2.lo, w2.hi)?.trimmed(),
        ))
    }

    /// `|<M x, y> + <x, M y>|` for stacked vectors.
    pub fn antisymmetry_defect(&self, x: &[Complex64], y: &[Complex64]) -> f64 {
        let mut mx = vec![ZERO; x.len()];
        let mut my = vec![ZERO; y.len()];
        self.apply_m_vec(x, &mut mx);
        self.apply_m_vec(y, &mut my);
        let ip = |u: &[Complex64], v: &[Complex64]| -> Complex64 { u.iter().zip(v).map(|(p, q)| p.conj() * q).sum() };
        (ip(&mx, y) + ip(x, &my)).norm()
    }

    fn gmres_options(&self, tol: f64) -> GmresOptions {
        GmresOptions {
            tol,
            max_iterations: 10 * self.dim(),
            restart: self.dim().min(500),
        }
    }

    /// Solves `(I + M) x = y` for `y` given on the two windows.
    pub fn solve(
        &self,
        y1: &CoefficientSequence,
        y2: &CoefficientSequence,
        tol: f64,
    ) -> Result<(CoefficientSequence, CoefficientSequence, f64)> {
        let rhs = self.stack(y1, y2)?;
        let out = gmres(|x, o| self.apply_vec(x, o), &rhs, self.gmres_options(tol))?;
        let (x1, x2) = self.unstack(&out.x);
        Ok((x1, x2, out.relative_residual))
    }
}

/// Solution of the system at one truncation index.
#[derive(Debug, Clone)]
pub struct RhSolution {
    pub n: i64,
    /// `a_n`, supported on non-positive indices.
    pub a: CoefficientSequence,
    pub b: CoefficientSequence,
    /// `a_n*(0) = sqrt(A~_n*(0))`.
    pub a_star_at_zero: f64,
    pub iterations: usize,
    /// Relative residual `||(I + M) x - e_0||`.
    pub residual: f64,
    /// `||x||_2`; the right-hand side has norm 1.
    pub solution_norm: f64,
}

impl RhSolution {
    /// `F_n = b_n^(n) / a_n*(0)`.
    pub fn layer_coefficient(&self) -> Complex64 {
        self.b.coeff(self.n) / self.a_star_at_zero
    }

    pub fn pair(&self) -> NlftPair {
        NlftPair {
            a: self.a.clone(),
            b: self.b.clone(),
            grid_residual: f64::NAN,
        }
    }
}

/// Solves `(I + M)(A~_n*, B~_n) = (1, 0)` and denormalizes.
pub fn rh_solve(sys: &RhSystem, tol: f64) -> Result<RhSolution> {
    let mut rhs = vec![ZERO; sys.dim()];
    rhs[0] = Complex64::new(1.0, 0.0);
    let out = gmres(|x, o| sys.apply_vec(x, o), &rhs, sys.gmres_options(tol))?;
    let solution_norm = out.x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let a0_sq = out.x[0];
    if !(a0_sq.re > 0.0) || a0_sq.im.abs() > A0_IMAG_TOL {
        return Err(NlftError::Consistency(format!(
            "A~_n*(0) = {a0_sq} at n = {} is not positive real",
            sys.n
        )));
    }
    let a0 = a0_sq.re.sqrt();
    let (x1, x2) = sys.unstack(&out.x);
    let mut a_star = x1.scale_real(1.0 / a0);
    let mut coeffs = a_star.coeffs().to_vec();
    if let Some(c) = coeffs.first_mut() {
        *c = Complex64::new(a0, 0.0);
    }
    a_star = CoefficientSequence::from_raw(a_star.lo(), coeffs);
    Ok(RhSolution {
        n: sys.n,
        a: a_star.star_reflect(),
        b: x2.scale_real(1.0 / a0),
        a_star_at_zero: a0,
        iterations: out.iterations,
        residual: out.relative_residual,
        solution_norm,
    })
}

/// Options shared by [`layer_strip`] and [`inverse_nlft`].
#[derive(Debug, Clone, Copy)]
pub struct InverseOptions {
    /// Starting grid for the outer factorization; `None` picks one from the
    /// width of `b`.
    pub grid: Option<usize>,
    pub delta: f64,
    pub solver_tol: f64,
    pub bandwidth: Option<usize>,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self {
            grid: None,
            delta: 1e-6,
            solver_tol: 1e-12,
            bandwidth: None,
        }
    }
}

/// Per-index solves of [`layer_strip`], in window order.
#[derive(Debug, Clone)]
pub struct LayerStrip {
    pub f: CoefficientSequence,
    /// Solutions for `n >= 0` belong to the pair itself; for `n < 0` they
    /// belong to the reflected pair at index `-n`.
    pub solutions: Vec<RhSolution>,
}

fn check_pair(pair: &NlftPair) -> Result<()> {
    let samples = 4 * pair.default_grid();
    if !is_outer(pair, samples)? {
        return Err(NlftError::NotOuter {
            winding: crate::spectral::winding_number(&pair.a_star(), crate::spectral::WINDING_RADIUS, samples)?,
            radius: crate::spectral::WINDING_RADIUS,
        });
    }
    Ok(())
}

/// Solves at one truncation index, using the reflected pair for `n < 0`.
fn solve_index(pair: &NlftPair, reflected: &NlftPair, window: IndexWindow, n: i64, opts: &InverseOptions) -> Result<RhSolution> {
    let (p, m) = if n >= 0 { (pair, n) } else { (reflected, -n) };
    let bandwidth = opts
        .bandwidth
        .unwrap_or_else(|| default_bandwidth(&p.b, window, m))
        .max(default_bandwidth(&p.b, IndexWindow { lo: 0, hi: -1 }, m));
    rh_solve(&RhSystem::new(p, m, bandwidth)?, opts.solver_tol)
}

/// Recovers `F_n = b_n^(n) / a_n*(0)` for every `n` in `window`, with one
/// independent solve per index (run in parallel). Entries with modulus below
/// `opts.solver_tol` are set to zero.
pub fn layer_strip_detailed(pair: &NlftPair, window: IndexWindow, opts: &InverseOptions) -> Result<LayerStrip> {
    check_pair(pair)?;
    let reflected = pair.reflected();
    let solutions: Vec<RhSolution> = window
        .indices()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| solve_index(pair, &reflected, window, n, opts))
        .collect::<Result<_>>()?;
    let values: Vec<Complex64> = solutions
        .iter()
        .map(|s| {
            let f = s.layer_coefficient();
            if f.norm() < opts.solver_tol {
                ZERO
            } else {
                f
            }
        })
        .collect();
    Ok(LayerStrip {
        f: CoefficientSequence::new(window.lo, values)?.trimmed(),
        solutions,
    })
}

pub fn layer_strip(pair: &NlftPair, window: IndexWindow, tol: f64) -> Result<CoefficientSequence> {
    let opts = InverseOptions {
        solver_tol: tol,
        ..InverseOptions::default()
    };
    Ok(layer_strip_detailed(pair, window, &opts)?.f)
}

#[derive(Debug, Clone)]
pub struct InverseResult {
    pub f: CoefficientSequence,
    pub factor: OuterFactor,
    /// Largest `||(I + M) x - e_0||` over the solves.
    pub max_solver_residual: f64,
    /// `max |b^(k) - b'^(k)|` where `b'` is the forward transform of `f`.
    pub round_trip_error: f64,
}

/// Outer completion of `b` followed by layer stripping on `window`.
pub fn inverse_nlft(b: &CoefficientSequence, window: IndexWindow, opts: &InverseOptions) -> Result<InverseResult> {
    let grid = opts.grid.unwrap_or_else(|| default_grid_size(b.width()));
    let factor = outer_complement(b, grid, None, opts.delta)?;
    let strip = layer_strip_detailed(&factor.pair, window, opts)?;
    let forward = nlft_forward(&strip.f)?;
    let round_trip_error = forward.b.max_abs_diff(b);
    Ok(InverseResult {
        max_solver_residual: strip.solutions.iter().fold(0.0, |m, s| m.max(s.residual)),
        f: strip.f,
        factor,
        round_trip_error,
    })
}

/// `||P_{>n}(b) / a*||_{A_w}`; the truncated operator is invertible with an
/// explicit bound whenever this is below `1/2`.
pub fn solvability_certificate(pair: &NlftPair, n: i64, w: &BeurlingWeight) -> Result<f64> {
    let tail = match pair.b.support() {
        Some((_, hi)) if hi > n => pair.b.restrict(n + 1, hi),
        _ => return Ok(0.0),
    };
    Ok(ratio_series_weighted_norm(&tail, &pair.a_star().trimmed(), w, 1e-15, MAX_GRID)?.0)
}

/// First `n` in `range` passing [`solvability_certificate`] `< 1/2`. The
/// certificate is a sufficient condition; the index is not claimed minimal
/// for invertibility.
pub fn first_certified_index(pair: &NlftPair, range: IndexWindow, w: &BeurlingWeight) -> Result<Option<i64>> {
    for n in range.indices() {
        if solvability_certificate(pair, n, w)? < 0.5 {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
