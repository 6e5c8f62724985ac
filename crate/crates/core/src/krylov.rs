//! Restarted GMRES for complex linear systems given only by their action.

use num_complex::Complex64;

use crate::error::{NlftError, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Relative residual target `||rhs - A x|| <= tol ||rhs||`.
    pub tol: f64,
    pub max_iterations: usize,
    pub restart: usize,
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// True relative residual of the returned `x`.
    pub relative_residual: f64,
}

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex Givens rotation `(c, s)` with `c` real, mapping `(f, g)` to `(r, 0)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    let (fa, ga) = (f.norm(), g.norm());
    if ga == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), f);
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga, Complex64::new(ga, 0.0));
    }
    let t = fa.hypot(ga);
    let phase = f / fa;
    let c = fa / t;
    let s = phase * g.conj() / t;
    (c, s, phase * t)
}

/// Solves `A x = rhs` from `x = 0`, with `apply(x, out)` writing `A x`.
pub fn gmres<F>(apply: F, rhs: &[Complex64], opts: GmresOptions) -> Result<GmresOutcome>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = rhs.len();
    let zero = Complex64::new(0.0, 0.0);
    let rhs_norm = norm(rhs);
    let mut x = vec![zero; n];
    if rhs_norm == 0.0 {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let m = opts.restart.clamp(1, n.max(1));
    let mut ax = vec![zero; n];
    let mut iterations = 0;
    let mut r: Vec<Complex64> = rhs.to_vec();

    loop {
        let beta = norm(&r);
        if beta <= opts.tol * rhs_norm {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(NlftError::Convergence {
                iterations,
                residual: beta / rhs_norm,
                tol: opts.tol,
            });
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|c| c / beta).collect()];
        // Columns of the Hessenberg matrix, already rotated.
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![Complex64::new(beta, 0.0)];
        let mut w = vec![zero; n];
        for j in 0..m {
            apply(&basis[j], &mut w);
            let mut col = Vec::with_capacity(j + 2);
            // Modified Gram-Schmidt, twice for stability.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(wk, vk)| *wk -= hij * vk);
                    if col.len() <= i {
                        col.push(hij);
                    } else {
                        col[i] += hij;
                    }
                }
            }
            let hnext = norm(&w);
            col.push(Complex64::new(hnext, 0.0));
            for (i, &(c, s)) in rotations.iter().enumerate() {
                let (a, b) = (col[i], col[i + 1]);
                col[i] = c * a + s * b;
                col[i + 1] = -s.conj() * a + c * b;
            }
            let (c, s, rr) = givens(col[j], col[j + 1]);
            col[j] = rr;
            col[j + 1] = zero;
            rotations.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            h.push(col);
            iterations += 1;
            let estimate = g[j + 1].norm();
            if estimate <= opts.tol * rhs_norm * 0.5 || hnext == 0.0 || iterations >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|c| c / hnext).collect());
        }
        // Back substitution on the triangular factor.
        let k = h.len();
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[l][i] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        for (l, yl) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[l]).for_each(|(xi, vi)| *xi += yl * vi);
        }
        apply(&x, &mut ax);
        r.iter_mut()
            .zip(rhs.iter().zip(&ax))
            .for_each(|(ri, (b, a))| *ri = b - a);
    }
    Ok(GmresOutcome {
        relative_residual: norm(&r) / rhs_norm,
        x,
        iterations,
    })
}
