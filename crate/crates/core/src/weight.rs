//! Strong Beurling weights on the integers.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{NlftError, Result};

type Evaluator = Arc<dyn Fn(i64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    ConstantOne,
    Polynomial { alpha: f64 },
    Custom,
}

/// Symmetric, submultiplicative, subexponential weight `w: Z -> [1, inf)`.
///
/// Custom weights must be attested by the caller: subexponential growth
/// cannot be checked on finitely many points. Symmetry, submultiplicativity
/// and `w >= 1` are spot-checked by [`BeurlingWeight::spot_check`].
#[derive(Clone)]
pub struct BeurlingWeight {
    kind: WeightKind,
    evaluator: Evaluator,
}

impl BeurlingWeight {
    /// `w = 1`: the ordinary Wiener algebra.
    pub fn one() -> Self {
        Self {
            kind: WeightKind::ConstantOne,
            evaluator: Arc::new(|_| 1.0),
        }
    }

    /// `w(n) = (1 + |n|)^alpha`.
    pub fn polynomial(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(NlftError::InvalidWeight(format!(
                "polynomial exponent must be finite and nonnegative, got {alpha}"
            )));
        }
        Ok(Self {
            kind: WeightKind::Polynomial { alpha },
            evaluator: Arc::new(move |n| (1.0 + n.unsigned_abs() as f64).powf(alpha)),
        })
    }

    /// User-supplied weight. `attested` asserts the three Beurling
    /// conditions; without it the weight is refused.
    pub fn custom<F>(f: F, attested: bool) -> Result<Self>
    where
        F: Fn(i64) -> f64 + Send + Sync + 'static,
    {
        if !attested {
            return Err(NlftError::InvalidWeight(
                "custom weights require attestation of symmetry, submultiplicativity and subexponential growth"
                    .into(),
            ));
        }
        Ok(Self {
            kind: WeightKind::Custom,
            evaluator: Arc::new(f),
        })
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn eval(&self, n: i64) -> f64 {
        (self.evaluator)(n)
    }

    /// Checks `w(n) >= 1`, `w(-n) = w(n)` and `w(n+m) <= w(n) w(m)` for all
    /// `|n|, |m| <= radius`.
    pub fn spot_check(&self, radius: i64) -> Result<()> {
        let rel = 1e-12;
        for n in -radius..=radius {
            let wn = self.eval(n);
            if !(wn >= 1.0) || !wn.is_finite() {
                return Err(NlftError::InvalidWeight(format!("w({n}) = {wn} is not >= 1")));
            }
            if (wn - self.eval(-n)).abs() > rel * wn {
                return Err(NlftError::InvalidWeight(format!("w({n}) != w({})", -n)));
            }
            for m in -radius..=radius {
                let lhs = self.eval(n + m);
                let rhs = wn * self.eval(m);
                if lhs > rhs * (1.0 + rel) {
                    return Err(NlftError::InvalidWeight(format!(
                        "w({n} + {m}) = {lhs} exceeds w({n}) w({m}) = {rhs}"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BeurlingWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BeurlingWeight({self})")
    }
}

impl fmt::Display for BeurlingWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WeightKind::ConstantOne => write!(f, "one"),
            WeightKind::Polynomial { alpha } => write!(f, "poly:alpha={alpha}"),
            WeightKind::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for BeurlingWeight {
    type Err = NlftError;

    /// Accepts `one` or `poly:alpha=<x>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "one" {
            return Ok(Self::one());
        }
        if let Some(rest) = s.strip_prefix("poly:alpha=") {
            let alpha = rest
                .parse::<f64>()
                .map_err(|_| NlftError::InvalidWeight(format!("bad exponent in `{s}`")))?;
            return Self::polynomial(alpha);
        }
        Err(NlftError::InvalidWeight(format!(
            "unknown weight `{s}` (expected `one` or `poly:alpha=<x>`)"
        )))
    }
}
