//! JSON files for sequences, pairs and reports, and CSV decay tables.
//!
//! Doubles are written with 17 significant digits, which round-trips every
//! finite value exactly.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::error::{NlftError, Result};
use crate::estimates::{DecayRow, VerificationReport};
use crate::pair::NlftPair;
use crate::sequence::CoefficientSequence;

/// `{"support": [m, M], "coeffs": [[re, im], ...]}`; the empty sequence has
/// `"support": null` and no coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub support: Option<[i64; 2]>,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&CoefficientSequence> for SequenceFile {
    fn from(s: &CoefficientSequence) -> Self {
        Self {
            support: s.support().map(|(lo, hi)| [lo, hi]),
            coeffs: s.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<SequenceFile> for CoefficientSequence {
    type Error = NlftError;

    fn try_from(f: SequenceFile) -> Result<Self> {
        match f.support {
            None if f.coeffs.is_empty() => Ok(CoefficientSequence::empty()),
            None => Err(NlftError::InvalidInput("coefficients given without a support".into())),
            Some([lo, hi]) => {
                if hi < lo {
                    return Err(NlftError::InvalidInput(format!("support [{lo}, {hi}] is reversed")));
                }
                let expected = (hi - lo) as u64 + 1;
                if f.coeffs.len() as u64 != expected {
                    return Err(NlftError::InvalidInput(format!(
                        "support [{lo}, {hi}] needs {expected} coefficients, found {}",
                        f.coeffs.len()
                    )));
                }
                CoefficientSequence::new(lo, f.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub a: SequenceFile,
    pub b: SequenceFile,
    #[serde(default)]
    pub grid_residual: Option<f64>,
}

impl From<&NlftPair> for PairFile {
    fn from(p: &NlftPair) -> Self {
        Self {
            a: (&p.a).into(),
            b: (&p.b).into(),
            grid_residual: Some(p.grid_residual),
        }
    }
}

impl PairFile {
    /// Rebuilds the pair; the determinant residual is recomputed rather than
    /// trusted.
    pub fn into_pair(self) -> Result<NlftPair> {
        NlftPair::new(self.a.try_into()?, self.b.try_into()?, None)
    }
}

/// Compact JSON with 17 significant digits per double.
struct PreciseFormatter;

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PreciseFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| NlftError::InvalidInput(format!("serialization failed: {e}")))?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| NlftError::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| NlftError::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| NlftError::InvalidInput(format!("malformed {what}: {e}")))
}

pub fn sequence_to_json(s: &CoefficientSequence) -> Result<String> {
    to_json(&SequenceFile::from(s))
}

pub fn sequence_from_json(text: &str) -> Result<CoefficientSequence> {
    parse::<SequenceFile>(text, "sequence file")?.try_into()
}

pub fn pair_to_json(p: &NlftPair) -> Result<String> {
    to_json(&PairFile::from(p))
}

pub fn pair_from_json(text: &str) -> Result<NlftPair> {
    parse::<PairFile>(text, "pair file")?.into_pair()
}

pub fn read_sequence(path: &Path) -> Result<CoefficientSequence> {
    sequence_from_json(&read_text(path)?)
}

pub fn write_sequence(path: &Path, s: &CoefficientSequence) -> Result<()> {
    write_text(path, &sequence_to_json(s)?)
}

pub fn read_pair(path: &Path) -> Result<NlftPair> {
    pair_from_json(&read_text(path)?)
}

pub fn write_pair(path: &Path, p: &NlftPair) -> Result<()> {
    write_text(path, &pair_to_json(p)?)
}

/// Contents of a file that may hold either a sequence or a pair.
#[derive(Debug, Clone)]
pub enum InputFile {
    Sequence(CoefficientSequence),
    Pair(NlftPair),
}

pub fn read_input(path: &Path) -> Result<InputFile> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse(&text, "input file")?;
    if value.get("a").is_some() && value.get("b").is_some() {
        Ok(InputFile::Pair(pair_from_json(&text)?))
    } else {
        Ok(InputFile::Sequence(sequence_from_json(&text)?))
    }
}

pub fn report_to_json(report: &VerificationReport) -> Result<String> {
    to_json(report)
}

pub fn write_report(path: &Path, report: &VerificationReport) -> Result<()> {
    write_text(path, &report_to_json(report)?)
}

/// Columns `n, abs_F_n, first_order_rhs, truncation_error`; unavailable
/// values are left empty.
pub fn decay_csv(rows: &[DecayRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |v: f64| if v.is_finite() { format!("{v:.16e}") } else { String::new() };
    let err = |e: csv::Error| NlftError::InvalidInput(format!("csv: {e}"));
    w.write_record(["n", "abs_F_n", "first_order_rhs", "truncation_error"]).map_err(err)?;
    for r in rows {
        w.write_record([r.n.to_string(), fmt(r.abs_f), fmt(r.first_order_rhs), fmt(r.truncation_error)])
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| NlftError::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_decay_csv(path: &Path, rows: &[DecayRow]) -> Result<()> {
    write_text(path, &decay_csv(rows)?)
}
