//! Super-compactification notation.
//!
//! Position `k` of an SCN vector holds the largest prime index whose
//! primorial divides `n` exactly `k` times; positions where no primorial
//! stops are zero. Equivalently, SCN is the conjugate of the exponent vector
//! with repeated levels zeroed:
//!
//! ```text
//! {1} = 2    {0,0,1} = 2^3    {3} = 30    {4,0,1} = 840
//! ```
//!
//! Text form: `{` entry (`,` entry)* `}`, decimal entries without leading
//! zeros, no whitespace on output. Spaces after commas are accepted on input.
//! The number 1 is `{}`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScnError {
    #[error("malformed SCN: {0}")]
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> ScnError {
    ScnError::Malformed(msg.into())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ScnVector {
    entries: Vec<u32>,
}

impl ScnVector {
    /// Validate canonical form: last entry nonzero, nonzero entries strictly
    /// decreasing with position.
    pub fn new(entries: Vec<u32>) -> Result<Self, ScnError> {
        if entries.last() == Some(&0) {
            return Err(malformed("trailing zero entry"));
        }
        let mut prev: Option<(usize, u32)> = None;
        for (k, &s) in entries.iter().enumerate() {
            if s == 0 {
                continue;
            }
            if let Some((pk, ps)) = prev {
                if s >= ps {
                    return Err(malformed(format!(
                        "entry {s} at position {} does not decrease from {ps} at position {}",
                        k + 1,
                        pk + 1
                    )));
                }
            }
            prev = Some((k, s));
        }
        Ok(ScnVector { entries })
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }
}

pub fn scn_encode(sig: &Signature) -> ScnVector {
    let levels = sig.levels();
    let entries = levels
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let next = levels.get(k + 1).copied().unwrap_or(0);
            if c > next {
                c
            } else {
                0
            }
        })
        .collect();
    ScnVector { entries }
}

pub fn scn_decode(v: &ScnVector) -> Signature {
    // level k holds max{ s_j : j ≥ k }
    let mut levels = v.entries.clone();
    let mut run = 0;
    for c in levels.iter_mut().rev() {
        run = run.max(*c);
        *c = run;
    }
    Signature::from_levels_unchecked(levels)
}

impl fmt::Display for ScnVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for ScnVector {
    type Err = ScnError;

    fn from_str(s: &str) -> Result<Self, ScnError> {
        let body = s
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| malformed("expected braces"))?;
        if body.is_empty() {
            return Ok(ScnVector::default());
        }
        let mut entries = Vec::new();
        for (k, raw) in body.split(',').enumerate() {
            let tok = if k > 0 { raw.trim_start_matches(' ') } else { raw };
            if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed(format!("bad entry {raw:?}")));
            }
            if tok.len() > 1 && tok.starts_with('0') {
                return Err(malformed(format!("leading zero in {tok:?}")));
            }
            let v: u32 = tok
                .parse()
                .map_err(|_| malformed(format!("entry {tok:?} out of range")))?;
            entries.push(v);
        }
        ScnVector::new(entries)
    }
}

/// Parse SCN text straight to a signature.
pub fn parse_scn(s: &str) -> Result<Signature, ScnError> {
    Ok(scn_decode(&s.parse()?))
}
