//! Check reports: one record per verified inequality, reproducible from its
//! configuration and seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a check comes from: a stable family tag and the asserted statement
/// written as a plain ASCII formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tag: String,
    pub statement: String,
}

/// Outcome of one check. `pass` is exactly `margin >= 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub margin: f64,
    pub pass: bool,
    pub samples: u64,
    pub seed: u64,
    pub provenance: Provenance,
}

impl CheckReport {
    /// Bound-style report: asserts `lhs <= rhs`, margin `rhs - lhs`.
    #[allow(clippy::too_many_arguments)]
    pub fn bound(
        name: impl Into<String>,
        tag: &str,
        statement: &str,
        lhs: f64,
        rhs: f64,
        constant_used: f64,
        samples: u64,
        seed: u64,
    ) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            constant_used,
            margin,
            pass: margin >= 0.0,
            samples,
            seed,
            provenance: Provenance {
                tag: tag.into(),
                statement: statement.into(),
            },
        }
    }

    /// Log-style report: records a measured quantity without asserting a
    /// bound (margin 0, pass).
    pub fn log(
        name: impl Into<String>,
        tag: &str,
        statement: &str,
        value: f64,
        samples: u64,
        seed: u64,
    ) -> Self {
        Self {
            name: name.into(),
            lhs: value,
            rhs: value,
            constant_used: value,
            margin: 0.0,
            pass: true,
            samples,
            seed,
            provenance: Provenance {
                tag: tag.into(),
                statement: statement.into(),
            },
        }
    }

    pub const CSV_HEADER: &'static str = "name,lhs,rhs,constant,margin,pass,samples,seed";

    /// CSV row; numeric fields use the shortest representation that parses
    /// back to the identical value.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{},{},{}",
            csv_escape(&self.name),
            self.lhs,
            self.rhs,
            self.constant_used,
            self.margin,
            self.pass,
            self.samples,
            self.seed
        )
    }

    /// Parse one CSV row written by [`Self::csv_row`]. The provenance block
    /// is not carried by the CSV; numeric fields round-trip exactly.
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let parts = csv_split(row);
        if parts.len() != 8 {
            return Err(Error::Parameter(format!(
                "report row needs 8 columns, got {}",
                parts.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            parts[i]
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("bad numeric column {i}: {e}")))
        };
        let margin = num(4)?;
        Ok(Self {
            name: parts[0].clone(),
            lhs: num(1)?,
            rhs: num(2)?,
            constant_used: num(3)?,
            margin,
            pass: parts[5] == "true",
            samples: parts[6]
                .parse()
                .map_err(|e| Error::Parameter(format!("bad samples column: {e}")))?,
            seed: parts[7]
                .parse()
                .map_err(|e| Error::Parameter(format!("bad seed column: {e}")))?,
            provenance: Provenance {
                tag: String::new(),
                statement: String::new(),
            },
        })
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_split(row: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = row.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if quoted => {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    quoted = false;
                }
            }
            '"' => quoted = true,
            ',' if !quoted => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_margin_sign() {
        let good = CheckReport::bound("a", "t", "x <= y", 1.0, 2.0, 1.0, 10, 0);
        assert!(good.pass && good.margin == 1.0);
        let bad = CheckReport::bound("b", "t", "x <= y", 2.0, 1.0, 1.0, 10, 0);
        assert!(!bad.pass && bad.margin == -1.0);
    }

    #[test]
    fn csv_roundtrip_preserves_numerics() {
        let r = CheckReport::bound(
            "weird, name",
            "t",
            "s",
            std::f64::consts::PI * 1e-7,
            0.1 + 0.2,
            1.0 / 3.0,
            7,
            99,
        );
        let back = CheckReport::from_csv_row(&r.csv_row()).unwrap();
        assert_eq!(back.name, r.name);
        assert_eq!(back.lhs.to_bits(), r.lhs.to_bits());
        assert_eq!(back.rhs.to_bits(), r.rhs.to_bits());
        assert_eq!(back.constant_used.to_bits(), r.constant_used.to_bits());
        assert_eq!(back.margin.to_bits(), r.margin.to_bits());
        assert_eq!(back.pass, r.pass);
        assert_eq!(back.samples, r.samples);
        assert_eq!(back.seed, r.seed);
    }
}
