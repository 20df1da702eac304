use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A sign vector in `{+1, -1}^(n+k)` modulo global negation.
///
/// The stored representative always starts with `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    /// Canonicalize arbitrary signs (any positive value counts as `+1`).
    pub fn new(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidSign("empty sign vector".into()));
        }
        if signs.contains(&0) {
            return Err(Error::InvalidSign("signs must be nonzero".into()));
        }
        Ok(Self::canonical(signs.iter().map(|&s| if s > 0 { 1 } else { -1 })))
    }

    fn canonical(signs: impl Iterator<Item = i8>) -> Self {
        let mut v: Vec<i8> = signs.collect();
        if v[0] < 0 {
            v.iter_mut().for_each(|s| *s = -*s);
        }
        SignVector(v)
    }

    /// Signs of nonzero reals, e.g. a coefficient vector.
    pub fn of_values(values: &[f64]) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| *v == 0.0) {
            return Err(Error::ZeroCoefficient { index });
        }
        Ok(Self::canonical(values.iter().map(|&v| if v > 0.0 { 1 } else { -1 })))
    }

    /// All `2^(len-1)` canonical classes, in lexicographic `+` before `-` order.
    pub fn all(len: usize) -> Vec<SignVector> {
        assert!((1..31).contains(&len));
        (0..1u32 << (len - 1))
            .map(|bits| {
                let mut v = vec![1i8; len];
                for (i, s) in v.iter_mut().enumerate().skip(1) {
                    if bits & (1 << (len - 1 - i)) != 0 {
                        *s = -1;
                    }
                }
                SignVector(v)
            })
            .collect()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction to the given coordinates, canonicalized again.
    pub fn project(&self, indices: &[usize]) -> SignVector {
        Self::canonical(indices.iter().map(|&i| self.0[i]))
    }

    /// `true` if `signs` equals this vector or its negative on the positions
    /// where `mask` is set.
    pub fn matches_masked(&self, signs: &[i8], mask: &[bool]) -> bool {
        let mut pos = true;
        let mut neg = true;
        for ((&a, &b), &m) in self.0.iter().zip(signs).zip(mask) {
            if m {
                pos &= a == b;
                neg &= a == -b;
            }
        }
        pos || neg
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = Error;

    /// Accepts `"+--++"` or comma separated `"1,-1,-1,1,1"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let signs: Vec<i8> = if s.contains(',') {
            s.split(',')
                .map(|t| match t.trim() {
                    "1" | "+1" | "+" => Ok(1),
                    "-1" | "-" => Ok(-1),
                    other => Err(Error::InvalidSign(format!("bad entry `{other}`"))),
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' | '\u{2212}' => Ok(-1),
                    other => Err(Error::InvalidSign(format!("bad character `{other}`"))),
                })
                .collect::<Result<_>>()?
        };
        Self::new(&signs)
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// How a `lambda` is assigned to a sign class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignReading {
    /// Signs of the linear forms `beta_i . lambda`.
    #[default]
    Linear,
    /// Signs of `log|beta_i . lambda|` for some positive rescaling of `lambda`:
    /// the class is matched when the entries marked `+` are all larger in
    /// magnitude than the entries marked `-`.
    LogMagnitude,
}

impl SignReading {
    /// Does the vector of form values match `sigma` (up to global sign)?
    /// Entries with `mask[i] == false` are ignored.
    pub fn matches(self, values: &[f64], sigma: &SignVector, mask: &[bool]) -> bool {
        match self {
            SignReading::Linear => {
                let signs: Vec<i8> = values.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
                sigma.matches_masked(&signs, mask)
            }
            SignReading::LogMagnitude => {
                let threshold_pattern = |flip: i8| {
                    let mut min_plus = f64::INFINITY;
                    let mut max_minus = 0.0_f64;
                    for ((&v, &s), &m) in values.iter().zip(sigma.as_slice()).zip(mask) {
                        if !m {
                            continue;
                        }
                        if s * flip > 0 {
                            min_plus = min_plus.min(v.abs());
                        } else {
                            max_minus = max_minus.max(v.abs());
                        }
                    }
                    min_plus > max_minus
                };
                threshold_pattern(1) || threshold_pattern(-1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let s: SignVector = "-+++-".parse().unwrap();
        assert_eq!(s.to_string(), "+---+");
        let t: SignVector = "1,-1,-1,1,1".parse().unwrap();
        assert_eq!(t.to_string(), "+--++");
        assert_eq!(SignVector::of_values(&[-2.0, 1.0]).unwrap().to_string(), "+-");
        assert_eq!(
            SignVector::of_values(&[1.0, 0.0]),
            Err(Error::ZeroCoefficient { index: 1 })
        );
    }

    #[test]
    fn class_enumeration() {
        let all = SignVector::all(5);
        assert_eq!(all.len(), 16);
        assert_eq!(all[0].to_string(), "+++++");
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 16);
    }

    #[test]
    fn log_magnitude_threshold() {
        let sigma: SignVector = "++-".parse().unwrap();
        let mask = [true; 3];
        assert!(SignReading::LogMagnitude.matches(&[3.0, -2.0, 0.5], &sigma, &mask));
        assert!(!SignReading::LogMagnitude.matches(&[3.0, 0.4, 0.5], &sigma, &mask));
        // Negated pattern: the `-` entry is the largest.
        assert!(SignReading::LogMagnitude.matches(&[0.1, 0.2, 5.0], &sigma, &mask));
        assert!(SignReading::Linear.matches(&[-1.0, -2.0, 3.0], &sigma, &mask));
    }
}
