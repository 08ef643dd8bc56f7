use std::fmt;

use serde::{Deserialize, Serialize};

use super::ParamLabel;
use crate::error::{Error, Result};

/// Ordered parameter pairs defining the symplectic structure. Pair `k`
/// becomes symplectic coordinate `k`: its first member is a "position"
/// (`u` side), its second a "momentum" (`v` side).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairingSpec {
    pairs: Vec<(usize, usize)>,
}

impl PairingSpec {
    /// Checks that the pairs cover `0..2n` exactly once.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        let dim = 2 * pairs.len();
        let mut seen = vec![false; dim];
        for &(a, b) in &pairs {
            for i in [a, b] {
                if i >= dim {
                    return Err(Error::InvalidPairing(format!(
                        "index {i} out of range for {dim} parameters"
                    )));
                }
                if seen[i] {
                    return Err(Error::InvalidPairing(format!("index {i} repeated")));
                }
                seen[i] = true;
            }
        }
        if pairs.is_empty() {
            return Err(Error::InvalidPairing("no pairs given".into()));
        }
        Ok(Self { pairs })
    }

    /// `(0,1), (2,3), ...`: mean with standard deviation of each variable in
    /// the interleaved layout.
    pub fn natural(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|k| (2 * k, 2 * k + 1)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    /// `perm[new] = old` for the split-half layout.
    pub fn permutation(&self, dim: usize) -> Result<Vec<usize>> {
        let n = self.pairs.len();
        if dim != 2 * n {
            return Err(Error::InvalidPairing(format!(
                "{n} pairs cannot cover {dim} parameters"
            )));
        }
        let mut perm = vec![0; dim];
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            perm[k] = a;
            perm[n + k] = b;
        }
        Ok(perm)
    }

    /// Parses `a:b,c:d,...`. Each member is either a zero-based index or a
    /// label `variable.kind` resolved against `labels`.
    pub fn parse(spec: &str, labels: &[ParamLabel]) -> Result<Self> {
        let resolve = |tok: &str| -> Result<usize> {
            let tok = tok.trim();
            if let Ok(i) = tok.parse::<usize>() {
                return Ok(i);
            }
            labels
                .iter()
                .position(|l| l.to_string() == tok)
                .ok_or_else(|| Error::InvalidPairing(format!("unknown parameter '{tok}'")))
        };
        let pairs = spec
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|p| {
                let (a, b) = p
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidPairing(format!("'{p}' is not a:b")))?;
                Ok((resolve(a)?, resolve(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }
}

impl fmt::Display for PairingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (a, b)) in self.pairs.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}:{b}")?;
        }
        Ok(())
    }
}
