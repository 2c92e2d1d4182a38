//! Log-uniformly spaced evaluation grids, written `from:to:points` on the command line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl GeometricGrid {
    pub fn new(from: f64, to: f64, points: usize) -> Result<Self> {
        let g = Self { from, to, points };
        g.check()?;
        Ok(g)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.from > 0.0 && self.from.is_finite() && self.to.is_finite()) {
            return validation(format!("grid bounds must be positive and finite, got {}:{}", self.from, self.to));
        }
        if self.points == 0 {
            return validation("a grid needs at least one point");
        }
        if self.points > 1 && !(self.to > self.from) {
            return validation(format!("grid must be increasing, got {}:{}", self.from, self.to));
        }
        Ok(())
    }

    /// The grid values; the end points are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let (lo, hi) = (self.from.ln(), self.to.ln());
        let m = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.from,
                i if i == self.points - 1 => self.to,
                i => (lo + (hi - lo) * i as f64 / m).exp(),
            })
            .collect()
    }
}

impl FromStr for GeometricGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [from, to, points] = parts.as_slice() else {
            return validation(format!("grid must look like from:to:points, got {s:?}"));
        };
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| Error::Validation(format!("bad grid bound {p:?}")));
        let points = points.trim().parse::<usize>().map_err(|_| Error::Validation(format!("bad grid point count {points:?}")))?;
        Self::new(num(from)?, num(to)?, points)
    }
}

impl fmt::Display for GeometricGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.from, self.to, self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_spaces_log_uniformly() {
        let g: GeometricGrid = "1e2:1e6:5".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 100.0);
        assert_eq!(v[4], 1e6);
        for (x, e) in v.iter().zip([1e2, 1e3, 1e4, 1e5, 1e6]) {
            assert!((x / e - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        for s in ["1:2", "0:10:3", "10:1:3", "1:10:0", "a:10:3", "1:10:x"] {
            assert!(s.parse::<GeometricGrid>().is_err(), "{s}");
        }
        assert_eq!("5:5:1".parse::<GeometricGrid>().unwrap().values(), vec![5.0]);
    }
}
