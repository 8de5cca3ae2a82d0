use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::unitary::PhaseVector;

/// Regular grid over `(Δφ₁, Δφ₂)`. Each axis is half-open: `lo + k·(hi−lo)/n`
/// for `k = 0..n`, so the default `[0, 2π)` range never double-counts the
/// periodic endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub n1: usize,
    pub n2: usize,
    pub range1: (f64, f64),
    pub range2: (f64, f64),
}

impl PhaseGrid {
    pub fn full(n1: usize, n2: usize) -> Self {
        PhaseGrid {
            n1,
            n2,
            range1: (0.0, 2.0 * PI),
            range2: (0.0, 2.0 * PI),
        }
    }

    pub fn with_ranges(mut self, range1: (f64, f64), range2: (f64, f64)) -> Self {
        self.range1 = range1;
        self.range2 = range2;
        self
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self) -> (f64, f64) {
        (
            (self.range1.1 - self.range1.0) / self.n1.max(1) as f64,
            (self.range2.1 - self.range2.0) / self.n2.max(1) as f64,
        )
    }

    /// Grid points, `Δφ₁` outermost.
    pub fn points(&self) -> Vec<PhaseVector> {
        let (h1, h2) = self.step();
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                out.push(PhaseVector::new(
                    self.range1.0 + i as f64 * h1,
                    self.range2.0 + j as f64 * h2,
                ));
            }
        }
        out
    }
}

impl FromStr for PhaseGrid {
    type Err = Error;

    /// Parses `"NxM"`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Parse(format!("grid spec `{s}` is not of the form NxM")))?;
        let n1: usize = a
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad grid size `{a}`")))?;
        let n2: usize = b
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad grid size `{b}`")))?;
        if n1 == 0 || n2 == 0 {
            return Err(Error::Parse("grid sizes must be positive".into()));
        }
        Ok(PhaseGrid::full(n1, n2))
    }
}
