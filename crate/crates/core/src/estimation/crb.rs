//! Cramér–Rao bound maps over the phase torus.

use rayon::prelude::*;

use crate::device::DeviceParams;
use crate::error::Result;
use crate::grid::PhaseGrid;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::photonics::{DistinguishabilityModel, FockState};
use crate::unitary::PhaseVector;

use super::fisher::{classical_benchmark, fisher_with_unitaries, BenchmarkKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbPoint {
    pub phases: PhaseVector,
    /// `Tr(I⁻¹)`, or `None` where the Fisher matrix is singular.
    pub trace: Option<f64>,
    /// Beats the benchmark (always false without one).
    pub beats_benchmark: bool,
}

#[derive(Debug, Clone)]
pub struct CrbMap {
    pub grid: PhaseGrid,
    pub points: Vec<CrbPoint>,
    pub benchmark: Option<(BenchmarkKind, f64)>,
    /// Grid minimum polished by a local search.
    pub minimum: Option<(PhaseVector, f64)>,
}

impl CrbMap {
    pub fn singular_count(&self) -> usize {
        self.points.iter().filter(|p| p.trace.is_none()).count()
    }

    pub fn mask_count(&self) -> usize {
        self.points.iter().filter(|p| p.beats_benchmark).count()
    }

    /// Smallest trace on the grid itself.
    pub fn grid_minimum(&self) -> Option<(PhaseVector, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.trace.map(|t| (p.phases, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// `Tr(I⁻¹)` at every grid point, the mask where it beats the chosen
/// classical benchmark, and a refined global minimum.
pub fn crb_map(
    device: &DeviceParams,
    input: &FockState,
    model: &DistinguishabilityModel,
    grid: &PhaseGrid,
    benchmark: Option<BenchmarkKind>,
) -> Result<CrbMap> {
    model.validate()?;
    let bench = benchmark
        .map(|k| classical_benchmark(k, input.total()).and_then(|b| Ok((k, b.crb_trace()?))))
        .transpose()?;
    let ua = device.ua();
    let ub = device.ub();
    let trace_at = |p: &PhaseVector| -> Result<Option<f64>> {
        let f = fisher_with_unitaries(&ua, &ub, p, input, model)?;
        Ok(f.crb_trace().ok())
    };
    let points = grid
        .points()
        .par_iter()
        .map(|p| {
            let trace = trace_at(p)?;
            let beats = match (trace, bench) {
                (Some(t), Some((_, b))) => t < b,
                _ => false,
            };
            Ok(CrbPoint {
                phases: *p,
                trace,
                beats_benchmark: beats,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut map = CrbMap {
        grid: *grid,
        points,
        benchmark: bench,
        minimum: None,
    };
    if let Some((start, t0)) = map.grid_minimum() {
        let objective = |x: &[f64]| {
            trace_at(&PhaseVector::new(x[0], x[1]))
                .ok()
                .flatten()
                .unwrap_or(f64::INFINITY)
        };
        let (h1, h2) = grid.step();
        let opts = NelderMeadOptions {
            max_iter: 500,
            xtol: 1e-9,
            ftol: 1e-14,
            step: 0.5 * h1.min(h2),
        };
        let m = nelder_mead(objective, &[start.dphi1, start.dphi2], &opts);
        map.minimum = Some(if m.f < t0 {
            (PhaseVector::new(m.x[0], m.x[1]), m.f)
        } else {
            (start, t0)
        });
    }
    Ok(map)
}
