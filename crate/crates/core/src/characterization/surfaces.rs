//! Probability surfaces over the phase torus and their R² against a model.

use rayon::prelude::*;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::estimation::{multinomial, task_rng};
use crate::grid::PhaseGrid;
use crate::photonics::{output_probs, DistinguishabilityModel, FockState};

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceOptions {
    pub grid: PhaseGrid,
    /// Detected events per grid point; `None` records exact probabilities.
    pub counts: Option<u64>,
    pub seed: u64,
}

/// Counts per point that give single-photon surfaces the scatter of the
/// scan measurements.
pub const SINGLE_PHOTON_SURFACE_COUNTS: u64 = 2000;
/// Coincidences per point for two-photon surfaces, a much lower rate,
/// set so the surface scatter matches that of the coincidence data.
pub const TWO_PHOTON_SURFACE_COUNTS: u64 = 30;

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            grid: PhaseGrid::full(30, 30),
            counts: Some(SINGLE_PHOTON_SURFACE_COUNTS),
            seed: 0,
        }
    }
}

/// Measured or simulated output frequencies at every grid point, one column
/// per output event.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDataset {
    pub input: FockState,
    pub model: DistinguishabilityModel,
    pub grid: PhaseGrid,
    pub events: Vec<FockState>,
    /// `values[point][event]`, points in grid order.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFit {
    pub per_event: Vec<(FockState, f64)>,
    pub mean: f64,
}

pub fn generate_surfaces(
    device: &DeviceParams,
    input: &FockState,
    model: &DistinguishabilityModel,
    opts: &SurfaceOptions,
) -> Result<SurfaceDataset> {
    if opts.counts == Some(0) {
        return Err(Error::domain("counts per point must be at least 1"));
    }
    if opts.grid.is_empty() {
        return Err(Error::domain("phase grid is empty"));
    }
    let points = opts.grid.points();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let dist = output_probs(&device.unitary(p), input, model)?;
            let probs = dist.probabilities();
            let values = match opts.counts {
                Some(n) => {
                    let mut rng = task_rng(opts.seed, k as u64);
                    multinomial(&probs, n, &mut rng)
                        .into_iter()
                        .map(|c| c as f64 / n as f64)
                        .collect()
                }
                None => probs,
            };
            Ok((dist.events.iter().map(|e| e.0).collect::<Vec<_>>(), values))
        })
        .collect::<Result<Vec<_>>>()?;
    let events = rows[0].0.clone();
    Ok(SurfaceDataset {
        input: *input,
        model: *model,
        grid: opts.grid,
        events,
        values: rows.into_iter().map(|r| r.1).collect(),
    })
}

/// Coefficient of determination of the model surfaces against the data, per
/// output event and averaged. Events whose data surface is flat are
/// skipped.
pub fn verify_surfaces(fitted: &DeviceParams, data: &SurfaceDataset) -> Result<SurfaceFit> {
    let points = data.grid.points();
    if points.len() != data.values.len() {
        return Err(Error::domain("surface data does not match its grid"));
    }
    let model: Vec<Vec<f64>> = points
        .par_iter()
        .map(|p| Ok(output_probs(&fitted.unitary(p), &data.input, &data.model)?.probabilities()))
        .collect::<Result<_>>()?;
    let mut per_event = Vec::new();
    for (e, event) in data.events.iter().enumerate() {
        let n = points.len() as f64;
        let mean = data.values.iter().map(|v| v[e]).sum::<f64>() / n;
        let ss_tot: f64 = data.values.iter().map(|v| (v[e] - mean).powi(2)).sum();
        let ss_res: f64 = data.values.iter().zip(&model).map(|(v, m)| (v[e] - m[e]).powi(2)).sum();
        if ss_tot > 1e-12 {
            per_event.push((*event, 1.0 - ss_res / ss_tot));
        }
    }
    if per_event.is_empty() {
        return Err(Error::Degenerate("every data surface is flat".into()));
    }
    let mean = per_event.iter().map(|x| x.1).sum::<f64>() / per_event.len() as f64;
    Ok(SurfaceFit { per_event, mean })
}
