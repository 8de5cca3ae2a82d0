//! Configuration in which the second tritter undoes the first.

use std::f64::consts::PI;

use serde::Serialize;

use crate::device::DeviceParams;
use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::thermal::{power_for_tritter_phase, powers_for_target_phases, ResistorId, DEFAULT_P_MAX};
use crate::unitary::{compose, wrap_phase, PhaseVector};

/// Mean of the diagonal transition probabilities, `(1/3) Σ |U_ii|²`.
pub fn similarity(u: &ComplexMatrix) -> f64 {
    let n = u.rows().min(u.cols());
    (0..n).map(|i| u[(i, i)].norm_sqr()).sum::<f64>() / n as f64
}

/// Phase controls of the identity configuration. `offset` is the internal
/// phase layer held by `R3`/`R4`; the estimated phases are measured from
/// it, so the working point is `(Δφ₁, Δφ₂) = (0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentitySettings {
    pub phi_ta: f64,
    pub phi_tb: f64,
    pub offset: PhaseVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub settings: IdentitySettings,
    pub similarity: f64,
    /// Heater powers `R1..R4, RTA, RTB` realizing the settings with the
    /// device's thermal model, when every phase is reachable.
    pub powers: Option<[f64; 6]>,
    pub notes: Vec<String>,
}

fn device_similarity(device: &DeviceParams, x: &[f64]) -> f64 {
    let a = device.tritter_a.with_phi(x[0]).unitary();
    let b = device.tritter_b.with_phi(x[1]).unitary();
    similarity(&compose(&a, &b, &PhaseVector::new(x[2], x[3])))
}

/// Heater powers `R1..R4, RTA, RTB` for a setting, or a note naming the
/// unreachable controls.
fn realize(device: &DeviceParams, x: &[f64]) -> std::result::Result<[f64; 6], String> {
    let bank = &device.thermal;
    let pa = power_for_tritter_phase(bank, 0, x[0], DEFAULT_P_MAX);
    let pb = power_for_tritter_phase(bank, 1, x[1], DEFAULT_P_MAX);
    let offset = PhaseVector::new(x[2], x[3]);
    let pi = powers_for_target_phases(bank, &offset, [ResistorId::R3, ResistorId::R4], DEFAULT_P_MAX);
    match (pa, pb, pi) {
        (Ok(pa), Ok(pb), Ok(pi)) => Ok([0.0, 0.0, pi[0], pi[1], pa, pb]),
        (pa, pb, pi) => {
            let errs: Vec<String> = [("RTA", pa.err()), ("RTB", pb.err()), ("R3/R4", pi.err())]
                .into_iter()
                .filter_map(|(what, e)| e.map(|e| format!("{what}: {e}")))
                .collect();
            Err(errs.join("; "))
        }
    }
}

/// Maximize the similarity over both tritter phases and the internal offset
/// with a multistart simplex search. Among the optima found, the best one
/// the heaters can realize is reported; stagnation is not an error.
pub fn identity_configuration(device: &DeviceParams) -> Result<IdentityReport> {
    device.tritter_a.validate()?;
    device.tritter_b.validate()?;
    let objective = |x: &[f64]| 1.0 - device_similarity(device, x);
    let opts = NelderMeadOptions {
        max_iter: 4000,
        xtol: 1e-12,
        ftol: 1e-17,
        step: 0.4,
    };
    let lattice = [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0];
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for &a in &lattice {
        for &b in &lattice {
            for &c in &lattice {
                for &d in &lattice {
                    let x0 = [a + 0.3, b + 0.3, c, d];
                    let mut m = nelder_mead(objective, &x0, &opts);
                    // restart once from the end point to shake off a
                    // collapsed simplex
                    let again = nelder_mead(objective, &m.x, &NelderMeadOptions { step: 0.05, ..opts });
                    if again.f < m.f {
                        m = again;
                    }
                    found.push((m.x.iter().map(|&v| wrap_phase(v)).collect(), m.f));
                }
            }
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1));

    // prefer the best optimum the heaters can realize
    let realized = found.iter().find_map(|(x, f)| realize(device, x).ok().map(|p| (x, *f, p)));
    let mut notes = Vec::new();
    let (x, powers) = match realized {
        Some((x, f, p)) => {
            if f - found[0].1 > 1e-9 {
                notes.push(format!(
                    "best unconstrained similarity {:.6} needs phases outside the heater range",
                    1.0 - found[0].1
                ));
            }
            (x.clone(), Some(p))
        }
        None => {
            if let Err(e) = realize(device, &found[0].0) {
                notes.push(e);
            }
            (found[0].0.clone(), None)
        }
    };
    let settings = IdentitySettings {
        phi_ta: x[0],
        phi_tb: x[1],
        offset: PhaseVector::new(x[2], x[3]),
    };
    let similarity = device_similarity(device, &x);
    Ok(IdentityReport {
        settings,
        similarity,
        powers,
        notes,
    })
}
