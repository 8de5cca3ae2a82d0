//! Device characterization: power scans, Fourier initialization, the
//! least-squares fits, surface verification, the balanced-tritter setting
//! procedure and the identity configuration.

pub mod fit;
pub mod fourier;
pub mod identity;
pub mod scan;
pub mod setting;
pub mod surfaces;

use std::f64::consts::PI;

pub use fit::{
    device_from_vector, device_to_vector, fit_device, fit_device_multistart, fit_device_with,
    fit_tritter_resistors,
    scan_chi_square, scan_model_probability, FitResult, DEVICE_PARAM_NAMES, TRITTER_PARAM_NAMES,
};
pub use fourier::{fourier_init, periodogram_peaks, shared_frequencies, FourierInit, Peak};
pub use identity::{identity_configuration, IdentityReport, IdentitySettings};
pub use scan::{
    binomial_std_err, generate_scan, ScanCurve, ScanDataset, ScanOptions, ScanPoint, ScanProtocol,
};
pub use setting::{tritter_setting, SettingOptions, SettingReport, SettingStep};
pub use surfaces::{
    generate_surfaces, verify_surfaces, SurfaceDataset, SurfaceFit, SurfaceOptions,
    SINGLE_PHOTON_SURFACE_COUNTS, TWO_PHOTON_SURFACE_COUNTS,
};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::thermal::ResistorId;

/// Fit a scan with the protocol's full pipeline: Fourier initialization
/// and a multistart fit for internal resistors, the tritter-heater fit with
/// `known` held fixed otherwise.
pub fn characterize_scan(
    scan: &ScanDataset,
    protocol: ScanProtocol,
    known: &DeviceParams,
) -> Result<FitResult> {
    match protocol {
        ScanProtocol::InternalResistors => {
            let init = fourier_init(scan)?;
            fit_device_multistart(scan, &init.candidates, &crate::optimize::LmOptions::default())
        }
        ScanProtocol::TritterResistors => fit_tritter_resistors(scan, known),
    }
}

fn tritter_chi2<'a>(device: &DeviceParams, curves: impl Iterator<Item = &'a ScanCurve>) -> f64 {
    curves
        .flat_map(|c| c.points.iter().map(move |p| (c, p)))
        .map(|(c, p)| {
            let q = scan_model_probability(
                device,
                ScanProtocol::TritterResistors,
                c.input,
                c.output,
                c.resistor,
                p.power,
            );
            ((q - p.probability) / p.std_err).powi(2)
        })
        .sum()
}

/// Starting point for the tritter-heater fit: zero-power phases from a grid
/// screen, then each heater's coefficients from its shared harmonics and a
/// coarse screen, polished.
pub fn tritter_init(scan: &ScanDataset, known: &DeviceParams) -> Result<DeviceParams> {
    let mut device = known.clone();
    device.thermal.alpha_t = [0.0; 2];
    device.thermal.alpha_t_nl = [0.0; 2];

    let zero: Vec<ScanCurve> = scan
        .curves
        .iter()
        .filter_map(|c| {
            c.points.first().filter(|p| p.power == 0.0).map(|&p| ScanCurve {
                points: vec![p],
                ..c.clone()
            })
        })
        .collect();
    if zero.is_empty() {
        return Err(Error::domain("tritter scan needs zero-power points"));
    }
    let steps = 48;
    let mut best = (f64::INFINITY, device.clone());
    for a in 0..steps {
        for b in 0..steps {
            let mut d = device.clone();
            d.thermal.static_phases.phi0_ta = -PI + 2.0 * PI * a as f64 / steps as f64;
            d.thermal.static_phases.phi0_tb = -PI + 2.0 * PI * b as f64 / steps as f64;
            let chi2 = tritter_chi2(&d, zero.iter());
            if chi2 < best.0 {
                best = (chi2, d);
            }
        }
    }
    device = best.1;
    let x0 = [device.thermal.static_phases.phi0_ta, device.thermal.static_phases.phi0_tb];
    let m = nelder_mead(
        |x| {
            let mut d = device.clone();
            d.thermal.static_phases.phi0_ta = x[0];
            d.thermal.static_phases.phi0_tb = x[1];
            tritter_chi2(&d, zero.iter())
        },
        &x0,
        &NelderMeadOptions { max_iter: 400, xtol: 1e-7, ftol: 1e-10, step: 0.05 },
    );
    device.thermal.static_phases.phi0_ta = m.x[0];
    device.thermal.static_phases.phi0_tb = m.x[1];

    for (which, r) in ResistorId::TRITTER.into_iter().enumerate() {
        let curves: Vec<ScanCurve> = scan.curves_for(r).cloned().collect();
        if curves.is_empty() {
            return Err(Error::domain(format!("scan has no curves for {r}")));
        }
        // a slow heater may not complete an oscillation over the scan, so
        // the harmonics are backed by a plain screen of the coefficient
        let mut cands = vec![0.0];
        for f in shared_frequencies(scan, r)? {
            cands.push(f);
            cands.push(-f);
        }
        cands.extend((-120..=120).map(|k| 0.25 * k as f64));
        let score = |d: &DeviceParams, x: &[f64]| {
            let mut d = d.clone();
            d.thermal.alpha_t[which] = x[0];
            d.thermal.alpha_t_nl[which] = x.get(1).copied().unwrap_or(0.0);
            tritter_chi2(&d, curves.iter())
        };
        let (f0, pick) = cands
            .iter()
            .map(|&a| (score(&device, &[a]), a))
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .unwrap_or((f64::INFINITY, 0.0));
        let m = nelder_mead(
            |x| score(&device, x),
            &[pick, 0.0],
            &NelderMeadOptions { max_iter: 600, xtol: 1e-8, ftol: 1e-12, step: 0.2 },
        );
        if m.f < f0 {
            device.thermal.alpha_t[which] = m.x[0];
            device.thermal.alpha_t_nl[which] = m.x[1];
        } else {
            device.thermal.alpha_t[which] = pick;
        }
    }
    Ok(device)
}
