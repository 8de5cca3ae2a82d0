//! Starting values for the thermal coefficients from the oscillation
//! frequencies of the power scans.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::thermal::{ResistorId, StaticPhases};
use crate::unitary::{compose, TritterParams};

use super::scan::{ScanCurve, ScanDataset};

const FFT_LEN: usize = 4096;
/// Peaks weaker than this fraction of a curve's strongest are ignored.
const RELATIVE_PEAK_FLOOR: f64 = 0.3;
/// Peaks of different curves closer than this (rad/W) are the same
/// harmonic.
const CLUSTER_TOL: f64 = 2.5;
/// A harmonic is kept when it shows up in at least this many curves of
/// the same resistor.
const MIN_SHARED: usize = 3;

/// One periodogram peak: angular frequency (rad per watt) and amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub amplitude: f64,
}

/// Peaks of the zero-padded periodogram of a uniformly sampled curve. The
/// mean is removed first, so a constant offset has no effect, and
/// frequencies below half an oscillation over the range are not reported.
pub fn periodogram_peaks(x: &[f64], y: &[f64]) -> Result<Vec<Peak>> {
    let n = x.len();
    if n < 4 || y.len() != n {
        return Err(Error::domain("need at least 4 equally long samples"));
    }
    let dx = (x[n - 1] - x[0]) / (n - 1) as f64;
    if !(dx > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.max(1.0)) {
        return Err(Error::domain("samples must be uniformly spaced"));
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let len = FFT_LEN.max(n.next_power_of_two() * 4);
    let mut buf: Vec<Complex<f64>> = y.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mag: Vec<f64> = buf[..len / 2].iter().map(|z| 2.0 * z.norm() / n as f64).collect();

    let d_omega = 2.0 * PI / (len as f64 * dx);
    let range = x[n - 1] - x[0];
    let min_omega = PI / range;
    let strongest = mag.iter().skip(1).copied().fold(0.0, f64::max);
    if strongest < 1e-9 {
        return Ok(Vec::new());
    }
    let mut peaks = Vec::new();
    for k in 1..mag.len() - 1 {
        if mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] >= RELATIVE_PEAK_FLOOR * strongest {
            let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom.abs() > 1e-300 { 0.5 * (a - c) / denom } else { 0.0 };
            let omega = (k as f64 + shift) * d_omega;
            if omega >= min_omega {
                peaks.push(Peak {
                    omega,
                    amplitude: b - 0.25 * (a - c) * shift,
                });
            }
        }
    }
    Ok(peaks)
}

fn curve_peaks(c: &ScanCurve) -> Result<Vec<Peak>> {
    let x: Vec<f64> = c.points.iter().map(|p| p.power).collect();
    let y: Vec<f64> = c.points.iter().map(|p| p.probability).collect();
    periodogram_peaks(&x, &y)
}

/// Harmonics (rad/W, ascending) common to the curves of one resistor.
pub fn shared_frequencies(scan: &ScanDataset, resistor: ResistorId) -> Result<Vec<f64>> {
    let mut all: Vec<(usize, Peak)> = Vec::new();
    for (ci, c) in scan.curves_for(resistor).enumerate() {
        all.extend(curve_peaks(c)?.into_iter().map(|p| (ci, p)));
    }
    all.sort_by(|a, b| a.1.omega.total_cmp(&b.1.omega));
    let mut out = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].1.omega - all[j - 1].1.omega <= CLUSTER_TOL {
            j += 1;
        }
        let cluster = &all[i..j];
        let mut curves: Vec<usize> = cluster.iter().map(|c| c.0).collect();
        curves.sort_unstable();
        curves.dedup();
        if curves.len() >= MIN_SHARED {
            let w: f64 = cluster.iter().map(|c| c.1.amplitude).sum();
            out.push(cluster.iter().map(|c| c.1.omega * c.1.amplitude).sum::<f64>() / w);
        }
        i = j;
    }
    Ok(out)
}

/// Starting point for the full device fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierInit {
    pub device: DeviceParams,
    /// Harmonics kept for each internal resistor.
    pub frequencies: [Vec<f64>; 4],
    /// Coefficients left at zero because no shared harmonic supports them.
    pub low_confidence: [[bool; 4]; 2],
    /// Every screened starting point, best first; `device` is the first.
    pub candidates: Vec<DeviceParams>,
}

fn prior_tritter(phi: f64) -> TritterParams {
    TritterParams {
        t1: 0.5,
        t2: 2.0 / 3.0,
        t3: 0.5,
        phi,
    }
}

/// Weighted misfit of a candidate device on the given curves, linear
/// thermal response only.
fn curves_chi2<'a>(device: &DeviceParams, curves: impl Iterator<Item = &'a ScanCurve>) -> f64 {
    let ua = device.ua();
    let ub = device.ub();
    let mut chi2 = 0.0;
    for c in curves {
        for p in &c.points {
            let mut pw = [0.0; 4];
            pw[c.resistor.index()] = p.power;
            let ph = device.thermal.internal_phases(&pw);
            let u = compose(&ua, &ub, &ph);
            let q = u[(c.output - 1, c.input - 1)].norm_sqr();
            chi2 += ((q - p.probability) / p.std_err).powi(2);
        }
    }
    chi2
}

/// Zero-power points of every curve, as stand-alone curves.
fn zero_power_curves(scan: &ScanDataset) -> Vec<ScanCurve> {
    scan.curves
        .iter()
        .filter_map(|c| {
            c.points.first().filter(|p| p.power == 0.0).map(|&p| ScanCurve {
                points: vec![p],
                ..c.clone()
            })
        })
        .collect()
}

/// Does resistor `i` act most strongly on the arm it sits next to? `R1`
/// and `R2` border the two measured arms; `R3` and `R4` the reference arm,
/// which shifts both differences together. The prior tritter phase fixes
/// the orientation in which heating raises the phase.
fn proximity_ok(i: usize, a: [f64; 2]) -> bool {
    match i {
        0 => a[0] >= a[1].max(0.0),
        1 => a[1] >= a[0].max(0.0),
        _ => a[0] <= 0.0 && a[1] <= 0.0,
    }
}

/// Local minima of a periodic grid, best first.
fn torus_minima(values: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = values.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let v = values[a][b];
            let lower = (-1i64..=1).all(|da| {
                (-1i64..=1).all(|db| {
                    let (x, y) = ((a as i64 + da).rem_euclid(n as i64), (b as i64 + db).rem_euclid(n as i64));
                    (da == 0 && db == 0) || v <= values[x as usize][y as usize]
                })
            });
            if lower {
                out.push((a, b));
            }
        }
    }
    out.sort_by(|p, q| values[p.0][p.1].total_cmp(&values[q.0][q.1]));
    out
}

/// Static-phase basins kept per sign of the second tritter phase.
const BASINS_PER_SIGN: usize = 4;

/// Initial thermal coefficients, static phases and tritter phases for an
/// internal-resistor scan.
///
/// Tritters start from the ideal values. The static phases and the sign of
/// the second tritter phase are screened on the zero-power points, keeping
/// the best few basins; for each, every resistor's `(α₁ᵢ, α₂ᵢ)` is picked
/// from the signed shared harmonics (or zero) by χ², ties broken by
/// proximity, and polished. Candidates are returned best first.
pub fn fourier_init(scan: &ScanDataset) -> Result<FourierInit> {
    let mut frequencies: [Vec<f64>; 4] = Default::default();
    for r in ResistorId::INTERNAL {
        if scan.curves_for(r).next().is_none() {
            return Err(Error::domain(format!("scan has no curves for {r}")));
        }
        frequencies[r.index()] = shared_frequencies(scan, r)?;
    }

    let mut base = DeviceParams::chip();
    base.thermal.alpha = [[0.0; 4]; 2];
    base.thermal.alpha_nl = [[0.0; 4]; 2];
    base.tritter_a = prior_tritter(PI / 2.0);

    let zero = zero_power_curves(scan);
    let steps = 48;
    let at = |k: usize| -PI + 2.0 * PI * k as f64 / steps as f64;
    let mut starts = Vec::new();
    for sign in [1.0, -1.0] {
        let mut d = base.clone();
        d.tritter_b = prior_tritter(sign * PI / 2.0);
        let values: Vec<Vec<f64>> = (0..steps)
            .map(|a| {
                (0..steps)
                    .map(|b| {
                        let mut d = d.clone();
                        d.thermal.static_phases = StaticPhases {
                            dphi10: at(a),
                            dphi20: at(b),
                            ..d.thermal.static_phases
                        };
                        curves_chi2(&d, zero.iter())
                    })
                    .collect()
            })
            .collect();
        for (a, b) in torus_minima(&values).into_iter().take(BASINS_PER_SIGN) {
            let mut s = d.clone();
            s.thermal.static_phases.dphi10 = at(a);
            s.thermal.static_phases.dphi20 = at(b);
            starts.push(s);
        }
    }

    let mut candidates: Vec<(f64, DeviceParams, [[bool; 4]; 2])> = starts
        .into_par_iter()
        .map(|mut device| {
            polish(&mut device, &zero, |d| {
                let s = &d.thermal.static_phases;
                vec![s.dphi10, s.dphi20]
            }, |d, x| {
                d.thermal.static_phases.dphi10 = x[0];
                d.thermal.static_phases.dphi20 = x[1];
            }, 0.05);
            let low = assign_coefficients(scan, &frequencies, &mut device);
            (curves_chi2(&device, scan.curves.iter()), device, low)
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (_, device, low_confidence) = candidates[0].clone();
    Ok(FourierInit {
        device,
        frequencies,
        low_confidence,
        candidates: candidates.into_iter().map(|c| c.1).collect(),
    })
}

/// Pick and polish `(α₁ᵢ, α₂ᵢ)` of every internal resistor; returns which
/// coefficients were left at zero.
fn assign_coefficients(
    scan: &ScanDataset,
    frequencies: &[Vec<f64>; 4],
    device: &mut DeviceParams,
) -> [[bool; 4]; 2] {
    let mut low_confidence = [[false; 4]; 2];
    for r in ResistorId::INTERNAL {
        let i = r.index();
        let mut cands = vec![0.0];
        for &f in &frequencies[i] {
            cands.push(f);
            cands.push(-f);
        }
        let curves: Vec<ScanCurve> = scan.curves_for(r).cloned().collect();
        let mut scored: Vec<(f64, [f64; 2])> = Vec::new();
        for &a1 in &cands {
            for &a2 in &cands {
                let mut d = device.clone();
                d.thermal.alpha[0][i] = a1;
                d.thermal.alpha[1][i] = a2;
                scored.push((curves_chi2(&d, curves.iter()), [a1, a2]));
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = scored[0].0;
        let pick = scored
            .iter()
            .take_while(|s| s.0 <= best * 1.05)
            .find(|s| proximity_ok(i, s.1))
            .unwrap_or(&scored[0])
            .1;
        for j in 0..2 {
            device.thermal.alpha[j][i] = pick[j];
            low_confidence[j][i] = pick[j] == 0.0;
        }
        let free: Vec<usize> = (0..2).filter(|&j| !low_confidence[j][i]).collect();
        if !free.is_empty() {
            let get_free = free.clone();
            polish(
                device,
                &curves,
                move |d| get_free.iter().map(|&j| d.thermal.alpha[j][i]).collect(),
                move |d, x| {
                    for (k, &j) in free.iter().enumerate() {
                        d.thermal.alpha[j][i] = x[k];
                    }
                },
                0.5,
            );
        }
    }
    low_confidence
}

/// Derivative-free χ² polish of a few device parameters on some curves.
fn polish<G, S>(device: &mut DeviceParams, curves: &[ScanCurve], get: G, set: S, step: f64)
where
    G: Fn(&DeviceParams) -> Vec<f64>,
    S: Fn(&mut DeviceParams, &[f64]),
{
    let x0 = get(device);
    let objective = |x: &[f64]| {
        let mut d = device.clone();
        set(&mut d, x);
        curves_chi2(&d, curves.iter())
    };
    let opts = crate::optimize::NelderMeadOptions {
        max_iter: 400,
        xtol: 1e-6,
        ftol: 1e-9,
        step,
    };
    let m = crate::optimize::nelder_mead(objective, &x0, &opts);
    if m.f < objective(&x0) {
        set(device, &m.x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characterization::scan::{generate_scan, ScanOptions, ScanProtocol};

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn single_sinusoid_frequency() {
        let x = grid(60);
        let y: Vec<f64> = x.iter().map(|p| 0.5 * (1.0 + (20.0 * p).cos())).collect();
        let peaks = periodogram_peaks(&x, &y).unwrap();
        let top = peaks.iter().max_by(|a, b| a.amplitude.total_cmp(&b.amplitude)).unwrap();
        assert!((top.omega - 20.0).abs() < 2.0, "{top:?}");
    }

    #[test]
    fn flat_curve_has_no_peaks() {
        let x = grid(60);
        assert!(periodogram_peaks(&x, &vec![0.4; 60]).unwrap().is_empty());
    }

    #[test]
    fn offset_does_not_change_peaks() {
        let x = grid(60);
        let y: Vec<f64> = x.iter().map(|p| 0.3 * (13.0 * p + 0.4).sin()).collect();
        let z: Vec<f64> = y.iter().map(|v| v + 0.45).collect();
        let (p, q) = (periodogram_peaks(&x, &y).unwrap(), periodogram_peaks(&x, &z).unwrap());
        assert_eq!(p.len(), q.len());
        for (a, b) in p.iter().zip(&q) {
            assert!((a.omega - b.omega).abs() < 1e-9 && (a.amplitude - b.amplitude).abs() < 1e-12);
        }
    }

    #[test]
    fn init_offers_basins_for_both_tritter_signs() {
        let truth = DeviceParams::chip();
        let scan = generate_scan(&truth, ScanProtocol::InternalResistors, &ScanOptions::noiseless()).unwrap();
        let init = fourier_init(&scan).unwrap();
        assert_eq!(init.candidates.len(), 2 * BASINS_PER_SIGN);
        assert_eq!(init.candidates[0], init.device);
        assert!(init.candidates.iter().any(|c| c.tritter_b.phi < 0.0));
        assert!(init.candidates.iter().any(|c| c.tritter_b.phi > 0.0));
        // the strong harmonics of R1 show up: α₁₁, α₂₁ and their difference
        let f = &init.frequencies[0];
        for want in [8.85, 15.5, 24.35] {
            assert!(f.iter().any(|w| (w - want).abs() < 1.5), "{f:?}");
        }
    }
}
