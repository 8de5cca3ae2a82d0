//! Weighted least-squares reconstruction of the device from power scans.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::optimize::{levenberg_marquardt, LeastSquaresProblem, LmOptions};
use crate::thermal::ResistorId;
use crate::unitary::TritterParams;

use super::scan::{ScanDataset, ScanProtocol};

/// Names of the 26 internal-protocol parameters, in vector order.
pub const DEVICE_PARAM_NAMES: [&str; 26] = [
    "T1A", "T2A", "T3A", "T1B", "T2B", "T3B", "phiTA", "phiTB", "dphi10", "dphi20",
    "alpha_11", "alpha_21", "alpha_12", "alpha_22", "alpha_13", "alpha_23", "alpha_14", "alpha_24",
    "alpha_nl_11", "alpha_nl_21", "alpha_nl_12", "alpha_nl_22", "alpha_nl_13", "alpha_nl_23",
    "alpha_nl_14", "alpha_nl_24",
];

/// Names of the 6 tritter-protocol parameters, in vector order.
pub const TRITTER_PARAM_NAMES: [&str; 6] =
    ["phi0TA", "phi0TB", "alpha_TA", "alpha_TB", "alpha_nl_TA", "alpha_nl_TB"];

/// Parameter vector of the internal-protocol fit.
pub fn device_to_vector(d: &DeviceParams) -> Vec<f64> {
    let th = &d.thermal;
    let mut v = vec![
        d.tritter_a.t1,
        d.tritter_a.t2,
        d.tritter_a.t3,
        d.tritter_b.t1,
        d.tritter_b.t2,
        d.tritter_b.t3,
        d.tritter_a.phi,
        d.tritter_b.phi,
        th.static_phases.dphi10,
        th.static_phases.dphi20,
    ];
    for i in 0..4 {
        v.extend([th.alpha[0][i], th.alpha[1][i]]);
    }
    for i in 0..4 {
        v.extend([th.alpha_nl[0][i], th.alpha_nl[1][i]]);
    }
    v
}

/// Inverse of [`device_to_vector`]; fields outside the vector come from `base`.
pub fn device_from_vector(base: &DeviceParams, v: &[f64]) -> DeviceParams {
    let mut d = base.clone();
    d.tritter_a = TritterParams {
        t1: v[0],
        t2: v[1],
        t3: v[2],
        phi: v[6],
    };
    d.tritter_b = TritterParams {
        t1: v[3],
        t2: v[4],
        t3: v[5],
        phi: v[7],
    };
    d.thermal.static_phases.dphi10 = v[8];
    d.thermal.static_phases.dphi20 = v[9];
    for i in 0..4 {
        for j in 0..2 {
            d.thermal.alpha[j][i] = v[10 + 2 * i + j];
            d.thermal.alpha_nl[j][i] = v[18 + 2 * i + j];
        }
    }
    d
}

fn tritter_vector(d: &DeviceParams) -> Vec<f64> {
    let th = &d.thermal;
    vec![
        th.static_phases.phi0_ta,
        th.static_phases.phi0_tb,
        th.alpha_t[0],
        th.alpha_t[1],
        th.alpha_t_nl[0],
        th.alpha_t_nl[1],
    ]
}

fn tritter_from_vector(base: &DeviceParams, v: &[f64]) -> DeviceParams {
    let mut d = base.clone();
    d.thermal.static_phases.phi0_ta = v[0];
    d.thermal.static_phases.phi0_tb = v[1];
    d.thermal.alpha_t = [v[2], v[3]];
    d.thermal.alpha_t_nl = [v[4], v[5]];
    d
}

/// Outcome of a characterization fit. Standard errors are 1σ values from
/// the inverse of the weighted normal matrix.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub device: DeviceParams,
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub chi_square: f64,
    pub n_points: usize,
    pub iterations: usize,
    pub converged: bool,
    /// The fit landed on the mirror solution and was reflected back.
    pub gauge_flipped: bool,
    /// Arms 1 and 2 were relabelled to reach the canonical representative.
    pub arms_swapped: bool,
}

impl FitResult {
    pub fn dof(&self) -> usize {
        self.n_points.saturating_sub(self.values.len())
    }

    pub fn reduced_chi_square(&self) -> f64 {
        self.chi_square / self.dof().max(1) as f64
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|k| self.values[k])
    }

    pub fn to_json(&self) -> Value {
        let mut params = Map::new();
        let mut errors = Map::new();
        for ((n, v), e) in self.names.iter().zip(&self.values).zip(&self.errors) {
            params.insert(n.to_string(), json!(v));
            errors.insert(n.to_string(), json!(e));
        }
        json!({
            "parameters": params,
            "errors_1sigma": errors,
            "chi_square": self.chi_square,
            "n_points": self.n_points,
            "dof": self.dof(),
            "reduced_chi_square": self.reduced_chi_square(),
            "iterations": self.iterations,
            "converged": self.converged,
            "gauge_flipped": self.gauge_flipped,
            "arms_swapped": self.arms_swapped,
        })
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.to_json())?;
        writeln!(w)?;
        Ok(())
    }
}

struct Sample {
    input: usize,
    output: usize,
    resistor: ResistorId,
    power: f64,
    probability: f64,
    sigma: f64,
}

fn samples(scan: &ScanDataset) -> Vec<Sample> {
    scan.curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| Sample {
                input: c.input - 1,
                output: c.output - 1,
                resistor: c.resistor,
                power: p.power,
                probability: p.probability,
                sigma: p.std_err,
            })
        })
        .collect()
}

/// `U_oi = Σ_k B_ok d_k A_ki` and its pieces.
fn element(a: &ComplexMatrix, b: &ComplexMatrix, d: &[Complex64; 3], o: usize, i: usize) -> Complex64 {
    (0..3).map(|k| b[(o, k)] * d[k] * a[(k, i)]).sum()
}

fn phase_factors(dphi: [f64; 2]) -> [Complex64; 3] {
    [
        Complex64::from_polar(1.0, dphi[0]),
        Complex64::from_polar(1.0, dphi[1]),
        Complex64::new(1.0, 0.0),
    ]
}

struct InternalProblem<'a> {
    base: &'a DeviceParams,
    samples: Vec<Sample>,
}

impl InternalProblem<'_> {
    fn phases(d: &DeviceParams, s: &Sample) -> [f64; 2] {
        let mut pw = [0.0; 4];
        pw[s.resistor.index()] = s.power;
        d.thermal.internal_phases(&pw).as_array()
    }
}

impl LeastSquaresProblem for InternalProblem<'_> {
    fn n_params(&self) -> usize {
        26
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let d = device_from_vector(self.base, x);
        let (a, b) = (d.ua(), d.ub());
        self.samples
            .iter()
            .map(|s| {
                let ph = phase_factors(Self::phases(&d, s));
                let u = element(&a, &b, &ph, s.output, s.input);
                (u.norm_sqr() - s.probability) / s.sigma
            })
            .collect()
    }

    fn residuals_and_jacobian(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let d = device_from_vector(self.base, x);
        let (a, b) = (d.ua(), d.ub());
        let da = d.tritter_a.unitary_derivatives();
        let db = d.tritter_b.unitary_derivatives();
        let mut r = Vec::with_capacity(self.samples.len());
        let mut jac = DMatrix::zeros(self.samples.len(), 26);
        for (row, s) in self.samples.iter().enumerate() {
            let ph = phase_factors(Self::phases(&d, s));
            let (o, i) = (s.output, s.input);
            let u = element(&a, &b, &ph, o, i);
            r.push((u.norm_sqr() - s.probability) / s.sigma);
            let w = 2.0 / s.sigma;
            let dp = |du: Complex64| w * (u.conj() * du).re;
            // tritter couplers and phases: A → columns 0,1,2,6; B → 3,4,5,7
            for (k, col) in [0, 1, 2, 6].into_iter().enumerate() {
                jac[(row, col)] = dp(element(&da[k], &b, &ph, o, i));
            }
            for (k, col) in [3, 4, 5, 7].into_iter().enumerate() {
                jac[(row, col)] = dp(element(&a, &db[k], &ph, o, i));
            }
            let ri = s.resistor.index();
            for j in 0..2 {
                let g = dp(Complex64::i() * b[(o, j)] * ph[j] * a[(j, i)]);
                jac[(row, 8 + j)] = g;
                jac[(row, 10 + 2 * ri + j)] = g * s.power;
                jac[(row, 18 + 2 * ri + j)] = g * s.power * s.power;
            }
        }
        (r, jac)
    }

    fn project(&self, x: &mut [f64]) {
        for t in &mut x[..6] {
            *t = t.clamp(0.0, 1.0);
        }
    }
}

struct TritterProblem<'a> {
    base: &'a DeviceParams,
    samples: Vec<Sample>,
}

impl LeastSquaresProblem for TritterProblem<'_> {
    fn n_params(&self) -> usize {
        6
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.residuals_and_jacobian(x).0
    }

    fn residuals_and_jacobian(&self, x: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let d = tritter_from_vector(self.base, x);
        let s0 = &d.thermal.static_phases;
        let ph = phase_factors([s0.dphi10, s0.dphi20]);
        let mut r = Vec::with_capacity(self.samples.len());
        let mut jac = DMatrix::zeros(self.samples.len(), 6);
        for (row, s) in self.samples.iter().enumerate() {
            let mut pw = [0.0; 2];
            if s.resistor == ResistorId::RTA {
                pw[0] = s.power;
            } else {
                pw[1] = s.power;
            }
            let ta = d.tritter_a.with_phi(d.thermal.tritter_phase(0, pw[0]));
            let tb = d.tritter_b.with_phi(d.thermal.tritter_phase(1, pw[1]));
            let (a, b) = (ta.unitary(), tb.unitary());
            let (o, i) = (s.output, s.input);
            let u = element(&a, &b, &ph, o, i);
            r.push((u.norm_sqr() - s.probability) / s.sigma);
            let w = 2.0 / s.sigma;
            let ga = w * (u.conj() * element(&ta.unitary_derivatives()[3], &b, &ph, o, i)).re;
            let gb = w * (u.conj() * element(&a, &tb.unitary_derivatives()[3], &ph, o, i)).re;
            for (which, g) in [(0, ga), (1, gb)] {
                jac[(row, which)] = g;
                jac[(row, 2 + which)] = g * pw[which];
                jac[(row, 4 + which)] = g * pw[which] * pw[which];
            }
        }
        (r, jac)
    }
}

fn check_protocol(scan: &ScanDataset, protocol: ScanProtocol) -> Result<()> {
    scan.validate()?;
    if scan.curves.is_empty() {
        return Err(Error::domain("scan has no curves"));
    }
    let allowed = protocol.resistors();
    if let Some(c) = scan.curves.iter().find(|c| !allowed.contains(&c.resistor)) {
        return Err(Error::domain(format!(
            "resistor {} does not belong to the {protocol:?} protocol",
            c.resistor
        )));
    }
    Ok(())
}

fn errors_from(cov: &Option<DMatrix<f64>>, n: usize) -> Vec<f64> {
    match cov {
        Some(c) => (0..n).map(|k| c[(k, k)].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; n],
    }
}

/// Simultaneous fit of all 26 parameters to an internal-resistor scan,
/// starting from `init`. The result is reported in the gauge with
/// `φ_TA ∈ [0, π]`.
pub fn fit_device(scan: &ScanDataset, init: &DeviceParams) -> Result<FitResult> {
    fit_device_with(scan, init, &LmOptions::default())
}

pub fn fit_device_with(scan: &ScanDataset, init: &DeviceParams, opts: &LmOptions) -> Result<FitResult> {
    check_protocol(scan, ScanProtocol::InternalResistors)?;
    let problem = InternalProblem {
        base: init,
        samples: samples(scan),
    };
    let lm = levenberg_marquardt(&problem, &device_to_vector(init), opts);
    let mut device = device_from_vector(init, &lm.x).with_wrapped_phases();
    let arms_swapped = device.canonicalize_arms();
    let gauge_flipped = device.canonicalize_gauge();
    Ok(FitResult {
        values: device_to_vector(&device),
        device,
        names: DEVICE_PARAM_NAMES.to_vec(),
        errors: errors_from(&lm.covariance, 26),
        chi_square: lm.chi2,
        n_points: problem.samples.len(),
        iterations: lm.iterations,
        converged: lm.converged,
        gauge_flipped,
        arms_swapped,
    })
}

/// Relative χ² gap under which two fits count as equally good.
const EQUIVALENT_CHI2: f64 = 1e-7;

/// Fit from several starting points, in parallel. The scan model has
/// discrete families of parameter sets with identical statistics (arm
/// relabellings); among the fits within [`EQUIVALENT_CHI2`] of the best,
/// the one that best respects the heater layout is kept, then the lowest
/// χ², then the earliest start.
pub fn fit_device_multistart(scan: &ScanDataset, starts: &[DeviceParams], opts: &LmOptions) -> Result<FitResult> {
    if starts.is_empty() {
        return Err(Error::domain("no starting points for the fit"));
    }
    let fits = starts
        .par_iter()
        .map(|s| fit_device_with(scan, s, opts))
        .collect::<Result<Vec<_>>>()?;
    let best = fits.iter().map(|f| f.chi_square).fold(f64::INFINITY, f64::min);
    let cut = best + EQUIVALENT_CHI2 * best.max(1.0);
    Ok(fits
        .into_iter()
        .filter(|f| f.chi_square <= cut)
        .min_by(|a, b| {
            a.device
                .layout_violations()
                .cmp(&b.device.layout_violations())
                .then(a.chi_square.total_cmp(&b.chi_square))
        })
        .expect("best fit passes its own cut"))
}

/// Fit of the tritter heaters' response (zero-power phases, linear and
/// quadratic coefficients) to a tritter-resistor scan, everything else held
/// at `known`.
pub fn fit_tritter_resistors(scan: &ScanDataset, known: &DeviceParams) -> Result<FitResult> {
    check_protocol(scan, ScanProtocol::TritterResistors)?;
    let init = super::tritter_init(scan, known)?;
    let problem = TritterProblem {
        base: known,
        samples: samples(scan),
    };
    let lm = levenberg_marquardt(&problem, &tritter_vector(&init), &LmOptions::default());
    let mut device = tritter_from_vector(known, &lm.x);
    let s = &mut device.thermal.static_phases;
    s.phi0_ta = crate::unitary::wrap_phase(s.phi0_ta);
    s.phi0_tb = crate::unitary::wrap_phase(s.phi0_tb);
    Ok(FitResult {
        values: tritter_vector(&device),
        device,
        names: TRITTER_PARAM_NAMES.to_vec(),
        errors: errors_from(&lm.covariance, 6),
        chi_square: lm.chi2,
        n_points: problem.samples.len(),
        iterations: lm.iterations,
        converged: lm.converged,
        gauge_flipped: false,
        arms_swapped: false,
    })
}

/// Model probability of a scan point, for either protocol.
pub fn scan_model_probability(
    device: &DeviceParams,
    protocol: ScanProtocol,
    input: usize,
    output: usize,
    resistor: ResistorId,
    power: f64,
) -> f64 {
    let mut all = [0.0; 6];
    all[resistor.index()] = power;
    let u = super::scan::protocol_unitary(device, protocol, &all);
    u[(output - 1, input - 1)].norm_sqr()
}

/// Weighted χ² of a device against a scan.
pub fn scan_chi_square(device: &DeviceParams, protocol: ScanProtocol, scan: &ScanDataset) -> f64 {
    scan.curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |p| (c, p)))
        .map(|(c, p)| {
            let q = scan_model_probability(device, protocol, c.input, c.output, c.resistor, p.power);
            ((q - p.probability) / p.std_err).powi(2)
        })
        .sum()
}
