//! Classical and quantum Fisher information for the two phase differences.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::photonics::{probs_and_gradients, DistinguishabilityModel, FockState};
use crate::unitary::PhaseVector;

/// Events less likely than this are left out of the classical sum.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Condition number above which a Fisher matrix is reported singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Eigenvalue threshold of [`positive_eigencount`].
pub const EIGEN_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FisherKind {
    Classical,
    Quantum,
}

/// Symmetric information matrix over the estimated phases (rad⁻²).
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub kind: FisherKind,
    pub entries: DMatrix<f64>,
}

impl FisherMatrix {
    /// Symmetrizes `entries` after checking it is square and symmetric
    /// within 1e-10 relative to its scale.
    pub fn new(kind: FisherKind, entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::domain("Fisher matrix must be square"));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > 1e-10 * scale {
            return Err(Error::domain(format!("Fisher matrix not symmetric ({asym:e})")));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(FisherMatrix { kind, entries: sym })
    }

    pub fn from_2x2(kind: FisherKind, m: Matrix2<f64>) -> Self {
        let entries = DMatrix::from_fn(2, 2, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        FisherMatrix { kind, entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// `max|λ| / min|λ|`; infinite when an eigenvalue vanishes.
    pub fn condition_number(&self) -> f64 {
        let e = self.eigenvalues();
        let max = e.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let min = e.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues().first().is_none_or(|&l| l >= -tol)
    }

    pub fn is_singular(&self) -> bool {
        let c = self.condition_number();
        !(c <= SINGULAR_CONDITION)
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let condition = self.condition_number();
        if !(condition <= SINGULAR_CONDITION) {
            return Err(Error::Singular { condition });
        }
        self.entries
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { condition })
    }

    /// `Tr(F⁻¹)`, the scalar Cramér–Rao bound for one event.
    pub fn crb_trace(&self) -> Result<f64> {
        Ok(self.inverse()?.trace())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        FisherMatrix {
            kind: self.kind,
            entries: &self.entries * factor,
        }
    }
}

/// Per-event probabilities and phase derivatives.
#[derive(Debug, Clone)]
pub struct EventGradients {
    pub events: Vec<FockState>,
    pub probabilities: Vec<f64>,
    /// `(∂P/∂Δφ₁, ∂P/∂Δφ₂)` per event.
    pub gradients: Vec<[f64; 2]>,
}

/// Device unitary and its derivatives with respect to `Δφ₁`, `Δφ₂`.
pub(crate) fn unitary_with_phase_derivatives(
    ua: &ComplexMatrix,
    ub: &ComplexMatrix,
    phases: &PhaseVector,
) -> (ComplexMatrix, [ComplexMatrix; 2]) {
    let arms = phases.arm_phases();
    let d: Vec<Complex64> = arms.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
    let layer = ComplexMatrix::diagonal(&d);
    let u = &(ub * &layer) * ua;
    let du = [0, 1].map(|j| {
        let mut e = ComplexMatrix::zeros(3, 3);
        e[(j, j)] = Complex64::i() * d[j];
        &(ub * &e) * ua
    });
    (u, du)
}

fn gradients_from_unitaries(
    ua: &ComplexMatrix,
    ub: &ComplexMatrix,
    phases: &PhaseVector,
    input: &FockState,
    model: &DistinguishabilityModel,
) -> Result<EventGradients> {
    model.validate()?;
    let n = input.total();
    if n == 0 || n > 3 {
        return Err(Error::domain(format!("unsupported photon number {n}")));
    }
    let (u, du) = unitary_with_phase_derivatives(ua, ub, phases);
    let (events, probabilities, g) =
        probs_and_gradients(&u, &du, input, model.effective_visibility());
    let gradients = (0..events.len()).map(|e| [g[0][e], g[1][e]]).collect();
    Ok(EventGradients {
        events,
        probabilities,
        gradients,
    })
}

/// Analytic phase gradients of every output probability.
pub fn prob_gradient(
    device: &DeviceParams,
    phases: &PhaseVector,
    input: &FockState,
    model: &DistinguishabilityModel,
) -> Result<EventGradients> {
    gradients_from_unitaries(&device.ua(), &device.ub(), phases, input, model)
}

pub(crate) fn fisher_from_gradients(g: &EventGradients) -> FisherMatrix {
    let mut m = Matrix2::zeros();
    for (p, d) in g.probabilities.iter().zip(&g.gradients) {
        if *p < PROBABILITY_FLOOR {
            continue;
        }
        for j in 0..2 {
            for k in 0..2 {
                m[(j, k)] += d[j] * d[k] / p;
            }
        }
    }
    FisherMatrix::from_2x2(FisherKind::Classical, m)
}

/// Classical Fisher information of the coincidence distribution.
pub fn fisher_matrix(
    device: &DeviceParams,
    phases: &PhaseVector,
    input: &FockState,
    model: &DistinguishabilityModel,
) -> Result<FisherMatrix> {
    Ok(fisher_from_gradients(&prob_gradient(device, phases, input, model)?))
}

pub(crate) fn fisher_with_unitaries(
    ua: &ComplexMatrix,
    ub: &ComplexMatrix,
    phases: &PhaseVector,
    input: &FockState,
    model: &DistinguishabilityModel,
) -> Result<FisherMatrix> {
    Ok(fisher_from_gradients(&gradients_from_unitaries(ua, ub, phases, input, model)?))
}

/// Arm whose phase is the gauge; the two others carry the estimated phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ReferenceArm {
    First,
    Second,
    #[default]
    Third,
}

impl ReferenceArm {
    /// 0-based arms of `(Δφ₁, Δφ₂)`.
    pub fn estimated_arms(self) -> [usize; 2] {
        match self {
            ReferenceArm::First => [1, 2],
            ReferenceArm::Second => [0, 2],
            ReferenceArm::Third => [0, 1],
        }
    }
}

/// Pure-state quantum Fisher information of the state prepared by `ua`.
///
/// Phases are generated by the arm photon numbers, so the matrix is
/// `4·Cov(n_a, n_b)` over the photon-number distribution after `ua` and
/// does not depend on the phase values.
pub fn qfim_pure(
    ua: &ComplexMatrix,
    input: &FockState,
    model: &DistinguishabilityModel,
    reference: ReferenceArm,
) -> Result<FisherMatrix> {
    model.validate()?;
    if model.effective_visibility() < 1.0 {
        return Err(Error::Unsupported(format!(
            "pure-state QFIM needs V = 1, got {}",
            model.effective_visibility()
        )));
    }
    let n = input.total();
    if n == 0 || n > 3 {
        return Err(Error::domain(format!("unsupported photon number {n}")));
    }
    let dist = crate::photonics::output_probs(ua, input, model)?;
    let arms = reference.estimated_arms();
    let mut mean = [0.0; 2];
    let mut second = Matrix2::<f64>::zeros();
    for (e, p) in &dist.events {
        let occ = arms.map(|a| e.occupations[a] as f64);
        for j in 0..2 {
            mean[j] += p * occ[j];
            for k in 0..2 {
                second[(j, k)] += p * occ[j] * occ[k];
            }
        }
    }
    let h = Matrix2::from_fn(|j, k| 4.0 * (second[(j, k)] - mean[j] * mean[k]));
    Ok(FisherMatrix::from_2x2(FisherKind::Quantum, h))
}

/// Quantum Fisher information of the device's preparation stage.
pub fn device_qfim(
    device: &DeviceParams,
    input: &FockState,
    model: &DistinguishabilityModel,
    reference: ReferenceArm,
) -> Result<FisherMatrix> {
    qfim_pure(&device.ua(), input, model, reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchmarkKind {
    /// All photons probe both phases at once.
    Simultaneous,
    /// Half the photons probe each phase.
    Separate,
}

/// Single-photon QFIM of a probe spreading over the arms with
/// probabilities `(p₁, p₂, 1 − p₁ − p₂)`.
fn single_photon_qfim(p1: f64, p2: f64) -> Matrix2<f64> {
    Matrix2::new(
        4.0 * p1 * (1.0 - p1),
        -4.0 * p1 * p2,
        -4.0 * p1 * p2,
        4.0 * p2 * (1.0 - p2),
    )
}

fn simplex_point(z: &[f64]) -> (f64, f64) {
    let w = [z[0].exp(), z[1].exp(), 1.0];
    let s: f64 = w.iter().sum();
    (w[0] / s, w[1] / s)
}

/// Quantum Fisher information reachable with `n_photons` distinguishable
/// single photons, each in the best single-photon probe state.
///
/// The simultaneous benchmark optimizes the probe amplitudes numerically
/// over the simplex and sums `n_photons` copies. The separate benchmark
/// sends half of the photons through each phase with an even split, which
/// requires an even photon number.
pub fn classical_benchmark(kind: BenchmarkKind, n_photons: usize) -> Result<FisherMatrix> {
    if n_photons == 0 {
        return Err(Error::domain("benchmark needs at least one photon"));
    }
    let n = n_photons as f64;
    match kind {
        BenchmarkKind::Separate => {
            if !n_photons.is_multiple_of(2) {
                return Err(Error::domain(format!(
                    "separate benchmark needs an even photon number, got {n_photons}"
                )));
            }
            Ok(FisherMatrix::from_2x2(
                FisherKind::Quantum,
                Matrix2::new(n / 2.0, 0.0, 0.0, n / 2.0),
            ))
        }
        BenchmarkKind::Simultaneous => {
            let objective = |z: &[f64]| {
                let (p1, p2) = simplex_point(z);
                single_photon_qfim(p1, p2)
                    .try_inverse()
                    .map_or(f64::INFINITY, |inv| inv.trace())
            };
            let opts = NelderMeadOptions {
                max_iter: 5000,
                xtol: 1e-12,
                ftol: 1e-16,
                step: 0.3,
            };
            let best = nelder_mead(objective, &[0.0, 0.0], &opts);
            let (p1, p2) = simplex_point(&best.x);
            Ok(FisherMatrix::from_2x2(
                FisherKind::Quantum,
                single_photon_qfim(p1, p2) * n,
            ))
        }
    }
}

/// Number of eigenvalues of `a − b` above [`EIGEN_THRESHOLD`].
pub fn positive_eigencount(a: &FisherMatrix, b: &FisherMatrix) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::domain("Fisher matrices of different dimension"));
    }
    let diff = &a.entries - &b.entries;
    Ok(diff
        .symmetric_eigenvalues()
        .iter()
        .filter(|&&l| l > EIGEN_THRESHOLD)
        .count())
}
