//! Construction of the interferometer unitaries from directional couplers
//! and phase shifters, plus fidelity metrics.
//!
//! Matrix products follow the usual operator convention: the right-most
//! factor acts first on the input modes.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::matrix::ComplexMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which pair of adjacent modes a directional coupler mixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplerPair {
    Modes12,
    Modes23,
}

impl CouplerPair {
    fn indices(self) -> (usize, usize) {
        match self {
            CouplerPair::Modes12 => (0, 1),
            CouplerPair::Modes23 => (1, 2),
        }
    }
}

/// Lossless directional coupler with transmission `t`.
pub fn coupler_matrix(t: f64, pair: CouplerPair) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("transmission {t} outside [0, 1]")));
    }
    Ok(coupler_unchecked(t, pair))
}

fn coupler_unchecked(t: f64, pair: CouplerPair) -> ComplexMatrix {
    let (a, b) = pair.indices();
    let t = t.clamp(0.0, 1.0);
    let mut m = ComplexMatrix::identity(3);
    let d = Complex64::new((1.0 - t).sqrt(), 0.0);
    let o = I * t.sqrt();
    m[(a, a)] = d;
    m[(b, b)] = d;
    m[(a, b)] = o;
    m[(b, a)] = o;
    m
}

/// d/dt of the coupler matrix. Diverges at the endpoints t ∈ {0, 1}.
fn coupler_derivative(t: f64, pair: CouplerPair) -> ComplexMatrix {
    let (a, b) = pair.indices();
    let mut m = ComplexMatrix::zeros(3, 3);
    let d = Complex64::new(-0.5 / (1.0 - t).sqrt(), 0.0);
    let o = I * (0.5 / t.sqrt());
    m[(a, a)] = d;
    m[(b, b)] = d;
    m[(a, b)] = o;
    m[(b, a)] = o;
    m
}

/// Diagonal phase shifter adding `e^{iφ}` on `mode` (1-based).
pub fn phase_shifter_matrix(mode: usize, phase: f64) -> Result<ComplexMatrix> {
    if !(1..=3).contains(&mode) {
        return Err(Error::domain(format!("mode {mode} is not one of 1, 2, 3")));
    }
    Ok(phase_shifter_unchecked(mode - 1, phase))
}

fn phase_shifter_unchecked(index: usize, phase: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(3);
    m[(index, index)] = Complex64::from_polar(1.0, phase);
    m
}

/// Coupler transmissions and internal phase of one tritter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TritterParams {
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T2")]
    pub t2: f64,
    #[serde(rename = "T3")]
    pub t3: f64,
    /// Internal phase on mode 1, radians.
    pub phi: f64,
}

impl TritterParams {
    pub fn new(t1: f64, t2: f64, t3: f64, phi: f64) -> Result<Self> {
        let p = TritterParams { t1, t2, t3, phi };
        p.validate()?;
        Ok(p)
    }

    /// The balanced tritter: `T₁ = T₃ = 1/2`, `T₂ = 2/3`, `φ = ±π/2`.
    /// `sign > 0` selects `+π/2`, the canonical choice.
    pub fn balanced(sign: f64) -> Self {
        TritterParams {
            t1: 0.5,
            t2: 2.0 / 3.0,
            t3: 0.5,
            phi: FRAC_PI_2.copysign(sign),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("T1", self.t1), ("T2", self.t2), ("T3", self.t3)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::domain(format!("{name} = {t} outside [0, 1]")));
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::domain("tritter phase is not finite"));
        }
        Ok(())
    }

    pub fn with_phi(self, phi: f64) -> Self {
        TritterParams { phi, ..self }
    }

    /// `U_T3 · PS(φ) · U_T2 · U_T1`. Transmissions are clamped to [0, 1].
    pub fn unitary(&self) -> ComplexMatrix {
        let c1 = coupler_unchecked(self.t1, CouplerPair::Modes12);
        let c2 = coupler_unchecked(self.t2, CouplerPair::Modes23);
        let c3 = coupler_unchecked(self.t3, CouplerPair::Modes12);
        let ps = phase_shifter_unchecked(0, self.phi);
        &(&(&c3 * &ps) * &c2) * &c1
    }

    /// Partial derivatives of [`Self::unitary`] with respect to
    /// `(t1, t2, t3, phi)`.
    pub(crate) fn unitary_derivatives(&self) -> [ComplexMatrix; 4] {
        let c1 = coupler_unchecked(self.t1, CouplerPair::Modes12);
        let c2 = coupler_unchecked(self.t2, CouplerPair::Modes23);
        let c3 = coupler_unchecked(self.t3, CouplerPair::Modes12);
        let ps = phase_shifter_unchecked(0, self.phi);
        let mut dps = ComplexMatrix::zeros(3, 3);
        dps[(0, 0)] = I * Complex64::from_polar(1.0, self.phi);

        let d1 = coupler_derivative(self.t1, CouplerPair::Modes12);
        let d2 = coupler_derivative(self.t2, CouplerPair::Modes23);
        let d3 = coupler_derivative(self.t3, CouplerPair::Modes12);

        let c3ps = &c3 * &ps;
        let c3psc2 = &c3ps * &c2;
        let c2c1 = &c2 * &c1;
        [
            &c3psc2 * &d1,
            &(&c3ps * &d2) * &c1,
            &(&(&d3 * &ps) * &c2) * &c1,
            &(&c3 * &dps) * &c2c1,
        ]
    }
}

/// Validated tritter construction.
pub fn tritter(params: &TritterParams) -> Result<ComplexMatrix> {
    params.validate()?;
    Ok(params.unitary())
}

/// The two physical phase differences and the (gauge) reference phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    pub dphi1: f64,
    pub dphi2: f64,
    #[serde(default)]
    pub phi_ref: f64,
}

impl PhaseVector {
    pub fn new(dphi1: f64, dphi2: f64) -> Self {
        PhaseVector {
            dphi1,
            dphi2,
            phi_ref: 0.0,
        }
    }

    pub fn with_reference(mut self, phi_ref: f64) -> Self {
        self.phi_ref = phi_ref;
        self
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.dphi1, self.dphi2]
    }

    /// Phase differences reduced to (−π, π].
    pub fn wrapped(&self) -> Self {
        PhaseVector {
            dphi1: wrap_phase(self.dphi1),
            dphi2: wrap_phase(self.dphi2),
            phi_ref: wrap_phase(self.phi_ref),
        }
    }

    /// Absolute arm phases `(φ₁, φ₂, φ_ref)`.
    pub fn arm_phases(&self) -> [f64; 3] {
        [
            self.dphi1 + self.phi_ref,
            self.dphi2 + self.phi_ref,
            self.phi_ref,
        ]
    }
}

/// Reduce an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Diagonal phase layer between the two tritters.
#[cfg(test)]
pub(crate) fn phase_layer(phases: &PhaseVector) -> ComplexMatrix {
    let arms = phases.arm_phases();
    ComplexMatrix::diagonal(&arms.map(|p| Complex64::from_polar(1.0, p)))
}

/// `U^B · PS₃(φ_ref) · PS₂(φ₂) · PS₁(φ₁) · U^A`.
pub fn interferometer(
    tritter_a: &TritterParams,
    tritter_b: &TritterParams,
    phases: &PhaseVector,
) -> ComplexMatrix {
    compose(&tritter_a.unitary(), &tritter_b.unitary(), phases)
}

pub(crate) fn compose(
    ua: &ComplexMatrix,
    ub: &ComplexMatrix,
    phases: &PhaseVector,
) -> ComplexMatrix {
    let arms = phases.arm_phases();
    let ps3 = phase_shifter_unchecked(2, arms[2]);
    let ps2 = phase_shifter_unchecked(1, arms[1]);
    let ps1 = phase_shifter_unchecked(0, arms[0]);
    &(&(&(ub * &ps3) * &ps2) * &ps1) * ua
}

/// Literal symmetric tritter: `3^{-1/2}` on the diagonal and
/// `3^{-1/2} e^{i2π/3}` elsewhere.
pub fn symmetric_tritter() -> ComplexMatrix {
    let s = 1.0 / 3f64.sqrt();
    let off = Complex64::from_polar(s, 2.0 * PI / 3.0);
    let mut m = ComplexMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = if i == j { Complex64::new(s, 0.0) } else { off };
        }
    }
    m
}

/// The ideal tritter of the coupler decomposition, `tritter(1/2, 2/3, 1/2, +π/2)`.
///
/// It differs from [`symmetric_tritter`] by input and output phases only,
/// which the trace fidelity does not ignore; the implemented device
/// tritters are scored against this one.
pub fn balanced_tritter() -> ComplexMatrix {
    TritterParams::balanced(1.0).unitary()
}

/// `|Tr(u·v†)| / m`.
pub fn fidelity(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if !u.is_square() || !v.is_square() || u.rows() != v.rows() {
        return Err(Error::domain(format!(
            "fidelity needs equal square matrices, got {}x{} and {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let m = u.rows() as f64;
    Ok((u * &v.adjoint()).trace().norm() / m)
}

/// Mean over the grid of the fidelity between the device unitary and the
/// balanced-tritter interferometer at the same phases.
pub fn average_fidelity(device: &DeviceParams, grid: &PhaseGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::domain("phase grid is empty"));
    }
    let ideal = balanced_tritter();
    let ua = device.tritter_a.unitary();
    let ub = device.tritter_b.unitary();
    let points = grid.points();
    let mut total = 0.0;
    for p in &points {
        let real = compose(&ua, &ub, p);
        let target = compose(&ideal, &ideal, p);
        total += fidelity(&real, &target)?;
    }
    Ok(total / points.len() as f64)
}
