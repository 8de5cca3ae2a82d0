//! Device parameter set: both tritters plus the thermal model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::matrix::ComplexMatrix;
use crate::thermal::{ResistorBank, StaticPhases};
use crate::unitary::{compose, wrap_phase, PhaseVector, TritterParams};

/// Resistance assigned to every heater of the bundled devices.
pub const DEFAULT_RESISTANCE: f64 = 80.0;

/// Static interferometer parameters and thermal response of one chip.
///
/// The tritter phases stored here are the operating values used when the
/// internal phases are scanned; the thermal bank describes how they move
/// with the tritter heaters from their zero-power values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub tritter_a: TritterParams,
    pub tritter_b: TritterParams,
    pub thermal: ResistorBank,
}

impl DeviceParams {
    /// The characterized chip.
    pub fn chip() -> Self {
        DeviceParams {
            tritter_a: TritterParams {
                t1: 0.414,
                t2: 0.617,
                t3: 0.411,
                phi: 1.893,
            },
            tritter_b: TritterParams {
                t1: 0.415,
                t2: 0.625,
                t3: 0.438,
                phi: 1.866,
            },
            thermal: ResistorBank {
                resistances: [DEFAULT_RESISTANCE; 6],
                alpha: [[24.35, 0.72, -23.54, -26.65], [8.85, 16.54, -17.45, -17.20]],
                alpha_nl: [[-0.34, -0.11, -0.16, 0.03], [-0.66, -0.55, -0.66, -1.21]],
                alpha_t: [9.06, 1.83],
                alpha_t_nl: [-0.35, 0.75],
                static_phases: StaticPhases {
                    dphi10: -0.355,
                    dphi20: -1.441,
                    phi0_ta: 1.137,
                    phi0_tb: 0.914,
                },
            },
        }
    }

    /// Balanced tritters (`+π/2`) with the characterized thermal response.
    pub fn ideal() -> Self {
        DeviceParams {
            tritter_a: TritterParams::balanced(1.0),
            tritter_b: TritterParams::balanced(1.0),
            ..Self::chip()
        }
    }

    pub fn ua(&self) -> ComplexMatrix {
        self.tritter_a.unitary()
    }

    pub fn ub(&self) -> ComplexMatrix {
        self.tritter_b.unitary()
    }

    /// Interferometer unitary at the given phase differences, tritters at
    /// their operating phases.
    pub fn unitary(&self, phases: &PhaseVector) -> ComplexMatrix {
        compose(&self.ua(), &self.ub(), phases)
    }

    /// Unitary when only the internal heaters are powered.
    pub fn unitary_internal_powers(&self, powers: &[f64; 4]) -> ComplexMatrix {
        self.unitary(&self.thermal.internal_phases(powers))
    }

    /// Unitary with every phase, tritters included, taken from the thermal
    /// model at the given powers.
    pub fn unitary_at_powers(&self, powers: &[f64; 6]) -> ComplexMatrix {
        let internal = self
            .thermal
            .internal_phases(&[powers[0], powers[1], powers[2], powers[3]]);
        let a = self.tritter_a.with_phi(self.thermal.tritter_phase(0, powers[4]));
        let b = self.tritter_b.with_phi(self.thermal.tritter_phase(1, powers[5]));
        compose(&a.unitary(), &b.unitary(), &internal)
    }

    /// Single-photon probabilities are unchanged when every phase-like
    /// parameter changes sign (the matrix is complex-conjugated up to a
    /// diagonal sign gauge). Pick the representative with `φ_TA ∈ [0, π]`.
    pub fn canonicalize_gauge(&mut self) -> bool {
        if wrap_phase(self.tritter_a.phi) >= 0.0 {
            return false;
        }
        self.tritter_a.phi = -self.tritter_a.phi;
        self.tritter_b.phi = -self.tritter_b.phi;
        let th = &mut self.thermal;
        for row in th.alpha.iter_mut().chain(th.alpha_nl.iter_mut()) {
            for a in row.iter_mut() {
                *a = -*a;
            }
        }
        for a in th.alpha_t.iter_mut().chain(th.alpha_t_nl.iter_mut()) {
            *a = -*a;
        }
        let s = &mut th.static_phases;
        s.dphi10 = -s.dphi10;
        s.dphi20 = -s.dphi20;
        s.phi0_ta = -s.phi0_ta;
        s.phi0_tb = -s.phi0_tb;
        true
    }

    /// The same single-photon statistics with arms 1 and 2 relabelled:
    /// the couplers facing the internal arms swap transmission and
    /// reflection, both tritter phases move by π, and the two rows of
    /// thermal coefficients trade places.
    pub fn with_swapped_arms(&self) -> Self {
        let mut d = self.clone();
        d.tritter_a.t3 = 1.0 - self.tritter_a.t3;
        d.tritter_b.t1 = 1.0 - self.tritter_b.t1;
        d.tritter_a.phi = wrap_phase(self.tritter_a.phi + PI);
        d.tritter_b.phi = wrap_phase(self.tritter_b.phi + PI);
        let (src, th) = (&self.thermal, &mut d.thermal);
        th.alpha = [src.alpha[1], src.alpha[0]];
        th.alpha_nl = [src.alpha_nl[1], src.alpha_nl[0]];
        let s = &mut th.static_phases;
        s.phi0_ta = wrap_phase(src.static_phases.phi0_ta + PI);
        s.phi0_tb = wrap_phase(src.static_phases.phi0_tb + PI);
        s.dphi10 = wrap_phase(src.static_phases.dphi20 + PI);
        s.dphi20 = wrap_phase(src.static_phases.dphi10 + PI);
        d
    }

    /// Pick the arm labelling in which `R1` and `R2` act most on their own
    /// arms, `|α₁₁| + |α₂₂| ≥ |α₂₁| + |α₁₂|`.
    pub fn canonicalize_arms(&mut self) -> bool {
        let a = &self.thermal.alpha;
        if a[0][0].abs() + a[1][1].abs() >= a[1][0].abs() + a[0][1].abs() {
            return false;
        }
        *self = self.with_swapped_arms();
        true
    }

    /// How many internal heaters break the layout rule: `R1` moves arm 1
    /// the most, `R2` arm 2, and `R3`/`R4` the reference arm. Arm responses
    /// are the linear coefficients `(α₁ᵢ, α₂ᵢ, 0)` and the rule is scored
    /// for the better of the two heating orientations.
    pub fn layout_violations(&self) -> usize {
        let a = &self.thermal.alpha;
        let count = |orient: f64| {
            (0..4)
                .filter(|&i| {
                    let arms = [orient * a[0][i], orient * a[1][i], 0.0];
                    let expected = if i < 2 { i } else { 2 };
                    arms.iter().enumerate().any(|(k, &v)| k != expected && v > arms[expected])
                })
                .count()
        };
        count(1.0).min(count(-1.0))
    }

    /// Same as `self` with every phase reduced to (−π, π].
    pub fn with_wrapped_phases(&self) -> Self {
        let mut d = self.clone();
        d.tritter_a.phi = wrap_phase(d.tritter_a.phi);
        d.tritter_b.phi = wrap_phase(d.tritter_b.phi);
        let s = &mut d.thermal.static_phases;
        s.dphi10 = wrap_phase(s.dphi10);
        s.dphi20 = wrap_phase(s.dphi20);
        s.phi0_ta = wrap_phase(s.phi0_ta);
        s.phi0_tb = wrap_phase(s.phi0_tb);
        d
    }
}

/// Matrices and figures of merit reported for the fabricated chip.
pub mod reference {
    use super::*;

    pub const FIDELITY_A: f64 = 0.9830;
    pub const FIDELITY_B: f64 = 0.9863;
    pub const AVERAGE_FIDELITY: f64 = 0.963;
    pub const IDENTITY_SIMILARITY: f64 = 0.979;
    /// Voltages found by the three-step tritter setting on the real chip.
    pub const SETTING_VOLTAGES: [(&str, f64); 4] =
        [("R1", 2.05), ("R2", 2.01), ("RTB", 5.94), ("RTA", 2.90)];

    /// Implemented first tritter in the balanced configuration.
    pub fn balanced_ua() -> ComplexMatrix {
        ComplexMatrix::from_parts([
            [(-0.441, 0.557), (-0.468, 0.148), (-0.504, 0.0)],
            [(-0.466, 0.150), (0.494, -0.391), (0.0, 0.602)],
            [(-0.505, 0.0), (0.0, 0.601), (0.619, 0.0)],
        ])
    }

    /// Implemented second tritter in the balanced configuration.
    pub fn balanced_ub() -> ComplexMatrix {
        ComplexMatrix::from_parts([
            [(-0.428, 0.549), (-0.462, 0.170), (-0.523, 0.0)],
            [(-0.484, 0.149), (0.475, -0.408), (0.0, 0.592)],
            [(-0.509, 0.0), (0.0, 0.605), (0.613, 0.0)],
        ])
    }

    /// First transformation of the identity configuration exactly as
    /// printed. Its first two rows are far from orthogonal.
    pub fn identity_ua_as_printed() -> ComplexMatrix {
        ComplexMatrix::from_parts([
            [(-0.368, -0.562), (0.476, 0.220), (-0.523, 0.003)],
            [(-0.499, 0.202), (0.431, 0.417), (0.002, 0.592)],
            [(-0.509, 0.0), (0.0, 0.605), (0.613, 0.0)],
        ])
    }

    /// First transformation of the identity configuration with the sign of
    /// Re(U₂₁) flipped, which restores unitarity to print precision.
    pub fn identity_ua() -> ComplexMatrix {
        let mut m = identity_ua_as_printed();
        m[(1, 0)].re = -m[(1, 0)].re;
        m
    }

    /// Second transformation of the identity configuration.
    pub fn identity_ub() -> ComplexMatrix {
        ComplexMatrix::from_parts([
            [(-0.392, 0.564), (0.452, -0.266), (-0.504, 0.0)],
            [(-0.487, 0.191), (-0.390, 0.460), (0.0, 0.605)],
            [(-0.505, 0.0147), (-0.080, -0.596), (0.619, 0.0)],
        ])
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}
