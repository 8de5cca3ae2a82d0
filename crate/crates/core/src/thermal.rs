//! Thermo-optic phase control: resistor powers to interferometer phases,
//! the inverse map, and the single-exponential settling transient.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unitary::{wrap_phase, PhaseVector};

/// Default upper bound on the power dissipated by one resistor.
pub const DEFAULT_P_MAX: f64 = 1.2;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

/// The six heaters on the chip. `R1..R4` sit on the internal arms, `RTA`
/// and `RTB` on the internal phase of each tritter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResistorId {
    R1,
    R2,
    R3,
    R4,
    RTA,
    RTB,
}

impl ResistorId {
    pub const ALL: [ResistorId; 6] = [
        ResistorId::R1,
        ResistorId::R2,
        ResistorId::R3,
        ResistorId::R4,
        ResistorId::RTA,
        ResistorId::RTB,
    ];
    pub const INTERNAL: [ResistorId; 4] =
        [ResistorId::R1, ResistorId::R2, ResistorId::R3, ResistorId::R4];
    pub const TRITTER: [ResistorId; 2] = [ResistorId::RTA, ResistorId::RTB];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_internal(self) -> bool {
        self.index() < 4
    }

    pub fn name(self) -> &'static str {
        match self {
            ResistorId::R1 => "R1",
            ResistorId::R2 => "R2",
            ResistorId::R3 => "R3",
            ResistorId::R4 => "R4",
            ResistorId::RTA => "RTA",
            ResistorId::RTB => "RTB",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        ResistorId::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown resistor `{s}`")))
    }
}

impl fmt::Display for ResistorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Phases with no power applied anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticPhases {
    pub dphi10: f64,
    pub dphi20: f64,
    #[serde(rename = "phi0TA")]
    pub phi0_ta: f64,
    #[serde(rename = "phi0TB")]
    pub phi0_tb: f64,
}

/// Resistances and thermal response coefficients.
///
/// `alpha[j][i]` is the linear response of phase difference `j` to the
/// power on internal resistor `i` (rad/W); `alpha_nl` the quadratic one
/// (rad/W²). There are no cross terms between resistors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistorBank {
    /// Ohms, ordered as [`ResistorId::ALL`].
    pub resistances: [f64; 6],
    pub alpha: [[f64; 4]; 2],
    pub alpha_nl: [[f64; 4]; 2],
    /// `[α_TA, α_TB]`, rad/W.
    #[serde(rename = "alpha_T")]
    pub alpha_t: [f64; 2],
    /// `[α^NL_TA, α^NL_TB]`, rad/W².
    #[serde(rename = "alpha_nl_T")]
    pub alpha_t_nl: [f64; 2],
    pub static_phases: StaticPhases,
}

/// All phases produced by one power setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPhases {
    pub internal: PhaseVector,
    pub phi_ta: f64,
    pub phi_tb: f64,
}

/// Applied voltages, ordered as [`ResistorId::ALL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSetting {
    pub voltages: [f64; 6],
}

impl VoltageSetting {
    pub fn new(voltages: [f64; 6]) -> Result<Self> {
        if voltages.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::domain("voltages must be nonnegative"));
        }
        Ok(VoltageSetting { voltages })
    }

    pub fn powers(&self, bank: &ResistorBank) -> Result<[f64; 6]> {
        let mut p = [0.0; 6];
        for (k, slot) in p.iter_mut().enumerate() {
            *slot = dissipated_power(self.voltages[k], bank.resistances[k])?;
        }
        Ok(p)
    }
}

/// `V² / R`.
pub fn dissipated_power(volts: f64, ohms: f64) -> Result<f64> {
    if !(ohms > 0.0) {
        return Err(Error::domain(format!("resistance {ohms} must be positive")));
    }
    if !(volts >= 0.0) {
        return Err(Error::domain(format!("voltage {volts} must be nonnegative")));
    }
    Ok(volts * volts / ohms)
}

/// Voltage required to dissipate `watts` in `ohms`.
pub fn voltage_for_power(watts: f64, ohms: f64) -> f64 {
    (watts.max(0.0) * ohms).sqrt()
}

impl ResistorBank {
    pub fn validate(&self) -> Result<()> {
        if self.resistances.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::domain("all resistances must be strictly positive"));
        }
        Ok(())
    }

    /// Internal phase differences with only the internal resistors powered.
    pub fn internal_phases(&self, internal_powers: &[f64; 4]) -> PhaseVector {
        let s = &self.static_phases;
        let mut d = [s.dphi10, s.dphi20];
        for (j, dj) in d.iter_mut().enumerate() {
            for (i, &p) in internal_powers.iter().enumerate() {
                *dj += self.alpha[j][i] * p + self.alpha_nl[j][i] * p * p;
            }
        }
        PhaseVector::new(d[0], d[1])
    }

    /// Tritter phase `φ_T = φ₀ + α P + α^NL P²`; `which` is 0 for A, 1 for B.
    pub fn tritter_phase(&self, which: usize, power: f64) -> f64 {
        let phi0 = if which == 0 {
            self.static_phases.phi0_ta
        } else {
            self.static_phases.phi0_tb
        };
        phi0 + self.alpha_t[which] * power + self.alpha_t_nl[which] * power * power
    }

    /// d(Δφ_j)/dP_i for an internal resistor.
    fn internal_slope(&self, j: usize, i: usize, p: f64) -> f64 {
        self.alpha[j][i] + 2.0 * self.alpha_nl[j][i] * p
    }
}

/// Forward thermal response for the full power vector.
pub fn phases_from_powers(bank: &ResistorBank, powers: &[f64; 6]) -> Result<ThermalPhases> {
    if powers.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::domain("dissipated powers must be nonnegative"));
    }
    let internal = bank.internal_phases(&[powers[0], powers[1], powers[2], powers[3]]);
    Ok(ThermalPhases {
        internal,
        phi_ta: bank.tritter_phase(0, powers[4]),
        phi_tb: bank.tritter_phase(1, powers[5]),
    })
}

/// Powers on two internal resistors (all others off) that put the phase
/// differences on `target` modulo 2π, choosing the 2π branch with the
/// smallest total dissipated power.
pub fn powers_for_target_phases(
    bank: &ResistorBank,
    target: &PhaseVector,
    active: [ResistorId; 2],
    p_max: f64,
) -> Result<[f64; 2]> {
    let [a, b] = active;
    if !a.is_internal() || !b.is_internal() || a == b {
        return Err(Error::domain(
            "phase inversion needs two distinct internal resistors",
        ));
    }
    let (ia, ib) = (a.index(), b.index());
    let det = bank.alpha[0][ia] * bank.alpha[1][ib] - bank.alpha[0][ib] * bank.alpha[1][ia];
    if det.abs() < 1e-12 {
        return Err(Error::domain(format!(
            "resistors {a} and {b} do not control independent phase combinations"
        )));
    }

    let forward = |p: [f64; 2]| -> [f64; 2] {
        let mut all = [0.0; 4];
        all[ia] = p[0];
        all[ib] = p[1];
        bank.internal_phases(&all).as_array()
    };

    // Largest phase excursion reachable inside the box bounds the branch search.
    let excursion = (0..2)
        .map(|j| {
            [ia, ib]
                .iter()
                .map(|&i| bank.alpha[j][i].abs() * p_max + bank.alpha_nl[j][i].abs() * p_max * p_max)
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let k_max = (excursion / (2.0 * PI)).ceil() as i64 + 1;

    let s = &bank.static_phases;
    let base = [target.dphi1 - s.dphi10, target.dphi2 - s.dphi20];
    let mut best: Option<[f64; 2]> = None;
    for k1 in -k_max..=k_max {
        for k2 in -k_max..=k_max {
            let goal = [
                base[0] + 2.0 * PI * k1 as f64,
                base[1] + 2.0 * PI * k2 as f64,
            ];
            if let Some(p) = newton_inverse(bank, ia, ib, goal) {
                if p.iter().all(|&x| (-1e-12..=p_max).contains(&x)) {
                    let p = [p[0].max(0.0), p[1].max(0.0)];
                    if best.is_none_or(|q| p[0] + p[1] < q[0] + q[1]) {
                        best = Some(p);
                    }
                }
            }
        }
    }

    if let Some(p) = best {
        return Ok(p);
    }

    // Nothing feasible: report the closest point of the power box.
    let n = 80;
    let mut nearest = forward([0.0, 0.0]);
    let mut best_dist = f64::INFINITY;
    for u in 0..=n {
        for v in 0..=n {
            let p = [p_max * u as f64 / n as f64, p_max * v as f64 / n as f64];
            let ph = forward(p);
            let d = wrap_phase(ph[0] - target.dphi1).powi(2) + wrap_phase(ph[1] - target.dphi2).powi(2);
            if d < best_dist {
                best_dist = d;
                nearest = ph;
            }
        }
    }
    Err(Error::Unreachable {
        p_max,
        nearest: [wrap_phase(nearest[0]), wrap_phase(nearest[1])],
    })
}

/// Damped Newton on `Σ_i (α_ji P_i + α^NL_ji P_i²) = goal_j`, started from
/// the linear solution.
fn newton_inverse(bank: &ResistorBank, ia: usize, ib: usize, goal: [f64; 2]) -> Option<[f64; 2]> {
    let residual = |p: [f64; 2]| -> [f64; 2] {
        let mut r = [0.0; 2];
        for (j, rj) in r.iter_mut().enumerate() {
            *rj = bank.alpha[j][ia] * p[0]
                + bank.alpha_nl[j][ia] * p[0] * p[0]
                + bank.alpha[j][ib] * p[1]
                + bank.alpha_nl[j][ib] * p[1] * p[1]
                - goal[j];
        }
        r
    };
    let solve = |m: [[f64; 2]; 2], rhs: [f64; 2]| -> Option<[f64; 2]> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        Some([
            (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
            (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
        ])
    };

    let lin = [
        [bank.alpha[0][ia], bank.alpha[0][ib]],
        [bank.alpha[1][ia], bank.alpha[1][ib]],
    ];
    let mut p = solve(lin, goal)?;
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut r = residual(p);
    for _ in 0..NEWTON_MAX_ITER {
        if norm(r) <= NEWTON_TOL {
            return Some(p);
        }
        let jac = [
            [bank.internal_slope(0, ia, p[0]), bank.internal_slope(0, ib, p[1])],
            [bank.internal_slope(1, ia, p[0]), bank.internal_slope(1, ib, p[1])],
        ];
        let step = solve(jac, r)?;
        let mut lambda = 1.0;
        loop {
            let trial = [p[0] - lambda * step[0], p[1] - lambda * step[1]];
            let rt = residual(trial);
            if norm(rt) < norm(r) || lambda < 1e-6 {
                p = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
    }
    (norm(r) <= NEWTON_TOL * 10.0).then_some(p)
}

/// Smallest power on a tritter heater (`which` 0 for A, 1 for B) giving the
/// tritter phase `target` modulo 2π.
pub fn power_for_tritter_phase(
    bank: &ResistorBank,
    which: usize,
    target: f64,
    p_max: f64,
) -> Result<f64> {
    if which > 1 {
        return Err(Error::domain("tritter index must be 0 (A) or 1 (B)"));
    }
    let (a, c) = (bank.alpha_t[which], bank.alpha_t_nl[which]);
    let phi0 = bank.tritter_phase(which, 0.0);
    let reach = a.abs() * p_max + c.abs() * p_max * p_max;
    let k_max = (reach / (2.0 * PI)).ceil() as i64 + 1;
    let mut best: Option<f64> = None;
    for k in -k_max..=k_max {
        let goal = target - phi0 + 2.0 * PI * k as f64;
        let roots: Vec<f64> = if c.abs() < 1e-14 {
            if a == 0.0 {
                Vec::new()
            } else {
                vec![goal / a]
            }
        } else {
            let disc = a * a + 4.0 * c * goal;
            if disc < 0.0 {
                Vec::new()
            } else {
                let sq = disc.sqrt();
                vec![(-a + sq) / (2.0 * c), (-a - sq) / (2.0 * c)]
            }
        };
        for p in roots {
            if (-1e-12..=p_max).contains(&p) && best.is_none_or(|b| p < b) {
                best = Some(p.max(0.0));
            }
        }
    }
    best.ok_or_else(|| {
        let n = 400;
        let nearest = (0..=n)
            .map(|u| bank.tritter_phase(which, p_max * u as f64 / n as f64))
            .min_by(|x, y| {
                wrap_phase(x - target).abs().total_cmp(&wrap_phase(y - target).abs())
            })
            .unwrap_or(phi0);
        Error::Unreachable {
            p_max,
            nearest: [wrap_phase(nearest), f64::NAN],
        }
    })
}

/// Effective power `t` seconds after a step from `p_before` to `p_after`.
pub fn transient_response(p_before: f64, p_after: f64, tau: f64, t: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::domain("time constant must be positive"));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("elapsed time must be nonnegative"));
    }
    Ok(p_after + (p_before - p_after) * (-t / tau).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::DeviceParams;

    fn bank() -> ResistorBank {
        DeviceParams::chip().thermal
    }

    #[test]
    fn power_arithmetic() {
        assert_eq!(dissipated_power(0.0, 80.0).unwrap(), 0.0);
        assert!((dissipated_power(2.0, 100.0).unwrap() - 0.04).abs() < 1e-15);
        assert!(dissipated_power(1.0, 0.0).is_err());
        assert!(dissipated_power(1.0, -5.0).is_err());
        for r in [60.0, 80.0, 100.0] {
            let p = dissipated_power(2.05, r).unwrap();
            // bounds quoted to three decimals
            let rounded = (p * 1e3).round() / 1e3;
            assert!((0.042..=0.070).contains(&rounded), "{p}");
        }
    }

    #[test]
    fn zero_power_gives_static_phases() {
        let ph = phases_from_powers(&bank(), &[0.0; 6]).unwrap();
        assert_eq!(ph.internal.dphi1, -0.355);
        assert_eq!(ph.internal.dphi2, -1.441);
        assert_eq!(ph.phi_ta, 1.137);
        assert_eq!(ph.phi_tb, 0.914);
    }

    #[test]
    fn single_resistor_substitution() {
        let ph = phases_from_powers(&bank(), &[0.1, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((ph.internal.dphi1 - 2.0766).abs() < 1e-12);
    }

    #[test]
    fn negative_power_rejected() {
        assert!(phases_from_powers(&bank(), &[-0.1, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn linear_limit_superposes() {
        let mut b = bank();
        b.alpha_nl = [[0.0; 4]; 2];
        let s = b.static_phases;
        let p1 = [0.1, 0.0, 0.3, 0.0, 0.0, 0.0];
        let p2 = [0.0, 0.2, 0.0, 0.05, 0.0, 0.0];
        let sum: [f64; 6] = std::array::from_fn(|k| p1[k] + p2[k]);
        let f = |p: &[f64; 6]| phases_from_powers(&b, p).unwrap().internal;
        let (a, c, t) = (f(&p1), f(&p2), f(&sum));
        assert!((t.dphi1 - (a.dphi1 + c.dphi1 - s.dphi10)).abs() < 1e-12);
        assert!((t.dphi2 - (a.dphi2 + c.dphi2 - s.dphi20)).abs() < 1e-12);
    }

    #[test]
    fn inverse_of_static_target_is_zero() {
        let b = bank();
        let s = b.static_phases;
        let p = powers_for_target_phases(
            &b,
            &PhaseVector::new(s.dphi10, s.dphi20),
            [ResistorId::R1, ResistorId::R2],
            DEFAULT_P_MAX,
        )
        .unwrap();
        assert!(p[0].abs() < 1e-12 && p[1].abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn decoupled_linear_inverse_is_exact() {
        let mut b = bank();
        b.alpha_nl = [[0.0; 4]; 2];
        b.alpha[0][1] = 0.0;
        b.alpha[1][0] = 0.0;
        let s = b.static_phases;
        let target = PhaseVector::new(s.dphi10 + 2.0, s.dphi20 + 3.0);
        let p = powers_for_target_phases(&b, &target, [ResistorId::R1, ResistorId::R2], 1.2).unwrap();
        assert!((p[0] - 2.0 / b.alpha[0][0]).abs() < 1e-12);
        assert!((p[1] - 3.0 / b.alpha[1][1]).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target_reports_nearest() {
        let mut b = bank();
        b.alpha = [[0.1, 0.0, 0.0, 0.0], [0.0, 0.1, 0.0, 0.0]];
        b.alpha_nl = [[0.0; 4]; 2];
        let s = b.static_phases;
        let target = PhaseVector::new(s.dphi10 + 1.0, s.dphi20 + 1.0);
        match powers_for_target_phases(&b, &target, [ResistorId::R1, ResistorId::R2], 1.2) {
            Err(Error::Unreachable { nearest, .. }) => {
                assert!((nearest[0] - (s.dphi10 + 0.12)).abs() < 1e-9);
            }
            other => panic!("expected unreachable, got {other:?}"),
        }
    }

    #[test]
    fn transient_limits() {
        assert_eq!(transient_response(0.2, 0.5, 0.3, 0.0).unwrap(), 0.2);
        assert!((transient_response(0.2, 0.5, 0.3, 1e3).unwrap() - 0.5).abs() < 1e-15);
        let late = transient_response(0.0, 1.0, 0.3, 4.0).unwrap();
        assert!((1.0 - late).abs() < 1.7e-6);
        assert!(transient_response(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(transient_response(0.0, 1.0, 0.3, -1.0).is_err());
    }

    #[test]
    fn resistor_names_roundtrip() {
        for r in ResistorId::ALL {
            assert_eq!(ResistorId::parse(r.name()).unwrap(), r);
        }
        assert!(ResistorId::parse("R9").is_err());
    }

    #[test]
    fn tritter_phase_inverse_round_trip() {
        let b = bank();
        for (which, target) in [(0, -2.0), (0, 0.3), (1, 1.6), (1, 3.0)] {
            let p = power_for_tritter_phase(&b, which, target, DEFAULT_P_MAX).unwrap();
            assert!(wrap_phase(b.tritter_phase(which, p) - target).abs() < 1e-10);
        }
        // heater B spans roughly 0.91..4.19 rad up to 1.2 W
        assert!(matches!(
            power_for_tritter_phase(&b, 1, -2.0, DEFAULT_P_MAX),
            Err(Error::Unreachable { .. })
        ));
        let p0 = power_for_tritter_phase(&b, 0, b.static_phases.phi0_ta, 1.0).unwrap();
        assert!(p0.abs() < 1e-12);
    }
}
