//! Three-step procedure that tunes both tritters to the balanced point using
//! single-photon probabilities only.

use std::f64::consts::PI;

use serde::Serialize;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::thermal::{voltage_for_power, ResistorId, DEFAULT_P_MAX};
use crate::unitary::{fidelity, wrap_phase, TritterParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SettingOptions {
    /// Largest power tried on any heater, watts.
    pub p_max: f64,
    /// Grid points per axis of the coarse search.
    pub grid: usize,
    /// Residual probability above which a step is flagged.
    pub warn_residual: f64,
}

impl Default for SettingOptions {
    fn default() -> Self {
        SettingOptions {
            p_max: DEFAULT_P_MAX,
            grid: 60,
            warn_residual: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingStep {
    /// Probability that was minimized, e.g. `P(3->3)`.
    pub objective: String,
    pub resistors: Vec<ResistorId>,
    pub powers: Vec<f64>,
    pub residual: f64,
    /// `+1` or `−1`: which of the two `±` solutions was reached.
    pub branch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingReport {
    pub steps: Vec<SettingStep>,
    /// Final powers on `R1..R4, RTA, RTB`.
    pub powers: [f64; 6],
    pub voltages: [f64; 6],
    /// Model phase differences `(φ₁ − φ₂, φ₂ − φ_ref)` after step 1.
    pub internal_differences: [f64; 2],
    pub phi_ta: f64,
    pub phi_tb: f64,
    /// Fidelity of each tuned tritter with the balanced tritter of the
    /// same sign.
    pub fidelity_a: f64,
    pub fidelity_b: f64,
    pub warnings: Vec<String>,
}

fn branch_of(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn prob(device: &DeviceParams, powers: &[f64; 6], input: usize, output: usize) -> f64 {
    device.unitary_at_powers(powers)[(output - 1, input - 1)].norm_sqr()
}

/// Grid screen followed by a bounded simplex polish on `[0, p_max]ⁿ`.
fn minimize_box<F: Fn(&[f64]) -> f64>(f: F, dim: usize, n: usize, p_max: f64) -> (Vec<f64>, f64) {
    let n = n.max(2);
    let h = p_max / (n - 1) as f64;
    let mut best = (vec![0.0; dim], f64::INFINITY);
    let total = n.pow(dim as u32);
    for k in 0..total {
        let mut x = vec![0.0; dim];
        let mut r = k;
        for xi in x.iter_mut() {
            *xi = (r % n) as f64 * h;
            r /= n;
        }
        let v = f(&x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let bounded = |x: &[f64]| {
        if x.iter().any(|&p| !(0.0..=p_max).contains(&p)) {
            f64::INFINITY
        } else {
            f(x)
        }
    };
    let m = nelder_mead(
        bounded,
        &best.0,
        &NelderMeadOptions {
            max_iter: 2000,
            xtol: 1e-12,
            ftol: 1e-16,
            step: 0.25 * h,
        },
    );
    if m.f < best.1 {
        (m.x, m.f)
    } else {
        best
    }
}

fn total_residual(steps: &[SettingStep]) -> f64 {
    steps.iter().map(|s| s.residual).sum()
}

/// The three minimizations with step 1 held on the given branch of
/// `φ₁ − φ₂`.
fn run_steps(device: &DeviceParams, opts: &SettingOptions, branch: f64) -> ([f64; 6], Vec<SettingStep>, [f64; 2]) {
    let mut powers = [0.0; 6];
    let mut steps = Vec::new();
    let diffs_at = |x: &[f64]| {
        let ph = device.thermal.internal_phases(&[x[0], x[1], 0.0, 0.0]);
        [wrap_phase(ph.dphi1 - ph.dphi2), wrap_phase(ph.dphi2)]
    };
    let (x, r1) = minimize_box(
        |x| {
            if branch_of(diffs_at(x)[0]) != branch {
                return f64::INFINITY;
            }
            let mut p = powers;
            p[0] = x[0];
            p[1] = x[1];
            prob(device, &p, 3, 3)
        },
        2,
        opts.grid,
        opts.p_max,
    );
    powers[0] = x[0];
    powers[1] = x[1];
    let diffs = diffs_at(&x);
    steps.push(SettingStep {
        objective: "P(3->3)".into(),
        resistors: vec![ResistorId::R1, ResistorId::R2],
        powers: x,
        residual: r1,
        branch,
    });

    let fine = opts.grid * 4;
    for (input, output, which, resistor) in [(3, 1, 5, ResistorId::RTB), (1, 1, 4, ResistorId::RTA)] {
        let (x, r) = minimize_box(
            |x| {
                let mut p = powers;
                p[which] = x[0];
                prob(device, &p, input, output)
            },
            1,
            fine,
            opts.p_max,
        );
        powers[which] = x[0];
        let phi = device.thermal.tritter_phase(which - 4, x[0]);
        steps.push(SettingStep {
            objective: format!("P({input}->{output})"),
            resistors: vec![resistor],
            powers: x,
            residual: r,
            branch: branch_of(phi.sin()),
        });
    }
    (powers, steps, diffs)
}

/// Run the three minimizations on the device model: `P(3→3)` over
/// `(P_R1, P_R2)`, then `P(3→1)` over `P_RTB`, then `P(1→1)` over `P_RTA`.
///
/// The ideal-coupler closed forms are `P(3→3) = 0` at
/// `φ₁ − φ₂ = φ₂ − φ_ref = ±π/3`, then `P(3→1) = ½(1 ∓ sin φ_TB)` and
/// `P(1→1) = ½(1 ± sin φ_TA)`, so the two tritter phases end on opposite
/// signs; each is scored against the balanced tritter of its own sign.
/// Both step-1 branches are followed through and the one with the smaller
/// summed residual is reported.
pub fn tritter_setting(device: &DeviceParams, opts: &SettingOptions) -> Result<SettingReport> {
    device.thermal.validate()?;
    if !(opts.p_max > 0.0) || opts.grid < 2 {
        return Err(Error::domain("setting needs p_max > 0 and at least 2 grid points"));
    }
    // both step-1 branches are minima; the tritter heaters may reach the
    // phase that only one of them calls for, so each is carried through
    let (powers, steps, diffs) = [1.0, -1.0]
        .into_iter()
        .map(|br| run_steps(device, opts, br))
        .min_by(|a, b| total_residual(&a.1).total_cmp(&total_residual(&b.1)))
        .expect("two branches");
    let mut warnings = Vec::new();
    for s in &steps {
        if s.residual > opts.warn_residual {
            warnings.push(format!(
                "{} stayed at {:.4} after minimization (threshold {})",
                s.objective, s.residual, opts.warn_residual
            ));
        }
    }

    let phi_ta = wrap_phase(device.thermal.tritter_phase(0, powers[4]));
    let phi_tb = wrap_phase(device.thermal.tritter_phase(1, powers[5]));
    let score = |t: &TritterParams, phi: f64| {
        let target = TritterParams::balanced(branch_of(phi)).unitary();
        fidelity(&t.with_phi(phi).unitary(), &target)
    };
    let fidelity_a = score(&device.tritter_a, phi_ta)?;
    let fidelity_b = score(&device.tritter_b, phi_tb)?;
    for (name, phi) in [("A", phi_ta), ("B", phi_tb)] {
        let off = (phi.abs() - PI / 2.0).abs();
        if off > 0.2 {
            warnings.push(format!("tritter {name} phase {phi:.3} rad is {off:.3} rad from ±π/2"));
        }
    }
    let mut voltages = [0.0; 6];
    for (v, (p, r)) in voltages.iter_mut().zip(powers.iter().zip(&device.thermal.resistances)) {
        *v = voltage_for_power(*p, *r);
    }
    Ok(SettingReport {
        steps,
        powers,
        voltages,
        internal_differences: diffs,
        phi_ta,
        phi_tb,
        fidelity_a,
        fidelity_b,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::PhaseVector;

    fn ideal_couplers(phi_a: f64, phi_b: f64) -> DeviceParams {
        let mut d = DeviceParams::ideal();
        d.tritter_a.phi = phi_a;
        d.tritter_b.phi = phi_b;
        d
    }

    #[test]
    fn step_objectives_match_closed_forms() {
        let d = ideal_couplers(0.7, -2.1);
        for &(p1, p2) in &[(0.3, -1.2), (2.0, 0.5), (-3.0, 1.0)] {
            let u = d.unitary(&PhaseVector::new(p1, p2));
            let want = (3.0 - 2.0 * (p1 - p2).cos() + 2.0 * p1.cos() - 2.0 * p2.cos()) / 9.0;
            assert!((u[(2, 2)].norm_sqr() - want).abs() < 1e-12);
        }
        for br in [1.0, -1.0] {
            let ph = PhaseVector::new(br * 2.0 * PI / 3.0, br * PI / 3.0);
            for phi in [-2.5, -0.4, 0.9, 2.2] {
                let u = ideal_couplers(1.3, phi).unitary(&ph);
                assert!((u[(0, 2)].norm_sqr() - 0.5 * (1.0 - br * phi.sin())).abs() < 1e-12);
                let u = ideal_couplers(phi, br * PI / 2.0).unitary(&ph);
                assert!((u[(0, 0)].norm_sqr() - 0.5 * (1.0 + br * phi.sin())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ideal_couplers_reach_zero_residuals() {
        let r = tritter_setting(&DeviceParams::ideal(), &SettingOptions::default()).unwrap();
        for s in &r.steps {
            assert!(s.residual < 1e-9, "{s:?}");
        }
        let br = r.steps[0].branch;
        assert!((r.internal_differences[0] - br * PI / 3.0).abs() < 1e-4);
        assert!((r.phi_tb - br * PI / 2.0).abs() < 1e-4);
        assert!((r.phi_ta + br * PI / 2.0).abs() < 1e-4);
        assert!(r.fidelity_a > 1.0 - 1e-8 && r.fidelity_b > 1.0 - 1e-8);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }
}
