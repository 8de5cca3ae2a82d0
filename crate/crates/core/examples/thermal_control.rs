//! Forward and inverse thermal response, and heater settling.

use triphase::thermal::{
    phases_from_powers, power_for_tritter_phase, powers_for_target_phases, transient_response,
    DEFAULT_P_MAX,
};
use triphase::{DeviceParams, PhaseVector, ResistorId, VoltageSetting};

fn main() -> triphase::Result<()> {
    let bank = DeviceParams::chip().thermal;

    let volts = VoltageSetting::new([2.05, 2.01, 0.0, 0.0, 2.90, 5.94])?;
    let powers = volts.powers(&bank)?;
    let ph = phases_from_powers(&bank, &powers)?;
    println!("powers (W) {:.4?}", powers);
    println!("internal ({:.4}, {:.4}), phiTA {:.4}, phiTB {:.4}", ph.internal.dphi1, ph.internal.dphi2, ph.phi_ta, ph.phi_tb);

    let target = PhaseVector::new(1.0, -0.5);
    let p = powers_for_target_phases(&bank, &target, [ResistorId::R1, ResistorId::R2], DEFAULT_P_MAX)?;
    let back = bank.internal_phases(&[p[0], p[1], 0.0, 0.0]).wrapped();
    println!("R1 = {:.5} W, R2 = {:.5} W give ({:.6}, {:.6})", p[0], p[1], back.dphi1, back.dphi2);

    let pa = power_for_tritter_phase(&bank, 0, 1.5, DEFAULT_P_MAX)?;
    println!("RTA = {pa:.5} W sets phiTA = 1.5");

    for t in [0.1, 0.3, 1.0, 4.0] {
        println!("t = {t:>3} s: effective power {:.7} W of 1 W", transient_response(0.0, 1.0, 0.3, t)?);
    }
    Ok(())
}
