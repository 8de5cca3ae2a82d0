//! Quantum and classical bounds for three photons, one per input mode.

use triphase::estimation::{classical_benchmark, crb_map, device_qfim, BenchmarkKind, ReferenceArm};
use triphase::{DeviceParams, DistinguishabilityModel, FockState, PhaseGrid};

fn main() -> triphase::Result<()> {
    let triple = FockState::triple();
    let pure = DistinguishabilityModel::indistinguishable();
    for (name, dev) in [("ideal", DeviceParams::ideal()), ("device", DeviceParams::chip())] {
        let h = device_qfim(&dev, &triple, &pure, ReferenceArm::First)?.crb_trace()?;
        let map = crb_map(&dev, &triple, &pure, &PhaseGrid::full(100, 100), None)?;
        println!("{name:<6} Tr(H^-1) = {h:.4}   min Tr(I^-1) = {:.4}", map.minimum.map_or(f64::NAN, |m| m.1));
    }
    let sim = classical_benchmark(BenchmarkKind::Simultaneous, 3)?.crb_trace()?;
    println!("three distinguishable photons: {sim:.4} (0.5 + sqrt(2)/3 = {:.4})", 0.5 + 2f64.sqrt() / 3.0);
    Ok(())
}
