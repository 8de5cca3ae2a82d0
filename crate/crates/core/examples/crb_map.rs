//! Cramér-Rao map for two photons and the region beating the classical
//! two-photon benchmark.

use triphase::estimation::{crb_map, BenchmarkKind};
use triphase::{DeviceParams, DistinguishabilityModel, FockState, PhaseGrid};

fn main() -> triphase::Result<()> {
    let grid = PhaseGrid::full(60, 60);
    for (name, dev) in [("ideal", DeviceParams::ideal()), ("device", DeviceParams::chip())] {
        for input in ["1,2", "1,3", "2,3"] {
            let input: FockState = input.parse()?;
            let v = if name == "ideal" { 1.0 } else { 0.95 };
            let map = crb_map(&dev, &input, &DistinguishabilityModel::new(v)?, &grid, Some(BenchmarkKind::Simultaneous))?;
            let (at, min) = map.minimum.expect("nonsingular somewhere");
            println!(
                "{name:<6} {}: min Tr(I^-1) {min:.4} at ({:+.3}, {:+.3}), beats benchmark at {} points, singular at {}",
                input.label(),
                at.dphi1,
                at.dphi2,
                map.mask_count(),
                map.singular_count()
            );
        }
    }
    Ok(())
}
