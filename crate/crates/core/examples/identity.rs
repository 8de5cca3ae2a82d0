//! Configure the second tritter to undo the first.

use triphase::characterization::identity_configuration;
use triphase::DeviceParams;

fn main() -> triphase::Result<()> {
    for (name, dev) in [("ideal", DeviceParams::ideal()), ("device", DeviceParams::chip())] {
        let r = identity_configuration(&dev)?;
        let s = r.settings;
        println!(
            "{name:<6} S = {:.6}  phiTA {:+.4} phiTB {:+.4} offset ({:+.4}, {:+.4})",
            r.similarity, s.phi_ta, s.phi_tb, s.offset.dphi1, s.offset.dphi2
        );
        match r.powers {
            Some(p) => println!("       powers (W) {p:.4?}"),
            None => println!("       unreachable: {}", r.notes.join("; ")),
        }
    }
    Ok(())
}
