//! Tune both tritters to balance with the three probability minimizations.

use triphase::characterization::{tritter_setting, SettingOptions};
use triphase::DeviceParams;

fn main() -> triphase::Result<()> {
    for (name, dev) in [("ideal", DeviceParams::ideal()), ("device", DeviceParams::chip())] {
        let r = tritter_setting(&dev, &SettingOptions::default())?;
        println!("{name}:");
        for s in &r.steps {
            println!("  min {}: residual {:.2e}, branch {:+}", s.objective, s.residual, s.branch);
        }
        println!("  voltages {:.3?}", r.voltages);
        println!("  phiTA {:+.4}, phiTB {:+.4}, F_A {:.4}, F_B {:.4}", r.phi_ta, r.phi_tb, r.fidelity_a, r.fidelity_b);
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
