//! Output probabilities of single, two and three photons at one phase
//! setting, and their dependence on indistinguishability.

use triphase::photonics::output_probs;
use triphase::{DeviceParams, DistinguishabilityModel, FockState, PhaseVector};

fn main() -> triphase::Result<()> {
    let u = DeviceParams::chip().unitary(&PhaseVector::new(0.8, -1.9));
    for input in ["1", "2,3", "1,2,3"] {
        let input: FockState = input.parse()?;
        for v in [1.0, 0.95, 0.0] {
            let dist = output_probs(&u, &input, &DistinguishabilityModel::new(v)?)?;
            let cells: Vec<String> = dist.events.iter().map(|(e, p)| format!("{}:{p:.4}", e.label())).collect();
            println!("in {} V={v:<4} {}", input.label(), cells.join(" "));
        }
    }
    Ok(())
}
