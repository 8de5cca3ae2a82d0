//! Two-photon coincidence dip through a balanced tritter versus delay.

use triphase::photonics::hom_scan;
use triphase::unitary::balanced_tritter;
use triphase::{DistinguishabilityModel, FockState};

fn main() -> triphase::Result<()> {
    let input: FockState = "1,2".parse()?;
    let delays: Vec<f64> = (-12..=12).map(|k| 0.25 * k as f64).collect();
    let scans = hom_scan(&balanced_tritter(), &input, &delays, &DistinguishabilityModel::new(0.95)?)?;
    let coinc: FockState = "1,2".parse()?;
    println!("delay/sigma  P(1,2)");
    for (d, dist) in delays.iter().zip(&scans) {
        println!("{d:>+10.2}  {:.4}", dist.probability(&coinc).unwrap_or(0.0));
    }
    Ok(())
}
