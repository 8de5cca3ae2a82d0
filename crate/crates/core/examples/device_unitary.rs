//! Build the characterized interferometer, check unitarity and compare the
//! tritters with the balanced one.

use triphase::unitary::{average_fidelity, balanced_tritter, fidelity};
use triphase::{DeviceParams, PhaseGrid, PhaseVector};

fn main() -> triphase::Result<()> {
    let dev = DeviceParams::chip();
    let u = dev.unitary(&PhaseVector::new(-1.159, 2.810));
    println!("U at (-1.159, 2.810):");
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| format!("{:+.4}{:+.4}i", u[(i, j)].re, u[(i, j)].im)).collect();
        println!("  {}", row.join("  "));
    }
    println!("unitarity defect {:.1e}", u.unitarity_defect());

    let ideal = balanced_tritter();
    println!("F(A) = {:.4}", fidelity(&dev.tritter_a.unitary(), &ideal)?);
    println!("F(B) = {:.4}", fidelity(&dev.tritter_b.unitary(), &ideal)?);
    println!("<F> over 30x30 phases = {:.4}", average_fidelity(&dev, &PhaseGrid::full(30, 30))?);
    Ok(())
}
