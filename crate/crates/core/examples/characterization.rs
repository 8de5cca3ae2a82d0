//! Simulated power scans of the internal heaters and the tritter heaters,
//! fitted back to the device model.

use triphase::characterization::{
    characterize_scan, device_to_vector, generate_scan, ScanOptions, ScanProtocol, DEVICE_PARAM_NAMES,
};
use triphase::DeviceParams;

fn main() -> triphase::Result<()> {
    let truth = DeviceParams::chip();
    let opts = ScanOptions { seed: 7, ..Default::default() };

    let scan = generate_scan(&truth, ScanProtocol::InternalResistors, &opts)?;
    println!("internal scan: {} curves, {} points", scan.curves.len(), scan.n_points());
    let fit = characterize_scan(&scan, ScanProtocol::InternalResistors, &truth)?;
    println!("chi2/nu = {:.3}, converged {}", fit.reduced_chi_square(), fit.converged);
    let t = device_to_vector(&truth);
    for (k, name) in DEVICE_PARAM_NAMES.iter().enumerate().take(18) {
        println!("  {name:<9} {:>9.4} +- {:.4}   (true {:.4})", fit.values[k], fit.errors[k], t[k]);
    }

    let scan = generate_scan(&truth, ScanProtocol::TritterResistors, &opts)?;
    let fit = characterize_scan(&scan, ScanProtocol::TritterResistors, &truth)?;
    println!("tritter scan: {} curves, chi2/nu = {:.3}", scan.curves.len(), fit.reduced_chi_square());
    for (n, (v, e)) in fit.names.iter().zip(fit.values.iter().zip(&fit.errors)) {
        println!("  {n:<12} {v:>9.4} +- {e:.4}");
    }
    Ok(())
}
