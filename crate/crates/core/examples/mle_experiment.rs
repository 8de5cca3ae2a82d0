//! Maximum-likelihood estimation of both phases from simulated
//! coincidences, with error statistics against the bounds.

use triphase::estimation::{fisher_matrix, positive_eigencount, variance_experiment, classical_benchmark, BenchmarkKind};
use triphase::{DeviceParams, DistinguishabilityModel, FockState, PhaseVector};

fn main() -> triphase::Result<()> {
    let dev = DeviceParams::chip();
    let phases = PhaseVector::new(-1.159, 2.810);
    let input: FockState = "2,3".parse()?;
    let model = DistinguishabilityModel::new(0.95)?;

    let i = fisher_matrix(&dev, &phases, &input, &model)?;
    for kind in [BenchmarkKind::Separate, BenchmarkKind::Simultaneous] {
        let n = positive_eigencount(&i, &classical_benchmark(kind, 2)?)?;
        println!("positive eigenvalues of I - H({kind:?}): {n}");
    }

    let ms = [200, 400, 800, 1230];
    println!("     m  m*Var   Tr(I^-1)  sim   sep   errors");
    for r in variance_experiment(&dev, &phases, &input, &model, &ms, 100, 2021)? {
        let m = r.m as f64;
        let e = r.errors();
        println!(
            "{:>6}  {:.3}  {:.3}     {:.3} {:.3} ({:.4}, {:.4})",
            r.m,
            m * r.total_variance,
            m * r.bound_fisher,
            m * r.bound_simultaneous,
            m * r.bound_separate.unwrap_or(f64::NAN),
            e[0],
            e[1]
        );
    }
    Ok(())
}
