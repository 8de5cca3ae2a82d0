//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use triphase::characterization::{
    characterize_scan, device_to_vector, generate_scan, generate_surfaces, identity_configuration,
    verify_surfaces, ScanOptions, ScanProtocol, SurfaceOptions, DEVICE_PARAM_NAMES,
    SINGLE_PHOTON_SURFACE_COUNTS, TWO_PHOTON_SURFACE_COUNTS,
};
use triphase::characterization::identity::similarity;
use triphase::device::{angle_distance, reference};
use triphase::estimation::{
    classical_benchmark, crb_map, device_qfim, fisher_matrix, positive_eigencount, prob_gradient,
    variance_experiment, BenchmarkKind, ReferenceArm,
};
use triphase::photonics::output_probs;
use triphase::thermal::transient_response;
use triphase::unitary::{average_fidelity, balanced_tritter, fidelity, tritter};
use triphase::{DeviceParams, DistinguishabilityModel, FockState, PhaseGrid, PhaseVector, TritterParams};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pure() -> DistinguishabilityModel {
    DistinguishabilityModel::indistinguishable()
}

fn v095() -> DistinguishabilityModel {
    DistinguishabilityModel::new(0.95).unwrap()
}

fn fock(s: &str) -> FockState {
    s.parse().unwrap()
}

fn c1_balanced_tritter() -> Outcome {
    let u = tritter(&TritterParams::new(0.5, 2.0 / 3.0, 0.5, PI / 2.0).unwrap()).unwrap();
    let dev = u.abs_sq().iter().map(|p| (p - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    let defect = u.unitarity_defect();
    outcome(
        dev <= 1e-12 && defect <= 1e-10,
        format!("max ||U_ij|^2 - 1/3| = {dev:.1e} (<= 1e-12), unitarity defect {defect:.1e} (<= 1e-10)"),
    )
}

fn c2_fidelity_anchors() -> Outcome {
    let d = DeviceParams::chip();
    let fa = fidelity(&d.tritter_a.unitary(), &balanced_tritter()).unwrap();
    let fb = fidelity(&d.tritter_b.unitary(), &balanced_tritter()).unwrap();
    outcome(
        (fa - 0.9830).abs() <= 0.003 && (fb - 0.9863).abs() <= 0.003,
        format!("F_A = {fa:.4} (0.9830 +- 0.003), F_B = {fb:.4} (0.9863 +- 0.003)"),
    )
}

fn c3_average_fidelity() -> Outcome {
    let f = average_fidelity(&DeviceParams::chip(), &PhaseGrid::full(30, 30)).unwrap();
    outcome((f - 0.963).abs() <= 0.02, format!("<F> over 30x30 = {f:.4} (0.963 +- 0.02)"))
}

fn c4_closed_forms() -> Outcome {
    let n = 30;
    let mut worst = 0.0_f64;
    for p in PhaseGrid::full(n, n).points() {
        let (a, b) = (p.dphi1, p.dphi2);
        for (pa, pb) in [(0.7, -2.1), (PI / 2.0, PI / 2.0)] {
            let mut d = DeviceParams::ideal();
            d.tritter_a.phi = pa;
            d.tritter_b.phi = pb;
            let got = output_probs(&d.unitary(&p), &fock("3"), &pure()).unwrap().probability(&fock("3")).unwrap();
            let want = (3.0 - 2.0 * (a - b).cos() + 2.0 * a.cos() - 2.0 * b.cos()) / 9.0;
            worst = worst.max((got - want).abs());
        }
    }
    let mut worst23 = 0.0_f64;
    for br in [1.0, -1.0] {
        let at = PhaseVector::new(br * 2.0 * PI / 3.0, br * PI / 3.0);
        for k in 0..n {
            let phi = -PI + 2.0 * PI * k as f64 / n as f64;
            let mut d = DeviceParams::ideal();
            d.tritter_a.phi = 1.3;
            d.tritter_b.phi = phi;
            let p31 = d.unitary(&at)[(0, 2)].norm_sqr();
            worst23 = worst23.max((p31 - 0.5 * (1.0 - br * phi.sin())).abs());
            d.tritter_a.phi = phi;
            d.tritter_b.phi = br * PI / 2.0;
            let p11 = d.unitary(&at)[(0, 0)].norm_sqr();
            worst23 = worst23.max((p11 - 0.5 * (1.0 + br * phi.sin())).abs());
        }
    }
    outcome(
        worst <= 1e-10 && worst23 <= 1e-10,
        format!("P(3->3) max deviation {worst:.1e} on 30x30; P(3->1), P(1->1) max deviation {worst23:.1e} (<= 1e-10)"),
    )
}

fn c5_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2021);
    let inputs = ["1", "2", "3", "12", "13", "23", "123"];
    let h = 1e-5;
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let mut d = DeviceParams::chip();
        d.tritter_a.phi = rng.random_range(-PI..PI);
        d.tritter_b.phi = rng.random_range(-PI..PI);
        let p = PhaseVector::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let input = fock(inputs[k % inputs.len()]);
        let model = DistinguishabilityModel::new(rng.random_range(0.0..=1.0)).unwrap();
        let g = prob_gradient(&d, &p, &input, &model).unwrap();
        for j in 0..2 {
            let shift = |s: f64| {
                let mut q = p;
                if j == 0 {
                    q.dphi1 += s;
                } else {
                    q.dphi2 += s;
                }
                output_probs(&d.unitary(&q), &input, &model).unwrap().probabilities()
            };
            let (up, down) = (shift(h), shift(-h));
            for (e, grad) in g.gradients.iter().enumerate() {
                let fd = (up[e] - down[e]) / (2.0 * h);
                // relative error, with an absolute floor for vanishing slopes
                let rel = (grad[j] - fd).abs() / fd.abs().max(1e-3);
                worst = worst.max(rel);
            }
        }
    }
    outcome(worst <= 1e-6, format!("max relative error {worst:.1e} over 100 random configurations (<= 1e-6)"))
}

fn c6_three_photon_bounds() -> Outcome {
    let triple = FockState::triple();
    let h_dev = device_qfim(&DeviceParams::chip(), &triple, &pure(), ReferenceArm::First)
        .unwrap()
        .crb_trace()
        .unwrap();
    let h_ideal = device_qfim(&DeviceParams::ideal(), &triple, &pure(), ReferenceArm::First)
        .unwrap()
        .crb_trace()
        .unwrap();
    let map = crb_map(&DeviceParams::chip(), &triple, &pure(), &PhaseGrid::full(100, 100), None).unwrap();
    let min = map.minimum.map_or(f64::NAN, |m| m.1);
    let bench = classical_benchmark(BenchmarkKind::Simultaneous, 3).unwrap().crb_trace().unwrap();
    let want = 0.5 + 2f64.sqrt() / 3.0;
    outcome(
        (h_dev - 0.527).abs() <= 0.01
            && (h_ideal - 0.5).abs() <= 1e-6
            && (min - 0.584).abs() <= 0.01
            && (bench - want).abs() <= 1e-6,
        format!(
            "Tr(H^-1) device {h_dev:.4} (0.527 +- 0.01), ideal {h_ideal:.7} (0.5 +- 1e-6); \
             min Tr(I^-1) {min:.4} (0.584 +- 0.01); benchmark {bench:.7} vs {want:.7}"
        ),
    )
}

fn c7_enhancement_region() -> Outcome {
    let grid = PhaseGrid::full(60, 60);
    let mut counts = Vec::new();
    for input in ["12", "13", "23"] {
        let map = crb_map(&DeviceParams::ideal(), &fock(input), &pure(), &grid, Some(BenchmarkKind::Simultaneous))
            .unwrap();
        counts.push((input, map.mask_count()));
    }
    let detail = counts.iter().map(|(i, c)| format!("({i}): {c}/3600")).collect::<Vec<_>>().join(", ");
    outcome(counts.iter().all(|c| c.1 > 0), format!("points beating two-photon benchmark {detail}"))
}

fn c8_eigenvalues() -> Outcome {
    let i = fisher_matrix(&DeviceParams::chip(), &PhaseVector::new(-1.159, 2.810), &fock("23"), &v095()).unwrap();
    let sep = positive_eigencount(&i, &classical_benchmark(BenchmarkKind::Separate, 2).unwrap()).unwrap();
    let h_sim = classical_benchmark(BenchmarkKind::Simultaneous, 2).unwrap();
    let sim = positive_eigencount(&i, &h_sim).unwrap();
    let diff = triphase::estimation::FisherMatrix::new(
        triphase::estimation::FisherKind::Classical,
        &i.entries - &h_sim.entries,
    );
    let eig = diff.map(|d| d.eigenvalues()).unwrap_or_default();
    outcome(
        sep == 2 && sim == 2,
        format!(
            "positive eigenvalues of I - H_sep: {sep} (want 2), of I - H_sim: {sim} (want 2; eigenvalues {:.3?})",
            eig
        ),
    )
}

fn c9_mle_experiment() -> Outcome {
    let ms: Vec<u64> = (200..=1200).step_by(100).collect();
    let phases = PhaseVector::new(-1.159, 2.810);
    let rows = variance_experiment(&DeviceParams::chip(), &phases, &fock("23"), &v095(), &ms, 100, 2021).unwrap();
    let track = rows
        .iter()
        .map(|r| (r.total_variance / r.bound_fisher - 1.0).abs())
        .fold(0.0, f64::max);
    let late: Vec<_> = rows.iter().filter(|r| r.m >= 700).collect();
    let pooled = late.iter().map(|r| r.m as f64 * r.total_variance).sum::<f64>() / late.len() as f64;
    let sim = rows[0].bound_simultaneous * rows[0].m as f64;
    let sep = rows[0].bound_separate.unwrap() * rows[0].m as f64;
    let ratio = rows
        .iter()
        .map(|r| {
            let e = r.errors();
            e[0].max(e[1]) / e[0].min(e[1])
        })
        .fold(0.0, f64::max);
    outcome(
        track <= 0.25 && pooled < sim && pooled < sep && ratio <= 2.0,
        format!(
            "max |Var/(Tr(I^-1)/m) - 1| = {track:.3} (<= 0.25); pooled m*Var (m >= 700) = {pooled:.3} \
             vs sim {sim:.3}, sep {sep:.3}; max error ratio {ratio:.2} (<= 2)"
        ),
    )
}

fn c10_characterization() -> Outcome {
    let truth = DeviceParams::chip();
    let clean = ScanOptions { counts: None, settling: None, ..Default::default() };
    let scan = generate_scan(&truth, ScanProtocol::InternalResistors, &clean).unwrap();
    let fit = characterize_scan(&scan, ScanProtocol::InternalResistors, &truth).unwrap();
    let (t, f) = (device_to_vector(&truth), device_to_vector(&fit.device));
    let exact = t
        .iter()
        .zip(&f)
        .enumerate()
        .map(|(k, (a, b))| if (6..10).contains(&k) { angle_distance(*a, *b) } else { (a - b).abs() })
        .fold(0.0, f64::max);

    let noisy = ScanOptions { seed: 2021, ..Default::default() };
    let scan = generate_scan(&truth, ScanProtocol::InternalResistors, &noisy).unwrap();
    let fit = characterize_scan(&scan, ScanProtocol::InternalResistors, &truth).unwrap();
    let f = device_to_vector(&fit.device);
    let dt = (0..6).map(|k| (t[k] - f[k]).abs()).fold(0.0, f64::max);
    let (worst_alpha, worst_name) = (10..18)
        .map(|k| ((f[k] / t[k] - 1.0).abs(), DEVICE_PARAM_NAMES[k]))
        .fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
    let within = (10..18).filter(|&k| (f[k] / t[k] - 1.0).abs() <= 0.02).count();
    let k12 = DEVICE_PARAM_NAMES.iter().position(|&n| n == worst_name).unwrap();
    let pull = (f[k12] - t[k12]).abs() / fit.errors[k12];
    let chi = fit.reduced_chi_square();
    outcome(
        exact <= 1e-6 && dt <= 0.01 && worst_alpha <= 0.02 && (0.8..=1.3).contains(&chi),
        format!(
            "noiseless max |dparam| {exact:.1e} (<= 1e-6); noisy (seed 2021): max |dT| {dt:.4} (<= 0.01), \
             {within}/8 linear alpha within 2%, worst {worst_name} off by {:.2}% \
             ({pull:.1} sigma, sigma = {:.2}%), chi2/nu {chi:.3} in [0.8, 1.3]",
            100.0 * worst_alpha,
            100.0 * fit.errors[k12] / t[k12].abs()
        ),
    )
}

fn c11_surfaces() -> Outcome {
    let truth = DeviceParams::chip();
    let scan = generate_scan(&truth, ScanProtocol::InternalResistors, &ScanOptions { seed: 2021, ..Default::default() })
        .unwrap();
    let fitted = characterize_scan(&scan, ScanProtocol::InternalResistors, &truth).unwrap().device;
    let mut single = 0.0;
    for mode in ["1", "2", "3"] {
        let opts = SurfaceOptions { counts: Some(SINGLE_PHOTON_SURFACE_COUNTS), seed: 2021, ..Default::default() };
        let data = generate_surfaces(&truth, &fock(mode), &pure(), &opts).unwrap();
        single += verify_surfaces(&fitted, &data).unwrap().mean / 3.0;
    }
    let opts = SurfaceOptions { counts: Some(TWO_PHOTON_SURFACE_COUNTS), seed: 2021, ..Default::default() };
    let data = generate_surfaces(&truth, &fock("23"), &v095(), &opts).unwrap();
    let two = verify_surfaces(&fitted, &data).unwrap().mean;
    outcome(
        single >= 0.95 && (0.80..=0.90).contains(&two),
        format!("single-photon <R2> = {single:.4} (>= 0.95); two-photon <R2> = {two:.4} in [0.80, 0.90]"),
    )
}

fn c12_identity() -> Outcome {
    let s_ideal = identity_configuration(&DeviceParams::ideal()).unwrap().similarity;
    let s_printed = similarity(&(&reference::identity_ub() * &reference::identity_ua()));
    outcome(
        1.0 - s_ideal <= 1e-9 && s_printed >= 0.97,
        format!(
            "ideal 1 - S = {:.1e} (<= 1e-9); printed U_B U_A gives S = {s_printed:.4} (>= 0.97)",
            (1.0 - s_ideal).max(0.0)
        ),
    )
}

fn c13_transient() -> Outcome {
    let p = transient_response(0.0, 1.0, 0.3, 4.0).unwrap();
    let q = transient_response(0.8, 0.2, 0.3, 4.0).unwrap();
    let dev = (p - 1.0).abs().max((q - 0.2).abs() / 0.6);
    outcome(dev <= 2e-6, format!("relative residual after 4 s at tau = 0.3 s: {dev:.2e} (<= 2e-6)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("balanced tritter construction", c1_balanced_tritter),
        ("tritter fidelity anchors", c2_fidelity_anchors),
        ("average fidelity", c3_average_fidelity),
        ("closed-form consistency", c4_closed_forms),
        ("gradient correctness", c5_gradients),
        ("three-photon bounds", c6_three_photon_bounds),
        ("quantum-enhancement region", c7_enhancement_region),
        ("eigenvalue comparison", c8_eigenvalues),
        ("ML estimation experiment", c9_mle_experiment),
        ("characterization round trip", c10_characterization),
        ("surface verification", c11_surfaces),
        ("identity configuration", c12_identity),
        ("transient model", c13_transient),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
