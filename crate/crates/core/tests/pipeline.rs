use triphase::characterization::{
    characterize_scan, fourier_init, generate_scan, generate_surfaces, tritter_setting, verify_surfaces,
    ScanDataset, ScanOptions, ScanProtocol, SettingOptions, SurfaceOptions,
};
use triphase::estimation::{mle_estimate, sample_events, SearchDomain};
use triphase::{DeviceParams, DistinguishabilityModel, FockState, PhaseGrid, PhaseVector};

#[test]
fn scan_csv_round_trips() {
    let scan = generate_scan(&DeviceParams::chip(), ScanProtocol::TritterResistors, &ScanOptions::default()).unwrap();
    assert_eq!(scan.curves.len(), 18);
    let mut buf = Vec::new();
    scan.write_csv(&mut buf).unwrap();
    let back = ScanDataset::read_csv(buf.as_slice(), &scan.device_id).unwrap();
    assert_eq!(back.curves.len(), 18);
    assert_eq!(back.n_points(), scan.n_points());
    for (a, b) in scan.curves.iter().zip(&back.curves) {
        assert_eq!((a.input, a.output, a.resistor), (b.input, b.output, b.resistor));
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.probability - q.probability).abs() < 1e-9);
        }
    }
}

#[test]
fn noiseless_tritter_fit_recovers_heater_parameters() {
    let truth = DeviceParams::chip();
    let scan = generate_scan(&truth, ScanProtocol::TritterResistors, &ScanOptions::noiseless()).unwrap();
    let fit = characterize_scan(&scan, ScanProtocol::TritterResistors, &truth).unwrap();
    assert!((fit.value("phi0TA").unwrap() - 1.137).abs() < 1e-6);
    assert!((fit.value("alpha_TA").unwrap() - 9.06).abs() < 1e-6);
    assert!(fit.chi_square < 1e-12);
}

#[test]
fn noisy_fit_lands_near_unit_reduced_chi_square() {
    let truth = DeviceParams::chip();
    let scan = generate_scan(&truth, ScanProtocol::InternalResistors, &ScanOptions { seed: 11, ..Default::default() })
        .unwrap();
    let init = fourier_init(&scan).unwrap();
    assert!(init.candidates.len() >= 2);
    let fit = characterize_scan(&scan, ScanProtocol::InternalResistors, &truth).unwrap();
    assert!(fit.converged);
    let chi = fit.reduced_chi_square();
    assert!((0.8..=1.3).contains(&chi), "{chi}");
    for k in 0..6 {
        assert!((fit.values[k] - triphase::characterization::device_to_vector(&truth)[k]).abs() < 0.01);
    }
}

#[test]
fn surfaces_of_a_true_model_against_a_wrong_one() {
    let truth = DeviceParams::chip();
    let opts = SurfaceOptions { grid: PhaseGrid::full(16, 16), counts: None, seed: 0 };
    let data = generate_surfaces(&truth, &"2,3".parse().unwrap(), &DistinguishabilityModel::new(0.95).unwrap(), &opts)
        .unwrap();
    assert!((verify_surfaces(&truth, &data).unwrap().mean - 1.0).abs() < 1e-12);
    let wrong = verify_surfaces(&DeviceParams::ideal(), &data).unwrap().mean;
    assert!(wrong < 0.99, "{wrong}");
}

#[test]
fn setting_on_the_device_reaches_balanced_tritters() {
    let r = tritter_setting(&DeviceParams::chip(), &SettingOptions::default()).unwrap();
    assert!(r.steps[0].residual < 1e-9);
    assert!(r.steps[1].residual < 0.01, "{:?}", r.steps[1]);
    assert!(r.fidelity_a > 0.98 && r.fidelity_b > 0.98);
    assert!(r.phi_ta * r.phi_tb < 0.0);
}

#[test]
fn estimator_recovers_phases_from_many_events() {
    let d = DeviceParams::chip();
    let truth = PhaseVector::new(-1.159, 2.810);
    let input: FockState = "2,3".parse().unwrap();
    let model = DistinguishabilityModel::new(0.95).unwrap();
    let counts = sample_events(&d, &truth, &input, &model, 200_000, 3).unwrap();
    let est = mle_estimate(&counts, &d, &input, &model, SearchDomain::around(truth)).unwrap();
    assert!((est.phases.dphi1 - truth.dphi1).abs() < 0.02);
    assert!((est.phases.dphi2 - truth.dphi2).abs() < 0.02);
}
