//! Single-photon power scans: simulation and CSV persistence.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::estimation::{multinomial, task_rng};
use crate::photonics::single_photon_probs;
use crate::thermal::{transient_response, ResistorId};

/// Which heaters a scan sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanProtocol {
    /// `R1..R4`, tritters at their operating phases.
    InternalResistors,
    /// `RTA`, `RTB`, everything else unpowered.
    TritterResistors,
}

impl ScanProtocol {
    pub fn resistors(self) -> &'static [ResistorId] {
        match self {
            ScanProtocol::InternalResistors => &ResistorId::INTERNAL,
            ScanProtocol::TritterResistors => &ResistorId::TRITTER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub power: f64,
    pub probability: f64,
    pub std_err: f64,
}

/// `P(input → output)` against the power on one resistor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCurve {
    pub input: usize,
    pub output: usize,
    pub resistor: ResistorId,
    pub points: Vec<ScanPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanDataset {
    pub device_id: String,
    pub curves: Vec<ScanCurve>,
}

impl ScanDataset {
    pub fn n_points(&self) -> usize {
        self.curves.iter().map(|c| c.points.len()).sum()
    }

    pub fn curves_for(&self, resistor: ResistorId) -> impl Iterator<Item = &ScanCurve> {
        self.curves.iter().filter(move |c| c.resistor == resistor)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.curves {
            if !(1..=3).contains(&c.input) || !(1..=3).contains(&c.output) {
                return Err(Error::domain("scan modes must be 1..=3"));
            }
            for w in c.points.windows(2) {
                if !(w[1].power > w[0].power) {
                    return Err(Error::domain("scan powers must increase along a curve"));
                }
            }
            for p in &c.points {
                if !(0.0..=1.0).contains(&p.probability) || !(p.std_err > 0.0) || p.power < 0.0 {
                    return Err(Error::domain(format!(
                        "invalid scan point {p:?} on curve {}->{} {}",
                        c.input, c.output, c.resistor
                    )));
                }
            }
        }
        Ok(())
    }

    /// Columns `input, output, resistor, power_W, probability, std_err`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["input", "output", "resistor", "power_W", "probability", "std_err"])?;
        for c in &self.curves {
            for p in &c.points {
                wr.write_record([
                    c.input.to_string(),
                    c.output.to_string(),
                    c.resistor.name().to_string(),
                    format!("{:.10}", p.power),
                    format!("{:.10}", p.probability),
                    format!("{:.10}", p.std_err),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Rows are grouped into curves by consecutive `(input, output, resistor)`.
    pub fn read_csv<R: Read>(r: R, device_id: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            input: usize,
            output: usize,
            resistor: String,
            #[serde(rename = "power_W")]
            power: f64,
            probability: f64,
            std_err: f64,
        }
        let mut rd = csv::Reader::from_reader(r);
        let mut curves: Vec<ScanCurve> = Vec::new();
        for row in rd.deserialize() {
            let row: Row = row?;
            let resistor = ResistorId::parse(&row.resistor)?;
            let point = ScanPoint {
                power: row.power,
                probability: row.probability,
                std_err: row.std_err,
            };
            match curves.last_mut() {
                Some(c) if c.input == row.input && c.output == row.output && c.resistor == resistor => {
                    c.points.push(point)
                }
                _ => curves.push(ScanCurve {
                    input: row.input,
                    output: row.output,
                    resistor,
                    points: vec![point],
                }),
            }
        }
        let ds = ScanDataset {
            device_id: device_id.to_string(),
            curves,
        };
        ds.validate()?;
        Ok(ds)
    }
}

/// Sweep settings. `counts = None` gives exact probabilities; standard
/// errors are then those a `nominal_counts` measurement would have.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub points: usize,
    pub p_max: f64,
    pub counts: Option<u64>,
    pub nominal_counts: u64,
    /// `(τ, wait)` in seconds: each point is taken `wait` after stepping
    /// the power, so a residual fraction `exp(−wait/τ)` of the previous
    /// step is still settling.
    pub settling: Option<(f64, f64)>,
    pub seed: u64,
}

pub const DEFAULT_SCAN_POINTS: usize = 60;
pub const DEFAULT_SCAN_COUNTS: u64 = 2000;

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            points: DEFAULT_SCAN_POINTS,
            p_max: 1.0,
            counts: Some(DEFAULT_SCAN_COUNTS),
            nominal_counts: DEFAULT_SCAN_COUNTS,
            settling: Some((0.3, 4.0)),
            seed: 0,
        }
    }
}

impl ScanOptions {
    pub fn noiseless() -> Self {
        ScanOptions {
            counts: None,
            settling: None,
            ..Self::default()
        }
    }

    pub fn powers(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|k| self.p_max * k as f64 / (n - 1) as f64).collect()
    }
}

/// Binomial standard error from the smoothed estimate `(k+1)/(N+2)`, which
/// stays positive when no or all photons are counted.
pub fn binomial_std_err(k: f64, n: f64) -> f64 {
    let p = (k + 1.0) / (n + 2.0);
    (p * (1.0 - p) / n).sqrt()
}

/// Single-photon probabilities with all six heater powers specified, as
/// seen by the given protocol.
pub(crate) fn protocol_unitary(
    device: &DeviceParams,
    protocol: ScanProtocol,
    powers: &[f64; 6],
) -> crate::matrix::ComplexMatrix {
    match protocol {
        ScanProtocol::InternalResistors => {
            device.unitary_internal_powers(&[powers[0], powers[1], powers[2], powers[3]])
        }
        ScanProtocol::TritterResistors => device.unitary_at_powers(powers),
    }
}

/// Simulated scan: every resistor of the protocol swept alone, every input
/// mode injected, every output recorded.
pub fn generate_scan(
    device: &DeviceParams,
    protocol: ScanProtocol,
    opts: &ScanOptions,
) -> Result<ScanDataset> {
    if opts.counts == Some(0) || opts.nominal_counts == 0 {
        return Err(Error::domain("counts per point must be at least 1"));
    }
    if !(opts.p_max > 0.0) {
        return Err(Error::domain("scan range must be positive"));
    }
    let powers = opts.powers();
    let tasks: Vec<(usize, ResistorId, usize)> = protocol
        .resistors()
        .iter()
        .enumerate()
        .flat_map(|(ri, &r)| (1..=3).map(move |i| (ri, r, i)))
        .collect();
    let blocks = tasks
        .par_iter()
        .enumerate()
        .map(|(task, &(_, resistor, input))| {
            let mut rng = task_rng(opts.seed, task as u64);
            let mut rows: [Vec<ScanPoint>; 3] = Default::default();
            let mut previous = 0.0;
            for &p in &powers {
                let effective = match opts.settling {
                    Some((tau, wait)) => transient_response(previous, p, tau, wait)?,
                    None => p,
                };
                previous = p;
                let mut all = [0.0; 6];
                all[resistor.index()] = effective;
                let u = protocol_unitary(device, protocol, &all);
                let probs = single_photon_probs(&u, input)?.probabilities();
                let measured: Vec<(f64, f64)> = match opts.counts {
                    Some(n) => {
                        let k = multinomial(&probs, n, &mut rng);
                        let nf = n as f64;
                        k.iter()
                            .map(|&k| (k as f64 / nf, binomial_std_err(k as f64, nf)))
                            .collect()
                    }
                    None => {
                        let nf = opts.nominal_counts as f64;
                        probs
                            .iter()
                            .map(|&q| (q.clamp(0.0, 1.0), binomial_std_err(q * nf, nf)))
                            .collect()
                    }
                };
                for (out, (prob, se)) in measured.into_iter().enumerate() {
                    rows[out].push(ScanPoint {
                        power: p,
                        probability: prob,
                        std_err: se,
                    });
                }
            }
            Ok(rows
                .into_iter()
                .enumerate()
                .map(|(out, points)| ScanCurve {
                    input,
                    output: out + 1,
                    resistor,
                    points,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanDataset {
        device_id: "simulated".into(),
        curves: blocks.into_iter().flatten().collect(),
    })
}
