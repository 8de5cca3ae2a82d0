//! Event sampling and maximum-likelihood estimation of the two phases.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::photonics::{output_events, output_probs, DistinguishabilityModel, FockState};
use crate::unitary::{compose, wrap_phase, PhaseVector};

use super::fisher::{classical_benchmark, fisher_with_unitaries, BenchmarkKind};

/// Nodes per axis of the coarse likelihood scan.
pub const MLE_GRID: usize = 64;
/// Stopping tolerance of the local polish (rad).
pub const MLE_TOLERANCE: f64 = 1e-6;

/// Detected coincidences per output event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub events: Vec<FockState>,
    pub counts: Vec<u64>,
}

impl EventCounts {
    pub fn new(events: Vec<FockState>, counts: Vec<u64>) -> Result<Self> {
        if events.len() != counts.len() || events.is_empty() {
            return Err(Error::domain("events and counts must have the same nonzero length"));
        }
        let n = events[0].total();
        if events.iter().any(|e| e.total() != n) {
            return Err(Error::domain("events with different photon numbers"));
        }
        Ok(EventCounts { events, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn photons(&self) -> usize {
        self.events[0].total()
    }
}

/// RNG for task `task` of a run seeded with `seed`. Each task gets its own
/// ChaCha stream, so results do not depend on scheduling.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Multinomial draw by sequential conditional binomials.
pub fn multinomial(probs: &[f64], m: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut left = m;
    let mut mass = probs.iter().map(|p| p.max(0.0)).sum::<f64>();
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        let draw = if k + 1 == probs.len() {
            left
        } else if left == 0 || mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).map_or(0, |b| b.sample(rng))
        };
        out.push(draw);
        left -= draw;
        mass -= p;
    }
    out
}

/// Draw `m` coincidence events at the given phases.
pub fn sample_events(
    device: &DeviceParams,
    phases: &PhaseVector,
    input: &FockState,
    model: &DistinguishabilityModel,
    m: u64,
    seed: u64,
) -> Result<EventCounts> {
    if m == 0 {
        return Err(Error::domain("event count must be at least 1"));
    }
    let dist = output_probs(&device.unitary(phases), input, model)?;
    let mut rng = task_rng(seed, 0);
    let counts = multinomial(&dist.probabilities(), m, &mut rng);
    EventCounts::new(dist.events.iter().map(|&(e, _)| e).collect(), counts)
}

/// Square region searched by the estimator, centred on the expected phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchDomain {
    pub center: PhaseVector,
    pub half_width: f64,
}

impl SearchDomain {
    pub fn around(center: PhaseVector) -> Self {
        SearchDomain {
            center,
            half_width: PI / 4.0,
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        (x[0] - self.center.dphi1).abs() <= self.half_width
            && (x[1] - self.center.dphi2).abs() <= self.half_width
    }

    fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let h = 2.0 * self.half_width / (MLE_GRID - 1) as f64;
        [
            self.center.dphi1 - self.half_width + i as f64 * h,
            self.center.dphi2 - self.half_width + j as f64 * h,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleEstimate {
    pub phases: PhaseVector,
    pub log_likelihood: f64,
    pub m: u64,
}

/// Likelihood surface of one device/input/model over a search domain, with
/// the coarse-grid outcome probabilities computed once.
pub struct LikelihoodModel {
    ua: ComplexMatrix,
    ub: ComplexMatrix,
    input: FockState,
    model: DistinguishabilityModel,
    domain: SearchDomain,
    events: Vec<FockState>,
    grid_log_probs: Vec<Vec<f64>>,
}

fn safe_ln(p: f64) -> f64 {
    p.max(1e-300).ln()
}

impl LikelihoodModel {
    pub fn new(
        device: &DeviceParams,
        input: &FockState,
        model: &DistinguishabilityModel,
        domain: SearchDomain,
    ) -> Result<Self> {
        model.validate()?;
        if !(domain.half_width > 0.0) {
            return Err(Error::domain("search domain must have positive width"));
        }
        let ua = device.ua();
        let ub = device.ub();
        let events = output_events(input.total());
        let mut grid_log_probs = Vec::with_capacity(MLE_GRID * MLE_GRID);
        for i in 0..MLE_GRID {
            for j in 0..MLE_GRID {
                let x = domain.node(i, j);
                let u = compose(&ua, &ub, &PhaseVector::new(x[0], x[1]));
                let d = output_probs(&u, input, model)?;
                grid_log_probs.push(d.probabilities().into_iter().map(safe_ln).collect());
            }
        }
        Ok(LikelihoodModel {
            ua,
            ub,
            input: *input,
            model: *model,
            domain,
            events,
            grid_log_probs,
        })
    }

    /// Counts reordered to the model's event order.
    fn aligned_counts(&self, counts: &EventCounts) -> Result<Vec<f64>> {
        if counts.photons() != self.input.total() {
            return Err(Error::domain("counts and input have different photon numbers"));
        }
        let mut out = vec![0.0; self.events.len()];
        for (e, &c) in counts.events.iter().zip(&counts.counts) {
            let k = self
                .events
                .iter()
                .position(|x| x == e)
                .ok_or_else(|| Error::domain(format!("unknown event {e}")))?;
            out[k] += c as f64;
        }
        Ok(out)
    }

    pub fn log_likelihood(&self, counts: &EventCounts, phases: &PhaseVector) -> Result<f64> {
        let n = self.aligned_counts(counts)?;
        self.log_likelihood_aligned(&n, phases)
    }

    fn log_likelihood_aligned(&self, n: &[f64], phases: &PhaseVector) -> Result<f64> {
        let u = compose(&self.ua, &self.ub, phases);
        let d = output_probs(&u, &self.input, &self.model)?;
        Ok(n.iter()
            .zip(d.probabilities())
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, p)| c * safe_ln(p))
            .sum())
    }

    /// Coarse grid maximum (first one in lexicographic order on ties),
    /// then a derivative-free polish confined to the domain.
    pub fn estimate(&self, counts: &EventCounts) -> Result<MleEstimate> {
        let n = self.aligned_counts(counts)?;
        let m = counts.total();
        if m == 0 {
            return Err(Error::domain("no events to estimate from"));
        }
        let mut best = (0, f64::NEG_INFINITY);
        let mut worst = f64::INFINITY;
        for (k, lp) in self.grid_log_probs.iter().enumerate() {
            let ll: f64 = n.iter().zip(lp).filter(|(c, _)| **c > 0.0).map(|(c, l)| c * l).sum();
            if ll > best.1 {
                best = (k, ll);
            }
            worst = worst.min(ll);
        }
        if !(best.1 - worst > 1e-12 * best.1.abs().max(1.0)) {
            return Err(Error::Degenerate(
                "log-likelihood is flat over the search domain".into(),
            ));
        }
        let start = self.domain.node(best.0 / MLE_GRID, best.0 % MLE_GRID);
        let h = 2.0 * self.domain.half_width / (MLE_GRID - 1) as f64;
        let objective = |x: &[f64]| {
            if !self.domain.contains(x) {
                return f64::INFINITY;
            }
            self.log_likelihood_aligned(&n, &PhaseVector::new(x[0], x[1]))
                .map_or(f64::INFINITY, |v| -v)
        };
        let opts = NelderMeadOptions {
            max_iter: 1000,
            xtol: MLE_TOLERANCE * 0.1,
            ftol: 1e-12,
            step: 0.5 * h,
        };
        let polished = nelder_mead(objective, &start, &opts);
        let (x, ll) = if -polished.f >= best.1 {
            (polished.x, -polished.f)
        } else {
            (start.to_vec(), best.1)
        };
        Ok(MleEstimate {
            phases: PhaseVector::new(x[0], x[1]),
            log_likelihood: ll,
            m,
        })
    }
}

/// Maximum-likelihood phases for one set of counts.
pub fn mle_estimate(
    counts: &EventCounts,
    device: &DeviceParams,
    input: &FockState,
    model: &DistinguishabilityModel,
    domain: SearchDomain,
) -> Result<MleEstimate> {
    LikelihoodModel::new(device, input, model, domain)?.estimate(counts)
}

/// Error statistics of the estimator at one event number, with the bound
/// curves for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationResult {
    pub m: u64,
    pub repetitions: usize,
    pub mean_estimate: [f64; 2],
    /// Mean squared error of each phase (rad²).
    pub variances: [f64; 2],
    pub total_variance: f64,
    /// `Tr(I⁻¹)/m`
    pub bound_fisher: f64,
    /// `Tr(H_sim⁻¹)/m`
    pub bound_simultaneous: f64,
    /// `Tr(H_sep⁻¹)/m`, absent for odd photon numbers.
    pub bound_separate: Option<f64>,
}

impl EstimationResult {
    /// Per-phase root-mean-squared errors.
    pub fn errors(&self) -> [f64; 2] {
        self.variances.map(f64::sqrt)
    }
}

/// Repeated sample-then-estimate runs for each event number in `ms`.
///
/// Repetition `r` at sweep index `i` draws from stream `i·reps + r` of
/// `seed`, so the output is independent of thread scheduling.
pub fn variance_experiment(
    device: &DeviceParams,
    phases: &PhaseVector,
    input: &FockState,
    model: &DistinguishabilityModel,
    ms: &[u64],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<EstimationResult>> {
    if repetitions < 2 {
        return Err(Error::domain("need at least 2 repetitions"));
    }
    if ms.contains(&0) {
        return Err(Error::domain("event counts must be at least 1"));
    }
    let lik = LikelihoodModel::new(device, input, model, SearchDomain::around(*phases))?;
    let truth = compose(&lik.ua, &lik.ub, phases);
    let probs = output_probs(&truth, input, model)?.probabilities();
    let fisher = fisher_with_unitaries(&lik.ua, &lik.ub, phases, input, model)?.crb_trace()?;
    let n = input.total();
    let sim = classical_benchmark(BenchmarkKind::Simultaneous, n)?.crb_trace()?;
    let sep = classical_benchmark(BenchmarkKind::Separate, n)
        .ok()
        .map(|b| b.crb_trace())
        .transpose()?;

    ms.iter()
        .enumerate()
        .map(|(i, &m)| {
            let estimates = (0..repetitions)
                .into_par_iter()
                .map(|r| {
                    let mut rng = task_rng(seed, (i * repetitions + r) as u64);
                    let counts = EventCounts {
                        events: lik.events.clone(),
                        counts: multinomial(&probs, m, &mut rng),
                    };
                    lik.estimate(&counts)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut mean = [0.0; 2];
            let mut var = [0.0; 2];
            for e in &estimates {
                let est = e.phases.as_array();
                let t = phases.as_array();
                for k in 0..2 {
                    mean[k] += est[k] / repetitions as f64;
                    var[k] += wrap_phase(est[k] - t[k]).powi(2) / repetitions as f64;
                }
            }
            let mf = m as f64;
            Ok(EstimationResult {
                m,
                repetitions,
                mean_estimate: mean,
                variances: var,
                total_variance: var[0] + var[1],
                bound_fisher: fisher / mf,
                bound_simultaneous: sim / mf,
                bound_separate: sep.map(|s| s / mf),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (DeviceParams, PhaseVector, FockState, DistinguishabilityModel) {
        (
            DeviceParams::chip(),
            PhaseVector::new(-1.159, 2.810),
            "23".parse().unwrap(),
            DistinguishabilityModel::new(0.95).unwrap(),
        )
    }

    #[test]
    fn sampling_is_deterministic() {
        let (d, p, i, m) = setup();
        let a = sample_events(&d, &p, &i, &m, 500, 7).unwrap();
        let b = sample_events(&d, &p, &i, &m, 500, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 500);
        let one = sample_events(&d, &p, &i, &m, 1, 3).unwrap();
        assert_eq!(one.total(), 1);
        assert_eq!(one.counts.iter().filter(|&&c| c == 1).count(), 1);
        assert!(sample_events(&d, &p, &i, &m, 0, 3).is_err());
    }

    #[test]
    fn frequencies_converge() {
        let (d, p, i, m) = setup();
        let n = 100_000u64;
        let c = sample_events(&d, &p, &i, &m, n, 11).unwrap();
        let probs = output_probs(&d.unitary(&p), &i, &m).unwrap().probabilities();
        for (k, &pk) in probs.iter().enumerate() {
            let sigma = (pk * (1.0 - pk) / n as f64).sqrt();
            let f = c.counts[k] as f64 / n as f64;
            assert!((f - pk).abs() < 5.0 * sigma.max(1e-9), "event {k}");
        }
    }

    #[test]
    fn proportional_counts_recover_truth() {
        let (d, p, i, m) = setup();
        let probs = output_probs(&d.unitary(&p), &i, &m).unwrap();
        let counts = EventCounts::new(
            probs.events.iter().map(|&(e, _)| e).collect(),
            probs.probabilities().iter().map(|q| (q * 1e9).round() as u64).collect(),
        )
        .unwrap();
        let est = mle_estimate(&counts, &d, &i, &m, SearchDomain::around(p)).unwrap();
        assert!((est.phases.dphi1 - p.dphi1).abs() < 1e-5, "{:?}", est.phases);
        assert!((est.phases.dphi2 - p.dphi2).abs() < 1e-5, "{:?}", est.phases);
    }

    #[test]
    fn event_order_does_not_matter() {
        let (d, p, i, m) = setup();
        let c = sample_events(&d, &p, &i, &m, 800, 5).unwrap();
        let mut rev = c.clone();
        rev.events.reverse();
        rev.counts.reverse();
        let dom = SearchDomain::around(p);
        let a = mle_estimate(&c, &d, &i, &m, dom).unwrap();
        let b = mle_estimate(&rev, &d, &i, &m, dom).unwrap();
        assert_eq!(a.phases, b.phases);
    }

    #[test]
    fn flat_likelihood_is_degenerate() {
        // With the identity transformation the outcome never depends on the phases.
        let mut d = DeviceParams::ideal();
        d.tritter_a = crate::unitary::TritterParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        d.tritter_b = d.tritter_a;
        let i: FockState = "23".parse().unwrap();
        let m = DistinguishabilityModel::indistinguishable();
        let c = sample_events(&d, &PhaseVector::new(0.0, 0.0), &i, &m, 50, 1).unwrap();
        let e = mle_estimate(&c, &d, &i, &m, SearchDomain::around(PhaseVector::new(0.0, 0.0)));
        assert!(matches!(e, Err(Error::Degenerate(_))));
    }
}
