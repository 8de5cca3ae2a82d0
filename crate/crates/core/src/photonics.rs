//! Multiphoton output statistics of a three-mode unitary.
//!
//! Amplitudes are permanents of submatrices `U[out, in]` (rows are output
//! modes, columns input modes). Partial distinguishability is a single scalar
//! mixing the bosonic and the classical-particle distributions.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

pub const MODES: usize = 3;
/// Largest matrix handled by the direct permanent expansion.
pub const MAX_PERMANENT_SIZE: usize = 4;

/// Photon occupations on the three modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockState {
    pub occupations: [u8; MODES],
}

impl FockState {
    pub fn new(occupations: [u8; MODES]) -> Self {
        FockState { occupations }
    }

    /// State with one photon per listed mode (1-based, repetition allowed).
    pub fn from_modes(modes: &[usize]) -> Result<Self> {
        let mut occ = [0u8; MODES];
        for &m in modes {
            if !(1..=MODES).contains(&m) {
                return Err(Error::domain(format!("mode {m} outside 1..={MODES}")));
            }
            occ[m - 1] += 1;
        }
        Ok(FockState { occupations: occ })
    }

    /// One photon in every mode.
    pub fn triple() -> Self {
        FockState { occupations: [1; MODES] }
    }

    pub fn total(&self) -> usize {
        self.occupations.iter().map(|&o| o as usize).sum()
    }

    /// Occupied modes, 1-based, sorted, repeated by multiplicity.
    pub fn modes(&self) -> Vec<usize> {
        self.mode_indices().into_iter().map(|m| m + 1).collect()
    }

    pub(crate) fn mode_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (m, &o) in self.occupations.iter().enumerate() {
            out.extend(std::iter::repeat_n(m, o as usize));
        }
        out
    }

    /// `∏ s_j!`
    pub fn multiplicity_factor(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&o| (1..=o as u32).product::<u32>() as f64)
            .product()
    }

    /// At most one photon per mode.
    pub fn is_collision_free(&self) -> bool {
        self.occupations.iter().all(|&o| o <= 1)
    }

    /// Mode list such as `"23"` or `"113"`.
    pub fn label(&self) -> String {
        self.modes().iter().map(|m| m.to_string()).collect()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for FockState {
    type Err = Error;

    /// Parses a mode list: `"23"`, `"2,3"` or `"(1,2,3)"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for c in s.chars() {
            match c {
                '1'..='9' => modes.push(c as usize - '0' as usize),
                ',' | ' ' | '(' | ')' => {}
                _ => return Err(Error::Parse(format!("bad character `{c}` in state `{s}`"))),
            }
        }
        if modes.is_empty() {
            return Err(Error::Parse(format!("empty state `{s}`")));
        }
        FockState::from_modes(&modes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// All output patterns of `photons` photons on three modes, ordered
/// lexicographically by sorted mode list (`11, 12, 13, 22, 23, 33`).
pub fn output_events(photons: usize) -> Vec<FockState> {
    fn rec(start: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<FockState>) {
        if left == 0 {
            let mut occ = [0u8; MODES];
            for &m in cur.iter() {
                occ[m] += 1;
            }
            out.push(FockState::new(occ));
            return;
        }
        for m in start..MODES {
            cur.push(m);
            rec(m, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, photons, &mut Vec::with_capacity(photons), &mut out);
    out
}

/// Output events with their probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution {
    pub photons: usize,
    pub events: Vec<(FockState, f64)>,
}

impl OutputDistribution {
    pub fn probabilities(&self) -> Vec<f64> {
        self.events.iter().map(|&(_, p)| p).collect()
    }

    pub fn probability(&self, event: &FockState) -> Option<f64> {
        self.events.iter().find(|(e, _)| e == event).map(|&(_, p)| p)
    }

    pub fn total(&self) -> f64 {
        self.events.iter().map(|&(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Scalar distinguishability: visibility `V` at zero delay, reduced by
/// `exp(−(δτ/σ)²)` when the photons are delayed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityModel {
    pub visibility: f64,
    #[serde(default)]
    pub delay: f64,
    #[serde(default = "unit_width")]
    pub width: f64,
}

fn unit_width() -> f64 {
    1.0
}

impl DistinguishabilityModel {
    pub fn new(visibility: f64) -> Result<Self> {
        let m = DistinguishabilityModel {
            visibility,
            delay: 0.0,
            width: 1.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn indistinguishable() -> Self {
        DistinguishabilityModel {
            visibility: 1.0,
            delay: 0.0,
            width: 1.0,
        }
    }

    pub fn distinguishable() -> Self {
        DistinguishabilityModel {
            visibility: 0.0,
            ..Self::indistinguishable()
        }
    }

    pub fn with_delay(mut self, delay: f64, width: f64) -> Result<Self> {
        self.delay = delay;
        self.width = width;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::domain(format!(
                "visibility {} outside [0, 1]",
                self.visibility
            )));
        }
        if self.delay != 0.0 && !(self.width > 0.0) {
            return Err(Error::domain("delay scans need a positive width"));
        }
        Ok(())
    }

    pub fn effective_visibility(&self) -> f64 {
        if self.delay == 0.0 {
            return self.visibility;
        }
        let x = self.delay / self.width;
        self.visibility * (-x * x).exp()
    }
}

fn permutation_table(n: usize) -> &'static [Vec<usize>] {
    static TABLES: OnceLock<Vec<Vec<Vec<usize>>>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_PERMANENT_SIZE).map(permutations).collect())[n]
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn check_permanent_shape(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::domain(format!(
            "permanent of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() > MAX_PERMANENT_SIZE {
        return Err(Error::domain(format!(
            "permanent limited to n ≤ {MAX_PERMANENT_SIZE}, got {}",
            m.rows()
        )));
    }
    Ok(())
}

fn permanent_unchecked(m: &ComplexMatrix) -> Complex64 {
    let n = m.rows();
    permutation_table(n)
        .iter()
        .map(|p| (0..n).map(|i| m[(i, p[i])]).product::<Complex64>())
        .sum()
}

/// Matrix permanent by direct expansion over the `n!` permutations.
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64> {
    check_permanent_shape(m)?;
    Ok(permanent_unchecked(m))
}

/// Derivative of the permanent along `dm`. The permanent is linear in each
/// row, so this is the sum over rows of the permanent with that row taken
/// from `dm`.
fn permanent_directional(m: &ComplexMatrix, dm: &ComplexMatrix) -> Complex64 {
    let n = m.rows();
    let mut total = Complex64::new(0.0, 0.0);
    for r in 0..n {
        let mut mr = m.clone();
        for c in 0..n {
            mr[(r, c)] = dm[(r, c)];
        }
        total += permanent_unchecked(&mr);
    }
    total
}

fn modulus_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = Complex64::new(m[(i, j)].norm_sqr(), 0.0);
        }
    }
    out
}

fn check_unitary_3(u: &ComplexMatrix) -> Result<()> {
    if u.rows() != MODES || u.cols() != MODES {
        return Err(Error::domain(format!(
            "expected a {MODES}x{MODES} unitary, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    Ok(())
}

/// Indistinguishable and distinguishable probability of one event. The
/// classical term counts labelled photons, so only the output
/// multiplicities divide it.
fn event_pair(u: &ComplexMatrix, input: &[usize], out: &FockState, in_norm: f64) -> (f64, f64) {
    let sub = u.select(&out.mode_indices(), input);
    let out_norm = out.multiplicity_factor();
    let pi = permanent_unchecked(&sub).norm_sqr() / (in_norm * out_norm);
    let pd = permanent_unchecked(&modulus_matrix(&sub)).re / out_norm;
    (pi, pd)
}

/// Output distribution for any input of one to three photons.
pub fn output_probs(
    u: &ComplexMatrix,
    input: &FockState,
    model: &DistinguishabilityModel,
) -> Result<OutputDistribution> {
    check_unitary_3(u)?;
    model.validate()?;
    let n = input.total();
    if n == 0 || n > MODES {
        return Err(Error::domain(format!(
            "supported photon numbers are 1..={MODES}, got {n}"
        )));
    }
    let v = model.effective_visibility();
    let modes = input.mode_indices();
    let norm = input.multiplicity_factor();
    let events = output_events(n)
        .into_iter()
        .map(|e| {
            let (pi, pd) = event_pair(u, &modes, &e, norm);
            (e, v * pi + (1.0 - v) * pd)
        })
        .collect();
    Ok(OutputDistribution { photons: n, events })
}

/// `P(i → j) = |U_ji|²`, modes 1-based.
pub fn single_photon_probs(u: &ComplexMatrix, input_mode: usize) -> Result<OutputDistribution> {
    let input = FockState::from_modes(&[input_mode])?;
    output_probs(u, &input, &DistinguishabilityModel::indistinguishable())
}

/// Two photons in distinct input modes.
pub fn two_photon_probs(
    u: &ComplexMatrix,
    input: &FockState,
    model: &DistinguishabilityModel,
) -> Result<OutputDistribution> {
    if input.total() != 2 || !input.is_collision_free() {
        return Err(Error::domain(format!(
            "two-photon input must occupy two distinct modes, got {input}"
        )));
    }
    output_probs(u, input, model)
}

/// One photon in each mode.
pub fn three_photon_probs(
    u: &ComplexMatrix,
    model: &DistinguishabilityModel,
) -> Result<OutputDistribution> {
    output_probs(u, &FockState::triple(), model)
}

/// Distribution at each normalized delay `δτ/σ`, the visibility decaying as
/// `V·exp(−(δτ/σ)²)`.
pub fn hom_scan(
    u: &ComplexMatrix,
    input: &FockState,
    delays: &[f64],
    model: &DistinguishabilityModel,
) -> Result<Vec<OutputDistribution>> {
    delays
        .iter()
        .map(|&x| {
            let m = DistinguishabilityModel {
                visibility: model.visibility,
                delay: x,
                width: 1.0,
            };
            two_photon_probs(u, input, &m)
        })
        .collect()
}

/// Event probabilities and their derivatives along each `du[k]`, i.e.
/// `grads[k][e] = d P_e / dθ_k` when `du[k] = dU/dθ_k`.
pub(crate) fn probs_and_gradients(
    u: &ComplexMatrix,
    du: &[ComplexMatrix],
    input: &FockState,
    visibility: f64,
) -> (Vec<FockState>, Vec<f64>, Vec<Vec<f64>>) {
    let n = input.total();
    let modes = input.mode_indices();
    let in_norm = input.multiplicity_factor();
    let events = output_events(n);
    let mut probs = Vec::with_capacity(events.len());
    let mut grads = vec![Vec::with_capacity(events.len()); du.len()];
    for e in &events {
        let rows = e.mode_indices();
        let out_norm = e.multiplicity_factor();
        let norm = in_norm * out_norm;
        let sub = u.select(&rows, &modes);
        let perm = permanent_unchecked(&sub);
        let abs = modulus_matrix(&sub);
        let perm_abs = permanent_unchecked(&abs).re;
        probs.push(visibility * perm.norm_sqr() / norm + (1.0 - visibility) * perm_abs / out_norm);
        for (k, d) in du.iter().enumerate() {
            let dsub = d.select(&rows, &modes);
            let dperm = permanent_directional(&sub, &dsub);
            let mut dabs = dsub.clone();
            for i in 0..n {
                for j in 0..n {
                    let z = sub[(i, j)].conj() * dsub[(i, j)];
                    dabs[(i, j)] = Complex64::new(2.0 * z.re, 0.0);
                }
            }
            let dperm_abs = permanent_directional(&abs, &dabs).re;
            let di = 2.0 * (perm.conj() * dperm).re;
            grads[k].push(visibility * di / norm + (1.0 - visibility) * dperm_abs / out_norm);
        }
    }
    (events, probs, grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitary::{coupler_matrix, symmetric_tritter, CouplerPair, TritterParams};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_unitary(p: [f64; 8]) -> ComplexMatrix {
        let a = TritterParams::new(p[0], p[1], p[2], p[3]).unwrap().unitary();
        let b = TritterParams::new(p[4], p[5], p[6], p[7]).unwrap().unitary();
        let ph = crate::unitary::phase_layer(&crate::unitary::PhaseVector::new(p[3] * 2.0, p[7]));
        &(&b * &ph) * &a
    }

    #[test]
    fn permanent_small_cases() {
        assert_eq!(permanent(&ComplexMatrix::identity(2)).unwrap(), c(1.0, 0.0));
        let ones = ComplexMatrix::from_parts([[(1.0, 0.0); 3]; 3]);
        assert_eq!(permanent(&ones).unwrap(), c(6.0, 0.0));
        let m = ComplexMatrix::from_parts([[(1.0, 2.0), (3.0, 0.0)], [(0.0, 1.0), (2.0, -1.0)]]);
        let expected = m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)];
        assert_eq!(permanent(&m).unwrap(), expected);
        let ones4 = ComplexMatrix::from_parts([[(1.0, 0.0); 4]; 4]);
        assert_eq!(permanent(&ones4).unwrap(), c(24.0, 0.0));
    }

    #[test]
    fn permanent_rejects_bad_shapes() {
        assert!(permanent(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!(permanent(&ComplexMatrix::identity(5)).is_err());
    }

    #[test]
    fn event_enumeration() {
        let labels: Vec<String> = output_events(2).iter().map(|e| e.label()).collect();
        assert_eq!(labels, ["11", "12", "13", "22", "23", "33"]);
        assert_eq!(output_events(1).len(), 3);
        assert_eq!(output_events(3).len(), 10);
        assert_eq!(output_events(3)[0].label(), "111");
        assert_eq!(output_events(3)[9].label(), "333");
    }

    #[test]
    fn fock_state_parsing() {
        let s: FockState = "23".parse().unwrap();
        assert_eq!(s.occupations, [0, 1, 1]);
        assert_eq!("(1,2,3)".parse::<FockState>().unwrap(), FockState::triple());
        assert!("4".parse::<FockState>().is_err());
        assert!("".parse::<FockState>().is_err());
    }

    #[test]
    fn single_photon_identity_and_tritter() {
        let d = single_photon_probs(&ComplexMatrix::identity(3), 2).unwrap();
        assert_eq!(d.probabilities(), vec![0.0, 1.0, 0.0]);
        for i in 1..=3 {
            for p in single_photon_probs(&symmetric_tritter(), i).unwrap().probabilities() {
                assert!((p - 1.0 / 3.0).abs() < 1e-12);
            }
        }
        assert!(single_photon_probs(&ComplexMatrix::identity(3), 4).is_err());
    }

    #[test]
    fn hom_dip_on_balanced_splitter() {
        let u = coupler_matrix(0.5, CouplerPair::Modes12).unwrap();
        let input = FockState::from_modes(&[1, 2]).unwrap();
        let q = two_photon_probs(&u, &input, &DistinguishabilityModel::indistinguishable()).unwrap();
        let get = |d: &OutputDistribution, s: &str| d.probability(&s.parse().unwrap()).unwrap();
        assert!(get(&q, "12").abs() < 1e-15);
        assert!((get(&q, "11") - 0.5).abs() < 1e-15);
        assert!((get(&q, "22") - 0.5).abs() < 1e-15);
        let cl = two_photon_probs(&u, &input, &DistinguishabilityModel::distinguishable()).unwrap();
        assert!((get(&cl, "12") - 0.5).abs() < 1e-15);
        assert!((get(&cl, "11") - 0.25).abs() < 1e-15);
        assert!((get(&cl, "22") - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_two_and_three_photons() {
        let id = ComplexMatrix::identity(3);
        let input = FockState::from_modes(&[2, 3]).unwrap();
        let d = two_photon_probs(&id, &input, &DistinguishabilityModel::indistinguishable()).unwrap();
        for (e, p) in &d.events {
            assert_eq!(*p, if *e == input { 1.0 } else { 0.0 });
        }
        let t = three_photon_probs(&id, &DistinguishabilityModel::indistinguishable()).unwrap();
        assert_eq!(t.probability(&FockState::triple()), Some(1.0));
    }

    #[test]
    fn two_photon_rejects_bunched_input() {
        let id = ComplexMatrix::identity(3);
        let bunched = FockState::from_modes(&[2, 2]).unwrap();
        let m = DistinguishabilityModel::indistinguishable();
        assert!(two_photon_probs(&id, &bunched, &m).is_err());
        assert!(two_photon_probs(&id, &FockState::triple(), &m).is_err());
    }

    #[test]
    fn triple_coincidence_matches_amplitude_sum() {
        // Sum the 3! amplitudes of photon k going to output σ(k) directly.
        let u = symmetric_tritter();
        let mut amp = c(0.0, 0.0);
        for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            amp += u[(p[0], 0)] * u[(p[1], 1)] * u[(p[2], 2)];
        }
        let d = three_photon_probs(&u, &DistinguishabilityModel::indistinguishable()).unwrap();
        let p = d.probability(&FockState::triple()).unwrap();
        assert!((p - amp.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn hom_scan_limits() {
        let u = coupler_matrix(0.5, CouplerPair::Modes12).unwrap();
        let input = FockState::from_modes(&[1, 2]).unwrap();
        let m = DistinguishabilityModel::new(0.9).unwrap();
        let scan = hom_scan(&u, &input, &[0.0, 50.0], &m).unwrap();
        let at0 = two_photon_probs(&u, &input, &m).unwrap();
        let far = two_photon_probs(&u, &input, &DistinguishabilityModel::distinguishable()).unwrap();
        for i in 0..6 {
            assert!((scan[0].events[i].1 - at0.events[i].1).abs() < 1e-15);
            assert!((scan[1].events[i].1 - far.events[i].1).abs() < 1e-15);
        }
    }

    #[test]
    fn model_validation() {
        assert!(DistinguishabilityModel::new(1.2).is_err());
        assert!(DistinguishabilityModel::new(0.5).unwrap().with_delay(1.0, 0.0).is_err());
        let m = DistinguishabilityModel::new(0.8).unwrap().with_delay(1.0, 2.0).unwrap();
        assert!((m.effective_visibility() - 0.8 * (-0.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = [0.3, 0.6, 0.45, 1.1, 0.5, 0.4, 0.7, -0.6];
        let base = |x: f64| {
            let u = random_unitary(p);
            let d = ComplexMatrix::diagonal(&[c(1.0, 0.0), Complex64::from_polar(1.0, x), c(1.0, 0.0)]);
            &u * &d
        };
        let du = {
            let mut e = ComplexMatrix::zeros(3, 3);
            e[(1, 1)] = c(0.0, 1.0);
            &base(0.4) * &e
        };
        let h = 1e-6;
        for input in [FockState::from_modes(&[1, 3]).unwrap(), FockState::triple()] {
            let (_, _, g) = probs_and_gradients(&base(0.4), std::slice::from_ref(&du), &input, 0.7);
            let m = DistinguishabilityModel::new(0.7).unwrap();
            let up = output_probs(&base(0.4 + h), &input, &m).unwrap().probabilities();
            let dn = output_probs(&base(0.4 - h), &input, &m).unwrap().probabilities();
            for e in 0..up.len() {
                let fd = (up[e] - dn[e]) / (2.0 * h);
                assert!((fd - g[0][e]).abs() < 1e-8, "{fd} vs {}", g[0][e]);
            }
        }
    }

    proptest! {
        #[test]
        fn distributions_normalize(
            t in prop::array::uniform6(0.0f64..1.0),
            ph in prop::array::uniform2(-3.2f64..3.2),
            v in 0.0f64..1.0,
        ) {
            let u = random_unitary([t[0], t[1], t[2], ph[0], t[3], t[4], t[5], ph[1]]);
            let m = DistinguishabilityModel::new(v).unwrap();
            for input in ["1", "2", "3", "12", "13", "23", "123", "22", "113"] {
                let s: FockState = input.parse().unwrap();
                let d = output_probs(&u, &s, &m).unwrap();
                prop_assert!((d.total() - 1.0).abs() < 1e-9);
                prop_assert!(d.probabilities().iter().all(|&p| p >= -1e-15));
            }
        }

        #[test]
        fn visibility_mixing_is_linear(
            t in prop::array::uniform6(0.0f64..1.0),
            ph in prop::array::uniform2(-3.2f64..3.2),
            v in 0.0f64..1.0,
        ) {
            let u = random_unitary([t[0], t[1], t[2], ph[0], t[3], t[4], t[5], ph[1]]);
            let s = FockState::triple();
            let pv = output_probs(&u, &s, &DistinguishabilityModel::new(v).unwrap()).unwrap();
            let p1 = output_probs(&u, &s, &DistinguishabilityModel::indistinguishable()).unwrap();
            let p0 = output_probs(&u, &s, &DistinguishabilityModel::distinguishable()).unwrap();
            for i in 0..pv.len() {
                let mix = v * p1.events[i].1 + (1.0 - v) * p0.events[i].1;
                prop_assert!((pv.events[i].1 - mix).abs() < 1e-12);
            }
        }

        #[test]
        fn distinguishable_pairs_are_independent(
            t in prop::array::uniform6(0.0f64..1.0),
            ph in prop::array::uniform2(-3.2f64..3.2),
        ) {
            let u = random_unitary([t[0], t[1], t[2], ph[0], t[3], t[4], t[5], ph[1]]);
            let s: FockState = "13".parse().unwrap();
            let d = two_photon_probs(&u, &s, &DistinguishabilityModel::distinguishable()).unwrap();
            let a = single_photon_probs(&u, 1).unwrap().probabilities();
            let b = single_photon_probs(&u, 3).unwrap().probabilities();
            for (e, p) in &d.events {
                let m = e.mode_indices();
                let expected = if m[0] == m[1] {
                    a[m[0]] * b[m[0]]
                } else {
                    a[m[0]] * b[m[1]] + a[m[1]] * b[m[0]]
                };
                prop_assert!((p - expected).abs() < 1e-12);
            }
        }
    }
}
