//! Observables extracted from prepared Wannier states: momentum content,
//! band dispersion, band scalars, quasiparticle weights and phases,
//! magnetization profiles, post-selection and phase statistics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{inconsistent, invalid, Error, Result};
use crate::exact::{bare_magnon, full_labeled_spectrum, BandKind, LabeledSpectrum};
use crate::hamiltonian::ModelSpec;
use crate::state::{inner, StateVector, Symmetry};
use crate::vqe::{derive_seed, optimize, Ansatz, InitialStateSpec, VqeConfig, VqeResult};

/// Plain translation (period `N`) or twisted translation (period `2N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentumKind {
    Plain,
    Twisted,
}

impl MomentumKind {
    pub fn of(model: &ModelSpec) -> Self {
        if model.twisted {
            MomentumKind::Twisted
        } else {
            MomentumKind::Plain
        }
    }

    fn operator(self) -> Symmetry {
        match self {
            MomentumKind::Plain => Symmetry::Translate,
            MomentumKind::Twisted => Symmetry::TwistedTranslate,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentumComponent {
    pub momentum_index: usize,
    /// Unnormalized projection of the state onto this momentum sector.
    pub vector: Vec<Complex64>,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct MomentumDecomposition {
    pub kind: MomentumKind,
    pub components: Vec<MomentumComponent>,
}

impl MomentumDecomposition {
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }
}

/// `c_k = (1/M) Σ_{s<M} e^{-ik(anchor + s)} T^s |ψ⟩`.
///
/// The anchor phase makes a bare excitation at `anchor` decompose into
/// bare momentum states with real positive coefficients.
pub fn momentum_decompose(state: &StateVector, kind: MomentumKind, anchor: usize) -> MomentumDecomposition {
    let op = kind.operator();
    let period = op.period(state.n_sites());
    let orbit: Vec<StateVector> = {
        let mut cur = state.clone();
        (0..period)
            .map(|_| {
                let out = cur.clone();
                cur.apply_symmetry(op, 1);
                out
            })
            .collect()
    };
    let components = (0..period)
        .map(|m| {
            let k = 2.0 * PI * m as f64 / period as f64;
            let mut vector = vec![Complex64::new(0.0, 0.0); state.dim()];
            for (s, t) in orbit.iter().enumerate() {
                let phase = Complex64::from_polar(1.0 / period as f64, -k * (anchor + s) as f64);
                vector.iter_mut().zip(t.amplitudes()).for_each(|(a, b)| *a += phase * b);
            }
            let weight = inner(&vector, &vector).re;
            MomentumComponent { momentum_index: m, vector, weight }
        })
        .collect();
    MomentumDecomposition { kind, components }
}

/// Hopping amplitudes `f(s) = ⟨T^s ψ|H|ψ⟩` for `s = 0..M`.
pub fn hopping_amplitudes(model: &ModelSpec, state: &StateVector) -> Result<Vec<Complex64>> {
    let ham = model.hamiltonian();
    let h_psi = ham.apply(state)?;
    let op = MomentumKind::of(model).operator();
    let mut translated = state.clone();
    Ok((0..model.momentum_period())
        .map(|_| {
            let f = inner(translated.amplitudes(), &h_psi);
            translated.apply_symmetry(op, 1);
            f
        })
        .collect())
}

/// `Σ_s e^{iks} f(s)` for every momentum label, imaginary parts kept.
pub fn complex_dispersion(model: &ModelSpec, state: &StateVector) -> Result<Vec<Complex64>> {
    let f = hopping_amplitudes(model, state)?;
    let period = f.len();
    Ok((0..period)
        .map(|m| {
            let k = 2.0 * PI * m as f64 / period as f64;
            f.iter().enumerate().map(|(s, fs)| Complex64::from_polar(1.0, k * s as f64) * fs).sum()
        })
        .collect())
}

/// Band energies `ε_k = Σ_s e^{iks} f(s)` from a single Wannier state.
pub fn dispersion_from_wannier(model: &ModelSpec, state: &StateVector) -> Result<Vec<f64>> {
    complex_dispersion(model, state)?
        .into_iter()
        .enumerate()
        .map(|(m, eps)| {
            if eps.im.abs() > 1e-9 {
                return inconsistent(format!(
                    "dispersion at momentum {m} has imaginary part {:.3e}; state is not symmetric",
                    eps.im
                ));
            }
            Ok(eps.re)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub dispersion: Vec<f64>,
    pub avg_band_energy: f64,
    pub ground_energy: f64,
    pub gap_k0: f64,
    pub avg_gap: f64,
    pub bandwidth: Option<f64>,
}

/// Gap, average gap and bandwidth from ground, Wannier and (optionally)
/// Bell-pair and odd-parity `k = 0` runs on the same plain model.
pub fn band_scalars(
    ground: &VqeResult,
    wannier: &VqeResult,
    bell_pair: Option<&VqeResult>,
    odd_k0: Option<&VqeResult>,
) -> Result<BandReport> {
    let model = wannier.model;
    if model.twisted {
        return invalid("band scalars are defined for the plain model");
    }
    for other in [Some(ground), bell_pair, odd_k0].into_iter().flatten() {
        if other.model != model {
            return invalid(format!("model mismatch: {:?} vs {:?}", other.model, model));
        }
    }
    if let Some(bp) = bell_pair {
        match bp.init {
            InitialStateSpec::BellPair { x1, x2 } if (x1 + model.n - x2) % model.n == 1 || (x2 + model.n - x1) % model.n == 1 => {}
            other => return invalid(format!("bandwidth needs an adjacent Bell pair, got {other:?}")),
        }
    }
    let dispersion = dispersion_from_wannier(&model, &wannier.final_state)?;
    let ground_energy = ground.energy;
    let avg_band_energy = wannier.energy;
    let gap_k0 = match odd_k0 {
        Some(r) => r.energy - ground_energy,
        None => dispersion[0] - ground_energy,
    };
    Ok(BandReport {
        dispersion,
        avg_band_energy,
        ground_energy,
        gap_k0,
        avg_gap: avg_band_energy - ground_energy,
        bandwidth: bell_pair.map(|bp| wannier.energy - bp.energy),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightAndPhases {
    pub z_x: f64,
    /// `arg⟨ψ^ED_{-1,k}|c_k⟩` in `(−π, π]`.
    pub phi_k: Vec<f64>,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Quasiparticle weight against the bare spin flip at `anchor` and the
/// phase of each momentum channel relative to the gauge-fixed exact
/// magnon state.
pub fn weight_and_phases(state: &StateVector, spectrum: &LabeledSpectrum, anchor: usize) -> Result<WeightAndPhases> {
    let model = &spectrum.model;
    if model.twisted {
        return invalid("weights and phases are defined for the plain model");
    }
    let n = model.n;
    let bare = StateVector::spin_flip(n, anchor)?;
    let z_x = bare.fidelity(state)?;
    let decomposition = momentum_decompose(state, MomentumKind::Plain, anchor);
    let threshold = 1.0 / (10.0 * n as f64);
    let phi_k = decomposition
        .components
        .iter()
        .map(|c| {
            if c.weight < threshold {
                return Err(Error::DegenerateChannel { index: c.momentum_index, weight: c.weight, threshold });
            }
            let exact = spectrum.band_state(BandKind::Magnon, c.momentum_index)?;
            Ok(wrap_phase(inner(exact.amplitudes(), &c.vector).arg()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(WeightAndPhases { z_x, phi_k })
}

/// `z_x` evaluated through the momentum components:
/// `|(1/√N) Σ_k ⟨ψ⁰_k|c_k⟩|²`, with `ψ⁰_k` the bare magnon states.
pub fn weight_from_components(state: &StateVector, anchor: usize) -> Result<f64> {
    let n = state.n_sites();
    let decomposition = momentum_decompose(state, MomentumKind::Plain, anchor);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in &decomposition.components {
        acc += inner(bare_magnon(n, c.momentum_index)?.amplitudes(), &c.vector);
    }
    Ok((acc / (n as f64).sqrt()).norm_sqr())
}

/// `⟨X_r⟩` for `r = 1..=N`.
pub fn magnetization_profile(state: &StateVector) -> Vec<f64> {
    (1..=state.n_sites()).map(|r| state.site_x_expectation(r).expect("site in range")).collect()
}

#[derive(Debug, Clone)]
pub struct Selection<'a> {
    pub index: usize,
    pub run: &'a VqeResult,
    pub z_x: f64,
}

/// Picks the run with the largest `z_x`; ties go to lower energy, then
/// lower seed. Unconverged runs are ignored when any run converged.
pub fn post_select<'a>(runs: &'a [VqeResult], spectrum: &LabeledSpectrum, anchor: usize) -> Result<Selection<'a>> {
    if runs.is_empty() {
        return invalid("post-selection needs at least one run");
    }
    let any_converged = runs.iter().any(|r| r.converged);
    let mut best: Option<Selection<'a>> = None;
    for (index, run) in runs.iter().enumerate() {
        if any_converged && !run.converged {
            continue;
        }
        let z_x = StateVector::spin_flip(spectrum.model.n, anchor)?.fidelity(&run.final_state)?;
        let better = match &best {
            None => true,
            Some(b) => z_x
                .total_cmp(&b.z_x)
                .then(b.run.energy.total_cmp(&run.energy))
                .then(b.run.seed.cmp(&run.seed))
                .is_gt(),
        };
        if better {
            best = Some(Selection { index, run, z_x });
        }
    }
    Ok(best.expect("nonempty"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub low: f64,
    pub high: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Uniform bins over `(low, high]`; values outside are clamped into the
    /// edge bins.
    pub fn new(values: &[f64], low: f64, high: f64, bins: usize) -> Self {
        let mut counts = vec![0; bins];
        let width = (high - low) / bins as f64;
        for &v in values {
            let i = ((v - low) / width).ceil() as isize - 1;
            counts[i.clamp(0, bins as isize - 1) as usize] += 1;
        }
        Self { low, high, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the most populated bin (first on ties).
    pub fn mode(&self) -> usize {
        let max = *self.counts.iter().max().unwrap_or(&0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    /// Pearson statistic against a uniform distribution and its p-value.
    pub fn chi_square_uniform(&self) -> (f64, f64) {
        let bins = self.counts.len();
        let expected = self.total() as f64 / bins as f64;
        let stat = self.counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
        let dist = ChiSquared::new((bins - 1) as f64).expect("positive dof");
        (stat, 1.0 - dist.cdf(stat))
    }
}

/// Circular standard deviation `√(−2 ln R)` with `R = |⟨e^{iφ}⟩|`.
pub fn circular_spread(phases: &[f64]) -> f64 {
    let mean: Complex64 = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).sum::<Complex64>() / phases.len() as f64;
    (-2.0 * mean.norm().ln()).sqrt()
}

pub fn median_abs(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub const PHASE_BINS: usize = 24;
pub const WEIGHT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    /// `φ_k − φ_0` for every run and every `k ≠ 0`, wrapped to `(−π, π]`.
    pub relative_phases: Vec<f64>,
    /// The subset `k = 1..=(N−1)/2`. Runs started from a reflection-symmetric
    /// state have `φ_k = φ_{N−k}`, so only these channels are independent.
    pub independent_phases: Vec<f64>,
    pub z_x: Vec<f64>,
    pub phase_histogram: Histogram,
    pub weight_histogram: Histogram,
}

impl PhaseSample {
    fn from_runs(rows: Vec<WeightAndPhases>) -> Self {
        let relative_phases: Vec<f64> = rows
            .iter()
            .flat_map(|r| r.phi_k[1..].iter().map(move |p| wrap_phase(p - r.phi_k[0])))
            .collect();
        let independent_phases: Vec<f64> = rows
            .iter()
            .flat_map(|r| {
                let half = (r.phi_k.len() - 1) / 2;
                r.phi_k[1..=half].iter().map(move |p| wrap_phase(p - r.phi_k[0]))
            })
            .collect();
        let z_x: Vec<f64> = rows.iter().map(|r| r.z_x).collect();
        let phase_histogram = Histogram::new(&relative_phases, -PI, PI, PHASE_BINS);
        let weight_histogram = Histogram::new(&z_x, 0.0, 1.0, WEIGHT_BINS);
        Self { relative_phases, independent_phases, z_x, phase_histogram, weight_histogram }
    }

    /// Chi-square p-value for uniformity of the independent relative phases
    /// over the phase bins.
    pub fn uniformity_p_value(&self) -> f64 {
        Histogram::new(&self.independent_phases, -PI, PI, self.phase_histogram.counts.len()).chi_square_uniform().1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStatistics {
    pub before: PhaseSample,
    pub after: PhaseSample,
    pub z_x_max: f64,
    pub seeds: Vec<u64>,
    pub converged: Vec<bool>,
}

/// Runs `n_runs` independent magnon Wannier optimizations from the center
/// spin flip and collects relative phases and weights both at the random
/// starting angles and at the optimum.
pub fn phase_statistics_experiment(
    model: &ModelSpec,
    n_runs: usize,
    depth: usize,
    config: &VqeConfig,
) -> Result<PhaseStatistics> {
    if n_runs < 30 {
        return invalid(format!("phase statistics need at least 30 runs, got {n_runs}"));
    }
    let spectrum = full_labeled_spectrum(model)?;
    let z_x_max = spectrum.exact_weights()?.z_x_max;
    let init = InitialStateSpec::center_flip(model.n);
    let anchor = init.anchor(model.n);
    let ansatz = Ansatz::new(model, init)?;
    let seeds: Vec<u64> = (0..n_runs as u64).map(|i| derive_seed(config.seed, i)).collect();
    let rows = seeds
        .par_iter()
        .map(|&seed| {
            let run = optimize(model, init, depth, &config.clone().with_seed(seed))?;
            let before = weight_and_phases(&ansatz.prepare(&run.initial_params.theta), &spectrum, anchor)?;
            let after = weight_and_phases(&run.final_state, &spectrum, anchor)?;
            Ok((before, after, run.converged))
        })
        .collect::<Result<Vec<_>>>()?;
    let converged = rows.iter().map(|r| r.2).collect();
    let (before, after): (Vec<_>, Vec<_>) = rows.into_iter().map(|(b, a, _)| (b, a)).unzip();
    Ok(PhaseStatistics {
        before: PhaseSample::from_runs(before),
        after: PhaseSample::from_runs(after),
        z_x_max,
        seeds,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::LocalKet;

    #[test]
    fn spin_flip_has_equal_weights() {
        let s = StateVector::spin_flip(7, 4).unwrap();
        let d = momentum_decompose(&s, MomentumKind::Plain, 4);
        assert!(d.weights().iter().all(|w| (w - 1.0 / 7.0).abs() < 1e-14));
    }

    #[test]
    fn uniform_state_is_zero_momentum() {
        let s = StateVector::uniform(7, LocalKet::Plus).unwrap();
        let w = momentum_decompose(&s, MomentumKind::Plain, 0).weights();
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!(w[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn flat_band_from_bare_flip() {
        let model = ModelSpec::plain(7, 0.0, 1.0).unwrap();
        let s = StateVector::spin_flip(7, 4).unwrap();
        let eps = dispersion_from_wannier(&model, &s).unwrap();
        assert!(eps.iter().all(|e| (e + 5.0).abs() < 1e-12));
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn bare_flip_profile() {
        let s = StateVector::spin_flip(9, 5).unwrap();
        let m = magnetization_profile(&s);
        for (r, v) in m.iter().enumerate() {
            let expect = if r == 4 { -1.0 } else { 1.0 };
            assert!((v - expect).abs() < 1e-14);
        }
        let plus = StateVector::uniform(9, LocalKet::Plus).unwrap();
        assert!(magnetization_profile(&plus).iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn zero_coupling_weight_and_phases() {
        let model = ModelSpec::plain(7, 0.0, 1.0).unwrap();
        let spectrum = full_labeled_spectrum(&model).unwrap();
        let s = StateVector::spin_flip(7, 4).unwrap();
        let wp = weight_and_phases(&s, &spectrum, 4).unwrap();
        assert!((wp.z_x - 1.0).abs() < 1e-12);
        assert!(wp.phi_k.iter().all(|p| p.abs() < 1e-10));
    }

    #[test]
    fn symmetric_state_triggers_degenerate_channel() {
        let model = ModelSpec::plain(5, 0.3, 1.0).unwrap();
        let spectrum = full_labeled_spectrum(&model).unwrap();
        let s = StateVector::uniform(5, LocalKet::Minus).unwrap();
        assert!(matches!(weight_and_phases(&s, &spectrum, 3), Err(Error::DegenerateChannel { .. })));
    }

    #[test]
    fn histogram_binning_and_chi_square() {
        let h = Histogram::new(&[-PI, -3.0, 0.0, 0.1, PI], -PI, PI, 4);
        assert_eq!(h.counts, vec![2, 1, 1, 1]);
        let flat = Histogram { low: 0.0, high: 1.0, counts: vec![10; 20] };
        let (stat, p) = flat.chi_square_uniform();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let spiked = Histogram { low: 0.0, high: 1.0, counts: [vec![200], vec![0; 19]].concat() };
        assert!(spiked.chi_square_uniform().1 < 1e-10);
    }

    #[test]
    fn circular_spread_limits() {
        assert!(circular_spread(&[0.3; 10]) < 1e-7);
        assert!(circular_spread(&[0.0, PI]) > 5.0);
    }

    #[test]
    fn median_abs_values() {
        assert_eq!(median_abs(&[-3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_abs(&[-1.0, 3.0]), 2.0);
    }
}
