//! Experiment orchestration. Every row is a pure function of the config;
//! exact-diagonalization references carry the `_exact` suffix and
//! thermodynamic-limit references the `_limit` suffix.

use std::f64::consts::FRAC_PI_2;

use tfim_wannier::analysis::{
    circular_spread, complex_dispersion, hopping_amplitudes, magnetization_profile, median_abs, post_select,
    PhaseSample,
};
use tfim_wannier::vqe::{best_of_restarts, depth_sweep, optimize_restarts};
use tfim_wannier::{
    band_scalars, full_labeled_spectrum, phase_statistics_experiment, thermodynamic_band_integrals, BandKind,
    InitScheme, InitialStateSpec, LabeledSpectrum, ModelSpec, StateVector, VqeConfig, VqeResult, WallSign,
};

use crate::config::{Experiment, ExperimentConfig, StartScheme};
use crate::error::CliError;
use crate::table::{ResultTable, Row};

type Result<T> = std::result::Result<T, CliError>;

pub fn vqe_config(start: StartScheme, seed: u64) -> VqeConfig {
    let config = VqeConfig::default().with_seed(seed);
    match start {
        StartScheme::Zeros => config,
        StartScheme::Uniform => config.with_scheme(InitScheme::Uniform { low: -FRAC_PI_2, high: FRAC_PI_2 }),
    }
}

/// Collects rows for one model point.
struct Sink<'a> {
    experiment: &'a str,
    model: ModelSpec,
    rows: &'a mut Vec<Row>,
}

impl Sink<'_> {
    fn push(&mut self, depth: Option<usize>, seed: Option<u64>, index: Option<usize>, name: &str, re: f64, im: f64) {
        self.rows.push(Row {
            experiment: self.experiment.to_string(),
            n: self.model.n,
            j: self.model.j,
            h: self.model.h,
            depth,
            seed,
            momentum_index: index,
            quantity_name: name.to_string(),
            value_real: re,
            value_imag: im,
        });
    }

    fn exact(&mut self, index: Option<usize>, name: &str, value: f64) {
        self.push(None, None, index, &format!("{name}_exact"), value, 0.0);
    }

    fn run(&mut self, run: &VqeResult, index: Option<usize>, name: &str, value: f64) {
        self.push(Some(run.params.depth), Some(run.seed), index, name, value, 0.0);
    }

    fn trace(&mut self, run: &VqeResult, name: &str) {
        for &(iteration, energy) in &run.trace {
            self.run(run, Some(iteration), name, energy);
        }
    }
}

fn model_for(config: &ExperimentConfig, j: f64, h: f64) -> Result<ModelSpec> {
    Ok(ModelSpec::new(config.n, j, h, config.twisted)?)
}

/// Runs the configured experiment over the whole `(j, h)` grid.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for (j, h) in config.grid() {
        let model = model_for(config, j, h)?;
        let mut sink = Sink { experiment: config.experiment.name(), model, rows: &mut rows };
        match config.experiment {
            Experiment::GapSweep => gap_sweep(config, &mut sink)?,
            Experiment::Convergence => convergence(config, &mut sink)?,
            Experiment::MagnonBand => magnon_band(config, &mut sink)?,
            Experiment::WannierProfile => wannier_profile(config, &mut sink)?,
            Experiment::Weights => weights(config, &mut sink)?,
            Experiment::SolitonBand => soliton_band(config, &mut sink)?,
            Experiment::TwistedSpectrum => labeled_spectrum_rows(&mut sink)?,
            Experiment::Bandwidth => bandwidth(config, &mut sink)?,
            Experiment::PhaseStats => phase_stats(config, &mut sink)?,
        }
    }
    Ok(ResultTable { rows })
}

fn best(config: &ExperimentConfig, model: &ModelSpec, init: InitialStateSpec, depth: usize) -> Result<VqeResult> {
    Ok(best_of_restarts(model, init, depth, &vqe_config(config.start, config.seed), config.restarts)?)
}

fn odd_k0(spectrum: &LabeledSpectrum) -> Result<f64> {
    spectrum
        .sector_minimum(0, -1)
        .ok_or_else(|| tfim_wannier::Error::Consistency("no odd-parity zero-momentum state".into()).into())
}

fn gap_sweep(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let spectrum = full_labeled_spectrum(&model)?;
    let ground = best(config, &model, InitialStateSpec::AllPlus, config.depth)?;
    let excited = best(config, &model, InitialStateSpec::AllMinus, config.depth)?;
    let (e0, e1) = (spectrum.ground_energy(), odd_k0(&spectrum)?);
    sink.run(&ground, None, "energy_ground", ground.energy);
    sink.exact(None, "energy_ground", e0);
    sink.run(&excited, None, "energy_odd_k0", excited.energy);
    sink.exact(None, "energy_odd_k0", e1);
    sink.run(&excited, None, "gap", excited.energy - ground.energy);
    sink.exact(None, "gap", e1 - e0);
    sink.trace(&ground, "trace_ground");
    sink.trace(&excited, "trace_odd_k0");
    Ok(())
}

fn convergence(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let mean = full_labeled_spectrum(&model)?.band(BandKind::Magnon)?.mean();
    let sweep = depth_sweep(
        &model,
        InitialStateSpec::center_flip(model.n),
        &config.depths,
        &vqe_config(config.start, config.seed),
        config.restarts,
    )?;
    sink.exact(None, "band_mean", mean);
    for point in &sweep {
        sink.run(&point.result, None, "energy", point.energy);
        sink.run(&point.result, None, "energy_minus_band_mean", point.energy - mean);
    }
    Ok(())
}

fn dispersion_rows(sink: &mut Sink, run: &VqeResult, exact: &[f64]) -> Result<()> {
    let model = sink.model;
    let eps = complex_dispersion(&model, &run.final_state)?;
    if let Some((m, e)) = eps.iter().enumerate().find(|(_, e)| e.im.abs() > 1e-9) {
        return Err(tfim_wannier::Error::Consistency(format!("dispersion at momentum {m} has imaginary part {:.3e}", e.im)).into());
    }
    for (m, e) in eps.iter().enumerate() {
        sink.push(Some(run.params.depth), Some(run.seed), Some(m), "dispersion", e.re, e.im);
        sink.exact(Some(m), "dispersion", exact[m]);
    }
    for (s, f) in hopping_amplitudes(&model, &run.final_state)?.iter().enumerate() {
        sink.push(Some(run.params.depth), Some(run.seed), Some(s), "hopping", f.re, f.im);
    }
    Ok(())
}

fn magnon_band(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let spectrum = full_labeled_spectrum(&model)?;
    let band = spectrum.band(BandKind::Magnon)?;
    let run = best(config, &model, InitialStateSpec::center_flip(model.n), config.depth)?;
    dispersion_rows(sink, &run, &band.energies)?;
    sink.run(&run, None, "avg_band_energy", run.energy);
    sink.exact(None, "avg_band_energy", band.mean());
    sink.exact(None, "energy_ground", spectrum.ground_energy());
    Ok(())
}

fn post_selected(config: &ExperimentConfig, sink: &mut Sink) -> Result<(LabeledSpectrum, Vec<VqeResult>, usize)> {
    let model = sink.model;
    let spectrum = full_labeled_spectrum(&model)?;
    let init = InitialStateSpec::center_flip(model.n);
    let runs = optimize_restarts(&model, init, config.depth, &vqe_config(config.start, config.seed), config.restarts)?;
    let selected = post_select(&runs, &spectrum, init.anchor(model.n))?.index;
    let weights = spectrum.exact_weights()?;
    sink.exact(None, "z_x_max", weights.z_x_max);
    for (m, z) in weights.z_k.iter().enumerate() {
        sink.exact(Some(m), "z_k", *z);
    }
    Ok((spectrum, runs, selected))
}

fn z_x(model: &ModelSpec, state: &StateVector) -> Result<f64> {
    Ok(StateVector::spin_flip(model.n, InitialStateSpec::center_flip(model.n).anchor(model.n))?.fidelity(state)?)
}

fn wannier_profile(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let (_, runs, selected) = post_selected(config, sink)?;
    let run = &runs[selected];
    for (r, m) in magnetization_profile(&run.final_state).iter().enumerate() {
        sink.run(run, Some(r + 1), "magnetization_x", *m);
    }
    sink.run(run, None, "z_x", z_x(&model, &run.final_state)?);
    sink.run(run, None, "energy", run.energy);
    Ok(())
}

fn weights(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let (_, runs, selected) = post_selected(config, sink)?;
    for (i, run) in runs.iter().enumerate() {
        sink.run(run, Some(i), "z_x_run", z_x(&model, &run.final_state)?);
        sink.run(run, Some(i), "converged_run", f64::from(u8::from(run.converged)));
    }
    let run = &runs[selected];
    sink.run(run, Some(selected), "z_x_selected", z_x(&model, &run.final_state)?);
    Ok(())
}

fn soliton_band(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let exact = full_labeled_spectrum(&model)?.band(BandKind::Soliton)?.energies;
    let init = InitialStateSpec::DomainWall { sigma: WallSign::Plus, x: model.n / 2 };
    let run = best(config, &model, init, config.depth)?;
    dispersion_rows(sink, &run, &exact)?;
    for m in 0..model.momentum_period() {
        let first_order = -((model.n - 2) as f64) * model.j - 2.0 * model.h * model.momentum(m).cos();
        sink.push(None, None, Some(m), "dispersion_first_order", first_order, 0.0);
    }
    sink.run(&run, None, "avg_band_energy", run.energy);
    Ok(())
}

/// Every level with its momentum label; the parity is part of the name.
fn labeled_spectrum_rows(sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let spectrum = full_labeled_spectrum(&model)?;
    for e in &spectrum.entries {
        let name = if e.parity > 0 { "level_even" } else { "level_odd" };
        sink.exact(Some(e.momentum_index), name, e.energy);
    }
    let kind = if model.twisted { BandKind::Soliton } else { BandKind::Magnon };
    for (m, e) in spectrum.band(kind)?.energies.iter().enumerate() {
        sink.exact(Some(m), "band", *e);
    }
    sink.exact(None, "energy_ground", spectrum.ground_energy());
    if !model.twisted {
        let w = spectrum.exact_weights()?;
        for (m, z) in w.z_k.iter().enumerate() {
            sink.exact(Some(m), "z_k", *z);
        }
        sink.exact(None, "z_x_max", w.z_x_max);
    }
    Ok(())
}

fn bandwidth(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let n = model.n;
    let spectrum = full_labeled_spectrum(&model)?;
    let band = spectrum.band(BandKind::Magnon)?;
    let x = InitialStateSpec::center_flip(n).anchor(n);
    let ground = best(config, &model, InitialStateSpec::AllPlus, config.depth)?;
    let flip = best(config, &model, InitialStateSpec::center_flip(n), config.depth)?;
    let pair = best(config, &model, InitialStateSpec::BellPair { x1: x, x2: x + 1 }, config.depth)?;
    let report = band_scalars(&ground, &flip, Some(&pair), None)?;
    let limit = thermodynamic_band_integrals(model.j, model.h)?;
    let w_exact = -band.energies.iter().enumerate().map(|(m, e)| model.momentum(m).cos() * e).sum::<f64>() / n as f64;

    sink.run(&ground, None, "energy_ground", ground.energy);
    sink.run(&flip, None, "energy_spin_flip", flip.energy);
    sink.run(&pair, None, "energy_bell_pair", pair.energy);
    sink.run(&flip, None, "avg_gap", report.avg_gap);
    sink.exact(None, "avg_gap", band.mean() - spectrum.ground_energy());
    sink.push(None, None, None, "avg_gap_limit", limit.avg_gap, 0.0);
    sink.run(&pair, None, "bandwidth", report.bandwidth.expect("Bell pair supplied"));
    sink.exact(None, "bandwidth", w_exact);
    sink.push(None, None, None, "bandwidth_limit", limit.bandwidth, 0.0);
    Ok(())
}

fn sample_rows(sink: &mut Sink, depth: usize, seeds: &[u64], sample: &PhaseSample, tag: &str) {
    let per_run = sample.relative_phases.len() / seeds.len();
    for (i, phi) in sample.relative_phases.iter().enumerate() {
        sink.push(Some(depth), Some(seeds[i / per_run]), Some(i % per_run + 1), &format!("relative_phase_{tag}"), *phi, 0.0);
    }
    for (seed, z) in seeds.iter().zip(&sample.z_x) {
        sink.push(Some(depth), Some(*seed), None, &format!("z_x_{tag}"), *z, 0.0);
    }
    for (b, c) in sample.phase_histogram.counts.iter().enumerate() {
        sink.push(Some(depth), None, Some(b), &format!("phase_histogram_{tag}"), *c as f64, 0.0);
    }
    for (b, c) in sample.weight_histogram.counts.iter().enumerate() {
        sink.push(Some(depth), None, Some(b), &format!("weight_histogram_{tag}"), *c as f64, 0.0);
    }
    sink.push(Some(depth), None, None, &format!("phase_uniformity_p_{tag}"), sample.uniformity_p_value(), 0.0);
    sink.push(Some(depth), None, None, &format!("median_abs_phase_{tag}"), median_abs(&sample.relative_phases), 0.0);
    sink.push(Some(depth), None, None, &format!("circular_spread_{tag}"), circular_spread(&sample.relative_phases), 0.0);
}

fn phase_stats(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let model = sink.model;
    let stats =
        phase_statistics_experiment(&model, config.restarts, config.depth, &vqe_config(config.start, config.seed))?;
    sink.exact(None, "z_x_max", stats.z_x_max);
    sample_rows(sink, config.depth, &stats.seeds, &stats.before, "before");
    sample_rows(sink, config.depth, &stats.seeds, &stats.after, "after");
    Ok(())
}

/// Rows for `ed`: the labeled spectrum of one model.
pub fn run_ed(model: ModelSpec) -> Result<ResultTable> {
    let mut rows = Vec::new();
    labeled_spectrum_rows(&mut Sink { experiment: "ed", model, rows: &mut rows })?;
    Ok(ResultTable { rows })
}

/// Rows for `vqe`: the lowest-energy run from one initial state, its
/// parameters and trace, and the matching exact reference.
pub fn run_vqe(
    model: ModelSpec,
    init: InitialStateSpec,
    depth: usize,
    restarts: usize,
    seed: u64,
    start: StartScheme,
) -> Result<ResultTable> {
    let mut rows = Vec::new();
    let mut sink = Sink { experiment: "vqe", model, rows: &mut rows };
    let run = best_of_restarts(&model, init, depth, &vqe_config(start, seed), restarts)?;
    let spectrum = full_labeled_spectrum(&model)?;
    sink.run(&run, None, "energy", run.energy);
    sink.run(&run, None, "gradient_norm", run.gradient_norm);
    sink.run(&run, None, "converged", f64::from(u8::from(run.converged)));
    for (i, t) in run.params.theta.iter().enumerate() {
        sink.run(&run, Some(i + 1), "theta", *t);
    }
    sink.trace(&run, "trace");
    match init {
        InitialStateSpec::AllPlus => sink.exact(None, "energy", spectrum.ground_energy()),
        InitialStateSpec::AllMinus => sink.exact(None, "energy", odd_k0(&spectrum)?),
        InitialStateSpec::SpinFlip { x } => {
            let band = spectrum.band(BandKind::Magnon)?;
            sink.exact(None, "energy", band.mean());
            dispersion_rows(&mut sink, &run, &band.energies)?;
            let z = StateVector::spin_flip(model.n, x)?.fidelity(&run.final_state)?;
            sink.run(&run, None, "z_x", z);
            sink.exact(None, "z_x_max", spectrum.exact_weights()?.z_x_max);
        }
        InitialStateSpec::DomainWall { .. } => {
            let band = spectrum.band(BandKind::Soliton)?;
            sink.exact(None, "energy", band.mean());
            dispersion_rows(&mut sink, &run, &band.energies)?;
        }
        InitialStateSpec::BellPair { x1, x2 } => {
            let band = spectrum.band(BandKind::Magnon)?;
            let y = (x2 as f64) - (x1 as f64);
            let e = band.energies.iter().enumerate().map(|(m, e)| (1.0 + (model.momentum(m) * y).cos()) * e).sum::<f64>();
            sink.exact(None, "energy", e / model.n as f64);
        }
    }
    Ok(ResultTable { rows })
}

/// Figure identifiers accepted by `reproduce`.
pub const FIGURES: [&str; 10] = [
    "fig2a",
    "fig2b",
    "fig3",
    "fig4a",
    "fig4b",
    "fig5a-profiles",
    "fig5b",
    "figA-phases",
    "figA-weights",
    "figB-spectrum",
];

/// Experiment preset behind each figure panel.
pub fn figure_config(figure: &str) -> Option<ExperimentConfig> {
    let preset = ExperimentConfig::preset;
    Some(match figure {
        "fig2a" => ExperimentConfig { j: vec![0.5], ..preset(Experiment::GapSweep) },
        "fig2b" => preset(Experiment::GapSweep),
        "fig3" => preset(Experiment::Convergence),
        "fig4a" => preset(Experiment::Bandwidth),
        "fig4b" => preset(Experiment::MagnonBand),
        "fig5a-profiles" => ExperimentConfig { j: vec![0.1, 0.3, 0.5, 0.7, 0.9], ..preset(Experiment::WannierProfile) },
        "fig5b" => preset(Experiment::SolitonBand),
        "figA-phases" => ExperimentConfig { j: vec![0.3], ..preset(Experiment::PhaseStats) },
        "figA-weights" => ExperimentConfig { j: vec![0.1, 0.3, 0.5, 0.7, 0.9], ..preset(Experiment::PhaseStats) },
        "figB-spectrum" => preset(Experiment::TwistedSpectrum),
        _ => return None,
    })
}
