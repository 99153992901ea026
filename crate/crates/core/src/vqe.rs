//! Alternating-layer symmetric ansatz, adjoint gradients and the VQE loop.
//!
//! A depth-`d` circuit is `U(θ) = Π_{i=d..1} e^{-iθ_{2i} G_ZZ} e^{-iθ_{2i-1} G_X}`
//! with `G_X = Σ_i X_i` and `G_ZZ = Σ_i s_i Z_i Z_{i+1}`, where the bond
//! signs follow the model so the circuit commutes with its translation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::domain_wall;
use crate::hamiltonian::{Hamiltonian, ModelSpec};
use crate::optimizer::{minimize, LbfgsOptions, StopReason};
use crate::state::{inner, LocalKet, StateVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub depth: usize,
    /// `θ_1 … θ_{2d}`, unwrapped.
    pub theta: Vec<f64>,
}

impl AnsatzParams {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() || !theta.len().is_multiple_of(2) {
            return invalid(format!("parameter vector length {} is not 2d with d ≥ 1", theta.len()));
        }
        Ok(Self { depth: theta.len() / 2, theta })
    }

    pub fn zeros(depth: usize) -> Self {
        Self { depth, theta: vec![0.0; 2 * depth] }
    }
}

/// Orientation of the rightmost spin in a bare domain wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialStateSpec {
    AllPlus,
    AllMinus,
    /// `|−⟩` at site `x` (1-based) on a `|+⟩` background.
    SpinFlip { x: usize },
    /// `T̃^s |↑…↑⟩` with `s = x` for `σ = +` and `s = x + N` for `σ = −`.
    DomainWall { sigma: WallSign, x: usize },
    /// `(|−⟩_{x1}|+⟩_{x2} + |+⟩_{x1}|−⟩_{x2})/√2` on a `|+⟩` background.
    BellPair { x1: usize, x2: usize },
}

impl InitialStateSpec {
    /// Spin flip at the chain center `(N + 1)/2`.
    pub fn center_flip(n: usize) -> Self {
        InitialStateSpec::SpinFlip { x: n.div_ceil(2) }
    }

    /// Translation count that carries the reference excitation onto this
    /// state's anchor (used to phase-align momentum components).
    pub fn anchor(&self, n: usize) -> usize {
        match *self {
            InitialStateSpec::AllPlus | InitialStateSpec::AllMinus => 0,
            InitialStateSpec::SpinFlip { x } => x,
            InitialStateSpec::DomainWall { sigma: WallSign::Plus, x } => x,
            InitialStateSpec::DomainWall { sigma: WallSign::Minus, x } => x + n,
            InitialStateSpec::BellPair { x1, .. } => x1,
        }
    }

    pub fn build(&self, model: &ModelSpec) -> Result<StateVector> {
        let n = model.n;
        let needs_twisted = matches!(self, InitialStateSpec::DomainWall { .. });
        if needs_twisted != model.twisted {
            return invalid(format!(
                "initial state {self:?} is incompatible with the {} model",
                if model.twisted { "twisted" } else { "plain" }
            ));
        }
        match *self {
            InitialStateSpec::AllPlus => StateVector::uniform(n, LocalKet::Plus),
            InitialStateSpec::AllMinus => StateVector::uniform(n, LocalKet::Minus),
            InitialStateSpec::SpinFlip { x } => StateVector::spin_flip(n, x),
            InitialStateSpec::DomainWall { x, .. } => {
                if x >= n {
                    return invalid(format!("domain wall position {x} outside 0..{n}"));
                }
                domain_wall(n, self.anchor(n))
            }
            InitialStateSpec::BellPair { x1, x2 } => {
                if x1 == x2 {
                    return invalid("Bell pair sites must differ");
                }
                let a = StateVector::spin_flip(n, x1)?;
                let b = StateVector::spin_flip(n, x2)?;
                let amps = a.amplitudes().iter().zip(b.amplitudes()).map(|(p, q)| p + q).collect();
                StateVector::from_amplitudes(n, amps)
            }
        }
    }
}

/// A model's Hamiltonian together with a fixed initial state.
#[derive(Debug, Clone)]
pub struct Ansatz {
    ham: Hamiltonian,
    init_spec: InitialStateSpec,
    initial: StateVector,
}

impl Ansatz {
    pub fn new(model: &ModelSpec, init: InitialStateSpec) -> Result<Self> {
        model.validate()?;
        let initial = init.build(model)?;
        Ok(Self { ham: model.hamiltonian(), init_spec: init, initial })
    }

    pub fn model(&self) -> &ModelSpec {
        self.ham.model()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.ham
    }

    pub fn init(&self) -> InitialStateSpec {
        self.init_spec
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    fn apply_layer(&self, state: &mut StateVector, layer: usize, angle: f64) {
        if layer.is_multiple_of(2) {
            state.rotate_x_all(angle);
        } else {
            state.apply_diagonal_phase(self.ham.zz_generator(), angle);
        }
    }

    /// `U(θ)|ψ⁰⟩`.
    pub fn prepare(&self, theta: &[f64]) -> StateVector {
        let mut state = self.initial.clone();
        for (layer, &angle) in theta.iter().enumerate() {
            self.apply_layer(&mut state, layer, angle);
        }
        state
    }

    /// `G|ψ⟩` for the generator of `layer`.
    fn apply_generator(&self, layer: usize, psi: &[Complex64], out: &mut [Complex64]) {
        if layer.is_multiple_of(2) {
            let n = self.model().n;
            for (b, o) in out.iter_mut().enumerate() {
                *o = (0..n).map(|site| psi[b ^ (1 << site)]).sum();
            }
        } else {
            for ((o, p), d) in out.iter_mut().zip(psi).zip(self.ham.zz_generator()) {
                *o = p * d;
            }
        }
    }

    /// Energy and its exact gradient by one forward and one reverse sweep.
    pub fn cost_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut psi = self.prepare(theta);
        let dim = psi.dim();
        let mut phi = vec![Complex64::new(0.0, 0.0); dim];
        self.ham.apply_raw(psi.amplitudes(), &mut phi);
        let energy = inner(psi.amplitudes(), &phi).re;
        let mut phi = StateVector::from_raw(self.model().n, phi);
        let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
        let mut grad = vec![0.0; theta.len()];
        for layer in (0..theta.len()).rev() {
            self.apply_generator(layer, psi.amplitudes(), &mut scratch);
            grad[layer] = 2.0 * inner(phi.amplitudes(), &scratch).im;
            self.apply_layer(&mut psi, layer, -theta[layer]);
            self.apply_layer(&mut phi, layer, -theta[layer]);
        }
        (energy, grad)
    }

    pub fn energy(&self, theta: &[f64]) -> f64 {
        let psi = self.prepare(theta);
        let mut scratch = vec![Complex64::new(0.0, 0.0); psi.dim()];
        self.ham.energy_raw(psi.amplitudes(), &mut scratch)
    }
}

/// How the starting angles of a run are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitScheme {
    /// `θ_j ~ U(−ε, ε)`.
    ZerosPerturbed { epsilon: f64 },
    /// `θ_j ~ U(low, high)`.
    Uniform { low: f64, high: f64 },
    /// Previous angles zero-padded to the new depth; only the padded
    /// entries receive `U(−ε, ε)` noise.
    WarmStart { theta: Vec<f64>, epsilon: f64 },
}

impl InitScheme {
    pub fn draw(&self, depth: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 2 * depth;
        match self {
            InitScheme::ZerosPerturbed { epsilon } => {
                Ok((0..len).map(|_| epsilon * (2.0 * rng.random::<f64>() - 1.0)).collect())
            }
            InitScheme::Uniform { low, high } => {
                if !(low < high) {
                    return invalid(format!("empty uniform range [{low}, {high})"));
                }
                Ok((0..len).map(|_| rng.random_range(*low..*high)).collect())
            }
            InitScheme::WarmStart { theta, epsilon } => {
                if theta.len() > len {
                    return invalid(format!("warm start has {} angles, depth {depth} needs {len}", theta.len()));
                }
                let mut out = theta.clone();
                while out.len() < len {
                    out.push(epsilon * (2.0 * rng.random::<f64>() - 1.0));
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub energy_tolerance: f64,
    pub seed: u64,
    pub init_scheme: InitScheme,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            gradient_tolerance: 1e-9,
            energy_tolerance: 1e-12,
            seed: 0,
            init_scheme: InitScheme::ZerosPerturbed { epsilon: 1e-2 },
        }
    }
}

impl VqeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_scheme(mut self, scheme: InitScheme) -> Self {
        self.init_scheme = scheme;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0 && self.energy_tolerance > 0.0) {
            return invalid("optimizer tolerances must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    pub model: ModelSpec,
    pub init: InitialStateSpec,
    pub initial_params: AnsatzParams,
    pub params: AnsatzParams,
    pub energy: f64,
    pub trace: Vec<(usize, f64)>,
    pub final_state: StateVector,
    pub seed: u64,
    pub converged: bool,
    pub gradient_norm: f64,
}

/// Runs one VQE optimization.
pub fn optimize(model: &ModelSpec, init: InitialStateSpec, depth: usize, config: &VqeConfig) -> Result<VqeResult> {
    if depth == 0 {
        return invalid("circuit depth must be at least 1");
    }
    config.validate()?;
    let ansatz = Ansatz::new(model, init)?;
    let theta0 = config.init_scheme.draw(depth, config.seed)?;
    Ok(optimize_from(&ansatz, theta0, config))
}

pub(crate) fn optimize_from(ansatz: &Ansatz, theta0: Vec<f64>, config: &VqeConfig) -> VqeResult {
    let options = LbfgsOptions {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
        energy_tolerance: config.energy_tolerance,
        ..Default::default()
    };
    let initial_params = AnsatzParams { depth: theta0.len() / 2, theta: theta0.clone() };
    let min = minimize(|x| ansatz.cost_and_gradient(x), theta0, &options);
    // A failed line search at the roundoff floor still counts when the
    // gradient is small.
    let converged = min.converged()
        || (min.reason == StopReason::LineSearchFailed && min.gradient_norm < config.gradient_tolerance.sqrt());
    let final_state = ansatz.prepare(&min.x);
    let energy = ansatz.energy(&min.x);
    VqeResult {
        model: *ansatz.model(),
        init: ansatz.init(),
        initial_params,
        params: AnsatzParams { depth: min.x.len() / 2, theta: min.x },
        energy,
        trace: min.trace,
        final_state,
        seed: config.seed,
        converged,
        gradient_norm: min.gradient_norm,
    }
}

/// Seed for the `index`-th independent run derived from a base seed
/// (SplitMix64 finalizer).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n_runs` independent optimizations with derived seeds, returned in
/// seed-index order regardless of completion order.
pub fn optimize_restarts(
    model: &ModelSpec,
    init: InitialStateSpec,
    depth: usize,
    config: &VqeConfig,
    n_runs: usize,
) -> Result<Vec<VqeResult>> {
    (0..n_runs as u64)
        .into_par_iter()
        .map(|i| optimize(model, init, depth, &config.clone().with_seed(derive_seed(config.seed, i))))
        .collect()
}

/// Lowest-energy run among `n_runs` restarts; ties go to the lower seed
/// index.
pub fn best_of_restarts(
    model: &ModelSpec,
    init: InitialStateSpec,
    depth: usize,
    config: &VqeConfig,
    n_runs: usize,
) -> Result<VqeResult> {
    if n_runs == 0 {
        return invalid("at least one run is required");
    }
    let runs = optimize_restarts(model, init, depth, config, n_runs)?;
    Ok(lowest(runs))
}

fn lowest(runs: Vec<VqeResult>) -> VqeResult {
    runs.into_iter().reduce(|best, r| if r.energy < best.energy { r } else { best }).expect("nonempty")
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub depth: usize,
    pub energy: f64,
    pub result: VqeResult,
}

/// Optimizes at each depth, warm-starting from the previous optimum padded
/// with zeros, alongside `fresh_starts` independent runs drawn from the
/// configured scheme; the lowest energy is kept. Reported energies never
/// increase with depth: if every run ends above the previous depth's
/// optimum, the padded previous angles (which realize that optimum
/// exactly) are reported instead.
pub fn depth_sweep(
    model: &ModelSpec,
    init: InitialStateSpec,
    depths: &[usize],
    config: &VqeConfig,
    fresh_starts: usize,
) -> Result<Vec<SweepPoint>> {
    if depths.is_empty() || depths[0] == 0 || depths.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("depths must be positive and strictly increasing");
    }
    config.validate()?;
    let ansatz = Ansatz::new(model, init)?;
    let epsilon = match config.init_scheme {
        InitScheme::ZerosPerturbed { epsilon } | InitScheme::WarmStart { epsilon, .. } => epsilon,
        InitScheme::Uniform { .. } => 1e-2,
    };
    let mut points: Vec<SweepPoint> = Vec::with_capacity(depths.len());
    for (i, &depth) in depths.iter().enumerate() {
        let seed = derive_seed(config.seed, i as u64);
        let theta0 = match points.last() {
            None => config.init_scheme.draw(depth, seed)?,
            Some(prev) => InitScheme::WarmStart { theta: prev.result.params.theta.clone(), epsilon }.draw(depth, seed)?,
        };
        let mut candidates = vec![optimize_from(&ansatz, theta0, &config.clone().with_seed(seed))];
        {
            let fresh = (0..fresh_starts as u64)
                .into_par_iter()
                .map(|r| {
                    let run_seed = derive_seed(seed, r + 1);
                    let theta0 = config.init_scheme.draw(depth, run_seed)?;
                    Ok(optimize_from(&ansatz, theta0, &config.clone().with_seed(run_seed)))
                })
                .collect::<Result<Vec<_>>>()?;
            candidates.extend(fresh);
        }
        let mut result = lowest(candidates);
        if let Some(prev) = points.last() {
            if result.energy > prev.energy {
                let mut theta = prev.result.params.theta.clone();
                theta.resize(2 * depth, 0.0);
                result.final_state = ansatz.prepare(&theta);
                result.energy = ansatz.energy(&theta);
                result.params = AnsatzParams { depth, theta };
            }
        }
        points.push(SweepPoint { depth, energy: result.energy, result });
    }
    Ok(points)
}
