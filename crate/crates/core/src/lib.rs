//! Symmetry-guided variational preparation of quasiparticle Wannier states
//! in the transverse-field Ising ring, with an exact-diagonalization oracle.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod hamiltonian;
pub mod optimizer;
pub mod quadrature;
pub mod state;
pub mod vqe;

pub use analysis::{
    band_scalars, dispersion_from_wannier, magnetization_profile, momentum_decompose, phase_statistics_experiment,
    post_select, weight_and_phases, BandReport, MomentumDecomposition, MomentumKind, PhaseStatistics,
    WeightAndPhases,
};
pub use error::{Error, Result};
pub use exact::{full_labeled_spectrum, BandKind, ExactWeights, LabeledSpectrum};
pub use hamiltonian::{thermodynamic_band_integrals, BandIntegrals, Hamiltonian, ModelSpec};
pub use state::{Layer, LocalKet, StateVector, Symmetry};
pub use vqe::{optimize, AnsatzParams, InitScheme, InitialStateSpec, VqeConfig, VqeResult, WallSign};
