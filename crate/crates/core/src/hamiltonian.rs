//! Plain and twisted transverse-field Ising chains,
//! `H = −Σ_i J_i Z_i Z_{i+1} − h Σ_i X_i` on a ring.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{inconsistent, invalid, Result};
use crate::quadrature;
use crate::state::{inner, zz_diagonal, StateVector, MAX_SITES};

/// Chain length and couplings. The twisted model flips the sign of the
/// bond between sites `N` and `1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n: usize,
    pub j: f64,
    pub h: f64,
    pub twisted: bool,
}

impl ModelSpec {
    pub fn plain(n: usize, j: f64, h: f64) -> Result<Self> {
        Self::new(n, j, h, false)
    }

    pub fn twisted(n: usize, j: f64, h: f64) -> Result<Self> {
        Self::new(n, j, h, true)
    }

    pub fn new(n: usize, j: f64, h: f64, twisted: bool) -> Result<Self> {
        let model = Self { n, j, h, twisted };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=MAX_SITES).contains(&self.n) {
            return invalid(format!("chain length must be in 3..={MAX_SITES}, got {}", self.n));
        }
        if !(self.j.is_finite() && self.h.is_finite()) || self.j < 0.0 || self.h < 0.0 {
            return invalid(format!("couplings must be finite and non-negative (J={}, h={})", self.j, self.h));
        }
        Ok(())
    }

    /// Sign of `J_i / J` for bonds `1..=N`.
    pub fn bond_signs(&self) -> Vec<i8> {
        let mut signs = vec![1i8; self.n];
        if self.twisted {
            signs[self.n - 1] = -1;
        }
        signs
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Period of the relevant translation (`N` plain, `2N` twisted).
    pub fn momentum_period(&self) -> usize {
        if self.twisted {
            2 * self.n
        } else {
            self.n
        }
    }

    /// Crystal momentum for a label: `2πn/N` plain, `πm/N` twisted.
    pub fn momentum(&self, index: usize) -> f64 {
        2.0 * PI * index as f64 / self.momentum_period() as f64
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        Hamiltonian::new(*self)
    }
}

/// Matrix-free Hamiltonian with its Ising diagonal cached.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    model: ModelSpec,
    /// `Σ_i s_i z_i z_{i+1}` per basis index.
    zz: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(model: ModelSpec) -> Self {
        let zz = zz_diagonal(model.n, &model.bond_signs()).expect("validated model");
        Self { model, zz }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Ising generator diagonal `Σ_i s_i z_i z_{i+1}`.
    pub fn zz_generator(&self) -> &[f64] {
        &self.zz
    }

    fn check_dim(&self, state: &StateVector) -> Result<()> {
        if state.n_sites() != self.model.n {
            return invalid(format!(
                "state has {} sites, model has {}",
                state.n_sites(),
                self.model.n
            ));
        }
        Ok(())
    }

    /// `H|ψ⟩` on raw amplitudes, written into `out`.
    pub(crate) fn apply_raw(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let ModelSpec { n, j, h, .. } = self.model;
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = psi[b] * (-j * self.zz[b]);
            if h != 0.0 {
                let mut flips = Complex64::new(0.0, 0.0);
                for site in 0..n {
                    flips += psi[b ^ (1 << site)];
                }
                acc -= flips * h;
            }
            *o = acc;
        }
    }

    /// `H|ψ⟩`, not normalized.
    pub fn apply(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        self.check_dim(state)?;
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        self.apply_raw(state.amplitudes(), &mut out);
        Ok(out)
    }

    /// `⟨a|H|b⟩`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Result<Complex64> {
        self.check_dim(a)?;
        let hb = self.apply(b)?;
        Ok(inner(a.amplitudes(), &hb))
    }

    /// `⟨ψ|H|ψ⟩` for a normalized state.
    pub fn energy(&self, state: &StateVector) -> Result<f64> {
        let e = self.matrix_element(state, state)?;
        debug_assert!(e.im.abs() < 1e-10, "imaginary energy residual {}", e.im);
        if e.im.abs() > 1e-8 {
            return inconsistent(format!("energy has imaginary residual {:.3e}", e.im));
        }
        Ok(e.re)
    }

    pub(crate) fn energy_raw(&self, psi: &[Complex64], scratch: &mut [Complex64]) -> f64 {
        self.apply_raw(psi, scratch);
        inner(psi, scratch).re
    }

    /// Dense real-symmetric matrix in the computational basis.
    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let ModelSpec { n, j, h, .. } = self.model;
        let dim = self.model.dim();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for b in 0..dim {
            m[(b, b)] = -j * self.zz[b];
            for site in 0..n {
                m[(b ^ (1 << site), b)] -= h;
            }
        }
        m
    }
}

/// Band-averaged gap and bandwidth of the magnon band in the infinite chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandIntegrals {
    pub avg_gap: f64,
    pub bandwidth: f64,
}

/// Magnon excitation energy `2√(h² + J² − 2Jh cos k)` of the infinite chain.
pub fn magnon_energy(j: f64, h: f64, k: f64) -> f64 {
    let s = (0.5 * k).sin();
    2.0 * ((h - j).powi(2) + 4.0 * j * h * s * s).sqrt()
}

/// `avg_gap = (1/π)∫₀^π ε(k) dk` and `bandwidth = −(1/π)∫₀^π ε(k) cos k dk`.
pub fn thermodynamic_band_integrals(j: f64, h: f64) -> Result<BandIntegrals> {
    if !(j >= 0.0 && h >= 0.0) || (j == 0.0 && h == 0.0) || !(j.is_finite() && h.is_finite()) {
        return invalid(format!("need J, h ≥ 0 and not both zero (J={j}, h={h})"));
    }
    let tol = 1e-12;
    let avg_gap = quadrature::integrate(|k| magnon_energy(j, h, k), 0.0, PI, tol) / PI;
    let bandwidth = -quadrature::integrate(|k| magnon_energy(j, h, k) * k.cos(), 0.0, PI, tol) / PI;
    Ok(BandIntegrals { avg_gap, bandwidth })
}
