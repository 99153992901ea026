//! Exact diagonalization with simultaneous momentum and parity labels.
//!
//! The Hilbert space is split into joint eigenspaces of translation (plain
//! or twisted) and parity, built from projected basis-state orbits, and the
//! Hamiltonian is diagonalized inside each block. Every eigenvector is
//! therefore symmetry-pure by construction. Band states are gauge-fixed so
//! their overlap with the bare reference excitation is real and positive.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{inconsistent, invalid, Error, Result};
use crate::hamiltonian::ModelSpec;
use crate::state::{inner, LocalKet, StateVector, Symmetry};

/// Dense diagonalization bound.
pub const MAX_DENSE_SITES: usize = 14;

const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpectrumEntry {
    pub energy: f64,
    /// `n` in `k = 2πn/N` (plain) or `m` in `k̃ = πm/N` (twisted).
    pub momentum_index: usize,
    pub parity: i8,
    pub eigenvector: StateVector,
}

#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub model: ModelSpec,
    /// Sorted by energy, then momentum index, then parity.
    pub entries: Vec<SpectrumEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandKind {
    /// Lowest parity-odd state in each momentum sector of the plain chain.
    Magnon,
    /// Lowest state in each twisted-momentum sector.
    Soliton,
    /// Global ground state only.
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// Indexed by momentum label; empty for [`BandKind::Ground`].
    pub energies: Vec<f64>,
    /// Positions of the band states in [`LabeledSpectrum::entries`].
    pub entry_indices: Vec<usize>,
    pub ground_energy: f64,
}

impl Band {
    pub fn mean(&self) -> f64 {
        self.energies.iter().sum::<f64>() / self.energies.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactWeights {
    pub z_k: Vec<f64>,
    pub z_x_max: f64,
}

/// Bare magnon momentum state `(1/√N) Σ_x e^{-ikx} |−⟩_x ⊗ |+⟩_rest`.
pub fn bare_magnon(n: usize, index: usize) -> Result<StateVector> {
    let k = 2.0 * PI * index as f64 / n as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); 1 << n];
    for x in 1..=n {
        let flip = StateVector::spin_flip(n, x)?;
        let phase = Complex64::from_polar(1.0, -k * x as f64);
        for (a, f) in acc.iter_mut().zip(flip.amplitudes()) {
            *a += phase * f;
        }
    }
    StateVector::from_amplitudes(n, acc)
}

/// Bare domain wall `T̃^step |↑…↑⟩`; `step < N` gives `σ = +` at bond `step`,
/// `step ≥ N` gives `σ = −` at bond `step − N`.
pub fn domain_wall(n: usize, step: usize) -> Result<StateVector> {
    let mut s = StateVector::uniform(n, LocalKet::Up)?;
    s.apply_symmetry(Symmetry::TwistedTranslate, step as i64);
    Ok(s)
}

/// Bare soliton momentum state `(1/√2N) Σ_{s=1}^{2N} e^{-ik̃s} T̃^s |↑…↑⟩`.
pub fn bare_soliton(n: usize, index: usize) -> Result<StateVector> {
    let k = PI * index as f64 / n as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); 1 << n];
    let mut s = StateVector::uniform(n, LocalKet::Up)?;
    for step in 1..=2 * n {
        s.apply_symmetry(Symmetry::TwistedTranslate, 1);
        let phase = Complex64::from_polar(1.0, -k * step as f64);
        for (a, f) in acc.iter_mut().zip(s.amplitudes()) {
            *a += phase * f;
        }
    }
    StateVector::from_amplitudes(n, acc)
}

/// Group element `T^s P^q` (plain) or `T̃^s` (twisted, `q = 0`).
#[derive(Clone, Copy)]
struct Element {
    shift: usize,
    flip: bool,
}

fn group_elements(model: &ModelSpec) -> Vec<Element> {
    let period = model.momentum_period();
    let flips: &[bool] = if model.twisted { &[false] } else { &[false, true] };
    flips
        .iter()
        .flat_map(|&flip| (0..period).map(move |shift| Element { shift, flip }))
        .collect()
}

/// Images of basis index `b` under every group element, in element order.
fn orbit_images(model: &ModelSpec, elements: &[Element], b: usize) -> Vec<usize> {
    let n = model.n;
    let translation = if model.twisted { Symmetry::TwistedTranslate } else { Symmetry::Translate };
    elements
        .iter()
        .map(|e| {
            let mut x = if e.flip { Symmetry::Parity.map_basis(n, b) } else { b };
            for _ in 0..e.shift {
                x = translation.map_basis(n, x);
            }
            x
        })
        .collect()
}

/// Sparse orthonormal basis of the sector where the translation has
/// eigenvalue `e^{ik}` and parity is `parity`: one projected basis state per
/// orbit, skipping orbits the projector annihilates.
fn sector_basis(
    model: &ModelSpec,
    elements: &[Element],
    orbits: &[Vec<usize>],
    label: usize,
    parity: i8,
) -> Vec<Vec<(usize, Complex64)>> {
    let k = model.momentum(label);
    let characters: Vec<Complex64> = elements
        .iter()
        .map(|e| {
            let p = if e.flip { f64::from(parity) } else { 1.0 };
            Complex64::from_polar(p, -k * e.shift as f64)
        })
        .collect();
    orbits
        .iter()
        .filter_map(|images| {
            let mut terms: Vec<(usize, Complex64)> = Vec::new();
            for (&x, &chi) in images.iter().zip(&characters) {
                match terms.iter_mut().find(|(y, _)| *y == x) {
                    Some((_, a)) => *a += chi,
                    None => terms.push((x, chi)),
                }
            }
            terms.retain(|(_, a)| a.norm() > 1e-9);
            let norm = terms.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-9).then(|| {
                terms.sort_by_key(|t| t.0);
                terms.into_iter().map(|(x, a)| (x, a / norm)).collect()
            })
        })
        .collect()
}

fn symmetry_residual(v: &StateVector, op: Symmetry, eigenvalue: Complex64) -> f64 {
    let t = v.transformed(op, 1);
    t.amplitudes()
        .iter()
        .zip(v.amplitudes())
        .map(|(a, b)| (a - eigenvalue * b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Multiplies `v` by a phase so that `⟨reference|v⟩` is real positive, or,
/// when that overlap vanishes, so the largest amplitude is real positive.
fn fix_gauge(v: &mut StateVector, reference: Option<&StateVector>) {
    let overlap = reference.map(|r| inner(r.amplitudes(), v.amplitudes()));
    let anchor = match overlap {
        Some(z) if z.norm() > 1e-8 => z,
        _ => {
            let amps = v.amplitudes();
            let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
            *amps.iter().find(|a| a.norm() > max * (1.0 - 1e-9)).expect("nonzero vector")
        }
    };
    let rot = anchor.conj() / anchor.norm();
    v.amplitudes_mut().iter_mut().for_each(|a| *a *= rot);
}

/// Diagonalizes the Hamiltonian sector by sector and labels every
/// eigenvector with its momentum and parity.
pub fn full_labeled_spectrum(model: &ModelSpec) -> Result<LabeledSpectrum> {
    model.validate()?;
    let n = model.n;
    if n > MAX_DENSE_SITES {
        return Err(Error::Capability(format!(
            "dense diagonalization limited to {MAX_DENSE_SITES} sites, got {n}"
        )));
    }
    let ham = model.hamiltonian();
    let dim = model.dim();
    let translation = if model.twisted { Symmetry::TwistedTranslate } else { Symmetry::Translate };
    let period = model.momentum_period();

    let elements = group_elements(model);
    let mut seen = vec![false; dim];
    let mut orbits = Vec::new();
    for b in 0..dim {
        if !seen[b] {
            let images = orbit_images(model, &elements, b);
            images.iter().for_each(|&x| seen[x] = true);
            orbits.push(images);
        }
    }

    let sectors: Vec<(usize, i8)> = (0..period)
        .flat_map(|m| {
            let parities: Vec<i8> = if model.twisted {
                vec![if m % 2 == 0 { 1 } else { -1 }]
            } else {
                vec![1, -1]
            };
            parities.into_iter().map(move |p| (m, p))
        })
        .collect();

    let mut entries = Vec::with_capacity(dim);
    let mut h_column = vec![Complex64::new(0.0, 0.0); dim];
    for (label, parity) in sectors {
        let basis = sector_basis(model, &elements, &orbits, label, parity);
        if basis.is_empty() {
            continue;
        }
        let d = basis.len();
        let mut block = DMatrix::<Complex64>::zeros(d, d);
        let mut dense = vec![Complex64::new(0.0, 0.0); dim];
        for (j, bj) in basis.iter().enumerate() {
            dense.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
            bj.iter().for_each(|&(x, a)| dense[x] = a);
            ham.apply_raw(&dense, &mut h_column);
            for (i, bi) in basis.iter().enumerate() {
                block[(i, j)] = bi.iter().map(|&(x, a)| a.conj() * h_column[x]).sum();
            }
        }
        let block = (&block + block.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(block);
        for c in 0..d {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            for (bi, coeff) in basis.iter().zip(eig.eigenvectors.column(c).iter()) {
                bi.iter().for_each(|&(x, a)| amps[x] += coeff * a);
            }
            let v = StateVector::from_amplitudes(n, amps)?;
            let energy = ham.energy(&v)?;
            entries.push(SpectrumEntry { energy, momentum_index: label, parity, eigenvector: v });
        }
    }
    if entries.len() != dim {
        return inconsistent(format!("sectors hold {} states, expected {dim}", entries.len()));
    }

    for e in &entries {
        let k = model.momentum(e.momentum_index);
        let r = symmetry_residual(&e.eigenvector, translation, Complex64::from_polar(1.0, k));
        let rp = symmetry_residual(&e.eigenvector, Symmetry::Parity, Complex64::new(f64::from(e.parity), 0.0));
        if r > SYMMETRY_TOL || rp > SYMMETRY_TOL {
            return inconsistent(format!(
                "eigenvector at E={:.12} label {} has symmetry residuals {r:.2e}/{rp:.2e}",
                e.energy, e.momentum_index
            ));
        }
    }

    entries.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.momentum_index.cmp(&b.momentum_index))
            .then(b.parity.cmp(&a.parity))
    });

    let mut spectrum = LabeledSpectrum { model: *model, entries };
    let band_kind = if model.twisted { BandKind::Soliton } else { BandKind::Magnon };
    let band_slots: Vec<Option<usize>> = (0..period).map(|m| spectrum.lowest_in_sector(band_kind, m)).collect();
    for (idx, entry) in spectrum.entries.iter_mut().enumerate() {
        let reference = match band_slots.iter().position(|&s| s == Some(idx)) {
            Some(m) if model.twisted => Some(bare_soliton(n, m)?),
            Some(m) => Some(bare_magnon(n, m)?),
            None => None,
        };
        fix_gauge(&mut entry.eigenvector, reference.as_ref());
    }
    Ok(spectrum)
}

impl LabeledSpectrum {
    fn lowest_in_sector(&self, kind: BandKind, momentum: usize) -> Option<usize> {
        self.entries.iter().position(|e| {
            e.momentum_index == momentum
                && match kind {
                    BandKind::Magnon => e.parity == -1,
                    _ => true,
                }
        })
    }

    /// Picks out the magnon band, soliton band, or just the ground energy.
    pub fn band(&self, kind: BandKind) -> Result<Band> {
        let ground_energy = self
            .entries
            .first()
            .map(|e| e.energy)
            .ok_or_else(|| Error::Consistency("empty spectrum".into()))?;
        let period = match kind {
            BandKind::Magnon if self.model.twisted => {
                return invalid("magnon band requires the plain model");
            }
            BandKind::Soliton if !self.model.twisted => {
                return invalid("soliton band requires the twisted model");
            }
            BandKind::Ground => 0,
            _ => self.model.momentum_period(),
        };
        let mut energies = Vec::with_capacity(period);
        let mut entry_indices = Vec::with_capacity(period);
        for m in 0..period {
            let idx = self
                .lowest_in_sector(kind, m)
                .ok_or_else(|| Error::Consistency(format!("no state in sector {m} for {kind:?}")))?;
            energies.push(self.entries[idx].energy);
            entry_indices.push(idx);
        }
        Ok(Band { energies, entry_indices, ground_energy })
    }

    /// Magnon-band eigenvector for momentum `index`.
    pub fn band_state(&self, kind: BandKind, index: usize) -> Result<&StateVector> {
        let idx = self
            .lowest_in_sector(kind, index)
            .ok_or_else(|| Error::Consistency(format!("no state in sector {index}")))?;
        Ok(&self.entries[idx].eigenvector)
    }

    pub fn ground_energy(&self) -> f64 {
        self.entries[0].energy
    }

    /// Lowest energy with the given quantum numbers.
    pub fn sector_minimum(&self, momentum: usize, parity: i8) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.momentum_index == momentum && e.parity == parity)
            .map(|e| e.energy)
    }

    /// Bare-state overlaps `Z_k` of the magnon band and the maximal
    /// Wannier weight `((1/N) Σ_k √Z_k)²`.
    pub fn exact_weights(&self) -> Result<ExactWeights> {
        let band = self.band(BandKind::Magnon)?;
        let n = self.model.n;
        let z_k = band
            .entry_indices
            .iter()
            .enumerate()
            .map(|(m, &idx)| {
                let bare = bare_magnon(n, m)?;
                bare.fidelity(&self.entries[idx].eigenvector)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean_root = z_k.iter().map(|z| z.sqrt()).sum::<f64>() / n as f64;
        Ok(ExactWeights { z_k, z_x_max: mean_root * mean_root })
    }
}
