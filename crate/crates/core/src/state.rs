//! Dense statevector over `N` spin-1/2 sites.
//!
//! Basis convention, fixed for the whole crate: site `i` (1-based) is bit
//! `i - 1` of the basis index, and a cleared bit is `|↑⟩` (Z = +1) while a
//! set bit is `|↓⟩` (Z = -1).
//!
//! Translation moves the configuration one site to the right,
//! `T|s_1 … s_N⟩ = |s_N s_1 … s_{N-1}⟩`, so a spin flip at `x` is carried
//! to `x + 1`. The twisted translation is `T̃ = T X_N` (flip site `N`, then
//! shift).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest chain the statevector supports.
pub const MAX_SITES: usize = 16;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Single-site kets accepted by [`StateVector::product`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalKet {
    Up,
    Down,
    Plus,
    Minus,
}

impl LocalKet {
    /// Amplitudes `(⟨↑|ket⟩, ⟨↓|ket⟩)`.
    fn amplitudes(self) -> (f64, f64) {
        match self {
            LocalKet::Up => (1.0, 0.0),
            LocalKet::Down => (0.0, 1.0),
            LocalKet::Plus => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            LocalKet::Minus => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        }
    }
}

/// One of the two alternating ansatz layers.
#[derive(Debug, Clone, Copy)]
pub enum Layer<'a> {
    /// `exp(-iθ Σ_i X_i)`.
    XField,
    /// `exp(-iθ Σ_i s_i Z_i Z_{i+1})` with periodic bonds and per-bond signs.
    ZzBonds(&'a [i8]),
}

/// Symmetry operators of the plain and twisted chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    Translate,
    Parity,
    TwistedTranslate,
}

impl Symmetry {
    /// Order of the operator on an `n`-site chain.
    pub fn period(self, n: usize) -> usize {
        match self {
            Symmetry::Translate => n,
            Symmetry::Parity => 2,
            Symmetry::TwistedTranslate => 2 * n,
        }
    }

    /// Image of computational basis index `b` under one application.
    pub(crate) fn map_basis(self, n: usize, b: usize) -> usize {
        match self {
            Symmetry::Translate => rotl(b, 1, n),
            Symmetry::Parity => b ^ ((1usize << n) - 1),
            Symmetry::TwistedTranslate => rotl(b ^ (1usize << (n - 1)), 1, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return invalid(format!("number of sites must be in 1..={MAX_SITES}, got {n}"));
    }
    Ok(())
}

impl StateVector {
    /// Tensor product of single-site kets, `kets[0]` on site 1.
    pub fn product(n: usize, kets: &[LocalKet]) -> Result<Self> {
        check_sites(n)?;
        if kets.len() != n {
            return invalid(format!("expected {n} local kets, got {}", kets.len()));
        }
        let dim = 1usize << n;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0); dim];
        for (site, ket) in kets.iter().enumerate() {
            let (up, down) = ket.amplitudes();
            let mask = 1usize << site;
            for (b, a) in amplitudes.iter_mut().enumerate() {
                *a *= if b & mask == 0 { up } else { down };
            }
        }
        Ok(Self { n_sites: n, amplitudes })
    }

    /// Uniform product state, e.g. `|+⟩^N`.
    pub fn uniform(n: usize, ket: LocalKet) -> Result<Self> {
        Self::product(n, &vec![ket; n])
    }

    /// `|−⟩` at `site` (1-based) on a `|+⟩` background.
    pub fn spin_flip(n: usize, site: usize) -> Result<Self> {
        if site == 0 || site > n {
            return invalid(format!("spin-flip site {site} outside 1..={n}"));
        }
        let mut kets = vec![LocalKet::Plus; n];
        kets[site - 1] = LocalKet::Minus;
        Self::product(n, &kets)
    }

    /// Computational basis state with the given index.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_sites(n)?;
        if index >= 1 << n {
            return invalid(format!("basis index {index} out of range for {n} sites"));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_sites: n, amplitudes })
    }

    /// Wraps raw amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_sites(n)?;
        if amplitudes.len() != 1 << n {
            return invalid(format!(
                "expected {} amplitudes for {n} sites, got {}",
                1usize << n,
                amplitudes.len()
            ));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return invalid("amplitudes have zero or non-finite norm");
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_sites: n, amplitudes })
    }

    /// Haar-ish random state from i.i.d. Gaussian-like amplitudes.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_sites(n)?;
        let amplitudes = (0..1usize << n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        Self::from_amplitudes(n, amplitudes)
    }

    /// Wraps amplitudes without normalizing (intermediate vectors such as `H|ψ⟩`).
    pub(crate) fn from_raw(n_sites: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_sites);
        Self { n_sites, amplitudes }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_sites != other.n_sites {
            return invalid(format!(
                "inner product of {}-site and {}-site states",
                self.n_sites, other.n_sites
            ));
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        self.inner(other).map(|z| z.norm_sqr())
    }

    /// Applies one ansatz layer in place.
    pub fn apply_layer(&mut self, layer: Layer<'_>, angle: f64) -> Result<()> {
        match layer {
            Layer::XField => self.rotate_x_all(angle),
            Layer::ZzBonds(signs) => {
                let diag = zz_diagonal(self.n_sites, signs)?;
                self.apply_diagonal_phase(&diag, angle);
            }
        }
        Ok(())
    }

    /// `R_X(θ) = cos θ·I − i sin θ·X` on every site.
    pub(crate) fn rotate_x_all(&mut self, angle: f64) {
        let (s, c) = angle.sin_cos();
        let mis = Complex64::new(0.0, -s);
        for site in 0..self.n_sites {
            let mask = 1usize << site;
            for b in 0..self.amplitudes.len() {
                if b & mask == 0 {
                    let a0 = self.amplitudes[b];
                    let a1 = self.amplitudes[b | mask];
                    self.amplitudes[b] = a0 * c + a1 * mis;
                    self.amplitudes[b | mask] = a0 * mis + a1 * c;
                }
            }
        }
    }

    /// Multiplies amplitude `b` by `exp(-iθ diag[b])`.
    pub(crate) fn apply_diagonal_phase(&mut self, diag: &[f64], angle: f64) {
        for (a, &d) in self.amplitudes.iter_mut().zip(diag) {
            *a *= Complex64::from_polar(1.0, -angle * d);
        }
    }

    /// Applies `op^power`; negative powers apply the inverse.
    pub fn apply_symmetry(&mut self, op: Symmetry, power: i64) {
        let period = op.period(self.n_sites) as i64;
        let steps = power.rem_euclid(period) as usize;
        match op {
            Symmetry::Translate => {
                if steps > 0 {
                    self.amplitudes = permuted(&self.amplitudes, |b| rotl(b, steps, self.n_sites));
                }
            }
            Symmetry::Parity => {
                if steps == 1 {
                    let full = self.amplitudes.len() - 1;
                    self.amplitudes = permuted(&self.amplitudes, |b| b ^ full);
                }
            }
            Symmetry::TwistedTranslate => {
                let last = 1usize << (self.n_sites - 1);
                for _ in 0..steps {
                    self.amplitudes =
                        permuted(&self.amplitudes, |b| rotl(b ^ last, 1, self.n_sites));
                }
            }
        }
    }

    /// Functional form of [`StateVector::apply_symmetry`].
    pub fn transformed(&self, op: Symmetry, power: i64) -> StateVector {
        let mut out = self.clone();
        out.apply_symmetry(op, power);
        out
    }

    /// `⟨X_site⟩` with `site` 1-based.
    pub fn site_x_expectation(&self, site: usize) -> Result<f64> {
        if site == 0 || site > self.n_sites {
            return invalid(format!("site {site} outside 1..={}", self.n_sites));
        }
        let mask = 1usize << (site - 1);
        let mut acc = 0.0;
        for b in 0..self.amplitudes.len() {
            if b & mask == 0 {
                acc += (self.amplitudes[b].conj() * self.amplitudes[b | mask]).re;
            }
        }
        Ok(2.0 * acc)
    }

    /// `⟨P⟩` for the global spin flip `P = Π X_i`.
    pub fn parity_expectation(&self) -> f64 {
        let flipped = self.transformed(Symmetry::Parity, 1);
        inner(&self.amplitudes, &flipped.amplitudes).re
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Rotates the low `n` bits of `b` left by `k`.
fn rotl(b: usize, k: usize, n: usize) -> usize {
    let mask = (1usize << n) - 1;
    ((b << k) | (b >> (n - k))) & mask
}

/// New vector `out` with `out[f(b)] = v[b]`; `f` must be a bijection.
fn permuted(v: &[Complex64], f: impl Fn(usize) -> usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (b, &a) in v.iter().enumerate() {
        out[f(b)] = a;
    }
    out
}

/// `Σ_i s_i z_i z_{i+1}` for every basis index (periodic bonds, bond `i`
/// joins sites `i` and `i + 1`).
pub fn zz_diagonal(n: usize, signs: &[i8]) -> Result<Vec<f64>> {
    check_sites(n)?;
    if signs.len() != n {
        return invalid(format!("expected {n} bond signs, got {}", signs.len()));
    }
    if let Some(bad) = signs.iter().find(|s| s.abs() != 1) {
        return invalid(format!("bond sign {bad} is not ±1"));
    }
    Ok((0..1usize << n)
        .map(|b| {
            (0..n)
                .map(|i| {
                    let j = (i + 1) % n;
                    let aligned = ((b >> i) & 1) == ((b >> j) & 1);
                    let zz = if aligned { 1.0 } else { -1.0 };
                    f64::from(signs[i]) * zz
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn product_state_examples() {
        let s = StateVector::product(1, &[LocalKet::Up]).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);

        let s = StateVector::product(2, &[LocalKet::Plus, LocalKet::Plus]).unwrap();
        for a in s.amplitudes() {
            assert!(close(*a, Complex64::new(0.5, 0.0), 1e-15));
        }

        // Explicit Kronecker product: site 1 carries |−⟩, so the sign flips with bit 0.
        let s = StateVector::product(3, &[LocalKet::Minus, LocalKet::Plus, LocalKet::Plus]).unwrap();
        let amp = 1.0 / 8f64.sqrt();
        for (b, a) in s.amplitudes().iter().enumerate() {
            let expect = if b & 1 == 0 { amp } else { -amp };
            assert!(close(*a, Complex64::new(expect, 0.0), 1e-15), "index {b}");
        }
    }

    #[test]
    fn product_state_length_mismatch() {
        assert!(matches!(
            StateVector::product(3, &[LocalKet::Up]),
            Err(crate::Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn layer_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = StateVector::random(4, &mut rng).unwrap();
        let mut t = s.clone();
        t.apply_layer(Layer::XField, 0.0).unwrap();
        assert_eq!(s, t);

        let theta = 0.37;
        let mut up = StateVector::uniform(3, LocalKet::Up).unwrap();
        up.apply_layer(Layer::ZzBonds(&[1, 1, 1]), theta).unwrap();
        assert!(close(up.amplitudes()[0], Complex64::from_polar(1.0, -3.0 * theta), 1e-14));

        let plus = StateVector::uniform(3, LocalKet::Plus).unwrap();
        let mut rotated = plus.clone();
        rotated.apply_layer(Layer::XField, PI / 2.0).unwrap();
        let phase = Complex64::new(0.0, -1.0).powi(3);
        for (a, b) in rotated.amplitudes().iter().zip(plus.amplitudes()) {
            assert!(close(*a, phase * b, 1e-14));
        }
    }

    #[test]
    fn bad_bond_signs_rejected() {
        let mut s = StateVector::uniform(3, LocalKet::Up).unwrap();
        assert!(s.apply_layer(Layer::ZzBonds(&[1, 2, 1]), 0.1).is_err());
        assert!(s.apply_layer(Layer::ZzBonds(&[1, 1]), 0.1).is_err());
    }

    #[test]
    fn translation_moves_spin_flip_right() {
        let n = 5;
        for x in 1..=n {
            let moved = StateVector::spin_flip(n, x).unwrap().transformed(Symmetry::Translate, 1);
            let expect = StateVector::spin_flip(n, x % n + 1).unwrap();
            assert!((moved.fidelity(&expect).unwrap() - 1.0).abs() < 1e-14);
            // Exact equality, not just up to phase.
            assert!(close(moved.inner(&expect).unwrap(), Complex64::new(1.0, 0.0), 1e-14));
        }
    }

    #[test]
    fn symmetry_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 5;
        let s = StateVector::random(n, &mut rng).unwrap();
        assert_eq!(s.transformed(Symmetry::Parity, 2), s);
        assert_eq!(s.transformed(Symmetry::Translate, n as i64), s);

        let up = StateVector::uniform(n, LocalKet::Up).unwrap();
        let mut t = up.clone();
        for _ in 0..2 * n {
            t.apply_symmetry(Symmetry::TwistedTranslate, 1);
        }
        assert!(close(t.inner(&up).unwrap(), Complex64::new(1.0, 0.0), 1e-14));

        // T̃^N = P
        let mut t = s.clone();
        for _ in 0..n {
            t.apply_symmetry(Symmetry::TwistedTranslate, 1);
        }
        assert!(close(t.inner(&s.transformed(Symmetry::Parity, 1)).unwrap(), Complex64::new(1.0, 0.0), 1e-12));

        // negative powers invert
        for op in [Symmetry::Translate, Symmetry::TwistedTranslate, Symmetry::Parity] {
            let back = s.transformed(op, 3).transformed(op, -3);
            assert_eq!(back, s);
        }
    }

    #[test]
    fn inner_product_examples() {
        let up = StateVector::uniform(2, LocalKet::Up).unwrap();
        let down = StateVector::uniform(2, LocalKet::Down).unwrap();
        assert_eq!(up.inner(&down).unwrap(), Complex64::new(0.0, 0.0));
        let plus = StateVector::uniform(1, LocalKet::Plus).unwrap();
        let up1 = StateVector::uniform(1, LocalKet::Up).unwrap();
        assert!(close(plus.inner(&up1).unwrap(), Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(up.inner(&plus).is_err());
    }

    #[test]
    fn x_expectation_examples() {
        let plus = StateVector::uniform(3, LocalKet::Plus).unwrap();
        assert!((plus.site_x_expectation(2).unwrap() - 1.0).abs() < 1e-14);
        let flip = StateVector::spin_flip(3, 1).unwrap();
        assert!((flip.site_x_expectation(1).unwrap() + 1.0).abs() < 1e-14);
        let up = StateVector::uniform(3, LocalKet::Up).unwrap();
        assert!(up.site_x_expectation(1).unwrap().abs() < 1e-14);
        assert!(up.site_x_expectation(0).is_err());
        assert!(up.site_x_expectation(4).is_err());
    }

    #[test]
    fn parity_of_spin_flip_is_odd() {
        let s = StateVector::spin_flip(5, 3).unwrap();
        assert!((s.parity_expectation() + 1.0).abs() < 1e-14);
    }
}
