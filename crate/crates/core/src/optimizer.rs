//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Single-threaded and free of hidden state, so identical inputs give
//! bitwise-identical iterates.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub energy_tolerance: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { memory: 12, max_iterations: 5000, gradient_tolerance: 1e-9, energy_tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    EnergyTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    /// `(iteration, value)` for the starting point and every accepted step.
    pub trace: Vec<(usize, f64)>,
    pub iterations: usize,
    pub reason: StopReason,
}

impl Minimum {
    pub fn converged(&self) -> bool {
        matches!(self.reason, StopReason::GradientTolerance | StopReason::EnergyTolerance)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
    gradient: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Minimizer of the cubic through two points with values and slopes,
/// safeguarded to the interior of `[lo, hi]`.
fn cubic_step(a: &Probe, b: &Probe) -> f64 {
    let d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    let (lo, hi) = if a.alpha < b.alpha { (a.alpha, b.alpha) } else { (b.alpha, a.alpha) };
    let bisect = 0.5 * (lo + hi);
    if disc < 0.0 {
        return bisect;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    let margin = 0.1 * (hi - lo);
    if t.is_finite() && t > lo + margin && t < hi - margin {
        t
    } else {
        bisect
    }
}

fn line_search<F>(f: &mut F, x: &[f64], value: f64, slope0: f64, dir: &[f64], alpha0: f64) -> Option<Probe>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut eval = |alpha: f64| {
        let (value, gradient) = f(&axpy(x, alpha, dir));
        Probe { alpha, value, slope: dot(&gradient, dir), gradient }
    };
    let start = Probe { alpha: 0.0, value, slope: slope0, gradient: Vec::new() };
    let mut prev = Probe { alpha: 0.0, value, slope: slope0, gradient: Vec::new() };
    let mut alpha = alpha0;
    for i in 0..40 {
        let cur = eval(alpha);
        if !cur.value.is_finite() {
            alpha *= 0.5;
            continue;
        }
        if cur.value > value + C1 * alpha * slope0 || (i > 0 && cur.value >= prev.value) {
            return zoom(&mut eval, &start, prev, cur);
        }
        if cur.slope.abs() <= -C2 * slope0 {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            return zoom(&mut eval, &start, cur, prev);
        }
        alpha *= 2.0;
        prev = cur;
    }
    None
}

fn zoom<E>(eval: &mut E, start: &Probe, mut lo: Probe, mut hi: Probe) -> Option<Probe>
where
    E: FnMut(f64) -> Probe,
{
    for _ in 0..60 {
        let alpha = cubic_step(&lo, &hi);
        if (hi.alpha - lo.alpha).abs() < 1e-16 * alpha.abs().max(1.0) {
            break;
        }
        let cur = eval(alpha);
        if cur.value > start.value + C1 * alpha * start.slope || cur.value >= lo.value {
            hi = cur;
        } else {
            if cur.slope.abs() <= -C2 * start.slope {
                return Some(cur);
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // Accept the best sufficient-decrease point found, if any.
    (lo.alpha > 0.0 && lo.value < start.value && !lo.gradient.is_empty()).then_some(lo)
}

/// Minimizes `f`, which returns the value and gradient at a point.
pub fn minimize<F>(mut f: F, x0: Vec<f64>, options: &LbfgsOptions) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut value, mut grad) = f(&x);
    let mut trace = vec![(0, value)];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iteration = 0;
    let reason = loop {
        if norm(&grad) < options.gradient_tolerance {
            break StopReason::GradientTolerance;
        }
        if iteration >= options.max_iterations {
            break StopReason::MaxIterations;
        }

        // Two-loop recursion.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = grad.iter().map(|v| -v).collect();
            slope = dot(&grad, &dir);
        }
        let alpha0 = if history.is_empty() { (1.0 / norm(&grad)).min(1.0) } else { 1.0 };

        let probe = match line_search(&mut f, &x, value, slope, &dir, alpha0) {
            Some(p) => p,
            None if !history.is_empty() => {
                history.clear();
                continue;
            }
            None => break StopReason::LineSearchFailed,
        };

        let x_new = axpy(&x, probe.alpha, &dir);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = probe.gradient.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > options.memory {
                history.pop_front();
            }
        }
        let change = value - probe.value;
        x = x_new;
        value = probe.value;
        grad = probe.gradient;
        iteration += 1;
        trace.push((iteration, value));
        if change.abs() < options.energy_tolerance {
            break StopReason::EnergyTolerance;
        }
    };
    let gradient_norm = norm(&grad);
    Minimum { x, value, gradient_norm, trace, iterations: iteration, reason }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (v, g)
    }

    #[test]
    fn solves_rosenbrock() {
        let opts = LbfgsOptions { energy_tolerance: 0.0, ..Default::default() };
        let m = minimize(rosenbrock, vec![-1.2, 1.0], &opts);
        assert!(m.converged(), "{:?}", m.reason);
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] - 1.0).abs() < 1e-8);
        assert!(m.trace.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn quadratic_converges_quickly() {
        let f = |x: &[f64]| {
            let v = x.iter().enumerate().map(|(i, xi)| (i + 1) as f64 * xi * xi).sum();
            let g = x.iter().enumerate().map(|(i, xi)| 2.0 * (i + 1) as f64 * xi).collect();
            (v, g)
        };
        let opts = LbfgsOptions { energy_tolerance: 0.0, ..Default::default() };
        let m = minimize(f, vec![1.0; 6], &opts);
        assert_eq!(m.reason, StopReason::GradientTolerance);
        assert!(m.value < 1e-16);
        assert!(m.iterations < 30);
    }

    #[test]
    fn respects_iteration_cap() {
        let opts = LbfgsOptions { max_iterations: 3, energy_tolerance: 0.0, ..Default::default() };
        let m = minimize(rosenbrock, vec![-1.2, 1.0], &opts);
        assert_eq!(m.reason, StopReason::MaxIterations);
        assert_eq!(m.iterations, 3);
        assert!(!m.converged());
    }
}
