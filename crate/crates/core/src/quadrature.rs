//! Gauss-Legendre quadrature with order doubling.

use std::f64::consts::PI;

/// Nodes and weights on `[-1, 1]` for an `n`-point rule.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn fixed_rule(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half
}

/// Integrates `f` over `[a, b]`, doubling the rule order until two
/// successive estimates agree to `tol`. Falls back to adaptive bisection
/// with a 32-point rule when doubling stalls.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut n = 16;
    let mut prev = fixed_rule(&f, a, b, n);
    while n < 1024 {
        n *= 2;
        let cur = fixed_rule(&f, a, b, n);
        if (cur - prev).abs() < tol {
            return cur;
        }
        prev = cur;
    }
    adaptive(&f, a, b, tol, 40)
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let whole = fixed_rule(f, a, b, 32);
    let m = 0.5 * (a + b);
    let left = fixed_rule(f, a, m, 32);
    let right = fixed_rule(f, m, b, 32);
    if depth == 0 || (left + right - whole).abs() < tol {
        left + right
    } else {
        adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
    }
}
