//! Quadrature rules: Gauss–Legendre, Gauss–Laguerre and adaptive Simpson.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights of an n-point rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule on [−1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(rule: &Rule, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(move |(&x, &w)| (mid + half * x, half * w))
}

/// Gauss–Laguerre rule for `∫₀^∞ e^{−x} f(x) dx` (Golub–Welsch).
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n > 0, "Gauss-Laguerre rule needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jacobi[(i, i)] = (2 * i + 1) as f64;
        if i + 1 < n {
            let b = (i + 1) as f64;
            jacobi[(i, i + 1)] = b;
            jacobi[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Process-wide cache of Gauss–Laguerre rules (Golub–Welsch is O(n³)).
pub fn cached_laguerre(n: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("laguerre cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(gauss_laguerre(n));
    cache
        .lock()
        .expect("laguerre cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Starting node count for [`laguerre_doubling`].
pub const LAGUERRE_START: usize = 64;
/// Largest rule tried before giving up.
pub const LAGUERRE_MAX: usize = 512;

/// `∫₀^∞ e^{−x/scale} g(x) dx`, doubling the node count from 64 until two
/// successive results agree to `rel_tol · max(|I|, floor)`.
pub fn laguerre_doubling<F>(g: F, scale: f64, rel_tol: f64, floor: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let eval = |n: usize| -> f64 {
        let rule = cached_laguerre(n);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * g(scale * x))
            .sum::<f64>()
            * scale
    };
    let mut n = LAGUERRE_START;
    let mut prev = eval(n);
    while n < LAGUERRE_MAX {
        n *= 2;
        let next = eval(n);
        if (next - prev).abs() <= rel_tol * next.abs().max(floor) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "Gauss-Laguerre did not settle to {rel_tol:e} with {LAGUERRE_MAX} nodes"
    )))
}

/// Largest panel count tried by [`panel_legendre`].
pub const PANEL_MAX: usize = 1 << 18;

/// `∫₀^upper g(x) dx` with 16-point Gauss–Legendre panels, doubling the panel
/// count from `panels` until two successive results agree to
/// `rel_tol · max(|I|, floor)`.
pub fn panel_legendre<F>(g: F, upper: f64, panels: usize, rel_tol: f64, floor: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let rule = gauss_legendre(16);
    let eval = |n: usize| -> f64 {
        let h = upper / n as f64;
        (0..n)
            .map(|k| {
                gauss_legendre_on(&rule, k as f64 * h, (k + 1) as f64 * h)
                    .map(|(x, w)| w * g(x))
                    .sum::<f64>()
            })
            .sum()
    };
    let mut n = panels.max(1);
    let mut prev = eval(n);
    while n < PANEL_MAX {
        n *= 2;
        let next = eval(n);
        if (next - prev).abs() <= rel_tol * next.abs().max(floor) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "panel Gauss-Legendre did not settle to {rel_tol:e} with {PANEL_MAX} panels"
    )))
}

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "adaptive Simpson hit depth limit on [{a}, {b}] (error {delta:.3e})"
        )));
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        // degree ≤ 15 exact
        let integral: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * x.powi(14))
            .sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_odd_count_has_center_node() {
        let rule = gauss_legendre(5);
        assert_eq!(rule.nodes[2], 0.0);
        assert!((rule.weights[2] - 128.0 / 225.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments() {
        let rule = gauss_laguerre(64);
        // ∫ e^{-x} x^k = k!
        for (k, fact) in [(0, 1.0), (1, 1.0), (3, 6.0), (6, 720.0)] {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&x, &w)| w * x.powi(k))
                .sum();
            assert!((got - fact).abs() < 1e-11 * fact, "k = {k}: {got}");
        }
    }

    #[test]
    fn adaptive_simpson_smooth_integral() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 40).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn panels_handle_oscillation() {
        // ∫₀^{20π} cos²(x) dx = 10π
        let v = panel_legendre(|x| x.cos().powi(2), 20.0 * std::f64::consts::PI, 4, 1e-12, 1.0).unwrap();
        assert!((v - 10.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn laguerre_doubling_converges_on_damped_cosine() {
        // ∫ e^{-x} cos(2x) dx = 1/5
        let v = laguerre_doubling(|x| (2.0 * x).cos(), 1.0, 1e-10, 1.0).unwrap();
        assert!((v - 0.2).abs() < 1e-10);
    }
}
