//! Gauss-Legendre quadrature, oscillation-aware panel splitting and
//! Richardson extrapolation of regulator limits.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on the Legendre recurrence; good to ~1e-15 for n <= 64.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            // Chebyshev-like initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_pair(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

static GL8: OnceLock<GaussRule> = OnceLock::new();
static GL16: OnceLock<GaussRule> = OnceLock::new();
static GL32: OnceLock<GaussRule> = OnceLock::new();

pub fn gl8() -> &'static GaussRule {
    GL8.get_or_init(|| GaussRule::new(8))
}

pub fn gl16() -> &'static GaussRule {
    GL16.get_or_init(|| GaussRule::new(16))
}

pub fn gl32() -> &'static GaussRule {
    GL32.get_or_init(|| GaussRule::new(32))
}

/// Integrate `f` over [a, b] with a single Gauss panel.
pub fn panel<F: FnMut(f64) -> Complex64>(rule: &GaussRule, a: f64, b: f64, mut f: F) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(c + h * x) * *w;
    }
    acc * h
}

pub fn panel_real<F: FnMut(f64) -> f64>(rule: &GaussRule, a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += f(c + h * x) * *w;
    }
    acc * h
}

/// Integrate over [a, b] split into panels no wider than `max_width`.
pub fn panels<F: FnMut(f64) -> Complex64>(
    rule: &GaussRule,
    a: f64,
    b: f64,
    max_width: f64,
    mut f: F,
) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let n = ((b - a) / max_width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        acc += panel(rule, a + i as f64 * h, a + (i + 1) as f64 * h, &mut f);
    }
    acc
}

/// Panel width that resolves a phase evolving at `rate` rad per unit:
/// at most pi/4 of phase per panel, never wider than `cap`.
pub fn oscillation_width(rate: f64, cap: f64) -> f64 {
    if rate.abs() < 1e-12 {
        cap
    } else {
        (std::f64::consts::FRAC_PI_4 / rate.abs()).min(cap)
    }
}

/// Adaptive bisection with an absolute/relative tolerance; returns an error
/// when the panel budget is exhausted before convergence.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
    f: &F,
) -> Result<Complex64, QuadError> {
    let rule_lo = gl8();
    let rule_hi = gl16();
    let mut stack = vec![(a, b)];
    let mut acc = Complex64::new(0.0, 0.0);
    let mut used = 0usize;
    let scale = {
        let coarse = panel(rule_hi, a, b, |x| f(x));
        coarse.norm().max(1e-300)
    };
    while let Some((lo, hi)) = stack.pop() {
        used += 1;
        if used > max_panels {
            return Err(QuadError::PanelBudgetExceeded { max_panels });
        }
        let c = panel(rule_lo, lo, hi, |x| f(x));
        let fine = panel(rule_hi, lo, hi, |x| f(x));
        if (c - fine).norm() <= tol * (1.0 + scale) || (hi - lo) < 1e-14 * (b - a).abs() {
            acc += fine;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    Ok(acc)
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge within {max_panels} panels")]
    PanelBudgetExceeded { max_panels: usize },
}

/// Neville polynomial extrapolation of samples (x_i, y_i) to x = 0.
/// Used for the epsilon -> 0 regulator limits.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let n = xs.len();
    let mut tab = ys.to_vec();
    for level in 1..n {
        for i in 0..n - level {
            let x0 = xs[i];
            let x1 = xs[i + level];
            tab[i] = (tab[i] * x1 - tab[i + 1] * x0) / (x1 - x0);
        }
    }
    tab[0]
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
