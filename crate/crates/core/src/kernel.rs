//! Pulled-back two-point kernels W_gamma(tau, tau') with i-epsilon
//! regularization, detector response spectra and detailed-balance fits.
//! Sign and phase conventions are fixed by the mode-integral backend
//! (1/(2 lambda) measure), under which the massless inertial kernel is
//! -1/(4 pi^2 (dtau - i eps)^2).

use crate::profile::Profile;
use crate::quad::{self, extrapolate_to_zero, gl16, gl32, linear_fit};
use crate::worldline::Worldline;
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum KernelError {
    #[error("backend '{backend}' does not support worldline {worldline}")]
    Unsupported { backend: String, worldline: String },
    #[error("kernel is singular at coincidence with eps = 0")]
    SingularCoincidence,
    #[error("mode-integral backend requires eps > 0, got {0}")]
    NonPositiveEps(f64),
    #[error("unknown kernel backend '{0}'")]
    UnknownBackend(String),
    #[error("detailed-balance fit rejected: {0}")]
    FitRejected(String),
    #[error(transparent)]
    Quadrature(#[from] quad::QuadError),
    #[error(transparent)]
    Worldline(#[from] crate::worldline::WorldlineError),
}

/// Geometric epsilon schedule with Richardson extrapolation to zero.
#[derive(Debug, Clone, Serialize)]
pub struct EpsSchedule {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        // 1e-2 down to ~1.6e-4 by halving
        EpsSchedule { start: 1e-2, factor: 0.5, count: 7 }
    }
}

impl EpsSchedule {
    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.start * self.factor.powi(i as i32)).collect()
    }

    pub fn extrapolate(&self, samples: &[Complex64]) -> Complex64 {
        extrapolate_to_zero(&self.values(), samples)
    }
}

pub trait KernelBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn supports(&self, w: &Worldline) -> bool;
    /// W_gamma(tau1, tau2) at regulator eps.
    fn value(&self, w: &Worldline, tau1: f64, tau2: f64, eps: f64)
        -> Result<Complex64, KernelError>;
    /// Whether W(tau1, tau2) depends on tau1 - tau2 only for this curve.
    fn stationary_on(&self, w: &Worldline) -> bool;
}

/// W(u) = -1/(4 pi^2 (u - i eps)^2) on inertial curves (massless).
pub struct ClosedMasslessInertial;

impl KernelBackend for ClosedMasslessInertial {
    fn name(&self) -> &'static str {
        "closed-massless-inertial"
    }
    fn supports(&self, w: &Worldline) -> bool {
        w.is_inertial()
    }
    fn value(
        &self,
        w: &Worldline,
        tau1: f64,
        tau2: f64,
        eps: f64,
    ) -> Result<Complex64, KernelError> {
        if !self.supports(w) {
            return Err(KernelError::Unsupported {
                backend: self.name().into(),
                worldline: w.label(),
            });
        }
        let u = tau1 - tau2;
        if eps <= 0.0 && u == 0.0 {
            return Err(KernelError::SingularCoincidence);
        }
        let s = Complex64::new(u, -eps);
        Ok(-1.0 / (4.0 * std::f64::consts::PI.powi(2) * s * s))
    }
    fn stationary_on(&self, _w: &Worldline) -> bool {
        true
    }
}

/// W(u) = -a^2/(16 pi^2) / sinh^2(a (u - i eps)/2) on uniformly accelerated
/// curves (massless).
pub struct ClosedMasslessRindler;

fn proper_acceleration(w: &Worldline) -> Option<f64> {
    // constant-norm proper acceleration marks a uniformly accelerated curve
    let mut a0 = None;
    for tau in [-0.7, 0.0, 1.3] {
        let a = w.acceleration(tau).ok()?;
        let n2 = a.dot(&a);
        if n2 <= 0.0 {
            return None;
        }
        let n = n2.sqrt();
        match a0 {
            None => a0 = Some(n),
            Some(prev) if (prev - n).abs() > 1e-8 * prev => return None,
            _ => {}
        }
    }
    a0
}

impl KernelBackend for ClosedMasslessRindler {
    fn name(&self) -> &'static str {
        "closed-massless-rindler"
    }
    fn supports(&self, w: &Worldline) -> bool {
        w.kind() == "rindler" || proper_acceleration(w).is_some()
    }
    fn value(
        &self,
        w: &Worldline,
        tau1: f64,
        tau2: f64,
        eps: f64,
    ) -> Result<Complex64, KernelError> {
        let a = proper_acceleration(w).ok_or_else(|| KernelError::Unsupported {
            backend: self.name().into(),
            worldline: w.label(),
        })?;
        let u = tau1 - tau2;
        if eps <= 0.0 && u == 0.0 {
            return Err(KernelError::SingularCoincidence);
        }
        let z = Complex64::new(0.5 * a * u, -0.5 * a * eps);
        let sh = z.sinh();
        Ok(-a * a / (16.0 * std::f64::consts::PI.powi(2) * sh * sh))
    }
    fn stationary_on(&self, _w: &Worldline) -> bool {
        true
    }
}

/// Honest radial quadrature of W(x,y) = (2pi)^{-3} int e^{-i lambda dt + i xi.dx
/// - eps lambda} / (2 lambda) d^3 xi, any worldline and mass.
pub struct ModeIntegral {
    pub mass: f64,
}

impl ModeIntegral {
    /// Kernel from the event separation (dt, spatial distance d).
    pub fn from_separation(&self, dt: f64, d: f64, eps: f64) -> Result<Complex64, KernelError> {
        if eps <= 0.0 {
            return Err(KernelError::NonPositiveEps(eps));
        }
        let m = self.mass;
        let pref = 1.0 / (4.0 * std::f64::consts::PI.powi(2));
        // integrate until e^{-eps lambda} is negligible
        let lam_max = m + 42.0 / eps;
        if d < 1e-12 {
            // (1/4pi^2) int_m^inf sqrt(l^2 - m^2) e^{-l s} dl with s = eps + i dt.
            // Rotate lambda = m + xi e^{-i theta}, theta = arg(s): the factor
            // becomes a pure decay e^{-xi |s|} and the integrand stays analytic
            // (the sqrt branch points sit on [-m, m]).
            let s = Complex64::new(eps, dt);
            let smod = s.norm();
            let dir = (s / smod).conj(); // e^{-i theta}
            let head = (-s * m).exp();
            // substitute xi = y^2 to remove the sqrt endpoint singularity
            let y_max = (42.0 / smod).sqrt();
            let sqrt_dir = dir.sqrt();
            let val = quad::panels(gl16(), 0.0, y_max, y_max / 64.0, |y| {
                let xi = y * y;
                let inner = (dir * xi + 2.0 * m).sqrt();
                2.0 * y * y * sqrt_dir * inner * (-smod * xi).exp() * dir
            });
            Ok(pref * head * val)
        } else {
            // (1/(4 pi^2 d)) int_0^inf (r/lambda) sin(r d) e^{-lambda (eps + i dt)} dr
            let r_max = (lam_max * lam_max - m * m).max(0.0).sqrt();
            let rate = d + dt.abs();
            let width = quad::oscillation_width(rate, r_max / 4.0);
            let val = quad::panels(gl16(), 0.0, r_max, width, |r| {
                let lam = (r * r + m * m).sqrt();
                (r / lam) * (r * d).sin() * Complex64::new(-lam * eps, -lam * dt).exp()
            });
            Ok(pref * val / d)
        }
    }
}

impl KernelBackend for ModeIntegral {
    fn name(&self) -> &'static str {
        "mode-integral"
    }
    fn supports(&self, _w: &Worldline) -> bool {
        true
    }
    fn value(
        &self,
        w: &Worldline,
        tau1: f64,
        tau2: f64,
        eps: f64,
    ) -> Result<Complex64, KernelError> {
        let (x1, _) = w.evaluate(tau1)?;
        let (x2, _) = w.evaluate(tau2)?;
        let dt = x1.t - x2.t;
        let d = (x1 - x2).spatial_norm();
        self.from_separation(dt, d, eps)
    }
    fn stationary_on(&self, w: &Worldline) -> bool {
        // pulled back to an inertial curve the separation is (u, const)
        w.is_inertial()
    }
}

/// Build a kernel backend by name.
pub fn build_kernel(name: &str, mass: f64) -> Result<Box<dyn KernelBackend>, KernelError> {
    match name {
        "closed-massless-inertial" => Ok(Box::new(ClosedMasslessInertial)),
        "closed-massless-rindler" => Ok(Box::new(ClosedMasslessRindler)),
        "mode-integral" => Ok(Box::new(ModeIntegral { mass })),
        other => Err(KernelError::UnknownBackend(other.to_string())),
    }
}

pub fn kernel_names() -> &'static [&'static str] {
    &["closed-massless-inertial", "closed-massless-rindler", "mode-integral"]
}

/// Hermiticity defect max |W(t1,t2) - conj(W(t2,t1))| over sample pairs.
pub fn hermiticity_defect(
    backend: &dyn KernelBackend,
    w: &Worldline,
    pairs: &[(f64, f64)],
    eps: f64,
) -> Result<f64, KernelError> {
    let mut worst: f64 = 0.0;
    for &(a, b) in pairs {
        let v1 = backend.value(w, a, b, eps)?;
        let v2 = backend.value(w, b, a, eps)?;
        worst = worst.max((v1 - v2.conj()).norm());
    }
    Ok(worst)
}

/// u-panel edges refined geometrically towards the kernel scale eps near 0.
fn refined_u_edges(u_max: f64, eps: f64, omega: f64, kernel_rate: f64) -> Vec<f64> {
    let mut right = Vec::new();
    let mut x = (eps / 8.0).min(u_max / 4.0).max(1e-12);
    right.push(0.0);
    while x < u_max {
        right.push(x);
        x *= 1.6;
    }
    right.push(u_max);
    // enforce the oscillation cap on the outer panels
    let cap = quad::oscillation_width(omega.abs() + kernel_rate, u_max);
    let mut edges = vec![0.0];
    for win in right.windows(2) {
        let (a, b) = (win[0], win[1]);
        let n = ((b - a) / cap).ceil().max(1.0) as usize;
        for k in 1..=n {
            edges.push(a + (b - a) * k as f64 / n as f64);
        }
    }
    let mut full: Vec<f64> = edges.iter().rev().map(|&v| -v).collect();
    full.extend(edges.iter().skip(1));
    full
}

/// Autocorrelation C(u) = int f(tau) conj(f(tau - u)) dtau.
fn autocorrelation(window: &Profile, u: f64) -> Complex64 {
    let (lo, hi) = window.support();
    let a = lo.max(lo + u);
    let b = hi.min(hi + u);
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    quad::panel(gl32(), a, b, |t| window.eval(t) * window.eval(t - u).conj())
}

/// Detector response F(omega) = int int f(t1) conj(f(t2)) e^{-i omega (t1-t2)}
/// W(t1,t2) dt1 dt2, with the epsilon -> 0 limit taken by Richardson
/// extrapolation over the schedule. Nonnegative up to numerical floor.
pub fn detector_response(
    w: &Worldline,
    window: &Profile,
    omega: f64,
    backend: &dyn KernelBackend,
    schedule: &EpsSchedule,
) -> Result<f64, KernelError> {
    if !backend.supports(w) {
        return Err(KernelError::Unsupported {
            backend: backend.name().into(),
            worldline: w.label(),
        });
    }
    let (lo, hi) = window.support();
    let u_max = hi - lo;
    let mut samples = Vec::new();
    for eps in schedule.values() {
        let val = if backend.stationary_on(w) {
            response_stationary(w, window, omega, backend, eps, u_max)?
        } else {
            response_general(w, window, omega, backend, eps)?
        };
        samples.push(val);
    }
    let f = schedule.extrapolate(&samples);
    Ok(f.re)
}

fn response_stationary(
    w: &Worldline,
    window: &Profile,
    omega: f64,
    backend: &dyn KernelBackend,
    eps: f64,
    u_max: f64,
) -> Result<Complex64, KernelError> {
    // kernel rate: the rindler kernel varies on scale 1/a-ish; sample it
    let probe = backend.value(w, 0.6, 0.0, eps)?;
    let kernel_rate = if probe.norm() > 0.0 { 2.0 } else { 1.0 };
    let edges = refined_u_edges(u_max, eps, omega, kernel_rate);
    let mut acc = Complex64::new(0.0, 0.0);
    for win in edges.windows(2) {
        acc += quad::panel(gl16(), win[0], win[1], |u| {
            let kv = backend.value(w, u, 0.0, eps).expect("kernel value on stationary curve");
            autocorrelation(window, u) * Complex64::new(0.0, -omega * u).exp() * kv
        });
    }
    Ok(acc)
}

fn response_general(
    w: &Worldline,
    window: &Profile,
    omega: f64,
    backend: &dyn KernelBackend,
    eps: f64,
) -> Result<Complex64, KernelError> {
    let (lo, hi) = window.support();
    let u_max = hi - lo;
    let edges = refined_u_edges(u_max, eps, omega, 2.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for win in edges.windows(2) {
        acc += quad::panel(gl16(), win[0], win[1], |u| {
            // v-range where both window arguments are inside support
            let vlo = lo + 0.5 * u.abs();
            let vhi = hi - 0.5 * u.abs();
            if vhi <= vlo {
                return Complex64::new(0.0, 0.0);
            }
            let inner = quad::panel(gl16(), vlo, vhi, |v| {
                let t1 = v + 0.5 * u;
                let t2 = v - 0.5 * u;
                let kv = backend.value(w, t1, t2, eps).expect("kernel value");
                window.eval(t1) * window.eval(t2).conj() * kv
            });
            inner * Complex64::new(0.0, -omega * u).exp()
        });
    }
    Ok(acc)
}

/// Least-squares detailed-balance fit: ln(F(w)/F(-w)) = -beta w + c.
#[derive(Debug, Clone, Serialize)]
pub struct KmsFit {
    pub beta: f64,
    pub stderr: f64,
    pub residual: f64,
    pub points_used: usize,
    pub dropped: Vec<f64>,
}

pub fn kms_fit(
    w: &Worldline,
    window: &Profile,
    omegas: &[f64],
    backend: &dyn KernelBackend,
    schedule: &EpsSchedule,
) -> Result<KmsFit, KernelError> {
    let positive: Vec<f64> = omegas.iter().copied().filter(|&o| o > 0.0).collect();
    if positive.len() < 5 {
        return Err(KernelError::FitRejected(format!(
            "need at least 5 positive frequencies, got {}",
            positive.len()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = Vec::new();
    let mut peak: f64 = 0.0;
    let mut values = Vec::new();
    for &o in &positive {
        let fp = detector_response(w, window, o, backend, schedule)?;
        let fm = detector_response(w, window, -o, backend, schedule)?;
        peak = peak.max(fp.abs()).max(fm.abs());
        values.push((o, fp, fm));
    }
    let floor = 1e-11 * peak;
    for (o, fp, fm) in values {
        if fp <= floor || fm <= floor {
            dropped.push(o);
            continue;
        }
        xs.push(o);
        ys.push((fp / fm).ln());
    }
    if xs.len() < 2 {
        return Err(KernelError::FitRejected(format!(
            "ratios below noise floor at {} of {} frequencies",
            dropped.len(),
            positive.len()
        )));
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    let n = xs.len() as f64;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let residual = (ss / n).sqrt();
    let mx = xs.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let stderr = if n > 2.0 { (ss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(KmsFit { beta: -slope, stderr, residual, points_used: xs.len(), dropped })
}

/// Short-distance diagnostics: W * (sigma + 2 i eps dtau + eps^2) per grid
/// point, extrapolated over the schedule; optional log-residual fit for
/// massive kernels.
#[derive(Debug, Clone, Serialize)]
pub struct ShortDistanceReport {
    pub dtau: Vec<f64>,
    /// |lim W (sigma + 2 i eps dtau + eps^2)| per grid point
    pub leading_modulus: Vec<f64>,
    /// extrapolated complex value, re/im pairs
    pub leading: Vec<(f64, f64)>,
    /// max relative change between consecutive eps values (pre-extrapolation)
    pub eps_drift: f64,
    /// massive only: fitted log coefficient, its expected value, and the ratio
    pub log_fit: Option<LogFit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogFit {
    pub coefficient: f64,
    pub expected: f64,
    pub ratio: f64,
    pub ill_conditioned: bool,
}

pub fn short_distance_check(
    w: &Worldline,
    mass: f64,
    dtau_grid: &[f64],
    backend: &dyn KernelBackend,
    schedule: &EpsSchedule,
) -> Result<ShortDistanceReport, KernelError> {
    let eps_values = schedule.values();
    let mut leading = Vec::new();
    let mut leading_modulus = Vec::new();
    let mut eps_drift: f64 = 0.0;
    let mut residuals = Vec::new();
    for &dt in dtau_grid {
        let mut samples = Vec::new();
        let mut res_samples = Vec::new();
        for &eps in &eps_values {
            let wv = backend.value(w, dt, 0.0, eps)?;
            let reg = Complex64::new(dt * dt + eps * eps, 2.0 * eps * dt);
            samples.push(wv * reg);
            // residual after subtracting the massless leading term
            let s = Complex64::new(dt, -eps);
            let lead = -1.0 / (4.0 * std::f64::consts::PI.powi(2) * s * s);
            res_samples.push(wv - lead);
        }
        for i in 1..samples.len() {
            let rel =
                (samples[i].norm() - samples[i - 1].norm()).abs() / samples[i].norm().max(1e-300);
            eps_drift = eps_drift.max(rel);
        }
        let lim = schedule.extrapolate(&samples);
        leading.push((lim.re, lim.im));
        leading_modulus.push(lim.norm());
        residuals.push(schedule.extrapolate(&res_samples).re);
    }
    let log_fit = if mass > 0.0 {
        let xs: Vec<f64> = dtau_grid.iter().map(|&dt| (dt * dt).ln()).collect();
        let (slope, _) = linear_fit(&xs, &residuals);
        let v0 = mass * mass / 4.0;
        let expected = v0 / (4.0 * std::f64::consts::PI.powi(2));
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(LogFit {
            coefficient: slope,
            expected,
            ratio: slope / expected,
            ill_conditioned: spread < 0.5,
        })
    } else {
        None
    };
    Ok(ShortDistanceReport { dtau: dtau_grid.to_vec(), leading_modulus, leading, eps_drift, log_fit })
}
