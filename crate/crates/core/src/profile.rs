//! Coefficient functions a_alpha(t): closed-form bump families plus tabulated
//! samples, each behind the `CoefficientProfile` trait and constructible by
//! family name from a JSON spec.

use crate::quad::{self, gl16};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::sync::Arc;

pub trait CoefficientProfile: Send + Sync {
    fn family(&self) -> &'static str;
    /// Value a(t).
    fn eval(&self, t: f64) -> Complex64;
    /// Derivative a'(t).
    fn deriv(&self, t: f64) -> Complex64;
    /// Transform ahat(rho) = int e^{i rho t} a(t) dt.
    fn transform(&self, rho: f64) -> Complex64 {
        let (a, b) = self.support();
        let width = quad::oscillation_width(rho, (b - a).max(1e-12) / 8.0);
        quad::panels(gl16(), a, b, width, |t| {
            self.eval(t) * Complex64::new(0.0, rho * t).exp()
        })
    }
    /// Interval outside which the profile vanishes (to working precision).
    fn support(&self) -> (f64, f64);
    fn is_real(&self) -> bool;
    /// Same profile translated by dt: a(t - dt).
    fn shifted(&self, dt: f64) -> Arc<dyn CoefficientProfile>;
    /// Serializable description.
    fn spec(&self) -> ProfileSpec;
}

pub type Profile = Arc<dyn CoefficientProfile>;

/// JSON form: either a closed-form family with parameters or tabulated samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Family { family: String, params: Value },
    Grid { grid: Vec<(f64, f64)>, support: (f64, f64) },
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("unknown coefficient family '{0}'")]
    UnknownFamily(String),
    #[error("invalid parameters for family '{family}': {message}")]
    BadParams { family: String, message: String },
    #[error("tabulated samples do not vanish at support endpoints (|a| = {0:.3e})")]
    EndpointNotZero(f64),
    #[error("tabulated grid needs at least 4 samples, got {0}")]
    GridTooShort(usize),
}

/// Build a profile from its JSON spec. This is the single registry through
/// which config files and serialized distributions name their coefficients.
pub fn build_profile(spec: &ProfileSpec) -> Result<Profile, ProfileError> {
    match spec {
        ProfileSpec::Grid { grid, support } => {
            let values: Vec<Complex64> =
                grid.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
            Ok(Arc::new(Tabulated::new(*support, values)?))
        }
        ProfileSpec::Family { family, params } => {
            let get = |key: &str| -> Result<f64, ProfileError> {
                params
                    .get(key)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| ProfileError::BadParams {
                        family: family.clone(),
                        message: format!("missing numeric field '{key}'"),
                    })
            };
            match family.as_str() {
                "gaussian-bump" => Ok(Arc::new(GaussianBump {
                    center: get("center")?,
                    width: get("width")?,
                    amplitude: get("amplitude").unwrap_or(1.0),
                })),
                "cosine-power-bump" => Ok(Arc::new(CosinePowerBump {
                    center: get("center")?,
                    half_width: get("half_width")?,
                    amplitude: get("amplitude").unwrap_or(1.0),
                    power: params.get("power").and_then(Value::as_u64).unwrap_or(8) as u32,
                })),
                "smooth-bump" => Ok(Arc::new(SmoothBump {
                    center: get("center")?,
                    half_width: get("half_width")?,
                    amplitude: get("amplitude").unwrap_or(1.0),
                })),
                "modulated" => {
                    let omega = get("omega")?;
                    let inner_spec = params.get("inner").ok_or_else(|| ProfileError::BadParams {
                        family: family.clone(),
                        message: "missing 'inner' profile".into(),
                    })?;
                    let inner: ProfileSpec = serde_json::from_value(inner_spec.clone())
                        .map_err(|e| ProfileError::BadParams {
                            family: family.clone(),
                            message: e.to_string(),
                        })?;
                    Ok(Arc::new(Modulated { omega, inner: build_profile(&inner)? }))
                }
                other => Err(ProfileError::UnknownFamily(other.to_string())),
            }
        }
    }
}

/// Names accepted by [`build_profile`].
pub fn profile_families() -> &'static [&'static str] {
    &["gaussian-bump", "cosine-power-bump", "smooth-bump", "modulated", "tabulated"]
}

fn params_map(entries: &[(&str, Value)]) -> Value {
    let map: BTreeMap<String, Value> =
        entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    Value::Object(map.into_iter().collect())
}

/// a(t) = A exp(-8 ((t-c)/w)^2); effective support |t-c| <= 2w where the
/// tail is below 2e-14 of the peak.
#[derive(Debug, Clone)]
pub struct GaussianBump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl GaussianBump {
    fn sigma(&self) -> f64 {
        self.width / 4.0
    }
}

impl CoefficientProfile for GaussianBump {
    fn family(&self) -> &'static str {
        "gaussian-bump"
    }
    fn eval(&self, t: f64) -> Complex64 {
        let u = (t - self.center) / self.width;
        Complex64::new(self.amplitude * (-8.0 * u * u).exp(), 0.0)
    }
    fn deriv(&self, t: f64) -> Complex64 {
        let u = (t - self.center) / self.width;
        Complex64::new(
            self.amplitude * (-8.0 * u * u).exp() * (-16.0 * u / self.width),
            0.0,
        )
    }
    fn transform(&self, rho: f64) -> Complex64 {
        let s = self.sigma();
        let mag = self.amplitude * s * (2.0 * std::f64::consts::PI).sqrt()
            * (-0.5 * rho * rho * s * s).exp();
        mag * Complex64::new(0.0, rho * self.center).exp()
    }
    fn support(&self) -> (f64, f64) {
        (self.center - 2.0 * self.width, self.center + 2.0 * self.width)
    }
    fn is_real(&self) -> bool {
        true
    }
    fn shifted(&self, dt: f64) -> Profile {
        Arc::new(GaussianBump { center: self.center + dt, ..self.clone() })
    }
    fn spec(&self) -> ProfileSpec {
        ProfileSpec::Family {
            family: "gaussian-bump".into(),
            params: params_map(&[
                ("center", self.center.into()),
                ("width", self.width.into()),
                ("amplitude", self.amplitude.into()),
            ]),
        }
    }
}

/// a(t) = A cos^p(pi (t-c) / (2h)) on |t-c| <= h, zero outside; C^{p-1}.
#[derive(Debug, Clone)]
pub struct CosinePowerBump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
    pub power: u32,
}

impl CoefficientProfile for CosinePowerBump {
    fn family(&self) -> &'static str {
        "cosine-power-bump"
    }
    fn eval(&self, t: f64) -> Complex64 {
        let s = (t - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let c = (0.5 * std::f64::consts::PI * s).cos();
        Complex64::new(self.amplitude * c.powi(self.power as i32), 0.0)
    }
    fn deriv(&self, t: f64) -> Complex64 {
        let s = (t - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = 0.5 * std::f64::consts::PI * s;
        let d = -(self.power as f64) * u.cos().powi(self.power as i32 - 1) * u.sin()
            * 0.5
            * std::f64::consts::PI
            / self.half_width;
        Complex64::new(self.amplitude * d, 0.0)
    }
    fn transform(&self, rho: f64) -> Complex64 {
        // cos^p u = 2^-p sum_j C(p,j) e^{i (p - 2j) u}
        let p = self.power;
        let h = self.half_width;
        let mut acc = 0.0;
        let mut binom = 1.0_f64;
        for j in 0..=p {
            let k = rho + (p as f64 - 2.0 * j as f64) * std::f64::consts::PI / (2.0 * h);
            let sinc = if (k * h).abs() < 1e-8 {
                h * (1.0 - (k * h) * (k * h) / 6.0)
            } else {
                (k * h).sin() / k
            };
            acc += binom * 2.0 * sinc;
            binom *= (p - j) as f64 / (j + 1) as f64;
        }
        let mag = self.amplitude * acc / 2f64.powi(p as i32);
        mag * Complex64::new(0.0, rho * self.center).exp()
    }
    fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
    fn is_real(&self) -> bool {
        true
    }
    fn shifted(&self, dt: f64) -> Profile {
        Arc::new(CosinePowerBump { center: self.center + dt, ..self.clone() })
    }
    fn spec(&self) -> ProfileSpec {
        ProfileSpec::Family {
            family: "cosine-power-bump".into(),
            params: params_map(&[
                ("center", self.center.into()),
                ("half_width", self.half_width.into()),
                ("amplitude", self.amplitude.into()),
                ("power", self.power.into()),
            ]),
        }
    }
}

/// a(t) = A exp(1 - 1/(1-s^2)), s = (t-c)/h; genuinely compactly supported.
#[derive(Debug, Clone)]
pub struct SmoothBump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl CoefficientProfile for SmoothBump {
    fn family(&self) -> &'static str {
        "smooth-bump"
    }
    fn eval(&self, t: f64) -> Complex64 {
        let s = (t - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(self.amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp(), 0.0)
    }
    fn deriv(&self, t: f64) -> Complex64 {
        let s = (t - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let d = 1.0 - s * s;
        self.eval(t) * (-2.0 * s / (d * d)) / self.half_width
    }
    fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
    fn is_real(&self) -> bool {
        true
    }
    fn shifted(&self, dt: f64) -> Profile {
        Arc::new(SmoothBump { center: self.center + dt, ..self.clone() })
    }
    fn spec(&self) -> ProfileSpec {
        ProfileSpec::Family {
            family: "smooth-bump".into(),
            params: params_map(&[
                ("center", self.center.into()),
                ("half_width", self.half_width.into()),
                ("amplitude", self.amplitude.into()),
            ]),
        }
    }
}

/// a(t) = inner(t) e^{-i omega t}; transform shifts by omega.
#[derive(Clone)]
pub struct Modulated {
    pub omega: f64,
    pub inner: Profile,
}

impl CoefficientProfile for Modulated {
    fn family(&self) -> &'static str {
        "modulated"
    }
    fn eval(&self, t: f64) -> Complex64 {
        self.inner.eval(t) * Complex64::new(0.0, -self.omega * t).exp()
    }
    fn deriv(&self, t: f64) -> Complex64 {
        let e = Complex64::new(0.0, -self.omega * t).exp();
        (self.inner.deriv(t) + self.inner.eval(t) * Complex64::new(0.0, -self.omega)) * e
    }
    fn transform(&self, rho: f64) -> Complex64 {
        self.inner.transform(rho - self.omega)
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn is_real(&self) -> bool {
        self.omega == 0.0 && self.inner.is_real()
    }
    fn shifted(&self, dt: f64) -> Profile {
        // (a e^{-i w .})(t - dt) = a(t - dt) e^{-i w t} e^{i w dt}
        Arc::new(ScaledProfile {
            weight: Complex64::new(0.0, self.omega * dt).exp(),
            inner: Arc::new(Modulated { omega: self.omega, inner: self.inner.shifted(dt) }),
        })
    }
    fn spec(&self) -> ProfileSpec {
        let inner = serde_json::to_value(self.inner.spec()).expect("profile spec serializes");
        ProfileSpec::Family {
            family: "modulated".into(),
            params: params_map(&[("omega", self.omega.into()), ("inner", inner)]),
        }
    }
}

/// Pointwise complex conjugate of another profile.
#[derive(Clone)]
pub struct ConjugatedProfile {
    pub inner: Profile,
}

impl CoefficientProfile for ConjugatedProfile {
    fn family(&self) -> &'static str {
        self.inner.family()
    }
    fn eval(&self, t: f64) -> Complex64 {
        self.inner.eval(t).conj()
    }
    fn deriv(&self, t: f64) -> Complex64 {
        self.inner.deriv(t).conj()
    }
    fn transform(&self, rho: f64) -> Complex64 {
        // int e^{i rho t} conj(a) = conj(int e^{-i rho t} a)
        self.inner.transform(-rho).conj()
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn is_real(&self) -> bool {
        self.inner.is_real()
    }
    fn shifted(&self, dt: f64) -> Profile {
        Arc::new(ConjugatedProfile { inner: self.inner.shifted(dt) })
    }
    fn spec(&self) -> ProfileSpec {
        tabulate(self, 2048).spec()
    }
}

/// Complex scalar multiple of another profile.
#[derive(Clone)]
pub struct ScaledProfile {
    pub weight: Complex64,
    pub inner: Profile,
}

impl CoefficientProfile for ScaledProfile {
    fn family(&self) -> &'static str {
        self.inner.family()
    }
    fn eval(&self, t: f64) -> Complex64 {
        self.weight * self.inner.eval(t)
    }
    fn deriv(&self, t: f64) -> Complex64 {
        self.weight * self.inner.deriv(t)
    }
    fn transform(&self, rho: f64) -> Complex64 {
        self.weight * self.inner.transform(rho)
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn is_real(&self) -> bool {
        self.inner.is_real() && self.weight.im == 0.0
    }
    fn shifted(&self, dt: f64) -> Profile {
        Arc::new(ScaledProfile { weight: self.weight, inner: self.inner.shifted(dt) })
    }
    fn spec(&self) -> ProfileSpec {
        // scaled closed forms are serialized by sampling
        tabulate(self, 2048).spec()
    }
}

/// Closure-backed profile; produced by canonicalization where coefficients
/// mix with frame components.
pub struct ClosureProfile {
    pub support: (f64, f64),
    pub real: bool,
    pub f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub df: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
}

impl CoefficientProfile for ClosureProfile {
    fn family(&self) -> &'static str {
        "closure"
    }
    fn eval(&self, t: f64) -> Complex64 {
        if t <= self.support.0 || t >= self.support.1 {
            Complex64::new(0.0, 0.0)
        } else {
            (self.f)(t)
        }
    }
    fn deriv(&self, t: f64) -> Complex64 {
        if t <= self.support.0 || t >= self.support.1 {
            Complex64::new(0.0, 0.0)
        } else {
            (self.df)(t)
        }
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn is_real(&self) -> bool {
        self.real
    }
    fn shifted(&self, dt: f64) -> Profile {
        let f = self.f.clone();
        let df = self.df.clone();
        Arc::new(ClosureProfile {
            support: (self.support.0 + dt, self.support.1 + dt),
            real: self.real,
            f: Arc::new(move |t| f(t - dt)),
            df: Arc::new(move |t| df(t - dt)),
        })
    }
    fn spec(&self) -> ProfileSpec {
        tabulate(self, 2048).spec()
    }
}

/// Uniform-grid samples with cubic (Catmull-Rom) interpolation.
pub struct Tabulated {
    support: (f64, f64),
    values: Vec<Complex64>,
    real: bool,
}

impl Tabulated {
    pub fn new(support: (f64, f64), values: Vec<Complex64>) -> Result<Self, ProfileError> {
        if values.len() < 4 {
            return Err(ProfileError::GridTooShort(values.len()));
        }
        let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let edge = values[0].norm().max(values[values.len() - 1].norm());
        if peak > 0.0 && edge > 1e-12 * peak.max(1.0) {
            return Err(ProfileError::EndpointNotZero(edge));
        }
        let real = values.iter().all(|v| v.im == 0.0);
        Ok(Tabulated { support, values, real })
    }

    fn step(&self) -> f64 {
        (self.support.1 - self.support.0) / (self.values.len() - 1) as f64
    }

    fn sample(&self, i: i64) -> Complex64 {
        if i < 0 || i as usize >= self.values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }
}

impl CoefficientProfile for Tabulated {
    fn family(&self) -> &'static str {
        "tabulated"
    }
    fn eval(&self, t: f64) -> Complex64 {
        if t <= self.support.0 || t >= self.support.1 {
            return Complex64::new(0.0, 0.0);
        }
        let h = self.step();
        let u = (t - self.support.0) / h;
        let i = u.floor() as i64;
        let s = u - i as f64;
        let (p0, p1, p2, p3) =
            (self.sample(i - 1), self.sample(i), self.sample(i + 1), self.sample(i + 2));
        // Catmull-Rom
        0.5 * ((2.0 * p1)
            + (p2 - p0) * s
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (s * s)
            + (3.0 * p1 - p0 - 3.0 * p2 + p3) * (s * s * s))
    }
    fn deriv(&self, t: f64) -> Complex64 {
        if t <= self.support.0 || t >= self.support.1 {
            return Complex64::new(0.0, 0.0);
        }
        let h = self.step();
        let u = (t - self.support.0) / h;
        let i = u.floor() as i64;
        let s = u - i as f64;
        let (p0, p1, p2, p3) =
            (self.sample(i - 1), self.sample(i), self.sample(i + 1), self.sample(i + 2));
        0.5 * ((p2 - p0)
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (2.0 * s)
            + (3.0 * p1 - p0 - 3.0 * p2 + p3) * (3.0 * s * s))
            / h
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn is_real(&self) -> bool {
        self.real
    }
    fn shifted(&self, dt: f64) -> Profile {
        Arc::new(Tabulated {
            support: (self.support.0 + dt, self.support.1 + dt),
            values: self.values.clone(),
            real: self.real,
        })
    }
    fn spec(&self) -> ProfileSpec {
        ProfileSpec::Grid {
            grid: self.values.iter().map(|v| (v.re, v.im)).collect(),
            support: self.support,
        }
    }
}

/// Sample any profile onto a uniform grid (used when serializing closures).
pub fn tabulate(p: &dyn CoefficientProfile, n: usize) -> Tabulated {
    let (a, b) = p.support();
    let values: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (n - 1) as f64;
            p.eval(t)
        })
        .collect();
    let real = values.iter().all(|v| v.im == 0.0);
    Tabulated { support: (a, b), values, real }
}
