//! Timelike curves in proper-time parametrization with adapted orthonormal
//! frames. Each curve family implements `Trajectory`; the registry builds one
//! by kind name from config parameters.

use crate::geometry::{boost, FourVector};
use crate::quad::{gl16, panel_real};
use serde_json::Value;
use std::sync::Arc;

pub const PROPER_TIME_TOL: f64 = 1e-10;
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportRule {
    /// Triad carried along the curve without spatial rotation.
    FermiWalker,
    /// Triad re-aligned with the lab axes at every parameter value.
    ParallelLab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parametrization {
    ProperTime,
    CoordinateTime,
}

/// Orthonormal frame sample along a curve, e0 = velocity.
#[derive(Debug, Clone, Copy)]
pub struct Tetrad {
    pub e: [FourVector; 4],
}

impl Tetrad {
    /// Max deviation of the Gram matrix from diag(-1,1,1,1).
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let want = if mu != nu {
                    0.0
                } else if mu == 0 {
                    -1.0
                } else {
                    1.0
                };
                worst = worst.max((self.e[mu].dot(&self.e[nu]) - want).abs());
            }
        }
        worst
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorldlineError {
    #[error("parameter {tau} outside curve domain [{lo}, {hi}]")]
    OutOfDomain { tau: f64, lo: f64, hi: f64 },
    #[error("curve is not timelike at parameter {0} (g(v,v) = {1})")]
    NotTimelike(f64, f64),
    #[error("tabulated curve has a gap of {gap} at index {index} (tolerance {tol})")]
    Gap { index: usize, gap: f64, tol: f64 },
    #[error("bad worldline data: {0}")]
    BadData(String),
    #[error("unknown worldline kind '{0}'")]
    UnknownKind(String),
    #[error("invalid parameters for worldline '{kind}': {message}")]
    BadParams { kind: String, message: String },
}

/// A curve in its native parametrization. `velocity` is d(gamma)/ds, unit
/// timelike only when the parametrization is proper time.
pub trait Trajectory: Send + Sync {
    fn kind(&self) -> &'static str;
    fn label(&self) -> String;
    fn domain(&self) -> (f64, f64);
    fn parametrization(&self) -> Parametrization;
    fn event(&self, s: f64) -> FourVector;
    fn velocity(&self, s: f64) -> FourVector;
    fn is_inertial(&self) -> bool {
        false
    }
    /// Closed-form proper-time parametrization: unit velocity by construction.
    fn proper_time_exact(&self) -> bool {
        false
    }
    /// Proper acceleration, proper-time curves only.
    fn acceleration(&self, s: f64) -> FourVector {
        let h = 1e-5;
        (self.velocity(s + h) - self.velocity(s - h)).scale(0.5 / h)
    }
}

#[derive(Clone)]
pub struct Worldline {
    traj: Arc<dyn Trajectory>,
    fw_cache: Arc<std::sync::Mutex<std::collections::HashMap<i64, [FourVector; 3]>>>,
}

impl std::fmt::Debug for Worldline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Worldline({})", self.traj.label())
    }
}

impl Worldline {
    pub fn new(traj: Arc<dyn Trajectory>) -> Self {
        Worldline { traj, fw_cache: Arc::new(std::sync::Mutex::new(Default::default())) }
    }

    pub fn kind(&self) -> &'static str {
        self.traj.kind()
    }

    pub fn label(&self) -> String {
        self.traj.label()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.traj.domain()
    }

    pub fn parametrization(&self) -> Parametrization {
        self.traj.parametrization()
    }

    pub fn is_inertial(&self) -> bool {
        self.traj.is_inertial()
    }

    fn check_domain(&self, tau: f64) -> Result<(), WorldlineError> {
        let (lo, hi) = self.domain();
        if !tau.is_finite() || tau < lo || tau > hi {
            return Err(WorldlineError::OutOfDomain { tau, lo, hi });
        }
        Ok(())
    }

    /// gamma(tau) and gamma'(tau). In proper-time parametrization the
    /// returned velocity is normalized to g(v,v) = -1.
    pub fn evaluate(&self, tau: f64) -> Result<(FourVector, FourVector), WorldlineError> {
        self.check_domain(tau)?;
        let x = self.traj.event(tau);
        let mut v = self.traj.velocity(tau);
        if self.traj.proper_time_exact() {
            return Ok((x, v));
        }
        let vv = v.dot(&v);
        if vv >= 0.0 {
            return Err(WorldlineError::NotTimelike(tau, vv));
        }
        if self.parametrization() == Parametrization::ProperTime {
            if (vv + 1.0).abs() > 1e-6 * v.euclidean_norm().powi(2).max(1.0) {
                // interpolation drift beyond repair signals bad data
                return Err(WorldlineError::NotTimelike(tau, vv));
            }
            v = v.scale(1.0 / (-vv).sqrt());
        }
        Ok((x, v))
    }

    pub fn velocity(&self, tau: f64) -> Result<FourVector, WorldlineError> {
        Ok(self.evaluate(tau)?.1)
    }

    pub fn acceleration(&self, tau: f64) -> Result<FourVector, WorldlineError> {
        self.check_domain(tau)?;
        Ok(self.traj.acceleration(tau))
    }

    /// Same path re-parametrized by proper time. Idempotent on proper-time
    /// curves. The map tau(s) is accumulated by quadrature of sqrt(-g(v,v)).
    pub fn reparametrize_proper_time(&self) -> Result<Worldline, WorldlineError> {
        if self.parametrization() == Parametrization::ProperTime {
            return Ok(self.clone());
        }
        Ok(Worldline::new(Arc::new(Reparametrized::new(self.traj.clone())?)))
    }

    /// Proper time elapsed between the reference parameter (0 when the
    /// domain contains it, else the domain start) and parameter s.
    pub fn proper_time_of(&self, s: f64) -> Result<f64, WorldlineError> {
        self.check_domain(s)?;
        let (lo, hi) = self.domain();
        let s0 = 0.0f64.clamp(lo, hi);
        let rate = |u: f64| {
            let v = self.traj.velocity(u);
            (-v.dot(&v)).max(0.0).sqrt()
        };
        let n = (((s - s0).abs() * 8.0).ceil() as usize).clamp(1, 100_000);
        let h = (s - s0) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += panel_real(gl16(), s0 + i as f64 * h, s0 + (i + 1) as f64 * h, rate);
        }
        Ok(acc)
    }

    /// Adapted orthonormal frame at tau; e0 = velocity. The rule decides how
    /// the spatial triad is carried along the curve.
    pub fn tetrad_at(&self, rule: TransportRule, tau: f64) -> Result<Tetrad, WorldlineError> {
        if self.parametrization() != Parametrization::ProperTime {
            return Err(WorldlineError::BadData(
                "tetrads require proper-time parametrization".into(),
            ));
        }
        let (_, u) = self.evaluate(tau)?;
        let tet = match rule {
            TransportRule::ParallelLab => lab_aligned_tetrad(&u),
            TransportRule::FermiWalker => {
                if let Some(t) = self.closed_form_fw_tetrad(tau) {
                    t
                } else {
                    self.fermi_walker_transported(tau)?
                }
            }
        };
        Ok(tet)
    }

    fn closed_form_fw_tetrad(&self, tau: f64) -> Option<Tetrad> {
        if self.traj.is_inertial() {
            let u = self.traj.velocity(tau);
            return Some(lab_aligned_tetrad(&u));
        }
        let any: &dyn Trajectory = &*self.traj;
        if self.kind() == "rindler" {
            // boost plane (t,x): closed form
            let u = any.velocity(tau);
            let e1 = FourVector::new(u.x, u.t, 0.0, 0.0);
            return Some(Tetrad {
                e: [u, e1, FourVector::spatial(0.0, 1.0, 0.0), FourVector::spatial(0.0, 0.0, 1.0)],
            });
        }
        None
    }

    /// RK4 integration of the transport law v' = u (a.v) - a (u.v) from the
    /// lab-aligned frame at tau = 0 (or the domain point closest to it),
    /// with checkpoints cached every 1/4 unit of parameter.
    fn fermi_walker_transported(&self, tau: f64) -> Result<Tetrad, WorldlineError> {
        const SPACING: f64 = 0.25;
        let (lo, hi) = self.domain();
        let start = 0.0_f64.clamp(lo, hi);
        let idx = ((tau - start) / SPACING).trunc() as i64;
        let base = self.fw_checkpoint(idx, start)?;
        let triad = self.fw_integrate(base, start + idx as f64 * SPACING, tau)?;
        let u = self.traj.velocity(tau);
        Ok(Tetrad { e: [u, triad[0], triad[1], triad[2]] })
    }

    /// Triad at checkpoint index i (parameter start + i * 0.25), built
    /// outward from 0 and memoized.
    fn fw_checkpoint(&self, idx: i64, start: f64) -> Result<[FourVector; 3], WorldlineError> {
        const SPACING: f64 = 0.25;
        if idx == 0 {
            let u0 = self.traj.velocity(start);
            let t = lab_aligned_tetrad(&u0);
            return Ok([t.e[1], t.e[2], t.e[3]]);
        }
        if let Some(hit) = self.fw_cache.lock().unwrap().get(&idx) {
            return Ok(*hit);
        }
        let prev = idx - idx.signum();
        let base = self.fw_checkpoint(prev, start)?;
        let a = start + prev as f64 * SPACING;
        let b = start + idx as f64 * SPACING;
        let triad = self.fw_integrate(base, a, b)?;
        self.fw_cache.lock().unwrap().insert(idx, triad);
        Ok(triad)
    }

    fn fw_integrate(
        &self,
        mut triad: [FourVector; 3],
        from: f64,
        to: f64,
    ) -> Result<[FourVector; 3], WorldlineError> {
        if from == to {
            return Ok(triad);
        }
        let n_steps = (((to - from).abs() / 2e-3).ceil() as usize).max(1);
        let h = (to - from) / n_steps as f64;
        let deriv = |s: f64, v: &FourVector| {
            let u = self.traj.velocity(s);
            let a = self.traj.acceleration(s);
            u.scale(a.dot(v)) - a.scale(u.dot(v))
        };
        let mut s = from;
        for _ in 0..n_steps {
            for v in triad.iter_mut() {
                let k1 = deriv(s, v);
                let k2 = deriv(s + 0.5 * h, &(*v + k1.scale(0.5 * h)));
                let k3 = deriv(s + 0.5 * h, &(*v + k2.scale(0.5 * h)));
                let k4 = deriv(s + h, &(*v + k3.scale(h)));
                *v = *v + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
            }
            s += h;
        }
        Ok(triad)
    }
}

/// Gram-Schmidt of the lab axes against the unit velocity u.
fn lab_aligned_tetrad(u: &FourVector) -> Tetrad {
    let mut e = [*u, FourVector::ZERO, FourVector::ZERO, FourVector::ZERO];
    let axes = [
        FourVector::spatial(1.0, 0.0, 0.0),
        FourVector::spatial(0.0, 1.0, 0.0),
        FourVector::spatial(0.0, 0.0, 1.0),
    ];
    let mut k = 1;
    for ax in axes {
        // project out e0 (timelike, norm -1) and the spatial vectors built so far
        let mut v = ax + e[0].scale(ax.dot(&e[0]));
        for j in 1..k {
            v = v - e[j].scale(v.dot(&e[j]));
        }
        let n2 = v.dot(&v);
        if n2 > 1e-14 {
            e[k] = v.scale(1.0 / n2.sqrt());
            k += 1;
        }
    }
    debug_assert_eq!(k, 4);
    Tetrad { e }
}

// ---------------------------------------------------------------------------
// built-in curve families
// ---------------------------------------------------------------------------

/// gamma(tau) = base + tau (cosh eta, sinh eta n).
#[derive(Debug, Clone)]
pub struct InertialLine {
    pub rapidity: f64,
    pub direction: FourVector,
    pub base: FourVector,
}

impl InertialLine {
    pub fn at_rest() -> Self {
        InertialLine {
            rapidity: 0.0,
            direction: FourVector::spatial(1.0, 0.0, 0.0),
            base: FourVector::ZERO,
        }
    }

    pub fn at_rest_offset(base: FourVector) -> Self {
        InertialLine { base, ..InertialLine::at_rest() }
    }

    pub fn unit_velocity(&self) -> FourVector {
        boost(&FourVector::new(1.0, 0.0, 0.0, 0.0), self.rapidity, &self.direction)
    }
}

impl Trajectory for InertialLine {
    fn kind(&self) -> &'static str {
        "inertial"
    }
    fn label(&self) -> String {
        format!(
            "inertial(eta={},n=({},{},{}),base=({},{},{},{}))",
            self.rapidity,
            self.direction.x,
            self.direction.y,
            self.direction.z,
            self.base.t,
            self.base.x,
            self.base.y,
            self.base.z
        )
    }
    fn domain(&self) -> (f64, f64) {
        (-1e12, 1e12)
    }
    fn parametrization(&self) -> Parametrization {
        Parametrization::ProperTime
    }
    fn event(&self, s: f64) -> FourVector {
        self.base + self.unit_velocity().scale(s)
    }
    fn velocity(&self, _s: f64) -> FourVector {
        self.unit_velocity()
    }
    fn is_inertial(&self) -> bool {
        true
    }
    fn proper_time_exact(&self) -> bool {
        true
    }
    fn acceleration(&self, _s: f64) -> FourVector {
        FourVector::ZERO
    }
}

/// Uniformly accelerated observer: gamma(tau) = (sinh(a tau)/a, cosh(a tau)/a, 0, 0).
#[derive(Debug, Clone)]
pub struct RindlerLine {
    pub accel: f64,
}

impl Trajectory for RindlerLine {
    fn kind(&self) -> &'static str {
        "rindler"
    }
    fn label(&self) -> String {
        format!("rindler(a={})", self.accel)
    }
    fn domain(&self) -> (f64, f64) {
        (-1e6, 1e6)
    }
    fn parametrization(&self) -> Parametrization {
        Parametrization::ProperTime
    }
    fn event(&self, s: f64) -> FourVector {
        let a = self.accel;
        FourVector::new((a * s).sinh() / a, (a * s).cosh() / a, 0.0, 0.0)
    }
    fn velocity(&self, s: f64) -> FourVector {
        let a = self.accel;
        FourVector::new((a * s).cosh(), (a * s).sinh(), 0.0, 0.0)
    }
    fn proper_time_exact(&self) -> bool {
        true
    }
    fn acceleration(&self, s: f64) -> FourVector {
        let a = self.accel;
        FourVector::new(a * (a * s).sinh(), a * (a * s).cosh(), 0.0, 0.0)
    }
}

/// Circular motion in the x-y plane, native coordinate-time parametrization:
/// gamma(t) = (t, R cos(Omega t), R sin(Omega t), 0), requires R Omega < 1.
#[derive(Debug, Clone)]
pub struct CircularLine {
    pub radius: f64,
    pub omega: f64,
}

impl Trajectory for CircularLine {
    fn kind(&self) -> &'static str {
        "circular"
    }
    fn label(&self) -> String {
        format!("circular(R={},Omega={})", self.radius, self.omega)
    }
    fn domain(&self) -> (f64, f64) {
        (-1e6, 1e6)
    }
    fn parametrization(&self) -> Parametrization {
        Parametrization::CoordinateTime
    }
    fn event(&self, t: f64) -> FourVector {
        FourVector::new(
            t,
            self.radius * (self.omega * t).cos(),
            self.radius * (self.omega * t).sin(),
            0.0,
        )
    }
    fn velocity(&self, t: f64) -> FourVector {
        FourVector::new(
            1.0,
            -self.radius * self.omega * (self.omega * t).sin(),
            self.radius * self.omega * (self.omega * t).cos(),
            0.0,
        )
    }
}

/// Numeric proper-time re-parametrization of an arbitrary timelike curve.
/// tau(s) is sampled densely once; s(tau) is recovered by monotone inversion
/// plus Newton refinement.
pub struct Reparametrized {
    inner: Arc<dyn Trajectory>,
    s_grid: Vec<f64>,
    tau_grid: Vec<f64>,
    tau0: f64,
}

impl Reparametrized {
    pub fn new(inner: Arc<dyn Trajectory>) -> Result<Self, WorldlineError> {
        let (lo, hi) = inner.domain();
        // clamp unbounded domains to a working window around 0
        let lo = lo.max(-256.0);
        let hi = hi.min(256.0);
        let n = (((hi - lo) * 16.0).ceil() as usize).clamp(64, 600_000);
        let mut s_grid = Vec::with_capacity(n + 1);
        let mut tau_grid = Vec::with_capacity(n + 1);
        let h = (hi - lo) / n as f64;
        let rate = |u: f64| -> Result<f64, WorldlineError> {
            let v = inner.velocity(u);
            let vv = v.dot(&v);
            if vv >= 0.0 {
                return Err(WorldlineError::NotTimelike(u, vv));
            }
            Ok((-vv).sqrt())
        };
        let mut acc = 0.0;
        s_grid.push(lo);
        tau_grid.push(0.0);
        for i in 0..n {
            let a = lo + i as f64 * h;
            let b = a + h;
            rate(a)?;
            acc += panel_real(gl16(), a, b, |u| {
                let v = inner.velocity(u);
                (-v.dot(&v)).max(0.0).sqrt()
            });
            s_grid.push(b);
            tau_grid.push(acc);
        }
        let mut rp = Reparametrized { inner, s_grid, tau_grid, tau0: 0.0 };
        if rp.s_grid[0] <= 0.0 && *rp.s_grid.last().unwrap() >= 0.0 {
            rp.tau0 = rp.tau_at(0.0);
        }
        Ok(rp)
    }

    /// Map proper time (zero at s = 0 when 0 is in the domain) back to the
    /// native parameter: bracket on the cached grid, refine with Newton.
    fn s_of_tau(&self, tau: f64) -> f64 {
        let target = tau + self.tau0;
        let g = &self.tau_grid;
        let pos = g.partition_point(|&v| v < target).clamp(1, g.len() - 1);
        let (t0, t1) = (g[pos - 1], g[pos]);
        let (s0, s1) = (self.s_grid[pos - 1], self.s_grid[pos]);
        let mut s = if t1 > t0 { s0 + (target - t0) / (t1 - t0) * (s1 - s0) } else { s0 };
        for _ in 0..8 {
            let v = self.inner.velocity(s);
            let r = (-v.dot(&v)).max(1e-300).sqrt();
            let d = (self.tau_at(s) - target) / r;
            s -= d;
            if d.abs() < 1e-14 * (1.0 + s.abs()) {
                break;
            }
        }
        s
    }

    fn tau_at(&self, s: f64) -> f64 {
        let g = &self.s_grid;
        let pos = g.partition_point(|&v| v < s).clamp(1, g.len() - 1);
        let (s0, tau0) = (g[pos - 1], self.tau_grid[pos - 1]);
        tau0 + panel_real(crate::quad::gl8(), s0, s, |u| {
            let v = self.inner.velocity(u);
            (-v.dot(&v)).max(0.0).sqrt()
        })
    }

}

impl Trajectory for Reparametrized {
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }
    fn label(&self) -> String {
        format!("{}[proper-time]", self.inner.label())
    }
    fn domain(&self) -> (f64, f64) {
        (self.tau_grid[0] - self.tau0, *self.tau_grid.last().unwrap() - self.tau0)
    }
    fn parametrization(&self) -> Parametrization {
        Parametrization::ProperTime
    }
    fn event(&self, tau: f64) -> FourVector {
        self.inner.event(self.s_of_tau(tau))
    }
    fn velocity(&self, tau: f64) -> FourVector {
        let s = self.s_of_tau(tau);
        let v = self.inner.velocity(s);
        let r = (-v.dot(&v)).max(1e-300).sqrt();
        v.scale(1.0 / r)
    }
    fn is_inertial(&self) -> bool {
        self.inner.is_inertial()
    }
    fn proper_time_exact(&self) -> bool {
        true
    }
}

/// Samples of events and velocities, cubic Hermite interpolation of events,
/// Catmull-Rom for velocities.
pub struct TabulatedLine {
    taus: Vec<f64>,
    events: Vec<FourVector>,
    velocities: Vec<FourVector>,
    label: String,
}

impl TabulatedLine {
    pub fn new(
        taus: Vec<f64>,
        events: Vec<FourVector>,
        velocities: Vec<FourVector>,
        max_gap: f64,
        label: String,
    ) -> Result<Self, WorldlineError> {
        if taus.len() < 4 || taus.len() != events.len() || taus.len() != velocities.len() {
            return Err(WorldlineError::BadData(format!(
                "need >= 4 aligned samples, got {}/{}/{}",
                taus.len(),
                events.len(),
                velocities.len()
            )));
        }
        for i in 1..taus.len() {
            let gap = taus[i] - taus[i - 1];
            if gap <= 0.0 {
                return Err(WorldlineError::BadData(format!(
                    "sample parameters not strictly increasing at {i}"
                )));
            }
            if gap > max_gap {
                return Err(WorldlineError::Gap { index: i, gap, tol: max_gap });
            }
        }
        for (i, v) in velocities.iter().enumerate() {
            let vv = v.dot(v);
            if vv >= 0.0 {
                return Err(WorldlineError::NotTimelike(taus[i], vv));
            }
        }
        Ok(TabulatedLine { taus, events, velocities, label })
    }

    /// Parse CSV with header tau,t,x,y,z,ut,ux,uy,uz.
    pub fn from_csv(text: &str, max_gap: f64, label: String) -> Result<Self, WorldlineError> {
        let mut taus = Vec::new();
        let mut events = Vec::new();
        let mut velocities = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with("tau")) {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| WorldlineError::BadData(format!("line {}: {e}", ln + 1)))?;
            if cols.len() != 9 {
                return Err(WorldlineError::BadData(format!(
                    "line {}: expected 9 columns, got {}",
                    ln + 1,
                    cols.len()
                )));
            }
            taus.push(cols[0]);
            events.push(FourVector::new(cols[1], cols[2], cols[3], cols[4]));
            velocities.push(FourVector::new(cols[5], cols[6], cols[7], cols[8]));
        }
        TabulatedLine::new(taus, events, velocities, max_gap, label)
    }

    fn locate(&self, s: f64) -> usize {
        self.taus.partition_point(|&v| v < s).clamp(1, self.taus.len() - 1) - 1
    }
}

impl Trajectory for TabulatedLine {
    fn kind(&self) -> &'static str {
        "tabulated"
    }
    fn label(&self) -> String {
        self.label.clone()
    }
    fn domain(&self) -> (f64, f64) {
        (self.taus[0], *self.taus.last().unwrap())
    }
    fn parametrization(&self) -> Parametrization {
        // callers decide; samples are interpreted as given. Velocity norm
        // decides whether reparametrization is needed.
        let v = &self.velocities[0];
        if (v.dot(v) + 1.0).abs() <= 1e-8 {
            Parametrization::ProperTime
        } else {
            Parametrization::CoordinateTime
        }
    }
    fn event(&self, s: f64) -> FourVector {
        let i = self.locate(s);
        let (t0, t1) = (self.taus[i], self.taus[i + 1]);
        let h = t1 - t0;
        let u = (s - t0) / h;
        let (p0, p1) = (self.events[i], self.events[i + 1]);
        let (m0, m1) = (self.velocities[i].scale(h), self.velocities[i + 1].scale(h));
        let u2 = u * u;
        let u3 = u2 * u;
        p0.scale(2.0 * u3 - 3.0 * u2 + 1.0)
            + m0.scale(u3 - 2.0 * u2 + u)
            + p1.scale(-2.0 * u3 + 3.0 * u2)
            + m1.scale(u3 - u2)
    }
    fn velocity(&self, s: f64) -> FourVector {
        let i = self.locate(s);
        let (t0, t1) = (self.taus[i], self.taus[i + 1]);
        let u = (s - t0) / (t1 - t0);
        let get = |j: i64| -> (f64, FourVector) {
            let j = j.clamp(0, self.taus.len() as i64 - 1) as usize;
            (self.taus[j], self.velocities[j])
        };
        let (_, v0) = get(i as i64 - 1);
        let (_, v1) = get(i as i64);
        let (_, v2) = get(i as i64 + 1);
        let (_, v3) = get(i as i64 + 2);
        (v1.scale(2.0)
            + (v2 - v0).scale(u)
            + (v0.scale(2.0) - v1.scale(5.0) + v2.scale(4.0) - v3).scale(u * u)
            + (v1.scale(3.0) - v0 - v2.scale(3.0) + v3).scale(u * u * u))
        .scale(0.5)
    }
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

/// Build a worldline by kind name from JSON-ish parameters. Kinds:
/// "inertial" (rapidity, direction, base), "rindler" (accel),
/// "circular" (radius, omega), "tabulated" (csv text or samples).
pub fn build_worldline(kind: &str, params: &Value) -> Result<Worldline, WorldlineError> {
    let getf = |key: &str, default: Option<f64>| -> Result<f64, WorldlineError> {
        match params.get(key).and_then(Value::as_f64) {
            Some(v) => Ok(v),
            None => default.ok_or_else(|| WorldlineError::BadParams {
                kind: kind.to_string(),
                message: format!("missing numeric field '{key}'"),
            }),
        }
    };
    match kind {
        "inertial" => {
            let eta = getf("rapidity", Some(0.0))?;
            let dir = match params.get("direction").and_then(Value::as_array) {
                Some(a) if a.len() == 3 => {
                    let c: Vec<f64> = a.iter().filter_map(Value::as_f64).collect();
                    if c.len() != 3 {
                        return Err(WorldlineError::BadParams {
                            kind: kind.into(),
                            message: "direction must be 3 numbers".into(),
                        });
                    }
                    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                    FourVector::spatial(c[0] / n, c[1] / n, c[2] / n)
                }
                _ => FourVector::spatial(1.0, 0.0, 0.0),
            };
            let base = match params.get("base").and_then(Value::as_array) {
                Some(a) if a.len() == 4 => {
                    let c: Vec<f64> = a.iter().filter_map(Value::as_f64).collect();
                    FourVector::new(c[0], c[1], c[2], c[3])
                }
                _ => FourVector::ZERO,
            };
            Ok(Worldline::new(Arc::new(InertialLine { rapidity: eta, direction: dir, base })))
        }
        "rindler" => {
            let a = getf("accel", None)?;
            if a <= 0.0 {
                return Err(WorldlineError::BadParams {
                    kind: kind.into(),
                    message: "accel must be positive".into(),
                });
            }
            Ok(Worldline::new(Arc::new(RindlerLine { accel: a })))
        }
        "circular" => {
            let r = getf("radius", None)?;
            let om = getf("omega", None)?;
            if r * om.abs() >= 1.0 {
                return Err(WorldlineError::BadParams {
                    kind: kind.into(),
                    message: format!("superluminal: R*Omega = {} >= 1", r * om.abs()),
                });
            }
            Ok(Worldline::new(Arc::new(CircularLine { radius: r, omega: om })))
        }
        "tabulated" => {
            let csv = params.get("csv").and_then(Value::as_str).ok_or_else(|| {
                WorldlineError::BadParams {
                    kind: kind.into(),
                    message: "missing 'csv' text".into(),
                }
            })?;
            let max_gap = getf("max_gap", Some(0.25))?;
            Ok(Worldline::new(Arc::new(TabulatedLine::from_csv(
                csv,
                max_gap,
                "tabulated(csv)".into(),
            )?)))
        }
        other => Err(WorldlineError::UnknownKind(other.to_string())),
    }
}

pub fn worldline_kinds() -> &'static [&'static str] {
    &["inertial", "rindler", "circular", "tabulated"]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rindler(a: f64) -> Worldline {
        Worldline::new(Arc::new(RindlerLine { accel: a }))
    }

    #[test]
    fn rindler_at_origin() {
        let w = rindler(1.0);
        let (x, v) = w.evaluate(0.0).unwrap();
        assert!((x - FourVector::new(0.0, 1.0, 0.0, 0.0)).euclidean_norm() < 1e-15);
        assert!((v - FourVector::new(1.0, 0.0, 0.0, 0.0)).euclidean_norm() < 1e-15);
    }

    #[test]
    fn inertial_at_rest_evaluates_to_identity_trajectory() {
        let w = Worldline::new(Arc::new(InertialLine::at_rest()));
        let (x, _) = w.evaluate(5.0).unwrap();
        assert!((x - FourVector::new(5.0, 0.0, 0.0, 0.0)).euclidean_norm() < 1e-15);
    }

    #[test]
    fn rindler_closed_form_event() {
        // independent high-precision evaluation of the closed form at a=2, tau=1
        let w = rindler(2.0);
        let (x, _) = w.evaluate(1.0).unwrap();
        assert!((x.t - 2.0_f64.sinh() / 2.0).abs() < 1e-15);
        assert!((x.x - 2.0_f64.cosh() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let samples = (0..20)
            .map(|i| {
                let tau = i as f64 * 0.1;
                (tau, FourVector::new(tau, 0.0, 0.0, 0.0), FourVector::new(1.0, 0.0, 0.0, 0.0))
            })
            .collect::<Vec<_>>();
        let line = TabulatedLine::new(
            samples.iter().map(|s| s.0).collect(),
            samples.iter().map(|s| s.1).collect(),
            samples.iter().map(|s| s.2).collect(),
            0.25,
            "test".into(),
        )
        .unwrap();
        let w = Worldline::new(Arc::new(line));
        assert!(matches!(w.evaluate(5.0), Err(WorldlineError::OutOfDomain { .. })));
    }

    #[test]
    fn tabulated_gap_detection() {
        let taus = vec![0.0, 0.1, 0.9, 1.0];
        let ev: Vec<FourVector> = taus.iter().map(|&t| FourVector::new(t, 0.0, 0.0, 0.0)).collect();
        let vel = vec![FourVector::new(1.0, 0.0, 0.0, 0.0); 4];
        assert!(matches!(
            TabulatedLine::new(taus, ev, vel, 0.25, "gap".into()),
            Err(WorldlineError::Gap { index: 2, .. })
        ));
    }

    #[test]
    fn proper_time_norm_on_random_parameters() {
        let curves = [rindler(1.0), rindler(2.0), Worldline::new(Arc::new(InertialLine::at_rest()))];
        let mut s = 0x243f_6a88_85a3_08d3u64;
        for w in &curves {
            for _ in 0..100 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let tau = ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 6.0;
                let (_, v) = w.evaluate(tau).unwrap();
                assert!((v.dot(&v) + 1.0).abs() <= PROPER_TIME_TOL);
            }
        }
    }

    #[test]
    fn circular_proper_time_matches_closed_form() {
        let w = Worldline::new(Arc::new(CircularLine { radius: 0.5, omega: 1.0 }));
        // tau(t) = t sqrt(1 - R^2 Omega^2) = t sqrt(0.75), from t=0
        let tau = w.proper_time_of(3.0).unwrap() - w.proper_time_of(0.0).unwrap();
        assert!((tau - 3.0 * 0.75f64.sqrt()).abs() < 1e-10);
        let p = w.reparametrize_proper_time().unwrap();
        let (_, v) = p.evaluate(1.3).unwrap();
        assert!((v.dot(&v) + 1.0).abs() < 1e-10);
        // same path: event at proper time tau(t) equals event at coordinate t
        let t = 2.0;
        let tau_t = t * 0.75f64.sqrt();
        let (x1, _) = p.evaluate(tau_t).unwrap();
        let x0 = CircularLine { radius: 0.5, omega: 1.0 }.event(t);
        assert!((x1 - x0).euclidean_norm() < 1e-8);
    }

    #[test]
    fn inertial_coordinate_time_reparametrization() {
        // coordinate-time inertial curve with rapidity eta: tau(t) = t / cosh(eta)
        struct CoordInertial {
            eta: f64,
        }
        impl Trajectory for CoordInertial {
            fn kind(&self) -> &'static str {
                "inertial"
            }
            fn label(&self) -> String {
                "coord-inertial".into()
            }
            fn domain(&self) -> (f64, f64) {
                (-50.0, 50.0)
            }
            fn parametrization(&self) -> Parametrization {
                Parametrization::CoordinateTime
            }
            fn event(&self, t: f64) -> FourVector {
                FourVector::new(t, t * self.eta.tanh(), 0.0, 0.0)
            }
            fn velocity(&self, _t: f64) -> FourVector {
                FourVector::new(1.0, self.eta.tanh(), 0.0, 0.0)
            }
            fn is_inertial(&self) -> bool {
                true
            }
        }
        let eta = 0.8;
        let w = Worldline::new(Arc::new(CoordInertial { eta }));
        let dtau =
            w.proper_time_of(4.0).unwrap() - w.proper_time_of(0.0).unwrap();
        assert!((dtau - 4.0 / eta.cosh()).abs() < 1e-10);
    }

    #[test]
    fn proper_time_reparametrization_is_idempotent() {
        let w = rindler(1.0);
        let p = w.reparametrize_proper_time().unwrap();
        for tau in [-1.0, 0.3, 2.0] {
            let (x0, v0) = w.evaluate(tau).unwrap();
            let (x1, v1) = p.evaluate(tau).unwrap();
            assert!((x0 - x1).euclidean_norm() < 1e-12);
            assert!((v0 - v1).euclidean_norm() < 1e-12);
        }
    }

    #[test]
    fn tetrads_are_orthonormal_on_random_parameters() {
        let curves = [
            rindler(1.0),
            Worldline::new(Arc::new(InertialLine::at_rest())),
            Worldline::new(Arc::new(CircularLine { radius: 0.5, omega: 1.0 }))
                .reparametrize_proper_time()
                .unwrap(),
        ];
        let mut s = 0x1234_5678_9abc_def0u64;
        for w in &curves {
            for rule in [TransportRule::FermiWalker, TransportRule::ParallelLab] {
                for _ in 0..100 {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let tau = ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 4.0;
                    let tet = w.tetrad_at(rule, tau).unwrap();
                    assert!(
                        tet.orthonormality_defect() < ORTHONORMALITY_TOL,
                        "{} {:?} tau={tau}: defect {}",
                        w.label(),
                        rule,
                        tet.orthonormality_defect()
                    );
                    let (_, v) = w.evaluate(tau).unwrap();
                    assert!((tet.e[0] - v).euclidean_norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn rindler_tetrad_is_the_boost_pair() {
        let w = rindler(1.0);
        let tet0 = w.tetrad_at(TransportRule::FermiWalker, 0.0).unwrap();
        assert!((tet0.e[0] - FourVector::new(1.0, 0.0, 0.0, 0.0)).euclidean_norm() < 1e-12);
        assert!((tet0.e[1] - FourVector::new(0.0, 1.0, 0.0, 0.0)).euclidean_norm() < 1e-12);
        // hand boost algebra at tau=1
        let tet1 = w.tetrad_at(TransportRule::FermiWalker, 1.0).unwrap();
        assert!(
            (tet1.e[0] - FourVector::new(1f64.cosh(), 1f64.sinh(), 0.0, 0.0)).euclidean_norm()
                < 1e-12
        );
        assert!(
            (tet1.e[1] - FourVector::new(1f64.sinh(), 1f64.cosh(), 0.0, 0.0)).euclidean_norm()
                < 1e-12
        );
    }

    #[test]
    fn fermi_walker_ode_matches_rindler_closed_form() {
        // force the ODE path by bypassing the closed form: integrate the
        // transport law on the rindler curve directly
        let w = rindler(1.0);
        let tau = 0.8;
        let via_ode = w.fermi_walker_transported(tau).unwrap();
        let closed = w.closed_form_fw_tetrad(tau).unwrap();
        for mu in 0..4 {
            assert!(
                (via_ode.e[mu] - closed.e[mu]).euclidean_norm() < 1e-9,
                "component {mu}"
            );
        }
    }

    #[test]
    fn registry_rejects_bad_parameters() {
        assert!(matches!(
            build_worldline("circular", &serde_json::json!({"radius": 2.0, "omega": 1.0})),
            Err(WorldlineError::BadParams { .. })
        ));
        assert!(matches!(
            build_worldline("warp", &Value::Null),
            Err(WorldlineError::UnknownKind(_))
        ));
        assert!(build_worldline("rindler", &serde_json::json!({"accel": 1.0})).is_ok());
    }

    #[test]
    fn csv_roundtrip_for_tabulated_curves() {
        let mut csv = String::from("tau,t,x,y,z,ut,ux,uy,uz\n");
        let eta: f64 = 0.3;
        for i in 0..40 {
            let tau = -1.0 + i as f64 * 0.05;
            csv.push_str(&format!(
                "{},{},{},0,0,{},{},0,0\n",
                tau,
                tau * eta.cosh(),
                tau * eta.sinh(),
                eta.cosh(),
                eta.sinh()
            ));
        }
        let w = build_worldline("tabulated", &serde_json::json!({"csv": csv})).unwrap();
        let (x, v) = w.evaluate(0.5).unwrap();
        assert!((x.t - 0.5 * eta.cosh()).abs() < 1e-10);
        assert!((v.dot(&v) + 1.0).abs() < 1e-8);
    }
}
