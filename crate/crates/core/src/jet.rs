//! Test distributions supported on a worldline, stored in the canonical form:
//! spatial multi-index coefficients a_alpha(t) along the adapted frame.
//! Pre-canonical first-order data lives in `GeneralJet` and is folded into
//! canonical form by partial integration of the time-derivative part.

use crate::geometry::FourVector;
use crate::profile::{
    build_profile, ClosureProfile, CoefficientProfile, Profile, ProfileSpec, ScaledProfile,
};
use crate::quad::{self, gl16, QuadError};
use crate::worldline::{TransportRule, Worldline, WorldlineError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Spatial multi-index (alpha1, alpha2, alpha3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    pub fn order(&self) -> usize {
        self.0.iter().map(|&v| v as usize).sum()
    }

    pub fn unit(i: usize) -> MultiIndex {
        let mut a = [0u8; 3];
        a[i] = 1;
        MultiIndex(a)
    }

    /// All multi-indices with |alpha| <= l, lexicographic.
    pub fn up_to(l: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for a1 in 0..=l {
            for a2 in 0..=l - a1 {
                for a3 in 0..=l - a1 - a2 {
                    out.push(MultiIndex([a1 as u8, a2 as u8, a3 as u8]));
                }
            }
        }
        out
    }

    /// xi^alpha for spatial xi.
    pub fn monomial(&self, xi: &FourVector) -> f64 {
        xi.x.powi(self.0[0] as i32) * xi.y.powi(self.0[1] as i32) * xi.z.powi(self.0[2] as i32)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum JetError {
    #[error("test function does not provide derivatives up to order {needed}")]
    DerivativeOrderUnavailable { needed: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("operation requires an inertial worldline at rest, got {0}")]
    NonInertial(String),
    #[error("direction field is not decomposable in the frame at tau = {0}")]
    NotDecomposable(f64),
    #[error("mollification scale must be positive, got {0}")]
    BadScale(f64),
    #[error("shifted support [{lo:.3}, {hi:.3}] leaves the worldline domain")]
    ShiftLeavesDomain { lo: f64, hi: f64 },
    #[error("order {order} not supported on non-inertial curves (limit is 1)")]
    OrderTooHigh { order: usize },
    #[error("distributions live on different worldlines: {0} vs {1}")]
    WorldlineMismatch(String, String),
    #[error("bad distribution spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Worldline(#[from] WorldlineError),
    #[error(transparent)]
    Profile(#[from] crate::profile::ProfileError),
}

/// Weighted sum of coefficient profiles attached to one multi-index.
#[derive(Clone)]
pub struct Coefficient {
    pub parts: Vec<(Complex64, Profile)>,
}

impl Coefficient {
    pub fn single(p: Profile) -> Self {
        Coefficient { parts: vec![(Complex64::new(1.0, 0.0), p)] }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.parts.iter().map(|(w, p)| w * p.eval(t)).sum()
    }

    pub fn deriv(&self, t: f64) -> Complex64 {
        self.parts.iter().map(|(w, p)| w * p.deriv(t)).sum()
    }

    pub fn transform(&self, rho: f64) -> Complex64 {
        self.parts.iter().map(|(w, p)| w * p.transform(rho)).sum()
    }

    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, p) in &self.parts {
            let (a, b) = p.support();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    pub fn is_real(&self) -> bool {
        self.parts.iter().all(|(w, p)| w.im == 0.0 && p.is_real())
    }

    pub fn shifted(&self, dt: f64) -> Coefficient {
        Coefficient { parts: self.parts.iter().map(|(w, p)| (*w, p.shifted(dt))).collect() }
    }

    pub fn scaled(&self, c: Complex64) -> Coefficient {
        Coefficient { parts: self.parts.iter().map(|(w, p)| (c * w, p.clone())).collect() }
    }

    fn merged(&self, other: &Coefficient) -> Coefficient {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Coefficient { parts }
    }
}

/// Smooth spacetime test function with directional spatial derivatives.
pub trait TestFunction {
    fn value(&self, x: FourVector) -> Complex64;
    /// Derivative along the listed directions (repeated per derivative).
    fn derivative(&self, x: FourVector, dirs: &[FourVector]) -> Complex64;
    /// Highest available derivative order, None = unlimited.
    fn max_order(&self) -> Option<usize> {
        None
    }
}

/// Plane wave e^{i(rho t - xi.x)} for the covector k = (rho, xi).
pub struct PlaneWave {
    pub k: FourVector,
}

impl PlaneWave {
    /// rho t - xi.x for an event x.
    #[inline]
    pub fn phase(&self, x: &FourVector) -> f64 {
        self.k.t * x.t - self.k.spatial_dot(x)
    }
}

impl TestFunction for PlaneWave {
    fn value(&self, x: FourVector) -> Complex64 {
        Complex64::new(0.0, self.phase(&x)).exp()
    }
    fn derivative(&self, x: FourVector, dirs: &[FourVector]) -> Complex64 {
        let mut f = self.value(x);
        for d in dirs {
            f *= Complex64::new(0.0, self.phase(d));
        }
        f
    }
}

/// Real polynomial in (t, x, y, z).
pub struct Polynomial4 {
    /// (coefficient, powers of t,x,y,z)
    pub terms: Vec<(f64, [u32; 4])>,
}

impl Polynomial4 {
    fn eval_term(c: f64, pw: &[u32; 4], x: &FourVector) -> f64 {
        c * x.t.powi(pw[0] as i32)
            * x.x.powi(pw[1] as i32)
            * x.y.powi(pw[2] as i32)
            * x.z.powi(pw[3] as i32)
    }

    fn gradient_terms(terms: &[(f64, [u32; 4])], mu: usize) -> Vec<(f64, [u32; 4])> {
        terms
            .iter()
            .filter(|(_, pw)| pw[mu] > 0)
            .map(|(c, pw)| {
                let mut q = *pw;
                q[mu] -= 1;
                (c * pw[mu] as f64, q)
            })
            .collect()
    }
}

impl TestFunction for Polynomial4 {
    fn value(&self, x: FourVector) -> Complex64 {
        Complex64::new(
            self.terms.iter().map(|(c, pw)| Self::eval_term(*c, pw, &x)).sum::<f64>(),
            0.0,
        )
    }
    fn derivative(&self, x: FourVector, dirs: &[FourVector]) -> Complex64 {
        let mut terms = self.terms.clone();
        for d in dirs {
            let mut next: Vec<(f64, [u32; 4])> = Vec::new();
            for mu in 0..4 {
                let comp = d.component(mu);
                if comp != 0.0 {
                    next.extend(
                        Self::gradient_terms(&terms, mu).into_iter().map(|(c, pw)| (c * comp, pw)),
                    );
                }
            }
            terms = next;
        }
        Complex64::new(terms.iter().map(|(c, pw)| Self::eval_term(*c, pw, &x)).sum::<f64>(), 0.0)
    }
}

/// Closure test function with nested central differences, step stated.
pub struct NumericTestFunction<F: Fn(FourVector) -> Complex64> {
    pub f: F,
    pub step: f64,
    pub max_order: usize,
}

impl<F: Fn(FourVector) -> Complex64> NumericTestFunction<F> {
    fn diff(&self, x: FourVector, dirs: &[FourVector]) -> Complex64 {
        if dirs.is_empty() {
            return (self.f)(x);
        }
        let d = dirs[dirs.len() - 1].scale(self.step);
        let rest = &dirs[..dirs.len() - 1];
        (self.diff(x + d, rest) - self.diff(x - d, rest)) / (2.0 * self.step)
    }
}

impl<F: Fn(FourVector) -> Complex64> TestFunction for NumericTestFunction<F> {
    fn value(&self, x: FourVector) -> Complex64 {
        (self.f)(x)
    }
    fn derivative(&self, x: FourVector, dirs: &[FourVector]) -> Complex64 {
        self.diff(x, dirs)
    }
    fn max_order(&self) -> Option<usize> {
        Some(self.max_order)
    }
}

/// Canonical-form distribution in D^l(gamma): spatial multi-indices only.
#[derive(Clone)]
pub struct JetDistribution {
    worldline: Worldline,
    order: usize,
    terms: Vec<(MultiIndex, Coefficient)>,
    real: bool,
}

impl JetDistribution {
    pub fn new(
        worldline: Worldline,
        terms: Vec<(MultiIndex, Coefficient)>,
    ) -> Result<Self, JetError> {
        if worldline.parametrization() != crate::worldline::Parametrization::ProperTime {
            return Err(JetError::BadSpec(
                "jet distributions require proper-time parametrized worldlines".into(),
            ));
        }
        let mut merged: Vec<(MultiIndex, Coefficient)> = Vec::new();
        for (alpha, coeff) in terms {
            if let Some((_, c)) = merged.iter_mut().find(|(a, _)| *a == alpha) {
                *c = c.merged(&coeff);
            } else {
                merged.push((alpha, coeff));
            }
        }
        // drop terms that vanish identically (sampled), keeping at least one
        let scale = merged
            .iter()
            .map(|(_, c)| sampled_peak(c))
            .fold(0.0, f64::max);
        if scale > 0.0 {
            merged.retain(|(_, c)| sampled_peak(c) > 1e-13 * scale);
        }
        if merged.is_empty() {
            merged.push((MultiIndex::ZERO, Coefficient { parts: Vec::new() }));
        }
        merged.sort_by_key(|(a, _)| *a);
        let order = merged.iter().map(|(a, _)| a.order()).max().unwrap_or(0);
        let real = merged.iter().all(|(_, c)| c.is_real());
        Ok(JetDistribution { worldline, order, terms: merged, real })
    }

    /// Order-0 distribution with a single coefficient profile.
    pub fn order0(worldline: Worldline, profile: Profile) -> Result<Self, JetError> {
        JetDistribution::new(worldline, vec![(MultiIndex::ZERO, Coefficient::single(profile))])
    }

    pub fn worldline(&self) -> &Worldline {
        &self.worldline
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &[(MultiIndex, Coefficient)] {
        &self.terms
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Hull of the coefficient supports in the curve parameter.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (_, c) in &self.terms {
            let (a, b) = c.support();
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo, hi)
    }

    /// a T + b S on a common worldline.
    pub fn linear_combination(
        a: Complex64,
        t: &JetDistribution,
        b: Complex64,
        s: &JetDistribution,
    ) -> Result<JetDistribution, JetError> {
        if t.worldline.label() != s.worldline.label() {
            return Err(JetError::WorldlineMismatch(t.worldline.label(), s.worldline.label()));
        }
        let mut terms: Vec<(MultiIndex, Coefficient)> =
            t.terms.iter().map(|(i, c)| (*i, c.scaled(a))).collect();
        terms.extend(s.terms.iter().map(|(i, c)| (*i, c.scaled(b))));
        JetDistribution::new(t.worldline.clone(), terms)
    }

    /// T(f) = sum_alpha int a_alpha(t) D^alpha f(gamma(t)) dt, derivatives
    /// along the adapted spatial frame directions.
    pub fn evaluate_against(&self, f: &dyn TestFunction) -> Result<Complex64, JetError> {
        if let Some(maxo) = f.max_order() {
            if self.order > maxo {
                return Err(JetError::DerivativeOrderUnavailable { needed: self.order });
            }
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (alpha, coeff) in &self.terms {
            let (lo, hi) = coeff.support();
            if !lo.is_finite() || hi <= lo {
                continue;
            }
            let integrand = |t: f64| -> Complex64 {
                let (x, _) = self.worldline.evaluate(t).expect("support inside domain");
                let val = if alpha.order() == 0 {
                    f.value(x)
                } else {
                    let tet = self
                        .worldline
                        .tetrad_at(TransportRule::FermiWalker, t)
                        .expect("tetrad on support");
                    let mut dirs = Vec::with_capacity(alpha.order());
                    for i in 0..3 {
                        for _ in 0..alpha.0[i] {
                            dirs.push(tet.e[i + 1]);
                        }
                    }
                    f.derivative(x, &dirs)
                };
                coeff.eval(t) * val
            };
            total += quad::adaptive(lo, hi, 1e-12, 20_000, &integrand)?;
        }
        Ok(total)
    }

    /// Base event gamma(0) of an inertial rest-frame curve.
    fn rest_frame_base(&self) -> Result<FourVector, JetError> {
        let (base, u) = self.worldline.evaluate(0.0)?;
        let at_rest = (u - FourVector::new(1.0, 0.0, 0.0, 0.0)).euclidean_norm() < 1e-12;
        if !(self.worldline.is_inertial() && at_rest) {
            return Err(JetError::NonInertial(self.worldline.label()));
        }
        Ok(base)
    }

    /// That(rho, xi) = T(e^{i(rho t - xi.x)}) in closed form, inertial rest
    /// frame only: sum_alpha (-i)^{|alpha|} xi^alpha ahat_alpha(rho), times
    /// the base-event phase when the curve is offset from the origin.
    pub fn fourier_transform(&self, rho: f64, xi: [f64; 3]) -> Result<Complex64, JetError> {
        let base = self.rest_frame_base()?;
        let xiv = FourVector::spatial(xi[0], xi[1], xi[2]);
        let phase =
            Complex64::new(0.0, rho * base.t - xiv.spatial_dot(&base)).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, coeff) in &self.terms {
            let mi = Complex64::new(0.0, -1.0).powu(alpha.order() as u32);
            acc += mi * alpha.monomial(&xiv) * coeff.transform(rho);
        }
        Ok(acc * phase)
    }

    /// Direct quadrature of T against the plane wave e^{i(rho t - xi.x)};
    /// works on any worldline. Agrees with `fourier_transform` on inertial
    /// rest-frame curves.
    pub fn fourier_transform_numeric(&self, k: FourVector) -> Result<Complex64, JetError> {
        let wave = PlaneWave { k };
        let (lo, hi) = self.support();
        // phase rate along the curve: |d/dt phase(gamma(t))| = |phase(u(t))|
        let mut rate: f64 = 1.0;
        for i in 0..=16 {
            let t = lo + (hi - lo) * i as f64 / 16.0;
            if let Ok((_, u)) = self.worldline.evaluate(t) {
                rate = rate.max(wave.phase(&u).abs());
            }
        }
        let width = quad::oscillation_width(rate, (hi - lo) / 8.0);
        let mut total = Complex64::new(0.0, 0.0);
        for (alpha, coeff) in &self.terms {
            let (a, b) = coeff.support();
            total += quad::panels(gl16(), a, b, width, |t| {
                let (x, _) = self.worldline.evaluate(t).expect("support inside domain");
                let mut v = wave.value(x) * coeff.eval(t);
                if alpha.order() > 0 {
                    let tet = self
                        .worldline
                        .tetrad_at(TransportRule::FermiWalker, t)
                        .expect("tetrad on support");
                    for i in 0..3 {
                        for _ in 0..alpha.0[i] {
                            v *= Complex64::new(0.0, wave.phase(&tet.e[i + 1]));
                        }
                    }
                }
                v
            });
        }
        Ok(total)
    }

    /// Translate along the worldline by t with the given frame-transport
    /// rule: coefficients become a_alpha(. - t), re-expressed in the frame at
    /// the shifted parameter for first-order terms under the parallel rule.
    ///
    /// Under the fermi-walker rule the transport acts on the distinguished
    /// canonical representative as the jet of a genuine flow, so translations
    /// compose. The parallel rule moves each hop by exact parallel transport
    /// of the canonical frame directions; on accelerated curves this is not
    /// the tangent map of any flow (the velocity must map to the shifted
    /// velocity), so first-order translations compose only up to O(s t a^2).
    pub fn pushforward(
        &self,
        t: f64,
        rule: TransportRule,
    ) -> Result<JetDistribution, JetError> {
        let (lo, hi) = self.support();
        let (dlo, dhi) = self.worldline.domain();
        if lo + t < dlo || hi + t > dhi {
            return Err(JetError::ShiftLeavesDomain { lo: lo + t, hi: hi + t });
        }
        if self.order >= 2 && !self.worldline.is_inertial() {
            return Err(JetError::OrderTooHigh { order: self.order });
        }
        if self.order == 0 || self.worldline.is_inertial() || rule == TransportRule::FermiWalker {
            // adapted frame carried with the flow: plain coefficient shift
            let terms =
                self.terms.iter().map(|(a, c)| (*a, c.shifted(t))).collect::<Vec<_>>();
            return JetDistribution::new(self.worldline.clone(), terms);
        }
        // parallel-lab rule on a curved worldline, order 1: transported
        // directions keep their lab components and are re-expressed in the
        // frame at the shifted parameter
        let mut general = GeneralJet { worldline: self.worldline.clone(), terms: Vec::new() };
        for (alpha, coeff) in &self.terms {
            if alpha.order() == 0 {
                general.terms.push(GeneralJetTerm {
                    coeff: coeff.shifted(t),
                    direction: None,
                });
            } else {
                let i = (0..3).find(|&i| alpha.0[i] == 1).unwrap();
                let w = self.worldline.clone();
                general.terms.push(GeneralJetTerm {
                    coeff: coeff.shifted(t),
                    direction: Some(DirectionField::Closure(Arc::new(move |tau: f64| {
                        w.tetrad_at(TransportRule::FermiWalker, tau - t)
                            .expect("tetrad on shifted support")
                            .e[i + 1]
                    }))),
                });
            }
        }
        general.canonicalize()
    }

    pub fn to_spec(&self) -> JetDistributionSpec {
        let mut terms = Vec::new();
        for (alpha, coeff) in &self.terms {
            if coeff.parts.len() == 1 && (coeff.parts[0].0 - Complex64::new(1.0, 0.0)).norm() == 0.0
            {
                terms.push(TermSpec { alpha: alpha.0, coeff: coeff.parts[0].1.spec() });
            } else {
                // merge into one tabulated profile
                let merged = ScaledProfile {
                    weight: Complex64::new(1.0, 0.0),
                    inner: Arc::new(ClosureProfile {
                        support: coeff.support(),
                        real: coeff.is_real(),
                        f: {
                            let c = coeff.clone();
                            Arc::new(move |t| c.eval(t))
                        },
                        df: {
                            let c = coeff.clone();
                            Arc::new(move |t| c.deriv(t))
                        },
                    }),
                };
                terms.push(TermSpec { alpha: alpha.0, coeff: merged.spec() });
            }
        }
        JetDistributionSpec {
            order: self.order,
            worldline_id: self.worldline.label(),
            terms,
            real: self.real,
        }
    }

    pub fn from_spec(spec: &JetDistributionSpec, worldline: Worldline) -> Result<Self, JetError> {
        let mut terms = Vec::new();
        for t in &spec.terms {
            let p = build_profile(&t.coeff)?;
            terms.push((MultiIndex(t.alpha), Coefficient::single(p)));
        }
        let d = JetDistribution::new(worldline, terms)?;
        if d.order != spec.order {
            return Err(JetError::BadSpec(format!(
                "declared order {} does not match terms (max |alpha| = {})",
                spec.order, d.order
            )));
        }
        Ok(d)
    }
}

/// JSON schema for a distribution: order, worldline reference, terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetDistributionSpec {
    pub order: usize,
    pub worldline_id: String,
    pub terms: Vec<TermSpec>,
    pub real: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub alpha: [u8; 3],
    pub coeff: ProfileSpec,
}

/// Direction field of a pre-canonical first-order term.
#[derive(Clone)]
pub enum DirectionField {
    Constant(FourVector),
    Closure(Arc<dyn Fn(f64) -> FourVector + Send + Sync>),
}

impl DirectionField {
    pub fn at(&self, tau: f64) -> FourVector {
        match self {
            DirectionField::Constant(v) => *v,
            DirectionField::Closure(f) => f(tau),
        }
    }
}

/// One pre-canonical term: coefficient times (at most one) derivative along
/// a direction field.
#[derive(Clone)]
pub struct GeneralJetTerm {
    pub coeff: Coefficient,
    /// None: no derivative. Some(d): one derivative along d(tau).
    pub direction: Option<DirectionField>,
}

/// Distribution in the non-unique first-order form.
#[derive(Clone)]
pub struct GeneralJet {
    pub worldline: Worldline,
    pub terms: Vec<GeneralJetTerm>,
}

impl GeneralJet {
    /// Fold time-derivative components into order zero by partial
    /// integration; spatial components become canonical coefficients.
    pub fn canonicalize(&self) -> Result<JetDistribution, JetError> {
        let mut terms: Vec<(MultiIndex, Coefficient)> = Vec::new();
        for term in &self.terms {
            match &term.direction {
                None => terms.push((MultiIndex::ZERO, term.coeff.clone())),
                Some(dir) => {
                    let (lo, hi) = term.coeff.support();
                    // validate decomposability on the support
                    for k in 0..=8 {
                        let tau = lo + (hi - lo) * k as f64 / 8.0;
                        let tet = self.worldline.tetrad_at(TransportRule::FermiWalker, tau)?;
                        let d = dir.at(tau);
                        if !d.is_finite() || !tet.e[0].is_finite() {
                            return Err(JetError::NotDecomposable(tau));
                        }
                    }
                    let real = term.coeff.is_real();
                    // spatial components d^i = g(d, e_i); the frame products
                    // are sampled once onto a dense grid so later quadratures
                    // stay cheap
                    for i in 1..=3usize {
                        let w = self.worldline.clone();
                        let dirf = dir.clone();
                        let coeff = term.coeff.clone();
                        let f = Arc::new(move |tau: f64| -> Complex64 {
                            let tet = w
                                .tetrad_at(TransportRule::FermiWalker, tau)
                                .expect("tetrad inside domain");
                            coeff.eval(tau) * dirf.at(tau).dot(&tet.e[i])
                        });
                        let df = numeric_derivative(f.clone());
                        let closure = ClosureProfile { support: (lo, hi), real, f, df };
                        terms.push((
                            MultiIndex::unit(i - 1),
                            Coefficient::single(Arc::new(crate::profile::tabulate(
                                &closure, 8193,
                            ))),
                        ));
                    }
                    // time component d^0 = -g(d, e0): a d/dtau integrates by
                    // parts into -(a d^0)' at order zero
                    {
                        let w = self.worldline.clone();
                        let dirf = dir.clone();
                        let coeff = term.coeff.clone();
                        let prod = Arc::new(move |tau: f64| -> Complex64 {
                            let tet = w
                                .tetrad_at(TransportRule::FermiWalker, tau)
                                .expect("tetrad inside domain");
                            coeff.eval(tau) * (-dirf.at(tau).dot(&tet.e[0]))
                        });
                        let dprod = numeric_derivative(prod);
                        let f = Arc::new(move |tau: f64| -dprod(tau));
                        let df = numeric_derivative(f.clone());
                        let closure = ClosureProfile { support: (lo, hi), real, f, df };
                        terms.push((
                            MultiIndex::ZERO,
                            Coefficient::single(Arc::new(crate::profile::tabulate(
                                &closure, 8193,
                            ))),
                        ));
                    }
                }
            }
        }
        JetDistribution::new(self.worldline.clone(), terms)
    }

    /// Evaluate the pre-canonical form directly (reference route for the
    /// canonicalization soundness battery).
    pub fn evaluate_against(&self, f: &dyn TestFunction) -> Result<Complex64, JetError> {
        let mut total = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let (lo, hi) = term.coeff.support();
            let integrand = |t: f64| -> Complex64 {
                let (x, _) = self.worldline.evaluate(t).expect("support inside domain");
                let v = match &term.direction {
                    None => f.value(x),
                    Some(d) => f.derivative(x, &[d.at(t)]),
                };
                term.coeff.eval(t) * v
            };
            total += quad::adaptive(lo, hi, 1e-12, 20_000, &integrand)?;
        }
        Ok(total)
    }
}

fn sampled_peak(c: &Coefficient) -> f64 {
    let (a, b) = c.support();
    if !a.is_finite() || b <= a {
        return 0.0;
    }
    (0..=48).map(|i| c.eval(a + (b - a) * i as f64 / 48.0).norm()).fold(0.0, f64::max)
}

/// Five-point central difference of a smooth closure.
fn numeric_derivative(
    f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
) -> Arc<dyn Fn(f64) -> Complex64 + Send + Sync> {
    Arc::new(move |t: f64| {
        let h = 1e-4;
        (f(t - 2.0 * h) - f(t - h) * 8.0 + f(t + h) * 8.0 - f(t + 2.0 * h)) / (12.0 * h)
    })
}

/// Transform-space mollifier profile: radial in the covector, identically 1
/// on |k| <= scale/2, smooth compactly supported cutoff at |k| = scale.
/// The underlying spacetime mollifier has unit integral (profile(0) = 1).
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    pub scale: f64,
}

impl Mollifier {
    pub fn new(scale: f64) -> Result<Self, JetError> {
        if scale <= 0.0 {
            return Err(JetError::BadScale(scale));
        }
        Ok(Mollifier { scale })
    }

    /// mhat(k / scale) for the covector k.
    pub fn multiplier(&self, k: FourVector) -> f64 {
        let u = k.euclidean_norm() / self.scale;
        if u <= 0.5 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            let v = 2.0 * u - 1.0;
            (1.0 - 1.0 / (1.0 - v * v)).exp()
        }
    }
}
