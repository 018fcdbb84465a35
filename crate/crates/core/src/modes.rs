//! One-particle structure on the mass shell: radial Gauss-Legendre panels
//! times a spherical-harmonic angular basis. The K map restricts distribution
//! transforms to the shell (lambda(xi), xi) with density (2pi)^{-3/2}/sqrt(lambda).

use crate::geometry::FourVector;
use crate::jet::{JetDistribution, JetError, Mollifier};
use crate::profile::ConjugatedProfile;
use crate::quad::{self, gl16, GaussRule};
use crate::special::{spherical_harmonics, ylm_index};
use crate::worldline::TransportRule;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

const K_PREFACTOR: f64 = 0.06349363593424097; // (2 pi)^{-3/2}

#[derive(Debug, thiserror::Error)]
pub enum ModeError {
    #[error("angular resolution l_max = {l_max} below distribution order {order}")]
    LMaxTooSmall { l_max: usize, order: usize },
    #[error("vectors live on different grids")]
    GridMismatch,
    #[error("operation requires real distributions")]
    NonRealInput,
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("order {order} exceeds the general-curve limit 1 on {worldline}")]
    OrderTooHigh { order: usize, worldline: String },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Worldline(#[from] crate::worldline::WorldlineError),
}

/// Angular product rule: Gauss-Legendre in cos(theta) times uniform phi,
/// exact for spherical polynomials of degree <= 2 l_max + 1.
struct AngularGrid {
    directions: Vec<FourVector>,
    /// conj(Y_lm) * weight at each node, (l_max+1)^2 per node
    ylm_w: Vec<Vec<Complex64>>,
}

impl AngularGrid {
    fn new(l_max: usize) -> Self {
        let rule = GaussRule::new(l_max + 1);
        let n_phi = 2 * l_max + 2;
        let mut directions = Vec::new();
        let mut ylm_w = Vec::new();
        for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
            let s = (1.0 - u * u).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_phi as f64;
                let dir = FourVector::spatial(s * phi.cos(), s * phi.sin(), *u);
                let w = wu * 2.0 * std::f64::consts::PI / n_phi as f64;
                let ys = spherical_harmonics(l_max, *u, phi);
                ylm_w.push(ys.iter().map(|y| y.conj() * w).collect());
                directions.push(dir);
            }
        }
        AngularGrid { directions, ylm_w }
    }
}

/// Mass, radial nodes/weights on [0, r_max] and the angular basis.
pub struct ModeGrid {
    pub mass: f64,
    pub r_max: f64,
    pub radial_panels: usize,
    pub l_max: usize,
    r: Vec<f64>,
    w: Vec<f64>,
    lambda: Vec<f64>,
    angular: AngularGrid,
}

impl ModeGrid {
    pub fn new(mass: f64, r_max: f64, radial_panels: usize, l_max: usize) -> Result<Arc<Self>, ModeError> {
        if !(r_max > 0.0) {
            return Err(ModeError::BadGrid(format!("r_max must be positive, got {r_max}")));
        }
        if mass < 0.0 {
            return Err(ModeError::BadGrid(format!("mass must be nonnegative, got {mass}")));
        }
        if radial_panels == 0 {
            return Err(ModeError::BadGrid("need at least one radial panel".into()));
        }
        let rule = gl16();
        let mut r = Vec::with_capacity(radial_panels * rule.len());
        let mut w = Vec::with_capacity(radial_panels * rule.len());
        let h = r_max / radial_panels as f64;
        for p in 0..radial_panels {
            let (a, b) = (p as f64 * h, (p + 1) as f64 * h);
            for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                r.push(0.5 * (a + b) + 0.5 * (b - a) * x);
                w.push(0.5 * (b - a) * wx);
            }
        }
        let lambda = r.iter().map(|&ri| (ri * ri + mass * mass).sqrt()).collect();
        Ok(Arc::new(ModeGrid {
            mass,
            r_max,
            radial_panels,
            l_max,
            r,
            w,
            lambda,
            angular: AngularGrid::new(l_max),
        }))
    }

    /// Default radial extent for a distribution: the radius where every
    /// coefficient transform has fallen below 1e-12 of its peak, doubled.
    pub fn suggested_r_max(mass: f64, dist: &JetDistribution) -> f64 {
        let mut r_needed = 1.0_f64;
        for (_, coeff) in dist.terms() {
            let peak = (0..200)
                .map(|i| coeff.transform(i as f64 * 0.25).norm())
                .fold(0.0, f64::max);
            let mut r = 0.25;
            while r < 400.0 {
                let lam = (r * r + mass * mass).sqrt();
                if coeff.transform(lam).norm() < 1e-12 * peak {
                    break;
                }
                r += 0.25;
            }
            r_needed = r_needed.max(r);
        }
        2.0 * r_needed
    }

    pub fn n_radial(&self) -> usize {
        self.r.len()
    }

    pub fn radial_nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    fn block(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }
}

/// Complex coefficients c[r-node][l][m]; KT(xi) = sum c Y_lm(xi/|xi|).
#[derive(Clone)]
pub struct OneParticleVector {
    grid: Arc<ModeGrid>,
    coeff: Vec<Complex64>,
}

impl OneParticleVector {
    pub fn zero(grid: Arc<ModeGrid>) -> Self {
        let n = grid.n_radial() * grid.block();
        OneParticleVector { grid, coeff: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn grid(&self) -> &Arc<ModeGrid> {
        &self.grid
    }

    pub fn coefficient(&self, node: usize, l: usize, m: i64) -> Complex64 {
        self.coeff[node * self.grid.block() + ylm_index(l, m)]
    }

    pub fn norm_squared(&self) -> f64 {
        let b = self.grid.block();
        let mut acc = 0.0;
        for (i, (w, r)) in self.grid.w.iter().zip(&self.grid.r).enumerate() {
            let s: f64 = self.coeff[i * b..(i + 1) * b].iter().map(|c| c.norm_sqr()).sum();
            acc += w * r * r * s;
        }
        acc
    }

    pub fn inner(&self, other: &OneParticleVector) -> Result<Complex64, ModeError> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(ModeError::GridMismatch);
        }
        let b = self.grid.block();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (w, r)) in self.grid.w.iter().zip(&self.grid.r).enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in i * b..(i + 1) * b {
                s += self.coeff[k].conj() * other.coeff[k];
            }
            acc += w * r * r * s;
        }
        Ok(acc)
    }

    /// ||P_l u||^2 for l = 0..l_max.
    pub fn angular_spectrum(&self) -> Vec<f64> {
        let b = self.grid.block();
        let mut out = vec![0.0; self.grid.l_max + 1];
        for (i, (w, r)) in self.grid.w.iter().zip(&self.grid.r).enumerate() {
            for l in 0..=self.grid.l_max {
                let mut s = 0.0;
                for m in -(l as i64)..=(l as i64) {
                    s += self.coeff[i * b + ylm_index(l, m)].norm_sqr();
                }
                out[l] += w * r * r * s;
            }
        }
        out
    }

    /// Pointwise multiplication by the mollifier on the mass shell: the
    /// covector at radial node r has euclidean length sqrt(lambda^2 + r^2),
    /// independent of direction.
    pub fn mollified(&self, m: &Mollifier) -> OneParticleVector {
        let b = self.grid.block();
        let mut coeff = self.coeff.clone();
        for (i, (r, lam)) in self.grid.r.iter().zip(&self.grid.lambda).enumerate() {
            let factor = m.multiplier(FourVector::new(*lam, *r, 0.0, 0.0));
            for c in coeff[i * b..(i + 1) * b].iter_mut() {
                *c *= factor;
            }
        }
        OneParticleVector { grid: self.grid.clone(), coeff }
    }

    pub fn sub(&self, other: &OneParticleVector) -> Result<OneParticleVector, ModeError> {
        if !Arc::ptr_eq(&self.grid, &other.grid) {
            return Err(ModeError::GridMismatch);
        }
        let coeff = self.coeff.iter().zip(&other.coeff).map(|(a, b)| a - b).collect();
        Ok(OneParticleVector { grid: self.grid.clone(), coeff })
    }

    /// CSV rows r,l,m,re,im (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,l,m,re,im\n");
        let b = self.grid.block();
        for (i, r) in self.grid.r.iter().enumerate() {
            for l in 0..=self.grid.l_max {
                for m in -(l as i64)..=(l as i64) {
                    let c = self.coeff[i * b + ylm_index(l, m)];
                    out.push_str(&format!("{:.16e},{l},{m},{:.16e},{:.16e}\n", r, c.re, c.im));
                }
            }
        }
        out
    }
}

/// Closed-form K map on an inertial rest-frame curve at the spatial origin:
/// KT(xi) = (2pi)^{-3/2} sum (-i)^{|a|} ahat_a(lambda) xi^a / sqrt(lambda),
/// angular content projected exactly (the quadrature is exact at this degree).
pub fn k_map_inertial(
    dist: &JetDistribution,
    grid: &Arc<ModeGrid>,
) -> Result<OneParticleVector, ModeError> {
    if grid.l_max < dist.order() {
        return Err(ModeError::LMaxTooSmall { l_max: grid.l_max, order: dist.order() });
    }
    let (base, u) = dist.worldline().evaluate(0.0)?;
    let at_origin = (u - FourVector::new(1.0, 0.0, 0.0, 0.0)).euclidean_norm() < 1e-12
        && base.spatial_norm() < 1e-12;
    if !(dist.worldline().is_inertial() && at_origin) {
        return Err(ModeError::Jet(JetError::NonInertial(dist.worldline().label())));
    }
    let mut v = OneParticleVector::zero(grid.clone());
    let b = grid.block();
    let ang = &grid.angular;
    for (alpha, coeff) in dist.terms() {
        // angular moments M_{alpha, lm} = int conj(Y_lm) kappa^alpha dOmega
        let mut moments = vec![Complex64::new(0.0, 0.0); b];
        for (j, dir) in ang.directions.iter().enumerate() {
            let mono = alpha.monomial(dir);
            for (k, yw) in ang.ylm_w[j].iter().enumerate() {
                moments[k] += yw * mono;
            }
        }
        let mi = Complex64::new(0.0, -1.0).powu(alpha.order() as u32);
        for (i, (r, lam)) in grid.r.iter().zip(&grid.lambda).enumerate() {
            let radial = K_PREFACTOR * mi * coeff.transform(*lam)
                * Complex64::new(0.0, lam * base.t).exp()
                * r.powi(alpha.order() as i32)
                / lam.sqrt();
            for (k, mom) in moments.iter().enumerate() {
                v.coeff[i * b + k] += radial * mom;
            }
        }
    }
    Ok(v)
}

/// K map by direct lambda-adaptive time quadrature on any worldline,
/// projected onto harmonics up to l_max. Orders above 1 need a constant
/// adapted frame (inertial curves).
pub fn k_map_general(
    dist: &JetDistribution,
    grid: &Arc<ModeGrid>,
) -> Result<OneParticleVector, ModeError> {
    if grid.l_max < dist.order() {
        return Err(ModeError::LMaxTooSmall { l_max: grid.l_max, order: dist.order() });
    }
    if dist.order() > 1 && !dist.worldline().is_inertial() {
        return Err(ModeError::OrderTooHigh {
            order: dist.order(),
            worldline: dist.worldline().label(),
        });
    }
    let w = dist.worldline();
    let (lo, hi) = dist.support();
    // cache curve samples are cheap; tetrad per evaluation
    let b = grid.block();
    let ang = &grid.angular;
    let rows: Vec<Vec<Complex64>> = (0..grid.n_radial())
        .into_par_iter()
        .map(|i| {
            let lam = grid.lambda[i];
            let r = grid.r[i];
            let mut row = vec![Complex64::new(0.0, 0.0); b];
            // phase rate bound over the support for panel sizing
            let mut rate: f64 = 1.0;
            for s in 0..=16 {
                let t = lo + (hi - lo) * s as f64 / 16.0;
                if let Ok((_, uvel)) = w.evaluate(t) {
                    rate = rate.max(lam * uvel.t.abs() + r * uvel.spatial_norm());
                }
            }
            let width = quad::oscillation_width(rate, (hi - lo).max(1e-9) / 8.0);
            // curve data and coefficient values are direction-independent:
            // sample them once per radial node
            let rule = gl16();
            let n_panels = ((hi - lo) / width).ceil().max(1.0) as usize;
            let ph = (hi - lo) / n_panels as f64;
            let needs_frame = dist.terms().iter().any(|(a, _)| a.order() > 0);
            struct Sample {
                weight: f64,
                x: FourVector,
                frame: Option<crate::worldline::Tetrad>,
                coeff: Vec<Complex64>,
            }
            let mut samples = Vec::with_capacity(n_panels * rule.len());
            for p in 0..n_panels {
                let (a, bb) = (lo + p as f64 * ph, lo + (p + 1) as f64 * ph);
                for (xn, wn) in rule.nodes.iter().zip(&rule.weights) {
                    let t = 0.5 * (a + bb) + 0.5 * (bb - a) * xn;
                    let weight = 0.5 * (bb - a) * wn;
                    let (x, _) = w.evaluate(t).expect("support inside domain");
                    let frame = if needs_frame {
                        Some(
                            w.tetrad_at(TransportRule::FermiWalker, t)
                                .expect("tetrad on support"),
                        )
                    } else {
                        None
                    };
                    let coeff = dist.terms().iter().map(|(_, c)| c.eval(t)).collect();
                    samples.push(Sample { weight, x, frame, coeff });
                }
            }
            for (j, dir) in ang.directions.iter().enumerate() {
                let xi = dir.scale(r);
                let mut integral = Complex64::new(0.0, 0.0);
                for smp in &samples {
                    let phase =
                        Complex64::new(0.0, lam * smp.x.t - xi.spatial_dot(&smp.x)).exp();
                    let mut val = Complex64::new(0.0, 0.0);
                    for (ti, (alpha, _)) in dist.terms().iter().enumerate() {
                        let mut term = smp.coeff[ti];
                        if alpha.order() > 0 {
                            let tet = smp.frame.as_ref().expect("frame cached");
                            for k in 0..3 {
                                for _ in 0..alpha.0[k] {
                                    let e = tet.e[k + 1];
                                    term *= Complex64::new(0.0, lam * e.t - xi.spatial_dot(&e));
                                }
                            }
                        }
                        val += term;
                    }
                    integral += val * phase * smp.weight;
                }
                let weighted = integral * K_PREFACTOR / lam.sqrt();
                for (k, yw) in ang.ylm_w[j].iter().enumerate() {
                    row[k] += yw * weighted;
                }
            }
            row
        })
        .collect();
    let mut v = OneParticleVector::zero(grid.clone());
    for (i, row) in rows.into_iter().enumerate() {
        v.coeff[i * b..(i + 1) * b].copy_from_slice(&row);
    }
    Ok(v)
}

/// Route to the closed form when it applies, otherwise general quadrature.
pub fn k_map_auto(
    dist: &JetDistribution,
    grid: &Arc<ModeGrid>,
) -> Result<OneParticleVector, ModeError> {
    match k_map_inertial(dist, grid) {
        Ok(v) => Ok(v),
        Err(ModeError::Jet(JetError::NonInertial(_))) => k_map_general(dist, grid),
        Err(e) => Err(e),
    }
}

/// W(T (x) S) = <K conj(T), K S>; for real T equals <KT, KS>.
pub fn two_point(
    t: &JetDistribution,
    s: &JetDistribution,
    grid: &Arc<ModeGrid>,
) -> Result<Complex64, ModeError> {
    let kt = if t.is_real() { k_map_auto(t, grid)? } else { k_map_auto(&conjugated(t)?, grid)? };
    let ks = k_map_auto(s, grid)?;
    kt.inner(&ks)
}

fn conjugated(t: &JetDistribution) -> Result<JetDistribution, ModeError> {
    let terms = t
        .terms()
        .iter()
        .map(|(alpha, coeff)| {
            let parts = coeff
                .parts
                .iter()
                .map(|(wgt, p)| {
                    (wgt.conj(), Arc::new(ConjugatedProfile { inner: p.clone() }) as crate::profile::Profile)
                })
                .collect();
            (*alpha, crate::jet::Coefficient { parts })
        })
        .collect();
    Ok(JetDistribution::new(t.worldline().clone(), terms)?)
}

/// Commutator form G(T,S) = Im <KT, KS>, real distributions only.
pub fn commutator(
    t: &JetDistribution,
    s: &JetDistribution,
    grid: &Arc<ModeGrid>,
) -> Result<f64, ModeError> {
    if !t.is_real() || !s.is_real() {
        return Err(ModeError::NonRealInput);
    }
    Ok(two_point(t, s, grid)?.im)
}

/// Vacuum detector expectation ||KT||^2.
pub fn detector_norm(dist: &JetDistribution, grid: &Arc<ModeGrid>) -> Result<f64, ModeError> {
    Ok(k_map_auto(dist, grid)?.norm_squared())
}
