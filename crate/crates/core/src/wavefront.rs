//! Numerical wave-front-direction scanner: fit the growth exponent of
//! |That(R n)| over the top decade of a radial grid and classify each
//! covector direction as singular or regular.

use crate::geometry::FourVector;
use crate::jet::{JetDistribution, JetError};
use crate::quad::linear_fit;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Anything with a four-dimensional Fourier transform.
pub trait FourierTarget: Send + Sync {
    fn transform(&self, k: FourVector) -> Result<Complex64, JetError>;
}

impl FourierTarget for JetDistribution {
    fn transform(&self, k: FourVector) -> Result<Complex64, JetError> {
        // closed form on inertial rest-frame curves, quadrature elsewhere
        match self.fourier_transform(k.t, [k.x, k.y, k.z]) {
            Ok(v) => Ok(v),
            Err(JetError::NonInertial(_)) => self.fourier_transform_numeric(k),
            Err(e) => Err(e),
        }
    }
}

/// Separable product of four 1D profiles: a smooth compactly supported
/// spacetime function whose every direction is regular.
pub struct SeparableBump {
    pub factors: [crate::profile::Profile; 4],
}

impl FourierTarget for SeparableBump {
    fn transform(&self, k: FourVector) -> Result<Complex64, JetError> {
        // factors transform with e^{+i rho t}; spatial components enter the
        // plane wave e^{i(rho t - xi.x)} with a sign flip
        Ok(self.factors[0].transform(k.t)
            * self.factors[1].transform(-k.x)
            * self.factors[2].transform(-k.y)
            * self.factors[3].transform(-k.z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Regular,
    Singular,
}

/// Per-direction scan result: fitted growth exponent of the top decade.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionSample {
    pub direction: [f64; 4],
    pub slope: f64,
    pub class: Classification,
    pub below_noise_floor: bool,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    /// decades spanned by the radial grid (>= 3)
    pub decades: f64,
    /// radii per decade (>= 8)
    pub radii_per_decade: usize,
    pub r_min: f64,
    /// singular iff fitted slope >= -n_max
    pub n_max: f64,
    /// relative noise floor against the scan peak
    pub noise_floor: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { decades: 3.0, radii_per_decade: 10, r_min: 1.0, n_max: 6.0, noise_floor: 1e-13 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("radial grid must span >= 3 decades with >= 8 radii per decade")]
    GridTooCoarse,
    #[error("all directions saturated the noise floor")]
    AllBelowNoiseFloor,
    #[error(transparent)]
    Jet(#[from] JetError),
}

impl ScanConfig {
    pub fn radii(&self) -> Vec<f64> {
        let n = (self.decades * self.radii_per_decade as f64).ceil() as usize + 1;
        (0..n)
            .map(|i| self.r_min * 10f64.powf(i as f64 / self.radii_per_decade as f64))
            .collect()
    }
}

/// Default direction set: `n_spatial` directions with zero frequency
/// component plus `n_mixed` directions tilted towards the timelike axis.
pub fn direction_grid(n_spatial: usize, n_mixed: usize) -> Vec<FourVector> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut dirs = Vec::new();
    for i in 0..n_spatial {
        // Fibonacci sphere, offset to keep directions generic
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_spatial as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64 + 0.37;
        dirs.push(FourVector::spatial(r * phi.cos(), r * phi.sin(), z));
    }
    for i in 0..n_mixed {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_mixed.max(1) as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64 + 1.13;
        // frequency component from 0.1 up to 1 (normalized afterwards)
        let rho = 0.1 + 0.9 * (i as f64 + 0.5) / n_mixed.max(1) as f64;
        let v = FourVector::new(rho, r * phi.cos(), r * phi.sin(), z);
        dirs.push(v.scale(1.0 / v.euclidean_norm()));
    }
    dirs
}

/// Scan the target over each direction: least-squares slope of
/// log|That(R n)| against log R over the top decade.
pub fn wavefront_scan(
    target: &dyn FourierTarget,
    directions: &[FourVector],
    cfg: &ScanConfig,
) -> Result<Vec<DirectionSample>, ScanError> {
    if cfg.decades < 3.0 || cfg.radii_per_decade < 8 {
        return Err(ScanError::GridTooCoarse);
    }
    let radii = cfg.radii();
    let values: Vec<Vec<f64>> = directions
        .par_iter()
        .map(|n| {
            radii
                .iter()
                .map(|&r| target.transform(n.scale(r)).map(|v| v.norm()))
                .collect::<Result<Vec<f64>, JetError>>()
        })
        .collect::<Result<_, _>>()?;
    let peak = values.iter().flatten().cloned().fold(0.0, f64::max);
    let floor = cfg.noise_floor * peak;
    let top_decade_start = radii.len().saturating_sub(cfg.radii_per_decade + 1);
    let mut out = Vec::with_capacity(directions.len());
    for (n, vals) in directions.iter().zip(values) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&r, &v) in radii[top_decade_start..].iter().zip(&vals[top_decade_start..]) {
            if v > floor {
                xs.push(r.ln());
                ys.push(v.ln());
            }
        }
        let below = xs.len() < 2;
        let slope = if below {
            // saturated: report strongly decaying
            -2.0 * cfg.n_max
        } else {
            linear_fit(&xs, &ys).0
        };
        let class = if !below && slope >= -cfg.n_max {
            Classification::Singular
        } else {
            Classification::Regular
        };
        out.push(DirectionSample {
            direction: [n.t, n.x, n.y, n.z],
            slope,
            class,
            below_noise_floor: below,
            samples: vals,
        });
    }
    // a target that is numerically zero everywhere carries no information
    if peak <= 1e-280 {
        return Err(ScanError::AllBelowNoiseFloor);
    }
    Ok(out)
}

/// CSV rows n0,n1,n2,n3,slope,class.
pub fn scan_report_csv(samples: &[DirectionSample]) -> String {
    let mut out = String::from("n0,n1,n2,n3,slope,class\n");
    for s in samples {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            s.direction[0],
            s.direction[1],
            s.direction[2],
            s.direction[3],
            s.slope,
            match s.class {
                Classification::Singular => "singular",
                Classification::Regular => "regular",
            }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Coefficient, MultiIndex};
    use crate::profile::{GaussianBump, Profile};
    use crate::worldline::{InertialLine, Worldline};
    use std::sync::Arc;

    fn inertial() -> Worldline {
        Worldline::new(Arc::new(InertialLine::at_rest()))
    }

    fn bump(center: f64, width: f64) -> Profile {
        Arc::new(GaussianBump { center, width, amplitude: 1.0 })
    }

    #[test]
    fn order1_spatial_directions_are_singular_with_unit_slope() {
        let t = JetDistribution::new(
            inertial(),
            vec![
                (MultiIndex::ZERO, Coefficient::single(bump(0.0, 2.0))),
                (MultiIndex([1, 0, 0]), Coefficient::single(bump(0.1, 1.5))),
            ],
        )
        .unwrap();
        let cfg = ScanConfig::default();
        let spatial = [FourVector::spatial(1.0, 0.0, 0.0)];
        let res = wavefront_scan(&t, &spatial, &cfg).unwrap();
        assert_eq!(res[0].class, Classification::Singular);
        assert!((res[0].slope - 1.0).abs() < 0.3, "slope {}", res[0].slope);
    }

    #[test]
    fn timelike_direction_is_regular() {
        let t = JetDistribution::new(
            inertial(),
            vec![
                (MultiIndex::ZERO, Coefficient::single(bump(0.0, 2.0))),
                (MultiIndex([1, 0, 0]), Coefficient::single(bump(0.1, 1.5))),
            ],
        )
        .unwrap();
        let cfg = ScanConfig::default();
        let dirs = [
            FourVector::new(1.0, 0.0, 0.0, 0.0),
            FourVector::new(0.1, 0.0, 0.995, 0.0).scale(1.0 / 1.0004998750624609),
        ];
        let res = wavefront_scan(&t, &dirs, &cfg).unwrap();
        for s in &res {
            assert_eq!(s.class, Classification::Regular, "dir {:?} slope {}", s.direction, s.slope);
            assert!(s.slope <= -cfg.n_max);
        }
    }

    #[test]
    fn smooth_4d_function_is_regular_everywhere() {
        let target = SeparableBump {
            factors: [bump(0.0, 1.0), bump(0.0, 1.5), bump(0.0, 2.0), bump(0.0, 1.0)],
        };
        let cfg = ScanConfig::default();
        let dirs = direction_grid(8, 8);
        let res = wavefront_scan(&target, &dirs, &cfg).unwrap();
        for s in res {
            assert_eq!(s.class, Classification::Regular);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let t = JetDistribution::order0(inertial(), bump(0.0, 1.0)).unwrap();
        let cfg = ScanConfig { decades: 2.0, ..Default::default() };
        assert!(matches!(
            wavefront_scan(&t, &[FourVector::spatial(1.0, 0.0, 0.0)], &cfg),
            Err(ScanError::GridTooCoarse)
        ));
    }
}
