//! Spacetime commutator oracle: the retarded-minus-advanced kernel smeared
//! against order-0 coefficient pairs on parallel static worldlines. This is
//! the independent route against which Im<KT,KS> is validated; it never
//! touches the mode grid.
//!
//! In the conventions of the K map (shell kernel e^{+i lambda t}, density
//! 1/lambda) the kernel for time lag t at spatial distance d is
//!   -(1/(4 pi d)) [delta(t-d) - delta(t+d)]
//!   + sign(t) theta(t^2-d^2) (m / (4 pi sqrt(t^2-d^2))) J_1(m sqrt(t^2-d^2)),
//! the support statement of the fundamental solutions: the delta rides the
//! light cone, the Bessel tail fills the timelike interior for m > 0.

use crate::geometry::FourVector;
use crate::jet::{JetDistribution, MultiIndex};
use crate::quad::{gl32, panels};
use crate::special::bessel_j1;
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle needs order-0 distributions, got order {0}")]
    NotOrderZero(usize),
    #[error("oracle needs parallel static inertial worldlines ({0})")]
    UnsupportedGeometry(String),
    #[error(transparent)]
    Worldline(#[from] crate::worldline::WorldlineError),
}

/// Smooth interior part of the commutator kernel (m > 0, |t| > d).
pub fn interior_tail(m: f64, t: f64, d: f64) -> f64 {
    let gamma = t * t - d * d;
    if m == 0.0 || gamma <= 0.0 {
        return 0.0;
    }
    let root = gamma.sqrt();
    t.signum() * m / (4.0 * std::f64::consts::PI * root) * bessel_j1(m * root)
}

/// Commutator of two real order-0 distributions on parallel static inertial
/// curves, by direct quadrature of the spacetime kernel.
pub fn commutator_oracle(
    t_dist: &JetDistribution,
    s_dist: &JetDistribution,
    mass: f64,
) -> Result<f64, OracleError> {
    for d in [t_dist, s_dist] {
        if d.order() != 0 {
            return Err(OracleError::NotOrderZero(d.order()));
        }
    }
    let rest = FourVector::new(1.0, 0.0, 0.0, 0.0);
    let (xt, ut) = t_dist.worldline().evaluate(0.0)?;
    let (xs, us) = s_dist.worldline().evaluate(0.0)?;
    for (w, u) in [(t_dist.worldline(), ut), (s_dist.worldline(), us)] {
        if !w.is_inertial() || (u - rest).euclidean_norm() > 1e-12 {
            return Err(OracleError::UnsupportedGeometry(w.label()));
        }
    }
    let sep = xt - xs;
    let d = sep.spatial_norm();
    let t_offset = sep.t; // lab-time offset between the two parameter origins
    if d < 1e-9 {
        return Err(OracleError::UnsupportedGeometry(
            "curves coincide spatially; the 1/d cone kernel is singular".into(),
        ));
    }
    let a = |t: f64| term_coefficient(t_dist, t);
    let b = |t: f64| term_coefficient(s_dist, t);
    let (alo, ahi) = t_dist.support();
    let (blo, bhi) = s_dist.support();

    // light-cone part: -(1/(4 pi d)) int [a(t + d - toff) - a(t - d - toff)] b(t) dt
    // in the s-distribution's parameter t; the lag between field points is
    // t1 + toff - t2 with t1, t2 the curve parameters.
    let cone = -(1.0 / (4.0 * std::f64::consts::PI * d))
        * (overlap_integral(&a, &b, blo, bhi, d - t_offset)
            - overlap_integral(&a, &b, blo, bhi, -d - t_offset));

    // interior part for massive fields: 2D quadrature split at the cone
    let mut tail = 0.0;
    if mass > 0.0 {
        let outer = panels(gl32(), blo, bhi, 0.5, |t2| {
            let lag_plus = t2 + d - t_offset; // t1 above the future cone edge
            let lag_minus = t2 - d - t_offset;
            let mut inner = 0.0;
            // future piece t1 > t2 + d (in t-dist parameter, lag = t1 + toff - t2 > d)
            let lo = alo.max(lag_plus);
            if ahi > lo {
                inner += panels(gl32(), lo, ahi, 0.5, |t1| {
                    Complex64::new(a(t1) * interior_tail(mass, t1 + t_offset - t2, d), 0.0)
                })
                .re;
            }
            // past piece t1 < t2 - d
            let hi = ahi.min(lag_minus);
            if hi > alo {
                inner += panels(gl32(), alo, hi, 0.5, |t1| {
                    Complex64::new(a(t1) * interior_tail(mass, t1 + t_offset - t2, d), 0.0)
                })
                .re;
            }
            Complex64::new(b(t2) * inner, 0.0)
        })
        .re;
        tail = outer;
    }
    Ok(cone + tail)
}

fn term_coefficient(dist: &JetDistribution, t: f64) -> f64 {
    dist.terms()
        .iter()
        .find(|(alpha, _)| *alpha == MultiIndex::ZERO)
        .map(|(_, c)| c.eval(t).re)
        .unwrap_or(0.0)
}

/// int a(t + shift) b(t) dt over the b-support.
fn overlap_integral(
    a: &dyn Fn(f64) -> f64,
    b: &dyn Fn(f64) -> f64,
    blo: f64,
    bhi: f64,
    shift: f64,
) -> f64 {
    panels(gl32(), blo, bhi, 0.5, |t| Complex64::new(a(t + shift) * b(t), 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::GaussianBump;
    use crate::worldline::{InertialLine, Worldline};
    use std::sync::Arc;

    fn static_line(offset: FourVector) -> Worldline {
        Worldline::new(Arc::new(InertialLine::at_rest_offset(offset)))
    }

    fn order0(w: Worldline, center: f64, width: f64) -> JetDistribution {
        JetDistribution::order0(
            w,
            Arc::new(GaussianBump { center, width, amplitude: 1.0 }),
        )
        .unwrap()
    }

    #[test]
    fn interior_tail_matches_regulated_mode_integral() {
        // frozen from an independent extrapolated evaluation of
        // -(1/(2 pi^2 d)) int r sin(r d) sin(lambda t)/lambda e^{-eps r} dr
        let frozen = 0.014437230941118729;
        let v = interior_tail(1.0, 3.0, 1.5);
        assert!(
            (v - frozen).abs() < 2e-8 * frozen,
            "closed form {v} vs regulated {frozen}"
        );
    }

    #[test]
    fn spacelike_pairs_commute() {
        let t = order0(static_line(FourVector::ZERO), 0.0, 1.0);
        let s = order0(static_line(FourVector::spatial(10.0, 0.0, 0.0)), 0.0, 1.0);
        let g = commutator_oracle(&t, &s, 0.0).unwrap();
        assert!(g.abs() < 1e-14);
    }

    #[test]
    fn strictly_timelike_massless_pairs_commute_by_huygens() {
        // supports centered 5 apart in time at distance 2: strictly inside
        // the cone, where the massless kernel has no support at all
        let t = order0(static_line(FourVector::ZERO), 0.0, 1.0);
        let s = order0(static_line(FourVector::spatial(2.0, 0.0, 0.0)), 5.0, 1.0);
        let g = commutator_oracle(&t, &s, 0.0).unwrap();
        assert!(g.abs() < 1e-13, "massless interior value {g}");
        // the massive field does see the interior
        let gm = commutator_oracle(&t, &s, 1.0).unwrap();
        assert!(gm.abs() > 1e-6, "massive interior value {gm}");
    }

    #[test]
    fn oracle_rejects_higher_order_and_moving_curves() {
        use crate::jet::Coefficient;
        let w = static_line(FourVector::ZERO);
        let t1 = JetDistribution::new(
            w.clone(),
            vec![(
                MultiIndex([1, 0, 0]),
                Coefficient::single(Arc::new(GaussianBump {
                    center: 0.0,
                    width: 1.0,
                    amplitude: 1.0,
                })),
            )],
        )
        .unwrap();
        let s = order0(static_line(FourVector::spatial(3.0, 0.0, 0.0)), 0.0, 1.0);
        assert!(matches!(
            commutator_oracle(&t1, &s, 0.0),
            Err(OracleError::NotOrderZero(1))
        ));
    }
}
