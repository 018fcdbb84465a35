//! Spherical harmonics and the Bessel J1 needed by the commutator kernel.

use num_complex::Complex64;

/// Flat index of Y_{l m} in a (L+1)^2 block, m in -l..=l.
#[inline]
pub fn ylm_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    l * l + (m + l as i64) as usize
}

/// Complex spherical harmonics Y_{l m}(theta, phi) for all l <= l_max,
/// Condon-Shortley phase, orthonormal on S^2.
pub fn spherical_harmonics(l_max: usize, cos_theta: f64, phi: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); (l_max + 1) * (l_max + 1)];
    let x = cos_theta.clamp(-1.0, 1.0);
    let s = (1.0 - x * x).max(0.0).sqrt();

    // normalized associated Legendre: Nlm(x) = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(x)
    // stable diagonal-then-upward recurrence
    let mut pmm = vec![0.0; l_max + 1]; // N_mm for the current m
    // N_00 = 1/sqrt(4 pi)
    let mut nmm = 0.5 / std::f64::consts::PI.sqrt();
    for m in 0..=l_max {
        if m > 0 {
            // N_mm = -sqrt((2m+1)/(2m)) * s * N_{m-1,m-1}
            nmm *= -((2.0 * m as f64 + 1.0) / (2.0 * m as f64)).sqrt() * s;
        }
        pmm[m] = nmm;
    }
    for m in 0..=l_max {
        let e = Complex64::new(0.0, m as f64 * phi).exp();
        let mut p_prev = 0.0; // N_{l-1, m}
        let mut p = pmm[m]; // N_{l, m} starting at l = m
        for l in m..=l_max {
            let y = p * e;
            out[ylm_index(l, m as i64)] = y;
            // Y_{l,-m} = (-1)^m conj(Y_{l,m})
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[ylm_index(l, -(m as i64))] = sign * y.conj();
            }
            // upward: N_{l+1,m} = a_{l+1,m} (x N_{l,m} - b_{l,m} N_{l-1,m})
            let lf = l as f64 + 1.0;
            let mf = m as f64;
            if l < l_max {
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = if l == m {
                    0.0
                } else {
                    (((l as f64) * (l as f64) - mf * mf) / (4.0 * (l as f64) * (l as f64) - 1.0))
                        .sqrt()
                };
                let next = a * (x * p - b * p_prev);
                p_prev = p;
                p = next;
            }
        }
    }
    out
}

/// Bessel function of the first kind J_1.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    if ax < 16.0 {
        // power series, alternating; fine in double precision on this range
        let q = 0.25 * ax * ax;
        let mut term = 0.5 * ax;
        let mut sum = term;
        for k in 1..60 {
            term *= -q / (k as f64 * (k as f64 + 1.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-30) {
                break;
            }
        }
        sign * sum
    } else {
        // Hankel asymptotic expansion over z = 8x:
        // a_k = prod_{j<=k} (4 - (2j-1)^2) / k!, truncated at a_6
        let z = 8.0 * ax;
        let z2 = z * z;
        let p = 1.0 + 7.5 / z2 - 590.625 / (z2 * z2) + 177364.6875 / (z2 * z2 * z2);
        let q = 3.0 / z - 52.5 / (z * z2) + 9095.625 / (z * z2 * z2);
        let chi = ax - 0.75 * std::f64::consts::PI;
        sign * (2.0 / (std::f64::consts::PI * ax)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonics_match_low_order_closed_forms() {
        let c0 = 0.5 / std::f64::consts::PI.sqrt();
        let (ct, phi) = (0.3_f64, 1.1_f64);
        let st = (1.0 - ct * ct).sqrt();
        let ys = spherical_harmonics(2, ct, phi);
        assert!((ys[ylm_index(0, 0)].re - c0).abs() < 1e-14);
        // Y_10 = sqrt(3/4pi) cos(theta)
        let y10 = (3.0 / (4.0 * std::f64::consts::PI)).sqrt() * ct;
        assert!((ys[ylm_index(1, 0)].re - y10).abs() < 1e-14);
        // Y_11 = -sqrt(3/8pi) sin(theta) e^{i phi}
        let y11 = -(3.0 / (8.0 * std::f64::consts::PI)).sqrt()
            * st
            * Complex64::new(0.0, phi).exp();
        assert!((ys[ylm_index(1, 1)] - y11).norm() < 1e-14);
        // Y_{2,-1} = -conj(Y_{2,1})
        let y21 = ys[ylm_index(2, 1)];
        assert!((ys[ylm_index(2, -1)] + y21.conj()).norm() < 1e-14);
    }

    #[test]
    fn harmonics_are_orthonormal_under_product_grid() {
        use crate::quad::GaussRule;
        let l_max = 6;
        let rule = GaussRule::new(l_max + 1);
        let n_phi = 2 * l_max + 2;
        let dim = (l_max + 1) * (l_max + 1);
        let mut g = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            for k in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
                let wq = w * 2.0 * std::f64::consts::PI / n_phi as f64;
                let ys = spherical_harmonics(l_max, *u, phi);
                for a in 0..dim {
                    for b in 0..dim {
                        g[a * dim + b] += ys[a].conj() * ys[b] * wq;
                    }
                }
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (g[a * dim + b] - want).norm() < 1e-12,
                    "gram({a},{b}) = {}",
                    g[a * dim + b]
                );
            }
        }
    }

    #[test]
    fn j1_matches_reference_values() {
        // reference values from standard tables
        assert!((bessel_j1(0.5) - 0.2422684576748739).abs() < 1e-13);
        assert!((bessel_j1(1.0) - 0.4400505857449335).abs() < 1e-13);
        assert!((bessel_j1(5.0) - (-0.3275791375914652)).abs() < 1e-12);
        assert!((bessel_j1(20.0) - 0.0668331241758502).abs() < 1e-8);
        assert!((bessel_j1(-1.0) + 0.4400505857449335).abs() < 1e-13);
    }
}
