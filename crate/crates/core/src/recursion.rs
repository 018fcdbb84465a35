//! Flat-space specialization of the Hadamard recursion for the tail
//! coefficients V_j. With unit van Vleck determinant and straight-line
//! geodesics the V_j are constants, so the wave-operator term vanishes and
//! the recursion collapses to an exact rational rule in m^2.

use num_bigint::BigInt;
use num_rational::BigRational;

#[derive(Debug, thiserror::Error)]
pub enum RecursionError {
    #[error("recursion order {0} exceeds the supported maximum 12")]
    OrderTooHigh(usize),
    #[error("mass must be nonnegative, got {0}")]
    NegativeMass(f64),
}

/// Tail coefficients V_0..V_n for mass m, plus their exact rational parts:
/// V_j = rational[j] * m^{2(j+1)}.
#[derive(Debug, Clone)]
pub struct HadamardCoefficients {
    pub mass: f64,
    pub v: Vec<f64>,
    pub rational: Vec<BigRational>,
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// V_{-1} = Delta = 1; V_j = -(1/4) int_0^1 (box - m^2) V_{j-1} s^j ds.
/// The V_{j-1} are constants here, so box V_{j-1} = 0 and the s-integral is
/// exactly 1/(j+1), leaving V_j = (m^2/4) V_{j-1} / (j+1).
pub fn hadamard_recursion(mass: f64, n: usize) -> Result<HadamardCoefficients, RecursionError> {
    if n > 12 {
        return Err(RecursionError::OrderTooHigh(n));
    }
    if mass < 0.0 {
        return Err(RecursionError::NegativeMass(mass));
    }
    let quarter = ratio(1, 4);
    let mut rational = Vec::with_capacity(n + 1);
    // previous coefficient as the rational multiplier of m^{2j}; V_{-1} = 1
    let mut prev = ratio(1, 1);
    for j in 0..=n {
        // -(1/4) * (-m^2 prev) * int_0^1 s^j ds; the box term vanishes on
        // constants, and int s^j = 1/(j+1)
        let s_integral = ratio(1, (j + 1) as i64);
        let vj = &quarter * &prev * &s_integral;
        rational.push(vj.clone());
        prev = vj;
    }
    let m2 = mass * mass;
    let v = rational
        .iter()
        .enumerate()
        .map(|(j, r)| rational_to_f64(r) * m2.powi(j as i32 + 1))
        .collect();
    Ok(HadamardCoefficients { mass, v, rational })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // exact for the small numerators/denominators produced here
    let num: f64 = r.numer().to_string().parse().unwrap();
    let den: f64 = r.denom().to_string().parse().unwrap();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{gl16, panel_real};

    #[test]
    fn massless_tail_vanishes() {
        let c = hadamard_recursion(0.0, 8).unwrap();
        assert!(c.v.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn base_case_is_quarter_m_squared() {
        let c = hadamard_recursion(2.0, 0).unwrap();
        assert!((c.v[0] - 1.0).abs() < 1e-15); // m^2/4 = 1 at m = 2
        assert_eq!(c.rational[0], ratio(1, 4));
    }

    #[test]
    fn recursion_matches_direct_quadrature_of_the_s_integral() {
        // evaluate the defining integral numerically instead of using the
        // closed-form 1/(j+1) reduction
        let m: f64 = 1.3;
        let c = hadamard_recursion(m, 6).unwrap();
        let mut prev = 1.0;
        for j in 0..=6 {
            let integrand = |s: f64| -> f64 { (-(m * m) * prev) * s.powi(j as i32) };
            let integral = panel_real(gl16(), 0.0, 1.0, integrand);
            let vj = -0.25 * integral;
            assert!(
                (c.v[j] - vj).abs() <= 1e-13 * vj.abs(),
                "j={j}: {} vs {}",
                c.v[j],
                vj
            );
            prev = vj;
        }
    }

    #[test]
    fn order_cap() {
        assert!(matches!(hadamard_recursion(1.0, 13), Err(RecursionError::OrderTooHigh(13))));
    }
}
