//! Minkowski four-vectors with fixed signature (-,+,+,+).

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Event or covector in Minkowski space, components (t, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const ZERO: FourVector = FourVector { t: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector { t, x, y, z }
    }

    pub fn spatial(x: f64, y: f64, z: f64) -> Self {
        FourVector { t: 0.0, x, y, z }
    }

    /// Minkowski inner product with signature (-,+,+,+).
    pub fn dot(&self, other: &FourVector) -> f64 {
        -self.t * other.t + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Euclidean norm of the spatial part.
    pub fn spatial_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Euclidean norm of all four components (used for direction grids on S^3).
    pub fn euclidean_norm(&self) -> f64 {
        (self.t * self.t + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn spatial_dot(&self, other: &FourVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(&self, s: f64) -> FourVector {
        FourVector::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component(&self, mu: usize) -> f64 {
        match mu {
            0 => self.t,
            1 => self.x,
            2 => self.y,
            3 => self.z,
            _ => panic!("four-vector index out of range: {mu}"),
        }
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector::new(self.t + rhs.t, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector::new(self.t - rhs.t, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        self.scale(-1.0)
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, rhs: FourVector) -> FourVector {
        rhs.scale(self)
    }
}

/// Boost with rapidity `eta` along the unit spatial direction `n`.
pub fn boost(v: &FourVector, eta: f64, n: &FourVector) -> FourVector {
    let (ch, sh) = (eta.cosh(), eta.sinh());
    let vpar = v.spatial_dot(n);
    let t = ch * v.t + sh * vpar;
    let par = sh * v.t + ch * vpar;
    FourVector::new(
        t,
        v.x + (par - vpar) * n.x,
        v.y + (par - vpar) * n.y,
        v.z + (par - vpar) * n.z,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_is_mostly_plus() {
        let e0 = FourVector::new(1.0, 0.0, 0.0, 0.0);
        let e1 = FourVector::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(e0.dot(&e0), -1.0);
        assert_eq!(e1.dot(&e1), 1.0);
        assert_eq!(e0.dot(&e1), 0.0);
    }

    #[test]
    fn boost_preserves_interval() {
        let v = FourVector::new(2.0, 0.3, -1.0, 0.5);
        let n = FourVector::spatial(0.6, 0.8, 0.0);
        let b = boost(&v, 0.7, &n);
        assert!((b.dot(&b) - v.dot(&v)).abs() < 1e-12);
    }
}
