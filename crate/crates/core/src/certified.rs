use std::ops::{Add, Neg, Sub};

use serde::Serialize;

/// A real number with an absolute error radius. `exact` values carry a zero
/// radius; arithmetic widens the radius by one rounding unit of the result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedValue {
    pub value: f64,
    pub err: f64,
    pub exact: bool,
}

fn rounding(v: f64) -> f64 {
    v.abs() * f64::EPSILON
}

impl CertifiedValue {
    pub fn exact(value: f64) -> Self {
        CertifiedValue { value, err: 0.0, exact: true }
    }

    pub fn new(value: f64, err: f64) -> Self {
        debug_assert!(err >= 0.0, "negative error radius");
        if err == 0.0 {
            CertifiedValue::exact(value)
        } else {
            CertifiedValue { value, err, exact: false }
        }
    }

    pub fn zero() -> Self {
        CertifiedValue::exact(0.0)
    }

    pub fn lower(&self) -> f64 {
        self.value - self.err
    }

    pub fn upper(&self) -> f64 {
        self.value + self.err
    }

    /// Whether `x` lies in the closed interval (with a rounding unit of slack).
    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.err + 4.0 * rounding(x.abs().max(self.value.abs()))
    }

    pub fn scale(&self, k: f64) -> Self {
        let value = self.value * k;
        if self.exact {
            CertifiedValue::exact(value)
        } else {
            CertifiedValue::new(value, self.err * k.abs() * (1.0 + f64::EPSILON) + rounding(value))
        }
    }

    pub fn sum<I: IntoIterator<Item = CertifiedValue>>(it: I) -> Self {
        it.into_iter().fold(CertifiedValue::zero(), |a, b| a + b)
    }
}

impl Add for CertifiedValue {
    type Output = CertifiedValue;

    fn add(self, rhs: CertifiedValue) -> CertifiedValue {
        let value = self.value + rhs.value;
        if self.exact && rhs.exact {
            return CertifiedValue::exact(value);
        }
        CertifiedValue::new(value, (self.err + rhs.err) * (1.0 + f64::EPSILON) + rounding(value))
    }
}

impl Neg for CertifiedValue {
    type Output = CertifiedValue;

    fn neg(self) -> CertifiedValue {
        CertifiedValue { value: -self.value, ..self }
    }
}

impl Sub for CertifiedValue {
    type Output = CertifiedValue;

    fn sub(self, rhs: CertifiedValue) -> CertifiedValue {
        self + (-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_accumulate() {
        let a = CertifiedValue::new(1.0, 1e-3);
        let b = CertifiedValue::new(2.0, 2e-3);
        let c = a + b;
        assert!(c.err >= 3e-3);
        assert!(!c.exact);
        assert!(c.contains(3.0029));
        assert!((CertifiedValue::exact(1.0) + CertifiedValue::exact(2.0)).exact);
        assert_eq!((a - a).value, 0.0);
        assert!((a - a).err >= 2e-3);
    }
}
