//! Two-sided identity comparisons.

use serde::{Deserialize, Serialize};

/// Both sides of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs }
    }

    pub fn abs_err(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// Relative error against `rhs`; absolute when `|rhs|` is below `1e-12`.
    pub fn rel_err(&self) -> f64 {
        if self.rhs.abs() < 1e-12 {
            self.abs_err()
        } else {
            self.abs_err() / self.rhs.abs()
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.rel_err() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors() {
        let c = Comparison::new(1.0 + 1e-9, 1.0);
        assert!(c.within(1e-8) && !c.within(1e-10));
        let z = Comparison::new(1e-14, 0.0);
        assert_eq!(z.rel_err(), 1e-14);
        assert!(Comparison::new(f64::NAN, 1.0).rel_err().is_nan());
        assert!(!Comparison::new(f64::NAN, 1.0).within(1.0));
    }
}
