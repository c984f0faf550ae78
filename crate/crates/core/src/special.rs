//! Gamma values at integers and half-integers, evaluated by recurrence.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `Γ(m/2)` for any integer `m` that is not a nonpositive even number.
/// Negative half-integers come from `Γ(z) = Γ(z + 1) / z` stepping down
/// from `Γ(1/2) = √π`, never from a general-purpose gamma routine.
pub fn gamma_half(m: i64) -> Result<f64> {
    if m <= 0 && m % 2 == 0 {
        return Err(Error::Pole(format!("Γ({m}/2) is a pole")));
    }
    let (mut value, mut twice_z) = if m % 2 == 0 { (1.0, 2) } else { (PI.sqrt(), 1) };
    // upward: Γ(z + 1) = z Γ(z)
    while twice_z < m {
        value *= twice_z as f64 / 2.0;
        twice_z += 2;
    }
    // downward: Γ(z - 1) = Γ(z) / (z - 1)
    while twice_z > m {
        twice_z -= 2;
        value /= twice_z as f64 / 2.0;
    }
    Ok(value)
}

/// Volume of the unit round sphere `S^n`: `2 π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n as i64 + 1).expect("positive argument")
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}
