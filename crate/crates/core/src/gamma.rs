//! Gamma function for positive real arguments.
//!
//! Lanczos approximation (g = 7, nine coefficients, the set published with the
//! GNU Scientific Library) with the reflection formula below 1/2. Relative error
//! is a few ulp over the range used by the L1 weights, `Γ(1)..Γ(3)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;

const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires a finite x > 0, got {x}")));
    }
    Ok(gamma_positive(x))
}

fn gamma_positive(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return PI / ((PI * x).sin() * gamma_positive(1.0 - x));
    }
    // Integers are common (Γ(1), Γ(2) at δ = 1); return them exactly.
    if x.fract() == 0.0 && x <= 21.0 {
        return (1..x as u64).map(|k| k as f64).product();
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn known_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-13);
        // Γ(2.5) = 1.5 · 0.5 · √π
        assert!(rel(gamma(2.5).unwrap(), 0.75 * PI.sqrt()) < 1e-13);
        assert!((gamma(2.5).unwrap() - 1.329_340_388_2).abs() < 1e-10);
    }

    #[test]
    fn recurrence_holds_across_range() {
        let mut x = 0.05;
        while x < 10.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-13, "x = {x}: {lhs} vs {rhs}");
            x += 0.0137;
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(gamma(f64::NAN).is_err());
    }
}
