//! Angle helpers shared by the cycle-condition checks.

use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle into `(-π, π]`.
///
/// An input that lands exactly on `-π` after reduction is mapped to `+π`.
pub fn wrap(phi: f64) -> f64 {
    let r = phi.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Number of whole turns separating `phi` from `wrap(phi)`.
pub fn winding(phi: f64) -> i64 {
    ((phi - wrap(phi)) / TWO_PI).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_half_open_at_minus_pi() {
        assert_eq!(wrap(PI), PI);
        assert_eq!(wrap(-PI), PI);
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap(0.3 + 4.0 * PI) - 0.3).abs() < 1e-12);
        assert!((wrap(-0.3 - 2.0 * PI) + 0.3).abs() < 1e-12);
    }

    #[test]
    fn winding_counts_turns() {
        assert_eq!(winding(0.1), 0);
        assert_eq!(winding(0.1 + 2.0 * TWO_PI), 2);
        assert_eq!(winding(-0.1 - TWO_PI), -1);
    }
}
