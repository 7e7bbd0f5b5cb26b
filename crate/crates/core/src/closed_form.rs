//! Closed-form references for the logistic maps with μ = 4 and μ = 2.
//!
//! For μ = 4 the substitution `x = sin²(θ/2)`, i.e. `θ = arccos(1 - 2x)`,
//! turns the map into `θ ↦ 2θ`; for μ = 2 the substitution `s = 1 - 2x`
//! turns it into `s ↦ s²`. Real powers are taken on the principal branch.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

fn theta(x: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - 2.0 * x).acos()
}

/// `f^t(x)` for μ = 4 in the chart about `x* = 0`.
pub fn logistic4_iterate(t: f64, x: Complex64) -> Complex64 {
    0.5 * (1.0 - (2f64.powf(t) * theta(x)).cos())
}

/// `f^t(x)` for μ = 4 in the chart about `x* = 3/4`, with `(-2)^t` principal.
pub fn logistic4_iterate_three_quarters(t: f64, x: Complex64) -> Complex64 {
    let phase = 2.0 * PI / 3.0;
    let power = Complex64::new(-2.0, 0.0).powf(t);
    0.5 * (1.0 - (power * (theta(x) - phase) + phase).cos())
}

/// Chart about 0 with unit slope: `¼ arccos(1 - 2x)² = arcsin²(√x)`.
pub fn logistic4_chart(x: Complex64) -> Complex64 {
    0.25 * theta(x).powi(2)
}

/// Chart about 3/4 with unit slope: `√(3/4)·(½ arccos(1 - 2x) - π/3)`.
pub fn logistic4_chart_three_quarters(x: Complex64) -> Complex64 {
    0.75f64.sqrt() * (0.5 * theta(x) - PI / 3.0)
}

/// Generator of the μ = 4 iterates about 0: `½ ln 2 · sin θ · θ`.
pub fn logistic4_field(x: Complex64) -> Complex64 {
    let th = theta(x);
    0.5 * LN_2 * th.sin() * th
}

/// `f^t(x) = ½(1 - (1 - 2x)^{2^t})` for μ = 2.
pub fn logistic2_iterate(t: f64, x: Complex64) -> Complex64 {
    0.5 * (1.0 - (Complex64::new(1.0, 0.0) - 2.0 * x).powf(2f64.powf(t)))
}

/// Chart about 0 with unit slope: `-½ ln(1 - 2x)`.
pub fn logistic2_chart(x: Complex64) -> Complex64 {
    -0.5 * (Complex64::new(1.0, 0.0) - 2.0 * x).ln()
}

/// Generator for μ = 2: `ln 2 · (1 - 2x) · (-½ ln(1 - 2x))`.
pub fn logistic2_field(x: Complex64) -> Complex64 {
    LN_2 * (Complex64::new(1.0, 0.0) - 2.0 * x) * logistic2_chart(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn integer_times_reproduce_the_maps() {
        for x in [0.05, 0.3, 0.7] {
            let f4 = 4.0 * x * (1.0 - x);
            assert!((logistic4_iterate(1.0, c(x)) - c(f4)).norm() < 1e-14);
            assert!((logistic4_iterate_three_quarters(1.0, c(x)) - c(f4)).norm() < 1e-14);
            assert!((logistic4_iterate(0.0, c(x)) - c(x)).norm() < 1e-14);
            let f2 = 2.0 * x * (1.0 - x);
            assert!((logistic2_iterate(1.0, c(x)) - c(f2)).norm() < 1e-14);
        }
    }

    #[test]
    fn field_at_one_half() {
        assert!((logistic4_field(c(0.5)) - c(PI * LN_2 / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn charts_have_unit_slope() {
        let h = 1e-6;
        let slope0 = (logistic4_chart(c(h)) - logistic4_chart(c(-h))) / (2.0 * h);
        assert!((slope0 - c(1.0)).norm() < 1e-6);
        let slope34 = (logistic4_chart_three_quarters(c(0.75 + h))
            - logistic4_chart_three_quarters(c(0.75 - h)))
            / (2.0 * h);
        assert!((slope34 - c(1.0)).norm() < 1e-6);
        assert!(logistic4_chart_three_quarters(c(0.75)).norm() < 1e-15);
    }
}
