//! Inequality checkers: power means, Brunn-Minkowski type scans over λ,
//! power concavity of curves, and sup-convolution tests.

mod bm;
mod curves;
mod supconv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bm::{
    check_bm, check_bonnesen_sections, check_prop_concave, check_slab, default_lambda_grid,
    match_max_section, BmOptions, SECTION_MATCH_TOL,
};
pub use curves::{
    check_b_property, check_curve_power_concavity, check_radial_monotone, prop_equiv_pipeline,
    scan_dilates, EquivGrids, EquivOutcome, EquivReport,
};
pub use supconv::{
    check_dancs_uhrin, check_henstock_macbeath, supconv_gamma_2d, supconv_min, GridFunction1D,
    GridFunction2D, MAX_GRID_2D, SECTION_MATCH_TOL_2D,
};

/// The power mean `((1-λ) a^s + λ b^s)^{1/s}` with its limit cases:
/// `s = 0` geometric, `s = -inf` min, `s = +inf` max, and 0 whenever
/// `ab = 0` and `s <= 0`. The endpoints `λ = 0` and `λ = 1` return `a` and `b`.
pub fn s_mean(a: f64, b: f64, s: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return a;
    }
    if lambda == 1.0 {
        return b;
    }
    if s == f64::INFINITY {
        return a.max(b);
    }
    if s == f64::NEG_INFINITY {
        return a.min(b);
    }
    if s <= 0.0 && a * b == 0.0 {
        return 0.0;
    }
    if s == 0.0 {
        return ((1.0 - lambda) * a.ln() + lambda * b.ln()).exp();
    }
    if s == 1.0 {
        return (1.0 - lambda) * a + lambda * b;
    }
    ((1.0 - lambda) * a.powf(s) + lambda * b.powf(s)).powf(1.0 / s)
}

/// Exponent and weight of a power mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SMeanSpec {
    pub s: f64,
    pub lambda: f64,
}

impl SMeanSpec {
    pub fn new(s: f64, lambda: f64) -> Result<Self> {
        if s.is_nan() {
            return Err(Error::domain("s must not be NaN"));
        }
        crate::sets::check_lambda(lambda)?;
        Ok(SMeanSpec { s, lambda })
    }

    pub fn mean(&self, a: f64, b: f64) -> Result<f64> {
        if !(a >= 0.0 && b >= 0.0) {
            return Err(Error::domain(format!("power mean of negative values {a}, {b}")));
        }
        Ok(s_mean(a, b, self.s, self.lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(s_mean(1.0, 9.0, 0.5, 0.5), 4.0);
        assert!((s_mean(2.0, 8.0, 0.0, 0.5) - 4.0).abs() < 1e-15);
        assert_eq!(s_mean(3.0, 5.0, f64::NEG_INFINITY, 0.7), 3.0);
        assert_eq!(s_mean(3.0, 5.0, f64::INFINITY, 0.7), 5.0);
        assert_eq!(s_mean(0.0, 5.0, -1.0, 0.5), 0.0);
        assert_eq!(s_mean(0.0, 5.0, 0.0, 0.5), 0.0);
        assert!((s_mean(0.0, 4.0, 0.5, 0.5) - 1.0).abs() < 1e-15);
        assert_eq!(s_mean(2.0, 7.0, -3.0, 0.0), 2.0);
        assert_eq!(s_mean(2.0, 7.0, -3.0, 1.0), 7.0);
    }

    #[test]
    fn spec_validation() {
        assert!(SMeanSpec::new(0.5, 1.5).is_err());
        assert!(SMeanSpec::new(0.5, 0.5).unwrap().mean(-1.0, 1.0).is_err());
        assert_eq!(SMeanSpec::new(1.0, 0.25).unwrap().mean(0.0, 4.0).unwrap(), 1.0);
    }
}
