use serde::Serialize;

use crate::error::{Error, Result};

/// Curvature and injectivity-radius inputs and the constants derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub kappa: f64,
    pub i0: f64,
    pub s0: f64,
    pub c1: f64,
    pub eps0: f64,
    /// "explicit" when (kappa, i0) were supplied, "auto" when estimated.
    pub source: &'static str,
}

/// s0 = min(i0, 1/sqrt(kappa), 1/3) / 2, C1 = 1 + 2e/s0, eps0 = sqrt(2/(pi C1^2)).
pub fn constants(kappa: f64, i0: f64) -> Result<Constants> {
    if !(kappa > 0.0) {
        return Err(Error::NonPositiveInput { name: "kappa", value: kappa });
    }
    if !(i0 > 0.0) {
        return Err(Error::NonPositiveInput { name: "i0", value: i0 });
    }
    let s0 = 0.5 * i0.min(1.0 / kappa.sqrt()).min(1.0 / 3.0);
    let c1 = 1.0 + 2.0 * std::f64::consts::E / s0;
    let eps0 = (2.0 / (std::f64::consts::PI * c1 * c1)).sqrt();
    Ok(Constants { kappa, i0, s0, c1, eps0, source: "explicit" })
}

impl Constants {
    /// Constants from a numerically estimated curvature bound, with
    /// i0 = min(1/sqrt(kappa), 1/3).
    pub fn auto(kappa_est: f64) -> Result<Constants> {
        let kappa = kappa_est.max(f64::MIN_POSITIVE);
        let i0 = (1.0 / kappa.sqrt()).min(1.0 / 3.0);
        let mut c = constants(kappa, i0)?;
        c.source = "auto";
        Ok(c)
    }
}

impl Default for Constants {
    fn default() -> Self {
        constants(9.0, 1.0 / 3.0).expect("positive defaults")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants() {
        let c = Constants::default();
        assert!((c.s0 - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.c1 - (1.0 + 12.0 * std::f64::consts::E)).abs() < 1e-12);
        assert!((c.c1 - 33.619).abs() < 1e-3);
        assert!((c.eps0 - 0.02373).abs() < 1e-5);
    }

    #[test]
    fn large_curvature_shrinks_s0() {
        let c = constants(1e8, 1.0).unwrap();
        assert!(c.s0 < 1e-4 && c.c1 > 1e4);
        assert!(matches!(constants(0.0, 1.0), Err(Error::NonPositiveInput { name: "kappa", .. })));
    }

    #[test]
    fn auto_keeps_cap_for_small_curvature() {
        let c = Constants::auto(1e-6).unwrap();
        assert_eq!(c.source, "auto");
        assert!((c.s0 - 1.0 / 6.0).abs() < 1e-15);
    }
}
