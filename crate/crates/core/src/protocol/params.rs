use serde::Serialize;

use crate::error::{Error, Result};

/// The squeezing pair `(d, r)` with `d ≥ r > 0` and the quantities derived from it.
///
/// `r` is the two-mode squeezing of the underlying entangled state and `d` the
/// extra local squeezing applied to both of its modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Squeezing {
    pub d: f64,
    pub r: f64,
    /// `cosh 2r`
    pub a: f64,
    /// `sinh 2r`
    pub c: f64,
    /// Noise angle in `(0, π/2)`.
    pub phi: f64,
    /// `e^{2d} sin²φ + e^{−2d} cos²φ`
    pub delta: f64,
    /// Smallest noise strength for which the preparation is certified fully separable.
    pub x_sep: f64,
}

impl Squeezing {
    pub fn new(d: f64, r: f64) -> Result<Self> {
        if !(d.is_finite() && r.is_finite()) {
            return Err(Error::InvalidParameters(format!("non-finite d={d}, r={r}")));
        }
        if r <= 0.0 {
            return Err(Error::InvalidParameters(format!("requires r > 0, got r={r}")));
        }
        if d < r {
            return Err(Error::InvalidParameters(format!("requires d >= r, got d={d}, r={r}")));
        }
        let a = (2.0 * r).cosh();
        let c = (2.0 * r).sinh();
        let phi = noise_angle(d, r);
        let (sin_phi, cos_phi) = phi.sin_cos();
        let delta = (2.0 * d).exp() * sin_phi * sin_phi + (-2.0 * d).exp() * cos_phi * cos_phi;
        let x_sep = 2.0 * c / delta;
        Ok(Self {
            d,
            r,
            a,
            c,
            phi,
            delta,
            x_sep,
        })
    }

    /// From the position variances `v_a = e^{2(d−r)}` and `v_b = e^{2(d+r)}`
    /// of the two momentum-squeezed inputs. Requires `v_b > v_a ≥ 1`.
    pub fn from_variances(v_a: f64, v_b: f64) -> Result<Self> {
        if !(v_a.is_finite() && v_b.is_finite()) || v_a < 1.0 || v_b <= v_a {
            return Err(Error::InvalidParameters(format!(
                "requires vB > vA >= 1, got vA={v_a}, vB={v_b}"
            )));
        }
        Self::new((v_a * v_b).ln() / 4.0, (v_b / v_a).ln() / 4.0)
    }

    /// `e^{2(d−r)}`.
    pub fn v_a(&self) -> f64 {
        (2.0 * (self.d - self.r)).exp()
    }

    /// `e^{2(d+r)}`.
    pub fn v_b(&self) -> f64 {
        (2.0 * (self.d + self.r)).exp()
    }

    /// `d = ln(3)/4`, `r = ln(4/3)/4`, i.e. `v_a = 3/2` and `v_b = 2`.
    pub fn flagship() -> Self {
        Self::new(3f64.ln() / 4.0, (4.0f64 / 3.0).ln() / 4.0).expect("flagship parameters are valid")
    }
}

/// `φ` with `tan φ = e^{−2r} sinh 2d + √(1 + e^{−4r} sinh² 2d)`.
fn noise_angle(d: f64, r: f64) -> f64 {
    let t = (-2.0 * r).exp() * (2.0 * d).sinh();
    (t + (1.0 + t * t).sqrt()).atan()
}

/// A full parameter point: squeezing pair plus noise strength `x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    #[serde(flatten)]
    pub squeezing: Squeezing,
    pub x: f64,
}

impl ProtocolParams {
    pub fn new(d: f64, r: f64, x: f64) -> Result<Self> {
        Self::with_squeezing(Squeezing::new(d, r)?, x)
    }

    pub fn from_variances(v_a: f64, v_b: f64, x: f64) -> Result<Self> {
        Self::with_squeezing(Squeezing::from_variances(v_a, v_b)?, x)
    }

    pub fn with_squeezing(squeezing: Squeezing, x: f64) -> Result<Self> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::InvalidParameters(format!("requires x >= 0, got x={x}")));
        }
        Ok(Self { squeezing, x })
    }

    /// The flagship point with `x = 1.041`.
    pub fn flagship() -> Self {
        Self {
            squeezing: Squeezing::flagship(),
            x: FLAGSHIP_X,
        }
    }
}

/// Noise strength used for the flagship report.
pub const FLAGSHIP_X: f64 = 1.041;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flagship_derived_values() {
        let s = Squeezing::flagship();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(s.phi.tan(), golden, epsilon = 1e-14);
        assert_relative_eq!(s.phi.sin(), 0.850651, epsilon = 1e-6);
        assert_relative_eq!(s.phi.cos(), 0.525731, epsilon = 1e-6);
        assert_relative_eq!(s.delta, 1.41290, epsilon = 1e-5);
        assert_relative_eq!(s.x_sep, 0.2043, epsilon = 5e-4);
        assert_relative_eq!(s.v_a(), 1.5, epsilon = 1e-14);
        assert_relative_eq!(s.v_b(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn variance_and_exponent_forms_agree() {
        let s = Squeezing::from_variances(1.5, 2.0).unwrap();
        assert_eq!(s, Squeezing::flagship());
    }

    #[test]
    fn constraint_violations() {
        assert!(Squeezing::new(0.1, 0.2).is_err());
        assert!(Squeezing::new(0.1, 0.0).is_err());
        assert!(Squeezing::from_variances(2.0, 1.5).is_err());
        assert!(Squeezing::from_variances(0.9, 1.5).is_err());
        assert!(ProtocolParams::new(0.3, 0.1, -1.0).is_err());
        assert!(ProtocolParams::new(0.3, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn small_squeezing_limits() {
        let s = Squeezing::new(1e-6, 1e-6).unwrap();
        assert_relative_eq!(s.phi, std::f64::consts::FRAC_PI_4, epsilon = 1e-5);
        let s = Squeezing::new(0.4, 1e-9).unwrap();
        assert!(s.x_sep < 1e-8);
    }
}
