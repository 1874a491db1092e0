//! Closed-form leading-order profiles and the higher-mode kernel `D_ℓ`.

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Below this value of `r/u` the profiles switch to their axis series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Spacetime point in null coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub u: f64,
    pub v: f64,
}

impl Point {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Point at retarded time `u` and radius `r`.
    pub fn from_ur(u: f64, r: f64) -> Self {
        Self { u, v: u + 2.0 * r }
    }

    pub fn r(&self) -> f64 {
        0.5 * (self.v - self.u)
    }

    pub fn t(&self) -> f64 {
        0.5 * (self.u + self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Generic,
    AxisLimitSeries,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub value: f64,
    pub regime: Regime,
}

/// `ln(1 + x) / x`, with a series near zero.
fn log1p_over_x(x: f64, series: bool) -> f64 {
    if series {
        // 1 - x/2 + x²/3 - x³/4 + x⁴/5 - x⁵/6
        let mut acc = 0.0;
        for k in (1..=6).rev() {
            acc = 1.0 / k as f64 - x * acc;
        }
        acc
    } else {
        x.ln_1p() / x
    }
}

fn check_point(p: Point) -> Result<()> {
    if !(p.u.is_finite() && p.v.is_finite()) {
        return Err(Error::Domain(format!("non-finite point ({}, {})", p.u, p.v)));
    }
    if p.v < p.u {
        return Err(Error::Domain(format!("v = {} < u = {}", p.v, p.u)));
    }
    Ok(())
}

/// `φ_L = r⁻¹ ln(v/u)`.
pub fn eval_phi_l(p: Point) -> Result<ProfileValue> {
    check_point(p)?;
    if p.u <= 0.0 {
        return Err(Error::Domain(format!("phi_L needs u > 0, got {}", p.u)));
    }
    let ratio = p.r() / p.u;
    let series = ratio < SERIES_THRESHOLD;
    let x = 2.0 * ratio;
    Ok(ProfileValue {
        value: 2.0 / p.u * log1p_over_x(x, series),
        regime: if series { Regime::AxisLimitSeries } else { Regime::Generic },
    })
}

/// `ψ_L = r⁻¹((ln u)/u − (ln v)/v)`.
pub fn eval_psi_l(p: Point) -> Result<ProfileValue> {
    check_point(p)?;
    if p.u <= 1.0 {
        return Err(Error::Domain(format!("psi_L needs u > 1, got {}", p.u)));
    }
    let ratio = p.r() / p.u;
    let series = ratio < SERIES_THRESHOLD;
    let x = 2.0 * ratio;
    let value = 2.0 / (p.u * p.u) * (p.u.ln() - log1p_over_x(x, series)) / (1.0 + x);
    Ok(ProfileValue {
        value,
        regime: if series { Regime::AxisLimitSeries } else { Regime::Generic },
    })
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Large-`z` behaviour `D_ℓ(z) ≈ 2^{ℓ+1} (ℓ!)² / (2ℓ+1)! · z^{−ℓ−1}`.
pub fn d_ell_far(ell: u32, z: f64) -> f64 {
    2f64.powi(ell as i32 + 1) * factorial(ell).powi(2) / factorial(2 * ell + 1)
        * z.powi(-(ell as i32) - 1)
}

/// `D_ℓ(z) = ∫_z^∞ (s−z)^ℓ / (s^{ℓ+1} (1+s/2)^{ℓ+1}) ds`.
///
/// Evaluated after the substitution `s = z/y`, which maps the half line to
/// `y ∈ (0, 1]` with integrand `2^{ℓ+1} (y(1−y))^ℓ / (2y+z)^{ℓ+1}`.
pub fn eval_d_ell(ell: u32, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("D_ell needs finite z > 0, got {z}")));
    }
    if ell == 0 {
        return Ok(((2.0 + z) / z).ln());
    }
    let scale = d_ell_far(ell, z).min(1.0);
    let pow = 2f64.powi(ell as i32 + 1);
    let n = ell as i32;
    let (value, _) = integrate_adaptive(
        |y| pow * (y * (1.0 - y)).powi(n) / (2.0 * y + z).powi(n + 1),
        0.0,
        1.0,
        1e-13 * scale,
        4000,
    );
    Ok(value)
}

/// Mode profile `C_ℓ D_ℓ(u/r) / (2r)`.
pub fn higher_mode_profile(ell: u32, c_ell: f64, u: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !(u > 0.0) {
        return Err(Error::Domain(format!("profile needs u, r > 0, got ({u}, {r})")));
    }
    if c_ell == 0.0 {
        return Ok(0.0);
    }
    Ok(c_ell * eval_d_ell(ell, u / r)? / (2.0 * r))
}
