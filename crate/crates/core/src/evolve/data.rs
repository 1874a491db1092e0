use serde::{Deserialize, Serialize};

use super::grid::{Level, NullGridSpec};
use crate::error::{Error, Result};
use crate::sphharm::{ModeIndex, ModeSet};

/// Smooth bump `exp(1 − 1/(1 − x²))` on `(−1, 1)`, peak value 1 at `x = 0`.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularComponent {
    pub ell: usize,
    pub m: i64,
    pub weight: f64,
}

/// Radiation-field data `ε · Σ w_ℓm bump(v) Y_ℓm` for one unknown on the
/// initial cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldData {
    pub amplitude: f64,
    pub support: [f64; 2],
    #[serde(default)]
    pub angular: Vec<AngularComponent>,
}

impl FieldData {
    pub fn zero() -> Self {
        Self { amplitude: 0.0, support: [0.5, 1.0], angular: Vec::new() }
    }

    /// Spherically symmetric data, normalized so that `rψ = ε·bump` (the
    /// `(0,0)` coefficient carries the `√(4π)` factor).
    pub fn radial(amplitude: f64, support: [f64; 2]) -> Self {
        Self {
            amplitude,
            support,
            angular: vec![AngularComponent {
                ell: 0,
                m: 0,
                weight: (4.0 * std::f64::consts::PI).sqrt(),
            }],
        }
    }

    pub fn profile(&self, v: f64) -> f64 {
        let [a, b] = self.support;
        self.amplitude * bump((2.0 * v - a - b) / (b - a))
    }

    fn validate(&self, name: &str, grid: &NullGridSpec, modes: &ModeSet) -> Result<()> {
        let [a, b] = self.support;
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidData(format!("{name}.amplitude must be >= 0")));
        }
        if !(a > 0.0 && a < b && b <= grid.support_bound) {
            return Err(Error::InvalidData(format!(
                "{name}.support [{a}, {b}] must satisfy 0 < a < b <= {}",
                grid.support_bound
            )));
        }
        for c in &self.angular {
            let mode = ModeIndex::new(c.ell, c.m)
                .map_err(|e| Error::InvalidData(format!("{name}.angular: {e}")))?;
            if modes.position(mode).is_none() {
                return Err(Error::InvalidData(format!(
                    "{name}.angular: mode ({}, {}) not carried by the grid",
                    c.ell, c.m
                )));
            }
            if !c.weight.is_finite() {
                return Err(Error::InvalidData(format!("{name}.angular: non-finite weight")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub phi: FieldData,
    pub psi: FieldData,
}

impl InitialDataSpec {
    pub fn validate(&self, grid: &NullGridSpec) -> Result<()> {
        let modes = grid.modes();
        self.phi.validate("phi", grid, &modes)?;
        self.psi.validate("psi", grid, &modes)
    }
}

/// Populates the cone `u = 0`; the axis node `j = 0` stays zero.
pub fn init_cone_data(spec: &InitialDataSpec, grid: &NullGridSpec) -> Result<Level> {
    grid.validate()?;
    spec.validate(grid)?;
    let modes = grid.modes();
    let m = modes.len();
    let n = grid.n_v() + 1;
    let mut level = Level::zeros(n, m);
    for (field, out) in [(&spec.phi, &mut level.phi), (&spec.psi, &mut level.psi)] {
        for c in &field.angular {
            let k = modes
                .position(ModeIndex { ell: c.ell, m: c.m })
                .expect("validated mode");
            for j in 1..n {
                out[j * m + k] += c.weight * field.profile(grid.v(j));
            }
        }
    }
    Ok(level)
}
