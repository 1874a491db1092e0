use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphharm::ModeSet;

/// Uniform double-null lattice with spacing `h` in both `u` and `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullGridSpec {
    pub h: f64,
    pub u_max: f64,
    pub v_max: f64,
    /// Outer edge of the initial-data support on the cone `u = 0`.
    pub support_bound: f64,
    pub l_max: usize,
    #[serde(default)]
    pub axisymmetric: bool,
}

fn steps(len: f64, h: f64) -> Option<usize> {
    let n = (len / h).round();
    ((len / h - n).abs() <= 1e-9 * n.max(1.0)).then_some(n as usize)
}

impl NullGridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        if !(self.h > 0.0) || !self.h.is_finite() {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.support_bound > 0.0 && self.support_bound < self.v_max) {
            return bad(format!(
                "need 0 < support_bound < v_max, got {} and {}",
                self.support_bound, self.v_max
            ));
        }
        if !(self.u_max > 0.0 && self.u_max <= self.v_max) {
            return bad(format!("need 0 < u_max <= v_max, got {} and {}", self.u_max, self.v_max));
        }
        if steps(self.v_max, self.h).is_none() {
            return bad(format!("v_max / h = {} is not an integer", self.v_max / self.h));
        }
        if steps(self.u_max, self.h).is_none() {
            return bad(format!("u_max / h = {} is not an integer", self.u_max / self.h));
        }
        if self.n_v() < 3 {
            return bad("fewer than three v-steps".into());
        }
        Ok(())
    }

    /// Index of the last `v` node.
    pub fn n_v(&self) -> usize {
        (self.v_max / self.h).round() as usize
    }

    /// Index of the last `u` row.
    pub fn n_u(&self) -> usize {
        (self.u_max / self.h).round() as usize
    }

    pub fn u(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn v(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn modes(&self) -> ModeSet {
        ModeSet::new(self.l_max, self.axisymmetric)
    }

    /// The anti-diagonal `i + j = d` closest to time `t`.
    pub fn diagonal_of(&self, t: f64) -> usize {
        (2.0 * t / self.h).round() as usize
    }

    /// Same grid with spacing `h / factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self { h: self.h / factor as f64, ..self.clone() }
    }
}

/// All modes of `Φ` and `Ψ` along one outgoing cone, node-major
/// (`phi[j·M + k]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub n_modes: usize,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl Level {
    pub fn zeros(n_nodes: usize, n_modes: usize) -> Self {
        Self { n_modes, phi: vec![0.0; n_nodes * n_modes], psi: vec![0.0; n_nodes * n_modes] }
    }

    pub fn phi_at(&self, j: usize) -> &[f64] {
        &self.phi[j * self.n_modes..(j + 1) * self.n_modes]
    }

    pub fn psi_at(&self, j: usize) -> &[f64] {
        &self.psi[j * self.n_modes..(j + 1) * self.n_modes]
    }
}
