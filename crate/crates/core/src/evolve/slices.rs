//! Values along anti-diagonals `i + j = d` (constant `t = d·h/2`).

use crate::sphharm::ModeSet;

/// One anti-diagonal, dense over `i ∈ [0, ⌊d/2⌋]` and node-major by `i`.
/// Nodes that were not recorded hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagonal {
    pub d: usize,
    pub n_modes: usize,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl Diagonal {
    pub fn empty(d: usize, n_modes: usize) -> Self {
        let n = (d / 2 + 1) * n_modes;
        Self { d, n_modes, phi: vec![f64::NAN; n], psi: vec![f64::NAN; n] }
    }

    pub fn i_max(&self) -> usize {
        self.d / 2
    }

    pub fn set(&mut self, i: usize, phi: &[f64], psi: &[f64]) {
        let m = self.n_modes;
        self.phi[i * m..(i + 1) * m].copy_from_slice(phi);
        self.psi[i * m..(i + 1) * m].copy_from_slice(psi);
    }

    fn raw(&self, field: Field, i: usize, k: usize) -> f64 {
        if i > self.i_max() {
            return f64::NAN;
        }
        match field {
            Field::Phi => self.phi[i * self.n_modes + k],
            Field::Psi => self.psi[i * self.n_modes + k],
        }
    }

    pub fn is_recorded(&self, i: usize) -> bool {
        i <= self.i_max() && !self.phi[i * self.n_modes].is_nan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Phi,
    Psi,
}

/// A report slice: the diagonal at time `t` and its two neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub h: f64,
    pub modes: ModeSet,
    pub lower: Diagonal,
    pub center: Diagonal,
    pub upper: Diagonal,
}

/// Derivatives of one mode at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeDerivs {
    pub value: f64,
    pub du: f64,
    pub dv: f64,
}

impl NodeDerivs {
    pub fn dt(&self) -> f64 {
        self.du + self.dv
    }

    pub fn dr(&self) -> f64 {
        self.dv - self.du
    }
}

impl Slice {
    pub fn d(&self) -> usize {
        self.center.d
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// `(u, v, r)` of node `i` on the centre diagonal.
    pub fn coords(&self, i: usize) -> (f64, f64, f64) {
        let u = i as f64 * self.h;
        let v = (self.d() - i) as f64 * self.h;
        (u, v, 0.5 * (v - u))
    }

    /// Recorded node indices of the centre diagonal, outermost (`i = 0`) first.
    pub fn nodes(&self) -> Vec<usize> {
        (0..=self.center.i_max()).filter(|&i| self.center.is_recorded(i)).collect()
    }

    fn parity(&self, k: usize) -> f64 {
        if self.modes.modes()[k].ell % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Value at `(i, j)` on whichever stored diagonal holds `i + j`, using
    /// `Φ_ℓ(u, v) = (−1)^{ℓ+1} Φ_ℓ(v, u)` below the axis.
    fn at(&self, field: Field, i: usize, j: usize, k: usize) -> f64 {
        let d = i + j;
        let diag = if d == self.center.d {
            &self.center
        } else if d + 1 == self.center.d {
            &self.lower
        } else if d == self.center.d + 1 {
            &self.upper
        } else {
            return f64::NAN;
        };
        if j >= i {
            diag.raw(field, i, k)
        } else {
            self.parity(k) * diag.raw(field, j, k)
        }
    }

    pub fn value(&self, field: Field, i: usize, k: usize) -> f64 {
        self.center.raw(field, i, k)
    }

    /// Centred null derivatives at centre node `i`, falling back to
    /// one-sided differences where a neighbour is missing.
    pub fn derivs(&self, field: Field, i: usize, k: usize) -> Option<NodeDerivs> {
        let j = self.d() - i;
        let h = self.h;
        let value = self.at(field, i, j, k);
        if value.is_nan() {
            return None;
        }
        let up_u = self.at(field, i + 1, j, k);
        let lo_u = if i > 0 { self.at(field, i - 1, j, k) } else { f64::NAN };
        let du = match (up_u.is_nan(), lo_u.is_nan()) {
            (false, false) => (up_u - lo_u) / (2.0 * h),
            (false, true) => (up_u - value) / h,
            (true, false) => (value - lo_u) / h,
            (true, true) => return None,
        };
        let up_v = self.at(field, i, j + 1, k);
        let lo_v = self.at(field, i, j - 1, k);
        let dv = match (up_v.is_nan(), lo_v.is_nan()) {
            (false, false) => (up_v - lo_v) / (2.0 * h),
            (false, true) => (up_v - value) / h,
            (true, false) => (value - lo_v) / h,
            (true, true) => return None,
        };
        Some(NodeDerivs { value, du, dv })
    }

    /// `φ = Φ/r` at node `i`. On the axis, modes with `ℓ ≥ 1` vanish and the
    /// monopole is extrapolated from the nodes at `r = h` and `r = 2h`.
    pub fn field_over_r(&self, field: Field, i: usize, k: usize) -> f64 {
        let (_, _, r) = self.coords(i);
        if r > 0.0 {
            return self.value(field, i, k) / r;
        }
        if self.modes.modes()[k].ell > 0 {
            return 0.0;
        }
        // r = h and r = 2h on the centre diagonal
        if i < 2 {
            return f64::NAN;
        }
        let f1 = self.value(field, i - 1, k) / self.h;
        let f2 = self.value(field, i - 2, k) / (2.0 * self.h);
        (4.0 * f1 - f2) / 3.0
    }
}
