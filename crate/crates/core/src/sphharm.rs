//! Real orthonormal spherical harmonics on a Gauss-Legendre × uniform
//! collocation grid.
//!
//! `Y_ℓ^m = P̄_ℓ^|m|(cos θ) · {1, √2 cos(mφ), √2 sin(|m|φ)}` for
//! `m = 0, m > 0, m < 0`, with `∫ Y² dω = 1` and no Condon-Shortley phase.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub ell: usize,
    pub m: i64,
}

impl ModeIndex {
    pub fn new(ell: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > ell {
            return Err(Error::Domain(format!("|m| = {} exceeds ell = {ell}", m.abs())));
        }
        Ok(Self { ell, m })
    }

    /// Position in the full `(L+1)²` ordering, `ℓ² + ℓ + m`.
    pub fn flat(&self) -> usize {
        ((self.ell * self.ell + self.ell) as i64 + self.m) as usize
    }

    /// Eigenvalue `ℓ(ℓ+1)` of `−Δ̸`.
    pub fn eigenvalue(&self) -> f64 {
        (self.ell * (self.ell + 1)) as f64
    }
}

/// The modes carried by an evolution: all `(ℓ, m)` up to `L`, or the
/// axisymmetric subset `m = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet {
    l_max: usize,
    axisymmetric: bool,
    modes: Vec<ModeIndex>,
}

impl ModeSet {
    pub fn full(l_max: usize) -> Self {
        let mut modes = Vec::with_capacity((l_max + 1) * (l_max + 1));
        for ell in 0..=l_max {
            for m in -(ell as i64)..=(ell as i64) {
                modes.push(ModeIndex { ell, m });
            }
        }
        Self { l_max, axisymmetric: false, modes }
    }

    pub fn axisymmetric(l_max: usize) -> Self {
        let modes = (0..=l_max).map(|ell| ModeIndex { ell, m: 0 }).collect();
        Self { l_max, axisymmetric: true, modes }
    }

    pub fn new(l_max: usize, axisymmetric: bool) -> Self {
        if axisymmetric {
            Self::axisymmetric(l_max)
        } else {
            Self::full(l_max)
        }
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.axisymmetric
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn position(&self, mode: ModeIndex) -> Option<usize> {
        if mode.ell > self.l_max || mode.m.unsigned_abs() as usize > mode.ell {
            return None;
        }
        if self.axisymmetric {
            (mode.m == 0).then_some(mode.ell)
        } else {
            Some(mode.ell * mode.ell + (mode.ell as i64 + mode.m) as usize)
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes descending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Normalized associated Legendre values `P̄_ℓ^m(x)` for `0 ≤ m ≤ ℓ ≤ L`,
/// indexed `[ℓ][m]`.
pub fn normalized_legendre(l_max: usize, x: f64) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut p = vec![vec![0.0; l_max + 1]; l_max + 1];
    p[0][0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=l_max {
        p[m][m] = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..l_max {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * x * p[m][m];
    }
    for m in 0..=l_max {
        for ell in (m + 2)..=l_max {
            let (lf, mf) = (ell as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[ell][m] = a * (x * p[ell - 1][m] - b * p[ell - 2][m]);
        }
    }
    p
}

/// Direct evaluation of the real harmonic `Y_ℓ^m(θ, φ)`.
pub fn real_sph_harm(mode: ModeIndex, theta: f64, phi: f64) -> f64 {
    let p = normalized_legendre(mode.ell, theta.cos());
    let am = mode.m.unsigned_abs() as usize;
    let base = p[mode.ell][am];
    match mode.m.cmp(&0) {
        std::cmp::Ordering::Equal => base,
        std::cmp::Ordering::Greater => 2f64.sqrt() * base * (mode.m as f64 * phi).cos(),
        std::cmp::Ordering::Less => 2f64.sqrt() * base * (am as f64 * phi).sin(),
    }
}

/// Collocation points on the sphere, θ-major (`index = iθ · n_φ + iφ`).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Combined quadrature weight per point; sums to 4π.
    pub weights: Vec<f64>,
}

impl AngularGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidGrid("empty angular grid".into()));
        }
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for wi in &w {
            for _ in 0..n_phi {
                weights.push(wi * dphi);
            }
        }
        Ok(Self { n_theta, n_phi, theta, phi, weights })
    }

    /// Smallest grid on which the modes of `set` are discretely orthonormal.
    pub fn minimal(set: &ModeSet) -> Self {
        let l = set.l_max();
        let n_phi = if set.is_axisymmetric() { 1 } else { 2 * l + 1 };
        Self::new(l + 1, n_phi).expect("nonempty grid")
    }

    /// Grid that integrates cubic products of band-`L` fields exactly, for
    /// projecting quadratic nonlinearities without aliasing.
    pub fn dealiased(set: &ModeSet) -> Self {
        let l = set.l_max();
        let n_phi = if set.is_axisymmetric() { 1 } else { 4 * l + 1 };
        Self::new(2 * l + 1, n_phi).expect("nonempty grid")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(θ, φ)` of collocation point `g`.
    pub fn point(&self, g: usize) -> (f64, f64) {
        (self.theta[g / self.n_phi], self.phi[g % self.n_phi])
    }
}

/// Precomputed analysis/synthesis tables for a mode set on a grid.
#[derive(Debug, Clone)]
pub struct SphericalTransform {
    modes: ModeSet,
    grid: AngularGrid,
    /// `Y_k(g)` stored mode-major.
    table: Vec<f64>,
    /// `w_g Y_k(g)` stored mode-major.
    weighted: Vec<f64>,
    eigen: Vec<f64>,
}

impl SphericalTransform {
    pub fn new(modes: ModeSet, grid: AngularGrid) -> Result<Self> {
        let l = modes.l_max();
        if grid.n_theta < l + 1 || (!modes.is_axisymmetric() && grid.n_phi < 2 * l + 1) {
            return Err(Error::InvalidGrid(format!(
                "grid {}x{} cannot resolve band limit {l}",
                grid.n_theta, grid.n_phi
            )));
        }
        let g_len = grid.len();
        let mut table = vec![0.0; modes.len() * g_len];
        for it in 0..grid.n_theta {
            let p = normalized_legendre(l, grid.theta[it].cos());
            for ip in 0..grid.n_phi {
                let g = it * grid.n_phi + ip;
                let ph = grid.phi[ip];
                for (k, mode) in modes.modes().iter().enumerate() {
                    let am = mode.m.unsigned_abs() as usize;
                    let base = p[mode.ell][am];
                    table[k * g_len + g] = match mode.m.cmp(&0) {
                        std::cmp::Ordering::Equal => base,
                        std::cmp::Ordering::Greater => {
                            2f64.sqrt() * base * (mode.m as f64 * ph).cos()
                        }
                        std::cmp::Ordering::Less => 2f64.sqrt() * base * (am as f64 * ph).sin(),
                    };
                }
            }
        }
        let weighted = table
            .chunks(g_len)
            .flat_map(|row| row.iter().zip(&grid.weights).map(|(y, w)| y * w))
            .collect();
        let eigen = modes.modes().iter().map(ModeIndex::eigenvalue).collect();
        Ok(Self { modes, grid, table, weighted, eigen })
    }

    /// Transform on the minimal grid of `modes`.
    pub fn minimal(modes: ModeSet) -> Self {
        let grid = AngularGrid::minimal(&modes);
        Self::new(modes, grid).expect("minimal grid resolves its modes")
    }

    /// Transform on the de-aliased grid of `modes`.
    pub fn dealiased(modes: ModeSet) -> Self {
        let grid = AngularGrid::dealiased(&modes);
        Self::new(modes, grid).expect("de-aliased grid resolves its modes")
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    /// `ℓ(ℓ+1)` per mode position.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    /// Unchecked projection; `values.len() == n_points`, `out.len() == n_modes`.
    #[inline]
    pub fn analyze_into(&self, values: &[f64], out: &mut [f64]) {
        let g_len = values.len();
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.weighted[k * g_len..(k + 1) * g_len];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(values) {
                acc += a * b;
            }
            *o = acc;
        }
    }

    /// Unchecked synthesis; `coeffs.len() == n_modes`, `out.len() == n_points`.
    #[inline]
    pub fn synthesize_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let g_len = out.len();
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.table[k * g_len..(k + 1) * g_len];
            for (o, y) in out.iter_mut().zip(row) {
                *o += c * y;
            }
        }
    }

    pub fn analyze(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.n_points() {
            return Err(Error::SizeMismatch { expected: self.n_points(), got: values.len() });
        }
        let mut out = vec![0.0; self.n_modes()];
        self.analyze_into(values, &mut out);
        Ok(out)
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.n_modes() {
            return Err(Error::SizeMismatch { expected: self.n_modes(), got: coeffs.len() });
        }
        let mut out = vec![0.0; self.n_points()];
        self.synthesize_into(coeffs, &mut out);
        Ok(out)
    }

    /// Coefficient-wise multiplication by `−ℓ(ℓ+1)`.
    pub fn laplace_beltrami(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.n_modes() {
            return Err(Error::SizeMismatch { expected: self.n_modes(), got: coeffs.len() });
        }
        Ok(coeffs.iter().zip(&self.eigen).map(|(c, e)| -e * c).collect())
    }

    /// `|∇̸f|²` on the grid through `½Δ̸(f²) − f Δ̸f`.
    ///
    /// `f` must be band-limited at `L/2` so that `f²` is resolved.
    pub fn angular_gradient_sq(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.n_modes() {
            return Err(Error::SizeMismatch { expected: self.n_modes(), got: coeffs.len() });
        }
        let limit = self.modes.l_max() / 2;
        for (mode, &c) in self.modes.modes().iter().zip(coeffs) {
            if mode.ell > limit && c != 0.0 {
                return Err(Error::BandwidthOverflow { ell: mode.ell, limit });
            }
        }
        let f = self.synthesize(coeffs)?;
        let lf = self.synthesize(&self.laplace_beltrami(coeffs)?)?;
        let sq: Vec<f64> = f.iter().map(|x| x * x).collect();
        let lap_sq = self.synthesize(&self.laplace_beltrami(&self.analyze(&sq)?)?)?;
        Ok(lap_sq
            .iter()
            .zip(f.iter().zip(&lf))
            .map(|(ls, (fv, lv))| 0.5 * ls - fv * lv)
            .collect())
    }

    /// Quadrature mean `(1/4π) ∫ f dω`.
    pub fn sphere_mean(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.n_points() {
            return Err(Error::SizeMismatch { expected: self.n_points(), got: values.len() });
        }
        Ok(values.iter().zip(&self.grid.weights).map(|(v, w)| v * w).sum::<f64>() / (4.0 * PI))
    }
}
