//! Radiation-field post-processing: asymptotic constants, identities,
//! region classification and profile residuals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Field, Slice};
use crate::profiles::{eval_phi_l, eval_psi_l, higher_mode_profile, Point};
use crate::quadrature::{cumulative_trapezoid, simpson_weights};
use crate::sphharm::{ModeSet, SphericalTransform};

/// Fields sampled on the truncation surface `v = v_max`, node-major by `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationRecord {
    pub modes: ModeSet,
    pub h: f64,
    pub v_max: f64,
    pub u: Vec<f64>,
    pub psi: Vec<f64>,
    pub upsi: Vec<f64>,
    pub phi: Vec<f64>,
    /// `v ∂_vΦ` at `v_max`, an alternative estimator of `Φ/ln v` at infinity.
    pub log_slope: Option<Vec<f64>>,
}

impl RadiationRecord {
    /// Record from `Ψ` and `Φ`; `UΨ = 2∂_uΨ` is differenced in `u`
    /// (centred inside, second-order one-sided at the ends). Records cut
    /// short by a divergence fall back to lower order.
    pub fn from_columns(
        modes: ModeSet,
        h: f64,
        v_max: f64,
        u: Vec<f64>,
        psi: Vec<f64>,
        phi: Vec<f64>,
    ) -> Result<Self> {
        let m = modes.len();
        let n = u.len();
        if n == 0 {
            return Err(Error::InsufficientData("empty radiation record".into()));
        }
        let mut upsi = vec![0.0; n * m];
        if n < 3 {
            if n == 2 {
                for k in 0..m {
                    let d = 2.0 * (psi[m + k] - psi[k]) / h;
                    upsi[k] = d;
                    upsi[m + k] = d;
                }
            }
            return Self::from_parts(modes, h, v_max, u, psi, upsi, phi);
        }
        for k in 0..m {
            let f = |i: usize| psi[i * m + k];
            upsi[k] = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / h;
            for i in 1..n - 1 {
                upsi[i * m + k] = (f(i + 1) - f(i - 1)) / h;
            }
            upsi[(n - 1) * m + k] = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / h;
        }
        Self::from_parts(modes, h, v_max, u, psi, upsi, phi)
    }

    pub fn from_parts(
        modes: ModeSet,
        h: f64,
        v_max: f64,
        u: Vec<f64>,
        psi: Vec<f64>,
        upsi: Vec<f64>,
        phi: Vec<f64>,
    ) -> Result<Self> {
        let expected = u.len() * modes.len();
        for len in [psi.len(), upsi.len(), phi.len()] {
            if len != expected {
                return Err(Error::SizeMismatch { expected, got: len });
            }
        }
        if u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InsufficientData("u-nodes not strictly increasing".into()));
        }
        if !(v_max > 1.0) {
            return Err(Error::Domain(format!("v_max = {v_max} must exceed 1")));
        }
        Ok(Self { modes, h, v_max, u, psi, upsi, phi, log_slope: None })
    }

    pub fn n_u(&self) -> usize {
        self.u.len()
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn row<'a>(&self, data: &'a [f64], i: usize) -> &'a [f64] {
        let m = self.n_modes();
        &data[i * m..(i + 1) * m]
    }

    /// `Φ / ln v_max` at node `i`.
    pub fn phi_over_lnv(&self, i: usize) -> Vec<f64> {
        let l = self.v_max.ln();
        self.row(&self.phi, i).iter().map(|x| x / l).collect()
    }

    /// Node index for retarded time `u`, if it lies on the record.
    pub fn index_of(&self, u: f64) -> Option<usize> {
        let i = ((u - self.u[0]) / self.h).round();
        (i >= 0.0 && (i as usize) < self.n_u() && (self.u[i as usize] - u).abs() <= 1e-9 * self.h.max(u))
            .then_some(i as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub l_max: usize,
    pub axisymmetric: bool,
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub v_max: f64,
    pub h: f64,
    pub u_max: f64,
    pub quadrature: String,
    /// `Σ(UΨ)²` at the last node relative to its peak.
    pub tail_fraction: f64,
    pub tail_decayed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub c1: f64,
    pub c2: f64,
    pub c5: f64,
    /// `c₃(ω)` on the collocation points of `grid`, θ-major.
    pub c3: Vec<f64>,
    pub c4: Vec<f64>,
    pub grid: GridInfo,
    pub truncation: Truncation,
}

/// Tail threshold for `|UΨ(u_max)|²` relative to its peak.
pub const TAIL_TOLERANCE: f64 = 1e-3;

/// `c₁ = (1/32π)∬(UΨ)²`, `c₂ = (1/16π)∬(Φ/ln v)(UΨ)²`,
/// `c₃ = ⅛∫(UΨ)²`, `c₄ = ¼∫(Φ/ln v)(UΨ)²`, `c₅ = (∬(UΨ/2)⁴)^{1/2}`.
pub fn compute_constants(rec: &RadiationRecord) -> Result<AsymptoticConstants> {
    let tr = SphericalTransform::dealiased(rec.modes.clone());
    let (m, g_len, n) = (tr.n_modes(), tr.n_points(), rec.n_u());
    let wu = simpson_weights(n, rec.h);
    let mut c3 = vec![0.0; g_len];
    let mut c4 = vec![0.0; g_len];
    let mut quart = vec![0.0; g_len];
    let (mut c1_acc, mut c2_acc) = (0.0, 0.0);
    let mut ug = vec![0.0; g_len];
    let mut pg = vec![0.0; g_len];
    let mut sq = vec![0.0; g_len];
    let mut proj = vec![0.0; m];
    let mut energy = Vec::with_capacity(n);
    for i in 0..n {
        let up = rec.row(&rec.upsi, i);
        let pl = rec.phi_over_lnv(i);
        tr.synthesize_into(up, &mut ug);
        tr.synthesize_into(&pl, &mut pg);
        for g in 0..g_len {
            let u2 = ug[g] * ug[g];
            sq[g] = u2;
            c3[g] += wu[i] * u2 / 8.0;
            c4[g] += wu[i] * pg[g] * u2 / 4.0;
            quart[g] += wu[i] * (0.5 * ug[g]).powi(4);
        }
        tr.analyze_into(&sq, &mut proj);
        let e: f64 = up.iter().map(|x| x * x).sum();
        energy.push(e);
        c1_acc += wu[i] * e;
        c2_acc += wu[i] * pl.iter().zip(&proj).map(|(a, b)| a * b).sum::<f64>();
    }
    let weights = &tr.grid().weights;
    let c5 = quart.iter().zip(weights).map(|(q, w)| q * w).sum::<f64>().max(0.0).sqrt();
    let peak = energy.iter().copied().fold(0.0, f64::max);
    let tail_fraction = if peak > 0.0 { energy[n - 1] / peak } else { 0.0 };
    let grid = tr.grid();
    Ok(AsymptoticConstants {
        c1: c1_acc / (32.0 * PI),
        c2: c2_acc / (16.0 * PI),
        c5,
        c3,
        c4,
        grid: GridInfo {
            l_max: rec.modes.l_max(),
            axisymmetric: rec.modes.is_axisymmetric(),
            n_theta: grid.n_theta,
            n_phi: grid.n_phi,
            theta: grid.theta.clone(),
            phi: grid.phi.clone(),
        },
        truncation: Truncation {
            v_max: rec.v_max,
            h: rec.h,
            u_max: rec.u[n - 1],
            quadrature: "composite Simpson in u, Gauss-Legendre x uniform on the sphere".into(),
            tail_fraction,
            tail_decayed: tail_fraction <= TAIL_TOLERANCE,
        },
    })
}

/// Coefficient `κ` in `(Φ/ln v)(u, ∞) = κ ∫₀ᵘ (UΨ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RelationNormalization {
    #[default]
    Quarter,
    Eighth,
}

impl RelationNormalization {
    pub fn kappa(self) -> f64 {
        match self {
            Self::Quarter => 0.25,
            Self::Eighth => 0.125,
        }
    }
}

/// How `Φ/ln v` at infinity is estimated from data at `v_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LimitEstimator {
    /// `Φ(u, v_max) / ln v_max`
    #[default]
    Ratio,
    /// `v ∂_vΦ` at `v_max`
    LogSlope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub normalization: RelationNormalization,
    pub estimator: LimitEstimator,
    /// End of the window `[0, u_w]` holding all but `1e−4` of `∬(UΨ)²`.
    pub relation_window_end: f64,
    /// `sup_{u ≤ u_w, ω} |Φ/ln v − κ∫₀ᵘ(UΨ)²|`
    pub relation_sup: f64,
    /// `max_ω κ∫₀^{u_w}(UΨ)²`
    pub relation_plateau: f64,
    pub relation_relative: f64,
    /// `max_ω |c₄ − 8κ c₃²|`
    pub c4_gap: f64,
    pub c4_gap_relative: f64,
    pub c1_mean_gap: f64,
    pub c2_mean_gap: f64,
}

/// Fraction of the radiated `∬(UΨ)²` left outside the relation window.
pub const RELATION_WINDOW_TAIL: f64 = 1e-4;

pub fn check_identities(
    rec: &RadiationRecord,
    consts: &AsymptoticConstants,
    normalization: RelationNormalization,
    estimator: LimitEstimator,
) -> Result<IdentityReport> {
    let tr = SphericalTransform::dealiased(rec.modes.clone());
    let g_len = tr.n_points();
    if consts.c3.len() != g_len || consts.c4.len() != g_len {
        return Err(Error::SizeMismatch { expected: g_len, got: consts.c3.len() });
    }
    let n = rec.n_u();
    let kappa = normalization.kappa();
    let est_source: Vec<f64> = match estimator {
        LimitEstimator::Ratio => {
            let l = rec.v_max.ln();
            rec.phi.iter().map(|x| x / l).collect()
        }
        LimitEstimator::LogSlope => rec
            .log_slope
            .clone()
            .ok_or_else(|| Error::InsufficientData("record has no log-slope column".into()))?,
    };
    // pointwise (UΨ)² and estimator on the grid, per u-node
    let mut sq = vec![vec![0.0; n]; g_len];
    let mut est = vec![vec![0.0; n]; g_len];
    let mut buf = vec![0.0; g_len];
    for i in 0..n {
        tr.synthesize_into(rec.row(&rec.upsi, i), &mut buf);
        for g in 0..g_len {
            sq[g][i] = buf[g] * buf[g];
        }
        tr.synthesize_into(rec.row(&est_source, i), &mut buf);
        for g in 0..g_len {
            est[g][i] = buf[g];
        }
    }
    let cum: Vec<Vec<f64>> = sq.iter().map(|s| cumulative_trapezoid(s, rec.h)).collect();
    let w = &tr.grid().weights;
    let sphere_cum: Vec<f64> = (0..n).map(|i| (0..g_len).map(|g| w[g] * cum[g][i]).sum()).collect();
    let total = sphere_cum[n - 1];
    let i_w = if total > 0.0 {
        sphere_cum
            .iter()
            .position(|c| *c >= (1.0 - RELATION_WINDOW_TAIL) * total)
            .unwrap_or(n - 1)
    } else {
        n - 1
    };
    let mut relation_sup: f64 = 0.0;
    let mut plateau: f64 = 0.0;
    for g in 0..g_len {
        for i in 0..=i_w {
            relation_sup = relation_sup.max((est[g][i] - kappa * cum[g][i]).abs());
        }
        plateau = plateau.max(kappa * cum[g][i_w]);
    }
    let c4_max = consts.c4.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let c4_gap = consts
        .c3
        .iter()
        .zip(&consts.c4)
        .map(|(c3, c4)| (c4 - 8.0 * kappa * c3 * c3).abs())
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        normalization,
        estimator,
        relation_window_end: rec.u[i_w],
        relation_sup,
        relation_plateau: plateau,
        relation_relative: if plateau > 0.0 { relation_sup / plateau } else { 0.0 },
        c4_gap,
        c4_gap_relative: if c4_max > 0.0 { c4_gap / c4_max } else { 0.0 },
        c1_mean_gap: (consts.c1 - tr.sphere_mean(&consts.c3)?).abs(),
        c2_mean_gap: (consts.c2 - tr.sphere_mean(&consts.c4)?).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    #[serde(rename = "region_i")]
    RegionI,
    #[serde(rename = "region_ii")]
    RegionII,
    /// Both inequalities hold; happens whenever `½exp(u^δ) ≤ ½u^{1−δ}`.
    Both,
    Neither,
}

impl Region {
    pub fn in_region_i(self) -> bool {
        matches!(self, Region::RegionI | Region::Both)
    }

    pub fn in_region_ii(self) -> bool {
        matches!(self, Region::RegionII | Region::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::RegionI => "region_i",
            Region::RegionII => "region_ii",
            Region::Both => "both",
            Region::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionTag {
    pub region: Region,
    pub c_int: bool,
    pub c_ext: bool,
    pub d_int: bool,
    pub d_ext: bool,
}

const BOUNDARY_RTOL: f64 = 1e-12;

/// Region I: `r ≤ ½u^{1−δ}`; Region II: `r ≥ ½exp(u^δ)`; closed boundaries.
pub fn region_classify(u: f64, v: f64, delta: f64) -> Result<RegionTag> {
    if !(u > 0.0) || v < u || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("region needs u > 0, v >= u, 0 < delta < 1; got ({u}, {v}, {delta})")));
    }
    let r = 0.5 * (v - u);
    let le = |a: f64, b: f64| a <= b * (1.0 + BOUNDARY_RTOL);
    let ge = |a: f64, b: f64| a >= b * (1.0 - BOUNDARY_RTOL);
    let inner = 0.5 * u.powf(1.0 - delta);
    let outer = 0.5 * u.powf(1.0 + delta);
    let far = 0.5 * u.powf(delta).exp();
    let region = match (le(r, inner), ge(r, far)) {
        (true, true) => Region::Both,
        (true, false) => Region::RegionI,
        (false, true) => Region::RegionII,
        (false, false) => Region::Neither,
    };
    Ok(RegionTag {
        region,
        c_int: le(r, inner),
        c_ext: ge(r, inner),
        d_int: le(r, outer),
        d_ext: ge(r, outer),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub u: f64,
    pub v: f64,
    pub region: Region,
    pub field: String,
    pub leading: f64,
    pub measured: f64,
    pub relative_residual: f64,
}

/// Leading terms below this magnitude are not compared.
pub const LEADING_FLOOR: f64 = 1e-14;

/// `(ℓ=0 part of φ, ℓ=0 part of ψ̄ = ψ + φ²/2)` at centre node `i`.
fn monopole_parts(slice: &Slice, i: usize) -> Option<(f64, f64)> {
    let m = slice.n_modes();
    let y00 = 1.0 / (4.0 * PI).sqrt();
    let phi: Vec<f64> = (0..m).map(|k| slice.field_over_r(Field::Phi, i, k)).collect();
    let psi0 = slice.field_over_r(Field::Psi, i, 0);
    if phi.iter().any(|x| x.is_nan()) || psi0.is_nan() {
        return None;
    }
    let mean_sq: f64 = phi.iter().map(|x| x * x).sum::<f64>() / (4.0 * PI);
    Some((phi[0] * y00, psi0 * y00 + 0.5 * mean_sq))
}

/// Profile residuals on one slice (see [`ResidualRow`]).
///
/// * `phi_l0`: `|φ_{ℓ=0} − c₁φ_L| / (c₁φ_L)` at every node with `u ≥ 2`.
/// * `psibar_l0`: `|ψ̄_{ℓ=0} − c₂ψ_L| / (|c₂|ψ_L)` likewise.
/// * `phi_omega`: Region II, `sup_ω |φ − c₃φ_L| / (c₃φ_L)`.
/// * `psibar_omega`: Region II, `sup_ω |ψ̄ − r⁻¹Ψ(u, v_max) + c₄ ln v/(rv)| · r v u^{δ/4}/ln v`.
pub fn residual_profile(
    slice: &Slice,
    rec: &RadiationRecord,
    consts: &AsymptoticConstants,
    delta: f64,
) -> Result<Vec<ResidualRow>> {
    let tr = SphericalTransform::dealiased(slice.modes.clone());
    let g_len = tr.n_points();
    if consts.c3.len() != g_len {
        return Err(Error::SizeMismatch { expected: g_len, got: consts.c3.len() });
    }
    let m = slice.n_modes();
    let mut rows = Vec::new();
    let mut coef = vec![0.0; m];
    let mut phi_g = vec![0.0; g_len];
    let mut psi_g = vec![0.0; g_len];
    let mut rad_g = vec![0.0; g_len];
    for i in slice.nodes() {
        let (u, v, r) = slice.coords(i);
        if u < 2.0 {
            continue;
        }
        let tag = region_classify(u, v, delta)?;
        let p = Point::new(u, v);
        let phil = eval_phi_l(p)?.value;
        let psil = eval_psi_l(p)?.value;
        let mut push = |field: &str, leading: f64, measured: f64, scale: f64| {
            if leading.abs() >= LEADING_FLOOR && scale >= LEADING_FLOOR {
                rows.push(ResidualRow {
                    u,
                    v,
                    region: tag.region,
                    field: field.into(),
                    leading,
                    measured,
                    relative_residual: (measured - leading).abs() / scale,
                });
            }
        };
        if let Some((phi0, psibar0)) = monopole_parts(slice, i) {
            push("phi_l0", consts.c1 * phil, phi0, consts.c1 * phil);
            push("psibar_l0", consts.c2 * psil, psibar0, consts.c2.abs() * psil);
        }
        if !tag.region.in_region_ii() || r == 0.0 {
            continue;
        }
        let Some(ri) = rec.index_of(u) else { continue };
        for k in 0..m {
            coef[k] = slice.value(Field::Phi, i, k) / r;
        }
        tr.synthesize_into(&coef, &mut phi_g);
        for k in 0..m {
            coef[k] = slice.value(Field::Psi, i, k) / r;
        }
        tr.synthesize_into(&coef, &mut psi_g);
        tr.synthesize_into(rec.row(&rec.psi, ri), &mut rad_g);
        let lnv = v.ln();
        let norm = r * v * u.powf(delta / 4.0) / lnv;
        let mut worst_phi: Option<(f64, f64, f64)> = None;
        let mut worst_psi: Option<(f64, f64, f64)> = None;
        for g in 0..g_len {
            let lead = consts.c3[g] * phil;
            if lead.abs() >= LEADING_FLOOR {
                let res = (phi_g[g] - lead).abs() / lead.abs();
                if worst_phi.map_or(true, |w| res > w.2) {
                    worst_phi = Some((lead, phi_g[g], res));
                }
            }
            let lead = rad_g[g] / r - consts.c4[g] * lnv / (r * v);
            let meas = psi_g[g] + 0.5 * phi_g[g] * phi_g[g];
            let res = (meas - lead).abs() * norm;
            if worst_psi.map_or(true, |w| res > w.2) {
                worst_psi = Some((lead, meas, res));
            }
        }
        for (name, worst) in [("phi_omega", worst_phi), ("psibar_omega", worst_psi)] {
            if let Some((leading, measured, relative_residual)) = worst {
                if leading.abs() >= LEADING_FLOOR {
                    rows.push(ResidualRow {
                        u,
                        v,
                        region: tag.region,
                        field: name.into(),
                        leading,
                        measured,
                        relative_residual,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// `C_k = ∫ ((∂_tΨ)²)_k du` per mode, with `∂_tΨ ≈ ½UΨ` at `v_max`.
pub fn mode_coefficients(rec: &RadiationRecord) -> Vec<f64> {
    let tr = SphericalTransform::dealiased(rec.modes.clone());
    let (m, g_len, n) = (tr.n_modes(), tr.n_points(), rec.n_u());
    let wu = simpson_weights(n, rec.h);
    let mut buf = vec![0.0; g_len];
    let mut proj = vec![0.0; m];
    let mut out = vec![0.0; m];
    for i in 0..n {
        tr.synthesize_into(rec.row(&rec.upsi, i), &mut buf);
        buf.iter_mut().for_each(|x| *x = 0.25 * *x * *x);
        tr.analyze_into(&buf, &mut proj);
        for k in 0..m {
            out[k] += wu[i] * proj[k];
        }
    }
    out
}

/// Default `δ_ℓ = min(δ/2, 1/(4ℓ+4))`.
pub fn default_delta_ell(delta: f64, ell: usize) -> f64 {
    (0.5 * delta).min(1.0 / (4.0 * ell as f64 + 4.0))
}

/// Residual of every `(ℓ, m)` mode of `φ` against `C_ℓm D_ℓ(u/r)/(2r)` in
/// `r ≥ u^{1−δ_ℓ}`, `u ≥ 2`.
pub fn mode_profile_residual(
    ell: usize,
    slice: &Slice,
    rec: &RadiationRecord,
    delta_ell: f64,
) -> Result<Vec<ResidualRow>> {
    let coeffs = mode_coefficients(rec);
    let modes = slice.modes.modes();
    let excited: Vec<usize> = (0..modes.len())
        .filter(|&k| modes[k].ell == ell && coeffs[k].abs() >= LEADING_FLOOR)
        .collect();
    if excited.is_empty() {
        let magnitude = (0..modes.len())
            .filter(|&k| modes[k].ell == ell)
            .map(|k| coeffs[k].abs())
            .fold(0.0, f64::max);
        return Err(Error::ModeNotExcited { ell, magnitude });
    }
    let mut rows = Vec::new();
    for i in slice.nodes() {
        let (u, v, r) = slice.coords(i);
        if u < 2.0 || r <= 0.0 || r < u.powf(1.0 - delta_ell) {
            continue;
        }
        let tag = region_classify(u, v, 2.0 * delta_ell)?;
        for &k in &excited {
            let leading = higher_mode_profile(ell as u32, coeffs[k], u, r)?;
            if leading.abs() < LEADING_FLOOR {
                continue;
            }
            let measured = slice.value(Field::Phi, i, k) / r;
            rows.push(ResidualRow {
                u,
                v,
                region: tag.region,
                field: format!("phi_{}_{}", ell, modes[k].m),
                leading,
                measured,
                relative_residual: (measured - leading).abs() / leading.abs(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XRow {
    pub u: f64,
    pub v: f64,
    /// `sup_ω |UΦ − ln v (∂_tΨ)²|`
    pub sup_x: f64,
    /// `sup_x · u / ln u`
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XReport {
    pub rows: Vec<XRow>,
    pub sup_normalized: f64,
}

/// `X = UΦ − ln v (∂_tΨ)²` on slice nodes in `r ≥ ½u^{1+2δ}`, `u ≥ 2`.
pub fn x_diagnostic(slice: &Slice, delta: f64) -> Result<XReport> {
    let tr = SphericalTransform::minimal(slice.modes.clone());
    let m = slice.n_modes();
    let g_len = tr.n_points();
    let mut uphi = vec![0.0; m];
    let mut dtpsi = vec![0.0; m];
    let mut a = vec![0.0; g_len];
    let mut b = vec![0.0; g_len];
    let mut rows = Vec::new();
    for i in slice.nodes() {
        let (u, v, r) = slice.coords(i);
        if u < 2.0 || r < 0.5 * u.powf(1.0 + 2.0 * delta) {
            continue;
        }
        let mut ok = true;
        for k in 0..m {
            match (slice.derivs(Field::Phi, i, k), slice.derivs(Field::Psi, i, k)) {
                (Some(p), Some(q)) => {
                    uphi[k] = 2.0 * p.du;
                    dtpsi[k] = q.dt();
                }
                _ => ok = false,
            }
        }
        if !ok {
            continue;
        }
        tr.synthesize_into(&uphi, &mut a);
        tr.synthesize_into(&dtpsi, &mut b);
        let lnv = v.ln();
        let sup_x = a.iter().zip(&b).map(|(x, y)| (x - lnv * y * y).abs()).fold(0.0, f64::max);
        rows.push(XRow { u, v, sup_x, normalized: sup_x * u / u.ln() });
    }
    let sup_normalized = rows.iter().map(|r| r.normalized).fold(0.0, f64::max);
    Ok(XReport { rows, sup_normalized })
}
