//! Cell-centred nonlinear sources in mode form.
//!
//! With `a = rUφ = 2∂_uΦ + Φ/r` and `b = rVφ = 2∂_vΦ − Φ/r`,
//!
//! * `r⁻¹(∂_tΨ)²` is projected from `T²`, `T = ∂_tΨ`;
//! * `rQ₀(φ,φ) = r⁻³(−a b r² + |∇̸Φ|²)` with
//!   `|∇̸Φ|² = ½Δ̸(Φ²) − ΦΔ̸Φ`.

use crate::sphharm::{ModeSet, SphericalTransform};

/// Pointwise `Q₀ = −(Uφ)(Vφ) + r⁻²|∇̸φ|²`.
pub fn q0_null(u_phi: f64, v_phi: f64, grad_sq: f64, r: f64) -> f64 {
    -u_phi * v_phi + grad_sq / (r * r)
}

/// Per-thread scratch buffers for [`SourceAssembler::assemble_cell`].
#[derive(Debug, Clone)]
pub struct SourceWorkspace {
    coeff: [Vec<f64>; 5],
    grid: [Vec<f64>; 5],
    prod: [Vec<f64>; 3],
    proj: [Vec<f64>; 3],
}

/// Builds the per-mode right-hand sides on the de-aliased collocation grid.
#[derive(Debug, Clone)]
pub struct SourceAssembler {
    transform: SphericalTransform,
    radial: bool,
}

const INV_SQRT_4PI: f64 = 0.282_094_791_773_878_14;

impl SourceAssembler {
    pub fn new(modes: ModeSet) -> Self {
        let radial = modes.len() == 1;
        Self { transform: SphericalTransform::dealiased(modes), radial }
    }

    pub fn n_modes(&self) -> usize {
        self.transform.n_modes()
    }

    pub fn transform(&self) -> &SphericalTransform {
        &self.transform
    }

    pub fn workspace(&self) -> SourceWorkspace {
        let m = self.transform.n_modes();
        let g = self.transform.n_points();
        SourceWorkspace {
            coeff: std::array::from_fn(|_| vec![0.0; m]),
            grid: std::array::from_fn(|_| vec![0.0; g]),
            prod: std::array::from_fn(|_| vec![0.0; g]),
            proj: std::array::from_fn(|_| vec![0.0; m]),
        }
    }

    /// Sources at the centre of the cell with corners `S, E, W, N`
    /// (`phi[0..4]`), `Ψ_S`, `Ψ_N`, cell radius `r` and spacing `h`.
    #[allow(clippy::too_many_arguments)]
    #[inline]
    pub fn assemble_cell(
        &self,
        ws: &mut SourceWorkspace,
        phi: [&[f64]; 4],
        psi_s: &[f64],
        psi_n: &[f64],
        r: f64,
        h: f64,
        out_phi: &mut [f64],
        out_psi: &mut [f64],
    ) {
        let [s, e, w, n] = phi;
        let inv_h = 1.0 / h;
        let inv_r = 1.0 / r;
        if self.radial {
            let t = (psi_n[0] - psi_s[0]) * inv_h;
            let c = 0.5 * (e[0] + w[0]);
            let a = (w[0] - s[0] + n[0] - e[0]) * inv_h + c * inv_r;
            let b = (e[0] - s[0] + n[0] - w[0]) * inv_h - c * inv_r;
            out_phi[0] = INV_SQRT_4PI * t * t * inv_r;
            out_psi[0] = -INV_SQRT_4PI * a * b * inv_r;
            return;
        }
        let m = self.transform.n_modes();
        let eig = self.transform.eigenvalues();
        let [tc, ac, bc, pc, lc] = &mut ws.coeff;
        for k in 0..m {
            let c = 0.5 * (e[k] + w[k]);
            tc[k] = (psi_n[k] - psi_s[k]) * inv_h;
            ac[k] = (w[k] - s[k] + n[k] - e[k]) * inv_h + c * inv_r;
            bc[k] = (e[k] - s[k] + n[k] - w[k]) * inv_h - c * inv_r;
            pc[k] = c;
            lc[k] = -eig[k] * c;
        }
        for (c, g) in ws.coeff.iter().zip(ws.grid.iter_mut()) {
            self.transform.synthesize_into(c, g);
        }
        let [tg, ag, bg, pg, lg] = &ws.grid;
        let [q1, q2, q3] = &mut ws.prod;
        let r2 = r * r;
        for g in 0..tg.len() {
            q1[g] = tg[g] * tg[g];
            q2[g] = -ag[g] * bg[g] * r2 - pg[g] * lg[g];
            q3[g] = pg[g] * pg[g];
        }
        for (q, p) in ws.prod.iter().zip(ws.proj.iter_mut()) {
            self.transform.analyze_into(q, p);
        }
        let [a1, a2, a3] = &ws.proj;
        let inv_r3 = inv_r * inv_r * inv_r;
        for k in 0..m {
            out_phi[k] = a1[k] * inv_r;
            out_psi[k] = (a2[k] - 0.5 * eig[k] * a3[k]) * inv_r3;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::ModeIndex;
    use std::f64::consts::PI;

    fn cell(
        asm: &SourceAssembler,
        phi: impl Fn(f64, f64, usize) -> f64,
        psi: impl Fn(f64, f64, usize) -> f64,
        uc: f64,
        vc: f64,
        h: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let m = asm.n_modes();
        let corners = [
            (uc - h / 2.0, vc - h / 2.0),
            (uc - h / 2.0, vc + h / 2.0),
            (uc + h / 2.0, vc - h / 2.0),
            (uc + h / 2.0, vc + h / 2.0),
        ];
        let vals: Vec<Vec<f64>> = corners
            .iter()
            .map(|&(u, v)| (0..m).map(|k| phi(u, v, k)).collect())
            .collect();
        let ps: Vec<f64> = (0..m).map(|k| psi(corners[0].0, corners[0].1, k)).collect();
        let pn: Vec<f64> = (0..m).map(|k| psi(corners[3].0, corners[3].1, k)).collect();
        let mut ws = asm.workspace();
        let (mut op, mut os) = (vec![0.0; m], vec![0.0; m]);
        asm.assemble_cell(
            &mut ws,
            [&vals[0], &vals[1], &vals[2], &vals[3]],
            &ps,
            &pn,
            0.5 * (vc - uc),
            h,
            &mut op,
            &mut os,
        );
        (op, os)
    }

    #[test]
    fn q0_of_time_function() {
        // φ = t: Uφ = Vφ = 1, no angular part
        assert_eq!(q0_null(1.0, 1.0, 0.0, 3.0), -1.0);
    }

    #[test]
    fn time_function_source() {
        let s4 = (4.0 * PI).sqrt();
        let h = 1e-3;
        for asm in [
            SourceAssembler::new(ModeSet::full(0)),
            SourceAssembler::new(ModeSet::full(2)),
        ] {
            let phi = |u: f64, v: f64, k: usize| {
                if k == 0 { s4 * 0.25 * (v - u) * (u + v) } else { 0.0 }
            };
            let (uc, vc) = (2.0, 5.0);
            let (_, sp) = cell(&asm, phi, |_, _, _| 0.0, uc, vc, h);
            // r Q₀ = −r, times √(4π) for the monopole coefficient
            let r = 0.5 * (vc - uc);
            assert!((sp[0] + s4 * r).abs() < 1e-5, "{}", sp[0]);
            assert!(sp[1..].iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn outgoing_wave_source() {
        let s4 = (4.0 * PI).sqrt();
        let f = |v: f64| (0.3 * v).sin() + 2.0;
        let df = |v: f64| 0.3 * (0.3 * v).cos();
        let asm = SourceAssembler::new(ModeSet::full(0));
        let (uc, vc) = (1.0, 4.0);
        let r = 0.5 * (vc - uc);
        let h = 1e-3;
        let (_, sp) = cell(&asm, |_, v, _| s4 * f(v), |_, _, _| 0.0, uc, vc, h);
        let u_phi = f(vc) / (r * r);
        let v_phi = (2.0 * df(vc) - f(vc) / r) / r;
        let want = r * q0_null(u_phi, v_phi, 0.0, r);
        assert!((sp[0] / s4 - want).abs() < 1e-5);
    }

    #[test]
    fn dt_psi_source() {
        // Ψ_00 = √(4π)·t  →  r⁻¹(∂_tψ r)² = r⁻¹ per unit sphere mean
        let s4 = (4.0 * PI).sqrt();
        let asm = SourceAssembler::new(ModeSet::axisymmetric(2));
        let (uc, vc) = (3.0, 7.0);
        let r = 0.5 * (vc - uc);
        let (sp, _) = cell(
            &asm,
            |_, _, _| 0.0,
            |u, v, k| if k == 0 { s4 * 0.5 * (u + v) } else { 0.0 },
            uc,
            vc,
            0.01,
        );
        assert!((sp[0] - s4 / r).abs() < 1e-12);
    }

    #[test]
    fn angular_gradient_contribution() {
        // φ = Y₁₀ is static and r-independent, so rQ₀ = r⁻¹|∇̸Y₁₀|²
        let set = ModeSet::full(2);
        let k10 = set.position(ModeIndex::new(1, 0).unwrap()).unwrap();
        let asm = SourceAssembler::new(set.clone());
        let (uc, vc) = (2.0, 8.0);
        let r = 0.5 * (vc - uc);
        let h = 1e-3;
        let (_, sp) = cell(
            &asm,
            |u, v, k| if k == k10 { 0.5 * (v - u) } else { 0.0 },
            |_, _, _| 0.0,
            uc,
            vc,
            h,
        );
        let tr = SphericalTransform::minimal(set.clone());
        let vals: Vec<f64> = (0..tr.n_points())
            .map(|g| 3.0 / (4.0 * PI) * tr.grid().point(g).0.sin().powi(2))
            .collect();
        let want = tr.analyze(&vals).unwrap();
        for k in 0..set.len() {
            assert!((sp[k] - want[k] / r).abs() < 1e-6, "k={k}: {} vs {}", sp[k], want[k] / r);
        }
    }
}
