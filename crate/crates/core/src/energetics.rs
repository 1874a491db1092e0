//! Flat-slice norms, hyperboloidal energies and growth-law fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Field, Slice};
use crate::quadrature::{simpson, trapezoid};
use crate::sphharm::{ModeSet, SphericalTransform};
use crate::stats::{linear_fit, spearman};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub l2_phi: f64,
    /// `(‖∂_tφ‖² + ‖∇φ‖²)^{1/2}`.
    pub l2_dphi: f64,
    pub l2_psi: f64,
    pub l2_dpsi: f64,
    pub cascade_ratio: f64,
    pub e_hyp_phi: Option<f64>,
    pub e_hyp_psi: Option<f64>,
}

/// Radial integrals of one field over a slice.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldNorms {
    /// `∫|f|² dx`
    pub value_sq: f64,
    /// `∫|∂_t f|² dx`
    pub dt_sq: f64,
    /// `∫|∇f|² dx`
    pub grad_sq: f64,
}

impl FieldNorms {
    pub fn l2(&self) -> f64 {
        self.value_sq.sqrt()
    }

    pub fn l2_deriv(&self) -> f64 {
        (self.dt_sq + self.grad_sq).sqrt()
    }
}

fn integrate_profile(slice: &Slice, rows: Vec<(f64, [f64; 3])>) -> [f64; 3] {
    // rows sorted by increasing r; the integrands vanish on the axis
    let mut rows = rows;
    if rows.first().map_or(true, |(r, _)| *r > 0.0) {
        rows.insert(0, (0.0, [0.0; 3]));
    }
    let dr = 0.5 * slice.h;
    let uniform = rows
        .windows(2)
        .all(|w| ((w[1].0 - w[0].0) - dr).abs() <= 1e-9 * dr);
    let r: Vec<f64> = rows.iter().map(|x| x.0).collect();
    std::array::from_fn(|c| {
        let y: Vec<f64> = rows.iter().map(|x| x.1[c]).collect();
        if uniform {
            simpson(&y, dr)
        } else {
            trapezoid(&r, &y)
        }
    })
}

/// Mode-wise radial densities of `|f|²`, `|∂_t f|²`, `|∇f|²` at centre node `i`.
fn node_densities(slice: &Slice, field: Field, i: usize, eig: &[f64]) -> Option<[f64; 3]> {
    let (_, _, r) = slice.coords(i);
    if r == 0.0 {
        return Some([0.0; 3]);
    }
    let mut acc = [0.0; 3];
    for (k, &e) in eig.iter().enumerate() {
        let d = slice.derivs(field, i, k)?;
        let f = d.value;
        acc[0] += f * f;
        acc[1] += d.dt() * d.dt();
        acc[2] += (d.dr() - f / r).powi(2) + e * f * f / (r * r);
    }
    Some(acc)
}

/// Flat-slice integrals of one field, from mode data.
pub fn field_norms(slice: &Slice, field: Field) -> Result<FieldNorms> {
    let eig: Vec<f64> = slice.modes.modes().iter().map(|m| m.eigenvalue()).collect();
    let mut rows = Vec::new();
    for i in slice.nodes().into_iter().rev() {
        let (_, _, r) = slice.coords(i);
        if let Some(dens) = node_densities(slice, field, i, &eig) {
            rows.push((r, dens));
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("slice has no recorded nodes".into()));
    }
    let [a, b, c] = integrate_profile(slice, rows);
    Ok(FieldNorms { value_sq: a, dt_sq: b, grad_sq: c })
}

/// Flat-slice norms of `φ` and `ψ` at the slice time.
pub fn flat_norms(slice: &Slice) -> Result<EnergySample> {
    let p = field_norms(slice, Field::Phi)?;
    let q = field_norms(slice, Field::Psi)?;
    let l2_phi = p.l2();
    let l2_dphi = p.l2_deriv();
    Ok(EnergySample {
        t: slice.t,
        l2_phi,
        l2_dphi,
        l2_psi: q.l2(),
        l2_dpsi: q.l2_deriv(),
        cascade_ratio: l2_dphi / l2_phi,
        e_hyp_phi: None,
        e_hyp_psi: None,
    })
}

/// Same integrals evaluated pointwise on a collocation grid; used to cross
/// check [`field_norms`].
pub fn field_norms_collocation(slice: &Slice, field: Field) -> Result<FieldNorms> {
    let modes = &slice.modes;
    let m = modes.len();
    let wide = ModeSet::new(2 * modes.l_max().max(1), modes.is_axisymmetric());
    let tr = SphericalTransform::minimal(wide.clone());
    let pos: Vec<usize> = modes.modes().iter().map(|md| wide.position(*md).unwrap()).collect();
    let mut rows = Vec::new();
    let mut buf = vec![0.0; tr.n_modes()];
    for i in slice.nodes().into_iter().rev() {
        let (_, _, r) = slice.coords(i);
        if r == 0.0 {
            rows.push((0.0, [0.0; 3]));
            continue;
        }
        let derivs: Option<Vec<_>> = (0..m).map(|k| slice.derivs(field, i, k)).collect();
        let Some(derivs) = derivs else { continue };
        let synth = |sel: &dyn Fn(usize) -> f64, buf: &mut Vec<f64>| -> Vec<f64> {
            buf.iter_mut().for_each(|x| *x = 0.0);
            for k in 0..m {
                buf[pos[k]] = sel(k);
            }
            tr.synthesize(buf).expect("sized buffer")
        };
        let f = synth(&|k| derivs[k].value, &mut buf);
        let ft = synth(&|k| derivs[k].dt(), &mut buf);
        let frad = synth(&|k| derivs[k].dr() - derivs[k].value / r, &mut buf);
        for k in 0..m {
            buf[pos[k]] = derivs[k].value;
        }
        let ang = tr.angular_gradient_sq(&buf)?;
        let w = &tr.grid().weights;
        let integ = |vals: &dyn Fn(usize) -> f64| (0..w.len()).map(|g| w[g] * vals(g)).sum::<f64>();
        rows.push((
            r,
            [
                integ(&|g| f[g] * f[g]),
                integ(&|g| ft[g] * ft[g]),
                integ(&|g| frad[g] * frad[g] + ang[g] / (r * r)),
            ],
        ));
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("slice has no recorded nodes".into()));
    }
    let [a, b, c] = integrate_profile(slice, rows);
    Ok(FieldNorms { value_sq: a, dt_sq: b, grad_sq: c })
}

/// Energy density per unit `u` on the hyperboloid `uv = s²`, summed over
/// modes: `[(s/t)²(∂_tΦ)² + ((r/t)∂_tΦ + ∂_rΦ − Φ/r)² + ℓ(ℓ+1)Φ²/r²]·|dr/du|`.
pub fn hyperboloid_density(
    s: f64,
    u: f64,
    v: f64,
    eig: &[f64],
    value: &[f64],
    du: &[f64],
    dv: &[f64],
) -> f64 {
    let r = 0.5 * (v - u);
    let t = 0.5 * (u + v);
    let jac = 0.5 * (s * s / (u * u) + 1.0);
    let mut acc = 0.0;
    for k in 0..eig.len() {
        let dt = du[k] + dv[k];
        let dr = dv[k] - du[k];
        let f = value[k];
        acc += (s / t).powi(2) * dt * dt
            + ((r / t) * dt + dr - f / r).powi(2)
            + eig[k] * f * f / (r * r);
    }
    acc * jac
}

/// One sample point on a hyperboloid: position and per-mode data.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint {
    pub u: f64,
    pub value: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Midpoint-rule energy on `uv = s²` from points spaced `du` in `u`.
pub fn hyperboloidal_energy(
    s: f64,
    du: f64,
    eig: &[f64],
    points: &[HyperboloidPoint],
) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InsufficientData(format!("no samples on hyperboloid s = {s}")));
    }
    Ok(points
        .iter()
        .map(|p| hyperboloid_density(s, p.u, s * s / p.u, eig, &p.value, &p.du, &p.dv) * du)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `y = A t^p`, params `[A, p]`
    Power,
    /// `y = a ln t + b`, params `[a, b]`
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: GrowthModel,
    pub params: [f64; 2],
    pub window: [f64; 2],
    pub residual_rms: f64,
    pub n_samples: usize,
}

/// Least-squares fit of `(t, y)` pairs inside `window`.
pub fn fit_growth(points: &[(f64, f64)], model: GrowthModel, window: [f64; 2]) -> Result<FitResult> {
    let sel: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window[0] && *t <= window[1])
        .collect();
    if sel.len() < 8 {
        return Err(Error::DegenerateWindow(format!(
            "{} samples in [{}, {}], need at least 8",
            sel.len(),
            window[0],
            window[1]
        )));
    }
    let tmin = sel.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let tmax = sel.iter().map(|p| p.0).fold(0.0, f64::max);
    if !(tmin > 0.0) || tmax / tmin < 5.0 {
        return Err(Error::DegenerateWindow(format!("window spans [{tmin}, {tmax}], need a factor 5")));
    }
    let x: Vec<f64> = sel.iter().map(|p| p.0.ln()).collect();
    let (y, params): (Vec<f64>, fn(f64, f64) -> [f64; 2]) = match model {
        GrowthModel::Power => {
            if sel.iter().any(|p| p.1 <= 0.0) {
                return Err(Error::DegenerateWindow("power fit needs positive values".into()));
            }
            (sel.iter().map(|p| p.1.ln()).collect(), |a, b| [b.exp(), a])
        }
        GrowthModel::Log => (sel.iter().map(|p| p.1).collect(), |a, b| [a, b]),
    };
    let (slope, intercept, rms) =
        linear_fit(&x, &y).ok_or_else(|| Error::DegenerateWindow("singular fit".into()))?;
    Ok(FitResult { model, params: params(slope, intercept), window, residual_rms: rms, n_samples: sel.len() })
}

/// `‖∂φ‖ / ‖φ‖` per sample.
pub fn cascade_ratio(samples: &[EnergySample]) -> Vec<f64> {
    samples.iter().map(|s| s.l2_dphi / s.l2_phi).collect()
}

/// Summary of the late-time growth laws over a run's flat-slice samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLaws {
    /// Power-law fit of `‖φ‖` on the power window.
    pub phi_power: Option<FitResult>,
    /// Logarithmic fit of `‖∂φ‖` on the log window.
    pub dphi_log: Option<FitResult>,
    /// `max/min − 1` of `‖∂φ‖ / ln t` on the log window.
    pub dphi_over_lnt_variation: Option<f64>,
    /// `‖∂φ‖ / ln t` at the last sample of the log window.
    pub dphi_over_lnt_final: Option<f64>,
    /// `max_t(‖ψ‖ + ‖∂ψ‖)` over its value at the sample nearest `t = 10`.
    pub psi_bound_ratio: Option<f64>,
    /// Spearman rank correlation of the cascade ratio with `t` over the
    /// final decade of samples.
    pub cascade_spearman: Option<f64>,
}

impl EnergyLaws {
    pub fn evaluate(samples: &[EnergySample], power_window: [f64; 2], log_window: [f64; 2]) -> Self {
        let pts = |f: fn(&EnergySample) -> f64| -> Vec<(f64, f64)> {
            samples.iter().map(|s| (s.t, f(s))).collect()
        };
        let in_log: Vec<&EnergySample> = samples
            .iter()
            .filter(|s| s.t >= log_window[0] && s.t <= log_window[1] && s.t > 1.0)
            .collect();
        let ratios: Vec<f64> = in_log.iter().map(|s| s.l2_dphi / s.t.ln()).collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        let psi = |s: &EnergySample| s.l2_psi + s.l2_dpsi;
        let psi_ref = samples
            .iter()
            .min_by(|a, b| (a.t - 10.0).abs().total_cmp(&(b.t - 10.0).abs()))
            .map(psi);
        let psi_max = samples.iter().map(psi).fold(0.0, f64::max);
        let t_end = samples.iter().map(|s| s.t).fold(0.0, f64::max);
        let decade: Vec<&EnergySample> = samples.iter().filter(|s| s.t >= t_end / 10.0).collect();
        let cascade_spearman = spearman(
            &decade.iter().map(|s| s.t).collect::<Vec<_>>(),
            &decade.iter().map(|s| s.cascade_ratio).collect::<Vec<_>>(),
        );
        Self {
            phi_power: fit_growth(&pts(|s| s.l2_phi), GrowthModel::Power, power_window).ok(),
            dphi_log: fit_growth(&pts(|s| s.l2_dphi), GrowthModel::Log, log_window).ok(),
            dphi_over_lnt_variation: (ratios.len() >= 2 && lo > 0.0).then(|| hi / lo - 1.0),
            dphi_over_lnt_final: ratios.last().copied(),
            psi_bound_ratio: psi_ref.filter(|r| *r > 0.0).map(|r| psi_max / r),
            cascade_spearman,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::Diagonal;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Slice at time `t` with `Φ_k = f_k(r)` independent of `t`.
    fn static_slice(modes: ModeSet, t: f64, h: f64, f: impl Fn(usize, f64) -> f64) -> Slice {
        let m = modes.len();
        let d = (2.0 * t / h).round() as usize;
        let mk = |dd: usize| {
            let mut diag = Diagonal::empty(dd, m);
            for i in 0..=diag.i_max() {
                let r = 0.5 * (dd - 2 * i) as f64 * h;
                let vals: Vec<f64> = (0..m).map(|k| f(k, r)).collect();
                diag.set(i, &vals, &vals);
            }
            diag
        };
        Slice { t, h, modes: modes.clone(), lower: mk(d - 1), center: mk(d), upper: mk(d + 1) }
    }

    #[test]
    fn unit_ball_norm() {
        // φ = 1 on the unit ball: Φ₀₀ = √(4π) r
        let h = 1e-3;
        let s = static_slice(ModeSet::full(0), 1.0, h, |_, r| (4.0 * PI).sqrt() * r);
        let n = field_norms(&s, Field::Phi).unwrap();
        assert_relative_eq!(n.value_sq, 4.0 * PI / 3.0, max_relative = 1e-6);
        assert!(n.dt_sq.abs() < 1e-20);
        assert!(n.grad_sq.abs() < 1e-12);
    }

    #[test]
    fn dipole_angular_term() {
        // φ₁₀(r) = r → Φ₁₀ = r², angular energy 2 ∫₀¹ r² dr = 2/3
        let h = 1e-3;
        let set = ModeSet::axisymmetric(1);
        let s = static_slice(set, 1.0, h, |k, r| if k == 1 { r * r } else { 0.0 });
        let n = field_norms(&s, Field::Phi).unwrap();
        // radial part: (∂_rΦ − Φ/r)² = r², also 1/3
        assert_relative_eq!(n.grad_sq, 2.0 / 3.0 + 1.0 / 3.0, max_relative = 1e-5);
    }

    #[test]
    fn zero_field_norms() {
        let s = static_slice(ModeSet::full(1), 2.0, 0.1, |_, _| 0.0);
        let e = flat_norms(&s).unwrap();
        assert_eq!((e.l2_phi, e.l2_dphi, e.l2_psi, e.l2_dpsi), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn collocation_cross_check() {
        let set = ModeSet::full(2);
        let s = static_slice(set.clone(), 3.0, 0.01, |k, r| {
            let ell = set.modes()[k].ell as i32;
            (0.3 + 0.1 * k as f64) * r.powi(ell + 1) * (-r * r).exp()
        });
        for field in [Field::Phi, Field::Psi] {
            let a = field_norms(&s, field).unwrap();
            let b = field_norms_collocation(&s, field).unwrap();
            assert!((a.value_sq - b.value_sq).abs() <= 1e-8);
            assert!((a.dt_sq - b.dt_sq).abs() <= 1e-8);
            assert!((a.grad_sq - b.grad_sq).abs() <= 1e-8);
        }
    }

    #[test]
    fn hyperboloid_static_constant_is_zero() {
        let eig = [0.0];
        let s = 2.0;
        let pts: Vec<HyperboloidPoint> = (1..20)
            .map(|k| {
                let u = 0.1 * k as f64;
                let r = 0.5 * (s * s / u - u);
                HyperboloidPoint { u, value: vec![r], du: vec![-0.5], dv: vec![0.5] }
            })
            .collect();
        assert!(hyperboloidal_energy(s, 0.1, &eig, &pts).unwrap().abs() < 1e-24);
        assert!(hyperboloidal_energy(s, 0.1, &eig, &[]).is_err());
    }

    #[test]
    fn fits_recover_exact_laws() {
        let pts: Vec<(f64, f64)> = (1..=20).map(|k| {
            let t = 10.0 * k as f64;
            (t, 0.7 * t.sqrt())
        }).collect();
        let f = fit_growth(&pts, GrowthModel::Power, [10.0, 200.0]).unwrap();
        assert_relative_eq!(f.params[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(f.params[0], 0.7, epsilon = 1e-12);
        assert!(f.residual_rms < 1e-12);
        let pts: Vec<(f64, f64)> = pts.iter().map(|(t, _)| (*t, 3.0 * t.ln() + 1.0)).collect();
        let f = fit_growth(&pts, GrowthModel::Log, [10.0, 200.0]).unwrap();
        assert_relative_eq!(f.params[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(f.params[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_windows() {
        let pts: Vec<(f64, f64)> = (1..=20).map(|k| (100.0 + k as f64, 1.0)).collect();
        assert!(matches!(
            fit_growth(&pts, GrowthModel::Log, [0.0, 1e9]),
            Err(Error::DegenerateWindow(_))
        ));
        assert!(fit_growth(&pts[..5], GrowthModel::Log, [0.0, 1e9]).is_err());
    }

    #[test]
    fn cascade_ratio_trends() {
        let mk = |t: f64, a: f64, b: f64| EnergySample {
            t, l2_phi: a, l2_dphi: b, l2_psi: 0.0, l2_dpsi: 0.0,
            cascade_ratio: b / a, e_hyp_phi: None, e_hyp_psi: None,
        };
        let s: Vec<EnergySample> = (1..10).map(|k| {
            let t = 10.0 * k as f64;
            mk(t, t.sqrt(), t.ln())
        }).collect();
        let r = cascade_ratio(&s);
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        let c: Vec<EnergySample> = (1..5).map(|k| mk(k as f64, 2.0, 3.0)).collect();
        assert!(cascade_ratio(&c).iter().all(|x| *x == 1.5));
    }

    #[test]
    fn energy_laws_of_model_growth() {
        let samples: Vec<EnergySample> = (1..=40)
            .map(|k| {
                let t = 25.0 * k as f64;
                let l2_phi = 0.3 * t.sqrt();
                let l2_dphi = 0.02 * t.ln();
                EnergySample {
                    t,
                    l2_phi,
                    l2_dphi,
                    l2_psi: 0.1,
                    l2_dpsi: 0.4,
                    cascade_ratio: l2_dphi / l2_phi,
                    e_hyp_phi: None,
                    e_hyp_psi: None,
                }
            })
            .collect();
        let laws = EnergyLaws::evaluate(&samples, [50.0, 1000.0], [300.0, 1000.0]);
        assert_relative_eq!(laws.phi_power.unwrap().params[1], 0.5, epsilon = 1e-12);
        assert!(laws.dphi_over_lnt_variation.unwrap() < 1e-12);
        assert_relative_eq!(laws.dphi_over_lnt_final.unwrap(), 0.02, epsilon = 1e-14);
        assert_eq!(laws.psi_bound_ratio, Some(1.0));
        assert_eq!(laws.cascade_spearman, Some(-1.0));
    }
}
