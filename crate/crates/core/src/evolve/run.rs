//! Row-by-row evolution with predictor-corrector source coupling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{init_cone_data, InitialDataSpec};
use super::grid::{Level, NullGridSpec};
use super::scheme::{diamond_step, potential_table, DIVERGENCE_THRESHOLD};
use super::slices::{Diagonal, Slice};
use super::source::SourceAssembler;
use crate::asympt::RadiationRecord;
use crate::energetics::{flat_norms, hyperboloid_density, EnergySample};
use crate::error::{Error, Result};

/// What to record besides the radiation field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportPlan {
    /// Flat-slice report times; snapped to the nearest anti-diagonal.
    pub times: Vec<f64>,
    /// Also integrate the hyperboloidal energy at `s = t` for every report time.
    #[serde(default)]
    pub hyperboloidal: bool,
    /// Extra hyperboloids `t² − r² = s²` to integrate.
    #[serde(default)]
    pub hyperboloid_s: Vec<f64>,
    /// Keep the slice data in the output (otherwise only norms are kept).
    #[serde(default)]
    pub keep_slices: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Nonlinear sources on; `false` evolves the free wave equation.
    pub sources: bool,
    pub corrector_passes: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { sources: true, corrector_passes: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Diverged { u: f64, v: f64, ell: usize, m: i64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperboloidSample {
    pub s: f64,
    pub energy_phi: f64,
    pub energy_psi: f64,
    /// Smallest `u` reached before the truncation `v ≤ v_max`.
    pub u_min: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub grid: NullGridSpec,
    pub radiation: RadiationRecord,
    pub slices: Vec<Slice>,
    pub energies: Vec<EnergySample>,
    pub hyperboloids: Vec<HyperboloidSample>,
    /// Largest `|Φ_k|` over the run, per mode.
    pub mode_max_phi: Vec<f64>,
    /// Largest `|Ψ_k|` over the run, per mode.
    pub mode_max_psi: Vec<f64>,
    pub status: RunStatus,
}

impl ReportPlan {
    pub fn validate(&self, grid: &NullGridSpec) -> Result<()> {
        for &t in &self.times {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidPlan(format!("report time {t} must be positive")));
            }
            if 2.0 * t > grid.v_max * (1.0 + 1e-12) {
                return Err(Error::InvalidPlan(format!(
                    "report time {t} exceeds v_max/2 = {}",
                    grid.v_max / 2.0
                )));
            }
            if grid.diagonal_of(t) < 2 {
                return Err(Error::InvalidPlan(format!("report time {t} below grid resolution")));
            }
        }
        for &s in &self.hyperboloid_s {
            if !(s > 0.0 && s <= grid.u_max) {
                return Err(Error::InvalidPlan(format!("hyperboloid s = {s} outside (0, u_max]")));
            }
        }
        Ok(())
    }
}

struct Capture {
    diag: Diagonal,
}

struct ReportSlot {
    t: f64,
    slots: [usize; 3],
    done: bool,
}

struct HypAcc {
    s: f64,
    phi: f64,
    psi: f64,
    u_min: f64,
}

/// Rolling source storage for the transitions `i−2 → i−1`, `i−1 → i` and
/// the current one.
struct SourceHistory {
    older: Level,
    old: Level,
    cur: Level,
}

/// Evolves from cone data on `u = 0` up to `u_max`.
///
/// Output is independent of the rayon thread count.
pub fn run(
    grid: &NullGridSpec,
    data: &InitialDataSpec,
    plan: &ReportPlan,
    opts: &RunOptions,
) -> Result<RunOutput> {
    grid.validate()?;
    plan.validate(grid)?;
    let modes = grid.modes();
    let m = modes.len();
    let n_v = grid.n_v();
    let n_u = grid.n_u();
    let h = grid.h;
    let ells: Vec<usize> = modes.modes().iter().map(|md| md.ell).collect();
    let eig: Vec<f64> = modes.modes().iter().map(|md| md.eigenvalue()).collect();
    let kappa = potential_table(&ells, n_v);
    let assembler = SourceAssembler::new(modes.clone());

    let mut prev = init_cone_data(data, grid)?;
    let mut next = Level::zeros(n_v + 1, m);
    let mut hist = SourceHistory {
        older: Level::zeros(n_v + 1, m),
        old: Level::zeros(n_v + 1, m),
        cur: Level::zeros(n_v + 1, m),
    };

    // report bookkeeping
    let mut captures: Vec<Capture> = Vec::new();
    let mut reports: Vec<ReportSlot> = Vec::new();
    for &t in &plan.times {
        let d = grid.diagonal_of(t);
        let mut slots = [0; 3];
        for (o, dd) in [d - 1, d, d + 1].into_iter().enumerate() {
            slots[o] = match captures.iter().position(|c| c.diag.d == dd) {
                Some(p) => p,
                None => {
                    captures.push(Capture { diag: Diagonal::empty(dd, m) });
                    captures.len() - 1
                }
            };
        }
        reports.push(ReportSlot { t: d as f64 * h / 2.0, slots, done: false });
    }
    let mut hyps: Vec<HypAcc> = plan
        .hyperboloid_s
        .iter()
        .copied()
        .chain(if plan.hyperboloidal { reports.iter().map(|r| r.t).collect() } else { vec![] })
        .map(|s| HypAcc { s, phi: 0.0, psi: 0.0, u_min: f64::INFINITY })
        .collect();

    let mut rad_psi = Vec::with_capacity((n_u + 1) * m);
    let mut rad_phi = Vec::with_capacity((n_u + 1) * m);
    let mut rad_slope = Vec::with_capacity((n_u + 1) * m);
    let mut mode_max_phi = vec![0.0f64; m];
    let mut mode_max_psi = vec![0.0f64; m];
    let mut slices_out: Vec<Slice> = Vec::new();
    let mut energies: Vec<(f64, EnergySample)> = Vec::new();
    let mut status = RunStatus::Complete;

    let record_row = |lvl: &Level,
                          i: usize,
                          captures: &mut Vec<Capture>,
                          rad_psi: &mut Vec<f64>,
                          rad_phi: &mut Vec<f64>,
                          rad_slope: &mut Vec<f64>,
                          mode_max_phi: &mut [f64],
                          mode_max_psi: &mut [f64]| {
        rad_psi.extend_from_slice(lvl.psi_at(n_v));
        rad_phi.extend_from_slice(lvl.phi_at(n_v));
        for k in 0..m {
            let slope = if n_v >= i + 2 {
                let f = |j: usize| lvl.phi[j * m + k];
                grid.v_max * (3.0 * f(n_v) - 4.0 * f(n_v - 1) + f(n_v - 2)) / (2.0 * h)
            } else {
                f64::NAN
            };
            rad_slope.push(slope);
        }
        for c in captures.iter_mut() {
            if c.diag.d >= 2 * i && c.diag.d - i <= n_v {
                let j = c.diag.d - i;
                c.diag.set(i, lvl.phi_at(j), lvl.psi_at(j));
            }
        }
        for j in i..=n_v {
            for k in 0..m {
                mode_max_phi[k] = mode_max_phi[k].max(lvl.phi[j * m + k].abs());
                mode_max_psi[k] = mode_max_psi[k].max(lvl.psi[j * m + k].abs());
            }
        }
    };

    record_row(
        &prev,
        0,
        &mut captures,
        &mut rad_psi,
        &mut rad_phi,
        &mut rad_slope,
        &mut mode_max_phi,
        &mut mode_max_psi,
    );

    for i in 0..n_u {
        let lo = (i + 2) * m;
        let hi = (n_v + 1) * m;
        if opts.sources {
            // predictor: extrapolate last corrected sources in u
            let SourceHistory { older, old, cur } = &mut hist;
            for (c, (o, oo)) in cur.phi[lo..hi]
                .iter_mut()
                .zip(old.phi[lo..hi].iter().zip(&older.phi[lo..hi]))
                .chain(
                    cur.psi[lo..hi]
                        .iter_mut()
                        .zip(old.psi[lo..hi].iter().zip(&older.psi[lo..hi])),
                )
            {
                *c = match i {
                    0 => 0.0,
                    1 => *o,
                    _ => 2.0 * o - oo,
                };
            }
        }
        let sweep = |prev: &Level, next: &mut Level, src: Option<&Level>| {
            diamond_step(&prev.phi, &mut next.phi, src.map(|s| &s.phi[..]), &kappa, i, n_v, m, h);
            diamond_step(&prev.psi, &mut next.psi, src.map(|s| &s.psi[..]), &kappa, i, n_v, m, h);
        };
        sweep(&prev, &mut next, opts.sources.then_some(&hist.cur));
        if opts.sources && n_v >= i + 2 {
            for _ in 0..opts.corrector_passes {
                let (cur_phi, cur_psi) = (&mut hist.cur.phi[lo..hi], &mut hist.cur.psi[lo..hi]);
                let (p, nx) = (&prev, &next);
                cur_phi
                    .par_chunks_mut(m)
                    .zip(cur_psi.par_chunks_mut(m))
                    .enumerate()
                    .with_min_len(64)
                    .for_each_init(
                        || assembler.workspace(),
                        |ws, (idx, (sp, ss))| {
                            let j = i + 2 + idx;
                            let r = (j - i - 1) as f64 * h / 2.0;
                            assembler.assemble_cell(
                                ws,
                                [p.phi_at(j - 1), p.phi_at(j), nx.phi_at(j - 1), nx.phi_at(j)],
                                p.psi_at(j - 1),
                                nx.psi_at(j),
                                r,
                                h,
                                sp,
                                ss,
                            );
                        },
                    );
                sweep(&prev, &mut next, Some(&hist.cur));
            }
        }

        // divergence check on the new row
        let row = i + 1;
        let mut bad = None;
        'scan: for j in row..=n_v {
            for k in 0..m {
                for val in [next.phi[j * m + k], next.psi[j * m + k]] {
                    if !val.is_finite() || val.abs() > DIVERGENCE_THRESHOLD {
                        bad = Some((j, k, val));
                        break 'scan;
                    }
                }
            }
        }
        if let Some((j, k, val)) = bad {
            let md = modes.modes()[k];
            status = RunStatus::Diverged {
                u: grid.u(row),
                v: grid.v(j),
                ell: md.ell,
                m: md.m,
                value: val.abs(),
            };
            break;
        }

        accumulate_hyperboloids(&mut hyps, &prev, &next, i, grid, &eig);
        record_row(
            &next,
            row,
            &mut captures,
            &mut rad_psi,
            &mut rad_phi,
            &mut rad_slope,
            &mut mode_max_phi,
            &mut mode_max_psi,
        );

        for rep in reports.iter_mut().filter(|r| !r.done) {
            let top = captures[rep.slots[2]].diag.d / 2;
            if row >= top.min(n_u) {
                rep.done = true;
                let [lo_s, c_s, up_s] = rep.slots;
                let slice = Slice {
                    t: rep.t,
                    h,
                    modes: modes.clone(),
                    lower: captures[lo_s].diag.clone(),
                    center: captures[c_s].diag.clone(),
                    upper: captures[up_s].diag.clone(),
                };
                // norms need the slice down to the axis
                if slice.center.is_recorded(slice.center.i_max()) {
                    energies.push((rep.t, flat_norms(&slice)?));
                }
                if plan.keep_slices {
                    slices_out.push(slice);
                }
            }
        }

        std::mem::swap(&mut prev, &mut next);
        if opts.sources {
            let SourceHistory { older, old, cur } = &mut hist;
            std::mem::swap(older, old);
            std::mem::swap(old, cur);
        }
    }

    let hyperboloids: Vec<HyperboloidSample> = hyps
        .iter()
        .map(|a| HyperboloidSample { s: a.s, energy_phi: a.phi, energy_psi: a.psi, u_min: a.u_min })
        .collect();
    energies.sort_by(|a, b| a.0.total_cmp(&b.0));
    let energies: Vec<EnergySample> = energies
        .into_iter()
        .map(|(t, mut e)| {
            if plan.hyperboloidal {
                if let Some(hs) = hyperboloids
                    .iter()
                    .skip(plan.hyperboloid_s.len())
                    .find(|hs| hs.s == t)
                {
                    e.e_hyp_phi = Some(hs.energy_phi);
                    e.e_hyp_psi = Some(hs.energy_psi);
                }
            }
            e
        })
        .collect();

    let n_rows = rad_psi.len() / m;
    let u: Vec<f64> = (0..n_rows).map(|i| grid.u(i)).collect();
    let mut radiation = RadiationRecord::from_columns(modes, h, grid.v_max, u, rad_psi, rad_phi)?;
    radiation.log_slope = Some(rad_slope);

    Ok(RunOutput {
        grid: grid.clone(),
        radiation,
        slices: slices_out,
        energies,
        hyperboloids,
        mode_max_phi,
        mode_max_psi,
        status,
    })
}

/// Adds the half-level `u = (i + ½)h` contribution of every hyperboloid.
fn accumulate_hyperboloids(
    hyps: &mut [HypAcc],
    prev: &Level,
    next: &Level,
    i: usize,
    grid: &NullGridSpec,
    eig: &[f64],
) {
    let h = grid.h;
    let n_v = grid.n_v();
    let m = prev.n_modes;
    let u = (i as f64 + 0.5) * h;
    let mut val = vec![0.0; m];
    let mut du = vec![0.0; m];
    let mut dv = vec![0.0; m];
    for acc in hyps.iter_mut() {
        let v = acc.s * acc.s / u;
        if v < u + h || v > grid.v_max {
            continue;
        }
        let x = v / h;
        let j0 = (x.floor() as usize).min(n_v - 1);
        let th = x - j0 as f64;
        if j0 < i + 1 {
            continue;
        }
        for (fi, (p, q)) in [(&prev.phi, &next.phi), (&prev.psi, &next.psi)].into_iter().enumerate() {
            let dvc = |row: &[f64], start: usize, j: usize, k: usize| -> f64 {
                if j > start && j < n_v {
                    (row[(j + 1) * m + k] - row[(j - 1) * m + k]) / (2.0 * h)
                } else if j < n_v {
                    (row[(j + 1) * m + k] - row[j * m + k]) / h
                } else {
                    (row[j * m + k] - row[(j - 1) * m + k]) / h
                }
            };
            for k in 0..m {
                let a = |row: &[f64], j: usize| row[j * m + k];
                val[k] = 0.5
                    * ((1.0 - th) * (a(p, j0) + a(q, j0)) + th * (a(p, j0 + 1) + a(q, j0 + 1)));
                du[k] = ((1.0 - th) * (a(q, j0) - a(p, j0)) + th * (a(q, j0 + 1) - a(p, j0 + 1)))
                    / h;
                let dvp = (1.0 - th) * dvc(p, i, j0, k) + th * dvc(p, i, j0 + 1, k);
                let dvq = (1.0 - th) * dvc(q, i + 1, j0, k) + th * dvc(q, i + 1, j0 + 1, k);
                dv[k] = 0.5 * (dvp + dvq);
            }
            let dens = hyperboloid_density(acc.s, u, v, eig, &val, &du, &dv);
            if fi == 0 {
                acc.phi += dens * h;
            } else {
                acc.psi += dens * h;
            }
        }
        acc.u_min = acc.u_min.min(u);
    }
}
