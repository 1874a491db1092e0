//! File schemas of a run directory.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use nullwave::asympt::{RadiationRecord, ResidualRow};
use nullwave::energetics::EnergySample;
use nullwave::evolve::{Diagonal, Slice};
use nullwave::sphharm::ModeSet;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const RADIATION_CSV: &str = "radiation.csv";
pub const LOG_SLOPE_CSV: &str = "log_slope.csv";
pub const SLICES_CSV: &str = "slices.csv";
pub const ENERGIES_CSV: &str = "energies.csv";
pub const RESIDUALS_CSV: &str = "residuals.csv";
pub const CONSTANTS_JSON: &str = "constants.json";
pub const ENERGY_FITS_JSON: &str = "energy_fits.json";
pub const META_JSON: &str = "meta.json";
pub const CONVERGENCE_JSON: &str = "convergence.json";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";

pub const RADIATION_HEADER: [&str; 7] = ["u", "ell", "m", "Psi", "UPsi", "Phi", "Phi_over_lnv"];
pub const SLICES_HEADER: [&str; 7] = ["t", "u", "v", "ell", "m", "Phi", "Psi"];
pub const ENERGIES_HEADER: [&str; 7] =
    ["t", "L2_phi", "L2_dphi", "L2_psi", "L2_dpsi", "cascade_ratio", "E_hyp_phi"];
pub const RESIDUALS_HEADER: [&str; 7] =
    ["u", "v", "region", "field", "leading", "measured", "relative_residual"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct RadiationRow {
    pub u: f64,
    pub ell: usize,
    pub m: i64,
    pub Psi: f64,
    pub UPsi: f64,
    pub Phi: f64,
    pub Phi_over_lnv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogSlopeRow {
    pub u: f64,
    pub ell: usize,
    pub m: i64,
    pub v_dphi_dv: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SliceRow {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub ell: usize,
    pub m: i64,
    pub Phi: f64,
    pub Psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct EnergyRow {
    pub t: f64,
    pub L2_phi: f64,
    pub L2_dphi: f64,
    pub L2_psi: f64,
    pub L2_dpsi: f64,
    pub cascade_ratio: f64,
    pub E_hyp_phi: Option<f64>,
}

impl From<&EnergySample> for EnergyRow {
    fn from(e: &EnergySample) -> Self {
        Self {
            t: e.t,
            L2_phi: e.l2_phi,
            L2_dphi: e.l2_dphi,
            L2_psi: e.l2_psi,
            L2_dpsi: e.l2_dpsi,
            cascade_ratio: e.cascade_ratio,
            E_hyp_phi: e.e_hyp_phi,
        }
    }
}

fn write_err(file: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Write { file: file.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

fn format_err(file: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Format { file: file.to_path_buf(), message: e.to_string() }
}

/// Writes `rows` with a fixed header; an empty table still gets its header.
pub fn write_csv<T: Serialize>(file: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(file)
        .map_err(|e| write_err(file, e))?;
    w.write_record(header).map_err(|e| write_err(file, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| write_err(file, e))?;
    }
    w.flush().map_err(|source| CliError::Write { file: file.to_path_buf(), source })
}

/// Reads a CSV and checks its header against `header` column by column.
pub fn read_csv<T: DeserializeOwned>(file: &Path, header: &[&str]) -> Result<Vec<T>> {
    let f = File::open(file).map_err(|source| CliError::Read { file: file.to_path_buf(), source })?;
    let mut r = csv::Reader::from_reader(f);
    let found = r.headers().map_err(|e| format_err(file, e))?.clone();
    for (k, want) in header.iter().enumerate() {
        match found.get(k) {
            Some(got) if got == *want => {}
            Some(got) => return Err(format_err(file, format!("column {k} is '{got}', expected '{want}'"))),
            None => return Err(format_err(file, format!("missing column '{want}'"))),
        }
    }
    if found.len() != header.len() {
        return Err(format_err(file, format!("{} columns, expected {}", found.len(), header.len())));
    }
    r.deserialize().map(|row| row.map_err(|e| format_err(file, e))).collect()
}

pub fn write_json<T: Serialize>(file: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| write_err(file, e))?;
    text.push('\n');
    std::fs::write(file, text).map_err(|source| CliError::Write { file: file.to_path_buf(), source })
}

pub fn read_json<T: DeserializeOwned>(file: &Path) -> Result<T> {
    let text = std::fs::read_to_string(file).map_err(|source| CliError::Read { file: file.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| format_err(file, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write { file: dir.to_path_buf(), source })
}

pub fn radiation_rows(rec: &RadiationRecord) -> Vec<RadiationRow> {
    let modes = rec.modes.modes();
    let lnv = rec.v_max.ln();
    let m = modes.len();
    let mut rows = Vec::with_capacity(rec.n_u() * m);
    for (i, &u) in rec.u.iter().enumerate() {
        for (k, md) in modes.iter().enumerate() {
            let phi = rec.phi[i * m + k];
            rows.push(RadiationRow {
                u,
                ell: md.ell,
                m: md.m,
                Psi: rec.psi[i * m + k],
                UPsi: rec.upsi[i * m + k],
                Phi: phi,
                Phi_over_lnv: phi / lnv,
            });
        }
    }
    rows
}

pub fn log_slope_rows(rec: &RadiationRecord) -> Vec<LogSlopeRow> {
    let Some(ls) = &rec.log_slope else { return Vec::new() };
    let modes = rec.modes.modes();
    let m = modes.len();
    let mut rows = Vec::with_capacity(ls.len());
    for (i, &u) in rec.u.iter().enumerate() {
        for (k, md) in modes.iter().enumerate() {
            rows.push(LogSlopeRow { u, ell: md.ell, m: md.m, v_dphi_dv: ls[i * m + k] });
        }
    }
    rows
}

/// Rebuilds a radiation record; rows must be u-major in the mode order of `modes`.
pub fn record_from_rows(
    file: &Path,
    modes: ModeSet,
    h: f64,
    v_max: f64,
    rows: &[RadiationRow],
    slope: Option<&[LogSlopeRow]>,
) -> Result<RadiationRecord> {
    let m = modes.len();
    if rows.is_empty() || rows.len() % m != 0 {
        return Err(format_err(file, format!("{} rows is not a positive multiple of {m} modes", rows.len())));
    }
    let list = modes.modes();
    for (n, r) in rows.iter().enumerate() {
        let md = list[n % m];
        if r.ell != md.ell || r.m != md.m {
            return Err(format_err(file, format!("row {n}: mode ({}, {}) where ({}, {}) expected", r.ell, r.m, md.ell, md.m)));
        }
    }
    let u: Vec<f64> = rows.iter().step_by(m).map(|r| r.u).collect();
    let psi = rows.iter().map(|r| r.Psi).collect();
    let upsi = rows.iter().map(|r| r.UPsi).collect();
    let phi = rows.iter().map(|r| r.Phi).collect();
    let mut rec = RadiationRecord::from_parts(modes, h, v_max, u, psi, upsi, phi)?;
    if let Some(s) = slope {
        if s.len() == rows.len() {
            rec.log_slope = Some(s.iter().map(|r| r.v_dphi_dv).collect());
        }
    }
    Ok(rec)
}

/// Every recorded node of the three diagonals of each slice, tagged with the
/// slice time. Centre-diagonal nodes are thinned by `stride` (the axis node
/// is always kept); neighbours are kept around every retained centre node.
pub fn slice_rows(slices: &[Slice], stride: usize) -> Vec<SliceRow> {
    let mut rows = Vec::new();
    for s in slices {
        let h = s.h;
        let modes = s.modes.modes();
        let keep = |i: usize| {
            let axis = s.center.i_max();
            stride <= 1 || i % stride == 0 || i == axis
        };
        let mut emit = |diag: &Diagonal, i: usize| {
            if !diag.is_recorded(i) {
                return;
            }
            let u = i as f64 * h;
            let v = (diag.d - i) as f64 * h;
            for (k, md) in modes.iter().enumerate() {
                rows.push(SliceRow {
                    t: s.t,
                    u,
                    v,
                    ell: md.ell,
                    m: md.m,
                    Phi: diag.phi[i * diag.n_modes + k],
                    Psi: diag.psi[i * diag.n_modes + k],
                });
            }
        };
        for diag in [&s.lower, &s.center, &s.upper] {
            for i in 0..=diag.i_max() {
                let centre_i = if diag.d == s.center.d { Some(i) } else { None };
                let keep_node = match centre_i {
                    Some(i) => keep(i),
                    // u-neighbours (i−1, i on lower; i, i+1 on upper) of kept centre nodes
                    None if diag.d < s.center.d => keep(i) || keep(i + 1),
                    None => keep(i) || (i > 0 && keep(i - 1)),
                };
                if keep_node {
                    emit(diag, i);
                }
            }
        }
    }
    rows
}

/// Groups slices.csv rows back into slices.
pub fn slices_from_rows(file: &Path, modes: &ModeSet, h: f64, rows: &[SliceRow]) -> Result<Vec<Slice>> {
    let m = modes.len();
    let mut by_t: BTreeMap<u64, Vec<&SliceRow>> = BTreeMap::new();
    for r in rows {
        by_t.entry(r.t.to_bits()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (bits, rs) in by_t {
        let t = f64::from_bits(bits);
        let d = (2.0 * t / h).round() as usize;
        if d < 2 {
            return Err(format_err(file, format!("slice time {t} below grid resolution")));
        }
        let mut diags = [Diagonal::empty(d - 1, m), Diagonal::empty(d, m), Diagonal::empty(d + 1, m)];
        let mut nodes: BTreeMap<(usize, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for r in rs {
            let dd = ((r.u + r.v) / h).round() as usize;
            let i = (r.u / h).round() as usize;
            let k = modes
                .modes()
                .iter()
                .position(|md| md.ell == r.ell && md.m == r.m)
                .ok_or_else(|| format_err(file, format!("mode ({}, {}) not in the run's mode set", r.ell, r.m)))?;
            if dd + 1 < d || dd > d + 1 {
                return Err(format_err(file, format!("node (u={}, v={}) not on slice t={t}", r.u, r.v)));
            }
            let e = nodes.entry((dd, i)).or_insert_with(|| (vec![0.0; m], vec![0.0; m]));
            e.0[k] = r.Phi;
            e.1[k] = r.Psi;
        }
        for ((dd, i), (phi, psi)) in nodes {
            let slot = dd + 1 - d;
            if i <= diags[slot].i_max() {
                diags[slot].set(i, &phi, &psi);
            }
        }
        let [lower, center, upper] = diags;
        out.push(Slice { t, h, modes: modes.clone(), lower, center, upper });
    }
    Ok(out)
}

pub fn residual_rows(file: &Path) -> Result<Vec<ResidualRow>> {
    read_csv(file, &RESIDUALS_HEADER)
}

pub fn path_in(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
