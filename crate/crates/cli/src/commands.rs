//! Subcommand implementations operating on run directories.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nullwave::asympt::{
    check_identities, compute_constants, mode_coefficients, mode_profile_residual, residual_profile,
    x_diagnostic, AsymptoticConstants, IdentityReport, LimitEstimator, RadiationRecord,
    RelationNormalization, ResidualRow, XReport,
};
use nullwave::energetics::{EnergyLaws, EnergySample};
use nullwave::evolve::{convergence_order, restrict, run, RunOutput, RunStatus};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::*;

/// Provenance record written next to every run's data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub config: RunConfig,
    pub status: RunStatus,
    /// Set when a divergence cut the run short; the data files cover the
    /// rows computed before it.
    pub partial: bool,
    pub rows_recorded: usize,
    pub wall_time_s: f64,
}

pub fn version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

/// Runs `f` on a pool with `threads` workers (all cores when 0).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evolves the configured problem and writes radiation, slices, energies
/// and meta files into `out`.
pub fn evolve(cfg: &RunConfig, out: &Path) -> Result<(Meta, RunOutput)> {
    cfg.validate()?;
    ensure_dir(out)?;
    let start = Instant::now();
    let result = run(&cfg.grid_spec(), &cfg.data_spec(), &cfg.plan(), &cfg.options())?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let rec = &result.radiation;
    write_csv(&out.join(RADIATION_CSV), &RADIATION_HEADER, &radiation_rows(rec))?;
    write_csv(&out.join(LOG_SLOPE_CSV), &["u", "ell", "m", "v_dphi_dv"], &log_slope_rows(rec))?;
    write_csv(&out.join(SLICES_CSV), &SLICES_HEADER, &slice_rows(&result.slices, cfg.analysis.slice_stride))?;
    let energies: Vec<EnergyRow> = result.energies.iter().map(EnergyRow::from).collect();
    write_csv(&out.join(ENERGIES_CSV), &ENERGIES_HEADER, &energies)?;
    let meta = Meta {
        version: version(),
        config: cfg.clone(),
        partial: result.status != RunStatus::Complete,
        status: result.status.clone(),
        rows_recorded: rec.n_u(),
        wall_time_s,
    };
    write_json(&out.join(META_JSON), &meta)?;
    Ok((meta, result))
}

pub fn load_meta(dir: &Path) -> Result<Meta> {
    read_json(&dir.join(META_JSON))
}

pub fn load_record(dir: &Path, meta: &Meta) -> Result<RadiationRecord> {
    let file = dir.join(RADIATION_CSV);
    let rows: Vec<RadiationRow> = read_csv(&file, &RADIATION_HEADER)?;
    let slope_file = dir.join(LOG_SLOPE_CSV);
    let slope: Option<Vec<LogSlopeRow>> = if slope_file.exists() {
        Some(read_csv(&slope_file, &["u", "ell", "m", "v_dphi_dv"])?)
    } else {
        None
    };
    let g = meta.config.grid_spec();
    record_from_rows(&file, g.modes(), g.h, g.v_max, &rows, slope.as_deref())
}

pub fn load_slices(dir: &Path, meta: &Meta) -> Result<Vec<nullwave::evolve::Slice>> {
    let file = dir.join(SLICES_CSV);
    let rows: Vec<SliceRow> = read_csv(&file, &SLICES_HEADER)?;
    let g = meta.config.grid_spec();
    slices_from_rows(&file, &g.modes(), g.h, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficient {
    pub ell: usize,
    pub m: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub constants: AsymptoticConstants,
    /// Relation `Φ/ln v = ¼∫(UΨ)²` read off at `v_max`, and the gap
    /// `max_ω|c₄ − 2c₃²|` relative to `max_ω|c₄|`.
    pub identity: IdentityReport,
    /// The same checks with coefficient `⅛` and/or the log-slope estimator.
    pub diagnostics: Vec<IdentityReport>,
    /// `∫ ((∂_tΨ)²)_ℓm du` per mode.
    pub mode_coefficients: Vec<ModeCoefficient>,
}

pub fn constants_report(rec: &RadiationRecord) -> Result<ConstantsReport> {
    let constants = compute_constants(rec)?;
    let identity = check_identities(rec, &constants, RelationNormalization::Quarter, LimitEstimator::Ratio)?;
    let mut diagnostics = Vec::new();
    for (n, e) in [
        (RelationNormalization::Eighth, LimitEstimator::Ratio),
        (RelationNormalization::Quarter, LimitEstimator::LogSlope),
        (RelationNormalization::Eighth, LimitEstimator::LogSlope),
    ] {
        if e == LimitEstimator::LogSlope && rec.log_slope.is_none() {
            continue;
        }
        diagnostics.push(check_identities(rec, &constants, n, e)?);
    }
    let mode_coefficients = rec
        .modes
        .modes()
        .iter()
        .zip(mode_coefficients(rec))
        .map(|(md, value)| ModeCoefficient { ell: md.ell, m: md.m, value })
        .collect();
    Ok(ConstantsReport { constants, identity, diagnostics, mode_coefficients })
}

/// Reads `radiation.csv` and writes `constants.json`.
pub fn constants(dir: &Path) -> Result<ConstantsReport> {
    let meta = load_meta(dir)?;
    let rec = load_record(dir, &meta)?;
    let report = constants_report(&rec)?;
    write_json(&dir.join(CONSTANTS_JSON), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub rows: usize,
    /// `X = UΦ − ln v (∂_tΨ)²` per slice.
    pub x_diagnostic: Vec<(f64, XReport)>,
    /// Modes requested for a profile residual that carry no data.
    pub not_excited: Vec<usize>,
}

/// Profile residuals on every stored slice; writes `residuals.csv` and
/// `x_diagnostic.json`. Needs `constants.json` (computed if absent).
pub fn residuals(dir: &Path) -> Result<(Vec<ResidualRow>, ResidualSummary)> {
    let meta = load_meta(dir)?;
    let rec = load_record(dir, &meta)?;
    let consts_file = dir.join(CONSTANTS_JSON);
    let consts = if consts_file.exists() {
        read_json::<ConstantsReport>(&consts_file)?.constants
    } else {
        constants(dir)?.constants
    };
    let slices = load_slices(dir, &meta)?;
    let cfg = &meta.config;
    let mut rows = Vec::new();
    let mut xs = Vec::new();
    let mut not_excited = Vec::new();
    for s in &slices {
        rows.extend(residual_profile(s, &rec, &consts, cfg.analysis.delta)?);
        for &ell in &cfg.analysis.mode_ells {
            match mode_profile_residual(ell, s, &rec, cfg.delta_ell(ell)) {
                Ok(r) => rows.extend(r),
                Err(nullwave::Error::ModeNotExcited { .. }) => {
                    if !not_excited.contains(&ell) {
                        not_excited.push(ell);
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        xs.push((s.t, x_diagnostic(s, cfg.analysis.delta)?));
    }
    write_csv(&dir.join(RESIDUALS_CSV), &RESIDUALS_HEADER, &rows)?;
    let summary = ResidualSummary { rows: rows.len(), x_diagnostic: xs, not_excited };
    write_json(&dir.join("x_diagnostic.json"), &summary)?;
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub laws: EnergyLaws,
    pub c5: Option<f64>,
    pub epsilon: f64,
    /// `‖∂φ‖/ln t` at the end of the log window over `c₅`.
    pub dphi_over_c5: Option<f64>,
    /// The same over `ε`.
    pub dphi_over_eps: Option<f64>,
}

pub fn energy_report(samples: &[EnergySample], cfg: &RunConfig, c5: Option<f64>) -> EnergyReport {
    let laws = EnergyLaws::evaluate(samples, cfg.analysis.power_window, cfg.analysis.log_window);
    let epsilon = cfg.data.psi.epsilon.max(cfg.data.phi.epsilon);
    let fin = laws.dphi_over_lnt_final;
    EnergyReport {
        dphi_over_c5: fin.zip(c5).filter(|(_, c)| *c > 0.0).map(|(a, c)| a / c),
        dphi_over_eps: fin.filter(|_| epsilon > 0.0).map(|a| a / epsilon),
        laws,
        c5,
        epsilon,
    }
}

/// Reads `energies.csv`, fits the growth laws and writes `energy_fits.json`.
pub fn energies(dir: &Path) -> Result<EnergyReport> {
    let meta = load_meta(dir)?;
    let rows: Vec<EnergyRow> = read_csv(&dir.join(ENERGIES_CSV), &ENERGIES_HEADER)?;
    let samples: Vec<EnergySample> = rows
        .iter()
        .map(|r| EnergySample {
            t: r.t,
            l2_phi: r.L2_phi,
            l2_dphi: r.L2_dphi,
            l2_psi: r.L2_psi,
            l2_dpsi: r.L2_dpsi,
            cascade_ratio: r.cascade_ratio,
            e_hyp_phi: r.E_hyp_phi,
            e_hyp_psi: None,
        })
        .collect();
    let consts_file = dir.join(CONSTANTS_JSON);
    let c5 = if consts_file.exists() {
        Some(read_json::<ConstantsReport>(&consts_file)?.constants.c5)
    } else {
        None
    };
    let report = energy_report(&samples, &meta.config, c5);
    write_json(&dir.join(ENERGY_FITS_JSON), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub dirs: Vec<PathBuf>,
    pub h: Vec<f64>,
    /// `ok` or `degenerate`.
    pub status: String,
    pub differences: Vec<f64>,
    pub orders: Vec<f64>,
    pub message: Option<String>,
}

/// Self-convergence of `Ψ(·, v_max)` from three runs at `h`, `h/2`, `h/4`.
pub fn convergence(dirs: &[PathBuf], out: Option<&Path>) -> Result<ConvergenceSummary> {
    if dirs.len() != 3 {
        return Err(CliError::Usage(format!("convergence takes 3 run directories, got {}", dirs.len())));
    }
    let metas: Vec<Meta> = dirs.iter().map(|d| load_meta(d)).collect::<Result<_>>()?;
    let grids: Vec<_> = metas.iter().map(|m| m.config.grid_spec()).collect();
    for (n, g) in grids.iter().enumerate().skip(1) {
        let g0 = &grids[0];
        let ratio = g0.h / g.h;
        let want = (1u32 << n) as f64;
        if (ratio - want).abs() > 1e-9 * want
            || g.v_max != g0.v_max
            || g.u_max != g0.u_max
            || g.l_max != g0.l_max
            || g.axisymmetric != g0.axisymmetric
        {
            return Err(CliError::Usage(format!(
                "{} does not refine {} by {want}: grids must match apart from h",
                dirs[n].display(),
                dirs[0].display()
            )));
        }
    }
    let mut levels = Vec::new();
    for (n, (d, m)) in dirs.iter().zip(&metas).enumerate() {
        let rec = load_record(d, m)?;
        levels.push(restrict(&rec.psi, rec.n_modes(), 1 << n));
    }
    let h = grids.iter().map(|g| g.h).collect();
    let summary = match convergence_order(&levels) {
        Ok(r) => ConvergenceSummary {
            dirs: dirs.to_vec(),
            h,
            status: "ok".into(),
            differences: r.differences,
            orders: r.orders,
            message: None,
        },
        Err(e) => ConvergenceSummary {
            dirs: dirs.to_vec(),
            h,
            status: "degenerate".into(),
            differences: Vec::new(),
            orders: Vec::new(),
            message: Some(e.to_string()),
        },
    };
    if let Some(out) = out {
        ensure_dir(out)?;
        write_json(&out.join(CONVERGENCE_JSON), &summary)?;
    }
    Ok(summary)
}

/// Full pipeline: evolve, constants, residuals, energies.
pub fn report(cfg: &RunConfig, out: &Path) -> Result<Meta> {
    let (meta, _) = evolve(cfg, out)?;
    if meta.status == RunStatus::Complete {
        constants(out)?;
        residuals(out)?;
    }
    energies(out)?;
    Ok(meta)
}
