//! Random small-data genericity sweep.

use std::path::Path;

use nullwave::asympt::compute_constants;
use nullwave::evolve::{run, AngularComponent, FieldData, InitialDataSpec, NullGridSpec, ReportPlan, RunOptions, RunStatus};
use nullwave::sphharm::ModeSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SweepConfig;
use crate::error::Result;
use crate::io::{ensure_dir, write_csv, write_json, SWEEP_CSV, SWEEP_JSON};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub index: usize,
    pub epsilon: f64,
    pub support_a: f64,
    pub support_b: f64,
    pub status: String,
    pub c1: f64,
    pub c2: f64,
    pub c3_min: f64,
    pub c3_max: f64,
    pub c4_min: f64,
    pub c4_max: f64,
    /// `tau_scale · ε²`
    pub tau1: f64,
    /// `tau_scale · ε³`
    pub tau2: f64,
    pub c1_nonzero: bool,
    pub c2_nonzero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub samples: usize,
    pub diverged: usize,
    /// Fraction of completed samples with `c₁ > τ₁`.
    pub fraction_c1_nonzero: f64,
    /// Every sample with `c₁ ≤ τ₁` also has `|c₂| ≤ τ₂`.
    pub small_c1_implies_small_c2: bool,
    /// `(c₁, c₂)` per completed sample.
    pub pairs: Vec<(f64, f64)>,
}

/// Sampled cone data for member `index`; reproducible from `(seed, index)`.
pub fn sample_data(cfg: &SweepConfig, seed: u64, index: usize) -> InitialDataSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let [e0, e1] = cfg.epsilon_range;
    let eps = if e1 > e0 { rng.gen_range(e0..e1) } else { e0 };
    let mut field = |amplitude: f64| {
        let [l0, l1] = cfg.support_left;
        let a = if l1 > l0 { rng.gen_range(l0..l1) } else { l0 };
        let b_lo = a + cfg.min_width;
        let b = if cfg.grid.v0 > b_lo { rng.gen_range(b_lo..cfg.grid.v0) } else { cfg.grid.v0 };
        let modes = ModeSet::new(cfg.l_data, cfg.grid.axisymmetric);
        let angular = modes
            .modes()
            .iter()
            .map(|md| AngularComponent { ell: md.ell, m: md.m, weight: rng.gen_range(-1.0..1.0) * 4.0 })
            .collect();
        FieldData { amplitude, support: [a, b], angular }
    };
    let psi = field(eps);
    let phi = field(eps * 0.5);
    InitialDataSpec { phi, psi }
}

fn grid_spec(cfg: &SweepConfig) -> NullGridSpec {
    NullGridSpec {
        h: cfg.grid.h,
        u_max: cfg.grid.u_max,
        v_max: cfg.grid.v_max,
        support_bound: cfg.grid.v0,
        l_max: cfg.grid.l_max,
        axisymmetric: cfg.grid.axisymmetric,
    }
}

fn run_sample(cfg: &SweepConfig, seed: u64, index: usize) -> Result<SweepSample> {
    let data = sample_data(cfg, seed, index);
    let eps = data.psi.amplitude;
    let opts = RunOptions { sources: cfg.physics.sources, corrector_passes: cfg.physics.corrector_passes };
    let out = run(&grid_spec(cfg), &data, &ReportPlan::default(), &opts)?;
    let tau1 = cfg.tau_scale * eps * eps;
    let tau2 = cfg.tau_scale * eps * eps * eps;
    let mut s = SweepSample {
        index,
        epsilon: eps,
        support_a: data.psi.support[0],
        support_b: data.psi.support[1],
        status: "diverged".into(),
        c1: f64::NAN,
        c2: f64::NAN,
        c3_min: f64::NAN,
        c3_max: f64::NAN,
        c4_min: f64::NAN,
        c4_max: f64::NAN,
        tau1,
        tau2,
        c1_nonzero: false,
        c2_nonzero: false,
    };
    if out.status != RunStatus::Complete {
        return Ok(s);
    }
    let c = compute_constants(&out.radiation)?;
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (c3_min, c3_max) = range(&c.c3);
    let (c4_min, c4_max) = range(&c.c4);
    s.status = "complete".into();
    s.c1 = c.c1;
    s.c2 = c.c2;
    s.c3_min = c3_min;
    s.c3_max = c3_max;
    s.c4_min = c4_min;
    s.c4_max = c4_max;
    s.c1_nonzero = c.c1 > tau1;
    s.c2_nonzero = c.c2.abs() > tau2;
    Ok(s)
}

/// Runs all members in parallel; writes `sweep.csv` and `sweep.json` when
/// `out` is given.
pub fn generic_sweep(cfg: &SweepConfig, seed: u64, out: Option<&Path>) -> Result<(Vec<SweepSample>, SweepReport)> {
    cfg.validate()?;
    let samples: Vec<SweepSample> = (0..cfg.samples)
        .into_par_iter()
        .map(|k| run_sample(cfg, seed, k))
        .collect::<Result<_>>()?;
    let done: Vec<&SweepSample> = samples.iter().filter(|s| s.status == "complete").collect();
    let report = SweepReport {
        seed,
        samples: samples.len(),
        diverged: samples.len() - done.len(),
        fraction_c1_nonzero: if done.is_empty() {
            0.0
        } else {
            done.iter().filter(|s| s.c1_nonzero).count() as f64 / done.len() as f64
        },
        small_c1_implies_small_c2: done.iter().all(|s| s.c1_nonzero || !s.c2_nonzero),
        pairs: done.iter().map(|s| (s.c1, s.c2)).collect(),
    };
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let header = [
            "index", "epsilon", "support_a", "support_b", "status", "c1", "c2", "c3_min", "c3_max",
            "c4_min", "c4_max", "tau1", "tau2", "c1_nonzero", "c2_nonzero",
        ];
        write_csv(&dir.join(SWEEP_CSV), &header, &samples)?;
        write_json(&dir.join(SWEEP_JSON), &report)?;
    }
    Ok((samples, report))
}
