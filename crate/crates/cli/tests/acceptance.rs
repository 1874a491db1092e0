//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if
//! any criterion fails. Tolerances are fixed; nothing here is tuned to the
//! numbers the solver happens to produce.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nullwave::asympt::{IdentityReport, LimitEstimator, Region, RelationNormalization, ResidualRow};
use nullwave::evolve::{diamond_step, potential_table, run, ReportPlan, RunStatus};
use nullwave::profiles::eval_d_ell;
use nullwave::quadrature::integrate_adaptive;
use nullwave::stats::spearman;
use nullwave_cli::commands::{self, with_threads, ConstantsReport, EnergyReport};
use nullwave_cli::config::{RunConfig, SweepConfig};
use nullwave_cli::io::CONSTANTS_JSON;
use nullwave_cli::sweep::generic_sweep;

type Check = std::result::Result<(bool, String), Box<dyn std::error::Error>>;

/// Radial data `rψ = ε·bump` on `[0.5, 2]`, `V0 = 2`, `ε = 0.05`.
fn radial(h: f64, u_max: f64, v_max: f64, times: &[f64]) -> RunConfig {
    let times: Vec<String> = times.iter().map(|t| format!("{t:?}")).collect();
    let text = format!(
        r#"
[grid]
h = {h:?}
u_max = {u_max:?}
v_max = {v_max:?}
v0 = 2.0
l_max = 0

[data.psi]
epsilon = 0.05
support = [0.5, 2.0]

[analysis]
delta = 0.1
report_times = [{}]
power_window = [50.0, 1000.0]
log_window = [300.0, 1000.0]
"#,
        times.join(", ")
    );
    toml::from_str(&text).expect("radial config")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn timed(limit_s: f64, start: Instant, pass: bool, detail: String) -> (bool, String) {
    let secs = start.elapsed().as_secs_f64();
    (pass && secs < limit_s, format!("{detail}; {secs:.2} s (limit {limit_s} s)"))
}

fn c1_d0() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 0..100 {
        let z = 10f64.powf(-3.0 + 6.0 * n as f64 / 99.0);
        let exact = ((2.0 + z) / z).ln();
        // D₀(z) = ∫_z^∞ ds / (s(1 + s/2)), with s = z/y
        let (quad, _) = integrate_adaptive(|y| 2.0 / (2.0 * y + z), 0.0, 1.0, 1e-14, 4000);
        worst = worst.max((eval_d_ell(0, z)? - exact).abs()).max((quad - exact).abs());
    }
    Ok(timed(1.0, start, worst <= 1e-10, format!("max |D0 - ln((2+z)/z)| = {worst:.3e} (tol 1e-10)")))
}

fn c2_scheme_exactness() -> Check {
    let start = Instant::now();
    // Φ = g(v) − g(u) is a free radial wave vanishing on the axis.
    let g = |x: f64| (0.7 * x).sin() + 0.1 * x * x;
    let h = 0.05;
    let n_v = 150;
    let kappa = potential_table(&[0], n_v);
    let mut prev: Vec<f64> = (0..=n_v).map(|j| g(j as f64 * h) - g(0.0)).collect();
    let mut next = vec![0.0; n_v + 1];
    let (mut worst, mut cells): (f64, usize) = (0.0, 0);
    for i in 0..n_v - 1 {
        diamond_step(&prev, &mut next, None, &kappa, i, n_v, 1, h);
        for j in (i + 2)..=n_v {
            let exact = g(j as f64 * h) - g((i + 1) as f64 * h);
            worst = worst.max((next[j] - exact).abs());
            cells += 1;
        }
        std::mem::swap(&mut prev, &mut next);
    }
    let pass = worst <= 1e-12 && cells >= 10_000;
    Ok(timed(1.0, start, pass, format!("{cells} cells, max error {worst:.3e} (tol 1e-12)")))
}

fn c3_convergence(root: &Path) -> Check {
    let start = Instant::now();
    let mut dirs = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let dir = root.join(format!("conv_{h}"));
        commands::evolve(&radial(h, 100.0, 200.0, &[]), &dir)?;
        dirs.push(dir);
    }
    let s = commands::convergence(&dirs, None)?;
    let order = s.orders.first().copied().unwrap_or(f64::NAN);
    let pass = s.status == "ok" && (order - 2.0).abs() <= 0.2;
    Ok(timed(600.0, start, pass, format!("observed order {order:.4} (want 2.0 +- 0.2)")))
}

struct RadialRuns {
    short: ConstantsReport,
    long: ConstantsReport,
    residuals: Vec<ResidualRow>,
    energies: EnergyReport,
}

fn radial_runs(root: &Path) -> Result<RadialRuns, Box<dyn std::error::Error>> {
    let mut times = vec![5.0, 10.0, 20.0, 30.0, 40.0];
    times.extend((1..=20).map(|k| 50.0 * k as f64));
    let short_dir = root.join("radial_1000");
    commands::evolve(&radial(0.1, 500.0, 1000.0, &[]), &short_dir)?;
    let short = commands::constants(&short_dir)?;
    let long_dir = root.join("radial_2000");
    commands::report(&radial(0.1, 1000.0, 2000.0, &times), &long_dir)?;
    let long: ConstantsReport = nullwave_cli::io::read_json(&long_dir.join(CONSTANTS_JSON))?;
    let (residuals, _) = commands::residuals(&long_dir)?;
    let energies = commands::energies(&long_dir)?;
    Ok(RadialRuns { short, long, residuals, energies })
}

fn diagnostic(r: &ConstantsReport, n: RelationNormalization, e: LimitEstimator) -> Option<&IdentityReport> {
    std::iter::once(&r.identity).chain(&r.diagnostics).find(|d| d.normalization == n && d.estimator == e)
}

fn c4_identities(runs: &RadialRuns) -> Check {
    let (a, b) = (&runs.short, &runs.long);
    let c = &a.constants;
    let i = &a.identity;
    let pass = c.c1 >= 0.0
        && i.c1_mean_gap <= 1e-10
        && i.c2_mean_gap <= 1e-10
        && i.c4_gap_relative <= 0.05
        && b.identity.c4_gap < i.c4_gap;
    let mut detail = format!(
        "c1 = {:.6e}, |c1 - mean c3| = {:.1e}, |c2 - mean c4| = {:.1e}, max|c4 - 2c3^2|/max|c4| = {:.4} (tol 0.05) at v_max=1000, gap {:.4e} -> {:.4e} at v_max=2000",
        c.c1, i.c1_mean_gap, i.c2_mean_gap, i.c4_gap_relative, i.c4_gap, b.identity.c4_gap
    );
    if let Some(d) = diagnostic(b, RelationNormalization::Eighth, LimitEstimator::LogSlope) {
        detail += &format!("; with c4 = c3^2 and the log-slope limit: {:.4}", d.c4_gap_relative);
    }
    Ok((pass, detail))
}

fn c5_relation(runs: &RadialRuns) -> Check {
    let (a, b) = (&runs.short.identity, &runs.long.identity);
    let pass = b.relation_relative <= 0.10 && b.relation_sup < a.relation_sup;
    let mut detail = format!(
        "sup residual / plateau = {:.4} (tol 0.10) at v_max=2000; sup {:.4e} at 1000 -> {:.4e} at 2000",
        b.relation_relative, a.relation_sup, b.relation_sup
    );
    for (n, e, name) in [
        (RelationNormalization::Eighth, LimitEstimator::Ratio, "1/8, ratio"),
        (RelationNormalization::Eighth, LimitEstimator::LogSlope, "1/8, log-slope"),
    ] {
        if let Some(d) = diagnostic(&runs.long, n, e) {
            detail += &format!("; [{name}] {:.4}", d.relation_relative);
        }
    }
    Ok((pass, detail))
}

/// Per-slice maxima of `relative_residual` keyed by the slice's mean `u`.
fn per_slice_max<'a>(rows: impl Iterator<Item = &'a ResidualRow>) -> Vec<(f64, f64)> {
    let mut by_t: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let t = 0.5 * (r.u + r.v);
        let e = by_t.entry((t * 1e6).round() as u64).or_insert((0.0, 0.0, 0));
        e.0 = e.0.max(r.relative_residual);
        e.1 += r.u;
        e.2 += 1;
    }
    by_t.values().map(|&(m, su, n)| (su / n as f64, m)).collect()
}

fn c6_region_one(runs: &RadialRuns) -> Check {
    let rows = runs.residuals.iter().filter(|r| {
        r.field == "phi_l0"
            && matches!(r.region, Region::RegionI | Region::Both)
            && (50.0..=500.0).contains(&r.u)
            && 0.5 * (r.v - r.u) <= 0.5 * r.u.powf(0.9)
    });
    let series = per_slice_max(rows);
    let (u, res): (Vec<f64>, Vec<f64>) = series.iter().copied().unzip();
    let rho = spearman(&u, &res).unwrap_or(f64::NAN);
    let last = res.last().copied().unwrap_or(f64::NAN);
    let pass = series.len() >= 3 && rho < 0.0 && last <= 0.3;
    Ok((pass, format!("{} slices, Spearman {rho:.3} (want < 0), final residual {last:.4} (tol 0.3)", series.len())))
}

fn c7_energy(runs: &RadialRuns) -> Check {
    let e = &runs.energies;
    let l = &e.laws;
    let slope = l.phi_power.map(|f| f.params[1]).unwrap_or(f64::NAN);
    let var = l.dphi_over_lnt_variation.unwrap_or(f64::NAN);
    let fin = l.dphi_over_lnt_final.unwrap_or(f64::NAN);
    let c5 = runs.long.constants.c5;
    let psi = l.psi_bound_ratio.unwrap_or(f64::NAN);
    let rho = l.cascade_spearman.unwrap_or(f64::NAN);
    let pass = (0.4..=0.6).contains(&slope)
        && var <= 0.15
        && fin >= 0.8 * c5
        && fin <= 10.0 * e.epsilon
        && psi <= 2.0
        && rho < 0.0;
    Ok((
        pass,
        format!(
            "slope {slope:.4} (want [0.4, 0.6]), |dphi|/ln t variation {var:.4} (tol 0.15), final {fin:.4e} in [{:.4e}, {:.4e}], psi bound ratio {psi:.4} (tol 2), cascade Spearman {rho:.3} (want < 0)",
            0.8 * c5,
            10.0 * e.epsilon
        ),
    ))
}

fn c8_dipole(root: &Path) -> Check {
    let mut cfg = RunConfig::load(&configs_dir().join("dipole.toml"))?;
    cfg.grid.u_max = 300.0;
    cfg.grid.v_max = 1000.0;
    cfg.analysis.delta_ell = Some(0.125);
    cfg.analysis.mode_ells = vec![1];
    cfg.analysis.report_times = vec![500.0];
    let dir = root.join("dipole");
    commands::evolve(&cfg, &dir)?;
    commands::constants(&dir)?;
    let (rows, _) = commands::residuals(&dir)?;
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.field == "phi_1_0" && (50.0..=300.0).contains(&r.u))
        .filter(|r| 0.5 * (r.v - r.u) >= r.u.powf(1.0 - 0.125))
        .map(|r| (r.u, r.relative_residual))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (u, res): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let rho = spearman(&u, &res).unwrap_or(f64::NAN);
    let last = res.last().copied().unwrap_or(f64::NAN);
    let pass = pts.len() >= 3 && rho < 0.0 && last <= 0.3;
    Ok((pass, format!("{} nodes, Spearman {rho:.3} (want < 0), residual at u = {:.1}: {last:.4} (tol 0.3)", pts.len(), u.last().copied().unwrap_or(f64::NAN))))
}

fn c9_closure(root: &Path) -> Check {
    let mut cfg = radial(0.1, 100.0, 200.0, &[]);
    cfg.grid.l_max = 2;
    cfg.grid.axisymmetric = false;
    let out = run(&cfg.grid_spec(), &cfg.data_spec(), &ReportPlan::default(), &cfg.options())?;
    let worst = cfg
        .grid_spec()
        .modes()
        .modes()
        .iter()
        .enumerate()
        .filter(|(_, m)| m.ell >= 1)
        .map(|(k, _)| out.mode_max_phi[k].max(out.mode_max_psi[k]))
        .fold(0.0, f64::max);
    let radial = radial(0.1, 100.0, 200.0, &[]);
    let mut files = Vec::new();
    for threads in [1, 8] {
        let dir = root.join(format!("threads_{threads}"));
        with_threads(threads, || -> nullwave_cli::Result<()> {
            commands::evolve(&radial, &dir)?;
            commands::constants(&dir)?;
            Ok(())
        })??;
        files.push(std::fs::read(dir.join(CONSTANTS_JSON))?);
    }
    let same = files[0] == files[1];
    let pass = out.status == RunStatus::Complete && worst <= 1e-13 && same;
    Ok((pass, format!("max |l >= 1| = {worst:.3e} (tol 1e-13), constants.json identical for 1 and 8 threads: {same}")))
}

fn c10_sweep() -> Check {
    let cfg = SweepConfig::load(&configs_dir().join("sweep.toml"))?;
    let (samples, report) = generic_sweep(&cfg, cfg.seed, None)?;
    let nonzero = samples.iter().filter(|s| s.c1_nonzero).count();
    let fraction = nonzero as f64 / samples.len() as f64;
    let pass = samples.len() == 20 && fraction == 1.0 && report.small_c1_implies_small_c2;
    let c1_min = samples.iter().map(|s| s.c1).fold(f64::INFINITY, f64::min);
    Ok((
        pass,
        format!(
            "{} samples, {} diverged, fraction c1 > 1e-12 eps^2 = {fraction:.3}, min c1 = {c1_min:.3e}, small c1 implies small c2: {}",
            samples.len(),
            report.diverged,
            report.small_c1_implies_small_c2
        ),
    ))
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filtered runs expect a quiet harness
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let root = tempfile::tempdir().expect("temp dir");
    let root = root.path();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, check: Check| {
        let (pass, detail) = check.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!("{} [{n:>2}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    report(1, "D0 closed form", c1_d0());
    report(2, "scheme exactness", c2_scheme_exactness());
    report(3, "self-convergence", c3_convergence(root));
    match radial_runs(root) {
        Ok(runs) => {
            report(4, "constant identities", c4_identities(&runs));
            report(5, "radiation relation", c5_relation(&runs));
            report(6, "region I sharpness", c6_region_one(&runs));
            report(7, "energy laws", c7_energy(&runs));
        }
        Err(e) => {
            let msg = e.to_string();
            for (n, name) in [(4, "constant identities"), (5, "radiation relation"), (6, "region I sharpness"), (7, "energy laws")] {
                report(n, name, Err(msg.clone().into()));
            }
        }
    }
    report(8, "higher-mode profile", c8_dipole(root));
    report(9, "symmetry closure and determinism", c9_closure(root));
    report(10, "genericity sweep", c10_sweep());
    println!("acceptance: {} of 10 criteria failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
