use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use nullwave_cli::commands::{self, load_meta, with_threads};
use nullwave_cli::config::{RunConfig, SweepConfig};
use nullwave_cli::io::*;
use nullwave_cli::sweep::generic_sweep;
use nullwave_cli::CliError;

const SMALL: &str = r#"
[grid]
h = 0.1
u_max = 10.0
v_max = 40.0
v0 = 2.0
l_max = 0

[data.psi]
epsilon = 0.05
support = [0.5, 2.0]

[analysis]
report_times = [5.0, 10.0, 15.0, 20.0]
hyperboloidal = true
power_window = [5.0, 20.0]
log_window = [10.0, 20.0]
"#;

fn parse(text: &str) -> RunConfig {
    toml::from_str(text).unwrap()
}

fn header_of(file: &Path) -> Vec<String> {
    let text = fs::read_to_string(file).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn output_files_carry_documented_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(SMALL);
    commands::report(&cfg, dir.path()).unwrap();
    for (name, header) in [
        (RADIATION_CSV, &RADIATION_HEADER[..]),
        (SLICES_CSV, &SLICES_HEADER[..]),
        (ENERGIES_CSV, &ENERGIES_HEADER[..]),
        (RESIDUALS_CSV, &RESIDUALS_HEADER[..]),
    ] {
        assert_eq!(header_of(&dir.path().join(name)), header, "{name}");
    }
    for name in [CONSTANTS_JSON, ENERGY_FITS_JSON, META_JSON] {
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap();
    }
    let residuals = fs::read_to_string(dir.path().join(RESIDUALS_CSV)).unwrap();
    for line in residuals.lines().skip(1) {
        let region = line.split(',').nth(2).unwrap();
        assert!(["region_i", "region_ii", "both", "neither"].contains(&region), "{region}");
    }
}

#[test]
fn meta_records_the_exact_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(SMALL);
    commands::evolve(&cfg, dir.path()).unwrap();
    let meta = load_meta(dir.path()).unwrap();
    assert_eq!(meta.config, cfg);
    assert!(!meta.partial);
}

#[test]
fn zero_data_gives_zero_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse(&SMALL.replace("epsilon = 0.05", "epsilon = 0.0"));
    commands::evolve(&cfg, dir.path()).unwrap();
    for name in [RADIATION_CSV, SLICES_CSV] {
        let mut rdr = csv::Reader::from_path(dir.path().join(name)).unwrap();
        let header = rdr.headers().unwrap().clone();
        let fields: Vec<usize> = header
            .iter()
            .enumerate()
            .filter(|(_, h)| ["Psi", "UPsi", "Phi", "Phi_over_lnv"].contains(h))
            .map(|(n, _)| n)
            .collect();
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec.unwrap();
            for &n in &fields {
                assert_eq!(rec[n].parse::<f64>().unwrap(), 0.0, "{name} column {}", &header[n]);
            }
            rows += 1;
        }
        assert!(rows > 0);
    }
    let c = commands::constants(dir.path()).unwrap();
    assert_eq!(c.constants.c1, 0.0);
    assert_eq!(c.constants.c5, 0.0);
}

#[test]
fn report_time_beyond_half_v_max_is_rejected() {
    let cfg = parse(&SMALL.replace("[5.0, 10.0, 15.0, 20.0]", "[25.0]"));
    match cfg.validate() {
        Err(CliError::Config { path, .. }) => assert_eq!(path, "analysis.report_times[0]"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let text = SMALL.replace("[grid]", "colour = 1\n[grid]");
    assert!(toml::from_str::<RunConfig>(&text).is_err());
}

#[test]
fn invalid_support_names_the_field() {
    let cfg = parse(&SMALL.replace("support = [0.5, 2.0]", "support = [0.5, 3.0]"));
    match cfg.validate() {
        Err(CliError::Config { path, .. }) => assert_eq!(path, "data.psi.support"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_radiation_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    commands::evolve(&parse(SMALL), dir.path()).unwrap();
    fs::remove_file(dir.path().join(RADIATION_CSV)).unwrap();
    match commands::constants(dir.path()) {
        Err(CliError::Read { file, .. }) => assert!(file.ends_with(RADIATION_CSV)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn wrong_header_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    commands::evolve(&parse(SMALL), dir.path()).unwrap();
    let file = dir.path().join(RADIATION_CSV);
    let text = fs::read_to_string(&file).unwrap().replacen("UPsi", "dPsi", 1);
    fs::write(&file, text).unwrap();
    assert!(matches!(commands::constants(dir.path()), Err(CliError::Format { .. })));
}

fn run_at(root: &Path, h: f64, text: &str) -> PathBuf {
    let dir = root.join(format!("h{h}"));
    let cfg = parse(&text.replace("h = 0.1", &format!("h = {h}")));
    commands::evolve(&cfg, &dir).unwrap();
    dir
}

#[test]
fn convergence_needs_matching_grids() {
    let root = tempfile::tempdir().unwrap();
    let a = run_at(root.path(), 0.1, SMALL);
    let b = run_at(root.path(), 0.05, SMALL);
    let c = root.path().join("other");
    commands::evolve(&parse(&SMALL.replace("v_max = 40.0", "v_max = 50.0").replace("h = 0.1", "h = 0.025")), &c).unwrap();
    assert!(matches!(commands::convergence(&[a.clone(), b.clone(), c], None), Err(CliError::Usage(_))));
    assert!(matches!(commands::convergence(&[a.clone(), a.clone(), a], None), Err(CliError::Usage(_))));
}

#[test]
fn convergence_of_zero_data_is_degenerate() {
    let root = tempfile::tempdir().unwrap();
    let zero = SMALL.replace("epsilon = 0.05", "epsilon = 0.0");
    let dirs: Vec<PathBuf> = [0.1, 0.05, 0.025].iter().map(|&h| run_at(root.path(), h, &zero)).collect();
    let out = root.path().join("conv");
    let s = commands::convergence(&dirs, Some(&out)).unwrap();
    assert_eq!(s.status, "degenerate");
    assert!(out.join(CONVERGENCE_JSON).exists());
}

#[test]
fn convergence_order_of_small_run_is_two() {
    let root = tempfile::tempdir().unwrap();
    let dirs: Vec<PathBuf> = [0.1, 0.05, 0.025].iter().map(|&h| run_at(root.path(), h, SMALL)).collect();
    let s = commands::convergence(&dirs, None).unwrap();
    assert_eq!(s.status, "ok");
    assert!((s.orders[0] - 2.0).abs() < 0.3, "{:?}", s.orders);
}

const SWEEP: &str = r#"
samples = 2
epsilon_range = [0.01, 0.05]
seed = 3

[grid]
h = 0.1
u_max = 10.0
v_max = 30.0
v0 = 2.0
l_max = 2
"#;

#[test]
fn sweep_without_samples_is_rejected() {
    let cfg: SweepConfig = toml::from_str(&SWEEP.replace("samples = 2", "samples = 0")).unwrap();
    match generic_sweep(&cfg, 0, None) {
        Err(CliError::Config { path, .. }) => assert_eq!(path, "samples"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_is_reproducible_from_its_seed() {
    let cfg: SweepConfig = toml::from_str(SWEEP).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, ra) = generic_sweep(&cfg, 3, Some(dir.path())).unwrap();
    let (b, _) = with_threads(1, || generic_sweep(&cfg, 3, None)).unwrap().unwrap();
    assert_eq!(a, b);
    let (c, _) = generic_sweep(&cfg, 4, None).unwrap();
    assert_ne!(a[0].epsilon, c[0].epsilon);
    assert_eq!(ra.samples, 2);
    assert!(dir.path().join(SWEEP_CSV).exists() && dir.path().join(SWEEP_JSON).exists());
}

#[test]
fn constants_do_not_depend_on_thread_count() {
    let root = tempfile::tempdir().unwrap();
    let cfg = parse(SMALL);
    let mut files = Vec::new();
    for threads in [1, 8] {
        let dir = root.path().join(format!("t{threads}"));
        with_threads(threads, || {
            commands::evolve(&cfg, &dir).unwrap();
            commands::constants(&dir).unwrap();
        })
        .unwrap();
        files.push(fs::read(dir.join(CONSTANTS_JSON)).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn binary_runs_report_and_rejects_bad_config() {
    let root = tempfile::tempdir().unwrap();
    let cfg_path = root.path().join("run.toml");
    fs::write(&cfg_path, SMALL).unwrap();
    let out = root.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_nullwave"))
        .args(["--threads", "2", "report", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.join(CONSTANTS_JSON).exists());

    fs::write(&cfg_path, SMALL.replace("h = 0.1", "h = -1.0")).unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_nullwave"))
        .args(["evolve", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("grid.h"));
}
