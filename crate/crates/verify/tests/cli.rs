use std::process::Command;

use swlab_verify::checks::{loglog_slope, CHECKS};
use swlab_verify::config::{Suite, SuiteConfig};
use swlab_verify::report::{Bound, CheckReport, Measured, Report};
use swlab_verify::study::{convergence_study, StudyReport};
use swlab_verify::{run_suite, Error};

fn quick(suites: &[Suite]) -> SuiteConfig {
    SuiteConfig { grid: 4, grids: vec![4, 6], suites: suites.to_vec(), ..SuiteConfig::default() }
}

fn verify(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs")
}

#[test]
fn config_parses_every_key() {
    let c = SuiteConfig::parse(
        "# run\nseed = 42\ngrid = 6\ngrids = 4, 8, 16\nkernel_grid = 4\nepsilons = 1e-1, 1e-2, 1e-3\n\
         suites = clifford, kahler-kernel\ntol.adjoint.flat = 1e-10  # looser\n",
    )
    .unwrap();
    assert_eq!(c.seed, 42);
    assert_eq!((c.grid, c.kernel_grid), (6, 4));
    assert_eq!(c.grids, vec![4, 8, 16]);
    assert_eq!(c.epsilons, vec![1e-1, 1e-2, 1e-3]);
    assert_eq!(c.suites, vec![Suite::Clifford, Suite::KahlerKernel]);
    assert_eq!(c.tolerances["adjoint.flat"], 1e-10);
    assert_eq!(SuiteConfig::parse("").unwrap(), SuiteConfig::default());
}

#[test]
fn config_rejects_invalid_values() {
    for text in [
        "grid = 5",
        "grid = 2",
        "grids = 8, 6",
        "kernel_grid = 3",
        "epsilons = 1e-2, 1e-2, 1e-3",
        "epsilons = 1e-2, 1e-3",
        "epsilons = 1e-3, 1e-2, 1e-1",
        "seed = -1",
        "colour = blue",
        "no equals sign",
        "tol.adjoint.flat = big",
    ] {
        assert!(matches!(SuiteConfig::parse(text), Err(Error::Config(_))), "{text}");
    }
}

#[test]
fn unknown_suite_is_an_error() {
    assert!(matches!(SuiteConfig::parse("suites = clifford, spectral"), Err(Error::UnknownSuite(s)) if s == "spectral"));
    assert!(matches!("dirac".parse::<Suite>(), Err(Error::UnknownSuite(_))));
    for s in Suite::ALL {
        assert_eq!(s.name().parse::<Suite>().unwrap(), s);
    }
}

#[test]
fn every_suite_has_checks_with_unique_names() {
    for s in Suite::ALL {
        assert!(CHECKS.iter().any(|c| c.suite == s), "{s}");
    }
    let mut names: Vec<_> = CHECKS.iter().map(|c| c.name).collect();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), CHECKS.len());
}

#[test]
fn empty_suite_list_gives_an_empty_passing_report() {
    let checks = run_suite(&quick(&[]), false).unwrap();
    assert!(checks.is_empty());
    let rep = Report::new(1, checks);
    assert!(rep.passed());
    assert_eq!(rep.to_json(), "{\n  \"version\": 1,\n  \"seed\": 1,\n  \"checks\": []\n}");
}

#[test]
fn clifford_suite_passes_quickly() {
    let start = std::time::Instant::now();
    let checks = run_suite(&quick(&[Suite::Clifford]), false).unwrap();
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(checks.len(), 5);
    assert!(checks.iter().all(|c| c.pass && c.runtime.is_none()), "{checks:?}");
}

#[test]
fn tolerance_overrides_apply_and_unknown_names_fail() {
    let mut c = quick(&[Suite::Clifford]);
    c.tolerances.insert("clifford.spinor_pair".into(), -1.0);
    let checks = run_suite(&c, false).unwrap();
    let pair = checks.iter().find(|r| r.name == "clifford.spinor_pair").unwrap();
    assert_eq!(pair.bound, Bound::AtMost { value: -1.0 });
    assert!(!pair.pass);
    c.tolerances.insert("clifford.nonexistent".into(), 1.0);
    assert!(matches!(run_suite(&c, false), Err(Error::UnknownCheck(_))));
}

#[test]
fn pass_flag_follows_the_bound() {
    let r = |v: f64, b: Bound| CheckReport::new("x", Measured::new(v), b).pass;
    assert!(r(1e-13, Bound::AtMost { value: 1e-12 }));
    assert!(!r(2e-12, Bound::AtMost { value: 1e-12 }));
    assert!(r(2.0, Bound::AtLeast { value: 1.9 }));
    assert!(r(2.25, Bound::Within { center: 2.0, half_width: 0.3 }));
    assert!(!r(1.6, Bound::Within { center: 2.0, half_width: 0.3 }));
    assert!(!r(f64::NAN, Bound::AtLeast { value: 0.0 }));
    assert_eq!(Bound::Within { center: 2.0, half_width: 0.3 }.with_tolerance(0.1), Bound::Within { center: 2.0, half_width: 0.1 });
}

#[test]
fn report_is_reproducible_across_seeds_and_threads() {
    let c = quick(&[Suite::Clifford, Suite::Metric, Suite::Calculus, Suite::Holonomy]);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        Report::new(c.seed, pool.install(|| run_suite(&c, false)).unwrap()).to_json()
    };
    let one = run(1);
    assert_eq!(one, run(4));
    let other = Report::new(2, run_suite(&SuiteConfig { seed: 2, ..c.clone() }, false).unwrap()).to_json();
    assert_ne!(one, other);
}

#[test]
fn timings_are_opt_in() {
    let checks = run_suite(&quick(&[Suite::Clifford]), true).unwrap();
    assert!(checks.iter().all(|c| c.runtime.is_some()));
    assert!(Report::new(1, checks).to_json().contains("\"runtime\""));
}

#[test]
fn loglog_slope_of_power_laws() {
    let x = [1e-1, 5e-2, 2.5e-2];
    let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t).collect();
    assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
}

#[test]
fn study_orders() {
    let grid = swlab::field::Grid::new(6).unwrap();
    let lc = convergence_study("lc-variation", 1, grid, &[1e-2, 5e-3, 2.5e-3]).unwrap();
    assert!((lc.order - 2.0).abs() < 0.1 && lc.pass && !lc.saturated && !lc.non_monotone, "{lc:?}");
    assert!(lc.residual < 1e-2);
    let hol = convergence_study("holonomy", 1, grid, &[1e-2, 5e-3, 2.5e-3]).unwrap();
    assert!(hol.order >= 1.0 && hol.pass, "{hol:?}");
}

#[test]
fn exact_identities_saturate_instead_of_failing() {
    let grid = swlab::field::Grid::new(4).unwrap();
    let rep: StudyReport = convergence_study("kahler-identity", 1, grid, &[4.0, 6.0, 8.0]).unwrap();
    assert!(rep.saturated && rep.pass, "{rep:?}");
}

#[test]
fn study_validates_levels() {
    let grid = swlab::field::Grid::new(4).unwrap();
    let err = |check: &str, levels: &[f64]| convergence_study(check, 1, grid, levels).unwrap_err();
    assert!(matches!(err("holonomy", &[1e-2, 5e-3]), Error::Study(_)));
    assert!(matches!(err("holonomy", &[1e-3, 1e-2, 1e-1]), Error::Study(_)));
    assert!(matches!(err("kahler-identity", &[4.0, 5.0, 6.0]), Error::Study(_)));
    assert!(matches!(err("kahler-identity", &[8.0, 6.0, 4.0]), Error::Study(_)));
    assert!(matches!(err("spectral", &[1.0, 0.5, 0.25]), Error::UnknownCheck(_)));
}

#[test]
fn non_monotone_errors_are_flagged() {
    // Step below the difference-quotient floor: the error stops decreasing.
    let grid = swlab::field::Grid::new(4).unwrap();
    let rep = convergence_study("lc-variation", 1, grid, &[1e-2, 1e-7, 1e-9]).unwrap();
    assert!(rep.non_monotone && !rep.pass, "{rep:?}");
}

#[test]
fn binary_runs_a_suite_and_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("verify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "seed = 3\ngrid = 4\ngrids = 4, 6\n").unwrap();
    let out = dir.join("report.json");
    let o = verify(&["run", "--config", cfg.to_str().unwrap(), "--suite", "clifford", "--report", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["seed"], 3);
    assert_eq!(rep["checks"].as_array().unwrap().len(), 5);

    let o = verify(&["run", "--config", cfg.to_str().unwrap(), "--suite", "clifford", "--seed", "9"]);
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["seed"], 9);

    std::fs::write(&cfg, "grid = 4\ngrids = 4, 6\ntol.clifford.volume_form = -1\n").unwrap();
    let o = verify(&["run", "--config", cfg.to_str().unwrap(), "--suite", "clifford", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("first failing check: clifford.volume_form"));

    let o = verify(&["run", "--suite", "spectral"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite 'spectral'"));
    let o = verify(&["run", "--suite", "clifford", "--grid", "5"]);
    assert_eq!(o.status.code(), Some(2));

    let m = dir.join("kernel.bin");
    let o = verify(&["export-kernel", "--alpha", "1", "--out", m.to_str().unwrap()]);
    assert!(o.status.success());
    let bytes = std::fs::read(&m).unwrap();
    let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
    let header: serde_json::Value = serde_json::from_slice(&bytes[..nl]).unwrap();
    assert_eq!(header["dims"], serde_json::json!([3072, 1536]));
    assert_eq!(bytes.len() - nl - 1, 3072 * 1536 * 8);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_study_reports_order() {
    let o = verify(&["study", "--check", "holonomy", "--levels", "1e-2,5e-3,2.5e-3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["errors"].as_array().unwrap().len(), 3);
    assert!(rep["order"].as_f64().unwrap() >= 1.0);
    let o = verify(&["study", "--check", "holonomy", "--levels", "1e-2,5e-3"]);
    assert_eq!(o.status.code(), Some(2));
}
