use std::path::Path;
use std::process::Command;

fn walkoff(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_walkoff")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const BASELINE: &str = "lambda_p_nm = 354.7\npump_fwhm_um = 70\nlength_mm = 6\npreset = all\ngrid_n = 41\n";

#[test]
fn simulate_writes_four_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "baseline.cfg", BASELINE);
    let out = tmp.path().join("out");
    let run = walkoff(&["simulate", &cfg, "--outdir", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    for name in ["single_iso", "single_aniso", "noncomp", "comp"] {
        for file in [
            "grid.csv",
            "intensity.pgm",
            "marginal_signal.csv",
            "marginal_idler.csv",
            "conditional_neg.csv",
            "conditional_zero.csv",
            "conditional_pos.csv",
        ] {
            assert!(out.join(name).join(file).is_file(), "{name}/{file}");
        }
    }
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"engine\": \"closed\""));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "baseline.cfg", BASELINE);
    let dirs = ["a", "b"].map(|d| tmp.path().join(d));
    for (k, d) in dirs.iter().enumerate() {
        let mut args = vec!["simulate", &cfg, "--outdir", d.to_str().unwrap()];
        if k == 1 {
            args.push("--sequential");
        }
        assert!(walkoff(&args).status.success());
    }
    for name in ["comp/grid.csv", "comp/intensity.pgm", "single_aniso/marginal_signal.csv"] {
        assert_eq!(
            std::fs::read(dirs[0].join(name)).unwrap(),
            std::fs::read(dirs[1].join(name)).unwrap(),
            "{name}"
        );
    }
    let strip = |d: &Path| {
        std::fs::read_to_string(d.join("report.json"))
            .unwrap()
            .lines()
            .filter(|l| !l.contains("generated_at"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&dirs[0]), strip(&dirs[1]));
}

#[test]
fn oracle_engine_reports_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "tiny.cfg",
        "lambda_p_nm = 354.7\npump_fwhm_um = 70\nlength_mm = 6\npreset = comp\ngrid_n = 21\nquad_z_panels = 200\n",
    );
    let out = tmp.path().join("out");
    let run = walkoff(&["simulate", &cfg, "--engine", "oracle", "--outdir", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"engine\": \"oracle\""));
    assert!(report.contains("\"max_delta\""));
}

#[test]
fn sweep_prints_trend() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "a.cfg",
        "lambda_p_nm = 354.7\npump_fwhm_um = 70\nlength_mm = 6\npreset = single_aniso\ngrid_n = 61\n",
    );
    let out = tmp.path().join("out");
    let run = walkoff(&["sweep", &cfg, "--param", "pump_fwhm", "--values", "70,150,300", "--outdir", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("decreasing"));
    assert!(out.join("sweep_pump_fwhm_um.csv").is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.cfg", "pump_fwhm_um = -3\n");
    let run = walkoff(&["simulate", &bad]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("must be positive"));

    let unknown = write(tmp.path(), "unknown.cfg", "lambda_p_nm = 354.7\ncolor = red\n");
    assert_eq!(walkoff(&["simulate", &unknown]).status.code(), Some(2));

    let cfg = write(tmp.path(), "a.cfg", "lambda_p_nm = 354.7\npump_fwhm_um = 70\nlength_mm = 6\npreset = comp\n");
    let one = walkoff(&["sweep", &cfg, "--param", "length", "--values", "3"]);
    assert_eq!(one.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&one.stderr).contains("need"));

    let missing = tmp.path().join("missing.cfg");
    assert_eq!(walkoff(&["simulate", missing.to_str().unwrap()]).status.code(), Some(4));

    let ir = write(tmp.path(), "ir.cfg", "lambda_p_nm = 1500\npump_fwhm_um = 70\nlength_mm = 6\npreset = comp\n");
    assert_eq!(walkoff(&["simulate", &ir, "--outdir", tmp.path().join("o").to_str().unwrap()]).status.code(), Some(3));
}
