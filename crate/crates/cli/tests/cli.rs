use std::path::Path;
use std::process::{Command, Output};

const SUITE_FILES: [&str; 7] = [
    "identities.csv",
    "geometry.csv",
    "curvature.csv",
    "hessian_integrals.csv",
    "symmetrize.csv",
    "polya_szego.csv",
    "compare.csv",
];

fn anisoperim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anisoperim"))
        .args(args)
        .output()
        .expect("failed to launch anisoperim")
}

fn run(target: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", target, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    anisoperim(&args)
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn disk_preset_passes_and_writes_every_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("preset:euclidean-disk-quadratic", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    for f in SUITE_FILES.iter().chain(&["summary.csv"]) {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let mut checks = 0;
    for f in SUITE_FILES {
        let rows = read_rows(&dir.path().join(f));
        assert!(!rows.is_empty(), "{f} is empty");
        assert!(rows.iter().all(|r| &r[3] == "true"), "{f} has failures");
        checks += rows.len();
    }
    assert_eq!(read_rows(&dir.path().join("summary.csv")).len(), checks);
    for f in ["plots/lambda.svg", "plots/compare.svg", "tables/profile.csv", "tables/compare.csv"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
}

#[test]
fn invalid_norm_exits_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[norm]\nkind = \"pnorm\"\np = 1.5\n\n[field]\nkind = \"preset\"\nname = \"ellipse\"\n").unwrap();
    let out = run(cfg.to_str().unwrap(), &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
    assert_eq!(run("preset:nope", dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn distance_cube_attains_equality() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("preset:esempio-remark", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = read_rows(&dir.path().join("polya_szego.csv"));
    let eq = rows.iter().find(|r| &r[0] == "polya_szego_equality_abs").expect("no equality row");
    let v: f64 = eq[1].parse().unwrap();
    assert!(v <= 0.02, "relative gap {v}");
    assert!(!dir.path().join("compare.csv").exists());
}

#[test]
fn output_is_deterministic_across_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.toml");
    std::fs::write(
        &cfg,
        "[norm]\nkind = \"ellipse\"\na = 2.0\nb = 1.0\n\n[field]\nkind = \"preset\"\nname = \"ellipse\"\n\n\
         [resolution]\nh = 0.0078125\n\n[suites]\nrun = [\"curvature\", \"symmetrize\", \"compare\"]\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for (d, extra) in [(&a, &[][..]), (&b, &[][..]), (&c, &["--parallel"][..])] {
        assert_eq!(run(cfg.to_str().unwrap(), d, extra).status.code(), Some(0));
    }
    for f in ["curvature.csv", "symmetrize.csv", "compare.csv", "summary.csv", "tables/compare.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs between runs");
        assert_eq!(x, std::fs::read(c.join(f)).unwrap(), "{f} differs with --parallel");
    }
}

#[test]
fn failing_check_gives_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("thin.toml");
    // four cells across: the quadrature forms disagree far beyond 2%
    std::fs::write(
        &cfg,
        "[norm]\nkind = \"pnorm\"\np = 3.0\n\n[field]\nkind = \"preset\"\nname = \"thin-rectangle\"\n\n\
         [resolution]\nh = 0.25\nn_levels = 8\n\n[suites]\nrun = [\"hessian-integrals\"]\n",
    )
    .unwrap();
    let out = run(cfg.to_str().unwrap(), &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = read_rows(&dir.path().join("out/summary.csv"));
    assert!(rows.iter().any(|r| &r[4] == "false"));
}

#[test]
fn presets_and_version() {
    let out = anisoperim(&["presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["euclidean-disk-quadratic", "esempio-remark", "ellipse-rotated", "pnorm-pentagon"] {
        assert!(text.contains(name));
    }
    let out = anisoperim(&["version"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("anisoperim "));
}
