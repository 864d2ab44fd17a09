use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nemext(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nemext"));
    c.args(args).env_remove("NEMEXT_OUT_DIR");
    if let Some(p) = env_out {
        c.env("NEMEXT_OUT_DIR", p);
    }
    c.output().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn limit0_reports_defects_per_polygon() {
    let tmp = tempfile::tempdir().unwrap();
    for (k, g, points, lines) in [("3", "0", 1, 0), ("4", "0", 0, 0), ("4", "0.7853981633974483", 0, 2), ("6", "0", 2, 0)] {
        let out = tmp.path().join(format!("k{k}g{g}"));
        let o = nemext(
            &["limit0", "--K", k, "--gamma-star", g, "--n-r", "8", "--n-theta", "16", "--out", out.to_str().unwrap()],
            None,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let d = rows(&out.join("defects.csv"));
        assert_eq!(d.iter().filter(|r| r[0] == "point").count(), points, "K={k} γ*={g}");
        let curves: std::collections::BTreeSet<&str> =
            d.iter().filter(|r| r[0] == "line").map(|r| r[1].as_str()).collect();
        assert_eq!(curves.len(), lines);
        assert_eq!(rows(&out.join("mapped.csv")).len(), 8 * 16);
        assert_eq!(rows(&out.join("physical.csv")).len(), 8 * 16);
    }
}

#[test]
fn limitinf_writes_a_manifest_and_one_field_per_class() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nemext(
        &["limitinf", "--K", "6", "--gamma-star", "0.5235987755982988", "--n-r", "4", "--n-theta", "12"],
        Some(tmp.path()),
    );
    assert!(o.status.success());
    let m = rows(&tmp.path().join("manifest.csv"));
    assert_eq!(m.len(), 6);
    for r in &m {
        assert_eq!(r.len(), 5 + 6);
        assert!(tmp.path().join(format!("pinf_{}.csv", r[0])).exists());
    }
    let sizes: usize = m.iter().map(|r| r[4].parse::<usize>().unwrap()).sum();
    assert_eq!(sizes, 15);
}

#[test]
fn out_flag_beats_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let (flag, env) = (tmp.path().join("flag"), tmp.path().join("env"));
    let o = nemext(
        &["limitinf", "--K", "4", "--n-r", "2", "--n-theta", "8", "--out", flag.to_str().unwrap()],
        Some(&env),
    );
    assert!(o.status.success());
    assert!(flag.join("manifest.csv").exists() && !env.exists());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(nemext(&["--help"], None).status.code(), Some(0));
    assert_eq!(nemext(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(nemext(&["sweep", "--K", "2", "--out", out], None).status.code(), Some(1));
    assert_eq!(nemext(&["sweep", "--K", "4", "--sigma", "0.9", "--out", out], None).status.code(), Some(1));
    assert_eq!(nemext(&["sweep", "--K", "4", "--branches", "Q7", "--out", out], None).status.code(), Some(1));
    assert_eq!(nemext(&["limitinf", "--K", "disc", "--out", out], None).status.code(), Some(1));
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "K = [").unwrap();
    assert_eq!(nemext(&["solve", "--config", cfg.to_str().unwrap(), "--out", out], None).status.code(), Some(1));
}

#[test]
fn solve_and_sweep_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "K = 4\ngamma_star = 0.0\nn_r = 16\nn_theta = 32\nlambda_bar_sq = 2.0\nschedule = \"0.5:8:3\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    let a = tmp.path().join("solve");
    let o = nemext(&["solve", "--config", c, "--out", a.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = rows(&a.join("summary.csv"));
    assert_eq!((s.len(), s[0][0].as_str()), (1, "unique"));
    assert!(s[0][3].parse::<f64>().unwrap() > 0.0);
    assert_eq!(rows(&a.join("field_unique.csv")).len(), 16 * 32);

    let b = tmp.path().join("sweep");
    let o = nemext(&["sweep", "--config", c, "--branches", "unique,D1", "--out", b.to_str().unwrap()], None);
    assert!(o.status.success());
    let t = rows(&b.join("bifurcation.csv"));
    assert_eq!(t.len(), 6);
    assert!(t.iter().all(|r| r.len() == 13 && r[8] == "converged" && r[9] == "1"));
    assert!(!b.join("branch_R.csv").exists());
    let header = fs::read_to_string(b.join("branch_D1.csv")).unwrap();
    assert!(header.starts_with("# nemext ") && header.lines().nth(1).unwrap().starts_with("branch,lambda_bar_sq,energy,mu_min,m11,m12"));
}
