use std::process::{Command, Output};

fn varfilt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varfilt")).args(args).output().unwrap()
}

#[test]
fn sweep_twice_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = varfilt(&[
            "sweep",
            "--dims",
            "2",
            "--problems",
            "2",
            "--steps",
            "5",
            "--filters",
            "kf",
            "--seed",
            "1",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("2,kf,2,5,1,"));
}

#[test]
fn sweep_writes_svg_and_honours_correction_flags() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    let out = varfilt(&[
        "sweep",
        "--dims",
        "2,4",
        "--problems",
        "3",
        "--steps",
        "40",
        "--filters",
        "viep,vih,l2h",
        "--seed",
        "2",
        "--corr-x",
        "next",
        "--keep-rank",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = std::fs::read_to_string(&svg).unwrap();
    assert!(s.starts_with("<svg") && s.contains("l2h"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);
}

#[test]
fn trace_reproduces_divergence() {
    let out = varfilt(&["trace", "--filter", "viep", "--dim", "50", "--steps", "1000", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("step,wcse,mse"));
    assert_eq!(text.lines().count(), 1001);
    let last = text.lines().last().unwrap();
    let wcse: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(wcse > 10.0, "{wcse}");
}

#[test]
fn ellipse_output_has_four_methods() {
    let out = varfilt(&["ellipse", "--seed", "1", "--obs", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# seed=1 obs=3 level=0.9"));
    assert_eq!(lines.next(), Some("method,index,x,y"));
    let rows: Vec<(String, usize, f64, f64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4 * 256);
    for method in ["true", "ep", "elbo", "l2"] {
        let pts: Vec<_> = rows.iter().filter(|r| r.0 == method).collect();
        assert_eq!(pts.len(), 256);
        // points at φ = 0 and φ = π differ only along x for an axis-aligned ellipse
        let dy = (pts[0].3 - pts[128].3).abs();
        if method == "true" {
            assert!(dy > 1e-6);
        } else {
            assert!(dy < 1e-12);
        }
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["sweep", "--bogus"],
        vec!["sweep", "--dims", "2,,4"],
        vec!["sweep", "--dims", "two"],
        vec!["sweep", "--filters", "kf,nope"],
        vec!["sweep", "--dims", "2", "--out", "/nonexistent/dir/out.csv"],
        vec!["trace", "--out", "/nonexistent/dir/out.csv"],
        vec!["frobnicate"],
    ] {
        let out = varfilt(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_varfilt"))
        .args(["sweep", "--dims", "2", "--problems", "1", "--steps", "2"])
        .env("VARFILT_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
