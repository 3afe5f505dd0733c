use std::path::Path;
use std::process::{Command, Output};

fn pdmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmp"))
        .args(args)
        .env("PDMP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = pdmp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows after the comment block and header.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn header(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn col(csv: &str, name: &str) -> Vec<f64> {
    let k = header(csv).split(',').position(|c| c == name).unwrap();
    rows(csv).iter().map(|r| r[k].parse().unwrap()).collect()
}

const TWO_WELLS: &str = r#"
[model]
variant = "switching"
d = 1
rates = [0.0, 1.5, 1.5, 0.0]

[field0]
matrix = [-1.0]
offset = [1.0]

[field1]
matrix = [-1.0]
offset = [-1.0]

[compact]
lo = [-1.0]
hi = [1.0]

[simulate]
horizon = 20
x0 = 0.25
"#;

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "simulate", "--model", "tcp", "--x0", "0", "--horizon", "10", "--paths", "100", "--seed", "7", "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([p.display().to_string()])
        .collect::<Vec<_>>()
    };
    for p in [&a, &b] {
        let v = args(p);
        ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# seed=7 version="));
    assert_eq!(header(&text), "path_id,event_index,time,kind,coord_0");
    let r = rows(&text);
    let mut ids: Vec<&str> = r.iter().map(|r| r[0].as_str()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 100);
    assert!(r.iter().all(|r| ["init", "jump", "horizon"].contains(&r[3].as_str())));
    assert_eq!(r.iter().filter(|r| r[3] == "init").count(), 100);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["simulate", "--x0", "1", "--horizon", "5", "--paths", "40", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_pdmp")).args(args).env("PDMP_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_pdmp")).args(args).env("PDMP_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn switching_rows_carry_the_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two_wells.cfg");
    std::fs::write(&cfg, TWO_WELLS).unwrap();
    let out = ok(&["simulate", "--model", "switching", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(header(&out), "path_id,event_index,time,kind,coord_0,mode");
    assert!(out.contains("# horizon=20\n"));
    let r = rows(&out);
    assert!(r.len() > 3);
    for row in &r {
        let x: f64 = row[4].parse().unwrap();
        assert!((-1.0..=1.0).contains(&x));
        assert!(row[5] == "0" || row[5] == "1");
    }
    // flags win over the config
    let short = ok(&["simulate", "--config", cfg.to_str().unwrap(), "--horizon", "0.5", "--seed", "2"]);
    assert!(short.contains("# horizon=0.5\n"));
}

#[test]
fn tv_upper_equal_starts_is_zero() {
    let out = ok(&["distance", "--metric", "tv_upper", "--x", "1", "--y", "1", "--grid", "1:5", "--pairs", "200"]);
    assert_eq!(header(&out), "t,estimate,stderr,n,lower_bound");
    assert!(col(&out, "estimate").iter().all(|&v| v == 0.0));
    assert_eq!(col(&out, "n"), vec![200.0; 5]);
    assert!(out.contains("# fit unavailable"));
}

#[test]
fn tv_upper_sits_above_lower_bound() {
    let out = ok(&[
        "distance", "--metric", "tv_upper", "--x", "1", "--y", "2", "--grid", "0.5:3:0.5", "--pairs", "2000",
        "--epsilon", "0.5", "--seed", "4",
    ]);
    for (u, l) in col(&out, "estimate").iter().zip(col(&out, "lower_bound")) {
        assert!(*u + 1e-12 >= l);
    }
}

#[test]
fn w1_of_identical_samples_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f1.csv");
    std::fs::write(&f, "x\n0.3\n1.7\n2.2\n0.9\n").unwrap();
    let p = f.to_str().unwrap();
    let out = ok(&["distance", "--metric", "w1", "--a-samples", p, "--b-samples", p]);
    assert_eq!(col(&out, "estimate"), vec![0.0]);
}

#[test]
fn w_half_contracts() {
    let dir = tempfile::tempdir().unwrap();
    let fit = dir.path().join("fit.csv");
    let out = ok(&[
        "distance", "--metric", "w_half", "--x", "3", "--y", "1", "--grid", "1:10", "--pairs", "100000", "--seed", "1",
        "--fit-out", fit.to_str().unwrap(),
    ]);
    let est = col(&out, "estimate");
    let se = col(&out, "stderr");
    assert_eq!(est.len(), 10);
    for k in 1..est.len() {
        assert!(est[k] <= est[k - 1] + 3.0 * (se[k].powi(2) + se[k - 1].powi(2)).sqrt());
    }
    let fit = std::fs::read_to_string(&fit).unwrap();
    assert_eq!(header(&fit), "rate,intercept,t_min,t_max,residual_rms");
    assert!(col(&fit, "rate")[0] > 0.0);
    assert!(out.contains("# fit rate="));
}

#[test]
fn kernels_sum_to_one() {
    let out = ok(&["kernels", "--model", "tcp", "--xs", "0:4:1"]);
    assert_eq!(header(&out), "x,H_mass,J_mass,deviation");
    let h = col(&out, "H_mass");
    let j = col(&out, "J_mass");
    for k in 0..h.len() {
        assert!((h[k] + j[k] - 1.0).abs() < 1e-6);
    }
    assert!(col(&out, "deviation").iter().all(|d| *d < 1e-6));
    let c = ok(&["kernels", "--model", "tcp-constant", "--r", "2", "--xs", "1"]);
    assert!((col(&c, "H_mass")[0] - 1.0 / 3.0).abs() < 1e-8);
}

#[test]
fn chain_export_round_trips_through_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("chain.csv");
    let out = ok(&["chain", "--jumps", "20000", "--seed", "5", "--out", chain.to_str().unwrap()]);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&chain).unwrap();
    assert_eq!(header(&text), "n,Z,S");
    let z = col(&text, "Z");
    let s = col(&text, "S");
    for k in 1..z.len() {
        assert!((z[k] - 0.5 * (z[k - 1] + s[k])).abs() < 1e-12);
    }
    let from_file = ok(&["estimate", "--chain", chain.to_str().unwrap(), "--x", "1", "--grid", "0.2:1:0.2", "--blocks", "4"]);
    assert_eq!(header(&from_file), "t,f_hat");
    assert!(from_file.contains("# n_used="));
    let with_truth = ok(&[
        "estimate", "--model", "tcp", "--chain", chain.to_str().unwrap(), "--x", "1", "--grid", "0.2:1:0.2", "--blocks", "4",
    ]);
    assert_eq!(header(&with_truth), "t,f_hat,f_true");
    let obs = ok(&["chain", "--kind", "observation", "--jumps", "50", "--seed", "5"]);
    assert_eq!(header(&obs), "n,Z,S,origin");
}

#[test]
fn estimate_against_exact_density() {
    let args = [
        "estimate", "--model", "tcp", "--jumps", "200000", "--x", "0.5", "--blocks", "8", "--bandwidth", "0.1", "--grid",
        "0.2:1.5:0.01", "--seed", "3",
    ];
    let out = ok(&args);
    assert_eq!(header(&out), "t,f_hat,f_true");
    let f_hat = col(&out, "f_hat");
    let f_true = col(&out, "f_true");
    assert_eq!(f_true.len(), 131);
    for (t, f) in col(&out, "t").iter().zip(&f_true) {
        assert!((f - (0.5 + t) * (-(0.5 * t + 0.5 * t * t)).exp()).abs() < 1e-12);
    }
    let sup = f_hat.iter().zip(&f_true).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(sup < 0.1, "sup error {sup}");
    assert_eq!(out, ok(&args));
}

#[test]
fn exit_codes() {
    let few = pdmp(&["estimate", "--model", "tcp", "--jumps", "10", "--x", "0.5", "--grid", "0.2:1.5:0.01"]);
    assert_eq!(few.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&few.stderr).contains("insufficient data"));

    assert_eq!(pdmp(&["simulate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(pdmp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pdmp(&["distance", "--metric", "w1", "--x", "1", "--y", "2", "--grid", "3:1"]).status.code(), Some(1));
    assert_eq!(pdmp(&["simulate", "--model", "tcp-constant"]).status.code(), Some(1));
    assert_eq!(pdmp(&["simulate", "--model", "switching"]).status.code(), Some(1));
    assert_eq!(pdmp(&["simulate", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));
    assert_eq!(pdmp(&["kernels", "--model", "tcp-constant", "--r=-1"]).status.code(), Some(2));
    assert_eq!(pdmp(&["--help"]).status.code(), Some(0));

    let bad_threads = Command::new(env!("CARGO_BIN_EXE_pdmp"))
        .args(["simulate"])
        .env("PDMP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(1));
}
