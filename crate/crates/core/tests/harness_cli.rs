use std::path::Path;
use std::process::Command;

use condcop::harness::{
    emit_csv, load_config, rate_scan, read_replications, run_replications, ExperimentConfig, MarginSource,
    ReplicationMode,
};
use condcop::Error;

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        n_grid: vec![80, 160],
        replications: 12,
        ..ExperimentConfig::desk()
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condcop"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let cfg = small_config();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_replications(&cfg, 120, ReplicationMode::Full).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one.len(), cfg.replications);
    for (i, r) in one.iter().enumerate() {
        assert_eq!(r.rep_index, i);
        assert!((0.0..=1.0).contains(&r.c_hat) && (0.0..=1.0).contains(&r.c_oracle));
    }
}

#[test]
fn records_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("replications.csv");
    let mut records = run_replications(&small_config(), 80, ReplicationMode::Full).unwrap();
    records[0].c_hat = 0.1 + 0.2;
    records[1].sup_margin_error = None;
    records[2].failed = true;
    emit_csv(&records, &path).unwrap();
    let back = read_replications(&path).unwrap();
    assert_eq!(back.len(), records.len());
    for (a, b) in records.iter().zip(&back) {
        assert_eq!(a, b);
        assert_eq!(a.c_hat.to_bits(), b.c_hat.to_bits());
        assert_eq!(a.c_oracle.to_bits(), b.c_oracle.to_bits());
    }
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("n,rep_index,seed,c_hat,c_oracle,degenerate_count,sup_margin_error,failed\n"));
}

#[test]
fn emit_to_unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert!(emit_csv(&[], path).is_err());
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("rho1x = 0.4\nrho2x = -0.2\n", "rho12"),
        ("rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3\ngamma = 0.7\n", "gamma"),
        (
            "rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3\nreplications = 0\n",
            "replications",
        ),
        (
            "rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3\nbandwidth = { c = -1.0, exponent = -0.2 }\n",
            "bandwidth",
        ),
        ("rho1x = 0.9\nrho2x = -0.9\nrho12 = 0.9\n", "rho12"),
        ("rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3\nseeds = 4\n", "seeds"),
        ("rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3\nu = [0.5, 1.0]\n", "u"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let path = write(dir.path(), &format!("c{i}.toml"), body);
        match load_config(&path) {
            Err(Error::Config { field: f, .. }) => assert_eq!(&f, field, "case {i}"),
            other => panic!("case {i}: expected config error, got {other:?}"),
        }
    }
    let ok = write(
        dir.path(),
        "ok.toml",
        "rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3689989\nmaster_seed = 5\n",
    );
    let cfg = load_config(ok).unwrap();
    assert_eq!(cfg.master_seed, 5);
    assert_eq!(cfg.n_grid, ExperimentConfig::desk().n_grid);
}

#[test]
fn rate_scan_shape() {
    let cfg = ExperimentConfig {
        n_grid: vec![100, 200, 400],
        replications: 3,
        ..ExperimentConfig::desk()
    };
    let rows = rate_scan(&cfg, MarginSource::LocalLinear).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.median_sup_cdf > 0.0 && r.failed == 0));
    let bad = ExperimentConfig {
        n_grid: vec![400, 100],
        ..cfg
    };
    assert!(rate_scan(&bad, MarginSource::Oracle).is_err());
}

#[test]
fn cli_sigma() {
    let out = bin()
        .args(["sigma", "--u1", "0.5", "--u2", "0.7", "--rho", "0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.207960");
    let out = bin()
        .args(["sigma", "--u1", "1.5", "--u2", "0.7", "--rho", "0.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn cli_simulate_and_diagnose_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.toml",
        "rho1x = 0.4\nrho2x = -0.2\nrho12 = 0.3689989\nn_grid = [60, 120]\nreplications = 200\n",
    );
    let out = dir.path().join("sim");
    let status = bin()
        .args(["simulate", "--seed", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("CONDCOP_THREADS", "2")
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    for f in [
        "replications.csv",
        "proximity.csv",
        "normality.csv",
        "qq_60.csv",
        "qq_120.csv",
        "hist_120.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let prox = std::fs::read_to_string(out.join("proximity.csv")).unwrap();
    assert_eq!(prox.lines().next(), Some("n,corr,gap"));
    assert_eq!(prox.lines().count(), 3);
    let norm = std::fs::read_to_string(out.join("normality.csv")).unwrap();
    assert_eq!(norm.lines().next(), Some("n,sd,ks"));
    let recs = read_replications(out.join("replications.csv")).unwrap();
    assert_eq!(recs.len(), 400);

    let diag = dir.path().join("diag");
    let status = bin()
        .arg("diagnose")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&diag)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let mono = std::fs::read_to_string(diag.join("monotonicity.csv")).unwrap();
    assert_eq!(mono.lines().next(), Some("x,min_density,violation_flag"));
    assert_eq!(
        std::fs::read_to_string(diag.join("rates.csv")).unwrap().lines().count(),
        3
    );
}

#[test]
fn cli_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let s = condcop::GaussianCopulaSpec::reference().sample(300, 8);
    let mut body = String::from("x,y1,y2\n");
    let mut two = String::from("x,y\n");
    for i in 0..s.len() {
        body.push_str(&format!("{},{},{}\n", s.x[i], s.y1[i], s.y2[i]));
        two.push_str(&format!("{},{}\n", s.x[i], s.y1[i]));
    }
    let data = write(dir.path(), "tri.csv", &body);
    let out = dir.path().join("pseudo.csv");
    let res = bin()
        .arg("estimate")
        .arg("--data")
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let c: f64 = String::from_utf8(res.stdout).unwrap().trim().parse().unwrap();
    assert!((0.0..=1.0).contains(&c));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("v1,v2,provenance"));
    assert_eq!(text.lines().count(), 301);

    let data = write(dir.path(), "two.csv", &two);
    let out = dir.path().join("cdf.csv");
    let res = bin()
        .args(["estimate", "--h1", "0.9", "--h2", "0.1", "--data"])
        .arg(&data)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("half the range"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().next(), Some("x,y,cdf"));

    let bad = write(dir.path(), "bad.csv", "x,y\n0.1,abc\n");
    assert!(!bin()
        .arg("estimate")
        .arg("--data")
        .arg(bad)
        .output()
        .unwrap()
        .status
        .success());
}
