use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn toral(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toral"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Header and data rows of a CSV output, after checking the comment line.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let (comment, body) = text.split_once('\n').unwrap();
    assert!(comment.starts_with("# config_sha256="));
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    table(path).1
}

fn header(path: &Path) -> Vec<String> {
    table(path).0
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let i = header(path).iter().position(|h| h == name).unwrap();
    rows(path).into_iter().map(|r| r[i].clone()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_table() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", "cutoff = 100.0\n");
    let out = tmp.path().join("out");
    let o = toral("spectrum", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("spectrum.csv"));
    assert_eq!(r.len(), 317);
    let mut distinct: Vec<&str> = r.iter().map(|row| row[0].as_str()).collect();
    distinct.dedup();
    assert_eq!(distinct.len(), 44);

    let cfg = write_config(tmp.path(), "z.toml", "cutoff = 0.0\n");
    let o = toral("spectrum", &cfg, &out, &[]);
    assert!(o.status.success());
    let r = rows(&out.join("spectrum.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][4], "1");
}

#[test]
fn validation_errors_write_nothing() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        "cutoff = 10.0\naspect = [2, 4]\n",
        "cutoff = 10.0\nunknown = 1\n",
        "cutoff = 1e3\n[goodset]\ndelta = 0.3\n",
        "cutoff = 20.0\n[potential]\nkind = \"rdm\"\nn = 64\nr1 = 0.4\n",
        "cutoff = 20.0\n[potential]\nkind = \"trig\"\ncoefficients = [{ m = 1, n = 0, re = 0.1 }]\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write_config(tmp.path(), &format!("bad{i}.toml"), text);
        for sub in ["spectrum", "goodset", "equidist"] {
            let out = tmp.path().join(format!("out{i}{sub}"));
            let o = toral(sub, &cfg, &out, &[]);
            if i == 0 || i == 1 || (i == 2 && sub != "spectrum") || (i >= 3 && sub == "equidist") {
                assert_eq!(o.status.code(), Some(2), "case {i} {sub}: {}", String::from_utf8_lossy(&o.stderr));
                assert!(!out.exists(), "case {i} {sub} created output");
            }
        }
    }
    let cfg = write_config(tmp.path(), "delta.toml", "cutoff = 1e3\n[goodset]\ndelta = 0.3\n");
    let o = toral("goodset", &cfg, &tmp.path().join("delta"), &[]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta/2"));
}

#[test]
fn goodset_summary_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "g.toml", "cutoff = 1e4\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(toral("goodset", &cfg, &a, &[]).status.success());
    assert!(toral("goodset", &cfg, &b, &["--threads", "1"]).status.success());
    assert_eq!(
        fs::read(a.join("goodset.csv")).unwrap(),
        fs::read(b.join("goodset.csv")).unwrap()
    );
    let s = json(&a.join("goodset_summary.json"));
    let summary = &s["summary"];
    for key in ["q1_density", "q2_density", "qprime_density", "certified_density"] {
        assert!(summary[key].is_number(), "{key}");
    }
    let curve: Vec<f64> = summary["complement_curve"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["density"].as_f64().unwrap())
        .collect();
    assert!(curve.len() >= 3);
    assert!(curve[1..].windows(2).all(|w| w[1] <= w[0]), "{curve:?}");
    assert_eq!(s["seed"], serde_json::Value::Null);
    assert!(fs::read_to_string(a.join("goodset.csv")).unwrap().starts_with("# config_sha256="));
}

#[test]
fn free_equidist_is_exact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "free.toml",
        "cutoff = 60.0\n[potential]\nkind = \"trig\"\ncoefficients = []\n[observables]\ncos = [[1, 0], [2, 1]]\nsin = [[0, 1]]\n",
    );
    let out = tmp.path().join("out");
    let o = toral("equidist", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = column(&out.join("equidist.csv"), "discrepancy");
    assert!(!d.is_empty());
    assert!(d.iter().all(|x| x.parse::<f64>().unwrap() == 0.0));
    assert_eq!(header(&out.join("eigenpairs.csv"))[6], "tail_mass_delta0.3");
}

#[test]
fn weak_coupling_fourier_bound() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cos.toml",
        "cutoff = 120.0\n[potential]\nkind = \"trig\"\ncoefficients = [{ m = 1, n = 0, re = 0.2 }, { m = -1, n = 0, re = 0.2 }]\n",
    );
    let out = tmp.path().join("out");
    assert!(toral("equidist", &cfg, &out, &[]).status.success());
    let s = json(&out.join("equidist_summary.json"));
    let checked = s["fourier_bound_checked"].as_u64().unwrap();
    assert!(checked > 0);
    assert_eq!(s["fourier_bound_passed"].as_u64().unwrap(), checked);
}

#[test]
fn rdm_runs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "rdm.toml",
        "cutoff = 50.0\n[potential]\nkind = \"rdm\"\nn = 256\nr1 = 0.4\n[window]\nenergy = 5.0\n",
    );
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    let runs = [["--threads", "1"], ["--threads", "2"], ["--threads", "0"]];
    for (d, t) in dirs.iter().zip(runs) {
        let o = toral("equidist", &cfg, d, &[&["--seed", "41"][..], &t[..]].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["eigenpairs.csv", "equidist.csv", "potential.json", "positions.csv", "equidist_summary.json"] {
        let first = fs::read(dirs[0].join(name)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(first, fs::read(d.join(name)).unwrap(), "{name}");
        }
    }
    let other = tmp.path().join("other");
    assert!(toral("equidist", &cfg, &other, &["--seed", "42"]).status.success());
    assert_ne!(
        fs::read(dirs[0].join("positions.csv")).unwrap(),
        fs::read(other.join("positions.csv")).unwrap()
    );
    let first_line = fs::read_to_string(dirs[0].join("equidist.csv")).unwrap();
    assert!(first_line.lines().next().unwrap().ends_with("seed=41"));
}

#[test]
fn solve_dumps_eigenvectors() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sc.toml",
        "cutoff = 30.0\nseed = 5\n[potential]\nkind = \"scatterer\"\nlayout = \"distorted\"\nn = 16\nr0 = 0.2\namplitude = 0.5\n",
    );
    let out = tmp.path().join("out");
    let o = toral("solve", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let basis = rows(&out.join("basis.csv"));
    let bytes = fs::read(out.join("eigenvectors.bin")).unwrap();
    let count = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let dim = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    assert_eq!(dim, basis.len());
    assert_eq!(count, dim);
    assert_eq!(bytes.len(), 16 + 16 * count * dim);
    let pairs = rows(&out.join("eigenpairs.csv"));
    assert_eq!(pairs.len(), count);
    let doc = json(&out.join("potential.json"));
    assert_eq!(doc["kind"], "scatterer");
    assert!(doc["coefficients"].as_array().unwrap().len() > 1);
    assert_eq!(rows(&out.join("positions.csv")).len(), 16);
}

#[test]
fn disorder_sweeps() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "n.toml",
        "cutoff = 1.0\nseed = 3\n[potential]\nkind = \"rdm\"\nn = 64\nr1 = 0.45\n[disorder]\nn_values = [64, 256, 1024]\n",
    );
    let out = tmp.path().join("n");
    let o = toral("disorder", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let norms: Vec<f64> = column(&out.join("disorder.csv"), "v_l2_norm")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(norms.len(), 3);
    let (lo, hi) = norms.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi <= 4.0 * lo, "{norms:?}");

    let cfg = write_config(
        tmp.path(),
        "l.toml",
        "cutoff = 1.0\nseed = 3\n[potential]\nkind = \"strong_disorder\"\nalpha = 0.01\nlength = 1\nn = 64\nr1 = 0.3\n[window]\nenergy = 1e12\n[disorder]\nlengths = [1, 2, 4]\n",
    );
    let out = tmp.path().join("l");
    assert!(toral("disorder", &cfg, &out, &[]).status.success());
    let sat = column(&out.join("disorder.csv"), "equi_satisfied");
    assert_eq!(sat.len(), 3);
    assert!(sat.iter().all(|s| s == "true" || s == "false"));

    let mut pos = String::from("j,omega_x,omega_y\n");
    for j in 0..64 {
        pos.push_str(&format!("{j},{},{}\n", 0.5 + 1e-3 * (j % 8) as f64, 0.5 + 1e-3 * (j / 8) as f64));
    }
    fs::write(tmp.path().join("cluster.csv"), pos).unwrap();
    let cfg = write_config(
        tmp.path(),
        "adv.toml",
        "cutoff = 1.0\n[potential]\nkind = \"scatterer\"\nlayout = \"file\"\nfile = \"cluster.csv\"\n[disorder]\nradii = [1.0]\n",
    );
    let out = tmp.path().join("adv");
    let o = toral("disorder", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(column(&out.join("disorder.csv"), "weak_disorder_pass"), ["false"]);
}

#[test]
fn locbound_document() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "loc.toml",
        "cutoff = 1.0\n[rate]\ntheta = \"1/4\"\nepsilon = \"0\"\n[locbound]\nalpha = 1.0\nenergy = 1e6\nrho = 1.0\nv_norm = 1.0\n",
    );
    let out = tmp.path().join("out");
    assert!(toral("locbound", &cfg, &out, &[]).status.success());
    let doc = json(&out.join("locbound.json"));
    let bound = doc["bound"].as_f64().unwrap();
    assert!((bound - 1e6f64.powf(1.0 / 22.0)).abs() < 1e-12 * bound);
    assert_eq!(doc["theta"], "1/4");

    let cfg = write_config(
        tmp.path(),
        "zero.toml",
        "cutoff = 1.0\n[locbound]\nalpha = 0.0\nenergy = 1e6\nrho = 1.0\nv_norm = 1.0\n",
    );
    let out = tmp.path().join("zero");
    assert_eq!(toral("locbound", &cfg, &out, &[]).status.code(), Some(2));
    assert!(!out.exists());
}
