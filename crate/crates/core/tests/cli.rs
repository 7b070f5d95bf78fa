use std::process::{Command, Output};

fn tdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn pmf_geometric_rows() {
    let o = tdl(&["pmf", "--law", "tdl", "-a", "1", "-b", "1", "-c", "0.5", "-d", "1", "--kmax", "5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,p,cumulative");
    assert_eq!(lines.len(), 8);
    for (k, line) in lines[1..7].iter().enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0], k.to_string());
        let p: f64 = cols[1].parse().unwrap();
        assert!((p - 2.0 / 3.0 * 3f64.powi(-(k as i32))).abs() < 1e-15);
    }
    assert!(lines[7].starts_with("tail_mass,"));
}

#[test]
fn pmf_point_mass_single_row() {
    let o = tdl(&["pmf", "--law", "tdl", "-a", "0", "-b", "1", "-c", "0.5", "-d", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "k,p,cumulative\n0,1,1\ntail_mass,0\n");
}

#[test]
fn pmf_invalid_region_exits_2() {
    let o = tdl(&["pmf", "--law", "tdl", "-a", "-1", "-b", "1", "-c", "1", "-d", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain"));
}

#[test]
fn pmf_json_field_names() {
    let o = tdl(&["pmf", "-a", "0.5", "-b", "1", "-c", "0.5", "-d", "1", "--kmax", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["law", "kmax", "p", "tail_mass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--law", "tdl", "-a", "0.5", "-b", "1", "-c", "0.5", "-d", "1", "-n", "10", "--seed", "42"];
    let a = stdout(&tdl(&args));
    let b = stdout(&tdl(&args));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 10);
    assert!(a.lines().all(|l| l.parse::<u64>().is_ok()));
}

#[test]
fn sample_route_c_and_incompatible_route() {
    let o = tdl(&["sample", "--law", "tdl", "-a", "-1", "-b", "1", "-c", "0.5", "-d", "1", "-n", "20", "--seed", "3", "--route", "c"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 20);
    let o = tdl(&["sample", "--law", "tdl", "-a", "-1", "-b", "1", "-c", "0.5", "-d", "1", "-n", "2", "--seed", "3", "--route", "d"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_positive_stable_reals() {
    let o = tdl(&["sample", "--law", "ps", "--gamma", "0.5", "--lambda", "1", "-n", "5", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let xs: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(xs.len(), 5);
    assert!(xs.iter().all(|&x| x > 0.0));
}

#[test]
fn sample_without_seed_echoes_it() {
    let o = tdl(&["sample", "--law", "poisson", "--lambda", "2", "-n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("seed: "));
}

#[test]
fn sample_rejection_budget_exits_4() {
    let o = tdl(&["sample", "--law", "tps", "--gamma", "0.5", "--lambda", "1e14", "--theta", "1", "-n", "1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn moments_examples() {
    let o = tdl(&["moments", "-a", "1", "-b", "1", "-c", "0.5", "-d", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mu"].as_f64().unwrap(), 0.5);
    for key in ["mu", "sigma2", "D", "m3", "m4", "alpha3", "alpha4"] {
        assert!(v.get(key).is_some(), "{key}");
    }

    let o = tdl(&["moments", "-a", "0.5", "-b", "1", "-c", "0.5", "-d", "0", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mu,sigma2,D,m3,m4,alpha3,alpha4");
    let d: f64 = lines.next().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((d - 1.5).abs() < 1e-15);

    let o = tdl(&["moments", "-a", "0", "-b", "1", "-c", "0.5", "-d", "1"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn figure_presets_and_single_point() {
    let o = tdl(&["figure", "--preset", "1", "--grid", "4x5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# a=0.25, b=1, c in [0.3,0.7], d in [-1,3] clipped to d in [0,3]"));
    assert_eq!(text.lines().count(), 2 + 20);
    assert!(String::from_utf8_lossy(&o.stderr).contains("clipped"));

    let o = tdl(&["figure", "--preset", "4", "--grid", "3x3"]);
    assert!(stdout(&o).starts_with("# a=-1, b=1, c in [0.1,0.9], d in [0,3]\n"));

    let o = tdl(&["figure", "-a", "0.5", "-b", "1", "--c-range", "0.4,0.4", "--d-range", "2,2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let o = tdl(&["moments", "-a", "0.5", "-b", "1", "-c", "0.4", "-d", "2"]);
    let m: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows[0]["alpha3"], m["alpha3"]);
    assert_eq!(rows[0]["alpha4"], m["alpha4"]);

    let o = tdl(&["figure", "-a", "0.5", "-b", "1", "--c-range", "0.4,0.6", "--d-range", "-1,3", "--grid", "2x5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn figure_svg_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.svg");
    let o = tdl(&["figure", "--preset", "2", "--grid", "10x10", "--format", "svg", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("<polygon"));
}

#[test]
fn check_passes_and_is_deterministic() {
    let a = tdl(&["check", "--grid", "small", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let b = tdl(&["check", "--grid", "small", "--seed", "42"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("FAIL"));
}

#[test]
fn check_detects_coefficient_fault() {
    let o = tdl(&["check", "--inject-coeff-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("finite-sum-vs-oracle,FAIL"));
}

#[test]
fn unknown_law_for_pmf_exits_2() {
    let o = tdl(&["pmf", "--law", "ps", "--gamma", "0.5", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
