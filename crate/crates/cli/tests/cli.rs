use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

use oneshot_info::mac::{adder_channel, induced_joint, mac_achievable_region};
use oneshot_info::probability::PmfFile;
use oneshot_info::slepian_wolf::{sw_achievable_region, sw_simulate, SimulationConfig};
use oneshot_info::{build_typical_set, smooth_hneginf, Caps, EpsilonBudget, JointPmf, Pmf};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oneshot-info")).args(args).output().unwrap()
}

fn json_of(args: &[&str]) -> Value {
    let out = cli(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn load(name: &str) -> JointPmf {
    let file: PmfFile = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
    file.to_joint().unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn entropy_of_uniform_four() {
    let v = json_of(&["entropy", "--pmf", &data("uniform4.json")]);
    assert_eq!(v, json!({ "shannon": 2.0, "h0": 2.0, "hinf": 2.0, "hneginf": 2.0 }));
}

#[test]
fn sw_region_equals_library_call() {
    let v = json_of(&["sw-region", "--pmf", &data("correlated_bits.json"), "--eps", "0.2", "--delta", "0"]);
    let joint = load("correlated_bits.json");
    let region = sw_achievable_region(&joint, &EpsilonBudget::equal(0.2).unwrap(), 0.0, &Caps::default()).unwrap();
    assert_eq!(v["region"], serde_json::to_value(&region).unwrap());
    let (lx, ly) = region.integer_lengths().unwrap();
    assert_eq!(v["integer_lengths"], json!([lx, ly]));
}

#[test]
fn sw_sim_equals_library_call() {
    let v = json_of(&[
        "sw-sim", "--pmf", &data("correlated_bits.json"), "--eps", "0.2", "--delta", "0", "--trials", "400", "--seed", "7",
        "--lengths", "2,2",
    ]);
    let cfg = SimulationConfig { trials: 400, master_seed: 7, exact: false, target_eps: 0.2 };
    let report = sw_simulate(&load("correlated_bits.json"), (2, 2), 0.0, &cfg, &Caps::default()).unwrap();
    assert_eq!(v["report"], serde_json::to_value(&report).unwrap());
}

#[test]
fn mac_region_equals_library_call() {
    let v = json_of(&[
        "mac-region", "--px", &data("uniform_bit_x.json"), "--py", &data("uniform_bit_y.json"), "--channel",
        &data("adder.json"), "--n", "4", "--eps", "0.2", "--eps-split", "0.02,0.06,0.06,0.06",
    ]);
    let caps = Caps::default();
    let p = Pmf::uniform(2).iid_extension(4, &caps).unwrap();
    let ch = adder_channel().iid_extension(4, &caps).unwrap();
    let joint3 = induced_joint(&p, &p.renamed("Y"), &ch).unwrap();
    let budget = EpsilonBudget::new(0.2, [0.02, 0.06, 0.06, 0.06]).unwrap();
    let region = mac_achievable_region(&joint3, &budget, 0.0, &caps).unwrap();
    assert_eq!(v["region"], serde_json::to_value(&region).unwrap());
}

#[test]
fn smooth_and_typical_equal_library_calls() {
    let joint = load("bern03.json");
    let v = json_of(&["smooth", "--pmf", &data("bern03.json"), "--order", "-inf", "--eps", "0.1"]);
    let r = smooth_hneginf(&joint, 0.1).unwrap();
    assert_eq!(v["value_bits"], json!(r.value_bits));
    assert_eq!(v["witness"], serde_json::to_value(r.witness.to_file(&Caps::default()).unwrap()).unwrap());

    let v = json_of(&["typical", "--pmf", &data("correlated_bits.json"), "--delta", "0.1"]);
    let set = build_typical_set(&load("correlated_bits.json"), 0.1, &Caps::default()).unwrap();
    assert_eq!(v, serde_json::to_value(set.to_export()).unwrap());
}

#[test]
fn csv_reports_have_matching_columns() {
    let out = cli(&["asym-scan", "--pmf", &data("bern03.json"), "--eps", "0.1", "--n-max", "5", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|l| l.split(',').count() == 4));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["hash-check", "--domain", "100", "--bits", "4", "--trials", "500", "--seed", "3"];
    let stdout = cli(&args).stdout;
    let mut with_out = args.to_vec();
    let path_str = path.display().to_string();
    with_out.extend(["--out", path_str.as_str()]);
    assert!(cli(&with_out).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn malformed_json_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"axes":[{"name":"X","symbols":["a","b"]}],"mass":[0.5,"half"]}"#, "mass[1]"),
        (r#"{"axes":[{"name":"X","symbol":["a","b"]}],"mass":[0.5,0.5]}"#, "axes[0]"),
        (r#"{"axes":[{"name":"X","symbols":["a","b"]}]}"#, "mass"),
        (r#"{"axes":[{"name":"X","symbols":["a","b"]}],"mass":[0.5,0.5],"extra":1}"#, "extra"),
        (r#"{"axes":[{"name":7,"symbols":["a"]}],"mass":[1.0]}"#, "axes[0].name"),
        (r#"{"axes":[{"name":"X","symbols":["a","b"]}],"mass":[0.5,0."#, "mass[1]"),
        (r#"{"axes":[{"name":"X","symbols":["a","a"]}],"mass":[0.5,0.5]}"#, "axes[0].symbols"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let path = write_temp(&dir, &format!("bad{i}.json"), body);
        let out = cli(&["entropy", "--pmf", &path]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "case {i}: {stderr}");
        assert!(stderr.contains(field), "case {i} should name {field}: {stderr}");
        assert_eq!(stderr.trim_end().lines().count(), 1, "case {i}: {stderr}");
    }
    let channel = write_temp(&dir, "channel.json", r#"{"inputs":[],"output":{"name":"Z","symbols":["0"]},"rows":[[1.0, true]]}"#);
    let out = cli(&["mac-region", "--px", &data("uniform_bit_x.json"), "--py", &data("uniform_bit_y.json"), "--channel", &channel, "--eps", "0.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rows[0][1]"));
}

#[test]
fn invalid_mass_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "short.json", r#"{"axes":[{"name":"X","symbols":["a","b"]}],"mass":[0.5,0.4]}"#);
    assert_eq!(cli(&["entropy", "--pmf", &path]).status.code(), Some(2));
    assert_eq!(cli(&["entropy", "--pmf", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn exit_codes_follow_error_class() {
    let pmf = data("correlated_bits.json");
    // Domain: radius outside [0, 1).
    assert_eq!(cli(&["smooth", "--pmf", &pmf, "--order", "0", "--eps", "1.5"]).status.code(), Some(2));
    // Domain: split larger than the total.
    let over = ["sw-region", "--pmf", &pmf, "--eps", "0.2", "--eps-split", "0.1,0.1,0.1,0.1"];
    assert_eq!(cli(&over).status.code(), Some(2));
    // Usage: stochastic command without a seed.
    assert_eq!(cli(&["sw-sim", "--pmf", &pmf, "--eps", "0.2", "--trials", "3"]).status.code(), Some(2));
    // Infeasible: no integer rates fit a single channel use.
    let mac = [
        "mac-sim", "--px", &data("uniform_bit_x.json"), "--py", &data("uniform_bit_y.json"), "--channel",
        &data("adder.json"), "--eps", "0.2", "--trials", "10", "--seed", "1",
    ];
    assert_eq!(cli(&mac).status.code(), Some(3));
    // Resource: the extension exceeds the enumeration cap.
    assert_eq!(cli(&["sw-region", "--pmf", &pmf, "--eps", "0.2", "--n", "12", "--cap", "1000"]).status.code(), Some(4));
    // Resource: the oracle is limited to a dozen cells.
    let dir = tempfile::tempdir().unwrap();
    let symbols: Vec<String> = (0..16).map(|i| format!("\"s{i}\"")).collect();
    let body = format!(r#"{{"axes":[{{"name":"X","symbols":[{}]}}],"mass":[{}]}}"#, symbols.join(","), vec!["0.0625"; 16].join(","));
    let wide = write_temp(&dir, "wide.json", &body);
    let oracle = ["smooth", "--pmf", &wide, "--order", "0", "--eps", "0.1", "--oracle"];
    assert_eq!(cli(&oracle).status.code(), Some(4));
}

#[test]
fn seeded_commands_repeat_exactly() {
    let pmf = data("correlated_bits.json");
    for args in [
        vec!["sw-sim", "--pmf", &pmf, "--n", "3", "--eps", "0.2", "--trials", "500", "--seed", "11"],
        vec!["hash-check", "--domain", "300", "--bits", "5", "--trials", "2000", "--seed", "11", "--format", "csv"],
    ] {
        let a = cli(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, cli(&args).stdout);
    }
}
