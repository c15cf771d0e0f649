use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fanocalc_core::{Certificate, ClaimsReport, Report};
use serde_json::Value;

const EXAMPLE: &str = "[[1,2],[1,2],[2,5],[3,7],[4,9]]";

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn fanocalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fanocalc"))
        .args(args)
        .env_remove("FANOCALC_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const CASE0: &str = r#"{"id":"case0","theorem":"case0","hypotheses":{"kind":"bounds","k3_lower":"47/840","r_x":{"exact":840},"r_max":[8,8]},"m0":8,"nu0":1,"plan":{"dichotomy":{"probe":{"k":12,"l":"1","t":"9/2"},"same_pencil":{"m1":{"np2":{"t":"27/2","variant":2}},"n0":"lemma","criterion":{"usage":1},"claimed":48},"different_pencil":{"criterion":{"thm_bc":3},"claimed":36}}}}"#;

#[test]
fn pg_prints_the_plain_value() {
    let o = fanocalc(&["pg", "--basket", EXAMPLE, "--p1", "0", "--m", "22"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "260\n");
}

#[test]
fn info_reports_exact_strings() {
    let o = fanocalc(&["info", "--basket", EXAMPLE, "--p1", "0"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["k3"], "43/315");
    assert_eq!(v["sigma"], "11");
    assert_eq!(v["r_X"], "630");
    assert_eq!(v["r_max"], "9");
}

#[test]
fn basket_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    std::fs::write(&path, EXAMPLE).unwrap();
    let arg = format!("@{}", path.display());
    let o = fanocalc(&["pg", "--basket", &arg, "--m", "22"]);
    assert_eq!(stdout(&o), "260\n");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(
        code(&fanocalc(&["pg", "--basket", "[[2,4]]", "--p1", "0", "--m", "1"])),
        1
    );
    assert_eq!(code(&fanocalc(&["frobnicate"])), 1);
    assert_eq!(code(&fanocalc(&["pg", "--basket", EXAMPLE])), 1);
    assert_eq!(code(&fanocalc(&["pg", "--basket", "[[1,2]", "--m", "2"])), 1);
    assert_eq!(code(&fanocalc(&["pg", "--basket", "@/no/such/file", "--m", "2"])), 1);
    assert_eq!(code(&fanocalc(&["replay", "--setting", "fano"])), 1);
    assert_eq!(code(&fanocalc(&["pg", "--basket", EXAMPLE, "--m", "0"])), 1);
    assert_eq!(code(&fanocalc(&["--help"])), 0);
    assert_eq!(code(&fanocalc(&["--version"])), 0);
}

#[test]
fn replay_bundled_ledger() {
    let o = fanocalc(&["replay"]);
    assert_eq!(code(&o), 0);
    let r: Report = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.global_bound, 59);
    assert!(r.ok);
    // round trip reproduces the same bytes
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", stdout(&o));

    let o = fanocalc(&["replay", "--setting", "qfano", "--jobs", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["global_bound"], 58);
}

#[test]
fn replay_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (p, jobs) in [(&a, "1"), (&b, "4")] {
        let o = fanocalc(&["replay", "--jobs", jobs, "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn replay_with_an_overstated_claim_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.json");
    std::fs::write(
        &path,
        format!("[{}]", CASE0.replace(r#""claimed":48"#, r#""claimed":47"#)),
    )
    .unwrap();
    let o = fanocalc(&["replay", "--ledger", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("verification failed"));
}

#[test]
fn certify_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, CASE0).unwrap();
    let o = fanocalc(&["certify", "--scenario", &format!("@{}", path.display())]);
    assert_eq!(code(&o), 0);
    let c: Certificate = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c.certified_bound, 48);
    let v = json(&o);
    let term = &v["branches"][0]["evaluations"][0]["terms"][2];
    assert!(term["expr"].as_str().unwrap().contains("sqrt"), "{term}");
    assert!(term["inner_approx"].as_str().unwrap().starts_with("48."));

    let bad = CASE0.replace(r#""same_pencil":"#, r#""unused":"#);
    assert_eq!(code(&fanocalc(&["certify", "--scenario", &bad])), 1);
}

#[test]
fn enumerate_and_descendants() {
    let c = r#"{"gamma_nonneg":true,"sigma_min":11,"require_index":[2],"r_max_range":[14,14]}"#;
    let o = fanocalc(&["enumerate", "--constraints", c]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["k3"], "3/14");
    assert_eq!(v[0]["r_X"], "14");

    let c = r#"{"gamma_nonneg":true,"r_max_range":[13,13]}"#;
    let o = fanocalc(&[
        "descendants",
        "--basket",
        "[[1,2],[1,2],[1,3],[1,3],[1,6],[1,7]]",
        "--constraints",
        c,
    ]);
    assert_eq!(json(&o).as_array().unwrap().len(), 5);

    assert_eq!(code(&fanocalc(&["enumerate", "--constraints", "{}"])), 1);
    assert_eq!(code(&fanocalc(&["enumerate", "--constraints", r#"{"bogus":1}"#])), 1);
}

#[test]
fn packing_verbs() {
    let o = fanocalc(&["pack", "--basket", "[[1,2],[1,3]]"]);
    let v = json(&o);
    assert_eq!(v[0]["basket"], serde_json::json!([[2, 5]]));

    let o = fanocalc(&["unpack", "--basket", "[[3,7]]"]);
    assert_eq!(json(&o)["initial"], serde_json::json!([[1, 2], [1, 2], [1, 3]]));

    let o = fanocalc(&["dominates", "--basket", "[[1,2],[1,3]]", "--target", "[[2,5]]"]);
    assert_eq!(json(&o)["dominates"], true);
    let o = fanocalc(&["dominates", "--basket", "[[2,5]]", "--target", "[[1,2],[1,3]]"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["dominates"], false);
}

fn copy_data(to: &Path) {
    for f in ["claims.json", "baskets_r16_21.json", "ledger.json"] {
        std::fs::copy(data_dir().join(f), to.join(f)).unwrap();
    }
}

#[test]
fn check_claims_and_data_dir_resolution() {
    let o = fanocalc(&["check-claims"]);
    assert_eq!(code(&o), 0);
    let r: ClaimsReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.ok);

    // a wrong expected degree is a claim failure
    let dir = tempfile::tempdir().unwrap();
    copy_data(dir.path());
    let claims = std::fs::read_to_string(dir.path().join("claims.json")).unwrap();
    std::fs::write(
        dir.path().join("claims.json"),
        claims.replace(r#""k3": "3/14""#, r#""k3": "2/14""#),
    )
    .unwrap();
    let o = fanocalc(&["check-claims", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    // the environment variable is used when no flag is given
    let o = Command::new(env!("CARGO_BIN_EXE_fanocalc"))
        .args(["check-claims"])
        .env("FANOCALC_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_fanocalc"))
        .args(["replay"])
        .env("FANOCALC_DATA_DIR", "/no/such/dir")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
