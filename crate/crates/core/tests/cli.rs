use std::process::Command;

fn betagibbs(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_betagibbs"))
        .args(args)
        .env_remove("BETAGIBBS_THREADS")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn measure_prints_exact_fractions() {
    let (code, out, _) = betagibbs(&["measure", "1100"]);
    assert_eq!(code, 0);
    assert_eq!(out, "{\"word\":\"1100\",\"mu\":\"3/40\",\"mu_prime\":\"9/40\",\"ratio\":\"3\"}\n");
}

#[test]
fn zero_tail_support() {
    let (code, out, _) = betagibbs(&["support", "--period", "0"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["support"], serde_json::json!([2, 3, 5, 6, 7]));
    assert_eq!(v["limit"], serde_json::json!(["0", "1/5", "1/5", "0", "1/5", "1/5", "1/5"]));
}

#[test]
fn usage_error_exits_one() {
    let (code, out, err) = betagibbs(&["measure", "0111"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.starts_with("error"));
    assert_eq!(betagibbs(&["oracle"]).0, 1);
}

#[test]
fn thread_policies_agree() {
    let seq = betagibbs(&["--threads", "1", "--csv", "oracle", "--n", "4", "--N", "16"]);
    let par = betagibbs(&["--threads", "3", "--csv", "oracle", "--n", "4", "--N", "16"]);
    assert_eq!(seq.0, 0);
    assert_eq!(seq.1, par.1);
    assert!(seq.1.starts_with("word,mu_exact,lower,upper,pass\n"));
}

#[test]
fn failing_check_exits_two() {
    let (code, _, err) = betagibbs(&["verify", "--only", "12"]);
    assert_eq!(code, 2);
    assert!(err.contains("FAIL"));
}
