use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn humbert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_humbert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const WORKED: &str = "{\"n\":3,\"p\":5,\"rows\":[[1,1,1,0],[0,1,2,3]]}\n";

#[test]
fn predict_tables() {
    let o = humbert(&["predict", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(
        s.contains("factors               5 of positive dimension"),
        "{s}"
    );
    assert!(s.contains("kernel order          32 = 2^5"));
    assert!(s.contains("Prym-Tyurin exponent  2 = 2^1"));

    let s = stdout(&humbert(&["predict", "--n", "3"]));
    assert!(s.contains("factors               1 of positive dimension"));
    assert!(s.contains("kernel order          1 = 2^0"));

    let o = humbert(&["predict", "--n", "5", "--format", "structured"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["total_dim"], "17");
    assert_eq!(doc["positive_factor_count"], "16");
    assert_eq!(doc["counts_by_dim"][1]["multiplicity"], "1");

    assert_eq!(humbert(&["predict", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn identities_table() {
    let o = humbert(&["identities", "--max-n", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let row = s
        .lines()
        .find(|l| l.trim_start().starts_with("7 "))
        .unwrap();
    assert!(row.contains("129 = 129") && row.ends_with("pass"), "{row}");
    assert_eq!(
        humbert(&["identities", "--max-n", "3"]).status.code(),
        Some(0)
    );
    assert_eq!(
        humbert(&["identities", "--max-n", "50"]).status.code(),
        Some(0)
    );
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        humbert(&["verify", "--n", "4", "--p", "7", "--kmax", "3", "--seed", "42"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        humbert(&["verify", "--n", "5", "--p", "5", "--kmax", "2", "--seed", "1"])
            .status
            .code(),
        Some(0)
    );
    let o = humbert(&[
        "verify", "--n", "4", "--p", "5,7", "--kmax", "1", "--trials", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("PASS").count(), 5);

    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.curve",
        "{\"n\":3,\"p\":5,\"rows\":[[1,1,1,0],[0,1,1,1]]}\n",
    );
    let o = humbert(&["verify", "--curve", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("vanishing maximal minor on columns [1, 2]")
    );

    let good = write(dir.path(), "good.curve", WORKED);
    assert_eq!(
        humbert(&["verify", "--curve", &good, "--kmax", "2"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        humbert(&["verify", "--curve", &good, "--p", "7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        humbert(&["verify", "--n", "6", "--p", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        humbert(&["verify", "--n", "4", "--p", "9"]).status.code(),
        Some(2)
    );
    assert_eq!(humbert(&["verify", "--n", "4"]).status.code(), Some(2));
}

#[test]
fn structured_output_is_deterministic() {
    let args = [
        "verify",
        "--n",
        "4",
        "--p",
        "5",
        "--kmax",
        "2",
        "--seed",
        "3",
        "--format",
        "structured",
        "--deterministic",
    ];
    let a = humbert(&args);
    let mut threaded: Vec<&str> = args.to_vec();
    threaded.extend(["--threads", "2"]);
    let b = humbert(&threaded);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(doc.get("timestamp").is_none());
    assert_eq!(doc["verdict"], "pass");
    assert_eq!(
        doc["trials"][0]["report"]["residuals"]
            .as_array()
            .unwrap()
            .len(),
        2
    );

    let c = humbert(&args[..args.len() - 1]);
    let doc: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
    assert!(doc["timestamp"].is_u64());
}

#[test]
fn count_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let conic = write(
        dir.path(),
        "conic.curve",
        "{\"n\":2,\"p\":5,\"rows\":[[1,1,1]]}\n",
    );
    let s = stdout(&humbert(&["count", "--curve", &conic]));
    assert!(s.contains("N = 6  a = 0"), "{s}");

    let curve = write(dir.path(), "a.curve", WORKED);
    let s = stdout(&humbert(&[
        "count", "--curve", &curve, "--subset", "3", "--k", "2",
    ]));
    assert!(s.contains("type 2") && s.contains("N = 26  a = 0"), "{s}");

    let cache = dir.path().join("counts.cache");
    let cache = cache.to_str().unwrap();
    let args = [
        "count",
        "--curve",
        &curve,
        "--k",
        "2",
        "--cache",
        cache,
        "--stats",
        "--format",
        "structured",
    ];
    let first: serde_json::Value = serde_json::from_slice(&humbert(&args).stdout).unwrap();
    let second: serde_json::Value = serde_json::from_slice(&humbert(&args).stdout).unwrap();
    assert_eq!(first["cache"]["misses"], 1);
    assert_eq!(second["cache"]["hits"], 1);
    assert_eq!(second["record"]["source"], "cache");
    assert_eq!(first["record"]["N"], second["record"]["N"]);
    assert_eq!(fs::read_to_string(cache).unwrap().lines().count(), 1);

    assert_eq!(
        humbert(&["count", "--curve", &curve, "--p", "7"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        humbert(&["count", "--curve", &curve, "--subset", "0,1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        humbert(&["count", "--curve", &curve, "--method", "bogus"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn quotients() {
    let dir = tempfile::tempdir().unwrap();
    let curve = write(dir.path(), "a.curve", WORKED);
    let s = stdout(&humbert(&["quotient", "--curve", &curve, "--subset", "3"]));
    assert_eq!(s, "{\"n\":2,\"p\":5,\"rows\":[[1,1,1]]}\n");
    let s = stdout(&humbert(&["quotient", "--curve", &curve]));
    assert_eq!(s, "{\"n\":3,\"p\":5,\"rows\":[[1,0,4,2],[0,1,2,3]]}\n");
    let out = dir.path().join("line.curve");
    let o = humbert(&[
        "quotient",
        "--curve",
        &curve,
        "--subset",
        "0,2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(out).unwrap(),
        "{\"n\":1,\"p\":5,\"rows\":[]}\n"
    );
    assert_eq!(
        humbert(&["quotient", "--curve", &curve, "--subset", "0,1,2"])
            .status
            .code(),
        Some(2)
    );
}
