//! Binary interface: flags, output bytes and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn autoredux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autoredux"))
        .args(args)
        .env_remove("AUTOREDUX_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = autoredux(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn gen_writes_the_cototal_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "fx");
    assert_eq!(
        stdout(&["gen", "--universe", "4", "--out", &out]),
        "wrote set.txt\nwrote gamma.txt\n"
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("fx/set.txt")).unwrap(),
        "1010\n"
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("fx/gamma.txt")).unwrap(),
        "universe 4\naxiom 0 1\naxiom 2 3\n"
    );
}

#[test]
fn measure_zero_psi_is_exact_power_of_two() {
    let csv = stdout(&["measure", "--psi", "zero", "--sweep", "4:6"]);
    assert_eq!(
        csv,
        "psi_kind,N,samples,seed,fraction,ci_low,ci_high,exact_count\n\
         zero,4,16,0,0.0625,0.0625,0.0625,1\n\
         zero,5,32,0,0.03125,0.03125,0.03125,1\n\
         zero,6,64,0,0.015625,0.015625,0.015625,1\n"
    );
}

#[test]
fn measure_sampled_rows_leave_exact_count_empty() {
    let csv = stdout(&[
        "measure",
        "--universe",
        "10",
        "--mode",
        "sampled",
        "--samples",
        "5000",
    ]);
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("cototal-example,10,5000,0,"));
    assert!(row.ends_with(','));
}

#[test]
fn measure_reads_operator_files() {
    let dir = tempfile::tempdir().unwrap();
    let fx = path(dir.path(), "fx");
    stdout(&["gen", "--universe", "8", "--out", &fx]);
    let csv = stdout(&[
        "measure",
        "--psi",
        "cototal",
        "--in",
        &path(dir.path(), "fx/gamma.txt"),
    ]);
    assert!(
        csv.ends_with("cototal,8,256,0,0.00390625,0.00390625,0.00390625,1\n"),
        "{csv}"
    );
}

#[test]
fn diag_three_operator_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let fx = path(dir.path(), "fx");
    stdout(&["gen", "--universe", "16", "--kind", "diag", "--out", &fx]);
    let files: Vec<String> = ["set", "op0", "op1", "op2"]
        .iter()
        .map(|f| format!("{fx}/{f}.txt"))
        .collect();
    let mut args = vec!["diag", "--in"];
    args.extend(files.iter().map(String::as_str));
    let text = stdout(&args);
    assert!(text.starts_with(
        "stage 0 case1 n=1\nstage 1 case2 m=2\nstage 2 caseC\nverdict: compressible at stage 2\nprefix: 10001\n\
         m,c_m,n_m,input_len,bound,slack\n"
    ));

    let mut two = vec!["diag", "--in"];
    two.extend(files[..3].iter().map(String::as_str));
    assert_eq!(
        stdout(&two),
        "stage 0 case1 n=1\nstage 1 case2 m=2\nverdict: success\nset: 0,4,6,8,10,12,14\nverified: true\n"
    );
}

#[test]
fn compress_report_matches_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let fx = path(dir.path(), "fx");
    stdout(&[
        "gen",
        "--universe",
        "16",
        "--kind",
        "trivial-uie",
        "--out",
        &fx,
    ]);
    let csv = stdout(&[
        "compress",
        "--m",
        "4",
        "--in",
        &format!("{fx}/set.txt"),
        &format!("{fx}/gamma.txt"),
    ]);
    assert_eq!(csv, "m,c_m,n_m,input_len,bound,slack\n4,2,11,19,21,2\n");
}

#[test]
fn cototal_trace_on_a_small_real() {
    let dir = tempfile::tempdir().unwrap();
    let real = path(dir.path(), "real.txt");
    fs::write(&real, "width 4\nq 0.0000\nq 0.0101\nq 0.0110\nq 0.0111\n").unwrap();
    assert_eq!(
        stdout(&["cototal", "--in", &real]),
        "resolved 0 0 via comp\nresolved 1 1 via q@1\nresolved 2 1 via q@2\nresolved 3 1 via q@3\n"
    );
}

#[test]
fn check_reports_structured_text() {
    let dir = tempfile::tempdir().unwrap();
    let fx = path(dir.path(), "fx");
    stdout(&["gen", "--universe", "8", "--out", &fx]);
    let (set, gamma) = (format!("{fx}/set.txt"), format!("{fx}/gamma.txt"));
    assert_eq!(
        stdout(&["check", "--kind", "cototal", "--in", &set, &gamma]),
        "holds: true\nmode: exhaustive\ncounterexample: none\n"
    );
    let text = stdout(&["check", "--kind", "uie", "--in", &set, &gamma]);
    assert!(
        text.starts_with("holds: false\nmode: exhaustive\ncounterexample: subset set: "),
        "{text}"
    );
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "m.csv");
    assert_eq!(
        stdout(&["measure", "--psi", "zero", "--universe", "3", "--out", &out]),
        ""
    );
    assert!(fs::read_to_string(&out).unwrap().starts_with("psi_kind,"));
}

#[test]
fn errors_are_one_line_with_a_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.txt");
    fs::write(&bad, "universe 4\naxiom 9\n").unwrap();
    let set = path(dir.path(), "set.txt");
    fs::write(&set, "1010\n").unwrap();

    let out = autoredux(&["check", "--kind", "cototal", "--in", &set, &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error: parse: "), "{err}");
    assert_eq!(err.lines().count(), 1);

    let missing = autoredux(&["cototal", "--in", &path(dir.path(), "none.txt")]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8(missing.stderr)
        .unwrap()
        .starts_with("error: io: "));

    let guard = autoredux(&["measure", "--universe", "30", "--mode", "exhaustive"]);
    assert!(String::from_utf8(guard.stderr)
        .unwrap()
        .starts_with("error: guard: "));

    let threads = Command::new(env!("CARGO_BIN_EXE_autoredux"))
        .args(["measure", "--universe", "4"])
        .env("AUTOREDUX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
    assert!(String::from_utf8(threads.stderr)
        .unwrap()
        .starts_with("error: usage: "));
}
