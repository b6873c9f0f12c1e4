use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mdgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdgp"))
        .args(args)
        .output()
        .unwrap()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/chain30.pdb")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("i.dgp");
    let pdb = fixture();
    let mut args = vec!["generate", "--pdb", s(&pdb), "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = mdgp(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn generate_reports_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.dgp");
    let o = mdgp(&[
        "generate",
        "--pdb",
        s(&fixture()),
        "--atoms",
        "all",
        "--keep",
        "1.0",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("V=120 E="), "{stdout}");
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("DGP chain30 120 "));
}

#[test]
fn generate_warns_on_disconnected_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.dgp");
    let o = mdgp(&[
        "generate",
        "--pdb",
        s(&fixture()),
        "--keep",
        "0.1",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("connected components"));
}

#[test]
fn solve_trace_is_byte_identical_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), &[]);
    let mut traces = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = mdgp(&[
            "solve",
            "--instance",
            s(&inst),
            "--seed",
            "7",
            "--pop",
            "12",
            "--generations",
            "25",
            "--out",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        traces.push(std::fs::read(out.join("trace.csv")).unwrap());
        assert!(out.join("result.csv").exists());
        assert!(out.join("best.csv").exists());
    }
    assert_eq!(traces[0], traces[1]);
    let text = String::from_utf8(traces[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 27);
}

#[test]
fn solve_accepts_basic_preset() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), &[]);
    let out = dir.path().join("basic");
    let o = mdgp(&[
        "solve",
        "--instance",
        s(&inst),
        "--algorithm",
        "basic",
        "--generations",
        "10",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(
        stdout.lines().nth(1).unwrap().contains(",basic,0,"),
        "{stdout}"
    );
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn compare_writes_csv_and_medians() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), &[]);
    let out = dir.path().join("cmp");
    let o = mdgp(&[
        "compare",
        "--instance",
        s(&inst),
        "--seeds",
        "1,2",
        "--pop",
        "8",
        "--generations",
        "5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("gremutrrr: median final LDE"));
    assert!(stdout.contains("basic: median final LDE"));
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 + 2);
    assert!(out.join("traces/gremutrrr_seed2.csv").exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dgp");
    std::fs::write(&bad, "DGP x 3 1\n0 7 1.0 2.0\n").unwrap();
    let o = mdgp(&[
        "solve",
        "--instance",
        s(&bad),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = mdgp(&[
        "solve",
        "--instance",
        s(&dir.path().join("missing.dgp")),
        "--out",
        s(dir.path()),
    ]);
    assert!(!o.status.success());

    let inst = generate(dir.path(), &[]);
    let o = mdgp(&[
        "solve",
        "--instance",
        s(&inst),
        "--pop",
        "0",
        "--out",
        s(&dir.path().join("p")),
    ]);
    assert!(!o.status.success());

    let o = mdgp(&[
        "generate",
        "--pdb",
        s(&fixture()),
        "--epsilon",
        "-1",
        "--out",
        s(&dir.path().join("e.dgp")),
    ]);
    assert!(!o.status.success());

    let o = mdgp(&[
        "solve",
        "--instance",
        s(&inst),
        "--algorithm",
        "nope",
        "--out",
        s(dir.path()),
    ]);
    assert!(!o.status.success());
}
