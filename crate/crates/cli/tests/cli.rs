use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sa"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn generate_small_lists() {
    let dir = tempfile::tempdir().unwrap();
    let o = sa(&["generate", "--engine", "backbone", "--count", "1"], dir.path());
    assert!(o.status.success());
    assert_eq!(rows(&stdout(&o)), vec!["1\t0\t{}"]);

    let o = sa(&["generate", "--engine", "exhaustive", "--count", "20"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("# format: sa-list 1\n"));
    assert!(out.contains("# engine: exhaustive"));
    let r = rows(&out);
    assert_eq!(r.len(), 20);
    assert_eq!(r[19], "20\t4.00346053211\t{4,2,0,0,1}");
}

#[test]
fn engines_agree_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(sa(&["generate", "--engine", "exhaustive", "--max-log10", "12", "--out", "a.tsv"], p).status.success());
    assert!(sa(&["generate", "--engine", "backbone", "--max-log10", "12", "--out", "b.tsv"], p).status.success());
    let o = sa(&["verify", "--list", "a.tsv", "--against", "b.tsv"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 mismatches"));

    let text = fs::read_to_string(p.join("b.tsv")).unwrap();
    let edited = text.replacen("\t{1}\n", "\t{0,1}\n", 1);
    fs::write(p.join("c.tsv"), edited).unwrap();
    let o = sa(&["verify", "--list", "a.tsv", "--against", "c.tsv"], p);
    assert!(!o.status.success());
}

#[test]
fn scn_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = sa(&["scn", "decode", "{4,0,1}"], dir.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("2^3 * 3 * 5 * 7"));
    assert!(out.contains("n = 840"));

    let o = sa(&["scn", "encode", "720720"], dir.path());
    assert_eq!(stdout(&o).trim(), "{6,2,0,1}");

    let o = sa(&["scn", "decode", "{1,2}"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lattice_commands_on_small_list() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(sa(&["generate", "--engine", "backbone", "--max-log10", "30", "--out", "l.tsv"], p).status.success());

    let o = sa(&["closure", "--list", "l.tsv"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("first missing index: none"));

    let o = sa(&["connect", "--list", "l.tsv"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("components: 1"));

    let o = sa(&["classify", "--list", "l.tsv", "--table-out", "t.csv"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("sources: 0"));
    let table = fs::read_to_string(p.join("t.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("Index,Type,Group,log10 n,SCN Representation"));
}

#[test]
fn checkpoint_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(sa(&["generate", "--engine", "backbone", "--max-log10", "300", "--out", "full.tsv"], p).status.success());
    assert!(sa(
        &["generate", "--engine", "backbone", "--max-log10", "120", "--out", "part.tsv", "--checkpoint", "part.ckpt"],
        p
    )
    .status
    .success());
    let o = sa(
        &["generate", "--engine", "backbone", "--max-log10", "300", "--out", "part.tsv", "--resume", "part.ckpt"],
        p,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let a = fs::read_to_string(p.join("full.tsv")).unwrap();
    let b = fs::read_to_string(p.join("part.tsv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn usage_and_input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(sa(&["bogus"], p).status.code(), Some(2));
    assert_eq!(sa(&["generate", "--engine", "backbone"], p).status.code(), Some(2));
    assert_eq!(sa(&["classify", "--list", "missing.tsv"], p).status.code(), Some(2));
    fs::write(p.join("e.tsv"), "# format: sa-list 1\n").unwrap();
    assert_eq!(sa(&["classify", "--list", "e.tsv"], p).status.code(), Some(2));
    fs::write(p.join("bad.tsv"), "# format: sa-list 1\n1\t0\t{}\n2\t0.9\t{1}\n").unwrap();
    let o = sa(&["closure", "--list", "bad.tsv"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("disagrees"));
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let a = sa(&["--threads", "1", "generate", "--engine", "backbone", "--max-log10", "500"], p);
    let b = sa(&["--threads", "4", "generate", "--engine", "backbone", "--max-log10", "500"], p);
    assert_eq!(a.stdout, b.stdout);
}
