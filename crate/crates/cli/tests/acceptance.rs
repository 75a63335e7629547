//! Runs the `acceptance` subcommand twice and prints one line per
//! criterion: 1–17 from the suite, 18 from comparing the two output trees.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

fn run_suite(out: &Path) -> (Option<i32>, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_spinconc"))
        .args(["acceptance", "--out", out.to_str().expect("utf-8 path")])
        .output()
        .expect("binary runs");
    if !o.stderr.is_empty() {
        eprint!("{}", String::from_utf8_lossy(&o.stderr));
    }
    (o.status.code(), String::from_utf8_lossy(&o.stdout).into_owned())
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).expect("readable output tree") {
            let p = e.expect("entry").path();
            if p.is_dir() {
                walk(root, &p, acc);
            } else {
                let rel = p.strip_prefix(root).expect("inside root").to_path_buf();
                acc.insert(rel, std::fs::read(&p).expect("readable file"));
            }
        }
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc);
    acc
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let (a, b) = (dir.path().join("first"), dir.path().join("second"));
    let (code, stdout) = run_suite(&a);
    let lines: Vec<&str> = stdout.lines().filter(|l| l.starts_with("criterion ")).collect();
    let mut ok = code.is_some_and(|c| c == 0 || c == 3);
    for id in 1..=17 {
        match lines.iter().find(|l| l.starts_with(&format!("criterion {id:02} "))) {
            Some(l) => {
                println!("{l}");
                ok &= l.contains(" PASS ");
            }
            None => {
                println!("criterion {id:02} FAIL  missing from suite output (exit {code:?})");
                ok = false;
            }
        }
    }

    let (code_b, _) = run_suite(&b);
    let (ta, tb) = (tree(&a), tree(&b));
    let differing: Vec<String> = ta
        .keys()
        .chain(tb.keys())
        .filter(|k| ta.get(*k) != tb.get(*k))
        .map(|k| k.display().to_string())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let same = differing.is_empty() && code == code_b && !ta.is_empty();
    if same {
        println!("criterion 18 PASS  determinism: {} files byte-identical across two runs", ta.len());
    } else {
        println!("criterion 18 FAIL  determinism: differing files {differing:?}, exit codes {code:?} / {code_b:?}");
    }
    ok &= same;
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
