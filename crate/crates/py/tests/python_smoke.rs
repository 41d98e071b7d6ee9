use std::path::PathBuf;
use std::process::Command;

/// The cdylib cargo built for this test run, next to the test binary.
fn built_library() -> PathBuf {
    std::env::current_exe().unwrap().parent().unwrap().join("liblfreason_py.so")
}

#[test]
fn python_smoke_script() {
    let lib = built_library();
    assert!(lib.exists(), "{} not built", lib.display());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let out = Command::new("python3")
        .arg(root.join("python/smoke_test.py"))
        .env("LFREASON_PY_LIB", &lib)
        .output()
        .expect("running python3");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{}\n{}", stdout, String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("python smoke test: ok"));
}
