use std::process::Command;

const CATALOG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../catalog");

fn twmk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_twmk"))
        .args(args)
        .env("TWMK_CATALOG", CATALOG)
        .env_remove("TWMK_CACHE_DIR")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn success_is_zero() {
    let (code, stdout, stderr) = twmk(&["uct", "--space", "BString-n2", "--twist", "p1/2"]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("verdict    zero"));
    let (code, stdout, _) = twmk(&["spaces"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("RP7"));
}

#[test]
fn refusals_are_one() {
    for args in [
        &["uct", "--space", "BString-n2", "--twist", "3*p1/2"][..],
        &["ahss", "--space", "BString-n2", "--twist", "p1/2"],
        &["characters", "--algebra", "em-integral(2)", "--height", "2"],
    ] {
        let (code, stdout, stderr) = twmk(args);
        assert_eq!(code, 1, "{args:?}: {stderr}");
        assert!(stdout.is_empty());
        assert!(stderr.starts_with("refused: "), "{stderr}");
    }
}

#[test]
fn usage_errors_are_two() {
    for args in [
        &["uct", "--space", "nowhere", "--twist", "H"][..],
        &["uct", "--space", "S3", "--twist", "nosuch"],
        &["twisted-em", "--height", "2", "--multiplier", "0"],
        &["uct", "--space", "S3", "--twist", "x*"],
        &["twisted-em", "--height", "2", "--multiplier", "1", "--prime", "3"],
        &["twisted-em", "--height", "0", "--multiplier", "1"],
        &["sandwich", "--group-even", "Q", "--group-odd", "0"],
        &["ahss", "--space", "RP7"],
        &["no-such-command"],
    ] {
        let (code, _, stderr) = twmk(args);
        assert_eq!(code, 2, "{args:?}: {stderr}");
        assert!(!stderr.is_empty());
    }
}

#[test]
fn help_is_zero() {
    let (code, stdout, _) = twmk(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("twisted-em"));
}
