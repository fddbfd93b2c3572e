use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BASE: &str = r#"
liquid = "water"
temperature = "300 K"

[plate]
material = "gold"
thickness = "40 nm"

[coating]
material = "teflon"
thickness = "150 nm"

[equilibrium]
bracket = ["20 nm", "200 nm"]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir-fp"))
        .args(args)
        .arg("--config")
        .arg(config)
        .env_remove("CASIMIR_FP_MATERIALS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Data rows: everything after the comment block and the column line.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn debye_rows_follow_the_concentration_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!("{BASE}\n[grids.concentration]\nvalues = [\"1e-7 M\", \"1 mM\"]\n"),
    );
    let out = run(&["debye"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# casimir-fp "));
    assert!(text.contains("# config-sha256: "));
    assert!(text.contains("# materials: "));
    let r = rows(&text);
    let lambda: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert!((lambda[0] / 1000.0 - 1.0).abs() < 0.1);
    assert!((lambda[1] / 10.0 - 1.0).abs() < 0.1);
}

#[test]
fn empty_grid_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{BASE}\n[grids.concentration]\nvalues = []\n"));
    let out = run(&["debye"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().last(), Some("concentration_M,debye_length_nm"));
    assert!(rows(&text).is_empty());
}

#[test]
fn invalid_inputs_exit_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (format!("{BASE}\n[grids.concentration]\nvalues = [\"-1e-3 M\"]\n"), "grids.concentration"),
        (format!("{BASE}\n[screening]\nconcentration = \"-1 mM\"\n"), "screening.concentration"),
        (
            format!("{BASE}\n[screening]\nconcentration = \"1 mM\"\ndebye_length = \"10 nm\"\n"),
            "screening",
        ),
        (BASE.replace("\"300 K\"", "\"300\""), "temperature"),
        (BASE.replace("\"150 nm\"", "\"150 K\""), "coating.thickness"),
        (BASE.replace("\"teflon\"", "\"ptfe\""), "coating.material"),
        (BASE.replace("\"300 K\"", "\"380 K\""), "temperature"),
        (format!("{BASE}\nunknown_key = 1\n"), "config"),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.toml"), text);
        let out = run(&["debye"], &cfg);
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", stderr(&out));
        assert!(stderr(&out).contains(field), "case {i}: {}", stderr(&out));
        assert!(out.stdout.is_empty(), "case {i}: validation must precede output");
    }
}

#[test]
fn tolerance_flag_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{BASE}\n[grids.concentration]\nvalues = []\n"));
    let out = run(&["debye", "--tolerance", "0.5"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--tolerance"));
}

#[test]
fn pressure_rows_carry_the_ideal_reference() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{BASE}\n[grids.separation]\nvalues = [\"100 nm\"]\n"));
    let out = run(&["pressure"], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = rows(&stdout(&out));
    let ideal: f64 = r[0][4].parse().unwrap();
    assert!((ideal - 0.1486).abs() < 1e-3, "{ideal}");
    let (n0, q, total): (f64, f64, f64) = (r[0][1].parse().unwrap(), r[0][2].parse().unwrap(), r[0][3].parse().unwrap());
    assert_eq!(n0 + q, total);
}

#[test]
fn attractive_pair_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &BASE.replace("\"teflon\"", "\"silica\""));
    let out = run(&["equilibrium"], &cfg);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stdout(&out).contains("# equilibrium: d_e_nm"));
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!(
            "{BASE}\n[sweep]\naxis = \"debye_length\"\n[sweep.grid]\nvalues = [\"10 nm\", \"100 nm\", \"1000 nm\"]\n"
        ),
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let first = run(&["sweep", "--out", a.to_str().unwrap()], &cfg);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = run(&["sweep", "--threads", "1", "--out", b.to_str().unwrap()], &cfg);
    assert_eq!(second.status.code(), Some(0), "{}", stderr(&second));
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let d: Vec<f64> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] >= w[0]), "{d:?}");
}

#[test]
fn spectrum_json_mirror_lists_resonances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &format!(
            "{BASE}\n[cavity]\ngap = \"125 nm\"\n[grids.wavelength]\nstart = \"700 nm\"\nstop = \"1000 nm\"\nstep = \"2 nm\"\n"
        ),
    );
    let json = dir.path().join("s.json");
    let out = run(&["spectrum", "--json", json.to_str().unwrap()], &cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("# resonances: wavelength_nm,kind,mode_order"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["command"], "spectrum");
    assert_eq!(v["columns"][0], "wavelength_nm");
    let dips = v["blocks"]["resonances"]["rows"].as_array().unwrap();
    let first = dips[0][0].as_f64().unwrap();
    assert!((first - 870.0).abs() < 0.05 * 870.0, "{first}");
}

#[test]
fn materials_database_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &format!("{BASE}\n[grids.concentration]\nvalues = [\"1 mM\"]\n"));
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/materials.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_casimir-fp"))
        .args(["debye", "--config"])
        .arg(&cfg)
        .env("CASIMIR_FP_MATERIALS", &data)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("materials.toml)"));

    let out = Command::new(env!("CARGO_BIN_EXE_casimir-fp"))
        .args(["debye", "--config"])
        .arg(&cfg)
        .env("CASIMIR_FP_MATERIALS", dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("materials"));
}
