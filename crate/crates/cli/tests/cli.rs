use std::path::Path;
use std::process::{Command, Output};

use uml_cli::{LevelRecord, MeasureFile, PairRecord, PairsFile, TowerFile, PAIRS_FORMAT, TOWER_FORMAT};

fn uml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uml")).args(args).env_remove("UML_MAX_DIM").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn haar(dir: &Path, name: &str, ball: &str) -> std::path::PathBuf {
    let f = dir.join(name);
    let o = uml(&["haar", "--p", "2", "--s", "3", "--ball", ball, "--out", path(&f)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    f
}

fn read_measure(p: &Path) -> MeasureFile {
    MeasureFile::parse(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn haar_on_z2_has_mass_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = haar(dir.path(), "h.json", "0:0");
    let mu = read_measure(&f).to_measure().unwrap();
    assert_eq!(uml_core::rational::fmt_q(&mu.total_mass()), "1/1");
    let o = uml(&["haar", "--ball", "0:0"]);
    assert!(stdout(&o).contains("\"density\":\"1/1\""));
}

#[test]
fn theta_of_haar_at_half() {
    let dir = tempfile::tempdir().unwrap();
    let f = haar(dir.path(), "h.json", "0:0");
    let o = uml(&["theta", "--measure", path(&f), "--z", "1/2"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("0/1"));
}

#[test]
fn shell_measure_density_at_unit_shell() {
    let o = uml(&["shellmeasure", "--p", "2", "--s", "3", "--n", "1", "--jmin", "-8"]);
    assert!(o.status.success());
    let file = MeasureFile::parse(&stdout(&o)).unwrap();
    // the unit shell S(0, 1) is the single ball B(1, 1)
    let cell = file.cells.iter().find(|c| c.radius_exp == [1] && c.center == ["1/1"]).unwrap();
    assert_eq!(cell.density, "-3/2");
}

#[test]
fn normalized_shell_measure_has_mass_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    let o = uml(&["shellmeasure", "--n", "2", "--jmin", "-5", "--normalize", "--out", path(&f)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("mass 1/1"));
}

#[test]
fn theta_table_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = haar(dir.path(), "a.json", "1/2:-1");
    let b = haar(dir.path(), "b.json", "1:2");
    let c = dir.path().join("c.json");
    assert!(uml(&["convolve", "--a", path(&a), "--b", path(&b), "--out", path(&c)]).status.success());
    let t = dir.path().join("t.json");
    assert!(uml(&["theta", "--measure", path(&c), "--grid", "--out", path(&t)]).status.success());
    let back = dir.path().join("back.json");
    let o = uml(&["invert", "--table", path(&t), "--out", path(&back)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_measure(&back).to_measure().unwrap(), read_measure(&c).to_measure().unwrap());
}

#[test]
fn output_is_deterministic() {
    let args = ["shellmeasure", "--n", "3", "--jmin", "-6"];
    assert_eq!(uml(&args).stdout, uml(&args).stdout);
    let dir = tempfile::tempdir().unwrap();
    let a = haar(dir.path(), "a.json", "0:1");
    let b = haar(dir.path(), "b.json", "1:0");
    let run = || uml(&["product", "--a", path(&a), "--b", path(&b)]).stdout;
    assert_eq!(run(), run());
}

#[test]
fn product_of_balls_is_two_dimensional() {
    let dir = tempfile::tempdir().unwrap();
    let a = haar(dir.path(), "a.json", "0:1");
    let b = haar(dir.path(), "b.json", "1:0");
    let o = uml(&["product", "--a", path(&a), "--b", path(&b)]);
    let file = MeasureFile::parse(&stdout(&o)).unwrap();
    assert_eq!(file.dim, 2);
    assert_eq!(file.cells[0].radius_exp, [1, 0]);
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, "{\"format\":\"uml-measure/1\"").unwrap();
    let o = uml(&["theta", "--measure", path(&f), "--z", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[parse]"));
}

#[test]
fn dimension_cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_uml"))
        .args(["haar", "--ball", "0:0,0:0"])
        .env("UML_MAX_DIM", "1")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("UML_MAX_DIM"));
}

#[test]
fn pd_of_indicator_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let f = haar(dir.path(), "f.json", "0:0");
    let o = uml(&["pd", "--f", path(&f), "--x", "0", "--T", "1"]);
    assert!(stdout(&o).contains("convergent: -3/5"));
    let o = uml(&["pd", "--f", path(&f), "--x", "0", "--tnorm", "-1"]);
    assert!(stdout(&o).contains("divergent tail"));
    let o = uml(&["pd", "--f", path(&f), "--x", "0", "--domain", "unit", "--T", "2"]);
    assert!(stdout(&o).contains("convergent: 0/1"));
}

#[test]
fn pd_shift_of_haar() {
    let dir = tempfile::tempdir().unwrap();
    let f = haar(dir.path(), "f.json", "0:0");
    let o = uml(&["pdshift", "--measure", path(&f), "--a", "1", "--set", "0:0", "--T", "1"]);
    assert!(stdout(&o).contains("convergent: 3/5"), "{}", stdout(&o));
}

fn write_json<T: serde::Serialize>(p: &Path, v: &T) {
    std::fs::write(p, serde_json::to_string(v).unwrap()).unwrap();
}

#[test]
fn kakutani_on_equal_factors() {
    let dir = tempfile::tempdir().unwrap();
    let h = read_measure(&haar(dir.path(), "h.json", "0:0"));
    let pairs = PairsFile {
        format: PAIRS_FORMAT.into(),
        pairs: (0..4).map(|_| PairRecord { mu: h.clone(), nu: h.clone() }).collect(),
    };
    let f = dir.path().join("pairs.json");
    write_json(&f, &pairs);
    let o = uml(&["kakutani", "--factors", path(&f), "--tol", "1/100", "--tail", "one"]);
    let out = stdout(&o);
    assert!(out.contains("beta[3] = 3^0"));
    assert!(out.contains("Equivalent product=1/1"), "{out}");
}

#[test]
fn kakutani_rejects_missing_support() {
    let dir = tempfile::tempdir().unwrap();
    let small = read_measure(&haar(dir.path(), "s.json", "0:1"));
    let big = read_measure(&haar(dir.path(), "b.json", "0:0"));
    let pairs = PairsFile { format: PAIRS_FORMAT.into(), pairs: vec![PairRecord { mu: big, nu: small }] };
    let f = dir.path().join("pairs.json");
    write_json(&f, &pairs);
    let o = uml(&["kakutani", "--factors", path(&f), "--tol", "1/100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[precondition]"));
}

#[test]
fn weakdist_on_a_haar_tower() {
    let dir = tempfile::tempdir().unwrap();
    let h = read_measure(&haar(dir.path(), "h.json", "0:0"));
    let tower = TowerFile {
        format: TOWER_FORMAT.into(),
        levels: (1..=3).map(|n| LevelRecord::Product(vec![h.clone(); n])).collect(),
    };
    let f = dir.path().join("tower.json");
    write_json(&f, &tower);
    let o = uml(&["weakdist", "check", "--tower", path(&f)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("consistent"));
    let o = uml(&["weakdist", "tight", "--tower", path(&f), "--c", "-1", "--grid", "-2..4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("uniform radius: p^0"), "{}", stdout(&o));
    let o = uml(&["weakdist", "sxi", "--tower", path(&f), "--xi", "1/8", "--level", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("S_xi = "));
}

#[test]
fn inconsistent_tower_fails() {
    let dir = tempfile::tempdir().unwrap();
    let h = read_measure(&haar(dir.path(), "h.json", "0:0"));
    let h2 = read_measure(&haar(dir.path(), "h2.json", "0:1"));
    let tower = TowerFile {
        format: TOWER_FORMAT.into(),
        levels: vec![LevelRecord::Product(vec![h.clone()]), LevelRecord::Product(vec![h2, h])],
    };
    let f = dir.path().join("tower.json");
    write_json(&f, &tower);
    let o = uml(&["weakdist", "check", "--tower", path(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("inconsistent"));
}

#[test]
fn transform_and_rho() {
    let o = uml(&["transform", "--matrix", "1,0;0,1", "--shell", "1,2", "--x", "1,1/2"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("1/1"));
    let o = uml(&["rho", "--a", "0", "--x", "1", "--trunc", "1"]);
    assert!(stdout(&o).starts_with("1/1"), "{}", stdout(&o));
}

#[test]
fn selftest_single_criterion() {
    let o = uml(&["selftest", "--only", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS [1]"));
}
