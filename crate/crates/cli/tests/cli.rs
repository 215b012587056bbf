use std::path::PathBuf;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use reclab::json::{element_to_json, field_to_json, render, symbol_to_json, tower_element_to_json};
use reclab::laurent_tower::{TowerDesc, TowerElement};
use reclab::local_field::{BaseElement, FieldDesc, EXACT};
use reclab::pairing::artin_hasse_classical;
use reclab::suites::{domain_unit, sample_entry, sample_x};
use reclab::symbols::MilnorSymbol;

fn reclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reclab")).args(args).env_remove("RECLAB_PRECISION").output().expect("runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, body: String) -> String {
    let path = scratch(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn plan_for_p3_n1() {
    let v = json_of(&reclab(&["plan", "--n", "1", "--p", "3"]));
    assert_eq!(v["plan"]["m"], 3);
    assert_eq!(v["admissible"], true);
    assert_eq!(v["plan"]["certified"], true);
    assert_eq!((v["plan"]["k"].as_i64(), v["plan"]["t"].as_i64()), (Some(10), Some(22)));
    let custom = json_of(&reclab(&["plan", "--n", "1", "--p", "3", "--k", "0", "--t", "2"]));
    assert_eq!(custom["plan"]["certified"], false);
}

#[test]
fn field_descriptions() {
    let v = json_of(&reclab(&["field", "--p", "5", "--cyclotomic-tower", "2"]));
    assert_eq!((v["degree"].as_u64(), v["e"].as_u64(), v["levels"].as_u64()), (Some(20), Some(20), Some(2)));
    let f = FieldDesc::cyclotomic(5, 2).unwrap();
    let path = write("q25.json", render(&field_to_json(&f)));
    let w = json_of(&reclab(&["field", "--field", &path]));
    assert_eq!(w["degree"], 20);
    assert_eq!(w["cyclotomic_level"], 2);
}

#[test]
fn iwasawa_and_artin_hasse_agree_on_zeta() {
    let l = FieldDesc::cyclotomic(5, 1).unwrap();
    let field = write("l5.json", render(&field_to_json(&l)));
    let zeta = write("zeta5.json", render(&element_to_json(&BaseElement::zeta(&l, EXACT).unwrap())));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nonzero = 0;
    for i in 0..4 {
        let u = domain_unit(&l, 1, &mut rng);
        nonzero += usize::from(!artin_hasse_classical(&u, 1).unwrap().is_zero());
        let u = write(&format!("u5_{i}.json"), render(&element_to_json(&u)));
        let ah = json_of(&reclab(&["pair", "--engine", "ah", "--field", &field, "--alpha", &u, "--level", "1"]));
        let iw = json_of(&reclab(&["pair", "--engine", "iwasawa", "--field", &field, "--alpha", &u, "--x", &zeta, "--level", "1"]));
        assert_eq!(ah["coords"], iw["coords"]);
        assert_eq!(iw["engine"], "iwasawa");
        let hil = json_of(&reclab(&["oracle", "hilbert", "--p", "5", "--n", "1", "--a", &u, "--b", &zeta]));
        let zero = ah["coords"].as_array().unwrap().iter().all(|c| c.as_array().unwrap().is_empty());
        assert_eq!(hil["trivial"].as_bool(), Some(zero));
    }
    assert!(nonzero > 0);
}

#[test]
fn higher_engines_from_files() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = TowerDesc::new(&l, 1, 16).unwrap();
    let field = write("l3.json", render(&field_to_json(&l)));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = sample_x(&tw, &mut rng, 2, 40);
    let x = write("x3.json", render(&tower_element_to_json(&x)));
    let t = TowerElement::var(&tw, 1);
    let zeta = TowerElement::from_base(&tw, &BaseElement::zeta(&l, EXACT).unwrap());
    let sym = MilnorSymbol::new(&tw, vec![t.clone(), zeta]).unwrap();
    let sym = write("tz.json", render(&symbol_to_json(&sym)));
    let units = write("t.json", render(&vec![tower_element_to_json(&t)]));
    let gen = json_of(&reclab(&["pair", "--engine", "iwasawa-gen", "--field", &field, "--alpha", &sym, "--x", &x, "--level", "1"]));
    let ah = json_of(&reclab(&["pair", "--engine", "ah-higher", "--field", &field, "--alpha", &units, "--x", &x, "--level", "1"]));
    assert_eq!(gen["coords"], ah["coords"]);

    let m = FieldDesc::cyclotomic_tower(3, 2).unwrap();
    let lw = m.subfield(1);
    let (tx, ts) = (TowerDesc::new(&lw, 1, 16).unwrap(), TowerDesc::new(&m, 1, 16).unwrap());
    let lfield = write("k1.json", render(&field_to_json(&lw)));
    let mfield = write("k2.json", render(&field_to_json(&m)));
    let x = write("x31.json", render(&tower_element_to_json(&sample_x(&tx, &mut rng, 1, 40))));
    let alpha = MilnorSymbol::new(&ts, vec![sample_entry(&ts, &mut rng, 40), sample_entry(&ts, &mut rng, 40)]).unwrap();
    let alpha = write("alpha32.json", render(&symbol_to_json(&alpha)));
    let common = ["--field", &lfield, "--symbol-field", &mfield, "--alpha", &alpha, "--x", &x, "--level", "1"];
    let wiles = json_of(&reclab(&[&["pair", "--engine", "wiles"][..], &common].concat()));
    let koly = json_of(&reclab(&[&["pair", "--engine", "kolyvagin", "--k", "0", "--t", "2"][..], &common].concat()));
    assert_eq!(wiles["coords"], koly["coords"]);
    assert_eq!(koly["plan"]["t"], 2);
    assert!(wiles["plan"].is_null());
}

#[test]
fn check_reports_are_reproducible() {
    let args = ["check", "--suite", "fgl", "--p", "3", "--samples", "3", "--seed", "9"];
    let a = reclab(&args);
    let b = reclab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    assert_eq!(v["passed"], true);
    let t = reclab(&["check", "--suite", "plan", "--p", "5", "--samples", "3", "--format", "table"]);
    let text = String::from_utf8(t.stdout).unwrap();
    assert!(text.contains("PASS") && !text.contains("FAIL"), "{text}");
}

#[test]
fn exit_status_reflects_outcomes() {
    // a check without cases is not a pass
    let empty = reclab(&["check", "--suite", "digits", "--p", "3", "--samples", "0"]);
    assert_eq!(empty.status.code(), Some(1));
    let unknown = reclab(&["check", "--suite", "nope", "--p", "3"]);
    assert_eq!(unknown.status.code(), Some(2));
    let even = reclab(&["plan", "--n", "1", "--p", "4"]);
    assert_eq!(even.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&even.stderr).contains("odd prime"));
    let scope = reclab(&["oracle", "hilbert", "--p", "3", "--n", "2", "--a", "3", "--b", "2"]);
    assert_eq!(scope.status.code(), Some(2));
}

#[test]
fn precision_from_the_environment() {
    let plain = json_of(&reclab(&["log", "--p", "3", "--x", "3"]));
    let out = Command::new(env!("CARGO_BIN_EXE_reclab"))
        .args(["log", "--p", "3", "--x", "3"])
        .env("RECLAB_PRECISION", "12")
        .output()
        .unwrap();
    let env = json_of(&out);
    assert!(env["log"]["precision"].as_i64() > plain["log"]["precision"].as_i64());
}

#[test]
fn jacobian_of_the_variables_is_one() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = TowerDesc::new(&l, 1, 8).unwrap();
    let entries = vec![tower_element_to_json(&TowerElement::var(&tw, 1)), tower_element_to_json(&TowerElement::uniformizer(&tw))];
    let path = write("jac.json", render(&entries));
    let v = json_of(&reclab(&["jacobian", "--p", "3", "--cyclotomic", "1", "--entries", &path]));
    let terms = v["det"]["coeffs"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["idx"], serde_json::json!([0]));
    assert_eq!(terms[0]["value"]["coords"], serde_json::json!([[1], []]));
}
