use std::path::{Path, PathBuf};
use std::process::Command;

use colorgns::catalog;
use colorgns::color_lie::check_axioms;
use colorgns::linalg::rel_residual;
use colorgns_cli::docs::{self, Document};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("not JSON ({e}):\n{}", self.stdout))
    }
}

fn colorgns_env(args: &[&str], env: &[(&str, &Path)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_colorgns"));
    cmd.args(args).env_remove("COLORGNS_CONFIG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn colorgns(args: &[&str]) -> Run {
    colorgns_env(args, &[])
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Every check of every report, flattened.
fn checks(v: &Value) -> Vec<Value> {
    v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["checks"].as_array().unwrap().clone())
        .collect()
}

#[test]
fn grading_rank_three_has_no_violations() {
    let r = colorgns(&["check-grading", "--n", "3", "--format", "json"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = r.json();
    let cs = checks(&v);
    assert_eq!(cs.len(), 2);
    for c in cs {
        assert_eq!(c["residual"], 0.0);
        assert!(c["name"].as_str().unwrap().contains("64 pairs"));
    }
}

#[test]
fn grading_with_twist_and_bad_twist() {
    assert_eq!(colorgns(&["check-grading", "--n", "2", "--twist", "11"]).code, 0);
    let r = colorgns(&["check-grading", "--n", "2", "--twist", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("--twist has 1 digits"));
}

#[test]
fn missing_rank_is_an_input_error() {
    let r = colorgns(&["check-grading"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("rank n is not set"));
}

#[test]
fn clifford_roundtrip_passes() {
    let r = colorgns(&["gns-roundtrip", s(&data("clifford-n1.json")), "--format", "json"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = r.json();
    assert_eq!(v["details"]["reconstruction_dim"], 2);
    let eq: Vec<Value> = checks(&v)
        .into_iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with("equivalence"))
        .collect();
    assert!(!eq.is_empty());
    for c in eq {
        assert!(c["residual"].as_f64().unwrap() < 1e-6, "{c}");
    }
}

#[test]
fn counterexample_extension_cites_perfectness() {
    let r = colorgns(&["stability-extend", s(&data("counterexample-n2.json"))]);
    assert_eq!(r.code, 1, "{}", r.stdout);
    assert!(r.stdout.contains("perfectness fails at sector (1,1)"));
    assert!(r.stdout.contains("for every even-like a != 0"));
}

#[test]
fn counterexample_loads_and_is_not_perfect() {
    let doc = docs::read_document(&data("counterexample-n2.json")).unwrap();
    let l = docs::algebra_from(doc.algebra()).unwrap();
    assert_eq!((l.rank(), l.dim()), (2, 1));
    assert_eq!(l.degree(0).bits(), vec![1, 1]);
    let r = colorgns(&["check-perfect", s(&data("counterexample-n2.json"))]);
    assert_eq!(r.code, 1);
}

#[test]
fn bundled_gl11_loads_with_four_elements() {
    let doc = docs::read_document(&data("gl11.json")).unwrap();
    assert!(matches!(doc, Document::Algebra(_)));
    let l = docs::algebra_from(doc.algebra()).unwrap();
    assert_eq!(l.dim(), 4);
    assert!(check_axioms(&l, 1e-12).passed);
    assert_eq!(colorgns(&["check-algebra", s(&data("gl11.json"))]).code, 0);
}

#[test]
fn malformed_degree_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(data("gl11.json")).unwrap()).unwrap();
    v["basis"][2]["degree"] = serde_json::json!([1, 0]);
    let p = dir.path().join("bad.json");
    std::fs::write(&p, v.to_string()).unwrap();
    let r = colorgns(&["check-algebra", s(&p)]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("parse error: algebra.basis[2].degree has 2 entries, rank is 1"), "{}", r.stdout);
}

#[test]
fn schema_violations_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("nojson.json", "{ not json".to_string()),
        ("unknown.json", r#"{"schema": "colorgns/other/v1", "rank": 1}"#.to_string()),
        ("noschema.json", r#"{"rank": 1}"#.to_string()),
        (
            "extra.json",
            r#"{"schema": "colorgns/algebra/v1", "rank": 1, "basis": [], "brackets": [], "colour": 1}"#.to_string(),
        ),
        (
            "label.json",
            r#"{"schema": "colorgns/algebra/v1", "rank": 1, "basis": [{"label": "x", "degree": [0]}],
                "brackets": [{"left": "x", "right": "q", "result": "x", "coeff": 1.0}]}"#
                .to_string(),
        ),
    ];
    for (name, text) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        let r = colorgns(&["check-algebra", s(&p)]);
        assert_eq!(r.code, 2, "{name}: {}", r.stdout);
    }
    let r = colorgns(&["check-algebra", "/nonexistent/file.json"]);
    assert_eq!(r.code, 2);
}

#[test]
fn axiom_violation_fails_loading_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(data("gl11.json")).unwrap()).unwrap();
    let c = v["brackets"][0]["coeff"].as_f64().unwrap();
    v["brackets"][0]["coeff"] = (2.0 * c).into();
    let p = dir.path().join("broken.json");
    std::fs::write(&p, v.to_string()).unwrap();

    let r = colorgns(&["check-perfect", s(&p)]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("axiom failure"));
    assert!(r.stdout.contains("worst triple"), "{}", r.stdout);
    assert_eq!(colorgns(&["check-perfect", s(&p), "--skip-validate"]).code, 0);
    // The checker itself reports the violation as a failed check.
    assert_eq!(colorgns(&["check-algebra", s(&p)]).code, 1);
}

#[test]
fn glv_rank_two_has_sixteen_elements() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gl.json");
    let r = colorgns(&["generate", "glV", "--n", "2", "--dims", "1,1,1,1", "-o", s(&p), "--format", "json"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.json()["details"]["basis_elements"], 16);
    let doc = docs::read_document(&p).unwrap();
    assert_eq!(doc.algebra().basis.len(), 16);
    assert_eq!(colorgns(&["generate", "glV", "--n", "2", "--dims", "1,1", "-o", s(&p)]).code, 2);
}

#[test]
fn counterexample_generator_is_one_element_at_11() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ce.json");
    assert_eq!(colorgns(&["generate", "counterexample-n2", "-o", s(&p)]).code, 0);
    let doc = docs::read_document(&p).unwrap();
    let a = doc.algebra();
    assert_eq!(a.basis.len(), 1);
    assert_eq!(a.basis[0].degree, vec![1, 1]);
    assert_eq!(std::fs::read_to_string(&p).unwrap(), std::fs::read_to_string(data("counterexample-n2.json")).unwrap());
}

#[test]
fn random_rep_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    assert_eq!(colorgns(&["generate", "random-rep", "--seed", "7", "-o", s(&a)]).code, 0);
    assert_eq!(colorgns(&["generate", "random-rep", "--seed", "7", "-o", s(&b)]).code, 0);
    assert_eq!(colorgns(&["generate", "random-rep", "--seed", "8", "-o", s(&c)]).code, 0);
    let (ta, tb, tc) = (
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        std::fs::read(&c).unwrap(),
    );
    assert_eq!(ta, tb);
    assert_ne!(ta, tc);
    assert_eq!(colorgns(&["check-rep", s(&a)]).code, 0);
}

#[test]
fn bundled_files_match_their_generators() {
    let dir = tempfile::tempdir().unwrap();
    for (name, file, extra) in [
        ("clifford-n1", "clifford-n1.json", &[][..]),
        ("glV", "gl11.json", &["--n", "1", "--dims", "1,1"][..]),
    ] {
        let p = dir.path().join(file);
        let mut args = vec!["generate", name, "-o", s(&p)];
        args.extend_from_slice(extra);
        assert_eq!(colorgns(&args).code, 0);
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(data(file)).unwrap(), "{file}");
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    assert_eq!(colorgns(&["generate", "random-rep", "--seed", "11", "-o", s(&p)]).code, 0);
    let a = colorgns(&["gns-roundtrip", s(&p), "--format", "json"]);
    let b = colorgns(&["gns-roundtrip", s(&p), "--format", "json"]);
    assert_eq!(a.code, 0, "{}", a.stdout);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reconstruction_reloads_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec.json");
    let r = colorgns(&["gns-construct", s(&data("clifford-n1.json")), "-o", s(&rec), "--format", "json"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = r.json();
    assert_eq!(v["details"]["dimension"], 2);
    let retained = v["details"]["spectrum"]["retained"].as_array().unwrap();
    assert_eq!(retained.len(), 2);
    assert_eq!(colorgns(&["check-rep", s(&rec)]).code, 0);
    assert_eq!(colorgns(&["gns-roundtrip", s(&rec)]).code, 0);
}

#[test]
fn exported_table_reproduces_the_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    let rec = dir.path().join("rec.json");
    let first = colorgns(&[
        "gns-construct",
        s(&data("clifford-n1.json")),
        "--export-table",
        s(&table),
        "--format",
        "json",
    ]);
    assert_eq!(first.code, 0, "{}", first.stdout);
    let second = colorgns(&["gns-construct", s(&table), "-o", s(&rec), "--format", "json"]);
    assert_eq!(second.code, 0, "{}", second.stdout);
    let (a, b) = (first.json(), second.json());
    assert_eq!(a["details"]["dimension"], b["details"]["dimension"]);
    assert_eq!(a["details"]["ranks"], b["details"]["ranks"]);
    assert_eq!(colorgns(&["check-pd", s(&table)]).code, 0);
    assert_eq!(colorgns(&["check-rep", s(&rec)]).code, 0);
}

#[test]
fn table_miss_fails_without_crashing() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    assert_eq!(colorgns(&["gns-construct", s(&data("clifford-n1.json")), "--export-table", s(&table)]).code, 0);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    v["entries"].as_array_mut().unwrap().truncate(1);
    std::fs::write(&table, v.to_string()).unwrap();
    let r = colorgns(&["check-pd", s(&table)]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("value table has no entry"));
}

#[test]
fn positive_definiteness_of_a_coefficient() {
    let r = colorgns(&["check-pd", s(&data("clifford-n1.json")), "--format", "json"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert!(v["reports"][0]["notes"][0].as_str().unwrap().contains("verified on sample set"));
    assert_eq!(colorgns(&["check-pd", s(&data("gl11.json"))]).code, 2);
}

#[test]
fn extension_of_a_restricted_rep_recovers_it() {
    let dir = tempfile::tempdir().unwrap();
    let r = catalog::random_perfect_rep(&mut catalog::rng(5), 6);
    let pre = dir.path().join("pre.json");
    let ext = dir.path().join("ext.json");
    let doc = docs::partial_rep_doc(&r.restrict());
    assert!(doc.rho.iter().any(|e| e.matrix.is_none()));
    docs::write_json(&pre, &doc).unwrap();
    assert_eq!(colorgns(&["check-prerep", s(&pre)]).code, 0);
    let out = colorgns(&["stability-extend", s(&pre), "-o", s(&ext)]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(colorgns(&["check-rep", s(&ext)]).code, 0);
    let Document::Rep(back) = docs::read_document(&ext).unwrap() else { panic!() };
    let (back, _) = docs::unitary_rep_from(&back).unwrap();
    for (a, b) in back.rho.iter().zip(&r.rho) {
        assert!(rel_residual(&a.matrix, &b.matrix) < 1e-9);
    }
}

#[test]
fn null_and_missing_rho_entries_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let Document::Rep(mut rep) = docs::read_document(&data("counterexample-n2.json")).unwrap() else { panic!() };
    let p = dir.path().join("p.json");
    docs::write_json(&p, &rep).unwrap();
    let r = colorgns(&["check-rep", s(&p)]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("rho('w') is null"));
    rep.rho.clear();
    docs::write_json(&p, &rep).unwrap();
    let r = colorgns(&["check-prerep", s(&p)]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("no entry for basis element 'w'"));
}

#[test]
fn twist_verdicts() {
    let r = colorgns(&["twist-rep", s(&data("clifford-n1.json")), "--mask", "0"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let r = colorgns(&["twist-rep", s(&data("clifford-n1.json")), "--mask", "1"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("original passes: true, twisted passes: false"));
}

#[test]
fn config_from_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "rank = 2\nformat = \"json\"\n").unwrap();
    let r = colorgns_env(&["check-grading"], &[("COLORGNS_CONFIG", &cfg)]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.json()["reports"][0]["checks"][0]["name"].as_str().unwrap().contains("rank 2"));
    let r = colorgns_env(&["check-grading", "--n", "1", "--format", "text"], &[("COLORGNS_CONFIG", &cfg)]);
    assert!(r.stdout.contains("rank 1, 4 pairs"));
    let r = colorgns(&["check-grading", "--config", s(&cfg)]);
    assert_eq!(r.code, 0);
    // A file rank that disagrees with the input is rejected.
    let r = colorgns_env(&["check-rep", s(&data("clifford-n1.json"))], &[("COLORGNS_CONFIG", &cfg)]);
    assert_eq!(r.code, 2);

    std::fs::write(&cfg, "tol = -1.0\n").unwrap();
    assert_eq!(colorgns(&["check-grading", "--n", "1", "--config", s(&cfg)]).code, 2);
    std::fs::write(&cfg, "colour = 1\n").unwrap();
    assert_eq!(colorgns(&["check-grading", "--n", "1", "--config", s(&cfg)]).code, 2);
}

#[test]
fn tolerance_flag_reaches_the_report() {
    let r = colorgns(&["check-rep", s(&data("clifford-n1.json")), "--tol", "1e-3", "--format", "json"]);
    assert_eq!(r.code, 0);
    let tols: Vec<f64> = checks(&r.json())
        .iter()
        .map(|c| c["tolerance"].as_f64().unwrap())
        .filter(|&t| t > 0.0)
        .collect();
    assert!(!tols.is_empty());
    assert!(tols.iter().all(|&t| t == 1e-3));
}

#[test]
fn batch_runs_in_order_with_worst_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch.toml");
    let clifford = data("clifford-n1.json");
    let ce = data("counterexample-n2.json");
    std::fs::write(
        &batch,
        format!(
            "[[task]]\nargs = [\"check-grading\", \"--n\", \"2\"]\n\
             [[task]]\nargs = [\"stability-extend\", {:?}]\n\
             [[task]]\nargs = [\"gns-roundtrip\", {:?}]\n\
             [[task]]\nargs = [\"check-grading\"]\n",
            s(&ce),
            s(&clifford)
        ),
    )
    .unwrap();
    let r = colorgns(&["batch", s(&batch), "--format", "json"]);
    let v = r.json();
    let got: Vec<(String, i64)> = v["tasks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["command"].as_str().unwrap().to_string(), t["exit_code"].as_i64().unwrap()))
        .collect();
    assert_eq!(
        got,
        vec![
            ("check-grading".to_string(), 0),
            ("stability-extend".to_string(), 1),
            ("gns-roundtrip".to_string(), 0),
            ("check-grading".to_string(), 2),
        ]
    );
    assert_eq!(r.code, 2);
    // Session flags on the batch reach every task.
    let r = colorgns(&["batch", s(&batch), "--n", "2"]);
    assert_eq!(r.code, 2, "check-rep of a rank 1 file under n = 2 is an input error");
}

#[test]
fn malformed_batches_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch.toml");
    for text in [
        "[[task]]\nargs = [\"no-such-command\"]\n",
        "[[task]]\nargs = [\"batch\", \"x.toml\"]\n",
        "[[task]]\ncommand = \"check-grading\"\n",
    ] {
        std::fs::write(&batch, text).unwrap();
        let r = colorgns(&["batch", s(&batch)]);
        assert_eq!(r.code, 2, "{text}: {}", r.stdout);
    }
}

#[test]
fn shipped_schemas_name_the_document_kinds() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas");
    for (file, schema) in [
        ("algebra.schema.json", docs::ALGEBRA_SCHEMA),
        ("representation.schema.json", docs::REP_SCHEMA),
        ("table.schema.json", docs::TABLE_SCHEMA),
        ("report.schema.json", docs::REPORT_SCHEMA),
    ] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap();
        assert_eq!(v["properties"]["schema"]["const"], schema, "{file}");
    }
}
