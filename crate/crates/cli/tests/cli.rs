use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> String {
    root().join("corpus").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ilwb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn load_schema(name: &str) -> Value {
    let path = root().join("schemas").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    inline_refs(&mut v);
    v
}

/// Replaces `{"$ref": "x.schema.json"}` with the referenced document.
fn inline_refs(v: &mut Value) {
    match v {
        Value::Object(map) => {
            if let Some(Value::String(r)) = map.get("$ref") {
                if r.ends_with(".schema.json") {
                    let mut inner = load_schema(r);
                    if let Value::Object(m) = &mut inner {
                        m.remove("$schema");
                    }
                    *v = inner;
                    return;
                }
            }
            for x in map.values_mut() {
                inline_refs(x);
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(inline_refs),
        _ => {}
    }
}

fn assert_schema(name: &str, instance: &Value) {
    let schema = load_schema(name);
    let compiled = JSONSchema::compile(&schema).expect("schema compiles");
    if let Err(errors) = compiled.validate(instance) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name}: {msgs:?}");
    };
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn check_theory_output() {
    let out = run(&["check-theory", &corpus("graph.thy")]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("check-theory.schema.json", &v);
    assert_eq!(v["relations"][0]["name"], "E");
    assert_eq!(v["relations"][0]["arity"], 2);
    assert_eq!(v["coherent"], true);
}

#[test]
fn check_theory_reports_parse_errors() {
    let out = run(&["check-theory", &corpus("bad.thy")]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("arity"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn models_graph_cap_two() {
    let out = run(&["models", "--theory", &corpus("graph.thy"), "--cap", "2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("models.schema.json", &v);
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn eval_on_path() {
    let out = run(&[
        "eval",
        "--theory",
        &corpus("graph.thy"),
        "--model",
        &corpus("p2.json"),
        "--formula",
        "exists y. E(x,y)",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("eval.schema.json", &v);
    assert_eq!(v["context"], serde_json::json!(["x"]));
    assert_eq!(v["tuples"], serde_json::json!([[0], [1], [2]]));
}

#[test]
fn eval_rejects_unknown_relation() {
    let out = run(&[
        "eval",
        "--theory",
        &corpus("graph.thy"),
        "--model",
        &corpus("p2.json"),
        "--formula",
        "Q(x)",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn morleyize_output() {
    let out = run(&[
        "morleyize",
        "--theory",
        &corpus("graph.thy"),
        "--fragment",
        &corpus("graph_fragment.txt"),
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("morleyize.schema.json", &v);
    assert!(v["theory"].as_str().unwrap().contains("language"));
}

#[test]
fn morleyize_text_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let side = dir.path().join("symbols.json");
    let out = run(&[
        "--format",
        "text",
        "morleyize",
        "--theory",
        &corpus("graph.thy"),
        "--fragment",
        &corpus("graph_fragment.txt"),
        "--sidecar",
        side.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.starts_with("language"));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert!(sidecar.as_object().is_some_and(|m| !m.is_empty()) || sidecar.as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn interp_apply_complete_graph() {
    let out = run(&[
        "interp-apply",
        "--interp",
        &corpus("complete_graph.json"),
        "--model",
        &corpus("order3.json"),
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("interp-apply.schema.json", &v);
    assert_eq!(v["model"]["size"], 3);
    assert_eq!(v["model"]["relations"]["E"].as_array().unwrap().len(), 6);
}

#[test]
fn interp_apply_rejects_invalid_interpretation() {
    let out = run(&[
        "interp-apply",
        "--interp",
        &corpus("directed.json"),
        "--model",
        &corpus("order3.json"),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn define_synth_descriptor() {
    let out = run(&[
        "define-synth",
        "--theory",
        &corpus("decidable_graph.thy"),
        "--target",
        &corpus("isolated_vertices.json"),
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("define-synth.schema.json", &v);
    assert_eq!(v["verified"], true);
}

#[test]
fn define_synth_points() {
    let out = run(&[
        "define-synth",
        "--theory",
        &corpus("decidable_graph.thy"),
        "--target",
        &corpus("k2_points.json"),
        "--cap",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("define-synth.schema.json", &v);
    assert_eq!(v["verified"], true);
}

#[test]
fn define_synth_rejects_non_invariant() {
    let out = run(&[
        "define-synth",
        "--theory",
        &corpus("decidable_graph.thy"),
        "--target",
        &corpus("k2_half.json"),
        "--cap",
        "2",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn groupoid_dump_with_sort() {
    let out = run(&[
        "groupoid-dump",
        "--theory",
        &corpus("graph.thy"),
        "--sort",
        &corpus("edge_sort.json"),
        "--cap",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("groupoid-dump.schema.json", &v);
    assert!(v.get("action").is_some());
}

#[test]
fn verify_vaught_cap_two() {
    let out = run(&["verify", "--suite", "vaught", "--cap", "2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("verify.schema.json", &v);
    assert_eq!(v["failed"], 0);
}

#[test]
fn verify_morley_counts() {
    let out = run(&["verify", "--suite", "morley", "--cap", "3"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("verify.schema.json", &v);
    let details: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["detail"].as_str().unwrap())
        .collect();
    assert!(details.iter().any(|d| d.contains("12 = 12")), "{details:?}");
}

#[test]
fn verify_all_cap_zero() {
    let out = run(&["verify", "--suite", "all", "--cap", "0"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_schema("verify.schema.json", &v);
    assert_eq!(v["failed"], 0);
}

#[test]
fn verify_text_format() {
    let out = run(&["--format", "text", "verify", "--suite", "groupoid", "--cap", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS ")));
}

#[test]
fn big_caps_need_the_flag() {
    let out = run(&["models", "--theory", &corpus("graph.thy"), "--cap", "5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn budget_exceeded_exit_code() {
    let out = run(&["verify", "--suite", "groupoid", "--cap", "4", "--budget", "100"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--suite", "nope"])), 2);
    assert_eq!(code(&run(&["models", "--bogus"])), 2);
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ilwb"))
        .args(["verify", "--suite", "groupoid", "--cap", "2"])
        .env("ILWB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let bad = Command::new(env!("CARGO_BIN_EXE_ilwb"))
        .args(["verify", "--suite", "groupoid", "--cap", "2"])
        .env("ILWB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn corpus_theories_match_builtins() {
    use ilwb::syntax::{parse_theory, print_theory};
    use ilwb::verify::{decidable_graph_theory, graph_theory, linear_order_theory};
    for (file, builtin) in [
        ("graph.thy", graph_theory()),
        ("decidable_graph.thy", decidable_graph_theory()),
        ("linear_order.thy", linear_order_theory()),
    ] {
        let text = std::fs::read_to_string(corpus(file)).unwrap();
        let parsed = parse_theory(&text).unwrap();
        assert_eq!(print_theory(&parsed), print_theory(&builtin), "{file}");
    }
}
