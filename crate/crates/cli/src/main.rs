use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ilwb::definability::{
    evaluate_translates, point_descriptor, synthesize_invariant_borel, BorelDescriptor, Synthesizer,
};
use ilwb::groupoid::{build_fibered_sort, build_groupoid_slice, PointSet};
use ilwb::interp::{apply_with_carrier, validate_interpretation, Interpretation};
use ilwb::morley::morleyize;
use ilwb::pretopos::{home_power, ImaginarySort};
use ilwb::semantics::{enumerate_models, eval_formula, FiniteModel};
use ilwb::syntax::{
    fragment_close, free_variable_names, parse_formula, parse_theory, print_formula, print_theory, Theory,
};
use ilwb::verify::{run_verify_suite, Suite, VerifyConfig};
use ilwb::Error;

const BIG_CAP: usize = 5;

#[derive(Parser)]
#[command(
    name = "ilwb",
    version,
    about = "Finite-slice tools for countable infinitary theories"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Bounds {
    /// Largest model size in the slice.
    #[arg(long, default_value_t = 3)]
    cap: usize,
    /// Largest number of morphisms a slice may hold.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Allow caps of 5 and above.
    #[arg(long)]
    i_know_this_is_big: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a theory file and summarize it.
    CheckTheory { file: PathBuf },
    /// List the models of a theory up to the cap.
    Models {
        #[arg(long)]
        theory: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Evaluate a formula in a model; free variables in order of appearance
    /// unless `--vars` is given.
    Eval {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// Morleyize a theory over the fragment generated by its axioms and the
    /// formulas in `--fragment` (one per line).
    Morleyize {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        fragment: Option<PathBuf>,
        /// Where to write the symbol table in text mode.
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Apply an interpretation to a model of its target theory.
    InterpApply {
        #[arg(long)]
        interp: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Synthesize a formula defining an invariant set of points.
    DefineSynth {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Dump the groupoid slice, with the action on a sort if given.
    GroupoidDump {
        #[arg(long)]
        theory: PathBuf,
        #[arg(long)]
        sort: Option<PathBuf>,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        bounds: Bounds,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Lib(e)
    }
}

type Outcome = Result<Output, Failure>;

struct Output {
    json: Value,
    text: String,
    /// Exit with 1 after printing.
    failed: bool,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_theory(path: &Path) -> Result<Theory, Failure> {
    parse_theory(&read(path)?).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

fn check_cap(b: &Bounds) -> Result<(), Failure> {
    if b.cap >= BIG_CAP && !b.i_know_this_is_big {
        return Err(Failure::Usage(format!(
            "cap {} needs --i-know-this-is-big: model counts grow like n! times the number of structures",
            b.cap
        )));
    }
    if b.budget == 0 {
        return Err(Failure::Usage("budget must be positive".into()));
    }
    Ok(())
}

fn check_theory(file: &Path) -> Outcome {
    let t = load_theory(file)?;
    let lang = t.language();
    let json = json!({
        "relations": lang.relations().iter().map(|r| json!({"name": r.name, "arity": r.arity})).collect::<Vec<_>>(),
        "coherent_axioms": t.coherent_axioms().len(),
        "sentences": t.sentences().len(),
        "coherent": t.is_coherent(),
        "decidable": lang.witness().is_some(),
    });
    Ok(Output {
        text: print_theory(&t),
        json,
        failed: false,
    })
}

fn models(theory: &Path, b: &Bounds) -> Outcome {
    check_cap(b)?;
    let t = load_theory(theory)?;
    let ms = enumerate_models(&t, b.cap)?;
    let arr: Vec<Value> = ms.iter().map(FiniteModel::to_json).collect();
    let text = arr.iter().map(|m| format!("{m}\n")).collect();
    Ok(Output {
        json: Value::Array(arr),
        text,
        failed: false,
    })
}

fn eval(theory: &Path, model: &Path, formula: &str, vars: Option<Vec<String>>) -> Outcome {
    let t = load_theory(theory)?;
    let lang = t.language();
    let m = FiniteModel::from_json(&read_json(model)?, lang)?;
    let names = match vars {
        Some(v) => v,
        None => free_variable_names(formula, lang)?,
    };
    let f = parse_formula(formula, lang, &names)?;
    let tuples: Vec<Vec<usize>> = eval_formula(&f, &m)?.iter().collect();
    let text = tuples
        .iter()
        .map(|t| format!("({})\n", t.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    Ok(Output {
        json: json!({"context": names, "tuples": tuples}),
        text,
        failed: false,
    })
}

fn morley(theory: &Path, fragment: Option<&Path>, sidecar: Option<&Path>, format: Format) -> Outcome {
    let t = load_theory(theory)?;
    let mut seed = t.axiom_formulas();
    if let Some(p) = fragment {
        for line in read(p)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let names = free_variable_names(line, t.language())?;
            seed.push(parse_formula(line, t.language(), &names)?);
        }
    }
    let res = morleyize(&t, &fragment_close(seed, t.language()))?;
    let text = print_theory(res.target());
    if let (Some(p), Format::Text) = (sidecar, format) {
        let body = serde_json::to_string_pretty(&res.sidecar_json()).expect("json");
        fs::write(p, body + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    Ok(Output {
        json: json!({"theory": text, "symbols": res.sidecar_json()}),
        text,
        failed: false,
    })
}

fn load_interpretation(path: &Path) -> Result<Interpretation, Failure> {
    let v = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let theory = |key: &str| -> Result<Theory, Failure> {
        let rel = v
            .get(key)
            .and_then(Value::as_str)
            .ok_or_else(|| Failure::Usage(format!("{}: needs a `{key}` theory path", path.display())))?;
        load_theory(&dir.join(rel))
    };
    Ok(Interpretation::from_json(&v, theory("source")?, theory("target")?)?)
}

fn interp_apply(interp: &Path, model: &Path, b: &Bounds) -> Outcome {
    check_cap(b)?;
    let f = load_interpretation(interp)?;
    if let Some(v) = validate_interpretation(&f, b.cap)? {
        return Err(Failure::Verification(format!(
            "interpretation is invalid: {} in target model {} at {:?}",
            v.check, v.model, v.tuple
        )));
    }
    let m = FiniteModel::from_json(&read_json(model)?, f.target().language())?;
    let (out, carrier) = apply_with_carrier(&f, &m)?;
    Ok(Output {
        text: format!("{}\n", out.to_json()),
        json: json!({"model": out.to_json(), "carrier": carrier.to_json()}),
        failed: false,
    })
}

fn define_synth(theory: &Path, target: &Path, b: &Bounds) -> Outcome {
    check_cap(b)?;
    let t = load_theory(theory)?;
    let lang = t.language();
    let spec = read_json(target)?;
    let slice = build_groupoid_slice(&t, b.cap, b.budget)?;
    let (desc, n) = if let Some(points) = spec.get("points").and_then(Value::as_array) {
        let mut parts = Vec::new();
        let mut arity = spec.get("arity").and_then(Value::as_u64).map(|a| a as usize);
        for p in points {
            let m = FiniteModel::from_json(
                p.get("model")
                    .ok_or_else(|| Failure::Usage("point needs `model`".into()))?,
                lang,
            )?;
            let tuple: Vec<usize> = serde_json::from_value(p.get("tuple").cloned().unwrap_or(Value::Null))
                .map_err(|e| Failure::Usage(format!("point tuple: {e}")))?;
            if *arity.get_or_insert(tuple.len()) != tuple.len() {
                return Err(Failure::Usage("points have different arities".into()));
            }
            if m.size() > b.cap || tuple.iter().any(|&e| e >= m.size()) {
                return Err(Failure::Usage("point lies outside the slice".into()));
            }
            parts.push(point_descriptor(&m, &tuple, lang)?);
        }
        (BorelDescriptor::Union(parts), arity.unwrap_or(0))
    } else if let Some(d) = spec.get("descriptor") {
        let d = BorelDescriptor::from_json(d, lang)?;
        let n = match (d.arity()?, spec.get("arity").and_then(Value::as_u64)) {
            (Some(a), _) => a,
            (None, Some(a)) => a as usize,
            (None, None) => return Err(Failure::Usage("descriptor without leaves needs `arity`".into())),
        };
        (d, n)
    } else {
        return Err(Failure::Usage("target needs `points` or `descriptor`".into()));
    };
    let fs = build_fibered_sort(&home_power(n), &slice)?;
    let want: PointSet = desc.points(&fs, &slice)?;
    let mut synth = Synthesizer::new(lang, b.cap);
    let phi = synthesize_invariant_borel(&mut synth, &desc, n, &fs, &slice)?;
    let got = evaluate_translates(std::slice::from_ref(&phi), &[], &fs, &slice)?.remove(0);
    let names = ilwb::syntax::default_names(n);
    let printed = print_formula(&phi, &names);
    let verified = got == want;
    Ok(Output {
        text: format!("{printed}\n"),
        json: json!({
            "context": names,
            "formula": printed,
            "coherent": phi.is_coherent(),
            "points": want.len(),
            "verified": verified,
        }),
        failed: !verified,
    })
}

fn groupoid_dump(theory: &Path, sort: Option<&Path>, b: &Bounds) -> Outcome {
    check_cap(b)?;
    let t = load_theory(theory)?;
    let slice = build_groupoid_slice(&t, b.cap, b.budget)?;
    let mut json = slice.to_json();
    if let Some(p) = sort {
        let a = ImaginarySort::from_json(&read_json(p)?, t.language())?;
        json["action"] = build_fibered_sort(&a, &slice)?.action_json();
    }
    let text = format!(
        "{} objects, {} morphisms, {} orbits\n",
        slice.models().len(),
        slice.morphisms().len(),
        slice.model_orbits().len()
    );
    Ok(Output {
        json,
        text,
        failed: false,
    })
}

fn verify(suite: &str, seed: u64, b: &Bounds) -> Outcome {
    check_cap(b)?;
    let suite: Suite = suite.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let cfg = VerifyConfig {
        cap: b.cap,
        budget: b.budget,
        seed,
    };
    let report = run_verify_suite(&cfg, suite)?;
    Ok(Output {
        text: report.to_text(),
        failed: !report.all_passed(),
        json: report.to_json(),
    })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("ILWB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::Usage(format!("ILWB_THREADS must be a number, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::CheckTheory { file } => check_theory(&file),
        Command::Models { theory, bounds } => models(&theory, &bounds),
        Command::Eval {
            theory,
            model,
            formula,
            vars,
        } => eval(&theory, &model, &formula, vars),
        Command::Morleyize {
            theory,
            fragment,
            sidecar,
        } => morley(&theory, fragment.as_deref(), sidecar.as_deref(), cli.format),
        Command::InterpApply { interp, model, bounds } => interp_apply(&interp, &model, &bounds),
        Command::DefineSynth { theory, target, bounds } => define_synth(&theory, &target, &bounds),
        Command::GroupoidDump { theory, sort, bounds } => groupoid_dump(&theory, sort.as_deref(), &bounds),
        Command::Verify { suite, seed, bounds } => verify(&suite, seed, &bounds),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("json")),
                Format::Text => print!("{}", out.text),
            }
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::BudgetExceeded { .. } => 3,
                Error::NotInvariant(_) | Error::InvalidInterpretation(_) => 1,
                _ => 2,
            })
        }
    }
}
