//! Verification suites: exhaustive and seeded checks over the slice of models
//! up to a cap, collected into a deterministic report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coding::{interpret_function_in_model, interpret_sort_in_model, transport_along_iso, InterpretedSort};
use crate::definability::{
    check_borel_translate, evaluate_translates, point_descriptor, synthesize_invariant_open, BasicOpen,
    BorelDescriptor, Synthesizer,
};
use crate::error::{Error, Result};
use crate::groupoid::{
    build_fibered_sort, build_groupoid_slice, compose_sets, enumerate_isomorphisms, is_equivariant, models_satisfying,
    morphism_set, restrict_source, restrict_target, same_equality_type, vaught_transform, FiberedSort, GroupoidSlice,
    MorphismSet, PointSet, VaughtKind,
};
use crate::interp::{
    apply_to_iso, apply_to_model, compose_interpretations, from_hmm_data, sequence_bijection, sequence_sort_embedding,
    validate_interpretation, zeta_components, Interpretation,
};
use crate::morley::{expand_model, morleyize, reduct_model};
use crate::pretopos::{
    compose_functions, equalizer_sort, home_sort, identity_function, product_sort, sort_from_formula,
    validate_function_on, validate_sort_on, Calculus, DefinableFunction, DefinableRelation, ImaginarySort,
};
use crate::semantics::{enumerate_models, eval_formula, is_model, Evaluator, FiniteModel};
use crate::syntax::{default_names, fragment_close, parse_formula, parse_theory, Formula, Language, Node, Theory};

/// Simple graphs.
pub const GRAPH: &str = "language { E/2; }
theory {
  axiom forall x. E(x,x) => false;
  axiom forall x y. E(x,y) => E(y,x);
}
";

/// Simple graphs with inequality named by `N`.
pub const DECIDABLE_GRAPH: &str = "language { E/2; N/2; }
decidable via N(x,y);
theory {
  axiom forall x. E(x,x) => false;
  axiom forall x y. E(x,y) => E(y,x);
  axiom forall x. N(x,x) => false;
  axiom forall x y. true => or(x = y, N(x,y));
}
";

/// Strict linear orders.
pub const LINEAR_ORDER: &str = "language { L/2; }
decidable via or(L(x,y), L(y,x));
theory {
  axiom forall x. L(x,x) => false;
  axiom forall x y z. and(L(x,y), L(y,z)) => L(x,z);
  axiom forall x y. true => or(L(x,y), x = y, L(y,x));
}
";

pub fn graph_theory() -> Theory {
    parse_theory(GRAPH).expect("built-in corpus parses")
}

pub fn decidable_graph_theory() -> Theory {
    parse_theory(DECIDABLE_GRAPH).expect("built-in corpus parses")
}

pub fn linear_order_theory() -> Theory {
    parse_theory(LINEAR_ORDER).expect("built-in corpus parses")
}

fn parse(t: &Theory, text: &str, n: usize) -> Formula {
    parse_formula(text, t.language(), &default_names(n)).expect("built-in formula parses")
}

/// Graphs from linear orders: `F(X) = X`, `F(E) = L(x,y) ∨ L(y,x)`.
pub fn complete_graph_interpretation() -> Interpretation {
    let o = linear_order_theory();
    let e = parse(&o, "or(L(x,y), L(y,x))", 2);
    Interpretation::new(graph_theory(), o, home_sort(), [("E".to_string(), vec![e])].into())
        .expect("built-in interpretation")
}

/// The line graph: vertices are unordered edges, adjacent when they share
/// exactly one endpoint.
pub fn line_graph_interpretation() -> Interpretation {
    let g = graph_theory();
    let edges = ImaginarySort::new(
        vec![parse(&g, "E(x,y)", 2)],
        vec![vec![parse(
            &g,
            "and(E(x,y), or(and(x = z, y = u), and(x = u, y = z)))",
            4,
        )]],
    )
    .expect("built-in sort");
    let adj = parse(
        &g,
        "and(E(x,y), E(z,u), or(x = z, x = u, y = z, y = u), not or(and(x = z, y = u), and(x = u, y = z)))",
        4,
    );
    Interpretation::new(g.clone(), g, edges, [("E".to_string(), vec![adj])].into()).expect("built-in interpretation")
}

fn random_node<R: Rng>(rng: &mut R, lang: &Language, ctx: usize, depth: usize, boolean: bool) -> Node {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        let rels: Vec<_> = lang.relations().iter().filter(|r| ctx > 0 || r.arity == 0).collect();
        let roll = rng.gen_range(0..10);
        return if roll < 6 && !rels.is_empty() {
            let r = rels[rng.gen_range(0..rels.len())];
            Node::atom(r.name.clone(), (0..r.arity).map(|_| rng.gen_range(0..ctx)).collect())
        } else if roll < 8 && ctx > 0 {
            Node::eq(rng.gen_range(0..ctx), rng.gen_range(0..ctx))
        } else if roll < 9 {
            Node::truth()
        } else {
            Node::falsity()
        };
    }
    let kinds = if boolean { 5 } else { 3 };
    match rng.gen_range(0..kinds) {
        0 => Node::and(
            (0..rng.gen_range(2..=3))
                .map(|_| random_node(rng, lang, ctx, depth - 1, boolean))
                .collect(),
        ),
        1 => Node::or(
            (0..rng.gen_range(2..=3))
                .map(|_| random_node(rng, lang, ctx, depth - 1, boolean))
                .collect(),
        ),
        2 => Node::exists(random_node(rng, lang, ctx + 1, depth - 1, boolean)),
        3 => Node::not(random_node(rng, lang, ctx, depth - 1, boolean)),
        _ => Node::forall(random_node(rng, lang, ctx + 1, depth - 1, boolean)),
    }
}

/// A random formula built from atoms, equalities, `⊤`, `⊥`, `∧`, `∨` and `∃`,
/// of depth at most `depth`.
pub fn random_coherent_formula<R: Rng>(rng: &mut R, lang: &Language, ctx: usize, depth: usize) -> Formula {
    Formula::new(ctx, random_node(rng, lang, ctx, depth, false)).expect("generated indices are in range")
}

/// As [`random_coherent_formula`], also using `¬` and `∀`.
pub fn random_formula<R: Rng>(rng: &mut R, lang: &Language, ctx: usize, depth: usize) -> Formula {
    Formula::new(ctx, random_node(rng, lang, ctx, depth, true)).expect("generated indices are in range")
}

/// A random descriptor over `⟦X¹⟧` whose basic opens use entries below `cap`
/// (`cap ≥ 1`).
pub fn random_borel_descriptor<R: Rng>(rng: &mut R, lang: &Language, cap: usize, depth: usize) -> BorelDescriptor {
    if depth == 0 || rng.gen_bool(0.35) {
        let l = rng.gen_range(0..=2);
        let psi = random_coherent_formula(rng, lang, l, 2);
        let f = (0..l).map(|_| rng.gen_range(0..cap)).collect();
        let d = vec![rng.gen_range(0..cap)];
        return BorelDescriptor::Open(BasicOpen::new(d, psi, f).expect("context matches"));
    }
    if rng.gen_bool(0.5) {
        BorelDescriptor::complement(random_borel_descriptor(rng, lang, cap, depth - 1))
    } else {
        BorelDescriptor::Union(
            (0..rng.gen_range(1..=3))
                .map(|_| random_borel_descriptor(rng, lang, cap, depth - 1))
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Morley,
    Pretopos,
    Groupoid,
    Vaught,
    Definability,
    Interp,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Morley,
        Suite::Pretopos,
        Suite::Groupoid,
        Suite::Vaught,
        Suite::Definability,
        Suite::Interp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Morley => "morley",
            Suite::Pretopos => "pretopos",
            Suite::Groupoid => "groupoid",
            Suite::Vaught => "vaught",
            Suite::Definability => "definability",
            Suite::Interp => "interp",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite {s}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub cap: usize,
    pub budget: u64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            cap: 3,
            budget: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: String,
    pub cap: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out.push_str(&format!(
            "suite {} cap {} seed {}: {} passed, {} failed\n",
            self.suite, self.cap, self.seed, self.passed, self.failed
        ));
        out
    }
}

type Outcome = std::result::Result<String, String>;

struct Checks {
    prefix: &'static str,
    out: Vec<Check>,
}

impl Checks {
    fn new(prefix: &'static str) -> Checks {
        Checks {
            prefix,
            out: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, outcome: Result<Outcome>) {
        let (passed, detail) = match outcome {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(e) => (false, format!("error: {e}")),
        };
        self.out.push(Check {
            name: format!("{}: {name}", self.prefix),
            passed,
            detail,
        });
    }
}

fn rng_for(seed: u64, suite: Suite) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((suite as u64 + 1) << 32))
}

/// Runs one suite (or all of them, in a fixed order). A slice that exceeds
/// the budget aborts the run with [`Error::BudgetExceeded`].
pub fn run_verify_suite(config: &VerifyConfig, suite: Suite) -> Result<Report> {
    let suites: Vec<Suite> = if suite == Suite::All {
        Suite::ALL.to_vec()
    } else {
        vec![suite]
    };
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(match s {
            Suite::Morley => morley_suite(config)?,
            Suite::Pretopos => pretopos_suite(config)?,
            Suite::Groupoid => groupoid_suite(config)?,
            Suite::Vaught => vaught_suite(config)?,
            Suite::Definability => definability_suite(config)?,
            Suite::Interp => interp_suite(config)?,
            Suite::All => unreachable!(),
        });
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    Ok(Report {
        suite: suite.name().to_string(),
        cap: config.cap,
        seed: config.seed,
        failed: checks.len() - passed,
        passed,
        checks,
    })
}

fn first_failure<T, F>(items: impl IntoIterator<Item = T>, mut f: F) -> Result<Option<String>>
where
    F: FnMut(T) -> Result<Option<String>>,
{
    for it in items {
        if let Some(msg) = f(it)? {
            return Ok(Some(msg));
        }
    }
    Ok(None)
}

fn outcome(fail: Option<String>, ok: String) -> Outcome {
    match fail {
        Some(f) => Err(f),
        None => Ok(ok),
    }
}

fn morley_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut c = Checks::new("morley");
    let g = graph_theory();
    let seed = [
        parse(&g, "E(x,y)", 2),
        parse(&g, "not E(x,y)", 2),
        parse(&g, "exists y. E(x,y)", 1),
    ];
    let fragment = fragment_close(g.axiom_formulas().into_iter().chain(seed), g.language());
    let res = morleyize(&g, &fragment)?;
    c.push(
        "target axioms are coherent",
        Ok(if res.target().is_coherent() {
            Ok(format!("{} axioms", res.target().coherent_axioms().len()))
        } else {
            Err("a sentence is not coherent".into())
        }),
    );
    let src = enumerate_models(&g, cfg.cap)?;
    let tgt = enumerate_models(res.target(), cfg.cap)?;
    c.push(
        "model counts agree",
        Ok(if src.len() == tgt.len() {
            Ok(format!("{} = {}", src.len(), tgt.len()))
        } else {
            Err(format!("{} source models, {} target models", src.len(), tgt.len()))
        }),
    );
    let expanded: Result<Vec<FiniteModel>> = src.iter().map(|m| expand_model(m, &res)).collect();
    c.push(
        "expansion then reduct is the identity",
        expanded.as_ref().map_err(Clone::clone).and_then(|ex| {
            let fail = first_failure(src.iter().zip(ex).enumerate(), |(i, (m, x))| {
                Ok((reduct_model(x, g.language())? != *m).then(|| format!("source model {i}")))
            })?;
            Ok(outcome(fail, format!("{} models", src.len())))
        }),
    );
    c.push(
        "expansions are exactly the target models",
        expanded.as_ref().map_err(Clone::clone).map(|ex| {
            let a: BTreeSet<&FiniteModel> = ex.iter().collect();
            let b: BTreeSet<&FiniteModel> = tgt.iter().collect();
            if a == b {
                Ok(format!("{} models", a.len()))
            } else {
                Err(format!(
                    "{} expansions, {} target models, {} shared",
                    a.len(),
                    b.len(),
                    a.intersection(&b).count()
                ))
            }
        }),
    );
    c.push(
        "fresh symbols agree with their formulas",
        expanded.as_ref().map_err(Clone::clone).and_then(|ex| {
            let fail = first_failure(fragment.iter(), |phi| {
                let atom = res.atom_for(phi)?;
                first_failure(src.iter().zip(ex).enumerate(), |(i, (m, x))| {
                    Ok((eval_formula(&atom, x)? != eval_formula(phi, m)?).then(|| format!("{phi} in model {i}")))
                })
            })?;
            Ok(outcome(fail, format!("{} formulas", fragment.len())))
        }),
    );
    Ok(c.out)
}

fn classes_of(rel: &DefinableRelation, sort: &InterpretedSort, ev: &mut Evaluator<'_>) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for (i, phi) in rel.pieces().iter().enumerate() {
        for t in ev.eval(phi)?.iter() {
            if let Some(c) = sort.class_of(i, &t) {
                out.insert(c);
            }
        }
    }
    Ok(out)
}

/// `A → A × A`, `x ↦ (x, x)`.
fn diagonal(a: &ImaginarySort) -> Result<(ImaginarySort, DefinableFunction)> {
    let (p, _, _) = product_sort(a, a);
    let ar = a.arities();
    let np = a.len();
    let graph = (0..np)
        .map(|i| {
            (0..np * np)
                .map(|k| {
                    let (j, l) = (k / np, k % np);
                    let n = ar[i];
                    let ctx = n + ar[j] + ar[l];
                    let xs: Vec<usize> = (0..n).collect();
                    let ys: Vec<usize> = (n..n + ar[j]).collect();
                    let zs: Vec<usize> = (n + ar[j]..ctx).collect();
                    let both: Vec<usize> = xs.iter().chain(&zs).copied().collect();
                    let first: Vec<usize> = xs.iter().chain(&ys).copied().collect();
                    Ok(Formula::conj(
                        ctx,
                        [
                            a.pieces()[i].weaken(ctx),
                            a.relation(i, j).substitute(&first, ctx)?,
                            a.relation(i, l).substitute(&both, ctx)?,
                        ],
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let f = DefinableFunction::new(a.clone(), p.clone(), graph)?;
    Ok((p, f))
}

fn maps_agree(f: &DefinableFunction, g: &DefinableFunction, models: &[FiniteModel]) -> Result<Option<usize>> {
    for (i, m) in models.iter().enumerate() {
        if interpret_function_in_model(f, m)? != interpret_function_in_model(g, m)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

const PRETOPOS_INSTANCES: usize = 20;

/// One random instance: sorts `A`, `B` from formulas, their product with its
/// projections, the diagonal of `A`, and three relations on `A`.
struct Instance {
    a: ImaginarySort,
    b: ImaginarySort,
    p: ImaginarySort,
    p1: DefinableFunction,
    p2: DefinableFunction,
    aa: ImaginarySort,
    q1: DefinableFunction,
    q2: DefinableFunction,
    delta: DefinableFunction,
    rels: [DefinableRelation; 3],
}

fn random_sort<R: Rng>(rng: &mut R, lang: &Language) -> ImaginarySort {
    let n = rng.gen_range(1..=2);
    sort_from_formula(&random_coherent_formula(rng, lang, n, 2))
}

fn random_instance<R: Rng>(rng: &mut R, lang: &Language) -> Result<Instance> {
    let a = random_sort(rng, lang);
    let b = random_sort(rng, lang);
    let (p, p1, p2) = product_sort(&a, &b);
    let (aa, q1, q2) = product_sort(&a, &a);
    let (_, delta) = diagonal(&a)?;
    let n = a.arities()[0];
    let mut rel = || {
        DefinableRelation::new(
            a.clone(),
            vec![Formula::conj(
                n,
                [a.pieces()[0].clone(), random_formula(rng, lang, n, 2)],
            )],
        )
    };
    let rels = [rel()?, rel()?, rel()?];
    Ok(Instance {
        a,
        b,
        p,
        p1,
        p2,
        aa,
        q1,
        q2,
        delta,
        rels,
    })
}

fn pretopos_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    pretopos_checks(cfg, PRETOPOS_INSTANCES)
}

/// The pretopos checks over `count` seeded random instances on the graph
/// models of size at most the cap.
pub fn pretopos_checks(cfg: &VerifyConfig, count: usize) -> Result<Vec<Check>> {
    let mut c = Checks::new("pretopos");
    let g = graph_theory();
    let models = enumerate_models(&g, cfg.cap)?;
    let mut rng = rng_for(cfg.seed, Suite::Pretopos);
    let instances = (0..count)
        .map(|_| random_instance(&mut rng, g.language()))
        .collect::<Result<Vec<_>>>()?;
    let count = format!("{} instances on {} models", instances.len(), models.len());

    c.push(
        "random sorts and functions validate",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            for s in [&inst.a, &inst.b, &inst.p] {
                if let Some(v) = validate_sort_on(s, &models)? {
                    return Ok(Some(format!("instance {k}: {v}")));
                }
            }
            for f in [&inst.p1, &inst.p2, &inst.q1, &inst.delta] {
                if let Some(v) = validate_function_on(f, &models)? {
                    return Ok(Some(format!("instance {k}: {v}")));
                }
            }
            Ok(None)
        })
        .map(|f| outcome(f, count.clone())),
    );

    c.push(
        "composition is unital",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            let left = compose_functions(&identity_function(&inst.a), &inst.p1)?;
            let right = compose_functions(&inst.p1, &identity_function(&inst.p))?;
            let back = compose_functions(&inst.q1, &inst.delta)?;
            for (name, f, g) in [
                ("id after projection", &left, &inst.p1),
                ("projection after id", &right, &inst.p1),
            ] {
                if let Some(m) = maps_agree(f, g, &models)? {
                    return Ok(Some(format!("instance {k}: {name} differs in model {m}")));
                }
            }
            if let Some(m) = maps_agree(&back, &identity_function(&inst.a), &models)? {
                return Ok(Some(format!(
                    "instance {k}: projection after diagonal is not the identity in model {m}"
                )));
            }
            Ok(None)
        })
        .map(|f| outcome(f, count.clone())),
    );

    c.push(
        "composition is associative",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            let lhs = compose_functions(&inst.q2, &compose_functions(&inst.delta, &inst.p1)?)?;
            let rhs = compose_functions(&compose_functions(&inst.q2, &inst.delta)?, &inst.p1)?;
            Ok(maps_agree(&lhs, &rhs, &models)?.map(|m| format!("instance {k}: model {m}")))
        })
        .map(|f| outcome(f, count.clone())),
    );

    c.push(
        "product fibers are products",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            first_failure(models.iter().enumerate(), |(mi, m)| {
                let (pa, pb) = (
                    interpret_function_in_model(&inst.p1, m)?,
                    interpret_function_in_model(&inst.p2, m)?,
                );
                let (na, nb) = (pa.target_size(), pb.target_size());
                let pairs: BTreeSet<(usize, usize)> =
                    (0..pa.source_size()).map(|u| (pa.apply(u), pb.apply(u))).collect();
                Ok((pairs.len() != pa.source_size() || pairs.len() != na * nb).then(|| {
                    format!(
                        "instance {k}, model {mi}: {} elements for {na} × {nb}",
                        pa.source_size()
                    )
                }))
            })
        })
        .map(|f| outcome(f, count.clone())),
    );

    c.push(
        "equalizer fibers are equalizers",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            let eq = equalizer_sort(&inst.q1, &inst.q2)?;
            first_failure(models.iter().enumerate(), |(mi, m)| {
                let s = interpret_sort_in_model(&inst.aa, m)?;
                let got = classes_of(&eq, &s, &mut Evaluator::new(m))?;
                let (f, g) = (
                    interpret_function_in_model(&inst.q1, m)?,
                    interpret_function_in_model(&inst.q2, m)?,
                );
                let want: BTreeSet<usize> = (0..s.size()).filter(|&u| f.apply(u) == g.apply(u)).collect();
                Ok((got != want).then(|| format!("instance {k}, model {mi}")))
            })
        })
        .map(|f| outcome(f, count.clone())),
    );

    c.push(
        "subobjects form a Boolean algebra",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            let [r, s, t] = &inst.rels;
            let lhs = r.meet(&s.join(t)?)?;
            let rhs = r.meet(s)?.join(&r.meet(t)?)?;
            let nn = r.complement(Calculus::Boolean)?.complement(Calculus::Boolean)?;
            let dm1 = r.meet(s)?.complement(Calculus::Boolean)?;
            let dm2 = r
                .complement(Calculus::Boolean)?
                .join(&s.complement(Calculus::Boolean)?)?;
            first_failure(models.iter().enumerate(), |(mi, m)| {
                let sort = interpret_sort_in_model(&inst.a, m)?;
                let mut ev = Evaluator::with_cache(m);
                let mut cl = |x: &DefinableRelation| classes_of(x, &sort, &mut ev);
                let rs = cl(r)?;
                let everything: BTreeSet<usize> = (0..sort.size()).collect();
                let cr: BTreeSet<usize> = everything.difference(&rs).copied().collect();
                let bad = if cl(&lhs)? != cl(&rhs)? {
                    Some("distributivity")
                } else if cl(&nn)? != rs {
                    Some("double complement")
                } else if cl(&dm1)? != cl(&dm2)? {
                    Some("De Morgan")
                } else if cl(&r.complement(Calculus::Boolean)?)? != cr {
                    Some("complement")
                } else {
                    None
                };
                Ok(bad.map(|b| format!("instance {k}, model {mi}: {b}")))
            })
        })
        .map(|f| outcome(f, count.clone())),
    );

    c.push(
        "projections commute with transport",
        first_failure(instances.iter().enumerate(), |(k, inst)| {
            first_failure(models.iter().enumerate(), |(mi, m)| {
                let from = interpret_function_in_model(&inst.p1, m)?;
                for h in enumerate_isomorphisms(m, m) {
                    let tp = transport_along_iso(&inst.p, &h)?;
                    let ta = transport_along_iso(&inst.a, &h)?;
                    if tp.then(&from)? != from.then(&ta)? {
                        return Ok(Some(format!(
                            "instance {k}, model {mi}, automorphism {:?}",
                            h.permutation()
                        )));
                    }
                }
                Ok(None)
            })
        })
        .map(|f| outcome(f, count.clone())),
    );
    Ok(c.out)
}

fn groupoid_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut c = Checks::new("groupoid");
    let g = graph_theory();
    let slice = build_groupoid_slice(&g, cfg.cap, cfg.budget)?;
    c.push(
        "groupoid axioms hold",
        Ok(slice
            .verify_axioms()
            .map(|_| format!("{} morphisms", slice.morphisms().len()))),
    );
    let brute: usize = slice
        .models()
        .iter()
        .map(|m| {
            slice
                .models()
                .iter()
                .map(|n| {
                    let mut perm: Vec<usize> = (0..m.size()).collect();
                    let mut count = 0;
                    if n.size() == m.size() {
                        loop {
                            if m.permute(&perm) == *n {
                                count += 1;
                            }
                            if !crate::groupoid::next_permutation(&mut perm) {
                                break;
                            }
                        }
                    }
                    count
                })
                .sum::<usize>()
        })
        .sum();
    c.push(
        "morphism count matches brute force",
        Ok(if brute == slice.morphisms().len() {
            Ok(format!("{} objects, {} morphisms", slice.models().len(), brute))
        } else {
            Err(format!("{} built, {} by brute force", slice.morphisms().len(), brute))
        }),
    );
    let orbits = slice.model_orbits();
    let covered: usize = orbits.iter().map(Vec::len).sum();
    c.push(
        "orbits partition the objects",
        Ok(if covered == slice.models().len() {
            Ok(format!("{} orbits", orbits.len()))
        } else {
            Err(format!("{covered} of {} objects covered", slice.models().len()))
        }),
    );
    let aut = slice.automorphism_counts();
    let count_for = |edges: usize, size: usize| -> Vec<usize> {
        slice
            .models()
            .iter()
            .enumerate()
            .filter(|(_, m)| m.size() == size && m.relation("E").map(|e| e.len()) == Some(edges))
            .map(|(i, _)| aut[i])
            .collect()
    };
    if cfg.cap >= 2 {
        let k2 = count_for(2, 2);
        c.push(
            "Aut(K2) = 2",
            Ok(if k2 == [2] {
                Ok("2".into())
            } else {
                Err(format!("{k2:?}"))
            }),
        );
    }
    if cfg.cap >= 3 {
        let p2 = count_for(4, 3);
        c.push(
            "Aut(P2) = 2 for each labeled path",
            Ok(if p2.len() == 3 && p2.iter().all(|&a| a == 2) {
                Ok(format!("{} labeled paths", p2.len()))
            } else {
                Err(format!("{p2:?}"))
            }),
        );
    }
    let (prod, proj, _) = product_sort(&home_sort(), &home_sort());
    c.push(
        "interpreted functions are equivariant",
        (|| {
            let a = build_fibered_sort(&prod, &slice)?;
            let b = build_fibered_sort(&home_sort(), &slice)?;
            let maps = slice
                .models()
                .iter()
                .map(|m| interpret_function_in_model(&proj, m))
                .collect::<Result<Vec<_>>>()?;
            Ok(if is_equivariant(&slice, &a, &b, &maps) {
                Ok(format!("{} + {} points", a.len(), b.len()))
            } else {
                Err("first projection is not equivariant".into())
            })
        })(),
    );
    let orders = build_groupoid_slice(&linear_order_theory(), cfg.cap, cfg.budget)?;
    let rigid = orders.automorphism_counts().iter().all(|&a| a == 1);
    let orbit_ok = orders
        .model_orbits()
        .iter()
        .all(|o| o.len() == (1..=orders.models()[o[0]].size()).product::<usize>());
    c.push(
        "linear orders are rigid",
        Ok(if rigid && orbit_ok {
            Ok(format!(
                "{} models in {} orbits",
                orders.models().len(),
                orders.model_orbits().len()
            ))
        } else {
            Err("an order has a nontrivial automorphism".into())
        }),
    );
    Ok(c.out)
}

/// Basic morphism sets `⟦ā↦b̄⟧ ∩ ∂₁⁻¹⟦φ(c̄)⟧` with `|ā| ≤ 2`, entries below
/// `min(cap, 2)` and `φ` one of `⊤`, `∃x ⊤`, `E(0,1)`, `¬E(0,1)`, `⊥`.
pub fn basic_morphism_sets(slice: &GroupoidSlice, cap: usize) -> Result<Vec<MorphismSet>> {
    let g = graph_theory();
    let conditions: Vec<(Formula, Vec<usize>)> = vec![
        (Formula::truth(0), vec![]),
        (Formula::truth(1).exists(), vec![]),
        (parse(&g, "E(x,y)", 2), vec![0, 1]),
        (parse(&g, "not E(x,y)", 2), vec![0, 1]),
        (Formula::falsity(0), vec![]),
    ];
    let sources = conditions
        .iter()
        .map(|(phi, c)| models_satisfying(phi, c, slice))
        .collect::<Result<Vec<_>>>()?;
    let bound = cap.min(2);
    let mut out = Vec::new();
    for k in 0..=2 {
        for a in crate::definability::tuples_below(k, bound) {
            for b in crate::definability::tuples_below(k, bound) {
                if !same_equality_type(&a, &b) {
                    continue;
                }
                let w = morphism_set(&a, &b, slice)?;
                for s in &sources {
                    out.push(restrict_source(&w, s, slice));
                }
            }
        }
    }
    Ok(out)
}

/// First failures of the four Vaught identities over the given sets `B` and
/// morphism sets, visiting at most `limit` combinations per identity (all of
/// them when there are fewer, else a seeded sample).
pub fn vaught_identities(
    fs: &FiberedSort,
    slice: &GroupoidSlice,
    bs: &[PointSet],
    us: &[MorphismSet],
    limit: usize,
    rng: &mut ChaCha8Rng,
) -> [(String, Option<String>); 4] {
    let all = fs.all_points();
    let tri = |b: &PointSet, u: &MorphismSet| vaught_transform(fs, slice, b, u, VaughtKind::Exists);
    let star = |b: &PointSet, u: &MorphismSet| vaught_transform(fs, slice, b, u, VaughtKind::All);
    let pairs = |n1: usize, n2: usize, rng: &mut ChaCha8Rng| -> Vec<(usize, usize)> {
        if n1 * n2 <= limit {
            (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect()
        } else {
            (0..limit)
                .map(|_| (rng.gen_range(0..n1), rng.gen_range(0..n2)))
                .collect()
        }
    };
    let triples = |n1: usize, n2: usize, n3: usize, rng: &mut ChaCha8Rng| -> Vec<(usize, usize, usize)> {
        if n1 * n2 * n3 <= limit {
            (0..n1)
                .flat_map(|i| (0..n2).flat_map(move |j| (0..n3).map(move |k| (i, j, k))))
                .collect()
        } else {
            (0..limit)
                .map(|_| (rng.gen_range(0..n1), rng.gen_range(0..n2), rng.gen_range(0..n3)))
                .collect()
        }
    };
    let (nb, nu) = (bs.len(), us.len());

    let ps = pairs(nb, nu, rng);
    let a = ps.iter().find_map(|&(i, j)| {
        let lhs: PointSet = all.difference(&star(&bs[i], &us[j])).copied().collect();
        let nb_: PointSet = all.difference(&bs[i]).copied().collect();
        (lhs != tri(&nb_, &us[j])).then(|| format!("B #{i}, U #{j}"))
    });
    let a_detail = format!("{} pairs", ps.len());

    let t1 = triples(nb, nb, nu, rng);
    let t2 = triples(nb, nu, nu, rng);
    let b = t1
        .iter()
        .find_map(|&(i, k, j)| {
            let u: PointSet = bs[i].union(&bs[k]).copied().collect();
            let rhs: PointSet = tri(&bs[i], &us[j]).union(&tri(&bs[k], &us[j])).copied().collect();
            (tri(&u, &us[j]) != rhs).then(|| format!("B #{i} ∪ B #{k}, U #{j}"))
        })
        .or_else(|| {
            t2.iter().find_map(|&(i, j, k)| {
                let w: MorphismSet = us[j].union(&us[k]).copied().collect();
                let rhs: PointSet = tri(&bs[i], &us[j]).union(&tri(&bs[i], &us[k])).copied().collect();
                (tri(&bs[i], &w) != rhs).then(|| format!("B #{i}, U #{j} ∪ U #{k}"))
            })
        });
    let b_detail = format!("{} + {} triples", t1.len(), t2.len());

    let t3 = triples(nb, nu, nu, rng);
    let d = t3.iter().find_map(|&(i, j, k)| {
        let uv = compose_sets(&us[j], &us[k], slice);
        (star(&star(&bs[i], &us[j]), &us[k]) != star(&bs[i], &uv)).then(|| format!("B #{i}, U #{j}, V #{k}"))
    });
    let d_detail = format!("{} triples", t3.len());

    let t4 = triples(nb, nu, nu, rng);
    let mut premises = 0usize;
    let e = t4.iter().find_map(|&(i, j, k)| {
        let models: BTreeSet<usize> = bs[i].iter().map(|&p| fs.locate(p).0).collect();
        if restrict_target(&us[j], &models, slice) != restrict_target(&us[k], &models, slice) {
            return None;
        }
        premises += 1;
        (tri(&bs[i], &us[j]) != tri(&bs[i], &us[k])).then(|| format!("B #{i}, U #{j}, V #{k}"))
    });
    let e_detail = format!("{} triples, {} with agreeing fibers", t4.len(), premises);

    [(a_detail, a), (b_detail, b), (d_detail, d), (e_detail, e)]
}

/// Every subset of a small point set, else a seeded sample of `limit`.
fn subsets(points: &[usize], limit: usize, rng: &mut ChaCha8Rng) -> Vec<PointSet> {
    if points.len() < 64 && (1usize << points.len()) <= limit {
        (0..1usize << points.len())
            .map(|mask| {
                points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect()
            })
            .collect()
    } else {
        (0..limit)
            .map(|_| points.iter().copied().filter(|_| rng.gen_bool(0.5)).collect())
            .collect()
    }
}

fn vaught_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut c = Checks::new("vaught");
    let slice = build_groupoid_slice(&graph_theory(), cfg.cap, cfg.budget)?;
    let fs = build_fibered_sort(&home_sort(), &slice)?;
    let mut rng = rng_for(cfg.seed, Suite::Vaught);
    let points: Vec<usize> = fs.all_points().into_iter().collect();
    let bs = subsets(&points, 64, &mut rng);
    let us = basic_morphism_sets(&slice, cfg.cap)?;
    let results = vaught_identities(&fs, &slice, &bs, &us, 20_000, &mut rng);
    let names = [
        "complement of all-transform is exists-transform of complement",
        "exists-transform preserves unions in each argument",
        "iterated all-transform is all-transform of the product set",
        "agreeing target fibers give equal exists-transforms",
    ];
    for (name, (detail, fail)) in names.into_iter().zip(results) {
        c.push(name, Ok(outcome(fail, detail)));
    }
    Ok(c.out)
}

fn definability_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut c = Checks::new("definability");
    let t = decidable_graph_theory();
    let lang = t.language();
    let slice = build_groupoid_slice(&t, cfg.cap, cfg.budget)?;
    let fs = build_fibered_sort(&home_sort(), &slice)?;
    let orbits = fs.orbits(&slice);
    let mut rng = rng_for(cfg.seed, Suite::Definability);
    let mut synth = Synthesizer::new(lang, cfg.cap);

    let orbit_formulas = orbits
        .iter()
        .map(|o| {
            let (model, tuple) = fs.tuple(o[0]);
            let d = point_descriptor(&slice.models()[model], tuple, lang)?;
            synth.borel_translate(&d, &[], 1)
        })
        .collect::<Result<Vec<_>>>();
    c.push(
        "invariant sets are defined exactly",
        orbit_formulas.and_then(|phis| {
            let choices: Vec<BTreeSet<usize>> = if orbits.len() <= 10 {
                (0..1usize << orbits.len())
                    .map(|mask| (0..orbits.len()).filter(|o| mask >> o & 1 == 1).collect())
                    .collect()
            } else {
                (0..256)
                    .map(|_| (0..orbits.len()).filter(|_| rng.gen_bool(0.5)).collect())
                    .collect()
            };
            let formulas: Vec<Formula> = choices
                .iter()
                .map(|ch| Formula::disj(1, ch.iter().map(|&o| phis[o].clone())))
                .collect();
            let got = evaluate_translates(&formulas, &[], &fs, &slice)?;
            let fail = choices.iter().zip(&got).enumerate().find_map(|(k, (ch, set))| {
                (*set != crate::definability::orbit_union_sets(&orbits, ch)).then(|| format!("set #{k}: orbits {ch:?}"))
            });
            Ok(outcome(
                fail,
                format!("{} sets over {} orbits", choices.len(), orbits.len()),
            ))
        }),
    );

    if cfg.cap >= 2 {
        let e = parse(&t, "E(x,y)", 2);
        let opens: Vec<BasicOpen> = (0..cfg.cap)
            .flat_map(|a| (0..cfg.cap).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| BasicOpen::new(vec![a], e.clone(), vec![a, b]))
            .collect::<Result<_>>()?;
        c.push(
            "invariant opens give coherent formulas",
            synthesize_invariant_open(&opens, 1, &fs, &slice, lang).and_then(|phi| {
                let got = evaluate_translates(std::slice::from_ref(&phi), &[], &fs, &slice)?.remove(0);
                let want = evaluate_translates(&[parse(&t, "exists y. E(x,y)", 1)], &[], &fs, &slice)?.remove(0);
                Ok(if !phi.is_coherent() {
                    Err("output is not coherent".into())
                } else if got != want {
                    Err("output differs from the set of vertices with a neighbour".into())
                } else {
                    Ok(format!("{} opens", opens.len()))
                })
            }),
        );
    }

    if cfg.cap >= 1 {
        let descriptors: Vec<BorelDescriptor> = (0..20)
            .map(|_| random_borel_descriptor(&mut rng, lang, cfg.cap, 2))
            .collect();
        c.push(
            "random descriptors translate exactly",
            first_failure(descriptors.iter().enumerate(), |(k, d)| {
                for b in [vec![], vec![0]] {
                    let phi = synth.borel_translate(d, &b, 1)?;
                    if let Some(a) = check_borel_translate(&phi, d, &b, cfg.cap, &fs, &slice)? {
                        return Ok(Some(format!("descriptor #{k}, parameters {a:?} ↦ {b:?}")));
                    }
                }
                Ok(None)
            })
            .map(|f| outcome(f, format!("{} descriptors", descriptors.len()))),
        );
    }
    Ok(c.out)
}

fn interp_suite(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut c = Checks::new("interp");
    let kg = complete_graph_interpretation();
    let lg = line_graph_interpretation();
    let orders = enumerate_models(kg.target(), cfg.cap)?;
    let graphs = enumerate_models(lg.target(), cfg.cap)?;

    c.push(
        "complete-graph interpretation validates",
        validate_interpretation(&kg, cfg.cap).map(|v| match v {
            None => Ok(format!("{} target models", orders.len())),
            Some(v) => Err(format!("{} in model {} at {:?}", v.check, v.model, v.tuple)),
        }),
    );
    if cfg.cap >= 2 {
        let o = linear_order_theory();
        let bad = Interpretation::new(
            graph_theory(),
            o.clone(),
            home_sort(),
            [("E".to_string(), vec![parse(&o, "L(x,y)", 2)])].into(),
        )?;
        c.push(
            "directed image fails symmetry",
            validate_interpretation(&bad, cfg.cap).map(|v| match v {
                Some(v) => Ok(format!("{} in model {} at {:?}", v.check, v.model, v.tuple)),
                None => Err("accepted".into()),
            }),
        );
    }
    c.push(
        "line-graph interpretation validates",
        validate_interpretation(&lg, cfg.cap).map(|v| match v {
            None => Ok(format!("{} target models", graphs.len())),
            Some(v) => Err(format!("{} in model {} at {:?}", v.check, v.model, v.tuple)),
        }),
    );
    c.push(
        "transported models satisfy the source theory",
        first_failure(
            orders
                .iter()
                .map(|m| (&kg, m))
                .chain(graphs.iter().map(|m| (&lg, m)))
                .enumerate(),
            |(k, (f, m))| Ok((!is_model(&apply_to_model(f, m)?, f.source())?).then(|| format!("model #{k}"))),
        )
        .map(|f| outcome(f, format!("{} models", orders.len() + graphs.len()))),
    );
    c.push(
        "transport is strictly functorial",
        first_failure([(&kg, &orders), (&lg, &graphs)], |(f, models)| {
            first_failure(models.iter().enumerate(), |(i, m)| {
                let id = crate::groupoid::Isomorphism::identity(m);
                let fid = apply_to_iso(f, &id)?;
                if fid.permutation().iter().enumerate().any(|(a, &b)| a != b) {
                    return Ok(Some(format!("identity of model {i}")));
                }
                for (j, n) in models.iter().enumerate().filter(|(_, n)| n.size() == m.size()) {
                    for g in enumerate_isomorphisms(m, n) {
                        let fg = apply_to_iso(f, &g)?;
                        for p in models.iter().filter(|p| p.size() == m.size()) {
                            for h in enumerate_isomorphisms(n, p) {
                                if apply_to_iso(f, &h.after(&g)?)? != apply_to_iso(f, &h)?.after(&fg)? {
                                    return Ok(Some(format!("models {i} → {j}")));
                                }
                            }
                        }
                    }
                }
                Ok(None)
            })
        })
        .map(|f| outcome(f, format!("{} + {} models", orders.len(), graphs.len()))),
    );
    c.push(
        "comparison maps of a composite are natural",
        compose_interpretations(&kg, &lg).and_then(|gf| {
            let zs = zeta_components(&kg, &lg, &gf, &orders)?;
            Ok(Ok(format!("{} components", zs.len())))
        }),
    );
    c.push(
        "identity composites have identity comparison maps",
        (|| {
            let id = Interpretation::identity(kg.target());
            let left = compose_interpretations(&id, &kg)?;
            let id2 = Interpretation::identity(kg.source());
            let right = compose_interpretations(&kg, &id2)?;
            for z in zeta_components(&id, &kg, &left, &orders)?
                .into_iter()
                .chain(zeta_components(&kg, &id2, &right, &orders)?)
            {
                if z.permutation().iter().enumerate().any(|(a, &b)| a != b) {
                    return Ok(Err(format!("component {:?}", z.permutation())));
                }
            }
            Ok(Ok(format!("{} models", orders.len())))
        })(),
    );
    c.push(
        "padded sequence sorts are in bijection",
        (|| {
            let emb = sequence_sort_embedding(lg.home())?;
            let mut extended = lg.home().clone();
            let g = graph_theory();
            let non = parse(&g, "and(not E(x,y), not x = y)", 2);
            let pieces = vec![extended.pieces()[0].clone(), non.clone()];
            let eq = |p: &Formula| {
                Formula::conj(
                    4,
                    [
                        p.weaken(4),
                        Formula::eq(4, 0, 2).unwrap(),
                        Formula::eq(4, 1, 3).unwrap(),
                    ],
                )
            };
            extended = ImaginarySort::new(
                pieces,
                vec![
                    vec![extended.relation(0, 0).clone(), Formula::falsity(4)],
                    vec![Formula::falsity(4), eq(&non)],
                ],
            )?;
            let emb2 = sequence_sort_embedding(&extended)?;
            for m in &graphs {
                sequence_bijection(lg.home(), &emb, m)?;
                sequence_bijection(&extended, &emb2, m)?;
            }
            Ok(Ok(format!("arities {:?} and {:?}", emb.arities, emb2.arities)))
        })(),
    );
    c.push(
        "sequence form reproduces the interpretation",
        (|| {
            let emb = sequence_sort_embedding(lg.home())?;
            let images: BTreeMap<String, Vec<Formula>> = lg
                .relations()
                .iter()
                .map(|(k, r)| (k.clone(), r.pieces().to_vec()))
                .collect();
            let hmm = from_hmm_data(
                lg.source(),
                lg.target(),
                emb.sort.pieces().to_vec(),
                emb.sort.relations().to_vec(),
                images,
                cfg.cap,
            )?;
            for (i, m) in graphs.iter().enumerate() {
                if enumerate_isomorphisms(&apply_to_model(&hmm, m)?, &apply_to_model(&lg, m)?).is_empty() {
                    return Ok(Err(format!("model {i}")));
                }
            }
            Ok(Ok(format!("{} models", graphs.len())))
        })(),
    );
    Ok(c.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_at_small_caps() {
        for cap in 0..=2 {
            let cfg = VerifyConfig {
                cap,
                budget: 1_000_000,
                seed: 1,
            };
            let r = run_verify_suite(&cfg, Suite::All).unwrap();
            assert!(r.all_passed(), "{}", r.to_text());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = VerifyConfig {
            cap: 3,
            budget: 10,
            seed: 0,
        };
        assert!(matches!(
            run_verify_suite(&cfg, Suite::Groupoid),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn suite_names() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn generator_is_seeded() {
        let lang = graph_theory().language().clone();
        let a = random_coherent_formula(&mut ChaCha8Rng::seed_from_u64(3), &lang, 2, 4);
        let b = random_coherent_formula(&mut ChaCha8Rng::seed_from_u64(3), &lang, 2, 4);
        assert_eq!(a, b);
        assert!(a.is_coherent());
    }
}
