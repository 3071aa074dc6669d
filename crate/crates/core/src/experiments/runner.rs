//! JSON scenario files.
//!
//! A scenario declares a world, named vocabularies, tasks, intervention
//! events, observation sets and discrete nets, then a list of assertions.
//! Statements are written as lists of program names. Running a scenario
//! evaluates every assertion and records expected against actual values.
//! Any expectation may instead be `{"error": "<message>"}` to assert that
//! the computation fails with that message.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::premises::{verify_premises, Mode};
use super::scenarios::describe;
use super::{Format, Report};
use crate::causality::net::{switch_equivalence_check, DiscreteNet, VariableSpec};
use crate::causality::{attribute_party, shared_identity, Identity, InterventionEvent};
use crate::error::{Error, Result};
use crate::induction::{
    format_rational, generalisation_probability, induce, parse_rational, Policy,
};
use crate::lang::{Language, Statement};
use crate::mind::{infer_intent, mirror_rationale, nested_intent, Observation};
use crate::task::{valid_models, Task, TaskBounds};
use crate::world::{World, WorldSpec};

type Names = Vec<String>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub world: WorldSpec,
    #[serde(default)]
    pub vocabularies: BTreeMap<String, Names>,
    #[serde(default)]
    pub tasks: BTreeMap<String, TaskSpec>,
    #[serde(default)]
    pub events: BTreeMap<String, EventSpec>,
    #[serde(default)]
    pub observations: BTreeMap<String, ObservationSpec>,
    #[serde(default)]
    pub nets: BTreeMap<String, NetSpec>,
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
    #[serde(default)]
    pub policies: Vec<String>,
    #[serde(default)]
    pub assertions: Vec<Assertion>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub vocabulary: String,
    pub situations: Vec<Names>,
    pub decisions: Vec<Names>,
}

/// Names outside the vocabulary are dropped, so one event description can
/// be read under several vocabularies.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub vocabulary: String,
    pub event: Names,
    pub forced: Names,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSpec {
    pub vocabulary: String,
    pub pairs: Vec<PairSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub situation: Names,
    pub decision: Names,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSpec {
    pub variables: Vec<VariableSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub child: [usize; 2],
    pub parent: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Outcome<T> {
    Error { error: String },
    Value(T),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Assertion {
    /// The hypothesis a policy picks (default: weakest).
    Induce {
        task: String,
        #[serde(default)]
        policy: Option<String>,
        expect: Outcome<Names>,
    },
    /// The full model set M.
    Models {
        task: String,
        expect: Vec<Names>,
    },
    Weakness {
        vocabulary: String,
        statement: Names,
        expect: u64,
    },
    Distinguishable {
        event: String,
        expect: bool,
    },
    Residue {
        event: String,
        expect: Names,
    },
    Identity {
        events: Vec<String>,
        expect: Names,
    },
    /// Attributes event `event` to parties whose identities come from the
    /// listed events.
    Attribution {
        event: String,
        identities: BTreeMap<String, Vec<String>>,
        expect: String,
    },
    /// The weakest argmax set inferred from an observation set.
    Intent {
        observations: String,
        expect: Outcome<Vec<Names>>,
    },
    Rationale {
        vocabulary: String,
        goal: Names,
        situation: Names,
        decision: Names,
        expect: Outcome<Names>,
    },
    NestedIntent {
        observations: String,
        anchor: Names,
        expect: Outcome<Names>,
    },
    /// p(query | given), optionally after surgery `do`.
    Conditional {
        net: String,
        query: [String; 2],
        #[serde(default)]
        given: Vec<[String; 2]>,
        #[serde(default, rename = "do")]
        intervene: Option<[String; 2]>,
        expect: Outcome<String>,
    },
    SwitchEquivalence {
        net: String,
        expect: bool,
    },
    /// Exact generalisation probability of a hypothesis under the parent bounds.
    Generalisation {
        task: String,
        hypothesis: Names,
        expect: String,
    },
    /// Whether the weakest policy dominates the listed policies under the
    /// scenario bounds.
    Dominance {
        vocabulary: String,
        expect: bool,
    },
}

impl Assertion {
    fn kind(&self) -> &'static str {
        match self {
            Assertion::Induce { .. } => "induce",
            Assertion::Models { .. } => "models",
            Assertion::Weakness { .. } => "weakness",
            Assertion::Distinguishable { .. } => "distinguishable",
            Assertion::Residue { .. } => "residue",
            Assertion::Identity { .. } => "identity",
            Assertion::Attribution { .. } => "attribution",
            Assertion::Intent { .. } => "intent",
            Assertion::Rationale { .. } => "rationale",
            Assertion::NestedIntent { .. } => "nested_intent",
            Assertion::Conditional { .. } => "conditional",
            Assertion::SwitchEquivalence { .. } => "switch_equivalence",
            Assertion::Generalisation { .. } => "generalisation",
            Assertion::Dominance { .. } => "dominance",
        }
    }
}

impl Scenario {
    /// Parses scenario JSON. Errors carry the line and column of the fault.
    pub fn from_json(text: &str, origin: &str) -> Result<Scenario> {
        serde_json::from_str(text)
            .map_err(|e| Error::Scenario(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Scenario::from_json(&text, &path.display().to_string())
    }
}

/// Reads a policy list. A bare `random` takes the given seed.
pub fn parse_policies<S: AsRef<str>>(items: &[S], seed: u64) -> Result<Vec<Policy>> {
    items
        .iter()
        .map(|s| match s.as_ref().trim() {
            "random" => Ok(Policy::Random { seed }),
            other => other.parse(),
        })
        .collect()
}

fn unresolved(kind: &str, name: &str) -> Error {
    Error::Scenario(format!("unknown {kind} `{name}`"))
}

/// Everything a scenario declares, resolved and validated.
struct Context {
    world: World,
    langs: BTreeMap<String, Language>,
    tasks: BTreeMap<String, (String, Task)>,
    events: BTreeMap<String, (String, InterventionEvent)>,
    observations: BTreeMap<String, (String, Vec<Observation>)>,
    nets: BTreeMap<String, DiscreteNet>,
    child: TaskBounds,
    parent: TaskBounds,
    policies: Vec<Policy>,
    seed: u64,
}

fn in_context<T>(what: String, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Scenario(format!("{what}: {e}")))
}

impl Context {
    fn build(sc: &Scenario) -> Result<Context> {
        let world = in_context("world".into(), World::build(&sc.world))?;
        let mut langs = BTreeMap::new();
        for (name, names) in &sc.vocabularies {
            let lang = in_context(
                format!("vocabulary `{name}`"),
                world
                    .make_vocabulary(names)
                    .and_then(|v| Language::new(&world, &v)),
            )?;
            langs.insert(name.clone(), lang);
        }
        let lang_of = |name: &str| {
            langs
                .get(name)
                .ok_or_else(|| unresolved("vocabulary", name))
        };

        let mut tasks = BTreeMap::new();
        for (name, t) in &sc.tasks {
            let lang = lang_of(&t.vocabulary)?;
            let task = in_context(
                format!("task `{name}`"),
                (|| {
                    let s = t
                        .situations
                        .iter()
                        .map(|n| lang.statement(n))
                        .collect::<Result<Vec<_>>>()?;
                    let d = t
                        .decisions
                        .iter()
                        .map(|n| lang.statement(n))
                        .collect::<Result<Vec<_>>>()?;
                    Task::new(lang, s, d)
                })(),
            )?;
            tasks.insert(name.clone(), (t.vocabulary.clone(), task));
        }

        let mut events = BTreeMap::new();
        for (name, e) in &sc.events {
            let lang = lang_of(&e.vocabulary)?;
            let v = lang.vocabulary();
            let ev = in_context(
                format!("event `{name}`"),
                v.project(&world, &e.event)
                    .and_then(|a| Ok((a, v.project(&world, &e.forced)?)))
                    .and_then(|(a, c)| InterventionEvent::new(lang, a, c)),
            )?;
            events.insert(name.clone(), (e.vocabulary.clone(), ev));
        }

        let mut observations = BTreeMap::new();
        for (name, o) in &sc.observations {
            let lang = lang_of(&o.vocabulary)?;
            let obs = in_context(
                format!("observations `{name}`"),
                o.pairs
                    .iter()
                    .map(|p| {
                        Observation::new(
                            lang,
                            lang.statement(&p.situation)?,
                            lang.statement(&p.decision)?,
                        )
                    })
                    .collect::<Result<Vec<_>>>(),
            )?;
            observations.insert(name.clone(), (o.vocabulary.clone(), obs));
        }

        let mut nets = BTreeMap::new();
        for (name, n) in &sc.nets {
            let net = in_context(
                format!("net `{name}`"),
                DiscreteNet::from_specs(&n.variables),
            )?;
            nets.insert(name.clone(), net);
        }

        let (child, parent) = match sc.bounds {
            Some(b) => (
                in_context("bounds".into(), TaskBounds::new(b.child[0], b.child[1]))?,
                in_context("bounds".into(), TaskBounds::new(b.parent[0], b.parent[1]))?,
            ),
            None => (TaskBounds::new(1, 1)?, TaskBounds::new(2, 2)?),
        };
        let policies = if sc.policies.is_empty() {
            vec![
                Policy::Weakest,
                Policy::Strongest,
                Policy::Random { seed: sc.seed },
                Policy::LexicographicFirst,
            ]
        } else {
            in_context("policies".into(), parse_policies(&sc.policies, sc.seed))?
        };

        Ok(Context {
            world,
            langs,
            tasks,
            events,
            observations,
            nets,
            child,
            parent,
            policies,
            seed: sc.seed,
        })
    }

    fn lang(&self, name: &str) -> Result<&Language> {
        self.langs
            .get(name)
            .ok_or_else(|| unresolved("vocabulary", name))
    }

    fn task(&self, name: &str) -> Result<(&Language, &Task)> {
        let (v, t) = self
            .tasks
            .get(name)
            .ok_or_else(|| unresolved("task", name))?;
        Ok((self.lang(v)?, t))
    }

    fn event(&self, name: &str) -> Result<(&Language, &InterventionEvent)> {
        let (v, e) = self
            .events
            .get(name)
            .ok_or_else(|| unresolved("event", name))?;
        Ok((self.lang(v)?, e))
    }

    fn observations(&self, name: &str) -> Result<(&Language, &[Observation])> {
        let (v, o) = self
            .observations
            .get(name)
            .ok_or_else(|| unresolved("observations", name))?;
        Ok((self.lang(v)?, o))
    }

    fn net(&self, name: &str) -> Result<&DiscreteNet> {
        self.nets.get(name).ok_or_else(|| unresolved("net", name))
    }
}

/// Canonical rendering of a statement named in the file; unknown names are
/// a scenario error, not an assertion failure.
fn named(lang: &Language, names: &[String]) -> Result<Statement> {
    lang.statement(names)
        .map_err(|e| Error::Scenario(e.to_string()))
}

fn render_many(lang: &Language, set: &BTreeSet<Statement>) -> String {
    lang.render_set(set)
}

fn expected_of<T>(o: &Outcome<T>, f: impl FnOnce(&T) -> Result<String>) -> Result<String> {
    match o {
        Outcome::Error { error } => Ok(format!("error: {error}")),
        Outcome::Value(v) => f(v),
    }
}

/// Domain failures become the actual value; scenario errors propagate.
fn actual_of(r: Result<String>) -> Result<String> {
    match r {
        Ok(s) => Ok(s),
        Err(e @ Error::Scenario(_)) => Err(e),
        Err(e) => Ok(format!("error: {e}")),
    }
}

fn evaluate(ctx: &Context, a: &Assertion) -> Result<(String, String, String)> {
    Ok(match a {
        Assertion::Induce {
            task,
            policy,
            expect,
        } => {
            let (lang, t) = ctx.task(task)?;
            let p = match policy {
                Some(p) => parse_policies(&[p], ctx.seed)?[0],
                None => Policy::Weakest,
            };
            let exp = expected_of(expect, |n| Ok(lang.render(named(lang, n)?)))?;
            let act = actual_of(induce(lang, t, p).map(|r| lang.render(r.chosen)))?;
            (format!("{task} {p}"), exp, act)
        }
        Assertion::Models { task, expect } => {
            let (lang, t) = ctx.task(task)?;
            let exp: BTreeSet<Statement> = expect
                .iter()
                .map(|n| named(lang, n))
                .collect::<Result<_>>()?;
            let act = actual_of(
                valid_models(lang, t).map(|m| render_many(lang, &m.into_iter().collect())),
            )?;
            (task.clone(), render_many(lang, &exp), act)
        }
        Assertion::Weakness {
            vocabulary,
            statement,
            expect,
        } => {
            let lang = ctx.lang(vocabulary)?;
            let s = named(lang, statement)?;
            let act = actual_of(lang.weakness(s).map(|w| w.to_string()))?;
            (
                format!("{vocabulary} {}", lang.render(s)),
                expect.to_string(),
                act,
            )
        }
        Assertion::Distinguishable { event, expect } => {
            let (_, e) = ctx.event(event)?;
            (
                event.clone(),
                expect.to_string(),
                e.is_distinguishable().to_string(),
            )
        }
        Assertion::Residue { event, expect } => {
            let (lang, e) = ctx.event(event)?;
            let exp = lang.render(lang.vocabulary().project(&ctx.world, expect)?);
            (event.clone(), exp, lang.render(e.residue()))
        }
        Assertion::Identity { events, expect } => {
            let (lang, evs) = same_language_events(ctx, events)?;
            let exp = lang.render(lang.vocabulary().project(&ctx.world, expect)?);
            let act = actual_of(shared_identity(&evs, "party").map(|k| lang.render(k.residue)))?;
            (events.join("+"), exp, act)
        }
        Assertion::Attribution {
            event,
            identities,
            expect,
        } => {
            let (lang, e) = ctx.event(event)?;
            let mut ids = Vec::new();
            for (label, evs) in identities {
                let (l, evs) = same_language_events(ctx, evs)?;
                if l.id() != lang.id() {
                    return Err(Error::Scenario(format!(
                        "identity `{label}` uses a different vocabulary from event `{event}`"
                    )));
                }
                ids.push(Identity {
                    label: label.clone(),
                    ..shared_identity(&evs, label)?
                });
            }
            let act =
                actual_of(attribute_party(e.event(), e.forced(), &ids).map(|a| describe(&a)))?;
            (event.clone(), expect.clone(), act)
        }
        Assertion::Intent {
            observations,
            expect,
        } => {
            let (lang, obs) = ctx.observations(observations)?;
            let exp = expected_of(expect, |sets| {
                let s: BTreeSet<Statement> =
                    sets.iter().map(|n| named(lang, n)).collect::<Result<_>>()?;
                Ok(render_many(lang, &s))
            })?;
            let act = actual_of(
                infer_intent(lang, obs)
                    .map(|r| render_many(lang, &r.argmax_set.into_iter().collect())),
            )?;
            (observations.clone(), exp, act)
        }
        Assertion::Rationale {
            vocabulary,
            goal,
            situation,
            decision,
            expect,
        } => {
            let lang = ctx.lang(vocabulary)?;
            let g = named(lang, goal)?;
            let (s, d) = (named(lang, situation)?, named(lang, decision)?);
            let exp = expected_of(expect, |n| Ok(lang.render(named(lang, n)?)))?;
            let act = actual_of(
                Observation::new(lang, s, d)
                    .and_then(|o| mirror_rationale(lang, g, &o))
                    .map(|r| lang.render(r.model)),
            )?;
            (
                format!(
                    "goal {} obs {}->{}",
                    lang.render(g),
                    lang.render(s),
                    lang.render(d)
                ),
                exp,
                act,
            )
        }
        Assertion::NestedIntent {
            observations,
            anchor,
            expect,
        } => {
            let (lang, obs) = ctx.observations(observations)?;
            let anchor_s = named(lang, anchor)?;
            let exp = expected_of(expect, |n| Ok(lang.render(named(lang, n)?)))?;
            let act = actual_of(nested_intent(lang, obs, anchor_s).map(|r| lang.render(r.model)))?;
            (
                format!("{observations} anchor {}", lang.render(anchor_s)),
                exp,
                act,
            )
        }
        Assertion::Conditional {
            net,
            query,
            given,
            intervene,
            expect,
        } => {
            let base = ctx.net(net)?;
            let exp = expected_of(expect, |s| Ok(format_rational(&parse_rational(s)?)))?;
            let given_refs: Vec<(&str, &str)> = given
                .iter()
                .map(|[v, x]| (v.as_str(), x.as_str()))
                .collect();
            let act = actual_of((|| {
                let cut;
                let n = match intervene {
                    Some([v, x]) => {
                        cut = base.do_surgery(v, x)?;
                        &cut
                    }
                    None => base,
                };
                Ok(format_rational(
                    &n.conditional((&query[0], &query[1]), &given_refs)?,
                ))
            })())?;
            let mut subject = format!("{net} p({}={}", query[0], query[1]);
            if !given.is_empty() {
                let g: Vec<String> = given.iter().map(|[v, x]| format!("{v}={x}")).collect();
                subject.push_str(&format!(" | {}", g.join(",")));
            }
            subject.push(')');
            if let Some([v, x]) = intervene {
                subject.push_str(&format!(" do({v}={x})"));
            }
            (subject, exp, act)
        }
        Assertion::SwitchEquivalence { net, expect } => {
            let act = actual_of(
                switch_equivalence_check(ctx.net(net)?, None).map(|v| v.equivalent.to_string()),
            )?;
            (net.clone(), expect.to_string(), act)
        }
        Assertion::Generalisation {
            task,
            hypothesis,
            expect,
        } => {
            let (lang, t) = ctx.task(task)?;
            let h = named(lang, hypothesis)?;
            let exp = format_rational(&parse_rational(expect)?);
            let act = actual_of(
                generalisation_probability(lang, t, h, ctx.parent).map(|p| format_rational(&p)),
            )?;
            (format!("{task} {}", lang.render(h)), exp, act)
        }
        Assertion::Dominance { vocabulary, expect } => {
            let lang = ctx.lang(vocabulary)?;
            let act = actual_of(
                verify_premises(
                    lang,
                    vocabulary,
                    ctx.child,
                    ctx.parent,
                    &ctx.policies,
                    Mode::Exhaustive,
                    ctx.seed,
                )
                .map(|r| r.dominance().to_string()),
            )?;
            (vocabulary.clone(), expect.to_string(), act)
        }
    })
}

fn same_language_events<'a>(
    ctx: &'a Context,
    names: &[String],
) -> Result<(&'a Language, Vec<InterventionEvent>)> {
    let mut lang: Option<&Language> = None;
    let mut out = Vec::new();
    for n in names {
        let (l, e) = ctx.event(n)?;
        if lang.is_some_and(|x| x.id() != l.id()) {
            return Err(Error::Scenario(format!(
                "events {} mix vocabularies",
                names.join(",")
            )));
        }
        lang = Some(l);
        out.push(*e);
    }
    let lang = lang.ok_or_else(|| Error::Scenario("identity needs at least one event".into()))?;
    Ok((lang, out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioOutcome {
    pub report: Report,
    pub failures: usize,
}

/// Evaluates every assertion of a parsed scenario.
pub fn evaluate_scenario(sc: &Scenario) -> Result<ScenarioOutcome> {
    let ctx = Context::build(sc)?;
    let mut r = Report::new(
        &sc.name,
        &["index", "check", "subject", "expected", "actual", "status"],
    );
    r.header("scenario", &sc.name);
    r.header("seed", sc.seed);
    r.header(
        "bounds",
        format!(
            "child {},{} parent {},{}",
            ctx.child.max_situations,
            ctx.child.max_decisions,
            ctx.parent.max_situations,
            ctx.parent.max_decisions
        ),
    );
    let mut failures = 0;
    for (i, a) in sc.assertions.iter().enumerate() {
        let (subject, expected, actual) = evaluate(&ctx, a)?;
        let pass = expected == actual;
        if !pass {
            failures += 1;
        }
        r.row(vec![
            i.to_string(),
            a.kind().to_string(),
            subject,
            expected,
            actual,
            if pass { "pass" } else { "fail" }.to_string(),
        ]);
    }
    for (name, (v, t)) in &ctx.tasks {
        let lang = ctx.lang(v)?;
        let models = valid_models(lang, t)?;
        let weakest = induce(lang, t, Policy::Weakest)
            .map(|x| render_many(lang, &x.argmax_set.into_iter().collect()))
            .unwrap_or_else(|e| format!("none ({e})"));
        r.note(format!(
            "task {name} [{v}]: {} M={} weakest={weakest}",
            t.render(lang),
            render_many(lang, &models.into_iter().collect())
        ));
    }
    for (name, (v, e)) in &ctx.events {
        let lang = ctx.lang(v)?;
        r.note(format!(
            "event {name} [{v}]: a={} c={} residue={} distinguishable={}",
            lang.render(e.event()),
            lang.render(e.forced()),
            lang.render(e.residue()),
            e.is_distinguishable()
        ));
    }
    for (name, (v, obs)) in &ctx.observations {
        let lang = ctx.lang(v)?;
        let intent = infer_intent(lang, obs)
            .map(|x| render_many(lang, &x.argmax_set.into_iter().collect()))
            .unwrap_or_else(|e| format!("none ({e})"));
        r.note(format!("observations {name} [{v}]: intent={intent}"));
    }
    r.header("assertions", sc.assertions.len());
    r.header("failures", failures);
    r.passed = failures == 0;
    Ok(ScenarioOutcome {
        report: r,
        failures,
    })
}

/// Loads, evaluates and writes the report for a scenario file.
pub fn run_scenario(path: &Path, out: &Path, format: Format) -> Result<ScenarioOutcome> {
    let sc = Scenario::load(path)?;
    let outcome = evaluate_scenario(&sc)?;
    outcome.report.write(out, format)?;
    Ok(outcome)
}
