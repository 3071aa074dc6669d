//! Drives the public API from a world description to reports, the way a
//! downstream user would.

use weakdo_core::causality::{attribute_party, shared_identity, Attribution, InterventionEvent};
use weakdo_core::experiments::{raincoat_world, scenario_do_switch, scenario_raincoat, Format};
use weakdo_core::mind::{infer_intent, mirror_rationale};
use weakdo_core::{induce, Language, Observation, Policy, Task, World, WorldSpec};

fn w1() -> (World, Language) {
    let spec: WorldSpec = serde_json::from_str(
        r#"{"states": ["a", "b", "c"], "programs": [
            {"name": "p1", "true_in": ["a", "b"]},
            {"name": "p2", "true_in": ["b", "c"]}]}"#,
    )
    .unwrap();
    let w = World::build(&spec).unwrap();
    let l = Language::new(&w, &w.full_vocabulary().unwrap()).unwrap();
    (w, l)
}

#[test]
fn induction_and_intent_agree() {
    let (_, l) = w1();
    let s = l.statement(&["p1"]).unwrap();
    let d = l.statement(&["p1", "p2"]).unwrap();
    let task = Task::new(&l, [s], [d]).unwrap();
    let weakest = induce(&l, &task, Policy::Weakest).unwrap();
    let intent = infer_intent(&l, &[Observation::new(&l, s, d).unwrap()]).unwrap();
    assert_eq!(weakest.chosen, intent.chosen);
    assert_eq!(l.render(intent.chosen), "{p2}");

    let goal = l.statement::<&str>(&[]).unwrap();
    let r = mirror_rationale(&l, goal, &Observation::new(&l, s, d).unwrap()).unwrap();
    assert!(goal.is_strict_subset_of(r.model) && r.model.is_subset_of(d));
}

#[test]
fn raincoat_identity_attributes_the_event() {
    let w = raincoat_world();
    let full = Language::new(&w, &w.make_vocabulary(&["r", "c", "u"]).unwrap()).unwrap();
    let ev = InterventionEvent::new(
        &full,
        full.statement(&["c", "u"]).unwrap(),
        full.statement(&["c"]).unwrap(),
    )
    .unwrap();
    let id = shared_identity(&[ev], "raincoat owner").unwrap();
    assert!(id.is_stable());
    let v = full.statement(&["c", "u"]).unwrap();
    let c = full.statement(&["c"]).unwrap();
    assert_eq!(
        attribute_party(v, c, &[id]).unwrap(),
        Attribution::Attributed("raincoat owner".into())
    );
}

#[test]
fn demo_reports_write_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let a = scenario_raincoat().unwrap();
    assert!(a.passed);
    assert_eq!(a, scenario_raincoat().unwrap());
    let b = scenario_do_switch(3).unwrap();
    assert!(b.passed);
    assert_eq!(b, scenario_do_switch(3).unwrap());
    for r in [&a, &b] {
        for f in r.write(dir.path(), Format::Csv).unwrap() {
            assert!(f.exists());
        }
    }
}
