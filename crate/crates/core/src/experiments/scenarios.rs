//! The two canned demonstrations: raincoat emergence and the do operator
//! as a switch variable.

use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Report;
use crate::causality::net::{raincoat_net, switch_equivalence_check};
use crate::causality::{
    attribute_party, shared_identity, Attribution, Identity, InterventionEvent,
};
use crate::error::Result;
use crate::induction::format_rational;
use crate::lang::{Language, Statement};
use crate::world::{ProgramSpec, World, WorldSpec};

/// Larry and the raincoat. `r`: it rains, `c`: Larry wears the coat, `u`:
/// we forced the coat on him, `h`: Harvey did.
pub fn raincoat_world() -> World {
    let p = |name: &str, states: &[&str]| ProgramSpec {
        name: name.into(),
        true_in: states.iter().map(|s| s.to_string()).collect(),
    };
    World::build(&WorldSpec {
        states: [
            "rain_coat",
            "dry",
            "forced_dry",
            "forced_rain",
            "harvey_dry",
        ]
        .map(String::from)
        .to_vec(),
        programs: vec![
            p("r", &["rain_coat", "forced_rain"]),
            p(
                "c",
                &["rain_coat", "forced_dry", "forced_rain", "harvey_dry"],
            ),
            p("u", &["forced_dry", "forced_rain"]),
            p("h", &["harvey_dry"]),
        ],
    })
    .expect("raincoat world is well formed")
}

fn language(world: &World, names: &[&str]) -> Result<Language> {
    Language::new(world, &world.make_vocabulary(names)?)
}

fn event(world: &World, lang: &Language, a: &[&str], c: &[&str]) -> Result<InterventionEvent> {
    let v = lang.vocabulary();
    InterventionEvent::new(lang, v.project(world, a)?, v.project(world, c)?)
}

/// Distinguishability of forcing the coat on under three vocabularies,
/// plus identity extraction and attribution.
pub fn scenario_raincoat() -> Result<Report> {
    let w = raincoat_world();
    let mut r = Report::new(
        "raincoat",
        &[
            "vocabulary",
            "party",
            "event",
            "forced",
            "residue",
            "distinguishable",
        ],
    );
    r.header(
        "world",
        "rain_coat{r,c} dry{} forced_dry{c,u} forced_rain{r,c,u} harvey_dry{c,h}",
    );
    let mut ok = true;

    // (label, vocabulary, party, event, forced, expected residue)
    type Case<'a> = (
        &'a str,
        &'a [&'a str],
        &'a str,
        &'a [&'a str],
        &'a [&'a str],
        &'a [&'a str],
    );
    let cases: [Case; 4] = [
        ("full", &["r", "c", "u"], "us", &["c", "u"], &["c"], &["u"]),
        ("reduced", &["r", "c"], "us", &["c", "u"], &["c"], &[]),
        (
            "with_harvey",
            &["r", "c", "u", "h"],
            "us",
            &["c", "u"],
            &["c"],
            &["u"],
        ),
        (
            "with_harvey",
            &["r", "c", "u", "h"],
            "harvey",
            &["c", "h"],
            &["c"],
            &["h"],
        ),
    ];
    for (label, names, party, a, c, expected) in cases {
        let lang = language(&w, names)?;
        let e = event(&w, &lang, a, c)?;
        let expected = lang.vocabulary().project(&w, expected)?;
        ok &= e.residue() == expected && e.is_distinguishable() == !expected.is_empty();
        r.row(vec![
            format!(
                "{label}{}",
                lang.vocabulary()
                    .render(Statement::from_mask(lang.vocabulary().full_mask()))
            ),
            party.to_string(),
            lang.render(e.event()),
            lang.render(e.forced()),
            lang.render(e.residue()),
            e.is_distinguishable().to_string(),
        ]);
    }

    let full = language(&w, &["r", "c", "u"])?;
    let me = shared_identity(
        &[
            event(&w, &full, &["c", "u"], &["c"])?,
            event(&w, &full, &["r", "c", "u"], &["r", "c"])?,
        ],
        "us",
    )?;
    ok &= me.residue == full.statement(&["u"])?;
    r.note(format!(
        "identity of us over {{c,u}}/{{c}} and {{r,c,u}}/{{r,c}}: {}",
        full.render(me.residue)
    ));

    let wide = language(&w, &["r", "c", "u", "h"])?;
    let ids = [
        Identity {
            label: "us".into(),
            residue: wide.statement(&["u"])?,
        },
        shared_identity(&[event(&w, &wide, &["c", "h"], &["c"])?], "harvey")?,
    ];
    let by_harvey = attribute_party(wide.statement(&["c", "h"])?, wide.statement(&["c"])?, &ids)?;
    let passive = attribute_party(wide.statement(&["c"])?, wide.statement(&["c"])?, &ids)?;
    ok &= by_harvey == Attribution::Attributed("harvey".into())
        && passive == Attribution::Unattributed;
    r.note(format!(
        "attribution of {{c,h}} forcing {{c}}: {}",
        describe(&by_harvey)
    ));
    r.note(format!(
        "attribution of {{c}} forcing {{c}}: {}",
        describe(&passive)
    ));
    r.passed = ok;
    Ok(r)
}

pub fn describe(a: &Attribution) -> String {
    match a {
        Attribution::Attributed(who) => who.clone(),
        Attribution::Unattributed => "unattributed".into(),
        Attribution::Ambiguous(who) => format!("ambiguous:{}", who.join(",")),
    }
}

/// A rational in [0, 1] with denominator drawn from 1..=1000.
pub fn random_prior<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    let den: i64 = rng.gen_range(1..=1000);
    BigRational::new(BigInt::from(rng.gen_range(0..=den)), BigInt::from(den))
}

/// Number of seeded random priors checked besides the fixed cases.
pub const RANDOM_PRIORS: usize = 100;

/// The canonical prior p(R = true).
pub fn canonical_prior() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(5))
}

/// Conditioning on the switch against surgery, for the canonical prior, the
/// degenerate priors 0 and 1 and [`RANDOM_PRIORS`] seeded random priors.
pub fn scenario_do_switch(seed: u64) -> Result<Report> {
    let mut r = Report::new(
        "do_switch",
        &[
            "case",
            "prior",
            "observational",
            "switched",
            "surgery",
            "switched_false",
            "surgery_false",
            "equivalent",
        ],
    );
    r.header("seed", seed);
    r.header("observational", "p(R=true | C=true, A=none)");
    r.header("switched", "p(R=true | A=force_true)");
    r.header("surgery", "p(R=true) after do(C=true)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = vec![
        ("canonical".to_string(), canonical_prior()),
        ("zero".to_string(), BigRational::from_integer(0.into())),
        ("one".to_string(), BigRational::one()),
    ];
    for i in 0..RANDOM_PRIORS {
        cases.push((format!("random-{i}"), random_prior(&mut rng)));
    }
    let mut ok = true;
    for (case, prior) in cases {
        let v = switch_equivalence_check(&raincoat_net(&prior)?, None)?;
        ok &= v.equivalent && v.switched == prior;
        if !prior.is_zero() {
            ok &= v.observational == Some(BigRational::one());
        }
        r.row(vec![
            case,
            format_rational(&prior),
            v.observational
                .as_ref()
                .map_or_else(|| "undefined".to_string(), format_rational),
            format_rational(&v.switched),
            format_rational(&v.surgery),
            format_rational(&v.switched_false),
            format_rational(&v.surgery_false),
            v.equivalent.to_string(),
        ]);
    }
    r.passed = ok;
    Ok(r)
}
