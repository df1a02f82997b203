use std::path::PathBuf;

use noether2::io::{parse, print, run_pipeline, Options, ResultDocument, Stage};
use noether2::{Status, ZeroTestConfig};

const FILES: [&str; 6] = [
    "wave",
    "area_preserving",
    "shallow_water",
    "lattice_kdv",
    "mkg_continuous",
    "mkg_discrete",
];

fn corpus(name: &str) -> String {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "corpus",
        &format!("{name}.n2"),
    ]
    .iter()
    .collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(name: &str, options: &Options) -> ResultDocument {
    run_pipeline(&parse(&corpus(name)).unwrap(), options)
}

#[test]
fn every_file_verifies() {
    for name in FILES {
        for strict in [false, true] {
            let doc = run(
                name,
                &Options {
                    expect_strict: strict,
                    ..Options::default()
                },
            );
            assert!(doc.ok, "{name} (strict {strict}): {:?}", doc.first_mismatch);
            assert!(doc.check().is_ok());
            assert!(!doc.expectations.is_empty(), "{name} has no expectations");
        }
    }
}

#[test]
fn printer_round_trips_every_file() {
    for name in FILES {
        let p = parse(&corpus(name)).unwrap();
        let printed = print(&p);
        assert_eq!(parse(&printed).unwrap(), p, "{name}");
    }
}

#[test]
fn json_round_trips_and_is_reproducible() {
    for name in FILES {
        let options = Options::default();
        let a = run(name, &options);
        let json = a.to_json();
        assert_eq!(ResultDocument::from_json(&json).unwrap(), a, "{name}");
        assert_eq!(run(name, &options).to_json(), json, "{name}");
        assert!(!json.contains("timing_ms"));
    }
}

#[test]
fn timing_is_opt_in() {
    let doc = run(
        "wave",
        &Options {
            timing: true,
            ..Options::default()
        },
    );
    let t = doc.timing_ms.as_ref().expect("timings requested");
    assert!(t.contains_key("euler"));
    let back = ResultDocument::from_json(&doc.to_json()).unwrap();
    assert_eq!(back.timing_ms.map(|m| m.len()), Some(t.len()));
}

#[test]
fn wave_residuals_are_exact_and_fluxes_match() {
    let doc = run("wave", &Options::default());
    assert_eq!(doc.residuals.len(), 2);
    assert!(doc
        .residuals
        .iter()
        .all(|r| r.verdict.status == Status::ProvedZero));
    let claw = doc.conservation_law.as_ref().unwrap();
    assert_eq!(claw.verdict.status, Status::ProvedZero);
    assert_eq!(doc.euler[0].expr, "-u_xx + u_tt");
}

#[test]
fn lattice_kdv_potential_link() {
    let doc = run("lattice_kdv", &Options::default());
    let link = doc.potential_link.as_ref().unwrap();
    assert!(link.matches_potential_form);
    assert_eq!(doc.residuals[0].verdict.status, Status::ProvedZero);
}

#[test]
fn mkg_relation_with_more_trials() {
    let options = Options {
        config: ZeroTestConfig {
            trials: 500,
            ..ZeroTestConfig::default()
        },
        ..Options::default()
    };
    for name in ["mkg_continuous", "mkg_discrete"] {
        let doc = run(name, &options);
        let status = doc.relations[0].verdict.status;
        assert!(
            matches!(status, Status::ProvedZero | Status::ProbablyZero),
            "{name}: {status}"
        );
        assert!(doc.invariance.as_ref().unwrap().verdict.is_zero());
    }
}

#[test]
fn stages_are_cumulative() {
    let p = parse(&corpus("shallow_water")).unwrap();
    let at = |stage| {
        run_pipeline(
            &p,
            &Options {
                stage,
                ..Options::default()
            },
        )
    };
    let el = at(Stage::El);
    assert_eq!(el.euler.len(), 2);
    assert!(el.residuals.is_empty() && el.conservation_law.is_none());
    let rel = at(Stage::Relation);
    assert_eq!(rel.residuals.len(), 2);
    assert!(rel.conservation_law.is_none());
    let claw = at(Stage::Claw);
    assert!(claw.conservation_law.is_some());
    assert_eq!(claw.specializations.len(), 2);
    assert!(claw.identities.is_empty() && claw.expectations.is_empty());
    let all = at(Stage::Verify);
    assert_eq!(all.identities.len(), 2);
    assert!(all
        .identities
        .iter()
        .all(|i| i.verdict.status == Status::ProvedZero));
}

#[test]
fn perturbed_multiplier_is_reported() {
    let text = corpus("wave").replace("multiplier 2: u_x + u_t", "multiplier 2: u_x + u_t + u");
    let doc = run_pipeline(&parse(&text).unwrap(), &Options::default());
    assert!(!doc.ok);
    let bad = &doc.residuals[1];
    assert_eq!(bad.verdict.status, Status::Nonzero);
    assert!(bad.verdict.counterexample.is_some());
    assert!(doc.conservation_law.is_none());
    assert_eq!(
        doc.first_mismatch.as_deref(),
        Some("residual g2 is nonzero")
    );
}
