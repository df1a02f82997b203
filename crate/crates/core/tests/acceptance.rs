//! One check per acceptance criterion. Each prints a single PASS/FAIL line
//! on stderr (uncaptured, so it shows in plain `cargo test` output).

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use common::*;
use noether2::diff::{total_derivative, total_derivative_multi, verify_variational};
use noether2::io::{run_pipeline, Options, ProblemFile, ResultDocument};
use noether2::lattice::shift;
use noether2::noether::{
    conservation_law, constrained_residuals, euler_expressions, noether2_relations, specialize_claw,
};
use noether2::noether_disc::{
    conservation_law_disc, constrained_residuals_disc, euler_expressions_disc,
    noether2_relations_disc, potential_link_check,
};
use noether2::{
    canonicalize, evaluate, partial_wrt, same, zero_test, Atom, Characteristic, Expr, Mode,
    MultiIndex, Number, Status, VarRef, ZeroTestConfig,
};
use proptest::strategy::Strategy;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
const POINTS: usize = 200;

type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn is_zero(e: &Expr) -> bool {
    canonicalize(e).is_zero()
}

fn config() -> ZeroTestConfig {
    ZeroTestConfig {
        trials: POINTS,
        tol: TOL,
        seed: 0,
    }
}

/// Largest `|Σ s_k| / (1 + Σ |s_k|)` over seeded random real points, with
/// every summand evaluated on its own so cancellation happens numerically.
fn numeric_residual(summands: &[Expr], seed: u64) -> f64 {
    let atoms: std::collections::BTreeSet<Atom> = summands
        .iter()
        .flat_map(|s| s.atoms())
        .filter(|a| *a != Atom::Imag)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..POINTS {
        let point: BTreeMap<Atom, Number> = atoms
            .iter()
            .map(|a| (a.clone(), Number::float(rng.gen_range(-2.0..=2.0))))
            .collect();
        let (mut re, mut im, mut scale) = (0.0, 0.0, 0.0);
        for s in summands {
            let v = evaluate(s, &point).expect("finite at random points");
            let (r, i) = v.to_f64_pair();
            re += r;
            im += i;
            scale += v.magnitude();
        }
        worst = worst.max(re.hypot(im) / (1.0 + scale));
    }
    worst
}

/// `Σ_α Σ_J D_J(Q^α) ∂L/∂u^α_J` (or with shifts), straight from the jets of `L`.
fn prolonged(mode: Mode, ch: &Characteristic, l: &Expr) -> Expr {
    let mut terms = Vec::new();
    for a in l.atoms() {
        let Some((var, index)) = a.jet_parts() else {
            continue;
        };
        let Some((_, q)) = ch.components().iter().find(|(v, _)| *v == var) else {
            continue;
        };
        let lifted = match mode {
            Mode::Derivative => total_derivative_multi(q, index),
            Mode::Shift => shift(q, index),
        };
        terms.push(lifted * partial_wrt(l, &a));
    }
    Expr::add(terms)
}

fn verdict_ok(status: Status) -> bool {
    matches!(status, Status::ProvedZero | Status::ProbablyZero)
}

fn wave() -> Outcome {
    let p = load("wave");
    let ch = characteristic(&p);
    let ops = constraint_operator(&p);
    let residuals = constrained_residuals(&p.lagrangian, &ch, &ops, &p.multipliers)
        .map_err(|e| e.to_string())?;
    ensure(
        residuals.len() == 2 && residuals.iter().all(is_zero),
        || format!("residuals {residuals:?}"),
    )?;
    let cl = conservation_law(&p.lagrangian, &ch, &ops, &p.multipliers, &config())
        .map_err(|e| e.to_string())?;
    let (g1, g2) = (
        arb("g1", MultiIndex::zero(Mode::Derivative, 2)),
        arb("g2", MultiIndex::zero(Mode::Derivative, 2)),
    );
    let (ux, ut) = (jet("u", &[1, 0]), jet("u", &[0, 1]));
    let px = (&g1 + &g2) * &ux - (&g1 - &g2) * &ut;
    let pt = (&g1 - &g2) * &ux - (&g1 + &g2) * &ut;
    let reference = total_derivative(&px, 0) + total_derivative(&pt, 1);
    let gap = cl.fluxes.divergence(Mode::Derivative) - reference;
    ensure(is_zero(&gap), || {
        format!("divergence differs by {}", canonicalize(&gap))
    })?;
    Ok("2 residuals and the flux divergence gap are canonical zeros".into())
}

fn mkg_continuous() -> Outcome {
    let p = load("mkg_continuous");
    let ch = characteristic(&p);
    let e = euler_expressions(&p.lagrangian, &fields(&p));
    let (psi, psis) = (jet("psi", &[0; 4]), jet("psis", &[0; 4]));
    let ie = Expr::imag() * param("e");
    // Metric diag(-1, 1, 1, 1): −D_α(η^{σα}E_σ) = D_t E_A0 − Σ_i D_i E_Ai.
    let mut summands = vec![-(&ie * &psi * &e[0]), &ie * &psis * &e[1]];
    summands.push(total_derivative(&e[2], 0));
    for i in 1..4 {
        summands.push(-total_derivative(&e[2 + i], i));
    }
    let numeric = numeric_residual(&summands, 1);
    ensure(numeric <= TOL, || {
        format!("assembled relation reaches {numeric:.3e}")
    })?;

    let relation = noether2_relations(&p.lagrangian, &ch).remove(0);
    ensure(same(&relation, &Expr::add(summands)), || {
        "engine relation differs from the assembly".into()
    })?;
    let v = zero_test(&relation, &config());
    ensure(verdict_ok(v.status), || {
        format!("relation verdict {}", v.status)
    })?;

    let xl = prolonged(Mode::Derivative, &ch, &p.lagrangian);
    let xl_numeric = numeric_residual(std::slice::from_ref(&xl), 2);
    let xv = zero_test(&xl, &config());
    ensure(verdict_ok(xv.status) && xl_numeric <= TOL, || {
        format!("X(L) verdict {} numeric {xl_numeric:.3e}", xv.status)
    })?;
    Ok(format!(
        "relation {} (max numeric {numeric:.1e} over {POINTS} points), X(L) {}",
        v.status, xv.status
    ))
}

fn bind(pairs: &[(&str, i64)]) -> BTreeMap<Arc<str>, Expr> {
    pairs
        .iter()
        .map(|(n, v)| (Arc::from(*n), Expr::int(*v)))
        .collect()
}

fn shallow_water() -> Outcome {
    let p = load("shallow_water");
    let ch = characteristic(&p);
    let ops = constraint_operator(&p);
    let residuals = constrained_residuals(&p.lagrangian, &ch, &ops, &p.multipliers)
        .map_err(|e| e.to_string())?;
    ensure(residuals.iter().all(is_zero), || {
        "a residual is nonzero".into()
    })?;
    let cl = conservation_law(&p.lagrangian, &ch, &ops, &p.multipliers, &config())
        .map_err(|e| e.to_string())?;
    ensure(is_zero(&cl.identity_residual()), || {
        "conservation-law identity fails".into()
    })?;
    let nu = &p.multipliers;
    for (pairs, t_part, label_axis) in [
        (bind(&[("gam1", 1), ("gam2", 0)]), &nu[0], 1),
        (bind(&[("gam1", 0), ("gam2", 1)]), &nu[1], 2),
    ] {
        let sp = specialize_claw(&cl, &pairs, &config()).map_err(|e| e.to_string())?;
        let expected = total_derivative(t_part, 0) + total_derivative(&nu[2], label_axis);
        let gap = sp.fluxes.divergence(Mode::Derivative) - expected;
        ensure(is_zero(&gap), || {
            format!("specialization along axis {label_axis} differs")
        })?;
    }
    Ok(format!(
        "{} residual rows exact, specializations give the two label-space laws",
        residuals.len()
    ))
}

fn lattice_kdv() -> Outcome {
    let p = load("lattice_kdv");
    let nu = p.multipliers[0].clone();
    let eu = euler_expressions_disc(&p.lagrangian, &fields(&p)).remove(0);
    let relation =
        &eu - (shift(&nu, &MultiIndex::shift(&[-1, 0])) - shift(&nu, &MultiIndex::shift(&[0, -1])));
    ensure(is_zero(&relation), || {
        format!("E(L) − (ν₋₁,₀ − ν₀,₋₁) = {}", canonicalize(&relation))
    })?;

    let ch = characteristic(&p);
    let ops = constraint_operator(&p);
    let residuals = constrained_residuals_disc(&p.lagrangian, &ch, &ops, &p.multipliers)
        .map_err(|e| e.to_string())?;
    ensure(residuals.iter().all(is_zero), || {
        "engine residual is nonzero".into()
    })?;

    let cl = conservation_law_disc(&p.lagrangian, &ch, &ops, &p.multipliers, &config())
        .map_err(|e| e.to_string())?;
    let g = arb("g", MultiIndex::zero(Mode::Shift, 2));
    let display = [
        &g * shift(&nu, &MultiIndex::shift(&[-1, 0])),
        -(&g * shift(&nu, &MultiIndex::shift(&[0, -1]))),
    ];
    let fluxes = cl.fluxes.components();
    ensure(fluxes.iter().zip(&display).all(|(a, b)| same(a, b)), || {
        format!("fluxes {fluxes:?}")
    })?;

    let c = param("c");
    let link = potential_link_check(&nu, "u", &c);
    let d = lat("u", &[1, 0]) - lat("u", &[0, 1]);
    let pkdv = (lat("u", &[1, 1]) - lat("u", &[0, 0])) * &d;
    ensure(
        link.matches_potential_form && same(&link.cleared, &(c - pkdv)),
        || format!("potential link cleared to {}", link.cleared),
    )?;
    Ok("residual exact, fluxes equal the displayed pair, ν = 0 gives the potential form".into())
}

fn mkg_discrete() -> Outcome {
    let p = load("mkg_discrete");
    let ch = characteristic(&p);
    let e = euler_expressions_disc(&p.lagrangian, &fields(&p));
    let (psi, psis) = (lat("psi", &[0; 4]), lat("psis", &[0; 4]));
    let ie = Expr::imag() * param("e");
    let mut summands = vec![-(&ie * &psi * &e[0]), &ie * &psis * &e[1]];
    // η^{αα} D̄_α†(E_α) with D̄_α† f = (S_{−α} f − f)/h_α and η = diag(-1, 1, 1, 1).
    for a in 0..4 {
        let h = param(&format!("h{a}"));
        let mut back = [0i32; 4];
        back[a] = -1;
        let adjoint = (shift(&e[2 + a], &MultiIndex::shift(&back)) - &e[2 + a]) / h;
        summands.push(if a == 0 { -adjoint } else { adjoint });
    }
    let numeric = numeric_residual(&summands, 3);
    ensure(numeric <= TOL, || {
        format!("assembled relation reaches {numeric:.3e}")
    })?;

    let relation = noether2_relations_disc(&p.lagrangian, &ch).remove(0);
    let rv = zero_test(&(&relation - Expr::add(summands)), &config());
    ensure(verdict_ok(rv.status), || {
        format!("engine relation vs assembly: {}", rv.status)
    })?;
    let v = zero_test(&relation, &config());
    ensure(verdict_ok(v.status), || {
        format!("relation verdict {}", v.status)
    })?;

    let xl = prolonged(Mode::Shift, &ch, &p.lagrangian);
    let xl_numeric = numeric_residual(std::slice::from_ref(&xl), 4);
    let xv = zero_test(&xl, &config());
    ensure(verdict_ok(xv.status) && xl_numeric <= TOL, || {
        format!("X̃L verdict {} numeric {xl_numeric:.3e}", xv.status)
    })?;
    Ok(format!(
        "relation {} (max numeric {numeric:.1e} over {POINTS} points), X̃L {}",
        v.status, xv.status
    ))
}

fn area_preserving() -> Outcome {
    let p = load("area_preserving");
    let ch = characteristic(&p);
    let ops = constraint_operator(&p);
    let residuals = constrained_residuals(&p.lagrangian, &ch, &ops, &p.multipliers)
        .map_err(|e| e.to_string())?;
    let eliminated = -total_derivative(&residuals[0], 1) + total_derivative(&residuals[1], 0);
    ensure(is_zero(&eliminated), || {
        format!("eliminated residual {}", canonicalize(&eliminated))
    })?;
    let relations = noether2_relations(&p.lagrangian, &ch);
    let free = -total_derivative(&relations[0], 1) + total_derivative(&relations[1], 0);
    ensure(is_zero(&free), || "eliminated relation is nonzero".into())?;
    ensure(!is_zero(&relations[0]), || {
        "relations are trivially zero".into()
    })?;
    let doc = run_pipeline(&p, &Options::default());
    let status = doc.eliminated.as_ref().map(|c| c.verdict.status);
    ensure(status == Some(Status::ProvedZero), || {
        format!("pipeline elimination {status:?}")
    })?;
    Ok("−D_y·row₁ + D_x·row₂ is a canonical zero, without the multiplier".into())
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn suite<S: Strategy>(
    label: &str,
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), String>,
) -> Result<String, String> {
    runner(cases)
        .run(&strategy, |v| {
            check(v).map_err(proptest::test_runner::TestCaseError::fail)
        })
        .map(|()| format!("{label} {cases}"))
        .map_err(|e| format!("{label}: {e}"))
}

fn perturbed_wave(seed: u64) -> ResultDocument {
    let text =
        corpus_text("wave").replace("multiplier 2: u_x + u_t", "multiplier 2: u_x + u_t + u");
    let p = noether2::io::parse(&text).unwrap();
    let options = Options {
        config: ZeroTestConfig {
            seed,
            ..ZeroTestConfig::default()
        },
        ..Options::default()
    };
    run_pipeline(&p, &options)
}

fn properties() -> Outcome {
    let mut parts = Vec::new();
    for mode in [Mode::Derivative, Mode::Shift] {
        parts.push(suite(
            &format!("{mode:?} null Lagrangians"),
            200,
            (expr(mode, &["u", "v"]), expr(mode, &["u", "v"])),
            |(f, g)| check_null_lagrangian(mode, &f, &g),
        )?);
    }
    for mode in [Mode::Derivative, Mode::Shift] {
        parts.push(suite(
            &format!("{mode:?} concomitants"),
            100,
            (
                operator(mode),
                expr(mode, &["a", "u"]),
                expr(mode, &["b", "u"]),
            ),
            |(op, a, b)| check_concomitant(&op, &a, &b),
        )?);
    }
    for mode in [Mode::Derivative, Mode::Shift] {
        parts.push(suite(
            &format!("{mode:?} R=2 reparametrizations"),
            100,
            (small_lagrangian(mode), gauge_terms(mode), matrix()),
            |(l, terms, m)| check_reparametrization(mode, &l, &terms, m),
        )?);
    }
    for name in ["mkg_continuous", "lattice_kdv"] {
        let p = load(name);
        for seed in [0, 7, 1 << 40] {
            let options = Options {
                config: ZeroTestConfig {
                    seed,
                    ..ZeroTestConfig::default()
                },
                ..Options::default()
            };
            ensure(
                run_pipeline(&p, &options).to_json() == run_pipeline(&p, &options).to_json(),
                || format!("{name} JSON differs between runs at seed {seed}"),
            )?;
        }
    }
    for seed in [0, 7, 1 << 40] {
        ensure(
            perturbed_wave(seed).to_json() == perturbed_wave(seed).to_json(),
            || format!("perturbed wave JSON differs at seed {seed}"),
        )?;
    }
    parts.push("byte-identical JSON for fixed seeds".into());
    Ok(parts.join(", "))
}

/// Adds a field value to one multiplier.
fn perturb(p: &ProblemFile, s: usize) -> ProblemFile {
    let mut q = p.clone();
    let field = &p.fields[0].name;
    let extra = match p.kind {
        Mode::Derivative => Expr::atom(Atom::jet(
            field,
            MultiIndex::zero(Mode::Derivative, p.axes()),
        )),
        Mode::Shift => Expr::atom(Atom::jet(field, MultiIndex::zero(Mode::Shift, p.axes()))),
    };
    q.multipliers[s] = &q.multipliers[s] + extra;
    q
}

fn negative_controls() -> Outcome {
    let mut flipped = 0;
    for name in ["wave", "area_preserving", "shallow_water", "lattice_kdv"] {
        let p = load(name);
        for s in 0..p.multipliers.len() {
            let q = perturb(&p, s);
            let doc = run_pipeline(&q, &Options::default());
            let bad: Vec<_> = doc
                .residuals
                .iter()
                .filter(|r| r.verdict.status == Status::Nonzero)
                .collect();
            ensure(!doc.ok && !bad.is_empty(), || {
                format!("{name} multiplier {}: not flagged", s + 1)
            })?;
            ensure(
                bad.iter().all(|r| r.verdict.counterexample.is_some()),
                || format!("{name} multiplier {}: no counterexample", s + 1),
            )?;
            let again = run_pipeline(&q, &Options::default());
            ensure(again.residuals == doc.residuals, || {
                format!(
                    "{name} multiplier {}: counterexample not reproducible",
                    s + 1
                )
            })?;
            flipped += 1;
        }
    }
    let u = VarRef::dependent("u");
    let l = Expr::rational(1, 2) * Expr::powi(jet("u", &[1]), 2);
    let ch = Characteristic::unchecked(vec![(u, jet("u", &[0]))]);
    ensure(verify_variational(&l, &ch, &config()).is_err(), || {
        "L = u_x²/2 with Q = u was accepted".into()
    })?;
    Ok(format!(
        "{flipped} perturbed multipliers flagged reproducibly, Q = u rejected"
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("wave residuals and fluxes", wave),
        (
            "continuous Maxwell-Klein-Gordon relation and invariance",
            mkg_continuous,
        ),
        ("shallow water residuals and specializations", shallow_water),
        (
            "lattice KdV residual, fluxes and potential link",
            lattice_kdv,
        ),
        (
            "discrete Maxwell-Klein-Gordon relation and invariance",
            mkg_discrete,
        ),
        ("area-preserving eliminated relation", area_preserving),
        ("property suites and determinism", properties),
        ("negative controls", negative_controls),
    ];
    let mut failed = Vec::new();
    for (i, (label, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(detail) => format!("criterion {}: PASS {label}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => format!("criterion {}: FAIL {label}: {why} [{secs:.2}s]", i + 1),
        };
        writeln!(std::io::stderr().lock(), "{line}").unwrap();
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
