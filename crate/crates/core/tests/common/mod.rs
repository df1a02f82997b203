#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use noether2::io::{parse, ProblemFile};
use noether2::linop::euler;
use noether2::{
    canonicalize, same, substitute, Atom, Characteristic, Expr, FluxVector, LinearOperator, Mode,
    MultiIndex, VarRef,
};
use proptest::prelude::*;

pub fn corpus_text(name: &str) -> String {
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

pub fn load(name: &str) -> ProblemFile {
    parse(&corpus_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fields(p: &ProblemFile) -> Vec<VarRef> {
    p.fields
        .iter()
        .map(|f| VarRef::dependent(&f.name))
        .collect()
}

pub fn characteristic(p: &ProblemFile) -> Characteristic {
    let components = p
        .fields
        .iter()
        .map(|f| {
            let q = p
                .characteristic
                .iter()
                .find(|(name, _)| *name == f.name)
                .map(|(_, q)| q.clone())
                .unwrap_or_else(Expr::zero);
            (VarRef::dependent(&f.name), q)
        })
        .collect();
    Characteristic::new(components, p.family()).expect("linear characteristic")
}

pub fn constraint_operator(p: &ProblemFile) -> LinearOperator {
    LinearOperator::from_linear_forms(p.kind, p.axes(), &p.constraints, &p.family())
        .expect("linear constraints")
}

pub fn jet(name: &str, j: &[u32]) -> Expr {
    Expr::atom(Atom::jet(name, MultiIndex::derivative(j)))
}

pub fn lat(name: &str, j: &[i32]) -> Expr {
    Expr::atom(Atom::jet(name, MultiIndex::shift(j)))
}

pub fn arb(name: &str, index: MultiIndex) -> Expr {
    Expr::atom(Atom::arb(name, index))
}

pub fn param(name: &str) -> Expr {
    Expr::atom(Atom::param(name))
}

pub fn family(names: &[&str]) -> Vec<Arc<str>> {
    names.iter().map(|n| Arc::from(*n)).collect()
}

/// Multi-indices of order at most 2 (continuous) or offsets in -1..=1 (lattice).
pub fn index(mode: Mode) -> BoxedStrategy<MultiIndex> {
    match mode {
        Mode::Derivative => (0u32..=2, 0u32..=2)
            .prop_filter("order at most 2", |(a, b)| a + b <= 2)
            .prop_map(|(a, b)| MultiIndex::derivative(&[a, b]))
            .boxed(),
        Mode::Shift => (-1i32..=1, -1i32..=1)
            .prop_map(|(a, b)| MultiIndex::shift(&[a, b]))
            .boxed(),
    }
}

fn leaf(mode: Mode, names: &'static [&'static str]) -> BoxedStrategy<Expr> {
    prop_oneof![
        4 => (prop::sample::select(names), index(mode))
            .prop_map(|(n, j)| Expr::atom(Atom::jet(n, j))),
        1 => (-3i64..=3).prop_map(Expr::int),
        1 => Just(param("k")),
    ]
    .boxed()
}

/// Random expressions in jets of `names` over two axes: sums, products and
/// squares, with the occasional `1/(1 + p^2)` and `exp`.
pub fn expr(mode: Mode, names: &'static [&'static str]) -> BoxedStrategy<Expr> {
    tree(mode, names, 1)
}

/// Like [`expr`] but without reciprocals.
pub fn polynomial(mode: Mode, names: &'static [&'static str]) -> BoxedStrategy<Expr> {
    tree(mode, names, 0)
}

fn tree(mode: Mode, names: &'static [&'static str], recip: u32) -> BoxedStrategy<Expr> {
    leaf(mode, names)
        .prop_recursive(3, 12, 2, move |inner| {
            prop_oneof![
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                1 => inner.clone().prop_map(|a| Expr::powi(a, 2)),
                recip => inner.clone().prop_map(|a| (Expr::one() + Expr::powi(a, 2)).recip()),
                1 => inner.prop_map(Expr::exp),
            ]
        })
        .boxed()
}

/// Random 1×1 operator with up to three terms whose coefficients involve `u`.
pub fn operator(mode: Mode) -> BoxedStrategy<LinearOperator> {
    prop::collection::vec((index(mode), polynomial(mode, &["u"])), 1..=3)
        .prop_map(move |terms| {
            let mut op = LinearOperator::zero(mode, 2, 1, 1);
            for (j, c) in terms {
                op.add_term(0, 0, j, &c);
            }
            op
        })
        .boxed()
}

/// `E_w(D_1 F + D_2 G)` (or the lattice version) for `w = u, v`.
pub fn check_null_lagrangian(mode: Mode, f: &Expr, g: &Expr) -> Result<(), String> {
    let l = FluxVector(vec![f.clone(), g.clone()]).divergence(mode);
    for w in ["u", "v"] {
        let e = euler(mode, &l, &VarRef::dependent(w));
        if !canonicalize(&e).is_zero() {
            return Err(format!("E_{w}({l}) = {e}"));
        }
    }
    Ok(())
}

/// `div P = a·𝒟(b) − b·𝒟†(a)` for the concomitant `P`.
pub fn check_concomitant(op: &LinearOperator, a: &Expr, b: &Expr) -> Result<(), String> {
    let fl = op.bilinear_fluxes(a, 0, std::slice::from_ref(b));
    let rhs = a * op.apply(0, 0, b) - b * op.adjoint().apply(0, 0, a);
    if same(&fl.divergence(op.mode()), &rhs) {
        Ok(())
    } else {
        Err(format!("{op}: div P differs from a𝒟b − b𝒟†a"))
    }
}

/// Terms `c·J γ^r` of a characteristic component, per arbitrary function.
pub type GaugeTerms = [Vec<(MultiIndex, Expr)>; 2];

fn gauge_form(terms: &GaugeTerms, names: [&str; 2]) -> Expr {
    Expr::add(
        terms
            .iter()
            .zip(names)
            .flat_map(|(ts, name)| ts.iter().map(move |(j, c)| c * arb(name, j.clone()))),
    )
}

/// Relations for `g = M h` equal `Mᵀ` times the relations for `g`.
pub fn check_reparametrization(
    mode: Mode,
    l: &Expr,
    terms: &GaugeTerms,
    m: [[i64; 2]; 2],
) -> Result<(), String> {
    let relations = |q: Expr, names: [&str; 2]| {
        let ch = Characteristic::new(vec![(VarRef::dependent("u"), q)], family(&names))
            .expect("linear by construction");
        match mode {
            Mode::Derivative => noether2::noether::noether2_relations(l, &ch),
            Mode::Shift => noether2::noether_disc::noether2_relations_disc(l, &ch),
        }
    };
    let q = gauge_form(terms, ["g1", "g2"]);
    let by_g = relations(q.clone(), ["g1", "g2"]);

    let mut bindings = std::collections::BTreeMap::new();
    for a in q.atoms() {
        if let Atom::ArbJet { func, index } = &a {
            let r = if &**func == "g1" { 0 } else { 1 };
            let image = Expr::int(m[r][0]) * arb("h1", index.clone())
                + Expr::int(m[r][1]) * arb("h2", index.clone());
            bindings.insert(a.clone(), image);
        }
    }
    let by_h = relations(substitute(&q, &bindings), ["h1", "h2"]);
    for rho in 0..2 {
        let expected = Expr::int(m[0][rho]) * &by_g[0] + Expr::int(m[1][rho]) * &by_g[1];
        if !same(&by_h[rho], &expected) {
            return Err(format!(
                "relation h{} = {} but expected {}",
                rho + 1,
                by_h[rho],
                expected
            ));
        }
    }
    Ok(())
}

pub fn gauge_terms(mode: Mode) -> BoxedStrategy<GaugeTerms> {
    let side = || prop::collection::vec((index(mode), leaf(mode, &["u"])), 1..=2);
    (side(), side()).prop_map(|(a, b)| [a, b]).boxed()
}

/// Sums of one to three products of two leaves.
pub fn small_lagrangian(mode: Mode) -> BoxedStrategy<Expr> {
    prop::collection::vec((leaf(mode, &["u"]), leaf(mode, &["u"])), 1..=3)
        .prop_map(|ps| Expr::add(ps.into_iter().map(|(a, b)| a * b)))
        .boxed()
}

pub fn matrix() -> impl Strategy<Value = [[i64; 2]; 2]> {
    [[-3i64..=3, -3i64..=3], [-3i64..=3, -3i64..=3]]
}
