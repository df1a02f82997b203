//! Noether's second theorem for differential problems: relations between
//! Euler–Lagrange expressions, residuals against Lagrange multipliers for
//! constrained arbitrary functions, and the resulting conservation laws.
//!
//! The discrete counterparts in [`crate::noether_disc`] share the
//! implementation; only the calculus (total derivatives versus shifts)
//! differs.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::expr::{canon, Atom, Expr, Mode, Rf, VarRef};
use crate::linop::{divergence_rf, euler_in, lift_rf, Characteristic, FluxVector, LinearOperator};
use crate::verify::{zero_test_rf, Verdict, ZeroTestConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoetherError {
    #[error("residual {index} does not vanish ({})", verdict.status)]
    ResidualNonzero { index: usize, verdict: Verdict },
    #[error("binding violates constraint row {row} ({})", verdict.status)]
    ConstraintViolated { row: usize, verdict: Verdict },
    #[error("operator shape mismatch: {0}")]
    Shape(String),
}

/// Conservation law `div P = R₀` built from the bilinear concomitant of the
/// constraint operator. `R₀ = Σ ν^s 𝒟_sr(γ^r) − Σ γ^r relation_r` vanishes
/// for constraint-satisfying `γ` on solutions of the Euler–Lagrange
/// equations.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationLaw {
    pub mode: Mode,
    pub fluxes: FluxVector,
    pub defect: Expr,
    pub constraints: LinearOperator,
    pub multipliers: Vec<Expr>,
    pub family: Vec<Arc<str>>,
}

impl ConservationLaw {
    /// `div P − R₀`, canonical; zero whenever the residuals vanish.
    pub fn identity_residual(&self) -> Expr {
        let ps: Vec<Rf> = self.fluxes.0.iter().map(canon).collect();
        divergence_rf(self.mode, &ps)
            .sub(&canon(&self.defect))
            .to_expr()
    }
}

pub(crate) fn family_operand(mode: Mode, axes: usize, name: &Arc<str>) -> Rf {
    Rf::atom(Atom::arb(name, crate::expr::MultiIndex::zero(mode, axes)))
}

pub(crate) fn euler_expressions_in(mode: Mode, l: &Rf, fields: &[VarRef]) -> Vec<Rf> {
    fields.iter().map(|f| euler_in(mode, l, f)).collect()
}

/// `Σ_α Q^α E_α(L)`.
fn weighted_sum(mode: Mode, l: &Expr, q: &Characteristic) -> Rf {
    let l = canon(l);
    let mut acc = Rf::zero();
    for (var, qa) in q.components_rf() {
        if qa.is_zero() {
            continue;
        }
        acc = acc.add(&qa.mul(&euler_in(mode, &l, &var)));
    }
    acc
}

pub(crate) fn relations_in(mode: Mode, l: &Expr, q: &Characteristic) -> Vec<Rf> {
    let hat = weighted_sum(mode, l, q);
    q.family()
        .iter()
        .map(|g| euler_in(mode, &hat, &VarRef::arbitrary(g)))
        .collect()
}

pub(crate) fn residuals_in(
    mode: Mode,
    l: &Expr,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
) -> Result<Vec<Rf>, NoetherError> {
    check_shape(mode, q, constraints, multipliers)?;
    let relations = relations_in(mode, l, q);
    let adj = constraints.adjoint();
    let nus: Vec<Rf> = multipliers.iter().map(canon).collect();
    Ok(relations
        .iter()
        .enumerate()
        .map(|(r, rel)| rel.sub(&adj.apply_row_rf(r, &nus)))
        .collect())
}

fn check_shape(
    mode: Mode,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
) -> Result<(), NoetherError> {
    if constraints.mode() != mode {
        return Err(NoetherError::Shape(
            "constraint operator has the wrong kind".into(),
        ));
    }
    if constraints.cols() != q.family().len() {
        return Err(NoetherError::Shape(format!(
            "{} constraint columns for {} arbitrary functions",
            constraints.cols(),
            q.family().len()
        )));
    }
    if constraints.rows() != multipliers.len() {
        return Err(NoetherError::Shape(format!(
            "{} constraint rows for {} multipliers",
            constraints.rows(),
            multipliers.len()
        )));
    }
    Ok(())
}

pub(crate) fn conservation_law_in(
    mode: Mode,
    l: &Expr,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
    config: &ZeroTestConfig,
) -> Result<ConservationLaw, NoetherError> {
    let residuals = residuals_in(mode, l, q, constraints, multipliers)?;
    for (index, res) in residuals.iter().enumerate() {
        let verdict = zero_test_rf(res, config);
        if !verdict.status.is_zero() {
            return Err(NoetherError::ResidualNonzero { index, verdict });
        }
    }
    let axes = constraints.axes();
    let gammas: Vec<Rf> = q
        .family()
        .iter()
        .map(|g| family_operand(mode, axes, g))
        .collect();
    let nus: Vec<Rf> = multipliers.iter().map(canon).collect();
    let mut flux = vec![Rf::zero(); axes];
    let mut defect = Rf::zero();
    for (s, nu) in nus.iter().enumerate() {
        for (i, p) in constraints
            .concomitant_rf(nu, s, &gammas)
            .into_iter()
            .enumerate()
        {
            flux[i] = flux[i].add(&p);
        }
        defect = defect.add(&nu.mul(&constraints.apply_row_rf(s, &gammas)));
    }
    for (g, rel) in gammas.iter().zip(relations_in(mode, l, q)) {
        defect = defect.sub(&g.mul(&rel));
    }
    Ok(ConservationLaw {
        mode,
        fluxes: FluxVector(flux.iter().map(Rf::to_expr).collect()),
        defect: defect.to_expr(),
        constraints: constraints.clone(),
        multipliers: multipliers.to_vec(),
        family: q.family().to_vec(),
    })
}

/// Substitutes `γ^r_J ↦ D_J b^r` (or `S_J b^r`) after checking that the
/// bindings satisfy every constraint row.
pub(crate) fn specialize_in(
    cl: &ConservationLaw,
    bindings: &BTreeMap<Arc<str>, Expr>,
    config: &ZeroTestConfig,
) -> Result<ConservationLaw, NoetherError> {
    let mode = cl.mode;
    let images = cl
        .family
        .iter()
        .map(|g| {
            bindings
                .get(g)
                .map(canon)
                .ok_or_else(|| NoetherError::Shape(format!("no binding for `{g}`")))
        })
        .collect::<Result<Vec<Rf>, _>>()?;
    for row in 0..cl.constraints.rows() {
        let applied = cl.constraints.apply_row_rf(row, &images);
        let verdict = zero_test_rf(&applied, config);
        if !verdict.status.is_zero() {
            return Err(NoetherError::ConstraintViolated { row, verdict });
        }
    }
    let mut sub = |a: &Atom| -> Option<Rf> {
        let Atom::ArbJet { func, index } = a else {
            return None;
        };
        let col = cl.family.iter().position(|g| g == func)?;
        Some(lift_rf(mode, &images[col], index))
    };
    let mut apply = |e: &Expr| -> Expr {
        canon(e)
            .substitute(&mut sub)
            .expect("specialization keeps denominators nonzero")
            .to_expr()
    };
    let fluxes = FluxVector(cl.fluxes.0.iter().map(&mut apply).collect());
    let defect = apply(&cl.defect);
    Ok(ConservationLaw {
        fluxes,
        defect,
        ..cl.clone()
    })
}

/// Relation operator `𝒟` with `relation_r = Σ_α 𝒟_{rα}(E_α(L))`; the
/// transposed adjoint of the characteristic's operator.
pub fn relation_operator(q: &Characteristic, mode: Mode, axes: usize) -> LinearOperator {
    q.operator(mode, axes).adjoint()
}

pub(crate) fn characteristics_in(
    op: &LinearOperator,
    fields: &[VarRef],
    family: &[Arc<str>],
) -> Characteristic {
    assert_eq!(
        op.rows(),
        family.len(),
        "one operator row per arbitrary function"
    );
    assert_eq!(
        op.cols(),
        fields.len(),
        "one operator column per dependent variable"
    );
    let adj = op.adjoint();
    let gammas: Vec<Rf> = family
        .iter()
        .map(|g| family_operand(op.mode(), op.axes(), g))
        .collect();
    let comps = fields
        .iter()
        .enumerate()
        .map(|(alpha, f)| (f.clone(), adj.apply_row_rf(alpha, &gammas).to_expr()))
        .collect();
    Characteristic::new(comps, family.to_vec()).expect("adjoint action is linear")
}

/// Euler–Lagrange expressions, one per field.
pub fn euler_expressions(l: &Expr, fields: &[VarRef]) -> Vec<Expr> {
    euler_expressions_in(Mode::Derivative, &canon(l), fields)
        .iter()
        .map(Rf::to_expr)
        .collect()
}

/// `E_{γ^r}(Q^α E_α(L))` for each arbitrary function; identically zero when
/// the characteristic is an unconstrained variational symmetry.
pub fn noether2_relations(l: &Expr, q: &Characteristic) -> Vec<Expr> {
    relations_in(Mode::Derivative, l, q)
        .iter()
        .map(Rf::to_expr)
        .collect()
}

/// `Q^α = Σ_r (𝒟^α_r)†(γ^r)` from an `R × q` relation operator.
pub fn characteristics_from_relations(
    op: &LinearOperator,
    fields: &[VarRef],
    family: &[Arc<str>],
) -> Characteristic {
    characteristics_in(op, fields, family)
}

/// `relation_r − Σ_s (𝒟_sr)†(ν^s)`.
pub fn constrained_residuals(
    l: &Expr,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
) -> Result<Vec<Expr>, NoetherError> {
    Ok(
        residuals_in(Mode::Derivative, l, q, constraints, multipliers)?
            .iter()
            .map(Rf::to_expr)
            .collect(),
    )
}

/// Conservation law from accepted multipliers; re-checks the residuals.
pub fn conservation_law(
    l: &Expr,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
    config: &ZeroTestConfig,
) -> Result<ConservationLaw, NoetherError> {
    conservation_law_in(Mode::Derivative, l, q, constraints, multipliers, config)
}

/// Specializes the arbitrary functions of a conservation law.
pub fn specialize_claw(
    cl: &ConservationLaw,
    bindings: &BTreeMap<Arc<str>, Expr>,
    config: &ZeroTestConfig,
) -> Result<ConservationLaw, NoetherError> {
    specialize_in(cl, bindings, config)
}
