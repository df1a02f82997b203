//! Noether's second theorem on lattices.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::expr::{canon, Expr, Mode, MultiIndex, Rf, VarRef};
use crate::linop::{Characteristic, LinearOperator};
use crate::noether::{
    characteristics_in, conservation_law_in, euler_expressions_in, relations_in, residuals_in,
    specialize_in, ConservationLaw, NoetherError,
};
use crate::verify::ZeroTestConfig;

/// Discrete Euler–Lagrange expressions, one per field.
pub fn euler_expressions_disc(l: &Expr, fields: &[VarRef]) -> Vec<Expr> {
    euler_expressions_in(Mode::Shift, &canon(l), fields)
        .iter()
        .map(Rf::to_expr)
        .collect()
}

/// `Ẽ_{γ^r}(Q^α Ẽ_α(L))` for each arbitrary function.
pub fn noether2_relations_disc(l: &Expr, q: &Characteristic) -> Vec<Expr> {
    relations_in(Mode::Shift, l, q)
        .iter()
        .map(Rf::to_expr)
        .collect()
}

/// `Q^α = Σ_r (𝒟̃^α_r)†(γ^r)`.
pub fn characteristics_from_relations_disc(
    op: &LinearOperator,
    fields: &[VarRef],
    family: &[Arc<str>],
) -> Characteristic {
    characteristics_in(op, fields, family)
}

/// `relation_r − Σ_s (𝒟̃_sr)†(ν^s)`.
pub fn constrained_residuals_disc(
    l: &Expr,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
) -> Result<Vec<Expr>, NoetherError> {
    Ok(residuals_in(Mode::Shift, l, q, constraints, multipliers)?
        .iter()
        .map(Rf::to_expr)
        .collect())
}

pub fn conservation_law_disc(
    l: &Expr,
    q: &Characteristic,
    constraints: &LinearOperator,
    multipliers: &[Expr],
    config: &ZeroTestConfig,
) -> Result<ConservationLaw, NoetherError> {
    conservation_law_in(Mode::Shift, l, q, constraints, multipliers, config)
}

pub fn specialize_claw_disc(
    cl: &ConservationLaw,
    bindings: &BTreeMap<Arc<str>, Expr>,
    config: &ZeroTestConfig,
) -> Result<ConservationLaw, NoetherError> {
    specialize_in(cl, bindings, config)
}

/// Outcome of clearing the denominator of a lattice multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialLink {
    /// `ν·(u_{1,0} − u_{0,1})`, canonical.
    pub cleared: Expr,
    /// Whether `cleared = c − (u_{1,1} − u_{0,0})(u_{1,0} − u_{0,1})`.
    pub matches_potential_form: bool,
}

/// Multiplies `nu` by `u_{1,0} − u_{0,1}`; setting the result to zero gives
/// the potential form `(u_{1,1} − u_{0,0})(u_{1,0} − u_{0,1}) = c`.
pub fn potential_link_check(nu: &Expr, field: &str, c: &Expr) -> PotentialLink {
    let u = |i: i32, j: i32| Expr::atom(crate::expr::Atom::jet(field, MultiIndex::shift(&[i, j])));
    let d = u(1, 0) - u(0, 1);
    let cleared = crate::expr::canonicalize(&(nu * &d));
    let target = c - (u(1, 1) - u(0, 0)) * &d;
    let matches_potential_form = nu.is_zero() || crate::expr::same(&cleared, &target);
    PotentialLink {
        cleared,
        matches_potential_form,
    }
}
