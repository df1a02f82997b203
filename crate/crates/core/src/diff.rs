//! Continuous jet calculus: total derivatives, Euler operators, prolonged
//! symmetry action.
//!
//! Jet atoms `u_J` are independent coordinates. `D_i` raises `J` on axis `i`
//! for every jet in an expression and differentiates independent variables
//! `x^i` directly.

use crate::expr::{canon, partial_rf, Atom, Expr, Mode, MultiIndex, Rf, VarRef};
use crate::linop::Characteristic;
use crate::verify::{zero_test, Status, Verdict, ZeroTestConfig};

pub(crate) fn total_derivative_rf(r: &Rf, axis: usize) -> Rf {
    r.derive(&mut |a| match a {
        Atom::Jet { .. } | Atom::ArbJet { .. } => {
            let (var, index) = a.jet_parts().expect("jet atom");
            if index.mode() == Mode::Derivative {
                Rf::atom(var.at(index.bump(axis, 1)))
            } else {
                Rf::zero()
            }
        }
        Atom::Indep { axis: k, .. } if *k == axis => Rf::one(),
        _ => Rf::zero(),
    })
}

pub(crate) fn total_derivative_multi_rf(r: &Rf, index: &MultiIndex) -> Rf {
    let mut acc = r.clone();
    for (axis, &n) in index.offsets().iter().enumerate() {
        for _ in 0..n {
            if acc.is_zero() {
                return acc;
            }
            acc = total_derivative_rf(&acc, axis);
        }
    }
    acc
}

/// `E_var(l) = Σ_J (−D)_J ∂l/∂var_J` over the jets of `var` present in `l`.
pub(crate) fn euler_rf(l: &Rf, var: &VarRef) -> Rf {
    let mut acc = Rf::zero();
    for a in l.atoms().iter().filter(|a| a.is_jet_of(var)) {
        let (_, index) = a.jet_parts().expect("jet atom");
        let term = total_derivative_multi_rf(&partial_rf(l, a), index);
        acc = if index.order() % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// `D_i e`.
pub fn total_derivative(e: &Expr, axis: usize) -> Expr {
    total_derivative_rf(&canon(e), axis).to_expr()
}

/// `D_J e`; total derivatives commute so the order of application is irrelevant.
pub fn total_derivative_multi(e: &Expr, index: &MultiIndex) -> Expr {
    total_derivative_multi_rf(&canon(e), index).to_expr()
}

/// Euler operator with respect to a dependent variable or arbitrary function.
pub fn euler_operator(l: &Expr, var: &VarRef) -> Expr {
    euler_rf(&canon(l), var).to_expr()
}

pub(crate) fn prolonged_action_rf(q: &[(VarRef, Rf)], e: &Rf, mode: Mode) -> Rf {
    let atoms = e.atoms();
    let mut acc = Rf::zero();
    for (var, qa) in q {
        for a in atoms.iter().filter(|a| a.is_jet_of(var)) {
            let (_, index) = a.jet_parts().expect("jet atom");
            let lifted = crate::linop::lift_rf(mode, qa, index);
            if !lifted.is_zero() {
                acc = acc.add(&lifted.mul(&partial_rf(e, a)));
            }
        }
    }
    acc
}

/// `X(e) = Σ_{α,J} D_J(Q^α) ∂e/∂u^α_J`.
pub fn prolonged_action(q: &Characteristic, e: &Expr) -> Expr {
    prolonged_action_rf(&q.components_rf(), &canon(e), Mode::Derivative).to_expr()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VariationalError {
    #[error("not variational: Euler expression for `{var}` does not vanish ({})", verdict.status)]
    NotVariational {
        var: VarRef,
        residual: Expr,
        verdict: Verdict,
    },
}

/// Checks that `X(L)` is a total divergence by testing that every Euler
/// expression of it vanishes. Arbitrary functions count as dependent
/// variables.
pub fn verify_variational(
    l: &Expr,
    q: &Characteristic,
    config: &ZeroTestConfig,
) -> Result<(), VariationalError> {
    verify_in(Mode::Derivative, l, q, config).map(|_| ())
}

pub(crate) fn verify_in(
    mode: Mode,
    l: &Expr,
    q: &Characteristic,
    config: &ZeroTestConfig,
) -> Result<Status, VariationalError> {
    let xl = prolonged_action_rf(&q.components_rf(), &canon(l), mode);
    let vars: std::collections::BTreeSet<VarRef> = xl
        .atoms()
        .iter()
        .filter_map(|a| a.jet_parts().map(|(v, _)| v))
        .collect();
    let mut weakest = Status::ProvedZero;
    for var in vars {
        let residual = crate::linop::euler_in(mode, &xl, &var).to_expr();
        let verdict = zero_test(&residual, config);
        if !verdict.status.is_zero() {
            return Err(VariationalError::NotVariational {
                var,
                residual,
                verdict,
            });
        }
        weakest = weakest.max(verdict.status);
    }
    Ok(weakest)
}
