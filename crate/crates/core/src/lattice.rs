//! Lattice calculus: shifts, forward and scaled differences, the discrete
//! Euler operator.
//!
//! Values of a field at distinct offsets are independent atoms. A shift
//! translates every offset and sends `n^i` to `n^i + j^i`.

use crate::expr::{canon, partial_rf, Atom, Expr, Mode, MultiIndex, Rf, VarRef};

pub(crate) fn shift_rf(r: &Rf, by: &MultiIndex) -> Rf {
    if by.is_zero() {
        return r.clone();
    }
    r.substitute(&mut |a| match a {
        Atom::Jet { .. } | Atom::ArbJet { .. } => {
            let (var, index) = a.jet_parts().expect("jet atom");
            (index.mode() == Mode::Shift).then(|| Rf::atom(var.at(index.plus(by))))
        }
        Atom::Indep { axis, .. } => {
            let step = by.offsets().get(*axis).copied().unwrap_or(0);
            (step != 0).then(|| {
                Rf::atom(a.clone()).add(&Rf::constant(crate::expr::Q::from_integer(step.into())))
            })
        }
        _ => None,
    })
    .expect("shifting preserves nonzero denominators")
}

pub(crate) fn discrete_euler_rf(l: &Rf, var: &VarRef) -> Rf {
    let mut acc = Rf::zero();
    for a in l.atoms().iter().filter(|a| a.is_jet_of(var)) {
        let (_, index) = a.jet_parts().expect("jet atom");
        acc = acc.add(&shift_rf(&partial_rf(l, a), &index.negated()));
    }
    acc
}

/// `S_J e`.
pub fn shift(e: &Expr, by: &MultiIndex) -> Expr {
    shift_rf(&canon(e), by).to_expr()
}

/// `D̃_i e = S_i e − e`.
pub fn forward_difference(e: &Expr, axes: usize, axis: usize) -> Expr {
    let r = canon(e);
    shift_rf(&r, &MultiIndex::unit(Mode::Shift, axes, axis))
        .sub(&r)
        .to_expr()
}

/// `D̄_i e = (S_i e − e)/h`.
pub fn scaled_difference(e: &Expr, axes: usize, axis: usize, step: &Expr) -> Expr {
    let r = canon(e);
    shift_rf(&r, &MultiIndex::unit(Mode::Shift, axes, axis))
        .sub(&r)
        .div(&canon(step))
        .expect("step length must be nonzero")
        .to_expr()
}

/// `Ẽ_var(l) = Σ_J S_{−J}(∂l/∂var_J)`.
pub fn discrete_euler(l: &Expr, var: &VarRef) -> Expr {
    discrete_euler_rf(&canon(l), var).to_expr()
}
