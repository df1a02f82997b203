//! Linear differential and difference operators, their adjoints, and the
//! bilinear concomitant that turns `a·𝒟(b) − b·𝒟†(a)` into a divergence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::binomial;

use crate::diff::{euler_rf, total_derivative_multi_rf, total_derivative_rf};
use crate::expr::{canon, linear_coefficients, Atom, Expr, Mode, MultiIndex, Rf, VarRef, Q};
use crate::lattice::{discrete_euler_rf, shift_rf};

/// `D_J r` for derivative mode, `S_J r` for shift mode.
pub(crate) fn lift_rf(mode: Mode, r: &Rf, index: &MultiIndex) -> Rf {
    match mode {
        Mode::Derivative => total_derivative_multi_rf(r, index),
        Mode::Shift => shift_rf(r, index),
    }
}

pub(crate) fn euler_in(mode: Mode, l: &Rf, var: &VarRef) -> Rf {
    match mode {
        Mode::Derivative => euler_rf(l, var),
        Mode::Shift => discrete_euler_rf(l, var),
    }
}

/// Euler operator of the given mode.
pub fn euler(mode: Mode, l: &Expr, var: &VarRef) -> Expr {
    euler_in(mode, &canon(l), var).to_expr()
}

/// `Σ_i D_i P^i` or `Σ_i D̃_i P^i`.
pub(crate) fn divergence_rf(mode: Mode, fluxes: &[Rf]) -> Rf {
    let axes = fluxes.len();
    let mut acc = Rf::zero();
    for (i, p) in fluxes.iter().enumerate() {
        let term = match mode {
            Mode::Derivative => total_derivative_rf(p, i),
            Mode::Shift => shift_rf(p, &MultiIndex::unit(Mode::Shift, axes, i)).sub(p),
        };
        acc = acc.add(&term);
    }
    acc
}

/// One component per independent-variable axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluxVector(pub Vec<Expr>);

impl FluxVector {
    pub fn zero(axes: usize) -> Self {
        FluxVector(vec![Expr::zero(); axes])
    }

    pub fn components(&self) -> &[Expr] {
        &self.0
    }

    pub fn divergence(&self, mode: Mode) -> Expr {
        let rs: Vec<Rf> = self.0.iter().map(canon).collect();
        divergence_rf(mode, &rs).to_expr()
    }
}

/// Finite matrix of operators; entry `(row, col)` maps multi-indices to
/// coefficients and acts as `f ↦ Σ_J c_J · D_J f` (or `S_J f`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOperator {
    mode: Mode,
    axes: usize,
    rows: usize,
    cols: usize,
    entries: Vec<BTreeMap<MultiIndex, Expr>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("row {row} is not linear homogeneous in the operand family")]
pub struct NotLinear {
    pub row: usize,
}

impl LinearOperator {
    pub fn zero(mode: Mode, axes: usize, rows: usize, cols: usize) -> Self {
        LinearOperator {
            mode,
            axes,
            rows,
            cols,
            entries: vec![BTreeMap::new(); rows * cols],
        }
    }

    /// `D_i` (or `S_i`) as a 1×1 operator.
    pub fn unit(mode: Mode, axes: usize, axis: usize) -> Self {
        let mut op = Self::zero(mode, axes, 1, 1);
        op.add_term(0, 0, MultiIndex::unit(mode, axes, axis), &Expr::one());
        op
    }

    /// Multiplication by `c` as a 1×1 operator.
    pub fn scalar(mode: Mode, axes: usize, c: &Expr) -> Self {
        let mut op = Self::zero(mode, axes, 1, 1);
        op.add_term(0, 0, MultiIndex::zero(mode, axes), c);
        op
    }

    /// Reads off the operator from forms that are linear homogeneous in the
    /// arbitrary functions `family`; column `r` is `family[r]`.
    pub fn from_linear_forms(
        mode: Mode,
        axes: usize,
        forms: &[Expr],
        family: &[Arc<str>],
    ) -> Result<Self, NotLinear> {
        let fam: BTreeSet<Arc<str>> = family.iter().cloned().collect();
        let mut op = Self::zero(mode, axes, forms.len(), family.len());
        for (row, form) in forms.iter().enumerate() {
            let r = canon(form);
            if r.is_zero() {
                continue;
            }
            let coeffs = linear_coefficients(&r, &fam).ok_or(NotLinear { row })?;
            for (atom, c) in coeffs {
                let Atom::ArbJet { func, index } = &atom else {
                    unreachable!("coefficients are keyed by family atoms")
                };
                if index.mode() != mode || index.axes() != axes {
                    return Err(NotLinear { row });
                }
                let col = family
                    .iter()
                    .position(|f| f == func)
                    .expect("family member");
                op.add_term_rf(row, col, index.clone(), &c);
            }
        }
        Ok(op)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> &BTreeMap<MultiIndex, Expr> {
        &self.entries[row * self.cols + col]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(BTreeMap::is_empty)
    }

    pub fn add_term(&mut self, row: usize, col: usize, index: MultiIndex, c: &Expr) {
        self.add_term_rf(row, col, index, &canon(c));
    }

    fn add_term_rf(&mut self, row: usize, col: usize, index: MultiIndex, c: &Rf) {
        assert_eq!(index.mode(), self.mode, "multi-index mode mismatch");
        assert_eq!(index.axes(), self.axes, "multi-index axis count mismatch");
        let slot = &mut self.entries[row * self.cols + col];
        let sum = match slot.get(&index) {
            Some(old) => canon(old).add(c),
            None => c.clone(),
        };
        if sum.is_zero() {
            slot.remove(&index);
        } else {
            slot.insert(index, sum.to_expr());
        }
    }

    pub(crate) fn apply_entry_rf(&self, row: usize, col: usize, f: &Rf) -> Rf {
        let mut acc = Rf::zero();
        for (index, c) in self.entry(row, col) {
            acc = acc.add(&canon(c).mul(&lift_rf(self.mode, f, index)));
        }
        acc
    }

    pub(crate) fn apply_row_rf(&self, row: usize, operands: &[Rf]) -> Rf {
        assert_eq!(
            operands.len(),
            self.cols,
            "operand count must equal column count"
        );
        let mut acc = Rf::zero();
        for (col, f) in operands.iter().enumerate() {
            acc = acc.add(&self.apply_entry_rf(row, col, f));
        }
        acc
    }

    /// Entry `(row, col)` applied to `f`.
    pub fn apply(&self, row: usize, col: usize, f: &Expr) -> Expr {
        self.apply_entry_rf(row, col, &canon(f)).to_expr()
    }

    /// `Σ_col 𝒟_{row,col}(operands[col])`.
    pub fn apply_row(&self, row: usize, operands: &[Expr]) -> Expr {
        let rs: Vec<Rf> = operands.iter().map(canon).collect();
        self.apply_row_rf(row, &rs).to_expr()
    }

    /// Formal adjoint, transposed, in normal form.
    ///
    /// Differential entries `{J → c}` become `Σ_K (−1)^{|J|} C(J,K) D_{J−K}(c)`
    /// at `K`; difference entries become `{−J → S_{−J} c}`.
    pub fn adjoint(&self) -> LinearOperator {
        let mut out = LinearOperator::zero(self.mode, self.axes, self.cols, self.rows);
        for row in 0..self.rows {
            for col in 0..self.cols {
                for (index, c) in self.entry(row, col) {
                    let c = canon(c);
                    match self.mode {
                        Mode::Shift => {
                            let back = index.negated();
                            out.add_term_rf(col, row, back.clone(), &shift_rf(&c, &back));
                        }
                        Mode::Derivative => {
                            let sign = if index.order() % 2 == 0 { 1 } else { -1 };
                            for k in sub_indices(index) {
                                let rest = MultiIndex::new(
                                    Mode::Derivative,
                                    index
                                        .offsets()
                                        .iter()
                                        .zip(k.offsets())
                                        .map(|(j, k)| j - k)
                                        .collect(),
                                )
                                .expect("k ≤ j");
                                let weight: BigInt = index
                                    .offsets()
                                    .iter()
                                    .zip(k.offsets())
                                    .map(|(&j, &k)| binomial(BigInt::from(j), BigInt::from(k)))
                                    .product();
                                let coeff = total_derivative_multi_rf(&c, &rest)
                                    .scale(&Q::from_integer(weight * sign));
                                out.add_term_rf(col, row, k, &coeff);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Fluxes `P` with `div P = a·Σ_c 𝒟_{row,c}(b_c) − Σ_c b_c·𝒟†_{row,c}(a)`.
    pub fn bilinear_fluxes(&self, a: &Expr, row: usize, b: &[Expr]) -> FluxVector {
        let a = canon(a);
        let bs: Vec<Rf> = b.iter().map(canon).collect();
        FluxVector(
            self.concomitant_rf(&a, row, &bs)
                .into_iter()
                .map(|p| p.to_expr())
                .collect(),
        )
    }

    pub(crate) fn concomitant_rf(&self, a: &Rf, row: usize, b: &[Rf]) -> Vec<Rf> {
        let mut flux = vec![Rf::zero(); self.axes];
        for (col, bc) in b.iter().enumerate() {
            for (index, c) in self.entry(row, col) {
                let w = canon(c).mul(a);
                match self.mode {
                    Mode::Derivative => peel(&w, index, bc, &mut flux),
                    Mode::Shift => telescope(&w, index, bc, &mut flux),
                }
            }
        }
        flux
    }
}

/// All `K ≤ J` componentwise.
fn sub_indices(j: &MultiIndex) -> Vec<MultiIndex> {
    let mut out: Vec<Vec<i32>> = vec![Vec::new()];
    for &n in j.offsets() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=n).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|o| MultiIndex::new(Mode::Derivative, o).expect("nonnegative"))
        .collect()
}

/// Integration by parts of `w·D_J b`, one derivative at a time, lowest axis
/// first: `w D_i D_{J'} b = D_i(w D_{J'} b) − (D_i w) D_{J'} b`.
fn peel(w: &Rf, index: &MultiIndex, b: &Rf, flux: &mut [Rf]) {
    let mut w = w.clone();
    let mut j = index.clone();
    while let Some(axis) = j.offsets().iter().position(|&n| n > 0) {
        j = j.bump(axis, -1);
        let term = w.mul(&total_derivative_multi_rf(b, &j));
        flux[axis] = flux[axis].add(&term);
        w = total_derivative_rf(&w, axis).neg();
    }
}

/// Summation by parts of `g·S_J b − S_{−J}(g)·b` along unit steps, axes in
/// order.
fn telescope(g: &Rf, index: &MultiIndex, b: &Rf, flux: &mut [Rf]) {
    let axes = index.axes();
    let mut k = MultiIndex::zero(Mode::Shift, axes);
    for axis in 0..axes {
        let n = index.offsets()[axis];
        for _ in 0..n.unsigned_abs() {
            if n > 0 {
                let next = k.bump(axis, 1);
                let h =
                    shift_rf(g, &next.negated()).mul(&shift_rf(b, &index.plus(&next.negated())));
                flux[axis] = flux[axis].add(&h);
                k = next;
            } else {
                let h = shift_rf(g, &k.negated()).mul(&shift_rf(b, &index.plus(&k.negated())));
                flux[axis] = flux[axis].sub(&h);
                k = k.bump(axis, -1);
            }
        }
    }
}

/// Variational-symmetry characteristic: one component per dependent variable,
/// linear homogeneous in a family of arbitrary functions. With an empty family
/// the components are unrestricted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Characteristic {
    components: Vec<(VarRef, Expr)>,
    family: Vec<Arc<str>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error(
    "characteristic component for `{field}` is not linear homogeneous in the arbitrary functions"
)]
pub struct NonlinearCharacteristic {
    pub field: String,
}

impl Characteristic {
    pub fn new(
        components: Vec<(VarRef, Expr)>,
        family: Vec<Arc<str>>,
    ) -> Result<Self, NonlinearCharacteristic> {
        let fam: BTreeSet<Arc<str>> = family.iter().cloned().collect();
        for (var, q) in &components {
            let r = canon(q);
            if !fam.is_empty() && !r.is_zero() && linear_coefficients(&r, &fam).is_none() {
                return Err(NonlinearCharacteristic {
                    field: var.name.to_string(),
                });
            }
        }
        Ok(Characteristic { components, family })
    }

    /// A characteristic with no arbitrary functions and no linearity check.
    pub fn unchecked(components: Vec<(VarRef, Expr)>) -> Self {
        Characteristic {
            components,
            family: Vec::new(),
        }
    }

    pub fn components(&self) -> &[(VarRef, Expr)] {
        &self.components
    }

    pub fn family(&self) -> &[Arc<str>] {
        &self.family
    }

    pub(crate) fn components_rf(&self) -> Vec<(VarRef, Rf)> {
        self.components
            .iter()
            .map(|(v, q)| (v.clone(), canon(q)))
            .collect()
    }

    /// Operator with `Q^α = Σ_r 𝒬_{αr}(γ^r)`; rows follow the components.
    pub fn operator(&self, mode: Mode, axes: usize) -> LinearOperator {
        let forms: Vec<Expr> = self.components.iter().map(|(_, q)| q.clone()).collect();
        LinearOperator::from_linear_forms(mode, axes, &forms, &self.family)
            .expect("checked at construction")
    }
}

impl fmt::Display for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..self.rows {
            let mut parts = Vec::new();
            for col in 0..self.cols {
                for (index, c) in self.entry(row, col) {
                    let op = if index.is_zero() {
                        String::new()
                    } else {
                        let letter = match self.mode {
                            Mode::Derivative => "D",
                            Mode::Shift => "S",
                        };
                        format!("{letter}{index}")
                    };
                    parts.push(format!("({c})*{op}[#{col}]"));
                }
            }
            let body = if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ")
            };
            writeln!(f, "row {row}: {body}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::same;

    fn f(name: &str, mode: Mode, j: &[i32]) -> Expr {
        let index = MultiIndex::new(mode, j.to_vec()).unwrap();
        Expr::atom(Atom::jet(name, index))
    }

    fn c(name: &str, j: &[i32]) -> Expr {
        f(name, Mode::Derivative, j)
    }

    fn s(name: &str, j: &[i32]) -> Expr {
        f(name, Mode::Shift, j)
    }

    #[test]
    fn adjoint_of_derivative_negates() {
        let dx = LinearOperator::unit(Mode::Derivative, 2, 0);
        let got = dx.adjoint().apply(0, 0, &c("f", &[0, 0]));
        assert!(same(&got, &-c("f", &[1, 0])));
        let m = LinearOperator::scalar(Mode::Derivative, 2, &c("u", &[0, 1]));
        assert_eq!(m.adjoint(), m);
    }

    #[test]
    fn adjoint_with_variable_coefficient() {
        // (a D_x)† f = −D_x(a f)
        let mut op = LinearOperator::zero(Mode::Derivative, 1, 1, 1);
        op.add_term(0, 0, MultiIndex::derivative(&[1]), &c("a", &[0]));
        let got = op.adjoint().apply(0, 0, &c("f", &[0]));
        let want = -(c("a", &[1]) * c("f", &[0]) + c("a", &[0]) * c("f", &[1]));
        assert!(same(&got, &want));
        assert_eq!(op.adjoint().adjoint(), op);
    }

    #[test]
    fn discrete_adjoints() {
        let s1 = LinearOperator::unit(Mode::Shift, 2, 0);
        assert_eq!(s1.adjoint().apply(0, 0, &s("f", &[0, 0])), s("f", &[-1, 0]));

        let h = Expr::atom(Atom::param("h"));
        let mut dbar = LinearOperator::zero(Mode::Shift, 1, 1, 1);
        dbar.add_term(0, 0, MultiIndex::shift(&[1]), &h.clone().recip());
        dbar.add_term(0, 0, MultiIndex::shift(&[0]), &-h.clone().recip());
        let got = dbar.adjoint().apply(0, 0, &s("f", &[0]));
        assert!(same(&got, &(-(s("f", &[0]) - s("f", &[-1])) / h)));

        let mut row = LinearOperator::zero(Mode::Shift, 2, 1, 1);
        row.add_term(0, 0, MultiIndex::shift(&[1, 0]), &Expr::one());
        row.add_term(0, 0, MultiIndex::shift(&[0, 1]), &Expr::int(-1));
        let got = row.adjoint().apply(0, 0, &s("nu", &[0, 0]));
        assert!(same(&got, &(s("nu", &[-1, 0]) - s("nu", &[0, -1]))));
    }

    fn duality_holds(op: &LinearOperator, a: &Expr, b: &Expr) -> bool {
        let fl = op.bilinear_fluxes(a, 0, std::slice::from_ref(b));
        let lhs = a * op.apply(0, 0, b) - b * op.adjoint().apply(0, 0, a);
        same(&fl.divergence(op.mode()), &lhs)
    }

    #[test]
    fn continuous_concomitants() {
        let (a, b) = (c("a", &[0]), c("b", &[0]));
        let dx = LinearOperator::unit(Mode::Derivative, 1, 0);
        assert_eq!(dx.bilinear_fluxes(&a, 0, &[b.clone()]).0, vec![&a * &b]);
        let mut d2 = LinearOperator::zero(Mode::Derivative, 1, 1, 1);
        d2.add_term(0, 0, MultiIndex::derivative(&[2]), &Expr::one());
        let got = d2.bilinear_fluxes(&a, 0, &[b.clone()]);
        assert!(same(&got.0[0], &(&a * c("b", &[1]) - c("a", &[1]) * &b)));
        assert!(duality_holds(&d2, &a, &b));

        let mut mixed = LinearOperator::zero(Mode::Derivative, 2, 1, 1);
        mixed.add_term(0, 0, MultiIndex::derivative(&[1, 2]), &c("u", &[0, 0]));
        mixed.add_term(0, 0, MultiIndex::derivative(&[0, 1]), &Expr::int(3));
        assert!(duality_holds(&mixed, &c("a", &[0, 0]), &c("b", &[0, 0])));
    }

    #[test]
    fn discrete_concomitants() {
        let (a, b) = (s("a", &[0, 0]), s("b", &[0, 0]));
        let s1 = LinearOperator::unit(Mode::Shift, 2, 0);
        let got = s1.bilinear_fluxes(&a, 0, &[b.clone()]);
        assert_eq!(got.0, vec![s("a", &[-1, 0]) * &b, Expr::zero()]);

        let mut row = LinearOperator::zero(Mode::Shift, 2, 1, 1);
        row.add_term(0, 0, MultiIndex::shift(&[1, 0]), &Expr::one());
        row.add_term(0, 0, MultiIndex::shift(&[0, 1]), &Expr::int(-1));
        let nu = s("nu", &[0, 0]);
        let g = Expr::atom(Atom::arb("g", MultiIndex::shift(&[0, 0])));
        let got = row.bilinear_fluxes(&nu, 0, &[g.clone()]);
        assert!(same(&got.0[0], &(&g * s("nu", &[-1, 0]))));
        assert!(same(&got.0[1], &-(&g * s("nu", &[0, -1]))));

        let id = LinearOperator::scalar(Mode::Shift, 2, &Expr::one());
        assert!(id
            .bilinear_fluxes(&a, 0, &[b.clone()])
            .0
            .iter()
            .all(Expr::is_zero));

        let mut wild = LinearOperator::zero(Mode::Shift, 2, 1, 1);
        wild.add_term(0, 0, MultiIndex::shift(&[2, -1]), &s("u", &[0, 1]));
        wild.add_term(0, 0, MultiIndex::shift(&[-1, -2]), &Expr::int(5));
        assert!(duality_holds(&wild, &a, &b));
    }

    #[test]
    fn reading_operators_off_linear_forms() {
        let g = |j: &[u32]| Expr::atom(Atom::arb("g", MultiIndex::derivative(j)));
        let fam = vec![Arc::from("g")];
        let form = c("u", &[0, 0]) * g(&[1, 0]) - g(&[0, 0]);
        let op = LinearOperator::from_linear_forms(Mode::Derivative, 2, &[form], &fam).unwrap();
        assert_eq!(op.entry(0, 0).len(), 2);
        let applied = op.apply(0, 0, &c("w", &[0, 0]));
        assert!(same(
            &applied,
            &(c("u", &[0, 0]) * c("w", &[1, 0]) - c("w", &[0, 0]))
        ));
        let bad = g(&[0, 0]) * g(&[1, 0]);
        assert_eq!(
            LinearOperator::from_linear_forms(Mode::Derivative, 2, &[bad], &fam),
            Err(NotLinear { row: 0 })
        );
    }
}
