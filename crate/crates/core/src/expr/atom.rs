use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// Whether multi-indices count derivatives or lattice shifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Entries are non-negative derivative counts.
    Derivative,
    /// Entries are signed lattice offsets.
    Shift,
}

/// Per-axis integer vector.
///
/// In derivative mode every entry is non-negative and counts derivatives along
/// that axis; in shift mode entries are arbitrary lattice offsets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    mode: Mode,
    offsets: Vec<i32>,
}

impl MultiIndex {
    /// Builds a multi-index, rejecting negative entries in derivative mode.
    pub fn new(mode: Mode, offsets: Vec<i32>) -> Option<Self> {
        if mode == Mode::Derivative && offsets.iter().any(|&o| o < 0) {
            return None;
        }
        Some(MultiIndex { mode, offsets })
    }

    pub fn derivative(counts: &[u32]) -> Self {
        MultiIndex {
            mode: Mode::Derivative,
            offsets: counts.iter().map(|&c| c as i32).collect(),
        }
    }

    pub fn shift(offsets: &[i32]) -> Self {
        MultiIndex {
            mode: Mode::Shift,
            offsets: offsets.to_vec(),
        }
    }

    pub fn zero(mode: Mode, axes: usize) -> Self {
        MultiIndex {
            mode,
            offsets: vec![0; axes],
        }
    }

    /// Unit vector along `axis`.
    pub fn unit(mode: Mode, axes: usize, axis: usize) -> Self {
        let mut m = Self::zero(mode, axes);
        m.offsets[axis] = 1;
        m
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn offsets(&self) -> &[i32] {
        &self.offsets
    }

    pub fn axes(&self) -> usize {
        self.offsets.len()
    }

    /// Sum of absolute values of the entries.
    pub fn order(&self) -> u32 {
        self.offsets.iter().map(|o| o.unsigned_abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.offsets.iter().all(|&o| o == 0)
    }

    /// Entry-wise sum. Panics if the two indices disagree on mode or length.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.mode, other.mode, "multi-index mode mismatch");
        assert_eq!(self.axes(), other.axes(), "multi-index axis mismatch");
        MultiIndex {
            mode: self.mode,
            offsets: self
                .offsets
                .iter()
                .zip(&other.offsets)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Entry-wise negation (shift mode only).
    pub fn negated(&self) -> MultiIndex {
        debug_assert_eq!(self.mode, Mode::Shift);
        MultiIndex {
            mode: self.mode,
            offsets: self.offsets.iter().map(|o| -o).collect(),
        }
    }

    pub(crate) fn bump(&self, axis: usize, by: i32) -> MultiIndex {
        let mut m = self.clone();
        m.offsets[axis] += by;
        m
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.offsets.iter().map(|o| o.to_string()).collect();
        match self.mode {
            Mode::Derivative => write!(f, "({})", parts.join(",")),
            Mode::Shift => write!(f, "[{}]", parts.join(",")),
        }
    }
}

/// Elementary functions admitted by the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }
}

/// Leaf of an expression tree (numbers live in `Expr::Num`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `i`, with `i² = −1`.
    Imag,
    /// Constant symbol. Complex parameters carry a conjugation flag.
    Param {
        name: Arc<str>,
        complex: bool,
        conjugated: bool,
    },
    /// Independent variable `x^i` (or lattice coordinate `n^i`).
    Indep { name: Arc<str>, axis: usize },
    /// Derivative or shift of a dependent variable.
    Jet { field: Arc<str>, index: MultiIndex },
    /// Derivative or shift of an arbitrary function.
    ArbJet { func: Arc<str>, index: MultiIndex },
}

/// Which family a jet-like atom belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Dependent,
    Arbitrary,
}

/// Name of a dependent variable or arbitrary function, tagged by family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef {
    pub kind: VarKind,
    pub name: Arc<str>,
}

impl VarRef {
    pub fn dependent(name: &str) -> Self {
        VarRef {
            kind: VarKind::Dependent,
            name: Arc::from(name),
        }
    }

    pub fn arbitrary(name: &str) -> Self {
        VarRef {
            kind: VarKind::Arbitrary,
            name: Arc::from(name),
        }
    }

    /// Atom for this variable at the given multi-index.
    pub fn at(&self, index: MultiIndex) -> Atom {
        match self.kind {
            VarKind::Dependent => Atom::Jet {
                field: self.name.clone(),
                index,
            },
            VarKind::Arbitrary => Atom::ArbJet {
                func: self.name.clone(),
                index,
            },
        }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Atom {
    pub fn param(name: &str) -> Atom {
        Atom::Param {
            name: Arc::from(name),
            complex: false,
            conjugated: false,
        }
    }

    pub fn complex_param(name: &str) -> Atom {
        Atom::Param {
            name: Arc::from(name),
            complex: true,
            conjugated: false,
        }
    }

    pub fn indep(name: &str, axis: usize) -> Atom {
        Atom::Indep {
            name: Arc::from(name),
            axis,
        }
    }

    pub fn jet(field: &str, index: MultiIndex) -> Atom {
        Atom::Jet {
            field: Arc::from(field),
            index,
        }
    }

    pub fn arb(func: &str, index: MultiIndex) -> Atom {
        Atom::ArbJet {
            func: Arc::from(func),
            index,
        }
    }

    /// Variable and multi-index of a `Jet`/`ArbJet` atom.
    pub fn jet_parts(&self) -> Option<(VarRef, &MultiIndex)> {
        match self {
            Atom::Jet { field, index } => Some((
                VarRef {
                    kind: VarKind::Dependent,
                    name: field.clone(),
                },
                index,
            )),
            Atom::ArbJet { func, index } => Some((
                VarRef {
                    kind: VarKind::Arbitrary,
                    name: func.clone(),
                },
                index,
            )),
            _ => None,
        }
    }

    pub fn is_jet_of(&self, var: &VarRef) -> bool {
        match (self, var.kind) {
            (Atom::Jet { field, .. }, VarKind::Dependent) => *field == var.name,
            (Atom::ArbJet { func, .. }, VarKind::Arbitrary) => *func == var.name,
            _ => false,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Imag => f.write_str("I"),
            Atom::Param {
                name, conjugated, ..
            } => {
                if *conjugated {
                    write!(f, "conj({name})")
                } else {
                    f.write_str(name)
                }
            }
            Atom::Indep { name, .. } => f.write_str(name),
            Atom::Jet { field: name, index } | Atom::ArbJet { func: name, index } => {
                match index.mode() {
                    Mode::Derivative if index.is_zero() => f.write_str(name),
                    Mode::Derivative => write!(f, "{name}_{index}"),
                    Mode::Shift => write!(f, "{name}{index}"),
                }
            }
        }
    }
}
