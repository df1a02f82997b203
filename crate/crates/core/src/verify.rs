//! Zero testing.
//!
//! A canonical form of `0` proves an identity. Otherwise the expression is
//! sampled at seeded random points: exactly for rational expressions, with
//! 128-bit complex floats when transcendental kernels remain.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{evaluate_rf, Atom, Expr, KernelError, Number, Rf, Q};

/// Resample budget per trial.
pub const MAX_RESAMPLES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    ProvedZero,
    ProbablyZero,
    Nonzero,
    Inconclusive,
}

impl Status {
    /// Proved or probably zero.
    pub fn is_zero(self) -> bool {
        matches!(self, Status::ProvedZero | Status::ProbablyZero)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::ProvedZero => "proved zero",
            Status::ProbablyZero => "probably zero",
            Status::Nonzero => "nonzero",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTestConfig {
    pub trials: usize,
    /// Relative tolerance, scaled by `1 +` the largest term magnitude.
    pub tol: f64,
    pub seed: u64,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            trials: 200,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub trials: usize,
    /// Largest relative residual seen over the trials.
    pub max_residual: f64,
    pub seed: u64,
    /// Point at which the expression was found nonzero.
    pub counterexample: Option<BTreeMap<Atom, Number>>,
}

impl Verdict {
    fn proved(seed: u64) -> Self {
        Verdict {
            status: Status::ProvedZero,
            trials: 0,
            max_residual: 0.0,
            seed,
            counterexample: None,
        }
    }
}

fn sample_exact(rng: &mut ChaCha8Rng) -> Number {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-20..=20);
    }
    Number::rational(Q::from_integer(n.into()))
}

fn sample_float(rng: &mut ChaCha8Rng) -> Number {
    Number::float(rng.gen_range(-2.0..=2.0))
}

/// Decides whether `e` is identically zero.
pub fn zero_test(e: &Expr, config: &ZeroTestConfig) -> Verdict {
    assert!(config.trials >= 1, "at least one trial");
    assert!(config.tol > 0.0, "tolerance must be positive");
    let r = match Rf::from_expr(e) {
        Ok(r) => r,
        Err(_) => {
            return Verdict {
                status: Status::Inconclusive,
                trials: 0,
                max_residual: f64::INFINITY,
                seed: config.seed,
                counterexample: None,
            }
        }
    };
    zero_test_rf(&r, config)
}

pub(crate) fn zero_test_rf(r: &Rf, config: &ZeroTestConfig) -> Verdict {
    if r.is_zero() {
        return Verdict::proved(config.seed);
    }
    let exact = r.is_rational();
    let atoms: Vec<Atom> = r.atoms().into_iter().filter(|a| *a != Atom::Imag).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_residual: f64 = 0.0;
    let mut exhausted = false;
    for trial in 0..config.trials {
        let mut outcome = None;
        for _ in 0..=MAX_RESAMPLES {
            let point: BTreeMap<Atom, Number> = atoms
                .iter()
                .map(|a| {
                    let v = if exact {
                        sample_exact(&mut rng)
                    } else {
                        sample_float(&mut rng)
                    };
                    (a.clone(), v)
                })
                .collect();
            match evaluate_rf(r, &point) {
                Ok(ev) => {
                    outcome = Some((ev, point));
                    break;
                }
                Err(KernelError::DivisionByZero | KernelError::Domain(_)) => continue,
                Err(KernelError::Unbound(a)) => unreachable!("atom {a} was sampled"),
            }
        }
        let Some((ev, point)) = outcome else {
            exhausted = true;
            continue;
        };
        let nonzero = match &ev.value {
            Number::Exact(v) => !v.is_zero(),
            Number::Float(_) => ev.relative_residual > config.tol,
        };
        max_residual = max_residual.max(ev.relative_residual);
        if nonzero {
            return Verdict {
                status: Status::Nonzero,
                trials: trial + 1,
                max_residual,
                seed: config.seed,
                counterexample: Some(point),
            };
        }
    }
    // a canonically nonzero rational function cannot vanish everywhere
    let status = if exhausted || exact {
        Status::Inconclusive
    } else {
        Status::ProbablyZero
    };
    Verdict {
        status,
        trials: config.trials,
        max_residual,
        seed: config.seed,
        counterexample: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, MultiIndex};

    fn jet(name: &str, j: &[u32]) -> Expr {
        Expr::atom(Atom::jet(name, MultiIndex::derivative(j)))
    }

    #[test]
    fn ring_identity_is_proved() {
        let u = jet("u", &[0]);
        let v = zero_test(
            &(&u * &u - Expr::powi(u.clone(), 2)),
            &ZeroTestConfig::default(),
        );
        assert_eq!(v.status, Status::ProvedZero);
    }

    #[test]
    fn distinct_jets_are_nonzero_with_reproducible_counterexample() {
        let e = jet("u", &[1, 0]) - jet("u", &[0, 1]);
        let cfg = ZeroTestConfig::default();
        let v = zero_test(&e, &cfg);
        assert_eq!(v.status, Status::Nonzero);
        let pt = v.counterexample.clone().unwrap();
        assert!(!evaluate(&e, &pt).unwrap().as_exact().unwrap().is_zero());
        assert_eq!(zero_test(&e, &cfg), v);
    }

    #[test]
    fn transcendental_identity_is_probably_zero() {
        let x = jet("x", &[0]);
        let e = Expr::powi(Expr::sin(x.clone()), 2) + Expr::powi(Expr::cos(x), 2) - Expr::one();
        let v = zero_test(&e, &ZeroTestConfig::default());
        assert_eq!(v.status, Status::ProbablyZero);
        assert!(v.max_residual < 1e-30);
    }

    #[test]
    fn transcendental_nonzero_is_caught() {
        let x = jet("x", &[0]);
        let e = Expr::powi(Expr::sin(x.clone()), 2) - Expr::powi(Expr::cos(x), 2);
        let v = zero_test(&e, &ZeroTestConfig::default());
        assert_eq!(v.status, Status::Nonzero);
    }

    #[test]
    fn logarithms_resample_out_of_domain() {
        let x = jet("x", &[0]);
        let e = Expr::ln(Expr::powi(x.clone(), 2)) - Expr::int(2) * Expr::ln(x);
        let v = zero_test(
            &e,
            &ZeroTestConfig {
                trials: 50,
                ..Default::default()
            },
        );
        assert_eq!(v.status, Status::ProbablyZero);
    }
}
