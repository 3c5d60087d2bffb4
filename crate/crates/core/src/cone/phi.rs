use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use super::vector::{Cone, ConeVector};
use crate::algebra::Operator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhiError {
    #[error("phi({lambda}) = {value} lies outside (0, 1]")]
    OutOfRange { lambda: f64, value: f64 },
    #[error("phi({lambda}) = {value} does not exceed lambda")]
    NotAboveIdentity { lambda: f64, value: f64 },
    #[error("phi declared super-multiplicative but phi({lambda}*{mu}) < phi({lambda})*phi({mu})")]
    NotSupermultiplicative { lambda: f64, mu: f64 },
}

/// Gain function `φ : (0, 1) → (0, 1]` with `φ(λ) > λ`.
#[derive(Clone)]
pub struct PhiSpec {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    supermultiplicative: bool,
}

impl fmt::Debug for PhiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiSpec")
            .field("label", &self.label)
            .field("supermultiplicative", &self.supermultiplicative)
            .finish()
    }
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    (1..=points).map(move |i| i as f64 / (points + 1) as f64)
}

impl PhiSpec {
    /// Validates `φ(λ) ∈ (λ, 1]` on a grid of `(0, 1)`. A declared
    /// super-multiplicativity is checked on a 20 × 20 grid.
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        supermultiplicative: bool,
    ) -> Result<Self, PhiError> {
        let spec = Self { label: label.into(), f: Arc::new(f), supermultiplicative };
        for lambda in grid(99).chain([1e-6, 1e-3, 0.999, 1.0 - 1e-6]) {
            let value = spec.eval(lambda);
            if !(value > 0.0 && value <= 1.0) {
                return Err(PhiError::OutOfRange { lambda, value });
            }
            if value <= lambda {
                return Err(PhiError::NotAboveIdentity { lambda, value });
            }
        }
        if supermultiplicative {
            for lambda in grid(20) {
                for mu in grid(20) {
                    let lhs = spec.eval(lambda * mu);
                    if lhs < spec.eval(lambda) * spec.eval(mu) * (1.0 - 1e-12) {
                        return Err(PhiError::NotSupermultiplicative { lambda, mu });
                    }
                }
            }
        }
        Ok(spec)
    }

    /// `φ(λ) = λ^γ` for `0 < γ < 1`.
    pub fn power(gamma: f64) -> Result<Self, PhiError> {
        Self::new(format!("lambda^{gamma}"), move |l: f64| l.powf(gamma), true)
    }

    /// Skips validation. Meant for exercising the solver's certificate check.
    pub fn unchecked(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f), supermultiplicative: false }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        (self.f)(lambda)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_supermultiplicative(&self) -> bool {
        self.supermultiplicative
    }
}

/// Sample points for [`phi_condition_check`].
#[derive(Debug, Clone)]
pub struct PhiGrid {
    pub lambdas: Vec<f64>,
    /// Ratios `c` for the dependent pair `y = c·x`.
    pub ratios: Vec<f64>,
    /// Multiples of the part representative used as `x`.
    pub scales: Vec<f64>,
}

impl Default for PhiGrid {
    fn default() -> Self {
        Self {
            lambdas: (1..=19).map(|i| i as f64 * 0.05).collect(),
            ratios: (-8..=8).map(|e| 10f64.powf(e as f64 / 4.0)).collect(),
            scales: vec![0.1, 1.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiWitness {
    pub lambda: f64,
    pub x: ConeVector,
    pub y: ConeVector,
    /// `A(λx, y)`
    pub lhs: ConeVector,
    /// `φ(λ)·A(x, λy)`
    pub rhs: ConeVector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhiCheck {
    Pass { checked: usize },
    Fail(Box<PhiWitness>),
}

impl PhiCheck {
    pub fn passed(&self) -> bool {
        matches!(self, PhiCheck::Pass { .. })
    }
}

/// Samples `A(λx, y) ≥ φ(λ)·A(x, λy)` over linearly dependent pairs in the
/// part of `u`.
pub fn phi_condition_check(a: &Operator<Cone>, phi: &PhiSpec, u: &ConeVector, grid: &PhiGrid) -> PhiCheck {
    let mut checked = 0;
    for &s in &grid.scales {
        let x = u.scale(s);
        for &c in &grid.ratios {
            let y = x.scale(c);
            for &lambda in &grid.lambdas {
                let lhs = a.apply(&x.scale(lambda), &y);
                let rhs = a.apply(&x, &y.scale(lambda)).scale(phi.eval(lambda));
                checked += 1;
                let ok = lhs
                    .as_slice()
                    .iter()
                    .zip(rhs.as_slice())
                    .all(|(l, r)| *l >= *r - 1e-12 * r.abs().max(1.0));
                if !ok {
                    return PhiCheck::Fail(Box::new(PhiWitness { lambda, x, y, lhs, rhs }));
                }
            }
        }
    }
    PhiCheck::Pass { checked }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::vector::nonnegative_cone;
    use crate::order::Coordinates;

    fn op(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Operator<Cone> {
        Operator::new(Arc::new(nonnegative_cone(1)), "t", move |x: &ConeVector, y: &ConeVector| {
            ConeVector::from_coords(vec![f(x.as_slice()[0], y.as_slice()[0])])
        })
    }

    #[test]
    fn power_phi_validates() {
        assert!(PhiSpec::power(0.5).unwrap().is_supermultiplicative());
        assert!(matches!(PhiSpec::power(1.0), Err(PhiError::NotAboveIdentity { .. })));
    }

    #[test]
    fn identity_and_overshoot_rejected() {
        assert!(matches!(PhiSpec::new("id", |l| l, false), Err(PhiError::NotAboveIdentity { .. })));
        assert!(matches!(PhiSpec::new("big", |l| 2.0 * l.sqrt(), false), Err(PhiError::OutOfRange { .. })));
    }

    #[test]
    fn false_supermultiplicativity_claim_rejected() {
        // λ(2 − λ) is a valid gain but sub-multiplicative on the open square
        let mid = |l: f64| 1.0 - (1.0 - l).powi(2);
        assert!(PhiSpec::new("mid", mid, false).is_ok());
        assert!(matches!(PhiSpec::new("mid", mid, true), Err(PhiError::NotSupermultiplicative { .. })));
    }

    #[test]
    fn square_fails_with_sqrt_gain() {
        let a = op(|x, _| x * x);
        let phi = PhiSpec::power(0.5).unwrap();
        let grid = PhiGrid { lambdas: vec![0.25], ratios: vec![1.0], scales: vec![1.0] };
        match phi_condition_check(&a, &phi, &ConeVector::ones(1), &grid) {
            PhiCheck::Fail(w) => {
                assert_eq!(w.lambda, 0.25);
                assert_eq!(w.x.as_slice(), &[1.0]);
                assert_eq!(w.lhs.as_slice(), &[0.0625]);
                assert_eq!(w.rhs.as_slice(), &[0.5]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_operator_meets_its_gain() {
        let a = op(|x, y| x.sqrt() + y.powf(-1.0 / 3.0));
        let phi = PhiSpec::power(0.5).unwrap();
        let r = phi_condition_check(&a, &phi, &ConeVector::ones(1), &PhiGrid::default());
        assert_eq!(r, PhiCheck::Pass { checked: 3 * 17 * 19 });
        let greedy = PhiSpec::power(0.1).unwrap();
        assert!(!phi_condition_check(&a, &greedy, &ConeVector::ones(1), &PhiGrid::default()).passed());
    }
}
