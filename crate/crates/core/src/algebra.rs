//! Bivariate operators, their symmetric composition and powers.
//!
//! The symmetric composition is `(B ∗ A)(x, y) = B(A(x, y), A(y, x))`. It is
//! associative with the first-coordinate projection as identity, so every
//! operator has powers `A⁰ = P`, `Aⁿ⁺¹ = A ∗ Aⁿ`. Powers are evaluated by
//! advancing the pair `(A(u, v), A(v, u))` jointly, which costs `n` pairs of
//! applications instead of the `2ⁿ` of a naive unfolding.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::order::OrderedUniverse;

/// Default number of comparable quadruples drawn by a sampled check.
pub const DEFAULT_MONOTONICITY_SAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operators `{left}` and `{right}` act on different universes")]
    UniverseMismatch { left: String, right: String },
    #[error("exhaustive monotonicity check needs a finite universe")]
    InfiniteUniverseExhaustive,
    #[error("operator `{0}` returned different values on identical inputs")]
    NonDeterministic(String),
}

type MapFn<E> = dyn Fn(&E, &E) -> E + Send + Sync;

/// A map `A : X × X → X` over a fixed universe.
pub struct Operator<U: OrderedUniverse> {
    universe: Arc<U>,
    label: String,
    map: Arc<MapFn<U::Element>>,
}

impl<U: OrderedUniverse> Clone for Operator<U> {
    fn clone(&self) -> Self {
        Self {
            universe: Arc::clone(&self.universe),
            label: self.label.clone(),
            map: Arc::clone(&self.map),
        }
    }
}

impl<U: OrderedUniverse> fmt::Debug for Operator<U> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator").field("label", &self.label).finish()
    }
}

impl<U: OrderedUniverse> Operator<U> {
    pub fn new(
        universe: Arc<U>,
        label: impl Into<String>,
        map: impl Fn(&U::Element, &U::Element) -> U::Element + Send + Sync + 'static,
    ) -> Self {
        Self {
            universe,
            label: label.into(),
            map: Arc::new(map),
        }
    }

    /// Canonical projection `P(x, y) = x`, the identity of `∗`.
    pub fn projection(universe: Arc<U>) -> Self {
        Self::new(universe, "P", |x: &U::Element, _: &U::Element| x.clone())
    }

    pub fn apply(&self, x: &U::Element, y: &U::Element) -> U::Element {
        (self.map)(x, y)
    }

    /// One coupled step `(A(x, y), A(y, x))`.
    pub fn step(&self, x: &U::Element, y: &U::Element) -> (U::Element, U::Element) {
        (self.apply(x, y), self.apply(y, x))
    }

    pub fn universe(&self) -> &Arc<U> {
        &self.universe
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Aⁿ` as an operator in its own right.
    pub fn power(&self, n: usize) -> Self {
        let base = self.clone();
        Self::new(
            Arc::clone(&self.universe),
            format!("{}^{}", self.label, n),
            move |x: &U::Element, y: &U::Element| power_apply(&base, n, x, y),
        )
    }

    /// Double evaluation on one input pair.
    pub fn spot_check_determinism(&self, x: &U::Element, y: &U::Element) -> Result<(), AlgebraError> {
        let a = self.apply(x, y);
        let b = self.apply(x, y);
        if self.universe.equal(&a, &b) {
            Ok(())
        } else {
            Err(AlgebraError::NonDeterministic(self.label.clone()))
        }
    }
}

fn same_universe<U: OrderedUniverse + PartialEq>(a: &Arc<U>, b: &Arc<U>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `B ∗ A`, i.e. `(x, y) ↦ B(A(x, y), A(y, x))`.
pub fn s_compose<U>(b: &Operator<U>, a: &Operator<U>) -> Result<Operator<U>, AlgebraError>
where
    U: OrderedUniverse + PartialEq + 'static,
{
    if !same_universe(&a.universe, &b.universe) {
        return Err(AlgebraError::UniverseMismatch {
            left: b.label.clone(),
            right: a.label.clone(),
        });
    }
    let (outer, inner) = (b.clone(), a.clone());
    Ok(Operator::new(
        Arc::clone(&a.universe),
        format!("({} * {})", b.label, a.label),
        move |x: &U::Element, y: &U::Element| {
            let (u, v) = inner.step(x, y);
            outer.apply(&u, &v)
        },
    ))
}

/// `Aⁿ(x, y)`, computed by the coupled recursion.
pub fn power_apply<U: OrderedUniverse>(
    a: &Operator<U>,
    n: usize,
    x: &U::Element,
    y: &U::Element,
) -> U::Element {
    let (mut u, mut v) = (x.clone(), y.clone());
    for _ in 0..n {
        (u, v) = a.step(&u, &v);
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Every comparable quadruple of a finite universe.
    Exhaustive,
    /// Random comparable quadruples built by bumping base points upward.
    Sampled { samples: usize, seed: u64 },
}

impl Strategy {
    pub fn sampled(seed: u64) -> Self {
        Strategy::Sampled {
            samples: DEFAULT_MONOTONICITY_SAMPLES,
            seed,
        }
    }
}

/// `x1 ≤ x2`, `y1 ≥ y2`, yet `A(x1, y1) ≰ A(x2, y2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityWitness<E> {
    pub x1: E,
    pub x2: E,
    pub y1: E,
    pub y2: E,
    pub lhs: E,
    pub rhs: E,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MonotonicityVerdict<E> {
    Pass { checked: usize },
    Fail(MonotonicityWitness<E>),
}

impl<E> MonotonicityVerdict<E> {
    pub fn passed(&self) -> bool {
        matches!(self, MonotonicityVerdict::Pass { .. })
    }
}

/// Test the mixed monotone property
/// `x1 ≤ x2, y1 ≥ y2 ⇒ A(x1, y1) ≤ A(x2, y2)`.
///
/// The exhaustive strategy checks each argument separately (monotone in `x`
/// for every fixed `y`, antitone in `y` for every fixed `x`), which is
/// equivalent by transitivity and costs `O(|X|³)` instead of `O(|X|⁴)`.
pub fn check_mixed_monotone<U: OrderedUniverse>(
    a: &Operator<U>,
    strategy: Strategy,
) -> Result<MonotonicityVerdict<U::Element>, AlgebraError> {
    let u = a.universe();
    match strategy {
        Strategy::Exhaustive => {
            let all = u.elements().ok_or(AlgebraError::InfiniteUniverseExhaustive)?;
            if let Some(e) = all.first() {
                a.spot_check_determinism(e, e)?;
            }
            let mut checked = 0;
            let fail = |x1: &U::Element, x2: &U::Element, y1: &U::Element, y2: &U::Element| {
                let lhs = a.apply(x1, y1);
                let rhs = a.apply(x2, y2);
                (!u.leq(&lhs, &rhs)).then(|| MonotonicityWitness {
                    x1: x1.clone(),
                    x2: x2.clone(),
                    y1: y1.clone(),
                    y2: y2.clone(),
                    lhs,
                    rhs,
                })
            };
            for y in &all {
                for x1 in &all {
                    for x2 in all.iter().filter(|x2| u.leq(x1, x2)) {
                        checked += 1;
                        if let Some(w) = fail(x1, x2, y, y) {
                            return Ok(MonotonicityVerdict::Fail(w));
                        }
                    }
                }
            }
            for x in &all {
                for y2 in &all {
                    for y1 in all.iter().filter(|y1| u.leq(y2, y1)) {
                        checked += 1;
                        if let Some(w) = fail(x, x, y1, y2) {
                            return Ok(MonotonicityVerdict::Fail(w));
                        }
                    }
                }
            }
            Ok(MonotonicityVerdict::Pass { checked })
        }
        Strategy::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..samples {
                let x1 = u.sample(&mut rng);
                let x2 = u.sample_above(&x1, &mut rng);
                let y2 = u.sample(&mut rng);
                let y1 = u.sample_above(&y2, &mut rng);
                if i == 0 {
                    a.spot_check_determinism(&x1, &y1)?;
                }
                let lhs = a.apply(&x1, &y1);
                let rhs = a.apply(&x2, &y2);
                if !u.leq(&lhs, &rhs) {
                    return Ok(MonotonicityVerdict::Fail(MonotonicityWitness {
                        x1,
                        x2,
                        y1,
                        y2,
                        lhs,
                        rhs,
                    }));
                }
            }
            Ok(MonotonicityVerdict::Pass { checked: samples })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FinitePoset;
    use crate::order::RealLine;
    use proptest::prelude::{prop_assert_eq, proptest};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn frac_op() -> Operator<RealLine> {
        let line = Arc::new(RealLine::real_line().with_tolerance(0.0));
        Operator::new(line, "frac", |x: &f64, _: &f64| x + (1.0 - (x - x.floor())) / 2.0)
    }

    #[test]
    fn projection_is_identity_of_composition() {
        let a = frac_op();
        let p = Operator::projection(Arc::clone(a.universe()));
        let left = s_compose(&p, &a).unwrap();
        let right = s_compose(&a, &p).unwrap();
        for (x, y) in [(0.0, 1.0), (0.3, -2.0), (5.5, 5.5)] {
            assert_eq!(left.apply(&x, &y), a.apply(&x, &y));
            assert_eq!(right.apply(&x, &y), a.apply(&x, &y));
        }
    }

    #[test]
    fn frac_operator_composed_with_itself() {
        let a = frac_op();
        assert_eq!(a.apply(&0.0, &1.0), 0.5);
        assert_eq!(a.apply(&1.0, &0.0), 1.5);
        let aa = s_compose(&a, &a).unwrap();
        assert_eq!(aa.apply(&0.0, &1.0), 0.75);
    }

    #[test]
    fn powers_of_frac_operator() {
        let a = frac_op();
        assert_eq!(power_apply(&a, 0, &0.3, &7.0), 0.3);
        assert_eq!(power_apply(&a, 3, &0.0, &1.0), 0.875);
        assert_eq!(power_apply(&a, 3, &1.0, &0.0), 1.875);
        assert_eq!(a.power(3).apply(&0.0, &1.0), 0.875);
    }

    #[test]
    fn power_cost_is_linear() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = Arc::clone(&calls);
        let line = Arc::new(RealLine::real_line());
        let a = Operator::new(line, "count", move |x: &f64, y: &f64| {
            c.fetch_add(1, Ordering::Relaxed);
            0.5 * (x - y)
        });
        power_apply(&a, 40, &1.0, &0.0);
        assert_eq!(calls.load(Ordering::Relaxed), 80);
    }

    #[test]
    fn universe_mismatch_rejected() {
        let a = Operator::projection(Arc::new(FinitePoset::chain(2)));
        let b = Operator::projection(Arc::new(FinitePoset::chain(3)));
        assert!(matches!(
            s_compose(&b, &a),
            Err(AlgebraError::UniverseMismatch { .. })
        ));
        // structurally equal universes behind distinct handles are accepted
        let c = Operator::projection(Arc::new(FinitePoset::chain(2)));
        assert!(s_compose(&c, &a).is_ok());
    }

    #[test]
    fn capped_identity_on_chain_passes() {
        let chain = Arc::new(FinitePoset::chain(5));
        for c in 0..5 {
            let a = Operator::new(Arc::clone(&chain), "min", move |x: &usize, _: &usize| (*x).min(c));
            assert!(check_mixed_monotone(&a, Strategy::Exhaustive).unwrap().passed());
        }
    }

    #[test]
    fn second_argument_increasing_fails_with_witness() {
        let chain = Arc::new(FinitePoset::chain(2));
        let a = Operator::new(chain, "y", |_: &usize, y: &usize| *y);
        match check_mixed_monotone(&a, Strategy::Exhaustive).unwrap() {
            MonotonicityVerdict::Fail(w) => {
                assert_eq!((w.x1, w.x2, w.y1, w.y2), (0, 0, 1, 0));
                assert_eq!((w.lhs, w.rhs), (1, 0));
            }
            v => panic!("expected failure, got {v:?}"),
        }
    }

    #[test]
    fn frac_operator_sampled_passes() {
        let a = frac_op();
        let v = check_mixed_monotone(&a, Strategy::sampled(7)).unwrap();
        assert_eq!(v, MonotonicityVerdict::Pass { checked: 1000 });
    }

    #[test]
    fn sampled_check_catches_decreasing_operator() {
        let line = Arc::new(RealLine::real_line());
        let a = Operator::new(line, "neg", |x: &f64, _: &f64| -x);
        assert!(!check_mixed_monotone(&a, Strategy::sampled(1)).unwrap().passed());
    }

    #[test]
    fn exhaustive_needs_finite_universe() {
        assert_eq!(
            check_mixed_monotone(&frac_op(), Strategy::Exhaustive),
            Err(AlgebraError::InfiniteUniverseExhaustive)
        );
    }

    #[test]
    fn stateful_operator_rejected() {
        let calls = Arc::new(AtomicUsize::new(0));
        let line = Arc::new(RealLine::real_line());
        let a = Operator::new(line, "drift", move |x: &f64, _: &f64| {
            x + calls.fetch_add(1, Ordering::Relaxed) as f64
        });
        assert_eq!(
            check_mixed_monotone(&a, Strategy::sampled(3)),
            Err(AlgebraError::NonDeterministic("drift".into()))
        );
    }

    proptest! {
        #[test]
        fn composition_is_associative(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let line = Arc::new(RealLine::real_line());
            let a = Operator::new(Arc::clone(&line), "a", |x: &f64, y: &f64| 0.5 * x - 0.25 * y + 1.0);
            let b = Operator::new(Arc::clone(&line), "b", |x: &f64, y: &f64| x.tanh() - (0.3 * y).atan());
            let c = Operator::new(line, "c", |x: &f64, y: &f64| x * x.abs() - y.exp().min(10.0));
            let left = s_compose(&s_compose(&c, &b).unwrap(), &a).unwrap();
            let right = s_compose(&c, &s_compose(&b, &a).unwrap()).unwrap();
            prop_assert_eq!(left.apply(&x, &y), right.apply(&x, &y));
        }

        #[test]
        fn powers_form_a_semigroup(m in 0usize..12, n in 0usize..12, x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let a = frac_op();
            let u = power_apply(&a, n, &x, &y);
            let v = power_apply(&a, n, &y, &x);
            prop_assert_eq!(power_apply(&a, m + n, &x, &y), power_apply(&a, m, &u, &v));
        }
    }
}
