//! Partially ordered universes, order intervals and their intersections.
//!
//! An [`OrderedUniverse`] is the carrier `(X, ≤)` every other module works
//! over. Two families of backings exist: explicit finite posets
//! ([`crate::finite::FinitePoset`]) where every query is answered exactly by
//! enumeration, and coordinatewise-ordered real spaces ([`Euclidean`]) where
//! equality carries a declared absolute tolerance.

use std::fmt::Debug;
use std::marker::PhantomData;

use rand::{Rng, RngCore};
use thiserror::Error;

/// Default absolute tolerance for equality on numeric universes (max-norm).
pub const DEFAULT_EQ_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("invalid interval: lower end is not below the upper end")]
    InvalidInterval,
    #[error("supremum cannot be certified in this universe")]
    AbsentSupremum,
    #[error("infimum cannot be certified in this universe")]
    AbsentInfimum,
}

/// Running intersection `⋂ [lo_n, hi_n]` of a sequence of order intervals.
#[derive(Debug, Clone, PartialEq)]
pub enum Meet<E> {
    /// Certified empty.
    Empty,
    /// Exact member set (finite universes).
    Members(Vec<E>),
    /// Coordinatewise box `[lower, upper]` (numeric universes). The `*_moved`
    /// fields hold the last step at which each end changed.
    Box {
        lower: E,
        upper: E,
        lower_moved: usize,
        upper_moved: usize,
    },
}

impl<E> Meet<E> {
    pub fn is_empty(&self) -> bool {
        matches!(self, Meet::Empty)
    }
}

/// `sup` of one sequence and `inf` of another, each possibly absent.
#[derive(Debug, Clone, PartialEq)]
pub struct SupInf<E> {
    pub sup: Option<E>,
    pub inf: Option<E>,
}

impl<E: Clone> SupInf<E> {
    pub fn sup(&self) -> Result<E, OrderError> {
        self.sup.clone().ok_or(OrderError::AbsentSupremum)
    }

    pub fn inf(&self) -> Result<E, OrderError> {
        self.inf.clone().ok_or(OrderError::AbsentInfimum)
    }
}

/// A partially ordered set `(X, ≤)`.
///
/// Implementations are immutable after construction; every method is pure.
pub trait OrderedUniverse: Send + Sync + 'static {
    type Element: Clone + Debug + PartialEq + Send + Sync + 'static;

    fn leq(&self, a: &Self::Element, b: &Self::Element) -> bool;

    /// Equality as declared by the universe (exact for finite posets,
    /// tolerance-based for numeric ones).
    fn equal(&self, a: &Self::Element, b: &Self::Element) -> bool;

    /// Least upper bound of a finite set, if it exists.
    fn sup_of(&self, set: &[Self::Element]) -> Option<Self::Element>;

    /// Greatest lower bound of a finite set, if it exists.
    fn inf_of(&self, set: &[Self::Element]) -> Option<Self::Element>;

    /// Every element, when the universe is finite.
    fn elements(&self) -> Option<Vec<Self::Element>> {
        None
    }

    /// Max-norm distance on numeric universes.
    fn distance(&self, _a: &Self::Element, _b: &Self::Element) -> Option<f64> {
        None
    }

    /// Exact hashable key, used for cycle detection on finite universes.
    fn key(&self, _e: &Self::Element) -> Option<usize> {
        None
    }

    /// Absolute equality tolerance (zero for exact universes).
    fn tolerance(&self) -> f64 {
        0.0
    }

    fn meet_start(&self, lo: &Self::Element, hi: &Self::Element) -> Meet<Self::Element>;

    fn meet_narrow(
        &self,
        meet: Meet<Self::Element>,
        step: usize,
        lo: &Self::Element,
        hi: &Self::Element,
    ) -> Meet<Self::Element>;

    /// `sup xs` and `inf ys` for stored coupled sequences.
    ///
    /// Finite universes answer exhaustively. Numeric universes only answer
    /// for monotone sequences, see [`Euclidean`].
    fn sup_inf_of_trace(
        &self,
        xs: &[Self::Element],
        ys: &[Self::Element],
        _tol: f64,
    ) -> SupInf<Self::Element> {
        SupInf {
            sup: self.sup_of(xs),
            inf: self.inf_of(ys),
        }
    }

    /// Random element, used by sampled checks.
    fn sample(&self, rng: &mut dyn RngCore) -> Self::Element;

    /// Random element `≥ e`.
    fn sample_above(&self, e: &Self::Element, rng: &mut dyn RngCore) -> Self::Element;

    fn is_finite(&self) -> bool {
        self.elements().is_some()
    }
}

/// Order interval `[lo, hi] = { z : lo ≤ z ≤ hi }`, validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderInterval<E> {
    lo: E,
    hi: E,
}

impl<E: Clone + Debug + PartialEq + Send + Sync> OrderInterval<E> {
    pub fn new<U>(universe: &U, lo: E, hi: E) -> Result<Self, OrderError>
    where
        U: OrderedUniverse<Element = E> + ?Sized,
    {
        if !universe.leq(&lo, &hi) {
            return Err(OrderError::InvalidInterval);
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &E {
        &self.lo
    }

    pub fn hi(&self) -> &E {
        &self.hi
    }

    pub fn contains<U>(&self, universe: &U, z: &E) -> bool
    where
        U: OrderedUniverse<Element = E> + ?Sized,
    {
        universe.leq(&self.lo, z) && universe.leq(z, &self.hi)
    }

    /// `self ⊆ other`, decided on the endpoints.
    pub fn is_within<U>(&self, universe: &U, other: &Self) -> bool
    where
        U: OrderedUniverse<Element = E> + ?Sized,
    {
        universe.leq(&other.lo, &self.lo) && universe.leq(&self.hi, &other.hi)
    }

    /// Members of the interval, on finite universes.
    pub fn members<U>(&self, universe: &U) -> Option<Vec<E>>
    where
        U: OrderedUniverse<Element = E> + ?Sized,
    {
        universe
            .elements()
            .map(|all| all.into_iter().filter(|z| self.contains(universe, z)).collect())
    }
}

pub fn interval_contains<U: OrderedUniverse + ?Sized>(
    universe: &U,
    interval: &OrderInterval<U::Element>,
    z: &U::Element,
) -> bool {
    interval.contains(universe, z)
}

/// Whether `probe` lies in every interval of the sequence.
pub fn intersect_interval_chain<U: OrderedUniverse + ?Sized>(
    universe: &U,
    intervals: &[OrderInterval<U::Element>],
    probe: &U::Element,
) -> bool {
    intervals.iter().all(|i| i.contains(universe, probe))
}

/// Intersection of a nonempty sequence of intervals; `None` for an empty sequence.
pub fn intersection_of<U: OrderedUniverse + ?Sized>(
    universe: &U,
    intervals: &[OrderInterval<U::Element>],
) -> Option<Meet<U::Element>> {
    let (first, rest) = intervals.split_first()?;
    let mut meet = universe.meet_start(&first.lo, &first.hi);
    for (i, iv) in rest.iter().enumerate() {
        meet = universe.meet_narrow(meet, i + 1, &iv.lo, &iv.hi);
    }
    Some(meet)
}

pub fn sup_inf_of_trace<U: OrderedUniverse + ?Sized>(
    universe: &U,
    xs: &[U::Element],
    ys: &[U::Element],
    tol: f64,
) -> SupInf<U::Element> {
    universe.sup_inf_of_trace(xs, ys, tol)
}

/// Elements of a coordinatewise-ordered real space.
pub trait Coordinates: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn coords(&self) -> &[f64];
    fn from_coords(coords: Vec<f64>) -> Self;
}

impl Coordinates for f64 {
    fn coords(&self) -> &[f64] {
        std::slice::from_ref(self)
    }

    fn from_coords(coords: Vec<f64>) -> Self {
        coords[0]
    }
}

impl Coordinates for Vec<f64> {
    fn coords(&self) -> &[f64] {
        self
    }

    fn from_coords(coords: Vec<f64>) -> Self {
        coords
    }
}

/// `R^d` ordered componentwise, with equality up to an absolute max-norm
/// tolerance.
///
/// `sup`/`inf` of stored sequences are only certified for monotone
/// sequences: a nonincreasing sequence attains its supremum at the first
/// term, and a nondecreasing one is reported by its last term once the
/// bracket `[max xs, min ys]` is narrower than the requested tolerance.
pub struct Euclidean<E> {
    dim: usize,
    eps: f64,
    sample_lo: f64,
    sample_hi: f64,
    labels: Option<Vec<f64>>,
    _element: PhantomData<fn() -> E>,
}

impl<E> std::fmt::Debug for Euclidean<E> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Euclidean")
            .field("dim", &self.dim)
            .field("eps", &self.eps)
            .field("labels", &self.labels)
            .finish()
    }
}

impl<E> Clone for Euclidean<E> {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            eps: self.eps,
            sample_lo: self.sample_lo,
            sample_hi: self.sample_hi,
            labels: self.labels.clone(),
            _element: PhantomData,
        }
    }
}

impl<E> PartialEq for Euclidean<E> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.eps == other.eps
            && self.sample_lo == other.sample_lo
            && self.sample_hi == other.sample_hi
            && self.labels == other.labels
    }
}

/// The real line with its usual order.
pub type RealLine = Euclidean<f64>;

impl RealLine {
    pub fn real_line() -> Self {
        Euclidean::new(1)
    }
}

impl<E> Euclidean<E> {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            dim,
            eps: DEFAULT_EQ_TOLERANCE,
            sample_lo: -10.0,
            sample_hi: 10.0,
            labels: None,
            _element: PhantomData,
        }
    }

    pub fn with_tolerance(mut self, eps: f64) -> Self {
        assert!(eps >= 0.0 && eps.is_finite());
        self.eps = eps;
        self
    }

    /// Range `[lo, hi]` each coordinate is drawn from by [`OrderedUniverse::sample`].
    pub fn with_sample_range(mut self, lo: f64, hi: f64) -> Self {
        assert!(lo < hi);
        self.sample_lo = lo;
        self.sample_hi = hi;
        self
    }

    /// Attach a label (e.g. a grid abscissa) to every coordinate.
    pub fn with_labels(mut self, labels: Vec<f64>) -> Self {
        assert_eq!(labels.len(), self.dim);
        self.labels = Some(labels);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }
}

fn max_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl<E: Coordinates> Euclidean<E> {
    fn coordwise(&self, set: &[E], pick: fn(f64, f64) -> f64) -> Option<E> {
        let (first, rest) = set.split_first()?;
        let mut acc = first.coords().to_vec();
        for e in rest {
            for (a, v) in acc.iter_mut().zip(e.coords()) {
                *a = pick(*a, *v);
            }
        }
        Some(E::from_coords(acc))
    }

    fn is_nondecreasing(&self, xs: &[E]) -> bool {
        xs.windows(2).all(|w| self.leq(&w[0], &w[1]))
    }

    fn is_nonincreasing(&self, xs: &[E]) -> bool {
        xs.windows(2).all(|w| self.leq(&w[1], &w[0]))
    }

    /// Width of the bracket `[max xs, min ys]`; `None` when it is empty.
    fn bracket_width(&self, xs: &[E], ys: &[E]) -> Option<f64> {
        let lower = self.sup_of(xs)?;
        let upper = self.inf_of(ys)?;
        if !self.leq(&lower, &upper) {
            return None;
        }
        Some(max_norm_diff(lower.coords(), upper.coords()))
    }
}

impl<E: Coordinates> OrderedUniverse for Euclidean<E> {
    type Element = E;

    fn leq(&self, a: &E, b: &E) -> bool {
        let (a, b) = (a.coords(), b.coords());
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).all(|(x, y)| *x <= *y + self.eps)
    }

    fn equal(&self, a: &E, b: &E) -> bool {
        max_norm_diff(a.coords(), b.coords()) <= self.eps
    }

    fn sup_of(&self, set: &[E]) -> Option<E> {
        self.coordwise(set, f64::max)
    }

    fn inf_of(&self, set: &[E]) -> Option<E> {
        self.coordwise(set, f64::min)
    }

    fn distance(&self, a: &E, b: &E) -> Option<f64> {
        Some(max_norm_diff(a.coords(), b.coords()))
    }

    fn tolerance(&self) -> f64 {
        self.eps
    }

    fn meet_start(&self, lo: &E, hi: &E) -> Meet<E> {
        if !self.leq(lo, hi) {
            return Meet::Empty;
        }
        Meet::Box {
            lower: lo.clone(),
            upper: hi.clone(),
            lower_moved: 0,
            upper_moved: 0,
        }
    }

    fn meet_narrow(&self, meet: Meet<E>, step: usize, lo: &E, hi: &E) -> Meet<E> {
        let Meet::Box {
            lower,
            upper,
            mut lower_moved,
            mut upper_moved,
        } = meet
        else {
            return Meet::Empty;
        };
        let mut l = lower.coords().to_vec();
        let mut u = upper.coords().to_vec();
        for (a, v) in l.iter_mut().zip(lo.coords()) {
            if *v > *a {
                *a = *v;
                lower_moved = step;
            }
        }
        for (b, v) in u.iter_mut().zip(hi.coords()) {
            if *v < *b {
                *b = *v;
                upper_moved = step;
            }
        }
        if l.iter().zip(&u).any(|(a, b)| *a > *b + self.eps) {
            return Meet::Empty;
        }
        Meet::Box {
            lower: E::from_coords(l),
            upper: E::from_coords(u),
            lower_moved,
            upper_moved,
        }
    }

    fn sup_inf_of_trace(&self, xs: &[E], ys: &[E], tol: f64) -> SupInf<E> {
        let closed = self.bracket_width(xs, ys).is_some_and(|w| w <= tol);
        let sup = if self.is_nonincreasing(xs) {
            xs.first().cloned()
        } else if closed && self.is_nondecreasing(xs) {
            xs.last().cloned()
        } else {
            None
        };
        let inf = if self.is_nondecreasing(ys) {
            ys.first().cloned()
        } else if closed && self.is_nonincreasing(ys) {
            ys.last().cloned()
        } else {
            None
        };
        SupInf { sup, inf }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> E {
        E::from_coords(
            (0..self.dim)
                .map(|_| rng.gen_range(self.sample_lo..self.sample_hi))
                .collect(),
        )
    }

    fn sample_above(&self, e: &E, rng: &mut dyn RngCore) -> E {
        let span = self.sample_hi - self.sample_lo;
        E::from_coords(
            e.coords()
                .iter()
                .map(|v| {
                    // Exact ties are as informative as strict increments.
                    if rng.gen_bool(0.2) {
                        *v
                    } else {
                        v + rng.gen_range(0.0..span * 0.5)
                    }
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FinitePoset;

    fn chain3() -> FinitePoset {
        FinitePoset::chain(3)
    }

    #[test]
    fn chain_membership() {
        let p = chain3();
        let i = OrderInterval::new(&p, 0, 2).unwrap();
        assert!(interval_contains(&p, &i, &1));
        let degenerate = OrderInterval::new(&p, 1, 1).unwrap();
        assert!(interval_contains(&p, &degenerate, &1));
    }

    #[test]
    fn plane_membership_respects_every_coordinate() {
        let plane: Euclidean<Vec<f64>> = Euclidean::new(2);
        let i = OrderInterval::new(&plane, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(!interval_contains(&plane, &i, &vec![0.5, 2.0]));
        assert!(interval_contains(&plane, &i, &vec![0.5, 0.25]));
    }

    #[test]
    fn invalid_interval_rejected_eagerly() {
        let p = chain3();
        assert_eq!(
            OrderInterval::new(&p, 2, 0).unwrap_err(),
            OrderError::InvalidInterval
        );
    }

    #[test]
    fn interval_chain_membership() {
        let p = chain3();
        let ivs = vec![
            OrderInterval::new(&p, 0, 2).unwrap(),
            OrderInterval::new(&p, 1, 2).unwrap(),
        ];
        assert!(intersect_interval_chain(&p, &ivs, &1));
        assert!(!intersect_interval_chain(&p, &ivs, &0));
        assert_eq!(intersection_of(&p, &ivs), Some(Meet::Members(vec![1, 2])));
    }

    #[test]
    fn dyadic_brackets_all_contain_one() {
        let line = RealLine::real_line().with_tolerance(0.0);
        let ivs: Vec<_> = (0..40)
            .map(|n| {
                let s = 2f64.powi(-n);
                OrderInterval::new(&line, 1.0 - s, 2.0 - s).unwrap()
            })
            .collect();
        for prefix in 1..=ivs.len() {
            assert!(intersect_interval_chain(&line, &ivs[..prefix], &1.0));
        }
    }

    #[test]
    fn chain_trace_sup_inf() {
        let p = chain3();
        let si = sup_inf_of_trace(&p, &[0, 1, 1], &[2, 2, 2], 0.0);
        assert_eq!(si, SupInf { sup: Some(1), inf: Some(2) });
    }

    #[test]
    fn incomparable_pair_has_top_as_sup() {
        // a=0, b=1 incomparable, t=2 above both
        let p = FinitePoset::from_matrix(vec![
            vec![true, false, true],
            vec![false, true, true],
            vec![false, false, true],
        ])
        .unwrap();
        let si = sup_inf_of_trace(&p, &[0, 1], &[2], 0.0);
        assert_eq!(si.sup, Some(2));
        // two minimal upper bounds: no supremum
        let v = FinitePoset::from_matrix(vec![
            vec![true, false, true, true],
            vec![false, true, true, true],
            vec![false, false, true, false],
            vec![false, false, false, true],
        ])
        .unwrap();
        let si = sup_inf_of_trace(&v, &[0, 1], &[2], 0.0);
        assert_eq!(si.sup(), Err(OrderError::AbsentSupremum));
    }

    #[test]
    fn dyadic_trace_sup_inf_is_one() {
        let line = RealLine::real_line().with_tolerance(0.0);
        let xs: Vec<f64> = (0..=50).map(|n| 1.0 - 2f64.powi(-n)).collect();
        let ys: Vec<f64> = (0..=50).map(|n| 2.0 - 2f64.powi(-n)).collect();
        let si = sup_inf_of_trace(&line, &xs, &ys, 1e-12);
        assert!((si.sup.unwrap() - 1.0).abs() <= 1e-12);
        assert_eq!(si.inf, Some(1.0));
        // not closed at a short horizon: the nondecreasing side is not certified
        let si = sup_inf_of_trace(&line, &xs[..10], &ys[..10], 1e-12);
        assert_eq!(si.sup, None);
        assert_eq!(si.inf, Some(1.0));
    }

    #[test]
    fn numeric_equality_uses_tolerance() {
        let line = RealLine::real_line();
        assert!(line.equal(&1.0, &(1.0 + 5e-13)));
        assert!(!line.equal(&1.0, &(1.0 + 5e-12)));
        assert!(RealLine::real_line().with_tolerance(0.0).leq(&1.0, &1.0));
    }

    #[test]
    fn box_meet_detects_emptiness() {
        let plane: Euclidean<Vec<f64>> = Euclidean::new(2).with_tolerance(0.0);
        let m = plane.meet_start(&vec![0.0, 0.0], &vec![2.0, 2.0]);
        let m = plane.meet_narrow(m, 1, &vec![1.0, 0.0], &vec![3.0, 1.0]);
        assert_eq!(
            m,
            Meet::Box {
                lower: vec![1.0, 0.0],
                upper: vec![2.0, 1.0],
                lower_moved: 1,
                upper_moved: 1
            }
        );
        let m = plane.meet_narrow(m, 2, &vec![0.0, 1.5], &vec![5.0, 5.0]);
        assert!(m.is_empty());
    }
}
