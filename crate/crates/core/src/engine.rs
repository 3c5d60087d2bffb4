//! The coupled iteration `x_{n+1} = A(x_n, y_n)`, `y_{n+1} = A(y_n, x_n)`,
//! its stored trace, and attraction verdicts.
//!
//! Verdicts never go past what the trace certifies. On finite universes the
//! pair sequence is eventually periodic, so a detected cycle makes the running
//! intersection `⋂ [x_n, y_n]` exact. On numeric universes the intersection is
//! a coordinatewise box and attraction is only claimed once its width falls
//! below the policy tolerance.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraError, Operator};
use crate::order::{Meet, OrderedUniverse};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("start pair is not ordered: x0 is not below y0")]
    PreconditionOrder,
    #[error("monotonicity violated at step {step}: {kind}")]
    MonotonicityViolation { step: usize, kind: ViolationKind },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// `x_n ≰ y_n`.
    Bracket,
    /// The sequences stopped being monotone after the lower-upper onset.
    LuPersistence,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ViolationKind::Bracket => f.write_str("x_n is not below y_n"),
            ViolationKind::LuPersistence => {
                f.write_str("lower-upper property lost after its onset")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopPolicy {
    pub max_steps: usize,
    /// Max-norm threshold on `y_n − x_n` (numeric universes only).
    pub gap_tolerance: f64,
    /// Halt after this many consecutive steps in which neither sequence moves.
    pub stagnation_window: usize,
    /// Number of steps kept in memory; older ones are dropped.
    pub trace_cap: usize,
}

impl Default for StopPolicy {
    fn default() -> Self {
        Self {
            max_steps: 10_000,
            gap_tolerance: 1e-12,
            stagnation_window: 10,
            trace_cap: 100_000,
        }
    }
}

impl StopPolicy {
    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_gap_tolerance(mut self, tol: f64) -> Self {
        self.gap_tolerance = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum HaltReason {
    /// The pair `(x_n, y_n)` repeated; the sequence is periodic from `start`.
    Cycle { start: usize, period: usize },
    Gap,
    Stagnation,
    EmptyIntersection,
    FixedPointReached,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step<E> {
    pub n: usize,
    pub x: E,
    pub y: E,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "x_star")]
pub enum VerdictKind<E> {
    WeaklyOrderAttractive(E),
    OrderAttractive(E),
    NoCoupledFixedPointInBox,
    /// `x_k = y_k = c` with `A(c, c) = c`.
    FixedPointReached(E),
    Undecided,
}

impl<E> VerdictKind<E> {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictKind::WeaklyOrderAttractive(_) => "WeaklyOrderAttractive",
            VerdictKind::OrderAttractive(_) => "OrderAttractive",
            VerdictKind::NoCoupledFixedPointInBox => "NoCoupledFixedPointInBox",
            VerdictKind::FixedPointReached(_) => "FixedPointReached",
            VerdictKind::Undecided => "Undecided",
        }
    }

    pub fn x_star(&self) -> Option<&E> {
        match self {
            VerdictKind::WeaklyOrderAttractive(e)
            | VerdictKind::OrderAttractive(e)
            | VerdictKind::FixedPointReached(e) => Some(e),
            _ => None,
        }
    }

    /// A reached fixed point is order-attractive with a finite arrival time.
    pub fn is_order_attractive(&self) -> bool {
        matches!(
            self,
            VerdictKind::OrderAttractive(_) | VerdictKind::FixedPointReached(_)
        )
    }

    pub fn is_weakly_attractive(&self) -> bool {
        self.x_star().is_some()
    }
}

/// Evidence behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate<E> {
    /// Index of the last computed step.
    pub horizon: usize,
    pub halt: HaltReason,
    /// Whether the running intersection is exact over all `n ≥ 0`.
    pub complete: bool,
    /// Exact members of the intersection (finite universes).
    pub meet_members: Option<Vec<E>>,
    /// Bounds of the intersection box (numeric universes).
    pub meet_box: Option<(E, E)>,
    pub box_width: Option<f64>,
    pub sup_x: Option<E>,
    pub inf_y: Option<E>,
    pub final_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionVerdict<E> {
    pub kind: VerdictKind<E>,
    /// `A(x*, x*) = x*`, evaluated explicitly.
    pub fixed_point_confirmed: bool,
    pub certificate: Certificate<E>,
}

/// Stored record of one coupled run.
#[derive(Debug, Clone)]
pub struct CoupledTrace<E> {
    first: Step<E>,
    window: VecDeque<Step<E>>,
    dropped: usize,
    pub lu_onset: Option<usize>,
    pub equal_at: Option<usize>,
    pub empty_intersection_at: Option<usize>,
    pub halt: HaltReason,
    pub meet: Meet<E>,
    x_up: bool,
    x_down: bool,
    y_up: bool,
    y_down: bool,
    distinct_x: Vec<E>,
    distinct_y: Vec<E>,
    pub policy: StopPolicy,
    pub verdict: Option<AttractionVerdict<E>>,
}

impl<E: Clone> CoupledTrace<E> {
    /// Index of the last step.
    pub fn horizon(&self) -> usize {
        self.window.back().map_or(self.first.n, |s| s.n)
    }

    pub fn first(&self) -> &Step<E> {
        &self.first
    }

    pub fn last(&self) -> &Step<E> {
        self.window.back().unwrap_or(&self.first)
    }

    /// Steps still in memory, in order.
    pub fn steps(&self) -> impl Iterator<Item = &Step<E>> {
        self.window.iter()
    }

    /// Number of early steps evicted by the trace cap.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn get(&self, n: usize) -> Option<&Step<E>> {
        if n == 0 {
            return Some(&self.first);
        }
        n.checked_sub(self.dropped).and_then(|i| self.window.get(i))
    }

    pub fn xs(&self) -> Vec<E> {
        self.window.iter().map(|s| s.x.clone()).collect()
    }

    pub fn ys(&self) -> Vec<E> {
        self.window.iter().map(|s| s.y.clone()).collect()
    }

    pub fn verdict(&self) -> &AttractionVerdict<E> {
        self.verdict.as_ref().expect("trace produced by run carries a verdict")
    }

    fn x_monotone(&self) -> bool {
        self.x_up || self.x_down
    }

    fn y_monotone(&self) -> bool {
        self.y_up || self.y_down
    }
}

/// `A(x, y) = x` and `A(y, x) = y`.
pub fn is_coupled_fixed_point<U: OrderedUniverse>(a: &Operator<U>, x: &U::Element, y: &U::Element) -> bool {
    let u = a.universe();
    u.equal(&a.apply(x, y), x) && u.equal(&a.apply(y, x), y)
}

/// `x ≤ y`, `x ≤ A(x, y)` and `A(y, x) ≤ y`.
pub fn is_coupled_lu_fixed_point<U: OrderedUniverse>(
    a: &Operator<U>,
    x: &U::Element,
    y: &U::Element,
) -> bool {
    let u = a.universe();
    u.leq(x, y) && u.leq(x, &a.apply(x, y)) && u.leq(&a.apply(y, x), y)
}

/// Run the coupled iteration from `(x0, y0)` and classify the result.
pub fn run<U: OrderedUniverse>(
    a: &Operator<U>,
    x0: &U::Element,
    y0: &U::Element,
    policy: StopPolicy,
) -> Result<CoupledTrace<U::Element>, EngineError> {
    let u = a.universe();
    if !u.leq(x0, y0) {
        return Err(EngineError::PreconditionOrder);
    }
    a.spot_check_determinism(x0, y0)?;

    let first = Step { n: 0, x: x0.clone(), y: y0.clone() };
    let mut trace = CoupledTrace {
        first: first.clone(),
        window: VecDeque::from([first]),
        dropped: 0,
        lu_onset: None,
        equal_at: u.equal(x0, y0).then_some(0),
        empty_intersection_at: None,
        halt: HaltReason::MaxSteps,
        meet: u.meet_start(x0, y0),
        x_up: true,
        x_down: true,
        y_up: true,
        y_down: true,
        distinct_x: Vec::new(),
        distinct_y: Vec::new(),
        policy,
        verdict: None,
    };
    let keyed = u.key(x0).is_some();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let (mut kx, mut ky) = (HashSet::new(), HashSet::new());
    if keyed {
        let (a0, b0) = (u.key(x0).unwrap(), u.key(y0).unwrap());
        seen.insert((a0, b0), 0);
        kx.insert(a0);
        ky.insert(b0);
        trace.distinct_x.push(x0.clone());
        trace.distinct_y.push(y0.clone());
    }
    let mut cycle = None;
    let mut still = 0usize;
    let (mut x, mut y) = (x0.clone(), y0.clone());
    let mut n = 0usize;

    let halt = loop {
        if trace.meet.is_empty() {
            break HaltReason::EmptyIntersection;
        }
        if trace.equal_at.is_some() && u.equal(&x, &y) && u.equal(&a.apply(&x, &x), &x) {
            break HaltReason::FixedPointReached;
        }
        if let Some(c) = cycle {
            break c;
        }
        if u.distance(&x, &y).is_some_and(|g| g < policy.gap_tolerance) {
            break HaltReason::Gap;
        }
        if still >= policy.stagnation_window {
            break HaltReason::Stagnation;
        }
        if n >= policy.max_steps {
            break HaltReason::MaxSteps;
        }

        let (xn, yn) = a.step(&x, &y);
        if !u.leq(&xn, &yn) {
            return Err(EngineError::MonotonicityViolation {
                step: n + 1,
                kind: ViolationKind::Bracket,
            });
        }
        let lu_here = u.leq(&x, &xn) && u.leq(&yn, &y);
        match trace.lu_onset {
            None if lu_here => trace.lu_onset = Some(n),
            Some(_) if !lu_here => {
                return Err(EngineError::MonotonicityViolation {
                    step: n,
                    kind: ViolationKind::LuPersistence,
                })
            }
            _ => {}
        }
        trace.x_up &= u.leq(&x, &xn);
        trace.x_down &= u.leq(&xn, &x);
        trace.y_up &= u.leq(&y, &yn);
        trace.y_down &= u.leq(&yn, &y);
        if u.equal(&x, &xn) && u.equal(&y, &yn) {
            still += 1;
        } else {
            still = 0;
        }

        n += 1;
        let meet = std::mem::replace(&mut trace.meet, Meet::Empty);
        trace.meet = u.meet_narrow(meet, n, &xn, &yn);
        if trace.meet.is_empty() && trace.empty_intersection_at.is_none() {
            trace.empty_intersection_at = Some(n);
        }
        if trace.equal_at.is_none() && u.equal(&xn, &yn) {
            trace.equal_at = Some(n);
        }
        if keyed {
            let (ka, kb) = (u.key(&xn).unwrap(), u.key(&yn).unwrap());
            if let Some(&start) = seen.get(&(ka, kb)) {
                cycle = Some(HaltReason::Cycle { start, period: n - start });
            } else {
                seen.insert((ka, kb), n);
            }
            if kx.insert(ka) {
                trace.distinct_x.push(xn.clone());
            }
            if ky.insert(kb) {
                trace.distinct_y.push(yn.clone());
            }
        }
        trace.window.push_back(Step { n, x: xn.clone(), y: yn.clone() });
        if trace.window.len() > policy.trace_cap.max(1) {
            trace.window.pop_front();
            trace.dropped += 1;
        }
        x = xn;
        y = yn;
    };
    trace.halt = halt;
    trace.verdict = Some(classify(&trace, a));
    Ok(trace)
}

/// Attraction verdict for a trace produced by [`run`].
pub fn classify<U: OrderedUniverse>(
    trace: &CoupledTrace<U::Element>,
    a: &Operator<U>,
) -> AttractionVerdict<U::Element> {
    let u = a.universe();
    let last = trace.last();
    let finite = u.is_finite();
    let complete = match trace.halt {
        HaltReason::Cycle { .. } | HaltReason::FixedPointReached => true,
        HaltReason::EmptyIntersection => true,
        _ => false,
    };
    let mut cert = Certificate {
        horizon: trace.horizon(),
        halt: trace.halt,
        complete,
        meet_members: None,
        meet_box: None,
        box_width: None,
        sup_x: None,
        inf_y: None,
        final_gap: u.distance(&last.x, &last.y),
    };
    let confirm = |e: &U::Element| u.equal(&a.apply(e, e), e);

    let kind = match &trace.meet {
        Meet::Empty => VerdictKind::NoCoupledFixedPointInBox,
        _ if trace.halt == HaltReason::FixedPointReached => {
            if let Meet::Members(m) = &trace.meet {
                cert.meet_members = Some(m.clone());
            }
            cert.sup_x = Some(last.x.clone());
            cert.inf_y = Some(last.y.clone());
            VerdictKind::FixedPointReached(last.x.clone())
        }
        Meet::Members(m) => {
            cert.meet_members = Some(m.clone());
            if finite {
                cert.sup_x = u.sup_of(&trace.distinct_x);
                cert.inf_y = u.inf_of(&trace.distinct_y);
            }
            match m.as_slice() {
                [x_star] if complete => {
                    let strong = cert.sup_x.as_ref() == Some(x_star)
                        && cert.inf_y.as_ref() == Some(x_star);
                    if strong {
                        VerdictKind::OrderAttractive(x_star.clone())
                    } else {
                        VerdictKind::WeaklyOrderAttractive(x_star.clone())
                    }
                }
                _ => VerdictKind::Undecided,
            }
        }
        Meet::Box {
            lower,
            upper,
            lower_moved,
            upper_moved,
        } => {
            let width = u.distance(lower, upper).unwrap_or(f64::INFINITY);
            cert.meet_box = Some((lower.clone(), upper.clone()));
            cert.box_width = Some(width);
            if trace.x_monotone() && trace.y_monotone() {
                let si = u.sup_inf_of_trace(
                    &[trace.first.x.clone(), last.x.clone()],
                    &[trace.first.y.clone(), last.y.clone()],
                    trace.policy.gap_tolerance,
                );
                cert.sup_x = si.sup;
                cert.inf_y = si.inf;
            }
            if width <= trace.policy.gap_tolerance {
                // the end that settled first is the better estimate of the limit
                let x_star = if upper_moved < lower_moved { upper } else { lower };
                if cert.sup_x.is_some() && cert.inf_y.is_some() {
                    VerdictKind::OrderAttractive(x_star.clone())
                } else {
                    VerdictKind::WeaklyOrderAttractive(x_star.clone())
                }
            } else {
                VerdictKind::Undecided
            }
        }
    };
    let fixed_point_confirmed = kind.x_star().is_some_and(confirm);
    AttractionVerdict {
        kind,
        fixed_point_confirmed,
        certificate: cert,
    }
}

/// Least `k` with `x_k ≤ x_{k+1}` and `y_{k+1} ≤ y_k` among the stored steps.
///
/// Once found, the property must persist over every later stored step.
pub fn detect_lu_onset<U: OrderedUniverse>(
    universe: &U,
    trace: &CoupledTrace<U::Element>,
) -> Result<Option<usize>, EngineError> {
    let steps: Vec<_> = trace.steps().collect();
    let mut onset = None;
    for w in steps.windows(2) {
        let lu = universe.leq(&w[0].x, &w[1].x) && universe.leq(&w[1].y, &w[0].y);
        match onset {
            None if lu => onset = Some(w[0].n),
            Some(_) if !lu => {
                return Err(EngineError::MonotonicityViolation {
                    step: w[0].n,
                    kind: ViolationKind::LuPersistence,
                })
            }
            _ => {}
        }
    }
    Ok(onset)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SandwichVerdict {
    Pass { checked: usize },
    Fail { step: usize },
}

/// Run the inner iteration from `(u0, v0)` and compare it with the outer
/// trace: `x_n ≤ u_n`, `v_n ≤ y_n`, and `u_n ≤ x* ≤ v_n` when `x_star` is given.
pub fn sandwich_check<U: OrderedUniverse>(
    a: &Operator<U>,
    outer: &CoupledTrace<U::Element>,
    u0: &U::Element,
    v0: &U::Element,
    x_star: Option<&U::Element>,
) -> Result<SandwichVerdict, EngineError> {
    let un = a.universe();
    let (x0, y0) = (&outer.first.x, &outer.first.y);
    let inside = |e: &U::Element| un.leq(x0, e) && un.leq(e, y0);
    if !(inside(u0) && inside(v0) && un.leq(u0, v0)) {
        return Err(EngineError::PreconditionOrder);
    }
    if let Some(c) = x_star {
        if !(un.leq(u0, c) && un.leq(c, v0)) {
            return Err(EngineError::PreconditionOrder);
        }
    }
    let (mut p, mut q) = (u0.clone(), v0.clone());
    let mut checked = 0;
    for n in 0..=outer.horizon() {
        if n > 0 {
            (p, q) = a.step(&p, &q);
        }
        let Some(s) = outer.get(n) else { continue };
        let mut ok = un.leq(&s.x, &p) && un.leq(&q, &s.y);
        if let Some(c) = x_star {
            ok &= un.leq(&p, c) && un.leq(c, &q);
        }
        if !ok {
            return Ok(SandwichVerdict::Fail { step: n });
        }
        checked += 1;
    }
    Ok(SandwichVerdict::Pass { checked })
}

/// Outcome of testing attraction of `x*` on a whole interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxAttraction<E> {
    pub weak: bool,
    pub strong: bool,
    /// Whether every admissible `(u0, v0)` was visited.
    pub exhaustive: bool,
    pub checked_pairs: usize,
    /// First start pair that is not attracted.
    pub failing: Option<(E, E)>,
}

/// Check `(u0, v0) → x*` for the start pairs `u0 ≤ x* ≤ v0` inside `[x0, y0]`.
///
/// Finite universes are enumerated; numeric ones are sampled with
/// `samples` pairs drawn from the box.
pub fn check_box_attraction<U: OrderedUniverse>(
    a: &Operator<U>,
    x0: &U::Element,
    y0: &U::Element,
    x_star: &U::Element,
    policy: StopPolicy,
    samples: usize,
    seed: u64,
) -> Result<BoxAttraction<U::Element>, EngineError> {
    let u = a.universe();
    if !(u.leq(x0, x_star) && u.leq(x_star, y0)) {
        return Ok(BoxAttraction {
            weak: false,
            strong: false,
            exhaustive: true,
            checked_pairs: 0,
            failing: None,
        });
    }
    let (pairs, exhaustive) = match u.elements() {
        Some(all) => {
            let lows: Vec<_> = all.iter().filter(|e| u.leq(x0, e) && u.leq(e, x_star)).collect();
            let highs: Vec<_> = all.iter().filter(|e| u.leq(x_star, e) && u.leq(e, y0)).collect();
            let pairs = lows
                .iter()
                .flat_map(|l| highs.iter().map(move |h| ((*l).clone(), (*h).clone())))
                .collect::<Vec<_>>();
            (pairs, true)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lo = u.inf_of(&[x_star.clone()]).expect("singleton infimum");
            let mut pairs = vec![(x0.clone(), y0.clone()), (lo.clone(), lo)];
            while pairs.len() < samples.max(2) {
                let p = u.sample_above(x0, &mut rng);
                let q = u.sample_above(x_star, &mut rng);
                let p = u.inf_of(&[p, x_star.clone()]).expect("numeric infimum");
                let q = u.inf_of(&[q, y0.clone()]).expect("numeric infimum");
                pairs.push((p, q));
            }
            (pairs, false)
        }
    };
    let mut out = BoxAttraction {
        weak: true,
        strong: true,
        exhaustive,
        checked_pairs: 0,
        failing: None,
    };
    for (p, q) in pairs {
        let t = run(a, &p, &q, policy)?;
        let v = t.verdict();
        let hits = v.kind.x_star().is_some_and(|e| u.equal(e, x_star));
        out.checked_pairs += 1;
        if !hits {
            out.weak = false;
            out.strong = false;
            out.failing = Some((p, q));
            break;
        }
        out.strong &= v.kind.is_order_attractive();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FinitePoset;
    use crate::order::RealLine;
    use std::sync::Arc;

    fn frac() -> Operator<RealLine> {
        let line = Arc::new(RealLine::real_line().with_tolerance(0.0));
        Operator::new(line, "frac", |x: &f64, _: &f64| x + (1.0 - (x - x.floor())) / 2.0)
    }

    #[test]
    fn frac_closed_forms_are_exact() {
        let t = run(&frac(), &0.0, &1.0, StopPolicy::default().with_max_steps(10)).unwrap();
        assert_eq!(t.horizon(), 10);
        for s in t.steps() {
            let p = 2f64.powi(-(s.n as i32));
            assert_eq!(s.x, 1.0 - p);
            assert_eq!(s.y, 2.0 - p);
        }
        assert_eq!(t.lu_onset, None);
    }

    #[test]
    fn frac_is_attractive_but_not_fixed() {
        let policy = StopPolicy::default().with_max_steps(50);
        let t = run(&frac(), &0.0, &1.0, policy).unwrap();
        let v = t.verdict();
        assert_eq!(v.kind, VerdictKind::OrderAttractive(1.0));
        assert!(!v.fixed_point_confirmed);
        assert!(!is_coupled_fixed_point(&frac(), &1.0, &1.0));
    }

    #[test]
    fn frac_short_horizon_stays_undecided() {
        let t = run(&frac(), &0.0, &1.0, StopPolicy::default().with_max_steps(10)).unwrap();
        assert_eq!(t.verdict().kind, VerdictKind::Undecided);
    }

    #[test]
    fn projection_never_moves() {
        let line = Arc::new(RealLine::real_line());
        let p = Operator::projection(line);
        let t = run(&p, &-1.0, &3.0, StopPolicy::default()).unwrap();
        assert!(t.steps().all(|s| s.x == -1.0 && s.y == 3.0));
        assert_eq!(t.halt, HaltReason::Stagnation);
        assert_eq!(t.verdict().kind, VerdictKind::Undecided);
        assert!(is_coupled_fixed_point(&p, &-1.0, &3.0));

        let chain = Arc::new(FinitePoset::chain(4));
        let p = Operator::projection(chain);
        let t = run(&p, &0, &3, StopPolicy::default()).unwrap();
        assert_eq!(t.verdict().kind, VerdictKind::Undecided);
        assert_eq!(t.verdict().certificate.meet_members, Some(vec![0, 1, 2, 3]));
        let t = run(&p, &2, &2, StopPolicy::default()).unwrap();
        assert_eq!(t.verdict().kind, VerdictKind::FixedPointReached(2));
    }

    #[test]
    fn constant_operator_reaches_its_value() {
        let chain = Arc::new(FinitePoset::chain(2));
        let a = Operator::new(chain, "one", |_: &usize, _: &usize| 1);
        let t = run(&a, &0, &1, StopPolicy::default()).unwrap();
        assert_eq!(t.get(1).map(|s| (s.x, s.y)), Some((1, 1)));
        let v = t.verdict();
        assert_eq!(v.kind, VerdictKind::FixedPointReached(1));
        assert!(v.kind.is_order_attractive());
        assert!(v.fixed_point_confirmed);
    }

    #[test]
    fn constant_outside_the_box_empties_the_meet() {
        let chain = Arc::new(FinitePoset::chain(3));
        let a = Operator::new(chain, "two", |_: &usize, _: &usize| 2);
        let t = run(&a, &0, &1, StopPolicy::default()).unwrap();
        assert_eq!(t.empty_intersection_at, Some(1));
        assert_eq!(t.verdict().kind, VerdictKind::NoCoupledFixedPointInBox);
    }

    #[test]
    fn unordered_start_is_rejected() {
        assert_eq!(
            run(&frac(), &1.0, &0.0, StopPolicy::default()).unwrap_err(),
            EngineError::PreconditionOrder
        );
    }

    #[test]
    fn bracket_violation_detected() {
        let line = Arc::new(RealLine::real_line());
        let a = Operator::new(line, "swap", |_: &f64, y: &f64| *y);
        assert_eq!(
            run(&a, &0.0, &1.0, StopPolicy::default()).unwrap_err(),
            EngineError::MonotonicityViolation { step: 1, kind: ViolationKind::Bracket }
        );
    }

    #[test]
    fn lu_membership() {
        let f = frac();
        assert!(!is_coupled_lu_fixed_point(&f, &0.0, &1.0));
        let line = Arc::new(RealLine::real_line());
        let p = Operator::projection(line);
        assert!(is_coupled_lu_fixed_point(&p, &0.0, &1.0));
        assert!(!is_coupled_lu_fixed_point(&p, &1.0, &0.0));
    }

    #[test]
    fn lu_start_gives_onset_zero() {
        let line = Arc::new(RealLine::real_line());
        let a = Operator::new(line, "half", |x: &f64, y: &f64| 0.5 * x - 0.25 * y + 1.0);
        // fixed point t = 0.5t - 0.25t + 1 → t = 4/3
        let t = run(&a, &0.0, &4.0, StopPolicy::default()).unwrap();
        assert_eq!(t.lu_onset, Some(0));
        assert_eq!(detect_lu_onset(a.universe().as_ref(), &t), Ok(Some(0)));
        let v = t.verdict();
        let x = *v.kind.x_star().unwrap();
        assert!((x - 4.0 / 3.0).abs() < 1e-11);
        assert!(v.kind.is_order_attractive());
    }

    #[test]
    fn sandwich_of_identical_start_passes() {
        let f = frac();
        let t = run(&f, &0.0, &1.0, StopPolicy::default().with_max_steps(30)).unwrap();
        assert_eq!(
            sandwich_check(&f, &t, &0.0, &1.0, None),
            Ok(SandwichVerdict::Pass { checked: 31 })
        );
        assert!(matches!(
            sandwich_check(&f, &t, &0.5, &1.0, Some(&1.0)),
            Ok(SandwichVerdict::Pass { .. })
        ));
        assert_eq!(
            sandwich_check(&f, &t, &0.5, &2.0, None),
            Err(EngineError::PreconditionOrder)
        );
    }

    #[test]
    fn sliding_window_keeps_the_tail() {
        let mut policy = StopPolicy::default().with_max_steps(40);
        policy.trace_cap = 5;
        let t = run(&frac(), &0.0, &1.0, policy).unwrap();
        assert_eq!(t.dropped(), 36);
        assert_eq!(t.steps().count(), 5);
        assert_eq!(t.get(0).unwrap().x, 0.0);
        assert!(t.get(10).is_none());
        assert_eq!(t.get(40).unwrap().x, 1.0 - 2f64.powi(-40));
        assert_eq!(t.verdict().kind, VerdictKind::OrderAttractive(1.0));
    }

    #[test]
    fn box_attraction_on_a_chain() {
        let chain = Arc::new(FinitePoset::chain(5));
        // monotone map pulling everything toward 2
        let a = Operator::new(chain, "pull", |x: &usize, _: &usize| match *x {
            0 | 1 => x + 1,
            2 => 2,
            _ => x - 1,
        });
        let b = check_box_attraction(&a, &0, &4, &2, StopPolicy::default(), 0, 0).unwrap();
        assert!(b.weak && b.strong && b.exhaustive);
        assert_eq!(b.checked_pairs, 9);
    }
}
