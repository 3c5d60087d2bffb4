//! Brute-force verification of the coupled-iteration results on random
//! finite instances.
//!
//! Every trial draws a lattice, a mixed monotone table and an ordered start
//! pair, then evaluates each result whose hypotheses hold on that instance.
//! Orbits, intersections and attraction are recomputed here from the table
//! alone; the iteration engine is only consulted by the `classify-agrees` and
//! `sandwich` clauses, which compare it against these independent answers.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::generate::{
    generate_mixed_monotone_on_poset, generate_random_lattice, generate_random_mixed_monotone,
    generate_random_poset,
};
use super::{FinitePoset, TableError, TableOperator};
use crate::algebra::{check_mixed_monotone, MonotonicityVerdict, Operator, Strategy};
use crate::engine::{run, sandwich_check, SandwichVerdict, StopPolicy, VerdictKind};

/// Clause identifiers, in evaluation order.
pub const CLAUSES: &[&str] = &[
    "mixed-monotone",
    "bracket-order",
    "bracket-propagation",
    "fixed-points-in-brackets",
    "lu-monotone",
    "empty-meet-no-fixed-points",
    "weak-attractor-in-start-box",
    "box-weak-inherits",
    "box-strong-inherits",
    "strong-iff-weak-with-bounds",
    "box-strong-implies-box-weak",
    "box-weak-iff-fixed",
    "box-strong-iff-fixed",
    "attractive-fixed-point-unique",
    "k-step-criterion",
    "one-step-criterion",
    "lu-start-criterion",
    "lu-onset-criterion",
    "classify-agrees",
    "sandwich",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Random lattices; sup and inf always exist.
    Lattice,
    /// Random posets; exercises absent suprema.
    Poset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub family: Family,
}

impl SuiteConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self {
            seed,
            trials,
            min_size: 2,
            max_size: 8,
            family: Family::Lattice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub poset: FinitePoset,
    pub operator: TableOperator,
    pub start: (usize, usize),
}

/// Deterministic instance for `trial` under `cfg`.
pub fn draw_instance(cfg: &SuiteConfig, trial: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let size = rng.gen_range(cfg.min_size..=cfg.max_size.max(cfg.min_size));
    let (poset, operator) = match cfg.family {
        Family::Lattice => {
            let p = generate_random_lattice(rng.gen(), size).expect("size within bounds");
            let t = generate_random_mixed_monotone(rng.gen(), &p).expect("lattice");
            (p, t)
        }
        Family::Poset => {
            let p = generate_random_poset(rng.gen(), size).expect("size within bounds");
            let t = generate_mixed_monotone_on_poset(rng.gen(), &p);
            (p, t)
        }
    };
    let start = match (poset.bottom(), poset.top()) {
        (Some(b), Some(t)) if rng.gen_bool(0.25) => (b, t),
        _ => {
            let x0 = rng.gen_range(0..size);
            let up = poset.up_set(x0);
            (x0, up[rng.gen_range(0..up.len())])
        }
    };
    Instance {
        poset,
        operator,
        start,
    }
}

/// Orbit of a start pair: the distinct pairs in order, up to the first repeat.
#[derive(Debug, Clone)]
struct Orbit {
    pairs: Vec<(usize, usize)>,
    /// Exact `⋂_{n≥0} [x_n, y_n]`.
    meet: Vec<usize>,
    sup: Option<usize>,
    inf: Option<usize>,
}

struct Brute<'a> {
    p: &'a FinitePoset,
    t: &'a TableOperator,
    orbits: HashMap<(usize, usize), Orbit>,
}

impl<'a> Brute<'a> {
    fn new(p: &'a FinitePoset, t: &'a TableOperator) -> Self {
        Self {
            p,
            t,
            orbits: HashMap::new(),
        }
    }

    fn a(&self, x: usize, y: usize) -> usize {
        self.t.get(x, y)
    }

    fn interval(&self, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.p.size())
            .filter(|&z| self.p.le(lo, z) && self.p.le(z, hi))
            .collect()
    }

    fn within(&self, z: usize, (lo, hi): (usize, usize)) -> bool {
        self.p.le(lo, z) && self.p.le(z, hi)
    }

    fn orbit(&mut self, s: (usize, usize)) -> &Orbit {
        if !self.orbits.contains_key(&s) {
            let mut pairs = vec![s];
            let mut index = HashMap::from([(s, 0usize)]);
            loop {
                let (x, y) = *pairs.last().unwrap();
                let next = (self.a(x, y), self.a(y, x));
                if index.contains_key(&next) {
                    break;
                }
                index.insert(next, pairs.len());
                pairs.push(next);
            }
            let meet = (0..self.p.size())
                .filter(|&z| pairs.iter().all(|&iv| self.within(z, iv)))
                .collect();
            let xs: Vec<usize> = pairs.iter().map(|q| q.0).collect();
            let ys: Vec<usize> = pairs.iter().map(|q| q.1).collect();
            let sup = least_upper_bound(self.p, &xs);
            let inf = greatest_lower_bound(self.p, &ys);
            self.orbits.insert(s, Orbit { pairs, meet, sup, inf });
        }
        &self.orbits[&s]
    }

    /// `s → p`: the intersection is exactly `{p}`.
    fn weak(&mut self, s: (usize, usize)) -> Option<usize> {
        match self.orbit(s).meet.as_slice() {
            [p] => Some(*p),
            _ => None,
        }
    }

    /// `s ⇉ p`: `sup x_n = inf y_n = p`.
    fn strong(&mut self, s: (usize, usize)) -> Option<usize> {
        let o = self.orbit(s);
        match (o.sup, o.inf) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    fn bounds_exist(&mut self, s: (usize, usize)) -> bool {
        let o = self.orbit(s);
        o.sup.is_some() && o.inf.is_some()
    }

    fn starts_around(&self, s: (usize, usize), p: usize) -> Vec<(usize, usize)> {
        let lows = self.interval(s.0, p);
        let highs = self.interval(p, s.1);
        lows.iter()
            .flat_map(|&u| highs.iter().map(move |&v| (u, v)))
            .collect()
    }

    /// `[x0, y0] → p`.
    fn box_weak(&mut self, s: (usize, usize), p: usize) -> bool {
        self.within(p, s)
            && self
                .starts_around(s, p)
                .into_iter()
                .all(|q| self.weak(q) == Some(p))
    }

    /// `[x0, y0] ⇉ p`.
    fn box_strong(&mut self, s: (usize, usize), p: usize) -> bool {
        self.within(p, s)
            && self
                .starts_around(s, p)
                .into_iter()
                .all(|q| self.strong(q) == Some(p))
    }

    fn fixed(&self, p: usize) -> bool {
        self.a(p, p) == p
    }

    fn is_lu(&self, (x, y): (usize, usize)) -> bool {
        self.p.le(x, y) && self.p.le(x, self.a(x, y)) && self.p.le(self.a(y, x), y)
    }

    /// Coupled fixed points with both coordinates in one of the given intervals.
    fn coupled_fixed_points(&self, boxes: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &(lo, hi) in boxes {
            for x in self.interval(lo, hi) {
                for y in self.interval(lo, hi) {
                    if self.a(x, y) == x && self.a(y, x) == y && !out.contains(&(x, y)) {
                        out.push((x, y));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn unique_coupled_is(&self, boxes: &[(usize, usize)], p: usize) -> bool {
        self.coupled_fixed_points(boxes) == vec![(p, p)]
    }
}

fn least_upper_bound(p: &FinitePoset, set: &[usize]) -> Option<usize> {
    let ub: Vec<usize> = (0..p.size())
        .filter(|&u| set.iter().all(|&s| p.le(s, u)))
        .collect();
    ub.iter().copied().find(|&c| ub.iter().all(|&u| p.le(c, u)))
}

fn greatest_lower_bound(p: &FinitePoset, set: &[usize]) -> Option<usize> {
    let lb: Vec<usize> = (0..p.size())
        .filter(|&l| set.iter().all(|&s| p.le(l, s)))
        .collect();
    lb.iter().copied().find(|&c| lb.iter().all(|&l| p.le(l, c)))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    /// Instances on which the hypotheses held and the conclusion was evaluated.
    pub checked: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseViolation {
    pub clause: String,
    pub detail: String,
}

/// Result of checking one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceOutcome {
    pub tallies: BTreeMap<&'static str, Tally>,
    pub violations: Vec<ClauseViolation>,
    /// `x*` when the start pair is weakly attracted to a fixed point.
    pub attractive_fixed_point: Option<usize>,
    pub empty_meet: bool,
    /// The stored orbit of the start pair.
    pub trace: Vec<(usize, usize)>,
    pub sandwich_pairs: u64,
}

impl InstanceOutcome {
    pub fn first_violation(&self) -> Option<&ClauseViolation> {
        self.violations.first()
    }
}

struct Recorder {
    tallies: BTreeMap<&'static str, Tally>,
    violations: Vec<ClauseViolation>,
}

impl Recorder {
    fn check(&mut self, clause: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        let t = self.tallies.entry(clause).or_default();
        t.checked += 1;
        if !ok {
            t.violations += 1;
            self.violations.push(ClauseViolation {
                clause: clause.to_string(),
                detail: detail(),
            });
        }
    }
}

/// Evaluate every applicable clause on one instance.
pub fn check_instance(inst: &Instance) -> InstanceOutcome {
    let (p, t) = (&inst.poset, &inst.operator);
    let s = inst.start;
    let mut rec = Recorder {
        tallies: CLAUSES.iter().map(|c| (*c, Tally::default())).collect(),
        violations: Vec::new(),
    };
    let poset = Arc::new(p.clone());
    let op = t.to_operator(Arc::clone(&poset), "table");
    let mut out = InstanceOutcome {
        tallies: BTreeMap::new(),
        violations: Vec::new(),
        attractive_fixed_point: None,
        empty_meet: false,
        trace: Vec::new(),
        sandwich_pairs: 0,
    };

    let mm = check_mixed_monotone(&op, Strategy::Exhaustive);
    let mm_ok = matches!(mm, Ok(MonotonicityVerdict::Pass { .. }));
    rec.check("mixed-monotone", mm_ok, || format!("{mm:?}"));
    if !mm_ok || !p.le(s.0, s.1) {
        if !p.le(s.0, s.1) {
            rec.check("bracket-order", false, || format!("start {s:?} is not ordered"));
        }
        out.trace = Brute::new(p, t).orbit(s).pairs.clone();
        out.tallies = rec.tallies;
        out.violations = rec.violations;
        return out;
    }

    let mut b = Brute::new(p, t);
    let orbit = b.orbit(s).clone();
    out.trace = orbit.pairs.clone();
    let all_boxes: Vec<(usize, usize)> = orbit.pairs.clone();
    let fps_box = b.coupled_fixed_points(&[s]);
    let weak = b.weak(s);
    let strong = b.strong(s);
    out.empty_meet = orbit.meet.is_empty();

    // Bracket order and propagation.
    rec.check(
        "bracket-order",
        orbit.pairs.iter().all(|&(x, y)| p.le(x, y)),
        || format!("orbit {:?}", orbit.pairs),
    );
    let mut prop_fail = None;
    for &(xn, yn) in &orbit.pairs {
        let next = (b.a(xn, yn), b.a(yn, xn));
        for x in b.interval(xn, yn) {
            for y in b.interval(xn, yn) {
                if prop_fail.is_none() && !b.within(b.a(x, y), next) {
                    prop_fail = Some((x, y, (xn, yn)));
                }
            }
        }
    }
    rec.check("bracket-propagation", prop_fail.is_none(), || {
        format!("A{:?} left the next bracket", prop_fail)
    });

    rec.check(
        "fixed-points-in-brackets",
        fps_box
            .iter()
            .all(|&(x, y)| all_boxes.iter().all(|&iv| b.within(x, iv) && b.within(y, iv))),
        || format!("coupled fixed points {fps_box:?}, orbit {:?}", orbit.pairs),
    );

    if b.is_lu(s) {
        let ok = orbit.pairs.iter().all(|&(x, y)| {
            let (xn, yn) = (b.a(x, y), b.a(y, x));
            p.le(x, xn) && p.le(yn, y) && b.is_lu((x, y))
        });
        rec.check("lu-monotone", ok, || format!("orbit {:?}", orbit.pairs));
    }

    if orbit.meet.is_empty() {
        rec.check("empty-meet-no-fixed-points", fps_box.is_empty(), || {
            format!("coupled fixed points {fps_box:?} in an empty intersection")
        });
    }

    // Relations between the attraction notions.
    if let Some(q) = weak {
        rec.check("weak-attractor-in-start-box", b.within(q, s), || {
            format!("x* = {q} outside {s:?}")
        });
    }
    for q in b.interval(s.0, s.1) {
        let bw = b.box_weak(s, q);
        let bs = b.box_strong(s, q);
        if bw {
            let inner = b.starts_around(s, q);
            let ok = weak == Some(q) && inner.iter().all(|&r| b.box_weak(r, q));
            rec.check("box-weak-inherits", ok, || format!("x* = {q}"));
        }
        if bs {
            let inner = b.starts_around(s, q);
            let ok = strong == Some(q) && inner.iter().all(|&r| b.box_strong(r, q));
            rec.check("box-strong-inherits", ok, || format!("x* = {q}"));
            rec.check("box-strong-implies-box-weak", bw, || format!("x* = {q}"));
        }
        rec.check(
            "box-weak-iff-fixed",
            bw == (weak == Some(q) && b.fixed(q)),
            || format!("x* = {q}, box-weak {bw}, weak {weak:?}, A(x*,x*) = {}", b.a(q, q)),
        );
        rec.check(
            "box-strong-iff-fixed",
            bs == (strong == Some(q) && b.fixed(q)),
            || format!("x* = {q}, box-strong {bs}, strong {strong:?}, A(x*,x*) = {}", b.a(q, q)),
        );
    }
    if let Some(q) = weak.or(strong) {
        let lhs = strong == Some(q);
        let rhs = weak == Some(q) && b.bounds_exist(s);
        rec.check("strong-iff-weak-with-bounds", lhs == rhs, || {
            format!("x* = {q}, strong {strong:?}, weak {weak:?}")
        });
    }
    if let Some(q) = weak.filter(|&q| b.fixed(q)) {
        out.attractive_fixed_point = Some(q);
        rec.check("attractive-fixed-point-unique", fps_box == vec![(q, q)], || {
            format!("x* = {q}, coupled fixed points {fps_box:?}")
        });
    }

    // Finite-step criteria. The orbit is periodic after its stored prefix, so
    // every step index is represented by some k below its length.
    let pairs = &orbit.pairs;
    let cycle_next = {
        let (x, y) = *pairs.last().unwrap();
        (b.a(x, y), b.a(y, x))
    };
    let pair_at = |k: usize| if k < pairs.len() { pairs[k] } else { cycle_next };
    for k in 1..=pairs.len() {
        let sk = pair_at(k);
        let Some(q) = b.weak(sk) else { continue };
        let prefix_ok = pairs[..k].iter().all(|&iv| b.within(q, iv));
        let tail_bounds = b.bounds_exist(sk);
        let conclusion = |b: &mut Brute, n_max: usize| -> Result<(), String> {
            for n in 0..=n_max {
                let sn = pair_at(n);
                if !b.fixed(q) {
                    return Err(format!("x* = {q} is not fixed"));
                }
                if !b.unique_coupled_is(&[sn], q) {
                    return Err(format!("uniqueness fails in box {n} = {sn:?}"));
                }
                if !b.box_weak(sn, q) {
                    return Err(format!("box {n} = {sn:?} not weakly attracted to {q}"));
                }
                if tail_bounds && !b.box_strong(sn, q) {
                    return Err(format!("box {n} = {sn:?} not attracted to {q}"));
                }
            }
            Ok(())
        };
        if prefix_ok {
            let r = conclusion(&mut b, k);
            rec.check("k-step-criterion", r.is_ok(), || format!("k = {k}: {}", r.unwrap_err()));
        }
        if k == 1 && b.within(q, s) {
            let mut r = conclusion(&mut b, 1);
            if r.is_ok() && !b.unique_coupled_is(&[s, sk], q) {
                r = Err("uniqueness fails on the union of the first two boxes".into());
            }
            rec.check("one-step-criterion", r.is_ok(), || r.unwrap_err());
        }
        if b.is_lu(sk) && b.within(q, s) {
            let r = conclusion(&mut b, k);
            rec.check("lu-onset-criterion", r.is_ok(), || format!("k = {k}: {}", r.unwrap_err()));
        }
    }
    if b.is_lu(s) {
        if let Some(q) = weak {
            let mut r = Ok(());
            if !b.unique_coupled_is(&[s], q) {
                r = Err(format!("uniqueness fails for x* = {q}"));
            } else if !b.box_weak(s, q) {
                r = Err(format!("start box not weakly attracted to {q}"));
            } else if b.bounds_exist(s) && !b.box_strong(s, q) {
                r = Err(format!("start box not attracted to {q}"));
            }
            rec.check("lu-start-criterion", r.is_ok(), || r.unwrap_err());
        }
    }

    // Engine agreement.
    let agree = engine_agrees(&op, &mut b, s, &orbit);
    rec.check("classify-agrees", agree.is_ok(), || agree.unwrap_err());

    if let Some(q) = out.attractive_fixed_point {
        let r = sandwich_all(&op, &b, s, q, &mut out.sandwich_pairs);
        rec.check("sandwich", r.is_ok(), || r.unwrap_err());
    }

    rec.tallies.retain(|_, t| t.checked > 0);
    out.tallies = rec.tallies;
    out.violations = rec.violations;
    out
}

fn engine_agrees(
    op: &Operator<FinitePoset>,
    b: &mut Brute,
    s: (usize, usize),
    orbit: &Orbit,
) -> Result<(), String> {
    let trace = run(op, &s.0, &s.1, StopPolicy::default()).map_err(|e| format!("engine error: {e}"))?;
    for st in trace.steps() {
        let expect = if st.n < orbit.pairs.len() {
            orbit.pairs[st.n]
        } else {
            // past the prefix only the repeated pair may appear
            let (x, y) = *orbit.pairs.last().unwrap();
            (b.a(x, y), b.a(y, x))
        };
        if (st.x, st.y) != expect && st.n <= orbit.pairs.len() {
            return Err(format!("step {} is {:?}, expected {expect:?}", st.n, (st.x, st.y)));
        }
    }
    let onset = orbit.pairs.iter().position(|&(x, y)| {
        let (xn, yn) = (b.a(x, y), b.a(y, x));
        b.p.le(x, xn) && b.p.le(yn, y)
    });
    // the engine only inspects transitions out of steps below its horizon
    let onset = onset.filter(|&k| k < trace.horizon());
    if trace.lu_onset != onset {
        return Err(format!("lu onset {:?}, expected {onset:?}", trace.lu_onset));
    }
    let v = trace.verdict();
    let weak = b.weak(s);
    let strong = b.strong(s);
    let ok = match &v.kind {
        VerdictKind::NoCoupledFixedPointInBox => orbit.meet.is_empty(),
        VerdictKind::Undecided => orbit.meet.len() > 1,
        VerdictKind::WeaklyOrderAttractive(q) => weak == Some(*q) && strong != Some(*q),
        VerdictKind::OrderAttractive(q) | VerdictKind::FixedPointReached(q) => {
            weak == Some(*q) && strong == Some(*q)
        }
    };
    if !ok {
        return Err(format!(
            "engine says {:?}, brute force meet {:?}, strong {strong:?}",
            v.kind, orbit.meet
        ));
    }
    if let Some(q) = v.kind.x_star() {
        if v.fixed_point_confirmed != b.fixed(*q) {
            return Err(format!("fixed_point_confirmed wrong for {q}"));
        }
    }
    Ok(())
}

/// Sandwich bounds for every interior start, through the engine over its
/// stored horizon and directly over `|X|² + 1` steps.
fn sandwich_all(
    op: &Operator<FinitePoset>,
    b: &Brute,
    s: (usize, usize),
    q: usize,
    counter: &mut u64,
) -> Result<(), String> {
    let outer = run(op, &s.0, &s.1, StopPolicy::default()).map_err(|e| e.to_string())?;
    let horizon = b.p.size() * b.p.size() + 1;
    for (u0, v0) in b.starts_around(s, q) {
        *counter += 1;
        match sandwich_check(op, &outer, &u0, &v0, Some(&q)) {
            Ok(SandwichVerdict::Pass { .. }) => {}
            other => return Err(format!("start ({u0}, {v0}): {other:?}")),
        }
        let (mut x, mut y, mut u, mut v) = (s.0, s.1, u0, v0);
        for n in 0..=horizon {
            let ok = b.p.le(x, u) && b.p.le(u, q) && b.p.le(q, v) && b.p.le(v, y);
            if !ok {
                return Err(format!("start ({u0}, {v0}) leaves the sandwich at step {n}"));
            }
            (x, y) = (b.a(x, y), b.a(y, x));
            (u, v) = (b.a(u, v), b.a(v, u));
        }
    }
    Ok(())
}

/// Replayable record of a violated clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleBundle {
    pub poset: FinitePoset,
    pub operator: TableOperator,
    pub start: (usize, usize),
    pub violated: String,
    pub trace: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialViolation {
    pub trial: usize,
    pub clause: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub config: SuiteConfig,
    pub clauses: BTreeMap<String, Tally>,
    pub total_violations: u64,
    pub violations: Vec<TrialViolation>,
    pub attractive_fixed_point_trials: usize,
    pub empty_meet_trials: usize,
    pub sandwich_pairs: u64,
    #[serde(skip)]
    pub bundles: Vec<CounterexampleBundle>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.total_violations == 0
    }
}

/// Run `cfg.trials` random trials in parallel and aggregate them by trial index.
pub fn verify_theorem_suite(cfg: SuiteConfig) -> OracleReport {
    let outcomes: Vec<(Instance, InstanceOutcome)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let inst = draw_instance(&cfg, trial);
            let out = check_instance(&inst);
            (inst, out)
        })
        .collect();
    let mut report = OracleReport {
        config: cfg,
        clauses: CLAUSES.iter().map(|c| (c.to_string(), Tally::default())).collect(),
        total_violations: 0,
        violations: Vec::new(),
        attractive_fixed_point_trials: 0,
        empty_meet_trials: 0,
        sandwich_pairs: 0,
        bundles: Vec::new(),
    };
    for (trial, (inst, out)) in outcomes.into_iter().enumerate() {
        for (c, t) in &out.tallies {
            let e = report.clauses.entry(c.to_string()).or_default();
            e.checked += t.checked;
            e.violations += t.violations;
        }
        report.attractive_fixed_point_trials += usize::from(out.attractive_fixed_point.is_some());
        report.empty_meet_trials += usize::from(out.empty_meet);
        report.sandwich_pairs += out.sandwich_pairs;
        for v in &out.violations {
            report.total_violations += 1;
            report.violations.push(TrialViolation {
                trial,
                clause: v.clause.clone(),
                detail: v.detail.clone(),
            });
        }
        if let Some(v) = out.first_violation() {
            report.bundles.push(CounterexampleBundle {
                poset: inst.poset,
                operator: inst.operator,
                start: inst.start,
                violated: v.clause.clone(),
                trace: out.trace.clone(),
            });
        }
    }
    report
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("start element {0} is not in the poset")]
    Start(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub expected: String,
    /// Every clause violated on the replayed instance, in evaluation order.
    pub observed: Vec<String>,
    pub reproduced: bool,
}

/// Re-check the bundled instance and compare the violated clause.
pub fn replay(bundle: &CounterexampleBundle) -> Result<ReplayOutcome, ReplayError> {
    let n = bundle.poset.size();
    bundle.operator.validate(n)?;
    for e in [bundle.start.0, bundle.start.1] {
        if e >= n {
            return Err(ReplayError::Start(e));
        }
    }
    let inst = Instance {
        poset: bundle.poset.clone(),
        operator: bundle.operator.clone(),
        start: bundle.start,
    };
    let out = check_instance(&inst);
    let observed: Vec<String> = out.violations.iter().map(|v| v.clause.clone()).collect();
    Ok(ReplayOutcome {
        reproduced: observed.first() == Some(&bundle.violated),
        expected: bundle.violated.clone(),
        observed,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    pub instances: usize,
    pub trials_drawn: usize,
    pub pairs_checked: u64,
    pub failures: Vec<TrialViolation>,
}

/// Draw trials until `instances` of them have a start pair weakly attracted
/// to a fixed point, and check the sandwich bounds on each.
pub fn sandwich_suite(seed: u64, instances: usize) -> SandwichReport {
    let cfg = SuiteConfig::new(seed, 0);
    let mut report = SandwichReport {
        instances: 0,
        trials_drawn: 0,
        pairs_checked: 0,
        failures: Vec::new(),
    };
    const BATCH: usize = 256;
    while report.instances < instances {
        let base = report.trials_drawn;
        let batch: Vec<_> = (base..base + BATCH)
            .into_par_iter()
            .map(|trial| {
                let inst = draw_instance(&cfg, trial);
                let poset = Arc::new(inst.poset.clone());
                let op = inst.operator.to_operator(poset, "table");
                let mut b = Brute::new(&inst.poset, &inst.operator);
                let q = b.weak(inst.start).filter(|&q| b.fixed(q))?;
                let mut pairs = 0;
                let r = sandwich_all(&op, &b, inst.start, q, &mut pairs);
                Some((trial, pairs, r))
            })
            .collect();
        for (trial, pairs, r) in batch.into_iter().flatten() {
            if report.instances == instances {
                break;
            }
            report.instances += 1;
            report.trials_drawn = trial + 1;
            report.pairs_checked += pairs;
            if let Err(detail) = r {
                report.failures.push(TrialViolation {
                    trial,
                    clause: "sandwich".into(),
                    detail,
                });
            }
        }
        if report.instances < instances {
            report.trials_drawn = base + BATCH;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(p: FinitePoset, f: impl Fn(usize, usize) -> usize, start: (usize, usize)) -> Instance {
        let operator = TableOperator::from_fn(p.size(), f);
        Instance { poset: p, operator, start }
    }

    #[test]
    fn projection_trial_is_clean() {
        let inst = instance(FinitePoset::chain(3), |x, _| x, (0, 2));
        let out = check_instance(&inst);
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        assert_eq!(out.trace, vec![(0, 2)]);
        assert_eq!(out.tallies["bracket-order"].checked, 1);
        assert!(out.attractive_fixed_point.is_none());
    }

    #[test]
    fn empty_meet_trial() {
        // constant 2 outside the start box [0, 1]
        let inst = instance(FinitePoset::chain(3), |_, _| 2, (0, 1));
        let out = check_instance(&inst);
        assert!(out.empty_meet);
        assert_eq!(out.tallies["empty-meet-no-fixed-points"].checked, 1);
        assert!(out.violations.is_empty());
    }

    #[test]
    fn non_monotone_table_is_reported_and_replays() {
        let inst = instance(FinitePoset::chain(2), |_, y| y, (0, 1));
        let out = check_instance(&inst);
        assert_eq!(out.first_violation().unwrap().clause, "mixed-monotone");
        let bundle = CounterexampleBundle {
            poset: inst.poset.clone(),
            operator: inst.operator.clone(),
            start: inst.start,
            violated: "mixed-monotone".into(),
            trace: out.trace.clone(),
        };
        let json = serde_json::to_string(&bundle).unwrap();
        let back: CounterexampleBundle = serde_json::from_str(&json).unwrap();
        assert!(replay(&back).unwrap().reproduced);
        assert!(json.starts_with(r#"{"poset":{"size":2,"leq":[[true,true],[false,true]]},"operator":[[0,1],[0,1]],"start":[0,1],"violated":"mixed-monotone","trace":"#));
    }

    #[test]
    fn small_suite_has_no_violations_and_is_deterministic() {
        let a = verify_theorem_suite(SuiteConfig::new(7, 120));
        assert!(a.passed(), "{:?}", a.violations);
        let b = verify_theorem_suite(SuiteConfig::new(7, 120));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.attractive_fixed_point_trials > 0);
        assert!(a.empty_meet_trials > 0);
        for c in ["k-step-criterion", "lu-start-criterion", "lu-onset-criterion", "sandwich"] {
            assert!(a.clauses[c].checked > 0, "{c} never applicable");
        }
    }

    #[test]
    fn poset_family_has_no_violations() {
        let mut cfg = SuiteConfig::new(3, 150);
        cfg.family = Family::Poset;
        let r = verify_theorem_suite(cfg);
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn sandwich_suite_collects_requested_instances() {
        let r = sandwich_suite(11, 40);
        assert_eq!(r.instances, 40);
        assert!(r.failures.is_empty());
        assert!(r.pairs_checked >= 40);
    }
}
