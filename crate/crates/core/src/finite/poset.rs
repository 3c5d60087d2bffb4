use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{Meet, OrderedUniverse};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("relation matrix is not square: row {row} has {len} entries, expected {size}")]
    Shape { row: usize, len: usize, size: usize },
    #[error("empty relation matrix")]
    Empty,
    #[error("{0}")]
    Axiom(AxiomViolation),
}

/// First violated poset axiom, with its witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum AxiomViolation {
    Reflexivity { a: usize },
    Antisymmetry { a: usize, b: usize },
    Transitivity { a: usize, b: usize, c: usize },
}

impl std::fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxiomViolation::Reflexivity { a } => write!(f, "reflexivity fails at {a}"),
            AxiomViolation::Antisymmetry { a, b } => {
                write!(f, "antisymmetry fails: {a} <= {b} and {b} <= {a}")
            }
            AxiomViolation::Transitivity { a, b, c } => {
                write!(f, "transitivity fails: {a} <= {b} <= {c} but not {a} <= {c}")
            }
        }
    }
}

/// Check the poset axioms on a boolean relation matrix.
///
/// `Ok(None)` is a pass; `Ok(Some(v))` carries the first violated axiom.
pub fn validate_poset(matrix: &[Vec<bool>]) -> Result<Option<AxiomViolation>, PosetError> {
    let n = matrix.len();
    if n == 0 {
        return Err(PosetError::Empty);
    }
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(PosetError::Shape {
                row,
                len: r.len(),
                size: n,
            });
        }
    }
    for a in 0..n {
        if !matrix[a][a] {
            return Ok(Some(AxiomViolation::Reflexivity { a }));
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if matrix[a][b] && matrix[b][a] {
                return Ok(Some(AxiomViolation::Antisymmetry { a, b }));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !matrix[a][b] {
                continue;
            }
            for c in 0..n {
                if matrix[b][c] && !matrix[a][c] {
                    return Ok(Some(AxiomViolation::Transitivity { a, b, c }));
                }
            }
        }
    }
    Ok(None)
}

/// Explicit finite partial order on `{0, .., size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PosetRepr", into = "PosetRepr")]
pub struct FinitePoset {
    size: usize,
    // row-major: leq[a * size + b] iff a <= b
    leq: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PosetRepr {
    size: usize,
    leq: Vec<Vec<bool>>,
}

impl TryFrom<PosetRepr> for FinitePoset {
    type Error = PosetError;

    fn try_from(r: PosetRepr) -> Result<Self, Self::Error> {
        if r.leq.len() != r.size {
            return Err(PosetError::Shape {
                row: r.leq.len(),
                len: 0,
                size: r.size,
            });
        }
        FinitePoset::from_matrix(r.leq)
    }
}

impl From<FinitePoset> for PosetRepr {
    fn from(p: FinitePoset) -> Self {
        PosetRepr {
            size: p.size,
            leq: p.matrix(),
        }
    }
}

impl FinitePoset {
    pub fn from_matrix(matrix: Vec<Vec<bool>>) -> Result<Self, PosetError> {
        if let Some(v) = validate_poset(&matrix)? {
            return Err(PosetError::Axiom(v));
        }
        let size = matrix.len();
        Ok(Self {
            size,
            leq: matrix.into_iter().flatten().collect(),
        })
    }

    /// Build from a `≤` predicate; the result is validated.
    pub fn from_fn(size: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self, PosetError> {
        Self::from_matrix(
            (0..size)
                .map(|a| (0..size).map(|b| leq(a, b)).collect())
                .collect(),
        )
    }

    /// `0 < 1 < .. < n-1`.
    pub fn chain(n: usize) -> Self {
        Self::from_fn(n, |a, b| a <= b).expect("chain is a poset")
    }

    /// Product of chains with the given lengths, ordered componentwise.
    /// Element `i` encodes its coordinates in mixed radix, first length fastest.
    pub fn product_of_chains(lengths: &[usize]) -> Self {
        assert!(lengths.iter().all(|&l| l >= 1));
        let size: usize = lengths.iter().product();
        let digits = |mut i: usize| {
            lengths
                .iter()
                .map(|&l| {
                    let d = i % l;
                    i /= l;
                    d
                })
                .collect::<Vec<_>>()
        };
        Self::from_fn(size, |a, b| {
            digits(a).iter().zip(digits(b)).all(|(x, y)| *x <= y)
        })
        .expect("product of chains is a poset")
    }

    /// Divisors of `n` in increasing numeric order, ordered by divisibility.
    pub fn divisor_lattice(n: u64) -> (Self, Vec<u64>) {
        assert!(n >= 1);
        let divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        let p = Self::from_fn(divisors.len(), |a, b| divisors[b] % divisors[a] == 0)
            .expect("divisibility is a partial order");
        (p, divisors)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.size + b]
    }

    pub fn matrix(&self) -> Vec<Vec<bool>> {
        self.leq.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    pub fn up_set(&self, a: usize) -> Vec<usize> {
        (0..self.size).filter(|&b| self.le(a, b)).collect()
    }

    pub fn down_set(&self, a: usize) -> Vec<usize> {
        (0..self.size).filter(|&b| self.le(b, a)).collect()
    }

    /// A linear extension: every element appears after all elements below it.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by_key(|&a| self.down_set(a).len());
        order
    }

    fn least_of(&self, candidates: &[usize]) -> Option<usize> {
        candidates
            .iter()
            .copied()
            .find(|&c| candidates.iter().all(|&d| self.le(c, d)))
    }

    fn greatest_of(&self, candidates: &[usize]) -> Option<usize> {
        candidates
            .iter()
            .copied()
            .find(|&c| candidates.iter().all(|&d| self.le(d, c)))
    }

    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.sup_of(&[a, b])
    }

    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.inf_of(&[a, b])
    }

    pub fn bottom(&self) -> Option<usize> {
        self.inf_of(&(0..self.size).collect::<Vec<_>>())
    }

    pub fn top(&self) -> Option<usize> {
        self.sup_of(&(0..self.size).collect::<Vec<_>>())
    }

    /// Every pair has a join and a meet.
    pub fn is_lattice(&self) -> bool {
        (0..self.size).all(|a| {
            (0..self.size).all(|b| self.join(a, b).is_some() && self.meet(a, b).is_some())
        })
    }
}

impl OrderedUniverse for FinitePoset {
    type Element = usize;

    fn leq(&self, a: &usize, b: &usize) -> bool {
        self.le(*a, *b)
    }

    fn equal(&self, a: &usize, b: &usize) -> bool {
        a == b
    }

    fn sup_of(&self, set: &[usize]) -> Option<usize> {
        let ub: Vec<usize> = (0..self.size)
            .filter(|&u| set.iter().all(|&s| self.le(s, u)))
            .collect();
        self.least_of(&ub)
    }

    fn inf_of(&self, set: &[usize]) -> Option<usize> {
        let lb: Vec<usize> = (0..self.size)
            .filter(|&l| set.iter().all(|&s| self.le(l, s)))
            .collect();
        self.greatest_of(&lb)
    }

    fn elements(&self) -> Option<Vec<usize>> {
        Some((0..self.size).collect())
    }

    fn key(&self, e: &usize) -> Option<usize> {
        Some(*e)
    }

    fn meet_start(&self, lo: &usize, hi: &usize) -> Meet<usize> {
        let members: Vec<usize> = (0..self.size)
            .filter(|&z| self.le(*lo, z) && self.le(z, *hi))
            .collect();
        if members.is_empty() {
            Meet::Empty
        } else {
            Meet::Members(members)
        }
    }

    fn meet_narrow(&self, meet: Meet<usize>, _step: usize, lo: &usize, hi: &usize) -> Meet<usize> {
        match meet {
            Meet::Members(mut m) => {
                m.retain(|&z| self.le(*lo, z) && self.le(z, *hi));
                if m.is_empty() {
                    Meet::Empty
                } else {
                    Meet::Members(m)
                }
            }
            _ => Meet::Empty,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..self.size)
    }

    fn sample_above(&self, e: &usize, rng: &mut dyn RngCore) -> usize {
        let up = self.up_set(*e);
        up[rng.gen_range(0..up.len())]
    }
}
