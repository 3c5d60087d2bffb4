use serde::Serialize;

use super::vector::ConeVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `∀μ > 1 ∃k ∀n ≥ k: xₙ ≤ μ·x_k`
    Upper,
    /// `∀λ < 1 ∃k ∀n ≥ k: λ·x_k ≤ xₙ`
    Lower,
}

impl Bound {
    /// Default parameter grid, approaching 1 from the relevant side.
    pub fn default_grid(self) -> Vec<f64> {
        let eps = [0.5, 0.1, 0.01, 1e-3, 1e-4];
        match self {
            Bound::Upper => eps.iter().map(|e| 1.0 + e).collect(),
            Bound::Lower => eps.iter().map(|e| 1.0 - e).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub param: f64,
    /// Least admissible `k`, if any.
    pub witness: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfBoundedReport {
    pub bound: Bound,
    pub entries: Vec<BoundEntry>,
}

impl SelfBoundedReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.witness.is_some())
    }
}

/// Checks self-boundedness of a finite trace on a parameter grid.
///
/// A witness `k` must leave at least half the trace after it, otherwise the
/// last index would always qualify.
pub fn self_bounded_check(xs: &[ConeVector], bound: Bound, grid: &[f64]) -> SelfBoundedReport {
    let len = xs.len();
    let dim = xs.first().map_or(0, ConeVector::dim);
    // suffix envelope: coordinatewise max (upper) or min (lower) of x_k..x_end
    let mut env = vec![vec![0.0; dim]; len];
    for k in (0..len).rev() {
        for i in 0..dim {
            let v = xs[k].as_slice()[i];
            env[k][i] = match (bound, k + 1 < len) {
                (_, false) => v,
                (Bound::Upper, true) => v.max(env[k + 1][i]),
                (Bound::Lower, true) => v.min(env[k + 1][i]),
            };
        }
    }
    let entries = grid
        .iter()
        .map(|&param| {
            let ok = |k: usize| {
                (0..dim).all(|i| {
                    let xk = xs[k].as_slice()[i];
                    let slack = 1e-12 * xk.abs().max(1.0);
                    match bound {
                        Bound::Upper => env[k][i] <= param * xk + slack,
                        Bound::Lower => param * xk <= env[k][i] + slack,
                    }
                })
            };
            BoundEntry { param, witness: (0..len.div_ceil(2)).find(|&k| ok(k)) }
        })
        .collect();
    SelfBoundedReport { bound, entries }
}
