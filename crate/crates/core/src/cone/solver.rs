use serde::Serialize;

use super::phi::PhiSpec;
use super::vector::{linked, Cone, ConeVector};
use super::ConeError;
use crate::algebra::Operator;
use crate::engine::is_coupled_lu_fixed_point;
use crate::order::OrderedUniverse;

/// Upper clamp on `λ₀`, so that `φ(λ₀)/λ₀` stays away from 1.
pub const LAMBDA0_CLAMP: f64 = 1.0 - 1e-6;

const UNDERFLOW: f64 = 1e-300;
const REL_SLACK: f64 = 1e-12;

/// Coupled lu-pair `x₀ = λ₀^{n₀}u ≤ y₀ = λ₀^{−n₀}u`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LuPair {
    pub x0: ConeVector,
    pub y0: ConeVector,
    pub lambda0: f64,
    pub k0: usize,
    pub n0: usize,
}

fn part_of(u: &ConeVector, v: &ConeVector, what: &str) -> Result<f64, ConeError> {
    linked(u, v)?
        .map(|c| c.lambda_max)
        .ok_or_else(|| ConeError::NotLinked { what: what.to_string() })
}

/// Least `n ≥ 1` with `(φ(λ₀)/λ₀)ⁿ ≥ 1/λ₀`, in log space.
pub fn k0_for(phi: &PhiSpec, lambda0: f64) -> usize {
    let gain = (phi.eval(lambda0) / lambda0).ln();
    let need = -lambda0.ln() / gain;
    // forgive last-ulp noise when `need` is an integer
    ((need * (1.0 - REL_SLACK)).ceil() as usize).max(1)
}

/// Builds the starting pair from a part representative `u`. Every vector in
/// `targets` must be linked with `u` and ends up inside `[x₀, y₀]`.
pub fn construct_lu_pair(
    a: &Operator<Cone>,
    phi: &PhiSpec,
    u: &ConeVector,
    targets: &[ConeVector],
) -> Result<LuPair, ConeError> {
    let au = a.apply(u, u);
    if let Some(index) = au.first_invalid() {
        return Err(ConeError::LeftCone { step: 0, index });
    }
    let lambda0 = part_of(u, &au, "A(u, u)")?.min(LAMBDA0_CLAMP);
    let k0 = k0_for(phi, lambda0);
    let mut n0 = k0;
    let log_l = -lambda0.ln();
    for t in targets {
        part_of(u, t, "target")?;
        for (ti, ui) in t.as_slice().iter().zip(u.as_slice()) {
            if *ui > 0.0 {
                let n = ((ti / ui).ln().abs() / log_l * (1.0 - REL_SLACK)).ceil() as usize;
                n0 = n0.max(n);
            }
        }
    }
    let scale = lambda0.powf(n0 as f64);
    if !(scale >= UNDERFLOW) || !(1.0 / scale).is_finite() {
        return Err(ConeError::Underflow { n0 });
    }
    let x0 = u.scale(scale);
    let y0 = u.scale(1.0 / scale);
    if !is_coupled_lu_fixed_point(a, &x0, &y0) {
        return Err(ConeError::LuPairRejected { n0 });
    }
    Ok(LuPair { x0, y0, lambda0, k0, n0 })
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop once `1 − λₙ < tol`.
    pub tol: f64,
    pub max_steps: usize,
    /// Points the starting box must contain.
    pub targets: Vec<ConeVector>,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_steps: 100_000, targets: Vec::new() }
    }
}

/// Result of a certified solve. Traces are kept in memory only.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub x_star: ConeVector,
    pub residual: f64,
    pub lambda0: f64,
    pub k0: usize,
    pub n0: usize,
    pub iterations: usize,
    pub lambda_final: f64,
    pub final_gap: f64,
    #[serde(skip)]
    pub lu_pair: LuPair,
    #[serde(skip)]
    pub lambda_trace: Vec<f64>,
    #[serde(skip)]
    pub x_trace: Vec<ConeVector>,
    #[serde(skip)]
    pub y_trace: Vec<ConeVector>,
}

/// Iterates from the synthesized lu-pair while certifying `xₙ ≥ λₙ yₙ`
/// with `λₙ₊₁ = φ(λₙ)`. Returns `x* = xₙ` once `1 − λₙ < tol`.
pub fn solve(a: &Operator<Cone>, phi: &PhiSpec, u: &ConeVector, opts: &SolveOptions) -> Result<SolveReport, ConeError> {
    if !(opts.tol > 0.0 && opts.tol < 1.0) {
        return Err(ConeError::InvalidTolerance(opts.tol));
    }
    let pair = construct_lu_pair(a, phi, u, &opts.targets)?;
    let mut x = pair.x0.clone();
    let mut y = pair.y0.clone();
    let mut lambda = part_of(&x, &y, "x0 and y0")?;
    let mut lambda_trace = vec![lambda];
    let mut x_trace = vec![x.clone()];
    let mut y_trace = vec![y.clone()];
    let mut step = 0;
    while 1.0 - lambda >= opts.tol {
        if step == opts.max_steps {
            return Err(ConeError::NonConvergence { steps: step });
        }
        step += 1;
        let (nx, ny) = a.step(&x, &y);
        for v in [&nx, &ny] {
            if let Some(index) = v.first_invalid() {
                return Err(ConeError::LeftCone { step, index });
            }
        }
        let next = phi.eval(lambda);
        if !(next > lambda) {
            return Err(ConeError::PhiStalled { step, lambda });
        }
        lambda = next.min(1.0);
        let bad = nx
            .as_slice()
            .iter()
            .zip(ny.as_slice())
            .position(|(xi, yi)| *xi < lambda * yi - REL_SLACK * yi.max(1.0) || *xi > yi + REL_SLACK * yi.max(1.0));
        if let Some(coordinate) = bad {
            return Err(ConeError::CertificateViolation { step, coordinate, lambda });
        }
        x = nx;
        y = ny;
        lambda_trace.push(lambda);
        x_trace.push(x.clone());
        y_trace.push(y.clone());
    }
    let universe = a.universe();
    let residual = universe.distance(&a.apply(&x, &x), &x).unwrap_or(f64::NAN);
    let final_gap = universe.distance(&x, &y).unwrap_or(f64::NAN);
    Ok(SolveReport {
        x_star: x,
        residual,
        lambda0: pair.lambda0,
        k0: pair.k0,
        n0: pair.n0,
        iterations: step,
        lambda_final: lambda,
        final_gap,
        lu_pair: pair,
        lambda_trace,
        x_trace,
        y_trace,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cone::vector::nonnegative_cone;
    use crate::order::Coordinates;

    const X_STAR: f64 = 2.266854416186727;

    fn power_op(dim: usize) -> Operator<Cone> {
        Operator::new(Arc::new(nonnegative_cone(dim)), "power", |x: &ConeVector, y: &ConeVector| {
            ConeVector::from_coords(
                x.as_slice().iter().zip(y.as_slice()).map(|(a, b)| a.sqrt() + b.powf(-1.0 / 3.0)).collect(),
            )
        })
    }

    #[test]
    fn scalar_root_by_bisection() {
        let f = |t: f64| t.sqrt() + t.powf(-1.0 / 3.0) - t;
        let (mut lo, mut hi) = (1.0, 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 { lo = mid } else { hi = mid }
        }
        assert!((lo - X_STAR).abs() < 1e-14);
    }

    #[test]
    fn pair_constants_for_unit_start() {
        let phi = PhiSpec::power(0.5).unwrap();
        let p = construct_lu_pair(&power_op(1), &phi, &ConeVector::ones(1), &[]).unwrap();
        assert_eq!(p.lambda0, 0.5);
        assert_eq!(p.k0, 2);
        assert_eq!(p.n0, 2);
        assert_eq!(p.x0.as_slice(), &[0.25]);
        assert_eq!(p.y0.as_slice(), &[4.0]);
    }

    #[test]
    fn targets_widen_the_box() {
        let phi = PhiSpec::power(0.5).unwrap();
        let t = ConeVector::new(vec![100.0]).unwrap();
        let p = construct_lu_pair(&power_op(1), &phi, &ConeVector::ones(1), &[t]).unwrap();
        assert_eq!(p.n0, 7);
        assert!(p.y0.as_slice()[0] >= 100.0);
    }

    #[test]
    fn solves_power_operator() {
        let phi = PhiSpec::power(0.5).unwrap();
        let r = solve(&power_op(1), &phi, &ConeVector::ones(1), &SolveOptions::new(1e-10)).unwrap();
        assert!((r.x_star.as_slice()[0] - X_STAR).abs() < 1e-8);
        assert!(r.residual < 1e-9);
        assert!(1.0 - r.lambda_final < 1e-10);
        assert_eq!(r.lambda_trace[0], 1.0 / 16.0);
        for (x, y) in r.x_trace.iter().zip(&r.y_trace) {
            assert!(x.as_slice()[0] <= X_STAR + 1e-12 && X_STAR <= y.as_slice()[0] + 1e-12);
        }
    }

    #[test]
    fn symmetric_in_the_plane() {
        let phi = PhiSpec::power(0.5).unwrap();
        let u = ConeVector::new(vec![0.5, 3.0]).unwrap();
        let r = solve(&power_op(2), &phi, &u, &SolveOptions::new(1e-10)).unwrap();
        let s = r.x_star.as_slice();
        assert!((s[0] - s[1]).abs() < 1e-9 && (s[0] - X_STAR).abs() < 1e-8);
    }

    #[test]
    fn overoptimistic_gain_breaks_the_certificate() {
        let phi = PhiSpec::power(0.1).unwrap();
        let e = solve(&power_op(1), &phi, &ConeVector::ones(1), &SolveOptions::new(1e-10)).unwrap_err();
        assert!(matches!(e, ConeError::CertificateViolation { .. }), "{e:?}");
    }

    #[test]
    fn unlinked_start_rejected() {
        let phi = PhiSpec::power(0.5).unwrap();
        let a = Operator::new(Arc::new(nonnegative_cone(2)), "one", |_: &ConeVector, _: &ConeVector| {
            ConeVector::from_coords(vec![1.0, 0.0])
        });
        let e = solve(&a, &phi, &ConeVector::ones(2), &SolveOptions::new(1e-6)).unwrap_err();
        assert!(matches!(e, ConeError::NotLinked { .. }));
    }

    #[test]
    fn bad_tolerance_rejected() {
        let phi = PhiSpec::power(0.5).unwrap();
        let e = solve(&power_op(1), &phi, &ConeVector::ones(1), &SolveOptions::new(0.0)).unwrap_err();
        assert_eq!(e, ConeError::InvalidTolerance(0.0));
    }

    #[test]
    fn extreme_start_underflows() {
        let phi = PhiSpec::power(0.5).unwrap();
        let t = ConeVector::new(vec![1e-305]).unwrap();
        let mut opts = SolveOptions::new(1e-6);
        opts.targets.push(t);
        // λ₀ = 1/2 needs n₀ = 1014 and 2^-1014 is below the floor
        let u = ConeVector::ones(1);
        let e = solve(&power_op(1), &phi, &u, &opts).unwrap_err();
        assert!(matches!(e, ConeError::Underflow { .. }), "{e:?}");
    }

    #[test]
    fn report_json_fields() {
        let phi = PhiSpec::power(0.5).unwrap();
        let r = solve(&power_op(1), &phi, &ConeVector::ones(1), &SolveOptions::new(1e-10)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["final_gap", "iterations", "k0", "lambda0", "lambda_final", "n0", "residual", "x_star"]
        );
    }
}
