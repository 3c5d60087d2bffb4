use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::phi::PhiSpec;
use super::solver::{solve, SolveOptions, SolveReport};
use super::vector::{linked, Cone, ConeVector};
use super::ConeError;
use crate::algebra::Operator;
use crate::order::Coordinates;

/// Random representatives of the interior of `Rᵈ₊`, coordinates in `[0.1, 10]`.
pub fn random_starts(dim: usize, count: usize, seed: u64) -> Vec<ConeVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ConeVector::from_coords((0..dim).map(|_| 10f64.powf(rng.gen_range(-1.0..=1.0))).collect()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiStart {
    pub reports: Vec<SolveReport>,
    /// Largest max-norm distance between any two returned `x*`.
    pub spread: f64,
}

/// Solves from every start in parallel.
pub fn multi_start(a: &Operator<Cone>, phi: &PhiSpec, starts: &[ConeVector], tol: f64) -> Result<MultiStart, ConeError> {
    let reports = starts
        .par_iter()
        .map(|u| solve(a, phi, u, &SolveOptions::new(tol)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut spread: f64 = 0.0;
    for r in &reports {
        for s in &reports {
            spread = spread.max(max_diff(r.x_star.as_slice(), s.x_star.as_slice()));
        }
    }
    Ok(MultiStart { reports, spread })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

fn residual(a: &Operator<Cone>, z: &[f64], d: usize) -> DVector<f64> {
    let x = ConeVector::from_coords(z[..d].to_vec());
    let y = ConeVector::from_coords(z[d..].to_vec());
    let (ax, ay) = a.step(&x, &y);
    DVector::from_iterator(
        2 * d,
        ax.as_slice().iter().chain(ay.as_slice()).zip(z).map(|(f, v)| f - v),
    )
}

/// Damped Newton search for coupled fixed points `(x, y)` with both
/// coordinates in `[lo, hi]`, from `starts` random pairs. Returns the
/// distinct solutions found.
pub fn coupled_pair_search(
    a: &Operator<Cone>,
    lo: &ConeVector,
    hi: &ConeVector,
    starts: usize,
    seed: u64,
) -> Result<Vec<(ConeVector, ConeVector)>, ConeError> {
    if linked(lo, hi)?.is_none() {
        return Err(ConeError::NotLinked { what: "search box".into() });
    }
    let d = lo.dim();
    let bounds: Vec<(f64, f64)> = lo.as_slice().iter().chain(lo.as_slice()).copied()
        .zip(hi.as_slice().iter().chain(hi.as_slice()).copied())
        .collect();
    let found: Vec<Vec<f64>> = (0..starts as u64)
        .into_par_iter()
        .filter_map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let z0: Vec<f64> = bounds.iter().map(|&(l, h)| rng.gen_range(l..=h)).collect();
            newton(a, z0, &bounds, d)
        })
        .collect();
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for z in found {
        let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if !distinct.iter().any(|w| max_diff(w, &z) < 1e-7 * scale) {
            distinct.push(z);
        }
    }
    Ok(distinct
        .into_iter()
        .map(|z| (ConeVector::from_coords(z[..d].to_vec()), ConeVector::from_coords(z[d..].to_vec())))
        .collect())
}

fn newton(a: &Operator<Cone>, mut z: Vec<f64>, bounds: &[(f64, f64)], d: usize) -> Option<Vec<f64>> {
    let n = 2 * d;
    let clamp = |v: &mut Vec<f64>| {
        for (t, &(l, h)) in v.iter_mut().zip(bounds) {
            *t = t.clamp(l, h);
        }
    };
    let mut f = residual(a, &z, d);
    for _ in 0..100 {
        let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if f.amax() < 1e-11 * scale {
            return Some(z);
        }
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-7 * z[j].abs().max(1e-3);
            let mut zp = z.clone();
            zp[j] += h;
            let col = (residual(a, &zp, d) - &f) / h;
            jac.set_column(j, &col);
        }
        let delta = jac.lu().solve(&(-&f))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut cand: Vec<f64> = z.iter().zip(delta.iter()).map(|(v, dv)| v + t * dv).collect();
            clamp(&mut cand);
            let fc = residual(a, &cand, d);
            if fc.iter().all(|v| v.is_finite()) && fc.amax() < f.amax() {
                z = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}
