use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::vector::{linked, nonnegative_cone, Cone, ConeVector};
use super::ConeError;
use crate::algebra::Operator;
use crate::order::Coordinates;

/// Equispaced nodes `tᵢ = i/(m−1)` on `[0, 1]`.
pub fn grid_nodes(samples: usize) -> Result<Vec<f64>, ConeError> {
    match samples {
        0 => Err(ConeError::EmptyGrid),
        1 => Ok(vec![0.5]),
        m => Ok((0..m).map(|i| i as f64 / (m - 1) as f64).collect()),
    }
}

/// Trapezoid quadrature weights matching [`grid_nodes`].
pub fn trapezoid_weights(samples: usize) -> Result<Vec<f64>, ConeError> {
    match samples {
        0 => Err(ConeError::EmptyGrid),
        1 => Ok(vec![1.0]),
        m => {
            let h = 1.0 / (m - 1) as f64;
            Ok((0..m).map(|i| if i == 0 || i == m - 1 { h / 2.0 } else { h }).collect())
        }
    }
}

/// Nonnegative functions on `[0, 1]` sampled at `samples` nodes, ordered
/// pointwise.
pub fn grid_function_cone(samples: usize) -> Result<Cone, ConeError> {
    let nodes = grid_nodes(samples)?;
    Ok(nonnegative_cone(samples).with_labels(nodes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ClosureCheck {
    Pass { checked: usize },
    Fail { x: ConeVector, y: ConeVector, image: ConeVector },
}

/// Samples pairs from the part of `u` and checks that `A(x, y)` stays in it.
pub fn closure_check(a: &Operator<Cone>, u: &ConeVector, samples: usize, seed: u64) -> Result<ClosureCheck, ConeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        ConeVector::from_coords(u.as_slice().iter().map(|v| v * 10f64.powf(rng.gen_range(-1.0..=1.0))).collect())
    };
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let image = a.apply(&x, &y);
        let inside = image.first_invalid().is_none() && !image.is_zero() && linked(u, &image)?.is_some();
        if !inside {
            return Ok(ClosureCheck::Fail { x, y, image });
        }
    }
    Ok(ClosureCheck::Pass { checked: samples })
}
