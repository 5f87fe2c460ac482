use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};

/// Exact-norm noise: `f^δ = f† + δ·g/‖g‖` with `g` standard normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub delta: f64,
    pub seed: u64,
}

pub fn inject_noise(f_true: &[f64], model: &NoiseModel) -> Result<Vector> {
    if !(model.delta >= 0.0 && model.delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "δ must be finite and nonnegative, got {}",
            model.delta
        )));
    }
    let out = Vector::try_from(f_true)?;
    if model.delta == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let g = loop {
        let g: Vec<f64> = (0..f_true.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        if linalg::norm(&g) > 0.0 {
            break g;
        }
    };
    let scale = model.delta / linalg::norm(&g);
    let mut out = out;
    linalg::axpy(scale, &g, &mut out);
    Ok(out)
}
