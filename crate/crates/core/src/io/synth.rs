//! Seeded standard Gaussian problems.
//!
//! Generator: xoshiro256++ seeded through SplitMix64 from the 64-bit seed.
//! Uniforms are `((u >> 11) + 1) * 2^-53`, in `(0, 1]`, and Gaussians come in
//! Box-Muller pairs `sqrt(-2 ln u1) (cos 2 pi u2, sin 2 pi u2)` evaluated with
//! the portable `libm` routines. `X` is filled column by column, then `y`.
//! The same seed gives the same bytes on every platform.

use std::f64::consts::PI;

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{dot, DesignMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

struct Gaussian {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Gaussian {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = libm::sqrt(-2.0 * libm::log(self.uniform()));
        let theta = 2.0 * PI * self.uniform();
        self.spare = Some(radius * libm::sin(theta));
        radius * libm::cos(theta)
    }
}

/// Draws `X` (`n x p`) and `y` (`n`) with i.i.d. standard normal entries.
pub fn synth(spec: &SyntheticSpec) -> Result<(DesignMatrix, Vec<f64>)> {
    let SyntheticSpec { n, p, seed } = *spec;
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument(format!(
            "synthetic problems need n, p >= 1, got {n} x {p}"
        )));
    }
    super::check_dense_size(n, p)?;
    let mut g = Gaussian::new(seed);
    let mut values = vec![0.0; n * p];
    for (j, col) in values.chunks_exact_mut(n).enumerate() {
        loop {
            col.iter_mut().for_each(|v| *v = g.next());
            if dot(col, col) > 0.0 {
                break;
            }
            log::info!("synthetic column {j} came out zero; redrawing it");
        }
    }
    let y = (0..n).map(|_| g.next()).collect();
    Ok((DesignMatrix::from_column_major(n, p, values)?, y))
}
