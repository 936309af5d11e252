//! Seeded rejection sampler over admissible parameter sets.
//!
//! Ranges bracket the worked example. Every draw is re-checked with
//! [`validate`](crate::params::validate), so the sampler only ever emits
//! parameters that pass it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::params::{validate, Admissible, ModelParams};

pub const MAX_ATTEMPTS: usize = 10_000;

pub struct ParamSampler {
    rng: ChaCha8Rng,
}

impl ParamSampler {
    pub fn new(seed: u64) -> Self {
        ParamSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Draws one admissible parameter set with `A = 0` and `N = 1`.
    pub fn sample(&mut self) -> Result<Admissible> {
        for _ in 0..MAX_ATTEMPTS {
            if let Some(p) = self.propose() {
                if validate(&p)?.overall {
                    return Admissible::new(p);
                }
            }
        }
        Err(Error::SamplerExhausted(MAX_ATTEMPTS))
    }

    pub fn sample_many(&mut self, count: usize) -> Result<Vec<Admissible>> {
        (0..count).map(|_| self.sample()).collect()
    }

    fn propose(&mut self) -> Option<ModelParams> {
        let rng = &mut self.rng;
        let i_hs = rng.gen_range(0.5..=2.0);
        let i_ls = open(rng, 0.0, i_hs)?;
        let beta = rng.gen_range(0.05..=0.95);
        let m = rng.gen_range(0.01..=0.9);
        let c_a = rng.gen_range(0.0..=0.5);
        let gap = i_hs - i_ls;
        let c_hs = rng.gen_range(gap..=3.0 * gap);
        let i_e = open(rng, 0.0, beta / ((1.0 + m) * (1.0 - beta)) * gap)?;
        let i_na = open(rng, 0.0, 0.8 * i_ls)?;
        let i_a = open(rng, i_na, i_ls - m * c_a)?;
        Some(ModelParams {
            i_hs,
            i_ls,
            i_a,
            i_na,
            i_e,
            c_hs,
            c_a,
            beta,
            m,
            n: 1.0,
            allowance: 0.0,
        })
    }
}

/// Uniform draw from the open interval `(lo, hi)`; `None` when it is empty.
fn open<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Option<f64> {
    if !(hi > lo) {
        return None;
    }
    let x = rng.gen_range(lo..hi);
    (x > lo).then_some(x)
}
