//! Monte Carlo volumes of Bell-diagonal regions in `(p1, p2, p3)` coordinates.
//!
//! Points are drawn uniformly from the unit cube; a point counts when it lies
//! in the probability simplex (`p1 + p2 + p3 ≤ 1`) and satisfies the region's
//! predicate. Samples are split into fixed batches, each driven by its own
//! ChaCha8 stream of the given seed, so the estimate depends only on
//! `(samples, seed)` and not on the number of worker threads.

use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{bell_exact_2ext, bell_paper_condition, BellDiagonalParams};
use crate::random::seeded;

/// Fewer samples than this give no meaningful estimate.
pub const MIN_SAMPLES: u64 = 10_000;
const BATCH: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// `max p_i ≤ 3/4`.
    Polytope,
    /// The exact 2-extendable set.
    Exact,
    /// The whole simplex.
    Simplex,
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polytope" => Ok(Region::Polytope),
            "exact" => Ok(Region::Exact),
            "simplex" => Ok(Region::Simplex),
            other => Err(Error::InvalidParameter(format!("unknown region {other:?}"))),
        }
    }
}

impl Region {
    pub fn contains(self, p1: f64, p2: f64, p3: f64) -> bool {
        let p4 = 1.0 - p1 - p2 - p3;
        if p4 < 0.0 {
            return false;
        }
        let params = BellDiagonalParams::new([p1, p2, p3, p4]).expect("inside the simplex");
        match self {
            Region::Polytope => bell_paper_condition(&params),
            Region::Exact => bell_exact_2ext(&params),
            Region::Simplex => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub volume: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

fn count_batch(region: Region, seed: u64, batch: u64, n: u64) -> u64 {
    let mut rng: ChaCha8Rng = seeded(seed);
    rng.set_stream(batch);
    (0..n)
        .filter(|_| {
            let (a, b, c): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            region.contains(a, b, c)
        })
        .count() as u64
}

/// Hit-or-miss estimate of the region's volume with its standard error.
pub fn estimate_volume(region: Region, samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let batches = samples.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH.min(samples - b * BATCH);
            count_batch(region, seed, b, n)
        })
        .sum();
    let f = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        volume: f,
        stderr: (f * (1.0 - f) / samples as f64).sqrt(),
        samples,
        seed,
    })
}

/// `1/6 − 4 (1/4)³ / 6`: the simplex minus the four corners `p_i > 3/4`.
pub fn polytope_volume_exact() -> f64 {
    1.0 / 6.0 - 4.0 * 0.25f64.powi(3) / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_polytope_volume() {
        assert_eq!(polytope_volume_exact(), 0.15625);
    }

    #[test]
    fn membership() {
        assert!(Region::Polytope.contains(0.25, 0.25, 0.25));
        assert!(!Region::Polytope.contains(0.8, 0.1, 0.05));
        assert!(!Region::Exact.contains(0.8, 0.1, 0.05));
        assert!(!Region::Simplex.contains(0.5, 0.5, 0.5));
        // p4 > 3/4 is cut as well
        assert!(!Region::Polytope.contains(0.05, 0.05, 0.05));
    }

    #[test]
    fn estimates_are_deterministic_and_sane() {
        let a = estimate_volume(Region::Simplex, 200_000, 7).unwrap();
        let b = estimate_volume(Region::Simplex, 200_000, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.volume - 1.0 / 6.0).abs() < 4.0 * a.stderr);
        let c = estimate_volume(Region::Simplex, 200_000, 8).unwrap();
        assert_ne!(a.volume, c.volume);
        assert!(estimate_volume(Region::Polytope, 10, 1).is_err());
    }

    #[test]
    fn region_parses() {
        assert_eq!("exact".parse::<Region>().unwrap(), Region::Exact);
        assert!("cube".parse::<Region>().is_err());
    }
}
