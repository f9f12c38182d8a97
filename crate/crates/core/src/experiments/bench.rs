//! Wall-time measurements of a single prox evaluation.

use std::time::Instant;

use ndarray::Array1;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prox::{prox_gamma, FixedPointSettings, ProxProblem};
use crate::sets::{ConstraintSet, SimpleSet};

use super::data::cell_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxStructure {
    /// Chain with an ℓ1 ball of radius 1 on the differences.
    Grid1d,
    /// Square grid, `n` must be a perfect square.
    Grid2d,
    /// Binary heap tree with the orthant.
    Tree,
}

impl ProxStructure {
    pub fn constraint(self, n: usize) -> Result<ConstraintSet> {
        if n < 2 {
            return Err(Error::InvalidDimension(format!("need n >= 2, got {n}")));
        }
        let ball = SimpleSet::L1Ball { radius: 1.0 };
        match self {
            ProxStructure::Grid1d => ConstraintSet::grid_1d(n, ball),
            ProxStructure::Grid2d => {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(Error::InvalidDimension(format!("2D grid needs a square n, got {n}")));
                }
                ConstraintSet::grid_2d(side, side, ball)
            }
            ProxStructure::Tree => {
                let parents: Vec<Option<usize>> = (0..n).map(|i| (i > 0).then(|| (i - 1) / 2)).collect();
                ConstraintSet::tree(&parents, SimpleSet::NonnegativeOrthant)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxBenchReport {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub n: usize,
    pub structure: ProxStructure,
    pub repetitions: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub mean_iterations: f64,
    pub samples_ms: Vec<f64>,
}

/// Times `repetitions` prox evaluations on fresh random inputs
/// (`α ~ N(0, 1)`, `μ ~ 1 + N(0, 1)/2`, `ρ = 1`). Inputs are drawn outside
/// the timed region.
pub fn bench_prox(
    n: usize,
    structure: ProxStructure,
    repetitions: usize,
    seed: u64,
    settings: &FixedPointSettings,
) -> Result<ProxBenchReport> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter("repetitions must be positive".into()));
    }
    settings.validate()?;
    let set = structure.constraint(n)?;
    // warms the cached norm estimate so it is not timed
    set.composite_norm_sq();
    let mut rng = cell_rng(seed, &[n as u64]);
    let mut samples = Vec::with_capacity(repetitions);
    let mut iterations = 0usize;
    for _ in 0..repetitions {
        let alpha = Array1::from_shape_simple_fn(n, || StandardNormal.sample(&mut rng));
        let mu = Array1::from_shape_simple_fn(n, || 1.0 + 0.5 * rng.sample::<f64, _>(StandardNormal));
        let pb = ProxProblem::new(alpha, mu, 1.0, &set)?;
        let start = Instant::now();
        let out = prox_gamma(&pb, settings, None)?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        iterations += out.state.iterations;
    }
    let k = repetitions as f64;
    let mean = samples.iter().sum::<f64>() / k;
    let var = if repetitions > 1 { samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    Ok(ProxBenchReport {
        schema_version: crate::SCHEMA_VERSION,
        n,
        structure,
        repetitions,
        mean_ms: mean,
        stddev_ms: var.sqrt(),
        mean_iterations: iterations as f64 / k,
        samples_ms: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_shape() {
        let report = bench_prox(100, ProxStructure::Grid1d, 10, 1, &FixedPointSettings::default()).unwrap();
        assert_eq!(report.samples_ms.len(), 10);
        assert!(report.mean_ms > 0.0 && report.mean_iterations >= 1.0);
        assert!(bench_prox(10, ProxStructure::Grid2d, 1, 1, &FixedPointSettings::default()).is_err());
        assert!(bench_prox(1, ProxStructure::Tree, 1, 1, &FixedPointSettings::default()).is_err());
        assert!(bench_prox(16, ProxStructure::Tree, 0, 1, &FixedPointSettings::default()).is_err());
    }
}
