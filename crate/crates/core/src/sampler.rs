//! Exact photon-number sampling by the chain rule over modes, and exact
//! marginal / joint distributions over small mode subsets.
//!
//! Mode `k` is drawn from `Pr(n_1..n_{k-1}, j) / Pr(n_1..n_{k-1})`, evaluated
//! on the state reduced to its first `k` modes. Conditionals are truncated at
//! the cutoff and renormalized; the mass lost to truncation is tracked and
//! reported with the samples.

use std::sync::Arc;

use dashmap::DashMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{check_mode_set, GaussianState};
use crate::lhaf::{PreparedState, MAX_TOTAL_PHOTONS};

/// Conditional normalizers below this signal a cutoff that is too small.
pub const MIN_NORMALIZER: f64 = 1e-12;
/// Largest joint table [`joint_probability_table`] will build.
pub const MAX_TABLE_ENTRIES: u128 = 1_000_000;

pub type PhotonPattern = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Largest count drawn for any single mode.
    pub cutoff: usize,
    pub seed: u64,
    /// Cap on the total count of a sample (at most 40).
    pub max_total_photons: usize,
    pub num_samples: usize,
    /// Draw samples on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            cutoff: 10,
            seed: 0,
            max_total_photons: MAX_TOTAL_PHOTONS,
            num_samples: 10_000,
            parallel: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 1 {
            return Err(Error::Config("cutoff must be at least 1".into()));
        }
        if self.num_samples < 1 {
            return Err(Error::Config("num_samples must be at least 1".into()));
        }
        if self.max_total_photons > MAX_TOTAL_PHOTONS {
            return Err(Error::Config(format!(
                "max_total_photons must be at most {MAX_TOTAL_PHOTONS}"
            )));
        }
        Ok(())
    }
}

/// Samples together with truncation diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRun {
    pub samples: Vec<PhotonPattern>,
    /// Largest conditional mass dropped by the cutoff along any sampled path.
    pub max_truncated_mass: f64,
    /// Average over samples of the total conditional mass dropped per path.
    pub mean_truncated_mass: f64,
}

struct Conditional {
    /// Exact joint probabilities `Pr(prefix, j)`, `j = 0..len`.
    joint: Vec<f64>,
    /// Cumulative normalized distribution over the truncated support.
    cumulative: Vec<f64>,
    truncated: f64,
}

/// Chain-rule sampler for one state. The per-prefix kernels are prepared
/// once; conditionals are memoized by prefix and shared between threads.
pub struct ChainSampler {
    kernels: Vec<PreparedState>,
    cutoff: usize,
    max_total: usize,
    memo: DashMap<Vec<usize>, Arc<Conditional>>,
}

impl ChainSampler {
    pub fn new(state: &GaussianState, cutoff: usize, max_total: usize) -> Result<Self> {
        let m = state.num_modes();
        let kernels = (1..=m)
            .map(|k| {
                let modes: Vec<usize> = (0..k).collect();
                PreparedState::new(&state.reduce(&modes)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainSampler {
            kernels,
            cutoff,
            max_total,
            memo: DashMap::new(),
        })
    }

    fn conditional(&self, prefix: &[usize], prefix_prob: f64) -> Result<Arc<Conditional>> {
        if let Some(c) = self.memo.get(prefix) {
            return Ok(c.clone());
        }
        let kernel = &self.kernels[prefix.len()];
        let used: usize = prefix.iter().sum();
        let top = self.cutoff.min(self.max_total.saturating_sub(used));
        let mut pattern = prefix.to_vec();
        pattern.push(0);
        let mut joint = Vec::with_capacity(top + 1);
        for j in 0..=top {
            *pattern.last_mut().unwrap() = j;
            joint.push(kernel.probability(&pattern)?.max(0.0));
        }
        let kept: f64 = joint.iter().sum();
        let normalizer = kept / prefix_prob;
        if !(normalizer >= MIN_NORMALIZER) {
            return Err(Error::CutoffTooSmall {
                prefix: prefix.to_vec(),
                normalizer,
            });
        }
        let mut acc = 0.0;
        let cumulative = joint
            .iter()
            .map(|p| {
                acc += p / kept;
                acc
            })
            .collect();
        let cond = Arc::new(Conditional {
            joint,
            cumulative,
            truncated: (1.0 - normalizer).max(0.0),
        });
        self.memo.insert(prefix.to_vec(), cond.clone());
        Ok(cond)
    }

    /// Draws one pattern; returns it with the truncated mass along the path
    /// (sum and maximum over modes).
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Result<(PhotonPattern, f64, f64)> {
        let m = self.kernels.len();
        let mut pattern = Vec::with_capacity(m);
        let mut prob = 1.0;
        let (mut lost, mut worst) = (0.0, 0.0_f64);
        for _ in 0..m {
            let cond = self.conditional(&pattern, prob)?;
            let u: f64 = rng.random();
            let j = cond
                .cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or_else(|| last_supported(&cond.joint));
            prob = cond.joint[j];
            lost += cond.truncated;
            worst = worst.max(cond.truncated);
            pattern.push(j);
        }
        Ok((pattern, lost, worst))
    }

    /// Product of the sampler's conditionals along `pattern`; equals
    /// `Pr(pattern)` up to rounding when no truncation occurs.
    pub fn path_probability(&self, pattern: &[usize]) -> Result<f64> {
        let mut prob = 1.0;
        let mut chain = 1.0;
        for k in 0..pattern.len() {
            let cond = self.conditional(&pattern[..k], prob)?;
            let next = cond.joint.get(pattern[k]).copied().unwrap_or(0.0);
            chain *= next / prob;
            prob = next;
        }
        Ok(chain)
    }
}

fn last_supported(joint: &[f64]) -> usize {
    joint.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Per-sample generator: stream `index` of a ChaCha8 keyed by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `cfg.num_samples` patterns from `state`.
pub fn sample(state: &GaussianState, cfg: &SamplerConfig) -> Result<SampleRun> {
    cfg.validate()?;
    let sampler = ChainSampler::new(state, cfg.cutoff, cfg.max_total_photons)?;
    let draw = |i: usize| sampler.draw(&mut sample_rng(cfg.seed, i as u64));
    let draws: Vec<_> = if cfg.parallel {
        (0..cfg.num_samples).into_par_iter().map(draw).collect::<Result<_>>()?
    } else {
        (0..cfg.num_samples).map(draw).collect::<Result<_>>()?
    };
    let n = draws.len() as f64;
    let mean_truncated_mass = draws.iter().map(|d| d.1).sum::<f64>() / n;
    let max_truncated_mass = draws.iter().map(|d| d.2).fold(0.0, f64::max);
    Ok(SampleRun {
        samples: draws.into_iter().map(|d| d.0).collect(),
        max_truncated_mass,
        mean_truncated_mass,
    })
}

/// Exact probabilities over `(cutoff + 1)^k` patterns of `k` modes, stored
/// row-major (last mode fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    /// Mode indices (0-based) of the original state.
    pub modes: Vec<usize>,
    pub cutoff: usize,
    pub probabilities: Vec<f64>,
}

impl Distribution {
    fn offset(&self, counts: &[usize]) -> Option<usize> {
        if counts.len() != self.modes.len() || counts.iter().any(|&c| c > self.cutoff) {
            return None;
        }
        Some(counts.iter().fold(0, |acc, &c| acc * (self.cutoff + 1) + c))
    }

    fn counts_at(&self, mut offset: usize) -> PhotonPattern {
        let base = self.cutoff + 1;
        let mut counts = vec![0; self.modes.len()];
        for slot in counts.iter_mut().rev() {
            *slot = offset % base;
            offset /= base;
        }
        counts
    }

    /// Probability of a pattern inside the table, zero outside it.
    pub fn probability(&self, counts: &[usize]) -> f64 {
        self.offset(counts).map_or(0.0, |o| self.probabilities[o])
    }

    /// Total probability captured by the table.
    pub fn coverage(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhotonPattern, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(o, &p)| (self.counts_at(o), p))
    }

    /// Probability mass of the patterns satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&[usize]) -> bool) -> f64 {
        self.iter().filter(|(c, _)| pred(c)).map(|(_, p)| p).sum()
    }

    /// Mean count of each mode within the table.
    pub fn means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.modes.len()];
        for (counts, p) in self.iter() {
            for (m, c) in means.iter_mut().zip(&counts) {
                *m += *c as f64 * p;
            }
        }
        means
    }
}

/// Exact joint distribution of `modes` truncated at `cutoff`.
pub fn joint_probability_table(
    state: &GaussianState,
    modes: &[usize],
    cutoff: usize,
) -> Result<Distribution> {
    if cutoff < 1 {
        return Err(Error::Config("cutoff must be at least 1".into()));
    }
    check_mode_set(modes, state.num_modes())?;
    let entries = (cutoff as u128 + 1).checked_pow(modes.len() as u32).unwrap_or(u128::MAX);
    if entries > MAX_TABLE_ENTRIES {
        return Err(Error::TableTooLarge {
            entries,
            limit: MAX_TABLE_ENTRIES,
        });
    }
    if cutoff * modes.len() > MAX_TOTAL_PHOTONS {
        return Err(Error::PatternTooLarge {
            total: cutoff * modes.len(),
            max: MAX_TOTAL_PHOTONS,
        });
    }
    let kernel = PreparedState::new(&state.reduce(modes)?)?;
    let mut dist = Distribution {
        modes: modes.to_vec(),
        cutoff,
        probabilities: vec![0.0; entries as usize],
    };
    let probabilities = (0..entries as usize)
        .into_par_iter()
        .map(|o| kernel.probability(&dist.counts_at(o)))
        .collect::<Result<Vec<_>>>()?;
    dist.probabilities = probabilities;
    Ok(dist)
}

/// Exact single-mode distributions `Pr(n)`, `n = 0..=cutoff`, of every mode.
pub fn single_mode_marginals(state: &GaussianState, cutoff: usize) -> Result<Vec<Distribution>> {
    (0..state.num_modes())
        .map(|k| joint_probability_table(state, &[k], cutoff))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{displaced_squeezed, two_mode_squeezed_vacuum};
    use crate::lhaf::pattern_probability;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C64;

    fn cfg(num_samples: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            cutoff: 8,
            seed,
            num_samples,
            ..Default::default()
        }
    }

    #[test]
    fn vacuum_samples_are_zero() {
        let v = GaussianState::vacuum(3).unwrap();
        let run = sample(&v, &cfg(50, 1)).unwrap();
        assert!(run.samples.iter().all(|s| s == &vec![0, 0, 0]));
        assert_eq!(run.max_truncated_mass, 0.0);
    }

    #[test]
    fn two_mode_squeezed_counts_agree() {
        let s = two_mode_squeezed_vacuum(0.6).unwrap();
        let run = sample(&s, &cfg(500, 7)).unwrap();
        assert!(run.samples.iter().all(|p| p[0] == p[1]));
        assert!(run.samples.iter().any(|p| p[0] > 0));
    }

    #[test]
    fn seeds_are_deterministic_and_parallel_agrees() {
        let s = displaced_squeezed(&[0.3, 0.2], &[C64::new(0.5, 0.2), C64::new(-0.3, 0.0)]).unwrap();
        let serial = SamplerConfig { parallel: false, ..cfg(300, 42) };
        let a = sample(&s, &serial).unwrap();
        let b = sample(&s, &serial).unwrap();
        let c = sample(&s, &cfg(300, 42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, c.samples);
        let d = sample(&s, &cfg(300, 43)).unwrap();
        assert_ne!(a.samples, d.samples);
    }

    #[test]
    fn chain_rule_is_exact() {
        let s = displaced_squeezed(&[0.4, -0.2, 0.3], &[C64::new(0.3, 0.1), C64::new(0.0, 0.4), C64::new(-0.5, 0.0)])
            .unwrap();
        let sampler = ChainSampler::new(&s, 12, MAX_TOTAL_PHOTONS).unwrap();
        for pat in [[0, 0, 0], [1, 2, 0], [2, 0, 3], [1, 1, 1]] {
            let chain = sampler.path_probability(&pat).unwrap();
            let direct = pattern_probability(&s, &pat).unwrap();
            assert!((chain - direct).abs() < 1e-9, "{pat:?}");
        }
    }

    #[test]
    fn tiny_cutoff_is_reported() {
        let s = GaussianState::coherent(&[C64::new(6.0, 0.0)]).unwrap();
        let err = sample(&s, &SamplerConfig { cutoff: 1, ..cfg(5, 0) }).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { ref prefix, .. } if prefix.is_empty()));
    }

    #[test]
    fn truncation_is_surfaced() {
        let s = GaussianState::coherent(&[C64::new(1.5, 0.0)]).unwrap();
        let run = sample(&s, &SamplerConfig { cutoff: 3, ..cfg(20, 0) }).unwrap();
        assert!(run.max_truncated_mass > 0.05);
        assert!(run.samples.iter().all(|p| p[0] <= 3));
    }

    #[test]
    fn config_validation() {
        let v = GaussianState::vacuum(1).unwrap();
        assert!(sample(&v, &SamplerConfig { cutoff: 0, ..Default::default() }).is_err());
        assert!(sample(&v, &SamplerConfig { num_samples: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn marginals_of_vacuum_and_coherent() {
        let v = GaussianState::vacuum(2).unwrap();
        for d in single_mode_marginals(&v, 4).unwrap() {
            assert_eq!(d.probability(&[0]), 1.0);
            assert_eq!(d.coverage(), 1.0);
        }
        let s = GaussianState::coherent(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let m = single_mode_marginals(&s, 10).unwrap();
        assert_eq!(m[1].probability(&[0]), 1.0);
        let mut fact = 1.0;
        for n in 0..=10 {
            if n > 0 {
                fact *= n as f64;
            }
            assert_abs_diff_eq!(m[0].probability(&[n]), (-1.0f64).exp() / fact, epsilon = 1e-14);
        }
    }

    #[test]
    fn joint_table_properties() {
        let v = GaussianState::vacuum(3).unwrap();
        let t = joint_probability_table(&v, &[2, 0], 3).unwrap();
        assert_eq!(t.probability(&[0, 0]), 1.0);
        assert_abs_diff_eq!(t.coverage(), 1.0, epsilon = 1e-15);

        let s = two_mode_squeezed_vacuum(0.5).unwrap();
        let t = joint_probability_table(&s, &[0, 1], 6).unwrap();
        for (c, p) in t.iter() {
            if c[0] != c[1] {
                assert!(p.abs() < 1e-14);
            }
        }

        let s = displaced_squeezed(&[0.3, 0.5], &[C64::new(0.7, 0.0), C64::new(0.2, 0.6)]).unwrap();
        let t = joint_probability_table(&s, &[0, 1], 10).unwrap();
        let co = t.mass_where(|c| c[0] >= 1 && c[1] >= 1);
        let m = single_mode_marginals(&s, 10).unwrap();
        let ie = 1.0 - m[0].probability(&[0]) - m[1].probability(&[0]) + t.probability(&[0, 0]);
        // table truncation only touches the n >= 1 region; bound it by coverage
        assert!((co - ie).abs() < 1.0 - t.coverage() + 1e-12);
    }

    #[test]
    fn table_limits() {
        let v = GaussianState::vacuum(7).unwrap();
        assert!(matches!(
            joint_probability_table(&v, &[0, 1, 2, 3, 4, 5, 6], 9),
            Err(Error::TableTooLarge { .. })
        ));
        assert!(matches!(
            joint_probability_table(&v, &[0, 0], 2),
            Err(Error::DuplicateMode { .. })
        ));
    }
}
