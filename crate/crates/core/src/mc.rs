//! Monte Carlo ground truth for the analytic machinery.
//!
//! Offspring counts are sampled from the arrival mechanism itself
//! (first wait exponential at rate λ, later waits at rate η), so the
//! empirical law is independent of the pmf/pgf code paths it validates.
//!
//! Randomness comes from a counter-mixing generator: each path derives
//! its own substream from (seed, path index), so results do not depend
//! on evaluation order and parallel or serial runs would agree.

use crate::branching::GenerationLaw;
use crate::error::{Error, Result};
use crate::offspring::JanardanParams;
use crate::subordinated::SubordinationParams;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_paths: u64,
    pub seed: u64,
    /// Per-generation population cap; supercritical trees grow
    /// geometrically and must fail loudly instead of exhausting memory.
    pub max_population: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            seed: 1,
            max_population: 10_000_000,
        }
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-path random stream (splitmix-style counter generator).
#[derive(Debug, Clone)]
pub struct PathRng {
    state: u64,
}

impl PathRng {
    /// Derive the substream for one path of one seeded run.
    pub fn from_seed_and_path(seed: u64, path: u64) -> Self {
        let mixed = mix64(seed ^ mix64(path.wrapping_mul(GOLDEN_GAMMA) ^ 0xD1B5_4A32_D192_ED03));
        Self { state: mixed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in (0, 1]; never 0, so logs are safe.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Exponential waiting time with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.uniform().ln() / rate
    }

    /// Poisson draw by inversion of exponential waits, chunked so the
    /// survival product never underflows (exact for any mean).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0);
        let mut total = 0u64;
        let mut remaining = mean;
        while remaining > 0.0 {
            let chunk = remaining.min(30.0);
            remaining -= chunk;
            let threshold = (-chunk).exp();
            let mut product = self.uniform();
            while product >= threshold {
                total += 1;
                product *= self.uniform();
            }
        }
        total
    }
}

/// One offspring count over [0, t]: first arrival after an Exp(λ) wait,
/// each later arrival after an Exp(η) wait.
pub fn sample_offspring(params: &JanardanParams, t: f64, rng: &mut PathRng) -> u64 {
    let mut clock = rng.exponential(params.lambda());
    if clock > t {
        return 0;
    }
    let mut count = 1u64;
    loop {
        clock += rng.exponential(params.eta());
        if clock > t {
            return count;
        }
        count += 1;
    }
}

fn advance_generation(
    law: &GenerationLaw,
    population: u64,
    generation: u32,
    cap: u64,
    rng: &mut PathRng,
) -> Result<u64> {
    let mut next = 0u64;
    for _ in 0..population {
        next += sample_offspring(law.offspring(), 1.0, rng);
        if next > cap {
            return Err(Error::PopulationCap {
                generation,
                population: next,
                cap,
            });
        }
    }
    Ok(next)
}

/// Final population of `n`-generation trees from a single ancestor,
/// one entry per path.
pub fn simulate_generations(law: &GenerationLaw, n: u32, config: &SimConfig) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(config.n_paths as usize);
    for path in 0..config.n_paths {
        let mut rng = PathRng::from_seed_and_path(config.seed, path);
        let mut population = 1u64;
        for generation in 1..=n {
            if population == 0 {
                break;
            }
            population =
                advance_generation(law, population, generation, config.max_population, &mut rng)?;
        }
        out.push(population);
    }
    Ok(out)
}

/// Sampled price ratios P(t) = X(t)/X₀ under the Poisson clock.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatedSample {
    pub ratios: Vec<f64>,
}

impl SubordinatedSample {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.ratios.iter().sum::<f64>() / self.ratios.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.ratios.iter().map(|r| (r - m) * (r - m)).sum();
        ss / (self.ratios.len() - 1) as f64
    }

    /// Fraction of paths extinct by the sampled time.
    pub fn zero_frequency(&self) -> f64 {
        self.ratios.iter().filter(|r| **r == 0.0).count() as f64 / self.ratios.len() as f64
    }

    /// Standard error of the sample mean.
    pub fn mean_standard_error(&self) -> f64 {
        (self.variance() / self.ratios.len() as f64).sqrt()
    }

    /// Asymptotic standard error of the sample variance,
    /// sqrt((m₄ - s⁴)/n) from the empirical fourth central moment.
    pub fn variance_standard_error(&self) -> f64 {
        let m = self.mean();
        let n = self.ratios.len() as f64;
        let s2 = self.variance();
        let m4: f64 = self
            .ratios
            .iter()
            .map(|r| {
                let d = r - m;
                d * d * d * d
            })
            .sum::<f64>()
            / n;
        ((m4 - s2 * s2).max(0.0) / n).sqrt()
    }

    /// Single-column CSV dump of the raw ratios.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ratio\n");
        for r in &self.ratios {
            out.push_str(&format!("{r}\n"));
        }
        out
    }
}

/// Simulate P(t): per path, draw N ~ Poisson(θt), run N + offset
/// generations from x₀ ancestors (x₀ taken literally when integral,
/// one ancestor otherwise), and return X/ancestors.
pub fn simulate_subordinated(
    law: &GenerationLaw,
    sub: &SubordinationParams,
    t: f64,
    config: &SimConfig,
) -> Result<SubordinatedSample> {
    let ancestors = if sub.x0() >= 1.0 && sub.x0().fract() == 0.0 {
        sub.x0() as u64
    } else {
        1
    };
    let clock_mean = sub.theta() * t;
    let mut ratios = Vec::with_capacity(config.n_paths as usize);
    for path in 0..config.n_paths {
        let mut rng = PathRng::from_seed_and_path(config.seed, path);
        let generations = rng.poisson(clock_mean) + sub.offset() as u64;
        let mut population = ancestors;
        for generation in 1..=generations {
            if population == 0 {
                break;
            }
            population = advance_generation(
                law,
                population,
                generation as u32,
                config.max_population,
                &mut rng,
            )?;
        }
        ratios.push(population as f64 / ancestors as f64);
    }
    Ok(SubordinatedSample { ratios })
}
