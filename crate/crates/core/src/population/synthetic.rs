use rand::Rng;
use rand_distr::StandardNormal;

use super::{RegionRecord, RegionTable};
use crate::decimal::Decimal;
use crate::rng;
use crate::{Error, Result};

/// Parameters of the synthetic region generator.
///
/// Regions are split into contiguous municipality blocks. Each municipality
/// draws a latent predictor level; its regions scatter around it. Outcomes
/// follow a line in the predictor with Gaussian noise whose scale grows
/// linearly with the distance from `heteroscedastic_center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataParams {
    pub n_regions: usize,
    pub n_municipalities: usize,
    pub slope: f64,
    pub intercept: f64,
    pub noise_scale: f64,
    pub heteroscedastic_center: f64,
    /// Noise multiplier is `1 + gain * |predictor - center|`.
    pub heteroscedastic_gain: f64,
    pub predictor_lo: f64,
    pub predictor_hi: f64,
    /// Half-width of the uniform scatter of regions around their municipality level.
    pub municipality_spread: f64,
    pub population_min: u64,
    pub population_max: u64,
    pub seed: u64,
}

impl Default for SyntheticDataParams {
    fn default() -> Self {
        SyntheticDataParams {
            n_regions: 3363,
            n_municipalities: 290,
            slope: 0.6,
            intercept: 0.32,
            noise_scale: 0.03,
            heteroscedastic_center: 0.65,
            heteroscedastic_gain: 4.0,
            predictor_lo: 0.35,
            predictor_hi: 0.97,
            municipality_spread: 0.12,
            population_min: 800,
            population_max: 12_000,
            seed: 0,
        }
    }
}

impl SyntheticDataParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_regions == 0 || self.n_municipalities == 0 {
            return Err(Error::param("n_regions and n_municipalities must be positive"));
        }
        if self.n_municipalities > self.n_regions {
            return Err(Error::param("n_municipalities cannot exceed n_regions"));
        }
        let finite = [
            self.slope,
            self.intercept,
            self.noise_scale,
            self.heteroscedastic_center,
            self.heteroscedastic_gain,
            self.municipality_spread,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("synthetic parameters must be finite"));
        }
        if self.noise_scale < 0.0 || self.heteroscedastic_gain < 0.0 || self.municipality_spread < 0.0 {
            return Err(Error::param("noise_scale, heteroscedastic_gain and municipality_spread must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.predictor_lo)
            || !(0.0..=1.0).contains(&self.predictor_hi)
            || self.predictor_lo > self.predictor_hi
        {
            return Err(Error::param("predictor interval must be a sub-interval of [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.heteroscedastic_center) {
            return Err(Error::param("heteroscedastic_center must lie in [0, 1]"));
        }
        if self.population_min == 0 || self.population_min > self.population_max {
            return Err(Error::param("population bounds must satisfy 0 < min <= max"));
        }
        Ok(())
    }
}

pub fn synthesize_regions(params: &SyntheticDataParams) -> Result<RegionTable> {
    params.validate()?;
    let mut rng = rng::seeded(params.seed);
    let (lo, hi) = (params.predictor_lo, params.predictor_hi);

    let levels: Vec<f64> = (0..params.n_municipalities).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    let (ln_min, ln_max) = ((params.population_min as f64).ln(), (params.population_max as f64).ln());

    let mut records = Vec::with_capacity(params.n_regions);
    for r in 0..params.n_regions {
        let muni = r * params.n_municipalities / params.n_regions;
        let jitter = params.municipality_spread * (2.0 * rng.random::<f64>() - 1.0);
        // Predictor percentages carry one decimal, like published statistics.
        let permille = ((levels[muni] + jitter).clamp(lo, hi) * 1000.0).round() as u64;
        let predictor = Decimal::parse(&permille.to_string())
            .and_then(|d| d.shift(-3))
            .map(Decimal::to_f64)
            .expect("small integer");

        let population = (ln_min + (ln_max - ln_min) * rng.random::<f64>()).exp().round() as u64;
        let z: f64 = rng.sample(StandardNormal);
        let spread = 1.0 + params.heteroscedastic_gain * (predictor - params.heteroscedastic_center).abs();
        let outcome = params.intercept + params.slope * predictor + params.noise_scale * z * spread;

        records.push(RegionRecord {
            region_id: format!("R{r:05}"),
            municipality_id: format!("M{muni:04}"),
            population: population.clamp(params.population_min, params.population_max),
            predictor_rate: predictor,
            outcome_rate: Some(outcome.clamp(0.0, 1.0)),
        });
    }
    RegionTable::new(records)
}
