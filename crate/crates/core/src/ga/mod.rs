//! Genetic algorithm over mixed integer/float/categorical genomes.
//!
//! Each generation is evaluated, the best `elite_fraction` is copied
//! unchanged and the rest is refilled with `mutate(crossover(a, b))` for two
//! uniformly drawn parents. All randomness for slot `k` of generation `g`
//! comes from the stream `(seed, g, k)`, so results do not depend on how
//! fitness evaluations are scheduled.

mod genome;
mod run;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

pub use genome::{GeneKind, GeneSpec, GeneValue, GenomeSchema, Individual};
pub use run::{evolve, load_checkpoint, FitnessTask, GaCheckpoint, GaRun, GaRunResult};

/// Population/generation pairs used by the default experiment grid.
pub const DEFAULT_PRESETS: [(usize, usize); 3] = [(100, 200), (200, 500), (500, 1000)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_probability: f64,
    pub elite_fraction: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 200,
            mutation_probability: 0.1,
            elite_fraction: 0.1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population size must be at least 2"));
        }
        if self.generations == 0 {
            return Err(Error::invalid("generations must be positive"));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(Error::invalid(format!(
                "mutation probability {} outside [0, 1]",
                self.mutation_probability
            )));
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "elite fraction {} outside (0, 1)",
                self.elite_fraction
            )));
        }
        Ok(())
    }

    /// Individuals copied unchanged into the next generation (at least one).
    pub fn elite_count(&self) -> usize {
        ((self.population_size as f64 * self.elite_fraction).round() as usize)
            .clamp(1, self.population_size)
    }
}

/// Random stream of slot `slot` in generation `generation`.
pub fn slot_stream(seed: u64, generation: usize, slot: usize) -> StreamRng {
    rng::stream(seed, &[generation as u64, slot as u64])
}

pub fn init_population(schema: &GenomeSchema, config: &GaConfig) -> Result<Vec<Individual>> {
    schema.validate()?;
    config.validate()?;
    Ok((0..config.population_size)
        .map(|slot| {
            let mut rng = slot_stream(config.seed, 0, slot);
            Individual::new(schema.genes.iter().map(|g| g.sample(&mut rng)).collect())
        })
        .collect())
}

/// Uniform crossover: each gene comes from either parent with probability 1/2.
pub fn crossover<R: Rng>(
    schema: &GenomeSchema,
    a: &Individual,
    b: &Individual,
    rng: &mut R,
) -> Result<Individual> {
    if !schema.admits(&a.genes) || !schema.admits(&b.genes) {
        return Err(Error::invalid("crossover parents do not match the schema"));
    }
    let genes = a
        .genes
        .iter()
        .zip(&b.genes)
        .map(|(x, y)| if rng.random_bool(0.5) { x.clone() } else { y.clone() })
        .collect();
    Ok(Individual::new(genes))
}

/// With probability `probability`, one uniformly chosen gene is perturbed.
pub fn mutate<R: Rng>(
    individual: &Individual,
    schema: &GenomeSchema,
    probability: f64,
    rng: &mut R,
) -> Individual {
    let mut out = individual.clone();
    if probability > 0.0 && rng.random_bool(probability.min(1.0)) {
        let i = rng.random_range(0..schema.len());
        out.genes[i] = schema.genes[i].perturb(&out.genes[i], rng);
        out.fitness = None;
    }
    out
}

/// Serializes fitness values, writing non-finite ones as `"inf"`.
pub(crate) mod fitness_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match value {
            None => s.serialize_none(),
            Some(v) if v.is_finite() => s.serialize_some(v),
            Some(_) => s.serialize_some("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Repr>::deserialize(d)? {
            None => None,
            Some(Repr::Number(v)) => Some(v),
            Some(Repr::Text(_)) => Some(f64::INFINITY),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> GenomeSchema {
        GenomeSchema::new(vec![
            GeneSpec::int("estimators", 5, 200),
            GeneSpec::float("c", 1.0, 3000.0),
            GeneSpec::choice("kernel", &["poly", "sigmoid", "rbf"]),
        ])
        .unwrap()
    }

    #[test]
    fn schema_validation() {
        assert!(GenomeSchema::new(vec![GeneSpec::int("a", 3, 3)]).is_err());
        assert!(GenomeSchema::new(vec![GeneSpec::choice("k", &["a", "a"])]).is_err());
        assert!(GenomeSchema::new(vec![GeneSpec::int("a", 0, 1), GeneSpec::int("a", 0, 1)]).is_err());
    }

    #[test]
    fn population_is_seeded_and_in_bounds() {
        let s = schema();
        let cfg = GaConfig { seed: 3, ..Default::default() };
        let a = init_population(&s, &cfg).unwrap();
        assert_eq!(a.len(), 100);
        assert!(a.iter().all(|i| s.admits(&i.genes)));
        assert_eq!(a, init_population(&s, &cfg).unwrap());
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let s = schema();
        let p = init_population(&s, &GaConfig::default()).unwrap();
        let child = crossover(&s, &p[0], &p[0], &mut slot_stream(1, 1, 1)).unwrap();
        assert_eq!(child.genes, p[0].genes);
        let bad = Individual::new(vec![GeneValue::Int(1)]);
        assert!(crossover(&s, &p[0], &bad, &mut slot_stream(1, 1, 1)).is_err());
    }

    #[test]
    fn mutation_bounds() {
        let s = GenomeSchema::new(vec![GeneSpec::int("n", 5, 200)]).unwrap();
        let mut rng = slot_stream(0, 0, 0);
        for _ in 0..1000 {
            let m = mutate(&Individual::new(vec![GeneValue::Int(100)]), &s, 1.0, &mut rng);
            let v = m.genes[0].as_int().unwrap();
            assert!((50..=120).contains(&v), "{v}");
            let top = mutate(&Individual::new(vec![GeneValue::Int(200)]), &s, 1.0, &mut rng);
            assert!(top.genes[0].as_int().unwrap() <= 200);
        }
        let same = Individual::new(vec![GeneValue::Int(77)]);
        assert_eq!(mutate(&same, &s, 0.0, &mut rng), same);
    }

    #[test]
    fn elite_count_is_at_least_one() {
        let cfg = GaConfig { population_size: 4, elite_fraction: 0.01, ..Default::default() };
        assert_eq!(cfg.elite_count(), 1);
        assert_eq!(GaConfig::default().elite_count(), 10);
    }

    #[test]
    fn infinite_fitness_survives_json() {
        let mut ind = Individual::new(vec![GeneValue::Float(0.5)]);
        ind.fitness = Some(f64::INFINITY);
        let text = serde_json::to_string(&ind).unwrap();
        let back: Individual = serde_json::from_str(&text).unwrap();
        assert_eq!(back.fitness, Some(f64::INFINITY));
    }
}
