use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{crossover, init_population, mutate, slot_stream, GaConfig, GeneValue, GenomeSchema, Individual};
use crate::error::{Error, Result};

/// Fitness of a genome (lower is better). Errors become `+inf`.
pub trait FitnessTask: Sync {
    fn evaluate(&self, genes: &[GeneValue]) -> Result<f64>;
}

impl<F> FitnessTask for F
where
    F: Fn(&[GeneValue]) -> Result<f64> + Sync,
{
    fn evaluate(&self, genes: &[GeneValue]) -> Result<f64> {
        self(genes)
    }
}

fn score<T: FitnessTask + ?Sized>(task: &T, genes: &[GeneValue]) -> f64 {
    match task.evaluate(genes) {
        Ok(v) if !v.is_nan() => v,
        Ok(_) => f64::INFINITY,
        Err(e) => {
            log::debug!("fitness evaluation failed: {e}");
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    #[serde(with = "super::fitness_serde")]
    fitness: Option<f64>,
}

/// Resumable state between generations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaCheckpoint {
    pub schema: GenomeSchema,
    pub config: GaConfig,
    /// Index of the generation held in `population` (not yet evaluated).
    pub generation: usize,
    pub population: Vec<Individual>,
    pub best: Option<Individual>,
    #[serde(with = "trace_serde")]
    pub trace: Vec<f64>,
    cache: Vec<CacheEntry>,
    pub evaluations: usize,
    pub cache_hits: usize,
}

mod trace_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super::super::fitness_serde")] Option<f64>);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| Wrapped(Some(*x))).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Wrapped>::deserialize(d)?
            .into_iter()
            .map(|w| w.0.unwrap_or(f64::INFINITY))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaRunResult {
    pub best: Individual,
    /// Best fitness in each generation; non-increasing thanks to elitism.
    pub trace: Vec<f64>,
    pub wall_time_secs: f64,
    pub evaluations: usize,
    pub cache_hits: usize,
    /// Whether re-evaluating the best genome reproduced its cached fitness.
    pub cache_consistent: bool,
}

/// A GA run advanced one generation at a time.
#[derive(Debug, Clone)]
pub struct GaRun {
    schema: GenomeSchema,
    config: GaConfig,
    generation: usize,
    population: Vec<Individual>,
    best: Option<Individual>,
    trace: Vec<f64>,
    cache: BTreeMap<String, f64>,
    evaluations: usize,
    cache_hits: usize,
}

impl GaRun {
    pub fn new(schema: GenomeSchema, config: GaConfig) -> Result<Self> {
        let population = init_population(&schema, &config)?;
        Ok(Self {
            schema,
            config,
            generation: 0,
            population,
            best: None,
            trace: Vec::new(),
            cache: BTreeMap::new(),
            evaluations: 0,
            cache_hits: 0,
        })
    }

    pub fn from_checkpoint(cp: GaCheckpoint) -> Result<Self> {
        cp.schema.validate()?;
        cp.config.validate()?;
        if cp.population.len() != cp.config.population_size
            || cp.population.iter().any(|i| !cp.schema.admits(&i.genes))
        {
            return Err(Error::invalid("checkpoint population does not match its schema"));
        }
        Ok(Self {
            cache: cp
                .cache
                .into_iter()
                .map(|e| (e.key, e.fitness.unwrap_or(f64::INFINITY)))
                .collect(),
            schema: cp.schema,
            config: cp.config,
            generation: cp.generation,
            population: cp.population,
            best: cp.best,
            trace: cp.trace,
            evaluations: cp.evaluations,
            cache_hits: cp.cache_hits,
        })
    }

    pub fn checkpoint(&self) -> GaCheckpoint {
        GaCheckpoint {
            schema: self.schema.clone(),
            config: self.config.clone(),
            generation: self.generation,
            population: self.population.clone(),
            best: self.best.clone(),
            trace: self.trace.clone(),
            cache: self
                .cache
                .iter()
                .map(|(k, v)| CacheEntry {
                    key: k.clone(),
                    fitness: Some(*v),
                })
                .collect(),
            evaluations: self.evaluations,
            cache_hits: self.cache_hits,
        }
    }

    pub fn schema(&self) -> &GenomeSchema {
        &self.schema
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    /// Generations evaluated so far.
    pub fn completed(&self) -> usize {
        self.trace.len()
    }

    pub fn is_finished(&self) -> bool {
        self.completed() >= self.config.generations
    }

    /// The current (possibly unevaluated) population.
    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn best(&self) -> Option<&Individual> {
        self.best.as_ref()
    }

    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    fn evaluate_population<T: FitnessTask + ?Sized>(&mut self, task: &T) {
        let keys: Vec<String> = self
            .population
            .iter()
            .map(|i| self.schema.key(&i.genes))
            .collect();
        let mut pending: Vec<(String, Vec<GeneValue>)> = Vec::new();
        for (key, ind) in keys.iter().zip(&self.population) {
            if !self.cache.contains_key(key) && !pending.iter().any(|(k, _)| k == key) {
                pending.push((key.clone(), ind.genes.clone()));
            }
        }
        self.cache_hits += keys.len() - pending.len();
        self.evaluations += pending.len();
        let scores: Vec<f64> = pending.par_iter().map(|(_, g)| score(task, g)).collect();
        for ((key, _), s) in pending.into_iter().zip(scores) {
            self.cache.insert(key, s);
        }
        for (key, ind) in keys.iter().zip(&mut self.population) {
            ind.fitness = Some(self.cache[key]);
        }
    }

    /// Population order by fitness, ties broken by slot.
    fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.population.len()).collect();
        let fit = |i: usize| self.population[i].fitness.unwrap_or(f64::INFINITY);
        order.sort_by(|&a, &b| fit(a).total_cmp(&fit(b)).then(a.cmp(&b)));
        order
    }

    /// Evaluates the current generation and, unless it was the last, breeds
    /// the next one. Returns the generation's best fitness.
    pub fn step<T: FitnessTask + ?Sized>(&mut self, task: &T) -> Result<f64> {
        if self.is_finished() {
            return Err(Error::invalid("GA run already finished"));
        }
        self.evaluate_population(task);
        let order = self.ranking();
        let leader = &self.population[order[0]];
        let leader_fitness = leader.fitness.unwrap_or(f64::INFINITY);
        let improves = self
            .best
            .as_ref()
            .is_none_or(|b| leader_fitness < b.fitness.unwrap_or(f64::INFINITY));
        if improves {
            self.best = Some(leader.clone());
        }
        self.trace.push(leader_fitness);
        if !self.is_finished() {
            self.breed(&order)?;
        }
        Ok(leader_fitness)
    }

    fn breed(&mut self, order: &[usize]) -> Result<()> {
        let next_gen = self.generation + 1;
        let size = self.config.population_size;
        let elite = self.config.elite_count();
        let mut next: Vec<Individual> = order[..elite]
            .iter()
            .map(|&i| self.population[i].clone())
            .collect();
        let children = (elite..size)
            .into_par_iter()
            .map(|slot| {
                let mut rng = slot_stream(self.config.seed, next_gen, slot);
                let a = rng.random_range(0..size);
                let mut b = rng.random_range(0..size - 1);
                if b >= a {
                    b += 1;
                }
                let child = crossover(&self.schema, &self.population[a], &self.population[b], &mut rng)?;
                Ok(mutate(&child, &self.schema, self.config.mutation_probability, &mut rng))
            })
            .collect::<Result<Vec<_>>>()?;
        next.extend(children);
        self.population = next;
        self.generation = next_gen;
        Ok(())
    }

    /// Best individual and bookkeeping once the run is finished.
    pub fn result<T: FitnessTask + ?Sized>(&self, task: &T, wall_time_secs: f64) -> Result<GaRunResult> {
        let best = self
            .best
            .clone()
            .ok_or_else(|| Error::invalid("GA run has not evaluated any generation"))?;
        let fresh = score(task, &best.genes);
        let cached = best.fitness.unwrap_or(f64::INFINITY);
        let cache_consistent = fresh.to_bits() == cached.to_bits();
        if !cache_consistent {
            log::warn!("cached fitness {cached} differs from re-evaluation {fresh}");
        }
        Ok(GaRunResult {
            best,
            trace: self.trace.clone(),
            wall_time_secs,
            evaluations: self.evaluations,
            cache_hits: self.cache_hits,
            cache_consistent,
        })
    }
}

fn write_checkpoint(path: &Path, run: &GaRun) -> Result<()> {
    let text = serde_json::to_string(&run.checkpoint())?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<GaCheckpoint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs the GA to completion. With `checkpoint`, state is written after each
/// generation; with `resume` as well, an existing compatible checkpoint is
/// continued instead of starting over.
pub fn evolve<T: FitnessTask + ?Sized>(
    schema: &GenomeSchema,
    config: &GaConfig,
    task: &T,
    checkpoint: Option<&Path>,
    resume: bool,
) -> Result<GaRunResult> {
    let started = Instant::now();
    let mut run = match checkpoint.filter(|p| resume && p.exists()) {
        Some(path) => {
            let cp = load_checkpoint(path)?;
            if cp.schema != *schema || cp.config != *config {
                return Err(Error::invalid(format!(
                    "{}: checkpoint was written for a different schema or config",
                    path.display()
                )));
            }
            log::info!("resuming from {} at generation {}", path.display(), cp.generation);
            GaRun::from_checkpoint(cp)?
        }
        None => GaRun::new(schema.clone(), config.clone())?,
    };
    while !run.is_finished() {
        run.step(task)?;
        if let Some(path) = checkpoint {
            write_checkpoint(path, &run)?;
        }
    }
    run.result(task, started.elapsed().as_secs_f64())
}
