//! Generational genetic search over feature bitmasks, scored by CFS merit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::Dataset;
use crate::error::{Error, Result};
use crate::preprocess::cfs::CorrelationTables;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub seed: u64,
}

impl GaConfig {
    /// Population 20, 20 generations, crossover 0.6, mutation 0.033.
    pub fn with_seed(seed: u64) -> Self {
        GaConfig {
            population_size: 20,
            generations: 20,
            crossover_prob: 0.6,
            mutation_prob: 0.033,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::InvalidArgument("GA population must be at least 2".into()));
        }
        for (name, p) in [("crossover", self.crossover_prob), ("mutation", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub mask: Vec<bool>,
    pub merit: f64,
}

impl FeatureSubset {
    pub fn all(n: usize) -> Self {
        FeatureSubset {
            mask: vec![true; n],
            merit: f64::NAN,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self, feature_names: &[String]) -> Vec<String> {
        self.indices().into_iter().map(|i| feature_names[i].clone()).collect()
    }
}

/// Best subset found plus the best-ever merit after initialization and
/// after each generation.
#[derive(Debug, Clone)]
pub struct GaTrace {
    pub best: FeatureSubset,
    pub history: Vec<f64>,
}

pub fn genetic_select(dataset: &Dataset, config: &GaConfig) -> Result<FeatureSubset> {
    Ok(genetic_search(&CorrelationTables::from_dataset(dataset), config)?.best)
}

pub fn genetic_search(tables: &CorrelationTables, config: &GaConfig) -> Result<GaTrace> {
    config.validate()?;
    let n = tables.n;
    if n == 0 {
        return Err(Error::InvalidArgument("no features to select from".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fitness = |mask: &[bool]| {
        let idx: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        tables.merit(&idx)
    };

    let mut population: Vec<Vec<bool>> = (0..config.population_size)
        .map(|_| {
            let mut c: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            repair(&mut c, &mut rng);
            c
        })
        .collect();
    let mut scores: Vec<f64> = population.iter().map(|c| fitness(c)).collect();

    let mut best_idx = argmax(&scores);
    let mut best = FeatureSubset {
        mask: population[best_idx].clone(),
        merit: scores[best_idx],
    };
    let mut history = vec![best.merit];

    for _ in 0..config.generations {
        let mut next = Vec::with_capacity(config.population_size);
        next.push(population[best_idx].clone());
        while next.len() < config.population_size {
            let a = roulette(&scores, &mut rng);
            let b = roulette(&scores, &mut rng);
            let (mut c1, mut c2) = (population[a].clone(), population[b].clone());
            if n > 1 && rng.random_bool(config.crossover_prob) {
                let point = rng.random_range(1..n);
                for i in point..n {
                    std::mem::swap(&mut c1[i], &mut c2[i]);
                }
            }
            for child in [&mut c1, &mut c2] {
                for bit in child.iter_mut() {
                    if rng.random_bool(config.mutation_prob) {
                        *bit = !*bit;
                    }
                }
                repair(child, &mut rng);
            }
            next.push(c1);
            if next.len() < config.population_size {
                next.push(c2);
            }
        }
        population = next;
        scores = population.iter().map(|c| fitness(c)).collect();
        best_idx = argmax(&scores);
        if scores[best_idx] > best.merit {
            best = FeatureSubset {
                mask: population[best_idx].clone(),
                merit: scores[best_idx],
            };
        }
        history.push(best.merit);
    }
    Ok(GaTrace { best, history })
}

fn repair(mask: &mut [bool], rng: &mut ChaCha8Rng) {
    if !mask.iter().any(|b| *b) {
        let i = rng.random_range(0..mask.len());
        mask[i] = true;
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

fn roulette(scores: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = scores.iter().map(|s| s.max(0.0)).sum();
    if total <= 0.0 {
        return rng.random_range(0..scores.len());
    }
    let mut ticket = rng.random::<f64>() * total;
    for (i, s) in scores.iter().enumerate() {
        ticket -= s.max(0.0);
        if ticket < 0.0 {
            return i;
        }
    }
    scores.len() - 1
}
