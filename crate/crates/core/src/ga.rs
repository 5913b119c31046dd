//! Genetic search over `(k, lambda)`.
//!
//! Tournament selection, uniform crossover, per-gene mutation and elitism,
//! driven by a seeded ChaCha stream so a run is reproducible from its seed.
//! Fitness is minimized.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::features::{Lambda, SegParams, FEATURE_COUNT};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene probability.
    pub mutation_rate: f64,
    pub elitism: usize,
    pub tournament_size: usize,
    /// Standard deviation of the Gaussian step applied to a mutated weight.
    pub mutation_sigma: f64,
    /// Inclusive.
    pub k_range: (usize, usize),
    /// Inclusive.
    pub lambda_range: (f64, f64),
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 30,
            crossover_rate: 0.8,
            mutation_rate: 0.05,
            elitism: 2,
            tournament_size: 3,
            mutation_sigma: 0.1,
            k_range: (1, 100),
            lambda_range: (0.0, 1.0),
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.into()));
        if self.population_size < 4 {
            return fail("population_size must be at least 4");
        }
        if self.elitism > self.population_size {
            return fail("elitism cannot exceed population_size");
        }
        if self.tournament_size == 0 {
            return fail("tournament_size must be positive");
        }
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            return fail("mutation_sigma must be finite and >= 0");
        }
        let (klo, khi) = self.k_range;
        if klo == 0 || klo > khi {
            return fail("k_range must be a non-empty interval starting at 1 or more");
        }
        let (llo, lhi) = self.lambda_range;
        if !(0.0 <= llo && llo <= lhi && lhi <= 1.0) {
            return fail("lambda_range must be a non-empty sub-interval of [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub k: usize,
    pub lambda: [f64; FEATURE_COUNT],
    /// `None` until evaluated.
    pub fitness: Option<f64>,
}

impl Genome {
    pub fn new(k: usize, lambda: [f64; FEATURE_COUNT]) -> Self {
        Self {
            k,
            lambda,
            fitness: None,
        }
    }

    pub fn params(&self) -> Result<SegParams> {
        SegParams::new(self.k, Lambda::from_slice(&self.lambda)?)
    }

    /// Exact bit pattern of the genes, for memoization.
    pub fn key(&self) -> [u64; FEATURE_COUNT + 1] {
        let mut key = [0u64; FEATURE_COUNT + 1];
        key[0] = self.k as u64;
        for (slot, v) in key[1..].iter_mut().zip(&self.lambda) {
            *slot = v.to_bits();
        }
        key
    }

    fn in_range(&self, config: &GaConfig) -> bool {
        let (klo, khi) = config.k_range;
        let (llo, lhi) = config.lambda_range;
        (klo..=khi).contains(&self.k) && self.lambda.iter().all(|v| (llo..=lhi).contains(v))
    }
}

/// Batch fitness evaluation; returns one value per genome, in order.
pub trait Fitness {
    fn evaluate(&mut self, genomes: &[Genome]) -> Vec<f64>;
}

impl<F: FnMut(&[Genome]) -> Vec<f64>> Fitness for F {
    fn evaluate(&mut self, genomes: &[Genome]) -> Vec<f64> {
        self(genomes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub best_ever: f64,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Genome,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
    pub final_population: Vec<Genome>,
}

/// Runs the search. `planted` genomes replace the first members of the
/// random initial population (after clamping into range).
pub fn optimize(config: &GaConfig, planted: &[Genome], fitness: &mut dyn Fitness) -> Result<GaOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let normal = Normal::new(0.0, config.mutation_sigma)
        .map_err(|e| Error::Config(format!("mutation_sigma: {e}")))?;

    let mut population: Vec<Genome> = (0..config.population_size)
        .map(|_| random_genome(config, &mut rng))
        .collect();
    for (slot, g) in population.iter_mut().zip(planted) {
        *slot = clamp_genome(g.clone(), config);
    }
    evaluate_pending(&mut population, fitness);

    let mut best = best_of(&population).clone();
    let mut history = Vec::with_capacity(config.generations + 1);
    history.push(stats(0, &population, &best));

    for generation in 1..=config.generations {
        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| fit(&population[a]).total_cmp(&fit(&population[b])).then(a.cmp(&b)));

        let mut next: Vec<Genome> = ranked[..config.elitism]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < config.population_size {
            let a = tournament(&population, config.tournament_size, &mut rng);
            let b = tournament(&population, config.tournament_size, &mut rng);
            let mut child = if rng.random_bool(config.crossover_rate) {
                crossover(&population[a], &population[b], &mut rng)
            } else {
                Genome::new(population[a].k, population[a].lambda)
            };
            mutate(&mut child, config, &normal, &mut rng);
            debug_assert!(child.in_range(config));
            next.push(child);
        }
        population = next;
        evaluate_pending(&mut population, fitness);

        let gen_best = best_of(&population);
        if fit(gen_best) < fit(&best) {
            best = gen_best.clone();
        }
        history.push(stats(generation, &population, &best));
    }

    Ok(GaOutcome {
        best,
        history,
        final_population: population,
    })
}

fn fit(g: &Genome) -> f64 {
    g.fitness.unwrap_or(f64::INFINITY)
}

fn best_of(population: &[Genome]) -> &Genome {
    population
        .iter()
        .reduce(|best, g| if fit(g) < fit(best) { g } else { best })
        .expect("non-empty population")
}

fn stats(generation: usize, population: &[Genome], best: &Genome) -> GenerationStats {
    let mean = population.iter().map(fit).sum::<f64>() / population.len() as f64;
    GenerationStats {
        generation,
        best: fit(best_of(population)),
        mean,
        best_ever: fit(best),
    }
}

fn evaluate_pending(population: &mut [Genome], fitness: &mut dyn Fitness) {
    let pending: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].fitness.is_none())
        .collect();
    if pending.is_empty() {
        return;
    }
    let batch: Vec<Genome> = pending.iter().map(|&i| population[i].clone()).collect();
    let values = fitness.evaluate(&batch);
    assert_eq!(values.len(), batch.len(), "fitness must return one value per genome");
    for (i, v) in pending.into_iter().zip(values) {
        population[i].fitness = Some(if v.is_nan() { f64::INFINITY } else { v });
    }
}

fn random_genome(config: &GaConfig, rng: &mut ChaCha8Rng) -> Genome {
    let (klo, khi) = config.k_range;
    let (llo, lhi) = config.lambda_range;
    let k = rng.random_range(klo..=khi);
    let lambda = core::array::from_fn(|_| rng.random_range(llo..=lhi));
    Genome::new(k, lambda)
}

fn clamp_genome(mut g: Genome, config: &GaConfig) -> Genome {
    let (klo, khi) = config.k_range;
    let (llo, lhi) = config.lambda_range;
    if !(klo..=khi).contains(&g.k) || g.lambda.iter().any(|v| !(llo..=lhi).contains(v)) {
        g.fitness = None;
    }
    g.k = g.k.clamp(klo, khi);
    for v in &mut g.lambda {
        *v = v.clamp(llo, lhi);
    }
    g
}

fn tournament(population: &[Genome], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..population.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..population.len());
        let (cw, cc) = (fit(&population[winner]), fit(&population[challenger]));
        if cc < cw || (cc == cw && challenger < winner) {
            winner = challenger;
        }
    }
    winner
}

fn crossover(a: &Genome, b: &Genome, rng: &mut ChaCha8Rng) -> Genome {
    let k = if rng.random_bool(0.5) { a.k } else { b.k };
    let lambda = core::array::from_fn(|i| if rng.random_bool(0.5) { a.lambda[i] } else { b.lambda[i] });
    Genome::new(k, lambda)
}

fn mutate(g: &mut Genome, config: &GaConfig, normal: &Normal<f64>, rng: &mut ChaCha8Rng) {
    let (klo, khi) = config.k_range;
    let (llo, lhi) = config.lambda_range;
    if rng.random_bool(config.mutation_rate) {
        g.k = rng.random_range(klo..=khi);
    }
    for v in &mut g.lambda {
        if rng.random_bool(config.mutation_rate) {
            *v = (*v + normal.sample(rng)).clamp(llo, lhi);
        }
    }
}
