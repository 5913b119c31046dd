//! Ground-truth fitness for the genetic search.

use std::collections::HashMap;
use std::sync::Mutex;
use std::thread;

use lpseg_core::ga::{optimize, Fitness, GaConfig, GaOutcome, Genome};
use lpseg_core::metrics::error_rate;
use lpseg_core::pipeline::{segment_prepared, PreparedImage};
use lpseg_core::seeds::{GroundTruth, SeedMap};
use lpseg_core::{ConvergenceMonitor, RgbImage, Sequential, FEATURE_COUNT};

use crate::error::Result;

type GenomeKey = [u64; FEATURE_COUNT + 1];

/// Segments with each genome's parameters and scores the error rate.
/// Results are memoized on the genome's exact bits; failed runs score 1.0.
pub struct PipelineFitness {
    image: PreparedImage,
    seeds: SeedMap,
    gt: GroundTruth,
    jobs: usize,
    memo: Mutex<HashMap<GenomeKey, f64>>,
    evaluations: Mutex<usize>,
}

impl PipelineFitness {
    pub fn new(image: &RgbImage, seeds: SeedMap, gt: GroundTruth, jobs: usize) -> Self {
        Self {
            image: PreparedImage::new(image),
            seeds,
            gt,
            jobs: jobs.max(1),
            memo: Mutex::new(HashMap::new()),
            evaluations: Mutex::new(0),
        }
    }

    /// Pipeline runs actually performed (memo misses).
    pub fn evaluations(&self) -> usize {
        *self.evaluations.lock().unwrap()
    }

    fn run(&self, genome: &Genome) -> f64 {
        let outcome = genome.params().and_then(|params| {
            let result = segment_prepared(
                &self.image,
                &self.seeds,
                &params,
                &ConvergenceMonitor::default(),
                &Sequential,
                |_| {},
            )?;
            error_rate(&result, &self.gt, &self.seeds)
        });
        *self.evaluations.lock().unwrap() += 1;
        outcome.unwrap_or_else(|e| {
            log::warn!("genome k={} failed: {e}; scoring 1.0", genome.k);
            1.0
        })
    }

    /// Fitness of a single genome, memoized.
    pub fn evaluate_one(&self, genome: &Genome) -> f64 {
        let key = genome.key();
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.run(genome);
        *self.memo.lock().unwrap().entry(key).or_insert(v)
    }

    fn evaluate_batch(&self, genomes: &[Genome]) -> Vec<f64> {
        if self.jobs == 1 || genomes.len() < 2 {
            return genomes.iter().map(|g| self.evaluate_one(g)).collect();
        }
        let chunk = genomes.len().div_ceil(self.jobs);
        thread::scope(|s| {
            let handles: Vec<_> = genomes
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|g| self.evaluate_one(g)).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("fitness worker panicked"))
                .collect()
        })
    }
}

impl Fitness for &PipelineFitness {
    fn evaluate(&mut self, genomes: &[Genome]) -> Vec<f64> {
        self.evaluate_batch(genomes)
    }
}

/// Per-image search of `(k, lambda)` against the ground truth.
pub fn optimize_image(
    image: &RgbImage,
    seeds: SeedMap,
    gt: GroundTruth,
    config: &GaConfig,
    planted: &[Genome],
    jobs: usize,
) -> Result<GaOutcome> {
    let fitness = PipelineFitness::new(image, seeds, gt, jobs);
    let mut f = &fitness;
    Ok(optimize(config, planted, &mut f)?)
}
