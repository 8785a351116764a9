//! Real-vector genetic algorithm with elitism, fittest-mutant offspring,
//! tournament selection, crossover, and skewed perturbation.

mod operators;

pub use operators::{
    crossover, mutate, perturb, perturb_with, tournament_select, PERTURB_MAX_RETRIES,
};

use std::fmt::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream, RandomStream};
use crate::stats::mean_std;

pub type FitnessError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(String),
    #[error("genome lengths differ: {left} vs {right}")]
    GenomeLengthMismatch { left: usize, right: usize },
    #[error(
        "fitness evaluation failed at generation {generation}, individual {individual}: {source}"
    )]
    FitnessEvaluationFailure {
        generation: usize,
        individual: usize,
        #[source]
        source: FitnessError,
    },
}

impl PartialEq for GaError {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (GaError::InvalidConfig(a), GaError::InvalidConfig(b)) => a == b,
            (
                GaError::GenomeLengthMismatch { left: a, right: b },
                GaError::GenomeLengthMismatch { left: c, right: d },
            ) => a == c && b == d,
            (
                GaError::FitnessEvaluationFailure {
                    generation: a,
                    individual: b,
                    ..
                },
                GaError::FitnessEvaluationFailure {
                    generation: c,
                    individual: d,
                    ..
                },
            ) => a == c && b == d,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    #[default]
    Uniform,
    SinglePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub n_pop: usize,
    pub n_mut: usize,
    pub t_max: usize,
    pub k: usize,
    pub sigma: f64,
    pub mu_mut: f64,
    pub seed: u64,
    /// Stop after this many generations without a change of the best
    /// fitness; 0 disables the check.
    pub convergence_window: usize,
    pub crossover: CrossoverKind,
    /// Evaluate a generation's individuals on the rayon pool.
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            n_pop: 100,
            n_mut: 5,
            t_max: 30,
            k: 3,
            sigma: 2.0,
            mu_mut: 0.25,
            seed: 0,
            convergence_window: 10,
            crossover: CrossoverKind::Uniform,
            parallel: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |m: String| Err(GaError::InvalidConfig(m));
        if self.n_pop == 0 {
            return bad("n_pop must be positive".into());
        }
        if self.n_mut + 1 > self.n_pop {
            return bad(format!(
                "n_mut + 1 = {} exceeds n_pop = {}",
                self.n_mut + 1,
                self.n_pop
            ));
        }
        if self.k == 0 || self.k > self.n_pop {
            return bad(format!(
                "tournament size {} outside 1..={}",
                self.k, self.n_pop
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(0.0..=1.0).contains(&self.mu_mut) {
            return bad(format!("mu_mut must lie in [0, 1], got {}", self.mu_mut));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GaError> {
        let cfg: GaConfig =
            toml::from_str(text).map_err(|e| GaError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("GaConfig serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    /// Cached once evaluated; never recomputed within a run.
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genome: Vec<f64>) -> Self {
        Individual {
            genome,
            fitness: None,
        }
    }

    fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Higher is better. Evaluation must be reproducible for a given genome and
/// random stream.
pub trait FitnessFunction: Sync {
    fn genome_len(&self) -> usize;
    fn evaluate(&self, genome: &[f64], rng: &mut RandomStream) -> Result<f64, FitnessError>;
}

/// Adapts a closure into a [`FitnessFunction`].
pub struct FnFitness<F> {
    pub genome_len: usize,
    pub f: F,
}

impl<F> FitnessFunction for FnFitness<F>
where
    F: Fn(&[f64], &mut RandomStream) -> f64 + Sync,
{
    fn genome_len(&self) -> usize {
        self.genome_len
    }

    fn evaluate(&self, genome: &[f64], rng: &mut RandomStream) -> Result<f64, FitnessError> {
        Ok((self.f)(genome, rng))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub std_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub rows: Vec<GenerationStats>,
}

impl GenerationTrace {
    pub fn best_fitness(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.best_fitness)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].best_fitness >= w[0].best_fitness)
    }

    /// `generation,best_fitness,mean_fitness,std_fitness` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,std_fitness\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.generation, r.best_fitness, r.mean_fitness, r.std_fitness
            );
        }
        out
    }
}

fn evaluate_population(
    pop: &mut [Individual],
    generation: usize,
    f: &dyn FitnessFunction,
    cfg: &GaConfig,
) -> Result<(), GaError> {
    let eval = |(i, ind): (usize, &Individual)| -> Option<Result<f64, GaError>> {
        if ind.fitness.is_some() {
            return None;
        }
        let mut rng = stream(cfg.seed, &[generation as u64, i as u64]);
        let fail = |source| GaError::FitnessEvaluationFailure {
            generation,
            individual: i,
            source,
        };
        Some(match f.evaluate(&ind.genome, &mut rng) {
            Ok(v) if v.is_nan() => Err(fail("fitness is NaN".into())),
            Ok(v) => Ok(v),
            Err(e) => Err(fail(e)),
        })
    };
    let results: Vec<Option<Result<f64, GaError>>> = if cfg.parallel {
        pop.par_iter().enumerate().map(eval).collect()
    } else {
        pop.iter().enumerate().map(eval).collect()
    };
    for (ind, res) in pop.iter_mut().zip(results) {
        if let Some(res) = res {
            ind.fitness = Some(res?);
        }
    }
    Ok(())
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let fits: Vec<f64> = pop.iter().map(Individual::score).collect();
    let (mean, std) = mean_std(&fits);
    GenerationStats {
        generation,
        best_fitness: fits.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_fitness: mean,
        std_fitness: std,
    }
}

/// Runs the genetic algorithm and returns the final fittest individual along
/// with per-generation statistics (generation 0 included).
pub fn run_ga(
    f: &dyn FitnessFunction,
    cfg: &GaConfig,
) -> Result<(Individual, GenerationTrace), GaError> {
    cfg.validate()?;
    let n = f.genome_len();
    let mut rng = stream(cfg.seed, &[u64::MAX]);
    let mut pop: Vec<Individual> = (0..cfg.n_pop)
        .map(|_| Individual::new((0..n).map(|_| rng.gen::<f64>()).collect()))
        .collect();
    evaluate_population(&mut pop, 0, f, cfg)?;
    let mut trace = GenerationTrace {
        rows: vec![stats(0, &pop)],
    };
    let mut unchanged = 0;

    for t in 1..=cfg.t_max {
        if cfg.convergence_window > 0 && unchanged >= cfg.convergence_window {
            break;
        }
        let elite = &pop[operators::fittest_index(&pop)];
        let mut next = Vec::with_capacity(cfg.n_pop);
        next.push(elite.clone());
        for _ in 0..cfg.n_mut {
            next.push(mutate(elite, cfg.sigma, cfg.mu_mut, &mut rng));
        }
        for _ in 0..cfg.n_pop - cfg.n_mut - 1 {
            let a = tournament_select(&pop, cfg.k, &mut rng);
            let b = tournament_select(&pop, cfg.k, &mut rng);
            let child = crossover(a, b, cfg.crossover, &mut rng)?;
            next.push(mutate(&child, cfg.sigma, cfg.mu_mut, &mut rng));
        }
        evaluate_population(&mut next, t, f, cfg)?;
        pop = next;
        let row = stats(t, &pop);
        let prev_best = trace.rows.last().expect("generation 0").best_fitness;
        unchanged = if row.best_fitness == prev_best {
            unchanged + 1
        } else {
            0
        };
        trace.rows.push(row);
    }
    let best = pop[operators::fittest_index(&pop)].clone();
    Ok((best, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(target: Vec<f64>) -> FnFitness<impl Fn(&[f64], &mut RandomStream) -> f64 + Sync> {
        FnFitness {
            genome_len: target.len(),
            f: move |x: &[f64], _: &mut RandomStream| -> f64 {
                -x.iter()
                    .zip(&target)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
            },
        }
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let bad = [
            GaConfig {
                n_mut: 100,
                ..Default::default()
            },
            GaConfig {
                k: 0,
                ..Default::default()
            },
            GaConfig {
                k: 101,
                ..Default::default()
            },
            GaConfig {
                sigma: 0.0,
                ..Default::default()
            },
            GaConfig {
                mu_mut: 1.5,
                ..Default::default()
            },
            GaConfig {
                n_pop: 0,
                n_mut: 0,
                k: 1,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(
                matches!(cfg.validate(), Err(GaError::InvalidConfig(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = GaConfig {
            seed: 42,
            crossover: CrossoverKind::SinglePoint,
            ..Default::default()
        };
        let text = cfg.to_toml_string();
        assert_eq!(GaConfig::from_toml_str(&text).unwrap(), cfg);
        let partial = GaConfig::from_toml_str("n_pop = 10\nk = 2\n").unwrap();
        assert_eq!(partial.n_pop, 10);
        assert_eq!(partial.sigma, 2.0);
        assert!(GaConfig::from_toml_str("n_pop = 3\nn_mut = 5\n").is_err());
        assert!(GaConfig::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn finds_hidden_optimum() {
        let f = sphere(vec![0.2, 0.7, 0.5, 0.9]);
        let cfg = GaConfig {
            seed: 11,
            convergence_window: 0,
            ..Default::default()
        };
        let (best, trace) = run_ga(&f, &cfg).unwrap();
        assert!(best.fitness.unwrap() >= -1e-2, "{best:?}");
        assert_eq!(trace.rows.len(), 31);
        assert!(trace.is_monotone());
    }

    #[test]
    fn elite_only_population_is_constant() {
        let f = sphere(vec![0.3, 0.3]);
        let cfg = GaConfig {
            n_pop: 1,
            n_mut: 0,
            k: 1,
            t_max: 8,
            convergence_window: 0,
            ..Default::default()
        };
        let (best, trace) = run_ga(&f, &cfg).unwrap();
        assert_eq!(trace.rows.len(), 9);
        assert!(trace.best_fitness().all(|b| b == best.fitness.unwrap()));
    }

    #[test]
    fn convergence_window_stops_early() {
        let flat = FnFitness {
            genome_len: 2,
            f: |_: &[f64], _: &mut RandomStream| 1.0,
        };
        let cfg = GaConfig {
            n_pop: 10,
            n_mut: 2,
            t_max: 50,
            convergence_window: 4,
            ..Default::default()
        };
        let (_, trace) = run_ga(&flat, &cfg).unwrap();
        assert_eq!(trace.rows.len(), 5);
    }

    #[test]
    fn parallel_matches_serial() {
        let noisy = FnFitness {
            genome_len: 3,
            f: |x: &[f64], rng: &mut RandomStream| -> f64 {
                -x.iter().sum::<f64>() + rng.gen::<f64>()
            },
        };
        let base = GaConfig {
            n_pop: 40,
            seed: 5,
            t_max: 10,
            ..Default::default()
        };
        let par = run_ga(
            &noisy,
            &GaConfig {
                parallel: true,
                ..base.clone()
            },
        )
        .unwrap();
        let ser = run_ga(
            &noisy,
            &GaConfig {
                parallel: false,
                ..base.clone()
            },
        )
        .unwrap();
        assert_eq!(par, ser);
        assert_eq!(run_ga(&noisy, &base).unwrap(), par);
    }

    #[test]
    fn fitness_failures_carry_location() {
        struct Failing;
        impl FitnessFunction for Failing {
            fn genome_len(&self) -> usize {
                1
            }
            fn evaluate(&self, g: &[f64], _: &mut RandomStream) -> Result<f64, FitnessError> {
                if g[0] > 0.5 {
                    Err("boom".into())
                } else {
                    Ok(g[0])
                }
            }
        }
        let cfg = GaConfig {
            n_pop: 20,
            n_mut: 1,
            parallel: false,
            seed: 3,
            ..Default::default()
        };
        match run_ga(&Failing, &cfg) {
            Err(GaError::FitnessEvaluationFailure {
                generation: 0,
                individual,
                ..
            }) => {
                assert!(individual < 20)
            }
            other => panic!("unexpected {other:?}"),
        }
        let nan = FnFitness {
            genome_len: 1,
            f: |_: &[f64], _: &mut RandomStream| f64::NAN,
        };
        assert!(matches!(
            run_ga(&nan, &cfg),
            Err(GaError::FitnessEvaluationFailure { .. })
        ));
    }

    #[test]
    fn trace_csv_layout() {
        let f = sphere(vec![0.5]);
        let cfg = GaConfig {
            n_pop: 5,
            n_mut: 1,
            k: 2,
            t_max: 2,
            convergence_window: 0,
            ..Default::default()
        };
        let (_, trace) = run_ga(&f, &cfg).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "generation,best_fitness,mean_fitness,std_fitness");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2,"));
    }
}
