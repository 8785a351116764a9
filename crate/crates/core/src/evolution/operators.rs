use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{CrossoverKind, GaError, Individual};
use crate::rng::RandomStream;

/// Rejection retries before [`perturb`] gives up and returns `theta`.
pub const PERTURB_MAX_RETRIES: usize = 64;

/// Skewed perturbation of a single gene.
///
/// Each attempt draws `g = |N(0,1)|` and a uniform `u`; with probability
/// `theta` the gene moves down by `(g/sigma)*theta`, otherwise up by
/// `(g/sigma)*(1-theta)`. Attempts landing outside `[0, 1]` are redrawn.
pub fn perturb(theta: f64, sigma: f64, rng: &mut RandomStream) -> f64 {
    perturb_with(theta, sigma, || {
        let g: f64 = rng.sample(StandardNormal);
        (g.abs(), rng.gen::<f64>())
    })
}

/// [`perturb`] over an explicit source of `(|gaussian|, uniform)` pairs.
pub fn perturb_with(theta: f64, sigma: f64, mut draw: impl FnMut() -> (f64, f64)) -> f64 {
    for _ in 0..=PERTURB_MAX_RETRIES {
        let (g, u) = draw();
        let step = g / sigma;
        let v = if u < theta {
            theta - step * theta
        } else {
            theta + step * (1.0 - theta)
        };
        if (0.0..=1.0).contains(&v) {
            return v;
        }
    }
    theta
}

/// Each gene is perturbed independently with probability `mu_mut`.
pub fn mutate(ind: &Individual, sigma: f64, mu_mut: f64, rng: &mut RandomStream) -> Individual {
    let genome = ind
        .genome
        .iter()
        .map(|&g| {
            if rng.gen::<f64>() < mu_mut {
                perturb(g, sigma, rng)
            } else {
                g
            }
        })
        .collect();
    Individual::new(genome)
}

pub fn crossover(
    a: &Individual,
    b: &Individual,
    kind: CrossoverKind,
    rng: &mut RandomStream,
) -> Result<Individual, GaError> {
    if a.genome.len() != b.genome.len() {
        return Err(GaError::GenomeLengthMismatch {
            left: a.genome.len(),
            right: b.genome.len(),
        });
    }
    let n = a.genome.len();
    let genome = match kind {
        CrossoverKind::Uniform => a
            .genome
            .iter()
            .zip(&b.genome)
            .map(|(&x, &y)| if rng.gen::<bool>() { x } else { y })
            .collect(),
        CrossoverKind::SinglePoint if n < 2 => {
            if rng.gen::<bool>() {
                a.genome.clone()
            } else {
                b.genome.clone()
            }
        }
        CrossoverKind::SinglePoint => {
            let cut = rng.gen_range(1..n);
            a.genome[..cut]
                .iter()
                .chain(&b.genome[cut..])
                .copied()
                .collect()
        }
    };
    Ok(Individual::new(genome))
}

/// Index of the fittest individual; ties go to the lowest index.
pub(super) fn fittest_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.score() > pop[best].score() {
            best = i;
        }
    }
    best
}

/// Fittest member of a uniformly drawn `k`-subset (without replacement).
pub fn tournament_select<'p>(
    pop: &'p [Individual],
    k: usize,
    rng: &mut RandomStream,
) -> &'p Individual {
    assert!(
        k >= 1 && k <= pop.len(),
        "tournament size {k} outside 1..={}",
        pop.len()
    );
    let mut winner: Option<usize> = None;
    for i in index::sample(rng, pop.len(), k) {
        winner = match winner {
            Some(w) if pop[w].score() > pop[i].score() => Some(w),
            Some(w) if pop[w].score() == pop[i].score() && w < i => Some(w),
            _ => Some(i),
        };
    }
    &pop[winner.expect("k >= 1")]
}
