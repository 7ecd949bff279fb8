//! Closed-form step rules for two- and three-particle systems.

use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use super::exact::{big, ratio, Filter, Outcome};
use super::{DynamicsError, DynamicsParams};
use crate::lattice::AxialCoord;
use crate::light::LightField;
use crate::system::ParticleSystem;

fn require(system: &ParticleSystem, n: usize) -> Result<(), DynamicsError> {
    if system.len() == n {
        Ok(())
    } else {
        Err(DynamicsError::ParticleCount { expected: n, found: system.len() })
    }
}

fn light_factor(system: &ParticleSystem, particle: usize, light: &LightField, dim_prob: Rational64) -> BigRational {
    if light.is_lit(system, particle) {
        BigRational::one()
    } else {
        big(dim_prob)
    }
}

/// Two particles: pick one of the two vertices adjacent to both, uniformly;
/// move there if lit, otherwise with probability `dim_prob`.
pub fn two_particle_outcomes(
    system: &ParticleSystem,
    particle: usize,
    light: &LightField,
    dim_prob: Rational64,
) -> Result<Vec<Outcome>, DynamicsError> {
    require(system, 2)?;
    let from = system.position(particle);
    let other = system.position(1 - particle);
    let factor = light_factor(system, particle, light, dim_prob);
    Ok(from
        .neighbors()
        .into_iter()
        .filter(|q| q.is_adjacent(other))
        .map(|to| Outcome {
            particle,
            from,
            to,
            weight: &factor * ratio(1, 2),
            edge_delta: 0,
            filter: Filter::Metropolis,
        })
        .collect())
}

/// Three particles: every valid location gets probability 1/2, divided by λ
/// if the move loses an edge, and scaled by `dim_prob` if the particle is in
/// shadow. All valid locations are listed even if there are more than two;
/// the sampler rejects such lists when their mass exceeds 1.
pub fn three_particle_outcomes(
    system: &ParticleSystem,
    particle: usize,
    light: &LightField,
    dim_prob: Rational64,
) -> Result<Vec<Outcome>, DynamicsError> {
    require(system, 3)?;
    let from = system.position(particle);
    let factor = light_factor(system, particle, light, dim_prob);
    Ok(system
        .valid_targets(from)
        .into_iter()
        .map(|m| Outcome {
            particle,
            from,
            to: m.to,
            weight: &factor * ratio(1, 2),
            edge_delta: m.edge_delta(),
            filter: Filter::DivideOnce,
        })
        .collect())
}

/// Number of valid locations per particle, for checking the "at most two" premise.
pub fn three_particle_location_counts(system: &ParticleSystem) -> Result<Vec<usize>, DynamicsError> {
    require(system, 3)?;
    Ok(system.particles().iter().map(|&p| system.valid_targets(p).len()).collect())
}

// Draws one outcome (or none) with a single uniform variate.
fn sample<R: Rng + ?Sized>(
    system: &mut ParticleSystem,
    outcomes: &[Outcome],
    lambda: f64,
    rng: &mut R,
) -> Result<Option<AxialCoord>, DynamicsError> {
    let probs: Vec<f64> = outcomes
        .iter()
        .map(|o| o.weight.to_f64().unwrap_or(0.0) * o.filter.acceptance_f64(lambda, o.edge_delta))
        .collect();
    let total: f64 = probs.iter().sum();
    if total > 1.0 + 1e-12 {
        let at = outcomes.first().map(|o| o.from).unwrap_or_default();
        return Err(DynamicsError::Overfull(at, outcomes.len()));
    }
    let mut x = rng.gen::<f64>();
    for (o, p) in outcomes.iter().zip(probs) {
        if x < p {
            system.apply_move(o.particle, o.to);
            return Ok(Some(o.to));
        }
        x -= p;
    }
    Ok(None)
}

pub fn two_particle_step<R: Rng + ?Sized>(
    system: &mut ParticleSystem,
    particle: usize,
    light: &LightField,
    params: &DynamicsParams,
    rng: &mut R,
) -> Result<Option<AxialCoord>, DynamicsError> {
    let outcomes = two_particle_outcomes(system, particle, light, params.dim_prob)?;
    sample(system, &outcomes, params.lambda, rng)
}

pub fn three_particle_step<R: Rng + ?Sized>(
    system: &mut ParticleSystem,
    particle: usize,
    light: &LightField,
    params: &DynamicsParams,
    rng: &mut R,
) -> Result<Option<AxialCoord>, DynamicsError> {
    let outcomes = three_particle_outcomes(system, particle, light, params.dim_prob)?;
    sample(system, &outcomes, params.lambda, rng)
}

/// Total move probability of an outcome list at a given λ (λ ≥ 1).
pub fn move_probability(outcomes: &[Outcome], lambda: &BigRational) -> BigRational {
    outcomes.iter().fold(BigRational::zero(), |acc, o| {
        let mut w = o.weight.clone();
        for _ in 0..o.filter.inverse_lambda_power(o.edge_delta) {
            w /= lambda;
        }
        acc + w
    })
}
