//! Exact one-activation move distributions.
//!
//! Each outcome carries its probability before the λ filter as an exact
//! rational, plus the edge change the filter acts on. Keeping λ out of the
//! weights lets the oracle evaluate the filter at a rational λ or carry it
//! symbolically.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::{specialized, DynamicsError, Kernel, Mode};
use crate::lattice::AxialCoord;
use crate::light::LightField;
use crate::system::ParticleSystem;

/// How the λ filter turns an edge change into an acceptance factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Filter {
    /// `min(1, λ^(e'-e))`.
    Metropolis,
    /// Divide by λ once when the move loses edges, otherwise 1.
    DivideOnce,
}

impl Filter {
    /// Acceptance as a power of `1/λ` for λ ≥ 1.
    pub fn inverse_lambda_power(self, edge_delta: i32) -> u32 {
        match (self, edge_delta < 0) {
            (_, false) => 0,
            (Filter::Metropolis, true) => edge_delta.unsigned_abs(),
            (Filter::DivideOnce, true) => 1,
        }
    }

    pub fn acceptance_f64(self, lambda: f64, edge_delta: i32) -> f64 {
        match self {
            Filter::Metropolis => lambda.powi(edge_delta).min(1.0),
            Filter::DivideOnce if edge_delta < 0 => 1.0 / lambda,
            Filter::DivideOnce => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub particle: usize,
    pub from: AxialCoord,
    pub to: AxialCoord,
    /// Probability of proposing this move in one iteration, before the filter.
    pub weight: BigRational,
    pub edge_delta: i32,
    pub filter: Filter,
}

/// Which particle activates.
#[derive(Debug, Clone, PartialEq)]
pub enum Activation {
    /// Uniformly at random.
    Uniform,
    /// Proportionally to a light-dependent rate (the jump chain of
    /// independent exponential clocks).
    Rates { lit: BigRational, dim: BigRational },
}

/// What an activated particle does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    General { kernel: Kernel, mode: Mode, dim_prob: Rational64 },
    TwoParticle { dim_prob: Rational64 },
    ThreeParticle { dim_prob: Rational64 },
}

pub fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Moves of an activated particle under the general kernels. Weights are
/// conditional on `particle` being the one activated.
pub fn activation_outcomes(
    system: &ParticleSystem,
    particle: usize,
    kernel: Kernel,
    mode: Mode,
    dim_prob: Rational64,
    light: &LightField,
) -> Vec<Outcome> {
    let from = system.position(particle);
    let attempt = match mode {
        Mode::Phototax if !light.is_lit(system, particle) => big(dim_prob),
        _ => BigRational::one(),
    };
    let targets = system.valid_targets(from);
    let per_target = match kernel {
        Kernel::Uniform6 => ratio(1, 6),
        Kernel::UniformValid => ratio(1, targets.len().max(2) as i64),
    };
    targets
        .into_iter()
        .map(|m| Outcome {
            particle,
            from,
            to: m.to,
            weight: &attempt * &per_target,
            edge_delta: m.edge_delta(),
            filter: Filter::Metropolis,
        })
        .collect()
}

/// Probability that each particle is the one activated.
pub fn selection_weights(system: &ParticleSystem, activation: &Activation, light: &LightField) -> Vec<BigRational> {
    let n = system.len();
    match activation {
        Activation::Uniform => vec![ratio(1, n as i64); n],
        Activation::Rates { lit, dim } => {
            let rates: Vec<BigRational> = (0..n)
                .map(|i| if light.is_lit(system, i) { lit.clone() } else { dim.clone() })
                .collect();
            let total: BigRational = rates.iter().fold(BigRational::zero(), |a, r| a + r);
            rates.into_iter().map(|r| r / &total).collect()
        }
    }
}

/// Every move one iteration can make, with its unfiltered probability.
pub fn iteration_outcomes(
    system: &ParticleSystem,
    rule: StepRule,
    activation: &Activation,
    light: &LightField,
) -> Result<Vec<Outcome>, DynamicsError> {
    let select = selection_weights(system, activation, light);
    let mut out = Vec::new();
    for (particle, p) in select.iter().enumerate() {
        let moves = match rule {
            StepRule::General { kernel, mode, dim_prob } => {
                activation_outcomes(system, particle, kernel, mode, dim_prob, light)
            }
            StepRule::TwoParticle { dim_prob } => specialized::two_particle_outcomes(system, particle, light, dim_prob)?,
            StepRule::ThreeParticle { dim_prob } => {
                specialized::three_particle_outcomes(system, particle, light, dim_prob)?
            }
        };
        out.extend(moves.into_iter().map(|mut o| {
            o.weight *= p;
            o
        }));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: (i32, i32), b: (i32, i32)) -> ParticleSystem {
        ParticleSystem::new([a.into(), b.into()]).unwrap()
    }

    #[test]
    fn filter_powers() {
        assert_eq!(Filter::Metropolis.inverse_lambda_power(-2), 2);
        assert_eq!(Filter::DivideOnce.inverse_lambda_power(-2), 1);
        assert_eq!(Filter::Metropolis.inverse_lambda_power(3), 0);
        assert_eq!(Filter::Metropolis.acceptance_f64(4.0, -1), 0.25);
        assert_eq!(Filter::Metropolis.acceptance_f64(4.0, 0), 1.0);
        assert_eq!(Filter::DivideOnce.acceptance_f64(4.0, -3), 0.25);
    }

    #[test]
    fn two_particle_uniform_valid_halves() {
        let s = pair((0, 0), (1, 0));
        let o = activation_outcomes(&s, 0, Kernel::UniformValid, Mode::Phototax, Rational64::new(1, 4), &LightField::ON);
        assert_eq!(o.len(), 2);
        assert!(o.iter().all(|x| x.weight == ratio(1, 2) && x.edge_delta == 0));
        let o6 = activation_outcomes(&s, 0, Kernel::Uniform6, Mode::Phototax, Rational64::new(1, 4), &LightField::ON);
        assert!(o6.iter().all(|x| x.weight == ratio(1, 6)));
    }

    #[test]
    fn occluded_particle_scaled_by_dim_prob() {
        let s = pair((0, 0), (0, 1));
        let o = activation_outcomes(&s, 1, Kernel::UniformValid, Mode::Phototax, Rational64::new(1, 4), &LightField::ON);
        assert!(o.iter().all(|x| x.weight == ratio(1, 8)));
        let o = activation_outcomes(&s, 1, Kernel::UniformValid, Mode::CompressionOnly, Rational64::new(1, 4), &LightField::ON);
        assert!(o.iter().all(|x| x.weight == ratio(1, 2)));
    }

    #[test]
    fn rate_weighted_selection() {
        let s = pair((0, 0), (0, 1));
        let w = selection_weights(&s, &Activation::Rates { lit: ratio(4, 1), dim: ratio(1, 1) }, &LightField::ON);
        assert_eq!(w, vec![ratio(4, 5), ratio(1, 5)]);
        assert_eq!(selection_weights(&s, &Activation::Uniform, &LightField::ON), vec![ratio(1, 2); 2]);
    }
}
