//! Continuous-time execution with independent exponential activation clocks.

use rand::Rng;

use super::{compression_step, phototax_step, seeded_rng, DynamicsError, DynamicsParams, Mode, Record, Trajectory};
use crate::light::LightField;
use crate::system::ParticleSystem;

/// Activation rate of each particle.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationRates {
    /// Fixed rate per particle id.
    PerParticle(Vec<f64>),
    /// Rate depends on whether the particle currently senses light.
    Light { lit: f64, dim: f64 },
}

impl ActivationRates {
    pub fn equal(n: usize) -> Self {
        ActivationRates::PerParticle(vec![1.0; n])
    }

    fn validate(&self, n: usize) -> Result<(), DynamicsError> {
        let ok = |r: f64| r > 0.0 && r.is_finite();
        match self {
            ActivationRates::PerParticle(r) if r.len() != n => {
                Err(DynamicsError::RateCount { expected: n, found: r.len() })
            }
            ActivationRates::PerParticle(r) if !r.iter().all(|&x| ok(x)) => Err(DynamicsError::InvalidRates),
            ActivationRates::Light { lit, dim } if !(ok(*lit) && ok(*dim)) => Err(DynamicsError::InvalidRates),
            _ => Ok(()),
        }
    }
}

/// A trajectory whose record `t` counts activations, with the continuous
/// clock reading at each record alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonTrajectory {
    pub trajectory: Trajectory,
    pub clock: Vec<f64>,
}

/// Picks the next particle to fire given the current configuration, and
/// returns it with the total rate.
fn next_particle<R: Rng + ?Sized>(
    system: &ParticleSystem,
    light: &LightField,
    rates: &ActivationRates,
    cumulative: &[f64],
    rng: &mut R,
) -> (usize, f64) {
    match rates {
        ActivationRates::PerParticle(_) => {
            let total = *cumulative.last().unwrap();
            let x = rng.gen::<f64>() * total;
            let i = cumulative.partition_point(|&c| c <= x).min(cumulative.len() - 1);
            (i, total)
        }
        ActivationRates::Light { lit, dim } => {
            let n = system.len();
            let lit_count = light.lit_count(system);
            let total = lit_count as f64 * lit + (n - lit_count) as f64 * dim;
            let top = lit.max(*dim);
            loop {
                let i = rng.gen_range(0..n);
                let r = if light.is_lit(system, i) { *lit } else { *dim };
                if r >= top || rng.gen::<f64>() * top < r {
                    return (i, total);
                }
            }
        }
    }
}

/// Event-driven run up to clock time `horizon`. The firing particle executes
/// the step of `params.mode`. Records at t=0, every `record_interval`
/// activations, and once more at the horizon.
pub fn poisson_run(
    initial: ParticleSystem,
    params: DynamicsParams,
    light: LightField,
    horizon: f64,
    rates: &ActivationRates,
    record_interval: u64,
) -> Result<PoissonTrajectory, DynamicsError> {
    params.validate()?;
    rates.validate(initial.len())?;
    if record_interval == 0 {
        return Err(DynamicsError::RecordInterval);
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(DynamicsError::InvalidHorizon(horizon));
    }
    if !initial.is_connected() {
        return Err(DynamicsError::Disconnected);
    }
    let cumulative: Vec<f64> = match rates {
        ActivationRates::PerParticle(r) => r
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect(),
        ActivationRates::Light { .. } => Vec::new(),
    };
    let mut rng = seeded_rng(params.seed);
    let mut system = initial;
    let mut records = vec![Record::observe(0, &system, &light)];
    let mut clock = vec![0.0];
    let mut now = 0.0;
    let mut events = 0u64;
    loop {
        let (particle, total) = next_particle(&system, &light, rates, &cumulative, &mut rng);
        let wait = -(1.0 - rng.gen::<f64>()).ln() / total;
        if now + wait > horizon {
            break;
        }
        now += wait;
        events += 1;
        match params.mode {
            Mode::CompressionOnly => compression_step(&mut system, particle, &params, &mut rng),
            Mode::Phototax => phototax_step(&mut system, particle, &light, &params, &mut rng),
        };
        if events % record_interval == 0 {
            records.push(Record::observe(events, &system, &light));
            clock.push(now);
        }
    }
    if horizon > 0.0 && records.last().map(|r| r.t) != Some(events) {
        records.push(Record::observe(events, &system, &light));
        clock.push(now);
    }
    let particles = system.len();
    Ok(PoissonTrajectory {
        trajectory: Trajectory { params, light, particles, initial: format!("n={particles}"), records },
        clock,
    })
}
