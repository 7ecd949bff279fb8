//! Markov-chain kernels for compression and phototaxing, plus the run drivers.
//!
//! One iteration picks a particle uniformly at random and lets it execute
//! either the plain Metropolis compression move or the light-dependent
//! variant, where a particle in shadow only attempts a move with probability
//! `dim_prob`. At most one particle moves per iteration.

pub mod exact;
pub mod poisson;
pub mod specialized;

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::AxialCoord;
use crate::light::LightField;
use crate::system::{MoveProposal, ParticleSystem};

pub use poisson::{poisson_run, ActivationRates, PoissonTrajectory};
pub use specialized::{three_particle_step, two_particle_step};

/// The generator behind every seeded run: ChaCha with 8 rounds, seeded
/// through `SeedableRng::seed_from_u64`.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("dim_prob must lie in (0, 1], got {0}")]
    InvalidDimProb(Rational64),
    #[error("initial configuration is not connected")]
    Disconnected,
    #[error("record interval must be at least 1")]
    RecordInterval,
    #[error("this step rule needs exactly {expected} particles, system has {found}")]
    ParticleCount { expected: usize, found: usize },
    #[error("horizon must be finite and non-negative, got {0}")]
    InvalidHorizon(f64),
    #[error("activation rates must be positive and finite")]
    InvalidRates,
    #[error("per-particle rates cover {found} particles, system has {expected}")]
    RateCount { expected: usize, found: usize },
    #[error("move probabilities at {0} sum past 1 ({1} valid locations)")]
    Overfull(AxialCoord, usize),
}

/// How a target vertex is proposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// One of the six neighbors, uniformly. Symmetric proposal; invalid or
    /// occupied picks are no-ops.
    Uniform6,
    /// Each valid target with probability `1/max(2, k)` for `k` valid
    /// targets, otherwise no move. With two particles this always relocates
    /// an active lit particle; with three it gives every valid location
    /// probability 1/2.
    UniformValid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    CompressionOnly,
    Phototax,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Uniform6 => "uniform6",
            Kernel::UniformValid => "uniform_valid",
        })
    }
}

impl FromStr for Kernel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform6" => Ok(Kernel::Uniform6),
            "uniform_valid" | "uniform-valid" => Ok(Kernel::UniformValid),
            _ => Err(format!("unknown kernel `{s}` (expected uniform6 or uniform_valid)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::CompressionOnly => "compression",
            Mode::Phototax => "phototax",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "compression" | "compression_only" => Ok(Mode::CompressionOnly),
            "phototax" => Ok(Mode::Phototax),
            _ => Err(format!("unknown mode `{s}` (expected compression or phototax)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams {
    /// Bias λ. Compression is guaranteed for λ > 2 + √2.
    pub lambda: f64,
    /// Probability that a particle in shadow attempts a move at all.
    pub dim_prob: Rational64,
    pub kernel: Kernel,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            lambda: 4.0,
            dim_prob: Rational64::new(1, 4),
            kernel: Kernel::Uniform6,
            mode: Mode::Phototax,
            seed: 0,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(DynamicsError::InvalidLambda(self.lambda));
        }
        if self.dim_prob <= Rational64::zero() || self.dim_prob > Rational64::one() {
            return Err(DynamicsError::InvalidDimProb(self.dim_prob));
        }
        Ok(())
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_dim_prob(mut self, dim_prob: Rational64) -> Self {
        self.dim_prob = dim_prob;
        self
    }

    pub(crate) fn dim_prob_f64(&self) -> f64 {
        *self.dim_prob.numer() as f64 / *self.dim_prob.denom() as f64
    }
}

// Metropolis filter: accept with probability min(1, λ^(e'-e)). A zero delta
// is accepted without drawing.
#[inline]
fn metropolis_accept<R: Rng + ?Sized>(lambda: f64, edge_delta: i32, rng: &mut R) -> bool {
    if edge_delta == 0 {
        return true;
    }
    let a = lambda.powi(edge_delta);
    a >= 1.0 || rng.gen::<f64>() < a
}

/// The compression move for the particle with id `particle`. Returns the
/// applied move, or `None` when nothing moved.
pub fn compression_step<R: Rng + ?Sized>(
    system: &mut ParticleSystem,
    particle: usize,
    params: &DynamicsParams,
    rng: &mut R,
) -> Option<MoveProposal> {
    let from = system.position(particle);
    let (direction, rule) = match params.kernel {
        Kernel::Uniform6 => {
            let d = rng.gen_range(0..6);
            let rule = system.fast_rule(particle, d);
            if !rule.valid {
                return None;
            }
            (d, rule)
        }
        Kernel::UniformValid => {
            let mut valid = [(0usize, Default::default()); 6];
            let mut k = 0;
            for d in 0..6 {
                let rule = system.fast_rule(particle, d);
                if rule.valid {
                    valid[k] = (d, rule);
                    k += 1;
                }
            }
            if k == 0 {
                return None;
            }
            let pick = rng.gen_range(0..k.max(2));
            if pick >= k {
                return None;
            }
            valid[pick]
        }
    };
    let proposal = MoveProposal {
        from,
        to: from.step(direction),
        from_neighbors: rule.from_neighbors,
        to_neighbors: rule.to_neighbors,
    };
    if metropolis_accept(params.lambda, proposal.edge_delta(), rng) {
        system.apply_move(particle, proposal.to);
        Some(proposal)
    } else {
        None
    }
}

/// Light-dependent step: lit particles run the compression move, particles in
/// shadow run it with probability `dim_prob`.
pub fn phototax_step<R: Rng + ?Sized>(
    system: &mut ParticleSystem,
    particle: usize,
    light: &LightField,
    params: &DynamicsParams,
    rng: &mut R,
) -> Option<MoveProposal> {
    if light.is_lit(system, particle) || rng.gen_bool(params.dim_prob_f64()) {
        compression_step(system, particle, params, rng)
    } else {
        None
    }
}

/// One iteration of the chain: a uniformly random particle activates.
pub fn mc_iteration<R: Rng + ?Sized>(
    system: &mut ParticleSystem,
    params: &DynamicsParams,
    light: &LightField,
    rng: &mut R,
) -> Option<MoveProposal> {
    let particle = rng.gen_range(0..system.len());
    match params.mode {
        Mode::CompressionOnly => compression_step(system, particle, params, rng),
        Mode::Phototax => phototax_step(system, particle, light, params, rng),
    }
}

/// Observables at one recorded iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: u64,
    pub centroid_x: f64,
    pub centroid_y: Rational64,
    pub edges: usize,
    pub lit_count: usize,
}

impl Record {
    pub fn observe(t: u64, system: &ParticleSystem, light: &LightField) -> Record {
        Record {
            t,
            centroid_x: system.centroid_x(),
            centroid_y: system.centroid_height(),
            edges: system.edge_count(),
            lit_count: light.lit_count(system),
        }
    }

    pub fn centroid_y_f64(&self) -> f64 {
        *self.centroid_y.numer() as f64 / *self.centroid_y.denom() as f64
    }
}

/// Observables of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: DynamicsParams,
    pub light: LightField,
    pub particles: usize,
    pub initial: String,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn first(&self) -> &Record {
        &self.records[0]
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("a trajectory always holds the t=0 record")
    }

    /// Final minus initial centroid height.
    pub fn height_change(&self) -> Rational64 {
        self.last().centroid_y - self.first().centroid_y
    }
}

/// A chain in progress: configuration, parameters and generator state.
#[derive(Debug, Clone)]
pub struct Simulator {
    system: ParticleSystem,
    params: DynamicsParams,
    light: LightField,
    rng: SimRng,
    iteration: u64,
}

impl Simulator {
    pub fn new(initial: ParticleSystem, params: DynamicsParams, light: LightField) -> Result<Self, DynamicsError> {
        params.validate()?;
        if !initial.is_connected() {
            return Err(DynamicsError::Disconnected);
        }
        Ok(Simulator { rng: seeded_rng(params.seed), system: initial, params, light, iteration: 0 })
    }

    pub fn system(&self) -> &ParticleSystem {
        &self.system
    }

    pub fn params(&self) -> &DynamicsParams {
        &self.params
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn step(&mut self) -> Option<MoveProposal> {
        self.iteration += 1;
        mc_iteration(&mut self.system, &self.params, &self.light, &mut self.rng)
    }

    pub fn advance(&mut self, iterations: u64) {
        for _ in 0..iterations {
            self.step();
        }
    }

    pub fn record(&self) -> Record {
        Record::observe(self.iteration, &self.system, &self.light)
    }

    pub fn into_system(self) -> ParticleSystem {
        self.system
    }
}

/// Runs `iterations` iterations, recording at t=0, every `record_interval`
/// iterations, and at the end. `on_record` sees the configuration at each
/// recorded iteration.
pub fn run_observed(
    initial: ParticleSystem,
    params: DynamicsParams,
    light: LightField,
    iterations: u64,
    record_interval: u64,
    label: &str,
    mut on_record: impl FnMut(u64, &ParticleSystem),
) -> Result<Trajectory, DynamicsError> {
    if record_interval == 0 {
        return Err(DynamicsError::RecordInterval);
    }
    let mut sim = Simulator::new(initial, params, light)?;
    let mut records = vec![sim.record()];
    on_record(0, sim.system());
    while sim.iteration() < iterations {
        let next = (sim.iteration() / record_interval + 1) * record_interval;
        sim.advance(next.min(iterations) - sim.iteration());
        records.push(sim.record());
        on_record(sim.iteration(), sim.system());
    }
    Ok(Trajectory {
        params,
        light,
        particles: sim.system().len(),
        initial: label.to_string(),
        records,
    })
}

pub fn run(
    initial: ParticleSystem,
    params: DynamicsParams,
    light: LightField,
    iterations: u64,
    record_interval: u64,
) -> Result<Trajectory, DynamicsError> {
    let label = format!("n={}", initial.len());
    run_observed(initial, params, light, iterations, record_interval, &label, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(u: i32, v: i32) -> AxialCoord {
        AxialCoord::new(u, v)
    }

    #[test]
    fn params_validation() {
        assert!(DynamicsParams::default().validate().is_ok());
        assert_eq!(
            DynamicsParams::default().with_lambda(0.0).validate(),
            Err(DynamicsError::InvalidLambda(0.0))
        );
        let zero = Rational64::zero();
        assert!(DynamicsParams::default().with_dim_prob(zero).validate().is_err());
        assert!(DynamicsParams::default().with_dim_prob(Rational64::new(5, 4)).validate().is_err());
        assert!(DynamicsParams::default().with_dim_prob(Rational64::one()).validate().is_ok());
    }

    #[test]
    fn kernel_and_mode_parse() {
        assert_eq!("uniform6".parse::<Kernel>(), Ok(Kernel::Uniform6));
        assert_eq!("UNIFORM_VALID".parse::<Kernel>(), Ok(Kernel::UniformValid));
        assert!("x".parse::<Kernel>().is_err());
        assert_eq!("phototax".parse::<Mode>(), Ok(Mode::Phototax));
        assert_eq!(Mode::CompressionOnly.to_string().parse::<Mode>(), Ok(Mode::CompressionOnly));
    }

    #[test]
    fn metropolis_filter_rates() {
        let mut rng = seeded_rng(1);
        assert!((0..1000).all(|_| metropolis_accept(4.0, 0, &mut rng)));
        assert!((0..1000).all(|_| metropolis_accept(4.0, 2, &mut rng)));
        let hits = (0..200_000).filter(|_| metropolis_accept(4.0, -1, &mut rng)).count();
        let p = hits as f64 / 200_000.0;
        // sd = sqrt(0.25*0.75/2e5) ~ 0.00097
        assert!((p - 0.25).abs() < 0.005, "{p}");
    }

    #[test]
    fn lit_pair_particle_always_moves_under_uniform_valid() {
        let params = DynamicsParams::default().with_kernel(Kernel::UniformValid);
        let mut rng = seeded_rng(3);
        let mut hits = [0usize; 2];
        for _ in 0..20_000 {
            let mut s = ParticleSystem::new([c(0, 0), c(0, 1)]).unwrap();
            let m = phototax_step(&mut s, 0, &LightField::ON, &params, &mut rng).expect("lit mover always moves");
            assert_eq!(m.to.twice_height() - m.from.twice_height(), 1);
            hits[(m.to == c(1, 0)) as usize] += 1;
        }
        assert!((hits[0] as f64 / 20_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn occluded_pair_particle_moves_a_quarter_of_the_time() {
        let params = DynamicsParams::default().with_kernel(Kernel::UniformValid);
        let mut rng = seeded_rng(4);
        let trials = 100_000;
        let mut moved = 0;
        for _ in 0..trials {
            let mut s = ParticleSystem::new([c(0, 0), c(0, 1)]).unwrap();
            if let Some(m) = phototax_step(&mut s, 1, &LightField::ON, &params, &mut rng) {
                assert_eq!(m.to.twice_height() - m.from.twice_height(), -1);
                moved += 1;
            }
        }
        let p = moved as f64 / trials as f64;
        // sd ~ 0.0014
        assert!((p - 0.25).abs() < 0.007, "{p}");
    }

    #[test]
    fn single_particle_never_moves() {
        let mut s = ParticleSystem::new([c(0, 0)]).unwrap();
        let mut rng = seeded_rng(5);
        for kernel in [Kernel::Uniform6, Kernel::UniformValid] {
            let params = DynamicsParams::default().with_kernel(kernel);
            for _ in 0..1000 {
                assert!(mc_iteration(&mut s, &params, &LightField::ON, &mut rng).is_none());
            }
        }
        assert_eq!(s.position(0), c(0, 0));
    }

    #[test]
    fn run_records_grid() {
        let params = DynamicsParams::default();
        let t = run(ParticleSystem::hexagon(1), params, LightField::ON, 25, 10).unwrap();
        let ts: Vec<u64> = t.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 10, 20, 25]);
        let t0 = run(ParticleSystem::hexagon(1), params, LightField::ON, 0, 10).unwrap();
        assert_eq!(t0.records.len(), 1);
        assert_eq!(t0.records[0].t, 0);
    }

    #[test]
    fn run_rejects_bad_input() {
        let split = ParticleSystem::new([c(0, 0), c(0, 2)]).unwrap();
        assert_eq!(
            run(split, DynamicsParams::default(), LightField::ON, 1, 1).unwrap_err(),
            DynamicsError::Disconnected
        );
        assert_eq!(
            run(ParticleSystem::hexagon(1), DynamicsParams::default(), LightField::ON, 1, 0).unwrap_err(),
            DynamicsError::RecordInterval
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let params = DynamicsParams::default().with_seed(99);
        let a = run(ParticleSystem::hexagon(2), params, LightField::ON, 20_000, 1000).unwrap();
        let b = run(ParticleSystem::hexagon(2), params, LightField::ON, 20_000, 1000).unwrap();
        assert_eq!(a, b);
        let c = run(ParticleSystem::hexagon(2), params.with_seed(100), LightField::ON, 20_000, 1000).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn cached_observables_track_recounts() {
        let mut rng = seeded_rng(11);
        let mut s = ParticleSystem::line(12).unwrap();
        for kernel in [Kernel::Uniform6, Kernel::UniformValid] {
            let params = DynamicsParams::default().with_kernel(kernel);
            for _ in 0..5000 {
                if mc_iteration(&mut s, &params, &LightField::ON, &mut rng).is_some() {
                    assert_eq!(s.edge_count(), s.recount_edges());
                    assert_eq!(LightField::ON.lit_count(&s), LightField::ON.lit_particles(&s).len());
                    assert_eq!(6 * s.len(), 2 * s.edge_count() + s.boundary_pairs());
                }
            }
        }
        assert_eq!(s.len(), 12);
    }
}
