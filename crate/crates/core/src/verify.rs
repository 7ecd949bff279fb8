//! Acceptance checks: exact oracle identities, simulation consistency and
//! large-scale behavior. Each check returns a verdict with a one-line detail.

use std::fmt;
use std::time::{Duration, Instant};

use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::exact::{ratio, StepRule};
use crate::dynamics::specialized::three_particle_location_counts;
use crate::dynamics::{mc_iteration, seeded_rng, DynamicsParams, Kernel, Mode};
use crate::io::{simulate, InitialShape, RunConfig};
use crate::lattice::AxialCoord;
use crate::light::LightField;
use crate::metrics::{self, classify, Diffusion, Series};
use crate::oracle::{
    build_chain, report::stationary_check, state_labels, ChainSpec, ExactLambda, InvLambdaPoly, SymbolicLambda,
    TransitionMatrix,
};
use crate::system::{symmetry_violations, ParticleSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict { passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budget = match self.budget {
            Some(b) => format!(" / {}s", b.as_secs()),
            None => String::new(),
        };
        write!(
            f,
            "[{}] C{} {}: {} ({:.2}s{})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            budget
        )
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget: Option<Duration>,
    pub check: fn() -> Verdict,
}

impl Criterion {
    /// Runs the check; exceeding the time budget fails it.
    pub fn run(&self) -> CriterionResult {
        let start = Instant::now();
        let v = (self.check)();
        let elapsed = start.elapsed();
        let late = self.budget.is_some_and(|b| elapsed > b);
        let detail = if late { format!("{} [over time budget]", v.detail) } else { v.detail };
        CriterionResult { id: self.id, name: self.name, passed: v.passed && !late, detail, elapsed, budget: self.budget }
    }
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "two-particle drift", budget: secs(1), check: two_particle_drift },
    Criterion { id: 2, name: "three-particle drift", budget: secs(10), check: three_particle_drift },
    Criterion { id: 3, name: "stationary distribution", budget: secs(30), check: stationary_identity },
    Criterion { id: 4, name: "simulation matches oracle", budget: secs(120), check: simulation_consistency },
    Criterion { id: 5, name: "phototaxing at scale", budget: secs(300), check: phototaxing_at_scale },
    Criterion { id: 6, name: "compression at scale", budget: secs(120), check: compression_at_scale },
    Criterion { id: 7, name: "structural safety", budget: secs(120), check: structural_safety },
    Criterion { id: 8, name: "msd machinery", budget: None, check: msd_machinery },
    Criterion { id: 9, name: "specialized rules", budget: secs(10), check: specialization_equivalence },
];

pub fn criterion(id: u8) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().map(Criterion::run).collect()
}

fn phototax_chain<B: crate::oracle::Bias>(n: usize, bias: &B) -> TransitionMatrix<B::Value> {
    build_chain(&ChainSpec::phototax(n, Kernel::UniformValid), bias).expect("small chains build")
}

pub fn two_particle_drift() -> Verdict {
    let lambda = ExactLambda::integer(4);
    let chain = phototax_chain(2, &lambda);
    let sym = phototax_chain(2, &SymbolicLambda);
    let (Some(shaded), Some(exposed)) = (
        (0..2).find(|&i| chain.states[i].lit_count() == 1),
        (0..2).find(|&i| chain.states[i].lit_count() == 2),
    ) else {
        return Verdict::new(false, "expected one shaded and one exposed state");
    };
    let d1 = (chain.one_step_drift(shaded), chain.one_step_drift(exposed));
    let d2 = (chain.expected_drift(shaded, 2), chain.expected_drift(exposed, 2));
    let sym_ok = sym.one_step_drift(shaded) == InvLambdaPoly::constant(ratio(3, 32))
        && sym.one_step_drift(exposed).is_zero();
    let ok = d1.0 == ratio(3, 32)
        && d1.1.is_zero()
        && d2.0 >= ratio(3, 64)
        && d2.1 >= ratio(3, 64)
        && sym_ok;
    Verdict::new(
        ok,
        format!(
            "one step: shaded {} exposed {}; two steps: shaded {} exposed {} (need >= 3/64); independent of lambda: {}",
            d1.0, d1.1, d2.0, d2.1, sym_ok
        ),
    )
}

pub fn three_particle_drift() -> Verdict {
    let sym = phototax_chain(3, &SymbolicLambda);
    let four = ratio(4, 1);
    let mut ones: Vec<BigRational> = (0..sym.len()).map(|i| sym.one_step_drift(i).eval(&four)).collect();
    ones.sort();
    let want: Vec<BigRational> =
        [(0, 1), (0, 1), (0, 1), (0, 1), (1, 48), (1, 24), (1, 24)].iter().map(|&(a, b)| ratio(a, b)).collect();
    let multiset_ok = sym.len() == 7 && ones == want && (0..7).all(|i| sym.one_step_drift(i).degree() <= Some(0));
    let target = InvLambdaPoly::new(vec![ratio(1, 288), ratio(1, 192)]);
    let labels = state_labels(&sym);
    let cd: Vec<usize> = labels
        .as_ref()
        .map(|l| (0..7).filter(|&i| l[i] == "c" || l[i] == "d").collect())
        .unwrap_or_default();
    let cd_ok = cd.len() == 2
        && cd.iter().all(|&i| {
            let exact = phototax_chain(3, &ExactLambda::integer(4)).expected_drift(i, 3);
            sym.expected_drift(i, 3) == target && exact == target.eval(&four)
        });
    let mut bound_ok = true;
    let mut mins = Vec::new();
    for l in [ratio(7, 2), ratio(4, 1)] {
        let chain = phototax_chain(3, &ExactLambda(l.clone()));
        let min = (0..7).map(|i| chain.expected_drift(i, 3)).min().unwrap();
        let bound = (ratio(64, 1) * &l).recip();
        bound_ok &= min >= bound;
        mins.push(format!("lambda={l}: min {min} vs {bound}"));
    }
    Verdict::new(
        multiset_ok && cd_ok && bound_ok,
        format!(
            "{} states, one-step drifts {{{}}}; (c)/(d) three-step = {} ({}); {}",
            sym.len(),
            ones.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
            cd.first().map(|&i| sym.expected_drift(i, 3).to_string()).unwrap_or_else(|| "unlabeled".into()),
            if cd_ok { "exact" } else { "mismatch" },
            mins.join("; ")
        ),
    )
}

pub fn stationary_identity() -> Verdict {
    match stationary_check(3, &ExactLambda::integer(4)) {
        Ok(s) => Verdict::new(
            s.proportional && s.max_deviation <= 1e-9 && s.detailed_balance,
            format!(
                "{} classes, proportional to 4^edges: {}, max deviation {:e}, detailed balance: {}",
                s.classes, s.proportional, s.max_deviation, s.detailed_balance
            ),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

/// Empirical one-activation height drift from `state`: mean and standard error.
pub fn empirical_drift(state: &ParticleSystem, params: &DynamicsParams, samples: u64) -> (f64, f64) {
    let mut s = state.clone();
    let mut rng = seeded_rng(params.seed);
    let n2 = 2.0 * s.len() as f64;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        if let Some(m) = mc_iteration(&mut s, params, &LightField::ON, &mut rng) {
            let dh = (m.to.twice_height() - m.from.twice_height()) as f64 / n2;
            sum += dh;
            sq += dh * dh;
            let p = s.particle_at(m.to).expect("moved particle");
            s.apply_move(p, m.from);
        }
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn simulation_consistency() -> Verdict {
    const SAMPLES: u64 = 1_000_000;
    let lambda = ExactLambda::integer(4);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut checked = 0;
    for kernel in [Kernel::UniformValid, Kernel::Uniform6] {
        for n in [2, 3] {
            let chain = build_chain(&ChainSpec::phototax(n, kernel), &lambda).expect("small chains build");
            for (i, class) in chain.states.iter().enumerate() {
                let exact = chain.one_step_drift(i).to_f64().unwrap();
                let state = ParticleSystem::new(class.canonical.iter().copied()).unwrap();
                let params = DynamicsParams::default().with_kernel(kernel).with_seed(1000 + checked as u64);
                let (mean, se) = empirical_drift(&state, &params, SAMPLES);
                let z = if se > 0.0 { (mean - exact).abs() / se } else if mean == exact { 0.0 } else { f64::INFINITY };
                worst = worst.max(z);
                if z > 4.0 {
                    failures.push(format!("{kernel} n={n} {class}: {mean:.6} vs {exact:.6}"));
                }
                checked += 1;
            }
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "{checked} states x {SAMPLES} activations, worst deviation {worst:.2} standard errors{}",
            if failures.is_empty() { String::new() } else { format!("; off: {}", failures.join(", ")) }
        ),
    )
}

fn ensemble(cfg: &RunConfig) -> Vec<Series> {
    simulate(cfg, |_, _, _| {}).expect("valid configuration").iter().map(Series::from).collect()
}

pub fn phototaxing_at_scale() -> Verdict {
    let cfg = RunConfig {
        initial: InitialShape::Hexagon(5),
        iterations: 30_000_000,
        record_interval: 30_000_000,
        trials: 10,
        ..RunConfig::default()
    };
    let trials = ensemble(&cfg);
    let h = metrics::height_stats(&trials);
    let up = trials.iter().filter(|s| s.net_displacement().1 > 0.0).count();
    Verdict::new(
        h.mean > 0.0 && up >= 8,
        format!(
            "91 particles, 10 seeds x 30M iterations: mean height change {:.3}, {up}/10 seeds higher, lateral {}",
            h.mean,
            metrics::lateral_stats(&trials)
        ),
    )
}

pub fn compression_at_scale() -> Verdict {
    let cfg = RunConfig {
        initial: InitialShape::Line(100),
        mode: Mode::CompressionOnly,
        iterations: 5_000_000,
        record_interval: 5_000_000,
        trials: 10,
        ..RunConfig::default()
    };
    let runs = simulate(&cfg, |_, _, _| {}).expect("valid configuration");
    let edges: Vec<usize> = runs.iter().map(|t| t.last().edges).collect();
    let mean = edges.iter().sum::<usize>() as f64 / edges.len() as f64;
    let need = 1.8 * 99.0;
    Verdict::new(mean >= need, format!("mean final edges {mean:.1} (need >= {need:.1}), per seed {edges:?}"))
}

/// Random connected hole-free blob of `n` particles.
fn random_blob(n: usize, rng: &mut ChaCha8Rng) -> ParticleSystem {
    loop {
        let mut coords = vec![AxialCoord::ORIGIN];
        while coords.len() < n {
            let base = coords[rng.gen_range(0..coords.len())];
            let q = base.step(rng.gen_range(0..6));
            if !coords.contains(&q) {
                coords.push(q);
            }
        }
        let s = ParticleSystem::new(coords).unwrap();
        if !s.has_hole() {
            return s;
        }
    }
}

pub fn structural_safety() -> Verdict {
    const MOVES: u64 = 1_000_000;
    const CHUNK: u64 = 25_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut accepted, mut broken) = (0u64, Vec::new());
    let mut done = 0;
    while done < MOVES {
        let lambda = [1.0, 4.0, 10.0][rng.gen_range(0..3)];
        let kernel = [Kernel::Uniform6, Kernel::UniformValid][rng.gen_range(0..2)];
        let mode = [Mode::CompressionOnly, Mode::Phototax][rng.gen_range(0..2)];
        let params = DynamicsParams { lambda, dim_prob: Rational64::new(1, 4), kernel, mode, seed: rng.gen() };
        let n = rng.gen_range(2..=24);
        let mut s = random_blob(n, &mut rng);
        let mut sim_rng = seeded_rng(params.seed);
        for _ in 0..CHUNK {
            if mc_iteration(&mut s, &params, &LightField::ON, &mut sim_rng).is_some() {
                accepted += 1;
                if !s.is_connected() || s.has_hole() || s.edge_count() != s.recount_edges() {
                    broken.push(format!("{kernel} {mode} lambda={lambda} n={n}"));
                    break;
                }
            }
        }
        done += CHUNK;
    }
    let asym = symmetry_violations();
    Verdict::new(
        broken.is_empty() && asym.is_empty(),
        format!(
            "{done} iterations, {accepted} accepted moves checked, {} broken; {} of 1536 neighborhood patterns asymmetric",
            broken.len(),
            asym.len()
        ),
    )
}

fn synthetic_checks() -> (bool, String) {
    let lags: Vec<u64> = (1..=10).collect();
    let curve: Vec<f64> = lags.iter().map(|&t| 2.0 * (t as f64).powf(1.3)).collect();
    let (g, c) = metrics::fit_gamma(&lags, &curve, (1, 10)).unwrap();
    let exact_ok = (g - 1.3).abs() < 1e-10 && (c - 2f64.ln()).abs() < 1e-10;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid: Vec<u64> = (0..=2000).collect();
    let walks: Vec<Series> = (0..200)
        .map(|_| {
            let mut p = (0.0, 0.0);
            let pos = grid
                .iter()
                .map(|&k| {
                    if k > 0 {
                        let (x, y) = AxialCoord::ORIGIN.step(rng.gen_range(0..6)).embed();
                        p = (p.0 + x, p.1 + y);
                    }
                    p
                })
                .collect();
            Series::new(grid.clone(), pos)
        })
        .collect();
    let walk = metrics::msd(&walks, None).map(|m| m.gamma).unwrap_or(f64::NAN);

    let ballistic: Vec<Series> = (0..50)
        .map(|_| {
            let v: (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Series::new(grid.clone(), grid.iter().map(|&k| (v.0 * k as f64, v.1 * k as f64)).collect())
        })
        .collect();
    let ball = metrics::msd(&ballistic, None).map(|m| m.gamma).unwrap_or(f64::NAN);
    let ok = exact_ok && (walk - 1.0).abs() <= 0.1 && (ball - 2.0).abs() <= 0.05;
    (ok, format!("power law gamma {g:.12}, random walk {walk:.3}, ballistic {ball:.4}"))
}

/// The 91-particle light-driven ensemble behind the msd criterion.
pub fn phototax_msd_config() -> RunConfig {
    RunConfig {
        initial: InitialShape::Hexagon(5),
        iterations: 30_000_000,
        record_interval: 100_000,
        trials: 30,
        ..RunConfig::default()
    }
}

pub fn msd_machinery() -> Verdict {
    let (synthetic_ok, synthetic) = synthetic_checks();
    let trials = ensemble(&phototax_msd_config());
    let (gamma_ok, ensemble_detail) = match metrics::msd(&trials, None) {
        Ok(m) => (
            classify(m.gamma) == Diffusion::Superdiffusive,
            format!(
                "phototax ensemble {} ({}), success +y {}",
                m.summary_line(),
                m.classification(),
                metrics::success_rate(&trials, metrics::Axis::PlusY).unwrap()
            ),
        ),
        Err(e) => (false, format!("phototax ensemble: {e}")),
    };
    Verdict::new(synthetic_ok && gamma_ok, format!("{synthetic}; {ensemble_detail}"))
}

pub fn specialization_equivalence() -> Verdict {
    let dim = Rational64::new(1, 4);
    let general = |n| phototax_chain(n, &SymbolicLambda);
    let special = |n, rule| {
        build_chain(&ChainSpec::phototax(n, Kernel::UniformValid).with_rule(rule), &SymbolicLambda).unwrap()
    };
    let (g2, s2) = (general(2), special(2, StepRule::TwoParticle { dim_prob: dim }));
    let two_ok = g2.probs == s2.probs && g2.drift == s2.drift;
    let (g3, s3) = (general(3), special(3, StepRule::ThreeParticle { dim_prob: dim }));
    let mismatched: Vec<usize> =
        (0..g3.len()).filter(|&i| g3.probs[i] != s3.probs[i] || g3.drift[i] != s3.drift[i]).collect();
    let crowded: Vec<String> = g3
        .states
        .iter()
        .filter_map(|c| {
            let s = ParticleSystem::new(c.canonical.iter().copied()).unwrap();
            let counts = three_particle_location_counts(&s).unwrap();
            counts.iter().any(|&k| k > 2).then(|| format!("{c} {counts:?}"))
        })
        .collect();
    Verdict::new(
        two_ok && mismatched.is_empty(),
        format!(
            "two particles identical: {two_ok}; three particles: {}/{} states identical; particles with more than 2 valid locations: {}",
            g3.len() - mismatched.len(),
            g3.len(),
            if crowded.is_empty() { "none".to_string() } else { crowded.join("; ") }
        ),
    )
}
