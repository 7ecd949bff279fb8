//! Structured text report over a small state space.

use std::fmt;

use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};

use super::canonical::{StateClass, SymmetryMode};
use super::chain::{build_chain, ChainSpec, TransitionMatrix};
use super::scalar::{ExactLambda, InvLambdaPoly, SymbolicLambda};
use super::OracleError;
use crate::dynamics::exact::{ratio, StepRule};
use crate::dynamics::specialized::three_particle_location_counts;
use crate::dynamics::{Kernel, Mode};
use crate::system::ParticleSystem;

/// Longest horizon (in activations) reported per state.
pub const REPORT_STEPS: usize = 3;

/// Names for the classes of the two- and three-particle light-driven chains.
///
/// Two particles: `1` when both are lit, `2` when one shades the other.
/// Three particles, from the symbolic chain: `e` has one-step drift 1/48;
/// `f`/`g` have 1/24 with one/two lit particles; among the zero-drift states
/// `a` has two-step drift 1/(64λ), `b` has 1/96, and the two remaining ones
/// are `c`, `d` in canonical order. Returns `None` when the drifts do not
/// have this shape.
pub fn state_labels(chain: &TransitionMatrix<InvLambdaPoly>) -> Option<Vec<String>> {
    let n = chain.states.first()?.len();
    let constant = |a: i64, b: i64| InvLambdaPoly::constant(ratio(a, b));
    match n {
        2 => chain
            .states
            .iter()
            .map(|s| match s.lit_count() {
                2 => Some("1".to_string()),
                1 => Some("2".to_string()),
                _ => None,
            })
            .collect(),
        3 if chain.len() == 7 => {
            let mut labels: Vec<Option<String>> = vec![None; 7];
            let mut zero_flat = Vec::new();
            for (i, state) in chain.states.iter().enumerate() {
                let d1 = chain.one_step_drift(i);
                let label = if d1 == constant(1, 48) {
                    "e"
                } else if d1 == constant(1, 24) {
                    match state.lit_count() {
                        1 => "f",
                        2 => "g",
                        _ => return None,
                    }
                } else if d1.is_zero() {
                    let d2 = chain.expected_drift(i, 2);
                    if d2 == InvLambdaPoly::monomial(ratio(1, 64), 1) {
                        "a"
                    } else if d2 == constant(1, 96) {
                        "b"
                    } else if d2.is_zero() {
                        zero_flat.push(i);
                        continue;
                    } else {
                        return None;
                    }
                } else {
                    return None;
                };
                labels[i] = Some(label.to_string());
            }
            if zero_flat.len() != 2 {
                return None;
            }
            labels[zero_flat[0]] = Some("c".into());
            labels[zero_flat[1]] = Some("d".into());
            let out: Option<Vec<String>> = labels.into_iter().collect();
            let mut sorted = out.clone()?;
            sorted.sort();
            (sorted == ["a", "b", "c", "d", "e", "f", "g"]).then_some(out?)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateReport {
    pub label: Option<String>,
    pub class: StateClass,
    pub lit: usize,
    /// Expected height change after 1..=REPORT_STEPS activations at the report's λ.
    pub drifts: Vec<BigRational>,
    /// The same drifts as polynomials in 1/λ.
    pub symbolic: Vec<InvLambdaPoly>,
    /// One-step drift under the six-direction kernel, for comparison.
    pub uniform6_drift: BigRational,
    /// Valid locations per particle (three-particle systems only).
    pub location_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryCheck {
    pub n: usize,
    pub classes: usize,
    pub proportional: bool,
    pub detailed_balance: bool,
    pub max_deviation: f64,
}

/// Stationary vector of the compression chain (six-direction kernel, classes
/// up to translation) against the weights `λ^edges`.
pub fn stationary_check(n: usize, lambda: &ExactLambda) -> Result<StationaryCheck, OracleError> {
    let spec = ChainSpec::general(n, Kernel::Uniform6, Mode::CompressionOnly, Rational64::one(), SymmetryMode::Translation);
    let chain = build_chain(&spec, lambda)?;
    let pi = chain.stationary()?;
    let weights: Vec<BigRational> = chain
        .states
        .iter()
        .map(|s| (0..s.edges).fold(BigRational::one(), |acc, _| acc * &lambda.0))
        .collect();
    let total: BigRational = weights.iter().cloned().sum();
    let target: Vec<BigRational> = weights.into_iter().map(|w| w / &total).collect();
    let max_deviation = pi
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).to_f64().unwrap_or(f64::INFINITY).abs())
        .fold(0.0, f64::max);
    Ok(StationaryCheck {
        n,
        classes: chain.len(),
        proportional: pi == target,
        detailed_balance: chain.detailed_balance_violations(&pi).is_empty(),
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub lambda: BigRational,
    pub min_drift: BigRational,
    pub bound: BigRational,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.min_drift >= self.bound
    }

    pub fn holds_strictly(&self) -> bool {
        self.min_drift > self.bound
    }
}

/// λ values the three-step lower bound is evaluated at: below, at and
/// between the two thresholds 3 and 2+√2, and above.
pub fn bound_lambdas() -> Vec<BigRational> {
    [(3, 1), (13, 4), (17, 5), (3414, 1000), (7, 2), (4, 1), (10, 1)]
        .iter()
        .map(|&(a, b)| ratio(a, b))
        .collect()
}

/// Minimum three-step drift over all states against `1/(64λ)`.
pub fn three_step_bound(chain: &TransitionMatrix<InvLambdaPoly>, lambda: &BigRational) -> BoundCheck {
    let min_drift = (0..chain.len())
        .map(|i| chain.expected_drift(i, 3).eval(lambda))
        .min()
        .unwrap_or_else(BigRational::zero);
    BoundCheck { lambda: lambda.clone(), min_drift, bound: (ratio(64, 1) * lambda).recip() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    pub lambda: BigRational,
    pub dim_prob: Rational64,
    pub states: Vec<StateReport>,
    pub classes: Vec<(Vec<usize>, bool)>,
    pub specialized_matches: Option<bool>,
    pub stationary: Option<StationaryCheck>,
    pub bounds: Vec<BoundCheck>,
    /// Two-activation probabilities from the flat states `c`, `d` into `e`
    /// and `g` (three particles, labeled chains only).
    pub reach: Vec<Reach>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reach {
    pub from: String,
    pub to: String,
    pub steps: usize,
    pub probability: InvLambdaPoly,
}

/// Probability of sitting in each labeled `to` state after `steps`
/// activations from each labeled `from` state.
pub fn reach_probabilities(
    chain: &TransitionMatrix<InvLambdaPoly>,
    labels: &[String],
    from: &[&str],
    to: &[&str],
    steps: usize,
) -> Vec<Reach> {
    let find = |l: &str| labels.iter().position(|x| x == l);
    let mut out = Vec::new();
    for f in from {
        let Some(i) = find(f) else { continue };
        let dist = chain.distribution_after(i, steps);
        for t in to {
            if let Some(j) = find(t) {
                out.push(Reach { from: f.to_string(), to: t.to_string(), steps, probability: dist[j].clone() });
            }
        }
    }
    out
}

/// Full report for `n` particles under the light-driven chain with the
/// valid-target kernel, at exact `lambda` (λ ≥ 1).
pub fn oracle_report(n: usize, lambda: &BigRational, dim_prob: Rational64) -> Result<OracleReport, OracleError> {
    let spec = ChainSpec::general(n, Kernel::UniformValid, Mode::Phototax, dim_prob, SymmetryMode::TranslationReflection);
    let exact = build_chain(&spec, &ExactLambda(lambda.clone()))?;
    let symbolic = build_chain(&spec, &SymbolicLambda)?;
    let six = build_chain(
        &ChainSpec { rule: StepRule::General { kernel: Kernel::Uniform6, mode: Mode::Phototax, dim_prob }, ..spec.clone() },
        &ExactLambda(lambda.clone()),
    )?;
    let labels = state_labels(&symbolic);
    let states = exact
        .states
        .iter()
        .enumerate()
        .map(|(i, class)| {
            let location_counts = (n == 3).then(|| {
                let s = ParticleSystem::new(class.canonical.iter().copied()).expect("valid state");
                three_particle_location_counts(&s).expect("three particles")
            });
            StateReport {
                label: labels.as_ref().map(|l| l[i].clone()),
                class: class.clone(),
                lit: class.lit_count(),
                drifts: (1..=REPORT_STEPS).map(|k| exact.expected_drift(i, k)).collect(),
                symbolic: (1..=REPORT_STEPS).map(|k| symbolic.expected_drift(i, k)).collect(),
                uniform6_drift: six.one_step_drift(i),
                location_counts,
            }
        })
        .collect();
    let classes = exact
        .communication_classes()
        .into_iter()
        .map(|c| {
            let closed = exact.is_closed(&c);
            (c, closed)
        })
        .collect();
    let specialized_matches = match n {
        2 => Some(StepRule::TwoParticle { dim_prob }),
        3 => Some(StepRule::ThreeParticle { dim_prob }),
        _ => None,
    }
    .map(|rule| -> Result<bool, OracleError> {
        let special = build_chain(&ChainSpec { rule, ..spec.clone() }, &SymbolicLambda)?;
        Ok(special.probs == symbolic.probs && special.drift == symbolic.drift)
    })
    .transpose()?;
    let stationary = if n <= 4 { Some(stationary_check(n, &ExactLambda(lambda.clone()))?) } else { None };
    let reach = match (&labels, n) {
        (Some(l), 3) => reach_probabilities(&symbolic, l, &["c", "d"], &["e", "g"], 2),
        _ => Vec::new(),
    };
    let bounds = if n == 3 { bound_lambdas().iter().map(|l| three_step_bound(&symbolic, l)).collect() } else { Vec::new() };
    Ok(OracleReport { n, lambda: lambda.clone(), dim_prob, states, classes, specialized_matches, stationary, bounds, reach })
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "oracle n={} lambda={} dim_prob={} kernel=uniform_valid mode=phototax symmetry=translation+reflection",
            self.n, self.lambda, self.dim_prob
        )?;
        writeln!(f, "states={}", self.states.len())?;
        for (i, s) in self.states.iter().enumerate() {
            write!(
                f,
                "state index={} label={} canonical={} edges={} lit={}",
                i,
                s.label.as_deref().unwrap_or("-"),
                s.class,
                s.class.edges,
                s.lit
            )?;
            for (k, d) in s.drifts.iter().enumerate() {
                write!(f, " drift{}={}", k + 1, d)?;
            }
            for (k, d) in s.symbolic.iter().enumerate() {
                write!(f, " drift{}_symbolic={}", k + 1, d)?;
            }
            write!(f, " drift1_uniform6={}", s.uniform6_drift)?;
            if let Some(c) = &s.location_counts {
                let c: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, " valid_locations={}", c.join(","))?;
            }
            writeln!(f)?;
        }
        for (c, closed) in &self.classes {
            let members: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            writeln!(f, "communication_class members={} closed={}", members.join(","), closed)?;
        }
        if let Some(m) = self.specialized_matches {
            writeln!(f, "specialized_rule_matches={m}")?;
        }
        if let Some(s) = &self.stationary {
            writeln!(
                f,
                "stationary chain=compression kernel=uniform6 symmetry=translation n={} classes={} proportional_to_lambda_pow_edges={} detailed_balance={} max_deviation={:e}",
                s.n, s.classes, s.proportional, s.detailed_balance, s.max_deviation
            )?;
        }
        for r in &self.reach {
            writeln!(f, "reach from={} to={} steps={} probability={}", r.from, r.to, r.steps, r.probability)?;
        }
        for b in &self.bounds {
            writeln!(
                f,
                "three_step_bound lambda={} min_drift3={} bound={} holds={} holds_strictly={}",
                b.lambda,
                b.min_drift,
                b.bound,
                b.holds(),
                b.holds_strictly()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_particle_labels_are_complete() {
        let spec = ChainSpec::phototax(3, Kernel::UniformValid);
        let chain = build_chain(&spec, &SymbolicLambda).unwrap();
        let labels = state_labels(&chain).expect("drift pattern matches");
        for (i, l) in labels.iter().enumerate() {
            let lit = chain.states[i].lit_count();
            match l.as_str() {
                "f" => assert_eq!(lit, 1),
                "a" | "g" => assert_eq!(lit, 2),
                "b" | "c" | "d" => assert_eq!(lit, 3),
                _ => {}
            }
        }
    }

    #[test]
    fn report_mentions_exact_values() {
        let r = oracle_report(3, &ratio(4, 1), Rational64::new(1, 4)).unwrap();
        let text = r.to_string();
        assert!(text.contains("drift1=1/48"));
        assert!(text.contains("drift1=1/24"));
        assert!(text.contains("specialized_rule_matches=true"));
        assert_eq!(r.specialized_matches, Some(true));
    }

    #[test]
    fn uniform6_kernel_labels_fail_gracefully() {
        let spec = ChainSpec::phototax(3, Kernel::Uniform6);
        let chain = build_chain(&spec, &SymbolicLambda).unwrap();
        // different chain, different drifts: no labeling claimed
        assert!(state_labels(&chain).is_none());
    }
}
