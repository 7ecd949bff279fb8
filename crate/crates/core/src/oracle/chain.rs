use std::collections::{BTreeMap, HashMap};

use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};

use super::canonical::{canonical_form, enumerate_states, StateClass, SymmetryMode};
use super::scalar::{Bias, Scalar};
use super::OracleError;
use crate::dynamics::exact::{iteration_outcomes, ratio, Activation, StepRule};
use crate::dynamics::{Kernel, Mode};
use crate::lattice::AxialCoord;
use crate::light::LightField;
use crate::system::ParticleSystem;

/// Which chain to build.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub n: usize,
    pub rule: StepRule,
    pub activation: Activation,
    pub light: LightField,
    pub symmetry: SymmetryMode,
}

impl ChainSpec {
    pub fn general(n: usize, kernel: Kernel, mode: Mode, dim_prob: Rational64, symmetry: SymmetryMode) -> Self {
        ChainSpec {
            n,
            rule: StepRule::General { kernel, mode, dim_prob },
            activation: Activation::Uniform,
            light: LightField::ON,
            symmetry,
        }
    }

    /// Light-driven chain with the default shadow probability 1/4, up to
    /// translation and reflection.
    pub fn phototax(n: usize, kernel: Kernel) -> Self {
        Self::general(n, kernel, Mode::Phototax, Rational64::new(1, 4), SymmetryMode::TranslationReflection)
    }

    pub fn with_rule(mut self, rule: StepRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_light(mut self, light: LightField) -> Self {
        self.light = light;
        self
    }
}

/// Exact one-activation transition probabilities between state classes,
/// with the expected height change carried by each transition.
#[derive(Debug, Clone)]
pub struct TransitionMatrix<S> {
    pub states: Vec<StateClass>,
    pub probs: Vec<Vec<S>>,
    pub drift: Vec<Vec<S>>,
    index: HashMap<Vec<AxialCoord>, usize>,
}

fn height_change(from: AxialCoord, to: AxialCoord, n: usize) -> BigRational {
    ratio(to.twice_height() - from.twice_height(), 2 * n as i64)
}

pub fn build_chain<B: Bias>(spec: &ChainSpec, bias: &B) -> Result<TransitionMatrix<B::Value>, OracleError> {
    let states = enumerate_states(spec.n, spec.symmetry)?;
    let index: HashMap<Vec<AxialCoord>, usize> =
        states.iter().enumerate().map(|(i, s)| (s.canonical.clone(), i)).collect();
    let size = states.len();
    let zero = B::Value::zero();
    let mut probs = vec![vec![zero.clone(); size]; size];
    let mut drift = vec![vec![zero; size]; size];
    for (i, state) in states.iter().enumerate() {
        let system = ParticleSystem::new(state.canonical.iter().copied()).expect("enumerated states are valid");
        let mut moved = B::Value::zero();
        for o in iteration_outcomes(&system, spec.rule, &spec.activation, &spec.light)? {
            let p = B::Value::from_rational(&o.weight) * bias.acceptance(o.filter, o.edge_delta);
            let mut after = state.canonical.clone();
            let slot = after.iter().position(|&c| c == o.from).expect("mover belongs to the state");
            after[slot] = o.to;
            let j = *index
                .get(&canonical_form(&after, spec.symmetry))
                .ok_or(OracleError::UnknownState)?;
            let dh = B::Value::from_rational(&height_change(o.from, o.to, spec.n));
            drift[i][j] = drift[i][j].clone() + p.clone() * dh;
            probs[i][j] = probs[i][j].clone() + p.clone();
            moved = moved + p;
        }
        probs[i][i] = probs[i][i].clone() + (B::Value::one() - moved);
    }
    Ok(TransitionMatrix { states, probs, drift, index })
}

impl<S: Scalar> TransitionMatrix<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the class containing `coords`.
    pub fn index_of(&self, coords: &[AxialCoord]) -> Option<usize> {
        let mode = self.states.first()?.mode;
        self.index.get(&canonical_form(coords, mode)).copied()
    }

    pub fn row_sum(&self, i: usize) -> S {
        self.probs[i].iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn is_row_stochastic(&self) -> bool {
        (0..self.len()).all(|i| self.row_sum(i) == S::one())
    }

    /// Expected change in centroid height over one activation from state `i`.
    pub fn one_step_drift(&self, i: usize) -> S {
        self.drift[i].iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    fn advance(&self, dist: &[S]) -> Vec<S> {
        let mut next = vec![S::zero(); self.len()];
        for (i, w) in dist.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (j, p) in self.probs[i].iter().enumerate() {
                if !p.is_zero() {
                    next[j] = next[j].clone() + w.clone() * p.clone();
                }
            }
        }
        next
    }

    /// Distribution over classes after `k` activations from `start`.
    pub fn distribution_after(&self, start: usize, k: usize) -> Vec<S> {
        let mut dist = vec![S::zero(); self.len()];
        dist[start] = S::one();
        for _ in 0..k {
            dist = self.advance(&dist);
        }
        dist
    }

    /// Expected change in centroid height over `k` activations from `start`.
    pub fn expected_drift(&self, start: usize, k: usize) -> S {
        let per_state: Vec<S> = (0..self.len()).map(|i| self.one_step_drift(i)).collect();
        let mut dist = vec![S::zero(); self.len()];
        dist[start] = S::one();
        let mut total = S::zero();
        for step in 0..k {
            for (w, d) in dist.iter().zip(&per_state) {
                total = total + w.clone() * d.clone();
            }
            if step + 1 < k {
                dist = self.advance(&dist);
            }
        }
        total
    }

    /// Positions of nonzero transition probability, row by row.
    fn support(&self) -> Vec<Vec<usize>> {
        self.probs
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(j, _)| j).collect())
            .collect()
    }

    /// Strongly connected components of the transition graph, each sorted,
    /// ordered by smallest member.
    pub fn communication_classes(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let support = self.support();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            let mut stack = vec![i];
            row[i] = true;
            while let Some(a) = stack.pop() {
                for &b in &support[a] {
                    if !row[b] {
                        row[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        let mut assigned = vec![false; n];
        let mut classes = Vec::new();
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
            for &j in &class {
                assigned[j] = true;
            }
            classes.push(class);
        }
        classes
    }

    /// A class is closed when no transition leaves it.
    pub fn is_closed(&self, class: &[usize]) -> bool {
        let support = self.support();
        class.iter().all(|&i| support[i].iter().all(|j| class.contains(j)))
    }

    pub fn is_irreducible(&self) -> bool {
        self.communication_classes().len() == 1
    }
}

impl TransitionMatrix<BigRational> {
    /// The unique stationary distribution, by exact Gaussian elimination.
    pub fn stationary(&self) -> Result<Vec<BigRational>, OracleError> {
        let classes = self.communication_classes();
        if classes.len() != 1 {
            return Err(OracleError::Reducible(classes));
        }
        let n = self.len();
        // rows: (P^T - I) with the last equation replaced by sum(pi) = 1
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..n).map(|j| self.probs[j][i].clone()).collect();
                row[i] -= BigRational::one();
                row.push(BigRational::zero());
                row
            })
            .collect();
        a[n - 1] = vec![BigRational::one(); n + 1];
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(OracleError::Singular)?;
            a.swap(col, pivot);
            let inv = a[col][col].recip();
            for x in a[col].iter_mut() {
                *x *= &inv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in col..=n {
                        let sub = &f * &a[col][c];
                        a[r][c] -= sub;
                    }
                }
            }
        }
        Ok(a.into_iter().map(|row| row[n].clone()).collect())
    }

    /// Pairs `(i, j)` with `π(i)P(i,j) != π(j)P(j,i)`.
    pub fn detailed_balance_violations(&self, pi: &[BigRational]) -> Vec<(usize, usize)> {
        let mut bad = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if &pi[i] * &self.probs[i][j] != &pi[j] * &self.probs[j][i] {
                    bad.push((i, j));
                }
            }
        }
        bad
    }
}

/// Distribution of the move made in one iteration, conditioned on a move
/// happening, keyed by `(from, to)`. Compares chains that differ only in how
/// long they idle.
pub fn conditional_move_distribution<B: Bias>(
    coords: &[AxialCoord],
    rule: StepRule,
    activation: &Activation,
    light: &LightField,
    bias: &B,
) -> Result<BTreeMap<(AxialCoord, AxialCoord), B::Value>, OracleError>
where
    B::Value: std::ops::Div<Output = B::Value>,
{
    let system = ParticleSystem::new(coords.iter().copied())?;
    let mut out: BTreeMap<(AxialCoord, AxialCoord), B::Value> = BTreeMap::new();
    let mut total = B::Value::zero();
    for o in iteration_outcomes(&system, rule, activation, light)? {
        let p = B::Value::from_rational(&o.weight) * bias.acceptance(o.filter, o.edge_delta);
        total = total + p.clone();
        let e = out.entry((o.from, o.to)).or_insert_with(B::Value::zero);
        *e = e.clone() + p;
    }
    if total.is_zero() {
        return Ok(out);
    }
    Ok(out.into_iter().map(|(k, v)| (k, v / total.clone())).collect())
}
