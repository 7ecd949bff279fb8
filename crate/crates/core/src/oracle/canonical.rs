//! Canonical forms of configurations up to translation (and reflection).

use std::collections::BTreeSet;
use std::fmt;

use crate::lattice::AxialCoord;
use crate::light::lit_positions;

use super::OracleError;

/// Largest particle count the enumerator accepts.
pub const MAX_ENUMERATED: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymmetryMode {
    Translation,
    TranslationReflection,
}

impl fmt::Display for SymmetryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryMode::Translation => "translation",
            SymmetryMode::TranslationReflection => "translation+reflection",
        })
    }
}

/// Shift so the leftmost column is `u = 0` and its lowest vertex is `v = 0`,
/// then sort.
pub fn normalize_translation(coords: &[AxialCoord]) -> Vec<AxialCoord> {
    let umin = coords.iter().map(|p| p.u).min().expect("non-empty configuration");
    let vmin = coords.iter().filter(|p| p.u == umin).map(|p| p.v).min().unwrap();
    let mut out: Vec<AxialCoord> = coords.iter().map(|p| p.translate(-umin, -vmin)).collect();
    out.sort_unstable();
    out
}

pub fn canonical_form(coords: &[AxialCoord], mode: SymmetryMode) -> Vec<AxialCoord> {
    let plain = normalize_translation(coords);
    match mode {
        SymmetryMode::Translation => plain,
        SymmetryMode::TranslationReflection => {
            let mirrored: Vec<AxialCoord> = coords.iter().map(|p| p.reflect()).collect();
            plain.min(normalize_translation(&mirrored))
        }
    }
}

/// A configuration class with its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateClass {
    pub canonical: Vec<AxialCoord>,
    pub mode: SymmetryMode,
    pub edges: usize,
}

impl StateClass {
    pub fn of(coords: &[AxialCoord], mode: SymmetryMode) -> Self {
        let canonical = canonical_form(coords, mode);
        let edges = count_edges(&canonical);
        StateClass { canonical, mode, edges }
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn lit_count(&self) -> usize {
        lit_positions(&self.canonical).len()
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.canonical.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

fn count_edges(coords: &[AxialCoord]) -> usize {
    let mut e = 0;
    for (i, a) in coords.iter().enumerate() {
        for b in &coords[i + 1..] {
            e += a.is_adjacent(*b) as usize;
        }
    }
    e
}

/// Every connected configuration of `n` particles, one per class, sorted by
/// canonical form.
pub fn enumerate_states(n: usize, mode: SymmetryMode) -> Result<Vec<StateClass>, OracleError> {
    if !(1..=MAX_ENUMERATED).contains(&n) {
        return Err(OracleError::SizeOutOfRange(n));
    }
    let mut layer: BTreeSet<Vec<AxialCoord>> = BTreeSet::new();
    layer.insert(vec![AxialCoord::ORIGIN]);
    for _ in 1..n {
        let mut next = BTreeSet::new();
        for shape in &layer {
            for p in shape {
                for q in p.neighbors() {
                    if !shape.contains(&q) {
                        let mut grown = shape.clone();
                        grown.push(q);
                        next.insert(canonical_form(&grown, mode));
                    }
                }
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().map(|c| StateClass::of(&c, mode)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn state_counts() {
        use SymmetryMode::*;
        assert_eq!(enumerate_states(1, TranslationReflection).unwrap().len(), 1);
        assert_eq!(enumerate_states(2, TranslationReflection).unwrap().len(), 2);
        assert_eq!(enumerate_states(3, TranslationReflection).unwrap().len(), 7);
        assert_eq!(enumerate_states(2, Translation).unwrap().len(), 3);
        assert_eq!(enumerate_states(3, Translation).unwrap().len(), 11);
        // fixed polyiamond-dual counts (polyhexes): 1, 3, 11, 44, 186, 814
        assert_eq!(enumerate_states(4, Translation).unwrap().len(), 44);
        assert_eq!(enumerate_states(5, Translation).unwrap().len(), 186);
        assert_eq!(enumerate_states(6, Translation).unwrap().len(), 814);
        assert_eq!(enumerate_states(0, Translation), Err(OracleError::SizeOutOfRange(0)));
        assert_eq!(enumerate_states(7, Translation), Err(OracleError::SizeOutOfRange(7)));
    }

    #[test]
    fn canonical_form_is_invariant_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            // random connected blob by accretion
            let size = rng.gen_range(1..=8);
            let mut coords = vec![AxialCoord::ORIGIN];
            while coords.len() < size {
                let base = coords[rng.gen_range(0..coords.len())];
                let q = base.step(rng.gen_range(0..6));
                if !coords.contains(&q) {
                    coords.push(q);
                }
            }
            let (du, dv) = (rng.gen_range(-20..20), rng.gen_range(-20..20));
            let reflect = rng.gen_bool(0.5);
            let moved: Vec<AxialCoord> = coords
                .iter()
                .map(|p| {
                    let p = if reflect { p.reflect() } else { *p };
                    p.translate(du, dv)
                })
                .collect();
            let c = canonical_form(&coords, SymmetryMode::TranslationReflection);
            assert_eq!(canonical_form(&moved, SymmetryMode::TranslationReflection), c);
            assert_eq!(canonical_form(&c, SymmetryMode::TranslationReflection), c);
            if !reflect {
                let t = canonical_form(&coords, SymmetryMode::Translation);
                assert_eq!(canonical_form(&moved, SymmetryMode::Translation), t);
            }
        }
    }

    #[test]
    fn edge_and_lit_counts() {
        let states = enumerate_states(3, SymmetryMode::TranslationReflection).unwrap();
        let triangles = states.iter().filter(|s| s.edges == 3).count();
        assert_eq!(triangles, 1);
        let mut lit: Vec<usize> = states.iter().map(|s| s.lit_count()).collect();
        lit.sort();
        assert_eq!(lit, vec![1, 2, 2, 2, 3, 3, 3]);
    }
}
