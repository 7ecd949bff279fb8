//! Point light sources below the configuration, shining straight up.
//!
//! Every column has a source underneath it (the sources form a jagged line at
//! heights 0 and -1/2 relative to the lattice). A ray is sensed only by the
//! first particle it meets, i.e. the lowest particle in the column.

use std::collections::{BTreeMap, BTreeSet};

use crate::lattice::AxialCoord;
use crate::system::ParticleSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LightField {
    pub enabled: bool,
}

impl Default for LightField {
    fn default() -> Self {
        LightField { enabled: true }
    }
}

impl LightField {
    pub const ON: LightField = LightField { enabled: true };
    pub const OFF: LightField = LightField { enabled: false };

    /// Whether particle `particle` senses light. Every particle counts as lit
    /// when the field is disabled.
    #[inline]
    pub fn is_lit(&self, system: &ParticleSystem, particle: usize) -> bool {
        !self.enabled || system.is_lowest_in_column(particle)
    }

    /// Number of lit particles.
    #[inline]
    pub fn lit_count(&self, system: &ParticleSystem) -> usize {
        if self.enabled {
            system.occupied_columns()
        } else {
            system.len()
        }
    }

    /// The set of lit particles, computed from positions alone.
    pub fn lit_particles(&self, system: &ParticleSystem) -> BTreeSet<AxialCoord> {
        if !self.enabled {
            return system.coord_set();
        }
        lit_positions(system.particles())
    }
}

/// Lowest particle of each occupied column.
pub fn lit_positions(coords: &[AxialCoord]) -> BTreeSet<AxialCoord> {
    let mut lowest: BTreeMap<i32, i32> = BTreeMap::new();
    for p in coords {
        lowest.entry(p.u).and_modify(|v| *v = (*v).min(p.v)).or_insert(p.v);
    }
    lowest.into_iter().map(|(u, v)| AxialCoord::new(u, v)).collect()
}

pub fn lit_particles(system: &ParticleSystem) -> BTreeSet<AxialCoord> {
    LightField::ON.lit_particles(system)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(coords: &[(i32, i32)]) -> ParticleSystem {
        ParticleSystem::new(coords.iter().map(|&c| c.into())).unwrap()
    }

    fn set(coords: &[(i32, i32)]) -> BTreeSet<AxialCoord> {
        coords.iter().map(|&c| c.into()).collect()
    }

    #[test]
    fn vertical_pair_occludes() {
        assert_eq!(lit_particles(&sys(&[(0, 0), (0, 1)])), set(&[(0, 0)]));
    }

    #[test]
    fn diagonal_pair_both_exposed() {
        assert_eq!(lit_particles(&sys(&[(0, 0), (1, 0)])), set(&[(0, 0), (1, 0)]));
    }

    #[test]
    fn single_particle_lit() {
        assert_eq!(lit_particles(&sys(&[(4, 4)])), set(&[(4, 4)]));
    }

    #[test]
    fn disabled_field_lights_everyone() {
        let s = sys(&[(0, 0), (0, 1), (0, 2)]);
        assert_eq!(LightField::OFF.lit_particles(&s).len(), 3);
        assert_eq!(LightField::OFF.lit_count(&s), 3);
        assert!((0..3).all(|i| LightField::OFF.is_lit(&s, i)));
    }

    #[test]
    fn lit_count_is_number_of_columns_and_matches_fast_path() {
        let s = ParticleSystem::hexagon(3);
        let lit = lit_particles(&s);
        assert_eq!(lit.len(), 7);
        assert_eq!(LightField::ON.lit_count(&s), 7);
        for (i, p) in s.particles().iter().enumerate() {
            assert_eq!(LightField::ON.is_lit(&s, i), lit.contains(p));
        }
    }

    #[test]
    fn translation_and_reflection_equivariance() {
        let coords = [(0, 0), (0, 1), (1, 0), (1, 1), (-1, 2), (2, -1)];
        let s = sys(&coords);
        let lit = lit_particles(&s);
        let moved = sys(&coords.map(|(u, v)| (u + 3, v - 5)));
        let expect: BTreeSet<_> = lit.iter().map(|p| p.translate(3, -5)).collect();
        assert_eq!(lit_particles(&moved), expect);
        let mirrored = ParticleSystem::new(s.particles().iter().map(|p| p.reflect())).unwrap();
        let expect: BTreeSet<_> = lit.iter().map(|p| p.reflect()).collect();
        assert_eq!(lit_particles(&mirrored), expect);
    }
}
