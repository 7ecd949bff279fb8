//! Triangular lattice in axial coordinates with one lattice axis vertical.
//!
//! A vertex `(u, v)` sits at `x = u·√3/2`, `y = v + u/2`. Every lattice edge
//! has length 1. Vertical neighbors differ in `y` by 1, the four diagonal
//! neighbors by 1/2. Light travels along the vertical axis, so two vertices
//! share a light ray exactly when they share a column `u`.

use std::fmt;

use num_rational::Rational64;

/// Half of √3, the horizontal spacing between adjacent columns.
pub const COLUMN_SPACING: f64 = 0.866_025_403_784_438_6;

/// Neighbor offsets in the fixed order used everywhere in the crate:
/// up, down, upper-right, lower-left, lower-right, upper-left.
pub const DIRECTIONS: [(i32, i32); 6] = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, -1), (-1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AxialCoord {
    pub u: i32,
    pub v: i32,
}

impl AxialCoord {
    pub const ORIGIN: AxialCoord = AxialCoord { u: 0, v: 0 };

    #[inline]
    pub const fn new(u: i32, v: i32) -> Self {
        AxialCoord { u, v }
    }

    /// The six neighbors in [`DIRECTIONS`] order.
    pub fn neighbors(self) -> [AxialCoord; 6] {
        DIRECTIONS.map(|(du, dv)| self.offset(du, dv))
    }

    #[inline]
    pub const fn offset(self, du: i32, dv: i32) -> Self {
        AxialCoord { u: self.u + du, v: self.v + dv }
    }

    #[inline]
    pub fn step(self, direction: usize) -> Self {
        let (du, dv) = DIRECTIONS[direction];
        self.offset(du, dv)
    }

    pub fn is_adjacent(self, other: AxialCoord) -> bool {
        let d = (other.u - self.u, other.v - self.v);
        DIRECTIONS.contains(&d)
    }

    /// Index into [`DIRECTIONS`] of the step from `self` to `other`, if adjacent.
    pub fn direction_to(self, other: AxialCoord) -> Option<usize> {
        let d = (other.u - self.u, other.v - self.v);
        DIRECTIONS.iter().position(|&x| x == d)
    }

    /// The column this vertex belongs to; equal columns share a light ray.
    #[inline]
    pub const fn column(self) -> i32 {
        self.u
    }

    /// Exact height `v + u/2`.
    pub fn height(self) -> Rational64 {
        Rational64::new(self.twice_height(), 2)
    }

    /// `2·height`, an integer. Used wherever heights are summed in bulk.
    #[inline]
    pub const fn twice_height(self) -> i64 {
        2 * self.v as i64 + self.u as i64
    }

    /// Euclidean embedding `(x, y)`.
    pub fn embed(self) -> (f64, f64) {
        (self.u as f64 * COLUMN_SPACING, self.v as f64 + self.u as f64 / 2.0)
    }

    /// Mirror image across the vertical axis through the origin: `(u, v) -> (-u, v + u)`.
    /// Preserves heights and maps columns to columns.
    #[inline]
    pub const fn reflect(self) -> Self {
        AxialCoord { u: -self.u, v: self.v + self.u }
    }

    #[inline]
    pub const fn translate(self, du: i32, dv: i32) -> Self {
        self.offset(du, dv)
    }
}

impl fmt::Display for AxialCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.u, self.v)
    }
}

impl From<(i32, i32)> for AxialCoord {
    fn from((u, v): (i32, i32)) -> Self {
        AxialCoord { u, v }
    }
}

pub fn neighbors(c: AxialCoord) -> [AxialCoord; 6] {
    c.neighbors()
}

pub fn height(c: AxialCoord) -> Rational64 {
    c.height()
}

pub fn column(c: AxialCoord) -> i32 {
    c.column()
}

#[cfg(test)]
mod tests {
    use num_traits::Signed;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(u: i32, v: i32) -> AxialCoord {
        AxialCoord::new(u, v)
    }

    #[test]
    fn origin_neighbors_in_documented_order() {
        let n = neighbors(AxialCoord::ORIGIN);
        assert_eq!(n, [c(0, 1), c(0, -1), c(1, 0), c(-1, 0), c(1, -1), c(-1, 1)]);
    }

    #[test]
    fn adjacency_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100 {
            let a = c(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
            let b = c(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
            assert_eq!(a.neighbors().contains(&b), b.neighbors().contains(&a));
            checked += 1;
        }
        for a in [c(0, 0), c(5, -2)] {
            for b in a.neighbors() {
                assert!(b.neighbors().contains(&a));
            }
        }
    }

    #[test]
    fn heights() {
        assert_eq!(height(c(0, 0)), Rational64::from_integer(0));
        assert_eq!(height(c(1, 0)), Rational64::new(1, 2));
        assert_eq!(height(c(0, 1)), Rational64::from_integer(1));
        assert_eq!(height(c(1, -1)), Rational64::new(-1, 2));
    }

    #[test]
    fn columns() {
        assert_eq!(column(c(0, 0)), 0);
        assert_eq!(column(c(0, 5)), 0);
        assert_eq!(column(c(1, -1)), 1);
    }

    #[test]
    fn neighbor_heights_differ_by_half_or_one() {
        for u in -4..=4 {
            for v in -4..=4 {
                let p = c(u, v);
                let n = p.neighbors();
                assert_eq!(n.len(), 6);
                for q in n {
                    let d = (q.height() - p.height()).abs();
                    assert!(d == Rational64::new(1, 2) || d == Rational64::from_integer(1));
                }
            }
        }
    }

    #[test]
    fn reflection_preserves_height_and_adjacency() {
        for u in -2..=2 {
            for v in -2..=2 {
                let p = c(u, v);
                assert_eq!(p.reflect().height(), p.height());
                assert_eq!(p.reflect().reflect(), p);
                for q in p.neighbors() {
                    assert!(p.reflect().is_adjacent(q.reflect()));
                }
            }
        }
    }

    #[test]
    fn embedded_edges_have_unit_length() {
        for u in -3..=3 {
            for v in -3..=3 {
                let p = c(u, v);
                let (x0, y0) = p.embed();
                for q in p.neighbors() {
                    let (x1, y1) = q.embed();
                    let d = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
                    assert!((d - 1.0).abs() < 1e-12, "{p} -> {q}: {d}");
                }
            }
        }
        assert!((COLUMN_SPACING - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn direction_lookup() {
        let p = c(2, -1);
        for (i, q) in p.neighbors().into_iter().enumerate() {
            assert_eq!(p.direction_to(q), Some(i));
            assert_eq!(p.step(i), q);
        }
        assert_eq!(p.direction_to(c(4, -1)), None);
    }
}
