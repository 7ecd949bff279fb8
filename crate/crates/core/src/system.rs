//! Particle configurations, their edge statistics and the local movement rule.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_rational::Rational64;

use crate::lattice::{AxialCoord, COLUMN_SPACING, DIRECTIONS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("a particle system needs at least one particle")]
    Empty,
    #[error("vertex {0} is occupied twice")]
    Duplicate(AxialCoord),
    #[error("configuration is not connected")]
    Disconnected,
    #[error("snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

/// A proposed single-vertex hop together with the neighbor counts that feed
/// the Metropolis filter. Both counts exclude the moving particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveProposal {
    pub from: AxialCoord,
    pub to: AxialCoord,
    pub from_neighbors: u8,
    pub to_neighbors: u8,
}

impl MoveProposal {
    /// `e' - e`: the change in the system's edge count if the move happens.
    pub fn edge_delta(&self) -> i32 {
        self.to_neighbors as i32 - self.from_neighbors as i32
    }
}

// Dense occupancy window. Cells hold `particle index + 1`, zero when empty.
#[derive(Debug, Clone)]
struct Grid {
    u0: i32,
    v0: i32,
    width: i32,
    height: i32,
    cells: Vec<u32>,
    col_count: Vec<u32>,
    col_min: Vec<i32>,
}

const GRID_EDGE_GUARD: i32 = 3;

impl Grid {
    fn covering(particles: &[AxialCoord]) -> Grid {
        let (mut umin, mut umax, mut vmin, mut vmax) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
        for p in particles {
            umin = umin.min(p.u);
            umax = umax.max(p.u);
            vmin = vmin.min(p.v);
            vmax = vmax.max(p.v);
        }
        let margin = 16.max(particles.len() as i32 / 2);
        let u0 = umin - margin;
        let v0 = vmin - margin;
        let width = umax - umin + 1 + 2 * margin;
        let height = vmax - vmin + 1 + 2 * margin;
        let mut grid = Grid {
            u0,
            v0,
            width,
            height,
            cells: vec![0; (width * height) as usize],
            col_count: vec![0; width as usize],
            col_min: vec![i32::MAX; width as usize],
        };
        for (i, &p) in particles.iter().enumerate() {
            let at = grid.index(p).expect("inside freshly built window");
            grid.cells[at] = i as u32 + 1;
            grid.column_insert(p);
        }
        grid
    }

    #[inline]
    fn index(&self, c: AxialCoord) -> Option<usize> {
        let du = c.u - self.u0;
        let dv = c.v - self.v0;
        if du < 0 || dv < 0 || du >= self.width || dv >= self.height {
            None
        } else {
            Some((du * self.height + dv) as usize)
        }
    }

    #[inline]
    fn stride(&self, (du, dv): (i32, i32)) -> isize {
        (du * self.height + dv) as isize
    }

    #[inline]
    fn occupied(&self, c: AxialCoord) -> bool {
        self.index(c).is_some_and(|i| self.cells[i] != 0)
    }

    fn near_edge(&self, c: AxialCoord) -> bool {
        let du = c.u - self.u0;
        let dv = c.v - self.v0;
        du < GRID_EDGE_GUARD
            || dv < GRID_EDGE_GUARD
            || du >= self.width - GRID_EDGE_GUARD
            || dv >= self.height - GRID_EDGE_GUARD
    }

    fn column_insert(&mut self, c: AxialCoord) {
        let col = (c.u - self.u0) as usize;
        self.col_count[col] += 1;
        if c.v < self.col_min[col] {
            self.col_min[col] = c.v;
        }
    }

    // Must run after the cell at `c` has been cleared.
    fn column_remove(&mut self, c: AxialCoord) {
        let col = (c.u - self.u0) as usize;
        self.col_count[col] -= 1;
        if self.col_count[col] == 0 {
            self.col_min[col] = i32::MAX;
        } else if self.col_min[col] == c.v {
            let base = col * self.height as usize;
            let start = (c.v - self.v0) as usize;
            let next = (start..self.height as usize)
                .find(|&dv| self.cells[base + dv] != 0)
                .expect("column count says another particle is present");
            self.col_min[col] = self.v0 + next as i32;
        }
    }
}

/// Offsets (relative to the mover) of the eight vertices adjacent to the
/// mover or its target, excluding both, for each of the six directions.
/// Listed in the order the neighbor-occupancy bitmask uses.
pub fn move_neighborhood(direction: usize) -> [(i32, i32); 8] {
    static TABLE: OnceLock<[[(i32, i32); 8]; 6]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = [[(0, 0); 8]; 6];
        for (d, slot) in out.iter_mut().enumerate() {
            let from = AxialCoord::ORIGIN;
            let to = from.step(d);
            let mut cells: Vec<(i32, i32)> = Vec::with_capacity(8);
            for p in from.neighbors().into_iter().chain(to.neighbors()) {
                if p != from && p != to && !cells.contains(&(p.u, p.v)) {
                    cells.push((p.u, p.v));
                }
            }
            assert_eq!(cells.len(), 8);
            slot.copy_from_slice(&cells);
        }
        out
    })[direction]
}

/// Precomputed outcome of the local rule for one neighborhood pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LocalRule {
    pub valid: bool,
    pub from_neighbors: u8,
    pub to_neighbors: u8,
}

/// `[direction][mask]` lookup of the local rule, derived once from
/// [`local_rule`] so the hot path never touches a hash set.
pub fn move_table() -> &'static [[LocalRule; 256]; 6] {
    static TABLE: OnceLock<Box<[[LocalRule; 256]; 6]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Box::new([[LocalRule::default(); 256]; 6]);
        for (d, row) in table.iter_mut().enumerate() {
            let cells = move_neighborhood(d);
            let from = AxialCoord::ORIGIN;
            let to = from.step(d);
            for (mask, entry) in row.iter_mut().enumerate() {
                let occupied: HashSet<AxialCoord> = cells
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &(u, v))| AxialCoord::new(u, v))
                    .collect();
                let is_occ = |c: AxialCoord| occupied.contains(&c);
                *entry = local_rule(&is_occ, from, to);
            }
        }
        table
    })
}

/// The connectivity-preserving movement rule for a hop `from -> to`, given an
/// occupancy oracle that does not report the mover itself.
///
/// With `S` the occupied common neighbors of `from` and `to`, the hop is valid
/// when `to` is empty, neither endpoint has five other occupied neighbors
/// (leaving such a spot opens a hole; entering one fills a hole), and either
/// * `|S|` is 1 or 2 and every occupied vertex around the pair reaches `S`
///   through occupied vertices around the pair, or
/// * `S` is empty, both endpoints have another occupied neighbor, and the
///   occupied neighbors of each endpoint form one contiguous block.
pub fn local_rule(occupied: &dyn Fn(AxialCoord) -> bool, from: AxialCoord, to: AxialCoord) -> LocalRule {
    let from_nbrs: Vec<AxialCoord> = from.neighbors().into_iter().filter(|&p| p != to).collect();
    let to_nbrs: Vec<AxialCoord> = to.neighbors().into_iter().filter(|&p| p != from).collect();
    let e = from_nbrs.iter().filter(|&&p| occupied(p)).count() as u8;
    let e2 = to_nbrs.iter().filter(|&&p| occupied(p)).count() as u8;
    let mut rule = LocalRule { valid: false, from_neighbors: e, to_neighbors: e2 };
    if occupied(to) || e == 5 || e2 == 5 {
        return rule;
    }

    let region: Vec<AxialCoord> = {
        let mut r: Vec<AxialCoord> = from_nbrs.clone();
        for p in &to_nbrs {
            if !r.contains(p) {
                r.push(*p);
            }
        }
        r.into_iter().filter(|&p| occupied(p)).collect()
    };
    let common: Vec<AxialCoord> =
        from_nbrs.iter().copied().filter(|p| to_nbrs.contains(p) && occupied(*p)).collect();

    rule.valid = match common.len() {
        1 | 2 => reaches_all(&region, &common),
        0 => {
            let a: Vec<AxialCoord> = from_nbrs.iter().copied().filter(|&p| occupied(p)).collect();
            let b: Vec<AxialCoord> = to_nbrs.iter().copied().filter(|&p| occupied(p)).collect();
            !a.is_empty() && !b.is_empty() && reaches_all(&a, &a[..1]) && reaches_all(&b, &b[..1])
        }
        _ => false,
    };
    rule
}

// Does a search inside `set`, seeded from `seeds`, visit every member of `set`?
fn reaches_all(set: &[AxialCoord], seeds: &[AxialCoord]) -> bool {
    let mut seen: Vec<AxialCoord> = seeds.to_vec();
    let mut queue: Vec<AxialCoord> = seeds.to_vec();
    while let Some(p) = queue.pop() {
        for q in set {
            if !seen.contains(q) && p.is_adjacent(*q) {
                seen.push(*q);
                queue.push(*q);
            }
        }
    }
    set.iter().all(|p| seen.contains(p))
}

/// A configuration σ of indistinguishable particles on the lattice.
///
/// Particles keep a stable index for the lifetime of the system; moves change
/// positions only. Occupancy lives in a dense window that regrows when a
/// particle approaches its edge.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    particles: Vec<AxialCoord>,
    grid: Grid,
    edges: usize,
    occupied_columns: usize,
    sum_u: i64,
    sum_twice_height: i64,
}

impl PartialEq for ParticleSystem {
    fn eq(&self, other: &Self) -> bool {
        self.sorted_coords() == other.sorted_coords()
    }
}

impl Eq for ParticleSystem {}

impl ParticleSystem {
    pub fn new<I: IntoIterator<Item = AxialCoord>>(coords: I) -> Result<Self, SystemError> {
        let particles: Vec<AxialCoord> = coords.into_iter().collect();
        if particles.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut seen = HashSet::with_capacity(particles.len());
        for &p in &particles {
            if !seen.insert(p) {
                return Err(SystemError::Duplicate(p));
            }
        }
        let grid = Grid::covering(&particles);
        let occupied_columns = grid.col_count.iter().filter(|&&c| c > 0).count();
        let mut system = ParticleSystem {
            sum_u: particles.iter().map(|p| p.u as i64).sum(),
            sum_twice_height: particles.iter().map(|p| p.twice_height()).sum(),
            particles,
            grid,
            edges: 0,
            occupied_columns,
        };
        system.edges = system.recount_edges();
        Ok(system)
    }

    /// Like [`ParticleSystem::new`] but also rejects disconnected input.
    pub fn connected<I: IntoIterator<Item = AxialCoord>>(coords: I) -> Result<Self, SystemError> {
        let s = Self::new(coords)?;
        if !s.is_connected() {
            return Err(SystemError::Disconnected);
        }
        Ok(s)
    }

    /// `n` particles along a diagonal lattice line: `(0,0), (1,0), ..., (n-1,0)`.
    pub fn line(n: usize) -> Result<Self, SystemError> {
        Self::new((0..n as i32).map(|i| AxialCoord::new(i, 0)))
    }

    /// Centered hexagonal patch of radius `r`, `3r(r+1)+1` particles.
    pub fn hexagon(r: u32) -> Self {
        let r = r as i32;
        let mut coords = Vec::new();
        for u in -r..=r {
            for v in -r..=r {
                if (u + v).abs() <= r {
                    coords.push(AxialCoord::new(u, v));
                }
            }
        }
        Self::new(coords).expect("hexagon vertices are distinct")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Positions indexed by particle id.
    #[inline]
    pub fn particles(&self) -> &[AxialCoord] {
        &self.particles
    }

    #[inline]
    pub fn position(&self, particle: usize) -> AxialCoord {
        self.particles[particle]
    }

    pub fn sorted_coords(&self) -> Vec<AxialCoord> {
        let mut v = self.particles.clone();
        v.sort_unstable();
        v
    }

    pub fn coord_set(&self) -> BTreeSet<AxialCoord> {
        self.particles.iter().copied().collect()
    }

    #[inline]
    pub fn is_occupied(&self, c: AxialCoord) -> bool {
        self.grid.occupied(c)
    }

    /// Particle id at `c`, if any.
    pub fn particle_at(&self, c: AxialCoord) -> Option<usize> {
        self.grid.index(c).and_then(|i| self.grid.cells[i].checked_sub(1)).map(|i| i as usize)
    }

    /// Cached edge count `e(σ)`.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Edge count recomputed from scratch, independent of the occupancy window.
    pub fn recount_edges(&self) -> usize {
        let set: HashSet<AxialCoord> = self.particles.iter().copied().collect();
        let twice: usize = self
            .particles
            .iter()
            .map(|p| p.neighbors().iter().filter(|q| set.contains(q)).count())
            .sum();
        twice / 2
    }

    /// Number of (occupied, empty) adjacent ordered pairs. Satisfies `6n = 2e + b`.
    pub fn boundary_pairs(&self) -> usize {
        let set: HashSet<AxialCoord> = self.particles.iter().copied().collect();
        self.particles
            .iter()
            .map(|p| p.neighbors().iter().filter(|q| !set.contains(q)).count())
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        let set: HashSet<AxialCoord> = self.particles.iter().copied().collect();
        let mut seen = HashSet::with_capacity(set.len());
        let mut queue = VecDeque::new();
        seen.insert(self.particles[0]);
        queue.push_back(self.particles[0]);
        while let Some(p) = queue.pop_front() {
            for q in p.neighbors() {
                if set.contains(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        seen.len() == set.len()
    }

    /// True when some empty vertex is enclosed by particles, i.e. cannot reach
    /// the border of the bounding box padded by one.
    pub fn has_hole(&self) -> bool {
        let set: HashSet<AxialCoord> = self.particles.iter().copied().collect();
        let umin = self.particles.iter().map(|p| p.u).min().unwrap() - 1;
        let umax = self.particles.iter().map(|p| p.u).max().unwrap() + 1;
        let vmin = self.particles.iter().map(|p| p.v).min().unwrap() - 1;
        let vmax = self.particles.iter().map(|p| p.v).max().unwrap() + 1;
        let inside = |c: AxialCoord| c.u >= umin && c.u <= umax && c.v >= vmin && c.v <= vmax;
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        for u in umin..=umax {
            for v in vmin..=vmax {
                if u == umin || u == umax || v == vmin || v == vmax {
                    let c = AxialCoord::new(u, v);
                    seen.insert(c);
                    queue.push_back(c);
                }
            }
        }
        while let Some(p) = queue.pop_front() {
            for q in p.neighbors() {
                if inside(q) && !set.contains(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        let box_cells = ((umax - umin + 1) * (vmax - vmin + 1)) as usize;
        seen.len() + set.len() < box_cells
    }

    /// Whether the particle at `from` may hop to the adjacent vertex `to`.
    /// Returns false when `from` is empty or `to` is not adjacent.
    pub fn local_move_valid(&self, from: AxialCoord, to: AxialCoord) -> bool {
        self.proposal(from, to).is_some()
    }

    /// The proposal for `from -> to` if the hop is valid.
    pub fn proposal(&self, from: AxialCoord, to: AxialCoord) -> Option<MoveProposal> {
        if !self.is_occupied(from) || !from.is_adjacent(to) {
            return None;
        }
        let occupied = |c: AxialCoord| c != from && self.is_occupied(c);
        let rule = local_rule(&occupied, from, to);
        rule.valid.then_some(MoveProposal {
            from,
            to,
            from_neighbors: rule.from_neighbors,
            to_neighbors: rule.to_neighbors,
        })
    }

    /// All valid targets of the particle at `from`, in direction order.
    pub fn valid_targets(&self, from: AxialCoord) -> Vec<MoveProposal> {
        from.neighbors().into_iter().filter_map(|to| self.proposal(from, to)).collect()
    }

    /// Table-driven local rule for particle `particle` stepping in `direction`.
    #[inline]
    pub fn fast_rule(&self, particle: usize, direction: usize) -> LocalRule {
        let from = self.particles[particle];
        let base = self.grid.index(from).expect("particles stay inside the window") as isize;
        let mut mask = 0usize;
        for (bit, &off) in move_neighborhood(direction).iter().enumerate() {
            let at = (base + self.grid.stride(off)) as usize;
            if self.grid.cells[at] != 0 {
                mask |= 1 << bit;
            }
        }
        let target = (base + self.grid.stride(DIRECTIONS[direction])) as usize;
        let mut rule = move_table()[direction][mask];
        if self.grid.cells[target] != 0 {
            rule.valid = false;
        }
        rule
    }

    /// Moves particle `particle` to `to` without checking the local rule.
    /// `to` must be an empty neighbor of the particle.
    pub fn apply_move(&mut self, particle: usize, to: AxialCoord) {
        let from = self.particles[particle];
        debug_assert!(from.is_adjacent(to));
        debug_assert!(!self.is_occupied(to));
        if self.grid.near_edge(to) {
            self.grid = Grid::covering(&self.particles);
        }
        let from_i = self.grid.index(from).unwrap();
        let to_i = self.grid.index(to).unwrap();
        self.grid.cells[from_i] = 0;
        let lost = from.neighbors().iter().filter(|&&q| self.grid.occupied(q)).count();
        let gained = to.neighbors().iter().filter(|&&q| self.grid.occupied(q)).count();
        self.edges = self.edges + gained - lost;
        let (fc, tc) = ((from.u - self.grid.u0) as usize, (to.u - self.grid.u0) as usize);
        let before = (self.grid.col_count[fc] > 0) as usize + (fc != tc && self.grid.col_count[tc] > 0) as usize;
        self.grid.column_remove(from);
        self.grid.cells[to_i] = particle as u32 + 1;
        self.grid.column_insert(to);
        let after = (self.grid.col_count[fc] > 0) as usize + (fc != tc && self.grid.col_count[tc] > 0) as usize;
        self.occupied_columns = self.occupied_columns + after - before;
        self.sum_u += (to.u - from.u) as i64;
        self.sum_twice_height += to.twice_height() - from.twice_height();
        self.particles[particle] = to;
    }

    /// Validates with the local rule, then moves. Returns the applied proposal.
    pub fn try_move(&mut self, particle: usize, to: AxialCoord) -> Option<MoveProposal> {
        let proposal = self.proposal(self.particles[particle], to)?;
        self.apply_move(particle, to);
        Some(proposal)
    }

    /// Lowest occupied `v` in column `u`.
    #[inline]
    pub fn column_floor(&self, u: i32) -> Option<i32> {
        let col = u - self.grid.u0;
        if col < 0 || col >= self.grid.width {
            return None;
        }
        let m = self.grid.col_min[col as usize];
        (m != i32::MAX).then_some(m)
    }

    /// True when no other particle sits below `particle` in its column.
    #[inline]
    pub fn is_lowest_in_column(&self, particle: usize) -> bool {
        let p = self.particles[particle];
        self.grid.col_min[(p.u - self.grid.u0) as usize] == p.v
    }

    /// Number of distinct occupied columns.
    #[inline]
    pub fn occupied_columns(&self) -> usize {
        self.occupied_columns
    }

    /// Sum of `2·height` over all particles.
    #[inline]
    pub fn twice_height_sum(&self) -> i64 {
        self.sum_twice_height
    }

    #[inline]
    pub fn column_sum(&self) -> i64 {
        self.sum_u
    }

    /// Centroid height, exact.
    pub fn centroid_height(&self) -> Rational64 {
        Rational64::new(self.sum_twice_height, 2 * self.len() as i64)
    }

    /// Centroid `x`.
    pub fn centroid_x(&self) -> f64 {
        self.sum_u as f64 * COLUMN_SPACING / self.len() as f64
    }

    /// Snapshot text: `n=<count>` then one `u v` line per particle, sorted.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n={}", self.len()).unwrap();
        for p in self.sorted_coords() {
            writeln!(out, "{} {}", p.u, p.v).unwrap();
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self, SystemError> {
        let bad = |line: usize, reason: String| SystemError::Snapshot { line, reason };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or_else(|| bad(1, "missing header".into()))?;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(hl + 1, format!("expected `n=<count>`, got `{header}`")))?;
        let mut coords = Vec::with_capacity(n);
        for (i, line) in lines {
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| s.and_then(|s| s.parse::<i32>().ok());
            match (parse(parts.next()), parse(parts.next()), parts.next()) {
                (Some(u), Some(v), None) => coords.push(AxialCoord::new(u, v)),
                _ => return Err(bad(i + 1, format!("expected `u v`, got `{line}`"))),
            }
        }
        if coords.len() != n {
            return Err(bad(hl + 1, format!("header says {n} particles, found {}", coords.len())));
        }
        Self::new(coords)
    }
}

fn neighborhood_mask(s: &ParticleSystem, from: AxialCoord, d: usize) -> usize {
    move_neighborhood(d)
        .iter()
        .enumerate()
        .filter(|(_, &(du, dv))| s.is_occupied(from.offset(du, dv)))
        .fold(0, |m, (i, _)| m | (1 << i))
}

/// Checks every occupancy pattern of the eight cells around every move
/// direction: a move is valid iff its reverse is, edge changes are opposite,
/// and the lookup table agrees with the reference rule. Returns the
/// `(direction, mask)` pairs that fail.
pub fn symmetry_violations() -> Vec<(usize, usize)> {
    let mut bad = Vec::new();
    for d in 0..6 {
        let from = AxialCoord::ORIGIN;
        let to = from.step(d);
        let back = to.direction_to(from).expect("adjacent");
        for mask in 0..256usize {
            let mut coords: Vec<AxialCoord> = move_neighborhood(d)
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &o)| o.into())
                .collect();
            coords.push(from);
            let before = ParticleSystem::new(coords.clone()).expect("distinct cells");
            let forward = before.proposal(from, to);
            *coords.last_mut().unwrap() = to;
            let after = ParticleSystem::new(coords).expect("distinct cells");
            let reverse = after.proposal(to, from);
            let ok = forward.is_some() == reverse.is_some()
                && forward.zip(reverse).is_none_or(|(f, r)| f.edge_delta() == -r.edge_delta())
                && move_table()[d][neighborhood_mask(&before, from, d)].valid == forward.is_some()
                && move_table()[back][neighborhood_mask(&after, to, back)].valid == reverse.is_some();
            if !ok {
                bad.push((d, mask));
            }
        }
    }
    bad
}
