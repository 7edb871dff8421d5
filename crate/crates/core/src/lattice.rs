//! The binary-tree lattice of detail-coefficient indices, its nine-site
//! neighbourhoods, and point configurations living on it.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Site `(j, k)`: level `j` (0 = coarsest detail level), position `k < 2^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeIndex {
    pub j: usize,
    pub k: usize,
}

impl LatticeIndex {
    pub const fn new(j: usize, k: usize) -> Self {
        Self { j, k }
    }

    /// Position in the flat site ordering `2^j - 1 + k`.
    pub fn flat(self) -> usize {
        (1 << self.j) - 1 + self.k
    }

    pub fn from_flat(flat: usize) -> Self {
        let j = (usize::BITS - 1 - (flat + 1).leading_zeros()) as usize;
        Self { j, k: flat + 1 - (1 << j) }
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// Deduplicated neighbourhood `B(x)`; always contains `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbourhood {
    sites: Vec<LatticeIndex>,
}

impl Neighbourhood {
    pub fn sites(&self) -> &[LatticeIndex] {
        &self.sites
    }

    /// Counting measure `m{B(x)}`.
    pub fn measure(&self) -> usize {
        self.sites.len()
    }

    pub fn contains(&self, x: LatticeIndex) -> bool {
        self.sites.contains(&x)
    }
}

fn wrap(k: isize, width: usize) -> usize {
    k.rem_euclid(width as isize) as usize
}

/// `B(x)` on a lattice with `depth` levels: x, its parent, the parent-level
/// site next-nearest to x (left of the parent for even k, right for odd),
/// both siblings, both children and the outer neighbour of each child.
/// Positions wrap periodically within a level; levels outside `0..depth` are
/// dropped and duplicates collapse.
pub fn neighbourhood(x: LatticeIndex, depth: usize) -> Neighbourhood {
    let mut sites = vec![x];
    let (j, k) = (x.j, x.k as isize);
    let width = 1usize << j;
    if j >= 1 {
        let pw = width / 2;
        let p = k / 2;
        let side = if k % 2 == 0 { -1 } else { 1 };
        sites.push(LatticeIndex::new(j - 1, wrap(p, pw)));
        sites.push(LatticeIndex::new(j - 1, wrap(p + side, pw)));
    }
    sites.push(LatticeIndex::new(j, wrap(k - 1, width)));
    sites.push(LatticeIndex::new(j, wrap(k + 1, width)));
    if j + 1 < depth {
        let cw = width * 2;
        for c in [2 * k - 1, 2 * k, 2 * k + 1, 2 * k + 2] {
            sites.push(LatticeIndex::new(j + 1, wrap(c, cw)));
        }
    }
    sites.sort();
    sites.dedup();
    Neighbourhood { sites }
}

/// Lattice of `2^depth - 1` sites with precomputed flat neighbourhoods.
#[derive(Debug, Clone)]
pub struct Lattice {
    depth: usize,
    neighbours: Vec<Vec<usize>>,
    max_measure: usize,
}

impl Lattice {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 || depth > 24 {
            return Err(Error::InvalidParams(format!("lattice depth {depth} outside 1..=24")));
        }
        let len = (1usize << depth) - 1;
        let neighbours: Vec<Vec<usize>> = (0..len)
            .map(|i| {
                neighbourhood(LatticeIndex::from_flat(i), depth)
                    .sites
                    .into_iter()
                    .map(LatticeIndex::flat)
                    .collect()
            })
            .collect();
        let max_measure = neighbours.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            depth,
            neighbours,
            max_measure,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.neighbours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbours.is_empty()
    }

    pub fn contains(&self, x: LatticeIndex) -> bool {
        x.j < self.depth && x.k < (1 << x.j)
    }

    /// Flat indices of `B(site)`.
    pub fn neighbours(&self, site: usize) -> &[usize] {
        &self.neighbours[site]
    }

    /// `M(chi)`, the largest neighbourhood measure on this lattice.
    pub fn max_measure(&self) -> usize {
        self.max_measure
    }

    pub fn sites(&self) -> impl Iterator<Item = LatticeIndex> {
        (0..self.len()).map(LatticeIndex::from_flat)
    }
}

/// Multiset of identified points on the lattice.
#[derive(Debug, Clone, Default)]
pub struct Configuration {
    counts: Vec<u32>,
    points: BTreeMap<u64, usize>,
    next_id: u64,
}

impl Configuration {
    pub fn empty(sites: usize) -> Self {
        Self {
            counts: vec![0; sites],
            points: BTreeMap::new(),
            next_id: 0,
        }
    }

    /// Configuration with the given per-site counts and sequential point ids.
    pub fn from_counts(counts: &[u32]) -> Self {
        let mut cfg = Self::empty(counts.len());
        for (site, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                cfg.add(site);
            }
        }
        cfg
    }

    /// Add a fresh point at `site`, returning its id.
    pub fn add(&mut self, site: usize) -> u64 {
        let id = self.next_id;
        self.insert(id, site).expect("fresh id");
        id
    }

    pub fn insert(&mut self, id: u64, site: usize) -> Result<()> {
        if site >= self.counts.len() {
            return Err(Error::InvalidParams(format!("site {site} outside lattice")));
        }
        if self.points.insert(id, site).is_some() {
            return Err(Error::Invariant(format!("point id {id} inserted twice")));
        }
        self.counts[site] += 1;
        self.next_id = self.next_id.max(id + 1);
        Ok(())
    }

    pub fn remove(&mut self, id: u64) -> Option<usize> {
        let site = self.points.remove(&id)?;
        self.counts[site] -= 1;
        Some(site)
    }

    pub fn count(&self, site: usize) -> u32 {
        self.counts[site]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn occupied(&self, site: usize) -> bool {
        self.counts[site] > 0
    }

    /// `N(xi)`.
    pub fn total(&self) -> usize {
        self.points.len()
    }

    pub fn sites(&self) -> usize {
        self.counts.len()
    }

    pub fn points(&self) -> impl Iterator<Item = (u64, usize)> + '_ {
        self.points.iter().map(|(&id, &s)| (id, s))
    }

    pub fn contains_point(&self, id: u64) -> bool {
        self.points.contains_key(&id)
    }

    /// Point-id inclusion.
    pub fn is_subset_of(&self, other: &Configuration) -> bool {
        self.points.iter().all(|(id, s)| other.points.get(id) == Some(s))
    }
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts && self.points == other.points
    }
}

impl Eq for Configuration {}

/// Incrementally maintained union of neighbourhoods of occupied sites.
#[derive(Debug, Clone)]
pub struct Coverage {
    cover: Vec<u32>,
    occupied: Vec<bool>,
    measure: usize,
}

impl Coverage {
    pub fn new(sites: usize) -> Self {
        Self {
            cover: vec![0; sites],
            occupied: vec![false; sites],
            measure: 0,
        }
    }

    pub fn from_configuration(lattice: &Lattice, xi: &Configuration) -> Self {
        let mut cov = Self::new(lattice.len());
        for site in 0..lattice.len() {
            if xi.occupied(site) {
                cov.set_occupied(lattice, site, true);
            }
        }
        cov
    }

    pub fn is_occupied(&self, site: usize) -> bool {
        self.occupied[site]
    }

    pub fn set_occupied(&mut self, lattice: &Lattice, site: usize, occupied: bool) {
        if self.occupied[site] == occupied {
            return;
        }
        self.occupied[site] = occupied;
        for &s in lattice.neighbours(site) {
            if occupied {
                if self.cover[s] == 0 {
                    self.measure += 1;
                }
                self.cover[s] += 1;
            } else {
                self.cover[s] -= 1;
                if self.cover[s] == 0 {
                    self.measure -= 1;
                }
            }
        }
    }

    /// `m{U(xi)}`.
    pub fn measure(&self) -> usize {
        self.measure
    }

    /// `m{B(u) \ U(xi)}`.
    pub fn uncovered(&self, lattice: &Lattice, u: usize) -> usize {
        lattice.neighbours(u).iter().filter(|&&s| self.cover[s] == 0).count()
    }
}

/// `m{U(xi)}`: number of distinct sites within the neighbourhood of some
/// occupied site.
pub fn coverage_measure(lattice: &Lattice, xi: &Configuration) -> usize {
    Coverage::from_configuration(lattice, xi).measure()
}

/// `m{B(u) \ U(xi)}`.
pub fn uncovered_measure(lattice: &Lattice, u: LatticeIndex, xi: &Configuration) -> usize {
    Coverage::from_configuration(lattice, xi).uncovered(lattice, u.flat())
}
