//! Periodic chain and two-leg ladder geometries.
//!
//! Site ordering is fixed: on the chain, sites run `0..L` around the ring;
//! on the ladder, `site = 2 * rung + leg`. Bit `b` of a basis index refers to
//! site `b`, so these conventions pin down the basis layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Chain,
    Ladder,
}

impl std::fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LatticeKind::Chain => f.write_str("chain"),
            LatticeKind::Ladder => f.write_str("ladder"),
        }
    }
}

/// A bipartite lattice with periodic boundaries along its length.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    kind: LatticeKind,
    length: usize,
    n_sites: usize,
    bonds: Vec<(usize, usize)>,
    coordination: usize,
    sublattice: Vec<i8>,
}

impl Lattice {
    /// Builds a lattice of the given kind. `length` is the ring length for
    /// the chain and the number of rungs for the ladder.
    pub fn new(kind: LatticeKind, length: usize) -> Result<Self> {
        if length < 4 {
            return Err(Error::InvalidLattice(format!(
                "length must be at least 4, got {length}"
            )));
        }
        if length % 2 != 0 {
            return Err(Error::InvalidLattice(format!(
                "{kind} length must be even for a bipartite ring, got {length}"
            )));
        }
        let lattice = match kind {
            LatticeKind::Chain => {
                let bonds = (0..length).map(|i| ordered(i, (i + 1) % length)).collect();
                let sublattice = (0..length).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
                Lattice {
                    kind,
                    length,
                    n_sites: length,
                    bonds,
                    coordination: 2,
                    sublattice,
                }
            }
            LatticeKind::Ladder => {
                let site = |rung: usize, leg: usize| 2 * rung + leg;
                let mut bonds = Vec::with_capacity(3 * length);
                for rung in 0..length {
                    let next = (rung + 1) % length;
                    bonds.push(ordered(site(rung, 0), site(next, 0)));
                    bonds.push(ordered(site(rung, 1), site(next, 1)));
                    bonds.push((site(rung, 0), site(rung, 1)));
                }
                let sublattice = (0..2 * length)
                    .map(|s| if (s / 2 + s % 2) % 2 == 0 { 1 } else { -1 })
                    .collect();
                Lattice {
                    kind,
                    length,
                    n_sites: 2 * length,
                    bonds,
                    coordination: 3,
                    sublattice,
                }
            }
        };
        Ok(lattice)
    }

    pub fn chain(length: usize) -> Result<Self> {
        Self::new(LatticeKind::Chain, length)
    }

    pub fn ladder(length: usize) -> Result<Self> {
        Self::new(LatticeKind::Ladder, length)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }

    pub fn coordination(&self) -> usize {
        self.coordination
    }

    /// Sublattice parity (+1 or -1) of every site.
    pub fn sublattice(&self) -> &[i8] {
        &self.sublattice
    }

    pub fn parity(&self, site: usize) -> i8 {
        self.sublattice[site]
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn degree(&self, site: usize) -> usize {
        self.bonds
            .iter()
            .filter(|&&(a, b)| a == site || b == site)
            .count()
    }

    /// Image of `site` under translation by `shift` unit cells.
    pub fn translate(&self, site: usize, shift: usize) -> usize {
        match self.kind {
            LatticeKind::Chain => (site + shift) % self.length,
            LatticeKind::Ladder => {
                let rung = (site / 2 + shift) % self.length;
                2 * rung + site % 2
            }
        }
    }

    /// Short human-readable description, e.g. `chain L=12` or `ladder 2x6`.
    pub fn describe(&self) -> String {
        match self.kind {
            LatticeKind::Chain => format!("chain L={}", self.length),
            LatticeKind::Ladder => format!("ladder 2x{}", self.length),
        }
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Displacement label of a translation-equivalence class of site pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    /// Ring distance on the chain.
    Distance(usize),
    /// Rung separation on the ladder, on the same leg or across legs.
    Ladder { drung: usize, cross: bool },
}

impl PairLabel {
    /// Separation along the periodic direction.
    pub fn distance(&self) -> usize {
        match *self {
            PairLabel::Distance(r) => r,
            PairLabel::Ladder { drung, .. } => drung,
        }
    }

    /// Column tag used in CSV headers: `r3` (chain), `s2` / `x0` (ladder).
    pub fn tag(&self) -> String {
        match *self {
            PairLabel::Distance(r) => format!("r{r}"),
            PairLabel::Ladder { drung, cross: false } => format!("s{drung}"),
            PairLabel::Ladder { drung, cross: true } => format!("x{drung}"),
        }
    }
}

/// All unordered site pairs related by a lattice translation (and leg swap).
#[derive(Debug, Clone, PartialEq)]
pub struct PairClass {
    pub label: PairLabel,
    pub pairs: Vec<(usize, usize)>,
    /// Number of partners a single site has in this class.
    pub multiplicity: usize,
}

impl PairClass {
    pub fn representative(&self) -> (usize, usize) {
        self.pairs[0]
    }

    pub fn distance(&self) -> usize {
        self.label.distance()
    }
}

/// Partitions all unordered site pairs into translation classes.
///
/// Chain classes are the distances `1..=L/2`. Ladder classes are, for each
/// rung separation `d` in `0..=L/2`, a same-leg class (`d > 0`) followed by
/// a cross-leg class.
pub fn pair_classes(lattice: &Lattice) -> Vec<PairClass> {
    let l = lattice.length;
    let half = l / 2;
    let mult = |d: usize| if d == 0 || d == half { 1 } else { 2 };
    match lattice.kind {
        LatticeKind::Chain => (1..=half)
            .map(|r| {
                let count = if r == half { half } else { l };
                let pairs = (0..count).map(|i| ordered(i, (i + r) % l)).collect();
                PairClass {
                    label: PairLabel::Distance(r),
                    pairs,
                    multiplicity: mult(r),
                }
            })
            .collect(),
        LatticeKind::Ladder => {
            let site = |rung: usize, leg: usize| 2 * (rung % l) + leg;
            let mut classes = Vec::with_capacity(2 * half + 1);
            for d in 0..=half {
                if d > 0 {
                    let count = if d == half { half } else { l };
                    let pairs = (0..2)
                        .flat_map(|leg| (0..count).map(move |a| (a, leg)))
                        .map(|(a, leg)| ordered(site(a, leg), site(a + d, leg)))
                        .collect();
                    classes.push(PairClass {
                        label: PairLabel::Ladder { drung: d, cross: false },
                        pairs,
                        multiplicity: mult(d),
                    });
                }
                let mut pairs: Vec<(usize, usize)> =
                    (0..l).map(|a| ordered(site(a, 0), site(a + d, 1))).collect();
                if d != 0 && d != half {
                    pairs.extend((0..l).map(|a| ordered(site(a, 0), site(a + l - d, 1))));
                }
                classes.push(PairClass {
                    label: PairLabel::Ladder { drung: d, cross: true },
                    pairs,
                    multiplicity: mult(d),
                });
            }
            classes
        }
    }
}
