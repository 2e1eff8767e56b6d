//! Three-mode bosonic Fock space at fixed particle number.
//!
//! Each basis state is an [`Occupation`] triple. In the circular convention
//! the slots hold `(n_plus, n_zero, n_minus)`; in the Cartesian convention
//! they hold `(n_x, n_zero, n_y)`. Mode `0` (the scalar boson, or the
//! `m_F = 0` Zeeman level) is shared by both conventions.
//!
//! States are ordered lexicographically: ascending first-slot occupation,
//! then ascending `n_zero`. The third slot is fixed by the total. Filtered
//! bases keep the same relative order, so operator matrices are
//! reproducible entry for entry.

mod convert;

pub use convert::{convert_convention, project_two_mode, TwoModeProjection};

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Single-particle mode labelling convention for the two vibron modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convention {
    /// `tau_+`, `sigma`, `tau_-` (spinor `m_F = +1, 0, -1`).
    Circular,
    /// `tau_x`, `sigma`, `tau_y`.
    Cartesian,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::Circular => "circular",
            Convention::Cartesian => "cartesian",
        }
    }
}

/// Occupation numbers of the three modes, `[first, zero, second]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(pub [u32; 3]);

impl Occupation {
    pub fn new(first: u32, zero: u32, second: u32) -> Self {
        Occupation([first, zero, second])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn first(&self) -> u32 {
        self.0[0]
    }

    pub fn zero(&self) -> u32 {
        self.0[1]
    }

    pub fn second(&self) -> u32 {
        self.0[2]
    }

    /// `n_plus - n_minus`; only meaningful in the circular convention.
    pub fn magnetization(&self) -> i64 {
        self.0[0] as i64 - self.0[2] as i64
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}, {}, {}>", self.0[0], self.0[1], self.0[2])
    }
}

/// Which part of the fixed-N space a basis covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockFilter {
    Full,
    /// Single magnetization block `n_plus - n_minus = l` (circular only).
    FixedL(i64),
    /// Magnetization band `l_min <= n_plus - n_minus <= l_max` (circular only).
    LBand(i64, i64),
    /// At most `max` quanta in each of the x and y modes, mode 0 holding
    /// the rest (Cartesian only). Used for the low-depletion Hamiltonian.
    Excitations(u32),
}

impl BlockFilter {
    fn magnetization_range(&self) -> Option<(i64, i64)> {
        match *self {
            BlockFilter::FixedL(l) => Some((l, l)),
            BlockFilter::LBand(lo, hi) => Some((lo, hi)),
            _ => None,
        }
    }

    /// The filter obtained by shifting all magnetizations by `delta`.
    pub fn shifted(&self, delta: i64) -> BlockFilter {
        match *self {
            BlockFilter::FixedL(l) => BlockFilter::FixedL(l + delta),
            BlockFilter::LBand(lo, hi) => BlockFilter::LBand(lo + delta, hi + delta),
            other => other,
        }
    }

    /// Smallest band containing every magnetization reachable from this
    /// filter by a shift in `[lo_shift, hi_shift]`.
    pub fn widened(&self, lo_shift: i64, hi_shift: i64) -> BlockFilter {
        match *self {
            BlockFilter::FixedL(l) => BlockFilter::LBand(l + lo_shift, l + hi_shift),
            BlockFilter::LBand(lo, hi) => BlockFilter::LBand(lo + lo_shift, hi + hi_shift),
            other => other,
        }
    }
}

/// Enumerated basis of the three-mode Fock space at fixed `N`.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct FockBasis {
    total_n: u32,
    convention: Convention,
    filter: BlockFilter,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other)
    }
}

impl FockBasis {
    /// Enumerate the basis for `n` particles.
    ///
    /// Magnetization filters are clipped to `[-n, n]`; a fixed block with
    /// `|l| > n` is rejected.
    pub fn enumerate(n: u32, convention: Convention, filter: BlockFilter) -> Result<Self> {
        let ni = n as i64;
        match filter {
            BlockFilter::FixedL(l) if l.abs() > ni => {
                return Err(Error::MagnetizationOutOfRange { l, n })
            }
            BlockFilter::LBand(lo, hi) if lo > hi => {
                return Err(Error::InvalidBand { min: lo, max: hi })
            }
            BlockFilter::FixedL(_) | BlockFilter::LBand(..) if convention != Convention::Circular => {
                return Err(Error::WrongConvention {
                    what: "magnetization filter",
                    expected: "circular",
                })
            }
            BlockFilter::Excitations(_) if convention != Convention::Cartesian => {
                return Err(Error::WrongConvention {
                    what: "excitation filter",
                    expected: "cartesian",
                })
            }
            BlockFilter::Excitations(m) if 2 * m > n => {
                return Err(Error::InvalidParameter {
                    name: "max_excitations",
                    reason: format!("2 * {m} exceeds N = {n}"),
                })
            }
            _ => {}
        }

        let mut states = Vec::new();
        match filter.magnetization_range() {
            Some((lo, hi)) => {
                for first in 0..=n {
                    for zero in 0..=(n - first) {
                        let occ = Occupation::new(first, zero, n - first - zero);
                        let l = occ.magnetization();
                        if l >= lo && l <= hi {
                            states.push(occ);
                        }
                    }
                }
            }
            None => {
                let cap = match filter {
                    BlockFilter::Excitations(m) => m,
                    _ => n,
                };
                for first in 0..=n.min(cap) {
                    for zero in 0..=(n - first) {
                        let second = n - first - zero;
                        if second <= cap {
                            states.push(Occupation::new(first, zero, second));
                        }
                    }
                }
            }
        }

        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(FockBasis {
            total_n: n,
            convention,
            filter,
            states,
            index,
        })
    }

    pub fn full(n: u32, convention: Convention) -> Self {
        Self::enumerate(n, convention, BlockFilter::Full).expect("full basis is always valid")
    }

    pub fn total_n(&self) -> u32 {
        self.total_n
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn filter(&self) -> BlockFilter {
        self.filter
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Occupation {
        self.states[i]
    }

    pub fn index_of(&self, occ: &Occupation) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn contains(&self, occ: &Occupation) -> bool {
        self.index.contains_key(occ)
    }

    pub fn same_space(&self, other: &FockBasis) -> bool {
        self.total_n == other.total_n
            && self.convention == other.convention
            && (self.filter == other.filter || self.states == other.states)
    }

    /// True when every state of `self` is also a state of `other`.
    pub fn is_subset_of(&self, other: &FockBasis) -> bool {
        self.total_n == other.total_n
            && self.convention == other.convention
            && self.states.iter().all(|s| other.contains(s))
    }

    /// Same `N` and convention, different filter.
    pub fn with_filter(&self, filter: BlockFilter) -> Result<FockBasis> {
        FockBasis::enumerate(self.total_n, self.convention, filter)
    }
}

/// `(N+1)(N+2)/2`, the dimension of the unfiltered space.
pub fn full_dimension(n: u32) -> usize {
    let n = n as usize;
    (n + 1) * (n + 2) / 2
}

/// Number of states with `n_plus - n_minus = l`.
pub fn block_dimension(n: u32, l: i64) -> usize {
    let n = n as i64;
    if l.abs() > n {
        return 0;
    }
    ((n - l.abs()) / 2 + 1) as usize
}
