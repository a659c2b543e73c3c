//! Player subsets encoded as bitmasks.

use std::fmt;

/// Largest supported player count; subsets of `{0..n}` live in a `u32` mask
/// and set functions are stored as `2^n` tables.
pub const MAX_PLAYERS: usize = 16;

/// A subset of the players `{0, .., MAX_PLAYERS - 1}`. Player `i` is bit `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PlayerSet(u32);

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        PlayerSet(bits)
    }

    /// `{0, .., n - 1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_PLAYERS);
        PlayerSet(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_PLAYERS);
        PlayerSet(1 << i)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// Position of this set in a `2^n` table.
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    #[must_use]
    pub const fn with(self, i: usize) -> Self {
        PlayerSet(self.0 | (1 << i))
    }

    #[must_use]
    pub const fn without(self, i: usize) -> Self {
        PlayerSet(self.0 & !(1 << i))
    }

    #[must_use]
    pub const fn union(self, other: Self) -> Self {
        PlayerSet(self.0 | other.0)
    }

    #[must_use]
    pub const fn intersection(self, other: Self) -> Self {
        PlayerSet(self.0 & other.0)
    }

    #[must_use]
    pub const fn difference(self, other: Self) -> Self {
        PlayerSet(self.0 & !other.0)
    }

    pub const fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// All subsets of `self` in ascending bitmask order, `∅` first and `self` last.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }
}

impl FromIterator<usize> for PlayerSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(PlayerSet::EMPTY, PlayerSet::with)
    }
}

impl IntoIterator for PlayerSet {
    type Item = usize;
    type IntoIter = Members;

    fn into_iter(self) -> Members {
        self.iter()
    }
}

impl fmt::Debug for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

pub struct Subsets {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = PlayerSet;

    fn next(&mut self) -> Option<PlayerSet> {
        let current = self.next?;
        // (s - mask) & mask steps to the next submask in increasing order.
        self.next = (current != self.mask).then(|| current.wrapping_sub(self.mask) & self.mask);
        Some(PlayerSet(current))
    }
}
