//! Subsets of the involutions `σ_0, …, σ_n` and the group `E_n` they generate.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A subset `T` of `{σ_0, …, σ_n}` as a bitmask (bit `i` is `σ_i`).
///
/// Ordered by size first, then by mask value. Up to 128 involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "Vec<u32>", try_from = "Vec<u32>")]
pub struct SubsetMask(u128);

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask(0);

    pub fn from_bits(bits: u128) -> Self {
        SubsetMask(bits)
    }

    /// `{σ_0, …, σ_{len-1}}`.
    pub fn full(len: u32) -> Self {
        if len >= 128 {
            SubsetMask(u128::MAX)
        } else {
            SubsetMask((1u128 << len) - 1)
        }
    }

    pub fn singleton(i: u32) -> Self {
        SubsetMask(1u128 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        SubsetMask(indices.into_iter().fold(0u128, |m, i| m | (1u128 << i)))
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: u32) -> bool {
        i < 128 && self.0 >> i & 1 == 1
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: SubsetMask) -> SubsetMask {
        SubsetMask(self.0 | other.0)
    }

    /// Complement inside `{0, …, len-1}`.
    pub fn complement(self, len: u32) -> SubsetMask {
        SubsetMask(!self.0 & Self::full(len).0)
    }

    /// Highest index plus one, or zero for the empty set.
    pub fn span(self) -> u32 {
        128 - self.0.leading_zeros()
    }

    /// Sorted member indices.
    pub fn indices(self) -> Vec<u32> {
        (0..128).filter(|&i| self.contains(i)).collect()
    }

    /// Re-index this subset after the involutions in `removed` are deleted:
    /// the survivors are renumbered consecutively. Members of `removed` are dropped.
    pub fn project_out(self, removed: SubsetMask) -> SubsetMask {
        let mut out = 0u128;
        let mut pos = 0;
        for i in 0..self.span().max(removed.span()) {
            if removed.contains(i) {
                continue;
            }
            if self.contains(i) {
                out |= 1u128 << pos;
            }
            pos += 1;
        }
        SubsetMask(out)
    }

    /// All subsets of `{0, …, universe-1}` of exactly `size` elements, in
    /// increasing mask order.
    pub fn of_size(universe: u32, size: u32) -> impl Iterator<Item = SubsetMask> {
        assert!(universe <= 127, "subset universe too large");
        let limit = 1u128 << universe;
        let first = if size > universe {
            limit
        } else if size == 0 {
            0
        } else {
            (1u128 << size) - 1
        };
        let mut next = Some(first).filter(|&m| m < limit || (size == 0 && m == 0));
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 {
                None
            } else {
                // Gosper's hack
                let c = cur & cur.wrapping_neg();
                let r = cur + c;
                let n = (((r ^ cur) >> 2) / c) | r;
                Some(n).filter(|&m| m < limit)
            };
            Some(SubsetMask(cur))
        })
    }

    /// All subsets of `{0, …, universe-1}` with at most `max_size` elements,
    /// in the crate-wide order (size, then mask).
    pub fn up_to_size(universe: u32, max_size: u32) -> impl Iterator<Item = SubsetMask> {
        (0..=max_size.min(universe)).flat_map(move |t| Self::of_size(universe, t))
    }
}

impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then(self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", idx.join(","))
    }
}

impl From<SubsetMask> for Vec<u32> {
    fn from(m: SubsetMask) -> Self {
        m.indices()
    }
}

impl TryFrom<Vec<u32>> for SubsetMask {
    type Error = String;

    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        if let Some(bad) = v.iter().find(|&&i| i >= 128) {
            return Err(format!("involution index {bad} out of range"));
        }
        Ok(SubsetMask::from_indices(v))
    }
}

/// An element of `E_n ≅ (Z/2Z)^n`: a product of involutions modulo the
/// relation `σ_0 ⋯ σ_n = 1`. The stored mask is canonical (bit `n` clear).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    n: u32,
    mask: u128,
}

impl GroupElement {
    pub fn new(n: u32, product_of: SubsetMask) -> Self {
        assert!(n < 127);
        let all = SubsetMask::full(n + 1).bits();
        let m = product_of.bits() & all;
        let mask = if m >> n & 1 == 1 { m ^ all } else { m };
        GroupElement { n, mask }
    }

    pub fn identity(n: u32) -> Self {
        GroupElement { n, mask: 0 }
    }

    pub fn canonical_mask(self) -> u128 {
        self.mask
    }

    pub fn compose(self, other: GroupElement) -> GroupElement {
        assert_eq!(self.n, other.n);
        GroupElement {
            n: self.n,
            mask: self.mask ^ other.mask,
        }
    }

    /// Membership in `H_n = <σ_i σ_j>`: some lift to `n + 1` bits has even weight.
    pub fn in_h_subgroup(self) -> bool {
        let all = SubsetMask::full(self.n + 1).bits();
        self.mask.count_ones().is_multiple_of(2) || (self.mask ^ all).count_ones().is_multiple_of(2)
    }
}

/// `|H_n|` as a power of two: `n - 1` for odd `n` (index 2), `n` for even `n`
/// (all of `E_n`).
pub fn h_subgroup_order_log2(n: u32) -> u32 {
    if n % 2 == 1 {
        n - 1
    } else {
        n
    }
}

/// `|E_n| = 2^n` as a power of two.
pub fn group_order_log2(n: u32) -> u32 {
    n
}
