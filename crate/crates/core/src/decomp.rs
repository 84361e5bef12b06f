//! Predicted isogeny decomposition of `JX_n`, computed two ways.
//!
//! Subset side: one factor `π_T^* JX_T^-` per `T ⊂ {σ_0, …, σ_n}` with
//! `|T| ≤ n - 3`, of dimension `(n - |T| - 1) / 2` when `n - |T|` is odd and
//! trivial otherwise.
//!
//! Character side: one factor per rational character of `E_n`, i.e. per
//! even-weight support `U` on the generators, with dimension given by the
//! equivariant dimension formula for an action of signature `(0; 2^(n+1))`.
//! Under `U = complement(T)` the two lists coincide.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::curve::{genus_of_type, h_subgroup_order_log2, signature_of_type, SubsetMask};

/// Largest `n` for which factor and character lists are enumerated.
pub const MAX_ENUMERATED_TYPE: u32 = 24;
/// Largest `n` accepted at all (subsets of `n + 1` involutions fit a `u128`).
pub const MAX_TYPE: u32 = 126;
/// Kernel orders with a base-2 exponent up to this are also rendered in decimal.
pub const MAX_DECIMAL_EXPONENT: u64 = 1 << 20;
/// Structured reports list individual factors up to this `n`.
pub const FACTOR_LIST_LIMIT: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompError {
    #[error("type {n} is below the minimum {min}")]
    TypeTooSmall { n: u32, min: u32 },
    #[error("type {0} is too large")]
    TypeTooLarge(u32),
    #[error("type {0} is too large to enumerate individual factors")]
    TooLargeToEnumerate(u32),
    #[error("support {0} has odd weight and is not a character of E_n")]
    OddSupport(SubsetMask),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

fn check_type(n: u32, min: u32) -> Result<(), DecompError> {
    if n < min {
        return Err(DecompError::TypeTooSmall { n, min });
    }
    if n > MAX_TYPE {
        return Err(DecompError::TypeTooLarge(n));
    }
    Ok(())
}

fn choose(n: u32, k: u32) -> BigUint {
    if k > n {
        BigUint::zero()
    } else {
        binomial(BigUint::from(n), BigUint::from(k))
    }
}

/// Dimension of `JX_T^-` for `|T| = t`: zero when `n - t` is even, `(n - t - 1) / 2` when odd.
pub fn prym_dimension(n: u32, t: u32) -> u32 {
    let nu = n.saturating_sub(t);
    if nu.is_multiple_of(2) {
        0
    } else {
        (nu - 1) / 2
    }
}

/// Polarization type `(d, …, d)` with `d = 2^log2`, repeated `length` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolarizationType {
    pub divisor_log2: u32,
    pub length: u32,
}

impl PolarizationType {
    pub fn elementary_divisor(&self) -> BigUint {
        BigUint::one() << self.divisor_log2
    }

    pub fn to_vec(&self) -> Vec<BigUint> {
        vec![self.elementary_divisor(); self.length as usize]
    }

    pub fn is_principal(&self) -> bool {
        self.divisor_log2 == 0
    }
}

/// Prym-Tyurin data shared by every factor of `JX_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrymTyurinData {
    pub n: u32,
    /// The exponent is `2^(n-3)`.
    pub exponent_log2: u32,
}

impl PrymTyurinData {
    pub fn exponent(&self) -> BigUint {
        BigUint::one() << self.exponent_log2
    }

    pub fn polarization_type(&self, dim: u32) -> PolarizationType {
        PolarizationType {
            divisor_log2: self.exponent_log2,
            length: dim,
        }
    }
}

pub fn pt_data(n: u32) -> Result<PrymTyurinData, DecompError> {
    check_type(n, 3)?;
    Ok(PrymTyurinData {
        n,
        exponent_log2: n - 3,
    })
}

/// `|ker φ| = 2^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelOrder {
    pub exponent: BigUint,
}

impl KernelOrder {
    pub fn power_of_two(&self) -> String {
        format!("2^{}", self.exponent)
    }

    /// Decimal value, when the exponent is at most [`MAX_DECIMAL_EXPONENT`].
    pub fn decimal(&self) -> Option<String> {
        let e = self
            .exponent
            .to_u64()
            .filter(|&e| e <= MAX_DECIMAL_EXPONENT)?;
        Some((BigUint::one() << e).to_string())
    }
}

/// `(2^(n-3))^(g_n)`.
pub fn kernel_order(n: u32) -> Result<KernelOrder, DecompError> {
    let pt = pt_data(n)?;
    let g = genus_of_type(n).map_err(|e| DecompError::Invariant(e.to_string()))?;
    Ok(KernelOrder {
        exponent: g * pt.exponent_log2,
    })
}

/// One summand `π_T^* JX_T^-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactorRecord {
    pub subset: SubsetMask,
    pub quotient_type: u32,
    pub prym_dim: u32,
    pub pt_exponent_log2: u32,
}

impl FactorRecord {
    pub fn polarization_type(&self) -> PolarizationType {
        PolarizationType {
            divisor_log2: self.pt_exponent_log2,
            length: self.prym_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub n: u32,
    /// Multiplicity of each positive factor dimension.
    pub counts_by_dim: BTreeMap<u32, BigUint>,
    /// Number of summands with `|T| ≤ n - 3`, trivial ones included.
    pub factor_count: BigUint,
    /// `Σ_m C(n+1, 2m+2)`.
    pub positive_factor_count: BigUint,
    pub total_dim: BigUint,
    pub genus: BigUint,
    pub pt: PrymTyurinData,
    pub kernel_order: KernelOrder,
    pub isogeny_degree_check: bool,
}

impl DecompositionReport {
    /// All summands, sorted by `(|T|, bits)`. Lazy: the list has
    /// `Σ_{t ≤ n-3} C(n+1, t)` entries.
    pub fn factors(&self) -> impl Iterator<Item = FactorRecord> + '_ {
        let n = self.n;
        let e = self.pt.exponent_log2;
        SubsetMask::up_to_size(n + 1, n - 3).map(move |subset| FactorRecord {
            subset,
            quotient_type: n - subset.len(),
            prym_dim: prym_dimension(n, subset.len()),
            pt_exponent_log2: e,
        })
    }

    pub fn to_document(&self) -> DecompositionDocument {
        let factors = (self.n <= FACTOR_LIST_LIMIT).then(|| {
            self.factors()
                .map(|f| FactorEntry {
                    subset: f.subset,
                    quotient_type: f.quotient_type,
                    dim: f.prym_dim,
                })
                .collect()
        });
        DecompositionDocument {
            n: self.n,
            genus: self.genus.to_string(),
            total_dim: self.total_dim.to_string(),
            pt_exponent: self.pt.exponent().to_string(),
            counts_by_dim: self
                .counts_by_dim
                .iter()
                .map(|(&dim, mult)| DimensionEntry {
                    dim,
                    multiplicity: mult.to_string(),
                    polarization_type: self
                        .pt
                        .polarization_type(dim)
                        .to_vec()
                        .iter()
                        .map(|d| d.to_string())
                        .collect(),
                })
                .collect(),
            factor_count: self.factor_count.to_string(),
            positive_factor_count: self.positive_factor_count.to_string(),
            kernel_order: KernelOrderEntry {
                decimal: self.kernel_order.decimal(),
                power_of_two: self.kernel_order.power_of_two(),
            },
            isogeny_degree_check: self.isogeny_degree_check,
            factors,
        }
    }
}

/// Serialized prediction; key order is fixed.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionDocument {
    pub n: u32,
    pub genus: String,
    pub total_dim: String,
    pub pt_exponent: String,
    pub counts_by_dim: Vec<DimensionEntry>,
    pub factor_count: String,
    pub positive_factor_count: String,
    pub kernel_order: KernelOrderEntry,
    pub isogeny_degree_check: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorEntry>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionEntry {
    pub dim: u32,
    pub multiplicity: String,
    pub polarization_type: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelOrderEntry {
    pub decimal: Option<String>,
    pub power_of_two: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorEntry {
    #[serde(rename = "T")]
    pub subset: SubsetMask,
    pub quotient_type: u32,
    pub dim: u32,
}

/// Build the report. Multiplicities are accumulated by subset size and then
/// checked against `C(n+1, 2m+2)`; the total is checked against the genus.
pub fn decompose(n: u32) -> Result<DecompositionReport, DecompError> {
    check_type(n, 3)?;
    let pt = pt_data(n)?;
    let mut counts_by_dim: BTreeMap<u32, BigUint> = BTreeMap::new();
    let mut factor_count = BigUint::zero();
    for t in 0..=n - 3 {
        let c = choose(n + 1, t);
        factor_count += &c;
        let m = prym_dimension(n, t);
        if m > 0 {
            *counts_by_dim.entry(m).or_default() += c;
        }
    }
    for (&m, c) in &counts_by_dim {
        if *c != choose(n + 1, 2 * m + 2) {
            return Err(DecompError::Invariant(format!(
                "multiplicity of dimension {m} for n = {n}"
            )));
        }
    }
    let total_dim: BigUint = counts_by_dim.iter().map(|(&m, c)| c * m).sum();
    let positive_factor_count: BigUint = counts_by_dim.values().sum();
    let genus = genus_of_type(n).map_err(|e| DecompError::Invariant(e.to_string()))?;
    let kernel_order = kernel_order(n)?;
    let isogeny_degree_check = total_dim == genus;
    if !isogeny_degree_check {
        return Err(DecompError::Invariant(format!(
            "total dimension {total_dim} ≠ genus {genus} for n = {n}"
        )));
    }
    if kernel_order.exponent != &total_dim * pt.exponent_log2 {
        return Err(DecompError::Invariant(format!("kernel order for n = {n}")));
    }
    Ok(DecompositionReport {
        n,
        counts_by_dim,
        factor_count,
        positive_factor_count,
        total_dim,
        genus,
        pt,
        kernel_order,
        isogeny_degree_check,
    })
}

/// A rational character of `E_n`, given by the generators it sends to `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Character {
    support: SubsetMask,
}

impl Character {
    /// Supports must have even weight: the character has to kill `σ_0 ⋯ σ_n`.
    pub fn new(n: u32, support: SubsetMask) -> Result<Self, DecompError> {
        if support.span() > n + 1 {
            return Err(DecompError::Invariant(format!(
                "support {support} exceeds σ_0..σ_{n}"
            )));
        }
        if support.len() % 2 == 1 {
            return Err(DecompError::OddSupport(support));
        }
        Ok(Character { support })
    }

    pub fn support(&self) -> SubsetMask {
        self.support
    }

    pub fn value_on_generator(&self, i: u32) -> i8 {
        if self.support.contains(i) {
            -1
        } else {
            1
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.support.is_empty()
    }
}

/// `dim B_χ` for the `E_n` action of signature `(0; 2^(n+1))`:
/// `dim ρ (γ - 1) + ½ Σ_k (dim ρ - dim Fix_{⟨σ_k⟩} ρ)` for nontrivial `χ`,
/// and `γ` for the trivial character.
pub fn character_dimension(n: u32, chi: &Character) -> Result<u32, DecompError> {
    let sig = signature_of_type(n).map_err(|e| DecompError::Invariant(e.to_string()))?;
    let gamma = sig.quotient_genus as i64;
    if chi.is_trivial() {
        return Ok(gamma as u32);
    }
    let dim_rho = 1i64;
    let moved: i64 = (0..sig.branch_count() as u32)
        .map(|k| {
            let fixed = if chi.value_on_generator(k) == 1 { 1 } else { 0 };
            dim_rho - fixed
        })
        .sum();
    let twice = 2 * dim_rho * (gamma - 1) + moved;
    if twice < 0 || twice % 2 != 0 {
        return Err(DecompError::Invariant(format!(
            "character dimension for {}",
            chi.support
        )));
    }
    Ok((twice / 2) as u32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterReport {
    pub n: u32,
    pub entries: Vec<(Character, u32)>,
}

impl CharacterReport {
    pub fn total_dim(&self) -> u64 {
        self.entries.iter().map(|&(_, d)| d as u64).sum()
    }
}

/// Every rational character of `E_n` with its dimension (`2^n` entries).
pub fn character_decompose(n: u32) -> Result<CharacterReport, DecompError> {
    check_type(n, 2)?;
    if n > MAX_ENUMERATED_TYPE {
        return Err(DecompError::TooLargeToEnumerate(n));
    }
    let mut entries = Vec::with_capacity(1 << n);
    for w in (0..=n + 1).step_by(2) {
        for support in SubsetMask::of_size(n + 1, w) {
            let chi = Character { support };
            entries.push((chi, character_dimension(n, &chi)?));
        }
    }
    Ok(CharacterReport { n, entries })
}

/// Outcome of matching the character side against the subset side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agreement {
    pub n: u32,
    pub matched: usize,
    pub characters: usize,
    pub factors: usize,
}

/// Check that `U ↦ complement(U)` is a dimension-preserving bijection between
/// characters with `|U| ≥ 4` and positive-dimensional factors, and that the
/// remaining characters are trivial.
pub fn character_subset_agreement(n: u32) -> Result<Agreement, DecompError> {
    if n > MAX_ENUMERATED_TYPE {
        return Err(DecompError::TooLargeToEnumerate(n));
    }
    let chars = character_decompose(n)?;
    let report = decompose(n)?;
    let len = n + 1;
    let mut from_chars = Vec::new();
    for &(chi, dim) in &chars.entries {
        if chi.support.len() >= 4 {
            from_chars.push((chi.support.complement(len), dim));
        } else if dim != 0 {
            return Err(DecompError::Invariant(format!(
                "character {} should be trivial",
                chi.support
            )));
        }
    }
    let mut from_subsets: Vec<(SubsetMask, u32)> = report
        .factors()
        .filter(|f| f.prym_dim > 0)
        .map(|f| (f.subset, f.prym_dim))
        .collect();
    from_chars.sort_unstable();
    from_subsets.sort_unstable();
    if from_chars != from_subsets {
        let diff = from_chars.iter().zip(&from_subsets).find(|(a, b)| a != b);
        return Err(DecompError::Invariant(format!(
            "character/subset mismatch for n = {n}: {} vs {} entries, first difference {:?}",
            from_chars.len(),
            from_subsets.len(),
            diff
        )));
    }
    Ok(Agreement {
        n,
        matched: from_chars.len(),
        characters: chars.entries.len(),
        factors: from_subsets.len(),
    })
}

/// One exact identity, with both sides rendered in decimal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

impl IdentityCheck {
    fn of(lhs: BigUint, rhs: BigUint) -> Self {
        IdentityCheck {
            holds: lhs == rhs,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityRow {
    pub n: u32,
    /// `Σ_m m C(n+1, 2m+2) = 2^(n-2)(n-3) + 1`.
    pub genus_sum: IdentityCheck,
    /// Odd `n`: `g_n - 1 = |H_n| (dim JX_n^- - 1)`, the Riemann-Hurwitz
    /// identity of an unramified cover `X_n → X_n / H_n`.
    pub etale: Option<IdentityCheck>,
    /// `log2 |ker φ| = log2(exponent) · Σ dims`.
    pub kernel: IdentityCheck,
}

impl IdentityRow {
    pub fn holds(&self) -> bool {
        self.genus_sum.holds && self.kernel.holds && self.etale.as_ref().is_none_or(|e| e.holds)
    }
}

pub fn identity_row(n: u32) -> Result<IdentityRow, DecompError> {
    check_type(n, 3)?;
    let dims: BigUint = (1..=(n - 1) / 2)
        .map(|m| choose(n + 1, 2 * m + 2) * m)
        .sum();
    let genus = genus_of_type(n).map_err(|e| DecompError::Invariant(e.to_string()))?;
    let genus_sum = IdentityCheck::of(dims.clone(), genus.clone());
    let etale = (n % 2 == 1).then(|| {
        let lhs = &genus - 1u32;
        let m = prym_dimension(n, 0);
        let rhs = (BigUint::one() << h_subgroup_order_log2(n)) * (m - 1);
        IdentityCheck::of(lhs, rhs)
    });
    let pt = pt_data(n)?;
    let kernel = IdentityCheck::of(kernel_order(n)?.exponent, dims * pt.exponent_log2);
    Ok(IdentityRow {
        n,
        genus_sum,
        etale,
        kernel,
    })
}

/// Identity rows for `3 ≤ n ≤ max_n`.
pub fn identity_suite(max_n: u32) -> Result<Vec<IdentityRow>, DecompError> {
    check_type(max_n, 3)?;
    (3..=max_n).map(identity_row).collect()
}
