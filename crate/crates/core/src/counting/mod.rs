//! Exact point counting for diagonal complete intersections over `F_Q`.
//!
//! Two independent counters:
//!
//! * [`count_naive`] walks every projective point and tests the quadrics.
//! * [`count_charsum`] expands the indicator of the zero set in additive
//!   characters. For a system of `r` quadrics in `w` variables, writing
//!   `c = tᵀA` for `t ∈ F_Q^r`, each `t` contributes `Π_i S(c_i)` with
//!   `S(0) = Q` and `S(c) = χ(c)·G`. Grouping `t` by projective line turns the
//!   `Q - 1` scalings into the factor `Σ_λ χ(λ)^s`, which is `Q - 1` for even
//!   `s` and vanishes for odd `s`. Everything is accumulated exactly in
//!   `Z[G]/(G^2 - χ(-1)Q)`; the affine count is the total divided by `Q^r`.

mod cache;
mod gauss;
mod kernel;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{genus_small, CurveError, CurveMatrix, QuotientCurve, SubsetMask};
use crate::field::{ExtField, FieldError, PrimeField};

pub use cache::{format_record, parse_record, CacheKey, CacheStats, CountCache};
pub use gauss::GaussAccumulator;
pub use kernel::{FieldTables, MAX_TABLE_ORDER};

use kernel::Sweep;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("system is over F_{system} but the field has characteristic {field}")]
    FieldMismatch { system: u32, field: u32 },
    #[error("field of order {order} is too large for table-driven counting")]
    FieldTooLarge { order: u64 },
    #[error("{method} count needs {work} steps, over the budget of {budget}")]
    BudgetExceeded {
        method: Method,
        work: u128,
        budget: u128,
    },
    #[error("inexact division in {stage}: {numerator} / {denominator}")]
    InexactDivision {
        stage: &'static str,
        numerator: String,
        denominator: String,
    },
    #[error("character sum has a nonzero Gauss-sum component {0}")]
    IrrationalGaussPart(String),
    #[error("quotient has type {0}; counting needs type at least 2")]
    TypeTooSmall(u32),
    #[error("cache: {0}")]
    Cache(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Charsum,
    #[default]
    Auto,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Naive => "naive",
            Method::Charsum => "charsum",
            Method::Auto => "auto",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Method::Naive),
            "charsum" => Ok(Method::Charsum),
            "auto" => Ok(Method::Auto),
            other => Err(format!(
                "unknown counting method `{other}` (naive | charsum | auto)"
            )),
        }
    }
}

/// Where a count came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSource {
    Naive,
    Charsum,
    Cache,
    /// Not counted: a smooth conic has `Q + 1` points.
    ConicLaw,
}

/// Work limits. `naive_tuples` bounds `Q^w`, `charsum_lines` bounds the
/// number of projective lines `(Q^r - 1)/(Q - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub naive_tuples: u128,
    pub charsum_lines: u128,
    /// `auto` picks the naive counter when `Q^w` is at most this.
    pub auto_naive_threshold: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            naive_tuples: 1_000_000_000,
            charsum_lines: 1_000_000_000,
            auto_naive_threshold: 10_000_000,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            naive_tuples: u128::MAX,
            charsum_lines: u128::MAX,
            auto_naive_threshold: 10_000_000,
        }
    }
}

fn checked_pow(q: u64, e: usize) -> u128 {
    (0..e)
        .try_fold(1u128, |acc, _| acc.checked_mul(q as u128))
        .unwrap_or(u128::MAX)
}

fn check_system(rows: &[Vec<u32>], field: &ExtField) -> Result<(usize, usize), CountError> {
    let p = field.characteristic();
    let width = rows.first().map_or(0, Vec::len);
    if rows
        .iter()
        .any(|r| r.len() != width || r.iter().any(|&v| v >= p))
    {
        return Err(CountError::Curve(CurveError::DimensionMismatch {
            rows: rows.len(),
            cols: width,
            detail: "ragged or unreduced coefficient rows".into(),
        }));
    }
    Ok((rows.len(), width))
}

/// Projective points of a diagonal system by direct enumeration.
pub fn count_system_naive(
    rows: &[Vec<u32>],
    field: &ExtField,
    budget: &Budget,
) -> Result<u64, CountError> {
    let (r, w) = check_system(rows, field)?;
    let work = checked_pow(field.order(), w);
    if work > budget.naive_tuples {
        return Err(CountError::BudgetExceeded {
            method: Method::Naive,
            work,
            budget: budget.naive_tuples,
        });
    }
    if w == 0 {
        return Ok(0);
    }
    let t = FieldTables::new(field)?;
    let base = PrimeField::new(t.p as u64)?;
    let sweep = Sweep::new(&t, w, r, |col, e, row, out| {
        let sq = t.square[e] as usize;
        for (d, o) in out.iter_mut().enumerate() {
            *o = base.mul(rows[row][col], t.digit(sq, d));
        }
    });
    Ok(sweep.fold(
        || 0u64,
        |n, v| *n += v.iter().all(|&c| c == 0) as u64,
        |a, b| a + b,
    ))
}

/// Character-sum evaluation, returning the full `a + b·G` total before division.
pub fn charsum_total(
    rows: &[Vec<u32>],
    field: &ExtField,
    budget: &Budget,
) -> Result<GaussAccumulator, CountError> {
    let (r, w) = check_system(rows, field)?;
    let q = field.order();
    let lines = (0..r)
        .try_fold(0u128, |acc, e| acc.checked_add(checked_pow(q, e)))
        .unwrap_or(u128::MAX);
    if lines > budget.charsum_lines {
        return Err(CountError::BudgetExceeded {
            method: Method::Charsum,
            work: lines,
            budget: budget.charsum_lines,
        });
    }
    let t = FieldTables::new(field)?;
    let base = PrimeField::new(t.p as u64)?;
    let k = t.k;
    // histogram of Π χ(c_i) over lines, keyed by the number of zero c_i
    let hist = if r == 0 {
        vec![0i64; w + 1]
    } else {
        let sweep = Sweep::new(&t, r, w, |row, e, col, out| {
            for (d, o) in out.iter_mut().enumerate() {
                *o = base.mul(rows[row][col], t.digit(e, d));
            }
        });
        sweep.fold(
            || vec![0i64; w + 1],
            |h, c| {
                let mut zeros = 0;
                let mut sign = 1i64;
                for slot in c.chunks_exact(k) {
                    match t.chi[t.index(slot)] {
                        0 => zeros += 1,
                        x => sign *= x as i64,
                    }
                }
                h[zeros] += sign;
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
    };

    let qb = BigInt::from(q);
    let mut total = GaussAccumulator::constant(q, t.epsilon, qb.pow(w as u32));
    for (zeros, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let s = (w - zeros) as u32;
        let scalings = if s.is_multiple_of(2) {
            BigInt::from(q - 1)
        } else {
            BigInt::from(t.chi_sum)
        };
        let weight = qb.pow(zeros as u32) * scalings * count;
        total += GaussAccumulator::gauss_power(q, t.epsilon, s).scale(&weight);
    }
    Ok(total)
}

fn exact_div(num: &BigInt, den: &BigInt, stage: &'static str) -> Result<BigInt, CountError> {
    let (quo, rem) = num.div_rem(den);
    if !rem.is_zero() {
        return Err(CountError::InexactDivision {
            stage,
            numerator: num.to_string(),
            denominator: den.to_string(),
        });
    }
    Ok(quo)
}

/// Projective points of a diagonal system via Gauss sums.
pub fn count_system_charsum(
    rows: &[Vec<u32>],
    field: &ExtField,
    budget: &Budget,
) -> Result<u64, CountError> {
    let total = charsum_total(rows, field, budget)?;
    if !total.is_rational() {
        return Err(CountError::IrrationalGaussPart(total.b.to_string()));
    }
    let q = BigInt::from(field.order());
    let affine = exact_div(&total.a, &q.pow(rows.len() as u32), "affine count")?;
    let projective = exact_div(&(affine - 1), &(q - 1), "projectivization")?;
    projective
        .to_u64()
        .ok_or_else(|| CountError::InexactDivision {
            stage: "range",
            numerator: projective.to_string(),
            denominator: "1".into(),
        })
}

/// Count with the requested method; `auto` resolves by [`Budget::auto_naive_threshold`].
pub fn count_system(
    rows: &[Vec<u32>],
    field: &ExtField,
    method: Method,
    budget: &Budget,
) -> Result<(u64, CountSource), CountError> {
    let resolved = match method {
        Method::Auto => {
            let w = rows.first().map_or(0, Vec::len);
            if checked_pow(field.order(), w) <= budget.auto_naive_threshold {
                Method::Naive
            } else {
                Method::Charsum
            }
        }
        m => m,
    };
    match resolved {
        Method::Naive => Ok((count_system_naive(rows, field, budget)?, CountSource::Naive)),
        _ => Ok((
            count_system_charsum(rows, field, budget)?,
            CountSource::Charsum,
        )),
    }
}

fn check_curve_field(curve: &CurveMatrix, field: &ExtField) -> Result<(), CountError> {
    if curve.p() != field.characteristic() {
        return Err(CountError::FieldMismatch {
            system: curve.p(),
            field: field.characteristic(),
        });
    }
    Ok(())
}

/// `#X(F_Q)` by enumeration of `P^ν(F_Q)`.
pub fn count_naive(
    curve: &CurveMatrix,
    field: &ExtField,
    budget: &Budget,
) -> Result<u64, CountError> {
    check_curve_field(curve, field)?;
    count_system_naive(curve.rows(), field, budget)
}

/// `#X(F_Q)` by Gauss sums.
pub fn count_charsum(
    curve: &CurveMatrix,
    field: &ExtField,
    budget: &Budget,
) -> Result<u64, CountError> {
    check_curve_field(curve, field)?;
    count_system_charsum(curve.rows(), field, budget)
}

/// `|a| ≤ 2g√Q`, checked as `a² ≤ 4g²Q`.
pub fn weil_bound_holds(trace: i64, genus: u64, q: u64) -> bool {
    let lhs = (trace as i128).unsigned_abs().pow(2);
    let rhs = 4u128
        .saturating_mul((genus as u128).saturating_pow(2))
        .saturating_mul(q as u128);
    lhs <= rhs
}

/// A point count of `X_T` over `F_{p^k}` and its Frobenius trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub curve_hash: String,
    #[serde(rename = "T")]
    pub subset: SubsetMask,
    pub p: u32,
    pub k: u32,
    pub quotient_type: u32,
    #[serde(rename = "N")]
    pub n_points: u64,
    #[serde(rename = "a")]
    pub trace: i64,
    pub source: CountSource,
}

impl CountRecord {
    pub fn new(
        curve_hash: String,
        subset: SubsetMask,
        p: u32,
        k: u32,
        quotient_type: u32,
        n_points: u64,
        source: CountSource,
    ) -> Self {
        let q = (p as i128).pow(k);
        let trace = (q + 1 - n_points as i128) as i64;
        CountRecord {
            curve_hash,
            subset,
            p,
            k,
            quotient_type,
            n_points,
            trace,
            source,
        }
    }

    pub fn field_order(&self) -> u64 {
        (self.p as u64).pow(self.k)
    }

    pub fn genus(&self) -> u64 {
        genus_small(self.quotient_type).expect("counted quotients have type ≥ 2")
    }

    pub fn weil_ok(&self) -> bool {
        weil_bound_holds(self.trace, self.genus(), self.field_order())
    }

    /// Replace the point count (and trace); used to build corrupted tables.
    pub fn with_points(&self, n_points: u64) -> Self {
        CountRecord::new(
            self.curve_hash.clone(),
            self.subset,
            self.p,
            self.k,
            self.quotient_type,
            n_points,
            self.source,
        )
    }
}

/// Count `X_T = X/⟨T⟩` over `field`, consulting and filling `cache`.
pub fn trace(
    curve: &CurveMatrix,
    subset: SubsetMask,
    field: &ExtField,
    method: Method,
    budget: &Budget,
    cache: Option<&CountCache>,
) -> Result<CountRecord, CountError> {
    check_curve_field(curve, field)?;
    let quotient = match curve.quotient(subset)? {
        QuotientCurve::Curve(c) => c,
        QuotientCurve::RationalLine { .. } => return Err(CountError::TypeTooSmall(1)),
    };
    let key = CacheKey {
        curve_hash: curve.content_hash(),
        subset,
        p: curve.p(),
        k: field.degree(),
    };
    let (n, source) = match cache.and_then(|c| c.get(&key)) {
        Some(n) => (n, CountSource::Cache),
        None => {
            let (n, source) = count_system(quotient.rows(), field, method, budget)?;
            if let Some(c) = cache {
                c.insert(key.clone(), n)
                    .map_err(|e| CountError::Cache(e.to_string()))?;
            }
            (n, source)
        }
    };
    Ok(CountRecord::new(
        key.curve_hash,
        subset,
        key.p,
        key.k,
        quotient.curve_type(),
        n,
        source,
    ))
}

/// Points of `X_n` with `x_i = 0`, counted over `F_{p^2}`.
pub fn fixed_locus_count(
    curve: &CurveMatrix,
    involution: u32,
    seed: u64,
    budget: &Budget,
) -> Result<u64, CountError> {
    let n = curve.curve_type();
    if n < 3 {
        return Err(CountError::TypeTooSmall(n));
    }
    if involution > n {
        return Err(CountError::Curve(CurveError::SubsetOutOfRange {
            subset: SubsetMask::singleton(involution),
            n,
        }));
    }
    let field = ExtField::new(curve.p() as u64, 2, seed)?;
    let rows = curve.drop_column(involution);
    Ok(count_system(&rows, &field, Method::Auto, budget)?.0)
}
