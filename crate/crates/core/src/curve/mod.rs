//! The Humbert-Edge curve model.
//!
//! A curve of type `n` is cut out of `P^n` by `n - 1` diagonal quadrics
//! `Σ_i a_ji x_i^2 = 0`; it is stored as the `(n-1) × (n+1)` coefficient
//! matrix over `F_p`. The sign flips `σ_i: x_i ↦ -x_i` generate `E_n`, and the
//! quotient by a subset `T` of them is obtained by eliminating the squares
//! `x_i^2, i ∈ T`.

mod group;
mod invariants;
mod linalg;
pub mod smoothness;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{FieldError, PrimeField};

pub use group::{group_order_log2, h_subgroup_order_log2, GroupElement, SubsetMask};
pub use invariants::{
    fixed_point_degree, genus_of_type, genus_small, signature_of_type, Signature,
};

/// Types above this are accepted by the closed-form code but not as matrices.
pub const MAX_CURVE_TYPE: u32 = 60;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("type {nu} is below the minimum {min}")]
    TypeTooSmall { nu: u32, min: u32 },
    #[error("type {0} is too large")]
    TypeTooLarge(u32),
    #[error("expected a {rows}×{cols} coefficient matrix, got {detail}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        detail: String,
    },
    #[error("entry ({row}, {col}) = {value} is not reduced mod {p}")]
    UnreducedEntry {
        row: usize,
        col: usize,
        value: u64,
        p: u32,
    },
    #[error("vanishing maximal minor on columns {columns:?}")]
    VanishingMinor { columns: Vec<u32> },
    #[error("cannot take the quotient by {size} involutions on a curve of type {n}")]
    SubsetTooLarge { size: u32, n: u32 },
    #[error("subset {subset} refers to involutions outside σ_0..σ_{n}")]
    SubsetOutOfRange { subset: SubsetMask, n: u32 },
    #[error("no smooth curve of type {n} over F_{p} found from seed {seed}")]
    SamplingExhausted { n: u32, p: u32, seed: u64 },
    #[error("no smooth curve of type {n} exists over F_{p} (needs n ≤ p)")]
    NoSmoothCurve { n: u32, p: u64 },
    #[error("malformed curve document: {0}")]
    Parse(String),
}

/// An accepted Humbert-Edge curve: all maximal minors of `rows` are nonzero mod `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CurveMatrix {
    n: u32,
    field: PrimeField,
    rows: Vec<Vec<u32>>,
}

impl CurveMatrix {
    /// Validate a candidate matrix. See [`validate_curve`].
    pub fn new(n: u32, p: u64, rows: Vec<Vec<u32>>) -> Result<Self, CurveError> {
        validate_curve(n, p, rows)
    }

    /// The type `n` (the curve lives in `P^n`).
    pub fn curve_type(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.field.modulus()
    }

    pub fn prime_field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Reduced row echelon form with leading ones; two matrices define the
    /// same curve iff their canonical forms are equal.
    pub fn canonical(&self) -> CurveMatrix {
        let rows = linalg::rref(&self.rows, &self.field);
        CurveMatrix {
            n: self.n,
            field: self.field,
            rows,
        }
    }

    pub fn is_canonical(&self) -> bool {
        linalg::rref(&self.rows, &self.field) == self.rows
    }

    /// Quotient by `⟨T⟩`; see [`quotient`].
    pub fn quotient(&self, subset: SubsetMask) -> Result<QuotientCurve, CurveError> {
        quotient(self, subset)
    }

    /// Columns other than `column`: the fixed locus of `σ_column` inside `P^{n-1}`.
    pub fn drop_column(&self, column: u32) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(i, _)| i as u32 != column)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect()
    }

    pub fn to_document(&self) -> CurveDocument {
        let c = self.canonical();
        CurveDocument {
            n: c.n,
            p: c.p(),
            rows: c
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| v as u64).collect())
                .collect(),
        }
    }

    /// Canonical one-line JSON, keys in the order `n`, `p`, `rows`, newline-terminated.
    pub fn to_canonical_string(&self) -> String {
        self.to_document().to_canonical_string()
    }

    pub fn from_json_str(s: &str) -> Result<CurveMatrix, CurveError> {
        let doc: CurveDocument =
            serde_json::from_str(s).map_err(|e| CurveError::Parse(e.to_string()))?;
        doc.into_curve()
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CurveMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {} over F_{}:", self.n, self.p())?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(u32::to_string).collect();
            write!(f, " [{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Serialized form of a curve (or of the type-1 marker, which has no rows).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDocument {
    pub n: u32,
    pub p: u32,
    pub rows: Vec<Vec<u64>>,
}

impl CurveDocument {
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn into_curve(self) -> Result<CurveMatrix, CurveError> {
        let p = self.p as u64;
        let mut rows = Vec::with_capacity(self.rows.len());
        for (r, row) in self.rows.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (c, v) in row.into_iter().enumerate() {
                if v >= p {
                    return Err(CurveError::UnreducedEntry {
                        row: r,
                        col: c,
                        value: v,
                        p: self.p,
                    });
                }
                out.push(v as u32);
            }
            rows.push(out);
        }
        validate_curve(self.n, p, rows)
    }
}

/// Accept a coefficient matrix iff every `(n-1)×(n-1)` minor is nonzero mod `p`.
///
/// With that condition at most one coordinate vanishes at any point and the
/// Jacobian has full rank everywhere. On rejection the kept column set of the
/// first vanishing minor (lexicographic) is reported.
pub fn validate_curve(n: u32, p: u64, rows: Vec<Vec<u32>>) -> Result<CurveMatrix, CurveError> {
    let field = PrimeField::new(p)?;
    if n < 2 {
        return Err(CurveError::TypeTooSmall { nu: n, min: 2 });
    }
    if n > MAX_CURVE_TYPE {
        return Err(CurveError::TypeTooLarge(n));
    }
    let (nr, nc) = (n as usize - 1, n as usize + 1);
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(CurveError::DimensionMismatch {
            rows: nr,
            cols: nc,
            detail: format!("{} rows of widths {:?}", rows.len(), widths),
        });
    }
    for (r, row) in rows.iter().enumerate() {
        if let Some((c, &v)) = row.iter().enumerate().find(|&(_, &v)| v >= field.modulus()) {
            return Err(CurveError::UnreducedEntry {
                row: r,
                col: c,
                value: v as u64,
                p: field.modulus(),
            });
        }
    }
    if let Some(columns) = first_vanishing_minor(&rows, &field) {
        return Err(CurveError::VanishingMinor { columns });
    }
    Ok(CurveMatrix { n, field, rows })
}

/// Kept column set of the first vanishing maximal minor, if any.
pub fn first_vanishing_minor(rows: &[Vec<u32>], field: &PrimeField) -> Option<Vec<u32>> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    SubsetMask::of_size(nc as u32, nr as u32)
        .map(|m| m.indices())
        .find(|cols| {
            let sub: Vec<Vec<u32>> = rows
                .iter()
                .map(|r| cols.iter().map(|&c| r[c as usize]).collect())
                .collect();
            linalg::rank(&sub, field) < nr
        })
}

/// Result of a quotient: a curve of type `n - |T| ≥ 2`, or the rational line
/// (type 1, no equations, genus 0) when `|T| = n - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuotientCurve {
    Curve(CurveMatrix),
    RationalLine { p: u32 },
}

impl QuotientCurve {
    pub fn curve_type(&self) -> u32 {
        match self {
            QuotientCurve::Curve(c) => c.curve_type(),
            QuotientCurve::RationalLine { .. } => 1,
        }
    }

    pub fn as_curve(&self) -> Option<&CurveMatrix> {
        match self {
            QuotientCurve::Curve(c) => Some(c),
            QuotientCurve::RationalLine { .. } => None,
        }
    }

    pub fn to_document(&self) -> CurveDocument {
        match self {
            QuotientCurve::Curve(c) => c.to_document(),
            QuotientCurve::RationalLine { p } => CurveDocument {
                n: 1,
                p: *p,
                rows: Vec::new(),
            },
        }
    }
}

/// `X_T = X / ⟨T⟩`, in canonical form.
///
/// For each `i ∈ T` in increasing order the surviving row with the smallest
/// index and a nonzero entry in column `i` is used as pivot to eliminate
/// `x_i^2`; pivot rows and the `T` columns are then deleted.
pub fn quotient(curve: &CurveMatrix, subset: SubsetMask) -> Result<QuotientCurve, CurveError> {
    let n = curve.n;
    if subset.span() > n + 1 {
        return Err(CurveError::SubsetOutOfRange { subset, n });
    }
    let t = subset.len();
    if t > n - 1 {
        return Err(CurveError::SubsetTooLarge { size: t, n });
    }
    if t == n - 1 {
        return Ok(QuotientCurve::RationalLine { p: curve.p() });
    }
    let f = &curve.field;
    let mut rows = curve.rows.clone();
    let mut alive = vec![true; rows.len()];
    for i in subset.indices() {
        let col = i as usize;
        let pivot = (0..rows.len())
            .find(|&r| alive[r] && rows[r][col] != 0)
            .expect("minor condition guarantees a pivot");
        let inv = f.inv(rows[pivot][col]).expect("nonzero pivot");
        let prow: Vec<u32> = rows[pivot].iter().map(|&v| f.mul(v, inv)).collect();
        for r in 0..rows.len() {
            if r != pivot && alive[r] && rows[r][col] != 0 {
                let c = rows[r][col];
                for (dst, &src) in rows[r].iter_mut().zip(&prow) {
                    *dst = f.sub(*dst, f.mul(c, src));
                }
            }
        }
        alive[pivot] = false;
    }
    let reduced: Vec<Vec<u32>> = rows
        .into_iter()
        .zip(alive)
        .filter(|(_, keep)| *keep)
        .map(|(r, _)| {
            r.into_iter()
                .enumerate()
                .filter(|&(c, _)| !subset.contains(c as u32))
                .map(|(_, v)| v)
                .collect()
        })
        .collect();
    let q = validate_curve(n - t, f.modulus() as u64, reduced)?;
    Ok(QuotientCurve::Curve(q.canonical()))
}

/// Seeded smooth curve of type `n` over `F_p`.
///
/// Rejection-samples matrices whose first row is all ones; after the attempt
/// cap it falls back to the Vandermonde matrix `(b_i^j)` with distinct
/// `b_i ∈ F_p`, plus the column `(0,…,0,1)` ("b = ∞") when `n = p`.
///
/// A smooth curve of type `n` exists over `F_p` only if `n ≤ p`: the row
/// space is an `[n+1, n-1]` MDS code, whose dual `[n+1, 2]` MDS code needs
/// `n+1` distinct points of `P^1(F_p)`.
pub fn random_smooth_curve(n: u32, p: u64, seed: u64) -> Result<CurveMatrix, CurveError> {
    let field = PrimeField::new(p)?;
    if n < 2 {
        return Err(CurveError::TypeTooSmall { nu: n, min: 2 });
    }
    if n as u64 > p {
        return Err(CurveError::NoSmoothCurve { n, p });
    }
    let (nr, nc) = (n as usize - 1, n as usize + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pm = field.modulus();
    for _ in 0..64 * nc {
        let mut rows = vec![vec![1u32; nc]];
        for _ in 1..nr {
            rows.push((0..nc).map(|_| rng.gen_range(0..pm)).collect());
        }
        if let Ok(c) = validate_curve(n, p, rows) {
            return Ok(c);
        }
    }
    let finite = nc.min(pm as usize) as u32;
    let rows: Vec<Vec<u32>> = (0..nr as u64)
        .map(|j| {
            let mut row: Vec<u32> = (0..finite).map(|b| field.pow(b, j)).collect();
            if (finite as usize) < nc {
                row.push(u32::from(j as usize == nr - 1));
            }
            row
        })
        .collect();
    validate_curve(n, p, rows).map_err(|_| CurveError::SamplingExhausted { n, p: pm, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u32]]) -> Vec<Vec<u32>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn conic_is_accepted() {
        let c = CurveMatrix::new(2, 5, m(&[&[1, 1, 1]])).unwrap();
        assert_eq!(c.curve_type(), 2);
    }

    #[test]
    fn vanishing_minor_is_located() {
        let err = CurveMatrix::new(3, 5, m(&[&[1, 1, 1, 0], &[0, 1, 1, 1]])).unwrap_err();
        assert_eq!(
            err,
            CurveError::VanishingMinor {
                columns: vec![1, 2]
            }
        );
    }

    #[test]
    fn six_minors_nonzero() {
        let rows = m(&[&[1, 1, 1, 0], &[0, 1, 2, 3]]);
        let f = PrimeField::new(5).unwrap();
        let minors: Vec<u32> = (0..4)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
            .map(|(a, b)| f.sub(f.mul(rows[0][a], rows[1][b]), f.mul(rows[0][b], rows[1][a])))
            .collect();
        assert_eq!(minors, vec![1, 2, 3, 1, 3, 3]);
        assert!(CurveMatrix::new(3, 5, rows).is_ok());
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            CurveMatrix::new(3, 5, m(&[&[1, 1, 1]])),
            Err(CurveError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            CurveMatrix::new(2, 4, m(&[&[1, 1, 1]])),
            Err(CurveError::Field(_))
        ));
        assert!(matches!(
            CurveMatrix::new(2, 2, m(&[&[1, 1, 1]])),
            Err(CurveError::Field(_))
        ));
        assert!(matches!(
            CurveMatrix::new(2, 5, m(&[&[1, 7, 1]])),
            Err(CurveError::UnreducedEntry { col: 1, .. })
        ));
        assert!(matches!(
            CurveMatrix::new(1, 5, vec![]),
            Err(CurveError::TypeTooSmall { .. })
        ));
    }

    #[test]
    fn worked_quotients() {
        let a = CurveMatrix::new(3, 5, m(&[&[1, 1, 1, 0], &[0, 1, 2, 3]])).unwrap();
        let q3 = a.quotient(SubsetMask::singleton(3)).unwrap();
        assert_eq!(q3.as_curve().unwrap().rows(), &m(&[&[1, 1, 1]])[..]);
        let q0 = a.quotient(SubsetMask::singleton(0)).unwrap();
        assert_eq!(q0.as_curve().unwrap().rows(), &m(&[&[1, 2, 3]])[..]);
        let q_empty = a.quotient(SubsetMask::EMPTY).unwrap();
        assert_eq!(q_empty.as_curve().unwrap(), &a.canonical());
        assert_eq!(
            a.quotient(SubsetMask::from_indices([0, 1])).unwrap(),
            QuotientCurve::RationalLine { p: 5 }
        );
        assert!(matches!(
            a.quotient(SubsetMask::from_indices([0, 1, 2])),
            Err(CurveError::SubsetTooLarge { .. })
        ));
        assert!(matches!(
            a.quotient(SubsetMask::singleton(4)),
            Err(CurveError::SubsetOutOfRange { .. })
        ));
    }

    #[test]
    fn canonical_document_round_trip() {
        let a = CurveMatrix::new(3, 5, m(&[&[1, 1, 1, 0], &[0, 1, 2, 3]])).unwrap();
        let s = a.to_canonical_string();
        assert_eq!(s, "{\"n\":3,\"p\":5,\"rows\":[[1,0,4,2],[0,1,2,3]]}\n");
        let back = CurveMatrix::from_json_str(&s).unwrap();
        assert_eq!(back, a.canonical());
        assert_eq!(back.content_hash(), a.content_hash());
        assert_eq!(a.content_hash().len(), 16);
        assert!(matches!(
            CurveMatrix::from_json_str("{\"n\":2}"),
            Err(CurveError::Parse(_))
        ));
        assert!(matches!(
            CurveMatrix::from_json_str("{\"n\":2,\"p\":5,\"rows\":[[1,1,9]]}"),
            Err(CurveError::UnreducedEntry { .. })
        ));
        let marker = QuotientCurve::RationalLine { p: 5 }
            .to_document()
            .to_canonical_string();
        assert_eq!(marker, "{\"n\":1,\"p\":5,\"rows\":[]}\n");
    }

    #[test]
    fn random_curves_are_valid_and_deterministic() {
        for (n, p) in [(2, 5), (3, 5), (4, 7), (5, 7), (6, 11), (4, 5)] {
            for seed in 0..5 {
                let a = random_smooth_curve(n, p, seed).unwrap();
                assert_eq!(a, random_smooth_curve(n, p, seed).unwrap());
                assert!(validate_curve(n, p, a.rows().to_vec()).is_ok());
            }
        }
        // an all-ones row never works here; the fallback needs the point at infinity
        let a = random_smooth_curve(3, 3, 0).unwrap();
        assert_eq!(a.rows(), &m(&[&[1, 1, 1, 0], &[0, 1, 2, 1]])[..]);
        let b = random_smooth_curve(5, 5, 7).unwrap();
        assert!(validate_curve(5, 5, b.rows().to_vec()).is_ok());
        assert_eq!(
            random_smooth_curve(6, 5, 0),
            Err(CurveError::NoSmoothCurve { n: 6, p: 5 })
        );
    }

    fn all_quotients_valid_and_functorial(a: &CurveMatrix) {
        let n = a.curve_type();
        for t in SubsetMask::up_to_size(n + 1, n - 2) {
            let q = a.quotient(t).unwrap();
            assert_eq!(q.curve_type(), n - t.len());
            let qc = q.as_curve().unwrap();
            assert!(qc.is_canonical());
            assert!(validate_curve(qc.curve_type(), qc.p() as u64, qc.rows().to_vec()).is_ok());
        }
        for i in 0..=n {
            for j in 0..=n {
                if i == j {
                    continue;
                }
                let si = SubsetMask::singleton(i);
                let step = a.quotient(si).unwrap();
                let image = SubsetMask::singleton(j).project_out(si);
                let twice = step.as_curve().unwrap().quotient(image).unwrap();
                let once = a.quotient(SubsetMask::from_indices([i, j])).unwrap();
                assert_eq!(twice, once, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn quotients_exhaustively_valid_and_functorial() {
        for (n, p) in [(3, 5), (3, 7), (4, 7), (4, 11), (5, 7), (5, 13)] {
            for seed in 0..4 {
                all_quotients_valid_and_functorial(&random_smooth_curve(n, p, seed).unwrap());
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sampler_output_always_validates(n in 2u32..7, pi in 0usize..4, seed in any::<u64>()) {
                let p = [7u64, 11, 13, 17][pi];
                let a = random_smooth_curve(n, p, seed).unwrap();
                prop_assert!(validate_curve(n, p, a.rows().to_vec()).is_ok());
            }

            #[test]
            fn canonical_form_ignores_row_scaling(seed in any::<u64>(), s in 1u32..7) {
                let a = random_smooth_curve(4, 7, seed).unwrap();
                let f = a.prime_field();
                let mut rows = a.rows().to_vec();
                for v in rows[1].iter_mut() { *v = f.mul(*v, s); }
                let b = CurveMatrix::new(4, 7, rows).unwrap();
                prop_assert_eq!(a.canonical(), b.canonical());
            }
        }
    }
}
