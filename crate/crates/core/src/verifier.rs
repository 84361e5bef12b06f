//! Finite-field verification of the decomposition over the quotient tower.
//!
//! Frobenius traces add across an isogeny decomposition. Applying the
//! decomposition to every quotient `X_T` (itself a Humbert-Edge curve of type
//! `ν = n - |T|`) gives, for every `T` with `ν ≥ 3`,
//!
//! ```text
//! a_k(X_T) = Σ_{T' ⊇ T, n - |T'| odd ≥ 3} t_k(T')
//! ```
//!
//! where `t_k(T')` is the trace on `JX_{T'}^-`. Subsets of odd type carry the
//! unknowns and are solved top-down on the subset lattice; subsets of even
//! type `≥ 4` have no unknown of their own and yield exact residuals that
//! must vanish. Type-2 quotients are conics and only enter through `a = 0`.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::counting::{
    fixed_locus_count, trace, weil_bound_holds, Budget, CountCache, CountError, CountRecord,
    CountSource, Method,
};
use crate::curve::{CurveDocument, CurveError, CurveMatrix, SubsetMask};
use crate::decomp::prym_dimension;
use crate::field::{ExtField, FieldError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("counting X_T for T = {subset} over F_(p^{k}): {source}")]
    Count {
        subset: SubsetMask,
        k: u32,
        source: CountError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub kmax: u32,
    pub method: Method,
    /// Drives the extension-field moduli and the conic spot-check sample.
    pub seed: u64,
    pub budget: Budget,
    /// Fraction of type-2 cells that are counted anyway.
    pub conic_sample_fraction: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            kmax: 3,
            method: Method::Auto,
            seed: 0,
            budget: Budget::default(),
            conic_sample_fraction: 0.1,
        }
    }
}

/// Counts for every quotient of type `≥ 2` and every `1 ≤ k ≤ kmax`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceTable {
    curve: CurveMatrix,
    kmax: u32,
    entries: BTreeMap<(SubsetMask, u32), CountRecord>,
}

impl TraceTable {
    pub fn curve(&self) -> &CurveMatrix {
        &self.curve
    }

    pub fn n(&self) -> u32 {
        self.curve.curve_type()
    }

    pub fn p(&self) -> u32 {
        self.curve.p()
    }

    pub fn kmax(&self) -> u32 {
        self.kmax
    }

    pub fn get(&self, subset: SubsetMask, k: u32) -> Option<&CountRecord> {
        self.entries.get(&(subset, k))
    }

    /// Entries sorted by `(|T|, bits, k)`.
    pub fn entries(&self) -> impl Iterator<Item = &CountRecord> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn trace_of(&self, subset: SubsetMask, k: u32) -> i64 {
        self.entries[&(subset, k)].trace
    }

    /// Shift one point count by `delta`. Only meant for negative controls.
    /// Returns false (and changes nothing) if the cell is missing or the
    /// count would go negative.
    pub fn perturb(&mut self, subset: SubsetMask, k: u32, delta: i64) -> bool {
        match self.entries.get_mut(&(subset, k)) {
            Some(rec) if rec.n_points as i64 + delta >= 0 => {
                *rec = rec.with_points((rec.n_points as i64 + delta) as u64);
                true
            }
            _ => false,
        }
    }
}

/// The subsets indexing the table: all `T` with `|T| ≤ n - 2`.
pub fn table_subsets(n: u32) -> impl Iterator<Item = SubsetMask> {
    SubsetMask::up_to_size(n + 1, n.saturating_sub(2))
}

/// Count every quotient of type `≥ 3`; fill conics with `a = 0` and count a
/// seeded sample of them anyway.
pub fn build_trace_table(
    curve: &CurveMatrix,
    opts: &VerifyOptions,
    cache: Option<&CountCache>,
) -> Result<TraceTable, VerifyError> {
    let n = curve.curve_type();
    if n < 3 {
        return Err(VerifyError::Config(format!(
            "verification needs type n ≥ 3, got {n}"
        )));
    }
    if opts.kmax == 0 {
        return Err(VerifyError::Config("kmax must be at least 1".into()));
    }
    let fields: Vec<ExtField> = (1..=opts.kmax)
        .map(|k| ExtField::new(curve.p() as u64, k, opts.seed))
        .collect::<Result<_, _>>()?;

    let mut counted = Vec::new();
    let mut conics = Vec::new();
    for subset in table_subsets(n) {
        for k in 1..=opts.kmax {
            if n - subset.len() >= 3 {
                counted.push((subset, k));
            } else {
                conics.push((subset, k));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed_c041c);
    let amount =
        ((conics.len() as f64 * opts.conic_sample_fraction).ceil() as usize).min(conics.len());
    let mut sampled: Vec<usize> = sample(&mut rng, conics.len(), amount).into_vec();
    sampled.sort_unstable();
    counted.extend(sampled.iter().map(|&i| conics[i]));

    let hash = curve.content_hash();
    let records: Vec<CountRecord> = counted
        .par_iter()
        .map(|&(subset, k)| {
            trace(
                curve,
                subset,
                &fields[k as usize - 1],
                opts.method,
                &opts.budget,
                cache,
            )
            .map_err(|source| VerifyError::Count { subset, k, source })
        })
        .collect::<Result<_, _>>()?;

    let mut entries: BTreeMap<(SubsetMask, u32), CountRecord> =
        records.into_iter().map(|r| ((r.subset, r.k), r)).collect();
    for (subset, k) in conics {
        entries.entry((subset, k)).or_insert_with(|| {
            let q = (curve.p() as u64).pow(k);
            CountRecord::new(
                hash.clone(),
                subset,
                curve.p(),
                k,
                n - subset.len(),
                q + 1,
                CountSource::ConicLaw,
            )
        });
    }
    Ok(TraceTable {
        curve: curve.clone(),
        kmax: opts.kmax,
        entries,
    })
}

/// Solved trace of `JX_T^-` for odd-type `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NewTrace {
    #[serde(rename = "T")]
    pub subset: SubsetMask,
    pub k: u32,
    pub prym_dim: u32,
    pub value: i64,
}

/// `t_k(T)` for every odd `ν = n - |T| ≥ 3` at one level `k`.
pub fn solve_new_traces(table: &TraceTable, k: u32) -> BTreeMap<SubsetMask, NewTrace> {
    let n = table.n();
    let mut solved: BTreeMap<SubsetMask, NewTrace> = BTreeMap::new();
    for size in (0..=n - 3).rev() {
        if (n - size).is_multiple_of(2) {
            continue;
        }
        for subset in SubsetMask::of_size(n + 1, size) {
            let above: i64 = solved
                .values()
                .filter(|t| subset.is_subset_of(t.subset) && t.subset != subset)
                .map(|t| t.value)
                .sum();
            let value = table.trace_of(subset, k) - above;
            solved.insert(
                subset,
                NewTrace {
                    subset,
                    k,
                    prym_dim: prym_dimension(n, size),
                    value,
                },
            );
        }
    }
    solved
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Residual {
    #[serde(rename = "T")]
    pub subset: SubsetMask,
    pub k: u32,
    pub quotient_type: u32,
    pub value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeilSubject {
    /// A quotient curve's trace against its genus.
    Count,
    /// A solved new trace against `m = dim JX_T^-`.
    NewTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeilViolation {
    pub subject: WeilSubject,
    #[serde(rename = "T")]
    pub subset: SubsetMask,
    pub k: u32,
    pub value: i64,
    pub genus: u64,
}

/// Residuals for every even type `ν ≥ 4`, plus Weil checks on the solved traces.
pub fn check_consistency(
    table: &TraceTable,
    new_traces: &BTreeMap<SubsetMask, NewTrace>,
    k: u32,
) -> (Vec<Residual>, Vec<WeilViolation>) {
    let n = table.n();
    let q = (table.p() as u64).pow(k);
    let mut residuals = Vec::new();
    for subset in SubsetMask::up_to_size(n + 1, n.saturating_sub(4)) {
        let nu = n - subset.len();
        if nu % 2 == 1 {
            continue;
        }
        let predicted: i64 = new_traces
            .values()
            .filter(|t| subset.is_subset_of(t.subset))
            .map(|t| t.value)
            .sum();
        residuals.push(Residual {
            subset,
            k,
            quotient_type: nu,
            value: table.trace_of(subset, k) - predicted,
        });
    }
    let weil = new_traces
        .values()
        .filter(|t| !weil_bound_holds(t.value, t.prym_dim as u64, q))
        .map(|t| WeilViolation {
            subject: WeilSubject::NewTrace,
            subset: t.subset,
            k,
            value: t.value,
            genus: t.prym_dim as u64,
        })
        .collect();
    (residuals, weil)
}

/// Number of unknowns per level: `Σ_{odd ν ≥ 3} C(n+1, n-ν)`.
pub fn unknown_count(n: u32) -> u64 {
    (3..=n)
        .filter(|nu| nu % 2 == 1)
        .map(|nu| num_integer::binomial((n + 1) as u64, (n - nu) as u64))
        .sum()
}

/// Number of check equations per level: `Σ_{even ν ≥ 4} C(n+1, n-ν)`.
pub fn check_count(n: u32) -> u64 {
    (4..=n)
        .filter(|nu| nu % 2 == 0)
        .map(|nu| num_integer::binomial((n + 1) as u64, (n - nu) as u64))
        .sum()
}

/// A count that is not a multiple of `2^(ν-1)`. The `E_ν` orbits on
/// `X_T(F_Q)` have size `2^ν` (all coordinates nonzero) or `2^(ν-1)`
/// (exactly one coordinate zero), so every count must be divisible by `2^(ν-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OrbitViolation {
    #[serde(rename = "T")]
    pub subset: SubsetMask,
    pub k: u32,
    #[serde(rename = "N")]
    pub n_points: u64,
    pub modulus: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FixedLocusResult {
    pub involution: u32,
    pub count: u64,
    pub expected: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub curve: CurveDocument,
    pub curve_hash: String,
    pub p: u32,
    pub kmax: u32,
    pub counts: Vec<CountRecord>,
    pub new_traces: Vec<NewTrace>,
    pub residuals: Vec<Residual>,
    pub weil_violations: Vec<WeilViolation>,
    pub orbit_violations: Vec<OrbitViolation>,
    pub fixed_locus: Vec<FixedLocusResult>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn nonzero_residuals(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| r.value != 0)
    }
}

/// Fixed-locus counts of every involution over `F_{p^2}`.
pub fn fixed_locus_checks(
    curve: &CurveMatrix,
    opts: &VerifyOptions,
) -> Result<Vec<FixedLocusResult>, VerifyError> {
    let n = curve.curve_type();
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let count = fixed_locus_count(curve, i, opts.seed, &opts.budget).map_err(|source| {
                VerifyError::Count {
                    subset: SubsetMask::singleton(i),
                    k: 2,
                    source,
                }
            })?;
            Ok(FixedLocusResult {
                involution: i,
                count,
                expected: 1 << (n - 1),
            })
        })
        .collect()
}

/// Solve, check and assemble the report for a (possibly corrupted) table.
pub fn evaluate(table: &TraceTable, fixed_locus: Vec<FixedLocusResult>) -> VerificationReport {
    let mut new_traces = Vec::new();
    let mut residuals = Vec::new();
    let mut weil_violations: Vec<WeilViolation> = table
        .entries()
        .filter(|r| !r.weil_ok())
        .map(|r| WeilViolation {
            subject: WeilSubject::Count,
            subset: r.subset,
            k: r.k,
            value: r.trace,
            genus: r.genus(),
        })
        .collect();
    let orbit_violations: Vec<OrbitViolation> = table
        .entries()
        .filter_map(|r| {
            let modulus = 1u64 << (r.quotient_type - 1);
            (r.n_points % modulus != 0).then_some(OrbitViolation {
                subset: r.subset,
                k: r.k,
                n_points: r.n_points,
                modulus,
            })
        })
        .collect();
    for k in 1..=table.kmax() {
        let solved = solve_new_traces(table, k);
        let (res, weil) = check_consistency(table, &solved, k);
        new_traces.extend(solved.into_values());
        residuals.extend(res);
        weil_violations.extend(weil);
    }
    let clean = residuals.iter().all(|r| r.value == 0)
        && weil_violations.is_empty()
        && orbit_violations.is_empty()
        && fixed_locus.iter().all(|f| f.count == f.expected);
    VerificationReport {
        curve: table.curve().to_document(),
        curve_hash: table.curve().content_hash(),
        p: table.p(),
        kmax: table.kmax(),
        counts: table.entries().cloned().collect(),
        new_traces,
        residuals,
        weil_violations,
        orbit_violations,
        fixed_locus,
        verdict: if clean { Verdict::Pass } else { Verdict::Fail },
    }
}

/// Build the table, run every check, and report.
pub fn full_verify(
    curve: &CurveMatrix,
    opts: &VerifyOptions,
    cache: Option<&CountCache>,
) -> Result<VerificationReport, VerifyError> {
    let table = build_trace_table(curve, opts, cache)?;
    let fixed = fixed_locus_checks(curve, opts)?;
    Ok(evaluate(&table, fixed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::random_smooth_curve;

    fn opts(kmax: u32) -> VerifyOptions {
        VerifyOptions {
            kmax,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn table_shape_for_n4() {
        let a = random_smooth_curve(4, 7, 42).unwrap();
        let t = build_trace_table(&a, &opts(2), None).unwrap();
        assert_eq!(table_subsets(4).count(), 16);
        assert_eq!(t.len(), 32);
        for k in 1..=2 {
            for s in SubsetMask::of_size(5, 2) {
                assert_eq!(t.get(s, k).unwrap().trace, 0);
            }
        }
        let sampled = t
            .entries()
            .filter(|r| r.quotient_type == 2 && r.source != CountSource::ConicLaw)
            .count();
        assert_eq!(sampled, 2);
    }

    #[test]
    fn type_three_new_traces_are_the_quotient_traces() {
        let a = random_smooth_curve(4, 7, 3).unwrap();
        let t = build_trace_table(&a, &opts(1), None).unwrap();
        let solved = solve_new_traces(&t, 1);
        assert_eq!(solved.len() as u64, unknown_count(4));
        for i in 0..5 {
            let s = SubsetMask::singleton(i);
            assert_eq!(solved[&s].value, t.get(s, 1).unwrap().trace);
        }
        let (res, weil) = check_consistency(&t, &solved, 1);
        assert_eq!(res.len() as u64, check_count(4));
        let sum: i64 = (0..5)
            .map(|i| t.get(SubsetMask::singleton(i), 1).unwrap().trace)
            .sum();
        assert_eq!(
            res[0].value,
            t.get(SubsetMask::EMPTY, 1).unwrap().trace - sum
        );
        assert!(weil.is_empty());
    }

    #[test]
    fn n5_top_unknown_subtracts_pairs() {
        let a = random_smooth_curve(5, 7, 11).unwrap();
        let t = build_trace_table(&a, &opts(1), None).unwrap();
        let solved = solve_new_traces(&t, 1);
        let pairs: i64 = SubsetMask::of_size(6, 2).map(|s| solved[&s].value).sum();
        assert_eq!(
            solved[&SubsetMask::EMPTY].value,
            t.get(SubsetMask::EMPTY, 1).unwrap().trace - pairs
        );
        assert_eq!(solved[&SubsetMask::EMPTY].prym_dim, 2);
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(unknown_count(4), 5);
        assert_eq!(check_count(4), 1);
        assert_eq!(unknown_count(5), 1 + 15);
        assert_eq!(check_count(5), 6);
        assert_eq!(unknown_count(6), 7 + 35);
        assert_eq!(check_count(6), 1 + 21);
    }

    #[test]
    fn perturbation_flips_verdict() {
        let a = random_smooth_curve(4, 5, 1).unwrap();
        let t = build_trace_table(&a, &opts(1), None).unwrap();
        let fixed = fixed_locus_checks(&a, &opts(1)).unwrap();
        assert!(evaluate(&t, fixed.clone()).passed());
        let mut bad = t.clone();
        assert!(bad.perturb(SubsetMask::EMPTY, 1, 1));
        let r = evaluate(&bad, fixed);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.nonzero_residuals().count(), 1);
    }

    #[test]
    fn config_errors() {
        let conic = CurveMatrix::new(2, 5, vec![vec![1, 1, 1]]).unwrap();
        assert!(matches!(
            build_trace_table(&conic, &opts(1), None),
            Err(VerifyError::Config(_))
        ));
        let a = random_smooth_curve(3, 5, 0).unwrap();
        assert!(matches!(
            build_trace_table(&a, &opts(0), None),
            Err(VerifyError::Config(_))
        ));
        let tiny = VerifyOptions {
            budget: Budget {
                naive_tuples: 1,
                charsum_lines: 1,
                auto_naive_threshold: 0,
            },
            ..opts(1)
        };
        assert!(matches!(
            full_verify(&a, &tiny, None),
            Err(VerifyError::Count { .. })
        ));
    }
}
