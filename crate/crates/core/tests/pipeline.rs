use std::time::Instant;

use humbert_core::counting::{count_charsum, count_naive, Budget};
use humbert_core::verifier::{
    build_trace_table, evaluate, fixed_locus_checks, full_verify, VerifyOptions,
};
use humbert_core::{random_smooth_curve, ExtField, Method, SubsetMask};

fn opts(kmax: u32, method: Method, seed: u64) -> VerifyOptions {
    VerifyOptions {
        kmax,
        method,
        seed,
        ..VerifyOptions::default()
    }
}

#[test]
fn n4_passes_for_several_primes() {
    for p in [5, 7, 11] {
        for seed in 0..2 {
            let a = random_smooth_curve(4, p, seed).unwrap();
            let t = Instant::now();
            let r = full_verify(&a, &opts(3, Method::Auto, seed), None).unwrap();
            eprintln!("n=4 p={p} seed={seed}: {:?}", t.elapsed());
            assert!(
                r.passed(),
                "{:?}",
                r.nonzero_residuals().collect::<Vec<_>>()
            );
            assert!(r.orbit_violations.is_empty());
        }
    }
}

#[test]
fn n5_passes() {
    let a = random_smooth_curve(5, 5, 1).unwrap();
    let t = Instant::now();
    let r = full_verify(&a, &opts(2, Method::Auto, 1), None).unwrap();
    eprintln!("n=5 p=5: {:?}", t.elapsed());
    assert!(r.passed());
    assert_eq!(r.residuals.len(), 12);
}

#[test]
fn methods_agree_on_the_table() {
    let a = random_smooth_curve(4, 5, 9).unwrap();
    let naive = build_trace_table(&a, &opts(2, Method::Naive, 9), None).unwrap();
    let charsum = build_trace_table(&a, &opts(2, Method::Charsum, 9), None).unwrap();
    let fixed = fixed_locus_checks(&a, &opts(2, Method::Auto, 9)).unwrap();
    let (rn, rc) = (evaluate(&naive, fixed.clone()), evaluate(&charsum, fixed));
    assert_eq!(rn.residuals, rc.residuals);
    assert_eq!(rn.new_traces, rc.new_traces);
    assert_eq!(rn.verdict, rc.verdict);
}

#[test]
fn every_single_perturbation_fails() {
    let a = random_smooth_curve(5, 5, 4).unwrap();
    let o = opts(1, Method::Auto, 4);
    let table = build_trace_table(&a, &o, None).unwrap();
    let fixed = fixed_locus_checks(&a, &o).unwrap();
    assert!(evaluate(&table, fixed.clone()).passed());
    let cells: Vec<(SubsetMask, u32)> = table.entries().map(|r| (r.subset, r.k)).collect();
    for (s, k) in cells {
        for delta in [-1, 1, 2] {
            let mut bad = table.clone();
            if !bad.perturb(s, k, delta) {
                continue;
            }
            assert!(
                !evaluate(&bad, fixed.clone()).passed(),
                "T={s} k={k} delta={delta}"
            );
        }
    }
}

#[test]
fn counters_agree_on_random_quotients() {
    let f = ExtField::new(7, 2, 0).unwrap();
    for seed in 0..4 {
        let a = random_smooth_curve(4, 7, seed).unwrap();
        for i in 0..5 {
            let q = a.quotient(SubsetMask::singleton(i)).unwrap();
            let c = q.as_curve().unwrap();
            let b = Budget::default();
            assert_eq!(
                count_naive(c, &f, &b).unwrap(),
                count_charsum(c, &f, &b).unwrap()
            );
        }
    }
}
