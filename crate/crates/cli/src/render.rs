//! Plain-text tables.

use std::fmt::Write;

use humbert_core::decomp::{DecompositionReport, IdentityRow};
use humbert_core::verifier::VerificationReport;

fn polarization(divisor: &str, dim: u32) -> String {
    if dim <= 3 {
        let parts = vec![divisor; dim as usize];
        format!("({})", parts.join(","))
    } else {
        format!("({divisor},…,{divisor}) length {dim}")
    }
}

pub fn decomposition(r: &DecompositionReport) -> String {
    let mut s = String::new();
    let exp = r.pt.exponent().to_string();
    let _ = writeln!(s, "type n = {}", r.n);
    let _ = writeln!(s, "genus                 {}", r.genus);
    let _ = writeln!(
        s,
        "factors               {} of positive dimension, total {} ({} summands with |T| ≤ n-3)",
        r.positive_factor_count, r.total_dim, r.factor_count
    );
    let _ = writeln!(
        s,
        "  {:>4}  {:>24}  polarization type",
        "dim", "multiplicity"
    );
    for (dim, mult) in &r.counts_by_dim {
        let _ = writeln!(
            s,
            "  {:>4}  {:>24}  {}",
            dim,
            mult.to_string(),
            polarization(&exp, *dim)
        );
    }
    let _ = writeln!(
        s,
        "Prym-Tyurin exponent  {} = 2^{}",
        exp, r.pt.exponent_log2
    );
    match r.kernel_order.decimal() {
        Some(d) => {
            let _ = writeln!(
                s,
                "kernel order          {} = {}",
                d,
                r.kernel_order.power_of_two()
            );
        }
        None => {
            let _ = writeln!(s, "kernel order          {}", r.kernel_order.power_of_two());
        }
    }
    let _ = writeln!(
        s,
        "isogeny degree check  {}",
        if r.isogeny_degree_check {
            "ok"
        } else {
            "FAILED"
        }
    );
    s
}

pub fn identities(rows: &[IdentityRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>3}  {:<45}  {:<45}  {:<45}  result",
        "n", "genus sum", "étale Riemann-Hurwitz", "kernel exponent"
    );
    for r in rows {
        let etale = r
            .etale
            .as_ref()
            .map_or("-".to_string(), |e| format!("{} = {}", e.lhs, e.rhs));
        let _ = writeln!(
            s,
            "{:>3}  {:<45}  {:<45}  {:<45}  {}",
            r.n,
            format!("{} = {}", r.genus_sum.lhs, r.genus_sum.rhs),
            etale,
            format!("{} = {}", r.kernel.lhs, r.kernel.rhs),
            if r.holds() { "pass" } else { "FAIL" }
        );
    }
    s
}

pub fn verification(seed: Option<u64>, r: &VerificationReport) -> String {
    let mut s = String::new();
    let seed = seed.map_or("file".to_string(), |v| v.to_string());
    let bad: Vec<_> = r.nonzero_residuals().collect();
    let fixed_bad = r
        .fixed_locus
        .iter()
        .filter(|f| f.count != f.expected)
        .count();
    let _ = writeln!(
        s,
        "n={} p={} seed={} curve={}  counts={} unknowns={} residuals={} (nonzero {}) weil={} orbit={} fixed-locus={}/{}  {}",
        r.curve.n,
        r.p,
        seed,
        r.curve_hash,
        r.counts.len(),
        r.new_traces.len(),
        r.residuals.len(),
        bad.len(),
        r.weil_violations.len(),
        r.orbit_violations.len(),
        r.fixed_locus.len() - fixed_bad,
        r.fixed_locus.len(),
        if r.passed() { "PASS" } else { "FAIL" }
    );
    for res in bad {
        let _ = writeln!(
            s,
            "  residual T={} k={} type {}: {}",
            res.subset, res.k, res.quotient_type, res.value
        );
    }
    for w in &r.weil_violations {
        let _ = writeln!(
            s,
            "  Weil bound violated: {:?} T={} k={} value {} (genus {})",
            w.subject, w.subset, w.k, w.value, w.genus
        );
    }
    for o in &r.orbit_violations {
        let _ = writeln!(
            s,
            "  count T={} k={} N={} is not divisible by {}",
            o.subset, o.k, o.n_points, o.modulus
        );
    }
    for f in r.fixed_locus.iter().filter(|f| f.count != f.expected) {
        let _ = writeln!(
            s,
            "  fixed locus of σ_{}: {} points, expected {}",
            f.involution, f.count, f.expected
        );
    }
    s
}
