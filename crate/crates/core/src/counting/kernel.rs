//! The enumeration kernel shared by both counters.
//!
//! Both counters walk projective representatives `v` (first nonzero
//! coordinate 1, lexicographic) of some `P^(L-1)(F_Q)` and evaluate a map
//! `v ↦ Σ_l contrib[l][v_l] ∈ F_Q^W` that is additive over coordinates. The
//! per-coordinate contributions are tabulated once; the walk keeps one
//! partial sum per level so each representative costs `O(W k)`.
//!
//! The representative space is cut into chunks by the position of the
//! leading 1 and the value of the next coordinate. Chunks are independent and
//! their results are combined with an associative, commutative reduction.

use rayon::prelude::*;

use crate::field::ExtField;

use super::CountError;

/// Largest field order for which lookup tables are built.
pub const MAX_TABLE_ORDER: u64 = 1 << 26;

/// Dense tables over `F_Q` indexed by element index.
#[derive(Debug, Clone)]
pub struct FieldTables {
    pub p: u32,
    pub k: usize,
    pub q: usize,
    /// Coefficients of element `e` at `digits[e*k .. (e+1)*k]`.
    pub digits: Vec<u32>,
    pub chi: Vec<i8>,
    /// Index of `e^2`.
    pub square: Vec<u32>,
    pub pow_p: Vec<usize>,
    /// `χ(-1)`.
    pub epsilon: i8,
    /// `Σ_{λ ≠ 0} χ(λ)`; zero in any finite field of odd order.
    pub chi_sum: i64,
}

impl FieldTables {
    pub fn new(field: &ExtField) -> Result<Self, CountError> {
        let q64 = field.order();
        if q64 > MAX_TABLE_ORDER {
            return Err(CountError::FieldTooLarge { order: q64 });
        }
        let q = q64 as usize;
        let k = field.degree() as usize;
        let p = field.characteristic();
        let mut digits = Vec::with_capacity(q * k);
        let mut square = Vec::with_capacity(q);
        let mut is_square = vec![false; q];
        for e in field.enumerate() {
            digits.extend_from_slice(e.coeffs());
            let s = field.index_of(&field.mul(&e, &e)) as usize;
            square.push(s as u32);
            is_square[s] = true;
        }
        let chi: Vec<i8> = (0..q)
            .map(|i| {
                if i == 0 {
                    0
                } else if is_square[i] {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let pow_p = (0..k).map(|d| (p as usize).pow(d as u32)).collect();
        let minus_one = field.index_of(&field.embed_base(p - 1)) as usize;
        let epsilon = chi[minus_one];
        let chi_sum = chi.iter().map(|&c| c as i64).sum();
        Ok(FieldTables {
            p,
            k,
            q,
            digits,
            chi,
            square,
            pow_p,
            epsilon,
            chi_sum,
        })
    }

    pub fn digit(&self, e: usize, d: usize) -> u32 {
        self.digits[e * self.k + d]
    }

    #[inline]
    pub fn index(&self, coeffs: &[u32]) -> usize {
        coeffs
            .iter()
            .zip(&self.pow_p)
            .map(|(&c, &w)| c as usize * w)
            .sum()
    }

    pub fn one_index(&self) -> usize {
        1
    }
}

/// Tabulated additive map over projective representatives.
pub struct Sweep<'a> {
    pub tables: &'a FieldTables,
    levels: usize,
    width: usize,
    contrib: Vec<u32>,
}

impl<'a> Sweep<'a> {
    /// `contribution(level, element, slot)` gives the coefficient vector (length
    /// `k`) that coordinate `level` with value `element` adds to output `slot`.
    pub fn new<F>(tables: &'a FieldTables, levels: usize, width: usize, mut contribution: F) -> Self
    where
        F: FnMut(usize, usize, usize, &mut [u32]),
    {
        let k = tables.k;
        let mut contrib = vec![0u32; levels * tables.q * width * k];
        for l in 0..levels {
            for e in 0..tables.q {
                for s in 0..width {
                    let at = ((l * tables.q + e) * width + s) * k;
                    contribution(l, e, s, &mut contrib[at..at + k]);
                }
            }
        }
        Sweep {
            tables,
            levels,
            width,
            contrib,
        }
    }

    fn block(&self, level: usize, e: usize) -> &[u32] {
        let bw = self.width * self.tables.k;
        let at = (level * self.tables.q + e) * bw;
        &self.contrib[at..at + bw]
    }

    fn add_into(&self, acc: &[u32], add: &[u32], out: &mut [u32]) {
        let p = self.tables.p;
        for ((o, &a), &b) in out.iter_mut().zip(acc).zip(add) {
            let s = a + b;
            *o = if s >= p { s - p } else { s };
        }
    }

    /// Chunk descriptors `(lead, value of coordinate lead+1)`.
    pub fn chunks(&self) -> Vec<(usize, Option<usize>)> {
        let mut out = Vec::new();
        for lead in 0..self.levels {
            if lead + 1 < self.levels {
                out.extend((0..self.tables.q).map(|v| (lead, Some(v))));
            } else {
                out.push((lead, None));
            }
        }
        out
    }

    fn run_chunk<L: FnMut(&[u32])>(&self, lead: usize, next: Option<usize>, leaf: &mut L) {
        let bw = self.width * self.tables.k;
        let mut acc = self.block(lead, self.tables.one_index()).to_vec();
        let mut start = lead + 1;
        if let Some(v) = next {
            let mut tmp = vec![0u32; bw];
            self.add_into(&acc, self.block(lead + 1, v), &mut tmp);
            acc = tmp;
            start = lead + 2;
        }
        let mut scratch = vec![vec![0u32; bw]; self.levels - start];
        self.descend(start, &acc, &mut scratch, leaf);
    }

    fn descend<L: FnMut(&[u32])>(
        &self,
        level: usize,
        acc: &[u32],
        scratch: &mut [Vec<u32>],
        leaf: &mut L,
    ) {
        if level == self.levels {
            leaf(acc);
            return;
        }
        let (buf, rest) = scratch.split_first_mut().expect("one buffer per level");
        for e in 0..self.tables.q {
            self.add_into(acc, self.block(level, e), buf);
            self.descend(level + 1, buf, rest, leaf);
        }
    }

    /// Map every chunk to a partial result and reduce, in parallel.
    pub fn fold<T, I, L, R>(&self, init: I, leaf: L, reduce: R) -> T
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        L: Fn(&mut T, &[u32]) + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        self.chunks()
            .into_par_iter()
            .map(|(lead, next)| {
                let mut state = init();
                self.run_chunk(lead, next, &mut |v: &[u32]| leaf(&mut state, v));
                state
            })
            .reduce(&init, &reduce)
    }
}
