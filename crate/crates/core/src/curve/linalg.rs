//! Row reduction over `F_p`.

use crate::field::PrimeField;

/// Reduced row echelon form, leading entries 1, zero rows dropped.
pub fn rref(rows: &[Vec<u32>], f: &PrimeField) -> Vec<Vec<u32>> {
    let mut m = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][col]).expect("nonzero pivot");
        for v in m[rank].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let prow = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let c = row[col];
                for (dst, &src) in row.iter_mut().zip(&prow) {
                    *dst = f.sub(*dst, f.mul(c, src));
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    m
}

pub fn rank(rows: &[Vec<u32>], f: &PrimeField) -> usize {
    rref(rows, f).len()
}
