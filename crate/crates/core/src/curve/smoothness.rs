//! Brute-force smoothness checks, used to cross-examine the minor criterion.
//!
//! These walk every projective point over a (small) field and are meant for
//! tests and diagnostics only.

use crate::field::{Elem, ExtField, PrimeField};

use super::linalg;

/// Projective representatives of `P^dim(F)` with first nonzero coordinate 1.
pub fn projective_points(field: &ExtField, dim: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let q = field.order();
    (0..=dim).flat_map(move |lead| {
        let free = (dim - lead) as u32;
        (0..q.pow(free)).map(move |mut code| {
            let mut pt = vec![field.zero(); dim + 1];
            pt[lead] = field.one();
            for slot in pt.iter_mut().skip(lead + 1).rev() {
                *slot = field.from_index(code % q);
                code /= q;
            }
            pt
        })
    })
}

fn quadric_values(rows: &[Vec<u32>], field: &ExtField, point: &[Elem]) -> Vec<Elem> {
    let squares: Vec<Elem> = point.iter().map(|x| field.mul(x, x)).collect();
    rows.iter()
        .map(|row| {
            row.iter()
                .zip(&squares)
                .fold(field.zero(), |acc, (&a, sq)| {
                    field.add(&acc, &field.scale(sq, a))
                })
        })
        .collect()
}

pub fn lies_on(rows: &[Vec<u32>], field: &ExtField, point: &[Elem]) -> bool {
    quadric_values(rows, field, point)
        .iter()
        .all(|v| field.is_zero(v))
}

/// Rank of the Jacobian `(2 a_ji x_i)` at `point`.
pub fn jacobian_rank(rows: &[Vec<u32>], field: &ExtField, point: &[Elem]) -> usize {
    let two = 2 % field.characteristic();
    let mut m: Vec<Vec<Elem>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(point)
                .map(|(&a, x)| field.scale(x, field.base().mul(two, a)))
                .collect()
        })
        .collect();
    let ncols = point.len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| !field.is_zero(&m[r][col])) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = field.inv(&m[rank][col]).expect("nonzero pivot");
        let prow: Vec<Elem> = m[rank].iter().map(|v| field.mul(v, &inv)).collect();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && !field.is_zero(&row[col]) {
                let c = row[col].clone();
                for (dst, src) in row.iter_mut().zip(&prow) {
                    *dst = field.sub(dst, &field.mul(&c, src));
                }
            }
        }
        m[rank] = prow;
        rank += 1;
    }
    rank
}

/// First point of the variety over `field` at which the Jacobian drops rank.
pub fn find_singular_point(rows: &[Vec<u32>], field: &ExtField) -> Option<Vec<Elem>> {
    let dim = rows.first()?.len() - 1;
    projective_points(field, dim)
        .find(|pt| lies_on(rows, field, pt) && jacobian_rank(rows, field, pt) < rows.len())
}

/// Whether the system fails to be a non-degenerate complete intersection in
/// an obvious linear-algebra way: dependent quadrics, or a row combination
/// supported on a single square (which forces that coordinate to vanish).
pub fn is_degenerate(rows: &[Vec<u32>], p: &PrimeField) -> bool {
    let r = linalg::rank(rows, p);
    if r < rows.len() {
        return true;
    }
    let ncols = rows.first().map_or(0, Vec::len);
    (0..ncols).any(|c| {
        let mut ext = rows.to_vec();
        let mut unit = vec![0u32; ncols];
        unit[c] = 1;
        ext.push(unit);
        linalg::rank(&ext, p) == r
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_enumeration_counts() {
        let f = ExtField::new(3, 1, 0).unwrap();
        assert_eq!(projective_points(&f, 2).count(), 13);
        let f5 = ExtField::new(5, 1, 0).unwrap();
        assert_eq!(projective_points(&f5, 2).count(), 31);
    }

    #[test]
    fn smooth_conic_has_no_singular_point() {
        let f = ExtField::new(5, 2, 0).unwrap();
        assert!(find_singular_point(&[vec![1, 1, 1]], &f).is_none());
        // x^2 + y^2 = 0 is a pair of lines through (0:0:1)
        let sing = find_singular_point(&[vec![1, 1, 0]], &f).unwrap();
        assert_eq!(sing, vec![f.zero(), f.zero(), f.one()]);
    }

    #[test]
    fn degeneracy() {
        let p = PrimeField::new(5).unwrap();
        assert!(is_degenerate(&[vec![1, 1, 1, 0], vec![2, 2, 2, 0]], &p));
        assert!(is_degenerate(&[vec![1, 1, 1, 0], vec![1, 1, 1, 1]], &p));
        assert!(!is_degenerate(&[vec![1, 1, 1, 0], vec![0, 1, 2, 3]], &p));
    }
}
