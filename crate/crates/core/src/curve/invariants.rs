//! Closed-form invariants of Humbert-Edge curves of type `ν`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::CurveError;

/// Genus `2^(ν-2) (ν-3) + 1` of a curve of type `ν ≥ 2`.
pub fn genus_of_type(nu: u32) -> Result<BigUint, CurveError> {
    if nu < 2 {
        return Err(CurveError::TypeTooSmall { nu, min: 2 });
    }
    let g: BigInt = (BigInt::one() << (nu - 2)) * (nu as i64 - 3) + 1;
    Ok(g.to_biguint().expect("genus is nonnegative for ν ≥ 2"))
}

/// Genus as a machine integer, for the small types the counting code uses.
pub fn genus_small(nu: u32) -> Result<u64, CurveError> {
    genus_of_type(nu)?
        .to_u64()
        .ok_or(CurveError::TypeTooLarge(nu))
}

/// Signature of the `E_ν` action: quotient genus and branch orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub quotient_genus: u32,
    pub branch_orders: Vec<u32>,
}

impl Signature {
    pub fn branch_count(&self) -> usize {
        self.branch_orders.len()
    }
}

/// `(0; 2, …, 2)` with `ν + 1` branch points.
pub fn signature_of_type(nu: u32) -> Result<Signature, CurveError> {
    if nu < 2 {
        return Err(CurveError::TypeTooSmall { nu, min: 2 });
    }
    Ok(Signature {
        quotient_genus: 0,
        branch_orders: vec![2; nu as usize + 1],
    })
}

/// Number of geometric fixed points of a single `σ_i` on a curve of type `ν ≥ 3`.
pub fn fixed_point_degree(nu: u32) -> Result<BigUint, CurveError> {
    if nu < 3 {
        return Err(CurveError::TypeTooSmall { nu, min: 3 });
    }
    Ok(BigUint::one() << (nu - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn genus_values() {
        assert_eq!(genus_of_type(2).unwrap(), BigUint::from(0u32));
        assert_eq!(genus_of_type(3).unwrap(), BigUint::from(1u32));
        assert_eq!(genus_of_type(4).unwrap(), BigUint::from(5u32));
        assert_eq!(genus_of_type(5).unwrap(), BigUint::from(17u32));
        assert_eq!(genus_of_type(7).unwrap(), BigUint::from(129u32));
        assert!(genus_of_type(1).is_err());
    }

    #[test]
    fn signatures() {
        let s = signature_of_type(3).unwrap();
        assert_eq!(
            (s.quotient_genus, s.branch_orders.clone()),
            (0, vec![2, 2, 2, 2])
        );
        assert_eq!(signature_of_type(4).unwrap().branch_count(), 5);
        assert_eq!(signature_of_type(6).unwrap().branch_orders, vec![2; 7]);
    }

    // Riemann-Hurwitz for X_ν -> X_ν / σ_i of degree 2:
    // 2 g_ν - 2 = 2 (2 g_{ν-1} - 2) + r, solved for r independently of the
    // closed form used by fixed_point_degree.
    fn riemann_hurwitz_branch_count(nu: u32) -> BigInt {
        let g = BigInt::from(genus_of_type(nu).unwrap());
        let h = BigInt::from(genus_of_type(nu - 1).unwrap());
        (g - 1) * 2 - (h - 1) * 4
    }

    #[test]
    fn fixed_points_agree_with_riemann_hurwitz() {
        assert_eq!(riemann_hurwitz_branch_count(3), BigInt::from(4));
        assert_eq!(riemann_hurwitz_branch_count(4), BigInt::from(8));
        assert_eq!(riemann_hurwitz_branch_count(5), BigInt::from(16));
        for nu in 3..=64 {
            assert_eq!(
                BigInt::from(fixed_point_degree(nu).unwrap()),
                riemann_hurwitz_branch_count(nu),
                "ν = {nu}"
            );
        }
        assert!(fixed_point_degree(2).is_err());
    }
}
