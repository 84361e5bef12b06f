//! Exact arithmetic in `Z[G] / (G^2 - εQ)`, where `G` is the quadratic Gauss
//! sum of `F_Q` and `ε = χ(-1)`.

use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigInt;
use num_traits::Zero;

/// `a + b·G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussAccumulator {
    pub a: BigInt,
    pub b: BigInt,
    q: u64,
    epsilon: i8,
}

impl GaussAccumulator {
    pub fn zero(q: u64, epsilon: i8) -> Self {
        debug_assert!(epsilon == 1 || epsilon == -1);
        GaussAccumulator {
            a: BigInt::zero(),
            b: BigInt::zero(),
            q,
            epsilon,
        }
    }

    pub fn constant(q: u64, epsilon: i8, a: BigInt) -> Self {
        GaussAccumulator {
            a,
            ..Self::zero(q, epsilon)
        }
    }

    /// `G^s`.
    pub fn gauss_power(q: u64, epsilon: i8, s: u32) -> Self {
        let half = BigInt::from(epsilon as i64 * q as i64).pow(s / 2);
        if s.is_multiple_of(2) {
            GaussAccumulator {
                a: half,
                ..Self::zero(q, epsilon)
            }
        } else {
            GaussAccumulator {
                b: half,
                ..Self::zero(q, epsilon)
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        GaussAccumulator {
            a: &self.a * c,
            b: &self.b * c,
            q: self.q,
            epsilon: self.epsilon,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn square_of_g(&self) -> BigInt {
        BigInt::from(self.epsilon as i64) * BigInt::from(self.q)
    }
}

impl Add for GaussAccumulator {
    type Output = GaussAccumulator;

    fn add(mut self, rhs: GaussAccumulator) -> GaussAccumulator {
        self += rhs;
        self
    }
}

impl AddAssign for GaussAccumulator {
    fn add_assign(&mut self, rhs: GaussAccumulator) {
        debug_assert_eq!((self.q, self.epsilon), (rhs.q, rhs.epsilon));
        self.a += rhs.a;
        self.b += rhs.b;
    }
}

impl Mul for &GaussAccumulator {
    type Output = GaussAccumulator;

    fn mul(self, rhs: &GaussAccumulator) -> GaussAccumulator {
        let g2 = self.square_of_g();
        GaussAccumulator {
            a: &self.a * &rhs.a + &self.b * &rhs.b * g2,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            q: self.q,
            epsilon: self.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_reduce_by_g_squared() {
        let (q, eps) = (5u64, 1i8);
        let g = GaussAccumulator::gauss_power(q, eps, 1);
        let g2 = &g * &g;
        assert_eq!(
            (g2.a.clone(), g2.b.clone()),
            (BigInt::from(5), BigInt::zero())
        );
        let g3 = &g2 * &g;
        assert_eq!(g3, GaussAccumulator::gauss_power(q, eps, 3));
        let g4 = GaussAccumulator::gauss_power(7, -1, 4);
        assert_eq!(g4.a, BigInt::from(49));
        let g2m = GaussAccumulator::gauss_power(7, -1, 2);
        assert_eq!(g2m.a, BigInt::from(-7));
    }

    #[test]
    fn addition_is_componentwise() {
        let x = GaussAccumulator::gauss_power(3, -1, 3);
        let y = GaussAccumulator::constant(3, -1, BigInt::from(4));
        let s = x.clone() + y.clone();
        assert_eq!((s.a, s.b), (BigInt::from(4), BigInt::from(-3)));
        assert_eq!(x.scale(&BigInt::from(2)).b, BigInt::from(-6));
    }

    #[test]
    fn gauss_sum_squares_to_epsilon_q() {
        // G = Σ_x ζ^{x^2} over F_p, evaluated numerically.
        for p in [3u64, 5, 7, 11, 13] {
            let (mut re, mut im) = (0f64, 0f64);
            for x in 0..p {
                let ang = 2.0 * std::f64::consts::PI * ((x * x) % p) as f64 / p as f64;
                re += ang.cos();
                im += ang.sin();
            }
            let (sq_re, sq_im) = (re * re - im * im, 2.0 * re * im);
            let eps = if p % 4 == 1 { 1.0 } else { -1.0 };
            assert!((sq_re - eps * p as f64).abs() < 1e-9 && sq_im.abs() < 1e-9);
        }
    }
}
