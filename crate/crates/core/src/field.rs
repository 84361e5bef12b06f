//! Prime fields of odd characteristic and single-step extensions `F_p[x]/(f)`.
//!
//! Elements of an extension are stored as coefficient vectors of length `k`
//! (lowest degree first). Each element also has a dense integer index
//! `sum c_j p^j`, which the counting kernels use for table lookups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest field order accepted by [`ExtField`]. Orders are kept in `u64`
/// with headroom so that `Q^2` style products in callers stay in `u128`.
pub const MAX_FIELD_ORDER: u64 = 1 << 62;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not an odd prime below 2^31")]
    NotOddPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{k} exceeds the supported maximum")]
    TooLarge { p: u32, k: u32 },
    #[error("no irreducible polynomial of degree {k} over F_{p} found after {attempts} attempts (seed {seed})")]
    SearchExhausted {
        p: u32,
        k: u32,
        seed: u64,
        attempts: usize,
    },
    #[error("inverse of zero")]
    ZeroInverse,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_divisors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The prime field `F_p`, `p` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= 1 << 31 || p == 2 || !is_prime(p) {
            return Err(FieldError::NotOddPrime(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        (s % self.p as u64) as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        ((a as u64 + p - b as u64 % p) % p) as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32, FieldError> {
        if a.is_multiple_of(self.p) {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }

    /// Reduce a signed integer into `[0, p)`.
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }
}

// Dense polynomials over F_p, lowest degree first, no trailing zeros.
mod poly {
    use super::PrimeField;

    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], f: &PrimeField) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = f.inv(m[dm]).expect("nonzero leading coefficient");
        while r.len() > dm {
            let top = r.len() - 1;
            let c = f.mul(r[top], lead_inv);
            let shift = top - dm;
            for (j, &mj) in m.iter().enumerate() {
                r[shift + j] = f.sub(r[shift + j], f.mul(c, mj));
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], f: &PrimeField) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u32; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(ai, bj));
            }
        }
        trim(&mut out);
        out
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], f: &PrimeField) -> Vec<u32> {
        rem(&mul(a, b, f), m, f)
    }

    pub fn powmod(base: &[u32], mut exp: u64, m: &[u32], f: &PrimeField) -> Vec<u32> {
        let mut acc = rem(&[1], m, f);
        let mut b = rem(base, m, f);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mulmod(&acc, &b, m, f);
            }
            b = mulmod(&b, &b, m, f);
            exp >>= 1;
        }
        acc
    }

    pub fn sub(a: &[u32], b: &[u32], f: &PrimeField) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out: Vec<u32> = (0..n)
            .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect();
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u32], b: &[u32], f: &PrimeField) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, f);
            x = y;
            y = r;
        }
        x
    }

    /// `x^(p^j) mod m`, by `j` successive p-th powers.
    pub fn frobenius_x(j: u32, m: &[u32], f: &PrimeField) -> Vec<u32> {
        let mut cur = rem(&[0, 1], m, f);
        for _ in 0..j {
            cur = powmod(&cur, f.modulus() as u64, m, f);
        }
        cur
    }

    /// Rabin's test for a monic `m` of degree `k >= 1`.
    pub fn is_irreducible(m: &[u32], f: &PrimeField) -> bool {
        let k = (m.len() - 1) as u32;
        if k == 1 {
            return true;
        }
        let x = [0u32, 1];
        let full = frobenius_x(k, m, f);
        if !sub(&full, &rem(&x, m, f), f).is_empty() {
            return false;
        }
        super::prime_divisors(k).into_iter().all(|l| {
            let h = sub(&frobenius_x(k / l, m, f), &x, f);
            let g = gcd(m, &h, f);
            g.len() == 1
        })
    }
}

/// An element of an [`ExtField`]: `k` coefficients in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    coeffs: Vec<u32>,
}

impl Elem {
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }
}

/// `F_{p^k} = F_p[x]/(f)` for a monic irreducible `f` of degree `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtField {
    base: PrimeField,
    k: u32,
    /// Monic modulus, lowest degree first, length `k + 1`.
    modulus: Vec<u32>,
    order: u64,
}

impl ExtField {
    /// Deterministically choose an irreducible modulus of degree `k`.
    ///
    /// Binomials `x^k + a` are tried first for small `a`, then seeded random
    /// monic polynomials.
    pub fn make_extension(base: PrimeField, k: u32, seed: u64) -> Result<Self, FieldError> {
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let p = base.modulus();
        let order = (p as u64)
            .checked_pow(k)
            .filter(|&q| q <= MAX_FIELD_ORDER)
            .ok_or(FieldError::TooLarge { p, k })?;
        let cap = (4.0 * k as f64 * (p as f64).log2()).ceil() as usize + 64;

        let mut attempts = 0usize;
        for a in 0..p.min(16) {
            if attempts >= cap {
                break;
            }
            attempts += 1;
            let mut m = vec![0u32; k as usize + 1];
            m[0] = a;
            m[k as usize] = 1;
            if poly::is_irreducible(&m, &base) {
                return Ok(Self::with_modulus_unchecked(base, m, order));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((p as u64) << 32) ^ k as u64);
        while attempts < cap {
            attempts += 1;
            let mut m: Vec<u32> = (0..k).map(|_| rng.gen_range(0..p)).collect();
            m.push(1);
            if poly::is_irreducible(&m, &base) {
                return Ok(Self::with_modulus_unchecked(base, m, order));
            }
        }
        Err(FieldError::SearchExhausted {
            p,
            k,
            seed,
            attempts,
        })
    }

    /// Shorthand for `make_extension(PrimeField::new(p)?, k, seed)`.
    pub fn new(p: u64, k: u32, seed: u64) -> Result<Self, FieldError> {
        Self::make_extension(PrimeField::new(p)?, k, seed)
    }

    fn with_modulus_unchecked(base: PrimeField, modulus: Vec<u32>, order: u64) -> Self {
        ExtField {
            base,
            k: (modulus.len() - 1) as u32,
            modulus,
            order,
        }
    }

    pub fn base(&self) -> PrimeField {
        self.base
    }

    pub fn characteristic(&self) -> u32 {
        self.base.modulus()
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Monic modulus coefficients, lowest degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `Q = p^k`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn zero(&self) -> Elem {
        Elem {
            coeffs: vec![0; self.k as usize],
        }
    }

    pub fn one(&self) -> Elem {
        self.embed_base(1)
    }

    /// The constant polynomial `r mod p`.
    pub fn embed_base(&self, r: u32) -> Elem {
        let mut e = self.zero();
        e.coeffs[0] = r % self.characteristic();
        e
    }

    /// The class of `x` (a generator of the extension over `F_p`).
    pub fn generator(&self) -> Elem {
        if self.k == 1 {
            // x = -f(0) in the degree-one case
            return self.embed_base(self.base.neg(self.modulus[0]));
        }
        let mut e = self.zero();
        e.coeffs[1] = 1;
        e
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Elem {
        let mut full = coeffs.to_vec();
        while full.len() < self.k as usize {
            full.push(0);
        }
        let reduced = poly::rem(&full, &self.modulus, &self.base);
        let mut e = self.zero();
        for (i, c) in reduced.into_iter().enumerate() {
            e.coeffs[i] = c;
        }
        e
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| self.base.add(x, y))
            .collect();
        Elem { coeffs }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| self.base.sub(x, y))
            .collect();
        Elem { coeffs }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.from_coeffs(&poly::mulmod(
            &a.coeffs,
            &b.coeffs,
            &self.modulus,
            &self.base,
        ))
    }

    /// Multiply by a scalar from the base field.
    pub fn scale(&self, a: &Elem, s: u32) -> Elem {
        let coeffs = a.coeffs.iter().map(|&x| self.base.mul(x, s)).collect();
        Elem { coeffs }
    }

    pub fn pow(&self, a: &Elem, mut exp: u64) -> Elem {
        let mut acc = self.one();
        let mut b = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem, FieldError> {
        if self.is_zero(a) {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.order - 2))
    }

    /// Quadratic character: `0` on zero, `+1` on nonzero squares, `-1` otherwise.
    pub fn quadratic_character(&self, c: &Elem) -> i8 {
        if self.is_zero(c) {
            return 0;
        }
        let r = self.pow(c, (self.order - 1) / 2);
        if r == self.one() {
            1
        } else {
            debug_assert_eq!(r, self.embed_base(self.characteristic() - 1));
            -1
        }
    }

    /// Dense index `sum c_j p^j` of an element.
    pub fn index_of(&self, a: &Elem) -> u64 {
        let p = self.characteristic() as u64;
        a.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * p + c as u64)
    }

    /// Inverse of [`ExtField::index_of`]; `idx < Q`.
    pub fn from_index(&self, mut idx: u64) -> Elem {
        let p = self.characteristic() as u64;
        let mut e = self.zero();
        for c in e.coeffs.iter_mut() {
            *c = (idx % p) as u32;
            idx /= p;
        }
        e
    }

    /// All `Q` elements in increasing index order, starting from zero.
    pub fn enumerate(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order).map(move |i| self.from_index(i))
    }
}
