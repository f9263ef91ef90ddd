//! Integer and rational number theory primitives.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Rat = BigRational;

/// `a/b` as a rational. Panics if `b == 0`.
pub fn rat(a: i64, b: i64) -> Rat {
    Rat::new(BigInt::from(a), BigInt::from(b))
}

/// Integer as a rational.
pub fn ri(a: i64) -> Rat {
    Rat::from_integer(BigInt::from(a))
}

/// `p^e` as a rational, `e` may be negative.
pub fn rpow(p: u64, e: i64) -> Rat {
    let base = Rat::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

/// The integer value of `x` if it is integral and fits in an `i64`.
pub fn rat_to_i64(x: &Rat) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

/// Prime factorization of a nonzero integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInt {
    pub sign: i8,
    pub factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Total number of prime factors with multiplicity.
    pub fn big_omega(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).sum()
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `b^e mod m`.
pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factor a nonzero integer by trial division.
pub fn factor(n: i64) -> Result<FactoredInt> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let sign = if n < 0 { -1 } else { 1 };
    let mut m = n.unsigned_abs();
    let mut factors = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        if p > 1000 && is_prime(m) {
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInt { sign, factors })
}

/// `ord_p(n)` for nonzero `n`.
pub fn valuation(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidArgument("valuation of 0".into()));
    }
    if p < 2 {
        return Err(Error::InvalidArgument("valuation base must be at least 2".into()));
    }
    Ok(ord(n, p))
}

/// `ord_p(n)` for nonzero `n` without checks.
pub(crate) fn ord(n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut n = n;
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// `ord_p` of a nonzero rational.
pub fn ord_rat(x: &Rat, p: u64) -> i64 {
    ord_big(x.numer(), p) as i64 - ord_big(x.denom(), p) as i64
}

fn ord_big(n: &BigInt, p: u64) -> u32 {
    let pb = BigInt::from(p);
    let mut n = n.abs();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return e;
        }
        n = q;
        e += 1;
    }
}

/// Kronecker symbol `(a|n)`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    kronecker_i128(a as i128, n as i128)
}

pub(crate) fn kronecker_i128(a: i128, n: i128) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1;
    let mut a = a;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        n >>= v;
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        core::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol of a rational with denominator prime to `p`: `(num·den | p)`.
pub fn kronecker_rat(x: &Rat, p: u64) -> i32 {
    let v = x.numer() * x.denom();
    let r = (v % BigInt::from(8 * p)).to_i128().unwrap_or(0);
    let m = (8 * p) as i128;
    kronecker_i128(r.rem_euclid(m), p as i128)
}

/// Residue of a `p`-integral rational modulo `m` (a power of `p`).
pub fn rat_mod(x: &Rat, m: u64) -> u64 {
    let mb = BigInt::from(m);
    let num = x.numer().mod_floor(&mb).to_u64().unwrap();
    let den = x.denom().mod_floor(&mb).to_u64().unwrap();
    let inv = mod_inverse(den, m).expect("denominator must be a unit");
    mul_mod(num, inv, m)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

/// Extended gcd: `(g, x, y)` with `ax + by = g >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Write nonzero `n = s·t²` with `s` squarefree and carrying the sign of `n`.
pub fn squarefree_split(n: i64) -> Result<(i64, u64)> {
    let f = factor(n)?;
    let mut s = f.sign as i64;
    let mut t = 1u64;
    for &(p, e) in &f.factors {
        if e % 2 == 1 {
            s *= p as i64;
        }
        t *= p.pow(e / 2);
    }
    Ok((s, t))
}

/// For `D < 0`, the fundamental discriminant `d` of `Q(√D)` and `F` with `D = d·F²`.
pub fn fundamental_discriminant(big_d: i64) -> Result<(i64, Rat)> {
    if big_d >= 0 {
        return Err(Error::InvalidArgument("expected a negative discriminant".into()));
    }
    let (m, k) = squarefree_split(big_d)?;
    if m.rem_euclid(4) == 1 {
        Ok((m, ri(k as i64)))
    } else {
        Ok((4 * m, rat(k as i64, 2)))
    }
}

/// The positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Squarefree kernel (product of distinct prime factors) of a nonzero integer.
pub fn radical(n: i64) -> Result<u64> {
    Ok(factor(n)?.primes().product())
}

/// Hilbert symbol `(a, b)_v` of nonzero rationals.
pub fn hilbert_symbol(a: &Rat, b: &Rat, v: Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::InvalidArgument("Hilbert symbol of 0".into()));
    }
    let a = (a.numer() * a.denom()).to_i128().ok_or(Error::Overflow)?;
    let b = (b.numer() * b.denom()).to_i128().ok_or(Error::Overflow)?;
    Ok(hilbert_int(a, b, v))
}

pub(crate) fn hilbert_int(a: i128, b: i128, v: Place) -> i32 {
    match v {
        Place::Infinity => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Prime(p) => {
            let al = ord(a, p);
            let be = ord(b, p);
            let pp = p as i128;
            let u = a / pp.pow(al);
            let w = b / pp.pow(be);
            if p == 2 {
                let eps = |x: i128| ((x.rem_euclid(4) - 1) / 2) as u32;
                let omega = |x: i128| {
                    let r = x.rem_euclid(8);
                    if r == 3 || r == 5 {
                        1u32
                    } else {
                        0
                    }
                };
                let e = eps(u) * eps(w) + al * omega(w) + be * omega(u);
                if e % 2 == 0 {
                    1
                } else {
                    -1
                }
            } else {
                let mut s = 1;
                if (al as u64 * be as u64 * ((p - 1) / 2)) % 2 == 1 {
                    s = -s;
                }
                if be % 2 == 1 {
                    s *= kronecker_i128(u, pp);
                }
                if al % 2 == 1 {
                    s *= kronecker_i128(w, pp);
                }
                s
            }
        }
    }
}

/// `true` if `x` is a nonzero square in `Q`.
pub fn is_rational_square(x: &Rat) -> bool {
    if !x.is_positive() {
        return false;
    }
    let n = x.numer();
    let d = x.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    &(&rn * &rn) == n && &(&rd * &rd) == d
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = 1u128 << ((128 - n.leading_zeros()) / 2 + 1);
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Decimal rendering of `x` truncated toward zero after `digits` places.
pub fn to_decimal(x: &Rat, digits: u32) -> String {
    let neg = x.is_negative();
    let scaled = (x.numer().abs() * BigInt::from(10u32).pow(digits)) / x.denom();
    let mut s = scaled.to_string();
    if digits > 0 {
        while s.len() <= digits as usize {
            s.insert(0, '0');
        }
        s.insert(s.len() - digits as usize, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_brute(a: i64, p: i64) -> i32 {
        let a = a.rem_euclid(p);
        if a == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == a) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_matches_euler_for_odd_primes() {
        for p in [3i64, 5, 7, 11, 13, 97] {
            for a in -50..50 {
                assert_eq!(kronecker(a, p), legendre_brute(a, p), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_at_two() {
        assert_eq!(kronecker(1, 2), 1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(-1, 2), 1);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(-3, 2), -1);
    }

    #[test]
    fn valuation_rejects_zero() {
        assert!(valuation(0, 3).is_err());
        assert_eq!(valuation(-72, 2).unwrap(), 3);
        assert_eq!(valuation(-72, 3).unwrap(), 2);
    }

    #[test]
    fn fundamental_discriminants() {
        assert_eq!(fundamental_discriminant(-18).unwrap(), (-8, rat(3, 2)));
        assert_eq!(fundamental_discriminant(-60).unwrap(), (-15, ri(2)));
        assert_eq!(fundamental_discriminant(-4).unwrap(), (-4, ri(1)));
        assert_eq!(fundamental_discriminant(-3).unwrap(), (-3, ri(1)));
        assert!(fundamental_discriminant(0).is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(4, 3), 3), "1.333");
        assert_eq!(to_decimal(&rat(-1, 8), 2), "-0.12");
        assert_eq!(to_decimal(&ri(7), 0), "7");
    }

    #[test]
    fn factor_small() {
        let f = factor(-360).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors, alloc::vec![(2, 3), (3, 2), (5, 1)]);
        let big = 1_000_003u64 * 999_983;
        let f = factor(big as i64).unwrap();
        assert_eq!(f.factors, alloc::vec![(999_983, 1), (1_000_003, 1)]);
    }

    #[test]
    fn hilbert_basic() {
        let p2 = Place::Prime(2);
        assert_eq!(hilbert_int(-1, -1, p2), -1);
        assert_eq!(hilbert_int(-1, -1, Place::Infinity), -1);
        assert_eq!(hilbert_int(2, 3, Place::Prime(3)), -1);
        assert_eq!(hilbert_int(3, 5, Place::Prime(5)), -1);
        assert_eq!(hilbert_int(3, 5, p2), 1);
    }

    #[test]
    fn hilbert_product_formula() {
        let places = |a: i64, b: i64| {
            let mut ps: Vec<u64> = factor(2 * a * b).unwrap().primes().collect();
            ps.sort_unstable();
            ps
        };
        for a in [-7i64, -3, -1, 2, 3, 5, 6, 10, 15, -30] {
            for b in [-5i64, -2, 3, 7, 11, 14, -21] {
                let mut prod = hilbert_int(a as i128, b as i128, Place::Infinity);
                for p in places(a, b) {
                    prod *= hilbert_int(a as i128, b as i128, Place::Prime(p));
                }
                assert_eq!(prod, 1, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn squares_and_roots() {
        assert!(is_rational_square(&rat(9, 4)));
        assert!(!is_rational_square(&rat(2, 1)));
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
        assert_eq!(divisors(12), alloc::vec![1, 2, 3, 4, 6, 12]);
    }
}
