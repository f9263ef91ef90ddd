//! Class numbers of binary quadratic forms and Hurwitz class numbers.
//!
//! `hurwitz` sums class numbers obtained by enumerating reduced forms and is
//! the reference implementation. `hurwitz_fast` goes through the fundamental
//! discriminant and a conductor product. `ClassNumberCache` memoizes both.

use alloc::collections::BTreeMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, kronecker, ord, rat, ri, Rat};
use crate::error::{Error, Result};

/// Number of primitive reduced positive-definite forms of discriminant `d < 0`.
///
/// Returns 0 when `d ≢ 0, 1 (mod 4)`.
pub fn h_primitive(d: i64) -> Result<u64> {
    if d >= 0 {
        return Err(Error::InvalidArgument("discriminant must be negative".into()));
    }
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Ok(0);
    }
    let nd = -d;
    let mut count = 0u64;
    let mut a: i64 = 1;
    while 3 * a * a <= nd {
        let mut b = -a + 1;
        while b <= a {
            if (b - d).rem_euclid(2) == 0 {
                let num = b * b - d;
                if num % (4 * a) == 0 {
                    let c = num / (4 * a);
                    if c >= a && !(b < 0 && (c == a)) && a.gcd(&b).gcd(&c) == 1 {
                        count += 1;
                    }
                }
            }
            b += 1;
        }
        a += 1;
    }
    Ok(count)
}

/// `w_d / 2` for a negative discriminant.
fn half_units(d: i64) -> i64 {
    match d {
        -3 => 3,
        -4 => 2,
        _ => 1,
    }
}

/// Hurwitz class number of a nonnegative integer, by enumeration.
pub fn hurwitz_int(n: u64) -> Rat {
    if n == 0 || matches!(n % 4, 1 | 2) {
        return Rat::zero();
    }
    let mut total = Rat::zero();
    let mut f = 1u64;
    while f * f <= n {
        if n % (f * f) == 0 {
            let d = -((n / (f * f)) as i64);
            if matches!(d.rem_euclid(4), 0 | 1) {
                let h = h_primitive(d).expect("negative discriminant") as i64;
                total += rat(h, half_units(d));
            }
        }
        f += 1;
    }
    total
}

/// Hurwitz class number `H(x)`; zero unless `x` is a positive integer `≡ 0, 3 (mod 4)`.
pub fn hurwitz(x: &Rat) -> Rat {
    match integral_arg(x) {
        Some(n) => hurwitz_int(n),
        None => Rat::zero(),
    }
}

fn integral_arg(x: &Rat) -> Option<u64> {
    if !x.is_integer() || x.numer() <= &BigInt::zero() {
        return None;
    }
    x.numer().to_u64()
}

/// Hurwitz class number via the fundamental discriminant and conductor.
pub fn hurwitz_fast(x: &Rat) -> Rat {
    let mut h = |d: i64| h_primitive(d).expect("negative discriminant");
    match integral_arg(x) {
        Some(n) => hurwitz_fast_with(n, &mut h),
        None => Rat::zero(),
    }
}

fn hurwitz_fast_with(n: u64, h_fund: &mut dyn FnMut(i64) -> u64) -> Rat {
    if n == 0 || matches!(n % 4, 1 | 2) {
        return Rat::zero();
    }
    let (d, big_f) = arith::fundamental_discriminant(-(n as i64)).expect("negative");
    let f = big_f.numer().to_u64().expect("integral conductor");
    let mut acc = rat(h_fund(d) as i64, half_units(d));
    if f > 1 {
        for (p, k) in arith::factor(f as i64).expect("nonzero").factors {
            let pk = (p as i64).pow(k);
            let num = pk * p as i64 - 1 - kronecker(d, p as i64) as i64 * (pk - 1);
            acc *= rat(num, p as i64 - 1);
        }
    }
    acc
}

/// Class number `h(d f²)` from `h(d)` for a fundamental `d`.
pub fn h_via_conductor(d: i64, f: u64) -> Result<Rat> {
    let df2 = d.checked_mul((f * f) as i64).ok_or(Error::Overflow)?;
    let hd = h_primitive(d)? as i64;
    let w = |x: i64| 2 * half_units(x);
    let mut acc = ri(hd * f as i64) * rat(w(df2), w(d));
    for p in arith::factor(f as i64)?.primes() {
        acc *= ri(1) - rat(kronecker(d, p as i64) as i64, p as i64);
    }
    Ok(acc)
}

/// `H(N)` through the reduction that removes the even part of `ord_q`.
///
/// Computes `H(N q^{-2k})` with [`hurwitz_int`] and applies the conductor factor at `q`.
pub fn hurwitz_reduce_q(n: u64, q: u64) -> Result<Rat> {
    if !arith::is_prime(q) {
        return Err(Error::InvalidArgument("q must be prime".into()));
    }
    if n == 0 || matches!(n % 4, 1 | 2) {
        return Ok(Rat::zero());
    }
    let (d, _) = arith::fundamental_discriminant(-(n as i64))?;
    let mut mu = ord(n as i128, q) as i64;
    if q == 2 && d.rem_euclid(4) == 0 {
        mu -= 2;
    }
    let k = mu.div_euclid(2).max(0) as u32;
    let qk = q.pow(k);
    let reduced = n / (qk * qk);
    let chi = kronecker(-(reduced as i64), q as i64) as i64;
    let qk = qk as i64;
    let q = q as i64;
    let factor = rat(qk * q - 1 - chi * (qk - 1), q - 1);
    Ok(hurwitz_int(reduced) * factor)
}

/// Memo tables for class numbers, bounded in size.
#[derive(Debug, Clone)]
pub struct ClassNumberCache {
    h: BTreeMap<i64, u64>,
    hurwitz: BTreeMap<u64, Rat>,
    cap: usize,
}

impl ClassNumberCache {
    pub fn new(cap: usize) -> Self {
        ClassNumberCache { h: BTreeMap::new(), hurwitz: BTreeMap::new(), cap }
    }

    /// Memoized `h(d)`.
    pub fn h(&mut self, d: i64) -> u64 {
        if let Some(&v) = self.h.get(&d) {
            return v;
        }
        let v = h_primitive(d).expect("negative discriminant");
        if self.h.len() >= self.cap {
            self.h.clear();
        }
        self.h.insert(d, v);
        v
    }

    /// Memoized [`hurwitz_fast`].
    pub fn hurwitz(&mut self, x: &Rat) -> Rat {
        let Some(n) = integral_arg(x) else { return Rat::zero() };
        if n % 4 == 1 || n % 4 == 2 {
            return Rat::zero();
        }
        if let Some(v) = self.hurwitz.get(&n) {
            return v.clone();
        }
        let v = hurwitz_fast_with(n, &mut |d| self.h(d));
        if self.hurwitz.len() >= self.cap {
            self.hurwitz.clear();
        }
        self.hurwitz.insert(n, v.clone());
        v
    }

    /// Memoized [`hurwitz_int`]; used by the oracle routes.
    pub fn hurwitz_enum(&mut self, n: u64) -> Rat {
        if n == 0 || n % 4 == 1 || n % 4 == 2 {
            return Rat::zero();
        }
        let mut total = Rat::zero();
        let mut f = 1u64;
        while f * f <= n {
            if n % (f * f) == 0 {
                let d = -((n / (f * f)) as i64);
                if matches!(d.rem_euclid(4), 0 | 1) {
                    total += rat(self.h(d) as i64, half_units(d));
                }
            }
            f += 1;
        }
        total
    }
}
