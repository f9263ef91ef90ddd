//! Local representation densities `α_p(n, L)`.
//!
//! Closed forms cover primes where the lattice is stable. The counting
//! oracle computes `#{x mod p^r : Q(x) ≡ n}` exactly from a Jordan splitting,
//! using Hensel lifting for vectors with a unit coordinate in the unimodular
//! component and descending one digit for the rest.

use alloc::vec::Vec;
use core::fmt;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::arith::{self, kronecker, kronecker_i128, ord, rat, ri, rpow, Rat};
use crate::error::{Error, Result};
use crate::lattice::{self, jordan_decompose, BlockUnit, GramMatrix, JordanSplitting, LatticeProfile};

/// Where a density value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    StableOdd,
    StableTwo,
    GenericUnimodular,
    UnstableUnit,
    CountingOracle,
}

impl DensitySource {
    pub fn as_str(&self) -> &'static str {
        match self {
            DensitySource::StableOdd => "stable_odd_lemma",
            DensitySource::StableTwo => "stable_two_lemma",
            DensitySource::GenericUnimodular => "generic_unimodular",
            DensitySource::UnstableUnit => "nonstable_unit",
            DensitySource::CountingOracle => "counting_oracle",
        }
    }
}

impl fmt::Display for DensitySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityValue {
    pub value: Rat,
    pub source: DensitySource,
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("n must be positive".into()))
    } else {
        Ok(())
    }
}

/// Closed form at an odd prime where `ord_p(d_L) <= 1`.
pub fn alpha_stable_odd(gram: &GramMatrix, p: u64, n: u64) -> Result<Rat> {
    check_n(n)?;
    if p == 2 || !arith::is_prime(p) {
        return Err(Error::InvalidArgument("p must be an odd prime".into()));
    }
    if !gram.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let d = gram.det() as i128;
    let od = ord(d, p);
    if od > 1 {
        return Err(Error::NotStableAtPrime { p });
    }
    let nu = ord(n as i128, p) as i64;
    let pi = p as i128;
    let one = Rat::one();
    let pinv = |e: i64| rpow(p, -e);
    let unit_chi = |x: i128| kronecker_i128(x.rem_euclid(pi), pi) as i64;
    if od == 0 {
        if nu % 2 == 0 {
            let chi = unit_chi(-(n as i128 / pi.pow(nu as u32)) * d);
            Ok(&one + pinv(1) - pinv((nu + 2) / 2) + ri(chi) * pinv((nu + 2) / 2))
        } else {
            Ok(&one + pinv(1) - pinv((nu + 1) / 2) - pinv((nu + 3) / 2))
        }
    } else {
        let j = jordan_decompose(gram, p)?;
        let dm = j.unimodular().expect("primitive").unit_det;
        let chi_m = ri(arith::kronecker_rat(&(-dm), p) as i64);
        if nu % 2 == 0 {
            Ok(&one + (&one - pinv(nu / 2) - pinv((nu + 2) / 2)) * chi_m)
        } else {
            let t = (n as i128 / pi.pow(nu as u32)) * (d / pi);
            let chi = unit_chi(-t);
            Ok(&one + (&one - pinv((nu + 1) / 2) + ri(chi) * pinv((nu + 1) / 2)) * chi_m)
        }
    }
}

/// Closed form at `p = 2` for a lattice stable at 2.
pub fn alpha_stable_two(gram: &GramMatrix, n: u64) -> Result<Rat> {
    check_n(n)?;
    if !gram.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    if !lattice::is_stable_at(gram, 2) {
        return Err(Error::NotStableAtPrime { p: 2 });
    }
    let d = gram.det() as i128;
    let a = ord(n as i128, 2) as i64;
    let beta = (n >> a) as i128;
    let half = |e: i64| rpow(2, -e);
    let m8 = |x: i128| x.rem_euclid(8);
    if gram.is_even() {
        let dh = d / 2;
        let three = ri(3);
        return Ok(if a % 2 == 0 {
            &three - ri(3) * half(a / 2)
        } else if (beta - dh).rem_euclid(4) == 0 {
            &three - ri(3) * half((a + 1) / 2)
        } else if m8(beta - 3 * dh) == 0 {
            &three - half((a - 1) / 2)
        } else {
            three
        });
    }
    let aniso = lattice::hasse_star(gram, 2) == -1;
    let base = if a % 2 == 1 {
        Some(ri(3) * half((a + 1) / 2))
    } else if (beta - d).rem_euclid(4) == 0 {
        Some(ri(3) * half((a + 2) / 2))
    } else if m8(beta - 3 * d) == 0 {
        Some(half(a / 2))
    } else {
        None
    };
    Ok(match (aniso, base) {
        (true, Some(v)) => v,
        (true, None) => Rat::zero(),
        (false, Some(v)) => ri(2) - v,
        (false, None) => ri(2),
    })
}

#[derive(Debug, Clone, Copy)]
enum CUnit {
    One(u64),
    Two(u64, u64, u64),
}

#[derive(Debug, Clone, Copy)]
struct CBlock {
    exp: u32,
    unit: CUnit,
}

impl CBlock {
    fn rank(&self) -> u32 {
        match self.unit {
            CUnit::One(_) => 1,
            CUnit::Two(..) => 2,
        }
    }
}

fn counting_blocks(j: &JordanSplitting) -> Vec<CBlock> {
    let m = if j.p == 2 { 8 } else { j.p };
    j.blocks
        .iter()
        .map(|b| CBlock {
            exp: b.exp,
            unit: match &b.unit {
                BlockUnit::One(u) => CUnit::One(arith::rat_mod(u, m)),
                BlockUnit::Two { a, b, c, .. } => {
                    CUnit::Two(arith::rat_mod(a, m), arith::rat_mod(b, m), arith::rat_mod(c, m))
                }
            },
        })
        .collect()
}

fn big_pow(p: u64, e: u64) -> BigUint {
    num_traits::pow(BigUint::from(p), e as usize)
}

/// `#{y ∈ F_p : u y² = c}`.
fn z1(p: u64, u: u64, c: u64) -> u64 {
    if c % p == 0 {
        1
    } else {
        (1 + kronecker(((c as u128 * u as u128) % p as u128) as i64, p as i64)) as u64
    }
}

/// `#{y ∈ F_p² : u1 y1² + u2 y2² = c}`.
fn z2(p: u64, u1: u64, u2: u64, c: u64) -> u64 {
    (0..p)
        .map(|y| {
            let t = (c + p - (u1 as u128 * y as u128 * y as u128 % p as u128) as u64) % p;
            z1(p, u2, t)
        })
        .sum()
}

/// `#{y ∈ F_p³ : Σ u_i y_i² = c}`.
fn z3(p: u64, u: [u64; 3], c: u64) -> u64 {
    let nonres = (2..p).find(|&g| kronecker(g as i64, p as i64) == -1).unwrap_or(1);
    let by_class = [z2(p, u[1], u[2], 0), z2(p, u[1], u[2], 1), z2(p, u[1], u[2], nonres)];
    (0..p)
        .map(|y| {
            let t = (c + p - (u[0] as u128 * y as u128 * y as u128 % p as u128) as u64) % p;
            if t == 0 {
                by_class[0]
            } else if kronecker(t as i64, p as i64) == 1 {
                by_class[1]
            } else {
                by_class[2]
            }
        })
        .sum()
}

/// Primitive solutions modulo an odd `p`, unit coordinates not all zero.
fn prim_odd(p: u64, blocks: &[CBlock], n: u64) -> BigUint {
    let units: Vec<u64> = blocks
        .iter()
        .filter(|b| b.exp == 0)
        .map(|b| match b.unit {
            CUnit::One(u) => u,
            CUnit::Two(..) => unreachable!("rank-2 blocks only occur at 2"),
        })
        .collect();
    let k0 = units.len() as u64;
    let c = n % p;
    let z = match units.len() {
        1 => z1(p, units[0], c),
        2 => z2(p, units[0], units[1], c),
        3 => z3(p, [units[0], units[1], units[2]], c),
        _ => 0,
    };
    let z = z - u64::from(c == 0);
    BigUint::from(z) * big_pow(p, 3 - k0)
}

/// Primitive solutions modulo `2^r`, `r <= 3`, by enumeration.
fn prim_two(r: u32, blocks: &[CBlock], n: u64) -> BigUint {
    let m = 1u64 << r;
    let mut count = 0u64;
    for code in 0..m * m * m {
        let x = [code % m, (code / m) % m, code / (m * m)];
        let mut idx = 0;
        let mut val = 0u64;
        let mut prim = false;
        for b in blocks {
            let scale = if b.exp >= r { 0 } else { 1u64 << b.exp };
            match b.unit {
                CUnit::One(u) => {
                    let y = x[idx];
                    val += scale * u * y * y;
                    prim |= b.exp == 0 && y % 2 == 1;
                    idx += 1;
                }
                CUnit::Two(a, bb, c) => {
                    let (y, z) = (x[idx], x[idx + 1]);
                    val += scale * (a * y * y + 2 * bb * y * z + c * z * z);
                    prim |= b.exp == 0 && (y % 2 == 1 || z % 2 == 1);
                    idx += 2;
                }
            }
        }
        if prim && val % m == n % m {
            count += 1;
        }
    }
    BigUint::from(count)
}

/// `#{x mod p^r : Q(x) ≡ n (mod p^r)}`, with `n` already reduced mod `p^r`.
fn count_rec(p: u64, r: u32, blocks: &[CBlock], n: u128) -> BigUint {
    if r == 0 {
        return BigUint::one();
    }
    let k0: u32 = blocks.iter().filter(|b| b.exp == 0).map(|b| b.rank()).sum();
    let prim = if k0 == 0 {
        BigUint::zero()
    } else if p == 2 {
        if r <= 3 {
            prim_two(r, blocks, (n % 8) as u64)
        } else {
            prim_two(3, blocks, (n % 8) as u64) * big_pow(2, (r as u64 - 3) * 2)
        }
    } else {
        prim_odd(p, blocks, (n % p as u128) as u64) * big_pow(p, (r as u64 - 1) * 2)
    };
    let nonprim = if n % p as u128 != 0 {
        BigUint::zero()
    } else {
        let shifted: Vec<CBlock> = blocks
            .iter()
            .map(|b| CBlock { exp: if b.exp == 0 { 1 } else { b.exp - 1 }, unit: b.unit })
            .collect();
        big_pow(p, (3 - k0) as u64) * count_rec(p, r - 1, &shifted, n / p as u128)
    };
    prim + nonprim
}

fn pow_u128(p: u64, r: u32) -> Option<u128> {
    (p as u128).checked_pow(r)
}

/// Exact number of solutions of `Q(x) ≡ n (mod p^r)` via the Jordan splitting.
pub fn count_mod(gram: &GramMatrix, p: u64, n: u64, r: u32) -> Result<BigUint> {
    let j = jordan_decompose(gram, p)?;
    let pr = pow_u128(p, r).ok_or(Error::Overflow)?;
    Ok(count_rec(p, r, &counting_blocks(&j), n as u128 % pr))
}

/// Solutions of `Q(x) ≡ n (mod p^r)` by enumerating all of `(Z/p^r)³`.
pub fn count_mod_naive(gram: &GramMatrix, p: u64, n: u64, r: u32, budget: u128) -> Result<u64> {
    let m = pow_u128(p, r).ok_or(Error::Overflow)?;
    let cells = m.checked_pow(3).ok_or(Error::Overflow)?;
    if cells > budget {
        return Err(Error::BudgetExceeded { needed: cells, budget });
    }
    let m = m as i128;
    let a = gram.entries();
    let target = n as i128 % m;
    let mut count = 0;
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                let v = [x, y, z];
                let mut q = 0i128;
                for i in 0..3 {
                    for k in 0..3 {
                        q += v[i] * a[i][k] as i128 * v[k];
                    }
                }
                if q.rem_euclid(m) == target {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Local density at depth `r`: `p^{-2r} · #{x mod p^r : Q(x) ≡ n}`.
pub fn alpha_at_depth(gram: &GramMatrix, p: u64, n: u64, r: u32) -> Result<Rat> {
    let c = count_mod(gram, p, n, r)?;
    Ok(Rat::new(BigInt::from(c), BigInt::from(big_pow(p, 2 * r as u64))))
}

/// Counting oracle: the density certified by equality at two consecutive depths
/// starting from `ord_p(4 d_L n) + 2`.
pub fn alpha_count(gram: &GramMatrix, p: u64, n: u64, cap: u128) -> Result<Rat> {
    check_n(n)?;
    if !arith::is_prime(p) {
        return Err(Error::InvalidArgument("p must be prime".into()));
    }
    let j = jordan_decompose(gram, p)?;
    let blocks = counting_blocks(&j);
    let mut r = ord(4 * gram.det() as i128 * n as i128, p) + 2;
    let at = |r: u32| -> Result<Rat> {
        let pr = match pow_u128(p, r) {
            Some(v) if v <= cap => v,
            _ => return Err(Error::DepthLimitExceeded { p, n, cap }),
        };
        let c = count_rec(p, r, &blocks, n as u128 % pr);
        Ok(Rat::new(BigInt::from(c), BigInt::from(big_pow(p, 2 * r as u64))))
    };
    let mut prev = at(r)?;
    loop {
        let next = at(r + 1)?;
        if next == prev {
            return Ok(next);
        }
        prev = next;
        r += 1;
    }
}

/// `α_p(n, L)`, choosing the closed form when one applies.
pub fn alpha(profile: &LatticeProfile, p: u64, n: u64, cap: u128) -> Result<DensityValue> {
    check_n(n)?;
    let g = &profile.gram;
    let d = profile.det;
    if p != 2 && d % p as i64 != 0 {
        return Ok(DensityValue { value: alpha_stable_odd(g, p, n)?, source: DensitySource::GenericUnimodular });
    }
    if profile.is_stable_at(p) {
        return Ok(if p == 2 {
            DensityValue { value: alpha_stable_two(g, n)?, source: DensitySource::StableTwo }
        } else {
            DensityValue { value: alpha_stable_odd(g, p, n)?, source: DensitySource::StableOdd }
        });
    }
    if p != 2 && n % p != 0 {
        return Ok(DensityValue { value: alpha_unstable_unit(g, p, n)?, source: DensitySource::UnstableUnit });
    }
    Ok(DensityValue { value: alpha_count(g, p, n, cap)?, source: DensitySource::CountingOracle })
}

/// Density at an odd prime for `n` prime to `p`, from the unimodular component alone.
pub fn alpha_unstable_unit(gram: &GramMatrix, p: u64, n: u64) -> Result<Rat> {
    if p == 2 || n % p == 0 {
        return Err(Error::CoprimalityViolated { p, n });
    }
    let j = jordan_decompose(gram, p)?;
    let m = j.unimodular().ok_or(Error::NotPrimitive)?;
    let dm = &m.unit_det;
    Ok(match m.rank {
        3 => alpha_stable_odd(gram, p, n)?,
        2 => ri(1) - rat(arith::kronecker_rat(&(-dm), p) as i64, p as i64),
        _ => ri(1 + arith::kronecker_rat(&(dm * ri(n as i64)), p) as i64),
    })
}

/// The Euler factor `c_p(n) = α_p(n)(1 - (d|p)/p)(1 - 1/p²)^{-1}`, with `d` the
/// fundamental discriminant of `-4 d_L n`.
pub fn c_factor(profile: &LatticeProfile, p: u64, n: u64, cap: u128) -> Result<DensityValue> {
    let a = alpha(profile, p, n, cap)?;
    let (fd, _) = arith::fundamental_discriminant(-4 * profile.det * n as i64)?;
    let chi = kronecker(fd, p as i64) as i64;
    let pp = p as i64;
    let v = a.value * (ri(1) - rat(chi, pp)) / (ri(1) - rat(1, pp * pp));
    Ok(DensityValue { value: v, source: a.source })
}

/// `true` iff `n` is represented by `L ⊗ Z_p` for every prime `p`.
pub fn locally_represented(profile: &LatticeProfile, n: u64, cap: u128) -> Result<bool> {
    check_n(n)?;
    for &p in &profile.bad_primes {
        if alpha(profile, p, n, cap)?.value.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}
