//! Watson transformations and the auxiliary lattice `K`.
//!
//! `Λ_m(L) = {x ∈ L : Q(x) ≡ 0 and 2B(x, L) ≡ 0 (mod m)}`; `λ_m(L)` is
//! `Λ_m(L)` rescaled to be primitive.

use alloc::format;
use alloc::vec::Vec;

use crate::arith::{self, ord};
use crate::error::{Error, Result};
use crate::lattice::{
    self, canonical_form, is_stable_at, jordan_decompose, linalg, BlockUnit, EvenType, GramMatrix, Vec3,
};

/// A full-rank sublattice of `Z³` together with its Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sublattice {
    /// Basis rows in Hermite normal form.
    pub basis: [Vec3; 3],
    /// Gram matrix of `basis`.
    pub gram: GramMatrix,
}

impl Sublattice {
    pub fn index(&self) -> u64 {
        linalg::det_rows(&self.basis).unsigned_abs() as u64
    }
}

/// Primitive rescaling of a Watson image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WatsonImage {
    /// Canonical Gram matrix of `λ_m(L)`.
    pub gram: GramMatrix,
    /// `Λ_m(L) = λ_m(L)^{scale}`.
    pub scale: i64,
}

fn check_modulus(m: u64) -> Result<()> {
    if m == 4 || arith::is_prime(m) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Watson modulus must be a prime or 4, got {m}")))
    }
}

/// `Λ_m(L)` in a Hermite-normal-form basis.
pub fn big_lambda(gram: &GramMatrix, m: u64) -> Result<Sublattice> {
    check_modulus(m)?;
    let a = gram.entries();
    let mi = m as i64;
    let mut gens: Vec<Vec3> = alloc::vec![[mi, 0, 0], [0, mi, 0], [0, 0, mi]];
    if m == 2 || m == 4 {
        let mm = m as i128;
        for code in 0..mi * mi * mi {
            let x = [code % mi, (code / mi) % mi, code / (mi * mi)];
            let q_ok = linalg::bilinear(a, &x, &x).rem_euclid(mm) == 0;
            let b_ok = (0..3).all(|i| {
                let ax: i128 = (0..3).map(|j| a[i][j] as i128 * x[j] as i128).sum();
                (2 * ax).rem_euclid(mm) == 0
            });
            if q_ok && b_ok {
                gens.push(x);
            }
        }
    } else {
        gens.extend(linalg::kernel_mod_p(a, m));
    }
    let basis = linalg::hnf_basis(&gens)?;
    let g = gram.in_basis(&basis)?;
    Ok(Sublattice { basis, gram: g })
}

/// `λ_m(L)` with its scale.
pub fn small_lambda(gram: &GramMatrix, m: u64) -> Result<WatsonImage> {
    let big = big_lambda(gram, m)?;
    let (prim, scale) = big.gram.primitive_part();
    Ok(WatsonImage { gram: canonical_form(&prim), scale })
}

/// One step of a reduction chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub m: u64,
    pub before: GramMatrix,
    pub after: GramMatrix,
    pub scale: i64,
}

/// Order in which unstable primes are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrimeOrder {
    /// Odd primes ascending, then 2.
    #[default]
    Ascending,
    /// Odd primes descending, then 2.
    Descending,
    /// 2 first, then odd primes ascending.
    TwoFirst,
}

/// The modulus of the next reduction step, or `None` if `L` is stable.
pub fn next_step(gram: &GramMatrix, order: PrimeOrder) -> Option<u64> {
    let mut odd: Vec<u64> = lattice::bad_primes(gram.det()).into_iter().filter(|&p| p != 2).collect();
    odd.retain(|&p| !is_stable_at(gram, p));
    if order == PrimeOrder::Descending {
        odd.reverse();
    }
    let two = if is_stable_at(gram, 2) {
        None
    } else if gram.is_even() {
        Some(4)
    } else {
        Some(2)
    };
    match order {
        PrimeOrder::TwoFirst => two.or_else(|| odd.first().copied()),
        _ => odd.first().copied().or(two),
    }
}

/// Chain of Watson steps ending at a stable lattice.
pub fn reduce_to_stable(gram: &GramMatrix) -> Result<Vec<ReductionStep>> {
    reduce_to_stable_with(gram, PrimeOrder::Ascending)
}

pub fn reduce_to_stable_with(gram: &GramMatrix, order: PrimeOrder) -> Result<Vec<ReductionStep>> {
    let (mut cur, _) = gram.primitive_part();
    let mut steps = Vec::new();
    while let Some(m) = next_step(&cur, order) {
        if steps.len() >= 64 {
            return Err(Error::NonTermination);
        }
        let img = small_lambda(&cur, m)?;
        steps.push(ReductionStep { m, before: cur, after: img.gram, scale: img.scale });
        cur = img.gram;
    }
    Ok(steps)
}

/// `true` if `L_p ≅ H ⊥ ⟨p^m ε⟩` with `m >= 2`, `H` the hyperbolic plane.
pub fn hyperbolic_split(gram: &GramMatrix, p: u64) -> Result<bool> {
    let j = jordan_decompose(gram, p)?;
    let comps = j.components();
    if comps.len() != 2 || comps[0].exp != 0 || comps[0].rank != 2 || comps[1].exp < 2 {
        return Ok(false);
    }
    if p == 2 {
        Ok(j.blocks.iter().any(|b| b.exp == 0 && matches!(b.unit, BlockUnit::Two { kind: EvenType::H, .. })))
    } else {
        Ok(arith::kronecker_rat(&(-comps[0].unit_det.clone()), p) == 1)
    }
}

/// Index-`p` sublattices on which `Q ≡ 0 (mod p)` (mod 4 when `p = 2`),
/// in Hermite normal form.
pub fn isotropic_sublattices(gram: &GramMatrix, p: u64) -> Result<Vec<[Vec3; 3]>> {
    let a = gram.entries();
    let pi = p as i64;
    let mut planes: Vec<Vec<Vec3>> = Vec::new();
    if p == 2 {
        for code in 1..8i64 {
            let phi = [code & 1, (code >> 1) & 1, (code >> 2) & 1];
            let members: Vec<Vec3> = (0..8i64)
                .map(|c| [c & 1, (c >> 1) & 1, (c >> 2) & 1])
                .filter(|x| (0..3).map(|i| phi[i] * x[i]).sum::<i64>() % 2 == 0)
                .collect();
            if members.iter().all(|x| linalg::bilinear(a, x, x).rem_euclid(4) == 0) {
                planes.push(members);
            }
        }
    } else {
        let rad = linalg::kernel_mod_p(a, p);
        if rad.len() != 1 {
            return Err(Error::HypothesisViolated(format!("radical of L/pL must be a line at p = {p}")));
        }
        let r = rad[0];
        let units: [Vec3; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let (ea, eb) = [(0, 1), (0, 2), (1, 2)]
            .into_iter()
            .map(|(i, j)| (units[i], units[j]))
            .find(|(x, y)| (linalg::det_rows(&[r, *x, *y]) % p as i128) != 0)
            .expect("radical is a line");
        let qm = |x: &Vec3| linalg::bilinear(a, x, x).rem_euclid(p as i128);
        let mut lines: Vec<Vec3> = Vec::new();
        if qm(&ea) == 0 {
            lines.push(ea);
        }
        for s in 0..pi {
            let v = [s * ea[0] + eb[0], s * ea[1] + eb[1], s * ea[2] + eb[2]];
            if qm(&v) == 0 {
                lines.push(v);
            }
        }
        for l in lines {
            planes.push(alloc::vec![r, l]);
        }
    }
    let mut out = Vec::new();
    for members in planes {
        let mut gens: Vec<Vec3> = alloc::vec![[pi, 0, 0], [0, pi, 0], [0, 0, pi]];
        gens.extend(members);
        let basis = linalg::hnf_basis(&gens)?;
        debug_assert_eq!(linalg::det_rows(&basis).unsigned_abs(), p as u128);
        out.push(basis);
    }
    out.sort();
    Ok(out)
}

/// The lattice `K = S^{1/p}` for the isotropic index-`p` sublattice `S` with the
/// smallest Hermite normal form.
pub fn construct_k(gram: &GramMatrix, p: u64) -> Result<GramMatrix> {
    if !arith::is_prime(p) {
        return Err(Error::InvalidArgument("p must be prime".into()));
    }
    if !gram.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    if p == 2 && !gram.is_even() {
        return Err(Error::HypothesisViolated("K at p = 2 needs an even lattice".into()));
    }
    if !hyperbolic_split(gram, p)? {
        return Err(Error::HypothesisViolated(format!(
            "L_{p} is not a hyperbolic plane plus a component of scale at least {p}^2"
        )));
    }
    let subs = isotropic_sublattices(gram, p)?;
    if subs.len() != 2 {
        return Err(Error::HypothesisViolated(format!("expected two isotropic sublattices, found {}", subs.len())));
    }
    let s = gram.in_basis(&subs[0])?;
    let k = s.divide(p as i64)?;
    debug_assert_eq!(k.det() * p as i64, gram.det());
    debug_assert!(ord(k.det() as i128, p) + 1 == ord(gram.det() as i128, p));
    Ok(canonical_form(&k))
}
