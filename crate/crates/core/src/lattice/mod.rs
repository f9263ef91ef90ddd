//! Gram matrices, lattice invariants, Jordan splittings and Hasse symbols.

mod jordan;
pub mod linalg;
mod reduce;

use alloc::vec::Vec;
use num_traits::ToPrimitive;

use crate::arith::{self, hilbert_int, ord, rat, Place, Rat};
use crate::error::{Error, Result};

pub use jordan::{jordan_decompose, unit_legendre, BlockUnit, EvenType, JordanBlock, JordanComponent, JordanSplitting};
pub use linalg::{Mat3, Vec3};
pub use reduce::{canonical_form, greedy_reduce, is_isometric, short_vectors};
pub(crate) use reduce::for_each_x2x3;

/// Symmetric positive-definite integral 3×3 Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GramMatrix(pub(crate) Mat3);

impl GramMatrix {
    /// Validate symmetry and positive definiteness.
    pub fn new(entries: Mat3) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NonSymmetric);
                }
            }
        }
        let m1 = entries[0][0] as i128;
        let m2 = m1 * entries[1][1] as i128 - (entries[0][1] as i128).pow(2);
        let m3 = linalg::det3(&entries);
        if m1 <= 0 || m2 <= 0 || m3 <= 0 {
            return Err(Error::NonPositiveDefinite);
        }
        if m3 > i64::MAX as i128 / 64 {
            return Err(Error::Overflow);
        }
        Ok(GramMatrix(entries))
    }

    pub fn diag(a: i64, b: i64, c: i64) -> Result<Self> {
        Self::new([[a, 0, 0], [0, b, 0], [0, 0, c]])
    }

    /// Gram matrix for `Σ a_ii x_i² + Σ_{i<j} a_ij x_i x_j`.
    ///
    /// When some cross coefficient is odd the form is doubled first; the
    /// returned flag is `true` in that case, and `r_Q(n) = r_{2Q}(2n)`.
    pub fn from_form_coefficients(a11: i64, a22: i64, a33: i64, a12: i64, a13: i64, a23: i64) -> Result<(Self, bool)> {
        if a12 % 2 == 0 && a13 % 2 == 0 && a23 % 2 == 0 {
            let g = Self::new([[a11, a12 / 2, a13 / 2], [a12 / 2, a22, a23 / 2], [a13 / 2, a23 / 2, a33]])?;
            Ok((g, false))
        } else {
            let g = Self::new([[2 * a11, a12, a13], [a12, 2 * a22, a23], [a13, a23, 2 * a33]])?;
            Ok((g, true))
        }
    }

    pub fn entries(&self) -> &Mat3 {
        &self.0
    }

    pub fn det(&self) -> i64 {
        linalg::det3(&self.0) as i64
    }

    /// `Q(x) = xᵀAx`.
    pub fn q(&self, x: &Vec3) -> i128 {
        linalg::bilinear(&self.0, x, x)
    }

    /// Generator of the scale ideal: gcd of all entries.
    pub fn scale_gen(&self) -> i64 {
        let mut g = 0;
        for r in &self.0 {
            for &x in r {
                g = arith::gcd_i64(g, x);
            }
        }
        g
    }

    /// Generator of the norm ideal: gcd of `a_ii` and `2a_ij`.
    pub fn norm_gen(&self) -> i64 {
        let a = &self.0;
        let mut g = 0;
        for i in 0..3 {
            g = arith::gcd_i64(g, a[i][i]);
            for j in i + 1..3 {
                g = arith::gcd_i64(g, 2 * a[i][j]);
            }
        }
        g
    }

    pub fn is_primitive(&self) -> bool {
        self.scale_gen() == 1
    }

    /// All diagonal entries even.
    pub fn is_even(&self) -> bool {
        (0..3).all(|i| self.0[i][i] % 2 == 0)
    }

    /// `(L^{1/c}, c)` with `c` the scale generator.
    pub fn primitive_part(&self) -> (GramMatrix, i64) {
        let c = self.scale_gen();
        let mut m = self.0;
        for r in m.iter_mut() {
            for x in r.iter_mut() {
                *x /= c;
            }
        }
        (GramMatrix(m), c)
    }

    /// Gram matrix in the basis given by `rows`.
    pub fn in_basis(&self, rows: &[Vec3; 3]) -> Result<GramMatrix> {
        let m = linalg::gram_of_rows(&self.0, rows)?;
        GramMatrix::new(m)
    }

    /// Divide every entry by `c`; fails unless `c` divides all entries.
    pub fn divide(&self, c: i64) -> Result<GramMatrix> {
        let mut m = self.0;
        for r in m.iter_mut() {
            for x in r.iter_mut() {
                if *x % c != 0 {
                    return Err(Error::InvalidArgument("scale does not divide the Gram matrix".into()));
                }
                *x /= c;
            }
        }
        GramMatrix::new(m)
    }
}

/// Primes dividing `2·d`.
pub fn bad_primes(d: i64) -> Vec<u64> {
    let mut ps: Vec<u64> = arith::factor(2 * d).expect("nonzero").primes().collect();
    ps.sort_unstable();
    ps
}

/// Rational diagonalization `⟨d1, d2, d3⟩` of the quadratic space.
pub fn rational_diagonal(gram: &GramMatrix) -> [Rat; 3] {
    let a = &gram.0;
    let m1 = a[0][0];
    let m2 = a[0][0] * a[1][1] - a[0][1] * a[0][1];
    let m3 = gram.det();
    [rat(m1, 1), rat(m2, m1), rat(m3, m2)]
}

/// Hasse symbol `S_v = ∏_{i≤j} (d_i, d_j)_v` of a rational diagonalization.
pub fn hasse_symbol(gram: &GramMatrix, v: Place) -> i32 {
    let d: Vec<i128> = rational_diagonal(gram)
        .iter()
        .map(|x| (x.numer() * x.denom()).to_i128().expect("small"))
        .collect();
    let mut s = 1;
    for i in 0..3 {
        for j in i..3 {
            s *= hilbert_int(d[i], d[j], v);
        }
    }
    s
}

/// `S_p* = (-1)^{δ_{p,2}} S_p`; equals `+1` exactly when `L ⊗ Q_p` is isotropic.
pub fn hasse_star(gram: &GramMatrix, p: u64) -> i32 {
    let s = hasse_symbol(gram, Place::Prime(p));
    if p == 2 {
        -s
    } else {
        s
    }
}

/// Stability at `p` of a primitive lattice.
pub fn is_stable_at(gram: &GramMatrix, p: u64) -> bool {
    let d = gram.det();
    let o = ord(d as i128, p);
    if p == 2 {
        (o == 0 && !gram.is_even()) || (o == 1 && gram.is_even())
    } else {
        o <= 1
    }
}

/// Stability at every prime.
pub fn is_stable(gram: &GramMatrix) -> bool {
    gram.is_primitive() && bad_primes(gram.det()).into_iter().all(|p| is_stable_at(gram, p))
}

/// Invariants of a primitive lattice used throughout the genus formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeProfile {
    /// Primitive Gram matrix the invariants refer to.
    pub gram: GramMatrix,
    /// The input equals `rescaled_by` times `gram`.
    pub rescaled_by: i64,
    pub det: i64,
    /// Generator of `n(L)`: 1 for odd lattices, 2 for even ones.
    pub norm_gen: i64,
    pub is_even: bool,
    /// `4 d_L = s t²` with `s` squarefree.
    pub s: i64,
    pub t: i64,
    /// Primes dividing `2 d_L`.
    pub bad_primes: Vec<u64>,
    /// `(p, S_p*)` for every bad prime.
    pub hasse_star: Vec<(u64, i32)>,
    /// Primes where `L` is stable and which enter the stable sum.
    pub stable_set: Vec<u64>,
    /// Bad primes outside `stable_set`.
    pub unstable_set: Vec<u64>,
    /// Conductor of the divisor sum in the stable formula.
    pub frak_p: u64,
    /// Distance from stability; equals 1 iff stable.
    pub frak_d: u64,
    pub k: u32,
}

impl LatticeProfile {
    pub fn is_stable(&self) -> bool {
        self.unstable_set.is_empty()
    }

    pub fn s_star(&self, p: u64) -> i32 {
        self.hasse_star.iter().find(|&&(q, _)| q == p).map(|&(_, s)| s).unwrap_or(1)
    }

    pub fn is_stable_at(&self, p: u64) -> bool {
        !self.unstable_set.contains(&p)
    }
}

/// Compute the profile; non-primitive input is rescaled first.
pub fn profile(gram: &GramMatrix) -> Result<LatticeProfile> {
    let (g, c) = gram.primitive_part();
    let det = g.det();
    let is_even = g.is_even();
    let (s, t) = arith::squarefree_split(4 * det)?;
    let bad = bad_primes(det);
    let mut hasse = Vec::new();
    let mut stable_set = Vec::new();
    let mut unstable_set = Vec::new();
    let mut frak_p: u64 = 1;
    let mut frak_d: u64 = 1;
    for &p in &bad {
        hasse.push((p, hasse_star(&g, p)));
        let o = ord(det as i128, p);
        let in_set = if p == 2 { is_stable_at(&g, 2) } else { o == 1 };
        if in_set {
            stable_set.push(p);
            if !(p == 2 && o == 1) {
                frak_p *= p;
            }
        } else if !(p != 2 && o == 0) {
            unstable_set.push(p);
        }
        if p == 2 {
            if !in_set {
                frak_d *= 2u64.pow(o);
            }
        } else if o >= 1 {
            frak_d *= p.pow(o - 1);
        }
    }
    let k = if frak_d == 1 { 0 } else { arith::factor(frak_d as i64)?.big_omega() };
    Ok(LatticeProfile {
        gram: g,
        rescaled_by: c,
        det,
        norm_gen: g.norm_gen(),
        is_even,
        s,
        t: t as i64,
        bad_primes: bad,
        hasse_star: hasse,
        stable_set,
        unstable_set,
        frak_p,
        frak_d,
        k,
    })
}
