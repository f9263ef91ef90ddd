//! Jordan splittings over `Z_p`.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{kronecker_rat, ord_rat, rat_mod, rpow, Rat};
use crate::error::{Error, Result};

use super::GramMatrix;

/// Type of a rank-2 even unimodular block at `p = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvenType {
    /// `[[2,1],[1,2]]`, determinant `≡ 3 (mod 8)`.
    A,
    /// `[[0,1],[1,0]]`, determinant `≡ 7 (mod 8)`.
    H,
}

/// Unit part of a Jordan block, scaled by `p^{-exp}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockUnit {
    /// `⟨u⟩` with `u` a `p`-adic unit.
    One(Rat),
    /// `[[a, b], [b, c]]` with `a, c` even and `b` a unit (only at `p = 2`).
    Two { a: Rat, b: Rat, c: Rat, kind: EvenType },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JordanBlock {
    pub exp: u32,
    pub unit: BlockUnit,
}

impl JordanBlock {
    pub fn rank(&self) -> usize {
        match self.unit {
            BlockUnit::One(_) => 1,
            BlockUnit::Two { .. } => 2,
        }
    }

    /// Determinant of the unit part.
    pub fn unit_det(&self) -> Rat {
        match &self.unit {
            BlockUnit::One(u) => u.clone(),
            BlockUnit::Two { a, b, c, .. } => a * c - b * b,
        }
    }
}

/// One Jordan component: all blocks of a common scale `p^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JordanComponent {
    pub exp: u32,
    pub rank: usize,
    /// Determinant of the component divided by `p^{exp·rank}`.
    pub unit_det: Rat,
    /// `true` if the norm of the component is strictly smaller than its scale.
    pub even: bool,
}

/// Block-diagonal form of `L ⊗ Z_p`, sorted by scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JordanSplitting {
    pub p: u64,
    pub blocks: Vec<JordanBlock>,
}

impl JordanSplitting {
    pub fn components(&self) -> Vec<JordanComponent> {
        let mut out: Vec<JordanComponent> = Vec::new();
        for b in &self.blocks {
            let even = matches!(b.unit, BlockUnit::Two { .. });
            match out.last_mut() {
                Some(c) if c.exp == b.exp => {
                    c.rank += b.rank();
                    c.unit_det *= b.unit_det();
                    c.even &= even;
                }
                _ => out.push(JordanComponent { exp: b.exp, rank: b.rank(), unit_det: b.unit_det(), even }),
            }
        }
        out
    }

    /// The component of scale `p^0`, if any.
    pub fn unimodular(&self) -> Option<JordanComponent> {
        self.components().into_iter().find(|c| c.exp == 0)
    }

    /// Product of block determinants; equals `d_L` exactly.
    pub fn det(&self) -> Rat {
        let mut d = Rat::one();
        for b in &self.blocks {
            d *= rpow(self.p, (b.exp as usize * b.rank()) as i64) * b.unit_det();
        }
        d
    }

    /// Largest scale exponent.
    pub fn max_exp(&self) -> u32 {
        self.blocks.iter().map(|b| b.exp).max().unwrap_or(0)
    }
}

fn val(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(ord_rat(x, p))
    }
}

fn even_type(a: &Rat, b: &Rat, c: &Rat) -> EvenType {
    let det = a * c - b * b;
    match rat_mod(&det, 8) {
        3 => EvenType::A,
        7 => EvenType::H,
        other => unreachable!("even unimodular binary with det {other} mod 8"),
    }
}

/// Jordan splitting of `gram` at the prime `p`.
pub fn jordan_decompose(gram: &GramMatrix, p: u64) -> Result<JordanSplitting> {
    if !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument("p must be prime".into()));
    }
    let mut m: Vec<Vec<Rat>> = (0..3)
        .map(|i| (0..3).map(|j| Rat::from_integer(BigInt::from(gram.0[i][j]))).collect())
        .collect();
    let mut live: Vec<usize> = alloc::vec![0, 1, 2];
    let mut blocks = Vec::new();
    while !live.is_empty() {
        let min_diag = live
            .iter()
            .filter_map(|&i| val(&m[i][i], p).map(|v| (v, i)))
            .min();
        let mut min_off: Option<(i64, usize, usize)> = None;
        for (x, &i) in live.iter().enumerate() {
            for &j in &live[x + 1..] {
                if let Some(v) = val(&m[i][j], p) {
                    if min_off.map_or(true, |(w, _, _)| v < w) {
                        min_off = Some((v, i, j));
                    }
                }
            }
        }
        let diag_ok = match (min_diag, min_off) {
            (Some((d, _)), Some((o, _, _))) => d <= o,
            (Some(_), None) => true,
            _ => false,
        };
        if diag_ok {
            let i = min_diag.unwrap().1;
            split_one(&mut m, &mut live, i, p, &mut blocks);
        } else if p != 2 {
            let (_, i, j) = min_off.unwrap();
            // e_i <- e_i + e_j produces a diagonal entry of minimal valuation.
            for k in 0..3 {
                let add = m[j][k].clone();
                m[i][k] += add;
            }
            for k in 0..3 {
                let add = m[k][j].clone();
                m[k][i] += add;
            }
            split_one(&mut m, &mut live, i, p, &mut blocks);
        } else {
            let (v, i, j) = min_off.unwrap();
            let (a, b, c) = (m[i][i].clone(), m[i][j].clone(), m[j][j].clone());
            let det = &a * &c - &b * &b;
            let rest: Vec<usize> = live.iter().copied().filter(|&k| k != i && k != j).collect();
            for &k in &rest {
                for &l in &rest {
                    // m_kl -= [m_ki m_kj] B^{-1} [m_il m_jl]ᵀ
                    let t = (&c * &m[k][i] * &m[i][l] - &b * &m[k][i] * &m[j][l] - &b * &m[k][j] * &m[i][l]
                        + &a * &m[k][j] * &m[j][l])
                        / &det;
                    m[k][l] -= t;
                }
            }
            for &k in &rest {
                for x in [i, j] {
                    m[k][x] = Rat::zero();
                    m[x][k] = Rat::zero();
                }
            }
            let s = rpow(2, -v);
            let (ua, ub, uc) = (&a * &s, &b * &s, &c * &s);
            let kind = even_type(&ua, &ub, &uc);
            blocks.push(JordanBlock { exp: v as u32, unit: BlockUnit::Two { a: ua, b: ub, c: uc, kind } });
            live = rest;
        }
    }
    blocks.sort_by_key(|b| (b.exp, b.rank()));
    Ok(JordanSplitting { p, blocks })
}

fn split_one(m: &mut [Vec<Rat>], live: &mut Vec<usize>, i: usize, p: u64, blocks: &mut Vec<JordanBlock>) {
    let piv = m[i][i].clone();
    let rest: Vec<usize> = live.iter().copied().filter(|&k| k != i).collect();
    for &k in &rest {
        for &l in &rest {
            let t = &m[k][i] * &m[i][l] / &piv;
            m[k][l] -= t;
        }
    }
    for &k in &rest {
        m[k][i] = Rat::zero();
        m[i][k] = Rat::zero();
    }
    let v = ord_rat(&piv, p);
    blocks.push(JordanBlock { exp: v as u32, unit: BlockUnit::One(piv * rpow(p, -v)) });
    *live = rest;
}

/// Legendre symbol of a `p`-adic unit rational at odd `p`.
pub fn unit_legendre(u: &Rat, p: u64) -> i32 {
    kronecker_rat(u, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ri;

    fn g(m: [[i64; 3]; 3]) -> GramMatrix {
        GramMatrix::new(m).unwrap()
    }

    #[test]
    fn diagonal_at_five() {
        let j = jordan_decompose(&GramMatrix::diag(1, 1, 75).unwrap(), 5).unwrap();
        let exps: Vec<u32> = j.blocks.iter().map(|b| b.exp).collect();
        assert_eq!(exps, alloc::vec![0, 0, 2]);
        assert_eq!(j.det(), ri(75));
    }

    #[test]
    fn even_lattice_at_two() {
        let l = g([[2, 1, 0], [1, 2, 0], [0, 0, 4]]);
        let j = jordan_decompose(&l, 2).unwrap();
        assert_eq!(j.blocks.len(), 2);
        assert!(matches!(j.blocks[0].unit, BlockUnit::Two { kind: EvenType::A, .. }));
        assert_eq!(j.blocks[1].exp, 2);
        assert_eq!(j.det(), ri(12));
        let h = g([[2, 1, 0], [1, 4, 0], [0, 0, 2]]);
        let j = jordan_decompose(&h, 2).unwrap();
        assert!(matches!(j.blocks[0].unit, BlockUnit::Two { kind: EvenType::H, .. }));
    }

    #[test]
    fn off_diagonal_pivot_odd_prime() {
        let l = g([[3, 1, 0], [1, 3, 0], [0, 0, 1]]);
        let j = jordan_decompose(&l, 3).unwrap();
        assert_eq!(j.det(), ri(8));
        assert!(j.blocks.iter().all(|b| b.exp == 0));
    }
}
