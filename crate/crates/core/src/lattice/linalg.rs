//! Small exact linear algebra over `Z` and `F_p` in dimension 3.

use crate::error::{Error, Result};

pub type Mat3 = [[i64; 3]; 3];
pub type Vec3 = [i64; 3];

pub fn det3(a: &Mat3) -> i128 {
    let a = |i: usize, j: usize| a[i][j] as i128;
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

/// `vᵀ A w`.
pub fn bilinear(a: &Mat3, v: &Vec3, w: &Vec3) -> i128 {
    let mut s = 0i128;
    for i in 0..3 {
        for j in 0..3 {
            s += v[i] as i128 * a[i][j] as i128 * w[j] as i128;
        }
    }
    s
}

/// Gram matrix of the vectors `rows` (each a basis vector) under `a`.
pub fn gram_of_rows(a: &Mat3, rows: &[Vec3; 3]) -> Result<Mat3> {
    let mut g = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = i64::try_from(bilinear(a, &rows[i], &rows[j])).map_err(|_| Error::Overflow)?;
        }
    }
    Ok(g)
}

/// Row-style Hermite normal form basis of the full-rank lattice spanned by `gens`.
///
/// Returns rows `(h11 h12 h13), (0 h22 h23), (0 0 h33)` with positive pivots and
/// `0 <= h_ij < h_jj` above each pivot.
pub fn hnf_basis(gens: &[Vec3]) -> Result<[Vec3; 3]> {
    let mut rows: alloc::vec::Vec<[i128; 3]> =
        gens.iter().map(|v| [v[0] as i128, v[1] as i128, v[2] as i128]).collect();
    let mut out = [[0i128; 3]; 3];
    for c in 0..3 {
        loop {
            let mut best: Option<usize> = None;
            for (i, r) in rows.iter().enumerate() {
                if r[c] != 0 && best.map_or(true, |b| r[c].abs() < rows[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else {
                return Err(Error::InvalidArgument("generators do not span a full-rank lattice".into()));
            };
            let pivot = rows[b];
            let mut done = true;
            for (i, r) in rows.iter_mut().enumerate() {
                if i != b && r[c] != 0 {
                    let q = r[c].div_euclid(pivot[c]);
                    for k in 0..3 {
                        r[k] -= q * pivot[k];
                    }
                    if r[c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                let mut p = rows.swap_remove(b);
                if p[c] < 0 {
                    for x in p.iter_mut() {
                        *x = -*x;
                    }
                }
                out[c] = p;
                break;
            }
        }
        rows.retain(|r| r.iter().any(|&x| x != 0));
    }
    for c in 0..3 {
        for i in 0..c {
            let q = out[i][c].div_euclid(out[c][c]);
            if q != 0 {
                for k in 0..3 {
                    out[i][k] -= q * out[c][k];
                }
            }
        }
    }
    let mut res = [[0i64; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            res[i][k] = i64::try_from(out[i][k]).map_err(|_| Error::Overflow)?;
        }
    }
    Ok(res)
}

/// Basis of the null space of `a mod p`, entries in `0..p`.
pub fn kernel_mod_p(a: &Mat3, p: u64) -> alloc::vec::Vec<Vec3> {
    let p = p as i128;
    let mut m = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (a[i][j] as i128).rem_euclid(p);
        }
    }
    let inv = |x: i128| crate::arith::mod_inverse(x as u64, p as u64).unwrap() as i128;
    let mut pivots = [usize::MAX; 3];
    let mut row = 0;
    for col in 0..3 {
        let Some(r) = (row..3).find(|&r| m[r][col] != 0) else { continue };
        m.swap(row, r);
        let iv = inv(m[row][col]);
        for k in 0..3 {
            m[row][k] = m[row][k] * iv % p;
        }
        for r2 in 0..3 {
            if r2 != row && m[r2][col] != 0 {
                let f = m[r2][col];
                for k in 0..3 {
                    m[r2][k] = (m[r2][k] - f * m[row][k]).rem_euclid(p);
                }
            }
        }
        pivots[row] = col;
        row += 1;
    }
    let pivot_cols: alloc::vec::Vec<usize> = pivots[..row].to_vec();
    let mut basis = alloc::vec::Vec::new();
    for free in (0..3).filter(|c| !pivot_cols.contains(c)) {
        let mut v = [0i64; 3];
        v[free] = 1;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = ((-m[r][free]).rem_euclid(p)) as i64;
        }
        basis.push(v);
    }
    basis
}

pub fn det_rows(r: &[Vec3; 3]) -> i128 {
    let m = [r[0], r[1], r[2]];
    det3(&m)
}
