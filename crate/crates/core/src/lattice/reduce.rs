//! Short vectors, basis reduction and canonical isometry-class representatives.

use alloc::vec::Vec;

use super::linalg::{self, Mat3, Vec3};
use super::GramMatrix;
use crate::arith::isqrt;

/// Visit every `(x2, x3)` for which some `x1` may give `Q(x) <= bound`.
///
/// The callback receives `(x2, x3, beta, gamma)` where
/// `Q(x) = a11 x1² + 2 beta x1 + gamma`. Returns the number of visited cells.
pub(crate) fn for_each_x2x3(a: &Mat3, bound: i128, mut f: impl FnMut(i64, i64, i128, i128)) -> u128 {
    let e = |i: usize, j: usize| a[i][j] as i128;
    let det = linalg::det3(a);
    let c22 = e(0, 0) * e(1, 1) - e(0, 1) * e(0, 1);
    let c23 = e(0, 0) * e(1, 2) - e(0, 1) * e(0, 2);
    let c33 = e(0, 0) * e(2, 2) - e(0, 2) * e(0, 2);
    let x3max = isqrt((bound * c22 / det).max(0) as u128) as i128;
    let mut cells = 0u128;
    for x3 in -x3max..=x3max {
        let rhs = e(0, 0) * bound - c33 * x3 * x3;
        let disc = c23 * c23 * x3 * x3 + c22 * rhs;
        if disc < 0 {
            continue;
        }
        let s = isqrt(disc as u128) as i128;
        let lo = (-c23 * x3 - s).div_euclid(c22) - 1;
        let hi = (-c23 * x3 + s).div_euclid(c22) + 1;
        for x2 in lo..=hi {
            if c22 * x2 * x2 + 2 * c23 * x2 * x3 + c33 * x3 * x3 > e(0, 0) * bound {
                continue;
            }
            cells += 1;
            let beta = e(0, 1) * x2 + e(0, 2) * x3;
            let gamma = e(1, 1) * x2 * x2 + 2 * e(1, 2) * x2 * x3 + e(2, 2) * x3 * x3;
            f(x2 as i64, x3 as i64, beta, gamma);
        }
    }
    cells
}

/// All nonzero vectors with `Q(v) <= bound`, sorted by `(Q(v), v)`.
pub fn short_vectors(gram: &GramMatrix, bound: i64) -> Vec<(Vec3, i64)> {
    let a = &gram.0;
    let a11 = a[0][0] as i128;
    let bound = bound as i128;
    let mut out = Vec::new();
    for_each_x2x3(a, bound, |x2, x3, beta, gamma| {
        let disc = beta * beta - a11 * (gamma - bound);
        if disc < 0 {
            return;
        }
        let s = isqrt(disc as u128) as i128;
        let lo = (-beta - s).div_euclid(a11) - 1;
        let hi = (-beta + s).div_euclid(a11) + 1;
        for x1 in lo..=hi {
            let q = a11 * x1 * x1 + 2 * beta * x1 + gamma;
            if q <= bound && (x1, x2, x3) != (0, 0, 0) {
                out.push(([x1 as i64, x2, x3], q as i64));
            }
        }
    });
    out.sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
    out
}

/// Greedy pairwise reduction; returns the reduced Gram matrix and basis rows.
pub fn greedy_reduce(gram: &GramMatrix) -> (GramMatrix, [Vec3; 3]) {
    let a = &gram.0;
    let mut b: [Vec3; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let q = |v: &Vec3| linalg::bilinear(a, v, v);
    let add = |v: &Vec3, w: &Vec3, c: i64| [v[0] + c * w[0], v[1] + c * w[1], v[2] + c * w[2]];
    loop {
        let mut changed = false;
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let qi = q(&b[i]);
                let bij = linalg::bilinear(a, &b[i], &b[j]);
                let c = -((2 * bij + qi).div_euclid(2 * qi)) as i64;
                if c != 0 {
                    let cand = add(&b[j], &b[i], c);
                    if q(&cand) < q(&b[j]) {
                        b[j] = cand;
                        changed = true;
                    }
                }
            }
        }
        for j in 0..3 {
            let (k, l) = ((j + 1) % 3, (j + 2) % 3);
            for c1 in -1..=1 {
                for c2 in -1..=1 {
                    let cand = add(&add(&b[j], &b[k], c1), &b[l], c2);
                    if q(&cand) < q(&b[j]) {
                        b[j] = cand;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    b.sort_by_key(|v| (q(v), *v));
    let g = gram.in_basis(&b).expect("unimodular change of basis");
    (g, b)
}

fn key(g: &Mat3) -> [i64; 9] {
    [
        g[0][0],
        g[1][1],
        g[2][2],
        g[0][1].abs(),
        g[0][2].abs(),
        g[1][2].abs(),
        -g[0][1],
        -g[0][2],
        -g[1][2],
    ]
}

/// Canonical representative of the isometry class of `gram`.
///
/// Minimizes a fixed key over all bases whose vectors have norm at most the
/// largest diagonal entry of a greedily reduced basis.
pub fn canonical_form(gram: &GramMatrix) -> GramMatrix {
    let (red, _) = greedy_reduce(gram);
    let a = red.0;
    let bound = a[0][0].max(a[1][1]).max(a[2][2]);
    let vecs = short_vectors(&red, bound);
    let mut best = key(&a);
    let mut best_m = a;
    for (v1, q1) in &vecs {
        if *q1 > best[0] {
            break;
        }
        for (v2, q2) in &vecs {
            if (*q1, *q2) > (best[0], best[1]) {
                break;
            }
            for (v3, q3) in &vecs {
                if (*q1, *q2, *q3) > (best[0], best[1], best[2]) {
                    break;
                }
                let rows = [*v1, *v2, *v3];
                if linalg::det_rows(&rows).abs() != 1 {
                    continue;
                }
                let m = linalg::gram_of_rows(&a, &rows).expect("small");
                let k = key(&m);
                if k < best {
                    best = k;
                    best_m = m;
                }
            }
        }
    }
    GramMatrix(best_m)
}

/// `true` if the two lattices are isometric.
pub fn is_isometric(a: &GramMatrix, b: &GramMatrix) -> bool {
    a.det() == b.det() && canonical_form(a) == canonical_form(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_vectors_of_cubic_lattice() {
        let g = GramMatrix::diag(1, 1, 1).unwrap();
        let v = short_vectors(&g, 2);
        assert_eq!(v.iter().filter(|x| x.1 == 1).count(), 6);
        assert_eq!(v.iter().filter(|x| x.1 == 2).count(), 12);
    }

    #[test]
    fn canonical_is_basis_invariant() {
        let g = GramMatrix::diag(1, 2, 5).unwrap();
        let u = [[1, 2, -1], [0, 1, 3], [0, 0, 1]];
        let h = g.in_basis(&u).unwrap();
        assert_ne!(g, h);
        assert_eq!(canonical_form(&g), canonical_form(&h));
        assert_eq!(canonical_form(&g), g);
    }

    #[test]
    fn non_isometric_same_det() {
        let a = GramMatrix::diag(1, 1, 4).unwrap();
        let b = GramMatrix::new([[2, 1, 0], [1, 2, 1], [0, 1, 2]]).unwrap();
        assert_eq!(a.det(), b.det());
        assert!(!is_isometric(&a, &b));
    }
}
