use genusavg_core::arith::{hilbert_symbol, ri, Place};
use genusavg_core::genusformula::evaluate_genus_avg_with;
use genusavg_core::lattice::{canonical_form, jordan_decompose, rational_diagonal};
use genusavg_core::oracle::count_representations;
use genusavg_core::watson::{reduce_to_stable_with, PrimeOrder};
use genusavg_core::{evaluate_genus_avg, semi_oracle, Engine, GramMatrix};
use proptest::prelude::*;

fn gram_strategy(max: i64) -> impl Strategy<Value = GramMatrix> {
    (1..=max, 1..=max, 1..=max, -max..=max, -max..=max, -max..=max).prop_filter_map(
        "positive definite",
        |(a, b, c, x, y, z)| GramMatrix::new([[a, x, y], [x, b, z], [y, z, c]]).ok(),
    )
}

fn primitive_strategy(max: i64) -> impl Strategy<Value = GramMatrix> {
    gram_strategy(max).prop_filter("primitive", |g| g.is_primitive())
}

fn unimodular(seed: [i64; 3]) -> [[i64; 3]; 3] {
    // Product of two elementary matrices and a permutation.
    let [a, b, c] = seed;
    let e = [[1, a, b], [0, 1, c], [0, 0, 1]];
    [e[2], e[0], e[1]]
}

fn transform(g: &GramMatrix, u: &[[i64; 3]; 3]) -> GramMatrix {
    g.in_basis(u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jordan_determinant_matches(g in gram_strategy(8), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let j = jordan_decompose(&g, p).unwrap();
        prop_assert_eq!(j.det(), ri(g.det()));
    }

    #[test]
    fn hilbert_reciprocity(g in gram_strategy(8)) {
        let [d1, d2, d3] = rational_diagonal(&g);
        for (x, y) in [(&d1, &d2), (&d1, &d3), (&d2, &d3)] {
            let mut prod = hilbert_symbol(x, y, Place::Infinity).unwrap();
            for p in primes_of(&[x, y]) {
                prod *= hilbert_symbol(x, y, Place::Prime(p)).unwrap();
            }
            prop_assert_eq!(prod, 1);
        }
    }

    #[test]
    fn canonical_form_is_basis_invariant(g in gram_strategy(6), s in prop::array::uniform3(-2i64..=2)) {
        let h = transform(&g, &unimodular(s));
        prop_assert_eq!(canonical_form(&g), canonical_form(&h));
    }

    #[test]
    fn direct_count_is_basis_invariant(g in gram_strategy(6), s in prop::array::uniform3(-2i64..=2), n in 1u64..40) {
        let h = transform(&g, &unimodular(s));
        prop_assert_eq!(count_representations(&g, n, 1 << 26).unwrap(), count_representations(&h, n, 1 << 26).unwrap());
    }

    #[test]
    fn diagonal_counts_are_even(a in 1i64..8, b in 1i64..8, c in 1i64..8, n in 1u64..80) {
        let g = GramMatrix::diag(a, b, c).unwrap();
        prop_assert_eq!(count_representations(&g, n, 1 << 26).unwrap() % 2, 0);
    }

    #[test]
    fn reduction_order_reaches_stable(g in primitive_strategy(12)) {
        for order in [PrimeOrder::Ascending, PrimeOrder::Descending, PrimeOrder::TwoFirst] {
            let steps = reduce_to_stable_with(&g, order).unwrap();
            let last = steps.last().map(|s| s.after).unwrap_or(g);
            prop_assert!(genusavg_core::lattice::is_stable(&last));
        }
    }

    #[test]
    fn genus_average_matches_semi_oracle(g in primitive_strategy(10), n in 1u64..120) {
        let e = Engine::default();
        prop_assert_eq!(evaluate_genus_avg(&e, &g, n).unwrap().value, semi_oracle(&e, &g, n).unwrap());
    }

    #[test]
    fn genus_average_is_order_independent(g in primitive_strategy(10), n in 1u64..120) {
        let e = Engine::default();
        let a = evaluate_genus_avg_with(&e, &g, n, PrimeOrder::Ascending).unwrap().value;
        let b = evaluate_genus_avg_with(&e, &g, n, PrimeOrder::Descending).unwrap().value;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scaling_is_transparent(g in primitive_strategy(6), c in 2i64..5, n in 1u64..60) {
        let e = Engine::default();
        let mut m = *g.entries();
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        let gc = GramMatrix::new(m).unwrap();
        prop_assert_eq!(
            evaluate_genus_avg(&e, &gc, n * c as u64).unwrap().value,
            evaluate_genus_avg(&e, &g, n).unwrap().value
        );
    }
}

fn primes_of(xs: &[&genusavg_core::Rat]) -> Vec<u64> {
    let mut v = vec![2];
    for r in xs {
        for z in [r.numer(), r.denom()] {
            let z: i64 = z.try_into().unwrap();
            for p in genusavg_core::arith::factor(z).unwrap().primes() {
                if !v.contains(&p) {
                    v.push(p);
                }
            }
        }
    }
    v
}
