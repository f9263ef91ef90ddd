use genusavg_core::arith::{rat, ri};
use genusavg_core::genusformula::{coprime_formula, evaluate_genus_avg_with, stable_formula, strip_square_prime};
use genusavg_core::oracle::{default_corpus, verify_all};
use genusavg_core::watson::PrimeOrder;
use genusavg_core::{
    count_representations, evaluate_genus_avg, semi_oracle, synthesize_formula, Engine, GramMatrix, Provenance, Rat,
};

fn even_example() -> GramMatrix {
    GramMatrix::new([[2, 1, 0], [1, 2, 1], [0, 1, 4]]).unwrap()
}

#[test]
fn corpus_agrees_with_semi_oracle() {
    let e = Engine::default();
    for g in default_corpus() {
        for n in 1..=200 {
            let v = evaluate_genus_avg(&e, &g, n).unwrap();
            assert_eq!(v.value, semi_oracle(&e, &g, n).unwrap(), "{g:?} n={n}");
        }
    }
    assert_eq!(e.fallback_count(), 0);
}

#[test]
fn sums_of_three_squares_direct() {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 1, 1).unwrap();
    for n in 1..=500 {
        let c = count_representations(&g, n, 1 << 30).unwrap();
        assert_eq!(evaluate_genus_avg(&e, &g, n).unwrap().value, ri(c as i64), "n={n}");
    }
}

#[test]
fn one_three_five_at_one() {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 3, 5).unwrap();
    let expect = rat(1, 4) * (e.hurwitz(&ri(60)) + ri(2) * e.hurwitz(&ri(15)));
    assert_eq!(evaluate_genus_avg(&e, &g, 1).unwrap().value, expect);
}

#[test]
fn coprime_example_value() {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 1, 75).unwrap();
    let prof = e.profile(&g).unwrap();
    assert_eq!(coprime_formula(&e, &prof, 1).unwrap(), rat(4, 5));
    assert!(coprime_formula(&e, &prof, 5).is_err());
}

#[test]
fn split_identity_on_example() {
    let e = Engine::default();
    let l = GramMatrix::diag(1, 1, 75).unwrap();
    let k = GramMatrix::diag(1, 1, 15).unwrap();
    let lam = GramMatrix::diag(1, 1, 3).unwrap();
    for n0 in 1..=40u64 {
        let lhs = semi_oracle(&e, &l, 5 * n0).unwrap();
        let mut rhs = ri(2) * semi_oracle(&e, &k, n0).unwrap();
        if n0 % 5 == 0 {
            rhs -= semi_oracle(&e, &lam, n0 / 5).unwrap();
        }
        assert_eq!(lhs, rhs, "n0={n0}");
        let v = evaluate_genus_avg(&e, &l, 5 * n0).unwrap();
        assert_eq!(v.provenance, Provenance::Split { p: 5 });
    }
}

#[test]
fn even_example_vanishes_on_odd() {
    let e = Engine::default();
    let g = even_example();
    for n in (1..200).step_by(2) {
        assert_eq!(evaluate_genus_avg(&e, &g, n).unwrap().value, Rat::from_integer(0.into()));
        assert_eq!(semi_oracle(&e, &g, n).unwrap(), Rat::from_integer(0.into()));
    }
}

#[test]
fn stable_displays() {
    let e = Engine::default();
    let f = stable_formula(&e.profile(&even_example()).unwrap()).unwrap().normalized();
    assert_eq!(f.to_string(), "3 * (H(10n) - 5H(2n/5))");
    let f = stable_formula(&e.profile(&GramMatrix::diag(1, 3, 5).unwrap()).unwrap()).unwrap().normalized();
    assert_eq!(
        f.to_string(),
        "1/4 * (H(60n) + 2H(15n) + 3H(20n/3) - 5H(12n/5) + 6H(5n/3) - 10H(3n/5) - 15H(4n/15) - 30H(n/15))"
    );
}

#[test]
fn example_piecewise_formula() {
    let e = Engine::default();
    let pf = synthesize_formula(&e, &GramMatrix::diag(1, 1, 75).unwrap()).unwrap();
    assert_eq!(pf.modulus, 5);
    let c = pf.combined().expect("common term list");
    assert_eq!(c.distinct_constants(), vec![rat(4, 15), rat(2, 5), rat(2, 3)]);
    let mut shown: Vec<String> = c.terms.iter().map(|t| format!("{}@{}", t.coeff, t.scale)).collect();
    let mut want = ["1@12", "2@3", "-3@4/3", "-6@1/3", "2@12/25", "4@3/25", "-6@4/75", "-12@1/75"];
    shown.sort();
    want.sort();
    assert_eq!(shown, want);
    for n in 1..=300 {
        assert_eq!(pf.eval(&e, n), evaluate_genus_avg(&e, &GramMatrix::diag(1, 1, 75).unwrap(), n).unwrap().value);
    }
}

#[test]
fn nine_piecewise_formula() {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 1, 9).unwrap();
    let pf = synthesize_formula(&e, &g).unwrap();
    for piece in &pf.pieces {
        for k in 0..50u64 {
            let r = piece.residues[(k as usize) % piece.residues.len()];
            let n = r + (k + 1) * pf.modulus;
            assert_eq!(piece.formula.eval(&e, n), evaluate_genus_avg(&e, &g, n).unwrap().value, "n={n}");
        }
    }
}

#[test]
fn stable_lattice_single_piece() {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 3, 5).unwrap();
    let pf = synthesize_formula(&e, &g).unwrap();
    assert_eq!(pf.modulus, 1);
    assert_eq!(pf.pieces.len(), 1);
    assert_eq!(pf.pieces[0].formula, stable_formula(&e.profile(&g).unwrap()).unwrap().normalized());
}

#[test]
fn square_prime_ratio() {
    let e = Engine::default();
    for g in default_corpus() {
        for n in 1..=30u64 {
            for q in [7u64, 11, 13] {
                let Ok(ratio) = strip_square_prime(&e, &g, n, q) else { continue };
                let lhs = evaluate_genus_avg(&e, &g, n * q * q).unwrap().value;
                let rhs = ratio * evaluate_genus_avg(&e, &g, n).unwrap().value;
                assert_eq!(lhs, rhs, "{g:?} n={n} q={q}");
            }
        }
    }
}

#[test]
fn scaling_invariance() {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 1, 75).unwrap();
    let g3 = GramMatrix::diag(3, 3, 225).unwrap();
    for n in 1..=60 {
        assert_eq!(evaluate_genus_avg(&e, &g3, 3 * n).unwrap().value, evaluate_genus_avg(&e, &g, n).unwrap().value);
        assert_eq!(evaluate_genus_avg(&e, &g3, 3 * n + 1).unwrap().provenance, Provenance::OutsideNorm);
    }
}

#[test]
fn prime_order_does_not_matter() {
    let e = Engine::default();
    for g in [GramMatrix::diag(1, 1, 75).unwrap(), GramMatrix::diag(1, 9, 25).unwrap(), GramMatrix::diag(2, 3, 36).unwrap()] {
        for n in 1..=120 {
            let a = evaluate_genus_avg_with(&e, &g, n, PrimeOrder::Ascending).unwrap().value;
            let b = evaluate_genus_avg_with(&e, &g, n, PrimeOrder::Descending).unwrap().value;
            assert_eq!(a, b, "{g:?} n={n}");
        }
    }
}

#[test]
fn default_corpus_report_passes() {
    let e = Engine::default();
    let corpus: Vec<_> = default_corpus().into_iter().map(Ok).collect();
    let r = verify_all(&e, &corpus, 60);
    for c in &r.checks {
        assert_eq!(c.status.as_str(), "pass", "{c:?}");
    }
    assert!(r.all_pass);
}

#[test]
fn corrupted_input_is_reported() {
    let e = Engine::default();
    let bad = GramMatrix::new([[1, 2, 0], [0, 1, 0], [0, 0, 1]]);
    let r = verify_all(&e, &[bad], 5);
    assert!(!r.all_pass);
    assert!(r.checks.iter().any(|c| c.name == "input" && c.error.is_some()));
}
