//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use genusavg_core::arith::{rat, ri, valuation};
use genusavg_core::classnum::{h_primitive, h_via_conductor, hurwitz, hurwitz_fast, hurwitz_reduce_q};
use genusavg_core::genusformula::{stable_formula, HTerm};
use genusavg_core::lattice::{canonical_form, is_stable, profile};
use genusavg_core::localdensity::{alpha, alpha_count, locally_represented, DensitySource};
use genusavg_core::oracle::default_corpus;
use genusavg_core::watson::{construct_k, reduce_to_stable};
use genusavg_core::{
    count_representations, evaluate_genus_avg, semi_oracle, synthesize_formula, Engine, GramMatrix, Rat,
};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn even_example() -> GramMatrix {
    GramMatrix::new([[2, 1, 0], [1, 2, 1], [0, 1, 4]]).unwrap()
}

fn h(n: i64) -> Rat {
    hurwitz(&ri(n))
}

fn hq(x: Rat) -> Rat {
    hurwitz(&x)
}

fn terms_of(f: &genusavg_core::HFormula) -> Vec<(Rat, Rat)> {
    let mut v: Vec<(Rat, Rat)> = f.expanded().into_iter().map(|HTerm { coeff, scale }| (scale, coeff)).collect();
    v.sort();
    v
}

fn gauss() -> Outcome {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 1, 1).unwrap();
    for n in 1..=500u64 {
        let v = evaluate_genus_avg(&e, &g, n).map_err(|x| x.to_string())?.value;
        let c = ri(count_representations(&g, n, 1 << 30).map_err(|x| x.to_string())? as i64);
        let f = ri(12) * h(4 * n as i64) - ri(24) * h(n as i64);
        check(v == c && c == f, || format!("n={n}: engine {v}, count {c}, 12H(4n)-24H(n) {f}"))?;
    }
    Ok("500 values".into())
}

fn example_one_three_five() -> Outcome {
    let e = Engine::default();
    let g = GramMatrix::diag(1, 3, 5).unwrap();
    let f = stable_formula(&*e.profile(&g).map_err(|x| x.to_string())?).map_err(|x| x.to_string())?;
    let pre = rat(1, 4);
    // The f = 15 term has scale 60/15² = 4/15.
    let want: Vec<(i64, Rat)> = vec![
        (1, ri(60)),
        (2, ri(15)),
        (3, rat(20, 3)),
        (6, rat(5, 3)),
        (-5, rat(12, 5)),
        (-10, rat(3, 5)),
        (-15, rat(4, 15)),
        (-30, rat(1, 15)),
    ];
    let mut want: Vec<(Rat, Rat)> = want.into_iter().map(|(c, s)| (s, ri(c) * &pre)).collect();
    want.sort();
    check(terms_of(&f) == want, || format!("formula {f}"))?;
    let norm = f.normalized();
    check(norm.prefactor == pre, || format!("prefactor {}", norm.prefactor))?;
    for n in 1..=200 {
        let a = evaluate_genus_avg(&e, &g, n).map_err(|x| x.to_string())?.value;
        let b = semi_oracle(&e, &g, n).map_err(|x| x.to_string())?;
        check(a == b, || format!("n={n}: engine {a}, semi-oracle {b}"))?;
    }
    Ok(format!("{norm}; 200 semi-oracle matches"))
}

fn example_even() -> Outcome {
    let e = Engine::default();
    let g = even_example();
    let f = stable_formula(&*e.profile(&g).map_err(|x| x.to_string())?).map_err(|x| x.to_string())?;
    let mut want = vec![(ri(10), ri(3)), (rat(2, 5), ri(-15))];
    want.sort();
    check(terms_of(&f) == want, || format!("formula {f}"))?;
    for n in 1..=200u64 {
        let a = evaluate_genus_avg(&e, &g, n).map_err(|x| x.to_string())?.value;
        if n % 2 == 1 {
            check(a.is_zero(), || format!("odd n={n} gives {a}"))?;
        } else {
            let b = semi_oracle(&e, &g, n).map_err(|x| x.to_string())?;
            check(a == b, || format!("n={n}: engine {a}, semi-oracle {b}"))?;
        }
    }
    Ok(format!("{}", f.normalized()))
}

fn example_piecewise() -> Outcome {
    let e = Engine::default();
    let l = GramMatrix::diag(1, 1, 75).unwrap();
    let pf = synthesize_formula(&e, &l).map_err(|x| x.to_string())?;
    check(pf.modulus == 5, || format!("modulus {}", pf.modulus))?;
    let c = pf.combined().ok_or("no common term list")?;
    for (residues, want) in [(vec![1u64, 4], rat(2, 5)), (vec![2, 3], rat(4, 15)), (vec![0], rat(2, 3))] {
        for r in residues {
            let got = c.constants.iter().find(|(rs, _)| rs.contains(&r)).map(|(_, k)| k.clone());
            check(got.as_ref() == Some(&want), || format!("c_L({r} mod 5) = {got:?}"))?;
        }
    }
    let mut got: Vec<(Rat, Rat)> = c.terms.iter().map(|t| (t.scale.clone(), t.coeff.clone())).collect();
    got.sort();
    let mut want: Vec<(Rat, Rat)> = [
        (ri(12), 1),
        (ri(3), 2),
        (rat(4, 3), -3),
        (rat(1, 3), -6),
        (rat(12, 25), 2),
        (rat(3, 25), 4),
        (rat(4, 75), -6),
        (rat(1, 75), -12),
    ]
    .into_iter()
    .map(|(s, k)| (s, ri(k)))
    .collect();
    want.sort();
    check(got == want, || format!("terms {got:?}"))?;
    let chain = reduce_to_stable(&l).map_err(|x| x.to_string())?;
    let end = chain.last().map(|s| s.after).unwrap_or(l);
    check(end == canonical_form(&GramMatrix::diag(1, 1, 3).unwrap()), || format!("chain ends at {end:?}"))?;
    let k = construct_k(&l, 5).map_err(|x| x.to_string())?;
    check(k == canonical_form(&GramMatrix::diag(1, 1, 15).unwrap()), || format!("K = {k:?}"))?;
    for n in 1..=200 {
        let a = pf.eval(&e, n);
        let b = evaluate_genus_avg(&e, &l, n).map_err(|x| x.to_string())?.value;
        check(a == b, || format!("n={n}: formula {a}, engine {b}"))?;
    }
    Ok("modulus 5, constants {2/5, 4/15, 2/3}, 8 terms".into())
}

fn local_densities() -> Outcome {
    let cap = 1u128 << 62;
    let mut cases = 0;
    for g in default_corpus() {
        let prof = profile(&g).map_err(|x| x.to_string())?;
        for p in [2u64, 3, 5] {
            if !prof.is_stable_at(p) {
                continue;
            }
            for n in 1..=100u64 {
                let a = alpha(&prof, p, n, cap).map_err(|x| x.to_string())?;
                check(a.source != DensitySource::CountingOracle, || format!("{g:?} p={p} n={n}: no closed form"))?;
                let b = alpha_count(&g, p, n, cap).map_err(|x| x.to_string())?;
                check(a.value == b, || format!("{g:?} p={p} n={n}: closed {} count {b}", a.value))?;
                cases += 1;
            }
        }
    }
    check(cases >= 1500, || format!("only {cases} cases"))?;
    Ok(format!("{cases} cases"))
}

fn class_numbers() -> Outcome {
    for n in 1..=5000i64 {
        let a = h(n);
        let b = hurwitz_fast(&ri(n));
        check(a == b, || format!("H({n}): enumeration {a}, fast {b}"))?;
    }
    for n in 1..=2000u64 {
        for q in [2u64, 3, 5, 7, 11, 13] {
            let a = hurwitz_reduce_q(n, q).map_err(|x| x.to_string())?;
            check(a == h(n as i64), || format!("N={n} q={q}: reduced {a}"))?;
        }
    }
    let mut grid = 0;
    for d in [-3i64, -4, -7, -8, -15, -20] {
        for f in 1..=30u64 {
            let lhs = ri(h_primitive(d * (f * f) as i64).map_err(|x| x.to_string())? as i64);
            let rhs = h_via_conductor(d, f).map_err(|x| x.to_string())?;
            check(lhs == rhs, || format!("h({d}·{f}²) = {lhs}, conductor formula {rhs}"))?;
            grid += 1;
        }
    }
    Ok(format!("5000 + 12000 + {grid} identities"))
}

fn ratios() -> Outcome {
    let e = Engine::default();
    let cap = 1u128 << 62;
    let (mut c4, mut c5, mut c6) = (0, 0, 0);
    for g in default_corpus() {
        let prof = profile(&g).map_err(|x| x.to_string())?;
        let d = prof.det;
        for n in 1..=100u64 {
            if !locally_represented(&prof, n, cap).map_err(|x| x.to_string())? {
                continue;
            }
            let r = |m: u64| evaluate_genus_avg(&e, &g, m).map(|v| v.value).map_err(|x| x.to_string());
            let so = |m: u64| semi_oracle(&e, &g, m).map_err(|x| x.to_string());
            let base = 4 * d * n as i64;
            // Square of a good prime.
            for q in [7u64, 11, 13] {
                if d % q as i64 == 0 || n > 40 {
                    continue;
                }
                let ratio = hq(ri(base * (q * q) as i64)) / hq(ri(base));
                let (a, b) = (r(n * q * q)?, ratio * r(n)?);
                check(a == b, || format!("{g:?} n={n} q={q}: {a} vs {b}"))?;
                c4 += 1;
            }
            // Square of an odd prime exactly dividing d_L.
            for p in prof.bad_primes.iter().copied().filter(|&p| p != 2 && ord(d as i128, p) == 1) {
                let s = ri(prof.s_star(p) as i64 * p as i64);
                let pp = (p * p) as i64;
                let num = hq(ri(base * pp)) + &s * hq(ri(base));
                let den = hq(ri(base)) + &s * hq(rat(base, pp));
                let (a, b) = (so(n * p * p)?, so(n)? * num / den);
                check(a == b, || format!("{g:?} n={n} p={p}: {a} vs {b}"))?;
                c5 += 1;
            }
            // Factor 4 at a lattice stable at 2.
            if prof.is_stable_at(2) {
                let dn = d * n as i64;
                let ratio = if prof.is_even {
                    let den = hq(ri(dn));
                    if den.is_zero() {
                        continue;
                    }
                    hq(ri(4 * dn)) / den
                } else {
                    let s2 = ri(2 * prof.s_star(2) as i64);
                    (hq(ri(16 * dn)) + &s2 * hq(ri(4 * dn))) / (hq(ri(4 * dn)) + &s2 * hq(ri(dn)))
                };
                let (a, b) = (so(4 * n)?, so(n)? * ratio);
                check(a == b, || format!("{g:?} n={n} at 2: {a} vs {b}"))?;
                c6 += 1;
            }
        }
    }
    check(c4 + c5 + c6 >= 100 && c4 > 0 && c5 > 0 && c6 > 0, || format!("too few triples: {c4}/{c5}/{c6}"))?;
    Ok(format!("{c4} good-prime, {c5} odd-bad-prime, {c6} at-two triples"))
}

fn random_gram(rng: &mut ChaCha8Rng) -> GramMatrix {
    loop {
        let d: [i64; 3] = [rng.gen_range(1..=12), rng.gen_range(1..=12), rng.gen_range(1..=12)];
        let o: [i64; 3] = [rng.gen_range(-12..=12), rng.gen_range(-12..=12), rng.gen_range(-12..=12)];
        if let Ok(g) = GramMatrix::new([[d[0], o[0], o[1]], [o[0], d[1], o[2]], [o[1], o[2], d[2]]]) {
            if g.is_primitive() {
                return g;
            }
        }
    }
}

fn reduction_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let e = Engine::default();
    let mut steps_total = 0;
    for i in 0..200 {
        let g = random_gram(&mut rng);
        let chain = reduce_to_stable(&g).map_err(|x| format!("{g:?}: {x}"))?;
        for s in &chain {
            let p = if s.m == 4 { 2 } else { s.m };
            let (before, after) = (ord(s.before.det() as i128, p), ord(s.after.det() as i128, p));
            check(after < before, || format!("#{i} {g:?}: step m={} keeps ord_{p} at {before} -> {after}", s.m))?;
        }
        let end = chain.last().map(|s| s.after).unwrap_or(g);
        check(is_stable(&end), || format!("#{i} {g:?}: chain ends unstable"))?;
        steps_total += chain.len();
        for _ in 0..10 {
            let n = rng.gen_range(1..=100u64);
            let a = evaluate_genus_avg(&e, &g, n).map_err(|x| format!("{g:?} n={n}: {x}"))?.value;
            let b = semi_oracle(&e, &g, n).map_err(|x| format!("{g:?} n={n}: {x}"))?;
            check(a == b, || format!("#{i} {g:?} n={n}: engine {a}, semi-oracle {b}"))?;
        }
    }
    Ok(format!("200 lattices, {steps_total} Watson steps, {} semi-oracle fallbacks", e.fallback_count()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("sums of three squares", Duration::from_secs(30), gauss),
        ("stable formula for <1,3,5>", Duration::from_secs(120), example_one_three_five),
        ("stable formula for the even lattice of determinant 10", Duration::from_secs(120), example_even),
        ("piecewise formula for <1,1,75>", Duration::from_secs(60), example_piecewise),
        ("closed-form local densities vs counting", Duration::from_secs(300), local_densities),
        ("class number identities", Duration::from_secs(60), class_numbers),
        ("square-factor ratio identities", Duration::from_secs(180), ratios),
        ("reduction soundness on random lattices", Duration::from_secs(600), reduction_soundness),
    ];
    let mut ok = true;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = f();
        let dt = t.elapsed();
        let line = match &res {
            Ok(detail) if dt <= *limit => format!("PASS criterion {}: {name} ({detail}; {:.2?})", i + 1, dt),
            Ok(_) => format!("FAIL criterion {}: {name} (took {:.2?}, limit {:?})", i + 1, dt, limit),
            Err(why) => format!("FAIL criterion {}: {name} ({why})", i + 1),
        };
        ok &= line.starts_with("PASS");
        println!("{line}");
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ord(n: i128, p: u64) -> u32 {
    valuation(n, p).expect("nonzero")
}
