//! Independent reference computations and the cross-check harness.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::arith::{self, isqrt, ord, ri, Rat};
use crate::classnum;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::genusformula::{evaluate_genus_avg, stable_formula, synthesize_formula};
use crate::lattice::for_each_x2x3;
use crate::lattice::{is_isometric, GramMatrix};
use crate::localdensity::{self, alpha_count, DensitySource};

/// `#{x ∈ Z³ : Q(x) = n}` by direct enumeration.
pub fn count_representations(gram: &GramMatrix, n: u64, budget: u128) -> Result<u64> {
    let a = gram.entries();
    let det = gram.det() as u128;
    let bound = n as u128;
    let adj22 = (a[0][0] as i128 * a[2][2] as i128 - (a[0][2] as i128).pow(2)) as u128;
    let adj33 = (a[0][0] as i128 * a[1][1] as i128 - (a[0][1] as i128).pow(2)) as u128;
    let w2 = 2 * isqrt(bound * adj22 / det) + 3;
    let w3 = 2 * isqrt(bound * adj33 / det) + 1;
    let needed = w2.saturating_mul(w3);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let a11 = a[0][0] as i128;
    let n = n as i128;
    let mut count = 0u64;
    for_each_x2x3(a, n, |_, _, beta, gamma| {
        // a11 x1² + 2 beta x1 + gamma - n = 0
        let disc = beta * beta - a11 * (gamma - n);
        if disc < 0 {
            return;
        }
        let s = isqrt(disc as u128) as i128;
        if s * s != disc {
            return;
        }
        for num in [-beta - s, -beta + s] {
            if num % a11 == 0 {
                count += 1;
            }
            if s == 0 {
                break;
            }
        }
    });
    Ok(count)
}

/// `r(n, gen L)` from the class-number form of the Siegel mass formula, with
/// enumerated Hurwitz class numbers and counted local densities.
pub fn semi_oracle(engine: &Engine, gram: &GramMatrix, n: u64) -> Result<Rat> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (prim, c) = gram.primitive_part();
    if n % c as u64 != 0 {
        return Ok(Rat::zero());
    }
    let n = n / c as u64;
    let prof = engine.profile(&prim)?;
    let d = prof.det as u64;

    let mut n0 = n;
    let mut steps = Vec::new();
    for q in arith::factor(n as i64)?.primes() {
        if (2 * d) % q == 0 {
            continue;
        }
        while ord(n0 as i128, q) >= 2 {
            n0 /= q * q;
            steps.push(q);
        }
    }

    let (fd, f) = arith::fundamental_discriminant(-4 * d as i64 * n0 as i64)?;
    assert_eq!(
        ri(-fd) * &f * &f,
        ri(4 * d as i64 * n0 as i64),
        "4 d n0 must equal |d_K| F²"
    );
    let mut v = ri(12) * f / ri(2 * d as i64) * engine.hurwitz_enum(fd.unsigned_abs());
    for &p in &prof.bad_primes {
        let a = alpha_count(&prim, p, n0, engine.config.oracle_depth_cap)?;
        if a.is_zero() {
            return Ok(Rat::zero());
        }
        let pp = p as i64;
        v *= a * (ri(1) - Rat::new(arith::kronecker(fd, pp).into(), pp.into())) / (ri(1) - Rat::new(1.into(), (pp * pp).into()));
    }
    let mut m = n0;
    for q in steps.into_iter().rev() {
        let base = 4 * d * m;
        v *= engine.hurwitz_enum(base * q * q) / engine.hurwitz_enum(base);
        m *= q * q;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Error,
}

impl CheckStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Error => "error",
        }
    }
}

/// First disagreement of a check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub n: u64,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub lattice: Option<GramMatrix>,
    pub range: String,
    pub cases: u64,
    pub status: CheckStatus,
    pub witness: Option<Witness>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl VerificationReport {
    /// Sort checks by name and lattice and compute the all-pass flag.
    pub fn from_checks(mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| (&a.name, &a.lattice, &a.range).cmp(&(&b.name, &b.lattice, &b.range)));
        let all_pass = checks.iter().all(|c| c.status == CheckStatus::Pass);
        VerificationReport { checks, all_pass }
    }
}

struct Grid<'a> {
    name: &'a str,
    lattice: Option<GramMatrix>,
    range: String,
    cases: u64,
    witness: Option<Witness>,
    error: Option<String>,
}

impl<'a> Grid<'a> {
    fn new(name: &'a str, lattice: Option<GramMatrix>, range: String) -> Self {
        Grid { name, lattice, range, cases: 0, witness: None, error: None }
    }

    /// Record one case; returns `false` once the grid should stop.
    fn case(&mut self, n: u64, r: Result<(String, String)>) -> bool {
        self.cases += 1;
        match r {
            Ok((e, g)) if e == g => true,
            Ok((expected, got)) => {
                self.witness = Some(Witness { n, expected, got });
                false
            }
            Err(err) => {
                self.error = Some(format!("n = {n}: {err}"));
                false
            }
        }
    }

    fn finish(self) -> Check {
        let status = if self.error.is_some() {
            CheckStatus::Error
        } else if self.witness.is_some() {
            CheckStatus::Fail
        } else {
            CheckStatus::Pass
        };
        Check {
            name: self.name.to_string(),
            lattice: self.lattice,
            range: self.range,
            cases: self.cases,
            status,
            witness: self.witness,
            error: self.error,
        }
    }
}

fn pair(a: Rat, b: Rat) -> (String, String) {
    (a.to_string(), b.to_string())
}

/// Cross-checks for one lattice with `n ≤ nmax`.
pub fn verify_lattice(engine: &Engine, gram: &GramMatrix, nmax: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let prof = match engine.profile(gram) {
        Ok(p) => p,
        Err(e) => {
            let mut g = Grid::new("profile", Some(*gram), String::new());
            g.error = Some(e.to_string());
            out.push(g.finish());
            return out;
        }
    };

    let mut g = Grid::new("genus_avg_vs_semi_oracle", Some(*gram), format!("1..={nmax}"));
    for n in 1..=nmax {
        let r = evaluate_genus_avg(engine, gram, n).and_then(|v| Ok(pair(semi_oracle(engine, gram, n)?, v.value)));
        if !g.case(n, r) {
            break;
        }
    }
    out.push(g.finish());

    let three_squares = GramMatrix::diag(1, 1, 1).expect("positive definite");
    if is_isometric(gram, &three_squares) {
        let mut g = Grid::new("genus_avg_vs_direct_count", Some(*gram), format!("1..={nmax}"));
        for n in 1..=nmax {
            let r = count_representations(gram, n, engine.config.enum_budget)
                .and_then(|c| Ok(pair(ri(c as i64), evaluate_genus_avg(engine, gram, n)?.value)));
            if !g.case(n, r) {
                break;
            }
        }
        out.push(g.finish());
    }

    let amax = nmax.min(100);
    let mut g = Grid::new("alpha_closed_form_vs_count", Some(*gram), format!("1..={amax}"));
    'outer: for &p in prof.bad_primes.iter().filter(|&&p| prof.is_stable_at(p)) {
        for n in 1..=amax {
            let r = localdensity::alpha(&prof, p, n, engine.config.oracle_depth_cap).and_then(|a| {
                debug_assert!(a.source != DensitySource::CountingOracle);
                Ok(pair(alpha_count(gram, p, n, engine.config.oracle_depth_cap)?, a.value))
            });
            if !g.case(n, r) {
                break 'outer;
            }
        }
    }
    out.push(g.finish());

    if prof.is_stable() {
        let mut g = Grid::new("stable_formula_vs_genus_avg", Some(*gram), format!("1..={nmax}"));
        match stable_formula(&prof) {
            Ok(f) => {
                for n in 1..=nmax {
                    let r = evaluate_genus_avg(engine, gram, n).map(|v| pair(v.value, f.eval(engine, n)));
                    if !g.case(n, r) {
                        break;
                    }
                }
            }
            Err(e) => g.error = Some(e.to_string()),
        }
        out.push(g.finish());
    }

    let mut g = Grid::new("synthesized_formula_vs_genus_avg", Some(*gram), format!("1..={nmax}"));
    match synthesize_formula(engine, gram) {
        Ok(pf) => {
            for n in 1..=nmax {
                let r = evaluate_genus_avg(engine, gram, n).map(|v| pair(v.value, pf.eval(engine, n)));
                if !g.case(n, r) {
                    break;
                }
            }
        }
        Err(e) => g.error = Some(e.to_string()),
    }
    out.push(g.finish());
    out
}

/// Class-number checks independent of any lattice.
pub fn verify_class_numbers(engine: &Engine, nmax: u64) -> Vec<Check> {
    let mut g = Grid::new("hurwitz_fast_vs_enumeration", None, format!("1..={nmax}"));
    for n in 1..=nmax {
        let x = ri(n as i64);
        if !g.case(n, Ok(pair(engine.hurwitz_enum(n), classnum::hurwitz_fast(&x)))) {
            break;
        }
    }
    alloc::vec![g.finish()]
}

/// Every cross-check over a corpus.
pub fn verify_all(engine: &Engine, corpus: &[Result<GramMatrix>], nmax: u64) -> VerificationReport {
    if corpus.is_empty() {
        return VerificationReport::from_checks(Vec::new());
    }
    let mut checks = verify_class_numbers(engine, nmax);
    for (i, item) in corpus.iter().enumerate() {
        match item {
            Ok(g) => checks.extend(verify_lattice(engine, g, nmax)),
            Err(e) => {
                let mut g = Grid::new("input", None, format!("corpus[{i}]"));
                g.error = Some(e.to_string());
                checks.push(g.finish());
            }
        }
    }
    VerificationReport::from_checks(checks)
}

/// The six-lattice reference corpus.
pub fn default_corpus() -> Vec<GramMatrix> {
    let pd = "positive definite";
    alloc::vec![
        GramMatrix::diag(1, 1, 1).expect(pd),
        GramMatrix::diag(1, 3, 5).expect(pd),
        GramMatrix::new([[2, 1, 0], [1, 2, 1], [0, 1, 4]]).expect(pd),
        GramMatrix::diag(1, 1, 75).expect(pd),
        GramMatrix::diag(1, 1, 15).expect(pd),
        GramMatrix::diag(1, 1, 3).expect(pd),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let g = GramMatrix::diag(1, 1, 1).unwrap();
        assert_eq!(count_representations(&g, 1, 1 << 20).unwrap(), 6);
        assert_eq!(count_representations(&g, 3, 1 << 20).unwrap(), 8);
        assert_eq!(count_representations(&g, 7, 1 << 20).unwrap(), 0);
        assert_eq!(count_representations(&g, 9, 1 << 20).unwrap(), 30);
    }

    #[test]
    fn budget_guard() {
        let g = GramMatrix::diag(1, 1, 1).unwrap();
        assert!(matches!(count_representations(&g, 1_000_000, 100), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn semi_oracle_three_squares() {
        let e = Engine::default();
        let g = GramMatrix::diag(1, 1, 1).unwrap();
        for n in 1..=60 {
            assert_eq!(semi_oracle(&e, &g, n).unwrap(), ri(count_representations(&g, n, 1 << 20).unwrap() as i64), "n={n}");
        }
    }

    #[test]
    fn empty_corpus_passes() {
        let e = Engine::default();
        let r = verify_all(&e, &[], 10);
        assert!(r.all_pass && r.checks.is_empty());
    }
}
