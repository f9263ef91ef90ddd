//! Genus averages `r(n, gen L)` as linear combinations of Hurwitz class numbers.
//!
//! Stable lattices have a closed formula. For unstable lattices, `n` that is a
//! unit times `n(L)` at every unstable prime uses the coprime formula; any
//! other `n` is pushed through a Watson step (or the `K`-splitting identity)
//! to a lattice with smaller `k_L`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, divisors, ord, rat, ri, Rat};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::lattice::{canonical_form, jordan_decompose, BlockUnit, EvenType, GramMatrix, LatticeProfile};
use crate::localdensity;
use crate::watson::{construct_k, small_lambda, PrimeOrder};

/// `coeff · H(scale · n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HTerm {
    pub coeff: Rat,
    pub scale: Rat,
}

/// `prefactor · Σ coeff_i · H(scale_i · n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HFormula {
    pub prefactor: Rat,
    pub terms: Vec<HTerm>,
}

impl HFormula {
    pub fn zero() -> Self {
        HFormula { prefactor: Rat::zero(), terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.prefactor.is_zero() || self.terms.iter().all(|t| t.coeff.is_zero())
    }

    /// Build from raw terms and normalize.
    pub fn from_terms(terms: Vec<HTerm>) -> Self {
        HFormula { prefactor: Rat::one(), terms }.normalized()
    }

    /// Terms with the prefactor multiplied in.
    pub fn expanded(&self) -> Vec<HTerm> {
        self.terms
            .iter()
            .map(|t| HTerm { coeff: &t.coeff * &self.prefactor, scale: t.scale.clone() })
            .collect()
    }

    /// Merge equal scales, sort by decreasing scale, and pull out a prefactor
    /// so that coefficients are coprime integers with a positive leading one.
    pub fn normalized(&self) -> Self {
        let mut merged: BTreeMap<Rat, Rat> = BTreeMap::new();
        for t in self.expanded() {
            *merged.entry(t.scale).or_insert_with(Rat::zero) += t.coeff;
        }
        let mut terms: Vec<HTerm> = merged
            .into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(scale, coeff)| HTerm { coeff, scale })
            .collect();
        if terms.is_empty() {
            return HFormula::zero();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for t in &terms {
            num_gcd = num_gcd.gcd(t.coeff.numer());
            den_lcm = den_lcm.lcm(t.coeff.denom());
        }
        let mut g = Rat::new(num_gcd, den_lcm);
        if terms[0].coeff.is_negative() {
            g = -g;
        }
        for t in terms.iter_mut() {
            t.coeff = &t.coeff / &g;
        }
        HFormula { prefactor: g, terms }
    }

    /// The formula in the variable `c·n`.
    pub fn at_multiple(&self, c: &Rat) -> Self {
        HFormula {
            prefactor: self.prefactor.clone(),
            terms: self.terms.iter().map(|t| HTerm { coeff: t.coeff.clone(), scale: &t.scale * c }).collect(),
        }
    }

    /// `wa·a + wb·b`, normalized.
    pub fn combine(a: &HFormula, wa: &Rat, b: &HFormula, wb: &Rat) -> Self {
        let mut terms = Vec::new();
        for t in a.expanded() {
            terms.push(HTerm { coeff: t.coeff * wa, scale: t.scale });
        }
        for t in b.expanded() {
            terms.push(HTerm { coeff: t.coeff * wb, scale: t.scale });
        }
        HFormula::from_terms(terms)
    }

    /// Evaluate with a caller-supplied Hurwitz function.
    pub fn eval_with(&self, n: u64, h: &mut dyn FnMut(&Rat) -> Rat) -> Rat {
        let nr = ri(n as i64);
        let mut s = Rat::zero();
        for t in &self.terms {
            s += &t.coeff * h(&(&t.scale * &nr));
        }
        s * &self.prefactor
    }

    pub fn eval(&self, engine: &Engine, n: u64) -> Rat {
        self.eval_with(n, &mut |x| engine.hurwitz(x))
    }
}

fn fmt_scale(s: &Rat) -> String {
    let num = s.numer();
    let den = s.denom();
    let head = if num.is_one() { String::from("n") } else { format!("{num}n") };
    if den.is_one() {
        head
    } else {
        format!("{head}/{den}")
    }
}

impl fmt::Display for HFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        if !self.prefactor.is_one() {
            write!(f, "{} * (", self.prefactor)?;
        }
        for (i, t) in self.terms.iter().enumerate() {
            let c = &t.coeff;
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if !mag.is_one() {
                write!(f, "{mag}")?;
            }
            write!(f, "H({})", fmt_scale(&t.scale))?;
        }
        if !self.prefactor.is_one() {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// How a genus average was obtained at the top level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// `n` is not in the norm ideal of `L`.
    OutsideNorm,
    Stable,
    Coprime,
    /// `r(n, L) = r(n/g, λ_m(L))`.
    Watson { m: u64 },
    /// `r(n, L) = 2 r(n/p, K) - r(n/g, λ(L))`.
    Split { p: u64 },
    SemiOracle,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::OutsideNorm => f.write_str("outside_norm"),
            Provenance::Stable => f.write_str("stable_formula"),
            Provenance::Coprime => f.write_str("coprime_formula"),
            Provenance::Watson { m } => write!(f, "watson_rescale(m={m})"),
            Provenance::Split { p } => write!(f, "watson_split(p={p})"),
            Provenance::SemiOracle => f.write_str("semi_oracle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusValue {
    pub value: Rat,
    pub provenance: Provenance,
    /// `true` if any nested step fell back to the semi-oracle.
    pub used_fallback: bool,
}

/// Reduction used for `n` divisible by an extra factor of an unstable prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    Rescale { m: u64, target: GramMatrix, scale: i64 },
    Split { p: u64, k: GramMatrix, lambda: GramMatrix, scale: i64 },
}

/// Choose the reduction at an unstable prime `p` of the primitive lattice `gram`.
pub fn plan_at(engine: &Engine, gram: &GramMatrix, p: u64) -> Result<Plan> {
    if let Some(pl) = engine.plans.borrow().get(&(*gram, p)) {
        return Ok(pl.clone());
    }
    let plan = if p == 2 {
        if !gram.is_even() {
            let img = small_lambda(gram, 2)?;
            Plan::Rescale { m: 2, target: img.gram, scale: img.scale }
        } else {
            let j = jordan_decompose(gram, 2)?;
            let kind = j.blocks.iter().find_map(|b| match b.unit {
                BlockUnit::Two { kind, .. } if b.exp == 0 => Some(kind),
                _ => None,
            });
            let img = small_lambda(gram, 4)?;
            match kind {
                Some(EvenType::A) => Plan::Rescale { m: 4, target: img.gram, scale: img.scale },
                Some(EvenType::H) => {
                    Plan::Split { p: 2, k: construct_k(gram, 2)?, lambda: img.gram, scale: img.scale }
                }
                None => return Err(Error::HypothesisViolated("even lattice without an even unimodular plane".into())),
            }
        }
    } else {
        let j = jordan_decompose(gram, p)?;
        let m = j.unimodular().ok_or(Error::NotPrimitive)?;
        let img = small_lambda(gram, p)?;
        let isotropic_plane = m.rank == 2 && arith::kronecker_rat(&(-m.unit_det.clone()), p) == 1;
        if isotropic_plane {
            Plan::Split { p, k: construct_k(gram, p)?, lambda: img.gram, scale: img.scale }
        } else if m.rank <= 2 {
            Plan::Rescale { m: p, target: img.gram, scale: img.scale }
        } else {
            return Err(Error::HypothesisViolated(format!("lattice is stable at {p}")));
        }
    };
    let mut tab = engine.plans.borrow_mut();
    if tab.len() >= engine.config.memo_cap {
        tab.clear();
    }
    tab.insert((*gram, p), plan.clone());
    Ok(plan)
}

/// `n ∈ N·Z_p^×` where `N` generates `n(L)`.
fn in_unit_class(prof: &LatticeProfile, p: u64, n: u64) -> bool {
    if p == 2 {
        ord(n as i128, 2) == ord(prof.norm_gen as i128, 2)
    } else {
        n % p != 0
    }
}

/// First unstable prime (in `order`) at which `n` is not a unit multiple of `n(L)`.
pub fn select_branch(prof: &LatticeProfile, n: u64, order: PrimeOrder) -> Option<u64> {
    let mut ps = prof.unstable_set.clone();
    match order {
        PrimeOrder::Descending => ps.reverse(),
        PrimeOrder::TwoFirst | PrimeOrder::Ascending => {}
    }
    ps.into_iter().find(|&p| !in_unit_class(prof, p, n))
}

/// Closed formula for a stable lattice.
pub fn stable_formula(prof: &LatticeProfile) -> Result<HFormula> {
    if !prof.is_stable() {
        return Err(Error::NotStable);
    }
    let e = if prof.is_even { 1 } else { 4 };
    let ps: Vec<u64> = arith::factor(prof.frak_p as i64)?.primes().collect();
    let mut pre = ri(12);
    for &p in &ps {
        pre /= ri(p as i64 + prof.s_star(p) as i64);
    }
    let mut terms = Vec::new();
    for f in divisors(prof.frak_p) {
        let sign: i64 = ps.iter().filter(|&&p| f % p == 0).map(|&p| prof.s_star(p) as i64).product();
        terms.push(HTerm { coeff: ri(sign * f as i64), scale: rat(e * prof.det, (f * f) as i64) });
    }
    Ok(HFormula { prefactor: pre, terms })
}

/// `(ε, e)` of the coprime formula.
fn epsilon_e(prof: &LatticeProfile, n: u64) -> (Rat, Rat) {
    let s = prof.s;
    let two_stable = prof.stable_set.contains(&2);
    if two_stable {
        if ord(prof.det as i128, 2) == 0 {
            (ri(12), ri(4))
        } else {
            (ri(48), ri(1))
        }
    } else {
        let n = n as i64;
        let g = s.gcd(&n);
        let g2 = g.gcd(&2);
        if ((s / g) * (n / g)).rem_euclid(4) == 3 {
            (ri(24 * g2), rat(1, g2 * g2))
        } else {
            (ri(12 * g2), rat(4, g2 * g2))
        }
    }
}

/// The coprime formula at `n` as an `H`-combination; its prefactor depends on `n`.
pub fn coprime_hformula(engine: &Engine, prof: &LatticeProfile, n: u64) -> Result<HFormula> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    for &p in &prof.unstable_set {
        if !in_unit_class(prof, p, n) {
            return Err(Error::CoprimalityViolated { p, n });
        }
    }
    let (eps, e) = epsilon_e(prof, n);
    let ps: Vec<u64> = arith::factor(prof.frak_p as i64)?.primes().collect();
    let mut pre = eps / ri(prof.s * prof.t);
    for &p in &ps {
        pre *= rat(p as i64, p as i64 + prof.s_star(p) as i64);
    }
    for &p in &prof.unstable_set {
        pre *= localdensity::c_factor(prof, p, n, engine.config.oracle_depth_cap)?.value;
    }
    let mut terms = Vec::new();
    for f in divisors(prof.frak_p) {
        let sign: i64 = ps.iter().filter(|&&p| f % p == 0).map(|&p| prof.s_star(p) as i64).product();
        terms.push(HTerm { coeff: ri(sign * f as i64), scale: &e * rat(prof.s, (f * f) as i64) });
    }
    Ok(HFormula { prefactor: pre, terms })
}

/// Value of the coprime formula.
pub fn coprime_formula(engine: &Engine, prof: &LatticeProfile, n: u64) -> Result<Rat> {
    Ok(coprime_hformula(engine, prof, n)?.eval(engine, n))
}

/// `r(n, gen L)`.
pub fn evaluate_genus_avg(engine: &Engine, gram: &GramMatrix, n: u64) -> Result<GenusValue> {
    evaluate_genus_avg_with(engine, gram, n, PrimeOrder::Ascending)
}

/// `r(n, gen L)` treating unstable primes in the given order.
pub fn evaluate_genus_avg_with(engine: &Engine, gram: &GramMatrix, n: u64, order: PrimeOrder) -> Result<GenusValue> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let (prim, c) = gram.primitive_part();
    if n % c as u64 != 0 {
        return Ok(GenusValue { value: Rat::zero(), provenance: Provenance::OutsideNorm, used_fallback: false });
    }
    let before = engine.fallbacks.get();
    let g = canonical_form(&prim);
    let (value, provenance) = eval_step(engine, &g, n / c as u64, order, 0)?;
    Ok(GenusValue { value, provenance, used_fallback: engine.fallbacks.get() != before })
}

fn eval_rec(engine: &Engine, gram: &GramMatrix, n: u64, order: PrimeOrder, depth: u32) -> Result<Rat> {
    Ok(eval_step(engine, gram, n, order, depth)?.0)
}

fn eval_step(engine: &Engine, gram: &GramMatrix, n: u64, order: PrimeOrder, depth: u32) -> Result<(Rat, Provenance)> {
    if depth > 64 {
        return Err(Error::RecursionDepthExceeded);
    }
    let prof = engine.profile(gram)?;
    if prof.is_even && n % 2 == 1 {
        return Ok((Rat::zero(), Provenance::OutsideNorm));
    }
    if prof.is_stable() {
        return Ok((stable_formula(&prof)?.eval(engine, n), Provenance::Stable));
    }
    let Some(p) = select_branch(&prof, n, order) else {
        return Ok((coprime_formula(engine, &prof, n)?, Provenance::Coprime));
    };
    let plan = match plan_at(engine, gram, p) {
        Ok(pl) => pl,
        Err(Error::HypothesisViolated(_)) => {
            engine.fallbacks.set(engine.fallbacks.get() + 1);
            return Ok((crate::oracle::semi_oracle(engine, gram, n)?, Provenance::SemiOracle));
        }
        Err(e) => return Err(e),
    };
    match plan {
        Plan::Rescale { m, target, scale } => {
            let v = if n % scale as u64 == 0 {
                eval_rec(engine, &target, n / scale as u64, order, depth + 1)?
            } else {
                Rat::zero()
            };
            Ok((v, Provenance::Watson { m }))
        }
        Plan::Split { p, k, lambda, scale } => {
            let mut v = ri(2) * eval_rec(engine, &k, n / p, order, depth + 1)?;
            if n % scale as u64 == 0 {
                v -= eval_rec(engine, &lambda, n / scale as u64, order, depth + 1)?;
            }
            Ok((v, Provenance::Split { p }))
        }
    }
}

/// `r(n q², gen L) / r(n, gen L)` for a prime `q ∤ 2 d_L` and locally represented `n`.
pub fn strip_square_prime(engine: &Engine, gram: &GramMatrix, n: u64, q: u64) -> Result<Rat> {
    let prof = engine.profile(gram)?;
    if !arith::is_prime(q) || prof.bad_primes.contains(&q) {
        return Err(Error::InvalidArgument(format!("q = {q} must be a prime not dividing 2 d_L")));
    }
    if !localdensity::locally_represented(&prof, n, engine.config.oracle_depth_cap)? {
        return Err(Error::HypothesisViolated(format!("{n} is not locally represented")));
    }
    let base = 4 * prof.det as u64 * n;
    let num = engine.hurwitz(&ri((base * q * q) as i64));
    let den = engine.hurwitz(&ri(base as i64));
    Ok(num / den)
}

/// One piece of a piecewise formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    /// Residues of `n` modulo the formula's modulus.
    pub residues: Vec<u64>,
    /// Divisibility conditions shared by all residues of the piece.
    pub guards: Vec<String>,
    pub formula: HFormula,
}

/// `r(n, gen L)` as an `H`-combination that depends on `n mod modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseFormula {
    pub modulus: u64,
    pub pieces: Vec<Piece>,
}

impl PiecewiseFormula {
    pub fn piece_for(&self, n: u64) -> &Piece {
        let r = n % self.modulus;
        self.pieces.iter().find(|p| p.residues.contains(&r)).expect("pieces cover all residues")
    }

    pub fn eval(&self, engine: &Engine, n: u64) -> Rat {
        self.piece_for(n).formula.eval(engine, n)
    }

    /// Write all nonzero pieces with one common list of terms, if possible.
    pub fn combined(&self) -> Option<CombinedFormula> {
        let m = self.modulus;
        let mut union: BTreeMap<Rat, Rat> = BTreeMap::new();
        for p in &self.pieces {
            for t in &p.formula.terms {
                match union.get(&t.scale) {
                    Some(c) if c != &t.coeff => return None,
                    _ => {
                        union.insert(t.scale.clone(), t.coeff.clone());
                    }
                }
            }
        }
        let mut constants = Vec::new();
        for p in &self.pieces {
            if p.formula.is_zero() {
                constants.push((p.residues.clone(), Rat::zero()));
                continue;
            }
            for (scale, _) in union.iter() {
                if p.formula.terms.iter().any(|t| &t.scale == scale) {
                    continue;
                }
                let b = scale.denom().clone();
                let g = b.gcd(&BigInt::from(m));
                if !p.residues.iter().all(|&r| !(BigInt::from(r) % &g).is_zero()) {
                    return None;
                }
            }
            constants.push((p.residues.clone(), p.formula.prefactor.clone()));
        }
        let terms = union.into_iter().rev().map(|(scale, coeff)| HTerm { coeff, scale }).collect();
        Some(CombinedFormula { modulus: m, constants, terms })
    }
}

/// `c_L(n mod modulus) · Σ coeff_i H(scale_i n)` with one common term list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinedFormula {
    pub modulus: u64,
    pub constants: Vec<(Vec<u64>, Rat)>,
    pub terms: Vec<HTerm>,
}

impl CombinedFormula {
    pub fn distinct_constants(&self) -> Vec<Rat> {
        let mut v: Vec<Rat> = self.constants.iter().map(|(_, c)| c.clone()).filter(|c| !c.is_zero()).collect();
        v.sort();
        v.dedup();
        v
    }
}

struct Synth<'a> {
    engine: &'a Engine,
    required: BTreeMap<GramMatrix, u64>,
    memo: BTreeMap<(GramMatrix, u64), HFormula>,
}

impl<'a> Synth<'a> {
    fn required_modulus(&mut self, gram: &GramMatrix, depth: u32) -> Result<u64> {
        if depth > 64 {
            return Err(Error::RecursionDepthExceeded);
        }
        if let Some(&m) = self.required.get(gram) {
            return Ok(m);
        }
        let prof = self.engine.profile(gram)?;
        let mut m: u64 = 1;
        if !prof.is_stable() {
            m = 64u64.lcm(&(4 * prof.s as u64));
            for &p in &prof.unstable_set {
                m = m.lcm(&p);
                match plan_at(self.engine, gram, p)? {
                    Plan::Rescale { target, scale, .. } => {
                        m = m.lcm(&(scale as u64 * self.required_modulus(&target, depth + 1)?));
                    }
                    Plan::Split { p, k, lambda, scale } => {
                        m = m.lcm(&(p * self.required_modulus(&k, depth + 1)?));
                        m = m.lcm(&(scale as u64 * self.required_modulus(&lambda, depth + 1)?));
                    }
                }
            }
        }
        self.required.insert(*gram, m);
        Ok(m)
    }

    /// Formula valid for every `n ≡ r` modulo a multiple of the required modulus.
    fn class_formula(&mut self, gram: &GramMatrix, r: u64, depth: u32) -> Result<HFormula> {
        let req = self.required_modulus(gram, depth)?;
        let r = r % req;
        if let Some(f) = self.memo.get(&(*gram, r)) {
            return Ok(f.clone());
        }
        let prof = self.engine.profile(gram)?;
        let n_rep = if r == 0 { req } else { r };
        let f = if prof.is_even && n_rep % 2 == 1 {
            HFormula::zero()
        } else if prof.is_stable() {
            stable_formula(&prof)?.normalized()
        } else {
            match select_branch(&prof, n_rep, PrimeOrder::Ascending) {
                None => coprime_hformula(self.engine, &prof, n_rep)?.normalized(),
                Some(p) => match plan_at(self.engine, gram, p)? {
                    Plan::Rescale { target, scale, .. } => {
                        let g = scale as u64;
                        if r % g != 0 {
                            HFormula::zero()
                        } else {
                            self.class_formula(&target, r / g, depth + 1)?.at_multiple(&rat(1, g as i64)).normalized()
                        }
                    }
                    Plan::Split { p, k, lambda, scale } => {
                        let kf = self.class_formula(&k, r / p, depth + 1)?.at_multiple(&rat(1, p as i64));
                        let g = scale as u64;
                        let lf = if r % g == 0 {
                            self.class_formula(&lambda, r / g, depth + 1)?.at_multiple(&rat(1, g as i64))
                        } else {
                            HFormula::zero()
                        };
                        HFormula::combine(&kf, &ri(2), &lf, &ri(-1))
                    }
                },
            }
        };
        let f = prune_on_class(&f, r, req);
        self.memo.insert((*gram, r), f.clone());
        Ok(f)
    }
}

/// `H(a n / b)` vanishes for every `n ≡ r (mod m)`.
fn vanishes_on_class(scale: &Rat, r: u64, m: u64) -> bool {
    let g = scale.denom().gcd(&BigInt::from(m));
    !(BigInt::from(r) % g).is_zero()
}

/// Drop terms that vanish for every `n ≡ r (mod m)`.
fn prune_on_class(f: &HFormula, r: u64, m: u64) -> HFormula {
    HFormula::from_terms(f.expanded().into_iter().filter(|t| !vanishes_on_class(&t.scale, r, m)).collect())
}

/// One formula valid on every given class, if the formulas agree up to
/// terms that vanish on their own class.
fn merge_on_classes(classes: &[(u64, &HFormula)], m: u64) -> Option<HFormula> {
    let expanded: Vec<(u64, BTreeMap<Rat, Rat>)> = classes
        .iter()
        .map(|(r, f)| (*r, f.expanded().into_iter().map(|t| (t.scale, t.coeff)).collect()))
        .collect();
    let mut union: BTreeMap<Rat, Rat> = BTreeMap::new();
    for (_, terms) in &expanded {
        for (s, c) in terms {
            match union.get(s) {
                Some(prev) if prev != c => return None,
                _ => {
                    union.insert(s.clone(), c.clone());
                }
            }
        }
    }
    for (r, terms) in &expanded {
        if union.keys().any(|s| !terms.contains_key(s) && !vanishes_on_class(s, *r, m)) {
            return None;
        }
    }
    Some(HFormula::from_terms(union.into_iter().map(|(scale, coeff)| HTerm { coeff, scale }).collect()))
}

/// Coarsen the table one prime factor at a time while the classes merge.
fn coarsen(mut table: Vec<HFormula>, mut m: u64) -> (Vec<HFormula>, u64) {
    let primes: Vec<u64> = if m > 1 { arith::factor(m as i64).expect("nonzero").primes().collect() } else { Vec::new() };
    for q in primes {
        'shrink: while m % q == 0 {
            let cand = m / q;
            let mut next = Vec::with_capacity(cand as usize);
            for r in 0..cand {
                let subs: Vec<(u64, &HFormula)> = (0..q).map(|j| r + j * cand).map(|s| (s, &table[s as usize])).collect();
                match merge_on_classes(&subs, m) {
                    Some(f) => next.push(f),
                    None => break 'shrink,
                }
            }
            table = next;
            m = cand;
        }
    }
    (table, m)
}

fn guards_for(prof: &LatticeProfile, residues: &[u64], m: u64) -> Vec<String> {
    let mut out = Vec::new();
    for &p in &prof.unstable_set {
        if m % p != 0 {
            continue;
        }
        if residues.iter().all(|&r| r % p == 0) {
            out.push(format!("{p}|n"));
        } else if residues.iter().all(|&r| r % p != 0) {
            out.push(format!("{p}∤n"));
        }
    }
    out
}

/// Piecewise `H`-formula for `r(n, gen L)`, checked against direct evaluation.
pub fn synthesize_formula(engine: &Engine, gram: &GramMatrix) -> Result<PiecewiseFormula> {
    let (prim, _) = gram.primitive_part();
    let g = canonical_form(&prim);
    let mut synth = Synth { engine, required: BTreeMap::new(), memo: BTreeMap::new() };
    let mut modulus = synth.required_modulus(&g, 0)?;
    let prof = engine.profile(&g)?;
    loop {
        if modulus > engine.config.modulus_cap {
            return Err(Error::BudgetExceeded { needed: modulus as u128, budget: engine.config.modulus_cap as u128 });
        }
        let mut table = Vec::with_capacity(modulus as usize);
        for r in 0..modulus {
            table.push(synth.class_formula(&g, r, 0)?);
        }
        let (table, m) = coarsen(table, modulus);
        let mut pieces: Vec<Piece> = Vec::new();
        for r in 0..m {
            let f = &table[r as usize];
            match pieces.iter_mut().find(|p| &p.formula == f) {
                Some(p) => p.residues.push(r),
                None => pieces.push(Piece { residues: alloc::vec![r], guards: Vec::new(), formula: f.clone() }),
            }
        }
        for p in pieces.iter_mut() {
            p.guards = guards_for(&prof, &p.residues, m);
        }
        let pf = PiecewiseFormula { modulus: m, pieces };
        match verify_pieces(engine, gram, &pf) {
            Ok(()) => return Ok(pf),
            Err(e @ Error::VerificationFailed { .. }) => {
                let bump: u64 = 2 * prof.unstable_set.iter().filter(|&&p| p != 2).product::<u64>();
                if modulus.saturating_mul(bump) > engine.config.modulus_cap {
                    return Err(e);
                }
                modulus *= bump;
                synth.memo.clear();
                let scale = modulus;
                synth.required.insert(g, scale);
            }
            Err(e) => return Err(e),
        }
    }
}

fn verify_pieces(engine: &Engine, gram: &GramMatrix, pf: &PiecewiseFormula) -> Result<()> {
    let budget = engine.config.sample_budget.max(1);
    for piece in &pf.pieces {
        for i in 0..budget {
            let r = piece.residues[i % piece.residues.len()];
            let k = (i / piece.residues.len()) as u64;
            let n = r + (k + u64::from(r == 0)) * pf.modulus;
            let expected = evaluate_genus_avg(engine, gram, n)?.value;
            let got = piece.formula.eval(engine, n);
            if expected != got {
                return Err(Error::VerificationFailed { n, expected: format!("{expected}"), got: format!("{got}") });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::profile;

    #[test]
    fn gauss_formula() {
        let prof = profile(&GramMatrix::diag(1, 1, 1).unwrap()).unwrap();
        let f = stable_formula(&prof).unwrap();
        assert_eq!(f.normalized(), HFormula::from_terms(alloc::vec![
            HTerm { coeff: ri(12), scale: ri(4) },
            HTerm { coeff: ri(-24), scale: ri(1) },
        ]));
    }

    #[test]
    fn even_stable_formula() {
        let g = GramMatrix::new([[2, 1, 0], [1, 2, 0], [0, 0, 2]]).unwrap();
        let e = Engine::default();
        for n in 1..60 {
            let v = evaluate_genus_avg(&e, &g, n).unwrap().value;
            if n % 2 == 1 {
                assert!(v.is_zero());
            }
        }
    }

    #[test]
    fn normalization_extracts_prefactor() {
        let f = HFormula::from_terms(alloc::vec![
            HTerm { coeff: rat(-4, 3), scale: ri(1) },
            HTerm { coeff: rat(2, 3), scale: ri(12) },
        ]);
        assert_eq!(f.prefactor, rat(2, 3));
        assert_eq!(f.terms[0].coeff, ri(1));
        assert_eq!(f.terms[1].coeff, ri(-2));
        assert_eq!(alloc::format!("{f}"), "2/3 * (H(12n) - 2H(n))");
    }
}
