//! Serializable views of library values. Rationals are strings `"a/b"`.

use genusavg_core::genusformula::{CombinedFormula, Piece};
use genusavg_core::lattice::{BlockUnit, EvenType, JordanSplitting};
use genusavg_core::oracle::Check;
use genusavg_core::watson::ReductionStep;
use genusavg_core::{HFormula, PiecewiseFormula, Rat, VerificationReport};
use serde::Serialize;

pub fn rat(x: &Rat) -> String {
    x.to_string()
}

#[derive(Serialize)]
pub struct TermJson {
    pub coeff: String,
    pub scale: String,
}

#[derive(Serialize)]
pub struct FormulaJson {
    pub prefactor: String,
    pub terms: Vec<TermJson>,
}

impl From<&HFormula> for FormulaJson {
    fn from(f: &HFormula) -> Self {
        FormulaJson {
            prefactor: rat(&f.prefactor),
            terms: f.terms.iter().map(|t| TermJson { coeff: rat(&t.coeff), scale: rat(&t.scale) }).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct PieceJson {
    pub residues: Vec<u64>,
    pub guards: Vec<String>,
    pub formula: FormulaJson,
}

impl From<&Piece> for PieceJson {
    fn from(p: &Piece) -> Self {
        PieceJson { residues: p.residues.clone(), guards: p.guards.clone(), formula: (&p.formula).into() }
    }
}

#[derive(Serialize)]
pub struct ConstantJson {
    pub residues: Vec<u64>,
    pub constant: String,
}

#[derive(Serialize)]
pub struct CombinedJson {
    pub constants: Vec<ConstantJson>,
    pub terms: Vec<TermJson>,
}

impl From<&CombinedFormula> for CombinedJson {
    fn from(c: &CombinedFormula) -> Self {
        CombinedJson {
            constants: c
                .constants
                .iter()
                .map(|(r, k)| ConstantJson { residues: r.clone(), constant: rat(k) })
                .collect(),
            terms: c.terms.iter().map(|t| TermJson { coeff: rat(&t.coeff), scale: rat(&t.scale) }).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct PiecewiseJson {
    pub modulus: u64,
    pub pieces: Vec<PieceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedJson>,
}

impl From<&PiecewiseFormula> for PiecewiseJson {
    fn from(pf: &PiecewiseFormula) -> Self {
        PiecewiseJson {
            modulus: pf.modulus,
            pieces: pf.pieces.iter().map(Into::into).collect(),
            combined: pf.combined().as_ref().map(Into::into),
        }
    }
}

#[derive(Serialize)]
pub struct BlockJson {
    pub exp: u32,
    pub rank: usize,
    /// `[u]` for rank 1, `[[a, b], [b, c]]` entries flattened as `[a, b, c]` for rank 2.
    pub unit: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<&'static str>,
}

#[derive(Serialize)]
pub struct JordanJson {
    pub p: u64,
    pub blocks: Vec<BlockJson>,
}

impl From<&JordanSplitting> for JordanJson {
    fn from(j: &JordanSplitting) -> Self {
        let blocks = j
            .blocks
            .iter()
            .map(|b| match &b.unit {
                BlockUnit::One(u) => BlockJson { exp: b.exp, rank: 1, unit: vec![rat(u)], kind: None },
                BlockUnit::Two { a, b: off, c, kind } => BlockJson {
                    exp: b.exp,
                    rank: 2,
                    unit: vec![rat(a), rat(off), rat(c)],
                    kind: Some(match kind {
                        EvenType::A => "A",
                        EvenType::H => "H",
                    }),
                },
            })
            .collect();
        JordanJson { p: j.p, blocks }
    }
}

#[derive(Serialize)]
pub struct StepJson {
    pub m: u64,
    pub gram_before: [[i64; 3]; 3],
    pub gram_after: [[i64; 3]; 3],
    pub scale: i64,
}

impl From<&ReductionStep> for StepJson {
    fn from(s: &ReductionStep) -> Self {
        StepJson { m: s.m, gram_before: *s.before.entries(), gram_after: *s.after.entries(), scale: s.scale }
    }
}

#[derive(Serialize)]
pub struct WitnessJson {
    pub n: u64,
    pub expected: String,
    pub got: String,
}

#[derive(Serialize)]
pub struct CheckJson {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<[[i64; 3]; 3]>,
    pub range: String,
    pub cases: u64,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        CheckJson {
            name: c.name.clone(),
            lattice: c.lattice.map(|g| *g.entries()),
            range: c.range.clone(),
            cases: c.cases,
            status: c.status.as_str(),
            witness: c.witness.as_ref().map(|w| WitnessJson { n: w.n, expected: w.expected.clone(), got: w.got.clone() }),
            error: c.error.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct ReportJson {
    pub all_pass: bool,
    pub checks: Vec<CheckJson>,
}

impl From<&VerificationReport> for ReportJson {
    fn from(r: &VerificationReport) -> Self {
        ReportJson { all_pass: r.all_pass, checks: r.checks.iter().map(Into::into).collect() }
    }
}

#[derive(Serialize)]
pub struct ErrorJson {
    pub error: &'static str,
    pub message: String,
}
