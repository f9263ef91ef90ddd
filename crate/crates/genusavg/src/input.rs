use std::fs;

use genusavg_core::GramMatrix;
use serde::Deserialize;

use crate::cli::LatticeArgs;
use crate::CliError;

/// Lattice as it appears in JSON files.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged, deny_unknown_fields)]
pub enum LatticeInput {
    Gram { gram: [[i64; 3]; 3] },
    Diag { diag: [i64; 3] },
}

impl LatticeInput {
    pub fn build(&self) -> genusavg_core::Result<GramMatrix> {
        match self {
            LatticeInput::Gram { gram } => GramMatrix::new(*gram),
            LatticeInput::Diag { diag } => GramMatrix::diag(diag[0], diag[1], diag[2]),
        }
    }
}

fn ints(s: &str, sep: char, what: &str) -> Result<Vec<i64>, CliError> {
    s.split(sep)
        .map(|t| t.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("bad integer {t:?} in {what}"))))
        .collect()
}

pub fn parse_diag(s: &str) -> Result<[i64; 3], CliError> {
    let v = ints(s, ',', "--diag")?;
    v.try_into().map_err(|_| CliError::Usage("--diag needs exactly three entries".into()))
}

pub fn parse_gram(s: &str) -> Result<[[i64; 3]; 3], CliError> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != 3 {
        return Err(CliError::Usage("--gram needs three rows separated by ';'".into()));
    }
    let mut m = [[0i64; 3]; 3];
    for (i, r) in rows.iter().enumerate() {
        let v = ints(r, ',', "--gram")?;
        m[i] = v.try_into().map_err(|_| CliError::Usage("each --gram row needs three entries".into()))?;
    }
    Ok(m)
}

pub fn read_lattice_file(path: &std::path::Path) -> Result<LatticeInput, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn read_corpus(path: &std::path::Path) -> Result<Vec<LatticeInput>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn lattice(args: &LatticeArgs) -> Result<GramMatrix, CliError> {
    let input = if let Some(d) = &args.diag {
        LatticeInput::Diag { diag: parse_diag(d)? }
    } else if let Some(g) = &args.gram {
        LatticeInput::Gram { gram: parse_gram(g)? }
    } else if let Some(f) = &args.file {
        read_lattice_file(f)?
    } else {
        return Err(CliError::Usage("a lattice is required".into()));
    };
    Ok(input.build()?)
}
