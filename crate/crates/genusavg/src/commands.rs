use genusavg_core::arith::{to_decimal, Place};
use genusavg_core::classnum::h_primitive;
use genusavg_core::genusformula::evaluate_genus_avg;
use genusavg_core::lattice::{hasse_star, hasse_symbol, jordan_decompose, BlockUnit, GramMatrix};
use genusavg_core::localdensity::{alpha, alpha_count};
use genusavg_core::oracle::{default_corpus, verify_class_numbers, verify_lattice, Check};
use genusavg_core::watson::{reduce_to_stable, small_lambda, ReductionStep};
use genusavg_core::{count_representations, semi_oracle, synthesize_formula, Config, Engine, Rat, VerificationReport};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::Command;
use crate::input::{self, LatticeInput};
use crate::json::{rat, JordanJson, PiecewiseJson, ReportJson, StepJson};
use crate::CliError;

/// Result of a subcommand in both renderings.
pub struct Output {
    pub text: String,
    pub json: Value,
    /// `false` makes the process exit with status 1.
    pub success: bool,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { text, json, success: true }
    }
}

const APPROX_DIGITS: u32 = 12;

fn show_gram(g: &GramMatrix) -> String {
    let rows: Vec<String> = g.entries().iter().map(|r| format!("[{},{},{}]", r[0], r[1], r[2])).collect();
    format!("[{}]", rows.join(","))
}

fn parse_rat(s: &str) -> Result<Rat, CliError> {
    s.trim().parse::<Rat>().map_err(|_| CliError::Usage(format!("not a rational number: {s:?}")))
}

pub fn run(cmd: &Command, config: Config) -> Result<Output, CliError> {
    let engine = Engine::new(config.clone());
    match cmd {
        Command::Hurwitz { n, approx } => {
            let x = parse_rat(n)?;
            if x < Rat::from_integer(0.into()) {
                return Err(CliError::Usage("H(N) needs N >= 0".into()));
            }
            let v = engine.hurwitz(&x);
            let mut text = rat(&v);
            let mut out = json!({ "n": rat(&x), "value": rat(&v) });
            if *approx {
                let a = to_decimal(&v, APPROX_DIGITS);
                text.push_str(&format!("\napprox {a} (non-authoritative)"));
                out["approx"] = json!(a);
            }
            Ok(Output::ok(text, out))
        }
        Command::Classnum { d } => {
            let h = h_primitive(*d)?;
            Ok(Output::ok(h.to_string(), json!({ "d": d, "h": h })))
        }
        Command::Jordan { lattice, p } => {
            let g = input::lattice(lattice)?;
            let j = jordan_decompose(&g, *p)?;
            let lines: Vec<String> = j
                .blocks
                .iter()
                .map(|b| match &b.unit {
                    BlockUnit::One(u) => format!("{p}^{} <{u}>", b.exp),
                    BlockUnit::Two { a, b: off, c, kind } => {
                        format!("{p}^{} [[{a},{off}],[{off},{c}]] ({kind:?})", b.exp)
                    }
                })
                .collect();
            Ok(Output::ok(lines.join("\n"), serde_json::to_value(JordanJson::from(&j)).expect("serializable")))
        }
        Command::Hasse { lattice, p } => {
            let g = input::lattice(lattice)?;
            if !genusavg_core::arith::is_prime(*p) {
                return Err(CliError::Usage(format!("{p} is not prime")));
            }
            let s = hasse_symbol(&g, Place::Prime(*p));
            let t = hasse_star(&g, *p);
            Ok(Output::ok(
                format!("S_{p} = {s}\nS_{p}* = {t}"),
                json!({ "p": p, "s_p": s, "s_p_star": t, "isotropic": t == 1 }),
            ))
        }
        Command::LocalDensity { lattice, p, n, oracle } => {
            let g = input::lattice(lattice)?;
            let cap = engine.config.oracle_depth_cap;
            let (value, source) = if *oracle {
                (alpha_count(&g, *p, *n, cap)?, "counting_oracle")
            } else {
                let prof = engine.profile(&g)?;
                let a = alpha(&prof, *p, *n, cap)?;
                (a.value, a.source.as_str())
            };
            Ok(Output::ok(
                format!("{} ({source})", rat(&value)),
                json!({ "p": p, "n": n, "value": rat(&value), "source": source }),
            ))
        }
        Command::Watson { lattice, m, to_stable } => {
            let g = input::lattice(lattice)?;
            let steps: Vec<ReductionStep> = if *to_stable {
                reduce_to_stable(&g)?
            } else {
                let m = m.expect("clap requires -m without --to-stable");
                let img = small_lambda(&g, m)?;
                vec![ReductionStep { m, before: g, after: img.gram, scale: img.scale }]
            };
            let mut lines: Vec<String> = steps
                .iter()
                .map(|s| format!("m={}: {} -> {} (scale {})", s.m, show_gram(&s.before), show_gram(&s.after), s.scale))
                .collect();
            if steps.is_empty() {
                lines.push(format!("{} is already stable", show_gram(&g)));
            }
            let js: Vec<StepJson> = steps.iter().map(Into::into).collect();
            Ok(Output::ok(lines.join("\n"), serde_json::to_value(js).expect("serializable")))
        }
        Command::GenusAvg { lattice, n, provenance, semi_oracle: use_oracle, approx } => {
            let g = input::lattice(lattice)?;
            let (value, prov) = if *use_oracle {
                (semi_oracle(&engine, &g, *n)?, String::from("semi_oracle"))
            } else {
                let v = evaluate_genus_avg(&engine, &g, *n)?;
                (v.value, v.provenance.to_string())
            };
            let mut text = rat(&value);
            let mut out = json!({ "n": n, "value": rat(&value) });
            if *provenance {
                text.push_str(&format!(" ({prov})"));
                out["provenance"] = json!(prov);
            }
            if *approx {
                let a = to_decimal(&value, APPROX_DIGITS);
                text.push_str(&format!("\napprox {a} (non-authoritative)"));
                out["approx"] = json!(a);
            }
            Ok(Output::ok(text, out))
        }
        Command::Count { lattice, n } => {
            let g = input::lattice(lattice)?;
            let c = count_representations(&g, *n, engine.config.enum_budget)?;
            Ok(Output::ok(c.to_string(), json!({ "n": n, "count": c })))
        }
        Command::Formula { lattice, modulus_cap, samples } => {
            let g = input::lattice(lattice)?;
            let mut cfg = config.clone();
            if let Some(c) = modulus_cap {
                cfg.modulus_cap = *c;
            }
            if let Some(s) = samples {
                cfg.sample_budget = *s;
            }
            let pf = synthesize_formula(&Engine::new(cfg), &g)?;
            let mut lines = Vec::new();
            for p in &pf.pieces {
                let rs: Vec<String> = p.residues.iter().map(u64::to_string).collect();
                lines.push(format!("n = {} (mod {}): {}", rs.join(","), pf.modulus, p.formula));
            }
            if pf.pieces.len() > 1 {
                if let Some(c) = pf.combined() {
                    let common = genusavg_core::HFormula { prefactor: Rat::from_integer(1.into()), terms: c.terms.clone() };
                    lines.push(format!("combined: c(n) * ({common})"));
                    for (rs, k) in &c.constants {
                        let rs: Vec<String> = rs.iter().map(u64::to_string).collect();
                        lines.push(format!("  c(n) = {k} for n = {} (mod {})", rs.join(","), pf.modulus));
                    }
                }
            }
            Ok(Output::ok(lines.join("\n"), serde_json::to_value(PiecewiseJson::from(&pf)).expect("serializable")))
        }
        Command::Verify { corpus, nmax, jobs } => {
            let inputs: Vec<genusavg_core::Result<GramMatrix>> = match corpus {
                Some(path) => input::read_corpus(path)?.iter().map(LatticeInput::build).collect(),
                None => default_corpus().into_iter().map(Ok).collect(),
            };
            let report = verify_parallel(&inputs, *nmax, *jobs, &config)?;
            let mut lines: Vec<String> = report
                .checks
                .iter()
                .map(|c| {
                    let lat = c.lattice.as_ref().map(show_gram).unwrap_or_default();
                    let mut l = format!("{:5} {} {} n in {} ({} cases)", c.status.as_str(), c.name, lat, c.range, c.cases);
                    if let Some(w) = &c.witness {
                        l.push_str(&format!("; n={}: expected {}, got {}", w.n, w.expected, w.got));
                    }
                    if let Some(e) = &c.error {
                        l.push_str(&format!("; {e}"));
                    }
                    l
                })
                .collect();
            let failed = report.checks.iter().filter(|c| c.status.as_str() != "pass").count();
            lines.push(if report.all_pass {
                format!("all {} checks passed", report.checks.len())
            } else {
                format!("{failed} of {} checks failed", report.checks.len())
            });
            Ok(Output {
                text: lines.join("\n"),
                json: serde_json::to_value(ReportJson::from(&report)).expect("serializable"),
                success: report.all_pass,
            })
        }
    }
}

/// Fan the corpus out over a thread pool; each worker owns its engine.
fn verify_parallel(
    inputs: &[genusavg_core::Result<GramMatrix>],
    nmax: u64,
    jobs: usize,
    config: &Config,
) -> Result<VerificationReport, CliError> {
    if inputs.is_empty() {
        return Ok(VerificationReport::from_checks(Vec::new()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let checks: Vec<Check> = pool.install(|| {
        let per_lattice: Vec<Vec<Check>> = inputs
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let engine = Engine::new(config.clone());
                match s {
                    Ok(g) => verify_lattice(&engine, g, nmax),
                    Err(e) => vec![Check {
                        name: "input".into(),
                        lattice: None,
                        range: format!("corpus[{i}]"),
                        cases: 0,
                        status: genusavg_core::oracle::CheckStatus::Error,
                        witness: None,
                        error: Some(e.to_string()),
                    }],
                }
            })
            .collect();
        let mut all = verify_class_numbers(&Engine::new(config.clone()), nmax);
        all.extend(per_lattice.into_iter().flatten());
        all
    });
    Ok(VerificationReport::from_checks(checks))
}
