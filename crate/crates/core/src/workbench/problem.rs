use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crossed::{CrossedError, CrossedModule, Level};
use crate::gamma::{GammaError, GammaModule};
use crate::poly::IntPoly;
use crate::series::DEFAULT_TRUNCATION;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_PRECISION: u32 = 64;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error [{invariant}]: {detail}")]
    Validation {
        invariant: &'static str,
        detail: String,
    },
}

impl ProblemError {
    fn invalid(invariant: &'static str, detail: impl Into<String>) -> Self {
        ProblemError::Validation {
            invariant,
            detail: detail.into(),
        }
    }

    /// Name of the violated invariant, for validation errors.
    pub fn invariant(&self) -> Option<&'static str> {
        match self {
            ProblemError::Validation { invariant, .. } => Some(invariant),
            ProblemError::Parse(_) => None,
        }
    }
}

#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum IntLit {
    Num(i64),
    Str(String),
}

impl IntLit {
    fn parse(&self) -> Result<BigInt, ProblemError> {
        match self {
            IntLit::Num(v) => Ok(BigInt::from(*v)),
            IntLit::Str(s) => {
                let t = s.trim().replace('\u{2212}', "-");
                t.strip_prefix('+')
                    .unwrap_or(&t)
                    .parse::<BigInt>()
                    .map_err(|_| ProblemError::Parse(format!("not a decimal integer: {s:?}")))
            }
        }
    }
}

#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum MatrixLit {
    Nested(Vec<Vec<Vec<IntLit>>>),
    /// A single series, for rank one: `[["-3", "1"]]`.
    Single(Vec<Vec<IntLit>>),
}

#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum LevelLit {
    Gamma(u32),
    Crossed([u32; 2]),
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    version: Option<u32>,
    kind: String,
    p: IntLit,
    precision: Option<u32>,
    truncation: Option<usize>,
    d: usize,
    #[serde(rename = "F")]
    f: Option<MatrixLit>,
    kappa: Option<IntLit>,
    #[serde(rename = "A")]
    a: Option<MatrixLit>,
    levels: Option<Vec<LevelLit>>,
    characters: Option<Vec<IntLit>>,
    n_max: Option<u32>,
    budget: Option<usize>,
    seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub enum ModuleSpec {
    Gamma {
        module: GammaModule,
        levels: Vec<u32>,
    },
    Crossed {
        module: CrossedModule,
        levels: Vec<Level>,
    },
}

impl ModuleSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModuleSpec::Gamma { .. } => "gamma",
            ModuleSpec::Crossed { .. } => "crossed",
        }
    }
}

/// A validated problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub version: u32,
    pub p: BigUint,
    pub precision: u32,
    pub truncation: usize,
    pub module: ModuleSpec,
    pub characters: Vec<BigInt>,
    pub n_max: Option<u32>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    /// SHA-256 of the input text, lowercase hex.
    pub digest: String,
}

fn matrix(lit: &MatrixLit, d: usize, name: &str) -> Result<Vec<Vec<IntPoly>>, ProblemError> {
    let nested: Vec<Vec<Vec<IntLit>>> = match lit {
        MatrixLit::Nested(rows) => rows.clone(),
        MatrixLit::Single(series) if d == 1 && series.len() == 1 => vec![vec![series[0].clone()]],
        MatrixLit::Single(_) => {
            return Err(ProblemError::invalid(
                "rank",
                format!("{name} must be a {d}x{d} matrix of coefficient lists"),
            ));
        }
    };
    if nested.len() != d || nested.iter().any(|r| r.len() != d) {
        return Err(ProblemError::invalid(
            "rank",
            format!("{name} must be {d}x{d}"),
        ));
    }
    nested
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| s.iter().map(IntLit::parse).collect())
                .collect()
        })
        .collect()
}

/// Parses and validates a problem file; every module invariant is checked
/// here, before any computation.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let raw: RawProblem =
        serde_json::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let version = raw.version.unwrap_or(SCHEMA_VERSION);
    if version != SCHEMA_VERSION {
        return Err(ProblemError::invalid(
            "schema-version",
            format!("unsupported version {version}"),
        ));
    }
    let p_int = raw.p.parse()?;
    let p = p_int
        .to_biguint()
        .filter(crate::padic::is_odd_prime)
        .ok_or_else(|| {
            ProblemError::invalid("odd-prime", format!("p = {p_int} is not an odd prime"))
        })?;
    let precision = raw.precision.unwrap_or(DEFAULT_PRECISION);
    if precision == 0 {
        return Err(ProblemError::invalid(
            "precision",
            "precision must be positive",
        ));
    }
    let truncation = raw.truncation.unwrap_or(DEFAULT_TRUNCATION);
    if truncation == 0 {
        return Err(ProblemError::invalid(
            "truncation",
            "truncation order must be positive",
        ));
    }
    if raw.d == 0 {
        return Err(ProblemError::invalid("rank", "d must be positive"));
    }
    let module = match raw.kind.as_str() {
        "gamma" => {
            if raw.a.is_some() || raw.kappa.is_some() {
                return Err(ProblemError::invalid(
                    "stanza",
                    "gamma stanza takes F, not A or kappa",
                ));
            }
            let f = raw
                .f
                .as_ref()
                .ok_or_else(|| ProblemError::invalid("stanza", "gamma stanza needs F"))?;
            let module =
                GammaModule::new(p.clone(), matrix(f, raw.d, "F")?).map_err(|e| match e {
                    GammaError::NotTorsion => ProblemError::invalid("torsion", "det F is zero"),
                    e => ProblemError::invalid("presentation", e.to_string()),
                })?;
            let levels = match &raw.levels {
                None => vec![0],
                Some(ls) => ls
                    .iter()
                    .map(|l| match l {
                        LevelLit::Gamma(n) => Ok(*n),
                        LevelLit::Crossed(_) => Err(ProblemError::invalid(
                            "level",
                            "gamma levels are single integers n",
                        )),
                    })
                    .collect::<Result<_, _>>()?,
            };
            ModuleSpec::Gamma { module, levels }
        }
        "crossed" => {
            if raw.f.is_some() {
                return Err(ProblemError::invalid(
                    "stanza",
                    "crossed stanza takes A and kappa, not F",
                ));
            }
            let a = raw
                .a
                .as_ref()
                .ok_or_else(|| ProblemError::invalid("stanza", "crossed stanza needs A"))?;
            let kappa = raw
                .kappa
                .as_ref()
                .ok_or_else(|| ProblemError::invalid("stanza", "crossed stanza needs kappa"))?
                .parse()?;
            let module = CrossedModule::new(p.clone(), kappa, matrix(a, raw.d, "A")?).map_err(
                |e| match e {
                    CrossedError::KappaNotPrincipal => {
                        ProblemError::invalid("kappa-principal", "kappa must be 1 mod p")
                    }
                    CrossedError::ActionNotInvertible => {
                        ProblemError::invalid("unit-determinant", "det A(0) is divisible by p")
                    }
                    e => ProblemError::invalid("presentation", e.to_string()),
                },
            )?;
            let lits = raw
                .levels
                .clone()
                .unwrap_or_else(|| vec![LevelLit::Crossed([0, 0])]);
            let levels = lits
                .iter()
                .map(|l| match l {
                    LevelLit::Crossed([n, m]) => module
                        .level(*n, *m)
                        .map_err(|e| ProblemError::invalid("level-normality", e.to_string())),
                    LevelLit::Gamma(_) => Err(ProblemError::invalid(
                        "level",
                        "crossed levels are pairs [n, m]",
                    )),
                })
                .collect::<Result<_, _>>()?;
            ModuleSpec::Crossed { module, levels }
        }
        other => {
            return Err(ProblemError::invalid(
                "kind",
                format!("unknown kind {other:?}"),
            ))
        }
    };
    let pi = BigInt::from(p.clone());
    let characters = match &raw.characters {
        None => vec![BigInt::from(1)],
        Some(cs) => cs.iter().map(IntLit::parse).collect::<Result<_, _>>()?,
    };
    if let Some(u) = characters
        .iter()
        .find(|u| !(*u - 1u32).mod_floor(&pi).is_zero())
    {
        return Err(ProblemError::invalid(
            "character-principal",
            format!("u = {u} is not 1 mod p"),
        ));
    }
    Ok(Problem {
        version,
        p,
        precision,
        truncation,
        module,
        characters,
        n_max: raw.n_max,
        budget: raw.budget,
        seed: raw.seed,
        digest,
    })
}
