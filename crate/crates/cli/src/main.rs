//! Command-line front end. Prints one JSON report per invocation.
//!
//! Exit status: 0 for an ok report, 1 for a mathematical failure (the
//! report says why), 2 for usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use semilinear::cocycle::{
    random_gauge, twist, verify_certificate, verify_cocycle, GaugeTransform, Semigroup, SemigroupCocycle,
    TrivializationCertificate,
};
use semilinear::corpus::{case_seed, corpus_case, GENERATOR_VERSION};
use semilinear::localsolve::{classify_degree_one, trivialize_with, TrivializeOptions, DEFAULT_TRIALS};
use semilinear::matrix::SeriesMatrixJson;
use semilinear::pgl::{
    cremona_identities, omega_class_check, random_pairs, verify_chain_rule_on_pairs, h_functional_equation_check,
    PGLDegreeOneClass, UnivariateMatrix,
};
use semilinear::scalar::FieldDescriptor;
use semilinear::Error;

#[derive(Parser)]
#[command(name = "semilinear", version, about = "Semi-linear representations over Laurent series")]
struct Cli {
    /// Working t-adic precision.
    #[arg(long, global = true, default_value_t = 64)]
    precision: i64,
    /// Coefficient field: q or cyclo:N.
    #[arg(long, global = true, default_value = "q")]
    field: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Attempts for the cyclic vector search.
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the cocycle condition on every generator pair.
    Verify { cocycle: PathBuf },
    /// Twist a cocycle by a gauge file, or by a seeded random gauge.
    Twist {
        cocycle: PathBuf,
        gauge: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        complexity: usize,
    },
    /// Reduce a cocycle to a constant representation; prints a certificate.
    Trivialize { cocycle: PathBuf },
    /// Check a certificate against a cocycle.
    VerifyCert { cocycle: PathBuf, certificate: PathBuf },
    /// Classify a rank-one cocycle.
    Classify { cocycle: PathBuf },
    /// Chain rule for the degree-one class m on random transform pairs, and
    /// the Jacobian comparison.
    PglCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: i64,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
    },
    /// Relations among sigma, xi, iota, s0, s1 and g0.
    CremonaCheck {
        #[arg(long)]
        n: usize,
    },
    /// Functional equations for a matrix h(x1), given as a JSON array of
    /// rows of strings.
    HCheck {
        matrix: Option<PathBuf>,
        /// The matrix as inline JSON instead of a file.
        #[arg(long, conflicts_with = "matrix")]
        inline: Option<String>,
    },
    /// Seeded corpus of twisted constant representations.
    GenCorpus {
        /// Comma-separated generators.
        #[arg(long, default_value = "2,3")]
        gens: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 25)]
        count: u64,
        #[arg(long, default_value_t = 3)]
        complexity: usize,
        /// Also write each case's cocycle to DIR/case-NNN.json.
        #[arg(long)]
        split: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Math(e)
    }
}

type Outcome = std::result::Result<(Value, bool), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Input documents that fail to parse are usage errors.
fn load_cocycle(path: &Path, field: FieldDescriptor) -> std::result::Result<SemigroupCocycle, Failure> {
    SemigroupCocycle::from_json(&read(path)?, field).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn error_json(e: &Error) -> Value {
    json!({ "kind": e.kind(), "message": e.to_string() })
}

fn report<T: serde::Serialize>(r: &T, ok: bool) -> Outcome {
    Ok((serde_json::to_value(r).expect("serializable"), ok))
}

fn run(cli: &Cli) -> Outcome {
    if cli.precision < 8 {
        return Err(usage("--precision must be at least 8"));
    }
    let field: FieldDescriptor = cli.field.parse().map_err(|e: Error| usage(e.to_string()))?;
    let prec = cli.precision;
    match &cli.command {
        Command::Verify { cocycle } => {
            let r = verify_cocycle(&load_cocycle(cocycle, field)?);
            report(&r, r.ok)
        }
        Command::Twist {
            cocycle,
            gauge,
            complexity,
        } => {
            let c = load_cocycle(cocycle, field)?;
            let g = match gauge {
                Some(path) => {
                    let raw: SeriesMatrixJson =
                        serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    GaugeTransform::new(raw.into_matrix(c.field()).map_err(|e| usage(e.to_string()))?)
                }
                None => random_gauge(c.dim(), c.field(), cli.seed, *complexity, prec),
            };
            Ok((twist(&c, &g)?.to_json(), true))
        }
        Command::Trivialize { cocycle } => {
            let c = load_cocycle(cocycle, field)?;
            let cert = trivialize_with(&c, prec, TrivializeOptions { trials: cli.trials })?;
            Ok((cert.to_json(), true))
        }
        Command::VerifyCert { cocycle, certificate } => {
            let c = load_cocycle(cocycle, field)?;
            let cert = TrivializationCertificate::from_json(&read(certificate)?, c.semigroup())
                .map_err(|e| usage(format!("{}: {e}", certificate.display())))?;
            let r = verify_certificate(&c, &cert);
            report(&r, r.ok)
        }
        Command::Classify { cocycle } => {
            let c = load_cocycle(cocycle, field)?;
            let red = classify_degree_one(&c)?;
            Ok((
                json!({
                    "ok": true,
                    "class": red.class,
                    "gauge": red.gauge.g,
                    "reduced": red.reduced.to_json(),
                }),
                true,
            ))
        }
        Command::PglCheck { n, m, pairs } => {
            if *n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let chain = verify_chain_rule_on_pairs(&random_pairs(*n, cli.seed, *pairs), &PGLDegreeOneClass::trivial(*m))?;
            let omega = omega_class_check(*n)?;
            let ok = chain.ok && omega.ok;
            Ok((json!({ "check": "pgl", "ok": ok, "chainRule": chain, "omega": omega }), ok))
        }
        Command::CremonaCheck { n } => {
            if *n < 2 {
                return Err(usage("--n must be at least 2"));
            }
            let r = cremona_identities(*n)?;
            report(&r, r.ok)
        }
        Command::HCheck { matrix, inline } => {
            let text = match (matrix, inline) {
                (Some(path), None) => read(path)?,
                (None, Some(text)) => text.clone(),
                _ => return Err(usage("give a matrix file or --inline")),
            };
            let rows: Vec<Vec<String>> =
                serde_json::from_str(&text).map_err(|e| usage(format!("matrix must be an array of string rows: {e}")))?;
            let h = UnivariateMatrix::parse(&rows, field).map_err(|e| usage(e.to_string()))?;
            let r = h_functional_equation_check(&h)?;
            report(&r, r.ok)
        }
        Command::GenCorpus {
            gens,
            dim,
            count,
            complexity,
            split,
        } => gen_corpus(gens, *dim, *count, *complexity, split.as_deref(), cli.seed, prec),
    }
}

fn version_hash() -> String {
    hex::encode(Sha256::digest(GENERATOR_VERSION.as_bytes()))
}

fn gen_corpus(gens: &str, dim: usize, count: u64, complexity: usize, split: Option<&Path>, seed: u64, prec: i64) -> Outcome {
    let gens: Vec<u64> = gens
        .split(',')
        .map(|g| g.trim().parse().map_err(|_| usage(format!("bad generator {g:?}"))))
        .collect::<std::result::Result<_, _>>()?;
    let s = Semigroup::new(gens).map_err(|e| usage(e.to_string()))?;
    if dim == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    if let Some(dir) = split {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut cases = Vec::new();
    for i in 0..count {
        let case = corpus_case(&s, dim, case_seed(seed, i), complexity, prec)?;
        let doc = case.cocycle.to_json();
        if let Some(dir) = split {
            let path = dir.join(format!("case-{i:03}.json"));
            fs::write(&path, pretty(&doc)).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        }
        cases.push(json!({
            "index": i,
            "seed": case.seed.to_string(),
            "cocycle": doc,
            "constant": case.rep.values().iter().map(|(p, m)| (p.to_string(), m)).collect::<std::collections::BTreeMap<_, _>>(),
            "gauge": case.gauge.g,
        }));
    }
    Ok((
        json!({
            "generatorVersion": GENERATOR_VERSION,
            "versionHash": version_hash(),
            "seed": seed.to_string(),
            "precision": prec,
            "semigroup": s.generators(),
            "dim": dim,
            "complexity": complexity,
            "cases": cases,
        }),
        true,
    ))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emit(v: &Value, out: Option<&Path>) -> std::result::Result<(), String> {
    match out {
        Some(path) => fs::write(path, pretty(v)).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{}", pretty(v));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (value, code) = match run(&cli) {
        Ok((v, ok)) => (v, if ok { 0 } else { 1 }),
        Err(Failure::Math(e)) => (json!({ "ok": false, "error": error_json(&e) }), 1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = emit(&value, cli.out.as_deref()) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
