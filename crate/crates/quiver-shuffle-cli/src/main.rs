//! `qshuffle`: batch front end to the quiver-shuffle library. Every command prints one JSON
//! report wrapped in an envelope that records the inputs needed to reproduce it.

mod error;
mod io;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quiver_shuffle::basis::ComponentBasis;
use quiver_shuffle::field::{parse_witness, validate_torus_witness, Params, Specialization};
use quiver_shuffle::latticegraph::{component, Variant};
use quiver_shuffle::laurent::GradedLaurent;
use quiver_shuffle::quiver::{Quiver, Twist};
use quiver_shuffle::shuffle::{ShuffleContext, Side, WheelRegime, DEFAULT_COMPONENT_CAP};
use quiver_shuffle::words::{enumerate_nonincreasing, Word};
use quiver_shuffle::Error;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Environment variable naming a directory for cached reports.
const CACHE_ENV: &str = "QSHUFFLE_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "qshuffle", version, about = "Exact computations in quiver shuffle algebras")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Quiver JSON file: {"vertices": [...], "edges": [{"src", "tgt", "label"}]}.
    #[arg(long, global = true)]
    quiver: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = TwistArg::Plain)]
    twist: TwistArg,
    /// Monomial specialization, e.g. "q=u2^2, t=u2".
    #[arg(long, global = true)]
    spec: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = RegimeArg::ThreeVariable)]
    regime: RegimeArg,
    /// Check every wheel triple, check series truncation, and keep rank computations exact.
    #[arg(long, global = true)]
    paranoid: bool,
    /// Seed for modular rank probes; give it before the subcommand.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use modular rank probes when building component bases.
    #[arg(long, global = true)]
    probe: bool,
    /// Maximum number of lattice vertices per component.
    #[arg(long, global = true, default_value_t = DEFAULT_COMPONENT_CAP, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    cap: usize,
    #[arg(long, global = true)]
    #[serde(skip)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TwistArg {
    Plain,
    Prime,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum RegimeArg {
    #[value(name = "three_variable")]
    ThreeVariable,
    #[value(name = "restricted")]
    Restricted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SideArg {
    E,
    F,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum VariantArg {
    #[value(name = "G")]
    G,
    #[value(name = "Gprime")]
    Gprime,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Print ζ_ij (or ζ′_ij) and, for the prime twist, its constant terms.
    Zeta {
        #[arg(long)]
        i: String,
        #[arg(long)]
        j: String,
    },
    /// Shuffle product of two elements (word literals or element JSON files).
    Shuffle {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value_t = SideArg::E)]
        side: SideArg,
    },
    /// Check the wheel conditions of the active regime.
    WheelCheck {
        #[arg(long)]
        element: String,
    },
    /// Pairing <R, f_w>; with --symmetric, the pairing <e_w, R> against the opposite side.
    Pair {
        #[arg(long)]
        element: String,
        #[arg(long)]
        word: String,
        #[arg(long)]
        symmetric: bool,
    },
    /// Non-increasing words of a degree and total exponent within a window.
    WordsEnumerate {
        /// Vertex counts, e.g. "1:2,2:1".
        #[arg(long)]
        degree: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        total: i32,
        #[arg(long, allow_hyphen_values = true)]
        lo: i32,
        #[arg(long, allow_hyphen_values = true)]
        hi: i32,
    },
    /// Connected component of a lattice graph; needs no quiver.
    GraphComponent {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        m: i32,
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
        #[arg(long, value_enum, default_value_t = VariantArg::G)]
        variant: VariantArg,
    },
    /// Words, standard words and Gram block of one component.
    Basis {
        #[arg(long)]
        degree: String,
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
    },
    /// Decompose an element over the standard words.
    Decompose {
        #[arg(long)]
        element: String,
    },
    /// Canonical tensor terms e^w ⊗ f_w of one component.
    Tensor {
        #[arg(long)]
        degree: String,
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
    },
    /// Decompose every wheel-condition element of a window and check the residuals.
    TheoremCheck {
        #[arg(long)]
        degree: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        total: i32,
        #[arg(long, allow_hyphen_values = true)]
        lo: i32,
        #[arg(long, allow_hyphen_values = true)]
        hi: i32,
    },
    /// Check that a numeric point of the specialized torus satisfies 0 < |q| < |t_e| < 1.
    TorusWitness {
        /// Values of the active parameters, e.g. "u2=1/2".
        #[arg(long)]
        witness: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Zeta { .. } => "zeta",
            Command::Shuffle { .. } => "shuffle",
            Command::WheelCheck { .. } => "wheel-check",
            Command::Pair { .. } => "pair",
            Command::WordsEnumerate { .. } => "words-enumerate",
            Command::GraphComponent { .. } => "graph-component",
            Command::Basis { .. } => "basis",
            Command::Decompose { .. } => "decompose",
            Command::Tensor { .. } => "tensor",
            Command::TheoremCheck { .. } => "theorem-check",
            Command::TorusWitness { .. } => "torus-witness",
        }
    }

    /// Element arguments that name files rather than word literals.
    fn element_files(&self) -> Vec<&str> {
        let args: Vec<&String> = match self {
            Command::Shuffle { a, b, .. } => vec![a, b],
            Command::WheelCheck { element } | Command::Pair { element, .. } | Command::Decompose { element } => {
                vec![element]
            }
            _ => vec![],
        };
        args.into_iter().map(String::as_str).filter(|s| !is_word_literal(s)).collect()
    }
}

fn is_word_literal(s: &str) -> bool {
    s.trim_start().starts_with('[')
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Job {
    global: Global,
    command: Command,
    quiver: Option<Quiver>,
}

impl Job {
    fn twist(&self) -> Twist {
        match self.global.twist {
            TwistArg::Plain => Twist::Plain,
            TwistArg::Prime => Twist::Prime,
        }
    }

    fn regime(&self) -> WheelRegime {
        match self.global.regime {
            RegimeArg::ThreeVariable => WheelRegime::ThreeVariable,
            RegimeArg::Restricted => WheelRegime::Restricted,
        }
    }

    fn quiver(&self) -> CliResult<&Quiver> {
        self.quiver.as_ref().ok_or_else(|| CliError::Usage(format!("{} needs --quiver", self.command.name())))
    }

    fn specialization(&self) -> CliResult<Option<Specialization>> {
        match &self.global.spec {
            None => Ok(None),
            Some(text) => Ok(Some(Specialization::parse(&self.quiver()?.params(), text)?)),
        }
    }

    fn context(&self) -> CliResult<ShuffleContext> {
        let g = &self.global;
        let probe = (g.probe && !g.paranoid).then_some(g.seed);
        Ok(ShuffleContext::new(self.quiver()?.clone(), self.twist(), self.specialization()?, self.regime())?
            .with_paranoid(g.paranoid)
            .with_probe(probe)
            .with_cap(g.cap))
    }

    fn envelope(&self) -> CliResult<Value> {
        let spec = match self.specialization() {
            Ok(Some(s)) => Value::String(s.describe()),
            Ok(None) => Value::String("identity".into()),
            Err(CliError::Usage(_)) => Value::Null,
            Err(e) => return Err(e),
        };
        Ok(json!({
            "tool": "qshuffle",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command.name(),
            "quiver_sha256": self.quiver.as_ref().map(io::quiver_hash),
            "twist": self.twist().as_str(),
            "specialization": spec,
            "regime": self.regime().as_str(),
            "seed": self.global.seed,
            "probe": self.global.probe,
            "paranoid": self.global.paranoid,
            "cap": self.global.cap,
        }))
    }

    /// Cache key covering the envelope, the command arguments and the contents of input files.
    fn cache_key(&self, envelope: &Value) -> CliResult<String> {
        let mut inputs = serde_json::Map::new();
        for path in self.command.element_files() {
            inputs.insert(path.to_string(), Value::String(sha256_hex(io::read_text(path)?.as_bytes())));
        }
        let request = json!({"envelope": envelope, "args": self.command, "inputs": inputs});
        Ok(sha256_hex(serde_json::to_string(&request).expect("serializable").as_bytes()))
    }

    fn element(&self, ctx: &ShuffleContext, arg: &str, side: Side) -> CliResult<GradedLaurent> {
        if is_word_literal(arg) {
            let w = Word::parse(ctx.quiver(), arg)?;
            Ok(match side {
                Side::E => ctx.e_word(&w)?,
                Side::F => ctx.f_word(&w)?,
            })
        } else {
            io::load_element(ctx, arg)
        }
    }

    fn run(&self) -> CliResult<(Value, bool)> {
        let ok = |v: Value| Ok((v, true));
        match &self.command {
            Command::Zeta { i, j } => {
                let ctx = self.context()?;
                let q = ctx.quiver();
                let (i, j) = (q.vertex_index(i)?, q.vertex_index(j)?);
                let z = ctx.kernel().zeta(i, j);
                let names = std::iter::once("x".to_string()).chain(ctx.params().names().iter().cloned());
                let xp = Params::new(names)?;
                let mut out = json!({
                    "i": q.vertex_name(i),
                    "j": q.vertex_name(j),
                    "num": xp.fmt_poly(&z.num),
                    "den": xp.fmt_poly(&z.den),
                });
                if ctx.twist() == Twist::Prime {
                    out["constant_term_zero"] = json!(ctx.params().fmt(&ctx.kernel().constant_term_zero(i, j)));
                    out["constant_term_infinity"] = json!(ctx.params().fmt(&ctx.kernel().constant_term_infinity(i, j)));
                }
                ok(out)
            }
            Command::Shuffle { a, b, side } => {
                let ctx = self.context()?;
                let side = match side {
                    SideArg::E => Side::E,
                    SideArg::F => Side::F,
                };
                let r = self.element(&ctx, a, side)?;
                let s = self.element(&ctx, b, side)?;
                ok(io::element_json(&ctx, &ctx.shuffle_product(&r, &s, side)?))
            }
            Command::WheelCheck { element } => {
                let ctx = self.context()?;
                let r = self.element(&ctx, element, Side::E)?;
                let rep = ctx.wheel_check(&r)?;
                ok(json!({"passes": rep.passes, "first_failure": rep.first_failure}))
            }
            Command::Pair { element, word, symmetric } => {
                let ctx = self.context()?;
                let w = Word::parse(ctx.quiver(), word)?;
                let value = if *symmetric {
                    let r = self.element(&ctx, element, Side::F)?;
                    ctx.pair_symmetric(&w, &r)?
                } else {
                    let r = self.element(&ctx, element, Side::E)?;
                    ctx.pair(&r, &w)?
                };
                ok(Value::String(ctx.params().fmt(&value)))
            }
            Command::WordsEnumerate { degree, total, lo, hi } => {
                let q = self.quiver()?;
                let d = io::parse_degree(q, degree)?;
                let words = enumerate_nonincreasing(q, &d, *total, *lo, *hi, self.twist());
                let list: Vec<String> = words.iter().map(|w| w.display(q)).collect();
                ok(json!({"degree": io::degree_json(q, &d), "total": total, "lo": lo, "hi": hi, "count": list.len(), "words": list}))
            }
            Command::GraphComponent { n, m, seed, variant } => {
                let v = io::parse_tuple(seed)?;
                if v.len() != *n {
                    return Err(Error::Arity { expected: *n, found: v.len() }.into());
                }
                let variant = match variant {
                    VariantArg::G => Variant::G,
                    VariantArg::Gprime => Variant::GPrime,
                };
                let c = component(&v, *m, variant, self.global.cap)?;
                ok(json!({
                    "n": n,
                    "m": m,
                    "variant": variant.as_str(),
                    "seed": v,
                    "vertices": c.vertices,
                    "edge_count": c.edge_count,
                }))
            }
            Command::Basis { degree, seed } => {
                let ctx = self.context()?;
                let cb = self.component_basis(&ctx, degree, seed)?;
                let q = ctx.quiver();
                let std_words: Vec<String> = cb.standard_words().iter().map(|w| w.display(q)).collect();
                let gram: Vec<Vec<String>> = cb
                    .standard
                    .iter()
                    .map(|&a| cb.standard.iter().map(|&b| ctx.params().fmt(&cb.gram[a][b])).collect())
                    .collect();
                ok(json!({
                    "degree": io::degree_json(q, &cb.degree),
                    "component": cb.component.vertices,
                    "words": cb.words.iter().map(|w| w.display(q)).collect::<Vec<_>>(),
                    "standard": std_words,
                    "gram": gram,
                    "exact": cb.exact,
                }))
            }
            Command::Decompose { element } => {
                let ctx = self.context()?;
                let r = self.element(&ctx, element, Side::E)?;
                let terms = ctx.decompose(&r)?;
                ok(terms_json(&ctx, &terms))
            }
            Command::Tensor { degree, seed } => {
                let ctx = self.context()?;
                let cb = self.component_basis(&ctx, degree, seed)?;
                let terms: Vec<Value> = ctx
                    .canonical_tensor(&cb)?
                    .iter()
                    .map(|(w, e, f)| {
                        json!({"word": w.display(ctx.quiver()), "e": io::element_json(&ctx, e), "f": io::element_json(&ctx, f)})
                    })
                    .collect();
                ok(Value::Array(terms))
            }
            Command::TheoremCheck { degree, total, lo, hi } => {
                let ctx = self.context()?;
                let d = io::parse_degree(ctx.quiver(), degree)?;
                let rep = ctx.theorem_main_check(&d, *total, *lo, *hi)?;
                let components: Vec<Value> = rep
                    .components
                    .iter()
                    .map(|c| json!({"seed": c.seed, "words": c.words, "standard": c.standard}))
                    .collect();
                let elements: Vec<Value> = rep
                    .elements
                    .iter()
                    .map(|e| json!({"terms": terms_json(&ctx, &e.terms), "residual_zero": e.residual_zero}))
                    .collect();
                let out = json!({
                    "degree": io::degree_json(ctx.quiver(), &d),
                    "total": total,
                    "lo": lo,
                    "hi": hi,
                    "orbit_count": rep.orbit_count,
                    "dimension": rep.dimension,
                    "components": components,
                    "elements": elements,
                    "success": rep.success,
                });
                Ok((out, rep.success))
            }
            Command::TorusWitness { witness } => {
                let q = self.quiver()?;
                let spec = self.specialization()?.unwrap_or_else(|| Specialization::identity(&q.params()));
                let values = parse_witness(spec.target(), witness)?;
                let valid = validate_torus_witness(&spec, &values);
                let shown: serde_json::Map<String, Value> = spec
                    .target()
                    .names()
                    .iter()
                    .zip(&values)
                    .map(|(n, v)| (n.clone(), Value::String(v.to_string())))
                    .collect();
                ok(json!({"witness": shown, "valid": valid}))
            }
        }
    }

    fn component_basis(&self, ctx: &ShuffleContext, degree: &str, seed: &str) -> CliResult<std::sync::Arc<ComponentBasis>> {
        let d = io::parse_degree(ctx.quiver(), degree)?;
        let s = io::parse_tuple(seed)?;
        Ok(ctx.build_component_basis(&d, &s)?)
    }
}

fn terms_json(ctx: &ShuffleContext, terms: &[quiver_shuffle::basis::Term]) -> Value {
    Value::Array(
        terms
            .iter()
            .map(|t| json!({"word": t.word.display(ctx.quiver()), "coeff": ctx.params().fmt(&t.coeff)}))
            .collect(),
    )
}

fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(report).expect("serializable") + "\n",
        Format::Pretty => serde_json::to_string_pretty(report).expect("serializable") + "\n",
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Exit status 1 signals a completed check that failed.
fn execute(cli: Cli) -> CliResult<ExitCode> {
    let quiver = match &cli.global.quiver {
        Some(p) => Some(io::load_quiver(&p.display().to_string())?),
        None => None,
    };
    let job = Job { global: cli.global, command: cli.command, quiver };
    let mut envelope = job.envelope()?;
    let cache = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let cache_file = match &cache {
        Some(dir) => Some(dir.join(format!("{}.json", job.cache_key(&envelope)?))),
        None => None,
    };
    let cached = cache_file.as_ref().and_then(|f| fs::read_to_string(f).ok()).and_then(|t| serde_json::from_str::<Value>(&t).ok());
    let (report, success) = match cached {
        Some(report) => {
            let success = report["result"]["success"].as_bool().unwrap_or(true);
            (report, success)
        }
        None => {
            let (result, success) = job.run()?;
            envelope["result"] = result;
            if let (Some(dir), Some(file)) = (&cache, &cache_file) {
                let io_err = |source| CliError::Io { path: dir.display().to_string(), source };
                fs::create_dir_all(dir).map_err(io_err)?;
                fs::write(file, serde_json::to_string(&envelope).expect("serializable")).map_err(io_err)?;
            }
            (envelope, success)
        }
    };
    write_out(&job.global.output, &render(&report, job.global.format))?;
    Ok(if success { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qshuffle: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
