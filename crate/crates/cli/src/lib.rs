//! `mcf` command line: estimation, exponent tables, certificates, the
//! oracle, Pisot classification, cylinder dumps and monitors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use mcf_core::algorithms::AlgorithmKind;
use mcf_core::certifier::{self, CertifyOptions, SingularPolicy};
use mcf_core::estimator::{self, EstimatorConfig};
use mcf_core::pisot;

pub const SCHEMA: u64 = 1;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(mcf_core::Error),
    /// A numerical comparison ran and missed its tolerance.
    Failed(String),
    /// An exact consistency check ran and failed.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_internal() => 2,
            CliError::Check(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Failed(m) | CliError::Check(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<mcf_core::Error> for CliError {
    fn from(e: mcf_core::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "mcf", version, about = "Multidimensional continued fractions: Lyapunov exponents and certified bounds")]
struct Cli {
    /// File of `key=value` lines supplying flag defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args, Debug)]
struct Parallel {
    /// Worker threads.
    #[arg(long)]
    tasks: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov exponents and eta* of one algorithm by orbit simulation.
    Estimate {
        #[arg(long, value_parser = parse_alg)]
        alg: AlgorithmKind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "1e8", value_parser = parse_count)]
        steps: u64,
        #[arg(long, default_value_t = 10)]
        orbits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = mcf_core::cocycle::DEFAULT_RENORM)]
        renorm: u64,
        #[arg(long, default_value_t = 10_000)]
        burn_in_cap: usize,
        /// Record wall time in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        par: Parallel,
        #[command(flatten)]
        output: Output,
    },
    /// One of the exponent tables (1 Selmer, 2 Brun, 3 Jacobi-Perron,
    /// 4 intermediate, 5 Garrity, 6 eta* of all).
    Table {
        #[arg(long)]
        table: u8,
        #[arg(long, default_value = "1e8", value_parser = parse_count)]
        budget: u64,
        #[arg(long, default_value_t = 10)]
        orbits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to these dimensions (comma separated).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[command(flatten)]
        par: Parallel,
        #[command(flatten)]
        output: Output,
    },
    /// Certified upper bound on lambda_2 of the Selmer algorithm.
    Certify {
        #[arg(long, default_value = "selmer", value_parser = parse_alg)]
        alg: AlgorithmKind,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = certifier::DEFAULT_SPLIT_DEPTH)]
        split_depth: usize,
        /// Close subtrees whose density-weighted volume is below this.
        #[arg(long)]
        aggregate: Option<f64>,
        /// Externally certified bound on the singular pool's measure.
        #[arg(long, requires = "provenance")]
        singular_measure: Option<String>,
        #[arg(long, requires = "singular_measure")]
        provenance: Option<String>,
        /// Also run the high-precision oracle and require agreement.
        #[arg(long)]
        check_oracle: bool,
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        par: Parallel,
        #[command(flatten)]
        output: Output,
    },
    /// High-precision recomputation of a certificate's sum.
    Oracle {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        aggregate: Option<f64>,
        #[arg(long, requires = "provenance")]
        singular_measure: Option<String>,
        #[arg(long, requires = "singular_measure")]
        provenance: Option<String>,
        #[command(flatten)]
        par: Parallel,
        #[command(flatten)]
        output: Output,
    },
    /// Primitive / Pisot / condition (3) classification of d = 2 Selmer words.
    Pisot {
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        #[command(flatten)]
        par: Parallel,
        #[command(flatten)]
        output: Output,
    },
    /// Exact cylinders of one depth with weights and measure bounds.
    Cylinders {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Wedge-ratio, Paley-Ursell and singular-value monitor on one orbit.
    Wedge {
        #[arg(long, value_parser = parse_alg)]
        alg: AlgorithmKind,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "1e6", value_parser = parse_count)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Selmer (d = 2) against Cassaigne.
    Conjugacy {
        #[arg(long, default_value = "1e8", value_parser = parse_count)]
        steps: u64,
        #[arg(long, default_value_t = 10)]
        orbits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to 0.005 at 1e8 steps and more, 0.02 below.
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        par: Parallel,
        #[command(flatten)]
        output: Output,
    },
}

const CYLINDER_MAX_DEPTH: usize = 16;

fn parse_alg(s: &str) -> Result<AlgorithmKind, String> {
    s.parse::<AlgorithmKind>().map_err(|e| e.to_string())
}

/// Nonnegative integer, plain or in scientific notation (`1e8`, `2.5e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let bad = || format!("'{s}' is not a nonnegative integer");
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].trim_start_matches('+').parse::<u32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let fp = fp.trim_end_matches('0');
    if fp.len() as u32 > exp {
        return Err(bad());
    }
    let digits: u128 = format!("{ip}{fp}").parse().map_err(|_| bad())?;
    let scale = 10u128.checked_pow(exp - fp.len() as u32).ok_or_else(bad)?;
    let v = digits.checked_mul(scale).ok_or_else(bad)?;
    u64::try_from(v).map_err(|_| bad())
}

/// Splices `key=value` defaults from the config file into argv, after the
/// subcommand name, for every flag the subcommand accepts and argv lacks.
fn apply_config(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let args: Vec<String> = argv
        .into_iter()
        .map(|a| a.into_string().map_err(|_| CliError::Usage("arguments must be valid UTF-8".into())))
        .collect::<CliResult<_>>()?;
    let mut path = None;
    let mut rest = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest.into_iter().map(OsString::from).collect()) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let entries = parse_config(&text)?;
    let Some(sub_pos) = rest.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(rest.into_iter().map(OsString::from).collect());
    };
    let cmd = Cli::command();
    let Some(sub) = cmd.find_subcommand(&rest[sub_pos]) else {
        return Ok(rest.into_iter().map(OsString::from).collect());
    };
    let mut inserted = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        let flag = format!("--{key}");
        if rest.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        if arg.get_action().takes_values() {
            inserted.push(flag);
            inserted.push(value);
        } else {
            match value.as_str() {
                "true" | "1" | "yes" => inserted.push(flag),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::Usage(format!("config key '{key}' expects true or false"))),
            }
        }
    }
    let mut out: Vec<String> = rest[..=sub_pos].to_vec();
    out.extend(inserted);
    out.extend(rest[sub_pos + 1..].iter().cloned());
    Ok(out.into_iter().map(OsString::from).collect())
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let known: Vec<String> = Cli::command()
        .get_subcommands()
        .flat_map(|s| s.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect::<Vec<_>>())
        .collect();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if !known.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", n + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

fn with_schema(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut out = Map::new();
            out.insert("schema".into(), Value::from(SCHEMA));
            out.extend(m);
            Value::Object(out)
        }
        other => {
            let mut out = Map::new();
            out.insert("schema".into(), Value::from(SCHEMA));
            out.insert("data".into(), other);
            Value::Object(out)
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    let v = serde_json::to_value(v).map_err(|e| CliError::Io(format!("serialization: {e}")))?;
    let mut s = serde_json::to_string_pretty(&with_schema(v)).map_err(|e| CliError::Io(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn write_file(p: &Path, text: &str) -> CliResult<()> {
    std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn json_only(o: &Output, what: &str) -> CliResult<()> {
    if o.format == Format::Csv {
        return Err(CliError::Usage(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn singular_policy(measure: &Option<String>, provenance: &Option<String>) -> CliResult<SingularPolicy> {
    match (measure, provenance) {
        (Some(m), Some(p)) => Ok(SingularPolicy::external(m, p)?),
        (None, None) => Ok(SingularPolicy::Complement),
        _ => Err(CliError::Usage("--singular-measure and --provenance go together".into())),
    }
}

fn in_pool<T: Send>(tasks: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match tasks {
        Some(0) => Err(CliError::Usage("--tasks must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn fmt_rat(r: &mcf_core::numeric::Rational) -> String {
    r.to_string()
}

fn execute(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Estimate { alg, dim, steps, orbits, seed, renorm, burn_in_cap, timing, par, output } => {
            let mut cfg = EstimatorConfig::new(alg, dim).with_steps(steps).with_orbits(orbits).with_seed(seed);
            cfg.renorm = renorm;
            cfg.burn_in_cap = burn_in_cap;
            cfg.timing = timing;
            cfg.validate()?;
            let r = in_pool(par.tasks, || estimator::estimate(&cfg))??;
            let text = match output.format {
                Format::Json => json(&r)?,
                Format::Csv => {
                    let mut s = String::from(ESTIMATE_CSV_HEADER);
                    s.push('\n');
                    for o in &r.orbits {
                        let _ = writeln!(s, "{},{},{},{},{}", o.index, o.lambda1, o.lambda2, o.eta, o.discarded);
                    }
                    let _ = writeln!(s, "mean,{},{},{},{}", r.lambda1, r.lambda2, r.eta, r.discarded);
                    let _ = writeln!(s, "sd,{},{},{},", r.lambda1_sd, r.lambda2_sd, r.eta_sd);
                    s
                }
            };
            emit(&output.out, &text)
        }
        Command::Table { table, budget, orbits, seed, dims, par, output } => {
            estimator::table_layout(table)?;
            let rows = in_pool(par.tasks, || estimator::table(table, budget, orbits, seed, &dims))??;
            let text = match output.format {
                Format::Json => json(&serde_json::json!({ "table": table, "budget": budget, "orbits": orbits, "seed": seed, "rows": rows }))?,
                Format::Csv => {
                    let mut s = String::from(estimator::TABLE_CSV_HEADER);
                    s.push('\n');
                    for r in &rows {
                        s.push_str(&r.csv());
                        s.push('\n');
                    }
                    s
                }
            };
            emit(&output.out, &text)
        }
        Command::Certify {
            alg,
            dim,
            depth,
            split_depth,
            aggregate,
            singular_measure,
            provenance,
            check_oracle,
            timing,
            par,
            output,
        } => {
            json_only(&output, "certificate")?;
            if alg != AlgorithmKind::Selmer {
                return Err(CliError::Usage(format!("certification is implemented for selmer only, not {alg}")));
            }
            let opts = CertifyOptions {
                split_depth,
                threads: par.tasks,
                aggregate,
                singular: singular_policy(&singular_measure, &provenance)?,
                timing,
            };
            if par.tasks == Some(0) {
                return Err(CliError::Usage("--tasks must be positive".into()));
            }
            let cert = certifier::certify(dim, depth, &opts)?;
            if check_oracle {
                certifier::oracle_recompute(dim, depth, &opts)?.check(&cert, 1e-6)?;
            }
            emit(&output.out, &json(&cert)?)
        }
        Command::Oracle { dim, depth, aggregate, singular_measure, provenance, par, output } => {
            json_only(&output, "oracle")?;
            let opts = CertifyOptions {
                threads: par.tasks,
                aggregate,
                singular: singular_policy(&singular_measure, &provenance)?,
                ..CertifyOptions::default()
            };
            let report = certifier::oracle_recompute(dim, depth, &opts)?;
            let cert = certifier::certify(dim, depth, &opts)?;
            let check = report.check(&cert, 1e-6);
            let text = json(&serde_json::json!({
                "oracle": report,
                "certificate_bound": cert.bound,
                "consistent": check.is_ok(),
            }))?;
            emit(&output.out, &text)?;
            check.map_err(CliError::from)
        }
        Command::Pisot { max_len, par, output } => {
            let r = in_pool(par.tasks, || pisot::verify_theorem(max_len))??;
            let text = match output.format {
                Format::Json => json(&serde_json::json!({ "report": r, "rows": r.rows }))?,
                Format::Csv => {
                    let mut s = String::from(pisot::CLASSIFICATION_CSV_HEADER);
                    s.push('\n');
                    for row in &r.rows {
                        s.push_str(&row.csv());
                        s.push('\n');
                    }
                    s
                }
            };
            emit(&output.out, &text)?;
            if !r.counterexamples.is_empty() || r.condition3_mismatches > 0 {
                return Err(CliError::Check(format!(
                    "{} counterexamples, {} condition (3) mismatches",
                    r.counterexamples.len(),
                    r.condition3_mismatches
                )));
            }
            Ok(())
        }
        Command::Cylinders { dim, depth, output } => {
            if depth > CYLINDER_MAX_DEPTH {
                return Err(CliError::Usage(format!("cylinder dumps are limited to depth {CYLINDER_MAX_DEPTH}")));
            }
            let mut rows = Vec::new();
            for c in certifier::enumerate_cylinders(dim, depth)? {
                let c = c?;
                let (w, ln) = certifier::cylinder_weight(&c)?;
                let (lo, hi) = certifier::measure_bounds(&c, dim)?;
                let vertices: Vec<Vec<String>> =
                    c.vertices.iter().map(|v| v.coords.iter().map(fmt_rat).collect()).collect();
                rows.push(serde_json::json!({
                    "word": c.word_string(),
                    "singular": c.singular,
                    "volume": fmt_rat(&c.volume),
                    "weight": fmt_rat(&w),
                    "log_weight_up": ln.value,
                    "measure_lower": lo.value,
                    "measure_upper": if hi.value.is_finite() { Value::from(hi.value) } else { Value::from("inf") },
                    "vertices": vertices,
                }));
            }
            let text = match output.format {
                Format::Json => json(&serde_json::json!({ "dim": dim, "depth": depth, "cylinders": rows }))?,
                Format::Csv => {
                    let mut s = String::from(CYLINDER_CSV_HEADER);
                    s.push('\n');
                    for r in &rows {
                        let verts: Vec<String> = r["vertices"]
                            .as_array()
                            .map(|vs| {
                                vs.iter()
                                    .map(|v| {
                                        v.as_array()
                                            .map(|c| c.iter().filter_map(|x| x.as_str()).collect::<Vec<_>>().join(" "))
                                            .unwrap_or_default()
                                    })
                                    .collect()
                            })
                            .unwrap_or_default();
                        let upper = match &r["measure_upper"] {
                            Value::String(s) => s.clone(),
                            v => v.to_string(),
                        };
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{},{}",
                            r["word"].as_str().unwrap_or(""),
                            r["singular"],
                            r["volume"].as_str().unwrap_or(""),
                            r["weight"].as_str().unwrap_or(""),
                            r["log_weight_up"],
                            r["measure_lower"],
                            upper,
                            verts.join(";")
                        );
                    }
                    s
                }
            };
            emit(&output.out, &text)
        }
        Command::Wedge { alg, dim, steps, seed, output } => {
            let r = estimator::wedge_monitor(alg, dim, steps, seed)?;
            let text = match output.format {
                Format::Json => json(&r)?,
                Format::Csv => {
                    let mut s = String::from(WEDGE_CSV_HEADER);
                    s.push('\n');
                    for c in &r.checkpoints {
                        let _ = writeln!(s, "{},{},{},{},{}", c.n, c.wedge_ratio, c.d_norm, c.delta1, c.delta2);
                    }
                    s
                }
            };
            emit(&output.out, &text)
        }
        Command::Conjugacy { steps, orbits, seed, tolerance, par, output } => {
            let tol = tolerance.unwrap_or_else(|| estimator::conjugacy_tolerance(steps));
            let r = in_pool(par.tasks, || estimator::conjugacy_check(steps, orbits, seed, tol))??;
            let text = match output.format {
                Format::Json => json(&r)?,
                Format::Csv => format!(
                    "{CONJUGACY_CSV_HEADER}\n{},{},{},{},{},{},{},{},{},{},{}\n",
                    steps,
                    orbits,
                    seed,
                    r.selmer.lambda1,
                    r.selmer.lambda2,
                    r.cassaigne.lambda1,
                    r.cassaigne.lambda2,
                    r.delta_lambda1,
                    r.delta_lambda2,
                    r.tolerance,
                    r.pass
                ),
            };
            emit(&output.out, &text)?;
            if !r.pass {
                return Err(CliError::Failed(format!(
                    "exponents differ by {} / {} (tolerance {})",
                    r.delta_lambda1, r.delta_lambda2, r.tolerance
                )));
            }
            Ok(())
        }
    }
}

pub const ESTIMATE_CSV_HEADER: &str = "orbit,lambda1,lambda2,eta,discarded";
pub const CYLINDER_CSV_HEADER: &str =
    "word,singular,volume,weight,log_weight_up,measure_lower,measure_upper,vertices";
pub const WEDGE_CSV_HEADER: &str = "n,wedge_ratio,d_norm,delta1,delta2";
pub const CONJUGACY_CSV_HEADER: &str =
    "steps,orbits,seed,selmer_lambda1,selmer_lambda2,cassaigne_lambda1,cassaigne_lambda2,delta_lambda1,delta_lambda2,tolerance,pass";

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on usage, input and tolerance failures, 2 on internal consistency
/// failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let result = apply_config(argv).and_then(|argv| {
        Cli::try_parse_from(argv).map_err(|e| {
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    CliError::Usage(String::new())
                }
                _ => CliError::Usage(e.render().to_string()),
            }
        })
    });
    let cli = match result {
        Ok(c) => c,
        Err(CliError::Usage(m)) if m.is_empty() => return 0,
        Err(e) => {
            eprintln!("{}", e.to_string().trim_end());
            return e.exit_code();
        }
    };
    match execute(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mcf: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e8"), Ok(100_000_000));
        assert_eq!(parse_count("2.5e6"), Ok(2_500_000));
        assert_eq!(parse_count("12345"), Ok(12345));
        assert_eq!(parse_count("1.000e3"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("1e30").is_err());
        assert!(parse_count("e5").is_err());
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# defaults\nsteps = 1e6\nseed=7 # trailing\n\n").unwrap();
        assert_eq!(c, vec![("steps".into(), "1e6".into()), ("seed".into(), "7".into())]);
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("steps").is_err());
    }

    #[test]
    fn schema_first() {
        let v = with_schema(serde_json::json!({"b": 1, "a": 2}));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys[0], "schema");
    }
}
