//! `fgcheck`: growth tables, lemma suites, bound evaluation, element orders,
//! portraits and ball caches for the Fabrykowski-Gupta group.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fg_core::bounds::{self, BoundParams};
use fg_core::checks::{self, LemmaReport, PivotRange};
use fg_core::metric_enum::{
    self, growth, length_at_most, triple_inject, BallTable, EnumConfig, GrowthSeries,
};
use fg_core::torsion;
use fg_core::tree_group::{in_commutator_subgroup, key, portrait};
use fg_core::{Error, NormalWord};

const CACHE_FILE: &str = "ball.fgball";

#[derive(Parser, Debug)]
#[command(
    name = "fgcheck",
    version,
    about = "Computational checks for the Fabrykowski-Gupta group G = <a, t>, t = <a, 1, t>",
    after_help = "Words are strings over {a, A, t, T}; A and T are the inverses of a and t.\n\
                  Exit codes: 0 success, 1 violations found, 2 usage error, 3 resource limit."
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    /// Ball cache file; defaults to $FG_CACHE_DIR/ball.fgball when that is set.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[arg(long, global = true, env = "FG_CACHE_DIR", hide_env_values = true)]
    cache_dir: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Enumeration budget in candidate words.
    #[arg(long, global = true, default_value_t = EnumConfig::default().max_candidates)]
    max_candidates: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Growth table `n,gamma,beta,delta,lower_bound` for n up to --max-len.
    Growth {
        #[arg(long)]
        max_len: u32,
        /// Append log-scale columns for the lower and upper growth bounds.
        #[arg(long)]
        overlay: bool,
    },
    /// Run one lemma suite and print its JSON report.
    Lemma {
        #[arg(value_enum)]
        name: Lemma,
        /// Length (or syllable) scale of the suite; each suite has its own default.
        #[arg(long)]
        max_len: Option<u32>,
        /// Number of seeded random cases, for suites that use them.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Threshold N above which the key growth inequality holds.
    Bounds {
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 1e12)]
        limit: f64,
    },
    /// Order of an element, with an infinite-order certificate when one exists.
    Order {
        #[arg(long)]
        word: String,
        /// Largest power tried for a finite order.
        #[arg(long, default_value_t = 64)]
        limit: u64,
    },
    /// Portrait of an element down to --depth, as DOT or JSON.
    Portrait {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Injectivity and length report for (g1, g2, g3) -> psi(g1) psi(g2)^a psi(g3)^(a^2)
    /// on the commutator subgroup ball of radius --n.
    Inject {
        #[arg(long, default_value_t = 2)]
        n: u32,
    },
    /// Build or inspect the ball cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    /// Enumerate the ball of radius --max-len and write it to the cache.
    Build {
        #[arg(long)]
        max_len: u32,
    },
    /// Print the radius and size of the cached ball.
    Info,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Lemma {
    #[value(name = "mot-sans-red")]
    MotSansRed,
    #[value(name = "mot-sans-red-printed")]
    MotSansRedPrinted,
    #[value(name = "cara-I")]
    CaraI,
    #[value(name = "permut")]
    Permut,
    #[value(name = "words-not-in-I")]
    WordsNotInI,
    #[value(name = "structure-I")]
    StructureI,
    #[value(name = "delta-bounded")]
    DeltaBounded,
    #[value(name = "equiv-suites")]
    EquivSuites,
    #[value(name = "rel-123")]
    Rel123,
    #[value(name = "w-split")]
    WSplit,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Limit(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            Error::ResourceLimit { .. } => Failure::Limit(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

/// What a command produced: text to emit and whether it found violations.
struct Output {
    text: String,
    violations: bool,
}

impl Output {
    fn clean(text: String) -> Self {
        Output {
            text,
            violations: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(w) = cli.global.workers {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w as usize)
            .build_global();
    }
    match run(&cli) {
        Ok(out) => match emit(&cli.global, &out.text) {
            Ok(()) if out.violations => ExitCode::from(1),
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("fgcheck: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Usage(m)) => {
            eprintln!("fgcheck: usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Limit(m)) => {
            eprintln!("fgcheck: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("fgcheck: {m}");
            ExitCode::from(1)
        }
    }
}

fn emit(g: &Global, text: &str) -> io::Result<()> {
    match &g.out {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Growth { max_len, overlay } => cmd_growth(g, *max_len, *overlay),
        Command::Lemma {
            name,
            max_len,
            samples,
        } => {
            require_format(g, &[Format::Json])?;
            let rep = cmd_lemma(g, *name, *max_len, *samples)?;
            let violations = !rep.passed();
            let mut v = serde_json::to_value(&rep).expect("report serializes");
            v["config"] = config_json(
                g,
                json!({ "command": "lemma", "max_len": max_len, "samples": samples }),
            );
            Ok(Output {
                text: pretty(&v),
                violations,
            })
        }
        Command::Bounds { d, m, limit } => {
            require_format(g, &[Format::Json])?;
            cmd_bounds(g, *d, *m, *limit).map(Output::clean)
        }
        Command::Order { word, limit } => {
            require_format(g, &[Format::Json])?;
            let w = parse_word(word)?;
            let result = torsion::order(&w, *limit);
            let facts = match &result {
                torsion::OrderResult::Infinite { certificate: c } => vec![
                    format!("the root rotation of w has order {}", c.k),
                    format!("w^{} fixes every first-level vertex", c.k),
                    format!(
                        "the section of w^{} at vertex {} equals w^{}",
                        c.k, c.vertex, c.j
                    ),
                ],
                _ => vec![],
            };
            let v = json!({
                "word": word,
                "normal_form": w.pretty(),
                "result": result,
                "certificate_facts": facts,
                "config": config_json(g, json!({ "command": "order", "limit": limit })),
            });
            Ok(Output::clean(pretty(&v)))
        }
        Command::Portrait { word, depth } => {
            let fmt = require_format(g, &[Format::Dot, Format::Json])?;
            let w = parse_word(word)?;
            let p = portrait(&w, *depth);
            let text = match fmt {
                Format::Json => {
                    let levels: Vec<Vec<u8>> = p
                        .levels
                        .iter()
                        .map(|l| l.iter().map(|r| r.value()).collect())
                        .collect();
                    pretty(&json!({ "word": word, "depth": depth, "levels": levels }))
                }
                _ => p.to_dot(),
            };
            Ok(Output::clean(text))
        }
        Command::Inject { n } => {
            require_format(g, &[Format::Json])?;
            cmd_inject(g, *n)
        }
        Command::Cache { action } => {
            require_format(g, &[Format::Json])?;
            cmd_cache(g, action).map(Output::clean)
        }
    }
}

/// Returns the requested format, or the first allowed one by default.
fn require_format(g: &Global, allowed: &[Format]) -> Result<Format, Failure> {
    match g.format {
        None => Ok(allowed[0]),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(Failure::Usage(format!(
            "format {f:?} is not available for this command"
        ))),
    }
}

fn parse_word(s: &str) -> Result<NormalWord, Failure> {
    NormalWord::parse(s).map_err(|e| Failure::Usage(format!("bad word {s:?}: {e}")))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn config_json(g: &Global, extra: Value) -> Value {
    let mut v = json!({
        "seed": g.seed,
        "max_candidates": g.max_candidates,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, extra) {
        dst.extend(src);
    }
    v
}

fn cache_path(g: &Global) -> Option<PathBuf> {
    g.cache
        .clone()
        .or_else(|| g.cache_dir.as_ref().map(|d| d.join(CACHE_FILE)))
}

fn enum_config(g: &Global) -> EnumConfig {
    EnumConfig {
        max_candidates: g.max_candidates,
        workers: g.workers.unwrap_or(0) as usize,
    }
}

fn ball(g: &Global, radius: u32) -> Result<BallTable, Error> {
    let path = cache_path(g);
    if let Some(dir) = path.as_ref().and_then(|p| p.parent()) {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    metric_enum::load_or_build(path.as_deref(), radius, &enum_config(g))
}

fn cmd_growth(g: &Global, max_len: u32, overlay: bool) -> Result<Output, Failure> {
    let fmt = require_format(g, &[Format::Csv, Format::Json])?;
    let (table, limit) = match ball(g, max_len) {
        Ok(t) => (t, None),
        Err(Error::ResourceLimit {
            candidates,
            cap,
            partial,
        }) => {
            let msg = format!(
                "resource limit: radius {max_len} needs {candidates} candidates, cap is {cap}; \
                 emitting rows up to n = {}",
                partial.radius()
            );
            (*partial, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    // an empty partial table means not even radius 0 fit
    let series = if table.is_empty() {
        GrowthSeries {
            radius: 0,
            gamma: vec![],
            beta: vec![],
            delta: vec![],
        }
    } else {
        growth(&table)?
    };
    let text = match fmt {
        Format::Json => {
            let v = json!({
                "growth": series,
                "lower_bound": (0..series.gamma.len()).map(|n| lower(n as u32)).collect::<Vec<_>>(),
                "config": config_json(g, json!({ "command": "growth", "max_len": max_len })),
            });
            pretty(&v)
        }
        _ => growth_csv(&series, overlay)?,
    };
    match limit {
        None => Ok(Output::clean(text)),
        Some(msg) => {
            emit(g, &text)?;
            Err(Failure::Limit(msg))
        }
    }
}

fn lower(n: u32) -> Option<f64> {
    (n >= 2).then(|| bounds::lower_bound(n as f64).expect("n ≥ 2"))
}

fn growth_csv(s: &GrowthSeries, overlay: bool) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n", "gamma", "beta", "delta", "lower_bound"];
    if overlay {
        header.extend(["log_gamma", "log_lower_bound", "log_upper_bound"]);
    }
    let csv_err = |e: csv::Error| Failure::Other(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    let params = BoundParams::default();
    for n in 0..s.gamma.len() {
        let lb = lower(n as u32);
        let mut row = vec![
            n.to_string(),
            s.gamma[n].to_string(),
            s.beta[n].to_string(),
            s.delta[n].to_string(),
            lb.map(|x| x.to_string()).unwrap_or_default(),
        ];
        if overlay {
            row.push((s.gamma[n] as f64).ln().to_string());
            row.push(lb.map(|x| x.ln().to_string()).unwrap_or_default());
            row.push(if n >= 3 {
                bounds::log_f_upper(n as f64, &params).to_string()
            } else {
                String::new()
            });
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}

fn cmd_lemma(
    g: &Global,
    name: Lemma,
    max_len: Option<u32>,
    samples: Option<usize>,
) -> Result<LemmaReport, Failure> {
    let len = |default: u32| max_len.unwrap_or(default);
    let rep = match name {
        Lemma::MotSansRed => checks::mot_sans_red(&ball(g, len(6))?, len(6), PivotRange::TwoSided)?,
        Lemma::MotSansRedPrinted => {
            checks::mot_sans_red(&ball(g, len(6))?, len(6), PivotRange::Printed)?
        }
        Lemma::CaraI => checks::cara_i(&ball(g, len(6))?, len(6))?,
        Lemma::Permut => checks::permut(len(5)),
        Lemma::WordsNotInI => checks::words_not_in_i(23, 40, samples.unwrap_or(100), g.seed),
        Lemma::StructureI => checks::structure_i(&ball(g, len(6))?, len(6), 6)?,
        Lemma::DeltaBounded => {
            let t = ball(g, len(7))?;
            checks::delta_bounded(&growth(&t)?, 5)
        }
        Lemma::EquivSuites => checks::equiv_suites(len(12) as usize),
        Lemma::Rel123 => checks::rel_123(len(12) as usize, samples.unwrap_or(1000), g.seed),
        Lemma::WSplit => {
            let t = ball(g, len(6))?;
            checks::w_split(&t, &growth(&t)?, len(6))?
        }
    };
    Ok(rep)
}

fn cmd_bounds(g: &Global, d: u32, m: u32, limit: f64) -> Result<String, Failure> {
    let p = BoundParams::with_dm(d, m);
    let s = bounds::find_n(&p, limit).map_err(|e| match e {
        Error::Domain(m) => Failure::Usage(m),
        e => e.into(),
    })?;
    let samples: Vec<Value> = bounds::log_spaced(3.0, limit, 25)
        .into_iter()
        .map(|n| json!({ "n": n, "f": bounds::f_lf(n, &p).ok() }))
        .collect();
    let v = json!({
        "params": p,
        "N": s.n,
        "search": s,
        "samples": samples,
        "config": config_json(g, json!({ "command": "bounds", "d": d, "m": m, "limit": limit })),
    });
    Ok(pretty(&v))
}

/// Images of `(B(n) ∩ G')³`, checked for pairwise distinctness, membership in
/// `G'` and length at most `6n`. Lengths use the ball of radius `3n`.
fn cmd_inject(g: &Global, n: u32) -> Result<Output, Failure> {
    let table = ball(g, 3 * n)?;
    let inputs: Vec<NormalWord> = table
        .entries()
        .iter()
        .filter(|e| e.minlen <= n && in_commutator_subgroup(&e.rep))
        .map(|e| e.rep.clone())
        .collect();
    let bound = 6 * n;
    let mut keys = std::collections::HashSet::new();
    let (mut outside, mut long) = (0u64, Vec::new());
    for x in &inputs {
        for y in &inputs {
            for z in &inputs {
                let h = triple_inject(x, y, z)?;
                if !in_commutator_subgroup(&h) {
                    outside += 1;
                }
                if h.len() > bound as usize && !length_at_most(&h, bound, &table)? {
                    long.push(json!([x.to_raw(), y.to_raw(), z.to_raw()]));
                }
                keys.insert(key(&h));
            }
        }
    }
    let triples = inputs.len().pow(3);
    let violations = keys.len() != triples || outside > 0 || !long.is_empty();
    let v = json!({
        "n": n,
        "inputs": inputs.len(),
        "triples": triples,
        "distinct_images": keys.len(),
        "outside_commutator_subgroup": outside,
        "length_bound": bound,
        "longer_than_bound": long.len(),
        "long_triples": long,
        "config": config_json(g, json!({ "command": "inject", "n": n })),
    });
    Ok(Output {
        text: pretty(&v),
        violations,
    })
}

fn cmd_cache(g: &Global, action: &CacheAction) -> Result<String, Failure> {
    let path = cache_path(g)
        .ok_or_else(|| Failure::Usage("no cache path: pass --cache or set FG_CACHE_DIR".into()))?;
    let table = match action {
        CacheAction::Build { max_len } => ball(g, *max_len)?,
        CacheAction::Info => metric_enum::load_table(&path)?,
    };
    let spheres: Vec<usize> = (0..=table.radius())
        .map(|n| table.sphere(n).len())
        .collect();
    let v = json!({
        "path": path,
        "version": metric_enum::CACHE_VERSION,
        "radius": table.radius(),
        "elements": table.len(),
        "sphere_sizes": spheres,
    });
    Ok(pretty(&v))
}
