use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use trimoments::moments::{
    eta_moment, triangular_moment_closed_form, OperatorSpec, VarianceProfile,
};
use trimoments::partitions::{adapted_partitions, enumerate_nc2, AdaptMode, PairPartition};
use trimoments::randmat::{
    ensemble_prediction, estimate_moment, report_csv, EnsembleKind, EnsembleSpec, ReportRow,
};
use trimoments::rational::{self, Rational};
use trimoments::trees::{
    enumerate_alternating, enumerate_ordered_trees, partition_to_tree, tree_to_partition,
    AlternationType, OrderedTree,
};
use trimoments::verify::{self, VerifyConfig};
use trimoments::volumes::{count_linear_extensions, region_constraints};
use trimoments::word::StarWord;
use trimoments::Limits;

const THREADS_VAR: &str = "TRIMOMENTS_THREADS";

/// Exact moments of triangular operators, via noncrossing pairings, color
/// posets and alternating trees.
#[derive(Parser, Debug)]
#[command(name = "trimoments", version, about)]
struct Cli {
    /// Lift the default size limits (m <= 20, vertices <= 10, poset <= 22).
    #[arg(long, global = true)]
    unsafe_limits: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List noncrossing pair partitions, optionally only those adapted to a word.
    Enumerate {
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        word: WordArg,
        #[arg(long, value_enum, default_value_t = Mode::Eta)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Color-poset constraints, extension counts and volumes of adapted partitions.
    Volume {
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        word: WordArg,
        #[arg(long, value_enum, default_value_t = Mode::Eta)]
        mode: Mode,
        #[arg(long)]
        per_partition: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Exact moment of a word in T and T*.
    Moment {
        #[arg(long, value_enum, default_value_t = Operator::Triangular)]
        operator: Operator,
        #[command(flatten)]
        word: WordArg,
        /// Variance profile JSON, required with `--operator profile`.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Compare with n^n/(n+1)!; the word defaults to (*1,1)^n.
        #[arg(long, value_name = "N")]
        closed_form: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Ordered tree shapes or alternating labeled trees.
    Trees {
        #[arg(long)]
        vertices: usize,
        #[arg(long, value_enum)]
        alternating: Option<Alternation>,
        #[arg(long)]
        count_only: bool,
        /// Pair each tree with its noncrossing pair partition.
        #[arg(long, conflicts_with = "count_only")]
        bijection: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Monte Carlo estimate of a moment from finite random matrices.
    Simulate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Matrix size; a comma-separated list gives one row per size.
        #[arg(long, value_delimiter = ',', default_value = "200")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        word: WordArg,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SimFormat::Json)]
        format: SimFormat,
    },
    /// Run the acceptance checks and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run only these checks (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Args, Debug)]
struct WordArg {
    /// Comma-separated letters, `*<label>` for T*, `<label>` for T.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "tt_power")]
    word: Option<String>,
    /// Shorthand for the word (*1,1)^n.
    #[arg(long, value_name = "N")]
    tt_power: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Eta,
    Creation,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SimFormat {
    Json,
    Table,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Operator {
    Triangular,
    LowerTriangular,
    Circular,
    Profile,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Alternation {
    #[value(name = "typeI", alias = "typei", alias = "I")]
    TypeI,
    #[value(name = "typeII", alias = "typeii", alias = "II")]
    TypeII,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    StrictUpper,
    Iid,
    Profile,
}

impl From<Mode> for AdaptMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Eta => AdaptMode::Eta,
            Mode::Creation => AdaptMode::Creation,
        }
    }
}

impl From<Alternation> for AlternationType {
    fn from(a: Alternation) -> Self {
        match a {
            Alternation::TypeI => AlternationType::TypeI,
            Alternation::TypeII => AlternationType::TypeII,
        }
    }
}

enum Failure {
    Usage(String),
    Assertion(String),
}

impl From<trimoments::Error> for Failure {
    fn from(e: trimoments::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        usage_exit(msg);
    }
    let limits = if cli.unsafe_limits {
        Limits::relaxed()
    } else {
        Limits::default()
    };
    match dispatch(cli.cmd, &limits) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => usage_exit(msg),
        Err(Failure::Assertion(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn usage_exit(msg: String) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(cmd: Cmd, limits: &Limits) -> Run {
    match cmd {
        Cmd::Enumerate {
            m,
            word,
            mode,
            format,
        } => enumerate(m, word.parse()?, mode.into(), format, limits),
        Cmd::Volume {
            m,
            word,
            mode,
            per_partition,
            format,
        } => {
            let w = word.require()?;
            check_length(m, &w)?;
            volume(&w, mode.into(), per_partition, format, limits)
        }
        Cmd::Moment {
            operator,
            word,
            profile,
            closed_form,
            format,
        } => {
            let w = match (word.parse()?, closed_form) {
                (Some(w), Some(n)) if w != StarWord::tt_power(n) => {
                    return Err(Failure::Usage(format!(
                        "--closed-form {n} needs the word (*1,1)^{n}, got {w}"
                    )))
                }
                (Some(w), _) => w,
                (None, Some(n)) => StarWord::tt_power(n),
                (None, None) => {
                    return Err(Failure::Usage(
                        "one of --word or --tt-power is required".into(),
                    ))
                }
            };
            let spec = operator_spec(operator, profile.as_ref())?;
            moment(&w, &spec, operator, closed_form, format, limits)
        }
        Cmd::Trees {
            vertices,
            alternating,
            count_only,
            bijection,
            format,
        } => trees(
            vertices,
            alternating.map(Into::into),
            count_only,
            bijection,
            format,
            limits,
        ),
        Cmd::Simulate {
            kind,
            n,
            trials,
            seed,
            word,
            profile,
            format,
        } => {
            let w = word.require()?;
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            let kind = ensemble_kind(kind, profile.as_ref())?;
            let specs = n
                .iter()
                .map(|&n| EnsembleSpec::new(n, kind.clone()))
                .collect::<Result<Vec<_>, _>>()?;
            simulate(&w, &kind, &specs, trials, seed, format, limits)
        }
        Cmd::Verify {
            max_n,
            seed,
            only,
            format,
        } => run_verify(max_n, seed, &only, format),
    }
}

impl WordArg {
    fn parse(&self) -> Result<Option<StarWord>, Failure> {
        match (&self.word, self.tt_power) {
            (Some(s), _) => Ok(Some(s.parse()?)),
            (None, Some(n)) => Ok(Some(StarWord::tt_power(n))),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<StarWord, Failure> {
        self.parse()?
            .ok_or_else(|| Failure::Usage("one of --word or --tt-power is required".into()))
    }
}

fn check_length(m: Option<usize>, w: &StarWord) -> Result<(), Failure> {
    match m {
        Some(m) if m != w.len() => Err(Failure::Usage(format!(
            "--m {m} does not match the word length {}",
            w.len()
        ))),
        _ => Ok(()),
    }
}

fn read_profile(path: Option<&PathBuf>) -> Result<VarianceProfile, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("--profile <file> is required here".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(VarianceProfile::from_json(&text)?)
}

fn operator_spec(op: Operator, profile: Option<&PathBuf>) -> Result<OperatorSpec, Failure> {
    if op != Operator::Profile && profile.is_some() {
        return Err(Failure::Usage(
            "--profile only applies to --operator profile".into(),
        ));
    }
    Ok(match op {
        Operator::Triangular => OperatorSpec::Triangular,
        Operator::LowerTriangular => OperatorSpec::LowerTriangular,
        Operator::Circular => OperatorSpec::Circular,
        Operator::Profile => OperatorSpec::Profile(read_profile(profile)?),
    })
}

fn ensemble_kind(kind: Kind, profile: Option<&PathBuf>) -> Result<EnsembleKind, Failure> {
    match kind {
        Kind::Profile => Ok(EnsembleKind::BlockProfile(read_profile(profile)?)),
        _ if profile.is_some() => Err(Failure::Usage(
            "--profile only applies to --kind profile".into(),
        )),
        Kind::StrictUpper => Ok(EnsembleKind::StrictUpper),
        Kind::Iid => Ok(EnsembleKind::IidSquare),
    }
}

fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("json values serialize");
    s.push('\n');
    s
}

fn rat(q: &Rational) -> Value {
    rational::to_json(q)
}

fn mode_name(mode: AdaptMode) -> &'static str {
    match mode {
        AdaptMode::Eta => "eta",
        AdaptMode::Creation => "creation",
    }
}

fn enumerate(
    m: Option<usize>,
    word: Option<StarWord>,
    mode: AdaptMode,
    format: Format,
    limits: &Limits,
) -> Run {
    let parts = match (&word, m) {
        (Some(w), _) => {
            check_length(m, w)?;
            adapted_partitions(w, mode, limits)?
        }
        (None, Some(m)) => enumerate_nc2(m, limits)?,
        (None, None) => return Err(Failure::Usage("give --m or a word".into())),
    };
    let m = word.as_ref().map_or(m.unwrap_or(0), |w| w.len());
    if format == Format::Table {
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            let _ = writeln!(out, "{:>4}  {}  outer={:?}", i + 1, p, p.outer_map());
        }
        let _ = writeln!(out, "{} partitions", parts.len());
        return Ok(out);
    }
    let listing: Vec<Value> = parts
        .iter()
        .map(|p| json!({ "partition": p, "outer": p.outer_map() }))
        .collect();
    let mut v = json!({ "m": m });
    if let Some(w) = &word {
        v["word"] = json!(w.to_string());
        v["mode"] = json!(mode_name(mode));
    }
    v["count"] = json!(parts.len());
    v["partitions"] = Value::Array(listing);
    Ok(to_json_text(&v))
}

struct VolumeRow {
    partition: PairPartition,
    constraints: Vec<(usize, usize)>,
    extensions: num_bigint::BigUint,
    volume: Rational,
}

fn volume(
    w: &StarWord,
    mode: AdaptMode,
    per_partition: bool,
    format: Format,
    limits: &Limits,
) -> Run {
    let parts = adapted_partitions(w, mode, limits)?;
    let mut rows = Vec::with_capacity(parts.len());
    for p in parts {
        let q = region_constraints(&p, w, mode)?;
        let extensions = count_linear_extensions(&q, limits)?;
        let volume = rational::from_counts(&extensions, &trimoments::factorial(q.size()));
        rows.push(VolumeRow {
            constraints: q.constraints().to_vec(),
            partition: p,
            extensions,
            volume,
        });
    }
    let total: Rational = rows.iter().map(|r| &r.volume).sum();
    if format == Format::Table {
        let mut out = String::new();
        if per_partition {
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{}  constraints={:?}  extensions={}  volume={}",
                    r.partition, r.constraints, r.extensions, r.volume
                );
            }
        }
        let _ = writeln!(out, "{} partitions, total volume {}", rows.len(), total);
        return Ok(out);
    }
    let mut v = json!({
        "word": w.to_string(),
        "mode": mode_name(mode),
        "count": rows.len(),
        "total": rat(&total),
    });
    if per_partition {
        v["partitions"] = rows
            .iter()
            .map(|r| {
                json!({
                    "partition": r.partition,
                    "constraints": r.constraints,
                    "extensions": r.extensions.to_string(),
                    "volume": rat(&r.volume),
                })
            })
            .collect();
    }
    Ok(to_json_text(&v))
}

fn moment(
    w: &StarWord,
    spec: &OperatorSpec,
    op: Operator,
    closed_form: Option<usize>,
    format: Format,
    limits: &Limits,
) -> Run {
    let res = eta_moment(w, spec, limits)?;
    let closed = closed_form.map(triangular_moment_closed_form);
    if let (Some(c), Operator::Triangular) = (&closed, op) {
        if *c != res.value {
            return Err(Failure::Assertion(format!(
                "partition sum {} differs from closed form {}",
                res.value, c
            )));
        }
    }
    if format == Format::Table {
        let mut out = String::new();
        for (p, v) in &res.contributions {
            let _ = writeln!(out, "{p}  {v}");
        }
        let _ = writeln!(out, "value {}", res.value);
        if let Some(c) = &closed {
            let _ = writeln!(out, "closed form {c}");
        }
        return Ok(out);
    }
    let mut v = res.to_json();
    if let Some(c) = &closed {
        v["closed_form"] = rat(c);
    }
    Ok(to_json_text(&v))
}

fn trees(
    vertices: usize,
    alternating: Option<AlternationType>,
    count_only: bool,
    bijection: bool,
    format: Format,
    limits: &Limits,
) -> Run {
    if vertices == 0 {
        return Err(Failure::Usage("--vertices must be at least 1".into()));
    }
    let shape_pair = |t: &OrderedTree| json!({ "tree": t, "partition": tree_to_partition(t) });
    let (count, items): (usize, Vec<Value>) = match alternating {
        Some(which) => {
            let labeled = enumerate_alternating(vertices - 1, which, limits)?;
            let items = labeled
                .iter()
                .map(|t| {
                    if bijection {
                        json!({ "tree": t, "partition": tree_to_partition(t.tree()) })
                    } else {
                        json!(t)
                    }
                })
                .collect();
            (labeled.len(), items)
        }
        None => {
            let shapes = enumerate_ordered_trees(vertices, limits)?;
            if bijection {
                // the inverse direction must land back on the same shape
                for t in &shapes {
                    if partition_to_tree(&tree_to_partition(t)) != *t {
                        return Err(Failure::Assertion(format!(
                            "bijection round trip failed for {}",
                            tree_to_partition(t)
                        )));
                    }
                }
            }
            let items = shapes
                .iter()
                .map(|t| if bijection { shape_pair(t) } else { json!(t) })
                .collect();
            (shapes.len(), items)
        }
    };
    if count_only {
        return Ok(format!("{count}\n"));
    }
    if format == Format::Table {
        let mut out = String::new();
        for it in &items {
            let _ = writeln!(out, "{}", serde_json::to_string(it).expect("serializes"));
        }
        let _ = writeln!(out, "{count} trees");
        return Ok(out);
    }
    let mut v = json!({ "vertices": vertices });
    if let Some(which) = alternating {
        v["alternating"] = json!(match which {
            AlternationType::TypeI => "typeI",
            AlternationType::TypeII => "typeII",
        });
    }
    v["count"] = json!(count);
    v["trees"] = Value::Array(items);
    Ok(to_json_text(&v))
}

fn simulate(
    w: &StarWord,
    kind: &EnsembleKind,
    specs: &[EnsembleSpec],
    trials: usize,
    seed: u64,
    format: SimFormat,
    limits: &Limits,
) -> Run {
    let exact = ensemble_prediction(w, kind, limits)?;
    let exact_f = rational::to_f64(&exact);
    let estimates: Vec<_> = specs
        .iter()
        .map(|s| estimate_moment(w, s, trials, seed))
        .collect();
    match format {
        SimFormat::Csv => {
            let rows: Vec<ReportRow> = estimates
                .iter()
                .map(|e| ReportRow {
                    n: e.n,
                    r: kind.resolution(),
                    trials,
                    seed,
                    estimate: e.mean,
                    stderr: e.stderr,
                    exact_num: exact.numer().to_string(),
                    exact_den: exact.denom().to_string(),
                    abs_gap: (e.mean - exact_f).abs(),
                })
                .collect();
            Ok(report_csv(&rows)?)
        }
        SimFormat::Table => {
            let mut out = format!("word {w}, exact {exact} ≈ {exact_f:.6}\n");
            let _ = writeln!(
                out,
                "{:>6} {:>8} {:>12} {:>10} {:>10}",
                "n", "trials", "estimate", "stderr", "gap"
            );
            for e in &estimates {
                let se = e.stderr.map_or("-".to_string(), |s| format!("{s:.6}"));
                let _ = writeln!(
                    out,
                    "{:>6} {:>8} {:>12.6} {:>10} {:>10.6}",
                    e.n,
                    e.trials,
                    e.mean,
                    se,
                    (e.mean - exact_f).abs()
                );
            }
            Ok(out)
        }
        SimFormat::Json => {
            let runs: Vec<Value> = estimates
                .iter()
                .map(|e| json!({ "estimate": e, "abs_gap": (e.mean - exact_f).abs() }))
                .collect();
            let v = json!({
                "word": w.to_string(),
                "seed": seed,
                "trials": trials,
                "exact": rat(&exact),
                "exact_f64": exact_f,
                "runs": runs,
            });
            Ok(to_json_text(&v))
        }
    }
}

fn run_verify(max_n: usize, seed: u64, only: &[usize], format: Format) -> Run {
    let cfg = VerifyConfig { max_n, seed };
    let ids = if only.is_empty() {
        verify::criterion_ids()
    } else {
        only.to_vec()
    };
    let mut results = Vec::with_capacity(ids.len());
    for id in ids {
        let r = verify::run_criterion(id, &cfg)
            .ok_or_else(|| Failure::Usage(format!("no check with id {id}")))?;
        results.push(r);
    }
    let all = results.iter().all(|r| r.passed);
    let out = if format == Format::Json {
        to_json_text(&json!({ "max_n": max_n, "seed": seed, "passed": all, "results": results }))
    } else {
        let mut out = String::new();
        for r in &results {
            let _ = writeln!(
                out,
                "{} {:>2}  {:<36} {:>7.2}s  {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.id,
                r.name,
                r.seconds,
                r.detail
            );
        }
        let passed = results.iter().filter(|r| r.passed).count();
        let _ = writeln!(out, "{passed}/{} passed", results.len());
        out
    };
    if all {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Assertion("verification failed".into()))
    }
}
