mod parse;

use std::error::Error as StdError;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use wzs_core::certificate::CertificateRecord;
use wzs_core::proofs::{extract_even_length, extract_z2, pigeonhole_witness, plus_minus_config};
use wzs_core::suite::{build_report, render_text, SuiteConfig};
use wzs_core::{
    compute_cached, compute_constant, find_subsequence, Cache, ConstantCertificate, ConstantKind,
    Error, ModuleSpec, SearchOptions, Sequence, SubseqConstraint, WeightConfig, Witness,
};

type AnyError = Box<dyn StdError>;

const EXIT_USAGE: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Parser)]
#[command(name = "wzs", version, about = "Exact weighted zero-sum constants over Z_m^r")]
struct Cli {
    /// Certificate cache directory [default: ./.wzs-cache]
    #[arg(long, global = true, env = "WZS_CACHE_DIR", value_name = "DIR")]
    cache_dir: Option<PathBuf>,

    /// Worker threads for parallel search
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Look for a weighted zero-sum subsequence
    Check(CheckArgs),
    /// Compute D, C or E exactly, with a certificate
    Compute(ComputeArgs),
    /// Run the claim suite and write report.json / report.txt
    Verify(VerifyArgs),
    /// Tabulate constants over a range of moduli
    Table(TableArgs),
    /// Run a constructive witness extractor
    #[command(subcommand)]
    Extract(ExtractCommand),
}

#[derive(Args)]
struct ModuleArgs {
    /// Modulus m
    #[arg(long = "mod", value_name = "M")]
    modulus: u32,

    /// Rank r
    #[arg(long, default_value_t = 1)]
    rank: u32,
}

#[derive(Args)]
struct WeightArgs {
    /// Weight set A, e.g. "+-1" or "1,2,-1"
    #[arg(long, allow_hyphen_values = true, value_name = "SET")]
    a: String,

    /// Weight set B; omit (or "none") for the classical unweighted-B setting
    #[arg(long, allow_hyphen_values = true, value_name = "SET")]
    b: Option<String>,
}

impl WeightArgs {
    fn config(&self, modulus: u32) -> Result<WeightConfig, AnyError> {
        let a = parse::weight_set(&self.a).map_err(|e| format!("--a {e}"))?;
        let b = match self.b.as_deref().map(str::trim) {
            None | Some("none") => None,
            Some(text) => Some(parse::weight_set(text).map_err(|e| format!("--b {e}"))?),
        };
        let cfg = WeightConfig::new(modulus, &a, b.as_deref())?;
        if cfg.collapsed_duplicates() {
            eprintln!("warning: duplicate weights mod {modulus} collapsed: {cfg}");
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    module: ModuleArgs,

    #[command(flatten)]
    weights: WeightArgs,

    /// Require a subsequence of exactly this length
    #[arg(long, value_name = "L", conflicts_with_all = ["full", "consecutive"])]
    exact_len: Option<usize>,

    /// Require the whole sequence
    #[arg(long, conflicts_with = "consecutive")]
    full: bool,

    /// Require consecutive terms
    #[arg(long)]
    consecutive: bool,

    /// Print JSON instead of text
    #[arg(long)]
    json: bool,

    /// Terms, e.g. 0,1,2,4 or (1,0),(0,1) or 1:0,0:1
    #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
    sequence: Vec<String>,
}

#[derive(Args)]
struct ComputeArgs {
    /// D, C or E
    kind: ConstantKind,

    #[command(flatten)]
    module: ModuleArgs,

    #[command(flatten)]
    weights: WeightArgs,

    /// Longest free sequence to look for
    #[arg(long)]
    cap: Option<usize>,

    /// Disable symmetry reduction at the root
    #[arg(long)]
    no_symmetry: bool,

    /// Abort after this many search nodes
    #[arg(long, value_name = "N")]
    max_nodes: Option<u64>,

    /// Neither read nor write the cache
    #[arg(long)]
    no_cache: bool,

    /// Print the certificate as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// TOML file overriding the default ranges
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Where report.json and report.txt are written
    #[arg(long, default_value = ".", value_name = "DIR")]
    out_dir: PathBuf,

    /// Neither read nor write the cache
    #[arg(long)]
    no_cache: bool,

    /// Do not print the table
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Args)]
struct TableArgs {
    /// Comma-separated kinds, e.g. D,E
    kinds: String,

    #[command(flatten)]
    weights: WeightArgs,

    /// Moduli: 3..8 (inclusive), 3,5,7, or empty
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    mods: String,

    /// Rank r
    #[arg(long, default_value_t = 1)]
    rank: u32,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Abort each constant after this many search nodes
    #[arg(long, value_name = "N")]
    max_nodes: Option<u64>,

    /// Neither read nor write the cache
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum ExtractCommand {
    /// Length-T zero-sum for A={1,-1}, B={1} from a long enough sequence
    EvenLength {
        #[command(flatten)]
        module: ModuleArgs,
        /// Target length [default: m]
        #[arg(long)]
        target: Option<usize>,
        /// Terms of the input sequence
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        sequence: Vec<String>,
    },
    /// Even-length zero-sum over Z_2^r with A=B={1}
    Z2 {
        /// Rank r
        #[arg(long, default_value_t = 1)]
        rank: u32,
        /// Terms of the input sequence
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        sequence: Vec<String>,
    },
    /// Equal-sum split of a length-2k sequence with 2^k >= |M|
    Pigeonhole {
        #[command(flatten)]
        module: ModuleArgs,
        /// Terms of the input sequence
        #[arg(required = true, allow_hyphen_values = true, num_args = 1..)]
        sequence: Vec<String>,
    },
}

fn read_sequence(parts: &[String], module: &ModuleSpec) -> Result<Sequence, AnyError> {
    let text = parts.join(",");
    parse::sequence(&text, module).map_err(|e| format!("sequence {e}").into())
}

fn signed(ws: &[wzs_core::Scalar], m: u32) -> String {
    let v: Vec<String> = ws.iter().map(|w| w.signed(m).to_string()).collect();
    format!("({})", v.join(", "))
}

fn print_witness(w: &Witness, s: &Sequence, m: u32) {
    let idx: Vec<String> = w.indices.iter().map(usize::to_string).collect();
    println!("indices: {}", idx.join(" "));
    println!("terms: {}", s.subsequence(&w.indices));
    println!("a-weights: {}", signed(&w.a_weights, m));
    if let Some(b) = &w.b_weights {
        println!("b-weights: {}", signed(b, m));
    }
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode, AnyError> {
    let module = ModuleSpec::new(args.module.modulus, args.module.rank)?;
    let cfg = args.weights.config(module.modulus())?;
    let s = read_sequence(&args.sequence, &module)?;
    let constraint = match (args.exact_len, args.full, args.consecutive) {
        (Some(l), _, _) => SubseqConstraint::ExactLength(l),
        (None, true, _) => SubseqConstraint::FullSequence,
        (None, false, true) => SubseqConstraint::ConsecutiveAnyNonempty,
        (None, false, false) => SubseqConstraint::AnyNonempty,
    };
    let found = find_subsequence(&s, &module, &cfg, constraint)?;
    if args.json {
        let out = json!({
            "present": found.is_some(),
            "subsequence": found.as_ref().map(|w| s.subsequence(&w.indices)),
            "witness": found,
        });
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        match &found {
            Some(w) => {
                println!("present");
                print_witness(w, &s, module.modulus());
            }
            None => println!("absent"),
        }
    }
    Ok(if found.is_some() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn compute(
    cache: Option<&Cache>,
    module: &ModuleSpec,
    cfg: &WeightConfig,
    kind: ConstantKind,
    options: &SearchOptions,
) -> Result<(ConstantCertificate, Option<&'static str>), Error> {
    match cache {
        Some(c) => compute_cached(c, module, cfg, kind, options)
            .map(|(cert, hit)| (cert, Some(if hit { "hit" } else { "stored" }))),
        None => compute_constant(module, cfg, kind, options).map(|c| (c, None)),
    }
}

fn incomplete(e: &Error) -> Option<String> {
    match e {
        Error::SearchIncomplete(cert) => Some(format!(
            "search incomplete: {}_{{A,B}}({}) >= {}, free sequence {}",
            cert.kind, cert.module, cert.value, cert.extremal
        )),
        Error::NodeBudgetExceeded(n) => Some(format!("search incomplete: node budget {n} exhausted")),
        _ => None,
    }
}

fn cmd_compute(args: &ComputeArgs, cache: &Cache) -> Result<ExitCode, AnyError> {
    let module = ModuleSpec::new(args.module.modulus, args.module.rank)?;
    let cfg = args.weights.config(module.modulus())?;
    let options = SearchOptions {
        cap: args.cap,
        symmetry: !args.no_symmetry,
        max_nodes: args.max_nodes,
        ..SearchOptions::default()
    };
    // A cap or budget changes what a run can prove, so those runs bypass the cache.
    let use_cache = !args.no_cache && args.cap.is_none() && args.max_nodes.is_none() && !args.no_symmetry;
    let (cert, cache_state) = match compute(use_cache.then_some(cache), &module, &cfg, args.kind, &options) {
        Ok(v) => v,
        Err(e) => {
            if let Some(msg) = incomplete(&e) {
                eprintln!("{msg}");
                return Ok(ExitCode::from(EXIT_INCOMPLETE));
            }
            return Err(e.into());
        }
    };
    if args.json {
        let record = CertificateRecord::from_certificate(&cert).stamped();
        println!("{}", serde_json::to_string_pretty(&record)?);
    } else {
        println!("{}_{{A,B}}({module}) with {cfg}", args.kind);
        println!("value: {}", cert.value);
        println!("extremal: {}", cert.extremal);
        println!("nodes explored: {}", cert.stats.nodes_explored);
        if !cert.stats.symmetries_used.is_empty() {
            println!("symmetries: {}", cert.stats.symmetries_used.join(", "));
        }
        if let Some(state) = cache_state {
            println!("cache: {state} {}", cache.dir().display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs, cache: &Cache) -> Result<ExitCode, AnyError> {
    let cfg: SuiteConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => SuiteConfig::default(),
    };
    let report = build_report(&cfg, (!args.no_cache).then_some(cache));
    let text = render_text(&report);
    fs::create_dir_all(&args.out_dir)?;
    let mut json_text = serde_json::to_string_pretty(&report)?;
    json_text.push('\n');
    fs::write(args.out_dir.join("report.json"), json_text)?;
    fs::write(args.out_dir.join("report.txt"), &text)?;
    if !args.quiet {
        print!("{text}");
    }
    if report.summary.skipped > 0 {
        eprintln!("warning: {} rows skipped", report.summary.skipped);
    }
    Ok(if report.has_violations() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_table(args: &TableArgs, cache: &Cache) -> Result<ExitCode, AnyError> {
    let kinds: Vec<ConstantKind> = args
        .kinds
        .split(',')
        .map(|k| k.parse::<ConstantKind>())
        .collect::<Result<_, _>>()?;
    let mods = parse::modulus_list(&args.mods).map_err(|e| format!("--mods {e}"))?;
    let options = SearchOptions {
        max_nodes: args.max_nodes,
        ..SearchOptions::default()
    };
    let use_cache = !args.no_cache && args.max_nodes.is_none();
    let mut rows: Vec<(u32, ConstantKind, usize)> = Vec::new();
    for &m in &mods {
        let module = ModuleSpec::new(m, args.rank)?;
        let cfg = args.weights.config(m)?;
        for &kind in &kinds {
            match compute(use_cache.then_some(cache), &module, &cfg, kind, &options) {
                Ok((cert, _)) => rows.push((m, kind, cert.value)),
                Err(e) => {
                    if let Some(msg) = incomplete(&e) {
                        eprintln!("{msg}");
                        return Ok(ExitCode::from(EXIT_INCOMPLETE));
                    }
                    return Err(e.into());
                }
            }
        }
    }
    match args.format {
        Format::Csv => {
            println!("modulus,kind,value");
            for (m, k, v) in &rows {
                println!("{m},{k},{v}");
            }
        }
        Format::Json => {
            let out: Vec<_> = rows
                .iter()
                .map(|(m, k, v)| json!({"modulus": m, "kind": k, "value": v}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            println!("{:>7}  {:>4}  {:>5}", "modulus", "kind", "value");
            for (m, k, v) in &rows {
                println!("{m:>7}  {k:>4}  {v:>5}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_extract(cmd: &ExtractCommand, cache: &Cache) -> Result<ExitCode, AnyError> {
    let (module, s, result) = match cmd {
        ExtractCommand::EvenLength {
            module,
            target,
            sequence,
        } => {
            let module = ModuleSpec::new(module.modulus, module.rank)?;
            let s = read_sequence(sequence, &module)?;
            let cfg = plus_minus_config(&module);
            let (d, _) = compute(Some(cache), &module, &cfg, ConstantKind::D, &SearchOptions::default())?;
            let target = target.unwrap_or(module.modulus() as usize);
            let w = extract_even_length(&s, &module, target, d.value);
            (module, s, w)
        }
        ExtractCommand::Z2 { rank, sequence } => {
            let module = ModuleSpec::new(2, *rank)?;
            let s = read_sequence(sequence, &module)?;
            let (d, _) = compute(
                Some(cache),
                &module,
                &WeightConfig::ones(2),
                ConstantKind::D,
                &SearchOptions::default(),
            )?;
            let w = extract_z2(&s, &module, d.value);
            (module, s, w)
        }
        ExtractCommand::Pigeonhole { module, sequence } => {
            let module = ModuleSpec::new(module.modulus, module.rank)?;
            let s = read_sequence(sequence, &module)?;
            let w = pigeonhole_witness(&s, &module);
            (module, s, w)
        }
    };
    match result {
        Ok(w) => {
            print_witness(&w, &s, module.modulus());
            Ok(ExitCode::SUCCESS)
        }
        Err(e @ Error::InternalProofViolation(_)) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let cache = Cache::resolve(cli.cache_dir.as_deref());
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Compute(a) => cmd_compute(a, &cache),
        Command::Verify(a) => cmd_verify(a, &cache),
        Command::Table(a) => cmd_table(a, &cache),
        Command::Extract(c) => cmd_extract(c, &cache),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_USAGE)
    })
}
