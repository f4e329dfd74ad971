use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ldp_minhash::dataset::{self, Dataset, RatingSchema};
use ldp_minhash::estimation::{rr_error_bound, Method};
use ldp_minhash::harness::mae::MaeConfig;
use ldp_minhash::harness::nn::NnConfig;
use ldp_minhash::harness::{run_mae_experiment, run_nn_experiment, write_csv, KvConfig, Mechanism};
use ldp_minhash::privacy::{difference_bound, max_noise_bound, LapParams, PrivacyParams, RrParams};
use ldp_minhash::seed::derive_seed;
use ldp_minhash::sketch_io::{check_compatible, estimate_released, SketchFile};
use ldp_minhash::{Error, HashFamily};

#[derive(Parser)]
#[command(name = "ldp-minhash", version, about = "Locally private MinHash sketches and Jaccard estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the privacy calculus (L, epsilon', p*, sensitivity, bounds)
    Params(ParamsArgs),
    /// Convert a ratings file into a dataset JSON file
    Ingest(IngestArgs),
    /// Sketch and release every user of a dataset
    Sketch(SketchArgs),
    /// Estimate similarities between users of two sketch files
    Estimate(EstimateArgs),
    /// Mean-absolute-error sweep on synthetic pairs (CSV)
    Mae(MaeArgs),
    /// Nearest-neighbor recall on a dataset (CSV)
    Nn(NnArgs),
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(short = 'K', long = "functions")]
    num_functions: usize,
    #[arg(short = 'B', long)]
    buckets: u32,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    #[arg(long)]
    tau: u32,
    /// Failure probability for the utility bounds
    #[arg(long, default_value_t = 0.05)]
    delta_fail: f64,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    ratings: PathBuf,
    /// Column separator: tab, comma, space, or a single character
    #[arg(long, default_value = "tab")]
    separator: String,
    #[arg(long, default_value_t = 0)]
    user_col: usize,
    #[arg(long, default_value_t = 1)]
    item_col: usize,
    #[arg(long, default_value_t = 2)]
    value_col: usize,
    /// The file has no header row
    #[arg(long)]
    no_header: bool,
    /// Keep items rated at least this value
    #[arg(long, conflicts_with = "top_n")]
    threshold: Option<f64>,
    /// Keep each user's n highest-valued items
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_size: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SketchArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "rr")]
    mechanism: String,
    #[arg(short = 'K', long = "functions")]
    num_functions: usize,
    #[arg(short = 'B', long, default_value_t = 2)]
    buckets: u32,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    /// Minimum set size assumed by the privacy calculus (default: smallest user)
    #[arg(long)]
    tau: Option<u32>,
    /// Seed of the hash family shared by all users
    #[arg(long, default_value_t = 0)]
    family_seed: u64,
    /// Seed of the users' perturbation noise
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    first: PathBuf,
    second: PathBuf,
    /// Compare row i with row i instead of all pairs
    #[arg(long)]
    paired: bool,
    /// Clamp estimates to [0, 1] for presentation
    #[arg(long)]
    clamp: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MaeArgs {
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    taus: Option<String>,
    #[arg(long)]
    j_targets: Option<String>,
    #[arg(long)]
    ks: Option<String>,
    #[arg(long)]
    buckets: Option<String>,
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    mechanisms: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    universe: Option<String>,
    #[arg(long)]
    clamp: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NnArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    queries: Option<String>,
    #[arg(long)]
    k_true: Option<String>,
    #[arg(long)]
    depths: Option<String>,
    #[arg(long)]
    j_min: Option<String>,
    #[arg(long)]
    mechanisms: Option<String>,
    #[arg(long)]
    epsilons: Option<String>,
    #[arg(long)]
    ks: Option<String>,
    #[arg(long)]
    buckets: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn kv_with_overrides(config: Option<&Path>, overrides: &[(&str, &Option<String>)]) -> Result<KvConfig, Error> {
    let mut kv = match config {
        Some(p) => KvConfig::load(p)?,
        None => KvConfig::default(),
    };
    for (key, value) in overrides {
        if let Some(v) = value {
            kv.set(key, v.as_str());
        }
    }
    Ok(kv)
}

fn params(args: &ParamsArgs) -> Result<(), Error> {
    let pp = PrivacyParams::new(args.epsilon, args.delta, args.alpha, args.tau)?;
    let raw = difference_bound(args.num_functions, args.buckets, &pp)?;
    let rp = RrParams::new(args.num_functions, args.buckets, &pp)?;
    let lp = LapParams::new(args.num_functions, args.buckets, &pp)?;
    let mut out = open_output(None)?;
    writeln!(out, "K = {}", args.num_functions)?;
    writeln!(out, "B = {}", args.buckets)?;
    writeln!(out, "L_raw = {raw}")?;
    writeln!(out, "L = {}", rp.budget())?;
    writeln!(out, "epsilon_prime = {}", rp.epsilon_prime())?;
    writeln!(out, "p_star = {}", rp.keep_probability())?;
    writeln!(out, "sensitivity = {}", lp.sensitivity())?;
    writeln!(out, "laplace_scale = {}", lp.scale())?;
    match rr_error_bound(args.buckets, args.num_functions, rp.keep_probability(), args.delta_fail) {
        Ok(b) => writeln!(out, "rr_error_bound = {b}")?,
        Err(e) => writeln!(out, "rr_error_bound = undefined ({e})")?,
    }
    let noise = max_noise_bound(args.num_functions, args.delta_fail, lp.scale())?;
    writeln!(out, "max_noise_bound = {noise}")?;
    out.flush()?;
    Ok(())
}

fn parse_separator(s: &str) -> Result<u8, Error> {
    match s {
        "tab" | "\\t" => Ok(b'\t'),
        "comma" => Ok(b','),
        "space" => Ok(b' '),
        other if other.len() == 1 => Ok(other.as_bytes()[0]),
        other => Err(Error::InvalidParameter(format!("unsupported separator {other:?}"))),
    }
}

fn ingest(args: &IngestArgs) -> Result<(), Error> {
    let schema = RatingSchema {
        user_col: args.user_col,
        item_col: args.item_col,
        value_col: args.value_col,
        separator: parse_separator(&args.separator)?,
        has_header: !args.no_header,
    };
    let ratings = dataset::load_ratings(&args.ratings, &schema)?;
    let ds = match (args.threshold, args.top_n) {
        (_, Some(n)) => dataset::build_topn_vectors(&ratings, n)?,
        (Some(t), None) => dataset::build_threshold_vectors(&ratings, t)?,
        (None, None) => dataset::build_threshold_vectors(&ratings, f64::NEG_INFINITY)?,
    };
    let ds = dataset::filter_min_size(&ds, args.min_size.max(1));
    let stats = ds.size_stats();
    eprintln!(
        "{} ratings, {} items, {} users, set size mean {:.2} std {:.2}",
        ratings.triples.len(),
        ds.universe,
        stats.users,
        stats.mean,
        stats.std
    );
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{}", ds.to_json()?)?;
    out.flush()?;
    Ok(())
}

fn sketch(args: &SketchArgs) -> Result<(), Error> {
    let method: Method = args.mechanism.parse()?;
    let ds = Dataset::load_json(&args.dataset)?;
    let tau = match args.tau {
        Some(t) => t,
        None => ds.size_stats().min.max(1) as u32,
    };
    let privacy = match (method, args.epsilon) {
        (Method::MinHash, _) => None,
        (_, Some(eps)) => Some(PrivacyParams::new(eps, args.delta, args.alpha, tau)?),
        (_, None) => return Err(Error::InvalidParameter(format!("mechanism {method} needs --epsilon"))),
    };
    let mech = Mechanism::new(method, args.num_functions, args.buckets, privacy.as_ref())?;
    let family = HashFamily::new(args.num_functions, args.buckets, ds.universe, args.family_seed)?;
    let rows = ds
        .users
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let noise_seed = derive_seed(args.seed, &[i as u64]);
            Ok((u.id.clone(), mech.release(&family.sketch(&u.items)?, noise_seed)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let file = SketchFile {
        header: mech.header(Some(args.family_seed)),
        rows,
    };
    let out = open_output(args.output.as_deref())?;
    file.write(out)?;
    Ok(())
}

fn estimate(args: &EstimateArgs) -> Result<(), Error> {
    let a = SketchFile::load(&args.first)?;
    let b = SketchFile::load(&args.second)?;
    check_compatible(&a.header, &b.header)?;
    if args.paired && a.rows.len() != b.rows.len() {
        return Err(Error::LengthMismatch {
            left: a.rows.len(),
            right: b.rows.len(),
        });
    }
    let mut w = csv::Writer::from_writer(open_output(args.output.as_deref())?);
    w.write_record(["id_a", "id_b", "estimate", "collision_rate"])?;
    let mut emit = |(ia, sa): &(String, _), (ib, sb): &(String, _)| -> Result<(), Error> {
        let e = estimate_released(&a.header, sa, sb)?;
        let value = if args.clamp { e.clamped() } else { e.value };
        let rate = e.collision_rate.map(|r| r.to_string()).unwrap_or_default();
        w.write_record([ia.as_str(), ib.as_str(), &value.to_string(), &rate])?;
        Ok(())
    };
    if args.paired {
        for (x, y) in a.rows.iter().zip(&b.rows) {
            emit(x, y)?;
        }
    } else {
        for x in &a.rows {
            for y in &b.rows {
                emit(x, y)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn mae(args: &MaeArgs) -> Result<(), Error> {
    let mut kv = kv_with_overrides(
        args.config.as_deref(),
        &[
            ("taus", &args.taus),
            ("j_targets", &args.j_targets),
            ("ks", &args.ks),
            ("buckets", &args.buckets),
            ("epsilons", &args.epsilons),
            ("delta", &args.delta),
            ("alpha", &args.alpha),
            ("mechanisms", &args.mechanisms),
            ("reps", &args.reps),
            ("seed", &args.seed),
            ("universe", &args.universe),
        ],
    )?;
    if args.clamp {
        kv.set("clamp", "true");
    }
    let cfg = MaeConfig::from_kv(&kv).map_err(as_usage)?;
    let rows = run_mae_experiment(&cfg)?;
    write_csv(&rows, open_output(args.output.as_deref())?)
}

fn nn(args: &NnArgs) -> Result<(), Error> {
    let kv = kv_with_overrides(
        args.config.as_deref(),
        &[
            ("queries", &args.queries),
            ("k_true", &args.k_true),
            ("depths", &args.depths),
            ("j_min", &args.j_min),
            ("mechanisms", &args.mechanisms),
            ("epsilons", &args.epsilons),
            ("ks", &args.ks),
            ("buckets", &args.buckets),
            ("delta", &args.delta),
            ("alpha", &args.alpha),
            ("tau", &args.tau),
            ("reps", &args.reps),
            ("seed", &args.seed),
        ],
    )?;
    let cfg = NnConfig::from_kv(&kv).map_err(as_usage)?;
    let ds = Dataset::load_json(&args.dataset)?;
    let rows = run_nn_experiment(&ds, &cfg)?;
    write_csv(&rows, open_output(args.output.as_deref())?)
}

/// Bad configuration values are usage errors, not data errors.
fn as_usage(e: Error) -> Error {
    match e {
        Error::Format(msg) => Error::InvalidParameter(msg),
        other => other,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Params(a) => params(a),
        Command::Ingest(a) => ingest(a),
        Command::Sketch(a) => sketch(a),
        Command::Estimate(a) => estimate(a),
        Command::Mae(a) => mae(a),
        Command::Nn(a) => nn(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
