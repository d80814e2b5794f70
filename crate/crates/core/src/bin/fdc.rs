use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use forster::dataset::rng::derive_seed;
use forster::dataset::{load_labeled, load_points, massart_draw, write_csv, write_json, DatasetOracle, Format, LabeledDataset, Marginal, MassartModel, NoiseRate, PointSet};
use forster::harness::{bit_independence_study, error_spread, write_study_csv, StudyConfig};
use forster::learner::{evaluate_classifier, learn_halfspace, LearnerConfig, ModelRecord, PartialClassifier};
use forster::transform::{forster_decompose, forster_transform, verify_piece, DecompositionRecord, ForsterPiece, PieceRecord};

/// Forster transforms, Forster decompositions and halfspace learning under Massart noise.
#[derive(Parser)]
#[command(name = "fdc", version)]
struct Cli {
    /// Plain-text file of `key=value` defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate a labeled sample from a Massart model.
    Gen(GenArgs),
    /// Forster transform of a point set with no heavy subspace.
    Transform(InputArgs),
    /// Forster decomposition of an arbitrary point set.
    Decompose(InputArgs),
    /// Learn a halfspace from a labeled sample used as an example oracle.
    Learn(LearnArgs),
    /// Evaluate a model, re-verify a decomposition, or run the bit-complexity study.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum MarginalKind {
    Hard,
    Gaussian,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    marginal: Option<MarginalKind>,
    #[arg(long)]
    out: PathBuf,
    /// Also write an independent sample from the same model here.
    #[arg(long)]
    test_out: Option<PathBuf>,
    /// Size of the `--test-out` sample (default: `--n`).
    #[arg(long)]
    test_n: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    train_oracle: PathBuf,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, requires = "test")]
    model: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Decomposition JSON to re-verify against `--input`.
    #[arg(long, requires = "input", conflicts_with = "model")]
    verify_decomposition: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Run the bit-complexity study on paired hard instances.
    #[arg(long, conflicts_with_all = ["model", "verify_decomposition"])]
    bit_study: bool,
    #[arg(long, value_delimiter = ',')]
    bits: Option<Vec<u32>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Solver(String),
}

type Res<T> = Result<T, Failure>;

fn usage(msg: impl ToString) -> Failure {
    Failure::Usage(msg.to_string())
}

fn solver(msg: impl ToString) -> Failure {
    Failure::Solver(msg.to_string())
}

/// `key=value` defaults; keys may use `-` or `_`.
struct Defaults(HashMap<String, String>);

impl Defaults {
    fn load(path: Option<&Path>) -> Res<Self> {
        let mut map = HashMap::new();
        let Some(path) = path else { return Ok(Self(map)) };
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
            map.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> Res<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| usage(format!("config: cannot parse {key}={v}"))),
        }
    }

    fn require<T: FromStr>(&self, key: &str, flag: Option<T>) -> Res<T> {
        self.get(key, flag)?.ok_or_else(|| usage(format!("missing required --{}", key.replace('_', "-"))))
    }

    fn or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Res<T> {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    fn learner(&self, eta: f64, eps: f64, delta: f64) -> Res<LearnerConfig> {
        let mut c = LearnerConfig::new(eta, eps, delta).map_err(usage)?;
        c.c = self.or("c", None, c.c)?;
        c.forster_c = self.or("forster_c", None, c.forster_c)?;
        c.weak_c = self.or("weak_c", None, c.weak_c)?;
        c.forster_delta = self.or("forster_delta", None, c.forster_delta)?;
        c.coverage_floor = self.or("coverage_floor", None, c.coverage_floor)?;
        c.rejection_factor = self.or("rejection_factor", None, c.rejection_factor)?;
        c.validate().map_err(usage)?;
        Ok(c)
    }
}

fn sha256_hex(path: &Path) -> Res<String> {
    let bytes = fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Res<()> {
    let mut text = forster::json::to_string(value).map_err(solver)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| solver(format!("{}: {e}", path.display())))
}

fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Res<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn points_from(path: &Path) -> Res<PointSet> {
    load_points(path, Format::from_path(path)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn labeled_from(path: &Path) -> Res<LabeledDataset> {
    load_labeled(path, Format::from_path(path)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn check_delta(delta: f64) -> Res<f64> {
    if delta > 0.0 && delta < 1.0 {
        Ok(delta)
    } else {
        Err(usage("--delta must lie in (0, 1)"))
    }
}

fn gen(a: GenArgs, cfg: &Defaults) -> Res<()> {
    let dim = cfg.require("dim", a.dim)?;
    let n = cfg.require("n", a.n)?;
    let bits = cfg.require("bits", a.bits)?;
    let eta = cfg.require("eta", a.eta)?;
    let seed = cfg.require("seed", a.seed)?;
    let kind = match (a.marginal, cfg.get::<String>("marginal", None)?.as_deref()) {
        (Some(k), _) => k,
        (None, None | Some("hard")) => MarginalKind::Hard,
        (None, Some("gaussian")) => MarginalKind::Gaussian,
        (None, Some(other)) => return Err(usage(format!("config: unknown marginal {other}"))),
    };
    if dim == 0 || n == 0 {
        return Err(usage("--dim and --n must be positive"));
    }
    if !(0.0..0.5).contains(&eta) {
        return Err(usage("--eta must lie in [0, 1/2)"));
    }
    let (model, data) = match kind {
        MarginalKind::Hard => forster::dataset::gen_hard_instance(dim, n, bits, eta, seed).map_err(usage)?,
        MarginalKind::Gaussian => {
            let mut rng = forster::dataset::rng::substream(seed, u64::MAX);
            let w: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let model = MassartModel::new(w, eta, NoiseRate::Constant { eta }, Marginal::DiscreteGaussian { dim, bits }).map_err(usage)?;
            let data = massart_draw(&model, n, derive_seed(seed, 1)).map_err(usage)?;
            (model, data)
        }
    };
    save(&a.out, &data)?;
    eprintln!("wrote {n} examples (d = {dim}, b = {}) to {}", data.base().bit_complexity(), a.out.display());
    if let Some(path) = &a.test_out {
        let m = cfg.or("test_n", a.test_n, n)?;
        if m == 0 {
            return Err(usage("--test-n must be positive"));
        }
        // Same model, independent draws.
        let test = massart_draw(&model, m, derive_seed(seed, 2)).map_err(solver)?;
        save(path, &test)?;
        eprintln!("wrote {m} held-out examples to {}", path.display());
    }
    Ok(())
}

fn save(path: &Path, data: &LabeledDataset) -> Res<()> {
    let res = match Format::from_path(path) {
        Format::Csv => write_csv(path, data.base(), Some(data.labels())),
        Format::Json => write_json(path, data.base(), Some(data.labels())),
    };
    res.map_err(solver)
}

#[derive(Serialize, Deserialize)]
struct TransformFile {
    source_digest: String,
    n: usize,
    dim: usize,
    delta: f64,
    piece: PieceRecord,
}

fn transform(a: InputArgs, cfg: &Defaults) -> Res<()> {
    let delta = check_delta(cfg.or("delta", a.delta, 1e-3)?)?;
    let points = points_from(&a.input)?;
    let piece = forster_transform(&points, delta).map_err(solver)?;
    let file = TransformFile { source_digest: sha256_hex(&a.input)?, n: points.len(), dim: points.dim(), delta, piece: piece.to_record() };
    write_json_file(&a.out, &file)?;
    eprintln!("piece of dimension {} with {} members; lambda in [{:.6e}, {:.6e}]", piece.dim(), piece.members.len(), piece.certificate.lambda_min, piece.certificate.lambda_max);
    Ok(())
}

fn decompose(a: InputArgs, cfg: &Defaults) -> Res<()> {
    let delta = check_delta(cfg.or("delta", a.delta, 1e-3)?)?;
    let points = points_from(&a.input)?;
    let dec = forster_decompose(&points, delta).map_err(solver)?;
    write_json_file(&a.out, &dec.to_record(&sha256_hex(&a.input)?, delta))?;
    eprintln!("{} pieces", dec.pieces.len());
    for (i, p) in dec.pieces.iter().enumerate() {
        eprintln!("  piece {i}: dim {} members {}", p.dim(), p.members.len());
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LearnFile {
    source_digest: String,
    seed: u64,
    #[serde(flatten)]
    model: ModelRecord,
}

fn learn(a: LearnArgs, cfg: &Defaults) -> Res<()> {
    let eta = cfg.require("eta", a.eta)?;
    let eps = cfg.require("eps", a.eps)?;
    let delta = cfg.require("delta", a.delta)?;
    let seed = cfg.require("seed", a.seed)?;
    let config = cfg.learner(eta, eps, delta)?;
    let data = labeled_from(&a.train_oracle)?;
    let digest = sha256_hex(&a.train_oracle)?;
    let mut oracle = DatasetOracle::new(data, seed);
    let out = learn_halfspace(&mut oracle, &config).map_err(solver)?;
    write_json_file(&a.out, &LearnFile { source_digest: digest, seed, model: out.to_record(&config) })?;
    eprintln!("{} stages, {} draws, exit {:?}", out.classifier.stages().len(), out.draws, out.exit);
    Ok(())
}

#[derive(Serialize)]
struct PieceCheck {
    piece: usize,
    dim: usize,
    members: usize,
    trace: f64,
    lambda_min: f64,
    lambda_max: f64,
    distance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    digest_match: bool,
    partition: bool,
    pieces: Vec<PieceCheck>,
    pass: bool,
}

fn verify(dec_path: &Path, input: &Path, out: Option<&Path>) -> Res<()> {
    let rec: DecompositionRecord = read_json_file(dec_path)?;
    let points = points_from(input)?;
    let digest_match = sha256_hex(input)? == rec.source_digest;
    let mut pieces = Vec::new();
    for p in rec.pieces {
        pieces.push(ForsterPiece::from_record(p).map_err(|e| usage(format!("{}: {e}", dec_path.display())))?);
    }
    let dec = forster::transform::ForsterDecomposition { pieces, source: points };
    let checks: Vec<PieceCheck> = dec
        .pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let r = verify_piece(p, &dec.source);
            PieceCheck { piece: i, dim: p.dim(), members: p.members.len(), trace: r.trace, lambda_min: r.lambda_min, lambda_max: r.lambda_max, distance: r.distance, pass: r.pass }
        })
        .collect();
    let partition = dec.is_partition();
    let pass = digest_match && partition && checks.iter().all(|c| c.pass);
    let report = VerifyReport { digest_match, partition, pieces: checks, pass };
    emit(&report, out)?;
    if pass {
        Ok(())
    } else {
        Err(solver("decomposition failed verification"))
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Res<()> {
    match out {
        Some(p) => write_json_file(p, value),
        None => {
            println!("{}", forster::json::to_string(value).map_err(solver)?);
            Ok(())
        }
    }
}

fn eval(a: EvalArgs, cfg: &Defaults) -> Res<()> {
    if let Some(dec) = &a.verify_decomposition {
        return verify(dec, a.input.as_deref().expect("clap enforces --input"), a.out.as_deref());
    }
    if a.bit_study {
        let study = StudyConfig {
            dim: cfg.or("dim", a.dim, 10)?,
            bits: match a.bits {
                Some(b) => b,
                None => match cfg.get::<String>("bits", None)? {
                    Some(s) => s.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>().map_err(|_| usage("config: bits"))?,
                    None => vec![16, 32, 48],
                },
            },
            eta: cfg.or("eta", a.eta, 0.2)?,
            eps: cfg.or("eps", a.eps, 0.05)?,
            delta: cfg.or("delta", a.delta, 0.1)?,
            trials: cfg.or("trials", a.trials, 10)?,
            seed: cfg.require("seed", a.seed)?,
            test_size: cfg.or("test_size", a.test_size, 100_000)?,
        };
        if study.dim == 0 || study.bits.iter().any(|&b| !(4..=62).contains(&b)) || study.test_size == 0 {
            return Err(usage("--dim must be positive and every --bits entry in 4..=62"));
        }
        LearnerConfig::new(study.eta, study.eps, study.delta).map_err(usage)?;
        let reports = bit_independence_study(&study).map_err(solver)?;
        match &a.out {
            Some(p) => {
                let f = fs::File::create(p).map_err(|e| solver(format!("{}: {e}", p.display())))?;
                write_study_csv(f, &reports).map_err(solver)?;
            }
            None => write_study_csv(std::io::stdout().lock(), &reports).map_err(solver)?,
        }
        eprintln!("mean-error spread across b: {:.4}", error_spread(&reports));
        return Ok(());
    }
    let (Some(model), Some(test)) = (&a.model, &a.test) else {
        return Err(usage("eval needs --model with --test, --verify-decomposition with --input, or --bit-study"));
    };
    let file: LearnFile = read_json_file(model)?;
    let h = PartialClassifier::from_record(file.model.classifier).map_err(|e| usage(format!("{}: {e}", model.display())))?;
    let data = labeled_from(test)?;
    if data.base().dim() != h.dim() {
        return Err(usage(format!("test dimension {} does not match model dimension {}", data.base().dim(), h.dim())));
    }
    emit(&evaluate_classifier(&h, &data), a.out.as_deref())
}

fn init_threads() -> Res<()> {
    let Ok(v) = std::env::var("FDC_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| usage("FDC_THREADS must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(solver)
}

fn run(cli: Cli) -> Res<()> {
    init_threads()?;
    let cfg = Defaults::load(cli.config.as_deref())?;
    match cli.verb {
        Verb::Gen(a) => gen(a, &cfg),
        Verb::Transform(a) => transform(a, &cfg),
        Verb::Decompose(a) => decompose(a, &cfg),
        Verb::Learn(a) => learn(a, &cfg),
        Verb::Eval(a) => eval(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
