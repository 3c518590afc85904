use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grassmann_cosine::transforms::{estimate_composition_constant, probe_subspaces, random_test_function};
use grassmann_cosine::valuations::{bridge_residual, check_axioms, projection_valuation, Valuation};
use grassmann_cosine::verify::{verify_range_theorem, Thresholds, VerificationConfig, VerificationReport};
use grassmann_cosine::zelevinsky::classify_image;
use grassmann_cosine::{
    haar_subspace, principal_angles, Error, GrassmannFunction, Polytope, QuadratureSpec, SeededSampler,
    TransformKind, TransformOp,
};
use serde::Serialize;
use serde_json::json;

const DEFAULT_SAMPLES: usize = 50_000;

#[derive(Parser, Debug)]
#[command(name = "gcos", version, about = "Cosine, sine and Radon transforms on real Grassmannians")]
struct Cli {
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Principal angles between random subspace pairs.
    Angle(AngleArgs),
    /// Monte Carlo values of a transform at random probe subspaces.
    Transform(TransformArgs),
    /// Classify SO(n)-types of Gr_i against the range prediction.
    VerifyRange(VerifyArgs),
    /// Fit the constant relating the cosine transform to cosine-after-Radon.
    VerifyComposition(CompositionArgs),
    /// Classify SO(n)-types for the Radon transform (j < i).
    VerifyRadon(VerifyArgs),
    /// Valuation axioms for a random projection valuation.
    ValuationCheck(ValuationArgs),
    /// Klain section of a projection valuation against the cosine transform.
    KlainBridge(BridgeArgs),
    /// Segment data and image classification for the p-adic cosine transform.
    Segments(SegmentArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Cosine,
    Sine,
    Radon,
}

impl From<Kind> for TransformKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Cosine => TransformKind::Cosine,
            Kind::Sine => TransformKind::Sine,
            Kind::Radon => TransformKind::Radon,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct OutputArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record elapsed seconds in the report (breaks byte-identical reruns).
    #[arg(long)]
    wall_time: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct AngleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    j: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TestFunction {
    Constant,
    Random,
}

#[derive(Args, Debug, Clone, Serialize)]
struct TransformArgs {
    #[arg(long, value_enum, default_value_t = Kind::Cosine)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Dimension of the source Grassmannian.
    #[arg(long)]
    i: usize,
    /// Dimension of the target Grassmannian.
    #[arg(long)]
    j: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    probes: usize,
    #[arg(long, value_enum, default_value_t = TestFunction::Constant)]
    function: TestFunction,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ThresholdArgs {
    #[arg(long, default_value_t = Thresholds::default().tau_kernel)]
    tau_kernel: f64,
    #[arg(long, default_value_t = Thresholds::default().tau_image)]
    tau_image: f64,
    #[arg(long, default_value_t = Thresholds::default().kernel_sigma)]
    kernel_sigma: f64,
    #[arg(long, default_value_t = Thresholds::default().image_sigma)]
    image_sigma: f64,
    #[arg(long, default_value_t = Thresholds::default().resolution)]
    resolution: f64,
    #[arg(long, default_value_t = Thresholds::default().radon_resolution)]
    radon_resolution: f64,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Thresholds {
        Thresholds {
            tau_kernel: self.tau_kernel,
            tau_image: self.tau_image,
            kernel_sigma: self.kernel_sigma,
            image_sigma: self.image_sigma,
            resolution: self.resolution,
            radon_resolution: self.radon_resolution,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    /// Ignored by verify-radon.
    #[arg(long, value_enum, default_value_t = Kind::Cosine)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    j: usize,
    /// Largest first weight entry to classify.
    #[arg(long, default_value_t = 4)]
    cap: i64,
    #[arg(long, default_value_t = VerificationConfig::DEFAULT_GROUP_SAMPLES)]
    group_samples: usize,
    #[arg(long, default_value_t = VerificationConfig::DEFAULT_MAX_GROUP_SAMPLES)]
    max_group_samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    thresholds: ThresholdArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CompositionArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    j: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Largest accepted relative spread of the fitted constant.
    #[arg(long, default_value_t = 0.05)]
    max_spread: f64,
    /// Largest accepted residual in combined standard errors.
    #[arg(long, default_value_t = 5.0)]
    max_z: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ValuationArgs {
    #[arg(long)]
    n: usize,
    /// Homogeneity degree; the defining function lives on Gr_{n-i}.
    #[arg(long)]
    i: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Relative tolerance for the additivity, evenness and translation residuals.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Also evaluate the valuation on this polytope (JSON vertex list).
    #[arg(long)]
    polytope: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BridgeArgs {
    #[arg(long)]
    n: usize,
    /// Degree; probes are i-subspaces and the function lives on Gr_{n-i}.
    #[arg(long)]
    i: usize,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    probes: usize,
    #[arg(long, default_value_t = 1)]
    functions: usize,
    #[arg(long, default_value_t = 5.0)]
    sigmas: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SegmentArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    i: usize,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutputArgs,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Invalid(String),
    Disagreement,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn emit(out: &OutputArgs, body: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn json_only(out: &OutputArgs) -> Result<(), Failure> {
    if out.format == Format::Csv {
        return Err(Failure::Invalid("csv output is only available for verification reports".into()));
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &OutputArgs, value: &T) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Invalid(e.to_string()))?;
    s.push('\n');
    emit(out, &s)
}

fn wrap<C: Serialize, R: Serialize>(command: &str, config: &C, result: R, elapsed: Option<f64>) -> serde_json::Value {
    json!({ "command": command, "config": config, "result": result, "wall_time": elapsed })
}

struct Timer(Option<std::time::Instant>);

impl Timer {
    fn start(on: bool) -> Self {
        Timer(on.then(std::time::Instant::now))
    }

    fn stop(&self) -> Option<f64> {
        self.0.map(|t| t.elapsed().as_secs_f64())
    }
}

fn angle(a: &AngleArgs) -> Outcome {
    json_only(&a.out)?;
    let timer = Timer::start(a.out.wall_time);
    let sampler = SeededSampler::new(a.out.seed);
    let mut pairs = Vec::with_capacity(a.count);
    for t in 0..a.count {
        let mut rng = sampler.stream(t as u64);
        let e = haar_subspace(a.n, a.i, &mut rng)?;
        let f = haar_subspace(a.n, a.j, &mut rng)?;
        let p = principal_angles(&e, &f)?;
        pairs.push(json!({
            "angles": p.angles,
            "cos": grassmann_cosine::cos_angle(&e, &f)?,
            "sin": grassmann_cosine::sin_angle(&e, &f)?,
        }));
    }
    emit_json(&a.out, &wrap("angle", a, pairs, timer.stop()))?;
    Ok(true)
}

fn transform(a: &TransformArgs) -> Outcome {
    json_only(&a.out)?;
    let timer = Timer::start(a.out.wall_time);
    let op = TransformOp::new(a.kind.into(), a.n, a.i, a.j)?;
    let q = QuadratureSpec::new(a.samples, a.out.seed);
    let f = match a.function {
        TestFunction::Constant => GrassmannFunction::constant(a.n, a.i, 1.0),
        TestFunction::Random => random_test_function(a.n, a.i, &mut SeededSampler::new(a.out.seed).stream(u64::MAX)),
    };
    let probes = probe_subspaces(a.n, a.j, a.probes, a.out.seed)?;
    let mut values = Vec::with_capacity(probes.len());
    for e in &probes {
        values.push(op.apply(&f, e, &q)?);
    }
    emit_json(&a.out, &wrap("transform", a, values, timer.stop()))?;
    Ok(true)
}

fn verify(a: &VerifyArgs, kind: TransformKind) -> Outcome {
    if a.max_group_samples < a.group_samples {
        return Err(Failure::Invalid("--max-group-samples is below --group-samples".into()));
    }
    let thresholds = a.thresholds.thresholds();
    thresholds.validate()?;
    let mut config = VerificationConfig::new(kind, a.n, a.i, a.j)
        .with_cap(a.cap)
        .with_seed(a.out.seed)
        .with_samples(a.group_samples, a.max_group_samples);
    config.thresholds = thresholds;
    let report: VerificationReport = verify_range_theorem(&config, a.out.wall_time)?;
    let body = match a.out.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    emit(&a.out, &body)?;
    Ok(report.agreement)
}

fn composition(a: &CompositionArgs) -> Outcome {
    json_only(&a.out)?;
    let timer = Timer::start(a.out.wall_time);
    let q = QuadratureSpec::new(a.samples, a.out.seed);
    let est = estimate_composition_constant(a.n, a.i, a.j, &q, a.trials, false)?;
    let z = est.max_residual_z(est.c);
    let pass = est.spread < a.max_spread && z < a.max_z;
    let result = json!({ "estimate": est, "max_residual_z": z, "pass": pass });
    emit_json(&a.out, &wrap("verify-composition", a, result, timer.stop()))?;
    Ok(pass)
}

fn valuation_check(a: &ValuationArgs) -> Outcome {
    json_only(&a.out)?;
    if a.i > a.n {
        return Err(Failure::Invalid(format!("degree {} exceeds n = {}", a.i, a.n)));
    }
    let polytope = match &a.polytope {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            let p = Polytope::from_json(&text)?;
            if p.ambient_dim != a.n {
                return Err(Failure::Invalid(format!("polytope lives in R^{}, not R^{}", p.ambient_dim, a.n)));
            }
            Some(p)
        }
        None => None,
    };
    let timer = Timer::start(a.out.wall_time);
    let sampler = SeededSampler::new(a.out.seed);
    let q = QuadratureSpec::new(a.samples, a.out.seed);
    q.validate()?;
    let f = random_test_function(a.n, a.n - a.i, &mut sampler.stream(u64::MAX));
    let phi = Valuation::projection(&f, &q);
    let report = check_axioms(&phi, a.n, a.i, &sampler, a.trials, a.tolerance);
    let value = match &polytope {
        Some(p) => Some(projection_valuation(&f, p, &q)?),
        None => None,
    };
    let pass = report.passed();
    let result = json!({ "axioms": report, "polytope_value": value, "pass": pass });
    emit_json(&a.out, &wrap("valuation-check", a, result, timer.stop()))?;
    Ok(pass)
}

fn klain_bridge(a: &BridgeArgs) -> Outcome {
    json_only(&a.out)?;
    if a.i == 0 || a.i >= a.n {
        return Err(Failure::Invalid(format!("need 1 <= i <= n-1, got n={}, i={}", a.n, a.i)));
    }
    let timer = Timer::start(a.out.wall_time);
    let sampler = SeededSampler::new(a.out.seed);
    let q = QuadratureSpec::new(a.samples, a.out.seed);
    let probes = probe_subspaces(a.n, a.i, a.probes, a.out.seed)?;
    let mut rows = Vec::with_capacity(a.functions);
    let mut pass = true;
    for t in 0..a.functions {
        let f = random_test_function(a.n, a.n - a.i, &mut sampler.stream(u64::MAX - t as u64));
        let r = bridge_residual(&f, &q, &probes)?;
        pass &= r.passes(a.sigmas);
        rows.push(r);
    }
    let result = json!({ "residuals": rows, "pass": pass });
    emit_json(&a.out, &wrap("klain-bridge", a, result, timer.stop()))?;
    Ok(pass)
}

fn segments(a: &SegmentArgs) -> Outcome {
    json_only(&a.out)?;
    let c = classify_image(a.n, a.i)?;
    let result = json!({
        "descriptor": c.descriptor.to_string(),
        "image": c.image.to_string(),
        "classification": c,
    });
    emit_json(&a.out, &wrap("segments", a, result, None))?;
    Ok(true)
}

fn run(cli: &Cli) -> Outcome {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    match &cli.command {
        Command::Angle(a) => angle(a),
        Command::Transform(a) => transform(a),
        Command::VerifyRange(a) => {
            if a.kind == Kind::Radon {
                return Err(Failure::Invalid("use verify-radon for the Radon transform".into()));
            }
            verify(a, a.kind.into())
        }
        Command::VerifyRadon(a) => verify(a, TransformKind::Radon),
        Command::VerifyComposition(a) => composition(a),
        Command::ValuationCheck(a) => valuation_check(a),
        Command::KlainBridge(a) => klain_bridge(a),
        Command::Segments(a) => segments(a),
    }
    .and_then(|ok| if ok { Ok(true) } else { Err(Failure::Disagreement) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Disagreement) => {
            eprintln!("gcos: verification disagreed with the prediction");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("gcos: {msg}");
            ExitCode::from(2)
        }
    }
}
