//! Numerical classification of K-types in the image of the angle transforms
//! and the Radon transform.
//!
//! Each weight's Schur scalar is measured from spherical functions (see
//! [`crate::harmonics::spherical`]). The normalized ratio `|c_λ| / c_0` is
//! reported against the thresholds; the verdict itself rests on whether the
//! signal is statistically distinguishable from zero.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::spherical::{auxiliary, stabilizer_overlap};
use crate::harmonics::{admissible_weights, occurs_on, range_predicate, schur_scalars, HighestWeight, SchurScalar};
use crate::quadrature::{Estimate, QuadratureSpec};
use crate::transforms::{TransformKind, TransformOp};

/// Share of Inconclusive verdicts above which a report flags itself.
pub const UNDERPOWERED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Kernel verdicts need a normalized ratio below this.
    pub tau_kernel: f64,
    /// Reported alongside; image ratios are compared against it.
    pub tau_image: f64,
    /// Kernel verdicts need the signal within this many standard errors of 0.
    pub kernel_sigma: f64,
    /// Image verdicts need the signal beyond this many standard errors.
    pub image_sigma: f64,
    /// Kernel verdicts need `ratio + kernel_sigma·stderr` below this for the
    /// angle transforms: smaller multipliers cannot be told apart from zero.
    pub resolution: f64,
    /// The same bound for the Radon transform, applied to `√(B + kernel_sigma·σ_B)`.
    pub radon_resolution: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tau_kernel: 0.05,
            tau_image: 0.2,
            kernel_sigma: 3.0,
            image_sigma: 5.0,
            resolution: 0.0025,
            radon_resolution: 0.05,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tau_kernel > 0.0
            && self.tau_image >= self.tau_kernel
            && self.kernel_sigma > 0.0
            && self.image_sigma >= self.kernel_sigma
            && self.resolution > 0.0
            && self.radon_resolution > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("inconsistent thresholds {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    InImage,
    Kernel,
    Inconclusive,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::InImage => "InImage",
            Verdict::Kernel => "Kernel",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVerdict {
    pub weight: HighestWeight,
    pub predicted: bool,
    pub measured_ratio: f64,
    pub stderr: f64,
    pub verdict: Verdict,
    /// The raw quantity tested against zero, with its standard error.
    pub signal: Estimate,
    pub group_samples: usize,
}

impl WeightVerdict {
    /// Whether a decisive verdict agrees with the prediction.
    pub fn agrees(&self) -> bool {
        match self.verdict {
            Verdict::InImage => self.predicted,
            Verdict::Kernel => !self.predicted,
            Verdict::Inconclusive => true,
        }
    }
}

fn decide(ratio: f64, ratio_se: f64, upper: f64, resolution: f64, signal: Estimate, t: &Thresholds) -> Verdict {
    let z = if signal.stderr > 0.0 {
        signal.value.abs() / signal.stderr
    } else if signal.value == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    if z > t.image_sigma {
        Verdict::InImage
    } else if z < t.kernel_sigma && ratio < t.tau_kernel && ratio_se < t.tau_kernel / 3.0 && upper < resolution {
        Verdict::Kernel
    } else {
        Verdict::Inconclusive
    }
}

fn verdict_from_scalar(s: &SchurScalar, n: usize, i: usize, j: usize, samples: usize, t: &Thresholds) -> WeightVerdict {
    let upper = s.normalized + t.kernel_sigma * s.normalized_stderr;
    let verdict = decide(s.normalized, s.normalized_stderr, upper, t.resolution, s.coefficient, t);
    WeightVerdict {
        weight: s.weight.clone(),
        predicted: range_predicate(n, i, j, &s.weight),
        measured_ratio: s.normalized,
        stderr: s.normalized_stderr,
        verdict,
        signal: s.coefficient,
        group_samples: samples,
    }
}

/// Classifies one weight under an angle transform.
pub fn classify_weight(op: &TransformOp, weight: &HighestWeight, gq: &QuadratureSpec, t: &Thresholds) -> Result<WeightVerdict> {
    Ok(classify_weights(op, std::slice::from_ref(weight), gq, t)?.remove(0))
}

/// Classifies several weights from shared group passes.
pub fn classify_weights(
    op: &TransformOp,
    weights: &[HighestWeight],
    gq: &QuadratureSpec,
    t: &Thresholds,
) -> Result<Vec<WeightVerdict>> {
    t.validate()?;
    let scalars = schur_scalars(op, weights, gq)?;
    Ok(scalars
        .iter()
        .map(|s| verdict_from_scalar(s, op.n, op.source_dim, op.target_dim, gq.sample_count, t))
        .collect())
}

/// Radon transform on the λ-component: its scalar is `√B_λ`, and the
/// prediction is that λ survives exactly when the target carries it.
pub fn radon_component_check(
    n: usize,
    i: usize,
    j: usize,
    weight: &HighestWeight,
    gq: &QuadratureSpec,
    t: &Thresholds,
) -> Result<WeightVerdict> {
    Ok(radon_weights(n, i, j, std::slice::from_ref(weight), gq, t)?.remove(0))
}

fn radon_weights(
    n: usize,
    i: usize,
    j: usize,
    weights: &[HighestWeight],
    gq: &QuadratureSpec,
    t: &Thresholds,
) -> Result<Vec<WeightVerdict>> {
    TransformOp::radon(n, i, j)?;
    t.validate()?;
    for w in weights {
        if w.n != n {
            return Err(Error::DimensionMismatch(format!("weight {w} is not an SO({n}) weight")));
        }
        if !occurs_on(w, i) {
            return Err(Error::WeightAbsentFromSource);
        }
    }
    let overlaps = stabilizer_overlap(n, i, j, weights, &auxiliary(gq, 2))?;
    Ok(weights
        .iter()
        .zip(overlaps)
        .map(|(w, b)| {
            let b = if w.is_trivial() { Estimate::exact(1.0) } else { b };
            let ratio = b.value.max(0.0).sqrt();
            let floor = b.value.abs().sqrt().max(b.stderr.sqrt());
            let ratio_se = if floor > 0.0 { b.stderr / (2.0 * floor) } else { 0.0 };
            let upper = (b.value.max(0.0) + t.kernel_sigma * b.stderr).sqrt();
            WeightVerdict {
                weight: w.clone(),
                predicted: occurs_on(w, j),
                measured_ratio: ratio,
                stderr: ratio_se,
                verdict: decide(ratio, ratio_se, upper, t.radon_resolution, b, t),
                signal: b,
                group_samples: gq.sample_count,
            }
        })
        .collect())
}

/// Parameters of one report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationConfig {
    pub kind: TransformKind,
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub cap_m1: i64,
    /// Initial number of group samples.
    pub group_samples: usize,
    /// Budget ceiling; the sample count doubles while verdicts remain
    /// Inconclusive and the ceiling allows.
    pub max_group_samples: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
}

impl VerificationConfig {
    pub const DEFAULT_GROUP_SAMPLES: usize = 1_000_000;
    pub const DEFAULT_MAX_GROUP_SAMPLES: usize = 8_000_000;

    pub fn new(kind: TransformKind, n: usize, i: usize, j: usize) -> Self {
        Self {
            kind,
            n,
            i,
            j,
            cap_m1: 4,
            group_samples: Self::DEFAULT_GROUP_SAMPLES,
            max_group_samples: Self::DEFAULT_MAX_GROUP_SAMPLES,
            seed: 0,
            thresholds: Thresholds::default(),
        }
    }

    pub fn with_samples(mut self, group_samples: usize, max_group_samples: usize) -> Self {
        self.group_samples = group_samples;
        self.max_group_samples = max_group_samples.max(group_samples);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cap(mut self, cap_m1: i64) -> Self {
        self.cap_m1 = cap_m1;
        self
    }

    pub fn op(&self) -> Result<TransformOp> {
        TransformOp::new(self.kind, self.n, self.i, self.j)
    }
}

/// Outcome of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub parameters: VerificationConfig,
    pub weights: Vec<WeightVerdict>,
    pub agreement: bool,
    pub inconclusive_fraction: f64,
    pub underpowered: bool,
    /// Largest normalized ratio among weights predicted to vanish.
    pub max_kernel_ratio: Option<f64>,
    /// Smallest normalized ratio among weights predicted to survive.
    pub min_image_ratio: Option<f64>,
    /// Seconds, when timing was requested.
    pub wall_time: Option<f64>,
}

impl VerificationReport {
    fn assemble(parameters: VerificationConfig, mut weights: Vec<WeightVerdict>, wall_time: Option<f64>) -> Self {
        weights.sort_by(|a, b| a.weight.cmp(&b.weight));
        let agreement = weights.iter().all(WeightVerdict::agrees);
        let inconclusive = weights.iter().filter(|w| w.verdict == Verdict::Inconclusive).count();
        let inconclusive_fraction = inconclusive as f64 / weights.len().max(1) as f64;
        let fold = |pred: bool, pick: fn(f64, f64) -> f64| {
            weights
                .iter()
                .filter(|w| w.predicted == pred)
                .map(|w| w.measured_ratio)
                .reduce(pick)
        };
        Self {
            parameters,
            agreement,
            inconclusive_fraction,
            underpowered: inconclusive_fraction > UNDERPOWERED_FRACTION,
            max_kernel_ratio: fold(false, f64::max),
            min_image_ratio: fold(true, f64::min),
            weights,
            wall_time,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per weight: weight, predicted, ratio, stderr, verdict.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["weight", "predicted", "ratio", "stderr", "verdict"])?;
        for v in &self.weights {
            w.write_record([
                v.weight.to_string(),
                v.predicted.to_string(),
                format!("{:.6e}", v.measured_ratio),
                format!("{:.6e}", v.stderr),
                v.verdict.name().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.weights.iter().filter(|w| w.verdict == verdict).count()
    }
}

fn run_with_refinement<F>(config: &VerificationConfig, mut classify: F) -> Result<Vec<WeightVerdict>>
where
    F: FnMut(&QuadratureSpec) -> Result<Vec<WeightVerdict>>,
{
    if config.group_samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 group samples".into()));
    }
    let mut samples = config.group_samples;
    loop {
        let gq = QuadratureSpec::new(samples, config.seed);
        let verdicts = classify(&gq)?;
        let open = verdicts.iter().any(|v| v.verdict == Verdict::Inconclusive);
        if !open || samples.saturating_mul(2) > config.max_group_samples {
            return Ok(verdicts);
        }
        samples *= 2;
    }
}

/// Classifies every weight of the source Grassmannian up to the cap and
/// compares with the image predicate.
pub fn verify_range_theorem(config: &VerificationConfig, timed: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let op = config.op()?;
    if op.kind == TransformKind::Radon {
        return verify_radon(config, timed);
    }
    let weights = admissible_weights(config.n, config.i, config.cap_m1)?;
    let verdicts = run_with_refinement(config, |gq| classify_weights(&op, &weights, gq, &config.thresholds))?;
    let wall = timed.then(|| start.elapsed().as_secs_f64());
    Ok(VerificationReport::assemble(*config, verdicts, wall))
}

/// Radon counterpart of [`verify_range_theorem`] (`j < i`).
pub fn verify_radon(config: &VerificationConfig, timed: bool) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut config = *config;
    config.kind = TransformKind::Radon;
    config.op()?;
    let weights = admissible_weights(config.n, config.i, config.cap_m1)?;
    let verdicts = run_with_refinement(&config, |gq| {
        radon_weights(config.n, config.i, config.j, &weights, gq, &config.thresholds)
    })?;
    let wall = timed.then(|| start.elapsed().as_secs_f64());
    Ok(VerificationReport::assemble(config, verdicts, wall))
}
