//! Monte Carlo cosine, sine and Radon transforms between Grassmannians.
//!
//! Every Haar measure is a probability measure. `T_{j,i}` maps functions on
//! `Gr_{i,n}` (the source) to functions on `Gr_{j,n}` (the target):
//!
//! ```text
//! (T_{j,i} f)(E) = ∫_{Gr_{i,n}} |cos(E,F)| f(F) dF
//! (R_{j,i} f)(H) = ∫_{F ⊃ H} f(F) dF          (j < i)
//! ```

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{GrassmannFunction, PolynomialObservable};
use crate::grassmann::{act, complement, cos_angle, haar_subspace, sin_angle, Rotation, Subspace};
use crate::quadrature::{integrate, sample_values, Estimate, QuadratureSpec};
use crate::sampler::SeededSampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Cosine,
    Sine,
    Radon,
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Cosine => "cosine",
            TransformKind::Sine => "sine",
            TransformKind::Radon => "radon",
        }
    }
}

/// A transform from `Gr_{source_dim,n}` to `Gr_{target_dim,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformOp {
    pub kind: TransformKind,
    pub n: usize,
    pub source_dim: usize,
    pub target_dim: usize,
}

impl TransformOp {
    pub fn new(kind: TransformKind, n: usize, source_dim: usize, target_dim: usize) -> Result<Self> {
        let op = Self {
            kind,
            n,
            source_dim,
            target_dim,
        };
        op.validate()?;
        Ok(op)
    }

    pub fn cosine(n: usize, source_dim: usize, target_dim: usize) -> Result<Self> {
        Self::new(TransformKind::Cosine, n, source_dim, target_dim)
    }

    pub fn sine(n: usize, source_dim: usize, target_dim: usize) -> Result<Self> {
        Self::new(TransformKind::Sine, n, source_dim, target_dim)
    }

    pub fn radon(n: usize, source_dim: usize, target_dim: usize) -> Result<Self> {
        Self::new(TransformKind::Radon, n, source_dim, target_dim)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, i, j) = (self.n, self.source_dim, self.target_dim);
        if n < 2 || i < 1 || j < 1 || i > n - 1 || j > n - 1 {
            return Err(Error::InvalidParameter(format!(
                "transform dimensions need 1 <= i, j <= n-1 (n={n}, i={i}, j={j})"
            )));
        }
        if self.kind == TransformKind::Radon && j >= i {
            return Err(Error::InvalidParameter(format!(
                "radon transform requires j < i (i={i}, j={j})"
            )));
        }
        Ok(())
    }

    /// Kernel value for the angle transforms. Radon has no pointwise kernel.
    pub fn kernel(&self, e: &Subspace, f: &Subspace) -> Result<f64> {
        match self.kind {
            TransformKind::Cosine => cos_angle(e, f),
            TransformKind::Sine => sin_angle(e, f),
            TransformKind::Radon => Err(Error::InvalidParameter(
                "radon transform has no pointwise kernel".into(),
            )),
        }
    }

    fn check_operands(&self, f: &GrassmannFunction, e: &Subspace) -> Result<()> {
        self.validate()?;
        if f.ambient_dim() != self.n || f.grass_dim() != self.source_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} transform expects a function on Gr_{{{},{}}}",
                self.kind.name(),
                self.source_dim,
                self.n
            )));
        }
        if e.ambient_dim() != self.n || e.dim() != self.target_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} transform evaluated at a {}-subspace, expected dimension {}",
                self.kind.name(),
                e.dim(),
                self.target_dim
            )));
        }
        Ok(())
    }

    /// One Monte Carlo sample of `(T f)(e)` drawn from `rng`.
    pub fn sample(&self, f: &GrassmannFunction, e: &Subspace, rng: &mut ChaCha8Rng) -> Result<f64> {
        match self.kind {
            TransformKind::Cosine | TransformKind::Sine => {
                let sf = haar_subspace(self.n, self.source_dim, rng)?;
                Ok(self.kernel(e, &sf)? * f.eval(&sf))
            }
            TransformKind::Radon => {
                let sf = sample_containing(e, self.source_dim, rng)?;
                Ok(f.eval(&sf))
            }
        }
    }

    /// Monte Carlo value of `(T f)(e)`.
    pub fn apply(&self, f: &GrassmannFunction, e: &Subspace, q: &QuadratureSpec) -> Result<Estimate> {
        self.check_operands(f, e)?;
        integrate(q, |rng, _| self.sample(f, e, rng).expect("operands checked"))
    }
}

fn expect_kind(op: &TransformOp, kind: TransformKind) -> Result<()> {
    if op.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "expected a {} transform, got {}",
            kind.name(),
            op.kind.name()
        )));
    }
    Ok(())
}

pub fn cosine_transform(
    op: &TransformOp,
    f: &GrassmannFunction,
    e: &Subspace,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    expect_kind(op, TransformKind::Cosine)?;
    op.apply(f, e, q)
}

pub fn sine_transform(
    op: &TransformOp,
    f: &GrassmannFunction,
    e: &Subspace,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    expect_kind(op, TransformKind::Sine)?;
    op.apply(f, e, q)
}

pub fn radon_transform(
    op: &TransformOp,
    f: &GrassmannFunction,
    h: &Subspace,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    expect_kind(op, TransformKind::Radon)?;
    op.apply(f, h, q)
}

/// `F = H ⊕ U` with `U` Haar in `Gr_{i−j}(H^⊥)`: a sample of the invariant
/// probability measure on `{F ∈ Gr_{i,n} : F ⊃ H}`.
pub fn sample_containing<R: Rng + ?Sized>(h: &Subspace, i: usize, rng: &mut R) -> Result<Subspace> {
    let n = h.ambient_dim();
    let j = h.dim();
    if i <= j || i > n {
        return Err(Error::InvalidParameter(format!(
            "containing subspace needs dim H < i <= n (dim H = {j}, i = {i}, n = {n})"
        )));
    }
    let perp = complement(h);
    let u = haar_subspace(n - j, i - j, rng)?;
    let extra = perp.frame() * u.frame();
    let mut frame = DMatrix::zeros(n, i);
    frame.view_mut((0, 0), (n, j)).copy_from(h.frame());
    frame.view_mut((0, j), (n, i - j)).copy_from(&extra);
    Ok(Subspace::from_orthonormal(frame))
}

/// `(T_{j,j} R_{j,i} f)(E)` with one fibre sample per outer sample:
/// `H` Haar in `Gr_{j,n}`, `F ⊃ H` from the fibre measure, integrand
/// `|cos(E,H)| f(F)`.
pub fn cosine_of_radon(
    n: usize,
    i: usize,
    j: usize,
    f: &GrassmannFunction,
    e: &Subspace,
    q: &QuadratureSpec,
) -> Result<Estimate> {
    TransformOp::radon(n, i, j)?.check_operands(f, e)?;
    integrate(q, |rng, _| {
        let h = haar_subspace(n, j, rng).expect("validated");
        let sf = sample_containing(&h, i, rng).expect("validated");
        cos_angle(e, &h).expect("validated") * f.eval(&sf)
    })
}

/// Outcome of fitting `T_{j,i} = c · T_{j,j} R_{j,i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionEstimate {
    /// Mean of the per-trial ratios.
    pub c: f64,
    /// Sample standard deviation of the ratios divided by `|c|`.
    pub spread: f64,
    pub ratios: Vec<f64>,
    /// Trials dropped because the denominator was below 5 standard errors.
    pub discarded: usize,
    /// Per trial: `(T_{j,i} f)(E)` and `(T_{j,j} R_{j,i} f)(E)`.
    pub pairs: Vec<(Estimate, Estimate)>,
}

impl CompositionEstimate {
    /// Largest `|lhs − c·rhs|` in units of its combined standard error.
    pub fn max_residual_z(&self, c: f64) -> f64 {
        self.pairs
            .iter()
            .map(|(lhs, rhs)| {
                let se = lhs.stderr.hypot(c * rhs.stderr);
                (lhs.value - c * rhs.value).abs() / se
            })
            .fold(0.0, f64::max)
    }
}

/// Random test function used by the composition and equivariance checks:
/// `1 + ½·p` with `p` a random projector polynomial of degree ≤ 2.
pub fn random_test_function(n: usize, k: usize, rng: &mut ChaCha8Rng) -> GrassmannFunction {
    let mut poly = PolynomialObservable::random(n, 2, 3, rng);
    for term in poly.terms.iter_mut() {
        term.0 *= 0.5;
    }
    poly.terms.push((1.0, Vec::new()));
    poly.to_function(k)
}

/// Estimates the constant in `T_{j,i} = c · T_{j,j} R_{j,i}` from `trials`
/// random (function, point) pairs. With `constant_only`, every trial uses
/// `f ≡ 1`.
pub fn estimate_composition_constant(
    n: usize,
    i: usize,
    j: usize,
    q: &QuadratureSpec,
    trials: usize,
    constant_only: bool,
) -> Result<CompositionEstimate> {
    let op = TransformOp::cosine(n, i, j)?;
    TransformOp::radon(n, i, j)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut setup = SeededSampler::new(q.sampler.seed ^ 0x5eed_c0de);
    let mut streams = q.sampler;
    let mut ratios = Vec::new();
    let mut pairs = Vec::new();
    let mut discarded = 0;
    for _ in 0..trials {
        let mut rng = setup.next_stream();
        let f = if constant_only {
            GrassmannFunction::constant(n, i, 1.0)
        } else {
            random_test_function(n, i, &mut rng)
        };
        let e = haar_subspace(n, j, &mut rng)?;
        let lhs_q = QuadratureSpec {
            sampler: streams.split(q.sample_count as u64),
            ..*q
        };
        let rhs_q = QuadratureSpec {
            sampler: streams.split(q.sample_count as u64),
            ..*q
        };
        let lhs = cosine_transform(&op, &f, &e, &lhs_q)?;
        let rhs = cosine_of_radon(n, i, j, &f, &e, &rhs_q)?;
        if rhs.value.abs() < 5.0 * rhs.stderr {
            discarded += 1;
            continue;
        }
        ratios.push(lhs.value / rhs.value);
        pairs.push((lhs, rhs));
    }
    if ratios.is_empty() {
        return Err(Error::AllProjectionsNegligible);
    }
    let m = ratios.len() as f64;
    let c = ratios.iter().sum::<f64>() / m;
    let sd = if ratios.len() > 1 {
        (ratios.iter().map(|r| (r - c).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(CompositionEstimate {
        c,
        spread: sd / c.abs(),
        ratios,
        discarded,
        pairs,
    })
}

/// Result of an equivariance check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max_E |T(g·f)(E) − (T f)(g⁻¹E)|`.
    pub residual: f64,
    /// Standard error of the difference at the worst probe.
    pub stderr: f64,
    /// Largest residual in units of its own standard error.
    pub max_z: f64,
}

/// Compares `T(g·f)(E)` with `(T f)(g⁻¹E)` at each probe, both sides driven
/// by the same sample streams.
pub fn equivariance_residual(
    op: &TransformOp,
    f: &GrassmannFunction,
    g: &Rotation,
    q: &QuadratureSpec,
    probes: &[Subspace],
) -> Result<ResidualReport> {
    q.validate()?;
    let gf = f.rotated(g)?;
    let ginv = g.inverse();
    let mut report = ResidualReport {
        residual: 0.0,
        stderr: 0.0,
        max_z: 0.0,
    };
    for e in probes {
        op.check_operands(f, e)?;
        let back = act(&ginv, e)?;
        let diffs = sample_values(q.sample_count, &q.sampler, |rng, _| {
            let mut twin = rng.clone();
            let a = op.sample(&gf, e, rng).expect("checked");
            let b = op.sample(f, &back, &mut twin).expect("checked");
            a - b
        });
        let est = Estimate::from_samples(&diffs, q.estimator);
        let z = if est.stderr > 0.0 {
            est.value.abs() / est.stderr
        } else if est.value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if est.value.abs() >= report.residual {
            report.residual = est.value.abs();
            report.stderr = est.stderr;
        }
        report.max_z = report.max_z.max(z);
    }
    Ok(report)
}

/// `count` Haar probe subspaces of `Gr_{k,n}` from a fixed seed.
pub fn probe_subspaces(n: usize, k: usize, count: usize, seed: u64) -> Result<Vec<Subspace>> {
    let s = SeededSampler::new(seed);
    (0..count)
        .map(|t| haar_subspace(n, k, &mut s.stream(t as u64)))
        .collect()
}
