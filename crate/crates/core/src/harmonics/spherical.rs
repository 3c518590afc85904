//! Schur scalars of the angle transforms via spherical functions.
//!
//! Fix nested coordinate subspaces `E0 ⊂ F0` (or `F0 ⊂ E0`) with stabilizers
//! `K_E`, `K_F`. For a weight λ with unit spherical vectors `v_E`, `v_F`:
//!
//! ```text
//! A_λ = ∫_G k(E0, gF0) χ_λ(g) dg          = c_λ ⟨v_E, v_F⟩
//! B_λ = ∫_{K_E} ∫_{K_F} χ_λ(h h') dh dh'  = ⟨v_E, v_F⟩²
//! ```
//!
//! so `c_λ = A_λ / √B_λ` is the factor by which the transform scales the
//! L² norm of the λ-component. `B_λ = 1` when source and target coincide.
//! One pass over group samples yields `A_λ` for every weight at once.

use nalgebra::{DMatrix, DMatrixView};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::character::CharacterTable;
use super::weights::{occurs_on, HighestWeight};
use crate::error::{Error, Result};
use crate::grassmann::{complement, haar_rotation, haar_stabilizer, Subspace};
use crate::quadrature::{fold_samples, Estimate, QuadratureSpec};
use crate::sampler::SeededSampler;
use crate::transforms::{TransformKind, TransformOp};

/// `|cos|` between coordinate and moved subspaces, read off a submatrix of
/// the orthogonal matrix `m` with no more rows than columns.
fn cross_cos(m: &DMatrix<f64>, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
    let rows = r1 - r0;
    if rows == 0 {
        return 1.0;
    }
    let sub: DMatrixView<f64> = m.view((r0, c0), (rows, c1 - c0));
    let v = if rows == c1 - c0 {
        sub.determinant().abs()
    } else {
        (sub * sub.transpose()).determinant().max(0.0).sqrt()
    };
    v.min(1.0)
}

/// `k(E0, m·F0)` for the angle kernel of `op`, where `E0` and `F0` are the
/// coordinate subspaces of the target and source dimensions.
pub fn kernel_at(op: &TransformOp, m: &DMatrix<f64>) -> f64 {
    let (n, i, j) = (op.n, op.source_dim, op.target_dim);
    match op.kind {
        TransformKind::Cosine => {
            if j <= i {
                cross_cos(m, 0, j, 0, i)
            } else {
                cross_cos(m, j, n, i, n)
            }
        }
        TransformKind::Sine => {
            if j <= n - i {
                cross_cos(m, 0, j, i, n)
            } else {
                cross_cos(m, j, n, 0, i)
            }
        }
        TransformKind::Radon => f64::NAN,
    }
}

/// Draws from `draw` until the character formula is regular there.
fn regular_draw<F>(rng: &mut ChaCha8Rng, table: &CharacterTable, draw: F) -> (DMatrix<f64>, Vec<f64>)
where
    F: Fn(&mut ChaCha8Rng) -> DMatrix<f64>,
{
    loop {
        let g = draw(rng);
        if let Ok(chi) = table.values(&g) {
            return (g, chi);
        }
    }
}

/// A second sampler for an auxiliary pass, tied to the main one.
pub fn auxiliary(gq: &QuadratureSpec, tag: u64) -> QuadratureSpec {
    QuadratureSpec {
        sampler: SeededSampler {
            seed: gq.sampler.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15),
            counter: gq.sampler.counter,
        },
        ..*gq
    }
}

#[derive(Clone)]
struct Sums {
    count: f64,
    k: f64,
    kk: f64,
    chi: Vec<f64>,
    k_chi: Vec<f64>,
    chi2: Vec<f64>,
    k_chi2: Vec<f64>,
    kk_chi2: Vec<f64>,
}

impl Sums {
    fn new(w: usize) -> Self {
        Self {
            count: 0.0,
            k: 0.0,
            kk: 0.0,
            chi: vec![0.0; w],
            k_chi: vec![0.0; w],
            chi2: vec![0.0; w],
            k_chi2: vec![0.0; w],
            kk_chi2: vec![0.0; w],
        }
    }

    fn push(&mut self, k: f64, chi: &[f64]) {
        self.count += 1.0;
        self.k += k;
        self.kk += k * k;
        for (a, &c) in chi.iter().enumerate() {
            let c2 = c * c;
            self.chi[a] += c;
            self.k_chi[a] += k * c;
            self.chi2[a] += c2;
            self.k_chi2[a] += k * c2;
            self.kk_chi2[a] += k * k * c2;
        }
    }

    fn merge(mut self, o: Sums) -> Sums {
        self.count += o.count;
        self.k += o.k;
        self.kk += o.kk;
        for a in 0..self.chi.len() {
            self.chi[a] += o.chi[a];
            self.k_chi[a] += o.k_chi[a];
            self.chi2[a] += o.chi2[a];
            self.k_chi2[a] += o.k_chi2[a];
            self.kk_chi2[a] += o.kk_chi2[a];
        }
        self
    }
}

/// `A_λ` for each weight, and the kernel mean `c_0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalCoefficients {
    pub op: TransformOp,
    pub weights: Vec<HighestWeight>,
    pub kernel_mean: Estimate,
    pub coefficients: Vec<Estimate>,
    pub samples: usize,
}

/// One pass over Haar samples of SO(n). The estimator of `A_λ` is
/// `mean((k − k̄) χ_λ) + k̄ δ_{λ,0}`, using `∫ χ_λ = δ_{λ,0}`.
pub fn spherical_coefficients(
    op: &TransformOp,
    weights: &[HighestWeight],
    gq: &QuadratureSpec,
) -> Result<SphericalCoefficients> {
    op.validate()?;
    gq.validate()?;
    if op.kind == TransformKind::Radon {
        return Err(Error::InvalidParameter("radon transform has no angle kernel".into()));
    }
    let n = op.n;
    let table = CharacterTable::new(n, weights)?;
    let w = weights.len();
    let sums = fold_samples(
        gq.sample_count,
        &gq.sampler,
        || Sums::new(w),
        |acc, rng, _| {
            let (g, chi) = regular_draw(rng, &table, |r| haar_rotation(n, r).expect("n >= 2").matrix().clone());
            acc.push(kernel_at(op, &g), &chi);
        },
        Sums::merge,
    );
    let m = sums.count;
    let kbar = sums.k / m;
    let kvar = (sums.kk / m - kbar * kbar).max(0.0);
    let kernel_mean = Estimate {
        value: kbar,
        stderr: (kvar / (m - 1.0)).sqrt(),
    };
    let coefficients = (0..w)
        .map(|a| {
            let ey = (sums.k_chi[a] - kbar * sums.chi[a]) / m;
            let ey2 = (sums.kk_chi2[a] - 2.0 * kbar * sums.k_chi2[a] + kbar * kbar * sums.chi2[a]) / m;
            let var = (ey2 - ey * ey).max(0.0);
            let delta = if weights[a].is_trivial() { kbar } else { 0.0 };
            Estimate {
                value: ey + delta,
                stderr: (var / (m - 1.0)).sqrt(),
            }
        })
        .collect();
    Ok(SphericalCoefficients {
        op: *op,
        weights: weights.to_vec(),
        kernel_mean,
        coefficients,
        samples: gq.sample_count,
    })
}

fn character_means<F>(n: usize, weights: &[HighestWeight], gq: &QuadratureSpec, draw: F) -> Result<Vec<Estimate>>
where
    F: Fn(&mut ChaCha8Rng) -> DMatrix<f64> + Sync,
{
    gq.validate()?;
    let table = CharacterTable::new(n, weights)?;
    let w = weights.len();
    let sums = fold_samples(
        gq.sample_count,
        &gq.sampler,
        || Sums::new(w),
        |acc, rng, _| {
            let (_, chi) = regular_draw(rng, &table, &draw);
            acc.push(0.0, &chi);
        },
        Sums::merge,
    );
    let m = sums.count;
    Ok((0..w)
        .map(|a| {
            let mean = sums.chi[a] / m;
            let var = (sums.chi2[a] / m - mean * mean).max(0.0);
            Estimate {
                value: mean,
                stderr: (var / (m - 1.0)).sqrt(),
            }
        })
        .collect())
}

/// `B_λ = ∫_{K_E}∫_{K_F} χ_λ(h h')`, with `dim E0 = target_dim`,
/// `dim F0 = source_dim`.
pub fn stabilizer_overlap(
    n: usize,
    source_dim: usize,
    target_dim: usize,
    weights: &[HighestWeight],
    gq: &QuadratureSpec,
) -> Result<Vec<Estimate>> {
    character_means(n, weights, gq, |rng| {
        let h = haar_stabilizer(n, target_dim, rng).expect("valid dims");
        let h2 = haar_stabilizer(n, source_dim, rng).expect("valid dims");
        h.matrix() * h2.matrix()
    })
}

/// `∫_K χ_λ`: the dimension of the vectors fixed by the stabilizer of a
/// `k`-subspace, i.e. the multiplicity of λ in functions on `Gr_{k,n}`.
pub fn stabilizer_multiplicity(
    n: usize,
    k: usize,
    weights: &[HighestWeight],
    gq: &QuadratureSpec,
) -> Result<Vec<Estimate>> {
    character_means(n, weights, gq, |rng| {
        haar_stabilizer(n, k, rng).expect("valid dims").matrix().clone()
    })
}

/// The transform's scalar on one isotypic component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchurScalar {
    pub weight: HighestWeight,
    /// `c_λ`; zero when the target carries no λ-component.
    pub value: f64,
    pub stderr: f64,
    /// `|c_λ| / c_0`, or `|A_λ| / c_0` when the target lacks λ.
    pub normalized: f64,
    pub normalized_stderr: f64,
    /// `A_λ`.
    pub coefficient: Estimate,
    /// `B_λ` (exactly 1 when source and target coincide).
    pub overlap: Estimate,
    pub constant: Estimate,
    pub in_target: bool,
    /// Alignment of `T z` with `z` over probe points, when computed.
    pub collinearity: Option<f64>,
}

/// Schur scalars for several weights from shared passes. Every weight must
/// occur on the source Grassmannian.
pub fn schur_scalars(op: &TransformOp, weights: &[HighestWeight], gq: &QuadratureSpec) -> Result<Vec<SchurScalar>> {
    let (n, i, j) = (op.n, op.source_dim, op.target_dim);
    for w in weights {
        if w.n != n {
            return Err(Error::DimensionMismatch(format!("weight {w} is not an SO({n}) weight")));
        }
        if !occurs_on(w, i) {
            return Err(Error::WeightAbsentFromSource);
        }
    }
    let mut all = weights.to_vec();
    let trivial = HighestWeight::trivial(n);
    if !all.contains(&trivial) {
        all.push(trivial.clone());
    }
    let sph = spherical_coefficients(op, &all, gq)?;
    let overlaps = if i == j {
        vec![Estimate::exact(1.0); all.len()]
    } else {
        stabilizer_overlap(n, i, j, &all, &auxiliary(gq, 1))?
    };
    let c0 = sph.kernel_mean;
    Ok(weights
        .iter()
        .enumerate()
        .map(|(a, w)| {
            let coef = sph.coefficients[a];
            let in_target = occurs_on(w, j);
            let overlap = if w.is_trivial() { Estimate::exact(1.0) } else { overlaps[a] };
            let (value, stderr, mag, mag_se) = if in_target {
                let b = overlap.value.max(overlap.stderr).max(f64::MIN_POSITIVE);
                let c = coef.value / b.sqrt();
                let se = (coef.stderr.powi(2) / b + coef.value.powi(2) * overlap.stderr.powi(2) / (4.0 * b.powi(3))).sqrt();
                (c, se, c.abs(), se)
            } else {
                (0.0, 0.0, coef.value.abs(), coef.stderr)
            };
            let normalized = mag / c0.value;
            let normalized_stderr = ((mag_se / c0.value).powi(2) + (normalized * c0.stderr / c0.value).powi(2)).sqrt();
            SchurScalar {
                weight: w.clone(),
                value,
                stderr,
                normalized,
                normalized_stderr,
                coefficient: coef,
                overlap,
                constant: c0,
                in_target,
                collinearity: None,
            }
        })
        .collect())
}

/// A rotation carrying the first `dim x` basis vectors onto `x`.
pub fn carrier(x: &Subspace) -> DMatrix<f64> {
    let n = x.ambient_dim();
    let k = x.dim();
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (n, k)).copy_from(x.frame());
    if k < n {
        m.view_mut((0, k), (n, n - k)).copy_from(complement(x).frame());
    }
    if m.determinant() < 0.0 {
        m.column_mut(n - 1).neg_mut();
    }
    m
}

/// `(T z)(x)` and `w(x)` at each probe, where `w` spans the λ-component's
/// `K_E`-biinvariant line in the target and `T z` is the transform of the
/// source's zonal function. Schur's lemma makes the two proportional.
pub fn zonal_profiles(
    op: &TransformOp,
    weight: &HighestWeight,
    kernel_mean: f64,
    q: &QuadratureSpec,
    probes: &[Subspace],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, i, j) = (op.n, op.source_dim, op.target_dim);
    let table = CharacterTable::new(n, std::slice::from_ref(weight))?;
    let delta = if weight.is_trivial() { kernel_mean } else { 0.0 };
    let mut streams = q.sampler;
    let mut tz = Vec::with_capacity(probes.len());
    let mut w = Vec::with_capacity(probes.len());
    for x in probes {
        if x.ambient_dim() != n || x.dim() != j {
            return Err(Error::DimensionMismatch(format!("probe must be a {j}-subspace of R^{n}")));
        }
        let gx = carrier(x);
        let gxt = gx.transpose();
        let s1 = streams.split(q.sample_count as u64);
        let s2 = streams.split(q.sample_count as u64);
        let t = fold_samples(
            q.sample_count,
            &s1,
            || 0.0,
            |acc, rng, _| {
                let (g, chi) = regular_draw(rng, &table, |r| haar_rotation(n, r).expect("n >= 2").matrix().clone());
                *acc += (kernel_at(op, &(&gxt * &g)) - kernel_mean) * chi[0];
            },
            |a, b| a + b,
        );
        tz.push(t / q.sample_count as f64 + delta);
        let z = fold_samples(
            q.sample_count,
            &s2,
            || 0.0,
            |acc, rng, _| {
                let (_, chi) = regular_draw(rng, &table, |r| {
                    let h = haar_stabilizer(n, j, r).expect("valid dims");
                    if i == j {
                        &gx * h.matrix()
                    } else {
                        let h2 = haar_stabilizer(n, i, r).expect("valid dims");
                        &gx * h.matrix() * h2.matrix()
                    }
                });
                *acc += chi[0];
            },
            |a, b| a + b,
        );
        w.push(z / q.sample_count as f64);
    }
    Ok((tz, w))
}

/// `|⟨a, b⟩| / (‖a‖ ‖b‖)`, or 0 when either vector vanishes.
pub fn collinearity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot.abs() / (na * nb)
    }
}

/// Schur scalar of `op` on the λ-component, with a collinearity check of
/// `T z` against `w` over `probes` (each side estimated from `q`).
pub fn schur_scalar(
    op: &TransformOp,
    weight: &HighestWeight,
    gq: &QuadratureSpec,
    q: &QuadratureSpec,
    probes: &[Subspace],
) -> Result<SchurScalar> {
    let mut s = schur_scalars(op, std::slice::from_ref(weight), gq)?.remove(0);
    if s.in_target && !probes.is_empty() {
        let (tz, w) = zonal_profiles(op, weight, s.constant.value, q, probes)?;
        s.collinearity = Some(collinearity(&tz, &w));
    }
    Ok(s)
}

