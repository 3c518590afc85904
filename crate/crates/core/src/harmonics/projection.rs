//! Monte Carlo isotypic projection `P_λ f(x) = d_λ ∫ χ_λ(g) f(g⁻¹x) dg`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::character::{eigen_angles, CharacterTable};
use super::weights::HighestWeight;
use crate::error::{Error, Result};
use crate::function::GrassmannFunction;
use crate::grassmann::{haar_rotation, Subspace};
use crate::quadrature::{Estimate, Estimator, QuadratureSpec};

/// Haar samples of SO(n) with their eigen-angles. Elements on the singular
/// set of the character formula are redrawn from the same stream.
#[derive(Debug, Clone)]
pub struct GroupSamples {
    n: usize,
    inverses: Vec<DMatrix<f64>>,
    angles: Vec<Vec<f64>>,
    estimator: Estimator,
}

impl GroupSamples {
    pub fn draw(n: usize, gq: &QuadratureSpec) -> Result<Self> {
        gq.validate()?;
        let probe = CharacterTable::new(n, &[HighestWeight::trivial(n)])?;
        let drawn: Vec<(DMatrix<f64>, Vec<f64>)> = (0..gq.sample_count)
            .into_par_iter()
            .with_min_len(256)
            .map(|t| {
                let mut rng = gq.sampler.stream(t as u64);
                loop {
                    let g = haar_rotation(n, &mut rng).expect("n >= 2");
                    let angles = eigen_angles(g.matrix());
                    if probe.values_at_angles(&angles).is_ok() {
                        return (g.matrix().transpose(), angles);
                    }
                }
            })
            .collect();
        let (inverses, angles) = drawn.into_iter().unzip();
        Ok(Self {
            n,
            inverses,
            angles,
            estimator: gq.estimator,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.inverses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inverses.is_empty()
    }

    /// Per-sample projection weights `d_λ · χ_λ(g)` for each weight. Complex
    /// characters use `2 d_λ Re χ_λ`, which projects onto `λ ⊕ λ̄`.
    pub fn coefficients(&self, weights: &[HighestWeight]) -> Result<Vec<Vec<f64>>> {
        let table = CharacterTable::new(self.n, weights)?;
        let scale: Vec<f64> = weights
            .iter()
            .zip(table.dims())
            .map(|(w, d)| if w.is_complex() { 2.0 * d } else { *d })
            .collect();
        let rows: Vec<Vec<f64>> = self
            .angles
            .par_iter()
            .map(|a| table.values_at_angles(a).expect("regular sample"))
            .collect();
        Ok((0..weights.len())
            .map(|w| rows.iter().map(|r| scale[w] * r[w]).collect())
            .collect())
    }

    /// Mean of `χ_λ χ_μ` over the samples, per pair, with standard errors.
    pub fn character_products(&self, a: &HighestWeight, b: &HighestWeight) -> Result<Estimate> {
        let table = CharacterTable::new(self.n, &[a.clone(), b.clone()])?;
        let vals: Vec<f64> = self
            .angles
            .par_iter()
            .map(|x| {
                let v = table.values_at_angles(x).expect("regular sample");
                v[0] * v[1]
            })
            .collect();
        Ok(Estimate::from_samples(&vals, self.estimator))
    }
}

/// Projection onto one isotypic component, bound to a group quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotypicProjector {
    pub weight: HighestWeight,
    pub group_quadrature: QuadratureSpec,
}

impl IsotypicProjector {
    pub fn new(weight: HighestWeight, group_quadrature: QuadratureSpec) -> Result<Self> {
        weight.validate()?;
        group_quadrature.validate()?;
        Ok(Self {
            weight,
            group_quadrature,
        })
    }

    pub fn prepare(&self) -> Result<PreparedProjector> {
        let samples = Arc::new(GroupSamples::draw(self.weight.n, &self.group_quadrature)?);
        PreparedProjector::with_samples(self.weight.clone(), samples)
    }
}

/// A projector with its group samples and character weights drawn.
#[derive(Debug, Clone)]
pub struct PreparedProjector {
    weight: HighestWeight,
    samples: Arc<GroupSamples>,
    coeffs: Arc<Vec<f64>>,
}

impl PreparedProjector {
    pub fn with_samples(weight: HighestWeight, samples: Arc<GroupSamples>) -> Result<Self> {
        let coeffs = samples.coefficients(std::slice::from_ref(&weight))?.remove(0);
        Ok(Self {
            weight,
            samples,
            coeffs: Arc::new(coeffs),
        })
    }

    pub fn weight(&self) -> &HighestWeight {
        &self.weight
    }

    /// Per-sample terms of the estimator at `x`. Each term is
    /// `c(g)·(f(g⁻¹x) − f(x))`, plus `f(x)` for the trivial weight; the
    /// subtracted value has zero mean against nontrivial characters.
    pub fn terms(&self, f: &GrassmannFunction, x: &Subspace) -> Result<Vec<f64>> {
        f.check_domain(x)?;
        if f.ambient_dim() != self.samples.n {
            return Err(Error::DimensionMismatch("projector and function dimensions differ".into()));
        }
        let fx = f.eval(x);
        let base = if self.weight.is_trivial() { fx } else { 0.0 };
        let frame = x.frame();
        Ok(self
            .samples
            .inverses
            .par_iter()
            .zip(self.coeffs.par_iter())
            .with_min_len(64)
            .map(|(ginv, c)| {
                let moved = Subspace::from_orthonormal(ginv * frame);
                c * (f.eval(&moved) - fx) + base
            })
            .collect())
    }

    pub fn evaluate(&self, f: &GrassmannFunction, x: &Subspace) -> Result<Estimate> {
        let terms = self.terms(f, x)?;
        Ok(Estimate::from_samples(&terms, self.samples.estimator))
    }

    /// `P_λ f` as a function (point values only).
    pub fn apply(&self, f: &GrassmannFunction) -> GrassmannFunction {
        let me = self.clone();
        let inner = f.clone();
        GrassmannFunction::new(f.ambient_dim(), f.grass_dim(), move |x| {
            me.evaluate(&inner, x).map(|e| e.value).unwrap_or(f64::NAN)
        })
    }
}

/// `P_λ f` with a fresh set of group samples drawn from `gq`.
pub fn isotypic_project(
    weight: &HighestWeight,
    f: &GrassmannFunction,
    gq: &QuadratureSpec,
) -> Result<GrassmannFunction> {
    if weight.n != f.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "weight of SO({}) applied to a function on R^{}",
            weight.n,
            f.ambient_dim()
        )));
    }
    Ok(IsotypicProjector::new(weight.clone(), *gq)?.prepare()?.apply(f))
}

/// Root mean square of `values`.
pub fn probe_norm(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len().max(1) as f64).sqrt()
}

/// `f` at each point.
pub fn evaluate_on(f: &GrassmannFunction, points: &[Subspace]) -> Vec<f64> {
    points.iter().map(|x| f.eval(x)).collect()
}

