//! Functions on Grassmannians.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grassmann::{act, Rotation, Subspace};

type Evaluator = Arc<dyn Fn(&Subspace) -> f64 + Send + Sync>;

/// A real-valued function on `Gr_{k,n}`.
///
/// The evaluator must depend only on the span of its argument.
#[derive(Clone)]
pub struct GrassmannFunction {
    ambient_dim: usize,
    grass_dim: usize,
    eval: Evaluator,
}

impl fmt::Debug for GrassmannFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrassmannFunction(Gr_{{{},{}}})", self.grass_dim, self.ambient_dim)
    }
}

impl GrassmannFunction {
    pub fn new<F>(ambient_dim: usize, grass_dim: usize, eval: F) -> Self
    where
        F: Fn(&Subspace) -> f64 + Send + Sync + 'static,
    {
        Self {
            ambient_dim,
            grass_dim,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(ambient_dim: usize, grass_dim: usize, c: f64) -> Self {
        Self::new(ambient_dim, grass_dim, move |_| c)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn grass_dim(&self) -> usize {
        self.grass_dim
    }

    pub fn eval(&self, e: &Subspace) -> f64 {
        (self.eval)(e)
    }

    /// Evaluates after checking that `e` lies in the right Grassmannian.
    pub fn eval_checked(&self, e: &Subspace) -> Result<f64> {
        self.check_domain(e)?;
        Ok(self.eval(e))
    }

    pub fn check_domain(&self, e: &Subspace) -> Result<()> {
        if e.ambient_dim() != self.ambient_dim || e.dim() != self.grass_dim {
            return Err(Error::DimensionMismatch(format!(
                "function on Gr_{{{},{}}} evaluated at a {}-subspace of R^{}",
                self.grass_dim,
                self.ambient_dim,
                e.dim(),
                e.ambient_dim()
            )));
        }
        Ok(())
    }

    /// `α·self + β·other`.
    pub fn linear_combination(&self, alpha: f64, other: &GrassmannFunction, beta: f64) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim || self.grass_dim != other.grass_dim {
            return Err(Error::DimensionMismatch(
                "linear combination of functions on different Grassmannians".into(),
            ));
        }
        let (f, h) = (self.eval.clone(), other.eval.clone());
        Ok(Self {
            ambient_dim: self.ambient_dim,
            grass_dim: self.grass_dim,
            eval: Arc::new(move |e| alpha * f(e) + beta * h(e)),
        })
    }

    /// `(g·f)(F) = f(g⁻¹F)`.
    pub fn rotated(&self, g: &Rotation) -> Result<Self> {
        if g.n() != self.ambient_dim {
            return Err(Error::DimensionMismatch(
                "rotation and function live in different dimensions".into(),
            ));
        }
        let inv = g.inverse();
        let f = self.eval.clone();
        Ok(Self {
            ambient_dim: self.ambient_dim,
            grass_dim: self.grass_dim,
            eval: Arc::new(move |e| f(&act(&inv, e).expect("dimensions checked"))),
        })
    }
}

/// A polynomial in the entries of the orthogonal projector onto a subspace,
/// `f(E) = Σ c · Π P_{ab}(E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialObservable {
    pub ambient_dim: usize,
    pub terms: Vec<(f64, Vec<(usize, usize)>)>,
}

impl PolynomialObservable {
    pub fn new(ambient_dim: usize, terms: Vec<(f64, Vec<(usize, usize)>)>) -> Result<Self> {
        for (_, mono) in &terms {
            if mono.iter().any(|&(a, b)| a >= ambient_dim || b >= ambient_dim) {
                return Err(Error::InvalidParameter(format!(
                    "monomial index out of range for R^{ambient_dim}"
                )));
            }
        }
        Ok(Self { ambient_dim, terms })
    }

    /// `P_{ab}`.
    pub fn entry(ambient_dim: usize, a: usize, b: usize) -> Result<Self> {
        Self::new(ambient_dim, vec![(1.0, vec![(a, b)])])
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, m)| m.len()).max().unwrap_or(0)
    }

    /// Random polynomial: a constant plus `terms_per_degree` monomials of each
    /// degree `1..=degree`, Gaussian coefficients.
    pub fn random<R: Rng + ?Sized>(
        ambient_dim: usize,
        degree: usize,
        terms_per_degree: usize,
        rng: &mut R,
    ) -> Self {
        let mut terms = vec![(rng.sample::<f64, _>(StandardNormal), Vec::new())];
        for d in 1..=degree {
            for _ in 0..terms_per_degree {
                let mono = (0..d)
                    .map(|_| (rng.gen_range(0..ambient_dim), rng.gen_range(0..ambient_dim)))
                    .collect();
                terms.push((rng.sample::<f64, _>(StandardNormal), mono));
            }
        }
        Self { ambient_dim, terms }
    }

    pub fn eval_projector(&self, p: &DMatrix<f64>) -> f64 {
        self.terms
            .iter()
            .map(|(c, mono)| c * mono.iter().map(|&(a, b)| p[(a, b)]).product::<f64>())
            .sum()
    }

    pub fn eval(&self, e: &Subspace) -> f64 {
        self.eval_projector(&e.projector())
    }

    pub fn to_function(&self, grass_dim: usize) -> GrassmannFunction {
        let poly = self.clone();
        GrassmannFunction::new(self.ambient_dim, grass_dim, move |e| poly.eval(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::{haar_rotation, haar_subspace, make_subspace};
    use crate::sampler::SeededSampler;
    use nalgebra::DVector;

    #[test]
    fn polynomial_depends_only_on_span() {
        let s = SeededSampler::new(8);
        let mut rng = s.stream(0);
        let poly = PolynomialObservable::random(5, 2, 4, &mut rng);
        let f = poly.to_function(2);
        for t in 1..10 {
            let mut rng = s.stream(t);
            let e = haar_subspace(5, 2, &mut rng).unwrap();
            // shuffled, rescaled, mixed frame of the same span
            let c0: DVector<f64> = e.frame().column(1) * 3.0 + e.frame().column(0);
            let c1: DVector<f64> = e.frame().column(0) * -2.0;
            let e2 = make_subspace(&[c0, c1]).unwrap();
            assert!((f.eval(&e) - f.eval(&e2)).abs() < 1e-10);
        }
    }

    #[test]
    fn rotated_function_semantics() {
        let s = SeededSampler::new(9);
        let f = PolynomialObservable::entry(3, 0, 0).unwrap().to_function(1);
        let g = haar_rotation(3, &mut s.stream(0)).unwrap();
        let e = haar_subspace(3, 1, &mut s.stream(1)).unwrap();
        let gf = f.rotated(&g).unwrap();
        let ge = act(&g, &e).unwrap();
        assert!((gf.eval(&ge) - f.eval(&e)).abs() < 1e-12);
    }

    #[test]
    fn domain_checks() {
        let f = GrassmannFunction::constant(4, 2, 1.0);
        assert!(f.eval_checked(&Subspace::coordinate(4, 1)).is_err());
        assert!(f.eval_checked(&Subspace::coordinate(4, 2)).is_ok());
        assert!(PolynomialObservable::entry(3, 3, 0).is_err());
    }
}
