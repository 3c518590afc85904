//! Weyl characters of SO(n) evaluated in eigen-angle coordinates.

use nalgebra::{DMatrix, SymmetricEigen};

use super::weights::{weyl_dimension, HighestWeight};
use crate::error::{Error, Result};
use crate::grassmann::Rotation;

/// Angle gap (and, for odd n, angle size) below which the character formula
/// is treated as 0/0.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Rotation angles `θ_1, …, θ_{⌊n/2⌋}` of `g`. For even n the sign of the
/// last angle carries the orientation.
pub fn eigen_angles(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    let r = n / 2;
    let sym = (g + g.transpose()) * 0.5;
    let mut cosines: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    cosines.sort_by(|a, b| a.total_cmp(b));
    let mut angles: Vec<f64> = (0..r)
        .map(|a| (0.5 * (cosines[2 * a] + cosines[2 * a + 1])).clamp(-1.0, 1.0).acos())
        .collect();
    if n.is_multiple_of(2) && r > 0 {
        let skew = (g - g.transpose()) * 0.5;
        let pf = pfaffian(&skew);
        // Pf of the skew part equals (−1)^r Π sin θ
        let sign = if r.is_multiple_of(2) { pf } else { -pf };
        let scale: f64 = angles.iter().map(|t| t.sin()).product();
        if sign < 0.0 && scale.abs() > 0.0 {
            let last = angles.len() - 1;
            angles[last] = -angles[last];
        }
    }
    angles
}

/// Pfaffian of a skew-symmetric matrix of even order, by expansion along the
/// first row.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let idx: Vec<usize> = (0..n).collect();
    pf_rec(a, &idx)
}

fn pf_rec(a: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut total = 0.0;
    for t in 1..idx.len() {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[t]).collect();
        let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * a[(first, idx[t])] * pf_rec(a, &rest);
    }
    total
}

/// Characters of a fixed list of weights, sharing the eigen-angle work.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    n: usize,
    weights: Vec<HighestWeight>,
    dims: Vec<f64>,
    shifted: Vec<Vec<f64>>,
    rho: Vec<f64>,
}

impl CharacterTable {
    pub fn new(n: usize, weights: &[HighestWeight]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("characters need n >= 2".into()));
        }
        let r = n / 2;
        let half = if n % 2 == 1 { 0.5 } else { 0.0 };
        let rho: Vec<f64> = (0..r).map(|a| (r - 1 - a) as f64 + half).collect();
        let mut dims = Vec::with_capacity(weights.len());
        let mut shifted = Vec::with_capacity(weights.len());
        for w in weights {
            if w.n != n {
                return Err(Error::DimensionMismatch(format!("weight {w} is not an SO({n}) weight")));
            }
            dims.push(weyl_dimension(w)? as f64);
            shifted.push(w.m.iter().zip(&rho).map(|(&m, &p)| m as f64 + p).collect());
        }
        Ok(Self {
            n,
            weights: weights.to_vec(),
            dims,
            shifted,
            rho,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[HighestWeight] {
        &self.weights
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    /// Real parts of the characters at a group element with the given angles.
    pub fn values_at_angles(&self, angles: &[f64]) -> Result<Vec<f64>> {
        let odd = self.n % 2 == 1;
        if angles.iter().all(|t| t.abs() < DEGENERACY_TOL) {
            return Ok(self.dims.clone());
        }
        check_regular(angles, odd)?;
        let r = angles.len();
        if r == 0 {
            return Ok(vec![1.0; self.weights.len()]);
        }
        if odd {
            let den = trig_det(&self.rho, angles, f64::sin);
            Ok(self
                .shifted
                .iter()
                .map(|l| trig_det(l, angles, f64::sin) / den)
                .collect())
        } else {
            let den = trig_det(&self.rho, angles, f64::cos);
            Ok(self
                .shifted
                .iter()
                .map(|l| {
                    let c = trig_det(l, angles, f64::cos);
                    // i^r · det sin contributes to the real part only for even r
                    let s = match r % 4 {
                        0 => trig_det(l, angles, f64::sin),
                        2 => -trig_det(l, angles, f64::sin),
                        _ => 0.0,
                    };
                    (c + s) / den
                })
                .collect())
        }
    }

    pub fn values(&self, g: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.values_at_angles(&eigen_angles(g))
    }
}

fn check_regular(angles: &[f64], odd: bool) -> Result<()> {
    for (a, &x) in angles.iter().enumerate() {
        if odd && x.abs() < DEGENERACY_TOL {
            return Err(Error::DegenerateElement);
        }
        for &y in &angles[a + 1..] {
            if (x.abs() - y.abs()).abs() < DEGENERACY_TOL {
                return Err(Error::DegenerateElement);
            }
        }
    }
    Ok(())
}

fn trig_det(l: &[f64], angles: &[f64], f: fn(f64) -> f64) -> f64 {
    let r = angles.len();
    DMatrix::from_fn(r, r, |a, b| f(l[a] * angles[b])).determinant()
}

/// `χ_λ(g)` (real part). Errors with [`Error::DegenerateElement`] on the
/// singular set of the character formula away from the identity.
pub fn character_value(weight: &HighestWeight, g: &Rotation) -> Result<f64> {
    if g.n() != weight.n {
        return Err(Error::DimensionMismatch(format!(
            "weight of SO({}) evaluated on SO({})",
            weight.n,
            g.n()
        )));
    }
    let table = CharacterTable::new(weight.n, std::slice::from_ref(weight))?;
    Ok(table.values(g.matrix())?[0])
}
