//! Even translation-invariant valuations on polytopes, the projection
//! valuation built from a function on `Gr_{n−i,n}`, and its Klain section.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::GrassmannFunction;
use crate::grassmann::{complement, cos_angle, haar_rotation, haar_subspace, Subspace};
use crate::quadrature::{sample_values, Estimate, QuadratureSpec};
use crate::sampler::SeededSampler;

/// Convex hull of finitely many points of ℝⁿ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl Polytope {
    /// Drops exact duplicate vertices.
    pub fn new(ambient_dim: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter("polytope needs at least one vertex".into()));
        }
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "vertex of length {} in R^{ambient_dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite vertex coordinate".into()));
            }
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(Self { ambient_dim, vertices: out })
    }

    pub fn point(x: Vec<f64>) -> Self {
        Self {
            ambient_dim: x.len(),
            vertices: vec![x],
        }
    }

    /// Axis-aligned box `[lo, hi]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch("box corners differ in length".into()));
        }
        let n = lo.len();
        let vertices = (0..1usize << n)
            .map(|mask| (0..n).map(|a| if mask >> a & 1 == 1 { hi[a] } else { lo[a] }).collect())
            .collect();
        Self::new(n, vertices)
    }

    /// `[0,1]ⁿ`.
    pub fn unit_cube(n: usize) -> Self {
        Self::cuboid(&vec![0.0; n], &vec![1.0; n]).expect("matching corners")
    }

    /// `conv(0, e_1, …, e_n)`.
    pub fn standard_simplex(n: usize) -> Self {
        let mut vertices = vec![vec![0.0; n]];
        for a in 0..n {
            let mut v = vec![0.0; n];
            v[a] = 1.0;
            vertices.push(v);
        }
        Self { ambient_dim: n, vertices }
    }

    /// `count` uniform points of `[−1, 1]ⁿ`.
    pub fn random<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Self {
        let vertices = (0..count.max(1))
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        Self::new(n, vertices).expect("finite coordinates")
    }

    /// Unit cube or standard simplex spanned by the frame of `e`.
    pub fn probe_in(e: &Subspace, shape: ProbeShape) -> Self {
        let n = e.ambient_dim();
        let k = e.dim();
        let frame = e.frame();
        let combos: Vec<Vec<f64>> = match shape {
            ProbeShape::Cube => (0..1usize << k)
                .map(|mask| (0..k).map(|a| (mask >> a & 1) as f64).collect())
                .collect(),
            ProbeShape::Simplex => {
                let mut c = vec![vec![0.0; k]];
                for a in 0..k {
                    let mut v = vec![0.0; k];
                    v[a] = 1.0;
                    c.push(v);
                }
                c
            }
        };
        let vertices = combos
            .iter()
            .map(|c| {
                let v = frame * DVector::from_column_slice(c);
                v.iter().copied().collect()
            })
            .collect();
        Self { ambient_dim: n, vertices }
    }

    pub fn translated(&self, x: &[f64]) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().zip(x).map(|(a, b)| a + b).collect())
                .collect(),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            vertices: self.vertices.iter().map(|v| v.iter().map(|a| a * t).collect()).collect(),
        }
    }

    pub fn reflected(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `x ↦ m·x`.
    pub fn mapped(&self, m: &DMatrix<f64>) -> Self {
        Self {
            ambient_dim: m.nrows(),
            vertices: self
                .vertices
                .iter()
                .map(|v| (m * DVector::from_column_slice(v)).iter().copied().collect())
                .collect(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Polytope = serde_json::from_str(s)?;
        Self::new(p.ambient_dim, p.vertices)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (a, u) in self.vertices.iter().enumerate() {
            for v in &self.vertices[a + 1..] {
                let d: f64 = u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum();
                best = best.max(d.sqrt());
            }
        }
        best
    }

    /// Full-dimensional volume of the hull.
    pub fn volume(&self) -> f64 {
        hull_volume(&self.vertices, self.ambient_dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeShape {
    Cube,
    Simplex,
}

/// Volume of the convex hull of `points` in ℝᵈ; zero when the points do not
/// span ℝᵈ affinely. A single point has 0-volume 1.
pub fn hull_volume(points: &[Vec<f64>], d: usize) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    match d {
        0 => 1.0,
        1 => {
            let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[0]), hi.max(p[0]))
            });
            hi - lo
        }
        2 => polygon_area(points),
        _ => incremental_hull_volume(points, d),
    }
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain hull area.
fn polygon_area(points: &[Vec<f64>]) -> f64 {
    let mut p: Vec<&Vec<f64>> = points.iter().collect();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return 0.0;
    }
    let mut hull: Vec<&Vec<f64>> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &&Vec<f64>>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for q in iter {
            while hull.len() >= start + 2 && cross2(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    let m = hull.len();
    let twice: f64 = (0..m)
        .map(|a| {
            let (u, v) = (hull[a], hull[(a + 1) % m]);
            u[0] * v[1] - u[1] * v[0]
        })
        .sum();
    0.5 * twice.abs()
}

struct Facet {
    verts: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn make_facet(verts: Vec<usize>, pts: &[Vec<f64>], centre: &[f64]) -> Facet {
    let d = centre.len();
    let base = &pts[verts[0]];
    let rows = DMatrix::from_fn(d - 1, d, |r, c| pts[verts[r + 1]][c] - base[c]);
    let mut normal: Vec<f64> = (0..d)
        .map(|m| {
            let minor = rows.clone().remove_column(m);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * minor.determinant()
        })
        .collect();
    let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in normal.iter_mut() {
        *x /= norm;
    }
    let mut offset = dot(&normal, base);
    if dot(&normal, centre) > offset {
        for x in normal.iter_mut() {
            *x = -*x;
        }
        offset = -offset;
    }
    Facet { verts, normal, offset }
}

/// Incremental convex hull with a triangulated boundary; the volume is the
/// sum of cones from an interior point.
fn incremental_hull_volume(pts: &[Vec<f64>], d: usize) -> f64 {
    let spread = (0..d)
        .map(|c| {
            let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[c]), hi.max(p[c]))
            });
            hi - lo
        })
        .fold(0.0, f64::max);
    if spread == 0.0 {
        return 0.0;
    }
    let eps = 1e-10 * spread;
    // greedy affinely independent simplex
    let mut simplex = vec![0usize];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let origin = DVector::from_column_slice(&pts[0]);
    for _ in 0..d {
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for (a, p) in pts.iter().enumerate() {
            let mut r = DVector::from_column_slice(p) - &origin;
            for b in &basis {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
            let len = r.norm();
            if best.as_ref().is_none_or(|(_, bl, _)| len > *bl) {
                best = Some((a, len, r));
            }
        }
        let (a, len, r) = best.expect("non-empty");
        if len <= eps {
            return 0.0;
        }
        simplex.push(a);
        basis.push(r / len);
    }
    let centre: Vec<f64> = (0..d)
        .map(|c| simplex.iter().map(|&a| pts[a][c]).sum::<f64>() / (d + 1) as f64)
        .collect();
    let mut facets: Vec<Facet> = (0..=d)
        .map(|skip| {
            let verts: Vec<usize> = simplex.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &a)| a).collect();
            make_facet(verts, pts, &centre)
        })
        .collect();
    for (p_idx, p) in pts.iter().enumerate() {
        if simplex.contains(&p_idx) {
            continue;
        }
        let visible: Vec<bool> = facets.iter().map(|f| dot(&f.normal, p) - f.offset > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..d {
                let mut r: Vec<usize> = f.verts.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &a)| a).collect();
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridges.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        let mut kept: Vec<Facet> = facets.into_iter().zip(visible).filter(|(_, v)| !v).map(|(f, _)| f).collect();
        for mut r in horizon {
            r.push(p_idx);
            kept.push(make_facet(r, pts, &centre));
        }
        facets = kept;
    }
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    facets
        .iter()
        .map(|f| {
            let m = DMatrix::from_fn(d, d, |r, c| pts[f.verts[r]][c] - centre[c]);
            m.determinant().abs()
        })
        .sum::<f64>()
        / fact
}

/// `vol_i` of the orthogonal projection of `K` onto `F^⊥`, `i = n − dim F`.
pub fn projected_volume(k: &Polytope, f: &Subspace) -> Result<f64> {
    if f.ambient_dim() != k.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "polytope in R^{} projected along a subspace of R^{}",
            k.ambient_dim,
            f.ambient_dim()
        )));
    }
    Ok(volume_in(k, &complement(f)))
}

/// `vol_i` of the orthogonal projection of `K` onto `E` (`i = dim E`).
pub fn volume_in(k: &Polytope, e: &Subspace) -> f64 {
    let frame_t = e.frame().transpose();
    let coords: Vec<Vec<f64>> = k
        .vertices
        .iter()
        .map(|v| (&frame_t * DVector::from_column_slice(v)).iter().copied().collect())
        .collect();
    hull_volume(&coords, e.dim())
}

type Evaluator = Arc<dyn Fn(&Polytope) -> f64 + Send + Sync>;

/// A functional on polytopes with a declared homogeneity degree.
#[derive(Clone)]
pub struct Valuation {
    pub degree: usize,
    pub name: String,
    eval: Evaluator,
}

impl fmt::Debug for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Valuation({}, degree {})", self.name, self.degree)
    }
}

impl Valuation {
    pub fn new<F>(name: &str, degree: usize, eval: F) -> Self
    where
        F: Fn(&Polytope) -> f64 + Send + Sync + 'static,
    {
        Self {
            degree,
            name: name.to_string(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, k: &Polytope) -> f64 {
        (self.eval)(k)
    }

    /// `vol_n`.
    pub fn volume(n: usize) -> Self {
        Self::new("volume", n, Polytope::volume)
    }

    /// `K ↦ vol_i(Pr_E K)` for a fixed `E`.
    pub fn projection_onto(e: &Subspace) -> Self {
        let e = e.clone();
        Self::new("projection", e.dim(), move |k| volume_in(k, &e))
    }

    /// `K ↦ ∫ f(F) vol_i(pr_{F^⊥} K) dF` over `Gr_{n−i,n}`, with every
    /// evaluation reusing the same sample streams.
    pub fn projection(f: &GrassmannFunction, q: &QuadratureSpec) -> Self {
        let f = f.clone();
        let q = *q;
        let degree = f.ambient_dim() - f.grass_dim();
        Self::new("projection valuation", degree, move |k| {
            projection_valuation(&f, k, &q).map(|e| e.value).unwrap_or(f64::NAN)
        })
    }
}

/// Monte Carlo value of `∫_{Gr_{n−i,n}} f(F) vol_i(pr_{F^⊥} K) dF`.
pub fn projection_valuation(f: &GrassmannFunction, k: &Polytope, q: &QuadratureSpec) -> Result<Estimate> {
    q.validate()?;
    if f.ambient_dim() != k.ambient_dim {
        return Err(Error::DimensionMismatch("function and polytope live in different dimensions".into()));
    }
    let n = f.ambient_dim();
    let m = f.grass_dim();
    let values = sample_values(q.sample_count, &q.sampler, |rng, _| {
        let sf = haar_subspace(n, m, rng).expect("valid dims");
        f.eval(&sf) * volume_in(k, &complement(&sf))
    });
    Ok(Estimate::from_samples(&values, q.estimator))
}

/// `φ(A) / vol_i(A)` for a probe body `A ⊂ E`.
pub fn klain_section(phi: &Valuation, e: &Subspace, probe: &Polytope) -> Result<f64> {
    if e.dim() != phi.degree {
        return Err(Error::DimensionMismatch(format!(
            "degree-{} valuation restricted to a {}-subspace",
            phi.degree,
            e.dim()
        )));
    }
    let p = e.projector();
    for v in &probe.vertices {
        let x = DVector::from_column_slice(v);
        if (&p * &x - &x).norm() > 1e-9 * (1.0 + x.norm()) {
            return Err(Error::InvalidParameter("probe body does not lie in the subspace".into()));
        }
    }
    let vol = volume_in(probe, e);
    if vol <= 1e-12 {
        return Err(Error::ZeroVolumeProbe);
    }
    Ok(phi.eval(probe) / vol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub degree: usize,
    pub trials: usize,
    pub additivity_residual: f64,
    pub evenness_residual: f64,
    pub translation_residual: f64,
    pub homogeneity_slope: f64,
    pub tolerance: f64,
    pub additive: bool,
    pub even: bool,
    pub translation_invariant: bool,
    pub homogeneous: bool,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.additive && self.even && self.translation_invariant && self.homogeneous
    }
}

/// Slope tolerance of the homogeneity regression.
pub const SLOPE_TOL: f64 = 0.01;

/// Random rotated box split into two overlapping boxes `(K1, K2, K1∪K2, K1∩K2)`.
fn split_box(n: usize, rng: &mut ChaCha8Rng) -> [Polytope; 4] {
    let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..0.0)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.5..1.5)).collect();
    let axis = rng.gen_range(0..n);
    let (a, b) = (lo[axis], hi[axis]);
    let s1 = a + (b - a) * rng.gen_range(0.2..0.5);
    let s2 = s1 + (b - s1) * rng.gen_range(0.1..0.6);
    let mut hi1 = hi.clone();
    hi1[axis] = s2;
    let mut lo2 = lo.clone();
    lo2[axis] = s1;
    let (mut lo12, mut hi12) = (lo.clone(), hi.clone());
    lo12[axis] = s1;
    hi12[axis] = s2;
    let g = haar_rotation(n, rng).expect("n >= 1");
    let shift: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let place = |p: Polytope| p.mapped(g.matrix()).translated(&shift);
    [
        place(Polytope::cuboid(&lo, &hi1).expect("box")),
        place(Polytope::cuboid(&lo2, &hi).expect("box")),
        place(Polytope::cuboid(&lo, &hi).expect("box")),
        place(Polytope::cuboid(&lo12, &hi12).expect("box")),
    ]
}

/// Least-squares slope of `log φ(tK)` against `log t`.
pub fn homogeneity_slope(phi: &Valuation, k: &Polytope) -> f64 {
    let ts = [0.5, 0.7, 1.0, 1.4, 2.0];
    let xs: Vec<f64> = ts.iter().map(|t: &f64| t.ln()).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| phi.eval(&k.scaled(t)).abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Additivity on split boxes, evenness, translation invariance and
/// homogeneity of degree `degree`. Residuals are relative to `1 + |φ(K)|`.
pub fn check_axioms(phi: &Valuation, n: usize, degree: usize, sampler: &SeededSampler, trials: usize, tolerance: f64) -> AxiomReport {
    let mut add = 0.0f64;
    let mut even = 0.0f64;
    let mut trans = 0.0f64;
    let mut worst_slope = degree as f64;
    for t in 0..trials.max(1) {
        let mut rng = sampler.stream(t as u64);
        let [k1, k2, union, inter] = split_box(n, &mut rng);
        let (a, b, u, c) = (phi.eval(&k1), phi.eval(&k2), phi.eval(&union), phi.eval(&inter));
        add = add.max((u + c - a - b).abs() / (1.0 + u.abs()));
        let k = Polytope::random(n, n + 4, &mut rng);
        let base = phi.eval(&k);
        even = even.max((phi.eval(&k.reflected()) - base).abs() / (1.0 + base.abs()));
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        trans = trans.max((phi.eval(&k.translated(&x)) - base).abs() / (1.0 + base.abs()));
        let slope = homogeneity_slope(phi, &union);
        if (slope - degree as f64).abs() > (worst_slope - degree as f64).abs() {
            worst_slope = slope;
        }
    }
    AxiomReport {
        degree,
        trials,
        additivity_residual: add,
        evenness_residual: even,
        translation_residual: trans,
        homogeneity_slope: worst_slope,
        tolerance,
        additive: add <= tolerance,
        even: even <= tolerance,
        translation_invariant: trans <= tolerance,
        homogeneous: (worst_slope - degree as f64).abs() <= SLOPE_TOL,
    }
}

/// Result of comparing the Klain section of the projection valuation with
/// the cosine transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeResidual {
    /// `max_E |γ(φ)(E) − (T f)(E)|`.
    pub residual: f64,
    /// Monte Carlo standard error of `(T f)(E)` at the worst probe.
    pub stderr: f64,
    /// Smallest standard error over probes.
    pub min_stderr: f64,
}

impl BridgeResidual {
    pub fn passes(&self, sigmas: f64) -> bool {
        self.residual < sigmas * self.min_stderr
    }
}

/// For `f` on `Gr_{n−i,n}`: compares `γ(φ_f)(E)` (unit cube probe in `E`)
/// with `∫ f(F) |cos(E, F^⊥)| dF`, both from the same sample streams.
pub fn bridge_residual(f: &GrassmannFunction, q: &QuadratureSpec, probes: &[Subspace]) -> Result<BridgeResidual> {
    q.validate()?;
    let n = f.ambient_dim();
    let i = n - f.grass_dim();
    let phi = Valuation::projection(f, q);
    let mut out = BridgeResidual {
        residual: 0.0,
        stderr: 0.0,
        min_stderr: f64::INFINITY,
    };
    for e in probes {
        if e.ambient_dim() != n || e.dim() != i {
            return Err(Error::DimensionMismatch(format!("probe must be an {i}-subspace of R^{n}")));
        }
        let gamma = klain_section(&phi, e, &Polytope::probe_in(e, ProbeShape::Cube))?;
        let values = sample_values(q.sample_count, &q.sampler, |rng, _| {
            let sf = haar_subspace(n, f.grass_dim(), rng).expect("valid dims");
            f.eval(&sf) * cos_angle(e, &complement(&sf)).expect("same ambient")
        });
        let t = Estimate::from_samples(&values, q.estimator);
        let r = (gamma - t.value).abs();
        if r >= out.residual {
            out.residual = r;
            out.stderr = t.stderr;
        }
        out.min_stderr = out.min_stderr.min(t.stderr);
    }
    Ok(out)
}
