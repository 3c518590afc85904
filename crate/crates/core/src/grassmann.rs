//! Subspaces of ℝⁿ, rotations, Haar sampling and the angle kernels.
//!
//! A [`Subspace`] is carried as an orthonormal frame. Frames are not unique,
//! so equality is always decided on projectors.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on `|R_ii|` below which a span is treated as degenerate.
const RANK_TOL: f64 = 1e-10;

/// Projector Frobenius distance below which two subspaces are equal.
pub const SUBSPACE_EQ_TOL: f64 = 1e-8;

/// A linear subspace of ℝⁿ with an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a frame that is already orthonormal. The caller is trusted.
    pub fn from_orthonormal(frame: DMatrix<f64>) -> Self {
        Self { frame }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            frame: DMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            frame: DMatrix::identity(n, n),
        }
    }

    /// Span of the first `k` standard basis vectors.
    pub fn coordinate(n: usize, k: usize) -> Self {
        assert!(k <= n, "coordinate subspace of dimension {k} in R^{n}");
        Self {
            frame: DMatrix::identity(n, n).columns(0, k).into_owned(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// `‖frameᵀ·frame − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        (self.frame.transpose() * &self.frame - DMatrix::<f64>::identity(k, k)).norm()
    }

    pub fn same_span(&self, other: &Subspace) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() == other.dim()
            && (self.projector() - other.projector()).norm() < SUBSPACE_EQ_TOL
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        let p = &self.frame * (self.frame.transpose() * v);
        (p - v).norm() <= tol * v.norm().max(1.0)
    }
}

/// Orthonormalizes `vectors` (as columns) into a frame of the same span.
pub fn make_subspace(vectors: &[DVector<f64>]) -> Result<Subspace> {
    let n = match vectors.first() {
        Some(v) => v.len(),
        None => {
            return Err(Error::InvalidParameter(
                "make_subspace needs at least one vector; use Subspace::zero".into(),
            ))
        }
    };
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(
            "vectors of differing lengths".into(),
        ));
    }
    if vectors.len() > n {
        return Err(Error::DegenerateSpan);
    }
    let m = DMatrix::from_columns(vectors);
    orthonormalize(m).ok_or(Error::DegenerateSpan)
}

/// QR with a sign-normalized diagonal; `None` on rank deficiency.
fn orthonormalize(m: DMatrix<f64>) -> Option<Subspace> {
    let k = m.ncols();
    let scale = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let d = r[(j, j)];
        if d.abs() <= RANK_TOL * scale {
            return None;
        }
        if d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Some(Subspace { frame: q })
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed point of `Gr_{k,n}`.
pub fn haar_subspace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Subspace> {
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {k} exceeds ambient dimension {n}"
        )));
    }
    if k == 0 {
        return Ok(Subspace::zero(n));
    }
    loop {
        if let Some(s) = orthonormalize(gaussian_matrix(n, k, rng)) {
            return Ok(s);
        }
    }
}

/// An element of SO(n).
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Validates orthogonality (1e−10) and unit determinant (1e−9).
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("rotation must be square".into()));
        }
        let n = matrix.nrows();
        let defect = (matrix.transpose() * &matrix - DMatrix::<f64>::identity(n, n)).norm();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "matrix is not orthogonal (defect {defect:e})"
            )));
        }
        if (matrix.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("determinant is not +1".into()));
        }
        Ok(Self { matrix })
    }

    /// Rotation by `angle` in the oriented `(a, b)` coordinate plane.
    pub fn plane(n: usize, a: usize, b: usize, angle: f64) -> Self {
        let mut m = DMatrix::identity(n, n);
        let (s, c) = angle.sin_cos();
        m[(a, a)] = c;
        m[(b, b)] = c;
        m[(b, a)] = s;
        m[(a, b)] = -s;
        Self { matrix: m }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Self {
            matrix: &self.matrix * &other.matrix,
        }
    }
}

/// Haar-distributed element of SO(n).
pub fn haar_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Rotation> {
    if n == 0 {
        return Err(Error::InvalidParameter("SO(0) is not supported".into()));
    }
    let mut q = haar_orthogonal(n, rng);
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok(Rotation { matrix: q })
}

/// Haar-distributed element of O(n) (QR with sign fix).
fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    loop {
        if let Some(s) = orthonormalize(gaussian_matrix(n, n, rng)) {
            return s.frame;
        }
    }
}

/// Haar element of `S(O(k) × O(n−k))`, the stabilizer in SO(n) of the
/// coordinate subspace spanned by the first `k` basis vectors.
pub fn haar_stabilizer<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Rotation> {
    if k > n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "no stabilizer of a {k}-subspace in R^{n}"
        )));
    }
    let a = haar_orthogonal(k, rng);
    let b = haar_orthogonal(n - k, rng);
    let mut m = DMatrix::zeros(n, n);
    m.view_mut((0, 0), (k, k)).copy_from(&a);
    m.view_mut((k, k), (n - k, n - k)).copy_from(&b);
    let det_a = if k == 0 { 1.0 } else { a.determinant() };
    let det_b = if k == n { 1.0 } else { b.determinant() };
    if det_a * det_b < 0.0 {
        // compose with a reflection inside one block; stays Haar on the coset
        m.column_mut(0).neg_mut();
    }
    Ok(Rotation { matrix: m })
}

/// Orthogonal complement, with a frame that depends only on the input frame.
pub fn complement(e: &Subspace) -> Subspace {
    let n = e.ambient_dim();
    let k = e.dim();
    let mut basis: Vec<DVector<f64>> = e.frame.column_iter().map(|c| c.into_owned()).collect();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(n - k);
    let mut used = vec![false; n];
    while out.len() < n - k {
        // pick the standard basis vector with the largest residual
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (a, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut r = DVector::zeros(n);
            r[a] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                best = Some((a, r, norm));
            }
        }
        let (a, r, norm) = best.expect("complement ran out of candidates");
        used[a] = true;
        let v = r / norm;
        basis.push(v.clone());
        out.push(v);
    }
    if out.is_empty() {
        Subspace::zero(n)
    } else {
        Subspace {
            frame: DMatrix::from_columns(&out),
        }
    }
}

/// `g·E`.
pub fn act(g: &Rotation, e: &Subspace) -> Result<Subspace> {
    if g.n() != e.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "rotation of R^{} acting on subspace of R^{}",
            g.n(),
            e.ambient_dim()
        )));
    }
    Ok(Subspace {
        frame: &g.matrix * &e.frame,
    })
}

/// Principal angles θ₁ ≤ … ≤ θ_r, r = min(dim E, dim F).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAngles {
    pub angles: Vec<f64>,
}

fn check_same_ambient(e: &Subspace, f: &Subspace) -> Result<()> {
    if e.ambient_dim() != f.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of R^{} and R^{}",
            e.ambient_dim(),
            f.ambient_dim()
        )));
    }
    Ok(())
}

/// Singular values of `frame(E)ᵀ·frame(F)` clamped to `[0, 1]`, descending.
fn cross_singular_values(e: &Subspace, f: &Subspace) -> Vec<f64> {
    if e.dim() == 0 || f.dim() == 0 {
        return Vec::new();
    }
    let m = e.frame.transpose() * &f.frame;
    let mut s: Vec<f64> = m
        .singular_values()
        .iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn principal_angles(e: &Subspace, f: &Subspace) -> Result<PrincipalAngles> {
    check_same_ambient(e, f)?;
    let angles = cross_singular_values(e, f)
        .into_iter()
        .map(f64::acos)
        .collect();
    Ok(PrincipalAngles { angles })
}

/// Product of cosines of principal angles, assuming `dim E ≤ dim F`.
fn cos_le(e: &Subspace, f: &Subspace) -> f64 {
    let k = e.dim();
    if k == 0 {
        return 1.0;
    }
    if k == f.dim() {
        let m = e.frame.transpose() * &f.frame;
        return m.determinant().abs().min(1.0);
    }
    cross_singular_values(e, f).iter().product()
}

/// `|cos(E, F)|`: the volume ratio of projecting a body in E onto F when
/// `dim E ≤ dim F`, and the same quantity for the complements otherwise.
pub fn cos_angle(e: &Subspace, f: &Subspace) -> Result<f64> {
    check_same_ambient(e, f)?;
    if e.dim() <= f.dim() {
        Ok(cos_le(e, f))
    } else {
        Ok(cos_le(&complement(e), &complement(f)))
    }
}

/// `|sin(E, F)| = |cos(E, F^⊥)|`.
pub fn sin_angle(e: &Subspace, f: &Subspace) -> Result<f64> {
    check_same_ambient(e, f)?;
    cos_angle(e, &complement(f))
}

/// Ratio `vol(Pr_F A) / vol(A)` for the parallelotope spanned by the columns
/// of `edges` (n × i, i ≤ dim F). Independent route to [`cos_angle`].
pub fn projected_volume_ratio(edges: &DMatrix<f64>, f: &Subspace) -> f64 {
    let projected = f.projector() * edges;
    let vol = gram_volume(edges);
    gram_volume(&projected) / vol
}

/// `sqrt(det(AᵀA))`, the volume of the parallelotope spanned by the columns.
pub fn gram_volume(edges: &DMatrix<f64>) -> f64 {
    if edges.ncols() == 0 {
        return 1.0;
    }
    (edges.transpose() * edges).determinant().max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::SeededSampler;
    use std::f64::consts::PI;

    fn e(n: usize, a: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[a] = 1.0;
        v
    }

    #[test]
    fn coordinate_plane_projector() {
        let s = make_subspace(&[e(3, 0), e(3, 1)]).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
        assert!((s.projector() - expected).norm() < 1e-12);
        let t = make_subspace(&[e(3, 0), e(3, 0) + e(3, 1)]).unwrap();
        assert!(s.same_span(&t));
    }

    #[test]
    fn dependent_vectors_rejected() {
        let err = make_subspace(&[e(3, 0), e(3, 0) * 2.0]).unwrap_err();
        assert_eq!(err, Error::DegenerateSpan);
        assert_eq!(err.to_string(), "degenerate span: input vectors are linearly dependent");
    }

    #[test]
    fn haar_extremes() {
        let mut rng = SeededSampler::new(1).stream(0);
        let z = haar_subspace(3, 0, &mut rng).unwrap();
        assert_eq!(z.dim(), 0);
        assert!(z.projector().norm() < 1e-15);
        let f = haar_subspace(3, 3, &mut rng).unwrap();
        assert!(f.same_span(&Subspace::full(3)));
        assert!(haar_subspace(3, 4, &mut rng).is_err());
    }

    #[test]
    fn so1_is_trivial() {
        let mut rng = SeededSampler::new(2).stream(0);
        let g = haar_rotation(1, &mut rng).unwrap();
        assert_eq!(g.matrix()[(0, 0)], 1.0);
    }

    #[test]
    fn rotation_closure() {
        let s = SeededSampler::new(3);
        let g = haar_rotation(5, &mut s.stream(0)).unwrap();
        let h = haar_rotation(5, &mut s.stream(1)).unwrap();
        let gh = g.compose(&h);
        assert!(Rotation::from_matrix(gh.matrix().clone()).is_ok());
    }

    #[test]
    fn stabilizer_fixes_coordinate_subspace() {
        let s = SeededSampler::new(4);
        for (n, k) in [(3, 1), (4, 2), (5, 2), (4, 0), (4, 4)] {
            for t in 0..20 {
                let h = haar_stabilizer(n, k, &mut s.stream(t)).unwrap();
                assert!(Rotation::from_matrix(h.matrix().clone()).is_ok());
                let e0 = Subspace::coordinate(n, k);
                assert!(act(&h, &e0).unwrap().same_span(&e0));
            }
        }
    }

    #[test]
    fn complement_examples() {
        let l = make_subspace(&[e(3, 0)]).unwrap();
        let c = complement(&l);
        assert!(c.same_span(&make_subspace(&[e(3, 1), e(3, 2)]).unwrap()));
        assert_eq!(complement(&Subspace::full(4)).dim(), 0);
        let mut rng = SeededSampler::new(5).stream(0);
        let s = haar_subspace(5, 2, &mut rng).unwrap();
        let sum = s.projector() + complement(&s).projector();
        assert!((sum - DMatrix::<f64>::identity(5, 5)).norm() < 1e-9);
        assert!(complement(&complement(&s)).same_span(&s));
        assert!(complement(&s).orthonormality_defect() < 1e-10);
    }

    #[test]
    fn act_examples() {
        let l = make_subspace(&[e(3, 0)]).unwrap();
        assert!(act(&Rotation::identity(3), &l).unwrap().same_span(&l));
        let g = Rotation::plane(3, 0, 1, PI / 2.0);
        let img = act(&g, &l).unwrap();
        assert!(img.same_span(&make_subspace(&[e(3, 1)]).unwrap()));
        let mut rng = SeededSampler::new(6).stream(0);
        let h = haar_rotation(3, &mut rng).unwrap();
        let back = act(&h, &act(&h.inverse(), &l).unwrap()).unwrap();
        assert!(back.same_span(&l));
        assert!(act(&Rotation::identity(4), &l).is_err());
    }

    #[test]
    fn principal_angle_examples() {
        let p = make_subspace(&[e(3, 0), e(3, 1)]).unwrap();
        let a = principal_angles(&p, &p).unwrap().angles;
        assert!(a.iter().all(|x| x.abs() < 1e-7));
        let th = PI / 3.0;
        let l1 = make_subspace(&[e(2, 0)]).unwrap();
        let l2 = make_subspace(&[e(2, 0) * th.cos() + e(2, 1) * th.sin()]).unwrap();
        let a = principal_angles(&l1, &l2).unwrap().angles;
        assert!((a[0] - th).abs() < 1e-12);
        let q = make_subspace(&[e(3, 0), e(3, 1) * th.cos() + e(3, 2) * th.sin()]).unwrap();
        let a = principal_angles(&p, &q).unwrap().angles;
        assert!(a[0].abs() < 1e-7 && (a[1] - th).abs() < 1e-12);
    }

    #[test]
    fn cos_and_sin_examples() {
        let p = make_subspace(&[e(3, 0), e(3, 1)]).unwrap();
        assert!((cos_angle(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        let l3 = make_subspace(&[e(3, 2)]).unwrap();
        assert!(cos_angle(&l3, &p).unwrap().abs() < 1e-12);
        let th = PI / 3.0;
        let l1 = make_subspace(&[e(2, 0)]).unwrap();
        let l2 = make_subspace(&[e(2, 0) * th.cos() + e(2, 1) * th.sin()]).unwrap();
        assert!((cos_angle(&l1, &l2).unwrap() - 0.5).abs() < 1e-12);
        // dim E > dim F goes through the complements
        let l = make_subspace(&[e(3, 0)]).unwrap();
        assert!((cos_angle(&p, &l).unwrap() - 1.0).abs() < 1e-12);

        let perp = make_subspace(&[e(2, 1)]).unwrap();
        assert!((sin_angle(&l1, &perp).unwrap() - 1.0).abs() < 1e-12);
        assert!(sin_angle(&l1, &l1).unwrap().abs() < 1e-12);
        let th = PI / 6.0;
        let l3 = make_subspace(&[e(2, 0) * th.cos() + e(2, 1) * th.sin()]).unwrap();
        assert!((sin_angle(&l1, &l3).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_subspace_convention() {
        let z = Subspace::zero(3);
        let p = Subspace::coordinate(3, 2);
        assert_eq!(cos_angle(&z, &p).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_ambient_rejected() {
        let a = Subspace::coordinate(3, 1);
        let b = Subspace::coordinate(4, 1);
        assert!(cos_angle(&a, &b).is_err());
        assert!(principal_angles(&a, &b).is_err());
    }
}
