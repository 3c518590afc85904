//! Segments of unramified characters `ν^a` and the multisegment bookkeeping
//! that identifies the image of the cosine transform as a `GL(n)`-module.
//!
//! Exponents are stored doubled so that half-integers stay exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The character `ν^{exponent2/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CuspidalPoint {
    pub exponent2: i64,
}

impl CuspidalPoint {
    pub fn new(exponent2: i64) -> Self {
        Self { exponent2 }
    }

    pub fn dual(self) -> Self {
        Self::new(-self.exponent2)
    }
}

impl fmt::Display for CuspidalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.exponent2;
        if e % 2 == 0 {
            write!(f, "{}", e / 2)
        } else {
            write!(f, "{e}/2")
        }
    }
}

/// `[ν^a, ν^{a+1}, …, ν^b]`, stored as doubled endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub start2: i64,
    pub end2: i64,
}

impl Segment {
    pub fn new(start2: i64, end2: i64) -> Result<Self> {
        if end2 < start2 || (end2 - start2) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "[{}..{}] is not a segment",
                CuspidalPoint::new(start2),
                CuspidalPoint::new(end2)
            )));
        }
        Ok(Self { start2, end2 })
    }

    /// Segment with integer endpoints `[a, b]`.
    pub fn integral(a: i64, b: i64) -> Result<Self> {
        Self::new(2 * a, 2 * b)
    }

    pub fn start(&self) -> CuspidalPoint {
        CuspidalPoint::new(self.start2)
    }

    pub fn end(&self) -> CuspidalPoint {
        CuspidalPoint::new(self.end2)
    }

    pub fn len(&self) -> usize {
        ((self.end2 - self.start2) / 2 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = CuspidalPoint> {
        (self.start2..=self.end2).step_by(2).map(CuspidalPoint::new)
    }

    fn line(&self) -> i64 {
        self.start2.rem_euclid(2)
    }

    fn same_line(&self, other: &Segment) -> Result<()> {
        if self.line() == other.line() {
            Ok(())
        } else {
            Err(Error::IncomparableLines)
        }
    }

    pub fn contains(&self, other: &Segment) -> bool {
        self.line() == other.line() && self.start2 <= other.start2 && other.end2 <= self.end2
    }

    /// The union is a segment and neither contains the other.
    pub fn linked(&self, other: &Segment) -> Result<bool> {
        self.same_line(other)?;
        let union_is_segment = self.start2.max(other.start2) <= self.end2.min(other.end2) + 2;
        Ok(union_is_segment && !self.contains(other) && !other.contains(self))
    }

    /// Linked with empty intersection.
    pub fn juxtaposed(&self, other: &Segment) -> Result<bool> {
        Ok(self.linked(other)? && self.end2.min(other.end2) < self.start2.max(other.start2))
    }

    /// Linked, and `other` starts strictly to the right of `self`.
    pub fn precedes(&self, other: &Segment) -> Result<bool> {
        Ok(self.linked(other)? && other.start2 > self.start2)
    }

    /// `(Δ ∪ Δ', Δ ∩ Δ')`; the intersection is `None` for juxtaposed pairs.
    pub fn union_cap(&self, other: &Segment) -> Result<(Segment, Option<Segment>)> {
        if !self.linked(other)? {
            return Err(Error::NotLinked);
        }
        let union = Segment {
            start2: self.start2.min(other.start2),
            end2: self.end2.max(other.end2),
        };
        let (a, b) = (self.start2.max(other.start2), self.end2.min(other.end2));
        Ok((union, (a <= b).then_some(Segment { start2: a, end2: b })))
    }

    /// `[a, b]* = [−b, −a]`.
    pub fn dual(&self) -> Segment {
        Segment {
            start2: -self.end2,
            end2: -self.start2,
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.start(), self.end())
    }
}

/// Multiset of segments, kept sorted so that equality ignores order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct Multisegment {
    segments: Vec<Segment>,
}

impl From<Vec<Segment>> for Multisegment {
    fn from(mut segments: Vec<Segment>) -> Self {
        segments.sort();
        Self { segments }
    }
}

impl From<Multisegment> for Vec<Segment> {
    fn from(m: Multisegment) -> Self {
        m.segments
    }
}

impl Multisegment {
    pub fn new(segments: Vec<Segment>) -> Self {
        segments.into()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn dual(&self) -> Multisegment {
        self.segments.iter().map(Segment::dual).collect::<Vec<_>>().into()
    }

    /// Sorted cuspidal support with multiplicity.
    pub fn support(&self) -> Vec<CuspidalPoint> {
        let mut out: Vec<CuspidalPoint> = self.segments.iter().flat_map(|s| s.points()).collect();
        out.sort();
        out
    }

    /// The product of the segment representations is irreducible iff no two
    /// segments are linked.
    pub fn product_irreducible(&self) -> Result<bool> {
        for (a, s) in self.segments.iter().enumerate() {
            for t in &self.segments[a + 1..] {
                if s.linked(t)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Multisegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.segments.iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

pub fn multiseg_equal(a: &Multisegment, b: &Multisegment) -> bool {
    a == b
}

pub fn dual_segment(s: &Segment) -> Segment {
    s.dual()
}

pub fn dual_multisegment(m: &Multisegment) -> Multisegment {
    m.dual()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModuleKind {
    Irreducible { multisegment: Multisegment },
    LengthTwo { socle: Multisegment, quotient: Multisegment },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDescriptor {
    #[serde(flatten)]
    pub kind: ModuleKind,
    pub unramified: bool,
}

impl ModuleDescriptor {
    pub fn is_irreducible(&self) -> bool {
        matches!(self.kind, ModuleKind::Irreducible { .. })
    }

    /// Irreducible submodule when it is determined by the descriptor.
    pub fn socle(&self) -> &Multisegment {
        match &self.kind {
            ModuleKind::Irreducible { multisegment } => multisegment,
            ModuleKind::LengthTwo { socle, .. } => socle,
        }
    }

    pub fn quotient(&self) -> &Multisegment {
        match &self.kind {
            ModuleKind::Irreducible { multisegment } => multisegment,
            ModuleKind::LengthTwo { quotient, .. } => quotient,
        }
    }

    /// The contragredient module: socle and quotient swap and dualize.
    pub fn dual(&self) -> ModuleDescriptor {
        let kind = match &self.kind {
            ModuleKind::Irreducible { multisegment } => ModuleKind::Irreducible {
                multisegment: multisegment.dual(),
            },
            ModuleKind::LengthTwo { socle, quotient } => ModuleKind::LengthTwo {
                socle: quotient.dual(),
                quotient: socle.dual(),
            },
        };
        ModuleDescriptor {
            kind,
            unramified: self.unramified,
        }
    }
}

impl fmt::Display for ModuleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ModuleKind::Irreducible { multisegment } => write!(f, "Irreducible {multisegment}"),
            ModuleKind::LengthTwo { socle, quotient } => {
                write!(f, "LengthTwo socle={socle} quotient={quotient}")
            }
        }
    }
}

/// Structure of `⟨Δ⟩ × ⟨Δ'⟩` when `Δ'` precedes `Δ`: socle `⟨Δ, Δ'⟩`,
/// quotient `⟨Δ ∪ Δ'⟩ × ⟨Δ ∩ Δ'⟩` (empty intersection dropped).
pub fn socle_quotient(delta: &Segment, delta_prime: &Segment) -> Result<ModuleDescriptor> {
    if !delta_prime.precedes(delta)? {
        return Err(Error::PrecedenceFails);
    }
    let (union, cap) = delta.union_cap(delta_prime)?;
    let mut quotient = vec![union];
    quotient.extend(cap);
    Ok(ModuleDescriptor {
        kind: ModuleKind::LengthTwo {
            socle: Multisegment::new(vec![*delta, *delta_prime]),
            quotient: Multisegment::new(quotient),
        },
        unramified: true,
    })
}

/// The segments attached to the source and target of `T_{i,n−i}`, with
/// `κ = (n−1)/2`:
/// target `[κ−i, κ−1]`, `[−κ, κ−i]`; source `[−κ+i, κ]`, `[−κ+1, −κ+i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformSegments {
    pub target: Segment,
    pub target_prime: Segment,
    pub source: Segment,
    pub source_prime: Segment,
}

pub fn transform_segments(n: usize, i: usize) -> Result<TransformSegments> {
    if n < 2 || i < 1 || i > n - 1 {
        return Err(Error::InvalidParameter(format!("need 1 <= i <= n-1, got n={n}, i={i}")));
    }
    let k2 = n as i64 - 1;
    let i2 = 2 * i as i64;
    Ok(TransformSegments {
        target: Segment::new(k2 - i2, k2 - 2)?,
        target_prime: Segment::new(-k2, k2 - i2)?,
        source: Segment::new(-k2 + i2, k2)?,
        source_prime: Segment::new(-k2 + 2, -k2 + i2)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageClassification {
    pub n: usize,
    pub i: usize,
    /// Structure of the target representation.
    pub descriptor: ModuleDescriptor,
    /// Structure of the source representation, when it is reducible.
    pub source: Option<ModuleDescriptor>,
    pub image: Multisegment,
    pub unramified: bool,
}

/// Identifies the image of the cosine transform. For `i ∈ {1, n−1}` both
/// sides are irreducible. Otherwise the irreducible quotient of the source
/// must coincide with the irreducible submodule of the target.
pub fn classify_image(n: usize, i: usize) -> Result<ImageClassification> {
    let s = transform_segments(n, i)?;
    let pair = Multisegment::new(vec![s.target, s.target_prime]);
    if i == 1 || i == n - 1 {
        if !pair.product_irreducible()? {
            return Err(Error::MultisegmentIdentity(format!("{pair} is linked for n={n}, i={i}")));
        }
        return Ok(ImageClassification {
            n,
            i,
            descriptor: ModuleDescriptor {
                kind: ModuleKind::Irreducible { multisegment: pair.clone() },
                unramified: true,
            },
            source: None,
            image: pair,
            unramified: true,
        });
    }
    let target = socle_quotient(&s.target, &s.target_prime)?;
    let source = socle_quotient(&s.source, &s.source_prime)?.dual();
    if source.quotient() != target.socle() {
        return Err(Error::MultisegmentIdentity(format!(
            "source quotient {} differs from target socle {} for n={n}, i={i}",
            source.quotient(),
            target.socle()
        )));
    }
    let image = target.socle().clone();
    Ok(ImageClassification {
        n,
        i,
        descriptor: target,
        source: Some(source),
        image,
        unramified: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: i64, b: i64) -> Segment {
        Segment::new(a, b).unwrap()
    }

    fn ms(v: &[(i64, i64)]) -> Multisegment {
        Multisegment::new(v.iter().map(|&(a, b)| seg(a, b)).collect())
    }

    #[test]
    fn relations() {
        let (a, b) = (seg(0, 2), seg(2, 4));
        assert!(a.linked(&b).unwrap() && !a.juxtaposed(&b).unwrap() && a.precedes(&b).unwrap());
        assert!(!b.precedes(&a).unwrap());
        assert!(seg(0, 0).juxtaposed(&seg(2, 2)).unwrap());
        assert!(!seg(0, 4).linked(&seg(2, 2)).unwrap());
        assert!(!seg(0, 0).linked(&seg(4, 4)).unwrap());
        assert!(seg(-3, -1).precedes(&seg(-1, 1)).unwrap());
        assert!(matches!(seg(0, 0).linked(&seg(1, 1)), Err(Error::IncomparableLines)));
        assert!(Segment::new(0, 1).is_err());
        assert!(Segment::new(2, 0).is_err());
    }

    #[test]
    fn union_and_cap() {
        let (u, c) = seg(-1, 1).union_cap(&seg(-3, -1)).unwrap();
        assert_eq!((u, c), (seg(-3, 1), Some(seg(-1, -1))));
        assert_eq!(seg(0, 0).union_cap(&seg(2, 2)).unwrap(), (seg(0, 2), None));
        assert!(matches!(seg(0, 4).union_cap(&seg(2, 2)), Err(Error::NotLinked)));
    }

    #[test]
    fn rendering() {
        assert_eq!(seg(-3, 1).to_string(), "[-3/2..1/2]");
        assert_eq!(seg(0, 2).to_string(), "[0..1]");
        assert_eq!(ms(&[(-1, 1), (-3, -1)]).to_string(), "{[-3/2..-1/2],[-1/2..1/2]}");
        assert_eq!(seg(1, 1).dual(), seg(-1, -1));
    }

    #[test]
    fn multiset_equality() {
        assert!(multiseg_equal(&ms(&[(0, 2), (2, 4)]), &ms(&[(2, 4), (0, 2)])));
        assert!(!multiseg_equal(&ms(&[(0, 2)]), &ms(&[(0, 0), (2, 2)])));
        assert!(!multiseg_equal(&ms(&[(0, 0)]), &ms(&[(0, 0), (0, 0)])));
    }

    #[test]
    fn socle_and_quotient() {
        let d = socle_quotient(&seg(-1, 1), &seg(-3, -1)).unwrap();
        assert_eq!(d.socle(), &ms(&[(-3, -1), (-1, 1)]));
        assert_eq!(d.quotient(), &ms(&[(-3, 1), (-1, -1)]));
        assert_eq!(d.socle().support(), d.quotient().support());
        let d = socle_quotient(&seg(2, 4), &seg(0, 0)).unwrap();
        assert_eq!(d.quotient(), &ms(&[(0, 4)]));
        assert!(matches!(socle_quotient(&seg(-3, -1), &seg(-1, 1)), Err(Error::PrecedenceFails)));
    }

    #[test]
    fn segment_endpoints() {
        let s = transform_segments(4, 2).unwrap();
        assert_eq!((s.target, s.target_prime), (seg(-1, 1), seg(-3, -1)));
        let s = transform_segments(4, 1).unwrap();
        assert_eq!((s.target, s.target_prime), (seg(1, 1), seg(-3, 1)));
        assert!(s.target_prime.contains(&s.target));
        let s = transform_segments(5, 2).unwrap();
        assert_eq!((s.target, s.target_prime), (seg(0, 2), seg(-4, 0)));
        assert!(s.target_prime.precedes(&s.target).unwrap());
        assert!(transform_segments(4, 0).is_err() && transform_segments(4, 4).is_err());
        for n in 2..=8 {
            for i in 1..n {
                let s = transform_segments(n, i).unwrap();
                assert_eq!(
                    [s.target.len(), s.target_prime.len(), s.source.len(), s.source_prime.len()],
                    [i, n - i, n - i, i]
                );
            }
        }
    }

    #[test]
    fn image_examples() {
        let c = classify_image(4, 1).unwrap();
        assert!(c.descriptor.is_irreducible());
        assert_eq!(c.image, ms(&[(1, 1), (-3, 1)]));
        let c = classify_image(4, 2).unwrap();
        assert!(!c.descriptor.is_irreducible());
        assert_eq!(c.image, ms(&[(-3, -1), (-1, 1)]));
        assert_eq!(classify_image(5, 2).unwrap().image, ms(&[(-4, 0), (0, 2)]));
        assert!(c.unramified);
    }

    #[test]
    fn image_identity_and_union_data() {
        for n in 2..=10 {
            for i in 1..n {
                let c = classify_image(n, i).unwrap();
                assert_eq!(c.descriptor.is_irreducible(), i == 1 || i == n - 1);
                if (2..=n - 2).contains(&i) {
                    let s = transform_segments(n, i).unwrap();
                    let (u, cap) = s.target.union_cap(&s.target_prime).unwrap();
                    assert_eq!(u.len(), n - 1);
                    let k2 = n as i64 - 1 - 2 * i as i64;
                    assert_eq!(cap, Some(seg(k2, k2)));
                }
            }
        }
    }

    #[test]
    fn exhaustive_pair_properties() {
        let mut all = Vec::new();
        for a in -8..=8 {
            for b in (a..=8).step_by(2) {
                all.push(seg(a, b));
            }
        }
        for s in &all {
            assert_eq!(s.dual().dual(), *s);
            for t in &all {
                if s.line() != t.line() {
                    assert!(s.linked(t).is_err());
                    continue;
                }
                let l = s.linked(t).unwrap();
                assert_eq!(l, t.linked(s).unwrap());
                let p = s.precedes(t).unwrap();
                if p {
                    assert!(l && !t.precedes(s).unwrap());
                    assert!(t.dual().precedes(&s.dual()).unwrap());
                }
                if s.contains(t) {
                    assert!(!l);
                }
                if l {
                    let (u, c) = s.union_cap(t).unwrap();
                    assert_eq!(s.len() + t.len(), u.len() + c.map_or(0, |c| c.len()));
                    assert_eq!(c.is_none(), s.juxtaposed(t).unwrap());
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let c = classify_image(6, 3).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ImageClassification>(&s).unwrap(), c);
    }
}
