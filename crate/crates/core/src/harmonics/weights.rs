//! Highest weights of SO(n), the `Λ⁺_k` classes and Weyl dimensions.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest weight `(m_1, …, m_{⌊n/2⌋})` of an irreducible SO(n) module.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HighestWeight {
    pub n: usize,
    pub m: Vec<i64>,
}

impl HighestWeight {
    pub fn new(n: usize, m: Vec<i64>) -> Result<Self> {
        let w = Self { n, m };
        w.validate()?;
        Ok(w)
    }

    /// Zero weight (trivial representation) of SO(n).
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            m: vec![0; n / 2],
        }
    }

    /// Accepts a shorter list and pads it with zeros.
    pub fn padded(n: usize, m: &[i64]) -> Result<Self> {
        let rank = n / 2;
        if m.len() > rank {
            return Err(invalid(n, m, format!("SO({n}) weights have {rank} entries")));
        }
        let mut full = m.to_vec();
        full.resize(rank, 0);
        Self::new(n, full)
    }

    pub fn rank(&self) -> usize {
        self.n / 2
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(invalid(n, &self.m, "SO(n) needs n >= 2".into()));
        }
        if self.m.len() != n / 2 {
            return Err(invalid(n, &self.m, format!("expected {} entries", n / 2)));
        }
        let r = self.m.len();
        for a in 0..r.saturating_sub(1) {
            let next = if n.is_multiple_of(2) && a + 1 == r - 1 {
                self.m[a + 1].abs()
            } else {
                self.m[a + 1]
            };
            if self.m[a] < next {
                return Err(invalid(n, &self.m, "entries must be non-increasing".into()));
            }
        }
        if n % 2 == 1 && self.m.last().is_some_and(|&x| x < 0) {
            return Err(invalid(n, &self.m, "entries must be non-negative for odd n".into()));
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.m.iter().all(|&x| x == 0)
    }

    /// `m_2`, or 0 when the rank is below 2.
    pub fn second(&self) -> i64 {
        self.m.get(1).copied().unwrap_or(0)
    }

    /// Number of nonzero entries.
    pub fn depth(&self) -> usize {
        self.m.iter().filter(|&&x| x != 0).count()
    }

    /// Membership in `Λ⁺_k`: all entries even and `m_a = 0` for `a > k`.
    pub fn in_lambda_plus(&self, k: usize) -> bool {
        self.m.iter().all(|x| x % 2 == 0) && self.depth() <= k
    }

    pub fn class(&self) -> WeightClass {
        WeightClass {
            n: self.n,
            members: (0..=self.n).map(|k| self.in_lambda_plus(k)).collect(),
        }
    }

    /// True when the character is not real-valued: `n ≡ 2 (mod 4)` and the
    /// last entry is nonzero. Such a weight and its sign flip are conjugate.
    pub fn is_complex(&self) -> bool {
        self.n % 4 == 2 && self.m.last().is_some_and(|&x| x != 0)
    }

    /// Sort key: entries by absolute value, positive before negative.
    fn key(&self) -> Vec<(i64, bool)> {
        self.m.iter().map(|&x| (x.abs(), x < 0)).collect()
    }
}

impl Ord for HighestWeight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.key().cmp(&other.key()))
    }
}

impl PartialOrd for HighestWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.m.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn invalid(n: usize, m: &[i64], reason: String) -> Error {
    Error::InvalidWeight {
        n,
        weight: m.to_vec(),
        reason,
    }
}

/// Membership of one weight in each `Λ⁺_k`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightClass {
    pub n: usize,
    pub members: Vec<bool>,
}

impl WeightClass {
    pub fn contains(&self, k: usize) -> bool {
        self.members.get(k).copied().unwrap_or(false)
    }
}

/// Weights occurring in functions on `Gr_{k,n}`: even entries, at most
/// `min(k, n−k)` of them nonzero, `m_1 ≤ cap`. Both signs of the last entry
/// occur when `2k = n`.
pub fn admissible_weights(n: usize, k: usize, cap_m1: i64) -> Result<Vec<HighestWeight>> {
    if n < 2 || k < 1 || k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "Grassmannian Gr_{{{k},{n}}} needs 1 <= k <= n-1"
        )));
    }
    let rank = n / 2;
    let depth = k.min(n - k);
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(depth);
    fill(&mut current, depth, cap_m1.max(-1), &mut out);
    let mut weights = Vec::new();
    for mut m in out {
        m.resize(rank, 0);
        let signed = n.is_multiple_of(2) && depth == rank && m[rank - 1] != 0;
        if signed {
            let mut neg = m.clone();
            neg[rank - 1] = -neg[rank - 1];
            weights.push(HighestWeight { n, m });
            weights.push(HighestWeight { n, m: neg });
        } else {
            weights.push(HighestWeight { n, m });
        }
    }
    weights.sort();
    Ok(weights)
}

fn fill(current: &mut Vec<i64>, depth: usize, bound: i64, out: &mut Vec<Vec<i64>>) {
    if current.len() == depth {
        out.push(current.clone());
        return;
    }
    let mut v = 0;
    while v <= bound {
        current.push(v);
        fill(current, depth, v, out);
        current.pop();
        v += 2;
    }
}

/// Whether `λ` occurs in functions on `Gr_{k,n}`.
pub fn occurs_on(weight: &HighestWeight, k: usize) -> bool {
    k <= weight.n && weight.in_lambda_plus(k) && weight.in_lambda_plus(weight.n - k)
}

/// Image condition for `T_{j,i}`: `λ` lies in `Λ⁺_i ∩ Λ⁺_{n−i} ∩ Λ⁺_j ∩ Λ⁺_{n−j}`
/// and `|m_2| ≤ 2`.
pub fn range_predicate(n: usize, i: usize, j: usize, weight: &HighestWeight) -> bool {
    weight.n == n && occurs_on(weight, i) && occurs_on(weight, j) && weight.second().abs() <= 2
}

/// Dimension of the irreducible module with highest weight `λ`, from the Weyl
/// dimension formula in exact integer arithmetic.
pub fn weyl_dimension(weight: &HighestWeight) -> Result<u64> {
    weight.validate()?;
    let n = weight.n;
    let r = weight.rank();
    let odd = n % 2 == 1;
    // doubled shifted weights and doubled half-sum of positive roots
    let rho2: Vec<i128> = (0..r)
        .map(|a| {
            let base = 2 * (r - 1 - a) as i128;
            if odd {
                base + 1
            } else {
                base
            }
        })
        .collect();
    let l2: Vec<i128> = weight
        .m
        .iter()
        .zip(&rho2)
        .map(|(&x, &p)| 2 * x as i128 + p)
        .collect();
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for a in 0..r {
        for b in a + 1..r {
            num *= l2[a] * l2[a] - l2[b] * l2[b];
            den *= rho2[a] * rho2[a] - rho2[b] * rho2[b];
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
        if odd {
            num *= l2[a];
            den *= rho2[a];
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    if den < 0 {
        num = -num;
        den = -den;
    }
    if den != 1 || num <= 0 {
        return Err(Error::InvalidParameter(format!(
            "Weyl dimension of {weight} is not a positive integer ({num}/{den})"
        )));
    }
    u64::try_from(num).map_err(|_| Error::InvalidParameter(format!("dimension of {weight} overflows")))
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, m: &[i64]) -> HighestWeight {
        HighestWeight::new(n, m.to_vec()).unwrap()
    }

    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, t| acc * (n - t) / (t + 1))
    }

    #[test]
    fn validation() {
        assert!(HighestWeight::new(4, vec![2, -2]).is_ok());
        assert!(HighestWeight::new(4, vec![2, -4]).is_err());
        assert!(HighestWeight::new(5, vec![2, -2]).is_err());
        assert!(HighestWeight::new(5, vec![2, 4]).is_err());
        assert!(HighestWeight::new(3, vec![2, 0]).is_err());
        assert!(HighestWeight::new(2, vec![-3]).is_ok());
    }

    #[test]
    fn admissible_examples() {
        let list = |n, k| -> Vec<String> {
            admissible_weights(n, k, 4).unwrap().iter().map(|w| w.to_string()).collect()
        };
        assert_eq!(list(3, 1), ["(0)", "(2)", "(4)"]);
        assert_eq!(list(4, 1), ["(0,0)", "(2,0)", "(4,0)"]);
        assert_eq!(
            list(4, 2),
            ["(0,0)", "(2,0)", "(2,2)", "(2,-2)", "(4,0)", "(4,2)", "(4,-2)", "(4,4)", "(4,-4)"]
        );
        assert_eq!(list(5, 2).len(), 6);
        assert_eq!(list(2, 1), ["(0)", "(2)", "(-2)", "(4)", "(-4)"]);
    }

    #[test]
    fn lambda_plus_nested() {
        for wt in admissible_weights(6, 3, 6).unwrap() {
            let c = wt.class();
            for k in 0..6 {
                assert!(!c.contains(k) || c.contains(k + 1));
            }
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(weyl_dimension(&HighestWeight::trivial(5)).unwrap(), 1);
        assert_eq!(weyl_dimension(&w(3, &[2])).unwrap(), 5);
        assert_eq!(weyl_dimension(&w(4, &[2, 0])).unwrap(), 9);
        assert_eq!(weyl_dimension(&w(4, &[2, 2])).unwrap(), 5);
        assert_eq!(weyl_dimension(&w(4, &[2, -2])).unwrap(), 5);
        assert_eq!(weyl_dimension(&w(2, &[7])).unwrap(), 1);
    }

    #[test]
    fn dimension_oracles() {
        // harmonic polynomials in three variables
        for l in 0..10 {
            assert_eq!(weyl_dimension(&w(3, &[l])).unwrap(), 2 * l as u64 + 1);
        }
        // SO(4) = SU(2)×SU(2)/±1
        for a in 0..8i64 {
            for b in -a..=a {
                let d = ((a + b + 1) * (a - b + 1)) as u64;
                assert_eq!(weyl_dimension(&w(4, &[a, b])).unwrap(), d);
            }
        }
        for n in 3..10usize {
            let nn = n as u64;
            // traceless symmetric, exterior square, degree-4 harmonics
            assert_eq!(weyl_dimension(&HighestWeight::padded(n, &[2]).unwrap()).unwrap(), nn * (nn + 1) / 2 - 1);
            assert_eq!(
                weyl_dimension(&HighestWeight::padded(n, &[4]).unwrap()).unwrap(),
                binom(nn + 3, 4) - binom(nn + 1, 2)
            );
            if n >= 5 {
                assert_eq!(weyl_dimension(&HighestWeight::padded(n, &[1, 1]).unwrap()).unwrap(), nn * (nn - 1) / 2);
            }
        }
    }

    #[test]
    fn predicate_examples() {
        assert!(!range_predicate(4, 2, 2, &w(4, &[4, 4])));
        assert!(range_predicate(4, 2, 2, &w(4, &[2, 2])));
        assert!(range_predicate(4, 2, 2, &w(4, &[2, -2])));
        assert!(!range_predicate(4, 2, 1, &w(4, &[2, 2])));
        assert!(range_predicate(4, 2, 1, &w(4, &[2, 0])));
        for m in (0..20).step_by(2) {
            assert!(range_predicate(3, 1, 1, &w(3, &[m])));
        }
    }
}
