//! Néron-Severi lattices of rank one and two with their ample and effective
//! cone oracles.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{content, div_floor, int, Int};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("class has {found} coordinates but the lattice has rank {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("only Néron-Severi rank 1 or 2 is supported, got {0}")]
    UnsupportedRank(usize),
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix has an odd diagonal entry")]
    OddDiagonal,
    #[error("gram matrix is degenerate")]
    Degenerate,
    #[error("gram matrix does not have signature (1, rank-1)")]
    WrongSignature,
    #[error("expected {expected} basis labels, got {found}")]
    LabelCount { expected: usize, found: usize },
    #[error("reference ample class has non-positive square")]
    AmpleRefNotPositive,
    #[error("effective generator {0} pairs non-positively with the reference ample class")]
    BadEffectiveGenerator(usize),
    #[error("effective cone needs exactly {expected} independent generators, got {found}")]
    EffectiveConeShape { expected: usize, found: usize },
    #[error("orthogonal complement is trivial on a rank-1 lattice")]
    TrivialComplement,
    #[error("zero class has no orthogonal generator")]
    ZeroClass,
    #[error("unknown surface preset `{0}`")]
    UnknownPreset(String),
    #[error("surface TOML: {0}")]
    Toml(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    K3,
    Abelian,
}

impl SurfaceKind {
    pub fn epsilon(self) -> u32 {
        match self {
            SurfaceKind::K3 => 1,
            SurfaceKind::Abelian => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SurfaceKind::K3 => "k3",
            SurfaceKind::Abelian => "abelian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k3" => Some(SurfaceKind::K3),
            "abelian" | "ab" => Some(SurfaceKind::Abelian),
            _ => None,
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coordinates of a divisor class in the basis of its lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass(pub Vec<Int>);

impl DivisorClass {
    pub fn new(coords: Vec<Int>) -> Self {
        DivisorClass(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        DivisorClass(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        DivisorClass(vec![Int::zero(); rank])
    }

    /// The i-th basis vector.
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut c = vec![Int::zero(); rank];
        c[i] = int(1);
        DivisorClass(c)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Int] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// gcd of the coordinates (zero for the zero class).
    pub fn content(&self) -> Int {
        content(self.0.iter())
    }

    pub fn scale(&self, c: &Int) -> Self {
        DivisorClass(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.rank(), other.rank());
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.rank(), other.rank());
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        DivisorClass(self.0.iter().map(|x| -x).collect())
    }

    /// Exact division of every coordinate; caller guarantees divisibility.
    pub fn div_exact(&self, c: &Int) -> Self {
        DivisorClass(self.0.iter().map(|x| x / c).collect())
    }

    /// Sign flip so the first nonzero coordinate is positive.
    pub fn normalized(&self) -> Self {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_negative() => self.neg(),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// gcd of coordinates is one; the zero class is not primitive.
pub fn is_primitive(d: &DivisorClass) -> bool {
    !d.is_zero() && d.content() == int(1)
}

#[derive(Deserialize, Serialize)]
struct SurfaceToml {
    kind: SurfaceKind,
    gram: Vec<Vec<i64>>,
    basis_labels: Vec<String>,
    ample_ref: Vec<i64>,
    effective_gens: Vec<Vec<i64>>,
}

/// A K3 or Abelian surface reduced to its Néron-Severi lattice, one ample
/// class and the generators of its effective cone.
#[derive(Clone, Debug)]
pub struct SurfaceClass {
    name: Option<String>,
    kind: SurfaceKind,
    gram: Vec<Vec<i64>>,
    basis_labels: Vec<String>,
    ample_ref: DivisorClass,
    effective_gens: Vec<DivisorClass>,
}

impl PartialEq for SurfaceClass {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.gram == other.gram
            && self.basis_labels == other.basis_labels
            && self.ample_ref == other.ample_ref
            && self.effective_gens == other.effective_gens
    }
}

impl Eq for SurfaceClass {}

impl SurfaceClass {
    pub fn new(
        kind: SurfaceKind,
        gram: Vec<Vec<i64>>,
        basis_labels: Vec<String>,
        ample_ref: DivisorClass,
        effective_gens: Vec<DivisorClass>,
    ) -> Result<Self, LatticeError> {
        let rank = gram.len();
        if rank != 1 && rank != 2 {
            return Err(LatticeError::UnsupportedRank(rank));
        }
        for row in &gram {
            if row.len() != rank {
                return Err(LatticeError::DimensionMismatch { expected: rank, found: row.len() });
            }
        }
        for i in 0..rank {
            if gram[i][i] % 2 != 0 {
                return Err(LatticeError::OddDiagonal);
            }
            for j in 0..rank {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric);
                }
            }
        }
        if rank == 1 {
            if gram[0][0] == 0 {
                return Err(LatticeError::Degenerate);
            }
            if gram[0][0] < 0 {
                return Err(LatticeError::WrongSignature);
            }
        } else {
            let det = gram[0][0] as i128 * gram[1][1] as i128 - gram[0][1] as i128 * gram[1][0] as i128;
            if det == 0 {
                return Err(LatticeError::Degenerate);
            }
            if det > 0 {
                return Err(LatticeError::WrongSignature);
            }
        }
        if basis_labels.len() != rank {
            return Err(LatticeError::LabelCount { expected: rank, found: basis_labels.len() });
        }
        let mut s = SurfaceClass {
            name: None,
            kind,
            gram,
            basis_labels,
            ample_ref,
            effective_gens,
        };
        s.check_len(&s.ample_ref)?;
        if s.square(&s.ample_ref) <= Int::zero() {
            return Err(LatticeError::AmpleRefNotPositive);
        }
        for (i, e) in s.effective_gens.iter().enumerate() {
            s.check_len(e)?;
            if !e.is_zero() && s.dot(e, &s.ample_ref) <= Int::zero() {
                return Err(LatticeError::BadEffectiveGenerator(i));
            }
        }
        let nonzero: Vec<&DivisorClass> = s.effective_gens.iter().filter(|e| !e.is_zero()).collect();
        let independent = match (rank, nonzero.as_slice()) {
            (1, [_]) => true,
            (2, [a, b]) => &a.0[0] * &b.0[1] - &a.0[1] * &b.0[0] != Int::zero(),
            _ => false,
        };
        if !independent {
            return Err(LatticeError::EffectiveConeShape { expected: rank, found: nonzero.len() });
        }
        s.effective_gens = nonzero.into_iter().cloned().collect();
        s.name = s.detect_preset_name();
        Ok(s)
    }

    /// Rank-one lattice with h² = 2l.
    pub fn rank1(kind: SurfaceKind, l: u64) -> Self {
        assert!(l >= 1, "rank-one preset needs l >= 1");
        let l = i64::try_from(l).expect("l fits in i64");
        Self::new(
            kind,
            vec![vec![2 * l]],
            vec!["h".into()],
            DivisorClass::from_i64s(&[1]),
            vec![DivisorClass::from_i64s(&[1])],
        )
        .expect("rank-one preset is valid")
    }

    /// Rank-one preset with h² = 2l for an arbitrary precision l.
    pub fn rank1_big(kind: SurfaceKind, l: &Int) -> Result<Self, LatticeError> {
        let l64 = i64::try_from(l).map_err(|_| LatticeError::UnsupportedRank(1))?;
        if l64 < 1 || l64 > i64::MAX / 2 {
            return Err(LatticeError::WrongSignature);
        }
        Ok(Self::rank1(kind, l64 as u64))
    }

    /// Elliptic surface with a section: basis (sigma, f), f² = 0, sigma·f = 1,
    /// sigma² = -2 on a K3 and 0 on an abelian surface.
    pub fn elliptic(kind: SurfaceKind) -> Self {
        let (s2, ample) = match kind {
            SurfaceKind::K3 => (-2, [1, 3]),
            SurfaceKind::Abelian => (0, [1, 1]),
        };
        Self::new(
            kind,
            vec![vec![s2, 1], vec![1, 0]],
            vec!["sigma".into(), "f".into()],
            DivisorClass::from_i64s(&ample),
            vec![DivisorClass::from_i64s(&[1, 0]), DivisorClass::from_i64s(&[0, 1])],
        )
        .expect("elliptic preset is valid")
    }

    pub fn elliptic_k3() -> Self {
        Self::elliptic(SurfaceKind::K3)
    }

    pub fn elliptic_ab() -> Self {
        Self::elliptic(SurfaceKind::Abelian)
    }

    /// Resolve `rank1-k3-l<N>`, `rank1-ab-l<N>`, `elliptic-k3` or `elliptic-ab`.
    pub fn preset(name: &str) -> Result<Self, LatticeError> {
        let unknown = || LatticeError::UnknownPreset(name.to_string());
        match name {
            "elliptic-k3" => return Ok(Self::elliptic_k3()),
            "elliptic-ab" => return Ok(Self::elliptic_ab()),
            _ => {}
        }
        let rest = name.strip_prefix("rank1-").ok_or_else(unknown)?;
        let (kind, l) = if let Some(l) = rest.strip_prefix("k3-l") {
            (SurfaceKind::K3, l)
        } else if let Some(l) = rest.strip_prefix("ab-l") {
            (SurfaceKind::Abelian, l)
        } else {
            return Err(unknown());
        };
        let l: u64 = l.parse().map_err(|_| unknown())?;
        if l == 0 || l > (i64::MAX / 2) as u64 {
            return Err(unknown());
        }
        Ok(Self::rank1(kind, l))
    }

    pub fn from_toml(text: &str) -> Result<Self, LatticeError> {
        let raw: SurfaceToml = toml::from_str(text).map_err(|e| LatticeError::Toml(e.to_string()))?;
        Self::new(
            raw.kind,
            raw.gram,
            raw.basis_labels,
            DivisorClass::from_i64s(&raw.ample_ref),
            raw.effective_gens.iter().map(|g| DivisorClass::from_i64s(g)).collect(),
        )
    }

    /// Preset name if one matches, otherwise TOML text.
    pub fn resolve(spec: &str) -> Result<Self, LatticeError> {
        match Self::preset(spec.trim()) {
            Ok(s) => Ok(s),
            Err(_) if spec.contains('=') => Self::from_toml(spec),
            Err(e) => Err(e),
        }
    }

    pub fn to_toml(&self) -> String {
        let to64 = |d: &DivisorClass| -> Vec<i64> {
            d.0.iter().map(|x| i64::try_from(x).expect("surface data fits in i64")).collect()
        };
        let raw = SurfaceToml {
            kind: self.kind,
            gram: self.gram.clone(),
            basis_labels: self.basis_labels.clone(),
            ample_ref: to64(&self.ample_ref),
            effective_gens: self.effective_gens.iter().map(to64).collect(),
        };
        toml::to_string(&raw).expect("surface serializes to TOML")
    }

    /// Preset name, or the TOML document for a custom lattice.
    pub fn spec_string(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => self.to_toml(),
        }
    }

    fn detect_preset_name(&self) -> Option<String> {
        if self.rank() == 1 {
            let l = self.gram[0][0] / 2;
            let candidate = SurfaceClass {
                name: None,
                kind: self.kind,
                gram: vec![vec![2 * l]],
                basis_labels: vec!["h".into()],
                ample_ref: DivisorClass::from_i64s(&[1]),
                effective_gens: vec![DivisorClass::from_i64s(&[1])],
            };
            if *self == candidate {
                let tag = match self.kind {
                    SurfaceKind::K3 => "k3",
                    SurfaceKind::Abelian => "ab",
                };
                return Some(format!("rank1-{tag}-l{l}"));
            }
            return None;
        }
        let (s2, ample, tag) = match self.kind {
            SurfaceKind::K3 => (-2, [1, 3], "elliptic-k3"),
            SurfaceKind::Abelian => (0, [1, 1], "elliptic-ab"),
        };
        let candidate = SurfaceClass {
            name: None,
            kind: self.kind,
            gram: vec![vec![s2, 1], vec![1, 0]],
            basis_labels: vec!["sigma".into(), "f".into()],
            ample_ref: DivisorClass::from_i64s(&ample),
            effective_gens: vec![DivisorClass::from_i64s(&[1, 0]), DivisorClass::from_i64s(&[0, 1])],
        };
        (*self == candidate).then(|| tag.to_string())
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn epsilon(&self) -> u32 {
        self.kind.epsilon()
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn ample_ref(&self) -> &DivisorClass {
        &self.ample_ref
    }

    pub fn effective_gens(&self) -> &[DivisorClass] {
        &self.effective_gens
    }

    /// h² / 2 for a rank-one lattice.
    pub fn rank1_l(&self) -> Option<i64> {
        (self.rank() == 1).then(|| self.gram[0][0] / 2)
    }

    /// True for the elliptic presets (basis sigma, f).
    pub fn is_elliptic(&self) -> bool {
        *self == Self::elliptic(self.kind)
    }

    pub fn check_len(&self, d: &DivisorClass) -> Result<(), LatticeError> {
        if d.rank() == self.rank() {
            Ok(())
        } else {
            Err(LatticeError::DimensionMismatch { expected: self.rank(), found: d.rank() })
        }
    }

    /// Intersection pairing; panics on a dimension mismatch.
    pub fn dot(&self, d: &DivisorClass, e: &DivisorClass) -> Int {
        assert_eq!(d.rank(), self.rank(), "class dimension mismatch");
        assert_eq!(e.rank(), self.rank(), "class dimension mismatch");
        let mut acc = Int::zero();
        for (i, di) in d.0.iter().enumerate() {
            if di.is_zero() {
                continue;
            }
            for (j, ej) in e.0.iter().enumerate() {
                let g = self.gram[i][j];
                if g != 0 {
                    acc += di * ej * g;
                }
            }
        }
        acc
    }

    pub fn intersect(&self, d: &DivisorClass, e: &DivisorClass) -> Result<Int, LatticeError> {
        self.check_len(d)?;
        self.check_len(e)?;
        Ok(self.dot(d, e))
    }

    pub fn square(&self, d: &DivisorClass) -> Int {
        self.dot(d, d)
    }

    pub fn is_ample(&self, d: &DivisorClass) -> bool {
        if d.rank() != self.rank() {
            return false;
        }
        self.square(d) > Int::zero()
            && self.dot(d, &self.ample_ref) > Int::zero()
            && self.effective_gens.iter().all(|e| self.dot(d, e) > Int::zero())
    }

    /// Coefficients of `d` in the effective generators when they are
    /// non-negative integers.
    pub fn effective_coords(&self, d: &DivisorClass) -> Option<Vec<Int>> {
        if d.rank() != self.rank() {
            return None;
        }
        match self.effective_gens.as_slice() {
            [g] => {
                let (q, r) = num_integer::Integer::div_rem(&d.0[0], &g.0[0]);
                (r.is_zero() && !q.is_negative()).then(|| vec![q])
            }
            [a, b] => {
                let det = &a.0[0] * &b.0[1] - &a.0[1] * &b.0[0];
                let p_num = &d.0[0] * &b.0[1] - &d.0[1] * &b.0[0];
                let q_num = &a.0[0] * &d.0[1] - &a.0[1] * &d.0[0];
                let (p, pr) = num_integer::Integer::div_rem(&p_num, &det);
                let (q, qr) = num_integer::Integer::div_rem(&q_num, &det);
                (pr.is_zero() && qr.is_zero() && !p.is_negative() && !q.is_negative())
                    .then(|| vec![p, q])
            }
            _ => None,
        }
    }

    /// Non-negative integer combination of the effective generators.
    pub fn is_effective_or_zero(&self, d: &DivisorClass) -> bool {
        self.effective_coords(d).is_some()
    }

    pub fn is_effective_nonzero(&self, d: &DivisorClass) -> bool {
        !d.is_zero() && self.is_effective_or_zero(d)
    }

    /// Class from coefficients in the effective generators.
    pub fn from_effective_coords(&self, coeffs: &[Int]) -> DivisorClass {
        let mut acc = DivisorClass::zero(self.rank());
        for (c, g) in coeffs.iter().zip(&self.effective_gens) {
            acc = acc.add(&g.scale(c));
        }
        acc
    }

    /// Primitive generator of the orthogonal complement of `h`, with its first
    /// nonzero coordinate positive.
    pub fn orthogonal_generator(&self, h: &DivisorClass) -> Result<DivisorClass, LatticeError> {
        self.check_len(h)?;
        if self.rank() != 2 {
            return Err(LatticeError::TrivialComplement);
        }
        if h.is_zero() {
            return Err(LatticeError::ZeroClass);
        }
        let e0 = DivisorClass::basis(2, 0);
        let e1 = DivisorClass::basis(2, 1);
        let a = self.dot(&e0, h);
        let b = self.dot(&e1, h);
        let raw = DivisorClass(vec![b, -a]);
        let c = raw.content();
        Ok(raw.div_exact(&c).normalized())
    }

    /// Nonzero effective classes C with 0 < C·H < d, in increasing
    /// lexicographic order of their generator coefficients.
    pub fn effective_classes_below(&self, h: &DivisorClass, d: &Int) -> Vec<DivisorClass> {
        let degs: Vec<Int> = self.effective_gens.iter().map(|g| self.dot(g, h)).collect();
        debug_assert!(degs.iter().all(|x| x > &Int::zero()), "H must be ample");
        let mut out = Vec::new();
        match degs.as_slice() {
            [d0] => {
                let mut n = int(1);
                while &(&n * d0) < d {
                    out.push(self.effective_gens[0].scale(&n));
                    n += 1;
                }
            }
            [d0, d1] => {
                let max_p = if d > &Int::zero() { div_floor(&(d - 1), d0) } else { int(-1) };
                let mut p = Int::zero();
                while p <= max_p {
                    let rest = d - &p * d0;
                    let max_q = div_floor(&(rest - 1), d1);
                    let mut q = Int::zero();
                    while q <= max_q {
                        if !(p.is_zero() && q.is_zero()) {
                            out.push(self.from_effective_coords(&[p.clone(), q.clone()]));
                        }
                        q += 1;
                    }
                    p += 1;
                }
            }
            _ => {}
        }
        out
    }
}

impl fmt::Display for SurfaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => f.write_str(n),
            None => write!(f, "custom-{}-rank{}", self.kind, self.rank()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dc(c: &[i64]) -> DivisorClass {
        DivisorClass::from_i64s(c)
    }

    #[test]
    fn presets_have_expected_gram() {
        assert_eq!(SurfaceClass::elliptic_k3().gram()[0][0], -2);
        assert_eq!(SurfaceClass::elliptic_ab().gram()[0][0], 0);
        assert_eq!(SurfaceClass::rank1(SurfaceKind::K3, 3).gram(), &[vec![6]]);
        for s in [
            SurfaceClass::elliptic_k3(),
            SurfaceClass::elliptic_ab(),
            SurfaceClass::rank1(SurfaceKind::Abelian, 4),
        ] {
            assert!(s.is_ample(s.ample_ref()));
        }
    }

    #[test]
    fn intersect_examples() {
        let s = SurfaceClass::elliptic_k3();
        assert_eq!(s.intersect(&dc(&[1, 0]), &dc(&[0, 1])).unwrap(), int(1));
        assert_eq!(s.intersect(&dc(&[-1, 3]), &dc(&[1, 5])).unwrap(), int(0));
        let r = SurfaceClass::rank1(SurfaceKind::K3, 3);
        assert_eq!(r.intersect(&dc(&[1]), &dc(&[1])).unwrap(), int(6));
        assert!(matches!(
            r.intersect(&dc(&[1, 0]), &dc(&[1])),
            Err(LatticeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn primitive_examples() {
        assert!(!is_primitive(&dc(&[2, 4])));
        assert!(is_primitive(&dc(&[1, 0])));
        assert!(!is_primitive(&dc(&[0, 0])));
    }

    #[test]
    fn ample_examples() {
        let s = SurfaceClass::elliptic_k3();
        assert!(s.is_ample(&dc(&[1, 5])));
        assert!(!s.is_ample(&dc(&[0, 1])));
        let r = SurfaceClass::rank1(SurfaceKind::K3, 2);
        assert!(!r.is_ample(&dc(&[-1])));
    }

    #[test]
    fn orthogonal_generator_examples() {
        let s = SurfaceClass::elliptic_k3();
        let d0 = s.orthogonal_generator(&dc(&[1, 5])).unwrap();
        assert_eq!(d0, dc(&[1, -3]));
        assert_eq!(s.square(&d0), int(-8));
        let a = SurfaceClass::elliptic_ab();
        let d0 = a.orthogonal_generator(&dc(&[1, 1])).unwrap();
        assert_eq!(d0, dc(&[1, -1]));
        assert_eq!(a.square(&d0), int(-2));
        let r = SurfaceClass::rank1(SurfaceKind::K3, 1);
        assert_eq!(r.orthogonal_generator(&dc(&[1])), Err(LatticeError::TrivialComplement));
    }

    #[test]
    fn preset_names_round_trip() {
        for name in ["rank1-k3-l7", "rank1-ab-l1", "elliptic-k3", "elliptic-ab"] {
            let s = SurfaceClass::preset(name).unwrap();
            assert_eq!(s.name(), Some(name));
            let back = SurfaceClass::resolve(&s.to_toml()).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.name(), Some(name));
        }
        assert!(SurfaceClass::preset("rank1-k3-l0").is_err());
        assert!(SurfaceClass::preset("k3").is_err());
    }

    #[test]
    fn toml_validation_rejects_bad_lattices() {
        let odd = "kind = \"k3\"\ngram = [[3]]\nbasis_labels = [\"h\"]\nample_ref = [1]\neffective_gens = [[1]]\n";
        assert_eq!(SurfaceClass::from_toml(odd), Err(LatticeError::OddDiagonal));
        let definite = "kind = \"k3\"\ngram = [[2, 0], [0, 2]]\nbasis_labels = [\"a\", \"b\"]\nample_ref = [1, 0]\neffective_gens = [[1, 0], [0, 1]]\n";
        assert_eq!(SurfaceClass::from_toml(definite), Err(LatticeError::WrongSignature));
    }

    #[test]
    fn effective_membership() {
        let s = SurfaceClass::elliptic_k3();
        assert!(s.is_effective_or_zero(&dc(&[0, 0])));
        assert!(s.is_effective_nonzero(&dc(&[1, 1])));
        assert!(!s.is_effective_or_zero(&dc(&[-1, 3])));
        let r = SurfaceClass::rank1(SurfaceKind::K3, 1);
        assert!(!r.is_effective_or_zero(&dc(&[-1])));
    }

    #[test]
    fn effective_classes_below_rank_one() {
        let r = SurfaceClass::rank1(SurfaceKind::K3, 1);
        let cs = r.effective_classes_below(&dc(&[1]), &int(5));
        assert_eq!(cs, vec![dc(&[1]), dc(&[2])]);
    }

    proptest! {
        #[test]
        fn intersect_is_symmetric_and_bilinear(
            a in prop::array::uniform2(-50i64..50),
            b in prop::array::uniform2(-50i64..50),
            c in prop::array::uniform2(-50i64..50),
            x in -9i64..9,
            y in -9i64..9,
        ) {
            let s = SurfaceClass::elliptic_k3();
            let (a, b, c) = (dc(&a), dc(&b), dc(&c));
            prop_assert_eq!(s.dot(&a, &b), s.dot(&b, &a));
            let lhs = s.dot(&a.scale(&int(x)).add(&b.scale(&int(y))), &c);
            let rhs = s.dot(&a, &c) * x + s.dot(&b, &c) * y;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn orthogonal_generator_is_negative_primitive(
            x in 1i64..40,
            y in -40i64..200,
            abelian in any::<bool>(),
        ) {
            let s = if abelian { SurfaceClass::elliptic_ab() } else { SurfaceClass::elliptic_k3() };
            let h = dc(&[x, y]);
            prop_assume!(s.square(&h) > Int::zero());
            let d0 = s.orthogonal_generator(&h).unwrap();
            prop_assert_eq!(s.dot(&d0, &h), Int::zero());
            prop_assert!(s.square(&d0) < Int::zero());
            prop_assert!(is_primitive(&d0));
        }
    }
}
