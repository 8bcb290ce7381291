//! Mukai vectors, the Mukai pairing and validated (m,k)-triples.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arith::{content, int, Int, Rat};
use crate::lattice::{is_primitive, DivisorClass, LatticeError, SurfaceClass, SurfaceKind};
use crate::walls::{self, Genericity, Wall, WallError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MukaiError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("zero Mukai vector")]
    ZeroVector,
    #[error("|v| is only defined for positive rank")]
    RankZeroBound,
}

/// (v0, v1, v2) with v1 a divisor class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MukaiVector {
    pub v0: Int,
    pub v1: DivisorClass,
    pub v2: Int,
}

impl MukaiVector {
    pub fn new(v0: Int, v1: DivisorClass, v2: Int) -> Self {
        MukaiVector { v0, v1, v2 }
    }

    pub fn from_i64s(v0: i64, v1: &[i64], v2: i64) -> Self {
        MukaiVector::new(int(v0), DivisorClass::from_i64s(v1), int(v2))
    }

    pub fn is_zero(&self) -> bool {
        self.v0.is_zero() && self.v1.is_zero() && self.v2.is_zero()
    }

    pub fn scale(&self, c: &Int) -> Self {
        MukaiVector::new(&self.v0 * c, self.v1.scale(c), &self.v2 * c)
    }

    pub fn neg(&self) -> Self {
        MukaiVector::new(-&self.v0, self.v1.neg(), -&self.v2)
    }

    /// gcd of all components.
    pub fn content(&self) -> Int {
        content(self.v1.coords().iter().chain([&self.v0, &self.v2]))
    }
}

impl fmt::Display for MukaiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.v0, self.v1, self.v2)
    }
}

/// (v,w) = v1·w1 - v0·w2 - v2·w0.
pub fn pairing(s: &SurfaceClass, v: &MukaiVector, w: &MukaiVector) -> Result<Int, MukaiError> {
    let d = s.intersect(&v.v1, &w.v1)?;
    Ok(d - &v.v0 * &w.v2 - &v.v2 * &w.v0)
}

pub fn square(s: &SurfaceClass, v: &MukaiVector) -> Result<Int, MukaiError> {
    pairing(s, v, v)
}

/// Positive rank, or rank zero with v1 effective, or (0, 0, v2) with v2 > 0.
pub fn is_mukai_vector(s: &SurfaceClass, v: &MukaiVector) -> bool {
    if s.check_len(&v.v1).is_err() {
        return false;
    }
    if v.v0.is_positive() {
        return true;
    }
    if v.v0.is_zero() {
        if v.v1.is_zero() {
            return v.v2.is_positive();
        }
        return s.is_effective_nonzero(&v.v1);
    }
    false
}

/// v = m·w with m the content and w primitive.
pub fn primitive_decomposition(v: &MukaiVector) -> Result<(Int, MukaiVector), MukaiError> {
    if v.is_zero() {
        return Err(MukaiError::ZeroVector);
    }
    let m = v.content();
    let w = MukaiVector::new(&v.v0 / &m, v.v1.div_exact(&m), &v.v2 / &m);
    Ok((m, w))
}

/// Mukai vector of a sheaf with the given rank, first Chern class and ch2.
pub fn vector_of_sheaf(s: &SurfaceClass, rank: &Int, c1: &DivisorClass, ch2: &Int) -> MukaiVector {
    MukaiVector::new(rank.clone(), c1.clone(), ch2 + rank * s.epsilon())
}

/// |v| = v0²/4 · v² + v0^(2ε+2)/2 for positive rank.
pub fn discriminant_bound(s: &SurfaceClass, v: &MukaiVector) -> Result<Rat, MukaiError> {
    if !v.v0.is_positive() {
        return Err(MukaiError::RankZeroBound);
    }
    let sq = square(s, v)?;
    Ok(bound_from(s.kind(), &v.v0, &sq))
}

/// |v| from rank and square alone.
pub fn bound_from(kind: SurfaceKind, v0: &Int, sq: &Int) -> Rat {
    let r2 = v0 * v0;
    let first = Rat::new(&r2 * sq, int(4));
    let pow = 2 * kind.epsilon() + 2;
    let second = Rat::new(num_traits::pow(v0.clone(), pow as usize), int(2));
    first + second
}

/// (dim M_v, dim K_v) for an (m,k)-triple; K_v only exists on abelian surfaces.
pub fn moduli_dims(m: &Int, k: &Int, kind: SurfaceKind) -> (Int, Option<Int>) {
    let base = int(2) * m * m * k;
    let dim_k = match kind {
        SurfaceKind::K3 => None,
        SurfaceKind::Abelian => Some(&base - 2),
    };
    (base + 2, dim_k)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TripleError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("polarization is not primitive")]
    NotPrimitive,
    #[error("polarization is not ample")]
    NotAmple,
    #[error("zero Mukai vector")]
    ZeroVector,
    #[error("vector is not a Mukai vector (negative rank or non-effective rank-zero class)")]
    NotMukaiVector,
    #[error("rank-zero primitive part has w2 = 0 on a surface of Picard rank > 1")]
    RankZeroDegenerate,
    #[error("primitive part has non-positive square {0}")]
    NonPositiveSquare(Int),
    #[error("polarization lies on the wall of {}", .0.d)]
    NotGeneric(Wall),
    #[error(transparent)]
    Wall(WallError),
}

impl TripleError {
    /// Short machine-readable condition name.
    pub fn condition(&self) -> &'static str {
        match self {
            TripleError::Lattice(_) => "dimension",
            TripleError::NotPrimitive => "primitive",
            TripleError::NotAmple => "ample",
            TripleError::ZeroVector => "nonzero",
            TripleError::NotMukaiVector => "mukai-vector",
            TripleError::RankZeroDegenerate => "rank-zero-w2",
            TripleError::NonPositiveSquare(_) => "square",
            TripleError::NotGeneric(_) => "generic",
            TripleError::Wall(_) => "walls",
        }
    }
}

/// A surface, a Mukai vector v = m·w with w primitive and w² = 2k > 0, and a
/// primitive v-generic polarization.
#[derive(Clone, Debug)]
pub struct Triple {
    pub surface: SurfaceClass,
    pub v: MukaiVector,
    pub h: DivisorClass,
    pub m: Int,
    pub k: Int,
}

impl PartialEq for Triple {
    fn eq(&self, other: &Self) -> bool {
        self.surface == other.surface && self.v == other.v && self.h == other.h
    }
}

impl Eq for Triple {}

impl Triple {
    /// Builds a triple without validation; (m,k) are still derived from v.
    pub fn unchecked(surface: SurfaceClass, v: MukaiVector, h: DivisorClass) -> Self {
        let (m, k) = match primitive_decomposition(&v) {
            Ok((m, w)) => {
                let sq = square(&surface, &w).unwrap_or_default();
                (m, sq / 2)
            }
            Err(_) => (Int::zero(), Int::zero()),
        };
        Triple { surface, v, h, m, k }
    }

    pub fn square(&self) -> Int {
        square(&self.surface, &self.v).expect("triple dimensions are consistent")
    }

    pub fn kind(&self) -> SurfaceKind {
        self.surface.kind()
    }

    /// Re-runs every check of `make_triple`.
    pub fn validate(&self) -> Result<Triple, TripleError> {
        make_triple(&self.surface, &self.v, &self.h)
    }

    /// True for (rank1(kind, k), m(0,h,0), h).
    pub fn is_canonical(&self) -> bool {
        if self.k <= Int::zero() {
            return false;
        }
        let Ok(k) = u64::try_from(&self.k) else { return false };
        if k > (i64::MAX / 2) as u64 {
            return false;
        }
        let target = SurfaceClass::rank1(self.kind(), k);
        self.surface == target
            && self.h == DivisorClass::from_i64s(&[1])
            && self.v == MukaiVector::new(Int::zero(), DivisorClass::new(vec![self.m.clone()]), Int::zero())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; v={}; H={}; (m,k)=({},{})]", self.surface, self.v, self.h, self.m, self.k)
    }
}

/// Validates an (m,k)-triple, reporting the first violated condition.
pub fn make_triple(s: &SurfaceClass, v: &MukaiVector, h: &DivisorClass) -> Result<Triple, TripleError> {
    s.check_len(h)?;
    s.check_len(&v.v1)?;
    if !is_primitive(h) {
        return Err(TripleError::NotPrimitive);
    }
    if !s.is_ample(h) {
        return Err(TripleError::NotAmple);
    }
    if v.is_zero() {
        return Err(TripleError::ZeroVector);
    }
    if !is_mukai_vector(s, v) {
        return Err(TripleError::NotMukaiVector);
    }
    let (m, w) = primitive_decomposition(v).map_err(|_| TripleError::ZeroVector)?;
    if w.v0.is_zero() && w.v2.is_zero() && s.rank() > 1 {
        return Err(TripleError::RankZeroDegenerate);
    }
    let wsq = square(s, &w).map_err(|e| match e {
        MukaiError::Lattice(l) => TripleError::Lattice(l),
        _ => TripleError::ZeroVector,
    })?;
    if !wsq.is_positive() {
        return Err(TripleError::NonPositiveSquare(wsq));
    }
    match walls::is_generic(s, v, h).map_err(TripleError::Wall)? {
        Genericity::Generic => {}
        Genericity::NonGeneric(wall) => return Err(TripleError::NotGeneric(wall)),
    }
    let k = wsq / 2;
    Ok(Triple { surface: s.clone(), v: v.clone(), h: h.clone(), m, k })
}

/// The canonical triple (rank1(kind,k), m(0,h,0), h).
pub fn canonical_triple(kind: SurfaceKind, m: &Int, k: u64) -> Triple {
    let s = SurfaceClass::rank1(kind, k);
    let v = MukaiVector::new(Int::zero(), DivisorClass::new(vec![m.clone()]), Int::zero());
    make_triple(&s, &v, &DivisorClass::from_i64s(&[1])).expect("canonical triple is valid")
}
