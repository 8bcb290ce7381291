//! Walls, chambers and genericity of polarizations.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arith::{div_ceil, div_floor, first_true, int, isqrt, last_true, rat, rat_floor, Int, Rat};
use crate::lattice::{DivisorClass, LatticeError, SurfaceClass, SurfaceKind};
use crate::mukai::{bound_from, is_mukai_vector, square, MukaiVector};
use crate::par::{self, Exec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WallError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("vectors of the form (0, v1, 0) are not supported on Picard rank > 1")]
    DegenerateRankZero,
    #[error("not a Mukai vector")]
    NotMukaiVector,
    #[error("class {0} is not ample")]
    NotAmple(DivisorClass),
    #[error("operation needs a surface of Picard rank 2")]
    RankTwoRequired,
    #[error("suitability is only decided on the elliptic presets")]
    NotElliptic,
    #[error("polarization is not of the form sigma + t f")]
    NotSigmaPlusTf,
    #[error("suitability needs positive rank")]
    RankZero,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    RankPositiveBound,
    RankZeroPair { u1: DivisorClass, u2: Int },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub d: DivisorClass,
    pub dsq: Int,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Genericity {
    Generic,
    NonGeneric(Wall),
}

impl Genericity {
    pub fn is_generic(&self) -> bool {
        matches!(self, Genericity::Generic)
    }

    pub fn witness(&self) -> Option<&Wall> {
        match self {
            Genericity::Generic => None,
            Genericity::NonGeneric(w) => Some(w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suitability {
    Suitable,
    Unknown,
}

/// Maximum of d(C²+2)/(2C·H) over effective C with 0 < C·H < d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Threshold {
    NegInfinity,
    Value(Rat),
}

impl Threshold {
    /// a > max(M_d, 0).
    pub fn passed_by(&self, a: &Int) -> bool {
        a >= &self.min_passing()
    }

    /// Smallest positive integer strictly above the threshold.
    pub fn min_passing(&self) -> Int {
        match self {
            Threshold::NegInfinity => int(1),
            Threshold::Value(m) => {
                let f = rat_floor(m) + 1;
                if f < int(1) {
                    int(1)
                } else {
                    f
                }
            }
        }
    }
}

fn check_inputs(s: &SurfaceClass, v: &MukaiVector, hs: &[&DivisorClass]) -> Result<(), WallError> {
    s.check_len(&v.v1)?;
    for h in hs {
        s.check_len(h)?;
        if !s.is_ample(h) {
            return Err(WallError::NotAmple((*h).clone()));
        }
    }
    if !is_mukai_vector(s, v) {
        return Err(WallError::NotMukaiVector);
    }
    if s.rank() > 1 && v.v0.is_zero() && v.v2.is_zero() {
        return Err(WallError::DegenerateRankZero);
    }
    Ok(())
}

/// |v| for positive rank.
pub fn bound(s: &SurfaceClass, v: &MukaiVector) -> Rat {
    let sq = square(s, v).expect("dimensions checked");
    bound_from(s.kind(), &v.v0, &sq)
}

/// Decides whether `h` avoids every v-wall, returning a witness otherwise.
pub fn is_generic(s: &SurfaceClass, v: &MukaiVector, h: &DivisorClass) -> Result<Genericity, WallError> {
    is_generic_with(Exec::default(), s, v, h)
}

pub fn is_generic_with(
    exec: Exec,
    s: &SurfaceClass,
    v: &MukaiVector,
    h: &DivisorClass,
) -> Result<Genericity, WallError> {
    check_inputs(s, v, &[h])?;
    if s.rank() == 1 {
        return Ok(Genericity::Generic);
    }
    if v.v0.is_positive() {
        let b = bound(s, v);
        let d0 = s.orthogonal_generator(h)?;
        let dsq = s.square(&d0);
        if rat(&dsq) >= -b {
            return Ok(Genericity::NonGeneric(Wall { d: d0, dsq, provenance: Provenance::RankPositiveBound }));
        }
        return Ok(Genericity::Generic);
    }
    let den = s.dot(&v.v1, h);
    let rows = rank_zero_rows(s, v);
    let found = par::find_map_first(exec, rows, |u1s: Vec<DivisorClass>| {
        for u1 in u1s {
            let num = &v.v2 * s.dot(&u1, h);
            let (u2, rem) = num.div_rem(&den);
            if !rem.is_zero() {
                continue;
            }
            let d = v.v1.scale(&u2).sub(&u1.scale(&v.v2));
            if !d.is_zero() {
                let dsq = s.square(&d);
                return Some(Wall { d, dsq, provenance: Provenance::RankZeroPair { u1, u2 } });
            }
        }
        None
    });
    Ok(match found {
        Some(w) => Genericity::NonGeneric(w),
        None => Genericity::Generic,
    })
}

/// Candidate sub-classes u1 with u1 and v1 - u1 effective-or-zero, grouped by
/// the first generator coefficient, in lexicographic order.
fn rank_zero_rows(s: &SurfaceClass, v: &MukaiVector) -> Vec<Vec<DivisorClass>> {
    let coeffs = s.effective_coords(&v.v1).expect("v1 effective");
    match coeffs.as_slice() {
        [p_max] => {
            let mut row = Vec::new();
            let mut p = Int::zero();
            while &p <= p_max {
                row.push(s.from_effective_coords(&[p.clone()]));
                p += 1;
            }
            vec![row]
        }
        [p_max, q_max] => {
            let mut rows = Vec::new();
            let mut p = Int::zero();
            while &p <= p_max {
                let mut row = Vec::new();
                let mut q = Int::zero();
                while &q <= q_max {
                    row.push(s.from_effective_coords(&[p.clone(), q.clone()]));
                    q += 1;
                }
                rows.push(row);
                p += 1;
            }
            rows
        }
        _ => Vec::new(),
    }
}

/// Every v-wall meeting the closed segment [h1, h2], sign-normalized,
/// deduplicated and sorted.
pub fn walls_between(
    s: &SurfaceClass,
    v: &MukaiVector,
    h1: &DivisorClass,
    h2: &DivisorClass,
) -> Result<Vec<Wall>, WallError> {
    walls_between_with(Exec::default(), s, v, h1, h2)
}

pub fn walls_between_with(
    exec: Exec,
    s: &SurfaceClass,
    v: &MukaiVector,
    h1: &DivisorClass,
    h2: &DivisorClass,
) -> Result<Vec<Wall>, WallError> {
    if s.rank() != 2 {
        return Err(WallError::RankTwoRequired);
    }
    check_inputs(s, v, &[h1, h2])?;
    let raw = if v.v0.is_positive() {
        positive_rank_walls(exec, s, v, h1, h2)
    } else {
        rank_zero_walls(exec, s, v, h1, h2)
    };
    let mut seen = BTreeSet::new();
    let mut out: Vec<Wall> = Vec::new();
    for w in raw {
        let d = w.d.normalized();
        if seen.insert(d.clone()) {
            out.push(Wall { d, ..w });
        }
    }
    out.sort_by(|a, b| a.d.cmp(&b.d));
    Ok(out)
}

fn rank_zero_walls(exec: Exec, s: &SurfaceClass, v: &MukaiVector, h1: &DivisorClass, h2: &DivisorClass) -> Vec<Wall> {
    let a1 = s.dot(&v.v1, h1);
    let a2 = s.dot(&v.v1, h2);
    let rows = rank_zero_rows(s, v);
    let per_row = par::map_collect(exec, rows, |u1s: Vec<DivisorClass>| {
        let mut found = Vec::new();
        for u1 in u1s {
            let b1 = &v.v2 * s.dot(&u1, h1);
            let b2 = &v.v2 * s.dot(&u1, h2);
            // sign of u2·a_i - b_i changes for u2 between b1/a1 and b2/a2
            let (lo_n, lo_d, hi_n, hi_d) = if &b1 * &a2 <= &b2 * &a1 {
                (&b1, &a1, &b2, &a2)
            } else {
                (&b2, &a2, &b1, &a1)
            };
            let mut u2 = div_ceil(lo_n, lo_d);
            let hi = div_floor(hi_n, hi_d);
            while u2 <= hi {
                let d = v.v1.scale(&u2).sub(&u1.scale(&v.v2));
                if !d.is_zero() {
                    let dsq = s.square(&d);
                    found.push(Wall { d, dsq, provenance: Provenance::RankZeroPair { u1: u1.clone(), u2: u2.clone() } });
                }
                u2 += 1;
            }
        }
        found
    });
    per_row.into_iter().flatten().collect()
}

/// Integer solution set of a threshold predicate on [lo, hi] where the
/// underlying quadratic is monotone on either side of `split`.
fn threshold_set(lo: &Int, hi: &Int, split: Option<Int>, pred: &dyn Fn(&Int) -> bool) -> Vec<(Int, Int)> {
    let mut pieces = Vec::new();
    match split {
        Some(sp) if &sp >= lo && &sp < hi => {
            pieces.push((lo.clone(), sp.clone()));
            pieces.push((sp + 1, hi.clone()));
        }
        _ => pieces.push((lo.clone(), hi.clone())),
    }
    let mut out = Vec::new();
    for (l, h) in pieces {
        if l > h {
            continue;
        }
        match (pred(&l), pred(&h)) {
            (true, true) => out.push((l, h)),
            (true, false) => {
                let t = last_true(&l, &h, pred).expect("pred(l) holds");
                out.push((l, t));
            }
            (false, true) => {
                let t = first_true(&l, &h, pred).expect("pred(h) holds");
                out.push((t, h));
            }
            (false, false) => {}
        }
    }
    out
}

fn intersect_sets(a: &[(Int, Int)], b: &[(Int, Int)]) -> Vec<(Int, Int)> {
    let mut out = Vec::new();
    for (al, ah) in a {
        for (bl, bh) in b {
            let l = al.max(bl).clone();
            let h = ah.min(bh).clone();
            if l <= h {
                out.push((l, h));
            }
        }
    }
    out
}

/// Quadratic a·y² + b·y + c with integer coefficients.
struct Quad {
    a: Int,
    b: Int,
    c: Int,
}

impl Quad {
    fn eval(&self, y: &Int) -> Int {
        (&self.a * y + &self.b) * y + &self.c
    }

    /// floor of the vertex, where monotonicity may change.
    fn split(&self) -> Option<Int> {
        if self.a.is_zero() {
            None
        } else {
            Some(div_floor(&-&self.b, &(int(2) * &self.a)))
        }
    }
}

fn positive_rank_walls(exec: Exec, s: &SurfaceClass, v: &MukaiVector, h1: &DivisorClass, h2: &DivisorClass) -> Vec<Wall> {
    let b = rat_floor(&bound(s, v));
    if !b.is_positive() {
        return Vec::new();
    }
    if h1 == h2 || s.orthogonal_generator(h1).ok() == s.orthogonal_generator(h2).ok() {
        let d0 = s.orthogonal_generator(h1).expect("rank two");
        let d0sq = -s.square(&d0);
        let bmax = isqrt(&(&b / &d0sq));
        let mut out = Vec::new();
        let mut m = int(1);
        while m <= bmax {
            let d = d0.scale(&m);
            let dsq = s.square(&d);
            out.push(Wall { d, dsq, provenance: Provenance::RankPositiveBound });
            m += 1;
        }
        return out;
    }
    let g = |i: usize, j: usize| int(s.gram()[i][j]);
    let (e0, e1) = (DivisorClass::basis(2, 0), DivisorClass::basis(2, 1));
    let (al1, be1) = (s.dot(&e0, h1), s.dot(&e1, h1));
    let (al2, be2) = (s.dot(&e0, h2), s.dot(&e1, h2));
    let p11 = s.square(h1);
    let p22 = s.square(h2);
    let p12 = s.dot(h1, h2);
    let det_p = (&p11 * &p22 - &p12 * &p12).abs();
    // (D·H1)(D·H2) <= 0 bounds |D·H1|² by |v|·|det P|/H2² and symmetrically
    let u_max = isqrt(&(&b * &det_p / &p22));
    let w_max = isqrt(&(&b * &det_p / &p11));
    let det_m = (&al1 * &be2 - &al2 * &be1).abs();
    let x_max = div_floor(&(be2.abs() * &u_max + be1.abs() * &w_max), &det_m);
    let y_max = div_floor(&(al2.abs() * &u_max + al1.abs() * &w_max), &det_m);
    // iterate over the shorter coordinate
    let swap = y_max < x_max;
    let (outer_max, inner_max) = if swap { (y_max, x_max) } else { (x_max, y_max) };
    let (g_oo, g_oi, g_ii) = if swap { (g(1, 1), g(0, 1), g(0, 0)) } else { (g(0, 0), g(0, 1), g(1, 1)) };
    let (ao1, ai1, ao2, ai2) = if swap {
        (be1.clone(), al1.clone(), be2.clone(), al2.clone())
    } else {
        (al1.clone(), be1.clone(), al2.clone(), be2.clone())
    };
    let mut outer = Vec::new();
    let mut x = -&outer_max;
    while x <= outer_max {
        outer.push(x.clone());
        x += 1;
    }
    let neg_b = -&b;
    let rows = par::map_collect(exec, outer, |x: Int| {
        let sq = Quad { a: g_ii.clone(), b: int(2) * &g_oi * &x, c: &g_oo * &x * &x };
        let sec = Quad {
            a: &ai1 * &ai2,
            b: &x * (&ao1 * &ai2 + &ao2 * &ai1),
            c: &ao1 * &ao2 * &x * &x,
        };
        let lo = -&inner_max;
        let lower = threshold_set(&lo, &inner_max, sq.split(), &|y| sq.eval(y) >= neg_b);
        let upper = threshold_set(&lo, &inner_max, sq.split(), &|y| sq.eval(y) <= int(-1));
        let sector = threshold_set(&lo, &inner_max, sec.split(), &|y| sec.eval(y) <= Int::zero());
        let set = intersect_sets(&intersect_sets(&lower, &upper), &sector);
        let mut found = Vec::new();
        for (l, h) in set {
            let mut y = l;
            while y <= h {
                let coords = if swap { vec![y.clone(), x.clone()] } else { vec![x.clone(), y.clone()] };
                found.push(DivisorClass::new(coords));
                y += 1;
            }
        }
        found
    });
    rows.into_iter()
        .flatten()
        .map(|d| {
            let dsq = s.square(&d);
            Wall { d, dsq, provenance: Provenance::RankPositiveBound }
        })
        .collect()
}

/// No wall between the two polarizations and both are generic.
pub fn same_chamber(s: &SurfaceClass, v: &MukaiVector, h1: &DivisorClass, h2: &DivisorClass) -> Result<bool, WallError> {
    same_chamber_with(Exec::default(), s, v, h1, h2)
}

pub fn same_chamber_with(
    exec: Exec,
    s: &SurfaceClass,
    v: &MukaiVector,
    h1: &DivisorClass,
    h2: &DivisorClass,
) -> Result<bool, WallError> {
    if s.rank() == 1 {
        check_inputs(s, v, &[h1, h2])?;
        return Ok(h1 == h2);
    }
    if !is_generic_with(exec, s, v, h1)?.is_generic() || !is_generic_with(exec, s, v, h2)?.is_generic() {
        return Ok(false);
    }
    Ok(walls_between_with(exec, s, v, h1, h2)?.is_empty())
}

/// The t of H = sigma + t f on an elliptic preset.
pub fn fiber_coefficient(s: &SurfaceClass, h: &DivisorClass) -> Result<Int, WallError> {
    if !s.is_elliptic() {
        return Err(WallError::NotElliptic);
    }
    s.check_len(h)?;
    if h.coords()[0] != int(1) {
        return Err(WallError::NotSigmaPlusTf);
    }
    Ok(h.coords()[1].clone())
}

/// Sufficient suitability test for H = sigma + t f.
pub fn is_suitable(s: &SurfaceClass, v: &MukaiVector, h: &DivisorClass) -> Result<Suitability, WallError> {
    let t = fiber_coefficient(s, h)?;
    s.check_len(&v.v1)?;
    if !v.v0.is_positive() {
        return Err(WallError::RankZero);
    }
    let b = bound(s, v);
    let need = match s.kind() {
        SurfaceKind::K3 => b + rat(&int(1)),
        SurfaceKind::Abelian => b,
    };
    Ok(if rat(&t) >= need { Suitability::Suitable } else { Suitability::Unknown })
}

/// Maximum of d(C²+2)/(2C·H) over effective C with 0 < C·H < d.
pub fn threshold_md(s: &SurfaceClass, h: &DivisorClass, d: &Int) -> Threshold {
    let mut best: Option<Rat> = None;
    for c in s.effective_classes_below(h, d) {
        let val = Rat::new(d * (s.square(&c) + 2), int(2) * s.dot(&c, h));
        if best.as_ref().is_none_or(|b| &val > b) {
            best = Some(val);
        }
    }
    match best {
        Some(b) => Threshold::Value(b),
        None => Threshold::NegInfinity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves::tensor;
    use proptest::prelude::*;

    fn dc(c: &[i64]) -> DivisorClass {
        DivisorClass::from_i64s(c)
    }

    fn mv(v0: i64, v1: &[i64], v2: i64) -> MukaiVector {
        MukaiVector::from_i64s(v0, v1, v2)
    }

    #[test]
    fn rank_one_is_always_generic() {
        let r = SurfaceClass::rank1(SurfaceKind::K3, 2);
        assert!(is_generic(&r, &mv(3, &[1], -4), &dc(&[1])).unwrap().is_generic());
    }

    #[test]
    fn twisted_rank_zero_vector_hits_a_wall() {
        let s = SurfaceClass::elliptic_k3();
        let a = 5;
        let h = dc(&[1, a]);
        let v = mv(0, &[1, 1], 1);
        assert!(is_generic(&s, &v, &h).unwrap().is_generic());
        let vl = tensor(&s, &v, &dc(&[0, -a])).unwrap();
        assert_eq!(vl, mv(0, &[1, 1], 1 - a));
        let g = is_generic(&s, &vl, &h).unwrap();
        let w = g.witness().expect("non-generic");
        assert_eq!(w.d, dc(&[-1, a - 2]));
        assert_eq!(s.dot(&w.d, &h), int(0));
    }

    #[test]
    fn degenerate_rank_zero_rejected() {
        let s = SurfaceClass::elliptic_k3();
        assert_eq!(is_generic(&s, &mv(0, &[1, 1], 0), &dc(&[1, 5])), Err(WallError::DegenerateRankZero));
    }

    #[test]
    fn walls_between_examples() {
        let s = SurfaceClass::elliptic_k3();
        let a = 5;
        let v = mv(0, &[1, 1], 1 - a);
        let h1 = dc(&[1, a]);
        let h2 = dc(&[1, a + 1]);
        let walls = walls_between(&s, &v, &h1, &h2).unwrap();
        assert!(walls.iter().any(|w| w.d == dc(&[-1, a - 2]).normalized()));
        let gen = mv(0, &[1, 1], 1);
        assert!(walls_between(&s, &gen, &h1, &h1).unwrap().is_empty());
        // far from every wall of a small positive-rank vector
        let vp = mv(1, &[0, 1], 0);
        let w = walls_between(&s, &vp, &dc(&[1, 40]), &dc(&[1, 41])).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn suitability_examples() {
        let k3 = SurfaceClass::elliptic_k3();
        assert_eq!(bound(&k3, &mv(2, &[0, 1], 0)), rat(&int(8)));
        let v10 = mv(2, &[1, 2], 0);
        assert_eq!(bound(&k3, &v10), rat(&int(10)));
        assert_eq!(is_suitable(&k3, &v10, &dc(&[1, 11])).unwrap(), Suitability::Suitable);
        assert_eq!(is_suitable(&k3, &v10, &dc(&[1, 10])).unwrap(), Suitability::Unknown);
        let ab = SurfaceClass::elliptic_ab();
        // |v| = 4/4·v² + 2²/2 with v² = 8
        let va = mv(2, &[1, 4], 0);
        assert_eq!(bound(&ab, &va), rat(&int(10)));
        assert_eq!(is_suitable(&ab, &va, &dc(&[1, 10])).unwrap(), Suitability::Suitable);
        assert_eq!(is_suitable(&k3, &v10, &dc(&[2, 11])), Err(WallError::NotSigmaPlusTf));
    }

    #[test]
    fn threshold_examples() {
        let r1 = SurfaceClass::rank1(SurfaceKind::K3, 1);
        assert_eq!(threshold_md(&r1, &dc(&[1]), &int(3)), Threshold::Value(rat(&int(3))));
        let r2 = SurfaceClass::rank1(SurfaceKind::K3, 2);
        assert_eq!(threshold_md(&r2, &dc(&[1]), &int(2)), Threshold::NegInfinity);
        let e = SurfaceClass::elliptic_k3();
        assert_eq!(threshold_md(&e, &dc(&[1, 3]), &int(2)), Threshold::Value(rat(&int(2))));
        assert!(Threshold::Value(rat(&int(3))).passed_by(&int(4)));
        assert!(!Threshold::Value(rat(&int(3))).passed_by(&int(3)));
        assert!(!Threshold::NegInfinity.passed_by(&int(0)));
    }

    proptest! {
        #[test]
        fn walls_between_is_symmetric(
            t1 in 3i64..30,
            t2 in 3i64..30,
            r in 1i64..3,
            q in 0i64..4,
            a in -3i64..3,
        ) {
            let s = SurfaceClass::elliptic_k3();
            let v = mv(r, &[1, q], a);
            let (h1, h2) = (dc(&[1, t1]), dc(&[1, t2]));
            let w12: Vec<_> = walls_between(&s, &v, &h1, &h2).unwrap().into_iter().map(|w| w.d).collect();
            let w21: Vec<_> = walls_between(&s, &v, &h2, &h1).unwrap().into_iter().map(|w| w.d).collect();
            prop_assert_eq!(w12, w21);
        }

        #[test]
        fn modes_agree(t1 in 3i64..20, t2 in 3i64..20, q in 1i64..5, a in 1i64..6) {
            let s = SurfaceClass::elliptic_k3();
            let v = mv(0, &[1, q], a);
            let (h1, h2) = (dc(&[1, t1]), dc(&[1, t2]));
            let p = walls_between_with(Exec::Parallel, &s, &v, &h1, &h2).unwrap();
            let q = walls_between_with(Exec::Sequential, &s, &v, &h1, &h2).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
