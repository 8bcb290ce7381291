//! Certified moves on triples: twists, Fourier-Mukai duals, chamber changes
//! and lattice retargeting.

use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{div_ceil, gcd, int, rat_floor, Int};
use crate::json::{class_json, int_json, rat_json, vector_json};
use crate::lattice::{is_primitive, DivisorClass, SurfaceClass, SurfaceKind};
use crate::mukai::{bound_from, make_triple, primitive_decomposition, MukaiVector, Triple};
use crate::walls::{is_generic, threshold_md, walls_between, Threshold};

/// Stability of the dual is assumed once the certified n-gate is passed.
pub const ASSUME_FM_BOUND: &str =
    "the boundedness constant of the positive-rank dualization is at most the certified gate n > 32r^3k";
pub const ASSUME_RANK0_BOUND: &str =
    "the rank-zero dualization threshold a0 is at most max(M_d, 0)";
pub const ASSUME_DUAL_ABELIAN: &str =
    "the dual abelian surface is modelled by the same lattice with a dual polarization of equal square";
pub const ASSUME_CONNECTED: &str =
    "polarized surfaces of a fixed kind and degree form a connected family carrying the moduli spaces along";
pub const ASSUME_PICARD_TWO: &str = "a deformation with Picard rank at least 2 containing both classes exists";
pub const ASSUME_SIGN: &str =
    "sign normalization (v -> -v, or (0,-xi,a) -> (0,xi,a)) identifies isomorphic moduli spaces";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    TensorLineBundle { c1l: DivisorClass },
    TensorPowerOfH { d: Int },
    FmDualK3,
    FmDualAbelian,
    FmDualRank0,
    ChangePolarization { h_new: DivisorClass },
    RetargetLattice { surface: SurfaceClass, v: MukaiVector, h: DivisorClass },
    CanonicalizeSign,
}

impl Move {
    pub fn type_name(&self) -> &'static str {
        match self {
            Move::TensorLineBundle { .. } => "TensorLineBundle",
            Move::TensorPowerOfH { .. } => "TensorPowerOfH",
            Move::FmDualK3 => "FMDualK3",
            Move::FmDualAbelian => "FMDualAbelian",
            Move::FmDualRank0 => "FMDualRank0",
            Move::ChangePolarization { .. } => "ChangePolarization",
            Move::RetargetLattice { .. } => "RetargetLattice",
            Move::CanonicalizeSign => "CanonicalizeSign",
        }
    }

    /// Positive-rank dual for the given kind.
    pub fn fm_dual_for(kind: SurfaceKind) -> Move {
        match kind {
            SurfaceKind::K3 => Move::FmDualK3,
            SurfaceKind::Abelian => Move::FmDualAbelian,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::TensorLineBundle { c1l } => write!(f, "TensorLineBundle({c1l})"),
            Move::TensorPowerOfH { d } => write!(f, "TensorPowerOfH({d})"),
            Move::ChangePolarization { h_new } => write!(f, "ChangePolarization({h_new})"),
            Move::RetargetLattice { surface, v, h } => write!(f, "RetargetLattice({surface}, {v}, {h})"),
            other => f.write_str(other.type_name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub witness: Value,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepCertificate {
    pub mv: Move,
    pub input: Triple,
    pub output: Triple,
    pub checks: Vec<Check>,
    pub assumptions: Vec<String>,
}

impl StepCertificate {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

/// A failed precondition, named by its check.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("check `{check}` failed: {message}")]
pub struct MoveError {
    pub check: String,
    pub message: String,
    pub witness: Value,
}

impl MoveError {
    pub fn new(check: &str, message: impl Into<String>) -> Self {
        MoveError { check: check.to_string(), message: message.into(), witness: Value::Null }
    }
}

/// Check accumulator that aborts on the first failure.
struct Checks(Vec<Check>);

impl Checks {
    fn require(&mut self, name: &str, witness: Value, ok: bool, message: impl FnOnce() -> String) -> Result<(), MoveError> {
        self.0.push(Check { name: name.to_string(), witness: witness.clone(), ok });
        if ok {
            Ok(())
        } else {
            Err(MoveError { check: name.to_string(), message: message(), witness })
        }
    }
}

/// v·ch(L): (v0, v1 + v0·L, v2 + v1·L + v0·L²/2).
pub fn tensor(s: &SurfaceClass, v: &MukaiVector, c1l: &DivisorClass) -> Result<MukaiVector, MoveError> {
    s.check_len(c1l).map_err(|e| MoveError::new("dimension", e.to_string()))?;
    s.check_len(&v.v1).map_err(|e| MoveError::new("dimension", e.to_string()))?;
    let l2 = s.square(c1l);
    let (half, rem) = (&v.v0 * &l2).div_rem(&int(2));
    assert!(rem.is_zero(), "even lattice gives an even L²");
    Ok(MukaiVector::new(
        v.v0.clone(),
        v.v1.add(&c1l.scale(&v.v0)),
        &v.v2 + s.dot(&v.v1, c1l) + half,
    ))
}

/// Twist by O(dH).
pub fn tensor_by_dh(s: &SurfaceClass, v: &MukaiVector, h: &DivisorClass, d: &Int) -> Result<MukaiVector, MoveError> {
    tensor(s, v, &h.scale(d))
}

/// (v0, v1, v2) -> (v2, -v1, v0), after checking the variant fits the surface
/// and the rank case.
pub fn fm_dual(s: &SurfaceClass, v: &MukaiVector, variant: &Move) -> Result<MukaiVector, MoveError> {
    match variant {
        Move::FmDualK3 if s.kind() != SurfaceKind::K3 => {
            return Err(MoveError::new("kind", "FMDualK3 on an abelian surface"));
        }
        Move::FmDualAbelian if s.kind() != SurfaceKind::Abelian => {
            return Err(MoveError::new("kind", "FMDualAbelian on a K3 surface"));
        }
        Move::FmDualK3 | Move::FmDualAbelian => {
            if !v.v0.is_positive() {
                return Err(MoveError::new("rank-positive", "positive-rank dual needs v0 > 0"));
            }
        }
        Move::FmDualRank0 => {
            if !v.v0.is_zero() && !v.v2.is_zero() {
                return Err(MoveError::new("shape", "rank-zero dual needs v0 = 0 or v2 = 0"));
            }
        }
        other => return Err(MoveError::new("kind", format!("{} is not a dual", other.type_name()))),
    }
    Ok(MukaiVector::new(v.v2.clone(), v.v1.neg(), v.v0.clone()))
}

/// Negates a negative-rank vector and flips an anti-effective rank-zero class.
pub fn canonicalize_sign(s: &SurfaceClass, v: &MukaiVector) -> MukaiVector {
    if v.v0.is_negative() {
        return v.neg();
    }
    if v.v0.is_zero() && s.is_effective_nonzero(&v.v1.neg()) {
        return MukaiVector::new(Int::zero(), v.v1.neg(), v.v2.clone());
    }
    v.clone()
}

/// Applies one move with every decidable precondition checked.
pub fn apply(t: &Triple, mv: &Move) -> Result<StepCertificate, MoveError> {
    let s = &t.surface;
    let mut checks = Checks(Vec::new());
    let mut assumptions: Vec<String> = Vec::new();
    if !matches!(mv, Move::CanonicalizeSign) {
        let r = t.validate();
        checks.require(
            "input-valid",
            json!({ "error": r.as_ref().err().map(|e| e.to_string()) }),
            r.is_ok(),
            || format!("input triple invalid: {}", r.as_ref().err().map(|e| e.to_string()).unwrap_or_default()),
        )?;
    }
    let (surface, v, h) = match mv {
        Move::TensorLineBundle { c1l } => {
            checks.require("dimension", class_json(c1l), s.check_len(c1l).is_ok(), || "twist dimension".into())?;
            checks.require("rank-positive", int_json(&t.v.v0), t.v.v0.is_positive(), || {
                "line-bundle twists need positive rank; use TensorPowerOfH on rank zero".into()
            })?;
            (s.clone(), tensor(s, &t.v, c1l)?, t.h.clone())
        }
        Move::TensorPowerOfH { d } => (s.clone(), tensor_by_dh(s, &t.v, &t.h, d)?, t.h.clone()),
        Move::FmDualK3 | Move::FmDualAbelian => {
            let out = fm_dual(s, &t.v, mv)?;
            checks.require("kind", json!(s.kind().as_str()), true, String::new)?;
            checks.require("picard-rank", json!(s.rank()), s.rank() == 1, || "positive-rank dual needs Picard rank 1".into())?;
            let (_, w) = primitive_decomposition(&t.v).map_err(|e| MoveError::new("nonzero", e.to_string()))?;
            let r = w.v0.clone();
            let n = w.v1.coords()[0].clone();
            let gate = int(32) * &r * &r * &r * &t.k;
            checks.require(
                "threshold",
                json!({ "n": int_json(&n), "r": int_json(&r), "k": int_json(&t.k), "gate": int_json(&gate) }),
                n > gate,
                || format!("n = {n} does not exceed 32r^3k = {gate}"),
            )?;
            assumptions.push(ASSUME_FM_BOUND.into());
            if matches!(mv, Move::FmDualAbelian) {
                assumptions.push(ASSUME_DUAL_ABELIAN.into());
            }
            (s.clone(), out, t.h.clone())
        }
        Move::FmDualRank0 => {
            let out = fm_dual(s, &t.v, mv)?;
            let (_, w) = primitive_decomposition(&t.v).map_err(|e| MoveError::new("nonzero", e.to_string()))?;
            let side = if w.v0.is_zero() {
                w.clone()
            } else {
                canonicalize_sign(s, &MukaiVector::new(Int::zero(), w.v1.neg(), w.v0.clone()))
            };
            checks.require("rank-zero-side", vector_json(&side), s.is_effective_nonzero(&side.v1), || {
                "rank-zero side has no effective class".into()
            })?;
            let d = s.dot(&side.v1, &t.h);
            let md = threshold_md(s, &t.h, &d);
            let md_json = match &md {
                Threshold::NegInfinity => json!("-inf"),
                Threshold::Value(q) => rat_json(q),
            };
            checks.require(
                "threshold",
                json!({ "a": int_json(&side.v2), "d": int_json(&d), "M_d": md_json, "min_a": int_json(&md.min_passing()) }),
                md.passed_by(&side.v2),
                || format!("a = {} does not exceed max(M_d, 0) for d = {d}", side.v2),
            )?;
            let g_in = is_generic(s, &t.v, &t.h).map_err(|e| MoveError::new("generic-input", e.to_string()))?;
            checks.require("generic-input", genericity_json(&g_in), g_in.is_generic(), || {
                "polarization is not generic for the input".into()
            })?;
            let canon = canonicalize_sign(s, &out);
            let g_out = is_generic(s, &canon, &t.h).map_err(|e| MoveError::new("generic-output", e.to_string()))?;
            checks.require("generic-output", genericity_json(&g_out), g_out.is_generic(), || {
                "polarization is not generic for the dual vector".into()
            })?;
            assumptions.push(ASSUME_RANK0_BOUND.into());
            (s.clone(), out, t.h.clone())
        }
        Move::ChangePolarization { h_new } => {
            checks.require("dimension", class_json(h_new), s.check_len(h_new).is_ok(), || "polarization dimension".into())?;
            checks.require("primitive", class_json(h_new), is_primitive(h_new), || "new polarization is not primitive".into())?;
            checks.require("ample", class_json(h_new), s.is_ample(h_new), || "new polarization is not ample".into())?;
            let g = is_generic(s, &t.v, h_new).map_err(|e| MoveError::new("same-chamber", e.to_string()))?;
            let walls = if s.rank() == 2 {
                walls_between(s, &t.v, &t.h, h_new).map_err(|e| MoveError::new("same-chamber", e.to_string()))?
            } else {
                Vec::new()
            };
            let ok = g.is_generic() && walls.is_empty() && (s.rank() == 2 || h_new == &t.h);
            let wall_list: Vec<Value> = walls.iter().take(8).map(|w| class_json(&w.d)).collect();
            checks.require(
                "same-chamber",
                json!({ "walls": walls.len(), "sample": wall_list, "target_generic": g.is_generic() }),
                ok,
                || format!("{} walls separate the polarizations", walls.len()),
            )?;
            (s.clone(), t.v.clone(), h_new.clone())
        }
        Move::RetargetLattice { surface, v, h } => {
            retarget_checks(&mut checks, t, surface, v)?;
            assumptions.push(ASSUME_CONNECTED.into());
            assumptions.push(ASSUME_PICARD_TWO.into());
            (surface.clone(), v.clone(), h.clone())
        }
        Move::CanonicalizeSign => {
            let out = canonicalize_sign(s, &t.v);
            let kind = if t.v.v0.is_negative() {
                "negate"
            } else if out != t.v {
                "flip-class"
            } else {
                "identity"
            };
            checks.require("sign", json!(kind), true, String::new)?;
            if out != t.v {
                assumptions.push(ASSUME_SIGN.into());
            }
            (s.clone(), out, t.h.clone())
        }
    };
    let raw = Triple::unchecked(surface.clone(), v.clone(), h.clone());
    checks.require(
        "mk-preserved",
        json!({ "m": [int_json(&t.m), int_json(&raw.m)], "k": [int_json(&t.k), int_json(&raw.k)] }),
        t.m == raw.m && t.k == raw.k,
        || format!("(m,k) changed from ({},{}) to ({},{})", t.m, t.k, raw.m, raw.k),
    )?;
    let (sq_in, sq_out) = (t.square(), raw.square());
    checks.require(
        "square",
        json!([int_json(&sq_in), int_json(&sq_out)]),
        sq_in == sq_out,
        || format!("square changed from {sq_in} to {sq_out}"),
    )?;
    let canon = canonicalize_sign(&surface, &v);
    let valid = make_triple(&surface, &canon, &h);
    checks.require(
        "output-valid",
        json!({ "sign_canonical": canon == v, "error": valid.as_ref().err().map(|e| e.to_string()) }),
        valid.is_ok(),
        || format!("output is not a valid triple: {}", valid.as_ref().err().map(|e| e.to_string()).unwrap_or_default()),
    )?;
    let output = if canon == v { valid.expect("checked") } else { raw };
    Ok(StepCertificate { mv: mv.clone(), input: t.clone(), output, checks: checks.0, assumptions })
}

fn genericity_json(g: &crate::walls::Genericity) -> Value {
    match g.witness() {
        None => json!({ "generic": true }),
        Some(w) => json!({ "generic": false, "wall": class_json(&w.d) }),
    }
}

/// (rank, g, a) of the primitive part, with g = gcd(r, content of xi).
fn rank_gcd_a(v: &MukaiVector) -> Option<(Int, Int, Int, Int)> {
    let (m, w) = primitive_decomposition(v).ok()?;
    let g = gcd(&w.v0, &w.v1.content());
    Some((m, w.v0, g, w.v2))
}

fn retarget_checks(checks: &mut Checks, t: &Triple, surface: &SurfaceClass, v: &MukaiVector) -> Result<(), MoveError> {
    checks.require(
        "kind",
        json!([t.kind().as_str(), surface.kind().as_str()]),
        t.kind() == surface.kind(),
        || "retargeting cannot change the surface kind".into(),
    )?;
    checks.require("dimension", vector_json(v), surface.check_len(&v.v1).is_ok(), || "vector dimension".into())?;
    let (m1, r1, g1, a1) = rank_gcd_a(&t.v).ok_or_else(|| MoveError::new("nonzero", "zero vector"))?;
    let (m2, r2, g2, a2) = rank_gcd_a(v).ok_or_else(|| MoveError::new("nonzero", "zero vector"))?;
    let same_sign = (r1.is_positive() && r2.is_positive()) || (r1.is_zero() && r2.is_zero());
    checks.require("rank-sign", json!([int_json(&r1), int_json(&r2)]), same_sign, || {
        "retargeting needs both ranks positive or both zero".into()
    })?;
    checks.require("rank", json!([int_json(&(&m1 * &r1)), int_json(&(&m2 * &r2))]), m1 == m2 && r1 == r2, || {
        "ranks differ".into()
    })?;
    checks.require("gcd", json!([int_json(&g1), int_json(&g2)]), g1 == g2, || format!("g differs: {g1} vs {g2}"))?;
    let diff = &a1 - &a2;
    checks.require(
        "congruence",
        json!({ "a1": int_json(&a1), "a2": int_json(&a2), "g": int_json(&g1) }),
        diff.is_multiple_of(&g1),
        || format!("{a1} and {a2} differ modulo {g1}"),
    )?;
    Ok(())
}

/// For the link tensor between two elliptic models of rank r and content g:
/// l = (a1 - a2)/g and p1 = p2 + r(a1 - a2)/g².
pub fn link_twist(r: &Int, g: &Int, a1: &Int, a2: &Int, p2: &Int) -> Result<(Int, Int), MoveError> {
    let diff = a1 - a2;
    if !diff.is_multiple_of(g) {
        return Err(MoveError::new("congruence", format!("{a1} and {a2} differ modulo {g}")));
    }
    let num = r * &diff;
    let g2 = g * g;
    if !num.is_multiple_of(&g2) {
        return Err(MoveError::new("square", "r(a1 - a2) is not divisible by g^2"));
    }
    Ok((&diff / g, p2 + num / g2))
}

/// Elliptic model of a positive-rank triple: sigma + p f polarization with p
/// above the suitability bound and the retargeted vector.
fn elliptic_model(t: &Triple, p_min: &Int) -> (Int, MukaiVector, DivisorClass) {
    let kind = t.kind();
    let (m, w) = primitive_decomposition(&t.v).expect("nonzero");
    let r = w.v0.clone();
    let g = gcd(&r, &w.v1.content());
    let zeta = w.v1.div_exact(&g);
    let e = t.surface.square(&zeta) / 2;
    let base = match kind {
        SurfaceKind::K3 => &e + 1,
        SurfaceKind::Abelian => e,
    };
    let shift = div_ceil(&(p_min - &base), &r);
    let p: Int = &base + &r * &shift;
    let a = &w.v2 + &g * &g * &shift;
    let xi = DivisorClass::new(vec![g.clone(), &g * &p]);
    let v = MukaiVector::new(r, xi, a).scale(&m);
    let h = DivisorClass::new(vec![int(1), p.clone()]);
    (p, v, h)
}

/// Joins two positive-rank triples with equal rank, content and square through
/// suitable polarizations on the elliptic preset of their kind.
pub fn connect_via_elliptic(t1: &Triple, t2: &Triple) -> Result<Vec<StepCertificate>, MoveError> {
    if t1 == t2 {
        return Ok(Vec::new());
    }
    if t1.kind() != t2.kind() {
        return Err(MoveError::new("kind", "triples live on surfaces of different kinds"));
    }
    if t1.square() != t2.square() {
        return Err(MoveError::new("square", format!("squares differ: {} vs {}", t1.square(), t2.square())));
    }
    let (m1, r1, g1, a1) = rank_gcd_a(&t1.v).ok_or_else(|| MoveError::new("nonzero", "zero vector"))?;
    let (m2, r2, g2, a2) = rank_gcd_a(&t2.v).ok_or_else(|| MoveError::new("nonzero", "zero vector"))?;
    if !r1.is_positive() || !r2.is_positive() {
        return Err(MoveError::new("rank-positive", "connecting needs positive rank"));
    }
    if m1 != m2 || r1 != r2 {
        return Err(MoveError::new("rank", "ranks or multiplicities differ"));
    }
    if g1 != g2 {
        return Err(MoveError::new("gcd", format!("g differs: {g1} vs {g2}")));
    }
    if !(&a1 - &a2).is_multiple_of(&g1) {
        return Err(MoveError::new("congruence", format!("{a1} and {a2} differ modulo {g1}")));
    }
    let kind = t1.kind();
    let y = SurfaceClass::elliptic(kind);
    let vb = rat_floor(&bound_from(kind, &t1.v.v0, &t1.square()));
    let p_min = match kind {
        SurfaceKind::K3 => (vb.clone() + int(2)).max(int(3)),
        SurfaceKind::Abelian => (vb + int(1)).max(int(1)),
    };
    let (p1, v1, h1) = elliptic_model(t1, &p_min);
    let (p2, v2, h2) = elliptic_model(t2, &p_min);
    let mut steps = Vec::new();
    let mut cur = t1.clone();
    let first = Move::RetargetLattice { surface: y.clone(), v: v1.clone(), h: h1 };
    push_step(&mut steps, &mut cur, &first)?;
    if p1 != p2 {
        push_step(&mut steps, &mut cur, &Move::ChangePolarization { h_new: h2.clone() })?;
    }
    let a1p = &v1.v2 / &m1;
    let a2p = &v2.v2 / &m1;
    let (l, p1_check) = link_twist(&r1, &g1, &a1p, &a2p, &p2)?;
    if p1_check != p1 {
        return Err(MoveError::new("square", "fiber coefficients do not satisfy the link relation"));
    }
    if !l.is_zero() {
        let c1l = DivisorClass::new(vec![Int::zero(), -&l]);
        push_step(&mut steps, &mut cur, &Move::TensorLineBundle { c1l })?;
    }
    if cur.v != v2 {
        return Err(MoveError::new("link", "linking twist did not reach the second elliptic model"));
    }
    if &cur != t2 {
        let last = Move::RetargetLattice { surface: t2.surface.clone(), v: t2.v.clone(), h: t2.h.clone() };
        push_step(&mut steps, &mut cur, &last)?;
    }
    Ok(steps)
}

fn push_step(steps: &mut Vec<StepCertificate>, cur: &mut Triple, mv: &Move) -> Result<(), MoveError> {
    let cert = apply(cur, mv)?;
    *cur = cert.output.clone();
    steps.push(cert);
    Ok(())
}
