//! Reduction of any (m,k)-triple to the canonical triple
//! (rank1(kind,k), m(0,h,0), h) as a replayable path of certified moves.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{div_ceil, div_floor, gcd, int, Int};
use crate::json::{assumptions_from, int_json, list_from, FromJson, JsonError, ToJson};
use crate::lattice::{is_primitive, DivisorClass, SurfaceClass};
use crate::moves::{apply, canonicalize_sign, connect_via_elliptic, Move, MoveError, StepCertificate};
use crate::mukai::{bound_from, primitive_decomposition, square, MukaiVector, Triple, TripleError};
use crate::walls::{same_chamber, threshold_md};

/// Iteration cap for the twist searches.
pub const TWIST_SEARCH_LIMIT: u64 = 1_000_000;

/// Largest max(|x|, |y|) tried when moving a rank-zero polarization.
pub const POLARIZATION_SEARCH_RADIUS: i64 = 120;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid start triple: {0}")]
    InvalidStart(TripleError),
    #[error("twist search precondition failed: {0}")]
    TwistPrecondition(String),
    #[error("no twist found within {0} candidates")]
    TwistExhausted(u64),
    #[error("step {index} ({stage}): {error}")]
    Step { index: usize, stage: &'static str, error: MoveError },
    #[error("{stage}: {message}")]
    Search { stage: &'static str, message: String },
}

impl PlanError {
    /// Name of the failing check when a move was rejected.
    pub fn check_name(&self) -> Option<&str> {
        match self {
            PlanError::Step { error, .. } => Some(&error.check),
            _ => None,
        }
    }
}

/// Start triple, certified steps and end triple.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub start: Triple,
    pub steps: Vec<StepCertificate>,
    pub end: Triple,
}

impl Path {
    /// Named assumptions of every step, first occurrence order.
    pub fn assumptions(&self) -> Vec<String> {
        dedup_assumptions(self.steps.iter().flat_map(|s| s.assumptions.iter()))
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn dedup_assumptions<'a>(items: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for a in items {
        if !out.contains(a) {
            out.push(a.clone());
        }
    }
    out
}

impl ToJson for Path {
    fn to_json(&self) -> Value {
        json!({
            "start": self.start.to_json(),
            "steps": self.steps.iter().map(ToJson::to_json).collect::<Vec<_>>(),
            "end": self.end.to_json(),
            "assumptions": self.assumptions(),
        })
    }
}

impl FromJson for Path {
    fn from_json(v: &Value, path: &str) -> Result<Self, JsonError> {
        let get = |key: &str| v.get(key).ok_or_else(|| JsonError::new(&format!("{path}.{key}"), "missing field"));
        if !v.is_object() {
            return Err(JsonError::new(path, "expected an object"));
        }
        let start = Triple::from_json(get("start")?, &format!("{path}.start"))?;
        let steps = list_from(get("steps")?, &format!("{path}.steps"))?;
        let end = Triple::from_json(get("end")?, &format!("{path}.end"))?;
        if let Some(a) = v.get("assumptions") {
            assumptions_from(a, &format!("{path}.assumptions"))?;
        }
        Ok(Path { start, steps, end })
    }
}

/// Minimal s found by a twist search with the rejected candidates and their
/// gcds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistTrace {
    pub s: Int,
    pub rejected: Vec<(Int, Int)>,
}

/// n_s = n + rs and a_s = a + 2lns + rls².
pub fn twisted_pair(r: &Int, n: &Int, a: &Int, l: &Int, s: &Int) -> (Int, Int) {
    let ns = n + r * s;
    let as_ = a + int(2) * l * n * s + r * l * s * s;
    (ns, as_)
}

/// Smallest s > N with gcd(n + rs, a + 2lns + rls²) = 1.
pub fn find_coprime_twist(r: &Int, n: &Int, a: &Int, l: &Int, big_n: &Int) -> Result<Int, PlanError> {
    find_coprime_twist_traced(r, n, a, l, big_n).map(|t| t.s)
}

pub fn find_coprime_twist_traced(r: &Int, n: &Int, a: &Int, l: &Int, big_n: &Int) -> Result<TwistTrace, PlanError> {
    if !r.is_positive() {
        return Err(PlanError::TwistPrecondition("r must be positive".into()));
    }
    if !gcd(&gcd(r, n), a).is_one() {
        return Err(PlanError::TwistPrecondition("gcd(r, n, a) must be 1".into()));
    }
    let k = l * n * n - r * a;
    if !k.is_positive() {
        return Err(PlanError::TwistPrecondition(format!("k = ln² - ra = {k} must be positive")));
    }
    let mut rejected = Vec::new();
    let mut s = big_n + 1;
    for _ in 0..TWIST_SEARCH_LIMIT {
        let (ns, as_) = twisted_pair(r, n, a, l, &s);
        let g = gcd(&ns, &as_);
        if g.is_one() {
            return Ok(TwistTrace { s, rejected });
        }
        rejected.push((s.clone(), g));
        s += 1;
    }
    Err(PlanError::TwistExhausted(TWIST_SEARCH_LIMIT))
}

/// Smallest s = 2ks' > N for which n = 1, a = 0, l = k twists to a coprime
/// pair with a_s in 2kZ.
pub fn find_even_twist(r: &Int, k: &Int, big_n: &Int) -> Result<Int, PlanError> {
    if !r.is_positive() || !k.is_positive() {
        return Err(PlanError::TwistPrecondition("r and k must be positive".into()));
    }
    let two_k = int(2) * k;
    let mut sp: Int = (div_floor(big_n, &two_k) + int(1)).max(int(1));
    for _ in 0..TWIST_SEARCH_LIMIT {
        let s = &two_k * &sp;
        let (ns, as_) = twisted_pair(r, &int(1), &Int::zero(), k, &s);
        if gcd(&ns, &as_).is_one() && as_.is_multiple_of(&two_k) && &s > big_n {
            return Ok(s);
        }
        sp += 1;
    }
    Err(PlanError::TwistExhausted(TWIST_SEARCH_LIMIT))
}

struct Builder {
    cur: Triple,
    steps: Vec<StepCertificate>,
}

impl Builder {
    fn push(&mut self, stage: &'static str, mv: Move) -> Result<(), PlanError> {
        let cert = apply(&self.cur, &mv).map_err(|error| PlanError::Step { index: self.steps.len(), stage, error })?;
        self.cur = cert.output.clone();
        self.steps.push(cert);
        Ok(())
    }

    fn extend(&mut self, certs: Vec<StepCertificate>) {
        for c in certs {
            self.cur = c.output.clone();
            self.steps.push(c);
        }
    }

    fn prim(&self) -> MukaiVector {
        primitive_decomposition(&self.cur.v).expect("nonzero").1
    }
}

/// Builds the certified path from `t` to its canonical triple.
pub fn reduce_to_canonical(t: &Triple) -> Result<Path, PlanError> {
    let start = t.validate().map_err(PlanError::InvalidStart)?;
    let mut b = Builder { cur: start.clone(), steps: Vec::new() };
    if !start.is_canonical() {
        step_rank_positive(&mut b)?;
        step_coprime(&mut b)?;
        step_even_rank(&mut b)?;
        step_finish(&mut b)?;
    }
    if !b.cur.is_canonical() {
        return Err(PlanError::Search { stage: "finish", message: format!("ended at {}", b.cur) });
    }
    Ok(Path { start, end: b.cur.clone(), steps: b.steps })
}

/// Step one: twist a rank-zero vector past the dualization threshold and
/// dualize it to positive rank.
fn step_rank_positive(b: &mut Builder) -> Result<(), PlanError> {
    let w = b.prim();
    if !w.v0.is_zero() {
        return Ok(());
    }
    let s = b.cur.surface.clone();
    let (h_new, twist) = if s.rank() == 1 {
        (b.cur.h.clone(), rank_zero_twist(&s, &w, &b.cur.h))
    } else if let Some(found) = search_rank_zero_polarization(&b.cur) {
        found
    } else {
        retarget_rank_zero(b)?;
        let s = b.cur.surface.clone();
        let w = b.prim();
        (b.cur.h.clone(), rank_zero_twist(&s, &w, &b.cur.h))
    };
    if h_new != b.cur.h {
        b.push("rank-positive", Move::ChangePolarization { h_new })?;
    }
    b.push("rank-positive", Move::TensorPowerOfH { d: twist })?;
    b.push("rank-positive", Move::FmDualRank0)?;
    b.push("rank-positive", Move::CanonicalizeSign)
}

/// Moves m(0, g·zeta, a) on a Picard rank two lattice to m(0, g·h, a) on
/// rank1(kind, zeta²/2), where every polarization is generic.
fn retarget_rank_zero(b: &mut Builder) -> Result<(), PlanError> {
    let w = b.prim();
    let g = w.v1.content();
    let zeta = w.v1.div_exact(&g);
    let l = b.cur.surface.square(&zeta) / 2;
    let surface = SurfaceClass::rank1_big(b.cur.kind(), &l).map_err(|err| PlanError::Search {
        stage: "rank-positive",
        message: format!("rank-one lattice with l = {l}: {err}"),
    })?;
    let v = MukaiVector::new(Int::zero(), DivisorClass::new(vec![g]), w.v2.clone()).scale(&b.cur.m);
    b.push("rank-positive", Move::RetargetLattice { surface, v, h: DivisorClass::from_i64s(&[1]) })
}

/// Minimal twist s >= 1 with a + s(xi·H) above max(M_d, 0).
fn rank_zero_twist(s: &SurfaceClass, w: &MukaiVector, h: &DivisorClass) -> Int {
    let d = s.dot(&w.v1, h);
    let need = threshold_md(s, h, &d).min_passing();
    div_ceil(&(need - &w.v2), &d).max(int(1))
}

/// Polarization in the current chamber for which the minimal twist makes the
/// dual vector generic, scanning shells of growing max(|x|, |y|).
fn search_rank_zero_polarization(t: &Triple) -> Option<(DivisorClass, Int)> {
    let s = &t.surface;
    let (m, w) = primitive_decomposition(&t.v).ok()?;
    let sq = square(s, &t.v).ok()?;
    let min_bound = bound_from(s.kind(), &m, &sq);
    for radius in 1..=POLARIZATION_SEARCH_RADIUS {
        for x in -radius..=radius {
            for y in -radius..=radius {
                if x.abs().max(y.abs()) != radius {
                    continue;
                }
                let h = DivisorClass::from_i64s(&[x, y]);
                if !is_primitive(&h) || !s.is_ample(&h) {
                    continue;
                }
                let d0 = s.orthogonal_generator(&h).ok()?;
                let d0sq = crate::arith::rat(&s.square(&d0));
                if d0sq >= -min_bound.clone() {
                    continue;
                }
                let twist = rank_zero_twist(s, &w, &h);
                let a_s = &w.v2 + &twist * s.dot(&w.v1, &h);
                let dual_bound = bound_from(s.kind(), &(&m * &a_s), &sq);
                if d0sq >= -dual_bound {
                    continue;
                }
                if h != t.h && !same_chamber(s, &t.v, &t.h, &h).ok()? {
                    continue;
                }
                return Some((h, twist));
            }
        }
    }
    None
}

/// Step two: make the rank coprime to the class on a rank-one lattice.
fn step_coprime(b: &mut Builder) -> Result<(), PlanError> {
    let w = b.prim();
    let r = w.v0.clone();
    let g = gcd(&r, &w.v1.content());
    if g.is_one() {
        return Ok(());
    }
    let kind = b.cur.kind();
    let m = b.cur.m.clone();
    let k = b.cur.k.clone();
    let zeta = w.v1.div_exact(&g);
    let e = b.cur.surface.square(&zeta) / 2;
    let shift = div_ceil(&(int(1) - &e), &r);
    let l = &e + &r * &shift;
    let a = &w.v2 + &g * &g * &shift;
    let target = SurfaceClass::rank1_big(kind, &l).map_err(|err| PlanError::Search {
        stage: "coprime",
        message: format!("rank-one lattice with l = {l}: {err}"),
    })?;
    let h = DivisorClass::from_i64s(&[1]);
    let v = MukaiVector::new(r.clone(), DivisorClass::new(vec![g.clone()]), a.clone()).scale(&m);
    let retarget = Move::RetargetLattice { surface: target, v, h };
    if !matches!(&retarget, Move::RetargetLattice { surface, v, h } if *surface == b.cur.surface && *v == b.cur.v && *h == b.cur.h)
    {
        b.push("coprime", retarget)?;
    }
    let gate = int(32) * &r * &r * &r * &k;
    let big_n = div_floor(&(gate - &g), &r);
    let s = find_coprime_twist(&r, &g, &a, &l, &big_n)?;
    b.push("coprime", Move::TensorPowerOfH { d: s })?;
    b.push("coprime", Move::fm_dual_for(kind))?;
    b.push("coprime", Move::CanonicalizeSign)
}

/// Step three: move to rank1(kind, k) with class h and twist to a rank in 2kZ.
fn step_even_rank(b: &mut Builder) -> Result<(), PlanError> {
    let w = b.prim();
    let r = w.v0.clone();
    let k = b.cur.k.clone();
    let two_k = int(2) * &k;
    if r.is_multiple_of(&two_k) {
        return Ok(());
    }
    let kind = b.cur.kind();
    let m = b.cur.m.clone();
    let target = rank1_target(kind, &k, MukaiVector::new(r.clone(), DivisorClass::from_i64s(&[1]), Int::zero()).scale(&m))?;
    let certs = connect_via_elliptic(&b.cur, &target)
        .map_err(|error| PlanError::Step { index: b.steps.len(), stage: "even-rank", error })?;
    b.extend(certs);
    let gate = int(32) * &r * &r * &r * &k;
    let big_n = div_floor(&(gate - int(1)), &r);
    let s = find_even_twist(&r, &k, &big_n)?;
    b.push("even-rank", Move::TensorPowerOfH { d: s })?;
    b.push("even-rank", Move::fm_dual_for(kind))
}

fn rank1_target(kind: crate::lattice::SurfaceKind, k: &Int, v: MukaiVector) -> Result<Triple, PlanError> {
    let surface = SurfaceClass::rank1_big(kind, k)
        .map_err(|err| PlanError::Search { stage: "target", message: err.to_string() })?;
    Ok(Triple::unchecked(surface, v, DivisorClass::from_i64s(&[1])))
}

/// Step four: dualize m(2kp, h, 0) to m(0, h, 2kp) and untwist by -pH.
fn step_finish(b: &mut Builder) -> Result<(), PlanError> {
    let w = b.prim();
    let k = b.cur.k.clone();
    let two_k = int(2) * &k;
    let p = w.v0.div_floor(&two_k);
    let kind = b.cur.kind();
    let m = b.cur.m.clone();
    let target = rank1_target(kind, &k, MukaiVector::new(&two_k * &p, DivisorClass::from_i64s(&[1]), Int::zero()).scale(&m))?;
    if b.cur != target {
        b.push(
            "finish",
            Move::RetargetLattice { surface: target.surface.clone(), v: target.v.clone(), h: target.h.clone() },
        )?;
    }
    b.push("finish", Move::FmDualRank0)?;
    b.push("finish", Move::CanonicalizeSign)?;
    b.push("finish", Move::TensorPowerOfH { d: -p })
}

/// (m, k, v²) at one node of a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerEntry {
    pub m: Int,
    pub k: Int,
    pub square: Int,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub index: usize,
    pub mv: String,
    pub ok: bool,
    pub issues: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub steps: Vec<StepReport>,
    pub ledger: Vec<LedgerEntry>,
    pub assumptions: Vec<String>,
    pub issues: Vec<String>,
    pub end_canonical: bool,
    pub all_ok: bool,
}

impl Report {
    /// First failing step, if any.
    pub fn first_failure(&self) -> Option<&StepReport> {
        self.steps.iter().find(|s| !s.ok)
    }

    /// True when m, 2k and 2m²k agree at every node.
    pub fn ledger_constant(&self) -> bool {
        self.ledger.windows(2).all(|w| w[0] == w[1])
            && self.ledger.iter().all(|e| e.square == int(2) * &e.m * &e.m * &e.k)
    }
}

impl ToJson for Report {
    fn to_json(&self) -> Value {
        json!({
            "all_ok": self.all_ok,
            "end_canonical": self.end_canonical,
            "issues": self.issues,
            "steps": self.steps.iter().map(|s| json!({
                "index": s.index, "move": s.mv, "ok": s.ok, "issues": s.issues,
            })).collect::<Vec<_>>(),
            "ledger": self.ledger.iter().map(|e| json!({
                "m": int_json(&e.m), "k": int_json(&e.k), "square": int_json(&e.square),
            })).collect::<Vec<_>>(),
            "assumptions": self.assumptions,
        })
    }
}

fn ledger_entry(t: &Triple) -> LedgerEntry {
    let square = square(&t.surface, &t.v).unwrap_or_default();
    LedgerEntry { m: t.m.clone(), k: t.k.clone(), square }
}

/// Replays every step with fresh checks.
pub fn verify_path(p: &Path) -> Report {
    let mut issues = Vec::new();
    if let Err(e) = p.start.validate() {
        issues.push(format!("start invalid: {e}"));
    }
    let mut steps = Vec::new();
    let mut ledger = vec![ledger_entry(&p.start)];
    let mut prev = p.start.clone();
    for (index, step) in p.steps.iter().enumerate() {
        let mut step_issues = Vec::new();
        if step.input != prev {
            step_issues.push("chain mismatch: input differs from the previous output".to_string());
        }
        for c in step.checks.iter().filter(|c| !c.ok) {
            step_issues.push(format!("recorded check `{}` failed", c.name));
        }
        match apply(&step.input, &step.mv) {
            Ok(cert) => {
                if cert.output != step.output {
                    step_issues.push("chain mismatch: replayed output differs from the recorded output".to_string());
                }
            }
            Err(e) => step_issues.push(format!("{}: {}", e.check, e.message)),
        }
        ledger.push(ledger_entry(&step.output));
        steps.push(StepReport { index, mv: step.mv.type_name().to_string(), ok: step_issues.is_empty(), issues: step_issues });
        prev = step.output.clone();
    }
    if p.end != prev {
        issues.push("end mismatch: end triple differs from the last output".to_string());
    }
    let report_ledger_ok = ledger.windows(2).all(|w| w[0] == w[1]);
    if !report_ledger_ok {
        issues.push("ledger drift: (m, k, square) changes along the path".to_string());
    }
    let all_ok = issues.is_empty() && steps.iter().all(|s| s.ok);
    Report {
        steps,
        ledger,
        assumptions: p.assumptions(),
        issues,
        end_canonical: p.end.is_canonical(),
        all_ok,
    }
}

/// Convenience for callers holding a possibly-invalid triple.
pub fn sign_canonical(t: &Triple) -> MukaiVector {
    canonicalize_sign(&t.surface, &t.v)
}
