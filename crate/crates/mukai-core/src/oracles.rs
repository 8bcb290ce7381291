//! Brute-force verifiers for the slope inequality behind the FM threshold,
//! closed-form dimension counts, and the classification table of moduli
//! spaces attached to (m,k).

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{int, Int};
use crate::json::{int_json, ToJson};
use crate::lattice::SurfaceKind;
use crate::par::{map_collect, Exec};

/// Largest value accepted for any sweep bound; keeps every product in i128.
pub const SWEEP_BOUND_LIMIT: u64 = 1 << 16;

/// Default cap on the number of stored counterexamples.
pub const DEFAULT_KEEP: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("sweep bound `{0}` must lie in 1..={SWEEP_BOUND_LIMIT}")]
    BadBound(&'static str),
    #[error("p = {p} outside 0..={top}")]
    DegreeOutOfRange { p: i64, top: Int },
    #[error("m and k must be positive")]
    NonPositive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepBounds {
    pub r_max: u64,
    pub k_max: u64,
    pub l_max: u64,
    pub n_max: u64,
}

impl SweepBounds {
    pub fn new(r_max: u64, k_max: u64, l_max: u64, n_max: u64) -> Result<Self, OracleError> {
        let b = SweepBounds { r_max, k_max, l_max, n_max };
        for (name, v) in [("r_max", r_max), ("k_max", k_max), ("l_max", l_max), ("n_max", n_max)] {
            if v == 0 || v > SWEEP_BOUND_LIMIT {
                return Err(OracleError::BadBound(name));
            }
        }
        Ok(b)
    }
}

/// Which lower bound on n admits an outer tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Gate {
    /// n > 32r³k
    #[default]
    Certified,
    /// n > 0; diagnostic only
    Weak,
}

impl Gate {
    fn admits(self, r: i128, k: i128, n: i128) -> bool {
        match self {
            Gate::Certified => n > 32 * r * r * r * k,
            Gate::Weak => n > 0,
        }
    }
}

/// One tuple (k,l,r,n,a,n1,a1,r1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NumeriTuple {
    pub k: i128,
    pub l: i128,
    pub r: i128,
    pub n: i128,
    pub a: i128,
    pub n1: i128,
    pub a1: i128,
    pub r1: i128,
}

impl NumeriTuple {
    /// ln²-ra = k, ln1²-r1a1 >= -1, a1 < a and n1/a1 below n/a (ties broken by r1/a1 > r/a).
    pub fn satisfies_hypotheses(&self) -> bool {
        let t = self;
        let all_pos = [t.k, t.l, t.r, t.n, t.a, t.n1, t.a1, t.r1].iter().all(|&x| x > 0);
        let slope = t.n1 * t.a < t.n * t.a1 || (t.n1 * t.a == t.n * t.a1 && t.r1 * t.a > t.r * t.a1);
        all_pos && t.l * t.n * t.n - t.r * t.a == t.k && t.l * t.n1 * t.n1 - t.r1 * t.a1 >= -1 && t.a1 < t.a && slope
    }

    /// n1/r1 > n/r, or equal slopes with a1/r1 > a/r.
    pub fn satisfies_conclusion(&self) -> bool {
        let t = self;
        t.n1 * t.r > t.n * t.r1 || (t.n1 * t.r == t.n * t.r1 && t.a1 * t.r > t.a * t.r1)
    }
}

impl ToJson for NumeriTuple {
    fn to_json(&self) -> Value {
        let f = |x: i128| int_json(&Int::from(x));
        json!({
            "k": f(self.k), "l": f(self.l), "r": f(self.r), "n": f(self.n),
            "a": f(self.a), "n1": f(self.n1), "a1": f(self.a1), "r1": f(self.r1),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SweepResult {
    /// Outer tuples (k,l,r,n,a) passing the gate with integral positive a.
    pub outer_cases: u64,
    /// Full tuples satisfying every hypothesis.
    pub candidates: u128,
    /// Full tuples violating the conclusion.
    pub violations: u128,
    /// Stored violations, in tuple order, at most `keep` of them.
    pub counterexamples: Vec<NumeriTuple>,
    pub truncated: bool,
}

impl ToJson for SweepResult {
    fn to_json(&self) -> Value {
        json!({
            "outer_cases": self.outer_cases,
            "candidates": int_json(&Int::from(self.candidates)),
            "violations": int_json(&Int::from(self.violations)),
            "truncated": self.truncated,
            "counterexamples": self.counterexamples.iter().map(ToJson::to_json).collect::<Vec<_>>(),
        })
    }
}

fn div_ceil_pos(a: i128, b: i128) -> i128 {
    (a + b - 1) / b
}

/// Candidate and violation counts for one outer tuple. Loops over n1 and r1;
/// every constraint on a1 is an interval, so a1 is never enumerated except to
/// list violations.
fn sweep_case(k: i128, l: i128, r: i128, n: i128, a: i128, keep: usize) -> SweepResult {
    let mut out = SweepResult { outer_cases: 1, ..Default::default() };
    for n1 in 1..n {
        let a1_lo = div_ceil_pos(n1 * a, n).max(1);
        if a1_lo > a - 1 {
            break;
        }
        let tie = (n1 * a % n == 0).then_some(n1 * a / n);
        let mut r1 = 1i128;
        loop {
            let a1_hi = (a - 1).min((l * n1 * n1 + 1) / r1);
            if a1_hi < a1_lo {
                break;
            }
            let mut lo = a1_lo;
            if let Some(t) = tie {
                if r1 * a <= r * t {
                    lo = t + 1;
                }
            }
            if lo <= a1_hi {
                out.candidates += (a1_hi - lo + 1) as u128;
                let bad_hi = if n1 * r < n * r1 {
                    a1_hi
                } else if n1 * r == n * r1 {
                    a1_hi.min(a * r1 / r)
                } else {
                    lo - 1
                };
                if bad_hi >= lo {
                    out.violations += (bad_hi - lo + 1) as u128;
                    for a1 in lo..=bad_hi {
                        if out.counterexamples.len() >= keep {
                            out.truncated = true;
                            break;
                        }
                        out.counterexamples.push(NumeriTuple { k, l, r, n, a, n1, a1, r1 });
                    }
                }
            }
            r1 += 1;
        }
    }
    out
}

/// Outer tuples (k,l,r,n,a) in lexicographic order.
pub fn outer_cases(b: &SweepBounds, gate: Gate) -> Vec<(i128, i128, i128, i128, i128)> {
    let mut cases = Vec::new();
    for k in 1..=b.k_max as i128 {
        for l in 1..=b.l_max as i128 {
            for r in 1..=b.r_max as i128 {
                for n in 1..=b.n_max as i128 {
                    if !gate.admits(r, k, n) {
                        continue;
                    }
                    let num = l * n * n - k;
                    if num > 0 && num % r == 0 {
                        cases.push((k, l, r, n, num / r));
                    }
                }
            }
        }
    }
    cases
}

/// Every counterexample to the slope inequality within the bounds under the
/// certified gate n > 32r³k.
pub fn sweep_numeri(b: &SweepBounds) -> SweepResult {
    sweep_numeri_with(Exec::Parallel, b, Gate::Certified, DEFAULT_KEEP)
}

pub fn sweep_numeri_with(exec: Exec, b: &SweepBounds, gate: Gate, keep: usize) -> SweepResult {
    let parts = map_collect(exec, outer_cases(b, gate), |(k, l, r, n, a)| sweep_case(k, l, r, n, a, keep));
    let mut total = SweepResult::default();
    for p in parts {
        total.outer_cases += p.outer_cases;
        total.candidates += p.candidates;
        total.violations += p.violations;
        total.truncated |= p.truncated;
        let room = keep.saturating_sub(total.counterexamples.len());
        if p.counterexamples.len() > room {
            total.truncated = true;
        }
        total.counterexamples.extend(p.counterexamples.into_iter().take(room));
    }
    total
}

/// dim |pH| on a surface with H² = 2k.
pub fn dim_linear_system(kind: SurfaceKind, k: &Int, p: &Int) -> Int {
    let kp2 = k * p * p;
    match kind {
        SurfaceKind::K3 => kp2 + 1,
        SurfaceKind::Abelian => kp2 - 1,
    }
}

/// Minimal codimension in |mH| of the locus of reducible curves, as the
/// minimum of 2·m1·m2·k - 1 over m1 + m2 = m. None for m = 1.
pub fn codim_reducible(_kind: SurfaceKind, m: &Int, k: &Int) -> Option<Int> {
    let mut best: Option<Int> = None;
    let mut m1 = int(1);
    while &m1 < m {
        let m2 = m - &m1;
        let c = int(2) * &m1 * &m2 * k - 1;
        if best.as_ref().is_none_or(|b| &c < b) {
            best = Some(c);
        }
        m1 += 1;
    }
    best
}

/// h⁰ of reflexive p-forms: 1 for even p, 0 for odd p, for p up to the
/// dimension of M (K3) or K (Abelian).
pub fn reflexive_form_dims(kind: SurfaceKind, m: &Int, k: &Int, p: i64) -> Result<u32, OracleError> {
    let base = int(2) * m * m * k;
    let top = match kind {
        SurfaceKind::K3 => base + 2,
        SurfaceKind::Abelian => base - 2,
    };
    if p < 0 || int(p) > top {
        return Err(OracleError::DegreeOutOfRange { p, top });
    }
    Ok(u32::from(p % 2 == 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarietyClass {
    Empty,
    Point,
    K3Surface,
    AbelianFourfold,
    SymmetricProduct,
    IHSManifold,
    IrreducibleSymplecticVariety,
    NamikawaNotIrreducible,
}

impl VarietyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VarietyClass::Empty => "Empty",
            VarietyClass::Point => "Point",
            VarietyClass::K3Surface => "K3Surface",
            VarietyClass::AbelianFourfold => "AbelianFourfold",
            VarietyClass::SymmetricProduct => "SymmetricProduct",
            VarietyClass::IHSManifold => "IHSManifold",
            VarietyClass::IrreducibleSymplecticVariety => "IrreducibleSymplecticVariety",
            VarietyClass::NamikawaNotIrreducible => "NamikawaNotIrreducible",
        }
    }
}

/// Fundamental group facts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pi1 {
    Trivial,
    Z2,
    NotApplicable,
}

impl Pi1 {
    pub fn as_str(self) -> &'static str {
        match self {
            Pi1::Trivial => "trivial",
            Pi1::Z2 => "Z/2Z",
            Pi1::NotApplicable => "n/a",
        }
    }
}

/// Facts about M_v (K3) or the Albanese fiber K_v (Abelian) for v = m·w
/// with w² = 2k. `variety_class` lists every class that applies, main one
/// first; `subject` names which space the smoothness, class, b2 and π₁ fields
/// describe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationReport {
    pub kind: SurfaceKind,
    pub m: Int,
    pub k: Int,
    pub subject: &'static str,
    pub dim_m: Option<Int>,
    pub dim_k: Option<Int>,
    pub smooth: bool,
    pub has_symplectic_resolution: bool,
    pub terminal_singularities: bool,
    pub variety_class: Vec<VarietyClass>,
    pub deformation_label: String,
    pub pi1: Pi1,
    pub pi1_smooth_locus: Pi1,
    pub b2: Option<u32>,
    /// Whether b2 refers to the space itself or to its symplectic resolution.
    pub b2_of: Option<&'static str>,
    pub beauville_signature: Option<(u32, u32)>,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    fn base(kind: SurfaceKind, m: &Int, k: &Int) -> Self {
        ClassificationReport {
            kind,
            m: m.clone(),
            k: k.clone(),
            subject: match kind {
                SurfaceKind::K3 => "M_v",
                SurfaceKind::Abelian => "K_v",
            },
            dim_m: None,
            dim_k: None,
            smooth: false,
            has_symplectic_resolution: false,
            terminal_singularities: false,
            variety_class: Vec::new(),
            deformation_label: String::new(),
            pi1: Pi1::NotApplicable,
            pi1_smooth_locus: Pi1::NotApplicable,
            b2: None,
            b2_of: None,
            beauville_signature: None,
            notes: Vec::new(),
        }
    }

    pub fn is(&self, c: VarietyClass) -> bool {
        self.variety_class.contains(&c)
    }

    fn with_b2(mut self, b2: u32, of: &'static str) -> Self {
        self.b2 = Some(b2);
        self.b2_of = Some(of);
        self.beauville_signature = Some((3, b2 - 3));
        self
    }
}

impl ToJson for ClassificationReport {
    fn to_json(&self) -> Value {
        let opt = |x: &Option<Int>| x.as_ref().map(int_json).unwrap_or(Value::Null);
        json!({
            "kind": self.kind.as_str(),
            "m": int_json(&self.m),
            "k": int_json(&self.k),
            "subject": self.subject,
            "dim_M": opt(&self.dim_m),
            "dim_K": opt(&self.dim_k),
            "smooth": self.smooth,
            "has_symplectic_resolution": self.has_symplectic_resolution,
            "terminal_singularities": self.terminal_singularities,
            "variety_class": self.variety_class.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
            "deformation_label": self.deformation_label,
            "pi1": self.pi1.as_str(),
            "pi1_smooth_locus": self.pi1_smooth_locus.as_str(),
            "b2": self.b2,
            "b2_of": self.b2_of,
            "beauville_signature": self.beauville_signature.map(|(a, b)| vec![a, b]),
            "notes": self.notes,
        })
    }
}

/// Classification of the moduli space for (kind, m, k); total for m >= 1.
pub fn classify(kind: SurfaceKind, m: &Int, k: &Int) -> Result<ClassificationReport, OracleError> {
    if m < &Int::one() {
        return Err(OracleError::NonPositive);
    }
    let mut rep = ClassificationReport::base(kind, m, k);
    let m1 = m.is_one();
    let two_one = m == &int(2) && k == &int(1);
    if k < &Int::zero() {
        match kind {
            SurfaceKind::K3 if k == &int(-1) => {
                rep.variety_class = vec![VarietyClass::Point];
                rep.dim_m = Some(Int::zero());
                rep.smooth = true;
                rep.deformation_label = "point".into();
                rep.pi1 = Pi1::Trivial;
                rep.pi1_smooth_locus = Pi1::Trivial;
            }
            _ => {
                rep.variety_class = vec![VarietyClass::Empty];
                rep.deformation_label = "empty".into();
            }
        }
        return Ok(rep);
    }
    if k.is_zero() {
        let label = match kind {
            SurfaceKind::K3 => format!("Sym^{m}(K3)"),
            SurfaceKind::Abelian => format!("Sym^{m}(A)"),
        };
        rep.deformation_label = label;
        rep.dim_m = Some(int(2) * m);
        match kind {
            SurfaceKind::K3 if m1 => {
                rep.variety_class = vec![VarietyClass::K3Surface, VarietyClass::SymmetricProduct, VarietyClass::IHSManifold];
                rep.smooth = true;
                rep.pi1 = Pi1::Trivial;
                rep.pi1_smooth_locus = Pi1::Trivial;
                rep = rep.with_b2(22, "M_v");
            }
            SurfaceKind::K3 => {
                rep.variety_class = vec![VarietyClass::SymmetricProduct, VarietyClass::NamikawaNotIrreducible];
                rep.has_symplectic_resolution = true;
                rep.pi1 = Pi1::Trivial;
                rep.notes.push("resolved by the Hilbert scheme of points".into());
            }
            SurfaceKind::Abelian => {
                rep.dim_k = Some(int(2) * m - 2);
                rep.notes.push("M_v has h^{0,1} != 0 and is not Namikawa symplectic".into());
                if m1 {
                    rep.variety_class = vec![VarietyClass::SymmetricProduct, VarietyClass::Point];
                    rep.smooth = true;
                    rep.pi1 = Pi1::Trivial;
                    rep.pi1_smooth_locus = Pi1::Trivial;
                } else {
                    rep.variety_class = vec![VarietyClass::SymmetricProduct, VarietyClass::NamikawaNotIrreducible];
                    rep.has_symplectic_resolution = true;
                }
            }
        }
        return Ok(rep);
    }
    let (dim_m, dim_k) = crate::mukai::moduli_dims(m, k, kind);
    rep.dim_m = Some(dim_m);
    rep.dim_k = dim_k;
    rep.pi1 = Pi1::Trivial;
    rep.pi1_smooth_locus = Pi1::Trivial;
    match kind {
        SurfaceKind::K3 => {
            if m1 {
                rep.variety_class = vec![VarietyClass::IHSManifold];
                rep.smooth = true;
                rep.deformation_label = format!("Hilb^{}", k + 1);
                rep = rep.with_b2(23, "M_v");
            } else if two_one {
                rep.variety_class = vec![VarietyClass::IrreducibleSymplecticVariety];
                rep.has_symplectic_resolution = true;
                rep.deformation_label = "OG10".into();
                rep = rep.with_b2(24, "resolution");
            } else {
                rep.variety_class = vec![VarietyClass::IrreducibleSymplecticVariety];
                rep.terminal_singularities = true;
                rep.deformation_label = "singular, terminal".into();
                rep.notes.push("b2 unknown".into());
            }
        }
        SurfaceKind::Abelian => {
            rep.notes.push("M_v -> S x S^ is the Albanese morphism; K_v is its fiber".into());
            if m1 && k.is_one() {
                rep.variety_class = vec![VarietyClass::Point, VarietyClass::AbelianFourfold];
                rep.smooth = true;
                rep.deformation_label = "point".into();
                rep.notes.push("M_v is the abelian fourfold S x S^".into());
            } else if m1 && k == &int(2) {
                rep.variety_class = vec![VarietyClass::K3Surface, VarietyClass::IHSManifold];
                rep.smooth = true;
                rep.deformation_label = "K3".into();
                rep = rep.with_b2(22, "K_v");
            } else if m1 {
                rep.variety_class = vec![VarietyClass::IHSManifold];
                rep.smooth = true;
                rep.deformation_label = format!("Kum^{}", k - 1);
                rep = rep.with_b2(7, "K_v");
            } else if two_one {
                rep.variety_class = vec![VarietyClass::IrreducibleSymplecticVariety];
                rep.has_symplectic_resolution = true;
                rep.deformation_label = "OG6".into();
                rep.pi1_smooth_locus = Pi1::Z2;
                rep = rep.with_b2(8, "resolution");
            } else {
                rep.variety_class = vec![VarietyClass::IrreducibleSymplecticVariety];
                rep.terminal_singularities = true;
                rep.deformation_label = "singular, terminal".into();
                rep.notes.push("b2 unknown".into());
            }
        }
    }
    Ok(rep)
}
