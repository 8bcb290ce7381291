//! `mukai`: batch front end for Mukai lattice computations, wall checks,
//! certified moves, reduction paths and the numeric oracles.

mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mukai_core::arith::int;
use mukai_core::json::{int_json, rat_json, to_pretty, ToJson};
use mukai_core::lattice::{DivisorClass, SurfaceKind};
use mukai_core::moves::{apply, Move};
use mukai_core::mukai::{bound_from, is_mukai_vector, moduli_dims, pairing, primitive_decomposition, square, MukaiVector, Triple};
use mukai_core::oracles::{classify, sweep_numeri_with, ClassificationReport, Gate, SweepBounds, DEFAULT_KEEP};
use mukai_core::par::{configure_workers, Exec};
use mukai_core::planner::{
    find_coprime_twist_traced, find_even_twist, reduce_to_canonical, twisted_pair, verify_path, Path,
};
use mukai_core::walls::{fiber_coefficient, is_generic, is_suitable, same_chamber, walls_between, Suitability, Wall};
use mukai_core::{Int, SurfaceClass};

use input::{load, load_surface, InputError};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_FAILED: u8 = 2;
const EXIT_COUNTEREXAMPLES: u8 = 3;

#[derive(Parser)]
#[command(name = "mukai", version, about = "Mukai lattices, walls, certified moves and reduction paths")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    K3,
    Abelian,
}

impl From<KindArg> for SurfaceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::K3 => SurfaceKind::K3,
            KindArg::Abelian => SurfaceKind::Abelian,
        }
    }
}

#[derive(Args)]
struct SurfaceVec {
    /// Preset name (rank1-k3-l<N>, rank1-ab-l<N>, elliptic-k3, elliptic-ab), inline TOML or a TOML file
    #[arg(long)]
    surface: String,
    /// Mukai vector as JSON ([v0, [..], v2] or {"v0","v1","v2"}) or a JSON file
    #[arg(long)]
    v: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mukai pairing of two vectors
    Pair {
        #[command(flatten)]
        sv: SurfaceVec,
        #[arg(long)]
        w: String,
    },
    /// Square, (m,k) and discriminant bound of a vector
    Square {
        #[command(flatten)]
        sv: SurfaceVec,
    },
    /// Dimensions of M_v and K_v, from (kind, m, k) or from a surface and vector
    Dims {
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long)]
        surface: Option<String>,
        #[arg(long)]
        v: Option<String>,
    },
    /// Whether a polarization avoids every wall of v
    Generic {
        #[command(flatten)]
        sv: SurfaceVec,
        #[arg(long = "H")]
        h: String,
    },
    /// Walls of v crossing the segment [H1, H2]
    Walls {
        #[command(flatten)]
        sv: SurfaceVec,
        #[arg(long = "H1")]
        h1: String,
        #[arg(long = "H2")]
        h2: String,
    },
    /// Suitability of sigma + t f for v on an elliptic preset
    Suitable {
        #[command(flatten)]
        sv: SurfaceVec,
        #[arg(long = "H")]
        h: String,
    },
    /// Whether two polarizations lie in the same v-chamber
    Chamber {
        #[command(flatten)]
        sv: SurfaceVec,
        #[arg(long = "H1")]
        h1: String,
        #[arg(long = "H2")]
        h2: String,
    },
    /// Apply one move to a triple and print its certificate
    Move {
        #[arg(long)]
        triple: String,
        /// Move as JSON, e.g. {"type":"TensorPowerOfH","d":2}, or a JSON file
        #[arg(long = "apply")]
        mv: String,
    },
    /// Build the certified path from a triple to its canonical triple
    Reduce {
        #[arg(long)]
        triple: String,
        /// Write the path JSON here instead of standard output
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Replay a path file with fresh checks
    Verify {
        #[arg(long)]
        path: String,
    },
    /// Exhaustive check of the slope inequality behind the FM threshold
    SweepNumeri {
        #[arg(long)]
        rmax: u64,
        #[arg(long)]
        kmax: u64,
        #[arg(long)]
        lmax: u64,
        #[arg(long)]
        nmax: u64,
        /// Only require n > 0 instead of n > 32r³k (diagnostic, never fails)
        #[arg(long)]
        weak: bool,
        /// Run on the calling thread only
        #[arg(long)]
        sequential: bool,
        /// Maximum number of counterexamples to print
        #[arg(long, default_value_t = DEFAULT_KEEP)]
        keep: usize,
    },
    /// Minimal twist s > N making n_s and a_s coprime (or the even variant)
    Twist {
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        l: Option<String>,
        /// k for the even variant
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
        #[arg(long = "N", allow_hyphen_values = true)]
        big_n: String,
        /// Search s in 2kZ with n = 1, a = 0, l = k
        #[arg(long)]
        even: bool,
    },
    /// Classification facts for the moduli space of (kind, m, k)
    Classify {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
    },
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Usage(e.0)
    }
}

/// Output of a subcommand in both renderings.
struct Reply {
    json: Value,
    text: String,
    code: u8,
}

impl Reply {
    fn ok(json: Value, text: String) -> Self {
        Reply { json, text, code: EXIT_OK }
    }
}

fn failed(e: impl std::fmt::Display) -> Failure {
    Failure::Failed(e.to_string())
}

fn parse_int(s: &str, what: &str) -> Result<Int, Failure> {
    s.trim().parse::<Int>().map_err(|_| Failure::Usage(format!("{what}: `{s}` is not an integer")))
}

fn class_arg(s: &SurfaceClass, arg: &str, what: &str) -> Result<DivisorClass, Failure> {
    let d: DivisorClass = load(arg, what)?;
    s.check_len(&d).map_err(|e| Failure::Usage(format!("{what}: {e}")))?;
    Ok(d)
}

fn surface_vec(sv: &SurfaceVec) -> Result<(SurfaceClass, MukaiVector), Failure> {
    let s = load_surface(&sv.surface)?;
    let v: MukaiVector = load(&sv.v, "v")?;
    s.check_len(&v.v1).map_err(|e| Failure::Usage(format!("v: {e}")))?;
    Ok((s, v))
}

fn triple_arg(arg: &str) -> Result<Triple, Failure> {
    Ok(load(arg, "triple")?)
}

fn wall_text(w: &Wall) -> String {
    format!("D = {}  D^2 = {}", w.d, w.dsq)
}

fn rows(pairs: &[(&str, String)]) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    pairs.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn run(cli: &Cli) -> Result<Reply, Failure> {
    match &cli.cmd {
        Cmd::Pair { sv, w } => {
            let (s, v) = surface_vec(sv)?;
            let w: MukaiVector = load(w, "w")?;
            s.check_len(&w.v1).map_err(|e| Failure::Usage(format!("w: {e}")))?;
            let p = pairing(&s, &v, &w).map_err(failed)?;
            Ok(Reply::ok(json!({ "pairing": int_json(&p) }), format!("pairing  {p}\n")))
        }
        Cmd::Square { sv } => {
            let (s, v) = surface_vec(sv)?;
            let sq = square(&s, &v).map_err(failed)?;
            let (m, w) = primitive_decomposition(&v).map_err(failed)?;
            let k = square(&s, &w).map_err(failed)? / 2;
            let b = bound_from(s.kind(), &v.v0, &sq);
            let mukai = is_mukai_vector(&s, &v);
            let json = json!({
                "square": int_json(&sq), "m": int_json(&m), "k": int_json(&k),
                "bound": rat_json(&b), "mukai_vector": mukai,
            });
            let text = rows(&[
                ("square", sq.to_string()),
                ("m", m.to_string()),
                ("k", k.to_string()),
                ("bound", b.to_string()),
                ("mukai vector", mukai.to_string()),
            ]);
            Ok(Reply::ok(json, text))
        }
        Cmd::Dims { kind, m, k, surface, v } => {
            let (kind, m, k) = match (kind, m, k, surface, v) {
                (Some(kind), Some(m), Some(k), None, None) => ((*kind).into(), parse_int(m, "m")?, parse_int(k, "k")?),
                (None, None, None, Some(surface), Some(v)) => {
                    let (s, v) = surface_vec(&SurfaceVec { surface: surface.clone(), v: v.clone() })?;
                    let (m, w) = primitive_decomposition(&v).map_err(failed)?;
                    let k = square(&s, &w).map_err(failed)? / 2;
                    (s.kind(), m, k)
                }
                _ => return Err(Failure::Usage("dims takes either --kind --m --k or --surface --v".into())),
            };
            if m < int(1) || k < int(1) {
                return Err(Failure::Failed(format!("(m,k) = ({m},{k}) is not an (m,k) pair with m, k >= 1")));
            }
            let (dm, dk) = moduli_dims(&m, &k, kind);
            let json = json!({
                "kind": kind.as_str(), "m": int_json(&m), "k": int_json(&k),
                "dim_M": int_json(&dm), "dim_K": dk.as_ref().map(int_json),
            });
            let mut pairs = vec![("kind", kind.as_str().to_string()), ("m", m.to_string()), ("k", k.to_string())];
            pairs.push(("dim M_v", dm.to_string()));
            if let Some(dk) = dk {
                pairs.push(("dim K_v", dk.to_string()));
            }
            Ok(Reply::ok(json, rows(&pairs)))
        }
        Cmd::Generic { sv, h } => {
            let (s, v) = surface_vec(sv)?;
            let h = class_arg(&s, h, "H")?;
            let g = is_generic(&s, &v, &h).map_err(failed)?;
            let witness = g.witness();
            let json = json!({ "generic": g.is_generic(), "witness": witness.map(ToJson::to_json) });
            let mut text = format!("generic  {}\n", g.is_generic());
            if let Some(w) = witness {
                text.push_str(&format!("witness  {}\n", wall_text(w)));
            }
            Ok(Reply::ok(json, text))
        }
        Cmd::Walls { sv, h1, h2 } => {
            let (s, v) = surface_vec(sv)?;
            let (h1, h2) = (class_arg(&s, h1, "H1")?, class_arg(&s, h2, "H2")?);
            let walls = walls_between(&s, &v, &h1, &h2).map_err(failed)?;
            let json = json!({ "walls": walls.iter().map(ToJson::to_json).collect::<Vec<_>>() });
            let mut text = format!("{} walls\n", walls.len());
            for w in &walls {
                text.push_str(&format!("  {}\n", wall_text(w)));
            }
            Ok(Reply::ok(json, text))
        }
        Cmd::Suitable { sv, h } => {
            let (s, v) = surface_vec(sv)?;
            let h = class_arg(&s, h, "H")?;
            let res = is_suitable(&s, &v, &h).map_err(failed)?;
            let t = fiber_coefficient(&s, &h).map_err(failed)?;
            let b = bound_from(s.kind(), &v.v0, &square(&s, &v).map_err(failed)?);
            let suitable = res == Suitability::Suitable;
            let json = json!({ "suitable": suitable, "t": int_json(&t), "bound": rat_json(&b) });
            let verdict = if suitable { "true" } else { "unknown (t below the certified bound)" };
            Ok(Reply::ok(json, rows(&[("suitable", verdict.into()), ("t", t.to_string()), ("bound", b.to_string())])))
        }
        Cmd::Chamber { sv, h1, h2 } => {
            let (s, v) = surface_vec(sv)?;
            let (h1, h2) = (class_arg(&s, h1, "H1")?, class_arg(&s, h2, "H2")?);
            let same = same_chamber(&s, &v, &h1, &h2).map_err(failed)?;
            let walls = if s.rank() == 2 { walls_between(&s, &v, &h1, &h2).map_err(failed)? } else { Vec::new() };
            let json = json!({ "same_chamber": same, "walls": walls.iter().map(ToJson::to_json).collect::<Vec<_>>() });
            Ok(Reply::ok(json, format!("same chamber  {same}\nwalls crossed {}\n", walls.len())))
        }
        Cmd::Move { triple, mv } => {
            let t = triple_arg(triple)?;
            let mv: Move = load(mv, "move")?;
            match apply(&t, &mv) {
                Ok(cert) => {
                    let mut text = format!("{}\n  {}\n  -> {}\n", cert.mv, cert.input, cert.output);
                    for c in &cert.checks {
                        text.push_str(&format!("  [{}] {}\n", if c.ok { "ok" } else { "FAIL" }, c.name));
                    }
                    for a in &cert.assumptions {
                        text.push_str(&format!("  assumes {a}\n"));
                    }
                    Ok(Reply::ok(cert.to_json(), text))
                }
                Err(e) => {
                    let json = json!({ "error": { "check": e.check, "message": e.message, "witness": e.witness } });
                    Ok(Reply { json, text: format!("move rejected: {e}\n"), code: EXIT_FAILED })
                }
            }
        }
        Cmd::Reduce { triple, out } => {
            let t = triple_arg(triple)?;
            let p = reduce_to_canonical(&t).map_err(failed)?;
            let doc = p.to_json();
            let mut text = format!("{} steps from {}\n", p.len(), p.start);
            for (i, c) in p.steps.iter().enumerate() {
                text.push_str(&format!("  {i:>3}  {}\n", c.mv));
            }
            text.push_str(&format!("end {}\n", p.end));
            if let Some(path) = out {
                std::fs::write(path, to_pretty(&doc) + "\n")
                    .map_err(|e| Failure::Usage(format!("cannot write `{}`: {e}", path.display())))?;
                let json = json!({ "steps": p.len(), "end": p.end.to_json(), "written": path.display().to_string() });
                text.push_str(&format!("written to {}\n", path.display()));
                return Ok(Reply::ok(json, text));
            }
            Ok(Reply::ok(doc, text))
        }
        Cmd::Verify { path } => {
            let p: Path = load(path, "path")?;
            let report = verify_path(&p);
            let mut text = String::new();
            for s in &report.steps {
                text.push_str(&format!("  {:>3}  {:<18} {}\n", s.index, s.mv, if s.ok { "ok" } else { "FAILED" }));
                for issue in &s.issues {
                    text.push_str(&format!("         {issue}\n"));
                }
            }
            for issue in &report.issues {
                text.push_str(&format!("  {issue}\n"));
            }
            for a in &report.assumptions {
                text.push_str(&format!("  assumes {a}\n"));
            }
            match report.first_failure() {
                None if report.all_ok => text.push_str(&format!("verified: {} steps\n", report.steps.len())),
                Some(f) => text.push_str(&format!("verification failed at step {}\n", f.index)),
                None => text.push_str("verification failed\n"),
            }
            let code = if report.all_ok { EXIT_OK } else { EXIT_FAILED };
            Ok(Reply { json: report.to_json(), text, code })
        }
        Cmd::SweepNumeri { rmax, kmax, lmax, nmax, weak, sequential, keep } => {
            let b = SweepBounds::new(*rmax, *kmax, *lmax, *nmax).map_err(|e| Failure::Usage(e.to_string()))?;
            let gate = if *weak { Gate::Weak } else { Gate::Certified };
            let exec = if *sequential { Exec::Sequential } else { Exec::Parallel };
            let workers = if exec.is_parallel() { configure_workers() } else { 1 };
            eprintln!("sweeping r<={rmax} k<={kmax} l<={lmax} n<={nmax} on {workers} worker(s)");
            let start = std::time::Instant::now();
            let res = sweep_numeri_with(exec, &b, gate, *keep);
            eprintln!("done in {:.2?}", start.elapsed());
            let mut text = rows(&[
                ("gate", if *weak { "n > 0 (diagnostic)".into() } else { "n > 32r^3k".to_string() }),
                ("outer tuples", res.outer_cases.to_string()),
                ("candidates", res.candidates.to_string()),
            ]);
            text.push_str(&format!("{} counterexamples\n", res.violations));
            for t in &res.counterexamples {
                text.push_str(&format!(
                    "  k={} l={} r={} n={} a={} n1={} a1={} r1={}\n",
                    t.k, t.l, t.r, t.n, t.a, t.n1, t.a1, t.r1
                ));
            }
            if res.truncated {
                text.push_str(&format!("  (first {keep} shown)\n"));
            }
            let code = if res.violations > 0 && !*weak { EXIT_COUNTEREXAMPLES } else { EXIT_OK };
            Ok(Reply { json: res.to_json(), text, code })
        }
        Cmd::Twist { r, n, a, l, k, big_n, even } => {
            let r = parse_int(r, "r")?;
            let big_n = parse_int(big_n, "N")?;
            if *even {
                let k = parse_int(k.as_deref().ok_or_else(|| Failure::Usage("--even needs --k".into()))?, "k")?;
                let s = find_even_twist(&r, &k, &big_n).map_err(failed)?;
                let (ns, as_) = twisted_pair(&r, &int(1), &int(0), &k, &s);
                let json = json!({ "s": int_json(&s), "n_s": int_json(&ns), "a_s": int_json(&as_) });
                return Ok(Reply::ok(json, rows(&[("s", s.to_string()), ("n_s", ns.to_string()), ("a_s", as_.to_string())])));
            }
            let need = |x: &Option<String>, name: &str| -> Result<Int, Failure> {
                parse_int(x.as_deref().ok_or_else(|| Failure::Usage(format!("coprime twist needs --{name}")))?, name)
            };
            let (n, a, l) = (need(n, "n")?, need(a, "a")?, need(l, "l")?);
            let tr = find_coprime_twist_traced(&r, &n, &a, &l, &big_n).map_err(failed)?;
            let (ns, as_) = twisted_pair(&r, &n, &a, &l, &tr.s);
            let rejected: Vec<Value> =
                tr.rejected.iter().map(|(s, g)| json!({ "s": int_json(s), "gcd": int_json(g) })).collect();
            let json = json!({ "s": int_json(&tr.s), "n_s": int_json(&ns), "a_s": int_json(&as_), "rejected": rejected });
            let mut text = rows(&[("s", tr.s.to_string()), ("n_s", ns.to_string()), ("a_s", as_.to_string())]);
            for (s, g) in &tr.rejected {
                text.push_str(&format!("  rejected s={s} gcd={g}\n"));
            }
            Ok(Reply::ok(json, text))
        }
        Cmd::Classify { kind, m, k } => {
            let rep = classify((*kind).into(), &parse_int(m, "m")?, &parse_int(k, "k")?).map_err(failed)?;
            Ok(Reply::ok(rep.to_json(), classification_text(&rep)))
        }
    }
}

fn classification_text(r: &ClassificationReport) -> String {
    let opt = |x: &Option<Int>| x.as_ref().map_or("-".to_string(), Int::to_string);
    let classes: Vec<&str> = r.variety_class.iter().map(|c| c.as_str()).collect();
    let mut pairs = vec![
        ("kind", r.kind.as_str().to_string()),
        ("(m,k)", format!("({},{})", r.m, r.k)),
        ("subject", r.subject.to_string()),
        ("dim M_v", opt(&r.dim_m)),
        ("dim K_v", opt(&r.dim_k)),
        ("class", classes.join(", ")),
        ("deformation", r.deformation_label.clone()),
        ("smooth", r.smooth.to_string()),
        ("symplectic resolution", r.has_symplectic_resolution.to_string()),
        ("terminal singularities", r.terminal_singularities.to_string()),
        ("pi1", r.pi1.as_str().to_string()),
        ("pi1 of smooth locus", r.pi1_smooth_locus.as_str().to_string()),
        ("b2", r.b2.map_or("unknown".into(), |b| format!("{b} ({})", r.b2_of.unwrap_or("-")))),
    ];
    if let Some((p, q)) = r.beauville_signature {
        pairs.push(("signature", format!("({p},{q})")));
    }
    let mut text = rows(&pairs);
    for n in &r.notes {
        text.push_str(&format!("note  {n}\n"));
    }
    text
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_workers();
    match run(&cli) {
        Ok(reply) => {
            match cli.format {
                Format::Json => println!("{}", to_pretty(&reply.json)),
                Format::Text => print!("{}", reply.text),
            }
            ExitCode::from(reply.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
