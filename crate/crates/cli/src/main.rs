use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use middleconv::convolution::{
    irreducibility_criterion, is_convolution_sheaf, mc_lambda, mc_lambda_rank, middle_convolution,
    predict_infinity_jordan, predict_local_jordan, rank_formula, sl_demo, ConvolutionInput, Irreducibility,
    SheafCondition,
};
use middleconv::fixtures::{self, FixtureKind, FIXTURES};
use middleconv::io::{load_tuple, save_tuple, write_tuple};
use middleconv::k3count::{
    count_affine, default_fibre, frobenius_eigenvalues, intersection_matrix_at, intersection_matrix_det,
    trace_frobenius,
};
use middleconv::linalg::{conjugacy_solve_seeded, CONJUGACY_SEED};
use middleconv::modgroup::{
    absolutely_irreducible, group_closure, o3_recognition, primitivity_bound, reduce_mod, DEFAULT_CAP,
};
use middleconv::{BraidWord, Error, FieldDescriptor, Matrix, MonodromyTuple, Scalar};
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "middleconv", version, about = "Exact middle convolution of monodromy tuples")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Coerce every loaded tuple into this field, e.g. cyclotomic:8.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = CONJUGACY_SEED)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Middle convolution of two tuples.
    Convolve(Pair),
    /// Katz's MC_lambda of a tuple.
    Mcl(TupleLambda),
    /// Rank formula for a convolution.
    Rank(PairIn),
    /// Test the convolution-sheaf conditions.
    CheckConv(One),
    /// Irreducibility criterion for left * (rank one right factor).
    Irred(PairIn),
    /// Jordan data of every entry.
    Jordan(One),
    /// Predicted local Jordan data of a convolution, or of MC_lambda at infinity.
    Predict(PredictArgs),
    /// Braid group action on a tuple.
    Braid(BraidArgs),
    /// Dimensions of H, U and E and the parabolic rank formula.
    Cohomology(One),
    /// Decide simultaneous conjugacy of two tuples.
    Equiv { a: String, b: String },
    /// Reduce a tuple modulo a prime.
    Reduce(ModArgs),
    /// Order of the generated group over a finite field, with O3 recognition in dimension 3.
    Group(GroupArgs),
    /// Primitivity bound for a tuple over a finite field.
    Primitivity(PrimArgs),
    /// Point counts and Frobenius data of the K3 fibre.
    K3 {
        #[command(subcommand)]
        cmd: K3Cmd,
    },
    /// Worked constructions.
    Demo {
        #[command(subcommand)]
        cmd: DemoCmd,
    },
    /// Embedded reference tuples and tables.
    Fixtures {
        #[command(subcommand)]
        cmd: FixtureCmd,
    },
}

#[derive(Args)]
struct One {
    /// Tuple file or fixture:<name>.
    #[arg(long)]
    tuple: String,
}

#[derive(Args)]
struct PairIn {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
}

#[derive(Args)]
struct Pair {
    #[command(flatten)]
    inputs: PairIn,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TupleLambda {
    #[arg(long)]
    tuple: String,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long, conflicts_with = "tuple", requires = "right")]
    left: Option<String>,
    #[arg(long, conflicts_with = "tuple", requires = "left")]
    right: Option<String>,
    #[arg(long, requires = "lambda")]
    tuple: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
}

#[derive(Args)]
struct BraidArgs {
    #[arg(long)]
    tuple: String,
    /// Word such as "b1 b2^-1".
    #[arg(long)]
    word: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModArgs {
    #[arg(long)]
    tuple: String,
    #[arg(long = "mod")]
    ell: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GroupArgs {
    #[arg(long)]
    tuple: String,
    /// Reduce modulo this prime first.
    #[arg(long = "mod")]
    ell: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct PrimArgs {
    #[arg(long)]
    tuple: String,
    #[arg(long = "mod")]
    ell: Option<u64>,
}

#[derive(Subcommand)]
enum K3Cmd {
    /// N(q) on the fibre over z.
    Count(QArgs),
    /// Trace of Frobenius t_q.
    Trace(QArgs),
    /// Frobenius eigenvalue alpha_p.
    Frob {
        #[arg(long)]
        p: u64,
    },
    /// Determinant of the intersection matrix.
    Nsdet {
        /// Evaluate at this rational value instead of printing the polynomial.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
}

#[derive(Args)]
struct QArgs {
    #[arg(long)]
    q: u64,
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
}

#[derive(Subcommand)]
enum DemoCmd {
    /// Tuple whose monodromy group is an SL_n over a finite field after reduction.
    Sl {
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 4)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FixtureCmd {
    List,
    Dump { name: String },
}

enum Failure {
    Domain(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parse() {
            Failure::Usage(format!("{}: {e}", e.name()))
        } else {
            Failure::Domain(e)
        }
    }
}

type Out = Result<(String, Value), Failure>;

struct Ctx {
    field: Option<FieldDescriptor>,
    seed: u64,
}

impl Ctx {
    fn load(&self, spec: &str) -> Result<MonodromyTuple, Failure> {
        let t = match spec.strip_prefix("fixture:") {
            Some(name) => fixtures::tuple(name)?,
            None => load_tuple(spec)?,
        };
        Ok(match self.field {
            Some(f) if f != t.field() => t.coerce_to(f)?,
            _ => t,
        })
    }

    fn input(&self, p: &PairIn) -> Result<ConvolutionInput, Failure> {
        Ok(ConvolutionInput::new(self.load(&p.left)?, self.load(&p.right)?)?)
    }
}

fn tuple_json(t: &MonodromyTuple) -> Value {
    let mats: Vec<Value> = t.entries().iter().map(matrix_json).collect();
    json!({
        "field": t.field().to_string(),
        "dimension": t.dim(),
        "points": t.points().map(|ps| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>()),
        "matrices": mats,
    })
}

fn matrix_json(m: &Matrix) -> Value {
    json!((0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn emit_tuple(t: &MonodromyTuple, out: &Option<PathBuf>, header: String) -> Out {
    let mut text = header;
    match out {
        Some(path) => {
            save_tuple(path, t)?;
            text.push_str(&format!("\nwritten to {}", path.display()));
        }
        None => {
            text.push('\n');
            text.push_str(write_tuple(t).trim_end());
        }
    }
    Ok((text, tuple_json(t)))
}

fn summary(t: &MonodromyTuple) -> String {
    format!("dimension {}, {} finite points, field {}", t.dim(), t.r(), t.field())
}

fn parse_rational(s: &str) -> Result<BigRational, Failure> {
    s.trim().parse().map_err(|_| Failure::Usage(format!("not a rational number: {s:?}")))
}

fn condition_name(c: SheafCondition) -> &'static str {
    match c {
        SheafCondition::Star => "(*)",
        SheafCondition::StarStar => "(**)",
    }
}

fn finite_tuple(ctx: &Ctx, spec: &str, ell: Option<u64>) -> Result<MonodromyTuple, Failure> {
    let t = ctx.load(spec)?;
    match (ell, t.field()) {
        (Some(l), _) => Ok(reduce_mod(&t, l)?),
        (None, FieldDescriptor::Finite(_)) => Ok(t),
        (None, f) => Err(Failure::Usage(format!("tuple lives over {f}; pass --mod <prime>"))),
    }
}

fn run(cli: Cli) -> Out {
    let field = cli.field.as_deref().map(str::parse).transpose()?;
    let ctx = Ctx { field, seed: cli.seed };
    match cli.cmd {
        Cmd::Convolve(a) => {
            let t = middle_convolution(&ctx.input(&a.inputs)?)?;
            emit_tuple(&t, &a.out, summary(&t))
        }
        Cmd::Mcl(a) => {
            let t = ctx.load(&a.tuple)?;
            let lambda = Scalar::parse(&a.lambda, t.field())?;
            let res = mc_lambda(&t, &lambda)?;
            emit_tuple(&res, &a.out, summary(&res))
        }
        Cmd::Rank(a) => {
            let inp = ctx.input(&a)?;
            let rf = rank_formula(&inp)?;
            let text = format!(
                "rank {}\nprecondition {}\ngeneric {}",
                rf.value,
                if rf.precondition_holds { "holds" } else { "fails" },
                inp.is_generic()
            );
            Ok((text, json!({"rank": rf.value, "precondition_holds": rf.precondition_holds, "generic": inp.is_generic()})))
        }
        Cmd::CheckConv(a) => {
            let t = ctx.load(&a.tuple)?;
            let rep = is_convolution_sheaf(&t)?;
            let mut text = if rep.passes() { "convolution sheaf".to_string() } else { "not a convolution sheaf".into() };
            let mut vs = Vec::new();
            for v in &rep.violations {
                text.push_str(&format!("\n  entry {} tau {} fails {}", v.index, v.tau, condition_name(v.condition)));
                vs.push(json!({"index": v.index, "tau": v.tau.to_string(), "condition": condition_name(v.condition)}));
            }
            Ok((text, json!({"convolution_sheaf": rep.passes(), "violations": vs})))
        }
        Cmd::Irred(a) => {
            let left = ctx.load(&a.left)?;
            let right = ctx.load(&a.right)?;
            if right.dim() != 1 {
                return Err(Failure::Domain(Error::Precondition("right factor must have rank one".into())));
            }
            let scalars: Vec<Scalar> = right.entries()[..right.r()].iter().map(|m| m.get(0, 0).clone()).collect();
            let (verdict, value) = irreducibility_criterion(&left, &scalars)?;
            let word = match verdict {
                Irreducibility::Irreducible => "irreducible",
                Irreducibility::Inconclusive => "inconclusive",
            };
            Ok((format!("{word} (criterion value {value})"), json!({"verdict": word, "value": value})))
        }
        Cmd::Jordan(a) => {
            let t = ctx.load(&a.tuple)?;
            let mut lines = Vec::new();
            let mut js = Vec::new();
            for (k, m) in t.entries().iter().enumerate() {
                let jd = m.jordan_data()?;
                let name = if k == t.r() { "inf".to_string() } else { format!("T{}", k + 1) };
                lines.push(format!("{name}: {jd}"));
                js.push(json!({"entry": name, "jordan": jd.to_string()}));
            }
            Ok((lines.join("\n"), json!(js)))
        }
        Cmd::Predict(a) => match (a.left, a.right, a.tuple, a.lambda) {
            (Some(l), Some(r), None, _) => {
                let inp = ctx.input(&PairIn { left: l, right: r })?;
                let preds = predict_local_jordan(&inp)?;
                let lines: Vec<String> = preds.iter().map(|((i, j), jd)| format!("D({i},{j}): {jd}")).collect();
                let js: Vec<Value> =
                    preds.iter().map(|((i, j), jd)| json!({"i": i, "j": j, "jordan": jd.to_string()})).collect();
                Ok((lines.join("\n"), json!(js)))
            }
            (None, None, Some(t), Some(l)) => {
                let t = ctx.load(&t)?;
                let lambda = Scalar::parse(&l, t.field())?;
                let jd = predict_infinity_jordan(&t, &lambda)?;
                let rank = mc_lambda_rank(&t, &lambda);
                Ok((format!("rank {rank}\ninf: {jd}"), json!({"rank": rank, "infinity": jd.to_string()})))
            }
            _ => Err(Failure::Usage("predict needs --left and --right, or --tuple and --lambda".into())),
        },
        Cmd::Braid(a) => {
            let t = ctx.load(&a.tuple)?;
            let w: BraidWord = a.word.parse()?;
            let res = t.braid_act(&w).map_err(|e| match e {
                Error::IndexOutOfRange(_) => Failure::Usage(format!("{}: {e}", e.name())),
                other => Failure::from(other),
            })?;
            emit_tuple(&res, &a.out, format!("word {w}"))
        }
        Cmd::Cohomology(a) => {
            let t = ctx.load(&a.tuple)?;
            let sp = t.cohomology_spaces()?;
            let (h, u, e) = sp.dims();
            let (formula, pre) = t.parabolic_rank_formula();
            let text = format!(
                "dim H {h}\ndim U {u}\ndim E {e}\nH1 {}\nparabolic {}\nformula {formula} (precondition {})",
                sp.h1_dim(),
                sp.parabolic_dim(),
                if pre { "holds" } else { "fails" }
            );
            Ok((
                text,
                json!({"h": h, "u": u, "e": e, "h1": sp.h1_dim(), "parabolic": sp.parabolic_dim(),
                       "formula": formula, "precondition_holds": pre}),
            ))
        }
        Cmd::Equiv { a, b } => {
            let ta = ctx.load(&a)?;
            let tb = ctx.load(&b)?;
            let s = if ta.dim() == tb.dim() && ta.entries().len() == tb.entries().len() {
                conjugacy_solve_seeded(ta.entries(), tb.entries(), ctx.seed)?
            } else {
                None
            };
            let word = if s.is_some() { "equivalent" } else { "not equivalent" };
            Ok((word.to_string(), json!({"equivalent": s.is_some(), "conjugator": s.as_ref().map(matrix_json)})))
        }
        Cmd::Reduce(a) => {
            let t = reduce_mod(&ctx.load(&a.tuple)?, a.ell)?;
            emit_tuple(&t, &a.out, summary(&t))
        }
        Cmd::Group(a) => {
            let t = finite_tuple(&ctx, &a.tuple, a.ell)?;
            let gens = t.entries();
            let ell = t.field().characteristic();
            let mut text;
            let mut js;
            if t.dim() == 3 && ell % 2 == 1 {
                let rep = match o3_recognition(gens, ell, a.cap) {
                    Err(Error::NoInvariantForm) => None,
                    other => Some(other?),
                };
                let order = match &rep {
                    Some(r) => r.order,
                    None => group_closure(gens, a.cap)?,
                };
                let gram = rep.as_ref().and_then(|r| r.invariant_gram.clone());
                let recognized = rep.as_ref().and_then(|r| r.recognized.clone());
                text = format!("order {order}\nabsolutely irreducible {}", absolutely_irreducible(gens));
                if let Some(g) = &gram {
                    text.push_str(&format!("\ninvariant form {g}"));
                }
                if let Some(name) = &recognized {
                    text.push_str(&format!("\nrecognized {name}"));
                }
                js = json!({"order": order.exact(), "exceeds_cap": order.exact().is_none(),
                            "absolutely_irreducible": absolutely_irreducible(gens),
                            "invariant_gram": gram.as_ref().map(matrix_json), "recognized": recognized});
            } else {
                let order = group_closure(gens, a.cap)?;
                text = format!("order {order}\nabsolutely irreducible {}", absolutely_irreducible(gens));
                js = json!({"order": order.exact(), "exceeds_cap": order.exact().is_none(),
                            "absolutely_irreducible": absolutely_irreducible(gens)});
            }
            js["field"] = json!(t.field().to_string());
            Ok((text, js))
        }
        Cmd::Primitivity(a) => {
            let t = finite_tuple(&ctx, &a.tuple, a.ell)?;
            let rep = primitivity_bound(&t)?;
            let mut text = format!("n {} m {} x {}", rep.n, rep.m, rep.x);
            let mut blocks = Vec::new();
            for b in &rep.per_block {
                text.push_str(&format!("\nblocks of dimension {}: a {} b {} bound {}", b.k, b.a, b.b, b.bound));
                blocks.push(json!({"k": b.k, "a": b.a, "b": b.b, "bound": b.bound.to_string()}));
            }
            text.push_str(if rep.primitive { "\nprimitive" } else { "\nnot shown primitive" });
            Ok((
                text,
                json!({"n": rep.n, "m": rep.m, "x": rep.x, "blocks": blocks, "bound": rep.bound.to_string(),
                       "primitive": rep.primitive}),
            ))
        }
        Cmd::K3 { cmd } => k3(cmd),
        Cmd::Demo { cmd: DemoCmd::Sl { m, r, out } } => {
            let rep = sl_demo(m, r)?;
            let header = format!(
                "rank {} (expected {}), field {}\nC1 {} ({})\nC2 {} ({})\ndeterminants in <i>: {}",
                rep.rank,
                rep.expected_rank,
                rep.field,
                rep.c1,
                ok(rep.c1_ok),
                rep.c2,
                ok(rep.c2_ok),
                rep.determinants_ok
            );
            let (text, tj) = emit_tuple(&rep.tuple, &out, header)?;
            Ok((
                text,
                json!({"rank": rep.rank, "expected_rank": rep.expected_rank, "field": rep.field.to_string(),
                       "c1": rep.c1.to_string(), "c1_ok": rep.c1_ok, "c2": rep.c2.to_string(), "c2_ok": rep.c2_ok,
                       "determinants_ok": rep.determinants_ok, "tuple": tj}),
            ))
        }
        Cmd::Fixtures { cmd: FixtureCmd::List } => {
            let lines: Vec<String> = FIXTURES
                .iter()
                .map(|f| format!("{:<14} {:<6} {}", f.name, kind(f.kind), f.description))
                .collect();
            let js: Vec<Value> = FIXTURES
                .iter()
                .map(|f| json!({"name": f.name, "kind": kind(f.kind), "description": f.description}))
                .collect();
            Ok((lines.join("\n"), json!(js)))
        }
        Cmd::Fixtures { cmd: FixtureCmd::Dump { name } } => {
            let f = fixtures::find(&name)?;
            Ok((f.text.trim_end().to_string(), json!({"name": f.name, "text": f.text})))
        }
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "unexpected"
    }
}

fn kind(k: FixtureKind) -> &'static str {
    match k {
        FixtureKind::Tuple => "tuple",
        FixtureKind::Table => "table",
    }
}

fn k3(cmd: K3Cmd) -> Out {
    let fibre = |z: &Option<String>| z.as_deref().map(parse_rational).transpose().map(|z| z.unwrap_or_else(default_fibre));
    match cmd {
        K3Cmd::Count(a) => {
            let z = fibre(&a.z)?;
            let n = count_affine(a.q, &z)?;
            Ok((n.to_string(), json!({"q": a.q, "z": z.to_string(), "n": n})))
        }
        K3Cmd::Trace(a) => {
            let z = fibre(&a.z)?;
            let rec = trace_frobenius(a.q, &z)?;
            let mut text = rec.trace.to_string();
            if z != default_fibre() {
                text.push_str(&format!("\nN {} (trace formula calibrated for z = 1 only)", rec.n));
            }
            Ok((text, json!({"q": rec.q, "z": z.to_string(), "n": rec.n, "trace": rec.trace})))
        }
        K3Cmd::Frob { p } => {
            let fd = frobenius_eigenvalues(p)?;
            let text = format!(
                "alpha_{p} = {}\n(3/p) = {}, (-1/p) = {}\nt_p = {}, t_p^2 = {}, verified {}",
                fd.alpha_string(),
                fd.s3,
                fd.s_minus1,
                fd.t_p,
                fd.t_p2,
                fd.verified
            );
            Ok((
                text,
                json!({"p": p, "u": fd.u.to_string(), "d": fd.d.to_string(), "alpha": fd.alpha_string(),
                       "s3": fd.s3, "s_minus1": fd.s_minus1, "t_p": fd.t_p, "t_p2": fd.t_p2,
                       "verified": fd.verified, "opposite_sign_verifies": fd.opposite_sign_verifies}),
            ))
        }
        K3Cmd::Nsdet { x: None } => {
            let det = intersection_matrix_det()?;
            let coeffs: Vec<String> = det.coeffs().iter().map(|c| c.to_string()).collect();
            Ok((det.to_string(), json!({"polynomial": det.to_string(), "coefficients": coeffs})))
        }
        K3Cmd::Nsdet { x: Some(x) } => {
            let x = parse_rational(&x)?;
            let det = intersection_matrix_at(&x).det()?;
            Ok((det.to_string(), json!({"x": x.to_string(), "det": det.to_string()})))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok((text, value)) => {
            let body = if json { serde_json::to_string_pretty(&value).expect("serializable") } else { text };
            // a closed pipe downstream is not an error
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
