mod output;

use std::collections::BTreeMap;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use kochenlab_core::arith::mpoly::parse_poly;
use kochenlab_core::arith::rat::Rat;
use kochenlab_core::arith::ratfunc::RatFunc;
use kochenlab_core::arith::valuation::val_p_unchecked;
use kochenlab_core::brauer::{
    brauer_class_prescribe, compile_d_family, construct_ab, hilbert_symbol, sample_t, Place, QuaternionAlgebra,
};
use kochenlab_core::dioph::{
    compile_holomorphy_family, compile_r_family, eval_over_fq, holomorphy_member, weil_restrict, DiophFamily,
    DEFAULT_NODE_BUDGET,
};
use kochenlab_core::exec::Exec;
use kochenlab_core::kochen::{gamma_case_rational, gamma_eval, KochenParams};
use kochenlab_core::numberfield::kill::lemma_kill_check;
use kochenlab_core::numberfield::{primes_above, val_at_prime, NumberField, PrimeSummary, Tau};
use kochenlab_core::pyth::{member_r_pn, pi_lower_bound, verify_certificate, SearchBounds, DEFAULT_BUDGET};
use kochenlab_core::verify::{run_suite, Suite, VerifyConfig};
use kochenlab_core::{Error, Result};

use output::{render, Format};

/// Exact computations around Kochen operators over Q.
#[derive(Parser, Debug)]
#[command(name = "kochenlab", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    /// Enumeration cap; defaults to $KOCHENLAB_BUDGET, then to each command's own default.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the Kochen operator and its valuation case.
    Gamma(GammaArgs),
    /// Kochen-generated rings over Q.
    #[command(subcommand)]
    Rings(RingsCmd),
    /// Diophantine families.
    #[command(subcommand)]
    Dioph(DiophCmd),
    /// Quaternion algebras and local invariants.
    #[command(subcommand)]
    Brauer(BrauerCmd),
    /// Monogenic number fields.
    #[command(subcommand)]
    Nf(NfCmd),
    /// Run sampled lemma-check suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct KochenOpts {
    /// Base prime.
    #[arg(long)]
    p: u64,
    /// Relative type as `e,f`.
    #[arg(long, default_value = "1,1")]
    tau: String,
    /// Sign of the uniformizer `t = ±p`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    t: String,
}

impl KochenOpts {
    fn params(&self) -> Result<KochenParams> {
        let tau = parse_tau(&self.tau)?;
        let negative = match self.t.as_str() {
            "+" | "p" => false,
            "-" | "-p" => true,
            s => return Err(Error::input(format!("--t must be + or -, got '{s}'"))),
        };
        KochenParams::new(self.p, tau.e, tau.f, negative)
    }
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[command(flatten)]
    k: KochenOpts,
    /// Argument, a rational `a/b`.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Also report the predicted valuation and whether it matches.
    #[arg(long)]
    predict: bool,
}

#[derive(Subcommand, Debug)]
enum RingsCmd {
    /// Membership of a rational in the union of bounded Kochen rings.
    Member {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "1,1")]
        tau: String,
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Largest height of a Kochen argument.
        #[arg(long, default_value_t = 50)]
        height: u64,
    },
    /// Lower-bound certificate for the family of degree and height at most `n`.
    PiLowerBound {
        #[arg(long)]
        n: u32,
        /// Sampled ring elements checked against the certificate.
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum DiophCmd {
    /// Union of two families (files, `-` for stdin).
    Union { a: String, b: String },
    /// Intersection of two families.
    Intersect { a: String, b: String },
    /// Product of two families.
    Product { a: String, b: String },
    /// Image under a rational map; each `--map` is `NUM` or `NUM;DEN` in X1..Xn.
    Image {
        a: String,
        #[arg(long = "map", required = true)]
        maps: Vec<String>,
    },
    /// Fix the last free variables to rational values.
    Section {
        a: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Weil restriction along monic algebras of degree `k`.
    Weil {
        a: String,
        #[arg(long)]
        k: usize,
    },
    /// Points over F_q by existential search.
    Eval {
        a: String,
        #[arg(long)]
        q: u64,
    },
    /// The compiled family of the ring union; with `--x`, membership through it.
    CompileR {
        #[command(flatten)]
        k: KochenOpts,
        #[arg(long)]
        n: u32,
        /// Emit the full family, not only its size.
        #[arg(long)]
        emit: bool,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Direct-search height over the compiled equations.
        #[arg(long, default_value_t = 2)]
        direct_height: u64,
    },
    /// The two-dimensional holomorphy family; with `--x` and `--a`, membership.
    CompileHolo {
        #[command(flatten)]
        k: KochenOpts,
        #[arg(long)]
        n_prime: u32,
        #[arg(long)]
        emit: bool,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum BrauerCmd {
    /// Hilbert symbols at every relevant place, and the ramification set.
    Symbols {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// Algebras ramified exactly at {p, q1} and {p, q2}.
    Construct {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q1: u64,
        #[arg(long)]
        q2: u64,
    },
    /// Validate a ledger of local invariants, e.g. `2:1/2,5:1/2`.
    Prescribe {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        inv: String,
    },
    /// Trace differences of norm-one quaternions of bounded height.
    SampleT {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        height: u64,
    },
    /// Membership in the quaternion family for τ = (1,1).
    DMember {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q1: u64,
        #[arg(long)]
        q2: u64,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 12)]
        height: u64,
    },
}

#[derive(Subcommand, Debug)]
enum NfCmd {
    /// Primes above p with their types.
    Primes {
        #[arg(long)]
        h: String,
        #[arg(long)]
        p: u64,
    },
    /// Valuations of an element at the primes above p.
    Val {
        #[arg(long)]
        h: String,
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        elem: String,
    },
    /// Basic set against the factor fields of the parametric modulus.
    KillCheck {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "1,1")]
        tau: String,
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite to run; all suites when omitted.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random points per sampled check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Random systems per family-level check.
    #[arg(long, default_value_t = 40)]
    families: usize,
}

struct Ctx {
    budget: Option<u64>,
    exec: Exec,
}

impl Ctx {
    fn budget_or(&self, default: u64) -> u64 {
        self.budget.unwrap_or(default)
    }
}

fn parse_rat(s: &str) -> Result<Rat> {
    s.parse()
}

fn parse_tau(s: &str) -> Result<Tau> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [e, f] = parts.as_slice() else {
        return Err(Error::input(format!("type must be 'e,f', got '{s}'")));
    };
    let e = e.parse().map_err(|_| Error::input(format!("bad e in '{s}'")))?;
    let f = f.parse().map_err(|_| Error::input(format!("bad f in '{s}'")))?;
    Tau::new(e, f)
}

fn load_family(path: &str) -> Result<DiophFamily> {
    let mut src = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut src)
            .map_err(|e| Error::input(format!("reading stdin: {e}")))?;
    } else {
        src = std::fs::read_to_string(path).map_err(|e| Error::input(format!("reading {path}: {e}")))?;
    }
    let d: DiophFamily = serde_json::from_str(&src).map_err(|e| Error::input(format!("family JSON: {e}")))?;
    d.validated()
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("output types serialize")
}

fn algebra(a: &str, b: &str) -> Result<QuaternionAlgebra> {
    QuaternionAlgebra::new(parse_rat(a)?, parse_rat(b)?)
}

fn gamma(args: &GammaArgs) -> Result<Value> {
    let params = args.k.params()?;
    let x = parse_rat(&args.x)?;
    let pred = gamma_case_rational(&params, &x);
    let value = gamma_eval(&params, &x);
    let valuation = value.as_ref().map(|g| val_p_unchecked(g, params.p));
    let mut out = json!({
        "value": value.map(|g| g.to_string()),
        "valuation": valuation,
        "case": pred.case,
    });
    if args.predict {
        out["predicted"] = to_value(&pred.valuation);
        out["agree"] = json!(pred.valuation == valuation);
    }
    Ok(out)
}

fn rings(cmd: &RingsCmd, ctx: &Ctx) -> Result<Value> {
    match cmd {
        RingsCmd::Member { p, tau, n, x, height } => {
            let bounds = SearchBounds {
                height: *height,
                ..SearchBounds::default()
            };
            let v = member_r_pn(*p, parse_tau(tau)?, *n, &parse_rat(x)?, &bounds, ctx.budget_or(DEFAULT_BUDGET), ctx.exec)?;
            Ok(to_value(&v))
        }
        RingsCmd::PiLowerBound { n, samples, seed } => {
            let cert = pi_lower_bound(*n, ctx.budget_or(DEFAULT_BUDGET))?;
            let report = verify_certificate(&cert, *samples, *seed)?;
            if !report.all_pass {
                return Err(Error::invariant("the certificate fails its own checks"));
            }
            Ok(json!({ "certificate": cert, "report": report }))
        }
    }
}

fn size_json(d: &DiophFamily) -> Value {
    to_value(&d.size())
}

fn dioph(cmd: &DiophCmd, ctx: &Ctx) -> Result<Value> {
    let family = |d: DiophFamily| Ok(to_value(&d));
    match cmd {
        DiophCmd::Union { a, b } => family(load_family(a)?.union(&load_family(b)?)?),
        DiophCmd::Intersect { a, b } => family(load_family(a)?.intersect(&load_family(b)?)?),
        DiophCmd::Product { a, b } => family(load_family(a)?.product(&load_family(b)?)),
        DiophCmd::Image { a, maps } => {
            let d = load_family(a)?;
            let names: Vec<String> = (1..=d.n).map(|i| format!("X{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let fs = maps
                .iter()
                .map(|m| {
                    let (num, den) = m.split_once(';').unwrap_or((m, "1"));
                    RatFunc::new(parse_poly(num, &refs)?, parse_poly(den, &refs)?)
                })
                .collect::<Result<Vec<_>>>()?;
            family(d.rational_image(&fs)?)
        }
        DiophCmd::Section { a, values } => {
            let vals = values.split(',').map(|s| parse_rat(s.trim())).collect::<Result<Vec<_>>>()?;
            family(load_family(a)?.section(&vals, vals.len())?)
        }
        DiophCmd::Weil { a, k } => family(weil_restrict(&load_family(a)?, *k)?),
        DiophCmd::Eval { a, q } => {
            let d = load_family(a)?;
            let pts = eval_over_fq(&d, *q, ctx.budget_or(DEFAULT_NODE_BUDGET), ctx.exec)?;
            Ok(json!({ "q": q, "count": pts.len(), "points": pts }))
        }
        DiophCmd::CompileR {
            k,
            n,
            emit,
            x,
            direct_height,
        } => {
            let params = k.params()?;
            let budget = ctx.budget_or(DEFAULT_BUDGET);
            let c = compile_r_family(&params, *n, budget)?;
            let mut out = json!({
                "params": params,
                "n": n,
                "branches": c.branches.len(),
                "size": size_json(&c.family),
            });
            if *emit {
                out["family"] = to_value(&c.family);
                out["branch_info"] = to_value(&c.branches);
            }
            if let Some(x) = x {
                let v = c.member(&parse_rat(x)?, &SearchBounds::default(), *direct_height, budget, ctx.exec)?;
                out["membership"] = to_value(&v);
            }
            Ok(out)
        }
        DiophCmd::CompileHolo { k, n_prime, emit, x, a } => {
            let params = k.params()?;
            let h = compile_holomorphy_family(&params, *n_prime, ctx.budget_or(u64::MAX))?;
            let mut out = json!({
                "params": params,
                "n_prime": n_prime,
                "l": h.l,
                "k": h.k,
                "size": size_json(&h.family),
            });
            if *emit {
                out["family"] = to_value(&h.family);
            }
            match (x, a) {
                (Some(x), Some(a)) => {
                    out["membership"] = to_value(&holomorphy_member(&params, &parse_rat(x)?, &parse_rat(a)?)?);
                }
                (None, None) => {}
                _ => return Err(Error::input("--x and --a go together")),
            }
            Ok(out)
        }
    }
}

fn brauer(cmd: &BrauerCmd, ctx: &Ctx) -> Result<Value> {
    match cmd {
        BrauerCmd::Symbols { a, b } => {
            let alg = algebra(a, b)?;
            let ram = alg.ramification_set()?;
            let mut places: Vec<Place> = vec![Place::Finite(2)];
            for x in [&alg.a, &alg.b] {
                for n in [x.numer(), x.denom()] {
                    for p in kochenlab_core::arith::primes::prime_divisors(n, kochenlab_core::brauer::FACTOR_LIMIT)? {
                        places.push(Place::Finite(p));
                    }
                }
            }
            places.push(Place::Real);
            places.sort();
            places.dedup();
            let symbols = places
                .iter()
                .map(|&v| Ok(json!({ "place": v, "symbol": hilbert_symbol(&alg.a, &alg.b, v)? })))
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({ "algebra": alg, "symbols": symbols, "ramification": ram }))
        }
        BrauerCmd::Construct { p, q1, q2 } => {
            let (a, b) = construct_ab(*p, *q1, *q2)?;
            Ok(json!({
                "a": a, "a_ramification": a.ramification_set()?,
                "b": b, "b_ramification": b.ramification_set()?,
            }))
        }
        BrauerCmd::Prescribe { ell, inv } => {
            let mut map = BTreeMap::new();
            for entry in inv.split(',').filter(|s| !s.trim().is_empty()) {
                let (place, value) = entry
                    .split_once(':')
                    .ok_or_else(|| Error::input(format!("entry '{entry}' is not place:value")))?;
                map.insert(place.parse::<Place>()?, parse_rat(value.trim())?);
            }
            Ok(to_value(&brauer_class_prescribe(*ell, &map)?))
        }
        BrauerCmd::SampleT { a, b, height } => Ok(to_value(&sample_t(&algebra(a, b)?, *height, ctx.exec)?)),
        BrauerCmd::DMember { p, q1, q2, x, height } => {
            let params = KochenParams::new(*p, 1, 1, false)?;
            let (a, b) = construct_ab(*p, *q1, *q2)?;
            let d = compile_d_family(&params, &a, &b)?;
            let v = d.member(&parse_rat(x)?, *height)?;
            Ok(json!({ "a": a, "b": b, "size": size_json(&d.family), "membership": v }))
        }
    }
}

fn nf(cmd: &NfCmd) -> Result<Value> {
    match cmd {
        NfCmd::Primes { h, p } => {
            let l = NumberField::parse(h)?;
            let primes = primes_above(&l, *p)?;
            let table: Vec<PrimeSummary> = primes.iter().map(PrimeSummary::from).collect();
            let total: u32 = table.iter().map(|s| s.e * s.f).sum();
            Ok(json!({ "field": l.modulus().to_string(), "degree": l.degree(), "p": p, "primes": table, "sum_ef": total }))
        }
        NfCmd::Val { h, p, elem } => {
            let l = NumberField::parse(h)?;
            let x = l.parse_elem(elem)?;
            let rows = primes_above(&l, *p)?
                .iter()
                .map(|pr| Ok(json!({ "prime": PrimeSummary::from(pr), "valuation": val_at_prime(pr, &x)? })))
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({ "field": l.modulus().to_string(), "element": x.to_string(), "valuations": rows }))
        }
        NfCmd::KillCheck { p, tau, a } => Ok(to_value(&lemma_kill_check(*p, parse_tau(tau)?, &parse_rat(a)?)?)),
    }
}

fn verify(args: &VerifyArgs, ctx: &Ctx) -> Result<(Value, bool)> {
    let suites = match &args.suite {
        Some(s) => vec![s.parse::<Suite>()?],
        None => Suite::ALL.to_vec(),
    };
    let cfg = VerifyConfig {
        seed: args.seed,
        samples: args.samples,
        families: args.families,
    };
    let reports = suites
        .into_iter()
        .map(|s| run_suite(s, &cfg, ctx.exec))
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    Ok((json!({ "pass": pass, "suites": reports }), pass))
}

fn run(cli: &Cli) -> Result<(Value, bool)> {
    let env_budget = match std::env::var("KOCHENLAB_BUDGET") {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::input(format!("KOCHENLAB_BUDGET must be an integer, got '{s}'")))?,
        ),
        Err(_) => None,
    };
    let ctx = Ctx {
        budget: cli.budget.or(env_budget),
        exec: if cli.sequential { Exec::Sequential } else { Exec::default() },
    };
    let ok = |v: Value| Ok((v, true));
    match &cli.command {
        Command::Gamma(a) => ok(gamma(a)?),
        Command::Rings(c) => ok(rings(c, &ctx)?),
        Command::Dioph(c) => ok(dioph(c, &ctx)?),
        Command::Brauer(c) => ok(brauer(c, &ctx)?),
        Command::Nf(c) => ok(nf(c)?),
        Command::Verify(a) => verify(a, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, pass)) => {
            println!("{}", render(&value, cli.format));
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            let v = json!({ "error": e.kind(), "exit_code": e.exit_code(), "message": e.to_string() });
            eprintln!("{}", render(&v, cli.format));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
