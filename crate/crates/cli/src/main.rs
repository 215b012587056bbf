use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reclab::formal_groups::FormalGroupLaw;
use reclab::json::{
    element_from_json, element_to_json, field_from_json, field_to_json, fgl_from_json, parse, plan_to_json,
    symbol_from_json_in, tower_element_from_json, tower_element_to_json, tower_of, value_to_json, ElementJson,
    FieldJson, FglJson, SymbolJson, TowerElementJson,
};
use reclab::laurent_tower::{Tower, TowerDesc, TowerElement};
use reclab::local_field::{BaseElement, Field, FieldDesc, EXACT};
use reclab::oracle::{hilbert_trivial, unit_classes};
use reclab::pairing::{
    artin_hasse_classical, artin_hasse_higher, iwasawa_gen_higher, iwasawa_pairing, kolyvagin_pairing,
    lubin_tate_wiles, plan_parameters, AhVariant, FglMeta, PairingPlan, PairingValue,
};
use reclab::suites::{run_suite, SuiteConfig, SuiteReport, ENGINES, SUITES};

#[derive(Parser, Debug)]
#[command(name = "reclab", version, about = "Explicit reciprocity computations in higher local fields")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Working precision in units of the valuation of the base field.
    #[arg(long, global = true, env = "RECLAB_PRECISION")]
    precision: Option<i64>,
    /// Laurent window for tower elements.
    #[arg(long, global = true)]
    window: Option<i64>,
    /// Truncation degree of formal group laws.
    #[arg(long, global = true, default_value_t = 8)]
    dmax: u32,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Ah,
    Iwasawa,
    Kolyvagin,
    Wiles,
    IwasawaGen,
    AhHigher,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Variant {
    Root,
    Torsion,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Describe a field given by a descriptor file or a cyclotomic shortcut.
    Field(FieldArgs),
    /// Evaluate the logarithm of a formal group law at an element.
    Log {
        #[command(flatten)]
        field: FieldArgs,
        /// Element file, or an integer.
        #[arg(long)]
        x: String,
        /// Formal group law file; defaults to the multiplicative law over Q_p.
        #[arg(long)]
        fgl: Option<PathBuf>,
    },
    /// Evaluate a pairing engine.
    Pair(PairArgs),
    /// Pairing plan for L = Q_p(zeta_{p^n}).
    Plan {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: u64,
        /// Number of Laurent variables of L.
        #[arg(long, default_value_t = 0)]
        vars: usize,
        /// Custom plan parameters instead of the certified search.
        #[arg(long, requires = "t")]
        k: Option<i64>,
        #[arg(long, requires = "k")]
        t: Option<i64>,
    },
    /// Norm subgroup oracle.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Determinant of the Jacobian of tower elements over Q_p.
    Jacobian {
        #[command(flatten)]
        field: FieldArgs,
        /// JSON array of tower elements.
        #[arg(long)]
        entries: PathBuf,
    },
    /// Run invariant suites.
    Check {
        /// Suite name, or `all`.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 3)]
        p: u64,
        /// Restrict the axiom suite to these engines.
        #[arg(long = "engine")]
        engines: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Is the Hilbert symbol (a, b)_{p^n} trivial in Q_p(zeta_{p^n})?
    Hilbert {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        /// Element file, or an integer.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    /// The group L*/L*^p used by the oracle.
    Classes {
        #[arg(long)]
        p: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    /// Field descriptor file.
    #[arg(long, conflicts_with_all = ["cyclotomic", "cyclotomic_tower"])]
    field: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    /// Q_p(zeta_{p^n}) as a single Eisenstein step.
    #[arg(long, requires = "p")]
    cyclotomic: Option<u32>,
    /// Q_p(zeta_{p^n}) as a tower of the lower levels.
    #[arg(long, requires = "p", conflicts_with = "cyclotomic")]
    cyclotomic_tower: Option<u32>,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long, value_enum)]
    engine: Engine,
    /// Field of x (and of the symbol, except for wiles and kolyvagin).
    #[arg(long)]
    field: PathBuf,
    /// Field of the symbol for wiles and kolyvagin.
    #[arg(long)]
    symbol_field: Option<PathBuf>,
    /// Symbol file; an element (or integer) for ah and iwasawa; a JSON array
    /// of units for ah-higher.
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Point file; an element (or integer) for iwasawa; unused by ah.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long)]
    level: u32,
    /// `auto` for the certified plan of kolyvagin.
    #[arg(long)]
    plan: Option<String>,
    #[arg(long)]
    k: Option<i64>,
    #[arg(long)]
    t: Option<i64>,
    /// Formal group law file; defaults to the multiplicative law over Q_p.
    #[arg(long)]
    fgl: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Variant::Root)]
    variant: Variant,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T> {
    parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_field(path: &Path) -> Result<Field> {
    let j: FieldJson = load(path)?;
    field_from_json(&j).with_context(|| format!("building the field in {}", path.display()))
}

impl FieldArgs {
    fn build(&self) -> Result<Field> {
        if let Some(path) = &self.field {
            return load_field(path);
        }
        let p = self.p.ok_or_else(|| anyhow!("give --field, or --p with --cyclotomic or --cyclotomic-tower"))?;
        Ok(match (self.cyclotomic, self.cyclotomic_tower) {
            (Some(n), _) => FieldDesc::cyclotomic(p, n)?,
            (None, Some(n)) => FieldDesc::cyclotomic_tower(p, n)?,
            (None, None) => FieldDesc::qp(p)?,
        })
    }
}

/// An element given as a file or as an integer literal.
fn load_element(arg: &str, field: &Field) -> Result<BaseElement> {
    if let Ok(k) = arg.parse::<i64>() {
        return Ok(BaseElement::from_int(field, k, EXACT));
    }
    let j: ElementJson = load(Path::new(arg))?;
    Ok(element_from_json(&j, field).with_context(|| format!("element in {arg}"))?)
}

fn load_tower_element(path: &Path, base: &Field, window: Option<i64>) -> Result<TowerElement> {
    let j: TowerElementJson = load(path)?;
    let tower = widen(tower_of(&j, base)?, window)?;
    Ok(tower_element_from_json(&j, &tower).with_context(|| format!("tower element in {}", path.display()))?)
}

fn widen(tower: Tower, window: Option<i64>) -> Result<Tower> {
    match window {
        Some(w) if w > tower.window() => Ok(TowerDesc::new(tower.base(), tower.vars(), w)?),
        _ => Ok(tower),
    }
}

fn load_law(path: Option<&Path>, field: &Field, dmax: u32, prec: i64) -> Result<FormalGroupLaw> {
    let k = field.subfield(0);
    match path {
        Some(path) => {
            let j: FglJson = load(path)?;
            Ok(fgl_from_json(&j, &k, prec)?)
        }
        None => Ok(FormalGroupLaw::multiplicative(&k, dmax, prec)),
    }
}

/// `4 n e`, the default working precision for level `n`.
fn default_precision(common: &Common, n: u32, field: &Field) -> i64 {
    common.precision.unwrap_or(4 * n.max(1) as i64 * field.e())
}

fn field_summary(f: &Field) -> Value {
    json!({
        "p": f.p(),
        "degree": f.degree(),
        "e": f.e(),
        "f": f.f(),
        "levels": f.levels(),
        "cyclotomic_level": f.cyclotomic_level(),
        "uniformizer": f.uniformizer_name(),
        "descriptor": field_to_json(f),
    })
}

fn value_json(v: &PairingValue, engine: Engine, plan: Option<&PairingPlan>) -> Value {
    let name = engine.to_possible_value().expect("named").get_name().to_string();
    json!({
        "coords": value_to_json(v).coords,
        "level": v.level(),
        "engine": name,
        "plan": plan.map(plan_to_json),
    })
}

fn pair(args: &PairArgs, common: &Common) -> Result<Value> {
    let n = args.level;
    let l = load_field(&args.field)?;
    let prec = default_precision(common, n, &l);
    let law = load_law(args.fgl.as_deref(), &l, common.dmax, prec)?;
    let x_path = || args.x.as_deref().map(PathBuf::from).ok_or_else(|| anyhow!("--x is required for this engine"));
    let value = match args.engine {
        Engine::Ah => {
            let u = load_element(&args.alpha, &l)?;
            return Ok(value_json(&artin_hasse_classical(&u, n)?, args.engine, None));
        }
        Engine::Iwasawa => {
            let u = load_element(&args.alpha, &l)?;
            let w = load_element(args.x.as_deref().ok_or_else(|| anyhow!("--x is required for iwasawa"))?, &l)?;
            iwasawa_pairing(&u, &w, n, None)?
        }
        Engine::IwasawaGen => {
            let x = load_tower_element(&x_path()?, &l, common.window)?;
            let sym: SymbolJson = load(Path::new(&args.alpha))?;
            let alpha = symbol_from_json_in(&sym, x.tower())?;
            iwasawa_gen_higher(&alpha, &x, n, &law)?
        }
        Engine::AhHigher => {
            let x = load_tower_element(&x_path()?, &l, common.window)?;
            let us: Vec<TowerElementJson> = load(Path::new(&args.alpha))?;
            let us = us.iter().map(|u| tower_element_from_json(u, x.tower())).collect::<reclab::Result<Vec<_>>>()?;
            let variant = match args.variant {
                Variant::Root => AhVariant::RootOfUnity,
                Variant::Torsion => AhVariant::TorsionPoint,
            };
            artin_hasse_higher(&us, &x, n, &law, None, None, variant)?
        }
        Engine::Wiles | Engine::Kolyvagin => {
            let m_path = args.symbol_field.as_ref().ok_or_else(|| anyhow!("--symbol-field is required for this engine"))?;
            let m = load_field(m_path)?;
            // share the member field so that x lives in a subfield of M
            let l = m
                .member_level(&l)
                .map(|k| m.subfield(k))
                .ok_or_else(|| anyhow!("the field of x is not a member of the symbol field"))?;
            let x = load_tower_element(&x_path()?, &l, common.window)?;
            let sym: SymbolJson = load(Path::new(&args.alpha))?;
            let tower_m = TowerDesc::new(&m, x.tower().vars(), x.tower().window())?;
            let alpha = symbol_from_json_in(&sym, &tower_m)?;
            if args.engine == Engine::Wiles {
                let s = m.cyclotomic_level().ok_or_else(|| anyhow!("the symbol field must be cyclotomic"))?;
                lubin_tate_wiles(&alpha, &x, s, n, &law, None)?
            } else {
                let meta = FglMeta::from_law(&law);
                let plan = match (args.plan.as_deref(), args.k, args.t) {
                    (Some("auto") | None, None, None) => plan_parameters(n, x.tower(), &meta)?,
                    (None, Some(k), Some(t)) => PairingPlan::custom(n, x.tower(), &meta, k, t)?,
                    _ => bail!("use --plan auto, or both --k and --t"),
                };
                let v = kolyvagin_pairing(&alpha, &x, &plan, &law, None, None)?;
                return Ok(value_json(&v, args.engine, Some(&plan)));
            }
        }
    };
    Ok(value_json(&value, args.engine, None))
}

fn log_cmd(field: &Field, x: &str, fgl: Option<&Path>, common: &Common) -> Result<Value> {
    let prec = default_precision(common, 1, field);
    let law = load_law(fgl, field, common.dmax, prec)?;
    let x = load_element(x, field)?;
    let v = x.valuation()?;
    if v < 1 {
        bail!("the logarithm needs v(x) > 0, got {v}");
    }
    let log = law.log_series(log_degree(v, field.e(), field.p(), prec))?.embed(field)?;
    let y = log.eval(&x.with_prec(prec.min(x.prec())))?;
    Ok(json!({ "x": element_to_json(&x), "log": element_to_json(&y) }))
}

/// Last degree `k` at which `x^k / k` can still be nonzero modulo `pi^prec`.
fn log_degree(v: i64, e: i64, p: u64, prec: i64) -> usize {
    let p = p as i64;
    let mut last = 1;
    let (mut k, mut pk, mut lg) = (1i64, p, 0i64);
    while k <= 2 * (prec + e * 64) {
        if k >= pk {
            pk *= p;
            lg += 1;
        }
        if k * v - e * lg < prec {
            last = k;
        }
        k += 1;
    }
    last as usize
}

fn plan_cmd(n: u32, p: u64, vars: usize, custom: Option<(i64, i64)>, common: &Common) -> Result<Value> {
    let l = FieldDesc::cyclotomic(p, n)?;
    let tower = TowerDesc::new(&l, vars, common.window.unwrap_or(16))?;
    let k = l.subfield(0);
    let meta = FglMeta::from_law(&FormalGroupLaw::multiplicative(&k, common.dmax, default_precision(common, n, &l)));
    let plan = match custom {
        Some((k, t)) => PairingPlan::custom(n, &tower, &meta, k, t)?,
        None => plan_parameters(n, &tower, &meta)?,
    };
    Ok(json!({ "admissible": plan.is_admissible(), "plan": plan_to_json(&plan) }))
}

fn jacobian_cmd(field: &Field, entries: &Path, common: &Common) -> Result<Value> {
    let js: Vec<TowerElementJson> = load(entries)?;
    let first = js.first().ok_or_else(|| anyhow!("no entries"))?;
    let tower = widen(tower_of(first, field)?, common.window)?;
    let xs = js.iter().map(|j| tower_element_from_json(j, &tower)).collect::<reclab::Result<Vec<_>>>()?;
    let det = reclab::derivations::jacobian_det(&xs)?;
    Ok(json!({ "det": tower_element_to_json(&det) }))
}

fn check_cmd(suite: &str, p: u64, engines: &[String], common: &Common) -> Result<(Value, bool)> {
    for e in engines {
        if !ENGINES.contains(&e.as_str()) {
            bail!("unknown engine {e:?}; known: {}", ENGINES.join(", "));
        }
    }
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut cfg = SuiteConfig::new(p, common.samples, common.seed);
    cfg.precision = common.precision;
    cfg.window = common.window;
    cfg.dmax = Some(common.dmax);
    cfg.engines = engines.to_vec();
    let reports = names
        .iter()
        .map(|s| run_suite(s, &cfg).with_context(|| format!("suite {s}")))
        .collect::<Result<Vec<SuiteReport>>>()?;
    let passed = reports.iter().all(SuiteReport::passed);
    Ok((json!({ "passed": passed, "config": cfg, "reports": reports }), passed))
}

fn table(v: &Value) -> String {
    let mut out = String::new();
    if let Some(reports) = v.get("reports").and_then(Value::as_array) {
        for r in reports {
            let rep: SuiteReport = serde_json::from_value(r.clone()).expect("report");
            out += &format!("suite {} (p = {}, seed = {})\n", rep.suite, rep.p, rep.seed);
            for c in &rep.checks {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                out += &format!("  {status} {:>6} cases {:>4} failures  {}\n", c.cases, c.failures, c.name);
                for note in &c.notes {
                    out += &format!("       note: {note}\n");
                }
                for ex in &c.examples {
                    out += &format!("       e.g. {ex}\n");
                }
            }
            for na in &rep.not_applicable {
                out += &format!("  n/a  {na}\n");
            }
        }
        out += &format!("passed: {}\n", v["passed"]);
        return out;
    }
    if let Some(obj) = v.as_object() {
        for (k, val) in obj {
            out += &format!("{k}: {val}\n");
        }
    }
    out
}

fn run(cli: &Cli) -> Result<(Value, bool)> {
    let c = &cli.common;
    let v = match &cli.cmd {
        Cmd::Field(f) => field_summary(&f.build()?),
        Cmd::Log { field, x, fgl } => log_cmd(&field.build()?, x, fgl.as_deref(), c)?,
        Cmd::Pair(args) => pair(args, c)?,
        Cmd::Plan { n, p, vars, k, t } => plan_cmd(*n, *p, *vars, k.zip(*t), c)?,
        Cmd::Oracle(OracleCmd::Hilbert { p, n, a, b }) => {
            let l = FieldDesc::cyclotomic(*p, *n)?;
            let (a, b) = (load_element(a, &l)?, load_element(b, &l)?);
            json!({ "trivial": hilbert_trivial(&a, &b, &l, *n)? })
        }
        Cmd::Oracle(OracleCmd::Classes { p }) => {
            let l = FieldDesc::cyclotomic(*p, 1)?;
            serde_json::to_value(unit_classes(&l, 1)?.summary())?
        }
        Cmd::Jacobian { field, entries } => jacobian_cmd(&field.build()?, entries, c)?,
        Cmd::Check { suite, p, engines } => return check_cmd(suite, *p, engines, c),
    };
    Ok((v, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((v, ok)) => {
            match cli.common.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&v).expect("json")),
                Format::Table => print!("{}", table(&v)),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
