//! Randomized invariant suites shared by the command line `check` command
//! and the acceptance tests.
//!
//! Every suite is deterministic for a given seed and reports each check with
//! its number of cases and failures.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derivations::{DerivationContext, DerivationSpec};
use crate::error::{Error, Result};
use crate::formal_groups::{
    fg_combine, fg_digit_expansion, norm_series, reassemble_digits, torsion_points, FgOp, FormalGroupLaw,
};
use crate::json::{plan_to_json, PlanJson};
use crate::laurent_tower::{Tower, TowerDesc, TowerElement};
use crate::local_field::{BaseElement, Field, FieldDesc, EXACT};
use crate::oracle::{norm_group_in, unit_classes};
use crate::pairing::{
    artin_hasse_classical, artin_hasse_higher, iwasawa_gen_higher, iwasawa_pairing, kolyvagin_pairing,
    lubin_tate_wiles, plan_parameters, AhVariant, FglMeta, PairingPlan, PairingValue,
};
use crate::series::{MSeries, Series, Tail};
use crate::symbols::MilnorSymbol;

pub const SUITES: &[&str] = &[
    "local-field",
    "symbols",
    "fgl",
    "formula",
    "oracle",
    "axioms",
    "norm-series",
    "derivations",
    "digits",
    "ah-higher",
    "plan",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub p: u64,
    pub samples: usize,
    pub seed: u64,
    /// Working precision override, in units of the base field valuation.
    pub precision: Option<i64>,
    pub dmax: Option<u32>,
    pub window: Option<i64>,
    /// Engines exercised by the axiom suite; empty means all.
    #[serde(default)]
    pub engines: Vec<String>,
}

impl SuiteConfig {
    pub fn new(p: u64, samples: usize, seed: u64) -> Self {
        SuiteConfig { p, samples, seed, precision: None, dmax: None, window: None, engines: Vec::new() }
    }

    fn wants(&self, engine: &str) -> bool {
        self.engines.is_empty() || self.engines.iter().any(|e| e == engine)
    }
}

pub const ENGINES: &[&str] = &["ah", "iwasawa", "iwasawa-gen", "ah-higher", "wiles", "kolyvagin"];

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Informational counters (e.g. how many values were nonzero).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// First few failure descriptions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<String>,
}

const MAX_EXAMPLES: usize = 5;

impl Check {
    pub fn new(name: impl Into<String>) -> Self {
        Check { name: name.into(), cases: 0, failures: 0, notes: Vec::new(), examples: Vec::new() }
    }

    /// Count one case; errors count as failures.
    pub fn record(&mut self, outcome: Result<bool>, describe: impl FnOnce() -> String) {
        self.cases += 1;
        let msg = match outcome {
            Ok(true) => return,
            Ok(false) => describe(),
            Err(e) => format!("{}: {e}", describe()),
        };
        self.failures += 1;
        if self.examples.len() < MAX_EXAMPLES {
            self.examples.push(msg);
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub p: u64,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<PlanJson>,
    /// Properties that cannot be expressed for an engine, with the reason.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub not_applicable: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, cfg: &SuiteConfig) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            p: cfg.p,
            seed: cfg.seed,
            samples: cfg.samples,
            checks: Vec::new(),
            plans: Vec::new(),
            not_applicable: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn cases(&self) -> usize {
        self.checks.iter().map(|c| c.cases).sum()
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

/// Runs a suite by name.
pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.p < 3 || cfg.p % 2 == 0 {
        return Err(Error::InvalidPrime(cfg.p));
    }
    match name {
        "local-field" => local_field_suite(cfg),
        "symbols" => symbols_suite(cfg),
        "fgl" => fgl_suite(cfg),
        "formula" => formula_suite(cfg),
        "oracle" => oracle_suite(cfg),
        "axioms" => axioms_suite(cfg),
        "norm-series" => norm_series_suite(cfg),
        "derivations" => derivations_suite(cfg),
        "digits" => digits_suite(cfg),
        "ah-higher" => ah_higher_suite(cfg),
        "plan" => plan_suite(cfg),
        other => Err(Error::Config(format!("unknown suite {other:?}; known: {}", SUITES.join(", ")))),
    }
}

fn rng_for(cfg: &SuiteConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn konst(tw: &Tower, a: &BaseElement) -> TowerElement {
    TowerElement::from_base(tw, a)
}

/// A principal unit with `v(u - 1) > 2 p^(n-1)`.
pub fn domain_unit<R: Rng + ?Sized>(l: &Field, n: u32, rng: &mut R) -> BaseElement {
    let b = 2 * (l.p() as i64).pow(n - 1) + 1;
    let prec = 6 * n as i64 * l.e() + 16;
    BaseElement::one(l, EXACT).add(&BaseElement::random(l, rng, prec, b))
}

/// `x = sum c_i T^i` over `|i| <= 1` with `v(c_i) >= min_val + |i|`.
pub fn sample_x<R: Rng + ?Sized>(tw: &Tower, rng: &mut R, min_val: i64, prec: i64) -> TowerElement {
    let l = tw.base();
    let mut x = TowerElement::zero(tw, prec);
    for i in -1..=1i64 {
        let c = BaseElement::random(l, rng, prec, min_val + i.abs());
        x = x.add(&TowerElement::monomial(tw, &c, vec![i]).expect("inside the window"));
    }
    x
}

/// `c T^j (1 + y)` with `c` a unit or a unit times the uniformizer.
pub fn sample_entry<R: Rng + ?Sized>(tw: &Tower, rng: &mut R, prec: i64) -> TowerElement {
    let l = tw.base();
    let c = BaseElement::random_unit(l, rng, prec).mul(&BaseElement::uniformizer(l, EXACT).pow_u(&rng.gen_range(0..2u32).into()));
    let lead = TowerElement::monomial(tw, &c, vec![rng.gen_range(-1..=1)]).expect("inside the window");
    let y = TowerElement::random(tw, rng, prec, 1, 1);
    lead.mul(&TowerElement::one(tw).add(&y)).expect("inside the window")
}

fn mult_law(l: &Field, dmax: u32) -> FormalGroupLaw {
    FormalGroupLaw::multiplicative(&l.subfield(0), dmax, 30)
}

// ---------------------------------------------------------------------------

fn local_field_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("local-field", cfg);
    let prec = cfg.precision.unwrap_or(24);
    let fields = [FieldDesc::cyclotomic(cfg.p, 1)?, FieldDesc::cyclotomic_tower(cfg.p, 2)?];
    let mut ring = Check::new("ring axioms");
    let mut inv = Check::new("x * x^-1 = 1");
    let mut norm = Check::new("norm multiplicative, trace additive");
    let mut rng = rng_for(cfg, 1);
    for i in 0..cfg.samples {
        let l = &fields[i % fields.len()];
        let q = l.subfield(0);
        let (a, b, c) = (
            BaseElement::random(l, &mut rng, prec, 0),
            BaseElement::random(l, &mut rng, prec, 0),
            BaseElement::random(l, &mut rng, prec, 0),
        );
        let ok = a.mul(&b.add(&c)).eq_mod(&a.mul(&b).add(&a.mul(&c)), prec)
            && a.mul(&b).mul(&c).eq_mod(&a.mul(&b.mul(&c)), prec)
            && a.mul(&b).eq_mod(&b.mul(&a), prec);
        ring.record(Ok(ok), || format!("{a}, {b}, {c}"));
        let u = BaseElement::random_unit(l, &mut rng, prec);
        inv.record(u.inv().map(|v| v.mul(&u).eq_mod(&BaseElement::one(l, EXACT), prec)), || format!("{u}"));
        let outcome = (|| {
            let nab = a.mul(&b).norm(&q)?;
            let nanb = a.norm(&q)?.mul(&b.norm(&q)?);
            let tab = a.add(&b).trace(&q)?;
            let tatb = a.trace(&q)?.add(&b.trace(&q)?);
            let pn = nab.prec().min(nanb.prec());
            Ok(nab.eq_mod(&nanb, pn) && tab.eq_mod(&tatb, tab.prec().min(tatb.prec())))
        })();
        norm.record(outcome, || format!("{a}, {b}"));
    }
    rep.checks = vec![ring, inv, norm];
    Ok(rep)
}

fn symbols_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("symbols", cfg);
    let l = FieldDesc::cyclotomic(cfg.p, 1)?;
    let tw = TowerDesc::new(&l, 1, cfg.window.unwrap_or(24))?;
    let mut rng = rng_for(cfg, 2);
    let one = TowerElement::one(&tw);
    let mut det = Check::new("relation detectors");
    let mut grp = Check::new("product, inverse and swap");
    for _ in 0..cfg.samples {
        let a = sample_entry(&tw, &mut rng, 20);
        let b = sample_entry(&tw, &mut rng, 20);
        let outcome = (|| {
            let st = MilnorSymbol::new(&tw, vec![a.clone(), one.sub(&a)])?.triviality().steinberg;
            let sk = MilnorSymbol::new(&tw, vec![a.clone(), a.neg()])?.triviality().skew;
            let plain = MilnorSymbol::new(&tw, vec![a.clone(), b.clone()])?.triviality();
            let expect_st = a.add(&b).sub(&one).is_zero();
            Ok(st && sk && plain.steinberg == expect_st)
        })();
        det.record(outcome, || format!("{a}, {b}"));
        let outcome = (|| {
            let s = MilnorSymbol::new(&tw, vec![a.clone(), b.clone()])?;
            let swapped = MilnorSymbol::new(&tw, vec![b.clone(), a.clone()])?;
            Ok(s.product(&s.inverse())?.is_identity() && s.product(&swapped)?.normalized().is_identity())
        })();
        grp.record(outcome, || format!("{a}, {b}"));
    }
    rep.checks = vec![det, grp];
    Ok(rep)
}

/// A random Lubin-Tate series `p X + p a_2 X^2 + ... + (1 + p a_p) X^p`.
fn random_lubin_tate<R: Rng + ?Sized>(k: &Field, rng: &mut R, dmax: u32, prec: i64) -> Result<FormalGroupLaw> {
    let p = k.p() as i64;
    let mut coeffs = vec![BaseElement::zero(k, EXACT), BaseElement::from_int(k, p, EXACT)];
    for _ in 2..p {
        coeffs.push(BaseElement::from_int(k, p * rng.gen_range(-2..=2), EXACT));
    }
    coeffs.push(BaseElement::from_int(k, 1 + p * rng.gen_range(-2..=2), EXACT));
    let f = Series::new(k, coeffs, Tail::Zero);
    FormalGroupLaw::lubin_tate(&f, &BaseElement::from_int(k, p, EXACT), dmax, prec)
}

fn fgl_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("fgl", cfg);
    let k = FieldDesc::qp(cfg.p)?;
    let dmax = cfg.dmax.unwrap_or(8);
    let prec = cfg.precision.unwrap_or(14);
    // denominators of the logarithm up to degree dmax cost this many digits
    let loss = (dmax as f64).log(cfg.p as f64).floor() as i64 + 2;
    let cmp = prec - 2 * loss;
    let mut rng = rng_for(cfg, 4);
    let mut laws = vec![("F_m".to_string(), FormalGroupLaw::multiplicative(&k, dmax, prec))];
    for i in 0..2 {
        laws.push((format!("lubin-tate #{}", i + 1), random_lubin_tate(&k, &mut rng, dmax, prec)?));
    }
    for (name, law) in &laws {
        let mut ax = Check::new(format!("{name}: group law axioms"));
        ax.record(Ok(law.check_axioms()), || "associativity, commutativity or unit fails".into());
        if law.isogeny().is_some() {
            ax.record(Ok(law.check_functional_equation()), || "f(F(X,Y)) != F(f(X),f(Y))".into());
        }
        let mut le = Check::new(format!("{name}: l(exp(X)) = X and l(F(X,Y)) = l(X) + l(Y)"));
        let outcome = (|| {
            let l = law.formal_log()?;
            let e = law.formal_exp()?;
            let id = l.compose(&e)?.eq_mod(&Series::x(&k, dmax as usize), cmp, dmax as usize)
                && e.compose(&l)?.eq_mod(&Series::x(&k, dmax as usize), cmp, dmax as usize);
            let lx = MSeries::from_uni(&l, 2, dmax, 0);
            let ly = MSeries::from_uni(&l, 2, dmax, 1);
            let add = MSeries::compose_outer(&l, law.law())?.eq_mod(&lx.add(&ly), cmp);
            Ok(id && add)
        })();
        le.record(outcome, || "identity fails".into());
        let mut endo = Check::new(format!("{name}: [a][b] = [ab]"));
        for _ in 0..cfg.samples {
            let a = BaseElement::from_int(&k, rng.gen_range(-40..=40), EXACT);
            let b = BaseElement::from_int(&k, rng.gen_range(-40..=40), EXACT);
            let outcome = (|| {
                let d = dmax as usize;
                let ab = law.endo_series(&a, d)?.compose_trunc(&law.endo_series(&b, d)?, d)?;
                Ok(ab.eq_mod(&law.endo_series(&a.mul(&b), d)?, cmp, d))
            })();
            endo.record(outcome, || format!("a = {a}, b = {b}"));
        }
        rep.checks.extend([ax, le, endo]);
    }
    Ok(rep)
}

fn formula_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("formula", cfg);
    for n in 1..=2u32 {
        let l = FieldDesc::cyclotomic(cfg.p, n)?;
        let zeta = BaseElement::zeta(&l, EXACT)?;
        let mut rng = rng_for(cfg, 10 + n as u64);
        let mut c = Check::new(format!("iwasawa(u, zeta) = artin-hasse(u), n = {n}"));
        let mut nonzero = 0;
        for _ in 0..cfg.samples {
            let u = domain_unit(&l, n, &mut rng);
            let outcome = (|| {
                let a = artin_hasse_classical(&u, n)?;
                let b = iwasawa_pairing(&u, &zeta, n, None)?;
                nonzero += usize::from(!a.is_zero());
                Ok(a == b)
            })();
            c.record(outcome, || format!("u = {u}"));
        }
        c.note(format!("{nonzero} nonzero values"));
        rep.checks.push(c);
    }
    Ok(rep)
}

/// Full class sweep against the norm-group oracle at `n = 1`.
///
/// Generator values: `(pi, zeta)` and `(zeta, zeta)` vanish by the relations
/// `{1 - zeta, zeta} = 1` and `{a, -a} = 1`; `(1 + pi^j, zeta)` for
/// `2 <= j < p` comes from the one-dimensional Kummer engine through
/// `(1 + pi^j, zeta) = -({zeta}, pi^j)`; `(1 + pi^p, zeta)` lies in the
/// Artin-Hasse domain.
fn oracle_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("oracle", cfg);
    let p = cfg.p;
    let l = FieldDesc::cyclotomic(p, 1)?;
    let group = unit_classes(&l, 1)?;
    let zeta = BaseElement::zeta(&l, EXACT)?;
    let h = norm_group_in(&group, &zeta.with_prec(8 * p as i64))?;
    let law = mult_law(&l, 8);
    let tw = TowerDesc::new(&l, 0, 0)?;
    let pi = BaseElement::uniformizer(&l, EXACT);
    let one = BaseElement::one(&l, EXACT);
    let mut gens: Vec<PairingValue> = vec![PairingValue::zero(p, 1, 1), PairingValue::zero(p, 1, 1)];
    for j in 2..p {
        let sym = MilnorSymbol::new(&tw, vec![konst(&tw, &zeta)])?;
        gens.push(iwasawa_gen_higher(&sym, &konst(&tw, &pi.pow_u(&j.into())), 1, &law)?.neg());
    }
    gens.push(artin_hasse_classical(&one.add(&pi.pow_u(&p.into())), 1)?);

    let mut inside = Check::new("artin-hasse triviality = norm membership, classes in the domain");
    let mut all = Check::new("extended value triviality = norm membership, all classes");
    let mut nontrivial = 0usize;
    for class in group.classes() {
        let rep_elt = group.representative(&class)?;
        let mut value = PairingValue::zero(p, 1, 1);
        for (c, g) in class.iter().zip(&gens) {
            value = value.add(&g.scale(&BigInt::from(*c)));
        }
        let member = h.contains_class(&class);
        nontrivial += usize::from(!value.is_zero());
        all.record(Ok(value.is_zero() == member), || format!("class {class:?}: value {value}, member {member}"));
        if class[..p as usize].iter().all(|&c| c == 0) {
            let direct = artin_hasse_classical(&rep_elt, 1);
            inside.record(direct.map(|v| v.is_zero() == member && v == value), || format!("class {class:?}"));
        }
    }
    all.note(format!("{} classes, {nontrivial} with nonzero value", group.order()));
    let mut rng = rng_for(cfg, 20);
    let mut sampled = Check::new("artin-hasse triviality = norm membership, random domain units");
    for _ in 0..cfg.samples {
        let u = domain_unit(&l, 1, &mut rng);
        let outcome = (|| Ok(artin_hasse_classical(&u, 1)?.is_zero() == h.contains(&u.with_prec(4 * p as i64 + 8))?))();
        sampled.record(outcome, || format!("u = {u}"));
    }
    rep.checks = vec![inside, all, sampled];
    Ok(rep)
}

/// `m` from `n + 2 + floor(rho log_p(v_L(p)/(p-1)) + rho/(p-1))` in floating
/// point, as an independent hand evaluation.
pub fn hand_m(n: u32, p: u64, rho: i64, v_l_p: i64) -> i64 {
    let pf = p as f64;
    let inner = rho as f64 * ((v_l_p as f64) / (pf - 1.0)).ln() / pf.ln() + rho as f64 / (pf - 1.0);
    n as i64 + 2 + (inner + 1e-9).floor() as i64
}

fn plan_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("plan", cfg);
    let k = FieldDesc::qp(cfg.p)?;
    let meta = FglMeta::from_law(&FormalGroupLaw::multiplicative(&k, 8, 30));
    let mut valid = Check::new("plan is admissible and certified");
    let mut m = Check::new("m matches hand evaluation");
    for n in 1..=3u32 {
        let l = FieldDesc::cyclotomic(cfg.p, n)?;
        let tw = TowerDesc::new(&l, 1, 16)?;
        match plan_parameters(n, &tw, &meta) {
            Ok(plan) => {
                let witness = crate::pairing::admissible_witness(plan.k, plan.t, plan.rho);
                valid.record(Ok(plan.is_admissible() && plan.certified && witness == Some(plan.kappa)), || {
                    format!("n = {n}: {plan:?}")
                });
                let expected = hand_m(n, cfg.p, plan.rho, l.e());
                m.record(Ok(plan.m == expected), || format!("n = {n}: m = {} expected {expected}", plan.m));
                rep.plans.push(plan_to_json(&plan));
            }
            Err(e) => {
                valid.record(Err(e.clone()), || format!("n = {n}"));
                m.record(Err(e), || format!("n = {n}"));
            }
        }
    }
    rep.checks = vec![valid, m];
    Ok(rep)
}

// ---------------------------------------------------------------------------
// pairing axioms

/// Checks shared by the engines that take a symbol and a point `x`.
struct AxiomChecks {
    symbol: Check,
    product: Check,
    point: Check,
    kernel: Check,
    steinberg: Check,
    skew: Check,
    power: Check,
    nonzero: usize,
}

impl AxiomChecks {
    fn new(engine: &str) -> Self {
        let c = |s: &str| Check::new(format!("{engine}: {s}"));
        AxiomChecks {
            symbol: c("additive in a symbol entry"),
            product: c("additive under symbol_product"),
            point: c("additive in x under the formal group"),
            kernel: c("x = f^(n)(y) pairs to 0"),
            steinberg: c("{a, 1 - a} pairs to 0"),
            skew: c("{a, -a} and {a, a} pair to 0"),
            power: c("{a^(p^n), b} pairs to 0"),
            nonzero: 0,
        }
    }

    fn into_checks(self) -> Vec<Check> {
        let mut symbol = self.symbol;
        symbol.note(format!("{} nonzero base values", self.nonzero));
        vec![symbol, self.product, self.point, self.kernel, self.steinberg, self.skew, self.power]
    }
}

type Engine<'a> = dyn Fn(&MilnorSymbol, &TowerElement) -> Result<PairingValue> + 'a;

struct SymbolCase {
    a: TowerElement,
    b: TowerElement,
    c: TowerElement,
    x: TowerElement,
    y: TowerElement,
}

fn run_symbol_axioms(
    checks: &mut AxiomChecks,
    sym_tower: &Tower,
    law: &FormalGroupLaw,
    n: u32,
    case: &SymbolCase,
    eval: &Engine<'_>,
) {
    let SymbolCase { a, b, c, x, y } = case;
    let one = TowerElement::one(sym_tower);
    let sym = |e: Vec<TowerElement>| MilnorSymbol::new(sym_tower, e);
    let base = (|| {
        let v = eval(&sym(vec![a.clone(), b.clone()])?, x)?;
        checks.nonzero += usize::from(!v.is_zero());
        Ok(v)
    })();
    let base = match base {
        Ok(v) => v,
        Err(e) => {
            checks.symbol.record(Err(e), || "base value".into());
            return;
        }
    };
    let vcb = (|| eval(&sym(vec![c.clone(), b.clone()])?, x))();
    let outcome = (|| {
        let ac = a.mul(c)?;
        Ok(eval(&sym(vec![ac, b.clone()])?, x)? == base.add(vcb.as_ref().map_err(|e| e.clone())?))
    })();
    checks.symbol.record(outcome, || format!("a = {a}, b = {b}, c = {c}"));
    let outcome = (|| {
        let prod = sym(vec![a.clone(), b.clone()])?.product(&sym(vec![c.clone(), b.clone()])?)?;
        Ok(eval(&prod, x)? == base.add(vcb.as_ref().map_err(|e| e.clone())?))
    })();
    checks.product.record(outcome, || format!("a = {a}, b = {b}, c = {c}"));
    let outcome = (|| {
        let s = sym(vec![a.clone(), b.clone()])?;
        let xy = fg_combine(&FgOp::Plus, law, x, Some(y))?;
        Ok(eval(&s, &xy)? == base.add(&eval(&s, y)?))
    })();
    checks.point.record(outcome, || format!("x = {x}, y = {y}"));
    let outcome = (|| {
        let f = law.isogeny().ok_or_else(|| Error::Config("law without isogeny".into()))?;
        let mut fy = y.clone();
        for _ in 0..n {
            fy = f.eval(&fy)?;
        }
        Ok(eval(&sym(vec![a.clone(), b.clone()])?, &fy)?.is_zero())
    })();
    checks.kernel.record(outcome, || format!("y = {y}"));
    let outcome = (|| Ok(eval(&sym(vec![a.clone(), one.sub(a)])?, x)?.is_zero()))();
    checks.steinberg.record(outcome, || format!("a = {a}"));
    let outcome = (|| {
        Ok(eval(&sym(vec![a.clone(), a.neg()])?, x)?.is_zero() && eval(&sym(vec![b.clone(), b.clone()])?, x)?.is_zero())
    })();
    checks.skew.record(outcome, || format!("a = {a}, b = {b}"));
    let outcome = (|| {
        let pn = (sym_tower.base().p() as i64).pow(n);
        Ok(eval(&sym(vec![a.pow(pn)?, b.clone()])?, x)?.is_zero())
    })();
    checks.power.record(outcome, || format!("a = {a}"));
}

fn classical_axioms(cfg: &SuiteConfig, rep: &mut SuiteReport) -> Result<()> {
    let mut rng = rng_for(cfg, 30);
    let fields = [FieldDesc::cyclotomic(cfg.p, 1)?, FieldDesc::cyclotomic(cfg.p, 2)?];
    let mut ah_lin = Check::new("ah: additive in u");
    let mut ah_ker = Check::new("ah: p^n-th powers pair to 0");
    let mut iw_u = Check::new("iwasawa: additive in u");
    let mut iw_w = Check::new("iwasawa: additive in w");
    let mut iw_ker = Check::new("iwasawa: w = v^(p^n) pairs to 0");
    let mut iw_skew = Check::new("iwasawa: (u, u) = 0");
    for i in 0..cfg.samples {
        let n = 1 + (i % 2) as u32;
        let l = &fields[n as usize - 1];
        let pn = (cfg.p as i64).pow(n);
        let (u1, u2) = (domain_unit(l, n, &mut rng), domain_unit(l, n, &mut rng));
        let prec = 6 * n as i64 * l.e() + 16;
        let w1 = BaseElement::one(l, EXACT).add(&BaseElement::random(l, &mut rng, prec, 1));
        let w2 = BaseElement::one(l, EXACT).add(&BaseElement::random(l, &mut rng, prec, 1));
        if cfg.wants("ah") {
            let outcome = (|| {
                Ok(artin_hasse_classical(&u1.mul(&u2), n)?
                    == artin_hasse_classical(&u1, n)?.add(&artin_hasse_classical(&u2, n)?))
            })();
            ah_lin.record(outcome, || format!("u1 = {u1}, u2 = {u2}"));
            ah_ker.record((|| Ok(artin_hasse_classical(&u1.pow(pn)?, n)?.is_zero()))(), || format!("u = {u1}"));
        }
        if cfg.wants("iwasawa") {
            let outcome = (|| {
                Ok(iwasawa_pairing(&u1.mul(&u2), &w1, n, None)?
                    == iwasawa_pairing(&u1, &w1, n, None)?.add(&iwasawa_pairing(&u2, &w1, n, None)?))
            })();
            iw_u.record(outcome, || format!("u1 = {u1}, u2 = {u2}, w = {w1}"));
            let outcome = (|| {
                Ok(iwasawa_pairing(&u1, &w1.mul(&w2), n, None)?
                    == iwasawa_pairing(&u1, &w1, n, None)?.add(&iwasawa_pairing(&u1, &w2, n, None)?))
            })();
            iw_w.record(outcome, || format!("u = {u1}, w1 = {w1}, w2 = {w2}"));
            iw_ker.record((|| Ok(iwasawa_pairing(&u1, &w1.pow(pn)?, n, None)?.is_zero()))(), || format!("u = {u1}, w = {w1}"));
            iw_skew.record((|| Ok(iwasawa_pairing(&u1, &u1, n, None)?.is_zero()))(), || format!("u = {u1}"));
        }
    }
    if cfg.wants("ah") {
        rep.checks.extend([ah_lin, ah_ker]);
        rep.not_applicable.push(
            "ah: the second argument is fixed to zeta, so Steinberg, {a,-a}, the kernel on the right and level change are not expressible".into(),
        );
    }
    if cfg.wants("iwasawa") {
        rep.checks.extend([iw_u, iw_w, iw_ker, iw_skew]);
        rep.not_applicable.push(
            "iwasawa: u and w are principal units, so u + w = 1 never holds; the field is tied to the level".into(),
        );
    }
    Ok(())
}

fn axioms_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("axioms", cfg);
    let p = cfg.p;
    let window = cfg.window.unwrap_or(16);
    classical_axioms(cfg, &mut rep)?;

    let l = FieldDesc::cyclotomic(p, 1)?;
    let law = mult_law(&l, 8);
    let tw = TowerDesc::new(&l, 1, window)?;
    if cfg.wants("iwasawa-gen") {
        let mut checks = AxiomChecks::new("iwasawa-gen");
        let mut rng = rng_for(cfg, 31);
        let eval = |s: &MilnorSymbol, x: &TowerElement| iwasawa_gen_higher(s, x, 1, &law);
        for _ in 0..cfg.samples {
            let case = SymbolCase {
                a: sample_entry(&tw, &mut rng, 40),
                b: sample_entry(&tw, &mut rng, 40),
                c: sample_entry(&tw, &mut rng, 40),
                x: sample_x(&tw, &mut rng, 2, 40),
                y: sample_x(&tw, &mut rng, 2, 40),
            };
            run_symbol_axioms(&mut checks, &tw, &law, 1, &case, &eval);
        }
        rep.checks.extend(checks.into_checks());
        rep.not_applicable.push("iwasawa-gen: L must equal K_n, so only one level exists per field".into());
    }
    if cfg.wants("ah-higher") {
        ah_higher_axioms(cfg, &mut rep, &tw, &law)?;
    }
    let l2 = FieldDesc::cyclotomic_tower(p, 2)?;
    let lw = l2.subfield(1);
    let (tw_x, tw_s) = (TowerDesc::new(&lw, 1, window)?, TowerDesc::new(&l2, 1, window)?);
    let wlaw = mult_law(&lw, 8);
    let plan = PairingPlan::custom(1, &tw_x, &FglMeta::from_law(&wlaw), 0, 2)?;
    for engine in ["wiles", "kolyvagin"] {
        if !cfg.wants(engine) {
            continue;
        }
        let mut checks = AxiomChecks::new(engine);
        let mut rng = rng_for(cfg, if engine == "wiles" { 32 } else { 33 });
        let wiles = |s: &MilnorSymbol, x: &TowerElement| lubin_tate_wiles(s, x, 2, 1, &wlaw, None);
        let koly = |s: &MilnorSymbol, x: &TowerElement| kolyvagin_pairing(s, x, &plan, &wlaw, None, None);
        let eval: &Engine<'_> = if engine == "wiles" { &wiles } else { &koly };
        for _ in 0..cfg.samples {
            let case = SymbolCase {
                a: sample_entry(&tw_s, &mut rng, 40),
                b: sample_entry(&tw_s, &mut rng, 40),
                c: sample_entry(&tw_s, &mut rng, 40),
                x: sample_x(&tw_x, &mut rng, 1, 40),
                y: sample_x(&tw_x, &mut rng, 1, 40),
            };
            run_symbol_axioms(&mut checks, &tw_s, &wlaw, 1, &case, eval);
        }
        rep.checks.extend(checks.into_checks());
        if engine == "kolyvagin" {
            rep.plans.push(plan_to_json(&plan));
        }
        level_compatibility(cfg, &mut rep, engine)?;
    }
    Ok(rep)
}

/// `(alpha, x)_1 = f((alpha, x)_2)` with `L = K_2`, symbols over `K_4`, `d = 1`.
fn level_compatibility(cfg: &SuiteConfig, rep: &mut SuiteReport, engine: &str) -> Result<()> {
    if cfg.p != 3 {
        rep.not_applicable.push(format!(
            "{engine}: level compatibility needs symbols over K_4, only feasible at p = 3"
        ));
        return Ok(());
    }
    let l4 = FieldDesc::cyclotomic_tower(cfg.p, 4)?;
    let l = l4.subfield(2);
    let (tw, tw4) = (TowerDesc::new(&l, 0, 0)?, TowerDesc::new(&l4, 0, 0)?);
    let law = mult_law(&l, 8);
    let mut plans = Vec::new();
    for n in 1..=2u32 {
        plans.push(PairingPlan::custom(n, &tw, &FglMeta::from_law(&law), 0, 4)?);
    }
    let mut check = Check::new(format!("{engine}: level 1 value = f(level 2 value)"));
    let mut rng = rng_for(cfg, 34);
    let mut nonzero = 0;
    for _ in 0..cfg.samples {
        let a = BaseElement::one(&l4, EXACT).add(&BaseElement::random(&l4, &mut rng, 400, 1));
        let x = BaseElement::random(&l, &mut rng, 40, 1);
        let outcome = (|| {
            let sym = MilnorSymbol::new(&tw4, vec![konst(&tw4, &a)])?;
            let xs = konst(&tw, &x);
            let (v1, v2) = if engine == "wiles" {
                (lubin_tate_wiles(&sym, &xs, 4, 1, &law, None)?, lubin_tate_wiles(&sym, &xs, 4, 2, &law, None)?)
            } else {
                (
                    kolyvagin_pairing(&sym, &xs, &plans[0], &law, None, None)?,
                    kolyvagin_pairing(&sym, &xs, &plans[1], &law, None, None)?,
                )
            };
            nonzero += usize::from(!v2.is_zero());
            Ok(v2.reduce_to(1)? == v1)
        })();
        check.record(outcome, || format!("a = {a}, x = {x}"));
    }
    check.note(format!("{nonzero} nonzero level-2 values"));
    rep.checks.push(check);
    Ok(())
}

fn ah_higher_axioms(cfg: &SuiteConfig, rep: &mut SuiteReport, tw: &Tower, law: &FormalGroupLaw) -> Result<()> {
    let mut rng = rng_for(cfg, 35);
    let one = TowerElement::one(tw);
    let unit = |rng: &mut ChaCha8Rng| {
        let c = BaseElement::random_unit(tw.base(), rng, 40);
        let lead = TowerElement::monomial(tw, &c, vec![rng.gen_range(-1..=1)]).expect("inside the window");
        lead.mul(&one.add(&TowerElement::random(tw, rng, 40, 1, 1))).expect("inside the window")
    };
    let mut lin = Check::new("ah-higher: additive in the unit");
    let mut point = Check::new("ah-higher: additive in x under the formal group");
    let mut kernel = Check::new("ah-higher: x = f(y) pairs to 0");
    let mut konst_unit = Check::new("ah-higher: constant units pair to 0");
    let mut power = Check::new("ah-higher: p-th power units pair to 0");
    let f = law.isogeny().ok_or_else(|| Error::Config("law without isogeny".into()))?;
    for i in 0..cfg.samples {
        let variant = if i % 2 == 0 { AhVariant::RootOfUnity } else { AhVariant::TorsionPoint };
        let (u1, u2) = (unit(&mut rng), unit(&mut rng));
        let (x, y) = (sample_x(tw, &mut rng, 2, 40), sample_x(tw, &mut rng, 2, 40));
        let ah = |u: &TowerElement, x: &TowerElement| artin_hasse_higher(&[u.clone()], x, 1, law, None, None, variant);
        let outcome = (|| Ok(ah(&u1.mul(&u2)?, &x)? == ah(&u1, &x)?.add(&ah(&u2, &x)?)))();
        lin.record(outcome, || format!("{variant:?}: u1 = {u1}, u2 = {u2}"));
        let outcome = (|| {
            let xy = fg_combine(&FgOp::Plus, law, &x, Some(&y))?;
            Ok(ah(&u1, &xy)? == ah(&u1, &x)?.add(&ah(&u1, &y)?))
        })();
        point.record(outcome, || format!("{variant:?}: x = {x}, y = {y}"));
        kernel.record((|| Ok(ah(&u1, &f.eval(&y)?)?.is_zero()))(), || format!("{variant:?}: y = {y}"));
        let c = konst(tw, &BaseElement::random_unit(&tw.base().subfield(0), &mut rng, 40).embed(tw.base())?);
        konst_unit.record((|| Ok(ah(&c, &x)?.is_zero()))(), || format!("{variant:?}: c = {c}"));
        power.record((|| Ok(ah(&u1.pow(tw.base().p() as i64)?, &x)?.is_zero()))(), || format!("{variant:?}: u = {u1}"));
    }
    rep.checks.extend([lin, point, kernel, konst_unit, power]);
    rep.not_applicable.push(
        "ah-higher: the symbol is {u, zeta} or {u, pi} with a fixed last entry, so Steinberg and {a,-a} are not expressible; L is tied to the level".into(),
    );
    Ok(())
}

// ---------------------------------------------------------------------------

fn random_g<R: Rng + ?Sized>(k: &Field, rng: &mut R) -> Series {
    let mut coeffs = vec![BaseElement::zero(k, EXACT), BaseElement::random_unit(k, rng, 20)];
    for _ in 0..rng.gen_range(1..=3) {
        coeffs.push(BaseElement::random(k, rng, 20, 0));
    }
    Series::new(k, coeffs, Tail::Zero)
}

fn norm_series_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("norm-series", cfg);
    let k = FieldDesc::qp(cfg.p)?;
    let l = FieldDesc::cyclotomic(cfg.p, 1)?;
    let law = FormalGroupLaw::multiplicative(&k, 8, 20);
    let torsion = torsion_points(&law, 1, &l, None)?;
    let kappa = torsion.enumerate(&law)?;
    let mut rng = rng_for(cfg, 40);
    let mut formula = Check::new("r_g'(0) = g'(0) prod_{v != 0} g(v) / p");
    let mut unit = Check::new("r_g'(0) is a unit");
    for _ in 0..cfg.samples.min(20).max(1) {
        let g = random_g(&k, &mut rng);
        let outcome = (|| {
            let (_, d) = norm_series(&g, &law, &torsion)?;
            let ga = g.embed(&l)?;
            let mut prod = ga.coeff(1);
            for v in kappa.iter().filter(|v| !v.is_zero()) {
                let mut s = BaseElement::zero(&l, EXACT);
                for c in ga.coeffs().iter().rev() {
                    s = s.mul(v).add(c);
                }
                prod = prod.mul(&s);
            }
            let expected = prod.divide(&BaseElement::from_int(&l, cfg.p as i64, EXACT))?;
            let de = d.embed(&l)?;
            Ok(expected.eq_mod(&de, de.prec().min(expected.prec())) && d.is_unit())
        })();
        let ok = outcome.as_ref().map(|b| *b).unwrap_or(false);
        formula.record(outcome, || format!("g = {:?}", g.coeffs()));
        unit.record(Ok(ok), || "derivative is not a unit".into());
    }
    let window = cfg.window.unwrap_or(32);
    let mut trivial = Check::new("({r_g(x), b}, x) = 0");
    let lawl = mult_law(&l, 8);
    let tw1 = TowerDesc::new(&l, 0, 0)?;
    let tw2 = TowerDesc::new(&l, 1, window)?;
    for i in 0..cfg.samples {
        let g = random_g(&k, &mut rng);
        let outcome = (|| {
            let (r, _) = norm_series(&g, &law, &torsion)?;
            let r = r.embed(&l)?;
            if i % 2 == 0 {
                let x = konst(&tw1, &BaseElement::random(&l, &mut rng, 40, 2));
                let rx = r.eval(&x)?;
                Ok(iwasawa_gen_higher(&MilnorSymbol::new(&tw1, vec![rx])?, &x, 1, &lawl)?.is_zero())
            } else {
                let c = BaseElement::random(&l, &mut rng, 40, 2);
                let x = TowerElement::monomial(&tw2, &c, vec![rng.gen_range(-1..=1)])?;
                let rx = r.eval(&x)?;
                let b = sample_entry(&tw2, &mut rng, 40);
                Ok(iwasawa_gen_higher(&MilnorSymbol::new(&tw2, vec![rx, b])?, &x, 1, &lawl)?.is_zero())
            }
        })();
        trivial.record(outcome, || format!("g = {:?}", g.coeffs()));
    }
    rep.checks = vec![formula, unit, trivial];
    Ok(rep)
}

fn derivations_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("derivations", cfg);
    let p = cfg.p;
    let k = FieldDesc::qp(p)?;
    let meta = FglMeta::from_law(&FormalGroupLaw::multiplicative(&k, 8, 30));
    let fields = [FieldDesc::cyclotomic(p, 1)?, FieldDesc::cyclotomic_tower(p, 2)?];
    let mut axioms = Check::new("normalization, additivity, Leibniz, alternating, constants");
    let mut detid = Check::new("D(a, b) = det[da_i/dT_j] D(T, pi)");
    let mut relation = Check::new("P'(pi) D(T, pi) = 0 in the target");
    let mut invariance = Check::new("d/dT_d independent of the representation modulo the period");
    let mut rng = rng_for(cfg, 50);
    let mut specs = Vec::new();
    for l in &fields {
        let tw = TowerDesc::new(l, 1, cfg.window.unwrap_or(24))?;
        let plan = plan_parameters(1, &tw, &meta)?;
        // target O / (pi^m / pi_L)
        let period = plan.m * l.e() - 1;
        let ctx = DerivationContext::over_qp(&tw, period + 40)?;
        let ann = ctx.annihilator_valuation()?;
        let w = TowerElement::random(&tw, &mut rng, period + 20, (period - ann).max(0), 1);
        specs.push((tw, DerivationSpec::new(ctx, w, period)?, ann));
    }
    for i in 0..cfg.samples {
        let (tw, spec, _) = &specs[i % specs.len()];
        let period = spec.period();
        let prec = period + 20;
        let r = |rng: &mut ChaCha8Rng| TowerElement::random(tw, rng, prec, 0, 2);
        let (a, b, c) = (r(&mut rng), r(&mut rng), r(&mut rng));
        let ctx = spec.context();
        let t = TowerElement::var(tw, 1);
        let pi = konst(tw, ctx.uniformizer());
        let outcome = (|| {
            let d = |x: &TowerElement, y: &TowerElement| spec.apply(&[x.clone(), y.clone()]);
            let norm = d(&t, &pi)?.eq_mod(spec.value(), period);
            let add = d(&a.add(&c), &b)?.eq_mod(&d(&a, &b)?.add(&d(&c, &b)?), period)
                && d(&b, &a.add(&c))?.eq_mod(&d(&b, &a)?.add(&d(&b, &c)?), period);
            let leibniz = d(&a.mul(&c)?, &b)?.eq_mod(&d(&c, &b)?.mul(&a)?.add(&d(&a, &b)?.mul(&c)?), period)
                && d(&b, &a.mul(&c)?)?.eq_mod(&d(&b, &c)?.mul(&a)?.add(&d(&b, &a)?.mul(&c)?), period);
            let alt = d(&a, &a)?.with_prec(period).is_zero() && d(&a, &b)?.add(&d(&b, &a)?).with_prec(period).is_zero();
            let n = konst(tw, &BaseElement::from_int(tw.base(), rng_int(i), EXACT));
            let consts = d(&n, &b)?.with_prec(period).is_zero();
            Ok(norm && add && leibniz && alt && consts)
        })();
        axioms.record(outcome, || format!("a = {a}, b = {b}, c = {c}"));
        let outcome = (|| {
            let da1 = ctx.partial_derivative(&a, 1)?;
            let da2 = ctx.partial_derivative(&a, 2)?;
            let db1 = ctx.partial_derivative(&b, 1)?;
            let db2 = ctx.partial_derivative(&b, 2)?;
            let det = da1.mul(&db2)?.sub(&da2.mul(&db1)?);
            Ok(spec.apply(&[a.clone(), b.clone()])?.eq_mod(&det.mul(spec.value())?, period))
        })();
        detid.record(outcome, || format!("a = {a}, b = {b}"));
    }
    for (tw, spec, ann) in &specs {
        let ctx = spec.context();
        let dp = ctx.eval_derivative(&ctx.min_poly())?;
        relation.record(Ok(spec.value().scale(&dp).with_prec(spec.period()).is_zero()), || format!("{}", tw.base().degree()));
        let _ = ann;
    }
    let invariance_cases = (cfg.samples / 5).max(1);
    for i in 0..invariance_cases {
        let (tw, spec, ann) = &specs[i % specs.len()];
        let ctx = spec.context();
        let l = tw.base();
        let x = BaseElement::random(l, &mut rng, spec.period() + 20, 0);
        let outcome = (|| {
            let d1 = ctx.eval_derivative(&ctx.representing_poly(&x)?)?;
            let d2 = ctx.eval_derivative(&ctx.randomized_poly(&x, &mut rng)?)?;
            let diff = konst(tw, &d1.sub(&d2));
            let killed = diff.mul(spec.value())?.with_prec(spec.period()).is_zero();
            Ok(d1.eq_mod(&d2, *ann) && killed)
        })();
        invariance.record(outcome, || format!("x = {x}"));
    }
    rep.checks = vec![axioms, detid, relation, invariance];
    Ok(rep)
}

fn rng_int(i: usize) -> i64 {
    (i as i64 % 17) - 8
}

fn digits_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("digits", cfg);
    let k = FieldDesc::qp(cfg.p)?;
    let l = FieldDesc::cyclotomic(cfg.p, 1)?;
    let tw = TowerDesc::new(&l, 1, cfg.window.unwrap_or(64))?;
    let prec = cfg.precision.unwrap_or(8);
    let law = FormalGroupLaw::multiplicative(&k, 12, prec + 2);
    let mut rng = rng_for(cfg, 60);
    let mut check = Check::new("reassembled digits reproduce y");
    for _ in 0..cfg.samples {
        let y = TowerElement::random(&tw, &mut rng, prec, 1, 1);
        let outcome = (|| {
            let d = fg_digit_expansion(&y, &law, 1)?;
            Ok(reassemble_digits(&d, &law, 1, &tw, prec)?.eq_mod(&y, prec))
        })();
        check.record(outcome, || format!("y = {y}"));
    }
    rep.checks = vec![check];
    Ok(rep)
}

fn ah_higher_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("ah-higher", cfg);
    let l = FieldDesc::cyclotomic(cfg.p, 1)?;
    let tw = TowerDesc::new(&l, 1, cfg.window.unwrap_or(16))?;
    let law = mult_law(&l, 8);
    let t = TowerElement::var(&tw, 1);
    let zeta = konst(&tw, &BaseElement::zeta(&l, EXACT)?);
    let pi = TowerElement::uniformizer(&tw);
    let sym_tz = MilnorSymbol::new(&tw, vec![t.clone(), zeta])?;
    let mut rng = rng_for(cfg, 70);
    let mut rou = Check::new("root-of-unity form with u = T equals iwasawa-gen on {T, zeta}");
    let mut tor = Check::new("torsion-point form equals iwasawa-gen on {u, pi}");
    let mut nz = 0;
    for _ in 0..cfg.samples {
        let x = sample_x(&tw, &mut rng, 2, 40);
        let outcome = (|| {
            let a = artin_hasse_higher(&[t.clone()], &x, 1, &law, None, None, AhVariant::RootOfUnity)?;
            nz += usize::from(!a.is_zero());
            Ok(a == iwasawa_gen_higher(&sym_tz, &x, 1, &law)?)
        })();
        rou.record(outcome, || format!("x = {x}"));
        let u = TowerElement::one(&tw).add(&TowerElement::random(&tw, &mut rng, 40, 1, 1));
        let outcome = (|| {
            let a = artin_hasse_higher(&[u.clone()], &x, 1, &law, None, None, AhVariant::TorsionPoint)?;
            Ok(a == iwasawa_gen_higher(&MilnorSymbol::new(&tw, vec![u.clone(), pi.clone()])?, &x, 1, &law)?)
        })();
        tor.record(outcome, || format!("u = {u}, x = {x}"));
    }
    rou.note(format!("{nz} nonzero values"));
    rep.checks = vec![rou, tor];
    Ok(rep)
}
