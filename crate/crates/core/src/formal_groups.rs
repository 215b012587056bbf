//! Formal group laws over the integers of a local field.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent_tower::{Tower, TowerElement};
use crate::local_field::{is_exact, BaseElement, Field, EXACT};
use crate::series::{Evaluable, MSeries, Series, Tail};

/// Largest univariate degree produced on demand for polynomial laws.
const MAX_DEGREE: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FglSource {
    LubinTate,
    Multiplicative,
    Additive,
    Custom,
}

/// A one-dimensional commutative formal group law `F(X, Y)`, truncated at
/// total degree `dmax`.
#[derive(Clone)]
pub struct FormalGroupLaw {
    source: FglSource,
    law: MSeries,
    polynomial: bool,
    pi: Option<BaseElement>,
    q: u64,
    height: Option<u32>,
    isogeny: Option<Series>,
    prec: i64,
    log: OnceLock<Series>,
    exp: OnceLock<Series>,
}

impl fmt::Debug for FormalGroupLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormalGroupLaw")
            .field("source", &self.source)
            .field("dmax", &self.law.dmax())
            .field("prec", &self.prec)
            .field("law", &self.law)
            .finish()
    }
}

/// Operation for [`fg_combine`].
#[derive(Clone, Debug)]
pub enum FgOp {
    Plus,
    Minus,
    Endo(BaseElement),
}

fn work_prec(prec: i64, extra: i64) -> i64 {
    if is_exact(prec) {
        EXACT
    } else {
        prec + extra
    }
}

/// Check the two Lubin-Tate congruences for `f` and `pi`.
fn check_lubin_tate(f: &Series, pi: &BaseElement, q: u64) -> Result<()> {
    if pi.valuation().ok() != Some(1) {
        return Err(Error::NotLubinTate("pi is not a uniformizer".into()));
    }
    if !f.coeff(0).is_zero() {
        return Err(Error::NotLubinTate("f has a constant term".into()));
    }
    if !f.coeff(1).eq_mod(pi, pi.prec().min(f.coeff(1).prec())) {
        return Err(Error::NotLubinTate("linear coefficient differs from pi".into()));
    }
    let q = q as usize;
    if f.deg() < q {
        return Err(Error::NotLubinTate(format!("f is known only to degree {} < q = {}", f.deg(), q)));
    }
    for (k, c) in f.coeffs().iter().enumerate().skip(2) {
        let target = if k == q { BaseElement::one(f.field(), EXACT) } else { BaseElement::zero(f.field(), EXACT) };
        if c.sub(&target).val_or_prec() < 1 {
            return Err(Error::NotLubinTate(format!("coefficient of X^{} is wrong modulo pi", k)));
        }
    }
    Ok(())
}

/// Solve `outer(phi) = phi(inner)` with `phi = a X + ...` to degree `deg`,
/// where `outer` and `inner` both have linear coefficient `pi`.
fn intertwine(outer: &Series, inner: &Series, a: &BaseElement, pi: &BaseElement, deg: usize) -> Result<Series> {
    let field = outer.field().clone();
    let mut phi = Series::zero(&field, deg);
    if deg >= 1 {
        phi.set_coeff(1, a.clone());
    }
    let mut pik = pi.clone();
    for k in 2..=deg {
        pik = pik.mul(pi);
        let head = phi.truncate(k - 1).with_tail(Tail::Zero);
        let lhs = outer.compose_trunc(&head, k)?.coeff(k);
        let rhs = head.compose_trunc(inner, k)?.coeff(k);
        let num = rhs.sub(&lhs);
        let den = pi.sub(&pik);
        phi.set_coeff(k, num.divide(&den)?);
    }
    Ok(phi.with_tail(Tail::Integral))
}

impl FormalGroupLaw {
    /// The Lubin-Tate law attached to `f` with `f = pi X mod deg 2` and
    /// `f = X^q mod pi`, coefficients known modulo `pi^prec`.
    pub fn lubin_tate(f: &Series, pi: &BaseElement, dmax: u32, prec: i64) -> Result<Self> {
        let field = f.field().clone();
        let q = field
            .residue_size()
            .to_u64()
            .ok_or_else(|| Error::Unsupported("residue field too large".into()))?;
        check_lubin_tate(f, pi, q)?;
        let w = prec + dmax as i64 + 2;
        let fw = f.with_prec(w).truncate(dmax as usize);
        let piw = pi.with_prec(w);
        let mut law = MSeries::var(&field, 2, dmax, 0).add(&MSeries::var(&field, 2, dmax, 1));
        let mut pik = piw.clone();
        for k in 2..=dmax {
            pik = pik.mul(&piw);
            let g = law.with_dmax(k);
            let fx = MSeries::from_uni(&fw, 2, k, 0);
            let fy = MSeries::from_uni(&fw, 2, k, 1);
            let lhs = MSeries::compose_outer(&fw, &g)?.homogeneous(k);
            let rhs = g.compose(&[fx, fy])?.homogeneous(k);
            let den = piw.sub(&pik);
            let num = rhs.sub(&lhs);
            let mut h = MSeries::zero(&field, 2, dmax);
            for (e, c) in num.terms() {
                if c.val_or_prec() < 1 {
                    return Err(Error::NonConvergent(format!("degree {} correction is not divisible by pi", k)));
                }
                h.insert(e.clone(), c.divide(&den)?);
            }
            law = law.add(&h);
        }
        let law = law.with_prec(prec);
        let fgl = FormalGroupLaw {
            source: FglSource::LubinTate,
            law,
            polynomial: false,
            pi: Some(pi.clone()),
            q,
            height: Some(1),
            isogeny: Some(f.clone()),
            prec,
            log: OnceLock::new(),
            exp: OnceLock::new(),
        };
        if !fgl.check_functional_equation() {
            return Err(Error::NonConvergent("functional equation fails after construction".into()));
        }
        Ok(fgl)
    }

    /// `X + Y + XY`, the Lubin-Tate law of `(1+X)^p - 1` for `pi = p`.
    pub fn multiplicative(field: &Field, dmax: u32, prec: i64) -> Self {
        let p = field.p();
        let x = MSeries::var(field, 2, dmax, 0);
        let y = MSeries::var(field, 2, dmax, 1);
        let law = x.add(&y).add(&x.mul(&y));
        FormalGroupLaw {
            source: FglSource::Multiplicative,
            law,
            polynomial: true,
            pi: Some(BaseElement::from_int(field, p as i64, EXACT)),
            q: p,
            height: Some(1),
            isogeny: Some(cyclotomic_isogeny(field)),
            prec,
            log: OnceLock::new(),
            exp: OnceLock::new(),
        }
    }

    /// `X + Y`.
    pub fn additive(field: &Field, dmax: u32, prec: i64) -> Self {
        let law = MSeries::var(field, 2, dmax, 0).add(&MSeries::var(field, 2, dmax, 1));
        FormalGroupLaw {
            source: FglSource::Additive,
            law,
            polynomial: true,
            pi: None,
            q: field.p(),
            height: None,
            isogeny: None,
            prec,
            log: OnceLock::new(),
            exp: OnceLock::new(),
        }
    }

    /// A user-supplied law; the axioms are checked to `dmax`.
    pub fn custom(law: MSeries, prec: i64) -> Result<Self> {
        if law.nvars() != 2 {
            return Err(Error::Config("a formal group law has two variables".into()));
        }
        let fgl = FormalGroupLaw {
            source: FglSource::Custom,
            q: law.field().p(),
            law,
            polynomial: false,
            pi: None,
            height: None,
            isogeny: None,
            prec,
            log: OnceLock::new(),
            exp: OnceLock::new(),
        };
        if !fgl.check_axioms() {
            return Err(Error::DomainViolation("series is not a formal group law".into()));
        }
        Ok(fgl)
    }

    pub fn source(&self) -> FglSource {
        self.source
    }
    pub fn field(&self) -> &Field {
        self.law.field()
    }
    pub fn dmax(&self) -> u32 {
        self.law.dmax()
    }
    pub fn law(&self) -> &MSeries {
        &self.law
    }
    pub fn coeff(&self, i: u32, j: u32) -> BaseElement {
        self.law.coeff(&[i, j])
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn pi(&self) -> Option<&BaseElement> {
        self.pi.as_ref()
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn height(&self) -> Option<u32> {
        self.height
    }
    pub fn isogeny(&self) -> Option<&Series> {
        self.isogeny.as_ref()
    }
    /// Whether the stored table is the whole law (no truncation).
    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    fn require_isogeny(&self) -> Result<(&Series, &BaseElement)> {
        match (&self.isogeny, &self.pi) {
            (Some(f), Some(pi)) => Ok((f, pi)),
            _ => Err(Error::Unsupported("law has no distinguished endomorphism".into())),
        }
    }

    /// Unit, commutativity and associativity modulo `pi^prec` to `dmax`.
    pub fn check_axioms(&self) -> bool {
        let field = self.field();
        let d = self.dmax();
        let n = self.prec;
        let x = MSeries::var(field, 2, d, 0);
        let y = MSeries::var(field, 2, d, 1);
        let zero = MSeries::zero(field, 2, d);
        let unit_l = match self.law.compose(&[x.clone(), zero.clone()]) {
            Ok(s) => s.eq_mod(&x, n),
            Err(_) => false,
        };
        let unit_r = match self.law.compose(&[zero, y.clone()]) {
            Ok(s) => s.eq_mod(&y, n),
            Err(_) => false,
        };
        let comm = match self.law.compose(&[y, x]) {
            Ok(s) => s.eq_mod(&self.law, n),
            Err(_) => false,
        };
        unit_l && unit_r && comm && self.check_associativity()
    }

    fn check_associativity(&self) -> bool {
        let field = self.field();
        let d = self.dmax();
        let v: Vec<MSeries> = (0..3).map(|i| MSeries::var(field, 3, d, i)).collect();
        let run = || -> Result<bool> {
            let xy = self.law.compose(&[v[0].clone(), v[1].clone()])?;
            let yz = self.law.compose(&[v[1].clone(), v[2].clone()])?;
            let l = self.law.compose(&[xy, v[2].clone()])?;
            let r = self.law.compose(&[v[0].clone(), yz])?;
            Ok(l.eq_mod(&r, self.prec))
        };
        run().unwrap_or(false)
    }

    /// `f(F(X,Y)) = F(f(X), f(Y))` to `dmax`.
    pub fn check_functional_equation(&self) -> bool {
        let Some(f) = &self.isogeny else { return false };
        let d = self.dmax();
        let fx = MSeries::from_uni(f, 2, d, 0);
        let fy = MSeries::from_uni(f, 2, d, 1);
        let run = || -> Result<bool> {
            let l = MSeries::compose_outer(f, &self.law)?;
            let r = self.law.compose(&[fx, fy])?;
            Ok(l.eq_mod(&r, self.prec))
        };
        run().unwrap_or(false)
    }

    /// Formal logarithm to degree `deg`.
    pub fn log_series(&self, deg: usize) -> Result<Series> {
        let field = self.field();
        let w = work_prec(self.prec, 2 * deg as i64 + 4);
        let out = match self.source {
            FglSource::Additive => Series::x(field, deg.max(1)).with_tail(Tail::Zero),
            FglSource::Multiplicative => {
                let mut c = vec![BaseElement::zero(field, EXACT)];
                for k in 1..=deg as i64 {
                    let num = BaseElement::from_int(field, if k % 2 == 1 { 1 } else { -1 }, w);
                    c.push(num.divide(&BaseElement::from_int(field, k, EXACT))?);
                }
                Series::new(field, c, Tail::Logarithmic)
            }
            FglSource::LubinTate => {
                let (f, pi) = self.require_isogeny()?;
                let fw = f.with_prec(w).truncate(deg);
                let piw = pi.with_prec(w);
                let mut l = vec![BaseElement::zero(field, EXACT), BaseElement::one(field, EXACT)];
                let mut powers = vec![Series::zero(field, deg), fw.clone()];
                for j in 2..deg {
                    let next = powers[j - 1].mul_trunc(&fw, deg);
                    powers.push(next);
                }
                let mut pik = piw.clone();
                for k in 2..=deg {
                    pik = pik.mul(&piw);
                    let mut s = BaseElement::zero(field, EXACT);
                    for (j, lj) in l.iter().enumerate().take(k).skip(1) {
                        s = s.add(&lj.mul(&powers[j].coeff(k)));
                    }
                    l.push(s.divide(&piw.sub(&pik))?);
                }
                Series::new(field, l, Tail::Logarithmic)
            }
            FglSource::Custom => {
                if deg as u32 > self.dmax() {
                    return Err(Error::PrecisionExhausted(format!("law known only to degree {}", self.dmax())));
                }
                let fx = self.law.partial(0).restrict_to(1).truncate(deg.saturating_sub(1));
                let inv = fx.with_prec(w).inverse()?;
                inv.integrate()?.truncate(deg).with_tail(Tail::Logarithmic)
            }
        };
        Ok(out)
    }

    /// Cached logarithm to `dmax`.
    pub fn formal_log(&self) -> Result<Series> {
        if let Some(l) = self.log.get() {
            return Ok(l.clone());
        }
        let l = self.log_series(self.dmax() as usize)?;
        Ok(self.log.get_or_init(|| l).clone())
    }

    /// Cached exponential, the compositional inverse of the logarithm.
    pub fn formal_exp(&self) -> Result<Series> {
        if let Some(e) = self.exp.get() {
            return Ok(e.clone());
        }
        let e = if self.source == FglSource::Additive {
            Series::x(self.field(), self.dmax() as usize).with_tail(Tail::Zero)
        } else {
            self.formal_log()?.reversion()?.with_tail(Tail::Exponential)
        };
        Ok(self.exp.get_or_init(|| e).clone())
    }

    fn max_degree(&self) -> usize {
        if self.polynomial || self.isogeny.is_some() {
            MAX_DEGREE
        } else {
            self.dmax() as usize
        }
    }

    /// `[-1]_F` to degree `deg`.
    pub fn inverse_series(&self, deg: usize) -> Result<Series> {
        let field = self.field();
        match self.source {
            FglSource::Additive => Ok(Series::from_ints(field, &[0, -1], Tail::Zero)),
            FglSource::Multiplicative => {
                let c: Vec<i64> = (0..=deg as i64).map(|k| if k == 0 { 0 } else if k % 2 == 0 { 1 } else { -1 }).collect();
                Ok(Series::from_ints(field, &c, Tail::Integral))
            }
            FglSource::LubinTate => self.endo_series(&BaseElement::from_int(field, -1, EXACT), deg),
            FglSource::Custom => {
                let deg = deg.min(self.dmax() as usize);
                let mut inv = Series::from_ints(field, &[0, -1], Tail::Zero).pad(deg);
                for k in 2..=deg {
                    let head = MSeries::from_uni(&inv.truncate(k - 1), 1, k as u32, 0);
                    let x = MSeries::var(field, 1, k as u32, 0);
                    let val = self.law.with_dmax(k as u32).compose(&[x, head])?;
                    let c = val.coeff(&[k as u32]);
                    inv.set_coeff(k, c.neg());
                }
                Ok(inv.with_tail(Tail::Integral))
            }
        }
    }

    /// `[a]_F` to degree `deg`.
    pub fn endo_series(&self, a: &BaseElement, deg: usize) -> Result<Series> {
        let field = self.field();
        if a.val_or_prec() < 0 {
            return Err(Error::DomainViolation("endomorphism needs an integral a".into()));
        }
        let a = if std::sync::Arc::ptr_eq(a.field(), field) { a.clone() } else { a.restrict(field)? };
        match self.source {
            FglSource::Additive => Ok(Series::new(field, vec![BaseElement::zero(field, EXACT), a], Tail::Zero)),
            FglSource::LubinTate | FglSource::Multiplicative => {
                let (f, pi) = self.require_isogeny()?;
                let w = work_prec(self.prec, deg as i64 + 2);
                let fw = f.with_prec(w);
                let piw = pi.with_prec(w);
                let phi = intertwine(&fw, &fw, &a.with_prec(w), &piw, deg.max(1))?;
                Ok(phi.with_prec(self.prec))
            }
            FglSource::Custom => {
                let n = a_as_int(&a)?;
                let deg = deg.min(self.dmax() as usize);
                let base = if n < 0 { self.inverse_series(deg)? } else { Series::x(field, deg) };
                let mut acc = Series::zero(field, deg);
                for _ in 0..n.unsigned_abs() {
                    acc = self.add_series(&acc, &base, deg)?;
                }
                Ok(acc.with_tail(Tail::Integral))
            }
        }
    }

    /// `F(a(X), b(X))` truncated to `deg`.
    fn add_series(&self, a: &Series, b: &Series, deg: usize) -> Result<Series> {
        let d = deg as u32;
        let args = [MSeries::from_uni(a, 1, d, 0), MSeries::from_uni(b, 1, d, 0)];
        Ok(self.law.with_dmax(d).compose(&args)?.restrict_to(0))
    }

    /// `[1]_{f,g}`: the isomorphism `F_g -> F_f` between Lubin-Tate laws
    /// sharing the same `pi`, to degree `deg`.
    pub fn isomorphism_series(&self, from: &FormalGroupLaw, deg: usize) -> Result<Series> {
        let (f, pi) = self.require_isogeny()?;
        let (g, pi2) = from.require_isogeny()?;
        if !pi.eq_mod(pi2, self.prec.min(from.prec)) {
            return Err(Error::DomainViolation("laws have different uniformizers".into()));
        }
        let w = work_prec(self.prec.min(from.prec), deg as i64 + 2);
        let one = BaseElement::one(self.field(), w);
        let phi = intertwine(&f.with_prec(w), &g.with_prec(w), &one, &pi.with_prec(w), deg)?;
        Ok(phi.with_prec(self.prec.min(from.prec)))
    }

    fn degree_for<E: Evaluable>(&self, x: &E) -> usize {
        let e_rel = x.coeff_field().e() / self.field().e();
        let target = if is_exact(x.prec_e()) { self.prec * e_rel } else { x.prec_e() };
        let v = x.val_e().max(1);
        (((target + v - 1) / v) as usize).clamp(1, self.max_degree())
    }
}

fn a_as_int(a: &BaseElement) -> Result<i64> {
    let (c, shift) = a.scaled_coords();
    if !is_exact(a.prec()) || c[1..].iter().any(|x| x != &BigInt::from(0)) || shift < 0 {
        return Err(Error::Unsupported("custom laws support only exact integer endomorphisms".into()));
    }
    let v = &c[0] * num_traits::pow(a.field().p_big().clone(), shift as usize);
    v.to_i64().ok_or_else(|| Error::Unsupported("integer too large".into()))
}

/// `(1+X)^p - 1` with exact coefficients.
pub fn cyclotomic_isogeny(field: &Field) -> Series {
    let p = field.p() as usize;
    let mut c = vec![BigInt::from(0); p + 1];
    let mut b = BigInt::from(1);
    for (k, slot) in c.iter_mut().enumerate().skip(1) {
        b = b * BigInt::from(p + 1 - k) / BigInt::from(k);
        *slot = b.clone();
    }
    Series::new(field, c.iter().map(|x| BaseElement::from_bigint(field, x, EXACT)).collect(), Tail::Zero)
}

/// Build the Lubin-Tate law of `f`.
pub fn lubin_tate_build(f: &Series, pi: &BaseElement, dmax: u32, prec: i64) -> Result<FormalGroupLaw> {
    FormalGroupLaw::lubin_tate(f, pi, dmax, prec)
}

pub fn formal_log(fgl: &FormalGroupLaw) -> Result<Series> {
    fgl.formal_log()
}

pub fn formal_exp(fgl: &FormalGroupLaw) -> Result<Series> {
    fgl.formal_exp()
}

/// `x (+) y`, `x (-) y` or `[a](x)` evaluated in the maximal ideal.
pub fn fg_combine<E: Evaluable>(op: &FgOp, fgl: &FormalGroupLaw, x: &E, y: Option<&E>) -> Result<E> {
    if x.val_e() < 1 {
        return Err(Error::NotInMaximalIdeal);
    }
    let need_y = || y.ok_or_else(|| Error::Config("binary operation needs two arguments".into()));
    match op {
        FgOp::Plus => {
            let y = need_y()?;
            if y.val_e() < 1 {
                return Err(Error::NotInMaximalIdeal);
            }
            fgl.law.eval2(x, y, fgl.polynomial)
        }
        FgOp::Minus => {
            let y = need_y()?;
            if y.val_e() < 1 {
                return Err(Error::NotInMaximalIdeal);
            }
            let inv = fgl.inverse_series(fgl.degree_for(y))?;
            let iy = inv.eval(y)?;
            fgl.law.eval2(x, &iy, fgl.polynomial)
        }
        FgOp::Endo(a) => fgl.endo_series(a, fgl.degree_for(x))?.eval(x),
    }
}

/// `g = P U` with `P` a distinguished polynomial and `U` a unit series.
pub fn weierstrass_prep(g: &Series) -> Result<(Series, Series)> {
    let field = g.field().clone();
    let d = g.deg();
    let m = (0..=d).find(|&i| g.coeff(i).is_unit()).ok_or(Error::AllCoefficientsNonUnit(d))?;
    let a = Series::new(&field, (0..m.max(1)).map(|i| if i < m { g.coeff(i) } else { BaseElement::zero(&field, EXACT) }).collect(), Tail::Zero);
    let b = Series::new(&field, (m..=d).map(|i| g.coeff(i)).collect(), g.tail());
    let dm = d - m;
    let binv = b.inverse()?;
    let one = Series::from_ints(&field, &[1], Tail::Zero).pad(dm);
    let min_prec = g.coeffs().iter().map(|c| c.prec()).min().unwrap_or(EXACT);
    let iters = if is_exact(min_prec) { 64 * field.e() } else { min_prec + 2 };
    let mut v = binv.clone();
    let mut stable = false;
    for _ in 0..iters {
        let va = v.mul_trunc(&a, d);
        let shifted = Series::new(&field, (m..=d).map(|i| va.coeff(i)).collect(), Tail::Integral);
        let next = binv.mul_trunc(&one.sub(&shifted), dm);
        let same = (0..=dm).all(|i| next.coeff(i).sub(&v.coeff(i)).is_zero());
        v = next;
        if same {
            stable = true;
            break;
        }
    }
    if !stable {
        v = v.with_prec(iters);
    }
    let vg = v.mul_trunc(&g.truncate(d), d);
    let mut pc: Vec<BaseElement> = (0..m).map(|i| vg.coeff(i)).collect();
    pc.push(BaseElement::one(&field, EXACT));
    let p = Series::new(&field, pc, Tail::Zero);
    let mut u = v.inverse()?;
    if g.tail() == Tail::Zero && stable && m == d {
        u = u.truncate(0).with_tail(Tail::Zero);
    }
    Ok((p, u))
}

/// A compatible basis of the `pi^n`-torsion.
#[derive(Clone, Debug)]
pub struct TorsionData {
    level: u32,
    points: Vec<BaseElement>,
    isogeny: Series,
}

impl TorsionData {
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn points(&self) -> &[BaseElement] {
        &self.points
    }
    pub fn isogeny(&self) -> &Series {
        &self.isogeny
    }
    pub fn ambient(&self) -> &Field {
        self.points[0].field()
    }

    /// `f^{(n)}(e) = 0` and `f^{(n-1)}(e) != 0` for every basis point.
    pub fn verify(&self) -> Result<bool> {
        for e in &self.points {
            let (below, top) = iterate_to(&self.isogeny, e, self.level)?;
            if !top.is_zero() && top.val_or_prec() < top.prec() {
                return Ok(false);
            }
            if below.is_zero() || below.val_or_prec() >= below.prec() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every element of the torsion group (height one over `Z_p` only).
    pub fn enumerate(&self, fgl: &FormalGroupLaw) -> Result<Vec<BaseElement>> {
        if self.points.len() != 1 || fgl.field().degree() != 1 {
            return Err(Error::Unsupported("enumeration needs height one over Q_p".into()));
        }
        let e = &self.points[0];
        let amb = e.field().clone();
        let count = num_traits::pow(fgl.q() as usize, self.level as usize);
        let mut out = vec![BaseElement::zero(&amb, EXACT)];
        if fgl.source() == FglSource::Multiplicative {
            let one = BaseElement::one(&amb, EXACT);
            let z = one.add(e);
            let mut acc = one.clone();
            for _ in 1..count {
                acc = acc.mul(&z);
                out.push(acc.sub(&one));
            }
            return Ok(out);
        }
        let mut acc = e.clone();
        for _ in 1..count {
            out.push(acc.clone());
            acc = fg_combine(&FgOp::Plus, fgl, &acc, Some(e))?;
        }
        Ok(out)
    }
}

/// `(f^{(n-1)}(x), f^{(n)}(x))`.
fn iterate_to(f: &Series, x: &BaseElement, n: u32) -> Result<(BaseElement, BaseElement)> {
    let mut prev = x.clone();
    let mut cur = x.clone();
    for _ in 0..n {
        prev = cur.clone();
        cur = eval_poly_or_series(f, &cur)?;
    }
    Ok((prev, cur))
}

fn eval_poly_or_series(f: &Series, x: &BaseElement) -> Result<BaseElement> {
    if x.is_zero() {
        return Ok(BaseElement::zero(x.field(), x.prec()));
    }
    f.eval(x)
}

/// Basis of the `pi^n`-torsion in `ambient`. Cyclotomic laws use
/// `zeta_{p^n} - 1`; other laws refine `seed` by Newton's method.
pub fn torsion_points(
    fgl: &FormalGroupLaw,
    n: u32,
    ambient: &Field,
    seed: Option<&BaseElement>,
) -> Result<TorsionData> {
    let (f, pi) = fgl.require_isogeny()?;
    if n == 0 {
        return Err(Error::Config("torsion level must be positive".into()));
    }
    let cyclotomic = fgl.source == FglSource::Multiplicative
        || (fgl.field().degree() == 1 && pi.eq_mod(&BaseElement::from_int(fgl.field(), fgl.field().p() as i64, EXACT), fgl.prec) && {
            let c = cyclotomic_isogeny(fgl.field());
            f.deg() == c.deg() && f.eq_mod(&c, fgl.prec, c.deg())
        });
    let points = if cyclotomic {
        let level = ambient
            .cyclotomic_level()
            .ok_or_else(|| Error::AmbientTooSmall("ambient field is not cyclotomic".into()))?;
        if level < n {
            return Err(Error::AmbientTooSmall(format!("ambient contains only p^{}-th roots of unity", level)));
        }
        let one = BaseElement::one(ambient, EXACT);
        let zeta = BaseElement::zeta(ambient, EXACT)?;
        let p = BigInt::from(ambient.p());
        let z = if level == n {
            zeta
        } else {
            let prec = fgl.prec * ambient.e();
            zeta.with_prec(prec).pow_u(&num_traits::pow(p, (level - n) as usize))
        };
        vec![z.sub(&one)]
    } else {
        let seed = seed.ok_or_else(|| Error::AmbientTooSmall("no closed form for this law; a seed root is required".into()))?;
        if !std::sync::Arc::ptr_eq(seed.field(), ambient) && **seed.field() != **ambient {
            return Err(Error::AmbientMismatch);
        }
        vec![newton_torsion(f, seed, n)?]
    };
    let data = TorsionData { level: n, points, isogeny: f.clone() };
    if !data.verify()? {
        return Err(Error::RootNotFound("point is not a primitive torsion point".into()));
    }
    Ok(data)
}

fn newton_torsion(f: &Series, seed: &BaseElement, n: u32) -> Result<BaseElement> {
    let amb = seed.field().clone();
    let prec = seed.prec();
    if is_exact(prec) {
        return Err(Error::RootNotFound("seed needs a finite precision".into()));
    }
    let df = f.derivative();
    let mut x = seed.clone();
    for _ in 0..256 {
        let mut val = x.clone();
        let mut der = BaseElement::one(&amb, EXACT);
        for _ in 0..n {
            der = der.mul(&eval_at_any(&df, &val)?);
            val = eval_poly_or_series(f, &val)?;
        }
        if val.is_zero() || val.val_or_prec() >= prec {
            return Ok(x.with_prec(prec));
        }
        if der.is_zero() {
            return Err(Error::RootNotFound("vanishing derivative".into()));
        }
        let step = val.divide(&der)?;
        if step.val_or_prec() < 1 {
            return Err(Error::RootNotFound("Newton step leaves the maximal ideal".into()));
        }
        x = x.sub(&step).lift_prec(prec);
    }
    Err(Error::RootNotFound("Newton iteration did not converge".into()))
}

/// Horner evaluation for polynomials, series evaluation otherwise.
fn eval_at_any(f: &Series, x: &BaseElement) -> Result<BaseElement> {
    if f.tail() == Tail::Zero || x.val_or_prec() < 1 {
        let amb = x.field();
        let mut acc = BaseElement::zero(amb, EXACT);
        for c in f.coeffs().iter().rev() {
            acc = acc.mul(x).add(&c.embed(amb)?);
        }
        return Ok(acc);
    }
    f.eval(x)
}

/// `g(h(X))` for polynomials, `h(0)` arbitrary.
fn poly_compose(g: &Series, h: &Series) -> Series {
    let field = h.field().clone();
    let mut acc = Series::zero(&field, 0).with_tail(Tail::Zero);
    for c in g.coeffs().iter().rev() {
        let cst = Series::new(&field, vec![c.clone()], Tail::Zero);
        acc = acc.mul(h).add(&cst);
    }
    acc.trim()
}

/// Quotient and remainder by a monic polynomial.
fn poly_divmod(s: &Series, phi: &Series) -> (Series, Series) {
    let (s, phi) = (&s.trim(), &phi.trim());
    let field = s.field().clone();
    let dp = phi.deg();
    let mut r: Vec<BaseElement> = s.coeffs().to_vec();
    if r.len() <= dp {
        return (Series::zero(&field, 0).with_tail(Tail::Zero), s.clone());
    }
    let mut q = vec![BaseElement::zero(&field, EXACT); r.len() - dp];
    for i in (0..q.len()).rev() {
        let c = r[i + dp].clone();
        if c.is_zero() {
            continue;
        }
        q[i] = c.clone();
        for j in 0..=dp {
            r[i + j] = r[i + j].sub(&c.mul(&phi.coeff(j)));
        }
    }
    r.truncate(dp);
    (Series::new(&field, q, Tail::Zero), Series::new(&field, r, Tail::Zero))
}

/// `f^{(n)}` as an explicit polynomial.
pub fn iterate_polynomial(f: &Series, n: u32) -> Result<Series> {
    if f.tail() != Tail::Zero {
        return Err(Error::Unsupported("iterate of a non-polynomial series".into()));
    }
    let mut acc = Series::x(f.field(), 1).with_tail(Tail::Zero);
    for _ in 0..n {
        acc = poly_compose(f, &acc);
    }
    Ok(acc)
}

/// `r_g` with `prod_{v in kappa_n} g(F(X, v)) = r_g(f^{(n)}(X))`, and `r_g'(0)`.
///
/// Supported for the multiplicative law over `Q_p`; `g` is used as the
/// polynomial of its stored coefficients.
pub fn norm_series(g: &Series, fgl: &FormalGroupLaw, torsion: &TorsionData) -> Result<(Series, BaseElement)> {
    if fgl.source() != FglSource::Multiplicative || fgl.field().degree() != 1 {
        return Err(Error::Unsupported("norm series needs the multiplicative law over Q_p".into()));
    }
    if !g.coeff(0).is_zero() {
        return Err(Error::DomainViolation("g(0) must vanish".into()));
    }
    if !g.coeff(1).is_unit() {
        return Err(Error::DomainViolation("g'(0) must be a unit".into()));
    }
    let n = torsion.level();
    let k = fgl.field().clone();
    let amb = torsion.ambient().clone();
    let g_amb = g.embed(&amb)?.with_tail(Tail::Zero);
    let kappa = torsion.enumerate(fgl)?;
    let one = BaseElement::one(&amb, EXACT);
    let mut s = Series::new(&amb, vec![one.clone()], Tail::Zero);
    for v in &kappa {
        let h = Series::new(&amb, vec![v.clone(), one.add(v)], Tail::Zero);
        s = s.mul(&poly_compose(&g_amb, &h));
    }
    let s_k = Series::new(
        &k,
        s.coeffs().iter().map(|c| c.restrict(&k)).collect::<Result<Vec<_>>>()?,
        Tail::Zero,
    );
    let phi = iterate_polynomial(&cyclotomic_isogeny(&k), n)?;
    let mut rest = s_k;
    let mut r = Vec::new();
    loop {
        let (q, rem) = poly_divmod(&rest, &phi);
        for i in 1..rem.deg() + 1 {
            let c = rem.coeff(i);
            if !c.is_zero() && c.val_or_prec() < c.prec() {
                return Err(Error::DivisionMismatch(format!("remainder has a term in degree {}", i)));
            }
        }
        r.push(rem.coeff(0));
        if q.coeffs().iter().all(|c| c.is_zero()) {
            break;
        }
        rest = q;
    }
    let r_g = Series::new(&k, r, Tail::Zero);
    let deriv = r_g.coeff(1);
    let pi_n = BaseElement::from_int(&amb, 1, EXACT).mul_p_pow(n as i64);
    let mut prod = g_amb.coeff(1);
    for v in kappa.iter().skip(1) {
        prod = prod.mul(&eval_at_any(&g_amb, v)?);
    }
    let expected = prod.divide(&pi_n)?.restrict(&k)?;
    let diff = expected.sub(&deriv);
    if !diff.is_zero() && diff.val_or_prec() < expected.prec().min(deriv.prec()) {
        return Err(Error::DivisionMismatch("r_g'(0) disagrees with the product formula".into()));
    }
    Ok((r_g, deriv))
}

/// One term `gamma^{p^n} T^i pi^k` of a formal-digit expansion.
#[derive(Clone, Debug)]
pub struct Digit {
    pub index: Vec<i64>,
    pub k: i64,
    pub gamma: TowerElement,
}

fn digit_term(d: &Digit, n: u32) -> Result<TowerElement> {
    let tower = d.gamma.tower().clone();
    let base = tower.base().clone();
    let pn = num_traits::pow(base.p() as i64, n as usize);
    let pi = BaseElement::uniformizer(&base, EXACT).pow_u(&BigInt::from(d.k));
    d.gamma.pow(pn)?.shift(&d.index)?.mul(&TowerElement::from_base(&tower, &pi))
}

/// Expand `y` in the maximal ideal as
/// `(+)_k (+)_i gamma_{i,k}^{p^n} T^i pi^k` with `0 <= i_j < p^n`.
pub fn fg_digit_expansion(y: &TowerElement, fgl: &FormalGroupLaw, n: u32) -> Result<Vec<Digit>> {
    let tower = y.tower().clone();
    let base = tower.base().clone();
    let e_rel = base.e() / fgl.field().e();
    let prec = if is_exact(y.prec()) { fgl.prec * e_rel } else { y.prec() };
    if y.val_or_prec() < 1 {
        return Err(Error::NotInMaximalIdeal);
    }
    let pn = num_traits::pow(base.p() as i64, n as usize);
    let frob = BigInt::from(base.p()).pow((base.f() * n as i64 - n as i64) as u32);
    let mut r = y.with_prec(prec);
    let mut digits = Vec::new();
    for m in 1..prec {
        if r.is_zero() || r.val_or_prec() >= prec {
            break;
        }
        let v = r.valuation()?;
        if v < m {
            return Err(Error::NonConvergent(format!("remainder has valuation {} at step {}", v, m)));
        }
        if v > m {
            continue;
        }
        let pim = BaseElement::uniformizer(&base, EXACT).pow_u(&BigInt::from(m));
        let mut groups: std::collections::BTreeMap<Vec<i64>, Vec<(Vec<i64>, BaseElement)>> = Default::default();
        for (j, c) in r.terms() {
            if c.val_or_prec() != m {
                continue;
            }
            let u = c.with_prec(m + 1).divide(&pim)?.with_prec(1).lift_prec(prec);
            let b = u.pow_u(&frob).with_prec(prec);
            let i: Vec<i64> = j.iter().map(|x| x.rem_euclid(pn)).collect();
            let kk: Vec<i64> = j.iter().zip(&i).map(|(x, i)| (x - i) / pn).collect();
            groups.entry(i).or_default().push((kk, b));
        }
        let mut ym: Option<TowerElement> = None;
        for (i, parts) in groups {
            let gamma = TowerElement::new(&tower, parts, prec)?;
            let d = Digit { index: i, k: m, gamma };
            let term = digit_term(&d, n)?.with_prec(prec);
            ym = Some(match ym {
                None => term,
                Some(acc) => fg_combine(&FgOp::Plus, fgl, &acc, Some(&term))?,
            });
            digits.push(d);
        }
        if let Some(ym) = ym {
            r = fg_combine(&FgOp::Minus, fgl, &r, Some(&ym))?.with_prec(prec);
        }
    }
    Ok(digits)
}

/// Formal sum of the digit terms, modulo `pi^prec`.
pub fn reassemble_digits(digits: &[Digit], fgl: &FormalGroupLaw, n: u32, tower: &Tower, prec: i64) -> Result<TowerElement> {
    let mut acc = TowerElement::zero(tower, prec);
    for d in digits {
        let term = digit_term(d, n)?.with_prec(prec);
        acc = if acc.is_zero() { term } else { fg_combine(&FgOp::Plus, fgl, &acc, Some(&term))? };
    }
    Ok(acc.with_prec(prec))
}
