//! One-dimensional formulas over `L = Q_p(zeta_{p^n})`: the Artin-Hasse
//! formula for `(u, zeta)` and Iwasawa's formula for `(u, w)`.

use rand::Rng;

use super::{divide_by_p_power, log1p_series, PairingValue};
use crate::derivations::DerivationContext;
use crate::error::{Error, Result};
use crate::laurent_tower::TowerDesc;
use crate::local_field::{is_exact, BaseElement, Field, EXACT};
use crate::series::{Series, Tail};

fn require_level(field: &Field, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("level must be positive".into()));
    }
    match field.cyclotomic_level() {
        Some(k) if k == n && field.degree() == (field.p() as usize - 1) * (field.p() as usize).pow(n - 1) => Ok(()),
        _ => Err(Error::DomainViolation(format!("the formula needs L = Q_p(zeta_{{p^{n}}})"))),
    }
}

/// Working precision in `L` for a trace that must be known mod `p^{2n}`.
fn work_prec(field: &Field, n: u32) -> Result<i64> {
    let qp = field.subfield(0);
    let diff = field.different_valuation(&qp)?;
    Ok((2 * n as i64 + 1) * field.e() + diff + 2)
}

fn require_domain(u: &BaseElement, n: u32) -> Result<BaseElement> {
    let field = u.field();
    let one = BaseElement::one(field, EXACT);
    let x = u.sub(&one);
    let bound = 2 * (field.p() as i64).pow(n - 1);
    if x.val_or_prec() <= bound {
        if x.val_or_prec() >= x.prec() {
            return Err(Error::PrecisionExhausted("u - 1 is zero at the given precision".into()));
        }
        return Err(Error::DomainViolation(format!("v_L(u - 1) must exceed {bound}")));
    }
    Ok(x)
}

/// `log u` at working precision.
fn log_unit(x: &BaseElement, prec: i64) -> Result<BaseElement> {
    let field = x.field();
    let x = x.with_prec(prec);
    if x.is_zero() {
        return Ok(BaseElement::zero(field, x.prec()));
    }
    let v = x.valuation()?;
    let deg = (prec / v + 2) as usize;
    let qp = field.subfield(0);
    log1p_series(&qp, deg, prec)?.eval(&x)
}

/// Exponent `Tr_{L/Q_p}(-log u) / p^n mod p^n` of `(u, zeta_{p^n})`, for
/// `L = Q_p(zeta_{p^n})` and `v_L(u - 1) > 2p^{n-1}`.
pub fn artin_hasse_classical(u: &BaseElement, n: u32) -> Result<PairingValue> {
    let field = u.field().clone();
    require_level(&field, n)?;
    let x = require_domain(u, n)?;
    let prec = work_prec(&field, n)?;
    let lg = log_unit(&x, prec)?;
    let tr = lg.neg().trace(&field.subfield(0))?;
    let c = divide_by_p_power(&tr, n, n)?;
    Ok(PairingValue::new(field.p(), n, vec![c]))
}

fn check_representation(g: &Series) -> Result<()> {
    if g.field().degree() != 1 {
        return Err(Error::Config("the representing series must have coefficients in Z_p".into()));
    }
    if g.coeffs().iter().any(|c| !c.is_zero() && c.val_or_prec() < 0) {
        return Err(Error::Config("the representing series must be integral".into()));
    }
    Ok(())
}

/// `g(pi_n)` and `g'(pi_n)` at precision `prec`.
fn eval_with_derivative(g: &Series, pi: &BaseElement) -> Result<(BaseElement, BaseElement)> {
    let at = |s: &Series| -> Result<BaseElement> {
        let s = if s.tail() == Tail::Zero { s.clone() } else { s.clone().with_tail(Tail::Integral) };
        s.eval(pi)
    };
    Ok((at(g)?, at(&g.derivative())?))
}

/// `psi(w) = -zeta w^{-1} g'(pi_n)` for a principal unit `w = g(pi_n)`.
pub fn iwasawa_psi(w: &BaseElement, n: u32, g: &Series) -> Result<BaseElement> {
    let field = w.field().clone();
    require_level(&field, n)?;
    let prec = if is_exact(w.prec()) { work_prec(&field, n)? } else { w.prec() };
    psi_at(w, g, prec)
}

fn psi_at(w: &BaseElement, g: &Series, prec: i64) -> Result<BaseElement> {
    let field = w.field().clone();
    let one = BaseElement::one(&field, EXACT);
    if w.sub(&one).val_or_prec() < 1 {
        return Err(Error::DomainViolation("w must be a principal unit".into()));
    }
    check_representation(g)?;
    let pi = BaseElement::generator(&field, prec);
    let (gw, dg) = eval_with_derivative(g, &pi)?;
    let cmp = gw.prec().min(w.prec()).min(prec);
    if !gw.eq_mod(w, cmp) {
        return Err(Error::RepresentationMismatch(format!("g(pi_n) differs from w modulo pi^{cmp}")));
    }
    let zeta = BaseElement::zeta(&field, EXACT)?;
    let w_inv = w.with_prec(prec).inv()?;
    Ok(zeta.mul(&w_inv).mul(&dg).neg())
}

/// Exponent `Tr_{L/Q_p}(psi(w) log u) / p^n mod p^n` of `(u, w)`.
/// Without `g` the canonical representation of `w` is used.
pub fn iwasawa_pairing(u: &BaseElement, w: &BaseElement, n: u32, g: Option<&Series>) -> Result<PairingValue> {
    let field = u.field().clone();
    require_level(&field, n)?;
    if w.field() != &field {
        return Err(Error::AmbientMismatch);
    }
    let x = require_domain(u, n)?;
    let prec = work_prec(&field, n)?;
    let owned;
    let g = match g {
        Some(g) => g,
        None => {
            owned = representing_series(w)?;
            &owned
        }
    };
    let psi = psi_at(w, g, prec)?;
    let lg = log_unit(&x, prec)?;
    let tr = psi.mul(&lg).trace(&field.subfield(0))?;
    let c = divide_by_p_power(&tr, n, n)?;
    Ok(PairingValue::new(field.p(), n, vec![c]))
}

fn context(w: &BaseElement) -> Result<DerivationContext> {
    let tower = TowerDesc::new(w.field(), 0, 0)?;
    let prec = if is_exact(w.prec()) { 64 * w.field().e() } else { w.prec() };
    DerivationContext::over_qp(&tower, prec)
}

fn to_series(field: &Field, coeffs: Vec<BaseElement>) -> Result<Series> {
    let qp = field.subfield(0);
    let coeffs = coeffs.iter().map(|c| c.restrict(&qp)).collect::<Result<Vec<_>>>()?;
    Ok(Series::new(&qp, coeffs, Tail::Zero))
}

/// A polynomial `g` over `Z_p` with `g(pi_L) = w`.
pub fn representing_series(w: &BaseElement) -> Result<Series> {
    let ctx = context(w)?;
    to_series(w.field(), ctx.representing_poly(w)?)
}

/// `g + h P` for the canonical `g`, a random linear `h` and the minimal
/// polynomial `P` of `pi_L`: another representation of the same element.
pub fn randomized_representing_series<R: Rng + ?Sized>(w: &BaseElement, rng: &mut R) -> Result<Series> {
    let ctx = context(w)?;
    to_series(w.field(), ctx.randomized_poly(w, rng)?)
}
