//! Explicit formulas for the Kummer pairing attached to a Lubin-Tate formal
//! group, from the classical one-dimensional laws to the higher dimensional
//! ones built on Jacobian determinants.
//!
//! Values are returned as [`PairingValue`]s: the coordinates of a point of
//! `kappa_n` in the basis `e_n`, i.e. integers modulo `p^n`. Every engine
//! here works over `K = Q_p` with `pi = p` (height one), so there is a single
//! coordinate. For the classical engines the coordinate is the exponent of
//! `zeta_{p^n}`.

mod classical;
mod higher;
mod plan;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent_tower::{Tower, TowerElement};
use crate::local_field::{pow_big, BaseElement, Field};
use crate::series::{Evaluable, Series, Tail};

pub use classical::{
    artin_hasse_classical, iwasawa_pairing, iwasawa_psi, randomized_representing_series, representing_series,
};
pub use higher::{
    artin_hasse_higher, fit_invariant, iwasawa_gen_higher, kolyvagin_pairing, lubin_tate_wiles, AhVariant,
};
pub use plan::{admissible_witness, plan_parameters, FglMeta, PairingPlan};

/// Coordinates of a pairing value in `(Z_p / p^n)^h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingValue {
    p: u64,
    level: u32,
    coords: Vec<BigInt>,
}

impl PairingValue {
    pub fn new(p: u64, level: u32, coords: Vec<BigInt>) -> Self {
        let m = pow_big(&BigInt::from(p), level as i64);
        let coords = coords.into_iter().map(|c| c.mod_floor(&m)).collect();
        PairingValue { p, level, coords }
    }

    pub fn zero(p: u64, level: u32, h: usize) -> Self {
        PairingValue { p, level, coords: vec![BigInt::zero(); h] }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn level(&self) -> u32 {
        self.level
    }
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }
    pub fn modulus(&self) -> BigInt {
        pow_big(&BigInt::from(self.p), self.level as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn check(&self, o: &Self) {
        assert!(self.p == o.p && self.level == o.level && self.coords.len() == o.coords.len(), "incompatible values");
    }

    /// Sum in `kappa_n`, coordinatewise mod `p^n`.
    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        Self::new(self.p, self.level, self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.p, self.level, self.coords.iter().map(|a| -a).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.p, self.level, self.coords.iter().map(|a| a * k).collect())
    }

    /// Image under `f^{(n-m)}: kappa_n -> kappa_m`, which on coordinates is
    /// reduction mod `p^m`.
    pub fn reduce_to(&self, m: u32) -> Result<Self> {
        if m > self.level {
            return Err(Error::Config(format!("cannot lift a level {} value to level {m}", self.level)));
        }
        Ok(Self::new(self.p, m, self.coords.clone()))
    }
}

impl fmt::Display for PairingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({}) mod {}^{}", c.join(", "), self.p, self.level)
    }
}

/// The residue mod `p^n` of an element `z` of `Q_p`, which must be integral
/// and known modulo `p^n`.
pub(crate) fn coordinate(z: &BaseElement, n: u32) -> Result<BigInt> {
    let field = z.field();
    if field.degree() != 1 {
        return Err(Error::Config("coordinates are read off elements of Q_p".into()));
    }
    if z.prec() < n as i64 {
        return Err(Error::PrecisionExhausted(format!("value known only modulo p^{}", z.prec())));
    }
    if z.is_zero() {
        return Ok(BigInt::zero());
    }
    let v = z.valuation()?;
    if v < 0 {
        return Err(Error::DomainViolation(format!("value {z} is not integral")));
    }
    let (c, shift) = z.scaled_coords();
    let m = pow_big(field.p_big(), n as i64);
    Ok((&c[0] * pow_big(field.p_big(), shift)).mod_floor(&m))
}

/// Exact division by `p^k` followed by the coordinate mod `p^n`; fails when
/// the quotient is not integral.
pub(crate) fn divide_by_p_power(z: &BaseElement, k: u32, n: u32) -> Result<BigInt> {
    if !z.is_zero() && z.valuation()? < k as i64 {
        return Err(Error::DomainViolation(format!("{z} is not divisible by p^{k}")));
    }
    coordinate(&z.mul_p_pow(-(k as i64)), n)
}

/// Tower element evaluated with truncating products, so that series in
/// elements with negative indices stay inside a wide working window.
#[derive(Clone, Debug)]
pub(crate) struct Wide(pub TowerElement);

impl Evaluable for Wide {
    fn coeff_field(&self) -> &Field {
        self.0.tower().base()
    }
    fn add_e(&self, o: &Self) -> Self {
        Wide(self.0.add(&o.0))
    }
    fn mul_e(&self, o: &Self) -> Result<Self> {
        Ok(Wide(self.0.mul_truncated(&o.0)))
    }
    fn scale_e(&self, c: &BaseElement) -> Self {
        Wide(self.0.scale(c))
    }
    fn constant_e(&self, c: &BaseElement) -> Self {
        Wide(TowerElement::from_base(self.0.tower(), c))
    }
    fn prec_e(&self) -> i64 {
        self.0.prec()
    }
    fn val_e(&self) -> i64 {
        self.0.val_or_prec()
    }
    fn with_prec_e(&self, n: i64) -> Self {
        Wide(self.0.with_prec(n))
    }
}

/// Move an element into a tower with the same base and a different window.
pub(crate) fn rewindow(x: &TowerElement, to: &Tower) -> Result<TowerElement> {
    if x.tower().base() == to.base() {
        TowerElement::new(to, x.terms().iter().map(|(i, c)| (i.clone(), c.clone())), x.prec())
    } else {
        x.embed(&to.with_window(x.tower().window()))
            .and_then(|y| TowerElement::new(to, y.terms().iter().map(|(i, c)| (i.clone(), c.clone())), y.prec()))
    }
}

/// Largest absolute index occurring in `x`.
pub(crate) fn index_span(x: &TowerElement) -> i64 {
    x.terms().keys().flat_map(|i| i.iter().map(|k| k.abs())).max().unwrap_or(0)
}

/// `log(1+X) = sum (-1)^{k+1} X^k / k` to degree `deg` over `field`.
pub(crate) fn log1p_series(field: &Field, deg: usize, prec: i64) -> Result<Series> {
    let mut c = vec![BaseElement::zero(field, crate::local_field::EXACT)];
    for k in 1..=deg as i64 {
        let num = BaseElement::from_int(field, if k % 2 == 1 { 1 } else { -1 }, prec);
        c.push(num.divide(&BaseElement::from_int(field, k, crate::local_field::EXACT))?);
    }
    Ok(Series::new(field, c, Tail::Logarithmic))
}
