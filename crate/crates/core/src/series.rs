//! Truncated power series with p-adic coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::laurent_tower::TowerElement;
use crate::local_field::{is_exact, BaseElement, Field, EXACT};

/// What is known about the coefficients beyond the stored degree; used to
/// certify the truncation error when a series is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Omitted coefficients are integral.
    Integral,
    /// Omitted coefficient of degree `k` has valuation at least `-v(k)`.
    Logarithmic,
    /// Omitted coefficient of degree `k` has valuation at least
    /// `-e((k-1)/(p-1) + log_p k)`.
    Exponential,
    /// Nothing beyond the stored degree (a polynomial).
    Zero,
}

/// Something a power series can be evaluated at.
pub trait Evaluable: Clone {
    fn coeff_field(&self) -> &Field;
    fn add_e(&self, o: &Self) -> Self;
    fn mul_e(&self, o: &Self) -> Result<Self>;
    fn scale_e(&self, c: &BaseElement) -> Self;
    fn constant_e(&self, c: &BaseElement) -> Self;
    fn prec_e(&self) -> i64;
    fn val_e(&self) -> i64;
    fn with_prec_e(&self, n: i64) -> Self;
}

impl Evaluable for BaseElement {
    fn coeff_field(&self) -> &Field {
        self.field()
    }
    fn add_e(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn mul_e(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(o))
    }
    fn scale_e(&self, c: &BaseElement) -> Self {
        self.mul(c)
    }
    fn constant_e(&self, c: &BaseElement) -> Self {
        c.clone()
    }
    fn prec_e(&self) -> i64 {
        self.prec()
    }
    fn val_e(&self) -> i64 {
        self.val_or_prec()
    }
    fn with_prec_e(&self, n: i64) -> Self {
        self.with_prec(n)
    }
}

impl Evaluable for TowerElement {
    fn coeff_field(&self) -> &Field {
        self.tower().base()
    }
    fn add_e(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn mul_e(&self, o: &Self) -> Result<Self> {
        self.mul(o)
    }
    fn scale_e(&self, c: &BaseElement) -> Self {
        self.scale(c)
    }
    fn constant_e(&self, c: &BaseElement) -> Self {
        TowerElement::from_base(self.tower(), c)
    }
    fn prec_e(&self) -> i64 {
        self.prec()
    }
    fn val_e(&self) -> i64 {
        self.val_or_prec()
    }
    fn with_prec_e(&self, n: i64) -> Self {
        self.with_prec(n)
    }
}

/// `sum_{i <= deg} c_i X^i` over a finite extension.
#[derive(Clone)]
pub struct Series {
    field: Field,
    coeffs: Vec<BaseElement>,
    tail: Tail,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| format!("{}", c)).collect();
        write!(f, "Series[{}]", parts.join("; "))
    }
}

pub(crate) fn floor_log(p: u64, k: u64) -> i64 {
    let mut r = 0;
    let mut x = k;
    while x >= p {
        x /= p;
        r += 1;
    }
    r
}

impl Series {
    pub fn new(field: &Field, coeffs: Vec<BaseElement>, tail: Tail) -> Self {
        assert!(!coeffs.is_empty(), "series needs a constant term");
        Series { field: field.clone(), coeffs, tail }
    }

    /// Integer coefficients, exact.
    pub fn from_ints(field: &Field, coeffs: &[i64], tail: Tail) -> Self {
        Self::new(field, coeffs.iter().map(|c| BaseElement::from_int(field, *c, EXACT)).collect(), tail)
    }

    pub fn zero(field: &Field, deg: usize) -> Self {
        Self::new(field, vec![BaseElement::zero(field, EXACT); deg + 1], Tail::Zero)
    }

    /// The series `X`.
    pub fn x(field: &Field, deg: usize) -> Self {
        let mut s = Self::zero(field, deg);
        if deg >= 1 {
            s.coeffs[1] = BaseElement::one(field, EXACT);
        }
        s
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn deg(&self) -> usize {
        self.coeffs.len() - 1
    }
    pub fn tail(&self) -> Tail {
        self.tail
    }
    pub fn coeffs(&self) -> &[BaseElement] {
        &self.coeffs
    }
    pub fn coeff(&self, i: usize) -> BaseElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| BaseElement::zero(&self.field, EXACT))
    }
    pub fn set_coeff(&mut self, i: usize, c: BaseElement) {
        self.coeffs[i] = c;
    }
    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    fn join_tail(a: Tail, b: Tail) -> Tail {
        match (a, b) {
            (Tail::Zero, t) | (t, Tail::Zero) => t,
            (Tail::Exponential, _) | (_, Tail::Exponential) => Tail::Exponential,
            (Tail::Logarithmic, _) | (_, Tail::Logarithmic) => Tail::Logarithmic,
            _ => Tail::Integral,
        }
    }

    /// Truncate to degree `deg`; the truncated part is no longer known.
    pub fn truncate(&self, deg: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(deg + 1, BaseElement::zero(&self.field, EXACT));
        let tail = if deg < self.deg() && self.tail == Tail::Zero { Tail::Integral } else { self.tail };
        Series { field: self.field.clone(), coeffs: c, tail }
    }

    /// Drop trailing zero coefficients of a polynomial.
    pub fn trim(&self) -> Self {
        if self.tail != Tail::Zero {
            return self.clone();
        }
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Series { field: self.field.clone(), coeffs: c, tail: Tail::Zero }
    }

    /// Extend a polynomial with explicit zero coefficients.
    pub fn pad(&self, deg: usize) -> Self {
        let mut c = self.coeffs.clone();
        if deg + 1 > c.len() {
            c.resize(deg + 1, BaseElement::zero(&self.field, EXACT));
        }
        Series { field: self.field.clone(), coeffs: c, tail: self.tail }
    }

    fn common_deg(&self, o: &Self) -> usize {
        match (self.tail, o.tail) {
            (Tail::Zero, Tail::Zero) => self.deg().max(o.deg()),
            (Tail::Zero, _) => o.deg(),
            (_, Tail::Zero) => self.deg(),
            _ => self.deg().min(o.deg()),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let d = self.common_deg(o);
        let c = (0..=d).map(|i| self.coeff(i).add(&o.coeff(i))).collect();
        Series { field: self.field.clone(), coeffs: c, tail: Self::join_tail(self.tail, o.tail) }
    }

    pub fn neg(&self) -> Self {
        Series { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect(), tail: self.tail }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &BaseElement) -> Self {
        Series { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.mul(a)).collect(), tail: self.tail }
    }

    /// Product truncated to the common known degree (or the full product of polynomials).
    pub fn mul(&self, o: &Self) -> Self {
        let d = match (self.tail, o.tail) {
            (Tail::Zero, Tail::Zero) => self.deg() + o.deg(),
            (Tail::Zero, _) => o.deg(),
            (_, Tail::Zero) => self.deg(),
            _ => self.deg().min(o.deg()),
        };
        self.mul_trunc(o, d)
    }

    /// Product truncated to degree `d`.
    pub fn mul_trunc(&self, o: &Self, d: usize) -> Self {
        let mut c = vec![BaseElement::zero(&self.field, EXACT); d + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(d + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(d + 1 - i) {
                if !b.is_zero() {
                    c[i + j] = c[i + j].add(&a.mul(b));
                }
            }
        }
        let tail = if self.tail == Tail::Zero && o.tail == Tail::Zero && d >= self.deg() + o.deg() {
            Tail::Zero
        } else {
            Self::join_tail(Self::join_tail(self.tail, o.tail), Tail::Integral)
        };
        Series { field: self.field.clone(), coeffs: c, tail }
    }

    pub fn pow_trunc(&self, k: usize, d: usize) -> Self {
        let mut r = Series::new(&self.field, vec![BaseElement::one(&self.field, EXACT)], Tail::Zero).pad(d);
        for _ in 0..k {
            r = r.mul_trunc(self, d);
        }
        r
    }

    /// `self(inner(X))`, where `inner(0) = 0`, truncated to degree `d`.
    pub fn compose_trunc(&self, inner: &Series, d: usize) -> Result<Self> {
        if !inner.coeff(0).is_zero() {
            return Err(Error::NotInMaximalIdeal);
        }
        let mut acc = Series::zero(&self.field, d);
        let mut pw = Series::new(&self.field, vec![BaseElement::one(&self.field, EXACT)], Tail::Zero).pad(d);
        for k in 0..=self.deg().min(d) {
            let c = self.coeff(k);
            if !c.is_zero() {
                acc = acc.add(&pw.scale(&c));
            }
            if k < d {
                pw = pw.mul_trunc(inner, d);
            }
        }
        acc.tail = Tail::Integral;
        Ok(acc)
    }

    /// Composition truncated to the smaller known degree.
    pub fn compose(&self, inner: &Series) -> Result<Self> {
        let d = match (self.tail, inner.tail) {
            (Tail::Zero, Tail::Zero) => self.deg() * inner.deg().max(1),
            (Tail::Zero, _) => inner.deg(),
            (_, Tail::Zero) => self.deg(),
            _ => self.deg().min(inner.deg()),
        };
        let mut out = self.compose_trunc(inner, d)?;
        if self.tail == Tail::Zero && inner.tail == Tail::Zero {
            out.tail = Tail::Zero;
        }
        Ok(out)
    }

    pub fn derivative(&self) -> Self {
        let c: Vec<BaseElement> = if self.deg() == 0 {
            vec![BaseElement::zero(&self.field, EXACT)]
        } else {
            (1..=self.deg()).map(|i| self.coeffs[i].mul_int(i as i64)).collect()
        };
        Series { field: self.field.clone(), coeffs: c, tail: self.tail }
    }

    /// `int_0^X`, dividing the degree-`i` coefficient by `i + 1`.
    pub fn integrate(&self) -> Result<Self> {
        let mut c = vec![BaseElement::zero(&self.field, EXACT)];
        for (i, a) in self.coeffs.iter().enumerate() {
            let k = BaseElement::from_int(&self.field, i as i64 + 1, EXACT);
            c.push(a.divide(&k)?);
        }
        let tail = if self.tail == Tail::Zero { Tail::Zero } else { Tail::Logarithmic };
        Ok(Series { field: self.field.clone(), coeffs: c, tail })
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.coeff(0);
        if !c0.is_unit() {
            return Err(Error::NonInvertible);
        }
        let d = self.deg();
        let i0 = if is_exact(c0.prec()) { exact_or_prec(&c0, self.min_prec())? } else { c0.inv()? };
        let mut out = vec![i0.clone()];
        for k in 1..=d {
            let mut s = BaseElement::zero(&self.field, EXACT);
            for j in 1..=k {
                s = s.add(&self.coeff(j).mul(&out[k - j]));
            }
            out.push(s.mul(&i0).neg());
        }
        Ok(Series { field: self.field.clone(), coeffs: out, tail: Tail::Integral })
    }

    fn min_prec(&self) -> i64 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(EXACT)
    }

    /// Compositional inverse of `X + a_2 X^2 + ...`.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(Error::NotInMaximalIdeal);
        }
        let one = BaseElement::one(&self.field, EXACT);
        if !self.coeff(1).sub(&one).is_zero() {
            return Err(Error::Unsupported("reversion needs linear coefficient 1".into()));
        }
        let d = self.deg();
        let mut e = Series::x(&self.field, d);
        for k in 2..=d {
            let val = self.compose_trunc(&e, k)?;
            let ck = val.coeff(k);
            e.coeffs[k] = e.coeffs[k].sub(&ck);
        }
        e.tail = self.tail;
        Ok(e)
    }

    pub fn embed(&self, to: &Field) -> Result<Self> {
        let c = self.coeffs.iter().map(|c| c.embed(to)).collect::<Result<Vec<_>>>()?;
        Ok(Series { field: to.clone(), coeffs: c, tail: self.tail })
    }

    /// Coefficientwise equality modulo `pi_K^n` up to degree `d`.
    pub fn eq_mod(&self, o: &Self, n: i64, d: usize) -> bool {
        (0..=d).all(|i| {
            let a = self.coeff(i);
            let b = o.coeff(i);
            let diff = a.sub(&b);
            diff.is_zero() || diff.val_or_prec() >= n
        })
    }

    /// Lower every coefficient to precision `n`.
    pub fn with_prec(&self, n: i64) -> Self {
        Series {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c.with_prec(n)).collect(),
            tail: self.tail,
        }
    }

    /// Lower bound on `v(c_k x^k)` for omitted degrees `k > deg`, in units of
    /// the evaluation field (`e_rel` = ramification over the coefficient field).
    fn tail_bound(&self, vx: i64, e_rel: i64) -> Result<i64> {
        let d = self.deg() as i64;
        let p = self.field.p();
        let e = self.field.e() * e_rel;
        let loss = |k: i64| -> i64 {
            match self.tail {
                Tail::Logarithmic => e * floor_log(p, k as u64),
                Tail::Exponential => e * ((k - 1) / (p as i64 - 1) + floor_log(p, k as u64)),
                _ => 0,
            }
        };
        match self.tail {
            Tail::Zero => Ok(EXACT),
            Tail::Integral => Ok((d + 1) * vx),
            Tail::Exponential if vx * (p as i64 - 1) <= e => {
                Err(Error::DomainViolation("exponential needs v(x) > e/(p-1)".into()))
            }
            _ => {
                // the bound k*vx - loss(k) is minimized on a finite range
                let mut best = EXACT;
                let mut k = d + 1;
                while k <= d + 1 + 4096 {
                    best = best.min(k * vx - loss(k));
                    let lin = if self.tail == Tail::Exponential { e * k / (p as i64 - 1) } else { 0 };
                    if k * vx - lin - e * 64 > best {
                        break;
                    }
                    k += 1;
                }
                Ok(best)
            }
        }
    }

    /// Evaluate at `x` with `v(x) >= 1`, certifying the truncation error.
    pub fn eval<E: Evaluable>(&self, x: &E) -> Result<E> {
        let vx = x.val_e();
        if vx < 1 {
            return Err(Error::NotInMaximalIdeal);
        }
        let target_field = x.coeff_field().clone();
        let s = if std::sync::Arc::ptr_eq(&self.field, &target_field) { self.clone() } else { self.embed(&target_field)? };
        // `s` already has its coefficients in the evaluation field
        let target = x.prec_e().min(s.tail_bound(vx, 1)?);
        // headroom for negative coefficient valuations
        let min_cv = s.coeffs.iter().filter(|c| !c.is_zero()).map(|c| c.val_or_prec()).min().unwrap_or(0).min(0);
        let work = if is_exact(target) { EXACT } else { target - min_cv };
        let mut acc = x.constant_e(&s.coeff(0));
        let mut pw = x.with_prec_e(work);
        for k in 1..=s.deg() {
            if (k as i64) * vx + min_cv >= target && !is_exact(target) {
                break;
            }
            let c = s.coeff(k);
            if !c.is_zero() {
                acc = acc.add_e(&pw.scale_e(&c));
            }
            if k < s.deg() {
                pw = pw.mul_e(x)?.with_prec_e(work);
            }
        }
        Ok(acc.with_prec_e(target))
    }
}

fn exact_or_prec(c: &BaseElement, prec: i64) -> Result<BaseElement> {
    let one = BaseElement::one(c.field(), EXACT);
    match one.divide(c) {
        Ok(x) => Ok(x),
        Err(_) => c.with_prec(if is_exact(prec) { 64 * c.field().e() } else { prec }).inv(),
    }
}

pub type Exponent = Vec<u32>;

/// Sparse multivariate series truncated at total degree `dmax`.
#[derive(Clone)]
pub struct MSeries {
    field: Field,
    nvars: usize,
    dmax: u32,
    terms: BTreeMap<Exponent, BaseElement>,
}

impl fmt::Debug for MSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(e, c)| format!("{:?}:{}", e, c)).collect();
        write!(f, "MSeries[{}]", parts.join("; "))
    }
}

impl MSeries {
    pub fn zero(field: &Field, nvars: usize, dmax: u32) -> Self {
        MSeries { field: field.clone(), nvars, dmax, terms: BTreeMap::new() }
    }

    pub fn constant(field: &Field, nvars: usize, dmax: u32, c: &BaseElement) -> Self {
        let mut s = Self::zero(field, nvars, dmax);
        s.insert(vec![0; nvars], c.clone());
        s
    }

    pub fn var(field: &Field, nvars: usize, dmax: u32, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut s = Self::zero(field, nvars, dmax);
        s.insert(e, BaseElement::one(field, EXACT));
        s
    }

    /// A univariate series placed in variable `i`.
    pub fn from_uni(s: &Series, nvars: usize, dmax: u32, i: usize) -> Self {
        let mut out = Self::zero(s.field(), nvars, dmax);
        for (k, c) in s.coeffs().iter().enumerate().take(dmax as usize + 1) {
            let mut e = vec![0; nvars];
            e[i] = k as u32;
            out.insert(e, c.clone());
        }
        out
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn dmax(&self) -> u32 {
        self.dmax
    }
    pub fn terms(&self) -> &BTreeMap<Exponent, BaseElement> {
        &self.terms
    }

    pub fn coeff(&self, e: &[u32]) -> BaseElement {
        self.terms.get(e).cloned().unwrap_or_else(|| BaseElement::zero(&self.field, EXACT))
    }

    pub fn insert(&mut self, e: Exponent, c: BaseElement) {
        if e.iter().sum::<u32>() > self.dmax {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    fn accumulate(&mut self, e: Exponent, c: BaseElement) {
        if e.iter().sum::<u32>() > self.dmax || c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&e) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }

    pub fn with_dmax(&self, dmax: u32) -> Self {
        let mut out = Self::zero(&self.field, self.nvars, dmax);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.dmax = self.dmax.min(o.dmax);
        out.terms.retain(|e, _| e.iter().sum::<u32>() <= out.dmax);
        for (e, c) in &o.terms {
            out.accumulate(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, a: &BaseElement) -> Self {
        let mut out = Self::zero(&self.field, self.nvars, self.dmax);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.mul(a));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let dmax = self.dmax.min(o.dmax);
        let mut out = Self::zero(&self.field, self.nvars, dmax);
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            for (e2, c2) in &o.terms {
                let d2: u32 = e2.iter().sum();
                if d1 + d2 > dmax {
                    continue;
                }
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.accumulate(e, c1.mul(c2));
            }
        }
        out
    }

    /// Homogeneous part of total degree `k`.
    pub fn homogeneous(&self, k: u32) -> Self {
        let mut out = Self::zero(&self.field, self.nvars, self.dmax);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() == k {
                out.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Part of total degree below `k`.
    pub fn below(&self, k: u32) -> Self {
        let mut out = Self::zero(&self.field, self.nvars, self.dmax);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() < k {
                out.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Substitute `args[i]` for variable `i`; every argument must lack a constant term.
    pub fn compose(&self, args: &[MSeries]) -> Result<Self> {
        assert_eq!(args.len(), self.nvars);
        let nv = args[0].nvars;
        let dmax = args.iter().map(|a| a.dmax).min().unwrap().min(self.dmax);
        for a in args {
            if !a.coeff(&vec![0; nv]).is_zero() {
                return Err(Error::NotInMaximalIdeal);
            }
        }
        let maxdeg: Vec<u32> =
            (0..self.nvars).map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0).min(dmax)).collect();
        let mut powers: Vec<Vec<MSeries>> = Vec::with_capacity(self.nvars);
        for (i, a) in args.iter().enumerate() {
            let a = a.with_dmax(dmax);
            let mut pw = vec![MSeries::constant(&self.field, nv, dmax, &BaseElement::one(&self.field, EXACT))];
            for k in 1..=maxdeg[i] {
                let next = pw[k as usize - 1].mul(&a);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = Self::zero(&self.field, nv, dmax);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() > dmax {
                continue;
            }
            let mut term = MSeries::constant(&self.field, nv, dmax, c);
            for (i, k) in e.iter().enumerate() {
                if *k > 0 {
                    term = term.mul(&powers[i][*k as usize]);
                }
            }
            for (e2, c2) in term.terms {
                out.accumulate(e2, c2);
            }
        }
        Ok(out)
    }

    /// `outer(self)` for a univariate `outer`; `self` must lack a constant term.
    pub fn compose_outer(outer: &Series, inner: &MSeries) -> Result<Self> {
        let x = MSeries::from_uni(outer, 1, inner.dmax, 0);
        x.compose(std::slice::from_ref(inner))
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.field, self.nvars, self.dmax);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                out.insert(e2, c.mul_int(e[i] as i64));
            }
        }
        out
    }

    /// Restrict to `X_i = 0` for every `i` except `keep`, as a univariate series.
    pub fn restrict_to(&self, keep: usize) -> Series {
        let mut c = vec![BaseElement::zero(&self.field, EXACT); self.dmax as usize + 1];
        for (e, v) in &self.terms {
            if e.iter().enumerate().all(|(i, k)| i == keep || *k == 0) {
                c[e[keep] as usize] = v.clone();
            }
        }
        Series::new(&self.field, c, Tail::Integral)
    }

    pub fn eq_mod(&self, o: &Self, n: i64) -> bool {
        let d = self.sub(o);
        d.terms.values().all(|c| c.val_or_prec() >= n)
    }

    /// Largest coefficient precision deficit, for diagnostics.
    pub fn min_prec(&self) -> i64 {
        self.terms.values().map(|c| c.prec()).min().unwrap_or(EXACT)
    }

    pub fn with_prec(&self, n: i64) -> Self {
        let mut out = Self::zero(&self.field, self.nvars, self.dmax);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c.with_prec(n));
        }
        out
    }

    /// Evaluate a bivariate series at `(x, y)` with `v(x), v(y) >= 1`;
    /// `polynomial` states that no terms were truncated.
    pub fn eval2<E: Evaluable>(&self, x: &E, y: &E, polynomial: bool) -> Result<E> {
        assert_eq!(self.nvars, 2);
        let vmin = x.val_e().min(y.val_e());
        if vmin < 1 {
            return Err(Error::NotInMaximalIdeal);
        }
        let target_field = x.coeff_field().clone();
        let mut target = x.prec_e().min(y.prec_e());
        if !polynomial {
            target = target.min((self.dmax as i64 + 1) * vmin);
        }
        let work = if is_exact(target) { EXACT } else { target };
        let maxd = self.dmax as usize;
        let mut xp = vec![x.constant_e(&BaseElement::one(&target_field, EXACT))];
        let mut yp = xp.clone();
        for k in 1..=maxd {
            if (k as i64) * x.val_e() >= work && !is_exact(work) {
                break;
            }
            xp.push(xp[k - 1].mul_e(x)?.with_prec_e(work));
        }
        for k in 1..=maxd {
            if (k as i64) * y.val_e() >= work && !is_exact(work) {
                break;
            }
            yp.push(yp[k - 1].mul_e(y)?.with_prec_e(work));
        }
        let mut acc = x.constant_e(&BaseElement::zero(&target_field, EXACT));
        for (e, c) in &self.terms {
            let (i, j) = (e[0] as usize, e[1] as usize);
            if i >= xp.len() || j >= yp.len() {
                continue;
            }
            let c = c.embed(&target_field)?;
            acc = acc.add_e(&xp[i].mul_e(&yp[j])?.scale_e(&c));
        }
        Ok(acc.with_prec_e(target))
    }
}

/// `p^k` as an exact element.
pub fn p_power(field: &Field, k: i64) -> BaseElement {
    BaseElement::from_int(field, 1, EXACT).mul_p_pow(k)
}

/// Exact integer as a base element.
pub fn int(field: &Field, n: i64) -> BaseElement {
    BaseElement::from_bigint(field, &BigInt::from(n), EXACT)
}
